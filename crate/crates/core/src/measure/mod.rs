//! Readout pipelines: camera imaging with lobe-angle estimation, and
//! correlation-filter modal decomposition through a multiplexed hologram
//! and a 2f lens.

mod angle;
mod ccd;
mod cgh;
mod decompose;

pub use angle::{estimate_angle, ratio_from_angle, AngleEstimate, AngleOptions, DEFAULT_THRESHOLD};
pub use ccd::{render_ccd, CcdImage, Intensity, NoiseModel};
pub use cgh::{
    correlate_2f, design_cgh, design_cgh_with_offset, mode_bandwidth_px, Correlation, Hologram, HologramEntry,
    ModeFilter,
};
pub use decompose::{
    decompose_frames, measure_angle_frames, modal_decomposition, phase_from_interference,
    phase_from_interference_with_tolerance, FrameReading, MeasurementResult, Stat, DEFAULT_FRAMES,
    PHASE_CONSISTENCY_TOL,
};
