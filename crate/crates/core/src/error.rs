use thiserror::Error;

/// Errors raised by the simulation and measurement layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid payload: {0}")]
    InvalidPayload(&'static str),
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too small: mode ({l},{m}) loses {leakage:.3e} of its power outside the window")]
    GridTooSmall { l: usize, m: usize, leakage: f64 },
    #[error("fields are sampled on different grids")]
    GridMismatch,
    #[error("basis leakage: {residual:.3e} of the beam power lies outside the first-order mode pair")]
    BasisLeakage { residual: f64 },
    #[error("dark beam")]
    DarkBeam,
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("segmentation failure: expected two lobes, found {found}")]
    Segmentation { found: usize },
    #[error("lobe axis is vertical (theta = 0): ratio is infinite")]
    InfiniteRatio,
    #[error("carrier at {carrier_px:.1} px plus bandwidth {bandwidth_px:.1} px exceeds the Nyquist limit of {nyquist_px} px")]
    Aliasing {
        carrier_px: f64,
        bandwidth_px: f64,
        nyquist_px: usize,
    },
    #[error("hologram carriers are too close: separation {separation_px:.1} px, required {required_px:.1} px")]
    CarrierOverlap { separation_px: f64, required_px: f64 },
    #[error("read point ({row}, {col}) is outside the focal plane")]
    ReadPointOutOfBounds { row: i64, col: i64 },
    #[error("measurement inconsistency: interference intensities miss the unit circle by {0:.3e}")]
    MeasurementInconsistency(f64),
    #[error("relative phase undefined: one of the modes carries no power")]
    PhaseUndefined,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
