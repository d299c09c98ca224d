//! Sampled transverse fields at the beam waist: Hermite-Gaussian modes,
//! vector beams and the map between beams and cebit states.

mod beam;
mod grid;
mod hermite;
pub mod io;

pub use beam::{
    decode_overlaps, encode_cebit_state, overlap, radial_beam, ModeBasis, Path, Polarization,
    ScalarField, VectorBeam,
};
pub use grid::{GridSpec, DEFAULT_GRID_N, DEFAULT_WAIST, DEFAULT_WAVELENGTH, DEFAULT_WINDOW_W0};
pub use hermite::{hermite, hg_mode, MAX_LEAKAGE};
