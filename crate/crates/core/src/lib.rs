//! Simulator of teleportation with classically entangled light: a three-cebit
//! gate model, a sampled wave-optics bench that realizes it with a radially
//! polarized beam, two readout pipelines (lobe angle and correlation-filter
//! modal decomposition) and a batch harness.
//!
//! Everything is generic over [`scalar::Real`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the harness uses.

pub mod bench;
pub mod cebit;
pub mod error;
pub mod field;
pub mod fourier;
pub mod harness;
pub mod measure;
mod rng;
pub mod scalar;

pub use cebit::{BellOutcome, CorrectionLabel};
pub use error::{Error, Result};
pub use scalar::Real;

pub type PayloadCoeffs64 = cebit::PayloadCoeffs<f64>;
pub type CebitState64 = cebit::CebitState<f64>;
pub type Correction64 = cebit::Correction<f64>;
pub type GridSpec64 = field::GridSpec<f64>;
pub type ScalarField64 = field::ScalarField<f64>;
pub type VectorBeam64 = field::VectorBeam<f64>;
pub type ModeBasis64 = field::ModeBasis<f64>;
pub type FilterSetting64 = bench::FilterSetting<f64>;
pub type BenchConfig64 = bench::BenchConfig<f64>;
pub type CcdImage64 = measure::CcdImage<f64>;
pub type Hologram64 = measure::Hologram<f64>;
pub type MeasurementResult64 = measure::MeasurementResult<f64>;

pub type CebitState32 = cebit::CebitState<f32>;
pub type ScalarField32 = field::ScalarField<f32>;
