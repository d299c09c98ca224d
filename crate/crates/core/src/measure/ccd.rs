use std::io;
use std::path::Path as FsPath;

use ndarray::Array2;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::field::io::{write_pgm16, PgmScale};
use crate::field::{GridSpec, ScalarField, VectorBeam};
use crate::rng::{stream_rng, Stream};
use crate::scalar::Real;

/// Non-negative intensity frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdImage<T> {
    grid: GridSpec<T>,
    pixels: Array2<T>,
    saturation: Option<T>,
}

impl<T: Real> CcdImage<T> {
    pub fn new(grid: GridSpec<T>, pixels: Array2<T>) -> Result<Self> {
        if pixels.dim() != (grid.n(), grid.n()) {
            return Err(Error::InvalidArgument("pixel array does not match grid".into()));
        }
        if pixels.iter().any(|v| !(*v >= T::zero())) {
            return Err(Error::InvalidArgument("pixels must be non-negative".into()));
        }
        Ok(Self {
            grid,
            pixels,
            saturation: None,
        })
    }

    /// Clips every pixel at `level`.
    pub fn with_saturation(mut self, level: T) -> Self {
        self.pixels.mapv_inplace(|v| v.min(level));
        self.saturation = Some(level);
        self
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn pixels(&self) -> &Array2<T> {
        &self.pixels
    }

    pub fn saturation(&self) -> Option<T> {
        self.saturation
    }

    pub fn peak(&self) -> T {
        self.pixels.iter().fold(T::zero(), |m, &v| m.max(v))
    }

    pub fn save_pgm(&self, path: impl AsRef<FsPath>) -> io::Result<PgmScale> {
        write_pgm16(path, &self.pixels)
    }
}

/// Camera noise: Poisson shot noise (optional) then additive Gaussian noise
/// with standard deviation `gaussian_sigma * peak`. Pixels are clamped at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub gaussian_sigma: f64,
    /// Expected photon count at the peak pixel; `None` disables shot noise.
    pub shot_photons: Option<f64>,
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            gaussian_sigma: 0.0,
            shot_photons: None,
            seed: 0,
        }
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        Self {
            gaussian_sigma: sigma,
            shot_photons: None,
            seed,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.gaussian_sigma == 0.0 && self.shot_photons.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_sigma >= 0.0) || !self.gaussian_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gaussian_sigma must be >= 0, got {}",
                self.gaussian_sigma
            )));
        }
        if let Some(p) = self.shot_photons {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::InvalidArgument(format!("shot_photons must be > 0, got {p}")));
            }
        }
        Ok(())
    }

    /// Adds noise to `pixels` in place using the stream for `(seed, frame)`.
    pub(crate) fn apply<T: Real>(&self, pixels: &mut Array2<T>, stream: Stream, frame: u64) {
        if self.is_noiseless() {
            return;
        }
        let peak = pixels.iter().fold(0.0f64, |m, v| m.max(v.as_f64()));
        if peak <= 0.0 && self.gaussian_sigma == 0.0 {
            return;
        }
        let mut rng = stream_rng(self.seed, stream, frame);
        if let Some(photons) = self.shot_photons {
            if peak > 0.0 {
                let per_unit = photons / peak;
                for v in pixels.iter_mut() {
                    let lambda = v.as_f64() * per_unit;
                    let counts = if lambda > 0.0 {
                        Poisson::new(lambda).map(|d| d.sample(&mut rng)).unwrap_or(lambda)
                    } else {
                        0.0
                    };
                    *v = T::lit(counts / per_unit);
                }
            }
        }
        if self.gaussian_sigma > 0.0 {
            let sd = self.gaussian_sigma * if peak > 0.0 { peak } else { 1.0 };
            let normal = Normal::new(0.0, sd).expect("finite sigma");
            for v in pixels.iter_mut() {
                *v = T::lit((v.as_f64() + normal.sample(&mut rng)).max(0.0));
            }
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

/// Anything a camera can image.
pub trait Intensity<T> {
    fn grid(&self) -> &GridSpec<T>;
    fn intensity(&self) -> Array2<T>;
}

impl<T: Real> Intensity<T> for ScalarField<T> {
    fn grid(&self) -> &GridSpec<T> {
        ScalarField::grid(self)
    }

    fn intensity(&self) -> Array2<T> {
        ScalarField::intensity(self)
    }
}

impl<T: Real> Intensity<T> for VectorBeam<T> {
    fn grid(&self) -> &GridSpec<T> {
        VectorBeam::grid(self)
    }

    fn intensity(&self) -> Array2<T> {
        VectorBeam::intensity(self)
    }
}

/// `|E|^2` summed over polarization components, plus noise for frame `frame`.
pub fn render_ccd<T: Real, S: Intensity<T> + ?Sized>(src: &S, noise: &NoiseModel, frame: u64) -> CcdImage<T> {
    let mut pixels = src.intensity();
    noise.apply(&mut pixels, Stream::CameraNoise, frame);
    CcdImage {
        grid: *src.grid(),
        pixels,
        saturation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{hg_mode, radial_beam};

    fn grid() -> GridSpec<f64> {
        GridSpec::with_window(128, 8.0, 1e-3).unwrap()
    }

    #[test]
    fn psi10_nodal_column() {
        let g = grid();
        let img = render_ccd(&hg_mode(1, 0, &g, 0.0).unwrap(), &NoiseModel::noiseless(), 0);
        let n = g.n();
        for r in 0..n {
            assert_eq!(img.pixels()[[r, n / 2]], 0.0);
        }
        for (r, dc) in [(64, 10), (50, 20), (80, 5)] {
            let a = img.pixels()[[r, n / 2 + dc]];
            let b = img.pixels()[[r, n / 2 - dc]];
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn dark_field_renders_black() {
        let g = grid();
        let img = render_ccd(&ScalarField::<f64>::zeros(g), &NoiseModel::gaussian(0.0, 1), 0);
        assert!(img.pixels().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noise_is_seeded() {
        let g = grid();
        let beam = radial_beam(&g).unwrap();
        let noise = NoiseModel {
            gaussian_sigma: 0.02,
            shot_photons: Some(1e4),
            seed: 42,
        };
        let a = render_ccd(&beam, &noise, 3);
        let b = render_ccd(&beam, &noise, 3);
        let c = render_ccd(&beam, &noise, 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.pixels().iter().all(|&v| v >= 0.0));
        let clean = render_ccd(&beam, &NoiseModel::noiseless(), 3);
        assert_ne!(a, clean);
    }

    #[test]
    fn saturation_clips() {
        let g = grid();
        let img = render_ccd(&hg_mode(0, 0, &g, 0.0).unwrap(), &NoiseModel::noiseless(), 0);
        let level = img.peak() * 0.5;
        let sat = img.with_saturation(level);
        assert!(sat.pixels().iter().all(|&v| v <= level));
        assert_eq!(sat.saturation(), Some(level));
    }

    #[test]
    fn validation() {
        assert!(NoiseModel::gaussian(-0.1, 0).validate().is_err());
        assert!(NoiseModel {
            gaussian_sigma: 0.0,
            shot_photons: Some(0.0),
            seed: 0
        }
        .validate()
        .is_err());
        assert!(CcdImage::new(grid(), Array2::from_elem((128, 128), -1.0)).is_err());
    }
}
