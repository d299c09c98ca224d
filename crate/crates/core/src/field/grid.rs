use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_GRID_N: usize = 512;
pub const DEFAULT_WINDOW_W0: f64 = 8.0;
/// Beam waist radius in meters.
pub const DEFAULT_WAIST: f64 = 1e-3;
/// He-Ne wavelength in meters.
pub const DEFAULT_WAVELENGTH: f64 = 594e-9;

/// Square sampling of the transverse plane, centered on pixel `n/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    n: usize,
    pitch: T,
    waist: T,
}

impl<T: Real> GridSpec<T> {
    /// `n` samples per axis (a power of two, at least 64) spaced by `pitch`
    /// meters, for modes of waist radius `waist`.
    pub fn new(n: usize, pitch: T, waist: T) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n must be a power of two >= 64, got {n}")));
        }
        if !(pitch > T::zero()) || !pitch.is_finite() {
            return Err(Error::InvalidGrid(format!("pitch must be positive, got {pitch}")));
        }
        if !(waist > T::zero()) || !waist.is_finite() {
            return Err(Error::InvalidGrid(format!("waist must be positive, got {waist}")));
        }
        let window = T::lit(n as f64) * pitch;
        if window < T::lit(6.0) * waist * (T::one() - T::tol()) {
            return Err(Error::InvalidGrid(format!(
                "window {} w0 is narrower than 6 w0",
                (window / waist).as_f64()
            )));
        }
        Ok(Self { n, pitch, waist })
    }

    /// Grid whose full width is `window_w0` waist radii.
    pub fn with_window(n: usize, window_w0: T, waist: T) -> Result<Self> {
        Self::new(n, window_w0 * waist / T::lit(n as f64), waist)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pitch(&self) -> T {
        self.pitch
    }

    pub fn waist(&self) -> T {
        self.waist
    }

    pub fn window(&self) -> T {
        T::lit(self.n as f64) * self.pitch
    }

    pub fn window_in_waists(&self) -> T {
        self.window() / self.waist
    }

    pub fn cell_area(&self) -> T {
        self.pitch * self.pitch
    }

    /// Physical coordinate of sample `i` along either axis.
    pub fn coord(&self, i: usize) -> T {
        (T::lit(i as f64) - T::lit((self.n / 2) as f64)) * self.pitch
    }

    pub fn coords(&self) -> Vec<T> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self::with_window(DEFAULT_GRID_N, T::lit(DEFAULT_WINDOW_W0), T::lit(DEFAULT_WAIST))
            .expect("default grid is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = GridSpec::<f64>::default();
        assert_eq!(g.n(), 512);
        assert!((g.window_in_waists() - 8.0).abs() < 1e-12);
        assert_eq!(g.coord(256), 0.0);
        assert!((g.coord(0) + 4e-3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::<f64>::with_window(100, 8.0, 1e-3).is_err());
        assert!(GridSpec::<f64>::with_window(32, 8.0, 1e-3).is_err());
        assert!(GridSpec::<f64>::with_window(256, 5.0, 1e-3).is_err());
        assert!(GridSpec::<f64>::new(256, 0.0, 1e-3).is_err());
        assert!(GridSpec::<f64>::new(256, 1e-5, -1.0).is_err());
        assert!(GridSpec::<f64>::with_window(64, 6.0, 1e-3).is_ok());
    }
}
