use std::collections::VecDeque;

use ndarray::Array2;

use super::ccd::CcdImage;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_THRESHOLD: f64 = 0.1;

/// A third component at least this fraction of the second lobe's mass makes
/// the two-lobe segmentation ambiguous.
const THIRD_COMPONENT_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleOptions {
    /// Mask threshold as a fraction of the (smoothed) peak.
    pub threshold: f64,
    /// 3x3 box smoothing before thresholding.
    pub smoothing: bool,
}

impl Default for AngleOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            smoothing: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEstimate<T> {
    /// Angle between the lobe axis and the vertical, in [0, 90] degrees.
    pub theta_deg: T,
    /// Lobe centroids `(x, y)` in meters, heavier lobe first.
    pub centroids: [(T, T); 2],
}

impl<T: Real> AngleEstimate<T> {
    pub fn ratio(&self) -> Result<T> {
        ratio_from_angle(self.theta_deg)
    }
}

/// `|beta/alpha| = cot(theta)`.
pub fn ratio_from_angle<T: Real>(theta_deg: T) -> Result<T> {
    if !theta_deg.is_finite() || theta_deg < T::zero() || theta_deg > T::lit(90.0) {
        return Err(Error::InvalidArgument(format!("angle must lie in [0, 90] degrees, got {theta_deg}")));
    }
    let t = theta_deg.to_radians();
    if t.sin() <= T::tol() {
        return Err(Error::InfiniteRatio);
    }
    let r = t.cos() / t.sin();
    Ok(if r.abs() <= T::tol() { T::zero() } else { r })
}

fn box_smooth(a: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = a.dim();
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        let (mut s, mut k) = (0.0, 0.0);
        for rr in r.saturating_sub(1)..=(r + 1).min(rows - 1) {
            for cc in c.saturating_sub(1)..=(c + 1).min(cols - 1) {
                s += a[[rr, cc]];
                k += 1.0;
            }
        }
        s / k
    })
}

struct Component {
    mass: f64,
    mx: f64,
    my: f64,
}

fn label_components(mask: &Array2<bool>, weight: &Array2<f64>, xs: &[f64]) -> Vec<Component> {
    let (rows, cols) = mask.dim();
    let mut seen = Array2::from_elem((rows, cols), false);
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..rows * cols {
        let (r0, c0) = (start / cols, start % cols);
        if !mask[[r0, c0]] || seen[[r0, c0]] {
            continue;
        }
        seen[[r0, c0]] = true;
        queue.push_back((r0, c0));
        let mut comp = Component {
            mass: 0.0,
            mx: 0.0,
            my: 0.0,
        };
        while let Some((r, c)) = queue.pop_front() {
            let w = weight[[r, c]];
            comp.mass += w;
            comp.mx += w * xs[c];
            comp.my += w * xs[r];
            for rr in r.saturating_sub(1)..=(r + 1).min(rows - 1) {
                for cc in c.saturating_sub(1)..=(c + 1).min(cols - 1) {
                    if mask[[rr, cc]] && !seen[[rr, cc]] {
                        seen[[rr, cc]] = true;
                        queue.push_back((rr, cc));
                    }
                }
            }
        }
        out.push(comp);
    }
    out.sort_by(|a, b| b.mass.total_cmp(&a.mass));
    out
}

/// Segments the two lobes of a camera image and returns the angle of the
/// line joining their centroids.
pub fn estimate_angle<T: Real>(img: &CcdImage<T>, opts: &AngleOptions) -> Result<AngleEstimate<T>> {
    if !(opts.threshold > 0.0 && opts.threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must lie in (0, 1), got {}",
            opts.threshold
        )));
    }
    let raw = img.pixels().mapv(|v| v.as_f64());
    let smooth = if opts.smoothing { box_smooth(&raw) } else { raw.clone() };
    let peak = smooth.iter().fold(0.0f64, |m, &v| m.max(v));
    if !(peak > 0.0) {
        return Err(Error::Segmentation { found: 0 });
    }
    let cut = opts.threshold * peak;
    let mask = smooth.mapv(|v| v > cut);
    let xs: Vec<f64> = img.grid().coords().into_iter().map(|v| v.as_f64()).collect();
    let comps = label_components(&mask, &raw, &xs);
    if comps.len() < 2 || comps[1].mass <= 0.0 {
        return Err(Error::Segmentation { found: comps.len() });
    }
    if comps.len() > 2 && comps[2].mass >= THIRD_COMPONENT_FRACTION * comps[1].mass {
        return Err(Error::Segmentation { found: comps.len() });
    }
    let cen = |k: usize| (comps[k].mx / comps[k].mass, comps[k].my / comps[k].mass);
    let (a, b) = (cen(0), cen(1));
    let (dx, dy) = ((b.0 - a.0).abs(), (b.1 - a.1).abs());
    let theta = dx.atan2(dy).to_degrees();
    Ok(AngleEstimate {
        theta_deg: T::lit(theta),
        centroids: [(T::lit(a.0), T::lit(a.1)), (T::lit(b.0), T::lit(b.1))],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{hg_mode, GridSpec, ScalarField};
    use crate::measure::{render_ccd, NoiseModel};
    use num_complex::Complex;

    fn grid() -> GridSpec<f64> {
        GridSpec::with_window(128, 8.0, 1e-3).unwrap()
    }

    fn mix(g: &GridSpec<f64>, a: f64, b: f64) -> ScalarField<f64> {
        let mut f = hg_mode(1, 0, g, 0.0).unwrap().scaled(Complex::new(a, 0.0));
        f.add_scaled(Complex::new(b, 0.0), &hg_mode(0, 1, g, 0.0).unwrap()).unwrap();
        f
    }

    fn angle_of(f: &ScalarField<f64>) -> Result<f64> {
        let img = render_ccd(f, &NoiseModel::noiseless(), 0);
        estimate_angle(&img, &AngleOptions::default()).map(|e| e.theta_deg)
    }

    #[test]
    fn pure_modes() {
        let g = grid();
        assert!((angle_of(&hg_mode(1, 0, &g, 0.0).unwrap()).unwrap() - 90.0).abs() < 1e-9);
        assert!(angle_of(&hg_mode(0, 1, &g, 0.0).unwrap()).unwrap().abs() < 1e-9);
    }

    #[test]
    fn equal_mix_is_45() {
        let g = grid();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((angle_of(&mix(&g, s, s)).unwrap() - 45.0).abs() < 1e-6);
        assert!((angle_of(&mix(&g, s, -s)).unwrap() - 45.0).abs() < 1e-6);
    }

    #[test]
    fn ratio_conversion() {
        assert!((ratio_from_angle(45.0f64).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(ratio_from_angle(90.0f64).unwrap(), 0.0);
        assert_eq!(ratio_from_angle(0.0f64), Err(Error::InfiniteRatio));
        assert!(ratio_from_angle(91.0f64).is_err());
    }

    #[test]
    fn single_lobe_is_a_segmentation_error() {
        let g = grid();
        let err = angle_of(&hg_mode(0, 0, &g, 0.0).unwrap()).unwrap_err();
        assert_eq!(err, Error::Segmentation { found: 1 });
        let dark = ScalarField::<f64>::zeros(g);
        assert_eq!(angle_of(&dark).unwrap_err(), Error::Segmentation { found: 0 });
    }

    #[test]
    fn four_lobes_rejected() {
        let g = grid();
        assert!(matches!(
            angle_of(&hg_mode(1, 1, &g, 0.0).unwrap()),
            Err(Error::Segmentation { .. })
        ));
    }
}
