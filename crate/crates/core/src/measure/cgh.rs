use ndarray::Array2;
use num_complex::Complex;

use super::ccd::CcdImage;
use crate::error::{Error, Result};
use crate::field::{hg_mode, GridSpec, ScalarField};
use crate::fourier::fft2_centered;
use crate::scalar::{c, cr, Real};

/// Correlation filters. `read ∝ <filter|M>`, so for `M = a psi10 + b psi01`
/// the four filters read `a`, `b`, `(a+b)/√2` and `(a+ib)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeFilter {
    Psi10,
    Psi01,
    /// `(psi10 + psi01)/√2`.
    InPhase,
    /// `(psi10 - i psi01)/√2`; its conjugate appears in the transmission.
    Quadrature,
}

impl ModeFilter {
    pub const ALL: [ModeFilter; 4] = [
        ModeFilter::Psi10,
        ModeFilter::Psi01,
        ModeFilter::InPhase,
        ModeFilter::Quadrature,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModeFilter::Psi10 => "psi10",
            ModeFilter::Psi01 => "psi01",
            ModeFilter::InPhase => "in_phase",
            ModeFilter::Quadrature => "quadrature",
        }
    }

    /// Filter function as `(c10, c01)` with `filter = c10 psi10 + c01 psi01`.
    pub fn coefficients<T: Real>(self) -> (Complex<T>, Complex<T>) {
        let s = T::FRAC_1_SQRT_2();
        match self {
            ModeFilter::Psi10 => (cr(T::one()), cr(T::zero())),
            ModeFilter::Psi01 => (cr(T::zero()), cr(T::one())),
            ModeFilter::InPhase => (cr(s), cr(s)),
            ModeFilter::Quadrature => (cr(s), c(T::zero(), -s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HologramEntry {
    pub filter: ModeFilter,
    /// Carrier `(kx, ky)` in focal-plane pixels (cycles per window).
    pub carrier: (i64, i64),
    /// `(row, col)` of the correlation spot.
    pub read_point: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct Hologram<T> {
    grid: GridSpec<T>,
    transmission: Array2<Complex<T>>,
    entries: Vec<HologramEntry>,
    scale: T,
}

impl<T: Real> Hologram<T> {
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// Complex transmission, rescaled so that `max |t| = 1`.
    pub fn transmission(&self) -> &Array2<Complex<T>> {
        &self.transmission
    }

    pub fn entries(&self) -> &[HologramEntry] {
        &self.entries
    }

    pub fn entry(&self, filter: ModeFilter) -> Option<&HologramEntry> {
        self.entries.iter().find(|e| e.filter == filter)
    }

    /// Global rescaling applied to the raw transmission.
    pub fn scale(&self) -> T {
        self.scale
    }

    /// Carrier of `e` as a spatial frequency in rad/m.
    pub fn carrier_rad_per_m(&self, e: &HologramEntry) -> (T, T) {
        let k = (T::PI() + T::PI()) / self.grid.window();
        (k * T::lit(e.carrier.0 as f64), k * T::lit(e.carrier.1 as f64))
    }

    /// Converts a read value back to the overlap integral `<filter|M>`.
    pub fn overlap_from_read(&self, v: Complex<T>) -> Complex<T> {
        v * cr(self.grid.cell_area() / self.scale)
    }

    /// Smallest distance between two carriers or a carrier and the origin,
    /// in focal pixels.
    pub fn min_separation_px(&self) -> f64 {
        min_separation(&self.entries.iter().map(|e| e.carrier).collect::<Vec<_>>())
    }
}

fn min_separation(carriers: &[(i64, i64)]) -> f64 {
    let mut pts = vec![(0i64, 0i64)];
    pts.extend_from_slice(carriers);
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (dx, dy) = ((pts[i].0 - pts[j].0) as f64, (pts[i].1 - pts[j].1) as f64);
            best = best.min(dx.hypot(dy));
        }
    }
    best
}

/// Half-width, in focal pixels, of the spectrum of a first-order mode times
/// a first-order filter, taken where its Gaussian envelope falls to 1e-3.
pub fn mode_bandwidth_px<T: Real>(grid: &GridSpec<T>) -> f64 {
    grid.window_in_waists().as_f64() * (2.0 * 1000f64.ln()).sqrt() / std::f64::consts::PI
}

/// Default layout: carriers on the +x, +y, -x, -y axes at `n/16` pixels,
/// pushed out if that is closer than twice the mode bandwidth.
pub fn design_cgh<T: Real>(grid: &GridSpec<T>, with_phase_filters: bool) -> Result<Hologram<T>> {
    let bw = mode_bandwidth_px(grid);
    let offset = (grid.n() / 16).max((2.0 * bw).floor() as usize + 1);
    design_cgh_with_offset(grid, with_phase_filters, offset)
}

pub fn design_cgh_with_offset<T: Real>(
    grid: &GridSpec<T>,
    with_phase_filters: bool,
    offset_px: usize,
) -> Result<Hologram<T>> {
    let n = grid.n();
    let bw = mode_bandwidth_px(grid);
    let o = offset_px as i64;
    let layout = [(o, 0), (0, o), (-o, 0), (0, -o)];
    let count = if with_phase_filters { 4 } else { 2 };
    let carriers = &layout[..count];
    if offset_px as f64 + bw > (n / 2 - 1) as f64 {
        return Err(Error::Aliasing {
            carrier_px: offset_px as f64,
            bandwidth_px: bw,
            nyquist_px: n / 2,
        });
    }
    let sep = min_separation(carriers);
    if sep <= 2.0 * bw {
        return Err(Error::CarrierOverlap {
            separation_px: sep,
            required_px: 2.0 * bw,
        });
    }

    let psi10 = hg_mode(1, 0, grid, T::zero())?;
    let psi01 = hg_mode(0, 1, grid, T::zero())?;
    let half = (n / 2) as f64;
    let two_pi_n = 2.0 * std::f64::consts::PI / n as f64;
    let mut raw = Array2::<Complex<T>>::zeros((n, n));
    let mut entries = Vec::with_capacity(count);
    for (&filter, &(kx, ky)) in ModeFilter::ALL.iter().zip(carriers) {
        let (c10, c01) = filter.coefficients::<T>();
        let (c10, c01) = (c10.conj(), c01.conj());
        for ((r, col), t) in raw.indexed_iter_mut() {
            let arg = two_pi_n * (kx as f64 * (col as f64 - half) + ky as f64 * (r as f64 - half));
            let carrier = Complex::from_polar(T::one(), T::lit(arg));
            let f = c10 * psi10.samples()[[r, col]] + c01 * psi01.samples()[[r, col]];
            *t = *t + f * carrier;
        }
        entries.push(HologramEntry {
            filter,
            carrier: (kx, ky),
            read_point: ((n as i64 / 2 + ky) as usize, (n as i64 / 2 + kx) as usize),
        });
    }
    let peak = raw.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let scale = T::one() / peak;
    raw.mapv_inplace(|z| z * scale);
    Ok(Hologram {
        grid: *grid,
        transmission: raw,
        entries,
        scale,
    })
}

/// Back focal plane of the 2f correlator.
#[derive(Debug, Clone)]
pub struct Correlation<T> {
    grid: GridSpec<T>,
    focal: Array2<Complex<T>>,
    /// One complex value per hologram entry, in entry order.
    pub read_values: Vec<Complex<T>>,
}

impl<T: Real> Correlation<T> {
    pub fn focal_field(&self) -> &Array2<Complex<T>> {
        &self.focal
    }

    pub fn focal_image(&self) -> CcdImage<T> {
        CcdImage::new(self.grid, self.focal.mapv(|z| z.norm_sqr())).expect("intensity is non-negative")
    }

    /// Focal field at an arbitrary pixel.
    pub fn value_at(&self, row: i64, col: i64) -> Result<Complex<T>> {
        read_point(&self.focal, row, col)
    }
}

fn read_point<T: Copy>(a: &Array2<T>, row: i64, col: i64) -> Result<T> {
    let (rows, cols) = a.dim();
    if row < 0 || col < 0 || row as usize >= rows || col as usize >= cols {
        return Err(Error::ReadPointOutOfBounds { row, col });
    }
    Ok(a[[row as usize, col as usize]])
}

pub(crate) fn read_intensity<T: Real>(img: &CcdImage<T>, point: (usize, usize)) -> Result<T> {
    read_point(img.pixels(), point.0 as i64, point.1 as i64)
}

/// Centered DFT of `M * transmission`, sampled at every read point.
pub fn correlate_2f<T: Real>(m: &ScalarField<T>, h: &Hologram<T>) -> Result<Correlation<T>> {
    if m.grid() != h.grid() {
        return Err(Error::GridMismatch);
    }
    let product = m.samples() * &h.transmission;
    let focal = fft2_centered(&product);
    let read_values = h
        .entries
        .iter()
        .map(|e| read_point(&focal, e.read_point.0 as i64, e.read_point.1 as i64))
        .collect::<Result<Vec<_>>>()?;
    Ok(Correlation {
        grid: h.grid,
        focal,
        read_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{overlap, ModeBasis};

    type C64 = Complex<f64>;

    #[test]
    fn two_filter_layout() {
        let g = GridSpec::<f64>::default();
        let h = design_cgh(&g, false).unwrap();
        assert_eq!(h.entries().len(), 2);
        assert_ne!(h.entries()[0].read_point, h.entries()[1].read_point);
        assert!(h.min_separation_px() > 2.0 * mode_bandwidth_px(&g));
        let peak = h.transmission().iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn read_point_matches_carrier_frequency() {
        let g = GridSpec::<f64>::default();
        let h = design_cgh(&g, true).unwrap();
        let n = g.n() as f64;
        for e in h.entries() {
            let (kx, ky) = h.carrier_rad_per_m(e);
            let px = kx * g.window() / (2.0 * std::f64::consts::PI);
            let py = ky * g.window() / (2.0 * std::f64::consts::PI);
            assert_eq!(e.read_point.1 as f64, n / 2.0 + px.round());
            assert_eq!(e.read_point.0 as f64, n / 2.0 + py.round());
            // The correlation peak of the matched mode lands on the read point.
            let basis = ModeBasis::new(&g).unwrap();
            let (c10, c01) = e.filter.coefficients::<f64>();
            let corr = correlate_2f(&basis.combine(c10, c01), &h).unwrap();
            let img = corr.focal_image();
            let (mut best, mut at) = (0.0, (0, 0));
            for ((r, c), &v) in img.pixels().indexed_iter() {
                if v > best {
                    best = v;
                    at = (r, c);
                }
            }
            assert_eq!(at, e.read_point);
        }
    }

    #[test]
    fn aliasing_and_overlap_errors() {
        let g = GridSpec::<f64>::with_window(64, 16.0, 1e-3).unwrap();
        assert!(matches!(design_cgh(&g, true), Err(Error::Aliasing { .. })));
        let g = GridSpec::<f64>::default();
        assert!(matches!(
            design_cgh_with_offset(&g, true, 10),
            Err(Error::CarrierOverlap { .. })
        ));
        assert!(matches!(
            design_cgh_with_offset(&g, true, 250),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn orthogonal_mode_reads_dark() {
        let g = GridSpec::<f64>::default();
        let h = design_cgh(&g, false).unwrap();
        let corr = correlate_2f(&hg_mode(1, 0, &g, 0.0).unwrap(), &h).unwrap();
        let (a, b) = (corr.read_values[0].norm_sqr(), corr.read_values[1].norm_sqr());
        assert!(b / a < 1e-6, "{b} / {a}");
    }

    #[test]
    fn reads_are_scaled_overlaps() {
        let g = GridSpec::<f64>::default();
        let h = design_cgh(&g, true).unwrap();
        let basis = ModeBasis::new(&g).unwrap();
        let (al, be) = (C64::new(0.6, 0.1), C64::new(-0.2, 0.7));
        let m = basis.combine(al, be);
        let corr = correlate_2f(&m, &h).unwrap();
        for (e, v) in h.entries().iter().zip(&corr.read_values) {
            let (c10, c01) = e.filter.coefficients::<f64>();
            let f = basis.combine(c10, c01);
            let want = overlap(&f, &m).unwrap();
            assert!((h.overlap_from_read(*v) - want).norm() < 1e-6, "{:?}", e.filter);
        }
        let ratio = corr.read_values[1].norm() / corr.read_values[0].norm();
        assert!((ratio / (be.norm() / al.norm()) - 1.0).abs() < 0.01);
    }

    #[test]
    fn single_point_sensitivity() {
        let g = GridSpec::<f64>::default();
        let h = design_cgh(&g, false).unwrap();
        let basis = ModeBasis::new(&g).unwrap();
        let m = basis.combine(C64::new(0.8, 0.0), C64::new(0.6, 0.0));
        let corr = correlate_2f(&m, &h).unwrap();
        let exact = corr.read_values[1].norm() / corr.read_values[0].norm();
        let a = corr.read_values[0].norm();
        let (r1, c1) = h.entries()[1].read_point;
        for (dr, dc) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
            let b = corr.value_at(r1 as i64 + dr, c1 as i64 + dc).unwrap().norm();
            assert!((b / a - exact).abs() > 1e-3 * exact);
        }
        assert!(matches!(corr.value_at(-1, 0), Err(Error::ReadPointOutOfBounds { .. })));
    }

    #[test]
    fn grid_mismatch() {
        let g = GridSpec::<f64>::default();
        let h = design_cgh(&g, false).unwrap();
        let other = GridSpec::<f64>::with_window(256, 8.0, 1e-3).unwrap();
        assert_eq!(
            correlate_2f(&ScalarField::zeros(other), &h).unwrap_err(),
            Error::GridMismatch
        );
    }
}
