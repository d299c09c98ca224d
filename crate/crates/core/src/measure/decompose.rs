use rayon::prelude::*;

use super::angle::{estimate_angle, ratio_from_angle, AngleOptions};
use super::ccd::{render_ccd, NoiseModel};
use super::cgh::{correlate_2f, design_cgh, read_intensity, Hologram, ModeFilter};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::rng::Stream;
use crate::scalar::{wrap_phase, Real};

pub const DEFAULT_FRAMES: usize = 15;
/// Largest unit-circle violation that is clamped rather than reported.
pub const PHASE_CONSISTENCY_TOL: f64 = 1e-6;
/// A mode whose share of `Ia + Ib` is below this is treated as absent.
const ABSENT_FRACTION: f64 = 1e-8;

/// Relative phase `arg(beta) - arg(alpha)` from the four correlation
/// intensities `|a|^2`, `|b|^2`, `|a+b|^2/2` and `|a+ib|^2/2`.
pub fn phase_from_interference<T: Real>(ia: T, ib: T, i_cos: T, i_sin: T) -> Result<T> {
    phase_from_interference_with_tolerance(ia, ib, i_cos, i_sin, Some(PHASE_CONSISTENCY_TOL))
}

/// As [`phase_from_interference`]; `tol = None` accepts any violation (used
/// for noisy frames, where the intensities are not exactly consistent).
pub fn phase_from_interference_with_tolerance<T: Real>(
    ia: T,
    ib: T,
    i_cos: T,
    i_sin: T,
    tol: Option<f64>,
) -> Result<T> {
    let (ia, ib, ic, is) = (ia.as_f64(), ib.as_f64(), i_cos.as_f64(), i_sin.as_f64());
    if [ia, ib, ic, is].iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument("intensities must be finite and non-negative".into()));
    }
    if ia <= 0.0 || ib <= 0.0 {
        return Err(Error::PhaseUndefined);
    }
    let d = 2.0 * (ia * ib).sqrt();
    let cos = (2.0 * ic - ia - ib) / d;
    let sin = (ia + ib - 2.0 * is) / d;
    if let Some(tol) = tol {
        let violation = (cos.hypot(sin) - 1.0).abs();
        if violation > tol {
            return Err(Error::MeasurementInconsistency(violation));
        }
    }
    Ok(wrap_phase(T::lit(sin.atan2(cos))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat<T> {
    pub mean: T,
    pub std: T,
}

impl<T: Real> Stat<T> {
    fn of(mean: T, deviations: impl Iterator<Item = T>) -> Self {
        let (mut ss, mut k) = (0.0f64, 0usize);
        for d in deviations {
            ss += d.as_f64() * d.as_f64();
            k += 1;
        }
        let std = if k > 1 { (ss / (k - 1) as f64).sqrt() } else { 0.0 };
        Self {
            mean,
            std: T::lit(std),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameReading<T> {
    /// Correlation intensities, one per hologram entry (empty for the angle
    /// pipeline).
    pub intensities: Vec<T>,
    pub abs_alpha: T,
    pub abs_beta: T,
    pub ratio: T,
    pub delta_phi: Option<T>,
    pub theta_deg: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult<T> {
    pub abs_alpha: Stat<T>,
    pub abs_beta: Stat<T>,
    /// `|beta/alpha|`.
    pub ratio: Stat<T>,
    /// `None` when either mode is absent or phase filters were not used.
    pub delta_phi: Option<Stat<T>>,
    /// Set by the angle pipeline only.
    pub theta_deg: Option<Stat<T>>,
    pub frames: usize,
    pub seed: u64,
    pub readings: Vec<FrameReading<T>>,
}

fn cell<T: Real>(v: Option<T>) -> String {
    v.map(|v| v.as_f64().to_string()).unwrap_or_default()
}

impl<T: Real> MeasurementResult<T> {
    pub const CSV_HEADER: [&'static str; 12] = [
        "abs_alpha",
        "abs_beta",
        "delta_phi_rad",
        "theta_deg",
        "abs_alpha_std",
        "abs_beta_std",
        "delta_phi_std_rad",
        "theta_std_deg",
        "ratio",
        "ratio_std",
        "frames",
        "seed",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            cell(Some(self.abs_alpha.mean)),
            cell(Some(self.abs_beta.mean)),
            cell(self.delta_phi.map(|s| s.mean)),
            cell(self.theta_deg.map(|s| s.mean)),
            cell(Some(self.abs_alpha.std)),
            cell(Some(self.abs_beta.std)),
            cell(self.delta_phi.map(|s| s.std)),
            cell(self.theta_deg.map(|s| s.std)),
            cell(Some(self.ratio.mean)),
            cell(Some(self.ratio.std)),
            self.frames.to_string(),
            self.seed.to_string(),
        ]
    }

    /// Root mean square over frames of `(ratio_i - target) / target`.
    pub fn ratio_rms_relative_error(&self, target: T) -> T {
        let t = target.as_f64();
        let ms = self
            .readings
            .iter()
            .map(|r| {
                let e = (r.ratio.as_f64() - t) / t;
                e * e
            })
            .sum::<f64>()
            / self.readings.len().max(1) as f64;
        T::lit(ms.sqrt())
    }
}

fn amplitudes(ia: f64, ib: f64) -> (f64, f64, f64) {
    let s = ia + ib;
    if !(s > 0.0) {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let ratio = if ia > 0.0 { (ib / ia).sqrt() } else { f64::INFINITY };
    ((ia / s).sqrt(), (ib / s).sqrt(), ratio)
}

fn par_frames<R: Send>(frames: usize, f: impl Fn(u64) -> Result<R> + Sync) -> Result<Vec<R>> {
    if frames == 0 {
        return Err(Error::InvalidArgument("frames must be >= 1".into()));
    }
    (0..frames as u64).into_par_iter().map(&f).collect::<Vec<_>>().into_iter().collect()
}

fn recentered<T: Real>(m: &ScalarField<T>) -> Result<ScalarField<T>> {
    // Sub-micro-pixel offsets are left alone; the shift would only add
    // rounding noise.
    let eps = T::lit(1e-6) * m.grid().pitch();
    match m.centroid() {
        Some((cx, cy)) if cx.abs() <= eps && cy.abs() <= eps => Ok(m.clone()),
        Some((cx, cy)) => Ok(m.translated(-cx, -cy)),
        None => Err(Error::DarkBeam),
    }
}

/// Correlation-filter decomposition of one field per frame. Frame `i` uses
/// `frame_field(i)`, is recentered on its intensity centroid, correlated,
/// imaged in the focal plane with `noise`, and read at the hologram's read
/// points.
pub fn decompose_frames<T, F>(
    frame_field: F,
    hologram: &Hologram<T>,
    noise: &NoiseModel,
    frames: usize,
) -> Result<MeasurementResult<T>>
where
    T: Real,
    F: Fn(u64) -> Result<ScalarField<T>> + Sync,
{
    noise.validate()?;
    let idx = |f: ModeFilter| hologram.entries().iter().position(|e| e.filter == f);
    let ia_at = idx(ModeFilter::Psi10).ok_or(Error::InvalidArgument("hologram lacks psi10 filter".into()))?;
    let ib_at = idx(ModeFilter::Psi01).ok_or(Error::InvalidArgument("hologram lacks psi01 filter".into()))?;
    let phase_at = idx(ModeFilter::InPhase).zip(idx(ModeFilter::Quadrature));
    let tol = noise.is_noiseless().then_some(PHASE_CONSISTENCY_TOL);

    let raw = par_frames(frames, |frame| {
        let m = recentered(&frame_field(frame)?)?;
        let corr = correlate_2f(&m, hologram)?;
        let mut img = corr.focal_image();
        let mut pixels = img.pixels().clone();
        noise.apply(&mut pixels, Stream::FocalNoise, frame);
        img = super::ccd::CcdImage::new(*img.grid(), pixels)?;
        let intensities = hologram
            .entries()
            .iter()
            .map(|e| read_intensity(&img, e.read_point).map(|v| v.as_f64()))
            .collect::<Result<Vec<f64>>>()?;
        Ok((intensities, img.peak().as_f64()))
    })?;

    let n = raw.len() as f64;
    let k = hologram.entries().len();
    let mean_i: Vec<f64> = (0..k).map(|j| raw.iter().map(|(v, _)| v[j]).sum::<f64>() / n).collect();
    let mean_peak = raw.iter().map(|(_, p)| p).sum::<f64>() / n;
    let floor = |ia: f64, ib: f64| ABSENT_FRACTION * (ia + ib) + 3.0 * noise.gaussian_sigma * mean_peak;
    // Averaged intensities of differing frames describe a partially coherent
    // mixture, which sits inside the unit circle; only single frames are
    // held to the strict tolerance.
    let phase = |v: &[f64], tol: Option<f64>| -> Result<Option<f64>> {
        let Some((pc, ps)) = phase_at else {
            return Ok(None);
        };
        let (ia, ib) = (v[ia_at], v[ib_at]);
        if ia.min(ib) <= floor(ia, ib) {
            return Ok(None);
        }
        phase_from_interference_with_tolerance(ia, ib, v[pc], v[ps], tol).map(Some)
    };

    let mut readings = Vec::with_capacity(raw.len());
    for (v, _) in &raw {
        let (a, b, r) = amplitudes(v[ia_at], v[ib_at]);
        readings.push(FrameReading {
            intensities: v.iter().map(|&x| T::lit(x)).collect(),
            abs_alpha: T::lit(a),
            abs_beta: T::lit(b),
            ratio: T::lit(r),
            delta_phi: phase(v, tol)?.map(T::lit),
            theta_deg: None,
        });
    }
    let (a, b, r) = amplitudes(mean_i[ia_at], mean_i[ib_at]);
    let delta_phi = phase(&mean_i, None)?.map(|mean| {
        Stat::of(
            T::lit(mean),
            readings
                .iter()
                .filter_map(|f| f.delta_phi)
                .map(|p| wrap_phase(p - T::lit(mean))),
        )
    });
    let stat = |mean: f64, get: fn(&FrameReading<T>) -> T| {
        Stat::of(
            T::lit(mean),
            readings.iter().map(get).filter(|v| v.is_finite()).map(|v| v - T::lit(mean)),
        )
    };
    Ok(MeasurementResult {
        abs_alpha: stat(a, |f| f.abs_alpha),
        abs_beta: stat(b, |f| f.abs_beta),
        ratio: stat(r, |f| f.ratio),
        delta_phi,
        theta_deg: None,
        frames,
        seed: noise.seed,
        readings,
    })
}

/// Decomposes a fixed field with a four-filter hologram; only the focal
/// camera noise changes from frame to frame.
pub fn modal_decomposition<T: Real>(
    m: &ScalarField<T>,
    noise: &NoiseModel,
    frames: usize,
) -> Result<MeasurementResult<T>> {
    let h = design_cgh(m.grid(), true)?;
    decompose_frames(|_| Ok(m.clone()), &h, noise, frames)
}

/// Angle pipeline: one camera frame per field, lobe angle per frame, then
/// `|beta/alpha| = cot(mean angle)`.
pub fn measure_angle_frames<T, F>(
    frame_field: F,
    noise: &NoiseModel,
    frames: usize,
    opts: &AngleOptions,
) -> Result<MeasurementResult<T>>
where
    T: Real,
    F: Fn(u64) -> Result<ScalarField<T>> + Sync,
{
    noise.validate()?;
    let thetas = par_frames(frames, |frame| {
        let img = render_ccd(&frame_field(frame)?, noise, frame);
        Ok(estimate_angle(&img, opts)?.theta_deg.as_f64())
    })?;
    let from_theta = |t: f64| {
        let r = ratio_from_angle(t).unwrap_or(f64::INFINITY);
        let rad = t.to_radians();
        (rad.sin(), rad.cos(), r)
    };
    let readings: Vec<FrameReading<T>> = thetas
        .iter()
        .map(|&t| {
            let (a, b, r) = from_theta(t);
            FrameReading {
                intensities: Vec::new(),
                abs_alpha: T::lit(a),
                abs_beta: T::lit(b),
                ratio: T::lit(r),
                delta_phi: None,
                theta_deg: Some(T::lit(t)),
            }
        })
        .collect();
    let mean_t = thetas.iter().sum::<f64>() / thetas.len() as f64;
    let (a, b, r) = from_theta(mean_t);
    let stat = |mean: f64, get: fn(&FrameReading<T>) -> T| {
        Stat::of(
            T::lit(mean),
            readings.iter().map(get).filter(|v| v.is_finite()).map(|v| v - T::lit(mean)),
        )
    };
    Ok(MeasurementResult {
        abs_alpha: stat(a, |f| f.abs_alpha),
        abs_beta: stat(b, |f| f.abs_beta),
        ratio: stat(r, |f| f.ratio),
        delta_phi: None,
        theta_deg: Some(stat(mean_t, |f| f.theta_deg.unwrap_or_else(T::nan))),
        frames,
        seed: noise.seed,
        readings,
    })
}
