//! Ideal-element model of the teleportation bench.
//!
//! Generation: radially polarized beam, 50/50 splitter BS1, neutral-density
//! filters on both paths. Preparation: Sagnac C-NOT (half-wave plate on the
//! lower path), BS2 acting as a Hadamard on the path cebit. Measurement:
//! PBS3 selects one path and one polarization.

use num_complex::Complex;
use rand_distr::{Distribution, StandardNormal};

use crate::cebit::{BellOutcome, PayloadCoeffs};
use crate::error::{Error, Result};
use crate::field::{radial_beam, GridSpec, Path, Polarization, ScalarField, VectorBeam, DEFAULT_WAVELENGTH};
use crate::rng::{stream_rng, Stream};
use crate::scalar::{cr, wrap_phase, Real};

/// Default filter plate thickness in meters.
pub const DEFAULT_PLATE_THICKNESS: f64 = 2e-3;
pub const DEFAULT_PLATE_INDEX: f64 = 1.5;
/// Power below which a projected branch is reported dark.
pub const DARK_FLOOR: f64 = 1e-12;

/// Plane-parallel glass plate carrying a neutral-density coating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plate<T> {
    pub thickness: T,
    pub index: T,
}

impl<T: Real> Default for Plate<T> {
    fn default() -> Self {
        Self {
            thickness: T::lit(DEFAULT_PLATE_THICKNESS),
            index: T::lit(DEFAULT_PLATE_INDEX),
        }
    }
}

/// Extra phase picked up by a plate tilted by `tilt_deg` relative to normal
/// incidence:
///
/// `phi = (2 pi / lambda) t [sqrt(n^2 - sin^2 theta) - cos theta - (n - 1)]`
///
/// Zero at normal incidence and increasing with `|tilt|`.
pub fn tilt_to_phase<T: Real>(tilt_deg: T, thickness: T, index: T, wavelength: T) -> Result<T> {
    if !(tilt_deg.abs() < T::lit(45.0)) {
        return Err(Error::InvalidArgument(format!("tilt must satisfy |tilt| < 45 deg, got {tilt_deg}")));
    }
    if !(index > T::one()) {
        return Err(Error::InvalidArgument(format!("refractive index must exceed 1, got {index}")));
    }
    if !(thickness >= T::zero()) || !(wavelength > T::zero()) {
        return Err(Error::InvalidArgument("thickness must be >= 0 and wavelength > 0".into()));
    }
    let th = tilt_deg.to_radians();
    let s = th.sin();
    let opd = thickness * ((index * index - s * s).sqrt() - th.cos() - (index - T::one()));
    Ok((T::PI() + T::PI()) * opd / wavelength)
}

/// Neutral-density filter: amplitude transmittance and phase, the phase
/// either given directly or produced by tilting the plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterSetting<T> {
    Direct { transmittance: T, phase: T },
    Tilted { transmittance: T, tilt_deg: T, plate: Plate<T> },
}

fn check_transmittance<T: Real>(t: T) -> Result<()> {
    if t >= T::zero() && t <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("amplitude transmittance must lie in [0, 1], got {t}")))
    }
}

impl<T: Real> FilterSetting<T> {
    pub fn neutral() -> Self {
        Self::Direct {
            transmittance: T::one(),
            phase: T::zero(),
        }
    }

    /// The phase is stored reduced to (-pi, pi].
    pub fn direct(transmittance: T, phase: T) -> Result<Self> {
        check_transmittance(transmittance)?;
        Ok(Self::Direct {
            transmittance,
            phase: wrap_phase(phase),
        })
    }

    pub fn tilted(transmittance: T, tilt_deg: T, plate: Plate<T>) -> Result<Self> {
        check_transmittance(transmittance)?;
        tilt_to_phase(tilt_deg, plate.thickness, plate.index, T::lit(DEFAULT_WAVELENGTH))?;
        Ok(Self::Tilted {
            transmittance,
            tilt_deg,
            plate,
        })
    }

    pub fn transmittance(&self) -> T {
        match *self {
            Self::Direct { transmittance, .. } | Self::Tilted { transmittance, .. } => transmittance,
        }
    }

    /// Phase in (-pi, pi] at the given wavelength.
    pub fn phase(&self, wavelength: T) -> Result<T> {
        match *self {
            Self::Direct { phase, .. } => Ok(phase),
            Self::Tilted { tilt_deg, plate, .. } => Ok(wrap_phase(tilt_to_phase(
                tilt_deg,
                plate.thickness,
                plate.index,
                wavelength,
            )?)),
        }
    }

    /// Complex amplitude factor `t exp(i phi)`.
    pub fn transfer(&self, wavelength: T) -> Result<Complex<T>> {
        let t = self.transmittance();
        check_transmittance(t)?;
        Ok(Complex::from_polar(t, self.phase(wavelength)?))
    }
}

/// Filter pair realizing a payload: `t e^{i phi}` proportional to `(alpha, beta)`
/// with the larger transmittance equal to one.
pub fn filters_for_payload<T: Real>(p: &PayloadCoeffs<T>) -> (FilterSetting<T>, FilterSetting<T>) {
    let scale = p.alpha().norm().max(p.beta().norm());
    let mk = |z: Complex<T>| FilterSetting::Direct {
        transmittance: (z.norm() / scale).min(T::one()),
        phase: wrap_phase(z.arg()),
    };
    (mk(p.alpha()), mk(p.beta()))
}

/// Real filter pair with `t_beta / t_alpha = ratio`.
pub fn filters_for_ratio<T: Real>(ratio: T) -> Result<(FilterSetting<T>, FilterSetting<T>)> {
    if !(ratio >= T::zero()) || !ratio.is_finite() {
        return Err(Error::InvalidArgument(format!("ratio must be finite and >= 0, got {ratio}")));
    }
    let (ta, tb) = if ratio <= T::one() {
        (T::one(), ratio)
    } else {
        (T::one() / ratio, T::one())
    };
    Ok((FilterSetting::direct(ta, T::zero())?, FilterSetting::direct(tb, T::zero())?))
}

/// How the payload is written into the path cebit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PayloadSpec<T> {
    Coeffs(PayloadCoeffs<T>),
    Filters { alpha: FilterSetting<T>, beta: FilterSetting<T> },
}

impl<T: Real> PayloadSpec<T> {
    pub fn filters(&self) -> (FilterSetting<T>, FilterSetting<T>) {
        match self {
            Self::Coeffs(p) => filters_for_payload(p),
            Self::Filters { alpha, beta } => (*alpha, *beta),
        }
    }

    /// Normalized payload realized on the bench.
    pub fn payload(&self, wavelength: T) -> Result<PayloadCoeffs<T>> {
        match self {
            Self::Coeffs(p) => Ok(*p),
            Self::Filters { alpha, beta } => {
                let (a, b) = (alpha.transfer(wavelength)?, beta.transfer(wavelength)?);
                PayloadCoeffs::new(a, b).map_err(|_| Error::DarkBeam)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig<T> {
    pub payload: PayloadSpec<T>,
    pub grid: GridSpec<T>,
    pub outcome: BellOutcome,
    pub wavelength: T,
}

impl<T: Real> BenchConfig<T> {
    /// Outcome 00 (upper path, x polarization) at the He-Ne wavelength.
    pub fn new(payload: PayloadSpec<T>, grid: GridSpec<T>) -> Self {
        Self {
            payload,
            grid,
            outcome: BellOutcome::default(),
            wavelength: T::lit(DEFAULT_WAVELENGTH),
        }
    }

    pub fn with_outcome(mut self, outcome: BellOutcome) -> Self {
        self.outcome = outcome;
        self
    }
}

/// 50/50 splitter with the real Hadamard convention acting on an empty lower port.
pub fn split_bs1<T: Real>(b: &VectorBeam<T>) -> Result<VectorBeam<T>> {
    if b.path_power(Path::Lower) > T::zero() {
        return Err(Error::InvalidInput("BS1 expects light on the upper input only"));
    }
    Ok(recombine_bs2(b))
}

/// Multiplies the upper path by `F_alpha` and the lower path by `F_beta`.
pub fn apply_filters<T: Real>(
    b: &VectorBeam<T>,
    f_alpha: &FilterSetting<T>,
    f_beta: &FilterSetting<T>,
    wavelength: T,
) -> Result<VectorBeam<T>> {
    let ka = f_alpha.transfer(wavelength)?;
    let kb = f_beta.transfer(wavelength)?;
    if ka.norm_sqr() == T::zero() && kb.norm_sqr() == T::zero() {
        return Err(Error::DarkBeam);
    }
    let mut out = b.clone();
    for pol in Polarization::BOTH {
        *out.component_mut(Path::Upper, pol) = b.component(Path::Upper, pol).scaled(ka);
        *out.component_mut(Path::Lower, pol) = b.component(Path::Lower, pol).scaled(kb);
    }
    Ok(out)
}

/// Sagnac C-NOT: the half-wave plate at 45 deg swaps x and y on the lower path.
pub fn apply_sagnac_cnot<T: Real>(b: &VectorBeam<T>) -> VectorBeam<T> {
    let mut out = b.clone();
    *out.component_mut(Path::Lower, Polarization::X) = b.component(Path::Lower, Polarization::Y).clone();
    *out.component_mut(Path::Lower, Polarization::Y) = b.component(Path::Lower, Polarization::X).clone();
    out
}

/// BS2: `upper' = (upper + lower)/sqrt2`, `lower' = (upper - lower)/sqrt2`.
pub fn recombine_bs2<T: Real>(b: &VectorBeam<T>) -> VectorBeam<T> {
    let h = cr(T::FRAC_1_SQRT_2());
    let mut out = b.clone();
    for pol in Polarization::BOTH {
        let u = b.component(Path::Upper, pol);
        let l = b.component(Path::Lower, pol);
        let mut plus = u.scaled(h);
        plus.add_scaled(h, l).expect("beam components share a grid");
        let mut minus = u.scaled(h);
        minus.add_scaled(-h, l).expect("beam components share a grid");
        *out.component_mut(Path::Upper, pol) = plus;
        *out.component_mut(Path::Lower, pol) = minus;
    }
    out
}

/// Small error of the lower arm where it meets BS2: a polarization rotation
/// and a lateral displacement.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Misalignment<T> {
    /// Rotation of the lower-arm polarization axes, radians.
    pub rotation: T,
    /// Lateral displacement, meters.
    pub shift: (T, T),
}

impl<T: Real> Misalignment<T> {
    pub fn is_identity(&self) -> bool {
        self.rotation == T::zero() && self.shift.0 == T::zero() && self.shift.1 == T::zero()
    }
}

/// Zero-mean Gaussian fluctuation of the lower-arm alignment at BS2, one
/// independent draw per frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RecombinationJitter {
    /// RMS polarization rotation, radians.
    pub rotation_rms: f64,
    /// RMS lateral displacement per axis, in waist radii.
    pub shift_rms_w0: f64,
}

impl RecombinationJitter {
    pub fn is_off(&self) -> bool {
        self.rotation_rms == 0.0 && self.shift_rms_w0 == 0.0
    }

    pub fn sample<T: Real>(&self, waist: T, seed: u64, frame: u64) -> Misalignment<T> {
        if self.is_off() {
            return Misalignment::default();
        }
        let mut rng = stream_rng(seed, Stream::Jitter, frame);
        let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
        let (r, sx, sy) = (draw(), draw(), draw());
        let w0 = waist.as_f64();
        Misalignment {
            rotation: T::lit(r * self.rotation_rms),
            shift: (
                T::lit(sx * self.shift_rms_w0 * w0),
                T::lit(sy * self.shift_rms_w0 * w0),
            ),
        }
    }
}

/// Applies a [`Misalignment`] to the lower path.
pub fn misalign_lower<T: Real>(b: &VectorBeam<T>, m: &Misalignment<T>) -> VectorBeam<T> {
    if m.is_identity() {
        return b.clone();
    }
    let (s, c) = m.rotation.sin_cos();
    let ex = b.component(Path::Lower, Polarization::X);
    let ey = b.component(Path::Lower, Polarization::Y);
    let mut rx = ex.scaled(cr(c));
    rx.add_scaled(cr(-s), ey).expect("shared grid");
    let mut ry = ex.scaled(cr(s));
    ry.add_scaled(cr(c), ey).expect("shared grid");
    let shifted = |f: ScalarField<T>| {
        if m.shift.0 == T::zero() && m.shift.1 == T::zero() {
            f
        } else {
            f.translated(m.shift.0, m.shift.1)
        }
    };
    let mut out = b.clone();
    *out.component_mut(Path::Lower, Polarization::X) = shifted(rx);
    *out.component_mut(Path::Lower, Polarization::Y) = shifted(ry);
    out
}

/// Output of the PBS3 projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected<T> {
    /// Selected component, unnormalized.
    pub field: ScalarField<T>,
    /// Its power, equal to the branch probability for a unit-power beam.
    pub power: T,
}

impl<T: Real> Projected<T> {
    pub fn is_dark(&self) -> bool {
        self.power < T::lit(DARK_FLOOR)
    }
}

/// Keeps path `o.c` and polarization `o.a`.
pub fn project_pbs3<T: Real>(b: &VectorBeam<T>, o: BellOutcome) -> Projected<T> {
    let field = b
        .component(Path::from_bit(o.c()), Polarization::from_bit(o.a()))
        .clone();
    let power = field.power();
    Projected { field, power }
}

/// Generation stage: radial beam, BS1 and the two filters, renormalized to
/// unit power.
pub fn prepare_beam<T: Real>(cfg: &BenchConfig<T>) -> Result<VectorBeam<T>> {
    let (fa, fb) = cfg.payload.filters();
    let split = split_bs1(&radial_beam(&cfg.grid)?)?;
    apply_filters(&split, &fa, &fb, cfg.wavelength)?.normalized()
}

/// Beam leaving BS2, optionally with the lower arm misaligned.
pub fn propagate<T: Real>(cfg: &BenchConfig<T>, misalignment: Option<&Misalignment<T>>) -> Result<VectorBeam<T>> {
    let mut b = apply_sagnac_cnot(&prepare_beam(cfg)?);
    if let Some(m) = misalignment {
        b = misalign_lower(&b, m);
    }
    Ok(recombine_bs2(&b))
}

/// Full bench: returns the projected mode `M(x, y)` and its power.
pub fn run_bench<T: Real>(cfg: &BenchConfig<T>) -> Result<Projected<T>> {
    Ok(project_pbs3(&propagate(cfg, None)?, cfg.outcome))
}

pub fn run_bench_misaligned<T: Real>(cfg: &BenchConfig<T>, m: &Misalignment<T>) -> Result<Projected<T>> {
    Ok(project_pbs3(&propagate(cfg, Some(m))?, cfg.outcome))
}
