//! Three-cebit state-vector engine.
//!
//! The register holds the path cebit C, the polarization cebit A and the
//! spatial-mode cebit B, in that order. Basis state `|c a b>` lives at index
//! `4c + 2a + b`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{c, cr, Real};

/// Information-carrying coefficients `(alpha, beta)` of the input cebit.
///
/// Always normalized: `|alpha|^2 + |beta|^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayloadCoeffs<T> {
    alpha: Complex<T>,
    beta: Complex<T>,
}

impl<T: Real> PayloadCoeffs<T> {
    /// Normalizes `(alpha, beta)`; fails when both vanish or are not finite.
    pub fn new(alpha: Complex<T>, beta: Complex<T>) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !norm.is_finite() {
            return Err(Error::InvalidPayload("coefficients are not finite"));
        }
        if norm <= T::min_positive_value() {
            return Err(Error::InvalidPayload("alpha and beta are both zero"));
        }
        Ok(Self {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    pub fn real(alpha: T, beta: T) -> Result<Self> {
        Self::new(cr(alpha), cr(beta))
    }

    /// Payload with `|beta / alpha| = ratio` and `arg(beta) - arg(alpha) = delta_phi`.
    pub fn from_ratio(ratio: T, delta_phi: T) -> Result<Self> {
        if !(ratio >= T::zero()) || !ratio.is_finite() {
            return Err(Error::InvalidPayload("ratio must be finite and non-negative"));
        }
        Self::new(cr(T::one()), Complex::from_polar(ratio, delta_phi))
    }

    pub fn alpha(&self) -> Complex<T> {
        self.alpha
    }

    pub fn beta(&self) -> Complex<T> {
        self.beta
    }

    pub fn as_vector(&self) -> [Complex<T>; 2] {
        [self.alpha, self.beta]
    }

    /// `|beta / alpha|`, infinite when alpha vanishes.
    pub fn ratio(&self) -> T {
        self.beta.norm() / self.alpha.norm()
    }

    /// `arg(beta) - arg(alpha)` reduced to (-pi, pi].
    pub fn delta_phi(&self) -> T {
        (self.beta * self.alpha.conj()).arg()
    }
}

/// Normalized amplitude vector over the eight basis states `|c a b>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CebitState<T> {
    amps: [Complex<T>; 8],
}

#[inline]
pub const fn basis_index(c: usize, a: usize, b: usize) -> usize {
    4 * c + 2 * a + b
}

impl<T: Real> CebitState<T> {
    /// Normalizes an arbitrary amplitude vector.
    pub fn from_amplitudes(amps: [Complex<T>; 8]) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        if !norm.is_finite() {
            return Err(Error::InvalidState("amplitudes are not finite"));
        }
        if norm <= T::min_positive_value() {
            return Err(Error::InvalidState("zero state"));
        }
        Ok(Self {
            amps: amps.map(|z| z / norm),
        })
    }

    /// Computational basis state `|c a b>`.
    pub fn basis(c: usize, a: usize, b: usize) -> Self {
        assert!(c < 2 && a < 2 && b < 2, "cebit values are 0 or 1");
        let mut amps = [Complex::default(); 8];
        amps[basis_index(c, a, b)] = cr(T::one());
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex<T>; 8] {
        &self.amps
    }

    pub fn amplitude(&self, c: usize, a: usize, b: usize) -> Complex<T> {
        self.amps[basis_index(c, a, b)]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .fold(Complex::default(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// Comma-separated `re,im` pairs in basis-index order.
    pub fn to_csv_row(&self) -> String {
        self.amps
            .iter()
            .map(|z| format!("{},{}", z.re, z.im))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Inverse of [`CebitState::to_csv_row`]; the parsed vector is renormalized.
    pub fn from_csv_row(row: &str) -> Result<Self> {
        let vals = row
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidArgument(format!("bad state row: {e}")))?;
        if vals.len() != 16 {
            return Err(Error::InvalidArgument(format!(
                "state row needs 16 numbers, got {}",
                vals.len()
            )));
        }
        let mut amps = [Complex::default(); 8];
        for (k, z) in amps.iter_mut().enumerate() {
            *z = c(T::lit(vals[2 * k]), T::lit(vals[2 * k + 1]));
        }
        Self::from_amplitudes(amps)
    }

    fn map_basis(&self, f: impl Fn(usize, usize, usize) -> (usize, usize, usize)) -> Self {
        let mut out = [Complex::default(); 8];
        for cc in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let (c2, a2, b2) = f(cc, a, b);
                    out[basis_index(c2, a2, b2)] = self.amps[basis_index(cc, a, b)];
                }
            }
        }
        Self { amps: out }
    }
}

/// Projected branch `|c a>_CA` of the teleportation output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellOutcome {
    c: u8,
    a: u8,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome { c: 0, a: 0 },
        BellOutcome { c: 0, a: 1 },
        BellOutcome { c: 1, a: 0 },
        BellOutcome { c: 1, a: 1 },
    ];

    pub fn new(c: u8, a: u8) -> Result<Self> {
        if c > 1 || a > 1 {
            return Err(Error::InvalidArgument(format!("outcome bits must be 0/1, got {c}{a}")));
        }
        Ok(Self { c, a })
    }

    pub fn c(self) -> usize {
        self.c as usize
    }

    pub fn a(self) -> usize {
        self.a as usize
    }
}

impl Default for BellOutcome {
    fn default() -> Self {
        Self { c: 0, a: 0 }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.c, self.a)
    }
}

impl FromStr for BellOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "00" => Ok(Self { c: 0, a: 0 }),
            "01" => Ok(Self { c: 0, a: 1 }),
            "10" => Ok(Self { c: 1, a: 0 }),
            "11" => Ok(Self { c: 1, a: 1 }),
            other => Err(Error::InvalidArgument(format!(
                "outcome must be one of 00, 01, 10, 11 (got {other:?})"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionLabel {
    I,
    X,
    Z,
    XZ,
}

impl fmt::Display for CorrectionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::I => "I",
            Self::X => "X",
            Self::Z => "Z",
            Self::XZ => "XZ",
        };
        f.write_str(s)
    }
}

/// Unitary applied to the B cebit after a given projection outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction<T> {
    pub label: CorrectionLabel,
    pub matrix: [[Complex<T>; 2]; 2],
}

impl<T: Real> Correction<T> {
    pub fn apply(&self, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
        let m = &self.matrix;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

/// B-cebit state selected by a projection, with the branch probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection<T> {
    /// Normalized B state; `None` when the branch carries no probability.
    pub b_state: Option<[Complex<T>; 2]>,
    pub probability: T,
}

/// `(alpha|0>_C + beta|1>_C) (x) (|00>_AB + |11>_AB)/sqrt(2)`.
pub fn prepare_input<T: Real>(p: &PayloadCoeffs<T>) -> CebitState<T> {
    let h = T::FRAC_1_SQRT_2();
    let mut amps = [Complex::default(); 8];
    for (cc, coeff) in [p.alpha(), p.beta()].into_iter().enumerate() {
        amps[basis_index(cc, 0, 0)] = coeff * h;
        amps[basis_index(cc, 1, 1)] = coeff * h;
    }
    CebitState { amps }
}

/// Controlled-NOT with control C and target A: `|c,a,b> -> |c, a^c, b>`.
pub fn apply_cnot_ca<T: Real>(s: &CebitState<T>) -> CebitState<T> {
    s.map_basis(|cc, a, b| (cc, a ^ cc, b))
}

/// Hadamard `(1/sqrt 2)[[1, 1], [1, -1]]` on the C cebit.
pub fn apply_hadamard_c<T: Real>(s: &CebitState<T>) -> CebitState<T> {
    let h = T::FRAC_1_SQRT_2();
    let mut out = [Complex::default(); 8];
    for ab in 0..4 {
        let zero = s.amps[ab];
        let one = s.amps[4 + ab];
        out[ab] = (zero + one) * h;
        out[4 + ab] = (zero - one) * h;
    }
    CebitState { amps: out }
}

/// C-NOT followed by the Hadamard on C.
pub fn teleport_transform<T: Real>(s: &CebitState<T>) -> CebitState<T> {
    apply_hadamard_c(&apply_cnot_ca(s))
}

/// Projects the C and A cebits onto `|o.c o.a>`.
pub fn project_ca<T: Real>(s: &CebitState<T>, o: BellOutcome) -> Projection<T> {
    let b = [s.amplitude(o.c(), o.a(), 0), s.amplitude(o.c(), o.a(), 1)];
    let probability = b[0].norm_sqr() + b[1].norm_sqr();
    let b_state = if probability > T::zero() {
        let n = probability.sqrt();
        Some([b[0] / n, b[1] / n])
    } else {
        None
    };
    Projection { b_state, probability }
}

/// Correction table 00 -> I, 01 -> X, 10 -> Z, 11 -> XZ (Z first, then X).
pub fn correction_for<T: Real>(o: BellOutcome) -> Correction<T> {
    let z0 = Complex::default();
    let one = cr(T::one());
    let neg = cr(-T::one());
    let (label, matrix) = match (o.c, o.a) {
        (0, 0) => (CorrectionLabel::I, [[one, z0], [z0, one]]),
        (0, 1) => (CorrectionLabel::X, [[z0, one], [one, z0]]),
        (1, 0) => (CorrectionLabel::Z, [[one, z0], [z0, neg]]),
        _ => (CorrectionLabel::XZ, [[z0, neg], [one, z0]]),
    };
    Correction { label, matrix }
}

/// `|<b|payload>|^2` with `b` normalized first; 1 iff equal up to global phase.
pub fn fidelity<T: Real>(b_state: &[Complex<T>; 2], p: &PayloadCoeffs<T>) -> Result<T> {
    let nb = b_state[0].norm_sqr() + b_state[1].norm_sqr();
    if !(nb > T::zero()) || !nb.is_finite() {
        return Err(Error::InvalidArgument("fidelity of a zero vector".into()));
    }
    let ip = b_state[0].conj() * p.alpha() + b_state[1].conj() * p.beta();
    Ok((ip.norm_sqr() / nb).min(T::one()).max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    type C64 = Complex<f64>;
    const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn payload_normalizes_and_rejects_zero() {
        let p = PayloadCoeffs::<f64>::real(3.0, 4.0).unwrap();
        assert!((p.alpha().re - 0.6).abs() < 1e-15);
        assert!((p.beta().re - 0.8).abs() < 1e-15);
        assert!(matches!(
            PayloadCoeffs::<f64>::real(0.0, 0.0),
            Err(Error::InvalidPayload(_))
        ));
        assert!(PayloadCoeffs::<f64>::real(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn prepare_basis_payloads() {
        let s = prepare_input(&PayloadCoeffs::real(1.0, 0.0).unwrap());
        for (k, z) in s.amplitudes().iter().enumerate() {
            let want = if k == 0 || k == 3 { S2 } else { 0.0 };
            assert!(close(*z, C64::new(want, 0.0), 1e-15), "index {k}");
        }
        let s = prepare_input(&PayloadCoeffs::real(0.0, 1.0).unwrap());
        for (k, z) in s.amplitudes().iter().enumerate() {
            let want = if k == 4 || k == 7 { S2 } else { 0.0 };
            assert!(close(*z, C64::new(want, 0.0), 1e-15), "index {k}");
        }
    }

    #[test]
    fn prepare_matches_tensor_product_oracle() {
        let p = PayloadCoeffs::real(0.6, 0.8).unwrap();
        let s = prepare_input(&p);
        // (alpha, beta) (x) (1, 0, 0, 1)/sqrt2, flattened C-major
        let cvec = [0.6, 0.8];
        let bell = [S2, 0.0, 0.0, S2];
        for cc in 0..2 {
            for ab in 0..4 {
                let want = cvec[cc] * bell[ab];
                assert!(close(s.amplitudes()[4 * cc + ab], C64::new(want, 0.0), 1e-15));
            }
        }
        assert!((s.amplitude(0, 0, 0).re - 3.0 / (5.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((s.amplitude(1, 1, 1).re - 4.0 / (5.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn cnot_basis_map() {
        assert_eq!(apply_cnot_ca(&CebitState::<f64>::basis(0, 0, 0)), CebitState::basis(0, 0, 0));
        assert_eq!(apply_cnot_ca(&CebitState::<f64>::basis(1, 0, 1)), CebitState::basis(1, 1, 1));
        let s = prepare_input(&PayloadCoeffs::<f64>::real(1.0, 0.0).unwrap());
        assert_eq!(apply_cnot_ca(&s), s);
    }

    #[test]
    fn hadamard_definition_and_involution() {
        let h = apply_hadamard_c(&CebitState::<f64>::basis(0, 0, 0));
        assert!(close(h.amplitude(0, 0, 0), C64::new(S2, 0.0), 1e-15));
        assert!(close(h.amplitude(1, 0, 0), C64::new(S2, 0.0), 1e-15));
        let s = CebitState::from_amplitudes(std::array::from_fn(|k| C64::new(k as f64, 1.0 - k as f64)))
            .unwrap();
        let hh = apply_hadamard_c(&apply_hadamard_c(&s));
        for k in 0..8 {
            assert!(close(hh.amplitudes()[k], s.amplitudes()[k], 1e-12));
        }
    }

    #[test]
    fn teleport_branches_trivial_payloads() {
        let t = teleport_transform(&prepare_input(&PayloadCoeffs::<f64>::real(1.0, 0.0).unwrap()));
        let want = [(0, 0, [1.0, 0.0]), (0, 1, [0.0, 1.0]), (1, 0, [1.0, 0.0]), (1, 1, [0.0, 1.0])];
        for (cc, a, b) in want {
            for (bb, v) in b.iter().enumerate() {
                assert!(close(t.amplitude(cc, a, bb), C64::new(0.5 * v, 0.0), 1e-15));
            }
        }
        let t = teleport_transform(&prepare_input(&PayloadCoeffs::<f64>::real(S2, S2).unwrap()));
        assert!(close(t.amplitude(1, 0, 0), C64::new(0.5 * S2, 0.0), 1e-15));
        assert!(close(t.amplitude(1, 0, 1), C64::new(-0.5 * S2, 0.0), 1e-15));
    }

    #[test]
    fn projection_outcomes() {
        let p = PayloadCoeffs::new(C64::new(0.3, 0.4), C64::new(-0.5, 0.2)).unwrap();
        let t = teleport_transform(&prepare_input(&p));
        for o in BellOutcome::ALL {
            assert!((project_ca(&t, o).probability - 0.25).abs() < 1e-12);
        }
        let b00 = project_ca(&t, BellOutcome::new(0, 0).unwrap()).b_state.unwrap();
        assert!(close(b00[0], p.alpha(), 1e-12) && close(b00[1], p.beta(), 1e-12));
        let b11 = project_ca(&t, BellOutcome::new(1, 1).unwrap()).b_state.unwrap();
        assert!(close(b11[0], -p.beta(), 1e-12) && close(b11[1], p.alpha(), 1e-12));
    }

    #[test]
    fn zero_probability_branch_is_flagged() {
        let pr = project_ca(&CebitState::<f64>::basis(0, 0, 0), BellOutcome::new(1, 1).unwrap());
        assert_eq!(pr.probability, 0.0);
        assert!(pr.b_state.is_none());
    }

    #[test]
    fn correction_examples() {
        let p = PayloadCoeffs::real(0.6, 0.8).unwrap();
        let x = correction_for::<f64>(BellOutcome::new(0, 1).unwrap());
        assert_eq!(x.label, CorrectionLabel::X);
        let r = x.apply([C64::new(0.8, 0.0), C64::new(0.6, 0.0)]);
        assert!(close(r[0], C64::new(0.6, 0.0), 1e-15) && close(r[1], C64::new(0.8, 0.0), 1e-15));
        let xz = correction_for::<f64>(BellOutcome::new(1, 1).unwrap());
        assert_eq!(xz.label, CorrectionLabel::XZ);
        let r = xz.apply([C64::new(-0.8, 0.0), C64::new(0.6, 0.0)]);
        assert!((fidelity(&r, &p).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(correction_for::<f64>(BellOutcome::default()).label, CorrectionLabel::I);
    }

    #[test]
    fn corrections_are_unitary() {
        for o in BellOutcome::ALL {
            let m = correction_for::<f64>(o).matrix;
            for i in 0..2 {
                for j in 0..2 {
                    let dot = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(close(dot, C64::new(want, 0.0), 1e-12));
                }
            }
        }
    }

    #[test]
    fn fidelity_examples() {
        let e0 = PayloadCoeffs::real(1.0, 0.0).unwrap();
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert_eq!(fidelity(&[one, zero], &e0).unwrap(), 1.0);
        assert_eq!(fidelity(&[zero, one], &e0).unwrap(), 0.0);
        let d = PayloadCoeffs::real(S2, S2).unwrap();
        assert!((fidelity(&[one, zero], &d).unwrap() - 0.5).abs() < 1e-15);
        assert!(fidelity(&[zero, zero], &d).is_err());
    }

    #[test]
    fn outcome_parse_display() {
        for o in BellOutcome::ALL {
            assert_eq!(o.to_string().parse::<BellOutcome>().unwrap(), o);
        }
        assert!("2".parse::<BellOutcome>().is_err());
    }

    #[test]
    fn csv_row_round_trip() {
        let s = CebitState::from_amplitudes(std::array::from_fn(|k| C64::new(0.1 * k as f64, -0.3))).unwrap();
        let back = CebitState::<f64>::from_csv_row(&s.to_csv_row()).unwrap();
        for k in 0..8 {
            assert!(close(back.amplitudes()[k], s.amplitudes()[k], 1e-15));
        }
        assert!(CebitState::<f64>::from_csv_row("1,2,3").is_err());
    }

    #[test]
    fn single_precision_pipeline() {
        let p = PayloadCoeffs::<f32>::real(0.6, 0.8).unwrap();
        let t = teleport_transform(&prepare_input(&p));
        for o in BellOutcome::ALL {
            let pr = project_ca(&t, o);
            let fixed = correction_for::<f32>(o).apply(pr.b_state.unwrap());
            assert!((fidelity(&fixed, &p).unwrap() - 1.0).abs() < 1e-6);
        }
    }
}
