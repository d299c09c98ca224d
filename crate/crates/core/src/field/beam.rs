use std::ops::Add;

use ndarray::{Array2, Zip};
use num_complex::Complex;

use super::grid::GridSpec;
use super::hermite::{hg_mode, MAX_LEAKAGE};
use crate::cebit::CebitState;
use crate::error::{Error, Result};
use crate::fourier;
use crate::scalar::{cr, Real};

/// One polarization component on one path, sampled on a [`GridSpec`].
///
/// Samples are indexed `[row, col]` with `row` along y and `col` along x.
/// Units are chosen so that `sum |f|^2 * pitch^2` is the power.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: GridSpec<T>,
    samples: Array2<Complex<T>>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self {
            grid,
            samples: Array2::from_elem((grid.n(), grid.n()), Complex::default()),
        }
    }

    pub fn from_samples(grid: GridSpec<T>, samples: Array2<Complex<T>>) -> Result<Self> {
        if samples.dim() != (grid.n(), grid.n()) {
            return Err(Error::InvalidArgument(format!(
                "sample array {:?} does not match grid size {}",
                samples.dim(),
                grid.n()
            )));
        }
        Ok(Self { grid, samples })
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(grid: GridSpec<T>, f: impl Fn(T, T) -> Complex<T>) -> Self {
        let xs = grid.coords();
        let samples = Array2::from_shape_fn((grid.n(), grid.n()), |(r, c)| f(xs[c], xs[r]));
        Self { grid, samples }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn samples(&self) -> &Array2<Complex<T>> {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut Array2<Complex<T>> {
        &mut self.samples
    }

    pub fn into_samples(self) -> Array2<Complex<T>> {
        self.samples
    }

    pub fn power(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()) * self.grid.cell_area()
    }

    /// `|f|^2` per sample.
    pub fn intensity(&self) -> Array2<T> {
        self.samples.mapv(|z| z.norm_sqr())
    }

    pub fn scaled(&self, k: Complex<T>) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.mapv(|z| z * k),
        }
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, k: Complex<T>, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Zip::from(&mut self.samples)
            .and(&other.samples)
            .for_each(|a, &b| *a = *a + b * k);
        Ok(())
    }

    /// Rescaled to unit power.
    pub fn normalized(&self) -> Result<Self> {
        let p = self.power();
        if !(p > T::zero()) {
            return Err(Error::DarkBeam);
        }
        Ok(self.scaled(cr(T::one() / p.sqrt())))
    }

    /// Laterally displaced copy, `f(x - dx, y - dy)`, via the Fourier shift
    /// theorem (the window is treated as periodic).
    pub fn translated(&self, dx: T, dy: T) -> Self {
        let p = self.grid.pitch();
        Self {
            grid: self.grid,
            samples: fourier::translate(&self.samples, dx / p, dy / p),
        }
    }

    /// Intensity-weighted centroid `(x, y)` in meters; `None` for a dark field.
    pub fn centroid(&self) -> Option<(T, T)> {
        let xs = self.grid.coords();
        let (mut m0, mut mx, mut my) = (T::zero(), T::zero(), T::zero());
        for ((r, c), z) in self.samples.indexed_iter() {
            let w = z.norm_sqr();
            m0 = m0 + w;
            mx = mx + w * xs[c];
            my = my + w * xs[r];
        }
        (m0 > T::zero()).then(|| (mx / m0, my / m0))
    }
}

impl<T: Real> Add for &ScalarField<T> {
    type Output = ScalarField<T>;

    fn add(self, rhs: Self) -> ScalarField<T> {
        let mut out = self.clone();
        out.add_scaled(cr(T::one()), rhs).expect("fields share a grid");
        out
    }
}

/// Discrete inner product `<f|g> = sum conj(f) g pitch^2`.
pub fn overlap<T: Real>(f: &ScalarField<T>, g: &ScalarField<T>) -> Result<Complex<T>> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let acc = f
        .samples
        .iter()
        .zip(g.samples.iter())
        .fold(Complex::default(), |acc: Complex<T>, (a, b)| acc + a.conj() * b);
    Ok(acc * f.grid.cell_area())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Path {
    /// Carries `|0>_C`.
    Upper,
    /// Carries `|1>_C`.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    /// Horizontal, `|0>_A`.
    X,
    /// Vertical, `|1>_A`.
    Y,
}

impl Path {
    pub const BOTH: [Path; 2] = [Path::Upper, Path::Lower];

    pub fn from_bit(bit: usize) -> Self {
        if bit == 0 {
            Path::Upper
        } else {
            Path::Lower
        }
    }

    pub fn bit(self) -> usize {
        self as usize
    }
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::X, Polarization::Y];

    pub fn from_bit(bit: usize) -> Self {
        if bit == 0 {
            Polarization::X
        } else {
            Polarization::Y
        }
    }

    pub fn bit(self) -> usize {
        self as usize
    }
}

/// Two paths times two polarization components, all on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorBeam<T> {
    grid: GridSpec<T>,
    comps: [ScalarField<T>; 4],
}

#[inline]
fn slot(path: Path, pol: Polarization) -> usize {
    2 * path.bit() + pol.bit()
}

impl<T: Real> VectorBeam<T> {
    pub fn dark(grid: GridSpec<T>) -> Self {
        Self {
            grid,
            comps: std::array::from_fn(|_| ScalarField::zeros(grid)),
        }
    }

    /// Components in the order upper-x, upper-y, lower-x, lower-y.
    pub fn from_components(comps: [ScalarField<T>; 4]) -> Result<Self> {
        let grid = comps[0].grid;
        if comps.iter().any(|f| f.grid != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, comps })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn component(&self, path: Path, pol: Polarization) -> &ScalarField<T> {
        &self.comps[slot(path, pol)]
    }

    pub fn component_mut(&mut self, path: Path, pol: Polarization) -> &mut ScalarField<T> {
        &mut self.comps[slot(path, pol)]
    }

    pub fn components(&self) -> &[ScalarField<T>; 4] {
        &self.comps
    }

    pub fn into_components(self) -> [ScalarField<T>; 4] {
        self.comps
    }

    pub fn power(&self) -> T {
        self.comps.iter().fold(T::zero(), |acc, f| acc + f.power())
    }

    pub fn path_power(&self, path: Path) -> T {
        Polarization::BOTH
            .iter()
            .fold(T::zero(), |acc, &pol| acc + self.component(path, pol).power())
    }

    pub fn scaled(&self, k: Complex<T>) -> Self {
        Self {
            grid: self.grid,
            comps: std::array::from_fn(|i| self.comps[i].scaled(k)),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let p = self.power();
        if !(p > T::zero()) {
            return Err(Error::DarkBeam);
        }
        Ok(self.scaled(cr(T::one() / p.sqrt())))
    }

    /// `|E|^2` summed over every component.
    pub fn intensity(&self) -> Array2<T> {
        let n = self.grid.n();
        let mut out = Array2::from_elem((n, n), T::zero());
        for f in &self.comps {
            Zip::from(&mut out).and(&f.samples).for_each(|o, z| *o = *o + z.norm_sqr());
        }
        out
    }
}

/// The first-order mode pair `psi10 -> |0>_B`, `psi01 -> |1>_B` on one grid.
#[derive(Debug, Clone)]
pub struct ModeBasis<T> {
    psi10: ScalarField<T>,
    psi01: ScalarField<T>,
}

impl<T: Real> ModeBasis<T> {
    pub fn new(grid: &GridSpec<T>) -> Result<Self> {
        Ok(Self {
            psi10: hg_mode(1, 0, grid, T::zero())?,
            psi01: hg_mode(0, 1, grid, T::zero())?,
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.psi10.grid()
    }

    /// Mode carrying B-cebit value `b`.
    pub fn mode(&self, b: usize) -> &ScalarField<T> {
        if b == 0 {
            &self.psi10
        } else {
            &self.psi01
        }
    }

    /// `c0 psi10 + c1 psi01`.
    pub fn combine(&self, c0: Complex<T>, c1: Complex<T>) -> ScalarField<T> {
        let mut f = self.psi10.scaled(c0);
        f.add_scaled(c1, &self.psi01).expect("basis shares a grid");
        f
    }

    pub fn encode(&self, s: &CebitState<T>) -> VectorBeam<T> {
        let comps = std::array::from_fn(|k| {
            let (c, a) = (k / 2, k % 2);
            self.combine(s.amplitude(c, a, 0), s.amplitude(c, a, 1))
        });
        VectorBeam {
            grid: *self.grid(),
            comps,
        }
    }

    /// Projects every component onto the mode pair. Fails on a dark beam or
    /// when more than [`MAX_LEAKAGE`] of the power lies outside the pair.
    pub fn decode(&self, b: &VectorBeam<T>) -> Result<CebitState<T>> {
        if b.grid != *self.grid() {
            return Err(Error::GridMismatch);
        }
        let total = b.power();
        if !(total > T::zero()) {
            return Err(Error::DarkBeam);
        }
        let mut amps = [Complex::default(); 8];
        for (k, comp) in b.comps.iter().enumerate() {
            for bb in 0..2 {
                amps[4 * (k / 2) + 2 * (k % 2) + bb] = overlap(self.mode(bb), comp)?;
            }
        }
        let captured = amps.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        let residual = ((total - captured) / total).as_f64();
        if residual > MAX_LEAKAGE {
            return Err(Error::BasisLeakage { residual });
        }
        CebitState::from_amplitudes(amps)
    }
}

/// Radially polarized beam `(x psi10 + y psi01)/sqrt 2` on the upper path.
pub fn radial_beam<T: Real>(grid: &GridSpec<T>) -> Result<VectorBeam<T>> {
    let h = cr(T::FRAC_1_SQRT_2());
    let mut beam = VectorBeam::dark(*grid);
    *beam.component_mut(Path::Upper, Polarization::X) = hg_mode(1, 0, grid, T::zero())?.scaled(h);
    *beam.component_mut(Path::Upper, Polarization::Y) = hg_mode(0, 1, grid, T::zero())?.scaled(h);
    Ok(beam)
}

/// `|c a b>` maps to path `c`, polarization `a`, mode `psi10` or `psi01`.
pub fn encode_cebit_state<T: Real>(s: &CebitState<T>, grid: &GridSpec<T>) -> Result<VectorBeam<T>> {
    Ok(ModeBasis::new(grid)?.encode(s))
}

/// Adjoint of [`encode_cebit_state`], normalized.
pub fn decode_overlaps<T: Real>(b: &VectorBeam<T>) -> Result<CebitState<T>> {
    ModeBasis::new(b.grid())?.decode(b)
}
