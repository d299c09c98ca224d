use ndarray::Array2;
use num_complex::Complex;

use super::beam::ScalarField;
use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest tolerated fraction of a mode's power falling outside the window.
pub const MAX_LEAKAGE: f64 = 1e-6;

const MAX_ORDER: usize = 24;

/// Physicists' Hermite polynomial `H_k(u)`.
pub fn hermite<T: Real>(k: usize, u: T) -> T {
    let two = T::lit(2.0);
    let (mut prev, mut cur) = (T::one(), two * u);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = two * u * cur - two * T::lit(j as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// One transverse factor `g_k(u) = N_k H_k(sqrt2 u / w0) exp(-u^2 / w0^2)`.
fn hg_factor<T: Real>(k: usize, u: T, w0: T) -> T {
    let norm = (T::lit(2.0) / T::PI()).powf(T::lit(0.25))
        / (T::lit(2f64.powi(k as i32) * factorial(k)).sqrt() * w0.sqrt());
    let s = u / w0;
    norm * hermite(k, T::SQRT_2() * s) * (-s * s).exp()
}

/// Hermite-Gaussian mode `psi_lm(x, y - y_offset)` at the waist plane.
///
/// Uses the closed-form continuous normalization; the discrete power then
/// differs from one only by the part of the mode outside the window.
pub fn hg_mode<T: Real>(l: usize, m: usize, grid: &GridSpec<T>, y_offset: T) -> Result<ScalarField<T>> {
    if l + m > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("mode order {} exceeds {MAX_ORDER}", l + m)));
    }
    let w0 = grid.waist();
    let gx: Vec<T> = grid.coords().into_iter().map(|x| hg_factor(l, x, w0)).collect();
    let gy: Vec<T> = grid
        .coords()
        .into_iter()
        .map(|y| hg_factor(m, y - y_offset, w0))
        .collect();
    let samples = Array2::from_shape_fn((grid.n(), grid.n()), |(r, c)| Complex::new(gx[c] * gy[r], T::zero()));
    let field = ScalarField::from_samples(*grid, samples)?;
    let leakage = (T::one() - field.power()).abs().as_f64();
    if leakage > MAX_LEAKAGE {
        return Err(Error::GridTooSmall { l, m, leakage });
    }
    Ok(field)
}
