//! Two-dimensional FFT helpers on square sample arrays.

use ndarray::{s, Array2};
use num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use crate::scalar::Real;

/// Swaps the halves of both axes. Self-inverse for even sizes.
pub(crate) fn roll_half<T: Clone + Default>(a: &Array2<T>) -> Array2<T> {
    let (rows, cols) = a.dim();
    let (hr, hc) = (rows / 2, cols / 2);
    let mut out = Array2::from_elem((rows, cols), T::default());
    out.slice_mut(s![..rows - hr, ..cols - hc]).assign(&a.slice(s![hr.., hc..]));
    out.slice_mut(s![..rows - hr, cols - hc..]).assign(&a.slice(s![hr.., ..hc]));
    out.slice_mut(s![rows - hr.., ..cols - hc]).assign(&a.slice(s![..hr, hc..]));
    out.slice_mut(s![rows - hr.., cols - hc..]).assign(&a.slice(s![..hr, ..hc]));
    out
}

/// Unnormalized in-place 2-D transform with the array origin at index (0, 0).
pub(crate) fn fft2_in_place<T: Real>(data: &mut Array2<Complex<T>>, direction: FftDirection) {
    let (rows, cols) = data.dim();
    assert_eq!(rows, cols, "square arrays only");
    let fft = FftPlanner::<T>::new().plan_fft(cols, direction);
    if !data.is_standard_layout() {
        *data = data.as_standard_layout().into_owned();
    }
    fft.process(data.as_slice_mut().expect("standard layout"));
    let mut t = data.t().as_standard_layout().into_owned();
    fft.process(t.as_slice_mut().expect("standard layout"));
    *data = t.t().as_standard_layout().into_owned();
}

/// Centered DFT: `F[k] = sum_j f[j] exp(-2 pi i (k - n/2)(j - n/2) / n)` per axis.
///
/// Both the input coordinate origin and the output frequency origin sit at
/// pixel `n/2`, which is what a lens produces in its back focal plane.
pub fn fft2_centered<T: Real>(a: &Array2<Complex<T>>) -> Array2<Complex<T>> {
    let mut work = roll_half(a);
    fft2_in_place(&mut work, FftDirection::Forward);
    roll_half(&work)
}

/// Signed integer frequency of FFT bin `k` for an `n`-point transform.
pub(crate) fn bin_frequency(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Shifts a periodic sampled array by `(dx, dy)` samples using the Fourier
/// shift theorem. The Nyquist bins keep only the real part of their phase
/// factor so real inputs stay real.
pub(crate) fn translate<T: Real>(a: &Array2<Complex<T>>, dx: T, dy: T) -> Array2<Complex<T>> {
    let n = a.nrows();
    let mut spec = a.to_owned();
    fft2_in_place(&mut spec, FftDirection::Forward);
    let two_pi_n = (T::PI() + T::PI()) / T::lit(n as f64);
    let half = n / 2;
    let ramp = |k: usize, d: T| -> Complex<T> {
        let f = T::lit(bin_frequency(k, n) as f64);
        let ph = -two_pi_n * f * d;
        if n % 2 == 0 && k == half {
            Complex::new(ph.cos(), T::zero())
        } else {
            Complex::new(ph.cos(), ph.sin())
        }
    };
    let rx: Vec<_> = (0..n).map(|k| ramp(k, dx)).collect();
    let ry: Vec<_> = (0..n).map(|k| ramp(k, dy)).collect();
    let scale = T::one() / T::lit((n * n) as f64);
    for ((r, col), v) in spec.indexed_iter_mut() {
        *v = *v * ry[r] * rx[col] * scale;
    }
    fft2_in_place(&mut spec, FftDirection::Inverse);
    spec
}
