use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Periodic box `[-L_i, L_i)` sampled with `N_i` points per axis.
///
/// Spectra are stored in half-complex layout: the last axis keeps only
/// indices `0..=N/2`, the other axes keep every index in FFT order.
pub struct Grid<T: Real> {
    sizes: Vec<usize>,
    half_widths: Vec<T>,
    spacings: Vec<T>,
    wavenumbers: Vec<Vec<T>>,
    half_shape: Vec<usize>,
    plan: Plan<T>,
}

struct Plan<T: Real> {
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
    fwd: Vec<Arc<dyn Fft<T>>>,
    inv: Vec<Arc<dyn Fft<T>>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("sizes", &self.sizes)
            .field("half_widths", &self.half_widths)
            .finish()
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.sizes == other.sizes && self.half_widths == other.half_widths
    }
}

/// Signed FFT index of position `k` on an axis of `n` points.
pub fn signed_index(k: usize, n: usize) -> isize {
    if k < n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

pub fn make_grid<T: Real>(n: usize, sizes: &[usize], half_widths: &[T]) -> Result<Arc<Grid<T>>> {
    Grid::new(n, sizes, half_widths).map(Arc::new)
}

impl<T: Real> Grid<T> {
    pub fn new(n: usize, sizes: &[usize], half_widths: &[T]) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidDimension(n));
        }
        if sizes.len() != n || half_widths.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: sizes.len().min(half_widths.len()) });
        }
        for (axis, (&size, &l)) in sizes.iter().zip(half_widths).enumerate() {
            if size % 2 == 1 {
                return Err(Error::OddSize { axis, size });
            }
            if size < 8 {
                return Err(Error::TooFewPoints { axis, size });
            }
            if !(l > T::zero()) || !l.is_finite() {
                return Err(Error::BadHalfWidth { axis, half_width: l.to_f64_lossy() });
            }
        }
        let spacings = sizes
            .iter()
            .zip(half_widths)
            .map(|(&s, &l)| T::lit(2.0) * l / T::from_usize_lossy(s))
            .collect();
        let wavenumbers = sizes
            .iter()
            .zip(half_widths)
            .map(|(&s, &l)| {
                (0..s)
                    .map(|k| T::PI() / l * T::from_isize(signed_index(k, s)).unwrap())
                    .collect()
            })
            .collect();
        let mut half_shape = sizes.to_vec();
        half_shape[n - 1] = sizes[n - 1] / 2 + 1;

        let mut rp = RealFftPlanner::<T>::new();
        let mut cp = FftPlanner::<T>::new();
        let last = sizes[n - 1];
        let plan = Plan {
            r2c: rp.plan_fft_forward(last),
            c2r: rp.plan_fft_inverse(last),
            fwd: sizes[..n - 1].iter().map(|&s| cp.plan_fft_forward(s)).collect(),
            inv: sizes[..n - 1].iter().map(|&s| cp.plan_fft_inverse(s)).collect(),
        };
        Ok(Grid {
            sizes: sizes.to_vec(),
            half_widths: half_widths.to_vec(),
            spacings,
            wavenumbers,
            half_shape,
            plan,
        })
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn half_widths(&self) -> &[T] {
        &self.half_widths
    }

    pub fn spacings(&self) -> &[T] {
        &self.spacings
    }

    pub fn wavenumbers(&self, axis: usize) -> &[T] {
        &self.wavenumbers[axis]
    }

    /// Number of real samples.
    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Shape of the stored half-complex spectrum.
    pub fn half_shape(&self) -> &[usize] {
        &self.half_shape
    }

    pub fn spectrum_len(&self) -> usize {
        self.half_shape.iter().product()
    }

    /// Quadrature weight of one sample.
    pub fn cell_volume(&self) -> T {
        self.spacings.iter().fold(T::one(), |a, &h| a * h)
    }

    pub fn volume(&self) -> T {
        self.half_widths.iter().fold(T::one(), |a, &l| a * (l + l))
    }

    /// Physical coordinates `-L + j h` along one axis.
    pub fn coords(&self, axis: usize) -> Vec<T> {
        let (l, h) = (self.half_widths[axis], self.spacings[axis]);
        (0..self.sizes[axis]).map(|j| -l + h * T::from_usize_lossy(j)).collect()
    }

    /// Index of the sample sitting at `x = 0` on each axis.
    pub fn origin_index(&self) -> Vec<usize> {
        self.sizes.iter().map(|&s| s / 2).collect()
    }

    pub fn is_nyquist(&self, axis: usize, k: usize) -> bool {
        k == self.sizes[axis] / 2
    }

    /// Multiplicity of a stored mode in the full spectrum (Hermitian partner counted).
    pub fn mode_weight(&self, k_last: usize) -> T {
        let last = self.sizes[self.n() - 1];
        if k_last == 0 || k_last == last / 2 {
            T::one()
        } else {
            T::lit(2.0)
        }
    }

    /// Visit every stored mode in memory order with its per-axis indices.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, &[usize])) {
        let n = self.n();
        let mut idx = vec![0usize; n];
        for flat in 0..self.spectrum_len() {
            f(flat, &idx);
            for a in (0..n).rev() {
                idx[a] += 1;
                if idx[a] < self.half_shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    /// Per-mode weights `w_k` so that `sum w |X_k|^2` is the full-spectrum sum.
    pub fn mode_weights(&self) -> Vec<T> {
        let hl = self.half_shape[self.n() - 1];
        (0..self.spectrum_len()).map(|f| self.mode_weight(f % hl)).collect()
    }

    /// Wavevector of a stored mode.
    pub fn xi(&self, idx: &[usize], out: &mut [T]) {
        for (a, &k) in idx.iter().enumerate() {
            out[a] = self.wavenumbers[a][k];
        }
    }

    /// Wavevector with Nyquist components zeroed, used by odd symbols so that
    /// they map real fields to real fields.
    pub fn xi_odd(&self, idx: &[usize], out: &mut [T]) {
        for (a, &k) in idx.iter().enumerate() {
            out[a] = if self.is_nyquist(a, k) { T::zero() } else { self.wavenumbers[a][k] };
        }
    }

    /// Unnormalized forward transform of real samples into the half spectrum.
    pub fn forward(&self, values: &[T]) -> Vec<Complex<T>> {
        let n = self.n();
        let last = self.sizes[n - 1];
        let hl = self.half_shape[n - 1];
        let rows = self.len() / last;
        let mut out = vec![Complex::new(T::zero(), T::zero()); rows * hl];
        let mut input = self.plan.r2c.make_input_vec();
        let mut scratch = self.plan.r2c.make_scratch_vec();
        for r in 0..rows {
            input.copy_from_slice(&values[r * last..(r + 1) * last]);
            self.plan
                .r2c
                .process_with_scratch(&mut input, &mut out[r * hl..(r + 1) * hl], &mut scratch)
                .expect("r2c buffer sizes");
        }
        for axis in (0..n - 1).rev() {
            self.axis_pass(&mut out, axis, &self.plan.fwd[axis]);
        }
        out
    }

    /// Normalized inverse transform; imaginary parts on self-conjugate lines are dropped.
    pub fn inverse(&self, spectrum: &[Complex<T>]) -> Vec<T> {
        let n = self.n();
        let last = self.sizes[n - 1];
        let hl = self.half_shape[n - 1];
        let mut work = spectrum.to_vec();
        for axis in 0..n - 1 {
            self.axis_pass(&mut work, axis, &self.plan.inv[axis]);
        }
        let rows = work.len() / hl;
        let mut out = vec![T::zero(); rows * last];
        let mut scratch = self.plan.c2r.make_scratch_vec();
        let scale = T::one() / T::from_usize_lossy(self.len());
        for r in 0..rows {
            let row = &mut work[r * hl..(r + 1) * hl];
            row[0].im = T::zero();
            row[hl - 1].im = T::zero();
            self.plan
                .c2r
                .process_with_scratch(row, &mut out[r * last..(r + 1) * last], &mut scratch)
                .expect("c2r buffer sizes");
        }
        for x in out.iter_mut() {
            *x = *x * scale;
        }
        out
    }

    fn axis_pass(&self, data: &mut [Complex<T>], axis: usize, fft: &Arc<dyn Fft<T>>) {
        let len = self.half_shape[axis];
        let stride: usize = self.half_shape[axis + 1..].iter().product();
        let outer: usize = self.half_shape[..axis].iter().product();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); data.len()];
        for o in 0..outer {
            for k in 0..len {
                let src = &data[(o * len + k) * stride..(o * len + k + 1) * stride];
                for (i, &z) in src.iter().enumerate() {
                    buf[(o * stride + i) * len + k] = z;
                }
            }
        }
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(&mut buf, &mut scratch);
        for o in 0..outer {
            for k in 0..len {
                let dst = &mut data[(o * len + k) * stride..(o * len + k + 1) * stride];
                for (i, z) in dst.iter_mut().enumerate() {
                    *z = buf[(o * stride + i) * len + k];
                }
            }
        }
    }

    /// Flat index of the spectral mode mirrored through the origin, for modes
    /// on a self-conjugate line of the half layout.
    pub(crate) fn mirror_flat(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (a, &k) in idx.iter().enumerate() {
            let m = if a + 1 == idx.len() { k } else { (self.sizes[a] - k) % self.sizes[a] };
            flat = flat * self.half_shape[a] + m;
        }
        flat
    }
}
