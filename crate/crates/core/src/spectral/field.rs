use std::sync::Arc;

use num_complex::Complex;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Real samples on a grid, row-major with the last axis fastest.
#[derive(Clone, Debug)]
pub struct Field<T: Real> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

/// Half-complex spectrum of a real field.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    grid: Arc<Grid<T>>,
    values: Vec<Complex<T>>,
}

pub(crate) fn check_finite<T: Real>(values: &[T], context: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { context: context.to_string() })
    }
}

pub(crate) fn same_grid<T: Real>(a: &Arc<Grid<T>>, b: &Arc<Grid<T>>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

impl<T: Real> Field<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        check_finite(&values, "field construction")?;
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Field { grid, values }
    }

    pub fn constant(grid: Arc<Grid<T>>, a: T) -> Self {
        let values = vec![a; grid.len()];
        Field { grid, values }
    }

    /// Sample `f` at the grid points.
    pub fn from_fn(grid: Arc<Grid<T>>, mut f: impl FnMut(&[T]) -> T) -> Result<Self> {
        let coords: Vec<Vec<T>> = (0..grid.n()).map(|a| grid.coords(a)).collect();
        let sizes = grid.sizes().to_vec();
        let mut idx = vec![0usize; sizes.len()];
        let mut x = vec![T::zero(); sizes.len()];
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            for a in 0..sizes.len() {
                x[a] = coords[a][idx[a]];
            }
            values.push(f(&x));
            for a in (0..sizes.len()).rev() {
                idx[a] += 1;
                if idx[a] < sizes[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn fft(&self) -> Spectrum<T> {
        Spectrum { values: self.grid.forward(&self.values), grid: self.grid.clone() }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Field::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, s: T) -> Self {
        Field { grid: self.grid.clone(), values: self.values.iter().map(|&v| v * s).collect() }
    }

    /// `self + s * other`
    pub fn axpy(&self, s: T, other: &Field<T>) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + s * b).collect();
        Field::new(self.grid.clone(), values)
    }

    pub fn sub(&self, other: &Field<T>) -> Result<Self> {
        self.axpy(-T::one(), other)
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_usize_lossy(self.values.len())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Index of the sample with the largest magnitude (first one on ties).
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = i;
            }
        }
        best
    }

    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        let sizes = self.grid.sizes();
        let mut idx = vec![0; sizes.len()];
        let mut r = flat;
        for a in (0..sizes.len()).rev() {
            idx[a] = r % sizes[a];
            r /= sizes[a];
        }
        idx
    }

    pub fn value_at(&self, idx: &[usize]) -> T {
        let sizes = self.grid.sizes();
        let mut flat = 0;
        for (a, &i) in idx.iter().enumerate() {
            flat = flat * sizes[a] + i % sizes[a];
        }
        self.values[flat]
    }

    /// Circular shift: result[j] = self[j - offset].
    pub fn roll(&self, offset: &[isize]) -> Self {
        let sizes = self.grid.sizes();
        let n = sizes.len();
        let mut out = vec![T::zero(); self.values.len()];
        let mut idx = vec![0usize; n];
        for &v in self.values.iter() {
            let mut flat = 0;
            for a in 0..n {
                let s = sizes[a] as isize;
                let j = (idx[a] as isize + offset[a]).rem_euclid(s) as usize;
                flat = flat * sizes[a] + j;
            }
            out[flat] = v;
            for a in (0..n).rev() {
                idx[a] += 1;
                if idx[a] < sizes[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Field { grid: self.grid.clone(), values: out }
    }

    /// Shift so that the largest |value| sits on the origin sample.
    pub fn centered(&self) -> Self {
        let peak = self.unravel(self.argmax_abs());
        let origin = self.grid.origin_index();
        let off: Vec<isize> = origin.iter().zip(&peak).map(|(&o, &p)| o as isize - p as isize).collect();
        self.roll(&off)
    }
}

impl<T: Real> Spectrum<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.spectrum_len() {
            return Err(Error::LengthMismatch { expected: grid.spectrum_len(), got: values.len() });
        }
        Ok(Spectrum { grid, values })
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let values = vec![Complex::new(T::zero(), T::zero()); grid.spectrum_len()];
        Spectrum { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn ifft(&self) -> Result<Field<T>> {
        Field::new(self.grid.clone(), self.grid.inverse(&self.values))
    }

    pub fn scale(&self, s: T) -> Self {
        Spectrum { grid: self.grid.clone(), values: self.values.iter().map(|&z| z * s).collect() }
    }

    pub fn axpy(&self, s: T, other: &Spectrum<T>) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b * s).collect();
        Ok(Spectrum { grid: self.grid.clone(), values })
    }

    /// Physical inner product `∫ a b dx` evaluated in Fourier space.
    pub fn dot(&self, other: &Spectrum<T>) -> Result<T> {
        same_grid(&self.grid, &other.grid)?;
        Ok(self.weighted_dot(other, |_| T::one()))
    }

    /// `∫ |f|^2 dx` from the spectrum.
    pub fn norm2(&self) -> T {
        self.weighted_dot(self, |_| T::one())
    }

    /// `(h^n/N) Σ w_k s_k Re(a_k conj b_k)` over stored modes.
    pub(crate) fn weighted_dot(&self, other: &Spectrum<T>, s: impl Fn(usize) -> T) -> T {
        let hl = self.grid.half_shape()[self.grid.n() - 1];
        let mut acc = T::zero();
        for (f, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let re = a.re * b.re + a.im * b.im;
            acc = acc + self.grid.mode_weight(f % hl) * s(f) * re;
        }
        acc * self.grid.cell_volume() / T::from_usize_lossy(self.grid.len())
    }

    /// Relative size of the part of the spectrum that violates Hermitian symmetry
    /// on the self-conjugate lines; a real field has zero defect.
    pub fn hermitian_defect(&self) -> T {
        let g = &self.grid;
        let n = g.n();
        let last = g.sizes()[n - 1];
        let mut bad = T::zero();
        let mut total = T::zero();
        g.for_each_mode(|flat, idx| {
            let z = self.values[flat];
            total = total + z.norm_sqr();
            let k = idx[n - 1];
            if k == 0 || k == last / 2 {
                let m = self.values[g.mirror_flat(idx)];
                bad = bad + (z - m.conj()).norm_sqr();
            }
        });
        if total > T::zero() {
            (bad / total).sqrt()
        } else {
            T::zero()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::make_grid;

    #[test]
    fn rejects_non_finite_samples() {
        let g = make_grid::<f64>(1, &[8], &[1.0]).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(Field::new(g, v), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn roll_and_center() {
        let g = make_grid::<f64>(2, &[8, 8], &[1.0, 1.0]).unwrap();
        let mut v = vec![0.0; 64];
        v[9] = -3.0;
        let f = Field::new(g, v).unwrap();
        let c = f.centered();
        assert_eq!(c.value_at(&[4, 4]), -3.0);
        assert_eq!(c.roll(&[-3, -3]).values()[9], -3.0);
    }

    #[test]
    fn real_fields_have_hermitian_spectra() {
        let g = make_grid::<f64>(2, &[8, 10], &[1.0, 1.0]).unwrap();
        let f = Field::from_fn(g, |x| (x[0] * 3.0).sin() + x[1] * x[0]).unwrap();
        assert!(f.fft().hermitian_defect() < 1e-14);
    }
}
