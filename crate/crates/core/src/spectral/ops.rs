use num_complex::Complex;

use super::field::{same_grid, Field, Spectrum};
use super::symbol::{Parity, Symbol};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Imaginary residue (relative) above which a multiplier result is rejected.
pub const REALNESS_TOL: f64 = 1e-12;

/// Multiply a spectrum by a symbol in place.
pub fn apply_symbol<T: Real>(spec: &mut Spectrum<T>, symbol: &Symbol<T>) -> Result<()> {
    same_grid(spec.grid(), symbol.grid())?;
    let parity = symbol.parity();
    for (z, &s) in spec.values_mut().iter_mut().zip(symbol.values()) {
        *z = match parity {
            Parity::Even => *z * s,
            Parity::Odd => Complex::new(-z.im * s, z.re * s),
        };
    }
    Ok(())
}

/// `F^{-1}[symbol · F u]`, rejecting results that are not real.
pub fn apply_multiplier<T: Real>(field: &Field<T>, symbol: &Symbol<T>) -> Result<Field<T>> {
    let mut spec = field.fft();
    apply_symbol(&mut spec, symbol)?;
    let residue = spec.hermitian_defect();
    if residue > T::lit(REALNESS_TOL) {
        return Err(Error::NonRealResult { residue: residue.to_f64_lossy() });
    }
    spec.ifft()
}

/// Like `apply_multiplier` for `(-Δ)^{-1/2}`, optionally insisting on zero mean.
pub fn apply_inverse_half_laplacian<T: Real>(field: &Field<T>, strict: bool) -> Result<Field<T>> {
    if strict {
        check_zero_mean(field)?;
    }
    apply_multiplier(field, &Symbol::inv_half_laplacian(field.grid()))
}

pub fn check_zero_mean<T: Real>(field: &Field<T>) -> Result<()> {
    let mean = field.mean();
    let scale = field.max_abs().max(T::min_positive_value());
    if mean.abs() > T::tol(1e-12, 64.0) * scale {
        return Err(Error::NonZeroMean { mean: mean.to_f64_lossy() });
    }
    Ok(())
}

/// `|s|^{p-1} s`
pub fn pow_odd<T: Real>(s: T, p: T) -> T {
    if s == T::zero() {
        T::zero()
    } else {
        s.signum() * s.abs().powf(p)
    }
}

pub fn nonlinearity<T: Real>(field: &Field<T>, p: T) -> Field<T> {
    let values = field.values().iter().map(|&s| pow_odd(s, p)).collect();
    Field::new(field.grid().clone(), values).expect("finite input gives finite powers")
}

/// Flags for the modes kept by the 2/3 rule: every axis satisfies `3|k| <= N`.
pub fn dealias_mask<T: Real>(grid: &super::grid::Grid<T>) -> Vec<bool> {
    band_mask(grid, 3)
}

/// Modes with `q|k| <= N` on every axis. `q = 3` is the 2/3 rule; `q = m + 1`
/// makes grid sums of degree-`(m+1)` products of kept modes exact.
pub fn band_mask<T: Real>(grid: &super::grid::Grid<T>, q: usize) -> Vec<bool> {
    let sizes = grid.sizes().to_vec();
    let mut mask = vec![true; grid.spectrum_len()];
    grid.for_each_mode(|flat, idx| {
        mask[flat] = idx
            .iter()
            .zip(&sizes)
            .all(|(&k, &n)| q * super::grid::signed_index(k, n).unsigned_abs() <= n);
    });
    mask
}

pub fn dealias_in_place<T: Real>(spec: &mut Spectrum<T>, mask: &[bool]) {
    for (z, &keep) in spec.values_mut().iter_mut().zip(mask) {
        if !keep {
            *z = Complex::new(T::zero(), T::zero());
        }
    }
}

pub fn dealias<T: Real>(spec: &Spectrum<T>) -> Spectrum<T> {
    let mut out = spec.clone();
    dealias_in_place(&mut out, &dealias_mask(spec.grid()));
    out
}

pub fn inner<T: Real>(a: &Field<T>, b: &Field<T>) -> Result<T> {
    same_grid(a.grid(), b.grid())?;
    let s: T = a.values().iter().zip(b.values()).map(|(&x, &y)| x * y).sum();
    Ok(s * a.grid().cell_volume())
}

pub fn l2_norm2<T: Real>(u: &Field<T>) -> T {
    u.values().iter().map(|&x| x * x).sum::<T>() * u.grid().cell_volume()
}

pub fn l2_norm<T: Real>(u: &Field<T>) -> T {
    l2_norm2(u).sqrt()
}

/// `‖∇u‖^2`, i.e. `⟨-Δu, u⟩`.
pub fn grad_norm2<T: Real>(u: &Field<T>) -> T {
    grad_norm2_spec(&u.fft())
}

pub(crate) fn grad_norm2_spec<T: Real>(s: &Spectrum<T>) -> T {
    let k2 = Symbol::neg_laplacian(s.grid());
    s.weighted_dot(s, |f| k2.values()[f])
}

pub fn h1_norm2<T: Real>(u: &Field<T>) -> T {
    l2_norm2(u) + grad_norm2(u)
}

pub fn h1_norm<T: Real>(u: &Field<T>) -> T {
    h1_norm2(u).sqrt()
}

/// `∫ |u|^{p+1} dx`
pub fn lp1_power<T: Real>(u: &Field<T>, p: T) -> T {
    let q = p + T::one();
    u.values().iter().map(|&x| x.abs().powf(q)).sum::<T>() * u.grid().cell_volume()
}

/// `‖u‖_{L^{p+1}}`
pub fn lp1_norm<T: Real>(u: &Field<T>, p: T) -> T {
    lp1_power(u, p).powf(T::one() / (p + T::one()))
}

/// `Σ_k w_k s_k |û_k|^2` scaled to a physical integral.
pub fn quadratic_form<T: Real>(u: &Spectrum<T>, symbol: &Symbol<T>) -> Result<T> {
    same_grid(u.grid(), symbol.grid())?;
    let v = symbol.values();
    Ok(u.weighted_dot(u, |f| v[f]))
}

/// Translate by `y`: result(x) = u(x - y), exact for trigonometric interpolants.
pub fn translate<T: Real>(spec: &Spectrum<T>, y: &[T]) -> Spectrum<T> {
    let g = spec.grid().clone();
    let mut out = spec.clone();
    let mut xo = vec![T::zero(); g.n()];
    let vals = out.values_mut();
    g.for_each_mode(|flat, idx| {
        g.xi_odd(idx, &mut xo);
        let ph = -xo.iter().zip(y).fold(T::zero(), |a, (&k, &s)| a + k * s);
        vals[flat] = vals[flat] * Complex::new(ph.cos(), ph.sin());
    });
    out
}

/// Evaluate the trigonometric interpolant of a field at arbitrary points.
pub struct Interpolator<T: Real> {
    spec: Spectrum<T>,
    weights: Vec<T>,
}

impl<T: Real> Interpolator<T> {
    pub fn new(field: &Field<T>) -> Self {
        let spec = field.fft();
        let weights = field.grid().mode_weights();
        Interpolator { spec, weights }
    }

    pub fn eval(&self, x: &[T]) -> T {
        let g = self.spec.grid();
        let n = g.n();
        let phases: Vec<Vec<Complex<T>>> = (0..n)
            .map(|a| {
                let x0 = -g.half_widths()[a];
                (0..g.half_shape()[a])
                    .map(|k| {
                        let th = g.wavenumbers(a)[k] * (x[a] - x0);
                        Complex::new(th.cos(), th.sin())
                    })
                    .collect()
            })
            .collect();
        let mut acc = T::zero();
        g.for_each_mode(|flat, idx| {
            let mut e = Complex::new(T::one(), T::zero());
            for a in 0..n {
                e = e * phases[a][idx[a]];
            }
            acc = acc + self.weights[flat] * (self.spec.values()[flat] * e).re;
        });
        acc / T::from_usize_lossy(g.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::make_grid;
    use crate::spectral::symbol::{symbol_khat, symbol_lhalf, ZeroModeRule};
    use std::f64::consts::PI;

    #[test]
    fn norms_of_simple_fields() {
        let g = make_grid::<f64>(1, &[64], &[PI]).unwrap();
        let z = Field::zeros(g.clone());
        assert_eq!(l2_norm(&z), 0.0);
        assert_eq!(h1_norm(&z), 0.0);
        assert_eq!(lp1_norm(&z, 2.0), 0.0);
        let a = Field::constant(g.clone(), 1.5);
        assert!((l2_norm2(&a) - 2.25 * 2.0 * PI).abs() < 1e-12);
        let c = Field::from_fn(g, |x| x[0].cos()).unwrap();
        assert!((l2_norm2(&c) - PI).abs() < 1e-13);
        assert!((grad_norm2(&c) - PI).abs() < 1e-12);
    }

    #[test]
    fn nonlinearity_examples() {
        assert_eq!(pow_odd(-2.0, 2.0), -4.0);
        assert!((pow_odd(3.0, 3.0) - 27.0f64).abs() < 1e-12);
        assert!((pow_odd(-1.5, 2.5) + 2.755675960631075f64).abs() < 1e-12);
    }

    #[test]
    fn khat_halves_unit_mode() {
        let g = make_grid::<f64>(2, &[16, 16], &[PI, PI]).unwrap();
        let f = Field::from_fn(g.clone(), |x| x[0].cos()).unwrap();
        let k = symbol_khat(&g, &[0.0, 0.0], ZeroModeRule::Zero);
        let out = apply_multiplier(&f, &k).unwrap();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - 0.5 * b).abs() < 1e-14);
        }
    }

    #[test]
    fn half_laplacian_kills_constants() {
        let g = make_grid::<f64>(2, &[8, 8], &[1.0, 1.0]).unwrap();
        let f = Field::constant(g.clone(), 3.0);
        let out = apply_multiplier(&f, &Symbol::half_laplacian(&g)).unwrap();
        assert!(out.max_abs() < 1e-14);
        assert!(matches!(apply_inverse_half_laplacian(&f, true), Err(Error::NonZeroMean { .. })));
    }

    #[test]
    fn skew_half_operator_squares_to_p() {
        let g = make_grid::<f64>(2, &[16, 16], &[3.0, 3.0]).unwrap();
        let c = [0.5, 0.3];
        let f = Field::from_fn(g.clone(), |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() * (1.0 + x[0])).unwrap();
        let a = symbol_lhalf(&g, &c);
        let twice = apply_multiplier(&apply_multiplier(&f, &a).unwrap(), &a).unwrap();
        let p = crate::spectral::symbol::symbol_p(&g, &c, ZeroModeRule::Zero);
        let direct = apply_multiplier(&f, &p).unwrap();
        for (x, y) in twice.values().iter().zip(direct.values()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn non_even_symbol_is_rejected() {
        let g2 = make_grid::<f64>(2, &[16, 16], &[1.0, 1.0]).unwrap();
        let bad2 = Symbol::from_fn(&g2, Parity::Even, |m| m.xi[0]);
        let f2 = Field::from_fn(g2, |x| (3.0 * x[0]).sin() * (1.0 + (x[1] * PI).cos())).unwrap();
        assert!(matches!(apply_multiplier(&f2, &bad2), Err(Error::NonRealResult { .. })));
    }

    #[test]
    fn dealias_removes_top_modes() {
        let g = make_grid::<f64>(1, &[12], &[PI]).unwrap();
        let top = Field::from_fn(g.clone(), |x| (5.0 * x[0]).cos()).unwrap();
        assert!(dealias(&top.fft()).norm2() < 1e-20);
        let kept = Field::from_fn(g, |x| (4.0 * x[0]).cos()).unwrap();
        let d = dealias(&kept.fft()).ifft().unwrap();
        assert!(d.sub(&kept).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn translate_and_interpolate_agree() {
        let g = make_grid::<f64>(2, &[48, 48], &[6.0, 6.0]).unwrap();
        let f = Field::from_fn(g.clone(), |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let y = [0.37, -0.21];
        let moved = translate(&f.fft(), &y).ifft().unwrap();
        let ip = Interpolator::new(&f);
        let exact = Field::from_fn(g, |x| (-((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2))).exp()).unwrap();
        assert!(moved.sub(&exact).unwrap().max_abs() < 1e-10);
        let want = (-(0.37f64 * 0.37 + 0.21 * 0.21)).exp();
        assert!((ip.eval(&[0.37, -0.21]) - want).abs() < 1e-10);
        assert!((ip.eval(&[0.0, 0.0]) - 1.0).abs() < 1e-12);
    }
}
