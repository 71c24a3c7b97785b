//! Ground states of `(1 - Δ + L_c) φ = |φ|^{p-1} φ` by Petviashvili iteration.

mod diagnostics;

use std::sync::Arc;

use num_complex::Complex;

pub use diagnostics::{
    decay_report, sign_report, symmetry_report, DecayReport, DecayVerdict, Diagnostics, SignReport, SymmetryReport,
};

use crate::error::{Error, Result};
use crate::functionals::{pohozaev_residuals_from, FunctionalReport, Functionals, Integrals, WaveParams};
use crate::scalar::Real;
use crate::spectral::{dealias_in_place, dealias_mask, make_grid, nonlinearity, symbol_linear, Field, Grid, Spectrum};

#[derive(Clone, Debug)]
pub enum InitialGuess<T: Real> {
    /// `amplitude · exp(-|x|^2 / width^2)`; amplitude defaults to `((p+1)/2)^{1/(p-1)}`.
    Gaussian { width: T, amplitude: Option<T> },
    Field(Field<T>),
}

#[derive(Clone, Debug)]
pub struct SolveConfig<T: Real> {
    pub tol: T,
    pub max_iter: usize,
    /// Stabilization exponent; `None` means `p/(p-1)`.
    pub gamma: Option<T>,
    pub init: InitialGuess<T>,
    pub dealias: bool,
    /// Testing hook: solves at speeds above this value fail on purpose.
    pub fault_speed_limit: Option<T>,
}

impl<T: Real> Default for SolveConfig<T> {
    fn default() -> Self {
        SolveConfig {
            tol: T::lit(1e-10),
            max_iter: 3000,
            gamma: None,
            init: InitialGuess::Gaussian { width: T::one(), amplitude: None },
            dealias: true,
            fault_speed_limit: None,
        }
    }
}

impl<T: Real> SolveConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidParams("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParams("max_iter must be at least 1".into()));
        }
        if let Some(g) = self.gamma {
            if !(g > T::zero()) || !g.is_finite() {
                return Err(Error::InvalidParams("gamma must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult<T: Real> {
    pub params: WaveParams<T>,
    pub phi: Field<T>,
    pub residual: T,
    pub iters: usize,
    /// Final stabilization factor `M`; tends to 1.
    pub stabilization: T,
    pub report: FunctionalReport<T>,
    pub integrals: Integrals<T>,
    pub pohozaev: [T; 3],
    pub d_value: T,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> GroundStateResult<T> {
    /// `(φ, -Aφ)`, the pair moving with velocity `c`.
    pub fn traveling_pair(&self) -> Result<(Field<T>, Field<T>)> {
        let f = Functionals::new(self.phi.grid(), &self.params)?;
        Ok((self.phi.clone(), f.traveling_partner(&self.phi)?))
    }

    /// `S(φ, -Aφ)`, the level the flow sees. Equals `d_value` except under the
    /// angular-mean zero-mode rule, where the two differ by `O(1/L)`.
    pub fn pair_action(&self) -> Result<T> {
        let f = Functionals::new(self.phi.grid(), &self.params)?;
        let (phi, psi) = self.traveling_pair()?;
        f.action_pair(&phi, &psi)
    }
}

fn initial_field<T: Real>(grid: &Arc<Grid<T>>, p: T, init: &InitialGuess<T>) -> Result<Field<T>> {
    match init {
        InitialGuess::Gaussian { width, amplitude } => {
            let a = amplitude.unwrap_or_else(|| ((p + T::one()) / T::lit(2.0)).powf(T::one() / (p - T::one())));
            let w2 = *width * *width;
            Field::from_fn(grid.clone(), |x| {
                let r2 = x.iter().fold(T::zero(), |s, &y| s + y * y);
                a * (-r2 / w2).exp()
            })
        }
        InitialGuess::Field(f) => {
            if **f.grid() != **grid {
                return Err(Error::GridMismatch);
            }
            Ok(f.clone())
        }
    }
}

/// Spectral sums used by the iteration: `Σ w a_k |x_k|^2` and `Σ w Re(y_k conj x_k)`.
fn wsum<T: Real>(weights: &[T], f: impl Fn(usize) -> T) -> T {
    weights.iter().enumerate().fold(T::zero(), |acc, (i, &w)| acc + w * f(i))
}

pub fn petviashvili_solve<T: Real>(
    params: &WaveParams<T>,
    grid: &Arc<Grid<T>>,
    config: &SolveConfig<T>,
) -> Result<GroundStateResult<T>> {
    config.validate()?;
    if let Some(limit) = config.fault_speed_limit {
        if params.speed() > limit {
            return Err(Error::InjectedFault(format!("solve refused at speed {}", params.speed())));
        }
    }
    let funcs = Functionals::new(grid, params)?;
    let p = params.p();
    let gamma = config.gamma.unwrap_or(p / (p - T::one()));
    let lin = symbol_linear(grid, params.c(), params.zero_mode());
    let lin = lin.values();
    let weights = grid.mode_weights();
    let mask = dealias_mask(grid);

    let mut uh = initial_field(grid, p, &config.init)?.fft();
    if config.dealias {
        dealias_in_place(&mut uh, &mask);
    }
    let tiny = T::lit(1e-12);
    let huge = T::lit(1e150);
    let mut residual = T::infinity();
    for it in 0..config.max_iter {
        let u = uh.ifft().map_err(|_| Error::DivergedToInf { iters: it })?;
        let norm = crate::spectral::l2_norm(&u);
        if !norm.is_finite() || norm > huge {
            return Err(Error::DivergedToInf { iters: it });
        }
        if norm < tiny {
            return Err(Error::DivergedToZero { iters: it });
        }
        let mut nh = nonlinearity(&u, p).fft();
        if config.dealias {
            dealias_in_place(&mut nh, &mask);
        }
        let (uv, nv) = (uh.values(), nh.values());
        let lu_u = wsum(&weights, |i| lin[i] * uv[i].norm_sqr());
        let nu_u = wsum(&weights, |i| nv[i].re * uv[i].re + nv[i].im * uv[i].im);
        let num = wsum(&weights, |i| (uv[i] * lin[i] - nv[i]).norm_sqr());
        let den = wsum(&weights, |i| (uv[i] * lin[i]).norm_sqr());
        residual = (num / den).sqrt();
        if !(nu_u > T::zero()) {
            return Err(Error::DivergedToZero { iters: it });
        }
        let m = lu_u / nu_u;
        if residual <= config.tol {
            return finish(params, &funcs, u, residual, it, m);
        }
        let factor = m.powf(gamma);
        let next: Vec<Complex<T>> = nv.iter().zip(lin).map(|(&z, &l)| z * (factor / l)).collect();
        uh = Spectrum::new(grid.clone(), next)?;
    }
    Err(Error::NoConvergence { max_iter: config.max_iter, last_residual: residual.to_f64_lossy() })
}

fn finish<T: Real>(
    params: &WaveParams<T>,
    funcs: &Functionals<T>,
    phi: Field<T>,
    residual: T,
    iters: usize,
    m: T,
) -> Result<GroundStateResult<T>> {
    let partner = funcs.traveling_partner(&phi)?;
    let report = funcs.report(&phi, &partner)?;
    let integrals = funcs.integrals(&phi)?;
    let pohozaev = pohozaev_residuals_from(&integrals, params.p(), params.n());
    let diagnostics = Diagnostics::compute(&phi, params.c());
    Ok(GroundStateResult {
        params: params.clone(),
        d_value: report.n,
        phi,
        residual,
        iters,
        stabilization: m,
        report,
        integrals,
        pohozaev,
        diagnostics,
    })
}

/// Continuation failure: the error plus every state converged before it.
#[derive(Debug)]
pub struct ContinuationFailure<T: Real> {
    pub error: Error,
    pub partial: Vec<GroundStateResult<T>>,
}

/// Solve along a path of speeds, seeding each solve with the previous profile.
/// A failed step is bisected up to four times.
pub fn continuation<T: Real>(
    path: &[Vec<T>],
    base: &WaveParams<T>,
    grid: &Arc<Grid<T>>,
    config: &SolveConfig<T>,
) -> std::result::Result<Vec<GroundStateResult<T>>, ContinuationFailure<T>> {
    let mut out: Vec<GroundStateResult<T>> = Vec::with_capacity(path.len());
    let mut good: Option<(Vec<T>, Field<T>)> = None;
    let fail = |error: Error, out: Vec<GroundStateResult<T>>| ContinuationFailure { error, partial: out };
    for target in path {
        let mut trial = target.clone();
        let mut halvings = 0;
        loop {
            let params = match base.with_speed(trial.clone()) {
                Ok(p) => p,
                Err(e) => return Err(fail(e, out)),
            };
            let mut cfg = config.clone();
            if let Some((_, phi)) = &good {
                cfg.init = InitialGuess::Field(phi.clone());
            }
            match petviashvili_solve(&params, grid, &cfg) {
                Ok(r) => {
                    let reached = trial == *target;
                    good = Some((trial.clone(), r.phi.clone()));
                    if reached {
                        out.push(r);
                        break;
                    }
                    trial = target.clone();
                }
                Err(e) => {
                    let last_good = good.as_ref().map(|(c, _)| c.clone());
                    if halvings == 4 || last_good.is_none() {
                        let at = trial.iter().map(|x| x.to_f64_lossy()).collect();
                        let lg = last_good.map(|c| c.iter().map(|x| x.to_f64_lossy()).collect());
                        let error = Error::ContinuationStuck { at, last_good: lg, cause: e.to_string() };
                        return Err(fail(error, out));
                    }
                    halvings += 1;
                    let from = last_good.unwrap();
                    trial = from.iter().zip(&trial).map(|(&a, &b)| (a + b) / T::lit(2.0)).collect();
                }
            }
        }
    }
    Ok(out)
}

/// Evenly spaced path from speed vector `from` to `to` with at most `max_step` per step.
pub fn speed_path<T: Real>(from: &[T], to: &[T], max_step: T) -> Vec<Vec<T>> {
    let dist = from.iter().zip(to).fold(T::zero(), |a, (&x, &y)| a + (y - x) * (y - x)).sqrt();
    let steps = (dist / max_step - T::lit(1e-9)).ceil().max(T::zero()).to_usize().unwrap_or(0);
    (0..=steps)
        .map(|k| {
            let t = if steps == 0 { T::one() } else { T::from_usize_lossy(k) / T::from_usize_lossy(steps) };
            from.iter().zip(to).map(|(&a, &b)| a + (b - a) * t).collect()
        })
        .collect()
}

/// Copy a field into the centre of a larger grid with the same spacing,
/// padding with zeros.
pub fn embed<T: Real>(field: &Field<T>, grid: &Arc<Grid<T>>) -> Result<Field<T>> {
    let small = field.grid();
    let n = small.n();
    if grid.n() != n || (0..n).any(|a| grid.sizes()[a] < small.sizes()[a]) {
        return Err(Error::GridMismatch);
    }
    let off: Vec<usize> = (0..n).map(|a| (grid.sizes()[a] - small.sizes()[a]) / 2).collect();
    let mut values = vec![T::zero(); grid.len()];
    let mut idx = vec![0usize; n];
    for &v in field.values() {
        let mut flat = 0;
        for a in 0..n {
            flat = flat * grid.sizes()[a] + idx[a] + off[a];
        }
        values[flat] = v;
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < small.sizes()[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Field::new(grid.clone(), values)
}

/// Pohozaev integrals on a sequence of boxes at fixed spacing, each twice the
/// previous, plus their Richardson extrapolation in `1/L`.
#[derive(Clone, Debug)]
pub struct BoxStudy<T: Real> {
    pub half_widths: Vec<T>,
    pub levels: Vec<GroundStateResult<T>>,
    pub raw_residuals: Vec<[T; 3]>,
    pub extrapolated: Integrals<T>,
    pub residuals: [T; 3],
}

/// Solve on `levels` boxes obtained by doubling `sizes` and `half_widths`.
/// The box error of the integrals is expanded as `a L^{-n} + b L^{-2n}`
/// (algebraic tails for `c ≠ 0`), and both terms are eliminated when three
/// or more levels are available.
pub fn box_study<T: Real>(
    params: &WaveParams<T>,
    sizes: &[usize],
    half_widths: &[T],
    levels: usize,
    config: &SolveConfig<T>,
) -> Result<BoxStudy<T>> {
    if levels == 0 {
        return Err(Error::Precondition("box study needs at least one level".into()));
    }
    let n = sizes.len();
    let mut results: Vec<GroundStateResult<T>> = Vec::new();
    let mut widths = Vec::new();
    for lvl in 0..levels {
        let f = 1usize << lvl;
        let s: Vec<usize> = sizes.iter().map(|&x| x * f).collect();
        let l: Vec<T> = half_widths.iter().map(|&x| x * T::from_usize_lossy(f)).collect();
        let grid = make_grid(n, &s, &l)?;
        let mut cfg = config.clone();
        if let Some(prev) = results.last() {
            cfg.init = InitialGuess::Field(embed(&prev.phi, &grid)?);
        }
        widths.push(l[0]);
        results.push(petviashvili_solve(params, &grid, &cfg)?);
    }
    let raw: Vec<[T; 3]> = results.iter().map(|r| r.pohozaev).collect();
    let pick = |f: &dyn Fn(&Integrals<T>) -> T| -> T {
        let q: Vec<T> = results.iter().map(|r| f(&r.integrals)).collect();
        richardson(&q, n)
    };
    let extrapolated = Integrals {
        l2: pick(&|i| i.l2),
        grad2: pick(&|i| i.grad2),
        lform: pick(&|i| i.lform),
        lp1: pick(&|i| i.lp1),
    };
    let residuals = pohozaev_residuals_from(&extrapolated, params.p(), n);
    Ok(BoxStudy { half_widths: widths, levels: results, raw_residuals: raw, extrapolated, residuals })
}

/// Richardson extrapolation of values at `L, 2L, 4L, ...` with error orders `n, 2n, 3n, ...`.
fn richardson<T: Real>(q: &[T], n: usize) -> T {
    let mut cur = q.to_vec();
    let mut order = n as i32;
    while cur.len() > 1 {
        let f = T::lit(2f64.powi(order));
        cur = cur.windows(2).map(|w| (f * w[1] - w[0]) / (f - T::one())).collect();
        order += n as i32;
    }
    cur[0]
}

/// Solve from several seeds and return the results ordered by action,
/// together with the largest relative spread of `d` among them.
pub fn multi_seed_solve<T: Real>(
    params: &WaveParams<T>,
    grid: &Arc<Grid<T>>,
    config: &SolveConfig<T>,
    seeds: &[InitialGuess<T>],
) -> Result<(Vec<GroundStateResult<T>>, T)> {
    let mut out = Vec::new();
    for s in seeds {
        let mut cfg = config.clone();
        cfg.init = s.clone();
        out.push(petviashvili_solve(params, grid, &cfg)?);
    }
    out.sort_by(|a, b| a.d_value.partial_cmp(&b.d_value).unwrap_or(std::cmp::Ordering::Equal));
    let spread = match (out.first(), out.last()) {
        (Some(a), Some(b)) => crate::scalar::rel_diff(a.d_value, b.d_value),
        _ => T::zero(),
    };
    Ok((out, spread))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_both_orders() {
        let q: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|l: &f64| 3.0 + 5.0 / l.powi(2) - 7.0 / l.powi(4)).collect();
        assert!((richardson(&q, 2) - 3.0).abs() < 1e-13);
        let q: Vec<f64> = [5.0, 10.0, 20.0, 40.0].iter().map(|l: &f64| 3.0 + 5.0 / l.powi(2) - 7.0 / l.powi(4) + 2.0 / l.powi(6)).collect();
        assert!((richardson(&q, 2) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn speed_path_steps() {
        let p = speed_path(&[0.0, 0.0], &[0.8, 0.0], 0.05);
        assert_eq!(p.len(), 17);
        assert!((p[16][0] - 0.8f64).abs() < 1e-15);
        assert_eq!(speed_path(&[0.0], &[0.0], 0.05).len(), 1);
    }

    #[test]
    fn embedding_keeps_centre() {
        let g = make_grid::<f64>(2, &[8, 8], &[1.0, 1.0]).unwrap();
        let big = make_grid::<f64>(2, &[16, 16], &[2.0, 2.0]).unwrap();
        let f = Field::from_fn(g, |x| 1.0 + x[0] + 10.0 * x[1]).unwrap();
        let e = embed(&f, &big).unwrap();
        assert_eq!(e.value_at(&[8, 8]), f.value_at(&[4, 4]));
        assert_eq!(e.value_at(&[0, 0]), 0.0);
    }
}
