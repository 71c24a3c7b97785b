//! Time integration of `u_t = D v`, `v_t = -D(u - Δu - |u|^{p-1}u)` with
//! `D = (-Δ)^{1/2}`: integrating-factor RK4 with the exact linear propagator.

mod experiments;
mod orbit;

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use experiments::{
    perturbation_pair, strong_instability_experiment, stability_experiment, BlowupCriteria, ExperimentOutcome,
    OutcomeKind,
};
pub use orbit::{orbital_distance, OrbitFit, OrbitReference};

use crate::error::{Error, Result};
use crate::functionals::{Functionals, KParams, WaveParams};
use crate::scalar::Real;
use crate::spectral::{band_mask, dealias_mask, pow_odd, Field, Grid, Spectrum, Symbol};
use crate::stability::{membership_with, SetVerdict};

#[derive(Clone, Debug)]
pub struct EvolutionState<T: Real> {
    pub u: Field<T>,
    pub v: Field<T>,
    pub t: T,
}

type Pair<T> = (Vec<Complex<T>>, Vec<Complex<T>>);

/// Per-mode rotation for one time step.
#[derive(Clone, Debug)]
struct Propagator<T: Real> {
    dt: T,
    cos: Vec<T>,
    /// `(a/ω) sin ωt`
    su: Vec<T>,
    /// `-(b/ω) sin ωt`
    sv: Vec<T>,
}

/// Integrating-factor RK4 stepper bound to a grid.
#[derive(Clone, Debug)]
pub struct Integrator<T: Real> {
    grid: Arc<Grid<T>>,
    p: T,
    /// `|ξ|`
    a: Vec<T>,
    /// `|ξ| (1 + |ξ|²)`
    b: Vec<T>,
    omega: Vec<T>,
    mask: Vec<bool>,
    nonlinear: bool,
    cache: Option<(Propagator<T>, Propagator<T>)>,
}

impl<T: Real> Integrator<T> {
    pub fn new(grid: &Arc<Grid<T>>, p: T) -> Self {
        let k2 = Symbol::neg_laplacian(grid);
        let a: Vec<T> = k2.values().iter().map(|&x| x.sqrt()).collect();
        let b: Vec<T> = k2.values().iter().zip(&a).map(|(&x, &s)| s * (T::one() + x)).collect();
        let omega = a.iter().zip(&b).map(|(&x, &y)| (x * y).sqrt()).collect();
        Integrator { grid: grid.clone(), p, a, b, omega, mask: dealias_mask(grid), nonlinear: true, cache: None }
    }

    /// Drop the nonlinear term; the step is then the exact linear flow.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// Keep modes with `q|k| <= N` instead of the 2/3 rule.
    pub fn with_band(mut self, q: usize) -> Self {
        self.mask = band_mask(&self.grid, q);
        self
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    /// Largest `|ξ|` kept by the dealiasing mask.
    pub fn kmax(&self) -> T {
        self.a.iter().zip(&self.mask).filter(|(_, &m)| m).map(|(&x, _)| x).fold(T::zero(), T::max)
    }

    /// Step size keeping the linearized nonlinear frequency
    /// `kmax · sqrt(p max|u|^{p-1})` times `dt` below `cfl`.
    pub fn stable_dt(&self, u: &Field<T>, cfl: T) -> T {
        let m = u.max_abs();
        let rate = self.kmax() * (self.p * m.powf(self.p - T::one())).sqrt();
        if rate > T::zero() {
            cfl / rate
        } else {
            T::infinity()
        }
    }

    fn propagator(&self, dt: T) -> Propagator<T> {
        let m = self.omega.len();
        let (mut cos, mut su, mut sv) = (vec![T::one(); m], vec![T::zero(); m], vec![T::zero(); m]);
        for k in 0..m {
            let w = self.omega[k];
            if w > T::zero() {
                let (s, c) = (w * dt).sin_cos();
                cos[k] = c;
                su[k] = self.a[k] / w * s;
                sv[k] = -(self.b[k] / w) * s;
            }
        }
        Propagator { dt, cos, su, sv }
    }

    fn props(&mut self, dt: T) -> (Propagator<T>, Propagator<T>) {
        match &self.cache {
            Some((full, half)) if full.dt == dt => (full.clone(), half.clone()),
            _ => {
                let pair = (self.propagator(dt), self.propagator(dt / T::lit(2.0)));
                self.cache = Some(pair.clone());
                pair
            }
        }
    }

    fn apply(e: &Propagator<T>, x: &Pair<T>) -> Pair<T> {
        let (u, v) = x;
        let mut ou = Vec::with_capacity(u.len());
        let mut ov = Vec::with_capacity(u.len());
        for k in 0..u.len() {
            ou.push(u[k] * e.cos[k] + v[k] * e.su[k]);
            ov.push(u[k] * e.sv[k] + v[k] * e.cos[k]);
        }
        (ou, ov)
    }

    /// `(0, D Π N(u))` as a pair of spectra.
    fn forcing(&self, u: &[Complex<T>], t: T) -> Result<Pair<T>> {
        let m = u.len();
        let zero = vec![Complex::new(T::zero(), T::zero()); m];
        if !self.nonlinear {
            return Ok((zero.clone(), zero));
        }
        let phys = self.grid.inverse(u);
        if phys.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteState { t: t.to_f64_lossy() });
        }
        let nl: Vec<T> = phys.iter().map(|&s| pow_odd(s, self.p)).collect();
        let mut nh = self.grid.forward(&nl);
        for k in 0..m {
            nh[k] = if self.mask[k] { nh[k] * self.a[k] } else { Complex::new(T::zero(), T::zero()) };
        }
        Ok((zero, nh))
    }

    fn axpy(x: &Pair<T>, s: T, y: &Pair<T>) -> Pair<T> {
        (
            x.0.iter().zip(&y.0).map(|(&a, &b)| a + b * s).collect(),
            x.1.iter().zip(&y.1).map(|(&a, &b)| a + b * s).collect(),
        )
    }

    /// One step on spectra.
    fn step_spec(&mut self, x: &Pair<T>, t: T, dt: T) -> Result<Pair<T>> {
        let (full, half) = self.props(dt);
        let h2 = dt / T::lit(2.0);
        let k1 = self.forcing(&x.0, t)?;
        let ehx = Self::apply(&half, x);
        let k2 = self.forcing(&Self::apply(&half, &Self::axpy(x, h2, &k1)).0, t)?;
        let k3 = self.forcing(&Self::axpy(&ehx, h2, &k2).0, t)?;
        let ex = Self::apply(&full, x);
        let k4 = self.forcing(&Self::axpy(&ex, dt, &Self::apply(&half, &k3)).0, t)?;
        let mid = Self::apply(&half, &Self::axpy(&k2, T::one(), &k3));
        let ek1 = Self::apply(&full, &k1);
        let six = dt / T::lit(6.0);
        let mut out = Self::axpy(&ex, six, &ek1);
        out = Self::axpy(&out, six * T::lit(2.0), &mid);
        out = Self::axpy(&out, six, &k4);
        let finite = |v: &[Complex<T>]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite(&out.0) || !finite(&out.1) {
            return Err(Error::NonFiniteState { t: (t + dt).to_f64_lossy() });
        }
        Ok(out)
    }

    pub fn step(&mut self, state: &EvolutionState<T>, dt: T) -> Result<EvolutionState<T>> {
        let x = (state.u.fft().values().to_vec(), state.v.fft().values().to_vec());
        let y = self.step_spec(&x, state.t, dt)?;
        let t = state.t + dt;
        let nf = |_| Error::NonFiniteState { t: t.to_f64_lossy() };
        Ok(EvolutionState {
            u: Spectrum::new(self.grid.clone(), y.0)?.ifft().map_err(nf)?,
            v: Spectrum::new(self.grid.clone(), y.1)?.ifft().map_err(nf)?,
            t,
        })
    }

    /// Project onto the dealiased band, so that discrete `E` and `F` are
    /// exact invariants of the semi-discrete flow.
    pub fn project(&self, f: &Field<T>) -> Result<Field<T>> {
        let mut s = f.fft();
        crate::spectral::dealias_in_place(&mut s, &self.mask);
        s.ifft()
    }
}

/// Monitored quantities, one entry per record.
#[derive(Clone, Debug, Default)]
pub struct MonitorSeries<T: Real> {
    pub times: Vec<T>,
    pub energy: Vec<T>,
    pub momentum: Vec<Vec<T>>,
    pub h1: Vec<T>,
    /// `I = ‖(-Δ)^{-1/2}u‖²` with the zero mode dropped.
    pub i: Vec<T>,
    pub i1: Vec<T>,
    pub i2: Vec<T>,
    pub orbital_distance: Vec<Option<T>>,
    pub gap: Vec<T>,
    pub membership: Vec<Option<SetVerdict>>,
    /// `𝒦` and `S` when membership is monitored.
    pub k_value: Vec<Option<T>>,
    pub s_value: Vec<Option<T>>,
    /// `2‖v‖² - 2‖u‖²_{H¹} + 2‖u‖^{p+1}_{p+1}`, the zero-mean closed form of `I''`.
    pub i2_closed: Vec<T>,
}

impl<T: Real> MonitorSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn energy_drift(&self) -> T {
        let e0 = self.energy.first().copied().unwrap_or(T::zero());
        let scale = e0.abs().max(T::epsilon());
        self.energy.iter().fold(T::zero(), |m, &e| m.max((e - e0).abs() / scale))
    }

    /// Worst drift of each component of `F`, relative to `max(|F_j(0)|, |F(0)|)`.
    pub fn momentum_drift(&self) -> Vec<T> {
        let Some(f0) = self.momentum.first() else { return Vec::new() };
        let norm = f0.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        (0..f0.len())
            .map(|j| {
                let scale = f0[j].abs().max(norm).max(T::epsilon());
                self.momentum.iter().fold(T::zero(), |m, f| m.max((f[j] - f0[j]).abs() / scale))
            })
            .collect()
    }
}

/// What to record besides the conserved quantities and the virial chain.
#[derive(Clone, Debug, Default)]
pub struct Monitors<T: Real> {
    pub reference: Option<OrbitReference<T>>,
    /// `(α, β)` and `d(c)` for the `𝔎±` verdict.
    pub membership: Option<(KParams<T>, T)>,
}

#[derive(Clone, Debug)]
pub struct EvolveConfig<T: Real> {
    pub t_final: T,
    pub dt: T,
    pub monitor_every: usize,
    /// When set, `dt` is the largest step and each step uses
    /// `min(dt, stable_dt(cfl))`.
    pub adaptive_cfl: Option<T>,
    pub nonlinear: bool,
    /// Dealiasing band `q|k| <= N`; 3 is the 2/3 rule used by the solver.
    pub band: usize,
}

impl<T: Real> EvolveConfig<T> {
    pub fn new(t_final: T, dt: T) -> Self {
        EvolveConfig { t_final, dt, monitor_every: 10, adaptive_cfl: None, nonlinear: true, band: 3 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !(self.t_final >= T::zero()) || self.monitor_every == 0 || self.band < 2 {
            return Err(Error::InvalidParams("need dt > 0, T >= 0, monitor_every >= 1 and band >= 2".into()));
        }
        Ok(())
    }
}

/// Failure mid-run: the error and everything recorded before it.
#[derive(Debug)]
pub struct EvolutionFailure<T: Real> {
    pub error: Error,
    pub series: MonitorSeries<T>,
    pub last_state: EvolutionState<T>,
}

struct Recorder<T: Real> {
    funcs: Functionals<T>,
    k2: Symbol<T>,
    mask: Vec<bool>,
    p: T,
    monitors: Monitors<T>,
}

impl<T: Real> Recorder<T> {
    fn record(&self, s: &mut MonitorSeries<T>, x: &Pair<T>, t: T) -> Result<()> {
        let g = self.funcs.grid().clone();
        let us = Spectrum::new(g.clone(), x.0.clone())?;
        let vs = Spectrum::new(g.clone(), x.1.clone())?;
        let nf = |_| Error::NonFiniteState { t: t.to_f64_lossy() };
        let u = us.ifft().map_err(nf)?;
        let v = vs.ifft().map_err(nf)?;
        let k2 = self.k2.values();
        let l2 = us.norm2();
        let grad2 = us.weighted_dot(&us, |f| k2[f]);
        let v2 = vs.norm2();
        let p = self.p;
        let lp1 = crate::spectral::lp1_power(&u, p);
        let energy = T::lit(0.5) * (v2 + l2 + grad2) - lp1 / (p + T::one());
        let momentum = self.funcs.momentum(&u, &v, false)?;
        let inv = |f: usize| if k2[f] > T::zero() { T::one() / k2[f] } else { T::zero() };
        let i = us.weighted_dot(&us, inv);
        let i1 = T::lit(2.0) * us.weighted_dot(&vs, |f| inv(f).sqrt());
        // zero-mode corrections and the dealiased ⟨u, ΠN(u)⟩
        let vol = g.volume();
        let ubar = u.mean();
        let vbar = v.mean();
        let mut nh = crate::spectral::nonlinearity(&u, p).fft();
        crate::spectral::dealias_in_place(&mut nh, &self.mask);
        let u_pin = us.dot(&nh)?;
        let n_mean = nh.values()[0].re / T::from_usize_lossy(g.len());
        let two = T::lit(2.0);
        let i2 = two * (v2 - vol * vbar * vbar) - two * (l2 + grad2 - vol * ubar * ubar) + two * (u_pin - vol * ubar * n_mean);
        let i2_closed = two * v2 - two * (l2 + grad2) + two * lp1;
        let gap = i2 * i - (p - T::one()) / T::lit(4.0) * i1 * i1;
        let orb = match &self.monitors.reference {
            Some(r) => Some(r.fit_spec(&us, &vs)?.distance),
            None => None,
        };
        let (verdict, kv, sv) = match &self.monitors.membership {
            Some((kp, d)) => {
                let m = membership_with(&self.funcs, &u, &v, kp, *d)?;
                (Some(m.verdict), Some(m.k_value), Some(m.s_value))
            }
            None => (None, None, None),
        };
        s.times.push(t);
        s.energy.push(energy);
        s.momentum.push(momentum);
        s.h1.push((l2 + grad2).sqrt());
        s.i.push(i);
        s.i1.push(i1);
        s.i2.push(i2);
        s.orbital_distance.push(orb);
        s.gap.push(gap);
        s.membership.push(verdict);
        s.k_value.push(kv);
        s.s_value.push(sv);
        s.i2_closed.push(i2_closed);
        Ok(())
    }
}

/// Evolve to `t_final`, recording monitors every `monitor_every` steps and at
/// the end. The data are first projected onto the dealiasing band. `stop` sees the series after each record and may end the run early.
pub fn evolve_with<T: Real>(
    initial: &EvolutionState<T>,
    params: &WaveParams<T>,
    config: &EvolveConfig<T>,
    monitors: Monitors<T>,
    mut stop: impl FnMut(&MonitorSeries<T>) -> bool,
) -> std::result::Result<(EvolutionState<T>, MonitorSeries<T>), EvolutionFailure<T>> {
    let mut series = MonitorSeries::default();
    let fail = |error: Error, series: MonitorSeries<T>, last: EvolutionState<T>| EvolutionFailure {
        error,
        series,
        last_state: last,
    };
    if let Err(e) = config.validate() {
        return Err(fail(e, series, initial.clone()));
    }
    let grid = initial.u.grid().clone();
    let funcs = match Functionals::new(&grid, params) {
        Ok(f) => f,
        Err(e) => return Err(fail(e, series, initial.clone())),
    };
    let mut integ = Integrator::new(&grid, params.p()).with_band(config.band);
    if !config.nonlinear {
        integ = integ.linear_only();
    }
    let rec = Recorder { funcs, k2: Symbol::neg_laplacian(&grid), mask: band_mask(&grid, config.band), p: params.p(), monitors };
    // the flow lives on the kept band; projecting the data makes discrete E exact
    let band = band_mask(&grid, config.band);
    let project = |f: &Field<T>| -> Vec<Complex<T>> {
        f.fft().values().iter().zip(&band).map(|(&z, &m)| if m { z } else { Complex::new(T::zero(), T::zero()) }).collect()
    };
    let mut x: Pair<T> = (project(&initial.u), project(&initial.v));
    let mut t = initial.t;
    let t_end = initial.t + config.t_final;
    let to_state = |x: &Pair<T>, t: T| -> EvolutionState<T> {
        let mk = |v: &Vec<Complex<T>>| Spectrum::new(grid.clone(), v.clone()).and_then(|s| s.ifft());
        match (mk(&x.0), mk(&x.1)) {
            (Ok(u), Ok(v)) => EvolutionState { u, v, t },
            _ => initial.clone(),
        }
    };
    if let Err(e) = rec.record(&mut series, &x, t) {
        return Err(fail(e, series, initial.clone()));
    }
    if stop(&series) {
        return Ok((to_state(&x, t), series));
    }
    let fixed_steps = if config.adaptive_cfl.is_none() {
        let n = (config.t_final / config.dt - T::lit(1e-9)).ceil().max(T::zero());
        Some(n.to_usize().unwrap_or(0))
    } else {
        None
    };
    let fixed_dt = fixed_steps.map(|n| if n > 0 { config.t_final / T::from_usize_lossy(n) } else { T::zero() });
    let mut k = 0usize;
    loop {
        let remaining = t_end - t;
        let done = match fixed_steps {
            Some(n) => k >= n,
            None => remaining <= T::tol(1e-12, 8.0) * (T::one() + t_end.abs()),
        };
        if done {
            break;
        }
        let dt = match (fixed_dt, config.adaptive_cfl) {
            (Some(h), _) => h,
            (None, Some(cfl)) => {
                let u = to_state(&x, t).u;
                config.dt.min(integ.stable_dt(&u, cfl)).min(remaining)
            }
            (None, None) => unreachable!(),
        };
        match integ.step_spec(&x, t, dt) {
            Ok(y) => x = y,
            Err(e) => return Err(fail(e, series, to_state(&x, t))),
        }
        k += 1;
        t = match fixed_dt {
            Some(h) => initial.t + h * T::from_usize_lossy(k),
            None => t + dt,
        };
        let last = match fixed_steps {
            Some(n) => k == n,
            None => t_end - t <= T::tol(1e-12, 8.0) * (T::one() + t_end.abs()),
        };
        if k.is_multiple_of(config.monitor_every) || last {
            if let Err(e) = rec.record(&mut series, &x, t) {
                return Err(fail(e, series, to_state(&x, t)));
            }
            if stop(&series) {
                break;
            }
        }
    }
    Ok((to_state(&x, t), series))
}

pub fn evolve<T: Real>(
    initial: &EvolutionState<T>,
    params: &WaveParams<T>,
    config: &EvolveConfig<T>,
    monitors: Monitors<T>,
) -> std::result::Result<(EvolutionState<T>, MonitorSeries<T>), EvolutionFailure<T>> {
    evolve_with(initial, params, config, monitors, |_| false)
}

/// Smooth random field: uniform noise filtered by `exp(-|ξ|²/(2σ²))`, zero
/// mean, dealiased, scaled to unit `L²` norm.
pub fn smooth_random_field<T: Real>(grid: &Arc<Grid<T>>, seed: u64, sigma: T) -> Result<Field<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<T> = (0..grid.len()).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    let mut s = Field::new(grid.clone(), noise)?.fft();
    let k2 = Symbol::neg_laplacian(grid);
    let mask = dealias_mask(grid);
    let two_s2 = T::lit(2.0) * sigma * sigma;
    for (f, z) in s.values_mut().iter_mut().enumerate() {
        *z = if mask[f] && f != 0 { *z * (-k2.values()[f] / two_s2).exp() } else { Complex::new(T::zero(), T::zero()) };
    }
    let out = s.ifft()?;
    let norm = crate::spectral::l2_norm(&out);
    Ok(out.scale(T::one() / norm))
}
