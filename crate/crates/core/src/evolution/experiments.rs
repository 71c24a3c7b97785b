//! Perturbed-wave and dilated-wave experiments.

use std::sync::Arc;

use super::{evolve_with, smooth_random_field, EvolutionState, EvolveConfig, MonitorSeries, Monitors, OrbitReference};
use crate::error::{Error, Result};
use crate::functionals::{Functionals, KParams};
use crate::groundstate::GroundStateResult;
use crate::scalar::Real;
use crate::spectral::{Field, Grid, Symbol};
use crate::stability::{kminus_bound, SetVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    StableRun,
    Escape,
    BlowupFlag,
    /// The run produced a non-finite state before any flag.
    NonFinite,
}

impl OutcomeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::StableRun => "stable_run",
            OutcomeKind::Escape => "escape",
            OutcomeKind::BlowupFlag => "blowup_flag",
            OutcomeKind::NonFinite => "non_finite",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome<T: Real> {
    pub kind: OutcomeKind,
    pub t_event: Option<T>,
    /// Monitor records before the event whose `𝔎±` verdict differs from the expected set.
    pub membership_breaks: usize,
    /// Records violating the quantitative `𝔎⁻` bound on `𝒦`.
    pub bound_breaks: usize,
    pub details: String,
}

/// Unit perturbation `(g, h)` with `‖g‖²_{H¹} + ‖h‖² = 1`, seeded.
pub fn perturbation_pair<T: Real>(grid: &Arc<Grid<T>>, seed: u64) -> Result<(Field<T>, Field<T>)> {
    let sigma = T::lit(2.0);
    let g = smooth_random_field(grid, seed, sigma)?;
    let h = smooth_random_field(grid, seed.wrapping_add(0x9e37_79b9_7f4a_7c15), sigma)?;
    let w = Symbol::one_minus_laplacian(grid);
    let norm = (crate::spectral::quadratic_form(&g.fft(), &w)? + crate::spectral::l2_norm2(&h)).sqrt();
    Ok((g.scale(T::one() / norm), h.scale(T::one() / norm)))
}

/// Evolve `(φ, -Aφ) + ε(g, h)` and report an escape as soon as the orbital
/// distance exceeds `10ε`.
pub fn stability_experiment<T: Real>(
    ground: &GroundStateResult<T>,
    eps: T,
    config: &EvolveConfig<T>,
    seed: u64,
) -> Result<(ExperimentOutcome<T>, MonitorSeries<T>)> {
    let (phi, psi) = ground.traveling_pair()?;
    let (g, h) = perturbation_pair(phi.grid(), seed)?;
    let initial = EvolutionState { u: phi.axpy(eps, &g)?, v: psi.axpy(eps, &h)?, t: T::zero() };
    let monitors = Monitors { reference: Some(OrbitReference::from_pair(&phi, &psi)), membership: None };
    let limit = T::lit(10.0) * eps;
    let escaped = |s: &MonitorSeries<T>| s.orbital_distance.last().copied().flatten().is_some_and(|d| d > limit);
    let (_, series) = evolve_with(&initial, &ground.params, config, monitors, escaped).map_err(|f| f.error)?;
    let worst = series.orbital_distance.iter().flatten().fold(T::zero(), |a, &b| a.max(b));
    let outcome = if escaped(&series) {
        let t = *series.times.last().unwrap();
        ExperimentOutcome {
            kind: OutcomeKind::Escape,
            t_event: Some(t),
            membership_breaks: 0,
            bound_breaks: 0,
            details: format!("orbital distance {:e} exceeded {:e} at t = {}", worst, limit, t),
        }
    } else {
        ExperimentOutcome {
            kind: OutcomeKind::StableRun,
            t_event: None,
            membership_breaks: 0,
            bound_breaks: 0,
            details: format!("max orbital distance {:e} (limit {:e})", worst, limit),
        }
    };
    Ok((outcome, series))
}

/// Thresholds of the blow-up flag.
#[derive(Clone, Copy, Debug)]
pub struct BlowupCriteria<T: Real> {
    /// `‖u‖_{H¹}` must exceed this multiple of its initial value.
    pub h1_factor: T,
    /// Number of trailing records over which `I''` must be positive and increasing
    /// and the concavity gap nonnegative.
    pub window: usize,
    /// Relative slack for the concavity gap, scaled by `|I''| I`.
    pub gap_tol: T,
}

impl<T: Real> Default for BlowupCriteria<T> {
    fn default() -> Self {
        BlowupCriteria { h1_factor: T::lit(10.0), window: 4, gap_tol: T::lit(1e-8) }
    }
}

impl<T: Real> BlowupCriteria<T> {
    pub fn flagged(&self, s: &MonitorSeries<T>) -> bool {
        let m = s.len();
        if m < self.window.max(2) || s.h1[m - 1] <= self.h1_factor * s.h1[0] {
            return false;
        }
        let lo = m - self.window.max(2);
        let accelerating = (lo..m).all(|k| s.i2[k] > T::zero()) && (lo + 1..m).all(|k| s.i2[k] > s.i2[k - 1]);
        let gap_ok = (lo..m).all(|k| s.gap[k] >= -self.gap_tol * (s.i2[k].abs() * s.i[k]));
        accelerating && gap_ok
    }
}

/// Evolve `λ(φ, -Aφ)` with adaptive steps until the blow-up flag, a
/// non-finite state, or `t_final`.
pub fn strong_instability_experiment<T: Real>(
    ground: &GroundStateResult<T>,
    lambda: T,
    config: &EvolveConfig<T>,
    criteria: &BlowupCriteria<T>,
) -> Result<(ExperimentOutcome<T>, MonitorSeries<T>)> {
    let params = &ground.params;
    let p = params.p();
    let c2 = params.speed() * params.speed();
    if !(c2 < (p - T::one()) / (p + T::lit(3.0))) {
        return Err(Error::Precondition(format!("|c|^2 = {} is not below (p-1)/(p+3)", c2)));
    }
    if lambda < T::one() {
        return Err(Error::Precondition("lambda must be at least 1".into()));
    }
    let (phi, psi) = ground.traveling_pair()?;
    let initial = EvolutionState { u: phi.scale(lambda), v: psi.scale(lambda), t: T::zero() };
    let kp = KParams::nehari();
    let d = ground.pair_action()?;
    let funcs = Functionals::new(phi.grid(), params)?;
    let expected = if lambda > T::one() { SetVerdict::KMinus } else { SetVerdict::Neither };
    let start = crate::stability::membership_with(&funcs, &initial.u, &initial.v, &kp, d)?;
    if lambda > T::one() && start.verdict != SetVerdict::KMinus {
        return Err(Error::Precondition(format!("initial data not in K_minus (S = {}, K = {})", start.s_value, start.k_value)));
    }
    let bound = kminus_bound(&kp, p, params.n(), d, start.s_value);
    let slack = T::lit(1e-4) * d.abs();
    let monitors = Monitors { reference: None, membership: Some((kp, d)) };
    let result = evolve_with(&initial, params, config, monitors, |s| criteria.flagged(s));
    let (series, nonfinite) = match result {
        Ok((_, s)) => (s, None),
        Err(f) => match f.error {
            Error::NonFiniteState { t } => (f.series, Some(t)),
            e => return Err(e),
        },
    };
    let membership_breaks = series.membership.iter().filter(|v| **v != Some(expected)).count();
    let bound_breaks = if lambda > T::one() {
        series.k_value.iter().flatten().filter(|&&k| !(k < bound + slack)).count()
    } else {
        0
    };
    let t_last = series.times.last().copied();
    let h1_ratio = series.h1.last().copied().unwrap_or(T::zero()) / series.h1.first().copied().unwrap_or(T::one());
    let outcome = if criteria.flagged(&series) {
        ExperimentOutcome {
            kind: OutcomeKind::BlowupFlag,
            t_event: t_last,
            membership_breaks,
            bound_breaks,
            details: format!("H1 grew by {:.3} with accelerating I''", h1_ratio),
        }
    } else if let Some(t) = nonfinite {
        ExperimentOutcome {
            kind: OutcomeKind::NonFinite,
            t_event: Some(T::lit(t)),
            membership_breaks,
            bound_breaks,
            details: format!("non-finite state before the flag; H1 ratio {:.3}", h1_ratio),
        }
    } else {
        ExperimentOutcome {
            kind: OutcomeKind::StableRun,
            t_event: None,
            membership_breaks,
            bound_breaks,
            details: format!("no flag up to t = {}; H1 ratio {:.3}", t_last.unwrap_or(T::zero()), h1_ratio),
        }
    };
    Ok((outcome, series))
}
