//! The curve `d(ζ)` along a direction, its derivatives, the convexity test,
//! and membership in the invariant sets `𝔎±`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functionals::{Functionals, KParams, WaveParams};
use crate::groundstate::{continuation, GroundStateResult, SolveConfig};
use crate::scalar::Real;
use crate::spectral::{make_grid, Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    StableCandidate,
    UnstableCandidate,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::StableCandidate => "stable_candidate",
            Classification::UnstableCandidate => "unstable_candidate",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

/// One point of the curve, computed from a converged profile.
#[derive(Clone, Debug)]
pub struct CurvePoint<T: Real> {
    pub zeta: T,
    pub d: T,
    /// `‖L_ŝ^{1/2}φ_ζ‖²` for the unit direction, so that `d' = -ζ·lhalf_norm2`.
    pub lhalf_norm2: T,
    /// Largest relative spread among `J-K`, `(p-1)K/2`, the Rayleigh form and `(p-1)(B+G)/(2(p+1))`.
    pub chain_mismatch: T,
    /// Relative gap of `(p-1)B/(n+2-p(n-2))`, which holds only up to box effects.
    pub bform_mismatch: T,
}

#[derive(Clone, Debug)]
pub struct DCurve<T: Real> {
    pub s_hat: Vec<T>,
    pub p: T,
    pub points: Vec<CurvePoint<T>>,
    pub d1_fd: Vec<Option<T>>,
    pub d2_fd: Vec<Option<T>>,
    pub classification: Vec<Classification>,
}

impl<T: Real> DCurve<T> {
    pub fn zetas(&self) -> Vec<T> {
        self.points.iter().map(|q| q.zeta).collect()
    }

    pub fn d(&self) -> Vec<T> {
        self.points.iter().map(|q| q.d).collect()
    }

    pub fn d1_formula(&self) -> Vec<T> {
        self.points.iter().map(|q| -q.zeta * q.lhalf_norm2).collect()
    }

    /// Indices `k` with `d[k+1] >= d[k]`.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        self.points.windows(2).enumerate().filter(|(_, w)| !(w[1].d < w[0].d)).map(|(k, _)| k).collect()
    }

    /// Worst value of `((1-ζ²)^{(p+1)/(p-1)} d(0) - d(ζ)) / d(0)`; the bound
    /// holds within slack `s` when this is at most `s`. `None` without a `ζ=0` point.
    pub fn lower_bound_excess(&self) -> Option<T> {
        let first = self.points.first()?;
        if first.zeta != T::zero() {
            return None;
        }
        let d0 = first.d;
        let e = (self.p + T::one()) / (self.p - T::one());
        self.points
            .iter()
            .map(|q| ((T::one() - q.zeta * q.zeta).powf(e) * d0 - q.d) / d0)
            .fold(None, |acc: Option<T>, x| Some(acc.map_or(x, |a| a.max(x))))
    }

    /// Whether every central difference lies between its one-sided neighbours.
    pub fn fd_bracket_holds(&self) -> bool {
        let (z, d) = (self.zetas(), self.d());
        (1..z.len().saturating_sub(1)).all(|k| {
            let left = (d[k] - d[k - 1]) / (z[k] - z[k - 1]);
            let right = (d[k + 1] - d[k]) / (z[k + 1] - z[k]);
            match self.d1_fd[k] {
                Some(c) => {
                    let slack = T::lit(1e-12) * (left.abs() + right.abs());
                    c >= left.min(right) - slack && c <= left.max(right) + slack
                }
                None => true,
            }
        })
    }
}

/// Curve traced up to a failure, together with the error.
#[derive(Debug)]
pub struct DCurveFailure<T: Real> {
    pub error: Error,
    pub partial: DCurve<T>,
}

/// Grid for a curve reaching `zeta_max`: widths and sizes grow once by
/// `sqrt((1-0.8²)/(1-ζ_max²))` when `ζ_max > 0.8`, keeping the spacing.
pub fn dcurve_grid<T: Real>(base: &Arc<Grid<T>>, zeta_max: T) -> Result<Arc<Grid<T>>> {
    let ref_zeta = T::lit(0.8);
    if zeta_max <= ref_zeta {
        return Ok(base.clone());
    }
    if zeta_max >= T::one() {
        return Err(Error::InvalidParams("zeta_max must be below 1".into()));
    }
    let f = ((T::one() - ref_zeta * ref_zeta) / (T::one() - zeta_max * zeta_max)).sqrt();
    let sizes: Vec<usize> = base
        .sizes()
        .iter()
        .map(|&m| {
            let target = (T::from_usize_lossy(m) * f).ceil().to_usize().unwrap_or(m);
            target + target % 2
        })
        .collect();
    let widths: Vec<T> = base
        .sizes()
        .iter()
        .zip(&sizes)
        .zip(base.half_widths())
        .map(|((&m, &s), &l)| l * T::from_usize_lossy(s) / T::from_usize_lossy(m))
        .collect();
    make_grid(base.n(), &sizes, &widths)
}

fn curve_point<T: Real>(r: &GroundStateResult<T>, s_hat: &[T], zeta: T) -> Result<CurvePoint<T>> {
    let p = r.params.p();
    let n = r.params.n();
    let one = T::one();
    let two = T::lit(2.0);
    let i = &r.integrals;
    // lform is quadratic in c, so evaluate at ŝ/2 and rescale
    let half_dir: Vec<T> = s_hat.iter().map(|&x| x / two).collect();
    let unit = r.params.with_speed(half_dir)?;
    let lhalf_norm2 = Functionals::new(r.phi.grid(), &unit)?.lhalf_norm2(&r.phi)? * T::lit(4.0);

    let k = i.k(p);
    let d = i.j() - k;
    let forms = [
        d,
        (p - one) / two * k,
        (p - one) / two * (two * r.report.m_rayleigh / (p + one)).powf((p + one) / (p - one)),
        (p - one) / (two * (p + one)) * (i.b() + i.grad2),
    ];
    let hi = forms.iter().cloned().fold(T::neg_infinity(), T::max);
    let lo = forms.iter().cloned().fold(T::infinity(), T::min);
    let chain_mismatch = (hi - lo) / d.abs().max(T::epsilon());
    let nn = T::from_usize_lossy(n);
    let bform = (p - one) / (nn + two - p * (nn - two)) * i.b();
    let bform_mismatch = (bform - d).abs() / d.abs().max(T::epsilon());
    Ok(CurvePoint { zeta, d, lhalf_norm2, chain_mismatch, bform_mismatch })
}

/// Three-point first and second differences on a possibly uneven grid.
fn stencil<T: Real>(z: &[T], d: &[T], k: usize, stride: usize) -> Option<(T, T)> {
    if k < stride || k + stride >= z.len() {
        return None;
    }
    let (a, b) = (k - stride, k + stride);
    let h1 = z[k] - z[a];
    let h2 = z[b] - z[k];
    let two = T::lit(2.0);
    let d1 = -h2 / (h1 * (h1 + h2)) * d[a] + (h2 - h1) / (h1 * h2) * d[k] + h1 / (h2 * (h1 + h2)) * d[b];
    let d2 = two * (d[a] / (h1 * (h1 + h2)) - d[k] / (h1 * h2) + d[b] / (h2 * (h1 + h2)));
    Some((d1, d2))
}

pub fn first_differences<T: Real>(z: &[T], d: &[T]) -> Vec<Option<T>> {
    (0..z.len()).map(|k| stencil(z, d, k, 1).map(|s| s.0)).collect()
}

pub fn second_differences<T: Real>(z: &[T], d: &[T]) -> Vec<Option<T>> {
    (0..z.len()).map(|k| stencil(z, d, k, 1).map(|s| s.1)).collect()
}

/// Sign of `d''` with an error band of twice the Richardson estimate
/// `|D_h - D_{2h}|/3`. Points without a stride-2 stencil borrow the band of
/// the nearest point that has one.
pub fn classify_stability<T: Real>(z: &[T], d: &[T]) -> Vec<Classification> {
    let m = z.len();
    let fine: Vec<Option<T>> = second_differences(z, d);
    let err: Vec<Option<T>> = (0..m)
        .map(|k| match (fine[k], stencil(z, d, k, 2)) {
            (Some(a), Some((_, b))) => Some((a - b).abs() / T::lit(3.0)),
            _ => None,
        })
        .collect();
    (0..m)
        .map(|k| {
            let Some(d2) = fine[k] else { return Classification::Inconclusive };
            let band = (0..m)
                .filter(|&j| err[j].is_some())
                .min_by_key(|&j| j.abs_diff(k))
                .and_then(|j| err[j])
                .map(|e| T::lit(2.0) * e);
            match band {
                None => Classification::Inconclusive,
                Some(b) if d2.abs() <= b => Classification::Inconclusive,
                Some(_) if d2 > T::zero() => Classification::StableCandidate,
                Some(_) => Classification::UnstableCandidate,
            }
        })
        .collect()
}

/// Relative mismatch of the central difference against `-ζ‖L_ŝ^{1/2}φ‖²` at
/// interior points; points where both sides vanish report 0.
pub fn dprime_check<T: Real>(curve: &DCurve<T>) -> Vec<Option<T>> {
    let formula = curve.d1_formula();
    curve
        .d1_fd
        .iter()
        .zip(&formula)
        .map(|(fd, &f)| {
            fd.map(|x| {
                let scale = x.abs().max(f.abs());
                if scale == T::zero() {
                    T::zero()
                } else {
                    (x - f).abs() / scale
                }
            })
        })
        .collect()
}

fn assemble<T: Real>(s_hat: Vec<T>, p: T, points: Vec<CurvePoint<T>>) -> DCurve<T> {
    let z: Vec<T> = points.iter().map(|q| q.zeta).collect();
    let d: Vec<T> = points.iter().map(|q| q.d).collect();
    DCurve {
        d1_fd: first_differences(&z, &d),
        d2_fd: second_differences(&z, &d),
        classification: classify_stability(&z, &d),
        s_hat,
        p,
        points,
    }
}

/// Trace `d(ζ ŝ)` over an increasing grid of speeds by continuation.
pub fn trace_dcurve<T: Real>(
    s_hat: &[T],
    zetas: &[T],
    base: &WaveParams<T>,
    grid: &Arc<Grid<T>>,
    config: &SolveConfig<T>,
) -> std::result::Result<DCurve<T>, DCurveFailure<T>> {
    let empty = |e: Error| DCurveFailure { error: e, partial: assemble(s_hat.to_vec(), base.p(), Vec::new()) };
    let norm = s_hat.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
    if s_hat.len() != base.n() || (norm - T::one()).abs() > T::tol(1e-12, 8.0) {
        return Err(empty(Error::InvalidParams("direction must be a unit vector of the right dimension".into())));
    }
    if zetas.is_empty() || zetas.windows(2).any(|w| !(w[1] > w[0])) || zetas[0] < T::zero() || zetas[zetas.len() - 1] >= T::one() {
        return Err(empty(Error::InvalidParams("zeta grid must increase within [0, 1)".into())));
    }
    let path: Vec<Vec<T>> = zetas.iter().map(|&z| s_hat.iter().map(|&s| s * z).collect()).collect();
    let (results, error) = match continuation(&path, base, grid, config) {
        Ok(r) => (r, None),
        Err(f) => (f.partial, Some(f.error)),
    };
    let mut points = Vec::with_capacity(results.len());
    for (r, &z) in results.iter().zip(zetas) {
        match curve_point(r, s_hat, z) {
            Ok(q) => points.push(q),
            Err(e) => {
                return Err(DCurveFailure { error: e, partial: assemble(s_hat.to_vec(), base.p(), points) });
            }
        }
    }
    let curve = assemble(s_hat.to_vec(), base.p(), points);
    match error {
        None => Ok(curve),
        Some(error) => Err(DCurveFailure { error, partial: curve }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetVerdict {
    KPlus,
    KMinus,
    Neither,
}

impl SetVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            SetVerdict::KPlus => "K_plus",
            SetVerdict::KMinus => "K_minus",
            SetVerdict::Neither => "neither",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SetMembership<T: Real> {
    pub s_value: T,
    pub d_value: T,
    pub k_value: T,
    pub verdict: SetVerdict,
}

pub fn membership_with<T: Real>(
    funcs: &Functionals<T>,
    u: &Field<T>,
    v: &Field<T>,
    kparams: &KParams<T>,
    d_value: T,
) -> Result<SetMembership<T>> {
    let s_value = funcs.action_pair(u, v)?;
    let k_value = funcs.kfunctional_pair(u, v, kparams)?;
    let verdict = if s_value < d_value && k_value < T::zero() {
        SetVerdict::KMinus
    } else if s_value < d_value && k_value > T::zero() {
        SetVerdict::KPlus
    } else {
        SetVerdict::Neither
    };
    Ok(SetMembership { s_value, d_value, k_value, verdict })
}

pub fn membership<T: Real>(
    u: &Field<T>,
    v: &Field<T>,
    params: &WaveParams<T>,
    kparams: &KParams<T>,
    d_value: T,
) -> Result<SetMembership<T>> {
    membership_with(&Functionals::new(u.grid(), params)?, u, v, kparams, d_value)
}

/// Upper bound `-((p+1)α - nβ)(d - S(u₀,v₀))` that `𝒦` obeys along flows from `𝔎⁻`.
pub fn kminus_bound<T: Real>(kparams: &KParams<T>, p: T, n: usize, d_value: T, s0: T) -> T {
    -(kparams.alpha * (p + T::one()) - kparams.beta * T::from_usize_lossy(n)) * (d_value - s0)
}
