//! Action, energy, momentum, Nehari/Pohozaev functionals, the linearized
//! quadratic form and the closed-form stability thresholds.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{rel_diff, Real};
use crate::spectral::{
    apply_symbol, grad_norm2_spec, quadratic_form, same_grid_pub as same_grid, symbol_lhalf, symbol_p, Field, Grid,
    Spectrum, Symbol, ZeroModeRule,
};

/// `2* - 1`, the upper end of admissible exponents (infinite for `n <= 2`).
pub fn critical_exponent(n: usize) -> f64 {
    if n <= 2 {
        f64::INFINITY
    } else {
        (n as f64 + 2.0) / (n as f64 - 2.0)
    }
}

/// Wave speed vector, exponent and zero-mode convention.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveParams<T: Real> {
    c: Vec<T>,
    p: T,
    zero_mode: ZeroModeRule,
}

impl<T: Real> WaveParams<T> {
    pub fn new(c: Vec<T>, p: T) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(Error::InvalidParams("empty speed vector".into()));
        }
        let speed2 = c.iter().fold(T::zero(), |a, &x| a + x * x);
        if !(speed2 < T::one()) {
            return Err(Error::InvalidParams(format!("|c|^2 = {} must be below 1", speed2)));
        }
        if !(p > T::one()) || !(p.to_f64_lossy() < critical_exponent(n)) {
            return Err(Error::InvalidParams(format!("p = {} outside (1, {})", p, critical_exponent(n))));
        }
        Ok(WaveParams { c, p, zero_mode: ZeroModeRule::default_for(n) })
    }

    pub fn with_zero_mode(mut self, rule: ZeroModeRule) -> Self {
        self.zero_mode = rule;
        self
    }

    /// Same exponent and convention at another speed.
    pub fn with_speed(&self, c: Vec<T>) -> Result<Self> {
        Ok(WaveParams::new(c, self.p)?.with_zero_mode(self.zero_mode))
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn zero_mode(&self) -> ZeroModeRule {
        self.zero_mode
    }

    pub fn speed(&self) -> T {
        self.c.iter().fold(T::zero(), |a, &x| a + x * x).sqrt()
    }
}

/// Weights `(α, β)` of the Pohozaev-type functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KParams<T: Real> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> KParams<T> {
    pub fn new(alpha: T, beta: T, p: T, n: usize) -> Result<Self> {
        let nn = T::from_usize_lossy(n);
        let two = T::lit(2.0);
        if !(alpha * (p - T::one()) >= two * beta) {
            return Err(Error::InvalidKParams(format!("alpha(p-1) >= 2 beta fails for ({}, {})", alpha, beta)));
        }
        let tight = two * alpha == beta * nn && beta > T::zero();
        let loose = two * alpha > beta * nn && beta >= T::zero();
        if !(tight || loose) {
            return Err(Error::InvalidKParams(format!("({}, {}) violates the sign conditions", alpha, beta)));
        }
        Ok(KParams { alpha, beta })
    }

    /// `(1, 0)`, for which the functional is the Nehari functional.
    pub fn nehari() -> Self {
        KParams { alpha: T::one(), beta: T::zero() }
    }
}

/// All scalar functionals of a pair `(u, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalReport<T: Real> {
    pub j: T,
    pub k: T,
    pub n: T,
    pub p_nehari: T,
    pub q: T,
    pub s: T,
    pub e: T,
    pub f: Vec<T>,
    pub m_rayleigh: T,
}

/// Quadratic integrals of one field, the building blocks of every functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integrals<T: Real> {
    /// `‖u‖^2`
    pub l2: T,
    /// `‖∇u‖^2`
    pub grad2: T,
    /// `‖L_c^{1/2} u‖^2` as the quadratic form of `-P` (zero-mode rule included).
    pub lform: T,
    /// `∫ |u|^{p+1}`
    pub lp1: T,
}

impl<T: Real> Integrals<T> {
    /// `‖u‖^2 - ‖L_c^{1/2}u‖^2`
    pub fn b(&self) -> T {
        self.l2 - self.lform
    }

    pub fn j(&self) -> T {
        T::lit(0.5) * (self.b() + self.grad2)
    }

    pub fn k(&self, p: T) -> T {
        self.lp1 / (p + T::one())
    }
}

/// Functionals bound to one grid and parameter set, with symbols built once.
#[derive(Clone, Debug)]
pub struct Functionals<T: Real> {
    grid: Arc<Grid<T>>,
    params: WaveParams<T>,
    neg_p: Symbol<T>,
    lhalf: Symbol<T>,
    riesz: Vec<Symbol<T>>,
    zero_defect: Symbol<T>,
}

impl<T: Real> Functionals<T> {
    pub fn new(grid: &Arc<Grid<T>>, params: &WaveParams<T>) -> Result<Self> {
        if grid.n() != params.n() {
            return Err(Error::InvalidParams(format!(
                "speed has {} components on a {}-dimensional grid",
                params.n(),
                grid.n()
            )));
        }
        let p = symbol_p(grid, params.c(), params.zero_mode());
        let neg_p = p.map(|x| -x);
        let lhalf = symbol_lhalf(grid, params.c());
        // Zero except where `|A|^2` misses part of `-P` (the zero mode).
        let zero_defect = neg_p.zip_even(&lhalf, |np, a| np - a * a)?;
        let riesz = (0..grid.n()).map(|a| Symbol::riesz_derivative(grid, a)).collect();
        Ok(Functionals { grid: grid.clone(), params: params.clone(), neg_p, lhalf, riesz, zero_defect })
    }

    pub fn params(&self) -> &WaveParams<T> {
        &self.params
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    /// The skew square root of `L_c`.
    pub fn lhalf_symbol(&self) -> &Symbol<T> {
        &self.lhalf
    }

    fn check(&self, u: &Field<T>) -> Result<()> {
        same_grid(&self.grid, u.grid())
    }

    pub fn integrals(&self, u: &Field<T>) -> Result<Integrals<T>> {
        self.check(u)?;
        let s = u.fft();
        self.integrals_spec(u, &s)
    }

    pub(crate) fn integrals_spec(&self, u: &Field<T>, s: &Spectrum<T>) -> Result<Integrals<T>> {
        Ok(Integrals {
            l2: crate::spectral::l2_norm2(u),
            grad2: grad_norm2_spec(s),
            lform: quadratic_form(s, &self.neg_p)?,
            lp1: crate::spectral::lp1_power(u, self.params.p),
        })
    }

    pub fn j(&self, u: &Field<T>) -> Result<T> {
        Ok(self.integrals(u)?.j())
    }

    pub fn k(&self, u: &Field<T>) -> Result<T> {
        self.check(u)?;
        Ok(crate::spectral::lp1_power(u, self.params.p) / (self.params.p + T::one()))
    }

    /// `𝒩 = J - K`
    pub fn action(&self, u: &Field<T>) -> Result<T> {
        let i = self.integrals(u)?;
        Ok(i.j() - i.k(self.params.p))
    }

    /// `𝒫 = 2J - (p+1)K`
    pub fn nehari(&self, u: &Field<T>) -> Result<T> {
        self.kfunctional(u, &KParams::nehari())
    }

    /// `J / K^{2/(p+1)}`, invariant under scaling of `u`.
    pub fn m_rayleigh(&self, u: &Field<T>) -> Result<T> {
        let i = self.integrals(u)?;
        let p = self.params.p;
        Ok(i.j() / i.k(p).powf(T::lit(2.0) / (p + T::one())))
    }

    /// `‖L_c^{1/2}u‖^2` through the symbol `-P` (includes the zero-mode rule).
    pub fn lhalf_norm2(&self, u: &Field<T>) -> Result<T> {
        Ok(self.integrals(u)?.lform)
    }

    /// `‖A u‖^2` for the lattice skew operator `A`; equals `lhalf_norm2`
    /// except for the zero-mode contribution under the angular-mean rule.
    pub fn lhalf_skew_norm2(&self, u: &Field<T>) -> Result<T> {
        self.check(u)?;
        let mut s = u.fft();
        apply_symbol(&mut s, &self.lhalf)?;
        Ok(s.norm2())
    }

    pub fn apply_lhalf(&self, u: &Field<T>) -> Result<Field<T>> {
        crate::spectral::apply_multiplier(u, &self.lhalf)
    }

    /// Partner `-A u` that makes `(u, -A u)` a wave moving with velocity `c`.
    pub fn traveling_partner(&self, u: &Field<T>) -> Result<Field<T>> {
        Ok(self.apply_lhalf(u)?.scale(-T::one()))
    }

    pub fn energy(&self, u: &Field<T>, v: &Field<T>) -> Result<T> {
        same_grid(u.grid(), v.grid())?;
        let i = self.integrals(u)?;
        let half = T::lit(0.5);
        Ok(half * (crate::spectral::l2_norm2(v) + i.l2 + i.grad2) - i.k(self.params.p))
    }

    /// `F_j = ∫ v ∂_j (-Δ)^{-1/2} u`
    pub fn momentum(&self, u: &Field<T>, v: &Field<T>, strict: bool) -> Result<Vec<T>> {
        self.check(u)?;
        same_grid(u.grid(), v.grid())?;
        if strict {
            crate::spectral::check_zero_mean(u)?;
        }
        let (su, sv) = (u.fft(), v.fft());
        self.riesz
            .iter()
            .map(|r| {
                let mut t = su.clone();
                apply_symbol(&mut t, r)?;
                sv.dot(&t)
            })
            .collect()
    }

    /// `q = ½‖A u + v‖^2`
    pub fn q(&self, u: &Field<T>, v: &Field<T>) -> Result<T> {
        self.check(u)?;
        same_grid(u.grid(), v.grid())?;
        let mut s = u.fft();
        apply_symbol(&mut s, &self.lhalf)?;
        let w = s.axpy(T::one(), &v.fft())?;
        Ok(T::lit(0.5) * w.norm2())
    }

    /// `S = E + c·F`, checked against `𝒩(u) + q(u, v)`. The two differ only by
    /// the zero-mode term of `L_c` that the skew operator cannot carry.
    pub fn action_pair(&self, u: &Field<T>, v: &Field<T>) -> Result<T> {
        Ok(self.report(u, v)?.s)
    }

    pub fn report(&self, u: &Field<T>, v: &Field<T>) -> Result<FunctionalReport<T>> {
        self.check(u)?;
        same_grid(u.grid(), v.grid())?;
        let su = u.fft();
        let i = self.integrals_spec(u, &su)?;
        let p = self.params.p;
        let half = T::lit(0.5);
        let v2 = crate::spectral::l2_norm2(v);
        let (j, k) = (i.j(), i.k(p));
        let e = half * (v2 + i.l2 + i.grad2) - k;
        let f = self.momentum(u, v, false)?;
        let cf = f.iter().zip(self.params.c()).fold(T::zero(), |a, (&x, &c)| a + x * c);
        let q = self.q(u, v)?;
        let defect = half * quadratic_form(&su, &self.zero_defect)?;
        let s = e + cf;
        let rhs = (j - k) + q + defect;
        let scale = s.abs().max(rhs.abs()).max(half * (v2 + i.l2 + i.grad2) + k).max(T::epsilon());
        let mismatch = (s - rhs).abs() / scale;
        if mismatch > T::tol(1e-10, 4096.0) {
            return Err(Error::IdentityViolation { what: "S = E + c.F = N + q", mismatch: mismatch.to_f64_lossy() });
        }
        let m_rayleigh = j / k.powf(T::lit(2.0) / (p + T::one()));
        Ok(FunctionalReport {
            j,
            k,
            n: j - k,
            p_nehari: (i.b() + i.grad2) - (p + T::one()) * k,
            q,
            s,
            e,
            f,
            m_rayleigh,
        })
    }

    fn kcoeffs(&self, kp: &KParams<T>) -> (T, T, T) {
        let two = T::lit(2.0);
        let n = T::from_usize_lossy(self.params.n());
        let p = self.params.p;
        (
            (two * kp.alpha - kp.beta * n) / two,
            (two * kp.alpha - kp.beta * (n - two)) / two,
            kp.alpha * (p + T::one()) - kp.beta * n,
        )
    }

    /// `𝒦_{α,β}(u)`; with `(1, 0)` this is the Nehari functional.
    pub fn kfunctional(&self, u: &Field<T>, kp: &KParams<T>) -> Result<T> {
        let i = self.integrals(u)?;
        Ok(self.kfunctional_from(&i, kp))
    }

    pub fn kfunctional_from(&self, i: &Integrals<T>, kp: &KParams<T>) -> T {
        let (a, b, c) = self.kcoeffs(kp);
        (a * i.b() + b * i.grad2) - c * i.k(self.params.p)
    }

    /// Pair version: adds `(2α - βn)/2 · ‖A u + v‖^2`.
    pub fn kfunctional_pair(&self, u: &Field<T>, v: &Field<T>, kp: &KParams<T>) -> Result<T> {
        let (a, _, _) = self.kcoeffs(kp);
        Ok(self.kfunctional(u, kp)? + a * T::lit(2.0) * self.q(u, v)?)
    }

    pub fn pohozaev(&self, u: &Field<T>) -> Result<[T; 3]> {
        Ok(pohozaev_residuals_from(&self.integrals(u)?, self.params.p, self.params.n()))
    }

    /// `⟨ℒ w, w⟩ = 2J(w1) - p ∫|φ|^{p-1} w1^2 + 2 q(w1, w2)`.
    pub fn linearized_form(&self, phi: &Field<T>, w1: &Field<T>, w2: &Field<T>) -> Result<T> {
        same_grid(phi.grid(), w1.grid())?;
        let p = self.params.p;
        let pot: T = phi
            .values()
            .iter()
            .zip(w1.values())
            .map(|(&f, &w)| f.abs().powf(p - T::one()) * w * w)
            .sum::<T>()
            * self.grid.cell_volume();
        Ok(T::lit(2.0) * self.j(w1)? - p * pot + T::lit(2.0) * self.q(w1, w2)?)
    }

    /// Closed form `(1-p)‖φ‖_{p+1}^{p+1} + 4‖Aφ‖^2` and the quadratic form at
    /// `Φ = (φ, Aφ)`; they must agree to `1e-6`.
    pub fn instability_certificate(&self, phi: &Field<T>) -> Result<Certificate<T>> {
        let p = self.params.p;
        let lp1 = crate::spectral::lp1_power(phi, p);
        let a2 = self.lhalf_skew_norm2(phi)?;
        let closed = (T::one() - p) * lp1 + T::lit(4.0) * a2;
        let aphi = self.apply_lhalf(phi)?;
        let quadratic = self.linearized_form(phi, phi, &aphi)?;
        let scale = closed.abs().max(quadratic.abs()).max(lp1).max(T::epsilon());
        let mismatch = (closed - quadratic).abs() / scale;
        if mismatch > T::lit(1e-6) {
            return Err(Error::CrossCheckMismatch { what: "instability certificate", mismatch: mismatch.to_f64_lossy() });
        }
        Ok(Certificate { closed_form: closed, quadratic_form: quadratic })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate<T: Real> {
    pub closed_form: T,
    pub quadratic_form: T,
}

impl<T: Real> Certificate<T> {
    /// Negative value certifies orbital instability.
    pub fn certifies_instability(&self) -> bool {
        self.quadratic_form < T::zero()
    }
}

/// Relative residuals of the three Pohozaev identities.
pub fn pohozaev_residuals_from<T: Real>(i: &Integrals<T>, p: T, n: usize) -> [T; 3] {
    let one = T::one();
    let two = T::lit(2.0);
    let nn = T::from_usize_lossy(n);
    let sub = nn + two - p * (nn - two);
    [
        rel_diff(two / nn * i.grad2, (p - one) / (p + one) * i.lp1),
        rel_diff(sub / (two * (p + one)) * i.lp1, i.b()),
        rel_diff(sub / (nn * (p - one)) * i.grad2, i.b()),
    ]
}

pub fn eval_j<T: Real>(u: &Field<T>, params: &WaveParams<T>) -> Result<T> {
    Functionals::new(u.grid(), params)?.j(u)
}

pub fn eval_k<T: Real>(u: &Field<T>, p: T) -> T {
    crate::spectral::lp1_power(u, p) / (p + T::one())
}

pub fn eval_e<T: Real>(u: &Field<T>, v: &Field<T>, params: &WaveParams<T>) -> Result<T> {
    Functionals::new(u.grid(), params)?.energy(u, v)
}

pub fn eval_f<T: Real>(u: &Field<T>, v: &Field<T>, params: &WaveParams<T>, strict: bool) -> Result<Vec<T>> {
    Functionals::new(u.grid(), params)?.momentum(u, v, strict)
}

pub fn eval_s<T: Real>(u: &Field<T>, v: &Field<T>, params: &WaveParams<T>) -> Result<T> {
    Functionals::new(u.grid(), params)?.action_pair(u, v)
}

pub fn eval_nehari<T: Real>(u: &Field<T>, params: &WaveParams<T>) -> Result<T> {
    Functionals::new(u.grid(), params)?.nehari(u)
}

pub fn eval_kfunctional<T: Real>(u: &Field<T>, params: &WaveParams<T>, kp: &KParams<T>) -> Result<T> {
    Functionals::new(u.grid(), params)?.kfunctional(u, kp)
}

pub fn pohozaev_residuals<T: Real>(phi: &Field<T>, params: &WaveParams<T>) -> Result<[T; 3]> {
    Functionals::new(phi.grid(), params)?.pohozaev(phi)
}

pub fn linearized_quadratic_form<T: Real>(
    w1: &Field<T>,
    w2: &Field<T>,
    phi: &Field<T>,
    params: &WaveParams<T>,
) -> Result<T> {
    Functionals::new(phi.grid(), params)?.linearized_form(phi, w1, w2)
}

pub fn instability_certificate<T: Real>(phi: &Field<T>, params: &WaveParams<T>) -> Result<Certificate<T>> {
    Functionals::new(phi.grid(), params)?.instability_certificate(phi)
}

/// Sharp Gagliardo–Nirenberg constant three ways plus the speed bracket.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnConstants<T: Real> {
    pub from_h1: T,
    pub from_lp1: T,
    pub from_l2: T,
    /// `(1-|c|^2)^{(p(n+2)-n-2)/(4(p+1))}`, the first endpoint of the bracket.
    pub speed_factor: T,
    /// The second endpoint, `1`.
    pub unit: T,
}

pub fn gn_constants<T: Real>(phi0: &Field<T>, p: T, c: &[T]) -> GnConstants<T> {
    let n = T::from_usize_lossy(phi0.grid().n());
    let (one, two) = (T::one(), T::lit(2.0));
    let h1 = crate::spectral::h1_norm(phi0);
    let lq = crate::spectral::lp1_norm(phi0, p);
    let l2 = crate::spectral::l2_norm(phi0);
    let pm = p - one;
    let pp = p + one;
    let c2 = c.iter().fold(T::zero(), |a, &x| a + x * x);
    GnConstants {
        from_h1: h1.powf(-pm / pp),
        from_lp1: lq.powf(-pm / two),
        from_l2: (two * pp / (n + two - p * (n - two))).powf(-pm / (two * pp)) * l2.powf(-pm / pp),
        speed_factor: (one - c2).powf((p * (n + two) - n - two) / (T::lit(4.0) * pp)),
        unit: one,
    }
}

/// Exponent above which the certificate is negative at speed `|c|`; infinite
/// when the bound lies beyond `2* - 1`.
pub fn threshold_p(speed: f64, n: usize) -> Result<f64> {
    if speed == 0.0 {
        return Err(Error::ZeroSpeed);
    }
    if !(speed > 0.0 && speed < 1.0) {
        return Err(Error::InvalidParams(format!("speed {} outside (0, 1)", speed)));
    }
    let eps = 1.0 / (speed * speed) - 1.0;
    let nf = n as f64;
    let t = (2.0 - nf + ((nf - 2.0).powi(2) + eps * (4.0 + 2.0 * nf + eps)).sqrt()) / eps;
    Ok(if t > critical_exponent(n) { f64::INFINITY } else { t })
}

/// Largest `|c|^2` of the strong-instability region, `(p-1)/(p+3)`.
pub fn strong_region(p: f64) -> f64 {
    (p - 1.0) / (p + 3.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionCell {
    pub n: usize,
    pub p: f64,
    pub c: f64,
    pub orbital_unstable: bool,
    pub strong_unstable: bool,
}

/// Classify each `(p, |c|)` cell. At `c = 0` the certificate reduces to
/// `(1-p)‖φ‖^{p+1}_{p+1} < 0`, so the cell counts as orbitally unstable.
pub fn region_map(n: usize, p_grid: &[f64], c_grid: &[f64]) -> Vec<RegionCell> {
    let mut out = Vec::with_capacity(p_grid.len() * c_grid.len());
    for &p in p_grid {
        for &c in c_grid {
            let orbital_unstable = match threshold_p(c, n) {
                Ok(t) => p > t,
                Err(_) => c == 0.0,
            };
            out.push(RegionCell { n, p, c, orbital_unstable, strong_unstable: c * c < strong_region(p) });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn threshold_examples() {
        assert!((threshold_p(0.5, 2).unwrap() - 33f64.sqrt() / 3.0).abs() < 1e-12);
        assert!((threshold_p(0.9, 2).unwrap() - 5.925).abs() < 1e-3);
        assert!(matches!(threshold_p(0.0, 2), Err(Error::ZeroSpeed)));
        assert_eq!(strong_region(3.0), 1.0 / 3.0);
        assert!(strong_region(1.0 + 1e-12) < 1e-12);
    }

    #[test]
    fn region_cells() {
        let cells = region_map(2, &[2.0, 3.0], &[0.5, 0.9]);
        let at = |p: f64, c: f64| *cells.iter().find(|x| x.p == p && x.c == c).unwrap();
        assert!(!at(2.0, 0.9).orbital_unstable);
        assert!(at(2.0, 0.5).orbital_unstable);
        assert!(at(3.0, 0.5).strong_unstable);
        assert!(!at(2.0, 0.5).strong_unstable);
    }

    #[test]
    fn params_validation() {
        assert!(WaveParams::new(vec![1.2], 2.0).is_err());
        assert!(WaveParams::new(vec![0.5, 0.0, 0.0], 5.5).is_err());
        assert!(WaveParams::new(vec![0.5, 0.0, 0.0], 4.5).is_ok());
        assert!(WaveParams::new(vec![0.5], 1.0).is_err());
        assert!(KParams::new(1.0, 0.0, 2.0, 2).is_ok());
        assert!(KParams::new(1.0, 1.0, 2.0, 2).is_err());
        assert!(KParams::new(1.0, 1.0, 3.0, 2).is_ok());
    }

    #[test]
    fn single_mode_j() {
        let g = make_grid(2, &[16, 16], &[std::f64::consts::PI; 2]).unwrap();
        let u = Field::from_fn(g.clone(), |x| x[0].cos() / (std::f64::consts::PI * 2f64.sqrt())).unwrap();
        let params = WaveParams::new(vec![0.8, 0.0], 2.0).unwrap();
        assert!((eval_j(&u, &params).unwrap() - 0.68).abs() < 1e-13);
        let zero = Field::zeros(g);
        assert_eq!(eval_j(&zero, &params).unwrap(), 0.0);
    }

    #[test]
    fn constant_k() {
        let g = make_grid::<f64>(1, &[16], &[2.0]).unwrap();
        let u = Field::constant(g, 1.0);
        assert!((eval_k(&u, 2.0) - 4.0 / 3.0).abs() < 1e-14);
        assert!((eval_k(&u.scale(2.0), 2.0) - 8.0 * 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gn_bracket_endpoint() {
        let g = make_grid::<f64>(2, &[8, 8], &[1.0, 1.0]).unwrap();
        let u = Field::constant(g, 1.0);
        let b = gn_constants(&u, 3.0, &[0.8, 0.0]);
        assert!((b.speed_factor - 0.6).abs() < 1e-14);
        let b0 = gn_constants(&u, 3.0, &[0.0, 0.0]);
        assert_eq!((b0.speed_factor, b0.unit), (1.0, 1.0));
    }
}
