//! Symmetry, sign and tail-decay diagnostics of computed profiles.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Field, Interpolator};

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport<T: Real> {
    /// Largest relative defect under reflections that fix `c`.
    pub reflection_residual: T,
    /// Two dimensions only: defect of `φ(x1, -x2)` against `φ(x1, x2)`.
    pub reflection_x2: Option<T>,
    /// Second moment of `{φ >= max/2}` along `c` over the moment across it.
    pub moment_ratio: T,
    /// `max(ratio, 1/ratio)`.
    pub eccentricity: T,
    /// Zero speed only: largest variance of `φ` over circles, relative to `max φ^2`.
    pub angular_variance: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignReport<T: Real> {
    pub min_val: T,
    pub max_val: T,
    /// `∫_{φ<0} |φ| / ∫ |φ|`
    pub negative_mass_fraction: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayVerdict {
    Algebraic,
    Exponential,
    Inconclusive,
}

impl DecayVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecayVerdict::Algebraic => "algebraic",
            DecayVerdict::Exponential => "exponential",
            DecayVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport<T: Real> {
    pub kappa_parallel: T,
    pub kappa_perp: T,
    pub exp_rate: T,
    pub verdict: DecayVerdict,
    /// RMS residuals of the log-log and log-linear fits over both rays.
    pub rms_algebraic: T,
    pub rms_exponential: T,
    /// Radii of the fit window on the parallel ray.
    pub window: (T, T),
}

#[derive(Clone, Debug)]
pub struct Diagnostics<T: Real> {
    pub symmetry: SymmetryReport<T>,
    pub sign: SignReport<T>,
    pub decay: Option<DecayReport<T>>,
    pub decay_error: Option<String>,
}

impl<T: Real> Diagnostics<T> {
    pub fn compute(phi: &Field<T>, c: &[T]) -> Self {
        let (decay, decay_error) = match decay_report(phi, c) {
            Ok(d) => (Some(d), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Diagnostics { symmetry: symmetry_report(phi, c), sign: sign_report(phi), decay, decay_error }
    }
}

pub fn sign_report<T: Real>(phi: &Field<T>) -> SignReport<T> {
    let v = phi.values();
    let min_val = v.iter().copied().fold(T::infinity(), T::min);
    let max_val = v.iter().copied().fold(T::neg_infinity(), T::max);
    let neg: T = v.iter().filter(|&&x| x < T::zero()).map(|&x| -x).sum();
    let all: T = v.iter().map(|&x| x.abs()).sum();
    let negative_mass_fraction = if all > T::zero() { neg / all } else { T::zero() };
    SignReport { min_val, max_val, negative_mass_fraction }
}

/// Unit direction of `c`, or the first axis at zero speed.
fn unit_speed<T: Real>(c: &[T]) -> Vec<T> {
    let s = c.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
    if s > T::zero() {
        c.iter().map(|&x| x / s).collect()
    } else {
        let mut e = vec![T::zero(); c.len()];
        e[0] = T::one();
        e
    }
}

/// Axis carrying the whole speed vector, if any.
fn aligned_axis<T: Real>(c: &[T]) -> Option<usize> {
    let nz: Vec<usize> = (0..c.len()).filter(|&i| c[i] != T::zero()).collect();
    match nz.len() {
        0 => Some(0),
        1 => Some(nz[0]),
        _ => None,
    }
}

/// Lattice reflection `x_axis -> -x_axis` about the origin sample.
fn reflect_axis<T: Real>(phi: &Field<T>, axis: usize) -> Vec<T> {
    let sizes = phi.grid().sizes().to_vec();
    let n = sizes.len();
    let mut out = vec![T::zero(); phi.values().len()];
    let mut idx = vec![0usize; n];
    for o in out.iter_mut() {
        let mut src = idx.clone();
        src[axis] = (sizes[axis] - idx[axis]) % sizes[axis];
        *o = phi.value_at(&src);
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < sizes[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    out
}

fn max_defect<T: Real>(a: &[T], b: &[T], scale: T) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())) / scale.max(T::min_positive_value())
}

fn coords_from_origin<T: Real>(phi: &Field<T>, idx: &[usize]) -> Vec<T> {
    let g = phi.grid();
    idx.iter()
        .enumerate()
        .map(|(a, &i)| (T::from_usize_lossy(i) - T::from_usize_lossy(g.sizes()[a] / 2)) * g.spacings()[a])
        .collect()
}

pub fn symmetry_report<T: Real>(phi: &Field<T>, c: &[T]) -> SymmetryReport<T> {
    let centred = phi.centered();
    let n = centred.grid().n();
    let scale = centred.max_abs();
    let e = unit_speed(c);
    let zero_speed = c.iter().all(|&x| x == T::zero());

    let reflection_residual = match aligned_axis(c) {
        Some(j) => (0..n)
            .filter(|&a| zero_speed || a != j)
            .map(|a| max_defect(&reflect_axis(&centred, a), centred.values(), scale))
            .fold(T::zero(), T::max),
        None => oblique_reflection_defect(&centred, &e, scale),
    };
    let reflection_x2 =
        if n == 2 { Some(max_defect(&reflect_axis(&centred, 1), centred.values(), scale)) } else { None };

    let sign = if centred.values()[centred.argmax_abs()] < T::zero() { -T::one() } else { T::one() };
    let peak = centred.max_abs();
    let (mut m_par, mut m_perp) = (T::zero(), T::zero());
    for (flat, &v) in centred.values().iter().enumerate() {
        if sign * v >= T::lit(0.5) * peak {
            let x = coords_from_origin(&centred, &centred.unravel(flat));
            let along = x.iter().zip(&e).fold(T::zero(), |s, (&a, &b)| s + a * b);
            let r2 = x.iter().fold(T::zero(), |s, &a| s + a * a);
            m_par = m_par + along * along;
            m_perp = m_perp + (r2 - along * along);
        }
    }
    let moment_ratio = if n == 1 || m_perp == T::zero() {
        T::one()
    } else {
        m_par / (m_perp / T::from_usize_lossy(n - 1))
    };
    let eccentricity = moment_ratio.max(T::one() / moment_ratio);

    let angular_variance = if zero_speed && n >= 2 { Some(angular_variance(&centred)) } else { None };
    SymmetryReport { reflection_residual, reflection_x2, moment_ratio, eccentricity, angular_variance }
}

/// Reflection across the hyperplane through `c` orthogonal to some `w ⊥ c`,
/// evaluated by trigonometric interpolation on a coarse sample set.
fn oblique_reflection_defect<T: Real>(phi: &Field<T>, e: &[T], scale: T) -> T {
    let n = e.len();
    // Gram–Schmidt a coordinate axis against e.
    let mut w = vec![T::zero(); n];
    let k = (0..n).min_by(|&a, &b| e[a].abs().partial_cmp(&e[b].abs()).unwrap()).unwrap();
    w[k] = T::one();
    let d = e[k];
    for i in 0..n {
        w[i] = w[i] - d * e[i];
    }
    let wn = w.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    for x in w.iter_mut() {
        *x = *x / wn;
    }
    let ip = Interpolator::new(phi);
    let pts = 7usize;
    let mut worst = T::zero();
    for flat in 0..pts.pow(n as u32) {
        let mut r = flat;
        let x: Vec<T> = (0..n)
            .map(|_| {
                let i = r % pts;
                r /= pts;
                T::from_usize_lossy(i) - T::lit(3.0)
            })
            .collect();
        let proj = x.iter().zip(&w).fold(T::zero(), |s, (&a, &b)| s + a * b);
        let y: Vec<T> = x.iter().zip(&w).map(|(&a, &b)| a - T::lit(2.0) * proj * b).collect();
        worst = worst.max((ip.eval(&x) - ip.eval(&y)).abs());
    }
    worst / scale.max(T::min_positive_value())
}

fn angular_variance<T: Real>(centred: &Field<T>) -> T {
    let g = centred.grid();
    let n = g.n();
    let shift: Vec<T> = (0..n).map(|a| g.coords(a)[g.sizes()[a] / 2]).collect();
    let ip = Interpolator::new(centred);
    let peak2 = centred.max_abs() * centred.max_abs();
    let directions: Vec<Vec<T>> = if n == 2 {
        (0..32)
            .map(|k| {
                let t = T::lit(2.0 * std::f64::consts::PI * k as f64 / 32.0);
                vec![t.cos(), t.sin()]
            })
            .collect()
    } else {
        // Golden-spiral points on the sphere.
        (0..48)
            .map(|k| {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / 48.0;
                let r = (1.0 - z * z).sqrt();
                let th = k as f64 * std::f64::consts::PI * (3.0 - 5f64.sqrt());
                vec![T::lit(r * th.cos()), T::lit(r * th.sin()), T::lit(z)]
            })
            .collect()
    };
    let mut worst = T::zero();
    for &rad in &[0.5, 1.0, 2.0, 3.0] {
        let vals: Vec<T> = directions
            .iter()
            .map(|d| {
                let x: Vec<T> = d.iter().zip(&shift).map(|(&a, &s)| s + a * T::lit(rad)).collect();
                ip.eval(&x)
            })
            .collect();
        let m = vals.iter().copied().sum::<T>() / T::from_usize_lossy(vals.len());
        let var = vals.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::from_usize_lossy(vals.len());
        worst = worst.max(var / peak2);
    }
    worst
}

/// Samples `(r, φ)` along a ray from the origin sample.
fn ray<T: Real>(centred: &Field<T>, dir: &[T], ip: &mut Option<Interpolator<T>>) -> Vec<(T, T)> {
    let g = centred.grid();
    let n = g.n();
    let axis = (0..n).find(|&a| dir[a].abs() == T::one());
    let origin = g.origin_index();
    match axis {
        Some(a) => {
            let forward = dir[a] > T::zero();
            (1..g.sizes()[a] / 2)
                .map(|i| {
                    let mut idx = origin.clone();
                    idx[a] = if forward { origin[a] + i } else { origin[a] - i };
                    (T::from_usize_lossy(i) * g.spacings()[a], centred.value_at(&idx))
                })
                .collect()
        }
        None => {
            let ip = ip.get_or_insert_with(|| Interpolator::new(centred));
            let h = g.spacings().iter().copied().fold(T::infinity(), T::min);
            let lmin = g.half_widths().iter().copied().fold(T::infinity(), T::min);
            let count = (lmin / h).to_usize().unwrap_or(0);
            let shift: Vec<T> = (0..n).map(|a| g.coords(a)[origin[a]]).collect();
            (1..count)
                .map(|i| {
                    let r = T::from_usize_lossy(i) * h;
                    let x: Vec<T> = dir.iter().zip(&shift).map(|(&d, &s)| s + d * r).collect();
                    (r, ip.eval(&x))
                })
                .collect()
        }
    }
}

struct Fit<T> {
    slope: T,
    sq_resid: T,
    count: usize,
}

fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Fit<T> {
    let m = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / m;
    let my = ys.iter().copied().sum::<T>() / m;
    let sxy = xs.iter().zip(ys).fold(T::zero(), |s, (&x, &y)| s + (x - mx) * (y - my));
    let sxx = xs.iter().fold(T::zero(), |s, &x| s + (x - mx) * (x - mx));
    let slope = sxy / sxx;
    let sq_resid = xs.iter().zip(ys).fold(T::zero(), |s, (&x, &y)| {
        let r = y - my - slope * (x - mx);
        s + r * r
    });
    Fit { slope, sq_resid, count: xs.len() }
}

/// Tail window on a ray: `[L/4, L/2]`, or `[r_f/2, r_f]` when the profile
/// reaches the floor at `r_f < L/2`; started after the last sign change.
fn tail_window<T: Real>(samples: &[(T, T)], lmin: T, floor: T) -> Result<Vec<(T, T)>> {
    let r_floor = samples.iter().find(|&&(_, v)| v.abs() < floor).map(|&(r, _)| r);
    let hi = r_floor.map_or(lmin / T::lit(2.0), |r| r.min(lmin / T::lit(2.0)));
    let lo = (lmin / T::lit(4.0)).min(hi / T::lit(2.0));
    let mut w: Vec<(T, T)> = samples.iter().copied().filter(|&(r, v)| r >= lo && r <= hi && v.abs() >= floor).collect();
    if let Some(last) = w.last().copied() {
        if let Some(flip) = w.iter().rposition(|&(_, v)| v.signum() != last.1.signum() || v == T::zero()) {
            w.drain(..=flip);
        }
    }
    if w.len() < 6 {
        return Err(Error::TailBelowFloor);
    }
    Ok(w)
}

pub fn decay_report<T: Real>(phi: &Field<T>, c: &[T]) -> Result<DecayReport<T>> {
    let centred = phi.centered();
    let g = centred.grid().clone();
    let n = g.n();
    let e = unit_speed(c);
    let perp: Vec<T> = if n == 1 {
        vec![-T::one()]
    } else {
        match aligned_axis(c) {
            Some(j) => {
                let mut v = vec![T::zero(); n];
                v[(j + 1) % n] = T::one();
                v
            }
            None => {
                let mut v = vec![T::zero(); n];
                v[0] = -e[1];
                v[1] = e[0];
                let s = (v[0] * v[0] + v[1] * v[1]).sqrt();
                v.iter().map(|&x| x / s).collect()
            }
        }
    };
    let lmin = g.half_widths().iter().copied().fold(T::infinity(), T::min);
    // truncation ringing of dealiased profiles sits near 1e-7 of the peak
    let floor = T::lit(1e-6) * centred.max_abs();
    let mut ip = None;
    let mut kappas = Vec::new();
    let mut rates = Vec::new();
    let (mut sa, mut se, mut count) = (T::zero(), T::zero(), 0usize);
    let mut window = (T::zero(), T::zero());
    for (k, dir) in [e.clone(), perp].iter().enumerate() {
        let samples = ray(&centred, dir, &mut ip);
        let w = tail_window(&samples, lmin, floor)?;
        if k == 0 {
            window = (w[0].0, w[w.len() - 1].0);
        }
        let ly: Vec<T> = w.iter().map(|&(_, v)| v.abs().ln()).collect();
        let lr: Vec<T> = w.iter().map(|&(r, _)| r.ln()).collect();
        let r: Vec<T> = w.iter().map(|&(r, _)| r).collect();
        let alg = linear_fit(&lr, &ly);
        let ex = linear_fit(&r, &ly);
        kappas.push(-alg.slope);
        rates.push(-ex.slope);
        sa = sa + alg.sq_resid;
        se = se + ex.sq_resid;
        count += alg.count;
    }
    let m = T::from_usize_lossy(count);
    let rms_algebraic = (sa / m).sqrt();
    let rms_exponential = (se / m).sqrt();
    // periodic images of an r^{-2} tail bend the log-log fit, so 3× is enough
    let factor = T::lit(3.0);
    let verdict = if rms_exponential >= factor * rms_algebraic {
        DecayVerdict::Algebraic
    } else if rms_algebraic >= factor * rms_exponential {
        DecayVerdict::Exponential
    } else {
        DecayVerdict::Inconclusive
    };
    Ok(DecayReport {
        kappa_parallel: kappas[0],
        kappa_perp: kappas[1],
        exp_rate: (rates[0] + rates[1]) / T::lit(2.0),
        verdict,
        rms_algebraic,
        rms_exponential,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn constant_sign_report() {
        let g = make_grid::<f64>(1, &[8], &[1.0]).unwrap();
        let s = sign_report(&Field::constant(g, 1.0));
        assert_eq!((s.min_val, s.max_val, s.negative_mass_fraction), (1.0, 1.0, 0.0));
    }

    #[test]
    fn symmetric_input_has_zero_reflection_defect() {
        let g = make_grid::<f64>(2, &[32, 32], &[8.0, 8.0]).unwrap();
        let f = Field::from_fn(g, |x| (-(x[0] * x[0] / 4.0 + x[1] * x[1])).exp()).unwrap();
        let r = symmetry_report(&f, &[0.5, 0.0]);
        assert_eq!(r.reflection_residual, 0.0);
        assert_eq!(r.reflection_x2, Some(0.0));
        assert!(r.moment_ratio > 3.0);
    }

    #[test]
    fn synthetic_inverse_square_tail() {
        let g = make_grid::<f64>(2, &[256, 256], &[40.0, 40.0]).unwrap();
        let f = Field::from_fn(g, |x| 1.0 / (1.0 + x[0] * x[0] + x[1] * x[1])).unwrap();
        let d = decay_report(&f, &[0.5, 0.0]).unwrap();
        assert!((d.kappa_parallel - 2.0).abs() < 0.05);
        assert!((d.kappa_perp - 2.0).abs() < 0.05);
        assert_eq!(d.verdict, DecayVerdict::Algebraic);
    }

    #[test]
    fn synthetic_exponential_tail() {
        let g = make_grid::<f64>(2, &[256, 256], &[40.0, 40.0]).unwrap();
        let f = Field::from_fn(g, |x| 1.0 / (x[0] * x[0] + x[1] * x[1]).sqrt().cosh()).unwrap();
        let d = decay_report(&f, &[0.0, 0.0]).unwrap();
        assert_eq!(d.verdict, DecayVerdict::Exponential);
        assert!((d.exp_rate - 1.0).abs() < 1e-3);
    }
}
