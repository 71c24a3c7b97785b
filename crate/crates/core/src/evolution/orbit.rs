//! Distance from a state to the translation orbit of a traveling pair.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::Result;
use crate::functionals::{Functionals, WaveParams};
use crate::scalar::Real;
use crate::spectral::{same_grid_pub as same_grid, signed_index, translate, Field, Grid, Spectrum, Symbol};

/// The pair `(φ, -Aφ)` in Fourier space with the `H¹ × L²` weights.
#[derive(Clone, Debug)]
pub struct OrbitReference<T: Real> {
    phi: Spectrum<T>,
    psi: Spectrum<T>,
    h1_weight: Symbol<T>,
}

/// Where the infimum was attained and its value.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitFit<T: Real> {
    pub shift: Vec<T>,
    pub distance: T,
}

impl<T: Real> OrbitReference<T> {
    pub fn new(phi: &Field<T>, params: &WaveParams<T>) -> Result<Self> {
        let partner = Functionals::new(phi.grid(), params)?.traveling_partner(phi)?;
        Ok(Self::from_pair(phi, &partner))
    }

    pub fn from_pair(phi: &Field<T>, psi: &Field<T>) -> Self {
        OrbitReference { phi: phi.fft(), psi: psi.fft(), h1_weight: Symbol::one_minus_laplacian(phi.grid()) }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        self.phi.grid()
    }

    fn x_norm2(&self, u: &Spectrum<T>, v: &Spectrum<T>) -> T {
        let w = self.h1_weight.values();
        u.weighted_dot(u, |f| w[f]) + v.norm2()
    }

    /// `inf_y ‖(u, v) - (φ, ψ)(· - y)‖_X`, searched on the shift lattice and
    /// refined on the trigonometric interpolant of the correlation.
    pub fn fit_spec(&self, u: &Spectrum<T>, v: &Spectrum<T>) -> Result<OrbitFit<T>> {
        same_grid(u.grid(), self.grid())?;
        same_grid(v.grid(), self.grid())?;
        let g = self.grid().clone();
        let n = g.n();
        let w = self.h1_weight.values();
        // correlation spectrum: C(y) = Re Σ w G_k e^{i ξ·y}
        let corr: Vec<Complex<T>> = (0..g.spectrum_len())
            .map(|f| u.values()[f] * self.phi.values()[f].conj() * w[f] + v.values()[f] * self.psi.values()[f].conj())
            .collect();
        let lattice = g.inverse(&corr);
        let best = lattice
            .iter()
            .enumerate()
            .fold((0usize, T::neg_infinity()), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        let mut idx = vec![0usize; n];
        let mut rest = best.0;
        for a in (0..n).rev() {
            idx[a] = rest % g.sizes()[a];
            rest /= g.sizes()[a];
        }
        // quadratic refinement per axis on the lattice
        let mut y: Vec<T> = (0..n).map(|a| T::from_isize(signed_index(idx[a], g.sizes()[a])).unwrap() * g.spacings()[a]).collect();
        for a in 0..n {
            let at = |off: isize| {
                let mut j = idx.clone();
                let s = g.sizes()[a] as isize;
                j[a] = ((idx[a] as isize + off).rem_euclid(s)) as usize;
                let flat = j.iter().zip(g.sizes()).fold(0usize, |acc, (&k, &s)| acc * s + k);
                lattice[flat]
            };
            let (m, c, p) = (at(-1), at(0), at(1));
            let den = m - T::lit(2.0) * c + p;
            if den < T::zero() {
                let delta = T::lit(0.5) * (m - p) / den;
                y[a] = y[a] + delta.max(-T::lit(0.5)).min(T::lit(0.5)) * g.spacings()[a];
            }
        }
        newton_polish(&g, &corr, &mut y);
        let moved_phi = translate(&self.phi, &y);
        let moved_psi = translate(&self.psi, &y);
        let du = u.axpy(-T::one(), &moved_phi)?;
        let dv = v.axpy(-T::one(), &moved_psi)?;
        Ok(OrbitFit { distance: self.x_norm2(&du, &dv).max(T::zero()).sqrt(), shift: y })
    }

    pub fn fit(&self, u: &Field<T>, v: &Field<T>) -> Result<OrbitFit<T>> {
        self.fit_spec(&u.fft(), &v.fft())
    }
}

/// Newton iterations on `C(y) = Re Σ w G_k e^{iξ̃·y}`; steps are capped at one
/// cell and rejected unless `C` increases.
fn newton_polish<T: Real>(g: &Grid<T>, corr: &[Complex<T>], y: &mut [T]) {
    let n = g.n();
    let weights = g.mode_weights();
    let eval = |y: &[T]| -> (T, Vec<T>, Vec<T>) {
        let mut val = T::zero();
        let mut grad = vec![T::zero(); n];
        let mut hess = vec![T::zero(); n * n];
        let mut xo = vec![T::zero(); n];
        g.for_each_mode(|f, idx| {
            g.xi_odd(idx, &mut xo);
            let ph = xo.iter().zip(y.iter()).fold(T::zero(), |a, (&k, &s)| a + k * s);
            let z = corr[f] * Complex::new(ph.cos(), ph.sin()) * weights[f];
            val = val + z.re;
            for a in 0..n {
                grad[a] = grad[a] - xo[a] * z.im;
                for b in 0..n {
                    hess[a * n + b] = hess[a * n + b] - xo[a] * xo[b] * z.re;
                }
            }
        });
        (val, grad, hess)
    };
    let cap: Vec<T> = g.spacings().to_vec();
    let (mut val, mut grad, mut hess) = eval(y);
    for _ in 0..8 {
        let Some(step) = solve_small(&hess, &grad, n) else { break };
        let trial: Vec<T> = (0..n).map(|a| y[a] - step[a].max(-cap[a]).min(cap[a])).collect();
        let (v2, g2, h2) = eval(&trial);
        if !(v2 >= val) {
            break;
        }
        let done = (0..n).all(|a| (trial[a] - y[a]).abs() <= T::lit(1e-14) * (T::one() + y[a].abs()));
        y.copy_from_slice(&trial);
        val = v2;
        grad = g2;
        hess = h2;
        if done {
            break;
        }
    }
}

/// Solve `H s = g` for n ≤ 3 by Gaussian elimination with partial pivoting.
fn solve_small<T: Real>(h: &[T], g: &[T], n: usize) -> Option<Vec<T>> {
    let mut a: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| h[i * n + j]).chain([g[i]]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[piv][col].abs() > T::zero()) {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..=n {
                let t = a[col][c];
                a[r][c] = a[r][c] - f * t;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let s = (r + 1..n).fold(a[r][n], |acc, c| acc - a[r][c] * x[c]);
        x[r] = s / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Convenience wrapper building the reference pair from `φ`.
pub fn orbital_distance<T: Real>(u: &Field<T>, v: &Field<T>, phi: &Field<T>, params: &WaveParams<T>) -> Result<T> {
    Ok(OrbitReference::new(phi, params)?.fit(u, v)?.distance)
}
