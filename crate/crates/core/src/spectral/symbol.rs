use std::sync::Arc;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// How a multiplier acts on a stored mode: `Even` multiplies by the value,
/// `Odd` multiplies by `i` times the value (value odd under ξ → −ξ).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Value given to `P(0)`, where `-(c·ξ)^2/|ξ|^2` has no limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroModeRule {
    /// `P(0) = 0`.
    Zero,
    /// `P(0) = -|c|^2/n`, the average of `P` over directions. In one dimension
    /// this is the continuous extension, so `L_c = -c^2` exactly.
    AngularMean,
}

impl ZeroModeRule {
    pub fn default_for(n: usize) -> Self {
        if n == 1 {
            ZeroModeRule::AngularMean
        } else {
            ZeroModeRule::Zero
        }
    }
}

/// Fourier multiplier sampled on the stored half lattice.
#[derive(Clone, Debug)]
pub struct Symbol<T: Real> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
    parity: Parity,
}

/// Wavevector data handed to symbol constructors.
pub struct Mode<'a, T> {
    pub xi: &'a [T],
    /// Same as `xi` with Nyquist components set to zero.
    pub xi_odd: &'a [T],
    pub k2: T,
}

impl<'a, T: Real> Mode<'a, T> {
    pub fn is_zero(&self) -> bool {
        self.k2 == T::zero()
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

impl<T: Real> Symbol<T> {
    pub fn from_fn(grid: &Arc<Grid<T>>, parity: Parity, mut f: impl FnMut(&Mode<T>) -> T) -> Self {
        let n = grid.n();
        let mut xi = vec![T::zero(); n];
        let mut xo = vec![T::zero(); n];
        let mut values = vec![T::zero(); grid.spectrum_len()];
        grid.for_each_mode(|flat, idx| {
            grid.xi(idx, &mut xi);
            grid.xi_odd(idx, &mut xo);
            let k2 = dot(&xi, &xi);
            values[flat] = f(&Mode { xi: &xi, xi_odd: &xo, k2 });
        });
        Symbol { grid: grid.clone(), values, parity }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Apply `f` to every value, keeping the parity.
    pub fn map(&self, f: impl Fn(T) -> T) -> Symbol<T> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Symbol { grid: self.grid.clone(), values, parity: self.parity }
    }

    /// Even symbol built pointwise from the values of two symbols.
    pub fn zip_even(&self, other: &Symbol<T>, f: impl Fn(T, T) -> T) -> Result<Symbol<T>> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Symbol { grid: self.grid.clone(), values, parity: Parity::Even })
    }

    /// Pointwise product; parities combine like signs (`i·i = -1`).
    pub fn product(&self, other: &Symbol<T>) -> Result<Symbol<T>> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let both_odd = self.parity == Parity::Odd && other.parity == Parity::Odd;
        let sign = if both_odd { -T::one() } else { T::one() };
        let parity = if (self.parity == Parity::Odd) ^ (other.parity == Parity::Odd) {
            Parity::Odd
        } else {
            Parity::Even
        };
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| sign * a * b).collect();
        Ok(Symbol { grid: self.grid.clone(), values, parity })
    }

    pub fn identity(grid: &Arc<Grid<T>>) -> Self {
        Self::from_fn(grid, Parity::Even, |_| T::one())
    }

    /// `-Δ`
    pub fn neg_laplacian(grid: &Arc<Grid<T>>) -> Self {
        Self::from_fn(grid, Parity::Even, |m| m.k2)
    }

    /// `I - Δ`
    pub fn one_minus_laplacian(grid: &Arc<Grid<T>>) -> Self {
        Self::from_fn(grid, Parity::Even, |m| T::one() + m.k2)
    }

    /// `(-Δ)^{1/2}`
    pub fn half_laplacian(grid: &Arc<Grid<T>>) -> Self {
        Self::from_fn(grid, Parity::Even, |m| m.k2.sqrt())
    }

    /// `(-Δ)^{-1/2}` with the zero mode sent to zero.
    pub fn inv_half_laplacian(grid: &Arc<Grid<T>>) -> Self {
        Self::from_fn(grid, Parity::Even, |m| if m.is_zero() { T::zero() } else { T::one() / m.k2.sqrt() })
    }

    /// `∂_j`
    pub fn gradient(grid: &Arc<Grid<T>>, axis: usize) -> Self {
        Self::from_fn(grid, Parity::Odd, |m| m.xi_odd[axis])
    }

    /// `∂_j (-Δ)^{-1/2}`
    pub fn riesz_derivative(grid: &Arc<Grid<T>>, axis: usize) -> Self {
        Self::from_fn(grid, Parity::Odd, |m| if m.is_zero() { T::zero() } else { m.xi_odd[axis] / m.k2.sqrt() })
    }
}

pub(crate) fn p_value<T: Real>(m: &Mode<T>, c: &[T], rule: ZeroModeRule) -> T {
    if m.is_zero() {
        match rule {
            ZeroModeRule::Zero => T::zero(),
            ZeroModeRule::AngularMean => -dot(c, c) / T::from_usize_lossy(c.len()),
        }
    } else {
        let s = dot(c, m.xi_odd) / m.k2.sqrt();
        -s * s
    }
}

/// `P(ξ) = -(c·ξ)^2/|ξ|^2`, the symbol of `L_c = (c·∇)^2 (-Δ)^{-1}`.
pub fn symbol_p<T: Real>(grid: &Arc<Grid<T>>, c: &[T], rule: ZeroModeRule) -> Symbol<T> {
    Symbol::from_fn(grid, Parity::Even, |m| p_value(m, c, rule))
}

/// Square root of `L_c`: the skew operator `(c·∇)(-Δ)^{-1/2}`, acting as
/// `i (c·ξ)/|ξ|`. Its square is `L_c` away from the zero mode and its
/// modulus is `|c·ξ|/|ξ|`.
pub fn symbol_lhalf<T: Real>(grid: &Arc<Grid<T>>, c: &[T]) -> Symbol<T> {
    Symbol::from_fn(grid, Parity::Odd, |m| if m.is_zero() { T::zero() } else { dot(c, m.xi_odd) / m.k2.sqrt() })
}

/// `1 + |ξ|^2 + P(ξ)`, the linear part of the traveling-wave equation.
pub fn symbol_linear<T: Real>(grid: &Arc<Grid<T>>, c: &[T], rule: ZeroModeRule) -> Symbol<T> {
    Symbol::from_fn(grid, Parity::Even, |m| T::one() + m.k2 + p_value(m, c, rule))
}

/// Convolution kernel `1/(1 + |ξ|^2 + P(ξ))`.
pub fn symbol_khat<T: Real>(grid: &Arc<Grid<T>>, c: &[T], rule: ZeroModeRule) -> Symbol<T> {
    Symbol::from_fn(grid, Parity::Even, |m| T::one() / (T::one() + m.k2 + p_value(m, c, rule)))
}
