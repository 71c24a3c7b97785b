//! Grids, transforms, Fourier multipliers and quadrature norms.

mod field;
mod grid;
mod ops;
mod symbol;

pub use field::{Field, Spectrum};
pub use grid::{make_grid, signed_index, Grid};
pub use ops::{
    apply_inverse_half_laplacian, apply_multiplier, apply_symbol, band_mask, check_zero_mean, dealias, dealias_in_place,
    dealias_mask, grad_norm2, h1_norm, h1_norm2, inner, l2_norm, l2_norm2, lp1_norm, lp1_power, nonlinearity,
    pow_odd, quadratic_form, translate, Interpolator, REALNESS_TOL,
};
pub(crate) use field::same_grid as same_grid_pub;
pub(crate) use ops::grad_norm2_spec;
pub use symbol::{symbol_khat, symbol_lhalf, symbol_linear, symbol_p, Mode, Parity, Symbol, ZeroModeRule};
