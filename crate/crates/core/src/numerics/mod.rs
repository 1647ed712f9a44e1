//! Shared numerical kernels: adaptive Gauss-Kronrod quadrature (finite and
//! semi-infinite intervals), bracketed inversion of monotone functions and
//! log-uniform grids.

mod grid;
mod quadrature;
mod roots;

pub use grid::{log_grid, GridSpec};
pub use quadrature::{gauss_legendre, integrate, Estimate, QuadratureConfig};
pub use roots::{invert_monotone, RootConfig};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    NonConvergence { estimate: f64, error_bound: f64 },

    #[error("integrand is not finite at s = {abscissa:e}")]
    NonFinite { abscissa: f64 },

    #[error("target {target:e} is outside the bracket values [{g_lo:e}, {g_hi:e}]")]
    Bracket { target: f64, g_lo: f64, g_hi: f64 },

    #[error("root search did not converge: last iterate {last:e}, residual {residual:e}")]
    RootNonConvergence { last: f64, residual: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
