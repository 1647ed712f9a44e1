//! Norms in the volume coordinate, the constant `C(n,m,p)`, Rayleigh
//! quotients and the sharpness sweep.

mod norms;
mod quotient;
mod test_function;

pub use norms::{grad_norm_volume, grad_norm_volume_weighted, laplacian_norm_volume, lp_norm_volume};
pub use quotient::{
    check_inequality, rayleigh_quotient, sharpness_sweep, Candidate, CorollaryCheck, InequalityReport, SweepRow,
    SweepTable, INEQUALITY_TOLERANCE,
};
pub use test_function::TestFunction;

use crate::error::{domain, Result};

/// Order-`m` Poincaré data on `ℍⁿ` with exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareParams {
    n: u32,
    m: u32,
    p: f64,
}

impl PoincareParams {
    pub fn new(n: u32, m: u32, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(domain("n", n as f64, "n >= 2"));
        }
        if m < 1 {
            return Err(domain("m", m as f64, "m >= 1"));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(domain("p", p, "1 < p < inf"));
        }
        Ok(Self { n, m, p })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn constant(&self) -> f64 {
        constant_unchecked(self.n, self.m, self.p)
    }

    /// `C(n, m-l, p)`, the constant between orders `l` and `m`; `l = m` gives 1.
    ///
    /// For odd `m - l` and `p < 2` this is not an upper bound: radial
    /// exponentials near the decay threshold push `‖∇u‖_p / ‖Δu‖_p` to `p'/(n-1)`.
    pub fn corollary_constant(&self, l: u32) -> Result<f64> {
        if l > self.m {
            return Err(domain("l", l as f64, "0 <= l <= m"));
        }
        if l == self.m {
            return Ok(1.0);
        }
        Ok(constant_unchecked(self.n, self.m - l, self.p))
    }

    pub fn is_even(&self) -> bool {
        self.m % 2 == 0
    }
}

fn constant_unchecked(n: u32, m: u32, p: f64) -> f64 {
    let k = (n - 1) as f64;
    let pc = p / (p - 1.0);
    let band = p * pc / (k * k);
    if m % 2 == 0 {
        band.powi((m / 2) as i32)
    } else {
        p / k * band.powi(((m - 1) / 2) as i32)
    }
}

/// `C(n,m,p)`: `(pp'/(n-1)^2)^{m/2}` for even `m`,
/// `(p/(n-1)) (pp'/(n-1)^2)^{(m-1)/2}` for odd `m`.
pub fn constant(n: u32, m: u32, p: f64) -> Result<f64> {
    Ok(PoincareParams::new(n, m, p)?.constant())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(constant(3, 2, 2.0).unwrap(), 1.0);
        assert!((constant(2, 1, 3.0).unwrap() - 3.0).abs() < 1e-15);
        assert!(constant(3, 1, 1.0).is_err());
        assert!(constant(1, 1, 2.0).is_err());
        assert!(constant(3, 0, 2.0).is_err());
    }

    #[test]
    fn p_two_reduction() {
        for n in 2..=6u32 {
            for m in 1..=4u32 {
                let want = (2.0 / (n - 1) as f64).powi(m as i32);
                let got = constant(n, m, 2.0).unwrap();
                assert!((got - want).abs() <= 1e-14 * want);
            }
        }
    }

    #[test]
    fn corollary_constants() {
        let pp = PoincareParams::new(4, 3, 2.5).unwrap();
        assert_eq!(pp.corollary_constant(0).unwrap(), pp.constant());
        assert_eq!(pp.corollary_constant(3).unwrap(), 1.0);
        assert_eq!(pp.corollary_constant(2).unwrap(), constant(4, 1, 2.5).unwrap());
        assert!(pp.corollary_constant(4).is_err());
        assert!((1.0 / pp.p() + 1.0 / pp.p_conj() - 1.0).abs() < 1e-15);
    }
}
