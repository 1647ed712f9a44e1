use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::geometry::{ln_sinh, RadialFunction, SpaceParams};
use crate::numerics::{integrate, QuadratureConfig};

/// `u(ρ) = P(ρ) e^{-αρ}` with `P'(0) = α P(0)`, so `u'(0) = 0` and the
/// radialization is smooth at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    coeffs: Vec<f64>,
    alpha: f64,
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

impl TestFunction {
    /// `coeffs[1]` is overwritten by `α·coeffs[0]`.
    pub fn new(mut coeffs: Vec<f64>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(domain("alpha", alpha, "alpha > 0"));
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProfile("test function needs finite coefficients".into()));
        }
        if coeffs.len() < 2 {
            coeffs.push(0.0);
        }
        coeffs[1] = alpha * coeffs[0];
        Ok(Self { coeffs, alpha })
    }

    /// Random member with decay `α ∈ ((n-1)/p + 0.1, (n-1)/p + 3)` and a
    /// polynomial factor of degree at most 4.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: u32, p: f64) -> Self {
        let threshold = (n - 1) as f64 / p;
        let alpha = rng.random_range(threshold + 0.1..threshold + 3.0);
        let degree = rng.random_range(1..=4usize);
        let mut coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        coeffs[0] = sign * rng.random_range(0.5..2.0);
        Self::new(coeffs, alpha).expect("random parameters are admissible")
    }

    /// `count` members drawn from a ChaCha8 stream seeded with `seed`.
    pub fn family(seed: u64, count: usize, n: u32, p: f64) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Self::random(&mut rng, n, p)).collect()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            alpha: self.alpha,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Polynomial prefactors of `u`, `u'`, `u''` (each times `e^{-αρ}`).
    fn prefactors(&self, rho: f64) -> (f64, f64, f64) {
        let a = self.alpha;
        let d1 = poly_derivative(&self.coeffs);
        let d2 = poly_derivative(&d1);
        let (p0, p1, p2) = (poly(&self.coeffs, rho), poly(&d1, rho), poly(&d2, rho));
        (p0, p1 - a * p0, p2 - 2.0 * a * p1 + a * a * p0)
    }

    /// Prefactor of `|∇^order u|` times `e^{-αρ}`: order 0, 1 or 2 (Laplacian).
    fn order_prefactor(&self, order: u32, rho: f64, sp: &SpaceParams) -> f64 {
        let (q0, q1, q2) = self.prefactors(rho);
        match order {
            0 => q0,
            1 => q1,
            _ if rho == 0.0 => sp.n() as f64 * q2,
            _ => q2 + sp.k() / rho.tanh() * q1,
        }
    }

    /// `‖∇^order u‖_p` on `ℍⁿ` for `order ∈ {0, 1, 2}` (2 meaning `Δ_g u`).
    pub fn derivative_norm(&self, order: u32, p: f64, sp: &SpaceParams) -> Result<f64> {
        if order > 2 {
            return Err(Error::InsufficientSmoothness(format!(
                "test functions carry derivatives up to order 2, not {order}"
            )));
        }
        let a = self.alpha;
        let k = sp.k();
        let decay = p * a - k;
        if !(decay > 0.0) {
            return Err(Error::Divergent {
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        let ln_area = sp.sphere_area().ln();
        // |pre|^p e^{-pαρ} A(ρ), assembled in log form
        let integrand = |rho: f64| -> f64 {
            let pre = self.order_prefactor(order, rho, sp).abs();
            if pre == 0.0 {
                return 0.0;
            }
            if rho == 0.0 {
                return 0.0;
            }
            (p * pre.ln() - p * a * rho + ln_area + k * ln_sinh(rho)).exp()
        };
        let cfg = QuadratureConfig::default();
        let head = integrate(integrand, 0.0, 1.0, &cfg)?.value;
        // x = e^ρ turns the exponential tail into a power law
        let tail = integrate(
            |x: f64| integrand(x.ln()) / x,
            1f64.exp(),
            f64::INFINITY,
            &cfg.with_tail(1.0 + decay.min(40.0) * 0.999),
        )?
        .value;
        Ok((head + tail).powf(1.0 / p))
    }
}

impl RadialFunction for TestFunction {
    fn value(&self, rho: f64) -> f64 {
        self.prefactors(rho).0 * (-self.alpha * rho).exp()
    }

    fn d1(&self, rho: f64) -> f64 {
        self.prefactors(rho).1 * (-self.alpha * rho).exp()
    }

    fn d2(&self, rho: f64) -> f64 {
        self.prefactors(rho).2 * (-self.alpha * rho).exp()
    }
}
