//! Radial geometry of the Poincaré ball model of ℍⁿ.
//!
//! Everything here is expressed either in the geodesic radius `rho` or in
//! the volume coordinate `s = Φ(rho)`, the hyperbolic volume of the geodesic
//! ball of radius `rho`:
//!
//! ```text
//! Φ(ρ) = n ω_n ∫_0^ρ sinh^{n-1}(r) dr,     F = Φ^{-1},
//! A(s) = n ω_n sinh^{n-1}(F(s))             (area of the sphere enclosing volume s)
//! ```
//!
//! `ω_n` is the volume of the Euclidean unit ball, so `n ω_n` is the area of
//! the unit sphere `S^{n-1}`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::numerics::{invert_monotone, RootConfig};
use crate::profile::{RadialProfile, SegmentKind};

/// Largest supported dimension. The small-radius series for Φ is sized for it.
pub const MAX_DIMENSION: u32 = 64;

/// Below this radius Φ is summed from its Taylor series, above it from the
/// exponential expansion of `sinh^{n-1}`.
const SERIES_SWITCH: f64 = 1.5;

/// Dimension of ℍⁿ together with the constants derived from it.
#[derive(Debug, Clone)]
pub struct SpaceParams {
    n: u32,
    omega_n: f64,
    // Coefficients b_j of (sinh r / r)^{n-1} = Σ b_j r^{2j}.
    series: Arc<[f64]>,
}

impl PartialEq for SpaceParams {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.omega_n == other.omega_n
    }
}

/// Volume of the Euclidean unit ball in `R^n`.
pub fn unit_ball_volume(n: u32) -> f64 {
    // ω_0 = 1, ω_1 = 2, ω_n = 2π/n · ω_{n-2}
    let mut w = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        w *= 2.0 * PI / k as f64;
        k += 2;
    }
    w
}

impl SpaceParams {
    pub fn new(n: u32) -> Result<Self> {
        Self::with_omega(n, unit_ball_volume(n))
    }

    /// Build with an explicit `ω_n`. Only useful for fault injection: every
    /// identity in this crate assumes the Euclidean unit-ball volume.
    pub fn with_omega(n: u32, omega_n: f64) -> Result<Self> {
        if !(2..=MAX_DIMENSION).contains(&n) {
            return Err(domain("n", n as f64, "2 <= n <= 64"));
        }
        if !(omega_n > 0.0 && omega_n.is_finite()) {
            return Err(domain("omega_n", omega_n, "omega_n > 0"));
        }
        Ok(Self {
            n,
            omega_n,
            series: sinh_power_series(n - 1).into(),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn omega_n(&self) -> f64 {
        self.omega_n
    }

    /// `n ω_n`.
    pub fn sphere_area(&self) -> f64 {
        self.n as f64 * self.omega_n
    }

    /// `n - 1` as a float.
    pub fn k(&self) -> f64 {
        (self.n - 1) as f64
    }
}

fn sinh_power_series(k: u32) -> Vec<f64> {
    let len = (40 + 4 * k as usize).min(300);
    // sinh r / r = Σ r^{2i} / (2i+1)!
    let mut base = vec![0.0; len];
    let mut fact = 1.0;
    for (i, b) in base.iter_mut().enumerate() {
        if i > 0 {
            fact *= ((2 * i) * (2 * i + 1)) as f64;
        }
        *b = 1.0 / fact;
    }
    let mut out = vec![0.0; len];
    out[0] = 1.0;
    for _ in 0..k {
        let mut next = vec![0.0; len];
        for (i, &a) in out.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in base.iter().enumerate().take(len - i) {
                next[i + j] += a * b;
            }
        }
        out = next;
    }
    out
}

fn binomial_row(k: u32) -> Vec<f64> {
    let mut row = vec![1.0; k as usize + 1];
    for j in 1..=k as usize {
        row[j] = row[j - 1] * (k as usize + 1 - j) as f64 / j as f64;
    }
    row
}

/// `ln sinh ρ` without overflow for large `ρ`.
pub fn ln_sinh(rho: f64) -> f64 {
    if rho > 1.0 {
        rho - std::f64::consts::LN_2 + (-(-2.0 * rho).exp()).ln_1p()
    } else {
        rho.sinh().ln()
    }
}

fn check_radius(rho: f64) -> Result<()> {
    if rho >= 0.0 && !rho.is_nan() {
        Ok(())
    } else {
        Err(domain("rho", rho, "rho >= 0"))
    }
}

fn check_volume(s: f64) -> Result<()> {
    if s >= 0.0 && !s.is_nan() {
        Ok(())
    } else {
        Err(domain("s", s, "s >= 0"))
    }
}

/// `ln Φ(ρ)`; `-inf` at `ρ = 0`.
pub fn ln_ball_volume(rho: f64, sp: &SpaceParams) -> Result<f64> {
    check_radius(rho)?;
    if rho == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let k = sp.n - 1;
    if rho <= SERIES_SWITCH {
        let x = rho * rho;
        let mut sum = 0.0;
        let mut pow = 1.0;
        for (j, &b) in sp.series.iter().enumerate() {
            let term = b * pow / (k as usize + 2 * j + 1) as f64;
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
            pow *= x;
        }
        return Ok(sp.sphere_area().ln() + (k + 1) as f64 * rho.ln() + sum.ln());
    }
    // sinh^k r = 2^{-k} Σ_j C(k,j) (-1)^j e^{(k-2j) r}; integrate and factor e^{kρ}.
    let kf = k as f64;
    let row = binomial_row(k);
    let e_k = (-kf * rho).exp();
    let mut sum = 0.0;
    for (j, &c) in row.iter().enumerate() {
        let d = k as i64 - 2 * j as i64;
        let term = if d == 0 {
            rho * e_k
        } else {
            ((-2.0 * j as f64 * rho).exp() - e_k) / d as f64
        };
        sum += if j % 2 == 0 { c * term } else { -c * term };
    }
    Ok(sp.sphere_area().ln() - kf * std::f64::consts::LN_2 + kf * rho + sum.ln())
}

/// Hyperbolic volume `Φ(ρ)` of the geodesic ball of radius `ρ`.
pub fn ball_volume(rho: f64, sp: &SpaceParams) -> Result<f64> {
    Ok(ln_ball_volume(rho, sp)?.exp())
}

fn inverse_root_config() -> RootConfig {
    RootConfig {
        abs_tol: 1e-13,
        rel_tol: 0.0,
        max_iter: 400,
    }
}

/// `F(s)`: the geodesic radius of the ball with hyperbolic volume `s`.
pub fn inverse_volume(s: f64, sp: &SpaceParams) -> Result<f64> {
    check_volume(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    if s.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let y = s.ln();
    let g = |rho: f64| ln_ball_volume(rho, sp).unwrap_or(f64::NAN);
    let n = sp.n as f64;
    let kf = sp.k();
    let (mut lo, mut hi) = if s > 1e3 {
        // Φ(ρ) ~ n ω_n e^{kρ} / (k 2^k)
        let guess = (y + (kf * 2f64.powf(kf) / sp.sphere_area()).ln()) / kf;
        ((guess - 0.5).max(0.0), guess + 0.5)
    } else {
        // ω_n ρ^n <= Φ(ρ) <= ω_n ρ^n cosh^{k} ρ
        let up = (s / sp.omega_n).powf(1.0 / n);
        (up / up.cosh().powf(kf / n), up)
    };
    while lo > 0.0 && g(lo) > y {
        lo = (lo - 1.0).max(0.0) * 0.5;
    }
    while g(hi) < y {
        hi = 2.0 * hi + 1.0;
    }
    Ok(invert_monotone(g, y, lo, hi, &inverse_root_config())?)
}

/// `ln A(s)`.
pub fn ln_surface_measure(s: f64, sp: &SpaceParams) -> Result<f64> {
    let rho = inverse_volume(s, sp)?;
    Ok(ln_surface_at_radius(rho, sp))
}

fn ln_surface_at_radius(rho: f64, sp: &SpaceParams) -> f64 {
    if rho == 0.0 {
        return f64::NEG_INFINITY;
    }
    sp.sphere_area().ln() + sp.k() * ln_sinh(rho)
}

/// `A(s) = n ω_n sinh^{n-1}(F(s))`.
pub fn surface_measure(s: f64, sp: &SpaceParams) -> Result<f64> {
    Ok(ln_surface_measure(s, sp)?.exp())
}

/// Area of the geodesic sphere of radius `ρ`, i.e. `Φ'(ρ)`.
pub fn surface_measure_at_radius(rho: f64, sp: &SpaceParams) -> Result<f64> {
    check_radius(rho)?;
    Ok(ln_surface_at_radius(rho, sp).exp())
}

/// `A(s) / ((n-1) s)`, evaluated in log form so it stays accurate for huge `s`.
pub fn surface_ratio(s: f64, sp: &SpaceParams) -> Result<f64> {
    if !(s > 0.0) {
        return Err(domain("s", s, "s > 0"));
    }
    Ok((ln_surface_measure(s, sp)? - (sp.k() * s).ln()).exp())
}

/// Geodesic distance from the origin to a point of Euclidean norm `x_norm`.
pub fn hyperbolic_distance_from_origin(x_norm: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x_norm) {
        return Err(domain("x_norm", x_norm, "0 <= |x| < 1"));
    }
    Ok(2.0 * x_norm.atanh())
}

/// A radial function of the geodesic radius with two derivatives.
pub trait RadialFunction {
    fn value(&self, rho: f64) -> f64;
    fn d1(&self, rho: f64) -> f64;
    fn d2(&self, rho: f64) -> f64;
}

/// `Δ_g u = u'' + (n-1) coth(ρ) u'` for a radial `u`; at `ρ = 0` the
/// removable singularity gives `n u''(0)`.
pub fn radial_laplacian_geodesic<U: RadialFunction + ?Sized>(
    u: &U,
    rho: f64,
    sp: &SpaceParams,
) -> Result<f64> {
    check_radius(rho)?;
    if rho == 0.0 {
        return Ok(sp.n as f64 * u.d2(0.0));
    }
    Ok(u.d2(rho) + sp.k() / rho.tanh() * u.d1(rho))
}

/// Value of the volume-coordinate Laplacian, flagged when it had to be
/// taken one-sidedly at a segment breakpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLaplacian {
    pub value: f64,
    pub one_sided: bool,
}

/// `(A(s)^2 v'(s))'` — the Laplace–Beltrami operator of `x ↦ v(Φ(d(0,x)))`.
///
/// Analytic segments are differentiated exactly; sampled segments take a
/// centered difference of `A^2 v'` with the node spacing, using the stored
/// Hermite slopes for `v'` at `s` and its two neighbours.
pub fn laplacian_volume_coord(v: &RadialProfile, s: f64, sp: &SpaceParams) -> Result<PointLaplacian> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain("s", s, "0 < s < inf"));
    }
    let idx = v.segment_index(s);
    let seg = &v.segments()[idx];
    let one_sided = idx > 0 && ((s - seg.lo).abs() <= 1e-12 * s);
    let value = match &seg.kind {
        SegmentKind::Analytic(a) => {
            let rho = inverse_volume(s, sp)?;
            let area = ln_surface_at_radius(rho, sp).exp();
            let coth = 1.0 / rho.tanh();
            area * area * a.second_derivative(s) + 2.0 * sp.k() * coth * area * a.derivative(s)
        }
        SegmentKind::Sampled(c) => {
            let h = c.local_step(s);
            let (left, right) = match c.axis() {
                crate::profile::Axis::Log => (s * (-h).exp(), s * h.exp()),
                crate::profile::Axis::Linear => (s - h, s + h),
            };
            let left = left.max(seg.lo);
            let right = right.min(seg.hi);
            let flux = |t: f64| -> Result<f64> {
                let a = surface_measure(t, sp)?;
                Ok(a * a * c.derivative(t))
            };
            // three-point derivative on the non-uniform stencil
            let (h1, h2) = (s - left, right - s);
            let (fl, fc, fr) = (flux(left)?, flux(s)?, flux(right)?);
            (h1 * h1 * fr - h2 * h2 * fl + (h2 * h2 - h1 * h1) * fc) / (h1 * h2 * (h1 + h2))
        }
    };
    Ok(PointLaplacian { value, one_sided })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureConfig};

    fn sp(n: u32) -> SpaceParams {
        SpaceParams::new(n).unwrap()
    }

    #[test]
    fn omega_values() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn dimension_bounds() {
        assert!(SpaceParams::new(1).is_err());
        assert!(SpaceParams::new(65).is_err());
        assert!(SpaceParams::with_omega(3, -1.0).is_err());
    }

    #[test]
    fn volume_at_zero() {
        assert_eq!(ball_volume(0.0, &sp(3)).unwrap(), 0.0);
        assert!(ball_volume(-1.0, &sp(3)).is_err());
    }

    #[test]
    fn closed_forms_low_dimension() {
        for &rho in &[0.01, 0.3, 1.0, 1.49, 1.51, 3.0, 10.0, 40.0] {
            let v2 = ball_volume(rho, &sp(2)).unwrap();
            let c2 = 4.0 * PI * (0.5 * rho).sinh().powi(2);
            assert!((v2 / c2 - 1.0).abs() < 1e-12, "n=2 rho={rho}");
            let v3 = ball_volume(rho, &sp(3)).unwrap();
            let c3 = PI * ((2.0 * rho).sinh() - 2.0 * rho);
            // the closed form itself cancels badly for tiny rho
            let tol = if rho < 0.1 { 1e-8 } else { 1e-12 };
            assert!((v3 / c3 - 1.0).abs() < tol, "n=3 rho={rho}");
        }
    }

    #[test]
    fn volume_matches_quadrature_across_switch() {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-13);
        for n in 2..=8 {
            let p = sp(n);
            for &rho in &[0.2, 1.2, 1.5, 1.8, 5.0] {
                let q = integrate(|r: f64| r.sinh().powi(n as i32 - 1), 0.0, rho, &cfg).unwrap();
                let want = p.sphere_area() * q.value;
                let got = ball_volume(rho, &p).unwrap();
                assert!((got / want - 1.0).abs() < 1e-12, "n={n} rho={rho}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn inverse_round_trip_and_example() {
        let p2 = sp(2);
        let s = 2.0 * PI * (1f64.cosh() - 1.0);
        assert!((inverse_volume(s, &p2).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(inverse_volume(0.0, &p2).unwrap(), 0.0);
        assert!(inverse_volume(-1.0, &p2).is_err());
        for n in 2..=6 {
            let p = sp(n);
            for e in -3..=9 {
                let s = 10f64.powi(e);
                let back = ball_volume(inverse_volume(s, &p).unwrap(), &p).unwrap();
                assert!((back - s).abs() <= (1e-10 * s).max(1e-14), "n={n} s={s}");
            }
        }
    }

    #[test]
    fn inverse_asymptotics() {
        let p = sp(3);
        let c6 = inverse_volume(1e6, &p).unwrap() - 1e6f64.ln() / 2.0;
        let c9 = inverse_volume(1e9, &p).unwrap() - 1e9f64.ln() / 2.0;
        let limit = (2.0 * 4.0 / p.sphere_area()).ln() / 2.0;
        assert!((c6 - c9).abs() < 1e-4);
        assert!((c9 - limit).abs() < 1e-6);
    }

    #[test]
    fn surface_measure_values() {
        let p = sp(2);
        assert_eq!(surface_measure(0.0, &p).unwrap(), 0.0);
        let s = ball_volume(1.0, &p).unwrap();
        assert!((surface_measure(s, &p).unwrap() - 2.0 * PI * 1f64.sinh()).abs() < 1e-11);
        let r = surface_ratio(1e6, &sp(3)).unwrap();
        assert!(r > 1.0 && r < 1.01);
    }

    #[test]
    fn key_inequality() {
        for n in 2..=6 {
            let p = sp(n);
            let mut prev = f64::INFINITY;
            for k in 0..60 {
                let s = 1e-3 * 10f64.powf(k as f64 * 0.15);
                let r = surface_ratio(s, &p).unwrap();
                assert!(r > 1.0, "n={n} s={s}");
                assert!(r <= prev * (1.0 + 1e-12));
                prev = r;
            }
        }
    }

    #[test]
    fn distance_from_origin() {
        assert_eq!(hyperbolic_distance_from_origin(0.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((hyperbolic_distance_from_origin((e - 1.0) / (e + 1.0)).unwrap() - 1.0).abs() < 1e-14);
        assert!((hyperbolic_distance_from_origin(0.5).unwrap() - 3f64.ln()).abs() < 1e-14);
        assert!(hyperbolic_distance_from_origin(1.0).is_err());
    }

    struct Square;
    impl RadialFunction for Square {
        fn value(&self, rho: f64) -> f64 {
            rho * rho
        }
        fn d1(&self, rho: f64) -> f64 {
            2.0 * rho
        }
        fn d2(&self, _: f64) -> f64 {
            2.0
        }
    }

    struct One;
    impl RadialFunction for One {
        fn value(&self, _: f64) -> f64 {
            1.0
        }
        fn d1(&self, _: f64) -> f64 {
            0.0
        }
        fn d2(&self, _: f64) -> f64 {
            0.0
        }
    }

    #[test]
    fn geodesic_laplacian() {
        assert_eq!(radial_laplacian_geodesic(&One, 1.0, &sp(3)).unwrap(), 0.0);
        let got = radial_laplacian_geodesic(&Square, 1.0, &sp(2)).unwrap();
        assert!((got - (2.0 + 2.0 / 1f64.tanh())).abs() < 1e-14);
        assert_eq!(radial_laplacian_geodesic(&Square, 0.0, &sp(4)).unwrap(), 8.0);
        assert!(radial_laplacian_geodesic(&Square, -0.1, &sp(4)).is_err());
    }
}
