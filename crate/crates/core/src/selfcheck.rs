//! Invariant suites run by the `selfcheck` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::extremizers::{apply_t, f_r, g_r1, sandwich_check, v_r_iterates, ExtremizerParams};
use crate::geometry::{ball_volume, inverse_volume, laplacian_volume_coord, SpaceParams};
use crate::numerics::{integrate, log_grid, GridSpec, QuadratureConfig};
use crate::profile::RadialProfile;
use crate::rearrangement::{
    decreasing_rearrangement, distribution_function, hardy_check, hardy_power_family, maximal_function,
};

/// Bumped whenever a tolerance below changes.
pub const TOLERANCE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub round_trip_rel: f64,
    pub round_trip_abs: f64,
    pub volume_rel: f64,
    pub equimeasurable_rel: f64,
    pub hardy_sharpness: f64,
    pub g_r1_rel: f64,
    pub t_inversion_rel: f64,
    pub sandwich_fraction: f64,
    pub sandwich_growth: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            round_trip_rel: 1e-10,
            round_trip_abs: 1e-14,
            volume_rel: 1e-10,
            equimeasurable_rel: 1e-8,
            hardy_sharpness: 0.99,
            g_r1_rel: 1e-10,
            t_inversion_rel: 1e-4,
            sandwich_fraction: 0.95,
            sandwich_growth: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the suite's figure of merit.
    pub worst: f64,
    /// Bound the figure of merit is held to.
    pub tolerance: f64,
    /// First failing assertion, or a summary when the suite passed.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckReport {
    pub tolerance_version: u32,
    pub tolerances: Tolerances,
    pub suites: Vec<SuiteResult>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfCheckOptions {
    pub seed: u64,
    /// Multiplies `ω_n`; anything but 1 is a deliberate fault.
    pub omega_scale: f64,
    pub tolerances: Tolerances,
}

impl Default for SelfCheckOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            omega_scale: 1.0,
            tolerances: Tolerances::default(),
        }
    }
}

impl SelfCheckOptions {
    fn space(&self, n: u32) -> Result<SpaceParams> {
        let sp = SpaceParams::new(n)?;
        if self.omega_scale == 1.0 {
            Ok(sp)
        } else {
            SpaceParams::with_omega(n, sp.omega_n() * self.omega_scale)
        }
    }
}

/// Random piecewise profile on `[0, L)`, zero beyond `L`.
///
/// With `monotone` the pieces are nonincreasing and nonnegative; otherwise
/// each piece has an arbitrary sign and slope.
pub fn random_profile<R: Rng + ?Sized>(rng: &mut R, monotone: bool) -> RadialProfile {
    let pieces = rng.random_range(1..=5usize);
    let mut b = RadialProfile::builder();
    let mut s = 0.0;
    let mut level: f64 = rng.random_range(1.0..4.0);
    for _ in 0..pieces {
        let hi = s + rng.random_range(0.2..3.0);
        if monotone {
            let end = level * rng.random_range(0.2..1.0);
            b = match rng.random_range(0..3) {
                0 => b.constant(hi, level),
                1 => b.affine(hi, level + (level - end) / (hi - s) * s, -(level - end) / (hi - s)),
                _ if s > 0.0 => {
                    let e = (end / level).ln() / (hi / s).ln();
                    b.power(hi, level / s.powf(e), e)
                }
                _ => b.constant(hi, level),
            };
            level = end * rng.random_range(0.5..0.95);
        } else {
            let (a, slope) = (rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0));
            b = match rng.random_range(0..3) {
                0 => b.constant(hi, a),
                1 => b.affine(hi, a - slope * s, slope),
                _ if s > 0.0 => b.log_affine(hi, a - slope * s.ln(), slope),
                _ => b.affine(hi, a, slope),
            };
        }
        s = hi;
    }
    b.constant(f64::INFINITY, 0.0).build().expect("random pieces are admissible")
}

type SuiteId = (&'static str, f64);

fn pass((name, tolerance): SuiteId, worst: f64, detail: String) -> SuiteResult {
    SuiteResult {
        name,
        passed: true,
        tolerance,
        worst,
        detail,
    }
}

fn fail((name, tolerance): SuiteId, worst: f64, detail: String) -> SuiteResult {
    SuiteResult {
        name,
        passed: false,
        tolerance,
        worst,
        detail,
    }
}

fn errored(id: SuiteId, e: crate::Error) -> SuiteResult {
    fail(id, f64::NAN, format!("error: {e}"))
}

/// `|Φ(F(s)) - s|` over `[1e-3, 1e6]` for `n = 2..5`.
pub fn round_trip_suite(opts: &SelfCheckOptions) -> SuiteResult {
    let id = ("round-trip", opts.tolerances.round_trip_rel);
    let tol = opts.tolerances;
    let grid = log_grid(&GridSpec::new(1e-3, 1e6, 60).expect("valid grid"));
    let mut worst = 0.0f64;
    for n in 2..=5 {
        let sp = match opts.space(n) {
            Ok(sp) => sp,
            Err(e) => return errored(id, e),
        };
        for &s in &grid {
            let back = match inverse_volume(s, &sp).and_then(|r| ball_volume(r, &sp)) {
                Ok(b) => b,
                Err(e) => return errored(id, e),
            };
            let err = (back - s).abs();
            let allowed = (tol.round_trip_rel * s).max(tol.round_trip_abs);
            worst = worst.max(err / s);
            if err > allowed {
                return fail(id, worst, format!("n={n} s={s:e}: |Φ(F(s)) - s| = {err:e} > {allowed:e}"));
            }
        }
    }
    pass(id, worst, format!("n=2..5, 60 volumes, max rel err {worst:e}"))
}

/// Closed-form ball volumes for `n = 2, 3` against quadrature of `nω_n sinh^{n-1}`.
pub fn volume_suite(opts: &SelfCheckOptions) -> SuiteResult {
    let id = ("closed-form-volume", opts.tolerances.volume_rel);
    let closed: [(u32, fn(f64) -> f64); 2] = [
        (2, |r: f64| 2.0 * std::f64::consts::PI * (r.cosh() - 1.0)),
        (3, |r: f64| std::f64::consts::PI * ((2.0 * r).sinh() - 2.0 * r)),
    ];
    let cfg = QuadratureConfig::default().with_rel_tol(1e-13);
    let mut worst = 0.0f64;
    for (n, exact) in closed {
        let sp = match opts.space(n) {
            Ok(sp) => sp,
            Err(e) => return errored(id, e),
        };
        for k in 0..20 {
            let rho = 0.05 * 1.3f64.powi(k);
            let k_exp = (n - 1) as i32;
            let quad = match integrate(|t: f64| sp.sphere_area() * t.sinh().powi(k_exp), 0.0, rho, &cfg) {
                Ok(e) => e.value,
                Err(e) => return errored(id, e.into()),
            };
            let lib = match ball_volume(rho, &sp) {
                Ok(v) => v,
                Err(e) => return errored(id, e),
            };
            let want = exact(rho);
            for (what, got) in [("quadrature", quad), ("ball_volume", lib)] {
                let rel = (got / want - 1.0).abs();
                worst = worst.max(rel);
                if !(rel <= opts.tolerances.volume_rel) {
                    return fail(id, worst, format!("n={n} ρ={rho:e}: {what} {got:e} vs closed form {want:e}"));
                }
            }
        }
    }
    pass(id, worst, format!("n=2,3, 20 radii, max rel err {worst:e}"))
}

/// Equimeasurability, `f** >= f*` and Hardy on random profiles, plus the
/// power-law family at `L = 200`.
pub fn hardy_suite(opts: &SelfCheckOptions, count: usize) -> SuiteResult {
    let id = ("hardy", opts.tolerances.equimeasurable_rel);
    let tol = opts.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0f64;
    for i in 0..count {
        let v = random_profile(&mut rng, false);
        let p = [1.5, 2.0, 3.0][i % 3];
        let mut run = || -> Result<Option<String>> {
            let vs = decreasing_rearrangement(&v)?;
            for &t in &[0.1, 0.5, 1.0, 2.0] {
                let (a, b) = (distribution_function(&v, t)?, distribution_function(&vs, t)?);
                let rel = (a - b).abs() / a.max(1e-300);
                worst = worst.max(rel);
                if rel > tol.equimeasurable_rel {
                    return Ok(Some(format!("profile {i}: μ_v({t}) = {a:e} but μ_v*({t}) = {b:e}")));
                }
            }
            let vss = maximal_function(&vs)?;
            for s in vs.breakpoints().iter().map(|b| b * 0.999).chain([0.01, 0.3, 1.7]) {
                if s > 0.0 && vss.value(s) < vs.value(s) * (1.0 - 1e-12) {
                    return Ok(Some(format!("profile {i}: f**({s}) < f*({s})")));
                }
            }
            let h = hardy_check(&vs, p)?;
            if !h.holds {
                return Ok(Some(format!("profile {i}, p={p}: {:e} > {:e}", h.lhs, h.rhs)));
            }
            Ok(None)
        };
        match run() {
            Ok(None) => {}
            Ok(Some(msg)) => return fail(id, worst, msg),
            Err(e) => return errored(id, e),
        }
    }
    let mut min_ratio = f64::INFINITY;
    for &p in &[1.5, 2.0, 3.0] {
        let r = match hardy_power_family(p, 200.0).and_then(|v| hardy_check(&v, p)) {
            Ok(r) => r.ratio(),
            Err(e) => return errored(id, e),
        };
        min_ratio = min_ratio.min(r);
        if r < tol.hardy_sharpness {
            return fail(id, worst, format!("power family p={p}: ratio {r} < {}", tol.hardy_sharpness));
        }
    }
    pass(id, worst, format!("{count} profiles; power family min ratio {min_ratio:.6}"))
}

fn g_r1_oracle(params: &ExtremizerParams) -> Result<f64> {
    let f = f_r(params);
    let run = f.running_integral()?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (s0, r) = (params.s0(), params.r());
    let mut abscissae = vec![s0, r, 2.0 * r, 0.5 * s0, 4.0 * r];
    while abscissae.len() < 200 {
        abscissae.push(s0 * 1e-3 * (3.0 * r / s0 * 1e3).powf(rng.random_range(0.0..1.0)));
    }
    let mut worst = 0.0f64;
    for s in abscissae {
        let want = run.value(s)? / s;
        let got = g_r1(params, s)?;
        worst = worst.max((got / want - 1.0).abs());
    }
    Ok(worst)
}

/// Explicit `g_{R,1}` against the running average of `f_R`.
pub fn g_r1_suite(opts: &SelfCheckOptions) -> SuiteResult {
    let id = ("g_R1-oracle", opts.tolerances.g_r1_rel);
    let mut worst = 0.0f64;
    for &(n, p) in &[(3u32, 2.0), (2, 1.5), (4, 3.0)] {
        let res = opts
            .space(n)
            .and_then(|sp| ExtremizerParams::new(&sp, p, 0.01, 10.0))
            .and_then(|params| g_r1_oracle(&params));
        match res {
            Ok(w) => {
                worst = worst.max(w);
                if !(w <= opts.tolerances.g_r1_rel) {
                    return fail(id, worst, format!("n={n} p={p}: rel err {w:e}"));
                }
            }
            Err(e) => return errored(id, e),
        }
    }
    pass(id, worst, format!("200 abscissae per case, max rel err {worst:e}"))
}

/// Worst `|-Δ(T v) - v| / v` over interior nodes away from the breakpoints of `v`.
pub fn t_inversion_error(v: &RadialProfile, sp: &SpaceParams, grid: &GridSpec) -> Result<f64> {
    let tv = apply_t(v, sp, grid)?;
    let nodes = grid.nodes();
    let bps = v.breakpoints();
    let mut worst = 0.0f64;
    for k in 1..nodes.len() - 1 {
        let (lo, hi, s) = (nodes[k - 1], nodes[k + 1], nodes[k]);
        let want = v.value(s);
        if want == 0.0 || bps.iter().any(|&b| b >= lo && b <= hi) {
            continue;
        }
        let lap = laplacian_volume_coord(&tv, s, sp)?.value;
        worst = worst.max(((-lap) / want - 1.0).abs());
    }
    Ok(worst)
}

/// `-Δ_g(T f_R) = f_R` on the default grid, `ln(R/s0) = 10`.
pub fn t_inversion_suite(opts: &SelfCheckOptions) -> SuiteResult {
    let id = ("T-inversion", opts.tolerances.t_inversion_rel);
    let res = opts.space(3).and_then(|sp| {
        let params = ExtremizerParams::new(&sp, 2.0, 0.05, 10.0)?;
        t_inversion_error(&f_r(&params), &sp, &params.default_grid()?)
    });
    match res {
        Ok(w) if w <= opts.tolerances.t_inversion_rel => pass(id, w, format!("max rel err {w:e}")),
        Ok(w) => fail(id, w, format!("max rel err {w:e} > {:e}", opts.tolerances.t_inversion_rel)),
        Err(e) => errored(id, e),
    }
}

/// Clamp statistics of `v_{R,1}` at two values of `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichGrowth {
    pub untouched_fraction: f64,
    pub w_norm: f64,
    pub w_norm_larger: f64,
}

impl SandwichGrowth {
    pub fn growth(&self) -> f64 {
        self.w_norm_larger / self.w_norm
    }
}

/// Runs the clamp check of `v_{R,1}` at `ln(R/s0) = log_ratio` and `log_ratio + 10`.
pub fn sandwich_growth(sp: &SpaceParams, p: f64, eps: f64, log_ratio: f64) -> Result<SandwichGrowth> {
    let base = ExtremizerParams::new(sp, p, eps, log_ratio)?;
    let mut out = Vec::with_capacity(2);
    for l in [log_ratio, log_ratio + 10.0] {
        let params = base.with_log_ratio(l)?;
        let grid = params.default_grid()?;
        let v1 = v_r_iterates(&params, 1, &grid)?.remove(0);
        out.push(sandwich_check(&params, 1, &v1, &grid)?);
    }
    Ok(SandwichGrowth {
        untouched_fraction: out[0].untouched_fraction.min(out[1].untouched_fraction),
        w_norm: out[0].w_norm,
        w_norm_larger: out[1].w_norm,
    })
}

pub fn sandwich_suite(opts: &SelfCheckOptions) -> SuiteResult {
    let id = ("sandwich", opts.tolerances.sandwich_growth);
    let tol = opts.tolerances;
    match opts.space(3).and_then(|sp| sandwich_growth(&sp, 2.0, 0.05, 30.0)) {
        Ok(g) => {
            let detail = format!(
                "untouched fraction {:.4}, ‖w‖ growth {:.4}",
                g.untouched_fraction,
                g.growth()
            );
            if g.untouched_fraction >= tol.sandwich_fraction && g.growth() <= tol.sandwich_growth {
                pass(id, g.growth(), detail)
            } else {
                fail(id, g.growth(), detail)
            }
        }
        Err(e) => errored(id, e),
    }
}

pub fn run_selfcheck(opts: &SelfCheckOptions) -> SelfCheckReport {
    SelfCheckReport {
        tolerance_version: TOLERANCE_VERSION,
        tolerances: opts.tolerances,
        suites: vec![
            round_trip_suite(opts),
            volume_suite(opts),
            hardy_suite(opts, 15),
            g_r1_suite(opts),
            t_inversion_suite(opts),
            sandwich_suite(opts),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_profiles_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let v = random_profile(&mut rng, true);
            assert!(v.is_nonincreasing());
            assert!(v.value(0.0) > 0.0);
            random_profile(&mut rng, false);
        }
    }

    #[test]
    fn corrupted_omega_breaks_volumes_only() {
        let opts = SelfCheckOptions {
            omega_scale: 1.001,
            ..Default::default()
        };
        assert!(!volume_suite(&opts).passed);
        assert!(round_trip_suite(&opts).passed);
        assert!(volume_suite(&SelfCheckOptions::default()).passed);
    }
}
