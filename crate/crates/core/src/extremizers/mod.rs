//! The extremizing family `f_R`, its running average `g_{R,1}`, the weight
//! `φ`, and the inverse-Laplacian iterates built on them.

mod operator;

pub use operator::{apply_t, m2_majorant, sandwich_check, v_r_iterates, SandwichReport};

use crate::error::{domain, Error, Result};
use crate::geometry::{surface_measure, surface_ratio, SpaceParams};
use crate::numerics::{integrate, Estimate, GridSpec, QuadratureConfig};
use crate::profile::{AffineMap, Analytic, PowerLog, RadialProfile, SegmentKind, Term};

/// Largest `ln(R/s0)` for which grid-based iterates are attempted.
pub const GRID_LOG_RATIO_CAP: f64 = 60.0;

/// Points of the default grid used by the iterates.
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// `s0` search grid: log-spaced volumes in `[1e-3, 1e15]`, 20 per decade.
pub fn s0_probe_grid() -> Vec<f64> {
    (0..=360).map(|k| 10f64.powf(-3.0 + k as f64 / 20.0)).collect()
}

/// Smallest probe volume above which `A(s) <= (1+ε)(n-1)s` holds at every probe.
pub fn select_s0(sp: &SpaceParams, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(domain("eps", eps, "0 < eps < inf"));
    }
    let probes = s0_probe_grid();
    let mut chosen = None;
    for &s in probes.iter().rev() {
        if surface_ratio(s, sp)? <= 1.0 + eps {
            chosen = Some(s);
        } else {
            break;
        }
    }
    chosen.ok_or(Error::NoThreshold { eps })
}

/// `pp'/(n-1)^2`, the gain of one inverse Laplacian on the extremizers.
pub fn band_constant(n: u32, p: f64) -> f64 {
    let k = (n - 1) as f64;
    p * p / (p - 1.0) / (k * k)
}

#[derive(Debug, Clone)]
pub struct ExtremizerParams {
    sp: SpaceParams,
    p: f64,
    eps: f64,
    s0: f64,
    log_ratio: f64,
}

impl ExtremizerParams {
    /// `s0` from [`select_s0`], `R = s0 e^{log_ratio}`.
    pub fn new(sp: &SpaceParams, p: f64, eps: f64, log_ratio: f64) -> Result<Self> {
        let s0 = select_s0(sp, eps)?;
        Self::with_s0(sp, p, eps, s0, log_ratio)
    }

    pub fn with_s0(sp: &SpaceParams, p: f64, eps: f64, s0: f64, log_ratio: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(domain("p", p, "1 < p < inf"));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(domain("eps", eps, "0 < eps < inf"));
        }
        if !(s0 > 0.0) || !s0.is_finite() {
            return Err(domain("s0", s0, "0 < s0 < inf"));
        }
        if !(log_ratio >= 0.0) || !(s0 * log_ratio.exp() * 2.0).is_finite() {
            return Err(domain("ln(R/s0)", log_ratio, "R >= s0 and 2R finite"));
        }
        Ok(Self {
            sp: sp.clone(),
            p,
            eps,
            s0,
            log_ratio,
        })
    }

    /// Same space, exponent and `s0`, different `R`.
    pub fn with_log_ratio(&self, log_ratio: f64) -> Result<Self> {
        Self::with_s0(&self.sp, self.p, self.eps, self.s0, log_ratio)
    }

    pub fn sp(&self) -> &SpaceParams {
        &self.sp
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn log_ratio(&self) -> f64 {
        self.log_ratio
    }

    pub fn r(&self) -> f64 {
        if self.log_ratio == 0.0 {
            self.s0
        } else {
            self.s0 * self.log_ratio.exp()
        }
    }

    /// `[s0·1e-6, 2R·1e3]` with [`DEFAULT_GRID_POINTS`] log-spaced nodes.
    pub fn default_grid(&self) -> Result<GridSpec> {
        self.grid(DEFAULT_GRID_POINTS)
    }

    pub fn grid(&self, points: usize) -> Result<GridSpec> {
        Ok(GridSpec::new(self.s0 * 1e-6, 2.0 * self.r() * 1e3, points)?)
    }
}

/// `s0^{-1/p}` on `[0, s0)`, `s^{-1/p}` on `[s0, R)`, `R^{-1/p}(2 - s/R)` on
/// `[R, 2R)`, zero afterwards.
pub fn f_r(params: &ExtremizerParams) -> RadialProfile {
    let (p, s0, r) = (params.p, params.s0, params.r());
    // R^{-1/p}(2 - s/R) = R^{-1-1/p} x with x = 2R - s
    let ramp = Analytic::new(
        PowerLog::power(r.powf(-1.0 - 1.0 / p), 1.0),
        AffineMap {
            sign: -1.0,
            shift: 2.0 * r,
        },
        0.0,
        false,
    );
    RadialProfile::builder()
        .constant(s0, s0.powf(-1.0 / p))
        .power(r, 1.0, -1.0 / p)
        .segment(2.0 * r, SegmentKind::Analytic(ramp))
        .constant(f64::INFINITY, 0.0)
        .build()
        .expect("f_R partition is valid")
}

/// `∫ f_R^p = 1 + ln(R/s0) + 1/(p+1)`.
pub fn f_r_norm_p(params: &ExtremizerParams) -> f64 {
    1.0 + params.log_ratio + 1.0 / (params.p + 1.0)
}

fn g_r1_coefficients(params: &ExtremizerParams) -> (f64, f64, f64, f64) {
    let (p, pc, s0, r) = (params.p, params.p_conj(), params.s0, params.r());
    let k0 = s0.powf(1.0 - 1.0 / p) / (p - 1.0);
    let r1 = r.powf(1.0 - 1.0 / p);
    let c3 = (pc - 1.5) * r1 - k0;
    let c4 = pc * r1 - k0 + 0.5 * r1;
    (k0, r1, c3, c4)
}

/// `g_{R,1}(s) = (1/s) ∫_0^s f_R`, from its branch formulas.
pub fn g_r1(params: &ExtremizerParams, s: f64) -> Result<f64> {
    if !(s > 0.0) || s.is_nan() {
        return Err(domain("s", s, "s > 0"));
    }
    let (p, pc, s0, r) = (params.p, params.p_conj(), params.s0, params.r());
    let (k0, _, c3, c4) = g_r1_coefficients(params);
    Ok(if s < s0 {
        s0.powf(-1.0 / p)
    } else if s < r {
        pc * s.powf(-1.0 / p) - k0 / s
    } else if s < 2.0 * r {
        c3 / s + 2.0 * r.powf(-1.0 / p) - r.powf(-1.0 - 1.0 / p) * s / 2.0
    } else {
        c4 / s
    })
}

/// `g_{R,1}` as an analytic profile.
pub fn g_r1_profile(params: &ExtremizerParams) -> RadialProfile {
    let (p, pc, s0, r) = (params.p, params.p_conj(), params.s0, params.r());
    let (k0, _, c3, c4) = g_r1_coefficients(params);
    let t = |coef: f64, exp: f64| Term {
        coef,
        exp,
        log_pow: 0,
    };
    RadialProfile::builder()
        .constant(s0, s0.powf(-1.0 / p))
        .analytic(r, PowerLog::from_terms(vec![t(pc, -1.0 / p), t(-k0, -1.0)]))
        .analytic(
            2.0 * r,
            PowerLog::from_terms(vec![
                t(c3, -1.0),
                t(2.0 * r.powf(-1.0 / p), 0.0),
                t(-0.5 * r.powf(-1.0 - 1.0 / p), 1.0),
            ]),
        )
        .power(f64::INFINITY, c4, -1.0)
        .build()
        .expect("g_R1 partition is valid")
}

/// `∫_R^∞ g_{R,1}^p ds`.
pub fn g_r1_tail_pow(params: &ExtremizerParams) -> Result<f64> {
    let (p, r) = (params.p, params.r());
    let (_, _, _, c4) = g_r1_coefficients(params);
    let cfg = QuadratureConfig::default().with_rel_tol(1e-12);
    let middle = integrate(|s| g_r1(params, s).map(|g| g.powf(p)).unwrap_or(f64::NAN), r, 2.0 * r, &cfg)?.value;
    let far = c4.powf(p) * (2.0 * r).powf(1.0 - p) / (p - 1.0);
    Ok(middle + far)
}

/// `φ(s) = ∫_s^∞ A(t)^{-p'} dt`; the estimate records where the tail was cut.
pub fn phi(s: f64, p: f64, sp: &SpaceParams) -> Result<Estimate> {
    phi_with(s, p, sp, &QuadratureConfig::default())
}

pub fn phi_with(s: f64, p: f64, sp: &SpaceParams, cfg: &QuadratureConfig) -> Result<Estimate> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(domain("s", s, "0 < s < inf"));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain("p", p, "1 < p < inf"));
    }
    let pc = p / (p - 1.0);
    let f = |t: f64| surface_measure(t, sp).map(|a| a.powf(-pc)).unwrap_or(f64::NAN);
    Ok(integrate(f, s, f64::INFINITY, &cfg.with_tail(pc))?)
}

/// `(n-1)^{-p'} (p-1) b^{-1/(p-1)}`, the power-law majorant of `φ(b)`.
pub fn phi_upper_bound(b: f64, p: f64, n: u32) -> f64 {
    ((n - 1) as f64).powf(-p / (p - 1.0)) * (p - 1.0) * b.powf(-1.0 / (p - 1.0))
}
