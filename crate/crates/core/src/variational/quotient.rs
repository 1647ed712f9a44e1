use super::norms::{grad_norm_volume, laplacian_norm_volume, lp_norm_volume};
use super::{PoincareParams, TestFunction};
use crate::error::{domain, Error, Result};
use crate::extremizers::{f_r, f_r_norm_p, v_r_iterates, ExtremizerParams, GRID_LOG_RATIO_CAP};
use crate::geometry::SpaceParams;
use crate::profile::RadialProfile;

/// Relative slack allowed on `lhs <= rhs` for quadrature noise.
pub const INEQUALITY_TOLERANCE: f64 = 1e-8;

/// A function whose Rayleigh quotient can be evaluated.
#[derive(Debug, Clone, Copy)]
pub enum Candidate<'a> {
    /// Closed-form radial function; orders 1 and 2.
    Test(&'a TestFunction),
    /// `chain[0] = w`, `chain[j] = T^j w`. The candidate of order `m` is
    /// `u = chain[m/2]`, so `(-Δ)^{m/2} u = w` and no second derivative is
    /// ever taken numerically.
    Chain(&'a [RadialProfile]),
    /// Arbitrary profile; orders 1 and 2 (the latter differentiated numerically).
    Profile(&'a RadialProfile),
}

/// `‖∇^j u‖_p` for the order-`m` candidate.
fn derivative_norm(c: &Candidate, m: u32, j: u32, p: f64, sp: &SpaceParams) -> Result<f64> {
    match c {
        Candidate::Test(u) => u.derivative_norm(j, p, sp),
        Candidate::Profile(v) => match j {
            0 => lp_norm_volume(v, p),
            1 => grad_norm_volume(v, p, sp),
            2 => laplacian_norm_volume(v, p, sp, None),
            _ => Err(Error::InsufficientSmoothness(format!(
                "profiles are differentiated at most twice, not {j} times"
            ))),
        },
        Candidate::Chain(chain) => {
            let k = (m / 2) as usize;
            if chain.len() <= k {
                return Err(Error::InsufficientSmoothness(format!(
                    "order {m} needs {} inverse-Laplacian iterates, chain has {}",
                    k,
                    chain.len().saturating_sub(1)
                )));
            }
            let level = &chain[k - (j / 2) as usize];
            if j % 2 == 0 {
                lp_norm_volume(level, p)
            } else {
                grad_norm_volume(level, p, sp)
            }
        }
    }
}

fn check_m(m: u32, c: &Candidate) -> Result<()> {
    if m == 0 {
        return Err(domain("m", 0.0, "m >= 1"));
    }
    if m > 2 && !matches!(c, Candidate::Chain(_)) {
        return Err(Error::InsufficientSmoothness(format!(
            "order {m} requires an inverse-Laplacian chain"
        )));
    }
    Ok(())
}

/// `‖u‖_p / ‖∇^m_g u‖_p`.
pub fn rayleigh_quotient(c: Candidate, m: u32, p: f64, sp: &SpaceParams) -> Result<f64> {
    check_m(m, &c)?;
    let num = derivative_norm(&c, m, 0, p, sp)?;
    let den = derivative_norm(&c, m, m, p, sp)?;
    if den == 0.0 {
        return Err(Error::ZeroDenominator("‖∇^m u‖_p vanishes"));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorollaryCheck {
    pub l: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    /// `‖u‖_p`
    pub lhs: f64,
    /// `C(n,m,p) ‖∇^m u‖_p`
    pub rhs: f64,
    /// `(rhs - lhs) / rhs`
    pub margin: f64,
    pub holds: bool,
    /// `u = 0`: both sides vanish.
    pub vacuous: bool,
    /// `‖∇^l u‖_p <= C(n, m-l, p) ‖∇^m u‖_p` for `1 <= l < m`.
    pub corollary: Vec<CorollaryCheck>,
}

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + INEQUALITY_TOLERANCE)
}

/// Both sides of `‖u‖_p <= C(n,m,p) ‖∇^m u‖_p`, plus the intermediate orders.
pub fn check_inequality(c: Candidate, m: u32, p: f64, sp: &SpaceParams) -> Result<InequalityReport> {
    check_m(m, &c)?;
    let params = PoincareParams::new(sp.n(), m, p)?;
    let top = derivative_norm(&c, m, m, p, sp)?;
    let lhs = derivative_norm(&c, m, 0, p, sp)?;
    if top == 0.0 && lhs == 0.0 {
        return Ok(InequalityReport {
            lhs,
            rhs: 0.0,
            margin: 0.0,
            holds: true,
            vacuous: true,
            corollary: Vec::new(),
        });
    }
    let rhs = params.constant() * top;
    let mut corollary = Vec::new();
    for l in 1..m {
        let lhs_l = derivative_norm(&c, m, l, p, sp)?;
        let rhs_l = params.corollary_constant(l)? * top;
        corollary.push(CorollaryCheck {
            l,
            lhs: lhs_l,
            rhs: rhs_l,
            holds: holds(lhs_l, rhs_l),
        });
    }
    Ok(InequalityReport {
        lhs,
        rhs,
        margin: (rhs - lhs) / rhs,
        holds: holds(lhs, rhs),
        vacuous: false,
        corollary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub r: f64,
    pub log_ratio: f64,
    pub quotient: f64,
    pub quotient_over_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub s0: f64,
    pub constant: f64,
    pub rows: Vec<SweepRow>,
    /// Limit of `quotient/C` from a fit `a + b / ln(R/s0)`.
    pub extrapolated: Option<f64>,
}

impl SweepTable {
    pub fn is_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].quotient_over_c > w[0].quotient_over_c)
    }
}

fn extrapolate(rows: &[SweepRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.log_ratio > 0.0)
        .map(|r| (1.0 / r.log_ratio, r.quotient_over_c))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(my - sxy / sxx * mx)
}

/// Quotients of the extremizing family along `ln(R/s0)`.
///
/// Order 1 uses `f_R` directly; order `m >= 2` uses `T^{m/2} f_R`, whose
/// top derivative is `f_R` (even `m`) or `∇f_R` (odd `m`).
pub fn sharpness_sweep(n: u32, m: u32, p: f64, eps: f64, log_ratios: &[f64]) -> Result<SweepTable> {
    let pp = PoincareParams::new(n, m, p)?;
    if log_ratios.is_empty() {
        return Err(Error::Unsupported("empty list of ln(R/s0) values".into()));
    }
    if log_ratios.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("ln(R/s0)", f64::NAN, "strictly increasing list"));
    }
    let sp = SpaceParams::new(n)?;
    let base = ExtremizerParams::new(&sp, p, eps, log_ratios[0])?;
    let k = (m / 2) as usize;
    if k > 0 {
        if let Some(&bad) = log_ratios.iter().find(|&&l| l > GRID_LOG_RATIO_CAP) {
            return Err(Error::InfeasibleGrid {
                log_ratio: bad,
                cap: GRID_LOG_RATIO_CAP,
            });
        }
    }
    let c = pp.constant();
    let mut rows = Vec::with_capacity(log_ratios.len());
    for &l in log_ratios {
        let params = base.with_log_ratio(l)?;
        let f = f_r(&params);
        let mut chain = vec![f];
        if k > 0 {
            let grid = params.default_grid()?;
            chain.extend(v_r_iterates(&params, k, &grid)?);
        }
        let num = lp_norm_volume(&chain[k], p)?;
        let den = if m % 2 == 0 {
            f_r_norm_p(&params).powf(1.0 / p)
        } else {
            grad_norm_volume(&chain[0], p, &sp)?
        };
        if den == 0.0 {
            return Err(Error::ZeroDenominator("‖∇^m u_R‖_p vanishes"));
        }
        let q = num / den;
        rows.push(SweepRow {
            r: params.r(),
            log_ratio: l,
            quotient: q,
            quotient_over_c: q / c,
        });
    }
    let extrapolated = extrapolate(&rows);
    Ok(SweepTable {
        s0: base.s0(),
        constant: c,
        rows,
        extrapolated,
    })
}
