use super::{band_constant, f_r, ExtremizerParams, GRID_LOG_RATIO_CAP};
use crate::error::{Error, Result};
use crate::geometry::{surface_measure, SpaceParams};
use crate::numerics::{gauss_legendre, integrate, GridSpec, QuadratureConfig};
use crate::profile::RadialProfile;
use crate::rearrangement::{decreasing_rearrangement, maximal_function};

/// Relative disagreement between the two cell rules above which the grid
/// is declared too coarse.
const GRID_TOLERANCE: f64 = 1e-9;

fn check_cover(v: &RadialProfile, grid: &GridSpec) -> Result<()> {
    for b in v.breakpoints() {
        let inside = b >= grid.s_min() * (1.0 - 1e-12) && b <= grid.s_max() * (1.0 + 1e-12);
        if !inside {
            return Err(Error::GridDoesNotCover {
                s_min: grid.s_min(),
                s_max: grid.s_max(),
                breakpoint: b,
            });
        }
    }
    Ok(())
}

/// `∫_s^∞ W(r)/A(r)^2 dr` at every grid node, with `W` a primitive-like
/// weight, returned as a profile with exact node slopes `-W/A^2`.
fn outer_integral<W>(weight: W, breakpoints: &[f64], tail_exponent: f64, sp: &SpaceParams, grid: &GridSpec) -> Result<RadialProfile>
where
    W: Fn(f64) -> Result<f64>,
{
    let nodes = grid.nodes();
    let n = nodes.len();
    let integrand = |r: f64| -> Result<f64> {
        let a = surface_measure(r, sp)?;
        Ok(weight(r)? / (a * a))
    };
    let (x4, w4) = gauss_legendre(4);
    let (x6, w6) = gauss_legendre(6);
    let rule = |xs: &[f64], ws: &[f64], lo: f64, hi: f64| -> Result<f64> {
        // in t = ln r
        let (tl, th) = (lo.ln(), hi.ln());
        let (c, h) = (0.5 * (tl + th), 0.5 * (th - tl));
        let mut acc = 0.0;
        for (x, w) in xs.iter().zip(ws) {
            let r = (c + h * x).exp();
            acc += w * integrand(r)? * r;
        }
        Ok(acc * h)
    };

    let mut cells = vec![0.0; n - 1];
    let mut err = 0.0;
    for k in 0..n - 1 {
        let (lo, hi) = (nodes[k], nodes[k + 1]);
        let mut cuts = vec![lo];
        cuts.extend(breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
        cuts.push(hi);
        for w in cuts.windows(2) {
            let a = rule(&x4, &w4, w[0], w[1])?;
            let b = rule(&x6, &w6, w[0], w[1])?;
            cells[k] += b;
            err += (a - b).abs();
        }
    }
    let s_max = nodes[n - 1];
    let cfg = QuadratureConfig::default().with_rel_tol(1e-12).with_tail(tail_exponent);
    let tail = integrate(|r| integrand(r).unwrap_or(f64::NAN), s_max, f64::INFINITY, &cfg)?.value;

    let mut values = vec![0.0; n];
    values[n - 1] = tail;
    for k in (0..n - 1).rev() {
        values[k] = values[k + 1] + cells[k];
    }
    if values[0] != 0.0 {
        let estimate = err / values[0].abs();
        if estimate > GRID_TOLERANCE {
            return Err(Error::GridTooCoarse {
                estimate,
                suggested_points: 2 * grid.points(),
            });
        }
    }
    let slopes: Vec<f64> = nodes.iter().map(|&r| integrand(r).map(|g| -g)).collect::<Result<_>>()?;
    RadialProfile::from_log_samples(nodes, values, Some(&slopes))
}

fn tail_exponent(v: &RadialProfile) -> Result<f64> {
    let b = v.tail_bound();
    if !(b > 0.0) {
        let last = v.segments().last().unwrap();
        return Err(Error::Divergent {
            lo: last.lo,
            hi: last.hi,
        });
    }
    // V(r) ~ r^{1-b} (log for b = 1), A^2 ~ r^2
    Ok(if b > 1.0 { 2.0 } else { 1.0 + b - 0.01 })
}

/// `Tv(s) = ∫_s^∞ A(r)^{-2} ∫_0^r v`, the radial inverse of `-Δ_g`,
/// sampled on the grid and extended by a constant below it and a fitted
/// power law beyond it.
pub fn apply_t(v: &RadialProfile, sp: &SpaceParams, grid: &GridSpec) -> Result<RadialProfile> {
    check_cover(v, grid)?;
    let running = v.running_integral()?;
    let q = tail_exponent(v)?;
    outer_integral(|r| running.value(r), &v.breakpoints(), q, sp, grid)
}

/// `v_{R,1}, …, v_{R,k}` with `v_{R,i+1} = T v_{R,i}` and `v_{R,0} = f_R`.
pub fn v_r_iterates(params: &ExtremizerParams, k: usize, grid: &GridSpec) -> Result<Vec<RadialProfile>> {
    if k > 0 && params.log_ratio() > GRID_LOG_RATIO_CAP {
        return Err(Error::InfeasibleGrid {
            log_ratio: params.log_ratio(),
            cap: GRID_LOG_RATIO_CAP,
        });
    }
    let mut out: Vec<RadialProfile> = Vec::with_capacity(k);
    let mut current = f_r(params);
    for _ in 0..k {
        let next = apply_t(&current, params.sp(), grid)?;
        out.push(next.clone());
        current = next;
    }
    Ok(out)
}

/// Outcome of clamping `v_{R,i}` into `[(1+ε)^{-2i} c^i f_R, c^i f_R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    /// `‖v - h‖_p` with `h` the clamped profile.
    pub w_norm: f64,
    /// `max |v - h|` over the grid.
    pub max_excess: f64,
    /// Share of nodes in `[10 s0, R/10]` left untouched by the clamp.
    pub untouched_fraction: f64,
    /// Number of nodes in `[10 s0, R/10]`.
    pub middle_nodes: usize,
}

/// Clamp check of the `i`-th iterate (`i >= 1`), sampled on the grid nodes.
pub fn sandwich_check(params: &ExtremizerParams, i: usize, v: &RadialProfile, grid: &GridSpec) -> Result<SandwichReport> {
    if i == 0 {
        return Err(crate::error::domain("i", 0.0, "i >= 1"));
    }
    let p = params.p();
    let f = f_r(params);
    let ci = band_constant(params.sp().n(), p).powi(i as i32);
    let lower_factor = (1.0 + params.eps()).powi(-2 * i as i32);
    let nodes = grid.nodes();
    let w: Vec<f64> = nodes
        .iter()
        .map(|&s| {
            let up = ci * f.value(s);
            let lo = lower_factor * up;
            let val = v.value(s);
            val - val.clamp(lo, up)
        })
        .collect();
    let (lo_mid, hi_mid) = (10.0 * params.s0(), params.r() / 10.0);
    let mut middle = 0usize;
    let mut untouched = 0usize;
    for (&s, &wk) in nodes.iter().zip(&w) {
        if s >= lo_mid && s <= hi_mid {
            middle += 1;
            if wk == 0.0 {
                untouched += 1;
            }
        }
    }
    // trapezoid in ln s, plus the constant part below the grid and the
    // power-law tail beyond it (where f_R = 0 and w = v)
    let mut acc = nodes[0] * w[0].abs().powf(p);
    for k in 0..nodes.len() - 1 {
        let h = (nodes[k + 1] / nodes[k]).ln();
        acc += 0.5 * h * (nodes[k] * w[k].abs().powf(p) + nodes[k + 1] * w[k + 1].abs().powf(p));
    }
    let s_max = *nodes.last().unwrap();
    let tb = v.tail_bound();
    if w.last().unwrap().abs() > 0.0 {
        if !(tb * p > 1.0) {
            return Err(Error::Divergent {
                lo: s_max,
                hi: f64::INFINITY,
            });
        }
        acc += s_max * w.last().unwrap().abs().powf(p) / (tb * p - 1.0);
    }
    Ok(SandwichReport {
        w_norm: acc.powf(1.0 / p),
        max_excess: w.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        untouched_fraction: if middle == 0 {
            1.0
        } else {
            untouched as f64 / middle as f64
        },
        middle_nodes: middle,
    })
}

/// `h(s) = ∫_s^∞ t f**(t) / A(t)^2 dt`, computed from the maximal function
/// of the rearrangement rather than from a running integral of `f`.
pub fn m2_majorant(f: &RadialProfile, sp: &SpaceParams, grid: &GridSpec) -> Result<RadialProfile> {
    let fstar = decreasing_rearrangement(f)?;
    check_cover(&fstar, grid)?;
    let fss = maximal_function(&fstar)?;
    let q = tail_exponent(&fstar)?;
    outer_integral(|t| Ok(t * fss.value(t)), &fss.breakpoints(), q, sp, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::laplacian_volume_coord;

    #[test]
    fn zero_maps_to_zero() {
        let sp = SpaceParams::new(3).unwrap();
        let grid = GridSpec::new(1e-3, 1e3, 64).unwrap();
        let t = apply_t(&RadialProfile::zero(), &sp, &grid).unwrap();
        assert_eq!(t.value(1.0), 0.0);
    }

    #[test]
    fn breakpoints_must_be_covered() {
        let sp = SpaceParams::new(3).unwrap();
        let grid = GridSpec::new(1e-3, 1e3, 64).unwrap();
        let v = RadialProfile::indicator(1e4, 1.0).unwrap();
        assert!(matches!(apply_t(&v, &sp, &grid), Err(Error::GridDoesNotCover { .. })));
    }

    #[test]
    fn coarse_grid_is_reported() {
        let sp = SpaceParams::new(3).unwrap();
        let grid = GridSpec::new(1e-3, 1e6, 8).unwrap();
        let v = RadialProfile::indicator(1.0, 1.0).unwrap();
        match apply_t(&v, &sp, &grid) {
            Err(Error::GridTooCoarse { suggested_points, .. }) => assert_eq!(suggested_points, 16),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn indicator_inverts_on_small_grid() {
        let sp = SpaceParams::new(3).unwrap();
        let grid = GridSpec::new(1e-2, 1e4, 1024).unwrap();
        let v = RadialProfile::indicator(1.0, 1.0).unwrap();
        let t = apply_t(&v, &sp, &grid).unwrap();
        assert!(t.is_nonincreasing());
        let nodes = grid.nodes();
        for k in [100usize, 300, 600, 900] {
            let s = nodes[k];
            let lap = laplacian_volume_coord(&t, s, &sp).unwrap().value;
            assert!((lap + v.value(s)).abs() < 1e-4 * v.value(s).abs().max(1e-300) || v.value(s) == 0.0 && lap.abs() < 1e-9, "s={s} lap={lap}");
        }
    }
}
