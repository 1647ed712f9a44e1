//! One-dimensional symmetrization in the volume coordinate.
//!
//! `|v|` is split into monotone pieces; the decreasing rearrangement is then
//! assembled band by band between consecutive endpoint levels. A band swept
//! by a single analytic piece maps to an exactly reparametrized analytic
//! segment; bands shared by several pieces are sampled by solving
//! `μ(t) = τ` with exact slopes.

use crate::error::{domain, Error, Result};
use crate::geometry::{ball_volume, hyperbolic_distance_from_origin, surface_measure_at_radius, RadialFunction, SpaceParams};
use crate::numerics::QuadratureConfig;
use crate::profile::{Analytic, AffineMap, Axis, PowerLog, RadialProfile, SampledCurve, Segment, SegmentKind};

const PROBES: usize = 400;
const MAX_BAND_NODES: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Direction {
    Decreasing,
    Increasing,
    Flat,
}

/// A sub-interval of one segment on which `|v|` is monotone.
#[derive(Debug, Clone)]
struct Piece<'a> {
    seg: &'a Segment,
    a: f64,
    b: f64,
    sign: f64,
    dir: Direction,
    // |v| at a and b (limits)
    ya: f64,
    yb: f64,
}

impl Piece<'_> {
    fn abs(&self, x: f64) -> f64 {
        self.sign * self.seg.value(x)
    }

    fn abs_slope(&self, x: f64) -> f64 {
        (self.sign * self.seg.derivative(x)).abs()
    }

    fn top(&self) -> f64 {
        self.ya.max(self.yb)
    }

    fn bottom(&self) -> f64 {
        self.ya.min(self.yb)
    }

    fn len(&self) -> f64 {
        self.b - self.a
    }

    /// Measure of `{x in piece : |v|(x) > t}`.
    fn measure_above(&self, t: f64) -> Result<f64> {
        match self.dir {
            Direction::Flat => Ok(if self.ya > t { self.len() } else { 0.0 }),
            _ if t >= self.top() => Ok(0.0),
            _ if t < self.bottom() => {
                if self.len().is_infinite() {
                    Err(Error::InfiniteMeasure { level: t })
                } else {
                    Ok(self.len())
                }
            }
            _ if t == self.bottom() => Ok(self.len()),
            Direction::Decreasing => Ok(self.crossing(t)? - self.a),
            Direction::Increasing => Ok(self.b - self.crossing(t)?),
        }
    }

    /// Location of the level crossing `|v| = t`, by bisection on the strict
    /// super-level predicate.
    fn crossing(&self, t: f64) -> Result<f64> {
        let inside = |x: f64| self.abs(x) > t;
        let dec = self.dir == Direction::Decreasing;
        let (mut lo, mut hi) = (self.a, self.b);
        if hi.is_infinite() {
            hi = lo.max(1.0);
            while inside(hi) {
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(Error::InfiniteMeasure { level: t });
                }
            }
        }
        // invariant: predicate(lo) == dec, predicate(hi) != dec
        let use_log = lo > 0.0 && hi / lo > 4.0;
        for _ in 0..2200 {
            let mid = if use_log && lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if !(mid > lo && mid < hi) {
                break;
            }
            if inside(mid) == dec {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(if dec { hi.min(self.b) } else { lo.max(self.a) })
    }
}

fn probe_points(seg: &Segment) -> Vec<f64> {
    match &seg.kind {
        SegmentKind::Sampled(c) => {
            let nodes = c.nodes();
            let mut xs = Vec::with_capacity(nodes.len() * 8);
            for w in nodes.windows(2) {
                for k in 0..8 {
                    xs.push(w[0] + (w[1] - w[0]) * k as f64 / 8.0);
                }
            }
            xs.push(*nodes.last().unwrap());
            xs
        }
        SegmentKind::Analytic(_) => {
            let mut xs = vec![seg.lo];
            xs.extend(seg.probes(PROBES));
            if seg.hi.is_finite() {
                xs.push(seg.hi);
            }
            xs
        }
    }
}

/// Bisection for a sign change of `f` between `lo` and `hi`.
fn sign_change(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let s_lo = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if (f(mid) > 0.0) == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn tail_limit(v: &RadialProfile, seg: &Segment) -> Result<f64> {
    let tb = v.tail_bound();
    if tb > 0.0 {
        return Ok(0.0);
    }
    let far = seg.probes(PROBES).last().copied().unwrap_or(1e12);
    Err(Error::InfiniteMeasure {
        level: seg.value(far).abs(),
    })
}

fn pieces(v: &RadialProfile) -> Result<Vec<Piece<'_>>> {
    let mut out = Vec::new();
    for seg in v.segments() {
        let xs = probe_points(seg);
        let mut cuts = vec![seg.lo];
        for w in xs.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let (y0, y1) = (seg.value(x0), seg.value(x1));
            if y0.is_finite() && y1.is_finite() && ((y0 > 0.0 && y1 < 0.0) || (y0 < 0.0 && y1 > 0.0)) {
                cuts.push(sign_change(|x| seg.value(x), x0, x1));
                continue;
            }
            let (d0, d1) = (seg.derivative(x0), seg.derivative(x1));
            if d0.is_finite() && d1.is_finite() && ((d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0)) {
                cuts.push(sign_change(|x| seg.derivative(x), x0, x1));
            }
        }
        cuts.push(seg.hi);
        cuts.dedup();
        let flat_all = xs.iter().all(|&x| seg.derivative(x) == 0.0);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(b > a) {
                continue;
            }
            let mid = if b.is_finite() {
                0.5 * (a + b)
            } else {
                a.max(1.0) * 2.0
            };
            let sign = if seg.value(mid) < 0.0 { -1.0 } else { 1.0 };
            let mut ya = (sign * seg.value(a)).max(0.0);
            let mut yb = if b.is_finite() {
                (sign * seg.value(b)).max(0.0)
            } else {
                tail_limit(v, seg)?
            };
            // exact zeros at sign changes
            if a > seg.lo && (seg.value(a).abs() <= 1e-12 * ya.max(yb).max(f64::MIN_POSITIVE)) {
                ya = ya.min(0.0);
            }
            if b < seg.hi && (seg.value(b).abs() <= 1e-12 * ya.max(yb).max(f64::MIN_POSITIVE)) {
                yb = yb.min(0.0);
            }
            if a == 0.0 && !ya.is_finite() {
                ya = f64::INFINITY;
            }
            let dir = if flat_all || ya == yb {
                Direction::Flat
            } else if ya > yb {
                Direction::Decreasing
            } else {
                Direction::Increasing
            };
            if dir == Direction::Flat && ya > 0.0 && b.is_infinite() {
                return Err(Error::InfiniteMeasure { level: ya });
            }
            out.push(Piece {
                seg,
                a,
                b,
                sign,
                dir,
                ya,
                yb,
            });
        }
    }
    Ok(out)
}

/// `μ_v(t) = |{s : |v(s)| > t}|`.
pub fn distribution_function(v: &RadialProfile, t: f64) -> Result<f64> {
    if !(t > 0.0) || t.is_nan() {
        return Err(domain("t", t, "t > 0"));
    }
    let ps = pieces(v)?;
    let mut total = 0.0;
    for p in &ps {
        total += p.measure_above(t)?;
    }
    Ok(total)
}

/// `f*`, the nonincreasing rearrangement of `|v|`.
pub fn decreasing_rearrangement(v: &RadialProfile) -> Result<RadialProfile> {
    if v.is_nonincreasing() && v.segments().iter().all(|seg| seg_min_nonneg(seg)) {
        return Ok(v.clone());
    }
    let ps = pieces(v)?;
    let mut levels: Vec<f64> = ps
        .iter()
        .flat_map(|p| [p.ya, p.yb])
        .filter(|&y| y > 0.0)
        .collect();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup();
    levels.push(0.0);

    let mut builder = RadialProfile::builder();
    let mut tau = 0.0;
    for k in 0..levels.len() - 1 {
        let (upper, lower) = (levels[k], levels[k + 1]);
        let plateau: f64 = ps
            .iter()
            .filter(|p| p.dir == Direction::Flat && p.ya == upper)
            .map(|p| p.len())
            .sum();
        if plateau > 0.0 {
            builder = builder.constant(tau + plateau, upper);
            tau += plateau;
        }
        let active: Vec<&Piece> = ps
            .iter()
            .filter(|p| p.dir != Direction::Flat && p.bottom() <= lower && p.top() >= upper)
            .collect();
        if active.is_empty() {
            continue;
        }
        let mut tau_end = tau;
        for p in &active {
            tau_end += p.measure_above(lower)? - p.measure_above(upper)?;
        }
        if tau_end.is_finite() && tau_end - tau <= 1e-14 * tau_end.max(1.0) {
            continue;
        }
        if let Some(kind) = single_analytic(&active, upper, tau)? {
            builder = builder.segment(tau_end, kind);
            if tau_end.is_infinite() {
                return builder.build();
            }
            tau = tau_end;
            continue;
        }
        if tau_end.is_infinite() || upper.is_infinite() {
            return Err(Error::Unsupported(format!(
                "unbounded level band ({lower}, {upper}) shared by {} pieces",
                active.len()
            )));
        }
        let curve = sample_band(&active, lower, upper, tau, tau_end)?;
        builder = builder.sampled(curve);
        tau = tau_end;
    }
    builder.constant(f64::INFINITY, 0.0).build()
}

fn seg_min_nonneg(seg: &Segment) -> bool {
    let mut xs = seg.probes(16);
    if seg.hi.is_finite() {
        xs.push(seg.hi);
    }
    xs.iter().all(|&x| seg.value(x) >= 0.0)
}

fn single_analytic(active: &[&Piece], upper: f64, tau: f64) -> Result<Option<SegmentKind>> {
    let [p] = active else { return Ok(None) };
    let SegmentKind::Analytic(a) = &p.seg.kind else {
        return Ok(None);
    };
    let above = p.measure_above(upper)?;
    let map = match p.dir {
        Direction::Decreasing => AffineMap {
            sign: 1.0,
            shift: p.a + above - tau,
        },
        Direction::Increasing => AffineMap {
            sign: -1.0,
            shift: p.b - above + tau,
        },
        Direction::Flat => unreachable!(),
    };
    let composed = match a.composed(&map) {
        Ok(c) => c,
        Err(Error::Unsupported(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(SegmentKind::Analytic(composed.scaled(p.sign))))
}

fn sample_band(active: &[&Piece], lower: f64, upper: f64, tau0: f64, tau1: f64) -> Result<SampledCurve> {
    let base: Vec<f64> = active.iter().map(|p| p.measure_above(upper)).collect::<Result<_>>()?;
    let eval = |t: f64| -> Result<(f64, f64)> {
        let mut tau = tau0;
        let mut inv_slope = 0.0;
        for (p, m0) in active.iter().zip(&base) {
            let m = p.measure_above(t)?;
            tau += m - m0;
            let x = match p.dir {
                Direction::Decreasing => p.a + m,
                _ => p.b - m,
            };
            inv_slope += 1.0 / p.abs_slope(x);
        }
        Ok((tau, -1.0 / inv_slope))
    };
    // nodes indexed by level, descending
    let mut ts: Vec<f64> = (0..=32).map(|k| upper - (upper - lower) * k as f64 / 32.0).collect();
    let mut pts: Vec<(f64, f64)> = ts.iter().map(|&t| eval(t)).collect::<Result<_>>()?;
    let n = pts.len();
    pts[0].0 = tau0;
    pts[n - 1].0 = tau1;
    let tol = 1e-11 * upper;
    loop {
        let curve = build_band_curve(&ts, &pts)?;
        let mut new_ts = Vec::with_capacity(ts.len() * 2);
        let mut new_pts = Vec::with_capacity(ts.len() * 2);
        let mut refined = false;
        for i in 0..ts.len() {
            new_ts.push(ts[i]);
            new_pts.push(pts[i]);
            if i + 1 == ts.len() {
                break;
            }
            let tm = 0.5 * (ts[i] + ts[i + 1]);
            let em = eval(tm)?;
            if ts.len() < MAX_BAND_NODES && (curve.value(em.0) - tm).abs() > tol {
                new_ts.push(tm);
                new_pts.push(em);
                refined = true;
            }
        }
        if !refined {
            return Ok(curve);
        }
        ts = new_ts;
        pts = new_pts;
    }
}

fn build_band_curve(ts: &[f64], pts: &[(f64, f64)]) -> Result<SampledCurve> {
    let mut nodes = Vec::with_capacity(ts.len());
    let mut vals = Vec::with_capacity(ts.len());
    let mut ders = Vec::with_capacity(ts.len());
    for (i, (&t, &(tau, d))) in ts.iter().zip(pts).enumerate() {
        let last = i + 1 == ts.len();
        if let Some(&prev) = nodes.last() {
            if !(tau > prev) {
                if last {
                    nodes.pop();
                    vals.pop();
                    ders.pop();
                } else {
                    continue;
                }
            }
        }
        nodes.push(tau);
        vals.push(t);
        ders.push(if d.is_finite() { d } else { 0.0 });
    }
    SampledCurve::with_derivatives(nodes, vals, &ders, Axis::Linear, true)
}

/// `f**(s) = (1/s) ∫_0^s f*`.
pub fn maximal_function(vstar: &RadialProfile) -> Result<RadialProfile> {
    let running = vstar.running_integral()?;
    let mut segments = Vec::with_capacity(vstar.segments().len());
    for seg in vstar.segments() {
        let v_lo = running.value(seg.lo)?;
        let kind = match &seg.kind {
            SegmentKind::Analytic(a) => match average_analytic(a, seg.lo, v_lo) {
                Some(k) => SegmentKind::Analytic(k),
                None => SegmentKind::Sampled(average_sampled(vstar, &running, seg)?),
            },
            SegmentKind::Sampled(c) => {
                let nodes = c.nodes().to_vec();
                let mut vals = Vec::with_capacity(nodes.len());
                let mut ders = Vec::with_capacity(nodes.len());
                for (k, &s) in nodes.iter().enumerate() {
                    if s == 0.0 {
                        vals.push(c.values()[0]);
                        ders.push(0.5 * c.node_derivative(0));
                        continue;
                    }
                    let avg = running.value(s)? / s;
                    vals.push(avg);
                    ders.push((c.values()[k] - avg) / s);
                }
                SegmentKind::Sampled(SampledCurve::with_derivatives(nodes, vals, &ders, c.axis(), true)?)
            }
        };
        segments.push(Segment {
            lo: seg.lo,
            hi: seg.hi,
            kind,
        });
    }
    RadialProfile::new(segments)
}

fn average_analytic(a: &Analytic, lo: f64, v_lo: f64) -> Option<Analytic> {
    let map = a.map();
    if let Some(poly) = a.as_plain() {
        let q = poly.antiderivative();
        let q_lo = q.eval(lo);
        if !q_lo.is_finite() {
            return None;
        }
        if lo == 0.0 && poly.eval(0.0).is_infinite() && q_lo != 0.0 {
            return None;
        }
        return Some(Analytic::new(q, AffineMap::IDENTITY, v_lo - q_lo, true));
    }
    if a.divides_by_s() {
        return None;
    }
    // V(s) = V(lo) + σ(Q(x) - Q(x_lo)) + c (s - lo), with s = σ(x - δ)
    let (sig, delta, c) = (map.sign, map.shift, a.offset());
    let q = a.poly().antiderivative();
    let x_lo = map.apply(lo);
    let numer = q.scaled(sig).plus(&PowerLog::affine(0.0, c * sig));
    let k = v_lo - sig * q.eval(x_lo) - c * sig * delta - c * lo;
    if !k.is_finite() {
        return None;
    }
    Some(Analytic::new(numer, map, k, true))
}

fn average_sampled(
    vstar: &RadialProfile,
    running: &crate::profile::RunningIntegral<'_>,
    seg: &Segment,
) -> Result<SampledCurve> {
    let hi = if seg.hi.is_finite() { seg.hi } else { return Err(Error::Unsupported("averaging an unbounded reparametrized tail".into())) };
    let lo = seg.lo;
    let nodes: Vec<f64> = (0..=256).map(|k| lo + (hi - lo) * k as f64 / 256.0).collect();
    let mut vals = Vec::with_capacity(nodes.len());
    let mut ders = Vec::with_capacity(nodes.len());
    for &s in &nodes {
        if s == 0.0 {
            vals.push(vstar.value(0.0));
            ders.push(0.5 * vstar.derivative(0.0));
            continue;
        }
        let avg = running.value(s)? / s;
        vals.push(avg);
        ders.push((seg.value(s) - avg) / s);
    }
    SampledCurve::with_derivatives(nodes, vals, &ders, Axis::Linear, true)
}

/// Both sides of `‖f**‖_p ≤ p' ‖f*‖_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl HardyReport {
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

pub fn hardy_check(vstar: &RadialProfile, p: f64) -> Result<HardyReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain("p", p, "1 < p < inf"));
    }
    if !vstar.is_nonincreasing() {
        return Err(Error::NotNonincreasing);
    }
    let cfg = QuadratureConfig::default();
    let fss = maximal_function(vstar)?;
    let lhs = fss.lp_pow(p, &cfg)?.powf(1.0 / p);
    let rhs = p / (p - 1.0) * vstar.lp_pow(p, &cfg)?.powf(1.0 / p);
    Ok(HardyReport {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-10),
    })
}

/// `min(1, s^{-1/p})` on `[0, e^L)`, zero beyond: the near-extremal Hardy family.
pub fn hardy_power_family(p: f64, log_truncation: f64) -> Result<RadialProfile> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain("p", p, "1 < p < inf"));
    }
    if !(log_truncation > 0.0) || !log_truncation.is_finite() {
        return Err(domain("log_truncation", log_truncation, "0 < L < inf"));
    }
    RadialProfile::builder()
        .constant(1.0, 1.0)
        .power(log_truncation.exp(), 1.0, -1.0 / p)
        .constant(f64::INFINITY, 0.0)
        .build()
}

/// `f♯(x) = f*(|B(0, d(0, x))|)`, as a function of the geodesic radius.
#[derive(Debug, Clone)]
pub struct Radialized {
    profile: RadialProfile,
    sp: SpaceParams,
}

pub fn radialize(vstar: &RadialProfile, sp: &SpaceParams) -> Result<Radialized> {
    if !vstar.is_nonincreasing() {
        return Err(Error::NotNonincreasing);
    }
    Ok(Radialized {
        profile: vstar.clone(),
        sp: sp.clone(),
    })
}

impl Radialized {
    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn at_radius(&self, rho: f64) -> Result<f64> {
        Ok(self.profile.value(ball_volume(rho, &self.sp)?))
    }

    /// Value at a point of the ball model with Euclidean norm `x_norm`.
    pub fn at_point(&self, x_norm: f64) -> Result<f64> {
        self.at_radius(hyperbolic_distance_from_origin(x_norm)?)
    }

    fn parts(&self, rho: f64) -> (f64, f64) {
        let s = ball_volume(rho, &self.sp).unwrap_or(f64::NAN);
        let a = surface_measure_at_radius(rho, &self.sp).unwrap_or(f64::NAN);
        (s, a)
    }
}

impl RadialFunction for Radialized {
    fn value(&self, rho: f64) -> f64 {
        self.at_radius(rho).unwrap_or(f64::NAN)
    }

    fn d1(&self, rho: f64) -> f64 {
        let (s, a) = self.parts(rho);
        self.profile.derivative(s) * a
    }

    fn d2(&self, rho: f64) -> f64 {
        let (s, a) = self.parts(rho);
        let da = if rho == 0.0 { 0.0 } else { self.sp.k() / rho.tanh() * a };
        self.profile.second_derivative(s) * a * a + self.profile.derivative(s) * da
    }
}
