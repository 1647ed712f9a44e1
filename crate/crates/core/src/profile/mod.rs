//! Radial profiles: functions of the volume coordinate `s ∈ [0, ∞)`.
//!
//! A [`RadialProfile`] is an ordered partition of `[0, ∞)` into segments.
//! Each segment is either analytic (a power-log sum, possibly composed with
//! a reflection/shift and divided by `s`) or sampled (monotone Hermite
//! interpolation on a node list). The last segment is always analytic and
//! unbounded; its decay exponent is the profile's `tail_bound`.

mod powerlog;
mod sampled;

pub use powerlog::{PowerLog, Term};
pub use sampled::{Axis, SampledCurve};

use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadratureConfig};

/// `x = sign · s + shift`, with `sign = ±1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub sign: f64,
    pub shift: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        sign: 1.0,
        shift: 0.0,
    };

    pub fn apply(&self, s: f64) -> f64 {
        if self.sign > 0.0 {
            s + self.shift
        } else {
            self.shift - s
        }
    }

    pub fn is_identity(&self) -> bool {
        self.sign > 0.0 && self.shift == 0.0
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            sign: self.sign * other.sign,
            shift: self.sign * other.shift + self.shift,
        }
    }
}

/// `v(s) = (offset + poly(map(s))) / s^{divide_by_s}`.
///
/// With an identity map the offset and the division are folded into `poly`,
/// so the extra fields only survive on reflected or shifted segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Analytic {
    poly: PowerLog,
    map: AffineMap,
    offset: f64,
    divide_by_s: bool,
}

impl Analytic {
    pub fn new(poly: PowerLog, map: AffineMap, offset: f64, divide_by_s: bool) -> Self {
        if map.is_identity() {
            let mut p = poly.plus(&PowerLog::constant(offset));
            if divide_by_s {
                p = p.times_power(-1.0);
            }
            return Self::plain(p);
        }
        Self {
            poly,
            map,
            offset,
            divide_by_s,
        }
    }

    pub fn plain(poly: PowerLog) -> Self {
        Self {
            poly,
            map: AffineMap::IDENTITY,
            offset: 0.0,
            divide_by_s: false,
        }
    }

    pub fn poly(&self) -> &PowerLog {
        &self.poly
    }

    pub fn map(&self) -> AffineMap {
        self.map
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn divides_by_s(&self) -> bool {
        self.divide_by_s
    }

    /// The underlying power-log sum when the segment is a plain function of `s`.
    pub fn as_plain(&self) -> Option<&PowerLog> {
        self.map.is_identity().then_some(&self.poly)
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero() && self.offset == 0.0
    }

    /// Reparametrize: `v ∘ m`.
    pub fn composed(&self, m: &AffineMap) -> Result<Analytic> {
        if self.divide_by_s && !m.is_identity() {
            // (v∘m)(s) would divide by m(s), not s
            return Err(Error::Unsupported("reparametrizing an s-divided segment".into()));
        }
        Ok(Analytic::new(self.poly.clone(), self.map.compose(m), self.offset, self.divide_by_s))
    }

    pub fn scaled(&self, c: f64) -> Analytic {
        Analytic {
            poly: self.poly.scaled(c),
            offset: self.offset * c,
            ..self.clone()
        }
    }

    fn numerator(&self, s: f64) -> (f64, f64, f64) {
        let x = self.map.apply(s);
        let d1 = self.poly.derivative();
        let d2 = d1.derivative();
        (
            self.offset + self.poly.eval(x),
            self.map.sign * d1.eval(x),
            d2.eval(x),
        )
    }

    pub fn value(&self, s: f64) -> f64 {
        let x = self.map.apply(s);
        let n = self.offset + self.poly.eval(x);
        if self.divide_by_s {
            n / s
        } else {
            n
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let (n, n1, _) = self.numerator(s);
        if self.divide_by_s {
            n1 / s - n / (s * s)
        } else {
            n1
        }
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        let (n, n1, n2) = self.numerator(s);
        if self.divide_by_s {
            n2 / s - 2.0 * n1 / (s * s) + 2.0 * n / (s * s * s)
        } else {
            n2
        }
    }

    /// Closed-form `∫_a^b v ds` when the integrand allows one.
    fn integral_closed(&self, a: f64, b: f64) -> Option<f64> {
        if self.divide_by_s {
            return None;
        }
        let q = self.poly.antiderivative();
        let (xa, xb) = (self.map.apply(a), self.map.apply(b));
        let span = if b.is_infinite() { f64::INFINITY } else { b - a };
        let offset_part = if self.offset == 0.0 { 0.0 } else { self.offset * span };
        Some(self.map.sign * (q.eval(xb) - q.eval(xa)) + offset_part)
    }

    /// Growth exponent of `|v(s)|` as `s → ∞` (negative means decay).
    fn growth(&self) -> f64 {
        let mut g = self.poly.growth_exponent().unwrap_or(f64::NEG_INFINITY);
        if self.offset != 0.0 {
            g = g.max(0.0);
        }
        if self.divide_by_s {
            g -= 1.0;
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SegmentKind {
    Analytic(Analytic),
    Sampled(SampledCurve),
}

/// Segment on `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn value(&self, s: f64) -> f64 {
        match &self.kind {
            SegmentKind::Analytic(a) => a.value(s),
            SegmentKind::Sampled(c) => c.value(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match &self.kind {
            SegmentKind::Analytic(a) => a.derivative(s),
            SegmentKind::Sampled(c) => c.derivative(s),
        }
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        match &self.kind {
            SegmentKind::Analytic(a) => a.second_derivative(s),
            SegmentKind::Sampled(c) => c.second_derivative(s),
        }
    }

    /// Probe abscissae spread over the segment (log-spaced when it spans
    /// decades, capped at `lo·1e12` for the unbounded tail).
    pub fn probes(&self, count: usize) -> Vec<f64> {
        let lo = self.lo;
        let hi = if self.hi.is_finite() {
            self.hi
        } else if lo > 0.0 {
            lo * 1e12
        } else {
            1e12
        };
        let log = self.hi.is_infinite() || (lo > 0.0 && hi / lo > 10.0);
        (1..=count)
            .map(|k| {
                let f = k as f64 / (count + 1) as f64;
                if log {
                    let a = if lo > 0.0 { lo } else { hi * 1e-12 };
                    (a.ln() + f * (hi.ln() - a.ln())).exp()
                } else {
                    lo + f * (hi - lo)
                }
            })
            .collect()
    }
}

/// See the module documentation.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    segments: Vec<Segment>,
    tail_bound: f64,
    nonincreasing: bool,
}

impl RadialProfile {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidProfile("no segments".into()));
        }
        if segments[0].lo != 0.0 {
            return Err(Error::InvalidProfile("first segment must start at 0".into()));
        }
        for w in segments.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(Error::InvalidProfile(format!(
                    "gap or overlap between {} and {}",
                    w[0].hi, w[1].lo
                )));
            }
        }
        for seg in &segments {
            if !(seg.hi > seg.lo) {
                return Err(Error::InvalidProfile(format!(
                    "empty segment [{}, {})",
                    seg.lo, seg.hi
                )));
            }
            if let SegmentKind::Sampled(c) = &seg.kind {
                if c.first() != seg.lo || c.last() != seg.hi {
                    return Err(Error::InvalidProfile(
                        "sampled segment must span exactly its nodes".into(),
                    ));
                }
            }
            if seg.probes(9).iter().any(|&s| !seg.value(s).is_finite()) {
                return Err(Error::InvalidProfile(format!(
                    "non-finite values on [{}, {})",
                    seg.lo, seg.hi
                )));
            }
        }
        let last = segments.last().unwrap();
        if last.hi != f64::INFINITY {
            return Err(Error::InvalidProfile("last segment must be unbounded".into()));
        }
        let tail_bound = match &last.kind {
            SegmentKind::Analytic(a) if a.is_zero() => f64::INFINITY,
            SegmentKind::Analytic(a) => {
                if a.map.sign < 0.0 {
                    return Err(Error::InvalidProfile("reflected tail segment".into()));
                }
                let g = a.growth();
                // log factors make the pure power only an asymptotic majorant
                if a.poly.has_logs() {
                    -g - 1e-3
                } else {
                    -g
                }
            }
            SegmentKind::Sampled(_) => unreachable!("sampled segments are bounded"),
        };
        let mut p = Self {
            segments,
            tail_bound,
            nonincreasing: false,
        };
        p.nonincreasing = p.check_nonincreasing();
        Ok(p)
    }

    pub fn builder() -> ProfileBuilder {
        ProfileBuilder::default()
    }

    pub fn zero() -> Self {
        Self::builder().constant(f64::INFINITY, 0.0).build().unwrap()
    }

    /// `c` on `[0, len)`, zero afterwards.
    pub fn indicator(len: f64, c: f64) -> Result<Self> {
        Self::builder()
            .constant(len, c)
            .constant(f64::INFINITY, 0.0)
            .build()
    }

    /// Samples on a log grid, extended by a constant below the first node
    /// and by a power law `a s^-b` fitted to value and slope at the last
    /// node (or zero when the last value vanishes).
    pub fn from_log_samples(nodes: Vec<f64>, values: Vec<f64>, derivatives: Option<&[f64]>) -> Result<Self> {
        let curve = match derivatives {
            Some(d) => SampledCurve::with_derivatives(nodes, values, d, Axis::Log, true)?,
            None => SampledCurve::new(nodes, values, Axis::Log)?,
        };
        let (s_lo, s_hi) = (curve.first(), curve.last());
        let v_lo = curve.values()[0];
        let v_hi = *curve.values().last().unwrap();
        let slope = curve.node_derivative(curve.nodes().len() - 1);
        let tail = if v_hi == 0.0 {
            PowerLog::zero()
        } else {
            let b = (-s_hi * slope / v_hi).max(0.0);
            PowerLog::power(v_hi * s_hi.powf(b), -b)
        };
        Self::builder()
            .constant(s_lo, v_lo)
            .sampled(curve)
            .analytic(f64::INFINITY, tail)
            .build()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Interior breakpoints (segment starts other than 0).
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.lo).collect()
    }

    /// Decay exponent `b` with `|v(s)| <= C s^-b` beyond the last breakpoint.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.nonincreasing
    }

    pub fn segment_index(&self, s: f64) -> usize {
        self.segments.partition_point(|seg| seg.lo <= s).max(1) - 1
    }

    pub fn segment_at(&self, s: f64) -> &Segment {
        &self.segments[self.segment_index(s)]
    }

    pub fn value(&self, s: f64) -> f64 {
        self.segment_at(s).value(s)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.segment_at(s).derivative(s)
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        self.segment_at(s).second_derivative(s)
    }

    pub fn scaled(&self, c: f64) -> RadialProfile {
        let segments = self
            .segments
            .iter()
            .map(|seg| Segment {
                lo: seg.lo,
                hi: seg.hi,
                kind: match &seg.kind {
                    SegmentKind::Analytic(a) => SegmentKind::Analytic(a.scaled(c)),
                    SegmentKind::Sampled(cv) => {
                        let vals = cv.values().iter().map(|v| v * c).collect();
                        let ders: Vec<f64> = (0..cv.nodes().len()).map(|k| cv.node_derivative(k) * c).collect();
                        SegmentKind::Sampled(
                            SampledCurve::with_derivatives(cv.nodes().to_vec(), vals, &ders, cv.axis(), false)
                                .expect("scaling keeps samples valid"),
                        )
                    }
                },
            })
            .collect();
        RadialProfile::new(segments).expect("scaling keeps the partition valid")
    }

    fn check_nonincreasing(&self) -> bool {
        let scale = self
            .segments
            .iter()
            .flat_map(|seg| seg.probes(8).into_iter().map(move |s| seg.value(s).abs()))
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        for (i, seg) in self.segments.iter().enumerate() {
            match &seg.kind {
                SegmentKind::Sampled(c) => {
                    if !c.is_nonincreasing() {
                        return false;
                    }
                }
                SegmentKind::Analytic(_) => {
                    let probes = seg.probes(64);
                    let mut prev = f64::INFINITY;
                    for &s in &probes {
                        let v = seg.value(s);
                        if v > prev + tol || seg.derivative(s) * s > tol {
                            return false;
                        }
                        prev = v;
                    }
                }
            }
            if let Some(next) = self.segments.get(i + 1) {
                if next.value(next.lo) > seg.value(seg.hi) + tol {
                    return false;
                }
            }
        }
        true
    }

    /// `∫ w(s, v(s)) ds` over one segment. `tail_exponent` is the decay
    /// exponent of the integrand on an unbounded segment.
    pub fn integrate_segment<W>(&self, idx: usize, w: W, tail_exponent: f64, cfg: &QuadratureConfig) -> Result<f64>
    where
        W: Fn(f64, f64) -> f64,
    {
        let seg = &self.segments[idx];
        match &seg.kind {
            SegmentKind::Sampled(c) => Ok(c
                .cell_rule(8, seg.lo, seg.hi)
                .into_iter()
                .map(|(s, wt)| wt * w(s, c.value(s)))
                .sum()),
            SegmentKind::Analytic(a) => {
                let f = |s: f64| w(s, a.value(s));
                if seg.hi.is_infinite() {
                    if !(tail_exponent > 1.0) {
                        return Err(Error::Divergent {
                            lo: seg.lo,
                            hi: seg.hi,
                        });
                    }
                    let cfg = cfg.with_tail(tail_exponent.min(50.0));
                    if seg.lo > 0.0 {
                        return Ok(integrate(f, seg.lo, f64::INFINITY, &cfg)?.value);
                    }
                    return Ok(integrate(f, 0.0, f64::INFINITY, &cfg)?.value);
                }
                if seg.lo > 0.0 && seg.hi / seg.lo > 8.0 {
                    let g = |t: f64| {
                        let s = t.exp();
                        f(s) * s
                    };
                    return Ok(integrate(g, seg.lo.ln(), seg.hi.ln(), cfg)?.value);
                }
                Ok(integrate(f, seg.lo, seg.hi, cfg)?.value)
            }
        }
    }

    /// `∫_0^∞ |v|^p ds`, in closed form on single-power segments.
    pub fn lp_pow(&self, p: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let mut total = 0.0;
        for (i, seg) in self.segments.iter().enumerate() {
            if let SegmentKind::Analytic(a) = &seg.kind {
                if a.is_zero() {
                    continue;
                }
                if let (Some((c, e)), 0.0, false) = (a.poly.single_power(), a.offset, a.divide_by_s) {
                    total += power_lp_closed(c, e, p, a.map, seg.lo, seg.hi)?;
                    continue;
                }
            }
            let tail = p * self.tail_bound;
            total += self.integrate_segment(i, |_, v| v.abs().powf(p), tail, cfg)?;
        }
        Ok(total)
    }

    pub fn running_integral(&self) -> Result<RunningIntegral<'_>> {
        RunningIntegral::new(self)
    }
}

fn power_lp_closed(c: f64, e: f64, p: f64, map: AffineMap, lo: f64, hi: f64) -> Result<f64> {
    let (xa, xb) = {
        let (a, b) = (map.apply(lo), map.apply(hi));
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    let cp = c.abs().powf(p);
    let ep = e * p;
    let diverge = Error::Divergent { lo, hi };
    if ep == -1.0 {
        if xa == 0.0 || xb.is_infinite() {
            return Err(diverge);
        }
        return Ok(cp * (xb / xa).ln());
    }
    let a = ep + 1.0;
    if a > 0.0 && xb.is_infinite() {
        return Err(diverge);
    }
    if a < 0.0 && xa == 0.0 {
        return Err(diverge);
    }
    let pa = |x: f64| {
        if x.is_infinite() {
            0.0
        } else {
            x.powf(a)
        }
    };
    Ok(cp * (pa(xb) - pa(xa)) / a)
}

/// Incremental construction of a profile from left to right.
#[derive(Debug, Default)]
pub struct ProfileBuilder {
    segments: Vec<Segment>,
    cursor: f64,
    error: Option<Error>,
}

impl ProfileBuilder {
    pub fn segment(mut self, hi: f64, kind: SegmentKind) -> Self {
        if hi == self.cursor {
            return self;
        }
        if !(hi > self.cursor) && self.error.is_none() {
            self.error = Some(Error::InvalidProfile(format!(
                "breakpoint {hi} does not exceed {}",
                self.cursor
            )));
            return self;
        }
        self.segments.push(Segment {
            lo: self.cursor,
            hi,
            kind,
        });
        self.cursor = hi;
        self
    }

    pub fn analytic(self, hi: f64, poly: PowerLog) -> Self {
        self.segment(hi, SegmentKind::Analytic(Analytic::plain(poly)))
    }

    pub fn constant(self, hi: f64, c: f64) -> Self {
        self.analytic(hi, PowerLog::constant(c))
    }

    /// `a s^b`
    pub fn power(self, hi: f64, a: f64, b: f64) -> Self {
        self.analytic(hi, PowerLog::power(a, b))
    }

    /// `a + b s`
    pub fn affine(self, hi: f64, a: f64, b: f64) -> Self {
        self.analytic(hi, PowerLog::affine(a, b))
    }

    /// `a + b ln s`
    pub fn log_affine(self, hi: f64, a: f64, b: f64) -> Self {
        self.analytic(hi, PowerLog::log_affine(a, b))
    }

    pub fn sampled(self, curve: SampledCurve) -> Self {
        let hi = curve.last();
        self.segment(hi, SegmentKind::Sampled(curve))
    }

    pub fn build(self) -> Result<RadialProfile> {
        if let Some(e) = self.error {
            return Err(e);
        }
        RadialProfile::new(self.segments)
    }
}

/// `V(s) = ∫_0^s v(t) dt`.
#[derive(Debug)]
pub struct RunningIntegral<'a> {
    profile: &'a RadialProfile,
    offsets: Vec<f64>,
    cumulative: Vec<Option<Vec<f64>>>,
    cfg: QuadratureConfig,
}

impl<'a> RunningIntegral<'a> {
    fn new(profile: &'a RadialProfile) -> Result<Self> {
        let cfg = QuadratureConfig::default().with_rel_tol(1e-12);
        let mut offsets = Vec::with_capacity(profile.segments.len());
        let mut cumulative = Vec::with_capacity(profile.segments.len());
        let mut acc = 0.0;
        for seg in &profile.segments {
            offsets.push(acc);
            match &seg.kind {
                SegmentKind::Sampled(c) => {
                    let cum = c.cumulative_integrals();
                    if seg.hi.is_finite() {
                        acc += *cum.last().unwrap();
                    }
                    cumulative.push(Some(cum));
                }
                SegmentKind::Analytic(a) => {
                    cumulative.push(None);
                    if seg.hi.is_finite() {
                        acc += analytic_integral(a, seg.lo, seg.hi, &cfg)?;
                    } else if seg.lo == 0.0 {
                        analytic_integral(a, 0.0, 1.0, &cfg)?;
                    }
                }
            }
        }
        Ok(Self {
            profile,
            offsets,
            cumulative,
            cfg,
        })
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        let i = self.profile.segment_index(s);
        let seg = &self.profile.segments[i];
        let partial = match (&seg.kind, &self.cumulative[i]) {
            (SegmentKind::Sampled(c), Some(cum)) => {
                let k = c.nodes().partition_point(|&x| x <= s).clamp(1, c.nodes().len()) - 1;
                let rest: f64 = c
                    .cell_rule(8, c.nodes()[k], s)
                    .into_iter()
                    .map(|(t, w)| w * c.value(t))
                    .sum();
                cum[k] + rest
            }
            (SegmentKind::Analytic(a), _) => {
                if s == seg.lo {
                    0.0
                } else {
                    analytic_integral(a, seg.lo, s, &self.cfg)?
                }
            }
            _ => unreachable!(),
        };
        Ok(self.offsets[i] + partial)
    }

    /// `∫_0^∞ v`, possibly infinite.
    pub fn total(&self) -> Result<f64> {
        let i = self.profile.segments.len() - 1;
        let seg = &self.profile.segments[i];
        match &seg.kind {
            SegmentKind::Analytic(a) if a.is_zero() => Ok(self.offsets[i]),
            SegmentKind::Analytic(a) => Ok(self.offsets[i] + analytic_integral(a, seg.lo, f64::INFINITY, &self.cfg)?),
            SegmentKind::Sampled(_) => unreachable!(),
        }
    }
}

fn analytic_integral(a: &Analytic, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if a.is_zero() {
        return Ok(0.0);
    }
    if let Some(v) = a.integral_closed(lo, hi) {
        if v.is_nan() || (lo == 0.0 && v.is_infinite()) {
            return Err(Error::NonIntegrableAtZero);
        }
        return Ok(v);
    }
    let f = |s: f64| a.value(s);
    if hi.is_infinite() {
        let q = -a.growth();
        if !(q > 1.0) {
            return Ok(f64::INFINITY);
        }
        return Ok(integrate(f, lo, hi, &cfg.with_tail(q))?.value);
    }
    integrate(f, lo, hi, cfg).map(|e| e.value).map_err(|e| {
        if lo == 0.0 {
            Error::NonIntegrableAtZero
        } else {
            e.into()
        }
    })
}
