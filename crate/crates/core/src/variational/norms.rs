use crate::error::{domain, Error, Result};
use crate::geometry::{laplacian_volume_coord, surface_measure, SpaceParams};
use crate::numerics::QuadratureConfig;
use crate::profile::{RadialProfile, Segment, SegmentKind};

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain("p", p, "1 < p < inf"));
    }
    Ok(())
}

/// `(∫_0^∞ |v|^p ds)^{1/p}`.
pub fn lp_norm_volume(v: &RadialProfile, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(v.lp_pow(p, &QuadratureConfig::default())?.powf(1.0 / p))
}

fn is_constant(seg: &Segment) -> bool {
    match &seg.kind {
        SegmentKind::Analytic(a) => a.is_zero() || a.as_plain().and_then(|q| q.single_power()).is_some_and(|(_, e)| e == 0.0),
        SegmentKind::Sampled(_) => false,
    }
}

/// `∫ w(s) ds` over all non-constant segments, where `w` is built from the
/// segment and `s`; `decay` is the tail exponent of `w`.
fn integrate_by_segment<W>(v: &RadialProfile, w: W, decay: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    W: Fn(&Segment, f64) -> f64,
{
    let mut total = 0.0;
    for (i, seg) in v.segments().iter().enumerate() {
        if is_constant(seg) {
            continue;
        }
        total += match &seg.kind {
            SegmentKind::Sampled(c) => c.cell_rule(8, seg.lo, seg.hi).into_iter().map(|(s, wt)| wt * w(seg, s)).sum(),
            SegmentKind::Analytic(_) => v.integrate_segment(i, |s, _| w(seg, s), decay, cfg)?,
        };
    }
    Ok(total)
}

/// `(∫ (A(s) |v'(s)|)^p ds)^{1/p}`, the gradient norm of the radialized profile.
pub fn grad_norm_volume(v: &RadialProfile, p: f64, sp: &SpaceParams) -> Result<f64> {
    check_p(p)?;
    let w = |seg: &Segment, s: f64| match surface_measure(s, sp) {
        Ok(a) => (a * seg.derivative(s).abs()).powf(p),
        Err(_) => f64::NAN,
    };
    let total = integrate_by_segment(v, w, p * v.tail_bound(), &QuadratureConfig::default())?;
    Ok(total.powf(1.0 / p))
}

/// Same norm through the weight `φ`: `∫ |v'|^p (-φ')^{1-p}` with `-φ' = A^{-p'}`.
pub fn grad_norm_volume_weighted(v: &RadialProfile, p: f64, sp: &SpaceParams) -> Result<f64> {
    check_p(p)?;
    let pc = p / (p - 1.0);
    let w = |seg: &Segment, s: f64| match surface_measure(s, sp) {
        Ok(a) => seg.derivative(s).abs().powf(p) * a.powf(-pc).powf(1.0 - p),
        Err(_) => f64::NAN,
    };
    let total = integrate_by_segment(v, w, p * v.tail_bound(), &QuadratureConfig::default())?;
    Ok(total.powf(1.0 / p))
}

/// `‖Δ_g u‖_p` for the radialization `u` of `v`.
///
/// With `source = Some(w)` the profile is taken to be `T w`, so the norm is
/// `‖w‖_p` with no differentiation; otherwise `|(A^2 v')'|^p` is integrated.
pub fn laplacian_norm_volume(v: &RadialProfile, p: f64, sp: &SpaceParams, source: Option<&RadialProfile>) -> Result<f64> {
    check_p(p)?;
    if let Some(w) = source {
        return lp_norm_volume(w, p);
    }
    let w = |_: &Segment, s: f64| match laplacian_volume_coord(v, s, sp) {
        Ok(l) => l.value.abs().powf(p),
        Err(_) => f64::NAN,
    };
    // (A^2 v')' ~ s^{-tail_bound} for power tails
    let decay = p * v.tail_bound();
    if !(decay > 1.0) && !v.segments().last().is_some_and(is_constant) {
        let last = v.segments().last().unwrap();
        return Err(Error::Divergent {
            lo: last.lo,
            hi: last.hi,
        });
    }
    let total = integrate_by_segment(v, w, decay, &QuadratureConfig::default().with_rel_tol(1e-8))?;
    Ok(total.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremizers::{f_r, ExtremizerParams};

    #[test]
    fn indicator_and_scaling() {
        let v = RadialProfile::indicator(1.0, 1.0).unwrap();
        for &p in &[1.5, 2.0, 3.0] {
            assert!((lp_norm_volume(&v, p).unwrap() - 1.0).abs() < 1e-15);
            assert!((lp_norm_volume(&v.scaled(-2.5), p).unwrap() - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_has_no_gradient() {
        let sp = SpaceParams::new(3).unwrap();
        let c = RadialProfile::builder().constant(f64::INFINITY, 4.0).build().unwrap();
        assert_eq!(grad_norm_volume(&c, 2.0, &sp).unwrap(), 0.0);
        assert_eq!(laplacian_norm_volume(&c, 2.0, &sp, None).unwrap(), 0.0);
    }

    #[test]
    fn gradient_routes_agree_on_f_r() {
        let sp = SpaceParams::new(3).unwrap();
        for &p in &[1.5, 2.0, 3.0] {
            let params = ExtremizerParams::new(&sp, p, 0.01, 30.0).unwrap();
            let f = f_r(&params);
            let a = grad_norm_volume(&f, p, &sp).unwrap();
            let b = grad_norm_volume_weighted(&f, p, &sp).unwrap();
            assert!((a / b - 1.0).abs() < 1e-10, "p={p}");
        }
    }
}
