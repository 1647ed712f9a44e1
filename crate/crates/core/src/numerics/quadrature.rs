use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::NumericsError;

/// Tolerances and limits for [`integrate`].
///
/// `tail_decay_exponent` is the exponent `q > 1` of the power-law bound
/// `|f(s)| <= C s^-q` assumed beyond the last evaluated chunk of a
/// semi-infinite integral; it is only consulted when `b = +inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub tail_decay_exponent: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
            tail_decay_exponent: 2.0,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tail(mut self, exponent: f64) -> Self {
        self.tail_decay_exponent = exponent;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) || self.max_subdivisions < 1 {
            return Err(NumericsError::InvalidConfig(format!(
                "need rel_tol > 0, abs_tol >= 0, max_subdivisions >= 1 (got {:?})",
                self
            )));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Result of a quadrature: value, estimated absolute error, number of
/// integrand evaluations, and for semi-infinite integrals the abscissa
/// where the tail was cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub truncated_at: Option<f64>,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// 7-point Gauss weights at XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn eval_checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64, NumericsError> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(NumericsError::NonFinite { abscissa: x })
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, NumericsError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval_checked(f, center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval_checked(f, center - dx)?;
        let f2 = eval_checked(f, center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let roundoff = 50.0 * f64::EPSILON * abs_sum * half.abs();
    let error = ((kronrod - gauss) * half).abs().max(roundoff);
    Ok(Panel { a, b, value, error })
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
    abs_tol: f64,
) -> Result<Estimate, NumericsError> {
    let first = gk15(f, a, b)?;
    let mut evaluations = 15;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut splits = 0;
    while error > abs_tol.max(cfg.rel_tol * value.abs()) {
        if splits >= cfg.max_subdivisions {
            return Err(NumericsError::NonConvergence {
                estimate: value,
                error_bound: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel narrower than float resolution; its error is final.
            return Err(NumericsError::NonConvergence {
                estimate: value,
                error_bound: error,
            });
        }
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        evaluations += 30;
        splits += 1;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if splits % 64 == 0 {
            // refresh sums to shed accumulated cancellation
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    Ok(Estimate {
        value,
        abs_error: error,
        evaluations,
        truncated_at: None,
    })
}

/// Integrate `f` over `[a, b]`.
///
/// Finite intervals use adaptive 7/15-point Gauss-Kronrod bisection with the
/// rule-pair difference as error estimate. For `b = +inf` (requires
/// `a >= 0`) the integral over `[max(a,1), inf)` is evaluated in the
/// coordinate `t = ln s` in chunks of growing width; the tail is cut once
/// the power-law bound `C S^(1-q)/(q-1)`, with `C` fitted from the last
/// chunk, drops below the tolerance.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate, NumericsError>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(NumericsError::InvalidConfig(format!(
            "bad interval [{a}, {b}]"
        )));
    }
    if b.is_finite() {
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                abs_error: 0.0,
                evaluations: 0,
                truncated_at: None,
            });
        }
        if a > b {
            return integrate(f, b, a, cfg).map(|e| Estimate {
                value: -e.value,
                ..e
            });
        }
        return adaptive(&f, a, b, cfg, cfg.abs_tol);
    }
    if a < 0.0 {
        return Err(NumericsError::InvalidConfig(
            "semi-infinite integrals need a >= 0".into(),
        ));
    }
    if a < 1.0 {
        let head = adaptive(&f, a, 1.0, cfg, 0.5 * cfg.abs_tol)?;
        let tail = semi_infinite(&f, 1.0, cfg)?;
        return Ok(Estimate {
            value: head.value + tail.value,
            abs_error: head.abs_error + tail.abs_error,
            evaluations: head.evaluations + tail.evaluations,
            truncated_at: tail.truncated_at,
        });
    }
    semi_infinite(&f, a, cfg)
}

fn semi_infinite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate, NumericsError> {
    let q = cfg.tail_decay_exponent;
    if !(q > 1.0) {
        return Err(NumericsError::InvalidConfig(format!(
            "tail_decay_exponent must exceed 1 (got {q})"
        )));
    }
    let g = |t: f64| {
        let s = t.exp();
        f(s) * s
    };
    let mut t = a.ln();
    let t_limit = t + 1500.0;
    let mut width = 1.0_f64;
    let mut total = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    loop {
        let chunk = adaptive(&g, t, t + width, cfg, 0.1 * cfg.abs_tol)?;
        total += chunk.value;
        error += chunk.abs_error;
        evaluations += chunk.evaluations;
        t += width;
        width = (2.0 * width).min(16.0);

        let s_end = t.exp();
        if t > t_limit || !s_end.powf(q).is_finite() {
            return Err(NumericsError::NonConvergence {
                estimate: total,
                error_bound: f64::INFINITY,
            });
        }
        let s_mid = (t - 0.5).exp();
        let c_end = eval_checked(f, s_end)?.abs() * s_end.powf(q);
        let c_mid = eval_checked(f, s_mid)?.abs() * s_mid.powf(q);
        evaluations += 2;
        let tail = c_end.max(c_mid) * s_end.powf(1.0 - q) / (q - 1.0);
        if tail <= 0.1 * cfg.target(total) || (tail == 0.0) {
            return Ok(Estimate {
                value: total,
                abs_error: error + tail,
                evaluations,
                truncated_at: Some(s_end),
            });
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn constant_on_unit_interval() {
        let e = integrate(|_| 1.0, 0.0, 1.0, &cfg()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_square_tail() {
        let e = integrate(|s| s.powi(-2), 1.0, f64::INFINITY, &cfg()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10, "{e:?}");
        assert!(e.truncated_at.is_some());
    }

    #[test]
    fn cubic_power_of_one_minus_s() {
        let e = integrate(|s| (1.0 - s).powi(2), 0.0, 1.0, &cfg()).unwrap();
        assert!((e.value - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity() {
        let e = integrate(|s: f64| s.powf(-0.5), 0.0, 1.0, &cfg()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn whole_half_line_splits_at_one() {
        let e = integrate(|s: f64| (-s).exp(), 0.0, f64::INFINITY, &cfg().with_tail(4.0)).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10, "{e:?}");
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let e = integrate(|s| s, 1.0, 0.0, &cfg()).unwrap();
        assert!((e.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn nan_is_reported_with_abscissa() {
        let err = integrate(|s| if s > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, &cfg()).unwrap_err();
        match err {
            NumericsError::NonFinite { abscissa } => assert!(abscissa > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn subdivision_budget_is_enforced() {
        let tight = QuadratureConfig {
            max_subdivisions: 2,
            ..cfg()
        };
        let err = integrate(|s: f64| (50.0 * s).sin().abs(), 0.0, 10.0, &tight).unwrap_err();
        assert!(matches!(err, NumericsError::NonConvergence { .. }));
    }

    #[test]
    fn slow_tail_is_non_convergent_with_wrong_exponent() {
        // 1/s is not integrable; the declared bound never drops.
        let err = integrate(|s| 1.0 / s, 1.0, f64::INFINITY, &cfg().with_tail(1.01)).unwrap_err();
        assert!(matches!(err, NumericsError::NonConvergence { .. }));
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        for n in 1..10 {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let want = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((got - want).abs() < 1e-14, "n={n}");
        }
    }
}
