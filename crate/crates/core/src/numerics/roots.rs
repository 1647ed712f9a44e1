use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_iter: 300,
        }
    }
}

/// Solve `g(x) = y` for a continuous strictly increasing `g` on `[lo, hi]`.
///
/// Safeguarded false position (Illinois variant) with a bisection step
/// whenever the bracket fails to halve over two iterations. Stops when
/// `|g(x) - y| <= max(abs_tol, rel_tol |y|)`; non-finite values of `g`
/// (e.g. `ln` of zero at the lower end) are tolerated and force bisection.
pub fn invert_monotone<G>(g: G, y: f64, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64, NumericsError>
where
    G: Fn(f64) -> f64,
{
    if !(lo <= hi) {
        return Err(NumericsError::InvalidConfig(format!(
            "empty bracket [{lo}, {hi}]"
        )));
    }
    let tol = cfg.abs_tol.max(cfg.rel_tol * y.abs());
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a) - y, g(b) - y);
    if fa > tol || fb < -tol || fa.is_nan() || fb.is_nan() {
        return Err(NumericsError::Bracket {
            target: y,
            g_lo: fa + y,
            g_hi: fb + y,
        });
    }
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }

    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut side = 0i8;
    let mut width_before = b - a;
    for iter in 0..cfg.max_iter {
        let mut x = f64::NAN;
        if fa.is_finite() && fb.is_finite() && iter % 3 != 2 {
            x = (a * fb - b * fa) / (fb - fa);
        }
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        if x <= a || x >= b {
            break;
        }
        let fx = g(x) - y;
        if fx.is_nan() {
            return Err(NumericsError::RootNonConvergence {
                last: x,
                residual: fx,
            });
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if iter % 2 == 1 {
            if b - a > 0.5 * width_before {
                // poor progress: next step bisects
                let m = 0.5 * (a + b);
                let fm = g(m) - y;
                if fm.abs() < best.1.abs() {
                    best = (m, fm);
                }
                if fm.abs() <= tol {
                    return Ok(m);
                }
                if fm < 0.0 {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                    fb = fm;
                }
                side = 0;
            }
            width_before = b - a;
        }
    }
    if best.1.abs() <= tol {
        return Ok(best.0);
    }
    Err(NumericsError::RootNonConvergence {
        last: best.0,
        residual: best.1,
    })
}
