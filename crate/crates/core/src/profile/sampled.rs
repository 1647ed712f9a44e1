use crate::error::{Error, Result};

/// Interpolation coordinate of a sampled segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Hermite cubic in `s`.
    Linear,
    /// Hermite cubic in `ln s`; nodes must be positive.
    Log,
}

/// Samples of a profile on strictly increasing nodes, interpolated by a
/// cubic Hermite spline whose slopes are either Fritsch–Carlson limited
/// (monotone data stays monotone) or PCHIP estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    axis: Axis,
    nodes: Vec<f64>,
    coords: Vec<f64>,
    values: Vec<f64>,
    // dy/du in the interpolation coordinate
    slopes: Vec<f64>,
}

fn pchip_slopes(u: &[f64], y: &[f64]) -> Vec<f64> {
    let n = u.len();
    let h: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        m[0] = d[0];
        m[1] = d[0];
        return m;
    }
    for k in 1..n - 1 {
        if d[k - 1] * d[k] <= 0.0 {
            m[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            s = 0.0;
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            s = 3.0 * d0;
        }
        s
    };
    m[0] = end(h[0], h[1], d[0], d[1]);
    m[n - 1] = end(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

fn limit_monotone(u: &[f64], y: &[f64], m: &mut [f64]) {
    for k in 0..u.len() - 1 {
        let delta = (y[k + 1] - y[k]) / (u[k + 1] - u[k]);
        if delta == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        if m[k] * delta < 0.0 {
            m[k] = 0.0;
        }
        if m[k + 1] * delta < 0.0 {
            m[k + 1] = 0.0;
        }
        let a = m[k] / delta;
        let b = m[k + 1] / delta;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[k] = tau * a * delta;
            m[k + 1] = tau * b * delta;
        }
    }
}

impl SampledCurve {
    fn coords_of(axis: Axis, nodes: &[f64]) -> Result<Vec<f64>> {
        if nodes.len() < 2 {
            return Err(Error::InvalidProfile("sampled segment needs >= 2 nodes".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidProfile(
                "sampled nodes must be finite and strictly increasing".into(),
            ));
        }
        match axis {
            Axis::Linear => Ok(nodes.to_vec()),
            Axis::Log => {
                if nodes[0] <= 0.0 {
                    return Err(Error::InvalidProfile("log-axis nodes must be positive".into()));
                }
                Ok(nodes.iter().map(|x| x.ln()).collect())
            }
        }
    }

    /// Shape-preserving PCHIP interpolation of `values` at `nodes`.
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, axis: Axis) -> Result<Self> {
        let coords = Self::coords_of(axis, &nodes)?;
        if values.len() != nodes.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("sampled values must be finite, one per node".into()));
        }
        let slopes = pchip_slopes(&coords, &values);
        Ok(Self {
            axis,
            nodes,
            coords,
            values,
            slopes,
        })
    }

    /// Hermite interpolation with known derivatives `dv/ds` at the nodes.
    /// With `monotone`, slopes are Fritsch–Carlson limited.
    pub fn with_derivatives(
        nodes: Vec<f64>,
        values: Vec<f64>,
        derivatives: &[f64],
        axis: Axis,
        monotone: bool,
    ) -> Result<Self> {
        let coords = Self::coords_of(axis, &nodes)?;
        if values.len() != nodes.len()
            || derivatives.len() != nodes.len()
            || values.iter().chain(derivatives).any(|v| !v.is_finite())
        {
            return Err(Error::InvalidProfile(
                "sampled values/derivatives must be finite, one per node".into(),
            ));
        }
        let mut slopes: Vec<f64> = match axis {
            Axis::Linear => derivatives.to_vec(),
            Axis::Log => derivatives.iter().zip(&nodes).map(|(d, s)| d * s).collect(),
        };
        if monotone {
            limit_monotone(&coords, &values, &mut slopes);
        }
        Ok(Self {
            axis,
            nodes,
            coords,
            values,
            slopes,
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    fn coord(&self, s: f64) -> f64 {
        match self.axis {
            Axis::Linear => s,
            Axis::Log => s.ln(),
        }
    }

    fn cell(&self, u: f64) -> usize {
        let k = self.coords.partition_point(|&c| c <= u);
        k.clamp(1, self.coords.len() - 1) - 1
    }

    /// Local node spacing (in the interpolation coordinate) around `s`.
    pub fn local_step(&self, s: f64) -> f64 {
        let k = self.cell(self.coord(s));
        self.coords[k + 1] - self.coords[k]
    }

    /// Value, `dy/du`, `d²y/du²` of the interpolant at coordinate `u`.
    fn hermite(&self, u: f64) -> (f64, f64, f64) {
        let k = self.cell(u);
        let h = self.coords[k + 1] - self.coords[k];
        let t = (u - self.coords[k]) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dy = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        let ddy = ((12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * m1)
            / (h * h);
        (y, dy, ddy)
    }

    pub fn value(&self, s: f64) -> f64 {
        self.hermite(self.coord(s)).0
    }

    /// `dv/ds`
    pub fn derivative(&self, s: f64) -> f64 {
        let (_, du, _) = self.hermite(self.coord(s));
        match self.axis {
            Axis::Linear => du,
            Axis::Log => du / s,
        }
    }

    /// `d²v/ds²` of the piecewise cubic (only piecewise continuous).
    pub fn second_derivative(&self, s: f64) -> f64 {
        let (_, du, ddu) = self.hermite(self.coord(s));
        match self.axis {
            Axis::Linear => ddu,
            Axis::Log => (ddu - du) / (s * s),
        }
    }

    /// `dv/ds` at node `k`, as stored.
    pub fn node_derivative(&self, k: usize) -> f64 {
        match self.axis {
            Axis::Linear => self.slopes[k],
            Axis::Log => self.slopes[k] / self.nodes[k],
        }
    }

    /// Nodes and weights (`ds`) of an `order`-point Gauss rule on every cell,
    /// optionally restricted to `[lo, hi]`.
    pub fn cell_rule(&self, order: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let (gx, gw) = crate::numerics::gauss_legendre(order);
        let (ulo, uhi) = (self.coord(lo.max(self.first())), self.coord(hi.min(self.last())));
        let mut out = Vec::new();
        for k in 0..self.coords.len() - 1 {
            let a = self.coords[k].max(ulo);
            let b = self.coords[k + 1].min(uhi);
            if !(b > a) {
                continue;
            }
            let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in gx.iter().zip(&gw) {
                let u = c + r * x;
                let (s, jac) = match self.axis {
                    Axis::Linear => (u, 1.0),
                    Axis::Log => {
                        let s = u.exp();
                        (s, s)
                    }
                };
                out.push((s, w * r * jac));
            }
        }
        out
    }

    /// `∫_{first}^{node_k} v ds` for every node, by 8-point Gauss on each cell.
    pub fn cumulative_integrals(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.nodes.len()];
        for k in 0..self.nodes.len() - 1 {
            let cell: f64 = self
                .cell_rule(8, self.nodes[k], self.nodes[k + 1])
                .into_iter()
                .map(|(s, w)| w * self.value(s))
                .sum();
            acc[k + 1] = acc[k] + cell;
        }
        acc
    }

    pub fn is_nonincreasing(&self) -> bool {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.values.windows(2).all(|w| w[1] <= w[0] + 1e-14 * scale)
            && self.slopes.iter().all(|&m| m <= 1e-14 * scale)
    }
}
