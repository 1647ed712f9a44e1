use super::NumericsError;

/// Log-uniform grid over `[s_min, s_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    s_min: f64,
    s_max: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(s_min: f64, s_max: f64, points: usize) -> Result<Self, NumericsError> {
        if !(s_min > 0.0 && s_min.is_finite()) {
            return Err(NumericsError::InvalidConfig(format!(
                "grid needs 0 < s_min < inf (got {s_min})"
            )));
        }
        if !(s_max > s_min && s_max.is_finite()) {
            return Err(NumericsError::InvalidConfig(format!(
                "grid needs s_min < s_max < inf (got {s_min}, {s_max})"
            )));
        }
        if points < 2 {
            return Err(NumericsError::InvalidConfig(format!(
                "grid needs at least 2 points (got {points})"
            )));
        }
        Ok(Self {
            s_min,
            s_max,
            points,
        })
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Spacing in `ln s`.
    pub fn log_step(&self) -> f64 {
        (self.s_max.ln() - self.s_min.ln()) / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let t0 = self.s_min.ln();
        let h = self.log_step();
        let last = self.points - 1;
        (0..self.points)
            .map(|k| match k {
                0 => self.s_min,
                k if k == last => self.s_max,
                k => (t0 + k as f64 * h).exp(),
            })
            .collect()
    }
}

/// Convenience wrapper matching the `log_grid(spec)` operation.
pub fn log_grid(spec: &GridSpec) -> Vec<f64> {
    spec.nodes()
}
