/// One term `coef · x^exp · (ln x)^log_pow`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub exp: f64,
    pub log_pow: u32,
}

impl Term {
    fn eval(&self, x: f64) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return if self.exp == 0.0 && self.log_pow == 0 {
                self.coef
            } else if self.exp > 0.0 {
                0.0
            } else if self.log_pow % 2 == 1 {
                -self.coef.signum() * f64::INFINITY
            } else {
                self.coef.signum() * f64::INFINITY
            };
        }
        if x.is_infinite() {
            return if self.exp < 0.0 {
                0.0
            } else if self.exp == 0.0 && self.log_pow == 0 {
                self.coef
            } else {
                self.coef.signum() * f64::INFINITY
            };
        }
        let mut v = self.coef;
        if self.exp != 0.0 {
            v *= if self.exp == 1.0 { x } else { x.powf(self.exp) };
        }
        if self.log_pow > 0 {
            v *= x.ln().powi(self.log_pow as i32);
        }
        v
    }
}

/// Finite sums of power-log terms: closed under differentiation,
/// antidifferentiation and multiplication by powers, which is all the
/// segment algebra needs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerLog {
    terms: Vec<Term>,
}

impl PowerLog {
    pub fn from_terms(terms: Vec<Term>) -> Self {
        let mut p = Self { terms };
        p.simplify();
        p
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::power(c, 0.0)
    }

    /// `a · x^b`
    pub fn power(a: f64, b: f64) -> Self {
        Self::from_terms(vec![Term {
            coef: a,
            exp: b,
            log_pow: 0,
        }])
    }

    /// `a + b x`
    pub fn affine(a: f64, b: f64) -> Self {
        Self::from_terms(vec![
            Term {
                coef: a,
                exp: 0.0,
                log_pow: 0,
            },
            Term {
                coef: b,
                exp: 1.0,
                log_pow: 0,
            },
        ])
    }

    /// `a + b ln x`
    pub fn log_affine(a: f64, b: f64) -> Self {
        Self::from_terms(vec![
            Term {
                coef: a,
                exp: 0.0,
                log_pow: 0,
            },
            Term {
                coef: b,
                exp: 0.0,
                log_pow: 1,
            },
        ])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn simplify(&mut self) {
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            if t.coef == 0.0 {
                continue;
            }
            if let Some(m) = merged
                .iter_mut()
                .find(|m| m.exp == t.exp && m.log_pow == t.log_pow)
            {
                m.coef += t.coef;
            } else {
                merged.push(t);
            }
        }
        merged.retain(|t| t.coef != 0.0);
        self.terms = merged;
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// The single term `c x^e` if that is all there is.
    pub fn single_power(&self) -> Option<(f64, f64)> {
        match self.terms.as_slice() {
            [] => Some((0.0, 0.0)),
            [t] if t.log_pow == 0 => Some((t.coef, t.exp)),
            _ => None,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| Term {
                    coef: t.coef * c,
                    ..*t
                })
                .collect(),
        )
    }

    /// Multiply by `x^e`.
    pub fn times_power(&self, e: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| Term {
                    exp: t.exp + e,
                    ..*t
                })
                .collect(),
        )
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms)
    }

    pub fn derivative(&self) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.exp != 0.0 {
                out.push(Term {
                    coef: t.coef * t.exp,
                    exp: t.exp - 1.0,
                    log_pow: t.log_pow,
                });
            }
            if t.log_pow > 0 {
                out.push(Term {
                    coef: t.coef * t.log_pow as f64,
                    exp: t.exp - 1.0,
                    log_pow: t.log_pow - 1,
                });
            }
        }
        Self::from_terms(out)
    }

    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.exp == -1.0 {
                out.push(Term {
                    coef: t.coef / (t.log_pow + 1) as f64,
                    exp: 0.0,
                    log_pow: t.log_pow + 1,
                });
                continue;
            }
            // ∫ x^e ln^k x = Σ_i (-1)^i k!/(k-i)! x^{e+1} ln^{k-i} x / (e+1)^{i+1}
            let e1 = t.exp + 1.0;
            let mut falling = 1.0;
            let mut denom = e1;
            for i in 0..=t.log_pow {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                out.push(Term {
                    coef: t.coef * sign * falling / denom,
                    exp: e1,
                    log_pow: t.log_pow - i,
                });
                falling *= (t.log_pow - i) as f64;
                denom *= e1;
            }
        }
        Self::from_terms(out)
    }

    /// Largest growth exponent, ignoring logarithmic factors.
    pub fn growth_exponent(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.exp).reduce(f64::max)
    }

    pub fn has_logs(&self) -> bool {
        self.terms.iter().any(|t| t.log_pow > 0)
    }
}
