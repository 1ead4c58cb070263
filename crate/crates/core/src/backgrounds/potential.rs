use num_dual::DualNum;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::ClosedFormScalar;
use crate::{Error, Result};

/// `coef · Π y_k^{powers[k]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Time-dependent potential `f(y, t)` on a background chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "terms")]
pub enum Potential {
    Zero,
    /// Time-independent polynomial in the chart coordinates.
    Polynomial(Vec<Monomial>),
    /// `|y|² / (4τ)` on a Euclidean chart.
    GaussianShrinker,
}

impl Potential {
    pub fn eval<D: DualNum<Primitive = f64>>(&self, t: D, y: &[D]) -> D {
        match self {
            Potential::Zero => D::from(0.0),
            Potential::Polynomial(terms) => {
                let mut s = D::from(0.0);
                for m in terms {
                    let mut term = D::from(m.coef);
                    for (k, &p) in m.powers.iter().enumerate() {
                        if p > 0 {
                            term *= y[k].clone().powi(p as i32);
                        }
                    }
                    s += term;
                }
                s
            }
            Potential::GaussianShrinker => {
                let mut s = D::from(0.0);
                for c in y {
                    s += c.clone() * c.clone();
                }
                s / (t * 4.0)
            }
        }
    }

    /// Checks monomial arity against the chart dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if let Potential::Polynomial(terms) = self {
            if let Some(m) = terms.iter().find(|m| m.powers.len() != dim) {
                return Err(Error::Dimension {
                    expected: dim,
                    got: m.powers.len(),
                });
            }
        }
        Ok(())
    }

    /// The potential frozen at time `t`.
    pub fn at(&self, dim: usize, t: f64) -> PotentialAt<'_> {
        PotentialAt {
            potential: self,
            dim,
            t,
        }
    }

    /// Polynomial of total degree `1..=degree` with coefficients uniform in
    /// `[-1, 1]`, one term per exponent tuple.
    pub fn random_polynomial<R: Rng>(dim: usize, degree: u32, rng: &mut R) -> Potential {
        let mut terms = Vec::new();
        let mut powers = vec![0u32; dim];
        loop {
            let total: u32 = powers.iter().sum();
            if total >= 1 && total <= degree {
                terms.push(Monomial {
                    coef: rng.random_range(-1.0..=1.0),
                    powers: powers.clone(),
                });
            }
            // odometer over {0..=degree}^dim
            let mut k = 0;
            loop {
                if k == dim {
                    return Potential::Polynomial(terms);
                }
                powers[k] += 1;
                if powers[k] <= degree {
                    break;
                }
                powers[k] = 0;
                k += 1;
            }
        }
    }
}

/// A [`Potential`] at a fixed time, as a closed-form scalar field.
#[derive(Debug, Clone, Copy)]
pub struct PotentialAt<'a> {
    potential: &'a Potential,
    dim: usize,
    t: f64,
}

impl ClosedFormScalar for PotentialAt<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval<D: DualNum<Primitive = f64>>(&self, p: &[D]) -> D {
        self.potential.eval(D::from(self.t), p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolitonClass {
    Steady,
    Expanding,
    Shrinking,
}

impl SolitonClass {
    /// The constant `c` in `Ric + Hess f + (c/2t) g = 0`.
    pub fn constant(self) -> f64 {
        match self {
            SolitonClass::Steady => 0.0,
            SolitonClass::Expanding => 1.0,
            SolitonClass::Shrinking => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSolitonData {
    pub potential: Potential,
    pub class: SolitonClass,
}
