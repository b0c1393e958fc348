use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::point::Point;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A probability distribution with finite support.
///
/// Support points are pairwise distinct (bitwise) and share one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr")]
pub struct FiniteDistribution {
    support: Vec<Point>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct DistributionRepr {
    support: Vec<Point>,
    weights: Vec<f64>,
}

impl TryFrom<DistributionRepr> for FiniteDistribution {
    type Error = Error;

    fn try_from(r: DistributionRepr) -> Result<Self> {
        FiniteDistribution::new(r.support, r.weights)
    }
}

impl FiniteDistribution {
    pub fn new(support: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        let dim = support[0].dim();
        if let Some(p) = support.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: p.dim(),
                context: "distribution support".into(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("bad weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}, not 1")));
        }
        let mut seen = HashMap::with_capacity(support.len());
        for (i, p) in support.iter().enumerate() {
            if let Some(j) = seen.insert(p.key(), i) {
                return Err(Error::InvalidDistribution(format!(
                    "support points {j} and {i} coincide"
                )));
            }
        }
        Ok(FiniteDistribution { support, weights })
    }

    /// Uniform distribution over distinct points.
    pub fn uniform(support: Vec<Point>) -> Result<Self> {
        let n = support.len();
        if n == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        FiniteDistribution::new(support, vec![1.0 / n as f64; n])
    }

    pub fn point_mass(p: Point) -> Self {
        FiniteDistribution {
            support: vec![p],
            weights: vec![1.0],
        }
    }

    /// Builds a distribution from possibly repeated atoms, merging exact
    /// duplicates (first occurrence keeps its position, weights add).
    pub fn from_atoms(atoms: impl IntoIterator<Item = (Point, f64)>) -> Result<Self> {
        let mut index: HashMap<_, usize> = HashMap::new();
        let mut support: Vec<Point> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (p, w) in atoms {
            match index.get(&p.key()) {
                Some(&i) => weights[i] += w,
                None => {
                    index.insert(p.key(), support.len());
                    support.push(p);
                    weights.push(w);
                }
            }
        }
        FiniteDistribution::new(support, weights)
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.support.iter().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `h∘D`: the distribution of `h(x)` for `x ~ D`.
    pub fn pushforward(&self, h: &Hypothesis) -> Result<FiniteDistribution> {
        pushforward(h, self)
    }
}

/// `h∘D`: images of the support, with colliding images merged by exact equality.
pub fn pushforward(h: &Hypothesis, d: &FiniteDistribution) -> Result<FiniteDistribution> {
    if h.input_dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.input_dim(),
            actual: d.dim(),
            context: "pushforward".into(),
        });
    }
    let images = d
        .atoms()
        .map(|(x, w)| h.evaluate(x).map(|y| (y, w)))
        .collect::<Result<Vec<_>>>()?;
    FiniteDistribution::from_atoms(images)
}
