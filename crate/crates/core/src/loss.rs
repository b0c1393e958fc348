use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// L1 norm of the difference.
    Absolute,
    /// Squared L2 norm of the difference.
    Squared,
    /// Indicator of inequality.
    ZeroOne,
}

impl LossKind {
    /// Factor-triangle constant carried into bound composition.
    ///
    /// Squared loss keeps the conservative constant 3 even though 2 is tight.
    pub fn triangle_constant(self) -> f64 {
        match self {
            LossKind::Absolute | LossKind::ZeroOne => 1.0,
            LossKind::Squared => 3.0,
        }
    }

    /// Smallest valid factor-triangle constant.
    pub fn tight_triangle_constant(self) -> f64 {
        match self {
            LossKind::Absolute | LossKind::ZeroOne => 1.0,
            LossKind::Squared => 2.0,
        }
    }

    /// Raw loss on equal-length coordinate slices. Callers check dimensions.
    #[inline]
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            LossKind::Absolute => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            LossKind::Squared => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let d = x - y;
                    d * d
                })
                .sum(),
            LossKind::ZeroOne => {
                if a.iter().zip(b).all(|(x, y)| x == y) {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Absolute => "abs",
            LossKind::Squared => "sq",
            LossKind::ZeroOne => "01",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs" | "absolute" => Ok(LossKind::Absolute),
            "sq" | "squared" => Ok(LossKind::Squared),
            "01" | "zero_one" | "zero-one" => Ok(LossKind::ZeroOne),
            other => Err(Error::InvalidLoss(format!("unknown loss `{other}`"))),
        }
    }
}

/// A loss kind bound to a dimension, with its factor-triangle constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LossSpecRepr")]
pub struct LossSpec {
    pub kind: LossKind,
    pub dimension: usize,
    pub triangle_constant: f64,
}

#[derive(Deserialize)]
struct LossSpecRepr {
    kind: LossKind,
    dimension: usize,
    triangle_constant: f64,
}

impl TryFrom<LossSpecRepr> for LossSpec {
    type Error = Error;

    fn try_from(r: LossSpecRepr) -> Result<Self> {
        let spec = LossSpec::new(r.kind, r.dimension)?;
        if spec.triangle_constant != r.triangle_constant {
            return Err(Error::InvalidLoss(format!(
                "{} loss carries K = {}, not {}",
                r.kind, spec.triangle_constant, r.triangle_constant
            )));
        }
        Ok(spec)
    }
}

impl LossSpec {
    pub fn new(kind: LossKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidLoss("dimension must be positive".into()));
        }
        if kind == LossKind::ZeroOne && dimension != 1 {
            return Err(Error::InvalidLoss(format!(
                "zero_one loss is defined on dimension 1, not {dimension}"
            )));
        }
        Ok(LossSpec {
            kind,
            dimension,
            triangle_constant: kind.triangle_constant(),
        })
    }

    pub fn absolute(dimension: usize) -> Self {
        LossSpec::new(LossKind::Absolute, dimension).expect("positive dimension")
    }

    pub fn squared(dimension: usize) -> Self {
        LossSpec::new(LossKind::Squared, dimension).expect("positive dimension")
    }

    pub fn zero_one() -> Self {
        LossSpec::new(LossKind::ZeroOne, 1).expect("dimension 1")
    }

    /// Same loss family on another space (e.g. the feature space).
    ///
    /// Zero-one keeps its indicator form on any dimension here, since only
    /// equality matters.
    pub fn on_dimension(&self, dimension: usize) -> LossSpec {
        LossSpec {
            kind: self.kind,
            dimension,
            triangle_constant: self.triangle_constant,
        }
    }

    pub fn loss(&self, a: &Point, b: &Point) -> Result<f64> {
        for p in [a, b] {
            if p.dim() != self.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    actual: p.dim(),
                    context: format!("{} loss", self.kind),
                });
            }
        }
        Ok(self.kind.eval(a.coords(), b.coords()))
    }
}

/// `ℓ(a, b)` under `spec`.
pub fn loss(spec: &LossSpec, a: &Point, b: &Point) -> Result<f64> {
    spec.loss(a, b)
}
