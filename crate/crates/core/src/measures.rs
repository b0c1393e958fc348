//! Risks and distribution distances over finite hypothesis classes.
//!
//! Every supremum is an exact enumeration over ordered member pairs. The
//! per-distribution [`RiskMatrix`] is the shared building block: once the
//! class is evaluated on a distribution's support, `R_D[c_i, c_j]` for every
//! pair is a weighted sum over stored outputs, and the discrepancy of two
//! distributions is an elementwise scan of two matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::class::HypothesisClass;
use crate::distribution::FiniteDistribution;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::loss::{LossKind, LossSpec};
use crate::point::Point;

/// A generalization risk `R_D[h1, h2]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RiskValue(f64);

impl RiskValue {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(RiskValue(value))
        } else {
            Err(Error::NonFinite(format!("risk value {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub witness: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadDiscrepancyResult {
    pub value: f64,
    pub witness: (usize, usize),
}

fn check_output(spec: &LossSpec, h: &Hypothesis) -> Result<()> {
    if h.output_dim() != spec.dimension {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension,
            actual: h.output_dim(),
            context: "risk output".into(),
        });
    }
    Ok(())
}

/// `R_D[h1, h2] = Σ wᵢ ℓ(h1(xᵢ), h2(xᵢ))`, summed in support order.
pub fn risk(d: &FiniteDistribution, h1: &Hypothesis, h2: &Hypothesis, spec: &LossSpec) -> Result<RiskValue> {
    check_output(spec, h1)?;
    check_output(spec, h2)?;
    let mut total = 0.0;
    for (x, w) in d.atoms() {
        let a = h1.evaluate(x)?;
        let b = h2.evaluate(x)?;
        total += w * spec.kind.eval(a.coords(), b.coords());
    }
    RiskValue::new(total)
}

/// Unweighted mean loss over `(prediction, label)` pairs.
pub fn empirical_risk(samples: &[(Point, Point)], spec: &LossSpec) -> Result<RiskValue> {
    if samples.is_empty() {
        return Err(Error::Empty("sample list".into()));
    }
    let mut total = 0.0;
    for (a, b) in samples {
        total += spec.loss(a, b)?;
    }
    RiskValue::new(total / samples.len() as f64)
}

/// Outputs of every class member on a support, flattened member-major.
#[derive(Clone, Debug)]
pub struct ClassOutputs {
    members: usize,
    support: usize,
    dim: usize,
    values: Vec<f64>,
}

impl ClassOutputs {
    pub fn new(c: &HypothesisClass, d: &FiniteDistribution) -> Result<Self> {
        if c.input_dim() != d.dim() {
            return Err(Error::DimensionMismatch {
                expected: c.input_dim(),
                actual: d.dim(),
                context: "class evaluated on distribution".into(),
            });
        }
        let rows: Vec<Vec<f64>> = c
            .members()
            .par_iter()
            .map(|m| {
                let mut row = Vec::with_capacity(d.len() * c.output_dim());
                for x in d.support() {
                    row.extend_from_slice(m.evaluate(x)?.coords());
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        Ok(ClassOutputs {
            members: c.len(),
            support: d.len(),
            dim: c.output_dim(),
            values: rows.concat(),
        })
    }

    #[inline]
    pub fn output(&self, member: usize, atom: usize) -> &[f64] {
        let start = (member * self.support + atom) * self.dim;
        &self.values[start..start + self.dim]
    }

    pub fn members(&self) -> usize {
        self.members
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `R_D[c_i, c_j]` for every ordered pair of a class.
#[derive(Clone, Debug)]
pub struct RiskMatrix {
    n: usize,
    values: Vec<f64>,
}

impl RiskMatrix {
    pub fn new(c: &HypothesisClass, d: &FiniteDistribution, spec: &LossSpec) -> Result<Self> {
        if c.output_dim() != spec.dimension {
            return Err(Error::DimensionMismatch {
                expected: spec.dimension,
                actual: c.output_dim(),
                context: "class output".into(),
            });
        }
        let outputs = ClassOutputs::new(c, d)?;
        Ok(RiskMatrix::from_outputs(&outputs, d.weights(), spec.kind, true))
    }

    /// Builds the matrix from precomputed outputs. The summation order per
    /// entry matches [`risk`], so entries reproduce it bit-for-bit.
    pub fn from_outputs(outputs: &ClassOutputs, weights: &[f64], kind: LossKind, parallel: bool) -> Self {
        let n = outputs.members;
        let row = |i: usize| -> Vec<f64> {
            (0..n)
                .map(|j| {
                    let mut total = 0.0;
                    for (k, w) in weights.iter().enumerate() {
                        total += w * kind.eval(outputs.output(i, k), outputs.output(j, k));
                    }
                    total
                })
                .collect()
        };
        let rows: Vec<Vec<f64>> = if parallel {
            (0..n).into_par_iter().map(row).collect()
        } else {
            (0..n).map(row).collect()
        };
        RiskMatrix {
            n,
            values: rows.concat(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Maximizes `score(i, j)` over ordered pairs, keeping the lexicographically
/// smallest maximizer.
fn argmax_pairs(n: usize, score: impl Fn(usize, usize) -> f64) -> (f64, (usize, usize)) {
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for i in 0..n {
        for j in 0..n {
            let v = score(i, j);
            if v > best.0 {
                best = (v, (i, j));
            }
        }
    }
    best
}

/// Discrepancy between two distributions given their risk matrices.
pub fn discrepancy_from(m1: &RiskMatrix, m2: &RiskMatrix) -> Result<DiscrepancyResult> {
    if m1.is_empty() {
        return Err(Error::Empty("hypothesis class".into()));
    }
    let (value, witness) = argmax_pairs(m1.n, |i, j| (m1.get(i, j) - m2.get(i, j)).abs());
    Ok(DiscrepancyResult { value, witness })
}

/// `disc_C(D1, D2) = max over c1, c2 ∈ C of |R_{D1}[c1,c2] − R_{D2}[c1,c2]|`.
pub fn discrepancy(
    c: &HypothesisClass,
    d1: &FiniteDistribution,
    d2: &FiniteDistribution,
    spec: &LossSpec,
) -> Result<DiscrepancyResult> {
    discrepancy_with(c, d1, d2, spec, true)
}

pub fn discrepancy_with(
    c: &HypothesisClass,
    d1: &FiniteDistribution,
    d2: &FiniteDistribution,
    spec: &LossSpec,
    parallel: bool,
) -> Result<DiscrepancyResult> {
    c.require_nonempty("for discrepancy")?;
    let o1 = ClassOutputs::new(c, d1)?;
    let o2 = ClassOutputs::new(c, d2)?;
    check_class_output(c, spec)?;
    let m1 = RiskMatrix::from_outputs(&o1, d1.weights(), spec.kind, parallel);
    let m2 = RiskMatrix::from_outputs(&o2, d2.weights(), spec.kind, parallel);
    discrepancy_from(&m1, &m2)
}

fn check_class_output(c: &HypothesisClass, spec: &LossSpec) -> Result<()> {
    if c.output_dim() != spec.dimension {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension,
            actual: c.output_dim(),
            context: "class output".into(),
        });
    }
    Ok(())
}

/// Quad discrepancy of two pairs, given the four risk matrices.
pub fn quad_discrepancy_from(
    m11: &RiskMatrix,
    m12: &RiskMatrix,
    m21: &RiskMatrix,
    m22: &RiskMatrix,
) -> Result<QuadDiscrepancyResult> {
    if m11.is_empty() {
        return Err(Error::Empty("hypothesis class".into()));
    }
    let (value, witness) = argmax_pairs(m11.n, |i, j| {
        let u1 = m11.get(i, j) - m12.get(i, j);
        let u2 = m21.get(i, j) - m22.get(i, j);
        (u1 - u2).abs()
    });
    Ok(QuadDiscrepancyResult { value, witness })
}

/// `q-disc_C[(D11, D12), (D21, D22)]`: the largest gap between the risk
/// differences `U_{D11,D12}` and `U_{D21,D22}` over member pairs.
pub fn quad_discrepancy(
    c: &HypothesisClass,
    d11: &FiniteDistribution,
    d12: &FiniteDistribution,
    d21: &FiniteDistribution,
    d22: &FiniteDistribution,
    spec: &LossSpec,
) -> Result<QuadDiscrepancyResult> {
    c.require_nonempty("for quad discrepancy")?;
    let m = [d11, d12, d21, d22]
        .iter()
        .map(|d| RiskMatrix::new(c, d, spec))
        .collect::<Result<Vec<_>>>()?;
    quad_discrepancy_from(&m[0], &m[1], &m[2], &m[3])
}

/// The class `{x ↦ [c1(x) ≠ c2(x)] : c1, c2 ∈ C}` in row-major pair order.
///
/// `probes` are used to confirm that every member is binary-valued.
pub fn symmetric_difference_class(c: &HypothesisClass, probes: &[Point]) -> Result<HypothesisClass> {
    for (i, m) in c.members().iter().enumerate() {
        if m.output_dim() != 1 {
            return Err(Error::InvalidClass(format!("member {i} is not scalar-valued")));
        }
        for p in probes {
            let v = m.evaluate(p)?.coords()[0];
            if v != 0.0 && v != 1.0 {
                return Err(Error::NonBinary { member: i, value: v });
            }
        }
    }
    let mut members = Vec::with_capacity(c.len() * c.len());
    for a in c.members() {
        for b in c.members() {
            members.push(Hypothesis::disagreement(a.clone(), b.clone())?);
        }
    }
    HypothesisClass::with_dims(c.input_dim(), 1, members)
}

/// Largest mean gap `|E_{D1}[d] − E_{D2}[d]|` over scalar members `d`, with
/// the lowest maximizing index.
pub fn max_mean_gap(c: &HypothesisClass, d1: &FiniteDistribution, d2: &FiniteDistribution) -> Result<(f64, usize)> {
    c.require_nonempty("for mean gap")?;
    if c.output_dim() != 1 {
        return Err(Error::InvalidClass("mean gap needs scalar members".into()));
    }
    let mean = |m: &Hypothesis, d: &FiniteDistribution| -> Result<f64> {
        let mut total = 0.0;
        for (x, w) in d.atoms() {
            total += w * m.evaluate(x)?.coords()[0];
        }
        Ok(total)
    };
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, m) in c.members().iter().enumerate() {
        let v = (mean(m, d1)? - mean(m, d2)?).abs();
        if v > best.0 {
            best = (v, i);
        }
    }
    Ok(best)
}

/// Empirical factor-triangle constant: `max ℓ(y1,y3) / (ℓ(y1,y2) + ℓ(y2,y3))`.
///
/// A lower bound on the true constant. Triples with a zero denominator are
/// skipped when their numerator is zero and rejected otherwise.
pub fn estimate_k(spec: &LossSpec, triples: &[(Point, Point, Point)]) -> Result<f64> {
    if triples.is_empty() {
        return Err(Error::Empty("probe triple list".into()));
    }
    let mut best: f64 = 0.0;
    for (y1, y2, y3) in triples {
        let num = spec.loss(y1, y3)?;
        let den = spec.loss(y1, y2)? + spec.loss(y2, y3)?;
        if den == 0.0 {
            if num > 0.0 {
                return Err(Error::DegenerateProbe(format!(
                    "ℓ(y1,y3) = {num} with zero intermediate losses at {y2:?}"
                )));
            }
            continue;
        }
        best = best.max(num / den);
    }
    Ok(best)
}

/// Empirical Lipschitz constant of `h` with respect to `spec.kind`:
/// `max ℓ(h(a1), h(a2)) / ℓ(a1, a2)`.
pub fn estimate_l(h: &Hypothesis, spec: &LossSpec, pairs: &[(Point, Point)]) -> Result<f64> {
    let kind = spec.kind;
    let mut best: f64 = 0.0;
    for (a1, a2) in pairs {
        for a in [a1, a2] {
            if a.dim() != h.input_dim() {
                return Err(Error::DimensionMismatch {
                    expected: h.input_dim(),
                    actual: a.dim(),
                    context: "Lipschitz probe".into(),
                });
            }
        }
        let d_in = kind.eval(a1.coords(), a2.coords());
        let d_out = kind.eval(h.evaluate(a1)?.coords(), h.evaluate(a2)?.coords());
        if d_in == 0.0 {
            if d_out > 0.0 {
                return Err(Error::DegenerateProbe(format!(
                    "equal inputs {a1:?} map to distinct outputs"
                )));
            }
            continue;
        }
        best = best.max(d_out / d_in);
    }
    Ok(best)
}
