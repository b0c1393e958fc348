//! Exhaustive-search trainers for the bound-motivated objectives.
//!
//! Each trainer enumerates the full product of the relevant classes,
//! evaluates the measurable objective terms on a [`LearnerView`], and keeps
//! the lowest-index minimizer. Held-out targets are consulted only to fill
//! [`TrainResult::target_risk`] afterwards.
//!
//! A weight of `+∞` turns its term into a filter: candidates are first
//! restricted to those minimizing every infinitely weighted term (in term
//! order), then ranked by the finitely weighted sum. Filter terms are left
//! out of [`TrainResult::objective_value`].

mod audit;
mod trainers;
mod view;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{Candidate, DASetting, SettingKind};
use crate::error::{Error, Result};

pub use audit::{audit, Audit, AUDIT_TOLERANCE};
pub use trainers::{train_analogy, train_domain_transfer, train_output_da, train_standard_da};
pub use view::LearnerView;

/// Term weights. The source-risk term always has weight 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    #[serde(with = "weight")]
    pub w_disc: f64,
    #[serde(with = "weight")]
    pub w_inv: f64,
    #[serde(with = "weight")]
    pub w_tid: f64,
    #[serde(with = "weight")]
    pub w_const: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights {
            w_disc: 1.0,
            w_inv: 1.0,
            w_tid: 1.0,
            w_const: 1.0,
        }
    }
}

impl ObjectiveWeights {
    /// Plain empirical risk minimization: only the source-risk term (the
    /// transfer term `tid` for domain transfer) is weighted.
    pub fn erm() -> Self {
        ObjectiveWeights {
            w_disc: 0.0,
            w_inv: 0.0,
            w_tid: 1.0,
            w_const: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in self.named() {
            if w.is_nan() || w < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "weight {name} = {w} must be non-negative"
                )));
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, f64); 4] {
        [
            ("w_disc", self.w_disc),
            ("w_inv", self.w_inv),
            ("w_tid", self.w_tid),
            ("w_const", self.w_const),
        ]
    }

    /// Weight applied to the objective term `term`.
    pub fn for_term(&self, term: &str) -> Result<f64> {
        match term {
            "source_risk" => Ok(1.0),
            "disc" => Ok(self.w_disc),
            "invertibility" => Ok(self.w_inv),
            "tid" => Ok(self.w_tid),
            "const" => Ok(self.w_const),
            other => Err(Error::InvalidConfig(format!("unknown objective term {other}"))),
        }
    }
}

/// Serde adapter for a single weight: infinite weights are written as the
/// string `"inf"` (JSON has no infinity), and `"inf"` or `"infinity"` are
/// accepted on input.
pub mod weight {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &f64, s: S) -> Result<S::Ok, S::Error> {
        if w.is_finite() {
            s.serialize_f64(*w)
        } else {
            s.serialize_str("inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                _ => Err(D::Error::custom(format!("invalid weight {t:?}"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub candidate: Candidate,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub setting: String,
    pub chosen: Candidate,
    pub objective_value: f64,
    pub objective_terms: IndexMap<String, f64>,
    pub weights: ObjectiveWeights,
    pub target_risk: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
}

impl TrainResult {
    /// `Σ w·term` over the finitely weighted terms.
    pub fn weighted_sum(&self) -> Result<f64> {
        let mut total = 0.0;
        for (name, v) in &self.objective_terms {
            let w = self.weights.for_term(name)?;
            if w.is_finite() {
                total += w * v;
            }
        }
        Ok(total)
    }
}

/// Trains the objective matching the setting's kind; binary settings use
/// the standard trainer. With `trace`, every candidate's objective is kept.
pub fn train(s: &DASetting, weights: &ObjectiveWeights, trace: bool) -> Result<TrainResult> {
    match s.kind() {
        SettingKind::StandardDa | SettingKind::BinaryDa => trainers::standard_da(s, weights, trace),
        SettingKind::OutputDa => trainers::output_da(s, weights, trace),
        SettingKind::AnalogyOda => trainers::analogy(s, weights, trace),
        SettingKind::DomainTransfer => trainers::domain_transfer(s, weights, trace),
        SettingKind::TwoSided => Err(Error::InvalidSetting(
            "no trainer is defined for two_sided settings".into(),
        )),
    }
}

/// Roles and terms of a product-grid search.
pub(crate) struct Grid<'a> {
    pub roles: &'a [&'a str],
    pub sizes: Vec<usize>,
    pub terms: &'a [&'a str],
}

impl Grid<'_> {
    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Mixed-radix decoding; the first role varies slowest.
    pub fn decode(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.sizes.len()];
        for k in (0..self.sizes.len()).rev() {
            idx[k] = flat % self.sizes[k];
            flat /= self.sizes[k];
        }
        idx
    }

    pub fn candidate(&self, idx: &[usize]) -> Candidate {
        self.roles
            .iter()
            .map(|r| r.to_string())
            .zip(idx.iter().copied())
            .collect()
    }

    pub fn term_weights(&self, w: &ObjectiveWeights) -> Result<Vec<f64>> {
        self.terms.iter().map(|t| w.for_term(t)).collect()
    }
}

pub(crate) fn finite_value(weights: &[f64], terms: &[f64]) -> f64 {
    weights
        .iter()
        .zip(terms)
        .filter(|(w, _)| w.is_finite())
        .map(|(w, t)| w * t)
        .sum()
}

/// Outcome of a grid search: chosen indices, their term values and (when
/// requested) the full trace.
pub(crate) struct Found {
    pub index: Vec<usize>,
    pub terms: Vec<f64>,
    pub value: f64,
    pub trace: Vec<TraceEntry>,
}

pub(crate) fn search(
    grid: &Grid<'_>,
    weights: &ObjectiveWeights,
    trace: bool,
    eval: impl Fn(&[usize]) -> Result<Vec<f64>> + Sync,
) -> Result<Found> {
    weights.validate()?;
    let n = grid.len();
    if n == 0 {
        return Err(Error::Empty("candidate grid".into()));
    }
    let w = grid.term_weights(weights)?;
    let table = (0..n)
        .into_par_iter()
        .map(|i| eval(&grid.decode(i)))
        .collect::<Result<Vec<_>>>()?;

    let mut alive: Vec<usize> = (0..n).collect();
    for (t, wt) in w.iter().enumerate() {
        if wt.is_infinite() {
            let m = alive.iter().map(|&i| table[i][t]).fold(f64::INFINITY, f64::min);
            alive.retain(|&i| table[i][t] == m);
        }
    }
    let mut best = alive[0];
    let mut best_value = finite_value(&w, &table[best]);
    for &i in &alive[1..] {
        let v = finite_value(&w, &table[i]);
        if v < best_value {
            best = i;
            best_value = v;
        }
    }
    let trace = if trace {
        table
            .iter()
            .enumerate()
            .map(|(i, t)| TraceEntry {
                candidate: grid.candidate(&grid.decode(i)),
                objective: finite_value(&w, t),
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(Found {
        index: grid.decode(best),
        terms: table[best].clone(),
        value: best_value,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_weights_round_trip() {
        let w = ObjectiveWeights {
            w_inv: f64::INFINITY,
            ..Default::default()
        };
        let json = serde_json::to_string(&w).unwrap();
        assert!(json.contains("\"w_inv\":\"inf\""));
        let back: ObjectiveWeights = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn negative_and_nan_weights_rejected() {
        let mut w = ObjectiveWeights {
            w_disc: -1.0,
            ..Default::default()
        };
        assert!(w.validate().is_err());
        w.w_disc = f64::NAN;
        assert!(w.validate().is_err());
    }

    #[test]
    fn decode_is_row_major() {
        let g = Grid {
            roles: &["f", "g"],
            sizes: vec![2, 3],
            terms: &["source_risk"],
        };
        let all: Vec<_> = (0..6).map(|i| g.decode(i)).collect();
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[3], vec![1, 0]);
        assert_eq!(all[5], vec![1, 2]);
    }

    #[test]
    fn filter_then_rank() {
        let g = Grid {
            roles: &["f"],
            sizes: vec![4],
            terms: &["source_risk", "invertibility"],
        };
        let w = ObjectiveWeights {
            w_inv: f64::INFINITY,
            ..Default::default()
        };
        let data = [[0.0, 1.0], [3.0, 0.5], [2.0, 0.5], [2.0, 0.5]];
        let found = search(&g, &w, true, |i| Ok(data[i[0]].to_vec())).unwrap();
        assert_eq!(found.index, vec![2]);
        assert_eq!(found.value, 2.0);
        assert_eq!(found.trace.len(), 4);
    }
}
