use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Additive tolerance on every checked inequality.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≤ constant · Σ rhs`
    Le,
    /// `lhs = Σ rhs`
    Eq,
}

/// One displayed inequality of a proof, over named terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofStep {
    pub id: String,
    pub lhs_term: String,
    pub rhs_terms: Vec<String>,
    pub constant: f64,
    pub relation: Relation,
    pub justification: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub relation: Relation,
    pub pass: bool,
    pub lhs_term: String,
    pub rhs_terms: Vec<String>,
    pub justification: String,
}

impl StepReport {
    pub fn check(id: &str, lhs: f64, rhs: f64, constant: f64, relation: Relation, justification: &str) -> Self {
        let pass = match relation {
            Relation::Le => lhs <= rhs + TOLERANCE,
            Relation::Eq => (lhs - rhs).abs() <= TOLERANCE,
        };
        StepReport {
            id: id.to_string(),
            lhs,
            rhs,
            constant,
            relation,
            pass,
            lhs_term: String::new(),
            rhs_terms: Vec::new(),
            justification: justification.to_string(),
        }
    }
}

/// The evaluated bound of one theorem on one setting and hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub setting: String,
    pub theorem: String,
    pub lhs: f64,
    pub terms: IndexMap<String, f64>,
    /// Mechanically composed multiplier of each term along the proof chain.
    pub coefficients: IndexMap<String, f64>,
    pub constant: f64,
    pub rhs: f64,
    pub slack: f64,
    pub steps: Vec<StepReport>,
    pub pass: bool,
    /// `"exact"` when the checked statement is the theorem as stated,
    /// `"k_weighted"` when K factors were inserted for a loss outside its
    /// hypotheses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement: Option<String>,
}

impl BoundReport {
    pub fn failed_steps(&self) -> impl Iterator<Item = &StepReport> {
        self.steps.iter().filter(|s| !s.pass)
    }
}

/// Records term values and proof steps, then composes them into a report.
#[derive(Debug, Default)]
pub struct Chain {
    values: IndexMap<String, f64>,
    steps: Vec<ProofStep>,
}

impl Chain {
    pub fn new() -> Self {
        Chain::default()
    }

    pub fn term(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.values.insert(key.into(), value);
        self
    }

    pub fn value(&self, key: &str) -> Result<f64> {
        self.values
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidSetting(format!("proof term `{key}` was never evaluated")))
    }

    pub fn le(&mut self, id: &str, lhs: &str, rhs: &[&str], constant: f64, justification: &str) -> &mut Self {
        self.push(id, lhs, rhs, constant, Relation::Le, justification)
    }

    pub fn eq(&mut self, id: &str, lhs: &str, rhs: &str, justification: &str) -> &mut Self {
        self.push(id, lhs, &[rhs], 1.0, Relation::Eq, justification)
    }

    fn push(
        &mut self,
        id: &str,
        lhs: &str,
        rhs: &[&str],
        constant: f64,
        relation: Relation,
        justification: &str,
    ) -> &mut Self {
        self.steps.push(ProofStep {
            id: id.to_string(),
            lhs_term: lhs.to_string(),
            rhs_terms: rhs.iter().map(|s| s.to_string()).collect(),
            constant,
            relation,
            justification: justification.to_string(),
        });
        self
    }

    pub fn steps(&self) -> &[ProofStep] {
        &self.steps
    }

    pub fn step_reports(&self) -> Result<Vec<StepReport>> {
        self.steps
            .iter()
            .map(|s| {
                let lhs = self.value(&s.lhs_term)?;
                let mut sum = 0.0;
                for r in &s.rhs_terms {
                    sum += self.value(r)?;
                }
                let mut report =
                    StepReport::check(&s.id, lhs, s.constant * sum, s.constant, s.relation, &s.justification);
                report.lhs_term = s.lhs_term.clone();
                report.rhs_terms = s.rhs_terms.clone();
                Ok(report)
            })
            .collect()
    }

    /// Per-leaf multipliers of `key`, found by substituting each step's
    /// right-hand side for its left-hand side until only leaves remain.
    pub fn expand(&self, key: &str, leaves: &[&str]) -> Result<IndexMap<String, f64>> {
        let mut out = IndexMap::new();
        self.expand_into(key, 1.0, leaves, &mut out, 0)?;
        Ok(out)
    }

    fn expand_into(
        &self,
        key: &str,
        factor: f64,
        leaves: &[&str],
        out: &mut IndexMap<String, f64>,
        depth: usize,
    ) -> Result<()> {
        if leaves.contains(&key) {
            *out.entry(key.to_string()).or_insert(0.0) += factor;
            return Ok(());
        }
        if depth > self.steps.len() {
            return Err(Error::InvalidSetting(format!("proof chain is cyclic at `{key}`")));
        }
        let step = self
            .steps
            .iter()
            .find(|s| s.lhs_term == key)
            .ok_or_else(|| Error::InvalidSetting(format!("proof chain never bounds `{key}`")))?;
        for r in &step.rhs_terms {
            self.expand_into(r, factor * step.constant, leaves, out, depth + 1)?;
        }
        Ok(())
    }

    /// Composes the chain into the theorem's statement.
    ///
    /// `terms` lists the theorem's right-hand terms; a term with several
    /// parts (such as λ) is the sum of its parts and takes the largest of
    /// their multipliers. The global check is
    /// `lhs ≤ constant · Σ terms` with `constant` the largest multiplier.
    pub fn finish(
        &self,
        setting: &str,
        theorem: &str,
        lhs_key: &str,
        terms: &[(&str, &[&str])],
    ) -> Result<BoundReport> {
        let leaves: Vec<&str> = terms.iter().flat_map(|(_, parts)| parts.iter().copied()).collect();
        let multipliers = self.expand(lhs_key, &leaves)?;
        let mut term_values = IndexMap::new();
        let mut coefficients = IndexMap::new();
        for (name, parts) in terms {
            let mut value = 0.0;
            let mut coefficient: f64 = 0.0;
            for part in *parts {
                value += self.value(part)?;
                coefficient = coefficient.max(multipliers.get(*part).copied().unwrap_or(0.0));
            }
            term_values.insert(name.to_string(), value);
            coefficients.insert(name.to_string(), coefficient);
        }
        let constant = coefficients.values().copied().fold(1.0, f64::max);
        let rhs = constant * term_values.values().sum::<f64>();
        let lhs = self.value(lhs_key)?;
        let steps = self.step_reports()?;
        let pass = steps.iter().all(|s| s.pass) && lhs <= rhs + TOLERANCE;
        Ok(BoundReport {
            setting: setting.to_string(),
            theorem: theorem.to_string(),
            lhs,
            terms: term_values,
            coefficients,
            constant,
            rhs,
            slack: rhs - lhs,
            steps,
            pass,
            statement: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expands_repeated_leaves() {
        let mut c = Chain::new();
        c.term("a", 3.0).term("b", 1.0).term("c", 1.0).term("d", 0.5);
        c.le("s1", "a", &["b", "c"], 2.0, "triangle");
        c.le("s2", "b", &["d", "c"], 3.0, "triangle");
        let m = c.expand("a", &["c", "d"]).unwrap();
        assert_eq!(m["c"], 2.0 + 6.0);
        assert_eq!(m["d"], 6.0);
    }

    #[test]
    fn finish_composes_terms() {
        let mut c = Chain::new();
        c.term("lhs", 2.0).term("x", 1.0).term("y", 0.25).term("z", 0.5);
        c.le("s1", "lhs", &["x", "w"], 1.0, "triangle");
        c.eq("s2", "w", "y", "identity");
        c.term("w", 0.25);
        let r = c
            .finish("demo", "t", "lhs", &[("x", &["x"]), ("yz", &["y", "z"])])
            .unwrap();
        assert_eq!(r.terms["yz"], 0.75);
        assert_eq!(r.constant, 1.0);
        assert_eq!(r.rhs, 1.75);
        assert!(!r.pass);
        assert!(!r.steps[0].pass);
        assert!(r.steps[1].pass);
        assert_eq!(r.slack, -0.25);
    }

    #[test]
    fn missing_links_are_errors() {
        let mut c = Chain::new();
        c.term("a", 0.0).term("b", 0.0);
        c.le("s", "a", &["b"], 1.0, "triangle");
        assert!(c.expand("a", &["c"]).is_err());
        assert!(c.finish("demo", "t", "a", &[("c", &["c"])]).is_err());
    }

    #[test]
    fn zero_lhs_always_passes() {
        let r = StepReport::check("s", 0.0, 0.0, 3.0, Relation::Le, "triangle");
        assert!(r.pass);
    }
}
