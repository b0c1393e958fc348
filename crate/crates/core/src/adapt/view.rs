use indexmap::IndexMap;

use crate::bounds::{DASetting, SettingKind};
use crate::class::HypothesisClass;
use crate::distribution::FiniteDistribution;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::loss::LossSpec;

/// The data a learner is given in each setting, with held-out targets
/// removed.
///
/// | kind | distributions | labels |
/// |---|---|---|
/// | standard / binary | `D_S`, `D_T` | `y_S` |
/// | output | `D_S`, `D^y_T` | `y_S` |
/// | analogy | `D_S`, `D^y_S`, `D^y_T` | `y_S` |
/// | domain transfer | `D_1`, `D^y_2` | `f` |
///
/// `D^y_T` is the target label distribution `y_T∘D_T`: the learner sees
/// target labels but never which input produced them. Every class of the
/// setting is visible.
#[derive(Clone, Debug)]
pub struct LearnerView {
    kind: SettingKind,
    distributions: IndexMap<String, FiniteDistribution>,
    labels: IndexMap<String, Hypothesis>,
    classes: IndexMap<String, HypothesisClass>,
    loss: LossSpec,
}

impl LearnerView {
    pub fn new(s: &DASetting) -> Result<Self> {
        let mut distributions = IndexMap::new();
        let mut labels = IndexMap::new();
        let mut add = |name: &str, d: FiniteDistribution| distributions.insert(name.to_string(), d);
        match s.kind() {
            SettingKind::StandardDa | SettingKind::BinaryDa => {
                add("D_S", s.distribution("D_S")?.clone());
                add("D_T", s.distribution("D_T")?.clone());
                labels.insert("y_S".to_string(), s.target("y_S")?.clone());
            }
            SettingKind::OutputDa => {
                add("D_S", s.distribution("D_S")?.clone());
                add("D^y_T", s.output_distribution("y_T", "D_T")?);
                labels.insert("y_S".to_string(), s.target("y_S")?.clone());
            }
            SettingKind::AnalogyOda => {
                add("D_S", s.distribution("D_S")?.clone());
                add("D^y_S", s.output_distribution("y_S", "D_S")?);
                add("D^y_T", s.output_distribution("y_T", "D_T")?);
                labels.insert("y_S".to_string(), s.target("y_S")?.clone());
            }
            SettingKind::DomainTransfer => {
                add("D_1", s.distribution("D_1")?.clone());
                add("D^y_2", s.output_distribution("y", "D_2")?);
                labels.insert("f".to_string(), s.target("f")?.clone());
            }
            SettingKind::TwoSided => {
                return Err(Error::InvalidSetting(
                    "no trainer is defined for two_sided settings".into(),
                ))
            }
        }
        Ok(LearnerView {
            kind: s.kind(),
            distributions,
            labels,
            classes: s.classes().clone(),
            loss: *s.loss(),
        })
    }

    pub fn kind(&self) -> SettingKind {
        self.kind
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    pub fn distribution(&self, name: &str) -> Result<&FiniteDistribution> {
        self.distributions
            .get(name)
            .ok_or_else(|| Error::InvalidSetting(format!("learner has no distribution {name}")))
    }

    pub fn label(&self, name: &str) -> Result<&Hypothesis> {
        self.labels
            .get(name)
            .ok_or_else(|| Error::InvalidSetting(format!("learner has no labels {name}")))
    }

    pub fn class(&self, name: &str) -> Result<&HypothesisClass> {
        let c = self
            .classes
            .get(name)
            .ok_or_else(|| Error::InvalidSetting(format!("learner has no class {name}")))?;
        c.require_nonempty(name)?;
        Ok(c)
    }

    pub fn distribution_names(&self) -> impl Iterator<Item = &str> {
        self.distributions.keys().map(String::as_str)
    }

    pub fn label_names(&self) -> impl Iterator<Item = &str> {
        self.labels.keys().map(String::as_str)
    }
}
