use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::class::HypothesisClass;
use crate::distribution::FiniteDistribution;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::loss::{LossKind, LossSpec};

/// The six domain-shift settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingKind {
    StandardDa,
    BinaryDa,
    OutputDa,
    AnalogyOda,
    TwoSided,
    DomainTransfer,
}

impl SettingKind {
    pub const ALL: [SettingKind; 6] = [
        SettingKind::StandardDa,
        SettingKind::BinaryDa,
        SettingKind::OutputDa,
        SettingKind::AnalogyOda,
        SettingKind::TwoSided,
        SettingKind::DomainTransfer,
    ];

    /// Short name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            SettingKind::StandardDa => "da",
            SettingKind::BinaryDa => "binary-da",
            SettingKind::OutputDa => "oda",
            SettingKind::AnalogyOda => "analogy",
            SettingKind::TwoSided => "two-sided",
            SettingKind::DomainTransfer => "dt",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SettingKind::StandardDa => "standard_da",
            SettingKind::BinaryDa => "binary_da",
            SettingKind::OutputDa => "output_da",
            SettingKind::AnalogyOda => "analogy_oda",
            SettingKind::TwoSided => "two_sided",
            SettingKind::DomainTransfer => "domain_transfer",
        }
    }

    fn required(
        self,
    ) -> (
        &'static [&'static str],
        &'static [&'static str],
        &'static [&'static str],
    ) {
        match self {
            SettingKind::StandardDa | SettingKind::BinaryDa => (&["D_S", "D_T"], &["y_S", "y_T"], &["H1", "H2"]),
            SettingKind::OutputDa => (&["D_S", "D_T"], &["y_S", "y_T"], &["H1", "H2", "H2_prime"]),
            SettingKind::AnalogyOda => (&["D_S", "D_T"], &["y_S", "y_T"], &["H1", "H3", "H4"]),
            SettingKind::TwoSided => (&["D_1", "D_2"], &["y_1", "y_2"], &["H1", "H2", "H3", "C"]),
            SettingKind::DomainTransfer => (&["D_1", "D_2"], &["y", "f"], &["H2"]),
        }
    }
}

impl fmt::Display for SettingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SettingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SettingKind::ALL
            .into_iter()
            .find(|k| k.cli_name() == s || k.name() == s)
            .ok_or_else(|| Error::InvalidSetting(format!("unknown setting kind `{s}`")))
    }
}

/// A complete domain-shift instance: named distributions, ground-truth
/// targets, hypothesis classes and the loss on the output space.
///
/// Required names per kind:
///
/// | kind | distributions | targets | classes |
/// |---|---|---|---|
/// | `standard_da`, `binary_da` | `D_S`, `D_T` | `y_S`, `y_T` | `H1: X→F`, `H2: F→Y` |
/// | `output_da` | `D_S`, `D_T` | `y_S`, `y_T` | `H1`, `H2`, `H2_prime: Y→F` |
/// | `analogy_oda` | `D_S`, `D_T` | `y_S`, `y_T` | `H1`, `H3: Y→Y`, `H4: F→Y`, both invertible |
/// | `two_sided` | `D_1`, `D_2` | `y_1`, `y_2` | `H1`, `H2`, adapters `H3: Y→A`, discriminators `C: A→B` |
/// | `domain_transfer` | `D_1`, `D_2` | `y: X→X` idempotent, fixed `f: X→F` | `H2: F→X` |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SettingRepr")]
pub struct DASetting {
    kind: SettingKind,
    distributions: IndexMap<String, FiniteDistribution>,
    targets: IndexMap<String, Hypothesis>,
    classes: IndexMap<String, HypothesisClass>,
    loss: LossSpec,
}

#[derive(Deserialize)]
struct SettingRepr {
    kind: SettingKind,
    distributions: IndexMap<String, FiniteDistribution>,
    targets: IndexMap<String, Hypothesis>,
    classes: IndexMap<String, HypothesisClass>,
    loss: LossSpec,
}

impl TryFrom<SettingRepr> for DASetting {
    type Error = Error;

    fn try_from(r: SettingRepr) -> Result<Self> {
        DASetting::new(r.kind, r.distributions, r.targets, r.classes, r.loss)
    }
}

fn expect_dim(expected: usize, actual: usize, context: &str) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            actual,
            context: context.to_string(),
        })
    }
}

impl DASetting {
    pub fn new(
        kind: SettingKind,
        distributions: IndexMap<String, FiniteDistribution>,
        targets: IndexMap<String, Hypothesis>,
        classes: IndexMap<String, HypothesisClass>,
        loss: LossSpec,
    ) -> Result<Self> {
        let setting = DASetting {
            kind,
            distributions,
            targets,
            classes,
            loss,
        };
        setting.validate()?;
        Ok(setting)
    }

    fn validate(&self) -> Result<()> {
        let (ds, ts, cs) = self.kind.required();
        for name in ds {
            self.distribution(name)?;
        }
        for name in ts {
            self.target(name)?;
        }
        for name in cs {
            self.class(name)?.require_nonempty(name)?;
        }
        match self.kind {
            SettingKind::StandardDa | SettingKind::BinaryDa | SettingKind::OutputDa => self.validate_da(),
            SettingKind::AnalogyOda => self.validate_analogy(),
            SettingKind::TwoSided => self.validate_two_sided(),
            SettingKind::DomainTransfer => self.validate_transfer(),
        }
    }

    /// Evaluates `target` on every support point of the named distributions.
    fn evaluate_on(&self, target: &str, dists: &[&str]) -> Result<()> {
        let y = self.target(target)?;
        for d in dists {
            for x in self.distribution(d)?.support() {
                y.evaluate(x)?;
            }
        }
        Ok(())
    }

    fn validate_da(&self) -> Result<()> {
        let (d_s, d_t) = (self.distribution("D_S")?, self.distribution("D_T")?);
        let (h1, h2) = (self.class("H1")?, self.class("H2")?);
        let x = d_s.dim();
        expect_dim(x, d_t.dim(), "D_T dimension")?;
        expect_dim(x, h1.input_dim(), "H1 input")?;
        expect_dim(h1.output_dim(), h2.input_dim(), "H2 input")?;
        let y = self.loss.dimension;
        expect_dim(y, h2.output_dim(), "H2 output")?;
        for t in ["y_S", "y_T"] {
            let target = self.target(t)?;
            expect_dim(x, target.input_dim(), &format!("{t} input"))?;
            expect_dim(y, target.output_dim(), &format!("{t} output"))?;
        }
        self.evaluate_on("y_S", &["D_S", "D_T"])?;
        self.evaluate_on("y_T", &["D_S", "D_T"])?;
        if self.kind == SettingKind::OutputDa {
            let hp = self.class("H2_prime")?;
            expect_dim(y, hp.input_dim(), "H2_prime input")?;
            expect_dim(h1.output_dim(), hp.output_dim(), "H2_prime output")?;
        }
        if self.kind == SettingKind::BinaryDa {
            if self.loss.kind != LossKind::ZeroOne {
                return Err(Error::InvalidSetting("binary_da requires the zero_one loss".into()));
            }
            let (ys, yt) = (self.target("y_S")?, self.target("y_T")?);
            for x in d_s.support().iter().chain(d_t.support()) {
                let (a, b) = (ys.evaluate(x)?, yt.evaluate(x)?);
                if a != b {
                    return Err(Error::InvalidSetting(format!("y_S and y_T differ at {x:?}")));
                }
                let v = a.coords()[0];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::InvalidSetting(format!("binary target takes value {v}")));
                }
            }
        }
        Ok(())
    }

    fn validate_analogy(&self) -> Result<()> {
        let (d_s, d_t) = (self.distribution("D_S")?, self.distribution("D_T")?);
        let (h1, h3, h4) = (self.class("H1")?, self.class("H3")?, self.class("H4")?);
        let x = d_s.dim();
        let y = self.loss.dimension;
        expect_dim(x, d_t.dim(), "D_T dimension")?;
        expect_dim(x, h1.input_dim(), "H1 input")?;
        expect_dim(h1.output_dim(), h4.input_dim(), "H4 input")?;
        expect_dim(y, h4.output_dim(), "H4 output")?;
        expect_dim(y, h3.input_dim(), "H3 input")?;
        expect_dim(y, h3.output_dim(), "H3 output")?;
        for (name, c) in [("H3", h3), ("H4", h4)] {
            if c.inverse().is_none() {
                return Err(Error::MissingInverse(name.into()));
            }
        }
        for t in ["y_S", "y_T"] {
            let target = self.target(t)?;
            expect_dim(x, target.input_dim(), &format!("{t} input"))?;
            expect_dim(y, target.output_dim(), &format!("{t} output"))?;
        }
        self.evaluate_on("y_S", &["D_S"])?;
        self.evaluate_on("y_T", &["D_T"])
    }

    fn validate_two_sided(&self) -> Result<()> {
        let (d1, d2) = (self.distribution("D_1")?, self.distribution("D_2")?);
        let (h1, h2, h3, c) = (
            self.class("H1")?,
            self.class("H2")?,
            self.class("H3")?,
            self.class("C")?,
        );
        let x = d1.dim();
        let y = self.loss.dimension;
        expect_dim(x, d2.dim(), "D_2 dimension")?;
        expect_dim(x, h1.input_dim(), "H1 input")?;
        expect_dim(h1.output_dim(), h2.input_dim(), "H2 input")?;
        expect_dim(y, h2.output_dim(), "H2 output")?;
        expect_dim(y, h3.input_dim(), "H3 input")?;
        expect_dim(h3.output_dim(), c.input_dim(), "C input")?;
        for (t, d) in [("y_1", "D_1"), ("y_2", "D_2")] {
            let target = self.target(t)?;
            expect_dim(x, target.input_dim(), &format!("{t} input"))?;
            expect_dim(y, target.output_dim(), &format!("{t} output"))?;
            self.evaluate_on(t, &[d])?;
        }
        Ok(())
    }

    fn validate_transfer(&self) -> Result<()> {
        let (d1, d2) = (self.distribution("D_1")?, self.distribution("D_2")?);
        let (y, f, h2) = (self.target("y")?, self.target("f")?, self.class("H2")?);
        let x = d1.dim();
        expect_dim(x, d2.dim(), "D_2 dimension")?;
        expect_dim(x, y.input_dim(), "y input")?;
        expect_dim(x, y.output_dim(), "y output")?;
        expect_dim(x, self.loss.dimension, "loss dimension")?;
        expect_dim(x, f.input_dim(), "f input")?;
        expect_dim(f.output_dim(), h2.input_dim(), "H2 input")?;
        expect_dim(x, h2.output_dim(), "H2 output")?;
        for p in d1.support().iter().chain(d2.support()) {
            let once = y.evaluate(p)?;
            let twice = y.evaluate(&once)?;
            if once != twice {
                return Err(Error::NotIdempotent(p.coords().to_vec()));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SettingKind {
        self.kind
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    pub fn distributions(&self) -> &IndexMap<String, FiniteDistribution> {
        &self.distributions
    }

    pub fn targets(&self) -> &IndexMap<String, Hypothesis> {
        &self.targets
    }

    pub fn classes(&self) -> &IndexMap<String, HypothesisClass> {
        &self.classes
    }

    pub fn distribution(&self, name: &str) -> Result<&FiniteDistribution> {
        self.distributions
            .get(name)
            .ok_or_else(|| Error::InvalidSetting(format!("missing distribution {name}")))
    }

    pub fn target(&self, name: &str) -> Result<&Hypothesis> {
        self.targets
            .get(name)
            .ok_or_else(|| Error::InvalidSetting(format!("missing target {name}")))
    }

    pub fn class(&self, name: &str) -> Result<&HypothesisClass> {
        self.classes
            .get(name)
            .ok_or_else(|| Error::InvalidSetting(format!("missing class {name}")))
    }

    /// Errors unless the setting has kind `expected`.
    pub fn require_kind(&self, expected: &[SettingKind]) -> Result<()> {
        if expected.contains(&self.kind) {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: expected.iter().map(|k| k.name()).collect::<Vec<_>>().join(" or "),
                actual: self.kind.name().to_string(),
            })
        }
    }

    /// `y ∘ D` for a named target and distribution.
    pub fn output_distribution(&self, target: &str, dist: &str) -> Result<FiniteDistribution> {
        self.distribution(dist)?.pushforward(self.target(target)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    fn p(v: f64) -> Point {
        Point::scalar(v).unwrap()
    }

    fn da_parts() -> (
        IndexMap<String, FiniteDistribution>,
        IndexMap<String, Hypothesis>,
        IndexMap<String, HypothesisClass>,
    ) {
        let d = FiniteDistribution::uniform(vec![p(0.0), p(1.0)]).unwrap();
        let id = Hypothesis::identity(1);
        let dists = IndexMap::from([("D_S".to_string(), d.clone()), ("D_T".to_string(), d)]);
        let targets = IndexMap::from([("y_S".to_string(), id.clone()), ("y_T".to_string(), id.clone())]);
        let class = HypothesisClass::new(vec![id]).unwrap();
        let classes = IndexMap::from([("H1".to_string(), class.clone()), ("H2".to_string(), class)]);
        (dists, targets, classes)
    }

    #[test]
    fn kind_names_round_trip() {
        for k in SettingKind::ALL {
            assert_eq!(k.cli_name().parse::<SettingKind>().unwrap(), k);
            assert_eq!(k.name().parse::<SettingKind>().unwrap(), k);
        }
        assert!("nope".parse::<SettingKind>().is_err());
    }

    #[test]
    fn validates_required_names() {
        let (d, t, mut c) = da_parts();
        assert!(DASetting::new(
            SettingKind::StandardDa,
            d.clone(),
            t.clone(),
            c.clone(),
            LossSpec::absolute(1)
        )
        .is_ok());
        assert!(DASetting::new(
            SettingKind::OutputDa,
            d.clone(),
            t.clone(),
            c.clone(),
            LossSpec::absolute(1)
        )
        .is_err());
        c.shift_remove("H2");
        assert!(DASetting::new(SettingKind::StandardDa, d, t, c, LossSpec::absolute(1)).is_err());
    }

    #[test]
    fn checks_dimensions() {
        let (d, t, c) = da_parts();
        let err = DASetting::new(SettingKind::StandardDa, d, t, c, LossSpec::absolute(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn binary_requires_zero_one_and_equal_targets() {
        let (d, mut t, c) = da_parts();
        assert!(DASetting::new(
            SettingKind::BinaryDa,
            d.clone(),
            t.clone(),
            c.clone(),
            LossSpec::absolute(1)
        )
        .is_err());
        assert!(DASetting::new(
            SettingKind::BinaryDa,
            d.clone(),
            t.clone(),
            c.clone(),
            LossSpec::zero_one()
        )
        .is_ok());
        t.insert("y_T".into(), Hypothesis::scalar_affine(0.0, 1.0).unwrap());
        assert!(DASetting::new(SettingKind::BinaryDa, d, t, c, LossSpec::zero_one()).is_err());
    }

    #[test]
    fn transfer_requires_idempotent_target() {
        let d = FiniteDistribution::uniform(vec![p(0.5), p(3.0)]).unwrap();
        let dists = IndexMap::from([("D_1".to_string(), d.clone()), ("D_2".to_string(), d)]);
        let q = Hypothesis::quantizer(vec![p(0.0), p(2.0)]).unwrap();
        let classes = IndexMap::from([(
            "H2".to_string(),
            HypothesisClass::new(vec![Hypothesis::identity(1)]).unwrap(),
        )]);
        let targets = IndexMap::from([("y".to_string(), q.clone()), ("f".to_string(), q)]);
        assert!(DASetting::new(
            SettingKind::DomainTransfer,
            dists.clone(),
            targets,
            classes.clone(),
            LossSpec::absolute(1)
        )
        .is_ok());
        let double = Hypothesis::scalar_affine(2.0, 0.0).unwrap();
        let targets = IndexMap::from([("y".to_string(), double), ("f".to_string(), Hypothesis::identity(1))]);
        let err = DASetting::new(
            SettingKind::DomainTransfer,
            dists,
            targets,
            classes,
            LossSpec::absolute(1),
        )
        .unwrap_err();
        assert_eq!(err, Error::NotIdempotent(vec![0.5]));
    }

    #[test]
    fn json_round_trip() {
        let (d, t, c) = da_parts();
        let s = DASetting::new(SettingKind::StandardDa, d, t, c, LossSpec::absolute(1)).unwrap();
        let text = crate::json::to_string(&s).unwrap();
        let back: DASetting = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
