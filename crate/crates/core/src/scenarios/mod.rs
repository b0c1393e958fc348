//! Seeded synthetic instances of every setting, sized for exact enumeration.
//!
//! A generator is a pure function of its [`ScenarioConfig`]: the same
//! config always yields a bit-identical setting.

mod generators;
pub mod random;
mod rng;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::bounds::{DASetting, SettingKind};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::loss::LossKind;

pub use generators::{
    gen_analogy, gen_binary_da, gen_domain_transfer, gen_output_da, gen_standard_da, gen_two_sided, generate,
};
pub use rng::ScenarioRng;

pub const MAX_SUPPORT: usize = 512;
/// Upper limit on `|H2|² · support_size`.
pub const ENUMERATION_BUDGET: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: SettingKind,
    pub seed: u64,
    pub support_size: usize,
    pub input_dim: usize,
    pub feature_dim: usize,
    pub output_dim: usize,
    pub class_sizes: IndexMap<String, usize>,
    pub loss_kind: LossKind,
    pub shift_magnitude: f64,
    pub realizable: bool,
}

impl ScenarioConfig {
    /// Defaults for `kind`: 64 support points, shift 0.5, realizable
    /// targets, and dimensions `(X, F, Y)` of `(2, 2, 1)`, except `(2, 1, 1)`
    /// for analogies (`b: F → Y` must be invertible) and `(2, 2, 2)` for
    /// domain transfer (`h` maps back into its own input space).
    pub fn new(kind: SettingKind, seed: u64) -> Self {
        let (input_dim, feature_dim, output_dim) = match kind {
            SettingKind::AnalogyOda => (2, 1, 1),
            SettingKind::DomainTransfer => (2, 2, 2),
            _ => (2, 2, 1),
        };
        let class_sizes = [
            ("H1", 8),
            ("H2", 32),
            ("H2_prime", 32),
            ("H3", 8),
            ("H4", 16),
            ("C", 16),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        ScenarioConfig {
            kind,
            seed,
            support_size: 64,
            input_dim,
            feature_dim,
            output_dim,
            class_sizes,
            loss_kind: if kind == SettingKind::BinaryDa {
                LossKind::ZeroOne
            } else {
                LossKind::Absolute
            },
            shift_magnitude: 0.5,
            realizable: true,
        }
    }

    pub fn class_size(&self, name: &str) -> Result<usize> {
        self.class_sizes
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("no size for class {name}")))
    }

    /// Sets every class size to `n`.
    pub fn with_class_size(mut self, n: usize) -> Self {
        for v in self.class_sizes.values_mut() {
            *v = n;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.support_size == 0 || self.support_size > MAX_SUPPORT {
            return bad(format!("support_size must be in 1..={MAX_SUPPORT}"));
        }
        if self.input_dim == 0 || self.feature_dim == 0 || self.output_dim == 0 {
            return bad("dimensions must be positive".into());
        }
        if let Some((k, _)) = self.class_sizes.iter().find(|(_, &v)| v == 0) {
            return bad(format!("class {k} must have at least one member"));
        }
        if !(self.shift_magnitude >= 0.0 && self.shift_magnitude.is_finite()) {
            return bad("shift_magnitude must be finite and non-negative".into());
        }
        let h2 = self.class_sizes.get("H2").copied().unwrap_or(1) as f64;
        if h2 * h2 * self.support_size as f64 > ENUMERATION_BUDGET {
            return bad(format!("|H2|²·support_size exceeds {ENUMERATION_BUDGET:e}"));
        }
        let binary = self.kind == SettingKind::BinaryDa;
        if binary != (self.loss_kind == LossKind::ZeroOne) {
            return bad("the zero_one loss is used exactly for binary_da".into());
        }
        match self.kind {
            SettingKind::BinaryDa if self.output_dim != 1 => bad("binary_da needs output_dim 1".into()),
            SettingKind::OutputDa if self.output_dim != 1 => bad("output_da needs output_dim 1".into()),
            SettingKind::OutputDa if self.class_size("H2_prime")? < self.class_size("H2")? => {
                bad("H2_prime must be at least as large as H2".into())
            }
            SettingKind::AnalogyOda if self.feature_dim != self.output_dim => {
                bad("analogy needs feature_dim = output_dim".into())
            }
            SettingKind::DomainTransfer if self.input_dim != self.feature_dim || self.input_dim != self.output_dim => {
                bad("domain transfer needs input_dim = feature_dim = output_dim".into())
            }
            _ => Ok(()),
        }
    }
}

/// A generated setting with the indices of the members used to build its
/// targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub setting: DASetting,
    pub truth: IndexMap<String, usize>,
}

/// The class constant declared for `members`: the largest analytic member
/// bound, padded by a relative 1e-12 and rounded up to a multiple of 1/64.
/// `None` when some member has no analytic bound.
pub fn declared_lipschitz(members: &[Hypothesis], kind: LossKind) -> Option<f64> {
    let mut best: f64 = 0.0;
    for m in members {
        best = best.max(m.lipschitz_bound(kind)?);
    }
    Some(((best * (1.0 + 1e-12) * 64.0).ceil() / 64.0).max(1.0 / 64.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for kind in SettingKind::ALL {
            ScenarioConfig::new(kind, 0).validate().unwrap();
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ScenarioConfig::new(SettingKind::StandardDa, 0);
        c.support_size = 513;
        assert!(c.validate().is_err());
        let c = ScenarioConfig::new(SettingKind::StandardDa, 0).with_class_size(2000);
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let mut c = ScenarioConfig::new(SettingKind::StandardDa, 0);
        c.loss_kind = LossKind::ZeroOne;
        assert!(c.validate().is_err());
        let mut c = ScenarioConfig::new(SettingKind::AnalogyOda, 0);
        c.feature_dim = 2;
        assert!(c.validate().is_err());
    }

    #[test]
    fn declared_constant_rounds_up() {
        let m = vec![
            Hypothesis::scalar_affine(0.3, 0.0).unwrap(),
            Hypothesis::scalar_affine(-1.0, 2.0).unwrap(),
        ];
        assert_eq!(declared_lipschitz(&m, LossKind::Absolute), Some(1.0 + 1.0 / 64.0));
        assert_eq!(declared_lipschitz(&m, LossKind::Squared), Some(1.0 + 1.0 / 64.0));
        let q = vec![Hypothesis::quantizer(vec![crate::point::Point::scalar(0.0).unwrap()]).unwrap()];
        assert_eq!(declared_lipschitz(&q, LossKind::Absolute), None);
    }
}
