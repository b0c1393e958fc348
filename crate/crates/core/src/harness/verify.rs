use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instance_seed;
use crate::adapt::{train, ObjectiveWeights};
use crate::bounds::{compute_bound, BoundReport, Candidate, DASetting, SettingKind, Theorem};
use crate::error::{Error, Result};
use crate::scenarios::{generate, ScenarioConfig, ScenarioRng};

/// Mixed into a scenario's seed to draw its random candidates.
const CANDIDATE_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Template for every scenario; scenario `i` uses seed `base.seed + i`.
    pub base: ScenarioConfig,
    pub n: usize,
    pub weights: ObjectiveWeights,
    /// Random candidates per scenario (default 8, and 10 for two-sided
    /// settings, which have no trainer).
    pub random_candidates: usize,
}

impl VerifyConfig {
    pub fn new(base: ScenarioConfig, n: usize) -> Self {
        let random_candidates = if base.kind == SettingKind::TwoSided { 10 } else { 8 };
        VerifyConfig {
            base,
            n,
            weights: ObjectiveWeights::default(),
            random_candidates,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateCheck {
    /// `trained`, `erm` or `random`.
    pub origin: String,
    pub candidate: Candidate,
    pub reports: Vec<BoundReport>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioVerification {
    pub index: usize,
    pub seed: u64,
    pub setting: String,
    pub candidates: Vec<CandidateCheck>,
    pub pass: bool,
}

/// Class that candidate role `role` indexes into.
pub fn role_class(role: &str) -> Result<&'static str> {
    Ok(match role {
        "f" | "f1" | "f2" => "H1",
        "g" | "g1" | "g2" => "H2",
        "ghat" => "H2_prime",
        "a" | "a1" | "a2" => "H3",
        "b" => "H4",
        other => return Err(Error::InvalidSetting(format!("unknown candidate role {other}"))),
    })
}

fn roles(kind: SettingKind) -> &'static [&'static str] {
    match kind {
        SettingKind::StandardDa | SettingKind::BinaryDa => &["f", "g"],
        SettingKind::OutputDa => &["f", "g", "ghat"],
        SettingKind::AnalogyOda => &["f", "a", "b"],
        SettingKind::TwoSided => &["f1", "g1", "a1", "f2", "g2", "a2"],
        SettingKind::DomainTransfer => &["g"],
    }
}

/// Uniformly random indices for every role of the setting's kind.
pub fn random_candidate(s: &DASetting, rng: &mut ScenarioRng) -> Result<Candidate> {
    roles(s.kind())
        .iter()
        .map(|role| Ok((role.to_string(), rng.below(s.class(role_class(role)?)?.len()))))
        .collect()
}

fn check(s: &DASetting, origin: &str, candidate: Candidate) -> Result<CandidateCheck> {
    let reports = Theorem::for_kind(s.kind())
        .iter()
        .map(|t| compute_bound(*t, s, &candidate))
        .collect::<Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(CandidateCheck {
        origin: origin.to_string(),
        candidate,
        reports,
        pass,
    })
}

fn verify_one(cfg: &VerifyConfig, index: usize) -> Result<ScenarioVerification> {
    let seed = instance_seed(cfg.base.seed, index);
    let scenario = generate(&ScenarioConfig {
        seed,
        ..cfg.base.clone()
    })?;
    let s = &scenario.setting;
    let mut candidates = Vec::with_capacity(cfg.random_candidates + 2);
    if s.kind() != SettingKind::TwoSided {
        let trained = train(s, &cfg.weights, false)?;
        candidates.push(check(s, "trained", trained.chosen)?);
        let erm = train(s, &ObjectiveWeights::erm(), false)?;
        candidates.push(check(s, "erm", erm.chosen)?);
    }
    let mut rng = ScenarioRng::new(seed ^ CANDIDATE_STREAM);
    for _ in 0..cfg.random_candidates {
        let c = random_candidate(s, &mut rng)?;
        candidates.push(check(s, "random", c)?);
    }
    let pass = candidates.iter().all(|c| c.pass);
    Ok(ScenarioVerification {
        index,
        seed,
        setting: s.kind().name().to_string(),
        candidates,
        pass,
    })
}

/// Verifies every bound of the configured kind on `cfg.n` scenarios, in
/// parallel; the output is ordered by scenario index.
pub fn run_verify(cfg: &VerifyConfig) -> Result<Vec<ScenarioVerification>> {
    cfg.base.validate()?;
    cfg.weights.validate()?;
    (0..cfg.n).into_par_iter().map(|i| verify_one(cfg, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_batch_is_vacuous() {
        let cfg = VerifyConfig::new(ScenarioConfig::new(SettingKind::OutputDa, 42), 0);
        assert!(run_verify(&cfg).unwrap().is_empty());
    }

    #[test]
    fn small_batches_pass_for_every_kind() {
        for kind in SettingKind::ALL {
            let cfg = VerifyConfig::new(ScenarioConfig::new(kind, 42), 2);
            let out = run_verify(&cfg).unwrap();
            assert_eq!(out.len(), 2);
            for v in &out {
                assert!(v.pass, "{kind} scenario {}", v.index);
                // trained + erm + 8 random, or 10 random for two-sided
                assert_eq!(v.candidates.len(), 10);
            }
            assert_eq!(out[1].seed, 43);
        }
    }
}
