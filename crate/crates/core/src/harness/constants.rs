use serde::{Deserialize, Serialize};

use crate::bounds::SettingKind;
use crate::class::HypothesisClass;
use crate::error::{Error, Result};
use crate::hypothesis::{Form, Hypothesis};
use crate::loss::{LossKind, LossSpec};
use crate::measures::{estimate_k, estimate_l};
use crate::point::Point;
use crate::scenarios::{generate, ScenarioConfig, ScenarioRng};

/// Slack when comparing estimates with declared constants.
pub const CONSTANT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsConfig {
    pub loss: LossKind,
    /// Probe triples for the triangle constant.
    pub triples: usize,
    /// Probe pairs per class member for its Lipschitz constant.
    pub pairs: usize,
    pub seed: u64,
}

impl ConstantsConfig {
    pub fn new(loss: LossKind, seed: u64) -> Self {
        ConstantsConfig {
            loss,
            triples: 100_000,
            pairs: 1_000,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberConstant {
    pub setting: String,
    pub class: String,
    pub member: usize,
    pub l_hat: f64,
    pub declared_l: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub config: ConstantsConfig,
    pub k_hat: f64,
    /// The constant the bounds use.
    pub declared_k: f64,
    /// The smallest valid constant for the loss.
    pub tight_k: f64,
    pub members: Vec<MemberConstant>,
    /// `k_hat ≤ declared_k` and every `l_hat ≤ declared_l`.
    pub pass: bool,
    /// `k_hat ≤ tight_k`.
    pub tight_pass: bool,
}

const PROBE_DIM: usize = 2;

fn probe_point(rng: &mut ScenarioRng, dim: usize) -> Result<Point> {
    Point::new((0..dim).map(|_| rng.lattice(-4.0, 4.0, 1.0 / 64.0)).collect())
}

/// Triples of lattice points in which, one time in four, a point repeats
/// an earlier one so that coincidences are exercised.
fn probe_triples(rng: &mut ScenarioRng, n: usize, dim: usize) -> Result<Vec<(Point, Point, Point)>> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let a = probe_point(rng, dim)?;
        let b = if rng.chance(1, 4) {
            a.clone()
        } else {
            probe_point(rng, dim)?
        };
        let c = if rng.chance(1, 4) {
            if rng.chance(1, 2) {
                a.clone()
            } else {
                b.clone()
            }
        } else {
            probe_point(rng, dim)?
        };
        out.push((a, b, c));
    }
    Ok(out)
}

/// Pairs from the member's table domain, or random lattice points.
fn probe_pairs(rng: &mut ScenarioRng, h: &Hypothesis, n: usize) -> Result<Vec<(Point, Point)>> {
    let domain: Option<Vec<Point>> = match h.form() {
        Form::Table(t) => Some(t.entries().iter().map(|(x, _)| x.clone()).collect()),
        _ => None,
    };
    (0..n)
        .map(|_| match &domain {
            Some(d) => Ok((rng.pick(d).clone(), rng.pick(d).clone())),
            None => Ok((probe_point(rng, h.input_dim())?, probe_point(rng, h.input_dim())?)),
        })
        .collect()
}

fn kinds_for(loss: LossKind) -> Vec<SettingKind> {
    match loss {
        LossKind::ZeroOne => vec![SettingKind::BinaryDa],
        _ => SettingKind::ALL
            .into_iter()
            .filter(|k| *k != SettingKind::BinaryDa)
            .collect(),
    }
}

fn member_constants(
    rng: &mut ScenarioRng,
    cfg: &ConstantsConfig,
    setting: SettingKind,
    name: &str,
    class: &HypothesisClass,
    out: &mut Vec<MemberConstant>,
) -> Result<()> {
    let Some(declared) = class.lipschitz_l() else {
        return Ok(());
    };
    let spec = LossSpec::new(cfg.loss, 1)?.on_dimension(class.output_dim());
    for (i, m) in class.members().iter().enumerate() {
        let pairs = probe_pairs(rng, m, cfg.pairs)?;
        let l_hat = estimate_l(m, &spec, &pairs)?;
        out.push(MemberConstant {
            setting: setting.name().to_string(),
            class: name.to_string(),
            member: i,
            l_hat,
            declared_l: declared,
            pass: l_hat <= declared + CONSTANT_TOLERANCE,
        });
    }
    Ok(())
}

/// Estimates the loss's triangle constant on seeded probe triples, and
/// the Lipschitz constant of every member of every generated class (and
/// inverse class) that declares one, for each setting kind using the loss.
pub fn run_constants(cfg: &ConstantsConfig) -> Result<ConstantsReport> {
    if cfg.triples == 0 || cfg.pairs == 0 {
        return Err(Error::InvalidConfig("probe counts must be positive".into()));
    }
    let mut rng = ScenarioRng::new(cfg.seed);
    let dim = if cfg.loss == LossKind::ZeroOne { 1 } else { PROBE_DIM };
    let spec = LossSpec::new(cfg.loss, dim)?;
    let k_hat = estimate_k(&spec, &probe_triples(&mut rng, cfg.triples, dim)?)?;

    let mut members = Vec::new();
    for kind in kinds_for(cfg.loss) {
        let mut sc = ScenarioConfig::new(kind, cfg.seed);
        sc.loss_kind = cfg.loss;
        let scenario = generate(&sc)?;
        for (name, class) in scenario.setting.classes() {
            member_constants(&mut rng, cfg, kind, name, class, &mut members)?;
            if let Some(inv) = class.aligned_inverse() {
                member_constants(&mut rng, cfg, kind, &format!("{name}⁻¹"), &inv, &mut members)?;
            }
        }
    }
    let declared_k = cfg.loss.triangle_constant();
    let tight_k = cfg.loss.tight_triangle_constant();
    Ok(ConstantsReport {
        config: *cfg,
        k_hat,
        declared_k,
        tight_k,
        pass: k_hat <= declared_k + CONSTANT_TOLERANCE && members.iter().all(|m| m.pass),
        tight_pass: k_hat <= tight_k + CONSTANT_TOLERANCE,
        members,
    })
}
