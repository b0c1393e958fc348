use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instance_seed;
use super::verify::random_candidate;
use crate::bounds::{compute_bound_cor1, pick, SettingKind};
use crate::class::HypothesisClass;
use crate::error::Result;
use crate::measures::{discrepancy, max_mean_gap, quad_discrepancy, symmetric_difference_class};
use crate::scenarios::random::{random_disc_instance, random_quad_instance};
use crate::scenarios::{generate, ScenarioConfig, ScenarioRng};

/// Slack for the inequalities of the suite.
pub const AXIOM_TOLERANCE: f64 = 1e-9;
/// Slack for the identities, which hold up to rounding only.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomConfig {
    pub seed: u64,
    pub instances: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub total: usize,
    pub passed: usize,
    /// Largest excess over the checked relation: `lhs − rhs` for
    /// inequalities, `|lhs − rhs|` for identities.
    pub worst_excess: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub check: String,
    pub instance: usize,
    pub seed: u64,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub config: AxiomConfig,
    pub checks: IndexMap<String, CheckSummary>,
    pub failures: Vec<CheckFailure>,
    pub pass: bool,
}

/// The suite's checks in report order, with their tolerances.
pub const CHECKS: [(&str, f64); 11] = [
    ("disc_identity", AXIOM_TOLERANCE),
    ("disc_symmetry", AXIOM_TOLERANCE),
    ("disc_triangle", AXIOM_TOLERANCE),
    ("single_member_zero", EXACT_TOLERANCE),
    ("lemma1", AXIOM_TOLERANCE),
    ("qdisc_sum_bound", AXIOM_TOLERANCE),
    ("qdisc_identical_pairs", EXACT_TOLERANCE),
    ("qdisc_shared_second", EXACT_TOLERANCE),
    ("qdisc_shared_pair", EXACT_TOLERANCE),
    ("cor1", AXIOM_TOLERANCE),
    ("cdc_equivalence", EXACT_TOLERANCE),
];

type Excesses = Vec<(&'static str, f64)>;

/// Checks on one instance. `excess ≤ tolerance` means pass.
fn instance_checks(seed: u64) -> Result<Excesses> {
    let mut rng = ScenarioRng::new(seed);
    let mut out: Excesses = Vec::with_capacity(CHECKS.len());

    let inst = random_disc_instance(&mut rng)?;
    let (c, spec) = (&inst.class, &inst.loss);
    let [d1, d2, d3] = &inst.distributions;
    let disc = |a, b| -> Result<f64> { Ok(discrepancy(c, a, b, spec)?.value) };
    let d12 = disc(d1, d2)?;
    out.push(("disc_identity", disc(d1, d1)?));
    out.push(("disc_symmetry", (d12 - disc(d2, d1)?).abs()));
    out.push(("disc_triangle", disc(d1, d3)? - d12 - disc(d2, d3)?));
    let single = HypothesisClass::new(vec![c.members()[0].clone()])?;
    out.push(("single_member_zero", discrepancy(&single, d1, d2, spec)?.value));

    let quad = random_quad_instance(&mut rng)?;
    let (c, spec) = (&quad.class, &quad.loss);
    let [q11, q12, q21, q22] = &quad.distributions;
    let disc = |a, b| -> Result<f64> { Ok(discrepancy(c, a, b, spec)?.value) };
    let q = |a, b, x, y| -> Result<f64> { Ok(quad_discrepancy(c, a, b, x, y, spec)?.value) };
    let (first, second) = (disc(q11, q12)?, disc(q21, q22)?);
    let qd = q(q11, q12, q21, q22)?;
    out.push(("lemma1", (first - second).abs() - qd));
    out.push(("qdisc_sum_bound", qd - first - second));
    out.push(("qdisc_identical_pairs", q(q11, q12, q11, q12)?.abs()));
    out.push(("qdisc_shared_second", (q(q11, q22, q12, q22)? - first).abs()));
    out.push(("qdisc_shared_pair", (q(q11, q12, q22, q22)? - first).abs()));

    let two = generate(&ScenarioConfig::new(SettingKind::TwoSided, seed))?;
    let cand = random_candidate(&two.setting, &mut rng)?;
    let roles = |p: [&str; 3]| -> Result<(usize, usize, usize)> {
        Ok((pick(&cand, p[0])?, pick(&cand, p[1])?, pick(&cand, p[2])?))
    };
    let report = compute_bound_cor1(&two.setting, roles(["f1", "g1", "a1"])?, roles(["f2", "g2", "a2"])?)?;
    out.push(("cor1", report.lhs - report.rhs));

    let binary = generate(&ScenarioConfig::new(SettingKind::BinaryDa, seed))?;
    let s = &binary.setting;
    let (d_s, d_t, h2) = (s.distribution("D_S")?, s.distribution("D_T")?, s.class("H2")?);
    let mut worst: f64 = 0.0;
    for f in s.class("H1")?.members() {
        let (fs, ft) = (d_s.pushforward(f)?, d_t.pushforward(f)?);
        let probes: Vec<_> = fs.support().iter().chain(ft.support()).cloned().collect();
        let delta = symmetric_difference_class(h2, &probes)?;
        let gap = max_mean_gap(&delta, &fs, &ft)?.0;
        worst = worst.max((discrepancy(h2, &fs, &ft, s.loss())?.value - gap).abs());
    }
    out.push(("cdc_equivalence", worst));
    Ok(out)
}

/// Runs the discrepancy property suite on `cfg.instances` seeded instances;
/// instance `i` draws everything from seed `cfg.seed + i`.
pub fn run_axioms(cfg: &AxiomConfig) -> Result<AxiomReport> {
    let per_instance = (0..cfg.instances)
        .into_par_iter()
        .map(|i| instance_checks(instance_seed(cfg.seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let mut checks: IndexMap<String, CheckSummary> = CHECKS
        .iter()
        .map(|(name, tol)| {
            (
                name.to_string(),
                CheckSummary {
                    tolerance: *tol,
                    worst_excess: f64::NEG_INFINITY,
                    ..Default::default()
                },
            )
        })
        .collect();
    let mut failures = Vec::new();
    for (i, results) in per_instance.into_iter().enumerate() {
        for (name, excess) in results {
            let summary = &mut checks[name];
            summary.total += 1;
            summary.worst_excess = summary.worst_excess.max(excess);
            if excess <= summary.tolerance {
                summary.passed += 1;
            } else {
                failures.push(CheckFailure {
                    check: name.to_string(),
                    instance: i,
                    seed: instance_seed(cfg.seed, i),
                    excess,
                });
            }
        }
    }
    if cfg.instances == 0 {
        for s in checks.values_mut() {
            s.worst_excess = 0.0;
        }
    }
    Ok(AxiomReport {
        config: *cfg,
        pass: failures.is_empty(),
        checks,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let r = run_axioms(&AxiomConfig { seed: 42, instances: 8 }).unwrap();
        assert!(r.pass, "{:?}", r.failures);
        assert!(r.checks.values().all(|s| s.total == 8 && s.passed == 8));
    }

    #[test]
    fn suite_is_deterministic() {
        let cfg = AxiomConfig { seed: 3, instances: 4 };
        assert_eq!(run_axioms(&cfg).unwrap(), run_axioms(&cfg).unwrap());
    }
}
