use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use shiftbound::bounds::{compute_bound, Candidate, Theorem};
use shiftbound::harness::{
    run_axioms, run_constants, run_verify, AxiomConfig, AxiomReport, ConstantsConfig, ConstantsReport,
    ScenarioVerification, VerifyConfig,
};
use shiftbound::json::{format_f64, to_string_pretty};
use shiftbound::{generate, train, BoundReport, ObjectiveWeights, ScenarioConfig, TrainResult};

use crate::args::{AxiomsArgs, Command, ConstantsArgs, Format, GenerateArgs, TrainArgs, VerifyArgs};

/// A command's primary output and whether all of its checks passed.
pub struct Outcome {
    pub body: Vec<u8>,
    /// One-paragraph human-readable summary.
    pub summary: String,
    pub pass: bool,
    pub config: Option<ScenarioConfig>,
    pub weights: Option<ObjectiveWeights>,
}

#[derive(Serialize, Deserialize)]
pub struct TrainOutput {
    pub result: TrainResult,
    pub bounds: Vec<BoundReport>,
    pub pass: bool,
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn csv_body(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().context("flushing CSV")
}

fn candidate_label(c: &Candidate) -> String {
    c.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

/// Runs a command that produces an output document.
pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Verify(a) => verify(a),
        Command::Train(a) => train_cmd(a),
        Command::Constants(a) => constants(a),
        Command::Axioms(a) => axioms(a),
        Command::Generate(a) => generate_cmd(a),
        Command::CheckScenario(_) | Command::Replay(_) => bail!("{} produces no output document", cmd.name()),
    }
}

fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let base = a.scenario.config()?;
    let weights = a.weights.weights();
    let mut cfg = VerifyConfig::new(base.clone(), a.n);
    cfg.weights = weights;
    let reports = run_verify(&cfg)?;
    let checks: usize = reports.iter().map(|r| r.candidates.len()).sum();
    let failed: Vec<&ScenarioVerification> = reports.iter().filter(|r| !r.pass).collect();
    let mut summary = format!(
        "verify {}: {} scenarios, {} candidate checks, {} failing scenarios",
        base.kind.cli_name(),
        reports.len(),
        checks,
        failed.len()
    );
    for r in failed.iter().take(10) {
        summary.push_str(&format!("\n  scenario {} (seed {}) failed", r.index, r.seed));
    }
    let body = match a.output.format {
        Format::Json => json(&reports)?,
        Format::Csv => {
            let mut rows = Vec::new();
            for r in &reports {
                for c in &r.candidates {
                    for b in &c.reports {
                        rows.push(vec![
                            r.index.to_string(),
                            r.seed.to_string(),
                            r.setting.clone(),
                            c.origin.clone(),
                            candidate_label(&c.candidate),
                            b.theorem.clone(),
                            format_f64(b.lhs),
                            format_f64(b.rhs),
                            format_f64(b.slack),
                            format_f64(b.constant),
                            b.pass.to_string(),
                        ]);
                    }
                }
            }
            csv_body(
                &[
                    "scenario",
                    "seed",
                    "setting",
                    "origin",
                    "candidate",
                    "theorem",
                    "lhs",
                    "rhs",
                    "slack",
                    "constant",
                    "pass",
                ],
                rows,
            )?
        }
    };
    Ok(Outcome {
        body,
        summary,
        pass: failed.is_empty(),
        config: Some(base),
        weights: Some(weights),
    })
}

fn train_cmd(a: &TrainArgs) -> Result<Outcome> {
    let cfg = a.scenario.config()?;
    let weights = a.weights.weights();
    let scenario = generate(&cfg)?;
    let s = &scenario.setting;
    let result = train(s, &weights, a.trace)?;
    let bounds = Theorem::for_kind(s.kind())
        .iter()
        .map(|t| compute_bound(*t, s, &result.chosen))
        .collect::<shiftbound::Result<Vec<_>>>()?;
    let pass = bounds.iter().all(|b| b.pass);
    let mut summary = format!(
        "train {} seed {}: chosen {}, objective {}, target risk {}",
        cfg.kind.cli_name(),
        cfg.seed,
        candidate_label(&result.chosen),
        format_f64(result.objective_value),
        format_f64(result.target_risk)
    );
    for b in &bounds {
        summary.push_str(&format!(
            "\n  {}: lhs {} ≤ rhs {} ({})",
            b.theorem,
            format_f64(b.lhs),
            format_f64(b.rhs),
            if b.pass { "pass" } else { "FAIL" }
        ));
    }
    let output = TrainOutput { result, bounds, pass };
    let body = match a.output.format {
        Format::Json => json(&output)?,
        Format::Csv => {
            let r = &output.result;
            let mut rows: Vec<Vec<String>> = r
                .chosen
                .iter()
                .map(|(k, v)| vec!["chosen".into(), k.clone(), v.to_string()])
                .collect();
            for (k, v) in &r.objective_terms {
                rows.push(vec!["term".into(), k.clone(), format_f64(*v)]);
            }
            rows.push(vec!["objective".into(), "value".into(), format_f64(r.objective_value)]);
            rows.push(vec![
                "objective".into(),
                "target_risk".into(),
                format_f64(r.target_risk),
            ]);
            for b in &output.bounds {
                rows.push(vec!["bound".into(), format!("{}.lhs", b.theorem), format_f64(b.lhs)]);
                rows.push(vec!["bound".into(), format!("{}.rhs", b.theorem), format_f64(b.rhs)]);
                rows.push(vec!["bound".into(), format!("{}.pass", b.theorem), b.pass.to_string()]);
            }
            csv_body(&["section", "name", "value"], rows)?
        }
    };
    Ok(Outcome {
        body,
        summary,
        pass,
        config: Some(cfg),
        weights: Some(weights),
    })
}

fn constants(a: &ConstantsArgs) -> Result<Outcome> {
    let cfg = ConstantsConfig {
        loss: a.loss,
        triples: a.probes,
        pairs: a.pairs,
        seed: a.seed,
    };
    let report = run_constants(&cfg)?;
    let body = match a.output.format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let mut rows = vec![vec![
                "K".into(),
                String::new(),
                String::new(),
                String::new(),
                format_f64(report.k_hat),
                format_f64(report.declared_k),
                (report.k_hat <= report.declared_k + shiftbound::harness::CONSTANT_TOLERANCE).to_string(),
            ]];
            for m in &report.members {
                rows.push(vec![
                    "L".into(),
                    m.setting.clone(),
                    m.class.clone(),
                    m.member.to_string(),
                    format_f64(m.l_hat),
                    format_f64(m.declared_l),
                    m.pass.to_string(),
                ]);
            }
            csv_body(
                &["quantity", "setting", "class", "member", "estimate", "declared", "pass"],
                rows,
            )?
        }
    };
    Ok(Outcome {
        body,
        summary: constants_table(&report),
        pass: report.pass,
        config: None,
        weights: None,
    })
}

fn constants_table(r: &ConstantsReport) -> String {
    let mut out = format!(
        "loss {}: K̂ = {} (declared K = {}, tight K = {}) over {} triples\n",
        r.config.loss,
        format_f64(r.k_hat),
        r.declared_k,
        r.tight_k,
        r.config.triples
    );
    out.push_str(&format!(
        "{:<16} {:<10} {:>6} {:>24} {:>12}  ok\n",
        "setting", "class", "member", "L̂", "declared L"
    ));
    for m in &r.members {
        out.push_str(&format!(
            "{:<16} {:<10} {:>6} {:>24} {:>12}  {}\n",
            m.setting,
            m.class,
            m.member,
            format_f64(m.l_hat),
            format_f64(m.declared_l),
            if m.pass { "yes" } else { "NO" }
        ));
    }
    out.push_str(if r.pass {
        "all constants within their declared values"
    } else {
        "VIOLATION"
    });
    out
}

fn axioms(a: &AxiomsArgs) -> Result<Outcome> {
    let report: AxiomReport = run_axioms(&AxiomConfig {
        seed: a.seed,
        instances: a.n,
    })?;
    let mut summary = format!("axioms: {} instances from seed {}", a.n, a.seed);
    for (name, c) in &report.checks {
        summary.push_str(&format!(
            "\n  {name:<24} {}/{} worst excess {} (tolerance {})",
            c.passed,
            c.total,
            format_f64(c.worst_excess),
            c.tolerance
        ));
    }
    let body = match a.output.format {
        Format::Json => json(&report)?,
        Format::Csv => {
            let rows = report
                .checks
                .iter()
                .map(|(name, c)| {
                    vec![
                        name.clone(),
                        c.total.to_string(),
                        c.passed.to_string(),
                        format_f64(c.worst_excess),
                        format_f64(c.tolerance),
                    ]
                })
                .collect();
            csv_body(&["check", "total", "passed", "worst_excess", "tolerance"], rows)?
        }
    };
    Ok(Outcome {
        body,
        summary,
        pass: report.pass,
        config: None,
        weights: None,
    })
}

fn generate_cmd(a: &GenerateArgs) -> Result<Outcome> {
    let cfg = a.scenario.config()?;
    let scenario = generate(&cfg)?;
    Ok(Outcome {
        body: json(&scenario)?,
        summary: format!("generated {} scenario with seed {}", cfg.kind.cli_name(), cfg.seed),
        pass: true,
        config: Some(cfg),
        weights: None,
    })
}
