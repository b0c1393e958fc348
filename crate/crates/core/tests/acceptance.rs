//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured quantity next to its pinned tolerance.

mod common;

use std::time::{Duration, Instant};

use shiftbound::adapt::audit;
use shiftbound::bounds::{compute_bound_dtn, lemma1_report, two_sided_quad};
use shiftbound::harness::{run_constants, run_verify, ConstantsConfig, ScenarioVerification, VerifyConfig};
use shiftbound::measures::{max_mean_gap, symmetric_difference_class};
use shiftbound::scenarios::random::{random_disc_instance, random_quad_instance};
use shiftbound::scenarios::ScenarioRng;
use shiftbound::{
    discrepancy, generate, quad_discrepancy, train, Hypothesis, LossKind, ObjectiveWeights, ScenarioConfig, SettingKind,
};

const INEQ_TOL: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-12;
const ORACLE_TOL: f64 = 1e-12;
const ERM_TOL: f64 = 1e-6;
const SEED: u64 = 42;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Records the largest value seen.
#[derive(Default)]
struct Worst(f64);

impl Worst {
    fn see(&mut self, v: f64) {
        if v > self.0 || self.0.is_nan() || v.is_nan() {
            self.0 = if v.is_nan() { f64::NAN } else { v };
        }
    }
    fn within(&self, tol: f64) -> bool {
        self.0 <= tol
    }
}

fn verify(kind: SettingKind, n: usize) -> Vec<ScenarioVerification> {
    run_verify(&VerifyConfig::new(ScenarioConfig::new(kind, SEED), n)).expect("verify runs")
}

/// Worst `lhs − rhs` and worst failing proof step across the named theorems.
fn bound_summary(runs: &[ScenarioVerification], theorems: &[&str]) -> (Worst, usize, usize) {
    let (mut worst, mut reports, mut failed_steps) = (Worst(f64::NEG_INFINITY), 0, 0);
    for run in runs {
        for cand in &run.candidates {
            for r in cand.reports.iter().filter(|r| theorems.contains(&r.theorem.as_str())) {
                reports += 1;
                worst.see(r.lhs - r.rhs);
                failed_steps += r.failed_steps().count();
            }
        }
    }
    (worst, reports, failed_steps)
}

fn disc_axioms() -> Outcome {
    let (mut identity, mut symmetry, mut triangle, mut oracle) = (Worst(0.0), Worst(0.0), Worst(0.0), Worst(0.0));
    let mut timed = Duration::ZERO;
    for i in 0..200u64 {
        let inst = random_disc_instance(&mut ScenarioRng::new(SEED + i)).unwrap();
        let (c, spec) = (&inst.class, &inst.loss);
        let [d1, d2, d3] = &inst.distributions;
        let start = Instant::now();
        let d = |a, b| discrepancy(c, a, b, spec).unwrap().value;
        let (d11, d12, d21, d13, d23) = (d(d1, d1), d(d1, d2), d(d2, d1), d(d1, d3), d(d2, d3));
        timed += start.elapsed();
        identity.see(d11);
        symmetry.see((d12 - d21).abs());
        triangle.see(d13 - d12 - d23);
        oracle.see((d12 - common::disc(spec.kind, c, d1, d2)).abs());
    }
    let ok = identity.within(INEQ_TOL)
        && symmetry.within(INEQ_TOL)
        && triangle.within(INEQ_TOL)
        && oracle.within(ORACLE_TOL)
        && timed < Duration::from_secs(30);
    check(
        ok,
        format!(
            "200 instances: identity {:.3e}, symmetry {:.3e}, triangle excess {:.3e} (tol {INEQ_TOL:e}); \
             oracle gap {:.3e} (tol {ORACLE_TOL:e}); {:.2}s (limit 30s)",
            identity.0,
            symmetry.0,
            triangle.0,
            oracle.0,
            timed.as_secs_f64()
        ),
    )
}

fn lemma1() -> Outcome {
    let (mut lemma, mut sum, mut identities, mut oracle, mut steps) = (
        Worst(f64::NEG_INFINITY),
        Worst(f64::NEG_INFINITY),
        Worst(0.0),
        Worst(0.0),
        0,
    );
    for i in 0..200u64 {
        let inst = random_quad_instance(&mut ScenarioRng::new(SEED + i)).unwrap();
        let (c, spec) = (&inst.class, &inst.loss);
        let [a, b, x, y] = &inst.distributions;
        let d = |p, q| discrepancy(c, p, q, spec).unwrap().value;
        let q = |p, r, s, t| quad_discrepancy(c, p, r, s, t, spec).unwrap().value;
        let (first, second, qd) = (d(a, b), d(x, y), q(a, b, x, y));
        lemma.see((first - second).abs() - qd);
        sum.see(qd - first - second);
        identities.see(q(a, b, a, b));
        identities.see((q(a, x, b, x) - first).abs());
        identities.see((q(a, b, x, x) - first).abs());
        oracle.see((qd - common::qdisc(spec.kind, c, a, b, x, y)).abs());
        steps += lemma1_report(c, a, b, x, y, spec).unwrap().failed_steps().count();
    }
    let ok = lemma.within(INEQ_TOL)
        && sum.within(INEQ_TOL)
        && identities.0 < EXACT_TOL
        && oracle.within(ORACLE_TOL)
        && steps == 0;
    check(
        ok,
        format!(
            "200 quads: lemma excess {:.3e}, sum-bound excess {:.3e} (tol {INEQ_TOL:e}); \
             identity residual {:.3e} (tol {EXACT_TOL:e}); oracle gap {:.3e}; failed steps {steps}",
            lemma.0, sum.0, identities.0, oracle.0
        ),
    )
}

fn cor1() -> Outcome {
    let runs = verify(SettingKind::TwoSided, 100);
    let (worst, reports, failed) = bound_summary(&runs, &["cor1"]);
    let mut oracle = Worst(0.0);
    for run in &runs {
        let s = generate(&ScenarioConfig::new(SettingKind::TwoSided, run.seed))
            .unwrap()
            .setting;
        let cand = &run.candidates[0].candidate;
        let role = |k: &str| cand[k];
        let [d11, d12, d21, d22] = two_sided_quad(
            &s,
            (role("f1"), role("g1"), role("a1")),
            (role("f2"), role("g2"), role("a2")),
        )
        .unwrap();
        let c = s.class("C").unwrap();
        let kind = s.loss().kind;
        let lhs = (common::disc(kind, c, &d11, &d12) - common::disc(kind, c, &d21, &d22)).abs();
        let rhs = common::qdisc(kind, c, &d11, &d12, &d21, &d22);
        let report = &run.candidates[0].reports[0];
        oracle.see((report.lhs - lhs).abs().max((report.rhs - rhs).abs()));
    }
    let ok = runs.len() == 100 && reports == 1000 && worst.within(INEQ_TOL) && failed == 0 && oracle.within(ORACLE_TOL);
    check(
        ok,
        format!(
            "100 scenarios, {reports} random candidates: worst lhs-rhs {:.3e} (tol {INEQ_TOL:e}); \
             failed steps {failed}; oracle gap {:.3e} (tol {ORACLE_TOL:e})",
            worst.0, oracle.0
        ),
    )
}

fn proof_scripts() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for (kind, theorems) in [
        (SettingKind::OutputDa, &["oda"][..]),
        (SettingKind::AnalogyOda, &["analogy"][..]),
        (SettingKind::DomainTransfer, &["dt", "dtn"][..]),
    ] {
        let runs = verify(kind, 100);
        let (worst, reports, failed) = bound_summary(&runs, theorems);
        let steps: usize = runs
            .iter()
            .flat_map(|r| &r.candidates)
            .flat_map(|c| &c.reports)
            .map(|r| r.steps.len())
            .sum();
        ok &= runs.len() == 100 && reports > 0 && failed == 0 && worst.within(INEQ_TOL) && steps > 0;
        lines.push(format!(
            "{}: {reports} reports, {steps} steps, {failed} failed, worst lhs-rhs {:.3e}",
            kind.cli_name(),
            worst.0
        ));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    check(
        ok,
        format!(
            "{} (tol {INEQ_TOL:e}); {:.1}s (limit 300s)",
            lines.join("; "),
            elapsed.as_secs_f64()
        ),
    )
}

fn prior_bounds() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (kind, theorem) in [
        (SettingKind::StandardDa, "mansour"),
        (SettingKind::BinaryDa, "bendavid"),
    ] {
        let runs = verify(kind, 100);
        let (worst, reports, failed) = bound_summary(&runs, &[theorem]);
        let mut oracle = Worst(0.0);
        for run in &runs {
            let sc = generate(&ScenarioConfig::new(kind, run.seed)).unwrap();
            let s = &sc.setting;
            let cand = &run.candidates[0];
            let h = s
                .class("H1")
                .unwrap()
                .member(cand.candidate["f"])
                .unwrap()
                .then(s.class("H2").unwrap().member(cand.candidate["g"]).unwrap())
                .unwrap();
            let lhs = common::risk(
                s.loss().kind,
                s.distribution("D_T").unwrap(),
                &h,
                s.target("y_T").unwrap(),
            );
            let report = cand.reports.iter().find(|r| r.theorem == theorem).unwrap();
            oracle.see((report.lhs - lhs).abs());
        }
        ok &=
            runs.len() == 100 && reports == 1000 && failed == 0 && worst.within(INEQ_TOL) && oracle.within(ORACLE_TOL);
        lines.push(format!(
            "{theorem}: {reports} reports, worst lhs-rhs {:.3e}, target-risk oracle gap {:.3e}",
            worst.0, oracle.0
        ));
    }
    check(ok, format!("{} (tol {INEQ_TOL:e})", lines.join("; ")))
}

fn constants() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    // Constants stated in the source text for each loss.
    for (loss, stated) in [
        (LossKind::Absolute, 1.0),
        (LossKind::Squared, 3.0),
        (LossKind::ZeroOne, 1.0),
    ] {
        let cfg = ConstantsConfig::new(loss, SEED);
        assert_eq!((cfg.triples, cfg.pairs), (100_000, 1000));
        let r = run_constants(&cfg).unwrap();
        let tight = if loss == LossKind::Squared { 2.0 } else { 1.0 };
        let members_ok = r.members.iter().all(|m| m.l_hat <= m.declared_l + EXACT_TOL);
        ok &= r.k_hat <= tight + EXACT_TOL
            && r.declared_k == stated
            && r.k_hat <= stated
            && members_ok
            && !r.members.is_empty();
        lines.push(format!(
            "{}: K̂ {:.6} (limit {tight} + {EXACT_TOL:e}, declared {}), {} members within L",
            loss.name(),
            r.k_hat,
            r.declared_k,
            r.members.iter().filter(|m| m.l_hat <= m.declared_l + EXACT_TOL).count()
        ));
        if !members_ok {
            lines.push(format!(
                "{} members exceed L",
                r.members.iter().filter(|m| !m.pass).count()
            ));
        }
    }
    check(ok, lines.join("; "))
}

fn trainers() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let w = ObjectiveWeights::default();
    for kind in [
        SettingKind::StandardDa,
        SettingKind::BinaryDa,
        SettingKind::OutputDa,
        SettingKind::AnalogyOda,
        SettingKind::DomainTransfer,
    ] {
        let mut optimal = 0;
        for i in 0..20u64 {
            let s = generate(&ScenarioConfig::new(kind, SEED + i)).unwrap().setting;
            let res = train(&s, &w, false).unwrap();
            optimal += usize::from(audit(&s, &w, &res).unwrap().optimal);
        }
        ok &= optimal == 20;
        lines.push(format!("{} {optimal}/20 optimal", kind.cli_name()));
    }

    // Brute-force re-derivation of the standard objective on one scenario.
    let s = generate(&ScenarioConfig::new(SettingKind::StandardDa, SEED))
        .unwrap()
        .setting;
    let res = train(&s, &w, false).unwrap();
    let (h1, h2, kind) = (s.class("H1").unwrap(), s.class("H2").unwrap(), s.loss().kind);
    let (d_s, d_t, y_s) = (
        s.distribution("D_S").unwrap(),
        s.distribution("D_T").unwrap(),
        s.target("y_S").unwrap(),
    );
    let mut best = f64::INFINITY;
    for f in h1.members() {
        let disc = common::disc(kind, h2, &d_s.pushforward(f).unwrap(), &d_t.pushforward(f).unwrap());
        for g in h2.members() {
            best = best.min(common::risk(kind, d_s, &f.then(g).unwrap(), y_s) + disc);
        }
    }
    let brute_gap = (res.objective_value - best).abs();
    ok &= brute_gap <= ORACLE_TOL;
    lines.push(format!(
        "brute-force objective gap {brute_gap:.3e} (tol {ORACLE_TOL:e})"
    ));

    let mut erm_gap = Worst(0.0);
    for i in 0..20u64 {
        let mut cfg = ScenarioConfig::new(SettingKind::OutputDa, SEED + i);
        cfg.shift_magnitude = 0.0;
        let s = generate(&cfg).unwrap().setting;
        let trained = train(&s, &w, false).unwrap();
        let erm = train(&s, &ObjectiveWeights::erm(), false).unwrap();
        erm_gap.see((trained.target_risk - erm.target_risk).abs());
    }
    ok &= erm_gap.within(ERM_TOL);
    lines.push(format!(
        "no-shift oda vs ERM target risk gap {:.3e} (tol {ERM_TOL:e})",
        erm_gap.0
    ));

    let s = generate(&ScenarioConfig::new(SettingKind::DomainTransfer, 11))
        .unwrap()
        .setting;
    let res = train(&s, &w, false).unwrap();
    let report = compute_bound_dtn(&s, res.chosen["g"]).unwrap();
    let f = s.target("f").unwrap();
    let h = f.then(s.class("H2").unwrap().member(res.chosen["g"]).unwrap()).unwrap();
    let oracle_risk = common::risk(
        s.loss().kind,
        s.distribution("D_1").unwrap(),
        &h,
        s.target("y").unwrap(),
    );
    ok &= res.target_risk == 0.0 && oracle_risk == 0.0 && report.pass;
    lines.push(format!(
        "dt seed 11: target risk {} (oracle {oracle_risk}), dtn {}",
        res.target_risk,
        if report.pass { "pass" } else { "fail" }
    ));
    check(ok, lines.join("; "))
}

fn idempotency() -> Outcome {
    let (mut points, mut mismatches, mut tid) = (0usize, 0usize, Worst(0.0));
    for realizable in [true, false] {
        for i in 0..50u64 {
            let mut cfg = ScenarioConfig::new(SettingKind::DomainTransfer, SEED + i);
            cfg.realizable = realizable;
            let s = generate(&cfg).unwrap().setting;
            let y = s.target("y").unwrap();
            for d in ["D_1", "D_2"] {
                for x in s.distribution(d).unwrap().support() {
                    let once = y.evaluate(x).unwrap();
                    points += 1;
                    mismatches += usize::from(y.evaluate(&once).unwrap() != once);
                }
            }
            let dy2 = s.output_distribution("y", "D_2").unwrap();
            tid.see(common::risk(
                s.loss().kind,
                &dy2,
                y,
                &Hypothesis::identity(y.output_dim()),
            ));
        }
    }
    check(
        mismatches == 0 && tid.0 == 0.0,
        format!(
            "100 scenarios, {points} support points: {mismatches} with y(y(x)) ≠ y(x); worst R[y, Id] on D^y_2 {}",
            tid.0
        ),
    )
}

fn determinism() -> Outcome {
    let run = |threads: usize| -> Vec<String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            [
                SettingKind::OutputDa,
                SettingKind::TwoSided,
                SettingKind::DomainTransfer,
                SettingKind::StandardDa,
            ]
            .into_iter()
            .map(|kind| shiftbound::json::to_string(&verify(kind, 8)).unwrap())
            .collect()
        })
    };
    let (single, multi) = (run(1), run(4));
    let bytes: usize = single.iter().map(String::len).sum();
    check(
        single == multi,
        format!("1 vs 4 workers over 4 settings x 8 scenarios: {bytes} bytes compared"),
    )
}

fn cdc_equivalence() -> Outcome {
    let (mut lib_gap, mut oracle_gap, mut pairs) = (Worst(0.0), Worst(0.0), 0);
    for i in 0..50u64 {
        let s = generate(&ScenarioConfig::new(SettingKind::BinaryDa, SEED + i))
            .unwrap()
            .setting;
        let (d_s, d_t, h2) = (
            s.distribution("D_S").unwrap(),
            s.distribution("D_T").unwrap(),
            s.class("H2").unwrap(),
        );
        for f in s.class("H1").unwrap().members() {
            let (fs, ft) = (d_s.pushforward(f).unwrap(), d_t.pushforward(f).unwrap());
            let disc = discrepancy(h2, &fs, &ft, s.loss()).unwrap().value;
            let probes: Vec<_> = fs.support().iter().chain(ft.support()).cloned().collect();
            let delta = symmetric_difference_class(h2, &probes).unwrap();
            lib_gap.see((disc - max_mean_gap(&delta, &fs, &ft).unwrap().0).abs());
            oracle_gap.see((disc - common::disagreement_gap(h2, &fs, &ft)).abs());
            pairs += 1;
        }
    }
    check(
        lib_gap.within(EXACT_TOL) && oracle_gap.within(EXACT_TOL),
        format!(
            "50 scenarios, {pairs} feature maps: |disc - max mean gap| {:.3e}, vs oracle {:.3e} (tol {EXACT_TOL:e})",
            lib_gap.0, oracle_gap.0
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("discrepancy axioms", disc_axioms),
        ("quad comparison lemma", lemma1),
        ("two-sided corollary", cor1),
        ("proof scripts", proof_scripts),
        ("prior bounds", prior_bounds),
        ("loss and Lipschitz constants", constants),
        ("trainer soundness", trainers),
        ("idempotent targets", idempotency),
        ("determinism", determinism),
        ("symmetric-difference equivalence", cdc_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
