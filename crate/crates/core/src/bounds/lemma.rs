use indexmap::IndexMap;

use super::chain::{BoundReport, Relation, StepReport, TOLERANCE};
use super::setting::{DASetting, SettingKind};
use crate::class::HypothesisClass;
use crate::distribution::FiniteDistribution;
use crate::error::Result;
use crate::loss::LossSpec;
use crate::measures::{discrepancy, quad_discrepancy, RiskMatrix};

/// Replays the comparison of two discrepancies through the quad
/// discrepancy of the two pairs:
/// `|disc(D11, D12) − disc(D21, D22)| ≤ q-disc[(D11, D12), (D21, D22)]`.
pub fn lemma1_report(
    c: &HypothesisClass,
    d11: &FiniteDistribution,
    d12: &FiniteDistribution,
    d21: &FiniteDistribution,
    d22: &FiniteDistribution,
    spec: &LossSpec,
) -> Result<BoundReport> {
    c.require_nonempty("for the quad comparison")?;
    let m = [d11, d12, d21, d22]
        .iter()
        .map(|d| RiskMatrix::new(c, d, spec))
        .collect::<Result<Vec<_>>>()?;
    let n = c.len();

    // Pointwise reverse triangle inequality, reported at the pair where the
    // right side exceeds the left by the least.
    let mut worst = (f64::INFINITY, 0.0, 0.0);
    let (mut sup_u1, mut sup_u2, mut sup_gap) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let u1 = m[0].get(i, j) - m[1].get(i, j);
            let u2 = m[2].get(i, j) - m[3].get(i, j);
            let lhs = (u1.abs() - u2.abs()).abs();
            let rhs = (u1 - u2).abs();
            if rhs - lhs < worst.0 {
                worst = (rhs - lhs, lhs, rhs);
            }
            sup_u1 = sup_u1.max(u1.abs());
            sup_u2 = sup_u2.max(u2.abs());
            sup_gap = sup_gap.max(rhs);
        }
    }
    let disc1 = discrepancy(c, d11, d12, spec)?.value;
    let disc2 = discrepancy(c, d21, d22, spec)?.value;
    let q = quad_discrepancy(c, d11, d12, d21, d22, spec)?.value;

    let steps = vec![
        StepReport::check(
            "pointwise_reverse_triangle",
            worst.1,
            worst.2,
            1.0,
            Relation::Le,
            "reverse_triangle",
        ),
        StepReport::check(
            "sup_first_pair",
            sup_u1,
            disc1,
            1.0,
            Relation::Eq,
            "discrepancy_definition",
        ),
        StepReport::check(
            "sup_second_pair",
            sup_u2,
            disc2,
            1.0,
            Relation::Eq,
            "discrepancy_definition",
        ),
        StepReport::check("sup_gap", sup_gap, q, 1.0, Relation::Eq, "quad_discrepancy_definition"),
        StepReport::check("forward", disc1 - disc2, q, 1.0, Relation::Le, "supremum"),
        StepReport::check("backward", disc2 - disc1, q, 1.0, Relation::Le, "symmetry"),
    ];
    let lhs = (disc1 - disc2).abs();
    let pass = steps.iter().all(|s| s.pass) && lhs <= q + TOLERANCE;
    Ok(BoundReport {
        setting: "quad".into(),
        theorem: "lemma1".into(),
        lhs,
        terms: IndexMap::from([("q-disc".to_string(), q)]),
        coefficients: IndexMap::from([("q-disc".to_string(), 1.0)]),
        constant: 1.0,
        rhs: q,
        slack: q - lhs,
        steps,
        pass,
        statement: None,
    })
}

/// The four distributions compared in the two-sided setting:
/// `(a1∘h1∘D_1, a1∘D^y_1, a2∘h2∘D_2, a2∘D^y_2)` for `hi = gi∘fi`.
pub fn two_sided_quad(
    s: &DASetting,
    first: (usize, usize, usize),
    second: (usize, usize, usize),
) -> Result<[FiniteDistribution; 4]> {
    s.require_kind(&[SettingKind::TwoSided])?;
    let (h1, h2, h3) = (s.class("H1")?, s.class("H2")?, s.class("H3")?);
    let side =
        |(f, g, a): (usize, usize, usize), d: &str, y: &str| -> Result<(FiniteDistribution, FiniteDistribution)> {
            let a = h3.member(a)?;
            let h = h1.member(f)?.then(h2.member(g)?)?;
            let dist = s.distribution(d)?;
            Ok((
                dist.pushforward(&h.then(a)?)?,
                dist.pushforward(&s.target(y)?.then(a)?)?,
            ))
        };
    let (d11, d12) = side(first, "D_1", "y_1")?;
    let (d21, d22) = side(second, "D_2", "y_2")?;
    Ok([d11, d12, d21, d22])
}

/// The quad comparison instantiated on the two-sided setting with discriminator class `C`.
pub fn compute_bound_cor1(
    s: &DASetting,
    first: (usize, usize, usize),
    second: (usize, usize, usize),
) -> Result<BoundReport> {
    let [d11, d12, d21, d22] = two_sided_quad(s, first, second)?;
    let c = s.class("C")?;
    let spec = s.loss().on_dimension(c.output_dim());
    let mut report = lemma1_report(c, &d11, &d12, &d21, &d22, &spec)?;
    report.setting = s.kind().name().to_string();
    report.theorem = "cor1".into();
    Ok(report)
}
