use indexmap::IndexMap;
use rayon::prelude::*;

use super::view::LearnerView;
use super::{search, Found, Grid, ObjectiveWeights, TrainResult};
use crate::bounds::{DASetting, SettingKind};
use crate::distribution::FiniteDistribution;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::loss::LossSpec;
use crate::measures::{discrepancy_from, discrepancy_with, risk, RiskMatrix};

fn r(spec: &LossSpec, d: &FiniteDistribution, p: &Hypothesis, q: &Hypothesis) -> Result<f64> {
    Ok(risk(d, p, q, &spec.on_dimension(p.output_dim()))?.value())
}

/// `values[i][j] = f(i, j)`, evaluated in parallel.
fn table(n1: usize, n2: usize, f: impl Fn(usize, usize) -> Result<f64> + Sync) -> Result<Vec<Vec<f64>>> {
    (0..n1)
        .into_par_iter()
        .map(|i| (0..n2).map(|j| f(i, j)).collect())
        .collect()
}

fn finish(s: &DASetting, grid: &Grid<'_>, weights: &ObjectiveWeights, found: Found, target_risk: f64) -> TrainResult {
    TrainResult {
        setting: s.kind().name().to_string(),
        chosen: grid.candidate(&found.index),
        objective_value: found.value,
        objective_terms: grid
            .terms
            .iter()
            .map(|t| t.to_string())
            .zip(found.terms)
            .collect::<IndexMap<_, _>>(),
        weights: *weights,
        target_risk,
        trace: found.trace,
    }
}

/// Source risk `R̂_{D_S}[g∘f, y_S]` plus `w_disc · disc_{H2}(f∘D_S, f∘D_T)`
/// over `H1 × H2`. Also serves binary settings.
pub fn train_standard_da(s: &DASetting, weights: &ObjectiveWeights) -> Result<TrainResult> {
    standard_da(s, weights, false)
}

pub(super) fn standard_da(s: &DASetting, weights: &ObjectiveWeights, trace: bool) -> Result<TrainResult> {
    s.require_kind(&[SettingKind::StandardDa, SettingKind::BinaryDa])?;
    let v = LearnerView::new(s)?;
    let spec = *v.loss();
    let (d_s, d_t, y_s) = (v.distribution("D_S")?, v.distribution("D_T")?, v.label("y_S")?);
    let (h1, h2) = (v.class("H1")?, v.class("H2")?);
    let source = table(h1.len(), h2.len(), |f, g| {
        r(&spec, d_s, &h1.members()[f].then(&h2.members()[g])?, y_s)
    })?;
    let disc = h1
        .members()
        .par_iter()
        .map(|f| Ok(discrepancy_with(h2, &d_s.pushforward(f)?, &d_t.pushforward(f)?, &spec, false)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let grid = Grid {
        roles: &["f", "g"],
        sizes: vec![h1.len(), h2.len()],
        terms: &["source_risk", "disc"],
    };
    let found = search(&grid, weights, trace, |i| Ok(vec![source[i[0]][i[1]], disc[i[0]]]))?;
    let h = h1.member(found.index[0])?.then(h2.member(found.index[1])?)?;
    let target_risk = r(&spec, s.distribution("D_T")?, &h, s.target("y_T")?)?;
    Ok(finish(s, &grid, weights, found, target_risk))
}

/// Source risk `R_{D_S}[g∘f, y_S]`, invertibility `R_{D^y_T}[g∘ĝ, Id]`
/// and `disc_{H2}(f∘D_S, ĝ∘D^y_T)` over `H1 × H2 × H2_prime`.
pub fn train_output_da(s: &DASetting, weights: &ObjectiveWeights) -> Result<TrainResult> {
    output_da(s, weights, false)
}

pub(super) fn output_da(s: &DASetting, weights: &ObjectiveWeights, trace: bool) -> Result<TrainResult> {
    s.require_kind(&[SettingKind::OutputDa])?;
    let v = LearnerView::new(s)?;
    let spec = *v.loss();
    let (d_s, dy_t, y_s) = (v.distribution("D_S")?, v.distribution("D^y_T")?, v.label("y_S")?);
    let (h1, h2, h2p) = (v.class("H1")?, v.class("H2")?, v.class("H2_prime")?);
    let id = Hypothesis::identity(spec.dimension);

    let source = table(h1.len(), h2.len(), |f, g| {
        r(&spec, d_s, &h1.members()[f].then(&h2.members()[g])?, y_s)
    })?;
    let inv = table(h2.len(), h2p.len(), |g, gh| {
        r(&spec, dy_t, &h2p.members()[gh].then(&h2.members()[g])?, &id)
    })?;
    let source_side = h1
        .members()
        .par_iter()
        .map(|f| RiskMatrix::new(h2, &d_s.pushforward(f)?, &spec))
        .collect::<Result<Vec<_>>>()?;
    let label_side = h2p
        .members()
        .par_iter()
        .map(|gh| RiskMatrix::new(h2, &dy_t.pushforward(gh)?, &spec))
        .collect::<Result<Vec<_>>>()?;
    let disc = table(h1.len(), h2p.len(), |f, gh| {
        Ok(discrepancy_from(&source_side[f], &label_side[gh])?.value)
    })?;

    let grid = Grid {
        roles: &["f", "g", "ghat"],
        sizes: vec![h1.len(), h2.len(), h2p.len()],
        terms: &["source_risk", "invertibility", "disc"],
    };
    let found = search(&grid, weights, trace, |i| {
        Ok(vec![source[i[0]][i[1]], inv[i[1]][i[2]], disc[i[0]][i[2]]])
    })?;
    let h = h1.member(found.index[0])?.then(h2.member(found.index[1])?)?;
    let target_risk = r(&spec, s.distribution("D_T")?, &h, s.target("y_T")?)?;
    Ok(finish(s, &grid, weights, found, target_risk))
}

/// Source risk `R_{D_S}[a∘h, y_S] = R_{D_S}[b∘f, y_S]` plus
/// `w_disc · disc_{H4⁻¹}(a∘D^y_T, D^y_S)` over `H1 × H3 × H4`, for the
/// hypothesis `h = a⁻¹∘b∘f`.
pub fn train_analogy(s: &DASetting, weights: &ObjectiveWeights) -> Result<TrainResult> {
    analogy(s, weights, false)
}

pub(super) fn analogy(s: &DASetting, weights: &ObjectiveWeights, trace: bool) -> Result<TrainResult> {
    s.require_kind(&[SettingKind::AnalogyOda])?;
    let v = LearnerView::new(s)?;
    let spec = *v.loss();
    let (d_s, dy_s, dy_t, y_s) = (
        v.distribution("D_S")?,
        v.distribution("D^y_S")?,
        v.distribution("D^y_T")?,
        v.label("y_S")?,
    );
    let (h1, h3, h4) = (v.class("H1")?, v.class("H3")?, v.class("H4")?);
    let h3_inv = h3.aligned_inverse().ok_or_else(|| Error::MissingInverse("H3".into()))?;
    let h4_inv = h4.aligned_inverse().ok_or_else(|| Error::MissingInverse("H4".into()))?;
    let disc_spec = spec.on_dimension(h4_inv.output_dim());

    let source = table(h1.len(), h4.len(), |f, b| {
        r(&spec, d_s, &h1.members()[f].then(&h4.members()[b])?, y_s)
    })?;
    let source_labels = RiskMatrix::new(&h4_inv, dy_s, &disc_spec)?;
    let disc = h3
        .members()
        .par_iter()
        .map(|a| {
            let adapted = RiskMatrix::new(&h4_inv, &dy_t.pushforward(a)?, &disc_spec)?;
            Ok(discrepancy_from(&adapted, &source_labels)?.value)
        })
        .collect::<Result<Vec<f64>>>()?;

    let grid = Grid {
        roles: &["f", "a", "b"],
        sizes: vec![h1.len(), h3.len(), h4.len()],
        terms: &["source_risk", "disc"],
    };
    let found = search(&grid, weights, trace, |i| Ok(vec![source[i[0]][i[2]], disc[i[1]]]))?;
    let [f, a, b] = [found.index[0], found.index[1], found.index[2]];
    let h = Hypothesis::compose([h1.member(f)?.clone(), h4.member(b)?.clone(), h3_inv.member(a)?.clone()])?;
    let target_risk = r(&spec, s.distribution("D_T")?, &h, s.target("y_T")?)?;
    Ok(finish(s, &grid, weights, found, target_risk))
}

/// `w_tid·R_{D^y_2}[h, Id] + w_const·R_{D_1}[f∘h, f] + w_disc·disc_H(D^y_2, h∘D_1)`
/// over `h = g∘f`, `g ∈ H2`, with `H = H2∘f`.
pub fn train_domain_transfer(s: &DASetting, weights: &ObjectiveWeights) -> Result<TrainResult> {
    domain_transfer(s, weights, false)
}

pub(super) fn domain_transfer(s: &DASetting, weights: &ObjectiveWeights, trace: bool) -> Result<TrainResult> {
    s.require_kind(&[SettingKind::DomainTransfer])?;
    let v = LearnerView::new(s)?;
    let spec = *v.loss();
    let (d_1, dy_2, f) = (v.distribution("D_1")?, v.distribution("D^y_2")?, v.label("f")?);
    let h_class = v.class("H2")?.after(f)?;
    let id = Hypothesis::identity(spec.dimension);
    let label_side = RiskMatrix::new(&h_class, dy_2, &spec)?;
    let terms = h_class
        .members()
        .par_iter()
        .map(|h| {
            let tid = r(&spec, dy_2, h, &id)?;
            let konst = r(&spec, d_1, &h.then(f)?, f)?;
            let moved = RiskMatrix::new(&h_class, &d_1.pushforward(h)?, &spec)?;
            Ok(vec![tid, konst, discrepancy_from(&label_side, &moved)?.value])
        })
        .collect::<Result<Vec<_>>>()?;

    let grid = Grid {
        roles: &["g"],
        sizes: vec![h_class.len()],
        terms: &["tid", "const", "disc"],
    };
    let found = search(&grid, weights, trace, |i| Ok(terms[i[0]].clone()))?;
    let h = h_class.member(found.index[0])?;
    let target_risk = r(&spec, s.distribution("D_1")?, h, s.target("y")?)?;
    Ok(finish(s, &grid, weights, found, target_risk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::{audit, train};
    use crate::bounds::compute_bound_dtn;
    use crate::scenarios::{generate, Scenario, ScenarioConfig};

    fn scenario(kind: SettingKind, seed: u64) -> Scenario {
        generate(&ScenarioConfig::new(kind, seed)).unwrap()
    }

    fn no_shift(kind: SettingKind, seed: u64) -> Scenario {
        let mut cfg = ScenarioConfig::new(kind, seed);
        cfg.shift_magnitude = 0.0;
        generate(&cfg).unwrap()
    }

    #[test]
    fn standard_no_shift_realizable_fits_exactly() {
        let s = no_shift(SettingKind::StandardDa, 3);
        let res = train_standard_da(&s.setting, &ObjectiveWeights::default()).unwrap();
        assert_eq!(res.target_risk, 0.0);
    }

    #[test]
    fn standard_seed_42_is_audited_optimal() {
        let s = scenario(SettingKind::StandardDa, 42);
        let w = ObjectiveWeights::default();
        let res = train_standard_da(&s.setting, &w).unwrap();
        let a = audit(&s.setting, &w, &res).unwrap();
        assert!(a.optimal, "{a:?}");
        assert!((res.weighted_sum().unwrap() - res.objective_value).abs() <= 1e-12);
    }

    #[test]
    fn zero_disc_weight_is_source_erm() {
        let s = scenario(SettingKind::StandardDa, 42);
        let w = ObjectiveWeights {
            w_disc: 0.0,
            ..Default::default()
        };
        let res = train_standard_da(&s.setting, &w).unwrap();
        let st = &s.setting;
        let (h1, h2) = (st.class("H1").unwrap(), st.class("H2").unwrap());
        let mut best = (f64::INFINITY, 0, 0);
        for (i, f) in h1.members().iter().enumerate() {
            for (j, g) in h2.members().iter().enumerate() {
                let v = r(
                    st.loss(),
                    st.distribution("D_S").unwrap(),
                    &f.then(g).unwrap(),
                    st.target("y_S").unwrap(),
                )
                .unwrap();
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        assert_eq!((res.chosen["f"], res.chosen["g"]), (best.1, best.2));
        assert_eq!(res.objective_value, best.0);
    }

    #[test]
    fn output_da_no_shift_matches_erm() {
        let s = no_shift(SettingKind::OutputDa, 2);
        let trained = train_output_da(&s.setting, &ObjectiveWeights::default()).unwrap();
        let erm = train_output_da(&s.setting, &ObjectiveWeights::erm()).unwrap();
        assert!((trained.target_risk - erm.target_risk).abs() <= 1e-6);
    }

    #[test]
    fn output_da_seed_1_is_audited_optimal() {
        let s = scenario(SettingKind::OutputDa, 1);
        let w = ObjectiveWeights::default();
        let res = train_output_da(&s.setting, &w).unwrap();
        assert!(audit(&s.setting, &w, &res).unwrap().optimal);
    }

    #[test]
    fn infinite_invertibility_weight_filters() {
        let s = scenario(SettingKind::OutputDa, 1);
        let w = ObjectiveWeights {
            w_inv: f64::INFINITY,
            ..Default::default()
        };
        let res = train_output_da(&s.setting, &w).unwrap();
        let v = LearnerView::new(&s.setting).unwrap();
        let (h2, h2p) = (v.class("H2").unwrap(), v.class("H2_prime").unwrap());
        let dy_t = v.distribution("D^y_T").unwrap();
        let id = Hypothesis::identity(1);
        let mut min = f64::INFINITY;
        for g in h2.members() {
            for gh in h2p.members() {
                min = min.min(r(v.loss(), dy_t, &gh.then(g).unwrap(), &id).unwrap());
            }
        }
        assert_eq!(res.objective_terms["invertibility"], min);
        assert_eq!(
            res.objective_value,
            res.objective_terms["source_risk"] + res.objective_terms["disc"]
        );
        assert!(audit(&s.setting, &w, &res).unwrap().optimal);
    }

    #[test]
    fn analogy_construction_fits_exactly() {
        let mut cfg = ScenarioConfig::new(SettingKind::AnalogyOda, 3);
        cfg.shift_magnitude = 0.0;
        let s = generate(&cfg).unwrap();
        let res = train_analogy(&s.setting, &ObjectiveWeights::default()).unwrap();
        assert_eq!(res.target_risk, 0.0, "{res:?}");
    }

    #[test]
    fn analogy_seed_3_is_audited_optimal() {
        let s = scenario(SettingKind::AnalogyOda, 3);
        let w = ObjectiveWeights::default();
        let res = train_analogy(&s.setting, &w).unwrap();
        assert!(audit(&s.setting, &w, &res).unwrap().optimal);
    }

    #[test]
    fn transfer_seed_11_fits_and_bound_passes() {
        let s = scenario(SettingKind::DomainTransfer, 11);
        let w = ObjectiveWeights::default();
        let res = train_domain_transfer(&s.setting, &w).unwrap();
        assert_eq!(res.target_risk, 0.0);
        assert!(audit(&s.setting, &w, &res).unwrap().optimal);
        assert!(compute_bound_dtn(&s.setting, res.chosen["g"]).unwrap().pass);
    }

    #[test]
    fn disc_term_is_monotone_in_its_weight() {
        for (kind, seed) in [
            (SettingKind::StandardDa, 42),
            (SettingKind::OutputDa, 1),
            (SettingKind::DomainTransfer, 11),
        ] {
            let s = scenario(kind, seed);
            let mut last = f64::INFINITY;
            for w_disc in [0.0, 1.0, 10.0] {
                let w = ObjectiveWeights {
                    w_disc,
                    ..Default::default()
                };
                let d = train(&s.setting, &w, false).unwrap().objective_terms["disc"];
                assert!(d <= last, "{kind}: {d} > {last}");
                last = d;
            }
        }
    }

    #[test]
    fn trace_covers_grid() {
        let s = scenario(SettingKind::AnalogyOda, 3);
        let res = train(&s.setting, &ObjectiveWeights::default(), true).unwrap();
        let n = ["H1", "H3", "H4"]
            .iter()
            .map(|c| s.setting.class(c).unwrap().len())
            .product::<usize>();
        assert_eq!(res.trace.len(), n);
        let min = res.trace.iter().map(|t| t.objective).fold(f64::INFINITY, f64::min);
        assert_eq!(min, res.objective_value);
        assert!(train_analogy(&s.setting, &ObjectiveWeights::default())
            .unwrap()
            .trace
            .is_empty());
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let s = scenario(SettingKind::StandardDa, 0);
        assert!(matches!(
            train_output_da(&s.setting, &ObjectiveWeights::default()),
            Err(Error::WrongKind { .. })
        ));
        let two = scenario(SettingKind::TwoSided, 0);
        assert!(train(&two.setting, &ObjectiveWeights::default(), false).is_err());
    }
}
