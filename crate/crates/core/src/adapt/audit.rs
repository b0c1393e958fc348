use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::view::LearnerView;
use super::{finite_value, Grid, ObjectiveWeights, TrainResult};
use crate::bounds::{Candidate, DASetting, SettingKind};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::measures::{discrepancy, risk};

/// Slack allowed when comparing recomputed objective values.
pub const AUDIT_TOLERANCE: f64 = 1e-12;

/// Result of re-enumerating a trainer's product grid from scratch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub candidates: usize,
    /// Smallest objective among candidates surviving the filter terms.
    pub best_value: f64,
    /// The chosen candidate's recomputed objective.
    pub chosen_value: f64,
    /// The recorded term values match the recomputed ones.
    pub terms_match: bool,
    /// The chosen candidate minimizes every infinitely weighted term.
    pub survives_filters: bool,
    /// Candidates whose objective is strictly below the chosen one.
    pub better: Vec<Candidate>,
    pub optimal: bool,
}

fn memo<K: std::hash::Hash + Eq + Copy>(
    cache: &mut HashMap<K, f64>,
    key: K,
    f: impl FnOnce() -> Result<f64>,
) -> Result<f64> {
    if let Some(v) = cache.get(&key) {
        return Ok(*v);
    }
    let v = f()?;
    cache.insert(key, v);
    Ok(v)
}

fn r(
    spec: &crate::loss::LossSpec,
    d: &crate::distribution::FiniteDistribution,
    p: &Hypothesis,
    q: &Hypothesis,
) -> Result<f64> {
    Ok(risk(d, p, q, &spec.on_dimension(p.output_dim()))?.value())
}

/// Recomputes every candidate's objective terms with direct calls to the
/// risk and discrepancy functions and checks that `result` is a minimizer
/// under the same filter-then-rank rule the trainers use.
pub fn audit(s: &DASetting, weights: &ObjectiveWeights, result: &TrainResult) -> Result<Audit> {
    let v = LearnerView::new(s)?;
    let spec = *v.loss();
    let mut c1: HashMap<(usize, usize), f64> = HashMap::new();
    let mut c2: HashMap<(usize, usize), f64> = HashMap::new();
    let mut c3: HashMap<(usize, usize), f64> = HashMap::new();

    let (grid, rows): (Grid<'_>, Vec<Vec<f64>>) = match s.kind() {
        SettingKind::StandardDa | SettingKind::BinaryDa => {
            let (d_s, d_t, y_s) = (v.distribution("D_S")?, v.distribution("D_T")?, v.label("y_S")?);
            let (h1, h2) = (v.class("H1")?, v.class("H2")?);
            let grid = Grid {
                roles: &["f", "g"],
                sizes: vec![h1.len(), h2.len()],
                terms: &["source_risk", "disc"],
            };
            let mut rows = Vec::with_capacity(grid.len());
            for i in 0..grid.len() {
                let [f, g] = grid.decode(i)[..] else { unreachable!() };
                let (fh, gh) = (h1.member(f)?, h2.member(g)?);
                let source = r(&spec, d_s, &fh.then(gh)?, y_s)?;
                let disc = memo(&mut c1, (f, 0), || {
                    Ok(discrepancy(h2, &d_s.pushforward(fh)?, &d_t.pushforward(fh)?, &spec)?.value)
                })?;
                rows.push(vec![source, disc]);
            }
            (grid, rows)
        }
        SettingKind::OutputDa => {
            let (d_s, dy_t, y_s) = (v.distribution("D_S")?, v.distribution("D^y_T")?, v.label("y_S")?);
            let (h1, h2, h2p) = (v.class("H1")?, v.class("H2")?, v.class("H2_prime")?);
            let id = Hypothesis::identity(spec.dimension);
            let grid = Grid {
                roles: &["f", "g", "ghat"],
                sizes: vec![h1.len(), h2.len(), h2p.len()],
                terms: &["source_risk", "invertibility", "disc"],
            };
            let mut rows = Vec::with_capacity(grid.len());
            for i in 0..grid.len() {
                let [f, g, gh] = grid.decode(i)[..] else { unreachable!() };
                let (fm, gm, ghm) = (h1.member(f)?, h2.member(g)?, h2p.member(gh)?);
                let source = memo(&mut c1, (f, g), || r(&spec, d_s, &fm.then(gm)?, y_s))?;
                let inv = memo(&mut c2, (g, gh), || r(&spec, dy_t, &ghm.then(gm)?, &id))?;
                let disc = memo(&mut c3, (f, gh), || {
                    Ok(discrepancy(h2, &d_s.pushforward(fm)?, &dy_t.pushforward(ghm)?, &spec)?.value)
                })?;
                rows.push(vec![source, inv, disc]);
            }
            (grid, rows)
        }
        SettingKind::AnalogyOda => {
            let (d_s, dy_s, dy_t, y_s) = (
                v.distribution("D_S")?,
                v.distribution("D^y_S")?,
                v.distribution("D^y_T")?,
                v.label("y_S")?,
            );
            let (h1, h3, h4) = (v.class("H1")?, v.class("H3")?, v.class("H4")?);
            let h4_inv = h4.aligned_inverse().ok_or_else(|| Error::MissingInverse("H4".into()))?;
            let disc_spec = spec.on_dimension(h4_inv.output_dim());
            let grid = Grid {
                roles: &["f", "a", "b"],
                sizes: vec![h1.len(), h3.len(), h4.len()],
                terms: &["source_risk", "disc"],
            };
            let mut rows = Vec::with_capacity(grid.len());
            for i in 0..grid.len() {
                let [f, a, b] = grid.decode(i)[..] else { unreachable!() };
                let (fm, am, bm) = (h1.member(f)?, h3.member(a)?, h4.member(b)?);
                let source = memo(&mut c1, (f, b), || r(&spec, d_s, &fm.then(bm)?, y_s))?;
                let disc = memo(&mut c2, (a, 0), || {
                    Ok(discrepancy(&h4_inv, &dy_t.pushforward(am)?, dy_s, &disc_spec)?.value)
                })?;
                rows.push(vec![source, disc]);
            }
            (grid, rows)
        }
        SettingKind::DomainTransfer => {
            let (d_1, dy_2, f) = (v.distribution("D_1")?, v.distribution("D^y_2")?, v.label("f")?);
            let h2 = v.class("H2")?;
            let h_class = h2.after(f)?;
            let id = Hypothesis::identity(spec.dimension);
            let grid = Grid {
                roles: &["g"],
                sizes: vec![h2.len()],
                terms: &["tid", "const", "disc"],
            };
            let mut rows = Vec::with_capacity(grid.len());
            for g in 0..grid.len() {
                let h = f.then(h2.member(g)?)?;
                rows.push(vec![
                    r(&spec, dy_2, &h, &id)?,
                    r(&spec, d_1, &h.then(f)?, f)?,
                    discrepancy(&h_class, dy_2, &d_1.pushforward(&h)?, &spec)?.value,
                ]);
            }
            (grid, rows)
        }
        SettingKind::TwoSided => unreachable!("LearnerView rejects two_sided"),
    };

    let w = grid.term_weights(weights)?;
    let chosen_idx: Vec<usize> = grid
        .roles
        .iter()
        .map(|role| {
            result
                .chosen
                .get(*role)
                .copied()
                .ok_or_else(|| Error::InvalidSetting(format!("result has no `{role}` index")))
        })
        .collect::<Result<_>>()?;
    if chosen_idx.iter().zip(&grid.sizes).any(|(i, n)| i >= n) {
        return Err(Error::InvalidSetting("chosen index out of range".into()));
    }
    let flat = chosen_idx.iter().zip(&grid.sizes).fold(0, |acc, (i, n)| acc * n + i);
    let chosen_terms = &rows[flat];
    let terms_match = grid.terms.iter().zip(chosen_terms).all(|(name, v)| {
        result
            .objective_terms
            .get(*name)
            .is_some_and(|rec| (rec - v).abs() <= AUDIT_TOLERANCE)
    });

    let mut survives_filters = true;
    let mut alive: Vec<usize> = (0..rows.len()).collect();
    for (t, wt) in w.iter().enumerate() {
        if wt.is_infinite() {
            let m = alive.iter().map(|&i| rows[i][t]).fold(f64::INFINITY, f64::min);
            survives_filters &= chosen_terms[t] <= m + AUDIT_TOLERANCE;
            alive.retain(|&i| rows[i][t] <= m + AUDIT_TOLERANCE);
        }
    }
    let chosen_value = finite_value(&w, chosen_terms);
    let best_value = alive
        .iter()
        .map(|&i| finite_value(&w, &rows[i]))
        .fold(f64::INFINITY, f64::min);
    let better: Vec<Candidate> = alive
        .iter()
        .filter(|&&i| finite_value(&w, &rows[i]) < chosen_value - AUDIT_TOLERANCE)
        .map(|&i| grid.candidate(&grid.decode(i)))
        .collect();
    let optimal = terms_match && survives_filters && better.is_empty();
    Ok(Audit {
        candidates: rows.len(),
        best_value,
        chosen_value,
        terms_match,
        survives_filters,
        better,
        optimal,
    })
}
