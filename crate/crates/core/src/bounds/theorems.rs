use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::chain::{BoundReport, Chain, StepReport};
use super::lemma::compute_bound_cor1;
use super::setting::{DASetting, SettingKind};
use crate::class::HypothesisClass;
use crate::distribution::FiniteDistribution;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::loss::LossSpec;
use crate::measures::{discrepancy, risk};

/// Member indices selecting a hypothesis from a setting's classes, keyed
/// by role (`f`, `g`, `ghat`, `a`, `b`, `f1`, ...).
pub type Candidate = IndexMap<String, usize>;

/// Builds a [`Candidate`] from `(role, index)` pairs.
pub fn candidate<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Candidate {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub(crate) fn pick(c: &Candidate, role: &str) -> Result<usize> {
    c.get(role)
        .copied()
        .ok_or_else(|| Error::InvalidSetting(format!("candidate has no `{role}` index")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Mansour,
    BenDavid,
    Oda,
    Analogy,
    Dt,
    Dtn,
    Cor1,
}

impl Theorem {
    pub const ALL: [Theorem; 7] = [
        Theorem::Mansour,
        Theorem::BenDavid,
        Theorem::Oda,
        Theorem::Analogy,
        Theorem::Dt,
        Theorem::Dtn,
        Theorem::Cor1,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Theorem::Mansour => "mansour",
            Theorem::BenDavid => "bendavid",
            Theorem::Oda => "oda",
            Theorem::Analogy => "analogy",
            Theorem::Dt => "dt",
            Theorem::Dtn => "dtn",
            Theorem::Cor1 => "cor1",
        }
    }

    /// The bounds that apply to a setting kind.
    pub fn for_kind(kind: SettingKind) -> &'static [Theorem] {
        match kind {
            SettingKind::StandardDa => &[Theorem::Mansour],
            SettingKind::BinaryDa => &[Theorem::Mansour, Theorem::BenDavid],
            SettingKind::OutputDa => &[Theorem::Oda],
            SettingKind::AnalogyOda => &[Theorem::Analogy],
            SettingKind::TwoSided => &[Theorem::Cor1],
            SettingKind::DomainTransfer => &[Theorem::Dt, Theorem::Dtn],
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| Error::UnknownTheorem(s.to_string()))
    }
}

/// Evaluates `theorem` on `setting` at the hypothesis selected by `c`.
pub fn compute_bound(theorem: Theorem, setting: &DASetting, c: &Candidate) -> Result<BoundReport> {
    match theorem {
        Theorem::Mansour => compute_bound_mansour(setting, pick(c, "f")?, pick(c, "g")?),
        Theorem::BenDavid => compute_bound_bendavid(setting, pick(c, "f")?, pick(c, "g")?),
        Theorem::Oda => compute_bound_oda(setting, pick(c, "f")?, pick(c, "g")?, pick(c, "ghat")?),
        Theorem::Analogy => compute_bound_analogy(setting, pick(c, "f")?, pick(c, "b")?, pick(c, "a")?),
        Theorem::Dt => compute_bound_dt(setting, pick(c, "g")?),
        Theorem::Dtn => compute_bound_dtn(setting, pick(c, "g")?),
        Theorem::Cor1 => compute_bound_cor1(
            setting,
            (pick(c, "f1")?, pick(c, "g1")?, pick(c, "a1")?),
            (pick(c, "f2")?, pick(c, "g2")?, pick(c, "a2")?),
        ),
    }
}

/// Replays the proof of `theorem_id` step by step.
pub fn verify_proof_script(theorem_id: &str, setting: &DASetting, c: &Candidate) -> Result<Vec<StepReport>> {
    let theorem: Theorem = theorem_id.parse()?;
    Ok(compute_bound(theorem, setting, c)?.steps)
}

/// An exact enumeration argmin.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimizer {
    pub index: usize,
    pub hypothesis: Hypothesis,
    pub value: f64,
}

/// Lowest-index argmin of `objective` over `0..n`.
pub(crate) fn argmin(n: usize, mut objective: impl FnMut(usize) -> Result<f64>) -> Result<(usize, f64)> {
    if n == 0 {
        return Err(Error::Empty("hypothesis class".into()));
    }
    let mut best = (0, f64::INFINITY);
    for i in 0..n {
        let v = objective(i)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}

/// `argmin over c ∈ C of R_D[c ∘ prefix, target]`; the returned hypothesis
/// is the composition `c ∘ prefix`.
pub fn best_in_class(
    c: &HypothesisClass,
    prefix: &Hypothesis,
    d: &FiniteDistribution,
    target: &Hypothesis,
    spec: &LossSpec,
) -> Result<Minimizer> {
    let composed = c.after(prefix)?;
    let (index, value) = argmin(c.len(), |i| Ok(risk(d, &composed.members()[i], target, spec)?.value()))?;
    Ok(Minimizer {
        index,
        hypothesis: composed.members()[index].clone(),
        value,
    })
}

/// `ĝ_T = argmin over ḡ ∈ H2' of R_{ĝ∘D^y_T}[ḡ∘g*_T, Id] + R_{f∘D_T}[ḡ∘g*_T, Id]`.
pub fn best_ghat_t(
    h2_prime: &HypothesisClass,
    g_star_t: &Hypothesis,
    ghat: &Hypothesis,
    f: &Hypothesis,
    setting: &DASetting,
) -> Result<Minimizer> {
    setting.require_kind(&[SettingKind::OutputDa])?;
    let dy_t = setting.output_distribution("y_T", "D_T")?;
    let on_ghat = dy_t.pushforward(ghat)?;
    let on_f = setting.distribution("D_T")?.pushforward(f)?;
    let id = Hypothesis::identity(f.output_dim());
    let spec = setting.loss().on_dimension(f.output_dim());
    let (index, value) = argmin(h2_prime.len(), |i| {
        let round_trip = g_star_t.then(&h2_prime.members()[i])?;
        Ok(risk(&on_ghat, &round_trip, &id, &spec)?.value() + risk(&on_f, &round_trip, &id, &spec)?.value())
    })?;
    Ok(Minimizer {
        index,
        hypothesis: h2_prime.members()[index].clone(),
        value,
    })
}

/// Risk with the setting's loss kind taken on the hypotheses' output space.
fn r(spec: &LossSpec, d: &FiniteDistribution, p: &Hypothesis, q: &Hypothesis) -> Result<f64> {
    Ok(risk(d, p, q, &spec.on_dimension(p.output_dim()))?.value())
}

fn declared_l(c: &HypothesisClass, name: &str) -> Result<f64> {
    c.lipschitz_l().ok_or_else(|| Error::MissingLipschitz(name.to_string()))
}

fn inverse_class(c: &HypothesisClass, name: &str) -> Result<HypothesisClass> {
    c.aligned_inverse()
        .ok_or_else(|| Error::MissingInverse(name.to_string()))
}

/// The source/target risk bound in the feature-space discrepancy.
///
/// The chain applies the factor triangle inequality twice, so the checked
/// statement carries `K²`; for losses with `K = 1` it is the classical bound.
pub fn compute_bound_mansour(s: &DASetting, f: usize, g: usize) -> Result<BoundReport> {
    s.require_kind(&[SettingKind::StandardDa, SettingKind::BinaryDa])?;
    let spec = *s.loss();
    let k = spec.triangle_constant;
    let (d_s, d_t) = (s.distribution("D_S")?, s.distribution("D_T")?);
    let (y_s, y_t) = (s.target("y_S")?, s.target("y_T")?);
    let h2 = s.class("H2")?;
    let f = s.class("H1")?.member(f)?;
    let h = f.then(h2.member(g)?)?;
    let star_s = best_in_class(h2, f, d_s, y_s, &spec)?.hypothesis;
    let star_t = best_in_class(h2, f, d_t, y_t, &spec)?.hypothesis;
    let disc = discrepancy(h2, &d_s.pushforward(f)?, &d_t.pushforward(f)?, &spec)?.value;

    let mut c = Chain::new();
    c.term("R_{D_T}[h, y_T]", r(&spec, d_t, &h, y_t)?)
        .term("R_{D_T}[h, h*_T]", r(&spec, d_t, &h, &star_t)?)
        .term("R_{D_T}[h*_T, y_T]", r(&spec, d_t, &star_t, y_t)?)
        .term("R_{D_S}[h, h*_T]", r(&spec, d_s, &h, &star_t)?)
        .term("R_{D_S}[h, h*_S]", r(&spec, d_s, &h, &star_s)?)
        .term("R_{D_S}[h*_S, h*_T]", r(&spec, d_s, &star_s, &star_t)?)
        .term("disc_{H2}(f∘D_S, f∘D_T)", disc);
    c.le(
        "target_split",
        "R_{D_T}[h, y_T]",
        &["R_{D_T}[h, h*_T]", "R_{D_T}[h*_T, y_T]"],
        k,
        "factor_triangle",
    )
    .le(
        "domain_change",
        "R_{D_T}[h, h*_T]",
        &["R_{D_S}[h, h*_T]", "disc_{H2}(f∘D_S, f∘D_T)"],
        1.0,
        "discrepancy",
    )
    .le(
        "source_split",
        "R_{D_S}[h, h*_T]",
        &["R_{D_S}[h, h*_S]", "R_{D_S}[h*_S, h*_T]"],
        k,
        "factor_triangle",
    );
    let mut report = c.finish(
        s.kind().name(),
        Theorem::Mansour.id(),
        "R_{D_T}[h, y_T]",
        &[
            ("R_{D_S}[h, h*_S]", &["R_{D_S}[h, h*_S]"]),
            ("R_{D_T}[h*_T, y_T]", &["R_{D_T}[h*_T, y_T]"]),
            ("R_{D_S}[h*_S, h*_T]", &["R_{D_S}[h*_S, h*_T]"]),
            ("disc_{H2}(f∘D_S, f∘D_T)", &["disc_{H2}(f∘D_S, f∘D_T)"]),
        ],
    )?;
    report.statement = Some(if k == 1.0 { "exact" } else { "k_weighted" }.to_string());
    Ok(report)
}

fn require_binary(outputs: impl IntoIterator<Item = Result<crate::point::Point>>, member: usize) -> Result<()> {
    for o in outputs {
        let v = o?.coords()[0];
        if v != 0.0 && v != 1.0 {
            return Err(Error::NonBinary { member, value: v });
        }
    }
    Ok(())
}

/// The binary-classification bound with λ, the best combined risk in `H2 ∘ f`.
pub fn compute_bound_bendavid(s: &DASetting, f: usize, g: usize) -> Result<BoundReport> {
    s.require_kind(&[SettingKind::BinaryDa])?;
    let spec = *s.loss();
    let k = spec.triangle_constant;
    let (d_s, d_t) = (s.distribution("D_S")?, s.distribution("D_T")?);
    let y = s.target("y_S")?;
    let h2 = s.class("H2")?;
    let f = s.class("H1")?.member(f)?;
    let composed = h2.after(f)?;
    for (i, m) in composed.members().iter().enumerate() {
        require_binary(d_s.support().iter().chain(d_t.support()).map(|x| m.evaluate(x)), i)?;
    }
    let h = composed.member(g)?.clone();
    let (star, _) = argmin(composed.len(), |i| {
        let m = &composed.members()[i];
        Ok(r(&spec, d_t, m, y)? + r(&spec, d_s, m, y)?)
    })?;
    let star = composed.members()[star].clone();
    let disc = discrepancy(h2, &d_s.pushforward(f)?, &d_t.pushforward(f)?, &spec)?.value;

    let mut c = Chain::new();
    c.term("R_{D_T}[h, y]", r(&spec, d_t, &h, y)?)
        .term("R_{D_T}[h, h*]", r(&spec, d_t, &h, &star)?)
        .term("R_{D_T}[h*, y]", r(&spec, d_t, &star, y)?)
        .term("R_{D_S}[h, h*]", r(&spec, d_s, &h, &star)?)
        .term("R_{D_S}[h, y]", r(&spec, d_s, &h, y)?)
        .term("R_{D_S}[h*, y]", r(&spec, d_s, &star, y)?)
        .term("disc_{H2}(f∘D_S, f∘D_T)", disc);
    c.le(
        "target_split",
        "R_{D_T}[h, y]",
        &["R_{D_T}[h, h*]", "R_{D_T}[h*, y]"],
        k,
        "factor_triangle",
    )
    .le(
        "domain_change",
        "R_{D_T}[h, h*]",
        &["R_{D_S}[h, h*]", "disc_{H2}(f∘D_S, f∘D_T)"],
        1.0,
        "discrepancy",
    )
    .le(
        "source_split",
        "R_{D_S}[h, h*]",
        &["R_{D_S}[h, y]", "R_{D_S}[h*, y]"],
        k,
        "factor_triangle",
    );
    c.finish(
        s.kind().name(),
        Theorem::BenDavid.id(),
        "R_{D_T}[h, y]",
        &[
            ("R_{D_S}[h, y]", &["R_{D_S}[h, y]"]),
            ("disc_{H2}(f∘D_S, f∘D_T)", &["disc_{H2}(f∘D_S, f∘D_T)"]),
            ("λ", &["R_{D_T}[h*, y]", "R_{D_S}[h*, y]"]),
        ],
    )
}

/// The output-side adaptation bound for `h = g∘f` and pseudo-inverse `ĝ`.
pub fn compute_bound_oda(s: &DASetting, f: usize, g: usize, ghat: usize) -> Result<BoundReport> {
    s.require_kind(&[SettingKind::OutputDa])?;
    let spec = *s.loss();
    let k = spec.triangle_constant;
    let (h2, h2p) = (s.class("H2")?, s.class("H2_prime")?);
    let l2 = declared_l(h2, "H2")?;
    let l2p = declared_l(h2p, "H2_prime")?;
    let (d_s, d_t) = (s.distribution("D_S")?, s.distribution("D_T")?);
    let (y_s, y_t) = (s.target("y_S")?, s.target("y_T")?);
    let f = s.class("H1")?.member(f)?;
    let g = h2.member(g)?;
    let ghat = h2p.member(ghat)?;
    let h = f.then(g)?;
    let id_y = Hypothesis::identity(g.output_dim());
    let id_f = Hypothesis::identity(g.input_dim());

    let g_star_t = &h2.members()[best_in_class(h2, f, d_t, y_t, &spec)?.index];
    let g_star_s = &h2.members()[best_in_class(h2, f, d_s, y_s, &spec)?.index];
    let h_star_t = f.then(g_star_t)?;
    let h_star_s = f.then(g_star_s)?;
    let ghat_t = best_ghat_t(h2p, g_star_t, ghat, f, s)?.hypothesis;

    let dy_t = d_t.pushforward(y_t)?;
    let ghat_dy_t = dy_t.pushforward(ghat)?;
    let f_d_s = d_s.pushforward(f)?;
    let f_d_t = d_t.pushforward(f)?;
    let disc = discrepancy(h2, &f_d_s, &ghat_dy_t, &spec)?.value;

    let g_ghat_t = ghat_t.then(g)?;
    let g_ghat = ghat.then(g)?;
    let ghat_t_g_ghat = g_ghat.then(&ghat_t)?;
    let ghat_t_g = g.then(&ghat_t)?;
    let ghat_t_gst = g_star_t.then(&ghat_t)?;
    let pullback = y_t.then(&ghat_t)?;
    let reconstruction = pullback.then(g)?;
    let ghat_t_hst = h_star_t.then(&ghat_t)?;

    let mut c = Chain::new();
    c.term("R_{D_T}[h, y_T]", r(&spec, d_t, &h, y_t)?)
        .term("R_{D_T}[g∘ĝ_T∘y_T, y_T]", r(&spec, d_t, &reconstruction, y_t)?)
        .term("R_{D_T}[h, g∘ĝ_T∘y_T]", r(&spec, d_t, &h, &reconstruction)?)
        .term("R_{D^y_T}[g∘ĝ_T, Id]", r(&spec, &dy_t, &g_ghat_t, &id_y)?)
        .term("R_{D^y_T}[g∘ĝ_T, g∘ĝ]", r(&spec, &dy_t, &g_ghat_t, &g_ghat)?)
        .term("R_{D^y_T}[g∘ĝ, Id]", r(&spec, &dy_t, &g_ghat, &id_y)?)
        .term("R_{D^y_T}[ĝ_T, ĝ]", r(&spec, &dy_t, &ghat_t, ghat)?)
        .term("R_{D^y_T}[ĝ_T∘g∘ĝ, ĝ]", r(&spec, &dy_t, &ghat_t_g_ghat, ghat)?)
        .term("R_{D^y_T}[ĝ_T∘g∘ĝ, ĝ_T]", r(&spec, &dy_t, &ghat_t_g_ghat, &ghat_t)?)
        .term("R_{ĝ∘D^y_T}[ĝ_T∘g, Id]", r(&spec, &ghat_dy_t, &ghat_t_g, &id_f)?)
        .term(
            "R_{ĝ∘D^y_T}[ĝ_T∘g, ĝ_T∘g*_T]",
            r(&spec, &ghat_dy_t, &ghat_t_g, &ghat_t_gst)?,
        )
        .term("R_{ĝ∘D^y_T}[ĝ_T∘g*_T, Id]", r(&spec, &ghat_dy_t, &ghat_t_gst, &id_f)?)
        .term("R_{ĝ∘D^y_T}[g, g*_T]", r(&spec, &ghat_dy_t, g, g_star_t)?)
        .term("R_{f∘D_S}[g, g*_T]", r(&spec, &f_d_s, g, g_star_t)?)
        .term("disc_{H2}(f∘D_S, ĝ∘D^y_T)", disc)
        .term("R_{D_S}[h, h*_T]", r(&spec, d_s, &h, &h_star_t)?)
        .term("R_{D_S}[h, h*_S]", r(&spec, d_s, &h, &h_star_s)?)
        .term("R_{D_S}[h*_S, h*_T]", r(&spec, d_s, &h_star_s, &h_star_t)?)
        .term("R_{D_T}[f, ĝ_T∘y_T]", r(&spec, d_t, f, &pullback)?)
        .term("R_{D_T}[ĝ_T∘h*_T, ĝ_T∘y_T]", r(&spec, d_t, &ghat_t_hst, &pullback)?)
        .term("R_{D_T}[ĝ_T∘h*_T, f]", r(&spec, d_t, &ghat_t_hst, f)?)
        .term("R_{D_T}[h*_T, y_T]", r(&spec, d_t, &h_star_t, y_t)?)
        .term("R_{f∘D_T}[ĝ_T∘g*_T, Id]", r(&spec, &f_d_t, &ghat_t_gst, &id_f)?);

    let lip2 = "lipschitz(H2)";
    let lip2p = "lipschitz(H2_prime)";
    c.le(
        "target_split",
        "R_{D_T}[h, y_T]",
        &["R_{D_T}[g∘ĝ_T∘y_T, y_T]", "R_{D_T}[h, g∘ĝ_T∘y_T]"],
        k,
        "factor_triangle",
    )
    .eq(
        "reconstruction_on_outputs",
        "R_{D_T}[g∘ĝ_T∘y_T, y_T]",
        "R_{D^y_T}[g∘ĝ_T, Id]",
        "pushforward",
    )
    .le(
        "split_via_ghat",
        "R_{D^y_T}[g∘ĝ_T, Id]",
        &["R_{D^y_T}[g∘ĝ_T, g∘ĝ]", "R_{D^y_T}[g∘ĝ, Id]"],
        k,
        "factor_triangle",
    )
    .le("strip_g", "R_{D^y_T}[g∘ĝ_T, g∘ĝ]", &["R_{D^y_T}[ĝ_T, ĝ]"], l2, lip2)
    .le(
        "split_via_round_trip",
        "R_{D^y_T}[ĝ_T, ĝ]",
        &["R_{D^y_T}[ĝ_T∘g∘ĝ, ĝ]", "R_{D^y_T}[ĝ_T∘g∘ĝ, ĝ_T]"],
        k,
        "factor_triangle",
    )
    .eq(
        "round_trip_on_features",
        "R_{D^y_T}[ĝ_T∘g∘ĝ, ĝ]",
        "R_{ĝ∘D^y_T}[ĝ_T∘g, Id]",
        "pushforward",
    )
    .le(
        "strip_ghat_t",
        "R_{D^y_T}[ĝ_T∘g∘ĝ, ĝ_T]",
        &["R_{D^y_T}[g∘ĝ, Id]"],
        l2p,
        lip2p,
    )
    .le(
        "split_via_g_star_t",
        "R_{ĝ∘D^y_T}[ĝ_T∘g, Id]",
        &["R_{ĝ∘D^y_T}[ĝ_T∘g, ĝ_T∘g*_T]", "R_{ĝ∘D^y_T}[ĝ_T∘g*_T, Id]"],
        k,
        "factor_triangle",
    )
    .le(
        "strip_ghat_t_again",
        "R_{ĝ∘D^y_T}[ĝ_T∘g, ĝ_T∘g*_T]",
        &["R_{ĝ∘D^y_T}[g, g*_T]"],
        l2p,
        lip2p,
    )
    .le(
        "domain_change",
        "R_{ĝ∘D^y_T}[g, g*_T]",
        &["R_{f∘D_S}[g, g*_T]", "disc_{H2}(f∘D_S, ĝ∘D^y_T)"],
        1.0,
        "discrepancy",
    )
    .eq(
        "source_features",
        "R_{f∘D_S}[g, g*_T]",
        "R_{D_S}[h, h*_T]",
        "pushforward",
    )
    .le(
        "source_split",
        "R_{D_S}[h, h*_T]",
        &["R_{D_S}[h, h*_S]", "R_{D_S}[h*_S, h*_T]"],
        k,
        "factor_triangle",
    )
    .le(
        "strip_g_on_target",
        "R_{D_T}[h, g∘ĝ_T∘y_T]",
        &["R_{D_T}[f, ĝ_T∘y_T]"],
        l2,
        lip2,
    )
    .le(
        "split_via_h_star_t",
        "R_{D_T}[f, ĝ_T∘y_T]",
        &["R_{D_T}[ĝ_T∘h*_T, ĝ_T∘y_T]", "R_{D_T}[ĝ_T∘h*_T, f]"],
        k,
        "factor_triangle",
    )
    .le(
        "strip_ghat_t_on_target",
        "R_{D_T}[ĝ_T∘h*_T, ĝ_T∘y_T]",
        &["R_{D_T}[h*_T, y_T]"],
        l2p,
        lip2p,
    )
    .eq(
        "target_features",
        "R_{D_T}[ĝ_T∘h*_T, f]",
        "R_{f∘D_T}[ĝ_T∘g*_T, Id]",
        "pushforward",
    );

    let terms: [&str; 7] = [
        "R_{D_S}[h, h*_S]",
        "R_{D_S}[h*_S, h*_T]",
        "R_{D_T}[h*_T, y_T]",
        "R_{ĝ∘D^y_T}[ĝ_T∘g*_T, Id]",
        "R_{f∘D_T}[ĝ_T∘g*_T, Id]",
        "R_{D^y_T}[g∘ĝ, Id]",
        "disc_{H2}(f∘D_S, ĝ∘D^y_T)",
    ];
    let groups: Vec<(&str, &[&str])> = terms.iter().map(|t| (*t, std::slice::from_ref(t))).collect();
    c.finish(s.kind().name(), Theorem::Oda.id(), "R_{D_T}[h, y_T]", &groups)
}

/// The analogy bound for `h = a⁻¹∘b∘f` with adapter `a ∈ H3` and `b ∈ H4`.
pub fn compute_bound_analogy(s: &DASetting, f: usize, b: usize, a: usize) -> Result<BoundReport> {
    s.require_kind(&[SettingKind::AnalogyOda])?;
    let spec = *s.loss();
    let k = spec.triangle_constant;
    let (h3, h4) = (s.class("H3")?, s.class("H4")?);
    let (h3_inv, h4_inv) = (inverse_class(h3, "H3")?, inverse_class(h4, "H4")?);
    let l_h3 = declared_l(h3, "H3")?;
    let l_h3_inv = declared_l(&h3_inv, "H3 inverse")?;
    let l_h4 = declared_l(h4, "H4")?;
    let l_h4_inv = declared_l(&h4_inv, "H4 inverse")?;
    let l_g = l_h3_inv * l_h4;
    let l_g_inv = l_h4_inv * l_h3;

    let (d_s, d_t) = (s.distribution("D_S")?, s.distribution("D_T")?);
    let (y_s, y_t) = (s.target("y_S")?, s.target("y_T")?);
    let f = s.class("H1")?.member(f)?;
    let (a, a_inv) = (h3.member(a)?, h3_inv.member(a)?);
    let (b, b_inv) = (h4.member(b)?, h4_inv.member(b)?);
    let g = b.then(a_inv)?;
    let g_inv = a.then(b_inv)?;
    let h = f.then(&g)?;

    let (bt, _) = argmin(h4.len(), |i| {
        r(&spec, d_t, &f.then(&h4.members()[i])?.then(a_inv)?, y_t)
    })?;
    let (bs, _) = argmin(h4.len(), |i| r(&spec, d_s, &f.then(&h4.members()[i])?, y_s))?;
    let b_star_t = &h4.members()[bt];
    let b_star_t_inv = &h4_inv.members()[bt];
    let g_star_t = b_star_t.then(a_inv)?;
    let g_star_t_inv = a.then(b_star_t_inv)?;
    let h_star_t = f.then(&g_star_t)?;
    let h_star_s = f.then(&h4.members()[bs])?;

    let dy_t = d_t.pushforward(y_t)?;
    let dy_s = d_s.pushforward(y_s)?;
    let a_dy_t = dy_t.pushforward(a)?;
    let a_inv_dy_s = dy_s.pushforward(a_inv)?;
    let disc = discrepancy(&h4_inv, &a_dy_t, &dy_s, &spec.on_dimension(h4_inv.output_dim()))?.value;

    let id_y = Hypothesis::identity(spec.dimension);
    let g_gst_inv = g_star_t_inv.then(&g)?;
    let target_reconstruction = y_t.then(&g_gst_inv)?;
    let adapted_labels = y_s.then(a_inv)?;
    let source_features = adapted_labels.then(&g_star_t_inv)?;
    let source_reconstruction = source_features.then(&g)?;
    let a_h = h.then(a)?;
    let a_h_star_t = h_star_t.then(a)?;
    let target_features = y_t.then(&g_star_t_inv)?;

    let mut c = Chain::new();
    c.term("R_{D_T}[h, y_T]", r(&spec, d_t, &h, y_t)?)
        .term(
            "R_{D_T}[g∘(g*_T)⁻¹∘y_T, y_T]",
            r(&spec, d_t, &target_reconstruction, y_t)?,
        )
        .term("R_{D_T}[h, g∘(g*_T)⁻¹∘y_T]", r(&spec, d_t, &h, &target_reconstruction)?)
        .term("R_{D^y_T}[g∘(g*_T)⁻¹, Id]", r(&spec, &dy_t, &g_gst_inv, &id_y)?)
        .term("R_{D^y_T}[(g*_T)⁻¹, g⁻¹]", r(&spec, &dy_t, &g_star_t_inv, &g_inv)?)
        .term("R_{a∘D^y_T}[(b*_T)⁻¹, b⁻¹]", r(&spec, &a_dy_t, b_star_t_inv, b_inv)?)
        .term("R_{D^y_S}[(b*_T)⁻¹, b⁻¹]", r(&spec, &dy_s, b_star_t_inv, b_inv)?)
        .term("disc_{H4⁻¹}(a∘D^y_T, D^y_S)", disc)
        .term(
            "R_{a⁻¹∘D^y_S}[(g*_T)⁻¹, g⁻¹]",
            r(&spec, &a_inv_dy_s, &g_star_t_inv, &g_inv)?,
        )
        .term(
            "R_{a⁻¹∘D^y_S}[g∘(g*_T)⁻¹, Id]",
            r(&spec, &a_inv_dy_s, &g_gst_inv, &id_y)?,
        )
        .term(
            "R_{D_S}[g∘(g*_T)⁻¹∘a⁻¹∘y_S, a⁻¹∘y_S]",
            r(&spec, d_s, &source_reconstruction, &adapted_labels)?,
        )
        .term(
            "R_{D_S}[g∘(g*_T)⁻¹∘a⁻¹∘y_S, h]",
            r(&spec, d_s, &source_reconstruction, &h)?,
        )
        .term("R_{D_S}[h, a⁻¹∘y_S]", r(&spec, d_s, &h, &adapted_labels)?)
        .term("R_{D_S}[(g*_T)⁻¹∘a⁻¹∘y_S, f]", r(&spec, d_s, &source_features, f)?)
        .term("R_{D_S}[a⁻¹∘y_S, h*_T]", r(&spec, d_s, &adapted_labels, &h_star_t)?)
        .term("R_{D_S}[y_S, a∘h*_T]", r(&spec, d_s, y_s, &a_h_star_t)?)
        .term("R_{D_S}[a∘h, y_S]", r(&spec, d_s, &a_h, y_s)?)
        .term("R_{D_S}[h*_S, y_S]", r(&spec, d_s, &h_star_s, y_s)?)
        .term("R_{D_S}[a∘h*_T, h*_S]", r(&spec, d_s, &a_h_star_t, &h_star_s)?)
        .term("R_{D_T}[f, (g*_T)⁻¹∘y_T]", r(&spec, d_t, f, &target_features)?)
        .term("R_{D_T}[h*_T, y_T]", r(&spec, d_t, &h_star_t, y_t)?);

    let lg = "lipschitz(H3⁻¹)·lipschitz(H4)";
    let lgi = "lipschitz(H4⁻¹)·lipschitz(H3)";
    let l3i = "lipschitz(H3⁻¹)";
    c.le(
        "target_split",
        "R_{D_T}[h, y_T]",
        &["R_{D_T}[g∘(g*_T)⁻¹∘y_T, y_T]", "R_{D_T}[h, g∘(g*_T)⁻¹∘y_T]"],
        k,
        "factor_triangle",
    )
    .eq(
        "reconstruction_on_outputs",
        "R_{D_T}[g∘(g*_T)⁻¹∘y_T, y_T]",
        "R_{D^y_T}[g∘(g*_T)⁻¹, Id]",
        "pushforward",
    )
    .le(
        "strip_g",
        "R_{D^y_T}[g∘(g*_T)⁻¹, Id]",
        &["R_{D^y_T}[(g*_T)⁻¹, g⁻¹]"],
        l_g,
        lg,
    )
    .eq(
        "adapted_outputs",
        "R_{D^y_T}[(g*_T)⁻¹, g⁻¹]",
        "R_{a∘D^y_T}[(b*_T)⁻¹, b⁻¹]",
        "pushforward",
    )
    .le(
        "domain_change",
        "R_{a∘D^y_T}[(b*_T)⁻¹, b⁻¹]",
        &["R_{D^y_S}[(b*_T)⁻¹, b⁻¹]", "disc_{H4⁻¹}(a∘D^y_T, D^y_S)"],
        1.0,
        "discrepancy",
    )
    .eq(
        "source_outputs",
        "R_{D^y_S}[(b*_T)⁻¹, b⁻¹]",
        "R_{a⁻¹∘D^y_S}[(g*_T)⁻¹, g⁻¹]",
        "pushforward",
    )
    .le(
        "apply_g",
        "R_{a⁻¹∘D^y_S}[(g*_T)⁻¹, g⁻¹]",
        &["R_{a⁻¹∘D^y_S}[g∘(g*_T)⁻¹, Id]"],
        l_g_inv,
        lgi,
    )
    .eq(
        "source_inputs",
        "R_{a⁻¹∘D^y_S}[g∘(g*_T)⁻¹, Id]",
        "R_{D_S}[g∘(g*_T)⁻¹∘a⁻¹∘y_S, a⁻¹∘y_S]",
        "pushforward",
    )
    .le(
        "split_via_h",
        "R_{D_S}[g∘(g*_T)⁻¹∘a⁻¹∘y_S, a⁻¹∘y_S]",
        &["R_{D_S}[g∘(g*_T)⁻¹∘a⁻¹∘y_S, h]", "R_{D_S}[h, a⁻¹∘y_S]"],
        k,
        "factor_triangle",
    )
    .le(
        "strip_g_on_source",
        "R_{D_S}[g∘(g*_T)⁻¹∘a⁻¹∘y_S, h]",
        &["R_{D_S}[(g*_T)⁻¹∘a⁻¹∘y_S, f]"],
        l_g,
        lg,
    )
    .le(
        "strip_g_star_t_inverse",
        "R_{D_S}[(g*_T)⁻¹∘a⁻¹∘y_S, f]",
        &["R_{D_S}[a⁻¹∘y_S, h*_T]"],
        l_g_inv,
        lgi,
    )
    .le(
        "strip_a_inverse",
        "R_{D_S}[a⁻¹∘y_S, h*_T]",
        &["R_{D_S}[y_S, a∘h*_T]"],
        l_h3_inv,
        l3i,
    )
    .le(
        "strip_a_inverse_on_h",
        "R_{D_S}[h, a⁻¹∘y_S]",
        &["R_{D_S}[a∘h, y_S]"],
        l_h3_inv,
        l3i,
    )
    .le(
        "split_via_h_star_s",
        "R_{D_S}[y_S, a∘h*_T]",
        &["R_{D_S}[h*_S, y_S]", "R_{D_S}[a∘h*_T, h*_S]"],
        k,
        "factor_triangle",
    )
    .le(
        "strip_g_on_target",
        "R_{D_T}[h, g∘(g*_T)⁻¹∘y_T]",
        &["R_{D_T}[f, (g*_T)⁻¹∘y_T]"],
        l_g,
        lg,
    )
    .le(
        "strip_g_star_t_inverse_on_target",
        "R_{D_T}[f, (g*_T)⁻¹∘y_T]",
        &["R_{D_T}[h*_T, y_T]"],
        l_g_inv,
        lgi,
    );

    let terms: [&str; 5] = [
        "R_{D_S}[a∘h, y_S]",
        "R_{D_S}[a∘h*_T, h*_S]",
        "R_{D_S}[h*_S, y_S]",
        "R_{D_T}[h*_T, y_T]",
        "disc_{H4⁻¹}(a∘D^y_T, D^y_S)",
    ];
    let groups: Vec<(&str, &[&str])> = terms.iter().map(|t| (*t, std::slice::from_ref(t))).collect();
    c.finish(s.kind().name(), Theorem::Analogy.id(), "R_{D_T}[h, y_T]", &groups)
}

/// Shared evaluation of the domain-transfer chain; `with_reduction` adds the
/// step that absorbs the h-constancy term into the f-constancy term.
fn transfer_chain(s: &DASetting, g: usize, with_reduction: bool) -> Result<BoundReport> {
    s.require_kind(&[SettingKind::DomainTransfer])?;
    let spec = *s.loss();
    let k = spec.triangle_constant;
    let (d1, y, f) = (s.distribution("D_1")?, s.target("y")?, s.target("f")?);
    let h2 = s.class("H2")?;
    let h_class = h2.after(f)?;
    let h = h_class.member(g)?.clone();
    let dy_2 = s.output_distribution("y", "D_2")?;
    let id = Hypothesis::identity(spec.dimension);

    let (star, _) = argmin(h_class.len(), |i| {
        let m = &h_class.members()[i];
        Ok(r(&spec, &dy_2, m, &id)? + r(&spec, d1, m, y)?)
    })?;
    let h_star = h_class.members()[star].clone();
    let l_star = match h2.lipschitz_l() {
        Some(l) => l,
        None => h2.members()[star]
            .lipschitz_bound(spec.kind)
            .ok_or_else(|| Error::MissingLipschitz("g*".into()))?,
    };
    let h_d1 = d1.pushforward(&h)?;
    let disc = discrepancy(&h_class, &dy_2, &h_d1, &spec)?.value;

    let hh = h.then(&h)?;
    let hs_h = h.then(&h_star)?;
    let f_h = h.then(f)?;

    let mut c = Chain::new();
    c.term("R_{D_1}[h, y]", r(&spec, d1, &h, y)?)
        .term("R_{D_1}[h∘h, h]", r(&spec, d1, &hh, &h)?)
        .term("R_{D_1}[h∘h, y]", r(&spec, d1, &hh, y)?)
        .term("R_{D_1}[h∘h, h*∘h]", r(&spec, d1, &hh, &hs_h)?)
        .term("R_{h∘D_1}[h, h*]", r(&spec, &h_d1, &h, &h_star)?)
        .term("R_{D^y_2}[h, h*]", r(&spec, &dy_2, &h, &h_star)?)
        .term("disc_H(D^y_2, h∘D_1)", disc)
        .term("R_{D_1}[h*∘h, y]", r(&spec, d1, &hs_h, y)?)
        .term("R_{D_1}[h*∘h, h*]", r(&spec, d1, &hs_h, &h_star)?)
        .term("R_{D_1}[f∘h, f]", r(&spec, d1, &f_h, f)?)
        .term("R_{D_1}[h*, y]", r(&spec, d1, &h_star, y)?)
        .term("R_{D^y_2}[h, Id]", r(&spec, &dy_2, &h, &id)?)
        .term("R_{D^y_2}[h*, Id]", r(&spec, &dy_2, &h_star, &id)?);
    if with_reduction {
        let l2 = declared_l(h2, "H2")?;
        c.le(
            "h_constancy",
            "R_{D_1}[h∘h, h]",
            &["R_{D_1}[f∘h, f]"],
            l2,
            "lipschitz(H2)",
        );
    }
    c.le(
        "split_via_h_of_h",
        "R_{D_1}[h, y]",
        &["R_{D_1}[h∘h, h]", "R_{D_1}[h∘h, y]"],
        k,
        "factor_triangle",
    )
    .le(
        "split_via_h_star_of_h",
        "R_{D_1}[h∘h, y]",
        &["R_{D_1}[h∘h, h*∘h]", "R_{D_1}[h*∘h, y]"],
        k,
        "factor_triangle",
    )
    .eq(
        "generated_outputs",
        "R_{D_1}[h∘h, h*∘h]",
        "R_{h∘D_1}[h, h*]",
        "pushforward",
    )
    .le(
        "domain_change",
        "R_{h∘D_1}[h, h*]",
        &["R_{D^y_2}[h, h*]", "disc_H(D^y_2, h∘D_1)"],
        1.0,
        "discrepancy",
    )
    .le(
        "split_via_h_star",
        "R_{D_1}[h*∘h, y]",
        &["R_{D_1}[h*∘h, h*]", "R_{D_1}[h*, y]"],
        k,
        "factor_triangle",
    )
    .le(
        "strip_g_star",
        "R_{D_1}[h*∘h, h*]",
        &["R_{D_1}[f∘h, f]"],
        l_star,
        "lipschitz(g*)",
    )
    .le(
        "split_via_identity",
        "R_{D^y_2}[h, h*]",
        &["R_{D^y_2}[h, Id]", "R_{D^y_2}[h*, Id]"],
        k,
        "factor_triangle",
    );
    let lambda: (&str, &[&str]) = ("λ", &["R_{D^y_2}[h*, Id]", "R_{D_1}[h*, y]"]);
    if with_reduction {
        c.finish(
            s.kind().name(),
            Theorem::Dtn.id(),
            "R_{D_1}[h, y]",
            &[
                ("R_{D^y_2}[h, Id]", &["R_{D^y_2}[h, Id]"]),
                ("R_{D_1}[f∘h, f]", &["R_{D_1}[f∘h, f]"]),
                ("disc_H(D^y_2, h∘D_1)", &["disc_H(D^y_2, h∘D_1)"]),
                lambda,
            ],
        )
    } else {
        c.finish(
            s.kind().name(),
            Theorem::Dt.id(),
            "R_{D_1}[h, y]",
            &[
                ("R_{D^y_2}[h, Id]", &["R_{D^y_2}[h, Id]"]),
                ("R_{D_1}[h∘h, h]", &["R_{D_1}[h∘h, h]"]),
                ("R_{D_1}[f∘h, f]", &["R_{D_1}[f∘h, f]"]),
                ("disc_H(D^y_2, h∘D_1)", &["disc_H(D^y_2, h∘D_1)"]),
                lambda,
            ],
        )
    }
}

/// The domain-transfer bound for `h = g∘f` with the fixed feature map `f`.
pub fn compute_bound_dt(s: &DASetting, g: usize) -> Result<BoundReport> {
    transfer_chain(s, g, false)
}

/// The domain-transfer bound with the h-constancy term absorbed through
/// the Lipschitz constant of `H2`.
pub fn compute_bound_dtn(s: &DASetting, g: usize) -> Result<BoundReport> {
    transfer_chain(s, g, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;

    fn p(v: f64) -> Point {
        Point::scalar(v).unwrap()
    }

    fn lin(s: f64) -> Hypothesis {
        Hypothesis::scalar_affine(s, 0.0).unwrap()
    }

    fn class(members: Vec<Hypothesis>, l: f64) -> HypothesisClass {
        HypothesisClass::new(members).unwrap().with_lipschitz(l).unwrap()
    }

    fn setting(
        kind: SettingKind,
        d_s: FiniteDistribution,
        d_t: FiniteDistribution,
        y_s: Hypothesis,
        y_t: Hypothesis,
        classes: Vec<(&str, HypothesisClass)>,
        spec: LossSpec,
    ) -> DASetting {
        DASetting::new(
            kind,
            IndexMap::from([("D_S".to_string(), d_s), ("D_T".to_string(), d_t)]),
            IndexMap::from([("y_S".to_string(), y_s), ("y_T".to_string(), y_t)]),
            classes.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            spec,
        )
        .unwrap()
    }

    fn tiny_oda(y_t: Hypothesis) -> DASetting {
        let d = FiniteDistribution::uniform(vec![p(0.0), p(1.0)]).unwrap();
        setting(
            SettingKind::OutputDa,
            d.clone(),
            d,
            y_t.clone(),
            y_t,
            vec![
                ("H1", class(vec![Hypothesis::identity(1)], 1.0)),
                ("H2", class(vec![lin(1.0), lin(2.0)], 2.0)),
                ("H2_prime", class(vec![lin(1.0), lin(0.5)], 1.0)),
            ],
            LossSpec::absolute(1),
        )
    }

    #[test]
    fn best_in_class_examples() {
        let c = HypothesisClass::new(vec![lin(0.0), lin(1.0)]).unwrap();
        let d = FiniteDistribution::uniform(vec![p(0.0), p(1.0)]).unwrap();
        let id = Hypothesis::identity(1);
        let m = best_in_class(&c, &id, &d, &id, &LossSpec::absolute(1)).unwrap();
        assert_eq!((m.index, m.value), (1, 0.0));
        let single = HypothesisClass::new(vec![lin(5.0)]).unwrap();
        let m = best_in_class(&single, &id, &d, &id, &LossSpec::absolute(1)).unwrap();
        assert_eq!((m.index, m.value), (0, 2.0));
    }

    #[test]
    fn best_ghat_t_examples() {
        // g*_T = 2x; identity round trip costs 0.5 on each of the two
        // distributions, the halving map costs 0.
        let s = tiny_oda(lin(2.0));
        let h2p = s.class("H2_prime").unwrap();
        let m = best_ghat_t(h2p, &lin(2.0), &lin(0.5), &Hypothesis::identity(1), &s).unwrap();
        assert_eq!((m.index, m.value), (1, 0.0));
        let m = best_ghat_t(h2p, &lin(1.0), &lin(1.0), &Hypothesis::identity(1), &s).unwrap();
        assert_eq!((m.index, m.value), (0, 0.0));
        let single = class(vec![lin(1.0)], 1.0);
        assert_eq!(
            best_ghat_t(&single, &lin(2.0), &lin(0.5), &Hypothesis::identity(1), &s)
                .unwrap()
                .index,
            0
        );
    }

    #[test]
    fn oda_self_consistent_case_is_tight() {
        let s = tiny_oda(lin(2.0));
        let r = compute_bound_oda(&s, 0, 1, 1).unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, 0.0);
        assert!(r.terms.values().all(|&v| v == 0.0));
        assert_eq!(r.steps.len(), 16);
        assert_eq!(r.terms.len(), 7);
    }

    #[test]
    fn oda_with_wrong_hypothesis_still_bounded() {
        let s = tiny_oda(lin(2.0));
        for g in 0..2 {
            for ghat in 0..2 {
                let r = compute_bound_oda(&s, 0, g, ghat).unwrap();
                assert!(r.pass, "{r:?}");
            }
        }
        assert!(compute_bound_oda(&s, 0, 0, 0).unwrap().lhs > 0.0);
    }

    #[test]
    fn mansour_no_shift_realizable() {
        let d = FiniteDistribution::uniform(vec![p(0.0), p(1.0), p(2.0)]).unwrap();
        let s = setting(
            SettingKind::StandardDa,
            d.clone(),
            d,
            lin(2.0),
            lin(2.0),
            vec![
                ("H1", class(vec![Hypothesis::identity(1)], 1.0)),
                ("H2", class(vec![lin(1.0), lin(2.0)], 2.0)),
            ],
            LossSpec::absolute(1),
        );
        let r = compute_bound_mansour(&s, 0, 1).unwrap();
        assert!(r.pass);
        assert_eq!((r.lhs, r.rhs, r.constant), (0.0, 0.0, 1.0));
        assert_eq!(r.statement.as_deref(), Some("exact"));
        assert!(compute_bound_mansour(&s, 0, 0).unwrap().pass);
    }

    #[test]
    fn collapsing_feature_map_has_zero_discrepancy() {
        let s = setting(
            SettingKind::StandardDa,
            FiniteDistribution::point_mass(p(0.0)),
            FiniteDistribution::point_mass(p(5.0)),
            lin(1.0),
            lin(1.0),
            vec![
                ("H1", class(vec![lin(0.0)], 1.0)),
                ("H2", class(vec![lin(1.0), lin(-1.0)], 1.0)),
            ],
            LossSpec::squared(1),
        );
        let r = compute_bound_mansour(&s, 0, 0).unwrap();
        assert_eq!(r.terms["disc_{H2}(f∘D_S, f∘D_T)"], 0.0);
        assert_eq!(r.constant, 9.0);
        assert_eq!(r.statement.as_deref(), Some("k_weighted"));
        assert!(r.pass);
    }

    #[test]
    fn wrong_kind_and_unknown_theorem() {
        let s = tiny_oda(lin(2.0));
        assert!(matches!(compute_bound_mansour(&s, 0, 0), Err(Error::WrongKind { .. })));
        let c = candidate([("f", 0), ("g", 0), ("ghat", 0)]);
        assert!(matches!(
            verify_proof_script("thm9", &s, &c),
            Err(Error::UnknownTheorem(_))
        ));
        assert_eq!(verify_proof_script("oda", &s, &c).unwrap().len(), 16);
    }

    #[test]
    fn report_json_round_trip() {
        let r = compute_bound_oda(&tiny_oda(lin(2.0)), 0, 0, 0).unwrap();
        let text = crate::json::to_string(&r).unwrap();
        let back: BoundReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
