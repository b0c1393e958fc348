use std::collections::HashSet;

use indexmap::IndexMap;

use super::rng::ScenarioRng;
use super::{declared_lipschitz, Scenario, ScenarioConfig};
use crate::bounds::{DASetting, SettingKind};
use crate::class::HypothesisClass;
use crate::distribution::FiniteDistribution;
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, PreluLayer};
use crate::loss::{LossKind, LossSpec};
use crate::point::Point;

const PRELU_ALPHAS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
const WEIGHT_NORM: (f64, f64) = (0.25, 2.0);
const PIVOTS: [f64; 4] = [-1.0, -0.5, 0.5, 1.0];
const NOISE: [f64; 3] = [-0.25, 0.0, 0.25];

/// Builds the scenario described by `cfg`, dispatching on its kind.
pub fn generate(cfg: &ScenarioConfig) -> Result<Scenario> {
    cfg.validate()?;
    match cfg.kind {
        SettingKind::StandardDa => gen_standard_da(cfg),
        SettingKind::BinaryDa => gen_binary_da(cfg),
        SettingKind::OutputDa => gen_output_da(cfg),
        SettingKind::AnalogyOda => gen_analogy(cfg),
        SettingKind::TwoSided => gen_two_sided(cfg),
        SettingKind::DomainTransfer => gen_domain_transfer(cfg),
    }
}

fn expect_kind(cfg: &ScenarioConfig, kind: SettingKind) -> Result<()> {
    cfg.validate()?;
    if cfg.kind != kind {
        return Err(Error::InvalidConfig(format!(
            "config is for {}, generator builds {}",
            cfg.kind.name(),
            kind.name()
        )));
    }
    Ok(())
}

/// `n` distinct points of a dyadic lattice in `[-2, 2]^dim`. The lattice
/// step is the coarsest `2^-k` (`k ≥ 3`) with at least `2n` points.
fn grid_support(rng: &mut ScenarioRng, n: usize, dim: usize) -> Result<Vec<Point>> {
    let mut step = 0.125;
    while (4.0 / step + 1.0f64).powi(dim as i32) < 2.0 * n as f64 {
        step /= 2.0;
    }
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Point::new((0..dim).map(|_| rng.lattice(-2.0, 2.0, step)).collect())?;
        if seen.insert(p.key()) {
            out.push(p);
        }
    }
    Ok(out)
}

fn shifted(points: &[Point], shift: f64) -> Result<Vec<Point>> {
    points
        .iter()
        .map(|p| {
            let mut c = p.coords().to_vec();
            c[0] += shift;
            Point::new(c)
        })
        .collect()
}

/// Source grid plus its copy translated by `shift` along the first axis.
fn shifted_pair(rng: &mut ScenarioRng, cfg: &ScenarioConfig) -> Result<(FiniteDistribution, FiniteDistribution)> {
    let support = grid_support(rng, cfg.support_size, cfg.input_dim)?;
    let target = shifted(&support, cfg.shift_magnitude)?;
    Ok((
        FiniteDistribution::uniform(support)?,
        FiniteDistribution::uniform(target)?,
    ))
}

fn frobenius(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Weight matrix on the 1/2 lattice in `[-1, 1]` whose Frobenius norm lies
/// in [`WEIGHT_NORM`]; rows listed in `zero_rows` are left at zero.
fn prelu_weights(rng: &mut ScenarioRng, input: usize, output: usize, zero_rows: &[usize]) -> Vec<Vec<f64>> {
    loop {
        let w: Vec<Vec<f64>> = (0..output)
            .map(|r| {
                (0..input)
                    .map(|_| {
                        if zero_rows.contains(&r) {
                            0.0
                        } else {
                            rng.lattice(-1.0, 1.0, 0.5)
                        }
                    })
                    .collect()
            })
            .collect();
        let n = frobenius(&w);
        if n >= WEIGHT_NORM.0 && n <= WEIGHT_NORM.1 {
            return w;
        }
    }
}

fn prelu_member(rng: &mut ScenarioRng, input: usize, output: usize) -> Result<Hypothesis> {
    let weights = prelu_weights(rng, input, output, &[]);
    let bias = (0..output).map(|_| rng.lattice(-0.5, 0.5, 0.5)).collect();
    let alpha = *rng.pick(&PRELU_ALPHAS);
    Hypothesis::prelu_net(vec![PreluLayer { weights, bias, alpha }])
}

/// A PReLU layer whose image lies on coordinate axis `axis`.
fn axis_prelu(rng: &mut ScenarioRng, input: usize, output: usize, axis: usize) -> Result<Hypothesis> {
    let zero: Vec<usize> = (0..output).filter(|&r| r != axis).collect();
    let weights = prelu_weights(rng, input, output, &zero);
    let bias = (0..output)
        .map(|r| if r == axis { rng.lattice(-0.5, 0.5, 0.5) } else { 0.0 })
        .collect();
    let alpha = *rng.pick(&PRELU_ALPHAS);
    Hypothesis::prelu_net(vec![PreluLayer { weights, bias, alpha }])
}

/// Affine row with pivot `pivot` carrying a weight from [`PIVOTS`]; the
/// other weights and the offset lie on the 1/4 lattice in `[-1, 1]`.
fn affine_row(rng: &mut ScenarioRng, input: usize, pivot: usize) -> (Vec<f64>, f64) {
    let row = (0..input)
        .map(|j| {
            if j == pivot {
                *rng.pick(&PIVOTS)
            } else {
                rng.lattice(-1.0, 1.0, 0.25)
            }
        })
        .collect();
    (row, rng.lattice(-1.0, 1.0, 0.25))
}

fn affine_member(rng: &mut ScenarioRng, input: usize, output: usize) -> Result<Hypothesis> {
    let (mut matrix, mut offset) = (Vec::with_capacity(output), Vec::with_capacity(output));
    for _ in 0..output {
        let pivot = rng.below(input);
        let (row, c) = affine_row(rng, input, pivot);
        matrix.push(row);
        offset.push(c);
    }
    Hypothesis::affine(matrix, offset)
}

/// `u ↦ s ⊙ u + c` with power-of-two scales, together with its exact inverse.
fn diagonal_pair(rng: &mut ScenarioRng, dim: usize) -> Result<(Hypothesis, Hypothesis)> {
    let scale: Vec<f64> = (0..dim).map(|_| rng.dyadic_scale()).collect();
    let offset: Vec<f64> = (0..dim).map(|_| rng.lattice(-1.0, 1.0, 0.25)).collect();
    diagonal_from(&scale, &offset)
}

fn diagonal_from(scale: &[f64], offset: &[f64]) -> Result<(Hypothesis, Hypothesis)> {
    let dim = scale.len();
    let diag = |v: &dyn Fn(usize) -> f64| -> Vec<Vec<f64>> {
        (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { v(i) } else { 0.0 }).collect())
            .collect()
    };
    let forward = Hypothesis::affine(diag(&|i| scale[i]), offset.to_vec())?;
    let inverse = Hypothesis::affine(
        diag(&|i| 1.0 / scale[i]),
        (0..dim).map(|i| -offset[i] / scale[i]).collect(),
    )?;
    Ok((forward, inverse))
}

fn members(
    rng: &mut ScenarioRng,
    n: usize,
    mut make: impl FnMut(&mut ScenarioRng) -> Result<Hypothesis>,
) -> Result<Vec<Hypothesis>> {
    (0..n).map(|_| make(rng)).collect()
}

/// Class carrying the declared constant of its members when they have one.
fn declared_class(members: Vec<Hypothesis>, kind: LossKind) -> Result<HypothesisClass> {
    let l = declared_lipschitz(&members, kind);
    let class = HypothesisClass::new(members)?;
    match l {
        Some(l) => class.with_lipschitz(l),
        None => Ok(class),
    }
}

/// Inverse-carrying class: both directions get declared constants.
fn invertible_class(pairs: Vec<(Hypothesis, Hypothesis)>, kind: LossKind) -> Result<HypothesisClass> {
    let (fwd, inv): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let inv = declared_class(inv, kind)?;
    declared_class(fwd, kind)?.with_inverse(inv)
}

fn union_support(dists: &[&FiniteDistribution]) -> Vec<Point> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for d in dists {
        for p in d.support() {
            if seen.insert(p.key()) {
                out.push(p.clone());
            }
        }
    }
    out
}

/// Table equal to `base` plus lattice noise in every output coordinate.
fn noisy_table(rng: &mut ScenarioRng, base: &Hypothesis, domain: &[Point]) -> Result<Hypothesis> {
    let entries = domain
        .iter()
        .map(|x| {
            let y = base.evaluate(x)?;
            let noisy = y.coords().iter().map(|v| v + rng.pick(&NOISE)).collect();
            Ok((x.clone(), Point::new(noisy)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Hypothesis::table(entries)
}

fn named<T>(items: impl IntoIterator<Item = (&'static str, T)>) -> IndexMap<String, T> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn loss(cfg: &ScenarioConfig, dim: usize) -> Result<LossSpec> {
    LossSpec::new(cfg.loss_kind, dim)
}

pub fn gen_standard_da(cfg: &ScenarioConfig) -> Result<Scenario> {
    expect_kind(cfg, SettingKind::StandardDa)?;
    let mut rng = ScenarioRng::new(cfg.seed);
    let (x, f, y) = (cfg.input_dim, cfg.feature_dim, cfg.output_dim);
    let (d_s, d_t) = shifted_pair(&mut rng, cfg)?;
    let h1 = members(&mut rng, cfg.class_size("H1")?, |r| prelu_member(r, x, f))?;
    let h2 = members(&mut rng, cfg.class_size("H2")?, |r| affine_member(r, f, y))?;
    let (tf, tg) = (rng.below(h1.len()), rng.below(h2.len()));
    let clean = h1[tf].then(&h2[tg])?;
    let target = if cfg.realizable {
        clean
    } else {
        noisy_table(&mut rng, &clean, &union_support(&[&d_s, &d_t]))?
    };
    let setting = DASetting::new(
        cfg.kind,
        named([("D_S", d_s), ("D_T", d_t)]),
        named([("y_S", target.clone()), ("y_T", target)]),
        named([
            ("H1", declared_class(h1, cfg.loss_kind)?),
            ("H2", declared_class(h2, cfg.loss_kind)?),
        ]),
        loss(cfg, y)?,
    )?;
    Ok(Scenario {
        config: cfg.clone(),
        setting,
        truth: named([("f", tf), ("g", tg)]),
    })
}

/// Binary labels: the second-stage class consists of linear threshold rules
/// `u ↦ [w·u + b ≥ 0]`, tabulated on every feature point reachable from the
/// two supports through `H1`.
pub fn gen_binary_da(cfg: &ScenarioConfig) -> Result<Scenario> {
    expect_kind(cfg, SettingKind::BinaryDa)?;
    let mut rng = ScenarioRng::new(cfg.seed);
    let (x, f) = (cfg.input_dim, cfg.feature_dim);
    let (d_s, d_t) = shifted_pair(&mut rng, cfg)?;
    let h1 = members(&mut rng, cfg.class_size("H1")?, |r| prelu_member(r, x, f))?;
    let inputs = union_support(&[&d_s, &d_t]);
    let mut seen = HashSet::new();
    let mut features = Vec::new();
    for m in &h1 {
        for p in &inputs {
            let u = m.evaluate(p)?;
            if seen.insert(u.key()) {
                features.push(u);
            }
        }
    }
    let h2 = members(&mut rng, cfg.class_size("H2")?, |r| {
        let pivot = r.below(f);
        let (w, b) = affine_row(r, f, pivot);
        let entries = features
            .iter()
            .map(|u| {
                let s: f64 = w.iter().zip(u.coords()).map(|(a, v)| a * v).sum::<f64>() + b;
                Ok((u.clone(), Point::scalar(if s >= 0.0 { 1.0 } else { 0.0 })?))
            })
            .collect::<Result<Vec<_>>>()?;
        Hypothesis::table(entries)
    })?;
    let (tf, tg) = (rng.below(h1.len()), rng.below(h2.len()));
    let clean = h1[tf].then(&h2[tg])?;
    let entries = inputs
        .iter()
        .map(|p| {
            let mut v = clean.evaluate(p)?.coords()[0];
            if !cfg.realizable && rng.chance(1, 8) {
                v = 1.0 - v;
            }
            Ok((p.clone(), Point::scalar(v)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let target = Hypothesis::table(entries)?;
    let setting = DASetting::new(
        cfg.kind,
        named([("D_S", d_s), ("D_T", d_t)]),
        named([("y_S", target.clone()), ("y_T", target)]),
        named([
            ("H1", declared_class(h1, cfg.loss_kind)?),
            ("H2", declared_class(h2, cfg.loss_kind)?),
        ]),
        LossSpec::zero_one(),
    )?;
    Ok(Scenario {
        config: cfg.clone(),
        setting,
        truth: named([("f", tf), ("g", tg)]),
    })
}

/// Output-side adaptation. Every `H2` member is affine with a pivot
/// coordinate `k` and weight `w_k`, and `H2_prime[i]` is its exact right
/// inverse `t ↦ e_k (t − c) / w_k`. The true feature map has its image on
/// the true pivot axis, so `ĝ∘g` is exact on it. In non-realizable mode the
/// target labels are the source labels clamped into the middle half of
/// their range.
pub fn gen_output_da(cfg: &ScenarioConfig) -> Result<Scenario> {
    expect_kind(cfg, SettingKind::OutputDa)?;
    let mut rng = ScenarioRng::new(cfg.seed);
    let (x, f) = (cfg.input_dim, cfg.feature_dim);
    let (d_s, d_t) = shifted_pair(&mut rng, cfg)?;
    let axis = rng.below(f);
    let mut h1 = members(&mut rng, cfg.class_size("H1")?, |r| prelu_member(r, x, f))?;
    let tf = rng.below(h1.len());
    h1[tf] = axis_prelu(&mut rng, x, f, axis)?;

    let n2 = cfg.class_size("H2")?;
    let tg = rng.below(n2);
    let mut h2 = Vec::with_capacity(n2);
    let mut h2p = Vec::with_capacity(n2);
    for i in 0..n2 {
        let pivot = if i == tg { axis } else { rng.below(f) };
        let (row, c) = affine_row(&mut rng, f, pivot);
        let w = row[pivot];
        let column = (0..f).map(|j| vec![if j == pivot { 1.0 / w } else { 0.0 }]).collect();
        let shift = (0..f).map(|j| if j == pivot { -c / w } else { 0.0 }).collect();
        h2.push(Hypothesis::affine(vec![row], vec![c])?);
        h2p.push(Hypothesis::affine(column, shift)?);
    }
    let extra = cfg.class_size("H2_prime")? - n2;
    h2p.extend(members(&mut rng, extra, |r| affine_member(r, 1, f))?);

    let y_s = h1[tf].then(&h2[tg])?;
    let y_t = if cfg.realizable {
        y_s.clone()
    } else {
        let domain = union_support(&[&d_s, &d_t]);
        let values = domain
            .iter()
            .map(|p| Ok(y_s.evaluate(p)?.coords()[0]))
            .collect::<Result<Vec<_>>>()?;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let band = (lo + (hi - lo) / 4.0, hi - (hi - lo) / 4.0);
        let entries = domain
            .into_iter()
            .zip(values)
            .map(|(p, v)| Ok((p, Point::scalar(v.clamp(band.0, band.1))?)))
            .collect::<Result<Vec<_>>>()?;
        Hypothesis::table(entries)?
    };
    let setting = DASetting::new(
        cfg.kind,
        named([("D_S", d_s), ("D_T", d_t)]),
        named([("y_S", y_s), ("y_T", y_t)]),
        named([
            ("H1", declared_class(h1, cfg.loss_kind)?),
            ("H2", declared_class(h2, cfg.loss_kind)?),
            ("H2_prime", declared_class(h2p, cfg.loss_kind)?),
        ]),
        loss(cfg, 1)?,
    )?;
    Ok(Scenario {
        config: cfg.clone(),
        setting,
        truth: named([("f", tf), ("g", tg), ("ghat", tg)]),
    })
}

/// Analogy-based adaptation: `y_S = b∘f` and `y_T = a⁻¹∘b∘f`, where the
/// true adapter `a` translates by more than the spread of `y_S`, so the two
/// label sets never meet.
pub fn gen_analogy(cfg: &ScenarioConfig) -> Result<Scenario> {
    expect_kind(cfg, SettingKind::AnalogyOda)?;
    let mut rng = ScenarioRng::new(cfg.seed);
    let (x, f) = (cfg.input_dim, cfg.feature_dim);
    let (d_s, d_t) = shifted_pair(&mut rng, cfg)?;
    let h1 = members(&mut rng, cfg.class_size("H1")?, |r| prelu_member(r, x, f))?;
    let mut h3 = (0..cfg.class_size("H3")?)
        .map(|_| diagonal_pair(&mut rng, f))
        .collect::<Result<Vec<_>>>()?;
    let h4 = (0..cfg.class_size("H4")?)
        .map(|_| diagonal_pair(&mut rng, f))
        .collect::<Result<Vec<_>>>()?;
    let (tf, tb, ta) = (rng.below(h1.len()), rng.below(h4.len()), rng.below(h3.len()));
    let y_s = h1[tf].then(&h4[tb].0)?;

    let mut spread: f64 = 0.0;
    let outputs = union_support(&[&d_s, &d_t])
        .iter()
        .map(|p| y_s.evaluate(p))
        .collect::<Result<Vec<_>>>()?;
    for j in 0..f {
        let lo = outputs.iter().map(|o| o.coords()[j]).fold(f64::INFINITY, f64::min);
        let hi = outputs.iter().map(|o| o.coords()[j]).fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
    }
    let delta = spread.ceil() + 1.0;
    h3[ta] = diagonal_from(&vec![1.0; f], &vec![-delta; f])?;

    let clean = Hypothesis::compose([h1[tf].clone(), h4[tb].0.clone(), h3[ta].1.clone()])?;
    let y_t = if cfg.realizable {
        clean
    } else {
        noisy_table(&mut rng, &clean, d_t.support())?
    };
    let setting = DASetting::new(
        cfg.kind,
        named([("D_S", d_s), ("D_T", d_t)]),
        named([("y_S", y_s), ("y_T", y_t)]),
        named([
            ("H1", declared_class(h1, cfg.loss_kind)?),
            ("H3", invertible_class(h3, cfg.loss_kind)?),
            ("H4", invertible_class(h4, cfg.loss_kind)?),
        ]),
        loss(cfg, f)?,
    )?;
    Ok(Scenario {
        config: cfg.clone(),
        setting,
        truth: named([("f", tf), ("a", ta), ("b", tb)]),
    })
}

/// Two unpaired domains with independently drawn labelling functions,
/// adapter class `H3` (power-of-two diagonal maps on the label space) and
/// discriminator class `C` (one PReLU unit on the adapted labels).
pub fn gen_two_sided(cfg: &ScenarioConfig) -> Result<Scenario> {
    expect_kind(cfg, SettingKind::TwoSided)?;
    let mut rng = ScenarioRng::new(cfg.seed);
    let (x, f, y) = (cfg.input_dim, cfg.feature_dim, cfg.output_dim);
    let (d_1, d_2) = shifted_pair(&mut rng, cfg)?;
    let h1 = members(&mut rng, cfg.class_size("H1")?, |r| prelu_member(r, x, f))?;
    let h2 = members(&mut rng, cfg.class_size("H2")?, |r| affine_member(r, f, y))?;
    let h3 = members(&mut rng, cfg.class_size("H3")?, |r| Ok(diagonal_pair(r, y)?.0))?;
    let c = members(&mut rng, cfg.class_size("C")?, |r| prelu_member(r, y, 1))?;
    let mut truth = IndexMap::new();
    let mut targets = IndexMap::new();
    for (side, dist) in [("1", &d_1), ("2", &d_2)] {
        let (tf, tg) = (rng.below(h1.len()), rng.below(h2.len()));
        let clean = h1[tf].then(&h2[tg])?;
        let target = if cfg.realizable {
            clean
        } else {
            noisy_table(&mut rng, &clean, dist.support())?
        };
        targets.insert(format!("y_{side}"), target);
        truth.insert(format!("f{side}"), tf);
        truth.insert(format!("g{side}"), tg);
    }
    let setting = DASetting::new(
        cfg.kind,
        named([("D_1", d_1), ("D_2", d_2)]),
        targets,
        named([
            ("H1", declared_class(h1, cfg.loss_kind)?),
            ("H2", declared_class(h2, cfg.loss_kind)?),
            ("H3", declared_class(h3, cfg.loss_kind)?),
            ("C", declared_class(c, cfg.loss_kind)?),
        ]),
        loss(cfg, y)?,
    )?;
    Ok(Scenario {
        config: cfg.clone(),
        setting,
        truth,
    })
}

/// Distinct points of the 1/2 lattice in `[-2, 2]^dim`.
fn codebook(rng: &mut ScenarioRng, size: usize, dim: usize) -> Result<Vec<Point>> {
    let size = size.min(9usize.saturating_pow(dim as u32));
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let p = Point::new((0..dim).map(|_| rng.lattice(-2.0, 2.0, 0.5)).collect())?;
        if seen.insert(p.key()) {
            out.push(p);
        }
    }
    Ok(out)
}

const CODEBOOK_SIZE: usize = 8;

/// Domain transfer: `y` projects onto the nearest point of an 8-point
/// codebook, and `H1` holds nearest-codebook maps, one of which is `y`.
/// The frozen `f` is `y` itself in realizable mode and a different member
/// otherwise. `H2` consists of affine maps including the identity. In
/// realizable mode `D_2` splits each atom of `y∘D_1` between its codebook
/// point and a second point of the same cell.
pub fn gen_domain_transfer(cfg: &ScenarioConfig) -> Result<Scenario> {
    expect_kind(cfg, SettingKind::DomainTransfer)?;
    let mut rng = ScenarioRng::new(cfg.seed);
    let d = cfg.input_dim;
    let d_1 = FiniteDistribution::uniform(grid_support(&mut rng, cfg.support_size, d)?)?;
    let n1 = cfg.class_size("H1")?;
    let h1 = members(&mut rng, n1, |r| Hypothesis::quantizer(codebook(r, CODEBOOK_SIZE, d)?))?;
    let ty = rng.below(n1);
    let y = h1[ty].clone();
    let tf = if cfg.realizable || n1 == 1 {
        ty
    } else {
        (ty + 1 + rng.below(n1 - 1)) % n1
    };
    let f = h1[tf].clone();

    let mut h2 = members(&mut rng, cfg.class_size("H2")?, |r| affine_member(r, d, d))?;
    let tg = rng.below(h2.len());
    let eye = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    h2[tg] = Hypothesis::affine(eye, vec![0.0; d])?;

    let d_2 = if cfg.realizable {
        let image = d_1.pushforward(&y)?;
        let mut atoms = Vec::with_capacity(2 * image.len());
        for (c, m) in image.atoms() {
            match same_cell_neighbour(&y, c)? {
                Some(q) => atoms.extend([(c.clone(), m / 2.0), (q, m / 2.0)]),
                None => atoms.push((c.clone(), m)),
            }
        }
        FiniteDistribution::from_atoms(atoms)?
    } else {
        FiniteDistribution::uniform(grid_support(&mut rng, cfg.support_size, d)?)?
    };

    let setting = DASetting::new(
        cfg.kind,
        named([("D_1", d_1), ("D_2", d_2)]),
        named([("y", y), ("f", f)]),
        named([
            ("H1", declared_class(h1, cfg.loss_kind)?),
            ("H2", declared_class(h2, cfg.loss_kind)?),
        ]),
        loss(cfg, d)?,
    )?;
    Ok(Scenario {
        config: cfg.clone(),
        setting,
        truth: named([("y", ty), ("f", tf), ("g", tg)]),
    })
}

/// First of `c ± e_j/8` that `y` still maps to `c`.
fn same_cell_neighbour(y: &Hypothesis, c: &Point) -> Result<Option<Point>> {
    for j in 0..c.dim() {
        for delta in [0.125, -0.125] {
            let mut q = c.coords().to_vec();
            q[j] += delta;
            let q = Point::new(q)?;
            if y.evaluate(&q)? == *c {
                return Ok(Some(q));
            }
        }
    }
    Ok(None)
}
