//! Evaluable maps between real vector spaces.
//!
//! A [`Hypothesis`] is an immutable, cheaply clonable handle around a
//! validated [`Form`]. Every `h`, `f`, `g`, adapter and ground-truth target in
//! a setting is one of these.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::point::{Point, PointKey};

/// One PReLU layer: `x ↦ PReLU_α(W·x + bias)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreluLayer {
    pub weights: Vec<Vec<f64>>,
    #[serde(default)]
    pub bias: Vec<f64>,
    pub alpha: f64,
}

/// Finite input→output lookup.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "TableRepr")]
pub struct Table {
    input_dim: usize,
    output_dim: usize,
    entries: Vec<(Point, Point)>,
    #[serde(skip)]
    index: HashMap<PointKey, usize>,
}

#[derive(Deserialize)]
struct TableRepr {
    input_dim: usize,
    output_dim: usize,
    entries: Vec<(Point, Point)>,
}

impl TryFrom<TableRepr> for Table {
    type Error = Error;

    fn try_from(r: TableRepr) -> Result<Self> {
        let t = Table::new(r.entries)?;
        if t.input_dim != r.input_dim || t.output_dim != r.output_dim {
            return Err(Error::InvalidHypothesis("table dims disagree with entries".into()));
        }
        Ok(t)
    }
}

impl Table {
    pub fn new(entries: Vec<(Point, Point)>) -> Result<Self> {
        let (first_in, first_out) = entries
            .first()
            .ok_or_else(|| Error::InvalidHypothesis("empty table".into()))?;
        let (input_dim, output_dim) = (first_in.dim(), first_out.dim());
        let mut index = HashMap::with_capacity(entries.len());
        for (i, (x, y)) in entries.iter().enumerate() {
            if x.dim() != input_dim || y.dim() != output_dim {
                return Err(Error::InvalidHypothesis(format!("table entry {i} has wrong dims")));
            }
            if index.insert(x.key(), i).is_some() {
                return Err(Error::InvalidHypothesis(format!("duplicate table input {x:?}")));
            }
        }
        Ok(Table {
            input_dim,
            output_dim,
            entries,
            index,
        })
    }

    pub fn entries(&self) -> &[(Point, Point)] {
        &self.entries
    }

    pub fn get(&self, x: &[f64]) -> Option<&Point> {
        let key = Point::from_raw(x.to_vec()).key();
        self.index.get(&key).map(|&i| &self.entries[i].1)
    }
}

impl PartialEq for Table {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl fmt::Debug for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Table({} entries, {}→{})",
            self.entries.len(),
            self.input_dim,
            self.output_dim
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Form {
    Identity {
        dim: usize,
    },
    /// `x ↦ matrix·x + offset`; `matrix` is row-major with one row per output.
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    PreluNet {
        layers: Vec<PreluLayer>,
    },
    Table(Table),
    /// Applied left to right: `steps[0]` first.
    Composition {
        steps: Vec<Hypothesis>,
    },
    /// Projection onto the nearest codebook point (squared Euclidean,
    /// lowest index on ties).
    Quantizer {
        codebook: Vec<Point>,
    },
    /// Indicator `[left(x) ≠ right(x)]`.
    Disagreement {
        left: Hypothesis,
        right: Hypothesis,
    },
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Form", into = "Form")]
pub struct Hypothesis {
    form: Arc<Form>,
    input_dim: usize,
    output_dim: usize,
}

impl TryFrom<Form> for Hypothesis {
    type Error = Error;

    fn try_from(form: Form) -> Result<Self> {
        Hypothesis::from_form(form)
    }
}

impl From<Hypothesis> for Form {
    fn from(h: Hypothesis) -> Form {
        Arc::unwrap_or_clone(h.form)
    }
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.form.fmt(f)
    }
}

fn matrix_shape(m: &[Vec<f64>], what: &str) -> Result<(usize, usize)> {
    let rows = m.len();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidHypothesis(format!("{what}: empty matrix")));
    }
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidHypothesis(format!("{what}: ragged matrix")));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what.to_string()));
    }
    Ok((rows, cols))
}

fn mat_vec(m: &[Vec<f64>], x: &[f64], offset: &[f64]) -> Vec<f64> {
    m.iter()
        .zip(offset)
        .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
        .collect()
}

#[inline]
fn prelu(v: f64, alpha: f64) -> f64 {
    if v >= 0.0 {
        v
    } else {
        alpha * v
    }
}

fn to_dmatrix(m: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(m.len(), m[0].len(), |i, j| m[i][j])
}

fn from_dmatrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Operator norm matching the loss: induced 1-norm for absolute loss,
/// squared spectral norm for squared loss.
fn matrix_lipschitz(m: &[Vec<f64>], kind: LossKind) -> f64 {
    match kind {
        LossKind::Absolute => (0..m[0].len())
            .map(|j| m.iter().map(|r| r[j].abs()).sum::<f64>())
            .fold(0.0, f64::max),
        LossKind::Squared => {
            let s = to_dmatrix(m).singular_values().max();
            s * s
        }
        LossKind::ZeroOne => 1.0,
    }
}

impl Hypothesis {
    pub fn from_form(form: Form) -> Result<Self> {
        let (input_dim, output_dim) = match &form {
            Form::Identity { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidHypothesis("identity of dimension 0".into()));
                }
                (*dim, *dim)
            }
            Form::Affine { matrix, offset } => {
                let (rows, cols) = matrix_shape(matrix, "affine")?;
                if offset.len() != rows {
                    return Err(Error::DimensionMismatch {
                        expected: rows,
                        actual: offset.len(),
                        context: "affine offset".into(),
                    });
                }
                if offset.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("affine offset".into()));
                }
                (cols, rows)
            }
            Form::PreluNet { layers } => {
                if layers.is_empty() {
                    return Err(Error::InvalidHypothesis("PReLU net without layers".into()));
                }
                let mut dims: Option<(usize, usize)> = None;
                for (i, layer) in layers.iter().enumerate() {
                    let (rows, cols) = matrix_shape(&layer.weights, "prelu layer")?;
                    if !layer.bias.is_empty() && layer.bias.len() != rows {
                        return Err(Error::InvalidHypothesis(format!("layer {i}: bias length")));
                    }
                    if !(layer.alpha >= 0.0 && layer.alpha.is_finite()) {
                        return Err(Error::InvalidHypothesis(format!(
                            "layer {i}: PReLU slope must be finite and ≥ 0"
                        )));
                    }
                    dims = match dims {
                        None => Some((cols, rows)),
                        Some((input, prev)) if prev == cols => Some((input, rows)),
                        Some((_, prev)) => {
                            return Err(Error::DimensionMismatch {
                                expected: prev,
                                actual: cols,
                                context: format!("PReLU layer {i}"),
                            })
                        }
                    };
                }
                dims.expect("non-empty")
            }
            Form::Table(t) => (t.input_dim, t.output_dim),
            Form::Composition { steps } => {
                let first = steps
                    .first()
                    .ok_or_else(|| Error::InvalidHypothesis("empty composition".into()))?;
                for w in steps.windows(2) {
                    if w[0].output_dim != w[1].input_dim {
                        return Err(Error::DimensionMismatch {
                            expected: w[0].output_dim,
                            actual: w[1].input_dim,
                            context: "composition chain".into(),
                        });
                    }
                }
                (first.input_dim, steps.last().expect("non-empty").output_dim)
            }
            Form::Quantizer { codebook } => {
                let dim = codebook
                    .first()
                    .ok_or_else(|| Error::InvalidHypothesis("empty codebook".into()))?
                    .dim();
                let mut seen = std::collections::HashSet::new();
                for c in codebook {
                    if c.dim() != dim {
                        return Err(Error::InvalidHypothesis("ragged codebook".into()));
                    }
                    if !seen.insert(c.key()) {
                        return Err(Error::InvalidHypothesis(format!("duplicate codeword {c:?}")));
                    }
                }
                (dim, dim)
            }
            Form::Disagreement { left, right } => {
                if left.input_dim != right.input_dim || left.output_dim != right.output_dim {
                    return Err(Error::InvalidHypothesis(
                        "disagreement of hypotheses with different signatures".into(),
                    ));
                }
                (left.input_dim, 1)
            }
        };
        Ok(Hypothesis {
            form: Arc::new(form),
            input_dim,
            output_dim,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Hypothesis::from_form(Form::Identity { dim }).expect("positive dimension")
    }

    pub fn affine(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        Hypothesis::from_form(Form::Affine { matrix, offset })
    }

    /// `t ↦ scale·t + offset` on the real line.
    pub fn scalar_affine(scale: f64, offset: f64) -> Result<Self> {
        Hypothesis::affine(vec![vec![scale]], vec![offset])
    }

    /// Constant map from `input_dim` to `value`.
    pub fn constant(input_dim: usize, value: &Point) -> Result<Self> {
        Hypothesis::affine(vec![vec![0.0; input_dim]; value.dim()], value.coords().to_vec())
    }

    pub fn prelu_net(layers: Vec<PreluLayer>) -> Result<Self> {
        Hypothesis::from_form(Form::PreluNet { layers })
    }

    pub fn table(entries: Vec<(Point, Point)>) -> Result<Self> {
        Hypothesis::from_form(Form::Table(Table::new(entries)?))
    }

    pub fn quantizer(codebook: Vec<Point>) -> Result<Self> {
        Hypothesis::from_form(Form::Quantizer { codebook })
    }

    pub fn disagreement(left: Hypothesis, right: Hypothesis) -> Result<Self> {
        Hypothesis::from_form(Form::Disagreement { left, right })
    }

    /// Composition applying `steps` left to right. Nested compositions are
    /// flattened and identities dropped.
    pub fn compose(steps: impl IntoIterator<Item = Hypothesis>) -> Result<Self> {
        let mut flat = Vec::new();
        for h in steps {
            match h.form.as_ref() {
                Form::Composition { steps } => flat.extend(steps.iter().cloned()),
                _ => flat.push(h),
            }
        }
        // Validate the full chain before identities disappear from it.
        let chain = Hypothesis::from_form(Form::Composition { steps: flat })?;
        let Form::Composition { steps: flat } = chain.form.as_ref() else {
            unreachable!()
        };
        let mut keep: Vec<Hypothesis> = flat.iter().filter(|h| !h.is_identity()).cloned().collect();
        match keep.len() {
            0 => Ok(Hypothesis::identity(chain.input_dim)),
            1 => Ok(keep.pop().expect("one")),
            _ => Hypothesis::from_form(Form::Composition { steps: keep }),
        }
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Hypothesis) -> Result<Self> {
        Hypothesis::compose([self.clone(), next.clone()])
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.form.as_ref(), Form::Identity { .. })
    }

    pub fn evaluate(&self, x: &Point) -> Result<Point> {
        if x.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: x.dim(),
                context: "evaluate".into(),
            });
        }
        let out = self.eval_coords(x.coords())?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("hypothesis output".into()));
        }
        Ok(Point::from_raw(out))
    }

    fn eval_coords(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(match self.form.as_ref() {
            Form::Identity { .. } => x.to_vec(),
            Form::Affine { matrix, offset } => mat_vec(matrix, x, offset),
            Form::PreluNet { layers } => {
                let mut cur = x.to_vec();
                for layer in layers {
                    let zero;
                    let bias = if layer.bias.is_empty() {
                        zero = vec![0.0; layer.weights.len()];
                        &zero
                    } else {
                        &layer.bias
                    };
                    cur = mat_vec(&layer.weights, &cur, bias)
                        .into_iter()
                        .map(|v| prelu(v, layer.alpha))
                        .collect();
                }
                cur
            }
            Form::Table(t) => t.get(x).ok_or_else(|| Error::TableMiss(x.to_vec()))?.coords().to_vec(),
            Form::Composition { steps } => {
                let mut cur = x.to_vec();
                for s in steps {
                    cur = s.eval_coords(&cur)?;
                }
                cur
            }
            Form::Quantizer { codebook } => {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, c) in codebook.iter().enumerate() {
                    let d = LossKind::Squared.eval(c.coords(), x);
                    if d < best_d {
                        best = i;
                        best_d = d;
                    }
                }
                codebook[best].coords().to_vec()
            }
            Form::Disagreement { left, right } => {
                let a = left.eval_coords(x)?;
                let b = right.eval_coords(x)?;
                vec![if a == b { 0.0 } else { 1.0 }]
            }
        })
    }

    /// Exact-form inverse where the form admits one.
    pub fn inverse(&self) -> Result<Hypothesis> {
        match self.form.as_ref() {
            Form::Identity { .. } => Ok(self.clone()),
            Form::Affine { matrix, offset } => {
                let (inv, neg_offset) = invert_affine(matrix, offset)?;
                Hypothesis::affine(inv, neg_offset)
            }
            Form::PreluNet { layers } => {
                let mut steps = Vec::new();
                for layer in layers.iter().rev() {
                    if layer.alpha <= 0.0 {
                        return Err(Error::NotInvertible("PReLU with α = 0".into()));
                    }
                    let n = layer.weights.len();
                    let eye: Vec<Vec<f64>> = (0..n)
                        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                        .collect();
                    steps.push(Hypothesis::prelu_net(vec![PreluLayer {
                        weights: eye,
                        bias: vec![],
                        alpha: 1.0 / layer.alpha,
                    }])?);
                    let bias = if layer.bias.is_empty() {
                        vec![0.0; n]
                    } else {
                        layer.bias.clone()
                    };
                    let (inv, off) = invert_affine(&layer.weights, &bias)?;
                    steps.push(Hypothesis::affine(inv, off)?);
                }
                Hypothesis::compose(steps)
            }
            Form::Table(t) => {
                let swapped: Vec<(Point, Point)> = t.entries.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
                Hypothesis::table(swapped).map_err(|_| Error::NotInvertible("table is not injective".into()))
            }
            Form::Composition { steps } => {
                let inv = steps.iter().rev().map(|s| s.inverse()).collect::<Result<Vec<_>>>()?;
                Hypothesis::compose(inv)
            }
            Form::Quantizer { .. } => Err(Error::NotInvertible("quantizer".into())),
            Form::Disagreement { .. } => Err(Error::NotInvertible("disagreement indicator".into())),
        }
    }

    /// An analytic Lipschitz constant with respect to `kind` on inputs and
    /// outputs, when the form admits one. For tables it is the exact
    /// constant on the table's own domain.
    pub fn lipschitz_bound(&self, kind: LossKind) -> Option<f64> {
        if kind == LossKind::ZeroOne {
            // a = b forces h(a) = h(b), and ℓ ≤ 1 otherwise.
            return Some(1.0);
        }
        match self.form.as_ref() {
            Form::Identity { .. } => Some(1.0),
            Form::Affine { matrix, .. } => Some(matrix_lipschitz(matrix, kind)),
            Form::PreluNet { layers } => Some(
                layers
                    .iter()
                    .map(|l| {
                        let slope = l.alpha.max(1.0);
                        let slope = if kind == LossKind::Squared {
                            slope * slope
                        } else {
                            slope
                        };
                        matrix_lipschitz(&l.weights, kind) * slope
                    })
                    .product(),
            ),
            Form::Table(t) => {
                let mut best: f64 = 0.0;
                for (i, (x1, y1)) in t.entries.iter().enumerate() {
                    for (x2, y2) in &t.entries[i + 1..] {
                        let d_in = kind.eval(x1.coords(), x2.coords());
                        let d_out = kind.eval(y1.coords(), y2.coords());
                        if d_in > 0.0 {
                            best = best.max(d_out / d_in);
                        }
                    }
                }
                Some(best)
            }
            Form::Composition { steps } => steps.iter().map(|s| s.lipschitz_bound(kind)).product::<Option<f64>>(),
            Form::Quantizer { .. } | Form::Disagreement { .. } => None,
        }
    }
}

fn invert_affine(matrix: &[Vec<f64>], offset: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if matrix.len() != matrix[0].len() {
        return Err(Error::NotInvertible("non-square matrix".into()));
    }
    let inv = to_dmatrix(matrix)
        .try_inverse()
        .ok_or_else(|| Error::NotInvertible("singular matrix".into()))?;
    let inv = from_dmatrix(&inv);
    let shift: Vec<f64> = mat_vec(&inv, offset, &vec![0.0; offset.len()])
        .into_iter()
        .map(|v| -v)
        .collect();
    Ok((inv, shift))
}
