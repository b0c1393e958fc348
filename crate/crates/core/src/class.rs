use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{Form, Hypothesis};
use crate::loss::LossKind;
use crate::point::Point;

/// Round-trip tolerance for parametric inverses.
pub const INVERSE_TOLERANCE: f64 = 1e-9;

/// Inverses of a class, aligned by `index[i]` = inverse of member `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseClass {
    pub class: Box<HypothesisClass>,
    pub index: Vec<usize>,
}

/// A finite, ordered hypothesis class with shared signature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassRepr")]
pub struct HypothesisClass {
    input_dim: usize,
    output_dim: usize,
    members: Vec<Hypothesis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lipschitz_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inverse: Option<InverseClass>,
}

#[derive(Deserialize)]
struct ClassRepr {
    input_dim: usize,
    output_dim: usize,
    members: Vec<Hypothesis>,
    #[serde(default)]
    lipschitz_l: Option<f64>,
    #[serde(default)]
    inverse: Option<InverseClass>,
}

impl TryFrom<ClassRepr> for HypothesisClass {
    type Error = Error;

    fn try_from(r: ClassRepr) -> Result<Self> {
        let mut c = HypothesisClass::with_dims(r.input_dim, r.output_dim, r.members)?;
        if let Some(l) = r.lipschitz_l {
            c = c.with_lipschitz(l)?;
        }
        if let Some(inv) = r.inverse {
            c = c.with_inverse_indexed(*inv.class, inv.index)?;
        }
        Ok(c)
    }
}

impl HypothesisClass {
    /// Class from a non-empty member list; dims are taken from the first member.
    pub fn new(members: Vec<Hypothesis>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::Empty("hypothesis class (use with_dims for empty)".into()))?;
        let (i, o) = (first.input_dim(), first.output_dim());
        HypothesisClass::with_dims(i, o, members)
    }

    pub fn with_dims(input_dim: usize, output_dim: usize, members: Vec<Hypothesis>) -> Result<Self> {
        for (idx, m) in members.iter().enumerate() {
            if m.input_dim() != input_dim || m.output_dim() != output_dim {
                return Err(Error::InvalidClass(format!(
                    "member {idx} maps {}→{}, class is {input_dim}→{output_dim}",
                    m.input_dim(),
                    m.output_dim()
                )));
            }
        }
        Ok(HypothesisClass {
            input_dim,
            output_dim,
            members,
            lipschitz_l: None,
            inverse: None,
        })
    }

    pub fn with_lipschitz(mut self, l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidClass(format!("Lipschitz constant {l} must be positive")));
        }
        self.lipschitz_l = Some(l);
        Ok(self)
    }

    /// Attaches an inverse class aligned member-by-member.
    pub fn with_inverse(self, inverse: HypothesisClass) -> Result<Self> {
        let n = self.len();
        self.with_inverse_indexed(inverse, (0..n).collect())
    }

    pub fn with_inverse_indexed(mut self, inverse: HypothesisClass, index: Vec<usize>) -> Result<Self> {
        if inverse.input_dim != self.output_dim || inverse.output_dim != self.input_dim {
            return Err(Error::InvalidClass("inverse class has the wrong signature".into()));
        }
        if index.len() != self.len() || inverse.len() != self.len() {
            return Err(Error::InvalidClass("inverse index is not a bijection".into()));
        }
        let mut seen = vec![false; index.len()];
        for &j in &index {
            if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidClass("inverse index is not a bijection".into()));
            }
        }
        self.inverse = Some(InverseClass {
            class: Box::new(inverse),
            index,
        });
        Ok(self)
    }

    /// `{c ∘ prefix : c ∈ self}`, preserving order; drops the Lipschitz
    /// declaration and inverses, which do not carry over.
    pub fn after(&self, prefix: &Hypothesis) -> Result<HypothesisClass> {
        if prefix.output_dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: prefix.output_dim(),
                context: "class prefix".into(),
            });
        }
        let members = self
            .members
            .iter()
            .map(|m| prefix.then(m))
            .collect::<Result<Vec<_>>>()?;
        HypothesisClass::with_dims(prefix.input_dim(), self.output_dim, members)
    }

    pub fn members(&self) -> &[Hypothesis] {
        &self.members
    }

    pub fn member(&self, i: usize) -> Result<&Hypothesis> {
        self.members
            .get(i)
            .ok_or_else(|| Error::InvalidClass(format!("member index {i} out of range ({})", self.len())))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn lipschitz_l(&self) -> Option<f64> {
        self.lipschitz_l
    }

    pub fn inverse(&self) -> Option<&InverseClass> {
        self.inverse.as_ref()
    }

    /// The inverse class re-ordered so that its member `i` inverts member `i`.
    pub fn aligned_inverse(&self) -> Option<HypothesisClass> {
        let inv = self.inverse.as_ref()?;
        let members = inv.index.iter().map(|&j| inv.class.members[j].clone()).collect();
        let mut c = HypothesisClass::with_dims(self.output_dim, self.input_dim, members).ok()?;
        c.lipschitz_l = inv.class.lipschitz_l;
        Some(c)
    }

    pub fn inverse_of(&self, i: usize) -> Result<&Hypothesis> {
        let inv = self
            .inverse
            .as_ref()
            .ok_or_else(|| Error::MissingInverse(format!("class of {} members", self.len())))?;
        inv.class.member(
            *inv.index
                .get(i)
                .ok_or_else(|| Error::InvalidClass(format!("member index {i} out of range ({})", self.len())))?,
        )
    }

    pub fn require_nonempty(&self, what: &str) -> Result<()> {
        if self.is_empty() {
            Err(Error::Empty(format!("hypothesis class {what}")))
        } else {
            Ok(())
        }
    }

    /// Checks `ℓ(inv_i(member_i(p)), p)` on every probe: exactly zero for
    /// table forms, at most [`INVERSE_TOLERANCE`] otherwise.
    pub fn validate_inverses(&self, probes: &[Point], kind: LossKind) -> Result<()> {
        for (i, m) in self.members.iter().enumerate() {
            let inv = self.inverse_of(i)?;
            let exact = matches!(m.form(), Form::Table(_));
            for p in probes {
                let back = inv.evaluate(&m.evaluate(p)?)?;
                let gap = kind.eval(back.coords(), p.coords());
                let ok = if exact { gap == 0.0 } else { gap <= INVERSE_TOLERANCE };
                if !ok {
                    return Err(Error::InvalidClass(format!(
                        "inverse of member {i} misses probe {p:?} by {gap}"
                    )));
                }
            }
        }
        Ok(())
    }
}
