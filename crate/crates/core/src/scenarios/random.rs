//! Small random (class, distributions) instances for property checks of the
//! discrepancy measures.

use serde::{Deserialize, Serialize};

use super::rng::ScenarioRng;
use crate::class::HypothesisClass;
use crate::distribution::FiniteDistribution;
use crate::error::Result;
use crate::hypothesis::{Hypothesis, PreluLayer};
use crate::loss::{LossKind, LossSpec};
use crate::point::Point;

pub const MAX_CLASS: usize = 32;
pub const MAX_SUPPORT: usize = 64;

/// A class with `N` distributions over its input space and the loss to
/// measure it with.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RandomInstance<const N: usize> {
    pub class: HypothesisClass,
    #[serde(with = "serde_arrays")]
    pub distributions: [FiniteDistribution; N],
    pub loss: LossSpec,
}

mod serde_arrays {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::distribution::FiniteDistribution;

    pub fn serialize<S: Serializer, const N: usize>(v: &[FiniteDistribution; N], s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[FiniteDistribution; N], D::Error> {
        let v = Vec::<FiniteDistribution>::deserialize(d)?;
        let n = v.len();
        v.try_into()
            .map_err(|_| D::Error::custom(format!("expected {N} distributions, got {n}")))
    }
}

/// Three distributions, for identity, symmetry and triangle checks.
pub type DiscInstance = RandomInstance<3>;
/// Four distributions, for the quad discrepancy.
pub type QuadInstance = RandomInstance<4>;

fn random_point(rng: &mut ScenarioRng, dim: usize) -> Result<Point> {
    Point::new((0..dim).map(|_| rng.lattice(-2.0, 2.0, 0.125)).collect())
}

/// Between 1 and 64 atoms with integer weights in `1..=8`, normalised.
pub fn random_distribution(rng: &mut ScenarioRng, dim: usize) -> Result<FiniteDistribution> {
    let n = 1 + rng.below(MAX_SUPPORT);
    let mut atoms = Vec::with_capacity(n);
    for _ in 0..n {
        atoms.push((random_point(rng, dim)?, (1 + rng.below(8)) as f64));
    }
    let total: f64 = atoms.iter().map(|(_, w)| w).sum();
    FiniteDistribution::from_atoms(atoms.into_iter().map(|(p, w)| (p, w / total)))
}

fn random_member(rng: &mut ScenarioRng, input: usize, prelu: bool) -> Result<Hypothesis> {
    let row: Vec<f64> = (0..input).map(|_| rng.lattice(-2.0, 2.0, 0.25)).collect();
    let bias = rng.lattice(-1.0, 1.0, 0.25);
    if prelu {
        let alpha = *rng.pick(&[0.0, 0.25, 0.5, 1.0]);
        Hypothesis::prelu_net(vec![PreluLayer {
            weights: vec![row],
            bias: vec![bias],
            alpha,
        }])
    } else {
        Hypothesis::affine(vec![row], vec![bias])
    }
}

/// Class of 1 to 32 scalar-output members on inputs of dimension 1 or 2,
/// affine or single-unit PReLU, under the absolute or squared loss.
fn random_class(rng: &mut ScenarioRng) -> Result<(HypothesisClass, LossSpec, usize)> {
    let input = 1 + rng.below(2);
    let size = 1 + rng.below(MAX_CLASS);
    let members = (0..size)
        .map(|_| {
            let prelu = rng.chance(1, 2);
            random_member(rng, input, prelu)
        })
        .collect::<Result<Vec<_>>>()?;
    let kind = *rng.pick(&[LossKind::Absolute, LossKind::Squared]);
    Ok((HypothesisClass::new(members)?, LossSpec::new(kind, 1)?, input))
}

fn random_instance<const N: usize>(rng: &mut ScenarioRng) -> Result<RandomInstance<N>> {
    let (class, loss, dim) = random_class(rng)?;
    let mut ds = Vec::with_capacity(N);
    for _ in 0..N {
        ds.push(random_distribution(rng, dim)?);
    }
    let distributions = ds
        .try_into()
        .unwrap_or_else(|_| unreachable!("exactly N distributions"));
    Ok(RandomInstance {
        class,
        distributions,
        loss,
    })
}

pub fn random_disc_instance(rng: &mut ScenarioRng) -> Result<DiscInstance> {
    random_instance(rng)
}

pub fn random_quad_instance(rng: &mut ScenarioRng) -> Result<QuadInstance> {
    random_instance(rng)
}

/// `n` random probe points of dimension `dim` on the 1/8 lattice in `[-2, 2]`.
pub fn random_probes(rng: &mut ScenarioRng, n: usize, dim: usize) -> Result<Vec<Point>> {
    (0..n).map(|_| random_point(rng, dim)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_respect_limits() {
        let mut rng = ScenarioRng::new(42);
        for _ in 0..50 {
            let inst = random_quad_instance(&mut rng).unwrap();
            assert!((1..=MAX_CLASS).contains(&inst.class.len()));
            for d in &inst.distributions {
                assert!((1..=MAX_SUPPORT).contains(&d.len()));
                assert!((d.total_mass() - 1.0).abs() < 1e-12);
                assert_eq!(d.dim(), inst.class.input_dim());
            }
        }
    }

    #[test]
    fn instances_round_trip() {
        let mut rng = ScenarioRng::new(5);
        let inst = random_disc_instance(&mut rng).unwrap();
        let json = serde_json::to_string(&inst).unwrap();
        let back: DiscInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
