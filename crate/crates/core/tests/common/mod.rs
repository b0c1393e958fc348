//! Brute-force reference computations, written against the raw definitions
//! and sharing nothing with the library beyond hypothesis evaluation.

#![allow(dead_code)]

use shiftbound::{FiniteDistribution, Hypothesis, HypothesisClass, LossKind, Point};

pub fn loss(kind: LossKind, a: &Point, b: &Point) -> f64 {
    let (a, b) = (a.coords(), b.coords());
    assert_eq!(a.len(), b.len());
    match kind {
        LossKind::Absolute => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        LossKind::Squared => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
        LossKind::ZeroOne => {
            if a == b {
                0.0
            } else {
                1.0
            }
        }
    }
}

pub fn risk(kind: LossKind, d: &FiniteDistribution, h1: &Hypothesis, h2: &Hypothesis) -> f64 {
    d.support()
        .iter()
        .zip(d.weights())
        .map(|(x, w)| w * loss(kind, &h1.evaluate(x).unwrap(), &h2.evaluate(x).unwrap()))
        .sum()
}

fn pair_risks(kind: LossKind, c: &HypothesisClass, d: &FiniteDistribution) -> Vec<Vec<f64>> {
    let m = c.members();
    m.iter()
        .map(|a| m.iter().map(|b| risk(kind, d, a, b)).collect())
        .collect()
}

pub fn disc(kind: LossKind, c: &HypothesisClass, d1: &FiniteDistribution, d2: &FiniteDistribution) -> f64 {
    let (r1, r2) = (pair_risks(kind, c, d1), pair_risks(kind, c, d2));
    let mut best: f64 = 0.0;
    for i in 0..c.len() {
        for j in 0..c.len() {
            best = best.max((r1[i][j] - r2[i][j]).abs());
        }
    }
    best
}

pub fn qdisc(
    kind: LossKind,
    c: &HypothesisClass,
    d11: &FiniteDistribution,
    d12: &FiniteDistribution,
    d21: &FiniteDistribution,
    d22: &FiniteDistribution,
) -> f64 {
    let r: Vec<_> = [d11, d12, d21, d22].iter().map(|d| pair_risks(kind, c, d)).collect();
    let mut best: f64 = 0.0;
    for (i, row) in r[0].iter().enumerate() {
        for (j, r11) in row.iter().enumerate() {
            let u1 = r11 - r[1][i][j];
            let u2 = r[2][i][j] - r[3][i][j];
            best = best.max((u1 - u2).abs());
        }
    }
    best
}

/// `max over c1, c2 of |P_{D1}[c1 ≠ c2] − P_{D2}[c1 ≠ c2]|` for binary members.
pub fn disagreement_gap(c: &HypothesisClass, d1: &FiniteDistribution, d2: &FiniteDistribution) -> f64 {
    let p = |d: &FiniteDistribution, a: &Hypothesis, b: &Hypothesis| -> f64 {
        d.support()
            .iter()
            .zip(d.weights())
            .filter(|(x, _)| a.evaluate(x).unwrap() != b.evaluate(x).unwrap())
            .map(|(_, w)| *w)
            .sum()
    };
    let mut best: f64 = 0.0;
    for a in c.members() {
        for b in c.members() {
            best = best.max((p(d1, a, b) - p(d2, a, b)).abs());
        }
    }
    best
}
