mod common;

use proptest::prelude::*;
use shiftbound::scenarios::random::{random_disc_instance, random_distribution, random_quad_instance};
use shiftbound::scenarios::ScenarioRng;
use shiftbound::{
    discrepancy, generate, quad_discrepancy, risk, train, FiniteDistribution, Hypothesis, ObjectiveWeights,
    ScenarioConfig, SettingKind,
};

const TOL: f64 = 1e-9;

fn kind() -> impl Strategy<Value = SettingKind> {
    prop::sample::select(SettingKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discrepancy_agrees_with_brute_force(seed in any::<u64>()) {
        let inst = random_disc_instance(&mut ScenarioRng::new(seed)).unwrap();
        let [d1, d2, d3] = &inst.distributions;
        let (c, spec) = (&inst.class, &inst.loss);
        let r = discrepancy(c, d1, d2, spec).unwrap();
        prop_assert!((r.value - common::disc(spec.kind, c, d1, d2)).abs() <= 1e-12);

        let (i, j) = r.witness;
        let (a, b) = (&c.members()[i], &c.members()[j]);
        let gap = (common::risk(spec.kind, d1, a, b) - common::risk(spec.kind, d2, a, b)).abs();
        prop_assert!((gap - r.value).abs() <= 1e-12);

        let d13 = discrepancy(c, d1, d3, spec).unwrap().value;
        let d23 = discrepancy(c, d2, d3, spec).unwrap().value;
        prop_assert!(d13 <= r.value + d23 + TOL);
    }

    #[test]
    fn quad_discrepancy_agrees_with_brute_force(seed in any::<u64>()) {
        let inst = random_quad_instance(&mut ScenarioRng::new(seed)).unwrap();
        let [a, b, x, y] = &inst.distributions;
        let (c, spec) = (&inst.class, &inst.loss);
        let q = quad_discrepancy(c, a, b, x, y, spec).unwrap().value;
        prop_assert!((q - common::qdisc(spec.kind, c, a, b, x, y)).abs() <= 1e-12);
        let swapped = quad_discrepancy(c, x, y, a, b, spec).unwrap().value;
        prop_assert!((q - swapped).abs() <= 1e-12);
    }

    #[test]
    fn risk_agrees_with_brute_force(seed in any::<u64>()) {
        let inst = random_disc_instance(&mut ScenarioRng::new(seed)).unwrap();
        let (c, spec) = (&inst.class, &inst.loss);
        let d = &inst.distributions[0];
        let (h1, h2) = (&c.members()[0], &c.members()[c.len() - 1]);
        let v = risk(d, h1, h2, spec).unwrap().value();
        prop_assert!((v - common::risk(spec.kind, d, h1, h2)).abs() <= 1e-12);
        prop_assert!(v >= 0.0);
    }

    #[test]
    fn pushforward_preserves_mass_and_risk(seed in any::<u64>()) {
        let mut rng = ScenarioRng::new(seed);
        let inst = random_disc_instance(&mut rng).unwrap();
        let d = &inst.distributions[0];
        let h = &inst.class.members()[0];
        let moved = d.pushforward(h).unwrap();
        prop_assert!((moved.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!(moved.len() <= d.len());
        let id = Hypothesis::identity(h.output_dim());
        let c = Hypothesis::constant(h.output_dim(), &moved.support()[0]).unwrap();
        let direct = common::risk(inst.loss.kind, d, h, &h.then(&c).unwrap());
        let pushed = common::risk(inst.loss.kind, &moved, &id, &c);
        prop_assert!((direct - pushed).abs() <= 1e-12);
    }

    #[test]
    fn distributions_round_trip_through_json(seed in any::<u64>(), dim in 1usize..4) {
        let d = random_distribution(&mut ScenarioRng::new(seed), dim).unwrap();
        let text = shiftbound::json::to_string(&d).unwrap();
        let back: FiniteDistribution = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn scenarios_are_reproducible(kind in kind(), seed in 0u64..1000) {
        let cfg = ScenarioConfig::new(kind, seed).with_class_size(4);
        let a = shiftbound::json::to_string(&generate(&cfg).unwrap()).unwrap();
        let b = shiftbound::json::to_string(&generate(&cfg).unwrap()).unwrap();
        prop_assert_eq!(&a, &b);
        let parsed: shiftbound::Scenario = serde_json::from_str(&a).unwrap();
        prop_assert_eq!(shiftbound::json::to_string(&parsed).unwrap(), a);
    }

    #[test]
    fn zero_shift_gives_identical_domains(kind in kind(), seed in 0u64..1000) {
        prop_assume!(!matches!(kind, SettingKind::TwoSided | SettingKind::DomainTransfer));
        let mut cfg = ScenarioConfig::new(kind, seed).with_class_size(4);
        cfg.shift_magnitude = 0.0;
        let s = generate(&cfg).unwrap().setting;
        prop_assert_eq!(s.distribution("D_S").unwrap(), s.distribution("D_T").unwrap());
    }

    #[test]
    fn training_never_beats_the_optimum_under_larger_disc_weight(seed in 0u64..500, w in 0.0f64..4.0) {
        let cfg = ScenarioConfig::new(SettingKind::StandardDa, seed).with_class_size(6);
        let s = generate(&cfg).unwrap().setting;
        let low = train(&s, &ObjectiveWeights { w_disc: w, ..Default::default() }, false).unwrap();
        let high = train(&s, &ObjectiveWeights { w_disc: w + 1.0, ..Default::default() }, false).unwrap();
        prop_assert!(high.objective_terms["disc"] <= low.objective_terms["disc"] + 1e-12);
        prop_assert!(high.objective_value >= low.objective_value - 1e-12);
    }
}
