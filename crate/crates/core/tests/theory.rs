use vpr_core::theory::{
    bernoulli_closed_forms, bernoulli_exact_expectations, bias_bound_check, gradient_agreement,
    imitation_equivalence_check, imitation_off_policy_gap, scaling_table, BernoulliRegime, FiniteBandit,
};

#[test]
fn closed_forms_match_exact_sums() {
    for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for t in [1, 2, 5, 10, 20, 40] {
            let reg = BernoulliRegime::new(p, t).unwrap();
            let (v, o) = bernoulli_closed_forms(&reg);
            let (ve, oe) = bernoulli_exact_expectations(&reg);
            assert!((v - ve).abs() <= 1e-12 * v.max(1.0), "p={p} T={t}");
            assert!((o - oe).abs() <= 1e-12 * o.abs().max(1e-300) + 1e-15, "p={p} T={t}");
        }
    }
}

#[test]
fn scaling_cells_agree_with_closed_forms() {
    let rows = scaling_table(&[0.3, 0.7], &[1, 5, 20], 20_000, 3).unwrap();
    for r in &rows {
        assert!(r.identity_rel_error <= 4.0 * f64::EPSILON);
        assert!(r.vpr.within(4.0) && r.or.within(4.0), "p={} T={}", r.p, r.horizon);
    }
}

#[test]
fn exact_gradient_identities_on_random_bandits() {
    for seed in 0..20 {
        let fb = FiniteBandit::random(4, 3, seed);
        assert!(imitation_equivalence_check(&fb) <= 1e-12);
        let baseline: Vec<f64> = (0..fb.d.len()).map(|s| 3.0 * s as f64 - 1.0).collect();
        let g = gradient_agreement(&fb, &baseline, 1e-5);
        assert!(g.score_vs_direct <= 1e-12);
        assert!(g.baseline_shift <= 1e-12);
        assert!(g.finite_difference_rel <= 1e-6);
    }
}

#[test]
fn imitation_identity_is_local_to_the_behaviour_policy() {
    let fb = FiniteBandit::random(3, 4, 1);
    let shift: Vec<f64> = (0..fb.n_params()).map(|i| 0.4 * i as f64).collect();
    assert!(imitation_off_policy_gap(&fb, &shift) > 1e-6);
}

#[test]
fn corrupted_verifier_bias_stays_under_bound() {
    for seed in 0..100 {
        let fb = FiniteBandit::random(5, 4, 1000 + seed);
        for rate in [0.05, 0.1, 0.2] {
            let rep = bias_bound_check(&fb, &fb.verifier, rate, seed).unwrap();
            assert!(rep.holds(), "seed {seed} rate {rate}: {rep:?}");
        }
    }
}

#[test]
fn invalid_regimes_are_rejected() {
    assert!(BernoulliRegime::new(0.0, 3).is_err());
    assert!(BernoulliRegime::new(0.5, 0).is_err());
    assert!(BernoulliRegime::new(f64::NAN, 3).is_err());
}
