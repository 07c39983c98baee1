use num_complex::Complex64;
use proptest::prelude::*;

use wstate_ecp::analytics::{
    p_even_formula, p_odd_formula, series_terms, theoretical_limit, total_success,
    total_success_by_recursion,
};
use wstate_ecp::ecp::{iterate, recycle_params, run_round_exact};
use wstate_ecp::pcd::{parity_measure, probe_phase};
use wstate_ecp::qstate::{basis_state, fidelity, tensor, w_class_state, w_state, Basis, Sign};
use wstate_ecp::{Parity, PcdModel, Polarization, PureState, QubitIndex, WClassParams};

const TOL: f64 = 1e-12;

fn arb_state(max_qubits: usize) -> impl Strategy<Value = PureState> {
    (1..=max_qubits).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
            .prop_filter("nonzero", |v| v.iter().any(|(re, im)| re.abs() + im.abs() > 1e-3))
            .prop_map(move |v| {
                let amps = v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
                PureState::from_amplitudes(n, amps).unwrap()
            })
    })
}

fn arb_params() -> impl Strategy<Value = WClassParams> {
    (2usize..=7, 0.001f64..0.999)
        .prop_map(|(n, alpha2)| WClassParams::from_alpha2(alpha2, n).unwrap())
}

/// Parameters with `α² ≤ β²`, i.e. `α² ≤ 1/N`.
fn arb_low_params() -> impl Strategy<Value = WClassParams> {
    (2usize..=7, 0.01f64..0.999).prop_map(|(n, frac)| {
        WClassParams::from_alpha2(frac / n as f64, n).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn phase_flip_is_involution(s in arb_state(5), q in 0usize..5) {
        let q = QubitIndex(q % s.num_qubits());
        let twice = s.phase_flip(q).unwrap().phase_flip(q).unwrap();
        prop_assert_eq!(twice, s.clone());
        prop_assert!((s.phase_flip(q).unwrap().norm_sqr() - 1.0).abs() < TOL);
    }

    #[test]
    fn measurement_is_complete(s in arb_state(5), q in 0usize..5, x in any::<bool>()) {
        let q = QubitIndex(q % s.num_qubits());
        let basis = if x { Basis::X } else { Basis::Z };
        let outcomes = s.measure(q, basis).unwrap();
        prop_assert!((outcomes[0].probability + outcomes[1].probability - 1.0).abs() < TOL);
        for o in &outcomes {
            if let Some(post) = &o.post_state {
                prop_assert_eq!(post.num_qubits(), s.num_qubits() - 1);
                prop_assert!(post.is_normalized(TOL));
            }
        }
    }

    #[test]
    fn tensor_then_measure_recovers(s in arb_state(4), v in any::<bool>()) {
        let label = if v { Polarization::V } else { Polarization::H };
        let joint = tensor(&s, &basis_state(&[label]).unwrap()).unwrap();
        prop_assert!(joint.is_normalized(TOL));
        let outcomes = joint.measure(QubitIndex(s.num_qubits()), Basis::Z).unwrap();
        let hit = &outcomes[usize::from(v)];
        prop_assert!((hit.probability - 1.0).abs() < TOL);
        let f = fidelity(hit.post_state.as_ref().unwrap(), &s).unwrap();
        prop_assert!((f - 1.0).abs() < TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn parity_projection_properties(s in arb_state(5).prop_filter("two qubits", |s| s.num_qubits() >= 2),
                                    q1 in 0usize..5, q2 in 0usize..5) {
        let n = s.num_qubits();
        let (q1, q2) = (q1 % n, q2 % n);
        prop_assume!(q1 != q2);
        let (q1, q2) = (QubitIndex(q1), QubitIndex(q2));
        let model = PcdModel::default();
        let [even, odd] = parity_measure(&s, q1, q2, &model).unwrap();

        // completeness
        prop_assert!((even.probability + odd.probability - 1.0).abs() < TOL);

        // agrees with a per-term classification by probe phase
        let even_mass: f64 = s.amplitudes().iter().enumerate()
            .filter(|(i, _)| probe_phase((s.label_at(*i, q1).unwrap(), s.label_at(*i, q2).unwrap()), &model).is_even())
            .map(|(_, a)| a.norm_sqr())
            .sum();
        prop_assert!((even.probability - even_mass).abs() < TOL);

        // idempotence
        if let Some(post) = &even.post_state {
            let [again, _] = parity_measure(post, q1, q2, &model).unwrap();
            prop_assert!((again.probability - 1.0).abs() < TOL);
        }
        if let Some(post) = &odd.post_state {
            let [_, again] = parity_measure(post, q1, q2, &model).unwrap();
            prop_assert!((again.probability - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn w_class_at_equal_weights_is_w_state(n in 2usize..=10) {
        let a = (1.0 / n as f64).sqrt();
        let p = WClassParams::new(a, a, n).unwrap();
        let f = fidelity(&w_class_state(&p).unwrap(), &w_state(n, Sign::Plus).unwrap()).unwrap();
        prop_assert!((f - 1.0).abs() < TOL);
    }

    #[test]
    fn round_invariants(p in arb_params()) {
        let out = run_round_exact(&p, &PcdModel::default()).unwrap();
        prop_assert!((out.p_even + out.p_odd - 1.0).abs() < TOL);
        for parity in [Parity::Even, Parity::Odd] {
            let (plus, minus) = out.x_outcome_probs(parity).unwrap();
            prop_assert!((plus - 0.5).abs() < TOL && (minus - 0.5).abs() < TOL);
            prop_assert!((out.min_fidelity(parity).unwrap() - 1.0).abs() < TOL);
        }
        let r = out.recycle_params;
        let norm = r.alpha2() + (r.n_photons() - 1) as f64 * r.beta2();
        prop_assert!((norm - 1.0).abs() < TOL);
        let closed = recycle_params(&p).unwrap();
        prop_assert!((r.alpha() - closed.alpha()).abs() < 1e-10);
        prop_assert!((r.beta() - closed.beta()).abs() < 1e-10);
        prop_assert!((out.p_even - p_even_formula(&p)).abs() < TOL);
        prop_assert!((out.p_odd - p_odd_formula(&p)).abs() < TOL);
    }

    #[test]
    fn closed_form_completeness(p in arb_params()) {
        prop_assert!((p_even_formula(&p) + p_odd_formula(&p) - 1.0).abs() < TOL);
        let r = recycle_params(&p).unwrap();
        prop_assert!((r.alpha2() + (r.n_photons() - 1) as f64 * r.beta2() - 1.0).abs() < TOL);
    }

    #[test]
    fn series_matches_recursion(p in arb_params(), n in 1usize..=8) {
        let series = total_success(&p, n).unwrap();
        let recursion = total_success_by_recursion(&p, n).unwrap();
        prop_assert!((series - recursion).abs() < TOL, "{} vs {}", series, recursion);
    }

    #[test]
    fn state_vector_run_matches_series(p in arb_params(), n in 1usize..=6) {
        let tree = iterate(&p, n, &PcdModel::default()).unwrap();
        let closed = total_success(&p, n).unwrap();
        prop_assert!((tree.cumulative - closed).abs() < 1e-10);
        let sum: f64 = tree.per_round_success.iter().sum();
        prop_assert!((tree.cumulative - sum).abs() < TOL);
        prop_assert!((0.0..=1.0).contains(&tree.cumulative));
        prop_assert_eq!(tree.message_log.len(), n);
    }

    #[test]
    fn bounded_by_limit(p in arb_low_params(), n in 1usize..=10) {
        let limit = theoretical_limit(&p).unwrap();
        let total = total_success(&p, n).unwrap();
        prop_assert!(total <= limit + TOL, "{} > {}", total, limit);
        // strict while the missing tail is still representable
        if n <= 2 {
            prop_assert!(total < limit, "{} !< {}", total, limit);
        }
    }

    #[test]
    fn tail_terms_decay(p in arb_low_params()) {
        let terms = series_terms(&p, 8).unwrap();
        for w in terms.windows(2) {
            prop_assert!(w[1].value <= w[0].value);
        }
    }

    #[test]
    fn success_grows_with_rounds(n_photons in 2usize..=7, alpha2 in 0.01f64..0.99) {
        let p = WClassParams::from_alpha2(alpha2, n_photons).unwrap();
        let mut last = 0.0;
        for n in 1..=3 {
            let total = total_success(&p, n).unwrap();
            prop_assert!(total > last, "n = {}: {} <= {}", n, total, last);
            last = total;
        }
    }
}
