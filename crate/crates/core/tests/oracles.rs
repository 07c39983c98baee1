//! Checks against a brute-force branch enumeration written directly over
//! basis-string bitmasks, with no use of the library's state engine.

use wstate_ecp::analytics::{p_even_formula, p_odd_formula, round_k_probs, total_success};
use wstate_ecp::ecp::{ancilla_state, iterate, run_round_exact};
use wstate_ecp::pcd::parity_measure;
use wstate_ecp::qstate::{fidelity, tensor, w_class_state, w_state, Basis, MeasLabel, Sign};
use wstate_ecp::{PcdModel, Polarization, QubitIndex, WClassParams};

const TOL: f64 = 1e-12;

struct OracleRound {
    p_even: f64,
    p_odd: f64,
    /// `α′²` of the recycled state, from the `+x` outcome.
    alpha2_next: f64,
}

/// Enumerates every (data string, ancilla bit) pair of one round. Bit
/// `N−1−q` of a data mask holds photon `q`; Alice is photon `N−1`, i.e. bit 0.
fn oracle_round(alpha2: f64, n: usize) -> OracleRound {
    let beta2 = (1.0 - alpha2) / (n - 1) as f64;
    let (alpha, beta) = (alpha2.sqrt(), beta2.sqrt());
    let anc_norm = (alpha2 + beta2).sqrt();
    let ancilla = [alpha / anc_norm, beta / anc_norm];

    let data_amp = |mask: usize| -> f64 {
        if mask == 1 {
            alpha
        } else if mask.count_ones() == 1 {
            beta
        } else {
            0.0
        }
    };

    let mut p_even = 0.0;
    let mut odd_plus_x = vec![0.0; 1 << n];
    for mask in 0..(1usize << n) {
        let alice = mask & 1;
        for (bit, anc) in ancilla.iter().enumerate() {
            let amp = data_amp(mask) * anc;
            if alice == bit {
                p_even += amp * amp;
            } else {
                odd_plus_x[mask] += amp / 2f64.sqrt();
            }
        }
    }
    let p_odd_plus: f64 = odd_plus_x.iter().map(|a| a * a).sum();
    OracleRound {
        p_even,
        p_odd: 1.0 - p_even,
        alpha2_next: odd_plus_x[1] * odd_plus_x[1] / p_odd_plus,
    }
}

fn params(alpha2: f64, n: usize) -> WClassParams {
    WClassParams::from_alpha2(alpha2, n).unwrap()
}

#[test]
fn oracle_frozen_values() {
    // Frozen from `oracle_round`; they also agree with direct substitution.
    let cases = [
        (0.2, 3, 0.4, 1.0 / 9.0),
        (1.0 / 3.0, 3, 0.5, 1.0 / 3.0),
        (0.1, 4, 0.3, 0.01 / (0.01 + 3.0 * 0.09)),
        (0.1, 3, 0.135 / 0.55, 0.01 / (0.01 + 2.0 * 0.2025)),
    ];
    for (alpha2, n, p_even, alpha2_next) in cases {
        let o = oracle_round(alpha2, n);
        assert!((o.p_even - p_even).abs() < TOL, "α²={alpha2} N={n}: {}", o.p_even);
        assert!((o.alpha2_next - alpha2_next).abs() < TOL, "α²={alpha2} N={n}: {}", o.alpha2_next);
    }
}

#[test]
fn engine_matches_oracle() {
    for n in 2..=7 {
        for i in 1..=19 {
            let alpha2 = i as f64 * 0.05;
            let o = oracle_round(alpha2, n);
            let p = params(alpha2, n);
            let round = run_round_exact(&p, &PcdModel::default()).unwrap();
            assert!((round.p_even - o.p_even).abs() < TOL, "N={n} α²={alpha2}");
            assert!((round.p_odd - o.p_odd).abs() < TOL, "N={n} α²={alpha2}");
            assert!((round.recycle_params.alpha2() - o.alpha2_next).abs() < TOL);
            assert!((p_even_formula(&p) - o.p_even).abs() < TOL);
            assert!((p_odd_formula(&p) - o.p_odd).abs() < TOL);
        }
    }
}

#[test]
fn joint_state_expansion() {
    use Polarization::{H, V};
    let p = params(0.2, 3);
    let joint = tensor(&w_class_state(&p).unwrap(), &ancilla_state(&p).unwrap()).unwrap();
    let (a, b) = (p.alpha(), p.beta());
    let norm = (a * a + b * b).sqrt();
    let expected = [
        ([H, H, V, V], a * b / norm),
        ([H, V, H, H], a * b / norm),
        ([V, H, H, H], a * b / norm),
        ([H, H, V, H], a * a / norm),
        ([H, V, H, V], b * b / norm),
        ([V, H, H, V], b * b / norm),
    ];
    let mut mass = 0.0;
    for (labels, value) in expected {
        let amp = joint.amplitude_of(&labels).unwrap();
        assert!((amp.re - value).abs() < TOL && amp.im == 0.0, "{labels:?}");
        mass += value * value;
    }
    assert!((mass - 1.0).abs() < TOL, "no other terms");
}

#[test]
fn even_branch_x_measurement() {
    let p = params(0.2, 3);
    let joint = tensor(&w_class_state(&p).unwrap(), &ancilla_state(&p).unwrap()).unwrap();
    let [even, odd] = parity_measure(&joint, p.alice(), p.ancilla(), &PcdModel::default()).unwrap();
    assert!((even.probability - 0.4).abs() < TOL);

    let [plus, minus] = even.post_state.unwrap().measure(QubitIndex(3), Basis::X).unwrap();
    assert_eq!(plus.label, MeasLabel::PlusX);
    assert!((plus.probability - 0.5).abs() < TOL && (minus.probability - 0.5).abs() < TOL);
    let w_plus = w_state(3, Sign::Plus).unwrap();
    let w_minus = w_state(3, Sign::Minus).unwrap();
    assert!((fidelity(plus.post_state.as_ref().unwrap(), &w_plus).unwrap() - 1.0).abs() < TOL);
    assert!((fidelity(minus.post_state.as_ref().unwrap(), &w_minus).unwrap() - 1.0).abs() < TOL);

    let [p_plus, p_minus] = odd.post_state.unwrap().measure(QubitIndex(3), Basis::X).unwrap();
    assert!((p_plus.probability - 0.5).abs() < TOL && (p_minus.probability - 0.5).abs() < TOL);
}

#[test]
fn round_two_and_series_values() {
    let p = params(0.2, 3);
    let (p2, _) = round_k_probs(&p);
    // P(2) = P₁ + P′₁·P₂ with P₁ = 0.4, P′₁ = 0.6.
    assert!((p2 - 0.0192 / 0.072).abs() < TOL);
    assert!((total_success(&p, 2).unwrap() - 0.56).abs() < TOL);
    assert!((iterate(&p, 2, &PcdModel::default()).unwrap().cumulative - 0.56).abs() < TOL);
}

#[test]
fn fixed_point_series_is_geometric() {
    let p = params(1.0 / 3.0, 3);
    for n in 1..=8 {
        let expected = 1.0 - 0.5f64.powi(n as i32);
        assert!((total_success(&p, n).unwrap() - expected).abs() < TOL);
    }
}
