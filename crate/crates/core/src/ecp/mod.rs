//! Single-photon-assisted concentration of W-class states.
//!
//! One round: Alice prepares an ancilla `(α|H⟩ + β|V⟩)/√(α²+β²)`, runs a
//! parity check on her photon and the ancilla, measures the ancilla in the
//! X basis and applies `σ_z` to her photon on a `−x` result. An even parity
//! leaves the parties with a standard W state. An odd parity leaves a
//! W-class state with parameters `(α², β²)/√(α⁴+(N−1)β⁴)`, which is fed
//! into the next round.
//!
//! Everything here runs on the state vector. Probabilities and recycled
//! parameters are read off the simulated branches, never taken from the
//! closed forms in [`crate::analytics`], so the two can check each other.

mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcd::{parity_measure, Parity, PcdModel};
use crate::qstate::{
    fidelity, tensor, w_class_state, w_state, Basis, MeasLabel, PureState, QubitIndex, Sign,
    MAX_QUBITS,
};

pub use verify::{
    acceptance_grid, verify_grid, verify_round_against_formulas, verify_round_with, CheckSummary,
    RoundCheck, VerificationReport, ROUND_TOLERANCE,
};

/// Tolerance on `α² + (N−1)β² = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Largest supported photon count (the ancilla takes the register to [`MAX_QUBITS`]).
pub const MAX_PHOTONS: usize = MAX_QUBITS - 1;

/// Coefficients of the W-class state
/// `α|H…HV⟩ + β(|H…HVH⟩ + … + |VH…H⟩)` over `n_photons` photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WClassParams {
    alpha: f64,
    beta: f64,
    n_photons: usize,
}

impl WClassParams {
    pub fn new(alpha: f64, beta: f64, n_photons: usize) -> Result<Self> {
        if !(2..=MAX_PHOTONS).contains(&n_photons) {
            return Err(Error::invalid(format!(
                "photon count must be in 2..={MAX_PHOTONS}, got {n_photons}"
            )));
        }
        if !(alpha.is_finite() && beta.is_finite()) || alpha < 0.0 || beta < 0.0 {
            return Err(Error::invalid(format!(
                "α and β must be nonnegative reals, got α = {alpha}, β = {beta}"
            )));
        }
        let norm = alpha * alpha + (n_photons - 1) as f64 * beta * beta;
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::invalid(format!(
                "α² + (N−1)β² = {norm}, expected 1 (α = {alpha}, β = {beta}, N = {n_photons})"
            )));
        }
        Ok(Self { alpha, beta, n_photons })
    }

    /// Derives `β² = (1 − α²)/(N − 1)`.
    pub fn from_alpha2(alpha2: f64, n_photons: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(Error::invalid(format!("α² must lie in [0, 1], got {alpha2}")));
        }
        if n_photons < 2 {
            return Err(Error::invalid(format!("photon count must be at least 2, got {n_photons}")));
        }
        let beta2 = (1.0 - alpha2) / (n_photons - 1) as f64;
        Self::new(alpha2.sqrt(), beta2.sqrt(), n_photons)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha * self.alpha
    }

    pub fn beta2(&self) -> f64 {
        self.beta * self.beta
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    /// `α = 0` or `β = 0`: no even-parity term exists and recycling is a fixed point.
    pub fn is_degenerate(&self) -> bool {
        self.alpha == 0.0 || self.beta == 0.0
    }

    /// Alice's photon is the last data qubit.
    pub fn alice(&self) -> QubitIndex {
        QubitIndex(self.n_photons - 1)
    }

    /// The ancilla is appended after the data photons.
    pub fn ancilla(&self) -> QubitIndex {
        QubitIndex(self.n_photons)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum XOutcome {
    Plus,
    Minus,
}

impl XOutcome {
    pub const BOTH: [XOutcome; 2] = [XOutcome::Plus, XOutcome::Minus];
}

/// Alice's classical broadcast after a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Even parity: keep the standard W state.
    Retain,
    /// Odd parity with rounds left: keep the photons for another round.
    Recycle,
    /// Odd parity on the last round.
    Discard,
}

impl Verdict {
    pub fn after(parity: Parity, round: usize, max_rounds: usize) -> Self {
        match parity {
            Parity::Even => Verdict::Retain,
            Parity::Odd if round < max_rounds => Verdict::Recycle,
            Parity::Odd => Verdict::Discard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub round: usize,
    pub verdict: Verdict,
}

/// Ordered verdicts broadcast by Alice, one per executed round. The other
/// parties only ever listen.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageLog {
    records: Vec<MessageRecord>,
}

impl MessageLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn broadcast(&mut self, round: usize, verdict: Verdict) {
        self.records.push(MessageRecord { round, verdict });
    }

    pub fn records(&self) -> &[MessageRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// One leaf of a round: a parity result followed by an ancilla X result.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub parity: Parity,
    pub x_outcome: XOutcome,
    /// Probability of the X result given the parity result.
    pub x_probability: f64,
    pub correction_applied: bool,
    /// N-photon state after the ancilla is measured and `σ_z` applied.
    pub corrected_state: Option<PureState>,
    /// Fidelity with the branch target: `|W_N⁺⟩` for even parity, the
    /// recycled W-class state for odd parity.
    pub target_fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub params: WClassParams,
    pub p_even: f64,
    pub p_odd: f64,
    /// `|W_N⁺⟩` as produced by the even branch; `None` for degenerate input.
    pub success_state: Option<PureState>,
    /// Parameters read off the corrected odd-branch state.
    pub recycle_params: WClassParams,
    pub branches: Vec<Branch>,
}

impl RoundOutcome {
    /// X-measurement probabilities `(+x, −x)` inside the given parity branch.
    pub fn x_outcome_probs(&self, parity: Parity) -> Option<(f64, f64)> {
        let prob = |x| {
            self.branches
                .iter()
                .find(|b| b.parity == parity && b.x_outcome == x)
                .map(|b| b.x_probability)
        };
        Some((prob(XOutcome::Plus)?, prob(XOutcome::Minus)?))
    }

    /// Worst fidelity over the branches of `parity`.
    pub fn min_fidelity(&self, parity: Parity) -> Option<f64> {
        self.branches
            .iter()
            .filter(|b| b.parity == parity)
            .filter_map(|b| b.target_fidelity)
            .reduce(f64::min)
    }
}

/// Ancilla `(α|H⟩ + β|V⟩)/√(α² + β²)`.
pub fn ancilla_state(params: &WClassParams) -> Result<PureState> {
    PureState::from_reals(1, &[params.alpha(), params.beta()])
}

/// Closed-form parameter update for the odd-parity branch.
pub fn recycle_params(params: &WClassParams) -> Result<WClassParams> {
    let a2 = params.alpha2();
    let b2 = params.beta2();
    let norm = (a2 * a2 + (params.n_photons() - 1) as f64 * b2 * b2).sqrt();
    if norm == 0.0 {
        return Err(Error::invalid("α⁴ + (N−1)β⁴ vanishes"));
    }
    WClassParams::new(a2 / norm, b2 / norm, params.n_photons())
}

/// Reads `(α, β)` back out of a W-class-shaped state. The returned fidelity
/// measures how well the state matches that shape.
fn extract_w_class(state: &PureState, n_photons: usize) -> Result<(WClassParams, f64)> {
    use crate::qstate::Polarization::{H, V};
    let mut labels = vec![H; n_photons];
    labels[n_photons - 1] = V;
    let alpha = state.amplitude_of(&labels)?.norm();
    labels[n_photons - 1] = H;
    labels[0] = V;
    let beta = state.amplitude_of(&labels)?.norm();
    let params = WClassParams::new(alpha, beta, n_photons)?;
    let f = fidelity(state, &w_class_state(&params)?)?;
    Ok((params, f))
}

/// Runs one concentration round by exact enumeration of every measurement branch.
pub fn run_round_exact(params: &WClassParams, pcd: &PcdModel) -> Result<RoundOutcome> {
    let n = params.n_photons();
    let joint = tensor(&w_class_state(params)?, &ancilla_state(params)?)?;
    let [even, odd] = parity_measure(&joint, params.alice(), params.ancilla(), pcd)?;
    let target_w = w_state(n, Sign::Plus)?;

    let mut branches = Vec::with_capacity(4);
    let mut success_state = None;
    let mut recycled = None;

    for pcd_outcome in [&even, &odd] {
        let parity = pcd_outcome.parity;
        let Some(post) = &pcd_outcome.post_state else {
            for x_outcome in XOutcome::BOTH {
                branches.push(Branch {
                    parity,
                    x_outcome,
                    x_probability: 0.0,
                    correction_applied: x_outcome == XOutcome::Minus,
                    corrected_state: None,
                    target_fidelity: None,
                });
            }
            continue;
        };

        for x in post.measure(params.ancilla(), Basis::X)? {
            let x_outcome = match x.label {
                MeasLabel::PlusX => XOutcome::Plus,
                _ => XOutcome::Minus,
            };
            let correction_applied = x_outcome == XOutcome::Minus;
            let corrected = match &x.post_state {
                Some(s) if correction_applied => Some(s.phase_flip(params.alice())?),
                other => other.clone(),
            };
            let target_fidelity = match (&corrected, parity) {
                (None, _) => None,
                (Some(s), Parity::Even) => {
                    success_state.get_or_insert_with(|| s.clone());
                    Some(fidelity(s, &target_w)?)
                }
                (Some(s), Parity::Odd) => {
                    let (p, f) = extract_w_class(s, n)?;
                    recycled.get_or_insert(p);
                    Some(f)
                }
            };
            branches.push(Branch {
                parity,
                x_outcome,
                x_probability: x.probability,
                correction_applied,
                corrected_state: corrected,
                target_fidelity,
            });
        }
    }

    let recycle_params = recycled.ok_or_else(|| Error::invalid("odd parity branch is empty"))?;
    Ok(RoundOutcome {
        params: *params,
        p_even: even.probability,
        p_odd: odd.probability,
        success_state,
        recycle_params,
        branches,
    })
}

/// Branch tree of an `n`-round run. Each round is entered only along the
/// all-odd path, so the tree is a spine with one success leaf per round.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTree {
    pub rounds: Vec<RoundOutcome>,
    /// `P'₁⋯P'ₖ₋₁·Pₖ` for each round `k`.
    pub per_round_success: Vec<f64>,
    pub cumulative: f64,
    /// Parameters left on the all-odd path after the last round.
    pub terminal_params: WClassParams,
    /// Alice's broadcasts along the all-odd path: `recycle` until the last
    /// round, then `discard`. Every even leaf receives `retain`.
    pub message_log: MessageLog,
}

impl RunTree {
    /// Probability that every round came out odd.
    pub fn exhausted_probability(&self) -> f64 {
        self.rounds.iter().map(|r| r.p_odd).product()
    }

    /// `false` once the run has reached a degenerate absorbing point.
    pub fn is_concentrable(&self) -> bool {
        !self.terminal_params.is_degenerate()
    }
}

/// Chains `rounds` exact rounds through the recycled parameters.
pub fn iterate(params: &WClassParams, rounds: usize, pcd: &PcdModel) -> Result<RunTree> {
    if rounds < 1 {
        return Err(Error::invalid("at least one round is required"));
    }
    let mut current = *params;
    let mut reach = 1.0;
    let mut outcomes = Vec::with_capacity(rounds);
    let mut per_round_success = Vec::with_capacity(rounds);
    let mut message_log = MessageLog::new();

    for k in 1..=rounds {
        let outcome = run_round_exact(&current, pcd)?;
        per_round_success.push(reach * outcome.p_even);
        reach *= outcome.p_odd;
        message_log.broadcast(k, Verdict::after(Parity::Odd, k, rounds));
        current = outcome.recycle_params;
        outcomes.push(outcome);
    }

    Ok(RunTree {
        cumulative: per_round_success.iter().sum(),
        rounds: outcomes,
        per_round_success,
        terminal_params: current,
        message_log,
    })
}
