//! Cross-Kerr parity-check detector.
//!
//! Two signal photons are routed through a pair of cross-Kerr media so
//! that `|HH⟩` kicks the probe by `+θ`, `|VV⟩` by `−θ`, and the odd
//! combinations leave it untouched. The X-quadrature readout only sees
//! `|phase|`, so the detector reveals the parity of the pair and nothing
//! else. The effective model here is that consequence: a coherent
//! projection onto the even or odd parity subspace.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{Polarization, PureState, QubitIndex, ZERO_PROBABILITY};

/// Cross-Kerr coupling and interaction time. Only the probe phase
/// `θ = χ·t` enters the detector model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcdModel {
    chi: f64,
    interaction_time: f64,
}

impl PcdModel {
    pub fn new(chi: f64, interaction_time: f64) -> Result<Self> {
        let theta = chi * interaction_time;
        if !theta.is_finite() || theta <= 0.0 {
            return Err(Error::invalid(format!(
                "probe phase θ = χt must be positive and finite, got {theta}"
            )));
        }
        Ok(Self { chi, interaction_time })
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn interaction_time(&self) -> f64 {
        self.interaction_time
    }

    pub fn theta(&self) -> f64 {
        self.chi * self.interaction_time
    }
}

impl Default for PcdModel {
    fn default() -> Self {
        Self { chi: 1.0, interaction_time: 0.1 }
    }
}

/// Phase imprinted on the probe beam by one two-photon basis term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePhase {
    value: f64,
}

impl ProbePhase {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn magnitude(&self) -> f64 {
        self.value.abs()
    }

    /// A nonzero kick, of either sign, signals even parity.
    pub fn is_even(&self) -> bool {
        self.magnitude() > 0.0
    }

    pub fn parity(&self) -> Parity {
        if self.is_even() {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcdOutcome {
    pub parity: Parity,
    pub probability: f64,
    /// Renormalized state, same register as the input; `None` if the
    /// outcome cannot occur.
    pub post_state: Option<PureState>,
}

pub fn probe_phase(pair: (Polarization, Polarization), model: &PcdModel) -> ProbePhase {
    use Polarization::{H, V};
    let value = match pair {
        (H, H) => model.theta(),
        (V, V) => -model.theta(),
        (H, V) | (V, H) => 0.0,
    };
    ProbePhase { value }
}

/// Parity-check measurement of qubits `q1` and `q2`. Returns the even
/// outcome first, then the odd one.
pub fn parity_measure(
    state: &PureState,
    q1: QubitIndex,
    q2: QubitIndex,
    model: &PcdModel,
) -> Result<[PcdOutcome; 2]> {
    if q1 == q2 {
        return Err(Error::invalid(format!("parity check needs two distinct qubits, got {} twice", q1.0)));
    }
    // range check up front so the loop below cannot fail halfway
    state.label_at(0, q1)?;
    state.label_at(0, q2)?;

    let zero = Complex64::new(0.0, 0.0);
    let len = state.amplitudes().len();
    let mut even = vec![zero; len];
    let mut odd = vec![zero; len];
    for (i, &a) in state.amplitudes().iter().enumerate() {
        let pair = (state.label_at(i, q1)?, state.label_at(i, q2)?);
        match probe_phase(pair, model).parity() {
            Parity::Even => even[i] = a,
            Parity::Odd => odd[i] = a,
        }
    }

    let n = state.num_qubits();
    Ok([outcome(Parity::Even, n, even), outcome(Parity::Odd, n, odd)])
}

fn outcome(parity: Parity, num_qubits: usize, amplitudes: Vec<Complex64>) -> PcdOutcome {
    let probability: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
    let post_state = (probability > ZERO_PROBABILITY)
        .then(|| PureState::from_amplitudes(num_qubits, amplitudes).expect("nonzero projection"));
    PcdOutcome { parity, probability, post_state }
}
