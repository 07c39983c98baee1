//! Dense pure-state engine for polarization qubits.
//!
//! Qubits are addressed left to right in the order the kets are written:
//! qubit 0 is the leftmost label. In the amplitude vector qubit 0 is the
//! most significant bit, `H` is bit value 0 and `V` is bit value 1, so
//! `|HV⟩` lives at index 1 and `|VV…V⟩` at the last index.
//!
//! States are immutable values: every operation returns a new state. The
//! global phase is never normalized away, compare states with [`fidelity`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ecp::WClassParams;
use crate::error::{Error, Result};

/// Largest register the engine will allocate (N = 24 data photons plus one ancilla).
pub const MAX_QUBITS: usize = 25;

/// Outcome probabilities at or below this are reported as impossible and
/// carry no post-measurement state.
pub const ZERO_PROBABILITY: f64 = 1e-24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    fn from_bit(bit: bool) -> Self {
        if bit {
            Polarization::V
        } else {
            Polarization::H
        }
    }

    fn bit(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

/// Relative sign of a standard W state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// `{|H⟩, |V⟩}`
    Z,
    /// `{|+x⟩, |−x⟩}` with `|±x⟩ = (|H⟩ ± |V⟩)/√2`
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasLabel {
    H,
    V,
    PlusX,
    MinusX,
}

/// Position of a photon inside a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitIndex(pub usize);

impl QubitIndex {
    fn checked(self, num_qubits: usize) -> Result<usize> {
        if self.0 < num_qubits {
            Ok(self.0)
        } else {
            Err(Error::QubitOutOfRange { index: self.0, num_qubits })
        }
    }
}

impl From<usize> for QubitIndex {
    fn from(index: usize) -> Self {
        QubitIndex(index)
    }
}

/// A normalized pure state of `num_qubits` polarization qubits.
///
/// A zero-qubit state (a single unit amplitude) only arises as the
/// post-measurement state of a one-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// One of the two outcomes of a single-qubit projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasOutcome {
    pub label: MeasLabel,
    pub probability: f64,
    /// Renormalized state of the remaining qubits, `None` for an impossible outcome.
    pub post_state: Option<PureState>,
}

impl MeasOutcome {
    pub fn is_possible(&self) -> bool {
        self.post_state.is_some()
    }
}

#[inline]
fn bit_position(num_qubits: usize, qubit: usize) -> usize {
    num_qubits - 1 - qubit
}

/// Index into the full register for reduced index `reduced` with the bit at
/// `pos` set to `bit`.
#[inline]
fn insert_bit(reduced: usize, pos: usize, bit: usize) -> usize {
    let low = reduced & ((1 << pos) - 1);
    let high = (reduced >> pos) << (pos + 1);
    high | (bit << pos) | low
}

fn check_size(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_QUBITS {
        Err(Error::TooManyQubits(num_qubits))
    } else {
        Ok(())
    }
}

impl PureState {
    /// Builds a state from raw amplitudes and rescales it to unit norm.
    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_size(num_qubits)?;
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for {} qubits, got {}",
                1usize << num_qubits,
                num_qubits,
                amplitudes.len()
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if !norm_sqr.is_finite() || norm_sqr == 0.0 {
            return Err(Error::invalid("state has zero or non-finite norm"));
        }
        Ok(Self::renormalized(num_qubits, amplitudes, norm_sqr))
    }

    /// Real-amplitude convenience constructor.
    pub fn from_reals(num_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(
            num_qubits,
            amplitudes.iter().map(|&re| Complex64::new(re, 0.0)).collect(),
        )
    }

    fn renormalized(num_qubits: usize, mut amplitudes: Vec<Complex64>, norm_sqr: f64) -> Self {
        // already-unit vectors are kept bit-for-bit
        if (norm_sqr - 1.0).abs() > 4.0 * f64::EPSILON {
            let scale = norm_sqr.sqrt().recip();
            amplitudes.iter_mut().for_each(|a| *a *= scale);
        }
        Self { num_qubits, amplitudes }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Amplitude of the basis string `labels`, which must name every qubit.
    pub fn amplitude_of(&self, labels: &[Polarization]) -> Result<Complex64> {
        if labels.len() != self.num_qubits {
            return Err(Error::DimensionMismatch { left: labels.len(), right: self.num_qubits });
        }
        Ok(self.amplitudes[basis_index(labels)])
    }

    /// Polarization of `qubit` in basis string `index`.
    pub fn label_at(&self, index: usize, qubit: QubitIndex) -> Result<Polarization> {
        let q = qubit.checked(self.num_qubits)?;
        Ok(Polarization::from_bit(index >> bit_position(self.num_qubits, q) & 1 == 1))
    }

    /// Applies `σ_z = |H⟩⟨H| − |V⟩⟨V|` to `qubit`.
    pub fn phase_flip(&self, qubit: QubitIndex) -> Result<Self> {
        let q = qubit.checked(self.num_qubits)?;
        let mask = 1 << bit_position(self.num_qubits, q);
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| if i & mask != 0 { -a } else { a })
            .collect();
        Ok(Self { num_qubits: self.num_qubits, amplitudes })
    }

    /// Projective measurement of `qubit` in `basis`.
    ///
    /// Both outcomes are returned, in the order `H, V` or `+x, −x`. The
    /// measured qubit is removed from each post-measurement state.
    pub fn measure(&self, qubit: QubitIndex, basis: Basis) -> Result<[MeasOutcome; 2]> {
        let n = self.num_qubits;
        let q = qubit.checked(n)?;
        let pos = bit_position(n, q);
        let half = 1 << (n - 1);

        let mut first = Vec::with_capacity(half);
        let mut second = Vec::with_capacity(half);
        for r in 0..half {
            let a0 = self.amplitudes[insert_bit(r, pos, 0)];
            let a1 = self.amplitudes[insert_bit(r, pos, 1)];
            match basis {
                Basis::Z => {
                    first.push(a0);
                    second.push(a1);
                }
                Basis::X => {
                    first.push((a0 + a1) * FRAC_1_SQRT_2);
                    second.push((a0 - a1) * FRAC_1_SQRT_2);
                }
            }
        }

        let labels = match basis {
            Basis::Z => [MeasLabel::H, MeasLabel::V],
            Basis::X => [MeasLabel::PlusX, MeasLabel::MinusX],
        };
        Ok([
            projected_outcome(labels[0], n - 1, first),
            projected_outcome(labels[1], n - 1, second),
        ])
    }
}

/// Wraps an unnormalized projected vector as a measurement outcome.
pub(crate) fn projected_outcome(
    label: MeasLabel,
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
) -> MeasOutcome {
    let probability: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
    let post_state = (probability > ZERO_PROBABILITY)
        .then(|| PureState::renormalized(num_qubits, amplitudes, probability));
    MeasOutcome { label, probability, post_state }
}

impl fmt::Display for PureState {
    /// Lists the nonzero terms as `(re+imi)|HV…⟩`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({a})|{}⟩", ket_label(i, self.num_qubits))?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Renders basis index `index` of an `num_qubits` register as `HHV…`.
pub fn ket_label(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| if index >> bit_position(num_qubits, q) & 1 == 1 { 'V' } else { 'H' })
        .collect()
}

fn basis_index(labels: &[Polarization]) -> usize {
    labels.iter().fold(0, |acc, p| (acc << 1) | p.bit())
}

/// Computational basis state for the label sequence, leftmost label first.
pub fn basis_state(labels: &[Polarization]) -> Result<PureState> {
    if labels.is_empty() {
        return Err(Error::invalid("basis state needs at least one label"));
    }
    check_size(labels.len())?;
    let mut amplitudes = vec![ZERO; 1 << labels.len()];
    amplitudes[basis_index(labels)] = ONE;
    Ok(PureState { num_qubits: labels.len(), amplitudes })
}

/// `a ⊗ b`, with the qubits of `a` to the left.
pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState> {
    let num_qubits = a.num_qubits + b.num_qubits;
    check_size(num_qubits)?;
    let amplitudes = a
        .amplitudes
        .iter()
        .flat_map(|&x| b.amplitudes.iter().map(move |&y| x * y))
        .collect();
    Ok(PureState { num_qubits, amplitudes })
}

/// Basis index with a single `V` at `qubit` of an `n`-qubit register.
fn single_excitation(n: usize, qubit: usize) -> usize {
    1 << bit_position(n, qubit)
}

/// Partially entangled W-class state
/// `α|H…HV⟩ + β(|H…HVH⟩ + … + |VH…HH⟩)`.
///
/// The last qubit is Alice's: it carries the `α` excitation.
pub fn w_class_state(params: &WClassParams) -> Result<PureState> {
    let n = params.n_photons();
    check_size(n)?;
    let mut amplitudes = vec![ZERO; 1 << n];
    amplitudes[single_excitation(n, n - 1)] = Complex64::new(params.alpha(), 0.0);
    for q in 0..n - 1 {
        amplitudes[single_excitation(n, q)] = Complex64::new(params.beta(), 0.0);
    }
    let norm_sqr = amplitudes.iter().map(Complex64::norm_sqr).sum();
    Ok(PureState::renormalized(n, amplitudes, norm_sqr))
}

/// Standard `n`-qubit W state. [`Sign::Minus`] negates the `n − 1` terms
/// in which Alice's (last) qubit is `H`.
pub fn w_state(n: usize, sign: Sign) -> Result<PureState> {
    if n < 2 {
        return Err(Error::invalid(format!("W state needs at least 2 qubits, got {n}")));
    }
    check_size(n)?;
    let amp = (n as f64).sqrt().recip();
    let rest = match sign {
        Sign::Plus => amp,
        Sign::Minus => -amp,
    };
    let mut amplitudes = vec![ZERO; 1 << n];
    amplitudes[single_excitation(n, n - 1)] = Complex64::new(amp, 0.0);
    for q in 0..n - 1 {
        amplitudes[single_excitation(n, q)] = Complex64::new(rest, 0.0);
    }
    Ok(PureState { num_qubits: n, amplitudes })
}

/// `|⟨a|b⟩|²`, clamped to `[0, 1]`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch { left: a.num_qubits, right: b.num_qubits });
    }
    let overlap: Complex64 = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}
