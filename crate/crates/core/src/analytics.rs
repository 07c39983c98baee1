//! Closed-form success probabilities, the parameter recursion and the
//! convergence sweep.
//!
//! Write `a = α²`, `b = β²`. One round succeeds with probability
//! `N·ab/(a + b)` and fails with `(a² + (N−1)b²)/(a + b)`. After `n`
//! rounds the total success probability is
//!
//! ```text
//! P(n) = N · Σ_{k=1..n} α^{2^k} β^{2^k} / ∏_{j=1..k} (α^{2^j} + β^{2^j})
//! ```
//!
//! which is bounded by `N·α²` when `α² ≤ β²`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::ecp::{recycle_params, WClassParams};
use crate::error::{Error, Result};

/// Tolerance used when deciding whether `α² ≤ β²`.
const REGIME_TOLERANCE: f64 = 1e-12;

/// A coefficient of the closed forms that can be shifted for negative-control runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coefficient {
    /// `N` in `N·ab/(a + b)`.
    EvenPrefactor,
    /// `N − 1` in `(a² + (N−1)b²)/(a + b)`.
    OddWeight,
    /// `N − 1` in the recycling norm `√(a² + (N−1)b²)`.
    RecycleWeight,
    /// `N` in front of the series.
    SeriesPrefactor,
}

impl Coefficient {
    pub const ALL: [Coefficient; 4] = [
        Coefficient::EvenPrefactor,
        Coefficient::OddWeight,
        Coefficient::RecycleWeight,
        Coefficient::SeriesPrefactor,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub coefficient: Coefficient,
    pub delta: f64,
}

/// The closed-form model, optionally with one coefficient shifted by a
/// fixed amount. [`ClosedForms::EXACT`] is the model used everywhere else.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClosedForms {
    perturbation: Option<Perturbation>,
}

impl ClosedForms {
    pub const EXACT: ClosedForms = ClosedForms { perturbation: None };

    pub fn perturbed(coefficient: Coefficient, delta: f64) -> Self {
        Self { perturbation: Some(Perturbation { coefficient, delta }) }
    }

    pub fn perturbation(&self) -> Option<Perturbation> {
        self.perturbation
    }

    fn coefficient(&self, which: Coefficient, nominal: f64) -> f64 {
        match self.perturbation {
            Some(p) if p.coefficient == which => nominal + p.delta,
            _ => nominal,
        }
    }

    pub fn p_even(&self, p: &WClassParams) -> f64 {
        let (a, b) = (p.alpha2(), p.beta2());
        let n = self.coefficient(Coefficient::EvenPrefactor, p.n_photons() as f64);
        n * a * b / (a + b)
    }

    pub fn p_odd(&self, p: &WClassParams) -> f64 {
        let (a, b) = (p.alpha2(), p.beta2());
        let w = self.coefficient(Coefficient::OddWeight, (p.n_photons() - 1) as f64);
        (a * a + w * b * b) / (a + b)
    }

    /// Recycled `(α′, β′)`. Returned as raw numbers: a perturbed model need
    /// not satisfy the normalization constraint.
    pub fn recycle(&self, p: &WClassParams) -> (f64, f64) {
        let (a, b) = (p.alpha2(), p.beta2());
        let w = self.coefficient(Coefficient::RecycleWeight, (p.n_photons() - 1) as f64);
        let norm = (a * a + w * b * b).sqrt();
        (a / norm, b / norm)
    }

    /// Summands `k = 1..=n` of the total-success series.
    pub fn series_terms(&self, p: &WClassParams, n: usize) -> Result<Vec<SeriesTerm>> {
        if n < 1 {
            return Err(Error::invalid("series needs at least one round"));
        }
        let prefactor = self.coefficient(Coefficient::SeriesPrefactor, p.n_photons() as f64);
        let (a, b) = (p.alpha2(), p.beta2());
        // Factor the larger of a, b out of every power so that no
        // intermediate under- or overflows:
        //   term_k = N·max·r^{2^{k−1}} / ∏_{j<k} (1 + r^{2^j}),  r = min/max.
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let ratio = lo / hi;

        let mut power = ratio; // r^{2^{k−1}}
        let mut denominator = 1.0;
        let mut terms = Vec::with_capacity(n);
        for k in 1..=n {
            denominator *= 1.0 + power;
            terms.push(SeriesTerm { k, value: prefactor * hi * power / denominator });
            power *= power;
        }
        Ok(terms)
    }

    pub fn total_success(&self, p: &WClassParams, n: usize) -> Result<f64> {
        Ok(self.series_terms(p, n)?.iter().map(|t| t.value).sum())
    }
}

/// One summand of the total-success series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub k: usize,
    pub value: f64,
}

/// Even-parity (success) probability of a single round.
pub fn p_even_formula(p: &WClassParams) -> f64 {
    ClosedForms::EXACT.p_even(p)
}

/// Odd-parity probability of a single round.
pub fn p_odd_formula(p: &WClassParams) -> f64 {
    ClosedForms::EXACT.p_odd(p)
}

/// Second-round success and failure probabilities `(P₂, P′₂)`, conditioned
/// on a first-round failure:
///
/// ```text
/// P₂  = N a²b² / ((a² + b²)(a² + (N−1)b²))
/// P′₂ = (a⁴ + (N−1)b⁴) / ((a² + b²)(a² + (N−1)b²))
/// ```
pub fn round_k_probs(p: &WClassParams) -> (f64, f64) {
    let (a, b) = (p.alpha2(), p.beta2());
    let w = (p.n_photons() - 1) as f64;
    let (a2, b2) = (a * a, b * b);
    let denominator = (a2 + b2) * (a2 + w * b2);
    (
        p.n_photons() as f64 * a2 * b2 / denominator,
        (a2 * a2 + w * b2 * b2) / denominator,
    )
}

pub fn series_terms(p: &WClassParams, n: usize) -> Result<Vec<SeriesTerm>> {
    ClosedForms::EXACT.series_terms(p, n)
}

/// Probability of ending with a standard W state within `n` rounds.
pub fn total_success(p: &WClassParams, n: usize) -> Result<f64> {
    ClosedForms::EXACT.total_success(p, n)
}

/// Same quantity as [`total_success`], accumulated round by round through
/// [`recycle_params`].
pub fn total_success_by_recursion(p: &WClassParams, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::invalid("series needs at least one round"));
    }
    let mut current = *p;
    let mut reach = 1.0;
    let mut total = 0.0;
    for _ in 0..n {
        total += reach * p_even_formula(&current);
        reach *= p_odd_formula(&current);
        current = recycle_params(&current)?;
    }
    Ok(total)
}

/// `N·α²` when `α² ≤ β²`; `None` outside that regime, where no limit is claimed.
pub fn theoretical_limit(p: &WClassParams) -> Option<f64> {
    (p.alpha2() <= p.beta2() + REGIME_TOLERANCE).then(|| p.n_photons() as f64 * p.alpha2())
}

/// Literal three-photon formulas, kept separate from the `N`-photon path
/// so the two can be compared.
pub mod three_photon {
    use crate::ecp::WClassParams;

    fn squares(p: &WClassParams) -> (f64, f64) {
        assert_eq!(p.n_photons(), 3, "three-photon formula applied to N = {}", p.n_photons());
        (p.alpha2(), p.beta2())
    }

    /// `3α²β²/(α² + β²)`
    pub fn p1(p: &WClassParams) -> f64 {
        let (a, b) = squares(p);
        3.0 * a * b / (a + b)
    }

    /// `(α⁴ + 2β⁴)/(α² + β²)`
    pub fn p1_odd(p: &WClassParams) -> f64 {
        let (a, b) = squares(p);
        (a * a + 2.0 * b * b) / (a + b)
    }

    /// `3α⁴β⁴/((α⁴ + β⁴)(α⁴ + 2β⁴))`
    pub fn p2(p: &WClassParams) -> f64 {
        let (a, b) = squares(p);
        let (a2, b2) = (a * a, b * b);
        3.0 * a2 * b2 / ((a2 + b2) * (a2 + 2.0 * b2))
    }

    /// `(α⁸ + 2β⁸)/((α⁴ + β⁴)(α⁴ + 2β⁴))`
    pub fn p2_odd(p: &WClassParams) -> f64 {
        let (a, b) = squares(p);
        let (a2, b2) = (a * a, b * b);
        (a2 * a2 + 2.0 * b2 * b2) / ((a2 + b2) * (a2 + 2.0 * b2))
    }

    /// `(α², β²)/√(α⁴ + 2β⁴)`
    pub fn recycle(p: &WClassParams) -> (f64, f64) {
        let (a, b) = squares(p);
        let norm = (a * a + 2.0 * b * b).sqrt();
        (a / norm, b / norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "F")]
    pub f: f64,
    pub alpha2: f64,
    pub n: usize,
    #[serde(rename = "P")]
    pub p: f64,
    pub limit: f64,
}

/// `P(n)` against `F = N·α²`, rows sorted by `(F, n)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub n_photons: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Rows for a single `F`, in increasing `n`.
    pub fn curve(&self, f: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.f == f)
    }
}

/// Evenly spaced `F` values from `start` to `end` inclusive. Each value is
/// computed as `start + i·step` and snapped to 12 decimals so that, e.g.,
/// `0.05 + 19·0.05` is exactly `1.0`.
pub fn f_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && end.is_finite() && step.is_finite()) || step <= 0.0 || end < start {
        return Err(Error::invalid(format!(
            "invalid F range {start}..={end} step {step}"
        )));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

pub fn sweep_curve(f_grid: &[f64], n_max: usize, n_photons: usize) -> Result<SweepTable> {
    if n_max < 1 {
        return Err(Error::invalid("sweep needs at least one round"));
    }
    if let Some(bad) = f_grid.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::invalid(format!("F = {bad} lies outside (0, 1]")));
    }
    let mut grid = f_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));

    let mut rows = Vec::with_capacity(grid.len() * n_max);
    for f in grid {
        let alpha2 = f / n_photons as f64;
        let params = WClassParams::from_alpha2(alpha2, n_photons)?;
        let limit = theoretical_limit(&params).unwrap_or(f64::NAN);
        let mut p = 0.0;
        for term in series_terms(&params, n_max)? {
            p += term.value;
            rows.push(SweepRow { f, alpha2, n: term.k, p, limit });
        }
    }
    Ok(SweepTable { n_photons, rows })
}
