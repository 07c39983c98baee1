//! Cross-validation of the state-vector protocol against the closed forms.

use serde::Serialize;

use super::{iterate, run_round_exact, WClassParams};
use crate::analytics::ClosedForms;
use crate::error::Result;
use crate::pcd::{Parity, PcdModel};

/// Every state-vector/closed-form discrepancy must stay below this.
pub const ROUND_TOLERANCE: f64 = 1e-10;

/// Absolute differences for one parameter point. All fields are `|Δ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundCheck {
    pub params: WClassParams,
    pub p_even: f64,
    pub p_odd: f64,
    /// `|p_even + p_odd − 1|` from the state vector alone.
    pub completeness: f64,
    pub recycle_alpha: f64,
    pub recycle_beta: f64,
    /// `1 − F(success state, |W_N⁺⟩)`, worst X outcome.
    pub success_fidelity: f64,
    /// `1 − F(odd state, recycled W-class state)`, worst X outcome.
    pub recycle_fidelity: f64,
    /// `max |P(±x | parity) − 1/2|`.
    pub x_symmetry: f64,
}

impl RoundCheck {
    pub fn deltas(&self) -> [(&'static str, f64); 8] {
        [
            ("p_even", self.p_even),
            ("p_odd", self.p_odd),
            ("completeness", self.completeness),
            ("recycle_alpha", self.recycle_alpha),
            ("recycle_beta", self.recycle_beta),
            ("success_fidelity", self.success_fidelity),
            ("recycle_fidelity", self.recycle_fidelity),
            ("x_symmetry", self.x_symmetry),
        ]
    }

    pub fn max_delta(&self) -> f64 {
        self.deltas().iter().map(|&(_, d)| d).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.deltas().iter().all(|&(_, d)| d < tol)
    }
}

pub fn verify_round_against_formulas(params: &WClassParams, pcd: &PcdModel) -> Result<RoundCheck> {
    verify_round_with(params, pcd, &ClosedForms::EXACT)
}

/// Like [`verify_round_against_formulas`] but against an arbitrary set of
/// closed forms, e.g. a deliberately perturbed one.
pub fn verify_round_with(
    params: &WClassParams,
    pcd: &PcdModel,
    forms: &ClosedForms,
) -> Result<RoundCheck> {
    let round = run_round_exact(params, pcd)?;
    let (alpha, beta) = forms.recycle(params);

    let x_symmetry = [Parity::Even, Parity::Odd]
        .into_iter()
        .filter(|&parity| match parity {
            Parity::Even => round.p_even > 0.0,
            Parity::Odd => round.p_odd > 0.0,
        })
        .filter_map(|parity| round.x_outcome_probs(parity))
        .map(|(plus, minus)| (plus - 0.5).abs().max((minus - 0.5).abs()))
        .fold(0.0, f64::max);

    Ok(RoundCheck {
        params: *params,
        p_even: (round.p_even - forms.p_even(params)).abs(),
        p_odd: (round.p_odd - forms.p_odd(params)).abs(),
        completeness: (round.p_even + round.p_odd - 1.0).abs(),
        recycle_alpha: (round.recycle_params.alpha() - alpha).abs(),
        recycle_beta: (round.recycle_params.beta() - beta).abs(),
        success_fidelity: round.min_fidelity(Parity::Even).map_or(0.0, |f| 1.0 - f),
        recycle_fidelity: round.min_fidelity(Parity::Odd).map_or(1.0, |f| 1.0 - f),
        x_symmetry,
    })
}

/// Worst discrepancy of one named check over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub max_delta: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub points: usize,
    pub max_rounds: usize,
    pub checks: Vec<CheckSummary>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `α² ∈ {0.05, 0.10, …, 0.30}` for `N ∈ {3, 4, 5}`.
pub fn acceptance_grid() -> Vec<WClassParams> {
    let mut grid = Vec::with_capacity(18);
    for n in 3..=5 {
        for i in 1..=6 {
            let alpha2 = i as f64 * 0.05;
            grid.push(WClassParams::from_alpha2(alpha2, n).expect("grid point is valid"));
        }
    }
    grid
}

/// Runs [`verify_round_with`] at every grid point and compares the
/// state-vector run tree with the closed-form series for `n ≤ max_rounds`.
pub fn verify_grid(
    grid: &[WClassParams],
    max_rounds: usize,
    pcd: &PcdModel,
    forms: &ClosedForms,
) -> Result<VerificationReport> {
    let mut worst: Vec<(&'static str, f64)> = Vec::new();
    let mut record = |name: &'static str, delta: f64| match worst.iter_mut().find(|(n, _)| *n == name) {
        Some((_, d)) => *d = d.max(delta),
        None => worst.push((name, delta)),
    };

    for params in grid {
        let check = verify_round_with(params, pcd, forms)?;
        for (name, delta) in check.deltas() {
            record(name, delta);
        }

        let tree = iterate(params, max_rounds, pcd)?;
        let mut partial = 0.0;
        for (k, term) in tree.per_round_success.iter().enumerate() {
            partial += term;
            let closed = forms.total_success(params, k + 1)?;
            record("series", (partial - closed).abs());
        }
    }

    let checks = worst
        .into_iter()
        .map(|(name, max_delta)| CheckSummary {
            name: name.to_string(),
            max_delta,
            tolerance: ROUND_TOLERANCE,
            passed: max_delta < ROUND_TOLERANCE,
        })
        .collect();
    Ok(VerificationReport { points: grid.len(), max_rounds, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::Coefficient;

    #[test]
    fn single_point_passes() {
        let p = WClassParams::from_alpha2(0.2, 3).unwrap();
        let check = verify_round_against_formulas(&p, &PcdModel::default()).unwrap();
        assert!(check.passes(ROUND_TOLERANCE), "{check:?}");
    }

    #[test]
    fn symmetric_point_recycles_exactly() {
        let third = (1.0f64 / 3.0).sqrt();
        let p = WClassParams::new(third, third, 3).unwrap();
        let check = verify_round_against_formulas(&p, &PcdModel::default()).unwrap();
        assert!(check.recycle_alpha < 1e-15 && check.recycle_beta < 1e-15, "{check:?}");
    }

    #[test]
    fn grid_passes() {
        let report =
            verify_grid(&acceptance_grid(), 6, &PcdModel::default(), &ClosedForms::EXACT).unwrap();
        assert_eq!(report.points, 18);
        assert!(report.passed(), "{report:#?}");
        assert!(report.check("series").is_some());
    }

    #[test]
    fn perturbed_forms_are_caught() {
        for coefficient in Coefficient::ALL {
            let forms = ClosedForms::perturbed(coefficient, 1e-6);
            let report = verify_grid(&acceptance_grid(), 6, &PcdModel::default(), &forms).unwrap();
            assert!(!report.passed(), "{coefficient:?} slipped through");
        }
    }
}
