//! Two-stage stochastic reliability commitment: extensive form, multi-cut
//! Benders (L-shaped) decomposition, the perfect-information benchmark,
//! value-of-perfect-information ratios, and CVaR machinery.

mod cvar;
mod tssp;

pub use cvar::{cvar, cvar_epigraph_terms, CostExpr, CvarHandles};
pub use tssp::{
    build_extensive_form, evaluate_commitment, mean_forecast, solve_benders,
    solve_extensive_form, solve_perfect_information, BendersIteration, StochasticSolution,
    TsspInstance,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StochasticError {
    #[error("empty input")]
    EmptyInput,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cost ordering violated: {0}")]
    OrderingViolation(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Market(#[from] crate::market::MarketError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
}

/// Risk configuration for CVaR reporting and risk-averse objectives.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct RiskConfig {
    /// CVaR tail fraction in (0, 1].
    pub alpha: f64,
    /// A day counts as adverse when peak transmission violation exceeds this.
    pub violation_threshold_mw: f64,
    /// Weight on CVaR terms in risk-averse objectives (0 = risk neutral).
    pub cvar_weight: f64,
}

impl Default for RiskConfig {
    fn default() -> Self {
        RiskConfig { alpha: 0.1, violation_threshold_mw: 0.0, cvar_weight: 0.0 }
    }
}

impl RiskConfig {
    pub fn validate(&self) -> Result<(), StochasticError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(StochasticError::InvalidInput(format!(
                "alpha {} outside (0, 1]",
                self.alpha
            )));
        }
        if self.cvar_weight < 0.0 {
            return Err(StochasticError::InvalidInput("cvar_weight must be >= 0".into()));
        }
        Ok(())
    }
}

/// Value of perfect information for the deterministic and stochastic
/// solutions relative to the wait-and-see benchmark: (cost - pi) / pi.
pub fn vpi(
    det_expected_cost: f64,
    stoch_expected_cost: f64,
    pi_expected_cost: f64,
) -> Result<(f64, f64), StochasticError> {
    if !(pi_expected_cost > 0.0) {
        return Err(StochasticError::InvalidInput(format!(
            "perfect-information cost {pi_expected_cost} must be positive"
        )));
    }
    if stoch_expected_cost > det_expected_cost + 1e-6 {
        return Err(StochasticError::OrderingViolation(format!(
            "stochastic cost {stoch_expected_cost} exceeds deterministic {det_expected_cost}"
        )));
    }
    if pi_expected_cost > stoch_expected_cost + 1e-6 {
        return Err(StochasticError::OrderingViolation(format!(
            "perfect-information cost {pi_expected_cost} exceeds stochastic {stoch_expected_cost}"
        )));
    }
    Ok((
        (det_expected_cost - pi_expected_cost) / pi_expected_cost,
        (stoch_expected_cost - pi_expected_cost) / pi_expected_cost,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vpi_arithmetic() {
        let (d, s) = vpi(110.0, 103.0, 100.0).unwrap();
        assert!((d - 0.10).abs() < 1e-12);
        assert!((s - 0.03).abs() < 1e-12);
    }

    #[test]
    fn vpi_degenerate_equal_costs() {
        let (d, s) = vpi(42.0, 42.0, 42.0).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn vpi_flags_ordering_violation() {
        assert!(matches!(
            vpi(100.0, 90.0, 95.0),
            Err(StochasticError::OrderingViolation(_))
        ));
        assert!(matches!(
            vpi(90.0, 100.0, 80.0),
            Err(StochasticError::OrderingViolation(_))
        ));
    }
}
