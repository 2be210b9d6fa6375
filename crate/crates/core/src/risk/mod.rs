//! Risk-estimation pipeline: day-long rolling-horizon simulation
//! (commitments -> LAC -> RT-SCED), parallel evaluation over scenario
//! ensembles, and aggregation into CVaR / adverse-event reports.

mod ensemble;
mod report;
mod simulate;

pub use ensemble::{evaluate_ensemble, scenario_day_forecasts, EnsembleOutcome};
pub use report::{build_risk_report, MetricSummary, RiskReport};
pub use simulate::{simulate_day, DayResult, IntervalSummary, ViolationBreakdown};

use crate::market::PenaltyPrices;
use crate::stochastic::RiskConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("interval {interval}: {source}")]
    AtInterval {
        interval: usize,
        #[source]
        source: crate::market::MarketError,
    },
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Stochastic(#[from] crate::stochastic::StochasticError),
}

/// Intervals in a simulated day at the 5-minute market cadence.
pub const DAY_STEPS: usize = 288;
pub const DAY_MINUTES: u32 = 1440;

fn default_budgets() -> [f64; 4] {
    [20.0, 40.0, 10.0, 2.0]
}
fn default_lac_cadence() -> u32 {
    15
}
fn default_lac_window() -> u32 {
    3
}
fn default_sced_cadence() -> u32 {
    5
}
fn default_lad_horizon() -> usize {
    12
}
fn default_milp_gap() -> f64 {
    1e-4
}

/// Pipeline configuration. Stage budgets are wall-clock solver limits in
/// minutes for (DA-SCUC, FRAC, LAC, SCED); at desk scale they never bind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub stage_budgets_min: [f64; 4],
    pub lac_cadence_min: u32,
    pub lac_window_hours: u32,
    pub sced_cadence_min: u32,
    pub lad_enabled: bool,
    pub lad_horizon: usize,
    pub penalties: PenaltyPrices,
    pub risk: RiskConfig,
    /// Relative MILP gap for the pipeline's commitment solves.
    pub milp_gap: f64,
    /// Standard deviation of multiplicative noise applied to the load
    /// forecast seen by LAC (0 disables the hook).
    pub forecast_noise_sd: f64,
    pub noise_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stage_budgets_min: default_budgets(),
            lac_cadence_min: default_lac_cadence(),
            lac_window_hours: default_lac_window(),
            sced_cadence_min: default_sced_cadence(),
            lad_enabled: false,
            lad_horizon: default_lad_horizon(),
            penalties: PenaltyPrices::default(),
            risk: RiskConfig::default(),
            milp_gap: default_milp_gap(),
            forecast_noise_sd: 0.0,
            noise_seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), RiskError> {
        if self.stage_budgets_min.iter().any(|&b| !(b > 0.0)) {
            return Err(RiskError::InvalidInput("stage budgets must be positive".into()));
        }
        for (name, cadence) in
            [("lac_cadence_min", self.lac_cadence_min), ("sced_cadence_min", self.sced_cadence_min)]
        {
            if cadence == 0 || DAY_MINUTES % cadence != 0 {
                return Err(RiskError::InvalidInput(format!(
                    "{name} = {cadence} does not divide the day"
                )));
            }
        }
        if self.sced_cadence_min != 5 {
            return Err(RiskError::InvalidInput("the real-time market runs on 5 minutes".into()));
        }
        if self.lac_cadence_min != 15 {
            return Err(RiskError::InvalidInput("LAC runs on a 15-minute cadence".into()));
        }
        if self.lad_horizon != 12 {
            return Err(RiskError::InvalidInput("LAD horizon is twelve 5-minute periods".into()));
        }
        if !(self.milp_gap >= 0.0) {
            return Err(RiskError::InvalidInput("milp_gap must be nonnegative".into()));
        }
        if self.forecast_noise_sd < 0.0 {
            return Err(RiskError::InvalidInput("forecast_noise_sd must be >= 0".into()));
        }
        self.risk.validate()?;
        Ok(())
    }

    pub fn scuc_budget_seconds(&self) -> f64 {
        self.stage_budgets_min[0] * 60.0
    }
    pub fn frac_budget_seconds(&self) -> f64 {
        self.stage_budgets_min[1] * 60.0
    }
    pub fn lac_budget_seconds(&self) -> f64 {
        self.stage_budgets_min[2] * 60.0
    }
    pub fn sced_budget_seconds(&self) -> f64 {
        self.stage_budgets_min[3] * 60.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_with_paper_budgets() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.stage_budgets_min, [20.0, 40.0, 10.0, 2.0]);
        assert_eq!(cfg.lac_cadence_min, 15);
        assert_eq!(cfg.lac_window_hours, 3);
        assert_eq!(cfg.sced_cadence_min, 5);
        assert_eq!(cfg.lad_horizon, 12);
    }

    #[test]
    fn bad_cadence_rejected() {
        let mut cfg = PipelineConfig::default();
        cfg.lac_cadence_min = 7;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_round_trip_with_defaults() {
        let cfg: PipelineConfig = serde_json::from_str("{}").unwrap();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: PipelineConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
