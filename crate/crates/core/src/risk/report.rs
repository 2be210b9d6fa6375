//! Aggregation of day-simulation results into a risk report: expectations,
//! CVaR tails, adverse-event probability, and expected violation cost.

use super::simulate::DayResult;
use super::RiskError;
use crate::stochastic::{cvar, RiskConfig};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub cvar: f64,
}

fn summarize(values: &[f64], alpha: f64) -> MetricSummary {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let cvar = cvar(values, alpha).expect("nonempty, valid alpha");
    MetricSummary { mean, cvar }
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub n_scenarios: usize,
    pub alpha: f64,
    pub total_cost: MetricSummary,
    pub violation_cost: MetricSummary,
    pub peak_violation_mw: MetricSummary,
    /// Fraction of scenarios whose peak transmission violation exceeds the
    /// configured threshold.
    pub adverse_probability: f64,
    pub expected_violation_cost: f64,
}

impl RiskReport {
    /// Human-readable fixed-width table.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "risk report over {} scenarios (alpha = {})\n",
            self.n_scenarios, self.alpha
        ));
        out.push_str(&format!("{:<24} {:>16} {:>16}\n", "metric", "mean", "cvar"));
        for (name, m) in [
            ("total_cost_usd", &self.total_cost),
            ("violation_cost_usd", &self.violation_cost),
            ("peak_violation_mw", &self.peak_violation_mw),
        ] {
            out.push_str(&format!("{:<24} {:>16.4} {:>16.4}\n", name, m.mean, m.cvar));
        }
        out.push_str(&format!(
            "{:<24} {:>16.4}\n",
            "adverse_probability", self.adverse_probability
        ));
        out.push_str(&format!(
            "{:<24} {:>16.4}\n",
            "expected_violation_usd", self.expected_violation_cost
        ));
        out
    }
}

/// Aggregate day results into a risk report.
pub fn build_risk_report(results: &[DayResult], risk: &RiskConfig) -> Result<RiskReport, RiskError> {
    if results.is_empty() {
        return Err(RiskError::EmptyEnsemble);
    }
    risk.validate()?;
    let totals: Vec<f64> = results.iter().map(|r| r.total_cost).collect();
    let violation_costs: Vec<f64> = results.iter().map(|r| r.violation_cost).collect();
    let peaks: Vec<f64> = results.iter().map(|r| r.peak_violation_mw()).collect();
    let adverse = results
        .iter()
        .filter(|r| r.peak_violation_mw() > risk.violation_threshold_mw)
        .count() as f64
        / results.len() as f64;
    Ok(RiskReport {
        n_scenarios: results.len(),
        alpha: risk.alpha,
        total_cost: summarize(&totals, risk.alpha),
        violation_cost: summarize(&violation_costs, risk.alpha),
        peak_violation_mw: summarize(&peaks, risk.alpha),
        adverse_probability: adverse,
        expected_violation_cost: violation_costs.iter().sum::<f64>() / results.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::super::simulate::{DayResult, IntervalSummary, ViolationBreakdown};
    use super::*;

    fn day(total: f64, peak_trans: f64, violation_cost: f64) -> DayResult {
        DayResult {
            intervals: vec![IntervalSummary {
                t_min: 0,
                cost: total,
                violation_cost,
                violation: ViolationBreakdown::default(),
            }],
            commitment_cost: 0.0,
            total_cost: total,
            violation_cost,
            peak_violation: ViolationBreakdown {
                transmission_mw: peak_trans,
                balance_mw: 0.0,
                reserve_mw: 0.0,
            },
            commitment_steps: Vec::new(),
        }
    }

    #[test]
    fn adverse_probability_counts_threshold_exceedances() {
        let results: Vec<DayResult> = (0..10)
            .map(|i| day(100.0 + i as f64, if i < 3 { 5.0 } else { 0.0 }, 0.0))
            .collect();
        let report = build_risk_report(&results, &RiskConfig::default()).unwrap();
        assert!((report.adverse_probability - 0.3).abs() < 1e-12);
    }

    #[test]
    fn cvar_matches_sort_oracle() {
        let results: Vec<DayResult> =
            [1.0, 2.0, 3.0, 4.0].iter().map(|&c| day(c, 0.0, 0.0)).collect();
        let risk = RiskConfig { alpha: 0.5, ..Default::default() };
        let report = build_risk_report(&results, &risk).unwrap();
        assert!((report.total_cost.cvar - 3.5).abs() < 1e-12);
        assert!((report.total_cost.mean - 2.5).abs() < 1e-12);
        assert!(report.total_cost.cvar >= report.total_cost.mean);
    }

    #[test]
    fn degenerate_ensemble_collapses() {
        let results: Vec<DayResult> = (0..5).map(|_| day(7.0, 1.0, 2.0)).collect();
        let report = build_risk_report(&results, &RiskConfig::default()).unwrap();
        assert_eq!(report.total_cost.mean, 7.0);
        assert_eq!(report.total_cost.cvar, 7.0);
        assert_eq!(report.adverse_probability, 1.0);
    }

    #[test]
    fn permutation_invariance() {
        let a: Vec<DayResult> = [5.0, 1.0, 9.0, 2.0].iter().map(|&c| day(c, c, c)).collect();
        let b: Vec<DayResult> = [9.0, 2.0, 5.0, 1.0].iter().map(|&c| day(c, c, c)).collect();
        let risk = RiskConfig { alpha: 0.5, ..Default::default() };
        let ra = build_risk_report(&a, &risk).unwrap();
        let rb = build_risk_report(&b, &risk).unwrap();
        assert_eq!(ra.total_cost.cvar.to_bits(), rb.total_cost.cvar.to_bits());
        assert_eq!(ra.total_cost.mean.to_bits(), rb.total_cost.mean.to_bits());
        assert_eq!(ra.adverse_probability, rb.adverse_probability);
    }

    #[test]
    fn empty_ensemble_rejected() {
        assert!(matches!(
            build_risk_report(&[], &RiskConfig::default()),
            Err(RiskError::EmptyEnsemble)
        ));
    }
}
