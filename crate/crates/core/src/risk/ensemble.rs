//! Parallel evaluation of a commitment schedule over a scenario ensemble.
//! Scenarios are independent day simulations over shared immutable inputs,
//! so the result list is identical for any worker count.

use super::simulate::{simulate_day, DayResult};
use super::{PipelineConfig, RiskError, DAY_STEPS};
use crate::grid::{Case, Ptdf};
use crate::market::{CommitmentSchedule, Forecast};
use crate::scenario::ScenarioSet;
use rayon::prelude::*;

/// Per-scenario outcome; failures carry the error text and do not abort
/// the rest of the ensemble.
#[derive(Debug)]
pub struct EnsembleOutcome {
    pub scenario: usize,
    pub result: Result<DayResult, String>,
}

/// Map a scenario's columns onto system forecasts: the column named `load`
/// is the system load; every other column is a renewable injection and is
/// summed into the system renewable total.
pub fn scenario_day_forecasts(set: &ScenarioSet, s: usize) -> Result<Vec<Forecast>, RiskError> {
    let load_col = set
        .assets
        .iter()
        .position(|a| a == "load")
        .ok_or_else(|| RiskError::InvalidInput("scenario set needs a 'load' column".into()))?;
    Ok((0..set.t_steps())
        .map(|t| {
            let load = set.value(s, t, load_col);
            let renewable: f64 = (0..set.num_assets())
                .filter(|&a| a != load_col)
                .map(|a| set.value(s, t, a))
                .sum();
            Forecast { load, renewable }
        })
        .collect())
}

/// Evaluate every scenario of `scenarios` as one simulated day.
pub fn evaluate_ensemble(
    case: &Case,
    ptdf: &Ptdf,
    commitments: &CommitmentSchedule,
    scenarios: &ScenarioSet,
    config: &PipelineConfig,
    workers: usize,
) -> Result<Vec<EnsembleOutcome>, RiskError> {
    config.validate()?;
    if scenarios.t_steps() != DAY_STEPS {
        return Err(RiskError::InvalidInput(format!(
            "scenario horizon is {} steps, expected a 1-day horizon of {DAY_STEPS}",
            scenarios.t_steps()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RiskError::InvalidInput(format!("thread pool: {e}")))?;
    let outcomes: Vec<EnsembleOutcome> = pool.install(|| {
        (0..scenarios.num_scenarios())
            .into_par_iter()
            .map(|s| {
                let result = scenario_day_forecasts(scenarios, s)
                    .and_then(|actuals| simulate_day(case, ptdf, commitments, &actuals, config))
                    .map_err(|e| e.to_string());
                EnsembleOutcome { scenario: s, result }
            })
            .collect()
    });
    Ok(outcomes)
}
