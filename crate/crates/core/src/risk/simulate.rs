//! Day-long rolling-horizon simulation: given day-ahead commitments and a
//! trajectory of actuals, run LAC every 15 minutes over a 3-hour window and
//! clear the real-time market every 5 minutes, threading the operating
//! state through the day.

use super::{PipelineConfig, RiskError, DAY_STEPS};
use crate::grid::{compute_loss_model, Case, Ptdf};
use crate::market::{
    run_lac, solve_lad, solve_sced, CommitmentSchedule, Forecast, ScedContext, ScucOptions,
    SystemState, LAC_STEP_MINUTES, LAC_WINDOW_STEPS,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

pub const SCED_STEP_MINUTES: u32 = 5;
const LAD_HORIZON: usize = 12;

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ViolationBreakdown {
    pub transmission_mw: f64,
    pub balance_mw: f64,
    pub reserve_mw: f64,
}

impl ViolationBreakdown {
    pub fn total(&self) -> f64 {
        self.transmission_mw + self.balance_mw + self.reserve_mw
    }

    fn max_with(&mut self, other: &ViolationBreakdown) {
        self.transmission_mw = self.transmission_mw.max(other.transmission_mw);
        self.balance_mw = self.balance_mw.max(other.balance_mw);
        self.reserve_mw = self.reserve_mw.max(other.reserve_mw);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalSummary {
    pub t_min: u32,
    /// Dispatch cost for the interval in $ (energy plus penalties).
    pub cost: f64,
    /// Penalty dollars implied by the violations below.
    pub violation_cost: f64,
    pub violation: ViolationBreakdown,
}

#[derive(Debug, Clone, Serialize)]
pub struct DayResult {
    pub intervals: Vec<IntervalSummary>,
    /// Startup + no-load dollars of the executed commitment timeline.
    pub commitment_cost: f64,
    /// Sum of interval costs plus commitment cost.
    pub total_cost: f64,
    pub violation_cost: f64,
    pub peak_violation: ViolationBreakdown,
    /// Executed commitments per generator and 5-minute step.
    pub commitment_steps: Vec<Vec<bool>>,
}

impl DayResult {
    pub fn peak_violation_mw(&self) -> f64 {
        self.peak_violation.transmission_mw
    }
}

/// Simulate one operating day.
///
/// `actuals` is the day's realized system trajectory at 5-minute resolution
/// (288 intervals); LAC sees it as its forecast (perfect short-term
/// foresight unless the config's noise hook is enabled). Deterministic
/// given identical inputs.
pub fn simulate_day(
    case: &Case,
    ptdf: &Ptdf,
    commitments: &CommitmentSchedule,
    actuals: &[Forecast],
    config: &PipelineConfig,
) -> Result<DayResult, RiskError> {
    config.validate()?;
    if actuals.len() != DAY_STEPS {
        return Err(RiskError::InvalidInput(format!(
            "actuals cover {} intervals, expected {DAY_STEPS}",
            actuals.len()
        )));
    }
    if commitments.n_hours() < 24 {
        return Err(RiskError::InvalidInput(format!(
            "commitments cover {} hours, expected at least 24",
            commitments.n_hours()
        )));
    }
    let ng = case.num_generators();
    let weights = case.load_weights();

    // Effective commitment timeline at 5-minute resolution, seeded from the
    // hourly schedule and revised in place by LAC.
    let mut effective: Vec<Vec<bool>> = (0..ng)
        .map(|g| (0..DAY_STEPS).map(|t| commitments.on[g][(t / 12).min(commitments.n_hours() - 1)]).collect())
        .collect();

    let lac_opts = ScucOptions {
        penalties: config.penalties,
        gap: config.milp_gap,
        time_limit: config.lac_budget_seconds(),
    };
    let steps_per_lac = (config.lac_cadence_min / SCED_STEP_MINUTES) as usize;
    let mut state = SystemState::from_case(case);
    let mut intervals: Vec<IntervalSummary> = Vec::with_capacity(DAY_STEPS);
    let mut peak = ViolationBreakdown::default();
    let mut violation_cost_total = 0.0;
    let hours = SCED_STEP_MINUTES as f64 / 60.0;

    for t in 0..DAY_STEPS {
        let minutes = t as u32 * SCED_STEP_MINUTES;

        // Look-ahead commitment on its cadence.
        if t % steps_per_lac == 0 {
            let mut window = Vec::with_capacity(LAC_WINDOW_STEPS);
            let mut incoming = Vec::with_capacity(LAC_WINDOW_STEPS);
            let per_lac_step = (LAC_STEP_MINUTES / SCED_STEP_MINUTES) as usize;
            for w in 0..LAC_WINDOW_STEPS {
                let start = t + w * per_lac_step;
                // Mean of the covered 5-minute actuals, held at the day edge.
                let mut load = 0.0;
                let mut renewable = 0.0;
                for k in 0..per_lac_step {
                    let idx = (start + k).min(DAY_STEPS - 1);
                    load += actuals[idx].load;
                    renewable += actuals[idx].renewable;
                }
                window.push(Forecast {
                    load: load / per_lac_step as f64,
                    renewable: renewable / per_lac_step as f64,
                });
                let idx = start.min(DAY_STEPS - 1);
                incoming.push((0..ng).map(|g| effective[g][idx]).collect::<Vec<bool>>());
            }
            if config.forecast_noise_sd > 0.0 {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(config.noise_seed ^ (t as u64).wrapping_mul(0x9e3779b9));
                for f in window.iter_mut() {
                    let eps: f64 = rng.sample(StandardNormal);
                    f.load = (f.load * (1.0 + config.forecast_noise_sd * eps)).max(0.0);
                }
            }
            let lac = run_lac(case, ptdf, &state, &incoming, &window, &lac_opts)
                .map_err(|source| RiskError::AtInterval { interval: t, source })?;
            for (w, _) in window.iter().enumerate() {
                for k in 0..per_lac_step {
                    let idx = t + w * per_lac_step + k;
                    if idx < DAY_STEPS {
                        for g in 0..ng {
                            effective[g][idx] = lac.step_on[g][w];
                        }
                    }
                }
            }
        }

        // Real-time dispatch with a loss model linearized at the current state.
        let on: Vec<bool> = (0..ng).map(|g| effective[g][t]).collect();
        let dispatch0: Vec<f64> = state.gens.iter().map(|gs| gs.p_mw).collect();
        let net_bus: Vec<f64> = weights
            .iter()
            .map(|w| w * (actuals[t].load - actuals[t].renewable))
            .collect();
        let loss = compute_loss_model(case, ptdf, &dispatch0, &net_bus);
        let ctx = ScedContext { case, ptdf, loss: &loss, penalties: config.penalties };
        let dispatch = if config.lad_enabled {
            let mut fcs = Vec::with_capacity(LAD_HORIZON);
            let mut ons = Vec::with_capacity(LAD_HORIZON);
            for k in 0..LAD_HORIZON {
                let idx = (t + k).min(DAY_STEPS - 1);
                fcs.push(actuals[idx]);
                ons.push((0..ng).map(|g| effective[g][idx]).collect::<Vec<bool>>());
            }
            let lad = solve_lad(&ctx, &state, &fcs, &ons)
                .map_err(|source| RiskError::AtInterval { interval: t, source })?;
            lad.intervals.into_iter().next().expect("twelve intervals")
        } else {
            solve_sced(&ctx, &state, actuals[t], &on)
                .map_err(|source| RiskError::AtInterval { interval: t, source })?
        };

        let violation = ViolationBreakdown {
            transmission_mw: dispatch.line_violation.iter().sum(),
            balance_mw: dispatch.balance_short_mw + dispatch.balance_surplus_mw,
            reserve_mw: dispatch.reserve_shortfall_mw,
        };
        peak.max_with(&violation);
        let violation_cost = dispatch.violation_cost_rate(&config.penalties) * hours;
        violation_cost_total += violation_cost;
        intervals.push(IntervalSummary {
            t_min: minutes,
            cost: dispatch.objective * hours,
            violation_cost,
            violation,
        });
        state.advance(SCED_STEP_MINUTES, &on, &dispatch.gen_p);
    }

    // Commitment dollars of the executed timeline: no-load accrues per
    // 5-minute step; startup charges at off->on transitions.
    let mut commitment_cost = 0.0;
    for (g, gen) in case.generators.iter().enumerate() {
        let mut prev = gen.is_initially_on();
        for t in 0..DAY_STEPS {
            let on = effective[g][t];
            if on {
                commitment_cost += gen.no_load_cost * hours;
                if !prev {
                    commitment_cost += gen.startup_cost;
                }
            }
            prev = on;
        }
    }

    let total_cost = commitment_cost + intervals.iter().map(|i| i.cost).sum::<f64>();
    Ok(DayResult {
        intervals,
        commitment_cost,
        total_cost,
        violation_cost: violation_cost_total,
        peak_violation: peak,
        commitment_steps: effective,
    })
}
