//! Market-clearing formulations and drivers: single-interval RT-SCED,
//! multi-period LAD, DA-SCUC, add-only FRAC, and rolling look-ahead
//! commitment.

mod export;
mod sced;
mod scuc;

pub use export::{commitment_rows, dispatch_rows, dispatch_rows_csv, DispatchRow};
pub use sced::{build_lad, build_sced, solve_lad, solve_sced, LadSolution, ScedContext};
pub use scuc::{LAC_STEP_MINUTES, LAC_WINDOW_STEPS};
pub use scuc::{
    build_scuc, run_lac, solve_frac, solve_scuc, LacResult, ScucOptions, ScucSolution, UcModel,
};

/// Crate-internal access to the unit-commitment builder for the
/// stochastic formulations.
pub(crate) mod scuc_internals {
    pub(crate) use super::scuc::{build_commitment_frame, build_scuc_scenarios};
}

use crate::grid::Case;
use crate::solver::{SolveStatus, SolverError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("inconsistent commitment: {0}")]
    InconsistentCommitment(String),
    #[error("infeasible fixing: {0}")]
    InfeasibleFixing(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Violation penalty prices in $/MWh. Defaults order violations so that
/// energy-balance shortfalls dominate, then transmission, then reserve.
#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyPrices {
    pub transmission: f64,
    pub energy_balance: f64,
    pub reserve: f64,
}

impl Default for PenaltyPrices {
    fn default() -> Self {
        PenaltyPrices { transmission: 1000.0, energy_balance: 3500.0, reserve: 850.0 }
    }
}

/// One interval of system-level forecast (or actuals) in MW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast {
    pub load: f64,
    pub renewable: f64,
}

impl Forecast {
    pub fn net_load(&self) -> f64 {
        self.load - self.renewable
    }
}

/// Per-generator operating state.
#[derive(Debug, Clone, PartialEq)]
pub struct GenState {
    pub on: bool,
    pub p_mw: f64,
    /// Elapsed on-hours (positive) or off-hours (negative).
    pub status_hours: f64,
}

/// Operating snapshot threaded through the rolling horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    /// Minutes since the start of the simulated day.
    pub minutes: u32,
    pub gens: Vec<GenState>,
    pub bus_loads: Vec<f64>,
    pub renewables: Vec<f64>,
}

impl SystemState {
    /// Initial state from the case's initial conditions.
    pub fn from_case(case: &Case) -> SystemState {
        SystemState {
            minutes: 0,
            gens: case
                .generators
                .iter()
                .map(|g| GenState {
                    on: g.is_initially_on(),
                    p_mw: if g.is_initially_on() { g.initial_output } else { 0.0 },
                    status_hours: g.initial_status as f64,
                })
                .collect(),
            bus_loads: vec![0.0; case.num_buses()],
            renewables: Vec::new(),
        }
    }

    pub fn status_hours(&self) -> Vec<f64> {
        self.gens.iter().map(|g| g.status_hours).collect()
    }

    /// Advance generator status clocks by `minutes` given the commitments
    /// applied over that span, and record the dispatch.
    pub fn advance(&mut self, minutes: u32, on: &[bool], p_mw: &[f64]) {
        let dh = minutes as f64 / 60.0;
        for (g, gs) in self.gens.iter_mut().enumerate() {
            if on[g] {
                gs.status_hours = if gs.on { gs.status_hours + dh } else { dh };
            } else {
                gs.status_hours = if gs.on { -dh } else { gs.status_hours - dh };
            }
            gs.on = on[g];
            gs.p_mw = if on[g] { p_mw[g] } else { 0.0 };
        }
        self.minutes += minutes;
    }
}

/// On/off and startup indicators per generator and hour.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommitmentSchedule {
    pub gen_ids: Vec<String>,
    /// Minutes since day start at which hour 0 of this schedule begins.
    pub start_minutes: u32,
    pub on: Vec<Vec<bool>>,
    pub startup: Vec<Vec<bool>>,
}

impl CommitmentSchedule {
    /// Build from an on/off matrix, deriving startup indicators from
    /// transitions against the provided initial statuses.
    pub fn from_on_matrix(
        gen_ids: Vec<String>,
        start_minutes: u32,
        on: Vec<Vec<bool>>,
        initial_on: &[bool],
    ) -> CommitmentSchedule {
        let startup = on
            .iter()
            .enumerate()
            .map(|(g, row)| {
                let mut prev = initial_on[g];
                row.iter()
                    .map(|&u| {
                        let s = u && !prev;
                        prev = u;
                        s
                    })
                    .collect()
            })
            .collect();
        CommitmentSchedule { gen_ids, start_minutes, on, startup }
    }

    pub fn n_hours(&self) -> usize {
        self.on.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn num_generators(&self) -> usize {
        self.on.len()
    }

    /// True when `other` commits every unit-hour this schedule commits.
    pub fn is_subset_of(&self, other: &CommitmentSchedule) -> bool {
        self.on.iter().zip(&other.on).all(|(a, b)| {
            a.iter().zip(b).all(|(x, y)| !*x || *y)
        })
    }

    /// Check startup consistency and min-up/min-down against initial
    /// statuses (hours on if positive, off if negative).
    pub fn validate(&self, case: &Case, initial_status_hours: &[f64]) -> Result<(), MarketError> {
        let h = self.n_hours();
        for (g, gen) in case.generators.iter().enumerate() {
            let init_on = initial_status_hours[g] > 0.0;
            let mut prev = init_on;
            for t in 0..h {
                let expected = self.on[g][t] && !prev;
                if self.startup[g][t] != expected {
                    return Err(MarketError::InvalidInput(format!(
                        "generator {} hour {}: startup flag inconsistent with transitions",
                        gen.id, t
                    )));
                }
                prev = self.on[g][t];
            }
            // Run-length checks, with credit for the initial duration.
            let init_run = initial_status_hours[g].abs();
            let mut run_on = if init_on { init_run } else { 0.0 };
            let mut run_off = if init_on { 0.0 } else { init_run };
            let mut was_on = init_on;
            for t in 0..h {
                let on = self.on[g][t];
                if on && !was_on {
                    if run_off + 1e-9 < gen.min_down as f64 {
                        return Err(MarketError::InvalidInput(format!(
                            "generator {} hour {}: min_down violated ({}h off < {}h)",
                            gen.id, t, run_off, gen.min_down
                        )));
                    }
                    run_on = 0.0;
                }
                if !on && was_on {
                    if run_on + 1e-9 < gen.min_up as f64 {
                        return Err(MarketError::InvalidInput(format!(
                            "generator {} hour {}: min_up violated ({}h on < {}h)",
                            gen.id, t, run_on, gen.min_up
                        )));
                    }
                    run_off = 0.0;
                }
                if on {
                    run_on += 1.0;
                } else {
                    run_off += 1.0;
                }
                was_on = on;
            }
        }
        Ok(())
    }

    /// Total startup cost charged at off->on transitions in this schedule.
    pub fn startup_cost(&self, case: &Case) -> f64 {
        self.startup
            .iter()
            .zip(&case.generators)
            .map(|(row, g)| row.iter().filter(|&&s| s).count() as f64 * g.startup_cost)
            .sum()
    }

    /// Total no-load cost over the horizon.
    pub fn no_load_cost(&self, case: &Case) -> f64 {
        self.on
            .iter()
            .zip(&case.generators)
            .map(|(row, g)| row.iter().filter(|&&u| u).count() as f64 * g.no_load_cost)
            .sum()
    }

    pub fn commitment_cost(&self, case: &Case) -> f64 {
        self.startup_cost(case) + self.no_load_cost(case)
    }
}

/// Result of one dispatch clearing.
#[derive(Debug, Clone, Serialize)]
pub struct DispatchSolution {
    /// MW per generator (declaration order; off units at zero).
    pub gen_p: Vec<f64>,
    /// $/MWh per bus.
    pub lmp: Vec<f64>,
    /// Violation slack per line, MW.
    pub line_violation: Vec<f64>,
    pub balance_short_mw: f64,
    pub balance_surplus_mw: f64,
    pub reserve_shortfall_mw: f64,
    /// Cost rate in $/h (energy plus penalty terms).
    pub objective: f64,
    pub status: SolveStatus,
    /// Dual of the system balance row ($/MWh at the reference).
    pub energy_price: f64,
}

impl DispatchSolution {
    pub fn total_violation_mw(&self) -> f64 {
        self.line_violation.iter().sum::<f64>()
            + self.balance_short_mw
            + self.balance_surplus_mw
            + self.reserve_shortfall_mw
    }

    /// Penalty outlay rate in $/h implied by the violations.
    pub fn violation_cost_rate(&self, penalties: &PenaltyPrices) -> f64 {
        self.line_violation.iter().sum::<f64>() * penalties.transmission
            + (self.balance_short_mw + self.balance_surplus_mw) * penalties.energy_balance
            + self.reserve_shortfall_mw * penalties.reserve
    }
}
