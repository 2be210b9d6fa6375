//! Two-stage stochastic FRAC: first-stage hourly commitments (add-only over
//! a prior schedule), second-stage per-scenario dispatch with complete
//! recourse. Solved either as one extensive-form MILP or by multi-cut
//! Benders decomposition with optimality cuts from recourse-LP duals.

use super::StochasticError;
use crate::grid::{Case, Ptdf};
use crate::market::{
    scuc_internals, CommitmentSchedule, Forecast, MarketError, PenaltyPrices, ScucSolution,
};
use crate::scenario::ScenarioSet;
use crate::solver::{solve_lp_with_bounds, solve_milp, Relation, SolveStatus};

/// Relative gap for the Benders master MILP solves.
const MASTER_GAP: f64 = 1e-9;
const MASTER_TIME_LIMIT: f64 = 600.0;

/// A two-stage instance: the grid, a prior (already cleared) commitment
/// schedule, and equiprobable hourly net-load scenarios over the horizon.
pub struct TsspInstance<'a> {
    pub case: &'a Case,
    pub ptdf: &'a Ptdf,
    pub prior: &'a CommitmentSchedule,
    /// Per scenario, per hour system forecasts.
    pub scenarios: Vec<Vec<Forecast>>,
    pub penalties: PenaltyPrices,
}

impl<'a> TsspInstance<'a> {
    pub fn new(
        case: &'a Case,
        ptdf: &'a Ptdf,
        prior: &'a CommitmentSchedule,
        scenarios: Vec<Vec<Forecast>>,
        penalties: PenaltyPrices,
    ) -> Result<Self, StochasticError> {
        if scenarios.is_empty() {
            return Err(StochasticError::InvalidInput("need at least one scenario".into()));
        }
        let h = prior.n_hours();
        if scenarios.iter().any(|s| s.len() != h) {
            return Err(StochasticError::InvalidInput(format!(
                "scenario horizon differs from the {h}-hour commitment horizon"
            )));
        }
        Ok(TsspInstance { case, ptdf, prior, scenarios, penalties })
    }

    /// Interpret a scenario set of net-load trajectories (one asset).
    pub fn from_scenario_set(
        case: &'a Case,
        ptdf: &'a Ptdf,
        prior: &'a CommitmentSchedule,
        set: &ScenarioSet,
        penalties: PenaltyPrices,
    ) -> Result<Self, StochasticError> {
        if set.num_assets() != 1 {
            return Err(StochasticError::InvalidInput(format!(
                "expected a single net-load asset, got {}",
                set.num_assets()
            )));
        }
        let scenarios = (0..set.num_scenarios())
            .map(|s| {
                (0..set.t_steps())
                    .map(|t| Forecast { load: set.value(s, t, 0), renewable: 0.0 })
                    .collect()
            })
            .collect();
        TsspInstance::new(case, ptdf, prior, scenarios, penalties)
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    pub fn n_hours(&self) -> usize {
        self.prior.n_hours()
    }

    fn validate_prior(&self) -> Result<(), StochasticError> {
        let init: Vec<f64> =
            self.case.generators.iter().map(|g| g.initial_status as f64).collect();
        self.prior
            .validate(self.case, &init)
            .map_err(|e| StochasticError::Market(MarketError::InfeasibleFixing(e.to_string())))
    }
}

/// One Benders iteration record for the convergence log.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BendersIteration {
    pub iter: usize,
    pub lower: f64,
    pub upper: f64,
    pub n_cuts: usize,
}

#[derive(Debug, Clone)]
pub struct StochasticSolution {
    pub schedule: CommitmentSchedule,
    /// Startup + no-load dollars of the first stage (0 for the
    /// perfect-information benchmark, which has no common first stage).
    pub commitment_cost: f64,
    pub expected_recourse_cost: f64,
    pub per_scenario_recourse: Vec<f64>,
    pub lower_bound: f64,
    pub iterations: Vec<BendersIteration>,
    pub converged: bool,
}

impl StochasticSolution {
    pub fn expected_total_cost(&self) -> f64 {
        self.commitment_cost + self.expected_recourse_cost
    }
}

/// Extensive form: one commitment block shared by every scenario's dispatch
/// block, weighted 1/n in the objective.
pub fn build_extensive_form(
    instance: &TsspInstance,
) -> Result<crate::market::UcModel, StochasticError> {
    instance.validate_prior()?;
    let n = instance.num_scenarios() as f64;
    let scenarios: Vec<(f64, Vec<Forecast>)> =
        instance.scenarios.iter().map(|s| (1.0 / n, s.clone())).collect();
    Ok(scuc_internals::build_scuc_scenarios(
        instance.case,
        instance.ptdf,
        scenarios,
        Some(instance.prior.on.clone()),
        instance.penalties,
        false,
    )?)
}

pub fn solve_extensive_form(
    instance: &TsspInstance,
    gap: f64,
    time_limit: f64,
) -> Result<StochasticSolution, StochasticError> {
    let model = build_extensive_form(instance)?;
    let sol = solve_milp(model.mip(), gap, time_limit)?;
    if sol.status != SolveStatus::Optimal {
        return Err(StochasticError::Internal(format!(
            "extensive form reported {:?}",
            sol.status
        )));
    }
    let initial_on: Vec<bool> =
        instance.case.generators.iter().map(|g| g.is_initially_on()).collect();
    let out: ScucSolution = model.extract(instance.case, &sol, instance.prior.start_minutes, &initial_on);
    let per = out.scenario_dispatch_cost.clone();
    let n = per.len() as f64;
    let expected = per.iter().sum::<f64>() / n;
    Ok(StochasticSolution {
        schedule: out.schedule,
        commitment_cost: out.commitment_cost,
        expected_recourse_cost: expected,
        per_scenario_recourse: per,
        lower_bound: sol.best_bound,
        iterations: Vec::new(),
        converged: true,
    })
}

/// Multi-cut Benders (L-shaped) decomposition.
///
/// The master carries commitments plus one epigraph variable per scenario;
/// recourse LPs are dispatch problems with the first stage entering as
/// fixed variables, whose reduced costs are the cut subgradients. Recourse
/// is complete by construction, so only optimality cuts arise.
pub fn solve_benders(
    instance: &TsspInstance,
    gap: f64,
    max_iters: usize,
) -> Result<StochasticSolution, StochasticError> {
    instance.validate_prior()?;
    let case = instance.case;
    let n = instance.num_scenarios();
    let n_hours = instance.n_hours();
    let weight = 1.0 / n as f64;

    let mut master = scuc_internals::build_commitment_frame(
        case,
        instance.ptdf,
        n_hours,
        Some(instance.prior.on.clone()),
        instance.penalties,
    )?;
    // Recourse cost epigraph variables (recourse costs are nonnegative).
    let theta: Vec<usize> = (0..n)
        .map(|s| master.mip_mut().lp.add_variable(format!("theta_{s}"), 0.0, f64::INFINITY, weight))
        .collect();

    // Recourse templates: full-structure single-scenario models with zeroed
    // commitment costs; first-stage variables get bound-fixed per iterate.
    let mut recourse = Vec::with_capacity(n);
    for s in 0..n {
        recourse.push(scuc_internals::build_scuc_scenarios(
            case,
            instance.ptdf,
            vec![(1.0, instance.scenarios[s].clone())],
            None,
            instance.penalties,
            true,
        )?);
    }

    let ng = case.num_generators();
    let mut log: Vec<BendersIteration> = Vec::new();
    let mut best_upper = f64::INFINITY;
    let mut best_u: Option<Vec<Vec<bool>>> = None;
    let mut best_per_scenario: Vec<f64> = Vec::new();
    let mut best_commitment = 0.0;
    let mut lower = f64::NEG_INFINITY;
    let mut n_cuts = 0usize;
    let mut converged = false;

    for iter in 1..=max_iters {
        let master_sol = solve_milp(master.mip(), MASTER_GAP, MASTER_TIME_LIMIT)?;
        if master_sol.status != SolveStatus::Optimal {
            return Err(StochasticError::Internal(format!(
                "Benders master reported {:?}",
                master_sol.status
            )));
        }
        lower = lower.max(master_sol.objective);

        // Candidate first stage.
        let mut u_star = vec![vec![false; n_hours]; ng];
        for (g, row) in u_star.iter_mut().enumerate() {
            for (b, val) in row.iter_mut().enumerate() {
                *val = match master.u_var(g, b) {
                    Some(var) => master_sol.values[var] > 0.5,
                    None => master.u_fixed(g, b).expect("fixed or var"),
                };
            }
        }
        let commitment_cost = {
            let initial_on: Vec<bool> = case.generators.iter().map(|g| g.is_initially_on()).collect();
            let sched = CommitmentSchedule::from_on_matrix(
                case.generators.iter().map(|g| g.id.clone()).collect(),
                instance.prior.start_minutes,
                u_star.clone(),
                &initial_on,
            );
            sched.commitment_cost(case)
        };

        // Evaluate scenarios at u*, collecting cuts.
        let mut q = vec![0.0; n];
        let mut cuts: Vec<(usize, Vec<(usize, f64)>, f64)> = Vec::new();
        for s in 0..n {
            let sub = &recourse[s];
            let lp = &sub.mip().lp;
            let mut lower_b: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
            let mut upper_b: Vec<f64> = lp.variables.iter().map(|v| v.upper).collect();
            for g in 0..ng {
                for b in 0..n_hours {
                    if let Some(var) = sub.u_var(g, b) {
                        let v = if u_star[g][b] { 1.0 } else { 0.0 };
                        lower_b[var] = v;
                        upper_b[var] = v;
                    }
                }
            }
            let sol = solve_lp_with_bounds(lp, &lower_b, &upper_b)?;
            if sol.status != SolveStatus::Optimal {
                return Err(StochasticError::Internal(format!(
                    "recourse LP for scenario {s} reported {:?} despite complete recourse",
                    sol.status
                )));
            }
            q[s] = sol.objective;
            // Cut: theta_s >= Q_s + sum g_(gb) (u_gb - u*_gb).
            let mut terms = vec![(theta[s], 1.0)];
            let mut rhs = sol.objective;
            for g in 0..ng {
                for b in 0..n_hours {
                    let Some(sub_var) = sub.u_var(g, b) else { continue };
                    let grad = sol.reduced_costs[sub_var];
                    if grad == 0.0 {
                        continue;
                    }
                    let ustar = if u_star[g][b] { 1.0 } else { 0.0 };
                    match master.u_var(g, b) {
                        Some(mvar) => {
                            terms.push((mvar, -grad));
                            rhs -= grad * ustar;
                        }
                        None => {
                            // Fixed in the master at the same value as u*.
                        }
                    }
                }
            }
            cuts.push((s, terms, rhs));
        }

        let upper = commitment_cost + q.iter().sum::<f64>() * weight;
        if upper < best_upper {
            best_upper = upper;
            best_u = Some(u_star.clone());
            best_per_scenario = q.clone();
            best_commitment = commitment_cost;
        }

        for (s, terms, rhs) in cuts {
            master
                .mip_mut()
                .lp
                .add_constraint(format!("cut_{s}_{iter}"), terms, Relation::Ge, rhs);
            n_cuts += 1;
        }
        log.push(BendersIteration { iter, lower, upper: best_upper, n_cuts });

        let denom = best_upper.abs().max(1e-9);
        if (best_upper - lower) / denom <= gap {
            converged = true;
            break;
        }
    }

    let u_final = best_u.ok_or_else(|| StochasticError::Internal("no incumbent".into()))?;
    let initial_on: Vec<bool> = case.generators.iter().map(|g| g.is_initially_on()).collect();
    let schedule = CommitmentSchedule::from_on_matrix(
        case.generators.iter().map(|g| g.id.clone()).collect(),
        instance.prior.start_minutes,
        u_final,
        &initial_on,
    );
    let expected = best_per_scenario.iter().sum::<f64>() / n as f64;
    Ok(StochasticSolution {
        schedule,
        commitment_cost: best_commitment,
        expected_recourse_cost: expected,
        per_scenario_recourse: best_per_scenario,
        lower_bound: lower,
        iterations: log,
        converged,
    })
}

/// Wait-and-see benchmark: each scenario solved independently with the
/// non-anticipativity constraint relaxed. `per_scenario_recourse` holds the
/// full per-scenario optima (commitment plus dispatch).
pub fn solve_perfect_information(
    instance: &TsspInstance,
    gap: f64,
    time_limit: f64,
) -> Result<StochasticSolution, StochasticError> {
    instance.validate_prior()?;
    let mut per = Vec::with_capacity(instance.num_scenarios());
    for s in 0..instance.num_scenarios() {
        let model = scuc_internals::build_scuc_scenarios(
            instance.case,
            instance.ptdf,
            vec![(1.0, instance.scenarios[s].clone())],
            Some(instance.prior.on.clone()),
            instance.penalties,
            false,
        )?;
        let sol = solve_milp(model.mip(), gap, time_limit)?;
        if sol.status != SolveStatus::Optimal {
            return Err(StochasticError::Internal(format!(
                "perfect-information scenario {s} reported {:?}",
                sol.status
            )));
        }
        per.push(sol.objective);
    }
    let expected = per.iter().sum::<f64>() / per.len() as f64;
    Ok(StochasticSolution {
        schedule: instance.prior.clone(),
        commitment_cost: 0.0,
        expected_recourse_cost: expected,
        per_scenario_recourse: per,
        lower_bound: expected,
        iterations: Vec::new(),
        converged: true,
    })
}

/// Expected cost of a fixed commitment schedule over the instance's
/// scenarios (the deterministic-comparison evaluation).
pub fn evaluate_commitment(
    instance: &TsspInstance,
    schedule: &CommitmentSchedule,
) -> Result<StochasticSolution, StochasticError> {
    let case = instance.case;
    let commitment_cost = schedule.commitment_cost(case);
    let ng = case.num_generators();
    let n_hours = instance.n_hours();
    let mut per = Vec::with_capacity(instance.num_scenarios());
    for s in 0..instance.num_scenarios() {
        let sub = scuc_internals::build_scuc_scenarios(
            case,
            instance.ptdf,
            vec![(1.0, instance.scenarios[s].clone())],
            None,
            instance.penalties,
            true,
        )?;
        let lp = &sub.mip().lp;
        let mut lower_b: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
        let mut upper_b: Vec<f64> = lp.variables.iter().map(|v| v.upper).collect();
        for g in 0..ng {
            for b in 0..n_hours {
                if let Some(var) = sub.u_var(g, b) {
                    let v = if schedule.on[g][b] { 1.0 } else { 0.0 };
                    lower_b[var] = v;
                    upper_b[var] = v;
                } else if sub.u_fixed(g, b) != Some(schedule.on[g][b]) {
                    return Err(StochasticError::InvalidInput(format!(
                        "schedule conflicts with initial-condition carryover at gen {g} hour {b}"
                    )));
                }
            }
        }
        let sol = solve_lp_with_bounds(lp, &lower_b, &upper_b)?;
        if sol.status != SolveStatus::Optimal {
            return Err(StochasticError::Internal(format!(
                "evaluation LP for scenario {s} reported {:?}",
                sol.status
            )));
        }
        per.push(sol.objective);
    }
    let expected = per.iter().sum::<f64>() / per.len() as f64;
    Ok(StochasticSolution {
        schedule: schedule.clone(),
        commitment_cost,
        expected_recourse_cost: expected,
        per_scenario_recourse: per,
        lower_bound: commitment_cost + expected,
        iterations: Vec::new(),
        converged: true,
    })
}

/// Hour-wise mean of the instance's scenarios (the deterministic forecast).
pub fn mean_forecast(instance: &TsspInstance) -> Vec<Forecast> {
    let n = instance.num_scenarios() as f64;
    let h = instance.n_hours();
    (0..h)
        .map(|t| {
            let load = instance.scenarios.iter().map(|s| s[t].load).sum::<f64>() / n;
            let renewable = instance.scenarios.iter().map(|s| s[t].renewable).sum::<f64>() / n;
            Forecast { load, renewable }
        })
        .collect()
}
