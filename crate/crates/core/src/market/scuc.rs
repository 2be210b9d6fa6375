//! Unit-commitment formulations: DA-SCUC over hourly blocks, add-only FRAC,
//! and the rolling look-ahead commitment (LAC) with notification-time
//! fixing. One block-based builder backs all three.
//!
//! Commitment decisions live on blocks (clock hours); dispatch lives on
//! steps (hourly for the day-ahead problems, 15-minute for LAC). Fixed
//! commitments are folded into bounds and constants at build time, so a
//! mostly-fixed problem shrinks to a small MILP.

use super::{CommitmentSchedule, Forecast, MarketError, PenaltyPrices, SystemState};
use crate::grid::{Case, Ptdf};
use crate::solver::{
    solve_milp, LinearProgram, MixedIntegerProgram, Relation, SolveStatus,
};

/// Options shared by the commitment solves.
#[derive(Debug, Clone)]
pub struct ScucOptions {
    pub penalties: PenaltyPrices,
    /// Relative MILP gap.
    pub gap: f64,
    /// Solver wall-clock budget in seconds.
    pub time_limit: f64,
}

impl Default for ScucOptions {
    fn default() -> Self {
        ScucOptions { penalties: PenaltyPrices::default(), gap: 1e-6, time_limit: 1200.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum UVal {
    Fixed(bool),
    Var(usize),
}

#[derive(Debug, Clone, Copy)]
enum VVal {
    Const(f64),
    Var(usize),
}

#[derive(Debug, Clone)]
struct Block {
    /// Hours from horizon start.
    start_h: f64,
    dur_h: f64,
    steps: std::ops::Range<usize>,
}

/// Built commitment MILP plus the maps needed to extract a solution.
///
/// Dispatch blocks may be replicated over several weighted scenarios that
/// share the commitment variables (the two-stage extensive form); the
/// deterministic problems are the single-scenario case.
pub struct UcModel {
    mip: MixedIntegerProgram,
    blocks: Vec<Block>,
    n_steps: usize,
    u: Vec<Vec<UVal>>,
    /// Dispatch variables per scenario, generator, step.
    p: Vec<Vec<Vec<Option<usize>>>>,
    /// Per scenario and step: (line slacks, bal short, bal surplus, resv short).
    step_slack: Vec<Vec<(Vec<usize>, usize, usize, usize)>>,
    /// Unweighted dispatch objective terms per scenario.
    dispatch_terms: Vec<Vec<(usize, f64)>>,
    /// Commitment cost (startup + no-load) already folded into the offset.
    fixed_commitment_cost: f64,
    /// Objective coefficients for u/v variables sum to the variable part.
    commitment_terms: Vec<(usize, f64)>,
}

impl UcModel {
    pub fn mip(&self) -> &MixedIntegerProgram {
        &self.mip
    }

    pub(crate) fn mip_mut(&mut self) -> &mut MixedIntegerProgram {
        &mut self.mip
    }

    pub fn num_free_binaries(&self) -> usize {
        self.mip.integers.len()
    }

    /// Commitment variable for (generator, block): Some(var) when free.
    pub(crate) fn u_var(&self, g: usize, b: usize) -> Option<usize> {
        match self.u[g][b] {
            UVal::Var(v) => Some(v),
            UVal::Fixed(_) => None,
        }
    }

    pub(crate) fn u_fixed(&self, g: usize, b: usize) -> Option<bool> {
        match self.u[g][b] {
            UVal::Fixed(x) => Some(x),
            UVal::Var(_) => None,
        }
    }

    pub(crate) fn extract(
        &self,
        case: &Case,
        sol: &crate::solver::Solution,
        start_minutes: u32,
        initial_on: &[bool],
    ) -> ScucSolution {
        extract_solution(case, self, sol, start_minutes, initial_on)
    }
}

/// Commitment solve output.
#[derive(Debug, Clone)]
pub struct ScucSolution {
    pub schedule: CommitmentSchedule,
    /// Total objective in $ over the horizon (energy + penalties + commitment).
    pub objective: f64,
    pub best_bound: f64,
    /// Startup plus no-load dollars implied by the chosen commitments.
    pub commitment_cost: f64,
    /// Dispatch MW per scenario, step, generator.
    pub dispatch: Vec<Vec<Vec<f64>>>,
    /// Total violation MW per scenario and step (lines + balance + reserve).
    pub step_violation_mw: Vec<Vec<f64>>,
    /// Unweighted dispatch cost per scenario.
    pub scenario_dispatch_cost: Vec<f64>,
    pub status: SolveStatus,
}

impl ScucSolution {
    /// Objective minus commitment dollars: the dispatch-side cost.
    pub fn dispatch_cost(&self) -> f64 {
        self.objective - self.commitment_cost
    }

    /// Dispatch of the (single) deterministic scenario.
    pub fn dispatch_steps(&self) -> &Vec<Vec<f64>> {
        &self.dispatch[0]
    }

    pub fn step_violations(&self) -> &Vec<f64> {
        &self.step_violation_mw[0]
    }
}

fn fold_or_conflict(
    slot: &mut Option<bool>,
    value: bool,
    gen: &str,
    block: usize,
    what: &str,
) -> Result<(), MarketError> {
    match slot {
        None => {
            *slot = Some(value);
            Ok(())
        }
        Some(v) if *v == value => Ok(()),
        Some(v) => Err(MarketError::InfeasibleFixing(format!(
            "generator {gen} block {block}: {what} = {value} conflicts with {v}"
        ))),
    }
}

/// Certain min-up/min-down violations among fully forced segments.
fn check_forced_runs(
    case: &Case,
    forced: &[Vec<Option<bool>>],
    blocks: &[Block],
) -> Result<(), MarketError> {
    for (g, gen) in case.generators.iter().enumerate() {
        let row = &forced[g];
        let mut b = 0;
        while b < row.len() {
            let Some(v) = row[b] else {
                b += 1;
                continue;
            };
            let mut e = b;
            while e + 1 < row.len() && row[e + 1] == Some(v) {
                e += 1;
            }
            let flanked_before = b > 0 && row[b - 1] == Some(!v);
            let flanked_after = e + 1 < row.len() && row[e + 1] == Some(!v);
            if flanked_before && flanked_after {
                let dur: f64 = blocks[b..=e].iter().map(|blk| blk.dur_h).sum();
                let need = if v { gen.min_up } else { gen.min_down } as f64;
                if dur + 1e-9 < need {
                    return Err(MarketError::InfeasibleFixing(format!(
                        "generator {} blocks {}..={}: forced {} run of {dur}h violates {}h {}",
                        gen.id,
                        b,
                        e,
                        if v { "on" } else { "off" },
                        need,
                        if v { "min_up" } else { "min_down" },
                    )));
                }
            }
            b = e + 1;
        }
    }
    Ok(())
}

struct UcInputs<'a> {
    case: &'a Case,
    ptdf: &'a Ptdf,
    /// Weighted dispatch scenarios, all of the same step count.
    scenarios: Vec<(f64, Vec<Forecast>)>,
    step_minutes: u32,
    blocks: Vec<Block>,
    /// (status_hours, p0) per generator.
    initial: Vec<(f64, f64)>,
    /// Exact pins per generator and block.
    pin: Option<Vec<Vec<Option<bool>>>>,
    /// Add-only floor per generator and block.
    floor: Option<Vec<Vec<bool>>>,
    penalties: PenaltyPrices,
}

fn build_uc(inputs: &UcInputs) -> Result<UcModel, MarketError> {
    let case = inputs.case;
    let blocks = &inputs.blocks;
    let nb = blocks.len();
    let ng = case.num_generators();
    if inputs.scenarios.is_empty() {
        return Err(MarketError::InvalidInput("at least one scenario required".into()));
    }
    let n_steps = inputs.scenarios[0].1.len();
    if inputs.scenarios.iter().any(|(_, st)| st.len() != n_steps) {
        return Err(MarketError::InvalidInput("scenario horizons differ".into()));
    }
    let step_hours = inputs.step_minutes as f64 / 60.0;
    let pen = &inputs.penalties;
    let weights = case.load_weights();

    // Resolve forced commitments: initial-condition carryover, pins, floor.
    let mut forced: Vec<Vec<Option<bool>>> = vec![vec![None; nb]; ng];
    for (g, gen) in case.generators.iter().enumerate() {
        let (status_h, _) = inputs.initial[g];
        let on = status_h > 0.0;
        let carry = if on {
            (gen.min_up as f64 - status_h).max(0.0)
        } else {
            (gen.min_down as f64 + status_h).max(0.0)
        };
        for (b, blk) in blocks.iter().enumerate() {
            if blk.start_h < carry - 1e-9 {
                forced[g][b] = Some(on);
            }
        }
        if let Some(pin) = &inputs.pin {
            for b in 0..nb {
                if let Some(v) = pin[g][b] {
                    fold_or_conflict(&mut forced[g][b], v, &gen.id, b, "pin")?;
                }
            }
        }
        if let Some(floor) = &inputs.floor {
            for b in 0..nb {
                if floor[g][b] {
                    fold_or_conflict(&mut forced[g][b], true, &gen.id, b, "commit floor")?;
                }
            }
        }
    }
    check_forced_runs(case, &forced, blocks)?;

    let mut lp = LinearProgram::new();
    let mut integers = Vec::new();
    let mut fixed_commitment_cost = 0.0;
    let mut commitment_terms: Vec<(usize, f64)> = Vec::new();

    // Commitment variables and startup indicators.
    let mut u: Vec<Vec<UVal>> = vec![Vec::with_capacity(nb); ng];
    let mut v: Vec<Vec<VVal>> = vec![Vec::with_capacity(nb); ng];
    for (g, gen) in case.generators.iter().enumerate() {
        let init_on = inputs.initial[g].0 > 0.0;
        for b in 0..nb {
            let uval = match forced[g][b] {
                Some(x) => {
                    if x {
                        fixed_commitment_cost += gen.no_load_cost * blocks[b].dur_h;
                    }
                    UVal::Fixed(x)
                }
                None => {
                    let var = lp.add_variable(
                        format!("u_{}_{b}", gen.id),
                        0.0,
                        1.0,
                        gen.no_load_cost * blocks[b].dur_h,
                    );
                    integers.push(var);
                    commitment_terms.push((var, gen.no_load_cost * blocks[b].dur_h));
                    UVal::Var(var)
                }
            };
            u[g].push(uval);
            let prev = if b == 0 { UVal::Fixed(init_on) } else { u[g][b - 1] };
            let vval = match (u[g][b], prev) {
                (UVal::Fixed(cur), UVal::Fixed(before)) => {
                    let startup = cur && !before;
                    if startup {
                        fixed_commitment_cost += gen.startup_cost;
                    }
                    VVal::Const(if startup { 1.0 } else { 0.0 })
                }
                (cur, before) => {
                    let var =
                        lp.add_variable(format!("v_{}_{b}", gen.id), 0.0, 1.0, gen.startup_cost);
                    commitment_terms.push((var, gen.startup_cost));
                    // v >= u_b - u_{b-1}
                    let mut terms = vec![(var, 1.0)];
                    let mut rhs = 0.0;
                    match cur {
                        UVal::Var(uv) => terms.push((uv, -1.0)),
                        UVal::Fixed(x) => rhs += if x { 1.0 } else { 0.0 },
                    }
                    match before {
                        UVal::Var(uv) => terms.push((uv, 1.0)),
                        UVal::Fixed(x) => rhs -= if x { 1.0 } else { 0.0 },
                    }
                    lp.add_constraint(format!("vdef_{}_{b}", gen.id), terms, Relation::Ge, rhs);
                    VVal::Var(var)
                }
            };
            v[g].push(vval);
        }
    }

    // Min-up / min-down window inequalities (skipped when all-constant).
    for (g, gen) in case.generators.iter().enumerate() {
        let ut = gen.min_up as f64;
        let dt = gen.min_down as f64;
        for t in 0..nb {
            let tau_t = blocks[t].start_h;
            // Min-up: startups within the last `ut` hours imply u_t on.
            {
                let mut terms: Vec<(usize, f64)> = Vec::new();
                let mut lhs_const = 0.0;
                for b in 0..=t {
                    if blocks[b].start_h > tau_t - ut + 1e-9 {
                        match v[g][b] {
                            VVal::Const(c) => lhs_const += c,
                            VVal::Var(var) => terms.push((var, 1.0)),
                        }
                    }
                }
                let mut rhs = -lhs_const;
                let mut any_var = !terms.is_empty();
                match u[g][t] {
                    UVal::Var(uv) => {
                        terms.push((uv, -1.0));
                        any_var = true;
                    }
                    UVal::Fixed(x) => rhs += if x { 1.0 } else { 0.0 },
                }
                if any_var {
                    lp.add_constraint(format!("minup_{}_{t}", gen.id), terms, Relation::Le, rhs);
                } else if rhs < -1e-9 {
                    return Err(MarketError::InfeasibleFixing(format!(
                        "generator {} block {t}: fixed startups violate min_up",
                        gen.id
                    )));
                }
            }
            // Min-down: startups within the last `dt` hours need the unit
            // to have been off at the window edge.
            {
                let mut terms: Vec<(usize, f64)> = Vec::new();
                let mut lhs_const = 0.0;
                for b in 0..=t {
                    if blocks[b].start_h > tau_t - dt + 1e-9 {
                        match v[g][b] {
                            VVal::Const(c) => lhs_const += c,
                            VVal::Var(var) => terms.push((var, 1.0)),
                        }
                    }
                }
                // State at tau_t - dt: a block in the horizon, or history.
                let edge = blocks
                    .iter()
                    .rposition(|blk| blk.start_h <= tau_t - dt + 1e-9);
                let mut rhs = 1.0 - lhs_const;
                let mut any_var = !terms.is_empty();
                match edge {
                    Some(b0) => match u[g][b0] {
                        UVal::Var(uv) => {
                            terms.push((uv, 1.0));
                            any_var = true;
                        }
                        UVal::Fixed(x) => rhs -= if x { 1.0 } else { 0.0 },
                    },
                    None => {
                        let (status_h, _) = inputs.initial[g];
                        let init_on = status_h > 0.0;
                        let lookback = dt - tau_t; // hours before the horizon
                        let state_then = if lookback <= status_h.abs() + 1e-9 {
                            init_on
                        } else {
                            !init_on
                        };
                        rhs -= if state_then { 1.0 } else { 0.0 };
                    }
                }
                if any_var {
                    lp.add_constraint(format!("mindn_{}_{t}", gen.id), terms, Relation::Le, rhs);
                } else if rhs < -1e-9 {
                    return Err(MarketError::InfeasibleFixing(format!(
                        "generator {} block {t}: fixed startups violate min_down",
                        gen.id
                    )));
                }
            }
        }
    }

    // Dispatch, segments, reserve per step, replicated per scenario;
    // commitment variables are shared across scenarios.
    let block_of_step: Vec<usize> = {
        let mut map = vec![0usize; n_steps];
        for (b, blk) in blocks.iter().enumerate() {
            for s in blk.steps.clone() {
                map[s] = b;
            }
        }
        map
    };
    let ns = inputs.scenarios.len();
    let mut p: Vec<Vec<Vec<Option<usize>>>> = vec![vec![vec![None; n_steps]; ng]; ns];
    let mut r: Vec<Vec<Vec<Option<usize>>>> = vec![vec![vec![None; n_steps]; ng]; ns];
    let mut dispatch_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ns];
    let mut step_slack: Vec<Vec<(Vec<usize>, usize, usize, usize)>> = vec![Vec::new(); ns];

    for (sc, (weight, steps)) in inputs.scenarios.iter().enumerate() {
        let weight = *weight;
        for (g, gen) in case.generators.iter().enumerate() {
            for t in 0..n_steps {
                let b = block_of_step[t];
                match u[g][b] {
                    UVal::Fixed(false) => {}
                    UVal::Fixed(true) => {
                        let pv = lp.add_variable(
                            format!("p_{}_s{sc}_{t}", gen.id),
                            gen.pmin,
                            gen.pmax,
                            0.0,
                        );
                        p[sc][g][t] = Some(pv);
                        if gen.pmax - gen.pmin > 1e-9 {
                            let mut terms = vec![(pv, 1.0)];
                            for (k, &(len, price)) in gen.cost_curve.iter().enumerate() {
                                if len <= 0.0 {
                                    continue;
                                }
                                let s = lp.add_variable(
                                    format!("seg_{}_{k}_s{sc}_{t}", gen.id),
                                    0.0,
                                    len,
                                    weight * price * step_hours,
                                );
                                dispatch_terms[sc].push((s, price * step_hours));
                                terms.push((s, -1.0));
                            }
                            lp.add_constraint(
                                format!("link_{}_s{sc}_{t}", gen.id),
                                terms,
                                Relation::Eq,
                                gen.pmin,
                            );
                        }
                        let rv = lp.add_variable(
                            format!("r_{}_s{sc}_{t}", gen.id),
                            0.0,
                            super::sced::RESERVE_RAMP_MIN * gen.ramp_rate,
                            0.0,
                        );
                        r[sc][g][t] = Some(rv);
                        lp.add_constraint(
                            format!("rescap_{}_s{sc}_{t}", gen.id),
                            vec![(pv, 1.0), (rv, 1.0)],
                            Relation::Le,
                            gen.pmax,
                        );
                    }
                    UVal::Var(uv) => {
                        let pv = lp.add_variable(
                            format!("p_{}_s{sc}_{t}", gen.id),
                            0.0,
                            gen.pmax,
                            0.0,
                        );
                        p[sc][g][t] = Some(pv);
                        let mut terms = vec![(pv, 1.0), (uv, -gen.pmin)];
                        let mut cap_terms: Vec<(usize, f64)> = Vec::new();
                        for (k, &(len, price)) in gen.cost_curve.iter().enumerate() {
                            if len <= 0.0 {
                                continue;
                            }
                            let s = lp.add_variable(
                                format!("seg_{}_{k}_s{sc}_{t}", gen.id),
                                0.0,
                                len,
                                weight * price * step_hours,
                            );
                            dispatch_terms[sc].push((s, price * step_hours));
                            terms.push((s, -1.0));
                            cap_terms.push((s, 1.0));
                        }
                        lp.add_constraint(format!("link_{}_s{sc}_{t}", gen.id), terms, Relation::Eq, 0.0);
                        if !cap_terms.is_empty() {
                            cap_terms.push((uv, -(gen.pmax - gen.pmin)));
                            lp.add_constraint(
                                format!("cap_{}_s{sc}_{t}", gen.id),
                                cap_terms,
                                Relation::Le,
                                0.0,
                            );
                        }
                        let rv = lp.add_variable(
                            format!("r_{}_s{sc}_{t}", gen.id),
                            0.0,
                            super::sced::RESERVE_RAMP_MIN * gen.ramp_rate,
                            0.0,
                        );
                        r[sc][g][t] = Some(rv);
                        lp.add_constraint(
                            format!("rescap_{}_s{sc}_{t}", gen.id),
                            vec![(pv, 1.0), (rv, 1.0), (uv, -gen.pmax)],
                            Relation::Le,
                            0.0,
                        );
                    }
                }
            }
        }

        // Ramp limits between consecutive steps with startup/shutdown relief.
        for (g, gen) in case.generators.iter().enumerate() {
            let limit = inputs.step_minutes as f64 * gen.ramp_rate;
            let su = gen.pmin.max(limit);
            let sd = gen.pmin.max(limit);
            for t in 0..n_steps {
                let (prev_u, prev_p): (UVal, Option<usize>) = if t == 0 {
                    (UVal::Fixed(inputs.initial[g].0 > 0.0), None)
                } else {
                    (u[g][block_of_step[t - 1]], p[sc][g][t - 1])
                };
                let cur_u = u[g][block_of_step[t]];
                let cur_p = p[sc][g][t];
                let p0 = inputs.initial[g].1;

                let add_u = |terms: &mut Vec<(usize, f64)>, rhs: &mut f64, uval: UVal, coef: f64| {
                    match uval {
                        UVal::Var(uv) => terms.push((uv, -coef)),
                        UVal::Fixed(x) => {
                            if x {
                                *rhs += coef;
                            }
                        }
                    }
                };

                // Ramp up: p_t - p_{t-1} <= limit*u_prev + su*(u_cur - u_prev).
                let mut terms: Vec<(usize, f64)> = Vec::new();
                let mut rhs = 0.0;
                if let Some(pv) = cur_p {
                    terms.push((pv, 1.0));
                }
                match prev_p {
                    Some(pv) => terms.push((pv, -1.0)),
                    None => {
                        if t == 0 {
                            rhs += p0;
                        }
                    }
                }
                add_u(&mut terms, &mut rhs, prev_u, limit - su);
                add_u(&mut terms, &mut rhs, cur_u, su);
                if terms.iter().any(|&(_, c)| c != 0.0) && cur_p.is_some() {
                    lp.add_constraint(format!("rup_{}_s{sc}_{t}", gen.id), terms, Relation::Le, rhs);
                }

                // Ramp down: p_{t-1} - p_t <= limit*u_cur + sd*(u_prev - u_cur).
                let mut terms: Vec<(usize, f64)> = Vec::new();
                let mut rhs = 0.0;
                match prev_p {
                    Some(pv) => terms.push((pv, 1.0)),
                    None => {
                        if t == 0 {
                            rhs -= p0;
                        }
                    }
                }
                if let Some(pv) = cur_p {
                    terms.push((pv, -1.0));
                }
                add_u(&mut terms, &mut rhs, cur_u, limit - sd);
                add_u(&mut terms, &mut rhs, prev_u, sd);
                let has_prev = prev_p.is_some() || t == 0;
                if terms.iter().any(|&(_, c)| c != 0.0) && has_prev {
                    lp.add_constraint(format!("rdn_{}_s{sc}_{t}", gen.id), terms, Relation::Le, rhs);
                }
            }
        }

        // Per-step system rows (lossless balance, PTDF limits, reserve).
        for (t, fc) in steps.iter().enumerate() {
            if fc.load < 0.0 || fc.renewable < 0.0 {
                return Err(MarketError::InvalidInput(format!(
                    "scenario {sc} step {t}: forecast must be nonnegative"
                )));
            }
            let net = fc.net_load();
            let short = lp.add_variable(
                format!("bal_short_s{sc}_{t}"),
                0.0,
                f64::INFINITY,
                weight * pen.energy_balance * step_hours,
            );
            let surplus = lp.add_variable(
                format!("bal_surp_s{sc}_{t}"),
                0.0,
                f64::INFINITY,
                weight * pen.energy_balance * step_hours,
            );
            dispatch_terms[sc].push((short, pen.energy_balance * step_hours));
            dispatch_terms[sc].push((surplus, pen.energy_balance * step_hours));
            let mut terms: Vec<(usize, f64)> = Vec::new();
            for gp in p[sc].iter() {
                if let Some(pv) = gp[t] {
                    terms.push((pv, 1.0));
                }
            }
            terms.push((short, 1.0));
            terms.push((surplus, -1.0));
            lp.add_constraint(format!("balance_s{sc}_{t}"), terms, Relation::Eq, net);

            let mut line_slacks = Vec::with_capacity(case.num_lines());
            for (l, line) in case.lines.iter().enumerate() {
                let s = lp.add_variable(
                    format!("ls_{l}_s{sc}_{t}"),
                    0.0,
                    f64::INFINITY,
                    weight * pen.transmission * step_hours,
                );
                dispatch_terms[sc].push((s, pen.transmission * step_hours));
                line_slacks.push(s);
                let mut flow: Vec<(usize, f64)> = Vec::new();
                for (g, gp) in p[sc].iter().enumerate() {
                    if let Some(pv) = gp[t] {
                        let coef = inputs.ptdf.factors[(l, case.generator_bus_index(g))];
                        if coef != 0.0 {
                            flow.push((pv, coef));
                        }
                    }
                }
                let k_l: f64 = weights
                    .iter()
                    .enumerate()
                    .map(|(b, w)| inputs.ptdf.factors[(l, b)] * w * net)
                    .sum();
                let mut le = flow.clone();
                le.push((s, -1.0));
                lp.add_constraint(format!("lmax_{l}_s{sc}_{t}"), le, Relation::Le, line.flow_limit + k_l);
                let mut ge = flow;
                ge.push((s, 1.0));
                lp.add_constraint(format!("lmin_{l}_s{sc}_{t}"), ge, Relation::Ge, -line.flow_limit + k_l);
            }

            let resv_short = lp.add_variable(
                format!("resv_short_s{sc}_{t}"),
                0.0,
                f64::INFINITY,
                weight * pen.reserve * step_hours,
            );
            dispatch_terms[sc].push((resv_short, pen.reserve * step_hours));
            let mut resv_terms: Vec<(usize, f64)> = Vec::new();
            for gr in r[sc].iter() {
                if let Some(rv) = gr[t] {
                    resv_terms.push((rv, 1.0));
                }
            }
            resv_terms.push((resv_short, 1.0));
            lp.add_constraint(
                format!("reserve_s{sc}_{t}"),
                resv_terms,
                Relation::Ge,
                case.reserve_requirement * fc.load,
            );
            step_slack[sc].push((line_slacks, short, surplus, resv_short));
        }
    }

    lp.objective_offset = fixed_commitment_cost;
    Ok(UcModel {
        mip: MixedIntegerProgram::new(lp, integers),
        blocks: blocks.clone(),
        n_steps,
        u,
        p,
        step_slack,
        dispatch_terms,
        fixed_commitment_cost,
        commitment_terms,
    })
}

fn extract_solution(
    case: &Case,
    model: &UcModel,
    sol: &crate::solver::Solution,
    start_minutes: u32,
    initial_on: &[bool],
) -> ScucSolution {
    let ng = case.num_generators();
    let nb = model.blocks.len();
    let ns = model.p.len();
    let mut on = vec![vec![false; nb]; ng];
    for g in 0..ng {
        for b in 0..nb {
            on[g][b] = match model.u[g][b] {
                UVal::Fixed(x) => x,
                UVal::Var(var) => sol.values[var] > 0.5,
            };
        }
    }
    let gen_ids = case.generators.iter().map(|g| g.id.clone()).collect();
    let schedule = CommitmentSchedule::from_on_matrix(gen_ids, start_minutes, on, initial_on);
    let mut commitment_cost = model.fixed_commitment_cost;
    for &(var, coef) in &model.commitment_terms {
        commitment_cost += coef * sol.values[var];
    }
    let dispatch: Vec<Vec<Vec<f64>>> = (0..ns)
        .map(|sc| {
            (0..model.n_steps)
                .map(|t| {
                    (0..ng)
                        .map(|g| model.p[sc][g][t].map(|v| sol.values[v]).unwrap_or(0.0))
                        .collect()
                })
                .collect()
        })
        .collect();
    let step_violation_mw: Vec<Vec<f64>> = model
        .step_slack
        .iter()
        .map(|per_step| {
            per_step
                .iter()
                .map(|(lines, short, surplus, resv)| {
                    lines.iter().map(|&v| sol.values[v]).sum::<f64>()
                        + sol.values[*short]
                        + sol.values[*surplus]
                        + sol.values[*resv]
                })
                .collect()
        })
        .collect();
    let scenario_dispatch_cost: Vec<f64> = model
        .dispatch_terms
        .iter()
        .map(|terms| terms.iter().map(|&(v, c)| c * sol.values[v]).sum())
        .collect();
    ScucSolution {
        schedule,
        objective: sol.objective,
        best_bound: sol.best_bound,
        commitment_cost,
        dispatch,
        step_violation_mw,
        scenario_dispatch_cost,
        status: sol.status,
    }
}


fn hourly_blocks(n: usize) -> Vec<Block> {
    (0..n)
        .map(|h| Block { start_h: h as f64, dur_h: 1.0, steps: h..h + 1 })
        .collect()
}

/// Build the day-ahead SCUC MILP over hourly forecasts, optionally pinning
/// commitments (`pin`) or imposing an add-only floor.
pub fn build_scuc(
    case: &Case,
    ptdf: &Ptdf,
    hourly_forecasts: &[Forecast],
    pin: Option<Vec<Vec<Option<bool>>>>,
    floor: Option<Vec<Vec<bool>>>,
    penalties: PenaltyPrices,
) -> Result<UcModel, MarketError> {
    if hourly_forecasts.is_empty() {
        return Err(MarketError::InvalidInput("forecast horizon must be >= 1 hour".into()));
    }
    let initial: Vec<(f64, f64)> = case
        .generators
        .iter()
        .map(|g| (g.initial_status as f64, if g.is_initially_on() { g.initial_output } else { 0.0 }))
        .collect();
    build_uc(&UcInputs {
        case,
        ptdf,
        scenarios: vec![(1.0, hourly_forecasts.to_vec())],
        step_minutes: 60,
        blocks: hourly_blocks(hourly_forecasts.len()),
        initial,
        pin,
        floor,
        penalties,
    })
}

/// Solve the day-ahead SCUC.
pub fn solve_scuc(
    case: &Case,
    ptdf: &Ptdf,
    hourly_forecasts: &[Forecast],
    opts: &ScucOptions,
) -> Result<ScucSolution, MarketError> {
    let model = build_scuc(case, ptdf, hourly_forecasts, None, None, opts.penalties)?;
    let sol = solve_milp(&model.mip, opts.gap, opts.time_limit)?;
    if sol.status != SolveStatus::Optimal {
        return Err(MarketError::InvalidInput(format!("SCUC reported {:?}", sol.status)));
    }
    let initial_on: Vec<bool> = case.generators.iter().map(|g| g.is_initially_on()).collect();
    Ok(extract_solution(case, &model, &sol, 0, &initial_on))
}

/// Build a stochastic extensive form: hourly commitment variables shared
/// by several equally long dispatch scenarios, with an add-only floor.
/// Used by the two-stage reliability commitment.
pub(crate) fn build_scuc_scenarios(
    case: &Case,
    ptdf: &Ptdf,
    scenarios: Vec<(f64, Vec<Forecast>)>,
    floor: Option<Vec<Vec<bool>>>,
    penalties: PenaltyPrices,
    zero_commitment_cost: bool,
) -> Result<UcModel, MarketError> {
    let n_hours = scenarios.first().map(|(_, s)| s.len()).unwrap_or(0);
    if n_hours == 0 {
        return Err(MarketError::InvalidInput("forecast horizon must be >= 1 hour".into()));
    }
    let initial: Vec<(f64, f64)> = case
        .generators
        .iter()
        .map(|g| (g.initial_status as f64, if g.is_initially_on() { g.initial_output } else { 0.0 }))
        .collect();
    let stripped;
    let case_ref = if zero_commitment_cost {
        let mut c = case.clone();
        for g in &mut c.generators {
            g.no_load_cost = 0.0;
            g.startup_cost = 0.0;
        }
        stripped = c;
        &stripped
    } else {
        case
    };
    build_uc(&UcInputs {
        case: case_ref,
        ptdf,
        scenarios,
        step_minutes: 60,
        blocks: hourly_blocks(n_hours),
        initial,
        pin: None,
        floor,
        penalties,
    })
}

/// Commitment-only frame over hourly blocks (no dispatch rows): the
/// Benders master for the two-stage reliability commitment.
pub(crate) fn build_commitment_frame(
    case: &Case,
    ptdf: &Ptdf,
    n_hours: usize,
    floor: Option<Vec<Vec<bool>>>,
    penalties: PenaltyPrices,
) -> Result<UcModel, MarketError> {
    let initial: Vec<(f64, f64)> = case
        .generators
        .iter()
        .map(|g| (g.initial_status as f64, if g.is_initially_on() { g.initial_output } else { 0.0 }))
        .collect();
    let blocks: Vec<Block> = (0..n_hours)
        .map(|h| Block { start_h: h as f64, dur_h: 1.0, steps: 0..0 })
        .collect();
    build_uc(&UcInputs {
        case,
        ptdf,
        scenarios: vec![(1.0, Vec::new())],
        step_minutes: 60,
        blocks,
        initial,
        pin: None,
        floor,
        penalties,
    })
}

/// Forward reliability assessment commitment: re-optimize against an
/// updated forecast, never de-committing anything in `prior`.
pub fn solve_frac(
    case: &Case,
    ptdf: &Ptdf,
    prior: &CommitmentSchedule,
    updated_forecasts: &[Forecast],
    opts: &ScucOptions,
) -> Result<ScucSolution, MarketError> {
    let initial: Vec<f64> = case.generators.iter().map(|g| g.initial_status as f64).collect();
    prior
        .validate(case, &initial)
        .map_err(|e| MarketError::InfeasibleFixing(format!("prior schedule invalid: {e}")))?;
    if updated_forecasts.len() != prior.n_hours() {
        return Err(MarketError::InvalidInput(format!(
            "forecast horizon {} != prior horizon {}",
            updated_forecasts.len(),
            prior.n_hours()
        )));
    }
    let model = build_scuc(
        case,
        ptdf,
        updated_forecasts,
        None,
        Some(prior.on.clone()),
        opts.penalties,
    )?;
    let sol = solve_milp(&model.mip, opts.gap, opts.time_limit)?;
    if sol.status != SolveStatus::Optimal {
        return Err(MarketError::InvalidInput(format!("FRAC reported {:?}", sol.status)));
    }
    let initial_on: Vec<bool> = case.generators.iter().map(|g| g.is_initially_on()).collect();
    let out = extract_solution(case, &model, &sol, prior.start_minutes, &initial_on);
    debug_assert!(prior.is_subset_of(&out.schedule));
    Ok(out)
}

/// Look-ahead commitment result: the window schedule (one column per
/// commitment block) and its expansion to the window's 15-minute steps.
#[derive(Debug, Clone)]
pub struct LacResult {
    pub schedule: CommitmentSchedule,
    /// Per generator, per window step commitment.
    pub step_on: Vec<Vec<bool>>,
    pub info: ScucSolution,
}

pub const LAC_STEP_MINUTES: u32 = 15;
pub const LAC_WINDOW_STEPS: usize = 12;

/// Rolling look-ahead commitment over a 3-hour window of 15-minute steps.
///
/// Units whose notification time exceeds the lead time to a block are
/// pinned to the incoming per-step schedule for that block; fast-start
/// units remain free. Commitment blocks follow clock hours.
pub fn run_lac(
    case: &Case,
    ptdf: &Ptdf,
    state: &SystemState,
    incoming_steps: &[Vec<bool>],
    window: &[Forecast],
    opts: &ScucOptions,
) -> Result<LacResult, MarketError> {
    if window.len() != LAC_WINDOW_STEPS {
        return Err(MarketError::InvalidInput(format!(
            "LAC window must span {LAC_WINDOW_STEPS} steps of {LAC_STEP_MINUTES} minutes"
        )));
    }
    if incoming_steps.len() != LAC_WINDOW_STEPS {
        return Err(MarketError::InvalidInput("incoming schedule must cover the window".into()));
    }
    if state.minutes % LAC_STEP_MINUTES != 0 {
        return Err(MarketError::InvalidInput("LAC must run on a 15-minute boundary".into()));
    }
    let ng = case.num_generators();

    // Clock-hour blocks intersected with the window.
    let mut blocks: Vec<Block> = Vec::new();
    let mut step = 0usize;
    while step < LAC_WINDOW_STEPS {
        let abs_min = state.minutes + step as u32 * LAC_STEP_MINUTES;
        let mins_into_hour = abs_min % 60;
        let steps_left_in_hour = ((60 - mins_into_hour) / LAC_STEP_MINUTES) as usize;
        let end = (step + steps_left_in_hour).min(LAC_WINDOW_STEPS);
        blocks.push(Block {
            start_h: step as f64 * LAC_STEP_MINUTES as f64 / 60.0,
            dur_h: (end - step) as f64 * LAC_STEP_MINUTES as f64 / 60.0,
            steps: step..end,
        });
        step = end;
    }

    // Notification-time pinning: lead time to a block is its start offset.
    let mut pin: Vec<Vec<Option<bool>>> = vec![vec![None; blocks.len()]; ng];
    for (g, gen) in case.generators.iter().enumerate() {
        for (b, blk) in blocks.iter().enumerate() {
            let lead_minutes = blk.start_h * 60.0;
            if gen.notification_time > lead_minutes + 1e-9 {
                pin[g][b] = Some(incoming_steps[blk.steps.start][g]);
            }
        }
    }

    let initial: Vec<(f64, f64)> = state.gens.iter().map(|gs| (gs.status_hours, gs.p_mw)).collect();
    let model = build_uc(&UcInputs {
        case,
        ptdf,
        scenarios: vec![(1.0, window.to_vec())],
        step_minutes: LAC_STEP_MINUTES,
        blocks,
        initial,
        pin: Some(pin),
        floor: None,
        penalties: opts.penalties,
    })?;
    let sol = solve_milp(&model.mip, opts.gap, opts.time_limit)?;
    if sol.status != SolveStatus::Optimal {
        return Err(MarketError::InvalidInput(format!("LAC reported {:?}", sol.status)));
    }
    let initial_on: Vec<bool> = state.gens.iter().map(|gs| gs.on).collect();
    let info = extract_solution(case, &model, &sol, state.minutes, &initial_on);
    let mut step_on = vec![vec![false; LAC_WINDOW_STEPS]; ng];
    for (b, blk) in model.blocks.iter().enumerate() {
        for s in blk.steps.clone() {
            for g in 0..ng {
                step_on[g][s] = info.schedule.on[g][b];
            }
        }
    }
    Ok(LacResult { schedule: info.schedule.clone(), step_on, info })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{compute_ptdf, Bus, Case, Generator};

    fn gen(id: &str, no_load: f64, price: f64, pmax: f64, startup: f64) -> Generator {
        Generator {
            id: id.into(),
            bus: 1,
            pmin: 0.0,
            pmax,
            ramp_rate: pmax, // effectively unconstrained over an hour
            min_up: 1,
            min_down: 1,
            startup_cost: startup,
            no_load_cost: no_load,
            cost_curve: vec![(pmax, price)],
            notification_time: 0.0,
            initial_status: -8,
            initial_output: 0.0,
        }
    }

    fn one_bus(case_gens: Vec<Generator>) -> Case {
        Case {
            buses: vec![Bus { id: 1, load_weight: 1.0 }],
            lines: vec![],
            generators: case_gens,
            reference_bus: 1,
            reserve_requirement: 0.0,
        }
    }

    #[test]
    fn commits_cheapest_total_cost_unit() {
        // A: no-load 100, marginal 10; B: no-load 0, marginal 50; 10 MW, 1 h.
        let case = one_bus(vec![gen("A", 100.0, 10.0, 100.0, 0.0), gen("B", 0.0, 50.0, 100.0, 0.0)]);
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        let sol = solve_scuc(
            &case,
            &ptdf,
            &[Forecast { load: 10.0, renewable: 0.0 }],
            &ScucOptions::default(),
        )
        .unwrap();
        assert!(sol.schedule.on[0][0]);
        assert!(!sol.schedule.on[1][0]);
        assert!((sol.objective - 200.0).abs() < 1e-6, "obj {}", sol.objective);
    }

    #[test]
    fn min_up_forces_second_hour() {
        let mut a = gen("A", 10.0, 10.0, 100.0, 50.0);
        a.min_up = 2;
        let case = one_bus(vec![a]);
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        // Pin a startup at hour 5; min_up must force hour 6 despite zero load.
        let fc = vec![Forecast { load: 0.0, renewable: 0.0 }; 8];
        let mut pin = vec![vec![None; 8]];
        pin[0][4] = Some(false);
        pin[0][5] = Some(true);
        let model = build_scuc(&case, &ptdf, &fc, Some(pin), None, PenaltyPrices::default()).unwrap();
        let sol = solve_milp(model.mip(), 0.0, 120.0).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let initial_on = [false];
        let out = super::extract_solution(&case, &model, &sol, 0, &initial_on);
        assert!(out.schedule.on[0][5]);
        assert!(out.schedule.on[0][6], "min_up forces hour 6");
        assert!(!out.schedule.on[0][7], "no reason to stay on at hour 7");
        let init: Vec<f64> = case.generators.iter().map(|g| g.initial_status as f64).collect();
        out.schedule.validate(&case, &init).unwrap();
    }

    #[test]
    fn unserved_demand_is_slack_served() {
        let case = one_bus(vec![gen("A", 0.0, 10.0, 50.0, 0.0)]);
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        let sol = solve_scuc(
            &case,
            &ptdf,
            &[Forecast { load: 80.0, renewable: 0.0 }],
            &ScucOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.step_violation_mw[0][0] - 30.0).abs() < 1e-6);
        // 50 * 10 + 30 * 3500 (balance penalty).
        assert!((sol.objective - (500.0 + 30.0 * 3500.0)).abs() < 1e-6);
    }

    #[test]
    fn frac_no_surprise_no_additions() {
        let case = one_bus(vec![gen("A", 50.0, 10.0, 100.0, 10.0), gen("B", 40.0, 30.0, 100.0, 10.0)]);
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        let fc = vec![
            Forecast { load: 60.0, renewable: 0.0 },
            Forecast { load: 80.0, renewable: 0.0 },
        ];
        let opts = ScucOptions::default();
        let da = solve_scuc(&case, &ptdf, &fc, &opts).unwrap();
        let frac = solve_frac(&case, &ptdf, &da.schedule, &fc, &opts).unwrap();
        assert_eq!(frac.schedule.on, da.schedule.on);
    }

    #[test]
    fn frac_commits_more_under_higher_forecast() {
        let case = one_bus(vec![gen("A", 50.0, 10.0, 100.0, 10.0), gen("B", 40.0, 30.0, 100.0, 10.0)]);
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        let cleared = vec![Forecast { load: 60.0, renewable: 0.0 }];
        let opts = ScucOptions::default();
        let da = solve_scuc(&case, &ptdf, &cleared, &opts).unwrap();
        assert!(!da.schedule.on[1][0], "B not needed at 60 MW");
        let updated = vec![Forecast { load: 150.0, renewable: 0.0 }];
        let frac = solve_frac(&case, &ptdf, &da.schedule, &updated, &opts).unwrap();
        assert!(frac.schedule.on[0][0] && frac.schedule.on[1][0], "B added");
        assert!(da.schedule.is_subset_of(&frac.schedule));
    }

    #[test]
    fn frac_rejects_invalid_prior() {
        let mut a = gen("A", 50.0, 10.0, 100.0, 10.0);
        a.min_down = 3;
        a.initial_status = 5;
        a.initial_output = 20.0;
        let case = one_bus(vec![a]);
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        // Prior turns the unit off for one hour then back on: min_down 3 violated.
        let prior = CommitmentSchedule::from_on_matrix(
            vec!["A".into()],
            0,
            vec![vec![false, true, true]],
            &[true],
        );
        let fc = vec![Forecast { load: 10.0, renewable: 0.0 }; 3];
        let err = solve_frac(&case, &ptdf, &prior, &fc, &ScucOptions::default());
        assert!(matches!(err, Err(MarketError::InfeasibleFixing(_))), "{err:?}");
    }

    fn lac_fixture(notification: f64) -> Case {
        let mut a = gen("A", 20.0, 10.0, 100.0, 5.0);
        a.initial_status = 8;
        a.initial_output = 50.0;
        a.notification_time = notification;
        let mut b = gen("B", 0.0, 80.0, 60.0, 0.0);
        b.notification_time = notification;
        one_bus(vec![a, b])
    }

    #[test]
    fn lac_all_fixed_returns_incoming() {
        let case = lac_fixture(240.0);
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        let mut state = SystemState::from_case(&case);
        state.minutes = 0;
        state.gens[0].p_mw = 50.0;
        let incoming: Vec<Vec<bool>> = (0..12).map(|_| vec![true, false]).collect();
        let window = vec![Forecast { load: 50.0, renewable: 0.0 }; 12];
        let res = run_lac(&case, &ptdf, &state, &incoming, &window, &ScucOptions::default()).unwrap();
        for t in 0..12 {
            assert!(res.step_on[0][t]);
            assert!(!res.step_on[1][t]);
        }
    }

    #[test]
    fn lac_fast_start_covers_spike() {
        let case = lac_fixture(240.0);
        let mut case = case;
        case.generators[1].notification_time = 0.0; // B is fast-start
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        let mut state = SystemState::from_case(&case);
        state.gens[0].p_mw = 50.0;
        let incoming: Vec<Vec<bool>> = (0..12).map(|_| vec![true, false]).collect();
        let mut window = vec![Forecast { load: 50.0, renewable: 0.0 }; 12];
        for f in window.iter_mut().skip(6) {
            f.load = 140.0; // exceeds A's 100 MW
        }
        let res = run_lac(&case, &ptdf, &state, &incoming, &window, &ScucOptions::default()).unwrap();
        assert!(res.step_on[1][8], "fast unit committed for the spike");
        assert!(res.step_on[0].iter().all(|&x| x), "slow unit untouched");
    }

    #[test]
    fn lac_no_notification_equals_fresh_scuc() {
        // All notification times zero: LAC re-optimizes freely, so with a
        // flat window and a committed cheap unit the incoming schedule stays.
        let case = lac_fixture(0.0);
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        let mut state = SystemState::from_case(&case);
        state.gens[0].p_mw = 50.0;
        let incoming: Vec<Vec<bool>> = (0..12).map(|_| vec![true, true]).collect();
        let window = vec![Forecast { load: 50.0, renewable: 0.0 }; 12];
        let res = run_lac(&case, &ptdf, &state, &incoming, &window, &ScucOptions::default()).unwrap();
        // Free re-optimization drops the expensive unit despite incoming.
        for t in 0..12 {
            assert!(res.step_on[0][t]);
            assert!(!res.step_on[1][t]);
        }
    }
}
