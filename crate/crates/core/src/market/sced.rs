//! Real-time dispatch formulations: single-interval SCED and the
//! twelve-period look-ahead dispatch (LAD).
//!
//! Both produce LPs over committed units only: piecewise energy segments,
//! ramp windows against the operating state, a loss-linearized system
//! balance, PTDF line limits with penalized slacks, and a ramp-limited
//! spinning-reserve product.

use super::{DispatchSolution, Forecast, MarketError, PenaltyPrices, SystemState};
use crate::grid::{Case, Generator, LossModel, Ptdf};
use crate::solver::{solve_lp, LinearProgram, Relation, SolveStatus};

/// Static inputs shared by every dispatch clearing of a case.
#[derive(Clone, Copy)]
pub struct ScedContext<'a> {
    pub case: &'a Case,
    pub ptdf: &'a Ptdf,
    pub loss: &'a LossModel,
    pub penalties: PenaltyPrices,
}

/// Minutes of ramping available within one RT-SCED interval.
pub const SCED_INTERVAL_MIN: f64 = 5.0;
/// Minutes of ramping credited to the spinning-reserve product.
pub const RESERVE_RAMP_MIN: f64 = 10.0;
pub const LAD_HORIZON: usize = 12;

struct GenVars {
    p: Option<usize>,
    reserve: Option<usize>,
}

pub struct ScedMap {
    gens: Vec<GenVars>,
    /// Objective contributions (variable, coefficient) of this interval.
    obj_terms: Vec<(usize, f64)>,
    balance_row: usize,
    line_rows: Vec<(usize, usize)>,
    reserve_row: usize,
    line_slack: Vec<usize>,
    bal_short: usize,
    bal_surplus: usize,
    resv_short: usize,
    /// Objective scale (hours represented by the interval).
    hours: f64,
}

/// Dispatch bounds for a committed unit given the prior state.
fn dispatch_bounds(
    gen: &Generator,
    prev_on: bool,
    prev_p: f64,
    ramp_minutes: f64,
) -> Result<(f64, f64), MarketError> {
    let ramp = ramp_minutes * gen.ramp_rate;
    let (lo, hi) = if prev_on {
        ((gen.pmin).max(prev_p - ramp), (gen.pmax).min(prev_p + ramp))
    } else {
        // A starting unit comes online at pmin (its start trajectory sits
        // inside the commitment granularity); faster units may go further.
        (gen.pmin, gen.pmax.min(gen.pmin.max(ramp)))
    };
    if lo > hi + 1e-9 {
        return Err(MarketError::InconsistentCommitment(format!(
            "generator {}: pmin {} exceeds the headroom reachable within ramp from {} MW",
            gen.id, gen.pmin, prev_p
        )));
    }
    Ok((lo, hi.max(lo)))
}

/// Append one interval's dispatch block to `lp`.
///
/// `bounds[g]` carries the p-variable bounds for committed units (None =
/// off). Returns the variable/row map for extraction.
#[allow(clippy::too_many_arguments)]
fn add_interval_block(
    lp: &mut LinearProgram,
    ctx: &ScedContext,
    forecast: Forecast,
    bounds: &[Option<(f64, f64)>],
    hours: f64,
    tag: &str,
) -> ScedMap {
    let case = ctx.case;
    let weights = case.load_weights();
    let lf = &ctx.loss.loss_factors;
    let net = forecast.net_load();
    let pen = &ctx.penalties;

    let mut gens = Vec::with_capacity(case.num_generators());
    let mut obj_terms: Vec<(usize, f64)> = Vec::new();
    let mut balance_terms: Vec<(usize, f64)> = Vec::new();
    for (g, gen) in case.generators.iter().enumerate() {
        let Some((lo, hi)) = bounds[g] else {
            gens.push(GenVars { p: None, reserve: None });
            continue;
        };
        let p = lp.add_variable(format!("p_{}_{tag}", gen.id), lo, hi, 0.0);
        // Piecewise energy cost via segment variables.
        if gen.pmax - gen.pmin > 1e-9 {
            let mut seg_terms = vec![(p, 1.0)];
            for (k, &(len, price)) in gen.cost_curve.iter().enumerate() {
                if len <= 0.0 {
                    continue;
                }
                let s = lp.add_variable(
                    format!("seg_{}_{k}_{tag}", gen.id),
                    0.0,
                    len,
                    price * hours,
                );
                obj_terms.push((s, price * hours));
                seg_terms.push((s, -1.0));
            }
            lp.add_constraint(format!("link_{}_{tag}", gen.id), seg_terms, Relation::Eq, gen.pmin);
        }
        let r = lp.add_variable(
            format!("r_{}_{tag}", gen.id),
            0.0,
            RESERVE_RAMP_MIN * gen.ramp_rate,
            0.0,
        );
        lp.add_constraint(
            format!("rescap_{}_{tag}", gen.id),
            vec![(p, 1.0), (r, 1.0)],
            Relation::Le,
            gen.pmax,
        );
        let bus = case.generator_bus_index(g);
        balance_terms.push((p, 1.0 - lf[bus]));
        gens.push(GenVars { p: Some(p), reserve: Some(r) });
    }

    // System balance with the loss linearization folded into coefficients.
    let bal_short = lp.add_variable(format!("bal_short_{tag}"), 0.0, f64::INFINITY, pen.energy_balance * hours);
    let bal_surplus = lp.add_variable(format!("bal_surp_{tag}"), 0.0, f64::INFINITY, pen.energy_balance * hours);
    obj_terms.push((bal_short, pen.energy_balance * hours));
    obj_terms.push((bal_surplus, pen.energy_balance * hours));
    let lf_dot_w: f64 = lf.iter().zip(&weights).map(|(a, b)| a * b).sum();
    let lf_dot_base: f64 = lf.iter().zip(&ctx.loss.base_injections).map(|(a, b)| a * b).sum();
    let bal_rhs = net * (1.0 - lf_dot_w) + ctx.loss.base_losses - lf_dot_base;
    let mut terms = balance_terms.clone();
    terms.push((bal_short, 1.0));
    terms.push((bal_surplus, -1.0));
    let balance_row = lp.add_constraint(format!("balance_{tag}"), terms, Relation::Eq, bal_rhs);

    // PTDF line limits with one shared violation slack per line.
    let mut line_rows = Vec::with_capacity(case.num_lines());
    let mut line_slack = Vec::with_capacity(case.num_lines());
    for (l, line) in case.lines.iter().enumerate() {
        let s = lp.add_variable(format!("ls_{l}_{tag}"), 0.0, f64::INFINITY, pen.transmission * hours);
        obj_terms.push((s, pen.transmission * hours));
        line_slack.push(s);
        let mut flow_terms: Vec<(usize, f64)> = Vec::new();
        for (g, gv) in gens.iter().enumerate() {
            if let Some(p) = gv.p {
                let coef = ctx.ptdf.factors[(l, case.generator_bus_index(g))];
                if coef != 0.0 {
                    flow_terms.push((p, coef));
                }
            }
        }
        // Net-load withdrawals enter the right-hand side.
        let k_l: f64 = weights
            .iter()
            .enumerate()
            .map(|(b, w)| ctx.ptdf.factors[(l, b)] * w * net)
            .sum();
        let mut le = flow_terms.clone();
        le.push((s, -1.0));
        let le_row =
            lp.add_constraint(format!("lmax_{l}_{tag}"), le, Relation::Le, line.flow_limit + k_l);
        let mut ge = flow_terms;
        ge.push((s, 1.0));
        let ge_row =
            lp.add_constraint(format!("lmin_{l}_{tag}"), ge, Relation::Ge, -line.flow_limit + k_l);
        line_rows.push((le_row, ge_row));
    }

    // Spinning reserve requirement.
    let resv_short = lp.add_variable(format!("resv_short_{tag}"), 0.0, f64::INFINITY, pen.reserve * hours);
    obj_terms.push((resv_short, pen.reserve * hours));
    let mut resv_terms: Vec<(usize, f64)> = gens
        .iter()
        .filter_map(|gv| gv.reserve.map(|r| (r, 1.0)))
        .collect();
    resv_terms.push((resv_short, 1.0));
    let reserve_row = lp.add_constraint(
        format!("reserve_{tag}"),
        resv_terms,
        Relation::Ge,
        case.reserve_requirement * forecast.load,
    );

    ScedMap {
        gens,
        obj_terms,
        balance_row,
        line_rows,
        reserve_row,
        line_slack,
        bal_short,
        bal_surplus,
        resv_short,
        hours,
    }
}

fn extract_dispatch(
    ctx: &ScedContext,
    lp_sol: &crate::solver::Solution,
    map: &ScedMap,
) -> DispatchSolution {
    let case = ctx.case;
    let h = map.hours;
    let gen_p: Vec<f64> = map
        .gens
        .iter()
        .map(|gv| gv.p.map(|v| lp_sol.values[v]).unwrap_or(0.0))
        .collect();
    let lambda = lp_sol.duals[map.balance_row] / h;
    let mu_resv = lp_sol.duals[map.reserve_row] / h;
    let mut lmp = vec![0.0; case.num_buses()];
    for (b, price) in lmp.iter_mut().enumerate() {
        let mut acc = lambda * (1.0 - ctx.loss.loss_factors[b]);
        for (l, &(le, ge)) in map.line_rows.iter().enumerate() {
            let mu = (lp_sol.duals[le] + lp_sol.duals[ge]) / h;
            acc += mu * ctx.ptdf.factors[(l, b)];
        }
        // The reserve requirement scales with load, so its dual prices load.
        acc += case.reserve_requirement * mu_resv;
        *price = acc;
    }
    DispatchSolution {
        gen_p,
        lmp,
        line_violation: map.line_slack.iter().map(|&v| lp_sol.values[v]).collect(),
        balance_short_mw: lp_sol.values[map.bal_short],
        balance_surplus_mw: lp_sol.values[map.bal_surplus],
        reserve_shortfall_mw: lp_sol.values[map.resv_short],
        objective: map
            .obj_terms
            .iter()
            .map(|&(v, c)| c * lp_sol.values[v])
            .sum::<f64>()
            / h,
        status: lp_sol.status,
        energy_price: lambda,
    }
}

/// Build the single-interval RT-SCED LP. Objective units are $/h.
pub fn build_sced(
    ctx: &ScedContext,
    state: &SystemState,
    forecast: Forecast,
    on: &[bool],
) -> Result<(LinearProgram, ScedMap), MarketError> {
    if forecast.load < 0.0 || forecast.renewable < 0.0 {
        return Err(MarketError::InvalidInput("forecast must be nonnegative".into()));
    }
    let mut bounds = Vec::with_capacity(ctx.case.num_generators());
    for (g, gen) in ctx.case.generators.iter().enumerate() {
        if !on[g] {
            bounds.push(None);
            continue;
        }
        let gs = &state.gens[g];
        bounds.push(Some(dispatch_bounds(gen, gs.on, gs.p_mw, SCED_INTERVAL_MIN)?));
    }
    let mut lp = LinearProgram::new();
    let map = add_interval_block(&mut lp, ctx, forecast, &bounds, 1.0, "t0");
    Ok((lp, map))
}

/// Solve the RT-SCED. Always feasible by construction (violation slacks).
pub fn solve_sced(
    ctx: &ScedContext,
    state: &SystemState,
    forecast: Forecast,
    on: &[bool],
) -> Result<DispatchSolution, MarketError> {
    let (lp, map) = build_sced(ctx, state, forecast, on)?;
    let sol = solve_lp(&lp)?;
    if sol.status != SolveStatus::Optimal {
        return Err(MarketError::InvalidInput(format!(
            "SCED unexpectedly {:?} (complete recourse violated)",
            sol.status
        )));
    }
    Ok(extract_dispatch(ctx, &sol, &map))
}

pub struct LadMap {
    intervals: Vec<ScedMap>,
}

#[derive(Debug, Clone)]
pub struct LadSolution {
    pub intervals: Vec<DispatchSolution>,
    /// Total cost in $ over the hour (5/60-weighted interval rates).
    pub total_cost: f64,
}

/// Build the hour-long look-ahead dispatch over twelve 5-minute periods.
///
/// `on` gives per-interval commitments, `[t][g]`. Inter-interval ramp
/// coupling ties consecutive committed intervals of each unit.
pub fn build_lad(
    ctx: &ScedContext,
    state: &SystemState,
    forecasts: &[Forecast],
    on: &[Vec<bool>],
) -> Result<(LinearProgram, LadMap), MarketError> {
    if forecasts.len() != LAD_HORIZON {
        return Err(MarketError::InvalidInput(format!(
            "LAD requires exactly {LAD_HORIZON} intervals, got {}",
            forecasts.len()
        )));
    }
    if on.len() != forecasts.len() {
        return Err(MarketError::InvalidInput("commitments must cover all intervals".into()));
    }
    if forecasts.iter().any(|f| f.load < 0.0 || f.renewable < 0.0) {
        return Err(MarketError::InvalidInput("forecast must be nonnegative".into()));
    }
    let case = ctx.case;
    let hours = SCED_INTERVAL_MIN / 60.0;
    let mut lp = LinearProgram::new();
    let mut maps: Vec<ScedMap> = Vec::with_capacity(forecasts.len());
    for (t, forecast) in forecasts.iter().enumerate() {
        let mut bounds = Vec::with_capacity(case.num_generators());
        for (g, gen) in case.generators.iter().enumerate() {
            if !on[t][g] {
                bounds.push(None);
                continue;
            }
            let (prev_on, prev_p) = if t == 0 {
                (state.gens[g].on, state.gens[g].p_mw)
            } else {
                (on[t - 1][g], f64::NAN)
            };
            if t == 0 {
                bounds.push(Some(dispatch_bounds(gen, prev_on, prev_p, SCED_INTERVAL_MIN)?));
            } else if prev_on {
                // Coupled by ramp rows below; static capability bounds here.
                bounds.push(Some((gen.pmin, gen.pmax)));
            } else {
                // Startup inside the horizon, same semantics as the myopic case.
                bounds.push(Some(dispatch_bounds(gen, false, 0.0, SCED_INTERVAL_MIN)?));
            }
        }
        let map = add_interval_block(&mut lp, ctx, *forecast, &bounds, hours, &format!("t{t}"));
        // Ramp coupling to the previous interval.
        if t > 0 {
            for (g, gen) in case.generators.iter().enumerate() {
                if let (Some(prev), Some(cur)) = (maps[t - 1].gens[g].p, map.gens[g].p) {
                    let limit = SCED_INTERVAL_MIN * gen.ramp_rate;
                    lp.add_constraint(
                        format!("rampup_{}_t{t}", gen.id),
                        vec![(cur, 1.0), (prev, -1.0)],
                        Relation::Le,
                        limit,
                    );
                    lp.add_constraint(
                        format!("rampdn_{}_t{t}", gen.id),
                        vec![(cur, 1.0), (prev, -1.0)],
                        Relation::Ge,
                        -limit,
                    );
                }
            }
        }
        maps.push(map);
    }
    Ok((lp, LadMap { intervals: maps }))
}

pub fn solve_lad(
    ctx: &ScedContext,
    state: &SystemState,
    forecasts: &[Forecast],
    on: &[Vec<bool>],
) -> Result<LadSolution, MarketError> {
    let (lp, map) = build_lad(ctx, state, forecasts, on)?;
    let sol = solve_lp(&lp)?;
    if sol.status != SolveStatus::Optimal {
        return Err(MarketError::InvalidInput(format!(
            "LAD unexpectedly {:?} (complete recourse violated)",
            sol.status
        )));
    }
    let intervals: Vec<DispatchSolution> = map
        .intervals
        .iter()
        .map(|m| extract_dispatch(ctx, &sol, m))
        .collect();
    let hours = SCED_INTERVAL_MIN / 60.0;
    let total_cost = intervals.iter().map(|i| i.objective * hours).sum();
    Ok(LadSolution { intervals, total_cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{compute_ptdf, Bus, Case, Generator, Line, LossModel};

    fn gen(id: &str, bus: u32, pmin: f64, pmax: f64, price: f64, ramp: f64, on: bool) -> Generator {
        Generator {
            id: id.into(),
            bus,
            pmin,
            pmax,
            ramp_rate: ramp,
            min_up: 1,
            min_down: 1,
            startup_cost: 0.0,
            no_load_cost: 0.0,
            cost_curve: vec![(pmax - pmin, price)],
            notification_time: 0.0,
            initial_status: if on { 8 } else { -8 },
            initial_output: if on { pmin } else { 0.0 },
        }
    }

    fn one_bus_case() -> Case {
        let mut g1 = gen("G1", 1, 0.0, 50.0, 10.0, 100.0, true);
        g1.initial_output = 0.0;
        let mut g2 = gen("G2", 1, 0.0, 50.0, 20.0, 100.0, true);
        g2.initial_output = 0.0;
        Case {
            buses: vec![Bus { id: 1, load_weight: 1.0 }],
            lines: vec![],
            generators: vec![g1, g2],
            reference_bus: 1,
            reserve_requirement: 0.0,
        }
    }

    fn ctx_parts(case: &Case) -> (crate::grid::Ptdf, LossModel) {
        let ptdf = compute_ptdf(case).unwrap();
        let loss = LossModel::lossless(case);
        (ptdf, loss)
    }

    #[test]
    fn merit_order_dispatch_and_lmp() {
        let case = one_bus_case();
        let (ptdf, loss) = ctx_parts(&case);
        let ctx = ScedContext { case: &case, ptdf: &ptdf, loss: &loss, penalties: Default::default() };
        let state = SystemState::from_case(&case);
        let sol = solve_sced(
            &ctx,
            &state,
            Forecast { load: 60.0, renewable: 0.0 },
            &[true, true],
        )
        .unwrap();
        assert!((sol.gen_p[0] - 50.0).abs() < 1e-7);
        assert!((sol.gen_p[1] - 10.0).abs() < 1e-7);
        assert!((sol.objective - 700.0).abs() < 1e-7);
        assert!((sol.lmp[0] - 20.0).abs() < 1e-7);
    }

    #[test]
    fn congestion_splits_prices() {
        // Cheap unit at bus 1, expensive at bus 2, 50 MW line, 80 MW load at bus 2.
        let case = Case {
            buses: vec![Bus { id: 1, load_weight: 0.0 }, Bus { id: 2, load_weight: 1.0 }],
            lines: vec![Line {
                from_bus: 1,
                to_bus: 2,
                reactance: 0.1,
                resistance: 0.0,
                flow_limit: 50.0,
            }],
            generators: vec![
                gen("cheap", 1, 0.0, 200.0, 10.0, 100.0, true),
                gen("dear", 2, 0.0, 200.0, 30.0, 100.0, true),
            ],
            reference_bus: 1,
            reserve_requirement: 0.0,
        };
        case.validate().unwrap();
        let (ptdf, loss) = ctx_parts(&case);
        let ctx = ScedContext { case: &case, ptdf: &ptdf, loss: &loss, penalties: Default::default() };
        let mut state = SystemState::from_case(&case);
        state.gens[0].p_mw = 0.0;
        state.gens[1].p_mw = 0.0;
        let sol = solve_sced(&ctx, &state, Forecast { load: 80.0, renewable: 0.0 }, &[true, true]).unwrap();
        assert!((sol.gen_p[0] - 50.0).abs() < 1e-6, "cheap {}", sol.gen_p[0]);
        assert!((sol.gen_p[1] - 30.0).abs() < 1e-6, "dear {}", sol.gen_p[1]);
        assert!((sol.lmp[0] - 10.0).abs() < 1e-6, "lmp1 {}", sol.lmp[0]);
        assert!((sol.lmp[1] - 30.0).abs() < 1e-6, "lmp2 {}", sol.lmp[1]);
        assert!(sol.line_violation[0].abs() < 1e-9);
    }

    #[test]
    fn empty_system_zero_cost() {
        let case = one_bus_case();
        let (ptdf, loss) = ctx_parts(&case);
        let ctx = ScedContext { case: &case, ptdf: &ptdf, loss: &loss, penalties: Default::default() };
        let state = SystemState::from_case(&case);
        let sol = solve_sced(&ctx, &state, Forecast { load: 0.0, renewable: 0.0 }, &[false, false]).unwrap();
        assert!(sol.gen_p.iter().all(|&p| p == 0.0));
        assert!(sol.objective.abs() < 1e-9);
    }

    #[test]
    fn ramp_window_binds_dispatch() {
        let mut case = one_bus_case();
        case.generators[0].ramp_rate = 1.0; // 5 MW per interval
        case.generators[0].initial_output = 10.0;
        case.generators[0].initial_status = 8;
        let (ptdf, loss) = ctx_parts(&case);
        let ctx = ScedContext { case: &case, ptdf: &ptdf, loss: &loss, penalties: Default::default() };
        let mut state = SystemState::from_case(&case);
        state.gens[0].p_mw = 10.0;
        let sol = solve_sced(&ctx, &state, Forecast { load: 60.0, renewable: 0.0 }, &[true, true]).unwrap();
        // Cheap unit limited to 15 MW; the expensive one covers the rest.
        assert!((sol.gen_p[0] - 15.0).abs() < 1e-7);
        assert!((sol.gen_p[1] - 45.0).abs() < 1e-7);
    }

    #[test]
    fn inconsistent_commitment_detected() {
        let mut case = one_bus_case();
        case.generators[0].pmin = 40.0;
        case.generators[0].cost_curve = vec![(10.0, 10.0)];
        case.generators[0].ramp_rate = 0.5; // 2.5 MW per interval
        case.generators[0].initial_output = 40.0;
        let (ptdf, loss) = ctx_parts(&case);
        let ctx = ScedContext { case: &case, ptdf: &ptdf, loss: &loss, penalties: Default::default() };
        let mut state = SystemState::from_case(&case);
        // A state below pmin (mid-shutdown) cannot recover pmin within ramp.
        state.gens[0].p_mw = 10.0;
        let err = solve_sced(&ctx, &state, Forecast { load: 60.0, renewable: 0.0 }, &[true, true]);
        assert!(matches!(err, Err(MarketError::InconsistentCommitment(_))));
    }

    #[test]
    fn startup_enters_at_pmin() {
        let mut case = one_bus_case();
        case.generators[0].pmin = 40.0;
        case.generators[0].cost_curve = vec![(10.0, 10.0)];
        case.generators[0].ramp_rate = 0.5;
        case.generators[0].initial_status = -8;
        case.generators[0].initial_output = 0.0;
        let (ptdf, loss) = ctx_parts(&case);
        let ctx = ScedContext { case: &case, ptdf: &ptdf, loss: &loss, penalties: Default::default() };
        let state = SystemState::from_case(&case);
        let sol = solve_sced(&ctx, &state, Forecast { load: 60.0, renewable: 0.0 }, &[true, true]).unwrap();
        assert!((sol.gen_p[0] - 40.0).abs() < 1e-7, "starting unit held at pmin");
    }

    #[test]
    fn lad_constant_forecast_is_stationary() {
        let case = one_bus_case();
        let (ptdf, loss) = ctx_parts(&case);
        let ctx = ScedContext { case: &case, ptdf: &ptdf, loss: &loss, penalties: Default::default() };
        let state = SystemState::from_case(&case);
        let forecasts = vec![Forecast { load: 60.0, renewable: 0.0 }; 12];
        let on = vec![vec![true, true]; 12];
        let lad = solve_lad(&ctx, &state, &forecasts, &on).unwrap();
        let per_interval_cost = 700.0 * 5.0 / 60.0;
        assert!((lad.total_cost - 12.0 * per_interval_cost).abs() < 1e-6);
        for iv in &lad.intervals {
            assert!((iv.objective - 700.0).abs() < 1e-6);
        }
    }

    /// Sequential single-interval SCED rollout (the myopic baseline).
    fn myopic_rollout(
        ctx: &ScedContext,
        start: &SystemState,
        forecasts: &[Forecast],
        on: &[Vec<bool>],
    ) -> (Vec<DispatchSolution>, f64) {
        let mut state = start.clone();
        let mut total = 0.0;
        let mut out = Vec::new();
        for (t, fc) in forecasts.iter().enumerate() {
            let sol = solve_sced(ctx, &state, *fc, &on[t]).unwrap();
            total += sol.objective * SCED_INTERVAL_MIN / 60.0;
            state.advance(SCED_INTERVAL_MIN as u32, &on[t], &sol.gen_p);
            out.push(sol);
        }
        (out, total)
    }

    #[test]
    fn lad_prepositions_for_ramp_step() {
        // Cheap base unit, a mid-cost slow unit (1 MW/min), and a scarce
        // peaker. Load steps +70 MW at t = 7: the myopic rollout leaves the
        // slow unit parked at zero and pays the peaker; LAD ramps it early.
        let mut case = one_bus_case();
        case.generators[0].cost_curve = vec![(100.0, 20.0)]; // base, 100 MW
        case.generators[0].pmax = 100.0;
        case.generators[0].ramp_rate = 100.0;
        case.generators[0].initial_output = 0.0;
        case.generators[1].cost_curve = vec![(60.0, 40.0)]; // slow mid unit
        case.generators[1].pmax = 60.0;
        case.generators[1].ramp_rate = 1.0; // 5 MW per interval
        case.generators[1].initial_output = 0.0;
        case.generators.push(gen("peak", 1, 0.0, 50.0, 500.0, 100.0, true));
        case.generators[2].initial_output = 0.0;
        case.validate().unwrap();
        let (ptdf, loss) = ctx_parts(&case);
        let ctx = ScedContext { case: &case, ptdf: &ptdf, loss: &loss, penalties: Default::default() };
        let state = SystemState::from_case(&case);
        let mut forecasts = vec![Forecast { load: 60.0, renewable: 0.0 }; 12];
        for f in forecasts.iter_mut().skip(7) {
            f.load = 130.0;
        }
        let on = vec![vec![true, true, true]; 12];
        let lad = solve_lad(&ctx, &state, &forecasts, &on).unwrap();
        let (myopic, myopic_total) = myopic_rollout(&ctx, &state, &forecasts, &on);

        // The myopic schedule is feasible for LAD, so LAD can only improve.
        assert!(
            lad.total_cost <= myopic_total + 1e-6,
            "LAD {} vs myopic {}",
            lad.total_cost,
            myopic_total
        );
        assert!(lad.total_cost < myopic_total - 1.0, "strict improvement expected");
        // Ramp feasibility of the slow unit: per-period delta <= 5 MW.
        let mut prev = 0.0;
        for iv in &lad.intervals {
            assert!((iv.gen_p[1] - prev).abs() <= 5.0 + 1e-7);
            prev = iv.gen_p[1];
        }
        // Pre-positioning starts by t = 4 in LAD; myopic stays parked.
        assert!(lad.intervals[4].gen_p[1] > 1e-6, "LAD pre-positions the slow unit");
        assert!(myopic[6].gen_p[1] < 1e-6, "myopic leaves it at zero before the step");
    }
}
