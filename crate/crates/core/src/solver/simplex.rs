//! Bounded-variable primal simplex with Dantzig pricing, Bland's rule as the
//! anti-cycling fallback, phase-1 artificials, and shadow-price duals.

use super::basis::{Factorization, Scratch};
use super::{tol, LinearProgram, Relation, Solution, SolveStatus, SolverError};

const RATIO_TOL: f64 = 1e-9;
const TIE_TOL: f64 = 1e-10;
const DEGENERATE_STEP: f64 = 1e-12;
const REFACTOR_INTERVAL: usize = 64;
const PHASE1_FEAS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable parked at zero.
    Free,
}

#[derive(Debug, PartialEq, Eq)]
enum RunOutcome {
    Optimal,
    Unbounded,
}

pub(super) struct Simplex {
    n_struct: usize,
    m: usize,
    /// Matrix columns for structurals, logicals (-1) and artificials.
    cols: Vec<Vec<(u32, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Phase-2 (true) costs per column.
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VState>,
    basis: Vec<usize>,
    n_artificial: usize,
    fact: Factorization,
    scratch: Scratch,
    // Reusable dense buffers.
    y: Vec<f64>,
    w: Vec<f64>,
    rhs_buf: Vec<f64>,
    cb_buf: Vec<f64>,
    bland: bool,
    degenerate_streak: usize,
    iterations: usize,
}

impl Simplex {
    pub(super) fn new(
        lp: &LinearProgram,
        lower_override: &[f64],
        upper_override: &[f64],
    ) -> Result<Simplex, SolverError> {
        let n = lp.variables.len();
        let m = lp.constraints.len();
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n + m];
        // Structural columns, duplicate terms accumulated.
        let mut acc: Vec<f64> = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        for (i, con) in lp.constraints.iter().enumerate() {
            touched.clear();
            for &(j, v) in &con.terms {
                if acc[j] == 0.0 && v != 0.0 {
                    touched.push(j);
                }
                acc[j] += v;
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != 0.0 {
                    cols[j].push((i as u32, acc[j]));
                }
                acc[j] = 0.0;
            }
        }
        let mut lower = lower_override.to_vec();
        let mut upper = upper_override.to_vec();
        let mut cost = lp.objective.clone();
        for (i, con) in lp.constraints.iter().enumerate() {
            cols[n + i].push((i as u32, -1.0));
            let (lo, up) = match con.relation {
                Relation::Le => (f64::NEG_INFINITY, con.rhs),
                Relation::Ge => (con.rhs, f64::INFINITY),
                Relation::Eq => (con.rhs, con.rhs),
            };
            lower.push(lo);
            upper.push(up);
            cost.push(0.0);
        }
        Ok(Simplex {
            n_struct: n,
            m,
            cols,
            lower,
            upper,
            cost,
            x: vec![0.0; n + m],
            state: vec![VState::AtLower; n + m],
            basis: Vec::new(),
            n_artificial: 0,
            fact: Factorization::default(),
            scratch: Scratch::default(),
            y: vec![0.0; m],
            w: vec![0.0; m],
            rhs_buf: vec![0.0; m],
            cb_buf: vec![0.0; m],
            bland: false,
            degenerate_streak: 0,
            iterations: 0,
        })
    }

    fn total_cols(&self) -> usize {
        self.cols.len()
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.upper[j] - self.lower[j] <= 0.0
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_struct + self.m
    }

    /// Initialize nonbasic states, the slack basis, and phase-1 artificials.
    fn crash_basis(&mut self) {
        let n = self.n_struct;
        let m = self.m;
        for j in 0..n + m {
            self.state[j] = if self.lower[j].is_finite() {
                self.x[j] = self.lower[j];
                VState::AtLower
            } else if self.upper[j].is_finite() {
                self.x[j] = self.upper[j];
                VState::AtUpper
            } else {
                self.x[j] = 0.0;
                VState::Free
            };
        }
        // Row activities of the structural part.
        let mut act = vec![0.0; m];
        for j in 0..n {
            let xj = self.x[j];
            if xj != 0.0 {
                for &(r, v) in &self.cols[j] {
                    act[r as usize] += v * xj;
                }
            }
        }
        self.basis.clear();
        for i in 0..m {
            let logical = n + i;
            let (lo, up) = (self.lower[logical], self.upper[logical]);
            if act[i] >= lo - tol::FEAS && act[i] <= up + tol::FEAS {
                self.basis.push(logical);
                self.state[logical] = VState::Basic;
                self.x[logical] = act[i];
            } else {
                // Logical to its nearest bound; artificial carries the gap.
                let (bound, sign, viol) = if act[i] > up {
                    (up, -1.0, act[i] - up)
                } else {
                    (lo, 1.0, lo - act[i])
                };
                self.x[logical] = bound;
                self.state[logical] = if sign < 0.0 { VState::AtUpper } else { VState::AtLower };
                let art = self.total_cols();
                self.cols.push(vec![(i as u32, sign)]);
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                self.cost.push(0.0);
                self.x.push(viol);
                self.state.push(VState::Basic);
                self.basis.push(art);
                self.n_artificial += 1;
            }
        }
    }

    fn refactor(&mut self) -> Result<(), SolverError> {
        let col_refs: Vec<&[(u32, f64)]> =
            self.basis.iter().map(|&j| self.cols[j].as_slice()).collect();
        if !self.fact.factor(&col_refs) {
            return Err(SolverError::NumericalFailure("singular basis".into()));
        }
        self.recompute_basic_values();
        Ok(())
    }

    /// x_B = B^-1 (-N x_N), removing accumulated drift.
    fn recompute_basic_values(&mut self) {
        let m = self.m;
        for v in self.rhs_buf.iter_mut() {
            *v = 0.0;
        }
        for j in 0..self.total_cols() {
            if self.state[j] != VState::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                for &(r, v) in &self.cols[j] {
                    self.rhs_buf[r as usize] -= v * xj;
                }
            }
        }
        let mut z = vec![0.0; m];
        self.fact.ftran(&self.rhs_buf, &mut z, &mut self.scratch);
        for slot in 0..m {
            self.x[self.basis[slot]] = z[slot];
        }
    }

    fn reduced_cost(&self, j: usize, y: &[f64], costs: &[f64]) -> f64 {
        let mut rc = costs[j];
        for &(r, v) in &self.cols[j] {
            rc -= y[r as usize] * v;
        }
        rc
    }

    /// One simplex phase under the given costs.
    fn run(&mut self, costs: &[f64], allow_artificial_entering: bool) -> Result<RunOutcome, SolverError> {
        let m = self.m;
        let iter_cap = 200 * (m + self.n_struct) + 10_000;
        let mut since_refactor = 0usize;
        self.refactor()?;
        loop {
            self.iterations += 1;
            if self.iterations > iter_cap {
                return Err(SolverError::NumericalFailure(
                    "cycling guard exceeded: iteration cap reached".into(),
                ));
            }
            if since_refactor >= REFACTOR_INTERVAL {
                self.refactor()?;
                since_refactor = 0;
            }
            // Duals for pricing.
            for slot in 0..m {
                self.cb_buf[slot] = costs[self.basis[slot]];
            }
            self.fact.btran(&self.cb_buf, &mut self.y, &mut self.scratch);

            // Pricing: Dantzig (largest violation) or Bland (lowest index).
            let mut entering: Option<(usize, f64, f64)> = None; // col, |rc|, sigma
            for j in 0..self.total_cols() {
                if self.state[j] == VState::Basic || self.is_fixed(j) {
                    continue;
                }
                if self.is_artificial(j) && !allow_artificial_entering {
                    continue;
                }
                let rc = self.reduced_cost(j, &self.y, costs);
                let sigma = match self.state[j] {
                    VState::AtLower => {
                        if rc < -tol::OPT {
                            1.0
                        } else {
                            continue;
                        }
                    }
                    VState::AtUpper => {
                        if rc > tol::OPT {
                            -1.0
                        } else {
                            continue;
                        }
                    }
                    VState::Free => {
                        if rc < -tol::OPT {
                            1.0
                        } else if rc > tol::OPT {
                            -1.0
                        } else {
                            continue;
                        }
                    }
                    VState::Basic => unreachable!(),
                };
                if self.bland {
                    entering = Some((j, rc.abs(), sigma));
                    break;
                }
                match entering {
                    Some((_, best, _)) if rc.abs() <= best => {}
                    _ => entering = Some((j, rc.abs(), sigma)),
                }
            }
            let (q, _, sigma) = match entering {
                Some(e) => e,
                None => return Ok(RunOutcome::Optimal),
            };

            // Direction of basic variables: x_B(t) = x_B - sigma * w * t.
            for v in self.rhs_buf.iter_mut() {
                *v = 0.0;
            }
            for &(r, v) in &self.cols[q] {
                self.rhs_buf[r as usize] = v;
            }
            self.fact.ftran(&self.rhs_buf, &mut self.w, &mut self.scratch);

            // Ratio test.
            let own_range = self.upper[q] - self.lower[q]; // inf for free vars
            let mut min_t = own_range;
            for slot in 0..m {
                let d = sigma * self.w[slot];
                if d.abs() <= RATIO_TOL {
                    continue;
                }
                let b = self.basis[slot];
                let t = if d > 0.0 {
                    if self.lower[b].is_finite() {
                        (self.x[b] - self.lower[b]) / d
                    } else {
                        continue;
                    }
                } else if self.upper[b].is_finite() {
                    (self.x[b] - self.upper[b]) / d
                } else {
                    continue;
                };
                let t = t.max(0.0);
                if t < min_t {
                    min_t = t;
                }
            }
            if !min_t.is_finite() {
                return Ok(RunOutcome::Unbounded);
            }
            // Select the leaving slot among near-minimal ratios.
            let mut leave: Option<(usize, bool)> = None; // slot, hits_lower
            let mut best_mag = 0.0;
            for slot in 0..m {
                let d = sigma * self.w[slot];
                if d.abs() <= RATIO_TOL {
                    continue;
                }
                let b = self.basis[slot];
                let (t, hits_lower) = if d > 0.0 {
                    if self.lower[b].is_finite() {
                        ((self.x[b] - self.lower[b]) / d, true)
                    } else {
                        continue;
                    }
                } else if self.upper[b].is_finite() {
                    ((self.x[b] - self.upper[b]) / d, false)
                } else {
                    continue;
                };
                let t = t.max(0.0);
                if t <= min_t + TIE_TOL {
                    let better = match leave {
                        None => true,
                        Some((cur_slot, _)) => {
                            if self.bland {
                                self.basis[slot] < self.basis[cur_slot]
                            } else {
                                d.abs() > best_mag + TIE_TOL
                                    || (d.abs() >= best_mag - TIE_TOL
                                        && self.basis[slot] < self.basis[cur_slot])
                            }
                        }
                    };
                    if better {
                        leave = Some((slot, hits_lower));
                        best_mag = d.abs();
                    }
                }
            }

            let step = match leave {
                Some(_) => min_t,
                None => own_range, // bound flip
            };
            if step <= DEGENERATE_STEP {
                self.degenerate_streak += 1;
                if self.degenerate_streak > 5 * (m + self.n_struct) {
                    self.bland = true;
                }
            } else {
                self.degenerate_streak = 0;
            }

            // Apply the move.
            if step > 0.0 {
                for slot in 0..m {
                    let wv = self.w[slot];
                    if wv != 0.0 {
                        let b = self.basis[slot];
                        self.x[b] -= sigma * wv * step;
                    }
                }
            }
            match leave {
                None => {
                    // Bound flip: snap exactly to the opposite bound.
                    if sigma > 0.0 {
                        self.x[q] = self.upper[q];
                        self.state[q] = VState::AtUpper;
                    } else {
                        self.x[q] = self.lower[q];
                        self.state[q] = VState::AtLower;
                    }
                }
                Some((slot, hits_lower)) => {
                    let b = self.basis[slot];
                    self.x[b] = if hits_lower { self.lower[b] } else { self.upper[b] };
                    self.state[b] = if hits_lower { VState::AtLower } else { VState::AtUpper };
                    self.x[q] = match self.state[q] {
                        VState::AtLower => self.lower[q] + step * sigma,
                        VState::AtUpper => self.upper[q] + step * sigma,
                        VState::Free => step * sigma,
                        VState::Basic => unreachable!(),
                    };
                    self.state[q] = VState::Basic;
                    self.basis[slot] = q;
                    self.fact.push_eta(slot, &self.w);
                    since_refactor += 1;
                }
            }
        }
    }

    /// Drive artificials out of the basis where possible, then freeze them.
    fn retire_artificials(&mut self) -> Result<(), SolverError> {
        let m = self.m;
        let first_art = self.n_struct + m;
        // Pivot-out pass is skipped for huge artificial sets; freezing basic
        // zero artificials is correct either way.
        let basic_arts: Vec<usize> = (0..m).filter(|&s| self.basis[s] >= first_art).collect();
        if basic_arts.len() <= 200 {
            let mut e = vec![0.0; m];
            let mut rho = vec![0.0; m];
            for slot in basic_arts {
                if self.basis[slot] < first_art {
                    continue;
                }
                for v in e.iter_mut() {
                    *v = 0.0;
                }
                // rho = row `slot` of B^-1 (by matrix row id).
                let mut unit = vec![0.0; m];
                unit[slot] = 1.0;
                self.fact.btran(&unit, &mut rho, &mut self.scratch);
                let mut found = None;
                for j in 0..first_art {
                    if self.state[j] == VState::Basic {
                        continue;
                    }
                    let mut alpha = 0.0;
                    for &(r, v) in &self.cols[j] {
                        alpha += rho[r as usize] * v;
                    }
                    if alpha.abs() > 1e-7 {
                        found = Some(j);
                        break;
                    }
                }
                if let Some(j) = found {
                    for v in self.rhs_buf.iter_mut() {
                        *v = 0.0;
                    }
                    for &(r, v) in &self.cols[j] {
                        self.rhs_buf[r as usize] = v;
                    }
                    self.fact.ftran(&self.rhs_buf, &mut self.w, &mut self.scratch);
                    let art = self.basis[slot];
                    self.state[art] = VState::AtLower;
                    self.x[art] = 0.0;
                    self.state[j] = VState::Basic;
                    self.basis[slot] = j;
                    self.fact.push_eta(slot, &self.w);
                    if self.fact.num_etas() >= REFACTOR_INTERVAL {
                        self.refactor()?;
                    }
                }
            }
        }
        for j in first_art..self.total_cols() {
            self.lower[j] = 0.0;
            self.upper[j] = 0.0;
            self.cost[j] = 0.0;
        }
        Ok(())
    }

    fn primal_feasible(&self, slack: f64) -> bool {
        (0..self.total_cols()).all(|j| {
            self.x[j] >= self.lower[j] - slack && self.x[j] <= self.upper[j] + slack
        })
    }

    pub(super) fn solve(mut self, lp: &LinearProgram) -> Result<Solution, SolverError> {
        self.crash_basis();

        if self.n_artificial > 0 {
            let mut phase1_cost = vec![0.0; self.total_cols()];
            for j in self.n_struct + self.m..self.total_cols() {
                phase1_cost[j] = 1.0;
            }
            match self.run(&phase1_cost, false)? {
                RunOutcome::Optimal => {}
                RunOutcome::Unbounded => {
                    return Err(SolverError::NumericalFailure(
                        "phase 1 reported unbounded".into(),
                    ))
                }
            }
            let infeas: f64 =
                (self.n_struct + self.m..self.total_cols()).map(|j| self.x[j]).sum();
            if infeas > PHASE1_FEAS {
                return Ok(Solution::infeasible(lp.constraints.len()));
            }
            self.retire_artificials()?;
        }

        let costs = self.cost.clone();
        let outcome = self.run(&costs, false)?;
        if outcome == RunOutcome::Unbounded {
            return Ok(Solution::unbounded());
        }

        // Remove drift and validate.
        self.refactor()?;
        if !self.primal_feasible(1e-7) {
            return Err(SolverError::NumericalFailure(
                "optimal basis failed feasibility verification".into(),
            ));
        }

        let m = self.m;
        for slot in 0..m {
            self.cb_buf[slot] = self.cost[self.basis[slot]];
        }
        self.fact.btran(&self.cb_buf, &mut self.y, &mut self.scratch);

        let values: Vec<f64> = self.x[..self.n_struct].to_vec();
        let mut objective = lp.objective_offset;
        for j in 0..self.n_struct {
            objective += lp.objective[j] * values[j];
        }
        let duals: Vec<f64> = self.y[..m].to_vec();
        let reduced_costs: Vec<f64> = (0..self.n_struct)
            .map(|j| self.reduced_cost(j, &self.y, &self.cost))
            .collect();
        Ok(Solution {
            status: SolveStatus::Optimal,
            values,
            objective,
            duals,
            reduced_costs,
            best_bound: objective,
        })
    }
}

/// Solve a linear program to optimality.
pub fn solve_lp(lp: &LinearProgram) -> Result<Solution, SolverError> {
    lp.validate()?;
    let lower: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = lp.variables.iter().map(|v| v.upper).collect();
    solve_lp_with_bounds(lp, &lower, &upper)
}

/// Solve with replacement variable bounds (branch-and-bound nodes, Benders
/// subproblems with fixed first-stage variables).
pub fn solve_lp_with_bounds(
    lp: &LinearProgram,
    lower: &[f64],
    upper: &[f64],
) -> Result<Solution, SolverError> {
    for j in 0..lower.len() {
        if lower[j] > upper[j] {
            return Ok(Solution::infeasible(lp.constraints.len()));
        }
    }
    Simplex::new(lp, lower, upper)?.solve(lp)
}
