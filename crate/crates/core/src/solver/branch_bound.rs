//! Branch-and-bound for mixed-integer linear programs: best-bound node
//! selection, most-fractional branching with lowest-index tie-breaking, and a
//! fix-and-resolve rounding heuristic that supplies incumbents early.
//!
//! Incumbents are always produced by re-solving the LP with all integer
//! variables fixed, so reported objectives are exact LP optima for the
//! chosen integer assignment rather than near-integral relaxation values.

use super::simplex::solve_lp_with_bounds;
use super::{tol, MixedIntegerProgram, Solution, SolveStatus, SolverError};
use std::collections::BinaryHeap;
use std::time::Instant;

const NODE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, Default)]
pub struct MilpStats {
    pub nodes_solved: usize,
    pub branches: usize,
    pub heuristic_incumbents: usize,
}

struct Node {
    /// Bound inherited from the parent relaxation.
    bound: f64,
    id: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap; invert so the smallest (bound, id) pops first.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn fractionality(v: f64) -> f64 {
    (v - v.round()).abs()
}

fn is_integral(values: &[f64], integers: &[usize]) -> bool {
    integers.iter().all(|&j| fractionality(values[j]) <= tol::INT)
}

/// Solve `mip` to the requested relative gap, within `time_limit` seconds.
///
/// Returns the incumbent with `best_bound` certifying its quality. If the
/// limit expires with no incumbent, `NoIncumbentWithinLimit` is returned.
pub fn solve_milp(
    mip: &MixedIntegerProgram,
    gap: f64,
    time_limit: f64,
) -> Result<Solution, SolverError> {
    solve_milp_with_stats(mip, gap, time_limit).map(|(s, _)| s)
}

pub fn solve_milp_with_stats(
    mip: &MixedIntegerProgram,
    gap: f64,
    time_limit: f64,
) -> Result<(Solution, MilpStats), SolverError> {
    mip.validate()?;
    if gap < 0.0 {
        return Err(SolverError::InvalidProgram("gap must be nonnegative".into()));
    }
    let start = Instant::now();
    let lp = &mip.lp;
    let ints = &mip.integers;
    let mut stats = MilpStats::default();

    let root_lower: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
    let root_upper: Vec<f64> = lp.variables.iter().map(|v| v.upper).collect();

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut next_id = 0u64;
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        id: next_id,
        lower: root_lower,
        upper: root_upper,
    });
    next_id += 1;

    let mut incumbent: Option<Solution> = None;
    let mut incumbent_obj = f64::INFINITY;
    let mut root_status: Option<SolveStatus> = None;

    let gap_scale = |inc: f64| gap * inc.abs().max(1.0);

    while let Some(node) = heap.pop() {
        // Certified global lower bound: this node is the best open one.
        let global_lb = node.bound;
        if incumbent.is_some() && global_lb >= incumbent_obj - gap_scale(incumbent_obj) {
            break;
        }
        if start.elapsed().as_secs_f64() > time_limit {
            return match incumbent {
                Some(mut sol) => {
                    sol.best_bound = global_lb;
                    Ok((sol, stats))
                }
                None => Err(SolverError::NoIncumbentWithinLimit),
            };
        }
        if stats.nodes_solved >= NODE_CAP {
            return Err(SolverError::NumericalFailure("node cap exceeded".into()));
        }

        let relax = solve_lp_with_bounds(lp, &node.lower, &node.upper)?;
        stats.nodes_solved += 1;
        if root_status.is_none() {
            root_status = Some(relax.status);
        }
        match relax.status {
            SolveStatus::Infeasible => continue,
            SolveStatus::Unbounded => {
                // Unbounded relaxation at the root: report unbounded.
                if stats.nodes_solved == 1 {
                    return Ok((Solution::unbounded(), stats));
                }
                continue;
            }
            SolveStatus::Optimal => {}
        }
        let bound = relax.objective;
        if incumbent.is_some() && bound >= incumbent_obj - gap_scale(incumbent_obj) {
            continue;
        }

        // Fix-and-resolve: exact incumbent for the rounded assignment.
        let mut fix_lower = node.lower.clone();
        let mut fix_upper = node.upper.clone();
        for &j in ints {
            let r = relax.values[j].round();
            let r = r.max(node.lower[j]).min(node.upper[j]);
            fix_lower[j] = r;
            fix_upper[j] = r;
        }
        let fixed = solve_lp_with_bounds(lp, &fix_lower, &fix_upper)?;
        if fixed.status == SolveStatus::Optimal && fixed.objective < incumbent_obj {
            incumbent_obj = fixed.objective;
            let mut sol = fixed;
            for &j in ints {
                sol.values[j] = sol.values[j].round();
            }
            sol.duals = Vec::new();
            sol.reduced_costs = Vec::new();
            incumbent = Some(sol);
            stats.heuristic_incumbents += 1;
        }

        if is_integral(&relax.values, ints) {
            continue; // the fix-and-resolve above already captured it
        }

        // Most-fractional branching, ties to the lowest variable index.
        let mut branch_var = None;
        let mut best_frac = tol::INT;
        for &j in ints {
            let f = fractionality(relax.values[j]);
            if f > best_frac {
                best_frac = f;
                branch_var = Some(j);
            }
        }
        let j = branch_var.expect("fractional variable exists");
        let x = relax.values[j];
        stats.branches += 1;

        let mut down = Node {
            bound,
            id: next_id,
            lower: node.lower.clone(),
            upper: node.upper.clone(),
        };
        next_id += 1;
        down.upper[j] = x.floor();
        heap.push(down);

        let mut up = Node {
            bound,
            id: next_id,
            lower: node.lower,
            upper: node.upper,
        };
        next_id += 1;
        up.lower[j] = x.ceil();
        heap.push(up);
    }

    match incumbent {
        Some(mut sol) => {
            let open_bound = heap
                .iter()
                .map(|n| n.bound)
                .fold(f64::INFINITY, f64::min);
            sol.best_bound = open_bound.min(sol.objective);
            Ok((sol, stats))
        }
        None => {
            // No feasible integer assignment anywhere in the tree.
            match root_status {
                Some(SolveStatus::Unbounded) => Ok((Solution::unbounded(), stats)),
                _ => Ok((Solution::infeasible(lp.constraints.len()), stats)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{LinearProgram, MixedIntegerProgram, Relation, SolveStatus};
    use super::*;

    #[test]
    fn symmetric_knapsack() {
        // max x1 + x2 s.t. x1 + x2 <= 1, binaries -> obj 1 (min form: -1).
        let mut lp = LinearProgram::new();
        let x1 = lp.add_variable("x1", 0.0, 1.0, -1.0);
        let x2 = lp.add_variable("x2", 0.0, 1.0, -1.0);
        lp.add_constraint("cap", vec![(x1, 1.0), (x2, 1.0)], Relation::Le, 1.0);
        let mip = MixedIntegerProgram::new(lp, vec![x1, x2]);
        let sol = solve_milp(&mip, 0.0, 60.0).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn integral_relaxation_no_branches() {
        // Totally unimodular: assignment-like rows solve integrally at root.
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 1.0, 2.0);
        let y = lp.add_variable("y", 0.0, 1.0, 3.0);
        lp.add_constraint("pick", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 1.0);
        let mip = MixedIntegerProgram::new(lp, vec![x, y]);
        let (sol, stats) = solve_milp_with_stats(&mip, 0.0, 60.0).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert_eq!(stats.branches, 0);
        assert_eq!(stats.nodes_solved, 1);
    }

    #[test]
    fn fractional_relaxation_branches_to_optimum() {
        // min -5x -4y s.t. 6x + 4y <= 24, x + 2y <= 6, integers.
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 10.0, -5.0);
        let y = lp.add_variable("y", 0.0, 10.0, -4.0);
        lp.add_constraint("a", vec![(x, 6.0), (y, 4.0)], Relation::Le, 24.0);
        lp.add_constraint("b", vec![(x, 1.0), (y, 2.0)], Relation::Le, 6.0);
        let mip = MixedIntegerProgram::new(lp, vec![x, y]);
        let sol = solve_milp(&mip, 0.0, 60.0).unwrap();
        // Enumerate: best integer point is (4, 0) or (3, 1): obj -20 vs -19.
        assert!((sol.objective + 20.0).abs() < 1e-8);
        assert!((sol.values[0] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_integer_program() {
        // 2x = 1 with x binary.
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 1.0, 1.0);
        lp.add_constraint("c", vec![(x, 2.0)], Relation::Eq, 1.0);
        let mip = MixedIntegerProgram::new(lp, vec![x]);
        let sol = solve_milp(&mip, 0.0, 60.0).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn gap_termination_keeps_bound() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 1.0, -1.0);
        let y = lp.add_variable("y", 0.0, 1.0, -1.0);
        lp.add_constraint("cap", vec![(x, 2.0), (y, 2.0)], Relation::Le, 3.0);
        let mip = MixedIntegerProgram::new(lp, vec![x, y]);
        let sol = solve_milp(&mip, 0.5, 60.0).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        // Certified: (obj - bound) / |obj| <= 0.5.
        let rel = (sol.objective - sol.best_bound) / sol.objective.abs().max(1.0);
        assert!(rel <= 0.5 + 1e-12);
    }
}
