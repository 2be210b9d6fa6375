//! Conditional value at risk: the sort-based estimator and the linear
//! epigraph fragments that embed CVaR terms into any LP or MILP.

use super::StochasticError;
use crate::solver::{LinearProgram, Relation};

/// CVaR under the Rockafellar-Uryasev definition over an equiprobable
/// sample: the minimum over eta of eta + mean(max(0, v - eta)) / alpha,
/// computed by sorting. Alpha = 1 gives the mean.
pub fn cvar(values: &[f64], alpha: f64) -> Result<f64, StochasticError> {
    if values.is_empty() {
        return Err(StochasticError::EmptyInput);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(StochasticError::InvalidInput(format!("alpha {alpha} outside (0, 1]")));
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a)); // descending
    let tail = alpha * n as f64;
    // eta* is the ceil(alpha n)-th largest value.
    let k = tail.ceil() as usize;
    let eta = sorted[k.min(n) - 1];
    let excess: f64 = sorted.iter().map(|v| (v - eta).max(0.0)).sum();
    Ok(eta + excess / tail)
}

/// Handles to CVaR epigraph variables added to a program.
#[derive(Debug, Clone)]
pub struct CvarHandles {
    pub eta: usize,
    pub excess: Vec<usize>,
}

/// A per-scenario cost expression: linear terms plus a constant.
#[derive(Debug, Clone, Default)]
pub struct CostExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl CostExpr {
    pub fn constant(c: f64) -> CostExpr {
        CostExpr { terms: Vec::new(), constant: c }
    }
}

/// Splice CVaR epigraph terms into `lp`: variables eta (free) and
/// excess_s >= 0, constraints excess_s >= cost_s - eta, and objective
/// weight * (eta + sum(excess) / (alpha n)).
///
/// Minimizing these terms alone over fixed costs reproduces `cvar`.
pub fn cvar_epigraph_terms(
    lp: &mut LinearProgram,
    alpha: f64,
    costs: &[CostExpr],
    weight: f64,
) -> Result<CvarHandles, StochasticError> {
    if costs.is_empty() {
        return Err(StochasticError::EmptyInput);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(StochasticError::InvalidInput(format!("alpha {alpha} outside (0, 1]")));
    }
    let n = costs.len() as f64;
    let eta = lp.add_variable("cvar_eta", f64::NEG_INFINITY, f64::INFINITY, weight);
    let mut excess = Vec::with_capacity(costs.len());
    for (s, cost) in costs.iter().enumerate() {
        let e = lp.add_variable(
            format!("cvar_excess_{s}"),
            0.0,
            f64::INFINITY,
            weight / (alpha * n),
        );
        // e - cost_terms + eta >= cost_constant
        let mut terms = vec![(e, 1.0), (eta, 1.0)];
        for &(v, c) in &cost.terms {
            terms.push((v, -c));
        }
        lp.add_constraint(format!("cvar_cut_{s}"), terms, Relation::Ge, cost.constant);
        excess.push(e);
    }
    Ok(CvarHandles { eta, excess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_lp;

    #[test]
    fn sorted_tail_examples() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert!((cvar(&v, 0.5).unwrap() - 3.5).abs() < 1e-12);
        assert!((cvar(&v, 1.0).unwrap() - 2.5).abs() < 1e-12);
        assert!((cvar(&[7.5], 0.13).unwrap() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(cvar(&[], 0.5), Err(StochasticError::EmptyInput)));
    }

    #[test]
    fn epigraph_lp_matches_sort() {
        let costs = [1.0, 2.0, 3.0, 4.0];
        for alpha in [0.25, 0.5, 0.75, 1.0] {
            let mut lp = LinearProgram::new();
            let exprs: Vec<CostExpr> = costs.iter().map(|&c| CostExpr::constant(c)).collect();
            cvar_epigraph_terms(&mut lp, alpha, &exprs, 1.0).unwrap();
            let sol = solve_lp(&lp).unwrap();
            let expected = cvar(&costs, alpha).unwrap();
            assert!(
                (sol.objective - expected).abs() < 1e-9,
                "alpha {alpha}: {} vs {expected}",
                sol.objective
            );
        }
    }

    #[test]
    fn monotone_in_alpha_and_coherent() {
        let v = [5.0, -2.0, 11.0, 3.0, 3.5, 7.25];
        let a1 = cvar(&v, 0.2).unwrap();
        let a2 = cvar(&v, 0.6).unwrap();
        assert!(a1 >= a2);
        // Translation and positive homogeneity.
        let shifted: Vec<f64> = v.iter().map(|x| x + 10.0).collect();
        assert!((cvar(&shifted, 0.3).unwrap() - cvar(&v, 0.3).unwrap() - 10.0).abs() < 1e-12);
        let scaled: Vec<f64> = v.iter().map(|x| 2.5 * x).collect();
        assert!((cvar(&scaled, 0.3).unwrap() - 2.5 * cvar(&v, 0.3).unwrap()).abs() < 1e-12);
    }
}
