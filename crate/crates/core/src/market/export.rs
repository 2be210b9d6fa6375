//! Result export in the fixed CSV layout: one row per generator-interval
//! with columns gen_id, t, u, p_mw, lmp_node, slack_mw. `lmp_node` is the
//! price at the generator's bus; `slack_mw` is the total system violation
//! slack in that interval (repeated on each of its rows).

use super::{CommitmentSchedule, DispatchSolution};
use crate::grid::Case;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct DispatchRow {
    pub gen_id: String,
    pub t: usize,
    pub u: u8,
    pub p_mw: f64,
    pub lmp_node: f64,
    pub slack_mw: f64,
}

/// Rows for a sequence of dispatch solutions (one per interval).
pub fn dispatch_rows(
    case: &Case,
    intervals: &[(usize, &DispatchSolution, &[bool])],
) -> Vec<DispatchRow> {
    let mut rows = Vec::new();
    for &(t, sol, on) in intervals {
        let slack = sol.total_violation_mw();
        for (g, gen) in case.generators.iter().enumerate() {
            rows.push(DispatchRow {
                gen_id: gen.id.clone(),
                t,
                u: u8::from(on[g]),
                p_mw: sol.gen_p[g],
                lmp_node: sol.lmp[case.generator_bus_index(g)],
                slack_mw: slack,
            });
        }
    }
    rows
}

/// Rows for a commitment schedule (no dispatch/prices yet).
pub fn commitment_rows(schedule: &CommitmentSchedule) -> Vec<DispatchRow> {
    let mut rows = Vec::new();
    for t in 0..schedule.n_hours() {
        for (g, id) in schedule.gen_ids.iter().enumerate() {
            rows.push(DispatchRow {
                gen_id: id.clone(),
                t,
                u: u8::from(schedule.on[g][t]),
                p_mw: 0.0,
                lmp_node: 0.0,
                slack_mw: 0.0,
            });
        }
    }
    rows
}

/// Serialize rows to CSV text with the fixed header.
pub fn dispatch_rows_csv(rows: &[DispatchRow]) -> String {
    let mut out = String::from("gen_id,t,u,p_mw,lmp_node,slack_mw\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.gen_id, r.t, r.u, r.p_mw, r.lmp_node, r.slack_mw
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commitment_csv_has_fixed_header() {
        let schedule = CommitmentSchedule::from_on_matrix(
            vec!["G1".into()],
            0,
            vec![vec![true, false]],
            &[false],
        );
        let text = dispatch_rows_csv(&commitment_rows(&schedule));
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "gen_id,t,u,p_mw,lmp_node,slack_mw");
        assert_eq!(lines.next().unwrap(), "G1,0,1,0,0,0");
        assert_eq!(lines.next().unwrap(), "G1,1,0,0,0,0");
    }
}
