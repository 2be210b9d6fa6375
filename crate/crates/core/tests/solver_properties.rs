//! Property suites for the LP/MILP solver: strong duality on random feasible
//! bounded LPs, enumeration equivalence for small MILPs, and determinism.

use gridtwin::solver::{
    solve_lp, solve_milp, LinearProgram, MixedIntegerProgram, Relation, SolveStatus,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Random LP that is feasible (constructed around an interior point) and
/// bounded (finite variable box).
fn random_feasible_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.gen_range(2..=8);
    let m = rng.gen_range(1..=8);
    let mut lp = LinearProgram::new();
    let mut point = Vec::with_capacity(n);
    for j in 0..n {
        let lo = rng.gen_range(-5.0..0.0);
        let hi = lo + rng.gen_range(0.5..10.0);
        let obj = rng.gen_range(-4.0..4.0);
        lp.add_variable(format!("x{j}"), lo, hi, obj);
        point.push(rng.gen_range(lo..hi));
    }
    for i in 0..m {
        let mut terms = Vec::new();
        let mut activity = 0.0;
        for (j, &xj) in point.iter().enumerate() {
            if rng.gen::<f64>() < 0.6 {
                let c = rng.gen_range(-3.0..3.0);
                if c != 0.0 {
                    terms.push((j, c));
                    activity += c * xj;
                }
            }
        }
        if terms.is_empty() {
            terms.push((0, 1.0));
            activity = point[0];
        }
        let rel = match rng.gen_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Ge,
            _ => Relation::Eq,
        };
        let rhs = match rel {
            Relation::Le => activity + rng.gen_range(0.0..2.0),
            Relation::Ge => activity - rng.gen_range(0.0..2.0),
            Relation::Eq => activity,
        };
        lp.add_constraint(format!("c{i}"), terms, rel, rhs);
    }
    lp
}

#[test]
fn strong_duality_on_random_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut solved = 0;
    while solved < 100 {
        let lp = random_feasible_lp(&mut rng);
        let sol = solve_lp(&lp).expect("solver error");
        assert_eq!(sol.status, SolveStatus::Optimal, "constructed LP must be feasible");
        // Dual objective: y'b + sum of reduced costs at their active bounds.
        let mut dual_obj = 0.0;
        for (i, c) in lp.constraints.iter().enumerate() {
            dual_obj += sol.duals[i] * c.rhs;
        }
        for (j, v) in lp.variables.iter().enumerate() {
            let rc = sol.reduced_costs[j];
            if rc > 0.0 {
                dual_obj += rc * v.lower;
            } else {
                dual_obj += rc * v.upper;
            }
        }
        let scale = sol.objective.abs().max(1.0);
        assert!(
            (sol.objective - dual_obj).abs() <= 1e-7 * scale,
            "duality gap {} vs {}",
            sol.objective,
            dual_obj
        );

        // Complementary slackness within 1e-6.
        for (i, c) in lp.constraints.iter().enumerate() {
            let activity: f64 = c.terms.iter().map(|&(j, v)| v * sol.values[j]).sum();
            let slack = match c.relation {
                Relation::Le => c.rhs - activity,
                Relation::Ge => activity - c.rhs,
                Relation::Eq => 0.0,
            };
            assert!(
                (sol.duals[i] * slack).abs() <= 1e-6 * scale.max(slack.abs()),
                "complementary slackness violated on row {i}"
            );
        }
        // Primal feasibility within 1e-7.
        for (j, v) in lp.variables.iter().enumerate() {
            assert!(sol.values[j] >= v.lower - 1e-7 && sol.values[j] <= v.upper + 1e-7);
        }
        for c in &lp.constraints {
            let activity: f64 = c.terms.iter().map(|&(j, v)| v * sol.values[j]).sum();
            match c.relation {
                Relation::Le => assert!(activity <= c.rhs + 1e-7),
                Relation::Ge => assert!(activity >= c.rhs - 1e-7),
                Relation::Eq => assert!((activity - c.rhs).abs() <= 1e-7),
            }
        }
        solved += 1;
    }
}

/// Random small MILP over binaries plus a few continuous variables.
fn random_small_milp(rng: &mut ChaCha8Rng, max_binaries: usize) -> MixedIntegerProgram {
    let k = rng.gen_range(1..=max_binaries);
    let nc = rng.gen_range(0..=3);
    let mut lp = LinearProgram::new();
    for j in 0..k {
        let obj = rng.gen_range(-5.0..5.0);
        lp.add_variable(format!("b{j}"), 0.0, 1.0, obj);
    }
    for j in 0..nc {
        let obj = rng.gen_range(-2.0..2.0);
        lp.add_variable(format!("y{j}"), 0.0, rng.gen_range(1.0..5.0), obj);
    }
    let m = rng.gen_range(1..=4);
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..k + nc {
            if rng.gen::<f64>() < 0.5 {
                terms.push((j, rng.gen_range(-3.0_f64..3.0)));
            }
        }
        if terms.is_empty() {
            terms.push((0, 1.0));
        }
        // Keep rhs generous enough that many instances are feasible.
        let rel = if rng.gen::<bool>() { Relation::Le } else { Relation::Ge };
        let rhs = rng.gen_range(-2.0..4.0);
        lp.add_constraint(format!("c{i}"), terms, rel, rhs);
    }
    let ints = (0..k).collect();
    MixedIntegerProgram::new(lp, ints)
}

/// Exhaustive oracle: try every binary assignment, solve the continuous rest.
fn enumerate_optimum(mip: &MixedIntegerProgram) -> Option<f64> {
    let k = mip.integers.len();
    let mut best: Option<f64> = None;
    for pattern in 0..(1u32 << k) {
        let mut lp = mip.lp.clone();
        for (pos, &j) in mip.integers.iter().enumerate() {
            let v = if pattern & (1 << pos) != 0 { 1.0 } else { 0.0 };
            lp.variables[j].lower = v;
            lp.variables[j].upper = v;
        }
        let sol = solve_lp(&lp).expect("oracle LP failed");
        if sol.status == SolveStatus::Optimal {
            best = Some(match best {
                None => sol.objective,
                Some(b) => b.min(sol.objective),
            });
        }
    }
    best
}

#[test]
fn milp_matches_enumeration_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for _ in 0..40 {
        let mip = random_small_milp(&mut rng, 8);
        let sol = solve_milp(&mip, 0.0, 120.0).expect("milp error");
        let oracle = enumerate_optimum(&mip);
        match oracle {
            None => assert_eq!(sol.status, SolveStatus::Infeasible),
            Some(best) => {
                assert_eq!(sol.status, SolveStatus::Optimal);
                assert!(
                    (sol.objective - best).abs() <= 1e-8 * best.abs().max(1.0),
                    "milp {} vs enumeration {}",
                    sol.objective,
                    best
                );
                // Integer variables are integral within tolerance.
                for &j in &mip.integers {
                    assert!((sol.values[j] - sol.values[j].round()).abs() <= 1e-6);
                }
            }
        }
    }
}

#[test]
fn milp_determinism_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mip = random_small_milp(&mut rng, 6);
    let a = solve_milp(&mip, 0.0, 60.0).unwrap();
    let b = solve_milp(&mip, 0.0, 60.0).unwrap();
    assert_eq!(a.status, b.status);
    if a.status == SolveStatus::Optimal {
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn lp_text_dump_mentions_pieces() {
    let mut lp = LinearProgram::new();
    let x = lp.add_variable("x", 0.0, 2.0, 1.0);
    lp.add_constraint("cap", vec![(x, 3.0)], Relation::Le, 5.0);
    let mip = MixedIntegerProgram::new(lp, vec![x]);
    let text = mip.to_lp_text();
    assert!(text.contains("Minimize"));
    assert!(text.contains("cap:"));
    assert!(text.contains("<= 5"));
    assert!(text.contains("General"));
}
