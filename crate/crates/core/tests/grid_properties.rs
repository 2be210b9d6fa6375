//! Network-sensitivity invariants: flow conservation, PTDF vs direct DC
//! solve, and loss factors vs central finite differences at random points.

use gridtwin::grid::{
    compute_loss_model, compute_ptdf, dc_flows, exact_losses_mw, parse_case, Case,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn demo_case() -> Case {
    parse_case(
        r#"{
        "buses": [
            {"id": 1, "load_weight": 0.2},
            {"id": 2, "load_weight": 0.3},
            {"id": 3, "load_weight": 0.25},
            {"id": 4, "load_weight": 0.25}
        ],
        "lines": [
            {"from_bus": 1, "to_bus": 2, "reactance": 0.2, "resistance": 0.01, "flow_limit": 120.0},
            {"from_bus": 2, "to_bus": 3, "reactance": 0.25, "resistance": 0.015, "flow_limit": 100.0},
            {"from_bus": 3, "to_bus": 4, "reactance": 0.15, "resistance": 0.008, "flow_limit": 100.0},
            {"from_bus": 4, "to_bus": 1, "reactance": 0.3, "resistance": 0.012, "flow_limit": 90.0},
            {"from_bus": 1, "to_bus": 3, "reactance": 0.4, "resistance": 0.02, "flow_limit": 80.0}
        ],
        "generators": [
            {"id": "G1", "bus": 1, "pmin": 10.0, "pmax": 150.0, "ramp_rate": 5.0,
             "min_up": 1, "min_down": 1, "startup_cost": 100.0, "no_load_cost": 20.0,
             "cost_curve": [[70.0, 12.0], [70.0, 18.0]], "notification_time": 0.0,
             "initial_status": 10, "initial_output": 80.0},
            {"id": "G2", "bus": 3, "pmin": 0.0, "pmax": 100.0, "ramp_rate": 8.0,
             "min_up": 1, "min_down": 1, "startup_cost": 0.0, "no_load_cost": 0.0,
             "cost_curve": [[100.0, 25.0]], "notification_time": 0.0,
             "initial_status": -4, "initial_output": 0.0}
        ],
        "reference_bus": 1,
        "reserve_requirement": 0.05
    }"#,
    )
    .expect("demo case is valid")
}

#[test]
fn ptdf_flow_conservation_on_random_injections() {
    let case = demo_case();
    let ptdf = compute_ptdf(&case).unwrap();
    let n = case.num_buses();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..25 {
        // Injections summing to zero.
        let mut inj: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
        let mean = inj.iter().sum::<f64>() / n as f64;
        for v in inj.iter_mut() {
            *v -= mean;
        }
        let flows = ptdf.flows(&inj);
        // Per-bus conservation: net line outflow equals injection.
        for b in 0..n {
            let mut net = 0.0;
            for (li, l) in case.lines.iter().enumerate() {
                if case.bus_index(l.from_bus).unwrap() == b {
                    net += flows[li];
                }
                if case.bus_index(l.to_bus).unwrap() == b {
                    net -= flows[li];
                }
            }
            assert!(
                (net - inj[b]).abs() < 1e-9,
                "conservation at bus {b}: {net} vs {}",
                inj[b]
            );
        }
    }
}

#[test]
fn ptdf_matches_direct_dc_solve() {
    let case = demo_case();
    let ptdf = compute_ptdf(&case).unwrap();
    let n = case.num_buses();
    let ref_idx = case.bus_index(case.reference_bus).unwrap();
    // Unit injection at each bus, withdrawn at the reference.
    for b in 0..n {
        let mut inj = vec![0.0; n];
        inj[b] += 1.0;
        inj[ref_idx] -= 1.0;
        let direct = dc_flows(&case, &inj).unwrap();
        for l in 0..case.num_lines() {
            assert!(
                (direct[l] - ptdf.factors[(l, b)]).abs() < 1e-7,
                "line {l} bus {b}: {} vs {}",
                direct[l],
                ptdf.factors[(l, b)]
            );
        }
    }
}

#[test]
fn loss_factors_match_central_differences_at_random_points() {
    let case = demo_case();
    let ptdf = compute_ptdf(&case).unwrap();
    let n = case.num_buses();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let dispatch = vec![rng.gen_range(20.0..120.0), rng.gen_range(0.0..80.0)];
        let system_load = dispatch.iter().sum::<f64>() * rng.gen_range(0.95..1.0);
        let loads = case.bus_loads(system_load);
        let lm = compute_loss_model(&case, &ptdf, &dispatch, &loads);
        let h = 1.0;
        for b in 0..n {
            let mut up = lm.base_injections.clone();
            let mut dn = lm.base_injections.clone();
            up[b] += h;
            dn[b] -= h;
            let fd =
                (exact_losses_mw(&case, &ptdf, &up) - exact_losses_mw(&case, &ptdf, &dn)) / (2.0 * h);
            let denom = fd.abs().max(1e-9);
            assert!(
                (fd - lm.loss_factors[b]).abs() <= 1e-6 * denom.max(1.0),
                "bus {b}: fd {fd} vs lf {}",
                lm.loss_factors[b]
            );
        }
    }
}
