use gridtwin::grid::*;
use gridtwin::market::*;
use gridtwin::solver::solve_lp;
use std::time::Instant;

fn day_profile() -> Vec<Forecast> {
    (0..24)
        .map(|h| {
            let x = h as f64 / 24.0;
            let load = 950.0
                + 420.0 * (2.0 * std::f64::consts::PI * (x - 0.35)).sin().max(-0.6)
                + 60.0 * (4.0 * std::f64::consts::PI * x).sin();
            let wind = 90.0 + 60.0 * (2.0 * std::f64::consts::PI * (x + 0.2)).sin();
            Forecast { load, renewable: wind.max(0.0) }
        })
        .collect()
}

fn main() {
    let case = load_case("cases/case14.json").unwrap();
    let ptdf = compute_ptdf(&case).unwrap();
    let fc = day_profile();
    let model = build_scuc(&case, &ptdf, &fc, None, None, Default::default()).unwrap();
    println!(
        "vars {} rows {} binaries {}",
        model.mip().lp.num_variables(),
        model.mip().lp.num_constraints(),
        model.num_free_binaries()
    );
    let t0 = Instant::now();
    let sol = solve_lp(&model.mip().lp).unwrap();
    println!("root LP: {:?} status {:?} obj {:.2}", t0.elapsed(), sol.status, sol.objective);
}
