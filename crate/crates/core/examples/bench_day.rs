use gridtwin::grid::*;
use gridtwin::market::*;
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
    println!("loads: {:?}", fc.iter().map(|f| f.net_load().round()).collect::<Vec<_>>());
    let opts = ScucOptions { gap: 1e-4, time_limit: 1200.0, ..Default::default() };
    let t0 = Instant::now();
    let model = build_scuc(&case, &ptdf, &fc, None, None, opts.penalties).unwrap();
    println!(
        "build: {:?}, vars {}, rows {}, binaries {}",
        t0.elapsed(),
        model.mip().lp.num_variables(),
        model.mip().lp.num_constraints(),
        model.num_free_binaries()
    );
    let t0 = Instant::now();
    let sol = solve_scuc(&case, &ptdf, &fc, &opts).unwrap();
    println!("scuc solve: {:?} objective {:.2} bound {:.2}", t0.elapsed(), sol.objective, sol.best_bound);
    let committed: usize = sol.schedule.on.iter().map(|r| r.iter().filter(|&&x| x).count()).sum();
    println!("committed unit-hours {committed}, violations {:.3}", sol.step_violations().iter().sum::<f64>());

    // FRAC with a +4% forecast shift
    let fc2: Vec<Forecast> = fc.iter().map(|f| Forecast { load: f.load * 1.04, renewable: f.renewable }).collect();
    let t0 = Instant::now();
    let frac = solve_frac(&case, &ptdf, &sol.schedule, &fc2, &opts).unwrap();
    println!("frac solve: {:?} objective {:.2}", t0.elapsed(), frac.objective);
}
