//! Scenario-quality metrics: energy distance between empirical
//! distributions and the variogram score of an ensemble against an outcome.

use super::{ScenarioError, ScenarioSet};

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn mean_cross_distance(a: &ScenarioSet, b: &ScenarioSet) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.num_scenarios() {
        for j in 0..b.num_scenarios() {
            acc += euclid(a.scenario(i), b.scenario(j));
        }
    }
    acc / (a.num_scenarios() as f64 * b.num_scenarios() as f64)
}

/// Energy distance 2 E|X-Y| - E|X-X'| - E|Y-Y'| between the empirical
/// distributions of two scenario sets (V-statistic convention).
pub fn energy_distance(a: &ScenarioSet, b: &ScenarioSet) -> Result<f64, ScenarioError> {
    if a.point_dim() != b.point_dim() {
        return Err(ScenarioError::DimensionMismatch(format!(
            "point dimensions differ: {} vs {}",
            a.point_dim(),
            b.point_dim()
        )));
    }
    let cross = mean_cross_distance(a, b);
    let within_a = mean_cross_distance(a, a);
    let within_b = mean_cross_distance(b, b);
    Ok(2.0 * cross - within_a - within_b)
}

/// Energy distance of `points` (rows of dimension `dim`) to `data`,
/// used internally by the support-points iteration.
pub(crate) fn energy_distance_flat(points: &[f64], data: &[f64], dim: usize) -> f64 {
    let k = points.len() / dim;
    let n = data.len() / dim;
    let mut cross = 0.0;
    for i in 0..k {
        for j in 0..n {
            cross += euclid(&points[i * dim..(i + 1) * dim], &data[j * dim..(j + 1) * dim]);
        }
    }
    cross /= (k * n) as f64;
    let mut within_p = 0.0;
    for i in 0..k {
        for j in 0..k {
            within_p += euclid(&points[i * dim..(i + 1) * dim], &points[j * dim..(j + 1) * dim]);
        }
    }
    within_p /= (k * k) as f64;
    let mut within_d = 0.0;
    for i in 0..n {
        for j in 0..n {
            within_d += euclid(&data[i * dim..(i + 1) * dim], &data[j * dim..(j + 1) * dim]);
        }
    }
    within_d /= (n * n) as f64;
    2.0 * cross - within_p - within_d
}

/// Variogram score of order `p`: sum over component pairs (i < j) of the
/// squared gap between |actual_i - actual_j|^p and the ensemble mean of
/// |s_i - s_j|^p.
pub fn variogram_score(
    scenarios: &ScenarioSet,
    actual: &[f64],
    p: f64,
) -> Result<f64, ScenarioError> {
    let dim = scenarios.point_dim();
    if actual.len() != dim {
        return Err(ScenarioError::DimensionMismatch(format!(
            "actual has {} components, scenarios have {}",
            actual.len(),
            dim
        )));
    }
    if !(p > 0.0) {
        return Err(ScenarioError::InvalidData("variogram order must be positive".into()));
    }
    let n = scenarios.num_scenarios() as f64;
    let mut score = 0.0;
    for i in 0..dim {
        for j in i + 1..dim {
            let target = (actual[i] - actual[j]).abs().powf(p);
            let mut mean = 0.0;
            for s in 0..scenarios.num_scenarios() {
                let sc = scenarios.scenario(s);
                mean += (sc[i] - sc[j]).abs().powf(p);
            }
            mean /= n;
            score += (target - mean) * (target - mean);
        }
    }
    Ok(score)
}
