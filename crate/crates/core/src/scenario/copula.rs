//! Gaussian copula over empirical marginals: rank transform to normal
//! scores, regularized score correlation, and correlated quantile sampling.

use super::{HistoryTable, ScenarioError, ScenarioSet};
use crate::linalg::{cholesky, symmetric_eigen, Matrix};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

const EIGEN_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CopulaModel {
    pub asset_names: Vec<String>,
    /// Sorted observed values per asset (the empirical marginal).
    pub marginals: Vec<Vec<f64>>,
    /// Correlation matrix of the normal scores after regularization.
    pub correlation: Matrix,
    /// Lower-triangular factor of `correlation`.
    pub factor: Matrix,
    pub n_obs: usize,
}

impl CopulaModel {
    /// Fewer observations than recommended for a stable rank transform.
    pub fn low_sample(&self) -> bool {
        self.n_obs < 30
    }
}

/// Average ranks (1-based) with ties sharing their mean rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let mut ranks = vec![0.0; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j + 1 < m && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Empirical quantile by linear interpolation between order statistics,
/// consistent with the rank/(m+1) transform.
pub fn empirical_quantile(sorted: &[f64], u: f64) -> f64 {
    let m = sorted.len();
    let p = u * (m as f64 + 1.0);
    if p <= 1.0 {
        return sorted[0];
    }
    if p >= m as f64 {
        return sorted[m - 1];
    }
    let i = p.floor() as usize; // 1-based order statistic below p
    let frac = p - i as f64;
    sorted[i - 1] + frac * (sorted[i] - sorted[i - 1])
}

/// Fit the copula: empirical marginals plus the correlation of the
/// inverse-normal rank scores, eigenvalue-floored to stay PSD.
pub fn fit_copula(history: &HistoryTable) -> Result<CopulaModel, ScenarioError> {
    let d = history.num_columns();
    let m = history.rows();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");

    let mut marginals = Vec::with_capacity(d);
    let mut scores = Matrix::zeros(m, d);
    for c in 0..d {
        let col = history.column(c);
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            return Err(ScenarioError::DegenerateColumn(history.columns[c].clone()));
        }
        let ranks = average_ranks(&col);
        for (r, &rank) in ranks.iter().enumerate() {
            scores[(r, c)] = normal.inverse_cdf(rank / (m as f64 + 1.0));
        }
        let mut sorted = col;
        sorted.sort_by(f64::total_cmp);
        marginals.push(sorted);
    }

    // Sample correlation of the score columns.
    let mut mean = vec![0.0; d];
    for c in 0..d {
        for r in 0..m {
            mean[c] += scores[(r, c)];
        }
        mean[c] /= m as f64;
    }
    let mut cov = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let mut acc = 0.0;
            for r in 0..m {
                acc += (scores[(r, i)] - mean[i]) * (scores[(r, j)] - mean[j]);
            }
            let v = acc / (m as f64 - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let mut corr = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            corr[(i, j)] = cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt();
        }
    }

    // The stored correlation is the raw score correlation; the sampling
    // factor comes from an eigenvalue-floored copy renormalized to a unit
    // diagonal so the Cholesky cannot fail on rank-deficient scores.
    let (vals, vecs) = symmetric_eigen(&corr);
    let mut reg = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += vecs[(i, k)] * vals[k].max(EIGEN_FLOOR) * vecs[(j, k)];
            }
            reg[(i, j)] = acc;
        }
    }
    let mut unit = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            unit[(i, j)] = reg[(i, j)] / (reg[(i, i)] * reg[(j, j)]).sqrt();
        }
    }
    let factor = cholesky(&unit).map_err(|e| {
        ScenarioError::InvalidData(format!("correlation factorization failed: {e}"))
    })?;
    Ok(CopulaModel {
        asset_names: history.columns.clone(),
        marginals,
        correlation: corr,
        factor,
        n_obs: m,
    })
}

/// Draw `n` scenarios of `t_steps` timesteps.
///
/// The model's columns are interpreted step-major: column index `t*d + a`
/// holds asset `a` at step `t`, so the column count must be divisible by
/// `t_steps`. One correlated draw yields a full trajectory, giving auto- and
/// cross-correlation jointly. Deterministic per seed.
pub fn sample_scenarios(
    model: &CopulaModel,
    n: usize,
    t_steps: usize,
    step_minutes: u32,
    seed: u64,
) -> Result<ScenarioSet, ScenarioError> {
    if n == 0 || t_steps == 0 {
        return Err(ScenarioError::InvalidData("n and t_steps must be positive".into()));
    }
    let d_model = model.asset_names.len();
    if d_model % t_steps != 0 {
        return Err(ScenarioError::DimensionMismatch(format!(
            "{d_model} history columns cannot be reshaped into {t_steps} steps"
        )));
    }
    let d_out = d_model / t_steps;
    let assets: Vec<String> = model.asset_names[..d_out].to_vec();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * d_model);
    let mut eps = vec![0.0; d_model];
    for _ in 0..n {
        for e in eps.iter_mut() {
            *e = rng.sample(StandardNormal);
        }
        // z = L eps, then map through Phi and the empirical quantile.
        for (col, marginal) in model.marginals.iter().enumerate() {
            let mut z = 0.0;
            for k in 0..=col {
                z += model.factor[(col, k)] * eps[k];
            }
            let u = normal.cdf(z);
            data.push(empirical_quantile(marginal, u));
        }
    }
    ScenarioSet::new(assets, n, t_steps, step_minutes, data)
}

/// Spearman rank correlation between two equally long slices (test support).
pub fn rank_correlation(a: &[f64], b: &[f64]) -> f64 {
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let m = a.len() as f64;
    let mean = (m + 1.0) / 2.0;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for i in 0..a.len() {
        let x = ra[i] - mean;
        let y = rb[i] - mean;
        num += x * y;
        da += x * x;
        db += y * y;
    }
    num / (da * db).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn history_from_cols(cols: Vec<(&str, Vec<f64>)>) -> HistoryTable {
        let names: Vec<String> = cols.iter().map(|(n, _)| n.to_string()).collect();
        let rows = cols[0].1.len();
        let mut data = Vec::new();
        for r in 0..rows {
            for (_, v) in &cols {
                data.push(v[r]);
            }
        }
        HistoryTable::new(names, data).unwrap()
    }

    #[test]
    fn comonotone_columns_have_unit_correlation() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let h = history_from_cols(vec![("x", x), ("y", y)]);
        let model = fit_copula(&h).unwrap();
        assert!((model.correlation[(0, 1)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn independent_columns_near_zero_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = 10_000;
        let x: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
        let h = history_from_cols(vec![("x", x), ("y", y)]);
        let model = fit_copula(&h).unwrap();
        assert!(model.correlation[(0, 1)].abs() < 0.05);
    }

    #[test]
    fn constant_column_rejected() {
        let h = history_from_cols(vec![("flat", vec![5.0; 10]), ("x", (0..10).map(|i| i as f64).collect())]);
        match fit_copula(&h) {
            Err(ScenarioError::DegenerateColumn(name)) => assert_eq!(name, "flat"),
            other => panic!("expected DegenerateColumn, got {other:?}"),
        }
    }

    #[test]
    fn median_of_three_marginal() {
        assert_eq!(empirical_quantile(&[1.0, 2.0, 3.0], 0.5), 2.0);
    }

    #[test]
    fn same_seed_bit_identical() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64).sin().abs() * 10.0 + 1.0).collect();
        let y: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).cos().abs() * 5.0 + 2.0).collect();
        let h = history_from_cols(vec![("x", x), ("y", y)]);
        let model = fit_copula(&h).unwrap();
        let a = sample_scenarios(&model, 5, 1, 60, 7).unwrap();
        let b = sample_scenarios(&model, 5, 1, 60, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recovers_target_rank_correlation() {
        // History with strong dependence: y = x + small noise, both positive.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 4000;
        let x: Vec<f64> = (0..m).map(|_| 100.0 + 10.0 * rng.gen::<f64>()).collect();
        let y: Vec<f64> = x.iter().map(|v| v + rng.gen::<f64>() * 3.0).collect();
        let h = history_from_cols(vec![("x", x.clone()), ("y", y.clone())]);
        let model = fit_copula(&h).unwrap();
        let target = model.correlation[(0, 1)];
        let set = sample_scenarios(&model, 10_000, 1, 60, 19).unwrap();
        let sx: Vec<f64> = (0..set.num_scenarios()).map(|s| set.value(s, 0, 0)).collect();
        let sy: Vec<f64> = (0..set.num_scenarios()).map(|s| set.value(s, 0, 1)).collect();
        let rc = rank_correlation(&sx, &sy);
        // Rank correlation of samples close to the Gaussian-score target.
        assert!((rc - target).abs() < 0.05, "rank corr {rc} vs target {target}");
    }
}
