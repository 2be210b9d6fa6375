//! Intermittency-index asset bundling: greedy agglomerative merging under a
//! spatial radius constraint, plus mean-share disaggregation.

use super::{HistoryTable, ScenarioError, ScenarioSet};

/// A partition of assets into bundles with per-asset disaggregation weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundling {
    pub assets: Vec<String>,
    /// Asset coordinates in km, aligned with `assets`.
    pub coords: Vec<(f64, f64)>,
    /// Bundle index per asset.
    pub bundle_of: Vec<usize>,
    /// Disaggregation weight per asset; weights in a bundle sum to one.
    pub weights: Vec<f64>,
    pub n_bundles: usize,
}

impl Bundling {
    pub fn members(&self, bundle: usize) -> Vec<usize> {
        (0..self.assets.len()).filter(|&a| self.bundle_of[a] == bundle).collect()
    }

    pub fn bundle_names(&self) -> Vec<String> {
        (0..self.n_bundles).map(|b| format!("bundle_{b}")).collect()
    }
}

/// Variance of the first difference of the aggregate of `series`
/// (population convention).
pub fn intermittency_index(series: &[&[f64]]) -> Result<f64, ScenarioError> {
    if series.is_empty() {
        return Err(ScenarioError::LengthError("no series given".into()));
    }
    let len = series[0].len();
    if len < 2 {
        return Err(ScenarioError::LengthError(format!(
            "series length {len} < 2 has no first difference"
        )));
    }
    if series.iter().any(|s| s.len() != len) {
        return Err(ScenarioError::DimensionMismatch("series lengths differ".into()));
    }
    let mut diffs = Vec::with_capacity(len - 1);
    for t in 1..len {
        let mut cur = 0.0;
        let mut prev = 0.0;
        for s in series {
            cur += s[t];
            prev += s[t - 1];
        }
        diffs.push(cur - prev);
    }
    let m = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / m;
    Ok(diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / m)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn spatially_ok(members: &[usize], coords: &[(f64, f64)], max_radius: f64) -> bool {
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            if dist(coords[a], coords[b]) > max_radius {
                return false;
            }
        }
    }
    true
}

/// Greedy agglomerative bundling into exactly `k` bundles.
///
/// Starting from singletons, repeatedly merges the pair of bundles with the
/// smallest change in total intermittency among spatially feasible pairs
/// (ties to the lowest pair of indices). Disaggregation weights are each
/// asset's share of its bundle's mean.
pub fn greedy_bundle(
    history: &HistoryTable,
    coords: &[(f64, f64)],
    k: usize,
    max_radius: f64,
) -> Result<Bundling, ScenarioError> {
    let n = history.num_columns();
    if coords.len() != n {
        return Err(ScenarioError::DimensionMismatch(format!(
            "{} coords for {} assets",
            coords.len(),
            n
        )));
    }
    if k == 0 || k > n {
        return Err(ScenarioError::InvalidData(format!("k = {k} outside 1..={n}")));
    }
    if !(max_radius > 0.0) {
        return Err(ScenarioError::InvalidData("max_radius must be positive".into()));
    }
    let columns: Vec<Vec<f64>> = (0..n).map(|c| history.column(c)).collect();

    // Bundle state: member lists and aggregate series.
    let mut bundles: Vec<Vec<usize>> = (0..n).map(|a| vec![a]).collect();
    let mut series: Vec<Vec<f64>> = columns.clone();
    let mut index: Vec<f64> = series
        .iter()
        .map(|s| intermittency_index(&[s.as_slice()]).expect("length checked"))
        .collect();

    while bundles.len() > k {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..bundles.len() {
            for j in i + 1..bundles.len() {
                let mut union = bundles[i].clone();
                union.extend_from_slice(&bundles[j]);
                if !spatially_ok(&union, coords, max_radius) {
                    continue;
                }
                let merged: Vec<f64> = series[i]
                    .iter()
                    .zip(&series[j])
                    .map(|(a, b)| a + b)
                    .collect();
                let merged_index =
                    intermittency_index(&[merged.as_slice()]).expect("length checked");
                let delta = merged_index - index[i] - index[j];
                let better = match best {
                    None => true,
                    Some((bd, bi, bj)) => (delta, i, j) < (bd, bi, bj),
                };
                if better {
                    best = Some((delta, i, j));
                }
            }
        }
        let (_, i, j) = best.ok_or_else(|| {
            ScenarioError::InfeasibleSpatial(format!(
                "cannot reach {k} bundles: no pair within {max_radius} km",
            ))
        })?;
        let moved = bundles.remove(j);
        let moved_series = series.remove(j);
        index.remove(j);
        bundles[i].extend(moved);
        for (a, b) in series[i].iter_mut().zip(&moved_series) {
            *a += b;
        }
        index[i] = intermittency_index(&[series[i].as_slice()]).expect("length checked");
    }

    let mut bundle_of = vec![0usize; n];
    let mut weights = vec![0.0; n];
    for (b, members) in bundles.iter().enumerate() {
        let mut means: Vec<f64> = Vec::with_capacity(members.len());
        for &a in members {
            let m = columns[a].iter().sum::<f64>() / columns[a].len() as f64;
            means.push(m);
        }
        let total: f64 = means.iter().sum();
        for (pos, &a) in members.iter().enumerate() {
            bundle_of[a] = b;
            weights[a] = if total.abs() > 1e-12 {
                means[pos] / total
            } else {
                1.0 / members.len() as f64
            };
        }
    }
    Ok(Bundling {
        assets: history.columns.clone(),
        coords: coords.to_vec(),
        bundle_of,
        weights,
        n_bundles: bundles.len(),
    })
}

/// Total intermittency of a bundling over a history (for oracles/logging).
pub fn bundling_objective(history: &HistoryTable, bundling: &Bundling) -> f64 {
    let mut total = 0.0;
    for b in 0..bundling.n_bundles {
        let members = bundling.members(b);
        let cols: Vec<Vec<f64>> = members.iter().map(|&a| history.column(a)).collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        total += intermittency_index(&refs).expect("valid history");
    }
    total
}

/// Expand bundle-level scenarios back to asset level by fixed weights.
/// Re-aggregating the output reproduces the input exactly.
pub fn disaggregate(bundled: &ScenarioSet, bundling: &Bundling) -> Result<ScenarioSet, ScenarioError> {
    if bundled.num_assets() != bundling.n_bundles {
        return Err(ScenarioError::DimensionMismatch(format!(
            "scenario set has {} columns but bundling has {} bundles",
            bundled.num_assets(),
            bundling.n_bundles
        )));
    }
    let n = bundled.num_scenarios();
    let t = bundled.t_steps();
    let na = bundling.assets.len();
    let mut data = Vec::with_capacity(n * t * na);
    for s in 0..n {
        for step in 0..t {
            for a in 0..na {
                let b = bundling.bundle_of[a];
                data.push(bundling.weights[a] * bundled.value(s, step, b));
            }
        }
    }
    ScenarioSet::new(bundling.assets.clone(), n, t, bundled.step_minutes, data)
}
