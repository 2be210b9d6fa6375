//! Scenario machinery: historical-data ingestion, Gaussian-copula sampling,
//! intermittency-index bundling, support-points reduction, and ensemble
//! quality metrics.

mod bundling;
mod copula;
mod metrics;
mod support_points;

pub use bundling::{bundling_objective, disaggregate, greedy_bundle, intermittency_index, Bundling};
pub use copula::{fit_copula, rank_correlation, sample_scenarios, CopulaModel};
pub use metrics::{energy_distance, variogram_score};
pub use support_points::{support_points, SupportPointsResult};

use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("degenerate column {0}: constant values have undefined ranks")]
    DegenerateColumn(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("series too short: {0}")]
    LengthError(String),
    #[error("spatial constraint infeasible: {0}")]
    InfeasibleSpatial(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Historical observations: rows are timestamps, columns are assets.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryTable {
    pub columns: Vec<String>,
    /// Row-major values, `rows x columns`.
    data: Vec<f64>,
    rows: usize,
}

impl HistoryTable {
    pub fn new(columns: Vec<String>, data: Vec<f64>) -> Result<Self, ScenarioError> {
        if columns.is_empty() {
            return Err(ScenarioError::InvalidData("history needs at least one column".into()));
        }
        if data.len() % columns.len() != 0 {
            return Err(ScenarioError::DimensionMismatch(format!(
                "{} values do not fill rows of {} columns",
                data.len(),
                columns.len()
            )));
        }
        let rows = data.len() / columns.len();
        if rows < 2 {
            return Err(ScenarioError::LengthError("history needs at least 2 rows".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ScenarioError::InvalidData("history contains non-finite values".into()));
        }
        let mut sorted = columns.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != columns.len() {
            return Err(ScenarioError::InvalidData("duplicate column names".into()));
        }
        Ok(HistoryTable { columns, data, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.columns.len() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.value(r, col)).collect()
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let mut reader = csv::Reader::from_path(&path).map_err(|e| ScenarioError::Csv(e.to_string()))?;
        let columns: Vec<String> = reader
            .headers()
            .map_err(|e| ScenarioError::Csv(e.to_string()))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut data = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| ScenarioError::Csv(e.to_string()))?;
            for field in record.iter() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| ScenarioError::Csv(format!("bad number {field:?}")))?;
                data.push(v);
            }
        }
        HistoryTable::new(columns, data)
    }

    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        let mut w = csv::Writer::from_path(&path).map_err(|e| ScenarioError::Csv(e.to_string()))?;
        w.write_record(&self.columns).map_err(|e| ScenarioError::Csv(e.to_string()))?;
        for r in 0..self.rows {
            let row: Vec<String> =
                (0..self.columns.len()).map(|c| format!("{}", self.value(r, c))).collect();
            w.write_record(&row).map_err(|e| ScenarioError::Csv(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Equiprobable scenario trajectories: `n` scenarios of `t_steps` timesteps
/// over `assets` columns, MW. Values are nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub assets: Vec<String>,
    n: usize,
    t_steps: usize,
    /// Minutes per timestep.
    pub step_minutes: u32,
    /// Layout: scenario-major, then timestep, then asset.
    data: Vec<f64>,
}

impl ScenarioSet {
    pub fn new(
        assets: Vec<String>,
        n: usize,
        t_steps: usize,
        step_minutes: u32,
        data: Vec<f64>,
    ) -> Result<Self, ScenarioError> {
        if data.len() != n * t_steps * assets.len() {
            return Err(ScenarioError::DimensionMismatch(format!(
                "{} values for {} x {} x {}",
                data.len(),
                n,
                t_steps,
                assets.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ScenarioError::InvalidData(
                "scenario values must be finite and nonnegative".into(),
            ));
        }
        Ok(ScenarioSet { assets, n, t_steps, step_minutes, data })
    }

    pub fn num_scenarios(&self) -> usize {
        self.n
    }

    pub fn t_steps(&self) -> usize {
        self.t_steps
    }

    pub fn num_assets(&self) -> usize {
        self.assets.len()
    }

    /// Dimension of one flattened scenario vector.
    pub fn point_dim(&self) -> usize {
        self.t_steps * self.assets.len()
    }

    pub fn value(&self, s: usize, t: usize, a: usize) -> f64 {
        self.data[(s * self.t_steps + t) * self.assets.len() + a]
    }

    /// One scenario as a flat `[t0 assets..., t1 assets...]` slice.
    pub fn scenario(&self, s: usize) -> &[f64] {
        let d = self.point_dim();
        &self.data[s * d..(s + 1) * d]
    }

    pub fn probability(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Subset of scenarios by index.
    pub fn select(&self, indices: &[usize]) -> ScenarioSet {
        let d = self.point_dim();
        let mut data = Vec::with_capacity(indices.len() * d);
        for &s in indices {
            data.extend_from_slice(self.scenario(s));
        }
        ScenarioSet {
            assets: self.assets.clone(),
            n: indices.len(),
            t_steps: self.t_steps,
            step_minutes: self.step_minutes,
            data,
        }
    }

    pub fn from_csv(path: impl AsRef<Path>, step_minutes: u32) -> Result<Self, ScenarioError> {
        let mut reader = csv::Reader::from_path(&path).map_err(|e| ScenarioError::Csv(e.to_string()))?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| ScenarioError::Csv(e.to_string()))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        if headers.first().map(|s| s.as_str()) != Some("scenario") {
            return Err(ScenarioError::Csv("first column must be 'scenario'".into()));
        }
        let assets: Vec<String> = headers[1..].to_vec();
        let mut data = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| ScenarioError::Csv(e.to_string()))?;
            let s: usize = record[0]
                .trim()
                .parse()
                .map_err(|_| ScenarioError::Csv(format!("bad scenario index {:?}", &record[0])))?;
            if s == counts.len() {
                counts.push(0);
            } else if s + 1 != counts.len() {
                return Err(ScenarioError::Csv(
                    "scenario indices must be consecutive and grouped".into(),
                ));
            }
            counts[s] += 1;
            for field in record.iter().skip(1) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| ScenarioError::Csv(format!("bad number {field:?}")))?;
                data.push(v);
            }
        }
        let n = counts.len();
        if n == 0 {
            return Err(ScenarioError::InvalidData("empty scenario file".into()));
        }
        let t = counts[0];
        if counts.iter().any(|&c| c != t) {
            return Err(ScenarioError::Csv("scenarios have differing lengths".into()));
        }
        ScenarioSet::new(assets, n, t, step_minutes, data)
    }

    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        let mut w = csv::Writer::from_path(&path).map_err(|e| ScenarioError::Csv(e.to_string()))?;
        let mut header = vec!["scenario".to_string()];
        header.extend(self.assets.iter().cloned());
        w.write_record(&header).map_err(|e| ScenarioError::Csv(e.to_string()))?;
        for s in 0..self.n {
            for t in 0..self.t_steps {
                let mut row = vec![format!("{s}")];
                for a in 0..self.assets.len() {
                    row.push(format!("{}", self.value(s, t, a)));
                }
                w.write_record(&row).map_err(|e| ScenarioError::Csv(e.to_string()))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn history_rejects_short_and_ragged() {
        assert!(HistoryTable::new(vec!["a".into()], vec![1.0]).is_err());
        assert!(HistoryTable::new(vec!["a".into(), "b".into()], vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn scenario_set_rejects_negatives() {
        let err = ScenarioSet::new(vec!["a".into()], 1, 2, 60, vec![1.0, -0.5]);
        assert!(err.is_err());
    }

    #[test]
    fn scenario_csv_round_trip() {
        let set = ScenarioSet::new(
            vec!["load".into(), "wind".into()],
            2,
            3,
            60,
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0],
        )
        .unwrap();
        let dir = std::env::temp_dir().join("gridtwin_scen_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.csv");
        set.to_csv(&path).unwrap();
        let back = ScenarioSet::from_csv(&path, 60).unwrap();
        assert_eq!(set, back);
    }
}
