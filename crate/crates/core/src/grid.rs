//! Grid data model, case file I/O, and DC network sensitivities (PTDF and
//! loss factors). Everything runs on a 100 MVA per-unit base; injections and
//! flows at the API boundary are in MW.

use crate::linalg::{Lu, Matrix};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub const MVA_BASE: f64 = 100.0;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("singular network: {0}")]
    SingularNetwork(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: u32,
    /// Share of the system load served at this bus (normalized at use).
    pub load_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub from_bus: u32,
    pub to_bus: u32,
    /// Series reactance, p.u. on the 100 MVA base. Must be positive.
    pub reactance: f64,
    /// Series resistance, p.u. Zero for a lossless line.
    pub resistance: f64,
    /// Thermal flow limit in MW.
    pub flow_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub id: String,
    pub bus: u32,
    pub pmin: f64,
    pub pmax: f64,
    /// MW per minute.
    pub ramp_rate: f64,
    /// Minimum up/down times in hours.
    pub min_up: u32,
    pub min_down: u32,
    pub startup_cost: f64,
    /// $/h while committed.
    pub no_load_cost: f64,
    /// Piecewise-linear offer: (segment length MW, marginal price $/MWh),
    /// prices nondecreasing, lengths summing to pmax - pmin.
    pub cost_curve: Vec<(f64, f64)>,
    /// Minutes of notice needed before the unit can change commitment.
    pub notification_time: f64,
    /// Hours on (if positive) or off (if negative) entering the horizon.
    pub initial_status: i32,
    /// MW output entering the horizon (0 when off).
    pub initial_output: f64,
}

impl Generator {
    pub fn is_initially_on(&self) -> bool {
        self.initial_status > 0
    }

    /// Marginal cost of serving output level `p` (for reporting).
    pub fn marginal_cost_at(&self, p: f64) -> f64 {
        let mut remaining = (p - self.pmin).max(0.0);
        let mut last = self.cost_curve.first().map(|s| s.1).unwrap_or(0.0);
        for &(len, price) in &self.cost_curve {
            last = price;
            if remaining <= len {
                break;
            }
            remaining -= len;
        }
        last
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub reference_bus: u32,
    /// Spinning reserve requirement as a fraction of served load.
    pub reserve_requirement: f64,
}

impl Case {
    /// Index of a bus id in declaration order.
    pub fn bus_index(&self, id: u32) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_bus_index(&self, g: usize) -> usize {
        self.bus_index(self.generators[g].bus).expect("validated")
    }

    /// Normalized load participation weights in bus declaration order.
    pub fn load_weights(&self) -> Vec<f64> {
        let total: f64 = self.buses.iter().map(|b| b.load_weight).sum();
        self.buses.iter().map(|b| b.load_weight / total).collect()
    }

    /// Per-bus loads for a system load level.
    pub fn bus_loads(&self, system_load: f64) -> Vec<f64> {
        self.load_weights().iter().map(|w| w * system_load).collect()
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let mut ids = BTreeMap::new();
        for b in &self.buses {
            if ids.insert(b.id, ()).is_some() {
                return Err(GridError::Validation(format!("duplicate bus {}", b.id)));
            }
            if !(b.load_weight >= 0.0) {
                return Err(GridError::Validation(format!(
                    "bus {} has negative load weight",
                    b.id
                )));
            }
        }
        let weight_sum: f64 = self.buses.iter().map(|b| b.load_weight).sum();
        if !(weight_sum > 0.0) {
            return Err(GridError::Validation("load weights sum to zero".into()));
        }
        if self.bus_index(self.reference_bus).is_none() {
            return Err(GridError::Validation(format!(
                "reference bus {} is not declared",
                self.reference_bus
            )));
        }
        if !(0.0..=1.0).contains(&self.reserve_requirement) {
            return Err(GridError::Validation(format!(
                "reserve_requirement {} outside [0, 1]",
                self.reserve_requirement
            )));
        }
        for (i, l) in self.lines.iter().enumerate() {
            for end in [l.from_bus, l.to_bus] {
                if self.bus_index(end).is_none() {
                    return Err(GridError::Validation(format!(
                        "line {} references undeclared bus {}",
                        i, end
                    )));
                }
            }
            if !(l.reactance > 0.0) {
                return Err(GridError::Validation(format!(
                    "line {} has nonpositive reactance",
                    i
                )));
            }
            if l.resistance < 0.0 {
                return Err(GridError::Validation(format!(
                    "line {} has negative resistance",
                    i
                )));
            }
            if !(l.flow_limit > 0.0) {
                return Err(GridError::Validation(format!(
                    "line {} has nonpositive flow limit",
                    i
                )));
            }
            if l.from_bus == l.to_bus {
                return Err(GridError::Validation(format!("line {} is a self-loop", i)));
            }
        }
        let mut gen_ids = BTreeMap::new();
        for g in &self.generators {
            if gen_ids.insert(g.id.clone(), ()).is_some() {
                return Err(GridError::Validation(format!("duplicate generator {}", g.id)));
            }
            if self.bus_index(g.bus).is_none() {
                return Err(GridError::Validation(format!(
                    "generator {} references undeclared bus {}",
                    g.id, g.bus
                )));
            }
            if !(0.0 <= g.pmin && g.pmin <= g.pmax) {
                return Err(GridError::Validation(format!(
                    "generator {} violates 0 <= pmin <= pmax",
                    g.id
                )));
            }
            if !(g.ramp_rate > 0.0) {
                return Err(GridError::Validation(format!(
                    "generator {} has nonpositive ramp rate",
                    g.id
                )));
            }
            if g.min_up < 1 || g.min_down < 1 {
                return Err(GridError::Validation(format!(
                    "generator {} needs min_up/min_down >= 1",
                    g.id
                )));
            }
            if g.startup_cost < 0.0 || g.no_load_cost < 0.0 {
                return Err(GridError::Validation(format!(
                    "generator {} has negative costs",
                    g.id
                )));
            }
            if g.notification_time < 0.0 {
                return Err(GridError::Validation(format!(
                    "generator {} has negative notification time",
                    g.id
                )));
            }
            let mut seg_sum = 0.0;
            let mut last_price = f64::NEG_INFINITY;
            for &(len, price) in &g.cost_curve {
                if len < 0.0 {
                    return Err(GridError::Validation(format!(
                        "generator {} has a negative segment length",
                        g.id
                    )));
                }
                if price < last_price {
                    return Err(GridError::Validation(format!(
                        "generator {} has a nonconvex cost curve (price {} after {})",
                        g.id, price, last_price
                    )));
                }
                last_price = price;
                seg_sum += len;
            }
            if (seg_sum - (g.pmax - g.pmin)).abs() > 1e-6 {
                return Err(GridError::Validation(format!(
                    "generator {}: cost segments sum to {} but pmax - pmin = {}",
                    g.id,
                    seg_sum,
                    g.pmax - g.pmin
                )));
            }
            if g.initial_status == 0 {
                return Err(GridError::Validation(format!(
                    "generator {}: initial_status must be nonzero",
                    g.id
                )));
            }
            if g.initial_status > 0 {
                if g.initial_output < g.pmin - 1e-6 || g.initial_output > g.pmax + 1e-6 {
                    return Err(GridError::Validation(format!(
                        "generator {}: initial_output {} outside [pmin, pmax]",
                        g.id, g.initial_output
                    )));
                }
            } else if g.initial_output != 0.0 {
                return Err(GridError::Validation(format!(
                    "generator {}: off unit must have zero initial_output",
                    g.id
                )));
            }
        }
        // Connectivity over declared lines.
        let n = self.buses.len();
        if n == 0 {
            return Err(GridError::Validation("case has no buses".into()));
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for l in &self.lines {
            let a = self.bus_index(l.from_bus).unwrap();
            let b = self.bus_index(l.to_bus).unwrap();
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(GridError::Validation(format!(
                "grid is disconnected: bus {} unreachable from bus {}",
                self.buses[i].id, self.buses[0].id
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("case serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GridError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Load and validate a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<Case, GridError> {
    let text = std::fs::read_to_string(&path)?;
    parse_case(&text)
}

pub fn parse_case(text: &str) -> Result<Case, GridError> {
    let case: Case = serde_json::from_str(text).map_err(|e| GridError::Parse(e.to_string()))?;
    case.validate()?;
    Ok(case)
}

/// Power transfer distribution factors: rows = lines, columns = buses.
/// Entry (l, b) is the MW flow change on line l (oriented from->to) per one
/// MW injected at bus b and withdrawn at the reference bus.
#[derive(Debug, Clone)]
pub struct Ptdf {
    pub factors: Matrix,
    pub reference_index: usize,
}

impl Ptdf {
    /// Line flows in MW for the given per-bus injections (MW, declaration
    /// order). Any net imbalance is absorbed at the reference bus.
    pub fn flows(&self, injections: &[f64]) -> Vec<f64> {
        self.factors.matvec(injections)
    }
}

pub fn compute_ptdf(case: &Case) -> Result<Ptdf, GridError> {
    let n = case.num_buses();
    let nl = case.num_lines();
    let ref_idx = case
        .bus_index(case.reference_bus)
        .ok_or_else(|| GridError::Validation("reference bus missing".into()))?;
    for (i, l) in case.lines.iter().enumerate() {
        if l.reactance.abs() < 1e-12 {
            return Err(GridError::SingularNetwork(format!(
                "line {} has (near-)zero reactance",
                i
            )));
        }
    }
    // Susceptance matrix, reduced by the reference bus.
    let keep: Vec<usize> = (0..n).filter(|&i| i != ref_idx).collect();
    let pos_of: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut b_red = Matrix::zeros(n - 1, n - 1);
    for l in &case.lines {
        let a = case.bus_index(l.from_bus).unwrap();
        let b = case.bus_index(l.to_bus).unwrap();
        let s = 1.0 / l.reactance;
        if let Some(&ka) = pos_of.get(&a) {
            b_red[(ka, ka)] += s;
        }
        if let Some(&kb) = pos_of.get(&b) {
            b_red[(kb, kb)] += s;
        }
        if let (Some(&ka), Some(&kb)) = (pos_of.get(&a), pos_of.get(&b)) {
            b_red[(ka, kb)] -= s;
            b_red[(kb, ka)] -= s;
        }
    }
    let lu = Lu::factor(&b_red, 1e-12)
        .map_err(|e| GridError::SingularNetwork(format!("susceptance system: {e}")))?;

    let mut factors = Matrix::zeros(nl, n);
    for (col, &bus) in keep.iter().enumerate().map(|(k, b)| (k, b)) {
        let mut e = vec![0.0; n - 1];
        e[col] = 1.0;
        let theta_red = lu.solve(&e);
        // Scatter to full angle vector (reference at 0).
        let mut theta = vec![0.0; n];
        for (k, &i) in keep.iter().enumerate() {
            theta[i] = theta_red[k];
        }
        for (li, l) in case.lines.iter().enumerate() {
            let a = case.bus_index(l.from_bus).unwrap();
            let b = case.bus_index(l.to_bus).unwrap();
            factors[(li, bus)] = (theta[a] - theta[b]) / l.reactance;
        }
    }
    Ok(Ptdf { factors, reference_index: ref_idx })
}

/// Line flows in MW from a direct solve of the DC angle equations
/// (independent route used to cross-check the PTDF).
pub fn dc_flows(case: &Case, injections_mw: &[f64]) -> Result<Vec<f64>, GridError> {
    let n = case.num_buses();
    assert_eq!(injections_mw.len(), n);
    let ref_idx = case.bus_index(case.reference_bus).unwrap();
    let keep: Vec<usize> = (0..n).filter(|&i| i != ref_idx).collect();
    let pos_of: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut b_red = Matrix::zeros(n - 1, n - 1);
    for l in &case.lines {
        let a = case.bus_index(l.from_bus).unwrap();
        let b = case.bus_index(l.to_bus).unwrap();
        let s = 1.0 / l.reactance;
        if let Some(&ka) = pos_of.get(&a) {
            b_red[(ka, ka)] += s;
        }
        if let Some(&kb) = pos_of.get(&b) {
            b_red[(kb, kb)] += s;
        }
        if let (Some(&ka), Some(&kb)) = (pos_of.get(&a), pos_of.get(&b)) {
            b_red[(ka, kb)] -= s;
            b_red[(kb, ka)] -= s;
        }
    }
    let lu = Lu::factor(&b_red, 1e-12)
        .map_err(|e| GridError::SingularNetwork(format!("susceptance system: {e}")))?;
    let p_red: Vec<f64> = keep.iter().map(|&i| injections_mw[i] / MVA_BASE).collect();
    let theta_red = lu.solve(&p_red);
    let mut theta = vec![0.0; n];
    for (k, &i) in keep.iter().enumerate() {
        theta[i] = theta_red[k];
    }
    Ok(case
        .lines
        .iter()
        .map(|l| {
            let a = case.bus_index(l.from_bus).unwrap();
            let b = case.bus_index(l.to_bus).unwrap();
            (theta[a] - theta[b]) / l.reactance * MVA_BASE
        })
        .collect())
}

/// First-order loss linearization around a base operating point:
/// losses(inj) ~ base_losses + loss_factors . (inj - base_injections).
#[derive(Debug, Clone)]
pub struct LossModel {
    pub base_losses: f64,
    /// d(losses)/d(injection) per bus, dimensionless. Zero at the reference.
    pub loss_factors: Vec<f64>,
    pub base_injections: Vec<f64>,
}

impl LossModel {
    /// Lossless model (all sensitivities zero) for a case.
    pub fn lossless(case: &Case) -> LossModel {
        LossModel {
            base_losses: 0.0,
            loss_factors: vec![0.0; case.num_buses()],
            base_injections: vec![0.0; case.num_buses()],
        }
    }
}

/// Exact quadratic losses (sum of r f^2 over lines) for given injections.
pub fn exact_losses_mw(case: &Case, ptdf: &Ptdf, injections_mw: &[f64]) -> f64 {
    let flows = ptdf.flows(injections_mw);
    case.lines
        .iter()
        .zip(&flows)
        .map(|(l, f)| l.resistance * (f / MVA_BASE).powi(2) * MVA_BASE)
        .sum()
}

/// Build the loss linearization at a base dispatch/load point.
///
/// `base_dispatch` is MW per generator (declaration order); `bus_loads` is
/// MW per bus. Net imbalance is absorbed at the reference bus, matching the
/// DC flow convention.
pub fn compute_loss_model(
    case: &Case,
    ptdf: &Ptdf,
    base_dispatch: &[f64],
    bus_loads: &[f64],
) -> LossModel {
    let n = case.num_buses();
    assert_eq!(base_dispatch.len(), case.num_generators());
    assert_eq!(bus_loads.len(), n);
    let mut inj = vec![0.0; n];
    for (g, gen) in case.generators.iter().enumerate() {
        inj[case.bus_index(gen.bus).unwrap()] += base_dispatch[g];
    }
    for (b, load) in bus_loads.iter().enumerate() {
        inj[b] -= load;
    }
    let flows = ptdf.flows(&inj);
    let base_losses: f64 = case
        .lines
        .iter()
        .zip(&flows)
        .map(|(l, f)| l.resistance * (f / MVA_BASE).powi(2) * MVA_BASE)
        .sum();
    let mut loss_factors = vec![0.0; n];
    for (b, lf) in loss_factors.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (li, l) in case.lines.iter().enumerate() {
            acc += 2.0 * l.resistance * (flows[li] / MVA_BASE) * ptdf.factors[(li, b)];
        }
        *lf = acc;
    }
    LossModel { base_losses, loss_factors, base_injections: inj }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn triangle_case() -> Case {
        Case {
            buses: vec![
                Bus { id: 1, load_weight: 0.0 },
                Bus { id: 2, load_weight: 0.5 },
                Bus { id: 3, load_weight: 0.5 },
            ],
            lines: vec![
                Line { from_bus: 1, to_bus: 2, reactance: 1.0, resistance: 0.0, flow_limit: 100.0 },
                Line { from_bus: 1, to_bus: 3, reactance: 1.0, resistance: 0.0, flow_limit: 100.0 },
                Line { from_bus: 2, to_bus: 3, reactance: 1.0, resistance: 0.0, flow_limit: 100.0 },
            ],
            generators: vec![Generator {
                id: "G1".into(),
                bus: 1,
                pmin: 0.0,
                pmax: 200.0,
                ramp_rate: 10.0,
                min_up: 1,
                min_down: 1,
                startup_cost: 0.0,
                no_load_cost: 0.0,
                cost_curve: vec![(200.0, 15.0)],
                notification_time: 0.0,
                initial_status: 8,
                initial_output: 50.0,
            }],
            reference_bus: 1,
            reserve_requirement: 0.0,
        }
    }

    #[test]
    fn triangle_ptdf_hand_values() {
        let case = triangle_case();
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        // Injection at bus 2 withdrawn at bus 1: -2/3 on 1-2, -1/3 on 1-3, +1/3 on 2-3.
        assert!((ptdf.factors[(0, 1)] + 2.0 / 3.0).abs() < 1e-12);
        assert!((ptdf.factors[(1, 1)] + 1.0 / 3.0).abs() < 1e-12);
        assert!((ptdf.factors[(2, 1)] - 1.0 / 3.0).abs() < 1e-12);
        // Reference column all zeros.
        for l in 0..3 {
            assert_eq!(ptdf.factors[(l, 0)], 0.0);
        }
    }

    #[test]
    fn two_bus_radial_ptdf() {
        let mut case = triangle_case();
        case.buses.truncate(2);
        case.lines = vec![Line {
            from_bus: 1,
            to_bus: 2,
            reactance: 0.5,
            resistance: 0.0,
            flow_limit: 100.0,
        }];
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        assert!((ptdf.factors[(0, 1)] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_model_two_bus() {
        let mut case = triangle_case();
        case.buses.truncate(2);
        case.buses[1].load_weight = 1.0;
        case.lines = vec![Line {
            from_bus: 1,
            to_bus: 2,
            reactance: 0.5,
            resistance: 0.01,
            flow_limit: 500.0,
        }];
        case.generators[0].pmax = 500.0;
        case.generators[0].cost_curve = vec![(500.0, 15.0)];
        case.validate().unwrap();
        let ptdf = compute_ptdf(&case).unwrap();
        // 100 MW load at bus 2, served from bus 1: flow 100 MW = 1 p.u.
        let loads = case.bus_loads(100.0);
        let lm = compute_loss_model(&case, &ptdf, &[100.0], &loads);
        assert!((lm.base_losses - 1.0).abs() < 1e-9, "losses {}", lm.base_losses);
        assert!((lm.loss_factors[1] + 0.02).abs() < 1e-12);
        assert_eq!(lm.loss_factors[0], 0.0);

        // Central finite difference of the exact quadratic loss.
        let h = 1.0;
        let mut up = lm.base_injections.clone();
        let mut dn = lm.base_injections.clone();
        up[1] += h;
        dn[1] -= h;
        let fd = (exact_losses_mw(&case, &ptdf, &up) - exact_losses_mw(&case, &ptdf, &dn)) / (2.0 * h);
        assert!((fd - lm.loss_factors[1]).abs() <= 1e-6 * fd.abs().max(1e-9));

        // Doubling resistances doubles the model.
        case.lines[0].resistance *= 2.0;
        let lm2 = compute_loss_model(&case, &ptdf, &[100.0], &loads);
        assert!((lm2.base_losses - 2.0 * lm.base_losses).abs() < 1e-9);
        assert!((lm2.loss_factors[1] - 2.0 * lm.loss_factors[1]).abs() < 1e-12);
    }

    #[test]
    fn lossless_network_zero_model() {
        let case = triangle_case();
        let ptdf = compute_ptdf(&case).unwrap();
        let loads = case.bus_loads(60.0);
        let lm = compute_loss_model(&case, &ptdf, &[60.0], &loads);
        assert_eq!(lm.base_losses, 0.0);
        assert!(lm.loss_factors.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn rejects_dangling_line_endpoint() {
        let mut case = triangle_case();
        case.lines[0].to_bus = 99;
        let err = case.validate().unwrap_err();
        assert!(err.to_string().contains("bus 99"), "{err}");
    }

    #[test]
    fn rejects_nonconvex_cost_curve() {
        let mut case = triangle_case();
        case.generators[0].cost_curve = vec![(100.0, 20.0), (100.0, 10.0)];
        let err = case.validate().unwrap_err();
        assert!(err.to_string().contains("nonconvex"), "{err}");
        assert!(err.to_string().contains("G1"), "{err}");
    }

    #[test]
    fn rejects_disconnected_graph() {
        let mut case = triangle_case();
        case.buses.push(Bus { id: 4, load_weight: 0.0 });
        let err = case.validate().unwrap_err();
        assert!(err.to_string().contains("disconnected"), "{err}");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let case = triangle_case();
        let text = case.to_json();
        let back = parse_case(&text).unwrap();
        assert_eq!(case, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut value: serde_json::Value = serde_json::from_str(&triangle_case().to_json()).unwrap();
        value["mystery"] = serde_json::json!(1);
        let err = parse_case(&value.to_string()).unwrap_err();
        assert!(matches!(err, GridError::Parse(_)));
    }
}
