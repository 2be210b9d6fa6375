//! Desk-scale digital twin of an ISO market-clearing pipeline.
//!
//! The crate covers the full chain from day-ahead unit commitment to 5-minute
//! real-time dispatch, plus scenario generation, support-points reduction,
//! two-stage stochastic reliability commitment, and a risk-estimation
//! pipeline producing CVaR and violation-probability reports.

pub mod grid;
pub mod linalg;
pub mod market;
pub mod risk;
pub mod scenario;
pub mod solver;
pub mod stochastic;
