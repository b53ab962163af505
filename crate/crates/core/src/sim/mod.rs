//! Discrete-event model of an editorial board.
//!
//! Manuscripts arrive as a Poisson stream into a queue of bounded length.
//! Every `period_days` the board meets and accepts up to
//! `capacity_per_meeting` queued manuscripts, chosen by the selection policy.
//! An arrival that finds the queue full triggers the rejection policy.

mod config;
mod engine;

pub use config::{ConfigError, QueueCap, RejectionPolicy, SelectionPolicy, SimulationConfig};
pub use engine::{
    admit_arrival, generate_arrivals, simulate, simulate_with_arrivals, step_meeting, Accepted,
    Manuscript, Rejected, SimError, SimulationTrace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

/// Distance from 1 at which a traffic intensity still counts as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-9;

/// ρ = λ / μ.
pub fn traffic_intensity(lambda_per_period: f64, capacity_per_meeting: usize) -> f64 {
    lambda_per_period / capacity_per_meeting as f64
}

pub fn classify_regime(rho: f64) -> Regime {
    if (rho - 1.0).abs() <= CRITICAL_TOLERANCE {
        Regime::Critical
    } else if rho < 1.0 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    }
}
