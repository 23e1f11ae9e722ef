//! Strict-sense and extended processes, the embedding between them,
//! distances, feasibility and neighbourhood probes.

pub mod distance;
pub mod embed;
pub mod integrate;
pub mod probe;
pub mod scenario;
pub mod tsv;

pub use distance::{distance_controls, distance_d, distance_dinf};
pub use embed::{embed, unembed};
pub use integrate::{
    cost, cost_strict, integrate_extended, integrate_extended_with_step, integrate_strict,
    integrate_strict_with_step, is_feasible, is_feasible_strict, ExtendedControl, ExtendedProcess,
    FeasibilityReport, PiecewiseControl, StrictProcess,
};
pub use probe::{strict_neighborhood_probe, ProbeConfig, ProbeReport, ProbeWitness};
pub use scenario::{ControlCone, IntegratorConfig, Scenario, ScenarioFile, SmoothnessSpec, Tolerances};
pub use tsv::{extended_from_tsv, extended_to_tsv, strict_to_tsv};
