//! Nonlinear time integration in the effective variables, the bootstrap
//! hypothesis monitor, and the continuation, energy and twin-run diagnostics.

mod config;
mod data;
mod diagnostics;
mod monitor;
mod probe;
mod run;
mod step;

pub use config::{index_gates, Forcing, Gate, GateReport, MonitorConstants, SolverConfig};
pub use data::{choose_m, linear_reference, small_data, smooth_data, InitialData, SmallDataSpec};
pub use diagnostics::{
    continuation_monitor, energy_diagnostic, ContinuationVerdict, EnergyReport, EnergyRow, CRITERION_A_BOUNDED,
    CRITERION_DENSITY,
};
pub use monitor::{
    linear_smallness, Bound, HypothesisMonitor, LevelAccumulator, MonitorRow, MonitorSetup, HYPOTHESIS_IDS,
};
pub use probe::{divergence_slope, perturbation_direction, twin_run_probe, ProbeReport, PROBE_SEED};
pub use run::{dissipation, prepare, run, run_partial, RunOutput, Snapshot, StepRecord};
pub use step::step;
