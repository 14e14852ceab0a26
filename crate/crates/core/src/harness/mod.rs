//! Scenario files, experiment sweeps, CSV output and trace replay.

pub mod experiment;
pub mod replay;
pub mod report;
pub mod scenario;

pub use experiment::{expand, run_experiment, run_points, Execution, PointResult, RunError, SweepPoint};
pub use scenario::{ExperimentId, NamedStrategy, Scenario, ScenarioError, SweepSource, SweepSpec, Violation};
