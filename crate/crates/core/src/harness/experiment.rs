//! Sweep expansion and execution.

use rayon::prelude::*;
use thiserror::Error;

use super::scenario::{ExperimentId, NamedStrategy, Scenario, SweepSource, SweepSpec};
use crate::channel::Posture;
use crate::metrics::{aggregate, AggregateError, AggregateResult, RunSummary};
use crate::network::{simulate, RunConfig, SourceMode};
use crate::sim::SimTime;
use crate::strategies::StrategyKind;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("scenario `{scenario}` does not define experiment {id}")]
    MissingExperiment { scenario: String, id: ExperimentId },
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv {
        path: std::path::PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// One fully specified configuration, run once per seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub experiment: ExperimentId,
    pub strategy: NamedStrategy,
    pub posture: Posture,
    pub ttl: u32,
    /// `None` for a single-packet source.
    pub rate: Option<f64>,
    pub queue_capacity: usize,
}

impl SweepPoint {
    /// Stable key used to group per-seed summaries.
    pub fn key(&self, scenario_id: &str) -> String {
        let rate = self.rate.map_or("single".to_string(), |r| r.to_string());
        format!(
            "{scenario_id}/{}/{}/{}/ttl={}/rate={rate}/q={}",
            self.experiment, self.strategy.label, self.posture, self.ttl, self.queue_capacity
        )
    }

    pub fn run_config(&self, scenario: &Scenario) -> RunConfig {
        let mut mac = scenario.mac.clone();
        mac.queue_capacity = self.queue_capacity;
        let (source, time_cap) = match self.rate {
            None => (SourceMode::SinglePacket, scenario.run.single_packet_cap),
            Some(r) => {
                let window = scenario.run.rate_window;
                let cap = scenario.run.source_start.as_micros() + window.as_micros() + scenario.run.rate_drain.as_micros();
                (SourceMode::Rate { packets_per_s: r, window }, SimTime::from_micros(cap))
            }
        };
        RunConfig {
            channel: scenario.channel.clone(),
            posture: self.posture,
            strategy: self.strategy.kind,
            ttl: self.ttl,
            mac,
            source,
            source_start: scenario.run.source_start,
            time_cap,
        }
    }
}

/// Expands a sweep in the order ttl, rate, queue, timer, strategy, posture.
pub fn expand(spec: &SweepSpec) -> Vec<SweepPoint> {
    let rates: Vec<Option<f64>> = match &spec.source {
        SweepSource::SinglePacket => vec![None],
        SweepSource::Rate(r) => r.iter().copied().map(Some).collect(),
    };
    let timers: Vec<Option<SimTime>> =
        if spec.mbp_timer.is_empty() { vec![None] } else { spec.mbp_timer.iter().copied().map(Some).collect() };
    let mut out = Vec::new();
    for &ttl in &spec.ttl {
        for &rate in &rates {
            for &queue_capacity in &spec.queue_capacity {
                for &timer in &timers {
                    for s in &spec.strategies {
                        let strategy = match (timer, s.kind) {
                            (Some(t), StrategyKind::Mbp { delta, quota, .. }) => {
                                let kind = StrategyKind::Mbp { delta, timer: t, quota };
                                NamedStrategy { label: kind.label(), kind }
                            }
                            _ => s.clone(),
                        };
                        for &posture in &spec.postures {
                            out.push(SweepPoint {
                                experiment: spec.id,
                                strategy: strategy.clone(),
                                posture,
                                ttl,
                                rate,
                                queue_capacity,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub point: SweepPoint,
    pub aggregate: AggregateResult,
    /// Runs stopped by the time cap rather than by quiescence.
    pub capped_runs: usize,
}

/// Runs every point for every seed. Results come back in point order and,
/// within a point, in seed order, whatever the execution mode.
pub fn run_points(
    scenario: &Scenario,
    points: &[SweepPoint],
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<PointResult>, RunError> {
    let configs: Vec<RunConfig> = points.iter().map(|p| p.run_config(scenario)).collect();
    let jobs: Vec<(usize, u64)> = (0..points.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let work = |&(i, seed): &(usize, u64)| {
        let out = simulate(&configs[i], seed);
        (out.record.summary(), out.quiesced)
    };
    let runs: Vec<(RunSummary, bool)> = match exec {
        Execution::Serial => jobs.iter().map(work).collect(),
        Execution::Parallel => jobs.par_iter().map(work).collect(),
    };
    points
        .iter()
        .zip(runs.chunks(seeds.len().max(1)))
        .map(|(point, chunk)| {
            let key = point.key(&scenario.id);
            let aggregate = aggregate(chunk.iter().map(|(s, _)| (key.as_str(), s)))?;
            let capped_runs = chunk.iter().filter(|(_, q)| !q).count();
            Ok(PointResult { point: point.clone(), aggregate, capped_runs })
        })
        .collect()
}

pub fn run_experiment(
    scenario: &Scenario,
    id: ExperimentId,
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<PointResult>, RunError> {
    let spec = scenario
        .experiment(id)
        .ok_or_else(|| RunError::MissingExperiment { scenario: scenario.id.clone(), id })?;
    run_points(scenario, &expand(spec), seeds, exec)
}
