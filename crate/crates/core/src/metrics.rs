//! Per-run observations and cross-seed aggregation.
//!
//! Energy is reported as frame counts (transmissions and receptions), split
//! into data and control traffic. Never-covered nodes are left out of delay
//! averages; they show up as coverage loss instead.

use thiserror::Error;

use crate::channel::{NodeSite, NODE_COUNT};
use crate::frame::TrafficClass;
use crate::mac::DropReason;
use crate::sim::SimTime;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NodeCounters {
    pub data_tx: u64,
    pub data_rx: u64,
    pub control_tx: u64,
    pub control_rx: u64,
    pub drops_queue: u64,
    pub drops_csma: u64,
    pub max_seq_seen: Option<u32>,
    pub first_receptions: u64,
    pub out_of_order: u64,
}

impl NodeCounters {
    pub fn data_tx_rx(&self) -> u64 {
        self.data_tx + self.data_rx
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observation {
    Tx { node: NodeSite, class: TrafficClass },
    Rx { node: NodeSite, class: TrafficClass },
    Drop { node: NodeSite, reason: DropReason },
    Originated { seq: u32, at: SimTime },
    /// A data copy addressed to `node` was received intact.
    Delivered { node: NodeSite, seq: u32, at: SimTime },
}

/// Everything observed during one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    pub nodes: [NodeCounters; NODE_COUNT],
    /// Origination time per sequence number.
    pub originated: Vec<SimTime>,
    /// First reception time per sequence number and node.
    pub first_rx: Vec<[Option<SimTime>; NODE_COUNT]>,
}

impl RunRecord {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns true when a `Delivered` observation was a first reception.
    pub fn record(&mut self, obs: Observation) -> bool {
        match obs {
            Observation::Tx { node, class } => {
                let c = &mut self.nodes[node.index()];
                match class {
                    TrafficClass::Data => c.data_tx += 1,
                    TrafficClass::Control => c.control_tx += 1,
                }
            }
            Observation::Rx { node, class } => {
                let c = &mut self.nodes[node.index()];
                match class {
                    TrafficClass::Data => c.data_rx += 1,
                    TrafficClass::Control => c.control_rx += 1,
                }
            }
            Observation::Drop { node, reason } => {
                let c = &mut self.nodes[node.index()];
                match reason {
                    DropReason::QueueFull => c.drops_queue += 1,
                    DropReason::ChannelAccessFailure => c.drops_csma += 1,
                }
            }
            Observation::Originated { seq, at } => {
                let seq = seq as usize;
                debug_assert_eq!(seq, self.originated.len(), "sequence numbers must be consecutive");
                self.originated.push(at);
                self.first_rx.push([None; NODE_COUNT]);
            }
            Observation::Delivered { node, seq, at } => {
                let slot = &mut self.first_rx[seq as usize][node.index()];
                if slot.is_some() {
                    return false;
                }
                *slot = Some(at);
                let c = &mut self.nodes[node.index()];
                c.first_receptions += 1;
                match c.max_seq_seen {
                    Some(max) if max > seq => c.out_of_order += 1,
                    Some(max) if max >= seq => {}
                    _ => c.max_seq_seen = Some(seq),
                }
                return true;
            }
        }
        false
    }

    pub fn total_tx(&self, class: TrafficClass) -> u64 {
        self.nodes
            .iter()
            .map(|c| match class {
                TrafficClass::Data => c.data_tx,
                TrafficClass::Control => c.control_tx,
            })
            .sum()
    }

    pub fn total_rx(&self, class: TrafficClass) -> u64 {
        self.nodes
            .iter()
            .map(|c| match class {
                TrafficClass::Data => c.data_rx,
                TrafficClass::Control => c.control_rx,
            })
            .sum()
    }

    pub fn covered(&self, seq: u32) -> impl Iterator<Item = NodeSite> + '_ {
        let row = &self.first_rx[seq as usize];
        NodeSite::ALL.into_iter().filter(move |n| !n.is_sink() && row[n.index()].is_some())
    }

    /// Per-node delivery ratio, averaged over the six non-sink nodes, in
    /// percent. For a single message this is the share of covered nodes.
    pub fn coverage_pct(&self) -> f64 {
        let total = self.originated.len();
        if total == 0 {
            return 0.0;
        }
        let per_node: f64 = NodeSite::ALL
            .into_iter()
            .filter(|n| !n.is_sink())
            .map(|n| self.first_rx.iter().filter(|row| row[n.index()].is_some()).count() as f64 / total as f64)
            .sum();
        per_node / (NODE_COUNT - 1) as f64 * 100.0
    }

    /// Mean first-reception delay of `node` over the messages it received.
    pub fn node_delay_s(&self, node: NodeSite) -> Option<f64> {
        let delays: Vec<f64> = self
            .first_rx
            .iter()
            .zip(&self.originated)
            .filter_map(|(row, &orig)| row[node.index()].map(|t| (t - orig).as_secs_f64()))
            .collect();
        (!delays.is_empty()).then(|| delays.iter().sum::<f64>() / delays.len() as f64)
    }

    /// Mean delay over every (non-sink node, message) first reception.
    pub fn delay_s(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (row, &orig) in self.first_rx.iter().zip(&self.originated) {
            for node in NodeSite::ALL.into_iter().filter(|n| !n.is_sink()) {
                if let Some(t) = row[node.index()] {
                    sum += (t - orig).as_secs_f64();
                    n += 1;
                }
            }
        }
        (n > 0).then(|| sum / n as f64)
    }

    pub fn desequencing(&self) -> Desequencing {
        let per_node: [Option<f64>; NODE_COUNT] = std::array::from_fn(|i| {
            let c = &self.nodes[i];
            let node = NodeSite::from_index(i).unwrap();
            (!node.is_sink() && c.first_receptions > 0)
                .then(|| c.out_of_order as f64 / c.first_receptions as f64 * 100.0)
        });
        let with_data: Vec<f64> = per_node.iter().flatten().copied().collect();
        let network_pct = if with_data.is_empty() {
            0.0
        } else {
            with_data.iter().sum::<f64>() / with_data.len() as f64
        };
        Desequencing { per_node, network_pct, no_data: with_data.is_empty() }
    }

    pub fn summary(&self) -> RunSummary {
        let deseq = self.desequencing();
        RunSummary {
            coverage_pct: self.coverage_pct(),
            delay_s: self.delay_s(),
            data_tx: self.total_tx(TrafficClass::Data),
            data_rx: self.total_rx(TrafficClass::Data),
            control_tx: self.total_tx(TrafficClass::Control),
            control_rx: self.total_rx(TrafficClass::Control),
            drops: self.nodes.iter().map(|c| c.drops_queue + c.drops_csma).sum(),
            deseq_pct: deseq.network_pct,
            deseq_no_data: deseq.no_data,
            node_delay_s: NodeSite::ALL.map(|n| self.node_delay_s(n)),
            node_tx_rx: NodeSite::ALL.map(|n| self.nodes[n.index()].data_tx_rx()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Desequencing {
    /// `None` for the sink and for nodes that received nothing.
    pub per_node: [Option<f64>; NODE_COUNT],
    pub network_pct: f64,
    pub no_data: bool,
}

/// Scalar metrics of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub coverage_pct: f64,
    pub delay_s: Option<f64>,
    pub data_tx: u64,
    pub data_rx: u64,
    pub control_tx: u64,
    pub control_rx: u64,
    pub drops: u64,
    pub deseq_pct: f64,
    pub deseq_no_data: bool,
    pub node_delay_s: [Option<f64>; NODE_COUNT],
    /// Data transmissions plus receptions per node.
    pub node_tx_rx: [u64; NODE_COUNT],
}

impl RunSummary {
    pub fn data_tx_rx(&self) -> u64 {
        self.data_tx + self.data_rx
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation (zero for a single value).
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn of<I: IntoIterator<Item = f64>>(values: I) -> Stat {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return Stat { mean: f64::NAN, std: f64::NAN, n: 0 };
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat { mean, std, n }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AggregateError {
    #[error("nothing to aggregate")]
    Empty,
    #[error("cannot aggregate runs from different scenarios: `{0}` vs `{1}`")]
    MixedScenarios(String, String),
}

/// Cross-seed statistics for one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateResult {
    pub seeds: usize,
    pub coverage_pct: Stat,
    /// Over runs where at least one node was covered.
    pub delay_s: Stat,
    pub data_tx: Stat,
    pub data_rx: Stat,
    pub control_tx: Stat,
    pub control_rx: Stat,
    pub drops: Stat,
    pub deseq_pct: Stat,
    pub node_delay_s: [Stat; NODE_COUNT],
    pub node_tx_rx: [Stat; NODE_COUNT],
}

impl AggregateResult {
    pub fn data_tx_rx_mean(&self) -> f64 {
        self.data_tx.mean + self.data_rx.mean
    }
}

/// Folds per-seed summaries that all belong to `scenario_key`.
pub fn aggregate<'a, I>(runs: I) -> Result<AggregateResult, AggregateError>
where
    I: IntoIterator<Item = (&'a str, &'a RunSummary)>,
{
    let runs: Vec<(&str, &RunSummary)> = runs.into_iter().collect();
    let Some((key, _)) = runs.first() else { return Err(AggregateError::Empty) };
    if let Some((other, _)) = runs.iter().find(|(k, _)| k != key) {
        return Err(AggregateError::MixedScenarios(key.to_string(), other.to_string()));
    }
    let s: Vec<&RunSummary> = runs.iter().map(|(_, r)| *r).collect();
    let stat = |f: &dyn Fn(&RunSummary) -> f64| Stat::of(s.iter().map(|r| f(r)));
    Ok(AggregateResult {
        seeds: s.len(),
        coverage_pct: stat(&|r| r.coverage_pct),
        delay_s: Stat::of(s.iter().filter_map(|r| r.delay_s)),
        data_tx: stat(&|r| r.data_tx as f64),
        data_rx: stat(&|r| r.data_rx as f64),
        control_tx: stat(&|r| r.control_tx as f64),
        control_rx: stat(&|r| r.control_rx as f64),
        drops: stat(&|r| r.drops as f64),
        deseq_pct: stat(&|r| r.deseq_pct),
        node_delay_s: std::array::from_fn(|i| Stat::of(s.iter().filter_map(|r| r.node_delay_s[i]))),
        node_tx_rx: std::array::from_fn(|i| Stat::of(s.iter().map(|r| r.node_tx_rx[i] as f64))),
    })
}
