//! Posture-dependent stochastic link model.
//!
//! Each unordered pair of sites has a mean attenuation and a standard
//! deviation (both dB) per posture. Attenuations are drawn from a normal
//! distribution in the dB domain, clamped at 0 dB, and held constant for one
//! coherence interval. A frame is receivable iff the link margin
//! `tx_power - attenuation - sensitivity` is non-negative.

mod body;
pub mod defaults;
mod medium;

use std::sync::Arc;

use thiserror::Error;

use crate::sim::{Purpose, RngStream, SimTime, StreamId};

pub use body::{NodeSet, NodeSite, Posture, NODE_COUNT};
pub use medium::{Medium, RxOutcome, TxId};

pub const DEFAULT_TX_POWER_DBM: f64 = -60.0;
pub const DEFAULT_SENSITIVITY_DBM: f64 = -100.0;
pub const DEFAULT_COHERENCE: SimTime = SimTime::from_millis(100);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkStats {
    pub mean_attenuation_db: f64,
    pub std_dev_db: f64,
}

impl LinkStats {
    pub const fn new(mean_attenuation_db: f64, std_dev_db: f64) -> Self {
        LinkStats { mean_attenuation_db, std_dev_db }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("{posture}: link {a}-{b} is asymmetric ({ab:?} vs {ba:?})")]
    Asymmetric {
        posture: Posture,
        a: NodeSite,
        b: NodeSite,
        ab: LinkStats,
        ba: LinkStats,
    },
    #[error("{posture}: link {a}-{b} has invalid statistics {stats:?}")]
    InvalidStats {
        posture: Posture,
        a: NodeSite,
        b: NodeSite,
        stats: LinkStats,
    },
    #[error("coherence interval must be positive")]
    ZeroCoherence,
}

/// Symmetric 7x7 table of link statistics for one posture.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkMatrix {
    cells: [[LinkStats; NODE_COUNT]; NODE_COUNT],
}

impl LinkMatrix {
    /// Builds a matrix from the strict upper triangle, row-major
    /// (`(0,1), (0,2), .., (5,6)`), mirroring it into the lower half.
    pub fn from_upper(upper: &[LinkStats; 21]) -> Self {
        let mut cells = [[LinkStats::new(0.0, 0.0); NODE_COUNT]; NODE_COUNT];
        let mut k = 0;
        for i in 0..NODE_COUNT {
            for j in i + 1..NODE_COUNT {
                cells[i][j] = upper[k];
                cells[j][i] = upper[k];
                k += 1;
            }
        }
        LinkMatrix { cells }
    }

    /// Builds a matrix from a full table without mirroring; use
    /// [`ChannelConfig::new`] to check symmetry.
    pub fn from_full(cells: [[LinkStats; NODE_COUNT]; NODE_COUNT]) -> Self {
        LinkMatrix { cells }
    }

    pub fn get(&self, a: NodeSite, b: NodeSite) -> LinkStats {
        self.cells[a.index()][b.index()]
    }

    pub fn set(&mut self, a: NodeSite, b: NodeSite, stats: LinkStats) {
        self.cells[a.index()][b.index()] = stats;
        self.cells[b.index()][a.index()] = stats;
    }

    /// Sites whose mean margin to `a` is non-negative.
    pub fn mean_neighbors(&self, a: NodeSite, tx_power_dbm: f64, sensitivity_dbm: f64) -> NodeSet {
        a.others()
            .filter(|&b| link_margin(tx_power_dbm, self.get(a, b).mean_attenuation_db, sensitivity_dbm) >= 0.0)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelConfig {
    matrices: [LinkMatrix; 7],
    pub coherence_interval: SimTime,
    pub tx_power_dbm: f64,
    pub sensitivity_dbm: f64,
}

impl ChannelConfig {
    pub fn new(
        matrices: [LinkMatrix; 7],
        coherence_interval: SimTime,
        tx_power_dbm: f64,
        sensitivity_dbm: f64,
    ) -> Result<Self, ChannelError> {
        if coherence_interval == SimTime::ZERO {
            return Err(ChannelError::ZeroCoherence);
        }
        for posture in Posture::ALL {
            let m = &matrices[posture.index()];
            for a in NodeSite::ALL {
                for b in NodeSite::ALL.into_iter().filter(|&b| b > a) {
                    let (ab, ba) = (m.get(a, b), m.get(b, a));
                    if ab != ba {
                        return Err(ChannelError::Asymmetric { posture, a, b, ab, ba });
                    }
                    if !(ab.std_dev_db >= 0.0) || !ab.mean_attenuation_db.is_finite() || !ab.std_dev_db.is_finite() {
                        return Err(ChannelError::InvalidStats { posture, a, b, stats: ab });
                    }
                }
            }
        }
        Ok(ChannelConfig { matrices, coherence_interval, tx_power_dbm, sensitivity_dbm })
    }

    /// Same matrix for every posture.
    pub fn uniform(matrix: LinkMatrix) -> Result<Self, ChannelError> {
        let matrices = std::array::from_fn(|_| matrix.clone());
        Self::new(matrices, DEFAULT_COHERENCE, DEFAULT_TX_POWER_DBM, DEFAULT_SENSITIVITY_DBM)
    }

    /// Deterministic channel (zero deviation) where exactly the listed pairs
    /// are connected.
    pub fn static_graph(edges: &[(NodeSite, NodeSite)]) -> Self {
        let mut m = LinkMatrix::from_upper(&[LinkStats::new(80.0, 0.0); 21]);
        for &(a, b) in edges {
            m.set(a, b, LinkStats::new(30.0, 0.0));
        }
        Self::uniform(m).expect("static graph is symmetric")
    }

    pub fn matrix(&self, posture: Posture) -> &LinkMatrix {
        &self.matrices[posture.index()]
    }

    pub fn link(&self, posture: Posture, a: NodeSite, b: NodeSite) -> LinkStats {
        self.matrices[posture.index()].get(a, b)
    }
}

/// `tx_power - attenuation - sensitivity`; receivable iff `>= 0`.
pub fn link_margin(tx_power_dbm: f64, attenuation_db: f64, sensitivity_dbm: f64) -> f64 {
    tx_power_dbm - attenuation_db - sensitivity_dbm
}

/// One attenuation draw: normal in dB, clamped below at 0 dB.
pub fn sample_attenuation(stats: LinkStats, rng: &mut RngStream) -> f64 {
    let v = rng
        .normal(stats.mean_attenuation_db, stats.std_dev_db)
        .expect("link statistics are validated at load time");
    v.max(0.0)
}

type Sample = [[f64; NODE_COUNT]; NODE_COUNT];

/// Per-run channel realization. Attenuations are a pure function of
/// `(seed, posture, epoch)`, where an epoch is one coherence interval, so two
/// runs with the same seed see the same channel whatever their traffic.
#[derive(Clone, Debug)]
pub struct ChannelState {
    config: Arc<ChannelConfig>,
    posture: Posture,
    seed: u64,
    // Two most recently used epochs; frames straddle at most a boundary or two.
    cache: [Option<(u64, Sample)>; 2],
    resamples: u64,
}

impl ChannelState {
    pub fn new(config: Arc<ChannelConfig>, posture: Posture, seed: u64) -> Self {
        ChannelState { config, posture, seed, cache: [None, None], resamples: 0 }
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.config
    }

    pub fn posture(&self) -> Posture {
        self.posture
    }

    pub fn epoch_of(&self, t: SimTime) -> u64 {
        t.as_micros() / self.config.coherence_interval.as_micros()
    }

    /// Number of epoch matrices drawn so far.
    pub fn resample_count(&self) -> u64 {
        self.resamples
    }

    fn sample_epoch(&self, epoch: u64) -> Sample {
        let mut rng = RngStream::new(self.seed, StreamId::new(Purpose::Channel, epoch));
        let matrix = self.config.matrix(self.posture);
        let mut out = [[0.0; NODE_COUNT]; NODE_COUNT];
        for i in 0..NODE_COUNT {
            for j in i + 1..NODE_COUNT {
                let stats = matrix.cells[i][j];
                let v = sample_attenuation(stats, &mut rng);
                out[i][j] = v;
                out[j][i] = v;
            }
        }
        out
    }

    fn epoch_sample(&mut self, epoch: u64) -> &Sample {
        let slot = match self.cache.iter().position(|c| matches!(c, Some((e, _)) if *e == epoch)) {
            Some(i) => i,
            None => {
                let fresh = self.sample_epoch(epoch);
                self.resamples += 1;
                // Evict the older epoch.
                let i = match (&self.cache[0], &self.cache[1]) {
                    (None, _) => 0,
                    (_, None) => 1,
                    (Some((e0, _)), Some((e1, _))) => usize::from(e1 < e0),
                };
                self.cache[i] = Some((epoch, fresh));
                i
            }
        };
        &self.cache[slot].as_ref().unwrap().1
    }

    pub fn attenuation_in_epoch(&mut self, a: NodeSite, b: NodeSite, epoch: u64) -> f64 {
        debug_assert_ne!(a, b);
        self.epoch_sample(epoch)[a.index()][b.index()]
    }

    pub fn attenuation(&mut self, a: NodeSite, b: NodeSite, now: SimTime) -> f64 {
        let e = self.epoch_of(now);
        self.attenuation_in_epoch(a, b, e)
    }

    pub fn margin(&mut self, a: NodeSite, b: NodeSite, now: SimTime) -> f64 {
        let att = self.attenuation(a, b, now);
        link_margin(self.config.tx_power_dbm, att, self.config.sensitivity_dbm)
    }

    pub fn audible(&mut self, a: NodeSite, b: NodeSite, now: SimTime) -> bool {
        self.margin(a, b, now) >= 0.0
    }

    /// Margin non-negative in every epoch the interval `[start, end]` touches.
    pub fn audible_throughout(&mut self, a: NodeSite, b: NodeSite, start: SimTime, end: SimTime) -> bool {
        let (e0, e1) = (self.epoch_of(start), self.epoch_of(end));
        (e0..=e1).all(|e| {
            let att = self.attenuation_in_epoch(a, b, e);
            link_margin(self.config.tx_power_dbm, att, self.config.sensitivity_dbm) >= 0.0
        })
    }

    /// Sites `a` can currently reach.
    pub fn neighbors(&mut self, a: NodeSite, now: SimTime) -> NodeSet {
        a.others().filter(|&b| self.audible(a, b, now)).collect()
    }
}
