//! Scenario files: TOML in, validated [`Scenario`] out.
//!
//! Validation collects every violation instead of stopping at the first one,
//! so `validate` can report them all. Each violation names the offending key.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::channel::{ChannelConfig, LinkMatrix, LinkStats, NodeSite, Posture, NODE_COUNT};
use crate::mac::MacParams;
use crate::network::{simulate, RunConfig};
use crate::sim::SimTime;
use crate::strategies::StrategyKind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub key: String,
    pub rule: String,
}

impl Violation {
    fn new(key: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation { key: key.into(), rule: rule.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.rule)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("{} violation(s):\n{}", .0.len(), .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
}

impl ScenarioError {
    /// I/O problems are runtime faults; everything else is a validation failure.
    pub fn is_io(&self) -> bool {
        matches!(self, ScenarioError::Io { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] =
        [ExperimentId::E1, ExperimentId::E2, ExperimentId::E3, ExperimentId::E4, ExperimentId::E5, ExperimentId::E6];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::E1 => "E1",
            ExperimentId::E2 => "E2",
            ExperimentId::E3 => "E3",
            ExperimentId::E4 => "E4",
            ExperimentId::E5 => "E5",
            ExperimentId::E6 => "E6",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentId::E1 => "coverage versus TTL",
            ExperimentId::E2 => "end-to-end delay per node and posture",
            ExperimentId::E3 => "transmissions and receptions per node and posture",
            ExperimentId::E4 => "coverage and desequencing versus packet rate",
            ExperimentId::E5 => "coverage and desequencing versus MAC queue capacity",
            ExperimentId::E6 => "MBP timer study",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown experiment `{s}` (expected E1..E6)"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedStrategy {
    pub label: String,
    pub kind: StrategyKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub seeds: u32,
    pub seed_base: u64,
    pub ttl: u32,
    pub postures: Vec<Posture>,
    pub source_start: SimTime,
    /// Hard cap for single-packet runs, counted from time zero.
    pub single_packet_cap: SimTime,
    /// Generation window of the rate source.
    pub rate_window: SimTime,
    /// Extra time after the window before the rate-mode hard cap.
    pub rate_drain: SimTime,
}

impl RunSettings {
    pub fn seeds(&self) -> impl Iterator<Item = u64> + Clone + '_ {
        (0..self.seeds as u64).map(move |i| self.seed_base.wrapping_add(i))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepSource {
    SinglePacket,
    Rate(Vec<f64>),
}

/// One experiment family with its swept lists and fixed context.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub id: ExperimentId,
    pub strategies: Vec<NamedStrategy>,
    pub postures: Vec<Posture>,
    pub ttl: Vec<u32>,
    pub source: SweepSource,
    pub queue_capacity: Vec<usize>,
    /// Overrides the MBP timer; empty keeps each strategy's own value.
    pub mbp_timer: Vec<SimTime>,
    /// Also report per-node delay and tx+rx.
    pub per_node: bool,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: String,
    pub channel: Arc<ChannelConfig>,
    pub mac: MacParams,
    pub run: RunSettings,
    pub strategies: Vec<NamedStrategy>,
    pub experiments: BTreeMap<ExperimentId, SweepSpec>,
}

/// The shipped default scenario file.
pub const DEFAULT_SCENARIO: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/default.toml"));

impl Scenario {
    /// Parses [`DEFAULT_SCENARIO`].
    pub fn builtin() -> Scenario {
        Scenario::parse(DEFAULT_SCENARIO).expect("shipped default scenario is valid")
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
        Scenario::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        let mut v = Vec::new();
        let scenario = raw.resolve(&mut v);
        match scenario {
            Some(s) if v.is_empty() => Ok(s),
            _ => Err(ScenarioError::Invalid(v)),
        }
    }

    /// Checks that Flooding at the largest TTL in use quiesces before the
    /// single-packet cap in every posture in use, over the first few seeds.
    pub fn check_quiescence(&self, seeds: u32) -> Vec<Violation> {
        let ttl = self.experiments.values().flat_map(|e| e.ttl.iter().copied()).chain([self.run.ttl]).max().unwrap_or(1);
        let postures: BTreeSet<Posture> =
            self.experiments.values().flat_map(|e| e.postures.iter().copied()).chain(self.run.postures.iter().copied()).collect();
        let mut v = Vec::new();
        for posture in postures {
            let mut cfg = RunConfig::new(self.channel.clone(), StrategyKind::Flooding);
            cfg.posture = posture;
            cfg.ttl = ttl;
            cfg.mac = self.mac.clone();
            cfg.source_start = self.run.source_start;
            cfg.time_cap = self.run.single_packet_cap;
            let seeds = self.run.seeds().take(seeds.max(1) as usize);
            if let Some(seed) = seeds.into_iter().find(|&s| !simulate(&cfg, s).quiesced) {
                v.push(Violation::new(
                    "run.single_packet_cap_s",
                    format!("flooding at ttl {ttl} in posture {posture} does not quiesce before the cap (seed {seed})"),
                ));
            }
        }
        v
    }

    pub fn experiment(&self, id: ExperimentId) -> Option<&SweepSpec> {
        self.experiments.get(&id)
    }

    pub fn strategy(&self, label: &str) -> Option<&NamedStrategy> {
        self.strategies.iter().find(|s| s.label == label)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    id: String,
    channel: RawChannel,
    #[serde(default)]
    mac: RawMac,
    #[serde(default)]
    run: RawRun,
    strategies: Vec<RawStrategy>,
    #[serde(default)]
    experiments: BTreeMap<String, RawExperiment>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    tx_power_dbm: Option<f64>,
    sensitivity_dbm: Option<f64>,
    coherence_s: Option<f64>,
    postures: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMac {
    min_be: Option<u8>,
    max_be: Option<u8>,
    max_csma_backoffs: Option<u8>,
    backoff_unit_us: Option<u64>,
    data_rate_bps: Option<u32>,
    header_bits: Option<u32>,
    turnaround_us: Option<u64>,
    queue_capacity: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    seeds: Option<u32>,
    seed_base: Option<u64>,
    ttl: Option<u32>,
    postures: Option<Vec<String>>,
    source_start_s: Option<f64>,
    single_packet_cap_s: Option<f64>,
    rate_window_s: Option<f64>,
    rate_drain_s: Option<f64>,
}

#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum Quota {
    Count(i64),
    Word(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    label: Option<String>,
    kind: String,
    k: Option<i64>,
    p: Option<f64>,
    hello_interval_s: Option<f64>,
    delta: Option<i64>,
    timer_s: Option<f64>,
    quota: Option<Quota>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    strategies: Vec<String>,
    postures: Option<Vec<String>>,
    ttl: Option<Vec<u32>>,
    source: Option<String>,
    rates: Option<Vec<f64>>,
    queue_capacity: Option<Vec<usize>>,
    mbp_timer_s: Option<Vec<f64>>,
    per_node: Option<bool>,
}

fn positive_secs(v: &mut Vec<Violation>, key: &str, secs: f64) -> SimTime {
    if !(secs.is_finite() && secs > 0.0) {
        v.push(Violation::new(key, format!("must be a positive number of seconds, got {secs}")));
        return SimTime::ZERO;
    }
    SimTime::from_secs_f64(secs)
}

fn parse_postures(v: &mut Vec<Violation>, key: &str, names: &[String]) -> Vec<Posture> {
    if names.is_empty() {
        v.push(Violation::new(key, "must not be empty"));
    }
    names
        .iter()
        .filter_map(|n| match n.parse::<Posture>() {
            Ok(p) => Some(p),
            Err(e) => {
                v.push(Violation::new(key, e));
                None
            }
        })
        .collect()
}

/// Parses `"mean/std"`; `"-"` means "not given".
fn parse_cell(cell: &str) -> Result<Option<LinkStats>, String> {
    let cell = cell.trim();
    if cell == "-" {
        return Ok(None);
    }
    let (m, s) = cell.split_once('/').ok_or_else(|| format!("expected `mean/std`, got `{cell}`"))?;
    let mean: f64 = m.trim().parse().map_err(|_| format!("bad mean in `{cell}`"))?;
    let std: f64 = s.trim().parse().map_err(|_| format!("bad std in `{cell}`"))?;
    if !mean.is_finite() || !std.is_finite() {
        return Err(format!("non-finite value in `{cell}`"));
    }
    if std < 0.0 {
        return Err(format!("standard deviation must be >= 0, got {std}"));
    }
    Ok(Some(LinkStats::new(mean, std)))
}

fn parse_matrix(v: &mut Vec<Violation>, posture: &str, rows: &[Vec<String>]) -> Option<LinkMatrix> {
    let key = format!("channel.postures.{posture}");
    if rows.len() != NODE_COUNT || rows.iter().any(|r| r.len() != NODE_COUNT) {
        v.push(Violation::new(key, format!("must be a {NODE_COUNT}x{NODE_COUNT} matrix")));
        return None;
    }
    let before = v.len();
    let mut m = LinkMatrix::from_upper(&[LinkStats::new(0.0, 0.0); 21]);
    for a in NodeSite::ALL {
        for b in NodeSite::ALL.into_iter().filter(|b| b.index() > a.index()) {
            let pair = format!("{key}[{a},{b}]");
            let upper = parse_cell(&rows[a.index()][b.index()]);
            let lower = parse_cell(&rows[b.index()][a.index()]);
            match (upper, lower) {
                (Err(e), _) | (_, Err(e)) => v.push(Violation::new(pair, e)),
                (Ok(None), _) => v.push(Violation::new(pair, "upper-triangle entry is required")),
                (Ok(Some(u)), Ok(Some(l))) if u != l => v.push(Violation::new(
                    pair,
                    format!(
                        "asymmetric link {a}-{b}: {}/{} vs {}/{}",
                        u.mean_attenuation_db, u.std_dev_db, l.mean_attenuation_db, l.std_dev_db
                    ),
                )),
                (Ok(Some(u)), _) => m.set(a, b, u),
            }
        }
    }
    (v.len() == before).then_some(m)
}

fn resolve_strategy(v: &mut Vec<Violation>, i: usize, raw: &RawStrategy) -> Option<NamedStrategy> {
    let key = |field: &str| format!("strategies[{i}].{field}");
    let mut kind = match raw.kind.parse::<StrategyKind>() {
        Ok(k) => k,
        Err(e) => {
            v.push(Violation::new(key("kind"), e));
            return None;
        }
    };
    let before = v.len();
    let mut unused = |field: &str, present: bool| {
        if present {
            v.push(Violation::new(key(field), format!("not a parameter of {}", raw.kind)));
        }
    };
    match &mut kind {
        StrategyKind::PrunedFlooding { k } => {
            if let Some(x) = raw.k {
                *k = usize::try_from(x).unwrap_or(0);
            }
        }
        _ => unused("k", raw.k.is_some()),
    }
    match &mut kind {
        StrategyKind::ProbabilisticConstant { p } => {
            if let Some(x) = raw.p {
                *p = x;
            }
        }
        _ => unused("p", raw.p.is_some()),
    }
    match &mut kind {
        StrategyKind::Ebp { hello_interval } => {
            if let Some(x) = raw.hello_interval_s {
                *hello_interval = if x.is_finite() && x > 0.0 { SimTime::from_secs_f64(x) } else { SimTime::ZERO };
            }
        }
        _ => unused("hello_interval_s", raw.hello_interval_s.is_some()),
    }
    match &mut kind {
        StrategyKind::Mbp { delta, timer, quota } => {
            if let Some(x) = raw.delta {
                *delta = u32::try_from(x).unwrap_or(0);
            }
            if let Some(x) = raw.timer_s {
                if !(x.is_finite() && x >= 0.0) {
                    v.push(Violation::new(key("timer_s"), format!("must be >= 0, got {x}")));
                } else {
                    *timer = SimTime::from_secs_f64(x);
                }
            }
            match raw.quota.clone() {
                None => {}
                Some(Quota::Count(q)) => *quota = u32::try_from(q).unwrap_or(0),
                Some(Quota::Word(w)) if w == "inf" => *quota = u32::MAX,
                Some(Quota::Word(w)) => v.push(Violation::new(key("quota"), format!("expected a count or \"inf\", got `{w}`"))),
            }
        }
        _ => {
            unused("delta", raw.delta.is_some());
            unused("timer_s", raw.timer_s.is_some());
            unused("quota", raw.quota.is_some());
        }
    }
    if let Err(e) = kind.validate() {
        let field = match kind {
            StrategyKind::PrunedFlooding { .. } => "k",
            StrategyKind::ProbabilisticConstant { .. } => "p",
            StrategyKind::Ebp { .. } => "hello_interval_s",
            _ => "delta",
        };
        v.push(Violation::new(key(field), e));
    }
    let label = raw.label.clone().unwrap_or_else(|| kind.label());
    (v.len() == before).then_some(NamedStrategy { label, kind })
}

impl RawScenario {
    fn resolve(self, v: &mut Vec<Violation>) -> Option<Scenario> {
        if self.id.trim().is_empty() {
            v.push(Violation::new("id", "must not be empty"));
        }

        let ch = &self.channel;
        let coherence = positive_secs(v, "channel.coherence_s", ch.coherence_s.unwrap_or(0.1));
        for name in ch.postures.keys() {
            if name.parse::<Posture>().is_err() {
                v.push(Violation::new(format!("channel.postures.{name}"), "unknown posture"));
            }
        }
        let matrices: Vec<Option<LinkMatrix>> = Posture::ALL
            .into_iter()
            .map(|p| match ch.postures.get(p.name()) {
                Some(rows) => parse_matrix(v, p.name(), rows),
                None => {
                    v.push(Violation::new(format!("channel.postures.{p}"), "missing posture matrix"));
                    None
                }
            })
            .collect();
        let channel = if matrices.iter().all(Option::is_some) {
            let m: Vec<LinkMatrix> = matrices.into_iter().flatten().collect();
            let arr: [LinkMatrix; 7] = m.try_into().expect("seven postures");
            ChannelConfig::new(
                arr,
                coherence,
                ch.tx_power_dbm.unwrap_or(crate::channel::DEFAULT_TX_POWER_DBM),
                ch.sensitivity_dbm.unwrap_or(crate::channel::DEFAULT_SENSITIVITY_DBM),
            )
            .map_err(|e| v.push(Violation::new("channel", e.to_string())))
            .ok()
        } else {
            None
        };

        let d = MacParams::default();
        let m = &self.mac;
        let mac = MacParams {
            min_be: m.min_be.unwrap_or(d.min_be),
            max_be: m.max_be.unwrap_or(d.max_be),
            max_csma_backoffs: m.max_csma_backoffs.unwrap_or(d.max_csma_backoffs),
            backoff_unit: m.backoff_unit_us.map_or(d.backoff_unit, SimTime::from_micros),
            data_rate_bps: m.data_rate_bps.unwrap_or(d.data_rate_bps),
            header_bits: m.header_bits.unwrap_or(d.header_bits),
            turnaround: m.turnaround_us.map_or(d.turnaround, SimTime::from_micros),
            queue_capacity: m.queue_capacity.unwrap_or(d.queue_capacity),
        };
        if let Err(e) = mac.validate() {
            // Messages lead with the offending field.
            let field = e.split(' ').next().unwrap_or_default();
            let key = match field {
                "backoff_unit" => "mac.backoff_unit_us".to_string(),
                f if f.chars().all(|c| c.is_ascii_lowercase() || c == '_') => format!("mac.{f}"),
                _ => "mac".to_string(),
            };
            v.push(Violation::new(key, e));
        }

        let r = &self.run;
        let seeds = r.seeds.unwrap_or(50);
        if seeds == 0 {
            v.push(Violation::new("run.seeds", "must be at least 1"));
        }
        let ttl = r.ttl.unwrap_or(8);
        if ttl == 0 {
            v.push(Violation::new("run.ttl", "must be at least 1"));
        }
        let postures = match &r.postures {
            Some(names) => parse_postures(v, "run.postures", names),
            None => vec![Posture::Walk],
        };
        let source_start = match r.source_start_s.unwrap_or(1.0) {
            s if s.is_finite() && s >= 0.0 => SimTime::from_secs_f64(s),
            s => {
                v.push(Violation::new("run.source_start_s", format!("must be >= 0, got {s}")));
                SimTime::ZERO
            }
        };
        let run = RunSettings {
            seeds,
            seed_base: r.seed_base.unwrap_or(1),
            ttl,
            postures,
            source_start,
            single_packet_cap: positive_secs(v, "run.single_packet_cap_s", r.single_packet_cap_s.unwrap_or(60.0)),
            rate_window: positive_secs(v, "run.rate_window_s", r.rate_window_s.unwrap_or(1.0)),
            rate_drain: positive_secs(v, "run.rate_drain_s", r.rate_drain_s.unwrap_or(10.0)),
        };
        if run.single_packet_cap <= run.source_start {
            v.push(Violation::new("run.single_packet_cap_s", "must be later than run.source_start_s"));
        }

        if self.strategies.is_empty() {
            v.push(Violation::new("strategies", "must declare at least one strategy"));
        }
        let strategies: Vec<NamedStrategy> = self
            .strategies
            .iter()
            .enumerate()
            .filter_map(|(i, s)| resolve_strategy(v, i, s))
            .collect();
        let mut seen = BTreeSet::new();
        for (i, s) in strategies.iter().enumerate() {
            if !seen.insert(s.label.as_str()) {
                v.push(Violation::new(format!("strategies[{i}].label"), format!("duplicate label `{}`", s.label)));
            }
        }

        let mut experiments = BTreeMap::new();
        for (name, raw) in &self.experiments {
            let key = |field: &str| format!("experiments.{name}.{field}");
            let id = match name.parse::<ExperimentId>() {
                Ok(id) => id,
                Err(e) => {
                    v.push(Violation::new(format!("experiments.{name}"), e));
                    continue;
                }
            };
            if raw.strategies.is_empty() {
                v.push(Violation::new(key("strategies"), "must not be empty"));
            }
            let chosen: Vec<NamedStrategy> = raw
                .strategies
                .iter()
                .filter_map(|label| {
                    let found = strategies.iter().find(|s| &s.label == label).cloned();
                    if found.is_none() && self.strategies.iter().all(|s| s.label.as_deref() != Some(label)) {
                        v.push(Violation::new(key("strategies"), format!("unknown strategy label `{label}`")));
                    }
                    found
                })
                .collect();
            let postures = match &raw.postures {
                Some(names) => parse_postures(v, &key("postures"), names),
                None => run.postures.clone(),
            };
            let ttls = raw.ttl.clone().unwrap_or_else(|| vec![run.ttl]);
            if ttls.is_empty() || ttls.contains(&0) {
                v.push(Violation::new(key("ttl"), "must be a non-empty list of values >= 1"));
            }
            let source = match raw.source.as_deref().unwrap_or(match id {
                ExperimentId::E4 | ExperimentId::E5 => "rate",
                _ => "single",
            }) {
                "single" => {
                    if raw.rates.is_some() {
                        v.push(Violation::new(key("rates"), "only valid with source = \"rate\""));
                    }
                    SweepSource::SinglePacket
                }
                "rate" => {
                    let rates = raw.rates.clone().unwrap_or_default();
                    if rates.is_empty() {
                        v.push(Violation::new(key("rates"), "must not be empty for a rate source"));
                    }
                    for r in &rates {
                        if !(r.is_finite() && *r > 0.0) {
                            v.push(Violation::new(key("rates"), format!("rate must be > 0, got {r}")));
                        }
                    }
                    SweepSource::Rate(rates)
                }
                other => {
                    v.push(Violation::new(key("source"), format!("expected \"single\" or \"rate\", got `{other}`")));
                    SweepSource::SinglePacket
                }
            };
            let queue_capacity = raw.queue_capacity.clone().unwrap_or_else(|| vec![mac.queue_capacity]);
            if queue_capacity.is_empty() || queue_capacity.contains(&0) {
                v.push(Violation::new(key("queue_capacity"), "must be a non-empty list of values >= 1"));
            }
            let mut mbp_timer = Vec::new();
            if let Some(timers) = &raw.mbp_timer_s {
                if timers.is_empty() {
                    v.push(Violation::new(key("mbp_timer_s"), "must not be empty"));
                }
                for &t in timers {
                    if !(t.is_finite() && t >= 0.0) {
                        v.push(Violation::new(key("mbp_timer_s"), format!("timer must be >= 0, got {t}")));
                    } else {
                        mbp_timer.push(SimTime::from_secs_f64(t));
                    }
                }
                if let Some(s) = chosen.iter().find(|s| !matches!(s.kind, StrategyKind::Mbp { .. })) {
                    v.push(Violation::new(
                        key("mbp_timer_s"),
                        format!("timer sweep needs MBP strategies only, `{}` is not", s.label),
                    ));
                }
            }
            let per_node = raw.per_node.unwrap_or(matches!(id, ExperimentId::E2 | ExperimentId::E3));
            experiments.insert(
                id,
                SweepSpec { id, strategies: chosen, postures, ttl: ttls, source, queue_capacity, mbp_timer, per_node },
            );
        }

        let channel = channel?;
        Some(Scenario { id: self.id, channel: Arc::new(channel), mac, run, strategies, experiments })
    }
}

/// Renders a channel as the `[channel]` TOML section of a scenario file.
pub fn channel_to_toml(cfg: &ChannelConfig) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "[channel]");
    let _ = writeln!(s, "tx_power_dbm = {:?}", cfg.tx_power_dbm);
    let _ = writeln!(s, "sensitivity_dbm = {:?}", cfg.sensitivity_dbm);
    let _ = writeln!(s, "coherence_s = {:?}", cfg.coherence_interval.as_secs_f64());
    let _ = writeln!(s, "\n[channel.postures]");
    let header: Vec<&str> = NodeSite::ALL.iter().map(|n| n.name()).collect();
    for p in Posture::ALL {
        let m = cfg.matrix(p);
        let _ = writeln!(s, "# {}", header.join(", "));
        let _ = writeln!(s, "{} = [", p.name());
        for a in NodeSite::ALL {
            let cells: Vec<String> = NodeSite::ALL
                .iter()
                .map(|&b| {
                    if b.index() <= a.index() {
                        format!("{:>10}", "\"-\"")
                    } else {
                        let l = m.get(a, b);
                        format!("{:>10}", format!("\"{}/{}\"", l.mean_attenuation_db, l.std_dev_db))
                    }
                })
                .collect();
            let _ = writeln!(s, "  [{}],", cells.join(","));
        }
        let _ = writeln!(s, "]");
    }
    s
}
