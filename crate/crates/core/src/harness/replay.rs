//! Single-run event traces.

use std::fmt::Write as _;

use super::scenario::{NamedStrategy, Scenario};
use crate::channel::Posture;
use crate::network::{Network, RunConfig, SourceMode};

#[derive(Clone, Debug, Default)]
pub struct ReplayRequest {
    /// Strategy label; defaults to the scenario's first strategy.
    pub strategy: Option<String>,
    pub posture: Option<Posture>,
    pub ttl: Option<u32>,
}

/// Renders the full trace of one single-packet run: a few `#` header lines,
/// then one line per event.
pub fn replay(scenario: &Scenario, seed: u64, req: &ReplayRequest) -> Result<String, String> {
    let strategy: &NamedStrategy = match &req.strategy {
        Some(label) => scenario.strategy(label).ok_or_else(|| {
            let known: Vec<&str> = scenario.strategies.iter().map(|s| s.label.as_str()).collect();
            format!("unknown strategy label `{label}`; scenario has {}", known.join(", "))
        })?,
        None => &scenario.strategies[0],
    };
    let posture = req.posture.unwrap_or(scenario.run.postures[0]);
    let ttl = req.ttl.unwrap_or(scenario.run.ttl);
    if ttl == 0 {
        return Err("ttl must be at least 1".into());
    }
    let cfg = RunConfig {
        channel: scenario.channel.clone(),
        posture,
        strategy: strategy.kind,
        ttl,
        mac: scenario.mac.clone(),
        source: SourceMode::SinglePacket,
        source_start: scenario.run.source_start,
        time_cap: scenario.run.single_packet_cap,
    };
    let out = Network::new(cfg, seed).with_trace().run();
    let mut text = String::new();
    let _ = writeln!(text, "# scenario {} seed {seed}", scenario.id);
    let _ = writeln!(text, "# strategy {} posture {posture} ttl {ttl}", strategy.label);
    text.push_str(out.trace.as_deref().unwrap_or_default());
    let _ = writeln!(
        text,
        "# end {} events {} quiesced {} coverage_pct {:.6}",
        out.end_time,
        out.events,
        out.quiesced,
        out.record.coverage_pct()
    );
    Ok(text)
}
