//! Per-strategy contract checks shared by the property suite and the
//! acceptance run. Each returns `Err` with a description on a violation.

use std::collections::HashMap;
use std::sync::Arc;

use wban_sim::channel::defaults::synthetic_default;
use wban_sim::channel::{NodeSet, NodeSite};
use wban_sim::frame::{BroadcastMessage, Frame, FrameBody, FrameId, MessageId};
use wban_sim::network::{Network, RunConfig, SourceMode};
use wban_sim::sim::{Purpose, RngStream, SimTime, StreamId};
use wban_sim::strategies::{
    Action, BroadcastStrategy, Ebp, Mbp, NodeCtx, OptFlood, ProbabilisticFlooding, StrategyKind, TabuFlooding, CPT_MAX,
};

pub fn rng(i: u64) -> RngStream {
    RngStream::new(i, StreamId::new(Purpose::Test, 0))
}

pub fn data(src: NodeSite, msg: BroadcastMessage) -> Frame {
    Frame { id: FrameId(0), src, body: FrameBody::Data(msg) }
}

pub fn sent(actions: &[Action]) -> Vec<BroadcastMessage> {
    actions.iter().filter_map(|a| a.as_data().cloned()).collect()
}

pub fn site(i: usize) -> NodeSite {
    NodeSite::ALL[i % 7]
}

pub fn set(bits: u8) -> NodeSet {
    NodeSite::ALL.into_iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).map(|(_, n)| n).collect()
}

/// Data transmissions per (node, message) in a traced run.
pub fn data_tx_per_node(kind: StrategyKind, seed: u64, rate: Option<f64>) -> HashMap<(String, String), u32> {
    let mut cfg = RunConfig::new(Arc::new(synthetic_default()), kind);
    if let Some(r) = rate {
        cfg.source = SourceMode::Rate { packets_per_s: r, window: SimTime::from_secs_f64(1.0) };
        cfg.time_cap = SimTime::from_secs_f64(5.0);
    }
    let out = Network::new(cfg, seed).with_trace().run();
    let mut counts = HashMap::new();
    for line in out.trace.unwrap().lines() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() > 4 && f[2] == "tx_start" && f[3].starts_with("data#") {
            let msg = f[4].strip_prefix("msg=").unwrap().to_string();
            *counts.entry((f[1].to_string(), msg)).or_default() += 1;
        }
    }
    counts
}

/// Plain Flooding sends each message at most once per node. Returns the
/// number of (node, message) transmissions checked.
pub fn plain_flooding_once(seed: u64, rate: Option<f64>) -> Result<usize, String> {
    let counts = data_tx_per_node(StrategyKind::PlainFlooding, seed, rate);
    match counts.iter().find(|(_, &c)| c > 1) {
        Some(((node, msg), c)) => Err(format!("seed {seed}: {node} sent {msg} {c} times")),
        None => Ok(counts.len()),
    }
}

/// Feeds OptFlood a sequence of `(sender, contributor bits, ttl)` copies.
pub fn optflood_sequence(me: NodeSite, copies: &[(usize, u8, u32)]) -> Result<(), String> {
    let mut s = OptFlood::default();
    let mut r = rng(1);
    let id = MessageId { origin: NodeSite::Chest, seq: 0 };
    let mut prev = 0;
    for &(src, bits, ttl) in copies {
        let mut msg = BroadcastMessage::new(NodeSite::Chest, 0, ttl);
        msg.contributors = set(bits).with(site(src));
        let mut ctx = NodeCtx { node: me, now: SimTime::ZERO, rng: &mut r };
        let out = s.on_receive(&mut ctx, &data(site(src), msg));
        for m in sent(&out) {
            if m.contributors.len() >= CPT_MAX {
                return Err(format!("{me} sent a copy with all {CPT_MAX} contributors"));
            }
            if !m.contributors.contains(me) {
                return Err(format!("{me} forwarded without adding itself"));
            }
        }
        let local = s.cpt_local(id).unwrap_or(0);
        if local < prev {
            return Err(format!("{me}: cpt_local fell from {prev} to {local}"));
        }
        prev = local;
    }
    Ok(())
}

/// One Tabu reception: the forwarded covered set contains the received one
/// plus the receiver, and copies go only to uncovered nodes.
pub fn tabu_step(me: NodeSite, src: NodeSite, bits: u8, ttl: u32) -> Result<(), String> {
    let mut r = rng(2);
    let mut msg = BroadcastMessage::new(NodeSite::Chest, 0, ttl);
    msg.covered = set(bits).with(src);
    msg.dest = Some(msg.covered.complement());
    let mut ctx = NodeCtx { node: me, now: SimTime::ZERO, rng: &mut r };
    let out = sent(&TabuFlooding.on_receive(&mut ctx, &data(src, msg.clone())));
    if !msg.is_addressed_to(me) && !out.is_empty() {
        return Err(format!("{me} relayed a copy addressed elsewhere"));
    }
    for m in out {
        if !m.covered.is_superset(msg.covered.with(me)) {
            return Err(format!("{me}: covered set shrank"));
        }
        if m.dest != Some(m.covered.complement()) || m.covered.is_full() {
            return Err(format!("{me}: bad destination set"));
        }
    }
    Ok(())
}

/// One MBP reception: below delta the copy goes out at once with no timer.
pub fn mbp_step(delta: u32, hops: u32, ttl: u32, timer: SimTime) -> Result<(), String> {
    let mut s = Mbp::new(delta, timer, 1);
    let mut r = rng(3);
    let msg = BroadcastMessage { hops, ..BroadcastMessage::new(NodeSite::Chest, 0, ttl) };
    let mut ctx = NodeCtx { node: NodeSite::Head, now: SimTime::ZERO, rng: &mut r };
    let out = s.on_receive(&mut ctx, &data(NodeSite::Chest, msg));
    let waits = out.iter().any(|a| matches!(a, Action::StartTimer { .. }));
    let sends = sent(&out).len();
    let ok = if hops < delta { sends == 1 && !waits && s.pending_timers() == 0 } else { sends == 0 && waits };
    if ok {
        Ok(())
    } else {
        Err(format!("delta {delta} hops {hops}: {sends} sends, timer {waits}"))
    }
}

/// MBP in a full run: every hops = 1 first reception (delta = 2) is followed
/// by an enqueue at the same instant. Returns the number checked.
pub fn mbp_immediate_in_run(seed: u64) -> Result<usize, String> {
    let kind = StrategyKind::Mbp { delta: 2, timer: SimTime::from_millis(100), quota: 1 };
    let out = Network::new(RunConfig::new(Arc::new(synthetic_default()), kind), seed).with_trace().run();
    let trace = out.trace.unwrap();
    let lines: Vec<Vec<&str>> = trace.lines().map(|l| l.split_whitespace().collect()).collect();
    let mut checked = 0;
    for (i, f) in lines.iter().enumerate() {
        if f.len() > 4 && f[2] == "first_rx" && f[4] == "hops=1" {
            let forwarded = lines[i + 1..]
                .iter()
                .take_while(|g| g[0] == f[0])
                .any(|g| g[1] == f[1] && g[2] == "enqueue" && g.iter().any(|x| *x == "hops=2"));
            if !forwarded {
                return Err(format!("seed {seed}: {} waited before forwarding", f[1]));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// The n-th copy at a relay is forwarded with P = 2^-(n-1), decided by the
/// next uniform draw on the node's stream.
pub fn probabilistic_decreasing(seed: u64) -> Result<(), String> {
    let mut s = ProbabilisticFlooding::decreasing();
    let mut r = rng(seed);
    let id = MessageId { origin: NodeSite::Chest, seq: 0 };
    for n in 1..=8u32 {
        let p = s.retransmit_probability(id);
        if p != 0.5f64.powi(n as i32 - 1) {
            return Err(format!("reception {n}: P = {p}"));
        }
        let expected = r.clone().uniform01() < p;
        let mut ctx = NodeCtx { node: NodeSite::Wrist, now: SimTime::ZERO, rng: &mut r };
        let out = s.on_receive(&mut ctx, &data(NodeSite::Chest, BroadcastMessage::new(NodeSite::Chest, 0, 8)));
        if (sent(&out).len() == 1) != expected {
            return Err(format!("seed {seed} reception {n}: decision does not match the draw"));
        }
    }
    // At the sink the origination uses up the first opportunity.
    let mut s = ProbabilisticFlooding::decreasing();
    let mut ctx = NodeCtx { node: NodeSite::Chest, now: SimTime::ZERO, rng: &mut r };
    s.originate(&mut ctx, BroadcastMessage::new(NodeSite::Chest, 0, 8));
    if s.retransmit_probability(id) != 0.5 {
        return Err("origination not counted".into());
    }
    Ok(())
}

fn hello_from(s: &mut Ebp, from: NodeSite, now: SimTime, r: &mut RngStream) -> Vec<Action> {
    let mut ctx = NodeCtx { node: NodeSite::Chest, now, rng: r };
    s.on_receive(&mut ctx, &Frame { id: FrameId(0), src: from, body: FrameBody::Hello { have: vec![] } })
}

/// The chest holds a message while fewer than three neighbours are fresh and
/// releases it when the third one is heard. Stale neighbours do not count.
pub fn ebp_chest_holds() -> Result<(), String> {
    let interval = SimTime::from_millis(250);
    let mut r = rng(5);
    let now = SimTime::from_secs_f64(2.0);
    let three = [NodeSite::Head, NodeSite::UpperArm, NodeSite::Navel];
    for fresh in 0..=2 {
        let mut s = Ebp::new(NodeSite::Chest, interval);
        if s.k_threshold() != 3 {
            return Err(format!("chest K = {}", s.k_threshold()));
        }
        // Stale entries from long ago.
        for n in three {
            hello_from(&mut s, n, SimTime::from_secs_f64(1.0), &mut r);
        }
        for n in three.into_iter().take(fresh) {
            hello_from(&mut s, n, now, &mut r);
        }
        let msg = BroadcastMessage::new(NodeSite::Chest, 0, 8);
        let mut ctx = NodeCtx { node: NodeSite::Chest, now, rng: &mut r };
        if !sent(&s.originate(&mut ctx, msg.clone())).is_empty() || !s.is_holding(msg.id()) {
            return Err(format!("chest sent with {fresh} fresh neighbours"));
        }
        if fresh == 2 {
            let out = hello_from(&mut s, NodeSite::Wrist, now, &mut r);
            if sent(&out).len() != 1 || s.is_holding(msg.id()) {
                return Err("third fresh neighbour did not release the message".into());
            }
        }
    }
    Ok(())
}
