#![allow(dead_code)]

pub mod contracts;

use std::sync::Arc;

use wban_sim::channel::{ChannelConfig, ChannelState, Medium, NodeSite, Posture, RxOutcome, NODE_COUNT};
use wban_sim::frame::{BroadcastMessage, Frame, FrameBody, FrameId};
use wban_sim::mac::{CcaOutcome, EnqueueOutcome, Mac, MacParams};
use wban_sim::network::{Network, RunConfig};
use wban_sim::strategies::StrategyKind;
use wban_sim::sim::{RngStream, Scheduler, SimTime};

/// Hop depth of every node from the chest on an undirected edge list.
pub fn bfs_depth(edges: &[(NodeSite, NodeSite)]) -> [Option<u32>; NODE_COUNT] {
    let mut depth = [None; NODE_COUNT];
    depth[NodeSite::Chest.index()] = Some(0);
    let mut frontier = vec![NodeSite::Chest];
    let mut d = 0;
    while !frontier.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for &a in &frontier {
            for &(x, y) in edges {
                let other = if x == a {
                    y
                } else if y == a {
                    x
                } else {
                    continue;
                };
                if depth[other.index()].is_none() {
                    depth[other.index()] = Some(d);
                    next.push(other);
                }
            }
        }
        frontier = next;
    }
    depth
}

/// Every unordered node pair, in a fixed order.
pub fn all_pairs() -> Vec<(NodeSite, NodeSite)> {
    let mut out = Vec::new();
    for a in NodeSite::ALL {
        for b in NodeSite::ALL {
            if a.index() < b.index() {
                out.push((a, b));
            }
        }
    }
    out
}

/// Edge subset selected by the low 21 bits of `mask`.
pub fn graph_from_mask(mask: u32) -> Vec<(NodeSite, NodeSite)> {
    all_pairs().into_iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, p)| p).collect()
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Oracle for two nodes that hear each other and start CSMA at the same
/// instant: a collision happens iff the second CCA falls before the first
/// frame is on the air, that is iff the initial backoffs differ by less than
/// the turnaround. Returns the collision probability over all draw pairs.
pub fn enumerated_collision_probability(p: &MacParams) -> f64 {
    let window = 1u64 << p.min_be;
    let unit = p.backoff_unit.as_micros();
    let turnaround = p.turnaround.as_micros();
    let mut hits = 0;
    for a in 0..window {
        for b in 0..window {
            if a.abs_diff(b) * unit < turnaround {
                hits += 1;
            }
        }
    }
    hits as f64 / (window * window) as f64
}

#[derive(Clone, Copy, Debug)]
enum Ev {
    Cca(usize),
    TxStart(usize),
    TxEnd(usize, wban_sim::channel::TxId),
}

/// Two-node CSMA fixture: head and upper arm hear each other perfectly and
/// each gets one frame at time zero. Runs the library MAC and medium until
/// both frames are resolved and reports whether the two frames collided.
pub fn two_node_trial(p: &MacParams, seed: u64) -> bool {
    use wban_sim::channel::{LinkMatrix, LinkStats};
    use wban_sim::sim::{Purpose, StreamId};
    let mut m = LinkMatrix::from_upper(&[LinkStats::new(80.0, 0.0); 21]);
    m.set(NodeSite::Head, NodeSite::UpperArm, LinkStats::new(20.0, 0.0));
    let cfg = Arc::new(ChannelConfig::uniform(m).unwrap());
    let mut ch = ChannelState::new(cfg, Posture::Walk, seed);
    let nodes = [NodeSite::Head, NodeSite::UpperArm];
    let mut macs = [Mac::new(p.clone()), Mac::new(p.clone())];
    let mut rngs = [
        RngStream::new(seed, StreamId::new(Purpose::Test, 0)),
        RngStream::new(seed, StreamId::new(Purpose::Test, 1)),
    ];
    let mut sched: Scheduler<Ev> = Scheduler::new();
    let mut medium = Medium::new();
    for i in 0..2 {
        let frame = Frame { id: FrameId(i as u64), src: nodes[i], body: FrameBody::Data(BroadcastMessage::new(nodes[i], 0, 1)) };
        match macs[i].enqueue(frame, &mut rngs[i]) {
            EnqueueOutcome::Accepted { backoff: Some(b) } => {
                sched.schedule_in(b, Ev::Cca(i));
            }
            other => panic!("unexpected enqueue outcome {other:?}"),
        }
    }
    let mut collided = false;
    while let Some((now, _, ev)) = sched.pop() {
        match ev {
            Ev::Cca(i) => {
                let busy = medium.carrier_busy(nodes[i], now, &mut ch);
                match macs[i].on_backoff_expired(busy, &mut rngs[i]) {
                    CcaOutcome::Transmit { turnaround } => {
                        sched.schedule_in(turnaround, Ev::TxStart(i));
                    }
                    CcaOutcome::Retry { backoff } => {
                        sched.schedule_in(backoff, Ev::Cca(i));
                    }
                    CcaOutcome::AccessFailure { next, .. } => assert!(next.is_none()),
                }
            }
            Ev::TxStart(i) => {
                let (_, airtime) = macs[i].on_tx_start();
                let id = medium.begin(nodes[i], now, now + airtime, &mut ch);
                sched.schedule_in(airtime, Ev::TxEnd(i, id));
            }
            Ev::TxEnd(i, id) => {
                for (_, outcome) in medium.end(id, &mut ch) {
                    if outcome == RxOutcome::Collision {
                        collided = true;
                    }
                }
                assert!(macs[i].on_tx_complete(&mut rngs[i]).is_none());
            }
        }
    }
    collided
}

pub fn secs(x: f64) -> SimTime {
    SimTime::from_secs_f64(x)
}

/// True if some node missed a copy to a collision before it had heard the
/// message at all. Collisions at nodes already holding it change nothing.
pub fn lost_before_first_rx(trace: &str) -> bool {
    let mut reached = vec!["chest".to_string()];
    for line in trace.lines() {
        let mut f = line.split_whitespace();
        let (Some(_), Some(node), Some(kind)) = (f.next(), f.next(), f.next()) else { continue };
        match kind {
            "first_rx" => reached.push(node.to_string()),
            "tx_end" => {
                for r in f.filter_map(|x| x.strip_suffix(":collision")) {
                    if !reached.iter().any(|n| n == r) {
                        return true;
                    }
                }
            }
            _ => {}
        }
    }
    false
}

/// Compares one run with the BFS oracle. Returns whether the run was loss
/// free, in which case the reached set must equal the BFS set exactly; with
/// collisions or MAC drops it must still be a subset.
pub fn check_against_bfs(edges: &[(NodeSite, NodeSite)], seed: u64) -> Result<bool, String> {
    let depth = bfs_depth(edges);
    let ecc = depth.iter().flatten().copied().max().unwrap_or(0);
    let mut cfg = RunConfig::new(Arc::new(ChannelConfig::static_graph(edges)), StrategyKind::Flooding);
    cfg.ttl = ecc + 1;
    let out = Network::new(cfg, seed).with_trace().run();
    let lossless = !lost_before_first_rx(out.trace.as_deref().unwrap()) && out.mac.iter().all(|m| m.dropped_csma == 0);
    let sum = out.record.summary();
    for n in NodeSite::ALL.into_iter().filter(|&n| n != NodeSite::Chest) {
        let reached = sum.node_delay_s[n.index()].is_some();
        let bfs = depth[n.index()].is_some();
        if reached && !bfs || lossless && reached != bfs {
            return Err(format!("{n}: reached={reached} but bfs depth {:?}", depth[n.index()]));
        }
    }
    // The earliest first reception at each depth comes strictly after the
    // earliest at the depth above. Holds with or without losses.
    let t = |n: NodeSite| if n == NodeSite::Chest { Some(0.0) } else { sum.node_delay_s[n.index()] };
    let level_min = |d: u32| {
        NodeSite::ALL.into_iter().filter(|n| depth[n.index()] == Some(d)).filter_map(t).fold(f64::INFINITY, f64::min)
    };
    let mut prev = 0.0;
    for d in 1..=ecc {
        let m = level_min(d);
        if m.is_finite() {
            if m <= prev {
                return Err(format!("depth {d} first reached at {m}, not after {prev}"));
            }
            prev = m;
        }
    }
    Ok(lossless)
}
