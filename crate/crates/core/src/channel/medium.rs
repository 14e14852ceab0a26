use super::{ChannelState, NodeSet, NodeSite};
use crate::sim::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TxId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RxOutcome {
    Received,
    /// Another audible frame overlapped at this receiver, or the receiver was
    /// itself transmitting. No capture: every overlapping frame is lost.
    Collision,
    OutOfRange,
}

#[derive(Clone, Debug)]
struct InFlight {
    id: TxId,
    src: NodeSite,
    start: SimTime,
    end: SimTime,
    corrupted: NodeSet,
}

/// Frames currently on the air.
#[derive(Clone, Debug, Default)]
pub struct Medium {
    active: Vec<InFlight>,
    next_id: u64,
}

impl Medium {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn in_flight(&self) -> usize {
        self.active.len()
    }

    pub fn is_transmitting(&self, node: NodeSite) -> bool {
        self.active.iter().any(|t| t.src == node)
    }

    /// CCA: true iff some in-flight frame from another node is audible here.
    pub fn carrier_busy(&self, node: NodeSite, now: SimTime, ch: &mut ChannelState) -> bool {
        self.active
            .iter()
            .any(|t| t.src != node && ch.audible(t.src, node, now))
    }

    /// Puts a frame on the air over `[now, end]` and marks every receiver
    /// where it overlaps another audible frame.
    pub fn begin(&mut self, src: NodeSite, now: SimTime, end: SimTime, ch: &mut ChannelState) -> TxId {
        debug_assert!(!self.is_transmitting(src), "half-duplex violated at {src}");
        let id = TxId(self.next_id);
        self.next_id += 1;
        let mut mine = NodeSet::EMPTY;
        for t in &mut self.active {
            // Half-duplex: the new sender stops hearing what it was receiving,
            // and an active sender cannot hear the new frame.
            t.corrupted.insert(src);
            mine.insert(t.src);
            for r in NodeSite::ALL {
                if r == src || r == t.src {
                    continue;
                }
                if ch.audible(src, r, now) && ch.audible(t.src, r, now) {
                    t.corrupted.insert(r);
                    mine.insert(r);
                }
            }
        }
        self.active.push(InFlight { id, src, start: now, end, corrupted: mine });
        id
    }

    /// Takes the frame off the air and reports the outcome at every other node.
    pub fn end(&mut self, id: TxId, ch: &mut ChannelState) -> Vec<(NodeSite, RxOutcome)> {
        let pos = self
            .active
            .iter()
            .position(|t| t.id == id)
            .expect("ending a transmission that is not on the air");
        let t = self.active.swap_remove(pos);
        t.src
            .others()
            .map(|r| {
                let outcome = if !ch.audible_throughout(t.src, r, t.start, t.end) {
                    RxOutcome::OutOfRange
                } else if t.corrupted.contains(r) {
                    RxOutcome::Collision
                } else {
                    RxOutcome::Received
                };
                (r, outcome)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelConfig, LinkMatrix, LinkStats, Posture};
    use std::sync::Arc;

    fn full_mesh() -> ChannelState {
        let m = LinkMatrix::from_upper(&[LinkStats::new(30.0, 0.0); 21]);
        ChannelState::new(Arc::new(ChannelConfig::uniform(m).unwrap()), Posture::Walk, 0)
    }

    fn us(x: u64) -> SimTime {
        SimTime::from_micros(x)
    }

    #[test]
    fn single_transmission_reaches_all_others() {
        let mut ch = full_mesh();
        let mut m = Medium::new();
        let id = m.begin(NodeSite::Chest, us(0), us(1000), &mut ch);
        let out = m.end(id, &mut ch);
        assert_eq!(out.len(), 6);
        assert!(out.iter().all(|(_, o)| *o == RxOutcome::Received));
    }

    #[test]
    fn overlapping_audible_frames_are_both_lost() {
        let mut ch = full_mesh();
        let mut m = Medium::new();
        let a = m.begin(NodeSite::Head, us(0), us(1000), &mut ch);
        let b = m.begin(NodeSite::Ankle, us(500), us(1500), &mut ch);
        let oa = m.end(a, &mut ch);
        let ob = m.end(b, &mut ch);
        for (r, o) in oa.iter().chain(ob.iter()) {
            assert_eq!(*o, RxOutcome::Collision, "at {r}");
        }
    }

    #[test]
    fn no_carrier_without_traffic_and_busy_during_neighbor_tx() {
        let mut ch = full_mesh();
        let mut m = Medium::new();
        assert!(!m.carrier_busy(NodeSite::Navel, us(0), &mut ch));
        let id = m.begin(NodeSite::Chest, us(0), us(1000), &mut ch);
        assert!(m.carrier_busy(NodeSite::Navel, us(10), &mut ch));
        assert!(!m.carrier_busy(NodeSite::Chest, us(10), &mut ch));
        m.end(id, &mut ch);
        assert!(!m.carrier_busy(NodeSite::Navel, us(1000), &mut ch));
    }

    #[test]
    fn distant_transmitter_is_not_sensed() {
        let cfg = ChannelConfig::static_graph(&[(NodeSite::Chest, NodeSite::Navel)]);
        let mut ch = ChannelState::new(Arc::new(cfg), Posture::Walk, 0);
        let mut m = Medium::new();
        m.begin(NodeSite::Ankle, us(0), us(1000), &mut ch);
        assert!(!m.carrier_busy(NodeSite::Chest, us(5), &mut ch));
    }

    #[test]
    fn exactly_the_audible_receivers_get_the_frame() {
        // Chest reaches head, navel and upper arm only.
        let edges = [
            (NodeSite::Chest, NodeSite::Head),
            (NodeSite::Chest, NodeSite::Navel),
            (NodeSite::Chest, NodeSite::UpperArm),
            (NodeSite::Thigh, NodeSite::Ankle),
        ];
        let cfg = Arc::new(ChannelConfig::static_graph(&edges));
        let mut ch = ChannelState::new(cfg.clone(), Posture::Walk, 0);
        let mut m = Medium::new();
        let id = m.begin(NodeSite::Chest, us(0), us(800), &mut ch);
        let got: NodeSet = m
            .end(id, &mut ch)
            .into_iter()
            .filter(|(_, o)| *o == RxOutcome::Received)
            .map(|(r, _)| r)
            .collect();
        // Brute force over the margin table.
        let expect: NodeSet = NodeSite::Chest
            .others()
            .filter(|&r| {
                let s = cfg.link(Posture::Walk, NodeSite::Chest, r);
                super::super::link_margin(cfg.tx_power_dbm, s.mean_attenuation_db, cfg.sensitivity_dbm) >= 0.0
            })
            .collect();
        assert_eq!(got, expect);
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn hidden_terminal_collides_only_at_shared_receiver() {
        // head - chest - ankle line; head and ankle cannot hear each other.
        let cfg = ChannelConfig::static_graph(&[
            (NodeSite::Head, NodeSite::Chest),
            (NodeSite::Chest, NodeSite::Ankle),
            (NodeSite::Head, NodeSite::Wrist),
        ]);
        let mut ch = ChannelState::new(Arc::new(cfg), Posture::Walk, 0);
        let mut m = Medium::new();
        let a = m.begin(NodeSite::Head, us(0), us(1000), &mut ch);
        let b = m.begin(NodeSite::Ankle, us(100), us(1100), &mut ch);
        let oa = m.end(a, &mut ch);
        m.end(b, &mut ch);
        let at = |r| oa.iter().find(|(n, _)| *n == r).unwrap().1;
        assert_eq!(at(NodeSite::Chest), RxOutcome::Collision);
        assert_eq!(at(NodeSite::Wrist), RxOutcome::Received);
    }

    #[test]
    fn transmitting_node_misses_incoming_frame() {
        let mut ch = full_mesh();
        let mut m = Medium::new();
        let a = m.begin(NodeSite::Head, us(0), us(1000), &mut ch);
        let b = m.begin(NodeSite::Wrist, us(900), us(1900), &mut ch);
        let oa = m.end(a, &mut ch);
        let ob = m.end(b, &mut ch);
        assert_eq!(oa.iter().find(|(n, _)| *n == NodeSite::Wrist).unwrap().1, RxOutcome::Collision);
        assert_eq!(ob.iter().find(|(n, _)| *n == NodeSite::Head).unwrap().1, RxOutcome::Collision);
    }
}
