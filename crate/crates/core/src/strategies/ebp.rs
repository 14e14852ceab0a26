//! Efficient Broadcast Protocol, adapted to a body network.
//!
//! A node forwards a message once, when at least `K` neighbours are fresh
//! (heard within two hello intervals) and at least one fresh neighbour is not
//! known to hold the message. Until then the message is held and the
//! condition is re-evaluated on every hello or data reception. Hellos list
//! the messages their sender holds, which is how coverage knowledge spreads.

use std::collections::{BTreeMap, BTreeSet};

use super::{Action, BroadcastStrategy, NodeCtx};
use crate::channel::{NodeSet, NodeSite, NODE_COUNT};
use crate::frame::{BroadcastMessage, Frame, FrameBody, MessageId};
use crate::sim::SimTime;

/// Hellos advertise at most this many recent messages.
const HELLO_HAVE_LIMIT: usize = 16;

/// Neighbour-count threshold by body site.
pub fn ebp_k_threshold(site: NodeSite) -> usize {
    match site {
        NodeSite::Chest => 3,
        NodeSite::Head | NodeSite::Ankle | NodeSite::Wrist => 1,
        NodeSite::UpperArm | NodeSite::Navel | NodeSite::Thigh => 2,
    }
}

#[derive(Debug)]
pub struct Ebp {
    k_threshold: usize,
    interval: SimTime,
    last_heard: [Option<SimTime>; NODE_COUNT],
    known_covered: BTreeMap<MessageId, NodeSet>,
    /// Ready-to-send copies waiting for the forwarding condition.
    held: BTreeMap<MessageId, BroadcastMessage>,
    have: BTreeSet<MessageId>,
    forwarded: BTreeSet<MessageId>,
}

impl Ebp {
    pub fn new(node: NodeSite, interval: SimTime) -> Self {
        Ebp {
            k_threshold: ebp_k_threshold(node),
            interval,
            last_heard: [None; NODE_COUNT],
            known_covered: BTreeMap::new(),
            held: BTreeMap::new(),
            have: BTreeSet::new(),
            forwarded: BTreeSet::new(),
        }
    }

    pub fn k_threshold(&self) -> usize {
        self.k_threshold
    }

    pub fn is_holding(&self, id: MessageId) -> bool {
        self.held.contains_key(&id)
    }

    pub fn fresh_neighbors(&self, now: SimTime) -> NodeSet {
        let window = SimTime::from_micros(2 * self.interval.as_micros());
        let horizon = now.saturating_sub(window);
        NodeSite::ALL
            .into_iter()
            .filter(|n| matches!(self.last_heard[n.index()], Some(t) if t >= horizon))
            .collect()
    }

    fn heard(&mut self, from: NodeSite, now: SimTime) {
        self.last_heard[from.index()] = Some(now);
    }

    fn mark_covered(&mut self, id: MessageId, n: NodeSite) {
        self.known_covered.entry(id).or_default().insert(n);
    }

    fn hold(&mut self, copy: BroadcastMessage) {
        let id = copy.id();
        if self.forwarded.contains(&id) {
            return;
        }
        match self.held.get(&id) {
            Some(existing) if existing.ttl >= copy.ttl => {}
            _ => {
                self.held.insert(id, copy);
            }
        }
    }

    fn evaluate(&mut self, me: NodeSite, now: SimTime) -> Vec<Action> {
        let fresh = self.fresh_neighbors(now);
        if fresh.len() < self.k_threshold {
            return vec![];
        }
        let ready: Vec<MessageId> = self
            .held
            .keys()
            .copied()
            .filter(|id| {
                let covered = self.known_covered.get(id).copied().unwrap_or_default().with(me);
                !covered.is_superset(fresh)
            })
            .collect();
        ready
            .into_iter()
            .map(|id| {
                let copy = self.held.remove(&id).expect("listed above");
                self.forwarded.insert(id);
                Action::Send(FrameBody::Data(copy))
            })
            .collect()
    }
}

impl BroadcastStrategy for Ebp {
    fn start(&mut self, ctx: &mut NodeCtx<'_>) -> Vec<Action> {
        let jitter = ctx.rng.uniform_int(self.interval.as_micros()).expect("interval is positive");
        vec![Action::ScheduleHello { delay: SimTime::from_micros(jitter) }]
    }

    fn originate(&mut self, ctx: &mut NodeCtx<'_>, msg: BroadcastMessage) -> Vec<Action> {
        let id = msg.id();
        self.have.insert(id);
        self.mark_covered(id, ctx.node);
        self.hold(msg.originated());
        self.evaluate(ctx.node, ctx.now)
    }

    fn on_receive(&mut self, ctx: &mut NodeCtx<'_>, frame: &Frame) -> Vec<Action> {
        self.heard(frame.src, ctx.now);
        match &frame.body {
            FrameBody::Hello { have } => {
                for &id in have {
                    self.mark_covered(id, frame.src);
                }
            }
            FrameBody::Data(msg) => {
                let id = msg.id();
                self.mark_covered(id, frame.src);
                self.mark_covered(id, ctx.node);
                self.have.insert(id);
                if msg.ttl > 1 {
                    self.hold(msg.forwarded());
                }
            }
            FrameBody::Ack { .. } => {}
        }
        self.evaluate(ctx.node, ctx.now)
    }

    fn on_hello_due(&mut self, _ctx: &mut NodeCtx<'_>) -> Vec<Action> {
        let have: Vec<MessageId> = self.have.iter().rev().take(HELLO_HAVE_LIMIT).rev().copied().collect();
        vec![
            Action::Send(FrameBody::Hello { have }),
            Action::ScheduleHello { delay: self.interval },
        ]
    }

    fn has_pending_work(&self) -> bool {
        !self.held.is_empty()
    }
}
