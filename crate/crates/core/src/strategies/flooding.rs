use std::collections::{HashMap, HashSet};

use super::{forward_if_alive, Action, BroadcastStrategy, NodeCtx};
use crate::channel::{NodeSet, NodeSite};
use crate::frame::{BroadcastMessage, Frame, FrameBody, MessageId};

fn data_for_me<'a>(frame: &'a Frame, me: NodeSite) -> Option<&'a BroadcastMessage> {
    match &frame.body {
        FrameBody::Data(m) if m.is_addressed_to(me) => Some(m),
        _ => None,
    }
}

fn broadcast(msg: BroadcastMessage) -> Vec<Action> {
    vec![Action::Send(FrameBody::Data(msg))]
}

/// Rebroadcast every received copy while its TTL is above 1.
#[derive(Debug, Default)]
pub struct Flooding;

impl BroadcastStrategy for Flooding {
    fn originate(&mut self, _ctx: &mut NodeCtx<'_>, msg: BroadcastMessage) -> Vec<Action> {
        broadcast(msg.originated())
    }

    fn on_receive(&mut self, ctx: &mut NodeCtx<'_>, frame: &Frame) -> Vec<Action> {
        data_for_me(frame, ctx.node)
            .and_then(forward_if_alive)
            .into_iter()
            .collect()
    }
}

/// Rebroadcast only the first copy of each message.
#[derive(Debug, Default)]
pub struct PlainFlooding {
    seen: HashSet<MessageId>,
}

impl BroadcastStrategy for PlainFlooding {
    fn originate(&mut self, _ctx: &mut NodeCtx<'_>, msg: BroadcastMessage) -> Vec<Action> {
        self.seen.insert(msg.id());
        broadcast(msg.originated())
    }

    fn on_receive(&mut self, ctx: &mut NodeCtx<'_>, frame: &Frame) -> Vec<Action> {
        let Some(msg) = data_for_me(frame, ctx.node) else { return vec![] };
        if !self.seen.insert(msg.id()) {
            return vec![];
        }
        forward_if_alive(msg).into_iter().collect()
    }
}

/// Every addressed copy is duplicated to `k` nodes chosen uniformly among the
/// other six; copies addressed elsewhere are ignored.
#[derive(Debug)]
pub struct PrunedFlooding {
    k: usize,
}

impl PrunedFlooding {
    pub fn new(k: usize) -> Self {
        assert!((1..=6).contains(&k), "K must be in 1..=6");
        PrunedFlooding { k }
    }

    fn fan_out(&self, ctx: &mut NodeCtx<'_>, copy: BroadcastMessage) -> Vec<Action> {
        let others: Vec<NodeSite> = ctx.node.others().collect();
        let picks = ctx.rng.choose_distinct(others.len(), self.k).expect("k <= 6");
        picks
            .into_iter()
            .map(|i| {
                let addressed = BroadcastMessage { dest: Some(NodeSet::single(others[i])), ..copy.clone() };
                Action::Send(FrameBody::Data(addressed))
            })
            .collect()
    }
}

impl BroadcastStrategy for PrunedFlooding {
    fn originate(&mut self, ctx: &mut NodeCtx<'_>, msg: BroadcastMessage) -> Vec<Action> {
        self.fan_out(ctx, msg.originated())
    }

    fn on_receive(&mut self, ctx: &mut NodeCtx<'_>, frame: &Frame) -> Vec<Action> {
        let Some(msg) = data_for_me(frame, ctx.node) else { return vec![] };
        if msg.ttl <= 1 {
            return vec![];
        }
        self.fan_out(ctx, msg.forwarded())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ProbabilityRule {
    Constant(f64),
    /// `P = 2^-(n-1)` at the n-th reception of a message.
    Halving,
}

#[derive(Debug)]
pub struct ProbabilisticFlooding {
    rule: ProbabilityRule,
    receptions: HashMap<MessageId, u32>,
}

impl ProbabilisticFlooding {
    pub fn constant(p: f64) -> Self {
        ProbabilisticFlooding { rule: ProbabilityRule::Constant(p), receptions: HashMap::new() }
    }

    pub fn decreasing() -> Self {
        ProbabilisticFlooding { rule: ProbabilityRule::Halving, receptions: HashMap::new() }
    }

    /// Probability that will apply to the next copy of `id`.
    pub fn retransmit_probability(&self, id: MessageId) -> f64 {
        match self.rule {
            ProbabilityRule::Constant(p) => p,
            ProbabilityRule::Halving => {
                let n = self.receptions.get(&id).copied().unwrap_or(0);
                0.5f64.powi(n as i32)
            }
        }
    }
}

impl BroadcastStrategy for ProbabilisticFlooding {
    fn originate(&mut self, _ctx: &mut NodeCtx<'_>, msg: BroadcastMessage) -> Vec<Action> {
        // The originator's own transmission uses up the P = 1 opportunity.
        if self.rule == ProbabilityRule::Halving {
            *self.receptions.entry(msg.id()).or_default() += 1;
        }
        broadcast(msg.originated())
    }

    fn on_receive(&mut self, ctx: &mut NodeCtx<'_>, frame: &Frame) -> Vec<Action> {
        let Some(msg) = data_for_me(frame, ctx.node) else { return vec![] };
        let p = self.retransmit_probability(msg.id());
        *self.receptions.entry(msg.id()).or_default() += 1;
        if msg.ttl <= 1 {
            return vec![];
        }
        let go = ctx.rng.uniform01() < p;
        if go {
            forward_if_alive(msg).into_iter().collect()
        } else {
            vec![]
        }
    }
}

/// Copies carry the set of nodes known to hold the message and are addressed
/// to the nodes not yet covered.
#[derive(Debug, Default)]
pub struct TabuFlooding;

impl TabuFlooding {
    fn relay(copy: BroadcastMessage, me: NodeSite) -> Vec<Action> {
        let covered = copy.covered.with(me);
        if covered.is_full() {
            return vec![];
        }
        let out = BroadcastMessage { covered, dest: Some(covered.complement()), ..copy };
        vec![Action::Send(FrameBody::Data(out))]
    }
}

impl BroadcastStrategy for TabuFlooding {
    fn originate(&mut self, ctx: &mut NodeCtx<'_>, msg: BroadcastMessage) -> Vec<Action> {
        Self::relay(msg.originated(), ctx.node)
    }

    fn on_receive(&mut self, ctx: &mut NodeCtx<'_>, frame: &Frame) -> Vec<Action> {
        let Some(msg) = data_for_me(frame, ctx.node) else { return vec![] };
        if msg.ttl <= 1 {
            return vec![];
        }
        Self::relay(msg.forwarded(), ctx.node)
    }
}
