//! Mixed Broadcast Protocol.
//!
//! Copies that have travelled fewer than `delta` hops are flooded at once.
//! From `delta` hops on, a node waits `timer` and forwards only if it has not
//! collected `quota` acknowledgements for the message by then. Beyond `delta`
//! the receiver also acknowledges the copy to the node it came from.

use std::collections::{BTreeMap, HashMap};

use super::{forward_if_alive, Action, BroadcastStrategy, NodeCtx, TimerToken};
use crate::frame::{BroadcastMessage, Frame, FrameBody, MessageId};
use crate::sim::SimTime;

#[derive(Debug)]
pub struct Mbp {
    delta: u32,
    timer: SimTime,
    quota: u32,
    ack_count: HashMap<MessageId, u32>,
    /// Pending wait-then-forward decisions: the copy as received.
    pending: BTreeMap<TimerToken, BroadcastMessage>,
    next_token: u64,
}

impl Mbp {
    pub fn new(delta: u32, timer: SimTime, quota: u32) -> Self {
        Mbp { delta, timer, quota, ack_count: HashMap::new(), pending: BTreeMap::new(), next_token: 0 }
    }

    pub fn ack_count(&self, id: MessageId) -> u32 {
        self.ack_count.get(&id).copied().unwrap_or(0)
    }

    pub fn pending_timers(&self) -> usize {
        self.pending.len()
    }

    fn quota_met(&self, id: MessageId) -> bool {
        self.ack_count(id) >= self.quota
    }
}

impl BroadcastStrategy for Mbp {
    fn originate(&mut self, _ctx: &mut NodeCtx<'_>, msg: BroadcastMessage) -> Vec<Action> {
        vec![Action::Send(FrameBody::Data(msg.originated()))]
    }

    fn on_receive(&mut self, ctx: &mut NodeCtx<'_>, frame: &Frame) -> Vec<Action> {
        match &frame.body {
            FrameBody::Data(msg) => {
                if msg.hops < self.delta {
                    return forward_if_alive(msg).into_iter().collect();
                }
                let mut out = Vec::new();
                if msg.hops > self.delta {
                    out.push(Action::Send(FrameBody::Ack { to: frame.src, msg: msg.id() }));
                }
                if msg.ttl > 1 {
                    let token = TimerToken(self.next_token);
                    self.next_token += 1;
                    self.pending.insert(token, msg.clone());
                    out.push(Action::StartTimer { token, delay: self.timer });
                }
                out
            }
            FrameBody::Ack { to, msg } if *to == ctx.node => {
                *self.ack_count.entry(*msg).or_default() += 1;
                if !self.quota_met(*msg) {
                    return vec![];
                }
                // Quota reached: every waiting copy of this message is suppressed.
                let done: Vec<TimerToken> =
                    self.pending.iter().filter(|(_, m)| m.id() == *msg).map(|(t, _)| *t).collect();
                done.into_iter()
                    .map(|t| {
                        self.pending.remove(&t);
                        Action::CancelTimer(t)
                    })
                    .collect()
            }
            _ => vec![],
        }
    }

    fn on_timer(&mut self, _ctx: &mut NodeCtx<'_>, token: TimerToken) -> Vec<Action> {
        let Some(copy) = self.pending.remove(&token) else { return vec![] };
        if self.quota_met(copy.id()) {
            return vec![];
        }
        forward_if_alive(&copy).into_iter().collect()
    }
}
