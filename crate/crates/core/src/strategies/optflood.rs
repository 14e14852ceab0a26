//! Optimized flooding.
//!
//! Each copy carries the set of nodes that incremented its global counter
//! (`cptGlobal = |contributors|`); each node keeps the freshest counter it has
//! acted on (`cptLocal`). A copy is forwarded only if it brings a strictly
//! larger counter, and the message is dropped for good once all seven nodes
//! have contributed.

use std::collections::{HashMap, HashSet};

use super::{Action, BroadcastStrategy, NodeCtx};
use crate::channel::NODE_COUNT;
use crate::frame::{BroadcastMessage, Frame, FrameBody, MessageId};

pub const CPT_MAX: usize = NODE_COUNT;

#[derive(Debug, Default)]
pub struct OptFlood {
    cpt_local: HashMap<MessageId, usize>,
    finished: HashSet<MessageId>,
}

impl OptFlood {
    pub fn cpt_local(&self, id: MessageId) -> Option<usize> {
        self.cpt_local.get(&id).copied()
    }

    pub fn is_finished(&self, id: MessageId) -> bool {
        self.finished.contains(&id)
    }

    fn emit(copy: BroadcastMessage) -> Vec<Action> {
        if copy.ttl > 1 {
            vec![Action::Send(FrameBody::Data(copy.forwarded()))]
        } else {
            vec![]
        }
    }
}

impl BroadcastStrategy for OptFlood {
    fn originate(&mut self, ctx: &mut NodeCtx<'_>, msg: BroadcastMessage) -> Vec<Action> {
        let mut first = msg.originated();
        first.contributors.insert(ctx.node);
        self.cpt_local.insert(first.id(), first.contributors.len());
        vec![Action::Send(FrameBody::Data(first))]
    }

    fn on_receive(&mut self, ctx: &mut NodeCtx<'_>, frame: &Frame) -> Vec<Action> {
        let FrameBody::Data(msg) = &frame.body else { return vec![] };
        if !msg.is_addressed_to(ctx.node) {
            return vec![];
        }
        let id = msg.id();
        if self.finished.contains(&id) {
            return vec![];
        }
        let mut copy = msg.clone();
        copy.contributors.insert(ctx.node);
        let global = copy.contributors.len();
        debug_assert!(global <= CPT_MAX);

        let Some(local) = self.cpt_local.get(&id).copied() else {
            self.cpt_local.insert(id, global);
            if global == CPT_MAX {
                self.finished.insert(id);
                return vec![];
            }
            return Self::emit(copy);
        };

        if global == CPT_MAX {
            self.cpt_local.insert(id, global);
            self.finished.insert(id);
            return vec![];
        }
        if global <= local {
            // Obsolete copy.
            return vec![];
        }
        self.cpt_local.insert(id, global);
        Self::emit(copy)
    }
}
