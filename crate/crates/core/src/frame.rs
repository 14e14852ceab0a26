//! Messages and the frames that carry them over the MAC.

use std::fmt;

use crate::channel::{NodeSet, NodeSite};

/// Application payload of a data message.
pub const DATA_PAYLOAD_BITS: u32 = 20 * 8;
/// origin, seq, ttl, hops.
const MESSAGE_HEADER_BITS: u32 = 4 * 8;
const NODE_SET_BITS: u32 = 8;
pub const ACK_BITS: u32 = 4 * 8;
const HELLO_BASE_BITS: u32 = 2 * 8;
const HELLO_ENTRY_BITS: u32 = 2 * 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MessageId {
    pub origin: NodeSite,
    pub seq: u32,
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.origin, self.seq)
    }
}

/// A copy of a disseminated message. Per-copy strategy state travels with it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BroadcastMessage {
    pub origin: NodeSite,
    pub seq: u32,
    pub ttl: u32,
    /// MAC transmissions this copy has undergone since the sink.
    pub hops: u32,
    /// OptFlood: nodes that incremented the global counter on this copy.
    pub contributors: NodeSet,
    /// Tabu: nodes known to hold the message.
    pub covered: NodeSet,
    /// Addressed copies (Pruned, Tabu); `None` is a plain broadcast.
    pub dest: Option<NodeSet>,
}

impl BroadcastMessage {
    pub fn new(origin: NodeSite, seq: u32, ttl: u32) -> Self {
        BroadcastMessage {
            origin,
            seq,
            ttl,
            hops: 0,
            contributors: NodeSet::EMPTY,
            covered: NodeSet::EMPTY,
            dest: None,
        }
    }

    pub fn id(&self) -> MessageId {
        MessageId { origin: self.origin, seq: self.seq }
    }

    pub fn is_addressed_to(&self, n: NodeSite) -> bool {
        self.dest.map_or(true, |d| d.contains(n))
    }

    /// The copy a node puts on the air when forwarding: one hop further,
    /// one TTL less. Only valid for `ttl > 1`.
    pub fn forwarded(&self) -> BroadcastMessage {
        debug_assert!(self.ttl > 1, "forwarding a copy with ttl {}", self.ttl);
        BroadcastMessage { ttl: self.ttl - 1, hops: self.hops + 1, ..self.clone() }
    }

    /// The first copy the originator transmits.
    pub fn originated(&self) -> BroadcastMessage {
        BroadcastMessage { hops: self.hops + 1, ..self.clone() }
    }

    pub fn payload_bits(&self) -> u32 {
        let mut bits = DATA_PAYLOAD_BITS + MESSAGE_HEADER_BITS;
        if !self.contributors.is_empty() {
            bits += NODE_SET_BITS;
        }
        if !self.covered.is_empty() {
            bits += NODE_SET_BITS;
        }
        if self.dest.is_some() {
            bits += NODE_SET_BITS;
        }
        bits
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrameBody {
    Data(BroadcastMessage),
    /// Neighbour discovery; lists the messages the sender already holds.
    Hello { have: Vec<MessageId> },
    Ack { to: NodeSite, msg: MessageId },
}

impl FrameBody {
    pub fn payload_bits(&self) -> u32 {
        match self {
            FrameBody::Data(m) => m.payload_bits(),
            FrameBody::Hello { have } => HELLO_BASE_BITS + HELLO_ENTRY_BITS * have.len() as u32,
            FrameBody::Ack { .. } => ACK_BITS,
        }
    }

    pub fn is_data(&self) -> bool {
        matches!(self, FrameBody::Data(_))
    }

    pub fn class(&self) -> TrafficClass {
        if self.is_data() {
            TrafficClass::Data
        } else {
            TrafficClass::Control
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FrameBody::Data(_) => "data",
            FrameBody::Hello { .. } => "hello",
            FrameBody::Ack { .. } => "ack",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrafficClass {
    Data,
    Control,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrameId(pub u64);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub id: FrameId,
    pub src: NodeSite,
    pub body: FrameBody,
}

impl Frame {
    pub fn payload_bits(&self) -> u32 {
        self.body.payload_bits()
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            FrameBody::Data(m) => {
                write!(f, "data#{} msg={} ttl={} hops={}", self.id.0, m.id(), m.ttl, m.hops)?;
                if !m.contributors.is_empty() {
                    write!(f, " contrib={}", m.contributors)?;
                }
                if !m.covered.is_empty() {
                    write!(f, " covered={}", m.covered)?;
                }
                if let Some(d) = m.dest {
                    write!(f, " dest={d}")?;
                }
                Ok(())
            }
            FrameBody::Hello { have } => write!(f, "hello#{} have={}", self.id.0, have.len()),
            FrameBody::Ack { to, msg } => write!(f, "ack#{} to={to} msg={msg}", self.id.0),
        }
    }
}
