//! Broadcast forwarding policies.
//!
//! Every policy is a per-node state machine. The event loop feeds it
//! receptions, timer expiries and hello ticks; it answers with [`Action`]s.
//! Policies never touch the clock or the MAC directly, which keeps them
//! deterministic functions of `(state, input, rng draw)`.

mod ebp;
mod flooding;
mod mbp;
mod optflood;

use std::fmt;
use std::str::FromStr;

use crate::channel::NodeSite;
use crate::frame::{BroadcastMessage, Frame, FrameBody};
use crate::sim::{RngStream, SimTime};

pub use ebp::{ebp_k_threshold, Ebp};
pub use flooding::{Flooding, PlainFlooding, ProbabilisticFlooding, PrunedFlooding, TabuFlooding};
pub use mbp::Mbp;
pub use optflood::{OptFlood, CPT_MAX};

/// Opaque timer identifier, unique per node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimerToken(pub u64);

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Send(FrameBody),
    StartTimer { token: TimerToken, delay: SimTime },
    CancelTimer(TimerToken),
    ScheduleHello { delay: SimTime },
}

impl Action {
    pub fn as_data(&self) -> Option<&BroadcastMessage> {
        match self {
            Action::Send(FrameBody::Data(m)) => Some(m),
            _ => None,
        }
    }
}

pub struct NodeCtx<'a> {
    pub node: NodeSite,
    pub now: SimTime,
    pub rng: &'a mut RngStream,
}

pub trait BroadcastStrategy: fmt::Debug + Send {
    /// Called once at time zero.
    fn start(&mut self, _ctx: &mut NodeCtx<'_>) -> Vec<Action> {
        Vec::new()
    }

    /// The sink injects a new message (`hops = 0`, `ttl = ttl_init`).
    fn originate(&mut self, ctx: &mut NodeCtx<'_>, msg: BroadcastMessage) -> Vec<Action>;

    /// A frame was received intact. Data copies addressed to another node are
    /// delivered too; policies that address copies must ignore them.
    fn on_receive(&mut self, ctx: &mut NodeCtx<'_>, frame: &Frame) -> Vec<Action>;

    fn on_timer(&mut self, _ctx: &mut NodeCtx<'_>, _token: TimerToken) -> Vec<Action> {
        Vec::new()
    }

    fn on_hello_due(&mut self, _ctx: &mut NodeCtx<'_>) -> Vec<Action> {
        Vec::new()
    }

    /// Messages held back waiting for a forwarding condition.
    fn has_pending_work(&self) -> bool {
        false
    }
}

/// Forwarding policy plus its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StrategyKind {
    Flooding,
    PlainFlooding,
    PrunedFlooding { k: usize },
    ProbabilisticConstant { p: f64 },
    ProbabilisticDecreasing,
    TabuFlooding,
    Ebp { hello_interval: SimTime },
    Mbp { delta: u32, timer: SimTime, quota: u32 },
    OptFlood,
}

pub const STRATEGY_NAMES: [&str; 9] = [
    "flooding",
    "plain_flooding",
    "pruned_flooding",
    "probabilistic_constant",
    "probabilistic_decreasing",
    "tabu_flooding",
    "ebp",
    "mbp",
    "optflood",
];

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Flooding => "flooding",
            StrategyKind::PlainFlooding => "plain_flooding",
            StrategyKind::PrunedFlooding { .. } => "pruned_flooding",
            StrategyKind::ProbabilisticConstant { .. } => "probabilistic_constant",
            StrategyKind::ProbabilisticDecreasing => "probabilistic_decreasing",
            StrategyKind::TabuFlooding => "tabu_flooding",
            StrategyKind::Ebp { .. } => "ebp",
            StrategyKind::Mbp { .. } => "mbp",
            StrategyKind::OptFlood => "optflood",
        }
    }

    /// Short label including the parameters that distinguish variants.
    pub fn label(&self) -> String {
        match self {
            StrategyKind::PrunedFlooding { k } => format!("pruned_flooding(K={k})"),
            StrategyKind::ProbabilisticConstant { p } => format!("probabilistic_constant(P={p})"),
            StrategyKind::Ebp { hello_interval } => format!("ebp(I={})", hello_interval.as_secs_f64()),
            StrategyKind::Mbp { delta, timer, quota } => {
                let q = if *quota == u32::MAX { "inf".to_string() } else { quota.to_string() };
                format!("mbp(delta={delta},T={},Q={q})", timer.as_secs_f64())
            }
            other => other.name().to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            StrategyKind::PrunedFlooding { k } if *k == 0 || *k > 6 => {
                Err(format!("K must be in 1..=6, got {k}"))
            }
            StrategyKind::ProbabilisticConstant { p } if !(*p > 0.0 && *p <= 1.0) => {
                Err(format!("P must be in (0, 1], got {p}"))
            }
            StrategyKind::Ebp { hello_interval } if *hello_interval == SimTime::ZERO => {
                Err("hello interval I must be positive".into())
            }
            StrategyKind::Mbp { delta, quota, .. } if *delta == 0 || *quota == 0 => {
                Err(format!("delta and Q must be positive, got delta={delta} Q={quota}"))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self, node: NodeSite) -> Box<dyn BroadcastStrategy> {
        match *self {
            StrategyKind::Flooding => Box::new(Flooding),
            StrategyKind::PlainFlooding => Box::new(PlainFlooding::default()),
            StrategyKind::PrunedFlooding { k } => Box::new(PrunedFlooding::new(k)),
            StrategyKind::ProbabilisticConstant { p } => Box::new(ProbabilisticFlooding::constant(p)),
            StrategyKind::ProbabilisticDecreasing => Box::new(ProbabilisticFlooding::decreasing()),
            StrategyKind::TabuFlooding => Box::new(TabuFlooding),
            StrategyKind::Ebp { hello_interval } => Box::new(Ebp::new(node, hello_interval)),
            StrategyKind::Mbp { delta, timer, quota } => Box::new(Mbp::new(delta, timer, quota)),
            StrategyKind::OptFlood => Box::new(OptFlood::default()),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Parses a bare strategy name with default parameters.
impl FromStr for StrategyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "flooding" => StrategyKind::Flooding,
            "plain_flooding" => StrategyKind::PlainFlooding,
            "pruned_flooding" => StrategyKind::PrunedFlooding { k: 3 },
            "probabilistic_constant" => StrategyKind::ProbabilisticConstant { p: 0.5 },
            "probabilistic_decreasing" => StrategyKind::ProbabilisticDecreasing,
            "tabu_flooding" => StrategyKind::TabuFlooding,
            "ebp" => StrategyKind::Ebp { hello_interval: SimTime::from_millis(250) },
            "mbp" => StrategyKind::Mbp { delta: 2, timer: DEFAULT_MBP_TIMER, quota: 1 },
            "optflood" => StrategyKind::OptFlood,
            other => return Err(format!("unknown strategy `{other}`; expected one of {}", STRATEGY_NAMES.join(", "))),
        })
    }
}

/// Shortest timer in the timer sweep; it gives the lowest delay there.
pub const DEFAULT_MBP_TIMER: SimTime = SimTime::from_millis(5);

/// Send the forwarded copy if the TTL allows it.
pub(crate) fn forward_if_alive(msg: &BroadcastMessage) -> Option<Action> {
    (msg.ttl > 1).then(|| Action::Send(FrameBody::Data(msg.forwarded())))
}
