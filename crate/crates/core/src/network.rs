//! One simulated run: seven nodes, each a MAC plus a strategy, sharing a
//! medium over a posture-dependent channel.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::channel::{ChannelConfig, ChannelState, Medium, NodeSite, Posture, RxOutcome, TxId, NODE_COUNT};
use crate::frame::{BroadcastMessage, Frame, FrameBody, FrameId};
use crate::mac::{CcaOutcome, DropReason, EnqueueOutcome, Mac, MacCounters, MacParams};
use crate::metrics::{Observation, RunRecord};
use crate::sim::{EventId, Purpose, RngStream, Scheduler, SimTime, StreamId};
use crate::strategies::{Action, BroadcastStrategy, NodeCtx, StrategyKind, TimerToken};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceMode {
    /// One message from the sink.
    SinglePacket,
    /// Consecutive messages every `1/rate` seconds for `window`.
    Rate { packets_per_s: f64, window: SimTime },
}

impl SourceMode {
    pub fn packet_count(&self) -> u32 {
        match *self {
            SourceMode::SinglePacket => 1,
            SourceMode::Rate { packets_per_s, window } => {
                ((packets_per_s * window.as_secs_f64()).round() as u32).max(1)
            }
        }
    }

    pub fn gap(&self) -> SimTime {
        match *self {
            SourceMode::SinglePacket => SimTime::ZERO,
            SourceMode::Rate { packets_per_s, .. } => SimTime::from_secs_f64(1.0 / packets_per_s),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub channel: Arc<ChannelConfig>,
    pub posture: Posture,
    pub strategy: StrategyKind,
    pub ttl: u32,
    pub mac: MacParams,
    pub source: SourceMode,
    /// First origination; leaves time for hello-based neighbour discovery.
    pub source_start: SimTime,
    /// Hard stop, even if the network has not quiesced.
    pub time_cap: SimTime,
}

impl RunConfig {
    pub fn new(channel: Arc<ChannelConfig>, strategy: StrategyKind) -> Self {
        RunConfig {
            channel,
            posture: Posture::Walk,
            strategy,
            ttl: 8,
            mac: MacParams::default(),
            source: SourceMode::SinglePacket,
            source_start: SimTime::from_secs_f64(1.0),
            time_cap: SimTime::from_secs_f64(60.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Event {
    AppPacketDue,
    BackoffExpired(NodeSite),
    FrameTxStart(NodeSite),
    FrameTxEnd(NodeSite, TxId),
    TimerFired(NodeSite, TimerToken),
    HelloDue(NodeSite),
}

#[derive(Debug)]
struct Node {
    mac: Mac,
    strategy: Box<dyn BroadcastStrategy>,
    mac_rng: RngStream,
    strategy_rng: RngStream,
    timers: BTreeMap<TimerToken, EventId>,
    hello: Option<EventId>,
    on_air: Option<Frame>,
    max_queue: usize,
}

/// Result of one run.
#[derive(Debug)]
pub struct RunOutput {
    pub record: RunRecord,
    pub end_time: SimTime,
    pub events: u64,
    /// The network went quiet before the time cap.
    pub quiesced: bool,
    pub mac: [MacCounters; NODE_COUNT],
    pub max_queue: [usize; NODE_COUNT],
    pub channel_epochs: u64,
    /// Receptions lost to overlapping frames.
    pub collisions: u64,
    pub trace: Option<String>,
}

pub struct Network {
    cfg: RunConfig,
    sched: Scheduler<Event>,
    channel: ChannelState,
    medium: Medium,
    nodes: Vec<Node>,
    record: RunRecord,
    next_frame: u64,
    next_seq: u32,
    collisions: u64,
    trace: Option<String>,
}

impl Network {
    pub fn new(cfg: RunConfig, seed: u64) -> Self {
        let nodes = NodeSite::ALL
            .into_iter()
            .map(|site| Node {
                mac: Mac::new(cfg.mac.clone()),
                strategy: cfg.strategy.build(site),
                mac_rng: RngStream::new(seed, StreamId::new(Purpose::MacBackoff, site.index() as u64)),
                strategy_rng: RngStream::new(seed, StreamId::new(Purpose::Strategy, site.index() as u64)),
                timers: BTreeMap::new(),
                hello: None,
                on_air: None,
                max_queue: 0,
            })
            .collect();
        Network {
            channel: ChannelState::new(cfg.channel.clone(), cfg.posture, seed),
            cfg,
            sched: Scheduler::new(),
            medium: Medium::new(),
            nodes,
            record: RunRecord::new(),
            next_frame: 0,
            next_seq: 0,
            collisions: 0,
            trace: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(String::new());
        self
    }

    fn log(&mut self, node: Option<NodeSite>, kind: &str, detail: impl FnOnce() -> String) {
        if let Some(t) = self.trace.as_mut() {
            let who = node.map_or("-", |n| n.name());
            let line = format!("{} {:<9} {:<15} {}", self.sched.now(), who, kind, detail());
            let _ = writeln!(t, "{}", line.trim_end());
        }
    }

    pub fn run(mut self) -> RunOutput {
        self.sched
            .schedule(self.cfg.source_start, Event::AppPacketDue)
            .expect("source start is not in the past");
        for site in NodeSite::ALL {
            let actions = self.with_ctx(site, |s, ctx| s.start(ctx));
            self.apply(site, actions);
        }
        let mut events = 0u64;
        let mut quiesced = false;
        while let Some((_, _, ev)) = self.sched.pop_until(self.cfg.time_cap) {
            events += 1;
            self.handle(ev);
            if self.is_quiescent() {
                quiesced = true;
                break;
            }
        }
        let end_time = self.sched.now();
        RunOutput {
            record: self.record,
            end_time,
            events,
            quiesced,
            mac: std::array::from_fn(|i| self.nodes[i].mac.counters()),
            max_queue: std::array::from_fn(|i| self.nodes[i].max_queue),
            channel_epochs: self.channel.resample_count(),
            collisions: self.collisions,
            trace: self.trace,
        }
    }

    /// Source exhausted, nothing on the air, no MAC or strategy work left.
    /// Periodic hellos alone do not keep a run alive.
    fn is_quiescent(&self) -> bool {
        self.next_seq >= self.cfg.source.packet_count()
            && self.medium.in_flight() == 0
            && self
                .nodes
                .iter()
                .all(|n| n.mac.is_idle() && n.timers.is_empty() && !n.strategy.has_pending_work())
    }

    fn with_ctx<R>(
        &mut self,
        site: NodeSite,
        f: impl FnOnce(&mut dyn BroadcastStrategy, &mut NodeCtx<'_>) -> R,
    ) -> R {
        let now = self.sched.now();
        let node = &mut self.nodes[site.index()];
        let mut ctx = NodeCtx { node: site, now, rng: &mut node.strategy_rng };
        f(node.strategy.as_mut(), &mut ctx)
    }

    fn handle(&mut self, ev: Event) {
        match ev {
            Event::AppPacketDue => self.originate(),
            Event::BackoffExpired(n) => self.cca(n),
            Event::FrameTxStart(n) => self.tx_start(n),
            Event::FrameTxEnd(n, id) => self.tx_end(n, id),
            Event::TimerFired(n, token) => {
                self.nodes[n.index()].timers.remove(&token);
                self.log(Some(n), "timer", || format!("token={}", token.0));
                let actions = self.with_ctx(n, |s, ctx| s.on_timer(ctx, token));
                self.apply(n, actions);
            }
            Event::HelloDue(n) => {
                self.nodes[n.index()].hello = None;
                let actions = self.with_ctx(n, |s, ctx| s.on_hello_due(ctx));
                self.apply(n, actions);
            }
        }
    }

    fn originate(&mut self) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let now = self.sched.now();
        self.record.record(Observation::Originated { seq, at: now });
        let ttl = self.cfg.ttl;
        self.log(Some(NodeSite::SINK), "app_packet_due", || format!("seq={seq} ttl={ttl}"));
        if self.next_seq < self.cfg.source.packet_count() {
            self.sched.schedule_in(self.cfg.source.gap(), Event::AppPacketDue);
        }
        let msg = BroadcastMessage::new(NodeSite::SINK, seq, self.cfg.ttl);
        let actions = self.with_ctx(NodeSite::SINK, |s, ctx| s.originate(ctx, msg));
        self.apply(NodeSite::SINK, actions);
    }

    fn cca(&mut self, n: NodeSite) {
        let now = self.sched.now();
        let busy = self.medium.carrier_busy(n, now, &mut self.channel);
        let node = &mut self.nodes[n.index()];
        match node.mac.on_backoff_expired(busy, &mut node.mac_rng) {
            CcaOutcome::Transmit { turnaround } => {
                self.sched.schedule_in(turnaround, Event::FrameTxStart(n));
                self.log(Some(n), "cca_clear", String::new);
            }
            CcaOutcome::Retry { backoff } => {
                self.sched.schedule_in(backoff, Event::BackoffExpired(n));
                self.log(Some(n), "cca_busy", || format!("backoff={backoff}"));
            }
            CcaOutcome::AccessFailure { discarded, next } => {
                if let Some(b) = next {
                    self.sched.schedule_in(b, Event::BackoffExpired(n));
                }
                self.record.record(Observation::Drop { node: n, reason: DropReason::ChannelAccessFailure });
                self.log(Some(n), "access_failure", || discarded.to_string());
            }
        }
    }

    fn tx_start(&mut self, n: NodeSite) {
        let now = self.sched.now();
        let (frame, airtime) = self.nodes[n.index()].mac.on_tx_start();
        let id = self.medium.begin(n, now, now + airtime, &mut self.channel);
        self.record.record(Observation::Tx { node: n, class: frame.body.class() });
        self.log(Some(n), "tx_start", || format!("{frame} airtime={airtime}"));
        self.nodes[n.index()].on_air = Some(frame);
        self.sched.schedule_in(airtime, Event::FrameTxEnd(n, id));
    }

    fn tx_end(&mut self, n: NodeSite, id: TxId) {
        let now = self.sched.now();
        let outcomes = self.medium.end(id, &mut self.channel);
        let frame = self.nodes[n.index()].on_air.take().expect("frame on air");
        {
            let node = &mut self.nodes[n.index()];
            if let Some(b) = node.mac.on_tx_complete(&mut node.mac_rng) {
                self.sched.schedule_in(b, Event::BackoffExpired(n));
            }
        }
        self.log(Some(n), "tx_end", || {
            let mut s = format!("frame={}", frame.id.0);
            for (r, o) in &outcomes {
                let tag = match o {
                    RxOutcome::Received => "ok",
                    RxOutcome::Collision => "collision",
                    RxOutcome::OutOfRange => continue,
                };
                let _ = write!(s, " {r}:{tag}");
            }
            s
        });
        self.collisions += outcomes.iter().filter(|(_, o)| *o == RxOutcome::Collision).count() as u64;
        for (r, outcome) in outcomes {
            if outcome != RxOutcome::Received {
                continue;
            }
            self.record.record(Observation::Rx { node: r, class: frame.body.class() });
            if let FrameBody::Data(msg) = &frame.body {
                if msg.is_addressed_to(r) && r != msg.origin {
                    let first = self.record.record(Observation::Delivered { node: r, seq: msg.seq, at: now });
                    if first {
                        self.log(Some(r), "first_rx", || format!("msg={} hops={}", msg.id(), msg.hops));
                    }
                }
            }
            let actions = self.with_ctx(r, |s, ctx| s.on_receive(ctx, &frame));
            self.apply(r, actions);
        }
    }

    fn apply(&mut self, n: NodeSite, actions: Vec<Action>) {
        for action in actions {
            match action {
                Action::Send(body) => self.enqueue(n, body),
                Action::StartTimer { token, delay } => {
                    let id = self.sched.schedule_in(delay, Event::TimerFired(n, token));
                    self.nodes[n.index()].timers.insert(token, id);
                }
                Action::CancelTimer(token) => {
                    if let Some(id) = self.nodes[n.index()].timers.remove(&token) {
                        self.sched.cancel(id);
                        self.log(Some(n), "timer_cancel", || format!("token={}", token.0));
                    }
                }
                Action::ScheduleHello { delay } => {
                    if let Some(old) = self.nodes[n.index()].hello.take() {
                        self.sched.cancel(old);
                    }
                    let id = self.sched.schedule_in(delay, Event::HelloDue(n));
                    self.nodes[n.index()].hello = Some(id);
                }
            }
        }
    }

    fn enqueue(&mut self, n: NodeSite, body: FrameBody) {
        if let FrameBody::Data(m) = &body {
            assert!(m.ttl >= 1, "{n} tried to send a copy with ttl 0");
        }
        let frame = Frame { id: FrameId(self.next_frame), src: n, body };
        self.next_frame += 1;
        let node = &mut self.nodes[n.index()];
        let label = frame.to_string();
        match node.mac.enqueue(frame, &mut node.mac_rng) {
            EnqueueOutcome::Accepted { backoff } => {
                node.max_queue = node.max_queue.max(node.mac.queue_len());
                if let Some(b) = backoff {
                    self.sched.schedule_in(b, Event::BackoffExpired(n));
                }
                self.log(Some(n), "enqueue", || label);
            }
            EnqueueOutcome::Dropped(reason) => {
                self.record.record(Observation::Drop { node: n, reason });
                self.log(Some(n), "queue_drop", || label);
            }
        }
    }
}

/// Runs one seed to completion.
pub fn simulate(cfg: &RunConfig, seed: u64) -> RunOutput {
    Network::new(cfg.clone(), seed).run()
}
