//! Unslotted 802.15.4-style CSMA/CA over a bounded drop-tail FIFO.
//!
//! Broadcast semantics: no MAC acknowledgements, no retransmissions. The
//! frame at the head of the queue stays there (and counts against capacity)
//! until it is transmitted or discarded after a channel access failure.

use std::collections::VecDeque;

use crate::frame::Frame;
use crate::sim::{RngStream, SimTime};

#[derive(Clone, Debug, PartialEq)]
pub struct MacParams {
    pub min_be: u8,
    pub max_be: u8,
    /// Busy CCAs tolerated before the frame is discarded.
    pub max_csma_backoffs: u8,
    pub backoff_unit: SimTime,
    pub data_rate_bps: u32,
    /// PHY (preamble, SFD, PHR) plus MAC header and FCS.
    pub header_bits: u32,
    /// RX-to-TX turnaround between a clear CCA and the first transmitted bit.
    pub turnaround: SimTime,
    pub queue_capacity: usize,
}

impl Default for MacParams {
    fn default() -> Self {
        MacParams {
            min_be: 3,
            max_be: 5,
            max_csma_backoffs: 4,
            backoff_unit: SimTime::from_micros(320),
            data_rate_bps: 250_000,
            // 6 bytes PHY + 9 bytes MAC header (short addressing) + 2 bytes FCS.
            header_bits: 17 * 8,
            turnaround: SimTime::from_micros(192),
            queue_capacity: 100,
        }
    }
}

impl MacParams {
    pub fn airtime(&self, payload_bits: u32) -> SimTime {
        let bits = (self.header_bits + payload_bits) as u64;
        let us = (bits * 1_000_000).div_ceil(self.data_rate_bps as u64);
        SimTime::from_micros(us)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.min_be > self.max_be {
            return Err(format!("min_be {} exceeds max_be {}", self.min_be, self.max_be));
        }
        if self.max_be > 16 {
            return Err(format!("max_be {} is unreasonably large", self.max_be));
        }
        if self.max_csma_backoffs == 0 {
            return Err("max_csma_backoffs must be at least 1".into());
        }
        if self.backoff_unit == SimTime::ZERO {
            return Err("backoff_unit must be positive".into());
        }
        if self.data_rate_bps == 0 {
            return Err("data_rate_bps must be positive".into());
        }
        if self.queue_capacity == 0 {
            return Err("queue_capacity must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropReason {
    QueueFull,
    ChannelAccessFailure,
}

#[derive(Debug)]
pub struct MacQueue {
    capacity: usize,
    entries: VecDeque<Frame>,
}

impl MacQueue {
    pub fn new(capacity: usize) -> Self {
        MacQueue { capacity, entries: VecDeque::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Drop-tail: a full queue rejects the new frame.
    pub fn push(&mut self, frame: Frame) -> Result<(), Frame> {
        if self.entries.len() >= self.capacity {
            return Err(frame);
        }
        self.entries.push_back(frame);
        Ok(())
    }

    pub fn head(&self) -> Option<&Frame> {
        self.entries.front()
    }

    pub fn pop(&mut self) -> Option<Frame> {
        self.entries.pop_front()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MacPhase {
    Idle,
    Backoff,
    Turnaround,
    Transmitting,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MacCounters {
    pub enqueued: u64,
    pub transmitted: u64,
    pub dropped_queue: u64,
    pub dropped_csma: u64,
}

impl MacCounters {
    /// Frames that reached a final outcome.
    pub fn resolved(&self) -> u64 {
        self.transmitted + self.dropped_queue + self.dropped_csma
    }
}

#[derive(Debug, PartialEq)]
pub enum EnqueueOutcome {
    /// `backoff` is set when this frame kicked off a new CSMA attempt.
    Accepted { backoff: Option<SimTime> },
    Dropped(DropReason),
}

#[derive(Debug, PartialEq)]
pub enum CcaOutcome {
    /// Channel clear; transmission starts after `turnaround`.
    Transmit { turnaround: SimTime },
    /// Channel busy; try again after `backoff`.
    Retry { backoff: SimTime },
    /// Too many busy CCAs; the head frame was discarded. `next` is the backoff
    /// for the following frame, if any.
    AccessFailure { discarded: Frame, next: Option<SimTime> },
}

#[derive(Debug)]
pub struct Mac {
    params: MacParams,
    queue: MacQueue,
    phase: MacPhase,
    nb: u8,
    be: u8,
    counters: MacCounters,
}

impl Mac {
    pub fn new(params: MacParams) -> Self {
        let queue = MacQueue::new(params.queue_capacity);
        Mac { params, queue, phase: MacPhase::Idle, nb: 0, be: 0, counters: MacCounters::default() }
    }

    pub fn params(&self) -> &MacParams {
        &self.params
    }

    pub fn phase(&self) -> MacPhase {
        self.phase
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn counters(&self) -> MacCounters {
        self.counters
    }

    pub fn head(&self) -> Option<&Frame> {
        self.queue.head()
    }

    pub fn is_idle(&self) -> bool {
        self.phase == MacPhase::Idle && self.queue.is_empty()
    }

    fn draw_backoff(&mut self, rng: &mut RngStream) -> SimTime {
        let slots = rng.uniform_int(1u64 << self.be).expect("window is at least 1");
        SimTime::from_micros(slots * self.params.backoff_unit.as_micros())
    }

    fn start_csma(&mut self, rng: &mut RngStream) -> SimTime {
        self.nb = 0;
        self.be = self.params.min_be;
        self.phase = MacPhase::Backoff;
        self.draw_backoff(rng)
    }

    pub fn enqueue(&mut self, frame: Frame, rng: &mut RngStream) -> EnqueueOutcome {
        self.counters.enqueued += 1;
        if self.queue.push(frame).is_err() {
            self.counters.dropped_queue += 1;
            return EnqueueOutcome::Dropped(DropReason::QueueFull);
        }
        let backoff = (self.phase == MacPhase::Idle).then(|| self.start_csma(rng));
        EnqueueOutcome::Accepted { backoff }
    }

    /// Clear channel assessment at the end of a backoff period.
    pub fn on_backoff_expired(&mut self, channel_busy: bool, rng: &mut RngStream) -> CcaOutcome {
        debug_assert_eq!(self.phase, MacPhase::Backoff);
        if !channel_busy {
            self.phase = MacPhase::Turnaround;
            return CcaOutcome::Transmit { turnaround: self.params.turnaround };
        }
        self.nb += 1;
        if self.nb >= self.params.max_csma_backoffs {
            let discarded = self.queue.pop().expect("CSMA runs only with a head frame");
            self.counters.dropped_csma += 1;
            self.phase = MacPhase::Idle;
            let next = (!self.queue.is_empty()).then(|| self.start_csma(rng));
            return CcaOutcome::AccessFailure { discarded, next };
        }
        self.be = (self.be + 1).min(self.params.max_be);
        CcaOutcome::Retry { backoff: self.draw_backoff(rng) }
    }

    /// Turnaround done: the head frame goes on the air. Returns it and its airtime.
    pub fn on_tx_start(&mut self) -> (Frame, SimTime) {
        debug_assert_eq!(self.phase, MacPhase::Turnaround);
        self.phase = MacPhase::Transmitting;
        let frame = self.queue.head().expect("transmitting without a head frame").clone();
        let airtime = self.params.airtime(frame.payload_bits());
        (frame, airtime)
    }

    /// Pops the transmitted frame; returns the backoff for the next one.
    pub fn on_tx_complete(&mut self, rng: &mut RngStream) -> Option<SimTime> {
        debug_assert_eq!(self.phase, MacPhase::Transmitting);
        self.queue.pop();
        self.counters.transmitted += 1;
        self.phase = MacPhase::Idle;
        (!self.queue.is_empty()).then(|| self.start_csma(rng))
    }
}
