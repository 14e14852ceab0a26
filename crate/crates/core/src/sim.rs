//! Deterministic discrete-event core: integer-microsecond clock, a
//! cancellable event queue ordered by `(fire_time, insertion_index)`, and
//! seeded random streams that never share state.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::ops::{Add, Sub};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

/// Simulated time in whole microseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000)
    }

    /// Rounds to the nearest microsecond; negative and NaN inputs map to zero.
    pub fn from_secs_f64(secs: f64) -> Self {
        if secs.is_nan() || secs <= 0.0 {
            return SimTime::ZERO;
        }
        SimTime((secs * 1e6).round() as u64)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e6
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(rhs.0))
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06}", self.0 / 1_000_000, self.0 % 1_000_000)
    }
}

/// Handle to a scheduled event; equal to its insertion index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(u64);

impl EventId {
    pub fn index(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("event scheduled at {at} but clock is already at {now}")]
    InThePast { at: SimTime, now: SimTime },
}

#[derive(Debug)]
struct Entry<E> {
    at: SimTime,
    id: EventId,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.id) == (other.at, other.id)
    }
}
impl<E> Eq for Entry<E> {}
impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.id).cmp(&(other.at, other.id))
    }
}

/// Event queue and virtual clock.
#[derive(Debug)]
pub struct Scheduler<E> {
    now: SimTime,
    next_index: u64,
    heap: BinaryHeap<Reverse<Entry<E>>>,
    live: HashSet<EventId>,
    cancelled: HashSet<EventId>,
    last_popped: Option<(SimTime, EventId)>,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_index: 0,
            heap: BinaryHeap::new(),
            live: HashSet::new(),
            cancelled: HashSet::new(),
            last_popped: None,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn schedule(&mut self, at: SimTime, payload: E) -> Result<EventId, ScheduleError> {
        if at < self.now {
            return Err(ScheduleError::InThePast { at, now: self.now });
        }
        let id = EventId(self.next_index);
        self.next_index += 1;
        self.live.insert(id);
        self.heap.push(Reverse(Entry { at, id, payload }));
        Ok(id)
    }

    pub fn schedule_in(&mut self, delay: SimTime, payload: E) -> EventId {
        let at = self.now + delay;
        self.schedule(at, payload).expect("relative schedule cannot be in the past")
    }

    /// Returns false if the event had already fired or been cancelled.
    pub fn cancel(&mut self, id: EventId) -> bool {
        if self.live.remove(&id) {
            self.cancelled.insert(id);
            true
        } else {
            false
        }
    }

    /// Number of live (non-cancelled) events still queued.
    pub fn pending(&self) -> usize {
        self.live.len()
    }

    pub fn peek_time(&mut self) -> Option<SimTime> {
        self.skip_cancelled();
        self.heap.peek().map(|Reverse(e)| e.at)
    }

    fn skip_cancelled(&mut self) {
        while let Some(Reverse(top)) = self.heap.peek() {
            if self.cancelled.remove(&top.id) {
                self.heap.pop();
            } else {
                break;
            }
        }
    }

    /// Pops the next live event and advances the clock to its fire time.
    pub fn pop(&mut self) -> Option<(SimTime, EventId, E)> {
        self.skip_cancelled();
        let Reverse(entry) = self.heap.pop()?;
        debug_assert!(
            self.last_popped.map_or(true, |prev| prev < (entry.at, entry.id)),
            "event popped out of order"
        );
        self.live.remove(&entry.id);
        self.last_popped = Some((entry.at, entry.id));
        self.now = entry.at;
        Some((entry.at, entry.id, entry.payload))
    }

    /// Pops the next event only if it fires at or before `t_end`.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<(SimTime, EventId, E)> {
        match self.peek_time() {
            Some(t) if t <= t_end => self.pop(),
            _ => None,
        }
    }

    /// Processes every event with `fire_time <= t_end` in total order. The
    /// clock stops at the last processed event (never past `t_end`).
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> SimTime
    where
        F: FnMut(&mut Self, SimTime, E),
    {
        while let Some((at, _, payload)) = self.pop_until(t_end) {
            handler(self, at, payload);
        }
        self.now
    }
}

/// What a random stream is used for. Each purpose gets an independent
/// substream so that, e.g., strategy draws never perturb channel samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    Channel,
    MacBackoff,
    Strategy,
    Source,
    Test,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Channel => 1,
            Purpose::MacBackoff => 2,
            Purpose::Strategy => 3,
            Purpose::Source => 4,
            Purpose::Test => 15,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub purpose: Purpose,
    /// Node index, channel epoch, or any other discriminator.
    pub index: u64,
}

impl StreamId {
    pub fn new(purpose: Purpose, index: u64) -> Self {
        StreamId { purpose, index }
    }

    fn word(self) -> u64 {
        debug_assert!(self.index < 1 << 56);
        (self.purpose.tag() << 56) | (self.index & ((1 << 56) - 1))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DrawError {
    #[error("standard deviation must be finite and non-negative, got {0}")]
    BadSigma(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("uniform_int range must be at least 1")]
    EmptyRange,
    #[error("cannot choose {k} distinct items out of {n}")]
    TooMany { n: usize, k: usize },
}

/// Seeded random stream. Streams with different ids use disjoint ChaCha
/// stream words under the same key, so they never share state.
#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, id: StreamId) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id.word());
        RngStream { rng }
    }

    pub fn uniform01(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self, mean: f64, sigma: f64) -> Result<f64, DrawError> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(DrawError::BadSigma(sigma));
        }
        if sigma == 0.0 {
            return Ok(mean);
        }
        let dist = Normal::new(mean, sigma).map_err(|_| DrawError::BadSigma(sigma))?;
        Ok(dist.sample(&mut self.rng))
    }

    /// Uniform integer in `0..n`.
    pub fn uniform_int(&mut self, n: u64) -> Result<u64, DrawError> {
        if n == 0 {
            return Err(DrawError::EmptyRange);
        }
        Ok(self.rng.random_range(0..n))
    }

    pub fn bernoulli(&mut self, p: f64) -> Result<bool, DrawError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(DrawError::BadProbability(p));
        }
        // Consume one draw even at the endpoints to keep stream alignment
        // independent of p.
        let u = self.uniform01();
        Ok(u < p)
    }

    /// `k` distinct indices from `0..n`, in random order.
    pub fn choose_distinct(&mut self, n: usize, k: usize) -> Result<Vec<usize>, DrawError> {
        if k > n {
            return Err(DrawError::TooMany { n, k });
        }
        Ok(rand::seq::index::sample(&mut self.rng, n, k).into_vec())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_time_fires_before_later_time() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_micros(1), "later").unwrap();
        s.schedule(SimTime::ZERO, "now").unwrap();
        assert_eq!(s.pop().unwrap().2, "now");
        assert_eq!(s.pop().unwrap().2, "later");
    }

    #[test]
    fn ties_break_by_insertion_order() {
        let mut s = Scheduler::new();
        let t = SimTime::from_millis(5);
        for i in 0..10 {
            s.schedule(t, i).unwrap();
        }
        let order: Vec<_> = std::iter::from_fn(|| s.pop().map(|e| e.2)).collect();
        assert_eq!(order, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn cancelled_event_never_fires() {
        let mut s = Scheduler::new();
        let a = s.schedule(SimTime::from_micros(10), 'a').unwrap();
        s.schedule(SimTime::from_micros(20), 'b').unwrap();
        assert!(s.cancel(a));
        assert_eq!(s.pending(), 1);
        let mut fired = vec![];
        s.run_until(SimTime::MAX, |_, _, e| fired.push(e));
        assert_eq!(fired, vec!['b']);
    }

    #[test]
    fn cancel_after_fire_is_noop() {
        let mut s = Scheduler::new();
        let a = s.schedule(SimTime::from_micros(1), ()).unwrap();
        s.pop();
        assert!(!s.cancel(a));
        assert_eq!(s.pending(), 0);
    }

    #[test]
    fn scheduling_in_the_past_is_an_error() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::from_millis(2), ()).unwrap();
        s.pop();
        let err = s.schedule(SimTime::from_millis(1), ()).unwrap_err();
        assert!(matches!(err, ScheduleError::InThePast { .. }));
    }

    #[test]
    fn run_until_on_empty_queue_keeps_clock_at_zero() {
        let mut s: Scheduler<()> = Scheduler::new();
        let end = s.run_until(SimTime::from_secs_f64(10.0), |_, _, _| {});
        assert_eq!(end, SimTime::ZERO);
    }

    #[test]
    fn run_until_processes_only_due_events() {
        let mut s = Scheduler::new();
        for k in 1..=3 {
            s.schedule(SimTime::from_secs_f64(k as f64), k).unwrap();
        }
        let mut n = 0;
        let end = s.run_until(SimTime::from_secs_f64(2.0), |_, _, _| n += 1);
        assert_eq!(n, 2);
        assert_eq!(end, SimTime::from_secs_f64(2.0));
        assert_eq!(s.pending(), 1);
    }

    #[test]
    fn handler_can_schedule_follow_ups() {
        let mut s = Scheduler::new();
        s.schedule(SimTime::ZERO, 0u32).unwrap();
        let mut seen = vec![];
        s.run_until(SimTime::from_millis(100), |s, _, k| {
            seen.push(k);
            if k < 4 {
                s.schedule_in(SimTime::from_millis(10), k + 1);
            }
        });
        assert_eq!(seen, vec![0, 1, 2, 3, 4]);
        assert_eq!(s.now(), SimTime::from_millis(40));
    }

    #[test]
    fn bernoulli_endpoints() {
        let mut r = RngStream::new(7, StreamId::new(Purpose::Test, 0));
        for _ in 0..1000 {
            assert!(r.bernoulli(1.0).unwrap());
            assert!(!r.bernoulli(0.0).unwrap());
        }
    }

    #[test]
    fn invalid_draw_parameters_are_rejected() {
        let mut r = RngStream::new(7, StreamId::new(Purpose::Test, 0));
        assert_eq!(r.normal(0.0, -1.0), Err(DrawError::BadSigma(-1.0)));
        assert_eq!(r.bernoulli(1.5), Err(DrawError::BadProbability(1.5)));
        assert_eq!(r.uniform_int(0), Err(DrawError::EmptyRange));
        assert!(r.choose_distinct(6, 7).is_err());
    }

    #[test]
    fn uniform01_mean_converges() {
        let mut r = RngStream::new(12345, StreamId::new(Purpose::Test, 1));
        let n = 1_000_000;
        let mean = (0..n).map(|_| r.uniform01()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn distinct_stream_ids_diverge_and_replay_matches() {
        let a: Vec<u64> = {
            let mut r = RngStream::new(1, StreamId::new(Purpose::Channel, 0));
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngStream::new(1, StreamId::new(Purpose::Channel, 1));
            (0..8).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = RngStream::new(1, StreamId::new(Purpose::MacBackoff, 0));
            (0..8).map(|_| r.next_u64()).collect()
        };
        let a2: Vec<u64> = {
            let mut r = RngStream::new(1, StreamId::new(Purpose::Channel, 0));
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, a2);
    }

    #[test]
    fn time_conversions() {
        assert_eq!(SimTime::from_secs_f64(0.1).as_micros(), 100_000);
        assert_eq!(SimTime::from_secs_f64(-3.0), SimTime::ZERO);
        assert_eq!(SimTime::from_micros(1_500_000).to_string(), "1.500000");
    }
}
