mod common;

use std::sync::Arc;

use wban_sim::channel::defaults::synthetic_default;
use wban_sim::channel::{sample_attenuation, ChannelConfig, ChannelState, LinkMatrix, LinkStats, NodeSite, Posture};
use wban_sim::frame::{BroadcastMessage, Frame, FrameBody, FrameId};
use wban_sim::mac::MacParams;
use wban_sim::network::{simulate, RunConfig};
use wban_sim::sim::{Purpose, RngStream, SimTime, StreamId};
use wban_sim::strategies::{BroadcastStrategy, NodeCtx, ProbabilisticFlooding, StrategyKind};

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

#[test]
fn uniform_draws_are_centred() {
    let mut r = RngStream::new(1, StreamId::new(Purpose::Test, 0));
    let m = (0..1_000_000).map(|_| r.uniform01()).sum::<f64>() / 1e6;
    assert!((m - 0.5).abs() < 0.002, "{m}");
}

#[test]
fn attenuation_sampler_matches_link_statistics() {
    let mut r = RngStream::new(2, StreamId::new(Purpose::Test, 0));
    let xs: Vec<f64> = (0..100_000).map(|_| sample_attenuation(LinkStats::new(45.0, 5.0), &mut r)).collect();
    let (m, s) = mean_std(&xs);
    assert!((m - 45.0).abs() < 0.1, "mean {m}");
    assert!((s - 5.0).abs() < 0.05, "std {s}");
}

#[test]
fn epoch_samples_match_link_statistics() {
    // The per-epoch realizations of one pair are independent draws.
    let mut m = LinkMatrix::from_upper(&[LinkStats::new(50.0, 2.0); 21]);
    m.set(NodeSite::Chest, NodeSite::Navel, LinkStats::new(45.0, 5.0));
    let mut ch = ChannelState::new(Arc::new(ChannelConfig::uniform(m).unwrap()), Posture::Walk, 3);
    let xs: Vec<f64> = (0..100_000).map(|e| ch.attenuation_in_epoch(NodeSite::Chest, NodeSite::Navel, e)).collect();
    let (mean, s) = mean_std(&xs);
    assert!((mean - 45.0).abs() < 0.1, "mean {mean}");
    assert!((s - 5.0).abs() < 0.05, "std {s}");
}

#[test]
fn constant_probability_forwarder_forwards_half() {
    let mut s = ProbabilisticFlooding::constant(0.5);
    let mut r = RngStream::new(4, StreamId::new(Purpose::Test, 0));
    let mut forwarded = 0;
    for seq in 0..10_000u32 {
        let msg = BroadcastMessage::new(NodeSite::Chest, seq, 8);
        let frame = Frame { id: FrameId(seq as u64), src: NodeSite::Chest, body: FrameBody::Data(msg) };
        let mut ctx = NodeCtx { node: NodeSite::Navel, now: SimTime::ZERO, rng: &mut r };
        forwarded += s.on_receive(&mut ctx, &frame).iter().filter(|a| a.as_data().is_some()).count();
    }
    let f = forwarded as f64 / 1e4;
    assert!((f - 0.5).abs() <= 0.02, "{f}");
}

#[test]
fn two_node_collisions_match_enumeration() {
    let p = MacParams::default();
    let expected = common::enumerated_collision_probability(&p);
    assert!((expected - 0.125).abs() < 1e-12);
    let hits = (0..10_000u64).filter(|&seed| common::two_node_trial(&p, seed)).count();
    let observed = hits as f64 / 1e4;
    assert!((observed - expected).abs() <= 0.02, "observed {observed}, enumerated {expected}");
}

/// A 50-seed mean sits within three standard errors of a 500-seed reference.
/// A fixed tolerance in points would depend on how noisy the channel is.
#[test]
fn fifty_seeds_track_a_long_reference() {
    let cfg = RunConfig::new(Arc::new(synthetic_default()), StrategyKind::Flooding);
    let runs: Vec<f64> = (1..=500).map(|s| simulate(&cfg, s).record.coverage_pct()).collect();
    let short = runs[..50].iter().sum::<f64>() / 50.0;
    let (long, sd) = mean_std(&runs);
    let se = sd / 50f64.sqrt();
    assert!((short - long).abs() <= 3.0 * se, "50 seeds {short}, 500 seeds {long}, se {se}");
}
