mod common;

use common::contracts::*;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use wban_sim::sim::SimTime;
use wban_sim::strategies::StrategyKind;

fn fixed(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0xc0de), failure_persistence: None, ..ProptestConfig::default() }
}

#[test]
fn plain_flooding_sends_each_message_at_most_once_per_node() {
    let mut total = 0;
    for seed in 1..=20 {
        for rate in [None, Some(20.0)] {
            total += plain_flooding_once(seed, rate).unwrap();
        }
    }
    assert!(total > 100, "the runs should forward something");
}

#[test]
fn flooding_does_resend_duplicates() {
    // Guards the fixture above: the same count on Flooding exceeds one.
    let counts = data_tx_per_node(StrategyKind::Flooding, 1, None);
    assert!(counts.values().any(|&c| c > 1));
}

proptest! {
    #![proptest_config(fixed(300))]

    #[test]
    fn optflood_never_sends_a_full_copy_and_cpt_local_only_grows(
        me in 0usize..7,
        copies in prop::collection::vec((0usize..7, 0u8..128, 1u32..9), 1..30),
    ) {
        let r = optflood_sequence(site(me), &copies);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn tabu_covered_set_only_grows(me in 0usize..7, src in 0usize..7, bits in 0u8..128, ttl in 2u32..9) {
        let r = tabu_step(site(me), site(src), bits, ttl);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn mbp_below_delta_forwards_at_once(delta in 1u32..5, hops in 0u32..8, ttl in 2u32..9, timer_ms in 1u64..1000) {
        let r = mbp_step(delta, hops, ttl, SimTime::from_millis(timer_ms));
        prop_assert!(r.is_ok(), "{:?}", r);
    }
}

#[test]
fn mbp_below_delta_forwards_at_once_in_a_full_run() {
    for seed in 1..=10 {
        assert!(mbp_immediate_in_run(seed).unwrap() > 0);
    }
}

#[test]
fn probabilistic_decreasing_uses_halving_probabilities() {
    for seed in 0..200 {
        probabilistic_decreasing(seed).unwrap();
    }
}

#[test]
fn ebp_chest_holds_until_three_fresh_neighbours() {
    ebp_chest_holds().unwrap();
}
