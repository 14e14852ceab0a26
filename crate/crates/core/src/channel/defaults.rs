//! Synthetic default channel.
//!
//! Not measured data. The walk posture is the reference: the chest sink has
//! three neighbours with non-negative mean margin (head, upper arm, navel),
//! the ankle is peripheral and mostly reachable through the thigh. The other
//! postures are derived from walk by shifting means and scaling deviations,
//! plus a few per-posture overrides (sleep hides the ankle for the whole run).

use super::{LinkMatrix, LinkStats, NodeSite, DEFAULT_COHERENCE, DEFAULT_SENSITIVITY_DBM, DEFAULT_TX_POWER_DBM};
use super::{ChannelConfig, Posture};

use NodeSite::*;

const fn l(mean: f64, std: f64) -> LinkStats {
    LinkStats::new(mean, std)
}

/// Walk posture, strict upper triangle in site order
/// head, chest, upper_arm, wrist, navel, thigh, ankle.
pub const WALK: [LinkStats; 21] = [
    // head -> chest, upper_arm, wrist, navel, thigh, ankle
    l(32.0, 3.0), l(25.0, 3.5), l(46.0, 8.5), l(52.0, 9.0), l(67.0, 9.0), l(49.0, 5.0),
    // chest -> upper_arm, wrist, navel, thigh, ankle
    l(32.0, 3.5), l(42.0, 3.0), l(36.0, 3.5), l(42.0, 1.5), l(55.0, 3.0),
    // upper_arm -> wrist, navel, thigh, ankle
    l(31.0, 7.0), l(38.0, 5.0), l(51.0, 6.0), l(69.0, 2.0),
    // wrist -> navel, thigh, ankle
    l(43.0, 8.0), l(36.0, 6.5), l(55.0, 2.0),
    // navel -> thigh, ankle
    l(30.0, 1.0), l(44.0, 2.5),
    // thigh -> ankle
    l(28.0, 4.0),
];

fn derive(mean_shift: f64, std_scale: f64, overrides: &[(NodeSite, NodeSite, LinkStats)]) -> LinkMatrix {
    let tenth = |x: f64| (x * 10.0).round() / 10.0;
    let upper = WALK.map(|s| l(tenth(s.mean_attenuation_db + mean_shift), tenth(s.std_dev_db * std_scale)));
    let mut m = LinkMatrix::from_upper(&upper);
    for &(a, b, s) in overrides {
        m.set(a, b, s);
    }
    m
}

pub fn posture_matrix(p: Posture) -> LinkMatrix {
    match p {
        Posture::Walk => LinkMatrix::from_upper(&WALK),
        Posture::Weak => derive(0.5, 0.8, &[]),
        Posture::Run => derive(1.0, 1.4, &[(Thigh, Ankle, l(39.0, 9.0))]),
        Posture::Sit => derive(-2.5, 0.9, &[(Wrist, Thigh, l(34.0, 4.0)), (Navel, Ankle, l(44.0, 5.0))]),
        Posture::Wear => derive(1.5, 1.2, &[(Chest, UpperArm, l(38.0, 6.0)), (UpperArm, Wrist, l(39.0, 7.0))]),
        Posture::Sleep => derive(
            0.0,
            0.4,
            &[
                (Thigh, Ankle, l(60.0, 1.0)),
                (Navel, Ankle, l(64.0, 1.0)),
                (Wrist, Ankle, l(62.0, 1.0)),
                (Head, Wrist, l(58.0, 1.0)),
            ],
        ),
        Posture::Lie => derive(-1.5, 0.7, &[(Head, Navel, l(41.0, 3.0))]),
    }
}

pub fn synthetic_default() -> ChannelConfig {
    ChannelConfig::new(
        Posture::ALL.map(posture_matrix),
        DEFAULT_COHERENCE,
        DEFAULT_TX_POWER_DBM,
        DEFAULT_SENSITIVITY_DBM,
    )
    .expect("synthetic default is well formed")
}
