//! Seeded discrete-event simulator for broadcast in a 7-node body area
//! network.

pub mod channel;
pub mod frame;
pub mod harness;
pub mod mac;
pub mod metrics;
pub mod network;
pub mod sim;
pub mod strategies;
