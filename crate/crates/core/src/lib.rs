//! Discrete-event Monte-Carlo simulator of IEEE 802.11ax MU downlink-TCP
//! TXOP scheduling under unreliable channels.
//!
//! The AP saturates a group of stations with TCP Data segments over MU
//! downlink PPDUs and collects TCP Acks over one MU uplink PPDU per TXOP.
//! Three TXOP-formation strategies trade goodput against TXOP length, the
//! per-MPDU segment count adapts to the DL bit error rate, and the UL MCS
//! is chosen so acks never need retransmission.

pub mod aggregation;
pub mod airtime;
pub mod cli;
pub mod config;
pub mod error;
pub mod mcs_select;
pub mod phy_tables;
pub mod sim_engine;
pub mod txop;

pub use error::{Result, SimError};
pub use sim_engine::{
    simulate, simulate_traced, sweep, Metrics, ScenarioConfig, SimulationOutput, SweepAxis,
    SweepPoint, TableSet,
};
pub use txop::SchedulingStrategy;
