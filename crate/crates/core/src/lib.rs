//! Distributed beam scheduling for multi-operator mm-Wave downlinks.
//!
//! BSs sharing one band pick per-slot transmit powers by playing a
//! non-cooperative game whose prices come from Lyapunov virtual queues. The
//! crate also simulates p-persistent and CSMA/CA baselines and an
//! interference-free reference, epoch by epoch, from a seeded scenario.

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod game;
pub mod lyapunov;
pub mod mac;
pub mod rng;
pub mod topology;
pub mod trace;
pub mod units;

pub use channel::{AntennaPattern, FadingParams, LinkGain, NoiseModel};
pub use config::{default_config_text, emit_config, load_config, parse_config, ConfigFile};
pub use engine::{
    run, sweep, BlockRecord, EpochRecord, Protocol, QueueUnits, RunTrace, Scenario, SimConfig,
    Simulation, SweepAxis, SweepValue,
};
pub use error::{Error, Result};
pub use game::{parallel_update, GameInstance, NeResult, QMatrix};
pub use lyapunov::VirtualQueues;
pub use mac::{ContentionConfig, TransmissionSchedule};
pub use topology::{LayoutParams, Placement, Point};
