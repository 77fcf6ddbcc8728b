//! Agent-based simulator of urban commuter mode choice.
//!
//! Agents choose between car, motorcycle and public transit with a
//! CONSUMAT decision engine (repeat, imitate, inquire, deliberate), are
//! linked by a homophilous preferential-attachment network, and live in a
//! congestion-aware city whose public-transit supply can be reshaped by
//! policy interventions. The [`calibration`] module holds the statistics
//! used to parameterise and validate the model and [`harness`] the Monte
//! Carlo replication protocol and file outputs.

pub mod calibration;
pub mod consumat;
pub mod dist;
pub mod environment;
pub mod error;
pub mod harness;
pub mod network;
pub mod policy;
pub mod population;
pub mod rng;

pub use consumat::{ModeId, StrategyKind};
pub use error::{Error, Result};
pub use population::{Agent, AttributeId, SocioEconomicGroup};
