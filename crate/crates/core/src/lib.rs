//! Offline transmission scheduling for two-hop relay links whose source and
//! relay harvest energy in discrete packets.
//!
//! The goal is to maximize the bits delivered to the destination by a deadline
//! `T`, given every arrival instant and amount in advance.
//!
//! * [`model`]: energy profiles, rate functions, schedules, scenarios and the
//!   feasibility check.
//! * [`singlehop`]: Max-Bit for one link, and forwarding under a data supply.
//! * [`fullduplex`]: the full-duplex relay solver.
//! * [`halfduplex`]: the half-duplex solver for a single source packet.
//! * [`oracle`]: brute-force validators (quantized DP, switch-time grid search,
//!   random feasible schedules).
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fullduplex;
pub mod halfduplex;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod singlehop;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type RateFunction = model::RateFunction<f64>;
pub type EnergyArrivalProfile = model::EnergyArrivalProfile<f64>;
pub type PowerSchedule = model::PowerSchedule<f64>;
pub type PiecewiseLinearCurve = model::PiecewiseLinearCurve<f64>;
pub type Scenario = model::Scenario<f64>;
pub type TwoHopSolution = model::TwoHopSolution<f64>;
pub type FeasibilityReport = model::FeasibilityReport<f64>;
pub type MaxBitResult = singlehop::MaxBitResult<f64>;
pub type BreakpointChain = halfduplex::BreakpointChain<f64>;

pub use model::{Arrival, Mode, DEFAULT_TOL};
