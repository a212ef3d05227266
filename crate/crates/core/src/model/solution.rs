use serde::Serialize;

use super::{FeasibilityReport, PiecewiseLinearCurve, PowerSchedule};

/// Result of a two-hop solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoHopSolution<S> {
    /// Bits delivered to the destination by the deadline.
    pub delivered_bits: S,
    pub source_schedule: PowerSchedule<S>,
    pub relay_schedule: PowerSchedule<S>,
    /// End of the source transmission interval (half-duplex only).
    pub switch_time: Option<S>,
    /// Cumulative bits sent by the source.
    pub source_bits: PiecewiseLinearCurve<S>,
    /// Cumulative bits forwarded by the relay.
    pub relay_bits: PiecewiseLinearCurve<S>,
    pub feasibility: FeasibilityReport<S>,
}
