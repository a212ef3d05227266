//! Domain types: energy arrivals, rate functions, power schedules, cumulative
//! curves and scenarios, plus the feasibility check over them.

mod curve;
mod feasibility;
mod file;
mod profile;
mod rate;
mod scenario;
mod schedule;
mod solution;

pub use curve::PiecewiseLinearCurve;
pub(crate) use feasibility::merged_grid;
pub use feasibility::{check_feasibility, Constraint, FeasibilityReport, Violation};
pub use profile::{cumulative_arrivals, Arrival, EnergyArrivalProfile};
pub use rate::RateFunction;
pub use scenario::{Mode, Scenario};
pub use schedule::{PowerSchedule, Segment};
pub use solution::TwoHopSolution;

/// Absolute tolerance on energy and bit slacks.
pub const DEFAULT_TOL: f64 = 1e-9;
