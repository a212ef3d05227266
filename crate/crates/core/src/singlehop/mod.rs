//! Point-to-point offline power allocation.
//!
//! [`max_bit_schedule`] maximizes the bits sent by a deadline under energy
//! causality alone; its cumulative consumption is the taut string below the
//! harvest staircase. [`forward_max_bits`] adds a cumulative data budget (the
//! relay can only send bits it has received) and transmits at the highest
//! power both budgets allow.

pub mod convex;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{EnergyArrivalProfile, PiecewiseLinearCurve, PowerSchedule, RateFunction};
use crate::scalar::Scalar;

/// Output of the single-hop solvers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxBitResult<S> {
    /// Schedule on `[0, deadline]`, zero before the start time.
    pub schedule: PowerSchedule<S>,
    pub total_bits: S,
    pub bit_curve: PiecewiseLinearCurve<S>,
}

impl<S: Scalar> MaxBitResult<S> {
    fn from_pieces(pieces: &[(S, S, S)], deadline: S, rate: &RateFunction<S>) -> Result<Self> {
        let schedule = PowerSchedule::from_pieces(pieces, deadline)?.coalesced();
        let total_bits = schedule.total_bits(rate);
        let bit_curve = schedule.bit_curve(rate);
        Ok(Self { schedule, total_bits, bit_curve })
    }
}

/// Consumption by `at` must not exceed `cap`.
#[derive(Clone, Copy, Debug)]
struct Epoch<S> {
    at: S,
    cap: S,
}

/// Energy checkpoints after `start`: every arrival instant in `(start, deadline)`
/// with the energy harvested strictly before it, then the deadline itself.
fn energy_epochs<S: Scalar>(profile: &EnergyArrivalProfile<S>, start: S, deadline: S) -> Vec<Epoch<S>> {
    let mut out: Vec<Epoch<S>> = profile
        .instants()
        .into_iter()
        .filter(|&x| x > start && x < deadline)
        .map(|x| Epoch { at: x, cap: profile.cumulative_before(x) })
        .collect();
    out.push(Epoch { at: deadline, cap: profile.cumulative_before(deadline) });
    out
}

/// Smallest ratio `(cap − level)/(at − cursor)` over `epochs`, clamped at zero.
/// Near-ties resolve to the latest epoch.
fn min_slope<S: Scalar>(epochs: &[Epoch<S>], cursor: S, level: S) -> (S, usize) {
    let slopes: Vec<S> = epochs.iter().map(|e| ((e.cap - level) / (e.at - cursor)).max(S::zero())).collect();
    let best = slopes.iter().copied().fold(S::infinity(), S::min);
    let cutoff = best + S::tie_eps() * S::one().max(best.abs());
    let idx = slopes.iter().rposition(|&s| s <= cutoff).expect("at least one epoch");
    (best, idx)
}

fn check_window<S: Scalar>(start: S, deadline: S) -> Result<()> {
    if !(start.is_finite() && deadline.is_finite() && start >= S::zero()) {
        return Err(Error::domain(format!("window [{start}, {deadline}] must be finite with start >= 0")));
    }
    if !(start < deadline) {
        return Err(Error::domain(format!("start {start} must precede deadline {deadline}")));
    }
    Ok(())
}

/// Offline Max-Bit schedule on `[start, deadline]`.
///
/// Energy that arrived at or before `start` is available at `start`; packets at
/// or after the deadline are unusable. From the current point the schedule
/// transmits at the smallest average power any future checkpoint allows, then
/// restarts from the (latest) checkpoint attaining it, where consumption
/// touches the harvest staircase.
pub fn max_bit_schedule<S: Scalar>(
    profile: &EnergyArrivalProfile<S>,
    rate: &RateFunction<S>,
    start: S,
    deadline: S,
) -> Result<MaxBitResult<S>> {
    check_window(start, deadline)?;
    let epochs = energy_epochs(profile, start, deadline);
    let mut pieces = Vec::with_capacity(epochs.len());
    let (mut cursor, mut used, mut next) = (start, S::zero(), 0);
    while next < epochs.len() {
        let (power, k) = min_slope(&epochs[next..], cursor, used);
        let epoch = epochs[next + k];
        pieces.push((cursor, epoch.at, power));
        cursor = epoch.at;
        used = epoch.cap;
        next += k + 1;
    }
    MaxBitResult::from_pieces(&pieces, deadline, rate)
}

/// Maximize bits sent by `deadline` when the cumulative bits sent may never
/// exceed `bit_arrivals` and energy is causal.
///
/// At each step the power is the smaller of the energy-limited power (the
/// Max-Bit slope) and the data-limited power (the power whose rate matches the
/// shallowest chord to the bit-arrival curve); the step runs to the checkpoint
/// that binds. Power therefore changes only at arrival instants or
/// bit-arrival breakpoints.
pub fn forward_max_bits<S: Scalar>(
    bit_arrivals: &PiecewiseLinearCurve<S>,
    profile: &EnergyArrivalProfile<S>,
    rate: &RateFunction<S>,
    deadline: S,
) -> Result<MaxBitResult<S>> {
    check_window(S::zero(), deadline)?;
    let epochs = energy_epochs(profile, S::zero(), deadline);
    let data: Vec<Epoch<S>> = bit_arrivals
        .xs()
        .filter(|&x| x > S::zero() && x < deadline)
        .chain(std::iter::once(deadline))
        .map(|x| Epoch { at: x, cap: bit_arrivals.eval(x) })
        .collect();

    let mut pieces = Vec::new();
    let (mut cursor, mut used, mut sent) = (S::zero(), S::zero(), S::zero());
    let (mut next_e, mut next_d) = (0, 0);
    while cursor < deadline {
        while epochs[next_e].at <= cursor {
            next_e += 1;
        }
        while data[next_d].at <= cursor {
            next_d += 1;
        }
        let (energy_power, ke) = min_slope(&epochs[next_e..], cursor, used);
        let (data_rate, kd) = min_slope(&data[next_d..], cursor, sent);
        let data_power = rate.power_for_rate(data_rate);
        if energy_power <= data_power {
            let e = epochs[next_e + ke];
            pieces.push((cursor, e.at, energy_power));
            sent = (sent + (e.at - cursor) * rate.rate(energy_power)).min(bit_arrivals.eval(e.at));
            used = e.cap;
            cursor = e.at;
        } else {
            let d = data[next_d + kd];
            pieces.push((cursor, d.at, data_power));
            used += data_power * (d.at - cursor);
            sent = d.cap;
            cursor = d.at;
        }
    }
    MaxBitResult::from_pieces(&pieces, deadline, rate)
}
