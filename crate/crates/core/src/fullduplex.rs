//! Full-duplex two-hop solver.
//!
//! The source runs Max-Bit on its own harvest profile, ignoring the relay. The
//! resulting cumulative bit curve is the relay's data supply, which the relay
//! forwards with [`forward_max_bits`].

use crate::error::{Error, Result};
use crate::model::{check_feasibility, Mode, PowerSchedule, Scenario, TwoHopSolution};
use crate::scalar::Scalar;
use crate::singlehop::{forward_max_bits, max_bit_schedule, MaxBitResult};

pub fn solve_full_duplex<S: Scalar>(scenario: &Scenario<S>, tol: S) -> Result<TwoHopSolution<S>> {
    if scenario.mode() != Mode::FullDuplex {
        return Err(Error::invalid(format!("full-duplex solver called on a {} scenario", scenario.mode())));
    }
    let horizon = scenario.horizon();
    let source = max_bit_schedule(scenario.source(), scenario.source_rate(), S::zero(), horizon)?;
    let relay = forward_max_bits(&source.bit_curve, scenario.relay(), scenario.relay_rate(), horizon)?;
    let feasibility = check_feasibility(&source.schedule, &relay.schedule, scenario, tol)?;
    Ok(TwoHopSolution {
        delivered_bits: relay.total_bits,
        source_bits: source.bit_curve,
        relay_bits: relay.bit_curve,
        source_schedule: source.schedule,
        relay_schedule: relay.schedule,
        switch_time: None,
        feasibility,
    })
}

/// Best relay forwarding for an arbitrary source schedule.
pub fn relay_response<S: Scalar>(scenario: &Scenario<S>, source_schedule: &PowerSchedule<S>) -> Result<MaxBitResult<S>> {
    if source_schedule.horizon() != scenario.horizon() {
        return Err(Error::domain("source schedule horizon differs from the scenario horizon"));
    }
    let supply = source_schedule.bit_curve(scenario.source_rate());
    forward_max_bits(&supply, scenario.relay(), scenario.relay_rate(), scenario.horizon())
}
