use std::fmt;

use serde::Serialize;

use super::{EnergyArrivalProfile, Mode, PowerSchedule, Scenario};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which constraint of the feasible set was broken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Constraint {
    SourceEnergy,
    RelayEnergy,
    DataCausality,
    HalfDuplexOverlap,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::SourceEnergy => "source energy causality",
            Constraint::RelayEnergy => "relay energy causality",
            Constraint::DataCausality => "data causality",
            Constraint::HalfDuplexOverlap => "half-duplex overlap",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Violation<S> {
    pub constraint: Constraint,
    /// Time at which the violation was observed.
    pub at: S,
    /// Amount by which the constraint is exceeded.
    pub magnitude: S,
}

/// Outcome of [`check_feasibility`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport<S> {
    pub violations: Vec<Violation<S>>,
    pub min_source_energy_slack: S,
    pub min_relay_energy_slack: S,
    pub min_data_slack: S,
    pub terminal_source_energy_slack: S,
    pub terminal_relay_energy_slack: S,
    pub terminal_data_slack: S,
    /// Instants at which the constraints were evaluated.
    pub checkpoints: usize,
}

impl<S: Scalar> FeasibilityReport<S> {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn min_slack(&self) -> S {
        self.min_source_energy_slack.min(self.min_relay_energy_slack).min(self.min_data_slack)
    }
}

/// Merged, sorted, de-duplicated checkpoint grid on `[0, horizon]`.
pub(crate) fn merged_grid<S: Scalar>(horizon: S, sources: impl IntoIterator<Item = S>) -> Vec<S> {
    let mut pts: Vec<S> = sources.into_iter().filter(|&x| x >= S::zero() && x <= horizon).collect();
    pts.push(S::zero());
    pts.push(horizon);
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    pts.dedup();
    pts
}

fn energy_slack<S: Scalar>(profile: &EnergyArrivalProfile<S>, x: S, consumed: S) -> S {
    let cap = if x > S::zero() { profile.cumulative_before(x) } else { profile.cumulative(x) };
    cap - consumed
}

/// Verify both schedules against energy causality at each node, data causality
/// at the relay and, in half-duplex mode, time-disjoint transmission.
///
/// All cumulative curves are linear between consecutive points of the merged
/// grid (schedule boundaries and arrival instants), so checking the grid is
/// exact; segment midpoints are added for the overlap test.
pub fn check_feasibility<S: Scalar>(
    source_sched: &PowerSchedule<S>,
    relay_sched: &PowerSchedule<S>,
    scenario: &Scenario<S>,
    tol: S,
) -> Result<FeasibilityReport<S>> {
    let horizon = scenario.horizon();
    if source_sched.horizon() != horizon || relay_sched.horizon() != horizon {
        return Err(Error::domain(format!(
            "schedule horizons ({}, {}) do not match scenario horizon {horizon}",
            source_sched.horizon(),
            relay_sched.horizon()
        )));
    }
    let grid = merged_grid(
        horizon,
        source_sched
            .boundaries()
            .into_iter()
            .chain(relay_sched.boundaries())
            .chain(scenario.source().instants())
            .chain(scenario.relay().instants()),
    );

    let src_energy = source_sched.energy_curve();
    let rel_energy = relay_sched.energy_curve();
    let src_bits = source_sched.bit_curve(scenario.source_rate());
    let rel_bits = relay_sched.bit_curve(scenario.relay_rate());

    let mut violations = Vec::new();
    let inf = S::infinity();
    let (mut min_se, mut min_re, mut min_d) = (inf, inf, inf);

    for &x in &grid {
        let se = energy_slack(scenario.source(), x, src_energy.eval(x));
        let re = energy_slack(scenario.relay(), x, rel_energy.eval(x));
        let ds = src_bits.eval(x) - rel_bits.eval(x);
        for (slack, min, kind) in [
            (se, &mut min_se, Constraint::SourceEnergy),
            (re, &mut min_re, Constraint::RelayEnergy),
            (ds, &mut min_d, Constraint::DataCausality),
        ] {
            *min = min.min(slack);
            if slack < -tol {
                violations.push(Violation { constraint: kind, at: x, magnitude: -slack });
            }
        }
    }

    if scenario.mode() == Mode::HalfDuplex {
        for w in grid.windows(2) {
            let mid = (w[0] + w[1]) / S::lit(2.0);
            let (ps, pr) = (source_sched.power_at(mid), relay_sched.power_at(mid));
            if ps > tol && pr > tol {
                violations.push(Violation { constraint: Constraint::HalfDuplexOverlap, at: mid, magnitude: ps * pr });
            }
        }
    }

    Ok(FeasibilityReport {
        violations,
        min_source_energy_slack: min_se,
        min_relay_energy_slack: min_re,
        min_data_slack: min_d,
        terminal_source_energy_slack: scenario.source().cumulative(horizon) - src_energy.eval(horizon),
        terminal_relay_energy_slack: scenario.relay().cumulative(horizon) - rel_energy.eval(horizon),
        terminal_data_slack: src_bits.eval(horizon) - rel_bits.eval(horizon),
        checkpoints: grid.len(),
    })
}
