use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EnergyArrivalProfile, RateFunction};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relay duplexing mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "full", alias = "full-duplex", alias = "full_duplex")]
    FullDuplex,
    #[serde(rename = "half", alias = "half-duplex", alias = "half_duplex")]
    HalfDuplex,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::FullDuplex => "full-duplex",
            Mode::HalfDuplex => "half-duplex",
        })
    }
}

/// A complete two-hop problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<S> {
    horizon: S,
    source: EnergyArrivalProfile<S>,
    relay: EnergyArrivalProfile<S>,
    source_rate: RateFunction<S>,
    relay_rate: RateFunction<S>,
    mode: Mode,
}

impl<S: Scalar> Scenario<S> {
    pub fn new(
        horizon: S,
        source: EnergyArrivalProfile<S>,
        relay: EnergyArrivalProfile<S>,
        source_rate: RateFunction<S>,
        relay_rate: RateFunction<S>,
        mode: Mode,
    ) -> Result<Self> {
        if !(horizon.is_finite() && horizon > S::zero()) {
            return Err(Error::invalid(format!("horizon T must be positive and finite, got {horizon}")));
        }
        source
            .check_horizon(horizon)
            .map_err(|e| Error::invalid(format!("source profile: {e}")))?;
        relay
            .check_horizon(horizon)
            .map_err(|e| Error::invalid(format!("relay profile: {e}")))?;
        Ok(Self { horizon, source, relay, source_rate, relay_rate, mode })
    }

    /// Unit-gain, base-2 hops.
    pub fn unit(
        horizon: S,
        source: EnergyArrivalProfile<S>,
        relay: EnergyArrivalProfile<S>,
        mode: Mode,
    ) -> Result<Self> {
        Self::new(horizon, source, relay, RateFunction::unit(), RateFunction::unit(), mode)
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    pub fn source(&self) -> &EnergyArrivalProfile<S> {
        &self.source
    }

    pub fn relay(&self) -> &EnergyArrivalProfile<S> {
        &self.relay
    }

    pub fn source_rate(&self) -> &RateFunction<S> {
        &self.source_rate
    }

    pub fn relay_rate(&self) -> &RateFunction<S> {
        &self.relay_rate
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Replace the source profile (re-validated against the horizon).
    pub fn with_source(self, source: EnergyArrivalProfile<S>) -> Result<Self> {
        Self::new(self.horizon, source, self.relay, self.source_rate, self.relay_rate, self.mode)
    }

    /// Energy of the single source packet at `t = 0`, if the source profile has
    /// that shape. Zero-amount packets are ignored; an empty source yields `Some(0)`.
    pub fn single_source_packet(&self) -> Option<S> {
        let mut energy = S::zero();
        for a in self.source.arrivals() {
            if a.amount > S::zero() {
                if a.instant != S::zero() {
                    return None;
                }
                energy += a.amount;
            }
        }
        Some(energy)
    }
}
