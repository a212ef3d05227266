use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A single harvested energy packet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Arrival<S> {
    pub instant: S,
    pub amount: S,
}

impl<S> Arrival<S> {
    pub fn new(instant: S, amount: S) -> Self {
        Self { instant, amount }
    }
}

/// Timestamped energy packets, sorted by instant.
///
/// The cumulative harvest `A(t)` is right-continuous: a packet arriving at `t`
/// is usable at `t`.
#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct EnergyArrivalProfile<S> {
    arrivals: Vec<Arrival<S>>,
}

impl<S: Scalar> EnergyArrivalProfile<S> {
    pub fn new(arrivals: Vec<Arrival<S>>) -> Result<Self> {
        for (i, a) in arrivals.iter().enumerate() {
            if !a.instant.is_finite() || a.instant < S::zero() {
                return Err(Error::invalid(format!("arrival {i}: instant {} must be finite and >= 0", a.instant)));
            }
            if !a.amount.is_finite() || a.amount < S::zero() {
                return Err(Error::invalid(format!("arrival {i}: amount {} must be finite and >= 0", a.amount)));
            }
            if i > 0 && a.instant < arrivals[i - 1].instant {
                return Err(Error::invalid(format!(
                    "arrival {i}: instant {} precedes previous instant {}",
                    a.instant,
                    arrivals[i - 1].instant
                )));
            }
        }
        Ok(Self { arrivals })
    }

    /// Build from `(instant, amount)` pairs.
    pub fn from_pairs<I: IntoIterator<Item = (S, S)>>(pairs: I) -> Result<Self> {
        Self::new(pairs.into_iter().map(|(t, e)| Arrival::new(t, e)).collect())
    }

    pub fn empty() -> Self {
        Self { arrivals: Vec::new() }
    }

    pub fn single(instant: S, amount: S) -> Result<Self> {
        Self::new(vec![Arrival::new(instant, amount)])
    }

    pub fn arrivals(&self) -> &[Arrival<S>] {
        &self.arrivals
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    /// `A(t)`: energy of every packet with instant `<= t`.
    pub fn cumulative(&self, t: S) -> S {
        self.arrivals.iter().take_while(|a| a.instant <= t).map(|a| a.amount).sum()
    }

    /// `A(t⁻)`: energy of every packet strictly before `t`.
    pub fn cumulative_before(&self, t: S) -> S {
        self.arrivals.iter().take_while(|a| a.instant < t).map(|a| a.amount).sum()
    }

    pub fn total(&self) -> S {
        self.arrivals.iter().map(|a| a.amount).sum()
    }

    /// Distinct arrival instants in increasing order.
    pub fn instants(&self) -> Vec<S> {
        let mut out: Vec<S> = Vec::with_capacity(self.arrivals.len());
        for a in &self.arrivals {
            if out.last().is_none_or(|&last| last < a.instant) {
                out.push(a.instant);
            }
        }
        out
    }

    /// Merge every packet with instant `<= start` into one packet at `start`.
    pub fn lumped_at(&self, start: S) -> Self {
        let head = self.cumulative(start);
        let mut arrivals = vec![Arrival::new(start, head)];
        arrivals.extend(self.arrivals.iter().copied().filter(|a| a.instant > start));
        Self { arrivals }
    }

    /// Return a copy with every amount multiplied by `factor` (>= 0).
    pub fn scaled(&self, factor: S) -> Self {
        Self {
            arrivals: self.arrivals.iter().map(|a| Arrival::new(a.instant, a.amount * factor)).collect(),
        }
    }

    /// Check that every instant lies in `[0, horizon)`.
    pub fn check_horizon(&self, horizon: S) -> Result<()> {
        match self.arrivals.iter().position(|a| a.instant >= horizon) {
            Some(i) => Err(Error::invalid(format!(
                "arrival {i} at {} is not before the horizon {horizon}",
                self.arrivals[i].instant
            ))),
            None => Ok(()),
        }
    }
}

/// `A(t)` with a domain check against the horizon.
pub fn cumulative_arrivals<S: Scalar>(profile: &EnergyArrivalProfile<S>, t: S, horizon: S) -> Result<S> {
    if !(t >= S::zero() && t <= horizon) {
        return Err(Error::domain(format!("time {t} outside [0, {horizon}]")));
    }
    Ok(profile.cumulative(t))
}
