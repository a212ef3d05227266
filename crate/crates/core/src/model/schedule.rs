use serde::Serialize;

use super::{PiecewiseLinearCurve, RateFunction};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Constant transmit power on `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment<S> {
    pub start: S,
    pub end: S,
    pub power: S,
}

impl<S: Scalar> Segment<S> {
    pub fn new(start: S, end: S, power: S) -> Self {
        Self { start, end, power }
    }

    pub fn duration(&self) -> S {
        self.end - self.start
    }

    pub fn energy(&self) -> S {
        self.power * self.duration()
    }
}

/// Piecewise-constant transmit power covering `[0, horizon]` exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerSchedule<S> {
    segments: Vec<Segment<S>>,
    horizon: S,
}

impl<S: Scalar> PowerSchedule<S> {
    pub fn new(segments: Vec<Segment<S>>, horizon: S) -> Result<Self> {
        if !(horizon.is_finite() && horizon > S::zero()) {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        let Some(first) = segments.first() else {
            return Err(Error::invalid("schedule needs at least one segment"));
        };
        if first.start != S::zero() {
            return Err(Error::invalid(format!("schedule must start at 0, got {}", first.start)));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.end > s.start) {
                return Err(Error::invalid(format!("segment {i} has non-positive length")));
            }
            if !(s.power.is_finite() && s.power >= S::zero()) {
                return Err(Error::invalid(format!("segment {i} power {} must be finite and >= 0", s.power)));
            }
            if i > 0 && segments[i - 1].end != s.start {
                return Err(Error::invalid(format!("segment {i} is not contiguous with its predecessor")));
            }
        }
        if segments.last().map(|s| s.end) != Some(horizon) {
            return Err(Error::invalid("segments must end exactly at the horizon"));
        }
        Ok(Self { segments, horizon })
    }

    /// Zero power over `[0, horizon]`.
    pub fn zero(horizon: S) -> Result<Self> {
        Self::new(vec![Segment::new(S::zero(), horizon, S::zero())], horizon)
    }

    /// Build from a list of `(start, end, power)` pieces, dropping empty ones
    /// and filling gaps with zero power.
    pub fn from_pieces(pieces: &[(S, S, S)], horizon: S) -> Result<Self> {
        let mut segments: Vec<Segment<S>> = Vec::with_capacity(pieces.len() + 1);
        let mut cursor = S::zero();
        for &(start, end, power) in pieces {
            if start > cursor {
                segments.push(Segment::new(cursor, start, S::zero()));
                cursor = start;
            }
            if end > cursor {
                segments.push(Segment::new(cursor, end, power));
                cursor = end;
            }
        }
        if cursor < horizon {
            segments.push(Segment::new(cursor, horizon, S::zero()));
        }
        Self::new(segments, horizon)
    }

    pub fn segments(&self) -> &[Segment<S>] {
        &self.segments
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    /// Segment boundaries, including 0 and the horizon.
    pub fn boundaries(&self) -> Vec<S> {
        let mut out: Vec<S> = self.segments.iter().map(|s| s.start).collect();
        out.push(self.horizon);
        out
    }

    /// Right-continuous power; the final segment also covers the horizon itself.
    pub fn power_at(&self, t: S) -> S {
        let idx = self.segments.partition_point(|s| s.end <= t);
        self.segments.get(idx).or(self.segments.last()).map_or(S::zero(), |s| {
            if t >= s.start {
                s.power
            } else {
                S::zero()
            }
        })
    }

    pub fn total_energy(&self) -> S {
        self.segments.iter().map(Segment::energy).sum()
    }

    pub fn total_bits(&self, rate: &RateFunction<S>) -> S {
        self.segments.iter().map(|s| s.duration() * rate.rate(s.power)).sum()
    }

    fn cumulative_curve(&self, per_unit: impl Fn(S) -> S) -> PiecewiseLinearCurve<S> {
        let mut pts = Vec::with_capacity(self.segments.len() + 1);
        let mut acc = S::zero();
        pts.push((S::zero(), acc));
        for s in &self.segments {
            acc += s.duration() * per_unit(s.power);
            pts.push((s.end, acc));
        }
        PiecewiseLinearCurve::new(pts).expect("cumulative curve of a valid schedule")
    }

    /// `∫₀ᵗ P(τ)dτ` as a curve.
    pub fn energy_curve(&self) -> PiecewiseLinearCurve<S> {
        self.cumulative_curve(|p| p)
    }

    /// `∫₀ᵗ r(P(τ))dτ` as a curve.
    pub fn bit_curve(&self, rate: &RateFunction<S>) -> PiecewiseLinearCurve<S> {
        self.cumulative_curve(|p| rate.rate(p))
    }

    /// Coalesce neighbouring segments with identical power.
    pub fn coalesced(&self) -> Self {
        let mut out: Vec<Segment<S>> = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            match out.last_mut() {
                Some(prev) if prev.power == s.power => prev.end = s.end,
                _ => out.push(*s),
            }
        }
        Self { segments: out, horizon: self.horizon }
    }

    /// Multiply every power by `factor >= 0`.
    pub fn scaled(&self, factor: S) -> Self {
        Self {
            segments: self.segments.iter().map(|s| Segment::new(s.start, s.end, s.power * factor)).collect(),
            horizon: self.horizon,
        }
    }
}
