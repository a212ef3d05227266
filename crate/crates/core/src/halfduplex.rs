//! Half-duplex relaying with a single source energy packet at `t = 0`.
//!
//! The source transmits first at constant power `E/t*` on `[0, t*]`; the relay
//! then forwards on `[t*, T]` with everything it harvested up to `t*` lumped at
//! `t*`. The switch time `t*` equates the bits the source can supply with the
//! bits the relay can forward. A backward line construction on the relay's
//! harvest staircase splits `[0, T]` into intervals on which the relay's optimal
//! consumption has a fixed shape; walking those breakpoints brackets `t*`, and
//! bisection finishes the job.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    check_feasibility, EnergyArrivalProfile, Mode, PowerSchedule, RateFunction, Scenario, TwoHopSolution,
};
use crate::scalar::Scalar;
use crate::singlehop::{max_bit_schedule, MaxBitResult};

/// Upper limit on bisection steps.
pub const MAX_BISECTIONS: usize = 200;

/// Default switch-time tolerance relative to the horizon.
pub const DEFAULT_REL_TOL_T: f64 = 1e-9;

/// Ordinate tolerance for deciding that a corner lies on a line.
const ON_LINE_TOL: f64 = 1e-12;

/// Corner of the relay staircase: an arrival instant with the energy harvested
/// strictly before it, or the closing point `(T, A(T))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Corner<S> {
    pub time: S,
    pub energy: S,
}

/// One line of the backward construction, from `origin` down to `anchor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainLine<S> {
    /// Index of the right-hand corner the line starts from.
    pub origin: usize,
    /// Index of the leftmost corner the line touches.
    pub anchor: usize,
    pub slope: S,
    /// Where the line meets the time axis.
    pub intercept: S,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakpointChain<S> {
    corners: Vec<Corner<S>>,
    lines: Vec<ChainLine<S>>,
}

impl<S: Scalar> BreakpointChain<S> {
    pub fn corners(&self) -> &[Corner<S>] {
        &self.corners
    }

    pub fn lines(&self) -> &[ChainLine<S>] {
        &self.lines
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Breakpoints in decreasing order.
    pub fn breakpoints(&self) -> Vec<S> {
        self.lines.iter().map(|l| l.intercept).collect()
    }

    /// Number of breakpoints strictly greater than `t`: `0` for `t >= t̃_1`,
    /// `i` for `t` in `[t̃_{i+1}, t̃_i)`.
    pub fn segment_index(&self, t: S) -> usize {
        self.lines.iter().take_while(|l| l.intercept > t).count()
    }

    /// The corner the relay's consumption curve heads to first when it starts
    /// transmitting at `t`.
    pub fn first_target(&self, t: S) -> Option<Corner<S>> {
        let i = self.segment_index(t);
        let idx = match self.lines.get(i) {
            Some(line) => line.origin,
            None => self.lines.last()?.anchor,
        };
        Some(self.corners[idx])
    }
}

/// Backward line construction on the relay staircase.
///
/// Starting from `(T, A(T))`, take the steepest line to an earlier corner
/// (every other corner then lies on or above it), record its time-axis
/// intercept and continue from the leftmost corner on that line until a corner
/// with no energy before it is reached.
pub fn construct_breakpoints<S: Scalar>(relay: &EnergyArrivalProfile<S>, horizon: S) -> Result<BreakpointChain<S>> {
    relay.check_horizon(horizon)?;
    let mut corners: Vec<Corner<S>> =
        relay.instants().into_iter().map(|t| Corner { time: t, energy: relay.cumulative_before(t) }).collect();
    corners.push(Corner { time: horizon, energy: relay.cumulative(horizon) });

    let mut lines = Vec::new();
    let mut cur = corners.len() - 1;
    while cur > 0 && corners[cur].energy > S::zero() {
        let c = corners[cur];
        let slope = |j: usize| (c.energy - corners[j].energy) / (c.time - corners[j].time);
        let best = (0..cur).map(slope).fold(S::neg_infinity(), S::max);
        let tol = S::lit(ON_LINE_TOL) * S::one().max(c.energy);
        let anchor = (0..cur)
            .find(|&j| (c.energy - best * (c.time - corners[j].time) - corners[j].energy).abs() <= tol)
            .expect("the steepest corner lies on its own line");
        // The line passes below the first (zero-energy) corner, so a negative
        // intercept is rounding noise.
        let intercept = (c.time - c.energy / best).max(S::zero());
        lines.push(ChainLine { origin: cur, anchor, slope: best, intercept });
        cur = anchor;
    }
    Ok(BreakpointChain { corners, lines })
}

/// Maximum bits the relay can forward on `[t_start, T]` with unlimited data.
pub fn relay_capacity<S: Scalar>(relay: &EnergyArrivalProfile<S>, rate: &RateFunction<S>, t_start: S, horizon: S) -> Result<S> {
    Ok(relay_schedule(relay, rate, t_start, horizon)?.map_or(S::zero(), |r| r.total_bits))
}

/// Relay Max-Bit schedule on `[t_start, T]`; `None` when the window is empty.
pub fn relay_schedule<S: Scalar>(
    relay: &EnergyArrivalProfile<S>,
    rate: &RateFunction<S>,
    t_start: S,
    horizon: S,
) -> Result<Option<MaxBitResult<S>>> {
    if !(t_start >= S::zero()) {
        return Err(Error::domain(format!("relay start {t_start} must be >= 0")));
    }
    if t_start >= horizon {
        return Ok(None);
    }
    max_bit_schedule(&relay.lumped_at(t_start), rate, t_start, horizon).map(Some)
}

/// Bits the source delivers by spending `energy` evenly over `[0, t]`.
/// Zero at `t = 0` (the limit from the right).
pub fn source_bits<S: Scalar>(energy: S, rate: &RateFunction<S>, t: S) -> Result<S> {
    if !(energy >= S::zero() && energy.is_finite()) {
        return Err(Error::domain(format!("source energy {energy} must be finite and >= 0")));
    }
    if !(t >= S::zero() && t.is_finite()) {
        return Err(Error::domain(format!("source duration {t} must be finite and >= 0")));
    }
    Ok(rate.bits_over(energy, t))
}

struct Balance<'a, S> {
    energy: S,
    scenario: &'a Scenario<S>,
}

impl<S: Scalar> Balance<'_, S> {
    fn supply(&self, t: S) -> S {
        self.scenario.source_rate().bits_over(self.energy, t)
    }

    fn capacity(&self, t: S) -> Result<S> {
        relay_capacity(self.scenario.relay(), self.scenario.relay_rate(), t, self.scenario.horizon())
    }

    /// `source_bits(t) − relay_capacity(t)`, non-decreasing in `t`.
    fn gap(&self, t: S) -> Result<S> {
        Ok(self.supply(t) - self.capacity(t)?)
    }
}

/// Walk the breakpoint chain from the right and return a bracket `[lo, hi]`
/// with `gap(lo) < 0 <= gap(hi)`, or an exact root.
fn bracket<S: Scalar>(chain: &BreakpointChain<S>, balance: &Balance<S>) -> Result<Bracket<S>> {
    let mut hi = balance.scenario.horizon();
    for t in chain.breakpoints().into_iter().chain(std::iter::once(S::zero())) {
        if t >= hi {
            continue;
        }
        let g = balance.gap(t)?;
        if g == S::zero() {
            return Ok(Bracket::Root(t));
        }
        if g < S::zero() {
            return Ok(Bracket::Interval(t, hi));
        }
        hi = t;
    }
    // gap(0) = −capacity(0) < 0 whenever the relay has energy, so the loop
    // always returns; reaching here means the relay cannot send anything.
    Ok(Bracket::Root(S::zero()))
}

enum Bracket<S> {
    Root(S),
    Interval(S, S),
}

/// Optimal half-duplex schedule for a single source packet at `t = 0`.
///
/// `tol_t` bounds the width of the final bisection interval (default
/// `1e-9 · T`). The returned switch time is the right end of that interval, so
/// the relay is never short of data.
pub fn solve_half_duplex_single_packet<S: Scalar>(scenario: &Scenario<S>, tol_t: Option<S>) -> Result<TwoHopSolution<S>> {
    if scenario.mode() != Mode::HalfDuplex {
        return Err(Error::invalid(format!("half-duplex solver called on a {} scenario", scenario.mode())));
    }
    let Some(energy) = scenario.single_source_packet() else {
        return Err(Error::Unsupported(
            "the exact half-duplex solver needs a single source packet at t = 0; \
             use the grid_half_duplex search (--approx) for multi-packet sources"
                .into(),
        ));
    };
    let horizon = scenario.horizon();
    let tol_t = tol_t.unwrap_or_else(|| S::lit(DEFAULT_REL_TOL_T) * horizon);
    if !(tol_t > S::zero()) {
        return Err(Error::domain(format!("switch-time tolerance must be positive, got {tol_t}")));
    }
    let tol = S::lit(crate::model::DEFAULT_TOL);

    if energy <= S::zero() || scenario.relay().total() <= S::zero() {
        let zero = PowerSchedule::zero(horizon)?;
        let feasibility = check_feasibility(&zero, &zero, scenario, tol)?;
        let curve = zero.bit_curve(scenario.source_rate());
        return Ok(TwoHopSolution {
            delivered_bits: S::zero(),
            source_schedule: zero.clone(),
            relay_schedule: zero,
            switch_time: None,
            source_bits: curve.clone(),
            relay_bits: curve,
            feasibility,
        });
    }

    let chain = construct_breakpoints(scenario.relay(), horizon)?;
    let balance = Balance { energy, scenario };
    let switch = match bracket(&chain, &balance)? {
        Bracket::Root(t) => t,
        Bracket::Interval(mut lo, mut hi) => {
            for _ in 0..MAX_BISECTIONS {
                if hi - lo <= tol_t {
                    break;
                }
                let mid = lo + (hi - lo) / S::lit(2.0);
                if mid <= lo || mid >= hi {
                    break;
                }
                let g = balance.gap(mid)?;
                if g == S::zero() {
                    hi = mid;
                    break;
                }
                if g < S::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        }
    };

    let supply = balance.supply(switch);
    let source_schedule = if switch > S::zero() {
        PowerSchedule::from_pieces(&[(S::zero(), switch, energy / switch)], horizon)?
    } else {
        PowerSchedule::zero(horizon)?
    };
    let relay = relay_schedule(scenario.relay(), scenario.relay_rate(), switch, horizon)?;
    let relay_schedule = match &relay {
        Some(r) => r.schedule.clone(),
        None => PowerSchedule::zero(horizon)?,
    };
    let capacity = relay.as_ref().map_or(S::zero(), |r| r.total_bits);
    let feasibility = check_feasibility(&source_schedule, &relay_schedule, scenario, tol)?;
    Ok(TwoHopSolution {
        delivered_bits: supply.min(capacity),
        source_bits: source_schedule.bit_curve(scenario.source_rate()),
        relay_bits: relay_schedule.bit_curve(scenario.relay_rate()),
        source_schedule,
        relay_schedule,
        switch_time: Some(switch),
        feasibility,
    })
}

/// Fixed alternating schedule versus the contiguous two-slot schedule for
/// identical hops, each node holding `energy` at `t = 0` and `T = 5·slot`.
///
/// Returns `(B1, B2)`: `B1` is what the relay forwards when the source
/// maximizes its own throughput over slots `[0,s)` and `[2s,4s)` while the
/// relay uses `[s,2s)` and `[4s,5s)`; `B2` is what it forwards when the source
/// instead spends everything in two slots at power `E/2s`.
pub fn eval_fixed_alternating_schedule<S: Scalar>(energy: S, slot: S, rate: &RateFunction<S>) -> Result<(S, S)> {
    if !(slot > S::zero() && slot.is_finite()) {
        return Err(Error::domain(format!("slot length must be positive, got {slot}")));
    }
    if !(energy >= S::zero() && energy.is_finite()) {
        return Err(Error::domain(format!("energy must be finite and >= 0, got {energy}")));
    }
    let three = S::lit(3.0);
    let two = S::lit(2.0);
    let b1 = slot * rate.rate(energy / (three * slot)) + slot * rate.rate(two * energy / (three * slot));
    let b2 = two * slot * rate.rate(energy / (two * slot));
    Ok((b1, b2))
}

/// One row of a source-energy sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint<S> {
    pub energy: S,
    pub bits: S,
    pub switch_time: Option<S>,
    /// Chain interval containing the switch time (see [`BreakpointChain::segment_index`]).
    pub segment_index: Option<usize>,
}

/// Solve the half-duplex problem for each source energy in `energies`
/// (single packet at `t = 0`), keeping the relay side of `template`.
/// Points are evaluated in parallel; output order follows `energies`.
pub fn sweep_source_energy<S: Scalar>(template: &Scenario<S>, energies: &[S], tol_t: Option<S>) -> Result<Vec<SweepPoint<S>>> {
    let chain = construct_breakpoints(template.relay(), template.horizon())?;
    let template = template.clone().with_mode(Mode::HalfDuplex);
    energies
        .par_iter()
        .map(|&energy| {
            let sc = template.clone().with_source(EnergyArrivalProfile::single(S::zero(), energy)?)?;
            let sol = solve_half_duplex_single_packet(&sc, tol_t)?;
            Ok(SweepPoint {
                energy,
                bits: sol.delivered_bits,
                switch_time: sol.switch_time,
                segment_index: sol.switch_time.map(|t| chain.segment_index(t)),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EnergyArrivalProfile as Profile;

    fn reference_relay() -> Profile<f64> {
        Profile::from_pairs([(0.0, 5.0), (7.0, 5.0), (10.0, 6.0)]).unwrap()
    }

    fn half(src: f64, relay: Profile<f64>, t: f64) -> Scenario<f64> {
        Scenario::unit(t, Profile::single(0.0, src).unwrap(), relay, Mode::HalfDuplex).unwrap()
    }

    #[test]
    fn reference_breakpoints() {
        let chain = construct_breakpoints(&reference_relay(), 11.0).unwrap();
        let bp = chain.breakpoints();
        assert_eq!(bp.len(), 3);
        assert!((bp[0] - 25.0 / 3.0).abs() < 1e-12);
        assert!((bp[1] - 4.0).abs() < 1e-12);
        assert!(bp[2].abs() < 1e-12);
        let l = chain.lines();
        assert_eq!((l[0].origin, l[0].anchor), (3, 2));
        assert_eq!((l[1].origin, l[1].anchor), (2, 1));
        assert_eq!((l[2].origin, l[2].anchor), (1, 0));
    }

    #[test]
    fn single_relay_packet_breakpoint_at_origin() {
        let chain = construct_breakpoints(&Profile::single(0.0, 3.0).unwrap(), 7.0).unwrap();
        assert_eq!(chain.breakpoints(), vec![0.0]);
    }

    #[test]
    fn dominant_late_packet() {
        let t = 10.0;
        let eps = 0.01;
        let chain = construct_breakpoints(&Profile::from_pairs([(0.0, 1.0), (t - eps, 100.0)]).unwrap(), t).unwrap();
        let bp = chain.breakpoints();
        assert_eq!(chain.lines()[0].anchor, 1);
        assert!(bp[0] < t - eps && bp[0] > t - 2.0 * eps, "{bp:?}");
    }

    #[test]
    fn collinear_corners_pick_leftmost() {
        // (0,0), (1,1), (2,2), (3,3): all on one line through the origin.
        let p = Profile::from_pairs([(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).unwrap();
        let chain = construct_breakpoints(&p, 3.0).unwrap();
        assert_eq!(chain.lines().len(), 1);
        assert_eq!(chain.lines()[0].anchor, 0);
    }

    #[test]
    fn zero_relay_energy_gives_empty_chain() {
        let chain = construct_breakpoints(&Profile::single(1.0, 0.0).unwrap(), 4.0).unwrap();
        assert!(chain.is_empty());
        assert!(construct_breakpoints(&Profile::<f64>::empty(), 4.0).unwrap().is_empty());
    }

    #[test]
    fn capacity_values() {
        let r = RateFunction::unit();
        let c5 = relay_capacity(&reference_relay(), &r, 5.0, 11.0).unwrap();
        let expect = 5.0 * 0.5 * 3f64.log2() + 0.5 * 7f64.log2();
        assert!((c5 - expect).abs() < 1e-12);
        assert!((relay_capacity(&reference_relay(), &r, 0.0, 11.0).unwrap() - 6.247860235269).abs() < 1e-9);
        assert_eq!(relay_capacity(&reference_relay(), &r, 11.0, 11.0).unwrap(), 0.0);
        assert!(relay_capacity(&reference_relay(), &r, 11.0 - 1e-9, 11.0).unwrap() < 1e-7);
    }

    #[test]
    fn source_bits_values() {
        let r = RateFunction::<f64>::unit();
        assert!((source_bits(1.0, &r, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(source_bits(0.0, &r, 4.0).unwrap(), 0.0);
        assert_eq!(source_bits(3.0, &r, 0.0).unwrap(), 0.0);
        let v: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&t| source_bits(3.0, &r, t).unwrap()).collect();
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!((v[1] - 1.3219280948873624).abs() < 1e-12);
        assert!((v[2] - 1.5).abs() < 1e-12);
        assert!(source_bits(-1.0, &r, 1.0).is_err());
    }

    #[test]
    fn symmetric_case_splits_midway() {
        let sol = solve_half_duplex_single_packet(&half(1.0, Profile::single(0.0, 1.0).unwrap(), 2.0), None).unwrap();
        assert!((sol.switch_time.unwrap() - 1.0).abs() < 1e-9);
        assert!((sol.delivered_bits - 0.5).abs() < 1e-9);
        assert!(sol.feasibility.is_feasible());
    }

    #[test]
    fn reference_profile_e_17_14() {
        let sol = solve_half_duplex_single_packet(&half(17.14, reference_relay(), 11.0), None).unwrap();
        let t = sol.switch_time.unwrap();
        assert!((t - 4.999329270087804).abs() < 1e-7, "{t}");
        assert!((sol.delivered_bits - 5.3662926863831455).abs() < 1e-7);
        assert!(sol.feasibility.is_feasible(), "{:?}", sol.feasibility.violations);
    }

    #[test]
    fn multi_packet_source_unsupported() {
        let sc = Scenario::unit(
            11.0,
            Profile::from_pairs([(0.0, 1.0), (2.0, 1.0)]).unwrap(),
            reference_relay(),
            Mode::HalfDuplex,
        )
        .unwrap();
        match solve_half_duplex_single_packet(&sc, None) {
            Err(Error::Unsupported(msg)) => assert!(msg.contains("grid_half_duplex")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dead_relay_delivers_nothing() {
        let sol = solve_half_duplex_single_packet(&half(3.0, Profile::single(0.0, 0.0).unwrap(), 4.0), None).unwrap();
        assert_eq!(sol.delivered_bits, 0.0);
        assert_eq!(sol.switch_time, None);
    }

    #[test]
    fn alternating_counterexample_values() {
        let (b1, b2) = eval_fixed_alternating_schedule(3.0, 1.0, &RateFunction::<f64>::unit()).unwrap();
        assert!((b1 - 1.292_481_250_360_578).abs() < 1e-12);
        assert!((b2 - 1.3219280948873624).abs() < 1e-12);
        assert!(b1 < b2);
        let (b1, b2) = eval_fixed_alternating_schedule(1e-12, 1.0, &RateFunction::<f64>::unit()).unwrap();
        assert!(b1 < 1e-11 && b2 < 1e-11 && (b2 - b1).abs() < 1e-20);
        assert!(eval_fixed_alternating_schedule(1.0, 0.0, &RateFunction::unit()).is_err());
    }

    #[test]
    fn f32_solver_runs() {
        let relay = EnergyArrivalProfile::<f32>::single(0.0, 1.0).unwrap();
        let sc = Scenario::unit(2.0f32, EnergyArrivalProfile::single(0.0, 1.0).unwrap(), relay, Mode::HalfDuplex).unwrap();
        let sol = solve_half_duplex_single_packet(&sc, None).unwrap();
        assert!((sol.delivered_bits - 0.5).abs() < 1e-5);
    }
}
