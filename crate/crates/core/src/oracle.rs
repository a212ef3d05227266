//! Brute-force validators for the analytic solvers.
//!
//! The DP oracles quantize energy into `Q` equal quanta and search every
//! per-slot allocation on a slot grid made of `M` equal slots refined by every
//! arrival instant (and bit-arrival breakpoint). Each oracle value is the
//! bit count of an explicit feasible schedule, so it is a lower bound on the
//! optimum; the reported `bound` caps how far below the optimum it can be.
//!
//! Rounding the optimal per-slot energy down to whole quanta loses at most one
//! quantum per slot, and a quantum is worth at most `q·r'(0)` bits, giving
//! `K·q·r'(0)` for `K` slots. Clipping against a data budget can cost one more
//! quantum step, hence `(K + 1)·q·r'(0)` for forwarding.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fullduplex::solve_full_duplex;
use crate::halfduplex::{relay_capacity, solve_half_duplex_single_packet};
use crate::model::{
    check_feasibility, merged_grid, EnergyArrivalProfile, Mode, PiecewiseLinearCurve, PowerSchedule, RateFunction,
    Scenario, TwoHopSolution,
};
use crate::scalar::Scalar;
use crate::singlehop::{forward_max_bits, max_bit_schedule};

/// Largest accepted slot count.
pub const MAX_SLOTS: usize = 2000;
/// Largest accepted quanta count.
pub const MAX_QUANTA: usize = 1000;

/// A DP oracle value with its certificate schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleValue<S> {
    pub value: S,
    /// `optimum − value <= bound`.
    pub bound: S,
    /// Number of slots after refinement.
    pub slots: usize,
    pub schedule: PowerSchedule<S>,
}

/// Best switch time found by [`grid_half_duplex`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridOutcome<S> {
    pub t_best: S,
    pub bits: S,
    /// `optimum − bits <= bound`, from the grid cell where supply overtakes capacity.
    pub bound: S,
}

fn check_caps(slots: usize, quanta: usize) -> Result<()> {
    if slots < 1 || quanta < 2 {
        return Err(Error::domain(format!("oracle needs M >= 1 and Q >= 2, got M = {slots}, Q = {quanta}")));
    }
    if slots > MAX_SLOTS || quanta > MAX_QUANTA {
        return Err(Error::ResourceCap(format!(
            "M = {slots}, Q = {quanta} exceeds the desk-scale caps M <= {MAX_SLOTS}, Q <= {MAX_QUANTA}; \
             the DP costs O(M·Q²), so lower M first"
        )));
    }
    Ok(())
}

/// `M` equal slots on `[0, horizon]` refined by `keys`; uniform points closer
/// than `1e-9·horizon` to a key are dropped in favour of the key.
fn slot_grid<S: Scalar>(horizon: S, slots: usize, keys: impl IntoIterator<Item = S>) -> Vec<S> {
    let keys = merged_grid(horizon, keys);
    let near = S::lit(1e-9) * horizon;
    let uniform = (1..slots).map(|i| horizon * S::lit(i as f64) / S::lit(slots as f64)).filter(|&x| {
        let idx = keys.partition_point(|&k| k < x);
        let close = |j: usize| keys.get(j).is_some_and(|&k| (k - x).abs() <= near);
        !(close(idx) || (idx > 0 && close(idx - 1)))
    });
    let extra: Vec<S> = uniform.collect();
    merged_grid(horizon, keys.into_iter().chain(extra))
}

fn quantized_dp<S: Scalar>(
    grid: &[S],
    profile: &EnergyArrivalProfile<S>,
    data: Option<&PiecewiseLinearCurve<S>>,
    rate: &RateFunction<S>,
    quanta: usize,
) -> Result<OracleValue<S>> {
    let horizon = *grid.last().expect("non-empty grid");
    let slots = grid.len() - 1;
    let total = profile.cumulative_before(horizon);
    let extra = if data.is_some() { 1 } else { 0 };
    if total <= S::zero() {
        return Ok(OracleValue { value: S::zero(), bound: S::zero(), slots, schedule: PowerSchedule::zero(horizon)? });
    }
    let q = total / S::lit(quanta as f64);
    let slack = S::lit(1e-12);

    let neg = S::neg_infinity();
    let mut value = vec![neg; quanta + 1];
    value[0] = S::zero();
    let mut choices: Vec<Vec<u32>> = Vec::with_capacity(slots);
    let mut rt = vec![S::zero(); quanta + 1];

    for w in grid.windows(2) {
        let (start, end) = (w[0], w[1]);
        let len = end - start;
        let cap = ((profile.cumulative_before(end) / q) + S::lit(1e-9)).floor().to_usize().unwrap_or(0).min(quanta);
        let bit_cap = data.map(|c| c.eval(end));
        for (j, v) in rt.iter_mut().enumerate() {
            *v = rate.bits_over(q * S::lit(j as f64), len);
        }
        let mut next = vec![neg; quanta + 1];
        let mut pick = vec![0u32; quanta + 1];
        for s in 0..=cap {
            for j in 0..=s {
                let prev = value[s - j];
                if prev == neg {
                    continue;
                }
                let cand = prev + rt[j];
                if let Some(b) = bit_cap {
                    if cand > b + slack * S::one().max(b) {
                        continue;
                    }
                }
                if cand > next[s] {
                    next[s] = cand;
                    pick[s] = j as u32;
                }
            }
        }
        value = next;
        choices.push(pick);
    }

    let (best_state, best) = value
        .iter()
        .enumerate()
        .fold((0, neg), |acc, (s, &v)| if v > acc.1 { (s, v) } else { acc });
    let mut pieces = vec![(S::zero(), S::zero(), S::zero()); slots];
    let mut s = best_state;
    for k in (0..slots).rev() {
        let j = choices[k][s] as usize;
        let len = grid[k + 1] - grid[k];
        pieces[k] = (grid[k], grid[k + 1], q * S::lit(j as f64) / len);
        s -= j;
    }
    let bound = S::lit((slots + extra) as f64) * q * rate.slope_at_zero();
    Ok(OracleValue { value: best, bound, slots, schedule: PowerSchedule::from_pieces(&pieces, horizon)? })
}

/// Quantized DP for the single-hop Max-Bit problem on `[0, horizon]`.
pub fn dp_single_hop<S: Scalar>(
    profile: &EnergyArrivalProfile<S>,
    rate: &RateFunction<S>,
    horizon: S,
    slots: usize,
    quanta: usize,
) -> Result<OracleValue<S>> {
    check_caps(slots, quanta)?;
    if !(horizon > S::zero()) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    let grid = slot_grid(horizon, slots, profile.instants());
    quantized_dp(&grid, profile, None, rate, quanta)
}

/// Quantized DP for forwarding under a cumulative data budget.
pub fn dp_relay_forward<S: Scalar>(
    bit_arrivals: &PiecewiseLinearCurve<S>,
    profile: &EnergyArrivalProfile<S>,
    rate: &RateFunction<S>,
    horizon: S,
    slots: usize,
    quanta: usize,
) -> Result<OracleValue<S>> {
    check_caps(slots, quanta)?;
    if !(horizon > S::zero()) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    let grid = slot_grid(horizon, slots, profile.instants().into_iter().chain(bit_arrivals.xs()));
    quantized_dp(&grid, profile, Some(bit_arrivals), rate, quanta)
}

/// Exhaustive search over switch times `t = i·T/t_grid`.
///
/// At each `t` the source runs Max-Bit on `[0, t]` (so multi-packet sources are
/// accepted) and the relay runs Max-Bit on `[t, T]` with its energy up to `t`
/// lumped; the delivered bits are the smaller of the two.
pub fn grid_half_duplex<S: Scalar>(scenario: &Scenario<S>, t_grid: usize) -> Result<GridOutcome<S>> {
    if t_grid < 2 {
        return Err(Error::domain(format!("t_grid must be >= 2, got {t_grid}")));
    }
    if t_grid > MAX_SLOTS * 50 {
        return Err(Error::ResourceCap(format!("t_grid = {t_grid} exceeds {}", MAX_SLOTS * 50)));
    }
    let horizon = scenario.horizon();
    let evals: Vec<(S, S, S)> = (0..=t_grid)
        .into_par_iter()
        .map(|i| {
            let t = if i == t_grid { horizon } else { horizon * S::lit(i as f64) / S::lit(t_grid as f64) };
            let supply = if t > S::zero() {
                max_bit_schedule(scenario.source(), scenario.source_rate(), S::zero(), t)?.total_bits
            } else {
                S::zero()
            };
            let capacity = relay_capacity(scenario.relay(), scenario.relay_rate(), t, horizon)?;
            Ok((t, supply, capacity))
        })
        .collect::<Result<_>>()?;

    let (mut t_best, mut bits) = (S::zero(), S::neg_infinity());
    for &(t, s, r) in &evals {
        let v = s.min(r);
        if v > bits {
            t_best = t;
            bits = v;
        }
    }
    let bound = match evals.iter().position(|&(_, s, r)| s >= r) {
        Some(i) if i > 0 => (evals[i].1.min(evals[i - 1].2) - bits).max(S::zero()),
        _ => S::zero(),
    };
    Ok(GridOutcome { t_best, bits, bound })
}

/// Schedules realizing the best grid switch time.
///
/// The source runs Max-Bit on `[0, t]`; the relay forwards the resulting bit
/// curve with its energy up to `t` lumped at `t`, so it never outruns the data.
pub fn grid_half_duplex_solution<S: Scalar>(
    scenario: &Scenario<S>,
    t_grid: usize,
    tol: S,
) -> Result<(GridOutcome<S>, TwoHopSolution<S>)> {
    let outcome = grid_half_duplex(scenario, t_grid)?;
    let horizon = scenario.horizon();
    let t = outcome.t_best;
    let source_schedule = if t > S::zero() {
        let src = max_bit_schedule(scenario.source(), scenario.source_rate(), S::zero(), t)?;
        let pieces: Vec<_> = src.schedule.segments().iter().map(|s| (s.start, s.end, s.power)).collect();
        PowerSchedule::from_pieces(&pieces, horizon)?
    } else {
        PowerSchedule::zero(horizon)?
    };
    let source_bits = source_schedule.bit_curve(scenario.source_rate());
    let relay_schedule = if t < horizon {
        forward_max_bits(&source_bits, &scenario.relay().lumped_at(t), scenario.relay_rate(), horizon)?.schedule
    } else {
        PowerSchedule::zero(horizon)?
    };
    let relay_bits = relay_schedule.bit_curve(scenario.relay_rate());
    let feasibility = check_feasibility(&source_schedule, &relay_schedule, scenario, tol)?;
    let solution = TwoHopSolution {
        delivered_bits: relay_bits.last().1,
        source_schedule,
        relay_schedule,
        switch_time: Some(t),
        source_bits,
        relay_bits,
        feasibility,
    };
    Ok((outcome, solution))
}

/// Shape of randomly generated instances.
#[derive(Clone, Copy, Debug)]
pub struct FuzzConfig {
    pub max_packets: usize,
    pub max_horizon: f64,
    pub max_energy: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self { max_packets: 4, max_horizon: 10.0, max_energy: 10.0 }
    }
}

/// Random profile with a first packet at `t = 0` and instants in `[0, horizon)`.
pub fn random_profile<S: Scalar, R: Rng + ?Sized>(rng: &mut R, horizon: f64, cfg: &FuzzConfig) -> EnergyArrivalProfile<S> {
    let n = rng.gen_range(1..=cfg.max_packets.max(1));
    let mut instants: Vec<f64> = (1..n).map(|_| rng.gen_range(0.0..horizon)).collect();
    instants.push(0.0);
    instants.sort_by(f64::total_cmp);
    EnergyArrivalProfile::from_pairs(
        instants.into_iter().map(|t| (S::lit(t), S::lit(rng.gen_range(0.05..cfg.max_energy)))),
    )
    .expect("sorted, non-negative")
}

/// Random unit-gain base-2 scenario. Half-duplex scenarios get a single
/// source packet at `t = 0`.
pub fn random_scenario<S: Scalar, R: Rng + ?Sized>(rng: &mut R, mode: Mode, cfg: &FuzzConfig) -> Scenario<S> {
    let horizon = rng.gen_range(1.0..cfg.max_horizon.max(1.0 + 1e-9));
    let source = match mode {
        Mode::FullDuplex => random_profile(rng, horizon, cfg),
        Mode::HalfDuplex => {
            EnergyArrivalProfile::single(S::zero(), S::lit(rng.gen_range(0.05..cfg.max_energy))).expect("valid")
        }
    };
    let relay = random_profile(rng, horizon, cfg);
    Scenario::unit(S::lit(horizon), source, relay, mode).expect("instants before horizon")
}

/// Random schedule that respects energy causality for `profile`.
pub fn random_feasible_schedule<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    profile: &EnergyArrivalProfile<S>,
    horizon: S,
) -> PowerSchedule<S> {
    let extra = rng.gen_range(0..4);
    let h = horizon.as_f64();
    let grid = merged_grid(
        horizon,
        profile.instants().into_iter().chain((0..extra).map(|_| S::lit(rng.gen_range(0.0..h)))),
    );
    let mut used = S::zero();
    let mut pieces = Vec::with_capacity(grid.len());
    for w in grid.windows(2) {
        let cap = profile.cumulative_before(w[1]);
        let room = (cap - used).max(S::zero());
        let u: f64 = match rng.gen_range(0..10) {
            0..=2 => 1.0,
            3..=4 => 0.0,
            _ => rng.gen_range(0.0..1.0),
        };
        let spend = room * S::lit(u);
        pieces.push((w[0], w[1], spend / (w[1] - w[0])));
        used += spend;
    }
    PowerSchedule::from_pieces(&pieces, horizon).expect("grid covers the horizon")
}

/// One solver-versus-oracle comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck<S> {
    pub label: String,
    pub solver: S,
    pub oracle: S,
    pub bound: S,
    pub pass: bool,
}

impl<S: Scalar> OracleCheck<S> {
    fn new(label: &str, solver: S, oracle: S, bound: S) -> Self {
        let floor = S::lit(1e-9);
        let pass = solver >= oracle - floor && solver - oracle <= bound + floor;
        Self { label: label.to_string(), solver, oracle, bound, pass }
    }
}

/// Run every applicable oracle against the solvers for `scenario`.
///
/// `bias` is added to each solver value before comparison; a non-zero bias is a
/// negative control that should make the check fail.
pub fn check_scenario<S: Scalar>(scenario: &Scenario<S>, slots: usize, quanta: usize, bias: S) -> Result<Vec<OracleCheck<S>>> {
    check_caps(slots, quanta)?;
    let horizon = scenario.horizon();
    let mut out = Vec::new();
    match scenario.mode() {
        Mode::FullDuplex => {
            let src = max_bit_schedule(scenario.source(), scenario.source_rate(), S::zero(), horizon)?;
            let dp = dp_single_hop(scenario.source(), scenario.source_rate(), horizon, slots, quanta)?;
            out.push(OracleCheck::new("source max-bit", src.total_bits + bias, dp.value, dp.bound));
            let fwd = forward_max_bits(&src.bit_curve, scenario.relay(), scenario.relay_rate(), horizon)?;
            let dp = dp_relay_forward(&src.bit_curve, scenario.relay(), scenario.relay_rate(), horizon, slots, quanta)?;
            out.push(OracleCheck::new("relay forwarding", fwd.total_bits + bias, dp.value, dp.bound));
            let sol = solve_full_duplex(scenario, S::lit(crate::model::DEFAULT_TOL))?;
            out.push(OracleCheck::new("full-duplex delivered", sol.delivered_bits + bias, dp.value, dp.bound));
        }
        Mode::HalfDuplex => {
            let rel = max_bit_schedule(scenario.relay(), scenario.relay_rate(), S::zero(), horizon)?;
            let dp = dp_single_hop(scenario.relay(), scenario.relay_rate(), horizon, slots, quanta)?;
            out.push(OracleCheck::new("relay ceiling", rel.total_bits + bias, dp.value, dp.bound));
            let grid = grid_half_duplex(scenario, slots)?;
            let sol = solve_half_duplex_single_packet(scenario, None)?;
            out.push(OracleCheck::new("half-duplex delivered", sol.delivered_bits + bias, grid.bits, grid.bound));
        }
    }
    Ok(out)
}
