//! Convex reformulation of the forwarding problem, solved with a log-barrier
//! Newton method.
//!
//! On the merged grid of arrival instants and bit-arrival breakpoints the
//! optimal power is constant per segment, so the problem becomes: choose rates
//! `ρ_k >= 0` maximizing `Σ δ_k ρ_k` subject to linear cumulative-bit limits
//! `Σ_{k<=j} δ_k ρ_k <= B(x_{j+1})` and convex cumulative-energy limits
//! `Σ_{k<=j} δ_k g(ρ_k) <= A(x_{j+1}⁻)`, where `g` is the inverse rate map.
//! This is an independent route to the value produced by
//! [`forward_max_bits`](super::forward_max_bits).

use crate::error::Result;
use crate::model::{merged_grid, EnergyArrivalProfile, PiecewiseLinearCurve, RateFunction};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierOutcome<S> {
    /// Objective value at the returned point (a feasible lower bound).
    pub bits: S,
    /// Segment boundaries of the merged grid.
    pub grid: Vec<S>,
    /// Rate per segment.
    pub rates: Vec<S>,
    /// Upper bound on `optimum − bits` from the central-path duality gap.
    pub duality_gap: S,
    pub newton_steps: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct BarrierOptions {
    pub gap: f64,
    pub growth: f64,
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self { gap: 1e-10, growth: 8.0, max_newton: 200 }
    }
}

struct Problem<'a, S> {
    rate: &'a RateFunction<S>,
    len: Vec<S>,
    bits_cap: Vec<S>,
    energy_cap: Vec<S>,
}

impl<S: Scalar> Problem<'_, S> {
    /// Slacks (ρ, data, energy); `None` if any is non-positive.
    fn slacks(&self, rho: &[S]) -> Option<(Vec<S>, Vec<S>)> {
        let n = rho.len();
        let (mut d, mut e) = (S::zero(), S::zero());
        let mut ds = Vec::with_capacity(n);
        let mut es = Vec::with_capacity(n);
        for k in 0..n {
            if !(rho[k] > S::zero()) {
                return None;
            }
            d += self.len[k] * rho[k];
            e += self.len[k] * self.rate.power_for_rate(rho[k]);
            let (sd, se) = (self.bits_cap[k] - d, self.energy_cap[k] - e);
            if !(sd > S::zero() && se > S::zero()) {
                return None;
            }
            ds.push(sd);
            es.push(se);
        }
        Some((ds, es))
    }

    fn barrier(&self, rho: &[S], t: S) -> Option<S> {
        let (ds, es) = self.slacks(rho)?;
        let obj: S = rho.iter().zip(&self.len).map(|(r, l)| *r * *l).sum();
        let logs: S = rho.iter().chain(&ds).chain(&es).map(|v| v.ln()).sum();
        Some(-t * obj - logs)
    }
}

fn cholesky_solve<S: Scalar>(mut a: Vec<S>, mut b: Vec<S>, n: usize) -> Option<Vec<S>> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > S::zero()) {
            return None;
        }
        let diag = diag.sqrt();
        a[j * n + j] = diag;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / diag;
        }
    }
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * n + k] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in i + 1..n {
            v -= a[k * n + i] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    Some(b)
}

/// Solve the forwarding problem by the barrier method.
pub fn forward_max_bits_barrier<S: Scalar>(
    bit_arrivals: &PiecewiseLinearCurve<S>,
    profile: &EnergyArrivalProfile<S>,
    rate: &RateFunction<S>,
    deadline: S,
    opts: BarrierOptions,
) -> Result<BarrierOutcome<S>> {
    let grid = merged_grid(deadline, bit_arrivals.xs().chain(profile.instants()));
    let n_all = grid.len() - 1;
    let bits_cap: Vec<S> = grid[1..].iter().map(|&x| bit_arrivals.eval(x)).collect();
    let energy_cap: Vec<S> = grid[1..].iter().map(|&x| profile.cumulative_before(x)).collect();
    // Segments that end where either budget is still zero are pinned at zero.
    let first_free = (0..n_all)
        .rev()
        .find(|&j| bits_cap[j] <= S::zero() || energy_cap[j] <= S::zero())
        .map_or(0, |j| j + 1);
    let mut rates = vec![S::zero(); n_all];
    if first_free == n_all {
        return Ok(BarrierOutcome { bits: S::zero(), grid, rates, duality_gap: S::zero(), newton_steps: 0 });
    }

    let prob = Problem {
        rate,
        len: grid[first_free..].windows(2).map(|w| w[1] - w[0]).collect(),
        bits_cap: bits_cap[first_free..].to_vec(),
        energy_cap: energy_cap[first_free..].to_vec(),
    };
    let n = prob.len.len();
    let half = S::lit(0.5);

    let mut init = S::infinity();
    let mut acc = S::zero();
    for j in 0..n {
        acc += prob.len[j];
        init = init
            .min(half * prob.bits_cap[j] / acc)
            .min(rate.rate(half * prob.energy_cap[j] / acc));
    }
    let mut rho = vec![init; n];

    let m = S::lit((3 * n) as f64);
    let total_len: S = prob.len.iter().copied().sum();
    let mut t = m / (total_len * rate.rate(S::one()).max(S::tie_eps()));
    let growth = S::lit(opts.growth);
    let mut steps = 0;
    let mut hess = vec![S::zero(); n * n];

    loop {
        for _ in 0..opts.max_newton {
            let (ds, es) = prob.slacks(&rho).expect("iterate stays strictly feasible");
            // Suffix sums over constraints j >= k.
            let mut inv_d = vec![S::zero(); n + 1];
            let mut inv_d2 = vec![S::zero(); n + 1];
            let mut inv_e = vec![S::zero(); n + 1];
            let mut inv_e2 = vec![S::zero(); n + 1];
            for j in (0..n).rev() {
                inv_d[j] = inv_d[j + 1] + ds[j].recip();
                inv_d2[j] = inv_d2[j + 1] + (ds[j] * ds[j]).recip();
                inv_e[j] = inv_e[j + 1] + es[j].recip();
                inv_e2[j] = inv_e2[j + 1] + (es[j] * es[j]).recip();
            }
            let g1: Vec<S> = rho.iter().map(|&r| rate.power_for_rate_derivative(r)).collect();
            let g2: Vec<S> = rho.iter().map(|&r| rate.power_for_rate_second_derivative(r)).collect();
            let grad: Vec<S> = (0..n)
                .map(|k| {
                    let l = prob.len[k];
                    -t * l - rho[k].recip() + l * inv_d[k] + l * g1[k] * inv_e[k]
                })
                .collect();
            for k in 0..n {
                for l in 0..=k {
                    let (lk, ll) = (prob.len[k], prob.len[l]);
                    let mut h = lk * ll * inv_d2[k] + lk * g1[k] * ll * g1[l] * inv_e2[k];
                    if k == l {
                        h += (rho[k] * rho[k]).recip() + lk * g2[k] * inv_e[k];
                    }
                    hess[k * n + l] = h;
                    hess[l * n + k] = h;
                }
            }
            let neg: Vec<S> = grad.iter().map(|g| -*g).collect();
            let Some(step) = cholesky_solve(hess.clone(), neg, n) else { break };
            let decrement: S = -grad.iter().zip(&step).map(|(g, s)| *g * *s).sum::<S>();
            steps += 1;
            if decrement * half <= S::lit(1e-14) {
                break;
            }
            let f0 = prob.barrier(&rho, t).expect("feasible");
            let mut alpha = S::one();
            let mut moved = false;
            for _ in 0..80 {
                let trial: Vec<S> = rho.iter().zip(&step).map(|(r, s)| *r + alpha * *s).collect();
                if let Some(f) = prob.barrier(&trial, t) {
                    if f <= f0 - S::lit(0.25) * alpha * decrement {
                        rho = trial;
                        moved = true;
                        break;
                    }
                }
                alpha *= half;
            }
            if !moved {
                break;
            }
        }
        if m / t <= S::lit(opts.gap) {
            break;
        }
        t *= growth;
    }

    rates[first_free..].copy_from_slice(&rho);
    let bits = rates.iter().zip(grid.windows(2)).map(|(r, w)| *r * (w[1] - w[0])).sum();
    Ok(BarrierOutcome { bits, grid, rates, duality_gap: m / t, newton_steps: steps })
}
