use approx::assert_abs_diff_eq;
use ehrelay::fullduplex::{relay_response, solve_full_duplex};
use ehrelay::halfduplex::{construct_breakpoints, solve_half_duplex_single_packet};
use ehrelay::oracle::{
    check_scenario, dp_relay_forward, dp_single_hop, random_feasible_schedule, random_profile, random_scenario,
    FuzzConfig,
};
use ehrelay::singlehop::{forward_max_bits, max_bit_schedule};
use ehrelay::{EnergyArrivalProfile, MaxBitResult, Mode, RateFunction};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn assert_max_bit_shape(profile: &EnergyArrivalProfile, res: &MaxBitResult) {
    let segs = res.schedule.segments();
    let instants = profile.instants();
    let energy = res.schedule.energy_curve();
    for w in segs.windows(2) {
        assert!(w[1].power >= w[0].power - 1e-12, "power drops at {}", w[1].start);
        let x = w[1].start;
        assert!(instants.iter().any(|&t| (t - x).abs() < 1e-12), "change at {x} is not an arrival");
        let cap = profile.cumulative_before(x);
        assert!((energy.eval(x) - cap).abs() <= 1e-9 * cap.max(1.0), "no staircase touch at {x}");
    }
    assert_abs_diff_eq!(res.schedule.total_energy(), profile.total(), epsilon = 1e-9 * profile.total().max(1.0));
}

#[test]
fn solvers_match_oracles_on_seeded_instances() {
    let mut rng = StdRng::seed_from_u64(2024);
    let cfg = FuzzConfig::default();
    for i in 0..30 {
        let mode = if i % 2 == 0 { Mode::FullDuplex } else { Mode::HalfDuplex };
        let sc = random_scenario(&mut rng, mode, &cfg);
        for c in check_scenario(&sc, 30, 400, 0.0).unwrap() {
            assert!(c.pass, "instance {i}: {c:?}");
        }
    }
}

#[test]
fn oracle_value_never_beats_solver() {
    let mut rng = StdRng::seed_from_u64(99);
    let cfg = FuzzConfig::default();
    for _ in 0..30 {
        let sc = random_scenario(&mut rng, Mode::FullDuplex, &cfg);
        let t = sc.horizon();
        let src = max_bit_schedule(sc.source(), sc.source_rate(), 0.0, t).unwrap();
        let dp = dp_single_hop(sc.source(), sc.source_rate(), t, 10, 300).unwrap();
        assert!(dp.value <= src.total_bits + 1e-9);
        let fwd = forward_max_bits(&src.bit_curve, sc.relay(), sc.relay_rate(), t).unwrap();
        let dp = dp_relay_forward(&src.bit_curve, sc.relay(), sc.relay_rate(), t, 10, 300).unwrap();
        assert!(dp.value <= fwd.total_bits + 1e-9);
    }
}

#[test]
fn no_fuzzed_source_schedule_beats_full_duplex() {
    let mut rng = StdRng::seed_from_u64(5);
    let cfg = FuzzConfig::default();
    for _ in 0..20 {
        let sc = random_scenario(&mut rng, Mode::FullDuplex, &cfg);
        let best = solve_full_duplex(&sc, 1e-9).unwrap().delivered_bits;
        for _ in 0..10 {
            let s = random_feasible_schedule(&mut rng, sc.source(), sc.horizon());
            let got = relay_response(&sc, &s).unwrap().total_bits;
            assert!(best - got >= -1e-9, "fuzzed schedule delivers {got} > {best}");
        }
    }
}

#[test]
fn half_duplex_solutions_are_disjoint_and_feasible() {
    let mut rng = StdRng::seed_from_u64(17);
    let cfg = FuzzConfig::default();
    for _ in 0..50 {
        let sc = random_scenario(&mut rng, Mode::HalfDuplex, &cfg);
        let sol = solve_half_duplex_single_packet(&sc, None).unwrap();
        assert!(sol.feasibility.is_feasible(), "{:?}", sol.feasibility.violations);
        assert!(sol.feasibility.min_slack() >= -1e-9);
        let mut grid = sol.source_schedule.boundaries();
        grid.extend(sol.relay_schedule.boundaries());
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        for w in grid.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            assert_eq!(sol.source_schedule.power_at(mid) * sol.relay_schedule.power_at(mid), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn max_bit_has_staircase_structure(seed in any::<u64>(), horizon in 1.0f64..10.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let p = random_profile(&mut rng, horizon, &FuzzConfig::default());
        let res = max_bit_schedule(&p, &RateFunction::unit(), 0.0, horizon).unwrap();
        assert_max_bit_shape(&p, &res);
    }

    #[test]
    fn forwarding_ends_tight(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sc: ehrelay::Scenario = random_scenario(&mut rng, Mode::FullDuplex, &FuzzConfig::default());
        let sol = solve_full_duplex(&sc, 1e-9).unwrap();
        prop_assert!(sol.feasibility.is_feasible());
        prop_assert!(sol.feasibility.min_slack() >= -1e-9);
        let energy_left = sc.relay().total() - sol.relay_schedule.total_energy();
        let data_left = sol.source_bits.last().1 - sol.relay_bits.last().1;
        prop_assert!(energy_left.abs() <= 1e-9 * sc.relay().total().max(1.0) || data_left.abs() <= 1e-9);
    }

    #[test]
    fn chain_lines_stay_below_the_staircase(seed in any::<u64>(), horizon in 1.0f64..10.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let p = random_profile(&mut rng, horizon, &FuzzConfig { max_packets: 6, ..FuzzConfig::default() });
        let chain = construct_breakpoints(&p, horizon).unwrap();
        let corners = chain.corners();
        let bps = chain.breakpoints();
        for w in bps.windows(2) {
            prop_assert!(w[0] > w[1]);
        }
        for l in chain.lines() {
            prop_assert!(l.intercept >= 0.0 && l.intercept <= horizon);
            for c in &corners[..=l.origin] {
                let line = l.slope * (c.time - l.intercept);
                prop_assert!(c.energy >= line - 1e-9 * c.energy.max(1.0));
            }
        }
        if let Some(last) = chain.lines().last() {
            prop_assert_eq!(corners[last.anchor].energy, 0.0);
        }
    }
}
