//! Command-line front end for `ehrelay`.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid scenario or arguments,
//! 3 infeasible, unsupported, or a failed oracle check.

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ehrelay::halfduplex::{construct_breakpoints, solve_half_duplex_single_packet, sweep_source_energy, SweepPoint};
use ehrelay::model::Segment;
use ehrelay::oracle::{check_scenario, grid_half_duplex_solution, random_scenario, FuzzConfig, OracleCheck};
use ehrelay::{fullduplex, Error, Mode, PowerSchedule, Scenario, TwoHopSolution};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ehrelay", version, about = "Offline-optimal schedules for energy-harvesting two-hop relays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one scenario and print the delivered bits and schedules.
    Solve(SolveArgs),
    /// Sweep the source energy of a half-duplex scenario and emit CSV.
    Sweep(SweepArgs),
    /// Compare the solvers against the brute-force oracles.
    OracleCheck(OracleArgs),
    /// Print the relay breakpoint chain used by the half-duplex solver.
    Breakpoints(BreakpointArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    Half,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => Mode::FullDuplex,
            ModeArg::Half => Mode::HalfDuplex,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Override the mode stored in the scenario file.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Feasibility tolerance; also the switch-time bisection width.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Fall back to the switch-time grid search for multi-packet half-duplex sources.
    #[arg(long)]
    pub approx: bool,
    /// Grid size for --approx.
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    /// Write both schedules as CSV (hop,start,end,power).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write cumulative energy and bit curves as CSV.
    #[arg(long)]
    pub curves: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Source energies as E_MIN:E_MAX:STEPS (evenly spaced, inclusive).
    #[arg(long)]
    pub sweep: SweepRange,
    #[arg(long)]
    pub tol: Option<f64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Scenario to check; without it a seeded batch of random scenarios is checked.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Slot count and energy quanta as M,Q.
    #[arg(long, default_value = "50,500")]
    pub oracle: OracleSize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random scenarios in batch mode.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Restrict batch mode to one mode (alternates otherwise).
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Added to every solver value before comparison (negative control).
    #[arg(long, default_value_t = 0.0, hide = true, allow_negative_numbers = true)]
    pub bias: f64,
}

#[derive(Debug, Args)]
pub struct BreakpointArgs {
    #[arg(long)]
    pub scenario: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn energies(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.max } else { self.min + (self.max - self.min) * i as f64 / last })
            .collect()
    }
}

impl FromStr for SweepRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected E_MIN:E_MAX:STEPS, got {s:?}"));
        };
        let min: f64 = a.trim().parse().map_err(|e| format!("E_MIN {a:?}: {e}"))?;
        let max: f64 = b.trim().parse().map_err(|e| format!("E_MAX {b:?}: {e}"))?;
        let steps: usize = n.trim().parse().map_err(|e| format!("STEPS {n:?}: {e}"))?;
        if !(min > 0.0 && min.is_finite()) {
            return Err(format!("E_MIN must be > 0, got {min}"));
        }
        if !(max >= min && max.is_finite()) {
            return Err(format!("E_MAX must be finite and >= E_MIN, got {max}"));
        }
        if steps < 2 {
            return Err(format!("STEPS must be >= 2, got {steps}"));
        }
        Ok(Self { min, max, steps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleSize {
    pub slots: usize,
    pub quanta: usize,
}

impl FromStr for OracleSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (m, q) = s.split_once(',').ok_or_else(|| format!("expected M,Q, got {s:?}"))?;
        let slots = m.trim().parse().map_err(|e| format!("M {m:?}: {e}"))?;
        let quanta = q.trim().parse().map_err(|e| format!("Q {q:?}: {e}"))?;
        Ok(Self { slots, quanta })
    }
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unsupported(_) => EXIT_INFEASIBLE,
            Error::ResourceCap(_) => EXIT_USAGE,
            Error::Domain(_) | Error::Invalid(_) | Error::Parse { .. } => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_INVALID, format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new(EXIT_INVALID, format!("csv error: {e}"))
    }
}

type CmdResult = Result<(), Failure>;

/// Format with 12 significant digits, `%g` style.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        trim_zeros(format!("{:.*}", (11 - exp).max(0) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::OracleCheck(a) => cmd_oracle_check(a, out),
        Command::Breakpoints(a) => cmd_breakpoints(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("cannot read {}: {e}", path.display())))?;
    Scenario::from_json_str(&text).map_err(|e| match e {
        Error::Parse { line, column, message } => {
            Failure::new(EXIT_INVALID, format!("{}:{line}:{column}: {message}", path.display()))
        }
        other => Failure::new(EXIT_INVALID, format!("{}: {other}", path.display())),
    })
}

fn check_tol(tol: Option<f64>) -> Result<Option<f64>, Failure> {
    match tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(Failure::new(EXIT_USAGE, format!("--tol must be positive, got {t}"))),
        t => Ok(t),
    }
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> CmdResult {
    let mut scenario = load_scenario(&args.scenario)?;
    if let Some(m) = args.mode {
        scenario = scenario.with_mode(m.into());
    }
    let tol = check_tol(args.tol)?;
    let feas_tol = tol.unwrap_or(ehrelay::DEFAULT_TOL);
    let mut grid_bound = None;
    let solution = match scenario.mode() {
        Mode::FullDuplex => fullduplex::solve_full_duplex(&scenario, feas_tol)?,
        Mode::HalfDuplex => match solve_half_duplex_single_packet(&scenario, tol) {
            Err(Error::Unsupported(_)) if args.approx => {
                let (grid, sol) = grid_half_duplex_solution(&scenario, args.grid, feas_tol)?;
                grid_bound = Some(grid.bound);
                sol
            }
            other => other?,
        },
    };
    if !solution.feasibility.is_feasible() {
        let mut msg = String::from("computed schedule failed re-validation:");
        for v in &solution.feasibility.violations {
            msg.push_str(&format!("\n  {:?} at t = {} by {}", v.constraint, fmt_num(v.at), fmt_num(v.magnitude)));
        }
        return Err(Failure::new(EXIT_INFEASIBLE, msg));
    }
    write_report(&scenario, &solution, grid_bound, out)?;
    if let Some(path) = &args.out {
        write_schedules(&solution, File::create(path)?)?;
    }
    if let Some(path) = &args.curves {
        write_curves(&scenario, &solution, File::create(path)?)?;
    }
    Ok(())
}

fn write_segments(label: &str, s: &PowerSchedule, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{label} schedule:")?;
    for Segment { start, end, power } in s.segments() {
        writeln!(out, "  [{}, {})  P = {}", fmt_num(*start), fmt_num(*end), fmt_num(*power))?;
    }
    Ok(())
}

fn write_report(scenario: &Scenario, sol: &TwoHopSolution, grid_bound: Option<f64>, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "mode: {}", scenario.mode())?;
    writeln!(out, "B = {} bits", fmt_num(sol.delivered_bits))?;
    if let Some(t) = sol.switch_time {
        writeln!(out, "t* = {}", fmt_num(t))?;
    }
    if let Some(b) = grid_bound {
        writeln!(out, "grid search: optimum exceeds B by at most {}", fmt_num(b))?;
    }
    write_segments("source", &sol.source_schedule, out)?;
    write_segments("relay", &sol.relay_schedule, out)?;
    writeln!(out, "feasible: yes (min slack {})", fmt_num(sol.feasibility.min_slack()))
}

fn write_schedules(sol: &TwoHopSolution, sink: impl Write) -> CmdResult {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["hop", "start", "end", "power"])?;
    for (hop, s) in [("source", &sol.source_schedule), ("relay", &sol.relay_schedule)] {
        for seg in s.segments() {
            w.write_record([hop.to_string(), fmt_num(seg.start), fmt_num(seg.end), fmt_num(seg.power)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_curves(scenario: &Scenario, sol: &TwoHopSolution, sink: impl Write) -> CmdResult {
    let mut times: Vec<f64> = sol.source_schedule.boundaries();
    times.extend(sol.relay_schedule.boundaries());
    times.sort_by(f64::total_cmp);
    times.dedup();
    let (se, re) = (sol.source_schedule.energy_curve(), sol.relay_schedule.energy_curve());
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["t", "source_harvested", "source_energy", "source_bits", "relay_harvested", "relay_energy", "relay_bits"])?;
    for t in times {
        w.write_record([
            fmt_num(t),
            fmt_num(scenario.source().cumulative(t)),
            fmt_num(se.eval(t)),
            fmt_num(sol.source_bits.eval(t)),
            fmt_num(scenario.relay().cumulative(t)),
            fmt_num(re.eval(t)),
            fmt_num(sol.relay_bits.eval(t)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Sweep rows in CSV form: `E,B,t_star,segment_index`.
pub fn write_sweep_csv(points: &[SweepPoint<f64>], sink: impl Write) -> CmdResult {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["E", "B", "t_star", "segment_index"])?;
    for p in points {
        w.write_record([
            fmt_num(p.energy),
            fmt_num(p.bits),
            p.switch_time.map(fmt_num).unwrap_or_default(),
            p.segment_index.map(|i| i.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> CmdResult {
    let scenario = load_scenario(&args.scenario)?;
    let tol = check_tol(args.tol)?;
    let points = sweep_source_energy(&scenario, &args.sweep.energies(), tol)?;
    match &args.out {
        Some(path) => write_sweep_csv(&points, File::create(path)?),
        None => write_sweep_csv(&points, out),
    }
}

fn print_checks(label: &str, checks: &[OracleCheck<f64>], out: &mut dyn Write) -> io::Result<bool> {
    let mut ok = true;
    for c in checks {
        ok &= c.pass;
        writeln!(
            out,
            "{label}{}: solver {} oracle {} bound {} {}",
            c.label,
            fmt_num(c.solver),
            fmt_num(c.oracle),
            fmt_num(c.bound),
            if c.pass { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(ok)
}

fn cmd_oracle_check(args: &OracleArgs, out: &mut dyn Write) -> CmdResult {
    let OracleSize { slots, quanta } = args.oracle;
    if let Some(path) = &args.scenario {
        let mut scenario = load_scenario(path)?;
        if let Some(m) = args.mode {
            scenario = scenario.with_mode(m.into());
        }
        let checks = check_scenario(&scenario, slots, quanta, args.bias)?;
        return if print_checks("", &checks, out)? {
            writeln!(out, "PASS")?;
            Ok(())
        } else {
            writeln!(out, "FAIL")?;
            Err(Failure::new(EXIT_INFEASIBLE, "oracle check failed"))
        };
    }

    let mut rng = StdRng::seed_from_u64(args.seed);
    let cfg = FuzzConfig::default();
    let scenarios: Vec<Scenario> = (0..args.count)
        .map(|i| {
            let mode = args.mode.map(Mode::from).unwrap_or(if i % 2 == 0 { Mode::FullDuplex } else { Mode::HalfDuplex });
            random_scenario(&mut rng, mode, &cfg)
        })
        .collect();
    let results: Vec<_> = scenarios.par_iter().map(|sc| check_scenario(sc, slots, quanta, args.bias)).collect();
    let mut passed = 0;
    for (i, r) in results.into_iter().enumerate() {
        if print_checks(&format!("#{i} "), &r?, out)? {
            passed += 1;
        }
    }
    writeln!(out, "{passed}/{} PASS", args.count)?;
    if passed == args.count {
        Ok(())
    } else {
        Err(Failure::new(EXIT_INFEASIBLE, format!("{} of {} instances failed", args.count - passed, args.count)))
    }
}

fn cmd_breakpoints(args: &BreakpointArgs, out: &mut dyn Write) -> CmdResult {
    let scenario = load_scenario(&args.scenario)?;
    let chain = construct_breakpoints(scenario.relay(), scenario.horizon())?;
    writeln!(out, "corners:")?;
    for (i, c) in chain.corners().iter().enumerate() {
        writeln!(out, "  {i}: t = {}  A = {}", fmt_num(c.time), fmt_num(c.energy))?;
    }
    writeln!(out, "breakpoints:")?;
    for l in chain.lines() {
        writeln!(
            out,
            "  {}  (corner {} -> {}, slope {})",
            fmt_num(l.intercept),
            l.origin,
            l.anchor,
            fmt_num(l.slope)
        )?;
    }
    Ok(())
}
