//! `fringecorr`: fringe-correlation sweeps, the invariant suite, and the
//! coupling calibration tool.
//!
//! Exit codes: 0 success, 1 numeric or validation failure, 2 usage error.

use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use fringecorr::interference::{parse_angle, DEFAULT_OMEGA_1, DEFAULT_OMEGA_2, DEFAULT_XI};
use fringecorr::scan::{compute_grid, compute_slice, compute_time_series};
use fringecorr::validate::{run_validation, ValidateOptions};
use fringecorr::{
    calibrate_q, load_state_file, make_product, make_rho_ent, make_rho_sep, rsep_extrema,
    screen_axis, BoundKind, DisplacementMethod, Error, Evaluator, ModeParams, Mode, Quantity,
    ScanSetup, TruncationPolicy, TwoModeState,
};

/// Extremes of `R_sep` quoted for the Fig. 3 setting.
const FIG3_MIN: f64 = 0.7557;
const FIG3_MAX: f64 = 0.995;
const DEFAULT_Q: f64 = 0.5;

#[derive(Parser, Debug)]
#[command(name = "fringecorr", version, about = "Correlated Aharonov-Bohm fringes in a two-mode quantized field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a quantity on a sigma_A x sigma_B grid over [-2pi, 2pi]^2.
    Grid(GridArgs),
    /// R_sep and R_ent against sigma_A at fixed sigma_B and time.
    Slice(SliceArgs),
    /// R_sep and R_ent against time at a fixed screen point.
    Timeseries(TimeseriesArgs),
    /// Run the invariant suite; exit 1 if any check fails.
    Validate(ValidateArgs),
    /// Invert one R_sep bound for the coupling q.
    Calibrate(CalibrateArgs),
}

#[derive(Args, Debug, Clone)]
struct FieldArgs {
    /// Field state: sep, ent, product, or a JSON state file.
    #[arg(long, default_value = "sep")]
    state: String,
    /// Per-mode dimension of the built-in states.
    #[arg(long, default_value_t = 4)]
    state_dim: usize,
    /// Coupling q [default: 0.5].
    #[arg(long, conflicts_with = "charge")]
    q: Option<f64>,
    /// Loop constant xi.
    #[arg(long, default_value_t = DEFAULT_XI)]
    xi: f64,
    /// Electron charge e; sets q = xi e / sqrt 2.
    #[arg(long)]
    charge: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_OMEGA_1)]
    omega1: f64,
    #[arg(long, default_value_t = DEFAULT_OMEGA_2)]
    omega2: f64,
    /// Truncation convergence tolerance for the exponential displacement.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// How displacement matrices are built.
    #[arg(long, value_enum, default_value_t = MethodArg::Analytic)]
    method: MethodArg,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum MethodArg {
    Analytic,
    Exp,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, value_parser = parse_quantity, default_value = "r-sep")]
    quantity: Quantity,
    /// Observation time; for r-ent and i-ent defaults to pi/(omega1 - omega2).
    #[arg(long, value_parser = angle)]
    time: Option<f64>,
    /// Samples per axis.
    #[arg(long, default_value_t = 101)]
    grid_n: usize,
    /// Output CSV (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SliceArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, value_parser = angle, default_value = "-1.1pi", allow_hyphen_values = true)]
    sigma_b: f64,
    /// Observation time [default: pi/(omega1 - omega2)].
    #[arg(long, value_parser = angle)]
    time: Option<f64>,
    #[arg(long, default_value_t = 101)]
    grid_n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TimeseriesArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, value_parser = angle, default_value = "0.98pi", allow_hyphen_values = true)]
    sigma_a: f64,
    #[arg(long, value_parser = angle, default_value = "-1.1pi", allow_hyphen_values = true)]
    sigma_b: f64,
    #[arg(long, value_parser = angle, default_value = "0")]
    t_start: f64,
    /// End of the (half-open) window [default: two periods 2pi/|omega1 - omega2|].
    #[arg(long, value_parser = angle)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = 1024)]
    t_samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Truncation dimensions for the convergence check.
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    dims: Vec<usize>,
    /// Flip the sign of the rho_ent coherences seen by the numeric traces.
    #[arg(long)]
    perturb: bool,
    /// Per-mode state dimension for the numeric traces.
    #[arg(long, default_value_t = 16)]
    state_dim: usize,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    #[arg(long, value_parser = parse_bound)]
    which: BoundKind,
    #[arg(long)]
    target: f64,
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn parse_quantity(s: &str) -> Result<Quantity, String> {
    s.parse::<Quantity>().map_err(|e| e.to_string())
}

fn parse_bound(s: &str) -> Result<BoundKind, String> {
    s.parse::<BoundKind>().map_err(|e| e.to_string())
}

/// Failure after argument parsing.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(format!("i/o: {e}"))
    }
}

fn load_field_state(field: &FieldArgs) -> Result<TwoModeState, Failure> {
    let dim = field.state_dim;
    let state = match field.state.as_str() {
        "sep" => make_rho_sep(dim)?,
        "ent" => make_rho_ent(dim)?,
        "product" => {
            let marg = make_rho_sep(dim)?.marginal(Mode::A)?;
            make_product(&marg, &marg)?.with_label("product")
        }
        path => load_state_file(path)?,
    };
    Ok(state)
}

fn mode_params(field: &FieldArgs, omega: f64) -> Result<ModeParams, Failure> {
    Ok(match field.charge {
        Some(e) => ModeParams::new(omega, field.xi, e)?,
        None => ModeParams::with_q_xi(omega, field.q.unwrap_or(DEFAULT_Q), field.xi)?,
    })
}

fn setup(field: &FieldArgs, time: f64) -> Result<ScanSetup, Failure> {
    let policy = TruncationPolicy::new(TruncationPolicy::default().initial_dim, TruncationPolicy::default().max_dim, field.tol)?;
    let method = match field.method {
        MethodArg::Analytic => DisplacementMethod::Analytic,
        MethodArg::Exp => DisplacementMethod::Exponential,
    };
    Ok(ScanSetup {
        mode_a: mode_params(field, field.omega1)?,
        mode_b: mode_params(field, field.omega2)?,
        state: load_field_state(field)?,
        time,
        evaluator: Evaluator::new(policy, method)?,
    })
}

/// `π/(ω₁ − ω₂)`, the time at which the entangled cross term flips sign.
fn half_beat(field: &FieldArgs) -> Result<f64, Failure> {
    let dw = field.omega1 - field.omega2;
    if dw == 0.0 {
        return Err(Failure::Usage("omega1 == omega2: pass --time explicitly".into()));
    }
    Ok(PI / dw)
}

fn with_output(out: &Option<PathBuf>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn cmd_grid(args: GridArgs) -> Result<(), Failure> {
    let time = match args.time {
        Some(t) => t,
        None if matches!(args.quantity, Quantity::REnt | Quantity::IEnt) => half_beat(&args.field)?,
        None => 0.0,
    };
    if args.grid_n < 2 {
        return Err(Failure::Usage("--grid-n must be at least 2".into()));
    }
    let s = setup(&args.field, time)?;
    let axis = screen_axis(-2.0, 2.0, args.grid_n);
    let grid = compute_grid(args.quantity, &s, &axis, &axis)?;
    with_output(&args.out, |w| grid.write_csv(w))
}

fn cmd_slice(args: SliceArgs) -> Result<(), Failure> {
    let time = match args.time {
        Some(t) => t,
        None => half_beat(&args.field)?,
    };
    if args.grid_n < 2 {
        return Err(Failure::Usage("--grid-n must be at least 2".into()));
    }
    let s = setup(&args.field, time)?;
    let slice = compute_slice(&s, &screen_axis(-2.0, 2.0, args.grid_n), args.sigma_b)?;
    with_output(&args.out, |w| slice.write_csv(w))
}

fn cmd_timeseries(args: TimeseriesArgs) -> Result<(), Failure> {
    let t_end = match args.t_end {
        Some(t) => t,
        None => {
            let dw = (args.field.omega1 - args.field.omega2).abs();
            if dw == 0.0 {
                return Err(Failure::Usage("omega1 == omega2: pass --t-end explicitly".into()));
            }
            args.t_start + 2.0 * TAU / dw
        }
    };
    if args.t_samples < 2 {
        return Err(Failure::Usage("--t-samples must be at least 2".into()));
    }
    let s = setup(&args.field, args.t_start)?;
    let series = compute_time_series(&s, args.sigma_a, args.sigma_b, args.t_start, t_end, args.t_samples)?;
    with_output(&args.out, |w| series.write_csv(w))
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    if args.dims.is_empty() {
        return Err(Failure::Usage("--dims needs at least one dimension".into()));
    }
    let opts = ValidateOptions {
        dims: args.dims,
        perturb: args.perturb,
        state_dim: args.state_dim,
        ..ValidateOptions::default()
    };
    let report = run_validation(&opts);
    println!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        let worst: Vec<String> = report
            .failures()
            .map(|c| format!("{} (residual {:.3e})", c.name, c.residual))
            .collect();
        Err(Failure::Run(format!("failed: {}", worst.join("; "))))
    }
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), Failure> {
    let cal = calibrate_q(args.target, args.which)?;
    let (other_name, other_quoted) = match args.which {
        BoundKind::Min => ("max", FIG3_MAX),
        BoundKind::Max => ("min", FIG3_MIN),
    };
    let cross = cal.other() - other_quoted;
    let extrema = rsep_extrema(cal.q, 101)?;
    let mut out = io::stdout().lock();
    writeln!(out, "which            {}", cal.which)?;
    writeln!(out, "target           {}", cal.target)?;
    writeln!(out, "q                {:.12}", cal.q)?;
    writeln!(out, "lower bound      {:.12}  (1-2a+2b)/(1-a)^2, R_sep at (pi,pi)", cal.lower)?;
    writeln!(out, "upper bound      {:.12}  (1+2a+2b)/(1+a)^2, R_sep at (0,0)", cal.upper)?;
    writeln!(out, "matched residual {:.3e}", cal.matched() - cal.target)?;
    writeln!(out, "quoted {other_name:<9} {other_quoted}")?;
    writeln!(out, "cross residual   {cross:+.6e}")?;
    writeln!(
        out,
        "one q fits both  {}",
        if cross.abs() <= 1e-3 { "yes (within 1e-3)" } else { "no (beyond 1e-3)" }
    )?;
    writeln!(
        out,
        "grid min R_sep   {:.12}  at ({:.6}, {:.6})",
        extrema.min.value, extrema.min.sigma_a, extrema.min.sigma_b
    )?;
    writeln!(
        out,
        "grid max R_sep   {:.12}  at ({:.6}, {:.6})",
        extrema.max.value, extrema.max.sigma_a, extrema.max.sigma_b
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Grid(a) => cmd_grid(a),
        Command::Slice(a) => cmd_slice(a),
        Command::Timeseries(a) => cmd_timeseries(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Calibrate(a) => cmd_calibrate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => Cli::command().error(ErrorKind::ArgumentConflict, msg).exit(),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
