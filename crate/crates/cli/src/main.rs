//! `depevap`: eigendecomposition, verification, propagation, and Monte
//! Carlo simulation of the deposition/evaporation model as reproducible
//! batch commands.
//!
//! Every command is a pure function of its flags: rerunning with the same
//! arguments produces byte-identical output. Rational inputs accept
//! `"num/den"` or decimal strings (converted exactly); there is no hidden
//! entropy anywhere. Exit codes: 0 success, 1 verification failure,
//! 2 usage or configuration error.

mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use depevap_core::dynamics::{time_series_csv, ProbabilityVector};
use depevap_core::exact::Rational;
use depevap_core::matrices::ModelParams;
use depevap_core::simulator::{estimate_qk, InitialCondition, SimConfig, StateMode};
use depevap_core::spectral::decompose_generator;

#[derive(Parser)]
#[command(
    name = "depevap",
    version,
    about = "Exact spectral toolkit and stochastic cross-validator for a \
             deposition/evaporation birth-death model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact eigendecomposition of the occupancy-count generator
    Eigen(EigenArgs),
    /// Re-derive the closed forms through independent exact checks
    Verify(verify::VerifyArgs),
    /// Propagate the occupancy distribution and emit a time-series CSV
    Evolve(EvolveArgs),
    /// Monte Carlo estimation of the occupancy distribution
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct EigenArgs {
    /// Number of lattice cells (matrix order is n + 1)
    #[arg(long)]
    n: usize,
    /// Fill rate per empty cell, as "num/den" or an exact decimal
    #[arg(long, value_parser = parse_rational)]
    alpha: Rational,
    /// Empty rate per filled cell
    #[arg(long, value_parser = parse_rational)]
    beta: Rational,
    #[arg(long, value_enum, default_value_t = EigenFormat::Json)]
    format: EigenFormat,
    /// Write here instead of stdout; relative paths land in
    /// $DEPEVAP_OUTPUT_DIR when it is set
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EigenFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct EvolveArgs {
    /// Number of lattice cells
    #[arg(long)]
    n: usize,
    /// Fill rate per empty cell
    #[arg(long, value_parser = parse_rational)]
    alpha: Rational,
    /// Empty rate per filled cell
    #[arg(long, value_parser = parse_rational)]
    beta: Rational,
    /// Initial distribution: empty | full | k=<m> | file=<path>
    /// (the file holds a JSON probability vector or array of rationals)
    #[arg(long, default_value = "empty")]
    init: String,
    /// Grid time; repeatable or comma-separated; "inf" is the exact limit
    #[arg(long = "t", required = true, value_parser = parse_time, value_delimiter = ',')]
    times: Vec<f64>,
    /// Append per-entry deltas against an independent integrator
    #[arg(long, value_enum)]
    oracle: Option<OracleKind>,
    /// Fixed step for the oracle integrator
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    /// Write here instead of stdout; relative paths land in
    /// $DEPEVAP_OUTPUT_DIR when it is set
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Rk4,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config {n, alpha, beta, trials, seed, t_grid, state_mode?,
    /// init?}; replaces the individual parameter flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of lattice cells
    #[arg(long)]
    n: Option<usize>,
    /// Fill rate per empty cell
    #[arg(long, value_parser = parse_rational)]
    alpha: Option<Rational>,
    /// Empty rate per filled cell
    #[arg(long, value_parser = parse_rational)]
    beta: Option<Rational>,
    /// Number of independent trials
    #[arg(long)]
    trials: Option<u64>,
    /// PRNG seed; required, simulation uses no hidden entropy
    #[arg(long)]
    seed: Option<u64>,
    /// Grid time; repeatable or comma-separated, strictly ascending
    #[arg(long = "t", value_parser = parse_finite_time, value_delimiter = ',')]
    times: Vec<f64>,
    /// State representation during simulation
    #[arg(long, value_enum)]
    state_mode: Option<ModeArg>,
    /// Initial occupancy: empty | full | k=<m> | bernoulli=<p> | equilibrium
    #[arg(long)]
    init: Option<String>,
    #[arg(long, value_enum, default_value_t = SimFormat::Csv)]
    format: SimFormat,
    /// Write here instead of stdout; relative paths land in
    /// $DEPEVAP_OUTPUT_DIR when it is set
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    CountBased,
    PerCell,
}

impl From<ModeArg> for StateMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::CountBased => StateMode::CountBased,
            ModeArg::PerCell => StateMode::PerCell,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SimFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode, String> {
    match cmd {
        Command::Eigen(args) => cmd_eigen(args).map(|()| ExitCode::SUCCESS),
        Command::Verify(args) => verify::cmd_verify(args),
        Command::Evolve(args) => cmd_evolve(args).map(|()| ExitCode::SUCCESS),
        Command::Simulate(args) => cmd_simulate(args).map(|()| ExitCode::SUCCESS),
    }
}

fn stringify(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(stringify)
}

fn parse_time(s: &str) -> Result<f64, String> {
    let t = if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        f64::INFINITY
    } else {
        s.parse::<f64>().map_err(stringify)?
    };
    if t.is_nan() || t < 0.0 {
        return Err(format!("time must be >= 0, got {s:?}"));
    }
    Ok(t)
}

fn parse_finite_time(s: &str) -> Result<f64, String> {
    let t = parse_time(s)?;
    if !t.is_finite() {
        return Err("simulation times must be finite".into());
    }
    Ok(t)
}

/// Relative output paths land in `$DEPEVAP_OUTPUT_DIR` when it is set.
fn resolve_output_path(p: &Path) -> PathBuf {
    if p.is_relative() {
        if let Ok(dir) = std::env::var("DEPEVAP_OUTPUT_DIR") {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(p);
            }
        }
    }
    p.to_path_buf()
}

fn write_output(output: Option<&Path>, content: &str) -> Result<(), String> {
    match output {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(p) => {
            let path = resolve_output_path(p);
            std::fs::write(&path, content)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
    }
}

fn cmd_eigen(args: EigenArgs) -> Result<(), String> {
    let params = ModelParams::new(args.n, args.alpha, args.beta).map_err(stringify)?;
    let decomp = decompose_generator(&params);
    let content = match args.format {
        EigenFormat::Json => {
            let mut s = serde_json::to_string_pretty(&decomp).map_err(stringify)?;
            s.push('\n');
            s
        }
        EigenFormat::Csv => {
            let order = params.order();
            let mut out = String::from("k,lambda");
            for l in 0..order {
                out.push_str(&format!(",u{l}"));
            }
            out.push('\n');
            for k in 0..order {
                out.push_str(&format!("{k},{}", decomp.eigenvalue(k).canonical_string()));
                for u in decomp.vector(k) {
                    out.push(',');
                    out.push_str(&u.canonical_string());
                }
                out.push('\n');
            }
            out
        }
    };
    write_output(args.output.as_deref(), &content)
}

fn parse_evolve_init(spec: &str, order: usize) -> Result<ProbabilityVector, String> {
    match spec {
        "empty" => return ProbabilityVector::point_mass(order, 0).map_err(stringify),
        "full" => return ProbabilityVector::point_mass(order, order - 1).map_err(stringify),
        _ => {}
    }
    if let Some(m) = spec.strip_prefix("k=") {
        let m: usize = m
            .parse()
            .map_err(|_| format!("bad occupancy count in --init {spec:?}"))?;
        return ProbabilityVector::point_mass(order, m).map_err(stringify);
    }
    if let Some(path) = spec.strip_prefix("file=") {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
        // either the tagged schema or a bare array of exact entries
        let q0 = match serde_json::from_str::<ProbabilityVector>(&text) {
            Ok(v) => v,
            Err(_) => {
                let entries: Vec<Rational> = serde_json::from_str(&text).map_err(|e| {
                    format!("{path} holds neither a probability vector nor a rational array: {e}")
                })?;
                ProbabilityVector::exact(entries).map_err(stringify)?
            }
        };
        if q0.len() != order {
            return Err(format!(
                "initial vector length {} does not match order {order}",
                q0.len()
            ));
        }
        return Ok(q0);
    }
    Err(format!(
        "--init must be empty|full|k=<m>|file=<path>, got {spec:?}"
    ))
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), String> {
    let params = ModelParams::new(args.n, args.alpha, args.beta).map_err(stringify)?;
    let q0 = parse_evolve_init(&args.init, params.order())?;
    let step = match args.oracle {
        Some(OracleKind::Rk4) => {
            if !args.step.is_finite() || args.step <= 0.0 {
                return Err(format!("--step must be finite and > 0, got {}", args.step));
            }
            Some(args.step)
        }
        None => None,
    };
    let csv = time_series_csv(&params, &q0, &args.times, step).map_err(stringify)?;
    write_output(args.output.as_deref(), &csv)
}

fn parse_sim_init(spec: &str, n: usize) -> Result<InitialCondition, String> {
    match spec {
        "empty" => return Ok(InitialCondition::Fixed { filled: 0 }),
        "full" => return Ok(InitialCondition::Fixed { filled: n }),
        "equilibrium" => return Ok(InitialCondition::Equilibrium),
        _ => {}
    }
    if let Some(m) = spec.strip_prefix("k=") {
        let filled = m
            .parse()
            .map_err(|_| format!("bad occupancy count in --init {spec:?}"))?;
        return Ok(InitialCondition::Fixed { filled });
    }
    if let Some(p) = spec.strip_prefix("bernoulli=") {
        return Ok(InitialCondition::Bernoulli {
            p: parse_rational(p)?,
        });
    }
    Err(format!(
        "--init must be empty|full|k=<m>|bernoulli=<p>|equilibrium, got {spec:?}"
    ))
}

fn resolve_sim_config(args: &SimulateArgs) -> Result<(SimConfig, InitialCondition), String> {
    if let Some(path) = &args.config {
        let flags_given = args.n.is_some()
            || args.alpha.is_some()
            || args.beta.is_some()
            || args.trials.is_some()
            || args.seed.is_some()
            || !args.times.is_empty()
            || args.state_mode.is_some()
            || args.init.is_some();
        if flags_given {
            return Err(
                "--config replaces the individual parameter flags; pass one or the other".into(),
            );
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| format!("invalid JSON in {}: {e}", path.display()))?;
        let init = match value.as_object_mut().and_then(|m| m.remove("init")) {
            Some(v) => serde_json::from_value(v)
                .map_err(|e| format!("invalid init in {}: {e}", path.display()))?,
            None => InitialCondition::empty(),
        };
        let config: SimConfig = serde_json::from_value(value)
            .map_err(|e| format!("invalid config in {}: {e}", path.display()))?;
        Ok((config, init))
    } else {
        let n = args.n.ok_or("--n is required (or use --config)")?;
        let alpha = args
            .alpha
            .clone()
            .ok_or("--alpha is required (or use --config)")?;
        let beta = args
            .beta
            .clone()
            .ok_or("--beta is required (or use --config)")?;
        let trials = args
            .trials
            .ok_or("--trials is required (or use --config)")?;
        let seed = args
            .seed
            .ok_or("--seed is required; simulation uses no hidden entropy")?;
        if args.times.is_empty() {
            return Err("at least one --t grid time is required".into());
        }
        let params = ModelParams::new(n, alpha, beta).map_err(stringify)?;
        let init = parse_sim_init(args.init.as_deref().unwrap_or("empty"), n)?;
        let mode = args.state_mode.map(StateMode::from).unwrap_or_default();
        let config =
            SimConfig::new(params, trials, seed, args.times.clone(), mode).map_err(stringify)?;
        Ok((config, init))
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), String> {
    let (config, init) = resolve_sim_config(&args)?;
    let dist = estimate_qk(&config, &init).map_err(stringify)?;
    let content = match args.format {
        SimFormat::Csv => dist.to_csv(),
        SimFormat::Json => {
            let coverage: Vec<serde_json::Value> = (0..dist.t_grid().len())
                .map(|i| {
                    serde_json::json!({
                        "t": dist.t_grid()[i],
                        "mean": dist.coverage_mean(i),
                        "stderr": dist.coverage_stderr(i),
                    })
                })
                .collect();
            let summary = serde_json::json!({
                "config": config,
                "init": init,
                "distribution": dist,
                "coverage": coverage,
            });
            let mut s = serde_json::to_string_pretty(&summary).map_err(stringify)?;
            s.push('\n');
            s
        }
    };
    write_output(args.output.as_deref(), &content)
}
