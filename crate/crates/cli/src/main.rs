//! Command-line front end: scenario configuration, experiment execution and
//! machine-readable result emission.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use risce_core::estimators::check_identifiability;
use risce_core::harness::{flops_estimate, preset, preset_names, run_monte_carlo, ExperimentSpec};
use risce_core::{Algorithm, Error, SweepAxis, SystemConfig};

#[derive(Parser)]
#[command(
    name = "risce",
    about = "Tensor-based channel/imperfection estimation simulator for RIS-assisted MIMO links",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonOpts {
    /// Scenario file in flat `key = value` form (`#` comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set n=12`. Applied after the config file;
    /// repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output file path.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Worker threads for the Monte Carlo runs (default: RISCE_THREADS or
    /// all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// RNG seed (shorthand for `--set seed=N`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one scenario and write the aggregate statistics.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        /// Estimator to run.
        #[arg(long)]
        algo: Algorithm,
    },
    /// Run a custom sweep; the sweep itself is configured through the keys
    /// `sweep_axis`, `sweep_values` and `algorithms`.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Re-run a named benchmark preset (fig4..fig11).
    Reproduce {
        #[command(flatten)]
        common: CommonOpts,
        /// Preset name.
        preset: String,
        /// Shrink the preset to desk-scale dimensions and run counts.
        #[arg(long)]
        desk_scale: bool,
    },
    /// Report identifiability bounds and FLOP estimates for a scenario.
    Check {
        #[command(flatten)]
        common: CommonOpts,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_IDENTIFIABILITY: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Identifiability(_) => EXIT_IDENTIFIABILITY,
            Error::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Experiment-level keys accepted next to the scenario keys in config files
/// and `--set` overrides for the `sweep` subcommand.
#[derive(Default)]
struct SweepKeys {
    axis: Option<SweepAxis>,
    values: Option<Vec<f64>>,
    algorithms: Option<Vec<Algorithm>>,
}

fn parse_kv(raw: &str) -> Result<(&str, &str), CliError> {
    raw.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| CliError::config(format!("--set expects KEY=VALUE, got '{raw}'")))
}

fn parse_value_list(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|tok| {
            let tok = tok.trim();
            if tok.eq_ignore_ascii_case("inf") {
                Ok(f64::INFINITY)
            } else {
                tok.parse::<f64>()
                    .map_err(|e| CliError::config(format!("bad sweep value '{tok}': {e}")))
            }
        })
        .collect()
}

fn apply_experiment_key(keys: &mut SweepKeys, key: &str, value: &str) -> Result<bool, CliError> {
    match key {
        "sweep_axis" => {
            keys.axis = Some(
                value
                    .parse()
                    .map_err(|e: Error| CliError::config(e.to_string()))?,
            )
        }
        "sweep_values" => keys.values = Some(parse_value_list(value)?),
        "algorithms" => {
            keys.algorithms = Some(
                value
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<Algorithm>()
                            .map_err(|e| CliError::config(e.to_string()))
                    })
                    .collect::<Result<_, _>>()?,
            )
        }
        _ => return Ok(false),
    }
    Ok(true)
}

/// Resolves the scenario (and optional sweep keys) from the config file plus
/// overrides. Unknown keys are errors naming the key.
fn resolve_config(
    common: &CommonOpts,
    allow_sweep_keys: bool,
) -> Result<(SystemConfig, SweepKeys), CliError> {
    let mut cfg = SystemConfig::default();
    let mut sweep = SweepKeys::default();

    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| {
                    CliError::config(format!("line {}: expected key = value", lineno + 1))
                })?;
            if allow_sweep_keys && apply_experiment_key(&mut sweep, key, value)? {
                continue;
            }
            cfg.apply(key, value).map_err(CliError::from)?;
        }
    }
    for raw in &common.sets {
        let (key, value) = parse_kv(raw)?;
        if allow_sweep_keys && apply_experiment_key(&mut sweep, key, value)? {
            continue;
        }
        cfg.apply(key, value).map_err(CliError::from)?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(CliError::from)?;
    Ok((cfg, sweep))
}

fn write_result(
    common: &CommonOpts,
    default_name: &str,
    result: &risce_core::AggregateResult,
) -> Result<(), CliError> {
    for skip in &result.skipped {
        eprintln!(
            "note: skipped {} at sweep value {} (needs K >= {})",
            skip.algorithm, skip.sweep_value, skip.required_k
        );
    }
    let (text, ext) = match common.format {
        OutputFormat::Csv => (output::to_csv(result), "csv"),
        OutputFormat::Json => (output::to_json(result), "json"),
    };
    let path = common
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{default_name}.{ext}")));
    std::fs::write(&path, text)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn install_thread_pool(threads: Option<usize>) -> Result<(), CliError> {
    let count =
        match threads {
            Some(n) => Some(n),
            None => match std::env::var("RISCE_THREADS") {
                Ok(v) => Some(v.parse::<usize>().map_err(|e| {
                    CliError::config(format!("RISCE_THREADS must be an integer: {e}"))
                })?),
                Err(_) => None,
            },
        };
    if let Some(n) = count {
        if n == 0 {
            return Err(CliError::config("threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run_spec(spec: &ExperimentSpec) -> Result<risce_core::AggregateResult, CliError> {
    eprintln!(
        "running {} sweep point(s) x {} algorithm(s) x {} run(s)...",
        spec.sweep_values.len(),
        spec.algorithms.len(),
        spec.runs
    );
    let started = std::time::Instant::now();
    let result = run_monte_carlo(spec).map_err(CliError::from)?;
    eprintln!("done in {:.1}s", started.elapsed().as_secs_f64());
    Ok(result)
}

fn cmd_simulate(common: &CommonOpts, algo: Algorithm) -> Result<(), CliError> {
    let (cfg, _) = resolve_config(common, false)?;
    let id = check_identifiability(&cfg, algo);
    if !id.ok {
        return Err(CliError {
            code: EXIT_IDENTIFIABILITY,
            message: format!(
                "identifiability: {algo} requires K >= {} (got K={}, N={})",
                id.required_k, cfg.k, cfg.n
            ),
        });
    }
    let spec = ExperimentSpec {
        sweep_axis: SweepAxis::SnrDb,
        sweep_values: vec![cfg.snr_db],
        algorithms: vec![algo],
        runs: cfg.omega,
        base: cfg,
    };
    let result = run_spec(&spec)?;
    write_result(common, "results", &result)
}

fn cmd_sweep(common: &CommonOpts) -> Result<(), CliError> {
    let (cfg, keys) = resolve_config(common, true)?;
    let axis = keys
        .axis
        .ok_or_else(|| CliError::config("sweep requires sweep_axis (snr_db, n, r_b or k)"))?;
    let values = keys
        .values
        .ok_or_else(|| CliError::config("sweep requires sweep_values (comma-separated)"))?;
    let algorithms = keys
        .algorithms
        .ok_or_else(|| CliError::config("sweep requires algorithms (comma-separated)"))?;
    let spec = ExperimentSpec {
        sweep_axis: axis,
        sweep_values: values,
        algorithms,
        runs: cfg.omega,
        base: cfg,
    };
    spec.validate().map_err(CliError::from)?;
    let result = run_spec(&spec)?;
    write_result(common, "sweep", &result)
}

fn cmd_reproduce(common: &CommonOpts, name: &str, desk_scale: bool) -> Result<(), CliError> {
    let mut spec = preset(name, desk_scale).ok_or_else(|| {
        CliError::config(format!(
            "unknown preset '{name}' (valid: {})",
            preset_names().join(", ")
        ))
    })?;
    // Overrides tweak the preset scenario, e.g. a smaller omega for smoke
    // runs. The swept axis itself stays fixed.
    for raw in &common.sets {
        let (key, value) = parse_kv(raw)?;
        spec.base.apply(key, value).map_err(CliError::from)?;
    }
    if let Some(seed) = common.seed {
        spec.base.seed = seed;
    }
    spec.runs = spec.base.omega;
    spec.base.validate().map_err(CliError::from)?;
    let result = run_spec(&spec)?;
    write_result(common, name, &result)
}

fn cmd_check(common: &CommonOpts) -> Result<(), CliError> {
    let (cfg, _) = resolve_config(common, false)?;
    println!(
        "scenario: m={} l={} n={} k={} p={} snr_db={} r_b={} channel={}",
        cfg.m, cfg.l, cfg.n, cfg.k, cfg.p, cfg.snr_db, cfg.r_b, cfg.channel_model
    );
    for algo in Algorithm::ALL {
        let id = check_identifiability(&cfg, algo);
        let verdict = if id.ok { "ok" } else { "NOT identifiable" };
        let flops = match algo {
            Algorithm::HosvdSti => flops_estimate(&cfg, algo, 0),
            _ => flops_estimate(&cfg, algo, 1),
        };
        let unit = match algo {
            Algorithm::HosvdSti | Algorithm::Clairvoyant => "per invocation",
            _ => "per iteration",
        };
        println!(
            "{:<12} requires K >= {:<4} (K = {:<4}) {:<17} flops {} {:.3e}",
            algo.to_string(),
            id.required_k,
            cfg.k,
            verdict,
            unit,
            flops
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Simulate { common, .. }
        | Command::Sweep { common }
        | Command::Reproduce { common, .. }
        | Command::Check { common } => common,
    };
    if let Err(e) = install_thread_pool(common.threads) {
        eprintln!("error: {}", e.message);
        return ExitCode::from(e.code);
    }
    let outcome = match &cli.command {
        Command::Simulate { common, algo } => cmd_simulate(common, *algo),
        Command::Sweep { common } => cmd_sweep(common),
        Command::Reproduce {
            common,
            preset,
            desk_scale,
        } => cmd_reproduce(common, preset, *desk_scale),
        Command::Check { common } => cmd_check(common),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
