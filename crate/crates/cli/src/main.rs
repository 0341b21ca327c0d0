//! Command-line driver: full pipeline runs, one-shot separation, standalone
//! reliability evaluation, and synthetic data generation.
//!
//! Exit codes: 0 success; 2 invalid config or input; 3 solve failure;
//! 1 other errors.

use clap::{Parser, Subcommand};
use drcc_core::experiment::{
    evaluate_reliability, generate_synthetic_pool, run_experiment, write_outputs,
    ExperimentConfig, ExperimentError, SolutionRows, SyntheticSpec,
};
use drcc_core::separation::{brute_force_worst_case, worst_case, SeparationInstance};
use drcc_core::uncertainty::{ScenarioPool, UnimodalityConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INPUT: u8 = 2;
const EXIT_SOLVE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "drcc",
    about = "Distributionally robust chance-constrained DC optimal power flow",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a TOML config.
    Solve {
        config: PathBuf,
        /// Override the output directory from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the worst-case separation oracle on one instance (JSON with
    /// fields alpha, epsilon, r_tilde, c_tilde, h_lo, h_hi).
    Separate {
        instance: PathBuf,
        /// Also run the brute-force verification grid.
        #[arg(long)]
        brute: bool,
        /// Grid resolution per axis for --brute.
        #[arg(long, default_value_t = 2000)]
        grid: usize,
    },
    /// Evaluate a solved decision's rows against a scenario CSV.
    Reliability {
        solution: PathBuf,
        scenarios: PathBuf,
        #[arg(long, default_value_t = 20)]
        batches: usize,
        /// Scenarios per batch; defaults to pool size / batches.
        #[arg(long)]
        batch_size: Option<usize>,
    },
    /// Generate a synthetic scenario pool from a spec (TOML).
    GenData {
        spec: PathBuf,
        #[arg(long, default_value_t = 10000)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    fn solve(message: impl Into<String>) -> Self {
        Self { code: EXIT_SOLVE, message: message.into() }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match &e {
            ExperimentError::Master(_) => CliError::solve(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { config, out } => {
            let (cfg, base) = ExperimentConfig::load(&config)?;
            let (report, artifacts) = run_experiment(&cfg, &base)?;
            let out_dir = out.unwrap_or_else(|| resolve_out(&base, &cfg.output.dir));
            let files = write_outputs(&report, &artifacts, &out_dir)
                .map_err(|e| CliError::input(format!("writing outputs: {e}")))?;
            print_summary(&report);
            for f in files {
                log::info!("wrote {}", f.display());
            }
            let failed: Vec<&str> = report
                .variants
                .iter()
                .filter(|v| v.error.is_some())
                .map(|v| v.kind.as_str())
                .collect();
            if !failed.is_empty() {
                if failed.len() == report.variants.len() {
                    return Err(CliError::solve("all ambiguity-set variants failed"));
                }
                log::warn!("variants with errors: {}", failed.join(", "));
            }
            Ok(())
        }
        Command::Separate { instance, brute, grid } => {
            let text = std::fs::read_to_string(&instance)
                .map_err(|e| CliError::input(format!("reading instance: {e}")))?;
            let raw: SeparationInstance = serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("parsing instance: {e}")))?;
            let uni = UnimodalityConfig::new(raw.alpha, raw.epsilon)
                .map_err(|e| CliError::input(e.to_string()))?;
            let inst =
                SeparationInstance::new(&uni, raw.r_tilde, raw.c_tilde, raw.h_lo, raw.h_hi)
                    .map_err(|e| CliError::input(e.to_string()))?;
            let wc = worst_case(&inst);
            let mut out = serde_json::json!({ "worst_case": wc });
            if brute {
                out["brute_force"] = serde_json::json!(brute_force_worst_case(&inst, grid, grid));
            }
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            Ok(())
        }
        Command::Reliability { solution, scenarios, batches, batch_size } => {
            let text = std::fs::read_to_string(&solution)
                .map_err(|e| CliError::input(format!("reading solution: {e}")))?;
            let sol: SolutionRows = serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("parsing solution: {e}")))?;
            let pool = ScenarioPool::read_csv(&scenarios)
                .map_err(|e| CliError::input(e.to_string()))?;
            let bs = batch_size.unwrap_or_else(|| (pool.len() / batches).max(1));
            let report = evaluate_reliability(&sol.rows, &pool, batches, bs)
                .map_err(|e| CliError::input(e.to_string()))?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            Ok(())
        }
        Command::GenData { spec, size, seed, out } => {
            let text = std::fs::read_to_string(&spec)
                .map_err(|e| CliError::input(format!("reading spec: {e}")))?;
            let spec: SyntheticSpec = toml::from_str(&text)
                .map_err(|e| CliError::input(format!("parsing spec: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pool = generate_synthetic_pool(&spec, size, &mut rng)?;
            match out {
                Some(path) => {
                    let mut f = std::fs::File::create(&path)
                        .map_err(|e| CliError::input(format!("creating {}: {e}", path.display())))?;
                    pool.write_csv(&mut f)
                        .map_err(|e| CliError::input(format!("writing pool: {e}")))?;
                    log::info!("wrote {} ({} samples)", path.display(), pool.len());
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    pool.write_csv(&mut stdout)
                        .map_err(|e| CliError::input(format!("writing pool: {e}")))?;
                }
            }
            Ok(())
        }
    }
}

fn resolve_out(base: &Path, dir: &str) -> PathBuf {
    let p = Path::new(dir);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn print_summary(report: &drcc_core::experiment::ExperimentReport) {
    println!(
        "{:<5} {:>10} {:>10} {:>10} {:>8} {:>8} {:>6} {:>8} {:>7} {:>7} {:>7}",
        "set", "total", "gen", "reserve", "up MW", "dn MW", "iters", "time s", "rel mn", "rel av", "rel mx"
    );
    for v in &report.variants {
        if let Some(err) = &v.error {
            println!("{:<5} failed: {err}", v.kind);
            continue;
        }
        println!(
            "{:<5} {:>10.1} {:>10.1} {:>10.1} {:>8.1} {:>8.1} {:>6} {:>8.2} {:>7.2} {:>7.2} {:>7.2}",
            v.kind,
            v.total_cost,
            v.generation_cost,
            v.reserve_cost,
            v.up_reserve_mw,
            v.down_reserve_mw,
            v.iterations,
            v.wall_seconds,
            v.reliability_min,
            v.reliability_avg,
            v.reliability_max
        );
    }
}
