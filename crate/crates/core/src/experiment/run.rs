//! End-to-end experiment driver: estimate, build, solve, evaluate, report.

use super::config::ExperimentConfig;
use super::reliability::{evaluate_reliability, realize_rows, SolutionRows};
use super::synth::generate_synthetic_pool;
use super::ExperimentError;
use crate::ambiguity::{AmbiguityConfig, AmbiguityKind};
use crate::conic::ClarabelSolver;
use crate::dcopf::{build_problem, decode_decision, parse_case, OpfOptions, WindPlant};
use crate::master::{solve_drcc, MasterError, SolveOptions, SolveReport};
use crate::uncertainty::{
    build_mode_support, estimate_mode_histogram, estimate_moments, ModeSupport, MomentData,
    ScenarioPool, UnimodalityConfig,
};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantResult {
    pub kind: String,
    pub converged: bool,
    pub total_cost: f64,
    pub generation_cost: f64,
    pub reserve_cost: f64,
    pub up_reserve_mw: f64,
    pub down_reserve_mw: f64,
    pub iterations: usize,
    pub cuts_added: usize,
    pub wall_seconds: f64,
    pub residual_violation: f64,
    pub reliability_min: f64,
    pub reliability_avg: f64,
    pub reliability_max: f64,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub epsilon: f64,
    pub alpha: f64,
    pub support_shape: String,
    pub support_lo: Option<Vec<f64>>,
    pub support_hi: Option<Vec<f64>>,
    pub d2_mode: Vec<f64>,
    pub estimated_mean: Vec<f64>,
    pub variants: Vec<VariantResult>,
}

/// Non-tabular byproducts: scatter/histogram data and per-variant solutions.
#[derive(Debug, Clone)]
pub struct ExperimentArtifacts {
    pub group_modes: Vec<Vec<f64>>,
    pub group_means: Vec<Vec<f64>>,
    /// Per dimension: (bin center, count) over the full pool.
    pub marginal_histograms: Vec<Vec<(f64, usize)>>,
    /// For two-dimensional pools: (center_1, center_2, count).
    pub bivariate_histogram: Option<Vec<(f64, f64, usize)>>,
    pub solutions: Vec<(String, SolutionRows)>,
    pub pool: Option<ScenarioPool>,
}

pub fn run_experiment(
    config: &ExperimentConfig,
    base_dir: &Path,
) -> Result<(ExperimentReport, ExperimentArtifacts), ExperimentError> {
    config.validate()?;

    let case_path = resolve(base_dir, &config.case.path);
    let mut network = parse_case(&case_path)?;
    network.apply_overrides(&config.case_overrides())?;
    let network = network.with_wind(
        config
            .wind
            .iter()
            .map(|w| WindPlant { bus: w.bus, forecast_mw: w.forecast_mw })
            .collect(),
    )?;

    // Independent, seed-derived streams per stage keep every stage
    // reproducible regardless of the others' draw counts.
    let mut pool_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut group_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e3779b9));
    let mut eval_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x2545f491));

    let pool = generate_synthetic_pool(&config.synthetic, config.data.pool_size, &mut pool_rng)?;
    let est_pool = if config.data.trim_outliers {
        pool.trim_outliers(config.data.trim_quantile)?
    } else {
        pool.clone()
    };
    let moments = estimate_moments(&pool)?;

    // Group-wise mode estimates; sampling without replacement per group.
    let mut group_modes_v: Vec<DVector<f64>> = Vec::with_capacity(config.data.n_groups);
    let mut group_means: Vec<Vec<f64>> = Vec::with_capacity(config.data.n_groups);
    for _ in 0..config.data.n_groups {
        let idx = rand::seq::index::sample(
            &mut group_rng,
            est_pool.len(),
            config.data.n_data.min(est_pool.len()),
        )
        .into_vec();
        let group = est_pool.select(&idx)?;
        group_modes_v.push(estimate_mode_histogram(&group, config.data.n_bins)?);
        let mean = group.samples().row_mean();
        group_means.push(mean.iter().copied().collect());
    }
    let support = build_mode_support(&group_modes_v, config.uncertainty.support_shape)?;
    let d2_mode = estimate_mode_histogram(&est_pool, config.data.n_bins)?;

    let eval_size = config.evaluation.batches * config.evaluation.batch_size;
    let eval_pool = generate_synthetic_pool(&config.synthetic, eval_size, &mut eval_rng)?;

    let uni = UnimodalityConfig::new(config.uncertainty.alpha, config.uncertainty.epsilon)
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let opf_options = OpfOptions {
        reserve_cost_factor: config.case.reserve_cost_factor,
        uniform_mode_feasibility: if config.uncertainty.uniform_mode_feasibility {
            Some(support.clone())
        } else {
            None
        },
    };
    let solver = ClarabelSolver::default();
    let solve_opts = SolveOptions {
        max_iter: config.solver.max_iter,
        violation_tol: config.solver.violation_tol,
        ..Default::default()
    };

    let mut variants = Vec::new();
    let mut solutions = Vec::new();
    for kind_name in &config.uncertainty.ambiguity_sets {
        let run = run_variant(
            kind_name,
            &network,
            &moments,
            &support,
            &d2_mode,
            uni,
            &opf_options,
            &solver,
            &solve_opts,
            &eval_pool,
            config,
        );
        match run {
            Ok((result, solution)) => {
                variants.push(result);
                solutions.push((kind_name.clone(), solution));
            }
            Err(e) => {
                log::warn!("variant {kind_name} failed: {e}");
                variants.push(failed_variant(kind_name, e.to_string()));
            }
        }
    }
    log_soft_checks(&variants);

    let (support_lo, support_hi) = match &support {
        ModeSupport::Rectangle { lo, hi } => (
            Some(lo.iter().copied().collect()),
            Some(hi.iter().copied().collect()),
        ),
        _ => (None, None),
    };
    let report = ExperimentReport {
        seed: config.seed,
        epsilon: config.uncertainty.epsilon,
        alpha: config.uncertainty.alpha,
        support_shape: format!("{:?}", config.uncertainty.support_shape).to_lowercase(),
        support_lo,
        support_hi,
        d2_mode: d2_mode.iter().copied().collect(),
        estimated_mean: moments.mu().iter().copied().collect(),
        variants,
    };
    let artifacts = ExperimentArtifacts {
        group_modes: group_modes_v.iter().map(|m| m.iter().copied().collect()).collect(),
        group_means,
        marginal_histograms: marginal_histograms(&pool, config.data.n_bins),
        bivariate_histogram: bivariate_histogram(&pool, config.data.n_bins),
        solutions,
        pool: if config.output.write_pool { Some(pool) } else { None },
    };
    Ok((report, artifacts))
}

#[allow(clippy::too_many_arguments)]
fn run_variant(
    kind_name: &str,
    network: &crate::dcopf::Network,
    moments: &MomentData,
    support: &ModeSupport,
    d2_mode: &DVector<f64>,
    uni: UnimodalityConfig,
    opf_options: &OpfOptions,
    solver: &ClarabelSolver,
    solve_opts: &SolveOptions,
    eval_pool: &ScenarioPool,
    config: &ExperimentConfig,
) -> Result<(VariantResult, SolutionRows), ExperimentError> {
    let kind = match kind_name {
        "D1" => AmbiguityKind::D1,
        "D2" => AmbiguityKind::D2 { mode: d2_mode.clone() },
        "D3" => AmbiguityKind::D3 { support: support.clone() },
        "D4" => AmbiguityKind::D4,
        "D5" => AmbiguityKind::D5,
        other => return Err(ExperimentError::Config(format!("unknown set '{other}'"))),
    };
    let ambiguity = AmbiguityConfig::new(kind, uni)
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let built = build_problem(network, moments, &ambiguity, opf_options)?;

    // An iteration-limited solve still carries its best iterate; keep it
    // and report non-convergence instead of dropping the variant.
    let report: SolveReport = match solve_drcc(&built.problem, solver, solve_opts) {
        Ok(r) => r,
        Err(MasterError::IterationLimit { report, .. }) => *report,
        Err(e) => return Err(e.into()),
    };

    let x = report.x_vector();
    let decision = decode_decision(network, &x);
    let solution = realize_rows(&built.problem, &built.row_labels, &x);
    let reliability = evaluate_reliability(
        &solution.rows,
        eval_pool,
        config.evaluation.batches,
        config.evaluation.batch_size,
    )?;

    let generation_cost = decision.generation_cost(network);
    let reserve_cost = decision.reserve_cost(network, config.case.reserve_cost_factor);
    Ok((
        VariantResult {
            kind: kind_name.to_string(),
            converged: report.converged,
            total_cost: generation_cost + reserve_cost,
            generation_cost,
            reserve_cost,
            up_reserve_mw: decision.r_up.sum(),
            down_reserve_mw: decision.r_dn.sum(),
            iterations: report.iterations,
            cuts_added: report.cuts_added,
            wall_seconds: report.wall_seconds,
            residual_violation: report.residual_violation,
            reliability_min: reliability.min,
            reliability_avg: reliability.avg,
            reliability_max: reliability.max,
            error: None,
        },
        solution,
    ))
}

fn failed_variant(kind: &str, error: String) -> VariantResult {
    VariantResult {
        kind: kind.to_string(),
        converged: false,
        total_cost: f64::NAN,
        generation_cost: f64::NAN,
        reserve_cost: f64::NAN,
        up_reserve_mw: f64::NAN,
        down_reserve_mw: f64::NAN,
        iterations: 0,
        cuts_added: 0,
        wall_seconds: 0.0,
        residual_violation: f64::NAN,
        reliability_min: f64::NAN,
        reliability_avg: f64::NAN,
        reliability_max: f64::NAN,
        error: Some(error),
    }
}

/// Expected orderings from the moment/unimodality hierarchy; violations are
/// logged (they can be legitimate Monte-Carlo noise) rather than fatal.
fn log_soft_checks(variants: &[VariantResult]) {
    let get = |k: &str| variants.iter().find(|v| v.kind == k && v.error.is_none());
    if let (Some(d1), Some(d2)) = (get("D1"), get("D2")) {
        if d1.reliability_avg + 1e-9 < d2.reliability_avg {
            log::warn!(
                "soft check: reliability(D1) {:.2} below reliability(D2) {:.2}",
                d1.reliability_avg,
                d2.reliability_avg
            );
        }
    }
    if let Some(d1) = get("D1") {
        for v in variants.iter().filter(|v| v.kind != "D1" && v.error.is_none()) {
            if v.total_cost > d1.total_cost * (1.0 + 1e-9) {
                log::warn!(
                    "soft check: cost({}) {:.1} above cost(D1) {:.1}",
                    v.kind,
                    v.total_cost,
                    d1.total_cost
                );
            }
        }
    }
}

fn marginal_histograms(pool: &ScenarioPool, n_bins: usize) -> Vec<Vec<(f64, usize)>> {
    let (lo, hi) = pool.bounding_box();
    let n = pool.dim();
    (0..n)
        .map(|j| {
            let width = (hi[j] - lo[j]) / n_bins as f64;
            let mut counts = vec![0usize; n_bins];
            for i in 0..pool.len() {
                let cell = if width > 0.0 {
                    (((pool.samples()[(i, j)] - lo[j]) / width).floor() as usize).min(n_bins - 1)
                } else {
                    0
                };
                counts[cell] += 1;
            }
            counts
                .into_iter()
                .enumerate()
                .map(|(c, cnt)| (lo[j] + (c as f64 + 0.5) * width, cnt))
                .collect()
        })
        .collect()
}

fn bivariate_histogram(pool: &ScenarioPool, n_bins: usize) -> Option<Vec<(f64, f64, usize)>> {
    if pool.dim() != 2 {
        return None;
    }
    let (lo, hi) = pool.bounding_box();
    let w0 = (hi[0] - lo[0]) / n_bins as f64;
    let w1 = (hi[1] - lo[1]) / n_bins as f64;
    let mut counts = vec![0usize; n_bins * n_bins];
    for i in 0..pool.len() {
        let c0 = if w0 > 0.0 {
            (((pool.samples()[(i, 0)] - lo[0]) / w0).floor() as usize).min(n_bins - 1)
        } else {
            0
        };
        let c1 = if w1 > 0.0 {
            (((pool.samples()[(i, 1)] - lo[1]) / w1).floor() as usize).min(n_bins - 1)
        } else {
            0
        };
        counts[c0 * n_bins + c1] += 1;
    }
    Some(
        counts
            .into_iter()
            .enumerate()
            .map(|(idx, cnt)| {
                let (c0, c1) = (idx / n_bins, idx % n_bins);
                (
                    lo[0] + (c0 as f64 + 0.5) * w0,
                    lo[1] + (c1 as f64 + 0.5) * w1,
                    cnt,
                )
            })
            .collect(),
    )
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Writes the report bundle: a JSON summary, a per-variant CSV, plot-ready
/// mode scatter / histogram CSVs, and per-variant solution files for the
/// standalone reliability evaluation. Returns the created paths.
pub fn write_outputs(
    report: &ExperimentReport,
    artifacts: &ExperimentArtifacts,
    dir: &Path,
) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let summary = dir.join("summary.json");
    std::fs::write(&summary, serde_json::to_string_pretty(report)?)?;
    written.push(summary);

    let results = dir.join("results.csv");
    {
        let mut f = std::fs::File::create(&results)?;
        writeln!(
            f,
            "kind,converged,total_cost,generation_cost,reserve_cost,up_reserve_mw,\
             down_reserve_mw,iterations,cuts_added,wall_seconds,residual_violation,\
             reliability_min,reliability_avg,reliability_max,error"
        )?;
        for v in &report.variants {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                v.kind,
                v.converged,
                v.total_cost,
                v.generation_cost,
                v.reserve_cost,
                v.up_reserve_mw,
                v.down_reserve_mw,
                v.iterations,
                v.cuts_added,
                v.wall_seconds,
                v.residual_violation,
                v.reliability_min,
                v.reliability_avg,
                v.reliability_max,
                v.error.as_deref().unwrap_or("")
            )?;
        }
        written.push(results);
    }

    let scatter = dir.join("mode_scatter.csv");
    {
        let mut f = std::fs::File::create(&scatter)?;
        let dim = artifacts.group_modes.first().map_or(0, Vec::len);
        let mean_cols: Vec<String> = (0..dim).map(|j| format!("mean_{}", j + 1)).collect();
        let mode_cols: Vec<String> = (0..dim).map(|j| format!("mode_{}", j + 1)).collect();
        writeln!(f, "group,{},{}", mean_cols.join(","), mode_cols.join(","))?;
        for (g, (mean, mode)) in
            artifacts.group_means.iter().zip(artifacts.group_modes.iter()).enumerate()
        {
            let mean_s: Vec<String> = mean.iter().map(|v| v.to_string()).collect();
            let mode_s: Vec<String> = mode.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{},{},{}", g, mean_s.join(","), mode_s.join(","))?;
        }
        written.push(scatter);
    }

    let marginals = dir.join("histogram_marginal.csv");
    {
        let mut f = std::fs::File::create(&marginals)?;
        writeln!(f, "dim,bin_center,count")?;
        for (j, hist) in artifacts.marginal_histograms.iter().enumerate() {
            for (center, count) in hist {
                writeln!(f, "{},{},{}", j + 1, center, count)?;
            }
        }
        written.push(marginals);
    }

    if let Some(biv) = &artifacts.bivariate_histogram {
        let path = dir.join("histogram_bivariate.csv");
        let mut f = std::fs::File::create(&path)?;
        writeln!(f, "center_1,center_2,count")?;
        for (c1, c2, count) in biv {
            writeln!(f, "{},{},{}", c1, c2, count)?;
        }
        written.push(path);
    }

    for (kind, solution) in &artifacts.solutions {
        let path = dir.join(format!("solution_{kind}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(solution)?)?;
        written.push(path);
    }

    if let Some(pool) = &artifacts.pool {
        let path = dir.join("pool.csv");
        let mut f = std::fs::File::create(&path)?;
        pool.write_csv(&mut f)?;
        written.push(path);
    }
    Ok(written)
}
