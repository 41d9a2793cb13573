//! Command-line driver for the distance-cost transport toolkit.
//!
//! Every subcommand reads a JSON run configuration (`--config`), applies
//! any command-line overrides (command line wins), resolves the instance,
//! computes, and only then writes result files into the configured output
//! directory. Validation failures therefore never leave partial outputs.
//!
//! Exit codes: `0` success, `1` configuration or input error, `2` solver
//! error, `3` approximation schedule completed with per-epsilon failures.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use monge_core::approximation::run_schedule;
use monge_core::config::{ResolvedInstance, RunConfig};
use monge_core::geometry::{distance, interpolate, point, Point};
use monge_core::io::{fmt_float, write_json, write_run_csv};
use monge_core::measures::{
    check_net_cardinality, estimate_doubling, greedy_eps_net, support_diameter, DiscreteMeasure,
    DoublingEstimate,
};
use monge_core::selection::{check_restricted_monotonicity, solve_two_stage};
use monge_core::transport::{build_cost, check_cyclical_monotonicity, solve_kantorovich};
use monge_core::verification::{
    check_interpolant_disjointness, convergence_report, default_separation_tol, splitting_index,
};
use monge_core::{MongeError, Result};

/// Default collinearity tolerance for restricted monotonicity checks.
const DEFAULT_COLLINEARITY_TOL: f64 = 1e-7;

/// Interpolation time used by the `verify` disjointness check.
const DEFAULT_DISJOINTNESS_TIME: f64 = 0.5;

#[derive(Parser)]
#[command(
    name = "monge",
    version,
    about = "Distance-cost optimal transport: exact solves, secondary selection, quantized approximation, and structural checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the distance-cost problem; writes plan.json, dual.json, value.txt.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Two-stage selection; writes selection.json and monotonicity.json.
    Secondary {
        #[command(flatten)]
        common: Common,
        /// Collinearity tolerance for the restricted monotonicity check.
        #[arg(long)]
        collinearity: Option<f64>,
    },
    /// Run the quantized approximation schedule; writes run.csv, run.json, summary.json.
    Approx {
        #[command(flatten)]
        common: Common,
        /// Comma-separated epsilon schedule override (strictly decreasing, in (0,1)).
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        /// Doubling exponent override (skips estimation).
        #[arg(long)]
        d: Option<f64>,
        /// Net rule exponent: mesh 1/j with j = ceil(eps^-power).
        #[arg(long)]
        net_power: Option<f64>,
    },
    /// Structural checks on the selected plan; writes verify.json.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Collinearity tolerance for the restricted monotonicity check.
        #[arg(long)]
        collinearity: Option<f64>,
        /// Separation tolerance for interpolant disjointness.
        #[arg(long)]
        separation: Option<f64>,
    },
    /// Sample the segment between two points; writes geodesic.json.
    Geodesic {
        #[command(flatten)]
        common: Common,
        /// First endpoint, comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Second endpoint, comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        /// Number of sample times in [0, 1], endpoints included.
        #[arg(long, default_value_t = 9)]
        samples: usize,
    },
    /// Build a greedy epsilon-net on a measure's support; writes net.json.
    Net {
        #[command(flatten)]
        common: Common,
        /// Net mesh (in the configured metric).
        #[arg(long)]
        epsilon: f64,
        /// Which measure's support to cover.
        #[arg(long, value_enum, default_value = "mu2")]
        measure: MeasurePick,
    },
    /// Estimate a doubling constant and exponent; writes doubling.json.
    Doubling {
        #[command(flatten)]
        common: Common,
        /// Which measure to probe.
        #[arg(long, value_enum, default_value = "mu1")]
        measure: MeasurePick,
        /// Largest probe radius (default: support diameter / 4).
        #[arg(long)]
        radius_cap: Option<f64>,
    },
}

/// Flags shared by every subcommand. Command-line values override the
/// corresponding config fields.
#[derive(Args)]
struct Common {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override any config field by dotted path, e.g. --set approx.d=1.0
    /// or --set metric.kind=euclidean. Values parse as JSON, falling back
    /// to a plain string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory override.
    #[arg(long)]
    output_dir: Option<String>,
    /// RNG seed override for sampled measures.
    #[arg(long)]
    seed: Option<u64>,
    /// Tight-set tolerance override for the selection stage.
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeasurePick {
    Mu1,
    Mu2,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

/// Apply `MONGE_THREADS` to the global worker pool before any parallel work.
fn configure_threads() -> std::result::Result<(), String> {
    match std::env::var("MONGE_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| format!("MONGE_THREADS must be a positive integer, got {raw:?}"))?;
            if n == 0 {
                return Err("MONGE_THREADS must be a positive integer, got 0".to_string());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| format!("failed to configure {n} worker threads: {e}"))
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Solve { common } => cmd_solve(&common),
        Command::Secondary {
            common,
            collinearity,
        } => cmd_secondary(&common, collinearity),
        Command::Approx {
            common,
            epsilons,
            d,
            net_power,
        } => cmd_approx(&common, epsilons, d, net_power),
        Command::Verify {
            common,
            collinearity,
            separation,
        } => cmd_verify(&common, collinearity, separation),
        Command::Geodesic {
            common,
            x,
            y,
            samples,
        } => cmd_geodesic(&common, &x, &y, samples),
        Command::Net {
            common,
            epsilon,
            measure,
        } => cmd_net(&common, epsilon, measure),
        Command::Doubling {
            common,
            measure,
            radius_cap,
        } => cmd_doubling(&common, measure, radius_cap),
    }
}

/// Load the config file, apply overrides, validate, and resolve measures.
/// Nothing is written to disk here.
fn load_instance(common: &Common) -> Result<(RunConfig, ResolvedInstance)> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| {
        MongeError::InvalidConfig(format!("{}: {e}", common.config.display()))
    })?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| {
        MongeError::InvalidConfig(format!("{}: {e}", common.config.display()))
    })?;
    for entry in &common.set {
        apply_override(&mut doc, entry)?;
    }
    if let Some(dir) = &common.output_dir {
        set_path(&mut doc, "output_dir", Value::String(dir.clone()))?;
    }
    if let Some(seed) = common.seed {
        set_path(&mut doc, "seed", Value::from(seed))?;
    }
    if let Some(eta) = common.eta {
        set_path(&mut doc, "tolerances.eta", json_number(eta)?)?;
    }
    let config: RunConfig = serde_json::from_value(doc)
        .map_err(|e| MongeError::InvalidConfig(format!("{}: {e}", common.config.display())))?;
    config.validate()?;
    let base_dir = common
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let instance = config.resolve(&base_dir)?;
    for (name, adj) in &instance.adjustments {
        eprintln!(
            "note: {name} canonicalized ({} duplicate point(s) merged, weight sum {})",
            adj.merged_points,
            fmt_float(adj.original_weight_sum)
        );
    }
    Ok((config, instance))
}

/// Parse a `key=value` override and merge it into the config document.
fn apply_override(doc: &mut Value, entry: &str) -> Result<()> {
    let (key, raw) = entry.split_once('=').ok_or_else(|| {
        MongeError::InvalidConfig(format!("--set expects KEY=VALUE, got {entry:?}"))
    })?;
    let value = serde_json::from_str::<Value>(raw)
        .unwrap_or_else(|_| Value::String(raw.to_string()));
    set_path(doc, key, value)
}

/// Set a dotted path inside a JSON object, creating intermediate objects.
fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = doc;
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(MongeError::InvalidConfig(format!(
            "override path {key:?} has an empty segment"
        )));
    }
    for segment in &segments[..segments.len() - 1] {
        let map = node.as_object_mut().ok_or_else(|| {
            MongeError::InvalidConfig(format!(
                "override path {key:?} descends into a non-object at {segment:?}"
            ))
        })?;
        node = map
            .entry(segment.to_string())
            .or_insert_with(|| Value::Object(serde_json::Map::new()));
    }
    let last = segments[segments.len() - 1];
    let map = node.as_object_mut().ok_or_else(|| {
        MongeError::InvalidConfig(format!(
            "override path {key:?} descends into a non-object at {last:?}"
        ))
    })?;
    map.insert(last.to_string(), value);
    Ok(())
}

fn json_number(v: f64) -> Result<Value> {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .ok_or_else(|| MongeError::ParameterOutOfRange(v))
}

/// Create the output directory once computation has succeeded.
fn output_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&config.output_dir);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn parse_coords(raw: &str, dim: usize, name: &str) -> Result<Point> {
    let coords: std::result::Result<Vec<f64>, _> =
        raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let coords = coords.map_err(|_| {
        MongeError::InvalidConfig(format!(
            "--{name} expects comma-separated coordinates, got {raw:?}"
        ))
    })?;
    if coords.len() != dim {
        return Err(MongeError::DimensionMismatch {
            expected: dim,
            got: coords.len(),
        });
    }
    Ok(point(&coords))
}

fn pick<'a>(instance: &'a ResolvedInstance, which: MeasurePick) -> (&'a DiscreteMeasure, &'a str) {
    match which {
        MeasurePick::Mu1 => (&instance.mu1, "mu1"),
        MeasurePick::Mu2 => (&instance.mu2, "mu2"),
    }
}

#[derive(Serialize)]
struct DualFile<'a> {
    potentials: &'a monge_core::transport::DualPotential,
    lipschitz: &'a monge_core::transport::LipschitzPotential,
}

fn cmd_solve(common: &Common) -> Result<ExitCode> {
    let (config, instance) = load_instance(common)?;
    let rho = build_cost(&instance.mu1, &instance.mu2, &instance.metric, 1.0)?;
    let solution = solve_kantorovich(&instance.mu1, &instance.mu2, &rho)?;
    let lipschitz = monge_core::transport::extract_lipschitz_potential(
        &solution.dual,
        &rho,
        &solution.plan,
    )?;

    let dir = output_dir(&config)?;
    write_json(&dir.join("plan.json"), &solution.plan)?;
    write_json(
        &dir.join("dual.json"),
        &DualFile {
            potentials: &solution.dual,
            lipschitz: &lipschitz,
        },
    )?;
    std::fs::write(
        dir.join("value.txt"),
        format!("{}\n", fmt_float(solution.value)),
    )?;
    println!("transport value: {}", fmt_float(solution.value));
    println!(
        "plan support: {} entries, marginal deviation {}",
        solution.plan.entries().len(),
        fmt_float(solution.plan.max_marginal_deviation())
    );
    println!("wrote plan.json, dual.json, value.txt to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_secondary(common: &Common, collinearity: Option<f64>) -> Result<ExitCode> {
    let (config, instance) = load_instance(common)?;
    let eta = common.eta.or(config.tolerances.eta);
    let solution = solve_two_stage(&instance.mu1, &instance.mu2, &instance.metric, eta)?;
    let tol = collinearity
        .or(config.tolerances.collinearity)
        .unwrap_or(DEFAULT_COLLINEARITY_TOL);
    let monotonicity = check_restricted_monotonicity(&solution.selection.plan, tol)?;

    let dir = output_dir(&config)?;
    write_json(&dir.join("selection.json"), &solution.selection)?;
    write_json(&dir.join("monotonicity.json"), &monotonicity)?;
    println!(
        "primary cost: {} (distance-optimal value {})",
        fmt_float(solution.selection.primary_cost),
        fmt_float(solution.primal.value)
    );
    println!(
        "secondary cost: {} over {} admissible pair(s), eta {}",
        fmt_float(solution.selection.secondary_cost),
        solution.selection.admissible_count,
        fmt_float(solution.selection.eta)
    );
    println!(
        "restricted monotonicity: {} violation(s) across {} pair(s)",
        monotonicity.violations.len(),
        monotonicity.checked_pairs
    );
    println!("wrote selection.json, monotonicity.json to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_approx(
    common: &Common,
    epsilons: Option<Vec<f64>>,
    d: Option<f64>,
    net_power: Option<f64>,
) -> Result<ExitCode> {
    let (mut config, instance) = load_instance(common)?;
    if let Some(eps) = epsilons {
        config.approx.epsilons = eps;
    }
    if let Some(d) = d {
        config.approx.d = Some(d);
    }
    if let Some(power) = net_power {
        config.approx.net_rule.power = power;
    }
    let run = run_schedule(&instance.mu1, &instance.mu2, &instance.metric, &config.approx)?;
    let eta = common
        .eta
        .or(config.approx.eta)
        .or(config.tolerances.eta);
    let direct = solve_two_stage(&instance.mu1, &instance.mu2, &instance.metric, eta)?;
    let report = convergence_report(&run, &direct.selection);

    let dir = output_dir(&config)?;
    write_run_csv(&dir.join("run.csv"), &report.rows)?;
    write_json(&dir.join("run.json"), &run)?;
    write_json(&dir.join("summary.json"), &report)?;
    for row in &report.rows {
        println!(
            "eps {:>8}: j {:>5}, net {:>5}, cost {}, fidelity {}",
            format!("{:.4}", row.epsilon),
            row.j,
            row.net_size,
            fmt_float(row.total),
            fmt_float(row.w1_nu_mu2)
        );
    }
    println!(
        "direct primary {}, final primary {} (relative gap {})",
        fmt_float(report.primary_direct),
        fmt_float(report.primary_final),
        fmt_float(report.primary_gap_rel)
    );
    println!(
        "convergence: {}",
        if report.passed { "PASSED" } else { "FAILED" }
    );
    for (eps, error) in &run.failures {
        eprintln!("epsilon {}: {error}", fmt_float(*eps));
    }
    println!("wrote run.csv, run.json, summary.json to {}", dir.display());
    if run.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

#[derive(Serialize)]
struct VerifyFile {
    splitting: monge_core::verification::SplittingReport,
    monotonicity: monge_core::selection::RestrictedMonotonicityReport,
    cyclical: monge_core::transport::MonotonicityReport,
    disjointness: monge_core::verification::DisjointnessReport,
}

fn cmd_verify(
    common: &Common,
    collinearity: Option<f64>,
    separation: Option<f64>,
) -> Result<ExitCode> {
    let (config, instance) = load_instance(common)?;
    let eta = common.eta.or(config.tolerances.eta);
    let solution = solve_two_stage(&instance.mu1, &instance.mu2, &instance.metric, eta)?;
    let plan = &solution.selection.plan;

    let splitting = splitting_index(plan);
    let coll_tol = collinearity
        .or(config.tolerances.collinearity)
        .unwrap_or(DEFAULT_COLLINEARITY_TOL);
    let monotonicity = check_restricted_monotonicity(plan, coll_tol)?;
    let cyclical =
        check_cyclical_monotonicity(&solution.primal.plan, &solution.rho, 3, 200, config.seed)?;
    let sep_tol = separation
        .or(config.tolerances.separation)
        .unwrap_or_else(|| default_separation_tol(plan));
    let disjointness = check_interpolant_disjointness(plan, DEFAULT_DISJOINTNESS_TIME, sep_tol)?;

    let all_clean = splitting.rounded_map.is_some()
        && monotonicity.is_clean()
        && cyclical.is_clean()
        && disjointness.disjoint;
    let file = VerifyFile {
        splitting,
        monotonicity,
        cyclical,
        disjointness,
    };

    let dir = output_dir(&config)?;
    write_json(&dir.join("verify.json"), &file)?;
    println!(
        "splitting index: {} ({})",
        fmt_float(file.splitting.index),
        if file.splitting.rounded_map.is_some() {
            "within map threshold"
        } else {
            "no rounded map"
        }
    );
    println!(
        "restricted monotonicity: {} violation(s) across {} pair(s)",
        file.monotonicity.violations.len(),
        file.monotonicity.checked_pairs
    );
    println!(
        "cyclical monotonicity (k=3): {} violation(s) across {} tuple(s)",
        file.cyclical.violations.len(),
        file.cyclical.tested
    );
    println!(
        "interpolant slices at t={DEFAULT_DISJOINTNESS_TIME}: {} ({} slice(s), margin {})",
        if file.disjointness.disjoint {
            "disjoint"
        } else {
            "OVERLAPPING"
        },
        file.disjointness.slice_count,
        file.disjointness
            .margin
            .map(fmt_float)
            .unwrap_or_else(|| "n/a".to_string())
    );
    println!("verification: {}", if all_clean { "PASSED" } else { "FAILED" });
    println!("wrote verify.json to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct GeodesicSample {
    t: f64,
    point: Point,
    /// `d(x, p_t) + d(p_t, y) - d(x, y)` (zero on exact geodesics).
    residual: f64,
}

#[derive(Serialize)]
struct GeodesicFile {
    distance: f64,
    samples: Vec<GeodesicSample>,
    max_residual: f64,
}

fn cmd_geodesic(common: &Common, x: &str, y: &str, samples: usize) -> Result<ExitCode> {
    let (config, instance) = load_instance(common)?;
    let dim = config.body.dim();
    let x = parse_coords(x, dim, "x")?;
    let y = parse_coords(y, dim, "y")?;
    if samples < 2 {
        return Err(MongeError::ParameterOutOfRange(samples as f64));
    }
    let total = distance(&instance.metric, &x, &y)?;
    let mut rows = Vec::with_capacity(samples);
    let mut max_residual = 0.0f64;
    for k in 0..samples {
        let t = k as f64 / (samples - 1) as f64;
        let p = interpolate(&x, &y, t)?;
        let residual =
            distance(&instance.metric, &x, &p)? + distance(&instance.metric, &p, &y)? - total;
        max_residual = max_residual.max(residual.abs());
        rows.push(GeodesicSample {
            t,
            point: p,
            residual,
        });
    }
    let file = GeodesicFile {
        distance: total,
        samples: rows,
        max_residual,
    };

    let dir = output_dir(&config)?;
    write_json(&dir.join("geodesic.json"), &file)?;
    println!("distance: {}", fmt_float(total));
    println!(
        "{samples} samples, max additivity residual {}",
        fmt_float(max_residual)
    );
    println!("wrote geodesic.json to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct NetFile {
    measure: String,
    epsilon: f64,
    size: usize,
    covering_radius: f64,
    indices: Vec<usize>,
    points: Vec<Point>,
    /// Cardinality check against the estimated doubling constant; absent
    /// when the support is a single atom.
    cardinality: Option<NetCardinality>,
}

#[derive(Serialize)]
struct NetCardinality {
    estimate: DoublingEstimate,
    diameter: f64,
    bound_ok: bool,
}

fn cmd_net(common: &Common, epsilon: f64, measure: MeasurePick) -> Result<ExitCode> {
    let (config, instance) = load_instance(common)?;
    let (target, name) = pick(&instance, measure);
    let net = greedy_eps_net(target.points(), &instance.metric, epsilon)?;
    let diameter = support_diameter(target, &instance.metric)?;
    let cardinality = if diameter > 0.0 {
        let estimate = estimate_doubling(target, &instance.metric, diameter / 4.0)?;
        let bound_ok = check_net_cardinality(&net, &estimate, diameter);
        Some(NetCardinality {
            estimate,
            diameter,
            bound_ok,
        })
    } else {
        None
    };
    let file = NetFile {
        measure: name.to_string(),
        epsilon: net.epsilon,
        size: net.len(),
        covering_radius: net.covering_radius,
        points: net.indices.iter().map(|&i| target.points()[i].clone()).collect(),
        indices: net.indices.clone(),
        cardinality,
    };

    let dir = output_dir(&config)?;
    write_json(&dir.join("net.json"), &file)?;
    println!(
        "net on {name}: {} node(s) at mesh {}, covering radius {}",
        file.size,
        fmt_float(epsilon),
        fmt_float(file.covering_radius)
    );
    match &file.cardinality {
        Some(card) => println!(
            "cardinality bound (C = {}, d = {}): {}",
            fmt_float(card.estimate.c),
            fmt_float(card.estimate.d),
            if card.bound_ok { "satisfied" } else { "VIOLATED" }
        ),
        None => println!("cardinality bound: skipped (single-atom support)"),
    }
    println!("wrote net.json to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_doubling(
    common: &Common,
    measure: MeasurePick,
    radius_cap: Option<f64>,
) -> Result<ExitCode> {
    let (config, instance) = load_instance(common)?;
    let (target, name) = pick(&instance, measure);
    let diameter = support_diameter(target, &instance.metric)?;
    let estimate = match radius_cap {
        Some(cap) => estimate_doubling(target, &instance.metric, cap)?,
        None if diameter > 0.0 => estimate_doubling(target, &instance.metric, diameter / 4.0)?,
        // A single atom is 0-dimensional: every ball holds all the mass.
        None => DoublingEstimate {
            c: 1.0,
            d: 0.0,
            radius_cap: 0.0,
        },
    };

    let dir = output_dir(&config)?;
    let mut file = BTreeMap::new();
    file.insert("measure", serde_json::to_value(name).unwrap());
    file.insert("estimate", serde_json::to_value(estimate).unwrap());
    write_json(&dir.join("doubling.json"), &file)?;
    println!(
        "doubling on {name}: C = {}, d = {} (radius cap {})",
        fmt_float(estimate.c),
        fmt_float(estimate.d),
        fmt_float(estimate.radius_cap)
    );
    println!("wrote doubling.json to {}", dir.display());
    Ok(ExitCode::SUCCESS)
}
