//! Structural checkers for transport plans: map-ness (splitting index),
//! transport-set sampling, and interpolated-slice disjointness.
//!
//! These diagnostics probe the mechanisms that make the distance-cost
//! problem solvable by a *map* in the continuum limit. None of them can
//! certify map existence on discrete data — they measure how close a
//! plan is to one and whether the structural properties that force
//! map-ness (monotone, non-overlapping transport rays) hold.

use serde::Serialize;

use crate::error::{MongeError, Result};
use crate::geometry::{interpolate, Point};
use crate::transport::{CostProvenance, TransportPlan};
use crate::vecmath::dist;

/// Above this splitting index no rounded map is emitted: the plan is too
/// far from being induced by a map for the argmax rounding to mean much.
pub const DEFAULT_MAP_THRESHOLD: f64 = 0.05;

// ---------------------------------------------------------------------------
// Splitting index
// ---------------------------------------------------------------------------

/// The source whose mass is split the worst.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstSplit {
    pub source: usize,
    /// Fraction of the source's mass retained by its heaviest target.
    pub retained: f64,
}

/// How far a plan is from being induced by a map.
///
/// `index = Σ_i (μ₁_i − max_j π_ij)` is zero exactly when every source
/// sends all its mass to a single target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplittingReport {
    pub index: f64,
    pub threshold: f64,
    pub worst_source: Option<WorstSplit>,
    /// Argmax target per source (ties broken by smallest target index);
    /// emitted only when `index <= threshold` and every source carries
    /// at least one entry.
    pub rounded_map: Option<Vec<usize>>,
}

impl SplittingReport {
    /// True when the plan is induced by a map up to round-off.
    pub fn is_map(&self) -> bool {
        self.index <= 1e-12
    }
}

/// Compute the splitting index with the default map-emission threshold.
pub fn splitting_index(plan: &TransportPlan) -> SplittingReport {
    splitting_index_with_threshold(plan, DEFAULT_MAP_THRESHOLD)
}

/// Compute the splitting index; a rounded argmax map is attached when
/// the index is at most `threshold`.
pub fn splitting_index_with_threshold(plan: &TransportPlan, threshold: f64) -> SplittingReport {
    let m = plan.source().len();
    // max mass and its (smallest) target per source; entries are sorted
    // by (i, j) so a strict > keeps the smallest tying target.
    let mut max_mass = vec![0.0_f64; m];
    let mut argmax: Vec<Option<usize>> = vec![None; m];
    for e in plan.entries() {
        if e.mass > max_mass[e.i] {
            max_mass[e.i] = e.mass;
            argmax[e.i] = Some(e.j);
        }
    }
    let mut index = 0.0;
    let mut worst: Option<WorstSplit> = None;
    for i in 0..m {
        let w = plan.source().weight(i);
        index += w - max_mass[i];
        let retained = max_mass[i] / w;
        if worst.as_ref().map_or(true, |ws| retained < ws.retained) {
            worst = Some(WorstSplit {
                source: i,
                retained,
            });
        }
    }
    let rounded_map = if index <= threshold && argmax.iter().all(|a| a.is_some()) {
        Some(argmax.into_iter().map(|a| a.unwrap()).collect())
    } else {
        None
    };
    SplittingReport {
        index,
        threshold,
        worst_source: worst,
        rounded_map,
    }
}

// ---------------------------------------------------------------------------
// Transport set
// ---------------------------------------------------------------------------

/// Straight-segment samples `P_t(x, y)` over the plan's support pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportSetSample {
    /// Entry-major, grid-minor: for each support pair in plan order, one
    /// point per grid value.
    pub points: Vec<Point>,
}

/// Sample the union of transport segments at the given parameter grid.
/// Each grid value must lie in `[0, 1]`.
pub fn transport_set(plan: &TransportPlan, t_grid: &[f64]) -> Result<TransportSetSample> {
    for &t in t_grid {
        if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
            return Err(MongeError::ParameterOutOfRange(t));
        }
    }
    let mut points = Vec::with_capacity(plan.entries().len() * t_grid.len());
    for e in plan.entries() {
        let x = plan.source().point(e.i);
        let y = plan.target().point(e.j);
        for &t in t_grid {
            points.push(interpolate(x, y, t)?);
        }
    }
    Ok(TransportSetSample { points })
}

// ---------------------------------------------------------------------------
// Interpolant disjointness
// ---------------------------------------------------------------------------

/// Outcome of the slice-disjointness check at a fixed interpolation time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisjointnessReport {
    pub t: f64,
    pub separation_tol: f64,
    /// Number of distinct targets carrying mass.
    pub slice_count: usize,
    /// Minimum Euclidean distance between points of different slices;
    /// `None` when fewer than two slices exist.
    pub margin: Option<f64>,
    pub disjoint: bool,
}

/// Default separation tolerance: `1e-9` times the Euclidean diameter of
/// the plan's combined support.
pub fn default_separation_tol(plan: &TransportPlan) -> f64 {
    let mut pts: Vec<&Point> = plan.source().points().iter().collect();
    pts.extend(plan.target().points().iter());
    let mut diam = 0.0_f64;
    for (a, pa) in pts.iter().enumerate() {
        for pb in pts.iter().skip(a + 1) {
            diam = diam.max(dist(pa.coords(), pb.coords()));
        }
    }
    1e-9 * diam
}

/// For each target atom, form the slice `{P_t(x, y) : (x, y) in support}`
/// and require the slices of distinct targets to keep a strictly positive
/// Euclidean distance from one another.
///
/// Only meaningful for plans optimal under a strictly convex cost, so the
/// plan's cost provenance must be a quantized `ρ + ε|x−y|²` cost or the
/// squared-Euclidean cost; plain distance-cost plans are rejected.
pub fn check_interpolant_disjointness(
    plan: &TransportPlan,
    t: f64,
    separation_tol: f64,
) -> Result<DisjointnessReport> {
    match plan.provenance() {
        CostProvenance::Quantized { .. } | CostProvenance::SquaredEuclidean => {}
        CostProvenance::MetricPower { .. } => {
            return Err(MongeError::ProvenanceMismatch(
                "slice disjointness needs a strictly convex cost; \
                 this plan was solved for a plain distance cost"
                    .into(),
            ))
        }
    }
    if !(t.is_finite() && t > 0.0 && t < 1.0) {
        return Err(MongeError::ParameterOutOfRange(t));
    }
    if !(separation_tol.is_finite() && separation_tol >= 0.0) {
        return Err(MongeError::ParameterOutOfRange(separation_tol));
    }

    // Group interpolants by target, preserving target order.
    let n = plan.target().len();
    let mut slices: Vec<Vec<Point>> = vec![Vec::new(); n];
    for e in plan.entries() {
        let x = plan.source().point(e.i);
        let y = plan.target().point(e.j);
        slices[e.j].push(interpolate(x, y, t)?);
    }
    let slices: Vec<Vec<Point>> = slices.into_iter().filter(|s| !s.is_empty()).collect();

    let mut margin: Option<f64> = None;
    for (a, sa) in slices.iter().enumerate() {
        for sb in slices.iter().skip(a + 1) {
            for pa in sa {
                for pb in sb {
                    let d = dist(pa.coords(), pb.coords());
                    margin = Some(match margin {
                        Some(m) => m.min(d),
                        None => d,
                    });
                }
            }
        }
    }
    Ok(DisjointnessReport {
        t,
        separation_tol,
        slice_count: slices.len(),
        margin,
        disjoint: margin.map_or(true, |m| m > separation_tol),
    })
}

// ---------------------------------------------------------------------------
// Convergence report
// ---------------------------------------------------------------------------

/// One row of the trend table: the CSV columns for a single ε.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendRow {
    pub epsilon: f64,
    pub j: usize,
    pub net_size: usize,
    pub fidelity: f64,
    pub transport: f64,
    pub cardinality: f64,
    pub total: f64,
    pub w1_nu_mu2: f64,
    pub primary_cost: f64,
    pub secondary_cost: f64,
    pub splitting_index: f64,
}

impl TrendRow {
    /// Column names, in emission order.
    pub const COLUMNS: [&'static str; 11] = [
        "epsilon",
        "j",
        "net_size",
        "fidelity",
        "transport",
        "cardinality",
        "total",
        "w1_nu_mu2",
        "primary_cost",
        "secondary_cost",
        "splitting_index",
    ];
}

/// Thresholds the summary is gated against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceThresholds {
    /// Allowed relative gap between the final `∫ρ dπ_ε` and the directly
    /// selected primary cost.
    pub primary_rel_gap: f64,
    /// Allowed splitting index of the final plan.
    pub splitting: f64,
}

impl Default for ConvergenceThresholds {
    fn default() -> Self {
        ConvergenceThresholds {
            primary_rel_gap: 0.05,
            splitting: DEFAULT_MAP_THRESHOLD,
        }
    }
}

/// Aggregated pass/fail summary of a schedule run against a direct
/// two-stage solve of the same instance.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<TrendRow>,
    pub thresholds: ConvergenceThresholds,
    /// False when the schedule had a single ε: trend comparisons are
    /// skipped (and pass vacuously) with this as the notice.
    pub trend_checked: bool,
    pub fidelity_nonincreasing: bool,
    pub final_fidelity_bound: f64,
    pub fidelity_bound_ok: bool,
    pub primary_direct: f64,
    pub primary_final: f64,
    pub primary_gap_rel: f64,
    pub primary_ok: bool,
    pub secondary_direct: f64,
    pub secondary_final: f64,
    pub secondary_gap_rel: f64,
    pub final_splitting: f64,
    pub splitting_ok: bool,
    pub passed: bool,
}

/// Summarize a schedule run against the direct two-stage solution,
/// gating on the default thresholds.
pub fn convergence_report(
    run: &crate::approximation::ApproxRun,
    direct: &crate::selection::SelectionResult,
) -> ConvergenceReport {
    convergence_report_with_thresholds(run, direct, ConvergenceThresholds::default())
}

/// Summarize with explicit thresholds.
pub fn convergence_report_with_thresholds(
    run: &crate::approximation::ApproxRun,
    direct: &crate::selection::SelectionResult,
    thresholds: ConvergenceThresholds,
) -> ConvergenceReport {
    let rows: Vec<TrendRow> = run
        .records
        .iter()
        .map(|r| TrendRow {
            epsilon: r.epsilon,
            j: r.j,
            net_size: r.net_size,
            fidelity: r.breakdown.fidelity,
            transport: r.breakdown.transport,
            cardinality: r.breakdown.cardinality,
            total: r.breakdown.total,
            w1_nu_mu2: r.w1_nu_mu2,
            primary_cost: r.primary_cost,
            secondary_cost: r.secondary_cost,
            splitting_index: r.splitting,
        })
        .collect();
    let last = rows.last().expect("runs keep at least one record");

    let rel = |value: f64, reference: f64| -> f64 {
        (value - reference).abs() / reference.abs().max(1e-12)
    };
    let primary_gap_rel = rel(last.primary_cost, direct.primary_cost);
    let secondary_gap_rel = rel(last.secondary_cost, direct.secondary_cost);
    let primary_ok = primary_gap_rel <= thresholds.primary_rel_gap;
    let splitting_ok = last.splitting_index <= thresholds.splitting;
    let passed = run.trend.fidelity_nonincreasing
        && run.trend.final_within_mesh_bound
        && primary_ok
        && splitting_ok;
    ConvergenceReport {
        thresholds,
        trend_checked: run.trend.checked,
        fidelity_nonincreasing: run.trend.fidelity_nonincreasing,
        final_fidelity_bound: run.trend.mesh_bound,
        fidelity_bound_ok: run.trend.final_within_mesh_bound,
        primary_direct: direct.primary_cost,
        primary_final: last.primary_cost,
        primary_gap_rel,
        primary_ok,
        secondary_direct: direct.secondary_cost,
        secondary_final: last.secondary_cost,
        secondary_gap_rel,
        final_splitting: last.splitting_index,
        splitting_ok,
        passed,
        rows,
    }
}
