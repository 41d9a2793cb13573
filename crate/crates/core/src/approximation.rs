//! The ε-quantization scheme: trade transport cost against the
//! complexity of the second marginal.
//!
//! For a plan π with first marginal μ₁ and *free*, finitely supported
//! second marginal ν, define
//!
//! ```text
//! C_ε(π) = (1/ε)·W₁(ν, μ₂)  +  ∫ (ρ + ε|x−y|²) dπ  +  ε^{3d+2}·#supp(ν)
//! ```
//!
//! where d is the doubling exponent of supp μ₂. As ε → 0 the fidelity
//! term forces ν → μ₂, the quadratic regularization selects among
//! distance-optimal plans, and the cardinality term keeps supports
//! finite. Minimizing C_ε exactly over all finite ν is combinatorial, so
//! the minimizer search is restricted to the candidate family that the
//! scheme's own analysis uses: ε-nets of supp μ₂ at meshes `1/j` for
//! `j ∈ {j(ε)/2, j(ε), 2j(ε)}` with `j(ε) = ⌈ε^{-2}⌉` by default. For
//! each candidate support the remaining problem *is* a linear program
//! (π and the fidelity coupling jointly), solved exactly. Projections
//! of a directly solved W₁-optimal plan onto each net are evaluated as
//! reference candidates, so the returned minimizer is certified no worse
//! than the classical comparison plans.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MongeError, Result};
use crate::geometry::{distance, MetricSpec, Point};
use crate::measures::{
    estimate_doubling, greedy_eps_net, nearest_point_projection, project_measure,
    support_diameter, DiscreteMeasure,
};
use crate::transport::{
    build_cost, solve_kantorovich, solve_min_cost_flow, CostProvenance, NetworkProblem,
    PlanEntry, TransportPlan,
};
use crate::vecmath::dist2;
use crate::verification::{
    check_interpolant_disjointness, default_separation_tol, splitting_index,
};

/// Atoms at or below this mass do not count toward the cardinality term.
pub const MASS_FLOOR: f64 = 1e-12;
/// Slack allowed on the net-projection transport bound
/// `W₁(projected, original) ≤ mesh`.
const QUANTIZATION_SLACK: f64 = 1e-9;
/// The winner must evaluate no worse than any candidate by more than this.
const CERTIFICATE_TOL: f64 = 1e-8;
/// Slack for the "fidelity nonincreasing along the schedule" trend flag.
const TREND_SLACK: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Mesh-count rule `j(ε) = ⌈ε^{-power}⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetRule {
    pub power: f64,
}

impl Default for NetRule {
    fn default() -> Self {
        NetRule { power: 2.0 }
    }
}

impl NetRule {
    pub fn j(&self, epsilon: f64) -> usize {
        epsilon.powf(-self.power).ceil() as usize
    }
}

/// The default geometric schedule `0.4 · 2^{-k}`, k = 0..4.
pub fn default_schedule() -> Vec<f64> {
    (0..5).map(|k| 0.4 * 0.5f64.powi(k)).collect()
}

/// Schedule and knobs for the ε-scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxConfig {
    /// Strictly decreasing, all in (0, 1).
    #[serde(default = "default_schedule")]
    pub epsilons: Vec<f64>,
    /// Doubling exponent override; estimated from supp μ₂ when absent.
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub net_rule: NetRule,
    /// Tight-set tolerance handed to a selection stage that follows the
    /// run (the scheme itself does not consume it).
    #[serde(default)]
    pub eta: Option<f64>,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            epsilons: default_schedule(),
            d: None,
            net_rule: NetRule::default(),
            eta: None,
        }
    }
}

impl ApproxConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(MongeError::InvalidConfig("empty epsilon schedule".into()));
        }
        for &e in &self.epsilons {
            if !(e.is_finite() && e > 0.0 && e < 1.0) {
                return Err(MongeError::ParameterOutOfRange(e));
            }
        }
        for w in self.epsilons.windows(2) {
            if w[1] >= w[0] {
                return Err(MongeError::InvalidConfig(format!(
                    "epsilon schedule must be strictly decreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(d) = self.d {
            if !(d.is_finite() && d >= 0.0) {
                return Err(MongeError::ParameterOutOfRange(d));
            }
        }
        if !(self.net_rule.power.is_finite() && self.net_rule.power > 0.0) {
            return Err(MongeError::ParameterOutOfRange(self.net_rule.power));
        }
        if let Some(eta) = self.eta {
            if !(eta.is_finite() && eta >= 0.0) {
                return Err(MongeError::ParameterOutOfRange(eta));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// The functional
// ---------------------------------------------------------------------------

/// The regularized pair cost `ρ(x, y) + ε|x−y|²` (`|·|` Euclidean).
pub fn c_eps_cost(metric: &MetricSpec, epsilon: f64, x: &Point, y: &Point) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(MongeError::ParameterOutOfRange(epsilon));
    }
    Ok(distance(metric, x, y)? + epsilon * dist2(x.coords(), y.coords()))
}

/// The three terms of `C_ε`, with `total` their exact sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CepsBreakdown {
    pub fidelity: f64,
    pub transport: f64,
    pub cardinality: f64,
    pub total: f64,
}

impl CepsBreakdown {
    fn new(fidelity: f64, transport: f64, cardinality: f64) -> Self {
        CepsBreakdown {
            fidelity,
            transport,
            cardinality,
            total: fidelity + transport + cardinality,
        }
    }
}

fn w1_between(a: &DiscreteMeasure, b: &DiscreteMeasure, metric: &MetricSpec) -> Result<f64> {
    let cost = build_cost(a, b, metric, 1.0)?;
    Ok(solve_kantorovich(a, b, &cost)?.value)
}

/// Evaluate `C_ε` for an arbitrary plan against the reference marginal.
///
/// The fidelity term solves the W₁ problem between the plan's second
/// marginal and `mu2` exactly; the support count ignores atoms at or
/// below the mass floor.
pub fn eval_c_eps(
    pi: &TransportPlan,
    mu2: &DiscreteMeasure,
    metric: &MetricSpec,
    epsilon: f64,
    d: f64,
) -> Result<CepsBreakdown> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(MongeError::ParameterOutOfRange(epsilon));
    }
    if !(d.is_finite() && d >= 0.0) {
        return Err(MongeError::ParameterOutOfRange(d));
    }
    let nu = pi.second_marginal()?;
    let fidelity = w1_between(&nu, mu2, metric)? / epsilon;
    let mut transport = 0.0;
    for e in pi.entries() {
        let x = pi.source().point(e.i);
        let y = pi.target().point(e.j);
        transport += e.mass * c_eps_cost(metric, epsilon, x, y)?;
    }
    let support = nu.weights().iter().filter(|&&w| w > MASS_FLOOR).count();
    let cardinality = epsilon.powf(3.0 * d + 2.0) * support as f64;
    Ok(CepsBreakdown::new(fidelity, transport, cardinality))
}

// ---------------------------------------------------------------------------
// Minimization over the candidate family
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    /// Joint LP over the net support (π and fidelity coupling together).
    Joint,
    /// The directly solved W₁ plan with targets projected onto the net.
    Projected,
}

/// One evaluated candidate from the minimizer search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateReport {
    pub kind: CandidateKind,
    /// Mesh count: the net has mesh `1/j`.
    pub j: usize,
    pub net_size: usize,
    pub breakdown: CepsBreakdown,
}

/// Result of `minimize_c_eps`: the winning plan with its breakdown and
/// the full candidate table that certifies it.
#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub plan: TransportPlan,
    pub breakdown: CepsBreakdown,
    /// Rule value `j(ε)` the candidate meshes bracket.
    pub j: usize,
    /// Net size of the winning candidate.
    pub net_size: usize,
    pub candidates: Vec<CandidateReport>,
    /// Index of the winner in `candidates`.
    pub winner: usize,
}

/// Minimize `C_ε` over the net-supported candidate family.
pub fn minimize_c_eps(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    metric: &MetricSpec,
    epsilon: f64,
    config: &ApproxConfig,
) -> Result<MinimizeOutcome> {
    if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0) {
        return Err(MongeError::ParameterOutOfRange(epsilon));
    }
    let d = resolve_doubling_exponent(mu2, metric, config.d)?;
    let rho = build_cost(mu1, mu2, metric, 1.0)?;
    let direct = solve_kantorovich(mu1, mu2, &rho)?;
    minimize_with_direct(mu1, mu2, metric, epsilon, d, &config.net_rule, &direct.plan)
}

/// Doubling exponent of supp μ₂: user override, or the ball-mass
/// estimate probed up to a quarter of the support diameter. Degenerate
/// supports (single atom) get d = 0.
pub fn resolve_doubling_exponent(
    mu2: &DiscreteMeasure,
    metric: &MetricSpec,
    override_d: Option<f64>,
) -> Result<f64> {
    if let Some(d) = override_d {
        if !(d.is_finite() && d >= 0.0) {
            return Err(MongeError::ParameterOutOfRange(d));
        }
        return Ok(d);
    }
    if mu2.len() < 2 {
        return Ok(0.0);
    }
    let cap = support_diameter(mu2, metric)? / 4.0;
    if cap <= 0.0 {
        return Ok(0.0);
    }
    Ok(estimate_doubling(mu2, metric, cap)?.d)
}

fn minimize_with_direct(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    metric: &MetricSpec,
    epsilon: f64,
    d: f64,
    net_rule: &NetRule,
    direct: &TransportPlan,
) -> Result<MinimizeOutcome> {
    let j_rule = net_rule.j(epsilon);
    let mut j_candidates = vec![(j_rule / 2).max(1), j_rule, 2 * j_rule];
    j_candidates.dedup();

    let mut plans: Vec<(TransportPlan, CandidateReport)> = Vec::new();
    for &jc in &j_candidates {
        let mesh = 1.0 / jc as f64;
        let net = greedy_eps_net(mu2.points(), metric, mesh)?;
        let net_points: Vec<Point> = net.indices.iter().map(|&k| mu2.point(k).clone()).collect();

        // The net must quantize μ₂ within its mesh: projecting onto the
        // net moves every atom at most `mesh`, so W₁ cannot exceed it.
        let projected_mu2 = project_measure(mu2, &net_points, metric)?;
        let quantization = w1_between(&projected_mu2, mu2, metric)?;
        if quantization > mesh + QUANTIZATION_SLACK {
            return Err(MongeError::NumericalFailure(format!(
                "net at mesh {mesh} transports mass {quantization} > mesh"
            )));
        }

        let joint = solve_joint(mu1, mu2, metric, epsilon, &net_points)?;
        let breakdown = eval_c_eps(&joint, mu2, metric, epsilon, d)?;
        plans.push((
            joint,
            CandidateReport {
                kind: CandidateKind::Joint,
                j: jc,
                net_size: net_points.len(),
                breakdown,
            },
        ));

        let projected = project_plan(direct, &net_points, metric, epsilon)?;
        let breakdown = eval_c_eps(&projected, mu2, metric, epsilon, d)?;
        plans.push((
            projected,
            CandidateReport {
                kind: CandidateKind::Projected,
                j: jc,
                net_size: net_points.len(),
                breakdown,
            },
        ));
    }

    let mut winner = 0;
    for (k, (_, report)) in plans.iter().enumerate() {
        if report.breakdown.total < plans[winner].1.breakdown.total {
            winner = k;
        }
    }
    let winning_total = plans[winner].1.breakdown.total;
    for (_, report) in &plans {
        if winning_total > report.breakdown.total + CERTIFICATE_TOL {
            return Err(MongeError::NumericalFailure(
                "minimizer certificate violated across candidates".into(),
            ));
        }
    }

    let candidates: Vec<CandidateReport> = plans.iter().map(|(_, r)| r.clone()).collect();
    let net_size = candidates[winner].net_size;
    let (plan, report) = plans.swap_remove(winner);
    Ok(MinimizeOutcome {
        plan,
        breakdown: report.breakdown,
        j: j_rule,
        net_size,
        candidates,
        winner,
    })
}

/// Solve the fixed-support subproblem exactly: over plans π from μ₁ to a
/// marginal ν supported on the net, and couplings γ from ν to μ₂,
/// minimize `∫c_ε dπ + (1/ε)∫ρ dγ`. One min-cost-flow network with the
/// net points as free interior nodes does both at once.
fn solve_joint(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    metric: &MetricSpec,
    epsilon: f64,
    net_points: &[Point],
) -> Result<TransportPlan> {
    let (m, s, n) = (mu1.len(), net_points.len(), mu2.len());
    let mut arcs = Vec::with_capacity(m * s + s * n);
    let mut costs = Vec::with_capacity(m * s + s * n);
    for i in 0..m {
        for q in 0..s {
            arcs.push((i, m + q));
            costs.push(c_eps_cost(metric, epsilon, mu1.point(i), &net_points[q])?);
        }
    }
    for q in 0..s {
        for k in 0..n {
            arcs.push((m + q, m + s + k));
            costs.push(distance(metric, &net_points[q], mu2.point(k))? / epsilon);
        }
    }
    let mut balances = Vec::with_capacity(m + s + n);
    balances.extend_from_slice(mu1.weights());
    balances.extend(std::iter::repeat(0.0).take(s));
    balances.extend(mu2.weights().iter().map(|w| -w));

    let problem = NetworkProblem {
        node_count: m + s + n,
        balances,
        arcs,
        costs,
    };
    let flow = solve_min_cost_flow(&problem)?;

    // First m*s arcs are the π variables; positive flows become entries.
    let mut nu_weights = vec![0.0f64; s];
    for i in 0..m {
        for q in 0..s {
            nu_weights[q] += flow.flows[i * s + q];
        }
    }
    let mut rank = vec![usize::MAX; s];
    let mut nu_points = Vec::new();
    let mut kept_weights = Vec::new();
    for q in 0..s {
        if nu_weights[q] > 0.0 {
            rank[q] = nu_points.len();
            nu_points.push(net_points[q].clone());
            kept_weights.push(nu_weights[q]);
        }
    }
    let nu = DiscreteMeasure::new(nu_points, kept_weights)?;

    let mut entries = Vec::new();
    let mut value = 0.0;
    for i in 0..m {
        for q in 0..s {
            let mass = flow.flows[i * s + q];
            if mass > 0.0 {
                entries.push(PlanEntry {
                    i,
                    j: rank[q],
                    mass,
                });
                value += mass * problem.costs[i * s + q];
            }
        }
    }
    TransportPlan::new(
        mu1.clone(),
        nu,
        entries,
        CostProvenance::Quantized {
            metric: metric.clone(),
            epsilon,
        },
        value,
        None,
    )
}

/// The comparison plan: keep the directly solved plan's sources but send
/// each target atom to its nearest net point.
fn project_plan(
    direct: &TransportPlan,
    net_points: &[Point],
    metric: &MetricSpec,
    epsilon: f64,
) -> Result<TransportPlan> {
    let assignment = nearest_point_projection(direct.target().points(), net_points, metric)?;
    // Net points that actually receive mass, in net order.
    let mut receives = vec![false; net_points.len()];
    for &q in &assignment {
        receives[q] = true;
    }
    let mut rank = vec![usize::MAX; net_points.len()];
    let mut nu_points = Vec::new();
    for (q, &r) in receives.iter().enumerate() {
        if r {
            rank[q] = nu_points.len();
            nu_points.push(net_points[q].clone());
        }
    }
    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut nu_weights = vec![0.0f64; nu_points.len()];
    for e in direct.entries() {
        let j = rank[assignment[e.j]];
        *merged.entry((e.i, j)).or_insert(0.0) += e.mass;
        nu_weights[j] += e.mass;
    }
    let nu = DiscreteMeasure::new(nu_points, nu_weights)?;
    let mut entries = Vec::with_capacity(merged.len());
    let mut value = 0.0;
    for (&(i, j), &mass) in &merged {
        entries.push(PlanEntry { i, j, mass });
        value += mass * c_eps_cost(metric, epsilon, direct.source().point(i), nu.point(j))?;
    }
    TransportPlan::new(
        direct.source().clone(),
        nu,
        entries,
        CostProvenance::Quantized {
            metric: metric.clone(),
            epsilon,
        },
        value,
        None,
    )
}

// ---------------------------------------------------------------------------
// Schedule runner
// ---------------------------------------------------------------------------

/// Everything recorded for one ε of the schedule.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxRecord {
    pub epsilon: f64,
    /// Rule value j(ε).
    pub j: usize,
    /// Net size of the winning candidate.
    pub net_size: usize,
    pub breakdown: CepsBreakdown,
    /// `W₁(ν_ε, μ₂)` — the fidelity term times ε.
    pub w1_nu_mu2: f64,
    /// `∫ρ dπ_ε`.
    pub primary_cost: f64,
    /// `∫|x−y|² dπ_ε`.
    pub secondary_cost: f64,
    /// Splitting index of π_ε.
    pub splitting: f64,
    pub candidates: Vec<CandidateReport>,
    pub plan: TransportPlan,
}

/// Trend diagnostics over the whole schedule.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxTrend {
    /// False when the schedule has a single ε (nothing to compare).
    pub checked: bool,
    /// `W₁(ν_ε, μ₂)` never increases along the schedule.
    pub fidelity_nonincreasing: bool,
    /// Final `W₁(ν_ε, μ₂)` is at most the initial one.
    pub final_leq_initial: bool,
    /// `2 / j(ε_final)` — the mesh bound the final fidelity must meet.
    pub mesh_bound: f64,
    pub final_within_mesh_bound: bool,
    /// Directly solved `W₁(μ₁, μ₂)`.
    pub direct_primary: f64,
    pub final_primary: f64,
    /// Final `∫ρ dπ_ε` within 5% of the direct optimum.
    pub primary_within_5pct: bool,
    /// Interpolated slices of the final plan at t = 0.5 are disjoint
    /// (`None` when the check itself failed to run).
    pub final_slices_disjoint: Option<bool>,
}

/// A full schedule run: per-ε records (in schedule order, decreasing ε),
/// any per-ε failures, and the trend summary.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxRun {
    /// Doubling exponent used by every record.
    pub d: f64,
    pub records: Vec<ApproxRecord>,
    /// (epsilon, error) for schedule entries that failed.
    pub failures: Vec<(f64, String)>,
    pub trend: ApproxTrend,
}

impl ApproxRun {
    pub fn final_record(&self) -> &ApproxRecord {
        self.records.last().expect("runs always keep >= 1 record")
    }
}

/// Run the scheme over the whole schedule. ε values are independent and
/// solved in parallel; records are assembled in schedule order. Per-ε
/// failures are recorded and skipped as long as at least one ε succeeds.
pub fn run_schedule(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    metric: &MetricSpec,
    config: &ApproxConfig,
) -> Result<ApproxRun> {
    config.validate()?;
    let d = resolve_doubling_exponent(mu2, metric, config.d)?;
    let rho = build_cost(mu1, mu2, metric, 1.0)?;
    let direct = solve_kantorovich(mu1, mu2, &rho)?;

    let outcomes: Vec<(f64, Result<MinimizeOutcome>)> = config
        .epsilons
        .par_iter()
        .map(|&eps| {
            (
                eps,
                minimize_with_direct(mu1, mu2, metric, eps, d, &config.net_rule, &direct.plan),
            )
        })
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (eps, outcome) in outcomes {
        match outcome {
            Ok(out) => {
                let mut primary = 0.0;
                let mut secondary = 0.0;
                for e in out.plan.entries() {
                    let x = out.plan.source().point(e.i);
                    let y = out.plan.target().point(e.j);
                    primary += e.mass * distance(metric, x, y)?;
                    secondary += e.mass * dist2(x.coords(), y.coords());
                }
                records.push(ApproxRecord {
                    epsilon: eps,
                    j: out.j,
                    net_size: out.net_size,
                    breakdown: out.breakdown,
                    w1_nu_mu2: out.breakdown.fidelity * eps,
                    primary_cost: primary,
                    secondary_cost: secondary,
                    splitting: splitting_index(&out.plan).index,
                    candidates: out.candidates,
                    plan: out.plan,
                });
            }
            Err(err) => failures.push((eps, err.to_string())),
        }
    }
    if records.is_empty() {
        return Err(MongeError::NumericalFailure(format!(
            "every epsilon in the schedule failed; first failure: {}",
            failures
                .first()
                .map(|(e, msg)| format!("eps={e}: {msg}"))
                .unwrap_or_default()
        )));
    }

    let first = &records[0];
    let last = records.last().unwrap();
    let fidelity_nonincreasing = records
        .windows(2)
        .all(|w| w[1].w1_nu_mu2 <= w[0].w1_nu_mu2 + TREND_SLACK);
    let mesh_bound = 2.0 / last.j as f64;
    let final_slices_disjoint = if last.plan.target().len() >= 2 {
        check_interpolant_disjointness(&last.plan, 0.5, default_separation_tol(&last.plan))
            .map(|r| r.disjoint)
            .ok()
    } else {
        Some(true)
    };
    let trend = ApproxTrend {
        checked: records.len() >= 2,
        fidelity_nonincreasing,
        final_leq_initial: last.w1_nu_mu2 <= first.w1_nu_mu2 + TREND_SLACK,
        mesh_bound,
        final_within_mesh_bound: last.w1_nu_mu2 <= mesh_bound + QUANTIZATION_SLACK,
        direct_primary: direct.value,
        final_primary: last.primary_cost,
        primary_within_5pct: (last.primary_cost - direct.value).abs()
            <= 0.05 * direct.value.abs() + TREND_SLACK,
        final_slices_disjoint,
    };
    Ok(ApproxRun {
        d,
        records,
        failures,
        trend,
    })
}
