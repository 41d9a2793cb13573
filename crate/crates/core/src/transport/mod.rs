//! Exact discrete Kantorovich machinery: cost matrices with provenance,
//! vertex-optimal transport plans, dual potentials, Wasserstein
//! distances, 1-Lipschitz potential extraction, and cyclical-monotonicity
//! diagnostics.
//!
//! Every solve goes through one deterministic network simplex
//! ([`simplex`]), so identical inputs give identical plans even though
//! distance costs make the optimal face hugely degenerate.

pub(crate) mod simplex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{MongeError, Result};
use crate::geometry::{distance, MetricSpec};
use crate::measures::DiscreteMeasure;
pub(crate) use simplex::{solve_min_cost_flow, NetworkProblem};

/// Marginal sums of a plan must match the prescribed weights this tightly.
pub const MARGINAL_TOL: f64 = 1e-10;
/// Strong duality gap allowance, relative: `1e-8 * (1 + |value|)`.
pub const DUALITY_REL_TOL: f64 = 1e-8;
/// Dual feasibility allowance: `phi_i + psi_j <= c_ij + 1e-9`.
pub const DUAL_FEASIBILITY_TOL: f64 = 1e-9;
/// Complementary slackness allowance on plan support.
pub const SLACKNESS_TOL: f64 = 1e-8;
/// Lipschitz reconciliation allowance for extracted potentials.
pub const LIPSCHITZ_TOL: f64 = 1e-8;
/// Cyclical monotonicity slack allowance.
pub const CYCLE_TOL: f64 = 1e-8;
/// Dense solves are capped at this many cost entries.
const DENSE_CELL_CAP: usize = 4_000_000;

// ---------------------------------------------------------------------------
// Cost matrices
// ---------------------------------------------------------------------------

/// How a cost matrix was produced. Downstream checkers use this to refuse
/// inputs that would make their conclusions meaningless (e.g. the
/// interpolant-disjointness check only applies to quantized costs).
#[derive(Debug, Clone, PartialEq)]
pub enum CostProvenance {
    /// `distance(metric, x, y)^power`.
    MetricPower { metric: MetricSpec, power: f64 },
    /// Quantized objective `rho + epsilon * |x - y|^2` used by the
    /// approximation scheme.
    Quantized { metric: MetricSpec, epsilon: f64 },
    /// Squared Euclidean secondary cost used by plan selection.
    SquaredEuclidean,
}

impl CostProvenance {
    /// The underlying metric, when the provenance has one.
    pub fn metric(&self) -> Option<&MetricSpec> {
        match self {
            CostProvenance::MetricPower { metric, .. } => Some(metric),
            CostProvenance::Quantized { metric, .. } => Some(metric),
            CostProvenance::SquaredEuclidean => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            CostProvenance::MetricPower { metric, power } => {
                format!("{}^{}", metric.label(), power)
            }
            CostProvenance::Quantized { metric, epsilon } => {
                format!("quantized({}, eps={})", metric.label(), epsilon)
            }
            CostProvenance::SquaredEuclidean => "squared_euclidean".into(),
        }
    }
}

/// Dense nonnegative cost matrix over `rows` source points and `cols`
/// target points, tagged with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    provenance: CostProvenance,
}

impl CostMatrix {
    /// Build entry-by-entry, rejecting non-finite or negative values.
    pub(crate) fn from_fn(
        rows: usize,
        cols: usize,
        provenance: CostProvenance,
        mut f: impl FnMut(usize, usize) -> Result<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(MongeError::InvalidCost("empty cost matrix".into()));
        }
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let c = f(i, j)?;
                if !c.is_finite() || c < 0.0 {
                    return Err(MongeError::InvalidCost(format!(
                        "cost({i}, {j}) = {c} is not a finite nonnegative value"
                    )));
                }
                values.push(c);
            }
        }
        Ok(CostMatrix {
            values,
            rows,
            cols,
            provenance,
        })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn provenance(&self) -> &CostProvenance {
        &self.provenance
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &c| a.max(c))
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Cost matrix `c_ij = distance(metric, x_i, y_j)^power` between the
/// supports of two measures.
pub fn build_cost(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    metric: &MetricSpec,
    power: f64,
) -> Result<CostMatrix> {
    if !(power.is_finite() && power >= 1.0) {
        return Err(MongeError::ParameterOutOfRange(power));
    }
    if mu1.dim() != mu2.dim() {
        return Err(MongeError::DimensionMismatch {
            expected: mu1.dim(),
            got: mu2.dim(),
        });
    }
    CostMatrix::from_fn(
        mu1.len(),
        mu2.len(),
        CostProvenance::MetricPower {
            metric: metric.clone(),
            power,
        },
        |i, j| {
            let d = distance(metric, mu1.point(i), mu2.point(j))?;
            Ok(if power == 1.0 { d } else { d.powf(power) })
        },
    )
}

// ---------------------------------------------------------------------------
// Plans and duals
// ---------------------------------------------------------------------------

/// One sparse plan entry: `mass > 0` moved from source `i` to target `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanEntry {
    pub i: usize,
    pub j: usize,
    pub mass: f64,
}

/// A transport plan between two discrete measures.
///
/// Invariants enforced at construction: entries sorted by `(i, j)` with
/// positive mass, row sums matching the source weights and column sums
/// matching the target weights within `1e-10`.
///
/// Serializes as `{"entries": [[i, j, mass], ..], "value": v,
/// "dual_gap": g}` (null gap for plans not produced by a solver).
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    entries: Vec<PlanEntry>,
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    value: f64,
    dual_gap: Option<f64>,
    provenance: CostProvenance,
}

impl TransportPlan {
    pub fn new(
        source: DiscreteMeasure,
        target: DiscreteMeasure,
        mut entries: Vec<PlanEntry>,
        provenance: CostProvenance,
        value: f64,
        dual_gap: Option<f64>,
    ) -> Result<Self> {
        let mut row = vec![0.0f64; source.len()];
        let mut col = vec![0.0f64; target.len()];
        for e in &entries {
            if e.i >= source.len() || e.j >= target.len() {
                return Err(MongeError::InvalidMeasure(format!(
                    "plan entry ({}, {}) out of range for {} x {} supports",
                    e.i,
                    e.j,
                    source.len(),
                    target.len()
                )));
            }
            if !(e.mass.is_finite() && e.mass > 0.0) {
                return Err(MongeError::InvalidMeasure(format!(
                    "plan entry ({}, {}) has non-positive mass {}",
                    e.i, e.j, e.mass
                )));
            }
            row[e.i] += e.mass;
            col[e.j] += e.mass;
        }
        for (i, (&got, &want)) in row.iter().zip(source.weights()).enumerate() {
            if (got - want).abs() > MARGINAL_TOL {
                return Err(MongeError::InvalidMeasure(format!(
                    "plan row {i} sums to {got}, expected {want}"
                )));
            }
        }
        for (j, (&got, &want)) in col.iter().zip(target.weights()).enumerate() {
            if (got - want).abs() > MARGINAL_TOL {
                return Err(MongeError::InvalidMeasure(format!(
                    "plan column {j} sums to {got}, expected {want}"
                )));
            }
        }
        entries.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
        Ok(TransportPlan {
            entries,
            source,
            target,
            value,
            dual_gap,
            provenance,
        })
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    /// Objective value under the cost the plan was produced for.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Primal-minus-dual gap reported by the solver; `None` for plans
    /// assembled by other means (projections, hand construction).
    pub fn dual_gap(&self) -> Option<f64> {
        self.dual_gap
    }

    pub fn provenance(&self) -> &CostProvenance {
        &self.provenance
    }

    /// Integrate an arbitrary cost matrix against the plan.
    pub fn integral(&self, cost: &CostMatrix) -> Result<f64> {
        if cost.rows() != self.source.len() || cost.cols() != self.target.len() {
            return Err(MongeError::DimensionMismatch {
                expected: self.source.len() * self.target.len(),
                got: cost.rows() * cost.cols(),
            });
        }
        Ok(self
            .entries
            .iter()
            .map(|e| e.mass * cost.at(e.i, e.j))
            .sum())
    }

    /// The plan's second marginal as a measure (target points that
    /// receive mass, in target order).
    pub fn second_marginal(&self) -> Result<DiscreteMeasure> {
        let mut col = vec![0.0f64; self.target.len()];
        for e in &self.entries {
            col[e.j] += e.mass;
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (j, &m) in col.iter().enumerate() {
            if m > 0.0 {
                points.push(self.target.point(j).clone());
                weights.push(m);
            }
        }
        DiscreteMeasure::new(points, weights)
    }

    /// Worst absolute deviation of row/column sums from the prescribed
    /// marginal weights.
    pub fn max_marginal_deviation(&self) -> f64 {
        let mut row = vec![0.0f64; self.source.len()];
        let mut col = vec![0.0f64; self.target.len()];
        for e in &self.entries {
            row[e.i] += e.mass;
            col[e.j] += e.mass;
        }
        let r = row
            .iter()
            .zip(self.source.weights())
            .fold(0.0f64, |a, (&g, &w)| a.max((g - w).abs()));
        let c = col
            .iter()
            .zip(self.target.weights())
            .fold(0.0f64, |a, (&g, &w)| a.max((g - w).abs()));
        r.max(c)
    }
}

impl Serialize for TransportPlan {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("TransportPlan", 3)?;
        let entries: Vec<(usize, usize, f64)> =
            self.entries.iter().map(|e| (e.i, e.j, e.mass)).collect();
        s.serialize_field("entries", &entries)?;
        s.serialize_field("value", &self.value)?;
        s.serialize_field("dual_gap", &self.dual_gap)?;
        s.end()
    }
}

/// Kantorovich dual variables: `phi` on sources, `psi` on targets, with
/// `phi_i + psi_j <= c_ij` up to `1e-9` and `phi[0] = 0` normalization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualPotential {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl DualPotential {
    /// Dual objective `sum phi_i w1_i + sum psi_j w2_j`.
    pub fn objective(&self, mu1: &DiscreteMeasure, mu2: &DiscreteMeasure) -> f64 {
        let a: f64 = self
            .phi
            .iter()
            .zip(mu1.weights())
            .map(|(p, w)| p * w)
            .sum();
        let b: f64 = self
            .psi
            .iter()
            .zip(mu2.weights())
            .map(|(p, w)| p * w)
            .sum();
        a + b
    }

    /// Largest violation of `phi_i + psi_j <= c_ij` (negative when
    /// strictly feasible everywhere).
    pub fn feasibility_excess(&self, cost: &CostMatrix) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (i, &p) in self.phi.iter().enumerate() {
            for (j, &q) in self.psi.iter().enumerate() {
                worst = worst.max(p + q - cost.at(i, j));
            }
        }
        worst
    }
}

/// Everything a single exact solve produces.
#[derive(Debug, Clone)]
pub struct KantorovichSolution {
    pub plan: TransportPlan,
    pub dual: DualPotential,
    pub value: f64,
}

/// Solve the balanced transportation LP exactly.
///
/// The plan is a vertex of the transportation polytope (at most
/// `rows + cols - 1` entries); the dual certifies it: the duality gap is
/// at most `1e-8 * (1 + value)` and every supported pair is tight within
/// `1e-8`.
pub fn solve_kantorovich(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    cost: &CostMatrix,
) -> Result<KantorovichSolution> {
    let (m, n) = (mu1.len(), mu2.len());
    if cost.rows() != m || cost.cols() != n {
        return Err(MongeError::DimensionMismatch {
            expected: m * n,
            got: cost.rows() * cost.cols(),
        });
    }
    if m * n > DENSE_CELL_CAP {
        return Err(MongeError::TooLarge {
            size: m * n,
            cap: DENSE_CELL_CAP,
        });
    }

    let mut balances = Vec::with_capacity(m + n);
    balances.extend_from_slice(mu1.weights());
    balances.extend(mu2.weights().iter().map(|w| -w));
    let mut arcs = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            arcs.push((i, m + j));
        }
    }
    let problem = NetworkProblem {
        node_count: m + n,
        balances,
        arcs,
        costs: cost.values().to_vec(),
    };
    let flow = solve_min_cost_flow(&problem)?;

    let mut entries = Vec::new();
    let mut value = 0.0;
    for i in 0..m {
        for j in 0..n {
            let mass = flow.flows[i * n + j];
            if mass > 0.0 {
                entries.push(PlanEntry { i, j, mass });
                value += mass * cost.at(i, j);
            }
        }
    }
    if entries.len() > m + n - 1 {
        return Err(MongeError::NumericalFailure(format!(
            "plan has {} entries, exceeding the vertex bound {}",
            entries.len(),
            m + n - 1
        )));
    }

    let shift = flow.potentials[0];
    let dual = DualPotential {
        phi: flow.potentials[..m].iter().map(|p| p - shift).collect(),
        psi: flow.potentials[m..].iter().map(|p| shift - p).collect(),
    };

    let excess = dual.feasibility_excess(cost);
    if excess > DUAL_FEASIBILITY_TOL {
        return Err(MongeError::NumericalFailure(format!(
            "dual potentials violate feasibility by {excess:.3e}"
        )));
    }
    let gap = value - dual.objective(mu1, mu2);
    if gap.abs() > DUALITY_REL_TOL * (1.0 + value.abs()) {
        return Err(MongeError::NumericalFailure(format!(
            "duality gap {gap:.3e} exceeds tolerance at value {value:.6}"
        )));
    }
    for e in &entries {
        let slack = cost.at(e.i, e.j) - dual.phi[e.i] - dual.psi[e.j];
        if slack.abs() > SLACKNESS_TOL {
            return Err(MongeError::NumericalFailure(format!(
                "supported pair ({}, {}) violates complementary slackness by {slack:.3e}",
                e.i, e.j
            )));
        }
    }

    let plan = TransportPlan::new(
        mu1.clone(),
        mu2.clone(),
        entries,
        cost.provenance().clone(),
        value,
        Some(gap),
    )?;
    Ok(KantorovichSolution { plan, dual, value })
}

/// `W_p(mu1, mu2)` under the given metric: the p-th root of the optimal
/// transport cost for `distance^p`.
pub fn wasserstein(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    metric: &MetricSpec,
    p: f64,
) -> Result<f64> {
    let cost = build_cost(mu1, mu2, metric, p)?;
    let value = solve_kantorovich(mu1, mu2, &cost)?.value;
    Ok(if p == 1.0 {
        value
    } else {
        value.max(0.0).powf(1.0 / p)
    })
}

// ---------------------------------------------------------------------------
// Lipschitz potential extraction
// ---------------------------------------------------------------------------

/// A single 1-Lipschitz Kantorovich potential evaluated on both supports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzPotential {
    pub on_sources: Vec<f64>,
    pub on_targets: Vec<f64>,
}

/// Reconcile a solver dual into one 1-Lipschitz potential on the union
/// of the supports, for distance costs only.
///
/// The construction is the distance transform `phi(z) = min_j
/// (d(z, y_j) - psi_j)`: a minimum of 1-Lipschitz functions, hence
/// 1-Lipschitz; on supported pairs it satisfies
/// `phi(x_i) - phi(y_j) = d(x_i, y_j)` because the dual is tight there.
/// Both properties are re-verified numerically before returning.
pub fn extract_lipschitz_potential(
    dual: &DualPotential,
    cost: &CostMatrix,
    plan: &TransportPlan,
) -> Result<LipschitzPotential> {
    let metric = match cost.provenance() {
        CostProvenance::MetricPower { metric, power } if *power == 1.0 => metric,
        CostProvenance::MetricPower { power, .. } => {
            return Err(MongeError::NotDistanceCost(*power))
        }
        CostProvenance::SquaredEuclidean => return Err(MongeError::NotDistanceCost(2.0)),
        CostProvenance::Quantized { .. } => {
            return Err(MongeError::NotDistanceCost(f64::NAN))
        }
    };
    let sources = plan.source().points();
    let targets = plan.target().points();
    if cost.rows() != sources.len() || cost.cols() != targets.len() || dual.psi.len() != targets.len()
    {
        return Err(MongeError::DimensionMismatch {
            expected: sources.len() * targets.len(),
            got: cost.rows() * cost.cols(),
        });
    }

    let transform = |dists: &dyn Fn(usize) -> f64| -> f64 {
        (0..targets.len())
            .map(|j| dists(j) - dual.psi[j])
            .fold(f64::INFINITY, f64::min)
    };
    let mut on_sources = Vec::with_capacity(sources.len());
    for i in 0..sources.len() {
        on_sources.push(transform(&|j| cost.at(i, j)));
    }
    let mut target_dist = vec![0.0f64; targets.len() * targets.len()];
    for k in 0..targets.len() {
        for j in 0..targets.len() {
            target_dist[k * targets.len() + j] = if k == j {
                0.0
            } else {
                distance(metric, &targets[k], &targets[j])?
            };
        }
    }
    let mut on_targets = Vec::with_capacity(targets.len());
    for k in 0..targets.len() {
        on_targets.push(transform(&|j| target_dist[k * targets.len() + j]));
    }

    // All-pairs Lipschitz verification over the union support; pair
    // indices are union indices (sources first, then targets).
    let m = sources.len();
    let check = |a: f64, b: f64, d: f64, u: usize, v: usize| -> Result<()> {
        if (a - b).abs() > d + LIPSCHITZ_TOL {
            return Err(MongeError::LipschitzViolation {
                u,
                v,
                excess: (a - b).abs() - d,
            });
        }
        Ok(())
    };
    for i in 0..sources.len() {
        for i2 in (i + 1)..sources.len() {
            check(
                on_sources[i],
                on_sources[i2],
                distance(metric, &sources[i], &sources[i2])?,
                i,
                i2,
            )?;
        }
        for j in 0..targets.len() {
            check(on_sources[i], on_targets[j], cost.at(i, j), i, m + j)?;
        }
    }
    for k in 0..targets.len() {
        for j in (k + 1)..targets.len() {
            check(
                on_targets[k],
                on_targets[j],
                target_dist[k * targets.len() + j],
                m + k,
                m + j,
            )?;
        }
    }
    // Tightness on plan support.
    for e in plan.entries() {
        let gap = on_sources[e.i] - on_targets[e.j] - cost.at(e.i, e.j);
        if gap.abs() > LIPSCHITZ_TOL {
            return Err(MongeError::LipschitzViolation {
                u: e.i,
                v: m + e.j,
                excess: gap.abs(),
            });
        }
    }
    Ok(LipschitzPotential {
        on_sources,
        on_targets,
    })
}

// ---------------------------------------------------------------------------
// Cyclical monotonicity
// ---------------------------------------------------------------------------

/// One offending tuple: plan-entry indices whose cyclic rerouting is
/// cheaper than the plan by more than the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleViolation {
    pub entries: Vec<usize>,
    pub slack: f64,
}

/// Outcome of a cyclical monotonicity scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub cycle_length: usize,
    pub tested: usize,
    pub exhaustive: bool,
    /// Smallest observed slack `rerouted - current` (negative = violation).
    pub worst_slack: Option<f64>,
    pub violations: Vec<CycleViolation>,
}

impl MonotonicityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check `sum c(x_i, y_i) <= sum c(x_i, y_{i+1}) + 1e-8` over k-tuples of
/// plan entries: exhaustively when the support has at most 12 entries and
/// k is 2 or 3, otherwise on `trials` random distinct tuples.
pub fn check_cyclical_monotonicity(
    plan: &TransportPlan,
    cost: &CostMatrix,
    cycle_length: usize,
    trials: usize,
    seed: u64,
) -> Result<MonotonicityReport> {
    if cycle_length < 2 {
        return Err(MongeError::ParameterOutOfRange(cycle_length as f64));
    }
    if cost.rows() != plan.source().len() || cost.cols() != plan.target().len() {
        return Err(MongeError::DimensionMismatch {
            expected: plan.source().len() * plan.target().len(),
            got: cost.rows() * cost.cols(),
        });
    }
    let entries = plan.entries();
    let k = cycle_length;
    let mut report = MonotonicityReport {
        cycle_length: k,
        tested: 0,
        exhaustive: false,
        worst_slack: None,
        violations: Vec::new(),
    };
    if entries.len() < k {
        report.exhaustive = true;
        return Ok(report);
    }

    let test_tuple = |tuple: &[usize], report: &mut MonotonicityReport| {
        let current: f64 = tuple
            .iter()
            .map(|&t| cost.at(entries[t].i, entries[t].j))
            .sum();
        let rerouted: f64 = (0..k)
            .map(|a| {
                let from = entries[tuple[a]];
                let to = entries[tuple[(a + 1) % k]];
                cost.at(from.i, to.j)
            })
            .sum();
        let slack = rerouted - current;
        report.tested += 1;
        report.worst_slack = Some(match report.worst_slack {
            Some(w) => w.min(slack),
            None => slack,
        });
        if slack < -CYCLE_TOL {
            report.violations.push(CycleViolation {
                entries: tuple.to_vec(),
                slack,
            });
        }
    };

    if entries.len() <= 12 && (k == 2 || k == 3) {
        report.exhaustive = true;
        use itertools::Itertools;
        for tuple in (0..entries.len()).permutations(k) {
            test_tuple(&tuple, &mut report);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let tuple = rand::seq::index::sample(&mut rng, entries.len(), k).into_vec();
            test_tuple(&tuple, &mut report);
        }
    }
    Ok(report)
}
