//! Two-stage plan selection: among distance-cost optimal plans, pick the
//! one minimizing the squared-Euclidean secondary cost.
//!
//! Stage one solves the ordinary distance-cost problem and extracts a
//! 1-Lipschitz potential `phi`. Stage two restricts to the *tight set*
//! `{(i, j) : |phi(x_i) - phi(y_j) - rho(x_i, y_j)| <= eta}` — the pairs
//! where the potential certifies distance-cost optimality — and solves a
//! second transportation LP over those arcs only, with cost
//! `|x - y|^2` (squared Euclidean regardless of the primary metric).
//! Restricting the support is a hard constraint, not a big-M penalty:
//! the masked LP is exactly the secondary problem on the discrete
//! instance, and it keeps the numerics clean.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{MongeError, Result};
use crate::geometry::Point;
use crate::measures::DiscreteMeasure;
use crate::transport::{
    build_cost, extract_lipschitz_potential, solve_kantorovich, solve_min_cost_flow, CostMatrix,
    CostProvenance, KantorovichSolution, LipschitzPotential, NetworkProblem, PlanEntry,
    TransportPlan,
};
use crate::vecmath::{dist2, dot, point_segment_distance, sub};

/// The selected plan's primary cost must match the true optimum within
/// `1e-7 * (1 + W1)`.
pub const OPTIMAL_FACE_REL_TOL: f64 = 1e-7;
/// Restricted monotonicity inner products may dip this far below zero.
pub const RESTRICTED_MONOTONE_TOL: f64 = 1e-9;
/// Brute-force oracle: permutations within this of the best primary cost
/// count as primary-optimal.
const ORACLE_FACE_TOL: f64 = 1e-10;
/// Largest support size the factorial oracle will enumerate.
const ORACLE_SIZE_CAP: usize = 6;

/// Default tight-set tolerance for a given distance matrix:
/// `1e-7 * (1 + max rho)`, wide enough to absorb LP dual round-off but
/// far below any genuine slack.
pub fn default_eta(rho_cost: &CostMatrix) -> f64 {
    1e-7 * (1.0 + rho_cost.max_value())
}

// ---------------------------------------------------------------------------
// Beta cost
// ---------------------------------------------------------------------------

/// The restricted secondary cost: an admissibility mask over source-target
/// pairs (the potential's tight set) plus the squared-Euclidean cost to
/// minimize on it. Conceptually this is the cost that is `|x - y|^2` on
/// tight pairs and infinite elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaCost {
    admissible: Vec<bool>,
    secondary: CostMatrix,
    rho: CostMatrix,
    eta: f64,
}

impl BetaCost {
    #[inline]
    pub fn is_admissible(&self, i: usize, j: usize) -> bool {
        self.admissible[i * self.secondary.cols() + j]
    }

    pub fn admissible_count(&self) -> usize {
        self.admissible.iter().filter(|&&a| a).count()
    }

    /// Squared-Euclidean secondary cost matrix.
    pub fn secondary(&self) -> &CostMatrix {
        &self.secondary
    }

    /// The distance cost the mask was derived from.
    pub fn rho(&self) -> &CostMatrix {
        &self.rho
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn rows(&self) -> usize {
        self.secondary.rows()
    }

    pub fn cols(&self) -> usize {
        self.secondary.cols()
    }
}

/// Build the restricted secondary cost from a 1-Lipschitz potential.
///
/// A pair is admissible when `|phi(x_i) - phi(y_j) - rho_ij| <= eta`.
/// The admissible set is verified to carry at least one feasible plan
/// (via a zero-cost masked solve) before returning.
pub fn build_beta(
    phi: &LipschitzPotential,
    rho_cost: &CostMatrix,
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    eta: f64,
) -> Result<BetaCost> {
    match rho_cost.provenance() {
        CostProvenance::MetricPower { power, .. } if *power == 1.0 => {}
        CostProvenance::MetricPower { power, .. } => {
            return Err(MongeError::NotDistanceCost(*power))
        }
        CostProvenance::SquaredEuclidean => return Err(MongeError::NotDistanceCost(2.0)),
        CostProvenance::Quantized { .. } => return Err(MongeError::NotDistanceCost(f64::NAN)),
    }
    // eta = 0 is legal and demands exact tightness; on instances whose
    // distances carry rounding noise that usually empties the set.
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(MongeError::ParameterOutOfRange(eta));
    }
    let (m, n) = (rho_cost.rows(), rho_cost.cols());
    if phi.on_sources.len() != m || phi.on_targets.len() != n || mu1.len() != m || mu2.len() != n
    {
        return Err(MongeError::DimensionMismatch {
            expected: m * n,
            got: phi.on_sources.len() * phi.on_targets.len(),
        });
    }

    let mut admissible = vec![false; m * n];
    for i in 0..m {
        for j in 0..n {
            let gap = phi.on_sources[i] - phi.on_targets[j] - rho_cost.at(i, j);
            admissible[i * n + j] = gap.abs() <= eta;
        }
    }
    // Fast failure when some row or column has no admissible pair.
    for i in 0..m {
        if !admissible[i * n..(i + 1) * n].iter().any(|&a| a) {
            return Err(MongeError::EmptyAdmissibleSet { eta });
        }
    }
    for j in 0..n {
        if !(0..m).any(|i| admissible[i * n + j]) {
            return Err(MongeError::EmptyAdmissibleSet { eta });
        }
    }

    let secondary = CostMatrix::from_fn(m, n, CostProvenance::SquaredEuclidean, |i, j| {
        Ok(dist2(mu1.point(i).coords(), mu2.point(j).coords()))
    })?;

    let beta = BetaCost {
        admissible,
        secondary,
        rho: rho_cost.clone(),
        eta,
    };
    // Feasibility solve: can the mask carry the marginals at all?
    if solve_masked(mu1, mu2, &beta, true).is_err() {
        return Err(MongeError::EmptyAdmissibleSet { eta });
    }
    Ok(beta)
}

/// Solve the masked transportation LP; with `feasibility_only` the arc
/// costs are zero (pure feasibility check).
fn solve_masked(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    beta: &BetaCost,
    feasibility_only: bool,
) -> Result<(Vec<PlanEntry>, f64, f64)> {
    let (m, n) = (beta.rows(), beta.cols());
    let mut arcs = Vec::new();
    let mut costs = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if beta.is_admissible(i, j) {
                arcs.push((i, m + j));
                costs.push(if feasibility_only {
                    0.0
                } else {
                    beta.secondary.at(i, j)
                });
            }
        }
    }
    let mut balances = Vec::with_capacity(m + n);
    balances.extend_from_slice(mu1.weights());
    balances.extend(mu2.weights().iter().map(|w| -w));
    let problem = NetworkProblem {
        node_count: m + n,
        balances,
        arcs: arcs.clone(),
        costs,
    };
    let flow = solve_min_cost_flow(&problem)?;

    let mut entries = Vec::new();
    let mut value = 0.0;
    for (a, &(u, v)) in arcs.iter().enumerate() {
        if flow.flows[a] > 0.0 {
            let (i, j) = (u, v - m);
            entries.push(PlanEntry {
                i,
                j,
                mass: flow.flows[a],
            });
            value += flow.flows[a] * beta.secondary.at(i, j);
        }
    }
    // Dual objective of the masked LP certifies optimality on the mask.
    let shift = flow.potentials[0];
    let dual_obj: f64 = (0..m)
        .map(|i| (flow.potentials[i] - shift) * mu1.weight(i))
        .sum::<f64>()
        + (0..n)
            .map(|j| (shift - flow.potentials[m + j]) * mu2.weight(j))
            .sum::<f64>();
    Ok((entries, value, value - dual_obj))
}

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

/// Outcome of the secondary minimization: a plan that is optimal for the
/// distance cost (certified by `primary_cost`) and, among such plans,
/// minimizes the squared-Euclidean cost on the tight set.
///
/// Serializes as plan JSON extended with `primary_cost`,
/// `secondary_cost`, `eta`, and `admissible_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub plan: TransportPlan,
    pub primary_cost: f64,
    pub secondary_cost: f64,
    pub eta: f64,
    pub admissible_count: usize,
}

impl Serialize for SelectionResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SelectionResult", 7)?;
        let entries: Vec<(usize, usize, f64)> = self
            .plan
            .entries()
            .iter()
            .map(|e| (e.i, e.j, e.mass))
            .collect();
        s.serialize_field("entries", &entries)?;
        s.serialize_field("value", &self.plan.value())?;
        s.serialize_field("dual_gap", &self.plan.dual_gap())?;
        s.serialize_field("primary_cost", &self.primary_cost)?;
        s.serialize_field("secondary_cost", &self.secondary_cost)?;
        s.serialize_field("eta", &self.eta)?;
        s.serialize_field("admissible_count", &self.admissible_count)?;
        s.end()
    }
}

/// Minimize the squared-Euclidean cost over plans supported on the
/// admissible mask. Infeasibility signals that `eta` is too tight.
pub fn solve_secondary(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    beta: &BetaCost,
) -> Result<SelectionResult> {
    if beta.rows() != mu1.len() || beta.cols() != mu2.len() {
        return Err(MongeError::DimensionMismatch {
            expected: mu1.len() * mu2.len(),
            got: beta.rows() * beta.cols(),
        });
    }
    let (entries, secondary_cost, gap) = solve_masked(mu1, mu2, beta, false)?;
    if gap.abs() > 1e-8 * (1.0 + secondary_cost.abs()) {
        return Err(MongeError::NumericalFailure(format!(
            "masked solve has duality gap {gap:.3e}"
        )));
    }
    let primary_cost: f64 = entries
        .iter()
        .map(|e| e.mass * beta.rho.at(e.i, e.j))
        .sum();
    let plan = TransportPlan::new(
        mu1.clone(),
        mu2.clone(),
        entries,
        CostProvenance::SquaredEuclidean,
        secondary_cost,
        Some(gap),
    )?;
    for e in plan.entries() {
        debug_assert!(beta.is_admissible(e.i, e.j));
    }
    Ok(SelectionResult {
        plan,
        primary_cost,
        secondary_cost,
        eta: beta.eta(),
        admissible_count: beta.admissible_count(),
    })
}

/// Everything the two-stage pipeline produces, kept together so callers
/// can run the structural checkers without re-solving.
#[derive(Debug, Clone)]
pub struct TwoStageSolution {
    pub selection: SelectionResult,
    pub primal: KantorovichSolution,
    pub potential: LipschitzPotential,
    pub rho: CostMatrix,
    pub beta: BetaCost,
}

/// Run the full pipeline: distance-cost solve, potential extraction,
/// tight-set construction, and the secondary solve. The returned
/// selection is verified to stay on the distance-optimal face within
/// `1e-7 * (1 + W1)`.
pub fn solve_two_stage(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    metric: &crate::geometry::MetricSpec,
    eta: Option<f64>,
) -> Result<TwoStageSolution> {
    let rho = build_cost(mu1, mu2, metric, 1.0)?;
    let primal = solve_kantorovich(mu1, mu2, &rho)?;
    let potential = extract_lipschitz_potential(&primal.dual, &rho, &primal.plan)?;
    let eta = eta.unwrap_or_else(|| default_eta(&rho));
    let beta = build_beta(&potential, &rho, mu1, mu2, eta)?;
    let selection = solve_secondary(mu1, mu2, &beta)?;
    let w1 = primal.value;
    if (selection.primary_cost - w1).abs() > OPTIMAL_FACE_REL_TOL * (1.0 + w1.abs()) {
        return Err(MongeError::NumericalFailure(format!(
            "selected plan drifted off the optimal face: primary {} vs W1 {}",
            selection.primary_cost, w1
        )));
    }
    Ok(TwoStageSolution {
        selection,
        primal,
        potential,
        rho,
        beta,
    })
}

// ---------------------------------------------------------------------------
// Restricted monotonicity
// ---------------------------------------------------------------------------

/// An ordered pair of plan entries where the first source lies on the
/// segment spanned by the second entry, yet the displacement inner
/// product is negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonePairViolation {
    /// Indices into the plan's entry list: (entry, reference entry).
    pub pair: (usize, usize),
    /// The offending inner product `(y - y') . (x - x')`.
    pub inner: f64,
}

/// Outcome of the restricted monotonicity scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictedMonotonicityReport {
    /// Ordered entry pairs where the segment condition applied.
    pub checked_pairs: usize,
    pub violations: Vec<MonotonePairViolation>,
    /// Smallest inner product seen among checked pairs.
    pub worst_inner: Option<f64>,
}

impl RestrictedMonotonicityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scan ordered support pairs ((x, y), (x', y')) with `x` on the affine
/// segment `[x', y']` (Euclidean point-to-segment distance at most
/// `collinearity_tol`) and assert `(y - y') . (x - x') >= -1e-9`.
///
/// Straight segments are the geodesics of every supported metric, so
/// the segment test is Euclidean regardless of the plan's metric.
pub fn check_restricted_monotonicity(
    plan: &TransportPlan,
    collinearity_tol: f64,
) -> Result<RestrictedMonotonicityReport> {
    if !(collinearity_tol.is_finite() && collinearity_tol >= 0.0) {
        return Err(MongeError::ParameterOutOfRange(collinearity_tol));
    }
    let entries = plan.entries();
    let src: Vec<&Point> = entries.iter().map(|e| plan.source().point(e.i)).collect();
    let tgt: Vec<&Point> = entries.iter().map(|e| plan.target().point(e.j)).collect();

    let mut report = RestrictedMonotonicityReport {
        checked_pairs: 0,
        violations: Vec::new(),
        worst_inner: None,
    };
    for a in 0..entries.len() {
        for b in 0..entries.len() {
            if a == b {
                continue;
            }
            let (x, y) = (src[a].coords(), tgt[a].coords());
            let (xp, yp) = (src[b].coords(), tgt[b].coords());
            let (seg_dist, _) = point_segment_distance(x, xp, yp);
            if seg_dist > collinearity_tol {
                continue;
            }
            let inner = dot(&sub(y, yp), &sub(x, xp));
            report.checked_pairs += 1;
            report.worst_inner = Some(match report.worst_inner {
                Some(w) => w.min(inner),
                None => inner,
            });
            if inner < -RESTRICTED_MONOTONE_TOL {
                report.violations.push(MonotonePairViolation {
                    pair: (a, b),
                    inner,
                });
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Ground truth for tiny instances, computed without any LP machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceSelection {
    /// Minimum average distance cost over all permutation maps.
    pub primary: f64,
    /// Minimum average squared-Euclidean cost among primary-optimal maps.
    pub secondary: f64,
    /// A permutation achieving both minima (first in lexicographic order).
    pub assignment: Vec<usize>,
}

/// Enumerate all `n!` permutation maps between uniform equal-cardinality
/// marginals; among those minimizing the distance cost (within `1e-10`),
/// return the minimum squared-Euclidean cost.
pub fn brute_force_secondary(
    mu1: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    metric: &crate::geometry::MetricSpec,
) -> Result<BruteForceSelection> {
    let n = mu1.len();
    if n != mu2.len() {
        return Err(MongeError::InvalidMeasure(format!(
            "oracle needs equal cardinalities, got {} and {}",
            n,
            mu2.len()
        )));
    }
    if n > ORACLE_SIZE_CAP {
        return Err(MongeError::TooLarge {
            size: n,
            cap: ORACLE_SIZE_CAP,
        });
    }
    let w = 1.0 / n as f64;
    for m in [mu1, mu2] {
        for &wi in m.weights() {
            if (wi - w).abs() > 1e-12 {
                return Err(MongeError::InvalidMeasure(
                    "oracle needs uniform weights".into(),
                ));
            }
        }
    }
    let rho = build_cost(mu1, mu2, metric, 1.0)?;

    use itertools::Itertools;
    let mut best_primary = f64::INFINITY;
    let mut best_secondary = f64::INFINITY;
    let mut best_assignment: Vec<usize> = Vec::new();
    for perm in (0..n).permutations(n) {
        let primary: f64 = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| w * rho.at(i, j))
            .sum();
        if primary < best_primary - ORACLE_FACE_TOL {
            // Strictly better primary resets the face.
            best_primary = primary;
            best_secondary = f64::INFINITY;
            best_assignment.clear();
        }
        if primary <= best_primary + ORACLE_FACE_TOL {
            best_primary = best_primary.min(primary);
            let secondary: f64 = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| w * dist2(mu1.point(i).coords(), mu2.point(j).coords()))
                .sum();
            if secondary < best_secondary {
                best_secondary = secondary;
                best_assignment = perm.clone();
            }
        }
    }
    Ok(BruteForceSelection {
        primary: best_primary,
        secondary: best_secondary,
        assignment: best_assignment,
    })
}
