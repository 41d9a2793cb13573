//! Discrete probability measures, grid/sampling discretizers, greedy
//! ε-nets, nearest-point projections, and doubling-constant estimation.
//!
//! Everything downstream (solvers, selection, the quantized scheme) works
//! with [`DiscreteMeasure`]: finitely many support points with strictly
//! positive weights summing to 1. Construction merges near-duplicate points
//! (tolerance `1e-12`, Euclidean) and renormalizes, because duplicated LP
//! columns make the transport solver degenerate.
//!
//! Measure files and JSON payloads are canonicalized on load: support
//! points are sorted lexicographically before indices are assigned, so
//! indices — and therefore nets, plans, and reports — are reproducible
//! regardless of the order a file listed its points in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MongeError, Result};
use crate::geometry::{distance, ConvexBody, MetricSpec, Point};
use crate::vecmath::{dist, lex_cmp};

/// Two support points closer than this (Euclidean) are merged.
pub const DUPLICATE_MERGE_TOL: f64 = 1e-12;
/// Weight sums are accepted as "already normalized" within this slack.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Number of radius halvings per probe center in doubling estimation.
const DOUBLING_LADDER_HALVINGS: u32 = 6;

// ---------------------------------------------------------------------------
// DiscreteMeasure
// ---------------------------------------------------------------------------

/// Finitely supported probability measure: support points plus strictly
/// positive weights summing to 1 (within `1e-12`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureData", into = "MeasureData")]
pub struct DiscreteMeasure {
    points: Vec<Point>,
    weights: Vec<f64>,
}

/// What construction had to fix: merged duplicates and the original weight
/// sum (1.0 means no rescaling happened).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureAdjustment {
    pub merged_points: usize,
    pub original_weight_sum: f64,
}

impl MeasureAdjustment {
    /// True when construction changed nothing the caller would notice.
    pub fn is_clean(&self) -> bool {
        self.merged_points == 0 && (self.original_weight_sum - 1.0).abs() <= WEIGHT_SUM_TOL
    }
}

impl DiscreteMeasure {
    /// Build a measure, merging near-duplicate points (first-occurrence
    /// order) and normalizing weights. Returns what was adjusted.
    pub fn with_report(
        points: Vec<Point>,
        weights: Vec<f64>,
    ) -> Result<(Self, MeasureAdjustment)> {
        if points.is_empty() {
            return Err(MongeError::InvalidMeasure("empty support".into()));
        }
        if points.len() != weights.len() {
            return Err(MongeError::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].dim();
        for p in &points {
            if p.dim() != dim {
                return Err(MongeError::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
        }
        for &w in &weights {
            if !(w.is_finite() && w > 0.0) {
                return Err(MongeError::InvalidMeasure(format!(
                    "weights must be strictly positive and finite, got {w}"
                )));
            }
        }

        // Merge near-duplicates onto the first occurrence.
        let mut kept: Vec<Point> = Vec::with_capacity(points.len());
        let mut kept_w: Vec<f64> = Vec::new();
        let mut merged = 0usize;
        'next: for (p, w) in points.into_iter().zip(weights) {
            for (q, qw) in kept.iter().zip(kept_w.iter_mut()) {
                if dist(p.coords(), q.coords()) < DUPLICATE_MERGE_TOL {
                    *qw += w;
                    merged += 1;
                    continue 'next;
                }
            }
            kept.push(p);
            kept_w.push(w);
        }

        let sum: f64 = kept_w.iter().sum();
        for w in &mut kept_w {
            *w /= sum;
        }
        // Put the rounding residual on the heaviest atom so the sum is
        // exactly 1 up to one final rounding.
        let resid = 1.0 - kept_w.iter().sum::<f64>();
        let argmax = kept_w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        kept_w[argmax] += resid;

        Ok((
            DiscreteMeasure {
                points: kept,
                weights: kept_w,
            },
            MeasureAdjustment {
                merged_points: merged,
                original_weight_sum: sum,
            },
        ))
    }

    /// Build a measure, discarding the adjustment report.
    pub fn new(points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        Ok(Self::with_report(points, weights)?.0)
    }

    /// Equal weights on the given points.
    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    /// Unit mass on a single point.
    pub fn dirac(point: Point) -> Self {
        DiscreteMeasure {
            points: vec![point],
            weights: vec![1.0],
        }
    }

    /// Canonicalized load: sorts points lexicographically (carrying their
    /// weights) before assigning indices, then merges and normalizes.
    pub fn from_data(data: MeasureData) -> Result<(Self, MeasureAdjustment)> {
        if data.points.len() != data.weights.len() {
            return Err(MongeError::InvalidMeasure(format!(
                "{} points but {} weights",
                data.points.len(),
                data.weights.len()
            )));
        }
        let mut rows: Vec<(Vec<f64>, f64)> =
            data.points.into_iter().zip(data.weights).collect();
        for (p, _) in &rows {
            if p.len() != data.dim {
                return Err(MongeError::DimensionMismatch {
                    expected: data.dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(MongeError::InvalidMeasure(
                    "point has non-finite coordinate".into(),
                ));
            }
        }
        rows.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let (points, weights): (Vec<_>, Vec<_>) = rows
            .into_iter()
            .map(|(p, w)| (Point::raw(p), w))
            .unzip();
        Self::with_report(points, weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Serialization schema for measures:
/// `{"dim": n, "points": [[..], ..], "weights": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureData {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TryFrom<MeasureData> for DiscreteMeasure {
    type Error = MongeError;
    fn try_from(data: MeasureData) -> Result<Self> {
        Ok(DiscreteMeasure::from_data(data)?.0)
    }
}

impl From<DiscreteMeasure> for MeasureData {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureData {
            dim: m.dim(),
            points: m.points.iter().map(|p| p.coords().to_vec()).collect(),
            weights: m.weights,
        }
    }
}

// ---------------------------------------------------------------------------
// Discretizers
// ---------------------------------------------------------------------------

/// Uniform axis grid over the body's bounding box; keeps cell centers that
/// are interior to the body, weights them by `density` (default 1), and
/// normalizes. Cells where the density is not strictly positive are
/// dropped. Points come out in row-major order, which is lexicographic.
pub fn grid_discretize(
    body: &ConvexBody,
    resolution: usize,
    density: Option<&dyn Fn(&[f64]) -> f64>,
) -> Result<DiscreteMeasure> {
    if resolution == 0 {
        return Err(MongeError::InvalidConfig(
            "grid resolution must be at least 1".into(),
        ));
    }
    let dim = body.dim();
    let (lo, hi) = body.bounding_box();
    let step: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(l, u)| (u - l) / resolution as f64)
        .collect();

    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut index = vec![0usize; dim];
    loop {
        let center: Vec<f64> = (0..dim)
            .map(|k| lo[k] + (index[k] as f64 + 0.5) * step[k])
            .collect();
        let p = Point::raw(center);
        if body.contains_interior(&p)?.inside {
            let w = match density {
                Some(f) => f(p.coords()),
                None => 1.0,
            };
            if !w.is_finite() {
                return Err(MongeError::InvalidMeasure(format!(
                    "density produced non-finite value {w}"
                )));
            }
            if w > 0.0 {
                points.push(p);
                weights.push(w);
            }
        }
        // Odometer with the last axis fastest keeps row-major = lex order.
        let mut axis = dim;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            index[axis] += 1;
            if index[axis] < resolution {
                break;
            }
            index[axis] = 0;
            if axis == 0 {
                axis = usize::MAX;
                break;
            }
        }
        if axis == usize::MAX {
            break;
        }
    }
    if points.is_empty() {
        return Err(MongeError::EmptyDiscretization { resolution });
    }
    DiscreteMeasure::new(points, weights)
}

/// Rejection sampling from the body's bounding box, equal weights.
/// Deterministic for a fixed seed; the support is sorted lexicographically
/// so downstream indices are canonical.
pub fn sample_uniform(body: &ConvexBody, count: usize, seed: u64) -> Result<DiscreteMeasure> {
    if count == 0 {
        return Err(MongeError::InvalidConfig(
            "sample count must be at least 1".into(),
        ));
    }
    let dim = body.dim();
    let (lo, hi) = body.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = 1000usize.saturating_mul(count);
    let mut attempts = 0usize;
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(count);
    while points.len() < count {
        if attempts >= budget {
            return Err(MongeError::RejectionBudgetExceeded {
                attempts,
                requested: count,
            });
        }
        attempts += 1;
        let candidate: Vec<f64> = (0..dim).map(|k| rng.gen_range(lo[k]..hi[k])).collect();
        let p = Point::raw(candidate);
        if body.contains_interior(&p)?.inside {
            points.push(p.coords().to_vec());
        }
    }
    points.sort_by(|a, b| lex_cmp(a, b));
    DiscreteMeasure::uniform(points.into_iter().map(Point::raw).collect())
}

// ---------------------------------------------------------------------------
// Nets and projections
// ---------------------------------------------------------------------------

/// A maximal ε-separated subset of a point list, stored by index.
///
/// Invariants (checked by the verification suite): net points are pairwise
/// more than `epsilon` apart, and every input point lies within
/// `covering_radius <= epsilon` of the net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub indices: Vec<usize>,
    pub epsilon: f64,
    pub covering_radius: f64,
}

impl Net {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Greedy maximal ε-net: scan points in input order, keeping a point iff
/// it is more than `epsilon` away from everything kept so far. Maximality
/// makes the covering radius at most `epsilon` automatically.
pub fn greedy_eps_net(points: &[Point], metric: &MetricSpec, epsilon: f64) -> Result<Net> {
    if points.is_empty() {
        return Err(MongeError::EmptyNet);
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(MongeError::ParameterOutOfRange(epsilon));
    }
    let mut indices: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let mut separated = true;
        for &j in &indices {
            if distance(metric, p, &points[j])? <= epsilon {
                separated = false;
                break;
            }
        }
        if separated {
            indices.push(i);
        }
    }
    let mut covering_radius = 0.0f64;
    for p in points {
        let mut best = f64::INFINITY;
        for &j in &indices {
            best = best.min(distance(metric, p, &points[j])?);
        }
        covering_radius = covering_radius.max(best);
    }
    Ok(Net {
        indices,
        epsilon,
        covering_radius,
    })
}

/// Nearest-point assignment with the minimum-index tie-break: each point
/// maps to the first target index achieving the minimum distance.
pub fn nearest_point_projection(
    points: &[Point],
    targets: &[Point],
    metric: &MetricSpec,
) -> Result<Vec<usize>> {
    if targets.is_empty() {
        return Err(MongeError::EmptyNet);
    }
    let mut assignment = Vec::with_capacity(points.len());
    for p in points {
        let mut best = f64::INFINITY;
        let mut best_ix = 0usize;
        for (j, t) in targets.iter().enumerate() {
            let d = distance(metric, p, t)?;
            if d < best {
                best = d;
                best_ix = j;
            }
        }
        assignment.push(best_ix);
    }
    Ok(assignment)
}

/// Push a measure forward along an assignment into `targets`: mass of
/// points with the same image is summed. The result is supported on the
/// targets that receive mass, in target-index order.
pub fn pushforward(
    measure: &DiscreteMeasure,
    assignment: &[usize],
    targets: &[Point],
) -> Result<DiscreteMeasure> {
    if assignment.len() != measure.len() {
        return Err(MongeError::InvalidMeasure(format!(
            "assignment covers {} points but the measure has {}",
            assignment.len(),
            measure.len()
        )));
    }
    let mut mass = vec![0.0f64; targets.len()];
    for (i, &j) in assignment.iter().enumerate() {
        if j >= targets.len() {
            return Err(MongeError::InvalidMeasure(format!(
                "assignment index {j} out of range for {} targets",
                targets.len()
            )));
        }
        mass[j] += measure.weight(i);
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (j, &m) in mass.iter().enumerate() {
        if m > 0.0 {
            points.push(targets[j].clone());
            weights.push(m);
        }
    }
    DiscreteMeasure::new(points, weights)
}

/// Nearest-point projection of a whole measure onto `targets`:
/// composition of [`nearest_point_projection`] and [`pushforward`].
pub fn project_measure(
    measure: &DiscreteMeasure,
    targets: &[Point],
    metric: &MetricSpec,
) -> Result<DiscreteMeasure> {
    let assignment = nearest_point_projection(measure.points(), targets, metric)?;
    pushforward(measure, &assignment, targets)
}

/// Largest pairwise distance on the support under the given metric.
pub fn support_diameter(measure: &DiscreteMeasure, metric: &MetricSpec) -> Result<f64> {
    let pts = measure.points();
    let mut diam = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            diam = diam.max(distance(metric, &pts[i], &pts[j])?);
        }
    }
    Ok(diam)
}

// ---------------------------------------------------------------------------
// Doubling estimation
// ---------------------------------------------------------------------------

/// Empirical doubling data: the largest observed mass ratio
/// `weight(B(x, 2r)) / weight(B(x, r))` over probe centers and radii,
/// and its base-2 logarithm. Estimated from finitely many probes, so it
/// lower-bounds the true doubling constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingEstimate {
    /// Doubling constant estimate, always at least 1.
    #[serde(rename = "C")]
    pub c: f64,
    /// Doubling exponent `log2(C)`.
    pub d: f64,
    /// Largest probe radius used.
    #[serde(rename = "R")]
    pub radius_cap: f64,
}

/// Estimate the doubling constant of a measure by probing closed balls
/// `B(x, r)` at every support point with radii `radius_cap * 2^{-k}`,
/// `k = 0..=6`, and taking the worst mass ratio on doubling the radius.
pub fn estimate_doubling(
    measure: &DiscreteMeasure,
    metric: &MetricSpec,
    radius_cap: f64,
) -> Result<DoublingEstimate> {
    estimate_doubling_with_ladder(measure, metric, radius_cap, DOUBLING_LADDER_HALVINGS)
}

pub(crate) fn estimate_doubling_with_ladder(
    measure: &DiscreteMeasure,
    metric: &MetricSpec,
    radius_cap: f64,
    halvings: u32,
) -> Result<DoublingEstimate> {
    if measure.len() < 2 {
        return Err(MongeError::DegenerateMeasure(
            "doubling estimation needs at least two support points".into(),
        ));
    }
    if !(radius_cap.is_finite() && radius_cap > 0.0) {
        return Err(MongeError::ParameterOutOfRange(radius_cap));
    }
    let pts = measure.points();
    let ws = measure.weights();
    let c = (0..pts.len())
        .into_par_iter()
        .map(|i| -> Result<f64> {
            // One sorted distance row per center, then each ball mass is a
            // prefix sum looked up by binary search.
            let mut row: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
            for (p, &w) in pts.iter().zip(ws) {
                row.push((distance(metric, &pts[i], p)?, w));
            }
            row.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut prefix = Vec::with_capacity(row.len());
            let mut acc = 0.0;
            for &(_, w) in &row {
                acc += w;
                prefix.push(acc);
            }
            let ball_mass = |r: f64| -> f64 {
                // Closed ball: count entries with distance <= r.
                let k = row.partition_point(|&(d, _)| d <= r);
                if k == 0 {
                    0.0
                } else {
                    prefix[k - 1]
                }
            };
            let mut worst = 1.0f64;
            for k in 0..=halvings {
                let r = radius_cap * 0.5f64.powi(k as i32);
                let small = ball_mass(r);
                if small > 0.0 {
                    worst = worst.max(ball_mass(2.0 * r) / small);
                }
            }
            Ok(worst)
        })
        .try_reduce(|| 1.0f64, |a, b| Ok(a.max(b)))?;
    Ok(DoublingEstimate {
        c,
        d: c.log2(),
        radius_cap,
    })
}

/// Sanity gate on net size: `#net <= C^max(0, ceil(log2(2 D / epsilon)))`.
/// The exponent is clamped at zero so a one-point net always passes.
/// An empirically underestimated `C` can make this fail spuriously; the
/// caller decides how to treat that.
pub fn check_net_cardinality(net: &Net, estimate: &DoublingEstimate, diameter: f64) -> bool {
    let ratio = 2.0 * diameter / net.epsilon;
    let exponent = ratio.log2().ceil().max(0.0);
    let bound = estimate.c.powf(exponent);
    net.len() as f64 <= bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;

    fn line_points(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| point(&[x])).collect()
    }

    #[test]
    fn grid_on_unit_square_resolution_two_is_uniform() {
        let body = ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 1.0])).unwrap();
        let m = grid_discretize(&body, 2, None).unwrap();
        assert_eq!(m.len(), 4);
        for &w in m.weights() {
            assert!((w - 0.25).abs() < 1e-15);
        }
        // Row-major = lexicographic order.
        assert_eq!(m.point(0).coords(), &[0.25, 0.25]);
        assert_eq!(m.point(1).coords(), &[0.25, 0.75]);
        assert_eq!(m.point(3).coords(), &[0.75, 0.75]);
    }

    #[test]
    fn grid_on_ball_resolution_one_is_a_dirac_at_the_center() {
        let body = ConvexBody::ball(point(&[0.0, 0.0]), 1.0).unwrap();
        let m = grid_discretize(&body, 1, None).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.point(0).coords(), &[0.0, 0.0]);
        assert_eq!(m.weight(0), 1.0);
    }

    #[test]
    fn grid_with_linear_density_matches_hand_normalization() {
        let body = ConvexBody::axis_box(point(&[0.0]), point(&[1.0])).unwrap();
        let density = |x: &[f64]| x[0];
        let m = grid_discretize(&body, 4, Some(&density)).unwrap();
        assert_eq!(m.len(), 4);
        let expect = [1.0 / 16.0, 3.0 / 16.0, 5.0 / 16.0, 7.0 / 16.0];
        for (w, e) in m.weights().iter().zip(expect) {
            assert!((w - e).abs() < 1e-15, "{w} vs {e}");
        }
        assert_eq!(m.point(0).coords(), &[0.125]);
        assert_eq!(m.point(3).coords(), &[0.875]);
    }

    #[test]
    fn construction_merges_duplicates_and_normalizes() {
        let (m, report) = DiscreteMeasure::with_report(
            line_points(&[0.0, 0.0, 1.0]),
            vec![0.25, 0.25, 0.5],
        )
        .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(report.merged_points, 1);
        assert!((m.weight(0) - 0.5).abs() < 1e-15);
        assert!((m.weight(1) - 0.5).abs() < 1e-15);

        let (m, report) =
            DiscreteMeasure::with_report(line_points(&[0.0, 1.0]), vec![1.0, 3.0]).unwrap();
        assert!((report.original_weight_sum - 4.0).abs() < 1e-15);
        assert!(!report.is_clean());
        assert!((m.weight(0) - 0.25).abs() < 1e-15);
        assert!((m.weight(1) - 0.75).abs() < 1e-15);
        assert!((m.total_mass() - 1.0).abs() <= WEIGHT_SUM_TOL);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
        assert!(DiscreteMeasure::new(line_points(&[0.0]), vec![-1.0]).is_err());
        assert!(DiscreteMeasure::new(line_points(&[0.0]), vec![0.0]).is_err());
        assert!(DiscreteMeasure::new(line_points(&[0.0, 1.0]), vec![1.0]).is_err());
        assert!(
            DiscreteMeasure::new(vec![point(&[0.0]), point(&[0.0, 1.0])], vec![0.5, 0.5])
                .is_err()
        );
    }

    #[test]
    fn deserialization_sorts_points_lexicographically() {
        let raw = r#"{"dim":1,"points":[[3.0],[1.0],[2.0]],"weights":[0.5,0.25,0.25]}"#;
        let m: DiscreteMeasure = serde_json::from_str(raw).unwrap();
        assert_eq!(m.point(0).coords(), &[1.0]);
        assert_eq!(m.point(1).coords(), &[2.0]);
        assert_eq!(m.point(2).coords(), &[3.0]);
        assert_eq!(m.weights(), &[0.25, 0.25, 0.5]);
        // Round trip is stable once canonicalized.
        let s = serde_json::to_string(&m).unwrap();
        let back: DiscreteMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn sampling_is_deterministic_and_lands_inside() {
        let body = ConvexBody::ball(point(&[0.0, 0.0]), 1.0).unwrap();
        let a = sample_uniform(&body, 50, 42).unwrap();
        let b = sample_uniform(&body, 50, 42).unwrap();
        assert_eq!(a, b);
        for p in a.points() {
            assert!(body.contains_interior(p).unwrap().inside);
        }
        let one = sample_uniform(&body, 1, 7).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.weight(0), 1.0);
    }

    #[test]
    fn sampling_mean_approximates_the_box_center() {
        let body = ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 1.0])).unwrap();
        let m = sample_uniform(&body, 100, 7).unwrap();
        // The uniform law on the box has mean (1/2, 1/2); at 100 samples
        // the empirical mean should be well within 0.1 per coordinate.
        for k in 0..2 {
            let mean: f64 = m
                .points()
                .iter()
                .zip(m.weights())
                .map(|(p, w)| w * p.coords()[k])
                .sum();
            assert!((mean - 0.5).abs() < 0.1, "axis {k}: mean {mean}");
        }
    }

    #[test]
    fn greedy_net_matches_hand_trace_on_the_line() {
        let pts = line_points(&[0.0, 1.0, 2.0, 3.0]);
        let net = greedy_eps_net(&pts, &MetricSpec::Euclidean, 1.5).unwrap();
        assert_eq!(net.indices, vec![0, 2]);
        assert!((net.covering_radius - 1.0).abs() < 1e-15);
        assert!(net.covering_radius <= net.epsilon);

        // Epsilon below the minimum gap keeps everything.
        let all = greedy_eps_net(&pts, &MetricSpec::Euclidean, 0.5).unwrap();
        assert_eq!(all.indices, vec![0, 1, 2, 3]);

        let single = greedy_eps_net(&pts[..1], &MetricSpec::Euclidean, 10.0).unwrap();
        assert_eq!(single.indices, vec![0]);
        assert_eq!(single.covering_radius, 0.0);
    }

    #[test]
    fn net_invariants_hold_on_scattered_points() {
        let pts: Vec<Point> = (0..40)
            .map(|i| {
                let x = (i as f64 * 0.37).sin() * 0.8;
                let y = (i as f64 * 0.61).cos() * 0.8;
                point(&[x, y])
            })
            .collect();
        let metric = MetricSpec::Euclidean;
        let net = greedy_eps_net(&pts, &metric, 0.3).unwrap();
        for (a, &i) in net.indices.iter().enumerate() {
            for &j in net.indices.iter().skip(a + 1) {
                assert!(distance(&metric, &pts[i], &pts[j]).unwrap() > 0.3);
            }
        }
        for p in &pts {
            let nearest = net
                .indices
                .iter()
                .map(|&j| distance(&metric, p, &pts[j]).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= net.covering_radius + 1e-15);
        }
        assert!(net.covering_radius <= 0.3);
    }

    #[test]
    fn projection_uses_min_index_tie_break() {
        let targets = line_points(&[0.0, 2.0]);
        let assignment = nearest_point_projection(
            &line_points(&[1.0, 1.6, 0.0]),
            &targets,
            &MetricSpec::Euclidean,
        )
        .unwrap();
        // x = 1 is equidistant: the earlier target wins. x = 1.6 is nearer
        // to 2. A point on a target projects to it.
        assert_eq!(assignment, vec![0, 1, 0]);
    }

    #[test]
    fn projection_is_idempotent_on_targets() {
        let targets = vec![point(&[0.1, 0.2]), point(&[0.9, 0.4]), point(&[0.5, 0.8])];
        let assignment =
            nearest_point_projection(&targets, &targets, &MetricSpec::Euclidean).unwrap();
        assert_eq!(assignment, vec![0, 1, 2]);
    }

    #[test]
    fn pushforward_merges_mass_and_preserves_total() {
        let m = DiscreteMeasure::uniform(line_points(&[0.0, 1.0, 2.0, 3.0])).unwrap();
        let targets = line_points(&[0.0, 2.0]);
        let assignment =
            nearest_point_projection(m.points(), &targets, &MetricSpec::Euclidean).unwrap();
        // 1 is equidistant from 0 and 2, so it goes left by min index.
        assert_eq!(assignment, vec![0, 0, 1, 1]);
        let pushed = pushforward(&m, &assignment, &targets).unwrap();
        assert_eq!(pushed.len(), 2);
        assert!((pushed.weight(0) - 0.5).abs() < 1e-15);
        assert!((pushed.weight(1) - 0.5).abs() < 1e-15);
        assert!((pushed.total_mass() - 1.0).abs() <= WEIGHT_SUM_TOL);

        // Identity assignment reproduces the measure.
        let id: Vec<usize> = (0..m.len()).collect();
        assert_eq!(pushforward(&m, &id, m.points()).unwrap(), m);

        // Everything onto one target is a Dirac.
        let dirac = pushforward(&m, &[0, 0, 0, 0], &targets).unwrap();
        assert_eq!(dirac.len(), 1);
        assert_eq!(dirac.weight(0), 1.0);
    }

    #[test]
    fn doubling_of_a_tight_cluster_is_one() {
        let m = DiscreteMeasure::uniform(line_points(&[0.0, 0.001])).unwrap();
        let est = estimate_doubling(&m, &MetricSpec::Euclidean, 10.0).unwrap();
        assert_eq!(est.c, 1.0);
        assert_eq!(est.d, 0.0);
    }

    #[test]
    fn doubling_of_a_fine_interval_grid_is_near_one_dimensional() {
        let body = ConvexBody::axis_box(point(&[0.0]), point(&[1.0])).unwrap();
        let m = grid_discretize(&body, 256, None).unwrap();
        let est = estimate_doubling(&m, &MetricSpec::Euclidean, 0.25).unwrap();
        assert!(
            (est.d - 1.0).abs() < 0.05,
            "interval doubling exponent {} should be close to 1",
            est.d
        );
    }

    #[test]
    fn doubling_estimate_is_monotone_in_probe_refinement() {
        let body = ConvexBody::axis_box(point(&[0.0]), point(&[1.0])).unwrap();
        let m = grid_discretize(&body, 64, None).unwrap();
        let coarse =
            estimate_doubling_with_ladder(&m, &MetricSpec::Euclidean, 0.25, 2).unwrap();
        let fine = estimate_doubling_with_ladder(&m, &MetricSpec::Euclidean, 0.25, 6).unwrap();
        assert!(fine.c >= coarse.c);
    }

    #[test]
    fn doubling_rejects_a_single_atom() {
        let m = DiscreteMeasure::dirac(point(&[0.0]));
        assert!(matches!(
            estimate_doubling(&m, &MetricSpec::Euclidean, 1.0),
            Err(MongeError::DegenerateMeasure(_))
        ));
    }

    #[test]
    fn net_cardinality_gate_matches_hand_computation() {
        let pts = line_points(&[0.0, 1.0, 2.0, 3.0]);
        let net = greedy_eps_net(&pts, &MetricSpec::Euclidean, 1.5).unwrap();
        // D = 3, eps = 1.5: bound C^ceil(log2(4)) = C^2.
        let good = DoublingEstimate {
            c: 2.0,
            d: 1.0,
            radius_cap: 0.25,
        };
        assert!(check_net_cardinality(&net, &good, 3.0));
        // An underestimated constant gets flagged.
        let bad = DoublingEstimate {
            c: 1.0,
            d: 0.0,
            radius_cap: 0.25,
        };
        assert!(!check_net_cardinality(&net, &bad, 3.0));
        // One-point nets always pass, even when eps exceeds 2D.
        let single = Net {
            indices: vec![0],
            epsilon: 100.0,
            covering_radius: 3.0,
        };
        assert!(check_net_cardinality(&single, &bad, 3.0));
    }
}
