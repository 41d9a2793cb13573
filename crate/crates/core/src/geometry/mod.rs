//! Convex bodies, metrics, chords, and geodesic interpolation.
//!
//! The domain is always a bounded convex body with nonempty interior in a
//! fixed dimension. Points are dense coordinate vectors. Four metric
//! families are supported; all of them make straight segments geodesics
//! (additivity along segments), which the rest of the pipeline relies on:
//!
//! * `Euclidean` and `PNorm(p)`, `p >= 1` — translation-invariant norms.
//! * `Polyhedral` — the gauge of a centrally symmetric polytope unit ball.
//! * `Hilbert` — the logarithmic cross-ratio distance of a convex body;
//!   distances are computed from the chord through the two points.
//!
//! Conventions:
//! * chords are parameterized as `x + s v`, `x + t v` with `s < 0 < t`;
//! * boundary tolerance is `1e-9 * diameter`; Hilbert queries additionally
//!   require clearance `>= 1e-7 * diameter` so cross-ratios stay conditioned;
//! * points closer than `1e-12 * diameter` are treated as coincident.

mod hull;

use serde::{Deserialize, Serialize};

use crate::error::{MongeError, Result};
use crate::vecmath::{add_scaled, dist, dot, norm, norm2, sub};
use hull::HalfSpace;

/// Boundary tolerance, relative to the body diameter.
pub const BOUNDARY_TOL_REL: f64 = 1e-9;
/// Minimum interior clearance for chord and Hilbert queries, relative to
/// the body diameter.
pub const INTERIOR_CLEARANCE_REL: f64 = 1e-7;
/// Two points closer than this (relative to the diameter) are coincident.
pub const COINCIDENT_REL: f64 = 1e-12;
/// Directions with Euclidean norm below this are rejected.
pub const ZERO_DIRECTION_TOL: f64 = 1e-14;

// ---------------------------------------------------------------------------
// Points
// ---------------------------------------------------------------------------

/// A point (or displacement) as a dense coordinate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    /// Build a point, rejecting NaN/infinite coordinates and zero dimension.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(MongeError::InvalidMeasure("zero-dimensional point".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(MongeError::InvalidMeasure(
                "point has non-finite coordinate".into(),
            ));
        }
        Ok(Point(coords))
    }

    /// Internal constructor for coordinates we computed ourselves.
    pub(crate) fn raw(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// Convenience constructor for literals; panics on non-finite coordinates.
pub fn point(coords: &[f64]) -> Point {
    Point::new(coords.to_vec()).expect("finite coordinates")
}

fn ensure_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(MongeError::DimensionMismatch { expected, got });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Convex bodies
// ---------------------------------------------------------------------------

/// A full-dimensional polytope stored by its extreme vertices together with
/// facet half-spaces derived once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Point>,
    facets: Vec<HalfSpace>,
    dim: usize,
    diameter: f64,
}

impl Polytope {
    fn from_vertices(raw: Vec<Point>) -> Result<Self> {
        let dim = match raw.first() {
            Some(p) => p.dim(),
            None => {
                return Err(MongeError::DegenerateBody(
                    "polytope needs at least one vertex".into(),
                ))
            }
        };
        for p in &raw {
            ensure_dim(dim, p.dim())?;
        }
        let coords: Vec<Vec<f64>> = raw.iter().map(|p| p.coords().to_vec()).collect();
        let mut facets = hull::facets_from_vertices(&coords, dim)?;
        // Canonical facet order: keeps construction independent of the
        // order the caller listed the vertices in.
        facets.sort_by(|a, b| {
            crate::vecmath::lex_cmp(&a.normal, &b.normal)
                .then(a.offset.partial_cmp(&b.offset).unwrap())
        });
        let mut extreme = hull::extreme_vertices(&coords, &facets, dim);
        extreme.sort_by(|a, b| crate::vecmath::lex_cmp(a, b));
        let mut diameter = 0.0f64;
        for i in 0..extreme.len() {
            for j in (i + 1)..extreme.len() {
                diameter = diameter.max(dist(&extreme[i], &extreme[j]));
            }
        }
        Ok(Polytope {
            vertices: extreme.into_iter().map(Point::raw).collect(),
            facets,
            dim,
            diameter,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    fn clearance(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| f.offset - dot(&f.normal, x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Bounded convex domain with nonempty interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodyRepr", into = "BodyRepr")]
pub enum ConvexBody {
    /// Euclidean ball of positive radius.
    Ball { center: Point, radius: f64 },
    /// Axis-aligned box with `lower < upper` componentwise.
    Box { lower: Point, upper: Point },
    /// Convex hull of finitely many points, full-dimensional.
    Polytope(Polytope),
}

impl ConvexBody {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(MongeError::DegenerateBody(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(ConvexBody::Ball { center, radius })
    }

    pub fn axis_box(lower: Point, upper: Point) -> Result<Self> {
        ensure_dim(lower.dim(), upper.dim())?;
        for (l, u) in lower.coords().iter().zip(upper.coords()) {
            if !(l < u) {
                return Err(MongeError::DegenerateBody(format!(
                    "box needs lower < upper on every axis, got [{l}, {u}]"
                )));
            }
        }
        Ok(ConvexBody::Box { lower, upper })
    }

    pub fn polytope(vertices: Vec<Point>) -> Result<Self> {
        Ok(ConvexBody::Polytope(Polytope::from_vertices(vertices)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { center, .. } => center.dim(),
            ConvexBody::Box { lower, .. } => lower.dim(),
            ConvexBody::Polytope(p) => p.dim,
        }
    }

    /// Euclidean diameter of the body.
    pub fn diameter(&self) -> f64 {
        match self {
            ConvexBody::Ball { radius, .. } => 2.0 * radius,
            ConvexBody::Box { lower, upper } => dist(lower.coords(), upper.coords()),
            ConvexBody::Polytope(p) => p.diameter,
        }
    }

    /// Componentwise bounding box `(lower, upper)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ConvexBody::Ball { center, radius } => (
                center.coords().iter().map(|c| c - radius).collect(),
                center.coords().iter().map(|c| c + radius).collect(),
            ),
            ConvexBody::Box { lower, upper } => (lower.coords().to_vec(), upper.coords().to_vec()),
            ConvexBody::Polytope(p) => {
                let d = p.dim;
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for v in &p.vertices {
                    for (k, &c) in v.coords().iter().enumerate() {
                        lo[k] = lo[k].min(c);
                        hi[k] = hi[k].max(c);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Signed clearance of `x`: distance to the boundary, negative outside.
    /// (For polytopes the outside value is the largest facet violation,
    /// which lower-bounds the true distance in magnitude.)
    fn signed_clearance(&self, x: &Point) -> Result<f64> {
        ensure_dim(self.dim(), x.dim())?;
        Ok(match self {
            ConvexBody::Ball { center, radius } => radius - dist(center.coords(), x.coords()),
            ConvexBody::Box { lower, upper } => x
                .coords()
                .iter()
                .zip(lower.coords().iter().zip(upper.coords()))
                .map(|(&c, (&l, &u))| (c - l).min(u - c))
                .fold(f64::INFINITY, f64::min),
            ConvexBody::Polytope(p) => p.clearance(x.coords()),
        })
    }

    /// Interior membership with the clearance that witnessed it.
    pub fn contains_interior(&self, x: &Point) -> Result<InteriorStatus> {
        let clearance = self.signed_clearance(x)?;
        Ok(InteriorStatus {
            inside: clearance > BOUNDARY_TOL_REL * self.diameter(),
            clearance,
        })
    }

    pub(crate) fn require_chord_interior(&self, x: &Point) -> Result<()> {
        let clearance = self.signed_clearance(x)?;
        let required = INTERIOR_CLEARANCE_REL * self.diameter();
        if clearance < required {
            return Err(MongeError::PointNotInterior {
                clearance,
                required,
            });
        }
        Ok(())
    }
}

/// Result of an interior test: membership plus signed clearance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorStatus {
    pub inside: bool,
    pub clearance: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum BodyRepr {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Polytope { vertices: Vec<Vec<f64>> },
}

impl TryFrom<BodyRepr> for ConvexBody {
    type Error = MongeError;
    fn try_from(r: BodyRepr) -> Result<Self> {
        match r {
            BodyRepr::Ball { center, radius } => ConvexBody::ball(Point::new(center)?, radius),
            BodyRepr::Box { lower, upper } => {
                ConvexBody::axis_box(Point::new(lower)?, Point::new(upper)?)
            }
            BodyRepr::Polytope { vertices } => {
                let pts: Result<Vec<Point>> = vertices.into_iter().map(Point::new).collect();
                ConvexBody::polytope(pts?)
            }
        }
    }
}

impl From<ConvexBody> for BodyRepr {
    fn from(b: ConvexBody) -> Self {
        match b {
            ConvexBody::Ball { center, radius } => BodyRepr::Ball {
                center: center.0,
                radius,
            },
            ConvexBody::Box { lower, upper } => BodyRepr::Box {
                lower: lower.0,
                upper: upper.0,
            },
            ConvexBody::Polytope(p) => BodyRepr::Polytope {
                vertices: p.vertices.into_iter().map(|v| v.0).collect(),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Gauge norm of a centrally symmetric polytope unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralNorm {
    unit_ball: Polytope,
}

impl PolyhedralNorm {
    /// Validate symmetry by pairing facets into exact `(n, c)` / `(-n, c)`
    /// couples; the paired representation also makes the gauge exactly even.
    pub fn new(unit_ball_vertices: Vec<Point>) -> Result<Self> {
        let mut poly = Polytope::from_vertices(unit_ball_vertices)?;
        let scale = 1.0 + poly.diameter;
        if poly.clearance(&vec![0.0; poly.dim]) <= BOUNDARY_TOL_REL * scale {
            return Err(MongeError::DegenerateBody(
                "polyhedral unit ball must contain the origin in its interior".into(),
            ));
        }
        let mut paired: Vec<HalfSpace> = Vec::new();
        let mut used = vec![false; poly.facets.len()];
        for i in 0..poly.facets.len() {
            if used[i] {
                continue;
            }
            let fi = &poly.facets[i];
            let partner = (i + 1..poly.facets.len()).find(|&j| {
                !used[j]
                    && dot(&poly.facets[j].normal, &fi.normal) < -(1.0 - 1e-9)
                    && (poly.facets[j].offset - fi.offset).abs() <= 1e-9 * scale
            });
            let Some(j) = partner else {
                return Err(MongeError::DegenerateBody(
                    "polyhedral unit ball is not centrally symmetric".into(),
                ));
            };
            used[i] = true;
            used[j] = true;
            let offset = 0.5 * (fi.offset + poly.facets[j].offset);
            let normal = fi.normal.clone();
            paired.push(HalfSpace {
                normal: normal.clone(),
                offset,
            });
            paired.push(HalfSpace {
                normal: normal.iter().map(|x| -x).collect(),
                offset,
            });
        }
        poly.facets = paired;
        Ok(PolyhedralNorm { unit_ball: poly })
    }

    pub fn dim(&self) -> usize {
        self.unit_ball.dim
    }

    pub fn unit_ball(&self) -> &Polytope {
        &self.unit_ball
    }

    /// Minkowski gauge of the unit ball: `max_i (n_i . v) / c_i`.
    pub fn gauge(&self, v: &[f64]) -> f64 {
        self.unit_ball
            .facets
            .iter()
            .map(|f| dot(&f.normal, v) / f.offset)
            .fold(0.0f64, f64::max)
    }
}

/// Metric choice on the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricRepr", into = "MetricRepr")]
pub enum MetricSpec {
    /// Standard Euclidean norm distance.
    Euclidean,
    /// `p`-norm distance, `p >= 1` finite.
    PNorm { p: f64 },
    /// Gauge of a centrally symmetric polytope unit ball.
    Polyhedral(PolyhedralNorm),
    /// Hilbert (logarithmic cross-ratio) metric of a convex body.
    Hilbert { body: ConvexBody },
}

impl MetricSpec {
    pub fn pnorm(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(MongeError::InvalidConfig(format!(
                "p-norm exponent must be finite and >= 1, got {p}"
            )));
        }
        Ok(MetricSpec::PNorm { p })
    }

    /// Intrinsic dimension, when the metric fixes one.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            MetricSpec::Euclidean | MetricSpec::PNorm { .. } => None,
            MetricSpec::Polyhedral(n) => Some(n.dim()),
            MetricSpec::Hilbert { body } => Some(body.dim()),
        }
    }

    /// Human-readable tag used in provenance strings and reports.
    pub fn label(&self) -> String {
        match self {
            MetricSpec::Euclidean => "euclidean".into(),
            MetricSpec::PNorm { p } => format!("pnorm({p})"),
            MetricSpec::Polyhedral(_) => "polyhedral".into(),
            MetricSpec::Hilbert { .. } => "hilbert".into(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MetricRepr {
    Euclidean,
    Pnorm { p: f64 },
    Polyhedral { unit_ball: Vec<Vec<f64>> },
    Hilbert { body: ConvexBody },
}

impl TryFrom<MetricRepr> for MetricSpec {
    type Error = MongeError;
    fn try_from(r: MetricRepr) -> Result<Self> {
        match r {
            MetricRepr::Euclidean => Ok(MetricSpec::Euclidean),
            MetricRepr::Pnorm { p } => MetricSpec::pnorm(p),
            MetricRepr::Polyhedral { unit_ball } => {
                let pts: Result<Vec<Point>> = unit_ball.into_iter().map(Point::new).collect();
                Ok(MetricSpec::Polyhedral(PolyhedralNorm::new(pts?)?))
            }
            MetricRepr::Hilbert { body } => Ok(MetricSpec::Hilbert { body }),
        }
    }
}

impl From<MetricSpec> for MetricRepr {
    fn from(m: MetricSpec) -> Self {
        match m {
            MetricSpec::Euclidean => MetricRepr::Euclidean,
            MetricSpec::PNorm { p } => MetricRepr::Pnorm { p },
            MetricSpec::Polyhedral(n) => MetricRepr::Polyhedral {
                unit_ball: n.unit_ball.vertices.into_iter().map(|v| v.0).collect(),
            },
            MetricSpec::Hilbert { body } => MetricRepr::Hilbert { body },
        }
    }
}

// ---------------------------------------------------------------------------
// Chords
// ---------------------------------------------------------------------------

/// Intersection of the line `x + tau v` with the boundary of a body:
/// `s < 0 < t` with `entry = x + s v` and `exit = x + t v` on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ChordIntersection {
    pub s: f64,
    pub t: f64,
    pub entry: Point,
    pub exit: Point,
}

/// Both boundary intersections of the line through interior point `x` with
/// direction `v`.
pub fn boundary_chord(body: &ConvexBody, x: &Point, v: &Point) -> Result<ChordIntersection> {
    ensure_dim(body.dim(), x.dim())?;
    ensure_dim(body.dim(), v.dim())?;
    let vn = norm(v.coords());
    if vn < ZERO_DIRECTION_TOL {
        return Err(MongeError::ZeroDirection(vn));
    }
    body.require_chord_interior(x)?;

    let (s, t) = match body {
        ConvexBody::Ball { center, radius } => {
            let xc = sub(x.coords(), center.coords());
            let a = norm2(v.coords());
            let b = 2.0 * dot(v.coords(), &xc);
            let c0 = norm2(&xc) - radius * radius;
            // c0 < 0 because x is interior, so the roots straddle zero.
            let disc = (b * b - 4.0 * a * c0).max(0.0);
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            let (r1, r2) = if q == 0.0 {
                // b == 0: symmetric roots.
                let r = (-c0 / a).sqrt();
                (-r, r)
            } else {
                (q / a, c0 / q)
            };
            (r1.min(r2), r1.max(r2))
        }
        ConvexBody::Box { lower, upper } => {
            let mut s = f64::NEG_INFINITY;
            let mut t = f64::INFINITY;
            for k in 0..x.dim() {
                let (xi, vi) = (x.coords()[k], v.coords()[k]);
                let (l, u) = (lower.coords()[k], upper.coords()[k]);
                if vi > 0.0 {
                    s = s.max((l - xi) / vi);
                    t = t.min((u - xi) / vi);
                } else if vi < 0.0 {
                    s = s.max((u - xi) / vi);
                    t = t.min((l - xi) / vi);
                }
            }
            (s, t)
        }
        ConvexBody::Polytope(p) => {
            let mut s = f64::NEG_INFINITY;
            let mut t = f64::INFINITY;
            for f in &p.facets {
                let denom = dot(&f.normal, v.coords());
                let slack = f.offset - dot(&f.normal, x.coords());
                if denom > 0.0 {
                    t = t.min(slack / denom);
                } else if denom < 0.0 {
                    s = s.max(slack / denom);
                }
            }
            (s, t)
        }
    };
    if !(s.is_finite() && t.is_finite() && s < 0.0 && t > 0.0) {
        return Err(MongeError::NumericalFailure(format!(
            "chord parameters out of order: s = {s}, t = {t}"
        )));
    }
    Ok(ChordIntersection {
        s,
        t,
        entry: Point::raw(add_scaled(x.coords(), s, v.coords())),
        exit: Point::raw(add_scaled(x.coords(), t, v.coords())),
    })
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

fn pnorm_of(v: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    if p == 2.0 {
        return norm(v);
    }
    let m = v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * v
        .iter()
        .map(|x| (x.abs() / m).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Distance between two points under the chosen metric.
///
/// Hilbert distances require both points to have interior clearance at
/// least `1e-7 * diameter`; nearly coincident points return exactly 0.
pub fn distance(metric: &MetricSpec, x: &Point, y: &Point) -> Result<f64> {
    ensure_dim(x.dim(), y.dim())?;
    if let Some(d) = metric.dimension() {
        ensure_dim(d, x.dim())?;
    }
    match metric {
        MetricSpec::Euclidean => Ok(dist(x.coords(), y.coords())),
        MetricSpec::PNorm { p } => Ok(pnorm_of(&sub(x.coords(), y.coords()), *p)),
        MetricSpec::Polyhedral(n) => Ok(n.gauge(&sub(y.coords(), x.coords()))),
        MetricSpec::Hilbert { body } => {
            let gap = dist(x.coords(), y.coords());
            if gap < COINCIDENT_REL * body.diameter() {
                return Ok(0.0);
            }
            body.require_chord_interior(y)?;
            let v = Point::raw(sub(y.coords(), x.coords()));
            let chord = boundary_chord(body, x, &v)?;
            let (s, t) = (chord.s, chord.t);
            // y = x + 1*v is interior, so t > 1 and the ratio is positive.
            Ok(0.5 * (((1.0 - s) * t) / ((-s) * (t - 1.0))).ln())
        }
    }
}

/// Infinitesimal (Finsler) norm of direction `v` at point `x`.
///
/// For norm metrics this is just the norm of `v`. For the Hilbert metric it
/// is the chord harmonic mean `(1/|s| + 1/t) / 2`, which equals the
/// derivative of `d(x, x + tau v)` at `tau = 0`.
pub fn finsler_norm(metric: &MetricSpec, x: &Point, v: &Point) -> Result<f64> {
    ensure_dim(x.dim(), v.dim())?;
    if let Some(d) = metric.dimension() {
        ensure_dim(d, x.dim())?;
    }
    if norm(v.coords()) < ZERO_DIRECTION_TOL {
        return Ok(0.0);
    }
    match metric {
        MetricSpec::Euclidean => Ok(norm(v.coords())),
        MetricSpec::PNorm { p } => Ok(pnorm_of(v.coords(), *p)),
        MetricSpec::Polyhedral(n) => Ok(n.gauge(v.coords())),
        MetricSpec::Hilbert { body } => {
            let chord = boundary_chord(body, x, v)?;
            Ok(0.5 * (1.0 / (-chord.s) + 1.0 / chord.t))
        }
    }
}

/// Affine interpolation `(1 - t) x + t y`, the geodesic parameterization
/// shared by every supported metric.
pub fn interpolate(x: &Point, y: &Point, t: f64) -> Result<Point> {
    ensure_dim(x.dim(), y.dim())?;
    if !(0.0..=1.0).contains(&t) {
        return Err(MongeError::ParameterOutOfRange(t));
    }
    Ok(Point::raw(
        x.coords()
            .iter()
            .zip(y.coords())
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_disk() -> ConvexBody {
        ConvexBody::ball(point(&[0.0, 0.0]), 1.0).unwrap()
    }

    #[test]
    fn ball_chord_from_center_offset() {
        // Unit disk, x = origin, v = (0.5, 0): boundary at s v = -1, t v = +1.
        let chord = boundary_chord(&unit_disk(), &point(&[0.0, 0.0]), &point(&[0.5, 0.0])).unwrap();
        assert!((chord.s + 2.0).abs() < 1e-12);
        assert!((chord.t - 2.0).abs() < 1e-12);
        assert!((chord.entry.coords()[0] + 1.0).abs() < 1e-12);
        assert!((chord.exit.coords()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_chord_clips_each_slab() {
        let body = ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 1.0])).unwrap();
        let chord = boundary_chord(&body, &point(&[0.25, 0.5]), &point(&[1.0, 0.0])).unwrap();
        assert!((chord.s + 0.25).abs() < 1e-12);
        assert!((chord.t - 0.75).abs() < 1e-12);
    }

    #[test]
    fn polytope_chord_matches_box_chord() {
        let square = ConvexBody::polytope(vec![
            point(&[0.0, 0.0]),
            point(&[1.0, 0.0]),
            point(&[1.0, 1.0]),
            point(&[0.0, 1.0]),
        ])
        .unwrap();
        let chord = boundary_chord(&square, &point(&[0.25, 0.5]), &point(&[1.0, 0.0])).unwrap();
        assert!((chord.s + 0.25).abs() < 1e-9);
        assert!((chord.t - 0.75).abs() < 1e-9);
    }

    #[test]
    fn chord_reversal_swaps_and_negates_parameters() {
        let bodies = [
            unit_disk(),
            ConvexBody::axis_box(point(&[-1.0, -2.0]), point(&[2.0, 1.0])).unwrap(),
            ConvexBody::polytope(vec![
                point(&[0.0, 0.0]),
                point(&[2.0, 0.1]),
                point(&[1.0, 1.5]),
                point(&[-0.5, 1.0]),
            ])
            .unwrap(),
        ];
        for body in &bodies {
            let x = point(&[0.3, 0.2]);
            let v = point(&[0.7, -0.3]);
            let neg = point(&[-0.7, 0.3]);
            let fwd = boundary_chord(body, &x, &v).unwrap();
            let rev = boundary_chord(body, &x, &neg).unwrap();
            assert!((fwd.s + rev.t).abs() < 1e-12);
            assert!((fwd.t + rev.s).abs() < 1e-12);
        }
    }

    #[test]
    fn chord_rejects_zero_direction_and_exterior_points() {
        let body = unit_disk();
        assert!(matches!(
            boundary_chord(&body, &point(&[0.0, 0.0]), &point(&[0.0, 0.0])),
            Err(MongeError::ZeroDirection(_))
        ));
        assert!(matches!(
            boundary_chord(&body, &point(&[2.0, 0.0]), &point(&[1.0, 0.0])),
            Err(MongeError::PointNotInterior { .. })
        ));
    }

    #[test]
    fn hilbert_ball_matches_cayley_klein_closed_form() {
        // On the unit ball, d(0, r e1) = artanh(r).
        let metric = MetricSpec::Hilbert { body: unit_disk() };
        for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let d = distance(&metric, &point(&[0.0, 0.0]), &point(&[r, 0.0])).unwrap();
            assert!((d - r.atanh()).abs() < 1e-12, "r = {r}: {d} vs {}", r.atanh());
        }
        // Hand value: d((0,0), (0.5,0)) has chord s = -2, t = 2, so
        // d = 0.5 * ln((3 * 2) / (2 * 1)) = 0.5 * ln 3.
        let d = distance(&metric, &point(&[0.0, 0.0]), &point(&[0.5, 0.0])).unwrap();
        assert!((d - 0.5 * 3.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn hilbert_is_projectively_additive_on_segments() {
        let bodies = [
            unit_disk(),
            ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 1.0])).unwrap(),
        ];
        for body in bodies {
            let metric = MetricSpec::Hilbert { body };
            let x = point(&[0.1, 0.2]);
            let y = point(&[0.6, 0.55]);
            let z = interpolate(&x, &y, 0.37).unwrap();
            let whole = distance(&metric, &x, &y).unwrap();
            let parts =
                distance(&metric, &x, &z).unwrap() + distance(&metric, &z, &y).unwrap();
            assert!((whole - parts).abs() < 1e-12);
        }
    }

    #[test]
    fn hilbert_treats_near_coincident_points_as_equal() {
        let metric = MetricSpec::Hilbert { body: unit_disk() };
        let x = point(&[0.25, 0.25]);
        let y = point(&[0.25, 0.25 + 1e-13]);
        assert_eq!(distance(&metric, &x, &y).unwrap(), 0.0);
    }

    #[test]
    fn finsler_norm_matches_hand_values_on_the_ball() {
        let metric = MetricSpec::Hilbert { body: unit_disk() };
        // At the center every unit direction has norm 1.
        let f = finsler_norm(&metric, &point(&[0.0, 0.0]), &point(&[1.0, 0.0])).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        // At (0.5, 0) towards e1: endpoint gaps 1.5 and 0.5 give
        // (1/1.5 + 1/0.5) / 2 = 4/3.
        let f = finsler_norm(&metric, &point(&[0.5, 0.0]), &point(&[1.0, 0.0])).unwrap();
        assert!((f - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn finsler_norm_is_the_difference_quotient_limit() {
        let bodies = [
            unit_disk(),
            ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 1.0])).unwrap(),
        ];
        for body in bodies {
            let metric = MetricSpec::Hilbert { body };
            let x = point(&[0.3, 0.4]);
            let v = point(&[0.5, -0.2]);
            let f = finsler_norm(&metric, &x, &v).unwrap();
            let tau = 1e-4;
            let y = Point::raw(add_scaled(x.coords(), tau, v.coords()));
            let quotient = distance(&metric, &x, &y).unwrap() / tau;
            assert!(
                (f - quotient).abs() < 10.0 * tau,
                "finsler {f} vs quotient {quotient}"
            );
        }
    }

    #[test]
    fn pnorm_distances_match_hand_values() {
        let x = point(&[0.0, 0.0]);
        let y = point(&[3.0, 4.0]);
        assert_eq!(distance(&MetricSpec::Euclidean, &x, &y).unwrap(), 5.0);
        assert_eq!(
            distance(&MetricSpec::pnorm(1.0).unwrap(), &x, &y).unwrap(),
            7.0
        );
        let d15 = distance(&MetricSpec::pnorm(1.5).unwrap(), &x, &y).unwrap();
        let expect = (3.0f64.powf(1.5) + 4.0f64.powf(1.5)).powf(1.0 / 1.5);
        assert!((d15 - expect).abs() < 1e-12);
        // p = 2 agrees with Euclidean.
        let d2 = distance(&MetricSpec::pnorm(2.0).unwrap(), &x, &y).unwrap();
        assert!((d2 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn polyhedral_square_ball_is_the_max_norm() {
        let ball = PolyhedralNorm::new(vec![
            point(&[1.0, 1.0]),
            point(&[1.0, -1.0]),
            point(&[-1.0, 1.0]),
            point(&[-1.0, -1.0]),
        ])
        .unwrap();
        assert!((ball.gauge(&[0.5, -2.0]) - 2.0).abs() < 1e-12);
        assert!((ball.gauge(&[0.3, 0.1]) - 0.3).abs() < 1e-12);
        assert_eq!(ball.gauge(&[0.0, 0.0]), 0.0);
        let metric = MetricSpec::Polyhedral(ball);
        let d = distance(&metric, &point(&[0.0, 0.0]), &point(&[0.5, -2.0])).unwrap();
        let rev = distance(&metric, &point(&[0.5, -2.0]), &point(&[0.0, 0.0])).unwrap();
        assert_eq!(d, rev);
    }

    #[test]
    fn polyhedral_rejects_asymmetric_unit_ball() {
        let r = PolyhedralNorm::new(vec![
            point(&[1.0, 0.0]),
            point(&[0.0, 1.0]),
            point(&[-1.0, -0.5]),
        ]);
        assert!(matches!(r, Err(MongeError::DegenerateBody(_))));
    }

    #[test]
    fn interpolate_validates_parameter_and_dimensions() {
        let x = point(&[0.0, 0.0]);
        let y = point(&[1.0, 2.0]);
        let mid = interpolate(&x, &y, 0.25).unwrap();
        assert_eq!(mid.coords(), &[0.25, 0.5]);
        assert!(matches!(
            interpolate(&x, &y, 1.5),
            Err(MongeError::ParameterOutOfRange(_))
        ));
        assert!(matches!(
            interpolate(&x, &point(&[1.0]), 0.5),
            Err(MongeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bodies_validate_their_shape_data() {
        assert!(ConvexBody::ball(point(&[0.0]), 0.0).is_err());
        assert!(ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 0.0])).is_err());
        assert!(ConvexBody::polytope(vec![point(&[0.0, 0.0]), point(&[1.0, 0.0])]).is_err());
    }

    #[test]
    fn contains_interior_reports_signed_clearance() {
        let body = ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 1.0])).unwrap();
        let inside = body.contains_interior(&point(&[0.2, 0.5])).unwrap();
        assert!(inside.inside);
        assert!((inside.clearance - 0.2).abs() < 1e-15);
        let outside = body.contains_interior(&point(&[1.25, 0.5])).unwrap();
        assert!(!outside.inside);
        assert!((outside.clearance + 0.25).abs() < 1e-15);
    }

    #[test]
    fn body_and_metric_round_trip_through_json() {
        let body = ConvexBody::polytope(vec![
            point(&[0.0, 0.0]),
            point(&[1.0, 0.0]),
            point(&[0.5, 1.0]),
        ])
        .unwrap();
        let s = serde_json::to_string(&body).unwrap();
        assert!(s.contains("\"kind\":\"polytope\""));
        let back: ConvexBody = serde_json::from_str(&s).unwrap();
        assert_eq!(body, back);

        let metric = MetricSpec::Hilbert {
            body: ConvexBody::ball(point(&[0.0, 0.0]), 2.0).unwrap(),
        };
        let s = serde_json::to_string(&metric).unwrap();
        let back: MetricSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(metric, back);
        // Invalid payloads are rejected at parse time.
        assert!(serde_json::from_str::<MetricSpec>("{\"kind\":\"pnorm\",\"p\":0.5}").is_err());
    }
}
