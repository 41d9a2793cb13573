//! Small f64-slice helpers shared by the geometry, measure, and checker code.
//!
//! Everything here is plain Euclidean arithmetic on raw coordinate slices;
//! metric-aware distances live in [`crate::geometry`].

use std::cmp::Ordering;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// a + s * v
pub(crate) fn add_scaled(a: &[f64], s: f64, v: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), v.len());
    a.iter().zip(v).map(|(x, d)| x + s * d).collect()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    norm2(a).sqrt()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// Total lexicographic order on coordinate slices. All inputs are validated
/// finite before they reach this comparator, so `partial_cmp` cannot fail.
pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).expect("finite coordinates") {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Distance from `p` to the segment [a, b], plus the clamped parameter of
/// the nearest point (0 at `a`, 1 at `b`).
pub(crate) fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let ab = sub(b, a);
    let denom = norm2(&ab);
    let t = if denom <= 0.0 {
        0.0
    } else {
        (dot(&sub(p, a), &ab) / denom).clamp(0.0, 1.0)
    };
    let proj = add_scaled(a, t, &ab);
    (dist(p, &proj), t)
}
