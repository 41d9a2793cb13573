//! Facet enumeration for vertex-described polytopes.
//!
//! Facets are found by brute force over dimension-sized vertex subsets: a
//! subset that spans a hyperplane with every vertex on one side is a facet
//! supporting hyperplane. Non-simplicial facets are discovered several times
//! and deduplicated. This is quadratic-to-combinatorial in the vertex count,
//! which is fine at the intended scale; a hard cap guards the combinatorics.

use itertools::Itertools;

use crate::error::{MongeError, Result};
use crate::vecmath::{dot, norm, sub};

/// Closed half-space `normal . x <= offset` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HalfSpace {
    pub(crate) normal: Vec<f64>,
    pub(crate) offset: f64,
}

/// Cap on `C(vertices, dim)` enumerated subsets.
const SUBSET_CAP: usize = 200_000;

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Rank of the row space of `rows` (each of length `dim`), by Gaussian
/// elimination with partial pivoting. `scale` sets the pivot threshold.
pub(crate) fn rank(rows: &[Vec<f64>], dim: usize, scale: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let tol = 1e-12 * (1.0 + scale);
    let k = m.len();
    let mut r = 0;
    for col in 0..dim {
        let (best, best_abs) = (r..k)
            .map(|i| (i, m[i][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((r, 0.0));
        if best_abs <= tol {
            continue;
        }
        m.swap(r, best);
        for i in (r + 1)..k {
            let f = m[i][col] / m[r][col];
            if f != 0.0 {
                for c in col..dim {
                    m[i][c] -= f * m[r][c];
                }
            }
        }
        r += 1;
        if r == k {
            break;
        }
    }
    r
}

/// A unit vector orthogonal to all `rows`, when the row space has rank
/// exactly `dim - 1`; `None` for degenerate (rank-deficient) inputs.
fn unit_normal(rows: &[Vec<f64>], dim: usize, scale: f64) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let tol = 1e-12 * (1.0 + scale);
    let k = m.len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..dim {
        let (best, best_abs) = (r..k)
            .map(|i| (i, m[i][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((r, 0.0));
        if best_abs <= tol {
            continue;
        }
        m.swap(r, best);
        for i in (r + 1)..k {
            let f = m[i][col] / m[r][col];
            if f != 0.0 {
                for c in col..dim {
                    m[i][c] -= f * m[r][c];
                }
            }
        }
        pivot_cols.push(col);
        r += 1;
        if r == k {
            break;
        }
    }
    if pivot_cols.len() + 1 != dim {
        return None;
    }
    let free = (0..dim).find(|c| !pivot_cols.contains(c))?;
    let mut x = vec![0.0; dim];
    x[free] = 1.0;
    for (i, &pc) in pivot_cols.iter().enumerate().rev() {
        let mut s = 0.0;
        for c in (pc + 1)..dim {
            s += m[i][c] * x[c];
        }
        x[pc] = -s / m[i][pc];
    }
    let n = norm(&x);
    if n <= 0.0 {
        return None;
    }
    for v in &mut x {
        *v /= n;
    }
    Some(x)
}

/// Derive the facet half-spaces of `conv(vertices)`, which must be
/// full-dimensional in `dim` coordinates.
pub(crate) fn facets_from_vertices(vertices: &[Vec<f64>], dim: usize) -> Result<Vec<HalfSpace>> {
    let m = vertices.len();
    if m < dim + 1 {
        return Err(MongeError::DegenerateBody(format!(
            "polytope in dimension {dim} needs at least {} vertices, got {m}",
            dim + 1
        )));
    }
    let scale = vertices
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |a, &x| a.max(x.abs()));
    let diffs: Vec<Vec<f64>> = vertices[1..].iter().map(|v| sub(v, &vertices[0])).collect();
    if rank(&diffs, dim, scale) < dim {
        return Err(MongeError::DegenerateBody(
            "polytope vertex set is flat (affine hull has deficient rank)".into(),
        ));
    }
    if binomial(m, dim) > SUBSET_CAP {
        return Err(MongeError::TooLarge {
            size: m,
            cap: SUBSET_CAP,
        });
    }

    let side_tol = 1e-9 * (1.0 + scale);
    let mut facets: Vec<HalfSpace> = Vec::new();
    for subset in (0..m).combinations(dim) {
        let base = &vertices[subset[0]];
        let rows: Vec<Vec<f64>> = subset[1..].iter().map(|&i| sub(&vertices[i], base)).collect();
        let Some(normal) = unit_normal(&rows, dim, scale) else {
            continue;
        };
        let offset = dot(&normal, base);
        let mut above = false;
        let mut below = false;
        for v in vertices {
            let d = dot(&normal, v) - offset;
            if d > side_tol {
                above = true;
            } else if d < -side_tol {
                below = true;
            }
            if above && below {
                break;
            }
        }
        if above && below {
            continue;
        }
        let (normal, offset) = if above {
            (normal.iter().map(|x| -x).collect::<Vec<f64>>(), -offset)
        } else {
            (normal, offset)
        };
        let dup = facets.iter().any(|f| {
            dot(&f.normal, &normal) > 1.0 - 1e-9 && (f.offset - offset).abs() <= side_tol
        });
        if !dup {
            facets.push(HalfSpace { normal, offset });
        }
    }
    if facets.len() < dim + 1 {
        return Err(MongeError::DegenerateBody(format!(
            "facet enumeration found only {} facets in dimension {dim}",
            facets.len()
        )));
    }
    Ok(facets)
}

/// Keep only extreme points: vertices whose active facet normals span the
/// full dimension.
pub(crate) fn extreme_vertices(
    vertices: &[Vec<f64>],
    facets: &[HalfSpace],
    dim: usize,
) -> Vec<Vec<f64>> {
    let scale = vertices
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |a, &x| a.max(x.abs()));
    let tol = 1e-9 * (1.0 + scale);
    vertices
        .iter()
        .filter(|v| {
            let active: Vec<Vec<f64>> = facets
                .iter()
                .filter(|f| (dot(&f.normal, v) - f.offset).abs() <= tol)
                .map(|f| f.normal.clone())
                .collect();
            active.len() >= dim && rank(&active, dim, 1.0) == dim
        })
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_has_four_facets() {
        let verts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        let facets = facets_from_vertices(&verts, 2).unwrap();
        assert_eq!(facets.len(), 4);
        for f in &facets {
            assert!((norm(&f.normal) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_facets_and_interior_vertex_reduction() {
        let verts = vec![vec![0.0], vec![0.4], vec![1.0]];
        let facets = facets_from_vertices(&verts, 1).unwrap();
        assert_eq!(facets.len(), 2);
        let extreme = extreme_vertices(&verts, &facets, 1);
        assert_eq!(extreme, vec![vec![0.0], vec![1.0]]);
    }

    #[test]
    fn cube_collapses_coplanar_subsets() {
        let mut verts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    verts.push(vec![x, y, z]);
                }
            }
        }
        let facets = facets_from_vertices(&verts, 3).unwrap();
        assert_eq!(facets.len(), 6);
        assert_eq!(extreme_vertices(&verts, &facets, 3).len(), 8);
    }

    #[test]
    fn flat_vertex_set_is_rejected() {
        let verts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(matches!(
            facets_from_vertices(&verts, 2),
            Err(MongeError::DegenerateBody(_))
        ));
    }

    #[test]
    fn face_midpoint_is_not_extreme() {
        let verts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 0.0], // edge midpoint
            vec![0.5, 1.0],
        ];
        let facets = facets_from_vertices(&verts, 2).unwrap();
        let extreme = extreme_vertices(&verts, &facets, 2);
        assert_eq!(extreme.len(), 3);
        assert!(!extreme.contains(&vec![0.5, 0.0]));
    }
}
