//! Canonical instances shared by tests, experiments, and the CLI.
//!
//! The book-shift pair is the standard witness for distance-cost
//! degeneracy: uniform atoms on {0, 1, 2} moved to {1, 2, 3} cost 1
//! under *every* plan that only moves mass rightward, so the optimal
//! face is huge and selection principles have something to select from.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{point, ConvexBody, Point};
use crate::measures::DiscreteMeasure;

/// Uniform atoms on {0, 1, 2} and {1, 2, 3} on the line.
pub fn book_shift_1d() -> (DiscreteMeasure, DiscreteMeasure) {
    (
        DiscreteMeasure::uniform(vec![point(&[0.0]), point(&[1.0]), point(&[2.0])]).unwrap(),
        DiscreteMeasure::uniform(vec![point(&[1.0]), point(&[2.0]), point(&[3.0])]).unwrap(),
    )
}

/// The book-shift pair embedded on the x-axis of the plane.
pub fn book_shift_2d() -> (DiscreteMeasure, DiscreteMeasure) {
    (
        DiscreteMeasure::uniform(vec![
            point(&[0.0, 0.0]),
            point(&[1.0, 0.0]),
            point(&[2.0, 0.0]),
        ])
        .unwrap(),
        DiscreteMeasure::uniform(vec![
            point(&[1.0, 0.0]),
            point(&[2.0, 0.0]),
            point(&[3.0, 0.0]),
        ])
        .unwrap(),
    )
}

/// Two sources on the bottom edge and two targets directly above them:
/// the secondary stage must pick the vertical pairing over the crossing
/// one.
pub fn crossing_2x2() -> (DiscreteMeasure, DiscreteMeasure) {
    (
        DiscreteMeasure::uniform(vec![point(&[0.0, 0.0]), point(&[1.0, 0.0])]).unwrap(),
        DiscreteMeasure::uniform(vec![point(&[0.0, 1.0]), point(&[1.0, 1.0])]).unwrap(),
    )
}

/// The unit square `[0, 1]²`.
pub fn unit_square() -> ConvexBody {
    ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 1.0])).unwrap()
}

/// A grid-to-atoms pair on the unit square: μ₁ is the uniform
/// `resolution × resolution` grid, μ₂ five equally weighted atoms placed
/// asymmetrically in the interior.
pub fn grid_to_five_atoms(
    resolution: usize,
) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let mu1 = crate::measures::grid_discretize(&unit_square(), resolution, None)?;
    let mu2 = DiscreteMeasure::uniform(vec![
        point(&[0.15, 0.2]),
        point(&[0.8, 0.15]),
        point(&[0.5, 0.55]),
        point(&[0.2, 0.85]),
        point(&[0.85, 0.8]),
    ])?;
    Ok((mu1, mu2))
}

fn random_points(
    rng: &mut ChaCha8Rng,
    dim: usize,
    n: usize,
    lo: f64,
    hi: f64,
) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let coords: Vec<f64> = (0..dim).map(|_| rng.gen_range(lo..hi)).collect();
            point(&coords)
        })
        .collect()
}

/// Seeded pair of uniform measures with `n` atoms each, coordinates
/// drawn from `[lo, hi)^dim`.
pub fn random_uniform_pair(
    dim: usize,
    n: usize,
    seed: u64,
    lo: f64,
    hi: f64,
) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DiscreteMeasure::uniform(random_points(&mut rng, dim, n, lo, hi))?;
    let b = DiscreteMeasure::uniform(random_points(&mut rng, dim, n, lo, hi))?;
    Ok((a, b))
}

/// Seeded pair with random (non-uniform) weights, `m` and `n` atoms.
/// Weights are bounded away from zero and normalized.
pub fn random_weighted_pair(
    dim: usize,
    m: usize,
    n: usize,
    seed: u64,
    lo: f64,
    hi: f64,
) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pa = random_points(&mut rng, dim, m, lo, hi);
    let wa: Vec<f64> = (0..m).map(|_| 0.2 + rng.gen::<f64>()).collect();
    let pb = random_points(&mut rng, dim, n, lo, hi);
    let wb: Vec<f64> = (0..n).map(|_| 0.2 + rng.gen::<f64>()).collect();
    Ok((DiscreteMeasure::new(pa, wa)?, DiscreteMeasure::new(pb, wb)?))
}
