//! Acceptance suite: ten end-to-end properties the toolkit must satisfy,
//! each with an explicit tolerance and a wall-clock budget. Every test
//! prints a one-line verdict so the suite doubles as a release checklist.

use std::time::Instant;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use monge_core::approximation::{minimize_c_eps, run_schedule, ApproxConfig};
use monge_core::geometry::{
    distance, interpolate, point, ConvexBody, MetricSpec, Point, PolyhedralNorm,
};
use monge_core::instances::{
    book_shift_1d, book_shift_2d, crossing_2x2, grid_to_five_atoms, random_uniform_pair,
    random_weighted_pair,
};
use monge_core::measures::{
    check_net_cardinality, estimate_doubling, greedy_eps_net, grid_discretize, sample_uniform,
    support_diameter, DiscreteMeasure,
};
use monge_core::selection::{
    brute_force_secondary, check_restricted_monotonicity, solve_two_stage,
};
use monge_core::transport::{
    build_cost, check_cyclical_monotonicity, solve_kantorovich, CostProvenance, PlanEntry,
    TransportPlan,
};
use monge_core::verification::{
    check_interpolant_disjointness, default_separation_tol, splitting_index,
};

fn assert_budget(start: Instant, budget_secs: f64, label: &str) -> f64 {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_secs,
        "{label} took {elapsed:.1}s, budget {budget_secs}s"
    );
    elapsed
}

/// A metric variant together with a box `[lo, hi]^2` whose points are
/// safely interior for that metric (so Hilbert distances stay finite
/// and well-conditioned).
struct Variant {
    label: &'static str,
    metric: MetricSpec,
    lo: f64,
    hi: f64,
}

fn jittered_hexagon() -> ConvexBody {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let vertices: Vec<Point> = (0..6)
        .map(|k| {
            let angle = std::f64::consts::PI / 3.0 * k as f64;
            let radius = rng.gen_range(0.9..1.3);
            point(&[radius * angle.cos(), radius * angle.sin()])
        })
        .collect();
    ConvexBody::polytope(vertices).expect("hexagon vertices are full-dimensional")
}

fn max_norm() -> MetricSpec {
    let square = vec![
        point(&[1.0, 1.0]),
        point(&[1.0, -1.0]),
        point(&[-1.0, 1.0]),
        point(&[-1.0, -1.0]),
    ];
    MetricSpec::Polyhedral(PolyhedralNorm::new(square).expect("symmetric square ball"))
}

fn metric_variants() -> Vec<Variant> {
    let ball = ConvexBody::ball(point(&[0.0, 0.0]), 1.0).unwrap();
    let unit_box = ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 1.0])).unwrap();
    vec![
        Variant {
            label: "euclidean",
            metric: MetricSpec::Euclidean,
            lo: 0.0,
            hi: 1.0,
        },
        Variant {
            label: "p = 1",
            metric: MetricSpec::pnorm(1.0).unwrap(),
            lo: 0.0,
            hi: 1.0,
        },
        Variant {
            label: "p = 1.5",
            metric: MetricSpec::pnorm(1.5).unwrap(),
            lo: 0.0,
            hi: 1.0,
        },
        Variant {
            label: "p = 3",
            metric: MetricSpec::pnorm(3.0).unwrap(),
            lo: 0.0,
            hi: 1.0,
        },
        Variant {
            label: "polyhedral max-norm",
            metric: max_norm(),
            lo: 0.0,
            hi: 1.0,
        },
        Variant {
            label: "hilbert ball",
            metric: MetricSpec::Hilbert { body: ball },
            lo: -0.6,
            hi: 0.6,
        },
        Variant {
            label: "hilbert box",
            metric: MetricSpec::Hilbert { body: unit_box },
            lo: 0.05,
            hi: 0.95,
        },
        Variant {
            label: "hilbert polytope",
            metric: MetricSpec::Hilbert {
                body: jittered_hexagon(),
            },
            lo: -0.5,
            hi: 0.5,
        },
    ]
}

/// Interior sample points for a metric variant: uniform on the variant's
/// body for Hilbert metrics (pulled 10% toward the center to keep the
/// chord parameters well-conditioned), uniform on `[-1, 1]^2` otherwise.
fn variant_points(variant: &Variant, count: usize, seed: u64) -> Vec<Point> {
    let body = match &variant.metric {
        MetricSpec::Hilbert { body } => body.clone(),
        _ => ConvexBody::axis_box(point(&[-1.0, -1.0]), point(&[1.0, 1.0])).unwrap(),
    };
    let shrink = matches!(variant.metric, MetricSpec::Hilbert { .. });
    let (lower, upper) = body.bounding_box();
    let center: Vec<f64> = lower.iter().zip(&upper).map(|(a, b)| 0.5 * (a + b)).collect();
    sample_uniform(&body, count, seed)
        .unwrap()
        .points()
        .iter()
        .map(|p| {
            if shrink {
                let coords: Vec<f64> = p
                    .coords()
                    .iter()
                    .zip(&center)
                    .map(|(x, c)| c + 0.9 * (x - c))
                    .collect();
                point(&coords)
            } else {
                p.clone()
            }
        })
        .collect()
}

#[test]
fn criterion_01_hilbert_closed_form_on_the_unit_ball() {
    let start = Instant::now();
    let ball = ConvexBody::ball(point(&[0.0, 0.0]), 1.0).unwrap();
    let metric = MetricSpec::Hilbert { body: ball };
    let origin = point(&[0.0, 0.0]);
    let mut worst = 0.0f64;
    for k in 1..=9 {
        let r = k as f64 / 10.0;
        let d = distance(&metric, &origin, &point(&[r, 0.0])).unwrap();
        worst = worst.max((d - r.atanh()).abs());
    }
    assert!(worst <= 1e-9, "worst closed-form error {worst:.3e}");
    let elapsed = assert_budget(start, 1.0, "criterion 1");
    println!(
        "criterion 1 (Hilbert closed form on the unit ball): worst error {worst:.3e} \
         over r = 0.1..0.9 [{elapsed:.2}s] ✓ PASSED"
    );
}

#[test]
fn criterion_02_metric_axioms_and_segment_additivity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_symmetry = 0.0f64;
    let mut worst_triangle = f64::INFINITY;
    let mut worst_additivity = 0.0f64;
    for (vi, variant) in metric_variants().iter().enumerate() {
        let points = variant_points(variant, 3000, 20 + vi as u64);
        for triple in points.chunks(3) {
            let [x, y, z] = triple else { break };
            let dxy = distance(&variant.metric, x, y).unwrap();
            let dyx = distance(&variant.metric, y, x).unwrap();
            let dxz = distance(&variant.metric, x, z).unwrap();
            let dzy = distance(&variant.metric, z, y).unwrap();
            worst_symmetry = worst_symmetry.max((dxy - dyx).abs());
            worst_triangle = worst_triangle.min(dxz + dzy - dxy);

            let t: f64 = rng.gen_range(0.01..0.99);
            let p = interpolate(x, y, t).unwrap();
            let residual = distance(&variant.metric, x, &p).unwrap()
                + distance(&variant.metric, &p, y).unwrap()
                - dxy;
            worst_additivity = worst_additivity.max(residual.abs());
        }
    }
    assert!(worst_symmetry <= 1e-12, "symmetry error {worst_symmetry:.3e}");
    assert!(worst_triangle >= -1e-9, "triangle slack {worst_triangle:.3e}");
    assert!(
        worst_additivity <= 1e-9,
        "segment additivity residual {worst_additivity:.3e}"
    );
    let elapsed = assert_budget(start, 10.0, "criterion 2");
    println!(
        "criterion 2 (metric axioms + segment additivity, 1000 triples x 8 variants): \
         symmetry {worst_symmetry:.1e}, triangle slack {worst_triangle:.1e}, \
         additivity {worst_additivity:.1e} [{elapsed:.2}s] ✓ PASSED"
    );
}

#[test]
fn criterion_03_lp_exactness_on_random_instances() {
    let start = Instant::now();
    let mut worst_gap = 0.0f64;
    let mut worst_excess = 0.0f64;
    let mut instances = 0usize;
    for (vi, variant) in metric_variants().iter().enumerate() {
        for s in 0..50u64 {
            let seed = 1000 * (vi as u64 + 1) + s;
            let (mu1, mu2) =
                random_weighted_pair(2, 30, 30, seed, variant.lo, variant.hi).unwrap();
            let cost = build_cost(&mu1, &mu2, &variant.metric, 1.0).unwrap();
            let solution = solve_kantorovich(&mu1, &mu2, &cost).unwrap();

            let gap = (solution.value - solution.dual.objective(&mu1, &mu2)).abs();
            assert!(
                gap <= 1e-8 * (1.0 + solution.value.abs()),
                "{}: duality gap {gap:.3e} at value {}",
                variant.label,
                solution.value
            );
            worst_gap = worst_gap.max(gap / (1.0 + solution.value.abs()));

            let excess = solution.dual.feasibility_excess(&cost);
            assert!(excess <= 1e-9, "{}: dual excess {excess:.3e}", variant.label);
            worst_excess = worst_excess.max(excess);

            for entry in solution.plan.entries() {
                let c = cost.at(entry.i, entry.j);
                let slack = c - solution.dual.phi[entry.i] - solution.dual.psi[entry.j];
                assert!(
                    slack.abs() <= 1e-8 * (1.0 + c.abs()),
                    "{}: support entry ({}, {}) not tight, slack {slack:.3e}",
                    variant.label,
                    entry.i,
                    entry.j
                );
            }

            for k in [2usize, 3] {
                let report =
                    check_cyclical_monotonicity(&solution.plan, &cost, k, 200, seed).unwrap();
                assert!(
                    report.is_clean(),
                    "{}: {} cyclical-monotonicity violations at k = {k}",
                    variant.label,
                    report.violations.len()
                );
            }
            instances += 1;
        }
    }
    let elapsed = assert_budget(start, 30.0, "criterion 3");
    println!(
        "criterion 3 (LP exactness, {instances} instances of 30x30): relative gap \
         {worst_gap:.1e}, dual excess {worst_excess:.1e}, 0 tightness or cycle violations \
         [{elapsed:.2}s] ✓ PASSED"
    );
}

#[test]
fn criterion_04_permutation_oracle_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut sets = 0usize;
    for n in 2..=5usize {
        for s in 0..5u64 {
            let seed = 40 * n as u64 + s;
            let (mu1, mu2) = random_uniform_pair(2, n, seed, 0.0, 1.0).unwrap();
            let cost = build_cost(&mu1, &mu2, &MetricSpec::Euclidean, 1.0).unwrap();
            let lp = solve_kantorovich(&mu1, &mu2, &cost).unwrap();

            let brute = (0..n)
                .permutations(n)
                .map(|perm| {
                    perm.iter()
                        .enumerate()
                        .map(|(i, &j)| cost.at(i, j) / n as f64)
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            let gap = (lp.value - brute).abs();
            assert!(gap <= 1e-10, "n = {n}, seed {seed}: gap {gap:.3e}");
            worst = worst.max(gap);
            sets += 1;
        }
    }
    let elapsed = assert_budget(start, 10.0, "criterion 4");
    println!(
        "criterion 4 (permutation oracle, {sets} uniform point sets, n <= 5): \
         worst gap {worst:.1e} [{elapsed:.2}s] ✓ PASSED"
    );
}

#[test]
fn criterion_05_book_shift_selects_the_shift_map() {
    let start = Instant::now();
    let (mu1, mu2) = book_shift_1d();
    let metric = MetricSpec::Euclidean;
    let solution = solve_two_stage(&mu1, &mu2, &metric, None).unwrap();

    assert!((solution.selection.primary_cost - 1.0).abs() <= 1e-9);
    assert!((solution.selection.secondary_cost - 1.0).abs() <= 1e-9);
    let entries = solution.selection.plan.entries();
    assert_eq!(entries.len(), 3, "shift map has one entry per source");
    for (k, entry) in entries.iter().enumerate() {
        assert_eq!((entry.i, entry.j), (k, k), "entry {k} must map atom k to atom k");
        assert!((entry.mass - 1.0 / 3.0).abs() <= 1e-12);
    }

    let monotonicity = check_restricted_monotonicity(&solution.selection.plan, 1e-7).unwrap();
    assert!(monotonicity.is_clean(), "restricted monotonicity must be clean");

    let oracle = brute_force_secondary(&mu1, &mu2, &metric).unwrap();
    assert!((solution.selection.primary_cost - oracle.primary).abs() <= 1e-12);
    assert!((solution.selection.secondary_cost - oracle.secondary).abs() <= 1e-12);
    assert_eq!(oracle.assignment, vec![0, 1, 2]);

    let elapsed = assert_budget(start, 1.0, "criterion 5");
    println!(
        "criterion 5 (book shift): primary 1.0, secondary 1.0, shift map returned, \
         matches the brute-force oracle [{elapsed:.2}s] ✓ PASSED"
    );
}

#[test]
fn criterion_06_secondary_matches_the_oracle_across_metrics() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut instances = 0usize;
    for (vi, variant) in metric_variants().iter().enumerate() {
        for s in 0..20u64 {
            let n = 2 + (s as usize % 4);
            let seed = 600 * (vi as u64 + 1) + 7 * s + 1;
            let (mu1, mu2) =
                random_uniform_pair(2, n, seed, variant.lo, variant.hi).unwrap();
            let solution = solve_two_stage(&mu1, &mu2, &variant.metric, None).unwrap();
            let oracle = brute_force_secondary(&mu1, &mu2, &variant.metric).unwrap();

            let gap_primary = (solution.selection.primary_cost - oracle.primary).abs();
            let gap_secondary = (solution.selection.secondary_cost - oracle.secondary).abs();
            assert!(
                gap_primary <= 1e-8 && gap_secondary <= 1e-8,
                "{} seed {seed} (n = {n}): primary gap {gap_primary:.3e}, \
                 secondary gap {gap_secondary:.3e}",
                variant.label
            );
            worst = worst.max(gap_primary).max(gap_secondary);

            let monotonicity =
                check_restricted_monotonicity(&solution.selection.plan, 1e-7).unwrap();
            assert!(
                monotonicity.is_clean(),
                "{} seed {seed}: {} restricted-monotonicity violations",
                variant.label,
                monotonicity.violations.len()
            );
            instances += 1;
        }
    }
    let elapsed = assert_budget(start, 30.0, "criterion 6");
    println!(
        "criterion 6 (secondary oracle sweep, {instances} instances x 8 variants): \
         worst cost gap {worst:.1e}, 0 monotonicity violations [{elapsed:.2}s] ✓ PASSED"
    );
}

#[test]
fn criterion_07_approximation_trend_on_grid_to_atoms() {
    let start = Instant::now();
    let (mu1, mu2) = grid_to_five_atoms(20).unwrap();
    let unit_box = ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 1.0])).unwrap();
    let metrics: Vec<(&str, MetricSpec)> = vec![
        ("euclidean", MetricSpec::Euclidean),
        ("hilbert box", MetricSpec::Hilbert { body: unit_box }),
    ];
    for (label, metric) in &metrics {
        let run = run_schedule(&mu1, &mu2, metric, &ApproxConfig::default()).unwrap();
        assert!(run.failures.is_empty(), "{label}: schedule had failures");
        assert_eq!(run.records.len(), 5);

        // (a) fidelity trend and the final mesh bound.
        for pair in run.records.windows(2) {
            assert!(
                pair[1].w1_nu_mu2 <= pair[0].w1_nu_mu2 + 1e-12,
                "{label}: fidelity increased between eps {} and {}",
                pair[0].epsilon,
                pair[1].epsilon
            );
        }
        let last = run.final_record();
        assert!(
            last.w1_nu_mu2 <= 2.0 / last.j as f64 + 1e-9,
            "{label}: final fidelity {} above mesh bound 2/{}",
            last.w1_nu_mu2,
            last.j
        );

        // (b) final primary cost within 5% of the directly solved value,
        // recomputed here rather than trusted from the run's own trend.
        let rho = build_cost(&mu1, &mu2, metric, 1.0).unwrap();
        let direct = solve_kantorovich(&mu1, &mu2, &rho).unwrap();
        let gap = (last.primary_cost - direct.value).abs();
        assert!(
            gap <= 0.05 * direct.value.abs() + 1e-12,
            "{label}: final primary {} vs direct {}",
            last.primary_cost,
            direct.value
        );
        assert!(run.trend.primary_within_5pct && run.trend.fidelity_nonincreasing);

        // (c) every record's winner is certified against all candidates,
        // including the projected reference plans.
        for record in &run.records {
            assert!(
                record
                    .candidates
                    .iter()
                    .any(|c| c.kind == monge_core::approximation::CandidateKind::Projected),
                "{label}: candidate pool must include projected plans"
            );
            for candidate in &record.candidates {
                assert!(
                    record.breakdown.total <= candidate.breakdown.total + 1e-8,
                    "{label} eps {}: winner {} beaten by a candidate at {}",
                    record.epsilon,
                    record.breakdown.total,
                    candidate.breakdown.total
                );
            }
        }
    }
    let elapsed = assert_budget(start, 120.0, "criterion 7");
    println!(
        "criterion 7 (approximation trend, 20x20 grid -> 5 atoms, euclidean + hilbert box): \
         fidelity nonincreasing, final mesh bound and 5% primary gap hold, certificates hold \
         [{elapsed:.2}s] ✓ PASSED"
    );
}

#[test]
fn criterion_08_interpolant_slices_are_disjoint() {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut worst_margin = f64::INFINITY;
    for seed in 0..20u64 {
        let (mu1, mu2) = random_weighted_pair(2, 6, 4, seed, 0.0, 1.0).unwrap();
        let outcome =
            minimize_c_eps(&mu1, &mu2, &MetricSpec::Euclidean, 0.2, &ApproxConfig::default())
                .unwrap();
        let distinct_targets = outcome
            .plan
            .entries()
            .iter()
            .map(|e| e.j)
            .collect::<std::collections::BTreeSet<_>>()
            .len();
        assert!(
            distinct_targets >= 2,
            "seed {seed}: expected a plan with at least 2 distinct targets"
        );
        let tol = default_separation_tol(&outcome.plan);
        let report = check_interpolant_disjointness(&outcome.plan, 0.5, tol).unwrap();
        let margin = report.margin.expect("multiple slices must report a margin");
        assert!(
            report.disjoint && margin > 0.0,
            "seed {seed}: slices overlap, margin {margin:.3e}"
        );
        worst_margin = worst_margin.min(margin);
        checked += 1;
    }

    // The deliberately swapped pairing on the crossing instance is flagged.
    let (mu1, mu2) = crossing_2x2();
    let swapped = TransportPlan::new(
        mu1.clone(),
        mu2.clone(),
        vec![
            PlanEntry { i: 0, j: 1, mass: 0.5 },
            PlanEntry { i: 1, j: 0, mass: 0.5 },
        ],
        CostProvenance::Quantized {
            metric: MetricSpec::Euclidean,
            epsilon: 0.2,
        },
        0.0,
        None,
    )
    .unwrap();
    let report = check_interpolant_disjointness(&swapped, 0.5, 1e-9).unwrap();
    assert!(!report.disjoint, "swapped crossing pairing must be flagged");

    let elapsed = assert_budget(start, 10.0, "criterion 8");
    println!(
        "criterion 8 (interpolant disjointness, {checked} quantized-optimal plans at t = 0.5): \
         minimum margin {worst_margin:.3e} > 0, swapped pairing flagged [{elapsed:.2}s] ✓ PASSED"
    );
}

#[test]
fn criterion_09_splitting_trend_toward_maps() {
    let start = Instant::now();

    let (b1, b2) = book_shift_2d();
    let metric = MetricSpec::Euclidean;
    let rho_b = build_cost(&b1, &b2, &metric, 1.0).unwrap();
    let direct_b = solve_kantorovich(&b1, &b2, &rho_b).unwrap();
    let run_b = run_schedule(&b1, &b2, &metric, &ApproxConfig::default()).unwrap();
    let s_direct_b = splitting_index(&direct_b.plan).index;
    let s_final_b = splitting_index(&run_b.final_record().plan).index;
    assert!(
        s_final_b <= s_direct_b + 1e-12,
        "book shift: approx splitting {s_final_b:.3e} above LP splitting {s_direct_b:.3e}"
    );
    assert!(s_final_b <= 0.05);

    let (g1, g2) = grid_to_five_atoms(40).unwrap();
    let rho_g = build_cost(&g1, &g2, &metric, 1.0).unwrap();
    let direct_g = solve_kantorovich(&g1, &g2, &rho_g).unwrap();
    let run_g = run_schedule(&g1, &g2, &metric, &ApproxConfig::default()).unwrap();
    let s_direct_g = splitting_index(&direct_g.plan).index;
    let s_final_g = splitting_index(&run_g.final_record().plan).index;
    assert!(
        s_final_g <= s_direct_g + 1e-12,
        "40x40 grid: approx splitting {s_final_g:.3e} above LP splitting {s_direct_g:.3e}"
    );
    assert!(
        s_final_g <= 0.05,
        "40x40 grid: approx splitting {s_final_g:.3e} above map threshold"
    );

    let elapsed = assert_budget(start, 180.0, "criterion 9");
    println!(
        "criterion 9 (splitting trend, book shift in the plane + 40x40 grid): approx final \
         splitting {s_final_b:.1e} / {s_final_g:.1e} <= LP splitting {s_direct_b:.1e} / \
         {s_direct_g:.1e}, both <= 0.05 [{elapsed:.2}s] ✓ PASSED"
    );
}

#[test]
fn criterion_10_net_machinery_and_doubling_estimates() {
    let start = Instant::now();

    let line = ConvexBody::axis_box(point(&[0.0]), point(&[1.0])).unwrap();
    let square = ConvexBody::axis_box(point(&[0.0, 0.0]), point(&[1.0, 1.0])).unwrap();
    let metric = MetricSpec::Euclidean;
    let grid_1d = grid_discretize(&line, 256, None).unwrap();
    let grid_2d = grid_discretize(&square, 64, None).unwrap();

    let cases: Vec<(&str, &DiscreteMeasure, Vec<f64>, f64, f64)> = vec![
        ("1d grid (res 256)", &grid_1d, vec![0.25, 0.1], 0.25, 1.0),
        ("2d grid (res 64)", &grid_2d, vec![0.3, 0.15], 1.0, 2.0),
    ];
    let mut worst_exponent_gap = 0.0f64;
    for (label, measure, epsilons, radius_cap, expected_d) in &cases {
        let diameter = support_diameter(measure, &metric).unwrap();
        let estimate = estimate_doubling(measure, &metric, *radius_cap).unwrap();
        let gap = (estimate.d - expected_d).abs();
        assert!(
            gap <= 0.3,
            "{label}: doubling exponent {} not within 0.3 of {expected_d}",
            estimate.d
        );
        worst_exponent_gap = worst_exponent_gap.max(gap);

        for &eps in epsilons {
            let net = greedy_eps_net(measure.points(), &metric, eps).unwrap();

            // Separation: net points pairwise more than eps apart.
            for (a, b) in net.indices.iter().tuple_combinations() {
                let d = distance(&metric, &measure.points()[*a], &measure.points()[*b]).unwrap();
                assert!(d > eps, "{label}: net points {a}, {b} at distance {d} <= {eps}");
            }
            // Covering: every support point within eps of the net, and the
            // reported covering radius is exactly the worst such distance.
            let mut worst_cover = 0.0f64;
            for p in measure.points() {
                let nearest = net
                    .indices
                    .iter()
                    .map(|&i| distance(&metric, p, &measure.points()[i]).unwrap())
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest <= eps, "{label}: point uncovered at distance {nearest}");
                worst_cover = worst_cover.max(nearest);
            }
            assert!((worst_cover - net.covering_radius).abs() <= 1e-12);

            assert!(
                check_net_cardinality(&net, &estimate, diameter),
                "{label}: net of {} nodes at mesh {eps} violates the cardinality bound",
                net.len()
            );
        }
    }

    let elapsed = assert_budget(start, 20.0, "criterion 10");
    println!(
        "criterion 10 (net machinery on 1d/2d grids): net properties exhaustive, cardinality \
         bounds hold, doubling exponents within {worst_exponent_gap:.2} of 1 and 2 \
         [{elapsed:.2}s] ✓ PASSED"
    );
}
