//! Exact L1 (distance-cost) optimal transport on bounded convex domains.
//!
//! The crate covers the full pipeline for discrete marginals:
//!
//! * [`geometry`] — convex bodies (balls, boxes, polytopes), the metric zoo
//!   (Euclidean, p-norms, polyhedral norms, Hilbert metrics), chords,
//!   geodesic interpolation, and the induced Finsler norm.
//! * [`measures`] — discrete probability measures, grid/rejection
//!   discretizers, greedy epsilon-nets, nearest-point projections, and
//!   doubling-constant estimation.
//! * [`transport`] — an exact network-simplex solver for the balanced
//!   transportation LP with deterministic Bland pivoting, dual potentials,
//!   Lipschitz potential extraction, and cyclical-monotonicity checks.
//! * [`selection`] — the two-stage selection principle: restrict to
//!   distance-optimal plans via a tight-set mask, then minimize the squared
//!   displacement among them.
//! * [`approximation`] — the quantized surrogate functional: per-epsilon
//!   penalized solves over candidate net supports with a certificate against
//!   projected reference plans.
//! * [`verification`] — splitting index (map-ness), transport-set sampling,
//!   interpolant disjointness, and schedule convergence reports.
//! * [`instances`] — small canonical problem builders used by tests, docs,
//!   and the CLI examples.
//!
//! The `monge` binary in this crate exposes the pipeline as subcommands over
//! a single JSON run configuration; see the repository README.

pub mod approximation;
pub mod config;
pub mod error;
pub mod geometry;
pub mod instances;
pub mod io;
pub mod measures;
pub mod selection;
pub mod transport;
mod vecmath;
pub mod verification;

pub use error::{MongeError, Result};
