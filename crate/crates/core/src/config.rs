//! Experiment configuration: a single JSON document pins the domain,
//! the metric, both measures, tolerances, and the ε-schedule, so a run
//! is reproducible from one file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::approximation::ApproxConfig;
use crate::error::{MongeError, Result};
use crate::geometry::{ConvexBody, MetricSpec, Point, PolyhedralNorm};
use crate::io::load_measure;
use crate::measures::{
    grid_discretize, sample_uniform, DiscreteMeasure, MeasureAdjustment, MeasureData,
};

/// Metric selection; `hilbert` uses the configured domain body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricConfig {
    #[default]
    Euclidean,
    Pnorm {
        p: f64,
    },
    Polyhedral {
        /// Vertices of the centrally symmetric unit ball.
        unit_ball: Vec<Vec<f64>>,
    },
    Hilbert,
}

impl MetricConfig {
    pub fn resolve(&self, body: &ConvexBody) -> Result<MetricSpec> {
        match self {
            MetricConfig::Euclidean => Ok(MetricSpec::Euclidean),
            MetricConfig::Pnorm { p } => MetricSpec::pnorm(*p),
            MetricConfig::Polyhedral { unit_ball } => {
                let vertices: Vec<Point> = unit_ball
                    .iter()
                    .map(|c| Point::new(c.clone()))
                    .collect::<Result<_>>()?;
                Ok(MetricSpec::Polyhedral(PolyhedralNorm::new(vertices)?))
            }
            MetricConfig::Hilbert => Ok(MetricSpec::Hilbert { body: body.clone() }),
        }
    }
}

/// Grid density profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    #[default]
    Uniform,
    /// Density proportional to the offset of the first coordinate from
    /// the body's bounding box (the profile `f(x) = x₁` on `[0, 1]ⁿ`).
    LinearX,
    /// Gaussian bump centered in the body's bounding box.
    Gaussian,
}

/// Where a measure comes from. Exactly one variant per measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSource {
    /// A `.json` or `.csv` measure file; relative paths resolve against
    /// the config file's directory.
    File { path: String },
    /// Uniform grid over the body, optionally weighted by a density.
    Grid {
        resolution: usize,
        #[serde(default)]
        density: DensityKind,
    },
    /// Uniform rejection samples from the body.
    Sample {
        count: usize,
        /// Defaults to the top-level seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Inline atoms; omitted weights mean uniform.
    Atoms {
        points: Vec<Vec<f64>>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
}

/// Optional tolerance overrides; absent fields use the library defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Tight-set tolerance for the selection stage.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Collinearity tolerance for restricted monotonicity.
    #[serde(default)]
    pub collinearity: Option<f64>,
    /// Separation tolerance for slice disjointness.
    #[serde(default)]
    pub separation: Option<f64>,
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        // Zero is legal everywhere: eta = 0 demands exact tightness, and
        // zero collinearity/separation tolerances just tighten the checks.
        for v in [self.eta, self.collinearity, self.separation]
            .into_iter()
            .flatten()
        {
            if !(v.is_finite() && v >= 0.0) {
                return Err(MongeError::ParameterOutOfRange(v));
            }
        }
        Ok(())
    }
}

/// The experiment document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub body: ConvexBody,
    #[serde(default)]
    pub metric: MetricConfig,
    pub mu1: MeasureSource,
    pub mu2: MeasureSource,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub approx: ApproxConfig,
    /// Output directory for command results (default `out`, resolved
    /// against the working directory).
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Default RNG seed for sampled measures.
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> String {
    "out".to_string()
}

/// Both measures resolved and the metric bound to the body.
#[derive(Debug, Clone)]
pub struct ResolvedInstance {
    pub mu1: DiscreteMeasure,
    pub mu2: DiscreteMeasure,
    pub metric: MetricSpec,
    /// `(measure name, adjustment)` for inputs that were not already
    /// canonical (duplicates merged or weights rescaled).
    pub adjustments: Vec<(String, MeasureAdjustment)>,
}

impl RunConfig {
    /// Parse a config file, validating the schema strictly.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MongeError::Io(format!("{}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| MongeError::InvalidConfig(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        self.approx.validate()?;
        if self.output_dir.is_empty() {
            return Err(MongeError::InvalidConfig("empty output_dir".into()));
        }
        Ok(())
    }

    /// Build the measures and metric. `base_dir` anchors relative file
    /// paths (pass the config file's directory).
    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedInstance> {
        let metric = self.metric.resolve(&self.body)?;
        let mut adjustments = Vec::new();
        let mu1 = self.resolve_measure(&self.mu1, "mu1", base_dir, &mut adjustments)?;
        let mu2 = self.resolve_measure(&self.mu2, "mu2", base_dir, &mut adjustments)?;
        for (name, m) in [("mu1", &mu1), ("mu2", &mu2)] {
            if m.dim() != self.body.dim() {
                return Err(MongeError::InvalidConfig(format!(
                    "{name} has dimension {} but the body has dimension {}",
                    m.dim(),
                    self.body.dim()
                )));
            }
            // The Hilbert metric needs every atom strictly inside the
            // body; catch that here as a config error rather than deep
            // inside a solve.
            if matches!(metric, MetricSpec::Hilbert { .. }) {
                for p in m.points() {
                    self.body.require_chord_interior(p).map_err(|e| {
                        MongeError::InvalidConfig(format!("{name}: {e}"))
                    })?;
                }
            }
        }
        Ok(ResolvedInstance {
            mu1,
            mu2,
            metric,
            adjustments,
        })
    }

    fn resolve_measure(
        &self,
        source: &MeasureSource,
        name: &str,
        base_dir: &Path,
        adjustments: &mut Vec<(String, MeasureAdjustment)>,
    ) -> Result<DiscreteMeasure> {
        match source {
            MeasureSource::File { path } => {
                let mut full = PathBuf::from(path);
                if full.is_relative() {
                    full = base_dir.join(full);
                }
                let (m, adj) = load_measure(&full)?;
                if !adj.is_clean() {
                    adjustments.push((name.to_string(), adj));
                }
                Ok(m)
            }
            MeasureSource::Grid {
                resolution,
                density,
            } => {
                let f = self.density_fn(*density);
                grid_discretize(&self.body, *resolution, f.as_deref())
            }
            MeasureSource::Sample { count, seed } => {
                sample_uniform(&self.body, *count, seed.unwrap_or(self.seed))
            }
            MeasureSource::Atoms { points, weights } => {
                let dim = self.body.dim();
                let weights = weights
                    .clone()
                    .unwrap_or_else(|| vec![1.0; points.len()]);
                let (m, adj) = DiscreteMeasure::from_data(MeasureData {
                    dim,
                    points: points.clone(),
                    weights,
                })?;
                if !adj.is_clean() {
                    adjustments.push((name.to_string(), adj));
                }
                Ok(m)
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn density_fn(&self, kind: DensityKind) -> Option<Box<dyn Fn(&[f64]) -> f64 + '_>> {
        let (lower, upper) = self.body.bounding_box();
        match kind {
            DensityKind::Uniform => None,
            DensityKind::LinearX => Some(Box::new(move |x: &[f64]| x[0] - lower[0])),
            DensityKind::Gaussian => {
                let center: Vec<f64> = lower
                    .iter()
                    .zip(&upper)
                    .map(|(&l, &u)| 0.5 * (l + u))
                    .collect();
                let diam = self.body.diameter();
                Some(Box::new(move |x: &[f64]| {
                    let r2: f64 = x
                        .iter()
                        .zip(&center)
                        .map(|(&a, &c)| (a - c) * (a - c))
                        .sum();
                    (-8.0 * r2 / (diam * diam)).exp()
                }))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;

    fn unit_interval_config(mu1: MeasureSource, mu2: MeasureSource) -> RunConfig {
        RunConfig {
            body: ConvexBody::axis_box(point(&[0.0]), point(&[1.0])).unwrap(),
            metric: MetricConfig::Euclidean,
            mu1,
            mu2,
            tolerances: Tolerances::default(),
            approx: ApproxConfig::default(),
            output_dir: default_output_dir(),
            seed: 0,
        }
    }

    #[test]
    fn full_document_parses_with_defaults() {
        let text = r#"{
            "body": {"kind": "box", "lower": [0.0, 0.0], "upper": [1.0, 1.0]},
            "mu1": {"source": "grid", "resolution": 4},
            "mu2": {"source": "atoms", "points": [[0.25, 0.5], [0.75, 0.5]]}
        }"#;
        let config: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.metric, MetricConfig::Euclidean);
        assert_eq!(config.output_dir, "out");
        assert_eq!(config.approx.epsilons.len(), 5);
        config.validate().unwrap();
        let inst = config.resolve(Path::new(".")).unwrap();
        assert_eq!(inst.mu1.len(), 16);
        assert_eq!(inst.mu2.len(), 2);
        assert!((inst.mu2.weight(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{
            "body": {"kind": "box", "lower": [0.0], "upper": [1.0]},
            "mu1": {"source": "grid", "resolution": 4},
            "mu2": {"source": "atoms", "points": [[0.5]]},
            "typo_field": 1
        }"#;
        assert!(serde_json::from_str::<RunConfig>(text).is_err());
    }

    #[test]
    fn linear_density_reproduces_the_interval_profile() {
        let config = unit_interval_config(
            MeasureSource::Grid {
                resolution: 4,
                density: DensityKind::LinearX,
            },
            MeasureSource::Atoms {
                points: vec![vec![0.5]],
                weights: None,
            },
        );
        let inst = config.resolve(Path::new(".")).unwrap();
        let expect = [1.0 / 16.0, 3.0 / 16.0, 5.0 / 16.0, 7.0 / 16.0];
        for (k, &w) in inst.mu1.weights().iter().enumerate() {
            assert!((w - expect[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_density_peaks_at_the_center() {
        let config = unit_interval_config(
            MeasureSource::Grid {
                resolution: 5,
                density: DensityKind::Gaussian,
            },
            MeasureSource::Atoms {
                points: vec![vec![0.5]],
                weights: None,
            },
        );
        let inst = config.resolve(Path::new(".")).unwrap();
        let ws = inst.mu1.weights();
        assert_eq!(ws.len(), 5);
        // Center cell (x = 0.5) carries the most mass, symmetrically.
        assert!(ws[2] > ws[1] && ws[2] > ws[3]);
        assert!((ws[0] - ws[4]).abs() < 1e-15);
    }

    #[test]
    fn sampled_sources_inherit_the_top_level_seed() {
        let mut config = unit_interval_config(
            MeasureSource::Sample {
                count: 8,
                seed: None,
            },
            MeasureSource::Atoms {
                points: vec![vec![0.5]],
                weights: None,
            },
        );
        config.seed = 31;
        let a = config.resolve(Path::new(".")).unwrap();
        let b = config.resolve(Path::new(".")).unwrap();
        assert_eq!(a.mu1, b.mu1);
        let mut other = config.clone();
        other.seed = 32;
        let c = other.resolve(Path::new(".")).unwrap();
        assert_ne!(a.mu1, c.mu1);
    }

    #[test]
    fn file_sources_resolve_against_the_base_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("m.csv"), "x1,w\n0.25,0.5\n0.75,0.5\n").unwrap();
        let config = unit_interval_config(
            MeasureSource::File {
                path: "m.csv".into(),
            },
            MeasureSource::Atoms {
                points: vec![vec![0.5]],
                weights: None,
            },
        );
        let inst = config.resolve(dir.path()).unwrap();
        assert_eq!(inst.mu1.len(), 2);
        assert!(inst.adjustments.is_empty());
        // Missing file is an input error.
        assert!(config.resolve(Path::new("/nonexistent")).is_err());
    }

    #[test]
    fn hilbert_configs_demand_interior_atoms() {
        let mut config = unit_interval_config(
            MeasureSource::Atoms {
                points: vec![vec![0.2], vec![0.8]],
                weights: None,
            },
            MeasureSource::Atoms {
                points: vec![vec![1.0]],
                weights: None,
            },
        );
        config.metric = MetricConfig::Hilbert;
        let err = config.resolve(Path::new(".")).unwrap_err();
        assert!(matches!(err, MongeError::InvalidConfig(_)));
        let msg = err.to_string();
        assert!(msg.contains("mu2"), "should name the offending measure: {msg}");
    }

    #[test]
    fn dimension_mismatches_are_config_errors() {
        let config = unit_interval_config(
            MeasureSource::Atoms {
                points: vec![vec![0.2, 0.3]],
                weights: None,
            },
            MeasureSource::Atoms {
                points: vec![vec![0.5]],
                weights: None,
            },
        );
        // mu1 atoms are 2-D but the body is 1-D: from_data rejects the
        // dim mismatch already, so resolution fails either way.
        assert!(config.resolve(Path::new(".")).is_err());
    }

    #[test]
    fn polyhedral_metric_config_resolves() {
        let text = r#"{
            "body": {"kind": "box", "lower": [-2.0, -2.0], "upper": [2.0, 2.0]},
            "metric": {"kind": "polyhedral",
                       "unit_ball": [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]},
            "mu1": {"source": "atoms", "points": [[0.0, 0.0]]},
            "mu2": {"source": "atoms", "points": [[1.0, 1.0]]}
        }"#;
        let config: RunConfig = serde_json::from_str(text).unwrap();
        let inst = config.resolve(Path::new(".")).unwrap();
        match inst.metric {
            MetricSpec::Polyhedral(_) => {}
            other => panic!("expected polyhedral metric, got {other:?}"),
        }
    }
}
