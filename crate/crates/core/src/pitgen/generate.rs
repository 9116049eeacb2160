//! Hierarchical stochastic pit generation.
//!
//! Level 1 cuts large caps from the intact surface; each deeper level cuts
//! sub-pits whose centers fall inside the footprint left by the levels before
//! it ("pits-within-pits").

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::DEFAULT_DEPTH_THRESHOLD;
use super::field::{measure_with_threshold, HeightField, LoadAxis, PitMetrics, SphericalCap};
use crate::error::{Error, Result};

/// Identifier of the random stream algorithm, recorded in run manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64, stream = sample index)";

/// Default grid spacing (μm).
pub const DEFAULT_GRID_SPACING: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountDist {
    Fixed(u32),
    Uniform { min: u32, max: u32 },
}

impl CountDist {
    fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            CountDist::Fixed(_) => Ok(()),
            CountDist::Uniform { min, max } if min <= max => Ok(()),
            CountDist::Uniform { .. } => Err("uniform count needs min <= max".into()),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        match *self {
            CountDist::Fixed(n) => n,
            CountDist::Uniform { min, max } => rng.random_range(min..=max),
        }
    }
}

/// Sphere radius distribution, parameters in μm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusDist {
    Fixed(f64),
    Uniform { min: f64, max: f64 },
    Lognormal { median: f64, sigma_log: f64 },
}

impl RadiusDist {
    fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            RadiusDist::Fixed(r) if r > 0.0 && r.is_finite() => Ok(()),
            RadiusDist::Fixed(r) => Err(format!("radius must be > 0, got {r}")),
            RadiusDist::Uniform { min, max } if min > 0.0 && max >= min && max.is_finite() => Ok(()),
            RadiusDist::Uniform { min, max } => Err(format!("uniform radius needs 0 < min <= max, got [{min}, {max}]")),
            RadiusDist::Lognormal { median, sigma_log }
                if median > 0.0 && median.is_finite() && sigma_log >= 0.0 && sigma_log.is_finite() =>
            {
                Ok(())
            }
            RadiusDist::Lognormal { median, sigma_log } => Err(format!(
                "lognormal radius needs median > 0 and sigma_log >= 0, got {median}, {sigma_log}"
            )),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            RadiusDist::Fixed(r) => r,
            RadiusDist::Uniform { min, max } if min == max => min,
            RadiusDist::Uniform { min, max } => rng.random_range(min..max),
            RadiusDist::Lognormal { median, sigma_log } => LogNormal::new(median.ln(), sigma_log)
                .expect("validated lognormal parameters")
                .sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterRule {
    /// Uniform over the patch.
    Anywhere,
    /// Uniform over the columns already pitted when the level starts.
    WithinFootprint,
    /// A fixed surface position (μm).
    Fixed { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub pit_count: CountDist,
    pub radius_dist: RadiusDist,
    pub center_rule: CenterRule,
    /// Sphere center depth as a fraction of the radius, relative to the local
    /// surface depth at the center.
    #[serde(default)]
    pub center_depth_fraction: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_DEPTH_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySpec {
    pub levels: Vec<LevelSpec>,
    /// Patch extent (Lx, Ly) in μm.
    pub patch_size: (f64, f64),
    /// Grid node counts (nx, ny).
    pub grid: (usize, usize),
    pub seed: u64,
    #[serde(default)]
    pub load_axis: LoadAxis,
    #[serde(default = "default_threshold")]
    pub depth_threshold: f64,
}

impl Default for HierarchySpec {
    /// Three-level recipe on a 4 x 4 mm patch at 20 μm spacing.
    fn default() -> Self {
        let level = |count: CountDist, median: f64, rule: CenterRule| LevelSpec {
            pit_count: count,
            radius_dist: RadiusDist::Lognormal { median, sigma_log: 0.3 },
            center_rule: rule,
            center_depth_fraction: 0.0,
        };
        Self {
            levels: vec![
                level(CountDist::Uniform { min: 2, max: 4 }, 1000.0, CenterRule::Anywhere),
                level(
                    CountDist::Uniform { min: 10, max: 20 },
                    300.0,
                    CenterRule::WithinFootprint,
                ),
                level(
                    CountDist::Uniform { min: 20, max: 40 },
                    90.0,
                    CenterRule::WithinFootprint,
                ),
            ],
            patch_size: (4000.0, 4000.0),
            grid: (201, 201),
            seed: 0,
            load_axis: LoadAxis::X,
            depth_threshold: DEFAULT_DEPTH_THRESHOLD,
        }
    }
}

impl HierarchySpec {
    pub fn spacing(&self) -> (f64, f64) {
        (
            self.patch_size.0 / (self.grid.0 as f64 - 1.0),
            self.patch_size.1 / (self.grid.1 as f64 - 1.0),
        )
    }

    /// Checks every field; errors carry the JSON path of the offending value.
    pub fn validate(&self) -> Result<()> {
        let cfg = |path: String, message: String| Error::Config { path, message };
        if self.levels.is_empty() {
            return Err(cfg("levels".into(), "at least one level is required".into()));
        }
        let (lx, ly) = self.patch_size;
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(cfg("patch_size".into(), "extents must be > 0".into()));
        }
        if self.grid.0 < 2 || self.grid.1 < 2 {
            return Err(cfg("grid".into(), "need at least 2 nodes per axis".into()));
        }
        if !(self.depth_threshold >= 0.0 && self.depth_threshold.is_finite()) {
            return Err(cfg("depth_threshold".into(), "must be >= 0".into()));
        }
        for (k, level) in self.levels.iter().enumerate() {
            level
                .pit_count
                .validate()
                .map_err(|m| cfg(format!("levels[{k}].pit_count"), m))?;
            level
                .radius_dist
                .validate()
                .map_err(|m| cfg(format!("levels[{k}].radius_dist"), m))?;
            let f = level.center_depth_fraction;
            if !(-1.0..=1.0).contains(&f) {
                return Err(cfg(
                    format!("levels[{k}].center_depth_fraction"),
                    format!("must lie in [-1, 1], got {f}"),
                ));
            }
            match level.center_rule {
                CenterRule::WithinFootprint if k == 0 => {
                    return Err(cfg(
                        format!("levels[{k}].center_rule"),
                        "the first level cuts the intact surface and can not use within_footprint".into(),
                    ))
                }
                CenterRule::Anywhere if k > 0 => {
                    return Err(cfg(
                        format!("levels[{k}].center_rule"),
                        "sub-levels must use within_footprint or fixed".into(),
                    ))
                }
                CenterRule::Fixed { x, y } if !(x.is_finite() && y.is_finite()) => {
                    return Err(cfg(
                        format!("levels[{k}].center_rule"),
                        "fixed center must be finite".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Parses and validates a JSON config.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }
}

/// A cut recorded with the level (1-based) that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapRecord {
    pub level: usize,
    pub cap: SphericalCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPit {
    pub field: HeightField,
    pub caps: Vec<CapRecord>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generates one pit from `spec.seed`.
pub fn generate_pit(spec: &HierarchySpec) -> Result<GeneratedPit> {
    spec.validate()?;
    generate_with_rng(spec, &mut stream_rng(spec.seed, 0))
}

fn generate_with_rng(spec: &HierarchySpec, rng: &mut ChaCha8Rng) -> Result<GeneratedPit> {
    let (dx, dy) = spec.spacing();
    let mut field = HeightField::flat(spec.grid.0, spec.grid.1, dx, dy)?;
    let (lx, ly) = spec.patch_size;
    let mut caps = Vec::new();

    for (k, level) in spec.levels.iter().enumerate() {
        let level_no = k + 1;
        let parent: Vec<usize> = match level.center_rule {
            CenterRule::WithinFootprint => {
                let cols: Vec<usize> = field
                    .depths()
                    .iter()
                    .enumerate()
                    .filter(|(_, &d)| d > 0.0)
                    .map(|(i, _)| i)
                    .collect();
                if cols.is_empty() {
                    return Err(Error::Generation {
                        level: level_no,
                        message: "sub-pit level needs an existing pit footprint but the surface is flat".into(),
                    });
                }
                cols
            }
            _ => Vec::new(),
        };

        let count = level.pit_count.sample(rng);
        for _ in 0..count {
            let r = level.radius_dist.sample(rng);
            let (cx, cy) = match level.center_rule {
                CenterRule::Anywhere => (rng.random_range(0.0..=lx), rng.random_range(0.0..=ly)),
                CenterRule::Fixed { x, y } => (x, y),
                CenterRule::WithinFootprint => {
                    let col = parent[rng.random_range(0..parent.len())];
                    field.coords(col % field.nx(), col / field.nx())
                }
            };
            let cz = field.depth_at(cx, cy) + level.center_depth_fraction * r;
            let cap = SphericalCap::new(cx, cy, cz, r).map_err(|e| Error::Generation {
                level: level_no,
                message: e.to_string(),
            })?;
            field.cut(&cap);
            caps.push(CapRecord { level: level_no, cap });
        }
    }
    Ok(GeneratedPit { field, caps })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; zero for a single sample.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub n_samples: u64,
    pub seed_stream: u64,
    pub d: Summary,
    pub w: Summary,
    pub l: Summary,
    pub ra: Summary,
    pub footprint_area: Summary,
    pub samples: Vec<PitMetrics>,
}

/// Metrics of sample `index` of a batch.
pub fn batch_sample(spec: &HierarchySpec, seed_stream: u64, index: u64) -> Result<GeneratedPit> {
    generate_with_rng(spec, &mut stream_rng(seed_stream, index)).map_err(|e| Error::Sample {
        sample: index,
        seed: seed_stream,
        source: Box::new(e),
    })
}

/// Monte-Carlo statistics of pit metrics over `n_samples` independent
/// streams. Samples run in parallel; results are independent of scheduling.
pub fn batch_generate(spec: &HierarchySpec, n_samples: u64, seed_stream: u64) -> Result<BatchSummary> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be >= 1"));
    }
    spec.validate()?;
    let samples: Vec<PitMetrics> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            batch_sample(spec, seed_stream, k)
                .map(|p| measure_with_threshold(&p.field, spec.load_axis, spec.depth_threshold))
        })
        .collect::<Result<_>>()?;
    let pick = |f: fn(&PitMetrics) -> f64| Summary::of(&samples.iter().map(f).collect::<Vec<_>>());
    Ok(BatchSummary {
        n_samples,
        seed_stream,
        d: pick(|m| m.d),
        w: pick(|m| m.w),
        l: pick(|m| m.l),
        ra: pick(|m| m.ra),
        footprint_area: pick(|m| m.footprint_area),
        samples,
    })
}
