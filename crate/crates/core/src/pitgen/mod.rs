//! Stochastic pit morphology: heightfield cutting, hierarchical generation,
//! measurement and ellipsoidal idealization.

mod field;
mod generate;
pub mod io;

pub use field::{
    cut_cap, ellipsoid_field, measure, measure_with_threshold, HeightField, LoadAxis, PitMetrics, SphericalCap,
    DEFAULT_DEPTH_THRESHOLD,
};
pub use generate::{
    batch_generate, batch_sample, generate_pit, BatchSummary, CapRecord, CenterRule, CountDist, GeneratedPit,
    HierarchySpec, LevelSpec, RadiusDist, Summary, DEFAULT_GRID_SPACING, RNG_ALGORITHM,
};
