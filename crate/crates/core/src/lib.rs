//! Corrosion-fatigue toolkit: stochastic pitting-corrosion geometry and
//! multiaxial crack-initiation life from strain histories.
//!
//! * [`pitgen`] builds irregular pits by hierarchical spherical-cap cutting
//!   on a heightfield, measures them and builds ellipsoidal counterparts.
//! * [`meshio`] turns heightfields into STL meshes.
//! * [`history`] ingests or synthesizes tensor histories and counts cycles.
//! * [`fatigue`] runs the Brown-Miller critical-plane life analysis.
//!
//! Units: stresses in MPa, strains dimensionless, lengths in μm.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fatigue;
pub mod history;
pub mod material;
pub mod meshio;
pub mod pitgen;

pub use error::{Error, Result};
pub use material::MaterialRecord;
