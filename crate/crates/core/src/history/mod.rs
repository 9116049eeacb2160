//! Stress/strain tensor histories per location.
//!
//! Shear strains are ENGINEERING values (γ = 2·ε_ij) everywhere: in the CSV
//! schema, in [`TensorSample`] and in everything derived from it.

mod rainflow;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::MaterialRecord;

pub use rainflow::{peak_valley, rainflow, rainflow_cycles, RainflowCycle};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TensorSample {
    /// (εxx, εyy, εzz, γxy, γxz, γyz)
    pub strain: [f64; 6],
    /// (σxx, σyy, σzz, τxy, τxz, τyz) in MPa
    pub stress: [f64; 6],
}

impl TensorSample {
    /// Symmetric tensor strain matrix (shear terms are γ/2).
    pub fn strain_matrix(&self) -> [[f64; 3]; 3] {
        let [xx, yy, zz, gxy, gxz, gyz] = self.strain;
        [
            [xx, gxy / 2.0, gxz / 2.0],
            [gxy / 2.0, yy, gyz / 2.0],
            [gxz / 2.0, gyz / 2.0, zz],
        ]
    }

    pub fn stress_matrix(&self) -> [[f64; 3]; 3] {
        let [xx, yy, zz, xy, xz, yz] = self.stress;
        [[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            strain: self.strain.map(|v| v * k),
            stress: self.stress.map(|v| v * k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrainHistory {
    pub location_id: String,
    pub samples: Vec<TensorSample>,
    /// Load cycles represented by one pass through `samples`.
    pub repeat_count: f64,
}

impl StrainHistory {
    pub fn new(location_id: impl Into<String>, samples: Vec<TensorSample>) -> Result<Self> {
        let h = Self {
            location_id: location_id.into(),
            samples,
            repeat_count: 1.0,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn with_repeat_count(mut self, repeat_count: f64) -> Result<Self> {
        self.repeat_count = repeat_count;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::invalid(
                format!("history {}", self.location_id),
                "needs at least 2 samples",
            ));
        }
        if !(self.repeat_count > 0.0 && self.repeat_count.is_finite()) {
            return Err(Error::invalid("repeat_count", "must be > 0"));
        }
        let finite = self
            .samples
            .iter()
            .all(|s| s.strain.iter().chain(&s.stress).all(|v| v.is_finite()));
        if !finite {
            return Err(Error::invalid(
                format!("history {}", self.location_id),
                "all tensor components must be finite",
            ));
        }
        Ok(())
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            location_id: self.location_id.clone(),
            samples: self.samples.iter().map(|s| s.scaled(k)).collect(),
            repeat_count: self.repeat_count,
        }
    }
}

pub const CSV_COLUMNS: [&str; 14] = [
    "location_id",
    "step",
    "exx",
    "eyy",
    "ezz",
    "gxy",
    "gxz",
    "gyz",
    "sxx",
    "syy",
    "szz",
    "txy",
    "txz",
    "tyz",
];

/// Parses the history CSV. Rows are grouped by `location_id` (output sorted
/// by id) and ordered by integer `step`. Row numbers in errors are 1-based
/// file lines, the header being line 1.
pub fn parse_history_csv(bytes: &[u8]) -> Result<Vec<StrainHistory>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader.headers().map_err(|e| Error::Parse {
        row: 1,
        message: e.to_string(),
    })?;
    let mut col = [0usize; 14];
    for (k, name) in CSV_COLUMNS.iter().enumerate() {
        col[k] = headers.iter().position(|h| h == *name).ok_or_else(|| Error::Parse {
            row: 1,
            message: format!("missing column {name:?}"),
        })?;
    }

    let mut groups: BTreeMap<String, BTreeMap<i64, (usize, TensorSample)>> = BTreeMap::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        let cell = |c: usize| record.get(col[c]).unwrap_or("");
        let location = cell(0).to_string();
        if location.is_empty() {
            return Err(Error::Parse {
                row,
                message: "empty location_id".into(),
            });
        }
        let step: i64 = cell(1).parse().map_err(|_| Error::Parse {
            row,
            message: format!("non-integer step {:?}", cell(1)),
        })?;
        let mut vals = [0.0; 12];
        for (j, v) in vals.iter_mut().enumerate() {
            let text = cell(j + 2);
            *v = text
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    message: format!("non-numeric {} value {text:?}", CSV_COLUMNS[j + 2]),
                })?;
        }
        let sample = TensorSample {
            strain: vals[..6].try_into().unwrap(),
            stress: vals[6..].try_into().unwrap(),
        };
        let steps = groups.entry(location.clone()).or_default();
        if let Some((first, _)) = steps.get(&step) {
            return Err(Error::Parse {
                row,
                message: format!("duplicate (location {location}, step {step}), first seen at row {first}"),
            });
        }
        steps.insert(step, (row, sample));
    }

    groups
        .into_iter()
        .map(|(id, steps)| {
            let samples = steps.into_values().map(|(_, s)| s).collect();
            StrainHistory::new(id, samples)
        })
        .collect()
}

/// Serializes histories in the CSV schema; steps are sample indices.
pub fn history_to_csv(histories: &[StrainHistory]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for h in histories {
        for (step, s) in h.samples.iter().enumerate() {
            out.push_str(&h.location_id);
            out.push_str(&format!(",{step}"));
            for v in s.strain.iter().chain(&s.stress) {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
    }
    out
}

/// Elastic uniaxial triangle-wave history along x.
///
/// Each cycle starts at `sigma_min`, peaks at `sigma_max` half-way and returns.
/// `points_per_cycle` must be even so the peak is sampled exactly.
pub fn uniaxial_history(
    sigma_max: f64,
    sigma_min: f64,
    material: &MaterialRecord,
    points_per_cycle: usize,
    n_cycles: usize,
) -> Result<StrainHistory> {
    if !(sigma_max >= sigma_min) || !sigma_max.is_finite() || !sigma_min.is_finite() {
        return Err(Error::invalid("sigma_max", "must be finite and >= sigma_min"));
    }
    let sy = material.monotonic.yield_strength;
    if sigma_max.abs() > sy || sigma_min.abs() > sy {
        return Err(Error::Unsupported(format!(
            "uniaxial driver is elastic only; |stress| must not exceed the yield strength {sy} MPa"
        )));
    }
    if points_per_cycle < 2 || !points_per_cycle.is_multiple_of(2) {
        return Err(Error::invalid("points_per_cycle", "must be even and >= 2"));
    }
    if n_cycles == 0 {
        return Err(Error::invalid("n_cycles", "must be >= 1"));
    }
    let e = material.elastic.youngs_modulus;
    let nu = material.elastic.poisson_elastic;
    let half = points_per_cycle / 2;
    let samples = (0..=points_per_cycle * n_cycles)
        .map(|k| {
            let p = k % points_per_cycle;
            let rising = p.min(points_per_cycle - p) as f64 / half as f64;
            let s = if p == half {
                sigma_max
            } else if p == 0 {
                sigma_min
            } else {
                sigma_min + rising * (sigma_max - sigma_min)
            };
            let exx = s / e;
            TensorSample {
                strain: [exx, -nu * exx, -nu * exx, 0.0, 0.0, 0.0],
                stress: [s, 0.0, 0.0, 0.0, 0.0, 0.0],
            }
        })
        .collect();
    StrainHistory::new("uniaxial", samples)?.with_repeat_count(n_cycles as f64)
}
