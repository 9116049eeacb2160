//! Material constants and the monotonic / cyclic constitutive curves.
//!
//! Units throughout: stresses in MPa, strains dimensionless.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticConstants {
    pub youngs_modulus: f64,
    pub poisson_elastic: f64,
    pub poisson_plastic: f64,
}

impl ElasticConstants {
    pub fn new(youngs_modulus: f64, poisson_elastic: f64, poisson_plastic: f64) -> Result<Self> {
        let c = Self {
            youngs_modulus,
            poisson_elastic,
            poisson_plastic,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.youngs_modulus > 0.0 && self.youngs_modulus.is_finite()) {
            return Err(Error::invalid("youngs_modulus", "must be > 0"));
        }
        if !(0.0..0.5).contains(&self.poisson_elastic) {
            return Err(Error::invalid("poisson_elastic", "must satisfy 0 <= nu_e < 0.5"));
        }
        if !(self.poisson_plastic > 0.0 && self.poisson_plastic <= 0.5) {
            return Err(Error::invalid("poisson_plastic", "must satisfy 0 < nu_p <= 0.5"));
        }
        Ok(())
    }
}

/// Elastic / plateau / linear-hardening monotonic curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrilinearCurve {
    pub youngs_modulus: f64,
    pub yield_strength: f64,
    pub ultimate_strength: f64,
    pub elongation: f64,
    /// Strain where hardening towards the ultimate point starts. `None` means
    /// the yield strain (no plateau).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knee_strain: Option<f64>,
}

impl TrilinearCurve {
    pub fn new(
        youngs_modulus: f64,
        yield_strength: f64,
        ultimate_strength: f64,
        elongation: f64,
        knee_strain: Option<f64>,
    ) -> Result<Self> {
        let c = Self {
            youngs_modulus,
            yield_strength,
            ultimate_strength,
            elongation,
            knee_strain,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn yield_strain(&self) -> f64 {
        self.yield_strength / self.youngs_modulus
    }

    pub fn knee(&self) -> f64 {
        self.knee_strain.unwrap_or_else(|| self.yield_strain())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.youngs_modulus > 0.0 && self.youngs_modulus.is_finite()) {
            return Err(Error::invalid("youngs_modulus", "must be > 0"));
        }
        if !(self.yield_strength > 0.0) {
            return Err(Error::invalid("yield_strength", "must be > 0"));
        }
        if !(self.ultimate_strength > self.yield_strength && self.ultimate_strength.is_finite()) {
            return Err(Error::invalid("ultimate_strength", "must exceed yield_strength"));
        }
        let ey = self.yield_strain();
        if !(self.elongation > ey && self.elongation.is_finite()) {
            return Err(Error::invalid("elongation", "must exceed the yield strain"));
        }
        if let Some(k) = self.knee_strain {
            if !(k >= ey) {
                return Err(Error::invalid("knee_strain", "must be >= the yield strain"));
            }
            if !(k < self.elongation) {
                return Err(Error::invalid("knee_strain", "must be < elongation"));
            }
        }
        Ok(())
    }

    /// Stress on the monotonic curve at a non-negative strain.
    pub fn stress(&self, strain: f64) -> Result<f64> {
        self.validate()?;
        if !(strain >= 0.0) {
            return Err(Error::invalid("strain", "must be >= 0"));
        }
        let ey = self.yield_strain();
        let knee = self.knee();
        let s = if strain <= ey {
            self.youngs_modulus * strain
        } else if strain <= knee {
            self.yield_strength
        } else if strain < self.elongation {
            let t = (strain - knee) / (self.elongation - knee);
            self.yield_strength + t * (self.ultimate_strength - self.yield_strength)
        } else {
            self.ultimate_strength
        };
        Ok(s)
    }
}

/// Convenience wrapper matching the operation name.
pub fn trilinear_stress(curve: &TrilinearCurve, strain: f64) -> Result<f64> {
    curve.stress(strain)
}

/// Cyclic Ramberg-Osgood parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CyclicCurve {
    pub k_prime: f64,
    pub n_prime: f64,
}

impl CyclicCurve {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_prime > 0.0 && self.k_prime.is_finite()) {
            return Err(Error::invalid("k_prime", "must be > 0"));
        }
        if !(self.n_prime > 0.0 && self.n_prime < 1.0) {
            return Err(Error::invalid("n_prime", "must satisfy 0 < n' < 1"));
        }
        Ok(())
    }

    /// Strain amplitude for a stress amplitude: `s/E + (s/K')^(1/n')`.
    pub fn strain_amplitude(&self, youngs_modulus: f64, stress_amplitude: f64) -> f64 {
        stress_amplitude / youngs_modulus + (stress_amplitude / self.k_prime).powf(1.0 / self.n_prime)
    }
}

const CYCLIC_MAX_ITER: usize = 200;

/// Inverts the cyclic stress-strain relation for the stress amplitude.
///
/// Safeguarded Newton on the monotone residual, bracketed by
/// `[0, min(E*ea, K'*ea^n')]` (each term alone can not exceed the target).
pub fn cyclic_stress_amplitude(curve: &CyclicCurve, youngs_modulus: f64, strain_amplitude: f64) -> Result<f64> {
    curve.validate()?;
    if !(youngs_modulus > 0.0) {
        return Err(Error::invalid("youngs_modulus", "must be > 0"));
    }
    if !(strain_amplitude >= 0.0 && strain_amplitude.is_finite()) {
        return Err(Error::invalid("strain_amplitude", "must be finite and >= 0"));
    }
    if strain_amplitude == 0.0 {
        return Ok(0.0);
    }
    let target = strain_amplitude;
    let tol = 1e-12 + 1e-9 * target;
    let inv_n = 1.0 / curve.n_prime;
    let residual = |s: f64| curve.strain_amplitude(youngs_modulus, s) - target;

    let mut lo = 0.0_f64;
    let mut hi = (youngs_modulus * target).min(curve.k_prime * target.powf(curve.n_prime));
    // Rounding in the bracket estimate may leave hi a hair short.
    while residual(hi) < 0.0 {
        hi *= 1.0 + 1e-12;
        hi += f64::MIN_POSITIVE;
    }
    let mut s = 0.5 * (lo + hi);
    let mut r = residual(s);
    for _ in 0..CYCLIC_MAX_ITER {
        if r.abs() < tol {
            return Ok(s);
        }
        if r > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let slope = 1.0 / youngs_modulus + inv_n / curve.k_prime * (s / curve.k_prime).powf(inv_n - 1.0);
        let newton = s - r / slope;
        s = if slope.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        r = residual(s);
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    if r.abs() < tol {
        Ok(s)
    } else {
        Err(Error::Numerical {
            message: format!("cyclic stress amplitude did not converge for strain {target:e}"),
            residual: r.abs(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainLifeProps {
    pub sigma_f_prime: f64,
    pub b: f64,
    pub epsilon_f_prime: f64,
    pub c: f64,
}

impl StrainLifeProps {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_f_prime > 0.0 && self.sigma_f_prime.is_finite()) {
            return Err(Error::invalid("sigma_f_prime", "must be > 0"));
        }
        if !(self.epsilon_f_prime > 0.0 && self.epsilon_f_prime.is_finite()) {
            return Err(Error::invalid("epsilon_f_prime", "must be > 0"));
        }
        if !(self.b < 0.0) {
            return Err(Error::invalid("b", "must be < 0"));
        }
        if !(self.c < 0.0) {
            return Err(Error::invalid("c", "must be < 0"));
        }
        if !(self.c < self.b) {
            return Err(Error::invalid("c", "must be < b (plastic line steeper than elastic)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialRecord {
    pub name: String,
    /// Chemical composition in wt%. Metadata only.
    #[serde(default)]
    pub composition: BTreeMap<String, f64>,
    pub elastic: ElasticConstants,
    pub monotonic: TrilinearCurve,
    pub cyclic: CyclicCurve,
    pub strain_life: StrainLifeProps,
}

impl MaterialRecord {
    /// Q235 structural steel.
    pub fn q235() -> Self {
        let composition = [
            ("C", 0.2),
            ("Si", 0.35),
            ("Mn", 1.4),
            ("P", 0.045),
            ("S", 0.045),
            ("Cr", 0.3),
            ("Ni", 0.3),
            ("Cu", 0.3),
            ("N", 0.008),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            name: "Q235".to_string(),
            composition,
            elastic: ElasticConstants {
                youngs_modulus: 198_000.0,
                poisson_elastic: 0.3,
                poisson_plastic: 0.5,
            },
            monotonic: TrilinearCurve {
                youngs_modulus: 198_000.0,
                yield_strength: 312.3,
                ultimate_strength: 458.0,
                elongation: 0.382,
                knee_strain: None,
            },
            cyclic: CyclicCurve {
                k_prime: 895.0,
                n_prime: 0.125,
            },
            strain_life: StrainLifeProps {
                sigma_f_prime: 1010.0,
                b: -0.1113,
                epsilon_f_prime: 2.63,
                c: -0.89,
            },
        }
    }

    /// Looks up a built-in record by name.
    pub fn builtin(name: &str) -> Option<Self> {
        name.eq_ignore_ascii_case("q235").then(Self::q235)
    }

    pub fn youngs_modulus(&self) -> f64 {
        self.elastic.youngs_modulus
    }

    pub fn validate(&self) -> Result<()> {
        let tag = |prefix: &'static str| {
            move |e: Error| match e {
                Error::Invalid { field, message } => Error::Invalid {
                    field: format!("{prefix}.{field}"),
                    message,
                },
                other => other,
            }
        };
        self.elastic.validate().map_err(tag("elastic"))?;
        self.monotonic.validate().map_err(tag("monotonic"))?;
        self.cyclic.validate().map_err(tag("cyclic"))?;
        self.strain_life.validate().map_err(tag("strain_life"))?;
        Ok(())
    }

    /// Parses and validates a JSON material document.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let record: Self = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        record.validate()?;
        Ok(record)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("material serializes")
    }
}
