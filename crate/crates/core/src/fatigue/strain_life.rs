//! Strain-life relation, Brown-Miller constants and the Morrow-corrected
//! Brown-Miller life equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::StrainLifeProps;

/// Default life bracket (cycles). The upper end doubles as the run-out sentinel.
pub const NF_BRACKET: (f64, f64) = (0.25, 1e12);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownMillerConstants {
    pub c1: f64,
    pub c2: f64,
}

impl BrownMillerConstants {
    /// Constants that reduce the combined criterion to the plain strain-life
    /// equation.
    pub const UNIT: Self = Self { c1: 1.0, c2: 1.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c1.is_finite() && self.c2.is_finite()) {
            return Err(Error::invalid("brown_miller_constants", "C1 and C2 must be > 0"));
        }
        Ok(())
    }
}

/// Brown-Miller constants from the elastic and plastic Poisson ratios.
///
/// Under uniaxial stress the principal strains are `e1` and `-nu*e1`; the
/// maximum engineering shear is `(1 + nu) e1` and the normal strain on its
/// plane is `(1 - nu) e1 / 2`, so the left-hand side picks up a factor
/// `(1 + nu) + (1 - nu) / 2` on each term of the strain-life curve.
pub fn brown_miller_constants(nu_elastic: f64, nu_plastic: f64) -> Result<BrownMillerConstants> {
    if !(0.0..0.5).contains(&nu_elastic) {
        return Err(Error::invalid("poisson_elastic", "must satisfy 0 <= nu_e < 0.5"));
    }
    if !(nu_plastic > 0.0 && nu_plastic <= 0.5) {
        return Err(Error::invalid("poisson_plastic", "must satisfy 0 < nu_p <= 0.5"));
    }
    let factor = |nu: f64| (1.0 + nu) + (1.0 - nu) / 2.0;
    Ok(BrownMillerConstants {
        c1: factor(nu_elastic),
        c2: factor(nu_plastic),
    })
}

/// Life in cycles; `run_out` marks lives beyond the upper bracket, reported
/// as the bracket maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifeSolution {
    pub nf: f64,
    pub run_out: bool,
}

/// Right-hand side of the combined criterion at `2Nf = exp(x)`.
#[derive(Debug, Clone, Copy)]
struct LifeCurve {
    elastic: f64,
    plastic: f64,
    b: f64,
    c: f64,
}

impl LifeCurve {
    fn eval(&self, x: f64) -> f64 {
        self.elastic * (self.b * x).exp() + self.plastic * (self.c * x).exp()
    }

    fn slope(&self, x: f64) -> f64 {
        self.elastic * self.b * (self.b * x).exp() + self.plastic * self.c * (self.c * x).exp()
    }
}

const MAX_ITER: usize = 200;

/// Solves `Ksur·lhs = C1 (σ'f - σm)/E (2Nf)^b + C2 ε'f (2Nf)^c` for Nf with
/// the default bracket.
pub fn strain_life_nf(
    lhs_amplitude: f64,
    sigma_n_mean: f64,
    props: &StrainLifeProps,
    youngs_modulus: f64,
    consts: &BrownMillerConstants,
    surface_factor: f64,
) -> Result<LifeSolution> {
    strain_life_nf_bracketed(
        lhs_amplitude,
        sigma_n_mean,
        props,
        youngs_modulus,
        consts,
        surface_factor,
        NF_BRACKET,
    )
}

/// As [`strain_life_nf`] with an explicit life bracket in cycles.
///
/// The right side is strictly decreasing in `ln(2Nf)`; the root is found by
/// Newton iteration safeguarded by bisection in that variable.
pub fn strain_life_nf_bracketed(
    lhs_amplitude: f64,
    sigma_n_mean: f64,
    props: &StrainLifeProps,
    youngs_modulus: f64,
    consts: &BrownMillerConstants,
    surface_factor: f64,
    bracket: (f64, f64),
) -> Result<LifeSolution> {
    props.validate()?;
    consts.validate()?;
    if !(lhs_amplitude >= 0.0 && lhs_amplitude.is_finite()) {
        return Err(Error::invalid("lhs_amplitude", "must be finite and >= 0"));
    }
    if !(surface_factor >= 1.0 && surface_factor.is_finite()) {
        return Err(Error::invalid("surface_factor", "must be >= 1"));
    }
    if !(youngs_modulus > 0.0) {
        return Err(Error::invalid("youngs_modulus", "must be > 0"));
    }
    if !(bracket.0 > 0.0 && bracket.1 > bracket.0) {
        return Err(Error::invalid("nf_bracket", "needs 0 < min < max"));
    }
    if !sigma_n_mean.is_finite() || sigma_n_mean >= props.sigma_f_prime {
        return Err(Error::MorrowDomain {
            mean: sigma_n_mean,
            sigma_f: props.sigma_f_prime,
        });
    }
    let run_out = LifeSolution {
        nf: bracket.1,
        run_out: true,
    };
    let target = surface_factor * lhs_amplitude;
    if target == 0.0 {
        return Ok(run_out);
    }
    let curve = LifeCurve {
        elastic: consts.c1 * (props.sigma_f_prime - sigma_n_mean) / youngs_modulus,
        plastic: consts.c2 * props.epsilon_f_prime,
        b: props.b,
        c: props.c,
    };
    let g = |x: f64| curve.eval(x) - target;
    let (mut lo, mut hi) = ((2.0 * bracket.0).ln(), (2.0 * bracket.1).ln());
    if g(hi) >= 0.0 {
        return Ok(run_out);
    }
    let g_lo = g(lo);
    if g_lo < 0.0 {
        return Err(Error::Numerical {
            message: format!(
                "strain amplitude {target:e} exceeds the life curve at the lower bracket of {} cycles",
                bracket.0
            ),
            residual: -g_lo,
        });
    }
    if g_lo == 0.0 {
        return Ok(LifeSolution {
            nf: bracket.0,
            run_out: false,
        });
    }

    let tol = 1e-12 * target.max(1.0);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let r = g(x);
        if r == 0.0 {
            break;
        }
        if r > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - r / curve.slope(x);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let converged = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0);
        x = next;
        if converged || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    let residual = g(x).abs();
    if residual >= tol {
        return Err(Error::Numerical {
            message: "strain-life solve did not converge".into(),
            residual,
        });
    }
    Ok(LifeSolution {
        nf: 0.5 * x.exp(),
        run_out: false,
    })
}

/// Plain strain-life equation: `amplitude = σ'f/E (2Nf)^b + ε'f (2Nf)^c`.
pub fn strain_life_basic(amplitude: f64, props: &StrainLifeProps, youngs_modulus: f64) -> Result<LifeSolution> {
    strain_life_nf(amplitude, 0.0, props, youngs_modulus, &BrownMillerConstants::UNIT, 1.0)
}
