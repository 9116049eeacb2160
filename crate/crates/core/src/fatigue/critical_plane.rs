//! Critical-plane search and per-location life.
//!
//! The critical plane is the plane of maximum shear strain range. The grid
//! of `(theta, phi, psi)` is scanned first; the best grid planes are then
//! polished by a compass search on the shear range, and the Brown-Miller
//! damage is evaluated on the resulting plane(s). When several planes share
//! the maximum shear range the most damaging one wins, and remaining ties go
//! to the lexicographically smallest grid point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plane::{quad, Mat3, PlaneOrientation};
use super::strain_life::{brown_miller_constants, strain_life_nf_bracketed, BrownMillerConstants, NF_BRACKET};
use crate::error::{Error, Result};
use crate::history::{rainflow, StrainHistory};
use crate::material::MaterialRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MeanStressCorrection {
    #[default]
    Morrow,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DamageRule {
    /// Linear damage sum with half-cycle weights.
    #[default]
    Miner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisSettings {
    /// Grid step for theta and phi (degrees).
    pub plane_step: f64,
    /// Grid step for the in-plane shear direction (degrees).
    pub psi_step: f64,
    /// Surface finish factor on the strain amplitude, >= 1.
    pub surface_factor: f64,
    pub mean_stress_correction: MeanStressCorrection,
    pub damage_rule: DamageRule,
    pub nf_bracket: (f64, f64),
    /// Polish the best grid planes by local search.
    pub refine: bool,
    /// Smallest refinement step (degrees).
    pub refine_tol: f64,
    /// Overrides the constants derived from the material Poisson ratios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<BrownMillerConstants>,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            plane_step: 10.0,
            psi_step: 10.0,
            surface_factor: 1.0,
            mean_stress_correction: MeanStressCorrection::Morrow,
            damage_rule: DamageRule::Miner,
            nf_bracket: NF_BRACKET,
            refine: true,
            refine_tol: 1e-7,
            constants: None,
        }
    }
}

fn divides_180(step: f64) -> bool {
    step > 0.0 && step <= 180.0 && {
        let n = (180.0 / step).round();
        (n * step - 180.0).abs() < 1e-9
    }
}

impl AnalysisSettings {
    pub fn validate(&self) -> Result<()> {
        if !divides_180(self.plane_step) {
            return Err(Error::invalid("plane_step", "must be > 0 and divide 180"));
        }
        if !divides_180(self.psi_step) {
            return Err(Error::invalid("psi_step", "must be > 0 and divide 180"));
        }
        if !(self.surface_factor >= 1.0 && self.surface_factor.is_finite()) {
            return Err(Error::invalid("surface_factor", "must be >= 1"));
        }
        let (lo, hi) = self.nf_bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::invalid("nf_bracket", "needs 0 < min < max"));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::invalid("refine_tol", "must be > 0"));
        }
        if let Some(c) = &self.constants {
            c.validate()?;
        }
        Ok(())
    }

    pub fn constants_for(&self, material: &MaterialRecord) -> Result<BrownMillerConstants> {
        match self.constants {
            Some(c) => Ok(c),
            None => brown_miller_constants(material.elastic.poisson_elastic, material.elastic.poisson_plastic),
        }
    }
}

/// Damage bookkeeping for one rainflow cycle of the shear strain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleDamage {
    pub delta_gamma: f64,
    pub delta_eps_n: f64,
    pub sigma_n_mean: f64,
    pub weight: f64,
    pub nf: f64,
    pub run_out: bool,
    pub damage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeResult {
    pub location_id: String,
    /// Cycles to crack initiation; the upper bracket when `run_out`.
    pub nf: f64,
    pub log10_life: f64,
    pub run_out: bool,
    pub critical_plane: PlaneOrientation,
    /// Shear strain range on the critical plane.
    pub delta_gamma_max: f64,
    pub damage_per_pass: f64,
    pub cycle_table: Vec<CycleDamage>,
}

/// Per-sample tensors, pre-extracted for the inner loops.
struct Tensors {
    strain: Vec<Mat3>,
    stress: Vec<Mat3>,
}

impl Tensors {
    fn new(history: &StrainHistory) -> Self {
        Self {
            strain: history.samples.iter().map(|s| s.strain_matrix()).collect(),
            stress: history.samples.iter().map(|s| s.stress_matrix()).collect(),
        }
    }

    fn shear_range(&self, o: &PlaneOrientation) -> f64 {
        let (n, u) = (o.normal(), o.shear_direction());
        let (lo, hi) = self
            .strain
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                let g = 2.0 * quad(e, u, n);
                (lo.min(g), hi.max(g))
            });
        hi - lo
    }
}

fn grid(settings: &AnalysisSettings) -> Vec<PlaneOrientation> {
    let n_theta = (90.0 / settings.plane_step).floor() as usize;
    let n_phi = (360.0 / settings.plane_step).round() as usize;
    let n_psi = (180.0 / settings.psi_step).round() as usize;
    let mut out = Vec::new();
    for it in 0..=n_theta {
        let theta = it as f64 * settings.plane_step;
        // At the pole every phi gives the same normal; psi spans the plane.
        let phis = if it == 0 { 1 } else { n_phi };
        for ip in 0..phis {
            for is in 0..n_psi {
                out.push(PlaneOrientation::new(
                    theta,
                    ip as f64 * settings.plane_step,
                    is as f64 * settings.psi_step,
                ));
            }
        }
    }
    out
}

/// Compass search maximizing the shear range. Deterministic: moves only on
/// strict improvement, trying directions in a fixed order.
fn refine(t: &Tensors, start: PlaneOrientation, value: f64, settings: &AnalysisSettings) -> (PlaneOrientation, f64) {
    let (mut best, mut best_val) = (start, value);
    let mut step = 0.5 * settings.plane_step.max(settings.psi_step);
    while step >= settings.refine_tol {
        let mut moved = false;
        for (dt, dp, ds) in [
            (1.0, 0.0, 0.0),
            (-1.0, 0.0, 0.0),
            (0.0, 1.0, 0.0),
            (0.0, -1.0, 0.0),
            (0.0, 0.0, 1.0),
            (0.0, 0.0, -1.0),
        ] {
            let trial = PlaneOrientation::new(best.theta + dt * step, best.phi + dp * step, best.psi + ds * step);
            let v = t.shear_range(&trial);
            if v > best_val {
                best = trial;
                best_val = v;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (best, best_val)
}

struct PlaneDamage {
    damage: f64,
    cycles: Vec<CycleDamage>,
}

fn plane_damage(
    t: &Tensors,
    o: &PlaneOrientation,
    material: &MaterialRecord,
    consts: &BrownMillerConstants,
    settings: &AnalysisSettings,
) -> Result<PlaneDamage> {
    let (n, u) = (o.normal(), o.shear_direction());
    let gamma: Vec<f64> = t.strain.iter().map(|e| 2.0 * quad(e, u, n)).collect();
    let eps_n: Vec<f64> = t.strain.iter().map(|e| quad(e, n, n)).collect();
    let sigma_n: Vec<f64> = t.stress.iter().map(|s| quad(s, n, n)).collect();
    let mut damage = 0.0;
    let mut cycles = Vec::new();
    for c in rainflow(&gamma, &[&eps_n, &sigma_n])? {
        let delta_eps_n = c.companion_ranges[0];
        let sigma_n_mean = match settings.mean_stress_correction {
            MeanStressCorrection::Morrow => c.companion_means[1],
            MeanStressCorrection::None => 0.0,
        };
        let lhs = c.range / 2.0 + delta_eps_n / 2.0;
        let sol = strain_life_nf_bracketed(
            lhs,
            sigma_n_mean,
            &material.strain_life,
            material.elastic.youngs_modulus,
            consts,
            settings.surface_factor,
            settings.nf_bracket,
        )?;
        let d = if sol.run_out { 0.0 } else { c.weight / sol.nf };
        damage += d;
        cycles.push(CycleDamage {
            delta_gamma: c.range,
            delta_eps_n,
            sigma_n_mean,
            weight: c.weight,
            nf: sol.nf,
            run_out: sol.run_out,
            damage: d,
        });
    }
    Ok(PlaneDamage { damage, cycles })
}

/// Relative tolerance under which two shear ranges count as equal.
const SHEAR_TIE: f64 = 1e-9;

/// Crack-initiation life of one location on its critical plane.
pub fn critical_plane_life(
    history: &StrainHistory,
    material: &MaterialRecord,
    settings: &AnalysisSettings,
) -> Result<LifeResult> {
    history.validate()?;
    material.validate()?;
    settings.validate()?;
    let consts = settings.constants_for(material)?;
    let t = Tensors::new(history);

    let planes = grid(settings);
    let ranges: Vec<f64> = planes.par_iter().map(|o| t.shear_range(o)).collect();
    let coarse_max = ranges.iter().copied().fold(0.0, f64::max);
    let tied = |v: f64, max: f64| v >= max - SHEAR_TIE * max;

    let mut candidates: Vec<(PlaneOrientation, f64)> = planes
        .iter()
        .zip(&ranges)
        .filter(|(_, &v)| tied(v, coarse_max))
        .map(|(o, &v)| (*o, v))
        .collect();
    if settings.refine && coarse_max > 0.0 {
        candidates = candidates
            .par_iter()
            .map(|&(o, v)| refine(&t, o, v, settings))
            .collect();
        let best = candidates.iter().map(|c| c.1).fold(0.0, f64::max);
        candidates.retain(|c| tied(c.1, best));
    }

    let evaluated: Vec<(PlaneOrientation, f64, PlaneDamage)> = candidates
        .par_iter()
        .map(|&(o, v)| plane_damage(&t, &o, material, &consts, settings).map(|d| (o, v, d)))
        .collect::<Result<_>>()?;
    // Candidates are in grid order, so strict `>` keeps the smallest on ties.
    let mut best = 0;
    for (k, e) in evaluated.iter().enumerate() {
        if e.2.damage > evaluated[best].2.damage {
            best = k;
        }
    }
    let (plane, delta_gamma_max, pd) = evaluated.into_iter().nth(best).expect("grid is non-empty");

    let (nf, run_out) = if pd.damage > 0.0 {
        let nf = history.repeat_count / pd.damage;
        if nf >= settings.nf_bracket.1 {
            (settings.nf_bracket.1, true)
        } else {
            (nf, false)
        }
    } else {
        (settings.nf_bracket.1, true)
    };
    Ok(LifeResult {
        location_id: history.location_id.clone(),
        nf,
        log10_life: nf.log10(),
        run_out,
        critical_plane: plane,
        delta_gamma_max,
        damage_per_pass: pd.damage,
        cycle_table: pd.cycles,
    })
}

/// Lives of many locations plus the index of the worst (shortest-lived) one.
/// Ties go to the earlier location.
pub fn life_field(
    histories: &[StrainHistory],
    material: &MaterialRecord,
    settings: &AnalysisSettings,
) -> Result<(Vec<LifeResult>, usize)> {
    if histories.is_empty() {
        return Err(Error::invalid("histories", "need at least one location"));
    }
    let results: Vec<LifeResult> = histories
        .par_iter()
        .map(|h| critical_plane_life(h, material, settings))
        .collect::<Result<_>>()?;
    let mut worst = 0;
    for (k, r) in results.iter().enumerate() {
        if r.nf < results[worst].nf {
            worst = k;
        }
    }
    Ok((results, worst))
}

/// Surface factor that makes the pipeline life equal `target_nf`, found by
/// bisection on `log(Ksur)` over `[1, max_factor]`.
pub fn calibrate_surface_factor(
    history: &StrainHistory,
    material: &MaterialRecord,
    settings: &AnalysisSettings,
    target_nf: f64,
    max_factor: f64,
) -> Result<f64> {
    let life = |k: f64| -> Result<f64> {
        let s = AnalysisSettings {
            surface_factor: k,
            ..*settings
        };
        Ok(critical_plane_life(history, material, &s)?.nf)
    };
    let (mut lo, mut hi) = (1.0_f64, max_factor);
    if life(lo)? < target_nf {
        return Err(Error::invalid("target_nf", "already exceeded with Ksur = 1"));
    }
    if life(hi)? > target_nf {
        return Err(Error::invalid(
            "target_nf",
            format!("not reached with Ksur = {max_factor}"),
        ));
    }
    for _ in 0..100 {
        let mid = (lo * hi).sqrt();
        if life(mid)? > target_nf {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-10 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}
