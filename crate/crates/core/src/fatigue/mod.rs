//! Brown-Miller critical-plane fatigue with Morrow mean-stress correction.

mod critical_plane;
mod plane;
mod strain_life;

use serde::Serialize;

pub use critical_plane::{
    calibrate_surface_factor, critical_plane_life, life_field, AnalysisSettings, CycleDamage, DamageRule, LifeResult,
    MeanStressCorrection,
};
pub use plane::{plane_histories, PlaneHistories, PlaneOrientation, Vec3};
pub use strain_life::{
    brown_miller_constants, strain_life_basic, strain_life_nf, strain_life_nf_bracketed, BrownMillerConstants,
    LifeSolution, NF_BRACKET,
};

use crate::material::MaterialRecord;

/// Surface factor calibrated once so the intact Q235 specimen (260/26 MPa,
/// default settings) reproduces the tested life of 6.73e6 cycles.
pub const INTACT_SURFACE_FACTOR: f64 = 1.2927;

/// Tested life of the intact specimen and the accepted band (cycles).
pub const INTACT_TEST_LIFE: f64 = 6.73e6;
pub const INTACT_LIFE_BAND: (f64, f64) = (6.08e6, 7.55e6);

pub fn results_to_csv(results: &[LifeResult]) -> String {
    let mut s = String::from("location_id,Nf,log10_life,theta,phi,psi,damage_per_pass\n");
    for r in results {
        let p = r.critical_plane;
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.location_id, r.nf, r.log10_life, p.theta, p.phi, p.psi, r.damage_per_pass
        ));
    }
    s
}

#[derive(Debug, Serialize)]
pub struct LifeReport<'a> {
    pub settings: &'a AnalysisSettings,
    pub constants: BrownMillerConstants,
    pub material: &'a MaterialRecord,
    pub n_locations: usize,
    /// Worst location with its full per-cycle table.
    pub worst: &'a LifeResult,
}

pub fn report_json(
    results: &[LifeResult],
    worst: usize,
    material: &MaterialRecord,
    settings: &AnalysisSettings,
) -> crate::Result<String> {
    let report = LifeReport {
        settings,
        constants: settings.constants_for(material)?,
        material,
        n_locations: results.len(),
        worst: &results[worst],
    };
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}

/// Closed-interval check against the intact-specimen life band.
pub fn within_intact_band(nf: f64) -> bool {
    (INTACT_LIFE_BAND.0..=INTACT_LIFE_BAND.1).contains(&nf)
}
