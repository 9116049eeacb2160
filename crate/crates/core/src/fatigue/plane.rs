//! Material-plane orientations and the strain/stress resolved on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::StrainHistory;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Plane normal `(theta, phi)` in spherical angles (degrees, theta from +z,
/// phi from +x in the x-y plane) and in-plane shear direction `psi`
/// measured from the theta tangent towards the phi tangent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneOrientation {
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
}

impl PlaneOrientation {
    pub fn new(theta: f64, phi: f64, psi: f64) -> Self {
        Self { theta, phi, psi }
    }

    pub fn normal(&self) -> Vec3 {
        let (st, ct) = self.theta.to_radians().sin_cos();
        let (sp, cp) = self.phi.to_radians().sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn shear_direction(&self) -> Vec3 {
        let (st, ct) = self.theta.to_radians().sin_cos();
        let (sp, cp) = self.phi.to_radians().sin_cos();
        let (ss, cs) = self.psi.to_radians().sin_cos();
        let e_theta = [ct * cp, ct * sp, -st];
        let e_phi = [-sp, cp, 0.0];
        [
            cs * e_theta[0] + ss * e_phi[0],
            cs * e_theta[1] + ss * e_phi[1],
            cs * e_theta[2] + ss * e_phi[2],
        ]
    }

    /// Angle in degrees between the plane normal and `axis` (0..=90).
    pub fn normal_angle_to(&self, axis: Vec3) -> f64 {
        let c = dot(self.normal(), axis).abs() / dot(axis, axis).sqrt();
        c.min(1.0).acos().to_degrees()
    }
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn quad(m: &Mat3, a: Vec3, b: Vec3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i] * m[i][j] * b[j];
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlaneHistories {
    /// Engineering shear strain along the shear direction.
    pub gamma: Vec<f64>,
    pub eps_n: Vec<f64>,
    pub sigma_n: Vec<f64>,
}

pub(crate) fn check_frame(n: Vec3, u: Vec3) -> Result<()> {
    let tol = 1e-10;
    if (dot(n, n).sqrt() - 1.0).abs() > tol || (dot(u, u).sqrt() - 1.0).abs() > tol {
        return Err(Error::Geometry(
            "plane normal and shear direction must be unit vectors".into(),
        ));
    }
    if dot(n, u).abs() > tol {
        return Err(Error::Geometry(
            "shear direction must lie in the plane (n . u = 0)".into(),
        ));
    }
    Ok(())
}

/// Resolves a history onto the plane with normal `n` and shear direction `u`:
/// `eps_n = n'εn`, `gamma = 2 u'εn`, `sigma_n = n'σn`, with ε the tensor
/// strain.
pub fn plane_histories(history: &StrainHistory, n: Vec3, u: Vec3) -> Result<PlaneHistories> {
    check_frame(n, u)?;
    let mut out = PlaneHistories::default();
    for s in &history.samples {
        let e = s.strain_matrix();
        out.eps_n.push(quad(&e, n, n));
        out.gamma.push(2.0 * quad(&e, u, n));
        out.sigma_n.push(quad(&s.stress_matrix(), n, n));
    }
    Ok(out)
}
