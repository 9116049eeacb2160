//! Heightfield surface representation, the spherical-cap cutting primitive,
//! the ellipsoidal idealization and pit measurement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-valued depth map over a rectangular patch. Depth is measured
/// downward (μm) from the intact surface plane. Storage is row-major with
/// rows along y: `depth[j * nx + i]` is the column at `(i*dx, j*dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    depth: Vec<f64>,
}

impl HeightField {
    pub fn flat(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        Self::from_depths(nx, ny, dx, dy, vec![0.0; nx.saturating_mul(ny)])
    }

    pub fn from_depths(nx: usize, ny: usize, dx: f64, dy: f64, depth: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Dimension(format!("grid must be at least 2x2, got {nx}x{ny}")));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::Dimension(format!("grid spacing must be > 0, got {dx} x {dy}")));
        }
        if depth.len() != nx * ny {
            return Err(Error::Dimension(format!(
                "expected {} depth values, got {}",
                nx * ny,
                depth.len()
            )));
        }
        if let Some(bad) = depth.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid(
                "depth",
                format!("value {} at index {bad} must be finite and >= 0", depth[bad]),
            ));
        }
        Ok(Self { nx, ny, dx, dy, depth })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn depths(&self) -> &[f64] {
        &self.depth
    }

    pub fn len_x(&self) -> f64 {
        (self.nx - 1) as f64 * self.dx
    }

    pub fn len_y(&self) -> f64 {
        (self.ny - 1) as f64 * self.dy
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.depth[self.index(i, j)]
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx, j as f64 * self.dy)
    }

    pub fn max_depth(&self) -> f64 {
        self.depth.iter().copied().fold(0.0, f64::max)
    }

    /// Bilinear interpolation of the depth, clamped to the patch.
    pub fn depth_at(&self, x: f64, y: f64) -> f64 {
        let fx = (x / self.dx).clamp(0.0, (self.nx - 1) as f64);
        let fy = (y / self.dy).clamp(0.0, (self.ny - 1) as f64);
        let i0 = (fx.floor() as usize).min(self.nx - 2);
        let j0 = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let d00 = self.at(i0, j0);
        let d10 = self.at(i0 + 1, j0);
        let d01 = self.at(i0, j0 + 1);
        let d11 = self.at(i0 + 1, j0 + 1);
        (1.0 - ty) * ((1.0 - tx) * d00 + tx * d10) + ty * ((1.0 - tx) * d01 + tx * d11)
    }

    /// Cuts a spherical cap in place. See [`cut_cap`].
    pub fn cut(&mut self, cap: &SphericalCap) {
        let r = cap.r;
        let r2 = r * r;
        let i_lo = ((cap.cx - r) / self.dx).floor().max(0.0) as usize;
        let i_hi = (((cap.cx + r) / self.dx).ceil().max(0.0) as usize).min(self.nx - 1);
        let j_lo = ((cap.cy - r) / self.dy).floor().max(0.0) as usize;
        let j_hi = (((cap.cy + r) / self.dy).ceil().max(0.0) as usize).min(self.ny - 1);
        if i_lo > i_hi || j_lo > j_hi {
            return;
        }
        for j in j_lo..=j_hi {
            for i in i_lo..=i_hi {
                let (x, y) = self.coords(i, j);
                let rho2 = (x - cap.cx).powi(2) + (y - cap.cy).powi(2);
                if rho2 > r2 {
                    continue;
                }
                let half = (r2 - rho2).sqrt();
                let k = self.index(i, j);
                let old = self.depth[k];
                // The sphere must reach the current surface in this column.
                if cap.cz - half > old {
                    continue;
                }
                let candidate = (cap.cz + half).max(0.0);
                if candidate > old {
                    self.depth[k] = candidate;
                }
            }
        }
    }

    /// Columns whose depth exceeds `threshold`.
    pub fn footprint(&self, threshold: f64) -> Vec<bool> {
        self.depth.iter().map(|&d| d > threshold).collect()
    }
}

/// Sphere whose intersection with the current surface is removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalCap {
    pub cx: f64,
    pub cy: f64,
    /// Depth of the sphere center; negative is above the intact surface.
    pub cz: f64,
    pub r: f64,
}

impl SphericalCap {
    pub fn new(cx: f64, cy: f64, cz: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("r", "cap radius must be > 0"));
        }
        if !(cx.is_finite() && cy.is_finite() && cz.is_finite()) {
            return Err(Error::invalid("center", "cap center must be finite"));
        }
        Ok(Self { cx, cy, cz, r })
    }
}

/// Removes the material inside `cap` that is reachable from the current
/// surface. Columns where the sphere lies entirely below the surface are left
/// untouched; the result never gets shallower.
pub fn cut_cap(field: &HeightField, cap: &SphericalCap) -> HeightField {
    let mut out = field.clone();
    out.cut(cap);
    out
}

/// Half-ellipsoid of revolution with depth `d` and surface diameter `diameter`,
/// centered in the patch.
pub fn ellipsoid_field(d: f64, diameter: f64, nx: usize, ny: usize, dx: f64, dy: f64) -> Result<HeightField> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Dimension(format!("pit depth must be > 0, got {d}")));
    }
    if !(diameter > 0.0 && diameter.is_finite()) {
        return Err(Error::Dimension(format!("pit diameter must be > 0, got {diameter}")));
    }
    let mut field = HeightField::flat(nx, ny, dx, dy)?;
    let (lx, ly) = (field.len_x(), field.len_y());
    if diameter > lx.min(ly) {
        return Err(Error::Dimension(format!(
            "pit diameter {diameter} exceeds patch size {lx} x {ly}"
        )));
    }
    if diameter < 2.0 * dx.max(dy) {
        return Err(Error::Dimension(format!(
            "pit diameter {diameter} is not resolved by grid spacing {dx} x {dy}"
        )));
    }
    let (cx, cy) = (lx / 2.0, ly / 2.0);
    let a = diameter / 2.0;
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = field.coords(i, j);
            let rho2 = ((x - cx).powi(2) + (y - cy).powi(2)) / (a * a);
            let k = field.index(i, j);
            field.depth[k] = d * (1.0 - rho2).max(0.0).sqrt();
        }
    }
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LoadAxis {
    #[default]
    X,
    Y,
}

pub const DEFAULT_DEPTH_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PitMetrics {
    /// Maximum depth (μm).
    pub d: f64,
    /// Footprint extent transverse to the load axis (μm).
    pub w: f64,
    /// Footprint extent along the load axis (μm).
    pub l: f64,
    /// Mean absolute deviation of depth over the footprint (μm).
    pub ra: f64,
    pub footprint_area: f64,
}

/// Measures the pit with the default footprint threshold.
pub fn measure(field: &HeightField, load_axis: LoadAxis) -> PitMetrics {
    measure_with_threshold(field, load_axis, DEFAULT_DEPTH_THRESHOLD)
}

/// Extents count whole cells: a footprint spanning columns `i0..=i1` is
/// `(i1 - i0 + 1) * dx` long.
pub fn measure_with_threshold(field: &HeightField, load_axis: LoadAxis, threshold: f64) -> PitMetrics {
    let mut n = 0usize;
    let mut sum = 0.0;
    let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
    for j in 0..field.ny {
        for i in 0..field.nx {
            let d = field.at(i, j);
            if d > threshold {
                n += 1;
                sum += d;
                i0 = i0.min(i);
                i1 = i1.max(i);
                j0 = j0.min(j);
                j1 = j1.max(j);
            }
        }
    }
    if n == 0 {
        return PitMetrics::default();
    }
    let mean = sum / n as f64;
    let ra = field
        .depth
        .iter()
        .filter(|&&d| d > threshold)
        .map(|d| (d - mean).abs())
        .sum::<f64>()
        / n as f64;
    let ext_x = (i1 - i0 + 1) as f64 * field.dx;
    let ext_y = (j1 - j0 + 1) as f64 * field.dy;
    let (l, w) = match load_axis {
        LoadAxis::X => (ext_x, ext_y),
        LoadAxis::Y => (ext_y, ext_x),
    };
    PitMetrics {
        d: field.max_depth(),
        w,
        l,
        ra,
        footprint_area: n as f64 * field.dx * field.dy,
    }
}
