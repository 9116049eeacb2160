//! Python bindings: materials, pit generation, rainflow and critical-plane
//! life. Library errors become `ValueError`, numerical breakdowns
//! `ArithmeticError`.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use pit2crack::fatigue::{self, AnalysisSettings, MeanStressCorrection};
use pit2crack::history::{self, StrainHistory as CoreHistory};
use pit2crack::meshio::{field_to_mesh, write_stl, MeshMode, StlFormat};
use pit2crack::pitgen::{self, io as field_io, HierarchySpec, LoadAxis};
use pit2crack::MaterialRecord;

fn err(e: pit2crack::Error) -> PyErr {
    if e.is_user_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

fn load_axis(axis: &str) -> PyResult<LoadAxis> {
    match axis {
        "x" | "X" => Ok(LoadAxis::X),
        "y" | "Y" => Ok(LoadAxis::Y),
        other => Err(PyValueError::new_err(format!(
            "load_axis must be 'x' or 'y', got {other:?}"
        ))),
    }
}

#[pyclass(name = "Material", frozen, from_py_object)]
#[derive(Clone)]
struct Material(MaterialRecord);

#[pymethods]
impl Material {
    #[staticmethod]
    fn q235() -> Self {
        Self(MaterialRecord::q235())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        MaterialRecord::from_json(text).map(Self).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn name(&self) -> &str {
        &self.0.name
    }

    #[getter]
    fn youngs_modulus(&self) -> f64 {
        self.0.youngs_modulus()
    }

    fn __repr__(&self) -> String {
        format!("Material({:?})", self.0.name)
    }
}

#[pyclass(name = "HeightField", frozen, from_py_object)]
#[derive(Clone)]
struct HeightField(pitgen::HeightField);

#[pymethods]
impl HeightField {
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.ny(), self.0.nx())
    }

    #[getter]
    fn spacing(&self) -> (f64, f64) {
        (self.0.dx(), self.0.dy())
    }

    /// Depths (μm) row by row, rows along y.
    fn depths(&self) -> Vec<Vec<f64>> {
        self.0.depths().chunks(self.0.nx()).map(<[f64]>::to_vec).collect()
    }

    fn max_depth(&self) -> f64 {
        self.0.max_depth()
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &field_io::field_to_bytes(&self.0))
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        field_io::field_from_bytes(data).map(Self).map_err(err)
    }

    fn to_csv(&self) -> String {
        field_io::field_to_csv(&self.0)
    }

    /// STL bytes of the surface, closed into a slab when `slab` is given.
    #[pyo3(signature = (binary = true, slab = None))]
    fn to_stl<'py>(&self, py: Python<'py>, binary: bool, slab: Option<f64>) -> PyResult<Bound<'py, PyBytes>> {
        let mode = slab.map_or(MeshMode::SurfaceOnly, |thickness| MeshMode::ClosedSlab { thickness });
        let mesh = field_to_mesh(&self.0, mode).map_err(err)?;
        let fmt = if binary { StlFormat::Binary } else { StlFormat::Ascii };
        Ok(PyBytes::new(py, &write_stl(&mesh, fmt)))
    }

    fn __repr__(&self) -> String {
        format!(
            "HeightField(nx={}, ny={}, dx={}, dy={}, max_depth={})",
            self.0.nx(),
            self.0.ny(),
            self.0.dx(),
            self.0.dy(),
            self.0.max_depth()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (depth, diameter, nx, ny, dx, dy = None))]
fn ellipsoid_field(depth: f64, diameter: f64, nx: usize, ny: usize, dx: f64, dy: Option<f64>) -> PyResult<HeightField> {
    pitgen::ellipsoid_field(depth, diameter, nx, ny, dx, dy.unwrap_or(dx))
        .map(HeightField)
        .map_err(err)
}

/// Pit metrics as a dict with keys d, w, l, ra, footprint_area.
#[pyfunction]
#[pyo3(signature = (field, load_axis = "x", threshold = pitgen::DEFAULT_DEPTH_THRESHOLD))]
fn measure<'py>(py: Python<'py>, field: &HeightField, load_axis: &str, threshold: f64) -> PyResult<Bound<'py, PyDict>> {
    let m = pitgen::measure_with_threshold(&field.0, self::load_axis(load_axis)?, threshold);
    let d = PyDict::new(py);
    d.set_item("d", m.d)?;
    d.set_item("w", m.w)?;
    d.set_item("l", m.l)?;
    d.set_item("ra", m.ra)?;
    d.set_item("footprint_area", m.footprint_area)?;
    Ok(d)
}

type CapTuple = (usize, f64, f64, f64, f64);

/// Generates one pit. `config` is a hierarchy JSON; without it the built-in
/// recipe is used. Returns the field and the cap log as
/// `(level, cx, cy, cz, r)` tuples.
#[pyfunction]
#[pyo3(signature = (config = None, seed = None))]
fn generate_pit(config: Option<&str>, seed: Option<u64>) -> PyResult<(HeightField, Vec<CapTuple>)> {
    let mut spec = match config {
        Some(text) => HierarchySpec::from_json(text).map_err(err)?,
        None => HierarchySpec::default(),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    let pit = pitgen::generate_pit(&spec).map_err(err)?;
    let caps = pit
        .caps
        .iter()
        .map(|c| (c.level, c.cap.cx, c.cap.cy, c.cap.cz, c.cap.r))
        .collect();
    Ok((HeightField(pit.field), caps))
}

#[pyfunction]
fn brown_miller_constants(nu_elastic: f64, nu_plastic: f64) -> PyResult<(f64, f64)> {
    let c = fatigue::brown_miller_constants(nu_elastic, nu_plastic).map_err(err)?;
    Ok((c.c1, c.c2))
}

/// Cycles to initiation for a Brown-Miller amplitude `lhs` and mean normal
/// stress (MPa). Run-outs return the upper bracket.
#[pyfunction]
#[pyo3(signature = (lhs, mean_stress, material = None, ksur = 1.0))]
fn strain_life_nf(lhs: f64, mean_stress: f64, material: Option<&Material>, ksur: f64) -> PyResult<f64> {
    let m = material.map_or_else(MaterialRecord::q235, |m| m.0.clone());
    let consts = fatigue::brown_miller_constants(m.elastic.poisson_elastic, m.elastic.poisson_plastic).map_err(err)?;
    fatigue::strain_life_nf(lhs, mean_stress, &m.strain_life, m.youngs_modulus(), &consts, ksur)
        .map(|s| s.nf)
        .map_err(err)
}

/// Rainflow cycles as `(range, mean, weight)` tuples.
#[pyfunction]
fn rainflow(series: Vec<f64>) -> Vec<(f64, f64, f64)> {
    history::rainflow_cycles(&series)
        .iter()
        .map(|c| (c.range, c.mean, c.weight))
        .collect()
}

#[pyclass(name = "StrainHistory", frozen, from_py_object)]
#[derive(Clone)]
struct StrainHistory(CoreHistory);

#[pymethods]
impl StrainHistory {
    /// Elastic uniaxial cycling along x.
    #[staticmethod]
    #[pyo3(signature = (sigma_max, sigma_min, material = None, points_per_cycle = 20, n_cycles = 1))]
    fn uniaxial(
        sigma_max: f64,
        sigma_min: f64,
        material: Option<&Material>,
        points_per_cycle: usize,
        n_cycles: usize,
    ) -> PyResult<Self> {
        let m = material.map_or_else(MaterialRecord::q235, |m| m.0.clone());
        history::uniaxial_history(sigma_max, sigma_min, &m, points_per_cycle, n_cycles)
            .map(Self)
            .map_err(err)
    }

    /// All locations in a history CSV, sorted by id.
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Vec<Self>> {
        history::parse_history_csv(text.as_bytes())
            .map(|v| v.into_iter().map(Self).collect())
            .map_err(err)
    }

    #[getter]
    fn location_id(&self) -> &str {
        &self.0.location_id
    }

    #[getter]
    fn repeat_count(&self) -> f64 {
        self.0.repeat_count
    }

    fn __len__(&self) -> usize {
        self.0.samples.len()
    }

    fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scaled(factor))
    }

    fn with_id(&self, location_id: &str) -> Self {
        Self(CoreHistory {
            location_id: location_id.into(),
            ..self.0.clone()
        })
    }

    fn to_csv(&self) -> String {
        history::history_to_csv(std::slice::from_ref(&self.0))
    }
}

#[pyclass(name = "LifeResult", frozen, get_all)]
struct LifeResult {
    location_id: String,
    nf: f64,
    log10_life: f64,
    run_out: bool,
    /// (theta, phi, psi) in degrees.
    critical_plane: (f64, f64, f64),
    delta_gamma_max: f64,
    damage_per_pass: f64,
}

impl From<fatigue::LifeResult> for LifeResult {
    fn from(r: fatigue::LifeResult) -> Self {
        let p = r.critical_plane;
        Self {
            location_id: r.location_id,
            nf: r.nf,
            log10_life: r.log10_life,
            run_out: r.run_out,
            critical_plane: (p.theta, p.phi, p.psi),
            delta_gamma_max: r.delta_gamma_max,
            damage_per_pass: r.damage_per_pass,
        }
    }
}

#[pymethods]
impl LifeResult {
    fn __repr__(&self) -> String {
        format!("LifeResult({:?}, nf={:e})", self.location_id, self.nf)
    }
}

fn settings(plane_step: f64, psi_step: f64, ksur: f64, refine: bool, mean_stress: &str) -> PyResult<AnalysisSettings> {
    let mean_stress_correction = match mean_stress {
        "morrow" => MeanStressCorrection::Morrow,
        "none" => MeanStressCorrection::None,
        other => {
            return Err(PyValueError::new_err(format!(
                "mean_stress must be 'morrow' or 'none', got {other:?}"
            )))
        }
    };
    Ok(AnalysisSettings {
        plane_step,
        psi_step,
        surface_factor: ksur,
        refine,
        mean_stress_correction,
        ..Default::default()
    })
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (history, material = None, plane_step = 10.0, psi_step = 10.0, ksur = 1.0, refine = true, mean_stress = "morrow"))]
fn critical_plane_life(
    py: Python<'_>,
    history: &StrainHistory,
    material: Option<&Material>,
    plane_step: f64,
    psi_step: f64,
    ksur: f64,
    refine: bool,
    mean_stress: &str,
) -> PyResult<LifeResult> {
    let m = material.map_or_else(MaterialRecord::q235, |m| m.0.clone());
    let s = settings(plane_step, psi_step, ksur, refine, mean_stress)?;
    let h = history.0.clone();
    py.detach(move || fatigue::critical_plane_life(&h, &m, &s))
        .map(LifeResult::from)
        .map_err(err)
}

/// Lives of all locations and the index of the worst one.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (histories, material = None, plane_step = 10.0, psi_step = 10.0, ksur = 1.0, refine = true, mean_stress = "morrow"))]
fn life_field(
    py: Python<'_>,
    histories: Vec<StrainHistory>,
    material: Option<&Material>,
    plane_step: f64,
    psi_step: f64,
    ksur: f64,
    refine: bool,
    mean_stress: &str,
) -> PyResult<(Vec<LifeResult>, usize)> {
    let m = material.map_or_else(MaterialRecord::q235, |m| m.0.clone());
    let s = settings(plane_step, psi_step, ksur, refine, mean_stress)?;
    let hs: Vec<CoreHistory> = histories.into_iter().map(|h| h.0).collect();
    let (results, worst) = py.detach(move || fatigue::life_field(&hs, &m, &s)).map_err(err)?;
    Ok((results.into_iter().map(LifeResult::from).collect(), worst))
}

#[pymodule]
fn pit2crack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Material>()?;
    m.add_class::<HeightField>()?;
    m.add_class::<StrainHistory>()?;
    m.add_class::<LifeResult>()?;
    m.add_function(wrap_pyfunction!(ellipsoid_field, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(generate_pit, m)?)?;
    m.add_function(wrap_pyfunction!(brown_miller_constants, m)?)?;
    m.add_function(wrap_pyfunction!(strain_life_nf, m)?)?;
    m.add_function(wrap_pyfunction!(rainflow, m)?)?;
    m.add_function(wrap_pyfunction!(critical_plane_life, m)?)?;
    m.add_function(wrap_pyfunction!(life_field, m)?)?;
    m.add("INTACT_SURFACE_FACTOR", fatigue::INTACT_SURFACE_FACTOR)?;
    m.add("INTACT_LIFE_BAND", fatigue::INTACT_LIFE_BAND)?;
    m.add("RNG_ALGORITHM", pitgen::RNG_ALGORITHM)?;
    Ok(())
}
