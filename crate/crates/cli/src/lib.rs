//! Batch workflows over the `pit2crack` library: pit generation, idealized
//! pits, STL export, life analysis and the intact-specimen check.
//!
//! Every command writes into an output directory together with a
//! `manifest.json` that records the resolved configuration, seeds, input
//! digests and a SHA-256 for each output. Apart from the manifest's wall
//! time, identical inputs give byte-identical files.

pub mod manifest;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pit2crack::fatigue::{
    critical_plane_life, life_field, report_json, results_to_csv, within_intact_band, AnalysisSettings,
    MeanStressCorrection, INTACT_LIFE_BAND, INTACT_SURFACE_FACTOR,
};
use pit2crack::history::{parse_history_csv, uniaxial_history};
use pit2crack::meshio::{field_to_mesh, write_stl, MeshMode, StlFormat};
use pit2crack::pitgen::io::{caps_to_csv, field_from_bytes, field_from_csv, field_to_bytes, field_to_csv};
use pit2crack::pitgen::{
    batch_generate, ellipsoid_field, generate_pit, measure, HeightField, HierarchySpec, LoadAxis, DEFAULT_GRID_SPACING,
    RNG_ALGORITHM,
};
use pit2crack::MaterialRecord;

pub use manifest::{FileDigest, OutputDir, RunManifest, MANIFEST_FILE};

pub const SEED_ENV: &str = "PIT2CRACK_SEED";

/// Exit status of a failed command: 2 for bad input or configuration, 3 for
/// numerical failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn user(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::user(format!("{}: {e}", path.display()))
    }
}

impl From<pit2crack::Error> for CliError {
    fn from(e: pit2crack::Error) -> Self {
        let code = if e.is_user_error() { 2 } else { 3 };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pit2crack",
    version,
    about = "Corrosion-pit geometry and critical-plane fatigue life"
)]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one stochastic pit from a hierarchy config.
    Generate(GenerateArgs),
    /// Heightfield of the ellipsoidal pit with given depth and diameter.
    Idealize(IdealizeArgs),
    /// Export a heightfield as an STL mesh.
    Mesh(MeshArgs),
    /// Critical-plane fatigue life of every location in a history CSV.
    Life(LifeArgs),
    /// Run the intact Q235 specimen (260/26 MPa) and check the tested life band.
    ValidateIntact(ValidateArgs),
    /// Metric statistics over many generated pits.
    Batch(BatchArgs),
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    /// Seed; overrides the config. Falls back to the config, then to PIT2CRACK_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Hierarchy config (JSON). Without it the built-in three-level recipe is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IdealizeArgs {
    /// Pit depth (μm).
    #[arg(long)]
    pub depth: f64,
    /// Pit mouth diameter (μm).
    #[arg(long)]
    pub diameter: f64,
    /// Grid spacing (μm), both axes.
    #[arg(long, default_value_t = DEFAULT_GRID_SPACING)]
    pub spacing: f64,
    /// Nodes along x; defaults to a patch about 1.5 diameters wide.
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long, value_enum, default_value_t = Axis::X)]
    pub load_axis: Axis,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Axis {
    X,
    Y,
}

impl From<Axis> for LoadAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::X => LoadAxis::X,
            Axis::Y => LoadAxis::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StlKind {
    Ascii,
    Binary,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    /// Heightfield: binary grid (.phf) or CSV matrix (needs --spacing).
    #[arg(long)]
    pub field: PathBuf,
    /// Grid spacing for CSV input (μm).
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long, value_enum, default_value_t = StlKind::Binary)]
    pub stl: StlKind,
    /// Close the surface into a slab of this thickness (μm).
    #[arg(long)]
    pub slab: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MeanStress {
    Morrow,
    None,
}

#[derive(Debug, Clone, Args)]
pub struct SettingsArgs {
    #[arg(long, default_value_t = 10.0)]
    pub plane_step: f64,
    #[arg(long, default_value_t = 10.0)]
    pub psi_step: f64,
    /// Surface finish factor on the strain amplitude. `life` defaults to 1,
    /// `validate-intact` to the frozen calibrated value.
    #[arg(long)]
    pub ksur: Option<f64>,
    #[arg(long, value_enum, default_value_t = MeanStress::Morrow)]
    pub mean_stress: MeanStress,
    /// Keep the raw grid optimum instead of refining it.
    #[arg(long)]
    pub no_refine: bool,
}

impl SettingsArgs {
    pub fn settings(&self, default_ksur: f64) -> AnalysisSettings {
        AnalysisSettings {
            plane_step: self.plane_step,
            psi_step: self.psi_step,
            surface_factor: self.ksur.unwrap_or(default_ksur),
            mean_stress_correction: match self.mean_stress {
                MeanStress::Morrow => MeanStressCorrection::Morrow,
                MeanStress::None => MeanStressCorrection::None,
            },
            refine: !self.no_refine,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct LifeArgs {
    /// Strain/stress history CSV.
    #[arg(long)]
    pub history: PathBuf,
    /// Material JSON file or a built-in name.
    #[arg(long, default_value = "Q235")]
    pub material: String,
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub settings: SettingsArgs,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Number of pits to generate.
    #[arg(long, default_value_t = 100)]
    pub samples: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Loading points of the intact-specimen check (MPa).
pub const INTACT_SIGMA_MAX: f64 = 260.0;
pub const INTACT_SIGMA_MIN: f64 = 26.0;
const INTACT_POINTS_PER_CYCLE: usize = 20;

/// What a successful command reports.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    /// Non-zero when the command ran but its check failed.
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, code: 0 }
    }
}

/// Runs a parsed command line, on a dedicated pool when `--jobs` is given.
pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.jobs {
        Some(0) => Err(CliError::user("--jobs must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::user(e.to_string()))?
            .install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    }
}

fn dispatch(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Idealize(a) => cmd_idealize(&a),
        Command::Mesh(a) => cmd_mesh(&a),
        Command::Life(a) => cmd_life(&a),
        Command::ValidateIntact(a) => cmd_validate_intact(&a),
        Command::Batch(a) => cmd_batch(&a),
    }
}

fn manifest(command: &str, config: serde_json::Value) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config,
        seeds: Vec::new(),
        rng_algorithm: None,
        inputs: Vec::new(),
        outputs: Vec::new(),
        wall_time_s: 0.0,
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

fn pretty<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// Reads a hierarchy config and resolves its seed: `--seed` first, then the
/// config's own `seed`, then the environment.
pub fn load_spec(config: Option<&Path>, seed: Option<u64>) -> Result<(HierarchySpec, Vec<FileDigest>), CliError> {
    let env_seed = || -> Result<Option<u64>, CliError> {
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| CliError::user(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
            Err(_) => Ok(None),
        }
    };
    let Some(path) = config else {
        let seed = seed.or(env_seed()?).unwrap_or(0);
        return Ok((
            HierarchySpec {
                seed,
                ..Default::default()
            },
            Vec::new(),
        ));
    };
    let bytes = read(path)?;
    let text =
        String::from_utf8(bytes.clone()).map_err(|_| CliError::user(format!("{}: not UTF-8", path.display())))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::user(format!("{}: invalid JSON: {e}", path.display())))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::user(format!("{}: config must be a JSON object", path.display())))?;
    let resolved = match (seed, obj.contains_key("seed")) {
        (Some(s), _) => Some(s),
        (None, true) => None,
        (None, false) => Some(env_seed()?.ok_or_else(|| {
            CliError::user(format!(
                "no seed: pass --seed, set \"seed\" in the config or set {SEED_ENV}"
            ))
        })?),
    };
    if let Some(s) = resolved {
        obj.insert("seed".into(), json!(s));
    }
    let spec = HierarchySpec::from_json(&value.to_string()).map_err(|e| CliError {
        message: format!("{}: {e}", path.display()),
        ..CliError::from(e)
    })?;
    Ok((spec, vec![FileDigest::of(path.display().to_string(), text.as_bytes())]))
}

fn write_field(out: &mut OutputDir, field: &HeightField) -> Result<(), CliError> {
    out.write("heightfield.csv", field_to_csv(field).as_bytes())?;
    out.write("heightfield.phf", &field_to_bytes(field))
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<Outcome, CliError> {
    let t0 = Instant::now();
    let (spec, inputs) = load_spec(a.config.as_deref(), a.seed.seed)?;
    let pit = generate_pit(&spec)?;
    let metrics = measure_spec(&pit.field, &spec);

    let mut out = OutputDir::create(&a.out)?;
    write_field(&mut out, &pit.field)?;
    out.write("caps.csv", caps_to_csv(&pit.caps).as_bytes())?;
    out.write("metrics.json", &pretty(&metrics))?;
    let mut m = manifest("generate", to_json(&spec));
    m.seeds = vec![spec.seed];
    m.rng_algorithm = Some(RNG_ALGORITHM.into());
    m.inputs = inputs;
    m.wall_time_s = t0.elapsed().as_secs_f64();
    out.finish(m)?;
    Ok(Outcome::ok(format!(
        "seed {}: {} caps, depth {:.3} um, width {:.1} um, length {:.1} um\n",
        spec.seed,
        pit.caps.len(),
        metrics.d,
        metrics.w,
        metrics.l
    )))
}

fn measure_spec(field: &HeightField, spec: &HierarchySpec) -> pit2crack::pitgen::PitMetrics {
    pit2crack::pitgen::measure_with_threshold(field, spec.load_axis, spec.depth_threshold)
}

pub fn cmd_idealize(a: &IdealizeArgs) -> Result<Outcome, CliError> {
    let t0 = Instant::now();
    if !(a.spacing > 0.0 && a.spacing.is_finite()) {
        return Err(CliError::user("--spacing must be > 0"));
    }
    let auto = || {
        let n = (1.5 * a.diameter / a.spacing).ceil() as usize;
        n + (n % 2 == 1) as usize + 1
    };
    let (nx, ny) = (a.nx.unwrap_or_else(auto), a.ny.unwrap_or_else(auto));
    let field = ellipsoid_field(a.depth, a.diameter, nx, ny, a.spacing, a.spacing)?;
    let metrics = measure(&field, a.load_axis.into());

    let mut out = OutputDir::create(&a.out)?;
    write_field(&mut out, &field)?;
    out.write("metrics.json", &pretty(&metrics))?;
    let mut m = manifest(
        "idealize",
        json!({
            "depth": a.depth,
            "diameter": a.diameter,
            "spacing": a.spacing,
            "grid": [nx, ny],
            "load_axis": LoadAxis::from(a.load_axis),
        }),
    );
    m.wall_time_s = t0.elapsed().as_secs_f64();
    out.finish(m)?;
    Ok(Outcome::ok(format!(
        "{nx}x{ny} grid: depth {:.3} um, width {:.1} um, length {:.1} um\n",
        metrics.d, metrics.w, metrics.l
    )))
}

/// Loads a heightfield by extension: `.csv` needs a spacing, anything else
/// is read as a binary grid.
pub fn load_field(path: &Path, spacing: Option<f64>) -> Result<(HeightField, FileDigest), CliError> {
    let bytes = read(path)?;
    let digest = FileDigest::of(path.display().to_string(), &bytes);
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let field = if is_csv {
        let s = spacing.ok_or_else(|| CliError::user("CSV heightfields carry no spacing; pass --spacing"))?;
        let text = String::from_utf8(bytes).map_err(|_| CliError::user(format!("{}: not UTF-8", path.display())))?;
        field_from_csv(&text, s, s)
    } else {
        field_from_bytes(&bytes)
    }
    .map_err(|e| CliError {
        message: format!("{}: {e}", path.display()),
        ..CliError::from(e)
    })?;
    Ok((field, digest))
}

pub fn cmd_mesh(a: &MeshArgs) -> Result<Outcome, CliError> {
    let t0 = Instant::now();
    let (field, digest) = load_field(&a.field, a.spacing)?;
    let mode = match a.slab {
        Some(thickness) => MeshMode::ClosedSlab { thickness },
        None => MeshMode::SurfaceOnly,
    };
    let mesh = field_to_mesh(&field, mode)?;
    let (format, name) = match a.stl {
        StlKind::Ascii => (StlFormat::Ascii, "ascii"),
        StlKind::Binary => (StlFormat::Binary, "binary"),
    };
    let mut out = OutputDir::create(&a.out)?;
    out.write("mesh.stl", &write_stl(&mesh, format))?;
    let mut m = manifest(
        "mesh",
        json!({ "field": a.field.display().to_string(), "spacing": a.spacing, "stl": name, "slab": a.slab }),
    );
    m.inputs = vec![digest];
    m.wall_time_s = t0.elapsed().as_secs_f64();
    out.finish(m)?;
    Ok(Outcome::ok(format!(
        "{} vertices, {} triangles\n",
        mesh.vertices.len(),
        mesh.triangles.len()
    )))
}

/// A built-in material by name (case-insensitive) or a JSON file.
pub fn load_material(spec: &str) -> Result<(MaterialRecord, Option<FileDigest>), CliError> {
    if let Some(m) = MaterialRecord::builtin(&spec.to_ascii_uppercase()) {
        return Ok((m, None));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::user(format!(
            "material {spec:?} is neither built in nor a readable file"
        )));
    }
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| CliError::user(format!("{spec}: not UTF-8")))?;
    let m = MaterialRecord::from_json(&text).map_err(|e| CliError {
        message: format!("{spec}: {e}"),
        ..CliError::from(e)
    })?;
    Ok((m, Some(FileDigest::of(spec, text.as_bytes()))))
}

pub fn cmd_life(a: &LifeArgs) -> Result<Outcome, CliError> {
    let t0 = Instant::now();
    let bytes = read(&a.history)?;
    let history_digest = FileDigest::of(a.history.display().to_string(), &bytes);
    let histories = parse_history_csv(&bytes).map_err(|e| CliError {
        message: format!("{}: {e}", a.history.display()),
        ..CliError::from(e)
    })?;
    let (material, material_digest) = load_material(&a.material)?;
    let settings = a.settings.settings(1.0);
    let (results, worst) = life_field(&histories, &material, &settings)?;

    let mut out = OutputDir::create(&a.out)?;
    out.write("results.csv", results_to_csv(&results).as_bytes())?;
    let mut report = report_json(&results, worst, &material, &settings)?;
    report.push('\n');
    out.write("report.json", report.as_bytes())?;
    let mut m = manifest("life", json!({ "settings": settings, "material": material }));
    m.inputs = std::iter::once(history_digest).chain(material_digest).collect();
    m.wall_time_s = t0.elapsed().as_secs_f64();
    out.finish(m)?;

    let w = &results[worst];
    let p = w.critical_plane;
    Ok(Outcome::ok(format!(
        "{} locations; worst {}: Nf = {:e} cycles{} (log10 {:.4}), plane theta {:.4} phi {:.4} psi {:.4}\n",
        results.len(),
        w.location_id,
        w.nf,
        if w.run_out { " (run-out)" } else { "" },
        w.log10_life,
        p.theta,
        p.phi,
        p.psi
    )))
}

/// Life of the intact specimen under `settings`.
pub fn intact_life(settings: &AnalysisSettings) -> Result<f64, CliError> {
    let q = MaterialRecord::q235();
    let h = uniaxial_history(INTACT_SIGMA_MAX, INTACT_SIGMA_MIN, &q, INTACT_POINTS_PER_CYCLE, 1)?;
    Ok(critical_plane_life(&h, &q, settings)?.nf)
}

/// Prints the intact-specimen life and PASS or FAIL; FAIL exits with 1.
pub fn cmd_validate_intact(a: &ValidateArgs) -> Result<Outcome, CliError> {
    let settings = a.settings.settings(INTACT_SURFACE_FACTOR);
    let nf = intact_life(&settings)?;
    let pass = within_intact_band(nf);
    let (lo, hi) = INTACT_LIFE_BAND;
    Ok(Outcome {
        stdout: format!(
            "intact Q235 {INTACT_SIGMA_MAX}/{INTACT_SIGMA_MIN} MPa, Ksur = {}: Nf = {nf:.6e} cycles, band [{lo:e}, {hi:e}]: {}\n",
            settings.surface_factor,
            if pass { "PASS" } else { "FAIL" }
        ),
        code: if pass { 0 } else { 1 },
    })
}

pub fn cmd_batch(a: &BatchArgs) -> Result<Outcome, CliError> {
    let t0 = Instant::now();
    let (spec, inputs) = load_spec(a.config.as_deref(), a.seed.seed)?;
    let summary = batch_generate(&spec, a.samples, spec.seed)?;

    let mut out = OutputDir::create(&a.out)?;
    let mut csv = String::from("sample,d,w,l,ra,footprint_area\n");
    for (k, s) in summary.samples.iter().enumerate() {
        csv.push_str(&format!("{k},{},{},{},{},{}\n", s.d, s.w, s.l, s.ra, s.footprint_area));
    }
    out.write("samples.csv", csv.as_bytes())?;
    out.write("summary.json", &pretty(&summary))?;
    let mut m = manifest("batch", json!({ "spec": spec, "samples": a.samples }));
    m.seeds = vec![spec.seed];
    m.rng_algorithm = Some(RNG_ALGORITHM.into());
    m.inputs = inputs;
    m.wall_time_s = t0.elapsed().as_secs_f64();
    out.finish(m)?;
    Ok(Outcome::ok(format!(
        "{} samples (seed stream {}): depth mean {:.3} um, std {:.3} um\n",
        summary.n_samples, summary.seed_stream, summary.d.mean, summary.d.std
    )))
}
