use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pit2crack::fatigue::{critical_plane_life, life_field, AnalysisSettings, INTACT_LIFE_BAND};
use pit2crack::history::{history_to_csv, parse_history_csv, uniaxial_history};
use pit2crack::pitgen::io::field_from_bytes;
use pit2crack::MaterialRecord;
use pit2crack_cli::{RunManifest, SEED_ENV};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pit2crack"))
        .args(args)
        .env_remove(SEED_ENV)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pit2crack"))
        .args(args)
        .env(SEED_ENV, seed)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn outputs(dir: &Path) -> Vec<(String, String)> {
    let m = RunManifest::load(dir).unwrap();
    m.verify(dir).unwrap();
    m.outputs.into_iter().map(|f| (f.path, f.sha256)).collect()
}

#[test]
fn generate_minimal_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    let o = run(&[
        "generate",
        "--config",
        s(&data("minimal_config.json")),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "heightfield.csv",
        "heightfield.phf",
        "caps.csv",
        "metrics.json",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let metrics: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("metrics.json")).unwrap()).unwrap();
    let d = metrics["d"].as_f64().unwrap();
    assert!((300.0..=500.0).contains(&d), "{d}");
    let m = RunManifest::load(&out).unwrap();
    assert_eq!(m.seeds, vec![7]);
    assert_eq!(m.inputs.len(), 1);
    assert_eq!(m.config["depth_threshold"], 0.5);
}

#[test]
fn generate_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, jobs) in [(&a, "1"), (&b, "4")] {
        let o = run(&["--jobs", jobs, "generate", "--seed", "11", "--out", s(dir)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(outputs(&a), outputs(&b));
    let c = tmp.path().join("c");
    assert!(run(&["generate", "--seed", "12", "--out", s(&c)]).status.success());
    assert_ne!(outputs(&a), outputs(&c));
}

#[test]
fn batch_is_independent_of_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = s(&data("minimal_config.json")).to_string();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, jobs) in [(&a, "1"), (&b, "3")] {
        let o = run(&[
            "--jobs",
            jobs,
            "batch",
            "--config",
            &cfg,
            "--samples",
            "12",
            "--out",
            s(dir),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(outputs(&a), outputs(&b));
    let csv = std::fs::read_to_string(a.join("samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn negative_radius_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"levels":[{"pit_count":{"fixed":1},"radius_dist":{"fixed":-5.0},"center_rule":"anywhere"}],
            "patch_size":[1000,1000],"grid":[51,51],"seed":1}"#,
    )
    .unwrap();
    let o = run(&["generate", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("levels[0].radius_dist"), "{}", stderr(&o));
}

#[test]
fn schema_errors_name_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"levels":[{"pit_count":{"fixed":1},"radius_dist":{"gamma":1},"center_rule":"anywhere"}],
            "patch_size":[1000,1000],"grid":[51,51],"seed":1}"#,
    )
    .unwrap();
    let o = run(&["generate", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("levels[0].radius_dist"), "{}", stderr(&o));
}

#[test]
fn seed_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("noseed.json");
    let text = std::fs::read_to_string(data("minimal_config.json"))
        .unwrap()
        .replace("\"seed\": 7", "\"seed_note\": 0");
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("seed_note");
    std::fs::write(&cfg, v.to_string()).unwrap();

    let o = run(&["generate", "--config", s(&cfg), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(SEED_ENV));

    let out = tmp.path().join("e");
    let o = run_env(&["generate", "--config", s(&cfg), "--out", s(&out)], "99");
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(RunManifest::load(&out).unwrap().seeds, vec![99]);

    // the flag wins over the environment
    let out = tmp.path().join("f");
    assert!(run_env(
        &["generate", "--config", s(&cfg), "--seed", "5", "--out", s(&out)],
        "99"
    )
    .status
    .success());
    assert_eq!(RunManifest::load(&out).unwrap().seeds, vec![5]);
}

#[test]
fn idealize_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("i");
    let o = run(&["idealize", "--depth", "150", "--diameter", "600", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let f = field_from_bytes(&std::fs::read(out.join("heightfield.phf")).unwrap()).unwrap();
    assert!((f.max_depth() - 150.0).abs() < 1e-9);
    let metrics: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("metrics.json")).unwrap()).unwrap();
    assert!((metrics["w"].as_f64().unwrap() - 600.0).abs() <= 20.0);

    // diameter larger than the patch
    let o = run(&[
        "idealize",
        "--depth",
        "150",
        "--diameter",
        "600",
        "--nx",
        "11",
        "--ny",
        "11",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    // diameter below two grid cells
    let o = run(&["idealize", "--depth", "5", "--diameter", "30", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn mesh_formats() {
    let tmp = tempfile::tempdir().unwrap();
    let field = tmp.path().join("i");
    assert!(run(&[
        "idealize",
        "--depth",
        "100",
        "--diameter",
        "400",
        "--nx",
        "31",
        "--ny",
        "21",
        "--out",
        s(&field)
    ])
    .status
    .success());
    let phf = field.join("heightfield.phf");

    let bin = tmp.path().join("b");
    let o = run(&["mesh", "--field", s(&phf), "--out", s(&bin)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(bin.join("mesh.stl")).unwrap();
    let t = 2 * 30 * 20;
    assert_eq!(bytes.len(), 84 + 50 * t);
    assert_eq!(u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize, t);

    let asc = tmp.path().join("a");
    let csv = field.join("heightfield.csv");
    let o = run(&[
        "mesh",
        "--field",
        s(&csv),
        "--spacing",
        "20",
        "--stl",
        "ascii",
        "--slab",
        "300",
        "--out",
        s(&asc),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(asc.join("mesh.stl")).unwrap();
    assert!(text.starts_with("solid"));

    let o = run(&["mesh", "--field", s(&csv), "--out", s(&asc)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["mesh", "--field", s(&phf), "--slab", "50", "--out", s(&asc)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn packaged_history_matches_generator() {
    let q = MaterialRecord::q235();
    let mut h = uniaxial_history(260.0, 26.0, &q, 20, 1).unwrap();
    h.location_id = "intact".into();
    assert_eq!(
        std::fs::read_to_string(data("uniaxial_q235.csv")).unwrap(),
        history_to_csv(&[h])
    );
    let from_file = MaterialRecord::from_json(&std::fs::read_to_string(data("q235.json")).unwrap()).unwrap();
    assert_eq!(from_file, q);
}

#[test]
fn life_matches_library_bit_for_bit() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("l");
    let hist = data("uniaxial_q235.csv");
    let o = run(&[
        "life",
        "--history",
        s(&hist),
        "--material",
        "q235",
        "--ksur",
        "1.2927",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let histories = parse_history_csv(&std::fs::read(&hist).unwrap()).unwrap();
    let settings = AnalysisSettings {
        surface_factor: 1.2927,
        ..Default::default()
    };
    let q = MaterialRecord::q235();
    let (lib, worst) = life_field(&histories, &q, &settings).unwrap();
    assert!(
        stdout(&o).contains(&format!("Nf = {:e}", lib[worst].nf)),
        "{}",
        stdout(&o)
    );

    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "intact");
    assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), lib[0].nf.to_bits());
    assert_eq!(
        row[3].parse::<f64>().unwrap().to_bits(),
        lib[0].critical_plane.theta.to_bits()
    );
    let nf = row[1].parse::<f64>().unwrap();
    assert!((INTACT_LIFE_BAND.0..=INTACT_LIFE_BAND.1).contains(&nf));

    // the material file gives the same answer as the built-in name
    let out2 = tmp.path().join("m");
    let o = run(&[
        "life",
        "--history",
        s(&hist),
        "--material",
        s(&data("q235.json")),
        "--ksur",
        "1.2927",
        "--out",
        s(&out2),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(out.join("results.csv")).unwrap(),
        std::fs::read(out2.join("results.csv")).unwrap()
    );
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["worst"]["location_id"], "intact");
    assert!(report["worst"]["cycle_table"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn malformed_history_reports_row() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = std::fs::read_to_string(data("uniaxial_q235.csv")).unwrap();
    text = text.replacen("intact,1,", "intact,1,abc", 1);
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, text).unwrap();
    let o = run(&["life", "--history", s(&bad), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 3"), "{}", stderr(&o));
}

fn worst_nf(dir: &Path) -> f64 {
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn finer_plane_grid_never_finds_less_damage() {
    let tmp = tempfile::tempdir().unwrap();
    let hist = data("uniaxial_q235.csv");
    let mut lives = Vec::new();
    for step in ["5", "10"] {
        let out = tmp.path().join(format!("s{step}"));
        let o = run(&[
            "life",
            "--history",
            s(&hist),
            "--plane-step",
            step,
            "--psi-step",
            step,
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        lives.push(worst_nf(&out));
    }
    // refinement tolerance bounds the difference
    assert!(
        lives[0] <= lives[1] * (1.0 + 1e-6),
        "5 deg {} vs 10 deg {}",
        lives[0],
        lives[1]
    );
}

#[test]
fn validate_intact_pass_and_fail() {
    let o = run(&["validate-intact"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));

    let o = run(&["validate-intact", "--ksur", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL"));
    let q = MaterialRecord::q235();
    let h = uniaxial_history(260.0, 26.0, &q, 20, 1).unwrap();
    let nf = critical_plane_life(&h, &q, &AnalysisSettings::default()).unwrap().nf;
    assert!(nf > INTACT_LIFE_BAND.1 && (1e7..1e8).contains(&nf));
    assert!(out.contains(&format!("{nf:.6e}")), "{out}");
}
