use std::path::{Path, PathBuf};
use std::process::Command;

use specgeo::geometry::PointGeometry;
use specgeo_cli::{load_spec, tensor_matrix, FormName, TensorName};

fn catalog(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../catalog").join(name)
}

fn specgeo() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_specgeo"));
    c.env_remove("SPECGEO_THREADS");
    c
}

fn status(args: &[&str]) -> i32 {
    specgeo().args(args).output().unwrap().status.code().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_exit_codes() {
    assert_eq!(status(&["verify", path_str(&catalog("m_quad.toml"))]), 0);
    assert_eq!(status(&["verify", path_str(&catalog("a_curved.toml"))]), 0);
    assert_eq!(status(&["verify", "missing.toml"]), 2);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "n = 1\nkind = \"prepotential\"\ncomponents = [\"z1^2\"]\nsample_points = []\nextra = 1\n")
        .unwrap();
    assert_eq!(status(&["verify", path_str(&bad)]), 2);

    // the negative control without its annotation is a failure
    let text = std::fs::read_to_string(catalog("a_curved.toml")).unwrap();
    let stripped = dir.path().join("curved.toml");
    std::fs::write(&stripped, text.replace("expected_fail = [\"bundle.j2-omegaprime-integrable\"]", "")).unwrap();
    assert_eq!(status(&["verify", path_str(&stripped)]), 1);
}

#[test]
fn verify_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let code = status(&["verify", path_str(&catalog("m_tau.toml")), "--out", path_str(&out), "--seed", "99"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["seed"], 99);
    assert_eq!(v["summary"]["ok"], true);
    assert_eq!(v["spec"]["theta_samples"][2].as_f64().unwrap(), 90.0);
}

#[test]
fn tensor_output_matches_internal_values() {
    let path = catalog("m_cubic.toml");
    let out = specgeo().args(["tensor", path_str(&path), "--point", "0", "--what", "g"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split_whitespace().map(|t| t.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    let spec = load_spec(&path).unwrap();
    let geom = PointGeometry::at(&spec, &spec.sample_points[0]).unwrap();
    assert_eq!(values.len(), 16);
    for (k, v) in values.iter().enumerate() {
        assert!((v - geom.metric.g[(k / 4, k % 4)]).abs() <= 1e-12);
    }
    assert_eq!(status(&["tensor", path_str(&path), "--point", "7", "--what", "J"]), 2);
}

#[test]
fn tensor_bundle_shapes() {
    let spec = load_spec(&catalog("m_quad.toml")).unwrap();
    let gn = tensor_matrix(&spec, 1, TensorName::GN, FormName::Omega11).unwrap();
    assert_eq!(gn.nrows(), 8);
    assert!((gn[(0, 0)] - 2.0).abs() < 1e-15 && (gn[(7, 7)] - 0.5).abs() < 1e-15);
    let omega = tensor_matrix(&spec, 0, TensorName::Omega, FormName::Omega11).unwrap();
    assert_eq!(omega[(0, 2)], 2.0);
    assert_eq!(omega[(2, 0)], -2.0);
    // ω' vanishes on a prepotential, so J2 from it is undefined
    assert!(tensor_matrix(&spec, 0, TensorName::J2, FormName::Omegaprime).is_err());
}

#[test]
fn scan_flags_pole_and_singular_rows() {
    let path = catalog("m_cubic.toml");
    let out =
        specgeo().args(["scan", path_str(&path), "--axis", "z2.re=-1:1:3", "--axis", "z2.im=0:1:2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    // z2 = 0 is the pole; real z2 gives a real Hessian
    assert!(rows[1].ends_with(",eval_error"));
    assert!(rows[0].ends_with(",not_regular") && rows[2].ends_with(",not_regular"));
    assert!(rows[3..].iter().all(|r| r.ends_with(",ok")));
}

#[test]
fn scan_along_imaginary_axis() {
    let path = catalog("m_cubic.toml");
    let csv = specgeo_cli::cmd_scan(&path, 0, &["z2.im=0.1:2:20".to_string()]).unwrap();
    let det: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(det.len(), 20);
    // z1 = 1, z2 = 1 + it
    for (k, d) in det.iter().enumerate() {
        let t = 0.1 + 1.9 * k as f64 / 19.0;
        let z2 = num_complex::Complex64::new(1.0, t);
        let (a, b, c) = ((6.0 / z2).im, (-3.0 / (z2 * z2)).im, (2.0 / (z2 * z2 * z2)).im);
        assert!((d - (a * c - b * b)).abs() < 1e-12 * (1.0 + d.abs()));
    }
    let quad = specgeo_cli::cmd_scan(&catalog("m_quad.toml"), 1, &["z1.im=-1:1:5".to_string()]).unwrap();
    let dets: Vec<&str> = quad.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert!(dets.iter().all(|d| *d == dets[0]));
}

#[test]
fn thread_count_from_flag_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let path = catalog("m_cubic.toml");
    assert_eq!(status(&["--threads", "1", "verify", path_str(&path), "--out", path_str(&a)]), 0);
    let code = specgeo()
        .env("SPECGEO_THREADS", "3")
        .args(["verify", path_str(&path), "--out", path_str(&b)])
        .status()
        .unwrap()
        .code()
        .unwrap();
    assert_eq!(code, 0);
    let strip = |p: &Path| {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
}
