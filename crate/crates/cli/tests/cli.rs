//! End-to-end checks of the command-line interface: exit codes, report
//! contents, and byte-for-byte determinism.

use std::process::{Command, Output};

fn perigraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perigraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("valid JSON on stdout")
}

#[test]
fn validate_fixture_reports_invariants() {
    let out = perigraph(&["validate", "graphene"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("vertices: 2"));
    assert!(text.contains("bridges: 2"));
    assert!(text.contains("basis_gram_min: 1"));
    assert!(text.contains("full_gram_max: 1"));

    let out = perigraph(&["validate", "lattice:3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("total 6"));
}

#[test]
fn validate_json_format() {
    let out = perigraph(&["validate", "stanene", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["vertices"], 4);
    assert_eq!(v["total_degree"], 10);
    assert_eq!(v["basis_gram_min"], 1.0);
}

#[test]
fn validate_rejects_broken_document() {
    let dir = std::env::temp_dir().join("perigraph-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.graph");
    std::fs::write(
        &path,
        r#"{"dimension": 1, "vertices": ["a", "b"],
            "edges": [["a", "a", [1]], ["b", "b", [1]]]}"#,
    )
    .unwrap();
    let out = perigraph(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("disconnected"), "stderr: {stderr}");
}

#[test]
fn unknown_fixture_is_a_usage_error() {
    let out = perigraph(&["validate", "lattice:zero"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn too_coarse_grid_is_a_config_error() {
    let out = perigraph(&["bands", "graphene", "--grid", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bands_csv_shape() {
    let out = perigraph(&["bands", "graphene", "--grid", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta_1,theta_2,lambda_1,lambda_2");
    assert_eq!(lines.len(), 1 + 64);
}

#[test]
fn bands_json_stanene_gap() {
    let out = perigraph(&["bands", "stanene", "--grid", "64", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let gaps = v["gaps"].as_array().unwrap();
    assert_eq!(gaps.len(), 1);
    assert!((gaps[0][0].as_f64().unwrap() - 0.75).abs() < 1e-6);
    assert!((gaps[0][1].as_f64().unwrap() - 1.25).abs() < 1e-6);
}

#[test]
fn bands_json_graphene_touching_bands() {
    let out = perigraph(&["bands", "graphene", "--grid", "32", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["gaps"].as_array().unwrap().len(), 0);
    let bands = v["bands"].as_array().unwrap();
    assert!((bands[0]["upper"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((bands[1]["lower"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn bands_json_kagome_flat_band() {
    let out = perigraph(&["bands", "kagome", "--grid", "16", "--format", "json"]);
    let v = json(&out);
    let flats = v["flat_bands"].as_array().unwrap();
    assert_eq!(flats.len(), 1);
    assert!((flats[0]["value"].as_f64().unwrap() - 1.5).abs() < 1e-9);
}

#[test]
fn effmass_bottom_report() {
    let out = perigraph(&["effmass", "graphene", "--edge", "bottom", "--sweep", "90"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let m = &v["forms"][0]["matrix"];
    assert!((m[0][0].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-10);
    assert!((m[0][1].as_f64().unwrap() + 1.0 / 18.0).abs() < 1e-10);
    let mass = v["mass"]["eigenvalues"].as_array().unwrap();
    assert!((mass[0].as_f64().unwrap() - 18.0).abs() < 1e-8);
    assert!((mass[1].as_f64().unwrap() - 6.0).abs() < 1e-8);
    assert!(v["bottom_bounds"]["lower_margin"].as_f64().unwrap() >= 0.0);
    assert!(
        v["oracle_deltas"]["perturbative_vs_bottom_exact"]
            .as_f64()
            .unwrap()
            < 1e-10
    );
}

#[test]
fn effmass_stanene_band_two_top() {
    let out = perigraph(&["effmass", "stanene", "--edge", "band2-max", "--sweep", "90"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let eig = v["forms"][0]["eigenvalues"].as_array().unwrap();
    assert!((eig[0].as_f64().unwrap() + 1.0 / 40.0).abs() < 1e-8);
    assert!((eig[1].as_f64().unwrap() + 1.0 / 120.0).abs() < 1e-8);
    assert!(v["bottom_bounds"].is_null());
}

#[test]
fn effmass_degenerate_edge_exits_three() {
    let out = perigraph(&["effmass", "graphene", "--edge", "band1-max"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn effmass_dos_mass_on_cubic_lattice() {
    let out = perigraph(&[
        "effmass",
        "lattice:3",
        "--edge",
        "bottom",
        "--grid",
        "12",
        "--sweep",
        "64",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["dos_mass"]["value"].as_f64().unwrap() - 6.0).abs() < 1e-8);
}

#[test]
fn metric_report_lattice_flat_points() {
    let out = perigraph(&[
        "metric",
        "lattice:2",
        "--jmax",
        "1",
        "--kmax",
        "2",
        "--grid",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let pi = std::f64::consts::PI;
    let points = v["spectrum"]["flat_points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert!((points[0].as_f64().unwrap() - pi * pi).abs() < 1e-12);
    assert!((points[1].as_f64().unwrap() - 4.0 * pi * pi).abs() < 1e-12);
}

#[test]
fn metric_graphene_first_band() {
    let out = perigraph(&["metric", "graphene", "--jmax", "2", "--grid", "32"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let pi = std::f64::consts::PI;
    let bands = v["spectrum"]["ac_bands"].as_array().unwrap();
    let first = bands
        .iter()
        .find(|b| b["band"] == 1 && b["branch"] == 0)
        .unwrap();
    assert!(first["lower"].as_f64().unwrap().abs() < 1e-12);
    assert!((first["upper"].as_f64().unwrap() - (pi / 2.0) * (pi / 2.0)).abs() < 1e-6);
    // Doubled bottom bounds.
    assert!((v["bottom"]["lower"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-12);
    assert!((v["bottom"]["upper"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn metric_resonant_branch_exits_three() {
    let out = perigraph(&[
        "metric",
        "stanene",
        "--edge",
        "band1-min",
        "--branch",
        "2",
        "--grid",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("resonance"), "stderr: {stderr}");
}

#[test]
fn reports_are_byte_deterministic() {
    for args in [
        vec!["bands", "stanene", "--grid", "16", "--format", "json"],
        vec!["bands", "graphene", "--grid", "8"],
        vec!["effmass", "graphene", "--edge", "bottom", "--sweep", "45"],
        vec!["metric", "graphene", "--jmax", "2", "--grid", "16"],
    ] {
        let a = perigraph(&args);
        let b = perigraph(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "nondeterministic output for {args:?}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join("perigraph-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bands.csv");
    let out = perigraph(&[
        "bands",
        "graphene",
        "--grid",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("theta_1,theta_2,lambda_1,lambda_2"));
}

#[test]
fn normalize_indices_flag_preserves_spectra() {
    let plain = perigraph(&["bands", "stanene", "--grid", "8", "--format", "json"]);
    let normalized = perigraph(&[
        "bands",
        "stanene",
        "--grid",
        "8",
        "--format",
        "json",
        "--normalize-indices",
    ]);
    let a = json(&plain);
    let b = json(&normalized);
    for (x, y) in a["bands"]
        .as_array()
        .unwrap()
        .iter()
        .zip(b["bands"].as_array().unwrap())
    {
        let dx = (x["lower"].as_f64().unwrap() - y["lower"].as_f64().unwrap()).abs();
        let dy = (x["upper"].as_f64().unwrap() - y["upper"].as_f64().unwrap()).abs();
        assert!(dx < 1e-9 && dy < 1e-9);
    }
}
