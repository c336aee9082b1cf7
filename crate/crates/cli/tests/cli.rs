use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn coco_lab(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_coco-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("COCO_LAB_TOL")
        .output()
        .expect("spawn coco-lab")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const MINIMAL: &str = r#"{
  "generator": {"name": "rotating_halfplanes", "kernel_radius": 0.2},
  "learners": ["coco_ogd"],
  "T_grid": [16],
  "seeds": [3],
  "output_dir": "out"
}"#;

#[test]
fn minimal_run_emits_four_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    let out = coco_lab(&["run", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run_dir = tmp.path().join("out/runs/rotating_halfplanes_coco_ogd_T16_s3");
    let mut names: Vec<_> = fs::read_dir(&run_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["certificate.json", "regret.json", "summary.json", "trace.csv"]);
    assert!(!tmp.path().join("out/failures.json").exists());

    let header = fs::read_to_string(run_dir.join("trace.csv")).unwrap();
    assert_eq!(
        header.lines().next().unwrap(),
        "t,x_x,x_y,p_norm,w,w_a,w_b,delta_perim,delta_area,violation,loss,active"
    );
    assert_eq!(header.lines().count(), 17);
}

#[test]
fn empty_grid_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"generator": {"name": "rotating_halfplanes", "kernel_radius": 0.2}, "T_grid": []}"#,
    );
    let out = coco_lab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    let manifest: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert!(manifest["error"].as_str().unwrap().contains("T_grid"));
}

#[test]
fn verify_after_run_and_after_tampering() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"generator": {"name": "shrinking_box", "shrink_rate": 0.01}, "T_grid": [64, 128], "seeds": [1, 2], "output_dir": "out"}"#,
    );
    assert!(coco_lab(&["run", &cfg, "--jobs", "2"], tmp.path()).status.success());
    let out = coco_lab(&["verify", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // Verifying twice gives the same answer.
    assert!(coco_lab(&["verify", "out"], tmp.path()).status.success());

    // Inflate one area decrease.
    let trace = tmp.path().join("out/runs/shrinking_box_coco_ogd_T64_s1/trace.csv");
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cols: Vec<String> = lines[5].split(',').map(String::from).collect();
    let inflated: f64 = cols[8].parse::<f64>().unwrap() + 0.25;
    cols[8] = inflated.to_string();
    lines[5] = cols.join(",");
    fs::write(&trace, lines.join("\n") + "\n").unwrap();
    let out = coco_lab(&["verify", "out"], tmp.path());
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T64_s1"));
}

#[test]
fn verify_reports_missing_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    assert!(coco_lab(&["run", &cfg], tmp.path()).status.success());
    let run_dir = tmp.path().join("out/runs/rotating_halfplanes_coco_ogd_T16_s3");
    fs::remove_file(run_dir.join("regret.json")).unwrap();
    let out = coco_lab(&["verify", "out"], tmp.path());
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    assert!(coco_lab(&["run", &cfg, "--out", "a"], tmp.path()).status.success());
    assert!(coco_lab(&["run", &cfg, "--out", "b", "--jobs", "3"], tmp.path()).status.success());
    for f in ["trace.csv", "certificate.json", "regret.json"] {
        let a = fs::read(tmp.path().join("a/runs/rotating_halfplanes_coco_ogd_T16_s3").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b/runs/rotating_halfplanes_coco_ogd_T16_s3").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn sweep_writes_table_and_fits() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{
  "generator": {"name": "rotating_halfplanes", "kernel_radius": 0.2},
  "learners": ["coco_ogd", "unconstrained_ogd"],
  "T_grid": [64, 128, 256],
  "seeds": [0, 1, 2],
  "output_dir": "sweep"
}"#,
    );
    let out = coco_lab(&["sweep", &cfg, "--jobs", "2"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("sweep/sweep.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "generator,learner,T,seed,regret,ccv,bound_ccv,pass,wallclock_ms"
    );
    assert_eq!(csv.lines().count(), 1 + 2 * 3 * 3);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("sweep/sweep.json")).unwrap()).unwrap();
    assert_eq!(json["fits"].as_array().unwrap().len(), 2);
    assert!(json["fits"][0]["ccv_fit"]["slope"].is_number());
}

#[test]
fn sweep_needs_three_horizons() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    assert_eq!(coco_lab(&["sweep", &cfg], tmp.path()).status.code(), Some(2));
}

#[test]
fn seed_override_replaces_seed_list() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    assert!(coco_lab(&["run", &cfg, "--seed-override", "11"], tmp.path()).status.success());
    let runs: Vec<_> = fs::read_dir(tmp.path().join("out/runs")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    assert!(tmp.path().join("out/runs/rotating_halfplanes_coco_ogd_T16_s11").is_dir());
}

#[test]
fn tolerance_env_is_recorded() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    let out = Command::new(env!("CARGO_BIN_EXE_coco-lab"))
        .args(["run", &cfg])
        .current_dir(tmp.path())
        .env("COCO_LAB_TOL", "1e-6")
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("out/runs/rotating_halfplanes_coco_ogd_T16_s3/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["tolerances"]["base"], 1e-6);
}
