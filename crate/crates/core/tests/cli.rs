use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chebdyn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chebdyn")).args(args).current_dir(dir).output().expect("spawn chebdyn")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_reports_the_map_with_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = chebdyn(&["analyze", "--coeffs", "-1,0,1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "analyze");
    assert_eq!(v["map"]["degree"], 4);
    assert!(v.get("raster").is_none_or(Value::is_null));
}

#[test]
fn factored_input_and_newton_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = chebdyn(&["analyze", "--roots", "(1,2);(-1,1)", "--method", "newton"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["input"]["form"], "factored");
    assert_eq!(v["input"]["method"], "newton");
    assert_eq!(v["map"]["degree"], 2);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["analyze", "--coeffs", "1,2,x"][..],
        &["analyze", "--coeffs", "1,1"],
        &["analyze"],
        &["scaling-check", "--coeffs", "-1,0,1", "--lambda", "0"],
        &["basins", "--coeffs", "-1,0,1", "--size", "5x5"],
    ] {
        let out = chebdyn(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn io_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/b.ppm");
    let out = chebdyn(&["basins", "--coeffs", "-1,0,1", "--size", "32x32", "--out", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn scaling_check_passes_for_a_conjugated_quartic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["scaling-check", "--coeffs", "0,-1,0,0,1", "--affine-a", "i", "--affine-b", "-2", "--lambda", "0.5"];
    let out = chebdyn(&args, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.conf");
    fs::write(&cfg, "# quadratic\ncoeffs = -1,0,1\nsize = 40x40\nmax_iter = 50\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = chebdyn(&["basins", "--config", cfg, "--size", "48x32", "--out", "b.ppm"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    assert_eq!(v["raster"]["grid"]["width"], 48);
    assert_eq!(v["raster"]["grid"]["height"], 32);
    assert_eq!(v["raster"]["max_iter"], 50);
    assert_eq!(v["input"]["text"], "-1,0,1");

    let out = chebdyn(&["analyze", "--config", cfg, "--coeffs", "-1,0,0,1"], dir.path());
    assert_eq!(json(&out)["input"]["degree"], 3);

    fs::write(dir.path().join("bad.conf"), "colour = red\n").unwrap();
    let out = chebdyn(&["analyze", "--config", "bad.conf"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn basins_writes_ppm_and_sidecar_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let img = format!("b{threads}.ppm");
        let out = chebdyn(
            &["basins", "--coeffs", "0,-1,0,1", "--size", "96x64", "--threads", threads, "--out", &img],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let bytes = fs::read(dir.path().join(&img)).unwrap();
        let sidecar = fs::read_to_string(dir.path().join(format!("b{threads}.json"))).unwrap();
        outputs.push((bytes, sidecar));
    }
    let (ppm, sidecar) = &outputs[0];
    assert!(ppm.starts_with(b"P6\n96 64\n255\n"));
    assert_eq!(ppm.len(), b"P6\n96 64\n255\n".len() + 96 * 64 * 3);
    assert_eq!(outputs[0], outputs[1]);
    let v: Value = serde_json::from_str(sidecar).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "basins");
    let counts: u64 = v["label_counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(counts + v["nonconv_pixels"].as_u64().unwrap(), 96 * 64);
}

#[test]
fn json_flag_redirects_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = chebdyn(&["symmetry", "--coeffs", "-1,0,0,1", "--size", "120x120", "--json", "s.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "symmetry");
}
