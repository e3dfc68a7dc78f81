use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fraclap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclap"))
        .args(args)
        .arg("--output")
        .arg(out)
        .env_remove("FRACLAP_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_values(path: &Path) -> Vec<(String, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (a, v) = l.split_once(',').unwrap();
            (a.to_string(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn tree_counts_cubes() {
    let dir = TempDir::new().unwrap();
    let o = fraclap(&["tree", "--J", "2"], dir.path());
    assert_eq!(code(&o), 0);
    let t = json(&dir.path().join("tree.json"));
    // 1 + 3 + 9
    assert_eq!(t["cubes"].as_array().unwrap().len(), 13);
    assert_eq!(t["cubes"][1]["measure_exact"], "1/3");
}

#[test]
fn halfline_tree_has_no_exact_measure() {
    let dir = TempDir::new().unwrap();
    let o = fraclap(&["tree", "--model", "halfline", "--J", "2"], dir.path());
    assert_eq!(code(&o), 0);
    let t = json(&dir.path().join("tree.json"));
    assert!(t["cubes"][0]["measure_exact"].is_null());
}

#[test]
fn green_dyadic_single_level_pattern() {
    let dir = TempDir::new().unwrap();
    let o = fraclap(
        &["green", "--mode", "dyadic", "--sigma", "0.5", "--J", "1", "--lambda", "1"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = csv_values(&dir.path().join("green.csv"));
    let expected = [("1:1", 2.0), ("1:2", -1.0), ("1:3", -1.0)];
    assert_eq!(g.len(), 3);
    for ((a, v), (ea, ev)) in g.iter().zip(expected) {
        assert_eq!(a, ea);
        assert!((v - ev).abs() < 1e-12, "{a}: {v}");
    }
    let meta = json(&dir.path().join("green.json"));
    assert_eq!(meta["factor_convention"], "B=2<Du,v>");
    assert_eq!(meta["sigma"], 0.5);
    assert!(dir.path().join("green_plot.csv").exists());
}

#[test]
fn green_metric_residual_within_tolerance() {
    let dir = TempDir::new().unwrap();
    let o = fraclap(
        &["green", "--mode", "metric", "--s", "0.9", "--J", "4", "--x", "4:1111"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let meta = json(&dir.path().join("green.json"));
    assert!(meta["residualNorm"].as_f64().unwrap() <= 1e-8);
    assert_eq!(meta["x"], "4:1111");
    assert_eq!(csv_values(&dir.path().join("green.csv")).len(), 81);
}

#[test]
fn green_below_threshold_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = fraclap(&["green", "--mode", "metric", "--s", "0.5"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma/2"));
    assert!(!dir.path().join("green.json").exists());
}

#[test]
fn green_rejects_non_leaf_point() {
    let dir = TempDir::new().unwrap();
    let o = fraclap(&["green", "--mode", "dyadic", "--sigma", "0.5", "--J", "3", "--x", "1:1"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn transform_of_constant_has_no_wavelet_content() {
    let dir = TempDir::new().unwrap();
    let o = fraclap(&["transform", "--J", "3", "--function", "one"], dir.path());
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("decomposition.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("cube_address,level,cube_measure,wavelet_index,coefficient")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // top scaling row, then two wavelets per parent cube
    assert_eq!(rows.len(), 1 + 2 * (1 + 3 + 9));
    assert_eq!(rows[0][3], "-1");
    assert!((rows[0][4].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    for r in &rows[1..] {
        assert!(r[4].parse::<f64>().unwrap().abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&fraclap(&["verify", "haar", "--J", "4"], dir.path())), 0);
    let o = fraclap(
        &["verify", "coercivity", "--lambda", "0.34", "--sigma", "0.5", "--J", "4"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let report = json(&dir.path().join("verify_coercivity.json"));
    assert_eq!(report["pass"], true);
    // s = 0 diverges under refinement
    let o = fraclap(&["verify", "lemma1", "--s", "0"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    assert_eq!(json(&dir.path().join("verify_lemma1.json"))["pass"], false);
}

#[test]
fn extra_parameters_are_rejected() {
    let dir = TempDir::new().unwrap();
    let o = fraclap(&["tree", "--J", "2", "--s", "0.3"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("s"));
    let o = fraclap(&["energy", "--mode", "dyadic", "--s", "0.3"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn unwritable_output_is_an_error() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = fraclap(&["tree", "--J", "1"], &blocker.join("sub"));
    assert_eq!(code(&o), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["green", "--mode", "ball", "--sigma", "0.4", "--J", "3", "--lambda", "0.2"];
    assert_eq!(code(&fraclap(&args, a.path())), 0);
    let mut more = args.to_vec();
    more.extend(["--workers", "3"]);
    assert_eq!(code(&fraclap(&more, b.path())), 0);
    for f in ["green.csv", "green_plot.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let e = ["energy", "--mode", "metric", "--s", "0.3", "--J", "4", "--seed", "7"];
    assert_eq!(code(&fraclap(&e, a.path())), 0);
    assert_eq!(code(&fraclap(&e, b.path())), 0);
    assert_eq!(
        fs::read(a.path().join("energy.json")).unwrap(),
        fs::read(b.path().join("energy.json")).unwrap()
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "J = 1\nmodel = \"sierpinski\"\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    assert_eq!(code(&fraclap(&["tree", "--config", cfg_s], dir.path())), 0);
    assert_eq!(json(&dir.path().join("tree.json"))["cubes"].as_array().unwrap().len(), 4);
    assert_eq!(code(&fraclap(&["tree", "--config", cfg_s, "--J", "2"], dir.path())), 0);
    assert_eq!(json(&dir.path().join("tree.json"))["cubes"].as_array().unwrap().len(), 13);

    fs::write(&cfg, "J = 1\nbogus = 3\n").unwrap();
    assert_eq!(code(&fraclap(&["tree", "--config", cfg_s], dir.path())), 2);
}

#[test]
fn dyadic_quadrature_and_haar_energy_differ() {
    let dir = TempDir::new().unwrap();
    let base = ["energy", "--mode", "dyadic", "--sigma", "0.5", "--J", "4", "--seed", "3"];
    assert_eq!(code(&fraclap(&base, dir.path())), 0);
    let mut haar = base.to_vec();
    haar.extend(["--via", "haar"]);
    assert_eq!(code(&fraclap(&haar, dir.path())), 0);
    let q = json(&dir.path().join("energy.json"))["energy"].as_f64().unwrap();
    let h = json(&dir.path().join("energy_haar.json"))["energy"].as_f64().unwrap();
    // the pairwise sum weights each wavelet by 2(mu^-2sigma + tau), not mu^-2sigma
    let ratio = q / h;
    assert!(ratio > 2.0 && ratio < 3.5, "ratio {ratio}");
}

#[test]
fn haar_route_needs_dyadic_mode() {
    let dir = TempDir::new().unwrap();
    let o = fraclap(&["energy", "--mode", "metric", "--s", "0.3", "--via", "haar"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn output_defaults_to_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fraclap"))
        .args(["tree", "--J", "1"])
        .env("FRACLAP_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("tree.json").exists());
}
