use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn alkit(args: &[&str], cfg: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_alkit"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = cfg {
        cmd.arg("--config").arg(c);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(v).unwrap()).unwrap();
    p
}

fn poly(terms: &[(&[u32], f64, f64)], n: usize) -> Value {
    json!({
        "n_vars": n,
        "terms": terms.iter().map(|(a, re, im)| json!({"alpha": a, "re": re, "im": im})).collect::<Vec<_>>(),
    })
}

fn decompose_config(div_free: &str, components: Vec<Value>) -> Value {
    json!({
        "version": 1,
        "field": {"n_vars": 2, "components": components},
        "v": [[0.6, 0.0], [0.0, 0.8]],
        "eps": 0.3,
        "div_free": div_free,
        "seed": 7,
        "retries": 4,
    })
}

fn carleman_config(function: Value) -> Value {
    json!({
        "version": 1,
        "function": function,
        "k": 1,
        "tolerance": {"kind": "constant", "value": 1e-2},
        "window": 4.0,
    })
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn missing_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = carleman_config(json!({"kind": "zero"}));
    cfg.as_object_mut().unwrap().remove("window");
    let p = write_config(dir.path(), "c.json", &cfg);
    let o = alkit(&["carleman"], Some(&p), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("window"));
}

#[test]
fn unknown_field_and_version_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = carleman_config(json!({"kind": "zero"}));
    cfg["extra"] = json!(1);
    let p = write_config(dir.path(), "a.json", &cfg);
    assert_eq!(
        alkit(&["carleman"], Some(&p), &dir.path().join("a"))
            .status
            .code(),
        Some(2)
    );
    let mut cfg = carleman_config(json!({"kind": "zero"}));
    cfg["version"] = json!(9);
    let p = write_config(dir.path(), "b.json", &cfg);
    assert_eq!(
        alkit(&["carleman"], Some(&p), &dir.path().join("b"))
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn missing_config_file_and_bad_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = alkit(
        &["decompose"],
        Some(&dir.path().join("nope.json")),
        &dir.path().join("o"),
    );
    assert_eq!(o.status.code(), Some(2));
    let o = alkit(&["flow"], None, &dir.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
    let o = alkit(&["pipeline", "--frobnicate"], None, &dir.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_pipeline_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value = serde_json::to_value(alkit::pipeline::ScenarioConfig::default()).unwrap();
    cfg["radii"] = json!([6.5, 5.5, 5.0]);
    let p = write_config(dir.path(), "p.json", &cfg);
    let o = alkit(&["pipeline"], Some(&p), &dir.path().join("o"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_count_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        dir.path(),
        "c.json",
        &carleman_config(json!({"kind": "zero"})),
    );
    let o = Command::new(env!("CARGO_BIN_EXE_alkit"))
        .args(["carleman", "--config"])
        .arg(&p)
        .arg("--out")
        .arg(dir.path().join("o"))
        .env("AL_KIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn forced_divergence_free_euler_field_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = decompose_config(
        "force",
        vec![
            poly(&[(&[1, 0], 1.0, 0.0)], 2),
            poly(&[(&[0, 1], 1.0, 0.0)], 2),
        ],
    );
    let p = write_config(dir.path(), "d.json", &cfg);
    let o = alkit(&["decompose"], Some(&p), &dir.path().join("o"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DEGENERATE"));
}

#[test]
fn decompose_writes_conditioning_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = decompose_config(
        "auto",
        vec![
            poly(&[(&[0, 2], 1.0, 0.0), (&[1, 1], 0.0, 0.5)], 2),
            poly(&[(&[2, 0], -0.3, 0.0), (&[0, 0], 1.0, 0.0)], 2),
        ],
    );
    let p = write_config(dir.path(), "d.json", &cfg);
    let out = dir.path().join("o");
    let o = alkit(&["decompose"], Some(&p), &out);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(out.join("conditioning.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "degree,dim,shear_count,overshear_count,terms,condition,residual,tolerance,divergence_free"
    );
    assert_eq!(lines.count(), 2);
    let d = read_json(&out.join("decomposition.json"));
    assert!(d["max_residual"].as_f64().unwrap() < 1e-10);
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["subcommand"], "decompose");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = decompose_config("auto", vec![poly(&[(&[0, 1], 1.0, 0.0)], 2), poly(&[], 2)]);
    let p = write_config(dir.path(), "d.json", &cfg);
    let out = dir.path().join("o");
    let o = alkit(&["decompose", "--seed", "99", "--quiet"], Some(&p), &out);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(read_json(&out.join("manifest.json"))["seed"], 99);
}

#[test]
fn zero_function_has_no_stages() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        dir.path(),
        "c.json",
        &carleman_config(json!({"kind": "zero"})),
    );
    let out = dir.path().join("o");
    let o = alkit(&["carleman"], Some(&p), &out);
    assert_eq!(o.status.code(), Some(0));
    let s = read_json(&out.join("summary.json"));
    assert_eq!(s["stages"], 0);
    assert_eq!(s["max_error"], 0.0);
}

#[test]
fn lorentzian_acceptance_table() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        dir.path(),
        "c.json",
        &carleman_config(json!({"kind": "lorentzian", "width": 1.0})),
    );
    let out = dir.path().join("o");
    let o = alkit(&["carleman"], Some(&p), &out);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("acceptance.csv")).unwrap();
    assert!(csv.starts_with("x,error,eps,verdict\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",pass")));
}

#[test]
fn check_reports_flatness_of_the_bump() {
    let dir = tempfile::tempdir().unwrap();
    let iso = serde_json::to_value(alkit::pipeline::ScenarioConfig::default().isotopy).unwrap();
    let points: Vec<Vec<f64>> = (0..12).map(|i| vec![0.4 * i as f64]).collect();
    let cfg = json!({"version": 1, "jet": {"kind": "bump", "isotopy": iso}, "n": 2, "k": 2,
                     "points": points, "tol": 1e-6, "slope": true});
    let p = write_config(dir.path(), "k.json", &cfg);
    let out = dir.path().join("o");
    let o = alkit(&["check"], Some(&p), &out);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let s = read_json(&out.join("summary.json"));
    assert!(s["slope"].as_f64().unwrap() >= 1.8);
    let csv = std::fs::read_to_string(out.join("dbar.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "x1,x2,x3,x4,dbar_1,dbar_2,verdict"
    );
}

#[test]
fn flow_of_random_field_is_first_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "version": 1,
        "isotopy": {"family": "random_field", "n": 2, "degree": 2, "scale": 0.05},
        "v": [[0.6, 0.0], [0.0, 0.8]], "eps": 0.3, "radius": 1.0, "samples": 40, "t_nodes": 4,
        "fit_degree": 2, "ridge": 1e-12, "steps": 16, "scheme": "lie",
        "convergence_steps": [32, 64, 128], "seed": 11,
    });
    let p = write_config(dir.path(), "f.json", &cfg);
    let out = dir.path().join("o");
    let o = alkit(&["flow"], Some(&p), &out);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let csv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "steps,sup_error,ratio");
    let word: alkit::shears::AutomorphismWord =
        serde_json::from_slice(&std::fs::read(out.join("word.json")).unwrap()).unwrap();
    assert!(!word.is_empty());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        (
            "decompose",
            decompose_config(
                "auto",
                vec![
                    poly(&[(&[1, 1], 1.0, 0.2)], 2),
                    poly(&[(&[0, 2], 0.5, 0.0), (&[0, 0], 1.0, 0.0)], 2),
                ],
            ),
        ),
        (
            "carleman",
            carleman_config(json!({"kind": "sine", "frequency": 1.0})),
        ),
        (
            "flow",
            json!({
                "version": 1,
                "isotopy": {"family": "random_field", "n": 2, "degree": 2, "scale": 0.05},
                "v": [[0.6, 0.0], [0.0, 0.8]], "eps": 0.3, "radius": 1.0, "samples": 30, "t_nodes": 3,
                "fit_degree": 2, "ridge": 1e-12, "steps": 8, "scheme": "strang",
                "convergence_steps": [32, 64], "seed": 3,
            }),
        ),
    ];
    for (cmd, cfg) in configs {
        let p = write_config(dir.path(), &format!("{cmd}.json"), &cfg);
        let (a, b) = (
            dir.path().join(format!("{cmd}_a")),
            dir.path().join(format!("{cmd}_b")),
        );
        alkit(&[cmd], Some(&p), &a);
        alkit(&[cmd], Some(&p), &b);
        let ma = read_json(&a.join("manifest.json"));
        let mb = read_json(&b.join("manifest.json"));
        assert_eq!(ma["outputs"], mb["outputs"], "{cmd}");
        assert_eq!(ma["config_digest"], mb["config_digest"]);
        for f in ma["outputs"].as_array().unwrap() {
            let name = f["file"].as_str().unwrap();
            assert_eq!(
                std::fs::read(a.join(name)).unwrap(),
                std::fs::read(b.join(name)).unwrap(),
                "{cmd}/{name}"
            );
        }
    }
}
