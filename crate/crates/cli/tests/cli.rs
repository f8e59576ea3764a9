use std::process::{Command, Output};

use weylcheck::identities::{IdentityId, Verdict};
use weylcheck::runner::RunReport;

fn weylcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn small_verify_exits_zero() {
    let out = weylcheck(&["verify", "--points", "3", "--model", "rw_flat:4", "--model", "twisted_n4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("seed 42, 3 points per model"));
    assert!(text.contains("== rw_flat(n=4"));
    assert!(text.contains("== twisted_n4"));
    assert!(text.contains("torse_forming"));
}

#[test]
fn impossible_tolerance_exits_one() {
    let out = weylcheck(&[
        "verify", "--points", "2", "--model", "twisted_generic:5", "--tolerance", "adati=1e-30",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stdout(&out).contains("<-- unexpected"));
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["verify", "--model", "bogus"],
        &["verify", "--tolerance", "no_such_identity=1e-9"],
        &["verify", "--tolerance", "adati=-1"],
        &["verify", "--format", "yaml"],
        &["verify", "--points", "0"],
        &["frobnicate"],
        &["tensor-dump", "--model", "rw_flat", "--field", "nope"],
        &["tensor-dump", "--model", "rw_flat", "--point", "1,2"],
    ];
    for args in cases {
        let out = weylcheck(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty(), "{args:?}");
    }
}

#[test]
fn bad_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "points = 3\nunknown_key = true\n").unwrap();
    let out = weylcheck(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:"));

    let missing = dir.path().join("missing.toml");
    let out = weylcheck(&["verify", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    let report_path = dir.path().join("report.json");
    std::fs::write(
        &config,
        format!(
            r#"
points = 4
seed = 7
output_format = "structured"
output_path = "{}"

[tolerances]
adati = 1e-7

[[models]]
name = "rw_flat"
n = 5
parameters = {{ profile = "power" }}
"#,
            report_path.display()
        ),
    )
    .unwrap();
    let out = weylcheck(&["verify", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("wrote "));
    let report = RunReport::from_json(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.seed, 7);
    assert_eq!(report.points, 4);
    assert_eq!(report.models.len(), 1);
    let adati = report.find("rw_flat", 5, IdentityId::Adati).unwrap();
    assert_eq!(adati.tolerance, 1e-7);
    assert_eq!(adati.points_tested, 4);
}

#[test]
fn fixed_seed_output_is_byte_identical() {
    let args = ["verify", "--points", "4", "--seed", "9", "--format", "structured", "--model", "twisted_generic:5"];
    let a = weylcheck(&args);
    let b = weylcheck(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = weylcheck(&["verify", "--points", "4", "--seed", "10", "--format", "structured", "--model", "twisted_generic:5"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn structured_report_round_trips() {
    let out = weylcheck(&["verify", "--points", "3", "--format", "json", "--model", "grw_product_spheres"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let report = RunReport::from_json(&text).unwrap();
    assert_eq!(report.to_json(), text.trim_end());
    let r = report.find("grw_product_spheres", 5, IdentityId::PurelyElectricDivergenceFree).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn tensor_dump_reports_expansion_rate() {
    let out = weylcheck(&["tensor-dump", "--model", "rw_flat", "--field", "phi", "--format", "structured"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["model"], "rw_flat");
    assert_eq!(doc["n"], 4);
    let phi = doc["fields"]["phi"]["components"][0].as_f64().unwrap();
    assert!((phi - 0.3).abs() < 1e-14);
    assert_eq!(doc["fields"].as_object().unwrap().len(), 1);
}

#[test]
fn tensor_dump_accepts_explicit_point() {
    let out = weylcheck(&[
        "tensor-dump", "--model", "rw_flat", "--n", "5", "--param", "H=0.5", "--point", "-0.5,0.1,0.2,0.3,0.4",
        "--field", "phi", "--field", "xi",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("at (-0.5, 0.1, 0.2, 0.3, 0.4)"));
    let value = |name: &str| -> f64 {
        let prefix = format!("{name} = ");
        text.lines().find_map(|l| l.strip_prefix(prefix.as_str())).unwrap().parse().unwrap()
    };
    assert!((value("phi") - 0.5).abs() < 1e-14);
    // xi = (n - 1) H^2 for an exponential scale factor.
    assert!((value("xi") - 1.0).abs() < 1e-13);
}

#[test]
fn models_list_names_every_builtin() {
    let out = weylcheck(&["models-list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["minkowski", "rw_flat", "grw_product_spheres", "twisted_generic", "twisted_n4", "non_twisted_perturbed"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    let json = weylcheck(&["models-list", "--format", "structured"]);
    let entries: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert!(entries.as_array().unwrap().len() >= 6);
}
