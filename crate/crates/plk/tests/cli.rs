use std::path::Path;
use std::process::{Command, Output};

use plk::dto::{InstanceDto, LiftDto, TriangulationDto};
use plk::io::{read_json, to_json};
use plk::report::{RunReport, Status};
use plk_core::lift::LiftConfig;
use serde_json::Value;

fn plk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plk")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn report(out: &Output) -> RunReport {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

/// Text of an emitted file equals its parse, re-serialized.
fn assert_round_trip<T: serde::de::DeserializeOwned + serde::Serialize>(path: &str) -> T {
    let text = std::fs::read_to_string(path).unwrap();
    let value: T = serde_json::from_str(&text).unwrap();
    assert_eq!(to_json(&value), text, "{path}");
    value
}

#[test]
fn absval_pipeline_self_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let (inst, cert, pl, rep) = (p(dir.path(), "inst.json"), p(dir.path(), "cert.json"), p(dir.path(), "pl.json"), p(dir.path(), "r.json"));

    let out = plk(&["example", "absval", "--out", &inst]);
    assert_eq!(code(&out), 0);
    let dto: InstanceDto = assert_round_trip(&inst);
    assert_eq!(dto.lift, LiftDto::ClosedForm { name: "absval_example".into() });

    let out = plk(&["triangulate-lift", &inst, "--out", &cert, "--report", &rep]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_round_trip::<RunReport>(&rep);
    let tri: TriangulationDto = assert_round_trip(&cert);
    // Document -> library value -> document is the identity.
    let (t, _) = tri.to_core().unwrap();
    let cfg = LiftConfig::from(&tri.numeric.config);
    assert_eq!(TriangulationDto::new(tri.instance.clone(), &t, &cfg), tri);

    let out = plk(&["verify", &cert]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.result["failed_entries"], 0);

    let out = plk(&["plify", &cert, "--out", &pl]);
    assert_eq!(code(&out), 0);
    let pl_dto: InstanceDto = assert_round_trip(&pl);
    assert!(matches!(pl_dto.lift, LiftDto::PlTable { .. }));
    let (f, g) = pl_dto.to_core().unwrap();
    assert_eq!(InstanceDto::new(&pl_dto.name, &f, &g).unwrap(), pl_dto);
    assert_eq!(code(&plk(&["verify", &pl])), 0);
    assert_eq!(code(&plk(&["validate", &cert])), 0);
}

#[test]
fn tampered_certificate_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (inst, cert) = (p(dir.path(), "inst.json"), p(dir.path(), "cert.json"));
    assert_eq!(code(&plk(&["example", "absval", "--out", &inst])), 0);
    assert_eq!(code(&plk(&["triangulate-lift", &inst, "--out", &cert])), 0);
    let mut tri: TriangulationDto = read_json(Path::new(&cert)).unwrap();
    let e = &mut tri.certificate[0];
    e.separator.offset = format!("-{}", e.separator.offset.trim_start_matches('-'));
    e.separator.weights = e.separator.weights.iter().map(|w| format!("-{}", w.trim_start_matches('-'))).collect();
    plk::io::write_json(Path::new(&cert), &tri).unwrap();
    let out = plk(&["verify", &cert]);
    let r = report(&out);
    // Either the flipped separator fails, or it coincidentally stays valid.
    assert_eq!(code(&out), if r.status == Status::Pass { 0 } else { 1 });
    assert!(r.status == Status::Pass || !r.witnesses.is_empty());
}

#[test]
fn literal_sign_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let inst = p(dir.path(), "inst.json");
    assert_eq!(code(&plk(&["example", "absval-literal", "--out", &inst])), 0);
    let out = plk(&["triangulate-lift", &inst]);
    assert_ne!(code(&out), 0);
}

#[test]
fn tau_two() {
    let out = plk(&["tau", "2"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r.result["coefficients"], serde_json::json!(["0/1", "-3/4", "0/1", "1/1"]));
}

#[test]
fn chebyshev_three() {
    let r = report(&plk(&["chebyshev", "3"]));
    assert_eq!(r.result["coefficients"], serde_json::json!(["0/1", "-3/1", "0/1", "4/1"]));
}

#[test]
fn exit_codes_are_distinct_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let broken = p(dir.path(), "broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    let wrong = p(dir.path(), "wrong.json");
    std::fs::write(&wrong, r#"{"schema": "plk/1", "kind": "instance", "name": "x"}"#).unwrap();
    let cases: [(&[&str], i32); 6] = [
        (&["tau", "3"], 0),
        (&["isotopy-check", "--r", "2", "--n", "4", "--m", "5", "--sign", "+", "--lift-sign", "-", "--seed", "1"], 1),
        (&["tau"], 2),
        (&["validate", &broken], 3),
        (&["validate", &wrong], 4),
        (&["example", "nope"], 5),
    ];
    for (args, want) in cases {
        let first = code(&plk(args));
        assert_eq!(first, want, "{args:?}");
        assert_eq!(code(&plk(args)), first, "{args:?}");
    }
    // Missing files are a runtime error.
    assert_eq!(code(&plk(&["verify", &p(dir.path(), "missing.json")])), 6);
}

#[test]
fn random_verbs_need_a_seed() {
    for args in [&["example", "zigzag"][..], &["delta", "2", "--count", "3"], &["product-coords", "--r", "2"], &["connect-tau", "3"]] {
        assert_eq!(code(&plk(args)), 2, "{args:?}");
    }
}

#[test]
fn seeded_runs_repeat() {
    let a = plk(&["delta", "3", "--count", "4", "--seed", "11"]);
    let b = plk(&["delta", "3", "--count", "4", "--seed", "11"]);
    assert_eq!(report(&a).result, report(&b).result);
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = (p(dir.path(), "x.json"), p(dir.path(), "y.json"));
    plk(&["example", "fold", "--seed", "4", "--out", &x]);
    plk(&["example", "fold", "--seed", "4", "--out", &y]);
    assert_eq!(std::fs::read(&x).unwrap(), std::fs::read(&y).unwrap());
    assert_round_trip::<InstanceDto>(&x);
}

#[test]
fn plot_series() {
    let dir = tempfile::tempdir().unwrap();
    let g = p(dir.path(), "g.csv");
    assert_eq!(code(&plk(&["example", "absval", "--plot", "g-graph", "--plot-out", &g])), 0);
    let text = std::fs::read_to_string(&g).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,g");
    assert_eq!(lines.len(), 10_001);

    let d = p(dir.path(), "d.csv");
    assert_eq!(code(&plk(&["delta", "2", "--count", "20", "--seed", "1", "--plot", "delta", "--plot-out", &d])), 0);
    let text = std::fs::read_to_string(&d).unwrap();
    assert!(text.starts_with("x1,x2,t\n"));
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        // t_1 = −(x₁² + x₁x₂ + x₂²) on Δ_{f_2}.
        assert!((v[2] + v[0] * v[0] + v[0] * v[1] + v[1] * v[1]).abs() < 1e-12);
    }

    let roots = p(dir.path(), "roots.csv");
    assert_eq!(code(&plk(&["connect-tau", "4", "--seed", "2", "--plot", "roots", "--plot-out", &roots])), 0);
    let header = std::fs::read_to_string(&roots).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "stage,t,root0,root1,root2,root3,root4");

    assert_eq!(code(&plk(&["example", "absval", "--plot", "nope", "--plot-out", &g])), 2);
    assert_eq!(code(&plk(&["tau", "2", "--plot", "delta", "--plot-out", &g])), 2);
}

#[test]
fn morin_verbs() {
    let r = report(&plk(&["product-coords", "--r", "2", "--n", "4", "--m", "5", "--first=-1,0,2,1", "--second=-1,0,2,-1"]));
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.result["entries"][0]["verified"], Value::Bool(true));

    let r = report(&plk(&["connect-tau", "2", "--x1", "1/2", "--x2", "-1/3"]));
    assert_eq!(r.status, Status::Pass, "{:?}", r.message);
    let end = &r.numeric["end_pair"];
    let (a, b) = (end[0].as_f64().unwrap(), end[1].as_f64().unwrap());
    assert!((a * a + a * b + b * b - 0.75).abs() < 1e-10);

    for (sign, want) in [("+", "+"), ("-", "-")] {
        let r = report(&plk(&["classify", "5", "--sign", sign, "--amp", "0.05", "--freq", "3"]));
        assert_eq!(r.result["epsilon"], want);
    }
    let r = report(&plk(&["isotopy-check", "--r", "3", "--n", "6", "--m", "7", "--sign", "-", "--shear", "0.2", "--seed", "5"]));
    assert_eq!(r.status, Status::Pass);
}

#[test]
fn homotopy_and_stability_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let (inst, cert) = (p(dir.path(), "inst.json"), p(dir.path(), "cert.json"));
    plk(&["example", "absval", "--out", &inst]);
    plk(&["triangulate-lift", &inst, "--out", &cert]);
    let out = plk(&["homotopy", &cert, "--random", "4", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out).result["runs"].as_array().unwrap().len(), 4);
    assert_eq!(code(&plk(&["homotopy", &cert, "--t", "1/2"])), 0);
    // The cube has one coordinate per dimension of the source.
    assert_eq!(code(&plk(&["homotopy", &cert, "--t", "1/2,1/4"])), 6);
    let out = plk(&["stability", &cert, "--seed", "1", "--trials", "10"]);
    assert_eq!(code(&out), 0);
}
