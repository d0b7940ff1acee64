use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use simcontract::interconnect::series_gar;
use simcontract::{GuaranteeSystem, Matrix};

fn example() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models/example.json")
}

fn run(args: &[&str]) -> Output {
    run_with_env(args, &[])
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_simcontract"));
    cmd.args(args)
        .env_remove("SIMCONTRACT_TOL_RANK")
        .env_remove("SIMCONTRACT_TOL_INCL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn write_model(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn ex() -> String {
    example().display().to_string()
}

fn matrix(v: &Value) -> Matrix {
    if let Some(z) = v.get("zeros") {
        let d: Vec<usize> = serde_json::from_value(z.clone()).unwrap();
        return Matrix::zeros(d[0], d[1]);
    }
    let rows = v.as_array().unwrap();
    let cols = rows[0].as_array().unwrap().len();
    let data: Vec<f64> = rows
        .iter()
        .flat_map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
        .collect();
    Matrix::from_row_slice(rows.len(), cols, &data)
}

fn integrator_guarantee() -> GuaranteeSystem {
    GuaranteeSystem::from_blocks(
        Matrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
        Matrix::from_row_slice(2, 1, &[1.0, 0.0]),
        Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
        Matrix::from_row_slice(1, 2, &[0.0, 1.0]),
        Matrix::zeros(0, 2),
    )
    .unwrap()
}

#[test]
fn composable_pair_exits_zero() {
    let out = run(&["check", "composable", &ex(), "C", "C"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("composable C C: true"));
}

#[test]
fn failed_simulation_exits_one() {
    let out = run(&["check", "simulation", &ex(), "freeDeriv", "frozen"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("side condition fails"));
}

#[test]
fn dimension_mismatch_exits_three() {
    let out = run(&["check", "implements", &ex(), "plant2", "C"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("u_dim"), "{}", stderr(&out));
}

#[test]
fn contract_checks_on_example() {
    for (kind, ops, expected) in [
        ("implements", ["plant", "C"].as_slice(), 0),
        ("consistency", ["C"].as_slice(), 0),
        ("refines", ["C", "C"].as_slice(), 0),
        ("compatible", ["frozen", "C"].as_slice(), 0),
        ("composable", ["C", "Cfrozen"].as_slice(), 1),
        ("simulation", ["AmeetG", "G"].as_slice(), 0),
        ("simulation", ["frozen", "freeDeriv"].as_slice(), 0),
    ] {
        let file = ex();
        let mut args = vec!["check", kind, file.as_str()];
        args.extend_from_slice(ops);
        let out = run(&args);
        assert_eq!(code(&out), expected, "{kind} {ops:?}: {}", stderr(&out));
    }
}

#[test]
fn usage_and_kind_errors_exit_two() {
    let e = ex();
    for args in [
        vec!["check", "simulation", "X", "a", "b"],
        vec!["check", "simulation", &e, "A", "nope"],
        vec!["check", "implements", &e, "A", "C"],
        vec!["check", "consistency", &e, "C", "C"],
        vec!["check", "bogus", &e, "C"],
        vec!["inspect", &e, "plant"],
    ] {
        assert_eq!(code(&run(&args)), 2, "{args:?}");
    }
}

#[test]
fn parse_errors_name_their_location() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = write_model(
        &dir,
        "ragged.json",
        r#"{"systems": {"bad": {"kind": "constrained", "A": [[0, 1], [0]], "C": [[1, 0]]}}}"#,
    );
    let out = run(&["inspect", ragged.to_str().unwrap(), "bad"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("systems.bad.A"), "{}", stderr(&out));
    assert!(stderr(&out).contains("ragged"), "{}", stderr(&out));

    let missing = write_model(
        &dir,
        "missing.json",
        r#"{"systems": {"G": {"kind": "guarantee", "A": [[0]], "Cu": [[1]], "Cy": [[1]]}},
            "contracts": {"C": {"assumption": "missing", "guarantee": "G"}}}"#,
    );
    let out = run(&["check", "consistency", missing.to_str().unwrap(), "C"]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("unresolved reference 'missing'"),
        "{}",
        stderr(&out)
    );

    let out = run(&["check", "consistency", "/nonexistent/model.json", "C"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn compose_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cc.json");
    let out = run(&["compose", &ex(), "C", "C", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["contracts"]["C->C"]["assumption"], "A");
    let g = &doc["systems"]["G->G"];
    let expected = series_gar(&integrator_guarantee(), &integrator_guarantee()).unwrap();
    assert_eq!(matrix(&g["A"]), expected.base.a);
    assert_eq!(matrix(&g["G"]), expected.base.g);
    assert_eq!(matrix(&g["Cu"]), expected.cu());
    assert_eq!(matrix(&g["Cy"]), expected.cy());
    assert_eq!(matrix(&g["H"]), expected.base.h);

    let printed_a = [
        0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 1., 0.,
    ];
    assert_eq!(matrix(&g["A"]), Matrix::from_row_slice(4, 4, &printed_a));
    let printed_g = [1., 0., 0., 0., 0., 1., 0., 0.];
    assert_eq!(matrix(&g["G"]), Matrix::from_row_slice(4, 2, &printed_g));
    assert_eq!(
        matrix(&g["H"]),
        Matrix::from_row_slice(1, 4, &[0., 1., -1., 0.])
    );

    let p = path.to_str().unwrap();
    for args in [
        vec!["check", "consistency", p, "C->C"],
        vec!["inspect", p, "G->G", "--exact"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn composed_guarantee_is_a_double_integrator() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cc.json");
    run(&["compose", &ex(), "C", "C", "-o", path.to_str().unwrap()]);
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let base: Value = serde_json::from_str(&std::fs::read_to_string(example()).unwrap()).unwrap();
    doc["systems"]["doubleIntegrator"] = base["systems"]["doubleIntegrator"].clone();
    doc["systems"]["G"] = base["systems"]["G"].clone();
    let merged = write_model(&dir, "merged.json", &doc.to_string());
    let m = merged.to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "check",
            "simulation",
            m,
            "G->G",
            "doubleIntegrator"
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "check",
            "simulation",
            m,
            "doubleIntegrator",
            "G->G"
        ])),
        0
    );
    let forward = run(&["check", "simulation", m, "G->G", "G"]);
    let backward = run(&["check", "simulation", m, "G", "G->G"]);
    assert!(code(&forward) == 1 || code(&backward) == 1);
}

#[test]
fn compose_rejects_non_composable_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = run(&[
        "compose",
        &ex(),
        "C",
        "Cfrozen",
        "-o",
        path.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(code(&out), 1);
    assert!(!path.exists());
    let j = json(&out);
    assert_eq!(j["verdict"], false);
    assert_eq!(j["checks"][0]["holds"], false);
    assert!(j["output"].is_null());
}

#[test]
fn compose_keeps_float_entries() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        &dir,
        "float.json",
        r#"{"systems": {
            "A": {"kind": "constrained", "A": [[0]], "G": [[1]], "C": [[1]]},
            "G": {"kind": "guarantee", "A": [[0, 0], [0.1, -0.3]], "G": [[1], [0]],
                  "Cu": [[1, 0]], "Cy": [[0, 0.7]]}
        }, "contracts": {"C": {"assumption": "A", "guarantee": "G"}}}"#,
    );
    let path = dir.path().join("out.json");
    let out = run(&[
        "compose",
        model.to_str().unwrap(),
        "C",
        "C",
        "-o",
        path.to_str().unwrap(),
        "--name",
        "CC",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("floating-point"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let g = GuaranteeSystem::from_blocks(
        Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.1, -0.3]),
        Matrix::from_row_slice(2, 1, &[1.0, 0.0]),
        Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
        Matrix::from_row_slice(1, 2, &[0.0, 0.7]),
        Matrix::zeros(0, 2),
    )
    .unwrap();
    let expected = series_gar(&g, &g).unwrap();
    let composed = &doc["systems"]["G->G"];
    assert_eq!(matrix(&composed["A"]), expected.base.a);
    assert_eq!(matrix(&composed["H"]), expected.base.h);
    assert_eq!(
        code(&run(&[
            "inspect",
            path.to_str().unwrap(),
            "G->G",
            "--exact"
        ])),
        2
    );
}

#[test]
fn inspect_reports_consistent_subspace() {
    let out = run(&["inspect", &ex(), "AmeetG", "--exact", "--json"]);
    assert_eq!(code(&out), 0);
    let j = json(&out);
    assert_eq!(j["consistent_dim"], 2);
    assert_eq!(j["exact_dim"], 2);
    assert_eq!(j["basis"]["rows"], 3);
    assert_eq!(j["basis"]["cols"], 2);

    let j = json(&run(&["inspect", &ex(), "doubleIntegrator", "--json"]));
    assert_eq!(j["consistent_dim"], 3);
    assert!(j["exact_dim"].is_null());

    let out = run(&["inspect", &ex(), "decay", "--exact"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("exact dim 1 (agrees)"));
}

#[test]
fn exact_on_float_system_exits_two() {
    let out = run(&["inspect", &ex(), "decayFloat", "--exact"]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("floating-point entries"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn validate_example_relation() {
    let out = run(&[
        "validate",
        "simulation",
        &ex(),
        "AmeetG",
        "G",
        "--trials",
        "50",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("pass over 50 trials"));

    let out = run(&[
        "validate",
        "implements",
        &ex(),
        "plant",
        "C",
        "--trials",
        "10",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn validate_false_claim_runs_no_trials() {
    let out = run(&[
        "validate",
        "simulation",
        &ex(),
        "freeDeriv",
        "frozen",
        "--json",
    ]);
    assert_eq!(code(&out), 1);
    let j = json(&out);
    assert_eq!(j["verdict"], false);
    assert_eq!(j["validations"].as_array().unwrap().len(), 0);
}

#[test]
fn json_reports_are_byte_identical() {
    for args in [
        vec!["check", "composable", "C", "C"],
        vec!["check", "implements", "plant", "C"],
        vec![
            "validate",
            "composable",
            "C",
            "C",
            "--trials",
            "8",
            "--seed",
            "7",
        ],
    ] {
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        full.insert(2, ex());
        full.push("--json".into());
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        let a = run(&refs);
        let b = run(&refs);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn json_report_layout() {
    let j = json(&run(&[
        "check",
        "implements",
        &ex(),
        "plant",
        "C",
        "--json",
    ]));
    let keys: Vec<&str> = j.as_object().unwrap().keys().map(String::as_str).collect();
    let mut expected = vec![
        "checks",
        "command",
        "constructed",
        "kind",
        "operands",
        "tolerance",
        "verdict",
    ];
    expected.sort_unstable();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, expected);
    let check = &j["checks"][0];
    assert_eq!(check["name"], "A⋏Σ ≼ G");
    assert_eq!(check["holds"], true);
    assert_eq!(check["side_condition_ok"], true);
    assert_eq!(check["fullness_gap"], 0);
    let rel = &check["relation"];
    let (rows, cols) = (rel["rows"].as_u64().unwrap(), rel["cols"].as_u64().unwrap());
    assert_eq!((rows, cols), (4, 2));
    assert_eq!(rel["data"].as_array().unwrap().len() as u64, rows * cols);
    assert_eq!(j["constructed"][0]["name"], "A⋏Σ");
    assert_eq!(j["constructed"][0]["state_dim"], 2);

    let text = stdout(&run(&[
        "check",
        "implements",
        &ex(),
        "plant",
        "C",
        "--json",
    ]));
    let verdict = text.find("\"verdict\"").unwrap();
    assert!(text.find("\"command\"").unwrap() < verdict);
    assert!(verdict < text.find("\"checks\"").unwrap());
    assert!(text.contains("\"rank_rel\": 1.0000000000000000e-10"));
}

#[test]
fn tolerance_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(example()).unwrap();
    let text = text.replacen(
        '{',
        r#"{"tolerance": {"rank_rel": 1e-9, "inclusion": 1e-7},"#,
        1,
    );
    let model = write_model(&dir, "tol.json", &text);
    let m = model.to_str().unwrap();
    let tol = |args: &[&str], env: &[(&str, &str)]| {
        let mut full = vec!["check", "consistency", m, "C", "--json"];
        full.extend_from_slice(args);
        let j = json(&run_with_env(&full, env));
        (
            j["tolerance"]["rank_rel"].as_f64().unwrap(),
            j["tolerance"]["inclusion"].as_f64().unwrap(),
        )
    };
    assert_eq!(tol(&[], &[]), (1e-9, 1e-7));
    assert_eq!(
        tol(&[], &[("SIMCONTRACT_TOL_RANK", "1e-11")]),
        (1e-11, 1e-7)
    );
    assert_eq!(
        tol(
            &["--tol-rank", "1e-12"],
            &[("SIMCONTRACT_TOL_RANK", "1e-11")]
        ),
        (1e-12, 1e-7)
    );
    assert_eq!(tol(&["--tol-incl", "1e-6"], &[]), (1e-9, 1e-6));
    let j = json(&run(&["check", "consistency", &ex(), "C", "--json"]));
    assert_eq!(j["tolerance"]["inclusion"].as_f64().unwrap(), 1e-8);
    assert_eq!(
        code(&run(&["check", "consistency", m, "C", "--tol-incl", "2"])),
        2
    );
}
