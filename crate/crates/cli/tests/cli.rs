use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::NamedTempFile;

fn qudit_ec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qudit-ec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn temp_file(contents: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

fn ghz_error_file() -> NamedTempFile {
    temp_file(r#"{"deltas": [0.0, 0.39269908169872414], "p_err": 0, "q_err": [0, 0]}"#)
}

#[test]
fn discriminate_ghz() {
    let out = qudit_ec(&[
        "discriminate",
        "2:3:1:1,0",
        "--shots",
        "8192",
        "--seed",
        "7",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["inferred"], "2:3:1:1,0");
    assert_eq!(v["name"], "Ψ-010");
    assert_eq!(v["phase"]["counts"]["1"], 8192);
    assert_eq!(v["post_state_fidelity"].as_f64().unwrap(), 1.0);
}

#[test]
fn discriminate_bell_histogram() {
    let out = qudit_ec(&["discriminate", "2:2:0:0", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["phase"]["counts"], serde_json::json!({"0": 8192}));
    assert_eq!(v["parities"][0]["modal"], "0");
}

#[test]
fn discriminate_rejects_bad_labels() {
    let out = qudit_ec(&["discriminate", "2:3:9:0,0"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("phase 9"));
    assert_eq!(code(&qudit_ec(&["discriminate", "nonsense"])), 1);
    assert_eq!(code(&qudit_ec(&["discriminate"])), 1);
}

#[test]
fn correct_bell_and_ghz() {
    let bell = temp_file(r#"{"deltas": [0.0, 0.39269908169872414], "p_err": 0, "q_err": [0]}"#);
    let out = qudit_ec(&[
        "correct",
        "2:2:1:1",
        "--error",
        bell.path().to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["restored"].as_bool().unwrap());

    let ghz = ghz_error_file();
    let out = qudit_ec(&[
        "correct",
        "2:3:1:1,0",
        "--error",
        ghz.path().to_str().unwrap(),
        "--dump-states",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["parity_diagnostic"], "10");
    let last = &v["stages"][3]["state"];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((last["re"][2].as_f64().unwrap() - h).abs() < 1e-12);
    assert!((last["re"][5].as_f64().unwrap() + h).abs() < 1e-12);
}

#[test]
fn correct_partial_steps_and_errors() {
    let clean = temp_file(r#"{"deltas": [0.0, 0.0], "p_err": 1, "q_err": [1, 0]}"#);
    let path = clean.path().to_str().unwrap();
    let out = qudit_ec(&[
        "correct",
        "2:3:1:1,0",
        "--error",
        path,
        "--steps",
        "2",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["phase_difference"], 0);

    // Step 1 alone leaves a phase-free state that differs from the target.
    let ghz = ghz_error_file();
    let out = qudit_ec(&[
        "correct",
        "2:3:1:1,0",
        "--error",
        ghz.path().to_str().unwrap(),
        "--steps",
        "1",
    ]);
    assert_eq!(code(&out), 4);

    let malformed = temp_file("{\"deltas\": [0.0]");
    let out = qudit_ec(&[
        "correct",
        "2:3:1:1,0",
        "--error",
        malformed.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);

    let wrong_len = temp_file(r#"{"deltas": [0.0, 0.0, 0.0], "p_err": 0, "q_err": [0, 0]}"#);
    let out = qudit_ec(&[
        "correct",
        "2:3:1:1,0",
        "--error",
        wrong_len.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);

    assert_eq!(
        code(&qudit_ec(&[
            "correct",
            "2:3:1:1,0",
            "--error",
            "/no/such/file.json"
        ])),
        1
    );
    assert_eq!(
        code(&qudit_ec(&[
            "correct",
            "2:3:1:1,0",
            "--error",
            path,
            "--steps",
            "4"
        ])),
        1
    );
}

#[test]
fn tomography_exact_and_sampled() {
    let out = qudit_ec(&[
        "tomography",
        "2:3:1:1,0",
        "--wires",
        "0,1,2",
        "--exact",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let re = &v["rho_e"]["re"];
    assert!((re[2][2].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!((re[2][5].as_f64().unwrap() + 0.5).abs() < 1e-10);
    assert!((re[0][0].as_f64().unwrap()).abs() < 1e-10);

    let out = qudit_ec(&[
        "tomography",
        "2:2:1:1",
        "--shots",
        "8192",
        "--seed",
        "1",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["metrics"]["fidelity_pure"].as_f64().unwrap() >= 0.99);
    assert!(v["metrics"]["modulus"]["avg"].as_f64().unwrap() <= 0.01);
}

#[test]
fn tomography_of_circuit_file() {
    let circuit = temp_file("REGISTER 2 3\nX 0\nH 0\nCX 0 1\nCX 0 2\nX 1\n");
    let out = qudit_ec(&[
        "tomography",
        "--circuit",
        circuit.path().to_str().unwrap(),
        "--exact",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    assert!((json(&out)["metrics"]["fidelity_pure"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let broken = temp_file("REGISTER 2 2\nFOO 0\n");
    let out = qudit_ec(&["tomography", "--circuit", broken.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn tomography_rejects_bad_wires_and_qudits() {
    assert_eq!(
        code(&qudit_ec(&["tomography", "2:3:1:1,0", "--wires", "9"])),
        1
    );
    assert_eq!(code(&qudit_ec(&["tomography", "3:2:0:0"])), 1);
}

#[test]
fn qudit_verify_runs_and_guards() {
    let out = qudit_ec(&[
        "qudit-verify",
        "--d",
        "3",
        "--n",
        "3",
        "--trials",
        "200",
        "--seed",
        "5",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["passed"], 200);

    let out = qudit_ec(&[
        "qudit-verify",
        "--d",
        "2",
        "--n",
        "2",
        "--trials",
        "all",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["passed"], 4 * 4 * 16);

    assert_eq!(
        code(&qudit_ec(&["qudit-verify", "--d", "10", "--n", "7"])),
        1
    );
    assert_eq!(
        code(&qudit_ec(&[
            "qudit-verify",
            "--d",
            "3",
            "--n",
            "2",
            "--trials",
            "zero"
        ])),
        1
    );
}

#[test]
fn presets_listed_and_pass() {
    let help = qudit_ec(&["preset", "--help"]);
    assert_eq!(code(&help), 0);
    let text = String::from_utf8_lossy(&help.stdout);
    for name in qudit_ec::experiments::PRESET_NAMES {
        assert!(text.contains(name), "{name} missing from help");
        let out = qudit_ec(&["preset", name, "--seed", "3", "--json"]);
        assert_eq!(
            code(&out),
            0,
            "{name}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
        assert!(json(&out)["passed"].as_bool().unwrap());
    }
    assert_eq!(code(&qudit_ec(&["preset", "fig4"])), 1);
}

#[test]
fn preset_readouts() {
    for (name, want) in [
        ("ghz-phase-check", vec!["1"]),
        ("ghz-parity-check", vec!["11"]),
        ("bell-correction", vec!["1"]),
        ("ghz-phase-flip", vec!["1"]),
        ("ghz-bit-flip", vec!["10"]),
    ] {
        let v = json(&qudit_ec(&["preset", name, "--json"]));
        let got: Vec<&str> = v["readouts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["modal"].as_str().unwrap())
            .collect();
        assert_eq!(got, want, "{name}");
    }
}

#[test]
fn printed_circuit_reparses() {
    let out = qudit_ec(&["preset", "bell-correction", "--print-circuit"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("REGISTER 2 5"));
    assert!(qudit_ec::circuit::parse_circuit(&text).is_ok());
}

#[test]
fn identical_seeds_give_identical_json() {
    let ghz = ghz_error_file();
    let runs: [Vec<&str>; 4] = [
        vec!["discriminate", "2:3:1:1,0", "--seed", "7", "--json"],
        vec![
            "correct",
            "2:3:1:1,0",
            "--error",
            ghz.path().to_str().unwrap(),
            "--dump-states",
            "--json",
        ],
        vec!["tomography", "2:3:1:1,0", "--seed", "9", "--json"],
        vec![
            "preset",
            "tomography-bell-correction",
            "--seed",
            "2",
            "--json",
        ],
    ];
    for args in &runs {
        let a = qudit_ec(args);
        let b = qudit_ec(args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
