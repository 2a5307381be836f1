//! End-to-end checks of the command-line surface: literals, file handling,
//! output formats, exit codes, and rerun determinism.

use std::process::{Command, Output};

use qcorr::linalg::{basis_ket, projector, C64};
use qcorr::states::EnsembleTerm;
use qcorr::{DensityMatrix, ProductEnsemble};

fn qcorr_cmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcorr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn rho_l_ensemble() -> ProductEnsemble {
    let inv = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
    let plus = basis_ket(2, 0) * inv + basis_ket(2, 1) * inv;
    ProductEnsemble::new(vec![
        EnsembleTerm {
            weight: 0.5,
            state_a: projector(&basis_ket(2, 0)),
            state_b: projector(&basis_ket(2, 0)),
        },
        EnsembleTerm {
            weight: 0.5,
            state_a: projector(&plus),
            state_b: projector(&basis_ket(2, 1)),
        },
    ])
    .unwrap()
}

#[test]
fn rank_of_builtin_literals() {
    let v = stdout_json(&qcorr_cmd(&["rank", "--state", "werner:0.3333333333"]));
    assert_eq!(v["report"]["rank_l"], 4);
    assert_eq!(v["report"]["witness_fired"], true);

    let v = stdout_json(&qcorr_cmd(&["rank", "--state", "rho_l"]));
    assert_eq!(v["report"]["rank_l"], 2);
    assert_eq!(v["report"]["witness_fired"], false);
}

#[test]
fn rank_of_product_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("product.json");
    let ens = ProductEnsemble::random(2, 2, 1, 3).unwrap();
    ens.assemble().save(&path).unwrap();
    let v = stdout_json(&qcorr_cmd(&["rank", "--state", path.to_str().unwrap()]));
    assert_eq!(v["report"]["rank_l"], 1);
}

#[test]
fn discord_command_reports_reference_value() {
    let v = stdout_json(&qcorr_cmd(&[
        "discord",
        "--state",
        "rho_c",
        "--subsystem",
        "A",
    ]));
    let value = v["report"]["value"].as_f64().unwrap();
    assert!(value.abs() <= 1e-6);
    assert_eq!(v["config"]["subsystem"], "A");
}

#[test]
fn create_local_writes_artifacts_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let ens_path = dir.path().join("ensemble.json");
    rho_l_ensemble().save(&ens_path).unwrap();
    let out_dir = dir.path().join("creation");

    let out = qcorr_cmd(&[
        "create-local",
        "--ensemble",
        ens_path.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    for name in [
        "seed_state.json",
        "channel_a.json",
        "channel_b.json",
        "assembled_state.json",
        "verification.json",
    ] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let seed = DensityMatrix::load(out_dir.join("seed_state.json")).unwrap();
    let expected_seed = DensityMatrix::rho_c();
    let diff = qcorr::linalg::max_entry_norm(&(seed.matrix() - expected_seed.matrix()));
    assert!(diff < 1e-12);

    let assembled = DensityMatrix::load(out_dir.join("assembled_state.json")).unwrap();
    let diff = qcorr::linalg::max_entry_norm(&(assembled.matrix() - DensityMatrix::rho_l().matrix()));
    assert!(diff < 1e-9);

    let text = std::fs::read_to_string(out_dir.join("verification.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["report"]["within_tolerance"], true);
    assert!(v["report"]["reassembly_residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn create_local_rejects_too_many_terms_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let ens_path = dir.path().join("big.json");
    ProductEnsemble::random(2, 2, 3, 5)
        .unwrap()
        .save(&ens_path)
        .unwrap();
    let out = qcorr_cmd(&[
        "create-local",
        "--ensemble",
        ens_path.to_str().unwrap(),
        "--out-dir",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("d_min"), "message should name the bound: {msg}");
}

#[test]
fn classify_single_states() {
    let v = stdout_json(&qcorr_cmd(&["classify", "--state", "rho_l"]));
    assert_eq!(v["report"]["region"], "quantum_low_l");
    let v = stdout_json(&qcorr_cmd(&["classify", "--state", "rho_c"]));
    assert_eq!(v["report"]["region"], "classical");
}

#[test]
fn classify_batch_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("samples.csv");
    let out = qcorr_cmd(&[
        "classify",
        "--random",
        "40",
        "--dims",
        "2",
        "2",
        "--seed",
        "7",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["report"]["n_samples"], 40);
    assert_eq!(v["report"]["classical"], 0);

    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config:"));
    assert!(lines.next().unwrap().starts_with("# timestamp:"));
    assert_eq!(
        lines.next().unwrap(),
        "sample_id,rank_l,discord_a,discord_b,region,min_sv_gap"
    );
    assert_eq!(lines.count(), 40);
}

/// Strips the dedicated timestamp header/field so reruns can be compared.
fn without_timestamps(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# timestamp:"))
        .map(|l| {
            if let Some(start) = l.find("\"timestamp\":\"") {
                let end = l[start + 13..].find('"').unwrap() + start + 13;
                format!("{}{}", &l[..start + 13], &l[end..])
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn reruns_are_byte_identical_apart_from_timestamps() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    let mut captured = Vec::new();
    for _ in 0..2 {
        let out = qcorr_cmd(&[
            "classify",
            "--random",
            "25",
            "--dims",
            "2",
            "2",
            "--seed",
            "42",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        captured.push(std::fs::read_to_string(&path).unwrap());
    }
    assert_eq!(
        without_timestamps(&captured[0]),
        without_timestamps(&captured[1])
    );

    let r1 = qcorr_cmd(&["discord", "--state", "werner:0.5", "--subsystem", "B"]);
    let r2 = qcorr_cmd(&["discord", "--state", "werner:0.5", "--subsystem", "B"]);
    assert_eq!(
        without_timestamps(&String::from_utf8_lossy(&r1.stdout)),
        without_timestamps(&String::from_utf8_lossy(&r2.stdout))
    );
}

#[test]
fn sweep_hits_reference_point_and_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = qcorr_cmd(&[
        "sweep",
        "--family",
        "werner",
        "--from",
        "0",
        "--to",
        "1",
        "--step",
        "0.03333333333333333",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("z,"))
        .collect();
    let mut prev = -1.0;
    let mut z_third_discord = None;
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        let z: f64 = fields[0].parse().unwrap();
        let d: f64 = fields[1].parse().unwrap();
        assert!(d >= prev - 1e-9, "discord not monotone at z = {z}");
        prev = d;
        if (z - 1.0 / 3.0).abs() < 1e-9 {
            z_third_discord = Some(d);
        }
    }
    let d_third = z_third_discord.expect("sweep contains z = 1/3");
    assert!((d_third - 0.125815).abs() < 1e-5);
    // z = 0 row: maximally mixed product state
    let first: Vec<&str> = rows[0].split(',').collect();
    assert!(first[1].parse::<f64>().unwrap().abs() <= 1e-6);
    assert_eq!(first[2], "1");
}

#[test]
fn monotonicity_command_reports_zero_violations() {
    let v = stdout_json(&qcorr_cmd(&[
        "monotonicity",
        "--trials",
        "50",
        "--dims",
        "2",
        "2",
        "--seed",
        "3",
    ]));
    assert_eq!(v["report"]["violations"], 0);
}

#[test]
fn malformed_state_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"dim_a\": 2").unwrap();
    let out = qcorr_cmd(&["rank", "--state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_subsystem_exits_2() {
    let out = qcorr_cmd(&["discord", "--state", "bell", "--subsystem", "C"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let out = qcorr_cmd(&["rank", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_range_werner_exits_2() {
    let out = qcorr_cmd(&["rank", "--state", "werner:2.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_cap_env_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_qcorr"))
        .env("QCORR_THREADS", "1")
        .args(["classify", "--random", "5", "--dims", "2", "2", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn schmidt2_literal_parses() {
    let v = stdout_json(&qcorr_cmd(&["rank", "--state", "schmidt2:5"]));
    assert_eq!(v["report"]["rank_l"], 4);
    assert_eq!(v["report"]["d_min"], 5);
}
