use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use qutrng_cli::format::{decode_ascii, encode_ascii};

fn qutrng(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qutrng")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn report_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn generate_ideal_accepts() {
    let out = qutrng(&[
        "generate", "--count", "1000", "--seed", "1", "--public-seed", "2", "--epsilon", "0.05", "--delta", "0.1",
        "--check-rate", "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(decode_ascii(&out.stdout).unwrap().len(), 1000);
    let report = report_of(&out);
    assert_eq!(report["verdict"], "Accept");
    assert!(report["Y"].as_f64().unwrap() >= 0.95);
    assert!(report["checks"].as_u64().unwrap() >= 1000);
    assert_eq!(report["stats"]["n"], 1000);
}

#[test]
fn generate_zero_state_rejects() {
    let out = qutrng(&["generate", "--count", "1000", "--seed", "1", "--public-seed", "2", "--source", "state:0,1,0"]);
    assert_eq!(out.status.code(), Some(2));
    let report = report_of(&out);
    assert_eq!(report["verdict"], "Reject");
    assert!((report["Y"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.05);
}

#[test]
fn generate_without_checks_is_inconclusive() {
    let out = qutrng(&["generate", "--count", "100", "--seed", "1", "--check-rate", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report_of(&out)["verdict"], "Inconclusive");
}

#[test]
fn bad_flags_exit_64() {
    for args in [
        &["generate", "--count", "-3"][..],
        &["generate", "--count", "10", "--seed", "zz"],
        &["generate", "--count", "10", "--delta", "1.5"],
        &["generate", "--count", "10", "--format", "hex"],
        &["generate", "--count", "10", "--source", "state:0,0,0"],
        &["generate", "--count", "10", "--jobs", "0"],
        &["chsh", "--state", "1,2"],
        &["state-test", "--state", "unbiased9"],
        &["verify", "--resolution", "15"],
        &["frobnicate"],
    ] {
        assert_eq!(qutrng(args).status.code(), Some(64), "{args:?}");
    }
}

#[test]
fn unreadable_files_exit_66() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let ensemble = format!("ensemble:{}", p(&missing));
    for args in [
        &["generate", "--count", "10", "--source", ensemble.as_str()][..],
        &["generate", "--count", "10", "--public-file", p(&missing)],
        &["generate", "--count", "10", "--config", p(&missing)],
        &["chsh", "--state", "zero", "--observables", p(&missing)],
    ] {
        assert_eq!(qutrng(args).status.code(), Some(66), "{args:?}");
    }
}

#[test]
fn output_formats() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["generate", "--count", "150", "--seed", "9", "--check-rate", "0.5"];
    let mut streams = Vec::new();
    for fmt in ["ascii", "raw", "json"] {
        let path = dir.path().join(fmt);
        let mut args = base.to_vec();
        args.extend(["--format", fmt, "--out", p(&path)]);
        assert_eq!(qutrng(&args).status.code(), Some(0), "{fmt}");
        streams.push(std::fs::read(path).unwrap());
    }
    let ascii = &streams[0];
    assert_eq!(ascii.iter().filter(|&&b| b == b'\n').count(), 3);
    assert!(ascii.ends_with(b"\n"));
    assert_eq!(ascii.split(|&b| b == b'\n').next().unwrap().len(), 64);
    let trits = decode_ascii(ascii).unwrap();
    assert_eq!(streams[1], trits);
    let doc: serde_json::Value = serde_json::from_slice(&streams[2]).unwrap();
    let json_trits: Vec<u8> = serde_json::from_value(doc["trits"].clone()).unwrap();
    assert_eq!(json_trits, trits);
    assert_eq!(doc["report"]["verdict"], "Accept");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("session.conf");
    std::fs::write(&cfg, "# demo\ncount = 300\nseed = 0x51\ncheck-rate = 0.4\nformat = raw\n").unwrap();
    let from_file = qutrng(&["generate", "--config", p(&cfg)]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout.len(), 300);
    assert_eq!(report_of(&from_file)["seed"], 0x51);
    assert_eq!(report_of(&from_file)["check_rate"], 0.4);

    let overridden = qutrng(&["generate", "--config", p(&cfg), "--count", "77", "--format", "ascii"]);
    assert_eq!(decode_ascii(&overridden.stdout).unwrap().len(), 77);

    std::fs::write(&cfg, "count = 10\nverbosity = 3\n").unwrap();
    let out = qutrng(&["generate", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("verbosity"));
}

#[test]
fn ensemble_source_file() {
    let dir = tempfile::tempdir().unwrap();
    let ens = dir.path().join("mix.txt");
    std::fs::write(&ens, "0.5 0 1 0\n0.5 0 1 0\n").unwrap();
    let spec = format!("ensemble:{}", p(&ens));
    let out = qutrng(&["generate", "--count", "500", "--seed", "3", "--source", &spec]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&ens, "0.5 0 1 0\n").unwrap();
    assert_eq!(qutrng(&["generate", "--count", "10", "--source", &spec]).status.code(), Some(64));
}

#[test]
fn public_file_drives_settings() {
    let dir = tempfile::tempdir().unwrap();
    let public = dir.path().join("public.txt");
    let settings: Vec<u8> = (0..40_000u32).map(|k| ((k * 7 + k / 3) % 3) as u8).collect();
    std::fs::write(&public, encode_ascii(&settings)).unwrap();
    let out = qutrng(&["generate", "--count", "1000", "--seed", "4", "--public-file", p(&public)]);
    assert_eq!(out.status.code(), Some(0));
    let report = report_of(&out);
    assert_eq!(report["public_seed"], serde_json::Value::Null);
    assert_eq!(report["public_file"], p(&public));

    std::fs::write(&public, encode_ascii(&settings[..50])).unwrap();
    let short = qutrng(&["generate", "--count", "1000", "--seed", "4", "--public-file", p(&public)]);
    assert_eq!(short.status.code(), Some(3));
    assert_eq!(report_of(&short)["public_exhausted"], true);
}

#[test]
fn jobs_do_not_change_output() {
    let one = qutrng(&["generate", "--count", "9000", "--seed", "11", "--jobs", "1"]);
    let four = qutrng(&["generate", "--count", "9000", "--seed", "11", "--jobs", "4"]);
    assert_eq!(one.stdout, four.stdout);
    let (mut a, mut b) = (report_of(&one), report_of(&four));
    assert_eq!(b["jobs"], 4);
    a["jobs"] = serde_json::Value::Null;
    b["jobs"] = serde_json::Value::Null;
    assert_eq!(a, b);
}

#[test]
fn verify_default_and_fault() {
    let ok = qutrng(&["verify", "--resolution", "16"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8(ok.stdout).unwrap();
    for name in ["nine probabilities = 1/3", "CHSH symmetrized max = 2 sqrt2", "Casimir = 2I"] {
        assert!(text.lines().any(|l| l.starts_with("PASS") && l.contains(name)), "{name}");
    }
    assert!(text.contains("4 clusters"));

    let bad = qutrng(&["verify", "--resolution", "16", "--inject-fault", "flip-sy"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8(bad.stdout).unwrap().lines().any(|l| l.starts_with("FAIL")));
}

#[test]
fn chsh_values() {
    let lines = |state: &str| String::from_utf8(qutrng(&["chsh", "--state", state]).stdout).unwrap();
    assert!(lines("1,0,1").starts_with("qubit-pair   2.828427124746\n"));
    assert!(lines("plus").starts_with("qubit-pair   1.414213562373\n"));
    assert!(lines("zero").starts_with("qubit-pair   0.000000000000\n"));
}

#[test]
fn chsh_observables_file() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs.txt");
    std::fs::write(&obs, qutrng_cli::parse::default_observables_text()).unwrap();
    let out = qutrng(&["chsh", "--state", "1,0,1", "--observables", p(&obs)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("qubit-pair   2.828427124746\n"));
}

#[test]
fn state_test_examples() {
    let text = |state: &str| String::from_utf8(qutrng(&["state-test", "--state", state]).stdout).unwrap();
    let u0 = text("unbiased0");
    assert_eq!(u0.matches("0.333333333333").count(), 9);
    assert!(u0.contains("concurrence  1.000000000000"));
    assert!(u0.contains("fidelity     1.000000000000"));
    assert!(u0.contains("check <S^2>  0.000000000000"));
    assert!(text("zero").contains("fidelity     0.333333333333"));
    assert!(text("plus").contains("concurrence  0.000000000000"));
}

proptest! {
    #[test]
    fn ascii_round_trip(trits in proptest::collection::vec(0u8..3, 0..300)) {
        let text = encode_ascii(&trits);
        let decoded = decode_ascii(text.as_bytes()).unwrap();
        prop_assert_eq!(&decoded, &trits);
        prop_assert_eq!(encode_ascii(&decoded), text);
    }
}
