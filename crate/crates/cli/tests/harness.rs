use std::path::PathBuf;
use std::process::Command;

use devissage::Ring;
use devissage_cli::gen::{generate, trial_rng};
use devissage_cli::instance::Instance;
use devissage_cli::report::{digest, evaluate, TrialRecord};
use devissage_cli::{replay, run_suite, Caps, Kind, Report, Suite, SuiteConfig};

const KINDS: [&str; 6] = ["module", "morphism", "complex-in-a", "module-form", "complex-form", "neutral-form"];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_devissage"))
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("devissage-harness-{}-{name}", std::process::id()))
}

fn gen_lines(kind: Kind, ring: Ring, seed: u64) -> Vec<String> {
    (0..5).map(|t| serde_json::to_string(&generate(kind, ring, &Caps::default(), &mut trial_rng(seed, t)).unwrap()).unwrap()).collect()
}

#[test]
fn generation_is_a_function_of_the_seed() {
    for ring in ["z-half", "zloc:3", "fp:5"] {
        let ring: Ring = ring.parse().unwrap();
        for kind in KINDS {
            let kind: Kind = kind.parse().unwrap();
            assert_eq!(gen_lines(kind, ring, 11), gen_lines(kind, ring, 11));
            assert_ne!(gen_lines(kind, ring, 11), gen_lines(kind, ring, 12), "{kind:?} ignores the seed");
        }
    }
}

#[test]
fn generated_instances_round_trip_through_json() {
    for kind in KINDS {
        for line in gen_lines(kind.parse().unwrap(), "z-half".parse().unwrap(), 3) {
            let back: Instance = serde_json::from_str(&line).unwrap();
            assert_eq!(serde_json::to_string(&back).unwrap(), line);
        }
    }
}

fn strip_time(r: &Report) -> serde_json::Value {
    let mut v = serde_json::to_value(r).unwrap();
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn reports_are_deterministic() {
    for suite in [Suite::Duality, Suite::WittMap, Suite::Devissage, Suite::WittBase] {
        let ring = if suite == Suite::WittBase { "fp:7" } else { "z-half" };
        let config = SuiteConfig::new(ring.parse().unwrap(), suite, 12, 5);
        let a = run_suite(&config);
        assert!(a.passed(), "{}", a.human_summary());
        assert_eq!(strip_time(&a), strip_time(&run_suite(&config)));
    }
}

/// A duality instance whose complex has `∂∂ ≠ 0`.
fn broken_complex() -> Instance {
    let ring: Ring = "z-half".parse().unwrap();
    for t in 0.. {
        let mut inst = generate(Kind::ComplexInA, ring, &Caps::default(), &mut trial_rng(1, t)).unwrap();
        let Instance::ComplexInA { complex, .. } = &mut inst else { unreachable!() };
        let keys: Vec<i64> = complex.differentials.keys().copied().collect();
        for r in keys {
            let Some(upper) = complex.differentials.get(&(r + 1)).cloned() else { continue };
            let hit = (0..upper.rows).flat_map(|i| (0..upper.cols).map(move |j| (i, j))).find(|&(i, j)| upper.entries[i][j] != "0");
            let lower = complex.differentials.get_mut(&r).unwrap();
            if let (Some((i, _)), true) = (hit, lower.rows > 0) {
                for (c, e) in lower.entries[0].iter_mut().enumerate() {
                    *e = if c == i { "1".into() } else { "0".into() };
                }
                return inst;
            }
        }
    }
    unreachable!()
}

#[test]
fn broken_payload_fails_and_replays() {
    let inst = broken_complex();
    let failure = evaluate(Suite::Duality, &inst).unwrap_err();
    assert_eq!(failure.error.as_deref(), Some("NotAComplex"));

    let mut report = run_suite(&SuiteConfig::new("z-half".parse().unwrap(), Suite::Duality, 4, 9));
    report.records[1] = TrialRecord {
        index: 1,
        digest: digest(&inst),
        passed: false,
        witnesses: None,
        failure: Some(failure),
        payload: Some(inst),
    };
    report.summary.passed -= 1;
    report.summary.failed += 1;
    assert_eq!(replay(&report), vec![(1, true)]);

    let stored: Report = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(replay(&stored), vec![(1, true)]);

    let path = scratch("report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap()).unwrap();
    let out = bin().arg("verify").arg("--replay").arg(&path).output().unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("trial 1: reproduced"));
}

#[test]
fn tampered_payload_does_not_reproduce() {
    let inst = broken_complex();
    let mut report = run_suite(&SuiteConfig::new("z-half".parse().unwrap(), Suite::Duality, 2, 9));
    report.records[0] = TrialRecord {
        index: 0,
        digest: digest(&inst),
        passed: false,
        witnesses: None,
        failure: Some(evaluate(Suite::Duality, &inst).unwrap_err()),
        payload: Some(inst),
    };
    report.records[0].failure.as_mut().unwrap().reason.push('!');
    assert_eq!(replay(&report), vec![(0, false)]);
}

#[test]
fn exit_codes() {
    let ok = bin().args(["verify", "--suite", "membership", "--trials", "5", "--seed", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("5/5 passed"));

    for args in [
        &["gen", "sheaf"][..],
        &["verify", "--suite", "nonsense"],
        &["verify", "--suite", "decomposition", "--ring", "fp:5"],
        &["gen", "module", "--ring", "fp:4"],
    ] {
        let out = bin().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"), "{args:?}");
    }
}

#[test]
fn gen_reduce_and_witt_class_from_the_command_line() {
    let path = scratch("complex-form.json");
    let gen = bin().args(["gen", "complex-form", "--trials", "2", "--seed", "4", "--json"]).arg(&path).output().unwrap();
    assert_eq!(gen.status.code(), Some(0));

    let reduce = bin().arg("reduce").arg(&path).output().unwrap();
    assert_eq!(reduce.status.code(), Some(0), "{}", String::from_utf8_lossy(&reduce.stderr));
    let v: serde_json::Value = serde_json::from_slice(&reduce.stdout).unwrap();
    assert_eq!(v["validated"], true);

    let class = bin().arg("witt-class").arg(&path).output().unwrap();
    assert_eq!(class.status.code(), Some(0));
    let decompose = bin().arg("decompose").arg(&path).output().unwrap();
    assert_eq!(decompose.status.code(), Some(0));
    std::fs::remove_file(&path).ok();
}
