use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn chf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chf"))
        .args(args)
        .env_remove("CHF_SEED")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixtures() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    assert_eq!(code(&chf(&["fixtures", "--dir", s(&fx)])), 0);
    (dir, fx)
}

#[test]
fn build_certifies_and_respects_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    assert_eq!(code(&chf(&["build-counterexample", "--out", s(&out)])), 0);
    assert_eq!(code(&chf(&["verify", "--config", s(&out)])), 0);
    assert_eq!(
        code(&chf(&[
            "build-counterexample",
            "--out",
            s(&out),
            "--phase",
            "0.3"
        ])),
        0
    );
    assert_eq!(
        code(&chf(&[
            "build-counterexample",
            "--out",
            s(&out),
            "--tol",
            "1e-17"
        ])),
        1
    );
}

#[test]
fn input_errors_exit_two() {
    let (_d, fx) = fixtures();
    let cfg = fx.join("config.json");
    let out = fx.join("s.json");
    assert_eq!(
        code(&chf(&[
            "scan",
            "--config",
            "/nonexistent.json",
            "--out",
            s(&out)
        ])),
        2
    );
    assert_eq!(
        code(&chf(&[
            "scan",
            "--config",
            s(&cfg),
            "--out",
            s(&out),
            "--max-len",
            "3"
        ])),
        2
    );
    assert_eq!(code(&chf(&["frobnicate"])), 2);
    let bad_seed = Command::new(env!("CARGO_BIN_EXE_chf"))
        .args(["decide", "--config", s(&cfg), "--out", s(&out)])
        .env("CHF_SEED", "banana")
        .output()
        .unwrap();
    assert_eq!(code(&bad_seed), 2);
}

#[test]
fn decide_exit_codes_follow_the_verdict() {
    let (_d, fx) = fixtures();
    let out = fx.join("v.json");
    for (name, expected, kind) in [
        ("counterexample.json", 0, "CLine"),
        ("rfuchsian.json", 0, "TotallyReal"),
        ("violator.json", 1, "HypothesisViolated"),
        ("generic_pair.json", 1, "HypothesisViolated"),
    ] {
        let gens = fx.join(name);
        assert_eq!(
            code(&chf(&[
                "decide",
                "--generators",
                s(&gens),
                "--out",
                s(&out)
            ])),
            expected,
            "{name}"
        );
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(v["verdict"], kind, "{name}");
        if expected == 0 {
            assert_eq!(
                code(&chf(&[
                    "verify",
                    "--generators",
                    s(&gens),
                    "--verdict",
                    s(&out)
                ])),
                0
            );
        }
    }
}

#[test]
fn scan_writes_report_and_traces() {
    let (_d, fx) = fixtures();
    let (out, csv) = (fx.join("s.json"), fx.join("t.csv"));
    let cfg = fx.join("config.json");
    let run = chf(&[
        "scan",
        "--config",
        s(&cfg),
        "--max-len",
        "4",
        "--out",
        s(&out),
        "--traces",
        s(&csv),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["violation_count"], 0);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("word,length,trace_re,trace_im,kind,alpha_sign,passed"));
    assert_eq!(
        rows.lines().count() as u64 - 1,
        v["elements"].as_u64().unwrap()
    );
}

#[test]
fn burnside_and_plot() {
    let (_d, fx) = fixtures();
    let cfg = fx.join("config.json");
    let out = chf(&["burnside", "--config", s(&cfg), "--max-len", "4"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("dimension 5"));
    let svg = fx.join("p.svg");
    assert_eq!(
        code(&chf(&["plot", "--config", s(&cfg), "--out", s(&svg)])),
        0
    );
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}
