// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn fsmhp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsmhp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn fsmhp")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = fsmhp(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn gen_synth_attack_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen", "--seed", "2", "-o", "b.toml"]);
    ok(d, &["synth", "b.toml", "-o", "b.net"]);
    assert!(d.join("b.truth").exists());
    ok(d, &["attack", "relic", "b.net", "--zscores", "z.csv"]);
    assert!(
        std::fs::read_to_string(d.join("z.csv"))
            .unwrap()
            .lines()
            .count()
            > 1
    );
    ok(d, &["attack", "topo", "b.net"]);
    ok(d, &["stg", "b.net", "--dot", "b.dot", "--compare", "b.net"]);
    assert!(std::fs::read_to_string(d.join("b.dot"))
        .unwrap()
        .starts_with("digraph"));
    let o = ok(d, &["overhead", "b.net", "b.net"]);
    assert!(o.contains('0'));
}

#[test]
fn pipeline_writes_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("plan.toml"),
        "[defense]\nreplicas = 2\nhoneypot = true\n",
    )
    .unwrap();
    ok(
        d,
        &[
            "--plan",
            "plan.toml",
            "pipeline",
            "--seed",
            "0",
            "-o",
            "run",
        ],
    );
    for f in [
        "plan.toml",
        "summary.txt",
        "reports/attacks.csv",
        "reports/checks.csv",
        "reports/overhead.csv",
        "netlists/defended.net",
    ] {
        assert!(d.join("run").join(f).exists(), "missing {f}");
    }
}

#[test]
fn bad_input_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fsmhp(tmp.path(), &["attack", "relic", "missing.net"]);
    assert_eq!(out.status.code(), Some(1));
}
