use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cebit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cebit")).args(args).output().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()));
    rows
}

#[test]
fn fig2_noiseless_writes_anchor_angles() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = cebit(&["reproduce-fig2", "--noise", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.join("fig2.csv"));
    let anchors: Vec<&str> = rows[1..].iter().filter(|r| r[1] == "true").map(|r| r[0].as_str()).collect();
    assert_eq!(anchors, ["47", "55", "62", "76"]);
    for name in ["fig2_theta_47", "fig2_theta_55", "fig2_theta_62", "fig2_theta_76"] {
        assert!(out.join(format!("{name}.pgm")).exists());
    }
    assert!(out.join("provenance.txt").exists());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("fig2 ")).count() >= 4);
}

#[test]
fn missing_config_exits_2() {
    let o = cebit(&["teleport", "--config", "/nonexistent/cebit.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--config"));
}

#[test]
fn bad_config_value_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "frames = many\n").unwrap();
    let o = cebit(&["teleport", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("frames"));
}

#[test]
fn precondition_violation_exits_3() {
    let o = cebit(&["teleport", "--grid", "100"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.n"));
    let o = cebit(&["angle", "--frames", "0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_outcome_is_a_parse_error() {
    let o = cebit(&["teleport", "--outcome", "12"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outcome_11_suite_uses_xz() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.cfg");
    fs::write(&cfg, "suite.n = 20\nnoise.sigma = 0\n").unwrap();
    let out = dir.path().join("s");
    let o = cebit(&[
        "--outcome",
        "11",
        "random-suite",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "128",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.join("random_suite.csv"));
    let col = |name: &str| rows[0].iter().position(|h| h == name).unwrap();
    assert_eq!(rows.len(), 21);
    for r in &rows[1..] {
        assert_eq!(r[col("outcome")], "11");
        assert_eq!(r[col("correction")], "XZ");
        let f: f64 = r[col("fidelity_abstract")].parse().unwrap();
        assert!(f >= 1.0 - 1e-12);
    }
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, "grid.n = 128\nframes = 4\nsuite.n = 6\nnoise.jitter_deg = 0.5\nfig2.dense_step = 20\n").unwrap();
    let run = |threads: &str, cmd: &str| {
        let out = dir.path().join(format!("{cmd}-{threads}"));
        let o = cebit(&[
            cmd,
            "--config",
            cfg.to_str().unwrap(),
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    for (cmd, files) in [
        ("reproduce-fig2", &["fig2.csv"][..]),
        ("reproduce-fig3", &["fig3a.csv", "fig3b.csv"][..]),
        ("random-suite", &["random_suite.csv"][..]),
    ] {
        let a = run("1", cmd);
        let b = run("4", cmd);
        for f in files.iter().chain(&["summary.txt", "provenance.txt"]) {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{cmd} {f}");
        }
    }
}

#[test]
fn single_runs_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, file) in [("teleport", "teleport.csv"), ("angle", "angle.csv"), ("decompose", "decompose.csv")] {
        let out = dir.path().join(cmd);
        let o = cebit(&[cmd, "--grid", "128", "--frames", "2", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let rows = read_csv(&out.join(file));
        assert!(rows.len() >= 2);
        let status = rows[0].iter().position(|h| h == "status").unwrap();
        assert!(rows[1..].iter().all(|r| r[status] == "ok"), "{cmd}: {rows:?}");
    }
}
