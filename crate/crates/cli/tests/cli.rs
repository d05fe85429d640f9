use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_theta-norms"));
    c.env_remove("THETA_NORMS_THREADS");
    c
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn numbers(s: &str) -> Vec<f64> {
    s.split_whitespace().map(|t| t.parse().unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn ksupport_k1_is_l1() {
    let o = run(&["norm", "--ksupport", "-k", "1"], "3 1");
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "4\n");
}

#[test]
fn dual_of_ksupport_k1_is_linf() {
    let o = run(&["dual", "--ksupport", "-k", "1"], "3 -5 1");
    assert_eq!(stdout(&o), "5\n");
}

#[test]
fn box_prox_example() {
    let o = run(
        &[
            "prox", "--box", "-a", "0.1", "-b", "1", "-c", "1.1", "--lambda", "0.5",
        ],
        "2 1",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let x = numbers(&stdout(&o));
    assert!(
        (x[0] - 9.0 / 7.0).abs() < 1e-12 && (x[1] - 2.0 / 7.0).abs() < 1e-12,
        "{x:?}"
    );
    let o = run(
        &[
            "prox", "--box", "-a", "0.1", "-b", "1", "-c", "1.1", "--lambda", "0.5", "--format",
            "json",
        ],
        "2 1",
    );
    let v: Vec<f64> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, x);
}

#[test]
fn box_rank_flag_sets_budget() {
    // c = (b − a)k + da = 0.9 + 0.2 = 1.1 for d = 2, k = 1.
    let by_rank = run(&["norm", "--box", "-a", "0.1", "-b", "1", "-k", "1"], "2 1");
    let by_budget = run(
        &["norm", "--box", "-a", "0.1", "-b", "1", "-c", "1.1"],
        "2 1",
    );
    assert_eq!(stdout(&by_rank), stdout(&by_budget));
}

#[test]
fn input_file_and_spectral_norms() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.txt", "3 0\n0 4\n");
    let o = run(&["spectral-norm", "--norm", "trace", "-i", &m], "");
    assert_eq!(stdout(&o), "7\n");
    let o = run(
        &["spectral-norm", "--norm", "ksupport", "-k", "2", "-i", &m],
        "",
    );
    assert_eq!(stdout(&o), "5\n");
    let v = write(dir.path(), "v.txt", "3\n1\n");
    let o = run(&["norm", "--ksupport", "-k", "2", "--input", &v], "");
    assert_eq!(numbers(&stdout(&o)), vec![10f64.sqrt()]);
}

#[test]
fn bench_table() {
    let o = run(
        &["bench", "--sizes", "1000,2000,4000", "--repeats", "3"],
        "",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "d,k,new_seconds,baseline_seconds,max_abs_diff,ok");
    assert_eq!(lines.len(), 4);
    for (line, d) in lines[1..].iter().zip(["1000", "2000", "4000"]) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], d);
        assert_eq!(f[5], "true");
    }
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = run(&["norm", "--bogus"], "");
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.lines().next().unwrap().starts_with("error[usage]: "),
        "{err}"
    );
    assert!(err.contains("Usage:"));
    let o = run(&[], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_parameters_are_usage_errors() {
    for args in [
        vec!["norm", "--box", "-a", "2", "-b", "1", "-c", "1"],
        vec!["norm", "--ksupport", "-k", "1.5"],
        vec!["norm", "--ksupport", "-k", "3"],
        vec!["prox", "--ksupport", "-k", "1", "--lambda", "0"],
        vec!["bench", "--sizes", "200,100"],
    ] {
        let o = run(&args, "1 2");
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error[usage]: "));
        assert_eq!(stderr(&o).lines().count(), 1);
    }
}

#[test]
fn malformed_data_is_data_error() {
    let o = run(&["norm", "--ksupport", "-k", "1"], "1 x");
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[data]: "));
    let o = run(&["norm", "--ksupport", "-k", "1"], "");
    assert_eq!(o.status.code(), Some(3));
    let o = run(
        &["norm", "--ksupport", "-k", "1", "-i", "/nonexistent/v.txt"],
        "",
    );
    assert_eq!(o.status.code(), Some(3));
}

const CONFIG: &str = "\
[run]
seed = 3
repeats = 2
tolerance = 1e-4

[data]
source = lowrank
m = 12
rank = 2
noise_sd = 0.1
sample = fraction 0.5

[tr]
lambda = 0.5, 1

[ks]
lambda = 0.1
k = 1, 2
";

#[test]
fn complete_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.conf", CONFIG);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let o = run(
            &[
                "complete",
                "--config",
                &cfg,
                "-o",
                out.to_str().unwrap(),
                "--threads",
                threads,
            ],
            "",
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.starts_with("dataset,norm,test_error_mean,test_error_sd,N,r,k,a,lambda\n"));
    assert_eq!(text.lines().count(), 3);
    assert!(text
        .lines()
        .nth(2)
        .unwrap()
        .starts_with("lowrank-12x12-r2,ks,"));

    let o = run(&["complete", "--config", &cfg, "--format", "json"], "");
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["test_error_mean"].is_f64());
}

#[test]
fn config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.conf", "[data]\nsource = lowrank\nfoo = 1\n");
    let o = run(&["complete", "--config", &cfg], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"));
    let o = run(&["complete", "--config", "/nonexistent.conf"], "");
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn divergence_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[run]\nstep_size = 5\n[data]\nsource = lowrank\nm = 12\nrank = 2\nsample = fraction 0.5\n[tr]\nlambda = 0.001\n";
    let cfg = write(dir.path(), "c.conf", text);
    let o = run(&["complete", "--config", &cfg], "");
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[divergence]: "));
}

#[test]
fn threads_env_fallback() {
    let o = bin()
        .args(["norm", "--ksupport", "-k", "1"])
        .env("THETA_NORMS_THREADS", "0")
        .stdin(Stdio::null())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--threads"));
}

#[test]
fn mtl_and_synth_tables() {
    let o = run(&["mtl", "--tasks", "6", "--repeats", "1"], "");
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let norms: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(norms, ["tr", "ks", "c-ks", "cn", "c-cn"]);

    let o = run(
        &[
            "synth",
            "-m",
            "12",
            "--rank",
            "2",
            "--repeats",
            "1",
            "--lambdas",
            "0.5,2",
            "--norms",
            "tr,box",
        ],
        "",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = run(&["synth", "--norms", "nope"], "");
    assert_eq!(o.status.code(), Some(2));
}
