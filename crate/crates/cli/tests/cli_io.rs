use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_eisenlab"));
    c.env_remove("EISENLAB_CACHE");
    c
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn identity_rows_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("id.csv");
    let st = bin().args(["identity-3pi", "--T", "10,250,1000", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let csv = read(&out);
    let lines = data_lines(&csv);
    assert_eq!(lines[0], "T,residual_3pi,normalization");
    assert_eq!(lines.len(), 4);
    for l in &lines[1..] {
        let r: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!(r <= 1e-8);
        // 17 significant digits
        assert_eq!(l.split(',').next().unwrap().split('e').next().unwrap().len(), 18);
    }
    let meta: serde_json::Value = serde_json::from_str(&read(&eisenlab_cli::sidecar_path(&out))).unwrap();
    assert_eq!(meta["command"], "identity-3pi");
    assert_eq!(meta["config"]["T"], "10,250,1000");
    assert_eq!(meta["exit_code"], 0);
    assert!(meta["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn sidecar_replays_run() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let st = bin()
        .args(["rational-check", "--points", "5", "--seed", "42", "--delta", "16", "--T", "1000", "--workers", "2", "--out"])
        .arg(&a)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let st = bin().args(["rational-check", "--config"]).arg(eisenlab_cli::sidecar_path(&a)).arg("--out").arg(&b).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert_eq!(read(&a), read(&b));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# diagonal run\nT = 100\nN = 1000,2000\ntol.diagonal = 0.25\n").unwrap();
    let out = dir.path().join("d.csv");
    let st = bin().args(["diagonal", "--N", "500", "--config"]).arg(&conf).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let csv = read(&out);
    assert!(csv.contains("# N = 500\n"));
    assert!(csv.contains("# tol.diagonal = 2.5e-1\n"));
    assert_eq!(data_lines(&csv).len(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let code = |args: &[&str]| bin().args(args).arg("--out").arg(&out).status().unwrap().code();
    // validation
    assert_eq!(code(&["diagonal", "--x", "0.3"]), Some(1));
    assert_eq!(code(&["i-delta", "--delta", "64,16"]), Some(1));
    assert_eq!(code(&["restrict", "--window", "2,1"]), Some(1));
    assert_eq!(code(&["identity-3pi", "--tol", "identity=-1"]), Some(1));
    assert_eq!(bin().args(["no-such-command"]).status().unwrap().code(), Some(1));
    // tolerance failure
    assert_eq!(code(&["identity-3pi", "--T", "1000", "--tol", "identity=1e-30"]), Some(2));
    let meta: serde_json::Value = serde_json::from_str(&read(&eisenlab_cli::sidecar_path(&out))).unwrap();
    assert_eq!(meta["exit_code"], 2);
    assert_eq!(meta["failures"].as_array().unwrap().len(), 1);
    // capacity
    assert_eq!(code(&["rational-check", "--points", "1", "--q", "2000003", "--T", "1000", "--delta", "16"]), Some(3));
    assert_eq!(code(&["q-scan", "--points", "1", "--h-pow", "31"]), Some(3));
}

#[test]
fn cache_directory_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let st = bin()
            .env("EISENLAB_CACHE", &cache)
            .args(["i-delta", "--T", "1000", "--delta", "16", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        read(&out)
    };
    let first = run("a.csv");
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(first, run("b.csv"));
}

#[test]
fn stdout_output() {
    let o = bin().args(["plancherel", "--T", "5", "--out", "-"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.starts_with("# eisenlab "));
    assert_eq!(data_lines(&s)[0], "T,residual");
}
