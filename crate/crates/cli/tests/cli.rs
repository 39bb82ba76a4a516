use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn isrp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isrp")).args(args).env_remove("ISRP_SEED").output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn catalog_formats() {
    let out = isrp(&["catalog", "--format", "json"]);
    ok(&out);
    let records: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert!(records.iter().any(|r| r["id"] == "logistic/constant_params"));

    let out = isrp(&["catalog", "--format", "dot"]);
    ok(&out);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("digraph"));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cat.txt");
    ok(&isrp(&["catalog", "--out", s(&file)]));
    assert!(fs::read_to_string(&file).unwrap().starts_with("model"));
}

#[test]
fn simulate_reference_plan_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&isrp(&["simulate", "--seed", "11", "--out", s(&a)]));
    ok(&isrp(&["--seed", "11", "simulate", "--out", s(&b)]));
    let bytes = fs::read(a.join("trajectories.csv")).unwrap();
    assert_eq!(bytes, fs::read(b.join("trajectories.csv")).unwrap());
    assert_eq!(fs::read(a.join("plan.json")).unwrap(), fs::read(b.join("plan.json")).unwrap());
    assert!(!bytes.contains(&b'\r'));

    let (header, rows) = read_csv(&a.join("trajectories.csv"));
    assert_eq!(header.len(), 21);
    assert_eq!(rows.len(), 1000);

    // Rerunning into the same directory overwrites with identical bytes.
    ok(&isrp(&["simulate", "--seed", "11", "--out", s(&a)]));
    assert_eq!(fs::read(a.join("trajectories.csv")).unwrap(), bytes);

    ok(&isrp(&["simulate", "--seed", "12", "--out", s(&b)]));
    assert_ne!(fs::read(b.join("trajectories.csv")).unwrap(), bytes);
}

#[test]
fn noiseless_simulation_and_isrp() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&isrp(&["simulate", "--n", "1", "--sigma2", "1e-30", "--out", s(&sim)]));
    let (header, rows) = read_csv(&sim.join("trajectories.csv"));
    for (t, x) in header[1..].iter().zip(&rows[0][1..]) {
        let t: f64 = t.parse().unwrap();
        let x: f64 = x.parse().unwrap();
        let exact = 100.0 / (1.0 + 9.0 * (-0.3 * t).exp());
        assert!((x - exact).abs() < 1e-9 * exact, "t={t}: {x} vs {exact}");
    }

    let out = dir.path().join("isrp");
    ok(&isrp(&["isrp", "-i", s(&sim.join("trajectories.csv")), "--out", s(&out)]));
    let (_, rows) = read_csv(&out.join("isrp.csv"));
    assert_eq!(rows.len(), 18);
    for r in &rows {
        assert_eq!(r[6], "ok");
        assert!((r[2].parse::<f64>().unwrap() - 0.3).abs() < 1e-8);
    }
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("isrp.json")).unwrap()).unwrap();
    assert_eq!(json["points"].as_array().unwrap().len(), 18);

    let fit = dir.path().join("fit");
    ok(&isrp(&["fit", "-i", s(&sim.join("trajectories.csv")), "--model", "logistic", "--out", s(&fit)]));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(fit.join("fit.json")).unwrap()).unwrap();
    assert!((json["estimates"]["r0"].as_f64().unwrap() - 0.3).abs() < 1e-6);
    assert!((json["estimates"]["k"].as_f64().unwrap() - 100.0).abs() < 1e-4);
    let (h, rows) = read_csv(&fit.join("fitted.csv"));
    assert_eq!((h.len(), rows.len()), (3, 20));
}

#[test]
fn replication_mode_long_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    ok(&isrp(&["isrp", "--n", "40", "--q", "10", "--replications", "7", "--out", s(dir.path())]));
    let (header, rows) = read_csv(&dir.path().join("estimates.csv"));
    assert_eq!(header, ["replicate", "j", "estimate"]);
    assert_eq!(rows.len(), 7 * (10 - 2));
    let (_, summary) = read_csv(&dir.path().join("summary.csv"));
    assert_eq!(summary.len(), 8);

    let k = dir.path().join("k");
    ok(&isrp(&["isrp", "--target", "k", "--n", "40", "--replications", "3", "--out", s(&k)]));
    assert_eq!(read_csv(&k.join("estimates.csv")).1.len(), 3 * 18);
}

#[test]
fn invalid_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"out_dir": "results", "simulaton": {"n": 3}}"#).unwrap();
    let out = isrp(&["--config", s(&cfg), "simulate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("isrp: error[config]:"), "{err}");

    // A plan that fails validation leaves nothing behind either.
    let out = isrp(&["simulate", "--sigma2", "-1", "--out", s(&dir.path().join("results"))]);
    assert_eq!(out.status.code(), Some(2));
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, ["bad.json"]);

    assert_eq!(isrp(&["--threads", "0", "catalog"]).status.code(), Some(2));
    assert_eq!(isrp(&["fit", "--model", "nope", "-i", "missing.csv"]).status.code(), Some(2));
    assert_eq!(isrp(&["fit", "--model", "logistic", "-i", "missing.csv"]).status.code(), Some(3));
}

#[test]
fn data_errors_use_exit_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("uneven.csv");
    fs::write(&p, "id,0,1,3\na,1,2,3\n").unwrap();
    let out = isrp(&["isrp", "-i", s(&p), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn flags_override_config_and_seed_sources() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 5\nout_dir = \"cfg_out\"\n[simulation]\nn = 3\nq = 6\n").unwrap();

    ok(&isrp(&["--config", s(&cfg), "simulate"]));
    let from_cfg = fs::read(dir.path().join("cfg_out/trajectories.csv")).unwrap();
    assert_eq!(read_csv(&dir.path().join("cfg_out/trajectories.csv")).1.len(), 3);

    let flag_out = dir.path().join("flag");
    ok(&isrp(&["--config", s(&cfg), "simulate", "--n", "4", "--out", s(&flag_out)]));
    let (header, rows) = read_csv(&flag_out.join("trajectories.csv"));
    assert_eq!((header.len(), rows.len()), (7, 4));

    let seeded = dir.path().join("seeded");
    ok(&isrp(&["simulate", "--seed", "5", "--n", "3", "--q", "6", "--out", s(&seeded)]));
    assert_eq!(fs::read(seeded.join("trajectories.csv")).unwrap(), from_cfg);

    let env = dir.path().join("env");
    let out = Command::new(env!("CARGO_BIN_EXE_isrp"))
        .args(["simulate", "--n", "3", "--q", "6", "--out", s(&env)])
        .env("ISRP_SEED", "5")
        .output()
        .unwrap();
    ok(&out);
    assert_eq!(fs::read(env.join("trajectories.csv")).unwrap(), from_cfg);

    let out = Command::new(env!("CARGO_BIN_EXE_isrp")).args(["simulate"]).env("ISRP_SEED", "x").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn select_and_bootstrap_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&isrp(&["simulate", "--n", "30", "--q", "12", "--seed", "3", "--out", s(&sim)]));
    let data = sim.join("trajectories.csv");

    let sel = dir.path().join("sel");
    ok(&isrp(&["select", "-i", s(&data), "--out", s(&sel)]));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(sel.join("report.json")).unwrap()).unwrap();
    assert!(report["chosen"]["parent"] == "logistic");
    assert!(fs::read_to_string(sel.join("report.txt")).unwrap().contains("chosen"));
    let (h, rows) = read_csv(&sel.join("isrp_profile.csv"));
    assert_eq!(&h[..3], ["j", "t", "isrp"]);
    assert_eq!(rows.len(), 10);
    let (h, rows) = read_csv(&sel.join("model_fits.csv"));
    assert_eq!(&h[..2], ["t", "observed"]);
    assert_eq!(rows.len(), 12);

    let boot = |out: &Path, threads: &str| {
        ok(&isrp(&[
            "bootstrap",
            "-i",
            s(&data),
            "--candidate",
            "logistic",
            "--candidate",
            "exponential",
            "--candidate",
            "logistic/power_rate:c=1",
            "-b",
            "25",
            "--seed",
            "9",
            "--threads",
            threads,
            "--out",
            s(out),
        ]))
    };
    let (b1, b2) = (dir.path().join("b1"), dir.path().join("b2"));
    boot(&b1, "1");
    boot(&b2, "4");
    for f in ["bootstrap.json", "aic_samples.csv"] {
        assert_eq!(fs::read(b1.join(f)).unwrap(), fs::read(b2.join(f)).unwrap(), "{f}");
    }
    let (h, rows) = read_csv(&b1.join("aic_samples.csv"));
    assert_eq!(h, ["replicate", "logistic", "exponential", "logistic/power_rate:c=1", "winner"]);
    assert_eq!(rows.len(), 25);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(b1.join("bootstrap.json")).unwrap()).unwrap();
    let wins: Vec<u64> = report["wins"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(wins.iter().sum::<u64>() + report["failed"].as_u64().unwrap(), 25);
    assert_eq!(wins[1], 0);
}
