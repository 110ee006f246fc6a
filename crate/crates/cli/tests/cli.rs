use std::path::Path;
use std::process::{Command, Output};

fn kramers(args: &[&str], config: Option<&str>, out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kramers"));
    cmd.args(args).arg("--quiet").arg("--out").arg(out);
    if let Some(text) = config {
        let path = out.with_extension("cfg");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn drude_kernels_write_four_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k");
    let o = kramers(&["kernels"], Some("bath.model = drude\nbath.omega_d = 10\n"), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["sigma.csv", "gamma_t.csv", "k_omega.csv", "k_t.csv"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        assert!(text.lines().count() > 100, "{f}");
    }
    let m = manifest(&out);
    assert_eq!(m["command"], "kernels");
    assert_eq!(m["all_passed"], true);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 4);
    assert_eq!(m["config"]["bath.omega_d"], "10");
}

#[test]
fn kernels_prints_unit_area() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k");
    std::fs::write(dir.path().join("k.cfg"), "bath.model = drude\nbath.omega_d = 10\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_kramers"))
        .args(["kernels", "--config"])
        .arg(dir.path().join("k.cfg"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("K area = 1.000000"), "{stdout}");
    assert!(stdout.contains("K(0) = 1.000000"), "{stdout}");
}

#[test]
fn missing_cutoff_is_a_config_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = kramers(&["kernels"], Some("bath.model = drude\n"), &dir.path().join("k"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bath.omega_d"));
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = kramers(&["simulate"], Some("sim.stepz = 10\n"), &dir.path().join("s"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sim.stepz"));
}

#[test]
fn det_check_default_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = kramers(&["det-check"], None, &out);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> =
        std::fs::read_to_string(out.join("det.jsonl")).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.iter().all(|l| l["pass"] == true));
    let case = |name: &str| lines.iter().find(|l| l["case"] == name).unwrap().clone();
    assert_eq!(case("retarded_first_order_n1024_0")["computed"], 1.0);
    let mid = case("midpoint_gamma2_equals_e")["computed"].as_f64().unwrap();
    assert!((mid - std::f64::consts::E).abs() < 0.01 * std::f64::consts::E);
    assert_eq!(case("drude_trace_log_rate")["target"], 0.0);
}

#[test]
fn unstable_langevin_step_exits_one_with_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let o = kramers(&["simulate"], Some("bath.gamma = 2\nsim.dt = 0.2\n"), &dir.path().join("s"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("suggested dt"));
}

#[test]
fn unstable_fokker_planck_step_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "simulate.langevin = false\nsimulate.fp = true\nfp.dt = 0.5\n";
    let o = kramers(&["simulate"], Some(cfg), &dir.path().join("s"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("suggested dt"));
}

#[test]
fn overdamped_compare_reports_l1_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let cfg = "bath.gamma = 4\nbath.kbt = 0.5\nsim.dt = 0.01\nsim.n_traj = 5000\nsim.x0 = 1\n\
               simulate.langevin = false\nsimulate.compare = true\ncompare.times = 0, 0.5, 1\n\
               fp.x_min = -3\nfp.x_max = 4\nfp.nx = 256\n";
    let o = kramers(&["simulate"], Some(cfg), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let records: Vec<serde_json::Value> =
        std::fs::read_to_string(out.join("compare.jsonl")).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 3);
    assert_eq!(records[2]["t"], 1.0);
    assert!(records.iter().all(|r| r["l1"].as_f64().unwrap() >= 0.0));
}

#[test]
fn symmetric_kramers_mass_series_decays_at_half_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k");
    let cfg = "sim.mode = inertial\nbath.gamma = 1\nfp.ordering = symmetric\nsimulate.langevin = false\n\
               simulate.fp = true\nfp.t_end = 2\nfp.nx = 64\nfp.nv = 64\nfp.x0 = 0\nfp.width = 1\n";
    let o = kramers(&["simulate"], Some(cfg), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("fp_mass.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    let m0 = rows[0][1];
    for r in &rows {
        let expect = m0 * (-0.5 * r[0]).exp();
        assert!((r[1] / expect - 1.0).abs() < 0.02, "t={} mass={} expect={expect}", r[0], r[1]);
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "sim.n_traj = 50\nsim.steps = 200\nsim.seed = 1\n";
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    kramers(&["simulate"], Some(cfg), &a);
    let o = Command::new(env!("CARGO_BIN_EXE_kramers"))
        .args(["simulate", "--quiet", "--seed", "1", "--config"])
        .arg(a.with_extension("cfg"))
        .arg("--out")
        .arg(&b)
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_kramers"))
        .args(["simulate", "--quiet", "--seed", "2", "--config"])
        .arg(a.with_extension("cfg"))
        .arg("--out")
        .arg(&c)
        .output()
        .unwrap();
    assert!(o.status.success());
    let read = |d: &Path| std::fs::read(d.join("moments.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(manifest(&c)["config"]["sim.seed"], "2");
}

#[test]
fn decohere_requires_hbar_and_reports_slope() {
    let dir = tempfile::tempdir().unwrap();
    let o = kramers(&["decohere"], None, &dir.path().join("classical"));
    assert_eq!(o.status.code(), Some(2));

    let out = dir.path().join("q");
    let cfg = "bath.mass = 100\nbath.gamma = 0.01\nbath.hbar = 1\npotential.kind = free\ndecohere.steps = 10\n";
    let o = kramers(&["decohere"], Some(cfg), &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let slope: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("decay_slope.jsonl")).unwrap()).unwrap();
    let ratio = slope["ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
    let m = manifest(&out);
    let herm = m["checks"].as_array().unwrap().iter().find(|c| c["case"] == "hermiticity").unwrap();
    assert_eq!(herm["pass"], true);
    let decay = std::fs::read_to_string(out.join("decay.csv")).unwrap();
    let traces: Vec<f64> = decay.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(traces.iter().all(|t| (t - traces[0]).abs() < 1e-8));
    assert!(out.join("wigner_000010.csv").exists());
}

#[test]
fn paper_checks_alias_runs_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let o = kramers(&["paper-checks"], None, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let lines = std::fs::read_to_string(out.join("checks.jsonl")).unwrap();
    for id in 1..=10 {
        assert!(lines.contains(&format!("\"c{id}_")), "criterion {id} missing");
    }
}
