use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_glaeser"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn paper_config(dir: &Path, name: &str, f: [f64; 4], extra: &str) -> PathBuf {
    let text = format!(
        "schema_version = 1\nscenario = \"paper-2d\"\n[data]\nkind = \"constant\"\nvalues = [{}, {}, {}, {}]\n[grid]\nresolution = 17\n{extra}\n[outputs]\ndir = \"{name}\"\nartifacts = [\"report\", \"feasibility-grid\", \"selection-csv\", \"region-svg\"]\n",
        f[0], f[1], f[2], f[3]
    );
    let p = dir.join(format!("{name}.toml"));
    std::fs::write(&p, text).unwrap();
    p
}

fn report(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join(name).join("report.json")).unwrap()).unwrap()
}

#[test]
fn feasible_paper_run_exits_zero_with_witness() {
    let d = tempfile::tempdir().unwrap();
    let cfg = paper_config(d.path(), "ok", [3.0, 2.0, -1.0, 2.0], "");
    let o = run_in(d.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(d.path(), "ok");
    assert_eq!(r["verdict"], "feasible");
    assert_eq!(r["analytic"]["witness"], serde_json::json!([2.0, 2.0]));
    assert_eq!(r["selection"]["verification"]["pass"], true);
    for f in ["feasibility_grid.csv", "selection.csv", "regions.svg"] {
        assert!(d.path().join("ok").join(f).exists(), "{f}");
    }
    let sel = std::fs::read_to_string(d.path().join("ok/selection.csv")).unwrap();
    assert!(sel.starts_with("x1,x2,F1,F2,residual\n"));
    assert_eq!(sel.lines().count(), 17 * 17 + 1);
}

#[test]
fn infeasible_paper_run_exits_one_and_cites_the_off_origin_rows() {
    let d = tempfile::tempdir().unwrap();
    let cfg = paper_config(d.path(), "bad", [1.0, 1.0, -2.0, 0.0], "");
    let o = run_in(d.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let r = report(d.path(), "bad");
    assert_eq!(r["verdict"], "infeasible");
    assert_eq!(r["analytic"]["cause"]["kind"], "off-origin-r1-r3");
    assert_eq!(r["empty_nodes"].as_array().unwrap().len(), 17 * 17 - 1);
    assert!(!d.path().join("bad/selection.csv").exists());
    let svg = std::fs::read_to_string(d.path().join("bad/regions.svg")).unwrap();
    assert!(svg.contains("infeasible"));
}

#[test]
fn malformed_configs_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let cases = [
        ("garbage", "this is = = not toml"),
        ("unknown", "schema_version = 1\nscenario = \"paper-2d\"\ncolour = 1\n[data]\nkind = \"constant\"\nvalues = [1.0, 1.0, 1.0, 1.0]\n"),
        ("version", "schema_version = 7\nscenario = \"paper-2d\"\n[data]\nkind = \"constant\"\nvalues = [1.0, 1.0, 1.0, 1.0]\n"),
        ("length", "schema_version = 1\nscenario = \"paper-2d\"\n[data]\nkind = \"constant\"\nvalues = [1.0]\n"),
    ];
    for (name, text) in cases {
        let p = d.path().join(format!("{name}.toml"));
        std::fs::write(&p, text).unwrap();
        let o = run_in(d.path(), &["run", p.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{name}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("config error"), "{name}");
    }
    let o = run_in(d.path(), &["run", "missing.toml"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_key_diagnostic_names_key_and_line() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("c.toml");
    std::fs::write(&p, "schema_version = 1\nscenario = \"paper-2d\"\n[data]\nkind = \"constant\"\nvalues = [1.0, 1.0, 1.0, 1.0]\n[grid]\nresolutoin = 9\n").unwrap();
    let o = run_in(d.path(), &["run", p.to_str().unwrap()]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("resolutoin") && err.contains("line 7"), "{err}");
}

#[test]
fn unstabilized_run_exits_two() {
    let d = tempfile::tempdir().unwrap();
    let cfg = paper_config(d.path(), "ns", [3.0, 2.0, -1.0, 2.0], "[refinement]\nmax_iterations = 1\n");
    assert_eq!(code(&run_in(d.path(), &["run", cfg.to_str().unwrap()])), 2);
}

#[test]
fn csv_artifacts_are_byte_identical_across_runs_and_thread_counts() {
    let d = tempfile::tempdir().unwrap();
    let cfg = paper_config(d.path(), "det", [3.0, 3.0, -0.5, 3.0], "");
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = format!("det{k}");
        let o = bin()
            .current_dir(d.path())
            .env("RAYON_NUM_THREADS", threads)
            .args(["run", cfg.to_str().unwrap(), "--out-dir", &out])
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        let read = |f: &str| std::fs::read(d.path().join(&out).join(f)).unwrap();
        outputs.push((read("selection.csv"), read("feasibility_grid.csv"), read("regions.svg")));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn intro_scenario_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    for (coeffs, expected) in [("[0.0, 1.0]", 0), ("[0.0, 0.0, 1.0]", 0), ("[1.0]", 1)] {
        let p = d.path().join("i.toml");
        std::fs::write(
            &p,
            format!("schema_version = 1\nscenario = \"intro-1d\"\n[data]\nkind = \"poly\"\ncoeffs = {coeffs}\n[grid]\nresolution = 65\n"),
        )
        .unwrap();
        assert_eq!(code(&run_in(d.path(), &["run", p.to_str().unwrap()])), expected, "{coeffs}");
    }
}

#[test]
fn boundary_scan_defaults_track_the_curve() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["boundary-scan", "--out-csv", "scan.csv", "--out-svg", "scan.svg"]);
    assert_eq!(code(&o), 0);
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["resolution"], 128);
    assert!((summary["hyperbola_fit"]["c"].as_f64().unwrap() - 1.0).abs() < 0.05);
    let h = 2.0 / 127.0;
    let mut rdr = csv::Reader::from_path(d.path().join("scan.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["i", "j", "f2", "f4", "feasible"]);
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let f2: f64 = rec[2].parse().unwrap();
        let f4: f64 = rec[3].parse().unwrap();
        let feasible: bool = rec[4].parse().unwrap();
        // nodes more than one cell from the curve are classified as the curve says
        let curve = if f2 > 1.0 { 1.0 + 1.0 / (f2 - 1.0) } else { f64::INFINITY };
        if (f4 - curve).abs() > h && (f2 - (1.0 + 1.0 / (f4 - 1.0))).abs() > h {
            assert_eq!(feasible, f4 > curve, "({f2}, {f4})");
        }
        rows += 1;
    }
    assert_eq!(rows, 128 * 128);
    let svg = std::fs::read_to_string(d.path().join("scan.svg")).unwrap();
    assert!(svg.contains(r#"viewBox="1 -3 2 2""#));
}

#[test]
fn boundary_scan_zoom_and_coarse() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["boundary-scan", "--f2-range", "2.5,3", "--f4-range", "2.5,3", "--resolution", "16"]);
    let s: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["feasible_nodes"], 256);
    assert_eq!(s["boundary_points"], 0);
    let o = run_in(d.path(), &["boundary-scan", "--resolution", "16"]);
    let s: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(s["boundary_points"].as_u64().unwrap() > 0);
    assert_eq!(code(&run_in(d.path(), &["boundary-scan", "--resolution", "8"])), 2);
}

#[test]
fn plot_regions_variants() {
    let d = tempfile::tempdir().unwrap();
    let o = run_in(d.path(), &["plot-regions", "--f", "3,2,-1,2", "--resolution", "9", "--out-svg", "a.svg"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = std::fs::read_to_string(d.path().join("a.svg")).unwrap();
    assert!(a.contains("feasible, corner (2, 2)"));
    let o = run_in(d.path(), &["plot-regions", "--f", "3,2,1,2", "--resolution", "0", "--out-svg", "b.svg"]);
    assert_eq!(code(&o), 0);
    let o = run_in(d.path(), &["plot-regions", "--f", "1,1,-2,0", "--out-svg", "c.svg"]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(d.path().join("c.svg")).unwrap().contains("infeasible"));
}

#[test]
fn verify_selection_command() {
    let d = tempfile::tempdir().unwrap();
    let ok = paper_config(d.path(), "v", [3.0, 2.0, -1.0, 2.0], "");
    let o = run_in(d.path(), &["verify-selection", ok.to_str().unwrap(), "--out-csv", "sel.csv"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert!(d.path().join("sel.csv").exists());
    // a zero tolerance is stricter than the discretization allows
    let o = run_in(d.path(), &["verify-selection", ok.to_str().unwrap(), "--tol", "0"]);
    assert_eq!(code(&o), 1);
    let bad = paper_config(d.path(), "w", [1.0, 1.0, -2.0, 0.0], "");
    assert_eq!(code(&run_in(d.path(), &["verify-selection", bad.to_str().unwrap()])), 1);
}
