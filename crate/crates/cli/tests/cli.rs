use std::path::Path;
use std::process::Command;

use boussinesq_cli::manifest::{digest_file, Manifest};
use boussinesq_cli::{RunConfig, Workspace};
use boussinesq_core::profiles::ProfileSpec;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_boussinesq"))
}

fn write_config(dir: &Path, json: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

const ZERO: &str = r#"{"profile": {"u0": [{"family": "zero"}]},
  "k_grid": {"start": 0.01, "end": 7, "nodes": 41},
  "t": [20, 40], "pde": {"half_length": 64, "n": 256}}"#;

const SMALL: &str = r#"{"profile": {"u0": [{"family": "gaussian", "amplitude": -0.1}]},
  "k_grid": {"start": 0.05, "end": 7, "nodes": 140},
  "t": [20, 40], "pde": {"half_length": 128, "n": 1024, "allow_small_domain": true}}"#;

#[test]
fn zero_profile_compare_has_zero_residuals_and_no_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ZERO);
    let out = dir.path().join("out");
    let (code, stdout, stderr) = run(&["compare", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("slope n/a"), "{stdout}");
    let text = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema=1"));
    assert_eq!(lines.next(), Some("zeta,t,u_num,u_asym,envelope,residual,residual_over_envelope"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert_eq!(r[5], 0.0);
        assert_eq!(r[5], r[2] - r[3]);
    }
    for f in ["spectral_line.csv", "fields_t20.csv", "fields_t40.csv"] {
        let head = std::fs::read_to_string(out.join(f)).unwrap();
        assert!(head.starts_with("# schema=1\n"), "{f}");
    }
}

#[test]
fn manifest_lists_every_output_with_its_digest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ZERO);
    let out = dir.path().join("out");
    let (code, _, stderr) = run(&["compare", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    let m = Manifest::read(&out).unwrap().unwrap();
    let mut on_disk: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    assert_eq!(m.files.keys().cloned().collect::<Vec<_>>(), on_disk);
    for (name, digest) in &m.files {
        assert_eq!(&digest_file(&out.join(name)).unwrap(), digest);
    }
    for stage in ["scatter", "asym", "pde", "compare"] {
        assert!(m.stages[stage].seconds >= 0.0);
    }
    assert_eq!(m.zeta, vec![0.6, 1.0, 1.4]);
    assert_eq!(m.t, vec![20.0, 40.0]);
    assert_eq!(m.config_hash, RunConfig::from_json(ZERO).unwrap().hash());
    let (code, report, _) = run(&["report", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(report.contains("spectral_line.csv") && report.contains("slope"), "{report}");
}

#[test]
fn reruns_reproduce_csv_outputs_and_use_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = cfg.to_str().unwrap();
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let (code, _, stderr) = run(&["compare", "--config", c, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert_eq!(code, 0, "{stderr}");
    }
    for f in ["spectral_line.csv", "comparison.csv", "fields_t20.csv", "fields_t40.csv", "rays.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let cached = |dir: &Path| Manifest::read(dir).unwrap().unwrap().stages["compare"].details["cached"].clone();
    assert_eq!(cached(&a), serde_json::json!({"spectral_line": false, "fields": false}));

    // unchanged inputs: both heavy stages come from disk
    let before = std::fs::read(a.join("comparison.csv")).unwrap();
    assert_eq!(run(&["compare", "--config", c, "--out", a.to_str().unwrap()]).0, 0);
    assert_eq!(cached(&a), serde_json::json!({"spectral_line": true, "fields": true}));
    assert_eq!(std::fs::read(a.join("comparison.csv")).unwrap(), before);

    // a tampered artifact no longer matches its digest and is recomputed
    let mut line = std::fs::read_to_string(a.join("spectral_line.csv")).unwrap();
    line.push('\n');
    std::fs::write(a.join("spectral_line.csv"), line).unwrap();
    assert_eq!(run(&["compare", "--config", c, "--out", a.to_str().unwrap()]).0, 0);
    assert_eq!(cached(&a), serde_json::json!({"spectral_line": false, "fields": true}));

    // a changed t-list invalidates the reference run only
    let (code, _, stderr) = run(&["compare", "--config", c, "--out", a.to_str().unwrap(), "--t", "20,30"]);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(cached(&a), serde_json::json!({"spectral_line": true, "fields": false}));
    assert!(a.join("fields_t30.csv").exists());
}

#[test]
fn stages_run_independently() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let c = cfg.to_str().unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    let (code, stdout, stderr) = run(&["asym", "--config", c, "--out", o, "--zeta", "0.8,1.2"]);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(stdout.lines().count(), 2);
    let rays: Value = serde_json::from_str(&std::fs::read_to_string(out.join("rays.json")).unwrap()).unwrap();
    assert_eq!(rays["rays"].as_array().unwrap().len(), 2);
    assert_eq!(rays["rays"][1]["zeta"], 1.2);
    assert!(out.join("spectral_line.csv").exists());
    assert!(!out.join("fields_t20.csv").exists());

    let (code, _, stderr) = run(&["pde", "--config", c, "--out", o, "--t", "5"]);
    assert_eq!(code, 0, "{stderr}");
    assert!(out.join("fields_t5.csv").exists());

    let (code, stdout, _) = run(&["scatter", "--config", c, "--out", o, "--kmax", "6", "--override", "k_grid.nodes=120"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("120 nodes on [0.05, 6]"), "{stdout}");
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("out");
    let o = o.to_str().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let c = cfg.to_str().unwrap();

    // validation
    assert_eq!(run(&["scatter", "--out", o, "--override", "no_such_key=1"]).0, 2);
    assert_eq!(run(&["compare", "--config", c, "--out", o, "--t", "10,40"]).0, 2);
    assert_eq!(run(&["asym", "--config", c, "--out", o, "--zeta", "0.02"]).0, 2);
    assert_eq!(run(&["pde", "--config", c, "--out", o, "--override", "pde.n=1000"]).0, 2);
    let (code, _, stderr) = run(&["pde", "--config", c, "--out", o, "--t", "200", "--override", "allow_small_domain=false"]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("domain too small"), "{stderr}");

    // numerical stability: a large positive bump blows up quickly
    let big = write_config(
        dir.path(),
        r#"{"profile": {"u0": [{"family": "gaussian", "amplitude": 3.0}]},
            "pde": {"half_length": 32, "n": 512, "allow_small_domain": true}}"#,
    );
    let (code, _, stderr) = run(&["pde", "--config", big.to_str().unwrap(), "--out", o, "--t", "20"]);
    assert_eq!(code, 3, "{stderr}");
    assert!(stderr.starts_with("error: pde stage"), "{stderr}");

    // assumption failure: the positive bump has a zero of s11 in the sector
    let pos = write_config(
        dir.path(),
        r#"{"profile": {"u0": [{"family": "gaussian", "amplitude": 0.1}]}, "require_assumptions": true,
            "k_grid": {"start": 0.05, "end": 7, "nodes": 140}}"#,
    );
    let p = pos.to_str().unwrap();
    assert_eq!(run(&["check-assumptions", "--config", p, "--out", o]).0, 4);
    assert_eq!(run(&["asym", "--config", p, "--out", o]).0, 4);

    // I/O
    assert_eq!(run(&["scatter", "--config", "/nonexistent/config.json", "--out", o]).0, 1);
    assert_eq!(run(&["report", "--out", dir.path().join("empty").to_str().unwrap()]).0, 1);
}

/// ν scales like ε² for small data with a first-order correction:
/// g(ε) = ν/ε² satisfies g(ε) ≈ g₀ + g₁ε, so successive differences on the
/// ladder {0.025, 0.05, 0.1} double. Each ν also matches
/// −ln(1 − |r₁(k₀)|²)/(2π) with r₁(k₀) evaluated directly by the scatter
/// stage rather than interpolated.
#[test]
fn amplitude_ladder_scales_with_nu() {
    let dir = tempfile::tempdir().unwrap();
    let mut g = Vec::new();
    for (i, eps) in [0.025, 0.05, 0.1].into_iter().enumerate() {
        let mut cfg = RunConfig::default();
        cfg.profile = ProfileSpec::gaussian_u0(eps, 1.0, 0.0);
        cfg.zeta = vec![1.0];
        let mut ws = Workspace::open(&dir.path().join(i.to_string()), cfg.clone()).unwrap();
        let (line, _) = ws.line().unwrap();
        let p = ws.asym(&line).unwrap()[0];
        let scatterer = boussinesq_core::Scatterer::new(
            boussinesq_core::profiles::make_profile(&cfg.profile).unwrap(),
            cfg.scatter,
        )
        .unwrap();
        let direct = scatterer.reflection(p.k0, boussinesq_core::scatter::Which::R1).unwrap().value;
        let nu_direct = -(1.0 - direct.norm_sqr()).ln() / std::f64::consts::TAU;
        assert!((p.nu / nu_direct - 1.0).abs() < 1e-6, "{} vs {nu_direct}", p.nu);
        g.push(p.nu / (eps * eps));
    }
    eprintln!("nu/eps^2 ladder: {g:?}");
    let ratio = (g[2] - g[1]) / (g[1] - g[0]);
    assert!((ratio - 2.0).abs() < 0.2, "difference ratio {ratio}");
}
