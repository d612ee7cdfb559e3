//! Stage orchestration over an output directory that doubles as the
//! artifact store.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use boussinesq_core::asymptotics::{asym_params, u_asym};
use boussinesq_core::profiles::make_profile;
use boussinesq_core::scatter::{compute_zeta0, uniform_grid};
use boussinesq_core::{
    AssumptionReport, AsymptoticParams, Complex64, Profile, Scatterer, SolverConfig, SpectralLine, WaveField,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{sha256_hex, RunConfig};
use crate::error::CliError;
use crate::manifest::{Manifest, StageRecord};

pub const SPECTRAL_LINE_FILE: &str = "spectral_line.csv";
pub const RAYS_FILE: &str = "rays.json";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const ASSUMPTIONS_FILE: &str = "assumptions.json";

/// Smallest sample time the comparison accepts.
pub const MIN_COMPARE_TIME: f64 = 20.0;

/// `fields_t40.csv` for integral times, `fields_t12.5.csv` otherwise.
pub fn field_file(t: f64) -> String {
    if t.fract() == 0.0 && t.abs() < 1e15 {
        format!("fields_t{}.csv", t as i64)
    } else {
        format!("fields_t{t}.csv")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub zeta: f64,
    pub t: f64,
    pub u_num: f64,
    pub u_asym: f64,
    pub envelope: f64,
    pub residual: f64,
    pub residual_over_envelope: f64,
}

impl ComparisonRow {
    pub fn new(zeta: f64, t: f64, u_num: f64, u_asym: f64, envelope: f64) -> Self {
        let residual = u_num - u_asym;
        let residual_over_envelope = if envelope > 0.0 {
            residual / envelope
        } else if residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        ComparisonRow {
            zeta,
            t,
            u_num,
            u_asym,
            envelope,
            residual,
            residual_over_envelope,
        }
    }
}

/// Per-ray summary of the comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub zeta: f64,
    /// Least-squares slope of ln|residual| against ln t; `None` when fewer
    /// than two nonzero residuals exist.
    pub slope: Option<f64>,
    pub t_max: f64,
    pub rel_error_at_t_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub fits: Vec<FitSummary>,
}

/// Least-squares slope of ln|r| against ln t over the points with r ≠ 0.
pub fn fit_slope(t: &[f64], residual: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(residual)
        .filter(|(t, r)| **t > 0.0 && r.abs() > 0.0 && r.is_finite())
        .map(|(t, r)| (t.ln(), r.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

pub fn fit_rows(rows: &[ComparisonRow], zetas: &[f64]) -> Vec<FitSummary> {
    zetas
        .iter()
        .map(|&z| {
            let mine: Vec<&ComparisonRow> = rows.iter().filter(|r| r.zeta == z).collect();
            let t: Vec<f64> = mine.iter().map(|r| r.t).collect();
            let res: Vec<f64> = mine.iter().map(|r| r.residual).collect();
            let last = mine.iter().max_by(|a, b| a.t.total_cmp(&b.t));
            FitSummary {
                zeta: z,
                slope: fit_slope(&t, &res),
                t_max: last.map_or(f64::NAN, |r| r.t),
                rel_error_at_t_max: last.map_or(f64::NAN, |r| r.residual_over_envelope.abs()),
            }
        })
        .collect()
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "# schema=1")?;
    writeln!(w, "zeta,t,u_num,u_asym,envelope,residual,residual_over_envelope")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.zeta, r.t, r.u_num, r.u_asym, r.envelope, r.residual, r.residual_over_envelope
        )?;
    }
    Ok(())
}

/// Numeric rows of a `# schema=1` CSV, header skipped.
fn read_csv_rows(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |reason: String| CliError::Artifact {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines();
    if lines.next() != Some("# schema=1") {
        return Err(bad("missing `# schema=1` header".into()));
    }
    lines.next().ok_or_else(|| bad("missing column header".into()))?;
    lines
        .enumerate()
        .map(|(i, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
            if vals.len() != columns {
                return Err(bad(format!("row {} has {} columns, expected {columns}", i + 1, vals.len())));
            }
            Ok(vals)
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// A configuration bound to an output directory.
pub struct Workspace {
    dir: PathBuf,
    config: RunConfig,
    profile: Profile,
    manifest: Manifest,
}

impl Workspace {
    pub fn open(dir: &Path, config: RunConfig) -> Result<Self, CliError> {
        config.validate()?;
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let profile = make_profile(&config.profile).map_err(CliError::stage("profile"))?;
        // an unreadable previous manifest only costs the cache
        let previous = Manifest::read(dir).ok().flatten();
        let keys = stage_keys(&config);
        let manifest = Manifest::carry_over(&config, previous, &keys);
        Ok(Workspace {
            dir: dir.to_path_buf(),
            config,
            profile,
            manifest,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn key(&self, stage: &str) -> String {
        stage_keys(&self.config)[stage].clone()
    }

    fn record(&mut self, name: &str, rec: StageRecord) -> Result<(), CliError> {
        self.manifest.record(&self.dir, name, rec)?;
        self.manifest.write(&self.dir)
    }

    fn is_current(&self, stage: &str) -> bool {
        self.manifest.stage_is_current(&self.dir, stage, &self.key(stage))
    }

    fn scatterer(&self) -> Result<Scatterer, CliError> {
        Scatterer::new(self.profile.clone(), self.config.scatter).map_err(CliError::stage("scatter"))
    }

    /// Computes r₁ on the k-grid and writes `spectral_line.csv`.
    pub fn scatter(&mut self) -> Result<SpectralLine, CliError> {
        let started = Instant::now();
        let g = self.config.k_grid;
        let line = self
            .scatterer()?
            .spectral_line(&uniform_grid(g.start, g.end, g.nodes))
            .map_err(CliError::stage("scatter"))?;
        let zeta0 = compute_zeta0(&line).map_err(CliError::stage("scatter"))?;
        let path = self.dir.join(SPECTRAL_LINE_FILE);
        let mut w = create(&path)?;
        line.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
        let (r0, dist) = line.origin_extrapolation();
        let max_err = line.est_error.iter().cloned().fold(0.0, f64::max);
        let rec = StageRecord {
            key: self.key("scatter"),
            seconds: started.elapsed().as_secs_f64(),
            error_estimate: Some(max_err),
            outputs: vec![SPECTRAL_LINE_FILE.into()],
            details: json!({
                "zeta0": zeta0,
                "origin_r1": [r0.re, r0.im],
                "origin_distance_to_omega": dist,
                "max_abs_r1": line.abs2.iter().cloned().fold(0.0, f64::max).sqrt(),
            }),
        };
        self.record("scatter", rec)?;
        Ok(line)
    }

    /// The spectral line from disk when its digest and key match, computed
    /// otherwise. The flag tells whether the cache was used.
    pub fn line(&mut self) -> Result<(SpectralLine, bool), CliError> {
        if self.is_current("scatter") {
            let path = self.dir.join(SPECTRAL_LINE_FILE);
            let rows = read_csv_rows(&path, 6)?;
            let k = rows.iter().map(|r| r[0]).collect();
            let r1 = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
            let err = rows.iter().map(|r| r[5]).collect();
            let line = SpectralLine::from_samples(k, r1, err).map_err(|e| CliError::Artifact {
                path,
                reason: e.to_string(),
            })?;
            return Ok((line, true));
        }
        Ok((self.scatter()?, false))
    }

    /// Runs the solitonless and generic-origin checks and writes
    /// `assumptions.json`. A failed verdict is reported, not raised.
    pub fn check_assumptions(&mut self) -> Result<AssumptionReport, CliError> {
        let started = Instant::now();
        let report = self.scatterer()?.assumption_checks();
        let value = assumption_json(&report);
        let path = self.dir.join(ASSUMPTIONS_FILE);
        let text = serde_json::to_string_pretty(&value).expect("json serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        let rec = StageRecord {
            key: self.key("assumptions"),
            seconds: started.elapsed().as_secs_f64(),
            error_estimate: Some(report.origin_rel_change),
            outputs: vec![ASSUMPTIONS_FILE.into()],
            details: json!({ "pass": !report.any_failed() }),
        };
        self.record("assumptions", rec)?;
        Ok(report)
    }

    fn ensure_assumptions(&mut self) -> Result<(), CliError> {
        let pass = if self.is_current("assumptions") {
            self.manifest.stages["assumptions"].details["pass"].as_bool() == Some(true)
        } else {
            !self.check_assumptions()?.any_failed()
        };
        if pass {
            Ok(())
        } else {
            Err(CliError::Assumption(format!(
                "see {}",
                self.dir.join(ASSUMPTIONS_FILE).display()
            )))
        }
    }

    /// Asymptotic parameters on every configured ray; writes `rays.json`.
    pub fn asym(&mut self, line: &SpectralLine) -> Result<Vec<AsymptoticParams>, CliError> {
        if self.config.require_assumptions {
            self.ensure_assumptions()?;
        }
        let started = Instant::now();
        let cfg = self.config.asym;
        let params: Vec<AsymptoticParams> = self
            .config
            .zeta
            .par_iter()
            .map(|&z| asym_params(line, z, &cfg))
            .collect::<Result<_, _>>()
            .map_err(CliError::stage("asym"))?;
        let rays: Vec<Value> = params
            .iter()
            .map(|p| {
                let mut v = serde_json::to_value(p.record()).expect("ray record serializes");
                v["tail_error"] = json!(p.tail_error);
                v["valid"] = json!(p.valid);
                v
            })
            .collect();
        let zeta0 = params.first().map(|p| p.zeta0);
        let doc = json!({ "schema": 1, "zeta0": zeta0, "rays": rays });
        let path = self.dir.join(RAYS_FILE);
        let text = serde_json::to_string_pretty(&doc).expect("json serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        let rec = StageRecord {
            key: self.key("asym"),
            seconds: started.elapsed().as_secs_f64(),
            error_estimate: Some(params.iter().map(|p| p.tail_error).fold(0.0, f64::max)),
            outputs: vec![RAYS_FILE.into()],
            details: doc,
        };
        self.record("asym", rec)?;
        Ok(params)
    }

    fn solver_config(&self) -> SolverConfig {
        let pde = self.config.pde;
        let times = self.config.sorted_times();
        let t_end = times.last().copied().unwrap_or(0.0);
        let mut cfg = SolverConfig::new(pde.half_length, pde.n, t_end);
        cfg.dt = pde.dt;
        cfg.c_cfl = pde.c_cfl;
        cfg.dealias = pde.dealias;
        cfg.sample_times = times;
        cfg.x_observation = self.config.x_observation();
        cfg.significance = pde.significance;
        cfg.allow_small_domain = pde.allow_small_domain;
        cfg
    }

    /// One reference run through all sample times; writes `fields_t*.csv`.
    pub fn pde(&mut self) -> Result<Vec<WaveField>, CliError> {
        if self.config.t.is_empty() {
            return Err(CliError::Config("the t-list is empty".into()));
        }
        let started = Instant::now();
        let cfg = self.solver_config();
        let run = boussinesq_core::pderef::pde_run(&self.profile, &cfg).map_err(CliError::stage("pde"))?;
        let mut outputs = Vec::new();
        for f in &run.fields {
            let name = field_file(f.t);
            let path = self.dir.join(&name);
            let mut w = create(&path)?;
            f.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
            outputs.push(name);
        }
        let (mu0, mv0) = (run.conservation[0].mass_u, run.conservation[0].mass_v);
        let drift = |now: f64, start: f64| (now - start).abs() / start.abs().max(f64::MIN_POSITIVE);
        let rec = StageRecord {
            key: self.key("pde"),
            seconds: started.elapsed().as_secs_f64(),
            error_estimate: Some(run.resolution.iter().map(|g| g.tail_ratio).fold(0.0, f64::max)),
            outputs,
            details: json!({
                "steps": run.steps,
                "required_half_length": run.required_half_length,
                "notes": run.notes,
                "conservation": run.conservation.iter().map(|c| json!({
                    "t": c.t, "mass_u": c.mass_u, "mass_v": c.mass_v,
                    "drift_u": if mu0 != 0.0 { drift(c.mass_u, mu0) } else { (c.mass_u - mu0).abs() },
                    "drift_v": if mv0 != 0.0 { drift(c.mass_v, mv0) } else { (c.mass_v - mv0).abs() },
                })).collect::<Vec<_>>(),
                "resolution": run.resolution.iter().map(|g| json!({
                    "t": g.t, "tail_ratio": g.tail_ratio, "pass": g.pass,
                })).collect::<Vec<_>>(),
            }),
        };
        self.record("pde", rec)?;
        Ok(run.fields)
    }

    /// Fields from disk when current, from a fresh run otherwise.
    pub fn fields(&mut self) -> Result<(Vec<WaveField>, bool), CliError> {
        if self.is_current("pde") {
            let cfg = self.solver_config();
            let fields = cfg
                .sample_times
                .iter()
                .map(|&t| {
                    let rows = read_csv_rows(&self.dir.join(field_file(t)), 3)?;
                    Ok(WaveField {
                        half_length: cfg.half_length,
                        n: rows.len(),
                        t,
                        u: rows.iter().map(|r| r[1]).collect(),
                        v: rows.iter().map(|r| r[2]).collect(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            return Ok((fields, true));
        }
        Ok((self.pde()?, false))
    }

    /// Samples the reference solution on each ray at each time and compares
    /// with the leading asymptotic term.
    pub fn compare(&mut self) -> Result<Comparison, CliError> {
        let times = self.config.sorted_times();
        if self.config.zeta.is_empty() || times.is_empty() {
            return Err(CliError::Config("compare needs non-empty zeta and t lists".into()));
        }
        if times[0] < MIN_COMPARE_TIME {
            return Err(CliError::Config(format!(
                "compare needs t >= {MIN_COMPARE_TIME}, got {}",
                times[0]
            )));
        }
        let started = Instant::now();
        let (line, line_cached) = self.line()?;
        // sector violations surface here, before the reference run
        let params = self.asym(&line)?;
        let (fields, fields_cached) = self.fields()?;
        let mut rows = Vec::new();
        for p in &params {
            for f in &fields {
                let x = p.zeta * f.t;
                let (u_num, _) = f.sample(x);
                let a = u_asym(p, x, f.t).map_err(CliError::stage("compare"))?;
                rows.push(ComparisonRow::new(p.zeta, f.t, u_num, a.u, a.envelope));
            }
        }
        let path = self.dir.join(COMPARISON_FILE);
        let mut w = create(&path)?;
        write_comparison_csv(&rows, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&path, e))?;
        let fits = fit_rows(&rows, &self.config.zeta);
        let rec = StageRecord {
            key: self.key("compare"),
            seconds: started.elapsed().as_secs_f64(),
            error_estimate: fits.iter().map(|f| f.rel_error_at_t_max).filter(|e| e.is_finite()).reduce(f64::max),
            outputs: vec![COMPARISON_FILE.into()],
            details: json!({
                "fits": fits,
                "cached": { "spectral_line": line_cached, "fields": fields_cached },
            }),
        };
        self.record("compare", rec)?;
        Ok(Comparison { rows, fits })
    }
}

fn stage_keys(config: &RunConfig) -> BTreeMap<&'static str, String> {
    let scatter = config.scatter_key();
    let asym_input = json!({
        "scatter": scatter,
        "asym": config.asym,
        "zeta": config.zeta,
        "require_assumptions": config.require_assumptions,
    });
    let asym = sha256_hex(asym_input.to_string().as_bytes());
    BTreeMap::from([
        ("scatter", scatter.clone()),
        ("assumptions", scatter),
        ("asym", asym),
        ("pde", config.pde_key()),
        ("compare", config.hash()),
    ])
}

fn complex_json(z: Option<Complex64>) -> Value {
    z.map_or(Value::Null, |z| json!([z.re, z.im]))
}

fn assumption_json(r: &AssumptionReport) -> Value {
    json!({
        "schema": 1,
        "pass": !r.any_failed(),
        "solitonless": format!("{:?}", r.solitonless),
        "generic_origin": format!("{:?}", r.generic_origin),
        "min_abs_s11_d1": r.min_abs_s11_d1,
        "min_abs_sa11_d4": r.min_abs_sa11_d4,
        "winding_s11": r.winding_s11,
        "winding_sa11": r.winding_sa11,
        "zero_s11": complex_json(r.zero_s11),
        "zero_sa11": complex_json(r.zero_sa11),
        "origin_limit_s": complex_json(Some(r.origin_limit_s)),
        "origin_limit_sa": complex_json(Some(r.origin_limit_sa)),
        "origin_rel_change": r.origin_rel_change,
        "diagnostics": r.diagnostics,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.3e}"))
}

/// Plain-text summary of the manifest in `dir`.
pub fn report(dir: &Path) -> Result<String, CliError> {
    let m = Manifest::read(dir)?.ok_or_else(|| CliError::Artifact {
        path: dir.join(crate::manifest::MANIFEST_FILE),
        reason: "no manifest; run a stage first".into(),
    })?;
    let mut s = String::new();
    let w = &mut s;
    use std::fmt::Write as _;
    let _ = writeln!(w, "run {}  (tool {})", &m.config_hash[..16], m.tool_version);
    let _ = writeln!(w, "profile   {}", serde_json::to_string(&m.profile).unwrap_or_default());
    let _ = writeln!(
        w,
        "k-grid    [{}, {}] with {} nodes",
        m.k_grid.start, m.k_grid.end, m.k_grid.nodes
    );
    let _ = writeln!(w, "zeta      {:?}", m.zeta);
    let _ = writeln!(w, "t         {:?}", m.t);
    let _ = writeln!(w);
    let _ = writeln!(w, "{:<12} {:>10} {:>12}  outputs", "stage", "seconds", "error est");
    for (name, rec) in &m.stages {
        let _ = writeln!(
            w,
            "{:<12} {:>10.2} {:>12}  {}",
            name,
            rec.seconds,
            fmt_opt(rec.error_estimate),
            rec.outputs.join(" ")
        );
    }
    if let Some(asym) = m.stages.get("asym") {
        let _ = writeln!(w);
        let _ = writeln!(w, "{:>8} {:>10} {:>12} {:>10} {:>6}", "zeta", "k0", "nu", "|q|", "valid");
        for ray in asym.details["rays"].as_array().into_iter().flatten() {
            let q = &ray["q"];
            let abs_q = q[0].as_f64().unwrap_or(f64::NAN).hypot(q[1].as_f64().unwrap_or(f64::NAN));
            let _ = writeln!(
                w,
                "{:>8.3} {:>10.4} {:>12.4e} {:>10.4} {:>6}",
                ray["zeta"].as_f64().unwrap_or(f64::NAN),
                ray["k0"].as_f64().unwrap_or(f64::NAN),
                ray["nu"].as_f64().unwrap_or(f64::NAN),
                abs_q,
                ray["valid"].as_bool().unwrap_or(false)
            );
        }
    }
    if let Some(cmp) = m.stages.get("compare") {
        let fits: Vec<FitSummary> = serde_json::from_value(cmp.details["fits"].clone()).unwrap_or_default();
        let _ = writeln!(w);
        let _ = writeln!(w, "{:>8} {:>10} {:>8} {:>16}", "zeta", "slope", "t_max", "rel err @ t_max");
        for f in fits {
            let _ = writeln!(
                w,
                "{:>8.3} {:>10} {:>8} {:>16.4e}",
                f.zeta,
                f.slope.map_or("-".into(), |s| format!("{s:.3}")),
                f.t_max,
                f.rel_error_at_t_max
            );
        }
    }
    let _ = writeln!(w);
    for (name, digest) in &m.files {
        let _ = writeln!(w, "{:<24} sha256:{}", name, digest);
    }
    Ok(s)
}
