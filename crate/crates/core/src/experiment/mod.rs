//! Configuration, orchestration and report files for the command-line driver.

mod config;
mod verify;

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::decayfit::{sigma_grid, uniform_decay_sweep, SweepOptions};
use crate::error::{Error, Result};
use crate::homfn::{critical_directions, factor_at_point, global_order, height};
use crate::maxop::{
    maximal_function, quarter_octave_scales, sharpness_experiment, GridFunction, GridGeometry, SharpnessOptions,
    SurfaceQuadrature, Verdict,
};
use crate::oscquad::{run_batch, SurfaceSpec};
use crate::rational::format_rational;

pub use config::{
    parse_config, parse_config_with, BatchConfig, Command, DecayConfig, ExperimentConfig, Overrides, SharpnessConfig,
    DEFAULT_SEED, DEFAULT_TOL,
};
pub use verify::{
    curve_checks, identity_checks, polar_checks, random_phase, run_verify, structure_checks, CheckResult, VerifyConfig,
    VerifyReport,
};

/// What a run wrote and whether its checks passed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub command: Command,
    pub pass: bool,
    pub config_sha256: String,
    pub files: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    hash: String,
    config: Value,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn io(path: &Path, e: std::io::Error) -> Error {
        Error::Parse(format!("writing {}: {e}", path.display()))
    }

    /// `{config_sha256, config, result}`
    fn json(&mut self, name: &str, result: Value) -> Result<()> {
        let doc = json!({ "config_sha256": self.hash, "config": self.config, "result": result });
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    /// Appends a `config_sha256` column to CSV produced by `fill`.
    fn csv(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut raw = Vec::new();
        fill(&mut raw)?;
        let csv_err = |e: csv::Error| Error::Parse(format!("CSV: {e}"));
        let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(&raw[..]);
        let mut wr = csv::Writer::from_writer(Vec::new());
        for (i, rec) in rd.records().enumerate() {
            let mut rec = rec.map_err(csv_err)?;
            rec.push_field(if i == 0 { "config_sha256" } else { &self.hash });
            wr.write_record(&rec).map_err(csv_err)?;
        }
        let out = wr.into_inner().map_err(|e| Error::Parse(format!("CSV: {e}")))?;
        self.bytes(name, &out)
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(|e| Self::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))
}

/// Runs the configured command, writing its reports under `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    fs::create_dir_all(&cfg.out).map_err(|e| Writer::io(&cfg.out, e))?;
    let mut w = Writer { dir: &cfg.out, hash: cfg.hash(), config: to_value(cfg)?, files: Vec::new() };
    let pass = match cfg.command {
        Command::Analyze => analyze(cfg, &mut w)?,
        Command::Decay => decay(cfg, &mut w)?,
        Command::Sharpness => sharpness(cfg, &mut w)?,
        Command::Verify => {
            let report = run_verify(&cfg.verify, cfg.seed);
            w.json("verify.json", to_value(&report)?)?;
            report.pass
        }
        Command::Batch => batch(cfg, &mut w)?,
    };
    Ok(RunSummary { command: cfg.command, pass, config_sha256: w.hash, files: w.files })
}

fn analyze(cfg: &ExperimentConfig, w: &mut Writer) -> Result<bool> {
    let f = cfg.phase()?;
    let dirs = critical_directions(&f)?;
    let factorizations: Vec<Value> = dirs
        .iter()
        .map(|d| match factor_at_point(&f, d.theta) {
            Ok((frame, fact)) => json!({ "theta": d.theta, "frame": frame, "factorization": fact }),
            Err(e) => json!({ "theta": d.theta, "error": format!("{}: {e}", e.code()) }),
        })
        .collect();
    let h = match height(&f) {
        Ok(h) => to_value(&h)?,
        Err(e) => json!({ "error": format!("{}: {e}", e.code()) }),
    };
    let result = json!({
        "degree": format_rational(f.degree()),
        "weights": f.weights().to_strings(),
        "ord": global_order(&f)?,
        "height": h,
        "critical_directions": dirs,
        "factorizations": factorizations,
    });
    w.json("analyze.json", result)?;
    Ok(true)
}

fn decay(cfg: &ExperimentConfig, w: &mut Writer) -> Result<bool> {
    let spec = cfg.surface()?;
    let d = &cfg.decay;
    let grid = d.grid()?;
    let sigmas = sigma_grid(d.sigma_center, d.sigma_half, d.sigma_points);
    let opts = SweepOptions { threshold: d.threshold, slack: d.slack, tail_fraction: d.tail_fraction, tol: cfg.tol };
    let report = uniform_decay_sweep(&spec, &sigmas, &grid, &opts)?;
    w.csv("decay.csv", |buf| report.write_csv(buf))?;
    let mut summary = report.summary_json();
    summary["t_grid"] = to_value(&grid)?;
    summary["per_sigma"] = to_value(&report.per_sigma)?;
    w.json("decay.json", summary)?;
    Ok(report.pass)
}

fn sharpness(cfg: &ExperimentConfig, w: &mut Writer) -> Result<bool> {
    let spec = cfg.surface()?;
    let s = &cfg.sharpness;
    let h = height(&spec.phase)?.value_f64;
    let opts = SharpnessOptions {
        variant: s.variant,
        delta: s.delta,
        diverge_ratio: s.diverge_ratio,
        bounded_ratio: s.bounded_ratio,
        cross_points: s.cross_points,
        seed: cfg.seed,
        grid_spacing: s.grid_spacing,
        quad_panels: s.quad_panels,
    };
    let mut pass = true;
    let mut results = Vec::new();
    for (i, &p) in s.p.iter().enumerate() {
        let report = sharpness_experiment(&spec, p, &s.n_list, &opts)?;
        let expected = if p <= h * (1.0 + 1e-12) { Verdict::Diverges } else { Verdict::Bounded };
        pass &= report.verdict == expected;
        w.csv(&format!("sharpness_{i}.csv"), |buf| report.write_csv(buf))?;
        let mut v = to_value(&report)?;
        v["expected"] = to_value(&expected)?;
        results.push(v);
    }
    if s.dump_grid {
        dump_grids(&spec, s.n_list[0], w)?;
    }
    w.json("sharpness.json", json!({ "height": h, "reports": results }))?;
    Ok(pass)
}

/// `g_N` near the origin and `max_t |A_t g_N|` over quarter-octave `t ∈ [1, 4]`
/// on a coarse box above it.
fn dump_grids(spec: &SurfaceSpec, n: u64, w: &mut Writer) -> Result<()> {
    let quad = SurfaceQuadrature::new(spec, 4)?;
    let scales = quarter_octave_scales(1.0, 4.0);
    let out = GridGeometry::new([-2.0, -2.0, 1.0], 0.5, [9, 9, 7])?;
    let t_max = scales[scales.len() - 1];
    let lo = [0, 1, 2].map(|j| out.origin[j] - (t_max * quad.hi[j]).max(quad.hi[j]) - 0.5);
    let hi = [0, 1, 2].map(|j| out.upper()[j] - (t_max * quad.lo[j]).min(quad.lo[j]) + 0.5);
    let nf = n as f64;
    let g = GridFunction::from_fn(GridGeometry::covering(lo, hi, 0.25)?, |x| {
        if x[0].abs() <= nf && x[1].abs() <= nf && x[2].abs() <= 1.0 {
            1.0
        } else {
            0.0
        }
    });
    let m = maximal_function(&g, &scales, &quad, &out)?;
    for (name, grid) in [(format!("g_{n}.bin"), &g), (format!("maximal_{n}.bin"), &m)] {
        let mut buf = Vec::new();
        grid.write_binary(&mut buf).map_err(|e| Writer::io(Path::new(&name), e))?;
        w.bytes(&name, &buf)?;
    }
    Ok(())
}

fn batch(cfg: &ExperimentConfig, w: &mut Writer) -> Result<bool> {
    let mut specs = BTreeMap::new();
    if cfg.surface.is_some() {
        specs.insert("main".to_string(), cfg.surface()?);
    }
    for (name, sj) in &cfg.batch.surfaces {
        specs.insert(name.clone(), SurfaceSpec::from_json(sj)?);
    }
    let input = cfg
        .batch
        .input
        .as_ref()
        .ok_or_else(|| Error::Config { code: "E_MISSING", message: "batch needs batch.input".into() })?;
    let file = fs::File::open(input).map_err(|e| Error::Parse(format!("reading {}: {e}", input.display())))?;
    let mut rows = 0;
    w.csv("batch.csv", |buf| {
        rows = run_batch(&specs, BufReader::new(file), buf, cfg.tol)?;
        Ok(())
    })?;
    w.json("batch.json", json!({ "rows": rows }))?;
    Ok(true)
}
