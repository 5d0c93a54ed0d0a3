use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decayfit::{self, geometric_grid, validate_t_grid};
use crate::error::{Error, Result};
use crate::homfn::{height, MixedHomPoly, PolyJson, Scalar};
use crate::maxop::WitnessVariant;
use crate::oscquad::{CutoffSpec, DampingJson, SurfaceJson, SurfaceSpec};

use super::verify::VerifyConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Analyze,
    Decay,
    Sharpness,
    Verify,
    Batch,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Decay => "decay",
            Command::Sharpness => "sharpness",
            Command::Verify => "verify",
            Command::Batch => "batch",
        }
    }

    fn needs_phase(&self) -> bool {
        !matches!(self, Command::Verify)
    }

    fn needs_surface(&self) -> bool {
        matches!(self, Command::Decay | Command::Sharpness | Command::Batch)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    /// Explicit grid; replaces `t_min`, `t_max`, `t_points` when given.
    pub t_grid: Option<Vec<f64>>,
    pub sigma_center: [f64; 2],
    pub sigma_half: f64,
    pub sigma_points: usize,
    pub tail_fraction: f64,
    pub threshold: f64,
    pub slack: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            t_min: 16.0,
            t_max: 16384.0,
            t_points: 21,
            t_grid: None,
            sigma_center: [0.0, 0.0],
            sigma_half: 0.5,
            sigma_points: 5,
            tail_fraction: decayfit::DEFAULT_TAIL_FRACTION,
            threshold: decayfit::DEFAULT_THRESHOLD,
            slack: decayfit::DEFAULT_SLACK,
        }
    }
}

impl DecayConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        match &self.t_grid {
            Some(g) => Ok(g.clone()),
            None => geometric_grid(self.t_min, self.t_max, self.t_points),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessConfig {
    /// Exponents to test; empty means `0.9h`, `h(1 - 1/ln N_max)` and `1.25h`.
    pub p: Vec<f64>,
    pub n_list: Vec<u64>,
    pub variant: Option<WitnessVariant>,
    pub delta: f64,
    pub diverge_ratio: f64,
    pub bounded_ratio: f64,
    pub cross_points: usize,
    pub grid_spacing: f64,
    pub quad_panels: usize,
    /// Write `g_N` and `M g_N` snapshots for the smallest `N` as binary grids.
    pub dump_grid: bool,
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        let o = crate::maxop::SharpnessOptions::default();
        SharpnessConfig {
            p: Vec::new(),
            n_list: vec![64, 128, 256, 512, 1024],
            variant: None,
            delta: o.delta,
            diverge_ratio: o.diverge_ratio,
            bounded_ratio: o.bounded_ratio,
            cross_points: o.cross_points,
            grid_spacing: o.grid_spacing,
            quad_panels: o.quad_panels,
            dump_grid: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchConfig {
    /// JSON-lines request file.
    pub input: Option<PathBuf>,
    /// Extra named surfaces; the configured surface is available as `main`.
    pub surfaces: BTreeMap<String, SurfaceJson>,
}

/// The configuration file as written.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    weights: Option<[Scalar; 2]>,
    monomials: Option<Vec<(u32, u32, Scalar)>>,
    degree: Option<Scalar>,
    offset_c: Option<f64>,
    cutoff: Option<CutoffSpec>,
    alpha: Option<f64>,
    damping: Option<DampingJson>,
    seed: Option<u64>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    #[serde(default)]
    decay: DecayConfig,
    #[serde(default)]
    sharpness: SharpnessConfig,
    #[serde(default)]
    verify: VerifyConfig,
    #[serde(default)]
    batch: BatchConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Fully resolved configuration. Serializing it gives the echoed header;
/// `out` and `threads` only affect where and how fast, so they are left out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub phase: Option<PolyJson>,
    pub surface: Option<SurfaceJson>,
    pub seed: u64,
    pub tol: f64,
    pub decay: DecayConfig,
    pub sharpness: SharpnessConfig,
    pub verify: VerifyConfig,
    pub batch: BatchConfig,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

fn config_err(code: &'static str, message: impl Into<String>) -> Error {
    Error::Config { code, message: message.into() }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err("E_TOL", format!("{name} must be positive and finite, got {v}")))
    }
}

/// `parse_config_with` without overrides.
pub fn parse_config(text: &[u8]) -> Result<ExperimentConfig> {
    parse_config_with(text, &Overrides::default())
}

/// Parses and validates a configuration; precedence is overrides, then the
/// file, then defaults.
pub fn parse_config_with(text: &[u8], ov: &Overrides) -> Result<ExperimentConfig> {
    let text = std::str::from_utf8(text).map_err(|e| config_err("E_UTF8", format!("config is not UTF-8: {e}")))?;
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| config_err("E_JSON", format!("malformed config: {e}")))?;
    let command = ov
        .command
        .or(raw.command)
        .ok_or_else(|| config_err("E_COMMAND", "no command given in the config or on the command line"))?;
    let seed = ov.seed.or(raw.seed).unwrap_or(DEFAULT_SEED);
    let tol = ov.tol.or(raw.tol).unwrap_or(DEFAULT_TOL);
    positive("tol", tol)?;
    if ov.threads.or(raw.threads) == Some(0) {
        return Err(config_err("E_THREADS", "threads must be at least 1"));
    }

    let phase_json = match (raw.weights, raw.monomials) {
        (Some(weights), Some(monomials)) => Some(PolyJson { weights, monomials, degree: raw.degree }),
        (None, None) => None,
        _ => return Err(config_err("E_MISSING", "weights and monomials must be given together")),
    };
    let phase = phase_json.as_ref().map(MixedHomPoly::from_json).transpose()?;
    if command.needs_phase() && phase.is_none() {
        return Err(config_err("E_MISSING", format!("command {} needs weights and monomials", command.as_str())));
    }
    if matches!(command, Command::Decay | Command::Sharpness) {
        if let Some(p) = &phase {
            if p.weights().is_conic() {
                return Err(config_err(
                    "E_CONIC",
                    format!(
                        "weights (1, 1) are rejected for {}: the decay and maximal results assume κ ≠ (1, 1)",
                        command.as_str()
                    ),
                ));
            }
        }
    }

    let surface = match (&phase_json, command.needs_surface()) {
        (Some(pj), true) => {
            let sharp = command == Command::Sharpness;
            let json = SurfaceJson {
                phase: pj.clone(),
                offset_c: raw.offset_c.unwrap_or(if sharp { 1.0 } else { 0.0 }),
                cutoff: raw.cutoff.unwrap_or_else(|| {
                    if sharp {
                        CutoffSpec::product([0.0, 0.0], 1.25).with_plateau(0.8)
                    } else {
                        CutoffSpec::radial([0.0, 0.0], 0.5)
                    }
                }),
                alpha: raw.alpha.unwrap_or(0.0),
                damping: raw.damping.unwrap_or_default(),
            };
            // Resolve the damping direction so the echo is explicit.
            Some(SurfaceSpec::from_json(&json)?.to_json())
        }
        _ => None,
    };

    let decay = raw.decay;
    let mut sharpness = raw.sharpness;
    match command {
        Command::Decay => {
            let grid = decay.grid()?;
            validate_t_grid(&grid).map_err(|e| config_err("E_GRID", e.to_string()))?;
            if decay.sigma_points == 0 || !(decay.sigma_half >= 0.0) {
                return Err(config_err("E_GRID", "sigma grid needs at least one point and a nonnegative half-width"));
            }
            if !(decay.tail_fraction > 0.0 && decay.tail_fraction <= 1.0) {
                return Err(config_err(
                    "E_GRID",
                    format!("tail_fraction must lie in (0, 1], got {}", decay.tail_fraction),
                ));
            }
        }
        Command::Sharpness => {
            let ns = &sharpness.n_list;
            if ns.len() < 4 || !ns.windows(2).all(|w| w[1] > w[0]) {
                return Err(config_err("E_GRID", "n_list must hold at least 4 increasing scales"));
            }
            if sharpness.p.is_empty() {
                let h = height(phase.as_ref().expect("checked above"))?.value_f64;
                let n_max = *ns.last().expect("non-empty") as f64;
                sharpness.p = vec![0.9 * h, h * (1.0 - 1.0 / n_max.ln()), 1.25 * h];
            }
            for &p in &sharpness.p {
                positive("p", p)?;
            }
            positive("delta", sharpness.delta)?;
            positive("grid_spacing", sharpness.grid_spacing)?;
        }
        Command::Verify => {
            let v = &raw.verify;
            for (name, x) in [("float_tol", v.float_tol), ("factor_tol", v.factor_tol), ("curve_step", v.curve_step)] {
                positive(name, x)?;
            }
        }
        Command::Batch => {
            if raw.batch.input.is_none() {
                return Err(config_err("E_MISSING", "batch needs batch.input"));
            }
        }
        Command::Analyze => {}
    }

    Ok(ExperimentConfig {
        command,
        phase: phase.as_ref().map(|p| p.to_json()),
        surface,
        seed,
        tol,
        decay,
        sharpness,
        verify: raw.verify,
        batch: raw.batch,
        out: ov.out.clone().or(raw.out).unwrap_or_else(|| PathBuf::from("out")),
        threads: ov.threads.or(raw.threads),
    })
}

impl ExperimentConfig {
    /// Canonical JSON of the resolved configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`Self::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn phase(&self) -> Result<MixedHomPoly> {
        let pj = self.phase.as_ref().ok_or_else(|| config_err("E_MISSING", "no phase configured"))?;
        MixedHomPoly::from_json(pj)
    }

    pub fn surface(&self) -> Result<SurfaceSpec> {
        let sj = self.surface.as_ref().ok_or_else(|| config_err("E_MISSING", "no surface configured"))?;
        SurfaceSpec::from_json(sj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(br#"{"weights":["1/4","1/2"],"monomials":[[2,1,"1"]],"command":"analyze"}"#).unwrap();
        assert_eq!(c.command, Command::Analyze);
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.tol, DEFAULT_TOL);
        assert_eq!(c.decay, DecayConfig::default());
        assert!(c.surface.is_none());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn rejections_have_distinct_codes() {
        let code = |t: &str| parse_config(t.as_bytes()).unwrap_err().code();
        assert_eq!(code("{"), "E_JSON");
        assert_eq!(code(r#"{"weights":["1","1"],"monomials":[[1,0,"1"]],"command":"decay"}"#), "E_CONIC");
        assert_eq!(
            code(r#"{"weights":["1/4","1/2"],"monomials":[[2,1,"1"],[0,1,"1"]],"command":"analyze"}"#),
            "E_HETEROGENEOUS"
        );
        assert_eq!(code(r#"{"weights":["1/4","1/2"],"monomials":[[2,1,"1"]],"command":"decay","tol":0}"#), "E_TOL");
        assert_eq!(code(r#"{"weights":["1/4","1/2"],"monomials":[[2,1,"1"]]}"#), "E_COMMAND");
        assert_eq!(code(r#"{"command":"verify","bogus":1}"#), "E_JSON");
    }

    #[test]
    fn overrides_win() {
        let ov = Overrides { seed: Some(7), tol: Some(1e-3), command: Some(Command::Verify), ..Default::default() };
        let c = parse_config_with(br#"{"command":"analyze","seed":1,"tol":1e-4}"#, &ov).unwrap();
        assert_eq!((c.command, c.seed, c.tol), (Command::Verify, 7, 1e-3));
    }

    #[test]
    fn sharpness_defaults_follow_the_height() {
        let c = parse_config(br#"{"weights":["1/4","1/2"],"monomials":[[2,1,"1"]],"command":"sharpness"}"#).unwrap();
        let p = &c.sharpness.p;
        assert!((p[0] - 1.8).abs() < 1e-12 && (p[2] - 2.5).abs() < 1e-12);
        assert_eq!(c.surface.as_ref().unwrap().offset_c, 1.0);
    }
}
