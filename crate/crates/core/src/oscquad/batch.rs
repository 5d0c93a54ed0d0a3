//! JSON-lines evaluation requests, CSV results.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::Deserialize;

use crate::error::{Error, Result};

use super::dyadic::{oscillatory_integral, oscillatory_integral_with, Path};
use super::panel::QuadParams;
use super::surface::{Amplitude, Phase, SurfaceSpec};

/// One request: `{"spec": name, "t": .., "s": [..]}` or `{"spec": name, "xi": [..]}`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchRequest {
    pub spec: String,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub s: Option<[f64; 2]>,
    #[serde(default)]
    pub xi: Option<[f64; 3]>,
    #[serde(default)]
    pub tol: Option<f64>,
}

pub const BATCH_COLUMNS: [&str; 9] = ["t_or_lambda", "s1", "s2", "re", "im", "abs", "err_est", "subdivisions", "path"];

/// Evaluates each line of `input` and writes one CSV row per request.
///
/// `(t, s)` requests report `t, s1, s2`; `ξ` requests report `ξ3, ξ1, ξ2` and the
/// transform value including the surface-area factor and `e^{-iξ3 c}`. A
/// request whose tolerance is not reached is written with its best value and
/// path `<path>_unconverged`. Returns the number of rows.
pub fn run_batch<R: BufRead, W: Write>(
    specs: &BTreeMap<String, SurfaceSpec>,
    input: R,
    output: W,
    default_tol: f64,
) -> Result<usize> {
    let mut w = csv::Writer::from_writer(output);
    let io = |e: csv::Error| Error::Parse(format!("writing CSV: {e}"));
    w.write_record(BATCH_COLUMNS).map_err(io)?;
    let mut rows = 0;
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(format!("reading line {}: {e}", i + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let req: BatchRequest =
            serde_json::from_str(&line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        let spec =
            specs.get(&req.spec).ok_or_else(|| Error::Parse(format!("line {}: unknown spec '{}'", i + 1, req.spec)))?;
        let tol = req.tol.unwrap_or(default_tol);
        let (key, result) = match (req.t, req.s, req.xi) {
            (Some(t), s, None) => {
                let s = s.unwrap_or([0.0, 0.0]);
                ([t, s[0], s[1]], oscillatory_integral(spec, t, s, tol))
            }
            (None, None, Some(xi)) => {
                let r =
                    oscillatory_integral_with(spec, Amplitude::SURFACE, &Phase::of_xi(xi), tol, &QuadParams::default())
                        .map(|mut r| {
                            r.value *= num::complex::Complex64::from_polar(1.0, -xi[2] * spec.offset_c);
                            r
                        });
                ([xi[2], xi[0], xi[1]], r)
            }
            _ => return Err(Error::Parse(format!("line {}: give either t (with optional s) or xi", i + 1))),
        };
        let (value, err, subdivisions, path) = match result {
            Ok(r) => (r.value, r.abs_error_estimate, r.subdivisions, r.path.as_str().to_string()),
            Err(Error::Numeric { best_re, best_im, err_est, .. }) => (
                num::complex::Complex64::new(best_re, best_im),
                err_est,
                0,
                format!("{}_unconverged", Path::Dyadic.as_str()),
            ),
            Err(e) => return Err(e),
        };
        w.write_record([
            key[0].to_string(),
            key[1].to_string(),
            key[2].to_string(),
            value.re.to_string(),
            value.im.to_string(),
            value.norm().to_string(),
            err.to_string(),
            subdivisions.to_string(),
            path,
        ])
        .map_err(io)?;
        rows += 1;
    }
    w.flush().map_err(|e| Error::Parse(format!("writing CSV: {e}")))?;
    Ok(rows)
}
