//! Log–log decay exponents of `|J(t, s)|` and their uniformity in `s`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homfn::height;
use crate::oscquad::{oscillatory_integral, SurfaceSpec};

/// Fits with a larger RMS residual are flagged unreliable.
pub const RESIDUAL_LIMIT: f64 = 0.15;
/// Samples with `|J| < NOISE_FACTOR · err` are dropped.
pub const NOISE_FACTOR: f64 = 10.0;
pub const MIN_SAMPLES: usize = 4;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
pub const DEFAULT_THRESHOLD: f64 = -0.5;
pub const DEFAULT_SLACK: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub abs: f64,
    pub err: f64,
    /// Whether the sample entered the regression.
    pub used: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub grid: Vec<Sample>,
    pub tail_fraction: f64,
    pub n_samples: usize,
    /// `residual_rms ≤ 0.15`
    pub reliable: bool,
}

/// `n` points from `lo` to `hi`, equally spaced in `log t`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || !hi.is_finite() || n < 2 {
        return Err(Error::domain(format!(
            "geometric grid needs 0 < lo < hi and n ≥ 2, got [{lo}, {hi}] with n = {n}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

/// The default `t` grid `2^4 … 2^14` with 21 points.
pub fn default_t_grid() -> Vec<f64> {
    (0..21).map(|i| 2f64.powf(4.0 + 0.5 * i as f64)).collect()
}

/// At least 8 positive increasing points spanning at least 3 decades.
pub fn validate_t_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 8 {
        return Err(Error::domain(format!("t grid has {} points, at least 8 required", grid.len())));
    }
    if !grid.windows(2).all(|w| w[1] > w[0]) || !(grid[0] > 0.0) {
        return Err(Error::domain("t grid must be positive and strictly increasing"));
    }
    let decades = (grid[grid.len() - 1] / grid[0]).log10();
    if decades < 3.0 - 1e-9 {
        return Err(Error::domain(format!("t grid spans {decades:.3} decades, at least 3 required")));
    }
    Ok(())
}

/// Least-squares fit of `log|J|` against `log t` over the upper `tail_fraction`
/// of the log-`t` range, after the noise-floor filter.
pub fn fit_power_law(samples: &[(f64, f64, f64)], tail_fraction: f64) -> Result<DecayFit> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::domain(format!("tail_fraction must lie in (0, 1], got {tail_fraction}")));
    }
    let logs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let (lo, hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)));
    let cut = hi - tail_fraction * (hi - lo) - 1e-12 * (1.0 + hi.abs());
    let grid: Vec<Sample> = samples
        .iter()
        .zip(&logs)
        .map(|(&(t, abs, err), &l)| Sample {
            t,
            abs,
            err,
            used: t > 0.0 && l >= cut && abs > 0.0 && abs.is_finite() && abs >= NOISE_FACTOR * err,
        })
        .collect();
    let pts: Vec<(f64, f64)> = grid.iter().filter(|s| s.used).map(|s| (s.t.ln(), s.abs.ln())).collect();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData { usable: pts.len(), required: MIN_SAMPLES });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all fitted samples share one t value".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(DecayFit {
        slope,
        intercept,
        residual_rms,
        n_samples: pts.len(),
        grid,
        tail_fraction,
        reliable: residual_rms <= RESIDUAL_LIMIT,
    })
}

/// `(t, |J(t, s)|, error estimate)` on `t_grid`, in order. Sampling stops
/// after two consecutive samples below the noise floor; an unconverged
/// integral contributes its best value and error estimate.
pub fn sample_decay(spec: &SurfaceSpec, s: [f64; 2], t_grid: &[f64], tol: f64) -> Result<Vec<(f64, f64, f64)>> {
    validate_t_grid(t_grid)?;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut below = 0;
    for &t in t_grid {
        let (abs, err) = match oscillatory_integral(spec, t, s, tol) {
            Ok(r) => (r.value.norm(), r.abs_error_estimate),
            Err(Error::Numeric { best_re, best_im, err_est, .. }) => (best_re.hypot(best_im), err_est),
            Err(e) => return Err(e),
        };
        out.push((t, abs, err));
        below = if abs < NOISE_FACTOR * err { below + 1 } else { 0 };
        if below == 2 {
            break;
        }
    }
    Ok(out)
}

/// Samples `|J(t, s)|` on `t_grid` and fits the decay exponent.
pub fn fit_decay_exponent(
    spec: &SurfaceSpec,
    s: [f64; 2],
    t_grid: &[f64],
    tail_fraction: f64,
    tol: f64,
) -> Result<DecayFit> {
    fit_power_law(&sample_decay(spec, s, t_grid, tol)?, tail_fraction)
}

/// Whether the last sample is below the noise floor, i.e. `|J|` decayed into
/// the quadrature error within the grid.
fn reached_noise_floor(samples: &[(f64, f64, f64)]) -> bool {
    samples.last().is_some_and(|&(_, abs, err)| abs < NOISE_FACTOR * err)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaFit {
    pub sigma: [f64; 2],
    pub fit: Option<DecayFit>,
    /// Too few tail samples above the noise floor because `|J|` fell below
    /// it; counted as decaying faster than any slope the grid can resolve.
    pub below_noise_floor: bool,
    /// Error code and message when the fit failed.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    /// Largest slope over the successful fits.
    pub worst_slope: f64,
    pub worst_sigma: [f64; 2],
    pub per_sigma: Vec<SigmaFit>,
    pub threshold: f64,
    pub slack: f64,
    /// `worst_slope ≤ threshold + slack` and every σ fitted or below the noise floor.
    pub pass: bool,
    /// `α > 1/2 - 1/h`; `None` when the height is not defined.
    pub hypothesis_holds: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub threshold: f64,
    pub slack: f64,
    pub tail_fraction: f64,
    pub tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            threshold: DEFAULT_THRESHOLD,
            slack: DEFAULT_SLACK,
            tail_fraction: DEFAULT_TAIL_FRACTION,
            tol: 1e-6,
        }
    }
}

/// Decay fits for every `σ` of the grid; per-σ failures are recorded.
pub fn uniform_decay_sweep(
    spec: &SurfaceSpec,
    sigma_grid: &[[f64; 2]],
    t_grid: &[f64],
    opts: &SweepOptions,
) -> Result<SweepReport> {
    if sigma_grid.is_empty() {
        return Err(Error::domain("empty sigma grid"));
    }
    validate_t_grid(t_grid)?;
    let per_sigma: Vec<SigmaFit> = sigma_grid
        .par_iter()
        .map(|&sigma| {
            let failed = |e: Error, below_noise_floor| SigmaFit {
                sigma,
                fit: None,
                below_noise_floor,
                error: Some(format!("{}: {e}", e.code())),
            };
            let samples = match sample_decay(spec, sigma, t_grid, opts.tol) {
                Ok(s) => s,
                Err(e) => return failed(e, false),
            };
            match fit_power_law(&samples, opts.tail_fraction) {
                Ok(fit) => SigmaFit { sigma, fit: Some(fit), below_noise_floor: false, error: None },
                Err(e @ Error::InsufficientData { .. }) => {
                    let floor = reached_noise_floor(&samples);
                    failed(e, floor)
                }
                Err(e) => failed(e, false),
            }
        })
        .collect();
    let mut worst_slope = f64::NEG_INFINITY;
    let mut worst_sigma = [f64::NAN, f64::NAN];
    for p in &per_sigma {
        if let Some(f) = &p.fit {
            if f.slope > worst_slope {
                worst_slope = f.slope;
                worst_sigma = p.sigma;
            }
        }
    }
    let all_fitted = per_sigma.iter().all(|p| p.fit.is_some() || p.below_noise_floor);
    let hypothesis_holds = height_threshold(spec).ok().map(|th| spec.alpha > th);
    Ok(SweepReport {
        pass: all_fitted && worst_slope <= opts.threshold + opts.slack,
        worst_slope,
        worst_sigma,
        per_sigma,
        threshold: opts.threshold,
        slack: opts.slack,
        hypothesis_holds,
    })
}

/// `n × n` grid over `[center - half, center + half]²`.
pub fn sigma_grid(center: [f64; 2], half: f64, n: usize) -> Vec<[f64; 2]> {
    let step = |i: usize| if n > 1 { -half + 2.0 * half * i as f64 / (n - 1) as f64 } else { 0.0 };
    (0..n).flat_map(|i| (0..n).map(move |j| [center[0] + step(i), center[1] + step(j)])).collect()
}

/// `1/2 - 1/h`, the damping exponent above which the maximal theorem applies.
pub fn height_threshold(spec: &SurfaceSpec) -> Result<f64> {
    let h = height(&spec.phase)?;
    Ok(0.5 - 1.0 / h.value_f64)
}

impl SweepReport {
    /// CSV with columns `sigma1, sigma2, slope, residual_rms, n_samples, pass`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parse(format!("writing CSV: {e}"));
        w.write_record(["sigma1", "sigma2", "slope", "residual_rms", "n_samples", "pass"]).map_err(io)?;
        for p in &self.per_sigma {
            let (slope, rms, n, pass) = match &p.fit {
                Some(f) => (
                    f.slope.to_string(),
                    f.residual_rms.to_string(),
                    f.n_samples.to_string(),
                    (f.slope <= self.threshold + self.slack).to_string(),
                ),
                None if p.below_noise_floor => ("-inf".into(), "NaN".into(), "0".into(), "true".into()),
                None => ("NaN".into(), "NaN".into(), "0".into(), "false".into()),
            };
            w.write_record([p.sigma[0].to_string(), p.sigma[1].to_string(), slope, rms, n, pass]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(format!("writing CSV: {e}")))
    }

    /// `{worst_slope, worst_sigma, threshold, pass}`
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "worst_slope": self.worst_slope,
            "worst_sigma": self.worst_sigma,
            "threshold": self.threshold,
            "slack": self.slack,
            "pass": self.pass,
            "hypothesis_holds": self.hypothesis_holds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let s: Vec<_> = default_t_grid().iter().map(|&t| (t, 3.0 * t.powf(-0.7), 0.0)).collect();
        let f = fit_power_law(&s, 0.5).unwrap();
        assert!((f.slope + 0.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert_eq!(f.n_samples, 11);
        assert!(f.reliable);
    }

    #[test]
    fn noise_floor_and_insufficient_data() {
        let s: Vec<_> = default_t_grid().iter().map(|&t| (t, t.powf(-1.0), 0.2 * t.powf(-1.0))).collect();
        assert_eq!(fit_power_law(&s, 0.5), Err(Error::InsufficientData { usable: 0, required: 4 }));
        assert!(fit_power_law(&s, 0.0).is_err());
    }

    #[test]
    fn grids() {
        assert!(validate_t_grid(&default_t_grid()).is_ok());
        assert!(validate_t_grid(&geometric_grid(1.0, 100.0, 10).unwrap()).is_err());
        let g = sigma_grid([0.0, 0.0], 0.5, 5);
        assert_eq!(g.len(), 25);
        assert!(g.contains(&[-0.5, 0.5]) && g.contains(&[0.0, 0.0]));
    }
}
