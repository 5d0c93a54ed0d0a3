use num::complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::homfn::homogeneous_radius;

use super::dyadic::{OscResult, Path, ATOL};
use super::gauss::gl16;
use super::surface::{Amplitude, Integrand, Phase, SurfaceSpec};

struct Sum {
    value: Complex64,
    mass: f64,
    max_phase: f64,
}

/// Tensor Gauss–Legendre on a uniform `n × n` grid of panels over the support box.
fn uniform_sum(ig: &Integrand, phase: &Phase, n: usize) -> Sum {
    let rule = gl16();
    let b = ig.cutoff.support_box(ig.k);
    let h = [(b[0][1] - b[0][0]) / n as f64, (b[1][1] - b[1][0]) / n as f64];
    let rows: Vec<Sum> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = Sum { value: Complex64::new(0.0, 0.0), mass: 0.0, max_phase: 0.0 };
            let mid1 = b[0][0] + (i as f64 + 0.5) * h[0];
            for (x1n, w1) in rule.nodes.iter().zip(rule.weights.iter()) {
                let x1 = mid1 + 0.5 * h[0] * x1n;
                for j in 0..n {
                    let mid2 = b[1][0] + (j as f64 + 0.5) * h[1];
                    for (x2n, w2) in rule.nodes.iter().zip(rule.weights.iter()) {
                        let x = [x1, mid2 + 0.5 * h[1] * x2n];
                        let base = ig.base(x);
                        if base == 0.0 {
                            continue;
                        }
                        let amp = base * ig.g_alpha(x, homogeneous_radius(x, ig.k));
                        let c = w1 * w2 * 0.25 * h[0] * h[1] * amp;
                        let ph = ig.phase(phase, x);
                        let (sn, cs) = ph.sin_cos();
                        s.value += Complex64::new(c * cs, c * sn);
                        s.mass += c.abs();
                        s.max_phase = s.max_phase.max(ph.abs());
                    }
                }
            }
            s
        })
        .collect();
    let mut out = Sum { value: Complex64::new(0.0, 0.0), mass: 0.0, max_phase: 0.0 };
    for r in rows {
        out.value += r.value;
        out.mass += r.mass;
        out.max_phase = out.max_phase.max(r.max_phase);
    }
    out
}

pub(crate) fn oracle_integral(ig: &Integrand, phase: &Phase, level: u32) -> Result<OscResult> {
    if level < 1 {
        return Err(Error::domain("oracle level must be at least 1"));
    }
    if level > 12 {
        return Err(Error::domain(format!("oracle level {level} exceeds 12")));
    }
    let sums: Vec<Sum> = (level.saturating_sub(2)..=level).map(|l| uniform_sum(ig, phase, 1 << l)).collect();
    let last = sums.last().unwrap();
    let n = sums.len();
    let d1 = (sums[n - 1].value - sums[n - 2].value).norm();
    let ratio = (n == 3).then(|| {
        let d2 = (sums[1].value - sums[0].value).norm();
        if d2 > 0.0 {
            d1 / d2
        } else {
            0.0
        }
    });
    let rounding = 16.0 * f64::EPSILON * last.mass * (1.0 + last.max_phase);
    let converged = d1 <= 1e-8 * last.value.norm() + ATOL + rounding || ratio.is_some_and(|r| r <= 0.1);
    let panels = 1usize << (2 * level);
    Ok(OscResult {
        value: last.value,
        abs_error_estimate: d1 + rounding,
        subdivisions: panels,
        path: Path::Oracle,
        pieces: level as usize,
        refinement_ratio: ratio,
        converged,
    })
}

/// Brute-force `J(t, s)` on a uniform grid of `2^level × 2^level` panels,
/// compared with levels `level - 1` and `level - 2`.
pub fn quadrature_oracle(spec: &SurfaceSpec, t: f64, s: [f64; 2], level: u32) -> Result<OscResult> {
    let ig = Integrand::new(spec, Amplitude::PLAIN)?;
    oracle_integral(&ig, &Phase::of_ts(t, s), level)
}

/// A level at which each oracle panel sees a phase change of about 4 radians
/// or less, clamped to `[3, 9]`.
pub fn suggested_level(spec: &SurfaceSpec, t: f64, s: [f64; 2]) -> Result<u32> {
    let ig = Integrand::new(spec, Amplitude::PLAIN)?;
    let phase = Phase::of_ts(t, s);
    let b = ig.cutoff.support_box(ig.k);
    let mut g: [f64; 2] = [0.0, 0.0];
    let n = 64;
    for i in 0..=n {
        for j in 0..=n {
            let x = [
                b[0][0] + (b[0][1] - b[0][0]) * i as f64 / n as f64,
                b[1][0] + (b[1][1] - b[1][0]) * j as f64 / n as f64,
            ];
            let d = ig.phase_grad(&phase, x);
            g = [g[0].max(d[0].abs()), g[1].max(d[1].abs())];
        }
    }
    let total = (g[0] * (b[0][1] - b[0][0])).max(g[1] * (b[1][1] - b[1][0]));
    let level = (total / 4.0).max(1.0).log2().ceil() as u32;
    Ok(level.clamp(3, 9))
}
