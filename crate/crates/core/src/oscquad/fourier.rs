use num::complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bipoly::FloatPoly;
use crate::error::{Error, Result};

use super::dyadic::{dyadic_integral, OscResult};
use super::panel::QuadParams;
use super::surface::{Amplitude, Integrand, Moment, Phase, SurfaceSpec};

fn surface_integral(spec: &SurfaceSpec, xi: [f64; 3], moment: Moment, tol: f64) -> Result<(Complex64, OscResult)> {
    let ig = Integrand::new(spec, Amplitude::surface_moment(moment))?;
    // The phase -ξ·(x, f(x)) is used directly, so ξ3 = 0 needs no special case.
    let r = dyadic_integral(&ig, &Phase::of_xi(xi), tol, &QuadParams::default())?;
    let unit = Complex64::from_polar(1.0, -xi[2] * spec.offset_c);
    Ok((unit * r.value, r))
}

/// `dσ̂_α(ξ) = e^{-iξ3 c} ∫ a(x) G^α(x) √(1+|∇f|²) e^{-i(ξ1 x1 + ξ2 x2 + ξ3 f(x))} dx`.
pub fn fourier_surface_measure(spec: &SurfaceSpec, xi: [f64; 3], tol: f64) -> Result<Complex64> {
    Ok(surface_integral(spec, xi, Moment::One, tol)?.0)
}

/// `∇_ξ dσ̂_α(ξ)`, each component an oscillatory integral with the extra
/// factor `-i x1`, `-i x2` or `-i (c + f)`.
pub fn fourier_surface_measure_gradient(spec: &SurfaceSpec, xi: [f64; 3], tol: f64) -> Result<[Complex64; 3]> {
    let mi = Complex64::new(0.0, -1.0);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (o, m) in out.iter_mut().zip([Moment::X1, Moment::X2, Moment::Height]) {
        *o = mi * surface_integral(spec, xi, m, tol)?.0;
    }
    Ok(out)
}

/// Central differences of [`fourier_surface_measure`] with step `h`.
pub fn fourier_gradient_finite_difference(
    spec: &SurfaceSpec,
    xi: [f64; 3],
    h: f64,
    tol: f64,
) -> Result<[Complex64; 3]> {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (j, o) in out.iter_mut().enumerate() {
        let mut p = xi;
        let mut m = xi;
        p[j] += h;
        m[j] -= h;
        *o = (fourier_surface_measure(spec, p, tol)? - fourier_surface_measure(spec, m, tol)?) / (2.0 * h);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeOptions {
    /// Required `|σ + ∇f(x0)|`.
    pub separation: f64,
    /// Relative tolerance of each evaluation.
    pub tol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { separation: 0.1, tol: 1e-6 }
    }
}

/// A sample with `|J|` below this multiple of its error estimate is noise.
const NOISE_STOP: f64 = 10.0;

/// `|J(λ)|` at one probe frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbePoint {
    pub lambda: f64,
    pub abs: f64,
    pub err: f64,
}

/// Zeros of `∇f + σ` found by Newton's method from a grid of seeds in `box`.
fn gradient_zeros(grad: &[FloatPoly; 2], hess: &[FloatPoly; 3], sigma: [f64; 2], bx: [[f64; 2]; 2]) -> Vec<[f64; 2]> {
    let n = 9;
    let seeds: Vec<[f64; 2]> = (0..n * n)
        .map(|i| {
            let (a, b) = ((i / n) as f64 / (n - 1) as f64, (i % n) as f64 / (n - 1) as f64);
            [bx[0][0] + a * (bx[0][1] - bx[0][0]), bx[1][0] + b * (bx[1][1] - bx[1][0])]
        })
        .collect();
    let scale = (bx[0][1] - bx[0][0]).max(bx[1][1] - bx[1][0]);
    seeds
        .par_iter()
        .filter_map(|&s| {
            let mut x = s;
            for _ in 0..60 {
                let g = [grad[0].eval(x) + sigma[0], grad[1].eval(x) + sigma[1]];
                let (a, b, d) = (hess[0].eval(x), hess[1].eval(x), hess[2].eval(x));
                let det = a * d - b * b;
                if det.abs() < 1e-300 {
                    return None;
                }
                let step = [(d * g[0] - b * g[1]) / det, (a * g[1] - b * g[0]) / det];
                x = [x[0] - step[0], x[1] - step[1]];
                if !x[0].is_finite() || step[0].hypot(step[1]) > 10.0 * scale {
                    return None;
                }
                if step[0].hypot(step[1]) <= 1e-13 * (1.0 + x[0].hypot(x[1])) {
                    let g = [grad[0].eval(x) + sigma[0], grad[1].eval(x) + sigma[1]];
                    let m = grad[0].magnitude(x) + grad[1].magnitude(x) + sigma[0].abs() + sigma[1].abs();
                    return (g[0].hypot(g[1]) <= 1e-9 * (1.0 + m)).then_some(x);
                }
            }
            None
        })
        .collect()
}

/// `|∫ a e^{iλ(f(x) + σ·x)} dx|` over `lambdas`, where the cutoff lives near
/// `x0` and `σ` is separated from `-∇f(x0)`.
///
/// Preconditions: `|σ + ∇f(x0)| ≥ separation`, and no zero of `∇f + σ` lies
/// within twice the support radius of `x0`.
///
/// `lambdas` are taken in order and the probe stops after two consecutive
/// samples below ten times their error estimate.
pub fn nonstationary_decay_probe(
    spec: &SurfaceSpec,
    x0: [f64; 2],
    sigma: [f64; 2],
    lambdas: &[f64],
    opts: &ProbeOptions,
) -> Result<Vec<ProbePoint>> {
    let f = &spec.phase;
    let g0 = f.gradient(x0);
    let sep = (g0[0] + sigma[0]).hypot(g0[1] + sigma[1]);
    if !(sep >= opts.separation) {
        return Err(Error::domain(format!(
            "|sigma + grad f(x0)| = {sep:e} is below the separation threshold {}",
            opts.separation
        )));
    }
    let ig = Integrand::new(spec, Amplitude::PLAIN)?;
    let support_radius =
        spec.cutoff.boundary_samples(ig.k, 720).iter().map(|p| (p[0] - x0[0]).hypot(p[1] - x0[1])).fold(0.0, f64::max);
    let reach = 2.0 * support_radius;
    let fx = f.derivative(0);
    let fy = f.derivative(1);
    let hess = [fx.derivative(0).float().clone(), fx.derivative(1).float().clone(), fy.derivative(1).float().clone()];
    let bx = [[x0[0] - reach, x0[0] + reach], [x0[1] - reach, x0[1] + reach]];
    let nearest = gradient_zeros(&ig.grad, &hess, sigma, bx)
        .into_iter()
        .map(|z| (z[0] - x0[0]).hypot(z[1] - x0[1]))
        .fold(f64::INFINITY, f64::min);
    if nearest <= reach {
        return Err(Error::domain(format!(
            "grad f + sigma vanishes at distance {nearest:e} from x0, within twice the support radius {support_radius:e}"
        )));
    }
    let params = QuadParams::default();
    let mut out = Vec::with_capacity(lambdas.len());
    let mut below = 0;
    for &lambda in lambdas {
        let (abs, err) = match dyadic_integral(&ig, &Phase::of_ts(lambda, sigma), opts.tol, &params) {
            Ok(r) => (r.value.norm(), r.abs_error_estimate),
            Err(Error::Numeric { best_re, best_im, err_est, .. }) => (best_re.hypot(best_im), err_est),
            Err(e) => return Err(e),
        };
        out.push(ProbePoint { lambda, abs, err });
        below = if abs < NOISE_STOP * err { below + 1 } else { 0 };
        if below == 2 {
            break;
        }
    }
    Ok(out)
}
