use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oscquad::{gauss_legendre, SurfaceSpec, GL_POINTS};

use super::grid::{GridFunction, GridGeometry};

/// Fixed tensor Gauss–Legendre nodes for `∫ h(y, c + f(y)) ψ(y) √(1+|∇f|²) dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceQuadrature {
    /// `(y1, y2, c + f(y), weight)`, zero weights dropped.
    pub nodes: Vec<[f64; 4]>,
    /// Bounding box of the surface points `(y1, y2, c + f(y))`.
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl SurfaceQuadrature {
    /// `panels × panels` panels over the cutoff's support box.
    pub fn new(spec: &SurfaceSpec, panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::domain("surface quadrature needs at least one panel"));
        }
        let k = spec.weights_f64();
        let b = spec.cutoff.support_box(k);
        let (x, w) = gauss_legendre(GL_POINTS);
        let f = spec.phase.float();
        let df = [spec.phase.derivative(0), spec.phase.derivative(1)];
        let axis = |j: usize| -> Vec<(f64, f64)> {
            let h = (b[j][1] - b[j][0]) / panels as f64;
            (0..panels)
                .flat_map(|p| {
                    let mid = b[j][0] + (p as f64 + 0.5) * h;
                    x.iter().zip(&w).map(move |(xi, wi)| (mid + 0.5 * h * xi, 0.5 * h * wi)).collect::<Vec<_>>()
                })
                .collect()
        };
        let (a1, a2) = (axis(0), axis(1));
        let mut nodes = Vec::new();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &(y1, w1) in &a1 {
            for &(y2, w2) in &a2 {
                let y = [y1, y2];
                let psi = spec.cutoff.eval(y, k);
                if psi == 0.0 {
                    continue;
                }
                let g = [df[0].eval(y), df[1].eval(y)];
                let p = [y1, y2, spec.offset_c + f.eval(y)];
                nodes.push([p[0], p[1], p[2], w1 * w2 * psi * (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt()]);
                for j in 0..3 {
                    lo[j] = lo[j].min(p[j]);
                    hi[j] = hi[j].max(p[j]);
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::Degenerate("the cutoff vanishes at every quadrature node".into()));
        }
        Ok(SurfaceQuadrature { nodes, lo, hi })
    }

    /// `∫ ψ dσ` as seen by the rule.
    pub fn mass(&self) -> f64 {
        self.nodes.iter().map(|n| n[3]).sum()
    }

    /// Box of `x - t·S` over the output box `[out_lo, out_hi]`.
    fn footprint(&self, t: f64, out_lo: [f64; 3], out_hi: [f64; 3]) -> ([f64; 3], [f64; 3]) {
        ([0, 1, 2].map(|j| out_lo[j] - t * self.hi[j]), [0, 1, 2].map(|j| out_hi[j] - t * self.lo[j]))
    }

    fn check_coverage(&self, g: &GridFunction, t: f64, out_lo: [f64; 3], out_hi: [f64; 3]) -> Result<()> {
        let (lo, hi) = self.footprint(t, out_lo, out_hi);
        if g.geometry.contains_box(lo, hi) {
            Ok(())
        } else {
            Err(Error::Coverage {
                t,
                detail: format!(
                    "needs samples on [{:.4}, {:.4}] x [{:.4}, {:.4}] x [{:.4}, {:.4}], grid covers {:?} to {:?}",
                    lo[0],
                    hi[0],
                    lo[1],
                    hi[1],
                    lo[2],
                    hi[2],
                    g.geometry.origin,
                    g.geometry.upper()
                ),
            })
        }
    }

    /// `A_t g(x) = Σ w g(x - t (y, c + f(y)))`.
    pub fn average_at(&self, g: &GridFunction, t: f64, x: [f64; 3]) -> Result<f64> {
        check_t(t)?;
        self.check_coverage(g, t, x, x)?;
        Ok(self.sum(g, t, x))
    }

    #[inline]
    fn sum(&self, g: &GridFunction, t: f64, x: [f64; 3]) -> f64 {
        self.nodes
            .iter()
            .map(|n| n[3] * g.interpolate([x[0] - t * n[0], x[1] - t * n[1], x[2] - t * n[2]]).unwrap_or(0.0))
            .sum()
    }

    /// `max_{t ∈ t_set} |A_t g(x)|`
    pub fn maximal_at(&self, g: &GridFunction, t_set: &[f64], x: [f64; 3]) -> Result<f64> {
        check_t_set(t_set)?;
        t_set.iter().try_fold(0.0f64, |m, &t| Ok(m.max(self.average_at(g, t, x)?.abs())))
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    Ok(())
}

fn check_t_set(t_set: &[f64]) -> Result<()> {
    if t_set.is_empty() {
        return Err(Error::domain("empty t set"));
    }
    t_set.iter().try_for_each(|&t| check_t(t))
}

/// `A_t g` on the output grid `out`.
pub fn average_operator(
    g: &GridFunction,
    t: f64,
    quad: &SurfaceQuadrature,
    out: &GridGeometry,
) -> Result<GridFunction> {
    check_t(t)?;
    quad.check_coverage(g, t, out.origin, out.upper())?;
    let values = (0..out.len()).into_par_iter().map(|i| quad.sum(g, t, out.point(i))).collect();
    GridFunction::new(*out, values)
}

/// `max_{t ∈ t_set} |A_t g|` on the output grid `out`.
pub fn maximal_function(
    g: &GridFunction,
    t_set: &[f64],
    quad: &SurfaceQuadrature,
    out: &GridGeometry,
) -> Result<GridFunction> {
    check_t_set(t_set)?;
    let mut m = vec![0.0f64; out.len()];
    for &t in t_set {
        let a = average_operator(g, t, quad, out)?;
        for (mi, ai) in m.iter_mut().zip(&a.values) {
            *mi = mi.max(ai.abs());
        }
    }
    GridFunction::new(*out, m)
}

/// Quarter-octave scales `2^{j/4}` in `[lo, hi]`.
pub fn quarter_octave_scales(lo: f64, hi: f64) -> Vec<f64> {
    let j0 = (4.0 * lo.log2()).ceil() as i32;
    let j1 = (4.0 * hi.log2() + 1e-9).floor() as i32;
    (j0..=j1).map(|j| 2f64.powf(j as f64 / 4.0)).collect()
}
