//! Iterated one-dimensional Gauss–Legendre panels over `{(u1, u2)}` regions
//! given as an outer interval and inner segments.

use num::complex::Complex64;
use rayon::prelude::*;

use super::gauss::gl16;

/// Panel sizing parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadParams {
    /// Largest phase change (radians) allowed across one panel.
    pub max_phase: f64,
    /// Every segment is split into at least this many panels.
    pub min_panels: usize,
    /// Ratio of the geometric mesh towards a singular endpoint.
    pub grade_ratio: f64,
    pub grade_levels: usize,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams { max_phase: 20.0, min_panels: 8, grade_ratio: 0.25, grade_levels: 20 }
    }
}

impl QuadParams {
    /// Refinement level `l`: panels `2^l` times smaller in both directions.
    pub fn level(&self, l: u32) -> QuadParams {
        let f = 1usize << l;
        QuadParams { max_phase: self.max_phase / f as f64, min_panels: self.min_panels * f, ..*self }
    }
}

/// A region with integrand, described in iterated form.
pub(crate) trait Problem: Sync {
    fn outer_range(&self) -> Option<(f64, f64)>;
    /// Disjoint `u2`-intervals over `u1`, appended to `out`.
    fn segments(&self, u1: f64, out: &mut Vec<(f64, f64)>);
    /// `u1` values where the integrand is not smooth.
    fn outer_breaks(&self) -> Vec<f64>;
    /// `u2` values over `u1` where the integrand is not smooth.
    fn inner_breaks(&self, u1: f64, out: &mut Vec<f64>);
    /// Real amplitude and phase.
    fn eval(&self, u: [f64; 2]) -> (f64, f64);
    fn phase_grad(&self, u: [f64; 2]) -> [f64; 2];
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Accum {
    pub value: Complex64,
    /// `Σ |w · amplitude|`
    pub mass: f64,
    pub max_phase: f64,
    pub panels: usize,
}

impl Accum {
    fn add_scaled(&mut self, other: &Accum, w: f64) {
        self.value += other.value * w;
        self.mass += other.mass * w.abs();
        self.max_phase = self.max_phase.max(other.max_phase);
        self.panels += other.panels;
    }

    pub fn scaled(mut self, w: f64) -> Accum {
        self.value *= w;
        self.mass *= w.abs();
        self
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Panel {
    pub a: f64,
    pub b: f64,
}

/// Splits `[a, b]` into panels: geometric grading towards `breaks`, then
/// bisection until each panel is short enough and its phase change small.
pub(crate) fn panelize(
    a: f64,
    b: f64,
    breaks: &[f64],
    rate: &dyn Fn(f64) -> f64,
    params: &QuadParams,
    out: &mut Vec<Panel>,
) {
    if !(b > a) {
        return;
    }
    let cap = (b - a) / params.min_panels as f64;
    let eps = 1e-12 * (b - a);
    let mut pts: Vec<(f64, bool)> = vec![(a, false)];
    let mut end_singular = false;
    let mut sorted: Vec<f64> = breaks.to_vec();
    sorted.sort_by(f64::total_cmp);
    for &x in &sorted {
        if (x - a).abs() <= eps {
            pts[0].1 = true;
        } else if (x - b).abs() <= eps {
            end_singular = true;
        } else if x > a && x < b && x - pts.last().unwrap().0 > eps {
            pts.push((x, true));
        }
    }
    pts.push((b, end_singular));
    let refine = |p: f64, q: f64, out: &mut Vec<Panel>| refine(p, q, cap, rate, params, out, 0);
    for w in pts.windows(2) {
        let ((p, sp), (q, sq)) = (w[0], w[1]);
        match (sp, sq) {
            (true, true) => {
                let m = 0.5 * (p + q);
                grade(p, m, true, params, out, &refine);
                grade(m, q, false, params, out, &refine);
            }
            (true, false) => grade(p, q, true, params, out, &refine),
            (false, true) => grade(p, q, false, params, out, &refine),
            (false, false) => refine(p, q, out),
        }
    }
}

fn grade(
    p: f64,
    q: f64,
    singular_left: bool,
    params: &QuadParams,
    out: &mut Vec<Panel>,
    refine: &dyn Fn(f64, f64, &mut Vec<Panel>),
) {
    let len = q - p;
    let r = params.grade_ratio;
    let n = params.grade_levels;
    // Distances from the singular end: len, len r, ..., len r^n, 0.
    let mut cuts: Vec<f64> = (0..=n).map(|j| len * r.powi(j as i32)).collect();
    cuts.push(0.0);
    if singular_left {
        for j in (0..cuts.len() - 1).rev() {
            refine(p + cuts[j + 1], p + cuts[j], out);
        }
    } else {
        for j in 0..cuts.len() - 1 {
            refine(q - cuts[j], q - cuts[j + 1], out);
        }
    }
}

fn refine(
    p: f64,
    q: f64,
    cap: f64,
    rate: &dyn Fn(f64) -> f64,
    params: &QuadParams,
    out: &mut Vec<Panel>,
    depth: usize,
) {
    let w = q - p;
    let est = 1.25 * w * (0..5).map(|i| rate(p + w * i as f64 / 4.0)).fold(0.0, f64::max);
    if depth < 50 && (w > cap * (1.0 + 1e-12) || est > params.max_phase) {
        let m = 0.5 * (p + q);
        refine(p, m, cap, rate, params, out, depth + 1);
        refine(m, q, cap, rate, params, out, depth + 1);
    } else {
        out.push(Panel { a: p, b: q });
    }
}

struct Scratch {
    segs: Vec<(f64, f64)>,
    breaks: Vec<f64>,
    panels: Vec<Panel>,
}

fn inner<P: Problem>(prob: &P, u1: f64, params: &QuadParams, s: &mut Scratch) -> Accum {
    let rule = gl16();
    let mut acc = Accum::default();
    s.segs.clear();
    prob.segments(u1, &mut s.segs);
    for &(lo, hi) in &s.segs {
        s.breaks.clear();
        prob.inner_breaks(u1, &mut s.breaks);
        s.panels.clear();
        let rate = |y: f64| prob.phase_grad([u1, y])[1].abs();
        panelize(lo, hi, &s.breaks, &rate, params, &mut s.panels);
        for p in &s.panels {
            let half = 0.5 * (p.b - p.a);
            let mid = 0.5 * (p.a + p.b);
            let mut v = Complex64::new(0.0, 0.0);
            let mut mass = 0.0;
            for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
                let (amp, ph) = prob.eval([u1, mid + half * x]);
                if amp == 0.0 {
                    continue;
                }
                let c = w * half * amp;
                let (sn, cs) = ph.sin_cos();
                v += Complex64::new(c * cs, c * sn);
                mass += c.abs();
                acc.max_phase = acc.max_phase.max(ph.abs());
            }
            acc.value += v;
            acc.mass += mass;
        }
        acc.panels += s.panels.len();
    }
    acc
}

/// Integrates a [`Problem`]; outer panels run in parallel and are summed in order.
pub(crate) fn integrate<P: Problem>(prob: &P, params: &QuadParams) -> Accum {
    let Some((a, b)) = prob.outer_range() else {
        return Accum::default();
    };
    let breaks = prob.outer_breaks();
    let outer_rate = |u1: f64| -> f64 {
        let mut segs = Vec::new();
        prob.segments(u1, &mut segs);
        let mut m: f64 = 0.0;
        for (lo, hi) in segs {
            for i in 0..9 {
                let y = lo + (hi - lo) * i as f64 / 8.0;
                m = m.max(prob.phase_grad([u1, y])[0].abs());
            }
        }
        m
    };
    let mut panels = Vec::new();
    panelize(a, b, &breaks, &outer_rate, params, &mut panels);
    let rule = gl16();
    let parts: Vec<Accum> = panels
        .par_iter()
        .map_init(
            || Scratch { segs: Vec::new(), breaks: Vec::new(), panels: Vec::new() },
            |s, p| {
                let half = 0.5 * (p.b - p.a);
                let mid = 0.5 * (p.a + p.b);
                let mut acc = Accum::default();
                for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
                    let a = inner(prob, mid + half * x, params, s);
                    acc.add_scaled(&a, w * half);
                }
                acc.panels += 1;
                acc
            },
        )
        .collect();
    let mut total = Accum::default();
    for p in &parts {
        total.add_scaled(p, 1.0);
    }
    total
}
