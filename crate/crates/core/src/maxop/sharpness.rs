use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homfn::{critical_directions, factor_at_point, global_order, Frame, MixedHomPoly};
use crate::oscquad::{gauss_legendre, SurfaceSpec, GL_POINTS};
use crate::rational::{self, Rational};

use super::average::{quarter_octave_scales, SurfaceQuadrature};
use super::grid::{GridFunction, GridGeometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessVariant {
    /// Rectangles `|x'_j| ≤ ε y^{-k_j}`, area `~ y^{-(k1+k2)}`.
    Dilation,
    /// Tubes `|x'_2 - b x'_1^q| ≤ δ y^{-1/n}` around a critical direction, area `~ y^{-1/n}`.
    Order,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Diverges,
    Bounded,
    Inconclusive,
}

/// `max |f|` over the square `[-e, e]²`, from the boundary (where a degree-one
/// homogeneous `f` attains it) using exact critical points on each edge.
pub fn square_max_abs(f: &MixedHomPoly, e: &Rational) -> f64 {
    let p = f.poly();
    let me = -e.clone();
    let mut best: f64 = 0.0;
    for edge in [p.restrict_x1(e), p.restrict_x1(&me), p.restrict_x2(e), p.restrict_x2(&me)] {
        let mut cand = vec![e.clone(), me.clone()];
        let d = edge.derivative();
        if !d.is_zero() {
            for r in d.real_roots() {
                let v = r.approx_rational();
                if v > me && &v < e {
                    cand.push(v);
                }
            }
        }
        for c in cand {
            best = best.max(rational::to_f64(&edge.eval(&c)).abs());
        }
    }
    best
}

/// Largest `ε = 2^{-j} ≤ 1` with `|f| ≤ 1` on `[-ε, ε]²`.
pub fn dyadic_epsilon(f: &MixedHomPoly) -> Result<f64> {
    let mut e = rational::int(1);
    let half = rational::rat(1, 2);
    for _ in 0..64 {
        if square_max_abs(f, &e) <= 1.0 {
            return Ok(rational::to_f64(&e));
        }
        e *= &half;
    }
    Err(Error::Degenerate("no dyadic epsilon ≥ 2^-64 keeps |f| ≤ 1".into()))
}

fn require_dilation(spec: &SurfaceSpec) -> Result<[f64; 2]> {
    let k = spec.weights_f64();
    if !(k[0] < 1.0 && k[1] < 1.0) {
        return Err(Error::domain(format!("the dilation witness needs both weights below 1, got {k:?}")));
    }
    Ok(k)
}

/// The tube around a critical direction used by the order witness, in the
/// frame where the base point has positive first coordinate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderTube {
    /// Base point on the critical curve, original coordinates.
    pub x0: [f64; 2],
    pub frame: Frame,
    pub n: u32,
    pub b: f64,
    pub q: f64,
    pub delta: f64,
    /// `sup |g|` over the disc, where `f = (x2 - b x1^q)^n g`.
    pub g_sup: f64,
}

impl OrderTube {
    /// Picks a critical direction of maximal order, places `x0` on its curve
    /// with `max |x0_j| ≤ 1/2` and halves `δ` from `delta` until `δ^n sup|g| ≤ 1`
    /// on the disc `|x' - x0| ≤ δ|x0|`.
    pub fn new(spec: &SurfaceSpec, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!("tube constant must lie in (0, 1), got {delta}")));
        }
        let f = &spec.phase;
        let k = spec.weights_f64();
        let dir = critical_directions(f)?
            .into_iter()
            .filter(|d| d.order_n >= 2 && d.tilt == 0.0)
            .max_by_key(|d| d.order_n)
            .ok_or_else(|| Error::domain("the order witness needs an untilted critical direction of order ≥ 2"))?;
        let mut r = 1.0f64;
        let mut x0 = dir.theta;
        while x0[0].abs().max(x0[1].abs()) > 0.5 {
            r *= 0.5;
            x0 = [r.powf(k[0]) * dir.theta[0], r.powf(k[1]) * dir.theta[1]];
        }
        let (frame, fact) = factor_at_point(f, x0)?;
        if fact.n != dir.order_n {
            return Err(Error::Numeric {
                message: format!("factorization order {} differs from the direction order {}", fact.n, dir.order_n),
                best_re: fact.n as f64,
                best_im: 0.0,
                err_est: 0.0,
            });
        }
        let c = frame.apply(x0);
        let norm = x0[0].hypot(x0[1]);
        let mut delta = delta;
        for _ in 0..40 {
            let rad = delta * norm;
            let mut g_sup: f64 = 0.0;
            let m = 48;
            for i in 0..=m {
                for j in 0..=m {
                    let u = [
                        c[0] + rad * (2.0 * i as f64 / m as f64 - 1.0),
                        c[1] + rad * (2.0 * j as f64 / m as f64 - 1.0),
                    ];
                    if (u[0] - c[0]).hypot(u[1] - c[1]) <= rad && u[0] > 0.0 {
                        g_sup = g_sup.max(fact.g(u).abs());
                    }
                }
            }
            g_sup *= 1.05;
            let inside = rad < c[0] && delta * (1.0 + delta) * norm <= 0.5;
            if inside && g_sup * delta.powi(fact.n as i32) <= 1.0 {
                return Ok(OrderTube { x0, frame, n: fact.n, b: fact.b, q: fact.q, delta, g_sup });
            }
            delta *= 0.5;
        }
        Err(Error::Degenerate("no tube constant found".into()))
    }

    /// Area of `{|x'_2 - b x'_1^q| ≤ δ y^{-1/n}, |x' - x0| ≤ δ|x0|}` by quadrature.
    pub fn area(&self, y: f64) -> f64 {
        let c = self.frame.apply(self.x0);
        let rad = self.delta * self.x0[0].hypot(self.x0[1]);
        let w = self.delta * y.powf(-1.0 / self.n as f64);
        let (xs, ws) = gauss_legendre(GL_POINTS);
        let panels = 256;
        let h = 2.0 * rad / panels as f64;
        let mut area = 0.0;
        for p in 0..panels {
            let mid = c[0] - rad + (p as f64 + 0.5) * h;
            for (x, wt) in xs.iter().zip(&ws) {
                let u1 = mid + 0.5 * h * x;
                let half = (rad * rad - (u1 - c[0]).powi(2)).max(0.0).sqrt();
                let centre = self.b * u1.powf(self.q);
                let len = ((c[1] + half).min(centre + w) - (c[1] - half).max(centre - w)).max(0.0);
                area += 0.5 * h * wt * len;
            }
        }
        area
    }

    /// `min_y area(y) y^{1/n}` over `y = 2^j`, `0 ≤ j ≤ 40`: `area(y) ≥ C y^{-1/n}`
    /// on that scale grid.
    pub fn constant(&self) -> f64 {
        (0..=40)
            .map(|j| {
                let y = 2f64.powi(j);
                self.area(y) * y.powf(1.0 / self.n as f64)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Lower bound for `Mg_N(x, y)` from the measure of the set of `x'` that the
/// construction forces into the slab. For [`WitnessVariant::Order`] the
/// `epsilon` argument is the tube constant `δ`.
pub fn lower_bound_witness(spec: &SurfaceSpec, epsilon: f64, y: f64, variant: WitnessVariant) -> Result<f64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(y >= 1.0) || !y.is_finite() {
        return Err(Error::domain(format!("y must be at least 1, got {y}")));
    }
    match variant {
        WitnessVariant::Dilation => {
            let k = require_dilation(spec)?;
            Ok(4.0 * epsilon * epsilon * y.powf(-(k[0] + k[1])))
        }
        WitnessVariant::Order => Ok(OrderTube::new(spec, epsilon)?.area(y)),
    }
}

/// `∫_1^Y y^{-a} dy`
fn power_integral(a: f64, upper: f64) -> f64 {
    if upper <= 1.0 {
        0.0
    } else if (a - 1.0).abs() < 1e-12 {
        upper.ln()
    } else {
        (upper.powf(1.0 - a) - 1.0) / (1.0 - a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessOptions {
    /// `None` picks the order variant when `ord f ≥ 1/(k1+k2)`.
    pub variant: Option<WitnessVariant>,
    /// Starting tube constant of the order variant.
    pub delta: f64,
    /// Last two increment ratios at least this → Diverges.
    pub diverge_ratio: f64,
    /// Last two increment ratios at most this → Bounded.
    pub bounded_ratio: f64,
    /// Number of grid cross-check points (0 disables the check).
    pub cross_points: usize,
    pub seed: u64,
    pub grid_spacing: f64,
    pub quad_panels: usize,
}

impl Default for SharpnessOptions {
    fn default() -> Self {
        SharpnessOptions {
            variant: None,
            delta: 0.125,
            diverge_ratio: 1.0 - 1e-6,
            bounded_ratio: 0.95,
            cross_points: 10,
            seed: 42,
            grid_spacing: 0.125,
            quad_panels: 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossPoint {
    pub x: [f64; 3],
    pub maximal: f64,
    pub witness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub n: u64,
    pub points: Vec<CrossPoint>,
    pub min_ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub p: f64,
    pub variant: WitnessVariant,
    pub n_list: Vec<u64>,
    /// Lower bounds for `‖Mg_N‖_p^p / ‖g_N‖_p^p`.
    pub norms: Vec<f64>,
    /// `norms[i+1] / norms[i]`
    pub growth_ratios: Vec<f64>,
    /// Ratios of successive increments `norms[i+1] - norms[i]`.
    pub increment_ratios: Vec<f64>,
    pub verdict: Verdict,
    /// `ε` (dilation) or `δ` (order).
    pub scale_constant: f64,
    /// `C` in the witness `C y^{-e}`.
    pub witness_constant: f64,
    /// The exponent `e`.
    pub witness_exponent: f64,
    pub cross_check: Option<CrossCheck>,
}

impl SharpnessReport {
    /// CSV rows `N, norm, growth_ratio, increment_ratio`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parse(format!("writing CSV: {e}"));
        w.write_record(["N", "norm", "growth_ratio", "increment_ratio"]).map_err(io)?;
        for (i, (n, v)) in self.n_list.iter().zip(&self.norms).enumerate() {
            let g = if i == 0 { String::new() } else { self.growth_ratios[i - 1].to_string() };
            let r = if i < 2 { String::new() } else { self.increment_ratios[i - 2].to_string() };
            w.write_record([n.to_string(), v.to_string(), g, r]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Parse(format!("writing CSV: {e}")))
    }
}

/// Witness `W(y) = C y^{-e}`, the admissible `y`-range `(1, Y_N]` and the scale constant.
struct Witness {
    variant: WitnessVariant,
    constant: f64,
    exponent: f64,
    scale: f64,
    k: [f64; 2],
}

impl Witness {
    fn new(spec: &SurfaceSpec, opts: &SharpnessOptions) -> Result<Self> {
        let k = spec.weights_f64();
        let variant = match opts.variant {
            Some(v) => v,
            None => {
                let ord = global_order(&spec.phase)? as f64;
                if ord >= 1.0 / (k[0] + k[1]) && ord >= 2.0 {
                    WitnessVariant::Order
                } else {
                    WitnessVariant::Dilation
                }
            }
        };
        match variant {
            WitnessVariant::Dilation => {
                require_dilation(spec)?;
                let e = dyadic_epsilon(&spec.phase)?;
                Ok(Witness { variant, constant: 4.0 * e * e, exponent: k[0] + k[1], scale: e, k })
            }
            WitnessVariant::Order => {
                let tube = OrderTube::new(spec, opts.delta)?;
                Ok(Witness { variant, constant: tube.constant(), exponent: 1.0 / tube.n as f64, scale: tube.delta, k })
            }
        }
    }

    fn upper(&self, n: f64) -> f64 {
        match self.variant {
            WitnessVariant::Dilation => {
                let m = n / (2.0 * self.scale);
                (m.powf(1.0 / (1.0 - self.k[0]))).min(m.powf(1.0 / (1.0 - self.k[1])))
            }
            WitnessVariant::Order => self.scale * n,
        }
    }

    fn at(&self, y: f64) -> f64 {
        self.constant * y.powf(-self.exponent)
    }
}

/// The lower bound for `‖Mg_N‖_p^p / ‖g_N‖_p^p` over `N`, integrated in closed
/// form over `{|x| < N/2} × (1, Y_N]`, and the growth verdict.
pub fn sharpness_experiment(
    spec: &SurfaceSpec,
    p: f64,
    n_list: &[u64],
    opts: &SharpnessOptions,
) -> Result<SharpnessReport> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!("p must be positive, got {p}")));
    }
    if spec.offset_c != 1.0 {
        return Err(Error::domain(format!("the construction assumes offset_c = 1, got {}", spec.offset_c)));
    }
    if n_list.len() < 4 || !n_list.windows(2).all(|w| w[1] > w[0]) || n_list[0] < 2 {
        return Err(Error::domain("N list must hold at least 4 increasing scales ≥ 2"));
    }
    let k = spec.weights_f64();
    let mut min_psi = f64::INFINITY;
    for i in 0..=40 {
        for j in 0..=40 {
            let x = [-1.0 + i as f64 / 20.0, -1.0 + j as f64 / 20.0];
            min_psi = min_psi.min(spec.cutoff.eval(x, k));
        }
    }
    if min_psi < 1.0 {
        return Err(Error::domain(format!("the cutoff must be at least 1 on the unit square, minimum {min_psi}")));
    }
    let w = Witness::new(spec, opts)?;
    // ‖g_N‖_p^p = 8N², |{|x| < N/2}| = πN²/4.
    let norms: Vec<f64> = n_list
        .iter()
        .map(|&n| std::f64::consts::PI / 32.0 * w.constant.powf(p) * power_integral(w.exponent * p, w.upper(n as f64)))
        .collect();
    let growth_ratios: Vec<f64> = norms.windows(2).map(|v| v[1] / v[0]).collect();
    let incs: Vec<f64> = norms.windows(2).map(|v| v[1] - v[0]).collect();
    let increment_ratios: Vec<f64> = incs.windows(2).map(|v| v[1] / v[0]).collect();
    let last = &increment_ratios[increment_ratios.len() - 2..];
    let mut verdict = if last.iter().all(|&r| r >= opts.diverge_ratio) {
        Verdict::Diverges
    } else if last.iter().all(|&r| r <= opts.bounded_ratio) {
        Verdict::Bounded
    } else {
        Verdict::Inconclusive
    };
    let cross_check = if opts.cross_points > 0 { Some(cross_check(spec, &w, n_list[0], opts)?) } else { None };
    if cross_check.as_ref().is_some_and(|c| !c.pass) {
        verdict = Verdict::Inconclusive;
    }
    Ok(SharpnessReport {
        p,
        variant: w.variant,
        n_list: n_list.to_vec(),
        norms,
        growth_ratios,
        increment_ratios,
        verdict,
        scale_constant: w.scale,
        witness_constant: w.constant,
        witness_exponent: w.exponent,
        cross_check,
    })
}

/// `max_t |A_t g_N|` on a local grid against the witness at random points
/// `(x, y)` with `|x| < N/2` and `y` a quarter-octave scale in `(1, min(Y_N, 4)]`.
fn cross_check(spec: &SurfaceSpec, w: &Witness, n: u64, opts: &SharpnessOptions) -> Result<CrossCheck> {
    let nf = n as f64;
    let scales: Vec<f64> = quarter_octave_scales(1.0, w.upper(nf).min(4.0)).into_iter().filter(|&t| t > 1.0).collect();
    if scales.is_empty() {
        return Err(Error::domain(format!("no admissible scale y in (1, 4] for N = {n}")));
    }
    let quad = SurfaceQuadrature::new(spec, opts.quad_panels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let indicator = |x: [f64; 3]| -> f64 {
        if x[0].abs() <= nf && x[1].abs() <= nf && x[2].abs() <= 1.0 {
            1.0
        } else {
            0.0
        }
    };
    let mut points = Vec::with_capacity(opts.cross_points);
    for _ in 0..opts.cross_points {
        let r = 0.5 * nf * rng.gen::<f64>().sqrt();
        let a = std::f64::consts::TAU * rng.gen::<f64>();
        let y = scales[rng.gen_range(0..scales.len())];
        let x = [r * a.cos(), r * a.sin(), y];
        let (t0, t1) = (scales[0], scales[scales.len() - 1]);
        let lo = [0, 1, 2].map(|j| x[j] - (t0 * quad.hi[j]).max(t1 * quad.hi[j]) - opts.grid_spacing);
        let hi = [0, 1, 2].map(|j| x[j] - (t0 * quad.lo[j]).min(t1 * quad.lo[j]) + opts.grid_spacing);
        let geom = GridGeometry::covering(lo, hi, opts.grid_spacing)?;
        let g = GridFunction::from_fn(geom, indicator);
        let maximal = quad.maximal_at(&g, &scales, x)?;
        points.push(CrossPoint { x, maximal, witness: w.at(y) });
    }
    let min_ratio = points.iter().map(|c| c.maximal / c.witness).fold(f64::INFINITY, f64::min);
    Ok(CrossCheck { n, points, min_ratio, pass: min_ratio >= 0.5 })
}
