use num::complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::homfn::{homogeneous_radius, DampingMode};

use super::cutoff::{partition_piece, smooth_step};
use super::gauss::GL_POINTS;
use super::panel::{integrate, Accum, Problem, QuadParams};
use super::surface::{Amplitude, Integrand, Phase, SurfaceSpec};

/// Absolute part of every tolerance.
pub const ATOL: f64 = 1e-12;

/// Hard cap on the number of dyadic pieces.
pub const MAX_PIECES: i32 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    Dyadic,
    Oracle,
}

impl Path {
    pub fn as_str(&self) -> &'static str {
        match self {
            Path::Dyadic => "dyadic",
            Path::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscResult {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub abs_error_estimate: f64,
    /// Quadrature panels used (outer and inner).
    pub subdivisions: usize,
    pub path: Path,
    /// Dyadic pieces summed, or the oracle refinement level.
    pub pieces: usize,
    /// Oracle only: `|V_L - V_{L-1}| / |V_{L-1} - V_{L-2}|`.
    pub refinement_ratio: Option<f64>,
    /// Oracle only: false flags a non-convergent refinement sequence.
    pub converged: bool,
}

pub(crate) fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// One dyadic piece `∫ ψ(δ_{2^k} x) a(x) G(x)^α e^{iφ(x)} dx`, integrated in
/// the coordinates `x = δ_{2^{-m}} v` (`m = k` is the rescaled unit annulus,
/// `m = 0` the original coordinates).
struct PieceProblem<'a> {
    ig: &'a Integrand,
    phase: Phase,
    scale: [f64; 2],
    psi_factor: f64,
    outer_axes: [f64; 2],
    inner_axes: [f64; 2],
    x1_range: [f64; 2],
    q: f64,
    /// Weight `Σ_{j ≥ k} ψ(δ_{2^j} x)` on the whole ball instead of `ψ(δ_{2^k} x)`.
    core: bool,
}

impl<'a> PieceProblem<'a> {
    fn new(ig: &'a Integrand, phase: &Phase, k: i32, m: i32) -> Self {
        let kk = ig.k;
        let sm = 2f64.powi(-m);
        let scale = [sm.powf(kk[0]), sm.powf(kk[1])];
        let hi = 2f64.powi(m - k + 1);
        let lo = 2f64.powi(m - k - 1);
        PieceProblem {
            ig,
            phase: Phase { tf: phase.tf * sm, w: [phase.w[0] * scale[0], phase.w[1] * scale[1]] },
            scale,
            psi_factor: 2f64.powi(k - m),
            outer_axes: [hi.powf(kk[0]), hi.powf(kk[1])],
            inner_axes: [lo.powf(kk[0]), lo.powf(kk[1])],
            x1_range: ig.cutoff.support_box(kk)[0],
            q: kk[1] / kk[0],
            core: false,
        }
    }

    /// The ball `ρ < 2^{1-k}` carrying all pieces from `k` on.
    fn core(ig: &'a Integrand, phase: &Phase, k: i32, m: i32) -> Self {
        PieceProblem { inner_axes: [0.0, 0.0], core: true, ..Self::new(ig, phase, k, m) }
    }

    #[inline]
    fn weight(&self, r: f64) -> f64 {
        let rho = r * self.psi_factor;
        if !self.core {
            partition_piece(rho)
        } else if rho == 0.0 {
            1.0
        } else {
            smooth_step(rho.log2())
        }
    }

    /// `2^{-m(k1 + k2 + α)}`: Jacobian and homogeneity of `G^α`.
    fn prefactor(ig: &Integrand, m: i32) -> f64 {
        let a = if ig.damping.mode() == DampingMode::Identity { 0.0 } else { ig.alpha };
        2f64.powf(-(m as f64) * (ig.k[0] + ig.k[1] + a))
    }
}

impl Problem for PieceProblem<'_> {
    fn outer_range(&self) -> Option<(f64, f64)> {
        let a = (-self.outer_axes[0]).max(self.x1_range[0] / self.scale[0]);
        let b = self.outer_axes[0].min(self.x1_range[1] / self.scale[0]);
        (b > a).then_some((a, b))
    }

    fn segments(&self, v1: f64, out: &mut Vec<(f64, f64)>) {
        let [ao, bo] = self.outer_axes;
        if v1.abs() >= ao {
            return;
        }
        let Some((lo, hi)) = self.ig.cutoff.chord(v1 * self.scale[0], self.ig.k) else {
            return;
        };
        let (lo, hi) = (lo / self.scale[1], hi / self.scale[1]);
        let ho = bo * (1.0 - (v1 / ao).powi(2)).sqrt();
        let mut push = |a: f64, b: f64| {
            let a = a.max(lo);
            let b = b.min(hi);
            if b > a {
                out.push((a, b));
            }
        };
        let [ai, bi] = self.inner_axes;
        if v1.abs() < ai {
            let hi_in = bi * (1.0 - (v1 / ai).powi(2)).sqrt();
            push(-ho, -hi_in);
            push(hi_in, ho);
        } else {
            push(-ho, ho);
        }
    }

    fn outer_breaks(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.ig.singular.iter().filter(|t| t[0].abs() < 1e-12).map(|_| 0.0).collect();
        if self.core {
            b.push(0.0);
        }
        b
    }

    fn inner_breaks(&self, v1: f64, out: &mut Vec<f64>) {
        if self.core {
            out.push(0.0);
        }
        for t in &self.ig.singular {
            if t[0].abs() >= 1e-12 && v1 * t[0] > 0.0 {
                out.push(t[1] * (v1 / t[0]).powf(self.q));
            }
        }
    }

    #[inline]
    fn eval(&self, v: [f64; 2]) -> (f64, f64) {
        let r = homogeneous_radius(v, self.ig.k);
        let psi = self.weight(r);
        if psi == 0.0 {
            return (0.0, 0.0);
        }
        let x = [v[0] * self.scale[0], v[1] * self.scale[1]];
        let base = self.ig.base(x);
        if base == 0.0 {
            return (0.0, 0.0);
        }
        (psi * base * self.ig.g_alpha(v, r), self.ig.phase(&self.phase, v))
    }

    #[inline]
    fn phase_grad(&self, v: [f64; 2]) -> [f64; 2] {
        self.ig.phase_grad(&self.phase, v)
    }
}

fn piece(ig: &Integrand, phase: &Phase, k: i32, m: i32, core: bool, params: &QuadParams) -> Accum {
    let prob = if core { PieceProblem::core(ig, phase, k, m) } else { PieceProblem::new(ig, phase, k, m) };
    integrate(&prob, params).scaled(PieceProblem::prefactor(ig, m))
}

/// Finest panel refinement level tried for a piece.
pub const MAX_LEVEL: u32 = 3;

/// A piece evaluated at two consecutive refinement levels.
struct PieceState {
    k: i32,
    core: bool,
    level: u32,
    cur: Accum,
    err: f64,
    panels: usize,
}

impl PieceState {
    fn new(ig: &Integrand, phase: &Phase, k: i32, core: bool, params: &QuadParams) -> Self {
        let coarse = piece(ig, phase, k, k, core, &params.level(0));
        let fine = piece(ig, phase, k, k, core, &params.level(1));
        PieceState {
            k,
            core,
            level: 1,
            err: (fine.value - coarse.value).norm(),
            panels: coarse.panels + fine.panels,
            cur: fine,
        }
    }

    fn refine(&mut self, ig: &Integrand, phase: &Phase, params: &QuadParams) {
        self.level += 1;
        let next = piece(ig, phase, self.k, self.k, self.core, &params.level(self.level));
        self.err = (next.value - self.cur.value).norm();
        self.panels += next.panels;
        self.cur = next;
    }
}

/// Dyadic evaluation of `∫ a G^α e^{iφ}` for a compiled integrand.
///
/// Each piece is integrated at panel levels 0 and 1 and its error taken as
/// the difference; pieces with the largest differences are refined (up to
/// [`MAX_LEVEL`]) until the total fits the tolerance.
pub(crate) fn dyadic_integral(ig: &Integrand, phase: &Phase, tol: f64, params: &QuadParams) -> Result<OscResult> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tol must be positive, got {tol}")));
    }
    let ksum = ig.k[0] + ig.k[1];
    let a_eff = if ig.damping.mode() == DampingMode::Identity { 0.0 } else { ig.alpha };
    let (rho_min, rho_max) = ig.support_rho_range();
    let k_start = (-rho_max.log2()).floor() as i32;
    let sup = ig.sup_base() * ig.g_alpha_circle_max();
    // ∫_{ρ < c} |a| G^α ≤ sup|a| (c sup_{S¹} G)^α · area{ρ < c}
    let ball = |c: f64| sup * c.powf(a_eff) * std::f64::consts::PI * c.powf(ksum);
    let allowed = |v: Complex64| ATOL + tol * v.norm();
    // Once `t f` varies little over the ball ρ < 2^{1-k}, the whole ball is
    // one piece; the linear part of the phase is left to the panels.
    let fsup = ig.f_circle_max();
    let span = |k: i32| phase.tf.abs() * 2f64.powi(1 - k) * fsup;
    let mut pieces: Vec<PieceState> = Vec::new();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    for k in k_start..k_start + MAX_PIECES {
        if rho_min > 0.0 && 2f64.powi(1 - k) <= rho_min {
            tail = 0.0;
            break;
        }
        if rho_min == 0.0 && span(k) <= params.max_phase {
            pieces.push(PieceState::new(ig, phase, k, true, params));
            tail = 0.0;
            break;
        }
        let p = PieceState::new(ig, phase, k, false, params);
        sum += p.cur.value;
        pieces.push(p);
        let c = 2f64.powi(-k);
        tail = if rho_min > 0.0 && c <= rho_min { 0.0 } else { ball(c) };
        if tail < allowed(sum) / 10.0 {
            break;
        }
    }
    let total = |ps: &[PieceState]| ps.iter().fold(Complex64::new(0.0, 0.0), |a, p| a + p.cur.value);
    let quad_err = |ps: &[PieceState]| ps.iter().map(|p| p.err).sum::<f64>();
    // Level differences cannot fall below the accumulated rounding of the
    // sums, which grows like the square root of the node count.
    let rounding = |ps: &[PieceState]| {
        let mass: f64 = ps.iter().map(|p| p.cur.mass).sum();
        let max_phase = ps.iter().map(|p| p.cur.max_phase).fold(0.0, f64::max);
        let nodes: usize = ps.iter().map(|p| p.cur.panels * GL_POINTS).sum();
        f64::EPSILON * mass * (1.0 + max_phase) * (nodes.max(1) as f64).sqrt()
    };
    while quad_err(&pieces) + tail > allowed(total(&pieces)) + rounding(&pieces) {
        let worst = pieces.iter_mut().filter(|p| p.level < MAX_LEVEL).max_by(|a, b| a.err.total_cmp(&b.err));
        match worst {
            Some(p) => p.refine(ig, phase, params),
            None => break,
        }
    }
    let value = total(&pieces);
    let floor = rounding(&pieces);
    let err = quad_err(&pieces) + tail;
    if err > allowed(value) + floor {
        return Err(Error::Numeric {
            message: format!(
                "tolerance {:e} not reached with {} pieces at panel level {MAX_LEVEL} (truncation bound {tail:e}, rounding floor {floor:e})",
                allowed(value),
                pieces.len()
            ),
            best_re: value.re,
            best_im: value.im,
            err_est: err,
        });
    }
    let err = err.max(floor);
    Ok(OscResult {
        value,
        abs_error_estimate: err,
        subdivisions: pieces.iter().map(|p| p.panels).sum(),
        path: Path::Dyadic,
        pieces: pieces.len(),
        refinement_ratio: None,
        converged: true,
    })
}

/// `J(t, s) = ∫ a(x) G_f(x)^α e^{it(f(x) + x·s)} dx` by dyadic decomposition.
///
/// `tol` is relative; the accepted error is `1e-12 + tol·|J|`.
pub fn oscillatory_integral(spec: &SurfaceSpec, t: f64, s: [f64; 2], tol: f64) -> Result<OscResult> {
    oscillatory_integral_with(spec, Amplitude::PLAIN, &Phase::of_ts(t, s), tol, &QuadParams::default())
}

/// General form: any amplitude factor and phase `tf·f + w·x`.
pub fn oscillatory_integral_with(
    spec: &SurfaceSpec,
    amplitude: Amplitude,
    phase: &Phase,
    tol: f64,
    params: &QuadParams,
) -> Result<OscResult> {
    let ig = Integrand::new(spec, amplitude)?;
    dyadic_integral(&ig, phase, tol, params)
}

/// The same dyadic piece computed in original and in rescaled coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RescalingCheck {
    pub k: i32,
    #[serde(serialize_with = "ser_complex")]
    pub direct: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub rescaled: Complex64,
    pub relative_difference: f64,
}

/// Compares `J_k` with `2^{-k(α+k1+k2)}` times the unit-annulus integral with
/// parameters `t 2^{-k}` and `σ_j = 2^{k(1-k_j)} s_j`.
pub fn rescaling_check(spec: &SurfaceSpec, t: f64, s: [f64; 2], k: i32) -> Result<RescalingCheck> {
    let ig = Integrand::new(spec, Amplitude::PLAIN)?;
    let phase = Phase::of_ts(t, s);
    let params = QuadParams::default().level(1);
    let direct = piece(&ig, &phase, k, 0, false, &params).value;
    // Unit-annulus integral with the rescaled parameters, then the prefactor.
    let tk = t * 2f64.powi(-k);
    let sigma = [2f64.powf(k as f64 * (1.0 - ig.k[0])) * s[0], 2f64.powf(k as f64 * (1.0 - ig.k[1])) * s[1]];
    let unit = Phase::of_ts(tk, sigma);
    let prob = PieceProblem { phase: unit, ..PieceProblem::new(&ig, &phase, k, k) };
    let rescaled = integrate(&prob, &params).value * PieceProblem::prefactor(&ig, k);
    let relative_difference = (direct - rescaled).norm() / direct.norm().max(1e-300);
    Ok(RescalingCheck { k, direct, rescaled, relative_difference })
}
