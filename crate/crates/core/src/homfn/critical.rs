use std::fmt;

use num::traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::bipoly::BiPoly;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::upoly::{RealRoot, UPoly};

use super::calculus::{exact_point, homogeneous_radius, polar_decompose};
use super::poly::MixedHomPoly;

/// Order of vanishing; `Infinite` only for the zero polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Finite(n) => s.serialize_u32(*n),
            Order::Infinite => s.serialize_str("inf"),
        }
    }
}

pub fn order_at(f: &MixedHomPoly, x: [f64; 2]) -> Result<Order> {
    Ok(order_at_exact(f.poly(), &exact_point(x)?))
}

pub fn order_at_exact(p: &BiPoly, x: &[Rational; 2]) -> Order {
    match p.order_at(x) {
        Some(n) => Order::Finite(n),
        None => Order::Infinite,
    }
}

fn axis_points() -> [[Rational; 2]; 2] {
    [[rational::int(0), rational::int(1)], [rational::int(0), rational::int(-1)]]
}

/// `sup_{θ ∈ S¹} ord f(θ)`, computed exactly.
pub fn global_order(f: &MixedHomPoly) -> Result<u32> {
    if f.is_zero() {
        return Err(Error::domain("order of the zero polynomial"));
    }
    let mut best = 0;
    for sigma in [1, -1] {
        let ray = f.poly().restrict_x1(&rational::int(sigma));
        for (factor, mult) in ray.square_free_decomposition() {
            if !factor.real_roots().is_empty() {
                best = best.max(mult as u32);
            }
        }
    }
    for axis in axis_points() {
        if let Order::Finite(n) = order_at_exact(f.poly(), &axis) {
            best = best.max(n);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Height {
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub value_f64: f64,
    pub global_order: u32,
    #[serde(serialize_with = "ser_rational")]
    pub inverse_weight_sum: Rational,
    /// `h ≥ 2`, the range covered by the maximal theorem.
    pub in_theorem_range: bool,
}

pub(crate) fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::format_rational(r))
}

/// `h = max(1/(k1 + k2), ord f)` for degree-one, non-conic `f`.
pub fn height(f: &MixedHomPoly) -> Result<Height> {
    require_degree_one(f)?;
    f.weights().require_non_conic()?;
    let ord = global_order(f)?;
    let inv = Rational::one() / f.weights().sum();
    let value = rational::max(&inv, &rational::int(ord as i64));
    Ok(Height {
        value_f64: rational::to_f64(&value),
        in_theorem_range: value >= rational::int(2),
        value,
        global_order: ord,
        inverse_weight_sum: inv,
    })
}

fn require_degree_one(f: &MixedHomPoly) -> Result<()> {
    if !f.degree().is_one() {
        return Err(Error::domain(format!("requires degree one, got {}", rational::format_rational(f.degree()))));
    }
    Ok(())
}

/// A point of `S¹` where the gradient of the (possibly tilted) phase vanishes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalDirection {
    pub theta: [f64; 2],
    pub order_n: u32,
    /// Constant subtracted as `tilt · x_{tilt_var}` when the matching weight is 1.
    pub tilt: f64,
    pub tilt_var: usize,
    /// `θ2 |θ1|^{-k2/k1}` when `θ1 ≠ 0`.
    pub b_root: Option<f64>,
}

impl CriticalDirection {
    pub fn angle(&self) -> f64 {
        self.theta[1].atan2(self.theta[0])
    }

    /// Gradient of the tilted phase at `x`.
    pub fn tilted_gradient(&self, f: &MixedHomPoly, x: [f64; 2]) -> [f64; 2] {
        let mut g = f.gradient(x);
        g[self.tilt_var] -= self.tilt;
        g
    }
}

/// Raw result in the frame where the tilt (if any) is on `x1`.
struct RayCritical {
    point: [Rational; 2],
    b: Option<f64>,
    order_n: u32,
    tilt: Rational,
}

fn ray_point(sigma: i64, b: &RealRoot) -> [Rational; 2] {
    [rational::int(sigma), b.approx_rational()]
}

/// Critical points on the rays `(σ, y)`, and on the axis points `(0, ±1)`.
fn critical_in_frame(f: &MixedHomPoly, tilted: bool) -> Result<Vec<RayCritical>> {
    let p = f.poly();
    let d1 = p.derivative(0);
    let d2 = p.derivative(1);
    let mut out = Vec::new();
    for sigma in [1i64, -1] {
        let s = rational::int(sigma);
        let fr = p.restrict_x1(&s);
        let p1 = d1.restrict_x1(&s);
        let p2 = d2.restrict_x1(&s);
        if tilted {
            if p2.is_zero() {
                return Err(Error::Degenerate("∂2 f vanishes identically on a ray".into()));
            }
            for b in p2.real_roots() {
                let br = b.approx_rational();
                out.push(RayCritical {
                    b: Some(b.to_f64()),
                    order_n: 1 + b.multiplicity_in(&p2) as u32,
                    tilt: p1.eval(&br),
                    point: ray_point(sigma, &b),
                });
            }
        } else {
            let common = UPoly::gcd(&p1, &p2);
            if common.is_zero() {
                return Err(Error::Degenerate("gradient vanishes identically on a ray".into()));
            }
            for b in common.real_roots() {
                out.push(RayCritical {
                    b: Some(b.to_f64()),
                    order_n: b.multiplicity_in(&fr) as u32,
                    tilt: Rational::zero(),
                    point: ray_point(sigma, &b),
                });
            }
        }
    }
    for axis in axis_points() {
        let g2 = d2.eval(&axis);
        let g1 = d1.eval(&axis);
        let (critical, tilt) =
            if tilted { (g2.is_zero(), g1) } else { (g1.is_zero() && g2.is_zero(), Rational::zero()) };
        if !critical {
            continue;
        }
        let shifted = p.sub(&BiPoly::from_terms([(1, 0, tilt.clone())]));
        let n = match order_at_exact(&shifted, &axis) {
            Order::Finite(n) => n,
            Order::Infinite => return Err(Error::Degenerate("tilted phase is identically zero".into())),
        };
        out.push(RayCritical { point: axis, b: None, order_n: n, tilt });
    }
    Ok(out)
}

/// All critical directions of a degree-one, non-conic `f`, sorted by angle.
pub fn critical_directions(f: &MixedHomPoly) -> Result<Vec<CriticalDirection>> {
    require_degree_one(f)?;
    let w = f.weights();
    w.require_non_conic()?;
    let (frame, swapped, tilted) = if w.k1().is_one() {
        (f.clone(), false, true)
    } else if w.k2().is_one() {
        (f.swap(), true, true)
    } else {
        (f.clone(), false, false)
    };
    let frame_weights = frame.weights().clone();
    let q = rational::to_f64(w.k2()) / rational::to_f64(w.k1());
    let mut dirs = Vec::new();
    for c in critical_in_frame(&frame, tilted)? {
        let x = [rational::to_f64(&c.point[0]), rational::to_f64(&c.point[1])];
        let polar = polar_decompose(x, &frame_weights)?;
        let mut theta = polar.theta;
        if swapped {
            theta.swap(0, 1);
        }
        let norm = theta[0].hypot(theta[1]);
        theta = [theta[0] / norm, theta[1] / norm];
        let b_root = if swapped { (theta[0] != 0.0).then(|| theta[1] * theta[0].abs().powf(-q)) } else { c.b };
        dirs.push(CriticalDirection {
            theta,
            order_n: c.order_n,
            tilt: rational::to_f64(&c.tilt),
            tilt_var: usize::from(swapped),
            b_root,
        });
    }
    dirs.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
    Ok(dirs)
}

/// Local factorization `f = (x2 - b x1^q)^n g` near a point with `x1 > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Factorization {
    pub b: f64,
    pub n: u32,
    pub g_at_x0: f64,
    /// Ascending coefficients of `G(y) = f(1, y) / (y - b)^n`.
    pub g_coeffs: Vec<f64>,
    /// `k2 / k1`
    pub q: f64,
    /// Degree of `g` divided by `k1`.
    pub g_exponent: f64,
}

impl Factorization {
    pub fn g_univariate(&self, y: f64) -> f64 {
        self.g_coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    /// `g(x) = x1^{g_exponent} G(x2 x1^{-q})`, for `x1 > 0`.
    pub fn g(&self, x: [f64; 2]) -> f64 {
        x[0].powf(self.g_exponent) * self.g_univariate(x[1] * x[0].powf(-self.q))
    }

    /// `(x2 - b x1^q)^n g(x)`, for `x1 > 0`.
    pub fn reconstruct(&self, x: [f64; 2]) -> f64 {
        (x[1] - self.b * x[0].powf(self.q)).powi(self.n as i32) * self.g(x)
    }
}

/// The factorization at `x0` with `x0_1 > 0`.
pub fn factor_at_direction(f: &MixedHomPoly, x0: [f64; 2]) -> Result<Factorization> {
    if !(x0[0] > 0.0) {
        return Err(Error::domain(format!(
            "factor_at_direction needs x0_1 > 0, got {x0:?}; reflect or swap coordinates first"
        )));
    }
    let w = f.weights();
    let k = w.as_f64();
    let q = k[1] / k[0];
    let ray = f.poly().restrict_x1(&Rational::one());
    if ray.is_zero() {
        return Err(Error::Degenerate("f vanishes identically on the ray".into()));
    }
    let b_guess = x0[1] * x0[0].powf(-q);
    let mut found: Option<(Rational, usize)> = None;
    'outer: for (factor, mult) in ray.square_free_decomposition() {
        for root in factor.real_roots() {
            let r = root.to_f64();
            if (r - b_guess).abs() <= 1e-9 * (1.0 + b_guess.abs()) {
                found = Some((root.approx_rational(), mult));
                break 'outer;
            }
        }
    }
    let (b, n) = match found {
        Some(v) => v,
        None => (rational::from_f64(b_guess)?, 0),
    };
    // Division by (y - b)^n; for an approximated irrational root the
    // remainders are of the size of the approximation error and are dropped.
    let lin = UPoly::linear_root(&b);
    let mut g = ray.clone();
    for _ in 0..n {
        g = g.div_rem(&lin).0;
    }
    let g_b = rational::to_f64(&g.eval(&b));
    let g_exponent = (f.degree_f64() - n as f64 * k[1]) / k[0];
    let fact = Factorization {
        b: rational::to_f64(&b),
        n: n as u32,
        g_at_x0: x0[0].powf(g_exponent) * g_b,
        g_coeffs: g.to_f64_coeffs(),
        q,
        g_exponent,
    };
    let residual = factor_residual(f, &fact, x0);
    if !(residual <= 1e-8) {
        return Err(Error::Numeric {
            message: "factorization residual check failed".into(),
            best_re: fact.g_at_x0,
            best_im: 0.0,
            err_est: residual,
        });
    }
    Ok(fact)
}

/// Largest relative reconstruction error on a small circle around `x0` (inside `x1 > 0`),
/// measured against `|f|` plus a rounding floor.
pub fn factor_residual(f: &MixedHomPoly, fact: &Factorization, x0: [f64; 2]) -> f64 {
    let rad = 0.05 * x0[0];
    (0..16)
        .map(|i| {
            let a = i as f64 * std::f64::consts::PI / 8.0;
            let x = [x0[0] + rad * a.cos(), x0[1] + rad * a.sin()];
            let fx = f.eval(x);
            // Samples can land on the zero set, where |f| is pure rounding.
            let scale = fx.abs() + 1e-7 * f.float().magnitude(x) + 1e-300;
            (fx - fact.reconstruct(x)).abs() / scale
        })
        .fold(0.0, f64::max)
}

/// Coordinate changes applied before factorizing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Frame {
    pub swapped: bool,
    pub reflected: bool,
}

impl Frame {
    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let mut y = if self.swapped { [x[1], x[0]] } else { x };
        if self.reflected {
            y[0] = -y[0];
        }
        y
    }
}

/// [`factor_at_direction`] for any nonzero `x0`, reflecting `x1` when `x0_1 < 0`
/// and interchanging the coordinates when `x0_1 = 0`.
pub fn factor_at_point(f: &MixedHomPoly, x0: [f64; 2]) -> Result<(Frame, Factorization)> {
    if x0 == [0.0, 0.0] {
        return Err(Error::domain("cannot factor at the origin"));
    }
    let swapped = x0[0] == 0.0;
    let g0 = if swapped { f.swap() } else { f.clone() };
    let y = if swapped { [x0[1], x0[0]] } else { x0 };
    let reflected = y[0] < 0.0;
    let g = if reflected { g0.reflect_x1() } else { g0 };
    let frame = Frame { swapped, reflected };
    let fact = factor_at_direction(&g, frame.apply(x0))?;
    Ok((frame, fact))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingMode {
    Identity,
    GradientPower,
    PolarRadius,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DampingSpec {
    pub mode: DampingMode,
    pub base_direction: Option<CriticalDirection>,
    pub exponent_n: Option<u32>,
}

impl DampingSpec {
    pub fn identity() -> Self {
        DampingSpec { mode: DampingMode::Identity, base_direction: None, exponent_n: None }
    }

    pub fn polar_radius() -> Self {
        DampingSpec { mode: DampingMode::PolarRadius, base_direction: None, exponent_n: None }
    }

    /// `G = r |∇f̃(θ)|^{n/(n-1)}` based at a critical direction of order `n ≥ 2`.
    pub fn gradient_power(f: &MixedHomPoly, dir: &CriticalDirection) -> Result<Self> {
        if dir.order_n < 2 {
            return Err(Error::domain(format!(
                "gradient-power damping needs order ≥ 2, direction has {}",
                dir.order_n
            )));
        }
        let g = dir.tilted_gradient(f, dir.theta);
        let scale = f.derivative(0).float().magnitude(dir.theta) + f.derivative(1).float().magnitude(dir.theta);
        if g[0].hypot(g[1]) > 1e-8 * scale.max(1.0) {
            return Err(Error::domain("base direction is not a zero of the gradient"));
        }
        Ok(DampingSpec {
            mode: DampingMode::GradientPower,
            base_direction: Some(dir.clone()),
            exponent_n: Some(dir.order_n),
        })
    }

    fn gradient_parts(&self) -> Result<(&CriticalDirection, u32)> {
        match (&self.base_direction, self.exponent_n) {
            (Some(d), Some(n)) if n >= 2 => Ok((d, n)),
            _ => Err(Error::domain("gradient-power damping needs a base direction and exponent n ≥ 2")),
        }
    }
}

/// `G_f(x)` by polar decomposition.
pub fn damping_factor(f: &MixedHomPoly, spec: &DampingSpec, x: [f64; 2]) -> Result<f64> {
    if x == [0.0, 0.0] {
        return Err(Error::domain("damping factor at the origin"));
    }
    match spec.mode {
        DampingMode::Identity => Ok(1.0),
        DampingMode::PolarRadius => Ok(polar_decompose(x, f.weights())?.r),
        DampingMode::GradientPower => {
            let (dir, n) = spec.gradient_parts()?;
            let p = polar_decompose(x, f.weights())?;
            let g = dir.tilted_gradient(f, p.theta);
            Ok(p.r * g[0].hypot(g[1]).powf(n as f64 / (n as f64 - 1.0)))
        }
    }
}

/// Precompiled damping factor for quadrature loops (Newton radius, float gradient).
#[derive(Clone, Debug)]
pub struct DampingEval {
    mode: DampingMode,
    k: [f64; 2],
    grad: [crate::bipoly::FloatPoly; 2],
    tilt: [f64; 2],
    power: f64,
}

impl DampingEval {
    pub fn new(f: &MixedHomPoly, spec: &DampingSpec) -> Result<Self> {
        let mut tilt = [0.0; 2];
        let mut power = 1.0;
        if spec.mode == DampingMode::GradientPower {
            let (dir, n) = spec.gradient_parts()?;
            tilt[dir.tilt_var] = dir.tilt;
            power = n as f64 / (n as f64 - 1.0);
        }
        Ok(DampingEval {
            mode: spec.mode,
            k: f.weights().as_f64(),
            grad: [f.derivative(0).float().clone(), f.derivative(1).float().clone()],
            tilt,
            power,
        })
    }

    pub fn mode(&self) -> DampingMode {
        self.mode
    }

    /// `G(x)`; returns 0 at the origin.
    #[inline]
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self.mode {
            DampingMode::Identity => 1.0,
            _ => self.eval_with_radius(x, homogeneous_radius(x, self.k)),
        }
    }

    /// `G(x)` given the homogeneous radius `r = ρ(x)`.
    #[inline]
    pub fn eval_with_radius(&self, x: [f64; 2], r: f64) -> f64 {
        match self.mode {
            DampingMode::Identity => 1.0,
            DampingMode::PolarRadius => r,
            DampingMode::GradientPower => {
                if r == 0.0 {
                    return 0.0;
                }
                let th = [x[0] * r.powf(-self.k[0]), x[1] * r.powf(-self.k[1])];
                let g0 = self.grad[0].eval(th) - self.tilt[0];
                let g1 = self.grad[1].eval(th) - self.tilt[1];
                r * g0.hypot(g1).powf(self.power)
            }
        }
    }

    /// Upper bound of `G` on the unit circle, sampled.
    pub fn circle_max(&self) -> f64 {
        (0..720)
            .map(|i| {
                let a = i as f64 * std::f64::consts::PI / 360.0;
                self.eval([a.cos(), a.sin()])
            })
            .fold(0.0, f64::max)
            * 1.05
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homfn::poly::Weights;

    fn x2_x1sq() -> MixedHomPoly {
        MixedHomPoly::from_i64(&[(2, 1, 1)], Weights::ratio((1, 4), (1, 2))).unwrap()
    }

    fn quartic() -> MixedHomPoly {
        MixedHomPoly::from_i64(&[(4, 0, 1), (0, 4, -1)], Weights::ratio((1, 4), (1, 4))).unwrap()
    }

    fn sextic() -> MixedHomPoly {
        MixedHomPoly::from_i64(&[(6, 0, 1), (0, 6, 1)], Weights::ratio((1, 6), (1, 6))).unwrap()
    }

    fn paraboloid() -> MixedHomPoly {
        MixedHomPoly::from_i64(&[(2, 0, 1), (0, 2, 1)], Weights::ratio((1, 2), (1, 2))).unwrap()
    }

    #[test]
    fn order_examples() {
        assert_eq!(order_at(&x2_x1sq(), [0.0, 1.0]).unwrap(), Order::Finite(2));
        assert_eq!(order_at(&paraboloid(), [1.0, 0.0]).unwrap(), Order::Finite(0));
        assert_eq!(order_at(&quartic(), [1.0, 1.0]).unwrap(), Order::Finite(1));
        assert_eq!(order_at_exact(&BiPoly::zero(), &axis_points()[0]), Order::Infinite);
        assert_eq!(serde_json::to_string(&Order::Infinite).unwrap(), "\"inf\"");
    }

    #[test]
    fn global_order_examples() {
        assert_eq!(global_order(&x2_x1sq()).unwrap(), 2);
        assert_eq!(global_order(&quartic()).unwrap(), 1);
        assert_eq!(global_order(&sextic()).unwrap(), 0);
    }

    #[test]
    fn height_examples() {
        let h = height(&paraboloid()).unwrap();
        assert_eq!(h.value, rational::int(1));
        assert!(!h.in_theorem_range);
        assert_eq!(height(&x2_x1sq()).unwrap().value, rational::int(2));
        assert_eq!(height(&sextic()).unwrap().value, rational::int(3));
        let cone = MixedHomPoly::from_i64(&[(1, 0, 1)], Weights::ratio((1, 1), (1, 1))).unwrap();
        assert!(matches!(height(&cone), Err(Error::Unsupported(_))));
    }

    #[test]
    fn critical_direction_examples() {
        let dirs = critical_directions(&x2_x1sq()).unwrap();
        assert_eq!(dirs.len(), 2);
        assert_eq!(dirs[0].theta, [0.0, -1.0]);
        assert_eq!(dirs[1].theta, [0.0, 1.0]);
        assert!(dirs.iter().all(|d| d.order_n == 2 && d.b_root.is_none()));
        assert!(critical_directions(&quartic()).unwrap().is_empty());

        let tilted = MixedHomPoly::from_i64(&[(1, 0, 1), (0, 2, 1)], Weights::ratio((1, 1), (1, 2))).unwrap();
        let dirs = critical_directions(&tilted).unwrap();
        assert_eq!(dirs.len(), 2);
        for d in &dirs {
            assert_eq!(d.order_n, 2);
            assert_eq!(d.tilt, 1.0);
            assert_eq!(d.tilt_var, 0);
            assert_eq!(d.theta[1], 0.0);
        }
        // Same phase with the roles of the coordinates exchanged.
        let dirs = critical_directions(&tilted.swap()).unwrap();
        assert_eq!(dirs.len(), 2);
        assert!(dirs.iter().all(|d| d.tilt_var == 1 && d.order_n == 2 && d.theta[0] == 0.0));
    }

    #[test]
    fn factorization_examples() {
        let f = factor_at_direction(&x2_x1sq(), [1.0, 0.0]).unwrap();
        assert_eq!((f.b, f.n, f.g_at_x0), (0.0, 1, 1.0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = factor_at_direction(&quartic(), [s, s]).unwrap();
        assert_eq!((f.b, f.n), (1.0, 1));
        // g(1,1) = -4 pushed to θ by homogeneity of degree 1 - 1/4 = 3/4 (exponent 3).
        assert!((f.g_univariate(1.0) + 4.0).abs() < 1e-14);
        assert!((f.g_at_x0 + 4.0 * s.powi(3)).abs() < 1e-13);
        let (frame, f) = factor_at_point(&x2_x1sq(), [0.0, 1.0]).unwrap();
        assert!(frame.swapped && !frame.reflected);
        assert_eq!((f.b, f.n, f.g_at_x0), (0.0, 2, 1.0));
        assert!(factor_at_direction(&x2_x1sq(), [0.0, 1.0]).is_err());
        let (frame, f) = factor_at_point(&quartic(), [-s, s]).unwrap();
        assert!(frame.reflected);
        assert_eq!((f.b, f.n), (1.0, 1));
    }

    #[test]
    fn factorization_at_irrational_root() {
        // (x2² - 2 x1) x1 with weights (1/3, 1/6)... use x1² - 2 x2^4 style: f(1,y) = 1 - 2y⁴, b = 2^{-1/4}.
        let f = MixedHomPoly::from_i64(&[(4, 0, 1), (0, 4, -2)], Weights::ratio((1, 4), (1, 4))).unwrap();
        let b = 2f64.powf(-0.25);
        let fact = factor_at_direction(&f, [1.0, b]).unwrap();
        assert_eq!(fact.n, 1);
        assert!((fact.b - b).abs() < 1e-15);
        assert!(factor_residual(&f, &fact, [1.0, b]) < 1e-10);
    }

    #[test]
    fn damping_examples() {
        let f = x2_x1sq();
        let dirs = critical_directions(&f).unwrap();
        let spec = DampingSpec::gradient_power(&f, &dirs[1]).unwrap();
        assert_eq!(damping_factor(&f, &DampingSpec::identity(), [3.0, 1.0]).unwrap(), 1.0);
        assert!(damping_factor(&f, &spec, [0.0, 4.0]).unwrap().abs() < 1e-14);
        assert!((damping_factor(&f, &spec, [2.0, 0.0]).unwrap() - 16.0).abs() < 1e-12);
        assert!(damping_factor(&f, &spec, [0.0, 0.0]).is_err());
        let fast = DampingEval::new(&f, &spec).unwrap();
        for x in [[2.0, 0.0], [0.3, -0.7], [1e-3, 2.0]] {
            let a = damping_factor(&f, &spec, x).unwrap();
            assert!((fast.eval(x) - a).abs() <= 1e-12 * (1.0 + a));
        }
        let q = quartic();
        let bogus = CriticalDirection { theta: [1.0, 0.0], order_n: 2, tilt: 0.0, tilt_var: 0, b_root: Some(0.0) };
        assert!(DampingSpec::gradient_power(&q, &bogus).is_err());
    }
}
