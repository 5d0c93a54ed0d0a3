use num::traits::{One, Zero};
use serde::Serialize;

use crate::bipoly::BiPoly;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

use super::poly::{check_homogeneity, MixedHomPoly, Weights};

/// `δ_r x = (r^{k1} x1, r^{k2} x2)`.
pub fn dilate(x: [f64; 2], r: f64, kappa: &Weights) -> Result<[f64; 2]> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("dilation parameter must be positive, got {r}")));
    }
    let k = kappa.as_f64();
    Ok(dilate_f64(x, r, k))
}

#[inline]
pub(crate) fn dilate_f64(x: [f64; 2], r: f64, k: [f64; 2]) -> [f64; 2] {
    [r.powf(k[0]) * x[0], r.powf(k[1]) * x[1]]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Polar {
    pub r: f64,
    pub theta: [f64; 2],
}

/// Solves `|δ_{1/ρ} x| = 1` for `ρ` by bisection in `ln ρ`.
///
/// Bracket: at `ρ_lo = max_j |x_j|^{1/k_j}` every rescaled coordinate has
/// modulus at most one and one of them equals one, so the norm is at least 1;
/// at `ρ_hi = max_j (√2 |x_j|)^{1/k_j}` both are at most `1/√2`.
pub fn polar_decompose(x: [f64; 2], kappa: &Weights) -> Result<Polar> {
    if x == [0.0, 0.0] {
        return Err(Error::domain("polar decomposition of the origin"));
    }
    if !x[0].is_finite() || !x[1].is_finite() {
        return Err(Error::domain(format!("non-finite point {x:?}")));
    }
    let k = kappa.as_f64();
    let excess = |v: f64| -> f64 {
        let a = x[0].abs() * (-k[0] * v).exp();
        let b = x[1].abs() * (-k[1] * v).exp();
        a.hypot(b) - 1.0
    };
    let log_root = |scale: f64| -> f64 {
        (0..2).filter(|&j| x[j] != 0.0).map(|j| (scale * x[j].abs()).ln() / k[j]).fold(f64::NEG_INFINITY, f64::max)
    };
    let mut lo = log_root(1.0);
    let mut hi = log_root(std::f64::consts::SQRT_2);
    if excess(lo) < -1e-12 || excess(hi) > 1e-12 {
        return Err(Error::Bracket {
            message: "polar radius bracket does not straddle the unit circle".into(),
            lo: lo.exp(),
            hi: hi.exp(),
        });
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = 0.5 * (lo + hi);
    if excess(v).abs() > 1e-12 {
        return Err(Error::Bracket { message: "bisection did not converge".into(), lo: lo.exp(), hi: hi.exp() });
    }
    let r = v.exp();
    Ok(Polar { r, theta: dilate_f64(x, 1.0 / r, k) })
}

/// Newton iteration for the homogeneous radius in `ln ρ`; same value as
/// [`polar_decompose`] but cheap enough for quadrature loops. Returns 0 at the origin.
pub fn homogeneous_radius(x: [f64; 2], k: [f64; 2]) -> f64 {
    let a = [x[0] * x[0], x[1] * x[1]];
    if a[0] == 0.0 && a[1] == 0.0 {
        return 0.0;
    }
    if k[0] == k[1] {
        return (a[0] + a[1]).powf(0.5 / k[0]);
    }
    // F(v) = Σ a_j e^{-2 k_j v} - 1 is decreasing and convex, so Newton from
    // the left of the root converges monotonically.
    let mut v = (0..2).filter(|&j| a[j] != 0.0).map(|j| 0.5 * a[j].ln() / k[j]).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..60 {
        let e0 = a[0] * (-2.0 * k[0] * v).exp();
        let e1 = a[1] * (-2.0 * k[1] * v).exp();
        let f = e0 + e1 - 1.0;
        let df = -2.0 * (k[0] * e0 + k[1] * e1);
        let step = f / df;
        v -= step;
        if step.abs() <= 1e-15 * (1.0 + v.abs()) {
            break;
        }
    }
    v.exp()
}

/// All partials `∂1^i ∂2^j f(x)` with `i + j ≤ order`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Jet {
    pub order: u32,
    /// `partials[i][j] = ∂1^i ∂2^j f(x)` for `i + j ≤ order`.
    pub partials: Vec<Vec<f64>>,
}

impl Jet {
    pub fn value(&self) -> f64 {
        self.partials[0][0]
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.get(1, 0), self.get(0, 1)]
    }

    pub fn hessian(&self) -> [[f64; 2]; 2] {
        [[self.get(2, 0), self.get(1, 1)], [self.get(1, 1), self.get(0, 2)]]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.partials.get(i).and_then(|row| row.get(j)).copied().unwrap_or(f64::NAN)
    }
}

pub fn evaluate_jet(f: &MixedHomPoly, x: [f64; 2], order: u32) -> Result<Jet> {
    if order > 4 {
        return Err(Error::domain(format!("jet order {order} exceeds 4")));
    }
    let mut partials = Vec::new();
    let mut row_base = f.poly().clone();
    for i in 0..=order {
        let mut row = Vec::new();
        let mut p = row_base.clone();
        for _ in 0..=(order - i) {
            row.push(p.eval_f64(x));
            p = p.derivative(1);
        }
        partials.push(row);
        row_base = row_base.derivative(0);
    }
    Ok(Jet { order, partials })
}

/// `∇f(x)·(k1 x1, k2 x2) - d f(x)`.
pub fn euler_residual(f: &MixedHomPoly, x: [f64; 2]) -> f64 {
    let k = f.weights().as_f64();
    let g = f.gradient(x);
    g[0] * k[0] * x[0] + g[1] * k[1] * x[1] - f.degree_f64() * f.eval(x)
}

pub fn euler_residual_exact(f: &MixedHomPoly, x: &[Rational; 2]) -> Rational {
    let w = f.weights();
    let p = f.poly();
    p.derivative(0).eval(x) * w.k1() * &x[0] + p.derivative(1).eval(x) * w.k2() * &x[1] - f.degree() * p.eval(x)
}

fn require_degree_one(f: &MixedHomPoly) -> Result<()> {
    if !f.degree().is_one() {
        return Err(Error::domain(format!(
            "requires a degree-one polynomial, got degree {}",
            rational::format_rational(f.degree())
        )));
    }
    Ok(())
}

/// `D²f(x)(k1 x1, k2 x2) - ((1-k1)∂1 f(x), (1-k2)∂2 f(x))` for degree-one `f`.
pub fn second_derivative_identity_residual(f: &MixedHomPoly, x: [f64; 2]) -> Result<[f64; 2]> {
    require_degree_one(f)?;
    let k = f.weights().as_f64();
    let jet = evaluate_jet(f, x, 2)?;
    let h = jet.hessian();
    let g = jet.gradient();
    let v = [k[0] * x[0], k[1] * x[1]];
    Ok([h[0][0] * v[0] + h[0][1] * v[1] - (1.0 - k[0]) * g[0], h[1][0] * v[0] + h[1][1] * v[1] - (1.0 - k[1]) * g[1]])
}

pub fn second_derivative_identity_residual_exact(f: &MixedHomPoly, x: &[Rational; 2]) -> Result<[Rational; 2]> {
    require_degree_one(f)?;
    let w = f.weights();
    let p = f.poly();
    let v = [w.k1() * &x[0], w.k2() * &x[1]];
    let one = Rational::one();
    let row = |i: u32| -> Rational {
        let (a, b) = if i == 0 { (2, 0) } else { (0, 2) };
        let diag = p.partial(a, b).eval(x);
        let mixed = p.partial(1, 1).eval(x);
        let grad = p.derivative(i as usize).eval(x);
        let (vi, vo) = if i == 0 { (&v[0], &v[1]) } else { (&v[1], &v[0]) };
        diag * vi + mixed * vo - (&one - w.get(i as usize)) * grad
    };
    Ok([row(0), row(1)])
}

/// `∂11 f · ∂22 f - (∂12 f)²`, homogeneous of degree `2d - 2(k1 + k2)`.
pub fn hessian_polynomial(f: &MixedHomPoly) -> Result<MixedHomPoly> {
    let p = f.poly();
    let hess = p.partial(2, 0).mul(&p.partial(0, 2)).sub(&p.partial(1, 1).mul(&p.partial(1, 1)));
    let degree = rational::int(2) * f.degree() - rational::int(2) * f.weights().sum();
    if !hess.is_zero() {
        let monos: Vec<_> = hess.terms().map(|(a, b, c)| (a, b, c.clone())).collect();
        let checked = check_homogeneity(&monos, f.weights())?;
        if checked != degree {
            return Err(Error::domain("Hessian degree mismatch"));
        }
    }
    Ok(MixedHomPoly::from_parts(hess, f.weights().clone(), degree))
}

/// For degree-one `f` and each `j` with `k_j ≠ 1` and `∂_j f(x) ≠ 0`, whether
/// `Hess f(x) ≠ 0` or `∂_jj f(x) ≠ 0` holds. `None` where the premise fails.
pub fn curvature_disjunction(f: &MixedHomPoly, x: &[Rational; 2]) -> Result<[Option<bool>; 2]> {
    require_degree_one(f)?;
    let p = f.poly();
    let hess = hessian_polynomial(f)?.eval_exact(x);
    let mut out = [None, None];
    for (j, slot) in out.iter_mut().enumerate() {
        if f.weights().get(j).is_one() || p.derivative(j).eval(x).is_zero() {
            continue;
        }
        let (a, b) = if j == 0 { (2, 0) } else { (0, 2) };
        *slot = Some(!hess.is_zero() || !p.partial(a, b).eval(x).is_zero());
    }
    Ok(out)
}

/// Compares `(g∘γ)''(x0_1)` along the curve `∂2 g(x1, γ(x1)) = 0` through `x0`
/// with `Hess g / ∂22 g` there. `step` is the finite-difference spacing.
pub fn hessian_curve_check(g: &BiPoly, x0: [f64; 2], step: f64) -> Result<f64> {
    let d2 = g.derivative(1).to_float();
    let d22 = g.partial(0, 2).to_float();
    let scale = g.derivative(1).to_float().magnitude(x0).max(1.0);
    if d2.eval(x0).abs() > 1e-8 * scale {
        return Err(Error::domain(format!("∂2 g(x0) = {} is not zero", d2.eval(x0))));
    }
    if d22.eval(x0) == 0.0 {
        return Err(Error::domain("∂22 g(x0) = 0"));
    }
    if !(step > 0.0) {
        return Err(Error::domain("step must be positive"));
    }
    let solve = |x1: f64| -> Result<f64> {
        let mut y = x0[1];
        for _ in 0..100 {
            let h = d22.eval([x1, y]);
            if h == 0.0 {
                break;
            }
            let dy = d2.eval([x1, y]) / h;
            y -= dy;
            if dy.abs() <= 1e-15 * (1.0 + y.abs()) {
                return Ok(y);
            }
        }
        Err(Error::Numeric {
            message: format!("curve solver diverged at x1 = {x1}"),
            best_re: y,
            best_im: 0.0,
            err_est: f64::NAN,
        })
    };
    let gf = g.to_float();
    let y0 = solve(x0[0])?;
    let ym = solve(x0[0] - step)?;
    let yp = solve(x0[0] + step)?;
    let second =
        (gf.eval([x0[0] - step, ym]) - 2.0 * gf.eval([x0[0], y0]) + gf.eval([x0[0] + step, yp])) / (step * step);
    let at = [x0[0], y0];
    let hess = g.partial(2, 0).eval_f64(at) * g.partial(0, 2).eval_f64(at) - g.partial(1, 1).eval_f64(at).powi(2);
    Ok((second - hess / d22.eval(at)).abs())
}

pub(crate) fn exact_point(x: [f64; 2]) -> Result<[Rational; 2]> {
    Ok([rational::from_f64(x[0])?, rational::from_f64(x[1])?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn dilation_examples() {
        let w = Weights::ratio((1, 4), (1, 2));
        assert_eq!(dilate([1.0, 0.0], 16.0, &w).unwrap(), [2.0, 0.0]);
        assert_eq!(dilate([1.0, 1.0], 1.0, &w).unwrap(), [1.0, 1.0]);
        let h = Weights::ratio((1, 2), (1, 2));
        assert_eq!(dilate([3.0, -2.0], 4.0, &h).unwrap(), [6.0, -4.0]);
        assert!(dilate([1.0, 1.0], 0.0, &h).is_err());
        assert!(dilate([1.0, 1.0], -1.0, &h).is_err());
    }

    #[test]
    fn polar_examples() {
        let h = Weights::ratio((1, 2), (1, 2));
        let p = polar_decompose([2.0, 0.0], &h).unwrap();
        assert!(close(p.r, 4.0, 1e-14) && close(p.theta[0], 1.0, 1e-14));
        let w = Weights::ratio((1, 4), (1, 2));
        let p = polar_decompose([0.0, 8.0], &w).unwrap();
        assert!(close(p.r, 64.0, 1e-13) && close(p.theta[1], 1.0, 1e-14));
        // Equal weights 1/2: r = |x|².
        let p = polar_decompose([1.0, 1.0], &h).unwrap();
        assert!(close(p.r, 2.0, 1e-14));
        assert!(close(p.theta[0], std::f64::consts::FRAC_1_SQRT_2, 1e-14));
        assert!(polar_decompose([0.0, 0.0], &h).is_err());
        // Conic weights: the bracket must still work.
        let c = Weights::ratio((1, 1), (1, 1));
        let p = polar_decompose([3.0, 4.0], &c).unwrap();
        assert!(close(p.r, 5.0, 1e-14));
    }

    #[test]
    fn newton_radius_matches_bisection() {
        let w = Weights::ratio((1, 4), (1, 2));
        for x in [[1.0, 2.0], [-0.3, 1e-4], [1e-6, -3.0], [5.0, 0.0]] {
            let a = polar_decompose(x, &w).unwrap().r;
            let b = homogeneous_radius(x, w.as_f64());
            assert!(close(b, a, 1e-13), "{x:?}: {a} vs {b}");
        }
        assert_eq!(homogeneous_radius([0.0, 0.0], [0.5, 0.5]), 0.0);
    }

    #[test]
    fn jet_examples() {
        let w = Weights::ratio((1, 4), (1, 2));
        let f = MixedHomPoly::from_i64(&[(2, 1, 1)], w).unwrap();
        let j = evaluate_jet(&f, [1.0, 2.0], 2).unwrap();
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.gradient(), [4.0, 1.0]);
        assert_eq!(j.hessian(), [[4.0, 2.0], [2.0, 0.0]]);
        let q = MixedHomPoly::from_i64(&[(4, 0, 1), (0, 4, -1)], Weights::ratio((1, 4), (1, 4))).unwrap();
        let j = evaluate_jet(&q, [1.0, 1.0], 4).unwrap();
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.gradient(), [4.0, -4.0]);
        assert_eq!(j.get(4, 0), 24.0);
        assert!(evaluate_jet(&q, [1.0, 1.0], 5).is_err());
    }

    #[test]
    fn euler_and_second_derivative_identities() {
        let w = Weights::ratio((1, 4), (1, 2));
        let f = MixedHomPoly::from_i64(&[(2, 1, 1)], w.clone()).unwrap();
        assert_eq!(euler_residual(&f, [1.0, 2.0]), 0.0);
        let r = second_derivative_identity_residual_exact(&f, &[int(1), int(1)]).unwrap();
        assert!(r[0].is_zero() && r[1].is_zero());
        // Corrupt the polynomial: identities break.
        let bad = MixedHomPoly::from_parts(BiPoly::from_i64_terms(&[(2, 1, 1), (1, 1, 1)]), w, int(1));
        assert!(!euler_residual_exact(&bad, &[int(1), int(2)]).is_zero());
        let r = second_derivative_identity_residual_exact(&bad, &[rat(1, 3), int(2)]).unwrap();
        assert!(!(r[0].is_zero() && r[1].is_zero()));
        let sq = MixedHomPoly::from_i64(&[(2, 0, 1), (0, 2, 1)], Weights::ratio((1, 2), (1, 2))).unwrap();
        assert_eq!(second_derivative_identity_residual(&sq, [0.7, -1.3]).unwrap(), [0.0, 0.0]);
        let not_one = MixedHomPoly::from_i64(&[(2, 0, 1)], Weights::ratio((1, 2), (1, 2))).unwrap();
        assert!(second_derivative_identity_residual(&not_one.derivative(0), [1.0, 1.0]).is_err());
    }

    #[test]
    fn hessian_examples() {
        let h = Weights::ratio((1, 2), (1, 2));
        let sq = MixedHomPoly::from_i64(&[(2, 0, 1), (0, 2, 1)], h).unwrap();
        assert_eq!(hessian_polynomial(&sq).unwrap().poly(), &BiPoly::from_i64_terms(&[(0, 0, 4)]));
        let f = MixedHomPoly::from_i64(&[(2, 1, 1)], Weights::ratio((1, 4), (1, 2))).unwrap();
        let hf = hessian_polynomial(&f).unwrap();
        assert_eq!(hf.poly(), &BiPoly::from_i64_terms(&[(2, 0, -4)]));
        assert_eq!(hf.degree(), &rat(1, 2));
        let q = MixedHomPoly::from_i64(&[(4, 0, 1), (0, 4, -1)], Weights::ratio((1, 4), (1, 4))).unwrap();
        assert_eq!(hessian_polynomial(&q).unwrap().poly(), &BiPoly::from_i64_terms(&[(2, 2, -144)]));
    }

    #[test]
    fn curve_check_examples() {
        let g = BiPoly::from_i64_terms(&[(2, 0, 1), (0, 2, 1)]);
        assert!(hessian_curve_check(&g, [1.0, 0.0], 1e-3).unwrap() < 1e-8);
        let g = BiPoly::from_i64_terms(&[(1, 1, 1), (0, 2, 1)]);
        assert!(hessian_curve_check(&g, [0.0, 0.0], 1e-3).unwrap() < 1e-8);
        // x1² x2 + x2²: ∂2 g = x1² + 2 x2 vanishes at (1, -1/2).
        let g = BiPoly::from_i64_terms(&[(2, 1, 1), (0, 2, 1)]);
        assert!(hessian_curve_check(&g, [1.0, -0.5], 1e-3).unwrap() < 1e-6);
        assert!(hessian_curve_check(&g, [1.0, 0.0], 1e-3).is_err());
        let flat = BiPoly::from_i64_terms(&[(1, 1, 1)]);
        assert!(hessian_curve_check(&flat, [0.0, 0.0], 1e-3).is_err());
    }

    #[test]
    fn disjunction_holds_on_examples() {
        let f = MixedHomPoly::from_i64(&[(2, 1, 1)], Weights::ratio((1, 4), (1, 2))).unwrap();
        let r = curvature_disjunction(&f, &[int(1), int(1)]).unwrap();
        assert_eq!(r, [Some(true), Some(true)]);
        let r = curvature_disjunction(&f, &[int(0), int(1)]).unwrap();
        assert_eq!(r, [None, None]);
    }
}
