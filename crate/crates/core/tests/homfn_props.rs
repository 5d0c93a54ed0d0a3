use num::traits::Zero;
use oscdecay_core::homfn::*;
use oscdecay_core::rational::{rat, Rational};
use proptest::prelude::*;

fn phases() -> Vec<MixedHomPoly> {
    let p = |t: &[(u32, u32, i64)], k1: (i64, i64), k2: (i64, i64)| {
        MixedHomPoly::from_i64(t, Weights::ratio(k1, k2)).unwrap()
    };
    vec![
        p(&[(2, 1, 1)], (1, 4), (1, 2)),
        p(&[(4, 0, 1), (0, 4, -1)], (1, 4), (1, 4)),
        p(&[(6, 0, 1), (0, 6, 1)], (1, 6), (1, 6)),
        p(&[(2, 0, 1), (0, 2, 1)], (1, 2), (1, 2)),
        p(&[(1, 0, 1), (0, 2, 1)], (1, 1), (1, 2)),
        p(&[(2, 0, 1), (0, 3, 1)], (1, 2), (1, 3)),
        p(&[(2, 1, 1), (0, 4, -1)], (3, 8), (1, 4)),
        p(&[(3, 0, 1), (1, 2, -3)], (1, 3), (1, 3)),
    ]
}

fn rational_point() -> impl Strategy<Value = [Rational; 2]> {
    (-40i64..=40, 1i64..=9, -40i64..=40, 1i64..=9).prop_map(|(a, b, c, d)| [rat(a, b), rat(c, d)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euler_identity_is_exact(x in rational_point()) {
        for f in phases() {
            prop_assert!(euler_residual_exact(&f, &x).is_zero());
            prop_assert!(euler_residual_exact(&f.derivative(0), &x).is_zero());
        }
    }

    #[test]
    fn second_derivative_identity_is_exact(x in rational_point()) {
        for f in phases() {
            let r = second_derivative_identity_residual_exact(&f, &x).unwrap();
            prop_assert!(r[0].is_zero() && r[1].is_zero());
        }
    }

    #[test]
    fn curvature_disjunction_holds(x in rational_point()) {
        for f in phases() {
            for v in curvature_disjunction(&f, &x).unwrap() {
                prop_assert_ne!(v, Some(false));
            }
        }
    }

    #[test]
    fn gradient_power_damping_is_degree_one(
        angle in 0.0f64..std::f64::consts::TAU,
        log_r in -10.0f64..10.0,
    ) {
        let r = 2f64.powf(log_r);
        let x = [angle.cos() * 0.7, angle.sin() * 1.3];
        for f in [&phases()[0], &phases()[4]] {
            for dir in critical_directions(f).unwrap() {
                let spec = DampingSpec::gradient_power(f, &dir).unwrap();
                let g = damping_factor(f, &spec, x).unwrap();
                let gr = damping_factor(f, &spec, dilate(x, r, f.weights()).unwrap()).unwrap();
                prop_assert!((gr - r * g).abs() <= 1e-8 * (r * g).max(1e-300), "{gr} vs {}", r * g);
            }
        }
    }

    #[test]
    fn polar_inverts_dilation(angle in 0.0f64..std::f64::consts::TAU, log_r in -12.0f64..12.0) {
        let theta = [angle.cos(), angle.sin()];
        let r = 2f64.powf(log_r);
        for w in [Weights::ratio((1, 4), (1, 2)), Weights::ratio((1, 6), (1, 6)), Weights::ratio((1, 1), (1, 2))] {
            let p = polar_decompose(dilate(theta, r, &w).unwrap(), &w).unwrap();
            prop_assert!((p.r - r).abs() <= 1e-10 * r);
            prop_assert!((p.theta[0] - theta[0]).abs() <= 1e-10 && (p.theta[1] - theta[1]).abs() <= 1e-10);
            prop_assert!((homogeneous_radius(dilate(theta, r, &w).unwrap(), w.as_f64()) - r).abs() <= 1e-12 * r);
        }
    }

    #[test]
    fn factorization_reconstructs_near_roots(s in 0.5f64..2.0) {
        for f in phases() {
            let q = f.weights().as_f64()[1] / f.weights().as_f64()[0];
            for b in [-1.0f64, 0.0, 1.0] {
                if f.eval([1.0, b]) != 0.0 {
                    continue;
                }
                let x0 = [s, b * s.powf(q)];
                let fact = factor_at_direction(&f, x0).unwrap();
                prop_assert!(fact.n >= 1);
                prop_assert!(factor_residual(&f, &fact, x0) <= 1e-8);
            }
        }
    }

    #[test]
    fn factorization_off_the_zero_set(s in 0.5f64..2.0, y in -2.0f64..2.0) {
        let f = &phases()[1];
        let fact = factor_at_direction(f, [s, y]).unwrap();
        if (y / s).abs() != 1.0 {
            prop_assert_eq!(fact.n, 0);
            prop_assert!((fact.g_at_x0 - f.eval([s, y])).abs() <= 1e-12 * (1.0 + f.eval([s, y]).abs()));
        }
    }
}

#[test]
fn hessian_has_the_predicted_degree() {
    for f in phases() {
        let h = hessian_polynomial(&f).unwrap();
        let expected =
            Rational::from_integer(2.into()) * f.degree() - Rational::from_integer(2.into()) * f.weights().sum();
        assert_eq!(h.degree(), &expected);
        if !h.is_zero() {
            assert_eq!(check_homogeneity(&h.monomials(), f.weights()).unwrap(), expected);
        }
    }
}

#[test]
fn critical_points_have_order_at_least_two() {
    for f in phases() {
        if f.weights().is_conic() {
            continue;
        }
        for d in critical_directions(&f).unwrap() {
            assert!(d.order_n >= 2, "{d:?}");
            let g = d.tilted_gradient(&f, d.theta);
            assert!(g[0].hypot(g[1]) < 1e-12);
            let value = f.eval(d.theta) - d.tilt * d.theta[d.tilt_var];
            assert!(value.abs() < 1e-12);
            assert!((d.theta[0].hypot(d.theta[1]) - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn mutated_polynomial_breaks_euler() {
    let f = &phases()[0];
    let mut monos = f.monomials();
    monos.push((1, 0, rat(1, 1000)));
    assert!(MixedHomPoly::new(monos, f.weights().clone()).is_err());
}
