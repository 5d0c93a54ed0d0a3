use std::collections::BTreeMap;
use std::f64::consts::PI;

use num::complex::Complex64;
use oscdecay_core::homfn::{critical_directions, DampingSpec, MixedHomPoly, Weights};
use oscdecay_core::oscquad::*;
use proptest::prelude::*;

fn paraboloid() -> MixedHomPoly {
    MixedHomPoly::from_i64(&[(2, 0, 1), (0, 2, 1)], Weights::ratio((1, 2), (1, 2))).unwrap()
}

fn cubic() -> MixedHomPoly {
    MixedHomPoly::from_i64(&[(2, 1, 1)], Weights::ratio((1, 4), (1, 2))).unwrap()
}

fn quartic() -> MixedHomPoly {
    MixedHomPoly::from_i64(&[(4, 0, 1), (0, 4, -1)], Weights::ratio((1, 4), (1, 4))).unwrap()
}

/// `∫ b(x) e^{i t x²} dx` for a product-bump factor, by composite Gauss–Legendre.
fn bump_1d(t: f64, r: f64, plateau: f64) -> Complex64 {
    let (x, w) = gauss_legendre(GL_POINTS);
    let n = 2000;
    let h = 2.0 * r / n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..n {
        let mid = -r + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let u = mid + 0.5 * h * xi;
            let b = bump_profile(u.abs() / r, plateau);
            sum += Complex64::from_polar(0.5 * h * wi * b, t * u * u);
        }
    }
    sum
}

fn oracle(spec: &SurfaceSpec, t: f64, s: [f64; 2]) -> OscResult {
    let level = suggested_level(spec, t, s).unwrap();
    quadrature_oracle(spec, t, s, level + 1).unwrap()
}

#[test]
fn zero_frequency_is_the_plain_integral() {
    let spec = SurfaceSpec::plain(cubic(), CutoffSpec::radial([0.3, 0.4], 0.5)).unwrap();
    let j = oscillatory_integral(&spec, 0.0, [0.7, -0.1], 1e-8).unwrap();
    assert!(j.value.re > 0.0);
    assert!(j.value.im.abs() <= 1e-14);
    let o = quadrature_oracle(&spec, 0.0, [0.0, 0.0], 6).unwrap();
    assert!((j.value - o.value).norm() <= 1e-8 * o.value.norm());
}

#[test]
fn paraboloid_leading_term() {
    let spec = SurfaceSpec::plain(paraboloid(), CutoffSpec::radial([0.0, 0.0], 0.5)).unwrap();
    let t = 1024.0;
    let j = oscillatory_integral(&spec, t, [0.0, 0.0], 1e-6).unwrap();
    let ratio = j.value.norm() / (PI / t);
    assert!((ratio - 1.0).abs() <= 0.1, "ratio {ratio}");
}

#[test]
fn separable_oracle_matches_product_of_1d_integrals() {
    let spec = SurfaceSpec::plain(paraboloid(), CutoffSpec::product([0.0, 0.0], 0.6).with_plateau(0.3)).unwrap();
    for t in [0.0, 10.0, 100.0] {
        let o = oracle(&spec, t, [0.0, 0.0]);
        let b = bump_1d(t, 0.6, 0.3);
        let exact = b * b;
        assert!((o.value - exact).norm() <= 1e-6 * exact.norm(), "t={t}: {} vs {exact}", o.value);
    }
}

#[test]
fn oracle_levels_self_converge() {
    let spec = SurfaceSpec::plain(quartic(), CutoffSpec::radial([0.2, 0.1], 0.5)).unwrap();
    for t in [16.0, 256.0, 1024.0] {
        let l = suggested_level(&spec, t, [0.1, 0.2]).unwrap();
        let a = quadrature_oracle(&spec, t, [0.1, 0.2], l).unwrap();
        let b = quadrature_oracle(&spec, t, [0.1, 0.2], l + 1).unwrap();
        assert!((a.value - b.value).norm() <= 1e-3 * b.value.norm(), "t={t}");
        assert!(b.converged);
    }
    assert!(quadrature_oracle(&spec, 1.0, [0.0, 0.0], 0).is_err());
}

#[test]
fn dyadic_matches_oracle_off_center() {
    let spec = SurfaceSpec::plain(quartic(), CutoffSpec::radial([0.0, 0.0], 0.5)).unwrap();
    let (t, s) = (256.0, [0.3, -0.2]);
    let d = oscillatory_integral(&spec, t, s, 1e-6).unwrap();
    let o = oracle(&spec, t, s);
    assert!((d.value - o.value).norm() <= 1e-3 * o.value.norm());
    assert_eq!(d.path, Path::Dyadic);
}

#[test]
fn damped_cubic_near_critical_direction_matches_oracle() {
    let f = cubic();
    let dir = critical_directions(&f).unwrap().into_iter().find(|d| d.theta[1] > 0.5).unwrap();
    let damping = DampingSpec::gradient_power(&f, &dir).unwrap();
    let spec = SurfaceSpec::new(f, 0.0, CutoffSpec::radial([0.1, 0.8], 0.3), 0.5, damping).unwrap();
    for t in [8.0, 64.0] {
        let d = oscillatory_integral(&spec, t, [0.2, 0.0], 1e-6).unwrap();
        let o = oracle(&spec, t, [0.2, 0.0]);
        assert!((d.value - o.value).norm() <= 1e-3 * o.value.norm(), "t={t}");
    }
}

#[test]
fn rescaled_pieces_agree() {
    for (f, s) in [(paraboloid(), [0.0, 0.0]), (cubic(), [0.3, -0.2]), (quartic(), [0.1, 0.1])] {
        let spec = SurfaceSpec::plain(f, CutoffSpec::radial([0.0, 0.0], 0.9)).unwrap();
        for k in [1, 3, 5] {
            let c = rescaling_check(&spec, 200.0, s, k).unwrap();
            assert!(c.relative_difference <= 1e-6, "k={k}: {}", c.relative_difference);
        }
    }
}

#[test]
fn partition_of_unity() {
    for k in [[0.5, 0.5], [0.25, 0.5], [1.0 / 6.0, 1.0 / 3.0]] {
        assert!(partition_of_unity_error(k, -20.0, 64, 32) <= 1e-10);
    }
}

#[test]
fn fourier_transform_at_zero_and_offset_invariance() {
    let spec = SurfaceSpec::plain(paraboloid(), CutoffSpec::radial([0.1, 0.0], 0.5)).unwrap();
    let z = fourier_surface_measure(&spec, [0.0, 0.0, 0.0], 1e-8).unwrap();
    assert!(z.re > 0.0 && z.im.abs() <= 1e-14);
    let mut moved = spec.clone();
    moved.offset_c = 2.7;
    for xi in [[1.0, -2.0, 5.0], [3.0, 0.5, -20.0], [4.0, 1.0, 0.0]] {
        let a = fourier_surface_measure(&spec, xi, 1e-8).unwrap();
        let b = fourier_surface_measure(&moved, xi, 1e-8).unwrap();
        assert!((a.norm() - b.norm()).abs() <= 1e-8 * a.norm().max(1e-12), "{xi:?}");
    }
}

#[test]
fn fourier_transform_of_paraboloid_decays_like_pi_over_lambda() {
    let spec = SurfaceSpec::plain(paraboloid(), CutoffSpec::radial([0.0, 0.0], 0.5)).unwrap();
    let lambda = 1024.0;
    let v = fourier_surface_measure(&spec, [0.0, 0.0, lambda], 1e-6).unwrap();
    let ratio = v.norm() / (PI / lambda);
    assert!((ratio - 1.0).abs() <= 0.1, "ratio {ratio}");
}

#[test]
fn gradient_at_zero_has_vanishing_odd_moments() {
    let spec = SurfaceSpec::plain(paraboloid(), CutoffSpec::radial([0.0, 0.0], 0.5)).unwrap();
    let g = fourier_surface_measure_gradient(&spec, [0.0, 0.0, 0.0], 1e-9).unwrap();
    let third = g[2].norm();
    assert!(third > 0.0);
    assert!(g[0].norm() <= 1e-12 * third && g[1].norm() <= 1e-12 * third);
    // −i ∫ (c + f) a √(1 + |∇f|²) with c = 0 is purely imaginary and negative.
    assert!(g[2].im < 0.0 && g[2].re.abs() <= 1e-14);
}

#[test]
fn gradient_matches_finite_differences() {
    let spec = SurfaceSpec::plain(cubic(), CutoffSpec::radial([0.2, 0.6], 0.3)).unwrap();
    for xi in [[1.0, 2.0, 3.0], [-10.0, 4.0, 30.0], [20.0, -30.0, 0.0]] {
        let g = fourier_surface_measure_gradient(&spec, xi, 1e-10).unwrap();
        let fd = fourier_gradient_finite_difference(&spec, xi, 1e-3, 1e-10).unwrap();
        let norm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= 1e-2 * norm, "{xi:?}: {diff} vs {norm}");
    }
}

#[test]
fn probe_preconditions_and_zero_frequency() {
    let spec = SurfaceSpec::plain(paraboloid(), CutoffSpec::radial([1.0, 0.0], 0.2)).unwrap();
    let opts = ProbeOptions::default();
    let e = nonstationary_decay_probe(&spec, [1.0, 0.0], [-2.0, 0.0], &[1.0], &opts).unwrap_err();
    assert!(e.to_string().contains("separation"), "{e}");
    // The stationary point of f + σ·x sits at distance 0.25 from x0, inside twice the support radius.
    let e = nonstationary_decay_probe(&spec, [1.0, 0.0], [-1.5, 0.0], &[1.0], &opts).unwrap_err();
    assert!(e.to_string().contains("vanishes"), "{e}");
    let pts = nonstationary_decay_probe(&spec, [1.0, 0.0], [0.0, 0.0], &[0.0, 256.0], &opts).unwrap();
    let plain = oscillatory_integral(&spec, 0.0, [0.0, 0.0], 1e-8).unwrap().value.norm();
    assert!((pts[0].abs - plain).abs() <= 1e-8 * plain);
    assert!(pts[1].abs < 1e-2 * plain);
}

#[test]
fn batch_rows() {
    let mut specs = BTreeMap::new();
    specs.insert("p".to_string(), SurfaceSpec::plain(paraboloid(), CutoffSpec::radial([0.0, 0.0], 0.5)).unwrap());
    let input = "{\"spec\":\"p\",\"t\":16,\"s\":[0.1,0]}\n\n{\"spec\":\"p\",\"xi\":[0,0,0]}\n";
    let mut out = Vec::new();
    let rows = run_batch(&specs, input.as_bytes(), &mut out, 1e-8).unwrap();
    assert_eq!(rows, 2);
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], BATCH_COLUMNS.join(","));
    assert!(lines[1].starts_with("16,0.1,0,"));
    assert!(lines[2].ends_with(",dyadic"));
    assert!(run_batch(&specs, "{\"spec\":\"q\",\"t\":1}".as_bytes(), Vec::new(), 1e-8).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn conjugation_symmetry(t in 1.0f64..300.0, s1 in -1.0f64..1.0, s2 in -1.0f64..1.0) {
        let spec = SurfaceSpec::plain(cubic(), CutoffSpec::radial([0.1, 0.2], 0.6)).unwrap();
        let a = oscillatory_integral(&spec, t, [s1, s2], 1e-8).unwrap().value;
        let b = oscillatory_integral(&spec, -t, [s1, s2], 1e-8).unwrap().value;
        prop_assert!((a - b.conj()).norm() <= 1e-10 * a.norm().max(1e-300));
    }

    #[test]
    fn amplitude_height_is_linear(t in 0.0f64..200.0, h in 0.1f64..5.0) {
        let base = SurfaceSpec::plain(quartic(), CutoffSpec::radial([0.0, 0.0], 0.5)).unwrap();
        let scaled = SurfaceSpec::plain(quartic(), CutoffSpec::radial([0.0, 0.0], 0.5).with_height(h)).unwrap();
        let a = oscillatory_integral(&base, t, [0.2, 0.0], 1e-8).unwrap().value;
        let b = oscillatory_integral(&scaled, t, [0.2, 0.0], 1e-8).unwrap().value;
        prop_assert!((a * h - b).norm() <= 1e-10 * b.norm().max(1e-300));
    }
}
