use oscdecay_core::homfn::{height, MixedHomPoly, Weights};
use oscdecay_core::maxop::*;
use oscdecay_core::oscquad::{CutoffSpec, SurfaceSpec};
use proptest::prelude::*;

fn cubic() -> MixedHomPoly {
    MixedHomPoly::from_i64(&[(2, 1, 1)], Weights::ratio((1, 4), (1, 2))).unwrap()
}

fn paraboloid_surface() -> SurfaceSpec {
    let f = MixedHomPoly::from_i64(&[(2, 0, 1), (0, 2, 1)], Weights::ratio((1, 2), (1, 2))).unwrap();
    SurfaceSpec::plain(f, CutoffSpec::radial([0.0, 0.0], 0.5)).unwrap()
}

/// Offset 1 and a cutoff equal to 1 on the unit square.
fn sharp_surface(f: MixedHomPoly) -> SurfaceSpec {
    let mut spec = SurfaceSpec::plain(f, CutoffSpec::product([0.0, 0.0], 1.25).with_plateau(0.8)).unwrap();
    spec.offset_c = 1.0;
    spec
}

fn out_grid() -> GridGeometry {
    GridGeometry::new([-0.5, -0.5, -0.5], 0.25, [5, 5, 5]).unwrap()
}

fn input_grid() -> GridGeometry {
    GridGeometry::covering([-3.0, -3.0, -3.0], [3.0, 3.0, 3.0], 0.125).unwrap()
}

fn wavy(x: [f64; 3]) -> f64 {
    (1.3 * x[0]).sin() + (0.7 * x[1] - 0.2 * x[2]).cos() * x[2]
}

#[test]
fn constant_function_averages_to_the_mass() {
    let quad = SurfaceQuadrature::new(&paraboloid_surface(), 8).unwrap();
    let g = GridFunction::from_fn(input_grid(), |_| 1.0);
    for t in [0.5, 1.0, 2.0] {
        let a = average_operator(&g, t, &quad, &out_grid()).unwrap();
        assert!(a.values.iter().all(|v| (v - quad.mass()).abs() <= 1e-12 * quad.mass()));
    }
    // ∫ψ dσ for the radial bump is positive and below the area of the disc times √2.
    assert!(quad.mass() > 0.0 && quad.mass() < std::f64::consts::PI * 0.25 * 2f64.sqrt());
}

#[test]
fn surface_avoids_the_upper_half_space() {
    // x - t(y, f(y)) has third coordinate -t f(y) ≤ 0 at x = 0.
    let quad = SurfaceQuadrature::new(&paraboloid_surface(), 8).unwrap();
    let g = GridFunction::from_fn(input_grid(), |x| if x[2] > 0.0 { 1.0 } else { 0.0 });
    assert_eq!(quad.average_at(&g, 1.0, [0.0, 0.0, 0.0]).unwrap(), 0.0);
    assert!(quad.average_at(&g, 1.0, [0.0, 0.0, 0.5]).unwrap() > 0.0);
}

#[test]
fn coverage_errors_name_the_scale() {
    let quad = SurfaceQuadrature::new(&paraboloid_surface(), 4).unwrap();
    let g = GridFunction::from_fn(GridGeometry::covering([-1.0; 3], [1.0; 3], 0.25).unwrap(), |_| 1.0);
    let e = average_operator(&g, 8.0, &quad, &out_grid()).unwrap_err();
    assert!(e.to_string().contains('8'), "{e}");
    assert!(maximal_function(&g, &[], &quad, &out_grid()).is_err());
    assert!(quad.average_at(&g, 0.0, [0.0; 3]).is_err());
}

#[test]
fn maximal_function_examples() {
    let quad = SurfaceQuadrature::new(&paraboloid_surface(), 6).unwrap();
    let g = GridFunction::from_fn(input_grid(), wavy);
    let out = out_grid();
    let scales = quarter_octave_scales(0.5, 2.0);
    assert_eq!(scales.len(), 9);
    let m = maximal_function(&g, &scales, &quad, &out).unwrap();
    let single = maximal_function(&g, &[1.0], &quad, &out).unwrap();
    let a1 = average_operator(&g, 1.0, &quad, &out).unwrap();
    for i in 0..out.len() {
        assert_eq!(single.values[i], a1.values[i].abs());
        assert!(m.values[i] >= single.values[i]);
    }
    for &t in &scales {
        let a = average_operator(&g, t, &quad, &out).unwrap();
        assert!(m.values.iter().zip(&a.values).all(|(mi, ai)| *mi >= ai.abs()));
    }
    let pos = GridFunction::from_fn(input_grid(), |x| wavy(x).abs());
    let mp = maximal_function(&pos, &scales, &quad, &out).unwrap();
    assert!(mp.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn dilation_witness_examples() {
    let spec = sharp_surface(cubic());
    let w = lower_bound_witness(&spec, 0.5, 16.0, WitnessVariant::Dilation).unwrap();
    assert!((w - 0.125).abs() <= 1e-15);
    assert_eq!(lower_bound_witness(&spec, 0.3, 1.0, WitnessVariant::Dilation).unwrap(), 4.0 * 0.09);
    assert!(lower_bound_witness(&spec, 0.5, 0.5, WitnessVariant::Dilation).is_err());
}

#[test]
fn order_tube_area_scales_with_the_order() {
    let spec = sharp_surface(cubic());
    let tube = OrderTube::new(&spec, 0.125).unwrap();
    assert_eq!(tube.n, 2);
    for y in [2f64.powi(16), 2f64.powi(24)] {
        let ratio = tube.area(y) / tube.area(16.0 * y);
        assert!((ratio - 4.0).abs() <= 0.2, "y={y}: {ratio}");
    }
    let c = tube.constant();
    for j in 0..=40 {
        let y = 2f64.powi(j);
        assert!(tube.area(y) >= c * y.powf(-0.5) * (1.0 - 1e-12));
    }
}

#[test]
fn sharpness_preconditions() {
    let n = [64, 128, 256, 512];
    let opts = SharpnessOptions { cross_points: 0, ..Default::default() };
    let spec = sharp_surface(cubic());
    assert!(sharpness_experiment(&spec, 0.0, &n, &opts).is_err());
    assert!(sharpness_experiment(&spec, 2.0, &n[..3], &opts).is_err());
    assert!(sharpness_experiment(&spec, 2.0, &[64, 64, 128, 256], &opts).is_err());
    let mut off = spec.clone();
    off.offset_c = 0.0;
    assert!(sharpness_experiment(&off, 2.0, &n, &opts).is_err());
    let small = SurfaceSpec { cutoff: CutoffSpec::radial([0.0, 0.0], 0.5), ..spec };
    assert!(sharpness_experiment(&small, 2.0, &n, &opts).is_err());
}

#[test]
fn boundary_exponent_grows_logarithmically() {
    let spec = sharp_surface(cubic());
    let opts = SharpnessOptions { variant: Some(WitnessVariant::Dilation), cross_points: 0, ..Default::default() };
    let n = [64, 128, 256, 512, 1024];
    let r = sharpness_experiment(&spec, 4.0 / 3.0, &n, &opts).unwrap();
    assert_eq!(r.verdict, Verdict::Diverges);
    for q in &r.increment_ratios {
        assert!((q - 1.0).abs() <= 1e-9, "{q}");
    }
    // Equal increments per doubling of N: the norm is affine in log N.
    let slope = (r.norms[4] - r.norms[0]) / (1024f64 / 64.0).ln();
    assert!((r.norms[2] - r.norms[0] - slope * 4f64.ln()).abs() <= 1e-9 * r.norms[4]);
}

#[test]
fn csv_rows() {
    let spec = sharp_surface(cubic());
    let opts = SharpnessOptions { cross_points: 0, ..Default::default() };
    let r = sharpness_experiment(&spec, 2.5, &[64, 128, 256, 512], &opts).unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "N,norm,growth_ratio,increment_ratio");
    assert!(lines[1].starts_with("64,"));
}

fn dichotomy_phases() -> Vec<MixedHomPoly> {
    let p = |t: &[(u32, u32, i64)], k1: (i64, i64), k2: (i64, i64)| {
        MixedHomPoly::from_i64(t, Weights::ratio(k1, k2)).unwrap()
    };
    vec![
        cubic(),
        p(&[(2, 0, 1), (0, 2, 1)], (1, 2), (1, 2)),
        p(&[(6, 0, 1), (0, 6, 1)], (1, 6), (1, 6)),
        p(&[(4, 0, 1), (0, 4, -1)], (1, 4), (1, 4)),
        p(&[(2, 0, 1), (0, 3, 1)], (1, 2), (1, 3)),
    ]
}

#[test]
fn dichotomy_follows_the_height() {
    let n = [64, 128, 256, 512, 1024];
    let opts = SharpnessOptions { cross_points: 0, ..Default::default() };
    for f in dichotomy_phases() {
        let h = height(&f).unwrap().value_f64;
        let spec = sharp_surface(f);
        for (p, want) in [
            (0.9 * h, Verdict::Diverges),
            (h * (1.0 - 1.0 / 1024f64.ln()), Verdict::Diverges),
            (1.25 * h, Verdict::Bounded),
        ] {
            let r = sharpness_experiment(&spec, p, &n, &opts).unwrap();
            assert_eq!(r.verdict, want, "h={h} p={p}: {:?}", r.increment_ratios);
            assert_eq!(r.growth_ratios.len(), n.len() - 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dilation_witness_power_law(y in 1.0f64..1e6, eps in 0.01f64..1.0) {
        let spec = sharp_surface(cubic());
        let a = lower_bound_witness(&spec, eps, y, WitnessVariant::Dilation).unwrap();
        let b = lower_bound_witness(&spec, eps, 2.0 * y, WitnessVariant::Dilation).unwrap();
        prop_assert!((b / a - 2f64.powf(-0.75)).abs() <= 1e-14);
    }

    #[test]
    fn averages_are_linear(c in -5.0f64..5.0, t in 0.5f64..2.0) {
        let quad = SurfaceQuadrature::new(&paraboloid_surface(), 4).unwrap();
        let g = GridFunction::from_fn(input_grid(), wavy);
        let a = average_operator(&g, t, &quad, &out_grid()).unwrap();
        let b = average_operator(&g.scaled(c), t, &quad, &out_grid()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((c * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn maximal_function_is_monotone_in_the_scale_set(extra in proptest::collection::vec(0.5f64..2.0, 1..4)) {
        let quad = SurfaceQuadrature::new(&paraboloid_surface(), 4).unwrap();
        let g = GridFunction::from_fn(input_grid(), wavy);
        let base = [0.75, 1.25];
        let mut bigger = base.to_vec();
        bigger.extend(extra);
        let m = maximal_function(&g, &base, &quad, &out_grid()).unwrap();
        let mb = maximal_function(&g, &bigger, &quad, &out_grid()).unwrap();
        prop_assert!(m.values.iter().zip(&mb.values).all(|(a, b)| a <= b));
    }
}
