use serde::{Deserialize, Serialize};

use crate::bipoly::FloatPoly;
use crate::error::{Error, Result};
use crate::homfn::{critical_directions, DampingEval, DampingMode, DampingSpec, MixedHomPoly, PolyJson};

use super::cutoff::CutoffSpec;

/// Surface `x3 = c + f(x)` with the damped, cut-off measure `G_f^α ψ dσ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSpec {
    pub phase: MixedHomPoly,
    pub offset_c: f64,
    pub cutoff: CutoffSpec,
    pub alpha: f64,
    pub damping: DampingSpec,
}

/// JSON form of [`SurfaceSpec`]. The gradient-power base direction is given by
/// its index in [`critical_directions`]; when absent the direction closest in
/// angle to the cutoff center is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceJson {
    pub phase: PolyJson,
    #[serde(default)]
    pub offset_c: f64,
    pub cutoff: CutoffSpec,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub damping: DampingJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingJson {
    pub mode: DampingMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<usize>,
}

impl Default for DampingJson {
    fn default() -> Self {
        DampingJson { mode: DampingMode::Identity, direction: None }
    }
}

impl SurfaceSpec {
    pub fn new(
        phase: MixedHomPoly,
        offset_c: f64,
        cutoff: CutoffSpec,
        alpha: f64,
        damping: DampingSpec,
    ) -> Result<Self> {
        if !num::traits::One::is_one(phase.degree()) {
            return Err(Error::domain("the phase must be homogeneous of degree one"));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("alpha must be a finite nonnegative number, got {alpha}")));
        }
        if !offset_c.is_finite() {
            return Err(Error::domain("offset_c must be finite"));
        }
        cutoff.validate()?;
        DampingEval::new(&phase, &damping)?;
        Ok(SurfaceSpec { phase, offset_c, cutoff, alpha, damping })
    }

    /// Identity damping, `α = 0`, `c = 0`.
    pub fn plain(phase: MixedHomPoly, cutoff: CutoffSpec) -> Result<Self> {
        Self::new(phase, 0.0, cutoff, 0.0, DampingSpec::identity())
    }

    pub fn from_json(json: &SurfaceJson) -> Result<Self> {
        let phase = MixedHomPoly::from_json(&json.phase)?;
        let damping = match json.damping.mode {
            DampingMode::Identity => DampingSpec::identity(),
            DampingMode::PolarRadius => DampingSpec::polar_radius(),
            DampingMode::GradientPower => {
                let dirs: Vec<_> = critical_directions(&phase)?.into_iter().filter(|d| d.order_n >= 2).collect();
                let dir = match json.damping.direction {
                    Some(i) => dirs.get(i).ok_or_else(|| {
                        Error::domain(format!("critical direction index {i} out of range ({} available)", dirs.len()))
                    })?,
                    None => {
                        let c = json.cutoff.center;
                        let target = c[1].atan2(c[0]);
                        dirs.iter()
                            .min_by(|a, b| angle_gap(a.angle(), target).total_cmp(&angle_gap(b.angle(), target)))
                            .ok_or_else(|| {
                                Error::domain("gradient-power damping but no critical direction of order ≥ 2")
                            })?
                    }
                };
                DampingSpec::gradient_power(&phase, dir)?
            }
        };
        Self::new(phase, json.offset_c, json.cutoff.clone(), json.alpha, damping)
    }

    pub fn to_json(&self) -> SurfaceJson {
        let direction = self.damping.base_direction.as_ref().and_then(|b| {
            critical_directions(&self.phase).ok()?.into_iter().filter(|d| d.order_n >= 2).position(|d| d == *b)
        });
        SurfaceJson {
            phase: self.phase.to_json(),
            offset_c: self.offset_c,
            cutoff: self.cutoff.clone(),
            alpha: self.alpha,
            damping: DampingJson { mode: self.damping.mode, direction },
        }
    }

    pub fn weights_f64(&self) -> [f64; 2] {
        self.phase.weights().as_f64()
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Extra factor multiplying the cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    One,
    X1,
    X2,
    /// `c + f(x)`
    Height,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Amplitude {
    /// Multiply by `√(1 + |∇f|²)`.
    pub surface_area: bool,
    pub moment: Moment,
}

impl Amplitude {
    pub const PLAIN: Amplitude = Amplitude { surface_area: false, moment: Moment::One };
    pub const SURFACE: Amplitude = Amplitude { surface_area: true, moment: Moment::One };

    pub fn surface_moment(moment: Moment) -> Self {
        Amplitude { surface_area: true, moment }
    }
}

/// Phase `tf · f(x) + w · x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Phase {
    pub tf: f64,
    pub w: [f64; 2],
}

impl Phase {
    /// The phase of `J(t, s)`: `t (f(x) + s · x)`.
    pub fn of_ts(t: f64, s: [f64; 2]) -> Self {
        Phase { tf: t, w: [t * s[0], t * s[1]] }
    }

    /// The phase of the Fourier transform at `ξ`: `-(ξ3 f(x) + ξ1 x1 + ξ2 x2)`.
    pub fn of_xi(xi: [f64; 3]) -> Self {
        Phase { tf: -xi[2], w: [-xi[0], -xi[1]] }
    }
}

/// Float-compiled integrand data shared by the quadrature paths.
#[derive(Clone, Debug)]
pub(crate) struct Integrand {
    pub f: FloatPoly,
    pub grad: [FloatPoly; 2],
    pub k: [f64; 2],
    pub cutoff: CutoffSpec,
    pub alpha: f64,
    pub damping: DampingEval,
    pub amplitude: Amplitude,
    pub offset_c: f64,
    /// Unit directions where `G` vanishes (only when `α > 0`).
    pub singular: Vec<[f64; 2]>,
}

impl Integrand {
    pub fn new(spec: &SurfaceSpec, amplitude: Amplitude) -> Result<Self> {
        let f = &spec.phase;
        let mut singular = Vec::new();
        if spec.alpha > 0.0 && spec.damping.mode == DampingMode::GradientPower {
            let base = spec.damping.base_direction.as_ref().expect("validated gradient-power spec");
            for d in critical_directions(f)? {
                if d.tilt_var == base.tilt_var && (d.tilt - base.tilt).abs() <= 1e-12 * (1.0 + base.tilt.abs()) {
                    singular.push(d.theta);
                }
            }
        }
        Ok(Integrand {
            f: f.float().clone(),
            grad: [f.derivative(0).float().clone(), f.derivative(1).float().clone()],
            k: f.weights().as_f64(),
            cutoff: spec.cutoff.clone(),
            alpha: spec.alpha,
            damping: DampingEval::new(f, &spec.damping)?,
            amplitude,
            offset_c: spec.offset_c,
            singular,
        })
    }

    /// Cutoff times the amplitude factors, without `G^α`.
    #[inline]
    pub fn base(&self, x: [f64; 2]) -> f64 {
        let c = self.cutoff.eval(x, self.k);
        if c == 0.0 {
            return 0.0;
        }
        let mut a = c;
        if self.amplitude.surface_area {
            let g0 = self.grad[0].eval(x);
            let g1 = self.grad[1].eval(x);
            a *= (1.0 + g0 * g0 + g1 * g1).sqrt();
        }
        match self.amplitude.moment {
            Moment::One => a,
            Moment::X1 => a * x[0],
            Moment::X2 => a * x[1],
            Moment::Height => a * (self.offset_c + self.f.eval(x)),
        }
    }

    /// `G(v)^α` given `r = ρ(v)`.
    #[inline]
    pub fn g_alpha(&self, v: [f64; 2], r: f64) -> f64 {
        if self.alpha == 0.0 || self.damping.mode() == DampingMode::Identity {
            return 1.0;
        }
        self.damping.eval_with_radius(v, r).powf(self.alpha)
    }

    #[inline]
    pub fn phase(&self, p: &Phase, x: [f64; 2]) -> f64 {
        p.tf * self.f.eval(x) + p.w[0] * x[0] + p.w[1] * x[1]
    }

    #[inline]
    pub fn phase_grad(&self, p: &Phase, x: [f64; 2]) -> [f64; 2] {
        [p.tf * self.grad[0].eval(x) + p.w[0], p.tf * self.grad[1].eval(x) + p.w[1]]
    }

    /// Sampled `sup |base|` over the support box (5% margin).
    pub fn sup_base(&self) -> f64 {
        let b = self.cutoff.support_box(self.k);
        let n = 160;
        let mut m: f64 = 0.0;
        for i in 0..=n {
            let x1 = b[0][0] + (b[0][1] - b[0][0]) * i as f64 / n as f64;
            for j in 0..=n {
                let x2 = b[1][0] + (b[1][1] - b[1][0]) * j as f64 / n as f64;
                m = m.max(self.base([x1, x2]).abs());
            }
        }
        m.max(self.cutoff.sup() * 1e-300) * 1.05
    }

    /// Sampled `sup |f|` on the unit sphere of the homogeneous radius (5% margin).
    pub fn f_circle_max(&self) -> f64 {
        use crate::homfn::homogeneous_radius;
        let n = 1440;
        let m = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                let x = [a.cos(), a.sin()];
                self.f.eval(x).abs() / homogeneous_radius(x, self.k)
            })
            .fold(0.0, f64::max);
        m * 1.05
    }

    /// Sampled `sup_{S¹} G^α`.
    pub fn g_alpha_circle_max(&self) -> f64 {
        if self.alpha == 0.0 || self.damping.mode() == DampingMode::Identity {
            return 1.0;
        }
        self.damping.circle_max().powf(self.alpha)
    }

    /// Range of the homogeneous radius over the support, with margins;
    /// the lower end is 0 when the support contains the origin.
    pub fn support_rho_range(&self) -> (f64, f64) {
        use crate::homfn::homogeneous_radius;
        let pts = self.cutoff.boundary_samples(self.k, 1440);
        let rhos = pts.iter().map(|&x| homogeneous_radius(x, self.k));
        let (lo, hi) = rhos.fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
        let lo = if self.cutoff.contains_origin(self.k) { 0.0 } else { lo * 0.97 };
        (lo, hi * 1.03)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homfn::Weights;

    #[test]
    fn json_round_trip_with_auto_direction() {
        let text = r#"{
            "phase": {"weights": ["1/4", "1/2"], "monomials": [[2, 1, "1"]]},
            "cutoff": {"kind": "radial_bump", "center": [0.0, 1.0], "radius": 0.25},
            "alpha": 0.1,
            "damping": {"mode": "gradient_power"}
        }"#;
        let json: SurfaceJson = serde_json::from_str(text).unwrap();
        let spec = SurfaceSpec::from_json(&json).unwrap();
        assert_eq!(spec.damping.base_direction.as_ref().unwrap().theta, [0.0, 1.0]);
        let back = SurfaceSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
        let ig = Integrand::new(&spec, Amplitude::PLAIN).unwrap();
        assert_eq!(ig.singular.len(), 2);
    }

    #[test]
    fn validation() {
        let f = MixedHomPoly::from_i64(&[(2, 0, 1), (0, 2, 1)], Weights::ratio((1, 2), (1, 2))).unwrap();
        let c = CutoffSpec::radial([0.0, 0.0], 0.5);
        assert!(SurfaceSpec::new(f.clone(), 0.0, c.clone(), -0.5, DampingSpec::identity()).is_err());
        assert!(SurfaceSpec::new(f.derivative(0), 0.0, c.clone(), 0.0, DampingSpec::identity()).is_err());
        let spec = SurfaceSpec::plain(f, c).unwrap();
        let ig = Integrand::new(&spec, Amplitude::SURFACE).unwrap();
        assert_eq!(ig.support_rho_range().0, 0.0);
        assert!((ig.base([0.0, 0.0]) - 1.0).abs() < 1e-15);
    }
}
