use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homfn::homogeneous_radius;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    /// `height · φ(|x - center| / radius)`
    RadialBump,
    /// `height · φ(|x1 - c1| / radius) · φ(|x2 - c2| / radius)`
    ProductBump,
    /// `height · ψ(δ_{1/radius}(x - center))`, one piece of the dyadic partition.
    AnnularBump,
}

/// A smooth compactly supported cutoff.
///
/// `plateau = 0` gives the classical profile `e·exp(1/(u²-1))`; `plateau = p > 0`
/// gives a profile equal to 1 on `u ≤ p` that falls to 0 at `u = 1` through
/// [`smooth_step`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub kind: CutoffKind,
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default)]
    pub plateau: f64,
    #[serde(default = "unit")]
    pub height: f64,
}

fn unit() -> f64 {
    1.0
}

/// `h(s) = exp(-1/s)` for `s > 0`, else 0.
#[inline]
fn flat(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// C∞ step: 1 for `v ≤ 0`, 0 for `v ≥ 1`.
#[inline]
pub fn smooth_step(v: f64) -> f64 {
    if v <= 0.0 {
        1.0
    } else if v >= 1.0 {
        0.0
    } else {
        let a = flat(1.0 - v);
        a / (a + flat(v))
    }
}

/// Bump profile on `u = |·| / radius ≥ 0`.
#[inline]
pub fn bump_profile(u: f64, plateau: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    if plateau > 0.0 {
        smooth_step((u - plateau) / (1.0 - plateau))
    } else {
        std::f64::consts::E * (1.0 / (u * u - 1.0)).exp()
    }
}

/// Dyadic partition function as a function of the homogeneous radius:
/// `ψ = χ(log2 ρ) - χ(log2 ρ + 1)`, supported in `1/2 < ρ < 2`.
#[inline]
pub fn partition_piece(rho: f64) -> f64 {
    if !(rho > 0.5 && rho < 2.0) {
        return 0.0;
    }
    let u = rho.log2();
    smooth_step(u) - smooth_step(u + 1.0)
}

/// `Σ_{k ≥ 0} ψ(δ_{2^k} x)`, which equals 1 for `0 < ρ(x) ≤ 1`.
pub fn partition_sum(x: [f64; 2], k: [f64; 2]) -> f64 {
    let rho = homogeneous_radius(x, k);
    if rho == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for j in 0..2000 {
        let r = rho * 2f64.powi(j);
        if r >= 2.0 {
            break;
        }
        sum += partition_piece(r);
    }
    sum
}

/// Largest `|Σ_k ψ(δ_{2^k} x) - 1|` over a log-radial grid in `2^{lo} < |x| < 1`.
pub fn partition_of_unity_error(k: [f64; 2], lo_log2: f64, radial: usize, angular: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..radial {
        let r = 2f64.powf(lo_log2 * (1.0 - (i as f64 + 0.5) / radial as f64));
        for j in 0..angular {
            let a = std::f64::consts::TAU * j as f64 / angular as f64;
            let x = [r * a.cos(), r * a.sin()];
            worst = worst.max((partition_sum(x, k) - 1.0).abs());
        }
    }
    worst
}

impl CutoffSpec {
    pub fn radial(center: [f64; 2], radius: f64) -> Self {
        CutoffSpec { kind: CutoffKind::RadialBump, center, radius, plateau: 0.0, height: 1.0 }
    }

    pub fn product(center: [f64; 2], radius: f64) -> Self {
        CutoffSpec { kind: CutoffKind::ProductBump, ..Self::radial(center, radius) }
    }

    pub fn annular(center: [f64; 2], radius: f64) -> Self {
        CutoffSpec { kind: CutoffKind::AnnularBump, ..Self::radial(center, radius) }
    }

    pub fn with_plateau(mut self, plateau: f64) -> Self {
        self.plateau = plateau;
        self
    }

    pub fn with_height(mut self, height: f64) -> Self {
        self.height = height;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::domain(format!("cutoff radius must be positive, got {}", self.radius)));
        }
        if !(0.0..1.0).contains(&self.plateau) {
            return Err(Error::domain(format!("cutoff plateau must lie in [0, 1), got {}", self.plateau)));
        }
        if !self.height.is_finite() || !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::domain("cutoff parameters must be finite"));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, x: [f64; 2], k: [f64; 2]) -> f64 {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        let v = match self.kind {
            CutoffKind::RadialBump => bump_profile(d[0].hypot(d[1]) / self.radius, self.plateau),
            CutoffKind::ProductBump => {
                let a = bump_profile(d[0].abs() / self.radius, self.plateau);
                if a == 0.0 {
                    return 0.0;
                }
                a * bump_profile(d[1].abs() / self.radius, self.plateau)
            }
            CutoffKind::AnnularBump => partition_piece(homogeneous_radius(d, k) / self.radius),
        };
        self.height * v
    }

    /// `sup |cutoff|`
    pub fn sup(&self) -> f64 {
        self.height.abs()
    }

    /// Half-widths of the support around the center.
    fn half_widths(&self, k: [f64; 2]) -> [f64; 2] {
        match self.kind {
            CutoffKind::RadialBump | CutoffKind::ProductBump => [self.radius, self.radius],
            CutoffKind::AnnularBump => [(2.0 * self.radius).powf(k[0]), (2.0 * self.radius).powf(k[1])],
        }
    }

    /// Closed bounding box `[[x1_lo, x1_hi], [x2_lo, x2_hi]]` of the support.
    pub fn support_box(&self, k: [f64; 2]) -> [[f64; 2]; 2] {
        let h = self.half_widths(k);
        [[self.center[0] - h[0], self.center[0] + h[0]], [self.center[1] - h[1], self.center[1] + h[1]]]
    }

    /// The `x2`-interval of the support over a given `x1`.
    #[inline]
    pub fn chord(&self, x1: f64, k: [f64; 2]) -> Option<(f64, f64)> {
        let d = x1 - self.center[0];
        let h = self.half_widths(k);
        if d.abs() >= h[0] {
            return None;
        }
        let half = match self.kind {
            CutoffKind::ProductBump => h[1],
            CutoffKind::RadialBump => (h[0] * h[0] - d * d).sqrt(),
            CutoffKind::AnnularBump => h[1] * (1.0 - (d / h[0]).powi(2)).sqrt(),
        };
        Some((self.center[1] - half, self.center[1] + half))
    }

    /// Whether the open support contains the origin.
    pub fn contains_origin(&self, k: [f64; 2]) -> bool {
        match self.chord(0.0, k) {
            Some((lo, hi)) => lo < 0.0 && 0.0 < hi,
            None => false,
        }
    }

    /// Points on the boundary of the support region (before the annular hole).
    pub fn boundary_samples(&self, k: [f64; 2], n: usize) -> Vec<[f64; 2]> {
        let h = self.half_widths(k);
        (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                let (c, s) = (a.cos(), a.sin());
                match self.kind {
                    CutoffKind::ProductBump => {
                        let m = c.abs().max(s.abs());
                        [self.center[0] + h[0] * c / m, self.center[1] + h[1] * s / m]
                    }
                    _ => [self.center[0] + h[0] * c, self.center[1] + h[1] * s],
                }
            })
            .collect()
    }
}
