use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Regular isotropic grid in R³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridGeometry {
    pub origin: [f64; 3],
    pub spacing: f64,
    pub dims: [usize; 3],
}

impl GridGeometry {
    pub fn new(origin: [f64; 3], spacing: f64, dims: [usize; 3]) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::domain(format!("grid spacing must be positive, got {spacing}")));
        }
        if dims.contains(&0) {
            return Err(Error::domain(format!("grid dimensions must be positive, got {dims:?}")));
        }
        if !origin.iter().all(|o| o.is_finite()) {
            return Err(Error::domain("grid origin must be finite"));
        }
        Ok(GridGeometry { origin, spacing, dims })
    }

    /// Smallest grid with the given spacing covering `[lo, hi]`.
    pub fn covering(lo: [f64; 3], hi: [f64; 3], spacing: f64) -> Result<Self> {
        let dims = [0, 1, 2].map(|j| ((hi[j] - lo[j]) / spacing).ceil().max(0.0) as usize + 1);
        Self::new(lo, spacing, dims)
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index with `z` fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let k = idx % self.dims[2];
        let j = (idx / self.dims[2]) % self.dims[1];
        let i = idx / (self.dims[1] * self.dims[2]);
        [
            self.origin[0] + i as f64 * self.spacing,
            self.origin[1] + j as f64 * self.spacing,
            self.origin[2] + k as f64 * self.spacing,
        ]
    }

    pub fn upper(&self) -> [f64; 3] {
        [0, 1, 2].map(|j| self.origin[j] + (self.dims[j] - 1) as f64 * self.spacing)
    }

    /// Whether the closed box `[lo, hi]` lies inside the grid box.
    pub fn contains_box(&self, lo: [f64; 3], hi: [f64; 3]) -> bool {
        let up = self.upper();
        let slack = 1e-9 * self.spacing;
        (0..3).all(|j| lo[j] >= self.origin[j] - slack && hi[j] <= up[j] + slack)
    }
}

/// Samples of a function on a [`GridGeometry`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub geometry: GridGeometry,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::domain(format!(
                "grid of dims {:?} needs {} values, got {}",
                geometry.dims,
                geometry.len(),
                values.len()
            )));
        }
        Ok(GridFunction { geometry, values })
    }

    pub fn from_fn<F: Fn([f64; 3]) -> f64 + Sync>(geometry: GridGeometry, f: F) -> Self {
        let values = (0..geometry.len()).into_par_iter().map(|i| f(geometry.point(i))).collect();
        GridFunction { geometry, values }
    }

    pub fn scaled(&self, c: f64) -> Self {
        GridFunction { geometry: self.geometry, values: self.values.iter().map(|v| c * v).collect() }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.geometry.index(i, j, k)]
    }

    /// Trilinear interpolation; `None` outside the grid box.
    #[inline]
    pub fn interpolate(&self, x: [f64; 3]) -> Option<f64> {
        let g = &self.geometry;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for j in 0..3 {
            let u = (x[j] - g.origin[j]) / g.spacing;
            let n = g.dims[j] - 1;
            if !(u >= -1e-9 && u <= n as f64 + 1e-9) {
                return None;
            }
            let u = u.clamp(0.0, n as f64);
            let i = (u.floor() as usize).min(n.saturating_sub(1));
            base[j] = i;
            frac[j] = if n == 0 { 0.0 } else { u - i as f64 };
        }
        let step = [0, 1, 2].map(|j| usize::from(g.dims[j] > 1));
        let mut v = 0.0;
        for c in 0..8 {
            let o = [c & 1, (c >> 1) & 1, (c >> 2) & 1];
            let w: f64 = (0..3).map(|j| if o[j] == 1 { frac[j] } else { 1.0 - frac[j] }).product();
            if w != 0.0 {
                v += w * self.get(base[0] + o[0] * step[0], base[1] + o[1] * step[1], base[2] + o[2] * step[2]);
            }
        }
        Some(v)
    }

    /// Header: dims as three `u64`, spacing, origin as three `f64`; then the
    /// values; all little-endian, values row-major in `x, y, z` order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let g = &self.geometry;
        for d in g.dims {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        w.write_all(&g.spacing.to_le_bytes())?;
        for o in g.origin {
            w.write_all(&o.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut buf).map_err(|e| Error::Parse(format!("grid dump: {e}")))?;
            Ok(buf)
        };
        let mut dims = [0usize; 3];
        for d in &mut dims {
            *d = usize::try_from(u64::from_le_bytes(next(&mut r)?)).map_err(|e| Error::Parse(e.to_string()))?;
        }
        let spacing = f64::from_le_bytes(next(&mut r)?);
        let mut origin = [0.0; 3];
        for o in &mut origin {
            *o = f64::from_le_bytes(next(&mut r)?);
        }
        let geometry = GridGeometry::new(origin, spacing, dims)?;
        let values = (0..geometry.len()).map(|_| next(&mut r).map(f64::from_le_bytes)).collect::<Result<Vec<_>>>()?;
        Ok(GridFunction { geometry, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trilinear_is_exact_on_affine_functions() {
        let g = GridGeometry::new([-1.0, 0.0, 2.0], 0.5, [5, 4, 3]).unwrap();
        let f = GridFunction::from_fn(g, |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2]);
        let x = [0.3, 1.2, 2.7];
        assert!((f.interpolate(x).unwrap() - (1.0 + 0.6 - 1.2 + 1.35)).abs() < 1e-14);
        assert_eq!(f.interpolate(g.upper()), Some(f.values[g.len() - 1]));
        assert_eq!(f.interpolate([1.01, 0.0, 2.0]), None);
    }

    #[test]
    fn binary_round_trip() {
        let g = GridGeometry::new([0.0, 1.0, -2.0], 0.25, [2, 3, 4]).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0] * x[1] - x[2]);
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 * (7 + 24));
        assert_eq!(GridFunction::read_binary(&buf[..]).unwrap(), f);
        assert!(GridFunction::read_binary(&buf[..40]).is_err());
    }
}
