//! Univariate polynomials over Q: gcd, square-free decomposition and exact
//! real root isolation by Sturm sequences.

use std::fmt;

use num::traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

/// Dense polynomial, coefficients in ascending order, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct UPoly {
    coeffs: Vec<Rational>,
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", rational::format_rational(c))?;
            match i {
                0 => {}
                1 => write!(f, "y")?,
                _ => write!(f, "y^{i}")?,
            }
        }
        Ok(())
    }
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rational::int(c)).collect())
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `y - r`
    pub fn linear_root(r: &Rational) -> Self {
        Self::new(vec![-r.clone(), Rational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn lead(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn sign_at(&self, x: &Rational) -> i32 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational::to_f64).collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + rational::to_f64(c))
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * rational::int(i as i64)).collect())
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Rational::zero();
        Self::new((0..n).map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(Rational::one()), |acc, _| acc.mul(self))
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.lead().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let factor = rem.last().unwrap() / &lead;
            for (j, c) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &factor * c;
            }
            quot[k] = factor;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (Self::new(quot), Self::new(rem))
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            Some(l) => self.scale(&(Rational::one() / l)),
            None => Self::zero(),
        }
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    pub fn square_free_part(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = Self::gcd(self, &self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Yun's algorithm: `self = c * prod s_i^i`, returns the non-constant
    /// `(s_i, i)` with each `s_i` monic and square-free.
    pub fn square_free_decomposition(&self) -> Vec<(UPoly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let d = self.derivative();
        let a0 = Self::gcd(self, &d);
        let mut b = self.div_rem(&a0).0;
        let mut c = d.div_rem(&a0).0;
        let mut dd = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = Self::gcd(&b, &dd);
            let nb = b.div_rem(&a).0;
            c = dd.div_rem(&a).0;
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.monic(), i));
            }
            b = nb;
            dd = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    /// Divides out `(y - r)^times` exactly; `None` if `r` is not a root of that multiplicity.
    pub fn deflate(&self, r: &Rational, times: usize) -> Option<UPoly> {
        let lin = Self::linear_root(r);
        let mut p = self.clone();
        for _ in 0..times {
            let (q, rem) = p.div_rem(&lin);
            if !rem.is_zero() {
                return None;
            }
            p = q;
        }
        Some(p)
    }

    /// Multiplicity of the exact rational root `r` (0 if not a root).
    pub fn multiplicity_at(&self, r: &Rational) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut p = self.clone();
        let mut m = 0;
        while p.eval(r).is_zero() {
            p = p.deflate(r, 1).unwrap();
            m += 1;
        }
        m
    }

    pub fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&-Rational::one()));
        }
        seq
    }

    /// Cauchy bound: every real root lies strictly inside `(-B, B)`.
    pub fn root_bound(&self) -> Rational {
        let lead = self.lead().expect("zero polynomial").abs();
        let m = self
            .coeffs
            .iter()
            .take(self.coeffs.len() - 1)
            .map(|c| c.abs() / &lead)
            .fold(Rational::zero(), |a, b| rational::max(&a, &b));
        m + Rational::one()
    }

    /// Distinct real roots of this polynomial, in increasing order.
    pub fn real_roots(&self) -> Vec<RealRoot> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let q = self.square_free_part();
        let seq = q.sturm_sequence();
        let b = q.root_bound();
        let mut out = Vec::new();
        isolate(&q, &seq, -b.clone(), b, &mut out);
        out.sort_by(|a, b| a.lo.cmp(&b.lo));
        out
    }

    /// Number of distinct real roots in `(lo, hi]`; `lo` must not be a root.
    pub fn count_roots_in(&self, lo: &Rational, hi: &Rational) -> usize {
        let q = self.square_free_part();
        let seq = q.sturm_sequence();
        variations(&seq, lo).saturating_sub(variations(&seq, hi))
    }
}

fn variations(seq: &[UPoly], x: &Rational) -> usize {
    let mut last = 0;
    let mut count = 0;
    for p in seq {
        let s = p.sign_at(x);
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn isolate(q: &UPoly, seq: &[UPoly], lo: Rational, hi: Rational, out: &mut Vec<RealRoot>) {
    let n = variations(seq, &lo).saturating_sub(variations(seq, &hi));
    if n == 0 {
        return;
    }
    if n == 1 {
        let mut root = RealRoot { poly: q.clone(), lo, hi, exact: None };
        if root.poly.sign_at(&root.hi) == 0 {
            root.exact = Some(root.hi.clone());
            root.lo = root.hi.clone();
        }
        out.push(root);
        return;
    }
    // Pick a split point that is not itself a root.
    let width = &hi - &lo;
    let mut mid = None;
    for (num, den) in [(1, 2), (1, 3), (2, 3), (1, 4), (3, 4), (2, 5), (3, 5)] {
        let m = &lo + &width * rational::rat(num, den);
        if q.sign_at(&m) != 0 {
            mid = Some(m);
            break;
        }
    }
    let mid = mid.expect("square-free polynomial has too many roots in a bracket");
    isolate(q, seq, lo, mid.clone(), out);
    isolate(q, seq, mid, hi, out);
}

/// A real algebraic number given by a square-free polynomial and an
/// isolating interval `(lo, hi]` (or an exact rational value).
#[derive(Clone, Debug)]
pub struct RealRoot {
    pub poly: UPoly,
    pub lo: Rational,
    pub hi: Rational,
    pub exact: Option<Rational>,
}

impl RealRoot {
    pub fn from_rational(r: Rational) -> Self {
        RealRoot { poly: UPoly::linear_root(&r), lo: r.clone(), hi: r.clone(), exact: Some(r) }
    }

    pub fn is_rational(&self) -> bool {
        self.exact.is_some()
    }

    /// Bisects until the interval is narrower than `width`.
    pub fn refine(&mut self, width: &Rational) {
        if self.exact.is_some() {
            return;
        }
        let s_hi = self.poly.sign_at(&self.hi);
        let two = rational::int(2);
        while &(&self.hi - &self.lo) > width {
            let mid = (&self.lo + &self.hi) / &two;
            let s = self.poly.sign_at(&mid);
            if s == 0 {
                self.lo = mid.clone();
                self.hi = mid.clone();
                self.exact = Some(mid);
                return;
            }
            if s == s_hi {
                self.hi = mid;
            } else {
                self.lo = mid;
            }
        }
    }

    /// Midpoint approximation accurate to about 1e-30.
    pub fn approx_rational(&self) -> Rational {
        if let Some(e) = &self.exact {
            return e.clone();
        }
        let mut r = self.clone();
        r.refine(&rational::rat(1, 1_000_000_000_000_000).pow(2));
        match r.exact {
            Some(e) => e,
            None => (&r.lo + &r.hi) / rational::int(2),
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.approx_rational())
    }

    /// Whether this number is a root of `p` (exact).
    pub fn is_root_of(&self, p: &UPoly) -> bool {
        if p.is_zero() {
            return true;
        }
        if let Some(e) = &self.exact {
            return p.eval(e).is_zero();
        }
        let g = UPoly::gcd(&self.poly, p);
        if g.degree().unwrap_or(0) == 0 {
            return false;
        }
        g.count_roots_in(&self.lo, &self.hi) > 0
    }

    /// Multiplicity of this number as a root of `p` (exact, `p` nonzero).
    pub fn multiplicity_in(&self, p: &UPoly) -> usize {
        if let Some(e) = &self.exact {
            return p.multiplicity_at(e);
        }
        let mut m = 0;
        let mut d = p.clone();
        while !d.is_zero() && self.is_root_of(&d) {
            m += 1;
            d = d.derivative();
        }
        m
    }
}
