//! Bivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num::traits::{One, Zero};

use crate::rational::{self, Rational};
use crate::upoly::UPoly;

/// Sparse polynomial in `x1, x2`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(a, b), c)| format!("({})·{}", rational::format_rational(c), monomial_name(a, b)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

pub(crate) fn monomial_name(a: u32, b: u32) -> String {
    match (a, b) {
        (0, 0) => "1".into(),
        (a, 0) => format!("x1^{a}"),
        (0, b) => format!("x2^{b}"),
        (a, b) => format!("x1^{a}·x2^{b}"),
    }
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, u32, Rational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (a, b, c) in terms {
            p.add_term(a, b, c);
        }
        p
    }

    pub fn from_i64_terms(terms: &[(u32, u32, i64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(a, b, c)| (a, b, rational::int(c))))
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((a, b)).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &Rational)> {
        self.terms.iter().map(|(&(a, b), c)| (a, b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, a: u32, b: u32) -> Rational {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|&(a, b)| a + b).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[Rational; 2]) -> Rational {
        let mut acc = Rational::zero();
        for (&(a, b), c) in &self.terms {
            acc += c * pow(&x[0], a) * pow(&x[1], b);
        }
        acc
    }

    pub fn eval_f64(&self, x: [f64; 2]) -> f64 {
        self.terms.iter().map(|(&(a, b), c)| rational::to_f64(c) * x[0].powi(a as i32) * x[1].powi(b as i32)).sum()
    }

    pub fn to_float(&self) -> FloatPoly {
        FloatPoly { terms: self.terms.iter().map(|(&(a, b), c)| (a as i32, b as i32, rational::to_f64(c))).collect() }
    }

    /// Partial derivative in variable `var` (0 for x1, 1 for x2).
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            let e = if var == 0 { a } else { b };
            if e == 0 {
                continue;
            }
            let k = c * rational::int(e as i64);
            if var == 0 {
                out.add_term(a - 1, b, k);
            } else {
                out.add_term(a, b - 1, k);
            }
        }
        out
    }

    /// `∂^i_1 ∂^j_2`
    pub fn partial(&self, i: u32, j: u32) -> Self {
        let mut p = self.clone();
        for _ in 0..i {
            p = p.derivative(0);
        }
        for _ in 0..j {
            p = p.derivative(1);
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(a, b), c) in &other.terms {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(a, b), c)| (a, b, c * k)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            for (&(d, e), k) in &other.terms {
                out.add_term(a + d, b + e, c * k);
            }
        }
        out
    }

    /// `x1 <-> x2`
    pub fn swap(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(a, b), c)| (b, a, c.clone())))
    }

    /// `p(-x1, x2)`
    pub fn reflect_x1(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(a, b), c)| {
            let s = if a % 2 == 1 { -c.clone() } else { c.clone() };
            (a, b, s)
        }))
    }

    /// `y ↦ p(x1, y)` for fixed `x1`.
    pub fn restrict_x1(&self, x1: &Rational) -> UPoly {
        let deg = self.terms.keys().map(|&(_, b)| b).max().unwrap_or(0) as usize;
        let mut c = vec![Rational::zero(); deg + 1];
        for (&(a, b), k) in &self.terms {
            c[b as usize] += k * pow(x1, a);
        }
        UPoly::new(c)
    }

    /// `x ↦ p(x, x2)` for fixed `x2`.
    pub fn restrict_x2(&self, x2: &Rational) -> UPoly {
        self.swap().restrict_x1(x2)
    }

    /// Coefficients of `p(x + u)` as a polynomial in `u`.
    pub fn taylor_shift(&self, x: &[Rational; 2]) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            for i in 0..=a {
                let ca = binomial(a, i) * pow(&x[0], a - i);
                for j in 0..=b {
                    let cb = binomial(b, j) * pow(&x[1], b - j);
                    out.add_term(i, j, c * &ca * cb);
                }
            }
        }
        out
    }

    /// Smallest total degree of a nonzero term of the Taylor expansion at `x`;
    /// `None` for the zero polynomial.
    pub fn order_at(&self, x: &[Rational; 2]) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        self.taylor_shift(x).terms.keys().map(|&(a, b)| a + b).min()
    }
}

pub(crate) fn pow(x: &Rational, e: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

fn binomial(n: u32, k: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc = acc * rational::int((n - i) as i64) / rational::int((i + 1) as i64);
    }
    acc
}

/// Double-precision shadow of a [`BiPoly`] for hot loops.
#[derive(Clone, Debug, Default)]
pub struct FloatPoly {
    terms: Vec<(i32, i32, f64)>,
}

impl FloatPoly {
    #[inline]
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for &(a, b, c) in &self.terms {
            acc += c * x[0].powi(a) * x[1].powi(b);
        }
        acc
    }

    /// Sum of absolute term values, a scale for relative tolerances.
    pub fn magnitude(&self, x: [f64; 2]) -> f64 {
        self.terms.iter().map(|&(a, b, c)| (c * x[0].powi(a) * x[1].powi(b)).abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}
