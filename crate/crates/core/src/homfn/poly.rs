use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use num::traits::{One, Signed, Zero};

use crate::bipoly::{monomial_name, BiPoly, FloatPoly};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// The dilation weights `(k1, k2)`, both positive rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    k1: Rational,
    k2: Rational,
}

impl Weights {
    pub fn new(k1: Rational, k2: Rational) -> Result<Self> {
        if !k1.is_positive() || !k2.is_positive() {
            return Err(Error::domain(format!(
                "weights must be positive, got ({}, {})",
                rational::format_rational(&k1),
                rational::format_rational(&k2)
            )));
        }
        Ok(Weights { k1, k2 })
    }

    pub fn parse(k1: &str, k2: &str) -> Result<Self> {
        Self::new(rational::parse_rational(k1)?, rational::parse_rational(k2)?)
    }

    /// Shorthand for tests and examples: `Weights::ratio((1, 4), (1, 2))`.
    pub fn ratio(k1: (i64, i64), k2: (i64, i64)) -> Self {
        Self::new(rational::rat(k1.0, k1.1), rational::rat(k2.0, k2.1)).expect("positive weights")
    }

    pub fn k1(&self) -> &Rational {
        &self.k1
    }

    pub fn k2(&self) -> &Rational {
        &self.k2
    }

    pub fn get(&self, j: usize) -> &Rational {
        if j == 0 {
            &self.k1
        } else {
            &self.k2
        }
    }

    pub fn sum(&self) -> Rational {
        &self.k1 + &self.k2
    }

    pub fn as_f64(&self) -> [f64; 2] {
        [rational::to_f64(&self.k1), rational::to_f64(&self.k2)]
    }

    /// `κ = (1, 1)`: the graph of a degree-one function is a cone.
    pub fn is_conic(&self) -> bool {
        self.k1.is_one() && self.k2.is_one()
    }

    pub fn swapped(&self) -> Self {
        Weights { k1: self.k2.clone(), k2: self.k1.clone() }
    }

    pub fn to_strings(&self) -> [String; 2] {
        [rational::format_rational(&self.k1), rational::format_rational(&self.k2)]
    }

    pub(crate) fn require_non_conic(&self) -> Result<()> {
        if self.is_conic() {
            return Err(Error::Unsupported(
                "conic weights κ = (1,1) are excluded (the results assume κ ≠ (1,1))".into(),
            ));
        }
        Ok(())
    }
}

/// Weighted degree `k1·a + k2·b` of the monomial `x1^a x2^b`.
pub fn weighted_degree(a: u32, b: u32, w: &Weights) -> Rational {
    w.k1() * rational::int(a as i64) + w.k2() * rational::int(b as i64)
}

/// Validates that every monomial has the same weighted degree and returns it.
///
/// The exact check is followed by a numerical spot check of
/// `f(δ_r x) = r^d f(x)` at 20 pseudo-random `(x, r)` pairs.
pub fn check_homogeneity(monomials: &[(u32, u32, Rational)], weights: &Weights) -> Result<Rational> {
    let (a0, b0, _) = monomials.first().ok_or_else(|| Error::domain("monomial list is empty"))?;
    let d0 = weighted_degree(*a0, *b0, weights);
    for &(a, b, _) in &monomials[1..] {
        let d = weighted_degree(a, b, weights);
        if d != d0 {
            return Err(Error::Heterogeneous {
                first: monomial_name(*a0, *b0),
                first_degree: rational::format_rational(&d0),
                second: monomial_name(a, b),
                second_degree: rational::format_rational(&d),
            });
        }
    }
    let poly = BiPoly::from_terms(monomials.iter().cloned()).to_float();
    let k = weights.as_f64();
    let d = rational::to_f64(&d0);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0fd1_1a7e);
    for _ in 0..20 {
        let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let r: f64 = 2f64.powf(rng.gen_range(-3.0..3.0));
        let xr = [r.powf(k[0]) * x[0], r.powf(k[1]) * x[1]];
        let lhs = poly.eval(xr);
        let rhs = r.powf(d) * poly.eval(x);
        let scale = poly.magnitude(xr).max(r.powf(d) * poly.magnitude(x)).max(f64::MIN_POSITIVE);
        if (lhs - rhs).abs() > 1e-10 * scale {
            return Err(Error::Numeric {
                message: format!("dilation check failed at x = {x:?}, r = {r}"),
                best_re: lhs,
                best_im: 0.0,
                err_est: (lhs - rhs).abs(),
            });
        }
    }
    Ok(d0)
}

/// A κ-homogeneous polynomial with exact coefficients.
#[derive(Clone, Debug)]
pub struct MixedHomPoly {
    poly: BiPoly,
    weights: Weights,
    degree: Rational,
    float: FloatPoly,
}

impl PartialEq for MixedHomPoly {
    fn eq(&self, other: &Self) -> bool {
        self.poly == other.poly && self.weights == other.weights && self.degree == other.degree
    }
}

impl MixedHomPoly {
    /// Builds a polynomial from monomials `(a, b, coeff)`, rejecting
    /// duplicate exponent pairs and heterogeneous degrees. Zero coefficients are dropped.
    pub fn new(monomials: Vec<(u32, u32, Rational)>, weights: Weights) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b, _) in &monomials {
            if !seen.insert((a, b)) {
                return Err(Error::Parse(format!("duplicate monomial {}", monomial_name(a, b))));
            }
        }
        let nonzero: Vec<_> = monomials.into_iter().filter(|m| !m.2.is_zero()).collect();
        if nonzero.is_empty() {
            return Err(Error::Degenerate("the zero polynomial is not a valid phase".into()));
        }
        let degree = check_homogeneity(&nonzero, &weights)?;
        Ok(Self::from_parts(BiPoly::from_terms(nonzero), weights, degree))
    }

    pub fn from_i64(terms: &[(u32, u32, i64)], weights: Weights) -> Result<Self> {
        Self::new(terms.iter().map(|&(a, b, c)| (a, b, rational::int(c))).collect(), weights)
    }

    /// Trusted constructor; the caller guarantees homogeneity (zero allowed).
    pub(crate) fn from_parts(poly: BiPoly, weights: Weights, degree: Rational) -> Self {
        let float = poly.to_float();
        MixedHomPoly { poly, weights, degree, float }
    }

    pub fn poly(&self) -> &BiPoly {
        &self.poly
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn degree(&self) -> &Rational {
        &self.degree
    }

    pub fn degree_f64(&self) -> f64 {
        rational::to_f64(&self.degree)
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn float(&self) -> &FloatPoly {
        &self.float
    }

    #[inline]
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.float.eval(x)
    }

    pub fn eval_exact(&self, x: &[Rational; 2]) -> Rational {
        self.poly.eval(x)
    }

    /// `∂_var f`, homogeneous of degree `d - k_var`.
    pub fn derivative(&self, var: usize) -> Self {
        Self::from_parts(self.poly.derivative(var), self.weights.clone(), &self.degree - self.weights.get(var))
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        [self.poly.derivative(0).eval_f64(x), self.poly.derivative(1).eval_f64(x)]
    }

    /// Same function in swapped coordinates, with swapped weights.
    pub fn swap(&self) -> Self {
        Self::from_parts(self.poly.swap(), self.weights.swapped(), self.degree.clone())
    }

    /// `x ↦ f(-x1, x2)`.
    pub fn reflect_x1(&self) -> Self {
        Self::from_parts(self.poly.reflect_x1(), self.weights.clone(), self.degree.clone())
    }

    pub fn sub_linear(&self, c: &Rational, var: usize) -> Result<Self> {
        let lin =
            if var == 0 { BiPoly::from_terms([(1, 0, c.clone())]) } else { BiPoly::from_terms([(0, 1, c.clone())]) };
        if !c.is_zero() && weighted_degree((var == 0) as u32, (var == 1) as u32, &self.weights) != self.degree {
            return Err(Error::domain("linear term is not homogeneous of the polynomial's degree"));
        }
        Ok(Self::from_parts(self.poly.sub(&lin), self.weights.clone(), self.degree.clone()))
    }

    pub fn monomials(&self) -> Vec<(u32, u32, Rational)> {
        self.poly.terms().map(|(a, b, c)| (a, b, c.clone())).collect()
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            weights: self.weights.to_strings().map(Scalar::Text),
            monomials: self.poly.terms().map(|(a, b, c)| (a, b, Scalar::Text(rational::format_rational(c)))).collect(),
            degree: Some(Scalar::Text(rational::format_rational(&self.degree))),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<Self> {
        let weights = Weights::new(json.weights[0].to_rational()?, json.weights[1].to_rational()?)?;
        let monomials =
            json.monomials.iter().map(|(a, b, c)| Ok((*a, *b, c.to_rational()?))).collect::<Result<Vec<_>>>()?;
        let p = Self::new(monomials, weights)?;
        if let Some(d) = &json.degree {
            let d = d.to_rational()?;
            if d != p.degree {
                return Err(Error::domain(format!(
                    "declared degree {} differs from the weighted degree {}",
                    rational::format_rational(&d),
                    rational::format_rational(&p.degree)
                )));
            }
        }
        Ok(p)
    }
}

/// A rational given either as a JSON string (`"1/4"`, `"0.5"`) or a JSON number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Text(String),
    Number(serde_json::Number),
}

impl Scalar {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Scalar::Text(s) => rational::parse_rational(s),
            Scalar::Number(n) => rational::parse_rational(&n.to_string()),
        }
    }
}

/// JSON form: `{"weights":["1/4","1/2"], "monomials":[[2,1,"1"]], "degree":"1"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub weights: [Scalar; 2],
    pub monomials: Vec<(u32, u32, Scalar)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<Scalar>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn homogeneity_examples() {
        let w = Weights::ratio((1, 4), (1, 2));
        assert_eq!(check_homogeneity(&[(2, 1, int(1))], &w).unwrap(), int(1));
        let w = Weights::ratio((1, 2), (1, 3));
        assert_eq!(check_homogeneity(&[(2, 0, int(1)), (0, 3, int(1))], &w).unwrap(), int(1));
        let w = Weights::ratio((1, 2), (1, 2));
        let err = check_homogeneity(&[(1, 0, int(1)), (0, 2, int(1))], &w).unwrap_err();
        match err {
            Error::Heterogeneous { first_degree, second_degree, .. } => {
                assert_eq!(first_degree, "1/2");
                assert_eq!(second_degree, "1");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(check_homogeneity(&[], &w).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"weights":["1/4","1/2"],"monomials":[[2,1,"1"]],"degree":"1"}"#;
        let json: PolyJson = serde_json::from_str(text).unwrap();
        let p = MixedHomPoly::from_json(&json).unwrap();
        assert_eq!(p.degree(), &int(1));
        assert_eq!(serde_json::to_string(&p.to_json()).unwrap(), text);
        let numeric = r#"{"weights":[0.25,"0.5"],"monomials":[[2,1,1.5]]}"#;
        let q = MixedHomPoly::from_json(&serde_json::from_str(numeric).unwrap()).unwrap();
        assert_eq!(q.monomials()[0].2, rat(3, 2));
    }

    #[test]
    fn rejects_bad_inputs() {
        let w = Weights::ratio((1, 4), (1, 2));
        assert!(matches!(MixedHomPoly::from_i64(&[(2, 1, 0)], w.clone()), Err(Error::Degenerate(_))));
        assert!(MixedHomPoly::from_i64(&[(2, 1, 1), (2, 1, 3)], w.clone()).is_err());
        assert!(Weights::new(int(0), int(1)).is_err());
        assert!(Weights::ratio((1, 1), (1, 1)).is_conic());
        let bad_degree = r#"{"weights":["1/4","1/2"],"monomials":[[2,1,"1"]],"degree":"2"}"#;
        assert!(MixedHomPoly::from_json(&serde_json::from_str(bad_degree).unwrap()).is_err());
    }
}
