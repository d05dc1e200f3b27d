//! Two-variable Laurent polynomials with big-integer coefficients.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Exponent = (i64, i64);

/// `Σ c_e ω1^{e1} ω2^{e2}` with no zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPoly2 {
    terms: BTreeMap<Exponent, BigInt>,
}

impl LaurentPoly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial((0, 0), BigInt::one())
    }

    pub fn monomial(e: Exponent, c: BigInt) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c.into());
        }
        p
    }

    pub fn add_term(&mut self, e: Exponent, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn coeff(&self, e: Exponent) -> BigInt {
        self.terms.get(&e).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff((0, 0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `max(|e1|, |e2|)` over the support.
    pub fn support_bound(&self) -> i64 {
        self.terms.keys().map(|&(a, b)| a.abs().max(b.abs())).max().unwrap_or(0)
    }

    pub fn coefficient_sum(&self) -> BigInt {
        self.terms.values().sum()
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly2 { terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Value at `θ`, i.e. with `ωj = e^{2πiθj}`.
    pub fn eval_complex(&self, theta: (f64, f64)) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| {
                let phase = TAU * (a as f64 * theta.0 + b as f64 * theta.1);
                Complex64::from_polar(1.0, phase) * c.to_f64().unwrap_or(f64::NAN)
            })
            .sum()
    }

    /// Real part of the value at `θ`; the whole value for self-conjugate polynomials.
    pub fn eval(&self, theta: (f64, f64)) -> f64 {
        self.eval_complex(theta).re
    }

    pub fn is_self_conjugate(&self) -> bool {
        self.terms.iter().all(|(&(a, b), c)| self.coeff((-a, -b)) == *c)
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_default()
    }
}

impl Add for &LaurentPoly2 {
    type Output = LaurentPoly2;

    fn add(self, rhs: &LaurentPoly2) -> LaurentPoly2 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPoly2 {
    type Output = LaurentPoly2;

    fn sub(self, rhs: &LaurentPoly2) -> LaurentPoly2 {
        self + &(-rhs)
    }
}

impl Neg for &LaurentPoly2 {
    type Output = LaurentPoly2;

    fn neg(self) -> LaurentPoly2 {
        LaurentPoly2 { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

impl Mul for &LaurentPoly2 {
    type Output = LaurentPoly2;

    fn mul(self, rhs: &LaurentPoly2) -> LaurentPoly2 {
        let mut acc: BTreeMap<Exponent, BigInt> = BTreeMap::new();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                *acc.entry((a1 + a2, b1 + b2)).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        LaurentPoly2 { terms: acc }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[((i64, i64), i64)]) -> LaurentPoly2 {
        LaurentPoly2::from_terms(terms.iter().copied())
    }

    #[test]
    fn zero_terms_are_dropped() {
        let a = p(&[((1, 0), 2), ((0, 1), -1)]);
        let b = p(&[((1, 0), -2)]);
        let s = &a + &b;
        assert_eq!(s.len(), 1);
        assert_eq!(s.coeff((1, 0)), BigInt::zero());
        assert!((&a - &a).is_empty());
    }

    #[test]
    fn product_and_power() {
        let x = p(&[((1, 0), 1), ((-1, 0), 1)]);
        let x2 = x.pow(2);
        assert_eq!(x2, p(&[((2, 0), 1), ((0, 0), 2), ((-2, 0), 1)]));
        assert_eq!(x.pow(4).constant_term(), BigInt::from(6));
        assert_eq!(x.pow(5).support_bound(), 5);
        assert_eq!(x.pow(0), LaurentPoly2::one());
    }

    #[test]
    fn evaluation_matches_cosines() {
        let q = p(&[((1, 0), 1), ((-1, 0), 1), ((1, -1), 3), ((-1, 1), 3)]);
        assert!(q.is_self_conjugate());
        let th = (0.123, 0.456);
        let want = 2.0 * (TAU * th.0).cos() + 6.0 * (TAU * (th.0 - th.1)).cos();
        assert!((q.eval(th) - want).abs() < 1e-13);
        assert!(q.eval_complex(th).im.abs() < 1e-13);
    }
}
