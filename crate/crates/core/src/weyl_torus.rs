//! Exact points of the torus 𝕋² = ℝ²/ℤ², the dihedral Weyl group D12 of G2
//! acting on them, and the fundamental domain of that action.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TorusError {
    #[error("torus point denominator must be nonzero, got {0}")]
    ZeroDenominator(i64),
}

/// A rational point `(num1/den, num2/den)` of 𝕋², identified with
/// `(e^{2πi θ1}, e^{2πi θ2})`.
///
/// The representation is canonical: both coordinates are reduced into
/// `[0, 1)` and `den` is the least common denominator, so derived equality,
/// ordering and hashing are exact equality mod 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TorusPoint {
    num1: i64,
    num2: i64,
    den: i64,
}

impl TorusPoint {
    pub const ORIGIN: TorusPoint = TorusPoint { num1: 0, num2: 0, den: 1 };

    pub fn new(num1: i64, num2: i64, den: i64) -> Result<Self, TorusError> {
        if den == 0 {
            return Err(TorusError::ZeroDenominator(den));
        }
        let (num1, num2, den) = if den < 0 { (-num1, -num2, -den) } else { (num1, num2, den) };
        Ok(Self::from_ratios(Ratio::new(num1, den), Ratio::new(num2, den)))
    }

    pub fn from_ratios(t1: Ratio<i64>, t2: Ratio<i64>) -> Self {
        let r1 = frac(t1);
        let r2 = frac(t2);
        let den = r1.denom().lcm(r2.denom());
        TorusPoint { num1: r1.numer() * (den / r1.denom()), num2: r2.numer() * (den / r2.denom()), den }
    }

    pub fn num1(&self) -> i64 {
        self.num1
    }

    pub fn num2(&self) -> i64 {
        self.num2
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn ratios(&self) -> (Ratio<i64>, Ratio<i64>) {
        (Ratio::new(self.num1, self.den), Ratio::new(self.num2, self.den))
    }

    pub fn theta(&self) -> (f64, f64) {
        let d = self.den as f64;
        (self.num1 as f64 / d, self.num2 as f64 / d)
    }

    pub fn apply(&self, g: &WeylElement) -> TorusPoint {
        let n1 = g.a11 * self.num1 + g.a12 * self.num2;
        let n2 = g.a21 * self.num1 + g.a22 * self.num2;
        TorusPoint::from_ratios(Ratio::new(n1, self.den), Ratio::new(n2, self.den))
    }

    /// Coordinate-wise sum mod 1.
    pub fn shift(&self, other: &TorusPoint) -> TorusPoint {
        let (a1, a2) = self.ratios();
        let (b1, b2) = other.ratios();
        TorusPoint::from_ratios(a1 + b1, a2 + b2)
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.ratios();
        write!(f, "({a}, {b})")
    }
}

fn frac(t: Ratio<i64>) -> Ratio<i64> {
    let r = t - t.floor();
    debug_assert!(r >= Ratio::from_integer(0) && r < Ratio::from_integer(1));
    r
}

/// An integer 2×2 matrix acting on θ-coordinates by `θ ↦ Aθ mod 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WeylElement {
    pub a11: i64,
    pub a12: i64,
    pub a21: i64,
    pub a22: i64,
}

impl WeylElement {
    pub const IDENTITY: WeylElement = WeylElement::new(1, 0, 0, 1);
    /// Reflection generator.
    pub const T2: WeylElement = WeylElement::new(0, -1, -1, 0);
    /// Rotation of order six.
    pub const T6: WeylElement = WeylElement::new(0, 1, -1, 1);

    pub const fn new(a11: i64, a12: i64, a21: i64, a22: i64) -> Self {
        WeylElement { a11, a12, a21, a22 }
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        WeylElement {
            a11: self.a11 * other.a11 + self.a12 * other.a21,
            a12: self.a11 * other.a12 + self.a12 * other.a22,
            a21: self.a21 * other.a11 + self.a22 * other.a21,
            a22: self.a21 * other.a12 + self.a22 * other.a22,
        }
    }

    pub fn pow(&self, e: u32) -> WeylElement {
        (0..e).fold(WeylElement::IDENTITY, |acc, _| acc.compose(self))
    }

    pub fn neg(&self) -> WeylElement {
        WeylElement::new(-self.a11, -self.a12, -self.a21, -self.a22)
    }

    pub fn transpose(&self) -> WeylElement {
        WeylElement::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn det(&self) -> i64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn apply_real(&self, theta: (f64, f64)) -> (f64, f64) {
        (self.a11 as f64 * theta.0 + self.a12 as f64 * theta.1, self.a21 as f64 * theta.0 + self.a22 as f64 * theta.1)
    }
}

fn generate(gens: &[WeylElement]) -> Vec<WeylElement> {
    let mut group = BTreeSet::from([WeylElement::IDENTITY]);
    let mut frontier = vec![WeylElement::IDENTITY];
    while let Some(g) = frontier.pop() {
        for h in gens {
            let p = g.compose(h);
            if group.insert(p) {
                frontier.push(p);
            }
        }
    }
    group.into_iter().collect()
}

/// The twelve elements of D12 = ⟨T2, T6⟩, sorted.
pub fn d12_elements() -> Vec<WeylElement> {
    generate(&[WeylElement::T2, WeylElement::T6])
}

/// The index-two subgroup S3 = ⟨T2, −T6⟩, sorted.
pub fn s3_elements() -> Vec<WeylElement> {
    generate(&[WeylElement::T2, WeylElement::T6.neg()])
}

pub fn orbit(p: &TorusPoint, group: &[WeylElement]) -> BTreeSet<TorusPoint> {
    group.iter().map(|g| p.apply(g)).collect()
}

/// Whether boundary points of the fundamental domain count as inside.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closure {
    Closed,
    Interior,
}

/// Membership in the fundamental domain F, the triangle with vertices
/// `(0,1)`, `(1/3,2/3)`, `(1/2,1)`.
///
/// F is cut out by `θ1 + θ2 ≥ 1`, `2θ1 ≤ θ2`, `θ2 ≤ 1`, with the
/// representative `θ1 ∈ [0,1)`, `θ2 ∈ (0,1]`; the origin is the corner `(0,1)`.
pub fn in_fundamental_domain(p: &TorusPoint, closure: Closure) -> bool {
    let d = p.den;
    let a = p.num1;
    let b = if p.num2 == 0 { d } else { p.num2 };
    match closure {
        Closure::Closed => a + b >= d && 2 * a <= b,
        Closure::Interior => a + b > d && 2 * a < b && b < d,
    }
}

/// The orbit representatives of `p` that lie in the closed domain F.
pub fn fundamental_representatives(p: &TorusPoint) -> Vec<TorusPoint> {
    orbit(p, &d12_elements()).into_iter().filter(|q| in_fundamental_domain(q, Closure::Closed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: i64, b: i64, d: i64) -> TorusPoint {
        TorusPoint::new(a, b, d).unwrap()
    }

    #[test]
    fn normalization_is_canonical() {
        assert_eq!(pt(2, 4, 6), pt(1, 2, 3));
        assert_eq!(pt(-1, 7, 3), pt(2, 1, 3));
        assert_eq!(pt(1, 0, -2), pt(1, 0, 2));
        let p = pt(3, 2, 12);
        assert_eq!((p.num1(), p.num2(), p.den()), (3, 2, 12));
        assert!(TorusPoint::new(1, 1, 0).is_err());
    }

    #[test]
    fn group_orders_and_generators() {
        let d12 = d12_elements();
        assert_eq!(d12.len(), 12);
        assert!(d12.contains(&WeylElement::IDENTITY));
        assert!(d12.contains(&WeylElement::T2));
        assert!(d12.contains(&WeylElement::T6));
        assert_eq!(WeylElement::T6.pow(6), WeylElement::IDENTITY);
        assert_eq!(WeylElement::T6.neg().pow(3), WeylElement::IDENTITY);
        for g in &d12 {
            assert!(g.det().abs() == 1);
            for h in &d12 {
                assert!(d12.contains(&g.compose(h)));
            }
        }
        let s3 = s3_elements();
        assert_eq!(s3.len(), 6);
        assert!(s3.iter().all(|g| d12.contains(g)));
    }

    #[test]
    fn orbit_sizes() {
        let d12 = d12_elements();
        assert_eq!(orbit(&TorusPoint::ORIGIN, &d12).len(), 1);
        assert_eq!(orbit(&pt(1, 2, 3), &d12).len(), 2);
        assert_eq!(orbit(&pt(4, 20, 21), &d12).len(), 12);
        assert_eq!(orbit(&pt(1, 2, 3), &s3_elements()).len(), 1);
    }

    #[test]
    fn fundamental_domain_membership() {
        assert!(in_fundamental_domain(&pt(4, 20, 21), Closure::Closed));
        assert!(in_fundamental_domain(&pt(4, 20, 21), Closure::Interior));
        assert!(in_fundamental_domain(&TorusPoint::ORIGIN, Closure::Closed));
        assert!(!in_fundamental_domain(&TorusPoint::ORIGIN, Closure::Interior));
        assert!(in_fundamental_domain(&pt(1, 2, 3), Closure::Closed));
        assert!(!in_fundamental_domain(&pt(1, 1, 4), Closure::Closed));
    }

    #[test]
    fn generic_points_have_one_representative() {
        let d12 = d12_elements();
        for den in [7_i64, 11, 13, 29] {
            for a in 0..den {
                for b in 0..den {
                    let p = pt(a, b, den);
                    let reps = fundamental_representatives(&p);
                    assert!(!reps.is_empty(), "{p} has no representative");
                    if orbit(&p, &d12).len() == 12 {
                        assert_eq!(reps.len(), 1, "{p}");
                        assert!(in_fundamental_domain(&reps[0], Closure::Interior));
                    }
                }
            }
        }
    }
}
