//! Characters of the irreducible representations of G2.
//!
//! Weights are written in the exponent coordinates of the maximal torus, in
//! which the highest weight of the irreducible with partition labels
//! `(μ1, μ2)` is the exponent `(μ1, μ2)` and the Weyl vector is `(2, 1)`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_linalg;
use crate::laurent::LaurentPoly2;
use crate::weyl_torus::{d12_elements, WeylElement};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharacterError {
    #[error("({mu1}, {mu2}) is not a dominant weight: need mu1 >= mu2 >= 0")]
    NotDominant { mu1: i64, mu2: i64 },
    #[error("character limit at ({0}, {1}) did not converge")]
    SingularPoint(f64, f64),
    #[error("unknown fundamental representation {0:?}; expected 1 or 2")]
    UnknownFundamental(String),
}

/// The two fundamental representations: ρ1 of dimension 7 and the adjoint ρ2
/// of dimension 14.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Fundamental {
    Rho1,
    Rho2,
}

impl Fundamental {
    pub const ALL: [Fundamental; 2] = [Fundamental::Rho1, Fundamental::Rho2];

    pub fn index(self) -> u8 {
        match self {
            Fundamental::Rho1 => 1,
            Fundamental::Rho2 => 2,
        }
    }

    pub fn weight(self) -> DominantWeight {
        match self {
            Fundamental::Rho1 => DominantWeight { mu1: 1, mu2: 0 },
            Fundamental::Rho2 => DominantWeight { mu1: 1, mu2: 1 },
        }
    }
}

impl FromStr for Fundamental {
    type Err = CharacterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1" | "rho1" => Ok(Fundamental::Rho1),
            "2" | "rho2" => Ok(Fundamental::Rho2),
            other => Err(CharacterError::UnknownFundamental(other.to_string())),
        }
    }
}

/// Highest weight in partition labels, `mu1 >= mu2 >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DominantWeight {
    mu1: u32,
    mu2: u32,
}

impl DominantWeight {
    pub const ZERO: DominantWeight = DominantWeight { mu1: 0, mu2: 0 };

    pub fn new(mu1: i64, mu2: i64) -> Result<Self, CharacterError> {
        if mu2 < 0 || mu1 < mu2 || mu1 > u32::MAX as i64 {
            return Err(CharacterError::NotDominant { mu1, mu2 });
        }
        Ok(DominantWeight { mu1: mu1 as u32, mu2: mu2 as u32 })
    }

    pub fn from_dynkin(l1: u32, l2: u32) -> Self {
        DominantWeight { mu1: l1 + l2, mu2: l2 }
    }

    pub fn mu1(&self) -> u32 {
        self.mu1
    }

    pub fn mu2(&self) -> u32 {
        self.mu2
    }

    pub fn dynkin(&self) -> (u32, u32) {
        (self.mu1 - self.mu2, self.mu2)
    }

    /// Weyl dimension formula.
    pub fn dimension(&self) -> u64 {
        let (a, b) = self.dynkin();
        let (a, b) = (a as u64, b as u64);
        (a + 1) * (b + 1) * (a + b + 2) * (a + 2 * b + 3) * (a + 3 * b + 4) * (2 * a + 3 * b + 5) / 120
    }
}

impl fmt::Display for DominantWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.mu1, self.mu2)
    }
}

pub const WEYL_VECTOR: (i64, i64) = (2, 1);

const RHO1_WEIGHTS: [(i64, i64); 7] = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (-1, 1), (1, -1)];
const RHO2_EXTRA: [(i64, i64); 7] = [(1, 1), (-1, -1), (2, -1), (-2, 1), (1, -2), (-1, 2), (0, 0)];

/// The restriction of `χ1` or `χ2` to the torus.
pub fn chi_fund_laurent(f: Fundamental) -> LaurentPoly2 {
    let sigma1 = LaurentPoly2::from_terms(RHO1_WEIGHTS.iter().map(|&e| (e, 1)));
    match f {
        Fundamental::Rho1 => sigma1,
        Fundamental::Rho2 => &sigma1 + &LaurentPoly2::from_terms(RHO2_EXTRA.iter().map(|&e| (e, 1))),
    }
}

/// `x = χ1(θ)` or `y = χ2(θ)` in closed cosine form.
pub fn chi_fund_eval(f: Fundamental, theta: (f64, f64)) -> f64 {
    let c = |a: f64, b: f64| 2.0 * (TAU * (a * theta.0 + b * theta.1)).cos();
    let x = 1.0 + c(1.0, 0.0) + c(0.0, 1.0) + c(1.0, -1.0);
    match f {
        Fundamental::Rho1 => x,
        Fundamental::Rho2 => x + 1.0 + c(1.0, 1.0) + c(2.0, -1.0) + c(1.0, -2.0),
    }
}

/// The twelve Weyl images of an exponent, with their signs.
fn weyl_images(v: (i64, i64)) -> Vec<((i64, i64), i64)> {
    d12_elements()
        .iter()
        .map(|g| {
            let t = g.transpose();
            ((t.a11 * v.0 + t.a12 * v.1, t.a21 * v.0 + t.a22 * v.1), g.det())
        })
        .collect()
}

/// Alternating sum `Σ_w det(w) e^{2πi (w v)·θ}`; it is real because `−1 ∈ W`.
pub fn alternant(v: (i64, i64), theta: (f64, f64)) -> f64 {
    weyl_images(v)
        .into_iter()
        .map(|((a, b), s)| s as f64 * (TAU * (a as f64 * theta.0 + b as f64 * theta.1)).cos())
        .sum()
}

/// The alternant as an exact Laurent polynomial.
pub fn alternant_laurent(v: (i64, i64)) -> LaurentPoly2 {
    LaurentPoly2::from_terms(weyl_images(v))
}

/// `n`-th derivative of `h ↦ alternant(v, θ + h d)` at `h = 0`.
fn alternant_derivative(v: (i64, i64), theta: (f64, f64), d: (f64, f64), n: u32) -> f64 {
    weyl_images(v)
        .into_iter()
        .map(|((a, b), s)| {
            let (a, b) = (a as f64, b as f64);
            let phase = TAU * (a * theta.0 + b * theta.1);
            let rate = TAU * (a * d.0 + b * d.1);
            s as f64 * rate.powi(n as i32) * (phase + n as f64 * PI / 2.0).cos()
        })
        .sum()
}

/// Below this size the Weyl denominator is treated as vanishing.
const SINGULAR_DENOMINATOR: f64 = 1e-8;
const LIMIT_DIRECTIONS: [(f64, f64); 2] = [(0.618_033_988_749_895, 1.0), (1.0, 0.324_717_957_244_746)];

/// `χ_w(θ)` from the Weyl character formula.
///
/// Where the denominator vanishes the value is the limit along a generic
/// direction, taken exactly by matching the first non-vanishing derivative
/// of numerator and denominator. Finite offsets cannot be used at the
/// identity, where the denominator vanishes to sixth order and double
/// precision retains no digits of the quotient.
pub fn chi_general(w: DominantWeight, theta: (f64, f64)) -> Result<f64, CharacterError> {
    let top = (w.mu1 as i64 + WEYL_VECTOR.0, w.mu2 as i64 + WEYL_VECTOR.1);
    let den = alternant(WEYL_VECTOR, theta);
    if den.abs() > SINGULAR_DENOMINATOR {
        return Ok(alternant(top, theta) / den);
    }
    let limits: Vec<f64> = LIMIT_DIRECTIONS
        .iter()
        .map(|&d| {
            (0..=6u32)
                .find_map(|n| {
                    let dd = alternant_derivative(WEYL_VECTOR, theta, d, n);
                    let scale = 12.0 * (TAU * 6.0).powi(n as i32);
                    (dd.abs() > 1e-9 * scale).then(|| alternant_derivative(top, theta, d, n) / dd)
                })
                .unwrap_or(f64::NAN)
        })
        .collect();
    let (a, b) = (limits[0], limits[1]);
    if a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-8 * a.abs().max(1.0) {
        Ok(0.5 * (a + b))
    } else {
        Err(CharacterError::SingularPoint(theta.0, theta.1))
    }
}

/// Decomposition of `χ_f · χ_w` into irreducibles, as a sorted multiset of
/// `(weight, multiplicity)`.
pub fn fuse_with_fundamental(f: Fundamental, w: DominantWeight) -> Vec<(DominantWeight, u32)> {
    let (m1, m2) = (w.mu1 as i64, w.mu2 as i64);
    let mut acc: BTreeMap<DominantWeight, u32> = BTreeMap::new();
    let mut push = |a: i64, b: i64, mult: u32| {
        if let Ok(d) = DominantWeight::new(a, b) {
            *acc.entry(d).or_insert(0) += mult;
        }
    };
    let rho1_terms = |push: &mut dyn FnMut(i64, i64, u32)| {
        if m1 != m2 {
            for (a, b) in
                [(m1, m2), (m1 + 1, m2), (m1 - 1, m2), (m1, m2 - 1), (m1, m2 + 1), (m1 - 1, m2 + 1), (m1 + 1, m2 - 1)]
            {
                push(a, b, 1);
            }
        } else {
            for (a, b) in [(m1 + 1, m2), (m1, m2 - 1), (m1 + 1, m2 - 1)] {
                push(a, b, 1);
            }
        }
    };
    match f {
        Fundamental::Rho1 => rho1_terms(&mut push),
        Fundamental::Rho2 if m2 == 0 => match m1 {
            0 => push(1, 1, 1),
            1 => {
                for (a, b) in [(1, 0), (2, 0), (2, 1)] {
                    push(a, b, 1);
                }
            }
            _ => {
                rho1_terms(&mut push);
                for (a, b) in [(m1 + 1, 1), (m1 - 2, 1), (m1 - 1, 2)] {
                    push(a, b, 1);
                }
            }
        },
        Fundamental::Rho2 if m1 == m2 => {
            for (a, b) in
                [(m1, m1), (m1 - 1, m1 - 1), (m1 + 1, m1 + 1), (m1 + 1, m1 - 1), (m1 + 1, m1 - 2), (m1 + 2, m1 - 1)]
            {
                push(a, b, 1);
            }
        }
        Fundamental::Rho2 if m1 == m2 + 1 => {
            push(m1, m2, 2);
            for (a, b) in [
                (m1 - 1, m2 - 1),
                (m1 + 1, m2 + 1),
                (m1 + 1, m2 - 1),
                (m1 + 1, m2 - 2),
                (m1 + 2, m2 - 1),
                (m1 + 1, m2),
                (m1, m2 - 1),
            ] {
                push(a, b, 1);
            }
        }
        Fundamental::Rho2 => {
            rho1_terms(&mut push);
            for (a, b) in [
                (m1, m2),
                (m1 - 1, m2 - 1),
                (m1 + 1, m2 + 1),
                (m1 + 1, m2 - 2),
                (m1 - 1, m2 + 2),
                (m1 + 2, m2 - 1),
                (m1 - 2, m2 + 1),
            ] {
                push(a, b, 1);
            }
        }
    }
    acc.into_iter().collect()
}

/// Exact characters built by repeated fusion with the fundamentals,
/// starting from the trivial character. Results are cached.
#[derive(Debug, Default)]
pub struct CharacterTable {
    cache: BTreeMap<DominantWeight, LaurentPoly2>,
}

impl CharacterTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn character(&mut self, w: DominantWeight) -> LaurentPoly2 {
        if let Some(c) = self.cache.get(&w) {
            return c.clone();
        }
        let chi = if w == DominantWeight::ZERO {
            LaurentPoly2::one()
        } else {
            // χ_w is the new top term of χ_f · χ_src; every other term is
            // strictly lower in ⟨·, ρ⟩, so the recursion terminates.
            let (f, src) = if w.mu1 == w.mu2 {
                (Fundamental::Rho2, DominantWeight { mu1: w.mu1 - 1, mu2: w.mu2 - 1 })
            } else {
                (Fundamental::Rho1, DominantWeight { mu1: w.mu1 - 1, mu2: w.mu2 })
            };
            let mut chi = &chi_fund_laurent(f) * &self.character(src);
            for (term, mult) in fuse_with_fundamental(f, src) {
                if term == w {
                    debug_assert_eq!(mult, 1);
                    continue;
                }
                chi = &chi - &self.character(term).scale(&BigInt::from(mult));
            }
            chi
        };
        self.cache.insert(w, chi.clone());
        chi
    }
}

/// Integer coefficients `c_{a,b}` with `χ_w = Σ c_{a,b} χ1^a χ2^b`, found by
/// an exact linear solve on Laurent coefficients. `None` if no integral
/// solution exists.
pub fn express_in_fundamentals(w: DominantWeight, table: &mut CharacterTable) -> Option<BTreeMap<(u32, u32), BigInt>> {
    let target = table.character(w);
    let height = |m1: i64, m2: i64| 5 * m1 + 4 * m2;
    let limit = height(w.mu1 as i64, w.mu2 as i64);
    let mut monomials = Vec::new();
    for a in 0..=w.mu1 + w.mu2 + 1 {
        for b in 0..=w.mu1 + 1 {
            if height((a + b) as i64, b as i64) <= limit {
                monomials.push((a, b));
            }
        }
    }
    let s1 = chi_fund_laurent(Fundamental::Rho1);
    let s2 = chi_fund_laurent(Fundamental::Rho2);
    let columns: Vec<LaurentPoly2> = monomials.iter().map(|&(a, b)| &s1.pow(a) * &s2.pow(b)).collect();
    let mut support: Vec<(i64, i64)> = columns.iter().flat_map(|c| c.terms().map(|(e, _)| *e)).collect();
    support.extend(target.terms().map(|(e, _)| *e));
    support.sort_unstable();
    support.dedup();
    let a: Vec<Vec<BigRational>> =
        support.iter().map(|&e| columns.iter().map(|c| BigRational::from_integer(c.coeff(e))).collect()).collect();
    let b: Vec<BigRational> = support.iter().map(|&e| BigRational::from_integer(target.coeff(e))).collect();
    let x = exact_linalg::solve(&a, &b)?;
    let mut out = BTreeMap::new();
    for (mono, c) in monomials.into_iter().zip(x) {
        if !c.is_integer() {
            return None;
        }
        if !c.is_zero() {
            out.insert(mono, c.to_integer());
        }
    }
    Some(out)
}

/// Signed Weyl group element carrying an exponent into the closed dominant
/// chamber `e1 ≥ e2 ≥ 0`.
pub fn dominant_image(v: (i64, i64)) -> ((i64, i64), WeylElement) {
    d12_elements()
        .into_iter()
        .map(|g| {
            let t = g.transpose();
            ((t.a11 * v.0 + t.a12 * v.1, t.a21 * v.0 + t.a22 * v.1), g)
        })
        .find(|&((a, b), _)| a >= b && b >= 0)
        .expect("every exponent has a dominant Weyl image")
}

/// Tensor product multiplicities by the Brauer–Klimyk rule, independent of
/// the hand-written fusion cases above.
pub fn tensor_by_weights(f: Fundamental, w: DominantWeight) -> Vec<(DominantWeight, u32)> {
    let mut acc: BTreeMap<DominantWeight, i64> = BTreeMap::new();
    let (r1, r2) = WEYL_VECTOR;
    for (&(a, b), mult) in chi_fund_laurent(f).terms() {
        let shifted = (w.mu1 as i64 + a + r1, w.mu2 as i64 + b + r2);
        let ((x, y), g) = dominant_image(shifted);
        if x == y || y == 0 {
            continue;
        }
        let m: i64 = mult.try_into().expect("small multiplicity");
        let d = DominantWeight::new(x - r1, y - r2).expect("strictly dominant shift");
        *acc.entry(d).or_insert(0) += g.det() * m;
    }
    acc.into_iter()
        .filter(|(_, m)| *m != 0)
        .map(|(d, m)| (d, u32::try_from(m).expect("non-negative multiplicity")))
        .collect()
}

pub fn dominant_weights_up_to(max_mu1: u32) -> Vec<DominantWeight> {
    (0..=max_mu1).flat_map(|a| (0..=a).map(move |b| DominantWeight { mu1: a, mu2: b })).collect()
}

/// `Σ_{i} mult_i · χ_{w_i}` as an exact Laurent polynomial.
pub fn sum_characters(terms: &[(DominantWeight, u32)], table: &mut CharacterTable) -> LaurentPoly2 {
    terms.iter().fold(LaurentPoly2::zero(), |acc, &(w, m)| &acc + &table.character(w).scale(&BigInt::from(m)))
}
