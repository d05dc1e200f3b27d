//! Moments `ς_{m,n} = φ((v¹)^m (v²)^n)` of the pair of commuting walk
//! operators, on the torus weight lattice and on the dominant cone.
//!
//! Torus moments are computed three ways (walk counting, the closed
//! multinomial sums, and constant terms of Laurent products); cone moments by
//! walk counting over the fusion graph and by the Weyl integration formula.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::characters::{
    alternant_laurent, chi_fund_laurent, dominant_weights_up_to, fuse_with_fundamental, DominantWeight, Fundamental,
    WEYL_VECTOR,
};
use crate::exact_linalg;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WalkError {
    #[error("operator for the {expected:?} graph applied to a {found:?} vector")]
    KindMismatch { expected: WalkKind, found: WalkKind },
    #[error("the multinomial formula exists only for torus moments")]
    NoFormula,
}

/// Which pair of operators is walked: `v_Z` on the weight lattice of the
/// torus, or `v_N` on the dominant weights (the McKay graphs of G2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    Torus,
    Cone,
}

impl std::str::FromStr for WalkKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "torus" => Ok(WalkKind::Torus),
            "cone" => Ok(WalkKind::Cone),
            other => Err(format!("unknown walk kind {other:?}; expected torus or cone")),
        }
    }
}

/// Walk state on a finite box: `[−B, B]²` for the torus lattice, and
/// `{B ≥ mu1 ≥ mu2 ≥ 0}` for the cone. Entries outside the box are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    kind: WalkKind,
    bound: i64,
    entries: Vec<BigInt>,
}

impl WeightVector {
    pub fn zeros(kind: WalkKind, bound: i64) -> Self {
        let side = match kind {
            WalkKind::Torus => 2 * bound + 1,
            WalkKind::Cone => bound + 1,
        } as usize;
        WeightVector { kind, bound, entries: vec![BigInt::zero(); side * side] }
    }

    pub fn delta_origin(kind: WalkKind, bound: i64) -> Self {
        let mut v = Self::zeros(kind, bound);
        v.add_at((0, 0), &BigInt::one());
        v
    }

    pub fn kind(&self) -> WalkKind {
        self.kind
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    fn index(&self, at: (i64, i64)) -> Option<usize> {
        let b = self.bound;
        match self.kind {
            WalkKind::Torus => {
                let in_box = at.0.abs() <= b && at.1.abs() <= b;
                in_box.then(|| ((at.0 + b) * (2 * b + 1) + at.1 + b) as usize)
            }
            WalkKind::Cone => {
                let in_box = at.0 <= b && at.0 >= at.1 && at.1 >= 0;
                in_box.then(|| (at.0 * (b + 1) + at.1) as usize)
            }
        }
    }

    fn position(&self, i: usize) -> (i64, i64) {
        let i = i as i64;
        match self.kind {
            WalkKind::Torus => {
                let side = 2 * self.bound + 1;
                (i / side - self.bound, i % side - self.bound)
            }
            WalkKind::Cone => {
                let side = self.bound + 1;
                (i / side, i % side)
            }
        }
    }

    /// Entry at a lattice point (torus) or partition label (cone).
    pub fn get(&self, at: (i64, i64)) -> BigInt {
        self.index(at).map(|i| self.entries[i].clone()).unwrap_or_default()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = ((i64, i64), &BigInt)> {
        self.entries.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (self.position(i), c))
    }

    pub fn total_mass(&self) -> BigInt {
        self.entries.iter().sum()
    }

    fn add_at(&mut self, at: (i64, i64), c: &BigInt) {
        if let Some(i) = self.index(at) {
            self.entries[i] += c;
        }
    }
}

fn check_kind(v: &WeightVector, expected: WalkKind) -> Result<(), WalkError> {
    if v.kind == expected {
        Ok(())
    } else {
        Err(WalkError::KindMismatch { expected, found: v.kind })
    }
}

/// One application of `v_Z^j`: the shift stencil read off the torus character.
pub fn step_torus(f: Fundamental, v: &WeightVector) -> Result<WeightVector, WalkError> {
    check_kind(v, WalkKind::Torus)?;
    let stencil: Vec<((i64, i64), BigInt)> = chi_fund_laurent(f).terms().map(|(e, c)| (*e, c.clone())).collect();
    let mut out = WeightVector::zeros(WalkKind::Torus, v.bound);
    for ((a, b), c) in v.nonzero() {
        for ((da, db), w) in &stencil {
            out.add_at((a + da, b + db), &(c * w));
        }
    }
    Ok(out)
}

/// One application of `v_N^j`: tensoring with the fundamental, applied linearly.
pub fn step_cone(f: Fundamental, v: &WeightVector) -> Result<WeightVector, WalkError> {
    check_kind(v, WalkKind::Cone)?;
    let mut out = WeightVector::zeros(WalkKind::Cone, v.bound);
    for ((a, b), c) in v.nonzero() {
        let w = DominantWeight::new(a, b).expect("cone entries are dominant");
        for (t, mult) in fuse_with_fundamental(f, w) {
            out.add_at((t.mu1() as i64, t.mu2() as i64), &(c * BigInt::from(mult)));
        }
    }
    Ok(out)
}

pub fn step(kind: WalkKind, f: Fundamental, v: &WeightVector) -> Result<WeightVector, WalkError> {
    match kind {
        WalkKind::Torus => step_torus(f, v),
        WalkKind::Cone => step_cone(f, v),
    }
}

/// Box large enough that no walk of `steps` steps ending at the origin is
/// truncated.
pub fn box_bound(steps: usize) -> i64 {
    3 * steps as i64 + 1
}

/// Applies the given sequence of steps to the origin indicator.
pub fn walk_from_origin(kind: WalkKind, steps: &[Fundamental]) -> WeightVector {
    let mut v = WeightVector::delta_origin(kind, box_bound(steps.len()));
    for &f in steps {
        v = step(kind, f, &v).expect("kind is consistent");
    }
    v
}

fn step_sequence(m: u32, n: u32) -> Vec<Fundamental> {
    let mut s = vec![Fundamental::Rho1; m as usize];
    s.extend(std::iter::repeat(Fundamental::Rho2).take(n as usize));
    s
}

/// Number of closed walks from the origin: `m` steps on the first graph
/// then `n` on the second.
pub fn moment_walk(kind: WalkKind, m: u32, n: u32) -> BigInt {
    walk_from_origin(kind, &step_sequence(m, n)).get((0, 0))
}

/// `ς_{m,n} = CT(σ1^m σ2^n)`, the integral against Lebesgue measure on 𝕋².
pub fn moment_constant_term(m: u32, n: u32) -> BigInt {
    let p = &chi_fund_laurent(Fundamental::Rho1).pow(m) * &chi_fund_laurent(Fundamental::Rho2).pow(n);
    p.constant_term()
}

/// Cone moment by the Weyl integration formula, `CT(σ1^m σ2^n |Δ|²)/12`.
pub fn moment_cone_constant_term(m: u32, n: u32) -> BigInt {
    let delta = alternant_laurent(WEYL_VECTOR);
    let p = &chi_fund_laurent(Fundamental::Rho1).pow(m) * &chi_fund_laurent(Fundamental::Rho2).pow(n);
    let ct = (&p * &(&delta * &delta)).constant_term();
    let (q, r) = ct.div_rem(&BigInt::from(12));
    debug_assert!(r.is_zero(), "Weyl integral is an integer");
    q
}

struct Factorials(Vec<BigUint>);

impl Factorials {
    fn up_to(n: u32) -> Self {
        let mut f = vec![BigUint::one()];
        for i in 1..=n {
            let next = &f[i as usize - 1] * BigUint::from(i);
            f.push(next);
        }
        Factorials(f)
    }

    /// `total! / (∏ parts! · (total − Σ parts)!)`, or zero if the parts overflow.
    fn multinomial(&self, total: u32, parts: &[u32]) -> BigUint {
        let used: u32 = parts.iter().sum();
        if used > total {
            return BigUint::zero();
        }
        let den = parts
            .iter()
            .chain(std::iter::once(&(total - used)))
            .fold(BigUint::one(), |acc, &p| acc * &self.0[p as usize]);
        &self.0[total as usize] / den
    }
}

/// Calls `f` on every `len`-tuple of non-negative integers with sum at most `max`.
fn for_each_bounded(len: usize, max: u32, f: &mut dyn FnMut(&[u32])) {
    fn rec(buf: &mut Vec<u32>, len: usize, left: u32, f: &mut dyn FnMut(&[u32])) {
        if buf.len() == len {
            f(buf);
            return;
        }
        for x in 0..=left {
            buf.push(x);
            rec(buf, len, left - x, f);
            buf.pop();
        }
    }
    rec(&mut Vec::with_capacity(len), len, max, f);
}

/// The closed multinomial sum for `φ((v_Z¹)^m)`.
///
/// Free indices `k1, k2, k3, k5`; the returning constraints force
/// `k4 = k1−k2+k3` and `k6 = k1−k2+k5`.
pub fn moment_formula_pure1(m: u32) -> BigInt {
    let fact = Factorials::up_to(m);
    let mut total = BigUint::zero();
    for_each_bounded(4, m, &mut |k| {
        let (k1, k2, k3, k5) = (k[0] as i64, k[1] as i64, k[2] as i64, k[3] as i64);
        let k4 = k1 - k2 + k3;
        let k6 = k1 - k2 + k5;
        if k4 < 0 || k6 < 0 {
            return;
        }
        let parts = [k1, k2, k3, k4, k5, k6].map(|x| x as u32);
        total += fact.multinomial(m, &parts);
    });
    BigInt::from(total)
}

/// The closed multinomial sum for `φ((v_Z²)^n)`, with the eliminated indices
/// `p1 = l1−l2+l3+2l7−2l8+l9−l10−l11+l12`, `p2 = l1−l2+l5+l7−l8+2l9−2l10+l11−l12`
/// and `p3` the total number of non-identity steps, each identity step
/// carrying weight 2.
pub fn moment_formula_pure2(n: u32) -> BigInt {
    let fact = Factorials::up_to(n);
    let mut total = BigUint::zero();
    for_each_bounded(10, n, &mut |l| {
        let [l1, l2, l3, l5, l7, l8, l9, l10, l11, l12] =
            [l[0], l[1], l[2], l[3], l[4], l[5], l[6], l[7], l[8], l[9]].map(|x| x as i64);
        let p1 = l1 - l2 + l3 + 2 * l7 - 2 * l8 + l9 - l10 - l11 + l12;
        let p2 = l1 - l2 + l5 + l7 - l8 + 2 * l9 - 2 * l10 + l11 - l12;
        if p1 < 0 || p2 < 0 {
            return;
        }
        let parts = [l1, l2, l3, p1, l5, p2, l7, l8, l9, l10, l11, l12].map(|x| x as u32);
        let p3: u32 = parts.iter().sum();
        if p3 > n {
            return;
        }
        total += fact.multinomial(n, &parts) << (n - p3) as usize;
    });
    BigInt::from(total)
}

/// Net displacement of a first-graph step multiset `k1..k6`.
fn r_k(k: &[i64]) -> (i64, i64) {
    let [k1, k2, k3, k4, k5, k6] = [k[0], k[1], k[2], k[3], k[4], k[5]];
    (k1 - k2 + k5 - k6, k3 - k4 - k5 + k6)
}

/// Net displacement of a second-graph step multiset `l1..l12`.
fn r_l(l: &[i64]) -> (i64, i64) {
    let [l1, l2, l3, l4, l5, l6, l7, l8, l9, l10, l11, l12] =
        [l[0], l[1], l[2], l[3], l[4], l[5], l[6], l[7], l[8], l[9], l[10], l[11]];
    (
        l1 - l2 + l5 - l6 + l7 - l8 + 2 * l9 - 2 * l10 + l11 - l12,
        l3 - l4 - l5 + l6 + l7 - l8 - l9 + l10 - 2 * l11 + 2 * l12,
    )
}

/// The cross-moment double multinomial sum over `k1..k6` (at most `m` steps)
/// and `l1..l12` (at most `n` steps), restricted to `r1 = r2 = 0`.
///
/// The identity term of `v_Z²` has coefficient 2, so each `l`-multinomial is
/// weighted by `2^{n − Σl}`. The two sums are aggregated by displacement and
/// then paired, which is the same sum reordered.
pub fn moment_formula_cross(m: u32, n: u32) -> BigInt {
    let fact = Factorials::up_to(m.max(n));
    let mut k_part: HashMap<(i64, i64), BigUint> = HashMap::new();
    for_each_bounded(6, m, &mut |k| {
        let ki: Vec<i64> = k.iter().map(|&x| x as i64).collect();
        *k_part.entry(r_k(&ki)).or_default() += fact.multinomial(m, k);
    });
    let mut l_part: HashMap<(i64, i64), BigUint> = HashMap::new();
    for_each_bounded(12, n, &mut |l| {
        let li: Vec<i64> = l.iter().map(|&x| x as i64).collect();
        let used: u32 = l.iter().sum();
        *l_part.entry(r_l(&li)).or_default() += fact.multinomial(n, l) << (n - used) as usize;
    });
    let total: BigUint = k_part.iter().filter_map(|(&(a, b), kv)| l_part.get(&(-a, -b)).map(|lv| kv * lv)).sum();
    BigInt::from(total)
}

/// All routes for one moment, and whether they agree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MomentReport {
    pub kind: WalkKind,
    pub m: u32,
    pub n: u32,
    #[serde(serialize_with = "ser_big")]
    pub value_walk: BigInt,
    #[serde(serialize_with = "ser_big_opt")]
    pub value_formula: Option<BigInt>,
    #[serde(serialize_with = "ser_big")]
    pub value_ct: BigInt,
    pub agree: bool,
}

fn ser_big<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_big_opt<S: serde::Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// Formula route for torus moments, choosing the specialised sum when one
/// index is zero.
pub fn moment_formula(kind: WalkKind, m: u32, n: u32) -> Result<BigInt, WalkError> {
    match (kind, m, n) {
        (WalkKind::Cone, _, _) => Err(WalkError::NoFormula),
        (WalkKind::Torus, m, 0) => Ok(moment_formula_pure1(m)),
        (WalkKind::Torus, 0, n) => Ok(moment_formula_pure2(n)),
        (WalkKind::Torus, m, n) => Ok(moment_formula_cross(m, n)),
    }
}

pub fn moment_ct(kind: WalkKind, m: u32, n: u32) -> BigInt {
    match kind {
        WalkKind::Torus => moment_constant_term(m, n),
        WalkKind::Cone => moment_cone_constant_term(m, n),
    }
}

pub fn moments_report(kind: WalkKind, m: u32, n: u32) -> MomentReport {
    let value_walk = moment_walk(kind, m, n);
    let value_formula = moment_formula(kind, m, n).ok();
    let value_ct = moment_ct(kind, m, n);
    let agree = value_walk == value_ct && value_formula.as_ref().map_or(true, |f| *f == value_walk);
    MomentReport { kind, m, n, value_walk, value_formula, value_ct, agree }
}

/// Whether `span{(v_N¹)^a (v_N²)^b δ₀ : a+b ≤ max_steps}` contains `δ_w` for
/// every dominant `w` with `mu1 ≤ max_mu1`.
pub fn cyclic_span_contains(max_steps: u32, max_mu1: u32) -> bool {
    let bound = box_bound(max_steps as usize);
    let mut spanning = Vec::new();
    for a in 0..=max_steps {
        for b in 0..=max_steps - a {
            spanning.push(walk_from_origin(WalkKind::Cone, &step_sequence(a, b)));
        }
    }
    let as_row = |v: &WeightVector| -> Vec<BigRational> {
        let mut padded = WeightVector::zeros(WalkKind::Cone, bound);
        for (at, c) in v.nonzero() {
            padded.add_at(at, c);
        }
        exact_linalg::to_rational(&padded.entries)
    };
    let rows: Vec<Vec<BigRational>> = spanning.iter().map(as_row).collect();
    let base = exact_linalg::rank(&rows);
    dominant_weights_up_to(max_mu1).into_iter().all(|w| {
        let mut delta = WeightVector::zeros(WalkKind::Cone, bound);
        delta.add_at((w.mu1() as i64, w.mu2() as i64), &BigInt::one());
        let mut extended = rows.clone();
        extended.push(as_row(&delta));
        exact_linalg::rank(&extended) == base
    })
}
