//! Discrete D12-invariant measures on 𝕋²: the uniform Dirac families on
//! S3-orbits of roots of unity, the grid measure `F_k^W`, the spectral
//! measure of the `A_k` nimrep, and the measures of the exceptional
//! nimreps at levels 3 and 4 together with an audit of their tables.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::value::RawValue;
use thiserror::Error;

use crate::jacobian_geometry::{jacobian_theta, psi_map};
use crate::modular_verlinde::{build_level, Exponent};
use crate::weyl_torus::{d12_elements, orbit, s3_elements, TorusPoint, WeylElement};

/// Tolerance for "is an integer" on audited moments.
pub const MOMENT_INTEGER_TOL: f64 = 1e-7;
/// Tolerance for the table and mass comparisons in an audit.
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("unknown measure name {0:?}")]
    UnknownName(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Invariance {
    S3,
    D12,
}

/// A finite signed combination of point masses on 𝕋².
#[derive(Clone, Debug, PartialEq)]
pub struct DiracMeasureT2 {
    pub name: String,
    pub invariance: Invariance,
    atoms: BTreeMap<TorusPoint, f64>,
}

impl DiracMeasureT2 {
    pub fn new(name: impl Into<String>, invariance: Invariance) -> Self {
        DiracMeasureT2 { name: name.into(), invariance, atoms: BTreeMap::new() }
    }

    pub fn atoms(&self) -> &BTreeMap<TorusPoint, f64> {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight(&self, p: &TorusPoint) -> f64 {
        self.atoms.get(p).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, p: TorusPoint, w: f64) {
        *self.atoms.entry(p).or_insert(0.0) += w;
    }

    pub fn mass(&self) -> f64 {
        self.atoms.values().sum()
    }

    pub fn group(&self) -> Vec<WeylElement> {
        match self.invariance {
            Invariance::S3 => s3_elements(),
            Invariance::D12 => d12_elements(),
        }
    }

    /// Every image of every atom is an atom with bit-identical weight.
    pub fn is_invariant(&self) -> bool {
        let group = self.group();
        self.atoms.iter().all(|(p, w)| group.iter().all(|g| self.atoms.get(&p.apply(g)).is_some_and(|v| v == w)))
    }

    /// `Σ w χ1^m χ2^n`.
    pub fn moment(&self, m: u32, n: u32) -> f64 {
        self.atoms
            .iter()
            .map(|(p, w)| {
                let (x, y) = psi_map(p.theta());
                w * x.powi(m as i32) * y.powi(n as i32)
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Atom<'a> {
            theta: [i64; 3],
            weight: &'a RawValue,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            name: &'a str,
            invariance: Invariance,
            atoms: Vec<Atom<'a>>,
            mass: &'a RawValue,
        }
        let raws: Vec<Box<RawValue>> = self.atoms.values().map(|w| raw_number(*w)).collect();
        let mass = raw_number(self.mass());
        let doc = Doc {
            name: &self.name,
            invariance: self.invariance,
            atoms: self
                .atoms
                .keys()
                .zip(&raws)
                .map(|(p, w)| Atom { theta: [p.num1(), p.num2(), p.den()], weight: w })
                .collect(),
            mass: &mass,
        };
        serde_json::to_string_pretty(&doc).expect("measure serialises")
    }
}

/// A JSON number with 17 significant digits.
pub fn raw_number(v: f64) -> Box<RawValue> {
    let text = if v.is_finite() { format!("{v:.16e}") } else { "null".to_owned() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

/// Serde hook writing a float through [`raw_number`].
pub fn serialize_sig17<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw_number(*v).serialize(s)
}

pub fn measure_moment(mu: &DiracMeasureT2, m: u32, n: u32) -> f64 {
    mu.moment(m, n)
}

/// Smallest point of the D12-orbit; weights are evaluated there so that
/// they are exactly constant on orbits.
fn orbit_rep(p: &TorusPoint) -> TorusPoint {
    *orbit(p, &d12_elements()).iter().next().expect("orbits are non-empty")
}

/// Whether `p` is fixed by a reflection of D12, i.e. `J(p) = 0` exactly.
pub fn on_reflection_line(p: &TorusPoint) -> bool {
    d12_elements().iter().any(|g| g.det() == -1 && p.apply(g) == *p)
}

fn abs_j(p: &TorusPoint) -> f64 {
    if on_reflection_line(p) {
        0.0
    } else {
        jacobian_theta(orbit_rep(p).theta()).abs()
    }
}

fn j_sq(p: &TorusPoint) -> f64 {
    let j = abs_j(p);
    j * j
}

fn ratio(num: i64, den: i64) -> Ratio<i64> {
    Ratio::new(num, den)
}

fn s3_support(seeds: &[(Ratio<i64>, Ratio<i64>)]) -> Vec<TorusPoint> {
    let s3 = s3_elements();
    let mut out: Vec<TorusPoint> =
        seeds.iter().flat_map(|&(a, b)| orbit(&TorusPoint::from_ratios(a, b), &s3)).collect();
    out.sort();
    out.dedup();
    out
}

/// Support of `d^((n))`: the S3-orbit of `(τ,τ)`, `(ω̄τ̄, ω)`, `(ω, ω̄τ̄)`
/// with `τ = e^{2πi/n}`, `ω = e^{2πi/3}`.
pub fn support_dn(n: Ratio<i64>) -> Result<Vec<TorusPoint>, MeasureError> {
    if n < ratio(2, 1) {
        return Err(MeasureError::BadParameter(format!("d((n)) needs n >= 2, got {n}")));
    }
    let t = n.recip();
    let w = ratio(1, 3);
    Ok(s3_support(&[(t, t), (-w - t, w), (w, -w - t)]))
}

/// Support of `d^(n,k)`.
pub fn support_dnk(n: Ratio<i64>, k: Ratio<i64>) -> Result<Vec<TorusPoint>, MeasureError> {
    if n <= ratio(2, 1) || k < Ratio::zero() || k > n.recip() {
        return Err(MeasureError::BadParameter(format!("d(n,k) needs n > 2 and 0 <= k <= 1/n, got ({n}, {k})")));
    }
    let t = n.recip();
    let w = ratio(1, 3);
    Ok(s3_support(&[
        (t + k, t),
        (t, t + k),
        (-w - t, w + k),
        (w + k, -w - t),
        (-w - t - k, w - k),
        (w - k, -w - t - k),
    ]))
}

fn uniform(name: String, support: Vec<TorusPoint>) -> DiracMeasureT2 {
    let w = 1.0 / support.len() as f64;
    let mut mu = DiracMeasureT2::new(name, Invariance::D12);
    for p in support {
        mu.add(p, w);
    }
    mu
}

pub fn measure_dn(n: Ratio<i64>) -> Result<DiracMeasureT2, MeasureError> {
    Ok(uniform(format!("d(({n}))"), support_dn(n)?))
}

pub fn measure_dnk(n: Ratio<i64>, k: Ratio<i64>) -> Result<DiracMeasureT2, MeasureError> {
    Ok(uniform(format!("d({n},{k})"), support_dnk(n, k)?))
}

/// The points `(q1, q2)/3(k+4)` with `q1 + q2 ≡ 0 mod 3`.
pub fn fkw_points(k: u32) -> Vec<TorusPoint> {
    let n = 3 * (k as i64 + 4);
    (0..n)
        .flat_map(|q1| (0..n).filter(move |q2| (q1 + q2) % 3 == 0).map(move |q2| (q1, q2)))
        .map(|(q1, q2)| TorusPoint::new(q1, q2, n).expect("nonzero denominator"))
        .collect()
}

pub fn measure_fkw(k: u32) -> Result<DiracMeasureT2, MeasureError> {
    if k == 0 {
        return Err(MeasureError::BadParameter("F_k^W needs k >= 1".into()));
    }
    Ok(uniform(format!("F_{k}^W"), fkw_points(k)))
}

/// `J² / 192π⁴` times the uniform measure on `F_k^W`; atoms on the
/// reflection lines carry no weight and are omitted.
pub fn measure_ak(k: u32) -> Result<DiracMeasureT2, MeasureError> {
    let grid = measure_fkw(k)?;
    let scale = 1.0 / (192.0 * PI.powi(4));
    let mut mu = DiracMeasureT2::new(format!("A_{k}"), Invariance::D12);
    for (p, w) in grid.atoms() {
        if !on_reflection_line(p) {
            mu.add(*p, scale * j_sq(p) * w);
        }
    }
    Ok(mu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Exceptional {
    E3,
    E3M,
    E4,
    E4M,
    E4Star,
}

impl Exceptional {
    pub const ALL: [Exceptional; 5] =
        [Exceptional::E3, Exceptional::E3M, Exceptional::E4, Exceptional::E4M, Exceptional::E4Star];

    pub fn name(self) -> &'static str {
        match self {
            Exceptional::E3 => "E3",
            Exceptional::E3M => "E3M",
            Exceptional::E4 => "E4",
            Exceptional::E4M => "E4M",
            Exceptional::E4Star => "E4star",
        }
    }

    pub fn level(self) -> u32 {
        match self {
            Exceptional::E3 | Exceptional::E3M => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Exceptional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Exceptional {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Exceptional::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| MeasureError::UnknownName(s.to_owned()))
    }
}

/// Printed theorem, or the version repaired against its own table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Printed,
    Corrected,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Dn(Ratio<i64>),
    Dnk(Ratio<i64>, Ratio<i64>),
}

impl Support {
    fn points(self) -> Vec<TorusPoint> {
        match self {
            Support::Dn(n) => support_dn(n),
            Support::Dnk(n, k) => support_dnk(n, k),
        }
        .expect("built-in supports have valid parameters")
    }
}

/// One summand of an exceptional measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Term {
    /// `c |J| d`.
    AbsJ(f64, Support),
    /// `c J² d`.
    JSquared(f64, Support),
    /// `c d`.
    Plain(f64, Support),
    /// `c Σ_{g ∈ D12} δ_{g(p)}`, one unit per group element.
    OrbitSum(f64, TorusPoint),
}

impl Term {
    fn add_to(self, mu: &mut DiracMeasureT2) {
        let spread = |mu: &mut DiracMeasureT2, c: f64, s: Support, f: fn(&TorusPoint) -> f64| {
            let pts = s.points();
            let inv = 1.0 / pts.len() as f64;
            for p in pts {
                mu.add(p, c * f(&p) * inv);
            }
        };
        match self {
            Term::AbsJ(c, s) => spread(mu, c, s, abs_j),
            Term::JSquared(c, s) => spread(mu, c, s, j_sq),
            Term::Plain(c, s) => spread(mu, c, s, |_| 1.0),
            Term::OrbitSum(c, p) => {
                for g in d12_elements() {
                    mu.add(p.apply(&g), c);
                }
            }
        }
    }
}

/// A measure as a list of terms, plus a note for every change from print.
#[derive(Clone, Debug, PartialEq)]
pub struct Recipe {
    pub terms: Vec<Term>,
    pub corrections: Vec<&'static str>,
}

fn pt(a: i64, b: i64, d: i64) -> TorusPoint {
    TorusPoint::new(a, b, d).expect("nonzero denominator")
}

pub fn recipe(name: Exceptional, variant: Variant) -> Recipe {
    let pi2 = PI * PI;
    let pi4 = pi2 * pi2;
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    let d21 = Support::Dnk(ratio(21, 4), ratio(1, 21));
    let d6 = Support::Dnk(ratio(6, 1), ratio(1, 24));
    let dn = |a, b| Support::Dn(ratio(a, b));
    // `(e^{4πi/7}, e^{6πi/7})` lies on the orbit of the (2,0) exponent.
    let e3_point = pt(2, 3, 7);
    // The theorem's `(e^{πi/4}, −i)` and `(i, e^{3πi/4})` both lie on the
    // orbit of the level-4 exponent (2,0); the table and the derivation
    // put the weight on the orbit of (2,1), which is `(e^{πi/4}, −1)`.
    let printed_e4_point = pt(1, 3, 8);
    let printed_e4star_point = pt(2, 3, 8);
    let x_point = pt(1, 4, 8);
    let corrected = variant == Variant::Corrected;
    let (terms, corrections) = match name {
        Exceptional::E3 if corrected => (
            vec![Term::AbsJ(1.0 / (28.0 * pi2), d21), Term::OrbitSum(1.0 / 36.0, e3_point)],
            vec!["Dirac coefficient 1/72 -> 1/36 (table weight of (2,0) 1/2 -> 2/3, zeta 1/6 -> 1/3)"],
        ),
        Exceptional::E3 => (vec![Term::AbsJ(1.0 / (28.0 * pi2), d21), Term::OrbitSum(1.0 / 72.0, e3_point)], vec![]),
        Exceptional::E3M => {
            (vec![Term::AbsJ(3.0 / (28.0 * pi2), d21), Term::OrbitSum(-1.0 / 12.0, e3_point)], vec![])
        }
        Exceptional::E4 if corrected => (
            vec![
                Term::AbsJ(s3 / (64.0 * pi2), d6),
                Term::JSquared(1.0 / (1024.0 * pi4), dn(4, 1)),
                Term::JSquared(1.0 / (1024.0 * pi4), dn(8, 1)),
                Term::JSquared(1.0 / (1024.0 * pi4), dn(8, 3)),
                Term::OrbitSum(-s6 / 144.0, x_point),
            ],
            vec![
                "d((6)) -> d((8)): the (4,0) point (1/3,19/24) lies in Supp d((8)), not Supp d((6))",
                "J^2 coefficients 1/64pi^4 -> 1/1024pi^4 on d((8)) and d((8/3))",
                "subtracted orbit (e^{pi i/4},-i) -> (e^{pi i/4},-1), the extra points of Supp d(6,1/24)",
            ],
        ),
        Exceptional::E4 => (
            vec![
                Term::AbsJ(s3 / (64.0 * pi2), d6),
                Term::JSquared(1.0 / (1024.0 * pi4), dn(4, 1)),
                Term::JSquared(1.0 / (64.0 * pi4), dn(6, 1)),
                Term::JSquared(1.0 / (64.0 * pi4), dn(8, 3)),
                Term::OrbitSum(-s6 / 144.0, printed_e4_point),
            ],
            vec![],
        ),
        Exceptional::E4M if corrected => (
            vec![
                Term::AbsJ(s3 / (32.0 * pi2), d6),
                Term::JSquared(1.0 / (512.0 * pi4), dn(8, 1)),
                Term::JSquared(1.0 / (512.0 * pi4), dn(8, 3)),
                Term::OrbitSum(-s6 / 72.0, x_point),
            ],
            vec![
                "table weights of (0,0),(3,0) (3-+sqrt6)/60 -> (3-+sqrt6)/12 so the table sums to 1",
                "|J| coefficient sqrt3/160pi^2 -> sqrt3/32pi^2, subtraction sqrt6/360 -> sqrt6/72",
                "d((6)) -> d((8)) and J^2 coefficients 1/2048pi^4 -> 1/512pi^4 (table weight 1/4 each)",
                "subtracted orbit (e^{pi i/4},-i) -> (e^{pi i/4},-1)",
            ],
        ),
        Exceptional::E4M => (
            vec![
                Term::AbsJ(s3 / (160.0 * pi2), d6),
                Term::JSquared(1.0 / (2048.0 * pi4), dn(6, 1)),
                Term::JSquared(1.0 / (2048.0 * pi4), dn(8, 3)),
                Term::OrbitSum(-s6 / 360.0, printed_e4_point),
            ],
            vec![],
        ),
        Exceptional::E4Star if corrected => (
            vec![Term::Plain(0.5, d6), Term::OrbitSum(1.0 / 24.0, x_point)],
            vec!["Dirac orbit (i,e^{3pi i/4}) -> (e^{pi i/4},-1), coefficient 1/18 -> 1/18 - 1/72 = 1/24 (d(6,1/24) already carries 1/72 there)"],
        ),
        Exceptional::E4Star => {
            (vec![Term::Plain(0.5, d6), Term::OrbitSum(1.0 / 18.0, printed_e4star_point)], vec![])
        }
    };
    Recipe { terms, corrections }
}

pub fn measure_exceptional(name: Exceptional, variant: Variant) -> DiracMeasureT2 {
    let label = match variant {
        Variant::Printed => name.name().to_owned(),
        Variant::Corrected => format!("{name}-corrected"),
    };
    let mut mu = DiracMeasureT2::new(label, Invariance::D12);
    for term in recipe(name, variant).terms {
        term.add_to(&mut mu);
    }
    mu
}

/// Measures addressable by name: the exceptional ones, `A<k>`, `F<k>W`,
/// `d((n))` and `d(n,k)` with rational parameters.
pub fn measure_by_name(name: &str, variant: Variant) -> Result<DiracMeasureT2, MeasureError> {
    let bad = || MeasureError::UnknownName(name.to_owned());
    let parse_ratio = |s: &str| -> Result<Ratio<i64>, MeasureError> { s.trim().parse().map_err(|_| bad()) };
    if let Ok(e) = name.parse::<Exceptional>() {
        return Ok(measure_exceptional(e, variant));
    }
    if let Some(rest) = name.strip_prefix("d((").and_then(|r| r.strip_suffix("))")) {
        return measure_dn(parse_ratio(rest)?);
    }
    if let Some(rest) = name.strip_prefix("d(").and_then(|r| r.strip_suffix(')')) {
        let (n, k) = rest.split_once(',').ok_or_else(bad)?;
        return measure_dnk(parse_ratio(n)?, parse_ratio(k)?);
    }
    if let Some(k) = name.strip_prefix('A').and_then(|r| r.parse::<u32>().ok()) {
        return measure_ak(k);
    }
    if let Some(k) = name.strip_prefix('F').and_then(|r| r.strip_suffix('W')).and_then(|r| r.parse::<u32>().ok()) {
        return measure_fkw(k);
    }
    Err(bad())
}

/// Printed correction terms `ζ_λ` for the level-3 measures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaTable(pub BTreeMap<Exponent, Ratio<i64>>);

impl ZetaTable {
    pub fn printed(name: Exceptional) -> Option<ZetaTable> {
        let z = match name {
            Exceptional::E3 => ratio(1, 6),
            Exceptional::E3M => ratio(-1, 1),
            _ => return None,
        };
        Some(ZetaTable([((0, 0), Ratio::zero()), ((1, 1), Ratio::zero()), ((2, 0), z)].into_iter().collect()))
    }

    pub fn get(&self, e: Exponent) -> f64 {
        self.0.get(&e).and_then(|r| r.to_f64()).unwrap_or(0.0)
    }
}

/// Printed value of the `J` column of a table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JColumn {
    /// `|J| / 8π²`.
    Abs(f64),
    /// `J² / 64π⁴`.
    Squared(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrintedRow {
    pub exponent: Exponent,
    pub theta: (i64, i64, i64),
    pub psi_sq: f64,
    pub j: Option<JColumn>,
}

pub fn printed_table(name: Exceptional) -> Vec<PrintedRow> {
    let s21 = 21f64.sqrt();
    let s6 = 6f64.sqrt();
    let s3 = 3f64.sqrt();
    let row = |exponent, theta, psi_sq, j| PrintedRow { exponent, theta, psi_sq, j };
    use JColumn::{Abs, Squared};
    match name {
        Exceptional::E3 => vec![
            row((0, 0), (4, 20, 21), (7.0 - s21) / 42.0, Some(Abs((7.0 - s21) / 4.0))),
            row((1, 1), (8, 19, 21), (7.0 + s21) / 42.0, Some(Abs((7.0 + s21) / 4.0))),
            row((2, 0), (6, 18, 21), 0.5, Some(Abs(3.5))),
        ],
        Exceptional::E3M => vec![
            row((0, 0), (4, 20, 21), (7.0 - s21) / 14.0, Some(Squared(7.0 * (5.0 - s21) / 8.0))),
            row((1, 1), (8, 19, 21), (7.0 + s21) / 14.0, Some(Squared(7.0 * (5.0 + s21) / 8.0))),
            row((2, 0), (6, 18, 21), 0.0, Some(Squared(49.0 / 4.0))),
        ],
        Exceptional::E4 => vec![
            row((0, 0), (4, 23, 24), (3.0 - s6) / 24.0, Some(Abs((3.0 - s6) / s3))),
            row((3, 0), (7, 20, 24), (3.0 + s6) / 24.0, Some(Abs((3.0 + s6) / s3))),
            row((0, 1), (7, 23, 24), 0.125, Some(Abs(s3))),
            row((4, 0), (8, 19, 24), 0.125, Some(Abs(s3))),
            row((1, 1), (8, 22, 24), 0.5, Some(Abs(2.0 * s3))),
        ],
        Exceptional::E4M => vec![
            row((0, 0), (4, 23, 24), (3.0 - s6) / 60.0, Some(Abs((3.0 - s6) / s3))),
            row((3, 0), (7, 20, 24), (3.0 + s6) / 60.0, Some(Abs((3.0 + s6) / s3))),
            row((0, 1), (7, 23, 24), 0.25, Some(Abs(s3))),
            row((4, 0), (8, 19, 24), 0.25, Some(Abs(s3))),
            row((1, 1), (8, 22, 24), 0.0, Some(Abs(2.0 * s3))),
        ],
        Exceptional::E4Star => vec![
            row((0, 0), (4, 23, 24), 1.0 / 6.0, None),
            row((3, 0), (7, 20, 24), 1.0 / 6.0, None),
            row((1, 1), (8, 22, 24), 0.0, None),
            row((2, 0), (6, 21, 24), 0.0, None),
            row((2, 1), (9, 21, 24), 2.0 / 3.0, None),
        ],
    }
}

/// A printed linear relation `a |ψ*|² = b · (J column) + ζ` on some rows.
#[derive(Clone, Debug, PartialEq)]
pub struct PrintedRelation {
    pub label: &'static str,
    pub rows: Vec<Exponent>,
    pub psi_factor: f64,
    pub j_factor: f64,
    pub squared: bool,
    pub zeta: Option<ZetaTable>,
}

pub fn printed_relations(name: Exceptional) -> Vec<PrintedRelation> {
    let s3 = 3f64.sqrt();
    let rel = |label, rows: &[Exponent], psi_factor, j_factor, squared, zeta| PrintedRelation {
        label,
        rows: rows.to_vec(),
        psi_factor,
        j_factor,
        squared,
        zeta,
    };
    match name {
        Exceptional::E3 | Exceptional::E3M => vec![rel(
            "|psi|^2 = (2/21)|J|/8pi^2 + zeta",
            &[(0, 0), (1, 1), (2, 0)],
            1.0,
            2.0 / 21.0,
            false,
            ZetaTable::printed(name),
        )],
        Exceptional::E4 => vec![
            rel("24|psi|^2 = sqrt3 |J|/8pi^2", &[(0, 0), (3, 0)], 24.0, s3, false, None),
            rel("3|psi|^2 = 2 J^2/64pi^4", &[(0, 1), (4, 0)], 3.0, 2.0, true, None),
            rel("24|psi|^2 = J^2/64pi^4", &[(1, 1)], 24.0, 1.0, true, None),
        ],
        Exceptional::E4M => vec![
            rel("60|psi|^2 = sqrt3 |J|/8pi^2", &[(0, 0), (3, 0)], 60.0, s3, false, None),
            rel("48|psi|^2 = 2 J^2/64pi^4", &[(0, 1), (4, 0)], 48.0, 2.0, true, None),
        ],
        Exceptional::E4Star => vec![],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRowCheck {
    pub exponent: Exponent,
    pub theta: [i64; 3],
    pub table_psi_sq: f64,
    pub table_j: Option<JColumn>,
    /// `|J|/8π²` or `J²/64π⁴` to match the printed column.
    pub computed_j: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentCheck {
    pub m: u32,
    pub n: u32,
    pub value: f64,
    pub nearest: i64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub check: String,
    pub expected: f64,
    pub computed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub name: Exceptional,
    pub variant: Variant,
    pub mass: f64,
    pub table_mass: f64,
    pub rows: Vec<TableRowCheck>,
    pub moments: Vec<MomentCheck>,
    pub corrections: Vec<&'static str>,
    pub flags: Vec<Discrepancy>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.flags.is_empty()
    }

    /// Whether the table's `J` column is reproduced; a failure here is an
    /// implementation bug, not a printed discrepancy.
    pub fn j_column_ok(&self) -> bool {
        self.rows.iter().all(|r| r.residual <= 1e-10)
    }
}

pub fn audit_measure(name: Exceptional, variant: Variant) -> AuditReport {
    let level = build_level(name.level()).expect("levels 3 and 4 exist");
    let mut flags = Vec::new();
    let mut rows = Vec::new();
    let table = printed_table(name);
    let computed_abs = |e: Exponent| {
        let theta = level.theta_of_exponent(e).expect("table exponents are exponents");
        (theta, jacobian_theta(theta.theta()).abs() / (8.0 * PI * PI))
    };

    for r in &table {
        let (theta, abs) = computed_abs(r.exponent);
        let printed_theta = pt(r.theta.0, r.theta.1, r.theta.2);
        if theta != printed_theta {
            flags.push(Discrepancy {
                check: format!("theta of {:?}", r.exponent),
                expected: printed_theta.theta().0,
                computed: theta.theta().0,
            });
        }
        let (computed_j, residual) = match r.j {
            Some(JColumn::Abs(v)) => (abs, (abs - v).abs()),
            Some(JColumn::Squared(v)) => (abs * abs, (abs * abs - v).abs()),
            None => (abs, 0.0),
        };
        if residual > 1e-10 {
            flags.push(Discrepancy {
                check: format!("J column at {:?}", r.exponent),
                expected: 0.0,
                computed: residual,
            });
        }
        rows.push(TableRowCheck {
            exponent: r.exponent,
            theta: [theta.num1(), theta.num2(), theta.den()],
            table_psi_sq: r.psi_sq,
            table_j: r.j,
            computed_j,
            residual,
        });
    }

    for rel in printed_relations(name) {
        for e in &rel.rows {
            let row = table.iter().find(|r| r.exponent == *e).expect("relation rows are table rows");
            let abs = computed_abs(*e).1;
            let j = if rel.squared { abs * abs } else { abs };
            let zeta = rel.zeta.as_ref().map_or(0.0, |z| z.get(*e));
            let lhs = rel.psi_factor * row.psi_sq;
            let rhs = rel.j_factor * j + zeta;
            if (lhs - rhs).abs() > AUDIT_TOL {
                flags.push(Discrepancy { check: format!("{} at {:?}", rel.label, e), expected: lhs, computed: rhs });
            }
        }
    }

    let table_mass: f64 = table.iter().map(|r| r.psi_sq).sum();
    if (table_mass - 1.0).abs() > AUDIT_TOL {
        flags.push(Discrepancy { check: "table sum of |psi|^2".into(), expected: 1.0, computed: table_mass });
    }

    let mu = measure_exceptional(name, variant);
    let mass = mu.mass();
    if (mass - 1.0).abs() > AUDIT_TOL {
        flags.push(Discrepancy { check: "total mass".into(), expected: 1.0, computed: mass });
    }
    if !mu.is_invariant() {
        flags.push(Discrepancy { check: "D12 invariance".into(), expected: 1.0, computed: 0.0 });
    }

    let mut moments = Vec::new();
    for total in 0..=3u32 {
        for m in (0..=total).rev() {
            let n = total - m;
            let value = mu.moment(m, n);
            let nearest = value.round() as i64;
            let ok = (value - nearest as f64).abs() <= MOMENT_INTEGER_TOL && nearest >= 0;
            if !ok {
                flags.push(Discrepancy {
                    check: format!("moment ({m},{n})"),
                    expected: nearest as f64,
                    computed: value,
                });
            }
            moments.push(MomentCheck { m, n, value, nearest, ok });
        }
    }

    AuditReport {
        name,
        variant,
        mass,
        table_mass,
        rows,
        moments,
        corrections: recipe(name, variant).corrections,
        flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular_verlinde::build_level;
    use crate::walk_moments::{moment_walk, WalkKind};
    use num_traits::ToPrimitive;

    fn r(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    #[test]
    fn definition_one_cardinalities() {
        assert_eq!(support_dn(r(2, 1)).unwrap().len(), 9);
        assert_eq!(support_dn(r(6, 1)).unwrap().len(), 18);
        assert_eq!(support_dnk(r(6, 1), r(0, 1)).unwrap().len(), 18);
        assert_eq!(support_dnk(r(21, 4), r(1, 21)).unwrap().len(), 36);
        assert_eq!(support_dnk(r(6, 1), r(1, 24)).unwrap().len(), 36);
        for n in [r(4, 1), r(5, 1), r(7, 1), r(8, 1), r(21, 4)] {
            assert_eq!(support_dnk(n, n.recip()).unwrap().len(), 18, "{n}");
        }
        // Degenerate parameters where seeds collide.
        assert_eq!(support_dn(r(3, 1)).unwrap().len(), 6);
        assert_eq!(support_dnk(r(6, 1), r(1, 6)).unwrap().len(), 9);
        assert!(support_dn(r(3, 2)).is_err());
        assert!(support_dnk(r(2, 1), r(0, 1)).is_err());
        assert!(support_dnk(r(6, 1), r(1, 5)).is_err());
        for n in [r(2, 1), r(4, 1), r(6, 1), r(8, 3)] {
            let mu = measure_dn(n).unwrap();
            assert!(mu.is_invariant() && (mu.mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exponent_orbits_fill_supports() {
        let d12 = d12_elements();
        let l3 = build_level(3).unwrap();
        let mut union: Vec<TorusPoint> =
            [(0, 0), (1, 1), (2, 0)].iter().flat_map(|&e| orbit(&l3.theta_of_exponent(e).unwrap(), &d12)).collect();
        union.sort();
        assert_eq!(union, support_dnk(r(21, 4), r(1, 21)).unwrap());

        let l4 = build_level(4).unwrap();
        let o = |e| orbit(&l4.theta_of_exponent(e).unwrap(), &d12);
        let contains = |s: &[TorusPoint], e| o(e).iter().all(|p| s.contains(p));
        let d6 = support_dnk(r(6, 1), r(1, 24)).unwrap();
        assert!(contains(&d6, (0, 0)) && contains(&d6, (3, 0)) && contains(&d6, (2, 1)));
        assert!(contains(&support_dn(r(8, 1)).unwrap(), (4, 0)));
        assert!(!contains(&support_dn(r(6, 1)).unwrap(), (4, 0)));
        assert!(contains(&support_dn(r(8, 3)).unwrap(), (0, 1)));
        assert!(contains(&support_dn(r(4, 1)).unwrap(), (1, 1)));
        // The extra points of d(6,1/24) are the (2,1) orbit.
        let x = orbit(&pt(1, 4, 8), &d12);
        assert_eq!(x, o((2, 1)));
        assert_eq!(orbit(&pt(1, 6, 8), &d12), o((2, 0)));
        assert_eq!(orbit(&pt(2, 3, 7), &d12), orbit(&l3.theta_of_exponent((2, 0)).unwrap(), &d12));
    }

    #[test]
    fn grid_measure() {
        for k in 1..=6 {
            let mu = measure_fkw(k).unwrap();
            assert_eq!(mu.len() as u32, 3 * (k + 4) * (k + 4));
            assert!(mu.is_invariant());
        }
        assert_eq!(measure_fkw(2).unwrap().len(), 108);
        // Trapezoid exactness: the grid integrates characters of low degree exactly.
        let mu = measure_fkw(4).unwrap();
        for (m, n) in [(1, 0), (0, 1), (2, 0), (1, 1), (3, 0)] {
            let exact = moment_walk(WalkKind::Torus, m, n).to_f64().unwrap();
            assert!((mu.moment(m, n) - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn ak_measure_matches_nimreps() {
        for k in 1..=8 {
            let mu = measure_ak(k).unwrap();
            assert!((mu.mass() - 1.0).abs() < 1e-9, "k={k}: {}", mu.mass());
            assert!(mu.is_invariant());
            if k >= 2 {
                assert!(mu.moment(1, 0).abs() < 1e-9);
            }
        }
        for k in 4..=6 {
            let mu = measure_ak(k).unwrap();
            let level = build_level(k).unwrap();
            for total in 0..=4 {
                for m in 0..=total {
                    let n = total - m;
                    let want = level.nimrep_moment(m, n).unwrap().to_f64().unwrap();
                    assert!((mu.moment(m, n) - want).abs() < 1e-8, "k={k} ({m},{n})");
                    if k >= 3 * total {
                        assert_eq!(level.nimrep_moment(m, n).unwrap(), moment_walk(WalkKind::Cone, m, n));
                    }
                }
            }
        }
        assert!((measure_ak(6).unwrap().moment(2, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exceptional_masses() {
        let mass = |e, v| measure_exceptional(e, v).mass();
        assert!((mass(Exceptional::E3, Variant::Printed) - 5.0 / 6.0).abs() < 1e-9);
        assert!((mass(Exceptional::E3M, Variant::Printed) - 1.0).abs() < 1e-9);
        assert!((mass(Exceptional::E4Star, Variant::Printed) - 7.0 / 6.0).abs() < 1e-9);
        assert!(mass(Exceptional::E4, Variant::Printed) > 2.0);
        for e in Exceptional::ALL {
            let mu = measure_exceptional(e, Variant::Corrected);
            assert!((mu.mass() - 1.0).abs() < 1e-9, "{e}: {}", mu.mass());
            assert!(mu.is_invariant());
            assert!(measure_exceptional(e, Variant::Printed).is_invariant());
        }
        let star = measure_exceptional(Exceptional::E4Star, Variant::Printed);
        let dirac = orbit(&pt(1, 6, 8), &d12_elements());
        assert_eq!(dirac.len(), 12);
        assert!(dirac.iter().all(|p| (star.weight(p) - 1.0 / 18.0).abs() < 1e-15));
    }

    #[test]
    fn audits() {
        for e in Exceptional::ALL {
            let a = audit_measure(e, Variant::Corrected);
            assert!(a.j_column_ok(), "{e}");
            assert!(a.moments.iter().all(|m| m.ok), "{e}: {:?}", a.moments);
            assert!((a.mass - 1.0).abs() < 1e-9);
        }
        let e3 = audit_measure(Exceptional::E3, Variant::Printed);
        assert!(e3.flags.iter().any(|f| f.check == "total mass" && (f.computed - 5.0 / 6.0).abs() < 1e-9));
        let e3c = audit_measure(Exceptional::E3, Variant::Corrected);
        assert_eq!(e3c.corrections.len(), 1);
        let e3m = audit_measure(Exceptional::E3M, Variant::Printed);
        assert!(!e3m.flags.iter().any(|f| f.check == "total mass"));
        let e4 = audit_measure(Exceptional::E4, Variant::Printed);
        assert!(e4.flags.iter().any(|f| f.check.starts_with("3|psi|^2")));
        assert!(!e4.flags.iter().any(|f| f.check.starts_with("24|psi|^2")));
        let star = audit_measure(Exceptional::E4Star, Variant::Printed);
        assert!(star.flags.iter().any(|f| f.check == "total mass"));
    }

    #[test]
    fn names_and_json() {
        assert_eq!("e4star".parse::<Exceptional>().unwrap(), Exceptional::E4Star);
        assert!("E5".parse::<Exceptional>().is_err());
        assert_eq!(measure_by_name("d((2))", Variant::Printed).unwrap().len(), 9);
        assert_eq!(measure_by_name("d(21/4,1/21)", Variant::Printed).unwrap().len(), 36);
        assert_eq!(measure_by_name("F2W", Variant::Printed).unwrap().len(), 108);
        assert!(measure_by_name("A3", Variant::Printed).is_ok());
        assert!(measure_by_name("nope", Variant::Printed).is_err());
        let json = measure_dn(r(2, 1)).unwrap().to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["atoms"].as_array().unwrap().len(), 9);
        assert_eq!(v["invariance"], "D12");
        assert!(json.contains("1.1111111111111110e-1"));
    }
}
