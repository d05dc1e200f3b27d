//! Spectral densities of the fundamental characters, under the uniform
//! measure on the torus and under Haar measure on G2.
//!
//! For the `x`-marginals there are closed forms in complete elliptic
//! integrals. Every density also has a quadrature route that integrates
//! `12/|J|` (torus) or `|J|/16π⁴` (Haar) across a section of 𝔇.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;
use twofloat::TwoFloat;

use crate::jacobian_geometry::{quintic_roots_in_x, x_sections, BoundaryCurve, Y_CUSP_HIGH, Y_CUSP_LOW};
use crate::quadrature::{QuadEstimate, TanhSinh};

/// Plots of these densities are conventionally drawn scaled by `4π²`.
pub const PLOT_SCALE: f64 = 4.0 * PI * PI;
/// Values above this (or non-finite ones) are capped on export.
pub const CLIP_CAP: f64 = 1e3;
pub const MAX_MOMENT_ORDER: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("K(m) diverges for m = {0} ≥ 1")]
    DivergentK(f64),
    #[error("E(m) is not real for m = {0} > 1")]
    EllipticDomain(f64),
    #[error("t = {t} is outside the open support ({lo}, {hi})")]
    OutsideSupport { t: f64, lo: f64, hi: f64 },
    #[error("{0} has no closed form")]
    NoClosedForm(DensityTarget),
    #[error("moment order {0} exceeds {MAX_MOMENT_ORDER}")]
    MomentOrder(u32),
}

/// Arithmetic–geometric mean iteration shared by `K` and `E`. Returns the
/// mean and `Σ 2^{n−1} c_n²`. The `c_n` follow `c_{n+1} = c_n²/4a_{n+1}`
/// rather than `(a_n − b_n)/2`, which would lose the low bits of small `m`.
fn agm(m: f64) -> (f64, f64) {
    let (mut a, mut b) = (1.0, (1.0 - m).sqrt());
    let mut c2 = m;
    let mut c2_sum = 0.5 * m;
    let mut pow = 0.5;
    for _ in 0..64 {
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
        let c = c2 / (4.0 * a);
        c2 = c * c;
        pow *= 2.0;
        c2_sum += pow * c2;
        if c.abs() <= 1e-17 * a {
            break;
        }
    }
    (a, c2_sum)
}

/// Complete elliptic integral of the first kind, parameter convention:
/// `K(m) = ∫_0^{π/2} (1 − m sin²φ)^{−1/2} dφ`.
pub fn ellip_k(m: f64) -> Result<f64, DensityError> {
    if m >= 1.0 || m.is_nan() {
        return Err(DensityError::DivergentK(m));
    }
    Ok(FRAC_PI_2 / agm(m).0)
}

/// `E(m) = ∫_0^{π/2} (1 − m sin²φ)^{1/2} dφ`.
pub fn ellip_e(m: f64) -> Result<f64, DensityError> {
    if m > 1.0 || m.is_nan() {
        return Err(DensityError::EllipticDomain(m));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    let (mean, c2_sum) = agm(m);
    Ok(FRAC_PI_2 / mean * (1.0 - c2_sum))
}

/// `v(x) = 16(x+2)^{3/2} / (8(x+2)^{3/2} − x² − 22x − 13)`; equals 1 at `x = −1`.
pub fn v_of_x(x: f64) -> f64 {
    let s = (x + 2.0).max(0.0).powf(1.5);
    16.0 * s / (8.0 * s - x * x - 22.0 * x - 13.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityTarget {
    TorusV1,
    TorusV2,
    HaarV1,
    HaarV2,
}

impl DensityTarget {
    pub const ALL: [DensityTarget; 4] =
        [DensityTarget::TorusV1, DensityTarget::TorusV2, DensityTarget::HaarV1, DensityTarget::HaarV2];

    pub fn name(self) -> &'static str {
        match self {
            DensityTarget::TorusV1 => "torus-v1",
            DensityTarget::TorusV2 => "torus-v2",
            DensityTarget::HaarV1 => "haar-v1",
            DensityTarget::HaarV2 => "haar-v2",
        }
    }

    pub fn support(self) -> (f64, f64) {
        if self.is_first() {
            (-2.0, 7.0)
        } else {
            (-2.0, 14.0)
        }
    }

    pub fn is_haar(self) -> bool {
        matches!(self, DensityTarget::HaarV1 | DensityTarget::HaarV2)
    }

    fn is_first(self) -> bool {
        matches!(self, DensityTarget::TorusV1 | DensityTarget::HaarV1)
    }

    /// Interior points where the section of 𝔇 changes shape. The torus
    /// densities blow up logarithmically at some of them.
    pub fn breakpoints(self) -> &'static [f64] {
        if self.is_first() {
            &[-1.0]
        } else {
            &[Y_CUSP_LOW, Y_CUSP_HIGH]
        }
    }

    pub fn has_closed_form(self) -> bool {
        self.is_first()
    }

    /// `1` for torus densities, `1/16π⁴` for Haar densities.
    pub fn normalization(self) -> f64 {
        if self.is_haar() {
            1.0 / (16.0 * PI.powi(4))
        } else {
            1.0
        }
    }
}

impl fmt::Display for DensityTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DensityTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DensityTarget::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| format!("unknown density target `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluator {
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityProfile {
    pub target: DensityTarget,
    pub evaluator: Evaluator,
}

impl DensityProfile {
    pub fn new(target: DensityTarget, evaluator: Evaluator) -> Result<Self, DensityError> {
        if evaluator == Evaluator::ClosedForm && !target.has_closed_form() {
            return Err(DensityError::NoClosedForm(target));
        }
        Ok(DensityProfile { target, evaluator })
    }

    /// Closed form where one exists, quadrature otherwise.
    pub fn preferred(target: DensityTarget) -> Self {
        let evaluator = if target.has_closed_form() { Evaluator::ClosedForm } else { Evaluator::Quadrature };
        DensityProfile { target, evaluator }
    }

    pub fn support(&self) -> (f64, f64) {
        self.target.support()
    }

    pub fn normalization(&self) -> f64 {
        self.target.normalization()
    }
}

/// Closed form of the torus `x`-density. Logarithmically infinite at `x = −1`.
pub fn torus_v1_closed(x: f64) -> Result<f64, DensityError> {
    let v = v_of_x(x);
    let q = (x + 2.0).powf(0.75);
    if x == -1.0 {
        return Ok(f64::INFINITY);
    }
    if x < -1.0 {
        Ok(3.0 * v.sqrt() / (2.0 * PI * PI * q) * ellip_k(v)?)
    } else {
        Ok(3.0 / (2.0 * PI * PI * q) * ellip_k(1.0 / v)?)
    }
}

/// Closed form of `∫|J| dy` over the vertical section at `x`; the Haar
/// density is this divided by `16π⁴`.
///
/// Towards `x = 7` the bracket is many orders of magnitude smaller than
/// either of its terms, so everything here runs in double-double precision.
pub fn haar_v1_closed_unnormalized(x: f64) -> Result<f64, DensityError> {
    let xd = TwoFloat::from(x);
    let t = xd + 2.0;
    let root = dd_sqrt(t);
    let s = t * root * 8.0;
    let r = (xd + 22.0) * xd + 13.0;
    let q = (((xd + 236.0) * xd + 1662.0) * xd + 2876.0) * xd + 1705.0;
    let pi2 = twofloat::consts::PI * twofloat::consts::PI;
    let value = if x <= -1.0 {
        let v = s * 2.0 / (s - r);
        check_elliptic(v)?;
        let (k, e) = ellip_ke_dd(v);
        let bracket = q * e - (s + r) * r * k;
        pi2 / 15.0 * dd_sqrt(s - r) * bracket
    } else {
        let w = (s - r) / (s * 2.0);
        check_elliptic(w)?;
        let (k, e) = ellip_ke_dd(w);
        let bracket = q * e * 2.0 - (s + r) * (s * 3.0 + r) * k;
        pi2 * 2.0 / 15.0 * dd_sqrt(root) * root * bracket
    };
    Ok(value.hi() + value.lo())
}

fn check_elliptic(m: TwoFloat) -> Result<(), DensityError> {
    if m.hi() >= 1.0 || m.hi().is_nan() {
        Err(DensityError::DivergentK(m.hi()))
    } else {
        Ok(())
    }
}

/// `TwoFloat::sqrt` is only accurate to about one `f64` ulp; one Newton
/// step from the `f64` root restores full double-double accuracy.
fn dd_sqrt(t: TwoFloat) -> TwoFloat {
    let y = TwoFloat::from(t.hi().sqrt());
    if y.hi() == 0.0 {
        return y;
    }
    y + (t - y * y) / (y * 2.0)
}

/// `K(m)` and `E(m)` by the same AGM iteration as [`agm`], in double-double.
fn ellip_ke_dd(m: TwoFloat) -> (TwoFloat, TwoFloat) {
    let (mut a, mut b) = (TwoFloat::from(1.0), dd_sqrt(-m + 1.0));
    let mut c2 = m;
    let mut c2_sum = m * 0.5;
    let mut pow = 0.5;
    for _ in 0..64 {
        (a, b) = ((a + b) * 0.5, dd_sqrt(a * b));
        let c = c2 / (a * 4.0);
        c2 = c * c;
        pow *= 2.0;
        c2_sum += c2 * pow;
        if c.hi().abs() <= 1e-33 * a.hi() {
            break;
        }
    }
    let k = twofloat::consts::FRAC_PI_2 / a;
    (k, k * (-c2_sum + 1.0))
}

/// A section of 𝔇 on which `J²/16π⁴ = −4 (u − a)(u − b) ∏ (u − r_i)`,
/// integrated over `u ∈ [a, b]`. It is stored in the local coordinate
/// `z = u − a ∈ [0, len]`, with each remaining root given by its offsets
/// `a − r` and `b − r`, so that nothing is lost to cancellation when the
/// section is short or a root sits close to an end.
struct Section {
    len: f64,
    others: Vec<(Complex64, Complex64)>,
}

impl Section {
    /// Integrate `g(J²/16π⁴)` across the section, splitting at the real
    /// parts of complex roots to keep near-singular bumps at piece ends.
    ///
    /// A section that has collapsed below rounding is given a tiny positive
    /// length: `∫ dz/√(z(len − z))` does not depend on the length, and the
    /// Haar integrand vanishes with it.
    fn integrate(&self, rule: &TanhSinh, g: impl Fn(f64) -> f64) -> QuadEstimate {
        let len = self.len.max(1e-30);
        let mut cuts = vec![0.0, len];
        for (from_a, _) in &self.others {
            let z = -from_a.re;
            if from_a.im != 0.0 && z > 0.0 && z < len {
                cuts.push(z);
            }
        }
        cuts.sort_by(f64::total_cmp);
        let mut total = QuadEstimate { value: 0.0, error: 0.0, evaluations: 0, converged: true };
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let est = rule.integrate(p, q, |_, dl, dr| {
                let za = if p == 0.0 { dl } else { p + dl };
                let zb = if q == len { dr } else { (len - q) + dr };
                let mut prod = Complex64::new(4.0 * za * zb, 0.0);
                for &(from_a, from_b) in &self.others {
                    prod *= if from_a.norm() <= from_b.norm() { za + from_a } else { from_b - zb };
                }
                g(prod.re.max(0.0))
            });
            total.value += est.value;
            total.error += est.error;
            total.evaluations += est.evaluations;
            total.converged &= est.converged;
        }
        total
    }
}

/// The vertical section at `x`, in `u = y + 5(x+1)`. There the roots are
/// `±2(x+2)^{3/2}` and `(x² + 22x + 13)/4`, and the gaps between them follow
/// from `64(x+2)³ − (x² + 22x + 13)² = (7 − x)³(x + 1)`.
fn vertical_section(x: f64) -> Section {
    let s = (x + 2.0).max(0.0);
    let big = 8.0 * s * s.sqrt();
    let r = x * x + 22.0 * x + 13.0;
    let identity = (7.0 - x).powi(3) * (x + 1.0);
    // g = 8(x+2)^{3/2} − r vanishes at 7, h = 8(x+2)^{3/2} + r at −1.
    let (g, h) = if x < 0.0 { (big - r, identity / (big - r)) } else { (identity / (big + r), big + r) };
    let real = |v: f64| Complex64::new(v, 0.0);
    if x <= -1.0 {
        // [−2S, 2S] with the C4 root below it.
        Section { len: big / 2.0, others: vec![(real(-h / 4.0), real(g / 4.0))] }
    } else {
        // [r/4, 2S] with the lower cubic root below it.
        Section { len: g / 4.0, others: vec![(real(h / 4.0), real(big / 2.0))] }
    }
}

fn horizontal_sections(y: f64) -> Vec<Section> {
    let [c0, c1, c2, c4, fifth] = quintic_roots_in_x(y);
    x_sections(y)
        .into_iter()
        .map(|((a, left), (b, right))| {
            let mut others = vec![c0, c1, c2];
            for (end, arc) in [(a, left), (b, right)] {
                if arc != BoundaryCurve::C4 {
                    let nearest = (0..others.len())
                        .min_by(|&i, &j| (others[i] - end).norm().total_cmp(&(others[j] - end).norm()))
                        .expect("an unused cubic root");
                    others.swap_remove(nearest);
                }
            }
            if left != BoundaryCurve::C4 && right != BoundaryCurve::C4 {
                others.push(c4);
            }
            others.push(fifth);
            let others = others.into_iter().map(|r| (a - r, b - r)).collect();
            Section { len: b - a, others }
        })
        .collect()
}

fn inner_rule() -> TanhSinh {
    TanhSinh { rel_tol: 1e-12, abs_tol: 1e-15, max_level: 10 }
}

/// Quadrature route: the density at `t` with the inner error estimate.
pub fn density_quadrature(target: DensityTarget, t: f64) -> Result<QuadEstimate, DensityError> {
    check_support(target, t)?;
    let sections = if target.is_first() { vec![vertical_section(t)] } else { horizontal_sections(t) };
    let rule = inner_rule();
    let mut total = QuadEstimate { value: 0.0, error: 0.0, evaluations: 0, converged: true };
    for s in &sections {
        let q = if target.is_haar() {
            // |J| / 16π⁴ with |J| = 4π² √(J²/16π⁴).
            s.integrate(&rule, |j2| j2.sqrt() / (4.0 * PI * PI))
        } else {
            // 12 / |J|.
            s.integrate(&rule, |j2| 3.0 / (PI * PI * j2.sqrt()))
        };
        total.value += q.value;
        total.error += q.error;
        total.evaluations += q.evaluations;
        total.converged &= q.converged;
    }
    Ok(total)
}

fn check_support(target: DensityTarget, t: f64) -> Result<(), DensityError> {
    let (lo, hi) = target.support();
    if t > lo && t < hi {
        Ok(())
    } else {
        Err(DensityError::OutsideSupport { t, lo, hi })
    }
}

pub fn density_eval(profile: &DensityProfile, t: f64) -> Result<f64, DensityError> {
    check_support(profile.target, t)?;
    match (profile.evaluator, profile.target) {
        (Evaluator::ClosedForm, DensityTarget::TorusV1) => torus_v1_closed(t),
        (Evaluator::ClosedForm, DensityTarget::HaarV1) => Ok(haar_v1_closed_unnormalized(t)? * profile.normalization()),
        (Evaluator::ClosedForm, target) => Err(DensityError::NoClosedForm(target)),
        (Evaluator::Quadrature, target) => {
            if !target.is_haar() && target.breakpoints().contains(&t) {
                return Ok(f64::INFINITY);
            }
            Ok(density_quadrature(target, t)?.value)
        }
    }
}

/// `∫ t^r ρ(t) dt` over the support, split at the breakpoints.
pub fn density_moment(profile: &DensityProfile, r: u32) -> Result<QuadEstimate, DensityError> {
    if r > MAX_MOMENT_ORDER {
        return Err(DensityError::MomentOrder(r));
    }
    let (lo, hi) = profile.support();
    let mut points = vec![lo];
    points.extend_from_slice(profile.target.breakpoints());
    points.push(hi);
    let rule = TanhSinh { rel_tol: 1e-10, abs_tol: 1e-12, max_level: 8 };
    let mut failure = None;
    let q = rule.integrate_pieces(&points, |t, dl, dr| {
        // Nodes that round onto a piece end carry negligible weight, and the
        // densities have at worst logarithmic singularities there.
        if dl.min(dr) < f64::EPSILON * t.abs().max(1.0) {
            return 0.0;
        }
        match density_eval(profile, t) {
            Ok(v) => t.powi(r as i32) * v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(q),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    pub t: f64,
    pub density: f64,
    pub scale: f64,
    pub clipped: bool,
}

/// Limit of the density at a support endpoint, approached from inside.
/// Values that still grow between offsets `1e-8` and `1e-12` mean the limit
/// is infinite.
fn endpoint_limit(profile: &DensityProfile, t: f64, inward: f64) -> Result<f64, DensityError> {
    let (lo, hi) = profile.support();
    let width = hi - lo;
    let near = density_eval(profile, t + inward * 1e-12 * width)?;
    let far = density_eval(profile, t + inward * 1e-8 * width)?;
    if near > far * (1.0 + 1e-3) + 1e-12 {
        Ok(f64::INFINITY)
    } else {
        Ok(near)
    }
}

/// Uniform grid of `n ≥ 2` points over the closed support. Endpoint values
/// are limits taken from inside; infinite or huge values are capped at
/// [`CLIP_CAP`] and flagged.
pub fn density_grid(profile: &DensityProfile, n: usize) -> Result<Vec<DensityRow>, DensityError> {
    let (lo, hi) = profile.support();
    let n = n.max(2);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let value = if i == 0 {
                endpoint_limit(profile, lo, 1.0)?
            } else if i == n - 1 {
                endpoint_limit(profile, hi, -1.0)?
            } else {
                density_eval(profile, t)?
            };
            let clipped = !value.is_finite() || value > CLIP_CAP;
            // Rounding leaves values like -1e-30 where the Haar weight vanishes.
            let density = if clipped { CLIP_CAP } else { value.max(0.0) };
            Ok(DensityRow { t, density, scale: PLOT_SCALE, clipped })
        })
        .collect()
}

/// `t,density,scale,clipped` with 12 significant digits.
pub fn grid_to_csv(rows: &[DensityRow]) -> String {
    let mut out = String::from("t,density,scale,clipped\n");
    for r in rows {
        out.push_str(&format!("{:.11e},{:.11e},{:.11e},{}\n", r.t, r.density, r.scale, u8::from(r.clipped)));
    }
    out
}

/// Composite trapezoid rule over grid rows.
pub fn trapezoid(rows: &[DensityRow]) -> f64 {
    rows.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].density + w[1].density)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_values() {
        assert!((ellip_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((ellip_e(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(ellip_e(1.0).unwrap(), 1.0);
        assert!(matches!(ellip_k(1.0), Err(DensityError::DivergentK(_))));
        // Defining integrals by quadrature.
        for m in [-3.0, 0.3, 0.5, 0.9, 0.999] {
            let k = TanhSinh::default().integrate(0.0, FRAC_PI_2, |p, _, _| 1.0 / (1.0 - m * p.sin().powi(2)).sqrt());
            let e = TanhSinh::default().integrate(0.0, FRAC_PI_2, |p, _, _| (1.0 - m * p.sin().powi(2)).sqrt());
            assert!((ellip_k(m).unwrap() - k.value).abs() < 1e-12, "K({m})");
            assert!((ellip_e(m).unwrap() - e.value).abs() < 1e-12, "E({m})");
        }
        // K(1/2) = Γ(1/4)² / (4√π).
        assert!((ellip_k(0.5).unwrap() - 1.854_074_677_301_372).abs() < 1e-14);
    }

    #[test]
    fn v_values() {
        assert_eq!(v_of_x(-2.0), 0.0);
        assert!((v_of_x(-1.0) - 1.0).abs() < 1e-15);
        for i in 1..100 {
            let x = -2.0 + 9.0 * i as f64 / 100.0;
            let den = 8.0 * (x + 2.0).powf(1.5) - x * x - 22.0 * x - 13.0;
            assert!((v_of_x(x) * den - 16.0 * (x + 2.0).powf(1.5)).abs() < 1e-11);
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for i in 0..50 {
            let x = -2.0 + 9.0 * (i as f64 + 0.5) / 50.0;
            let t = torus_v1_closed(x).unwrap();
            let tq = density_quadrature(DensityTarget::TorusV1, x).unwrap();
            assert!(((t - tq.value) / t).abs() < 1e-9, "torus x={x}: {t} vs {tq:?}");
            let h = haar_v1_closed_unnormalized(x).unwrap() * DensityTarget::HaarV1.normalization();
            let hq = density_quadrature(DensityTarget::HaarV1, x).unwrap();
            assert!(((h - hq.value) / h).abs() < 1e-6, "haar x={x}: {h} vs {hq:?}");
        }
    }

    #[test]
    fn reference_values() {
        assert!((torus_v1_closed(0.0).unwrap() - 0.150564).abs() < 1e-6);
        assert!((torus_v1_closed(-1.9).unwrap() - 0.190268).abs() < 1e-6);
        assert!((haar_v1_closed_unnormalized(0.0).unwrap() - 570.871).abs() < 1e-3);
        // Finite limit at the left end, logarithmic blow-up at −1 from both sides.
        let limit = 1.0 / (PI * 3f64.sqrt());
        assert!((torus_v1_closed(-2.0 + 1e-9).unwrap() - limit).abs() < 1e-5);
        let (l, r) = (torus_v1_closed(-1.0 - 1e-8).unwrap(), torus_v1_closed(-1.0 + 1e-8).unwrap());
        assert!(l > 1.0 && r > 1.0 && (l / r - 1.0).abs() < 0.05);
    }

    #[test]
    fn profile_rules() {
        assert!(DensityProfile::new(DensityTarget::TorusV2, Evaluator::ClosedForm).is_err());
        let p = DensityProfile::preferred(DensityTarget::HaarV1);
        assert!(matches!(density_eval(&p, 7.0), Err(DensityError::OutsideSupport { .. })));
        assert!(density_eval(&p, 6.999).unwrap() < 1e-12);
        assert!(density_eval(&p, -1.999).unwrap() < 1e-6);
        assert_eq!("haar-v2".parse::<DensityTarget>().unwrap(), DensityTarget::HaarV2);
    }

    #[test]
    fn moments_match_walks() {
        use crate::walk_moments::{moment_walk, WalkKind};
        use num_traits::ToPrimitive;
        for target in DensityTarget::ALL {
            let kind = if target.is_haar() { WalkKind::Cone } else { WalkKind::Torus };
            for evaluator in [Evaluator::ClosedForm, Evaluator::Quadrature] {
                let Ok(profile) = DensityProfile::new(target, evaluator) else { continue };
                for r in 0..=6 {
                    let (m, n) = if target.is_first() { (r, 0) } else { (0, r) };
                    let exact = moment_walk(kind, m, n).to_f64().unwrap();
                    let got = density_moment(&profile, r).unwrap();
                    assert!(
                        (got.value - exact).abs() <= 1e-7 * exact.abs().max(1.0),
                        "{target} {evaluator:?} r={r}: {} vs {exact}",
                        got.value
                    );
                }
            }
        }
    }

    #[test]
    fn grid_and_clipping() {
        let p = DensityProfile::preferred(DensityTarget::HaarV1);
        let rows = density_grid(&p, 512).unwrap();
        assert!((trapezoid(&rows) - 1.0).abs() < 1e-3);
        // Ten points on [−2, 7] land exactly on the singular point x = −1.
        let rows = density_grid(&DensityProfile::preferred(DensityTarget::TorusV1), 10).unwrap();
        assert!(rows[1].clipped && rows[1].density == CLIP_CAP);
        assert_eq!(rows.iter().filter(|r| r.clipped).count(), 1);
        let csv = grid_to_csv(&rows);
        assert!(csv.starts_with("t,density,scale,clipped\n"));
        assert_eq!(csv.lines().count(), 11);
        // torus-v2 diverges at its lower endpoint as well as at y = 5.
        let rows = density_grid(&DensityProfile::preferred(DensityTarget::TorusV2), 17).unwrap();
        let flagged: Vec<f64> = rows.iter().filter(|r| r.clipped).map(|r| r.t).collect();
        assert_eq!(flagged, vec![-2.0, 5.0]);
    }
}
