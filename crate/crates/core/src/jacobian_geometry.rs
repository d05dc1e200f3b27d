//! The character map `Ψ(θ) = (χ1(θ), χ2(θ))`, its Jacobian, and the
//! curvilinear triangle 𝔇 = Ψ(𝕋²) in the `(x, y)` plane.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::characters::{chi_fund_eval, Fundamental};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("{coordinate} = {value} is outside the range [{lo}, {hi}] of curve {curve:?}")]
    OutOfRange { curve: BoundaryCurve, coordinate: &'static str, value: f64, lo: f64, hi: f64 },
}

pub const X_RANGE: (f64, f64) = (-2.0, 7.0);
pub const Y_RANGE: (f64, f64) = (-2.0, 14.0);
/// The two `y`-values where the cubic boundary changes its number of real
/// branches.
pub const Y_CUSP_LOW: f64 = 10.0 / 27.0;
pub const Y_CUSP_HIGH: f64 = 5.0;
pub const X_CUSP: f64 = 7.0 / 9.0;

const DOMAIN_TOL: f64 = 1e-9;

pub fn psi_map(theta: (f64, f64)) -> (f64, f64) {
    (chi_fund_eval(Fundamental::Rho1, theta), chi_fund_eval(Fundamental::Rho2, theta))
}

/// `J = det ∂(x,y)/∂(θ1,θ2)` as a signed sum of six cosines.
pub fn jacobian_theta(theta: (f64, f64)) -> f64 {
    let c = |a: f64, b: f64| (TAU * (a * theta.0 + b * theta.1)).cos();
    8.0 * PI * PI * (c(2.0, 1.0) + c(1.0, -3.0) + c(3.0, -2.0) - c(1.0, 2.0) - c(3.0, -1.0) - c(2.0, -3.0))
}

/// `J` as `256π²` times a product of six sines, one per reflection line.
pub fn jacobian_sine_product(theta: (f64, f64)) -> f64 {
    let s = |a: f64, b: f64| (PI * (a * theta.0 + b * theta.1)).sin();
    256.0 * PI * PI * s(1.0, 0.0) * s(0.0, 1.0) * s(1.0, 1.0) * s(1.0, -1.0) * s(2.0, -1.0) * s(1.0, -2.0)
}

/// The cubic factor `4x³ − x² − 2x − 10xy − y² − 10y + 7`; non-negative on 𝔇.
pub fn cubic_factor(x: f64, y: f64) -> f64 {
    4.0 * x * x * x - x * x - 2.0 * x - 10.0 * x * y - y * y - 10.0 * y + 7.0
}

/// The quadratic factor `x² + 2x − 7 − 4y`; non-positive on 𝔇.
pub fn quadratic_factor(x: f64, y: f64) -> f64 {
    x * x + 2.0 * x - 7.0 - 4.0 * y
}

/// `J²/16π⁴` as a polynomial in `(x, y)`.
///
/// The two factors have opposite signs on 𝔇, so the product carries a minus
/// sign to be the square of a real Jacobian.
pub fn jacobian_sq_xy(x: f64, y: f64) -> f64 {
    -cubic_factor(x, y) * quadratic_factor(x, y)
}

/// Membership in the closed region 𝔇, with tolerance `1e−9` on each test.
pub fn domain_contains(x: f64, y: f64) -> bool {
    let t = DOMAIN_TOL;
    (X_RANGE.0 - t..=X_RANGE.1 + t).contains(&x)
        && (Y_RANGE.0 - t..=Y_RANGE.1 + t).contains(&y)
        && quadratic_factor(x, y) <= t
        && cubic_factor(x, y) >= -t
}

/// The four boundary arcs of 𝔇. `C1` and `C2` are the right and left arcs of
/// the upper cubic branch (meeting at the cusp `(7/9, 10/27)`), `C3` the lower
/// cubic branch, `C4` the parabola on which the quadratic factor vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BoundaryCurve {
    C1,
    C2,
    C3,
    C4,
}

impl BoundaryCurve {
    pub const ALL: [BoundaryCurve; 4] = [BoundaryCurve::C1, BoundaryCurve::C2, BoundaryCurve::C3, BoundaryCurve::C4];

    pub fn y_range(self) -> (f64, f64) {
        match self {
            BoundaryCurve::C1 => (Y_CUSP_LOW, 14.0),
            BoundaryCurve::C2 => (Y_CUSP_LOW, Y_CUSP_HIGH),
            BoundaryCurve::C3 => (-2.0, Y_CUSP_HIGH),
            BoundaryCurve::C4 => (-2.0, 14.0),
        }
    }

    pub fn x_range(self) -> (f64, f64) {
        match self {
            BoundaryCurve::C1 => (X_CUSP, 7.0),
            BoundaryCurve::C2 => (-2.0, X_CUSP),
            BoundaryCurve::C3 => (-2.0, -1.0),
            BoundaryCurve::C4 => (-1.0, 7.0),
        }
    }

    /// Range of the cubic parameter `p` with `x = (2p+1)² − 2` on this arc.
    fn p_range(self) -> Option<(f64, f64)> {
        match self {
            BoundaryCurve::C1 => Some((1.0 / 3.0, 1.0)),
            BoundaryCurve::C2 => Some((-0.5, 1.0 / 3.0)),
            BoundaryCurve::C3 => Some((-1.0, -0.5)),
            BoundaryCurve::C4 => None,
        }
    }
}

fn check_range(
    curve: BoundaryCurve,
    coordinate: &'static str,
    value: f64,
    (lo, hi): (f64, f64),
) -> Result<(), GeometryError> {
    let slack = 1e-12 * (1.0 + value.abs());
    if value.is_nan() || value < lo - slack || value > hi + slack {
        Err(GeometryError::OutOfRange { curve, coordinate, value, lo, hi })
    } else {
        Ok(())
    }
}

/// The three roots in `p` of `16p³ + 4p² − 8p + (2 − y) = 0` from the closed
/// cube-root formula `12p = −1 − εP − 25ε̄/P`, `ε³ = 1`, with
/// `P³ = 145 − 54y + 2√(27(27y² − 145y + 50))` on the principal branch.
pub fn cubic_roots_p(y: f64) -> [Complex64; 3] {
    let disc = Complex64::new(27.0 * (27.0 * y * y - 145.0 * y + 50.0), 0.0).sqrt();
    let p_cubed = Complex64::new(145.0 - 54.0 * y, 0.0) + 2.0 * disc;
    let p = p_cubed.powf(1.0 / 3.0);
    let eps = |k: u32| Complex64::from_polar(1.0, TAU * k as f64 / 3.0);
    [0, 1, 2].map(|k| (-1.0 - eps(k) * p - 25.0 * eps(k).conj() / p) / 12.0)
}

/// Points `(p₀, y₀)` on the boundary cubic where either the root is
/// double (`y₀ = 5`, `10/27`) or the arc ends at a corner (`y₀ = −2`, `14`).
/// Each entry carries the exact Taylor coefficients of
/// `16p³ + 4p² − 8p + 2` about `p₀` and the image `x₀ = x(p₀)`.
#[derive(Debug)]
struct Anchor {
    p0: f64,
    y0: f64,
    x0: f64,
    c1: f64,
    c2: f64,
}

const ANCHORS: [Anchor; 4] = [
    Anchor { p0: -1.0, y0: -2.0, x0: -1.0, c1: 32.0, c2: -44.0 },
    Anchor { p0: -0.5, y0: 5.0, x0: -2.0, c1: 0.0, c2: -20.0 },
    Anchor { p0: 1.0 / 3.0, y0: 10.0 / 27.0, x0: 7.0 / 9.0, c1: 0.0, c2: 20.0 },
    Anchor { p0: 1.0, y0: 14.0, x0: 7.0, c1: 48.0, c2: 52.0 },
];

/// A cubic root polished by Newton's method in `q = p − p₀` about the
/// nearest anchor, where the constant term `y₀ − y` carries no rounding
/// and near-double roots keep their accuracy.
#[derive(Clone, Copy, Debug)]
struct CubicRoot {
    anchor: &'static Anchor,
    q: Complex64,
}

impl CubicRoot {
    fn p(&self) -> Complex64 {
        self.q + self.anchor.p0
    }

    /// `x = x₀ + 4q(q + 2p₀ + 1)`.
    fn x(&self) -> Complex64 {
        self.q * 4.0 * (self.q + (2.0 * self.anchor.p0 + 1.0)) + self.anchor.x0
    }
}

fn polish(p: Complex64, y: f64) -> CubicRoot {
    let anchor =
        ANCHORS.iter().min_by(|a, b| (p - a.p0).norm().total_cmp(&(p - b.p0).norm())).expect("anchors are non-empty");
    let c0 = anchor.y0 - y;
    let mut q = p - anchor.p0;
    for _ in 0..40 {
        let f = ((q * 16.0 + anchor.c2) * q + anchor.c1) * q + c0;
        let df = (q * 48.0 + 2.0 * anchor.c2) * q + anchor.c1;
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        q -= step;
        if step.norm() <= 1e-17 * (q.norm() + 1e-300) {
            break;
        }
    }
    CubicRoot { anchor, q }
}

fn polished_roots(y: f64) -> [CubicRoot; 3] {
    cubic_roots_p(y).map(|p| polish(p, y))
}

/// Real roots of the boundary cubic, sorted by `p`.
fn real_roots(y: f64) -> Vec<CubicRoot> {
    let mut out: Vec<CubicRoot> =
        polished_roots(y).into_iter().filter(|r| r.p().im.abs() <= 1e-6 * (1.0 + r.p().re.abs())).collect();
    out.sort_by(|a, b| a.p().re.total_cmp(&b.p().re));
    out
}

pub fn x_of_p(p: f64) -> f64 {
    -1.0 + 4.0 * p + 4.0 * p * p
}

/// `x` on the given arc at height `y`.
///
/// The cubic roots are assigned to arcs by the range of `p` they fall in,
/// since the labelling of cube-root branches depends on the branch cut.
pub fn boundary_x_of_y(curve: BoundaryCurve, y: f64) -> Result<f64, GeometryError> {
    check_range(curve, "y", y, curve.y_range())?;
    let y = y.clamp(curve.y_range().0, curve.y_range().1);
    let Some((lo, hi)) = curve.p_range() else {
        return Ok(-1.0 + 2.0 * (y + 2.0).max(0.0).sqrt());
    };
    let dist = |p: f64| (lo - p).max(p - hi).max(0.0);
    let root = real_roots(y)
        .into_iter()
        .min_by(|a, b| dist(a.p().re).total_cmp(&dist(b.p().re)))
        .expect("a cubic has a real root");
    if dist(root.p().re) > 0.0 {
        return Ok(x_of_p(root.p().re.clamp(lo, hi)));
    }
    Ok(root.x().re)
}

/// `y` on the given arc above `x`.
pub fn boundary_y_of_x(curve: BoundaryCurve, x: f64) -> Result<f64, GeometryError> {
    check_range(curve, "x", x, curve.x_range())?;
    let s = (x + 2.0).max(0.0);
    Ok(match curve {
        BoundaryCurve::C1 | BoundaryCurve::C2 => -5.0 * (x + 1.0) + 2.0 * s.powf(1.5),
        BoundaryCurve::C3 => -5.0 * (x + 1.0) - 2.0 * s.powf(1.5),
        BoundaryCurve::C4 => (x * x + 2.0 * x - 7.0) / 4.0,
    })
}

/// The spurious root `x = −1 − 2√(y+2)` of the quadratic factor.
pub fn fifth_root_x(y: f64) -> f64 {
    -1.0 - 2.0 * (y + 2.0).sqrt()
}

/// Vertical section of 𝔇 above `x ∈ [−2, 7]`: `y` runs between the two
/// returned values.
pub fn y_section(x: f64) -> (f64, f64) {
    let s = (x + 2.0).max(0.0);
    let upper = -5.0 * (x + 1.0) + 2.0 * s.powf(1.5);
    let lower = if x <= -1.0 { -5.0 * (x + 1.0) - 2.0 * s.powf(1.5) } else { (x * x + 2.0 * x - 7.0) / 4.0 };
    (lower, upper)
}

/// Horizontal section of 𝔇 at height `y ∈ [−2, 14]`: one or two `x`-intervals,
/// each with the arcs bounding it on the left and right.
pub fn x_sections(y: f64) -> Vec<((f64, BoundaryCurve), (f64, BoundaryCurve))> {
    use BoundaryCurve::*;
    let arcs: &[(BoundaryCurve, BoundaryCurve)] = if y < Y_CUSP_LOW {
        &[(C3, C4)]
    } else if y <= Y_CUSP_HIGH {
        &[(C3, C2), (C1, C4)]
    } else {
        &[(C1, C4)]
    };
    arcs.iter()
        .map(|&(l, r)| {
            let xl = boundary_x_of_y(l, y).expect("y inside the arc's range");
            let xr = boundary_x_of_y(r, y).expect("y inside the arc's range");
            ((xl, l), (xr, r))
        })
        .collect()
}

/// All five roots in `x` of `J²/16π⁴` at fixed `y`, with the leading
/// coefficient: `J²/16π⁴ = −4 ∏ (x − r_i)`. The first three come from the
/// boundary cubic in `p`, then the `C4` root, then [`fifth_root_x`].
pub fn quintic_roots_in_x(y: f64) -> [Complex64; 5] {
    let xs = polished_roots(y).map(|r| r.x());
    let r = (y + 2.0).max(0.0).sqrt();
    [xs[0], xs[1], xs[2], Complex64::new(-1.0 + 2.0 * r, 0.0), Complex64::new(-1.0 - 2.0 * r, 0.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_points() {
        let (x, y) = psi_map((0.0, 0.0));
        assert!((x - 7.0).abs() < 1e-12 && (y - 14.0).abs() < 1e-12);
        let (x, y) = psi_map((1.0 / 3.0, 2.0 / 3.0));
        assert!((x + 2.0).abs() < 1e-12 && (y - 5.0).abs() < 1e-12);
        assert_eq!(jacobian_sq_xy(7.0, 14.0), 0.0);
        assert!(jacobian_sq_xy(-2.0, 5.0).abs() < 1e-12);
        assert!(!domain_contains(-2.0, -2.0));
        assert!(domain_contains(7.0, 14.0));
        assert!(domain_contains(-2.0, 5.0));
        assert!(domain_contains(-1.0, -2.0));
        assert!(!domain_contains(0.0, 13.0));
        assert!(jacobian_theta((0.0, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn forms_of_the_jacobian_agree() {
        for i in 0..200 {
            let th = ((i as f64 * 0.618_034).fract(), (i as f64 * 0.414_214 + 0.1).fract());
            let j = jacobian_theta(th);
            assert!((j - jacobian_sine_product(th)).abs() <= 1e-9 * j.abs().max(1.0));
            let (x, y) = psi_map(th);
            let j2 = 16.0 * PI.powi(4) * jacobian_sq_xy(x, y);
            assert!((j * j - j2).abs() <= 1e-8 * (j * j).max(1.0), "{th:?}");
            assert!(cubic_factor(x, y) >= -1e-9 && quadratic_factor(x, y) <= 1e-9);
        }
    }

    #[test]
    fn boundary_curves_lie_on_the_zero_set() {
        for curve in [BoundaryCurve::C1, BoundaryCurve::C2, BoundaryCurve::C3] {
            let (lo, hi) = curve.y_range();
            for i in 0..=200 {
                let y = lo + (hi - lo) * i as f64 / 200.0;
                let x = boundary_x_of_y(curve, y).unwrap();
                assert!(cubic_factor(x, y).abs() < 1e-8, "{curve:?} y={y}");
                let (xl, xh) = curve.x_range();
                assert!(x >= xl - 1e-6 && x <= xh + 1e-6, "{curve:?} y={y} x={x}");
                let back = boundary_y_of_x(curve, x.clamp(xl, xh)).unwrap();
                assert!((back - y).abs() < 1e-6, "{curve:?} y={y}: {back}");
            }
        }
        let x = boundary_x_of_y(BoundaryCurve::C4, 6.0).unwrap();
        assert!(quadratic_factor(x, 6.0).abs() < 1e-14);
        assert_eq!(boundary_x_of_y(BoundaryCurve::C4, -2.0).unwrap(), -1.0);
        let y = boundary_y_of_x(BoundaryCurve::C1, 7.0 / 9.0).unwrap();
        assert!((y - 10.0 / 27.0).abs() < 1e-12);
        assert!(boundary_x_of_y(BoundaryCurve::C2, 6.0).is_err());
        assert!(boundary_y_of_x(BoundaryCurve::C3, 0.0).is_err());
    }

    #[test]
    fn quintic_roots_factor_the_square() {
        for y in [-1.5, 0.2, 1.0, 3.0, 4.9, 8.0, 13.0] {
            let roots = quintic_roots_in_x(y);
            for x in [-1.7, 0.3, 2.5] {
                let prod: Complex64 = roots.iter().map(|r| Complex64::new(x, 0.0) - r).product();
                let want = jacobian_sq_xy(x, y);
                assert!((-4.0 * prod.re - want).abs() < 1e-8 * want.abs().max(1.0), "y={y} x={x}");
                assert!(prod.im.abs() < 1e-8 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn sections_are_inside() {
        for y in [-1.9, 0.0, 0.5, 2.0, 4.9, 5.5, 13.9] {
            for ((xl, _), (xr, _)) in x_sections(y) {
                assert!(xl < xr);
                assert!(domain_contains(0.5 * (xl + xr), y), "y={y}");
                assert!(domain_contains(xl, y) && domain_contains(xr, y), "y={y}");
            }
        }
        for x in [-1.9, -1.2, 0.0, 3.0, 6.9] {
            let (lo, hi) = y_section(x);
            assert!(lo < hi && domain_contains(x, 0.5 * (lo + hi)));
        }
    }
}
