//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use g2lab::characters::{chi_fund_eval, Fundamental};
use g2lab::elliptic_densities::{
    density_moment, density_quadrature, haar_v1_closed_unnormalized, torus_v1_closed, DensityProfile, DensityTarget,
    Evaluator,
};
use g2lab::invariant_measures::{
    audit_measure, measure_ak, measure_exceptional, support_dn, support_dnk, Exceptional, Variant,
};
use g2lab::jacobian_geometry::{
    boundary_x_of_y, boundary_y_of_x, cubic_factor, domain_contains, jacobian_sine_product, jacobian_sq_xy,
    jacobian_theta, psi_map, BoundaryCurve,
};
use g2lab::modular_verlinde::{build_level, spectrum, ModularLevel};
use g2lab::verify::{run_verify, EXTERIOR_PROBES};
use g2lab::walk_moments::{moment_constant_term, moment_formula, moment_walk, WalkKind};

struct Verdict {
    ok: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Verdict);

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(20_231_017)
}

fn levels_up_to(k: u32) -> Vec<ModularLevel> {
    (1..=k).map(|k| build_level(k).unwrap()).collect()
}

fn moment_triple_agreement() -> Verdict {
    let start = Instant::now();
    let mut bad = Vec::new();
    for total in 0..=6u32 {
        for m in 0..=total {
            let n = total - m;
            let walk = moment_walk(WalkKind::Torus, m, n);
            let formula = moment_formula(WalkKind::Torus, m, n).unwrap();
            let ct = moment_constant_term(m, n);
            if walk != formula || walk != ct {
                bad.push((m, n));
            }
        }
    }
    let anchors = [(2, 0, 7), (0, 1, 2), (1, 1, 8)]
        .iter()
        .all(|&(m, n, v)| moment_walk(WalkKind::Torus, m, n) == BigInt::from(v));
    let elapsed = start.elapsed();
    verdict(
        bad.is_empty() && anchors && elapsed < Duration::from_secs(10),
        format!("m+n <= 6, disagreements {bad:?}, anchors 7/2/8 {anchors}, {:.2} s", elapsed.as_secs_f64()),
    )
}

fn torus_trapezoid() -> Verdict {
    let mut worst = 0.0f64;
    for total in 0..=5u32 {
        let grid = 3 * total as usize + 3;
        for m in 0..=total {
            let n = total - m;
            let mut sum = 0.0;
            for i in 0..grid {
                for j in 0..grid {
                    let th = (i as f64 / grid as f64, j as f64 / grid as f64);
                    sum += chi_fund_eval(Fundamental::Rho1, th).powi(m as i32)
                        * chi_fund_eval(Fundamental::Rho2, th).powi(n as i32);
                }
            }
            let exact: f64 = moment_walk(WalkKind::Torus, m, n).to_string().parse().unwrap();
            worst = worst.max((sum / (grid * grid) as f64 - exact).abs());
        }
    }
    verdict(worst <= 1e-9, format!("max |trapezoid - exact| = {worst:.2e} (tol 1e-9)"))
}

fn jacobian_identities() -> Verdict {
    let mut rng = rng();
    let (mut sine, mut poly) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let th = (rng.gen::<f64>(), rng.gen::<f64>());
        let j = jacobian_theta(th);
        sine = sine.max((j - jacobian_sine_product(th)).abs() / j.abs().max(1.0));
        let (x, y) = psi_map(th);
        poly = poly.max((j * j - 16.0 * PI.powi(4) * jacobian_sq_xy(x, y)).abs() / (j * j).max(1.0));
    }
    let lines: [fn(f64) -> (f64, f64); 6] =
        [|t| (t, t), |t| (t, -t), |t| (2.0 * t, t), |t| (t, 2.0 * t), |t| (0.0, t), |t| (t, 0.0)];
    let on_lines =
        lines.iter().flat_map(|l| (0..500).map(move |i| jacobian_theta(l(i as f64 / 500.0)).abs())).fold(0.0, f64::max);
    verdict(
        sine <= 1e-9 && poly <= 1e-8 && on_lines <= 1e-10,
        format!(
            "sine form {sine:.2e} (1e-9), J^2 polynomial {poly:.2e} (1e-8), reflection lines {on_lines:.2e} (1e-10)"
        ),
    )
}

fn boundary_geometry() -> Verdict {
    let mut roots = 0.0f64;
    for curve in [BoundaryCurve::C1, BoundaryCurve::C2, BoundaryCurve::C3] {
        let (lo, hi) = curve.y_range();
        for i in 0..200 {
            let y = lo + (hi - lo) * i as f64 / 199.0;
            roots = roots.max(boundary_x_of_y(curve, y).map_or(f64::INFINITY, |x| cubic_factor(x, y).abs()));
        }
    }
    let cusp = (boundary_y_of_x(BoundaryCurve::C1, 7.0 / 9.0).unwrap() - 10.0 / 27.0).abs();
    let mut rng = rng();
    let rejected_images = (0..10_000)
        .filter(|_| {
            let (x, y) = psi_map((rng.gen::<f64>(), rng.gen::<f64>()));
            !domain_contains(x, y)
        })
        .count();
    let accepted_probes = EXTERIOR_PROBES.iter().filter(|(x, y)| domain_contains(*x, *y)).count();
    verdict(
        roots <= 1e-8 && cusp <= 1e-12 && rejected_images == 0 && accepted_probes == 0,
        format!(
            "root residual {roots:.2e} (1e-8), |y(7/9) - 10/27| {cusp:.2e} (1e-12), \
             images rejected {rejected_images}/10000, probes accepted {accepted_probes}/10"
        ),
    )
}

fn elliptic_densities() -> Verdict {
    let mut closed = 0.0f64;
    for i in 0..50 {
        let x = -2.0 + 9.0 * (i as f64 + 0.5) / 50.0;
        let t = torus_v1_closed(x).unwrap();
        let h = haar_v1_closed_unnormalized(x).unwrap() * DensityTarget::HaarV1.normalization();
        let tq = density_quadrature(DensityTarget::TorusV1, x).unwrap().value;
        let hq = density_quadrature(DensityTarget::HaarV1, x).unwrap().value;
        closed = closed.max(((t - tq) / t).abs()).max(((h - hq) / h).abs());
    }
    let mass = DensityTarget::ALL
        .iter()
        .map(|&t| (density_moment(&DensityProfile::preferred(t), 0).unwrap().value - 1.0).abs())
        .fold(0.0, f64::max);
    let mut moments = 0.0f64;
    for (target, exact) in
        [(DensityTarget::TorusV1, &[1.0, 1.0, 7.0][..]), (DensityTarget::HaarV1, &[1.0, 0.0, 1.0, 1.0, 4.0][..])]
    {
        for evaluator in [Evaluator::ClosedForm, Evaluator::Quadrature] {
            let profile = DensityProfile::new(target, evaluator).unwrap();
            for (r, want) in exact.iter().enumerate() {
                moments = moments.max((density_moment(&profile, r as u32).unwrap().value - want).abs());
            }
        }
    }
    verdict(
        closed <= 1e-6 && mass <= 1e-6 && moments <= 1e-5,
        format!("closed vs quadrature rel {closed:.2e} (1e-6), masses {mass:.2e} (1e-6), moments {moments:.2e} (1e-5)"),
    )
}

/// Verlinde coefficients `N_{j λ}^μ` straight from the S-matrix, unrounded.
fn verlinde_raw(level: &ModularLevel, j: Fundamental) -> Vec<Vec<f64>> {
    let ex = level.exponents();
    let s = level.s_matrix();
    let rho = match j {
        Fundamental::Rho1 => (1, 0),
        Fundamental::Rho2 => (0, 1),
    };
    (0..ex.len())
        .map(|a| {
            (0..ex.len())
                .map(|b| (0..ex.len()).map(|c| level.s_entry(rho, ex[c]) * s[(a, c)] * s[(b, c)] / s[(0, c)]).sum())
                .collect()
        })
        .collect()
}

fn modular_data() -> Verdict {
    let (mut orth, mut rounding, mut eig) = (0.0f64, 0.0f64, 0.0f64);
    let mut structural = true;
    for level in levels_up_to(8) {
        let s = level.s_matrix();
        structural &= s == &s.transpose();
        let id = nalgebra::DMatrix::<f64>::identity(s.nrows(), s.nrows());
        orth = orth.max((s * s.transpose() - id).abs().max());
        for j in Fundamental::ALL {
            let raw = verlinde_raw(&level, j);
            let nim = level.fundamental_nimrep(j).unwrap();
            for (a, row) in raw.iter().enumerate() {
                for (b, v) in row.iter().enumerate() {
                    rounding = rounding.max((v - v.round()).abs());
                    structural &= v.round() >= 0.0 && v.round() as u32 == nim[a][b] && nim[a][b] == nim[b][a];
                }
            }
            let mut betas: Vec<f64> = level.exponents().iter().map(|&e| level.beta(j, e).unwrap()).collect();
            betas.sort_by(f64::total_cmp);
            let eigs = spectrum(&nim);
            structural &= eigs.len() == betas.len();
            eig = eigs.iter().zip(&betas).map(|(a, b)| (a - b).abs()).fold(eig, f64::max);
        }
    }
    verdict(
        structural && orth <= 1e-10 && rounding <= 1e-8 && eig <= 1e-8,
        format!("k = 1..8: |SS^T - I| {orth:.2e} (1e-10), rounding {rounding:.2e} (1e-8), spectra {eig:.2e} (1e-8), symmetric/non-negative {structural}"),
    )
}

fn psi_jacobian() -> Verdict {
    let (mut psi_j, mut kw) = (0.0f64, 0.0f64);
    for level in levels_up_to(8) {
        let kk = level.k() as f64 + 4.0;
        let mut ratios = Vec::new();
        for &e in level.exponents() {
            let psi = level.psi_star(e).unwrap();
            let th = level.theta_of_exponent(e).unwrap().theta();
            psi_j = psi_j.max((psi + jacobian_theta(th) / (4.0 * 3f64.sqrt() * kk * PI * PI)).abs());
            ratios.push(psi / level.kac_weyl_ratio(e).unwrap());
        }
        kw = ratios.iter().map(|r| ((r - ratios[0]) / ratios[0]).abs()).fold(kw, f64::max);
    }
    verdict(
        psi_j <= 1e-10 && kw <= 1e-9,
        format!("|psi* + J/(4 sqrt3 (k+4) pi^2)| {psi_j:.2e} (1e-10), Kac-Weyl ratio spread {kw:.2e} (rel 1e-9)"),
    )
}

fn ak_theorem() -> Verdict {
    let mut worst = 0.0f64;
    let mut exact = true;
    for k in 4..=6 {
        let mu = measure_ak(k).unwrap();
        let level = build_level(k).unwrap();
        for total in 0..=4u32 {
            for m in 0..=total {
                let want = level.nimrep_moment(m, total - m).unwrap();
                let want: f64 = want.to_string().parse().unwrap();
                worst = worst.max((mu.moment(m, total - m) - want).abs());
            }
        }
    }
    for total in 0..=4u32 {
        let k = (3 * total).max(1);
        let mu = measure_ak(k).unwrap();
        let level = build_level(k).unwrap();
        for m in 0..=total {
            let n = total - m;
            let cone = moment_walk(WalkKind::Cone, m, n);
            exact &= level.nimrep_moment(m, n).unwrap() == cone;
            let cone: f64 = cone.to_string().parse().unwrap();
            worst = worst.max((mu.moment(m, n) - cone).abs());
        }
    }
    verdict(
        worst <= 1e-8 && exact,
        format!("A_k moments vs <N1^m N2^n e0, e0> {worst:.2e} (1e-8), cone moments exact at k = 3(m+n): {exact}"),
    )
}

fn exceptional_audits() -> Verdict {
    let (s3, s6, s21) = (3f64.sqrt(), 6f64.sqrt(), 21f64.sqrt());
    let table: [((i64, i64, i64), f64); 8] = [
        ((4, 20, 21), (7.0 - s21) / 4.0),
        ((8, 19, 21), (7.0 + s21) / 4.0),
        ((6, 18, 21), 3.5),
        ((4, 23, 24), (3.0 - s6) / s3),
        ((7, 20, 24), (3.0 + s6) / s3),
        ((7, 23, 24), s3),
        ((8, 19, 24), s3),
        ((8, 22, 24), 2.0 * s3),
    ];
    let j_col = table
        .iter()
        .map(|&((a, b, d), want)| {
            let th = (a as f64 / d as f64, b as f64 / d as f64);
            (jacobian_theta(th).abs() / (8.0 * PI * PI) - want).abs()
        })
        .fold(0.0, f64::max);
    let mass = |e, v| measure_exceptional(e, v).mass();
    let e3m = (mass(Exceptional::E3M, Variant::Printed) - 1.0).abs();
    let corrected = [Exceptional::E3, Exceptional::E4, Exceptional::E4Star]
        .iter()
        .map(|&e| (mass(e, Variant::Corrected) - 1.0).abs())
        .fold(0.0, f64::max);
    let e3_printed = (mass(Exceptional::E3, Variant::Printed) - 5.0 / 6.0).abs();
    let e3_flagged = !audit_measure(Exceptional::E3, Variant::Printed).flags.is_empty();
    let mut integrality = 0.0f64;
    for e in Exceptional::ALL {
        let mu = measure_exceptional(e, Variant::Corrected);
        for total in 0..=3u32 {
            for m in 0..=total {
                let v = mu.moment(m, total - m);
                integrality = integrality.max((v - v.round().max(0.0)).abs());
            }
        }
    }
    verdict(
        j_col <= 1e-10 && e3m <= 1e-9 && corrected <= 1e-9 && e3_printed <= 1e-9 && e3_flagged && integrality <= 1e-7,
        format!(
            "J column {j_col:.2e} (1e-10), E3M mass {e3m:.2e}, corrected masses {corrected:.2e}, \
             printed E3 mass - 5/6 {e3_printed:.2e} (1e-9) flagged {e3_flagged}, moment integrality {integrality:.2e} (1e-7)"
        ),
    )
}

fn quantum_dimensions() -> Verdict {
    let d3 = build_level(3).unwrap().q_dim(Fundamental::Rho1);
    let d4 = build_level(4).unwrap().q_dim(Fundamental::Rho1);
    let r = (d3 * d3 - 3.0 * d3 - 3.0)
        .abs()
        .max((d4 * d4 - 4.0 * d4 - 2.0).abs())
        .max((d3 - 0.5 * (3.0 + 21f64.sqrt())).abs())
        .max((d4 - (2.0 + 6f64.sqrt())).abs());
    verdict(r <= 1e-9, format!("d(k=3) = {d3:.12}, d(k=4) = {d4:.12}, residual {r:.2e} (1e-9)"))
}

fn cardinalities_and_verify() -> Verdict {
    let r = Ratio::new;
    let sizes = [
        support_dn(r(2, 1)).unwrap().len(),
        support_dn(r(6, 1)).unwrap().len(),
        support_dnk(r(6, 1), r(1, 24)).unwrap().len(),
    ];
    let start = Instant::now();
    let report = run_verify("all", None).unwrap();
    let elapsed = start.elapsed();
    verdict(
        sizes == [9, 18, 36] && elapsed < Duration::from_secs(120) && report.ok(),
        format!(
            "|Supp| d((2)), d((6)), d(6,1/24) = {sizes:?}; verify all: {} pass, {} fail, {} flagged in {:.2} s",
            report.passed,
            report.failed,
            report.flagged,
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("moment triple agreement", moment_triple_agreement),
        ("torus measure trapezoid", torus_trapezoid),
        ("jacobian identities", jacobian_identities),
        ("boundary geometry", boundary_geometry),
        ("elliptic densities", elliptic_densities),
        ("modular data", modular_data),
        ("psi-J identity", psi_jacobian),
        ("A_k measure theorem", ak_theorem),
        ("exceptional audits", exceptional_audits),
        ("quantum dimensions", quantum_dimensions),
        ("support cardinalities and verify budget", cardinalities_and_verify),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        println!("{} {:>2} {name}: {}", if v.ok { "PASS" } else { "FAIL" }, i + 1, v.detail);
        failed += usize::from(!v.ok);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
