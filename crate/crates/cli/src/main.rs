//! `g2lab` command-line front end.
//!
//! Exit codes: 0 success, 1 hard failure (bad input, I/O, failed check),
//! 2 disagreement between independent moment routes.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::value::RawValue;

use g2lab::elliptic_densities::{density_grid, grid_to_csv, DensityProfile, DensityRow, DensityTarget};
use g2lab::invariant_measures::{measure_by_name, raw_number, Variant};
use g2lab::modular_verlinde::{build_level, Exponent, ModularLevel, MAX_LEVEL};
use g2lab::verify::{run_verify, CheckStatus};
use g2lab::walk_moments::{moment_ct, moment_formula, moment_walk, WalkKind};
use g2lab::Fundamental;

const MAX_MOMENT_DEGREE: u32 = 10;
const THREADS_ENV: &str = "G2LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "g2lab", version, about = "Spectral measures and modular data for G2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact moments by walk counting, multinomial formula and constant term.
    Moments {
        #[arg(long, value_enum, default_value_t = Kind::Torus)]
        kind: Kind,
        /// Power of the first fundamental character.
        #[arg(short, default_value_t = 0)]
        m: u32,
        /// Power of the second fundamental character.
        #[arg(short, default_value_t = 0)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Route::All)]
        route: Route,
    },
    /// Spectral density of a fundamental character on a uniform grid, as CSV.
    Density {
        #[arg(long, value_enum)]
        target: Target,
        /// Number of grid points, endpoints included.
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render the curve as an SVG polyline.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// S-matrix, nimreps, Perron-Frobenius vector or exponent angles at level k.
    Modular {
        #[arg(short, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=MAX_LEVEL as i64))]
        k: u32,
        #[arg(long, value_enum, default_value_t = What::Smatrix)]
        what: What,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a discrete measure on the torus as JSON.
    Measure {
        /// E3, E3M, E4, E4M, E4star, d((n)), d(n,k), A<k> or F<k>W.
        #[arg(long)]
        name: String,
        /// Use the version of an exceptional measure repaired against its table.
        #[arg(long)]
        corrected: bool,
        /// Destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite.
    Verify {
        /// `all` or one module name.
        #[arg(long, default_value = "all")]
        scope: String,
        /// Write the full JSON report here.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Torus,
    Cone,
}

impl From<Kind> for WalkKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Torus => WalkKind::Torus,
            Kind::Cone => WalkKind::Cone,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Route {
    Walk,
    Formula,
    Ct,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Target {
    TorusV1,
    TorusV2,
    HaarV1,
    HaarV2,
}

impl From<Target> for DensityTarget {
    fn from(t: Target) -> Self {
        match t {
            Target::TorusV1 => DensityTarget::TorusV1,
            Target::TorusV2 => DensityTarget::TorusV2,
            Target::HaarV1 => DensityTarget::HaarV1,
            Target::HaarV2 => DensityTarget::HaarV2,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum What {
    Smatrix,
    Nimrep,
    Psi,
    Theta,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Error carrying the exit code it should produce.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn hard(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version are not errors; everything else is a hard failure,
            // keeping exit code 2 reserved for route disagreement.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(f) => return report(f),
    };
    if let Some(n) = threads {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match cli.command {
        Command::Moments { kind, m, n, route } => cmd_moments(kind.into(), m, n, route),
        Command::Density { target, grid, out, svg } => cmd_density(target.into(), grid, out, svg),
        Command::Modular { k, what, format, out } => cmd_modular(k, what, format, out),
        Command::Measure { name, corrected, out } => cmd_measure(&name, corrected, out),
        Command::Verify { scope, json_out } => cmd_verify(&scope, threads, json_out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    eprintln!("error: {}", f.message);
    ExitCode::from(f.code)
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::hard(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            io::stdout().lock().write_all(text.as_bytes()).map_err(|e| Failure::hard(format!("writing to stdout: {e}")))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::hard(format!("cannot write {}: {e}", path.display())))
}

fn cmd_moments(kind: WalkKind, m: u32, n: u32, route: Route) -> CmdResult {
    if m.saturating_add(n) > MAX_MOMENT_DEGREE {
        return Err(Failure::hard(format!("m + n must be at most {MAX_MOMENT_DEGREE}")));
    }
    let mut values = Vec::new();
    if matches!(route, Route::Walk | Route::All) {
        values.push(("walk", moment_walk(kind, m, n)));
    }
    if matches!(route, Route::Formula | Route::All) {
        match moment_formula(kind, m, n) {
            Ok(v) => values.push(("formula", v)),
            Err(e) if route == Route::Formula => return Err(Failure::hard(e.to_string())),
            Err(_) => {}
        }
    }
    if matches!(route, Route::Ct | Route::All) {
        values.push(("ct", moment_ct(kind, m, n)));
    }
    let mut text = String::from("route,value\n");
    for (name, v) in &values {
        let _ = writeln!(text, "{name},{v}");
    }
    emit(None, &text)?;
    let agree = values.windows(2).all(|w| w[0].1 == w[1].1);
    if agree {
        Ok(0)
    } else {
        eprintln!("routes disagree");
        Ok(2)
    }
}

fn cmd_density(target: DensityTarget, grid: usize, out: Option<PathBuf>, svg: Option<PathBuf>) -> CmdResult {
    if grid < 2 {
        return Err(Failure::hard("grid needs at least 2 points"));
    }
    let profile = DensityProfile::preferred(target);
    let rows = density_grid(&profile, grid).map_err(|e| Failure::hard(e.to_string()))?;
    emit(out.as_deref(), &grid_to_csv(&rows))?;
    if let Some(path) = svg {
        write_file(&path, &render_svg(target, &rows))?;
    }
    Ok(0)
}

fn render_svg(target: DensityTarget, rows: &[DensityRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 20.0;
    let (lo, hi) = target.support();
    let top = rows.iter().map(|r| r.density).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
    let mut points = String::new();
    for r in rows {
        let x = PAD + (r.t - lo) / (hi - lo) * (W - 2.0 * PAD);
        let y = H - PAD - r.density / top * (H - 2.0 * PAD);
        if !points.is_empty() {
            points.push(' ');
        }
        let _ = write!(points, "{x:.3},{y:.3}");
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <title>{target} on [{lo}, {hi}]</title>\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"{points}\"/>\n\
         </svg>\n"
    )
}

fn label((a, b): Exponent) -> String {
    format!("({a};{b})")
}

fn cmd_modular(k: u32, what: What, format: Format, out: Option<PathBuf>) -> CmdResult {
    let level = build_level(k).map_err(|e| Failure::hard(e.to_string()))?;
    let text = match (what, format) {
        (What::Smatrix, Format::Csv) => smatrix_csv(&level),
        (What::Smatrix, Format::Json) => smatrix_json(&level),
        (What::Nimrep, f) => nimrep_text(&level, f)?,
        (What::Psi, f) => psi_text(&level, f)?,
        (What::Theta, f) => theta_text(&level, f)?,
    };
    emit(out.as_deref(), &text)?;
    Ok(0)
}

fn csv_num(v: f64) -> String {
    format!("{v:.11e}")
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("modular data serialises");
    s.push('\n');
    s
}

fn smatrix_csv(level: &ModularLevel) -> String {
    let ex = level.exponents();
    let s = level.s_matrix();
    let mut text = String::from("lambda");
    for e in ex {
        let _ = write!(text, ",{}", label(*e));
    }
    text.push('\n');
    for (i, e) in ex.iter().enumerate() {
        text.push_str(&label(*e));
        for j in 0..ex.len() {
            let _ = write!(text, ",{}", csv_num(s[(i, j)]));
        }
        text.push('\n');
    }
    text
}

fn smatrix_json(level: &ModularLevel) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        k: u32,
        exponents: &'a [Exponent],
        s: Vec<Vec<Box<RawValue>>>,
    }
    let ex = level.exponents();
    let s = level.s_matrix();
    let rows = (0..ex.len()).map(|i| (0..ex.len()).map(|j| raw_number(s[(i, j)])).collect()).collect();
    to_json(&Doc { k: level.k(), exponents: ex, s: rows })
}

fn nimrep_text(level: &ModularLevel, format: Format) -> Result<String, Failure> {
    let ex = level.exponents();
    let mut mats = Vec::new();
    for j in [Fundamental::Rho1, Fundamental::Rho2] {
        mats.push(level.fundamental_nimrep(j).map_err(|e| Failure::hard(e.to_string()))?);
    }
    Ok(match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                k: u32,
                exponents: &'a [Exponent],
                n1: &'a [Vec<u32>],
                n2: &'a [Vec<u32>],
            }
            to_json(&Doc { k: level.k(), exponents: ex, n1: &mats[0], n2: &mats[1] })
        }
        Format::Csv => {
            let mut text = String::from("generator,lambda");
            for e in ex {
                let _ = write!(text, ",{}", label(*e));
            }
            text.push('\n');
            for (g, mat) in mats.iter().enumerate() {
                for (e, row) in ex.iter().zip(mat) {
                    let _ = write!(text, "N{},{}", g + 1, label(*e));
                    for v in row {
                        let _ = write!(text, ",{v}");
                    }
                    text.push('\n');
                }
            }
            text
        }
    })
}

fn psi_text(level: &ModularLevel, format: Format) -> Result<String, Failure> {
    let ex = level.exponents();
    let psi = ex
        .iter()
        .map(|&e| level.psi_star(e).map_err(|err| Failure::hard(err.to_string())))
        .collect::<Result<Vec<f64>, _>>()?;
    let total: f64 = psi.iter().map(|p| p * p).sum();
    Ok(match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                exponent: Exponent,
                psi: Box<RawValue>,
                psi_sq: Box<RawValue>,
            }
            #[derive(Serialize)]
            struct Doc {
                k: u32,
                rows: Vec<Row>,
                sum_psi_sq: Box<RawValue>,
            }
            let rows = ex
                .iter()
                .zip(&psi)
                .map(|(&e, &p)| Row { exponent: e, psi: raw_number(p), psi_sq: raw_number(p * p) })
                .collect();
            to_json(&Doc { k: level.k(), rows, sum_psi_sq: raw_number(total) })
        }
        Format::Csv => {
            let mut text = String::from("lambda1,lambda2,psi,psi_sq\n");
            for (&(a, b), &p) in ex.iter().zip(&psi) {
                let _ = writeln!(text, "{a},{b},{},{}", csv_num(p), csv_num(p * p));
            }
            text
        }
    })
}

fn theta_text(level: &ModularLevel, format: Format) -> Result<String, Failure> {
    let ex = level.exponents();
    let mut thetas = Vec::with_capacity(ex.len());
    for &e in ex {
        let p = level.theta_of_exponent(e).map_err(|err| Failure::hard(err.to_string()))?;
        let (a, b) = p.ratios();
        thetas.push((a.to_string(), b.to_string()));
    }
    Ok(match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                exponent: Exponent,
                theta: [&'a str; 2],
            }
            #[derive(Serialize)]
            struct Doc<'a> {
                k: u32,
                rows: Vec<Row<'a>>,
            }
            let rows = ex
                .iter()
                .zip(&thetas)
                .map(|(&e, (a, b))| Row { exponent: e, theta: [a.as_str(), b.as_str()] })
                .collect();
            to_json(&Doc { k: level.k(), rows })
        }
        Format::Csv => {
            let mut text = String::from("lambda1,lambda2,theta1,theta2\n");
            for (&(l1, l2), (a, b)) in ex.iter().zip(&thetas) {
                let _ = writeln!(text, "{l1},{l2},{a},{b}");
            }
            text
        }
    })
}

fn cmd_measure(name: &str, corrected: bool, out: Option<PathBuf>) -> CmdResult {
    let variant = if corrected { Variant::Corrected } else { Variant::Printed };
    let mu = measure_by_name(name, variant).map_err(|e| Failure::hard(e.to_string()))?;
    let mut text = mu.to_json();
    text.push('\n');
    emit(out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_verify(scope: &str, threads: Option<usize>, json_out: Option<PathBuf>) -> CmdResult {
    let report = run_verify(scope, threads).map_err(Failure::hard)?;
    let mut text = String::new();
    for c in &report.checks {
        let status = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Flagged => "FLAG",
        };
        let _ = writeln!(text, "{status} {:<40} residual={:.3e}", c.id, c.residual);
    }
    let _ = writeln!(text, "passed {} failed {} flagged {}", report.passed, report.failed, report.flagged);
    emit(None, &text)?;
    if let Some(path) = json_out {
        let mut json = serde_json::to_string_pretty(&report).expect("report serialises");
        json.push('\n');
        write_file(&path, &json)?;
    }
    Ok(if report.ok() { 0 } else { 1 })
}
