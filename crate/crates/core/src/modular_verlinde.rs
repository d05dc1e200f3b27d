//! Level-`k` modular data for G2: the Kac–Peterson S-matrix on
//! `P^k_+ = {λ1 + 2λ2 ≤ k}`, Verlinde nimreps of the two fundamentals,
//! their eigenvalues, the Perron–Frobenius entries `ψ*` and quantum
//! dimensions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::Zero;
use thiserror::Error;

use crate::characters::Fundamental;
use crate::weyl_torus::TorusPoint;

pub const MAX_LEVEL: u32 = 16;
/// Largest distance from an integer tolerated before a Verlinde entry is
/// considered wrong.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModularError {
    #[error("level {0} is outside 1..={MAX_LEVEL}")]
    LevelOutOfRange(u32),
    #[error("({0}, {1}) is not an exponent at level {2}")]
    NotAnExponent(u32, u32, u32),
    #[error("nimrep entry ({row}, {col}) = {value} is not within {INTEGRALITY_TOL} of a non-negative integer")]
    NonIntegerEntry { row: usize, col: usize, value: f64 },
}

/// Dynkin labels `(λ1, λ2)`.
pub type Exponent = (u32, u32);

#[derive(Clone, Debug)]
pub struct ModularLevel {
    k: u32,
    exponents: Vec<Exponent>,
    s: DMatrix<f64>,
    /// `±1`, chosen so that `S_{0,0} > 0`.
    sign: f64,
}

fn hat((l1, l2): Exponent) -> (i64, i64) {
    (l1 as i64 + 1, l2 as i64 + 1)
}

/// `cos(2π t / n)` with `t` reduced modulo `n` first.
fn cos_frac(t: i64, n: i64) -> f64 {
    (2.0 * PI * t.rem_euclid(n) as f64 / n as f64).cos()
}

impl ModularLevel {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// `ξ = π / 3(k+4)`.
    pub fn xi(&self) -> f64 {
        PI / self.denominator() as f64
    }

    fn denominator(&self) -> i64 {
        3 * (self.k as i64 + 4)
    }

    fn prefactor(&self) -> f64 {
        -2.0 / ((self.k as f64 + 4.0) * 3f64.sqrt())
    }

    /// Sorted lexicographically; `(0,0)` is first.
    pub fn exponents(&self) -> &[Exponent] {
        &self.exponents
    }

    pub fn index_of(&self, e: Exponent) -> Result<usize, ModularError> {
        self.exponents.binary_search(&e).map_err(|_| ModularError::NotAnExponent(e.0, e.1, self.k))
    }

    pub fn s_matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// The six-cosine formula for any pair of weights, in or out of the
    /// alcove, with the level's sign normalisation applied.
    pub fn s_entry(&self, lambda: Exponent, mu: Exponent) -> f64 {
        let (l1, l2) = hat(lambda);
        let (m1, m2) = hat(mu);
        let (a, b, c, d) = (l1 + l2, l2, m1 + m2, m2);
        let n = self.denominator();
        let mut plus = [
            2 * a * c + a * d + b * c + 2 * b * d,
            -a * c - 2 * a * d + b * c - b * d,
            -a * c + a * d - 2 * b * c - b * d,
        ];
        let mut minus = [
            -a * c - 2 * a * d - 2 * b * c - b * d,
            2 * a * c + a * d + b * c - b * d,
            -a * c + a * d + b * c + 2 * b * d,
        ];
        // Transposition swaps two of the terms; a fixed order keeps S
        // exactly symmetric in floating point.
        plus.sort_unstable_by_key(|t| t.rem_euclid(n));
        minus.sort_unstable_by_key(|t| t.rem_euclid(n));
        let bracket: f64 =
            plus.iter().map(|&t| cos_frac(t, n)).sum::<f64>() - minus.iter().map(|&t| cos_frac(t, n)).sum::<f64>();
        self.sign * self.prefactor() * bracket
    }

    /// `β^{(μ)}_j = S_{ρj,μ} / S_{0,μ}`.
    pub fn beta(&self, j: Fundamental, mu: Exponent) -> Result<f64, ModularError> {
        self.index_of(mu)?;
        let rho = match j {
            Fundamental::Rho1 => (1, 0),
            Fundamental::Rho2 => (0, 1),
        };
        Ok(self.s_entry(rho, mu) / self.s_entry((0, 0), mu))
    }

    /// `θ = ((λ̂1 + 3λ̂2)/3(k+4), −λ̂1/3(k+4))` mod 1.
    pub fn theta_of_exponent(&self, lambda: Exponent) -> Result<TorusPoint, ModularError> {
        self.index_of(lambda)?;
        let (l1, l2) = hat(lambda);
        let n = self.denominator();
        Ok(TorusPoint::from_ratios(Ratio::new(l1 + 3 * l2, n), Ratio::new(-l1, n)))
    }

    /// The printed boundary entry `ψ^λ_*`.
    pub fn psi_star(&self, lambda: Exponent) -> Result<f64, ModularError> {
        self.index_of(lambda)?;
        let (l1, l2) = hat(lambda);
        let n = self.denominator();
        let plus = [5 * l1 + 9 * l2, l1 + 6 * l2, 4 * l1 + 3 * l2];
        let minus = [4 * l1 + 9 * l2, l1 - 3 * l2, 5 * l1 + 6 * l2];
        let bracket: f64 =
            plus.iter().map(|&t| cos_frac(t, n)).sum::<f64>() - minus.iter().map(|&t| cos_frac(t, n)).sum::<f64>();
        Ok(self.prefactor() * bracket)
    }

    /// The Kac–Weyl product `φ*_λ`, equal to 1 at `λ = (0,0)`.
    pub fn kac_weyl_ratio(&self, lambda: Exponent) -> Result<f64, ModularError> {
        self.index_of(lambda)?;
        let (l1, l2) = hat(lambda);
        let xi = self.xi();
        let s = |t: i64| (t as f64 * xi).sin();
        let num = s(l1) * s(3 * l2) * s(l1 + 3 * l2) * s(2 * l1 + 3 * l2) * s(3 * l1 + 3 * l2) * s(3 * l1 + 6 * l2);
        Ok(num / Self::sine_constant_of(xi))
    }

    /// `sin ξ sin 3ξ sin 4ξ sin 5ξ sin 6ξ sin 9ξ`.
    pub fn sine_constant(&self) -> f64 {
        Self::sine_constant_of(self.xi())
    }

    fn sine_constant_of(xi: f64) -> f64 {
        [1.0, 3.0, 4.0, 5.0, 6.0, 9.0].iter().map(|m| (m * xi).sin()).product()
    }

    /// `[m] = (q^m − q^{−m})/(q − q^{−1})` at `q = e^{iπ/3(k+4)}`.
    pub fn q_integer(&self, m: i64) -> f64 {
        let xi = self.xi();
        (m as f64 * xi).sin() / xi.sin()
    }

    /// Quantum dimension of a fundamental from its q-integer product.
    pub fn q_dim(&self, j: Fundamental) -> f64 {
        let q = |m| self.q_integer(m);
        match j {
            Fundamental::Rho1 => q(2) * q(7) * q(12) / (q(4) * q(6)),
            Fundamental::Rho2 => q(7) * q(8) * q(15) / (q(3) * q(4) * q(5)),
        }
    }

    /// Quantum dimension of any weight as `S_{λ,0}/S_{0,0}`.
    pub fn q_dim_weight(&self, lambda: Exponent) -> f64 {
        self.s_entry(lambda, (0, 0)) / self.s_entry((0, 0), (0, 0))
    }

    /// `N_λ = Σ_σ (S_{λσ}/S_{0σ}) S_σ S_σᵀ`, rounded to integers.
    #[allow(clippy::needless_range_loop)]
    pub fn verlinde_nimrep(&self, lambda: Exponent) -> Result<Vec<Vec<u32>>, ModularError> {
        let n = self.exponents.len();
        let ratios: Vec<f64> =
            self.exponents.iter().map(|&sg| self.s_entry(lambda, sg) / self.s_entry((0, 0), sg)).collect();
        let mut out = vec![vec![0u32; n]; n];
        for mu in 0..n {
            for nu in mu..n {
                let value: f64 = (0..n).map(|sg| ratios[sg] * self.s[(mu, sg)] * self.s[(nu, sg)]).sum();
                let rounded = value.round();
                if (value - rounded).abs() > INTEGRALITY_TOL || rounded < 0.0 {
                    return Err(ModularError::NonIntegerEntry { row: mu, col: nu, value });
                }
                out[mu][nu] = rounded as u32;
                out[nu][mu] = rounded as u32;
            }
        }
        Ok(out)
    }

    pub fn fundamental_nimrep(&self, j: Fundamental) -> Result<Vec<Vec<u32>>, ModularError> {
        self.verlinde_nimrep(match j {
            Fundamental::Rho1 => (1, 0),
            Fundamental::Rho2 => (0, 1),
        })
    }

    /// `⟨N_{ρ1}^m N_{ρ2}^n e₀, e₀⟩`, exactly.
    pub fn nimrep_moment(&self, m: u32, n: u32) -> Result<BigInt, ModularError> {
        let g1 = self.fundamental_nimrep(Fundamental::Rho1)?;
        let g2 = self.fundamental_nimrep(Fundamental::Rho2)?;
        let apply = |g: &[Vec<u32>], v: &[BigInt]| -> Vec<BigInt> {
            g.iter().map(|row| row.iter().zip(v).filter(|(a, _)| **a != 0).map(|(a, x)| x * *a).sum()).collect()
        };
        let mut v = vec![BigInt::zero(); self.exponents.len()];
        v[0] = BigInt::from(1);
        for _ in 0..n {
            v = apply(&g2, &v);
        }
        for _ in 0..m {
            v = apply(&g1, &v);
        }
        Ok(v[0].clone())
    }
}

/// Sorted eigenvalues of an integer symmetric matrix.
pub fn spectrum(matrix: &[Vec<u32>]) -> Vec<f64> {
    let n = matrix.len();
    let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j] as f64);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// All `(λ1, λ2)` with `λ1 + 2λ2 ≤ k`, lexicographic.
pub fn exponents_at_level(k: u32) -> Vec<Exponent> {
    (0..=k).flat_map(|l1| (0..=(k - l1) / 2).map(move |l2| (l1, l2))).collect()
}

pub fn build_level(k: u32) -> Result<ModularLevel, ModularError> {
    if !(1..=MAX_LEVEL).contains(&k) {
        return Err(ModularError::LevelOutOfRange(k));
    }
    let exponents = exponents_at_level(k);
    let mut level = ModularLevel { k, exponents, s: DMatrix::zeros(0, 0), sign: 1.0 };
    if level.s_entry((0, 0), (0, 0)) < 0.0 {
        level.sign = -1.0;
    }
    let n = level.exponents.len();
    level.s = DMatrix::from_fn(n, n, |i, j| level.s_entry(level.exponents[i], level.exponents[j]));
    Ok(level)
}
