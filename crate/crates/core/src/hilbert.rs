//! Hilbert matrices and the quadratic form behind the decay constant.
//!
//! The form is `F(λ) = Σ_{n,k≤m} C_{nk} λ_{m−n} conj(λ_{m−k})` with
//! `C_{nk} = (−1)^{n+k}/(n+k+1)!·binom(n+k, k)` and `λ_0 = 1`. Throughout,
//! `lambda_star[p − 1]` is `λ_p`, the coefficient multiplying `(tB)^p`.
//! `diag((−1)^n n!)·C·diag((−1)^n n!)` is the Hilbert matrix `1/(i+j+1)`
//! (0-based), so `C` is positive definite and its minimum over `λ_0 = 1` is
//! `1/((2m+1)!·binom(2m, m))`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{gaussian, item_seed, rng};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Largest order accepted by [`hilbert_min`].
pub const HILBERT_MAX_ORDER: usize = 8;
/// Orders above this get a conditioning warning.
pub const HILBERT_WELL_CONDITIONED: usize = 6;
/// Largest order accepted by [`psd_kernel_check`].
pub const KERNEL_CHECK_MAX_ORDER: usize = 5;

fn int(v: u64) -> BigInt {
    BigInt::from(v)
}

pub fn factorial(n: usize) -> BigInt {
    (2..=n as u64).fold(BigInt::one(), |acc, k| acc * int(k))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    (0..k as u64).fold(BigInt::one(), |acc, i| acc * int(n as u64 - i) / int(i + 1))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn to_cmatrix(a: &[Vec<BigRational>]) -> CMatrix {
    let n = a.len();
    CMatrix::new(DMatrix::from_fn(n, n, |i, j| C64::new(to_f64(&a[i][j]), 0.0))).expect("finite")
}

#[derive(Debug, Clone)]
pub struct HilbertForm {
    pub m: usize,
    /// `(m+1)×(m+1)` Hilbert matrix.
    pub h: CMatrix,
    /// Signed binomial kernel `C`.
    pub coeff: CMatrix,
    exact_h: Vec<Vec<BigRational>>,
    exact_coeff: Vec<Vec<BigRational>>,
}

impl HilbertForm {
    pub fn new(m: usize) -> Self {
        let n = m + 1;
        let exact_h: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| BigRational::new(BigInt::one(), int((i + j + 1) as u64))).collect())
            .collect();
        let exact_coeff: Vec<Vec<BigRational>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let v = BigRational::new(binomial(a + b, b), factorial(a + b + 1));
                        if (a + b) % 2 == 1 {
                            -v
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        HilbertForm { m, h: to_cmatrix(&exact_h), coeff: to_cmatrix(&exact_coeff), exact_h, exact_coeff }
    }

    pub fn exact_hilbert(&self) -> &[Vec<BigRational>] {
        &self.exact_h
    }

    pub fn exact_coeff(&self) -> &[Vec<BigRational>] {
        &self.exact_coeff
    }

    /// `Σ C_{nk} ⟨z_{m−k}, z_{m−n}⟩` for vectors `z_0..z_m` of equal length.
    pub fn evaluate(&self, z: &[Vec<C64>]) -> f64 {
        assert_eq!(z.len(), self.m + 1);
        let c = self.coeff.inner();
        let mut total = C64::new(0.0, 0.0);
        for a in 0..=self.m {
            for b in 0..=self.m {
                let inner: C64 = z[self.m - b].iter().zip(&z[self.m - a]).map(|(x, y)| x.conj() * y).sum();
                total += c[(a, b)] * inner;
            }
        }
        total.re
    }
}

/// Solves `A x = rhs` exactly by Gauss–Jordan elimination.
fn rational_solve(mut a: Vec<Vec<BigRational>>, rhs: Vec<BigRational>) -> Vec<BigRational> {
    let n = a.len();
    for (row, r) in a.iter_mut().zip(rhs) {
        row.push(r);
    }
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("nonsingular");
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v / &p;
        }
        let pivot = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&pivot) {
                    *v = &*v - &f * pv;
                }
            }
        }
    }
    a.into_iter().map(|row| row[n].clone()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct HilbertMinimum {
    pub m: usize,
    /// `1/((2m+1)!·binom(2m, m))`.
    pub value: f64,
    /// Minimum from the exact rational solve.
    pub solved_value: f64,
    /// Minimum from a floating-point Cholesky factorization.
    pub solved_value_f64: f64,
    /// `λ_1..λ_m`.
    pub lambda_star: Vec<f64>,
    pub inverse_entry: f64,
    pub conditioning_warning: bool,
}

/// Minimum of the form over `λ_0 = 1` and its unique real minimizer.
pub fn hilbert_min(m: usize) -> Result<HilbertMinimum> {
    if m > HILBERT_MAX_ORDER {
        return Err(Error::OrderTooLarge { m, max: HILBERT_MAX_ORDER });
    }
    let form = HilbertForm::new(m);
    let c = form.exact_coeff();
    // x_n = λ_{m−n}; x_m = 1 is fixed
    let a: Vec<Vec<BigRational>> = (0..m).map(|i| c[i][..m].to_vec()).collect();
    let rhs: Vec<BigRational> = (0..m).map(|i| -c[i][m].clone()).collect();
    let x = rational_solve(a, rhs);
    let mut solved = c[m][m].clone();
    for (i, xi) in x.iter().enumerate() {
        solved += &c[m][i] * xi;
    }
    let closed = BigRational::new(BigInt::one(), factorial(2 * m + 1) * binomial(2 * m, m));

    // In the congruent variables y = D^{-1}x the form is yᵀHy with y_m = 1/d_m,
    // and its minimum is the last Cholesky pivot of H squared over d_m².
    // Scaling H by lcm(1..2m+1) makes every entry an exactly representable integer.
    let lcm = (1..=2 * m as u64 + 1).fold(1u64, num_integer::lcm) as f64;
    let hf = DMatrix::<f64>::from_fn(m + 1, m + 1, |i, j| lcm / (i + j + 1) as f64);
    let dm = factorial(m).to_f64().unwrap_or(f64::INFINITY);
    let chol = hf.cholesky().ok_or(Error::NoConvergence("Cholesky of the Hilbert matrix"))?;
    let pivot = chol.l_dirty()[(m, m)];
    let solved_f64 = pivot * pivot / (lcm * dm * dm);

    Ok(HilbertMinimum {
        m,
        value: to_f64(&closed),
        solved_value: to_f64(&solved),
        solved_value_f64: solved_f64,
        lambda_star: x.iter().rev().map(to_f64).collect(),
        inverse_entry: hilbert_inverse_entry(m),
        conditioning_warning: m > HILBERT_WELL_CONDITIONED,
    })
}

/// `(2m+1)·binom(2m, m)²` as an exact integer.
pub fn hilbert_inverse_entry_exact(m: usize) -> BigInt {
    let b = binomial(2 * m, m);
    int(2 * m as u64 + 1) * &b * &b
}

/// Bottom-right entry of the inverse `(m+1)×(m+1)` Hilbert matrix.
pub fn hilbert_inverse_entry(m: usize) -> f64 {
    hilbert_inverse_entry_exact(m).to_f64().unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelCheckReport {
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    pub bound: f64,
    pub violations: usize,
    /// `min (F(z) − bound·‖z_0‖²)` over the samples.
    pub worst_margin: f64,
}

/// Absolute slack allowed in [`psd_kernel_check`].
pub const KERNEL_CHECK_SLACK: f64 = 1e-10;

/// Samples Gaussian tuples `z_0..z_m ∈ ℂ⁴` and checks
/// `F(z) ≥ bound·‖z_0‖² − 1e-10`.
pub fn psd_kernel_check(m: usize, samples: usize, seed: u64) -> Result<KernelCheckReport> {
    if m > KERNEL_CHECK_MAX_ORDER {
        return Err(Error::OrderTooLarge { m, max: KERNEL_CHECK_MAX_ORDER });
    }
    let form = HilbertForm::new(m);
    let bound = hilbert_min(m)?.value;
    let margins: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(item_seed(seed, i));
            let z: Vec<Vec<C64>> = (0..=m).map(|_| gaussian(&mut r, 4, 1).iter().copied().collect()).collect();
            let z0: f64 = z[0].iter().map(|v| v.norm_sqr()).sum();
            form.evaluate(&z) - bound * z0
        })
        .collect();
    Ok(KernelCheckReport {
        m,
        samples,
        seed,
        bound,
        violations: margins.iter().filter(|&&v| v < -KERNEL_CHECK_SLACK).count(),
        worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
    })
}
