//! Semi-dissipative systems `ẋ = −B x`: hypocoercivity index, short-time
//! decay constant and the propagator norm `Φ(t) = ‖e^{−Bt}‖`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    eigendata, expm, full_svd, hermitian_eigen, hermitian_split, norm2, nullspace, spectral_norm, CMatrix,
    HermitianSplit, SpectralData, Tolerances, C64,
};

/// A certified semi-dissipative matrix with cached derived data.
#[derive(Debug, Clone)]
pub struct ContinuousSystem {
    b: CMatrix,
    split: HermitianSplit,
    sqrt_bh: CMatrix,
    spectral: SpectralData,
    tol: Tolerances,
}

impl ContinuousSystem {
    pub fn matrix(&self) -> &CMatrix {
        &self.b
    }

    pub fn split(&self) -> &HermitianSplit {
        &self.split
    }

    /// `√B_H`.
    pub fn sqrt_bh(&self) -> &CMatrix {
        &self.sqrt_bh
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.b.rows()
    }
}

/// Checks `B_H ≥ 0` (up to `psd_rel_tol`) and `0 ∉ Λ(B)` (up to `cluster_tol`).
pub fn certify_semidissipative(b: &CMatrix, tol: &Tolerances) -> Result<ContinuousSystem> {
    tol.validate()?;
    b.require_square("system matrix")?;
    let split = hermitian_split(b)?;
    let eig = hermitian_eigen(split.hermitian_part.inner());
    let bh_norm = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if eig.min() < -tol.psd_rel_tol * bh_norm {
        return Err(Error::NotSemiDissipative { eigenvalue: eig.min() });
    }
    let spectral = eigendata(b, tol)?;
    let b_norm = norm2(b.inner());
    if let Some(&l) = spectral.eigenvalues.iter().find(|l| l.norm() <= tol.cluster_tol * b_norm) {
        return Err(Error::ZeroEigenvalue { eigenvalue: l });
    }
    // roundoff-level eigenvalues of either sign are structural zeros
    let floor = tol.psd_rel_tol * bh_norm;
    let sqrt_bh = CMatrix::wrap(eig.apply(|l| if l <= floor { 0.0 } else { l.sqrt() }));
    Ok(ContinuousSystem { b: b.clone(), split, sqrt_bh, spectral, tol: *tol })
}

/// Index computation result, shared by the continuous and discrete analyses.
#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub index: Option<usize>,
    /// `λ_min` of the Gramian sum at the index, 0 when there is none.
    pub kappa: f64,
    /// `λ_min` of the partial Gramian sums, one entry per level examined.
    pub per_level_lambda_min: Vec<f64>,
    /// Dimension of the common kernel at each level examined.
    pub kernel_dims: Vec<usize>,
    /// `‖B^j‖` for `j = 1, 2, …` (discrete analysis only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub power_norms: Vec<f64>,
    pub discrete: bool,
    pub tolerances: Tolerances,
}

/// Stacks `blocks` vertically.
pub(crate) fn vstack(blocks: &[DMatrix<C64>], cols: usize) -> DMatrix<C64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Relative singular-value cutoff for the stacked matrix. Its squared
/// singular values are the eigenvalues of the Gramian sum, so this makes
/// both index criteria decide the same quantity.
pub(crate) fn stacked_cutoff(tol: &Tolerances) -> f64 {
    tol.rank_rel_tol.sqrt()
}

/// Smallest `m ≤ m_max` with `Σ_{j≤m} (B*)^j B_H B^j` positive definite.
///
/// The Gramian test `λ_min(S_m) > rank_rel_tol·λ_max(S_m)` is cross-checked
/// against the rank of the stacked matrix `[√B_H; √B_H B; …; √B_H B^m]`,
/// whose singular values count as zero below `√rank_rel_tol·σ_max`.
/// `m_max` defaults to `n − 1`.
pub fn hypocoercivity_index(sys: &ContinuousSystem, m_max: Option<usize>) -> Result<IndexReport> {
    let n = sys.dim();
    let m_max = m_max.unwrap_or(n.saturating_sub(1));
    let tol = sys.tol;
    let b = sys.b.inner();
    let bh = sys.split.hermitian_part.inner();
    let root = sys.sqrt_bh.inner();

    let mut power = DMatrix::<C64>::identity(n, n);
    let mut gram = DMatrix::<C64>::zeros(n, n);
    let mut blocks = Vec::new();
    let mut per_level_lambda_min = Vec::new();
    let mut kernel_dims = Vec::new();
    for m in 0..=m_max {
        gram += power.adjoint() * bh * &power;
        let eig = hermitian_eigen(&gram);
        let (lmin, lmax) = (eig.min(), eig.max());
        per_level_lambda_min.push(lmin);
        blocks.push(root * &power);
        let kernel = nullspace(&vstack(&blocks, n), stacked_cutoff(&tol)).ncols();
        kernel_dims.push(kernel);

        let gram_ok = lmax > 0.0 && lmin > tol.rank_rel_tol * lmax;
        let rank_ok = kernel == 0;
        if gram_ok != rank_ok {
            return Err(Error::CriterionMismatch {
                level: m,
                detail: format!("Gramian λ_min/λ_max = {:.3e}, stacked kernel dimension {kernel}", lmin / lmax),
            });
        }
        if gram_ok {
            return Ok(IndexReport {
                index: Some(m),
                kappa: lmin,
                per_level_lambda_min,
                kernel_dims,
                power_norms: vec![],
                discrete: false,
                tolerances: tol,
            });
        }
        power = &power * b;
    }
    Ok(IndexReport {
        index: None,
        kappa: 0.0,
        per_level_lambda_min,
        kernel_dims,
        power_norms: vec![],
        discrete: false,
        tolerances: tol,
    })
}

/// Leading term `1 − Φ(t) ≈ c·t^a` of the propagator norm.
#[derive(Debug, Clone, Serialize)]
pub struct DecayExpansion {
    pub exponent_a: usize,
    pub constant_c: f64,
    /// Minimum of `‖√B_H B^m y‖²` over unit `y` in the common kernel.
    pub min_value: f64,
    pub minimizer: Vec<C64>,
    /// `1/((2m+1)!·binom(2m, m))`.
    pub prefactor: f64,
    /// `max_{p<m} ‖√B_H B^p y‖` at the minimizer.
    pub kernel_residual: f64,
}

/// `1/((2m+1)!·binom(2m, m))` in floating point.
pub fn decay_prefactor(m: usize) -> f64 {
    let mut fact = 1.0f64;
    for k in 2..=(2 * m + 1) {
        fact *= k as f64;
    }
    let mut binom = 1.0f64;
    for k in 1..=m {
        binom = binom * (m + k) as f64 / k as f64;
    }
    1.0 / (fact * binom)
}

/// Computes `c = min_value/((2m+1)!·binom(2m, m))` with `m` the index and
/// `min_value` the smallest singular value squared of `√B_H B^m` restricted
/// to `∩_{p<m} ker(√B_H B^p)`.
pub fn decay_constant(sys: &ContinuousSystem, report: &IndexReport) -> Result<DecayExpansion> {
    let m = report.index.ok_or(Error::IndexMissing)?;
    let n = sys.dim();
    let b = sys.b.inner();
    let root = sys.sqrt_bh.inner();
    let mut blocks = Vec::with_capacity(m);
    let mut power = DMatrix::<C64>::identity(n, n);
    for _ in 0..m {
        blocks.push(root * &power);
        power = &power * b;
    }
    let q = if m == 0 { DMatrix::identity(n, n) } else { nullspace(&vstack(&blocks, n), stacked_cutoff(&sys.tol)) };
    if q.ncols() == 0 {
        return Err(Error::IndexMismatch { expected: m, got: m.saturating_sub(1) });
    }
    let restricted = root * &power * &q;
    let svd = full_svd(&restricted);
    let k = q.ncols();
    let sigma_min = svd.sigma[k - 1];
    let y = &q * svd.v.column(k - 1);
    let kernel_residual = blocks.iter().map(|blk| (blk * &y).norm()).fold(0.0, f64::max);
    let min_value = sigma_min * sigma_min;
    let prefactor = decay_prefactor(m);
    Ok(DecayExpansion {
        exponent_a: 2 * m + 1,
        constant_c: prefactor * min_value,
        min_value,
        minimizer: y.iter().copied().collect(),
        prefactor,
        kernel_residual,
    })
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// `Φ(t) = ‖e^{−Bt}‖`.
pub fn propagator_norm(sys: &ContinuousSystem, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok(spectral_norm(&expm(&sys.b.scale(-t))?))
}

/// `G(t) = ∫₀ᵗ e^{−B*s} 2B_H e^{−Bs} ds = I − e^{−B*t} e^{−Bt}`, assembled
/// without forming the difference so that small eigenvalues keep their
/// relative accuracy.
fn dissipation_gram(b: &DMatrix<C64>, bh: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let bnorm = norm2(b);
    let mut doublings = 0u32;
    let mut s = t;
    while s * bnorm > 0.25 {
        s *= 0.5;
        doublings += 1;
    }
    // G(s) = Σ_N (−1)^N s^{N+1}/(N+1)! P_N with P_0 = 2B_H, P_{N+1} = B*P_N + P_N B
    let mut p = bh * C64::new(2.0, 0.0);
    let mut coef = s;
    let mut g = &p * C64::new(coef, 0.0);
    let scale = g.norm();
    for k in 1..200 {
        p = b.adjoint() * &p + &p * b;
        coef *= -s / (k as f64 + 1.0);
        let term = &p * C64::new(coef, 0.0);
        let tn = term.norm();
        g += term;
        if tn <= f64::EPSILON * 1e-3 * scale {
            break;
        }
    }
    if doublings > 0 {
        let mut e = expm(&CMatrix::wrap(b * C64::new(-s, 0.0))).expect("square").into_inner();
        for _ in 0..doublings {
            g = &g + e.adjoint() * &g * &e;
            e = &e * &e;
        }
    }
    crate::linalg::symmetrize(&g)
}

/// `1 − Φ(t)`, accurate also when it is far below machine precision.
pub fn propagator_defect(sys: &ContinuousSystem, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let direct = 1.0 - propagator_norm(sys, t)?;
    if direct >= 1e-9 {
        return Ok(direct);
    }
    let g = dissipation_gram(sys.b.inner(), sys.split.hermitian_part.inner(), t);
    let lmin = hermitian_eigen(&g).min().max(0.0);
    Ok(lmin / (1.0 + (1.0 - lmin).max(0.0).sqrt()))
}

/// Least-squares line through `(log t, log defect)`: returns `(a, c)` with
/// `defect ≈ c·t^a`. Points at or below `floor(t)` are discarded; fewer
/// than two remaining points is a degenerate fit.
pub(crate) fn loglog_fit(ts: &[f64], defects: &[f64], floor: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(defects)
        .filter(|(&t, &d)| d.is_finite() && d > floor(t) && d > 0.0)
        .map(|(&t, &d)| (t.ln(), d.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "{} of {} grid points rise above the roundoff floor",
            pts.len(),
            ts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    Ok((a, (my - a * mx).exp()))
}

pub(crate) fn check_grid(grid: &[f64], upper: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    if grid.iter().any(|&t| !(t > 0.0 && t < upper)) {
        return Err(Error::InvalidArgument(format!("grid points must lie in (0, {upper})")));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly decreasing".into()));
    }
    Ok(())
}

/// Fits `1 − Φ(t) ≈ c·t^a` on a strictly decreasing grid in `(0, 1)`.
pub fn fit_short_time_expansion(sys: &ContinuousSystem, t_grid: &[f64]) -> Result<(f64, f64)> {
    check_grid(t_grid, 1.0)?;
    let defects = t_grid.par_iter().map(|&t| propagator_defect(sys, t)).collect::<Result<Vec<_>>>()?;
    // roundoff floor of the Gram form
    let bh_norm = spectral_norm(&sys.split.hermitian_part);
    loglog_fit(t_grid, &defects, |t| 64.0 * f64::EPSILON * 2.0 * bh_norm * t)
}

/// `{2^{-k}}` for `k = lo..=hi`, decreasing.
pub fn dyadic_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(-k)).collect()
}
