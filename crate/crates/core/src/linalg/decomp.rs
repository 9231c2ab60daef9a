use nalgebra::{DMatrix, SymmetricEigen, SVD};

use super::{CMatrix, Tolerances, C64};
use crate::error::{Error, Result};

/// Hermitian and skew-Hermitian parts with `B = hermitian_part − skew_part`.
#[derive(Debug, Clone)]
pub struct HermitianSplit {
    pub hermitian_part: CMatrix,
    pub skew_part: CMatrix,
}

pub fn hermitian_split(b: &CMatrix) -> Result<HermitianSplit> {
    let n = b.require_square("split input")?;
    let a = b.inner();
    let mut h = DMatrix::zeros(n, n);
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let bij = a[(i, j)];
            let bji = a[(j, i)];
            let hij = (bij + bji.conj()) * 0.5;
            h[(i, j)] = hij;
            h[(j, i)] = hij.conj();
            // skew part stored with the sign convention B = H − S
            let sij = -(bij - bji.conj()) * 0.5;
            s[(i, j)] = sij;
            s[(j, i)] = -sij.conj();
        }
    }
    Ok(HermitianSplit { hermitian_part: CMatrix::wrap(h), skew_part: CMatrix::wrap(s) })
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V · diag(f(λ)) · V*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let fl = f(l);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        let m = scaled * self.vectors.adjoint();
        symmetrize(&m)
    }
}

pub(crate) fn symmetrize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub(crate) fn hermitian_asymmetry(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).norm()
}

/// Eigen-decomposition of the Hermitian part of `m` (exactly Hermitian input
/// is left unchanged).
pub fn hermitian_eigen(m: &DMatrix<C64>) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen { values: vec![], vectors: DMatrix::zeros(0, 0) };
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    HermitianEigen { values, vectors }
}

fn check_hermitian(a: &CMatrix, tol: &Tolerances) -> Result<()> {
    let asym = hermitian_asymmetry(a.inner());
    if asym > tol.rank_rel_tol * a.frobenius().max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

/// Positive semidefinite square root of a Hermitian matrix.
///
/// Eigenvalues in `[−psd_rel_tol·‖A‖, 0)` are clamped to zero; anything more
/// negative is reported as [`Error::NotPsd`].
pub fn psd_sqrt(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    a.require_square("psd_sqrt input")?;
    check_hermitian(a, tol)?;
    let eig = hermitian_eigen(a.inner());
    let norm = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if eig.min() < -tol.psd_rel_tol * norm {
        return Err(Error::NotPsd { eigenvalue: eig.min() });
    }
    Ok(CMatrix::wrap(eig.apply(|l| l.max(0.0).sqrt())))
}

/// Singular values, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = a.inner().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

pub(crate) fn norm2(a: &DMatrix<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Full SVD with `V` square (`cols × cols`), singular values descending and
/// padded with zeros up to `cols`.
pub(crate) struct FullSvd {
    pub sigma: Vec<f64>,
    pub v: DMatrix<C64>,
}

pub(crate) fn full_svd(a: &DMatrix<C64>) -> FullSvd {
    let (r, c) = a.shape();
    // pad wide matrices with zero rows so that V comes out square
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("requested V");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let sigma = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(c, c, |row, col| vt[(idx[col], row)].conj());
    FullSvd { sigma, v }
}

/// Orthonormal basis (as columns) of the numerical kernel
/// `{x : ‖Ax‖ ≤ rank_rel_tol·σ_max(A)·‖x‖}`. A zero matrix has the whole
/// space as kernel; a trivial kernel gives a matrix with no columns.
pub fn nullspace_basis(a: &CMatrix, tol: &Tolerances) -> CMatrix {
    CMatrix::wrap(nullspace(a.inner(), tol.rank_rel_tol))
}

pub(crate) fn nullspace(a: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    let c = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(c, c);
    }
    let svd = full_svd(a);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let cutoff = rel_tol * smax;
    let kernel: Vec<usize> = (0..c).filter(|&j| svd.sigma[j] <= cutoff).collect();
    DMatrix::from_fn(c, kernel.len(), |row, col| svd.v[(row, kernel[col])])
}

/// `cols − dim kernel` under the same cutoff as [`nullspace_basis`].
pub fn numerical_rank(a: &CMatrix, tol: &Tolerances) -> usize {
    a.cols() - nullspace_basis(a, tol).cols()
}

/// Matrix exponential (scaling and squaring with a Padé approximant).
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    a.require_square("expm input")?;
    if a.inner().iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Ok(CMatrix::identity(a.rows()));
    }
    Ok(CMatrix::wrap(a.inner().exp()))
}

/// Solves `A X = B` by partial-pivoted LU.
pub(crate) fn lu_solve(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    a.clone().lu().solve(b).ok_or_else(|| Error::InvalidArgument("singular linear system".into()))
}
