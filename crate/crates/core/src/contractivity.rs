//! Semi-contractive systems `x_{k+1} = B x_k` and their hypocontractivity index.

use nalgebra::DMatrix;

use crate::coercivity::IndexReport;
use crate::error::{Error, Result};
use crate::linalg::{eigendata, hermitian_eigen, norm2, CMatrix, SpectralData, Tolerances, C64};

#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    b: CMatrix,
    sigma_max: f64,
    spectral: SpectralData,
    tol: Tolerances,
}

impl DiscreteSystem {
    pub fn matrix(&self) -> &CMatrix {
        &self.b
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
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

/// Accepts `B` when `‖B‖ ≤ 1 + psd_rel_tol` and no eigenvalue lies within
/// `cluster_tol` of 1.
pub fn certify_semicontractive(b: &CMatrix, tol: &Tolerances) -> Result<DiscreteSystem> {
    tol.validate()?;
    b.require_square("system matrix")?;
    let sigma_max = norm2(b.inner());
    if sigma_max > 1.0 + tol.psd_rel_tol {
        return Err(Error::NotSemiContractive { sigma_max, gap: sigma_max - 1.0 });
    }
    let spectral = eigendata(b, tol)?;
    let one = C64::new(1.0, 0.0);
    if let Some(&l) = spectral.eigenvalues.iter().find(|l| (*l - one).norm() <= tol.cluster_tol) {
        return Err(Error::UnitEigenvalue { eigenvalue: l });
    }
    Ok(DiscreteSystem { b: b.clone(), sigma_max, spectral, tol: *tol })
}

/// Smallest `m ≤ m_max` with `‖B^j‖ = 1` for `j ≤ m` and `‖B^{m+1}‖ < 1`.
///
/// A power norm counts as 1 when it is at least `1 − norm_plateau_tol`. The
/// result is cross-checked against positivity of
/// `D_m = Σ_{j≤m} (B*)^j (I − B*B) B^j`, whose smallest eigenvalue is
/// `1 − ‖B^{m+1}‖²`. `kernel_dims[j]` counts the eigenvalues of `D_j` that do
/// not exceed `1 − (1 − norm_plateau_tol)²`. `m_max` defaults to `n − 1`.
pub fn hypocontractivity_index(sys: &DiscreteSystem, m_max: Option<usize>) -> Result<IndexReport> {
    let n = sys.dim();
    let m_max = m_max.unwrap_or(n.saturating_sub(1));
    let tol = sys.tol;
    let plateau = 1.0 - tol.norm_plateau_tol;
    let kernel_cut = 1.0 - plateau * plateau;
    let b = sys.b.inner();
    let defect = DMatrix::<C64>::identity(n, n) - b.adjoint() * b;

    let mut power = DMatrix::<C64>::identity(n, n);
    let mut gram = DMatrix::<C64>::zeros(n, n);
    let mut power_norms = Vec::new();
    let mut per_level_lambda_min = Vec::new();
    let mut kernel_dims = Vec::new();
    for m in 0..=m_max {
        gram += power.adjoint() * &defect * &power;
        power = &power * b;
        let next_norm = norm2(&power);
        power_norms.push(next_norm);
        let eig = hermitian_eigen(&gram);
        per_level_lambda_min.push(eig.min());
        kernel_dims.push(eig.values.iter().filter(|&&v| v <= kernel_cut).count());

        let plateau_ok = next_norm < plateau;
        let gram_ok = eig.min() > tol.rank_rel_tol;
        if plateau_ok != gram_ok {
            return Err(Error::CriterionMismatch {
                level: m,
                detail: format!("‖B^{}‖ = {next_norm:.15}, Gramian λ_min = {:.3e}", m + 1, eig.min()),
            });
        }
        if plateau_ok {
            return Ok(IndexReport {
                index: Some(m),
                kappa: eig.min(),
                per_level_lambda_min,
                kernel_dims,
                power_norms,
                discrete: true,
                tolerances: tol,
            });
        }
    }
    Ok(IndexReport {
        index: None,
        kappa: 0.0,
        per_level_lambda_min,
        kernel_dims,
        power_norms,
        discrete: true,
        tolerances: tol,
    })
}
