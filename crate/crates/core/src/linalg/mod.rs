//! Dense complex linear algebra used by every analysis module.

mod decomp;
mod lyapunov;
mod matrix;
pub(crate) mod schur;
mod spectral;

pub use decomp::{
    expm, hermitian_eigen, hermitian_split, nullspace_basis, numerical_rank, psd_sqrt, singular_values, spectral_norm,
    HermitianEigen, HermitianSplit,
};
pub(crate) use decomp::{full_svd, hermitian_asymmetry, lu_solve, norm2, nullspace, symmetrize};
pub(crate) use lyapunov::{lyapunov_triangular, stein_triangular, sylvester_upper};
pub use lyapunov::{solve_lyapunov, solve_stein};
pub use matrix::{CMatrix, C64};
pub use schur::Schur;
pub use spectral::{eigendata, EigenCluster, SpectralData};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical decision thresholds. All are relative and must lie in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank and kernel decisions.
    pub rank_rel_tol: f64,
    /// Negative eigenvalues above `-psd_rel_tol·‖A‖` count as zero.
    pub psd_rel_tol: f64,
    /// Norms below `1 - norm_plateau_tol` count as strict contraction.
    pub norm_plateau_tol: f64,
    /// Eigenvalues closer than `cluster_tol·‖A‖` are merged.
    pub cluster_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank_rel_tol: 1e-10, psd_rel_tol: 1e-12, norm_plateau_tol: 1e-9, cluster_tol: 1e-8 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("rank_rel_tol", self.rank_rel_tol),
            ("psd_rel_tol", self.psd_rel_tol),
            ("norm_plateau_tol", self.norm_plateau_tol),
            ("cluster_tol", self.cluster_tol),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::Tolerance { name, value });
            }
        }
        Ok(())
    }
}
