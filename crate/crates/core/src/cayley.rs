//! Scaled Cayley transform `M_τ(z) = (1 + τz/2)/(1 − τz/2)`, i.e. the
//! implicit midpoint propagator `B_d = (I + τ/2 B)^{-1}(I − τ/2 B)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coercivity::{certify_semidissipative, hypocoercivity_index, ContinuousSystem};
use crate::contractivity::{certify_semicontractive, hypocontractivity_index, DiscreteSystem};
use crate::error::{Error, Result};
use crate::linalg::{lu_solve, norm2, CMatrix, Tolerances, C64};

/// Poles closer than this many cluster radii are flagged.
const NEAR_POLE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct CayleyPair {
    pub tau: f64,
    pub continuous: ContinuousSystem,
    pub discrete: DiscreteSystem,
    /// Distance from the pole `2/τ` to the spectrum of `−B_c`.
    pub pole_distance: f64,
    pub near_pole: bool,
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be positive and finite, got {tau}")));
    }
    Ok(())
}

/// Distance from `pole` to the nearest of `points`, and whether it counts
/// as lying on them.
fn pole_check(points: &[C64], pole: C64, tol: &Tolerances) -> (f64, bool, bool) {
    let distance = points.iter().map(|p| (p - pole).norm()).fold(f64::INFINITY, f64::min);
    let radius = tol.cluster_tol * pole.norm().max(1.0);
    (distance, distance <= radius, distance <= NEAR_POLE_FACTOR * radius)
}

/// `(I + τ/2 B)^{-1}(I − τ/2 B)` by one LU factorization; no pole check.
pub fn cayley_matrix(b: &CMatrix, tau: f64) -> Result<CMatrix> {
    let n = b.require_square("system matrix")?;
    check_tau(tau)?;
    let h = b.inner() * C64::new(tau / 2.0, 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    CMatrix::new(lu_solve(&(&id + &h), &(&id - &h))?)
}

/// `(2/τ)(I + B_d)^{-1}(I − B_d)`, the matrix `B_c` with `M_τ(−B_c) = B_d`.
pub fn inverse_cayley_matrix(bd: &CMatrix, tau: f64) -> Result<CMatrix> {
    let n = bd.require_square("system matrix")?;
    check_tau(tau)?;
    let id = DMatrix::<C64>::identity(n, n);
    let x = lu_solve(&(&id + bd.inner()), &(&id - bd.inner()))?;
    CMatrix::new(x * C64::new(2.0 / tau, 0.0))
}

/// Discretizes `ẋ = −B_c x` with the implicit midpoint rule.
pub fn cayley_forward(sys: &ContinuousSystem, tau: f64) -> Result<CayleyPair> {
    check_tau(tau)?;
    let tol = sys.tolerances();
    let minus: Vec<C64> = sys.spectral().eigenvalues.iter().map(|l| -l).collect();
    let pole = C64::new(2.0 / tau, 0.0);
    let (pole_distance, on_pole, near_pole) = pole_check(&minus, pole, tol);
    if on_pole {
        return Err(Error::PoleOnSpectrum { pole, distance: pole_distance });
    }
    let bd = cayley_matrix(sys.matrix(), tau)?;
    let discrete = certify_semicontractive(&bd, tol)?;
    Ok(CayleyPair { tau, continuous: sys.clone(), discrete, pole_distance, near_pole })
}

/// Recovers the continuous system from a discrete one.
pub fn cayley_inverse(sys: &DiscreteSystem, tau: f64) -> Result<ContinuousSystem> {
    check_tau(tau)?;
    let pole = C64::new(-1.0, 0.0);
    let (distance, on_pole, _) = pole_check(&sys.spectral().eigenvalues, pole, sys.tolerances());
    if on_pole {
        return Err(Error::PoleOnSpectrum { pole, distance });
    }
    certify_semidissipative(&inverse_cayley_matrix(sys.matrix(), tau)?, sys.tolerances())
}

#[derive(Debug, Clone, Serialize)]
pub struct PreservationReport {
    pub tau: f64,
    pub m_hc: Option<usize>,
    pub m_dhc: Option<usize>,
    pub pass: bool,
    /// `‖(I − B_d*B_d) − 2τ R* B_H R‖ / max(1, ‖B_H‖)` with `R = (I + τ/2 B)^{-1}`.
    pub identity_defect_residual: f64,
    /// `‖τ/2 B_H − (B_d* + I)^{-1}(I − B_d*B_d)(B_d + I)^{-1}‖ / max(1, ‖B_H‖)`.
    pub identity_hermitian_residual: f64,
    /// Largest distance between `Λ(B_d)` and the mapped `Λ(B_c)`.
    pub spectral_mapping_residual: f64,
    pub pole_distance: f64,
    pub near_pole: bool,
}

/// Greedy matching distance between two eigenvalue multisets.
pub(crate) fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap_or((0, f64::INFINITY));
        if j < used.len() {
            used[j] = true;
        }
        worst = worst.max(d);
    }
    worst
}

/// Compares the continuous and discrete indices and checks the two
/// Hermitian-part identities linking `B_c` and `B_d = M_τ(−B_c)`.
pub fn verify_index_preservation(sys: &ContinuousSystem, tau: f64) -> Result<PreservationReport> {
    let pair = cayley_forward(sys, tau)?;
    let m_hc = hypocoercivity_index(sys, None)?.index;
    let m_dhc = hypocontractivity_index(&pair.discrete, None)?.index;

    let n = sys.dim();
    let id = DMatrix::<C64>::identity(n, n);
    let b = sys.matrix().inner();
    let bh = sys.split().hermitian_part.inner();
    let bd = pair.discrete.matrix().inner();
    let scale = norm2(bh).max(1.0);
    let defect = &id - bd.adjoint() * bd;

    let r = lu_solve(&(&id + b * C64::new(tau / 2.0, 0.0)), &id)?;
    let rhs = r.adjoint() * bh * &r * C64::new(2.0 * tau, 0.0);
    let identity_defect_residual = norm2(&(&defect - rhs)) / scale;

    let p = lu_solve(&(bd + &id), &id)?;
    let back = p.adjoint() * &defect * &p;
    let identity_hermitian_residual = norm2(&(bh * C64::new(tau / 2.0, 0.0) - back)) / scale;

    let mapped: Vec<C64> =
        sys.spectral().eigenvalues.iter().map(|l| (1.0 - l * (tau / 2.0)) / (1.0 + l * (tau / 2.0))).collect();
    let spectral_mapping_residual = multiset_distance(&mapped, &pair.discrete.spectral().eigenvalues);

    Ok(PreservationReport {
        tau,
        m_hc,
        m_dhc,
        pass: m_hc == m_dhc,
        identity_defect_residual,
        identity_hermitian_residual,
        spectral_mapping_residual,
        pole_distance: pair.pole_distance,
        near_pole: pair.near_pole,
    })
}
