//! Lyapunov and Stein equations by Schur-form back substitution.

use nalgebra::DMatrix;

use super::schur::Schur;
use super::{hermitian_asymmetry, hermitian_eigen, symmetrize, CMatrix, C64};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Solves `A X + X B = C` for upper triangular `A` (m×m) and `B` (n×n).
///
/// Requires `A_ii + B_jj ≠ 0` for all pairs.
pub(crate) fn sylvester_upper(a: &DMatrix<C64>, b: &DMatrix<C64>, c: &DMatrix<C64>) -> DMatrix<C64> {
    let (m, n) = c.shape();
    let mut x = DMatrix::<C64>::zeros(m, n);
    for j in 0..n {
        for i in (0..m).rev() {
            let mut rhs = c[(i, j)];
            for k in i + 1..m {
                rhs -= a[(i, k)] * x[(k, j)];
            }
            for l in 0..j {
                rhs -= x[(i, l)] * b[(l, j)];
            }
            x[(i, j)] = rhs / (a[(i, i)] + b[(j, j)]);
        }
    }
    x
}

/// Solves `T* W + W T = C` for upper triangular `T`.
pub(crate) fn lyapunov_triangular(t: &DMatrix<C64>, c: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    // reversing rows and columns turns T* into an upper triangular matrix
    let flip = |m: &DMatrix<C64>| DMatrix::from_fn(n, m.ncols(), |i, j| m[(n - 1 - i, j)]);
    let ta = t.adjoint();
    let upper = DMatrix::from_fn(n, n, |i, j| ta[(n - 1 - i, n - 1 - j)]);
    let w = sylvester_upper(&upper, t, &flip(c));
    flip(&w)
}

/// Solves `W − T* W T = C` for upper triangular `T`.
pub(crate) fn stein_triangular(t: &DMatrix<C64>, c: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    let mut w = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        // r = Σ_{k<i} conj(T_ki) W_k,:
        let mut r = vec![C64::new(0.0, 0.0); n];
        for k in 0..i {
            let tki = t[(k, i)].conj();
            if tki != C64::new(0.0, 0.0) {
                for (l, rl) in r.iter_mut().enumerate() {
                    *rl += tki * w[(k, l)];
                }
            }
        }
        // row i solves x (I − conj(T_ii) T) = C_i,: + r T
        let cii = t[(i, i)].conj();
        let mut x = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            let mut rhs = c[(i, j)];
            for l in 0..=j {
                rhs += r[l] * t[(l, j)];
            }
            for l in 0..j {
                rhs += cii * x[l] * t[(l, j)];
            }
            x[j] = rhs / (C64::new(1.0, 0.0) - cii * t[(j, j)]);
        }
        for j in 0..n {
            w[(i, j)] = x[j];
        }
    }
    w
}

fn check_rhs(a: &CMatrix, q: &CMatrix) -> Result<usize> {
    let n = a.require_square("system matrix")?;
    if q.rows() != n || q.cols() != n {
        return Err(Error::Dimension(format!("right-hand side is {}x{}, expected {n}x{n}", q.rows(), q.cols())));
    }
    let asym = hermitian_asymmetry(q.inner());
    if asym > HERMITIAN_TOL * q.frobenius().max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let lmin = hermitian_eigen(q.inner()).min();
    if lmin <= 0.0 {
        return Err(Error::NotPd { eigenvalue: lmin });
    }
    Ok(n)
}

/// Hermitian `X` with `A* X + X A = −Q`.
///
/// `A` must be stable (every eigenvalue has negative real part) and `Q`
/// Hermitian positive definite; then `X` is positive definite.
pub fn solve_lyapunov(a: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    check_rhs(a, q)?;
    let s = Schur::new(a.inner())?;
    if let Some(l) = s.eigenvalues().into_iter().find(|l| l.re >= 0.0) {
        return Err(Error::Spectrum { eigenvalue: l });
    }
    let c = -(s.z.adjoint() * symmetrize(q.inner()) * &s.z);
    let w = lyapunov_triangular(&s.t, &c);
    let x = &s.z * w * s.z.adjoint();
    Ok(CMatrix::wrap(symmetrize(&x)))
}

/// Hermitian `X` with `X − A* X A = Q`.
///
/// `A` must have spectral radius below one and `Q` must be Hermitian
/// positive definite; then `X` is positive definite.
pub fn solve_stein(a: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    check_rhs(a, q)?;
    let s = Schur::new(a.inner())?;
    if let Some(l) = s.eigenvalues().into_iter().find(|l| l.norm() >= 1.0) {
        return Err(Error::Spectrum { eigenvalue: l });
    }
    let c = s.z.adjoint() * symmetrize(q.inner()) * &s.z;
    let w = stein_triangular(&s.t, &c);
    let x = &s.z * w * s.z.adjoint();
    Ok(CMatrix::wrap(symmetrize(&x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;
    use proptest::prelude::*;

    fn lyap_residual(a: &CMatrix, x: &CMatrix, q: &CMatrix) -> f64 {
        spectral_norm(&(a.adjoint() * x + x * a + q))
    }

    #[test]
    fn scalar_balance() {
        let x = solve_lyapunov(&CMatrix::identity(3).scale(-1.0), &CMatrix::identity(3).scale(2.0)).unwrap();
        assert!((x - CMatrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn diagonal_componentwise() {
        let a = CMatrix::from_real_diagonal(&[-1.0, -2.0]);
        let x = solve_lyapunov(&a, &CMatrix::identity(2)).unwrap();
        assert!((x - CMatrix::from_real_diagonal(&[0.5, 0.25])).max_abs() < 1e-15);
    }

    #[test]
    fn normal_system_with_identity_hermitian_part() {
        let b = CMatrix::from_real_rows(&[[1.0, 1.0], [-1.0, 1.0]]);
        let a = -b.adjoint();
        let q = CMatrix::identity(2).scale(2.0);
        let x = solve_lyapunov(&a, &q).unwrap();
        assert!((&x - CMatrix::identity(2)).max_abs() < 1e-14);
        assert!(lyap_residual(&a, &x, &q) < 1e-14);
    }

    #[test]
    fn rejects_unstable_and_indefinite() {
        let q = CMatrix::identity(2);
        let a = CMatrix::from_real_diagonal(&[-1.0, 0.0]);
        assert!(matches!(solve_lyapunov(&a, &q), Err(Error::Spectrum { .. })));
        let a = CMatrix::from_real_diagonal(&[-1.0, -1.0]);
        let q = CMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(solve_lyapunov(&a, &q), Err(Error::NotPd { .. })));
    }

    #[test]
    fn stein_scalar_and_jordan() {
        let x = solve_stein(&CMatrix::from_real_rows(&[[0.5]]), &CMatrix::identity(1)).unwrap();
        assert!((x.get(0, 0).re - 4.0 / 3.0).abs() < 1e-15);
        let a = CMatrix::from_real_rows(&[[0.5, 1.0], [0.0, 0.5]]);
        let q = CMatrix::identity(2);
        let x = solve_stein(&a, &q).unwrap();
        assert!(spectral_norm(&(&x - a.adjoint() * &x * &a - &q)) < 1e-13);
        assert!(matches!(solve_stein(&CMatrix::from_real_diagonal(&[1.0, 0.2]), &q), Err(Error::Spectrum { .. })));
    }

    fn stable_matrix(n: usize, seed: u64, offset: f64) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = CMatrix::new(DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }))
        .unwrap();
        let abscissa = crate::linalg::eigendata(&g, &Default::default())
            .unwrap()
            .eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max);
        g.shift(C64::new(-abscissa - offset, 0.0))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn lyapunov_residual_small_and_solution_pd(n in 1usize..=12, seed in any::<u64>()) {
            let a = stable_matrix(n, seed, 0.1);
            let q = CMatrix::identity(n);
            let x = solve_lyapunov(&a, &q).unwrap();
            prop_assert!(lyap_residual(&a, &x, &q) <= 1e-10);
            prop_assert!(hermitian_eigen(x.inner()).min() > 0.0);
        }

        #[test]
        fn stein_residual_small(n in 1usize..=10, seed in any::<u64>()) {
            let a = stable_matrix(n, seed, 0.1);
            let rho = crate::linalg::eigendata(&a, &Default::default()).unwrap().spectral_radius;
            let a = a.scale(0.9 / rho.max(1e-3));
            let q = CMatrix::identity(n);
            let x = solve_stein(&a, &q).unwrap();
            let res = spectral_norm(&(&x - a.adjoint() * &x * &a - &q));
            prop_assert!(res <= 1e-9 * spectral_norm(&x).max(1.0));
        }
    }
}
