//! Lyapunov transformations `y = X^{1/2} x` that make a stable system as
//! coercive (or contractive) as its spectrum allows.
//!
//! The construction works on a reordered Schur form `B = Z T Z*`. Dominant
//! semi-simple eigenvalue clusters are moved to the front and split off by
//! Sylvester solves, giving `V^{-1} B V = diag(λ_1 I, …, λ_k I, T_R)`. On the
//! dominant blocks `X` is the identity; on `T_R` it solves a shifted
//! Lyapunov (continuous) or scaled Stein (discrete) equation with right-hand
//! side `‖B‖·I`. Finally `X = V^{-*} diag(I, X_R) V^{-1}`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cayley::cayley_matrix;
use crate::coercivity::ContinuousSystem;
use crate::error::{Error, Result};
use crate::linalg::{
    eigendata, expm, hermitian_asymmetry, hermitian_eigen, lu_solve, lyapunov_triangular, norm2, stein_triangular,
    sylvester_upper, symmetrize, CMatrix, Schur, Tolerances, C64,
};

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub vector: Vec<C64>,
    /// `|z* M z|/(z* X z·max(1, ‖B‖))` with `M` the unrelaxed inequality
    /// matrix (`XB + B*X − 2αX` or `ρ²X − B*XB`).
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformResult {
    pub discrete: bool,
    pub x: CMatrix,
    pub sqrt_x: CMatrix,
    /// `X^{1/2} B X^{-1/2}`.
    pub transformed: CMatrix,
    /// `λ_min` of the transformed Hermitian part, or the transformed
    /// spectral norm in the discrete case.
    pub achieved_margin: f64,
    /// `−μ = min Re λ(B)`, or `ρ(B)` in the discrete case.
    pub target: f64,
    pub epsilon: f64,
    pub cond_sqrt_x: f64,
    pub marginal: bool,
    /// `λ_min` of `XB + B*X − 2(α−ε)X`, resp. `(ρ²+ε)X − B*XB`, over `‖X‖`.
    pub inequality_min: f64,
    /// Dimension of the deflated dominant subspace.
    pub deflated: usize,
    pub witness: Option<Witness>,
}

/// `1e-2·|μ|` for continuous systems and `1e-2·(1 − ρ)` for discrete ones;
/// marginal systems fall back to `1e-2·max(1, ‖B‖)` and `1e-2`.
pub fn default_epsilon(b: &CMatrix, discrete: bool, tol: &Tolerances) -> Result<f64> {
    let spectral = eigendata(b, tol)?;
    let radius = tol.cluster_tol * norm2(b.inner()).max(1.0);
    Ok(if discrete {
        let gap = 1.0 - spectral.spectral_radius;
        if gap > radius {
            1e-2 * gap
        } else {
            1e-2
        }
    } else {
        let mu = spectral.spectral_abscissa_of_minus_b;
        if mu.abs() > radius {
            1e-2 * mu.abs()
        } else {
            1e-2 * norm2(b.inner()).max(1.0)
        }
    })
}

/// `X > 0` with `XB + B*X ⪰ 2(α − ε)X`, `α = min Re λ(B)`, so that
/// `X^{1/2} B X^{-1/2}` has Hermitian part at least `α − ε`. With `ε = 0`
/// and semi-simple dominant eigenvalues the bound `α` is attained.
pub fn maximally_coercive(b: &CMatrix, epsilon: f64, tol: &Tolerances) -> Result<TransformResult> {
    construct(b, epsilon, tol, false)
}

/// [`maximally_coercive`] for a certified semi-dissipative system.
pub fn maximally_coercive_system(sys: &ContinuousSystem, epsilon: f64) -> Result<TransformResult> {
    construct(sys.matrix(), epsilon, sys.tolerances(), false)
}

/// `X > 0` with `(ρ² + ε)X ⪰ B*XB`, so that `‖X^{1/2} B X^{-1/2}‖ ≤ √(ρ² + ε)`.
pub fn maximally_contractive(b: &CMatrix, epsilon: f64, tol: &Tolerances) -> Result<TransformResult> {
    construct(b, epsilon, tol, true)
}

fn construct(b: &CMatrix, epsilon: f64, tol: &Tolerances, discrete: bool) -> Result<TransformResult> {
    tol.validate()?;
    let n = b.require_square("system matrix")?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be finite and nonnegative, got {epsilon}")));
    }
    let bm = b.inner();
    let bnorm = norm2(bm);
    let radius = tol.cluster_tol * bnorm.max(1.0);
    let spectral = eigendata(b, tol)?;

    let (level, marginal) = if discrete {
        let rho = spectral.spectral_radius;
        if rho > 1.0 + radius {
            return Err(Error::NotStable { margin: 1.0 - rho });
        }
        (rho, rho >= 1.0 - radius)
    } else {
        let alpha = -spectral.spectral_abscissa_of_minus_b;
        if alpha < -radius {
            return Err(Error::NotStable { margin: alpha });
        }
        (alpha, alpha <= radius)
    };
    if marginal && epsilon == 0.0 {
        return Err(Error::MarginalNeedsEpsilon);
    }
    let dominant = |v: C64| if discrete { v.norm() >= level - radius } else { v.re - level <= radius };

    let mut order = Vec::new();
    let mut sizes = Vec::new();
    let mut clusters: Vec<_> = spectral.clusters.iter().filter(|c| dominant(c.value)).collect();
    clusters.sort_by_key(|c| c.members.iter().min().copied());
    for c in clusters {
        if c.is_defective() {
            if epsilon == 0.0 {
                return Err(Error::DefectiveNeedsEpsilon { eigenvalue: c.value });
            }
            continue;
        }
        let mut members = c.members.clone();
        members.sort_unstable();
        sizes.push(members.len());
        order.extend(members);
    }
    let s: usize = sizes.iter().sum();

    let mut schur = Schur::new(bm)?;
    schur.reorder(&order);
    let mut t = schur.t.clone();
    let mut w = DMatrix::<C64>::identity(n, n);
    let mut off = 0;
    for &size in &sizes {
        let end = off + size;
        if end < n {
            let t11 = t.view((off, off), (size, size)).into_owned();
            let t22 = t.view((end, end), (n - end, n - end)).into_owned();
            let t12 = t.view((off, end), (size, n - end)).into_owned();
            let y = sylvester_upper(&t11, &(-t22), &(-t12));
            t.view_mut((off, end), (size, n - end)).fill(C64::new(0.0, 0.0));
            let wy = w.view((0, off), (n, size)) * &y;
            let mut tail = w.view_mut((0, end), (n, n - end));
            tail += wy;
        }
        off = end;
    }

    let r = n - s;
    let mut xhat = DMatrix::<C64>::identity(n, n);
    if r > 0 {
        let qscale = if bnorm > 0.0 { bnorm } else { 1.0 };
        let q = DMatrix::<C64>::identity(r, r) * C64::new(qscale, 0.0);
        let trr = t.view((s, s), (r, r)).into_owned();
        let xr = if discrete {
            let scale = (level * level + epsilon).sqrt();
            let a = &trr / C64::new(scale, 0.0);
            if let Some(i) = (0..r).find(|&i| a[(i, i)].norm() >= 1.0) {
                return Err(Error::NotStable { margin: 1.0 - trr[(i, i)].norm() });
            }
            stein_triangular(&a, &(q / C64::new(scale * scale, 0.0)))
        } else {
            let shift = level - epsilon;
            let a = &trr - DMatrix::<C64>::identity(r, r) * C64::new(shift, 0.0);
            if let Some(i) = (0..r).find(|&i| a[(i, i)].re <= 0.0) {
                return Err(Error::NotStable { margin: trr[(i, i)].re });
            }
            lyapunov_triangular(&a, &q)
        };
        xhat.view_mut((s, s), (r, r)).copy_from(&symmetrize(&xr));
    }

    let v = &schur.z * &w;
    let vinv = lu_solve(&v, &DMatrix::identity(n, n))?;
    let x = symmetrize(&(vinv.adjoint() * &xhat * &vinv));
    let eig = hermitian_eigen(&x);
    if eig.min() <= 0.0 {
        return Err(Error::NoConvergence("Lyapunov transform lost definiteness"));
    }
    let sqrt_x = eig.apply(f64::sqrt);
    let inv_sqrt_x = eig.apply(|l| 1.0 / l.sqrt());
    let transformed = &sqrt_x * bm * &inv_sqrt_x;
    let achieved_margin = if discrete { norm2(&transformed) } else { hermitian_eigen(&symmetrize(&transformed)).min() };

    let inequality = |lvl: f64, slack: f64| {
        if discrete {
            &x * C64::new(lvl * lvl + slack, 0.0) - bm.adjoint() * &x * bm
        } else {
            &x * bm + bm.adjoint() * &x - &x * C64::new(2.0 * (lvl - slack), 0.0)
        }
    };
    let inequality_min = hermitian_eigen(&symmetrize(&inequality(level, epsilon))).min() / eig.max();

    let witness = (s > 0).then(|| {
        let key = |k: usize| if discrete { -t[(k, k)].norm() } else { t[(k, k)].re };
        let k = (0..s).min_by(|&i, &j| key(i).total_cmp(&key(j))).expect("nonempty");
        let z = v.column(k).into_owned();
        let m = inequality(level, 0.0);
        let num = (z.adjoint() * m * &z)[(0, 0)].norm();
        let den = (z.adjoint() * &x * &z)[(0, 0)].re;
        Witness { vector: z.iter().copied().collect(), residual: num / (den * bnorm.max(1.0)) }
    });

    Ok(TransformResult {
        discrete,
        x: CMatrix::new(x)?,
        sqrt_x: CMatrix::new(sqrt_x)?,
        transformed: CMatrix::new(transformed)?,
        achieved_margin,
        target: level,
        epsilon,
        cond_sqrt_x: (eig.max() / eig.min()).sqrt(),
        marginal,
        inequality_min,
        deflated: s,
        witness,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplificationPoint {
    pub t: f64,
    pub error: f64,
    /// Plain one-step-method bound with `L_x`.
    pub plain_bound: f64,
    /// The same bound times `κ(X^{1/2})`.
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplificationReport {
    pub tau: f64,
    pub t_final: f64,
    pub cond_sqrt_x: f64,
    /// `‖(I + τ/2 B)^{-1} B‖`.
    pub lipschitz_x: f64,
    /// The same quantity for `X^{1/2} B X^{-1/2}`.
    pub lipschitz_y: f64,
    /// `κ(X^{1/2})·L_x`.
    pub lipschitz_y_bound: f64,
    /// Largest local error per unit time, by Richardson extrapolation.
    pub theta_max: f64,
    /// The same from the exponential reference.
    pub theta_reference: f64,
    pub points: Vec<AmplificationPoint>,
    pub max_error: f64,
    /// Max error at `τ` over max error at `τ/2`.
    pub richardson_ratio: f64,
    pub dominated: bool,
}

fn midpoint_max_error(b: &DMatrix<C64>, x0: &DMatrix<C64>, tau: f64, steps: usize) -> Result<Vec<f64>> {
    let bd = cayley_matrix(&CMatrix::wrap(b.clone()), tau)?.into_inner();
    let mut u = x0.clone();
    let mut errors = vec![0.0];
    for i in 1..=steps {
        u = &bd * u;
        let exact = expm(&CMatrix::wrap(b * C64::new(-(i as f64) * tau, 0.0)))?.into_inner() * x0;
        errors.push((exact - &u).norm());
    }
    Ok(errors)
}

/// Compares the implicit midpoint error on `[0, t_final]` with the one-step
/// method bound in original and in `X^{1/2}`-transformed coordinates.
/// `x0` defaults to `(1, …, 1)/√n`.
pub fn error_amplification_report(
    b: &CMatrix,
    x: &CMatrix,
    t_final: f64,
    tau: f64,
    x0: Option<&[C64]>,
) -> Result<AmplificationReport> {
    let n = b.require_square("system matrix")?;
    if x.rows() != n || x.cols() != n {
        return Err(Error::Dimension(format!("X is {}x{}, expected {n}x{n}", x.rows(), x.cols())));
    }
    if !(tau > 0.0 && t_final > 0.0 && tau.is_finite() && t_final.is_finite()) {
        return Err(Error::InvalidArgument("tau and t_final must be positive".into()));
    }
    let asym = hermitian_asymmetry(x.inner());
    if asym > 1e-12 * x.frobenius() {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let eig = hermitian_eigen(&symmetrize(x.inner()));
    if eig.min() <= 0.0 {
        return Err(Error::NotPd { eigenvalue: eig.min() });
    }
    let kappa = (eig.max() / eig.min()).sqrt();
    let bm = b.inner();
    let id = DMatrix::<C64>::identity(n, n);
    let lipschitz =
        |m: &DMatrix<C64>| -> Result<f64> { Ok(norm2(&lu_solve(&(&id + m * C64::new(tau / 2.0, 0.0)), m)?)) };
    let lipschitz_x = lipschitz(bm)?;
    let bt = eig.apply(f64::sqrt) * bm * eig.apply(|l| 1.0 / l.sqrt());
    let lipschitz_y = lipschitz(&bt)?;

    let steps = ((t_final / tau).round() as usize).max(1);
    let x0 = match x0 {
        Some(v) if v.len() == n => DMatrix::from_column_slice(n, 1, v),
        Some(v) => return Err(Error::Dimension(format!("initial value has length {}, expected {n}", v.len()))),
        None => DMatrix::from_element(n, 1, C64::new(1.0 / (n as f64).sqrt(), 0.0)),
    };

    let full = cayley_matrix(b, tau)?.into_inner();
    let half = cayley_matrix(b, tau / 2.0)?.into_inner();
    let half2 = &half * &half;
    let step = expm(&b.scale(-tau))?.into_inner();
    let mut theta_max: f64 = 0.0;
    let mut theta_reference: f64 = 0.0;
    for i in 0..steps {
        let xi = expm(&b.scale(-(i as f64) * tau))?.into_inner() * &x0;
        let one = &full * &xi;
        theta_max = theta_max.max(4.0 / 3.0 * (&one - &half2 * &xi).norm() / tau);
        theta_reference = theta_reference.max((&step * &xi - &one).norm() / tau);
    }

    let errors = midpoint_max_error(bm, &x0, tau, steps)?;
    let points: Vec<AmplificationPoint> = errors
        .iter()
        .enumerate()
        .map(|(i, &error)| {
            let t = i as f64 * tau;
            let plain_bound = t * theta_max * (lipschitz_x * t).exp();
            AmplificationPoint { t, error, plain_bound, bound: kappa * plain_bound }
        })
        .collect();
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    let fine = midpoint_max_error(bm, &x0, tau / 2.0, 2 * steps)?;
    let fine_max = fine.iter().copied().fold(0.0, f64::max);
    Ok(AmplificationReport {
        tau,
        t_final: steps as f64 * tau,
        cond_sqrt_x: kappa,
        lipschitz_x,
        lipschitz_y,
        lipschitz_y_bound: kappa * lipschitz_x,
        theta_max,
        theta_reference,
        dominated: points.iter().all(|p| p.error <= p.bound),
        points,
        max_error,
        richardson_ratio: max_error / fine_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::multiset_distance;
    use crate::coercivity::{certify_semidissipative, hypocoercivity_index};
    use crate::corpus::{item_seed, stable_matrix};
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn worked() -> CMatrix {
        CMatrix::from_real_rows(&[[0.0, 0.5], [-0.5, 1.0]])
    }

    fn eigs(m: &CMatrix) -> Vec<C64> {
        Schur::new(m.inner()).unwrap().eigenvalues()
    }

    #[test]
    fn semisimple_complex_pair() {
        let b = CMatrix::from_real_rows(&[[1.0, 1.0], [-1.0, 1.0]]);
        let r = maximally_coercive(&b, 0.0, &tol()).unwrap();
        assert!((r.target - 1.0).abs() < 1e-14);
        assert!((r.achieved_margin - 1.0).abs() < 1e-8);
        assert_eq!(r.deflated, 2);
        assert!(r.witness.unwrap().residual < 1e-12);
        assert!(!r.marginal);
    }

    #[test]
    fn defective_worked_example() {
        let b = worked();
        assert!(matches!(maximally_coercive(&b, 0.0, &tol()), Err(Error::DefectiveNeedsEpsilon { .. })));
        for eps in [0.1, 0.05, 0.01] {
            let r = maximally_coercive(&b, eps, &tol()).unwrap();
            assert!((r.target - 0.5).abs() < 1e-7);
            assert!(r.achieved_margin >= 0.5 - eps - 1e-10, "eps={eps}: {}", r.achieved_margin);
            assert!(r.achieved_margin <= 0.5 + 1e-8);
            assert!(r.witness.is_none());
        }
        // the price of a smaller slack is a worse conditioned transform
        let k1 = maximally_coercive(&b, 0.1, &tol()).unwrap().cond_sqrt_x;
        let k2 = maximally_coercive(&b, 0.01, &tol()).unwrap().cond_sqrt_x;
        assert!(k2 > k1);
        assert!((default_epsilon(&b, false, &tol()).unwrap() - 5e-3).abs() < 1e-10);
    }

    #[test]
    fn diagonal_is_already_optimal() {
        let r = maximally_coercive(&CMatrix::from_real_diagonal(&[1.0, 2.0]), 0.0, &tol()).unwrap();
        assert!((r.achieved_margin - 1.0).abs() < 1e-12);
        let w = r.witness.unwrap();
        assert!(w.residual < 1e-14);
        assert!(w.vector[1].norm() < 1e-14 && w.vector[0].norm() > 0.0);
        // X is diagonal, so the transformed matrix is B itself
        assert!((r.transformed - CMatrix::from_real_diagonal(&[1.0, 2.0])).max_abs() < 1e-12);
    }

    #[test]
    fn marginal_and_unstable() {
        let rot = CMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        assert!(matches!(maximally_coercive(&rot, 0.0, &tol()), Err(Error::MarginalNeedsEpsilon)));
        let r = maximally_coercive(&rot, 0.1, &tol()).unwrap();
        assert!(r.marginal);
        assert!(r.achieved_margin >= -0.1 - 1e-12);
        assert!(matches!(
            maximally_coercive(&CMatrix::from_real_diagonal(&[-1.0, 1.0]), 0.1, &tol()),
            Err(Error::NotStable { .. })
        ));
        assert!(matches!(
            maximally_contractive(&CMatrix::from_real_diagonal(&[1.5, 0.1]), 0.1, &tol()),
            Err(Error::NotStable { .. })
        ));
        assert!(matches!(
            maximally_contractive(&CMatrix::from_real_diagonal(&[-1.0, 0.1]), 0.0, &tol()),
            Err(Error::MarginalNeedsEpsilon)
        ));
    }

    #[test]
    fn discrete_examples() {
        let r = maximally_contractive(&CMatrix::from_real_diagonal(&[0.5, 0.25]), 0.0, &tol()).unwrap();
        assert!((r.achieved_margin - 0.5).abs() < 1e-12);
        assert!(r.witness.unwrap().residual < 1e-12);

        let jordan = CMatrix::from_real_rows(&[[0.5, 1.0], [0.0, 0.5]]);
        assert!(matches!(maximally_contractive(&jordan, 0.0, &tol()), Err(Error::DefectiveNeedsEpsilon { .. })));
        let r = maximally_contractive(&jordan, 0.01, &tol()).unwrap();
        assert!(r.achieved_margin <= 0.26f64.sqrt() + 1e-10);
        assert!(r.achieved_margin >= 0.5 - 1e-8);
        // oracle: X = diag(δ², 1) drives the norm towards ρ as δ → 0
        let mut prev = f64::INFINITY;
        for delta in [1.0, 0.1, 0.01, 0.001] {
            let s = CMatrix::from_real_diagonal(&[delta, 1.0]);
            let si = CMatrix::from_real_diagonal(&[1.0 / delta, 1.0]);
            let v = norm2((&s * &jordan * &si).inner());
            assert!(v < prev && v >= 0.5);
            prev = v;
        }
        assert!(prev - 0.5 < 2e-3);
    }

    #[test]
    fn discrete_cayley_image() {
        let b = CMatrix::from_real_rows(&[[1.0, 1.0], [-1.0, 1.0]]);
        let tau = 0.5;
        let bd = cayley_matrix(&b, tau).unwrap();
        let l = C64::new(1.0, 1.0);
        let rho = ((C64::new(1.0, 0.0) - l * tau / 2.0) / (C64::new(1.0, 0.0) + l * tau / 2.0)).norm();
        let r = maximally_contractive(&bd, 0.0, &tol()).unwrap();
        assert!((r.target - rho).abs() < 1e-12);
        assert!((r.achieved_margin - rho).abs() < 1e-8);
    }

    #[test]
    fn continuous_x_certifies_midpoint_contraction() {
        for seed in 0..10 {
            let b = stable_matrix(4, 0.3, item_seed(99, seed));
            let r = maximally_coercive(&b, 0.0, &tol()).unwrap();
            for tau in [0.25, 0.5, 1.0] {
                let bd = cayley_matrix(&b, tau).unwrap();
                let m = r.x.inner() - bd.inner().adjoint() * r.x.inner() * bd.inner();
                assert!(hermitian_eigen(&symmetrize(&m)).min() >= -1e-10 * norm2(r.x.inner()));
                let bdt =
                    &r.sqrt_x * &bd * CMatrix::wrap(lu_solve(r.sqrt_x.inner(), &DMatrix::identity(4, 4)).unwrap());
                assert!(norm2(bdt.inner()) < 1.0);
            }
        }
    }

    #[test]
    fn amplification_identity_transform() {
        let b = CMatrix::from_real_rows(&[[1.0, 1.0], [-1.0, 1.0]]);
        let rep = error_amplification_report(&b, &CMatrix::identity(2), 1.0, 0.01, None).unwrap();
        assert!((rep.cond_sqrt_x - 1.0).abs() < 1e-14);
        for p in &rep.points {
            assert!((p.bound - p.plain_bound).abs() <= 1e-15 * p.bound);
        }
        assert!(rep.dominated);
        assert!((rep.lipschitz_y - rep.lipschitz_x).abs() < 1e-14);
        assert!(matches!(
            error_amplification_report(&b, &CMatrix::from_real_diagonal(&[1.0, -1.0]), 1.0, 0.01, None),
            Err(Error::NotPd { .. })
        ));
    }

    #[test]
    fn amplification_worked_example() {
        let b = worked();
        let r = maximally_coercive(&b, 0.05, &tol()).unwrap();
        let rep = error_amplification_report(&b, &r.x, 1.0, 0.01, None).unwrap();
        assert!(rep.dominated);
        assert_eq!(rep.points.len(), 101);
        assert!((rep.richardson_ratio - 4.0).abs() <= 0.3, "ratio {}", rep.richardson_ratio);
        assert!((rep.theta_max / rep.theta_reference - 1.0).abs() < 0.05);
        assert!(rep.lipschitz_y <= rep.lipschitz_y_bound * (1.0 + 1e-12));
        assert!(rep.cond_sqrt_x > 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn continuous_properties(n in 1usize..=6, margin in 0.05f64..2.0, seed in any::<u64>()) {
            let b = stable_matrix(n, margin, seed);
            let r = maximally_coercive(&b, 0.0, &tol()).unwrap();
            let bn = norm2(b.inner());
            prop_assert!((r.target - margin).abs() < 1e-9 * bn.max(1.0));
            prop_assert!((r.achieved_margin / r.target - 1.0).abs() <= 1e-6);
            prop_assert!(r.achieved_margin <= r.target + 1e-8 * bn.max(1.0));
            prop_assert!(r.inequality_min >= -1e-8 * bn.max(1.0));
            prop_assert!(r.witness.as_ref().unwrap().residual <= 1e-6);
            prop_assert!(multiset_distance(&eigs(&b), &eigs(&r.transformed)) <= 1e-6 * bn.max(1.0));
            let sys = certify_semidissipative(&r.transformed, &tol()).unwrap();
            prop_assert_eq!(hypocoercivity_index(&sys, None).unwrap().index, Some(0));
        }

        #[test]
        fn defective_slack(eps in 0.01f64..0.5, lam in 0.1f64..2.0, c in 0.5f64..3.0) {
            let b = CMatrix::from_real_rows(&[[lam, c, 0.0], [0.0, lam, 0.0], [0.0, 0.0, lam + 1.0]]);
            let r = maximally_coercive(&b, eps * lam, &tol()).unwrap();
            prop_assert!(r.achieved_margin >= lam - eps * lam - 1e-9);
            prop_assert!(r.achieved_margin <= lam + 1e-9);
        }

        #[test]
        fn discrete_properties(n in 1usize..=6, margin in 0.05f64..2.0, seed in any::<u64>(), tau in 0.1f64..2.0) {
            let bd = cayley_matrix(&stable_matrix(n, margin, seed), tau).unwrap();
            let r = maximally_contractive(&bd, 0.0, &tol()).unwrap();
            prop_assert!(r.target < 1.0);
            prop_assert!((r.achieved_margin - r.target).abs() <= 1e-6 * r.target.max(1e-3));
            prop_assert!(r.achieved_margin >= r.target - 1e-8);
            prop_assert!(r.inequality_min >= -1e-8);
            prop_assert!(r.witness.as_ref().unwrap().residual <= 1e-6);
            prop_assert!(multiset_distance(&eigs(&bd), &eigs(&r.transformed)) <= 1e-6);
        }
    }
}
