//! Discrete propagator norms `φ_k(τ) = ‖B_d(τ)^k‖`, symmetric finite
//! differences at `k = 0`, and their limits as `τ → 0`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::cayley::{cayley_forward, CayleyPair};
use crate::coercivity::{check_grid, decay_constant, hypocoercivity_index, loglog_fit, ContinuousSystem};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, lu_solve, norm2, C64};

/// Finite-difference weights on the integer offsets `−h..=h`.
#[derive(Debug, Clone, Serialize)]
pub struct StencilWeights {
    pub order: usize,
    pub offsets: Vec<i64>,
    pub weights: Vec<f64>,
}

impl StencilWeights {
    /// `Σ w_i f(offset_i)`.
    pub fn apply(&self, f: impl Fn(i64) -> f64) -> f64 {
        self.offsets.iter().zip(&self.weights).map(|(&k, &w)| w * f(k)).sum()
    }
}

/// Weights of the order-`d` derivative at 0 on the stencil `−h..=h` with
/// unit spacing (Fornberg's recursion).
pub fn fornberg_weights(d: usize, halfwidth: usize) -> Result<StencilWeights> {
    let npts = 2 * halfwidth + 1;
    if npts <= d {
        return Err(Error::StencilTooShort { order: d, halfwidth });
    }
    let h = halfwidth as i64;
    let offsets: Vec<i64> = (-h..=h).collect();
    let x: Vec<f64> = offsets.iter().map(|&k| k as f64).collect();
    // c[j][k]: weight of point j for derivative k
    let mut c = vec![vec![0.0f64; d + 1]; npts];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0];
    for i in 1..npts {
        let mn = i.min(d);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i];
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    let weights = c.iter().map(|row| row[d]).collect();
    Ok(StencilWeights { order: d, offsets, weights })
}

/// `φ_k(τ)` for `k = −k_max..=k_max`, with `φ_{−k} = 2 − φ_k`.
#[derive(Debug, Clone, Serialize)]
pub struct GridFunction {
    pub tau: f64,
    pub k_max: usize,
    /// `values[k + k_max] = φ_k`.
    pub values: Vec<f64>,
}

impl GridFunction {
    /// `φ_k`; panics when `|k| > k_max`.
    pub fn phi(&self, k: i64) -> f64 {
        assert!(k.unsigned_abs() as usize <= self.k_max, "k = {k} outside the grid");
        self.values[(k + self.k_max as i64) as usize]
    }

    pub fn ks(&self) -> impl Iterator<Item = i64> {
        let h = self.k_max as i64;
        -h..=h
    }
}

pub fn grid_function(pair: &CayleyPair, k_max: usize) -> GridFunction {
    let b = pair.discrete.matrix().inner();
    let n = b.nrows();
    let mut forward = Vec::with_capacity(k_max + 1);
    forward.push(1.0);
    let mut power = DMatrix::<C64>::identity(n, n);
    for _ in 0..k_max {
        power = &power * b;
        forward.push(norm2(&power));
    }
    let mut values = Vec::with_capacity(2 * k_max + 1);
    values.extend(forward[1..].iter().rev().map(|p| 2.0 - p));
    values.extend(forward.iter().copied());
    GridFunction { tau: pair.tau, k_max, values }
}

/// `1 − ‖B_d^k‖` computed from
/// `I − (B_d*)^k B_d^k = 2τ Σ_{j<k} (B_d*)^j R* B_H R B_d^j`, `R = (I + τ/2 B_c)^{-1}`,
/// so that tiny defects keep their relative accuracy.
pub fn discrete_defect(pair: &CayleyPair, k: usize) -> Result<f64> {
    let bd = pair.discrete.matrix().inner();
    let n = bd.nrows();
    let mut power = DMatrix::<C64>::identity(n, n);
    for _ in 0..k {
        power = &power * bd;
    }
    let direct = 1.0 - norm2(&power);
    if direct >= 1e-9 || k == 0 {
        return Ok(if k == 0 { 0.0 } else { direct });
    }
    let id = DMatrix::<C64>::identity(n, n);
    let b = pair.continuous.matrix().inner();
    let bh = pair.continuous.split().hermitian_part.inner();
    let r = lu_solve(&(&id + b * C64::new(pair.tau / 2.0, 0.0)), &id)?;
    let core = r.adjoint() * bh * &r * C64::new(2.0 * pair.tau, 0.0);
    let mut g = DMatrix::<C64>::zeros(n, n);
    let mut p = id;
    for _ in 0..k {
        g += p.adjoint() * &core * &p;
        p = &p * bd;
    }
    let lmin = hermitian_eigen(&g).min().max(0.0);
    Ok(lmin / (1.0 + (1.0 - lmin).max(0.0).sqrt()))
}

#[derive(Debug, Clone, Serialize)]
pub struct PeanoEstimate {
    pub tau: f64,
    pub m: usize,
    /// `(φ_{m+1}(τ) − 1)/τ^{2m+1}`.
    pub value: f64,
    /// Order-`(2m+1)` stencil applied to the odd-extended grid.
    pub stencil_difference: f64,
    /// `|stencil_difference − (φ_{m+1} − 1)|`.
    pub collapse_residual: f64,
    /// `max_{j≤2m} |[Δ^j φ]_0 − δ_{0j}|`.
    pub lower_order_residual: f64,
}

/// Order-`(2m+1)` symmetric difference of `φ` at 0 divided by `τ^{2m+1}`,
/// with `m` the hypocoercivity index of the continuous system.
pub fn peano_estimate(pair: &CayleyPair, m: usize) -> Result<PeanoEstimate> {
    let index = hypocoercivity_index(&pair.continuous, None)?.index.ok_or(Error::IndexMissing)?;
    if index != m {
        return Err(Error::IndexMismatch { expected: index, got: m });
    }
    let grid = grid_function(pair, m + 1);
    let stencil = fornberg_weights(2 * m + 1, m + 1)?;
    let stencil_difference = stencil.apply(|k| grid.phi(k));
    let collapsed = grid.phi(m as i64 + 1) - 1.0;
    let collapse_residual = (stencil_difference - collapsed).abs();
    let mut lower_order_residual: f64 = 0.0;
    for j in 0..=2 * m {
        let w = fornberg_weights(j, j.div_ceil(2))?;
        let target = if j == 0 { 1.0 } else { 0.0 };
        lower_order_residual = lower_order_residual.max((w.apply(|k| grid.phi(k)) - target).abs());
    }
    let defect = discrete_defect(pair, m + 1)?;
    Ok(PeanoEstimate {
        tau: pair.tau,
        m,
        value: -defect / pair.tau.powi(2 * m as i32 + 1),
        stencil_difference,
        collapse_residual,
        lower_order_residual,
    })
}

/// Points with `1 − φ` below this are dropped from onset fits.
pub const ONSET_FIT_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Serialize)]
pub struct OnsetFit {
    pub m: usize,
    /// Fitted exponent of `1 − ‖B_d(τ)^{m+1}‖`, expected `2m + 1`.
    pub a_hat: f64,
    /// Fitted leading coefficient divided by `(2m+1)!`.
    pub c_hat: f64,
    /// `c` from the continuous decay constant.
    pub decay_constant: f64,
    pub relative_deviation: f64,
}

/// Fits `‖B_d(τ)^{m+1}‖ ≈ 1 − (2m+1)!·c·τ^a` over a decreasing `τ` grid.
pub fn contraction_onset_expansion(sys: &ContinuousSystem, tau_grid: &[f64]) -> Result<OnsetFit> {
    check_grid(tau_grid, f64::INFINITY)?;
    let report = hypocoercivity_index(sys, None)?;
    let m = report.index.ok_or(Error::IndexMissing)?;
    let expansion = decay_constant(sys, &report)?;
    let defects = tau_grid
        .par_iter()
        .map(|&tau| discrete_defect(&cayley_forward(sys, tau)?, m + 1))
        .collect::<Result<Vec<_>>>()?;
    let (a_hat, lead) = loglog_fit(tau_grid, &defects, |_| ONSET_FIT_FLOOR)?;
    let fact: f64 = (2..=(2 * m + 1)).map(|k| k as f64).product();
    let c_hat = lead / fact;
    Ok(OnsetFit {
        m,
        a_hat,
        c_hat,
        decay_constant: expansion.constant_c,
        relative_deviation: c_hat / expansion.constant_c - 1.0,
    })
}

/// Largest order accepted by [`lemma53_minimum`].
pub const LEMMA53_MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct Lemma53Minimum {
    pub m: usize,
    pub min_value: f64,
    /// `λ_1..λ_m` (with `λ_0 = 1`).
    pub minimizer: Vec<f64>,
    /// `1/binom(2m, m)`.
    pub closed_form: f64,
}

/// Taylor coefficients `w_r^{(j)}`, `r ≤ m`, of `(1 − z/2)^j/(1 + z/2)^{j+1}`
/// built as Cauchy products of `a_0 = 1, a_i = 2(−1/2)^i` (the series of
/// `(1 − z/2)/(1 + z/2)`) and `(−1/2)^i` (the series of `1/(1 + z/2)`).
pub fn w_coefficients(j: usize, m: usize) -> Vec<f64> {
    let a: Vec<f64> = (0..=m).map(|i| if i == 0 { 1.0 } else { 2.0 * (-0.5f64).powi(i as i32) }).collect();
    let mut w: Vec<f64> = (0..=m).map(|i| (-0.5f64).powi(i as i32)).collect();
    for _ in 0..j {
        let mut next = vec![0.0; m + 1];
        for (r, slot) in next.iter_mut().enumerate() {
            *slot = (0..=r).map(|i| a[i] * w[r - i]).sum();
        }
        w = next;
    }
    w
}

/// `min_{λ_1..λ_m} ‖Qλ + b‖²` with `Q_{j,k} = w_{m−k}^{(j)}`, `b_j = w_m^{(j)}`,
/// `j = 0..=m`, solved as dense least squares.
pub fn lemma53_minimum(m: usize) -> Result<Lemma53Minimum> {
    if m > LEMMA53_MAX_ORDER {
        return Err(Error::OrderTooLarge { m, max: LEMMA53_MAX_ORDER });
    }
    let w: Vec<Vec<f64>> = (0..=m).map(|j| w_coefficients(j, m)).collect();
    let q = DMatrix::<f64>::from_fn(m + 1, m, |j, k| w[j][m - (k + 1)]);
    let b = DMatrix::<f64>::from_fn(m + 1, 1, |j, _| w[j][m]);
    let lambda = if m == 0 {
        DMatrix::<f64>::zeros(0, 1)
    } else {
        q.clone().svd(true, true).solve(&(-&b), 0.0).map_err(|e| Error::InvalidArgument(e.to_string()))?
    };
    let residual = &q * &lambda + &b;
    let binom: f64 = (1..=m).map(|k| (m + k) as f64 / k as f64).product();
    Ok(Lemma53Minimum {
        m,
        min_value: residual.norm_squared(),
        minimizer: lambda.iter().copied().collect(),
        closed_form: 1.0 / binom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coercivity::{certify_semidissipative, dyadic_grid};
    use crate::linalg::{CMatrix, Tolerances};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Signed, Zero};
    use proptest::prelude::*;

    fn sys<R: AsRef<[f64]>>(rows: &[R]) -> ContinuousSystem {
        certify_semidissipative(&CMatrix::from_real_rows(rows), &Tolerances::default()).unwrap()
    }

    fn worked() -> ContinuousSystem {
        sys(&[&[0.0, 0.5], &[-0.5, 1.0]])
    }

    fn fig1() -> ContinuousSystem {
        sys(&[&[0.0, 1.0], &[-1.0, 1.0]])
    }

    fn fig2() -> ContinuousSystem {
        sys(&[&[0.0, 1.0, 0.0], &[-1.0, 0.0, 1.0], &[0.0, -1.0, 1.0]])
    }

    /// Oracle: solve the moment system `Σ w_k k^p = d!·δ_{pd}` exactly.
    fn vandermonde_weights(d: usize, h: usize) -> Vec<BigRational> {
        let n = 2 * h + 1;
        let int = |v: i64| BigRational::from_integer(BigInt::from(v));
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|p| {
                let mut row: Vec<BigRational> = (-(h as i64)..=h as i64).map(|k| int(k).pow(p as i32)).collect();
                let fact: i64 = (1..=d as i64).product();
                row.push(if p == d { int(fact) } else { BigRational::zero() });
                row
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[r][col].is_zero()).unwrap();
            a.swap(col, piv);
            let pv = a[col][col].clone();
            for v in a[col].iter_mut() {
                *v = &*v / &pv;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    let pivot_row = a[col].clone();
                    for (v, pvv) in a[r].iter_mut().zip(pivot_row) {
                        *v = &*v - &f * pvv;
                    }
                }
            }
        }
        a.into_iter().map(|row| row[n].clone()).collect()
    }

    fn to_f64(r: &BigRational) -> f64 {
        use num_traits::ToPrimitive;
        r.to_f64().unwrap()
    }

    #[test]
    fn quoted_stencils() {
        let w = fornberg_weights(1, 1).unwrap();
        assert_eq!(w.offsets, vec![-1, 0, 1]);
        for (a, b) in w.weights.iter().zip([-0.5, 0.0, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        let w = fornberg_weights(3, 2).unwrap();
        for (a, b) in w.weights.iter().zip([-0.5, 1.0, 0.0, -1.0, 0.5]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn stencils_match_exact_moment_solution() {
        for (d, h) in [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (7, 4), (2, 3), (3, 4)] {
            let w = fornberg_weights(d, h).unwrap();
            let exact = vandermonde_weights(d, h);
            for (a, b) in w.weights.iter().zip(&exact) {
                assert!((a - to_f64(b)).abs() < 1e-12, "d={d} h={h}");
            }
        }
        let exact = vandermonde_weights(5, 3);
        assert!(exact[0].is_negative());
        assert_eq!(exact[0], BigRational::new(BigInt::from(-1), BigInt::from(2)));
        assert_eq!(exact[6], BigRational::new(BigInt::one(), BigInt::from(2)));
    }

    #[test]
    fn stencil_too_short() {
        assert!(matches!(fornberg_weights(3, 1), Err(Error::StencilTooShort { order: 3, halfwidth: 1 })));
        assert!(fornberg_weights(0, 0).is_ok());
    }

    proptest! {
        #[test]
        fn stencil_exactness_and_symmetry(h in 1usize..=5, d_off in 0usize..11) {
            let d = 1 + d_off % (2 * h);
            let w = fornberg_weights(d, h).unwrap();
            let fact: f64 = (1..=d).map(|k| k as f64).product();
            for p in 0..=2 * h {
                let moment = w.apply(|k| (k as f64).powi(p as i32));
                let target = if p == d { fact } else { 0.0 };
                let scale: f64 = w.weights.iter().map(|x| x.abs()).sum::<f64>() * (h as f64).powi(p as i32);
                prop_assert!((moment - target).abs() <= 1e-10 * scale.max(1.0), "p={} d={}", p, d);
            }
            let n = w.weights.len();
            for i in 0..n {
                let mirrored = w.weights[n - 1 - i];
                let expect = if d % 2 == 1 { -mirrored } else { mirrored };
                prop_assert!((w.weights[i] - expect).abs() <= 1e-12 * fact);
            }
            if d % 2 == 1 && h == d.div_ceil(2) {
                prop_assert!((w.weights[0] + 0.5).abs() < 1e-12);
                prop_assert!((w.weights[n - 1] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_function_worked_example() {
        let pair = cayley_forward(&worked(), 1.0).unwrap();
        let g = grid_function(&pair, 3);
        assert_eq!(g.phi(0), 1.0);
        assert!((g.phi(1) - 1.0).abs() < 1e-14);
        let closed = 3.0 / 125.0 * (737.0 + 32.0 * 481f64.sqrt()).sqrt();
        assert!((g.phi(2) - closed).abs() < 1e-13);
        assert!((closed - 0.910_361_09).abs() < 1e-8);
        for k in 1..=3 {
            assert_eq!(g.phi(-k), 2.0 - g.phi(k));
        }
    }

    #[test]
    fn grid_function_fig1_monotone() {
        let pair = cayley_forward(&fig1(), 0.5).unwrap();
        let g = grid_function(&pair, 6);
        assert!((g.phi(1) - 1.0).abs() < 1e-12);
        assert!(g.phi(2) < 1.0 - 1e-6);
        for k in 0..6 {
            assert!(g.phi(k + 1) <= g.phi(k) + 1e-15);
        }
        let zero = grid_function(&pair, 0);
        assert_eq!(zero.values, vec![1.0]);
    }

    #[test]
    fn discrete_defect_matches_direct_for_moderate_values() {
        let pair = cayley_forward(&fig2(), 0.5).unwrap();
        let g = grid_function(&pair, 5);
        for k in 1..=5 {
            let d = discrete_defect(&pair, k).unwrap();
            assert!((d - (1.0 - g.phi(k as i64))).abs() < 1e-13);
        }
    }

    #[test]
    fn peano_worked_example() {
        let mut values = Vec::new();
        for k in 3..=10 {
            let pair = cayley_forward(&worked(), 2f64.powi(-k)).unwrap();
            let p = peano_estimate(&pair, 1).unwrap();
            assert!(p.collapse_residual <= 1e-12);
            assert!(p.lower_order_residual <= 1e-12);
            values.push(p.value);
        }
        let last = *values.last().unwrap();
        assert!((last / -0.125 - 1.0).abs() < 0.02);
        // the error decays like τ²: successive halvings shrink it fourfold
        let errs: Vec<f64> = values.iter().map(|v| (v + 0.125).abs()).collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
        }
    }

    #[test]
    fn peano_identity_system() {
        let s = sys(&[&[1.0]]);
        for k in 4..=10 {
            let tau = 2f64.powi(-k);
            let p = peano_estimate(&cayley_forward(&s, tau).unwrap(), 0).unwrap();
            let scalar = ((1.0 - tau / 2.0) / (1.0 + tau / 2.0) - 1.0) / tau;
            assert!((p.value - scalar).abs() < 1e-12);
            assert!((p.value + 1.0).abs() < 2.0 * tau);
        }
    }

    #[test]
    fn peano_index_mismatch() {
        let pair = cayley_forward(&worked(), 0.5).unwrap();
        assert!(matches!(peano_estimate(&pair, 2), Err(Error::IndexMismatch { expected: 1, got: 2 })));
    }

    #[test]
    fn onset_expansion() {
        let grid = dyadic_grid(3, 12);
        let f = contraction_onset_expansion(&worked(), &grid).unwrap();
        assert!((f.a_hat - 3.0).abs() < 0.1);
        assert!((f.c_hat * 48.0 - 1.0).abs() < 0.05, "c_hat = {}", f.c_hat);
        assert!(f.relative_deviation.abs() <= 0.05);
        let f = contraction_onset_expansion(&sys(&[&[1.0, 0.0], &[0.0, 1.0]]), &grid).unwrap();
        assert!((f.c_hat - 1.0).abs() < 0.05);
        let f = contraction_onset_expansion(&fig2(), &grid).unwrap();
        assert!((f.a_hat - 5.0).abs() <= 0.1, "a_hat = {}", f.a_hat);
        let f = contraction_onset_expansion(&fig1(), &grid).unwrap();
        assert!(f.relative_deviation.abs() <= 0.05);
    }

    #[test]
    fn plateau_over_sweep() {
        for (s, m) in [(worked(), 1usize), (fig1(), 1), (fig2(), 2)] {
            for k in 1..=10 {
                let pair = cayley_forward(&s, 2f64.powi(-k)).unwrap();
                let g = grid_function(&pair, m);
                for j in 1..=m as i64 {
                    assert!((g.phi(j) - 1.0).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn w_coefficients_match_generating_function() {
        // (1 − z/2)/(1 + z/2)² = 1 − 3z/2 + 5z²/4 − 7z³/8 + …
        let w = w_coefficients(1, 3);
        for (a, b) in w.iter().zip([1.0, -1.5, 1.25, -0.875]) {
            assert!((a - b).abs() < 1e-15);
        }
        // j = 0 is the plain geometric series of 1/(1 + z/2)
        assert_eq!(w_coefficients(0, 2), vec![1.0, -0.5, 0.25]);
    }

    #[test]
    fn lemma53_values() {
        for m in 0..=6 {
            let r = lemma53_minimum(m).unwrap();
            assert!((r.min_value / r.closed_form - 1.0).abs() <= 1e-9, "m={m}");
            assert_eq!(r.minimizer.len(), m);
        }
        assert_eq!(lemma53_minimum(0).unwrap().min_value, 1.0);
        assert!((lemma53_minimum(1).unwrap().min_value - 0.5).abs() < 1e-14);
        assert!((lemma53_minimum(3).unwrap().min_value - 0.05).abs() < 1e-12);
        assert!(matches!(lemma53_minimum(9), Err(Error::OrderTooLarge { m: 9, max: 8 })));
    }
}
