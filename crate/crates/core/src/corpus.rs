//! Seeded random test systems.
//!
//! Every generator takes an explicit `u64` seed; corpus item `i` of a run
//! with base seed `s` uses [`item_seed`]`(s, i)`, so items can be generated
//! in any order or in parallel with identical results.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{CMatrix, C64};

/// One splitmix64 step.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent per-item seed derived from a base seed.
pub fn item_seed(base: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base) ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary matrix (QR of a complex Gaussian with the
/// phases of `R`'s diagonal folded into `Q`).
fn unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let qr = gaussian(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Matrix with singular values drawn from `[lo, hi]`.
fn with_singular_values(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<C64> {
    let u = unitary(rng, rows);
    let v = unitary(rng, cols);
    let mut s = DMatrix::<C64>::zeros(rows, cols);
    for i in 0..rows.min(cols) {
        s[(i, i)] = C64::new(rng.random_range(lo..=hi), 0.0);
    }
    u * s * v.adjoint()
}

fn skew(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let k = gaussian(rng, n, n);
    (&k - k.adjoint()) * C64::new(0.5, 0.0)
}

/// `B = B_H − B_S` with `B_H` a random positive semidefinite matrix of the
/// given rank and `B_S` a random skew-Hermitian matrix.
pub fn random_semidissipative(n: usize, rank: usize, seed: u64) -> CMatrix {
    let mut rng = rng(seed);
    let g = gaussian(&mut rng, n, rank.min(n));
    let bh = &g * g.adjoint();
    let bs = skew(&mut rng, n);
    CMatrix::new(bh - bs).expect("finite")
}

/// Block sizes for a staircase of `m + 1` nonincreasing blocks summing to `n`.
fn block_sizes(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<usize> {
    let mut sizes = vec![1usize; m + 1];
    for _ in 0..n - (m + 1) {
        // grow a block while keeping the sizes nonincreasing
        let candidates: Vec<usize> = (0..=m).filter(|&k| k == 0 || sizes[k] < sizes[k - 1]).collect();
        let k = candidates[rng.random_range(0..candidates.len())];
        sizes[k] += 1;
    }
    sizes
}

/// Semi-dissipative `n×n` matrix with hypocoercivity index exactly `m`
/// (`m < n`).
///
/// In staircase coordinates `B_H` is positive definite on the first block
/// and zero elsewhere, and the skew part couples consecutive blocks through
/// full-rank blocks with singular values in `[0.5, 1.5]`. A random unitary
/// similarity hides the block structure.
pub fn staircase_system(n: usize, m: usize, seed: u64) -> CMatrix {
    assert!(m < n, "index {m} impossible in dimension {n}");
    let mut rng = rng(seed);
    let sizes = block_sizes(&mut rng, n, m);
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();

    let mut bh = DMatrix::<C64>::zeros(n, n);
    let s0 = sizes[0];
    let p0 = unitary(&mut rng, s0);
    let d0 =
        DMatrix::from_fn(
            s0,
            s0,
            |i, j| if i == j { C64::new(rng.random_range(0.5..=1.5), 0.0) } else { C64::new(0.0, 0.0) },
        );
    bh.view_mut((0, 0), (s0, s0)).copy_from(&(&p0 * d0 * p0.adjoint()));

    let mut bs = DMatrix::<C64>::zeros(n, n);
    for k in 0..=m {
        let (o, s) = (offsets[k], sizes[k]);
        let diag = skew(&mut rng, s) * C64::new(0.5, 0.0);
        bs.view_mut((o, o), (s, s)).copy_from(&diag);
        if k < m {
            let (o1, s1) = (offsets[k + 1], sizes[k + 1]);
            let c = with_singular_values(&mut rng, s, s1, 0.5, 1.5);
            bs.view_mut((o, o1), (s, s1)).copy_from(&c);
            bs.view_mut((o1, o), (s1, s)).copy_from(&(-c.adjoint()));
        }
    }
    let u = unitary(&mut rng, n);
    let b = u.adjoint() * (bh - bs) * &u;
    CMatrix::new(b).expect("finite")
}

/// Random stable matrix: every eigenvalue has real part at least `margin`,
/// and the leftmost real part is attained. Eigenvalues are simple with
/// probability one.
pub fn stable_matrix(n: usize, margin: f64, seed: u64) -> CMatrix {
    let mut rng = rng(seed);
    let g = gaussian(&mut rng, n, n);
    let schur = crate::linalg::Schur::new(&g).expect("Schur of a Gaussian matrix");
    let min_re = schur.eigenvalues().iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    let mut b = g;
    for i in 0..n {
        b[(i, i)] += C64::new(margin - min_re, 0.0);
    }
    CMatrix::new(b).expect("finite")
}
