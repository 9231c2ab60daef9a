//! Complex Schur decomposition `A = Z T Z*` with `T` upper triangular,
//! plus reordering of the diagonal by adjacent swaps.
//!
//! Hessenberg reduction is delegated to nalgebra; the QR sweeps are a
//! single-shift complex implicit QR (Wilkinson shifts with an exceptional
//! shift every ten stalled iterations). nalgebra's own Schur routine works
//! with quasi-triangular real blocks and is not used for complex input.

use nalgebra::DMatrix;

use super::C64;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Schur {
    /// Unitary factor.
    pub z: DMatrix<C64>,
    /// Upper triangular factor.
    pub t: DMatrix<C64>,
}

impl Schur {
    pub fn new(a: &DMatrix<C64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::Dimension("Schur decomposition needs a square matrix".into()));
        }
        if n <= 1 {
            return Ok(Schur { z: DMatrix::identity(n, n), t: a.clone() });
        }
        let (z, t) = nalgebra::linalg::Hessenberg::new(a.clone()).unpack();
        let mut s = Schur { z, t };
        s.qr_iterate()?;
        for i in 0..n {
            for j in 0..i {
                s.t[(i, j)] = C64::new(0.0, 0.0);
            }
        }
        Ok(s)
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    fn qr_iterate(&mut self) -> Result<()> {
        let n = self.t.nrows();
        let eps = f64::EPSILON;
        let scale = self.t.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(());
        }
        let mut hi = n - 1;
        let mut stalled = 0usize;
        let mut total = 0usize;
        while hi > 0 {
            let mut lo = hi;
            while lo > 0 {
                let sub = self.t[(lo, lo - 1)].norm();
                let mut tst = self.t[(lo - 1, lo - 1)].norm() + self.t[(lo, lo)].norm();
                if tst == 0.0 {
                    tst = scale;
                }
                if sub <= eps * tst || sub <= f64::MIN_POSITIVE / eps {
                    self.t[(lo, lo - 1)] = C64::new(0.0, 0.0);
                    break;
                }
                lo -= 1;
            }
            if lo == hi {
                hi -= 1;
                stalled = 0;
                continue;
            }
            stalled += 1;
            total += 1;
            if total > 60 * n {
                return Err(Error::NoConvergence("complex Schur QR iteration"));
            }
            let shift = if stalled.is_multiple_of(10) {
                let t = &self.t;
                t[(hi, hi)] + C64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0)
            } else {
                wilkinson_shift(self.t[(hi - 1, hi - 1)], self.t[(hi - 1, hi)], self.t[(hi, hi - 1)], self.t[(hi, hi)])
            };
            self.sweep(lo, hi, shift);
        }
        Ok(())
    }

    fn sweep(&mut self, lo: usize, hi: usize, shift: C64) {
        let n = self.t.nrows();
        for k in lo..hi {
            let (x, y) = if k == lo {
                (self.t[(lo, lo)] - shift, self.t[(lo + 1, lo)])
            } else {
                (self.t[(k, k - 1)], self.t[(k + 1, k - 1)])
            };
            let g = Givens::new(x, y);
            let first_col = if k == lo { lo } else { k - 1 };
            g.apply_left(&mut self.t, k, k + 1, first_col, n);
            g.apply_right(&mut self.t, k, k + 1, 0, (k + 3).min(hi + 1));
            g.apply_right(&mut self.z, k, k + 1, 0, n);
            if k > lo {
                self.t[(k + 1, k - 1)] = C64::new(0.0, 0.0);
            }
        }
    }

    /// Swaps the diagonal entries at positions `k` and `k+1`.
    pub fn swap_adjacent(&mut self, k: usize) {
        let n = self.t.nrows();
        let a = self.t[(k, k)];
        let c = self.t[(k + 1, k + 1)];
        if a == c {
            return;
        }
        let g = Givens::new(self.t[(k, k + 1)], c - a);
        g.apply_left(&mut self.t, k, k + 1, k, n);
        g.apply_right(&mut self.t, k, k + 1, 0, k + 2);
        g.apply_right(&mut self.z, k, k + 1, 0, n);
        self.t[(k + 1, k)] = C64::new(0.0, 0.0);
        self.t[(k, k)] = c;
        self.t[(k + 1, k + 1)] = a;
    }

    /// Reorders the decomposition so that the diagonal entries listed in
    /// `order` (positions in the current `t`) come first, in that order.
    /// The remaining entries keep their relative order.
    pub fn reorder(&mut self, order: &[usize]) {
        let n = self.t.nrows();
        // perm[p] = original position of the entry now sitting at p
        let mut perm: Vec<usize> = (0..n).collect();
        for (target, &orig) in order.iter().enumerate() {
            let mut pos = perm.iter().position(|&p| p == orig).expect("valid position");
            while pos > target {
                self.swap_adjacent(pos - 1);
                perm.swap(pos - 1, pos);
                pos -= 1;
            }
        }
    }

    /// `Z T Z*`.
    pub fn recompose(&self) -> DMatrix<C64> {
        &self.z * &self.t * self.z.adjoint()
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Plane rotation `G = [[c, s], [-conj(s), c]]` with `G·[x; y] = [r; 0]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Givens {
    c: f64,
    s: C64,
}

impl Givens {
    pub(crate) fn new(x: C64, y: C64) -> Self {
        let ax = x.norm();
        let ay = y.norm();
        if ay == 0.0 {
            return Givens { c: 1.0, s: C64::new(0.0, 0.0) };
        }
        if ax == 0.0 {
            return Givens { c: 0.0, s: y.conj() / ay };
        }
        let r = ax.hypot(ay);
        let phase = x / ax;
        Givens { c: ax / r, s: phase * y.conj() / r }
    }

    /// Rows `i`, `j` ← `G` applied to them, over columns `c0..c1`.
    pub(crate) fn apply_left(&self, m: &mut DMatrix<C64>, i: usize, j: usize, c0: usize, c1: usize) {
        for col in c0..c1 {
            let xi = m[(i, col)];
            let xj = m[(j, col)];
            m[(i, col)] = xi * self.c + self.s * xj;
            m[(j, col)] = -self.s.conj() * xi + xj * self.c;
        }
    }

    /// Columns `i`, `j` ← themselves times `G*`, over rows `r0..r1`.
    pub(crate) fn apply_right(&self, m: &mut DMatrix<C64>, i: usize, j: usize, r0: usize, r1: usize) {
        for row in r0..r1 {
            let xi = m[(row, i)];
            let xj = m[(row, j)];
            m[(row, i)] = xi * self.c + self.s.conj() * xj;
            m[(row, j)] = -self.s * xi + xj * self.c;
        }
    }
}
