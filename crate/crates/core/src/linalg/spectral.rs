use serde::Serialize;

use super::schur::Schur;
use super::{full_svd, norm2, CMatrix, Tolerances, C64};
use crate::error::Result;

/// A group of computed eigenvalues treated as one eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct EigenCluster {
    /// Mean of the member eigenvalues.
    pub value: C64,
    /// Indices into [`SpectralData::eigenvalues`].
    pub members: Vec<usize>,
    pub algebraic: usize,
    pub geometric: usize,
}

impl EigenCluster {
    pub fn is_defective(&self) -> bool {
        self.geometric < self.algebraic
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralData {
    pub eigenvalues: Vec<C64>,
    /// `μ = max Re(−λ)` over the spectrum of the analysed matrix.
    pub spectral_abscissa_of_minus_b: f64,
    /// `ρ = max |λ|`.
    pub spectral_radius: f64,
    pub clusters: Vec<EigenCluster>,
}

/// Eigenvalues with multiplicity data.
///
/// Eigenvalues within `cluster_tol·‖A‖` of each other (transitively) form a
/// cluster. The geometric multiplicity is the number of singular values of
/// `A − λ̄I` below the larger of the rank cutoff and the cluster radius,
/// clamped to `[1, algebraic]`.
pub fn eigendata(a: &CMatrix, tol: &Tolerances) -> Result<SpectralData> {
    let n = a.require_square("eigendata input")?;
    let schur = Schur::new(a.inner())?;
    let eigenvalues = schur.eigenvalues();
    let norm = norm2(a.inner());
    let radius = tol.cluster_tol * norm;

    // single-linkage clustering via union-find
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigenvalues[i] - eigenvalues[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }

    let clusters = groups
        .into_iter()
        .map(|members| {
            let algebraic = members.len();
            let sum: C64 = members.iter().map(|&i| eigenvalues[i]).sum();
            let value = sum / algebraic as f64;
            let shifted = a.shift(-value);
            let svd = full_svd(shifted.inner());
            let cutoff = (tol.rank_rel_tol * svd.sigma.first().copied().unwrap_or(0.0)).max(radius);
            let kernel = svd.sigma.iter().filter(|&&s| s <= cutoff).count();
            EigenCluster { value, members, algebraic, geometric: kernel.clamp(1, algebraic) }
        })
        .collect();

    let spectral_abscissa_of_minus_b = eigenvalues.iter().map(|l| -l.re).fold(f64::NEG_INFINITY, f64::max);
    let spectral_radius = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
    Ok(SpectralData { eigenvalues, spectral_abscissa_of_minus_b, spectral_radius, clusters })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_is_defective() {
        let b = CMatrix::from_real_rows(&[[0.0, 0.5], [-0.5, 1.0]]);
        let d = eigendata(&b, &Tolerances::default()).unwrap();
        assert_eq!(d.clusters.len(), 1);
        let c = &d.clusters[0];
        assert!((c.value - C64::new(0.5, 0.0)).norm() < 1e-7);
        assert_eq!((c.algebraic, c.geometric), (2, 1));
        assert!(c.is_defective());
        assert!((d.spectral_abscissa_of_minus_b + 0.5).abs() < 1e-7);
        assert!((d.spectral_radius - 0.5).abs() < 1e-7);
    }

    #[test]
    fn diagonal_has_simple_eigenvalues() {
        let d = eigendata(&CMatrix::from_real_diagonal(&[1.0, 2.0]), &Tolerances::default()).unwrap();
        assert_eq!(d.clusters.len(), 2);
        assert!(d.clusters.iter().all(|c| c.algebraic == 1 && c.geometric == 1));
        assert!((d.spectral_radius - 2.0).abs() < 1e-15);
        assert!((d.spectral_abscissa_of_minus_b + 1.0).abs() < 1e-15);
    }

    #[test]
    fn jordan_block() {
        let d = eigendata(&CMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]), &Tolerances::default()).unwrap();
        assert_eq!(d.clusters.len(), 1);
        assert_eq!((d.clusters[0].algebraic, d.clusters[0].geometric), (2, 1));
    }

    #[test]
    fn semisimple_repeated_eigenvalue() {
        let d = eigendata(&CMatrix::from_real_diagonal(&[3.0, 3.0, 1.0]), &Tolerances::default()).unwrap();
        let c = d.clusters.iter().find(|c| c.algebraic == 2).unwrap();
        assert_eq!(c.geometric, 2);
        assert!(!c.is_defective());
    }
}
