//! Seeded cross-module property corpus.
//!
//! Item `i` of a run with base seed `s` is the staircase system of
//! [`corpus_item`]`(s, i)`; items are checked in parallel and merged in item
//! order, so a report depends only on `(seed, count, properties)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{discrete_defect, grid_function, peano_estimate};
use crate::cayley::{cayley_forward, verify_index_preservation};
use crate::coercivity::{certify_semidissipative, decay_constant, hypocoercivity_index};
use crate::corpus::{item_seed, staircase_system};
use crate::hilbert::{hilbert_min, psd_kernel_check};
use crate::linalg::{CMatrix, Tolerances};

pub const PROPERTIES: [&str; 4] = ["cayley", "plateau", "peano", "hilbert"];
pub const VERIFY_TAUS: [f64; 3] = [0.25, 0.5, 1.0];
/// Bound on the Cayley identity and spectral-mapping residuals.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Peano step and relative tolerance against `−(2m+1)!·c`.
pub const PEANO_TAU: f64 = 1.0 / 64.0;
pub const PEANO_REL_TOL: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct CorpusItem {
    pub index: u64,
    pub seed: u64,
    pub dim: usize,
    pub target_index: usize,
    pub matrix: CMatrix,
}

/// Dimension 2–6 and index `0..min(n, 4)`, both drawn from the item seed.
pub fn corpus_item(base: u64, index: u64) -> CorpusItem {
    let seed = item_seed(base, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(2..=6usize);
    let target_index = rng.random_range(0..dim.min(4));
    CorpusItem { index, seed, dim, target_index, matrix: staircase_system(dim, target_index, seed) }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub property: String,
    pub item: u64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertySummary {
    pub name: String,
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub count: u64,
    pub properties: Vec<PropertySummary>,
    pub failures: Vec<Failure>,
    pub tolerances: Tolerances,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

type Check = Vec<std::result::Result<(), String>>;

fn check_cayley(item: &CorpusItem, tol: &Tolerances) -> Check {
    let sys = match certify_semidissipative(&item.matrix, tol) {
        Ok(s) => s,
        Err(e) => return vec![Err(e.to_string())],
    };
    VERIFY_TAUS
        .iter()
        .map(|&tau| {
            let r = verify_index_preservation(&sys, tau).map_err(|e| format!("tau={tau}: {e}"))?;
            let worst = r.identity_defect_residual.max(r.identity_hermitian_residual).max(r.spectral_mapping_residual);
            if !r.pass || r.m_hc != Some(item.target_index) {
                Err(format!("tau={tau}: m_HC={:?} m_dHC={:?}", r.m_hc, r.m_dhc))
            } else if worst > IDENTITY_TOL {
                Err(format!("tau={tau}: residual {worst:.3e}"))
            } else {
                Ok(())
            }
        })
        .collect()
}

fn check_plateau(item: &CorpusItem, tol: &Tolerances) -> Check {
    let sys = match certify_semidissipative(&item.matrix, tol) {
        Ok(s) => s,
        Err(e) => return vec![Err(e.to_string())],
    };
    let m = item.target_index;
    VERIFY_TAUS
        .iter()
        .map(|&tau| {
            let pair = cayley_forward(&sys, tau).map_err(|e| e.to_string())?;
            let g = grid_function(&pair, m + 1);
            for j in 1..=m as i64 {
                if (g.phi(j) - 1.0).abs() > tol.norm_plateau_tol {
                    return Err(format!("tau={tau}: phi_{j} = {:.17}", g.phi(j)));
                }
            }
            let next = g.phi(m as i64 + 1);
            if next >= 1.0 - tol.norm_plateau_tol {
                return Err(format!("tau={tau}: phi_{} = {next:.17} shows no contraction", m + 1));
            }
            Ok(())
        })
        .collect()
}

fn check_peano(item: &CorpusItem, tol: &Tolerances) -> Check {
    let m = item.target_index;
    // beyond m = 2 the defect τ^{2m+1} falls below double precision at usable τ
    if m > 2 {
        return Vec::new();
    }
    let run = || -> std::result::Result<(), String> {
        let sys = certify_semidissipative(&item.matrix, tol).map_err(|e| e.to_string())?;
        let report = hypocoercivity_index(&sys, None).map_err(|e| e.to_string())?;
        let c = decay_constant(&sys, &report).map_err(|e| e.to_string())?.constant_c;
        let pair = cayley_forward(&sys, PEANO_TAU).map_err(|e| e.to_string())?;
        let p = peano_estimate(&pair, m).map_err(|e| e.to_string())?;
        if p.collapse_residual > 1e-12 || p.lower_order_residual > 1e-12 {
            return Err(format!("stencil residuals {:.3e}, {:.3e}", p.collapse_residual, p.lower_order_residual));
        }
        let fact: f64 = (2..=2 * m + 1).map(|k| k as f64).product();
        let limit = -fact * c;
        if (p.value / limit - 1.0).abs() > PEANO_REL_TOL {
            return Err(format!("Peano value {:.6e}, limit {limit:.6e}", p.value));
        }
        let d = discrete_defect(&pair, m + 1).map_err(|e| e.to_string())?;
        if d <= 0.0 {
            return Err(format!("nonpositive defect {d:.3e}"));
        }
        Ok(())
    };
    vec![run()]
}

fn check_hilbert(item: &CorpusItem) -> Check {
    let m = (item.index % 6) as usize;
    let run = || -> std::result::Result<(), String> {
        let h = hilbert_min(m).map_err(|e| e.to_string())?;
        if (h.solved_value / h.value - 1.0).abs() > 1e-12 || (h.solved_value_f64 / h.value - 1.0).abs() > 1e-9 {
            return Err(format!("m={m}: closed form {:.17e}, solved {:.17e}", h.value, h.solved_value_f64));
        }
        let k = psd_kernel_check(m.min(5), 64, item.seed).map_err(|e| e.to_string())?;
        if k.violations > 0 {
            return Err(format!("m={m}: {} kernel violations, worst margin {:.3e}", k.violations, k.worst_margin));
        }
        Ok(())
    };
    vec![run()]
}

/// Runs the selected properties (all when `only` is empty) over `count` items.
pub fn run_verify(seed: u64, count: u64, only: &[String], tol: &Tolerances) -> crate::Result<VerifyReport> {
    tol.validate()?;
    for name in only {
        if !PROPERTIES.contains(&name.as_str()) {
            return Err(crate::Error::InvalidArgument(format!(
                "unknown property `{name}` (expected one of {})",
                PROPERTIES.join(", ")
            )));
        }
    }
    let selected: Vec<&str> =
        PROPERTIES.iter().copied().filter(|p| only.is_empty() || only.iter().any(|o| o == p)).collect();
    let per_item: Vec<Vec<(&str, Check)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let item = corpus_item(seed, i);
            selected
                .iter()
                .map(|&p| {
                    let outcome = match p {
                        "cayley" => check_cayley(&item, tol),
                        "plateau" => check_plateau(&item, tol),
                        "peano" => check_peano(&item, tol),
                        _ => check_hilbert(&item),
                    };
                    (p, outcome)
                })
                .collect()
        })
        .collect();

    let mut properties: Vec<PropertySummary> =
        selected.iter().map(|&p| PropertySummary { name: p.to_string(), checked: 0, passed: 0, failed: 0 }).collect();
    let mut failures = Vec::new();
    for (i, checks) in per_item.into_iter().enumerate() {
        for (k, (name, outcome)) in checks.into_iter().enumerate() {
            for r in outcome {
                properties[k].checked += 1;
                match r {
                    Ok(()) => properties[k].passed += 1,
                    Err(detail) => {
                        properties[k].failed += 1;
                        failures.push(Failure { property: name.to_string(), item: i as u64, detail });
                    }
                }
            }
        }
    }
    Ok(VerifyReport { seed, count, properties, failures, tolerances: *tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_mix() {
        let items: Vec<CorpusItem> = (0..200).map(|i| corpus_item(1, i)).collect();
        for m in 0..=3 {
            assert!(items.iter().any(|it| it.target_index == m), "index {m} missing");
        }
        assert!(items.iter().all(|it| (2..=6).contains(&it.dim) && it.target_index < it.dim));
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let tol = Tolerances::default();
        let a = run_verify(5, 12, &[], &tol).unwrap();
        assert!(a.passed(), "{:?}", a.failures);
        let b = run_verify(5, 12, &[], &tol).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let only = run_verify(5, 4, &["cayley".to_string()], &tol).unwrap();
        assert_eq!(only.properties.len(), 1);
        assert_eq!(only.properties[0].checked, 4 * VERIFY_TAUS.len());
        assert!(run_verify(5, 1, &["nope".to_string()], &tol).is_err());
    }
}
