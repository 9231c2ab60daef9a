//! The 2×2 example `B = [[0, 1/2], [−1/2, 1]]` through every module.

use hypokit::asymptotics::{contraction_onset_expansion, grid_function, lemma53_minimum, peano_estimate};
use hypokit::cayley::{cayley_forward, verify_index_preservation};
use hypokit::coercivity::{
    certify_semidissipative, decay_constant, dyadic_grid, hypocoercivity_index, propagator_norm,
};
use hypokit::hilbert::hilbert_min;
use hypokit::transform::maximally_coercive;
use hypokit::{CMatrix, Error, Tolerances};

fn b() -> CMatrix {
    CMatrix::from_real_rows(&[[0.0, 0.5], [-0.5, 1.0]])
}

#[test]
fn closed_forms_agree_across_modules() {
    let tol = Tolerances::default();
    let sys = certify_semidissipative(&b(), &tol).unwrap();
    let report = hypocoercivity_index(&sys, None).unwrap();
    assert_eq!(report.index, Some(1));
    let d = decay_constant(&sys, &report).unwrap();
    assert!((d.min_value - 0.25).abs() < 1e-12);
    assert!((d.constant_c * 48.0 - 1.0).abs() < 1e-12);
    assert_eq!(d.prefactor, hilbert_min(1).unwrap().value);
    assert!((lemma53_minimum(1).unwrap().min_value - 0.5).abs() < 1e-14);

    // ‖e^{−B}‖ = (1 + √5)/2 · e^{−1/2}
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((propagator_norm(&sys, 1.0).unwrap() - golden * (-0.5f64).exp()).abs() < 1e-12);

    for tau in [0.25, 0.5, 1.0, 4.0] {
        assert!(verify_index_preservation(&sys, tau).unwrap().pass);
    }
    let pair = cayley_forward(&sys, 1.0).unwrap();
    let g = grid_function(&pair, 2);
    assert!((g.phi(2) - 3.0 / 125.0 * (737.0 + 32.0 * 481f64.sqrt()).sqrt()).abs() < 1e-13);

    let p = peano_estimate(&cayley_forward(&sys, 2f64.powi(-10)).unwrap(), 1).unwrap();
    assert!((p.value + 0.125).abs() < 1e-5);
    let onset = contraction_onset_expansion(&sys, &dyadic_grid(3, 12)).unwrap();
    assert!(onset.relative_deviation.abs() < 0.05);

    assert!(matches!(maximally_coercive(&b(), 0.0, &tol), Err(Error::DefectiveNeedsEpsilon { .. })));
    let r = maximally_coercive(&b(), 0.05, &tol).unwrap();
    assert!(r.achieved_margin >= 0.45 && r.achieved_margin <= 0.5 + 1e-9);
}
