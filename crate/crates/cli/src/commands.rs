use hypokit::asymptotics::lemma53_minimum;
use hypokit::asymptotics::{contraction_onset_expansion, grid_function};
use hypokit::cayley::{cayley_forward, cayley_inverse, verify_index_preservation, PreservationReport};
use hypokit::coercivity::{
    certify_semidissipative, decay_constant, fit_short_time_expansion, hypocoercivity_index, propagator_norm,
};
use hypokit::contractivity::{certify_semicontractive, hypocontractivity_index};
use hypokit::hilbert::hilbert_min;
use hypokit::transform::{default_epsilon, maximally_coercive, maximally_contractive};
use hypokit::verify::{run_verify, PROPERTIES};
use hypokit::{CMatrix, Error, Tolerances};
use serde_json::{json, Value};

use crate::{num, Failure, Output};

/// Curve samples per step in `sweep`.
const CURVE_SAMPLES_PER_STEP: usize = 16;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

pub fn analyze(b: &CMatrix, discrete: bool, tol: &Tolerances) -> Result<Output, Failure> {
    if discrete {
        let sys = certify_semicontractive(b, tol)?;
        let report = hypocontractivity_index(&sys, None)?;
        return Ok(Output::Json(json!({
            "discrete": true,
            "certified": true,
            "dim": sys.dim(),
            "sigma_max": sys.sigma_max(),
            "spectral_radius": sys.spectral().spectral_radius,
            "hypocontractive": report.index.is_some(),
            "index": report.index,
            "kappa": report.kappa,
            "index_report": to_value(&report),
        })));
    }
    let sys = certify_semidissipative(b, tol)?;
    let report = hypocoercivity_index(&sys, None)?;
    let mut body = json!({
        "discrete": false,
        "certified": true,
        "dim": sys.dim(),
        "spectral_abscissa": sys.spectral().spectral_abscissa_of_minus_b,
        "hypocoercive": report.index.is_some(),
        "index": report.index,
        "kappa": report.kappa,
        "a": Value::Null,
        "c": Value::Null,
        "index_report": to_value(&report),
    });
    if let Some(m) = report.index {
        let d = decay_constant(&sys, &report)?;
        body["a"] = json!(2 * m + 1);
        body["c"] = json!(d.constant_c);
        body["min_value"] = json!(d.min_value);
        body["prefactor"] = json!(d.prefactor);
        body["decay"] = to_value(&d);
    }
    Ok(Output::Json(body))
}

/// `a:b:geometric` halves from `a` down to `b`; `a:b:N` gives `N` geometric points.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::input(format!("bad grid `{spec}`: expected a:b:geometric or a:b:N"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, kind] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let grid = if kind.trim() == "geometric" {
        let mut g = vec![hi];
        while g.last().unwrap() / 2.0 >= lo * (1.0 - 1e-12) {
            g.push(g.last().unwrap() / 2.0);
        }
        g
    } else {
        let n: usize = kind.trim().parse().map_err(|_| bad())?;
        if n < 2 {
            return Err(bad());
        }
        let ratio = (lo / hi).powf(1.0 / (n - 1) as f64);
        (0..n).map(|i| hi * ratio.powi(i as i32)).collect()
    };
    Ok(grid)
}

pub fn decay(b: &CMatrix, grid: &[f64], tol: &Tolerances) -> Result<Output, Failure> {
    let sys = certify_semidissipative(b, tol)?;
    let report = hypocoercivity_index(&sys, None)?;
    let m = report.index.ok_or(Error::IndexMissing)?;
    let d = decay_constant(&sys, &report)?;
    let (a_hat, c_hat) = fit_short_time_expansion(&sys, grid)?;
    let onset = contraction_onset_expansion(&sys, grid)?;
    Ok(Output::Json(json!({
        "index": m,
        "a": 2 * m + 1,
        "c": d.constant_c,
        "grid": grid,
        "continuous_fit": {
            "a_hat": a_hat,
            "c_hat": c_hat,
            "relative_deviation": c_hat / d.constant_c - 1.0,
        },
        "discrete_fit": to_value(&onset),
    })))
}

const CAYLEY_HEADER: [&str; 10] = [
    "matrix",
    "tau",
    "m_hc",
    "m_dhc",
    "pass",
    "identity_defect_residual",
    "identity_hermitian_residual",
    "spectral_mapping_residual",
    "pole_distance",
    "near_pole",
];

pub fn cayley(
    b: &CMatrix,
    taus: &[f64],
    discrete: bool,
    csv: bool,
    id: &str,
    tol: &Tolerances,
) -> Result<Output, Failure> {
    let mut rows: Vec<PreservationReport> = Vec::new();
    for &tau in taus {
        let sys = if discrete {
            cayley_inverse(&certify_semicontractive(b, tol)?, tau)?
        } else {
            certify_semidissipative(b, tol)?
        };
        rows.push(verify_index_preservation(&sys, tau)?);
    }
    let code = if rows.iter().all(|r| r.pass) { 0 } else { 3 };
    if csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| Failure::input(e.to_string());
        w.write_record(CAYLEY_HEADER).map_err(fail)?;
        let idx = |m: Option<usize>| m.map_or(String::new(), |m| m.to_string());
        for r in &rows {
            w.write_record([
                id.to_string(),
                num(r.tau),
                idx(r.m_hc),
                idx(r.m_dhc),
                r.pass.to_string(),
                num(r.identity_defect_residual),
                num(r.identity_hermitian_residual),
                num(r.spectral_mapping_residual),
                num(r.pole_distance),
                r.near_pole.to_string(),
            ])
            .map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::input(e.to_string()))?;
        return Ok(Output::Csv(String::from_utf8(bytes).expect("ascii csv"), code));
    }
    let body = json!({ "matrix": id, "discrete_input": discrete, "rows": to_value(&rows) });
    Ok(if code == 0 { Output::Json(body) } else { Output::JsonFailed(body, code) })
}

pub const SWEEP_HEADER: [&str; 5] = ["series", "k", "t", "phi", "taylor"];

/// Continuous curve `Φ(t)` on `[−k_max τ, k_max τ]` (odd extension for
/// `t < 0`) followed by the markers `φ_k(τ)`, `k = −k_max..=k_max`.
pub fn sweep(b: &CMatrix, tau: f64, k_max: usize, tol: &Tolerances) -> Result<Output, Failure> {
    let sys = certify_semidissipative(b, tol)?;
    let report = hypocoercivity_index(&sys, None)?;
    let taylor: Option<(i32, f64)> = match report.index {
        Some(m) => Some((2 * m as i32 + 1, decay_constant(&sys, &report)?.constant_c)),
        None => None,
    };
    let taylor_at = |t: f64| taylor.map_or(String::new(), |(a, c)| num(1.0 - c * t.powi(a)));
    let pair = cayley_forward(&sys, tau)?;
    let grid = grid_function(&pair, k_max);

    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::input(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(fail)?;
    let half = (k_max * CURVE_SAMPLES_PER_STEP) as i64;
    for i in -half..=half {
        let t = i as f64 * tau / CURVE_SAMPLES_PER_STEP as f64;
        let phi = if t >= 0.0 { propagator_norm(&sys, t)? } else { 2.0 - propagator_norm(&sys, -t)? };
        w.write_record(["curve".to_string(), String::new(), num(t), num(phi), taylor_at(t)]).map_err(fail)?;
    }
    for k in grid.ks() {
        let t = k as f64 * tau;
        w.write_record(["marker".to_string(), k.to_string(), num(t), num(grid.phi(k)), taylor_at(t)]).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::input(e.to_string()))?;
    Ok(Output::Csv(String::from_utf8(bytes).expect("ascii csv"), 0))
}

pub fn hilbert(m: usize) -> Result<Output, Failure> {
    let h = hilbert_min(m)?;
    let l = lemma53_minimum(m)?;
    Ok(Output::Json(json!({
        "m": m,
        "value": h.value,
        "lambda_star": h.lambda_star,
        "inverse_entry": h.inverse_entry,
        "solved_value": h.solved_value,
        "solved_value_f64": h.solved_value_f64,
        "conditioning_warning": h.conditioning_warning,
        "lemma53": to_value(&l),
    })))
}

pub fn transform(b: &CMatrix, epsilon: Option<f64>, discrete: bool, tol: &Tolerances) -> Result<Output, Failure> {
    let construct = |e: f64| if discrete { maximally_contractive(b, e, tol) } else { maximally_coercive(b, e, tol) };
    let (result, defaulted) = match (construct(epsilon.unwrap_or(0.0)), epsilon) {
        (Err(Error::DefectiveNeedsEpsilon { .. } | Error::MarginalNeedsEpsilon), None) => {
            (construct(default_epsilon(b, discrete, tol)?)?, true)
        }
        (r, _) => (r?, false),
    };
    let mut body = to_value(&result);
    body["epsilon_defaulted"] = json!(defaulted);
    Ok(Output::Json(body))
}

pub fn verify(seed: u64, count: u64, only: &[String], tol: &Tolerances) -> Result<Output, Failure> {
    if let Some(bad) = only.iter().find(|o| !PROPERTIES.contains(&o.as_str())) {
        return Err(Failure::input(format!("unknown property `{bad}` (expected one of {})", PROPERTIES.join(", "))));
    }
    let report = run_verify(seed, count, only, tol)?;
    for p in &report.properties {
        eprintln!("{:<8} checked {:>5}  passed {:>5}  failed {:>5}", p.name, p.checked, p.passed, p.failed);
    }
    let body = to_value(&report);
    Ok(if report.passed() { Output::Json(body) } else { Output::JsonFailed(body, 3) })
}
