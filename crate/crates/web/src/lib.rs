//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every entry point returns a JSON string; the plain `*_json` functions are
//! the same computations without the JS error type.

use serde_json::{json, Value};
use skewlab::clt::{clt_run, coboundary};
use skewlab::hecke::{gap_scan, DEFAULT_MAX_TWO_J};
use skewlab::mixing::{decay_fit, predicted_rate, trace_observable, CorrelationSeries};
use skewlab::rng::stream;
use skewlab::{preset, IrrepLabel, LocallyConstantObservable, ShiftConfig, SkewSystem};
use wasm_bindgen::prelude::*;

/// Largest `2J` the page will request.
pub const WEB_MAX_TWO_J: u32 = 120;
/// Largest `n * samples` accepted by the CLT histogram.
pub const WEB_MAX_STEPS: u64 = 20_000_000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn system(preset_name: &str, theta: f64, two_j: u32) -> Result<SkewSystem, String> {
    let gens = preset(preset_name).map_err(err)?;
    Ok(SkewSystem::new(ShiftConfig::new(theta, gens).map_err(err)?, IrrepLabel(two_j)))
}

/// `trace`, `random:<depth>:<seed>` (real part) or `coboundary:<depth>:<seed>`.
fn observable(spec: &str, sys: &SkewSystem) -> Result<LocallyConstantObservable, String> {
    let a = sys.alphabet();
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["trace"] => Ok(trace_observable(a, sys.j_max())),
        [kind @ ("random" | "coboundary"), depth, seed] => {
            let depth: usize = depth.parse().map_err(err)?;
            if depth > 3 {
                return Err("depth must be at most 3".into());
            }
            let mut rng = stream(seed.parse().map_err(err)?, 0);
            let u = LocallyConstantObservable::random(&mut rng, a, depth, sys.j_max())
                .map_values(|v| v.real_part());
            if *kind == "random" {
                Ok(u)
            } else {
                coboundary(sys, &u).map_err(err)
            }
        }
        _ => Err(format!("unknown observable `{spec}`")),
    }
}

pub fn gap_curve_json(preset_name: &str, two_j_max: u32) -> Result<String, String> {
    if two_j_max > WEB_MAX_TWO_J {
        return Err(format!("2J must be at most {WEB_MAX_TWO_J}"));
    }
    let gens = preset(preset_name).map_err(err)?;
    let r = gap_scan(&gens, IrrepLabel(two_j_max), DEFAULT_MAX_TWO_J).map_err(err)?;
    let out: Value = json!({
        "preset": r.preset,
        "k": r.k,
        "two_j": r.norms.iter().map(|b| b.j.two_j()).collect::<Vec<_>>(),
        "norm": r.norms.iter().map(|b| b.norm).collect::<Vec<_>>(),
        "rho_profile": r.rho_profile(),
        "rho": r.rho,
        "kesten": r.kesten,
    });
    Ok(out.to_string())
}

pub fn correlation_curve_json(
    preset_name: &str,
    theta: f64,
    two_j_max: u32,
    spec: &str,
    n_max: usize,
) -> Result<String, String> {
    if two_j_max > 8 || n_max > 200 {
        return Err("demo limits: 2J <= 8 and n <= 200".into());
    }
    let sys = system(preset_name, theta, two_j_max)?;
    let f = observable(spec, &sys)?;
    let series = sys.correlation_series_exact(&f, &f, n_max).map_err(err)?;
    let fit = decay_fit(&CorrelationSeries::exact(0..=n_max, &series)).ok();
    let rho = sys.rho(sys.j_max()).map_err(err)?;
    let out = json!({
        "n": (0..=n_max).collect::<Vec<_>>(),
        "abs": series.iter().map(|c| c.norm()).collect::<Vec<_>>(),
        "re": series.iter().map(|c| c.re).collect::<Vec<_>>(),
        "gamma_hat": fit.map(|d| d.gamma_hat),
        "intercept": fit.map(|d| d.intercept),
        "rho": rho,
        "predicted_rate": predicted_rate(theta, rho),
    });
    Ok(out.to_string())
}

pub fn clt_histogram_json(
    preset_name: &str,
    spec: &str,
    two_j_max: u32,
    n: usize,
    samples: usize,
    seed: u64,
    bins: usize,
) -> Result<String, String> {
    if two_j_max > 4 || (n as u64).saturating_mul(samples as u64) > WEB_MAX_STEPS {
        return Err(format!("demo limits: 2J <= 4 and n * samples <= {WEB_MAX_STEPS}"));
    }
    let sys = system(preset_name, 0.5, two_j_max)?;
    let f = observable(spec, &sys)?;
    let r = clt_run(&sys, &f, n, samples, seed, bins.clamp(1, 200)).map_err(err)?;
    let out = json!({
        "edges": r.histogram.edges,
        "counts": r.histogram.counts,
        "sigma_sq": r.sigma_sq,
        "var_zn": r.variance,
        "mean_zn": r.mean,
        "ks": r.ks,
        "degenerate": r.degenerate,
    });
    Ok(out.to_string())
}

/// Block norms `||S_j||` for `1/2 <= j <= two_j_max / 2`.
#[wasm_bindgen]
pub fn gap_curve(preset_name: &str, two_j_max: u32) -> Result<String, JsError> {
    gap_curve_json(preset_name, two_j_max).map_err(|e| JsError::new(&e))
}

/// Exact `C_n(F, F)` for `n <= n_max` with its log-linear fit.
#[wasm_bindgen]
pub fn correlation_curve(
    preset_name: &str,
    theta: f64,
    two_j_max: u32,
    spec: &str,
    n_max: usize,
) -> Result<String, JsError> {
    correlation_curve_json(preset_name, theta, two_j_max, spec, n_max).map_err(|e| JsError::new(&e))
}

/// Histogram of `Z_n` samples against the Green-Kubo Gaussian.
#[wasm_bindgen]
pub fn clt_histogram(
    preset_name: &str,
    spec: &str,
    two_j_max: u32,
    n: usize,
    samples: usize,
    seed: u64,
    bins: usize,
) -> Result<String, JsError> {
    clt_histogram_json(preset_name, spec, two_j_max, n, samples, seed, bins).map_err(|e| JsError::new(&e))
}
