//! Subcommand runners. Each writes its report files into the output directory
//! and returns a JSON summary plus a one-paragraph text summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use skewlab::clt::clt_run;
use skewlab::hecke::gap_scan;
use skewlab::mixing::{decay_fit, predicted_rate, CorrelationSeries, DecouplingReport};
use skewlab::{Error, ShiftConfig, SkewSystem};

use crate::config::{ExperimentConfig, MAX_TWO_J};
use crate::error::{CliError, CliResult};
use crate::observable::load_observable;

pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Value,
    pub text: String,
}

pub const TOOL: &str = concat!("skewlab-cli ", env!("CARGO_PKG_VERSION"));

fn preamble(cfg: &ExperimentConfig, command: &str) -> Vec<String> {
    let mut lines = vec![format!("tool = {TOOL}"), format!("command = {command}")];
    lines.extend(cfg.embedded_lines());
    lines
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::config("output_dir", format!("{}: {e}", dir.display())))?;
    let mut buf = Vec::new();
    body(&mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
    let path = dir.join(name);
    fs::write(&path, buf).map_err(|e| CliError::config("output_dir", format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn system(cfg: &ExperimentConfig) -> CliResult<SkewSystem> {
    let r = cfg.resolve()?;
    let shift = ShiftConfig::new(cfg.theta, r.gens).map_err(|e| CliError::config("theta", e))?;
    Ok(SkewSystem::new(shift, r.j_max))
}

/// Seed for the Monte Carlo estimate at lag `n`.
pub fn lag_seed(root: u64, n: usize) -> u64 {
    root.wrapping_add(n as u64)
}

pub fn run_gap(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let r = cfg.resolve()?;
    let report = gap_scan(&r.gens, r.j_max, MAX_TWO_J).map_err(|e| match e {
        Error::InvalidArgument(m) => CliError::config("j_max", m),
        e => e.into(),
    })?;
    let dir = Path::new(cfg.output_dir());
    let file = write_file(dir, "gap.csv", |w| report.write_csv(w, &preamble(cfg, "gap")))?;
    Ok(Outcome {
        summary: json!({
            "command": "gap",
            "preset": report.preset,
            "k": report.k,
            "j_max": report.j_max.to_string(),
            "blocks": report.norms.len(),
            "rho_j": report.rho,
            "kesten": report.kesten,
            "ramanujan": report.rho <= report.kesten + 1e-8,
            "file": file.display().to_string(),
        }),
        text: format!(
            "{}: rho_J = {:.12} over {} blocks (J = {}), Kesten {:.12}\nwrote {}",
            report.preset,
            report.rho,
            report.norms.len(),
            report.j_max,
            report.kesten,
            file.display()
        ),
        files: vec![file],
    })
}

pub fn run_mix(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let sys = system(cfg)?;
    let f = load_observable("f", &cfg.f, &sys)?;
    let g = load_observable("g", &cfg.g, &sys)?;
    let exact = sys.correlation_series_exact(&f, &g, cfg.n_max)?;
    let mut series = CorrelationSeries::exact(cfg.n_min..=cfg.n_max, &exact);
    let mut worst_z: Option<f64> = None;
    if cfg.mc_samples > 0 {
        for n in cfg.n_min..=cfg.n_max {
            let est = sys.correlation_mc(&f, &g, n, cfg.mc_samples, lag_seed(cfg.seed, n))?;
            let z = (est.value - exact[n]).norm() / est.se.max(f64::MIN_POSITIVE);
            worst_z = Some(worst_z.map_or(z, |w: f64| w.max(z)));
            series.push_mc(n, &est);
        }
    }
    let rho = sys.rho(sys.j_max())?;
    let rate = predicted_rate(cfg.theta, rho);
    let fit = decay_fit(&series.of_method("exact"));
    let dir = Path::new(cfg.output_dir());
    let pre = preamble(cfg, "mix");
    let series_file = write_file(dir, "mix.csv", |w| series.write_csv(w, &pre))?;
    let fit_file = write_file(dir, "mix_fit.csv", |w| {
        use std::io::Write;
        for l in &pre {
            writeln!(w, "# {l}")?;
        }
        writeln!(w, "gamma_hat,window_lo,window_hi,points,residual,theta,rho_j,predicted_rate,status")?;
        match &fit {
            Ok(d) => writeln!(
                w,
                "{:.15e},{},{},{},{:.15e},{},{:.15e},{:.15e},ok",
                d.gamma_hat, d.window.0, d.window.1, d.points_used, d.residual, cfg.theta, rho, rate
            ),
            Err(_) => writeln!(w, ",,,,,{},{:.15e},{:.15e},no usable points", cfg.theta, rho, rate),
        }
    })?;
    let (fit_json, fit_text) = match &fit {
        Ok(d) => (
            json!({"gamma_hat": d.gamma_hat, "window": [d.window.0, d.window.1], "points": d.points_used, "residual": d.residual}),
            format!("gamma_hat = {:.6} over n = {}..{}", d.gamma_hat, d.window.0, d.window.1),
        ),
        Err(_) => (json!("no usable points"), "fit: no usable points".to_string()),
    };
    Ok(Outcome {
        summary: json!({
            "command": "mix",
            "fit": fit_json,
            "rho_j": rho,
            "predicted_rate": rate,
            "mc_max_z": worst_z,
            "files": [series_file.display().to_string(), fit_file.display().to_string()],
        }),
        text: format!(
            "{fit_text}; max(sqrt theta, sqrt rho_J) = {rate:.6}{}\nwrote {} and {}",
            worst_z.map_or(String::new(), |z| format!("; Monte Carlo max |err|/SE = {z:.2}")),
            series_file.display(),
            fit_file.display()
        ),
        files: vec![series_file, fit_file],
    })
}

pub fn run_prop3(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let sys = system(cfg)?;
    let g = load_observable("g", &cfg.g, &sys)?;
    let rho = sys.rho(sys.j_max())?;
    let reports = (cfg.n_min..=cfg.n_max)
        .map(|n| Ok(sys.decoupling_check(&g, n, cfg.split_n1(n)?, rho, cfg.cap)?))
        .collect::<CliResult<Vec<DecouplingReport>>>()?;
    let dir = Path::new(cfg.output_dir());
    let file = write_file(dir, "prop3.csv", |w| {
        use std::io::Write;
        for l in preamble(cfg, "prop3") {
            writeln!(w, "# {l}")?;
        }
        writeln!(w, "{}", DecouplingReport::CSV_HEADER)?;
        for r in &reports {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    })?;
    let all = reports.iter().all(DecouplingReport::holds);
    let worst = reports
        .iter()
        .map(|r| if r.bound > 0.0 { r.lhs / r.bound } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(Outcome {
        summary: json!({
            "command": "prop3",
            "rows": reports.len(),
            "all_hold": all,
            "max_ratio": worst,
            "rho_j": rho,
            "file": file.display().to_string(),
        }),
        text: format!(
            "{} lags, bound holds for all: {all} (max deviation / bound = {worst:.4})\nwrote {}",
            reports.len(),
            file.display()
        ),
        files: vec![file],
    })
}

pub fn run_clt(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let sys = system(cfg)?;
    let f = load_observable("f", &cfg.f, &sys)?;
    let report = clt_run(&sys, &f, cfg.clt_n, cfg.clt_samples, cfg.seed, cfg.bins)
        .map_err(|e| match e {
            Error::NonReal { .. } => CliError::config("f", e),
            e => e.into(),
        })?;
    let dir = Path::new(cfg.output_dir());
    let file = write_file(dir, "clt.csv", |w| report.write_csv(w, &preamble(cfg, "clt")))?;
    Ok(Outcome {
        summary: json!({
            "command": "clt",
            "n": report.n,
            "samples": report.samples,
            "seed": report.seed,
            "sigma_sq": report.sigma_sq,
            "var_zn": report.variance,
            "mean_zn": report.mean,
            "ks": report.ks,
            "degenerate": report.degenerate,
            "green_kubo_converged": report.gk_converged,
            "file": file.display().to_string(),
        }),
        text: format!(
            "sigma_F^2 = {:.6}, Var(Z_n) = {:.6}, KS = {:.4}{}\nwrote {}",
            report.sigma_sq,
            report.variance,
            report.ks,
            if report.degenerate { " (degenerate: sigma_F vanishes)" } else { "" },
            file.display()
        ),
        files: vec![file],
    })
}

pub fn run_norm(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let sys = system(cfg)?;
    let f = load_observable("f", &cfg.f, &sys)?;
    let norm = f.norm_theta_g(cfg.theta);
    Ok(Outcome {
        summary: json!({"command": "norm", "observable": cfg.f, "theta": cfg.theta, "norm": norm}),
        text: format!("{norm:.15e}"),
        files: vec![],
    })
}
