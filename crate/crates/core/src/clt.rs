//! Birkhoff sums along the skew product, Green-Kubo variances and
//! Kolmogorov-Smirnov tests against the limiting Gaussian.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mixing::{decay_fit, CorrelationSeries, SkewSystem};
use crate::rng::stream;
use crate::shift::LocallyConstantObservable;
use crate::su2::GroupElement;

/// Observables with a larger imaginary residue are rejected as non-real.
pub const REAL_TOL: f64 = 1e-10;

/// Green-Kubo summation stops once `|C_l|` drops below this.
pub const GK_TERM_TOL: f64 = 1e-10;

/// Default lag budget for Green-Kubo summation.
pub const DEFAULT_MAX_LAG: usize = 10_000;

/// Samples per batch for [`zn_samples`].
pub const ZN_BATCH: usize = 256;

fn ensure_real(f: &LocallyConstantObservable) -> Result<()> {
    let residue = f.imaginary_residue();
    if residue > REAL_TOL {
        return Err(Error::NonReal { residue });
    }
    Ok(())
}

/// One Birkhoff path of length `n` from a fresh Bernoulli word and Haar point.
/// Returns `S_n F` and the final group coordinate `tau^(n)(xi)^{-1} g`.
pub fn birkhoff_path<R: Rng + ?Sized>(
    sys: &SkewSystem,
    f: &LocallyConstantObservable,
    n: usize,
    rng: &mut R,
) -> (f64, Vec<u8>, GroupElement, GroupElement) {
    let a = sys.alphabet() as u8;
    let m = f.depth();
    let xi: Vec<u8> = (0..n + m).map(|_| rng.random_range(1..=a)).collect();
    let g = GroupElement::haar_sample(rng);
    let inv: Vec<GroupElement> = sys
        .config()
        .gens
        .symmetrized()
        .iter()
        .map(GroupElement::inverse)
        .collect();
    let mut w = g;
    let mut sum = 0.0;
    for i in 0..n {
        sum += f.evaluate(&xi[i..i + m], &w).re;
        w = inv[xi[i] as usize - 1].compose(&w);
    }
    (sum, xi, g, w)
}

/// One draw of `S_n F(xi, g) = sum_{i<n} F(skew^i (xi, g))`.
pub fn birkhoff_sample<R: Rng + ?Sized>(
    sys: &SkewSystem,
    f: &LocallyConstantObservable,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    ensure_real(f)?;
    Ok(birkhoff_path(sys, f, n, rng).0)
}

/// `N` independent draws of `Z_n = (S_n F - n int F) / sqrt(n)`, in batch order.
pub fn zn_samples(
    sys: &SkewSystem,
    f: &LocallyConstantObservable,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    ensure_real(f)?;
    if n == 0 {
        return Err(Error::InvalidArgument("Birkhoff length n must be positive".into()));
    }
    let centre = n as f64 * f.integral().re;
    let scale = (n as f64).sqrt();
    let run = |b: usize| -> Vec<f64> {
        let mut rng = stream(seed, b as u64);
        let count = ZN_BATCH.min(samples - b * ZN_BATCH);
        (0..count)
            .map(|_| (birkhoff_path(sys, f, n, &mut rng).0 - centre) / scale)
            .collect()
    };
    let batches = samples.div_ceil(ZN_BATCH);
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..batches).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<f64>> = (0..batches).map(run).collect();
    Ok(parts.concat())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenKubo {
    /// `C_0 + 2 sum_{l=1}^{L} C_l`, clipped at 0.
    pub variance: f64,
    /// The same sum before clipping.
    pub partial_sum: f64,
    /// Last lag `L` included.
    pub lags: usize,
    /// Bound on the omitted tail from the fitted geometric rate.
    pub tail_bound: f64,
    /// Whether `|C_L|` fell below the term tolerance within the lag budget.
    pub converged: bool,
    pub correlations: Vec<f64>,
}

impl GreenKubo {
    /// Fails with the partial sum and tail bound when the lag budget ran out.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Incomplete(format!(
                "Green-Kubo sum not converged after {} lags: partial sum {:.12e}, tail bound {:.3e}",
                self.lags, self.partial_sum, self.tail_bound
            )))
        }
    }
}

/// `sigma_F^2 = C_0 + 2 sum_{l >= 1} C_l` over exact correlations of the
/// centered observable.
pub fn green_kubo_variance(
    sys: &SkewSystem,
    f: &LocallyConstantObservable,
    max_lag: usize,
) -> Result<GreenKubo> {
    ensure_real(f)?;
    let f = f.centered();
    let mut cur = f.clone();
    let mut correlations = Vec::new();
    let mut sum = 0.0;
    let mut converged = false;
    for l in 0..=max_lag {
        if l > 0 {
            cur = sys.transfer_step(&cur)?;
        }
        let c = sys.pair(&f, &cur, &f)?.re;
        correlations.push(c);
        sum += if l == 0 { c } else { 2.0 * c };
        if c.abs() < GK_TERM_TOL {
            converged = true;
            break;
        }
    }
    let lags = correlations.len() - 1;
    let last = correlations[lags].abs();
    let tail_bound = if last == 0.0 {
        0.0
    } else {
        let values: Vec<_> = correlations
            .iter()
            .map(|&c| num_complex::Complex64::new(c, 0.0))
            .collect();
        match decay_fit(&CorrelationSeries::exact(0..values.len(), &values)) {
            Ok(fit) if fit.gamma_hat < 1.0 => 2.0 * last * fit.gamma_hat / (1.0 - fit.gamma_hat),
            Ok(_) => f64::INFINITY,
            // fewer than four non-negligible terms: the sum is already exact
            Err(_) => 2.0 * last,
        }
    };
    Ok(GreenKubo {
        variance: sum.max(0.0),
        partial_sum: sum,
        lags,
        tail_bound,
        converged,
        correlations,
    })
}

/// `sup_x |F_N(x) - Phi(x / sigma)|` for the empirical distribution of `samples`.
pub fn ks_test(samples: &[f64], sigma: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("KS test needs samples".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    if sigma.is_nan() || sigma <= 0.0 {
        return if s[0] == s[s.len() - 1] {
            Ok(0.0)
        } else {
            Err(Error::DegenerateSigma(sigma))
        };
    }
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let cdf = normal_cdf(x / sigma);
        d = d.max((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample KS distance between empirical distributions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins over `[lo, hi]`; samples outside are clamped into the end bins.
    pub fn new(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0; bins];
        for &x in samples {
            let idx = if width > 0.0 {
                (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1)
            } else {
                0
            };
            counts[idx] += 1;
        }
        Self { edges, counts }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    pub sigma_sq: f64,
    pub gk_lags: usize,
    pub gk_tail_bound: f64,
    pub gk_converged: bool,
    pub ks: f64,
    /// `sigma_F^2` vanishes numerically (coboundary or constant observable).
    pub degenerate: bool,
    pub histogram: Histogram,
}

/// Variances below this are reported as degenerate.
pub const DEGENERATE_VARIANCE: f64 = 1e-8;

/// Samples `Z_n`, computes the Green-Kubo variance and compares the two.
pub fn clt_run(
    sys: &SkewSystem,
    f: &LocallyConstantObservable,
    n: usize,
    samples: usize,
    seed: u64,
    bins: usize,
) -> Result<CltReport> {
    let gk = green_kubo_variance(sys, f, DEFAULT_MAX_LAG)?;
    let z = zn_samples(sys, f, n, samples, seed)?;
    let count = z.len() as f64;
    let mean = z.iter().sum::<f64>() / count;
    let variance = if z.len() > 1 {
        z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let degenerate = gk.variance < DEGENERATE_VARIANCE;
    let sigma = gk.variance.sqrt();
    let ks = if degenerate {
        ks_test(&z, 0.0).unwrap_or(1.0)
    } else {
        ks_test(&z, sigma)?
    };
    let half = if degenerate {
        z.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-12)
    } else {
        4.0 * sigma
    };
    Ok(CltReport {
        n,
        samples,
        seed,
        mean,
        variance,
        sigma_sq: gk.variance,
        gk_lags: gk.lags,
        gk_tail_bound: gk.tail_bound,
        gk_converged: gk.converged,
        ks,
        degenerate,
        histogram: Histogram::new(&z, -half, half, bins),
    })
}

impl CltReport {
    pub fn summary_lines(&self) -> Vec<String> {
        vec![
            format!("n = {}", self.n),
            format!("samples = {}", self.samples),
            format!("seed = {}", self.seed),
            format!("mean_zn = {:.15e}", self.mean),
            format!("var_zn = {:.15e}", self.variance),
            format!("sigma_sq_green_kubo = {:.15e}", self.sigma_sq),
            format!("green_kubo_lags = {}", self.gk_lags),
            format!("green_kubo_tail_bound = {:.3e}", self.gk_tail_bound),
            format!("green_kubo_converged = {}", self.gk_converged),
            format!("ks = {:.15e}", self.ks),
            format!("degenerate = {}", self.degenerate),
        ]
    }

    /// Summary as `#` lines, then `bin_lo,bin_hi,count,density,normal_density`.
    pub fn write_csv<W: Write>(&self, mut w: W, preamble: &[String]) -> std::io::Result<()> {
        for line in preamble.iter().chain(self.summary_lines().iter()) {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "bin_lo,bin_hi,count,density,normal_density")?;
        let sigma = self.sigma_sq.sqrt();
        let total = self.histogram.counts.iter().sum::<usize>().max(1) as f64;
        for (i, &c) in self.histogram.counts.iter().enumerate() {
            let (lo, hi) = (self.histogram.edges[i], self.histogram.edges[i + 1]);
            let width = hi - lo;
            let density = if width > 0.0 { c as f64 / (total * width) } else { 0.0 };
            let normal = if sigma > 0.0 {
                normal_pdf(0.5 * (lo + hi) / sigma) / sigma
            } else {
                0.0
            };
            writeln!(w, "{lo:.15e},{hi:.15e},{c},{density:.15e},{normal:.15e}")?;
        }
        Ok(())
    }
}

/// `u - u o skew`, real whenever `u` is.
pub fn coboundary(sys: &SkewSystem, u: &LocallyConstantObservable) -> Result<LocallyConstantObservable> {
    let shifted = sys.compose_skew(u)?;
    let base = u.refine(shifted.depth());
    let values = base
        .values()
        .iter()
        .zip(shifted.values())
        .map(|(a, b)| a.sub(b))
        .collect::<Result<Vec<_>>>()?;
    LocallyConstantObservable::new(u.alphabet(), shifted.depth(), values)
}
