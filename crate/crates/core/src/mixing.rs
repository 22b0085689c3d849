//! Twisted transfer operator, correlation functions and decay fits for the
//! skew product `(x, g) -> (sigma x, tau(x_0)^{-1} g)`.
//!
//! Pairing convention for complex observables:
//!
//! ```text
//!   C_n(F, G) = int conj(F o skew^n) G dmu dm - conj(int F) int G
//! ```
//!
//! so `C_0(F, F)` is the variance of `F`. For real observables this is the
//! usual correlation.
//!
//! The twisted transfer operator is
//! `L^n G (x, g) = (2k)^{-n} sum_{|a| = n} G(a x, tau^(n)(a) g)` and satisfies
//! `C_n(F, G) + conj(int F) int G = <F, L^n G>` in `L^2(mu x m)`. It is computed
//! either as the literal word sum (an oracle, exponential in `n`) or as the
//! `n`-fold power of the one-step operator on cylinder values (linear in `n`).

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hecke::{gap_scan, HeckeOperator, DEFAULT_MAX_TWO_J};
use crate::rng::stream;
use crate::shift::{
    check_cap, cocycle, word_count, words, LocallyConstantObservable, ShiftConfig, Word,
};
use crate::su2::GroupElement;
use crate::wigner::{BandLimitedFunction, IrrepLabel, RepTable};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Samples per Monte Carlo batch; batch `b` draws from stream `b` of the seed.
pub const MC_BATCH: usize = 4096;

/// A fixed extension together with cached representation matrices of the
/// symbol values up to a truncation `J`.
#[derive(Debug, Clone)]
pub struct SkewSystem {
    cfg: ShiftConfig,
    table: RepTable,
    inverses: RepTable,
    symbol_values: Vec<GroupElement>,
}

impl SkewSystem {
    pub fn new(cfg: ShiftConfig, j_max: IrrepLabel) -> Self {
        let symbol_values = cfg.gens.symmetrized();
        let inv: Vec<GroupElement> = symbol_values.iter().map(GroupElement::inverse).collect();
        Self {
            table: RepTable::new(&symbol_values, j_max),
            inverses: RepTable::new(&inv, j_max),
            symbol_values,
            cfg,
        }
    }

    pub fn config(&self) -> &ShiftConfig {
        &self.cfg
    }

    pub fn alphabet(&self) -> usize {
        self.cfg.alphabet()
    }

    pub fn theta(&self) -> f64 {
        self.cfg.theta
    }

    pub fn j_max(&self) -> IrrepLabel {
        self.table.j_max()
    }

    fn check(&self, obs: &LocallyConstantObservable) -> Result<()> {
        if obs.alphabet() != self.alphabet() {
            return Err(Error::InvalidArgument(format!(
                "observable is defined over {} symbols, extension has {}",
                obs.alphabet(),
                self.alphabet()
            )));
        }
        if obs.j_max() > self.j_max() {
            return Err(Error::TruncationMismatch(format!(
                "observable J_max {} exceeds system J_max {}",
                obs.j_max(),
                self.j_max()
            )));
        }
        Ok(())
    }

    /// One application of the twisted transfer operator:
    /// `(L G)(x, .) = (1/2k) sum_a G(a x, tau(a) .)`.
    pub fn transfer_step(&self, obs: &LocallyConstantObservable) -> Result<LocallyConstantObservable> {
        self.check(obs)?;
        let a = self.alphabet();
        let m = obs.depth();
        let out_depth = m.saturating_sub(1);
        let tail = word_count(a, out_depth) as usize;
        let scale = Complex64::new(1.0 / a as f64, 0.0);
        let values = (0..tail)
            .map(|t| {
                let mut acc = BandLimitedFunction::zero(obs.j_max());
                for s in 0..a {
                    let src = if m == 0 { 0 } else { s * tail + t };
                    let moved = obs.value_by_rank(src).left_translate_by(&self.table, s);
                    acc.axpy(scale, &moved).expect("shared truncation");
                }
                acc
            })
            .collect();
        LocallyConstantObservable::new(a, out_depth, values)
    }

    /// `L^n G` as an observable of depth `max(depth - n, 0)`.
    pub fn transfer_power(&self, obs: &LocallyConstantObservable, n: usize) -> Result<LocallyConstantObservable> {
        self.check(obs)?;
        let mut cur = obs.clone();
        for _ in 0..n {
            cur = self.transfer_step(&cur)?;
        }
        Ok(cur)
    }

    /// `L^n G (x, .)` on the cylinder `[x_cyl]` by the literal sum over all
    /// `(2k)^n` words, each contributing `G(a x, .)` translated by `tau^(n)(a)`.
    pub fn twisted_transfer_apply(
        &self,
        obs: &LocallyConstantObservable,
        n: usize,
        x_cyl: &Word,
        cap: u64,
    ) -> Result<BandLimitedFunction> {
        self.check(obs)?;
        let need = obs.depth().saturating_sub(n);
        if x_cyl.len() < need {
            return Err(Error::InvalidArgument(format!(
                "cylinder {x_cyl} is shorter than the {need} symbols L^{n} G depends on"
            )));
        }
        check_cap(self.alphabet(), n, cap)?;
        let mut acc = BandLimitedFunction::zero(obs.j_max());
        let weight = Complex64::new(1.0 / word_count(self.alphabet(), n) as f64, 0.0);
        for alpha in words(self.alphabet(), n) {
            let ax = alpha.concat(x_cyl);
            let c = cocycle(&alpha, &self.cfg.gens)?;
            acc.axpy(weight, &obs.at(&ax.0).left_translate(&c))?;
        }
        Ok(acc)
    }

    /// Exact correlation `C_n(F, G)` through `<F, L^n G>`.
    pub fn correlation_exact(
        &self,
        f: &LocallyConstantObservable,
        g: &LocallyConstantObservable,
        n: usize,
    ) -> Result<Complex64> {
        let lg = self.transfer_power(g, n)?;
        self.pair(f, &lg, g)
    }

    /// Exact correlations for `n = 0..=n_max`, iterating the transfer operator once.
    pub fn correlation_series_exact(
        &self,
        f: &LocallyConstantObservable,
        g: &LocallyConstantObservable,
        n_max: usize,
    ) -> Result<Vec<Complex64>> {
        self.check(f)?;
        let mut cur = g.clone();
        let mut out = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            if n > 0 {
                cur = self.transfer_step(&cur)?;
            }
            out.push(self.pair(f, &cur, g)?);
        }
        Ok(out)
    }

    /// `<F, H> - conj(int F) int G` with `H = L^n G`.
    pub(crate) fn pair(
        &self,
        f: &LocallyConstantObservable,
        lg: &LocallyConstantObservable,
        g: &LocallyConstantObservable,
    ) -> Result<Complex64> {
        self.check(f)?;
        let a = self.alphabet();
        let depth = f.depth().max(lg.depth());
        let count = word_count(a, depth) as usize;
        let mut acc = ZERO;
        for r in 0..count {
            let w = Word::unrank(r, depth, a);
            acc += f.at(&w.0).l2_inner(lg.at(&w.0))?;
        }
        Ok(acc / count as f64 - f.integral().conj() * g.integral())
    }

    /// `C_n(F, G)` from the definition: enumerate every word of length
    /// `L = max(n + depth F, depth G)` and pair `F(sigma^n x, tau^(n)(x)^{-1} .)`
    /// with `G(x, .)` in `L^2(G)`.
    pub fn correlation_direct(
        &self,
        f: &LocallyConstantObservable,
        g: &LocallyConstantObservable,
        n: usize,
        cap: u64,
    ) -> Result<Complex64> {
        self.check(f)?;
        self.check(g)?;
        let a = self.alphabet();
        let len = (n + f.depth()).max(g.depth());
        let count = check_cap(a, len, cap)?;
        let mut acc = ZERO;
        for w in words(a, len) {
            let head = Word(w.0[..n].to_vec());
            let c = cocycle(&head, &self.cfg.gens)?;
            let pulled = f.at(&w.0[n..]).left_translate(&c.inverse());
            acc += pulled.l2_inner(g.at(&w.0))?;
        }
        Ok(acc / count as f64 - f.integral().conj() * g.integral())
    }

    /// Monte Carlo estimate of `C_n(F, G)`; see [`correlation_mc_shifted`](Self::correlation_mc_shifted).
    pub fn correlation_mc(
        &self,
        f: &LocallyConstantObservable,
        g: &LocallyConstantObservable,
        n: usize,
        samples: usize,
        seed: u64,
    ) -> Result<McEstimate> {
        self.correlation_mc_shifted(f, g, n, samples, seed, GroupElement::IDENTITY)
    }

    /// Monte Carlo estimate of `C_n(F, G)` with group samples `shift * g`,
    /// `g` Haar. The result is independent of the number of threads.
    pub fn correlation_mc_shifted(
        &self,
        f: &LocallyConstantObservable,
        g: &LocallyConstantObservable,
        n: usize,
        samples: usize,
        seed: u64,
        shift: GroupElement,
    ) -> Result<McEstimate> {
        self.check(f)?;
        self.check(g)?;
        if samples < 2 {
            return Err(Error::InvalidArgument("need at least 2 samples".into()));
        }
        let len = (n + f.depth()).max(g.depth());
        let a = self.alphabet();
        let inv_values: Vec<GroupElement> =
            self.symbol_values.iter().map(GroupElement::inverse).collect();
        let run_batch = |b: usize| -> Moments {
            let mut rng = stream(seed, b as u64);
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut xi = vec![0u8; len];
            let mut m = Moments::default();
            for _ in 0..count {
                for s in xi.iter_mut() {
                    *s = rng.random_range(1..=a as u8);
                }
                let g0 = shift.compose(&GroupElement::haar_sample(&mut rng));
                let mut w = g0;
                for &s in &xi[..n] {
                    w = inv_values[s as usize - 1].compose(&w);
                }
                let v = f.evaluate(&xi[n..], &w).conj() * g.evaluate(&xi, &g0);
                m.push(v);
            }
            m
        };
        let batches = samples.div_ceil(MC_BATCH);
        #[cfg(feature = "parallel")]
        let parts: Vec<Moments> = {
            use rayon::prelude::*;
            (0..batches).into_par_iter().map(run_batch).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<Moments> = (0..batches).map(run_batch).collect();
        let total = Moments::pairwise_sum(&parts);
        let nf = total.count as f64;
        let mean = total.sum / nf;
        let var = ((total.sum_sq - nf * mean.norm_sqr()) / (nf - 1.0)).max(0.0);
        Ok(McEstimate {
            value: mean - f.integral().conj() * g.integral(),
            se: (var / nf).sqrt(),
            samples,
            seed,
        })
    }

    /// `sup_x ||H(x, .) - c||_{L^2(G)}`.
    fn sup_deviation(lg: &LocallyConstantObservable, c: Complex64) -> f64 {
        lg.values()
            .iter()
            .map(|v| {
                let mut d = v.clone();
                d.mean -= c;
                d.l2_norm()
            })
            .fold(0.0, f64::max)
    }

    /// Checks the decoupled bound on `sup_x ||L^n G (x,.) - int G||_{L^2(G)}`:
    /// splitting `n = n1 + n2`, writing `L^n G` as the average over `|alpha| = n1`
    /// of `T_S^{n2} G_alpha` plus a remainder, with
    /// `G_alpha(g) = G(xi_alpha, tau^(n1)(alpha) g)` and `xi_alpha = alpha 1 1 1 ...`.
    pub fn decoupling_check(
        &self,
        g: &LocallyConstantObservable,
        n: usize,
        n1: usize,
        rho: f64,
        cap: u64,
    ) -> Result<DecouplingReport> {
        self.check(g)?;
        if n1 > n {
            return Err(Error::InvalidArgument(format!("split n1 = {n1} exceeds n = {n}")));
        }
        let n2 = n - n1;
        let a = self.alphabet();
        let mean = g.integral();
        let lg = self.transfer_power(g, n)?;
        let lhs = Self::sup_deviation(&lg, mean);
        let norm = g.norm_theta_g(self.theta());

        // main term: average over alpha of T_S^{n2} G_alpha
        let count = check_cap(a, n1, cap)?;
        let hecke = HeckeOperator::new(&self.cfg.gens, g.j_max());
        let weight = Complex64::new(1.0 / count as f64, 0.0);
        let mut main = BandLimitedFunction::zero(g.j_max());
        for alpha in words(a, n1) {
            let xi = lexicographic_extension(&alpha, g.depth());
            let c = cocycle(&alpha, &self.cfg.gens)?;
            let g_alpha = g.at(&xi).left_translate(&c);
            main.axpy(weight, &hecke.apply(&g_alpha, n2))?;
        }
        let remainder = lg
            .values()
            .iter()
            .map(|v| v.sub(&main).expect("shared truncation").l2_norm())
            .fold(0.0, f64::max);
        let mut main_dev = main.clone();
        main_dev.mean -= mean;
        let theta_n1 = self.theta().powi(n1 as i32);
        Ok(DecouplingReport {
            n,
            n1,
            n2,
            lhs,
            norm_theta_g: norm,
            rho,
            bound: norm * (theta_n1 + 2.0 * rho.powi(n2 as i32)),
            remainder,
            remainder_bound: theta_n1 * norm,
            main_deviation: main_dev.l2_norm(),
        })
    }

    /// Rate `rho_J` of the Hecke operator restricted to blocks up to `j_max`.
    pub fn rho(&self, j_max: IrrepLabel) -> Result<f64> {
        if j_max == IrrepLabel::TRIVIAL {
            return Ok(0.0);
        }
        Ok(gap_scan(&self.cfg.gens, j_max, DEFAULT_MAX_TWO_J.max(j_max.two_j()))?.rho)
    }

    /// `u o skew`, an observable of depth `depth(u) + 1`:
    /// `(u o skew)(x, g) = u(sigma x, tau(x_0)^{-1} g)`.
    pub fn compose_skew(&self, u: &LocallyConstantObservable) -> Result<LocallyConstantObservable> {
        self.check(u)?;
        let a = self.alphabet();
        LocallyConstantObservable::from_fn(a, u.depth() + 1, |w| {
            let s = w.0[0] as usize - 1;
            u.at(&w.0[1..]).left_translate_by(&self.inverses, s)
        })
    }
}

/// `alpha` padded with symbol 1 up to `len` (never truncated below `len`).
pub fn lexicographic_extension(alpha: &Word, len: usize) -> Vec<u8> {
    let mut v = alpha.0.clone();
    if v.len() < len {
        v.resize(len, 1);
    }
    v
}

/// Cylinder-sample error of the Bernoulli average:
/// `|(2k)^{-n} sum_{|alpha| = n} int F(xi_alpha, g) dm - int int F|` with
/// `xi_alpha = alpha 1 1 1 ...`, against `||F||_{theta,G} theta^n`.
pub fn lemma_check(f: &LocallyConstantObservable, n: usize, theta: f64, cap: u64) -> Result<LemmaReport> {
    let a = f.alphabet();
    let m = f.depth();
    let total = f.integral();
    let estimate = if n >= m {
        // xi_alpha's first m symbols are alpha's; each depth-m prefix occurs
        // (2k)^{n-m} times among the (2k)^n words.
        f.values().iter().map(|v| v.mean).sum::<Complex64>() / f.values().len() as f64
    } else {
        let count = check_cap(a, n, cap)?;
        words(a, n)
            .map(|alpha| f.at(&lexicographic_extension(&alpha, m)).mean)
            .sum::<Complex64>()
            / count as f64
    };
    Ok(LemmaReport {
        n,
        error: (estimate - total).norm(),
        bound: f.norm_theta_g(theta) * theta.powi(n as i32),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    pub n: usize,
    pub error: f64,
    pub bound: f64,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.error <= self.bound + 1e-14
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecouplingReport {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    /// `sup_x ||L^n G (x, .) - int G||_{L^2(G)}`
    pub lhs: f64,
    pub norm_theta_g: f64,
    pub rho: f64,
    /// `||G||_{theta,G} (theta^{n1} + 2 rho^{n2})`
    pub bound: f64,
    /// `sup_x ||R_n(x, .)||`
    pub remainder: f64,
    /// `theta^{n1} ||G||_{theta,G}`
    pub remainder_bound: f64,
    /// `||avg_alpha T_S^{n2} G_alpha - int G||`
    pub main_deviation: f64,
}

impl DecouplingReport {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound + 1e-12 && self.remainder <= self.remainder_bound + 1e-12
    }

    pub const CSV_HEADER: &'static str =
        "n,n1,n2,lhs,bound,remainder,remainder_bound,main_deviation,norm_theta_g,rho,holds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{}",
            self.n,
            self.n1,
            self.n2,
            self.lhs,
            self.bound,
            self.remainder,
            self.remainder_bound,
            self.main_deviation,
            self.norm_theta_g,
            self.rho,
            self.holds()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: Complex64,
    /// `sqrt(E|X - EX|^2 / N)` of the complex sample.
    pub se: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: usize,
    sum: Complex64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: Complex64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v.norm_sqr();
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        Moments {
            count: a.count + b.count,
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
        }
    }

    /// Fixed-shape binary tree over the batch list.
    fn pairwise_sum(parts: &[Moments]) -> Moments {
        match parts.len() {
            0 => Moments::default(),
            1 => parts[0],
            n => {
                let (l, r) = parts.split_at(n / 2);
                Self::merge(Self::pairwise_sum(l), Self::pairwise_sum(r))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo { .. } => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationPoint {
    pub n: usize,
    pub value: Complex64,
    pub se: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationSeries {
    pub points: Vec<CorrelationPoint>,
}

impl CorrelationSeries {
    pub fn exact(ns: impl IntoIterator<Item = usize>, values: &[Complex64]) -> Self {
        Self {
            points: ns
                .into_iter()
                .map(|n| CorrelationPoint {
                    n,
                    value: values[n],
                    se: 0.0,
                    method: Method::Exact,
                })
                .collect(),
        }
    }

    pub fn push_mc(&mut self, n: usize, est: &McEstimate) {
        self.points.push(CorrelationPoint {
            n,
            value: est.value,
            se: est.se,
            method: Method::MonteCarlo {
                samples: est.samples,
                seed: est.seed,
            },
        });
    }

    pub fn of_method(&self, tag: &str) -> CorrelationSeries {
        CorrelationSeries {
            points: self
                .points
                .iter()
                .filter(|p| p.method.tag() == tag)
                .copied()
                .collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W, preamble: &[String]) -> std::io::Result<()> {
        for line in preamble {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "n,re,im,se,method")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{:.15e},{:.15e},{:.15e},{}",
                p.n,
                p.value.re,
                p.value.im,
                p.se,
                p.method.tag()
            )?;
        }
        Ok(())
    }
}

/// Least-squares fit of `log |C_n|` against `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub gamma_hat: f64,
    pub window: (usize, usize),
    pub points_used: usize,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub intercept: f64,
}

/// Points with `|C_n|` at or below this are excluded from fits.
pub const FIT_FLOOR: f64 = 1e-12;

pub fn decay_fit(series: &CorrelationSeries) -> Result<DecayFit> {
    let pts: Vec<(f64, f64, usize)> = series
        .points
        .iter()
        .filter(|p| p.value.norm() > FIT_FLOOR)
        .map(|p| (p.n as f64, p.value.norm().ln(), p.n))
        .collect();
    if pts.len() < 4 {
        return Err(Error::NoUsablePoints(pts.len()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    if sxx == 0.0 {
        return Err(Error::NoUsablePoints(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(DecayFit {
        gamma_hat: slope.exp().clamp(0.0, 1.0),
        window: (
            pts.iter().map(|p| p.2).min().unwrap_or(0),
            pts.iter().map(|p| p.2).max().unwrap_or(0),
        ),
        points_used: pts.len(),
        residual,
        intercept,
    })
}

/// Rate `max(sqrt(theta), sqrt(rho))` produced by the decoupling argument.
pub fn predicted_rate(theta: f64, rho: f64) -> f64 {
    theta.sqrt().max(rho.sqrt())
}

/// Normalized trace observable `F(x, g) = tr g`: the spin-1/2 block `I/2`.
pub fn trace_observable(alphabet: usize, j_max: IrrepLabel) -> LocallyConstantObservable {
    let block = crate::wigner::CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
    let f = BandLimitedFunction::zero(j_max)
        .with_block(IrrepLabel::HALF, block)
        .expect("j_max >= 1/2");
    LocallyConstantObservable::from_group_function(alphabet, f)
}
