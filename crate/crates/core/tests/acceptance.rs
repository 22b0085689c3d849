//! Acceptance criteria. Each prints one line `[PASS]` / `[FAIL]` with the
//! measured quantities; the process exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use skewlab::clt::{coboundary, green_kubo_variance, ks_test, zn_samples, DEFAULT_MAX_LAG};
use skewlab::hecke::{gap_scan, hecke_block, HeckeOperator, DEFAULT_MAX_TWO_J};
use skewlab::mixing::{decay_fit, lemma_check, predicted_rate, trace_observable, CorrelationSeries};
use skewlab::rng::stream;
use skewlab::shift::{words, CylinderFunction, DEFAULT_ENUMERATION_CAP};
use skewlab::wigner::{character, wigner_matrix, CMatrix};
use skewlab::{
    BandLimitedFunction, GeneratorSet, GroupElement, IrrepLabel, LocallyConstantObservable,
    ShiftConfig, SkewSystem,
};

const CAP: u64 = DEFAULT_ENUMERATION_CAP;

struct Outcome {
    pass: bool,
    detail: String,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn c1_representations() -> Outcome {
    let mut rng = stream(1001, 0);
    let (mut hom, mut unit, mut chr) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let g = GroupElement::haar_sample(&mut rng);
        let h = GroupElement::haar_sample(&mut rng);
        let gh = g.compose(&h);
        for two_j in 0..=50 {
            let j = IrrepLabel(two_j);
            let dg = wigner_matrix(j, &g);
            let dh = wigner_matrix(j, &h);
            hom = hom.max(max_abs(&(wigner_matrix(j, &gh) - &dg * &dh)));
            unit = unit.max(max_abs(&(&dg * dg.adjoint() - CMatrix::identity(j.dim(), j.dim()))));
            chr = chr.max((dg.trace().re - character(j, &g)).abs().max(dg.trace().im.abs()));
        }
    }
    Outcome {
        pass: hom < 1e-9 && unit < 1e-9 && chr < 1e-8,
        detail: format!("homomorphism {hom:.2e}, unitarity {unit:.2e}, character {chr:.2e}"),
    }
}

fn c2_word_expansion() -> Outcome {
    let gens = GeneratorSet::lps5();
    let a = gens.alphabet();
    let symbols = gens.symmetrized();
    let mut worst = 0.0f64;
    for two_j in 0..=4 {
        let j = IrrepLabel(two_j);
        let s = hecke_block(&gens, j).mat;
        let mut power = CMatrix::identity(j.dim(), j.dim());
        for n in 1..=6 {
            power = &power * &s;
            let mut sum = CMatrix::zeros(j.dim(), j.dim());
            for w in words(a, n) {
                let prod = w
                    .0
                    .iter()
                    .fold(GroupElement::IDENTITY, |acc, &x| acc.compose(&symbols[x as usize - 1]));
                sum += wigner_matrix(j, &prod);
            }
            sum /= Complex64::new((a as f64).powi(n as i32), 0.0);
            worst = worst.max(max_abs(&(sum - &power)));
        }
    }
    Outcome {
        pass: worst < 1e-9,
        detail: format!("k = 3, n <= 6, j <= 2: residual {worst:.2e}"),
    }
}

fn c3_lps_gap() -> Outcome {
    let r = gap_scan(&GeneratorSet::lps5(), IrrepLabel(50), DEFAULT_MAX_TWO_J).unwrap();
    let bound = 5f64.sqrt() / 3.0;
    let worst = r.norms.iter().map(|b| b.norm).fold(0.0, f64::max);
    let half = r.norms[0].norm;
    let ok = r.norms.len() == 50
        && worst <= bound + 1e-8
        && r.rho >= 0.70
        && (half - 5f64.sqrt().recip()).abs() <= 1e-12;
    Outcome {
        pass: ok,
        detail: format!(
            "rho_25 = {:.12}, max norm {worst:.12} vs sqrt5/3 = {bound:.12}, |S_1/2| - 1/sqrt5 = {:.1e}",
            r.rho,
            half - 5f64.sqrt().recip()
        ),
    }
}

fn c4_torus() -> Outcome {
    let r = gap_scan(&GeneratorSet::diagonal(1.0), IrrepLabel(50), DEFAULT_MAX_TWO_J).unwrap();
    Outcome {
        pass: r.rho > 0.99,
        detail: format!("diagonal(1.0): rho_25 = {:.12}", r.rho),
    }
}

/// Compensated sum; the oracle side sums up to 6^10 terms.
fn neumaier(terms: impl Iterator<Item = Complex64>) -> Complex64 {
    let (mut re, mut cre, mut im, mut cim) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let add = |s: &mut f64, c: &mut f64, x: f64| {
        let t = *s + x;
        if s.abs() >= x.abs() {
            *c += (*s - t) + x;
        } else {
            *c += (x - t) + *s;
        }
        *s = t;
    };
    let mut count = 0usize;
    for z in terms {
        add(&mut re, &mut cre, z.re);
        add(&mut im, &mut cim, z.im);
        count += 1;
    }
    Complex64::new(re + cre, im + cim) / count as f64
}

fn random_cylinder<R: Rng>(rng: &mut R, a: usize, depth: usize) -> CylinderFunction {
    CylinderFunction::from_fn(a, depth, |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn c5_duality() -> Outcome {
    let mut rng = stream(1005, 0);
    let cases: &[(usize, usize, usize, usize)] = &[
        (6, 0, 3, 4),
        (6, 2, 2, 3),
        (6, 1, 4, 5),
        (6, 5, 2, 3),
        (6, 8, 1, 1),
        (6, 3, 3, 4),
        (6, 0, 5, 5),
        (4, 4, 3, 3),
        (4, 7, 1, 2),
        (4, 10, 0, 0),
        (4, 2, 4, 4),
    ];
    let mut worst = 0.0f64;
    for &(a, n, mf, mg) in cases {
        let f = random_cylinder(&mut rng, a, mf);
        let g = random_cylinder(&mut rng, a, mg);
        let len = (n + mf).max(mg);
        let lhs = neumaier(words(a, len).map(|w| f.at(&w.0[n..]) * g.at(&w.0)));
        let lg = g.transfer_apply(n);
        let d = mf.max(lg.depth());
        let rhs = neumaier(words(a, d).map(|w| f.at(&w.0) * lg.at(&w.0)));
        worst = worst.max((lhs - rhs).norm());
    }
    Outcome {
        pass: worst < 1e-12,
        detail: format!("{} cases with n + depths <= 10: residual {worst:.2e}", cases.len()),
    }
}

fn c6_lemma() -> Outcome {
    let mut rng = stream(1006, 0);
    let mut worst_ratio = 0.0f64;
    let mut ok = true;
    for i in 0..10 {
        let f = LocallyConstantObservable::random(&mut rng, 6, i % 3, IrrepLabel(2));
        for theta in [0.3, 0.5, 0.8] {
            for n in 0..=10 {
                let r = lemma_check(&f, n, theta, CAP).unwrap();
                ok &= r.error <= r.bound;
                worst_ratio = worst_ratio.max(r.error / r.bound);
            }
        }
    }
    Outcome {
        pass: ok,
        detail: format!("10 observables, depth <= 2, n <= 10: max error / bound = {worst_ratio:.3}"),
    }
}

fn c7_decoupling() -> Outcome {
    let mut rng = stream(1007, 0);
    let j = IrrepLabel(4);
    let gens = GeneratorSet::lps5();
    let hecke = HeckeOperator::new(&gens, j);
    let mut depth0 = 0.0f64;
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    for theta in [0.3, 0.5, 0.8] {
        let sys = SkewSystem::new(ShiftConfig::new(theta, gens.clone()).unwrap(), j);
        let rho = sys.rho(j).unwrap();
        for _ in 0..3 {
            let h = BandLimitedFunction::random(&mut rng, j, true);
            let g0 = LocallyConstantObservable::from_group_function(6, h.clone());
            for n in 0..=10 {
                let lg = sys.transfer_power(&g0, n).unwrap();
                depth0 = depth0.max(lg.at(&[]).sub(&hecke.apply(&h, n)).unwrap().l2_norm());
            }
            let g2 = LocallyConstantObservable::random(&mut rng, 6, 2, j);
            for n in 1..=10 {
                let r = sys.decoupling_check(&g2, n, n / 2, rho, CAP).unwrap();
                ok &= r.lhs <= r.bound;
                worst_ratio = worst_ratio.max(r.lhs / r.bound);
            }
        }
    }
    Outcome {
        pass: ok && depth0 < 1e-9,
        detail: format!(
            "depth 0 residual {depth0:.2e}; depth 2 max deviation / bound = {worst_ratio:.3}"
        ),
    }
}

fn c8_rate() -> Outcome {
    let gens = GeneratorSet::lps5();
    let j = IrrepLabel::HALF;
    let f = trace_observable(6, j);
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut gamma = 0.0;
    let mut predicted = Vec::new();
    for theta in [0.05, 0.1, 0.2] {
        let sys = SkewSystem::new(ShiftConfig::new(theta, gens.clone()).unwrap(), j);
        let series = sys.correlation_series_exact(&f, &f, 30).unwrap();
        let c0 = series[0].norm();
        for (n, c) in series.iter().enumerate() {
            worst = worst.max((c.norm() - c0 * 5f64.powf(-(n as f64) / 2.0)).abs());
        }
        let fit = decay_fit(&CorrelationSeries::exact(0..=30, &series)).unwrap();
        gamma = fit.gamma_hat;
        let rate = predicted_rate(theta, sys.rho(j).unwrap());
        predicted.push(rate);
        ok &= (gamma - 5f64.sqrt().recip()).abs() <= 0.02 && gamma <= rate;
    }
    Outcome {
        pass: ok && worst < 1e-12,
        detail: format!(
            "|C_n| - |C_0| 5^(-n/2) <= {worst:.1e}; gamma_hat = {gamma:.6}; max(sqrt theta, sqrt rho) = {:?}",
            predicted.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()
        ),
    }
}

fn c9_monte_carlo() -> Outcome {
    let gens = GeneratorSet::lps5();
    let j = IrrepLabel(1);
    let sys = SkewSystem::new(ShiftConfig::new(0.5, gens).unwrap(), j);
    let mut rng = stream(1009, 0);
    let mut inside = 0;
    let mut worst = 0.0f64;
    let mut series = CorrelationSeries::default();
    for i in 0..20 {
        let f = LocallyConstantObservable::random(&mut rng, 6, i % 3, j);
        let g = LocallyConstantObservable::random(&mut rng, 6, (i / 3) % 3, j);
        let n = rng.random_range(0..=4usize);
        let exact = sys.correlation_exact(&f, &g, n).unwrap();
        let est = sys.correlation_mc(&f, &g, n, 100_000, 5000 + i as u64).unwrap();
        let z = (est.value - exact).norm() / est.se;
        worst = worst.max(z);
        if z <= 3.0 {
            inside += 1;
        }
        if i < 3 {
            series.push_mc(n, &est);
        }
    }
    let write = |s: &CorrelationSeries| {
        let mut buf = Vec::new();
        s.write_csv(&mut buf, &["seed: fixed".into()]).unwrap();
        buf
    };
    let rerun = || {
        let mut rng = stream(1009, 0);
        let mut s = CorrelationSeries::default();
        for i in 0..3 {
            let f = LocallyConstantObservable::random(&mut rng, 6, i % 3, j);
            let g = LocallyConstantObservable::random(&mut rng, 6, (i / 3) % 3, j);
            let n = rng.random_range(0..=4usize);
            let _ = sys.correlation_exact(&f, &g, n).unwrap();
            s.push_mc(n, &sys.correlation_mc(&f, &g, n, 100_000, 5000 + i as u64).unwrap());
        }
        write(&s)
    };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let identical = write(&series) == rerun() && write(&series) == single.install(rerun);
    Outcome {
        pass: inside == 20 && identical,
        detail: format!(
            "{inside}/20 within 3 SE (max |err|/SE = {worst:.2}); byte-identical CSV: {identical}"
        ),
    }
}

fn c10_clt() -> Outcome {
    let gens = GeneratorSet::lps5();
    let j = IrrepLabel(2);
    let sys = SkewSystem::new(ShiftConfig::new(0.5, gens).unwrap(), j);
    let f = trace_observable(6, j);
    let gk = green_kubo_variance(&sys, &f, DEFAULT_MAX_LAG).unwrap();
    let z = zn_samples(&sys, &f, 1 << 10, 10_000, 1010).unwrap();
    let ks = ks_test(&z, gk.variance.sqrt()).unwrap();
    let m = z.iter().sum::<f64>() / z.len() as f64;
    let var = z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (z.len() - 1) as f64;
    let rel = (var - gk.variance).abs() / gk.variance;

    let mut rng = stream(1010, 1);
    let u = LocallyConstantObservable::random(&mut rng, 6, 1, j).map_values(|v| v.real_part());
    let cob = coboundary(&sys, &u).unwrap();
    let gk_cob = green_kubo_variance(&sys, &cob, DEFAULT_MAX_LAG).unwrap();
    Outcome {
        pass: gk.converged && ks < 0.05 && rel <= 0.10 && gk_cob.variance < 1e-8,
        detail: format!(
            "sigma^2 = {:.6}, Var(Z_n) = {var:.6} ({:.1}% off), KS = {ks:.4}, coboundary sigma^2 = {:.1e}",
            gk.variance,
            100.0 * rel,
            gk_cob.partial_sum
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 representations", c1_representations),
        ("2 Hecke word expansion", c2_word_expansion),
        ("3 LPS-5 gap", c3_lps_gap),
        ("4 torus obstruction", c4_torus),
        ("5 transfer duality", c5_duality),
        ("6 cylinder-sample lemma", c6_lemma),
        ("7 decoupling", c7_decoupling),
        ("8 decay rate", c8_rate),
        ("9 Monte Carlo vs exact", c9_monte_carlo),
        ("10 CLT", c10_clt),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        println!(
            "[{}] criterion {name}: {} ({:.2}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
