use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;

use skewlab::hecke::{hecke_block, hermitian_norm, kesten_value};
use skewlab::mixing::SkewSystem;
use skewlab::rng::{stream, StreamRng};
use skewlab::shift::{cocycle, d_theta, Word};
use skewlab::wigner::{character, wigner_matrix};
use skewlab::{
    BandLimitedFunction, GeneratorSet, GroupElement, IrrepLabel, LocallyConstantObservable,
    ShiftConfig,
};

fn element(seed: u64) -> GroupElement {
    GroupElement::haar_sample(&mut StreamRng::seed_from_u64(seed))
}

fn word(a: u8, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(1..=a, 0..=max_len).prop_map(Word)
}

fn lps(theta: f64, j: u32) -> SkewSystem {
    SkewSystem::new(ShiftConfig::new(theta, GeneratorSet::lps5()).unwrap(), IrrepLabel(j))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn representation_is_a_unitary_homomorphism(s1 in any::<u64>(), s2 in any::<u64>(), two_j in 0u32..=30) {
        let (g, h) = (element(s1), element(s2));
        let j = IrrepLabel(two_j);
        let lhs = wigner_matrix(j, &g.compose(&h));
        let rhs = wigner_matrix(j, &g) * wigner_matrix(j, &h);
        prop_assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-10));
        let d = wigner_matrix(j, &g.inverse());
        prop_assert!((d - wigner_matrix(j, &g).adjoint()).iter().all(|z| z.norm() < 1e-10));
        prop_assert!((wigner_matrix(j, &g).trace().re - character(j, &g)).abs() < 1e-9);
    }

    #[test]
    fn hecke_blocks_are_contractions(phi in 0.01f64..3.1, two_j in 1u32..=12) {
        for gens in [GeneratorSet::diagonal(phi), GeneratorSet::lps5()] {
            let b = hecke_block(&gens, IrrepLabel(two_j));
            prop_assert!(b.asymmetry < 1e-12);
            prop_assert!(hermitian_norm(&b.mat) <= 1.0 + 1e-12);
        }
        prop_assert!(hermitian_norm(&hecke_block(&GeneratorSet::lps5(), IrrepLabel(two_j)).mat) <= kesten_value(3) + 1e-8);
    }

    #[test]
    fn metric_is_symmetric_and_bounded(x in word(6, 8), y in word(6, 8), theta in 0.05f64..0.95) {
        let d = d_theta(&x, &y, theta);
        prop_assert_eq!(d, d_theta(&y, &x, theta));
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d_theta(&x, &x, theta), 0.0);
    }

    #[test]
    fn cocycle_is_multiplicative(x in word(6, 10), y in word(6, 10)) {
        let gens = GeneratorSet::lps5();
        let lhs = cocycle(&x.concat(&y), &gens).unwrap();
        let rhs = cocycle(&x, &gens).unwrap().compose(&cocycle(&y, &gens).unwrap());
        prop_assert!(lhs.max_dist(&rhs) < 1e-12);
    }

    #[test]
    fn left_translation_is_an_isometry(seed in any::<u64>(), two_j in 0u32..=6) {
        let mut rng = stream(seed, 1);
        let f = BandLimitedFunction::random(&mut rng, IrrepLabel(two_j), true);
        let t = GroupElement::haar_sample(&mut rng);
        prop_assert!((f.left_translate(&t).l2_norm() - f.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn transfer_preserves_integrals_and_is_linear(seed in any::<u64>(), depth in 0usize..=3, n in 0usize..=4) {
        let sys = lps(0.5, 2);
        let mut rng = stream(seed, 2);
        let f = LocallyConstantObservable::random(&mut rng, 6, depth, IrrepLabel(2));
        let g = LocallyConstantObservable::random(&mut rng, 6, depth, IrrepLabel(2));
        let lf = sys.transfer_power(&f, n).unwrap();
        prop_assert!((lf.integral() - f.integral()).norm() < 1e-13);
        let c = Complex64::new(0.3, -1.2);
        let combo = LocallyConstantObservable::new(
            6,
            depth,
            f.values().iter().zip(g.values()).map(|(a, b)| {
                let mut s = a.clone();
                s.axpy(c, b).unwrap();
                s
            }).collect(),
        ).unwrap();
        let lhs = sys.transfer_power(&combo, n).unwrap();
        let lg = sys.transfer_power(&g, n).unwrap();
        for (i, v) in lhs.values().iter().enumerate() {
            let mut want = lf.values()[i].clone();
            want.axpy(c, &lg.values()[i]).unwrap();
            prop_assert!(v.sub(&want).unwrap().l2_norm() < 1e-12);
        }
    }

    #[test]
    fn exact_correlation_is_sesquilinear(seed in any::<u64>(), n in 0usize..=4) {
        let sys = lps(0.5, 1);
        let mut rng = stream(seed, 3);
        let f = LocallyConstantObservable::random(&mut rng, 6, 1, IrrepLabel(1));
        let g = LocallyConstantObservable::random(&mut rng, 6, 2, IrrepLabel(1));
        let c = Complex64::new(0.7, 0.4);
        let fc = f.map_values(|v| v.scale(c));
        let gc = g.map_values(|v| v.scale(c));
        let base = sys.correlation_exact(&f, &g, n).unwrap();
        prop_assert!((sys.correlation_exact(&fc, &g, n).unwrap() - c.conj() * base).norm() < 1e-12);
        prop_assert!((sys.correlation_exact(&f, &gc, n).unwrap() - c * base).norm() < 1e-12);
        let direct = sys.correlation_direct(&f, &g, n, 1_000_000).unwrap();
        prop_assert!((direct - base).norm() < 1e-11);
    }

    #[test]
    fn norm_dominates_sup(seed in any::<u64>(), depth in 0usize..=2, theta in 0.1f64..0.9) {
        let mut rng = stream(seed, 4);
        let f = LocallyConstantObservable::random(&mut rng, 6, depth, IrrepLabel(1));
        let sup = f.values().iter().map(|v| v.l2_norm()).fold(0.0, f64::max);
        prop_assert!(f.norm_theta_g(theta) >= sup - 1e-14);
    }
}

#[test]
fn monte_carlo_is_independent_of_worker_count() {
    let sys = lps(0.5, 1);
    let mut rng = stream(77, 0);
    let f = LocallyConstantObservable::random(&mut rng, 6, 1, IrrepLabel(1));
    let g = LocallyConstantObservable::random(&mut rng, 6, 2, IrrepLabel(1));
    let run = || sys.correlation_mc(&f, &g, 3, 30_000, 12).unwrap();
    let many = run();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        assert_eq!(pool.install(run), many);
    }
}
