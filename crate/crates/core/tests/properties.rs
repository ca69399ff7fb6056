mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use spectral_topos::context::{close_family, context_leq, context_meet};
use spectral_topos::flow::{
    act_on_subobject, components_on, heisenberg_evolve, schrodinger_evolve_section, schrodinger_evolve_state,
    UnitaryFlow,
};
use spectral_topos::format::g12;
use spectral_topos::matrix::{spectral_decompose, unitary_exp};
use spectral_topos::measure::{born_probability, pairing, section_from_state};
use spectral_topos::random;
use spectral_topos::subobject::{outer_daseinisation, ClopenSubobject};
use spectral_topos::{ComplexMatrix, Context, ContextFamily, UnitaryOperator};

use common::{expm_it, family_around, proper_projection, rng, trace_product};

fn random_family(seed: u64, d: usize) -> (rand_chacha::ChaCha8Rng, Arc<ContextFamily>) {
    let mut r = rng(seed);
    let p = proper_projection(&mut r, d);
    let f = family_around(&mut r, &p, 6);
    (r, f)
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn spectral_decomposition_reconstructs(seed in any::<u64>(), d in 1usize..=5) {
        let mut r = rng(seed);
        let h = random::hermitian(&mut r, d, 2.0);
        let parts = spectral_decompose(&h);
        let mut sum = ComplexMatrix::zeros(d);
        for (lambda, p) in &parts {
            sum = &sum + &p.matrix().scale_real(*lambda);
        }
        prop_assert!(sum.distance(h.matrix()) <= 1e-10 * (1.0 + h.matrix().frobenius_norm()));
        for (i, (_, p)) in parts.iter().enumerate() {
            for (_, q) in &parts[i + 1..] {
                prop_assert!(p.overlap(q) <= 1e-9);
            }
        }
    }

    #[test]
    fn exponential_matches_taylor_series_and_group_law(seed in any::<u64>(), d in 1usize..=4, s in -10.0f64..10.0, t in -10.0f64..10.0) {
        let mut r = rng(seed);
        let h = random::hermitian(&mut r, d, 1.0);
        let u = unitary_exp(&h, t);
        prop_assert!(u.matrix().distance(&expm_it(h.matrix(), t)) <= 1e-10);
        let product = unitary_exp(&h, s).compose(&u).unwrap();
        prop_assert!(product.matrix().distance(unitary_exp(&h, s + t).matrix()) <= 1e-10);
        let identity = unitary_exp(&h, 0.0);
        prop_assert!(identity.matrix().distance(&ComplexMatrix::identity(d)) <= 1e-12);
    }

    #[test]
    fn context_id_ignores_block_order(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let v = random::maximal_context(&mut r, d);
        let mut blocks = v.blocks().to_vec();
        blocks.reverse();
        let w = Context::new(blocks).unwrap();
        prop_assert_eq!(v.id(), w.id());
    }

    #[test]
    fn closure_is_idempotent_and_meet_closed(seed in any::<u64>(), d in 2usize..=4) {
        let (_, f) = random_family(seed, d);
        let again = close_family(f.contexts()).unwrap();
        prop_assert!(again.same_as(&f));
        for a in 0..f.len() {
            for b in 0..f.len() {
                if let Some(m) = context_meet(f.context(a), f.context(b)).unwrap() {
                    let i = f.index_of(&m);
                    prop_assert!(i.is_some());
                    let i = i.unwrap();
                    prop_assert!(f.leq(i, a) && f.leq(i, b));
                    prop_assert!(context_leq(&m, f.context(a)).unwrap());
                }
            }
        }
    }

    #[test]
    fn restrictions_compose(seed in any::<u64>(), d in 3usize..=4) {
        let (_, f) = random_family(seed, d);
        let n = f.len();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if f.leq(a, b) && f.leq(b, c) {
                        let direct = f.restriction(c, a).unwrap();
                        let staged: Vec<usize> = f.restriction(c, b).unwrap().iter().map(|&i| f.restriction(b, a).unwrap()[i]).collect();
                        prop_assert_eq!(direct, staged.as_slice());
                    }
                }
            }
        }
    }

    #[test]
    fn heyting_and_coheyting_laws(seed in any::<u64>(), d in 2usize..=4) {
        let (mut r, f) = random_family(seed, d);
        let density = r.random_range(0.1..0.7);
        let s = random::subobject(&mut r, &f, density);
        let t = random::subobject(&mut r, &f, density);
        let u = random::subobject(&mut r, &f, density);
        let bottom = ClopenSubobject::bottom(Arc::clone(&f));
        let top = ClopenSubobject::top(Arc::clone(&f));

        let imp = s.implies(&t).unwrap();
        prop_assert_eq!(u.meet(&s).unwrap().leq(&t).unwrap(), u.leq(&imp).unwrap());
        prop_assert!(s.meet(&imp).unwrap().leq(&t).unwrap());
        let diff = s.subtract(&t).unwrap();
        prop_assert_eq!(diff.leq(&u).unwrap(), s.leq(&t.join(&u).unwrap()).unwrap());
        prop_assert!(s.leq(&t.join(&diff).unwrap()).unwrap());

        prop_assert_eq!(s.negation(), s.implies(&bottom).unwrap());
        prop_assert!(s.meet(&s.negation()).unwrap().is_bottom());
        prop_assert!(s.leq(&s.negation().negation()).unwrap());
        prop_assert_eq!(s.co_negation(), top.subtract(&s).unwrap());
        prop_assert!(s.join(&s.co_negation()).unwrap().is_top());
        prop_assert_eq!(
            s.meet(&t.join(&u).unwrap()).unwrap(),
            s.meet(&t).unwrap().join(&s.meet(&u).unwrap()).unwrap()
        );
    }

    #[test]
    fn pairings_are_antitone_and_sections_compatible(seed in any::<u64>(), d in 2usize..=4) {
        let (mut r, f) = random_family(seed, d);
        let rho = random::density(&mut r, d);
        let m = section_from_state(&rho, &f).unwrap();
        prop_assert!(m.compatibility_violation() <= 1e-9);
        prop_assert!(m.normalization_violation() <= 1e-9);
        let s = random::subobject(&mut r, &f, 0.4);
        prop_assert!(pairing(&m, &s).unwrap().antitone_violation() <= 1e-9);
    }

    #[test]
    fn born_probability_is_the_trace(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let p = proper_projection(&mut r, d);
        let f = family_around(&mut r, &p, 6);
        let rho = random::density(&mut r, d);
        let born = born_probability(&rho, &p, &f).unwrap();
        prop_assert!((born.probability - trace_product(rho.matrix(), p.matrix())).abs() <= 1e-9);
        for v in &born.containing {
            prop_assert!(born.minimizers.contains(v));
        }
    }

    #[test]
    fn sections_are_affine_in_the_state(seed in any::<u64>(), d in 2usize..=4, w in 0.0f64..1.0) {
        let (mut r, f) = random_family(seed, d);
        let (a, b) = (random::density(&mut r, d), random::pure_state(&mut r, d));
        let mixed = section_from_state(&a.mix(&b, w).unwrap(), &f).unwrap();
        let combined = section_from_state(&a, &f).unwrap().mix(&section_from_state(&b, &f).unwrap(), w).unwrap();
        prop_assert!(mixed.max_abs_difference(&combined).unwrap() <= 1e-10);
    }

    #[test]
    fn heisenberg_group_law(seed in any::<u64>(), d in 2usize..=4, s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let (mut r, f) = random_family(seed, d);
        let flow = UnitaryFlow::new(random::hermitian(&mut r, d, 1.0));
        let s0 = random::subobject(&mut r, &f, 0.4);
        prop_assert_eq!(&heisenberg_evolve(&flow, 0.0, &s0).unwrap(), &s0);
        let staged = heisenberg_evolve(&flow, s, &heisenberg_evolve(&flow, t, &s0).unwrap()).unwrap();
        let direct = heisenberg_evolve(&flow, s + t, &s0).unwrap();
        prop_assert_eq!(components_on(&staged, direct.family()).unwrap(), direct.components().to_vec());
    }

    #[test]
    fn schrodinger_group_law_and_section_lemma(seed in any::<u64>(), d in 2usize..=4, s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let (mut r, f) = random_family(seed, d);
        let flow = UnitaryFlow::new(random::hermitian(&mut r, d, 1.0));
        let rho = random::density(&mut r, d);
        let staged = schrodinger_evolve_state(&flow, s, &schrodinger_evolve_state(&flow, t, &rho).unwrap()).unwrap();
        let direct = schrodinger_evolve_state(&flow, s + t, &rho).unwrap();
        prop_assert!(staged.matrix().distance(direct.matrix()) <= 1e-10);

        let m_t = schrodinger_evolve_section(&flow, t, &section_from_state(&rho, &f).unwrap()).unwrap();
        let expected = section_from_state(&schrodinger_evolve_state(&flow, t, &rho).unwrap(), m_t.family()).unwrap();
        prop_assert!(m_t.max_abs_difference(&expected).unwrap() <= 1e-9);
        prop_assert!(m_t.compatibility_violation() <= 1e-9);
    }

    #[test]
    fn action_is_a_homomorphism(seed in any::<u64>(), d in 2usize..=4) {
        let (mut r, f) = random_family(seed, d);
        let s = random::subobject(&mut r, &f, 0.4);
        let a = random::unitary(&mut r, d);
        let b = random::unitary(&mut r, d);
        let whole = act_on_subobject(&a.compose(&b).unwrap(), &s).unwrap();
        let staged = act_on_subobject(&a, &act_on_subobject(&b, &s).unwrap()).unwrap();
        prop_assert_eq!(components_on(&staged, whole.family()).unwrap(), whole.components().to_vec());
        let back = act_on_subobject(&a.adjoint(), &act_on_subobject(&a, &s).unwrap()).unwrap();
        prop_assert_eq!(components_on(&back, &f).unwrap(), s.components().to_vec());
    }

    #[test]
    fn central_unitaries_act_trivially(seed in any::<u64>(), d in 2usize..=4, theta in -6.0f64..6.0) {
        let (mut r, f) = random_family(seed, d);
        let s = random::subobject(&mut r, &f, 0.4);
        let phase = UnitaryOperator::phase(d, theta);
        prop_assert_eq!(&act_on_subobject(&phase, &s).unwrap(), &s);
        let flow = UnitaryFlow::new(spectral_topos::HermitianOperator::diagonal(&vec![theta; d]));
        let m = section_from_state(&random::density(&mut r, d), &f).unwrap();
        let moved = schrodinger_evolve_section(&flow, 1.0, &m).unwrap();
        prop_assert!(moved.family().same_as(&f));
        prop_assert!(moved.max_abs_difference(&m).unwrap() <= 1e-12);
    }

    #[test]
    fn daseinisation_dominates_and_is_a_subobject(seed in any::<u64>(), d in 2usize..=4) {
        let (mut r, f) = random_family(seed, d);
        let p = proper_projection(&mut r, d);
        let s = outer_daseinisation(&p, &f).unwrap();
        for v in 0..f.len() {
            let q = s.component_projection(v);
            prop_assert!(spectral_topos::matrix::projection_leq(&p, &q).unwrap());
        }
        prop_assert!(ClopenSubobject::new(Arc::clone(&f), s.components().to_vec()).is_ok());
    }

    #[test]
    fn twelve_digit_formatting_round_trips(x in prop::num::f64::NORMAL) {
        let parsed: f64 = g12(x).parse().unwrap();
        prop_assert!((parsed - x).abs() <= 5e-12 * x.abs());
    }
}
