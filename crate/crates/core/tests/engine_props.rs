mod common;

use common::{measured_step, random_trace};
use incbidi::action::{action_sequence_between, bare_perform};
use incbidi::engine::Doc;
use incbidi::gen::random_expr;
use incbidi::reference::{is_well_formed, mark_program};
use incbidi::syntax::{erase, strip_dirty};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn quiescent_programs_are_marked(seed in any::<u64>(), start in 1usize..60, len in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e0, trace) = random_trace(&mut rng, start, len, 120);
        let mut d = Doc::load(&e0);
        for a in &trace {
            d.apply(a).unwrap();
            if rng.gen_bool(0.3) {
                d.run_to_quiescence().unwrap();
            }
        }
        d.run_to_quiescence().unwrap();
        let s = d.snapshot();
        prop_assert_eq!(strip_dirty(&s), mark_program(&erase(&s)));
    }

    #[test]
    fn step_order_does_not_matter(seed in any::<u64>(), start in 1usize..40, len in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e0, trace) = random_trace(&mut rng, start, len, 80);
        let mut eager = Doc::load(&e0);
        let mut lazy = Doc::load(&e0);
        for a in &trace {
            eager.apply(a).unwrap();
            eager.run_to_quiescence().unwrap();
            lazy.apply(a).unwrap();
            for _ in 0..rng.gen_range(0..6) {
                let locs = lazy.dirty_locs();
                if locs.is_empty() {
                    break;
                }
                lazy.step_at(locs[rng.gen_range(0..locs.len())]).unwrap();
            }
        }
        while !lazy.is_quiescent() {
            let locs = lazy.dirty_locs();
            lazy.step_at(locs[rng.gen_range(0..locs.len())]).unwrap();
        }
        prop_assert_eq!(eager.snapshot(), lazy.snapshot());
    }

    #[test]
    fn steps_follow_the_measure(seed in any::<u64>(), start in 1usize..40, len in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e0, trace) = random_trace(&mut rng, start, len, 80);
        let mut d = Doc::load(&e0);
        d.set_instrumented(true);
        for a in &trace {
            d.apply(a).unwrap();
            let budget = 64 * (d.node_count() + 16);
            let mut taken = 0;
            loop {
                let locs = d.dirty_locs();
                let pick = (!locs.is_empty() && rng.gen_bool(0.5)).then(|| locs[rng.gen_range(0..locs.len())]);
                if !measured_step(&mut d, pick).map_err(TestCaseError::fail)? {
                    break;
                }
                taken += 1;
                prop_assert!(taken <= budget);
            }
            prop_assert!(d.is_quiescent());
        }
    }

    #[test]
    fn actions_and_steps_respect_erasure(seed in any::<u64>(), start in 1usize..40, len in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e0, trace) = random_trace(&mut rng, start, len, 80);
        let mut d = Doc::load(&e0);
        let mut bare = e0;
        for a in &trace {
            bare = bare_perform(&bare, a).unwrap();
            d.apply(a).unwrap();
            prop_assert_eq!(erase(&d.snapshot()), bare.clone());
            while let Some(_) = d.step() {
                let s = d.snapshot();
                prop_assert!(is_well_formed(&s));
                prop_assert_eq!(erase(&s), bare.clone());
            }
        }
    }

    #[test]
    fn action_sequences_connect_programs(seed in any::<u64>(), a in 1usize..50, b in 1usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e1, e2) = (random_expr(&mut rng, a), random_expr(&mut rng, b));
        let mut e = e1;
        for act in action_sequence_between(&e, &e2) {
            e = bare_perform(&e, &act).unwrap();
        }
        prop_assert_eq!(e, e2);
    }
}
