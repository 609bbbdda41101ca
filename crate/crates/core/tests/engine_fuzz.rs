use incbidi::action::bare_perform;
use incbidi::engine::Doc;
use incbidi::gen::{random_action, random_expr};
use incbidi::reference::{mark_program, wf_violation};
use incbidi::syntax::{erase, strip_dirty};
use incbidi::text::{print_expr, print_program};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fuzz(seed: u64, size: usize, events: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bare = random_expr(&mut rng, size);
    let mut d = Doc::load(&bare);
    let mut log = vec![format!("load {}", print_expr(&bare))];
    for _ in 0..events {
        if !d.is_quiescent() && rng.gen_bool(0.6) {
            let locs = d.dirty_locs();
            let loc = locs[rng.gen_range(0..locs.len())];
            d.step_at(loc).unwrap();
            log.push(format!("step {loc:?}"));
        } else {
            let a = random_action(&mut rng, &bare, size * 2);
            log.push(a.to_string());
            bare = bare_perform(&bare, &a).unwrap();
            d.apply(&a).unwrap();
        }
        let s = d.snapshot();
        let ctx = || format!("seed {seed}\n{}\n{}", log.join("\n"), print_program(&s));
        if let Some(v) = wf_violation(&s) {
            panic!("not well formed: {v}\n{}", ctx());
        }
        assert_eq!(erase(&s), bare, "erasure\n{}", ctx());
        if let Err(e) = d.verify() {
            panic!("verify: {e}\n{}", ctx());
        }
        assert_eq!(d.is_quiescent(), s.dirty_count() == 0);
    }
    d.run_to_quiescence().unwrap();
    let s = d.snapshot();
    assert_eq!(strip_dirty(&s), mark_program(&bare), "validity seed {seed}\n{}", log.join("\n"));
}

#[test]
fn small_programs() {
    for seed in 0..300 {
        fuzz(seed, 8, 40);
    }
}

#[test]
fn medium_programs() {
    for seed in 1000..1040 {
        fuzz(seed, 120, 150);
    }
}
