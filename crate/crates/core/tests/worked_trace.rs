mod common;

use common::term;
use incbidi::action::{parse_localized_action, parse_trace, TraceLine};
use incbidi::engine::{Doc, Rule};
use incbidi::reference::{is_well_formed, is_well_marked, mark_program};
use incbidi::syntax::{erase, strip_dirty, Expr};
use incbidi::text::print_program;

fn act(d: &mut Doc, s: &str) {
    d.apply(&parse_localized_action(s).unwrap()).unwrap();
}

fn expect(d: &Doc, k: u32) {
    let got = d.snapshot();
    assert_eq!(got, term(k), "term ({k}): got {}", print_program(&got));
    assert!(is_well_formed(&got), "term ({k}) is not well formed");
    d.verify().unwrap();
}

fn steps(d: &mut Doc, rules: &[Rule]) {
    for &r in rules {
        assert_eq!(d.step().map(|s| s.rule), Some(r));
    }
}

#[test]
fn inserting_a_variable() {
    let mut d = Doc::load(&Expr::Hole);
    expect(&d, 1);
    assert!(d.is_quiescent());
    act(&mut d, "insert-var x");
    expect(&d, 2);
    steps(&mut d, &[Rule::StepAna]);
    expect(&d, 3);
    steps(&mut d, &[Rule::TopStep]);
    expect(&d, 4);
    assert!(d.step().is_none());
}

#[test]
fn full_trace_stepwise() {
    let mut d = Doc::load(&Expr::Hole);
    act(&mut d, "insert-var x");
    d.run_to_quiescence().unwrap();
    act(&mut d, "wrap-ap 1");
    act(&mut d, "insert-num 1 @ 2");
    expect(&d, 5);
    use Rule::*;
    steps(&mut d, &[StepAna, StepAna, StepAp, StepAna, StepSyn, TopStep]);
    expect(&d, 8);
    act(&mut d, "wrap-fun");
    expect(&d, 9);
    act(&mut d, "set-ann (arrow bool num)");
    expect(&d, 10);
    act(&mut d, "insert-binder x");
    expect(&d, 11);
    steps(&mut d, &[StepAnnFun, StepAnaFun]);
    expect(&d, 12);
    steps(&mut d, &[StepAna, StepAp]);
    expect(&d, 13);
    steps(&mut d, &[StepAna, StepSynFun]);
    expect(&d, 14);
    steps(&mut d, &[TopStep]);
    expect(&d, 15);
    assert!(d.is_quiescent());
}

#[test]
fn trace_file_replays_to_final_term() {
    let mut d = Doc::load(&Expr::Hole);
    for (_, line) in parse_trace(common::WORKED_TRACE).unwrap() {
        match line {
            TraceLine::Action(a) => d.apply(&a).unwrap(),
            TraceLine::Step => {
                d.step();
            }
            TraceLine::Run => {
                d.run_to_quiescence().unwrap();
            }
        }
    }
    expect(&d, 15);
    let s = d.snapshot();
    assert_eq!(s.error_count(), 1);
    assert_eq!(strip_dirty(&s), mark_program(&erase(&s)));
}

#[test]
fn rightmost_first_still_reaches_term_8() {
    let mut d = Doc::load(&Expr::Hole);
    act(&mut d, "insert-var x");
    d.run_to_quiescence().unwrap();
    act(&mut d, "wrap-ap 1");
    act(&mut d, "insert-num 1 @ 2");
    while !d.is_quiescent() {
        let last = *d.dirty_locs().last().unwrap();
        d.step_at(last).unwrap();
        assert!(is_well_formed(&d.snapshot()));
    }
    expect(&d, 8);
}

#[test]
fn intermediate_term_is_not_yet_marked() {
    assert!(!is_well_marked(&strip_dirty(&term(13))));
    assert!(is_well_marked(&strip_dirty(&term(15))));
    assert_ne!(term(14), term(15));
}
