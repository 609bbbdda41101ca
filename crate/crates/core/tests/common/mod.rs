#![allow(dead_code)]

use incbidi::syntax::{with_dirty, DirtyBit, IncrProgram};
use incbidi::text::parse_program;

pub const WORKED_TRACE: &str = include_str!("../../testdata/worked_trace.txt");

/// Decorated states of the worked trace, keyed by term number.
pub const TERMS: &[(u32, &str)] = &[
    (1, "?{ana=none, mark=ok, syn=?, dirty=none}"),
    (2, "(var x [err]){ana=none, mark=ok, syn=?, dirty=ana+syn}"),
    (3, "(var x [err]){ana=none, mark=ok, syn=?, dirty=syn}"),
    (4, "(var x [err]){ana=none, mark=ok, syn=?, dirty=none}"),
    (
        5,
        "(ap [ok] (var x [err]){ana=none, mark=ok, syn=?, dirty=ana+syn} \
         (num 1){ana=none, mark=ok, syn=num, dirty=ana+syn}){ana=none, mark=ok, syn=none, dirty=ana+syn}",
    ),
    (
        8,
        "(ap [ok] (var x [err]){ana=none, mark=ok, syn=?, dirty=none} \
         (num 1){ana=?, mark=ok, syn=num, dirty=none}){ana=none, mark=ok, syn=?, dirty=none}",
    ),
    (
        9,
        "(lam ? ? [ok ok] (ap [ok] (var x [err]){ana=none, mark=ok, syn=?, dirty=none} \
         (num 1){ana=?, mark=ok, syn=num, dirty=none}){ana=none, mark=ok, syn=?, dirty=ana})\
         {ana=none, mark=ok, syn=none, dirty=ana+syn}",
    ),
    (
        10,
        "(lam ? (arrow bool num) [ok ok] (ap [ok] (var x [err]){ana=none, mark=ok, syn=?, dirty=none} \
         (num 1){ana=?, mark=ok, syn=num, dirty=none}){ana=none, mark=ok, syn=?, dirty=ana})\
         {ana=none, mark=ok, syn=none, dirty=ana+ty+syn}",
    ),
    (
        11,
        "(lam x (arrow bool num) [ok ok] (ap [ok] (var x [ok]){ana=none, mark=ok, syn=(arrow bool num), dirty=syn} \
         (num 1){ana=?, mark=ok, syn=num, dirty=none}){ana=none, mark=ok, syn=?, dirty=ana+syn})\
         {ana=none, mark=ok, syn=none, dirty=ana+ty+syn}",
    ),
    (
        12,
        "(lam x (arrow bool num) [ok ok] (ap [ok] (var x [ok]){ana=none, mark=ok, syn=(arrow bool num), dirty=syn} \
         (num 1){ana=?, mark=ok, syn=num, dirty=none}){ana=none, mark=ok, syn=?, dirty=ana+syn})\
         {ana=none, mark=ok, syn=(arrow (arrow bool num) ?), dirty=syn}",
    ),
    (
        13,
        "(lam x (arrow bool num) [ok ok] (ap [ok] (var x [ok]){ana=none, mark=ok, syn=(arrow bool num), dirty=none} \
         (num 1){ana=bool, mark=ok, syn=num, dirty=ana}){ana=none, mark=ok, syn=num, dirty=syn})\
         {ana=none, mark=ok, syn=(arrow (arrow bool num) ?), dirty=syn}",
    ),
    (
        14,
        "(lam x (arrow bool num) [ok ok] (ap [ok] (var x [ok]){ana=none, mark=ok, syn=(arrow bool num), dirty=none} \
         (num 1){ana=bool, mark=err, syn=num, dirty=none}){ana=none, mark=ok, syn=num, dirty=none})\
         {ana=none, mark=ok, syn=(arrow (arrow bool num) num), dirty=syn}",
    ),
    (
        15,
        "(lam x (arrow bool num) [ok ok] (ap [ok] (var x [ok]){ana=none, mark=ok, syn=(arrow bool num), dirty=none} \
         (num 1){ana=bool, mark=err, syn=num, dirty=none}){ana=none, mark=ok, syn=num, dirty=none})\
         {ana=none, mark=ok, syn=(arrow (arrow bool num) num), dirty=none}",
    ),
];

pub fn term(k: u32) -> IncrProgram {
    let src = TERMS.iter().find(|(n, _)| *n == k).expect("known term").1;
    parse_program(src).unwrap_or_else(|e| panic!("term ({k}): {e}"))
}

pub fn all_clean(p: &IncrProgram) -> IncrProgram {
    with_dirty(p, DirtyBit::Clean)
}

/// A random starting program and an edit trace over it. Edits shrink the
/// program once it passes `max_size` nodes.
pub fn random_trace(
    rng: &mut rand_chacha::ChaCha8Rng,
    start: usize,
    len: usize,
    max_size: usize,
) -> (incbidi::syntax::Expr, Vec<incbidi::action::LocalizedAction>) {
    use incbidi::action::bare_perform;
    use incbidi::gen::{random_action, random_expr};
    let e0 = random_expr(rng, start);
    let mut e = e0.clone();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let a = random_action(rng, &e, max_size);
        e = bare_perform(&e, &a).expect("generated actions apply");
        out.push(a);
    }
    (e0, out)
}

fn surface_dirt(d: &incbidi::engine::Doc) -> usize {
    use incbidi::engine::SlotKind;
    d.dirty_locs().iter().filter(|l| l.slot == SlotKind::Surface).count()
}

/// Takes one step (at `loc`, or the top of the frontier) and checks the
/// termination measure: the step either lowers the number of dirty surface
/// types or dirties only locations strictly downstream of the one it popped.
pub fn measured_step(d: &mut incbidi::engine::Doc, loc: Option<incbidi::engine::DirtyLoc>) -> Result<bool, String> {
    use std::cmp::Ordering;
    let before = surface_dirt(d);
    let r = match loc {
        Some(l) => d.step_at(l).map_err(|e| e.to_string())?,
        None => match d.step() {
            Some(r) => r,
            None => return Ok(false),
        },
    };
    if surface_dirt(d) < before {
        return Ok(true);
    }
    for p in &r.pushed {
        if d.priority_cmp(r.popped, *p) != Ordering::Less {
            return Err(format!("{} at {:?} pushed {:?}, which is not downstream", r.rule, r.popped, p));
        }
    }
    Ok(true)
}
