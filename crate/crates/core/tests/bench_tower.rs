use std::collections::HashSet;

use incbidi::action::bare_perform;
use incbidi::bench::{gen_random_edits, gen_tower, tower_expr, Category};
use incbidi::engine::Doc;
use incbidi::reference::mark_program;
use incbidi::syntax::{Binding, Expr};

/// Names of every variable occurrence with no enclosing binder.
fn free_names(e: &Expr, scope: &mut Vec<String>, out: &mut Vec<String>) {
    let bind = |b: &Binding, scope: &mut Vec<String>| {
        if let Binding::Name(x) = b {
            scope.push(x.clone());
        }
    };
    match e {
        Expr::Var(x) if !scope.contains(x) => out.push(x.clone()),
        Expr::Lam(b, _, body) => {
            let n = scope.len();
            bind(b, scope);
            free_names(body, scope, out);
            scope.truncate(n);
        }
        Expr::Case { scrut, nil, hd, tl, cons } => {
            free_names(scrut, scope, out);
            free_names(nil, scope, out);
            let n = scope.len();
            bind(hd, scope);
            bind(tl, scope);
            free_names(cons, scope, out);
            scope.truncate(n);
        }
        _ => e.children().into_iter().for_each(|c| free_names(c, scope, out)),
    }
}

#[test]
fn towers_are_closed_and_well_typed() {
    for layers in [1, 3, 20] {
        let e = tower_expr(layers, 11);
        let mut free = Vec::new();
        free_names(&e, &mut Vec::new(), &mut free);
        assert!(free.is_empty(), "free names {free:?}");
        assert_eq!(mark_program(&e).error_count(), 0, "layers {layers}");
    }
}

#[test]
fn built_tower_binds_innermost_definitions() {
    // The document's recorded owners are checked against naive lexical
    // resolution, which includes every shadowed `mergesort`.
    let mut d = Doc::load(&Expr::Hole);
    for a in gen_tower(20, 4) {
        d.apply(&a).unwrap();
        d.run_to_quiescence().unwrap();
    }
    d.verify().unwrap();
    assert_eq!(d.to_expr(), tower_expr(20, 4));
    assert_eq!(d.snapshot().error_count(), 0);
}

#[test]
fn generation_is_deterministic() {
    assert_eq!(gen_tower(6, 9), gen_tower(6, 9));
    assert_ne!(gen_tower(6, 9), gen_tower(6, 10));
    let e = tower_expr(4, 2);
    assert_eq!(gen_random_edits(&e, 30, 5), gen_random_edits(&e, 30, 5));
}

#[test]
fn edits_cover_every_category_and_replay() {
    let e = tower_expr(5, 3);
    let pairs = gen_random_edits(&e, 500, 8);
    assert_eq!(pairs.len(), 500);
    let seen: HashSet<Category> = pairs.iter().flatten().map(|ed| ed.category).collect();
    assert_eq!(seen.len(), 4);
    let mut cur = e;
    for pair in &pairs {
        for ed in pair {
            cur = bare_perform(&cur, &ed.action).unwrap();
        }
    }
}
