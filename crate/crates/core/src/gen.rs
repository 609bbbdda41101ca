//! Seeded random programs and edit actions for fuzzing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::action::{check_applicable, LocalizedAction, SimpleAction};
use crate::syntax::{Binding, Child, Expr, Type};

/// A small pool so that shadowing and capture happen often.
pub const NAMES: &[&str] = &["x", "y", "z", "f", "g"];

pub fn random_type<R: Rng + ?Sized>(rng: &mut R, depth: u32) -> Type {
    let leaf = depth == 0 || rng.gen_bool(0.5);
    if leaf {
        return match rng.gen_range(0..3) {
            0 => Type::Unknown,
            1 => Type::Num,
            _ => Type::Bool,
        };
    }
    match rng.gen_range(0..3) {
        0 => Type::arrow(random_type(rng, depth - 1), random_type(rng, depth - 1)),
        1 => Type::prod(random_type(rng, depth - 1), random_type(rng, depth - 1)),
        _ => Type::list(random_type(rng, depth - 1)),
    }
}

fn random_binding<R: Rng + ?Sized>(rng: &mut R) -> Binding {
    if rng.gen_bool(0.1) {
        Binding::Hole
    } else {
        Binding::Name(NAMES.choose(rng).unwrap().to_string())
    }
}

fn random_leaf<R: Rng + ?Sized>(rng: &mut R, scope: &[String]) -> Expr {
    match rng.gen_range(0..10) {
        0 => Expr::Hole,
        1 | 2 => Expr::Num(rng.gen_range(0..100)),
        3 => Expr::Bool(rng.gen()),
        4 => Expr::Nil,
        // Mostly bound names, occasionally a free one.
        _ => match scope.choose(rng) {
            Some(x) if rng.gen_bool(0.9) => Expr::Var(x.clone()),
            _ => Expr::var(NAMES.choose(rng).unwrap()),
        },
    }
}

/// A random expression with about `size` nodes.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, size: usize) -> Expr {
    gen_expr(rng, size.max(1), &mut Vec::new())
}

fn gen_expr<R: Rng + ?Sized>(rng: &mut R, size: usize, scope: &mut Vec<String>) -> Expr {
    if size <= 1 {
        return random_leaf(rng, scope);
    }
    let rest = size - 1;
    let split2 = |rng: &mut R| {
        let a = rng.gen_range(0..=rest);
        (a, rest - a)
    };
    match rng.gen_range(0..12) {
        0..=2 => {
            let b = random_binding(rng);
            let t = random_type(rng, 2);
            let body = with_binders(rng, scope, &[&b], |rng, scope| gen_expr(rng, rest, scope));
            Expr::Lam(b, t, Box::new(body))
        }
        3..=5 => {
            let (a, b) = split2(rng);
            Expr::ap(gen_expr(rng, a, scope), gen_expr(rng, b, scope))
        }
        6 => Expr::asc(gen_expr(rng, rest, scope), random_type(rng, 2)),
        7 => {
            let (a, b) = split2(rng);
            Expr::Pair(Box::new(gen_expr(rng, a, scope)), Box::new(gen_expr(rng, b, scope)))
        }
        8 => {
            let e = Box::new(gen_expr(rng, rest, scope));
            if rng.gen() {
                Expr::Fst(e)
            } else {
                Expr::Snd(e)
            }
        }
        9 => {
            let (a, b) = split2(rng);
            Expr::Cons(Box::new(gen_expr(rng, a, scope)), Box::new(gen_expr(rng, b, scope)))
        }
        10 => {
            let a = rng.gen_range(0..=rest);
            let b = rng.gen_range(0..=rest - a);
            let c = rest - a - b;
            let (hd, tl) = (random_binding(rng), random_binding(rng));
            let scrut = gen_expr(rng, a, scope);
            let nil = gen_expr(rng, b, scope);
            let cons = with_binders(rng, scope, &[&hd, &tl], |rng, scope| gen_expr(rng, c, scope));
            Expr::Case { scrut: Box::new(scrut), nil: Box::new(nil), hd, tl, cons: Box::new(cons) }
        }
        _ => {
            // Let-style redex: (ap (lam x T body) def).
            let (a, b) = split2(rng);
            let x = random_binding(rng);
            let t = random_type(rng, 1);
            let def = gen_expr(rng, b, scope);
            let body = with_binders(rng, scope, &[&x], |rng, scope| gen_expr(rng, a.saturating_sub(1), scope));
            Expr::ap(Expr::Lam(x, t, Box::new(body)), def)
        }
    }
}

fn with_binders<R: Rng + ?Sized, T>(
    rng: &mut R,
    scope: &mut Vec<String>,
    bs: &[&Binding],
    f: impl FnOnce(&mut R, &mut Vec<String>) -> T,
) -> T {
    let before = scope.len();
    for b in bs {
        if let Binding::Name(x) = b {
            scope.push(x.clone());
        }
    }
    let out = f(rng, scope);
    scope.truncate(before);
    out
}

/// Names bound at `path` in `e`, innermost last.
fn scope_at(e: &Expr, path: &[Child]) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = e;
    for &c in path {
        match cur {
            Expr::Lam(Binding::Name(x), ..) => out.push(x.clone()),
            Expr::Case { hd, tl, .. } if c == Child::Three => {
                out.extend(hd.name().map(str::to_string));
                out.extend(tl.name().map(str::to_string));
            }
            _ => {}
        }
        cur = cur.child(c).expect("valid path");
    }
    out
}

fn random_child<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Child {
    Child::from_index(rng.gen_range(0..n)).unwrap()
}

/// A random action applicable somewhere in `e`. Above `max_size` nodes,
/// shrinking actions are preferred.
pub fn random_action<R: Rng + ?Sized>(rng: &mut R, e: &Expr, max_size: usize) -> LocalizedAction {
    let paths = e.paths();
    let shrink = e.size() > max_size;
    loop {
        let path = paths.choose(rng).unwrap().clone();
        let target = e.at(&path).unwrap();
        let arity = target.children().len();
        use SimpleAction::*;
        let a = if shrink {
            if arity > 0 && rng.gen_bool(0.5) {
                Unwrap(random_child(rng, arity))
            } else {
                Delete
            }
        } else {
            match rng.gen_range(0..20) {
                0..=2 => match rng.gen_range(0..5) {
                    0 => InsertNum(rng.gen_range(0..10)),
                    1 => InsertBool(rng.gen()),
                    2 => InsertNil,
                    _ => {
                        let scope = scope_at(e, &path);
                        match scope.choose(rng) {
                            Some(x) if rng.gen_bool(0.8) => InsertVar(x.clone()),
                            _ => InsertVar(NAMES.choose(rng).unwrap().to_string()),
                        }
                    }
                },
                3 => WrapFun,
                4 => WrapAp(random_child(rng, 2)),
                5 => WrapAsc,
                6 => WrapPair(random_child(rng, 2)),
                7 => {
                    if rng.gen() {
                        WrapFst
                    } else {
                        WrapSnd
                    }
                }
                8 => WrapCons(random_child(rng, 2)),
                9 => WrapCase(random_child(rng, 3)),
                10 => Delete,
                11 | 12 if arity > 0 => Unwrap(random_child(rng, arity)),
                13 | 14 => match target {
                    Expr::Lam(..) => SetAnn(random_type(rng, 2)),
                    Expr::Asc(..) => SetAsc(random_type(rng, 2)),
                    _ => continue,
                },
                15 | 16 => InsertBinder(random_binding(rng)),
                17 => DeleteBinder,
                18 => InsertTlBinder(random_binding(rng)),
                _ => DeleteTlBinder,
            }
        };
        if check_applicable(target, &a).is_ok() {
            return LocalizedAction::new(a, path);
        }
    }
}
