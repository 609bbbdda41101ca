//! From-scratch marking, well-markedness and well-formedness.

use std::collections::HashMap;

use crate::side::*;
use crate::syntax::*;

/// Variable environment used while marking.
pub trait Env {
    fn lookup(&self, x: &str) -> (Mark, TypeOpt);
    fn depth(&self) -> usize;
    fn push(&mut self, b: &Binding, ty: TypeOpt);
    fn reset(&mut self, depth: usize);
}

impl Env for Ctx {
    fn lookup(&self, x: &str) -> (Mark, TypeOpt) {
        ctx_lookup(x, self)
    }
    fn depth(&self) -> usize {
        self.len()
    }
    fn push(&mut self, b: &Binding, ty: TypeOpt) {
        self.extend(b, ty)
    }
    fn reset(&mut self, depth: usize) {
        self.truncate(depth)
    }
}

/// Hash-map environment with per-name shadowing stacks; O(1) lookup.
#[derive(Default)]
pub struct ScopedEnv {
    map: HashMap<String, Vec<TypeOpt>>,
    log: Vec<String>,
}

impl Env for ScopedEnv {
    fn lookup(&self, x: &str) -> (Mark, TypeOpt) {
        match self.map.get(x).and_then(|v| v.last()) {
            Some(t) => (Mark::Ok, t.clone()),
            None => (Mark::Err, Some(Type::Unknown)),
        }
    }
    fn depth(&self) -> usize {
        self.log.len()
    }
    fn push(&mut self, b: &Binding, ty: TypeOpt) {
        if let Binding::Name(x) = b {
            self.map.entry(x.clone()).or_default().push(ty);
            self.log.push(x.clone());
        }
    }
    fn reset(&mut self, depth: usize) {
        while self.log.len() > depth {
            let x = self.log.pop().unwrap();
            self.map.get_mut(&x).unwrap().pop();
        }
    }
}

fn slot(ty: TypeOpt) -> Slot<()> {
    Slot { ty, dirty: () }
}

/// Marks `e` analytically against `ana`; `None` means synthetic mode.
pub fn mark_with<E: Env>(env: &mut E, ana: TypeOpt, e: &Expr) -> MarkedProgram {
    if let Expr::Lam(b, ann, body) = e {
        let ann_t = Some(ann.clone());
        let (non_arrow, dom_t, cod_t) = matched_arrow(&ana);
        let dom = consistency(&dom_t, &ann_t);
        let d = env.depth();
        env.push(b, ann_t.clone());
        let body = mark_with(env, cod_t, body);
        env.reset(d);
        let syn = fun_syn(&ana, &ann_t, &body.syn.ty);
        let mark = consistency(&ana, &syn);
        let con = Con::Lam {
            binder: b.clone(),
            ann: Surface { ty: ann.clone(), dirty: () },
            non_arrow,
            dom,
            body: Box::new(body),
        };
        return AnaExp { ana: slot(ana), mark, syn: slot(syn), con };
    }
    let (con, syn) = synthesize(env, e);
    let mark = consistency(&ana, &syn);
    AnaExp { ana: slot(ana), mark, syn: slot(syn), con }
}

fn synthesize<E: Env>(env: &mut E, e: &Expr) -> (Con<()>, TypeOpt) {
    let sub = |env: &mut E, ana: TypeOpt, e: &Expr| Box::new(mark_with(env, ana, e));
    match e {
        Expr::Hole => (Con::Hole, Some(Type::Unknown)),
        Expr::Var(x) => {
            let (free, t) = env.lookup(x);
            (Con::Var { name: x.clone(), free }, t)
        }
        Expr::Ap(f, a) => {
            let fun = sub(env, None, f);
            let (mark, dom, cod) = matched_arrow(&fun.syn.ty);
            let arg = sub(env, dom, a);
            (Con::Ap { mark, fun, arg }, cod)
        }
        Expr::Asc(b, t) => {
            let body = sub(env, Some(t.clone()), b);
            (Con::Asc { body, ty: Surface { ty: t.clone(), dirty: () } }, Some(t.clone()))
        }
        Expr::Num(n) => (Con::Num(*n), Some(Type::Num)),
        Expr::Bool(b) => (Con::Bool(*b), Some(Type::Bool)),
        Expr::Nil => (Con::Nil, Some(Type::list(Type::Unknown))),
        Expr::Pair(l, r) => {
            let l = sub(env, None, l);
            let r = sub(env, None, r);
            let t = pair_syn(&l.syn.ty, &r.syn.ty);
            (Con::Pair(l, r), t)
        }
        Expr::Fst(x) | Expr::Snd(x) => {
            let e1 = sub(env, None, x);
            let (mark, a, b) = matched_prod(&e1.syn.ty);
            if matches!(e, Expr::Fst(_)) {
                (Con::Fst { mark, e: e1 }, a)
            } else {
                (Con::Snd { mark, e: e1 }, b)
            }
        }
        Expr::Cons(h, t) => {
            let h = sub(env, None, h);
            let lt = list_of(&h.syn.ty);
            let t = sub(env, lt.clone(), t);
            (Con::Cons(h, t), lt)
        }
        Expr::Case { scrut, nil, hd, tl, cons } => {
            let scrut = sub(env, None, scrut);
            let (mark, elem) = matched_list(&scrut.syn.ty);
            let nil = sub(env, None, nil);
            let d = env.depth();
            env.push(hd, elem.clone());
            env.push(tl, list_of(&elem));
            let cons = sub(env, nil.syn.ty.clone(), cons);
            env.reset(d);
            let t = nil.syn.ty.clone();
            (Con::Case { mark, scrut, nil, hd: hd.clone(), tl: tl.clone(), cons }, t)
        }
        Expr::Lam(..) => unreachable!("lambdas are handled by mark_with"),
    }
}

pub fn mark_synthetic(ctx: &Ctx, e: &Expr) -> MarkedProgram {
    mark_with(&mut ctx.clone(), None, e)
}

pub fn mark_analytic(ctx: &Ctx, ana: TypeOpt, e: &Expr) -> MarkedProgram {
    mark_with(&mut ctx.clone(), ana, e)
}

/// Marks a whole program in the empty context under a `(none, ok)` wrapper.
pub fn mark_program(e: &Expr) -> MarkedProgram {
    mark_with(&mut Ctx::new(), None, e)
}

/// Same marking with hashed scopes; the from-scratch path timed by the benchmark.
pub fn baseline_mark(e: &Expr) -> MarkedProgram {
    mark_with(&mut ScopedEnv::default(), None, e)
}

pub fn is_well_marked<D: Dirtiness>(p: &AnaExp<D>) -> bool {
    strip_dirty(p) == mark_program(&erase(p))
}

pub fn is_well_formed(p: &IncrProgram) -> bool {
    wf_violation(p).is_none()
}

/// The first well-formedness violation found, as `path: reason`.
pub fn wf_violation(p: &IncrProgram) -> Option<String> {
    if p.ana.ty.is_some() || p.mark != Mark::Ok {
        return Some("root: program wrapper must be (none, ok)".into());
    }
    let mut w = Wf { ctx: Vec::new(), path: Vec::new() };
    w.node(p).err()
}

struct Wf {
    ctx: Vec<(String, TypeOpt, bool)>,
    path: Vec<usize>,
}

type WfResult = Result<(), String>;

impl Wf {
    fn fail(&self, why: &str) -> WfResult {
        let p: Vec<String> = self.path.iter().map(|i| (i + 1).to_string()).collect();
        Err(format!("{}: {why}", if p.is_empty() { "root".to_string() } else { p.join(".") }))
    }

    /// `a° ≻ b`: the source is dirty or the values agree.
    fn flows<T: PartialEq>(&self, src: &T, src_dirty: bool, dst: &T, why: &str) -> WfResult {
        if src_dirty || src == dst {
            Ok(())
        } else {
            self.fail(why)
        }
    }

    fn unanalyzed(&self, e: &IncrProgram, why: &str) -> WfResult {
        if e.ana.ty.is_none() {
            Ok(())
        } else {
            self.fail(why)
        }
    }

    fn child(&mut self, i: usize, e: &IncrProgram) -> WfResult {
        self.path.push(i);
        let r = self.node(e);
        self.path.pop();
        r
    }

    fn node(&mut self, e: &IncrProgram) -> WfResult {
        let da = e.ana.dirty.is_dirty();
        let ds = e.syn.dirty.is_dirty();
        let cm = consistency(&e.ana.ty, &e.syn.ty);
        self.flows(&cm, da || ds, &e.mark, "consistency mark")?;
        match &e.con {
            Con::Hole => self.flows(&Some(Type::Unknown), false, &e.syn.ty, "hole synthesizes ?"),
            Con::Num(_) => self.flows(&Some(Type::Num), false, &e.syn.ty, "number synthesizes num"),
            Con::Bool(_) => self.flows(&Some(Type::Bool), false, &e.syn.ty, "boolean synthesizes bool"),
            Con::Nil => self.flows(&Some(Type::list(Type::Unknown)), false, &e.syn.ty, "nil synthesizes (list ?)"),
            Con::Var { name, free } => {
                let (m, t, d) = match self.ctx.iter().rev().find(|(x, _, _)| x == name) {
                    Some((_, t, d)) => (Mark::Ok, t.clone(), *d),
                    None => (Mark::Err, Some(Type::Unknown), false),
                };
                if m != *free {
                    return self.fail("free-variable mark");
                }
                self.flows(&t, d, &e.syn.ty, "variable type")
            }
            Con::Asc { body, ty } => {
                let t = Some(ty.ty.clone());
                let dt = ty.dirty.is_dirty();
                self.flows(&t, dt, &body.ana.ty, "ascription analyzes body")?;
                self.flows(&t, dt, &e.syn.ty, "ascription synthesizes its type")?;
                self.child(0, body)
            }
            Con::Ap { mark, fun, arg } => {
                self.unanalyzed(fun, "function position is not analyzed")?;
                let df = fun.syn.dirty.is_dirty();
                let (m, dom, cod) = matched_arrow(&fun.syn.ty);
                self.flows(&m, df, mark, "application mark")?;
                self.flows(&dom, df, &arg.ana.ty, "argument analyzed against domain")?;
                self.flows(&cod, df, &e.syn.ty, "application synthesizes codomain")?;
                self.child(0, fun)?;
                self.child(1, arg)
            }
            Con::Lam { binder, ann, non_arrow, dom, body } => {
                let dt = ann.dirty.is_dirty();
                let ann_t = Some(ann.ty.clone());
                let (m5, s5, s6) = matched_arrow(&e.ana.ty);
                self.flows(&m5, da, non_arrow, "non-arrow mark")?;
                self.flows(&consistency(&s5, &ann_t), da || dt, dom, "domain mark")?;
                self.flows(&s6, da, &body.ana.ty, "body analyzed against codomain")?;
                let fs = fun_syn(&e.ana.ty, &ann_t, &body.syn.ty);
                self.flows(&fs, da || dt || body.syn.dirty.is_dirty(), &e.syn.ty, "lambda synthesis")?;
                let n = self.ctx.len();
                if let Binding::Name(x) = binder {
                    self.ctx.push((x.clone(), ann_t, dt));
                }
                let r = self.child(0, body);
                self.ctx.truncate(n);
                r
            }
            Con::Pair(l, r) => {
                self.unanalyzed(l, "pair component is not analyzed")?;
                self.unanalyzed(r, "pair component is not analyzed")?;
                let d = l.syn.dirty.is_dirty() || r.syn.dirty.is_dirty();
                self.flows(&pair_syn(&l.syn.ty, &r.syn.ty), d, &e.syn.ty, "pair synthesis")?;
                self.child(0, l)?;
                self.child(1, r)
            }
            Con::Fst { mark, e: x } | Con::Snd { mark, e: x } => {
                self.unanalyzed(x, "projection argument is not analyzed")?;
                let d = x.syn.dirty.is_dirty();
                let (m, a, b) = matched_prod(&x.syn.ty);
                self.flows(&m, d, mark, "projection mark")?;
                let t = if matches!(e.con, Con::Fst { .. }) { a } else { b };
                self.flows(&t, d, &e.syn.ty, "projection synthesis")?;
                self.child(0, x)
            }
            Con::Cons(h, t) => {
                self.unanalyzed(h, "cons head is not analyzed")?;
                let d = h.syn.dirty.is_dirty();
                let lt = list_of(&h.syn.ty);
                self.flows(&lt, d, &t.ana.ty, "cons tail analyzed against list of head")?;
                self.flows(&lt, d, &e.syn.ty, "cons synthesis")?;
                self.child(0, h)?;
                self.child(1, t)
            }
            Con::Case { mark, scrut, nil, hd, tl, cons } => {
                self.unanalyzed(scrut, "scrutinee is not analyzed")?;
                self.unanalyzed(nil, "nil branch is not analyzed")?;
                let dsc = scrut.syn.dirty.is_dirty();
                let (m, elem) = matched_list(&scrut.syn.ty);
                self.flows(&m, dsc, mark, "case mark")?;
                let dn = nil.syn.dirty.is_dirty();
                self.flows(&nil.syn.ty, dn, &cons.ana.ty, "cons branch analyzed against nil branch")?;
                self.flows(&nil.syn.ty, dn, &e.syn.ty, "case synthesis")?;
                self.child(0, scrut)?;
                self.child(1, nil)?;
                let n = self.ctx.len();
                if let Binding::Name(x) = hd {
                    self.ctx.push((x.clone(), elem.clone(), dsc));
                }
                if let Binding::Name(x) = tl {
                    self.ctx.push((x.clone(), list_of(&elem), dsc));
                }
                let r = self.child(2, cons);
                self.ctx.truncate(n);
                r
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_expr, parse_program, print_program};

    fn mp(s: &str) -> MarkedProgram {
        mark_program(&parse_expr(s).unwrap())
    }

    #[test]
    fn non_function_application() {
        let p = mp("(ap (num 1) (var x))");
        assert_eq!(p.error_count(), 2);
        match &p.con {
            Con::Ap { mark, arg, .. } => {
                assert_eq!(*mark, Mark::Err);
                assert!(matches!(arg.con, Con::Var { free: Mark::Err, .. }));
            }
            _ => panic!(),
        }
        assert_eq!(p.syn.ty, Some(Type::Unknown));
    }

    #[test]
    fn free_function_applied() {
        let p = mp("(ap (var x) (num 1))");
        assert_eq!(
            print_program(&p),
            "(ap [ok] (var x [err]){ana=none, mark=ok, syn=?} (num 1){ana=?, mark=ok, syn=num}){ana=none, mark=ok, syn=?}"
        );
    }

    #[test]
    fn annotated_lambda_has_one_error() {
        let p = mp("(lam x (arrow bool num) (ap (var x) (num 1)))");
        assert_eq!(p.error_count(), 1);
        assert_eq!(p.syn.ty, Some(crate::text::parse_type("(arrow (arrow bool num) num)").unwrap()));
        let arg = p.at(&[Child::One, Child::Two]).unwrap();
        assert_eq!(arg.mark, Mark::Err);
        assert_eq!(arg.ana.ty, Some(Type::Bool));
    }

    #[test]
    fn analytic_lambda() {
        let p = mp("(asc (lam x num (var x)) (arrow bool num))");
        let lam = p.at(&[Child::One]).unwrap();
        match &lam.con {
            Con::Lam { non_arrow, dom, .. } => {
                assert_eq!(*non_arrow, Mark::Ok);
                assert_eq!(*dom, Mark::Err);
            }
            _ => panic!(),
        }
        assert_eq!(lam.syn.ty, None);
        assert_eq!(lam.mark, Mark::Ok);
        let p = mp("(asc (lam x ? (var x)) num)");
        assert_eq!(p.error_count(), 1);
    }

    #[test]
    fn list_case_binds_element_types() {
        let p = mp("(case (cons (num 1) nil) nil h t (cons (var h) (var t)))");
        assert_eq!(p.error_count(), 0);
        assert_eq!(p.syn.ty, Some(Type::list(Type::Unknown)));
        let h = p.at(&[Child::Three, Child::One]).unwrap();
        assert_eq!(h.syn.ty, Some(Type::Num));
        let t = p.at(&[Child::Three, Child::Two]).unwrap();
        assert_eq!(t.syn.ty, Some(Type::list(Type::Num)));
        // Tail shadows head; the branch type clashes with the nil branch.
        let p = mp("(case (num 1) (num 2) h h (var h))");
        assert_eq!(p.error_count(), 2);
        assert_eq!(p.at(&[Child::Three]).unwrap().syn.ty, Some(Type::list(Type::Unknown)));
    }

    #[test]
    fn projections_and_pairs() {
        let p = mp("(fst (pair (num 1) (bool true)))");
        assert_eq!(p.syn.ty, Some(Type::Num));
        let p = mp("(snd (num 1))");
        assert_eq!(p.error_count(), 1);
        let p = mp("(cons (num 1) (cons (bool true) nil))");
        assert_eq!(p.error_count(), 1);
        assert_eq!(p.at(&[Child::Two]).unwrap().mark, Mark::Err);
    }

    #[test]
    fn baseline_agrees_with_oracle() {
        for s in [
            "(lam x num (lam x bool (var x)))",
            "(ap (lam f (arrow num num) (ap (var f) (var y))) (lam z ? (var z)))",
            "(case ? (var t) h t (var t))",
        ] {
            let e = parse_expr(s).unwrap();
            assert_eq!(mark_program(&e), baseline_mark(&e));
        }
    }

    #[test]
    fn well_formedness_detects_flipped_mark() {
        let p = with_dirty(&mp("(ap (var x) (num 1))"), DirtyBit::Clean);
        assert!(is_well_formed(&p));
        assert!(is_well_marked(&p));
        let mut q = p.clone();
        q.mark = Mark::Err;
        assert!(!is_well_formed(&q));
        let mut q = p.clone();
        if let Con::Ap { arg, .. } = &mut q.con {
            arg.ana.ty = Some(Type::Num);
        }
        assert!(!is_well_formed(&q));
        if let Con::Ap { fun, .. } = &mut q.con {
            fun.syn.dirty = DirtyBit::Dirty;
        }
        assert!(is_well_formed(&q));
        let q: IncrProgram =
            parse_program("(var x [err]){ana=none, mark=ok, syn=?, dirty=ana+syn}").unwrap();
        assert!(is_well_formed(&q));
    }
}
