//! Value-level syntax: types, bare expressions, and decorated programs.

use std::fmt;

/// Gradual types.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Type {
    Unknown,
    Num,
    Bool,
    Arrow(Box<Type>, Box<Type>),
    Prod(Box<Type>, Box<Type>),
    List(Box<Type>),
}

/// `None` is the absent type (written `□` in the literature, `none` in text).
pub type TypeOpt = Option<Type>;

impl Type {
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }

    pub fn list(a: Type) -> Type {
        Type::List(Box::new(a))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Mark {
    Ok,
    Err,
}

impl Mark {
    pub fn is_err(self) -> bool {
        self == Mark::Err
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Binding {
    Hole,
    Name(String),
}

impl Binding {
    pub fn name(&self) -> Option<&str> {
        match self {
            Binding::Hole => None,
            Binding::Name(x) => Some(x),
        }
    }
}

/// Bare (unmarked) expressions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expr {
    Hole,
    Var(String),
    Lam(Binding, Type, Box<Expr>),
    Ap(Box<Expr>, Box<Expr>),
    Asc(Box<Expr>, Type),
    Num(i64),
    Bool(bool),
    Pair(Box<Expr>, Box<Expr>),
    Fst(Box<Expr>),
    Snd(Box<Expr>),
    Nil,
    Cons(Box<Expr>, Box<Expr>),
    Case {
        scrut: Box<Expr>,
        nil: Box<Expr>,
        hd: Binding,
        tl: Binding,
        cons: Box<Expr>,
    },
}

impl Expr {
    pub fn var(x: &str) -> Expr {
        Expr::Var(x.to_string())
    }

    pub fn lam(x: &str, ann: Type, body: Expr) -> Expr {
        let b = if x == "?" { Binding::Hole } else { Binding::Name(x.to_string()) };
        Expr::Lam(b, ann, Box::new(body))
    }

    pub fn ap(f: Expr, a: Expr) -> Expr {
        Expr::Ap(Box::new(f), Box::new(a))
    }

    pub fn asc(e: Expr, t: Type) -> Expr {
        Expr::Asc(Box::new(e), t)
    }

    /// Immediate children in child-index order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Hole | Expr::Var(_) | Expr::Num(_) | Expr::Bool(_) | Expr::Nil => vec![],
            Expr::Lam(_, _, b) | Expr::Asc(b, _) | Expr::Fst(b) | Expr::Snd(b) => vec![b],
            Expr::Ap(a, b) | Expr::Pair(a, b) | Expr::Cons(a, b) => vec![a, b],
            Expr::Case { scrut, nil, cons, .. } => vec![scrut, nil, cons],
        }
    }

    pub fn child(&self, c: Child) -> Option<&Expr> {
        self.children().get(c.index()).copied()
    }

    pub fn child_mut(&mut self, c: Child) -> Option<&mut Expr> {
        let i = c.index();
        match self {
            Expr::Lam(_, _, b) | Expr::Asc(b, _) | Expr::Fst(b) | Expr::Snd(b) if i == 0 => Some(b),
            Expr::Ap(a, b) | Expr::Pair(a, b) | Expr::Cons(a, b) => match i {
                0 => Some(a),
                1 => Some(b),
                _ => None,
            },
            Expr::Case { scrut, nil, cons, .. } => match i {
                0 => Some(scrut),
                1 => Some(nil),
                2 => Some(cons),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            n += 1;
            stack.extend(e.children());
        }
        n
    }

    pub fn at(&self, path: &[Child]) -> Option<&Expr> {
        let mut e = self;
        for &c in path {
            e = e.child(c)?;
        }
        Some(e)
    }

    pub fn at_mut(&mut self, path: &[Child]) -> Option<&mut Expr> {
        let mut e = self;
        for &c in path {
            e = e.child_mut(c)?;
        }
        Some(e)
    }

    /// Every path in pre-order.
    pub fn paths(&self) -> Vec<Vec<Child>> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new())];
        while let Some((e, p)) = stack.pop() {
            for (i, c) in e.children().into_iter().enumerate().rev() {
                let mut q = p.clone();
                q.push(Child::from_index(i).unwrap());
                stack.push((c, q));
            }
            out.push(p);
        }
        out
    }
}

/// Child index into a constructor. `Three` only exists for list case.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Child {
    One,
    Two,
    Three,
}

impl Child {
    pub fn index(self) -> usize {
        match self {
            Child::One => 0,
            Child::Two => 1,
            Child::Three => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Child> {
        match i {
            0 => Some(Child::One),
            1 => Some(Child::Two),
            2 => Some(Child::Three),
            _ => None,
        }
    }
}

impl fmt::Display for Child {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum DirtyBit {
    Clean,
    Dirty,
}

/// Abstracts over "carries a dirty bit" (`DirtyBit`) and "does not" (`()`),
/// so marked and incremental programs share one tree type.
pub trait Dirtiness: Copy + Eq + fmt::Debug {
    const TRACKED: bool;
    fn is_dirty(self) -> bool;
    fn from_dirty(d: bool) -> Self;
}

impl Dirtiness for () {
    const TRACKED: bool = false;
    fn is_dirty(self) -> bool {
        false
    }
    fn from_dirty(_: bool) -> Self {}
}

impl Dirtiness for DirtyBit {
    const TRACKED: bool = true;
    fn is_dirty(self) -> bool {
        self == DirtyBit::Dirty
    }
    fn from_dirty(d: bool) -> Self {
        if d {
            DirtyBit::Dirty
        } else {
            DirtyBit::Clean
        }
    }
}

/// An analyzed or synthesized type position.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Slot<D> {
    pub ty: TypeOpt,
    pub dirty: D,
}

/// A surface type written by the programmer (lambda annotation, ascription).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Surface<D> {
    pub ty: Type,
    pub dirty: D,
}

/// Analytic wrapper around a synthetic wrapper around a constructor.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AnaExp<D> {
    pub ana: Slot<D>,
    pub mark: Mark,
    pub syn: Slot<D>,
    pub con: Con<D>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Con<D> {
    Hole,
    Var {
        name: String,
        free: Mark,
    },
    Lam {
        binder: Binding,
        ann: Surface<D>,
        /// Analyzed type is not an arrow.
        non_arrow: Mark,
        /// Domain inconsistent with the annotation.
        dom: Mark,
        body: Box<AnaExp<D>>,
    },
    Ap {
        mark: Mark,
        fun: Box<AnaExp<D>>,
        arg: Box<AnaExp<D>>,
    },
    Asc {
        body: Box<AnaExp<D>>,
        ty: Surface<D>,
    },
    Num(i64),
    Bool(bool),
    Pair(Box<AnaExp<D>>, Box<AnaExp<D>>),
    Fst {
        mark: Mark,
        e: Box<AnaExp<D>>,
    },
    Snd {
        mark: Mark,
        e: Box<AnaExp<D>>,
    },
    Nil,
    Cons(Box<AnaExp<D>>, Box<AnaExp<D>>),
    Case {
        mark: Mark,
        scrut: Box<AnaExp<D>>,
        nil: Box<AnaExp<D>>,
        hd: Binding,
        tl: Binding,
        cons: Box<AnaExp<D>>,
    },
}

pub type MarkedProgram = AnaExp<()>;
pub type IncrProgram = AnaExp<DirtyBit>;

impl<D: Dirtiness> AnaExp<D> {
    pub fn children(&self) -> Vec<&AnaExp<D>> {
        match &self.con {
            Con::Hole | Con::Var { .. } | Con::Num(_) | Con::Bool(_) | Con::Nil => vec![],
            Con::Lam { body, .. } | Con::Asc { body, .. } => vec![body],
            Con::Fst { e, .. } | Con::Snd { e, .. } => vec![e],
            Con::Ap { fun, arg, .. } => vec![fun, arg],
            Con::Pair(a, b) | Con::Cons(a, b) => vec![a, b],
            Con::Case { scrut, nil, cons, .. } => vec![scrut, nil, cons],
        }
    }

    pub fn at(&self, path: &[Child]) -> Option<&AnaExp<D>> {
        let mut e = self;
        for &c in path {
            e = *e.children().get(c.index())?;
        }
        Some(e)
    }

    /// Number of `Err` marks anywhere in the tree.
    pub fn error_count(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            n += e.mark.is_err() as usize;
            n += match &e.con {
                Con::Var { free, .. } => free.is_err() as usize,
                Con::Lam { non_arrow, dom, .. } => non_arrow.is_err() as usize + dom.is_err() as usize,
                Con::Ap { mark, .. } | Con::Fst { mark, .. } | Con::Snd { mark, .. } | Con::Case { mark, .. } => {
                    mark.is_err() as usize
                }
                _ => 0,
            };
            stack.extend(e.children());
        }
        n
    }

    /// Number of dirty type positions (always zero without dirty tracking).
    pub fn dirty_count(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            n += e.ana.dirty.is_dirty() as usize + e.syn.dirty.is_dirty() as usize;
            n += match &e.con {
                Con::Lam { ann, .. } => ann.dirty.is_dirty() as usize,
                Con::Asc { ty, .. } => ty.dirty.is_dirty() as usize,
                _ => 0,
            };
            stack.extend(e.children());
        }
        n
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            n += 1;
            stack.extend(e.children());
        }
        n
    }
}

/// Drops all decoration.
pub fn erase<D: Dirtiness>(p: &AnaExp<D>) -> Expr {
    let b = |e: &AnaExp<D>| Box::new(erase(e));
    match &p.con {
        Con::Hole => Expr::Hole,
        Con::Var { name, .. } => Expr::Var(name.clone()),
        Con::Lam { binder, ann, body, .. } => Expr::Lam(binder.clone(), ann.ty.clone(), b(body)),
        Con::Ap { fun, arg, .. } => Expr::Ap(b(fun), b(arg)),
        Con::Asc { body, ty } => Expr::Asc(b(body), ty.ty.clone()),
        Con::Num(n) => Expr::Num(*n),
        Con::Bool(v) => Expr::Bool(*v),
        Con::Pair(l, r) => Expr::Pair(b(l), b(r)),
        Con::Fst { e, .. } => Expr::Fst(b(e)),
        Con::Snd { e, .. } => Expr::Snd(b(e)),
        Con::Nil => Expr::Nil,
        Con::Cons(h, t) => Expr::Cons(b(h), b(t)),
        Con::Case { scrut, nil, hd, tl, cons, .. } => Expr::Case {
            scrut: b(scrut),
            nil: b(nil),
            hd: hd.clone(),
            tl: tl.clone(),
            cons: b(cons),
        },
    }
}

/// Replaces every dirty bit with `()`.
pub fn strip_dirty<D: Dirtiness>(p: &AnaExp<D>) -> MarkedProgram {
    map_dirty(p, &|_| ())
}

/// Rebuilds the tree with every dirty bit set to `bit`.
pub fn with_dirty<D: Dirtiness>(p: &AnaExp<D>, bit: DirtyBit) -> IncrProgram {
    map_dirty(p, &|_| bit)
}

fn map_dirty<D: Dirtiness, E: Dirtiness>(p: &AnaExp<D>, f: &dyn Fn(D) -> E) -> AnaExp<E> {
    let b = |e: &AnaExp<D>| Box::new(map_dirty(e, f));
    let slot = |s: &Slot<D>| Slot { ty: s.ty.clone(), dirty: f(s.dirty) };
    let surf = |s: &Surface<D>| Surface { ty: s.ty.clone(), dirty: f(s.dirty) };
    let con = match &p.con {
        Con::Hole => Con::Hole,
        Con::Var { name, free } => Con::Var { name: name.clone(), free: *free },
        Con::Lam { binder, ann, non_arrow, dom, body } => Con::Lam {
            binder: binder.clone(),
            ann: surf(ann),
            non_arrow: *non_arrow,
            dom: *dom,
            body: b(body),
        },
        Con::Ap { mark, fun, arg } => Con::Ap { mark: *mark, fun: b(fun), arg: b(arg) },
        Con::Asc { body, ty } => Con::Asc { body: b(body), ty: surf(ty) },
        Con::Num(n) => Con::Num(*n),
        Con::Bool(v) => Con::Bool(*v),
        Con::Pair(l, r) => Con::Pair(b(l), b(r)),
        Con::Fst { mark, e } => Con::Fst { mark: *mark, e: b(e) },
        Con::Snd { mark, e } => Con::Snd { mark: *mark, e: b(e) },
        Con::Nil => Con::Nil,
        Con::Cons(h, t) => Con::Cons(b(h), b(t)),
        Con::Case { mark, scrut, nil, hd, tl, cons } => Con::Case {
            mark: *mark,
            scrut: b(scrut),
            nil: b(nil),
            hd: hd.clone(),
            tl: tl.clone(),
            cons: b(cons),
        },
    };
    AnaExp { ana: slot(&p.ana), mark: p.mark, syn: slot(&p.syn), con }
}

/// Structural equality on any sort; dirty bits included when tracked.
pub fn expr_equal<T: PartialEq>(a: &T, b: &T) -> bool {
    a == b
}
