//! The live document: a mutable decorated tree kept up to date by actions
//! and update propagation steps.
//!
//! Each node is an analytic position: it stores the analyzed type, the
//! consistency mark and the synthesized type of the expression there, plus
//! the constructor's own marks. Dirty types are exactly the entries of the
//! [`Frontier`], keyed by pre-order timestamp (analyzed and surface types) or
//! post-order timestamp (synthesized types).

mod actions;
mod frontier;
mod steps;

use std::cmp::Ordering;
use std::collections::HashMap;

use thiserror::Error;

pub use crate::binder::{BinderKey, NodeId};
pub use frontier::{DirtyLoc, SlotKind};
pub use steps::{Rule, StepReport};

use crate::action::{ActionError, LocalizedAction};
use crate::binder::BinderIndex;
use crate::om::{om_create, OmElem, OmOrder};
use crate::reference::mark_program;
use crate::side::{list_of, matched_list};
use crate::syntax::{AnaExp, Binding, Child, Con, DirtyBit, Expr, IncrProgram, Mark, MarkedProgram, Slot, Surface, Type, TypeOpt};
use frontier::Frontier;

pub const NIL: NodeId = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("location is not dirty")]
    NotDirty,
    #[error("step budget of {0} exceeded")]
    StepBudgetExceeded(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Kind {
    Hole,
    Var(String),
    Lam(Binding),
    Ap,
    Asc,
    Num(i64),
    Bool(bool),
    Pair,
    Fst,
    Snd,
    Nil,
    Cons,
    Case(Binding, Binding),
}

impl Kind {
    fn arity(&self) -> usize {
        match self {
            Kind::Hole | Kind::Var(_) | Kind::Num(_) | Kind::Bool(_) | Kind::Nil => 0,
            Kind::Lam(_) | Kind::Asc | Kind::Fst | Kind::Snd => 1,
            Kind::Ap | Kind::Pair | Kind::Cons => 2,
            Kind::Case(..) => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    kind: Kind,
    kids: [NodeId; 3],
    parent: NodeId,
    pos: u8,
    ana: TypeOpt,
    mark: Mark,
    syn: TypeOpt,
    /// Var: free mark. Lam: non-arrow, domain. Ap, Fst, Snd, Case: matched mark.
    marks: [Mark; 2],
    /// Lam annotation or ascribed type.
    surface: Type,
    /// Case: types bound to the head and tail binders.
    bty: [TypeOpt; 2],
    pre: OmElem,
    post: OmElem,
    /// Case: head scope start, tail scope start, tail scope end, head scope end.
    scope: Option<Box<[OmElem; 4]>>,
    owner: Option<BinderKey>,
    ventry: u32,
    deleted: bool,
    /// Visit epoch, for counting distinct nodes per edit.
    seen: u32,
}

/// Counters for instrumentation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub steps: u64,
    pub skipped: u64,
    pub visits: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub steps: u64,
    pub skipped: u64,
}

/// One step of traversal layout: where a timestamp goes.
#[derive(Clone, Copy, Debug)]
enum Ev {
    Pre(NodeId),
    Post(NodeId),
    Scope(NodeId, usize),
    Sub(NodeId),
}

pub struct Doc {
    nodes: Vec<Node>,
    free_nodes: Vec<NodeId>,
    root: NodeId,
    om: OmOrder,
    anchor: OmElem,
    index: BinderIndex,
    frontier: Frontier,
    /// Frontier entries belonging to live nodes.
    live_dirty: usize,
    live: usize,
    stats: Stats,
    epoch: u32,
    instrument: bool,
    pushed: Vec<DirtyLoc>,
    /// Multiplier for the run-to-quiescence safety budget.
    pub budget_factor: u64,
}

impl Doc {
    /// A quiescent document holding `e`, marked from scratch.
    pub fn load(e: &Expr) -> Doc {
        let (om, anchor) = om_create();
        let mut d = Doc {
            nodes: Vec::new(),
            free_nodes: Vec::new(),
            root: NIL,
            om,
            anchor,
            index: BinderIndex::new(),
            frontier: Frontier::default(),
            live_dirty: 0,
            live: 0,
            stats: Stats::default(),
            epoch: 1,
            instrument: false,
            pushed: Vec::new(),
            budget_factor: 64,
        };
        let marked = mark_program(e);
        d.root = d.build(e, &marked);
        let evs = d.expand(d.root, NIL);
        let mut last = d.anchor;
        for ev in evs {
            let el = d.om.insert_after(last).expect("live anchor");
            d.set_stamp(ev, el);
            last = el;
        }
        d.index_subtree(d.root);
        d
    }

    /// Builds nodes for `e`, seeding decorations from its marking.
    fn build(&mut self, e: &Expr, m: &MarkedProgram) -> NodeId {
        let kind = match e {
            Expr::Hole => Kind::Hole,
            Expr::Var(x) => Kind::Var(x.clone()),
            Expr::Lam(b, _, _) => Kind::Lam(b.clone()),
            Expr::Ap(..) => Kind::Ap,
            Expr::Asc(..) => Kind::Asc,
            Expr::Num(n) => Kind::Num(*n),
            Expr::Bool(b) => Kind::Bool(*b),
            Expr::Pair(..) => Kind::Pair,
            Expr::Fst(_) => Kind::Fst,
            Expr::Snd(_) => Kind::Snd,
            Expr::Nil => Kind::Nil,
            Expr::Cons(..) => Kind::Cons,
            Expr::Case { hd, tl, .. } => Kind::Case(hd.clone(), tl.clone()),
        };
        let id = self.alloc(kind);
        {
            let n = &mut self.nodes[id as usize];
            n.ana = m.ana.ty.clone();
            n.mark = m.mark;
            n.syn = m.syn.ty.clone();
            match &m.con {
                Con::Var { free, .. } => n.marks[0] = *free,
                Con::Lam { ann, non_arrow, dom, .. } => {
                    n.marks = [*non_arrow, *dom];
                    n.surface = ann.ty.clone();
                }
                Con::Asc { ty, .. } => n.surface = ty.ty.clone(),
                Con::Ap { mark, .. } | Con::Fst { mark, .. } | Con::Snd { mark, .. } => n.marks[0] = *mark,
                Con::Case { mark, scrut, .. } => {
                    n.marks[0] = *mark;
                    let (_, elem) = matched_list(&scrut.syn.ty);
                    n.bty = [elem.clone(), list_of(&elem)];
                }
                _ => {}
            }
        }
        let kids: Vec<&Expr> = e.children();
        let mkids = m.children();
        for (i, (k, mk)) in kids.into_iter().zip(mkids).enumerate() {
            let c = self.build(k, mk);
            self.link(id, i, c);
        }
        id
    }

    fn alloc(&mut self, kind: Kind) -> NodeId {
        let scope = if matches!(kind, Kind::Case(..)) { Some(Box::new([self.anchor; 4])) } else { None };
        let n = Node {
            kind,
            kids: [NIL; 3],
            parent: NIL,
            pos: 0,
            ana: None,
            mark: Mark::Ok,
            syn: Some(Type::Unknown),
            marks: [Mark::Ok; 2],
            surface: Type::Unknown,
            bty: [None, None],
            pre: self.anchor,
            post: self.anchor,
            scope,
            owner: None,
            ventry: crate::splay::NIL,
            deleted: false,
            seen: 0,
        };
        self.live += 1;
        if let Some(i) = self.free_nodes.pop() {
            self.nodes[i as usize] = n;
            i
        } else {
            self.nodes.push(n);
            (self.nodes.len() - 1) as NodeId
        }
    }

    fn link(&mut self, parent: NodeId, i: usize, child: NodeId) {
        self.nodes[parent as usize].kids[i] = child;
        let c = &mut self.nodes[child as usize];
        c.parent = parent;
        c.pos = i as u8;
    }

    fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id as usize]
    }

    fn kids(&self, id: NodeId) -> &[NodeId] {
        let n = self.node(id);
        &n.kids[..n.kind.arity()]
    }

    /// The layout of `id` with children as `Sub` placeholders.
    fn local_events(&self, id: NodeId) -> Vec<Ev> {
        let n = self.node(id);
        let mut out = vec![Ev::Pre(id)];
        for (i, &k) in self.kids(id).iter().enumerate() {
            if n.scope.is_some() && i == 2 {
                out.push(Ev::Scope(id, 0));
                out.push(Ev::Scope(id, 1));
                out.push(Ev::Sub(k));
                out.push(Ev::Scope(id, 2));
                out.push(Ev::Scope(id, 3));
            } else {
                out.push(Ev::Sub(k));
            }
        }
        out.push(Ev::Post(id));
        out
    }

    /// Full traversal layout of `id`, keeping `keep` as a single `Sub`.
    fn expand(&self, id: NodeId, keep: NodeId) -> Vec<Ev> {
        let mut out = Vec::new();
        let mut stack = vec![Ev::Sub(id)];
        while let Some(ev) = stack.pop() {
            match ev {
                Ev::Sub(n) if n != keep => stack.extend(self.local_events(n).into_iter().rev()),
                other => out.push(other),
            }
        }
        out
    }

    fn set_stamp(&mut self, ev: Ev, el: OmElem) {
        match ev {
            Ev::Pre(n) => self.node_mut(n).pre = el,
            Ev::Post(n) => self.node_mut(n).post = el,
            Ev::Scope(n, i) => self.node_mut(n).scope.as_mut().expect("case scope")[i] = el,
            Ev::Sub(_) => unreachable!("placeholders get no timestamp"),
        }
    }

    /// Timestamps a fresh wrapper `w` around its existing child `c`.
    fn place_wrapper(&mut self, w: NodeId, c: NodeId) {
        let evs = self.expand(w, c);
        let split = evs.iter().position(|e| matches!(e, Ev::Sub(x) if *x == c)).expect("wrapped child");
        let cpre = self.node(c).pre;
        for &ev in &evs[..split] {
            let el = self.om.insert_before(cpre).expect("live timestamp");
            self.set_stamp(ev, el);
        }
        let mut last = self.node(c).post;
        for &ev in &evs[split + 1..] {
            let el = self.om.insert_after(last).expect("live timestamp");
            self.set_stamp(ev, el);
            last = el;
        }
    }

    /// Registers binders, then binds occurrences, for a freshly loaded subtree.
    fn index_subtree(&mut self, top: NodeId) {
        let order = self.preorder(top);
        for &n in &order {
            self.register_binders(n);
        }
        for &n in &order {
            if matches!(self.node(n).kind, Kind::Var(_)) {
                self.bind(n);
            }
        }
    }

    fn preorder(&self, top: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![top];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.kids(n).iter().rev());
        }
        out
    }

    fn binder_scope(&self, key: BinderKey) -> (OmElem, OmElem) {
        let n = self.node(key.node);
        match (&n.scope, key.slot) {
            (None, _) => (n.pre, n.post),
            (Some(s), 0) => (s[0], s[3]),
            (Some(s), _) => (s[1], s[2]),
        }
    }

    fn binder_of(&self, key: BinderKey) -> &Binding {
        match (&self.node(key.node).kind, key.slot) {
            (Kind::Lam(b), _) | (Kind::Case(b, _), 0) => b,
            (Kind::Case(_, b), _) => b,
            _ => unreachable!("not a binder"),
        }
    }

    /// Registers the named binder `key`; returns captured occurrences.
    fn register(&mut self, key: BinderKey) -> Vec<NodeId> {
        let Binding::Name(x) = self.binder_of(key).clone() else { return Vec::new() };
        let (pre, post) = self.binder_scope(key);
        let captured = self.index.register(&self.om, key, &x, pre, post);
        for &v in &captured {
            self.node_mut(v).owner = Some(key);
        }
        captured
    }

    /// Unregisters `key` if registered; returns released occurrences.
    fn unregister(&mut self, key: BinderKey) -> Vec<NodeId> {
        if !self.index.is_registered(key) {
            return Vec::new();
        }
        let (outer, released) = self.index.unregister(&self.om, key);
        for &v in &released {
            self.node_mut(v).owner = outer;
        }
        released
    }

    fn register_binders(&mut self, n: NodeId) {
        match self.node(n).kind {
            Kind::Lam(_) => {
                self.register(BinderKey { node: n, slot: 0 });
            }
            Kind::Case(..) => {
                self.register(BinderKey { node: n, slot: 0 });
                self.register(BinderKey { node: n, slot: 1 });
            }
            _ => {}
        }
    }

    /// Unregisters all binders of `n`, innermost first.
    fn unregister_binders(&mut self, n: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        match self.node(n).kind {
            Kind::Lam(_) => out = self.unregister(BinderKey { node: n, slot: 0 }),
            Kind::Case(..) => {
                out = self.unregister(BinderKey { node: n, slot: 1 });
                out.extend(self.unregister(BinderKey { node: n, slot: 0 }));
                out.sort_unstable();
                out.dedup();
            }
            _ => {}
        }
        out
    }

    fn bind(&mut self, v: NodeId) {
        let Kind::Var(x) = &self.node(v).kind else { unreachable!("bind on a non-variable") };
        let x = x.clone();
        let (pre, post) = (self.node(v).pre, self.node(v).post);
        let (owner, entry) = self.index.bind_var(&self.om, &x, v, pre, post);
        let n = self.node_mut(v);
        n.owner = owner;
        n.ventry = entry;
    }

    fn unbind(&mut self, v: NodeId) {
        let n = self.node(v);
        let Kind::Var(x) = &n.kind else { return };
        if n.ventry == crate::splay::NIL {
            return;
        }
        let (x, owner, entry) = (x.clone(), n.owner, n.ventry);
        self.index.unbind_var(&self.om, &x, owner, entry);
        let n = self.node_mut(v);
        n.ventry = crate::splay::NIL;
        n.owner = None;
    }

    /// The mark and type an occurrence bound by `owner` takes.
    fn owner_info(&self, owner: Option<BinderKey>) -> (Mark, TypeOpt) {
        match owner {
            None => (Mark::Err, Some(Type::Unknown)),
            Some(k) => {
                let n = self.node(k.node);
                match n.kind {
                    Kind::Lam(_) => (Mark::Ok, Some(n.surface.clone())),
                    _ => (Mark::Ok, n.bty[k.slot as usize].clone()),
                }
            }
        }
    }

    /// Counts `n` once per stats epoch.
    fn touch(&mut self, n: NodeId) {
        let e = self.epoch;
        let node = &mut self.nodes[n as usize];
        if node.seen != e {
            node.seen = e;
            self.stats.visits += 1;
        }
    }

    fn key_of(&self, loc: DirtyLoc) -> OmElem {
        let n = self.node(loc.node);
        match loc.slot {
            SlotKind::Syn => n.post,
            _ => n.pre,
        }
    }

    /// Puts `loc` on the frontier (no-op if already there).
    fn dirty(&mut self, node: NodeId, slot: SlotKind) {
        let loc = DirtyLoc { node, slot };
        let key = self.key_of(loc);
        if self.frontier.push(&self.om, loc, key) {
            self.live_dirty += 1;
            if self.instrument {
                self.pushed.push(loc);
            }
        }
    }

    fn undirty(&mut self, loc: DirtyLoc) {
        if self.frontier.remove(&self.om, loc) && !self.node(loc.node).deleted {
            self.live_dirty -= 1;
        }
    }

    /// Tombstones the subtree at `top`, children before parents.
    fn retire_subtree(&mut self, top: NodeId) {
        let order = self.preorder(top);
        for n in order.into_iter().rev() {
            self.retire(n);
        }
    }

    fn retire(&mut self, n: NodeId) {
        self.touch(n);
        self.unbind(n);
        let released = self.unregister_binders(n);
        debug_assert!(released.is_empty(), "binder retired before its occurrences");
        self.drop_scope(n);
        let pending = self.frontier.count_for(n);
        self.live_dirty -= pending;
        self.live -= 1;
        let node = self.node_mut(n);
        node.deleted = true;
        node.kids = [NIL; 3];
        if pending == 0 {
            self.free(n);
        }
    }

    fn drop_scope(&mut self, n: NodeId) {
        if let Some(s) = self.node_mut(n).scope.take() {
            for el in s.iter() {
                self.om.delete(*el).expect("live scope timestamp");
            }
        }
    }

    fn free(&mut self, n: NodeId) {
        let (pre, post) = (self.node(n).pre, self.node(n).post);
        self.om.delete(pre).expect("live timestamp");
        self.om.delete(post).expect("live timestamp");
        self.free_nodes.push(n);
    }

    // ---- queries ----

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.live
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = Stats::default();
        self.epoch = self.epoch.wrapping_add(1).max(1);
    }

    /// When on, each [`StepReport`] lists the locations the step dirtied.
    pub fn set_instrumented(&mut self, on: bool) {
        self.instrument = on;
    }

    /// Frontier entries, tombstoned ones included.
    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    pub fn is_quiescent(&self) -> bool {
        self.live_dirty == 0
    }

    pub fn is_dirty(&self, loc: DirtyLoc) -> bool {
        !self.node(loc.node).deleted && self.frontier.contains(loc)
    }

    /// Live dirty locations in priority order.
    pub fn dirty_locs(&self) -> Vec<DirtyLoc> {
        let mut v: Vec<DirtyLoc> = self.frontier.locs().filter(|l| !self.node(l.node).deleted).collect();
        v.sort_by(|a, b| self.priority_cmp(*a, *b));
        v
    }

    /// Total order in which the frontier is processed.
    pub fn priority_cmp(&self, a: DirtyLoc, b: DirtyLoc) -> Ordering {
        self.om.cmp(self.key_of(a), self.key_of(b)).then(a.slot.cmp(&b.slot))
    }

    pub fn resolve_path(&self, path: &[Child]) -> Result<NodeId, ActionError> {
        let mut n = self.root;
        for c in path {
            n = *self
                .kids(n)
                .get(c.index())
                .ok_or_else(|| ActionError::PathInvalid(crate::action::print_path(path)))?;
        }
        Ok(n)
    }

    pub fn path_of(&self, mut n: NodeId) -> Vec<Child> {
        let mut out = Vec::new();
        while self.node(n).parent != NIL {
            out.push(Child::from_index(self.node(n).pos as usize).expect("child index"));
            n = self.node(n).parent;
        }
        out.reverse();
        out
    }

    pub fn is_live(&self, n: NodeId) -> bool {
        (n as usize) < self.nodes.len() && !self.node(n).deleted
    }

    pub fn apply(&mut self, a: &LocalizedAction) -> Result<(), EngineError> {
        let n = self.resolve_path(&a.path)?;
        self.apply_at(n, &a.action)
    }

    /// Runs steps until quiescent, draining tombstoned entries as well.
    pub fn run_to_quiescence(&mut self) -> Result<RunStats, EngineError> {
        let budget = self.budget_factor * (self.live as u64 + 16);
        let mut rs = RunStats::default();
        let before = self.stats.skipped;
        while let Some(_r) = self.step() {
            rs.steps += 1;
            if rs.steps > budget {
                return Err(EngineError::StepBudgetExceeded(budget));
            }
        }
        rs.skipped = self.stats.skipped - before;
        Ok(rs)
    }

    // ---- snapshots ----

    pub fn snapshot(&self) -> IncrProgram {
        self.snap(self.root)
    }

    fn bit(&self, n: NodeId, slot: SlotKind) -> DirtyBit {
        if self.frontier.contains(DirtyLoc { node: n, slot }) {
            DirtyBit::Dirty
        } else {
            DirtyBit::Clean
        }
    }

    fn snap(&self, id: NodeId) -> IncrProgram {
        let n = self.node(id);
        let kid = |i: usize| Box::new(self.snap(n.kids[i]));
        let surface = || Surface { ty: n.surface.clone(), dirty: self.bit(id, SlotKind::Surface) };
        let con = match &n.kind {
            Kind::Hole => Con::Hole,
            Kind::Var(x) => Con::Var { name: x.clone(), free: n.marks[0] },
            Kind::Lam(b) => Con::Lam { binder: b.clone(), ann: surface(), non_arrow: n.marks[0], dom: n.marks[1], body: kid(0) },
            Kind::Ap => Con::Ap { mark: n.marks[0], fun: kid(0), arg: kid(1) },
            Kind::Asc => Con::Asc { body: kid(0), ty: surface() },
            Kind::Num(v) => Con::Num(*v),
            Kind::Bool(v) => Con::Bool(*v),
            Kind::Pair => Con::Pair(kid(0), kid(1)),
            Kind::Fst => Con::Fst { mark: n.marks[0], e: kid(0) },
            Kind::Snd => Con::Snd { mark: n.marks[0], e: kid(0) },
            Kind::Nil => Con::Nil,
            Kind::Cons => Con::Cons(kid(0), kid(1)),
            Kind::Case(hd, tl) => Con::Case { mark: n.marks[0], scrut: kid(0), nil: kid(1), hd: hd.clone(), tl: tl.clone(), cons: kid(2) },
        };
        AnaExp {
            ana: Slot { ty: n.ana.clone(), dirty: self.bit(id, SlotKind::Ana) },
            mark: n.mark,
            syn: Slot { ty: n.syn.clone(), dirty: self.bit(id, SlotKind::Syn) },
            con,
        }
    }

    /// The bare expression, read directly from the tree.
    pub fn to_expr(&self) -> Expr {
        self.expr_at(self.root)
    }

    fn expr_at(&self, id: NodeId) -> Expr {
        let n = self.node(id);
        let kid = |i: usize| Box::new(self.expr_at(n.kids[i]));
        match &n.kind {
            Kind::Hole => Expr::Hole,
            Kind::Var(x) => Expr::Var(x.clone()),
            Kind::Lam(b) => Expr::Lam(b.clone(), n.surface.clone(), kid(0)),
            Kind::Ap => Expr::Ap(kid(0), kid(1)),
            Kind::Asc => Expr::Asc(kid(0), n.surface.clone()),
            Kind::Num(v) => Expr::Num(*v),
            Kind::Bool(v) => Expr::Bool(*v),
            Kind::Pair => Expr::Pair(kid(0), kid(1)),
            Kind::Fst => Expr::Fst(kid(0)),
            Kind::Snd => Expr::Snd(kid(0)),
            Kind::Nil => Expr::Nil,
            Kind::Cons => Expr::Cons(kid(0), kid(1)),
            Kind::Case(hd, tl) => Expr::Case { scrut: kid(0), nil: kid(1), hd: hd.clone(), tl: tl.clone(), cons: kid(2) },
        }
    }

    /// The top constructor of `id` with hole children, for applicability checks.
    fn shallow(&self, id: NodeId) -> Expr {
        let h = || Box::new(Expr::Hole);
        match &self.node(id).kind {
            Kind::Hole => Expr::Hole,
            Kind::Var(x) => Expr::Var(x.clone()),
            Kind::Lam(b) => Expr::Lam(b.clone(), Type::Unknown, h()),
            Kind::Ap => Expr::Ap(h(), h()),
            Kind::Asc => Expr::Asc(h(), Type::Unknown),
            Kind::Num(v) => Expr::Num(*v),
            Kind::Bool(v) => Expr::Bool(*v),
            Kind::Pair => Expr::Pair(h(), h()),
            Kind::Fst => Expr::Fst(h()),
            Kind::Snd => Expr::Snd(h()),
            Kind::Nil => Expr::Nil,
            Kind::Cons => Expr::Cons(h(), h()),
            Kind::Case(hd, tl) => Expr::Case { scrut: h(), nil: h(), hd: hd.clone(), tl: tl.clone(), cons: h() },
        }
    }

    // ---- internal consistency ----

    /// Checks tree links, timestamp nesting, frontier coherence and the
    /// binder index against naive lexical resolution.
    pub fn verify(&self) -> Result<(), String> {
        if self.node(self.root).parent != NIL {
            return Err("root has a parent".into());
        }
        if self.node(self.root).ana.is_some() || self.node(self.root).mark != Mark::Ok {
            return Err("root wrapper is not (none, ok)".into());
        }
        // Every timestamp in traversal order is strictly increasing.
        let evs = self.expand(self.root, NIL);
        let stamp = |ev: Ev| match ev {
            Ev::Pre(n) => self.node(n).pre,
            Ev::Post(n) => self.node(n).post,
            Ev::Scope(n, i) => self.node(n).scope.as_ref().expect("case scope")[i],
            Ev::Sub(_) => unreachable!(),
        };
        let mut prev: Option<OmElem> = None;
        for &ev in &evs {
            let el = stamp(ev);
            if !self.om.is_live(el) {
                return Err(format!("dead timestamp in {ev:?}"));
            }
            if let Some(p) = prev {
                if !self.om.lt(p, el) {
                    return Err(format!("timestamps out of traversal order at {ev:?}"));
                }
            }
            prev = Some(el);
        }
        let order = self.preorder(self.root);
        if order.len() != self.live {
            return Err(format!("live count {} but {} reachable", self.live, order.len()));
        }
        for &n in &order {
            let node = self.node(n);
            if node.deleted {
                return Err(format!("deleted node {n} reachable"));
            }
            for (i, &k) in self.kids(n).iter().enumerate() {
                if self.node(k).parent != n || self.node(k).pos as usize != i {
                    return Err(format!("broken parent link under {n}"));
                }
            }
        }
        self.frontier.check(&self.om)?;
        let live_entries = self.frontier.locs().filter(|l| !self.node(l.node).deleted).count();
        if live_entries != self.live_dirty {
            return Err("live dirty count out of sync".into());
        }
        for l in self.frontier.locs() {
            if l.slot == SlotKind::Surface && !self.node(l.node).deleted && !matches!(self.node(l.node).kind, Kind::Lam(_) | Kind::Asc) {
                return Err("surface entry on a node without a surface type".into());
            }
        }
        self.index.check(&self.om)?;
        self.verify_ownership()
    }

    fn verify_ownership(&self) -> Result<(), String> {
        let mut expected: HashMap<NodeId, Option<BinderKey>> = HashMap::new();
        let mut scopes: Vec<(String, BinderKey)> = Vec::new();
        let mut binders = 0;
        self.resolve_naive(self.root, &mut scopes, &mut expected, &mut binders)?;
        if binders != self.index.binder_count() {
            return Err(format!("{} named binders but {} registered", binders, self.index.binder_count()));
        }
        let recorded = self.index.ownership();
        if recorded.len() != expected.len() {
            return Err(format!("{} occurrences but {} indexed", expected.len(), recorded.len()));
        }
        for (v, owner) in recorded {
            match expected.get(&v) {
                Some(o) if *o == owner => {}
                _ => return Err(format!("occurrence {v} indexed under {owner:?}, expected {:?}", expected.get(&v))),
            }
            if self.node(v).owner != owner {
                return Err(format!("occurrence {v} back-link disagrees with index"));
            }
        }
        Ok(())
    }

    fn resolve_naive(
        &self,
        n: NodeId,
        scopes: &mut Vec<(String, BinderKey)>,
        out: &mut HashMap<NodeId, Option<BinderKey>>,
        binders: &mut usize,
    ) -> Result<(), String> {
        let node = self.node(n);
        let push = |b: &Binding, key: BinderKey, scopes: &mut Vec<(String, BinderKey)>, binders: &mut usize| {
            if let Binding::Name(x) = b {
                scopes.push((x.clone(), key));
                *binders += 1;
                true
            } else {
                false
            }
        };
        match &node.kind {
            Kind::Var(x) => {
                let o = scopes.iter().rev().find(|(y, _)| y == x).map(|(_, k)| *k);
                out.insert(n, o);
            }
            Kind::Lam(b) => {
                let pushed = push(b, BinderKey { node: n, slot: 0 }, scopes, binders);
                self.resolve_naive(node.kids[0], scopes, out, binders)?;
                if pushed {
                    scopes.pop();
                }
            }
            Kind::Case(hd, tl) => {
                self.resolve_naive(node.kids[0], scopes, out, binders)?;
                self.resolve_naive(node.kids[1], scopes, out, binders)?;
                let depth = scopes.len();
                push(hd, BinderKey { node: n, slot: 0 }, scopes, binders);
                push(tl, BinderKey { node: n, slot: 1 }, scopes, binders);
                self.resolve_naive(node.kids[2], scopes, out, binders)?;
                scopes.truncate(depth);
                if self.node(n).bty[1] != list_of(&self.node(n).bty[0]) {
                    return Err("case binder types disagree".into());
                }
            }
            _ => {
                for &k in self.kids(n) {
                    self.resolve_naive(k, scopes, out, binders)?;
                }
            }
        }
        Ok(())
    }
}

impl Clone for Doc {
    fn clone(&self) -> Doc {
        // OM handles are tied to their order's identity, so a deep copy is a
        // reload plus a replay of the frontier.
        let mut d = Doc::load(&self.to_expr());
        d.copy_decorations_from(self);
        d.budget_factor = self.budget_factor;
        d
    }
}

impl Doc {
    fn copy_decorations_from(&mut self, other: &Doc) {
        let mine = self.preorder(self.root);
        let theirs = other.preorder(other.root);
        let mut map = HashMap::new();
        for (&a, &b) in mine.iter().zip(&theirs) {
            map.insert(b, a);
            let src = other.node(b).clone();
            let dst = self.node_mut(a);
            dst.ana = src.ana;
            dst.mark = src.mark;
            dst.syn = src.syn;
            dst.marks = src.marks;
            dst.bty = src.bty;
        }
        for l in other.dirty_locs() {
            self.dirty(map[&l.node], l.slot);
        }
    }
}
