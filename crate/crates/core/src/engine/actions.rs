//! Action performance. Every action dirties the analyzed type of the
//! position it targets; binding changes are applied atomically.

use super::{Doc, EngineError, Kind, NodeId, SlotKind, NIL};
use crate::action::{check_applicable, SimpleAction};
use crate::binder::BinderKey;
use crate::side::{list_of, matched_list};
use crate::syntax::{Binding, Child, Mark, Type, TypeOpt};

fn unknown() -> TypeOpt {
    Some(Type::Unknown)
}

impl Doc {
    /// Performs `a` on node `n`. On error the document is unchanged.
    pub fn apply_at(&mut self, n: NodeId, a: &SimpleAction) -> Result<(), EngineError> {
        check_applicable(&self.shallow(n), a)?;
        use SimpleAction::*;
        self.touch(n);
        let top = match a {
            InsertVar(x) => {
                self.node_mut(n).kind = Kind::Var(x.clone());
                self.bind(n);
                let (m, t) = self.owner_info(self.node(n).owner);
                self.node_mut(n).marks[0] = m;
                self.force_syn(n, t);
                n
            }
            InsertNum(v) => self.insert_literal(n, Kind::Num(*v), Type::Num),
            InsertBool(v) => self.insert_literal(n, Kind::Bool(*v), Type::Bool),
            InsertNil => self.insert_literal(n, Kind::Nil, Type::list(Type::Unknown)),
            WrapFun => {
                let w = self.wrap(n, Kind::Lam(Binding::Hole), 0);
                self.node_mut(w).marks = [Mark::Ok, Mark::Ok];
                self.force_ana(n, None);
                self.force_syn(w, None);
                w
            }
            WrapAsc => {
                let w = self.wrap(n, Kind::Asc, 0);
                self.force_ana(n, unknown());
                self.force_syn(w, unknown());
                w
            }
            WrapAp(Child::One) => {
                let w = self.wrap(n, Kind::Ap, 0);
                self.force_ana(n, None);
                self.dirty(n, SlotKind::Syn);
                self.force_syn(w, None);
                w
            }
            WrapAp(_) => {
                let w = self.wrap(n, Kind::Ap, 1);
                self.force_ana(n, unknown());
                self.dirty(n, SlotKind::Syn);
                self.force_syn(w, unknown());
                w
            }
            WrapPair(c) => {
                let w = self.wrap(n, Kind::Pair, c.index());
                self.force_ana(n, None);
                self.dirty(n, SlotKind::Syn);
                self.force_syn(w, None);
                w
            }
            WrapFst | WrapSnd => {
                let w = self.wrap(n, if *a == WrapFst { Kind::Fst } else { Kind::Snd }, 0);
                self.force_ana(n, None);
                self.dirty(n, SlotKind::Syn);
                self.force_syn(w, None);
                w
            }
            WrapCons(Child::One) => {
                let w = self.wrap(n, Kind::Cons, 0);
                self.force_ana(n, None);
                self.dirty(n, SlotKind::Syn);
                self.force_syn(w, None);
                w
            }
            WrapCons(_) => {
                let w = self.wrap(n, Kind::Cons, 1);
                let lt = Some(Type::list(Type::Unknown));
                self.force_ana(n, lt.clone());
                self.dirty(n, SlotKind::Syn);
                self.force_syn(w, lt);
                w
            }
            WrapCase(c) => self.wrap_case(n, *c),
            Delete => {
                self.delete(n);
                n
            }
            Unwrap(c) => self.unwrap(n, c.index()),
            SetAnn(t) | SetAsc(t) => {
                self.node_mut(n).surface = t.clone();
                self.dirty(n, SlotKind::Surface);
                n
            }
            InsertBinder(b) => {
                match &mut self.node_mut(n).kind {
                    Kind::Lam(x) | Kind::Case(x, _) => *x = b.clone(),
                    _ => unreachable!("checked applicable"),
                }
                let captured = self.register(BinderKey { node: n, slot: 0 });
                self.rebind_forced(&captured);
                self.dirty_binder_body(n);
                n
            }
            InsertTlBinder(b) => {
                if let Kind::Case(_, x) = &mut self.node_mut(n).kind {
                    *x = b.clone();
                }
                let captured = self.register(BinderKey { node: n, slot: 1 });
                self.rebind_forced(&captured);
                self.dirty_binder_body(n);
                n
            }
            DeleteBinder => {
                let released = self.unregister(BinderKey { node: n, slot: 0 });
                match &mut self.node_mut(n).kind {
                    Kind::Lam(x) | Kind::Case(x, _) => *x = Binding::Hole,
                    _ => unreachable!("checked applicable"),
                }
                self.rebind_forced(&released);
                self.dirty_binder_body(n);
                n
            }
            DeleteTlBinder => {
                let released = self.unregister(BinderKey { node: n, slot: 1 });
                if let Kind::Case(_, x) = &mut self.node_mut(n).kind {
                    *x = Binding::Hole;
                }
                self.rebind_forced(&released);
                self.dirty_binder_body(n);
                n
            }
        };
        // The position's analyzed type is always dirtied.
        self.dirty(top, SlotKind::Ana);
        Ok(())
    }

    fn force_ana(&mut self, n: NodeId, t: TypeOpt) {
        self.touch(n);
        let node = self.node_mut(n);
        node.ana = t;
        node.mark = Mark::Ok;
        self.dirty(n, SlotKind::Ana);
    }

    fn force_syn(&mut self, n: NodeId, t: TypeOpt) {
        self.touch(n);
        self.node_mut(n).syn = t;
        self.dirty(n, SlotKind::Syn);
    }

    fn insert_literal(&mut self, n: NodeId, kind: Kind, t: Type) -> NodeId {
        self.node_mut(n).kind = kind;
        self.force_syn(n, Some(t));
        n
    }

    /// Updates each occurrence to its owner's mark and type, always dirtying.
    fn rebind_forced(&mut self, vars: &[NodeId]) {
        for &v in vars {
            self.touch(v);
            let (m, t) = self.owner_info(self.node(v).owner);
            self.node_mut(v).marks[0] = m;
            self.force_syn(v, t);
        }
    }

    /// The synthesized type of the body a binder scopes over.
    fn dirty_binder_body(&mut self, n: NodeId) {
        let body = match self.node(n).kind {
            Kind::Lam(_) => self.node(n).kids[0],
            _ => self.node(n).kids[2],
        };
        self.dirty(body, SlotKind::Syn);
    }

    /// Replaces `n`'s position with a fresh wrapper of `kind` holding `n` as
    /// child `cpos`; other children are clean holes.
    fn wrap(&mut self, n: NodeId, kind: Kind, cpos: usize) -> NodeId {
        let arity = kind.arity();
        let w = self.alloc(kind);
        let (parent, pos) = (self.node(n).parent, self.node(n).pos);
        if parent == NIL {
            self.root = w;
        } else {
            self.link(parent, pos as usize, w);
        }
        let (ana, mark) = (self.node(n).ana.clone(), self.node(n).mark);
        {
            let wn = self.node_mut(w);
            wn.ana = ana;
            wn.mark = mark;
            wn.syn = None;
        }
        for i in 0..arity {
            if i == cpos {
                self.link(w, i, n);
            } else {
                let h = self.alloc(Kind::Hole);
                self.link(w, i, h);
            }
        }
        self.place_wrapper(w, n);
        self.touch(w);
        w
    }

    fn wrap_case(&mut self, n: NodeId, c: Child) -> NodeId {
        let w = self.wrap(n, Kind::Case(Binding::Hole, Binding::Hole), c.index());
        let kids = self.node(w).kids;
        let lt = |t: &TypeOpt| list_of(t);
        match c {
            Child::One => {
                let (_, elem) = matched_list(&self.node(n).syn);
                self.node_mut(w).bty = [elem.clone(), lt(&elem)];
                self.force_ana(n, None);
                self.dirty(n, SlotKind::Syn);
                self.node_mut(kids[2]).ana = unknown();
                self.force_syn(w, unknown());
            }
            Child::Two => {
                self.node_mut(w).bty = [unknown(), lt(&unknown())];
                self.force_ana(n, None);
                self.dirty(n, SlotKind::Syn);
                self.force_syn(w, None);
            }
            Child::Three => {
                self.node_mut(w).bty = [unknown(), lt(&unknown())];
                self.force_ana(n, unknown());
                self.dirty(n, SlotKind::Syn);
                self.force_syn(w, unknown());
            }
        }
        w
    }

    fn delete(&mut self, n: NodeId) {
        let kids: Vec<NodeId> = self.kids(n).to_vec();
        for k in kids {
            self.retire_subtree(k);
        }
        let released = self.unregister_binders(n);
        debug_assert!(released.is_empty());
        self.unbind(n);
        self.drop_scope(n);
        self.undirty(super::DirtyLoc { node: n, slot: SlotKind::Surface });
        let node = self.node_mut(n);
        node.kind = Kind::Hole;
        node.kids = [NIL; 3];
        node.marks = [Mark::Ok; 2];
        node.surface = Type::Unknown;
        node.bty = [None, None];
        self.force_syn(n, unknown());
    }

    /// Keeps child `c` of `n` in `n`'s position and discards the rest.
    fn unwrap(&mut self, n: NodeId, c: usize) -> NodeId {
        let kids: Vec<NodeId> = self.kids(n).to_vec();
        let k = kids[c];
        for (i, &o) in kids.iter().enumerate() {
            if i != c {
                self.retire_subtree(o);
            }
        }
        let released = self.unregister_binders(n);
        self.rebind_forced(&released);
        let (parent, pos) = (self.node(n).parent, self.node(n).pos);
        if parent == NIL {
            self.root = k;
            let kn = self.node_mut(k);
            kn.parent = NIL;
            kn.pos = 0;
        } else {
            self.link(parent, pos as usize, k);
        }
        let (ana, mark) = (self.node(n).ana.clone(), self.node(n).mark);
        {
            let kn = self.node_mut(k);
            kn.ana = ana;
            kn.mark = mark;
        }
        self.dirty(k, SlotKind::Syn);
        self.node_mut(n).kids = [NIL; 3];
        self.retire(n);
        k
    }
}
