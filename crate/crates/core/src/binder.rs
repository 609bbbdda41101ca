//! Scope index: which binder owns each variable occurrence.
//!
//! Per name, the binders for that name sit in one splay tree keyed by scope
//! start; each binder owns a splay tree of its bound occurrences. Occurrences
//! bound by nothing sit in a per-name free set at the root. Scope intervals
//! are order-maintenance timestamps, so containment is interval containment.

use std::collections::HashMap;

use crate::om::{OmElem, OmOrder};
use crate::splay::{SplayForest, NIL};

pub type NodeId = u32;

/// A binding site: a node plus which of its binders (Case has two).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct BinderKey {
    pub node: NodeId,
    pub slot: u8,
}

impl BinderKey {
    fn encode(self) -> u64 {
        ((self.node as u64) << 8) | self.slot as u64
    }

    fn decode(x: u64) -> BinderKey {
        BinderKey { node: (x >> 8) as u32, slot: (x & 0xff) as u8 }
    }
}

#[derive(Clone, Debug)]
struct BinderRec {
    name: String,
    entry: u32,
    vars: u32,
}

#[derive(Clone, Debug, Default)]
pub struct BinderIndex {
    forest: SplayForest,
    binders: HashMap<String, u32>,
    free: HashMap<String, u32>,
    recs: HashMap<BinderKey, BinderRec>,
}

impl BinderIndex {
    pub fn new() -> BinderIndex {
        BinderIndex::default()
    }

    pub fn is_registered(&self, key: BinderKey) -> bool {
        self.recs.contains_key(&key)
    }

    pub fn binder_count(&self) -> usize {
        self.recs.len()
    }

    fn set_root(&self, name: &str, owner: Option<BinderKey>) -> u32 {
        match owner {
            None => self.free.get(name).copied().unwrap_or(NIL),
            Some(k) => self.recs[&k].vars,
        }
    }

    fn put_root(&mut self, name: &str, owner: Option<BinderKey>, root: u32) {
        match owner {
            None => match self.free.get_mut(name) {
                Some(r) => *r = root,
                None => {
                    self.free.insert(name.to_string(), root);
                }
            },
            Some(k) => self.recs.get_mut(&k).expect("registered binder").vars = root,
        }
    }

    /// The innermost registered binder for `name` whose scope contains `(pre, post)`.
    pub fn resolve(&mut self, om: &OmOrder, name: &str, pre: OmElem, post: OmElem) -> Option<BinderKey> {
        let root = *self.binders.get(name)?;
        let (root, hit) = self.forest.lowest_containing(root, pre, post, om);
        self.binders.insert(name.to_string(), root);
        hit.map(|e| BinderKey::decode(self.forest.item(e)))
    }

    /// Adds an occurrence; returns its owner and its entry handle.
    pub fn bind_var(&mut self, om: &OmOrder, name: &str, node: NodeId, pre: OmElem, post: OmElem) -> (Option<BinderKey>, u32) {
        let owner = self.resolve(om, name, pre, post);
        let e = self.forest.alloc(pre, post, node as u64);
        let root = self.set_root(name, owner);
        let root = self.forest.insert(root, e, om);
        self.put_root(name, owner, root);
        (owner, e)
    }

    pub fn unbind_var(&mut self, om: &OmOrder, name: &str, owner: Option<BinderKey>, entry: u32) {
        let root = self.forest.remove(entry, om);
        self.put_root(name, owner, root);
        self.forest.release(entry);
    }

    /// Registers a binder for `name` over the scope `(pre, post)`; returns the
    /// occurrences it captures from the enclosing owner.
    pub fn register(&mut self, om: &OmOrder, key: BinderKey, name: &str, pre: OmElem, post: OmElem) -> Vec<NodeId> {
        debug_assert!(!self.recs.contains_key(&key));
        let outer = self.resolve(om, name, pre, post);
        let s = self.set_root(name, outer);
        let (a, rest) = self.forest.split(s, pre, om);
        let (mid, c) = self.forest.split(rest, post, om);
        let joined = self.forest.join(a, c, om);
        self.put_root(name, outer, joined);
        let entry = self.forest.alloc(pre, post, key.encode());
        let broot = self.binders.get(name).copied().unwrap_or(NIL);
        let broot = self.forest.insert(broot, entry, om);
        self.binders.insert(name.to_string(), broot);
        self.recs.insert(key, BinderRec { name: name.to_string(), entry, vars: mid });
        self.items(mid)
    }

    /// Unregisters a binder; its occurrences move to the enclosing owner,
    /// which is returned along with them.
    pub fn unregister(&mut self, om: &OmOrder, key: BinderKey) -> (Option<BinderKey>, Vec<NodeId>) {
        let rec = self.recs.remove(&key).expect("registered binder");
        let (pre, post) = (self.forest.pre(rec.entry), self.forest.post(rec.entry));
        let broot = self.forest.remove(rec.entry, om);
        self.forest.release(rec.entry);
        self.binders.insert(rec.name.clone(), broot);
        let outer = self.resolve(om, &rec.name, pre, post);
        let released = self.items(rec.vars);
        let s = self.set_root(&rec.name, outer);
        let (a, c) = self.forest.split(s, pre, om);
        let m = self.forest.join(a, rec.vars, om);
        let joined = self.forest.join(m, c, om);
        self.put_root(&rec.name, outer, joined);
        (outer, released)
    }

    pub fn binder_name(&self, key: BinderKey) -> Option<&str> {
        self.recs.get(&key).map(|r| r.name.as_str())
    }

    /// Occurrences bound by `key`, in program order.
    pub fn vars_of(&self, key: BinderKey) -> Vec<NodeId> {
        match self.recs.get(&key) {
            Some(r) => self.items(r.vars),
            None => Vec::new(),
        }
    }

    pub fn free_vars(&self, name: &str) -> Vec<NodeId> {
        self.items(self.free.get(name).copied().unwrap_or(NIL))
    }

    fn items(&self, root: u32) -> Vec<NodeId> {
        self.forest.entries_of(root).into_iter().map(|e| self.forest.item(e) as NodeId).collect()
    }

    /// All (occurrence, owner) pairs recorded in the index.
    pub fn ownership(&self) -> Vec<(NodeId, Option<BinderKey>)> {
        let mut out = Vec::new();
        for &r in self.free.values() {
            out.extend(self.items(r).into_iter().map(|v| (v, None)));
        }
        for (k, rec) in &self.recs {
            out.extend(self.items(rec.vars).into_iter().map(|v| (v, Some(*k))));
        }
        out
    }

    /// Brute-force structural check of every tree.
    pub fn check(&self, om: &OmOrder) -> Result<(), String> {
        for (name, &r) in &self.binders {
            self.forest.check(r, om).map_err(|e| format!("binders of {name}: {e}"))?;
            for e in self.forest.entries_of(r) {
                let k = BinderKey::decode(self.forest.item(e));
                match self.recs.get(&k) {
                    Some(rec) if rec.entry == e && &rec.name == name => {}
                    _ => return Err(format!("binder entry for {name} has no matching record")),
                }
            }
        }
        for (name, &r) in &self.free {
            self.forest.check(r, om).map_err(|e| format!("free {name}: {e}"))?;
        }
        for (k, rec) in &self.recs {
            self.forest.check(rec.vars, om).map_err(|e| format!("vars of {k:?}: {e}"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::om::om_create;

    #[test]
    fn capture_and_release() {
        // lam x [ v1 lam x [ v2 ] v3 ]  with v0 outside
        let (mut om, s) = om_create();
        let mut t = vec![s];
        for _ in 0..12 {
            let n = om.insert_after(*t.last().unwrap()).unwrap();
            t.push(n);
        }
        // v0 = (1,2); outer = (3,12); v1 = (4,5); inner = (6,9); v2 = (7,8); v3 = (10,11)
        let mut ix = BinderIndex::new();
        let (o0, _) = ix.bind_var(&om, "x", 100, t[1], t[2]);
        let (o1, _) = ix.bind_var(&om, "x", 101, t[4], t[5]);
        let (_, e2) = ix.bind_var(&om, "x", 102, t[7], t[8]);
        let (o3, _) = ix.bind_var(&om, "x", 103, t[10], t[11]);
        assert_eq!((o0, o1, o3), (None, None, None));
        let outer = BinderKey { node: 1, slot: 0 };
        let inner = BinderKey { node: 2, slot: 0 };
        assert_eq!(ix.register(&om, inner, "x", t[6], t[9]), vec![102]);
        assert_eq!(ix.register(&om, outer, "x", t[3], t[12]), vec![101, 103]);
        assert_eq!(ix.free_vars("x"), vec![100]);
        assert_eq!(ix.vars_of(inner), vec![102]);
        ix.check(&om).unwrap();
        assert_eq!(ix.unregister(&om, inner), (Some(outer), vec![102]));
        assert_eq!(ix.vars_of(outer), vec![101, 102, 103]);
        ix.unbind_var(&om, "x", Some(outer), e2);
        assert_eq!(ix.unregister(&om, outer), (None, vec![101, 103]));
        assert_eq!(ix.free_vars("x"), vec![100, 101, 103]);
        ix.check(&om).unwrap();
    }
}
