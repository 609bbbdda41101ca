//! Splay trees over timestamped entries, keyed by pre-order timestamp and
//! augmented with the maximum post-order timestamp of each subtree.
//!
//! All trees share one arena ([`SplayForest`]); a set is named by its root
//! index, with [`NIL`] for the empty set.

use std::cmp::Ordering;

use crate::om::{OmElem, OmOrder};

pub const NIL: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Entry {
    left: u32,
    right: u32,
    parent: u32,
    pre: OmElem,
    post: OmElem,
    maxp: OmElem,
    item: u64,
}

#[derive(Clone, Debug, Default)]
pub struct SplayForest {
    entries: Vec<Entry>,
    free: Vec<u32>,
}

impl SplayForest {
    pub fn new() -> SplayForest {
        SplayForest::default()
    }

    /// A detached single-entry tree.
    pub fn alloc(&mut self, pre: OmElem, post: OmElem, item: u64) -> u32 {
        let e = Entry { left: NIL, right: NIL, parent: NIL, pre, post, maxp: post, item };
        if let Some(i) = self.free.pop() {
            self.entries[i as usize] = e;
            i
        } else {
            self.entries.push(e);
            (self.entries.len() - 1) as u32
        }
    }

    /// Returns a detached entry's slot to the arena.
    pub fn release(&mut self, e: u32) {
        debug_assert!(self.is_detached(e));
        self.free.push(e);
    }

    fn is_detached(&self, e: u32) -> bool {
        let x = &self.entries[e as usize];
        x.left == NIL && x.right == NIL && x.parent == NIL
    }

    pub fn item(&self, e: u32) -> u64 {
        self.entries[e as usize].item
    }

    pub fn pre(&self, e: u32) -> OmElem {
        self.entries[e as usize].pre
    }

    pub fn post(&self, e: u32) -> OmElem {
        self.entries[e as usize].post
    }

    pub fn set_keys(&mut self, e: u32, pre: OmElem, post: OmElem) {
        debug_assert!(self.is_detached(e));
        let x = &mut self.entries[e as usize];
        x.pre = pre;
        x.post = post;
        x.maxp = post;
    }

    fn update(&mut self, e: u32, om: &OmOrder) {
        let (l, r, mut m) = {
            let x = &self.entries[e as usize];
            (x.left, x.right, x.post)
        };
        for c in [l, r] {
            if c != NIL {
                let cm = self.entries[c as usize].maxp;
                if om.lt(m, cm) {
                    m = cm;
                }
            }
        }
        self.entries[e as usize].maxp = m;
    }

    fn rotate(&mut self, x: u32, om: &OmOrder) {
        let p = self.entries[x as usize].parent;
        let g = self.entries[p as usize].parent;
        if self.entries[p as usize].left == x {
            let b = self.entries[x as usize].right;
            self.entries[p as usize].left = b;
            if b != NIL {
                self.entries[b as usize].parent = p;
            }
            self.entries[x as usize].right = p;
        } else {
            let b = self.entries[x as usize].left;
            self.entries[p as usize].right = b;
            if b != NIL {
                self.entries[b as usize].parent = p;
            }
            self.entries[x as usize].left = p;
        }
        self.entries[p as usize].parent = x;
        self.entries[x as usize].parent = g;
        if g != NIL {
            if self.entries[g as usize].left == p {
                self.entries[g as usize].left = x;
            } else {
                self.entries[g as usize].right = x;
            }
        }
        self.update(p, om);
        self.update(x, om);
    }

    /// Splays `x` to the root of its tree.
    pub fn splay(&mut self, x: u32, om: &OmOrder) {
        loop {
            let p = self.entries[x as usize].parent;
            if p == NIL {
                return;
            }
            let g = self.entries[p as usize].parent;
            if g != NIL {
                let zigzig = (self.entries[g as usize].left == p) == (self.entries[p as usize].left == x);
                if zigzig {
                    self.rotate(p, om);
                } else {
                    self.rotate(x, om);
                }
            }
            self.rotate(x, om);
        }
    }

    pub fn root_of(&self, mut e: u32) -> u32 {
        while self.entries[e as usize].parent != NIL {
            e = self.entries[e as usize].parent;
        }
        e
    }

    /// Splits into entries with `pre < key` and entries with `pre >= key`.
    pub fn split(&mut self, root: u32, key: OmElem, om: &OmOrder) -> (u32, u32) {
        if root == NIL {
            return (NIL, NIL);
        }
        // Find the smallest entry with pre >= key, remembering the last visited.
        let (mut n, mut succ, mut last) = (root, NIL, root);
        while n != NIL {
            last = n;
            if om.cmp(self.entries[n as usize].pre, key) == Ordering::Less {
                n = self.entries[n as usize].right;
            } else {
                succ = n;
                n = self.entries[n as usize].left;
            }
        }
        if succ == NIL {
            self.splay(last, om);
            return (last, NIL);
        }
        self.splay(succ, om);
        let l = self.entries[succ as usize].left;
        if l != NIL {
            self.entries[l as usize].parent = NIL;
            self.entries[succ as usize].left = NIL;
            self.update(succ, om);
        }
        (l, succ)
    }

    /// Concatenates two trees; every key in `l` must precede every key in `r`.
    pub fn join(&mut self, l: u32, r: u32, om: &OmOrder) -> u32 {
        if l == NIL {
            return r;
        }
        if r == NIL {
            return l;
        }
        let mut m = l;
        while self.entries[m as usize].right != NIL {
            m = self.entries[m as usize].right;
        }
        self.splay(m, om);
        debug_assert!(om.lt(self.entries[m as usize].pre, self.min_pre(r)), "join order violation");
        self.entries[m as usize].right = r;
        self.entries[r as usize].parent = m;
        self.update(m, om);
        m
    }

    fn min_pre(&self, mut r: u32) -> OmElem {
        while self.entries[r as usize].left != NIL {
            r = self.entries[r as usize].left;
        }
        self.entries[r as usize].pre
    }

    pub fn insert(&mut self, root: u32, e: u32, om: &OmOrder) -> u32 {
        let (l, r) = self.split(root, self.entries[e as usize].pre, om);
        let m = self.join(l, e, om);
        self.join(m, r, om)
    }

    /// Detaches `e` from its tree and returns the new root of the remainder.
    pub fn remove(&mut self, e: u32, om: &OmOrder) -> u32 {
        self.splay(e, om);
        let (l, r) = (self.entries[e as usize].left, self.entries[e as usize].right);
        for c in [l, r] {
            if c != NIL {
                self.entries[c as usize].parent = NIL;
            }
        }
        let x = &mut self.entries[e as usize];
        x.left = NIL;
        x.right = NIL;
        x.maxp = x.post;
        self.join(l, r, om)
    }

    /// In-order entries.
    pub fn entries_of(&self, root: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut n = root;
        while n != NIL || !stack.is_empty() {
            while n != NIL {
                stack.push(n);
                n = self.entries[n as usize].left;
            }
            let x = stack.pop().expect("nonempty");
            out.push(x);
            n = self.entries[x as usize].right;
        }
        out
    }

    /// The entry with the largest pre below `at_pre` whose post exceeds
    /// `at_post`, splayed to the root. Entries must form a laminar family of
    /// intervals. Returns the new root and the entry found.
    pub fn lowest_containing(&mut self, root: u32, at_pre: OmElem, at_post: OmElem, om: &OmOrder) -> (u32, Option<u32>) {
        let (l, r) = self.split(root, at_pre, om);
        // Within `l`, an interval that does not contain `at` ends before it,
        // so the subtree maximum prunes exactly.
        let mut found = None;
        let mut n = l;
        while n != NIL {
            let x = &self.entries[n as usize];
            if x.right != NIL && om.lt(at_post, self.entries[x.right as usize].maxp) {
                n = x.right;
            } else if om.lt(at_post, x.post) {
                found = Some(n);
                break;
            } else if x.left != NIL && om.lt(at_post, self.entries[x.left as usize].maxp) {
                n = x.left;
            } else {
                break;
            }
        }
        let mut root = self.join(l, r, om);
        if let Some(f) = found {
            self.splay(f, om);
            root = f;
        }
        (root, found)
    }

    /// Checks BST order, parent links and the subtree maxima by brute force.
    pub fn check(&self, root: u32, om: &OmOrder) -> Result<(), String> {
        if root == NIL {
            return Ok(());
        }
        if self.entries[root as usize].parent != NIL {
            return Err("root has a parent".into());
        }
        let order = self.entries_of(root);
        for w in order.windows(2) {
            if !om.lt(self.entries[w[0] as usize].pre, self.entries[w[1] as usize].pre) {
                return Err("keys out of order".into());
            }
        }
        for &n in &order {
            let x = &self.entries[n as usize];
            for c in [x.left, x.right] {
                if c != NIL && self.entries[c as usize].parent != n {
                    return Err("broken parent link".into());
                }
            }
            let mut m = x.post;
            for s in self.entries_of(n) {
                let p = self.entries[s as usize].post;
                if om.lt(m, p) {
                    m = p;
                }
            }
            if m != x.maxp {
                return Err("stale subtree maximum".into());
            }
        }
        Ok(())
    }
}
