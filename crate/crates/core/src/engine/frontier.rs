//! The update propagation frontier: an indexed binary heap of dirty
//! locations ordered by timestamp, with O(1) membership.

use std::cmp::Ordering;

use crate::binder::NodeId;
use crate::om::{OmElem, OmOrder};

const NONE: u32 = u32::MAX;

/// Which stored type of a node is dirty. The discriminant breaks ties between
/// entries keyed by the same timestamp.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum SlotKind {
    Surface = 0,
    Ana = 1,
    Syn = 2,
}

impl SlotKind {
    pub fn name(self) -> &'static str {
        match self {
            SlotKind::Surface => "ty",
            SlotKind::Ana => "ana",
            SlotKind::Syn => "syn",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct DirtyLoc {
    pub node: NodeId,
    pub slot: SlotKind,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    loc: DirtyLoc,
    key: OmElem,
}

#[derive(Clone, Debug, Default)]
pub struct Frontier {
    heap: Vec<Entry>,
    pos: Vec<[u32; 3]>,
}

fn less(om: &OmOrder, a: &Entry, b: &Entry) -> bool {
    match om.cmp(a.key, b.key) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.loc.slot < b.loc.slot,
    }
}

impl Frontier {
    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn contains(&self, loc: DirtyLoc) -> bool {
        self.pos.get(loc.node as usize).is_some_and(|p| p[loc.slot as usize] != NONE)
    }

    /// Number of entries held for `node`.
    pub fn count_for(&self, node: NodeId) -> usize {
        self.pos.get(node as usize).map_or(0, |p| p.iter().filter(|&&x| x != NONE).count())
    }

    /// Adds `loc` keyed by `key`; returns false if it was already present.
    pub fn push(&mut self, om: &OmOrder, loc: DirtyLoc, key: OmElem) -> bool {
        if self.pos.len() <= loc.node as usize {
            self.pos.resize(loc.node as usize + 1, [NONE; 3]);
        }
        if self.contains(loc) {
            return false;
        }
        self.heap.push(Entry { loc, key });
        let i = self.heap.len() - 1;
        self.set_pos(i);
        self.sift_up(om, i);
        true
    }

    pub fn pop(&mut self, om: &OmOrder) -> Option<DirtyLoc> {
        let loc = self.heap.first()?.loc;
        self.remove(om, loc);
        Some(loc)
    }

    /// Removes `loc` if present.
    pub fn remove(&mut self, om: &OmOrder, loc: DirtyLoc) -> bool {
        if !self.contains(loc) {
            return false;
        }
        let i = self.pos[loc.node as usize][loc.slot as usize] as usize;
        self.pos[loc.node as usize][loc.slot as usize] = NONE;
        let last = self.heap.pop().expect("nonempty heap");
        if i < self.heap.len() {
            self.heap[i] = last;
            self.set_pos(i);
            self.sift_up(om, i);
            let j = self.pos[last.loc.node as usize][last.loc.slot as usize] as usize;
            self.sift_down(om, j);
        }
        true
    }

    pub fn locs(&self) -> impl Iterator<Item = DirtyLoc> + '_ {
        self.heap.iter().map(|e| e.loc)
    }

    fn set_pos(&mut self, i: usize) {
        let l = self.heap[i].loc;
        self.pos[l.node as usize][l.slot as usize] = i as u32;
    }

    fn sift_up(&mut self, om: &OmOrder, mut i: usize) {
        while i > 0 {
            let p = (i - 1) / 2;
            if less(om, &self.heap[i], &self.heap[p]) {
                self.heap.swap(i, p);
                self.set_pos(i);
                self.set_pos(p);
                i = p;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, om: &OmOrder, mut i: usize) {
        let n = self.heap.len();
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut m = i;
            if l < n && less(om, &self.heap[l], &self.heap[m]) {
                m = l;
            }
            if r < n && less(om, &self.heap[r], &self.heap[m]) {
                m = r;
            }
            if m == i {
                return;
            }
            self.heap.swap(i, m);
            self.set_pos(i);
            self.set_pos(m);
            i = m;
        }
    }

    /// Heap order and position map agree.
    pub fn check(&self, om: &OmOrder) -> Result<(), String> {
        for (i, e) in self.heap.iter().enumerate() {
            if self.pos[e.loc.node as usize][e.loc.slot as usize] != i as u32 {
                return Err(format!("position map out of sync at {i}"));
            }
            if i > 0 && less(om, e, &self.heap[(i - 1) / 2]) {
                return Err(format!("heap order violated at {i}"));
            }
        }
        let mapped = self.pos.iter().flatten().filter(|&&x| x != NONE).count();
        if mapped != self.heap.len() {
            return Err("stale position entries".into());
        }
        Ok(())
    }
}
