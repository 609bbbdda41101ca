//! Order maintenance: a totally ordered set of elements with O(1) amortized
//! insertion next to an existing element and O(1) comparison.
//!
//! Two-level list labeling after Bender et al. Elements live in buckets of
//! at most [`BUCKET_CAP`] elements, each with a 64-bit local tag. Buckets
//! form a linked list with 64-bit tags. A full bucket splits; when two
//! adjacent bucket tags leave no gap, the smallest enclosing aligned tag
//! range whose density is below `T^-i` is relabeled evenly.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use thiserror::Error;

pub const BUCKET_CAP: u32 = 62;
const NIL: u32 = u32::MAX;
const DENSITY_BASE: f64 = 1.5;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum OmError {
    #[error("element has been deleted")]
    DeadElement,
    #[error("elements belong to different orders")]
    OrderMismatch,
}

/// Handle to an element. Stale handles are detected by generation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct OmElem {
    order: u32,
    idx: u32,
    gen: u32,
}

#[derive(Clone, Debug)]
struct Elem {
    bucket: u32,
    tag: u64,
    prev: u32,
    next: u32,
    gen: u32,
    live: bool,
}

#[derive(Clone, Debug)]
struct Bucket {
    tag: u64,
    prev: u32,
    next: u32,
    first: u32,
    last: u32,
    len: u32,
}

#[derive(Clone, Debug)]
pub struct OmOrder {
    id: u32,
    elems: Vec<Elem>,
    free_elems: Vec<u32>,
    buckets: Vec<Bucket>,
    free_buckets: Vec<u32>,
    live: usize,
    relabels: u64,
    rewrites: u64,
}

static NEXT_ORDER: AtomicU32 = AtomicU32::new(1);

/// Creates an order holding exactly one element.
pub fn om_create() -> (OmOrder, OmElem) {
    let id = NEXT_ORDER.fetch_add(1, AtomicOrdering::Relaxed);
    let mut o = OmOrder {
        id,
        elems: Vec::new(),
        free_elems: Vec::new(),
        buckets: vec![Bucket { tag: 1 << 63, prev: NIL, next: NIL, first: NIL, last: NIL, len: 0 }],
        free_buckets: Vec::new(),
        live: 0,
        relabels: 0,
        rewrites: 0,
    };
    let e = o.alloc_elem(0, 1 << 63);
    o.link_elem(0, e, NIL);
    let h = o.handle(e);
    (o, h)
}

impl OmOrder {
    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Number of bucket or range relabelings performed so far.
    pub fn relabel_count(&self) -> u64 {
        self.relabels
    }

    /// Tags rewritten by relabelings so far, elements and buckets alike.
    pub fn rewrite_count(&self) -> u64 {
        self.rewrites
    }

    fn handle(&self, idx: u32) -> OmElem {
        OmElem { order: self.id, idx, gen: self.elems[idx as usize].gen }
    }

    fn resolve(&self, e: OmElem) -> Result<u32, OmError> {
        if e.order != self.id {
            return Err(OmError::OrderMismatch);
        }
        match self.elems.get(e.idx as usize) {
            Some(x) if x.live && x.gen == e.gen => Ok(e.idx),
            _ => Err(OmError::DeadElement),
        }
    }

    pub fn is_live(&self, e: OmElem) -> bool {
        self.resolve(e).is_ok()
    }

    fn alloc_elem(&mut self, bucket: u32, tag: u64) -> u32 {
        self.live += 1;
        if let Some(i) = self.free_elems.pop() {
            let x = &mut self.elems[i as usize];
            x.bucket = bucket;
            x.tag = tag;
            x.live = true;
            x.prev = NIL;
            x.next = NIL;
            i
        } else {
            self.elems.push(Elem { bucket, tag, prev: NIL, next: NIL, gen: 0, live: true });
            (self.elems.len() - 1) as u32
        }
    }

    /// Links `e` into bucket `b` right after `after` (`NIL` = at the front).
    fn link_elem(&mut self, b: u32, e: u32, after: u32) {
        let next = if after == NIL { self.buckets[b as usize].first } else { self.elems[after as usize].next };
        {
            let x = &mut self.elems[e as usize];
            x.bucket = b;
            x.prev = after;
            x.next = next;
        }
        if after == NIL {
            self.buckets[b as usize].first = e;
        } else {
            self.elems[after as usize].next = e;
        }
        if next == NIL {
            self.buckets[b as usize].last = e;
        } else {
            self.elems[next as usize].prev = e;
        }
        self.buckets[b as usize].len += 1;
    }

    fn unlink_elem(&mut self, e: u32) {
        let (b, prev, next) = {
            let x = &self.elems[e as usize];
            (x.bucket, x.prev, x.next)
        };
        if prev == NIL {
            self.buckets[b as usize].first = next;
        } else {
            self.elems[prev as usize].next = next;
        }
        if next == NIL {
            self.buckets[b as usize].last = prev;
        } else {
            self.elems[next as usize].prev = prev;
        }
        self.buckets[b as usize].len -= 1;
    }

    pub fn insert_after(&mut self, e: OmElem) -> Result<OmElem, OmError> {
        let i = self.resolve(e)?;
        let b = self.elems[i as usize].bucket;
        Ok(self.insert_in_bucket(b, i))
    }

    pub fn insert_before(&mut self, e: OmElem) -> Result<OmElem, OmError> {
        let i = self.resolve(e)?;
        let x = &self.elems[i as usize];
        let (b, prev) = (x.bucket, x.prev);
        Ok(self.insert_in_bucket(b, prev))
    }

    /// Inserts a new element into bucket `b` after `after` (`NIL` = front).
    fn insert_in_bucket(&mut self, mut b: u32, after: u32) -> OmElem {
        loop {
            let lo: i128 = if after == NIL { -1 } else { self.elems[after as usize].tag as i128 };
            let next = if after == NIL { self.buckets[b as usize].first } else { self.elems[after as usize].next };
            let hi: i128 = if next == NIL { 1i128 << 64 } else { self.elems[next as usize].tag as i128 };
            if hi - lo >= 2 {
                let tag = (lo + (hi - lo) / 2) as u64;
                let e = self.alloc_elem(b, tag);
                self.link_elem(b, e, after);
                return self.handle(e);
            }
            if self.buckets[b as usize].len < BUCKET_CAP {
                self.relabel_bucket(b);
            } else {
                self.split_bucket(b);
                // The anchor may have moved to the new bucket; the front stays.
                if after != NIL {
                    b = self.elems[after as usize].bucket;
                }
            }
        }
    }

    fn relabel_bucket(&mut self, b: u32) {
        self.relabels += 1;
        let n = self.buckets[b as usize].len as u128;
        let gap = (1u128 << 64) / (n + 1);
        let mut e = self.buckets[b as usize].first;
        let mut k = 1u128;
        while e != NIL {
            self.elems[e as usize].tag = (k * gap) as u64;
            self.rewrites += 1;
            k += 1;
            e = self.elems[e as usize].next;
        }
    }

    fn split_bucket(&mut self, b: u32) {
        let nb = self.insert_bucket_after(b);
        let keep = self.buckets[b as usize].len / 2;
        let mut e = self.buckets[b as usize].first;
        for _ in 0..keep {
            e = self.elems[e as usize].next;
        }
        // Move `e` and everything after it to the new bucket, in order.
        let mut moved_last = NIL;
        while e != NIL {
            let next = self.elems[e as usize].next;
            self.unlink_elem(e);
            self.link_elem(nb, e, moved_last);
            moved_last = e;
            e = next;
        }
        self.relabel_bucket(b);
        self.relabel_bucket(nb);
    }

    fn alloc_bucket(&mut self) -> u32 {
        let fresh = Bucket { tag: 0, prev: NIL, next: NIL, first: NIL, last: NIL, len: 0 };
        if let Some(i) = self.free_buckets.pop() {
            self.buckets[i as usize] = fresh;
            i
        } else {
            self.buckets.push(fresh);
            (self.buckets.len() - 1) as u32
        }
    }

    fn insert_bucket_after(&mut self, b: u32) -> u32 {
        let next = self.buckets[b as usize].next;
        let lo = self.buckets[b as usize].tag as u128;
        let hi = if next == NIL { 1u128 << 64 } else { self.buckets[next as usize].tag as u128 };
        let nb = self.alloc_bucket();
        self.buckets[nb as usize].prev = b;
        self.buckets[nb as usize].next = next;
        self.buckets[b as usize].next = nb;
        if next != NIL {
            self.buckets[next as usize].prev = nb;
        }
        if hi - lo >= 2 {
            self.buckets[nb as usize].tag = (lo + (hi - lo) / 2) as u64;
        } else {
            self.relabel_range(nb);
        }
        nb
    }

    /// Spreads bucket tags around the freshly linked (untagged) bucket `nb`.
    fn relabel_range(&mut self, nb: u32) {
        self.relabels += 1;
        let anchor = self.buckets[nb as usize].prev;
        let t = self.buckets[anchor as usize].tag as u128;
        let (mut left, mut right) = (anchor, anchor);
        // Buckets in [left, right] excluding nb; nb sits right after anchor.
        let mut count: u128 = 1;
        for i in 1..=64u32 {
            let size = 1u128 << i;
            let base = t & !(size - 1);
            loop {
                let p = self.buckets[left as usize].prev;
                if p != NIL && (self.buckets[p as usize].tag as u128) >= base {
                    left = p;
                    count += 1;
                } else {
                    break;
                }
            }
            loop {
                let mut n = self.buckets[right as usize].next;
                if n == nb {
                    n = self.buckets[nb as usize].next;
                }
                if n != NIL && (self.buckets[n as usize].tag as u128) < base + size {
                    right = n;
                    count += 1;
                } else {
                    break;
                }
            }
            let limit = size as f64 / DENSITY_BASE.powi(i as i32);
            if ((count + 1) as f64) <= limit {
                let gap = size / (count + 1);
                let last = if right == anchor { nb } else { right };
                let mut b = left;
                let mut k = 0u128;
                loop {
                    self.buckets[b as usize].tag = (base + k * gap) as u64;
                    self.rewrites += 1;
                    k += 1;
                    if b == last {
                        break;
                    }
                    b = self.buckets[b as usize].next;
                }
                return;
            }
        }
        panic!("order maintenance tag space exhausted");
    }

    pub fn delete(&mut self, e: OmElem) -> Result<(), OmError> {
        let i = self.resolve(e)?;
        let b = self.elems[i as usize].bucket;
        self.unlink_elem(i);
        let x = &mut self.elems[i as usize];
        x.live = false;
        x.gen = x.gen.wrapping_add(1);
        self.free_elems.push(i);
        self.live -= 1;
        if self.buckets[b as usize].len == 0 && self.live > 0 {
            let (prev, next) = (self.buckets[b as usize].prev, self.buckets[b as usize].next);
            if prev != NIL {
                self.buckets[prev as usize].next = next;
            }
            if next != NIL {
                self.buckets[next as usize].prev = prev;
            }
            self.free_buckets.push(b);
        }
        Ok(())
    }

    pub fn compare(&self, a: OmElem, b: OmElem) -> Result<Ordering, OmError> {
        let i = self.resolve(a)?;
        let j = self.resolve(b)?;
        let (x, y) = (&self.elems[i as usize], &self.elems[j as usize]);
        if x.bucket == y.bucket {
            Ok(x.tag.cmp(&y.tag))
        } else {
            Ok(self.buckets[x.bucket as usize].tag.cmp(&self.buckets[y.bucket as usize].tag))
        }
    }

    /// Comparison for callers that guarantee liveness.
    pub fn cmp(&self, a: OmElem, b: OmElem) -> Ordering {
        self.compare(a, b).expect("comparison of live timestamps")
    }

    pub fn lt(&self, a: OmElem, b: OmElem) -> bool {
        self.cmp(a, b) == Ordering::Less
    }

    /// Live elements in order.
    pub fn elements(&self) -> Vec<OmElem> {
        let mut b = self.first_bucket();
        let mut out = Vec::with_capacity(self.live);
        while b != NIL {
            let mut e = self.buckets[b as usize].first;
            while e != NIL {
                out.push(self.handle(e));
                e = self.elems[e as usize].next;
            }
            b = self.buckets[b as usize].next;
        }
        out
    }

    fn first_bucket(&self) -> u32 {
        if self.live == 0 {
            return NIL;
        }
        let mut b = self.elems.iter().find(|x| x.live).expect("a live element").bucket;
        while self.buckets[b as usize].prev != NIL {
            b = self.buckets[b as usize].prev;
        }
        b
    }

    /// Tags strictly increase along both levels and counts agree.
    pub fn check(&self) -> Result<(), String> {
        let mut b = self.first_bucket();
        let mut seen = 0usize;
        let mut prev_tag: Option<u64> = None;
        while b != NIL {
            let bk = &self.buckets[b as usize];
            if prev_tag.is_some_and(|t| t >= bk.tag) {
                return Err(format!("bucket tags out of order at bucket {b}"));
            }
            prev_tag = Some(bk.tag);
            let (mut e, mut n, mut last) = (bk.first, 0u32, None::<u64>);
            while e != NIL {
                let x = &self.elems[e as usize];
                if !x.live || x.bucket != b {
                    return Err(format!("element {e} misfiled"));
                }
                if last.is_some_and(|t| t >= x.tag) {
                    return Err(format!("element tags out of order in bucket {b}"));
                }
                last = Some(x.tag);
                n += 1;
                e = x.next;
            }
            if n != bk.len || n == 0 {
                return Err(format!("bucket {b} holds {n} elements, records {}", bk.len));
            }
            seen += n as usize;
            b = bk.next;
        }
        if seen != self.live {
            return Err(format!("{seen} linked elements, {} live", self.live));
        }
        Ok(())
    }
}

pub fn om_insert_after(o: &mut OmOrder, e: OmElem) -> Result<OmElem, OmError> {
    o.insert_after(e)
}

pub fn om_insert_before(o: &mut OmOrder, e: OmElem) -> Result<OmElem, OmError> {
    o.insert_before(e)
}

pub fn om_compare(o: &OmOrder, a: OmElem, b: OmElem) -> Result<Ordering, OmError> {
    o.compare(a, b)
}

pub fn om_delete(o: &mut OmOrder, e: OmElem) -> Result<(), OmError> {
    o.delete(e)
}
