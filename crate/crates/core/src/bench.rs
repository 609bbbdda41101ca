//! The mergesort tower benchmark: build a deep program of shadowing
//! definitions, then time small change-and-revert edits incrementally and
//! from scratch.
//!
//! Layers are let-encoded with a result annotation,
//! `(ap (lam name T (asc body (list num))) def)`, so a type change inside a
//! layer stops at its own ascription instead of running up the spine of
//! enclosing lets. Recursive calls
//! in layer 1 are ascribed holes `(asc ? T)`; later layers recurse through
//! the previous layer's `mergesort`, which the new one then shadows.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::action::{build_actions, LocalizedAction, SimpleAction};
use crate::engine::{Doc, EngineError};
use crate::reference::baseline_mark;
use crate::syntax::{strip_dirty, Binding, Child, Expr, Type};
use crate::text::parse_expr;
use crate::zipper::Zipper;

const LIST: &str = "(list num)";
const SPLIT_T: &str = "(arrow (list num) (prod (list num) (list num)))";
const MERGE_T: &str = "(arrow (list num) (arrow (list num) (list num)))";
const SORT_T: &str = "(arrow (list num) (list num))";
const HALVES: &str = "(prod (list num) (list num))";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Timer {
    Cycles,
    MonotonicNs,
}

impl Timer {
    pub fn name(self) -> &'static str {
        match self {
            Timer::Cycles => "cycles",
            Timer::MonotonicNs => "monotonic-ns",
        }
    }

    pub fn available(self) -> bool {
        match self {
            Timer::Cycles => cfg!(target_arch = "x86_64"),
            Timer::MonotonicNs => true,
        }
    }
}

struct Clock {
    timer: Timer,
    epoch: Instant,
}

impl Clock {
    fn now(&self) -> u64 {
        match self.timer {
            #[cfg(target_arch = "x86_64")]
            // SAFETY: rdtsc has no preconditions on x86_64.
            Timer::Cycles => unsafe { core::arch::x86_64::_rdtsc() },
            _ => self.epoch.elapsed().as_nanos() as u64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub layers: usize,
    pub edits: usize,
    pub seed: u64,
    pub timer: Timer,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { layers: 20, edits: 200, seed: 7, timer: Timer::Cycles }
    }
}

/// Which kind of change-and-revert pair an edit belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    Leaf,
    Binder,
    Wrap,
    Unwrap,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Leaf, Category::Binder, Category::Wrap, Category::Unwrap];

    pub fn name(self) -> &'static str {
        match self {
            Category::Leaf => "leaf",
            Category::Binder => "binder",
            Category::Wrap => "wrap",
            Category::Unwrap => "unwrap",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edit {
    pub category: Category,
    pub action: LocalizedAction,
}

impl Edit {
    /// `<category>.<action name>`, e.g. `leaf.delete`.
    pub fn kind(&self) -> String {
        let s = self.action.action.to_string();
        let name = s.split_whitespace().next().unwrap_or("");
        format!("{}.{}", self.category.name(), name)
    }

    pub fn is_deletion(&self) -> bool {
        matches!(self.action.action, SimpleAction::Delete)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub kind: String,
    pub action: LocalizedAction,
    pub inc_time: u64,
    pub scratch_time: u64,
    pub node_count: usize,
    pub steps: u64,
    pub visits: u64,
    pub deletion: bool,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub config: BenchConfig,
    /// The timer actually used.
    pub timer: Timer,
    pub timer_fallback: bool,
    pub tower_nodes: usize,
    pub rows: Vec<Row>,
}

impl BenchReport {
    pub fn total_inc(&self) -> u64 {
        self.rows.iter().map(|r| r.inc_time).sum()
    }

    pub fn total_scratch(&self) -> u64 {
        self.rows.iter().map(|r| r.scratch_time).sum()
    }

    pub fn total_speedup(&self) -> f64 {
        self.total_scratch() as f64 / self.total_inc().max(1) as f64
    }

    /// Fraction of rows where the incremental time is below the from-scratch time.
    pub fn below_diagonal(&self) -> f64 {
        let n = self.rows.iter().filter(|r| r.inc_time < r.scratch_time).count();
        n as f64 / self.rows.len().max(1) as f64
    }

    pub fn median_inc(&self) -> u64 {
        median(self.rows.iter().map(|r| r.inc_time).collect())
    }

    pub fn median_scratch(&self) -> u64 {
        median(self.rows.iter().map(|r| r.scratch_time).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# layers={} edits={} seed={} timer={}{} tower_nodes={}",
            self.config.layers,
            self.config.edits,
            self.config.seed,
            self.timer.name(),
            if self.timer_fallback { " (fallback)" } else { "" },
            self.tower_nodes
        );
        s.push_str("# recursive calls are ascribed holes or the previous layer's mergesort\n");
        s.push_str("edit_kind,inc_time,scratch_time,node_count,steps\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.kind, r.inc_time, r.scratch_time, r.node_count, r.steps);
        }
        let _ = writeln!(s, "# total_speedup={:.2}", self.total_speedup());
        s
    }
}

pub fn median(mut v: Vec<u64>) -> u64 {
    if v.is_empty() {
        return 0;
    }
    v.sort_unstable();
    v[v.len() / 2]
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("incremental and from-scratch results differ after edit {index} ({action})")]
    ResultMismatch { index: usize, action: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

fn split_def() -> String {
    format!(
        "(lam xs {LIST} (case (var xs) (pair nil nil) x rest \
           (case (var rest) (pair (cons (var x) nil) nil) y tl \
             (ap (lam p {HALVES} (pair (cons (var x) (fst (var p))) (cons (var y) (snd (var p))))) \
                 (ap (asc ? {SPLIT_T}) (var tl))))))",
    )
}

fn merge_def() -> String {
    format!(
        "(lam xs {LIST} (lam ys {LIST} (case (var xs) (var ys) x xt \
           (case (var ys) (var xs) y yt \
             (cons (var x) (cons (var y) (ap (ap (asc ? {MERGE_T}) (var xt)) (var yt))))))))"
    )
}

fn sort_def(layer: usize, split: usize, merge: usize) -> String {
    let rec = if layer == 1 { format!("(asc ? {SORT_T})") } else { "(var mergesort)".to_string() };
    format!(
        "(lam xs {LIST} (case (var xs) nil x rest \
           (case (var rest) (cons (var x) nil) y tl \
             (ap (lam p {HALVES} \
                   (ap (ap (var merge_{merge}) (ap {rec} (fst (var p)))) (ap {rec} (snd (var p))))) \
                 (ap (var split_{split}) (var xs))))))"
    )
}

/// The complete tower program. Each sort picks its helpers uniformly from
/// the copies in scope.
pub fn tower_expr(layers: usize, seed: u64) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut src = "(ap (var mergesort) (cons (num 3) (cons (num 1) (cons (num 2) nil))))".to_string();
    let mut picks = Vec::new();
    for n in 1..=layers {
        picks.push((rng.gen_range(1..=n), rng.gen_range(1..=n)));
    }
    for n in (1..=layers).rev() {
        let (s, m) = picks[n - 1];
        src = format!(
            "(ap (lam split_{n} {SPLIT_T} (asc (ap (lam merge_{n} {MERGE_T} (asc (ap (lam mergesort {SORT_T} (asc {src} {LIST})) {}) {LIST})) {}) {LIST})) {})",
            sort_def(n, s, m),
            merge_def(),
            split_def(),
        );
    }
    parse_expr(&src).expect("tower source parses")
}

/// Construction trace for the tower: constructors inserted top-down with
/// children built in a random order.
pub fn gen_tower(layers: usize, seed: u64) -> Vec<LocalizedAction> {
    let e = tower_expr(layers, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x746f_7765_72);
    let mut out = Vec::new();
    build_actions(&e, &[], &mut out, &mut |tasks| tasks.shuffle(&mut rng));
    out
}

fn names_in_scope(e: &Expr, path: &[Child]) -> Vec<String> {
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

fn edit(category: Category, action: SimpleAction, path: &[Child]) -> Edit {
    Edit { category, action: LocalizedAction::new(action, path.to_vec()) }
}

/// `count` change-and-revert pairs against `e`, cycling through the four
/// categories. Every pair restores `e`.
pub fn gen_random_edits(e: &Expr, count: usize, seed: u64) -> Vec<Vec<Edit>> {
    use SimpleAction::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths = e.paths();
    let pick = |rng: &mut ChaCha8Rng, f: &dyn Fn(&Expr) -> bool| -> Vec<Child> {
        let cands: Vec<&Vec<Child>> = paths.iter().filter(|p| f(e.at(p).unwrap())).collect();
        cands.choose(rng).map(|p| p.to_vec()).unwrap_or_default()
    };
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let cat = Category::ALL[i % 4];
        let mut pair = Vec::new();
        match cat {
            Category::Leaf => {
                let path = pick(&mut rng, &|x| matches!(x, Expr::Var(_) | Expr::Num(_) | Expr::Bool(_) | Expr::Nil));
                let orig = e.at(&path).unwrap();
                let scope = names_in_scope(e, &path);
                let other = loop {
                    let cand = match rng.gen_range(0..4) {
                        0 => InsertNum(rng.gen_range(0..10)),
                        1 => InsertBool(rng.gen()),
                        2 => InsertNil,
                        _ => match scope.choose(&mut rng) {
                            Some(x) => InsertVar(x.clone()),
                            None => InsertVar("x".into()),
                        },
                    };
                    if leaf_action(orig) != cand {
                        break cand;
                    }
                };
                pair.push(edit(cat, Delete, &path));
                pair.push(edit(cat, other, &path));
                pair.push(edit(cat, Delete, &path));
                pair.push(edit(cat, leaf_action(orig), &path));
            }
            Category::Binder => {
                let path = pick(&mut rng, &|x| {
                    matches!(x, Expr::Lam(Binding::Name(_), ..) | Expr::Case { hd: Binding::Name(_), .. } | Expr::Case { tl: Binding::Name(_), .. })
                });
                let target = e.at(&path).unwrap();
                let (tail, orig) = match target {
                    Expr::Lam(b, ..) => (false, b.clone()),
                    Expr::Case { hd, tl, .. } => match (hd, tl) {
                        (Binding::Name(_), Binding::Name(_)) if rng.gen() => (true, tl.clone()),
                        (Binding::Name(_), _) => (false, hd.clone()),
                        _ => (true, tl.clone()),
                    },
                    _ => unreachable!("filtered"),
                };
                let mut scope = names_in_scope(e, &path);
                scope.extend(["x", "y", "p", "xs"].map(String::from));
                scope.retain(|x| Some(x.as_str()) != orig.name());
                let other = Binding::Name(scope.choose(&mut rng).unwrap().clone());
                let (del, ins): (SimpleAction, fn(Binding) -> SimpleAction) =
                    if tail { (DeleteTlBinder, InsertTlBinder) } else { (DeleteBinder, InsertBinder) };
                pair.push(edit(cat, del.clone(), &path));
                pair.push(edit(cat, ins(other), &path));
                pair.push(edit(cat, del, &path));
                pair.push(edit(cat, ins(orig), &path));
            }
            Category::Wrap => {
                let path = pick(&mut rng, &|_| true);
                let c = |i: usize| Child::from_index(i).unwrap();
                let (w, k) = match rng.gen_range(0..8) {
                    0 => (WrapFun, 0),
                    1 => (WrapAp(Child::One), 0),
                    2 => (WrapAp(Child::Two), 1),
                    3 => (WrapAsc, 0),
                    4 => (WrapPair(c(rng.gen_range(0..2))), 9),
                    5 => (if rng.gen() { WrapFst } else { WrapSnd }, 0),
                    6 => (WrapCons(c(rng.gen_range(0..2))), 9),
                    _ => (WrapCase(c(rng.gen_range(0..3))), 9),
                };
                let k = match &w {
                    WrapPair(c) | WrapCons(c) | WrapCase(c) if k == 9 => c.index(),
                    _ => k,
                };
                pair.push(edit(cat, w, &path));
                pair.push(edit(cat, Unwrap(c(k)), &path));
            }
            Category::Unwrap => {
                let path = pick(&mut rng, &|x| matches!(x, Expr::Lam(..) | Expr::Asc(..) | Expr::Fst(_) | Expr::Snd(_)));
                pair.push(edit(cat, Unwrap(Child::One), &path));
                match e.at(&path).unwrap() {
                    Expr::Lam(b, t, _) => {
                        pair.push(edit(cat, WrapFun, &path));
                        if *t != Type::Unknown {
                            pair.push(edit(cat, SetAnn(t.clone()), &path));
                        }
                        if let Binding::Name(_) = b {
                            pair.push(edit(cat, InsertBinder(b.clone()), &path));
                        }
                    }
                    Expr::Asc(_, t) => {
                        pair.push(edit(cat, WrapAsc, &path));
                        if *t != Type::Unknown {
                            pair.push(edit(cat, SetAsc(t.clone()), &path));
                        }
                    }
                    Expr::Fst(_) => pair.push(edit(cat, WrapFst, &path)),
                    _ => pair.push(edit(cat, WrapSnd, &path)),
                }
            }
        }
        out.push(pair);
    }
    out
}

fn leaf_action(e: &Expr) -> SimpleAction {
    match e {
        Expr::Var(x) => SimpleAction::InsertVar(x.clone()),
        Expr::Num(n) => SimpleAction::InsertNum(*n),
        Expr::Bool(b) => SimpleAction::InsertBool(*b),
        Expr::Nil => SimpleAction::InsertNil,
        _ => unreachable!("leaf"),
    }
}

/// Builds the tower through the engine, then times every edit both ways.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let timer = if cfg.timer.available() { cfg.timer } else { Timer::MonotonicNs };
    let clock = Clock { timer, epoch: Instant::now() };
    let mut doc = Doc::load(&Expr::Hole);
    for a in gen_tower(cfg.layers, cfg.seed) {
        doc.apply(&a)?;
        doc.run_to_quiescence()?;
    }
    let bare = doc.to_expr();
    let tower_nodes = bare.size();
    let edits: Vec<Edit> = gen_random_edits(&bare, cfg.edits, cfg.seed.wrapping_add(1)).into_iter().flatten().collect();
    // Each side is timed in its own pass so neither pays for the other's
    // cache and allocator churn. A third, untimed pass checks results.
    let verify_doc = doc.clone();
    let mut rows = Vec::with_capacity(edits.len());
    for ed in &edits {
        let a = &ed.action;
        // Cursor moves are untimed.
        let n = doc.resolve_path(&a.path).map_err(EngineError::from)?;
        doc.reset_stats();
        let t0 = clock.now();
        doc.apply_at(n, &a.action)?;
        let rs = doc.run_to_quiescence()?;
        let inc_time = clock.now().wrapping_sub(t0);
        rows.push(Row {
            kind: ed.kind(),
            action: a.clone(),
            inc_time,
            scratch_time: 0,
            node_count: doc.node_count(),
            steps: rs.steps,
            visits: doc.stats().visits,
            deletion: ed.is_deletion(),
        });
    }
    drop(doc);

    let mut zip = Zipper::new(bare.clone());
    for (ed, row) in edits.iter().zip(&mut rows) {
        let a = &ed.action;
        zip.move_to(&a.path).map_err(EngineError::from)?;
        let t0 = clock.now();
        zip.perform(&a.action).map_err(EngineError::from)?;
        let t1 = clock.now();
        let root = zip.to_root();
        let t2 = clock.now();
        black_box(baseline_mark(root));
        row.scratch_time = clock.now().wrapping_sub(t2) + t1.wrapping_sub(t0);
    }
    drop(zip);

    let mut doc = verify_doc;
    let mut zip = Zipper::new(bare);
    for (index, ed) in edits.iter().enumerate() {
        let a = &ed.action;
        doc.apply(a)?;
        doc.run_to_quiescence()?;
        zip.move_to(&a.path).map_err(EngineError::from)?;
        zip.perform(&a.action).map_err(EngineError::from)?;
        if strip_dirty(&doc.snapshot()) != baseline_mark(zip.to_root()) {
            return Err(BenchError::ResultMismatch { index, action: a.to_string() });
        }
    }
    Ok(BenchReport { config: cfg.clone(), timer, timer_fallback: timer != cfg.timer, tower_nodes, rows })
}
