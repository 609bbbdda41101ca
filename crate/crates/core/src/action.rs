//! Edit actions, their effect on bare expressions, the constructive
//! completeness procedure, and the one-line-per-action trace format.

use std::fmt;

use thiserror::Error;

use crate::syntax::{Binding, Child, Expr, Type};
use crate::text::{is_identifier, parse_binding, parse_type, print_type};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SimpleAction {
    InsertVar(String),
    InsertNum(i64),
    InsertBool(bool),
    InsertNil,
    WrapFun,
    WrapAp(Child),
    WrapAsc,
    WrapPair(Child),
    WrapFst,
    WrapSnd,
    WrapCons(Child),
    WrapCase(Child),
    Delete,
    Unwrap(Child),
    SetAnn(Type),
    SetAsc(Type),
    /// Lambda binder, or the head binder of a list case.
    InsertBinder(Binding),
    DeleteBinder,
    /// Tail binder of a list case.
    InsertTlBinder(Binding),
    DeleteTlBinder,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LocalizedAction {
    pub action: SimpleAction,
    pub path: Vec<Child>,
}

impl LocalizedAction {
    pub fn new(action: SimpleAction, path: Vec<Child>) -> LocalizedAction {
        LocalizedAction { action, path }
    }

    pub fn at_root(action: SimpleAction) -> LocalizedAction {
        LocalizedAction { action, path: Vec::new() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("path {0} does not address a node")]
    PathInvalid(String),
    #[error("{action} is not applicable here: {reason}")]
    Inapplicable { action: String, reason: String },
}

pub fn print_path(path: &[Child]) -> String {
    path.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(".")
}

pub fn parse_path(s: &str) -> Option<Vec<Child>> {
    let s = s.trim();
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split('.')
        .map(|p| match p.trim() {
            "1" => Some(Child::One),
            "2" => Some(Child::Two),
            "3" => Some(Child::Three),
            _ => None,
        })
        .collect()
}

fn binding_text(b: &Binding) -> &str {
    match b {
        Binding::Hole => "?",
        Binding::Name(x) => x,
    }
}

impl fmt::Display for SimpleAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SimpleAction::*;
        match self {
            InsertVar(x) => write!(f, "insert-var {x}"),
            InsertNum(n) => write!(f, "insert-num {n}"),
            InsertBool(b) => write!(f, "insert-bool {b}"),
            InsertNil => write!(f, "insert-nil"),
            WrapFun => write!(f, "wrap-fun"),
            WrapAp(c) => write!(f, "wrap-ap {c}"),
            WrapAsc => write!(f, "wrap-asc"),
            WrapPair(c) => write!(f, "wrap-pair {c}"),
            WrapFst => write!(f, "wrap-fst"),
            WrapSnd => write!(f, "wrap-snd"),
            WrapCons(c) => write!(f, "wrap-cons {c}"),
            WrapCase(c) => write!(f, "wrap-case {c}"),
            Delete => write!(f, "delete"),
            Unwrap(c) => write!(f, "unwrap {c}"),
            SetAnn(t) => write!(f, "set-ann {}", print_type(t)),
            SetAsc(t) => write!(f, "set-asc {}", print_type(t)),
            InsertBinder(b) => write!(f, "insert-binder {}", binding_text(b)),
            DeleteBinder => write!(f, "delete-binder"),
            InsertTlBinder(b) => write!(f, "insert-tl-binder {}", binding_text(b)),
            DeleteTlBinder => write!(f, "delete-tl-binder"),
        }
    }
}

impl fmt::Display for LocalizedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.action)
        } else {
            write!(f, "{} @ {}", self.action, print_path(&self.path))
        }
    }
}

fn parse_child(s: &str) -> Result<Child, String> {
    match s {
        "1" => Ok(Child::One),
        "2" => Ok(Child::Two),
        "3" => Ok(Child::Three),
        _ => Err(format!("expected child index 1, 2 or 3, found '{s}'")),
    }
}

/// Parses `<action-name> <args>` (without the path part).
pub fn parse_simple_action(s: &str) -> Result<SimpleAction, String> {
    use SimpleAction::*;
    let s = s.trim();
    let (name, arg) = match s.split_once(char::is_whitespace) {
        Some((n, a)) => (n, a.trim()),
        None => (s, ""),
    };
    let no_arg = |a: SimpleAction| if arg.is_empty() { Ok(a) } else { Err(format!("'{name}' takes no argument")) };
    let ty = || parse_type(arg).map_err(|e| e.to_string());
    let binding = || parse_binding(arg).map_err(|e| e.to_string());
    match name {
        "insert-var" if is_identifier(arg) => Ok(InsertVar(arg.to_string())),
        "insert-var" => Err(format!("expected identifier, found '{arg}'")),
        "insert-num" => arg.parse().map(InsertNum).map_err(|_| format!("expected integer, found '{arg}'")),
        "insert-bool" => match arg {
            "true" => Ok(InsertBool(true)),
            "false" => Ok(InsertBool(false)),
            _ => Err(format!("expected true or false, found '{arg}'")),
        },
        "insert-nil" => no_arg(InsertNil),
        "wrap-fun" => no_arg(WrapFun),
        "wrap-ap" => parse_child(arg).map(WrapAp),
        "wrap-asc" => no_arg(WrapAsc),
        "wrap-pair" => parse_child(arg).map(WrapPair),
        "wrap-fst" => no_arg(WrapFst),
        "wrap-snd" => no_arg(WrapSnd),
        "wrap-cons" => parse_child(arg).map(WrapCons),
        "wrap-case" => parse_child(arg).map(WrapCase),
        "delete" => no_arg(Delete),
        "unwrap" => parse_child(arg).map(Unwrap),
        "set-ann" => ty().map(SetAnn),
        "set-asc" => ty().map(SetAsc),
        "insert-binder" => binding().map(InsertBinder),
        "delete-binder" => no_arg(DeleteBinder),
        "insert-tl-binder" => binding().map(InsertTlBinder),
        "delete-tl-binder" => no_arg(DeleteTlBinder),
        _ => Err(format!("unknown action '{name}'")),
    }
}

/// Parses `<action-name> <args> [@ <path>]`; a missing path means the root.
pub fn parse_localized_action(s: &str) -> Result<LocalizedAction, String> {
    let (a, p) = match s.rsplit_once('@') {
        Some((a, p)) => (a, p),
        None => (s, ""),
    };
    let path = parse_path(p).ok_or_else(|| format!("malformed path '{}'", p.trim()))?;
    Ok(LocalizedAction { action: parse_simple_action(a)?, path })
}

/// One line of an edit trace.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TraceLine {
    Action(LocalizedAction),
    /// Take one update step.
    Step,
    /// Run update propagation to quiescence.
    Run,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct TraceError {
    pub line: usize,
    pub msg: String,
}

/// Parses a trace file. `#` starts a comment; blank lines are ignored.
/// Returns each entry with its 1-based line number.
pub fn parse_trace(src: &str) -> Result<Vec<(usize, TraceLine)>, TraceError> {
    let mut out = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let entry = match line {
            "step" => TraceLine::Step,
            "run" => TraceLine::Run,
            _ => TraceLine::Action(parse_localized_action(line).map_err(|msg| TraceError { line: i + 1, msg })?),
        };
        out.push((i + 1, entry));
    }
    Ok(out)
}

pub fn print_trace(actions: &[LocalizedAction]) -> String {
    let mut s = String::new();
    for a in actions {
        s.push_str(&a.to_string());
        s.push('\n');
    }
    s
}

fn inapplicable(a: &SimpleAction, reason: &str) -> ActionError {
    ActionError::Inapplicable { action: a.to_string(), reason: reason.to_string() }
}

fn take(e: &mut Expr) -> Box<Expr> {
    Box::new(std::mem::replace(e, Expr::Hole))
}

fn hole() -> Box<Expr> {
    Box::new(Expr::Hole)
}

fn arity(e: &Expr) -> usize {
    e.children().len()
}

/// Checks that `a` fits the shape of `target`, without performing it.
pub fn check_applicable(target: &Expr, a: &SimpleAction) -> Result<(), ActionError> {
    use SimpleAction::*;
    let ok = match a {
        InsertVar(x) => {
            if !is_identifier(x) {
                return Err(inapplicable(a, "variable name is not an identifier"));
            }
            matches!(target, Expr::Hole)
        }
        InsertNum(_) | InsertBool(_) | InsertNil => matches!(target, Expr::Hole),
        WrapFun | WrapAsc | WrapFst | WrapSnd | Delete => true,
        WrapAp(c) | WrapPair(c) | WrapCons(c) => *c != Child::Three,
        WrapCase(_) => true,
        Unwrap(c) => c.index() < arity(target),
        SetAnn(_) => matches!(target, Expr::Lam(..)),
        SetAsc(_) => matches!(target, Expr::Asc(..)),
        InsertBinder(b) => {
            if let Binding::Name(x) = b {
                if !is_identifier(x) {
                    return Err(inapplicable(a, "binder name is not an identifier"));
                }
            }
            matches!(target, Expr::Lam(Binding::Hole, ..) | Expr::Case { hd: Binding::Hole, .. })
        }
        DeleteBinder => matches!(target, Expr::Lam(..) | Expr::Case { .. }),
        InsertTlBinder(b) => {
            if let Binding::Name(x) = b {
                if !is_identifier(x) {
                    return Err(inapplicable(a, "binder name is not an identifier"));
                }
            }
            matches!(target, Expr::Case { tl: Binding::Hole, .. })
        }
        DeleteTlBinder => matches!(target, Expr::Case { .. }),
    };
    if ok {
        Ok(())
    } else {
        Err(inapplicable(a, "target has the wrong shape"))
    }
}

/// Performs a simple action on the node itself.
pub fn perform_simple(e: &mut Expr, a: &SimpleAction) -> Result<(), ActionError> {
    use SimpleAction::*;
    check_applicable(e, a)?;
    match a {
        InsertVar(x) => *e = Expr::Var(x.clone()),
        InsertNum(n) => *e = Expr::Num(*n),
        InsertBool(b) => *e = Expr::Bool(*b),
        InsertNil => *e = Expr::Nil,
        WrapFun => *e = Expr::Lam(Binding::Hole, Type::Unknown, take(e)),
        WrapAp(Child::One) => *e = Expr::Ap(take(e), hole()),
        WrapAp(_) => *e = Expr::Ap(hole(), take(e)),
        WrapAsc => *e = Expr::Asc(take(e), Type::Unknown),
        WrapPair(Child::One) => *e = Expr::Pair(take(e), hole()),
        WrapPair(_) => *e = Expr::Pair(hole(), take(e)),
        WrapFst => *e = Expr::Fst(take(e)),
        WrapSnd => *e = Expr::Snd(take(e)),
        WrapCons(Child::One) => *e = Expr::Cons(take(e), hole()),
        WrapCons(_) => *e = Expr::Cons(hole(), take(e)),
        WrapCase(c) => {
            let inner = take(e);
            let (mut s, mut n, mut k) = (hole(), hole(), hole());
            match c {
                Child::One => s = inner,
                Child::Two => n = inner,
                Child::Three => k = inner,
            }
            *e = Expr::Case { scrut: s, nil: n, hd: Binding::Hole, tl: Binding::Hole, cons: k };
        }
        Delete => *e = Expr::Hole,
        Unwrap(c) => {
            let kept = std::mem::replace(e.child_mut(*c).expect("checked arity"), Expr::Hole);
            *e = kept;
        }
        SetAnn(t) => {
            if let Expr::Lam(_, ann, _) = e {
                *ann = t.clone();
            }
        }
        SetAsc(t) => {
            if let Expr::Asc(_, ty) = e {
                *ty = t.clone();
            }
        }
        InsertBinder(b) => match e {
            Expr::Lam(x, ..) => *x = b.clone(),
            Expr::Case { hd, .. } => *hd = b.clone(),
            _ => unreachable!(),
        },
        DeleteBinder => match e {
            Expr::Lam(x, ..) => *x = Binding::Hole,
            Expr::Case { hd, .. } => *hd = Binding::Hole,
            _ => unreachable!(),
        },
        InsertTlBinder(b) => {
            if let Expr::Case { tl, .. } = e {
                *tl = b.clone();
            }
        }
        DeleteTlBinder => {
            if let Expr::Case { tl, .. } = e {
                *tl = Binding::Hole;
            }
        }
    }
    Ok(())
}

/// Performs a localized action on a bare expression.
pub fn bare_perform(e: &Expr, a: &LocalizedAction) -> Result<Expr, ActionError> {
    let mut out = e.clone();
    bare_perform_in_place(&mut out, a)?;
    Ok(out)
}

pub fn bare_perform_in_place(e: &mut Expr, a: &LocalizedAction) -> Result<(), ActionError> {
    let target = e.at_mut(&a.path).ok_or_else(|| ActionError::PathInvalid(print_path(&a.path)))?;
    perform_simple(target, &a.action)
}

/// A unit of construction work under a freshly wrapped constructor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuildTask {
    Child(Child),
    Annotation,
    HeadBinder,
    TailBinder,
}

/// Emits actions that turn the hole at `path` into `e`. After the head
/// constructor is created, its remaining tasks are ordered by `order`.
pub fn build_actions(
    e: &Expr,
    path: &[Child],
    out: &mut Vec<LocalizedAction>,
    order: &mut dyn FnMut(&mut Vec<BuildTask>),
) {
    use SimpleAction::*;
    let at = |a: SimpleAction| LocalizedAction::new(a, path.to_vec());
    let (head, mut tasks) = match e {
        Expr::Hole => return,
        Expr::Var(x) => (InsertVar(x.clone()), vec![]),
        Expr::Num(n) => (InsertNum(*n), vec![]),
        Expr::Bool(b) => (InsertBool(*b), vec![]),
        Expr::Nil => (InsertNil, vec![]),
        Expr::Lam(..) => (WrapFun, vec![BuildTask::Annotation, BuildTask::HeadBinder, BuildTask::Child(Child::One)]),
        Expr::Asc(..) => (WrapAsc, vec![BuildTask::Annotation, BuildTask::Child(Child::One)]),
        Expr::Ap(..) => (WrapAp(Child::One), vec![BuildTask::Child(Child::One), BuildTask::Child(Child::Two)]),
        Expr::Pair(..) => (WrapPair(Child::One), vec![BuildTask::Child(Child::One), BuildTask::Child(Child::Two)]),
        Expr::Cons(..) => (WrapCons(Child::One), vec![BuildTask::Child(Child::One), BuildTask::Child(Child::Two)]),
        Expr::Fst(_) => (WrapFst, vec![BuildTask::Child(Child::One)]),
        Expr::Snd(_) => (WrapSnd, vec![BuildTask::Child(Child::One)]),
        Expr::Case { .. } => (
            WrapCase(Child::One),
            vec![
                BuildTask::Child(Child::One),
                BuildTask::Child(Child::Two),
                BuildTask::HeadBinder,
                BuildTask::TailBinder,
                BuildTask::Child(Child::Three),
            ],
        ),
    };
    out.push(at(head));
    order(&mut tasks);
    for t in tasks {
        match t {
            BuildTask::Child(c) => {
                let mut p = path.to_vec();
                p.push(c);
                build_actions(e.child(c).expect("task matches arity"), &p, out, order);
            }
            BuildTask::Annotation => match e {
                Expr::Lam(_, t, _) if *t != Type::Unknown => out.push(at(SetAnn(t.clone()))),
                Expr::Asc(_, t) if *t != Type::Unknown => out.push(at(SetAsc(t.clone()))),
                _ => {}
            },
            BuildTask::HeadBinder => match e {
                Expr::Lam(b @ Binding::Name(_), ..) | Expr::Case { hd: b @ Binding::Name(_), .. } => {
                    out.push(at(InsertBinder(b.clone())))
                }
                _ => {}
            },
            BuildTask::TailBinder => {
                if let Expr::Case { tl: b @ Binding::Name(_), .. } = e {
                    out.push(at(InsertTlBinder(b.clone())));
                }
            }
        }
    }
}

/// A sequence of localized actions taking `e1` to `e2`: clear to a hole,
/// then rebuild `e2` top-down.
pub fn action_sequence_between(e1: &Expr, e2: &Expr) -> Vec<LocalizedAction> {
    let mut out = Vec::new();
    if e1 == e2 {
        return out;
    }
    if *e1 != Expr::Hole {
        out.push(LocalizedAction::at_root(SimpleAction::Delete));
    }
    build_actions(e2, &[], &mut out, &mut |_| {});
    out
}
