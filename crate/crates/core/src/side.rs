//! Total side conditions shared by the oracle and the engine.

use crate::syntax::{Binding, Mark, Type, TypeOpt};

/// Typing context: most recent binding last.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ctx {
    entries: Vec<(String, TypeOpt)>,
}

impl Ctx {
    pub fn new() -> Ctx {
        Ctx::default()
    }

    /// Extends with a binding; a binding hole leaves the context unchanged.
    pub fn extend(&mut self, b: &Binding, ty: TypeOpt) {
        if let Binding::Name(x) = b {
            self.entries.push((x.clone(), ty));
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncate(&mut self, n: usize) {
        self.entries.truncate(n);
    }
}

pub fn ctx_lookup(name: &str, ctx: &Ctx) -> (Mark, TypeOpt) {
    match ctx.entries.iter().rev().find(|(x, _)| x == name) {
        Some((_, t)) => (Mark::Ok, t.clone()),
        None => (Mark::Err, Some(Type::Unknown)),
    }
}

pub fn ctx_lookup_binding(b: &Binding, ctx: &Ctx) -> (Mark, TypeOpt) {
    match b {
        Binding::Hole => (Mark::Err, Some(Type::Unknown)),
        Binding::Name(x) => ctx_lookup(x, ctx),
    }
}

const UNKNOWN: TypeOpt = Some(Type::Unknown);

pub fn matched_arrow(s: &TypeOpt) -> (Mark, TypeOpt, TypeOpt) {
    match s {
        None => (Mark::Ok, None, None),
        Some(Type::Unknown) => (Mark::Ok, UNKNOWN, UNKNOWN),
        Some(Type::Arrow(a, b)) => (Mark::Ok, Some((**a).clone()), Some((**b).clone())),
        Some(_) => (Mark::Err, UNKNOWN, UNKNOWN),
    }
}

pub fn matched_prod(s: &TypeOpt) -> (Mark, TypeOpt, TypeOpt) {
    match s {
        None => (Mark::Ok, None, None),
        Some(Type::Unknown) => (Mark::Ok, UNKNOWN, UNKNOWN),
        Some(Type::Prod(a, b)) => (Mark::Ok, Some((**a).clone()), Some((**b).clone())),
        Some(_) => (Mark::Err, UNKNOWN, UNKNOWN),
    }
}

pub fn matched_list(s: &TypeOpt) -> (Mark, TypeOpt) {
    match s {
        None => (Mark::Ok, None),
        Some(Type::Unknown) => (Mark::Ok, UNKNOWN),
        Some(Type::List(a)) => (Mark::Ok, Some((**a).clone())),
        Some(_) => (Mark::Err, UNKNOWN),
    }
}

pub fn mark_meet(a: Mark, b: Mark) -> Mark {
    if a == Mark::Ok && b == Mark::Ok {
        Mark::Ok
    } else {
        Mark::Err
    }
}

pub fn consistency(a: &TypeOpt, b: &TypeOpt) -> Mark {
    match (a, b) {
        (Some(a), Some(b)) => type_consistency(a, b),
        _ => Mark::Ok,
    }
}

fn type_consistency(a: &Type, b: &Type) -> Mark {
    use Type::*;
    match (a, b) {
        (Unknown, _) | (_, Unknown) => Mark::Ok,
        (Num, Num) | (Bool, Bool) => Mark::Ok,
        (Arrow(a1, a2), Arrow(b1, b2)) | (Prod(a1, a2), Prod(b1, b2)) => {
            mark_meet(type_consistency(a1, b1), type_consistency(a2, b2))
        }
        (List(a), List(b)) => type_consistency(a, b),
        _ => Mark::Err,
    }
}

/// What a lambda synthesizes given its analyzed type, annotation and body synthesis.
pub fn fun_syn(ana: &TypeOpt, ann: &TypeOpt, body: &TypeOpt) -> TypeOpt {
    match (ana, ann, body) {
        (None, Some(t1), Some(t2)) => Some(Type::arrow(t1.clone(), t2.clone())),
        _ => None,
    }
}

/// What a pair synthesizes from its components' syntheses.
pub fn pair_syn(l: &TypeOpt, r: &TypeOpt) -> TypeOpt {
    match (l, r) {
        (Some(a), Some(b)) => Some(Type::prod(a.clone(), b.clone())),
        _ => None,
    }
}

pub fn list_of(s: &TypeOpt) -> TypeOpt {
    s.as_ref().map(|t| Type::list(t.clone()))
}
