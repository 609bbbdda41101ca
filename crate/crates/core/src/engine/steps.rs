//! Update propagation steps. A step pops one dirty location, applies the one
//! rule that fits it, and dirties downstream types only when they change.

use std::fmt;

use super::{Doc, DirtyLoc, EngineError, Kind, NodeId, SlotKind, NIL};
use crate::binder::BinderKey;
use crate::side::{consistency, fun_syn, list_of, matched_arrow, matched_list, matched_prod, pair_syn};
use crate::syntax::{Mark, TypeOpt};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    StepAna,
    StepAnaFun,
    StepAnnFun,
    StepAsc,
    StepSyn,
    StepSynFun,
    StepAp,
    StepPair,
    StepProj,
    StepCons,
    StepCaseScrut,
    StepCaseNil,
    TopStep,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::StepAna => "STEPANA",
            Rule::StepAnaFun => "STEPANAFUN",
            Rule::StepAnnFun => "STEPANNFUN",
            Rule::StepAsc => "STEPASC",
            Rule::StepSyn => "STEPSYN",
            Rule::StepSynFun => "STEPSYNFUN",
            Rule::StepAp => "STEPAP",
            Rule::StepPair => "STEPPAIR",
            Rule::StepProj => "STEPPROJ",
            Rule::StepCons => "STEPCONS",
            Rule::StepCaseScrut => "STEPCASESCRUT",
            Rule::StepCaseNil => "STEPCASENIL",
            Rule::TopStep => "TOPSTEP",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub popped: DirtyLoc,
    pub rule: Rule,
    /// Locations newly dirtied; filled only when instrumented.
    pub pushed: Vec<DirtyLoc>,
}

impl Doc {
    /// Takes the highest-priority step, skipping tombstoned entries.
    /// Returns `None` when the frontier is empty.
    pub fn step(&mut self) -> Option<StepReport> {
        loop {
            let loc = self.frontier.pop(&self.om)?;
            if self.node(loc.node).deleted {
                self.stats.skipped += 1;
                if self.frontier.count_for(loc.node) == 0 {
                    self.free(loc.node);
                }
                continue;
            }
            self.live_dirty -= 1;
            return Some(self.fire(loc));
        }
    }

    /// Takes a step at a chosen live dirty location.
    pub fn step_at(&mut self, loc: DirtyLoc) -> Result<StepReport, EngineError> {
        if !self.is_dirty(loc) {
            return Err(EngineError::NotDirty);
        }
        self.undirty(loc);
        Ok(self.fire(loc))
    }

    fn fire(&mut self, loc: DirtyLoc) -> StepReport {
        self.stats.steps += 1;
        self.touch(loc.node);
        self.pushed.clear();
        let n = loc.node;
        let rule = match loc.slot {
            SlotKind::Surface => self.step_surface(n),
            SlotKind::Ana => self.step_ana(n),
            SlotKind::Syn => self.step_syn(n),
        };
        StepReport { popped: loc, rule, pushed: std::mem::take(&mut self.pushed) }
    }

    fn update_ana(&mut self, n: NodeId, t: TypeOpt) {
        self.touch(n);
        if self.node(n).ana != t {
            self.node_mut(n).ana = t;
            self.dirty(n, SlotKind::Ana);
        }
    }

    fn update_syn(&mut self, n: NodeId, t: TypeOpt) {
        self.touch(n);
        if self.node(n).syn != t {
            self.node_mut(n).syn = t;
            self.dirty(n, SlotKind::Syn);
        }
    }

    /// Variable update within a step: dirties only changed types.
    fn update_vars(&mut self, key: BinderKey, t: &TypeOpt) {
        for v in self.index.vars_of(key) {
            self.node_mut(v).marks[0] = Mark::Ok;
            self.update_syn(v, t.clone());
        }
    }

    fn refresh_mark(&mut self, n: NodeId) {
        let node = self.node(n);
        let m = consistency(&node.ana, &node.syn);
        self.node_mut(n).mark = m;
    }

    fn step_surface(&mut self, n: NodeId) -> Rule {
        let t = Some(self.node(n).surface.clone());
        match self.node(n).kind {
            Kind::Lam(_) => {
                self.update_vars(BinderKey { node: n, slot: 0 }, &t);
                self.dirty(n, SlotKind::Ana);
                Rule::StepAnnFun
            }
            Kind::Asc => {
                let body = self.node(n).kids[0];
                self.update_ana(body, t.clone());
                self.update_syn(n, t);
                Rule::StepAsc
            }
            _ => unreachable!("surface types live on lambdas and ascriptions"),
        }
    }

    fn step_ana(&mut self, n: NodeId) -> Rule {
        if let Kind::Lam(_) = self.node(n).kind {
            let node = self.node(n);
            let ann = Some(node.surface.clone());
            let (m5, s5, s6) = matched_arrow(&node.ana);
            let m6 = consistency(&s5, &ann);
            let body = node.kids[0];
            self.node_mut(n).marks = [m5, m6];
            self.update_ana(body, s6);
            let fs = fun_syn(&self.node(n).ana, &ann, &self.node(body).syn);
            self.update_syn(n, fs);
            self.refresh_mark(n);
            Rule::StepAnaFun
        } else {
            self.refresh_mark(n);
            Rule::StepAna
        }
    }

    fn step_syn(&mut self, n: NodeId) -> Rule {
        self.refresh_mark(n);
        let (p, pos) = (self.node(n).parent, self.node(n).pos);
        if p == NIL {
            return Rule::TopStep;
        }
        self.touch(p);
        let syn = self.node(n).syn.clone();
        let kids = self.node(p).kids;
        match (&self.node(p).kind, pos) {
            (Kind::Lam(_), _) => {
                let pn = self.node(p);
                let fs = fun_syn(&pn.ana, &Some(pn.surface.clone()), &syn);
                self.update_syn(p, fs);
                Rule::StepSynFun
            }
            (Kind::Ap, 0) => {
                let (m, dom, cod) = matched_arrow(&syn);
                self.node_mut(p).marks[0] = m;
                self.update_ana(kids[1], dom);
                self.update_syn(p, cod);
                Rule::StepAp
            }
            (Kind::Pair, _) => {
                self.touch(kids[1 - pos as usize]);
                let t = pair_syn(&self.node(kids[0]).syn, &self.node(kids[1]).syn);
                self.update_syn(p, t);
                Rule::StepPair
            }
            (Kind::Fst | Kind::Snd, _) => {
                let (m, a, b) = matched_prod(&syn);
                let t = if self.node(p).kind == Kind::Fst { a } else { b };
                self.node_mut(p).marks[0] = m;
                self.update_syn(p, t);
                Rule::StepProj
            }
            (Kind::Cons, 0) => {
                let lt = list_of(&syn);
                self.update_ana(kids[1], lt.clone());
                self.update_syn(p, lt);
                Rule::StepCons
            }
            (Kind::Case(..), 0) => {
                let (m, elem) = matched_list(&syn);
                self.node_mut(p).marks[0] = m;
                let bty = [elem.clone(), list_of(&elem)];
                if self.node(p).bty != bty {
                    self.update_vars(BinderKey { node: p, slot: 0 }, &bty[0]);
                    self.update_vars(BinderKey { node: p, slot: 1 }, &bty[1]);
                    self.node_mut(p).bty = bty;
                }
                Rule::StepCaseScrut
            }
            (Kind::Case(..), 1) => {
                self.update_ana(kids[2], syn.clone());
                self.update_syn(p, syn);
                Rule::StepCaseNil
            }
            _ => Rule::StepSyn,
        }
    }
}
