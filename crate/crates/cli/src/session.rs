//! One editing session: a document, a cursor and a revision counter.
//! Requests and replies are the JSON objects described in protocol.md.

use incbidi::action::{parse_path, parse_simple_action, print_path};
use incbidi::engine::{DirtyLoc, Doc, SlotKind};
use incbidi::syntax::{Child, Expr};
use incbidi::text::{parse_expr, print_program};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Request {
    Open {
        #[serde(default)]
        program: Option<String>,
    },
    Move {
        path: String,
    },
    Action {
        action: String,
        #[serde(default)]
        path: Option<String>,
    },
    Step,
    StepAt {
        path: String,
        slot: String,
    },
    Run,
    State,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirtyEntry {
    pub path: String,
    pub slot: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stepped {
    pub rule: String,
    pub path: String,
    pub slot: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateReply {
    pub revision: u64,
    pub tree: String,
    pub dirty: Vec<DirtyEntry>,
    pub cursor: String,
    pub errors: usize,
    pub quiescent: bool,
    /// The step taken by `step` or `step_at`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepped: Option<Stepped>,
    /// Steps taken by `run`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReply {
    pub error: String,
    pub revision: u64,
}

#[derive(Default)]
pub struct Session {
    doc: Option<Doc>,
    cursor: Vec<Child>,
    revision: u64,
}

fn path_arg(s: &str) -> Result<Vec<Child>, String> {
    parse_path(s).ok_or_else(|| format!("malformed path '{s}'"))
}

fn slot_arg(s: &str) -> Result<SlotKind, String> {
    match s {
        "ty" => Ok(SlotKind::Surface),
        "ana" => Ok(SlotKind::Ana),
        "syn" => Ok(SlotKind::Syn),
        _ => Err(format!("unknown slot '{s}'; expected ty, ana or syn")),
    }
}

impl Session {
    pub fn new() -> Session {
        Session::default()
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Handles raw request bytes; always produces a reply object.
    pub fn handle_bytes(&mut self, bytes: &[u8]) -> serde_json::Value {
        let reply = serde_json::from_slice::<Request>(bytes)
            .map_err(|e| format!("bad request: {e}"))
            .and_then(|r| self.handle(r));
        match reply {
            Ok(s) => serde_json::to_value(s).expect("serializable"),
            Err(error) => serde_json::to_value(ErrorReply { error, revision: self.revision }).expect("serializable"),
        }
    }

    /// Applies one request. On error nothing changes.
    pub fn handle(&mut self, req: Request) -> Result<StateReply, String> {
        if let Request::Open { program } = req {
            let e = match program {
                Some(p) => parse_expr(&p).map_err(|e| e.to_string())?,
                None => Expr::Hole,
            };
            self.doc = Some(Doc::load(&e));
            self.cursor.clear();
            self.revision = 0;
            return Ok(self.state());
        }
        let doc = self.doc.as_mut().ok_or("no open document; send open first")?;
        let mut stepped = None;
        let mut steps = None;
        let changed = match req {
            Request::Open { .. } => unreachable!(),
            Request::State => false,
            Request::Move { path } => {
                let p = path_arg(&path)?;
                doc.resolve_path(&p).map_err(|e| e.to_string())?;
                self.cursor = p;
                true
            }
            Request::Action { action, path } => {
                let a = parse_simple_action(&action)?;
                let p = match path {
                    Some(s) => path_arg(&s)?,
                    None => self.cursor.clone(),
                };
                let n = doc.resolve_path(&p).map_err(|e| e.to_string())?;
                doc.apply_at(n, &a).map_err(|e| e.to_string())?;
                self.cursor = p;
                true
            }
            Request::Step => match doc.step() {
                Some(r) => {
                    stepped = Some((r.rule, r.popped));
                    true
                }
                None => false,
            },
            Request::StepAt { path, slot } => {
                let n = doc.resolve_path(&path_arg(&path)?).map_err(|e| e.to_string())?;
                let r = doc.step_at(DirtyLoc { node: n, slot: slot_arg(&slot)? }).map_err(|e| e.to_string())?;
                stepped = Some((r.rule, r.popped));
                true
            }
            Request::Run => {
                let rs = doc.run_to_quiescence().map_err(|e| e.to_string())?;
                steps = Some(rs.steps);
                rs.steps > 0
            }
        };
        if changed {
            self.revision += 1;
        }
        let mut s = self.state();
        s.steps = steps;
        if let Some((rule, loc)) = stepped {
            let doc = self.doc.as_ref().expect("open");
            s.stepped = Some(Stepped { rule: rule.to_string(), path: print_path(&doc.path_of(loc.node)), slot: loc.slot.name().into() });
        }
        Ok(s)
    }

    fn state(&self) -> StateReply {
        let doc = self.doc.as_ref().expect("open");
        let snap = doc.snapshot();
        StateReply {
            revision: self.revision,
            tree: print_program(&snap),
            dirty: doc
                .dirty_locs()
                .into_iter()
                .map(|l| DirtyEntry { path: print_path(&doc.path_of(l.node)), slot: l.slot.name().into() })
                .collect(),
            cursor: print_path(&self.cursor),
            errors: snap.error_count(),
            quiescent: doc.is_quiescent(),
            stepped: None,
            steps: None,
        }
    }
}
