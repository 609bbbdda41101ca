//! The batch commands, as functions from inputs to printable output.

use std::fmt::Write as _;

use incbidi::action::{parse_trace, TraceLine};
use incbidi::engine::Doc;
use incbidi::reference::mark_program;
use incbidi::syntax::Expr;
use incbidi::text::{parse_expr, print_program};

/// Marks a program. Returns the report and the number of error marks.
pub fn check(src: &str) -> Result<(String, usize), String> {
    let e = parse_expr(src).map_err(|e| e.to_string())?;
    let m = mark_program(&e);
    let errors = m.error_count();
    Ok((format!("{}\nerrors: {errors}\n", print_program(&m)), errors))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum StepMode {
    /// Run to quiescence after every action.
    Eager,
    /// One update step after every action, then run at the end.
    PerAction,
    /// Only the trace's own `step` and `run` lines.
    Manual,
}

#[derive(Debug, PartialEq, Eq)]
pub struct TraceFailure {
    pub line: usize,
    pub msg: String,
}

/// Replays a trace from `program` (or `?`) and reports the final snapshot.
pub fn trace(program: Option<&str>, src: &str, mode: StepMode) -> Result<String, TraceFailure> {
    let start = match program {
        Some(p) => parse_expr(p).map_err(|e| TraceFailure { line: 0, msg: format!("program: {e}") })?,
        None => Expr::Hole,
    };
    let lines = parse_trace(src).map_err(|e| TraceFailure { line: e.line, msg: e.msg })?;
    let mut d = Doc::load(&start);
    let mut steps = 0u64;
    let fail = |line, e: &dyn std::fmt::Display| TraceFailure { line, msg: e.to_string() };
    for (line, entry) in lines {
        match entry {
            TraceLine::Action(a) => {
                d.apply(&a).map_err(|e| fail(line, &e))?;
                match mode {
                    StepMode::Eager => steps += d.run_to_quiescence().map_err(|e| fail(line, &e))?.steps,
                    StepMode::PerAction => steps += d.step().is_some() as u64,
                    StepMode::Manual => {}
                }
            }
            TraceLine::Step => steps += d.step().is_some() as u64,
            TraceLine::Run => steps += d.run_to_quiescence().map_err(|e| fail(line, &e))?.steps,
        }
    }
    if mode == StepMode::PerAction {
        steps += d.run_to_quiescence().map_err(|e| fail(0, &e))?.steps;
    }
    let s = d.snapshot();
    let mut out = print_program(&s);
    let _ = write!(
        out,
        "\nsteps: {steps}\nquiescent: {}\ndirty: {}\nerrors: {}\n",
        if d.is_quiescent() { "yes" } else { "no" },
        s.dirty_count(),
        s.error_count()
    );
    Ok(out)
}
