//! Incremental bidirectional type checking for a gradually typed lambda
//! calculus with holes.
//!
//! [`engine::Doc`] keeps a decorated tree up to date under structural edits
//! by propagating dirty types through a priority-ordered frontier.
//! [`reference`] holds the from-scratch marking used as the oracle.

pub mod action;
pub mod bench;
pub mod binder;
pub mod engine;
pub mod gen;
pub mod om;
pub mod reference;
pub mod side;
pub mod splay;
pub mod syntax;
pub mod text;
pub mod zipper;
