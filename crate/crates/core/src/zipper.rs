//! A plain zipper over bare expressions: the from-scratch baseline's
//! editor state.

use crate::action::{perform_simple, ActionError, SimpleAction};
use crate::syntax::{Child, Expr};

#[derive(Clone, Debug)]
struct Frame {
    parent: Expr,
    at: Child,
}

#[derive(Clone, Debug)]
pub struct Zipper {
    focus: Expr,
    up: Vec<Frame>,
}

impl Zipper {
    pub fn new(e: Expr) -> Zipper {
        Zipper { focus: e, up: Vec::new() }
    }

    pub fn focus(&self) -> &Expr {
        &self.focus
    }

    pub fn depth(&self) -> usize {
        self.up.len()
    }

    /// Moves into child `c`. The child's slot in the parent holds a hole
    /// while focused.
    pub fn down(&mut self, c: Child) -> bool {
        let Some(slot) = self.focus.child_mut(c) else {
            return false;
        };
        let child = std::mem::replace(slot, Expr::Hole);
        let parent = std::mem::replace(&mut self.focus, child);
        self.up.push(Frame { parent, at: c });
        true
    }

    pub fn up(&mut self) -> bool {
        let Some(Frame { mut parent, at }) = self.up.pop() else {
            return false;
        };
        let slot = parent.child_mut(at).expect("frame child exists");
        *slot = std::mem::replace(&mut self.focus, Expr::Hole);
        self.focus = parent;
        true
    }

    pub fn to_root(&mut self) -> &Expr {
        while self.up() {}
        &self.focus
    }

    /// Moves from the root along `path`.
    pub fn move_to(&mut self, path: &[Child]) -> Result<(), ActionError> {
        self.to_root();
        for &c in path {
            if !self.down(c) {
                self.to_root();
                return Err(ActionError::PathInvalid(crate::action::print_path(path)));
            }
        }
        Ok(())
    }

    pub fn perform(&mut self, a: &SimpleAction) -> Result<(), ActionError> {
        perform_simple(&mut self.focus, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_expr, print_expr};

    #[test]
    fn edit_in_place() {
        let e = parse_expr("(ap (lam x num (var x)) (num 1))").unwrap();
        let mut z = Zipper::new(e);
        z.move_to(&[Child::One, Child::One]).unwrap();
        assert_eq!(z.depth(), 2);
        z.perform(&SimpleAction::WrapAsc).unwrap();
        assert_eq!(print_expr(z.to_root()), "(ap (lam x num (asc (var x) ?)) (num 1))");
        assert!(z.move_to(&[Child::Three]).is_err());
    }
}
