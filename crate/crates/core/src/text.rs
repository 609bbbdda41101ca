//! Canonical s-expression text format for types, bare expressions and
//! decorated programs.
//!
//! Decorated nodes print as the bare constructor followed by a suffix
//! `{ana=<t|none>, mark=ok|err, syn=<t|none>, dirty=<set>}`. Per-form marks
//! sit in brackets right after the head symbol (`(ap [err] ...)`), and the
//! dirty set lists `ana`, `ty` (surface type) and `syn` joined by `+`, or
//! `none`. Marked programs without dirty tracking omit the `dirty` key.

use std::fmt::Write as _;

use thiserror::Error;

use crate::syntax::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at byte {pos}: expected {expected}, found {found}")]
pub struct ParseError {
    pub pos: usize,
    pub expected: String,
    pub found: String,
}

pub fn print_type(t: &Type) -> String {
    let mut s = String::new();
    write_type(&mut s, t);
    s
}

pub fn print_type_opt(t: &TypeOpt) -> String {
    match t {
        None => "none".to_string(),
        Some(t) => print_type(t),
    }
}

fn write_type(s: &mut String, t: &Type) {
    match t {
        Type::Unknown => s.push('?'),
        Type::Num => s.push_str("num"),
        Type::Bool => s.push_str("bool"),
        Type::Arrow(a, b) | Type::Prod(a, b) => {
            s.push_str(if matches!(t, Type::Arrow(..)) { "(arrow " } else { "(prod " });
            write_type(s, a);
            s.push(' ');
            write_type(s, b);
            s.push(')');
        }
        Type::List(a) => {
            s.push_str("(list ");
            write_type(s, a);
            s.push(')');
        }
    }
}

fn write_binding(s: &mut String, b: &Binding) {
    match b {
        Binding::Hole => s.push('?'),
        Binding::Name(x) => s.push_str(x),
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn write_expr(s: &mut String, e: &Expr) {
    match e {
        Expr::Hole => s.push('?'),
        Expr::Nil => s.push_str("nil"),
        Expr::Var(x) => {
            let _ = write!(s, "(var {x})");
        }
        Expr::Num(n) => {
            let _ = write!(s, "(num {n})");
        }
        Expr::Bool(b) => {
            let _ = write!(s, "(bool {b})");
        }
        Expr::Lam(b, t, body) => {
            s.push_str("(lam ");
            write_binding(s, b);
            s.push(' ');
            write_type(s, t);
            s.push(' ');
            write_expr(s, body);
            s.push(')');
        }
        Expr::Asc(body, t) => {
            s.push_str("(asc ");
            write_expr(s, body);
            s.push(' ');
            write_type(s, t);
            s.push(')');
        }
        Expr::Ap(a, b) | Expr::Pair(a, b) | Expr::Cons(a, b) => {
            let head = match e {
                Expr::Ap(..) => "ap",
                Expr::Pair(..) => "pair",
                _ => "cons",
            };
            let _ = write!(s, "({head} ");
            write_expr(s, a);
            s.push(' ');
            write_expr(s, b);
            s.push(')');
        }
        Expr::Fst(a) | Expr::Snd(a) => {
            s.push_str(if matches!(e, Expr::Fst(_)) { "(fst " } else { "(snd " });
            write_expr(s, a);
            s.push(')');
        }
        Expr::Case { scrut, nil, hd, tl, cons } => {
            s.push_str("(case ");
            write_expr(s, scrut);
            s.push(' ');
            write_expr(s, nil);
            s.push(' ');
            write_binding(s, hd);
            s.push(' ');
            write_binding(s, tl);
            s.push(' ');
            write_expr(s, cons);
            s.push(')');
        }
    }
}

fn mark_word(m: Mark) -> &'static str {
    match m {
        Mark::Ok => "ok",
        Mark::Err => "err",
    }
}

pub fn print_program<D: Dirtiness>(p: &AnaExp<D>) -> String {
    let mut s = String::new();
    write_ana(&mut s, p);
    s
}

fn write_ana<D: Dirtiness>(s: &mut String, p: &AnaExp<D>) {
    let mut surface_dirty = false;
    match &p.con {
        Con::Hole => s.push('?'),
        Con::Nil => s.push_str("nil"),
        Con::Num(n) => {
            let _ = write!(s, "(num {n})");
        }
        Con::Bool(b) => {
            let _ = write!(s, "(bool {b})");
        }
        Con::Var { name, free } => {
            let _ = write!(s, "(var {name} [{}])", mark_word(*free));
        }
        Con::Lam { binder, ann, non_arrow, dom, body } => {
            s.push_str("(lam ");
            write_binding(s, binder);
            s.push(' ');
            write_type(s, &ann.ty);
            let _ = write!(s, " [{} {}] ", mark_word(*non_arrow), mark_word(*dom));
            write_ana(s, body);
            s.push(')');
            surface_dirty = ann.dirty.is_dirty();
        }
        Con::Asc { body, ty } => {
            s.push_str("(asc ");
            write_ana(s, body);
            s.push(' ');
            write_type(s, &ty.ty);
            s.push(')');
            surface_dirty = ty.dirty.is_dirty();
        }
        Con::Ap { mark, fun, arg } => {
            let _ = write!(s, "(ap [{}] ", mark_word(*mark));
            write_ana(s, fun);
            s.push(' ');
            write_ana(s, arg);
            s.push(')');
        }
        Con::Pair(a, b) | Con::Cons(a, b) => {
            s.push_str(if matches!(p.con, Con::Pair(..)) { "(pair " } else { "(cons " });
            write_ana(s, a);
            s.push(' ');
            write_ana(s, b);
            s.push(')');
        }
        Con::Fst { mark, e } | Con::Snd { mark, e } => {
            let head = if matches!(p.con, Con::Fst { .. }) { "fst" } else { "snd" };
            let _ = write!(s, "({head} [{}] ", mark_word(*mark));
            write_ana(s, e);
            s.push(')');
        }
        Con::Case { mark, scrut, nil, hd, tl, cons } => {
            let _ = write!(s, "(case [{}] ", mark_word(*mark));
            write_ana(s, scrut);
            s.push(' ');
            write_ana(s, nil);
            s.push(' ');
            write_binding(s, hd);
            s.push(' ');
            write_binding(s, tl);
            s.push(' ');
            write_ana(s, cons);
            s.push(')');
        }
    }
    let _ = write!(
        s,
        "{{ana={}, mark={}, syn={}",
        print_type_opt(&p.ana.ty),
        mark_word(p.mark),
        print_type_opt(&p.syn.ty)
    );
    if D::TRACKED {
        let mut parts = Vec::new();
        if p.ana.dirty.is_dirty() {
            parts.push("ana");
        }
        if surface_dirty {
            parts.push("ty");
        }
        if p.syn.dirty.is_dirty() {
            parts.push("syn");
        }
        let set = if parts.is_empty() { "none".to_string() } else { parts.join("+") };
        let _ = write!(s, ", dirty={set}");
    }
    s.push('}');
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Open,
    Close,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Comma,
    Eq,
    Plus,
    Question,
    Atom(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Open => "'('".into(),
            Tok::Close => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LBrack => "'['".into(),
            Tok::RBrack => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Eq => "'='".into(),
            Tok::Plus => "'+'".into(),
            Tok::Question => "'?'".into(),
            Tok::Atom(a) => format!("'{a}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
}

fn is_atom_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// Lexical class of identifiers: `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => cs.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                it.next();
                continue;
            }
            '(' => Tok::Open,
            ')' => Tok::Close,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '+' => Tok::Plus,
            '?' => Tok::Question,
            c if is_atom_char(c) => {
                let mut a = String::new();
                while let Some(&(_, c)) = it.peek() {
                    if !is_atom_char(c) {
                        break;
                    }
                    a.push(c);
                    it.next();
                }
                out.push((i, Tok::Atom(a)));
                continue;
            }
            other => {
                return Err(ParseError { pos: i, expected: "a token".into(), found: format!("'{other}'") });
            }
        };
        it.next();
        out.push((i, tok));
    }
    out.push((src.len(), Tok::Eof));
    Ok(out)
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(src)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].1
    }

    fn err<T>(&self, expected: &str) -> Result<T, ParseError> {
        let (pos, tok) = &self.toks[self.i];
        Err(ParseError { pos: *pos, expected: expected.to_string(), found: tok.describe() })
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.i].1.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            self.err(&t.describe())
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Atom(a) if a == kw => {
                self.next();
                Ok(())
            }
            _ => self.err(&format!("'{kw}'")),
        }
    }

    fn head(&mut self, expected: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Atom(a) => {
                let a = a.clone();
                self.next();
                Ok(a)
            }
            _ => self.err(expected),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err("end of input")
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Atom(a) if is_identifier(a) => {
                let a = a.clone();
                self.next();
                Ok(a)
            }
            _ => self.err("identifier"),
        }
    }

    fn binding(&mut self) -> Result<Binding, ParseError> {
        if *self.peek() == Tok::Question {
            self.next();
            Ok(Binding::Hole)
        } else {
            Ok(Binding::Name(self.ident()?))
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        match self.peek() {
            Tok::Atom(a) => match a.parse::<i64>() {
                Ok(n) => {
                    self.next();
                    Ok(n)
                }
                Err(_) => self.err("integer"),
            },
            _ => self.err("integer"),
        }
    }

    fn boolean(&mut self) -> Result<bool, ParseError> {
        match self.peek() {
            Tok::Atom(a) if a == "true" || a == "false" => {
                let v = a == "true";
                self.next();
                Ok(v)
            }
            _ => self.err("'true' or 'false'"),
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::Question => {
                self.next();
                Ok(Type::Unknown)
            }
            Tok::Atom(a) if a == "num" => {
                self.next();
                Ok(Type::Num)
            }
            Tok::Atom(a) if a == "bool" => {
                self.next();
                Ok(Type::Bool)
            }
            Tok::Open => {
                self.next();
                let h = self.head("type constructor")?;
                let t = match h.as_str() {
                    "arrow" => Type::arrow(self.ty()?, self.ty()?),
                    "prod" => Type::prod(self.ty()?, self.ty()?),
                    "list" => Type::list(self.ty()?),
                    _ => {
                        self.i -= 1;
                        return self.err("'arrow', 'prod' or 'list'");
                    }
                };
                self.expect(Tok::Close)?;
                Ok(t)
            }
            _ => self.err("type"),
        }
    }

    fn type_opt(&mut self) -> Result<TypeOpt, ParseError> {
        if matches!(self.peek(), Tok::Atom(a) if a == "none") {
            self.next();
            Ok(None)
        } else {
            Ok(Some(self.ty()?))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Question => {
                self.next();
                Ok(Expr::Hole)
            }
            Tok::Atom(a) if a == "nil" => {
                self.next();
                Ok(Expr::Nil)
            }
            Tok::Open => {
                self.next();
                let h = self.head("expression constructor")?;
                let e = match h.as_str() {
                    "var" => Expr::Var(self.ident()?),
                    "lam" => {
                        let b = self.binding()?;
                        let t = self.ty()?;
                        Expr::Lam(b, t, Box::new(self.expr()?))
                    }
                    "ap" => Expr::ap(self.expr()?, self.expr()?),
                    "asc" => {
                        let e = self.expr()?;
                        Expr::asc(e, self.ty()?)
                    }
                    "num" => Expr::Num(self.int()?),
                    "bool" => Expr::Bool(self.boolean()?),
                    "pair" => Expr::Pair(Box::new(self.expr()?), Box::new(self.expr()?)),
                    "fst" => Expr::Fst(Box::new(self.expr()?)),
                    "snd" => Expr::Snd(Box::new(self.expr()?)),
                    "cons" => Expr::Cons(Box::new(self.expr()?), Box::new(self.expr()?)),
                    "case" => {
                        let scrut = Box::new(self.expr()?);
                        let nil = Box::new(self.expr()?);
                        let hd = self.binding()?;
                        let tl = self.binding()?;
                        let cons = Box::new(self.expr()?);
                        Expr::Case { scrut, nil, hd, tl, cons }
                    }
                    _ => {
                        self.i -= 1;
                        return self.err("expression constructor");
                    }
                };
                self.expect(Tok::Close)?;
                Ok(e)
            }
            _ => self.err("expression"),
        }
    }

    fn form_marks(&mut self, n: usize) -> Result<Vec<Mark>, ParseError> {
        self.expect(Tok::LBrack)?;
        let mut ms = Vec::with_capacity(n);
        for _ in 0..n {
            ms.push(self.mark()?);
        }
        self.expect(Tok::RBrack)?;
        Ok(ms)
    }

    fn mark(&mut self) -> Result<Mark, ParseError> {
        match self.peek() {
            Tok::Atom(a) if a == "ok" => {
                self.next();
                Ok(Mark::Ok)
            }
            Tok::Atom(a) if a == "err" => {
                self.next();
                Ok(Mark::Err)
            }
            _ => self.err("'ok' or 'err'"),
        }
    }

    fn ana<D: Dirtiness>(&mut self) -> Result<AnaExp<D>, ParseError> {
        let b = |p: &mut Parser| p.ana::<D>().map(Box::new);
        let d0 = D::from_dirty(false);
        let mut surface: Option<Type> = None;
        let con: Con<D> = match self.peek().clone() {
            Tok::Question => {
                self.next();
                Con::Hole
            }
            Tok::Atom(a) if a == "nil" => {
                self.next();
                Con::Nil
            }
            Tok::Open => {
                self.next();
                let h = self.head("expression constructor")?;
                let c = match h.as_str() {
                    "var" => {
                        let name = self.ident()?;
                        let free = self.form_marks(1)?[0];
                        Con::Var { name, free }
                    }
                    "lam" => {
                        let binder = self.binding()?;
                        let t = self.ty()?;
                        let ms = self.form_marks(2)?;
                        let body = b(self)?;
                        surface = Some(t.clone());
                        Con::Lam { binder, ann: Surface { ty: t, dirty: d0 }, non_arrow: ms[0], dom: ms[1], body }
                    }
                    "asc" => {
                        let body = b(self)?;
                        let t = self.ty()?;
                        surface = Some(t.clone());
                        Con::Asc { body, ty: Surface { ty: t, dirty: d0 } }
                    }
                    "ap" => {
                        let mark = self.form_marks(1)?[0];
                        Con::Ap { mark, fun: b(self)?, arg: b(self)? }
                    }
                    "num" => Con::Num(self.int()?),
                    "bool" => Con::Bool(self.boolean()?),
                    "pair" => Con::Pair(b(self)?, b(self)?),
                    "cons" => Con::Cons(b(self)?, b(self)?),
                    "fst" => {
                        let mark = self.form_marks(1)?[0];
                        Con::Fst { mark, e: b(self)? }
                    }
                    "snd" => {
                        let mark = self.form_marks(1)?[0];
                        Con::Snd { mark, e: b(self)? }
                    }
                    "case" => {
                        let mark = self.form_marks(1)?[0];
                        let scrut = b(self)?;
                        let nil = b(self)?;
                        let hd = self.binding()?;
                        let tl = self.binding()?;
                        let cons = b(self)?;
                        Con::Case { mark, scrut, nil, hd, tl, cons }
                    }
                    _ => {
                        self.i -= 1;
                        return self.err("expression constructor");
                    }
                };
                self.expect(Tok::Close)?;
                c
            }
            _ => return self.err("expression"),
        };
        self.expect(Tok::LBrace)?;
        self.keyword("ana")?;
        self.expect(Tok::Eq)?;
        let ana = self.type_opt()?;
        self.expect(Tok::Comma)?;
        self.keyword("mark")?;
        self.expect(Tok::Eq)?;
        let mark = self.mark()?;
        self.expect(Tok::Comma)?;
        self.keyword("syn")?;
        self.expect(Tok::Eq)?;
        let syn = self.type_opt()?;
        let (mut da, mut dt, mut ds) = (false, false, false);
        if D::TRACKED {
            self.expect(Tok::Comma)?;
            self.keyword("dirty")?;
            self.expect(Tok::Eq)?;
            if matches!(self.peek(), Tok::Atom(a) if a == "none") {
                self.next();
            } else {
                loop {
                    match self.peek() {
                        Tok::Atom(a) if a == "ana" => da = true,
                        Tok::Atom(a) if a == "syn" => ds = true,
                        Tok::Atom(a) if a == "ty" && surface.is_some() => dt = true,
                        _ => return self.err("'ana', 'ty' or 'syn'"),
                    }
                    self.next();
                    if *self.peek() != Tok::Plus {
                        break;
                    }
                    self.next();
                }
            }
        }
        self.expect(Tok::RBrace)?;
        let mut con = con;
        match &mut con {
            Con::Lam { ann, .. } => ann.dirty = D::from_dirty(dt),
            Con::Asc { ty, .. } => ty.dirty = D::from_dirty(dt),
            _ => {}
        }
        Ok(AnaExp {
            ana: Slot { ty: ana, dirty: D::from_dirty(da) },
            mark,
            syn: Slot { ty: syn, dirty: D::from_dirty(ds) },
            con,
        })
    }
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a decorated program. With `D = DirtyBit` the `dirty` key is required.
pub fn parse_program<D: Dirtiness>(src: &str) -> Result<AnaExp<D>, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.ana()?;
    p.finish()?;
    Ok(e)
}

/// Parses a binding (`?` or identifier).
pub fn parse_binding(src: &str) -> Result<Binding, ParseError> {
    let mut p = Parser::new(src)?;
    let b = p.binding()?;
    p.finish()?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_round_trip() {
        let src = "(lam x (arrow bool num) (ap (var x) (num 1)))";
        let e = parse_expr(src).unwrap();
        assert_eq!(print_expr(&e), src);
        let src = "(case (cons (num -3) nil) (pair (bool true) ?) h t (fst (asc (var t) (list (prod ? num)))))";
        assert_eq!(print_expr(&parse_expr(src).unwrap()), src);
        assert_eq!(parse_expr(" ? ").unwrap(), Expr::Hole);
    }

    #[test]
    fn parse_errors_report_position() {
        let err = parse_expr("(ap (var x)").unwrap_err();
        assert_eq!(err.pos, 11);
        assert_eq!(err.found, "end of input");
        let err = parse_expr("(lam 1x ? ?)").unwrap_err();
        assert_eq!(err.expected, "identifier");
        assert!(parse_expr("? ?").is_err());
        assert!(parse_type("(arrow num)").is_err());
    }

    #[test]
    fn decorated_round_trip() {
        let src = "(ap [ok] (var x [err]){ana=none, mark=ok, syn=?, dirty=ana+syn} \
                   (num 1){ana=?, mark=ok, syn=num, dirty=none}){ana=none, mark=ok, syn=?, dirty=syn}";
        let p: IncrProgram = parse_program(src).unwrap();
        assert_eq!(print_program(&p), src.split_whitespace().collect::<Vec<_>>().join(" "));
        let lam = "(lam x (arrow bool num) [ok ok] ?{ana=none, mark=ok, syn=?, dirty=none}){ana=none, mark=ok, syn=(arrow (arrow bool num) ?), dirty=ana+ty}";
        let p: IncrProgram = parse_program(lam).unwrap();
        match &p.con {
            Con::Lam { ann, .. } => assert_eq!(ann.dirty, DirtyBit::Dirty),
            _ => panic!(),
        }
        assert_eq!(print_program(&p), lam);
        let m: MarkedProgram = parse_program("?{ana=none, mark=ok, syn=?}").unwrap();
        assert_eq!(print_program(&m), "?{ana=none, mark=ok, syn=?}");
        assert!(parse_program::<DirtyBit>("?{ana=none, mark=ok, syn=?}").is_err());
    }
}
