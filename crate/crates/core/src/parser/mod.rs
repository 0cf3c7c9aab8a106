//! Parser for `.flc` source text.
//!
//! Declarations are separated by `;` or by starting a new line in column
//! one; indented lines continue the previous declaration. Parsing happens
//! in two phases: a surface tree is built first, then names are resolved
//! against the program's constructors and functions (which may be used
//! before they are defined).

mod lexer;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;

use crate::ast::{
    prelude, tuple_ctor, Branch, Constraint, CtorDecl, DataDecl, Expr, FuncDef, Mode, Name, Pattern, Program, Rule,
    Type, VarOccurrences, CONS, MAX_TUPLE, NIL,
};
use crate::desugar::flatten_rule;
use lexer::{tokenize, Tok, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourcePos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub pos: SourcePos,
    pub expected: BTreeSet<String>,
    pub found: String,
}

impl ParseError {
    pub fn new<S: Into<String>>(
        pos: SourcePos,
        expected: impl IntoIterator<Item = S>,
        found: impl Into<String>,
    ) -> Self {
        let expected: BTreeSet<String> = expected.into_iter().map(Into::into).collect();
        debug_assert!(!expected.is_empty());
        ParseError { pos, expected, found: found.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<&str> = self.expected.iter().map(String::as_str).collect();
        let expected = match items.as_slice() {
            [] => String::new(),
            [one] => (*one).to_string(),
            [init @ .., last] => format!("{} or {last}", init.join(", ")),
        };
        write!(f, "{}: expected {expected}, found {}", self.pos, self.found)
    }
}

impl std::error::Error for ParseError {}

type PResult<T> = Result<T, ParseError>;

/// A query: an expression plus the free variables it declares with a
/// trailing `where … free`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub goal: Goal,
    pub free_vars: BTreeSet<Name>,
}

/// What a query asks for: the values of an expression, or the solutions
/// of a constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Goal {
    Expr(Expr),
    Constraint(Constraint),
}

impl Query {
    pub fn expr(&self) -> Option<&Expr> {
        match &self.goal {
            Goal::Expr(e) => Some(e),
            Goal::Constraint(_) => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Surface syntax

#[derive(Clone, Debug)]
enum S {
    Ident(String, SourcePos),
    Upper(String, SourcePos),
    Section(String, SourcePos),
    Failed(SourcePos),
    App(Box<S>, Vec<S>),
    Infix(String, SourcePos, Box<S>, Box<S>),
    Tuple(Vec<S>, SourcePos),
    List(Vec<S>, SourcePos),
    Case(Box<S>, Vec<SBranch>, SourcePos),
}

impl S {
    fn pos(&self) -> SourcePos {
        match self {
            S::Ident(_, p) | S::Upper(_, p) | S::Section(_, p) | S::Failed(p) | S::Tuple(_, p) | S::List(_, p) => *p,
            S::Case(_, _, p) => *p,
            S::App(h, _) => h.pos(),
            S::Infix(_, _, l, _) => l.pos(),
        }
    }

    fn describe(&self) -> String {
        match self {
            S::Ident(s, _) => format!("`{s}`"),
            S::Upper(s, _) => format!("constructor `{s}`"),
            S::Section(s, _) => format!("`({s})`"),
            S::Failed(_) => "`failed`".into(),
            S::App(..) => "application".into(),
            S::Infix(op, ..) => format!("`{op}` expression"),
            S::Tuple(..) => "tuple".into(),
            S::List(..) => "list".into(),
            S::Case(..) => "case expression".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct SBranch {
    pattern: S,
    guards: Vec<SConstraint>,
    body: S,
}

#[derive(Clone, Debug)]
struct SConstraint {
    mode: Mode,
    lhs: S,
    rhs: S,
}

#[derive(Clone, Debug)]
enum SDecl {
    Data { name: String, pos: SourcePos, params: Vec<String>, ctors: Vec<(String, SourcePos, Vec<Type>)> },
    Sig { name: String, pos: SourcePos, ty: Type },
    Rule { head: S, guards: Vec<SConstraint>, body: S, free: Vec<(String, SourcePos)> },
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        Ok(Parser { toks: tokenize(text)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> SourcePos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if t.tok != Tok::Eof {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<S: Into<String>>(&self, expected: impl IntoIterator<Item = S>) -> ParseError {
        ParseError::new(self.pos(), expected, self.peek().to_string())
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error([t.to_string()]))
        }
    }

    fn at_separator(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Semi | Tok::Eof)
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek(), Tok::Newline | Tok::Semi) {
            self.bump();
        }
    }

    fn recover(&mut self) {
        while !self.at_separator() {
            self.bump();
        }
    }

    fn decls(&mut self) -> (Vec<SDecl>, Vec<ParseError>) {
        let mut decls = Vec::new();
        let mut errors = Vec::new();
        loop {
            self.skip_separators();
            if *self.peek() == Tok::Eof {
                break;
            }
            match self.decl() {
                Ok(d) if self.at_separator() => decls.push(d),
                Ok(_) => {
                    errors.push(self.error(["end of declaration"]));
                    self.recover();
                }
                Err(e) => {
                    errors.push(e);
                    self.recover();
                }
            }
        }
        (decls, errors)
    }

    fn decl(&mut self) -> PResult<SDecl> {
        if *self.peek() == Tok::Data {
            return self.data_decl();
        }
        let head = self.op_expr()?;
        if self.eat(&Tok::DColon) {
            let ty = self.ty()?;
            return match head {
                S::Ident(name, pos) | S::Section(name, pos) => Ok(SDecl::Sig { name, pos, ty }),
                other => Err(ParseError::new(other.pos(), ["function name"], other.describe())),
            };
        }
        let guards = if self.eat(&Tok::Bar) { self.constraints()? } else { vec![] };
        if *self.peek() != Tok::Equals {
            let mut expected = vec!["`=`"];
            if guards.is_empty() {
                expected.extend(["`|`", "`::`"]);
            }
            return Err(self.error(expected));
        }
        self.bump();
        let body = self.expr()?;
        let mut free = Vec::new();
        if self.eat(&Tok::Where) {
            loop {
                let pos = self.pos();
                match self.bump().tok {
                    Tok::Ident(v) => free.push((v, pos)),
                    other => return Err(ParseError::new(pos, ["variable"], other.to_string())),
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Free)?;
        }
        Ok(SDecl::Rule { head, guards, body, free })
    }

    fn data_decl(&mut self) -> PResult<SDecl> {
        self.bump();
        let pos = self.pos();
        let name = match self.bump().tok {
            Tok::Upper(n) => n,
            other => return Err(ParseError::new(pos, ["type name"], other.to_string())),
        };
        let mut params = Vec::new();
        while let Tok::Ident(p) = self.peek().clone() {
            self.bump();
            params.push(p);
        }
        let mut ctors = Vec::new();
        if self.eat(&Tok::Equals) {
            loop {
                let cpos = self.pos();
                let cname = match self.bump().tok {
                    Tok::Upper(n) => n,
                    other => return Err(ParseError::new(cpos, ["constructor name"], other.to_string())),
                };
                let mut fields = Vec::new();
                while self.starts_atype() {
                    fields.push(self.atype()?);
                }
                ctors.push((cname, cpos, fields));
                if !self.eat(&Tok::Bar) {
                    break;
                }
            }
        }
        Ok(SDecl::Data { name, pos, params, ctors })
    }

    fn starts_atype(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::Upper(_) | Tok::LParen | Tok::LBracket)
    }

    fn ty(&mut self) -> PResult<Type> {
        let lhs = self.btype()?;
        if self.eat(&Tok::Arrow) {
            Ok(Type::Fun(Box::new(lhs), Box::new(self.ty()?)))
        } else {
            Ok(lhs)
        }
    }

    fn btype(&mut self) -> PResult<Type> {
        if let Tok::Upper(n) = self.peek().clone() {
            self.bump();
            let mut args = Vec::new();
            while self.starts_atype() {
                args.push(self.atype()?);
            }
            return Ok(Type::Con(Name::new(n), args));
        }
        self.atype()
    }

    fn atype(&mut self) -> PResult<Type> {
        let pos = self.pos();
        match self.bump().tok {
            Tok::Ident(v) => Ok(Type::Var(v)),
            Tok::Upper(n) => Ok(Type::Con(Name::new(n), vec![])),
            Tok::LBracket => {
                let t = self.ty()?;
                self.expect(Tok::RBracket)?;
                Ok(Type::list(t))
            }
            Tok::LParen => {
                let mut items = vec![self.ty()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.ty()?);
                }
                self.expect(Tok::RParen)?;
                match items.len() {
                    1 => Ok(items.pop().unwrap()),
                    n if n <= MAX_TUPLE => Ok(Type::tuple(items)),
                    _ => {
                        Err(ParseError::new(pos, ["at most 8 tuple components"], format!("{} components", items.len())))
                    }
                }
            }
            other => Err(ParseError::new(pos, ["type"], other.to_string())),
        }
    }

    fn expr(&mut self) -> PResult<S> {
        if *self.peek() == Tok::Case {
            let pos = self.pos();
            self.bump();
            let scrut = self.op_expr()?;
            self.expect(Tok::Of)?;
            let mut branches = Vec::new();
            if self.eat(&Tok::LBrace) {
                loop {
                    while matches!(self.peek(), Tok::Semi | Tok::Newline) {
                        self.bump();
                    }
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    branches.push(self.branch()?);
                    if !matches!(self.peek(), Tok::Semi | Tok::Newline | Tok::RBrace) {
                        return Err(self.error(["`;`", "`}`"]));
                    }
                }
                if branches.is_empty() {
                    return Err(ParseError::new(pos, ["case branch"], "`}`"));
                }
            } else {
                branches.push(self.branch()?);
            }
            return Ok(S::Case(Box::new(scrut), branches, pos));
        }
        self.op_expr()
    }

    fn branch(&mut self) -> PResult<SBranch> {
        let pattern = self.op_expr()?;
        let guards = if self.eat(&Tok::Bar) { self.constraints()? } else { vec![] };
        self.expect(Tok::Arrow)?;
        let body = self.expr()?;
        Ok(SBranch { pattern, guards, body })
    }

    fn constraints(&mut self) -> PResult<Vec<SConstraint>> {
        let mut out = vec![self.constraint()?];
        while self.eat(&Tok::Comma) {
            out.push(self.constraint()?);
        }
        Ok(out)
    }

    fn constraint(&mut self) -> PResult<SConstraint> {
        let lhs = self.op_expr()?;
        let mode = match self.peek() {
            Tok::StrictEq => Mode::Strict,
            Tok::NonStrictEq => Mode::NonStrict,
            _ => return Err(self.error(["`=:=`", "`=:<=`"])),
        };
        self.bump();
        let rhs = self.op_expr()?;
        Ok(SConstraint { mode, lhs, rhs })
    }

    fn op_expr(&mut self) -> PResult<S> {
        let lhs = self.cons_expr()?;
        if let Tok::Op(op) = self.peek().clone() {
            let pos = self.pos();
            self.bump();
            let rhs = self.op_expr()?;
            return Ok(S::Infix(op, pos, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn cons_expr(&mut self) -> PResult<S> {
        let lhs = self.app_expr()?;
        if *self.peek() == Tok::Cons {
            let pos = self.pos();
            self.bump();
            let rhs = self.cons_expr()?;
            return Ok(S::Infix(CONS.into(), pos, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Upper(_) | Tok::Section(_) | Tok::Failed | Tok::LParen | Tok::LBracket
        )
    }

    fn app_expr(&mut self) -> PResult<S> {
        if !self.starts_atom() {
            return Err(self.error(["expression"]));
        }
        let head = self.atom()?;
        let mut args = Vec::new();
        while self.starts_atom() {
            args.push(self.atom()?);
        }
        Ok(if args.is_empty() { head } else { S::App(Box::new(head), args) })
    }

    fn atom(&mut self) -> PResult<S> {
        let pos = self.pos();
        match self.bump().tok {
            Tok::Ident(s) => Ok(S::Ident(s, pos)),
            Tok::Upper(s) => Ok(S::Upper(s, pos)),
            Tok::Section(s) => Ok(S::Section(s, pos)),
            Tok::Failed => Ok(S::Failed(pos)),
            Tok::LParen => {
                if *self.peek() == Tok::RParen {
                    return Err(self.error(["expression"]));
                }
                let mut items = vec![self.expr()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.expr()?);
                }
                self.expect(Tok::RParen)?;
                match items.len() {
                    1 => Ok(items.pop().unwrap()),
                    n if n <= MAX_TUPLE => Ok(S::Tuple(items, pos)),
                    n => Err(ParseError::new(pos, ["at most 8 tuple components"], format!("{n} components"))),
                }
            }
            Tok::LBracket => {
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    items.push(self.expr()?);
                    while self.eat(&Tok::Comma) {
                        items.push(self.expr()?);
                    }
                    self.expect(Tok::RBracket)?;
                }
                Ok(S::List(items, pos))
            }
            other => Err(ParseError::new(pos, ["expression"], other.to_string())),
        }
    }
}

// ---------------------------------------------------------------------------
// Resolution

struct Resolver {
    ctors: HashMap<String, usize>,
    funcs: HashMap<String, usize>,
    errors: Vec<ParseError>,
}

fn plural(n: usize) -> String {
    if n == 1 {
        "1 argument".into()
    } else {
        format!("{n} arguments")
    }
}

impl Resolver {
    fn for_program(p: &Program) -> Self {
        Resolver {
            ctors: p.all_data_decls().flat_map(|d| &d.constructors).map(|c| (c.name.to_string(), c.arity())).collect(),
            funcs: p.funcs.values().map(|f| (f.name.to_string(), f.arity)).collect(),
            errors: Vec::new(),
        }
    }

    fn err<S: Into<String>>(
        &mut self,
        pos: SourcePos,
        expected: impl IntoIterator<Item = S>,
        found: impl Into<String>,
    ) {
        self.errors.push(ParseError::new(pos, expected, found));
    }

    fn check_ctor(&mut self, name: &str, pos: SourcePos, nargs: usize) {
        match self.ctors.get(name) {
            None => self.err(pos, ["known constructor"], format!("`{name}`")),
            Some(&arity) if arity != nargs => self.err(pos, [format!("{} for `{name}`", plural(arity))], plural(nargs)),
            Some(_) => {}
        }
    }

    /// Returns `false` (after reporting) when `name` is not a function of
    /// the given arity.
    fn check_func(&mut self, name: &str, pos: SourcePos, nargs: usize) -> bool {
        match self.funcs.get(name) {
            None => {
                self.err(pos, ["known function"], format!("`{name}`"));
                false
            }
            Some(&arity) if arity != nargs => {
                self.err(pos, [format!("{} for `{name}` (first-order application)", plural(arity))], plural(nargs));
                false
            }
            Some(_) => true,
        }
    }

    fn pattern(&mut self, s: &S) -> Pattern {
        match s {
            S::Ident(v, _) => Pattern::Var(Name::new(v.clone())),
            S::Upper(c, pos) => {
                self.check_ctor(c, *pos, 0);
                Pattern::Ctor(Name::new(c.clone()), vec![])
            }
            S::Section(op, pos) => {
                self.check_func(op, *pos, 0);
                Pattern::FunCall(Name::new(op.clone()), vec![])
            }
            S::App(head, args) => {
                let ps: Vec<Pattern> = args.iter().map(|a| self.pattern(a)).collect();
                match &**head {
                    S::Upper(c, pos) => {
                        self.check_ctor(c, *pos, ps.len());
                        Pattern::Ctor(Name::new(c.clone()), ps)
                    }
                    S::Ident(f, pos) | S::Section(f, pos) => {
                        self.check_func(f, *pos, ps.len());
                        Pattern::FunCall(Name::new(f.clone()), ps)
                    }
                    other => {
                        self.err(other.pos(), ["constructor or function name"], other.describe());
                        Pattern::Ctor(Name::new("?"), ps)
                    }
                }
            }
            S::Infix(op, pos, l, r) => {
                let ps = vec![self.pattern(l), self.pattern(r)];
                if op == CONS {
                    Pattern::Ctor(Name::new(CONS), ps)
                } else {
                    self.check_func(op, *pos, 2);
                    Pattern::FunCall(Name::new(op.clone()), ps)
                }
            }
            S::Tuple(items, _) => {
                Pattern::Ctor(tuple_ctor(items.len()), items.iter().map(|i| self.pattern(i)).collect())
            }
            S::List(items, _) => items.iter().rev().fold(Pattern::Ctor(Name::new(NIL), vec![]), |acc, i| {
                Pattern::Ctor(Name::new(CONS), vec![self.pattern(i), acc])
            }),
            S::Failed(pos) => {
                self.err(*pos, ["pattern"], "`failed`");
                Pattern::Var(Name::new("failed"))
            }
            S::Case(_, _, pos) => {
                self.err(*pos, ["pattern"], "case expression");
                Pattern::Var(Name::new("case"))
            }
        }
    }

    /// Reports every repeated variable of a pattern sequence at its
    /// position.
    fn check_linear(&mut self, terms: &[&S], bound: &BTreeSet<Name>) {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for t in terms {
            for (v, pos) in surface_vars(t) {
                if bound.contains(&Name::new(v.clone())) {
                    self.err(pos, ["fresh pattern variable"], format!("`{v}`, already bound"));
                } else if !seen.insert(v.clone()) {
                    self.err(pos, ["linear pattern"], format!("repeated variable `{v}`"));
                }
            }
        }
    }

    fn expr(&mut self, s: &S, scope: &BTreeSet<Name>) -> Expr {
        match s {
            S::Ident(v, pos) => {
                let name = Name::new(v.clone());
                if scope.contains(&name) {
                    Expr::Var(name)
                } else if self.funcs.contains_key(v) {
                    self.check_func(v, *pos, 0);
                    Expr::App(name, vec![])
                } else {
                    self.err(*pos, ["bound variable"], format!("`{v}`"));
                    Expr::Var(name)
                }
            }
            S::Upper(c, pos) => {
                self.check_ctor(c, *pos, 0);
                Expr::Ctor(Name::new(c.clone()), vec![])
            }
            S::Section(op, pos) => {
                self.check_func(op, *pos, 0);
                Expr::App(Name::new(op.clone()), vec![])
            }
            S::Failed(_) => Expr::Failed,
            S::App(head, args) => {
                let es: Vec<Expr> = args.iter().map(|a| self.expr(a, scope)).collect();
                match &**head {
                    S::Upper(c, pos) => {
                        self.check_ctor(c, *pos, es.len());
                        Expr::Ctor(Name::new(c.clone()), es)
                    }
                    S::Ident(v, _) if scope.contains(&Name::new(v.clone())) => Expr::VarApp(Name::new(v.clone()), es),
                    S::Ident(f, pos) | S::Section(f, pos) => {
                        self.check_func(f, *pos, es.len());
                        Expr::App(Name::new(f.clone()), es)
                    }
                    other => {
                        self.err(other.pos(), ["first-order application"], other.describe());
                        Expr::Failed
                    }
                }
            }
            S::Infix(op, pos, l, r) => {
                let es = vec![self.expr(l, scope), self.expr(r, scope)];
                if op == CONS {
                    Expr::Ctor(Name::new(CONS), es)
                } else {
                    self.check_func(op, *pos, 2);
                    Expr::App(Name::new(op.clone()), es)
                }
            }
            S::Tuple(items, _) => Expr::tuple(items.iter().map(|i| self.expr(i, scope)).collect()),
            S::List(items, _) => Expr::list(items.iter().map(|i| self.expr(i, scope)).collect()),
            S::Case(scrut, branches, pos) => {
                let scrut = self.expr(scrut, scope);
                let mut roots: BTreeSet<String> = BTreeSet::new();
                let mut out = Vec::new();
                for b in branches {
                    self.check_linear(&[&b.pattern], scope);
                    let pattern = self.pattern(&b.pattern);
                    match &pattern {
                        Pattern::Var(_) if branches.len() == 1 => {}
                        Pattern::Ctor(c, _) if !pattern.is_functional() => {
                            if !roots.insert(c.to_string()) {
                                self.err(
                                    b.pattern.pos(),
                                    ["branch for a different constructor"],
                                    format!("second `{c}` branch"),
                                );
                            }
                        }
                        Pattern::Var(_) => {
                            self.err(b.pattern.pos(), ["constructor pattern"], "variable pattern beside other branches")
                        }
                        _ => self.err(b.pattern.pos(), ["constructor pattern"], "functional pattern in a case branch"),
                    }
                    let mut inner = scope.clone();
                    inner.extend(pattern.vars());
                    let guards = b.guards.iter().map(|g| self.constraint(g, &inner)).collect();
                    let body = self.expr(&b.body, &inner);
                    out.push(Branch { pattern, guards, body });
                }
                let _ = pos;
                Expr::Case(Box::new(scrut), out)
            }
        }
    }

    fn constraint(&mut self, c: &SConstraint, scope: &BTreeSet<Name>) -> Constraint {
        let lhs = self.expr(&c.lhs, scope);
        let rhs = self.expr(&c.rhs, scope);
        if c.mode == Mode::NonStrict && !lhs.is_linear() {
            self.err(c.lhs.pos(), ["linear left side of `=:<=`"], "repeated variable");
        }
        Constraint { mode: c.mode, lhs, rhs }
    }
}

fn surface_vars(s: &S) -> Vec<(String, SourcePos)> {
    let mut out = Vec::new();
    fn go(s: &S, out: &mut Vec<(String, SourcePos)>) {
        match s {
            S::Ident(v, p) => out.push((v.clone(), *p)),
            S::App(h, args) => {
                if !matches!(**h, S::Ident(..)) {
                    go(h, out);
                }
                args.iter().for_each(|a| go(a, out));
            }
            S::Infix(_, _, l, r) => {
                go(l, out);
                go(r, out);
            }
            S::Tuple(items, _) | S::List(items, _) => items.iter().for_each(|i| go(i, out)),
            _ => {}
        }
    }
    go(s, &mut out);
    out
}

/// Splits a rule head into the defined name and its argument terms.
fn split_head(head: &S) -> PResult<(String, SourcePos, Vec<S>)> {
    match head {
        S::Infix(op, pos, l, r) if op != CONS => Ok((op.clone(), *pos, vec![(**l).clone(), (**r).clone()])),
        S::App(h, args) => match &**h {
            S::Ident(f, pos) | S::Section(f, pos) => Ok((f.clone(), *pos, args.clone())),
            other => Err(ParseError::new(other.pos(), ["function name"], other.describe())),
        },
        S::Ident(f, pos) | S::Section(f, pos) => Ok((f.clone(), *pos, vec![])),
        other => Err(ParseError::new(other.pos(), ["function definition"], other.describe())),
    }
}

fn check_type(
    t: &Type,
    pos: SourcePos,
    kinds: &HashMap<String, usize>,
    params: Option<&[String]>,
    errors: &mut Vec<ParseError>,
) {
    match t {
        Type::Var(v) => {
            if let Some(ps) = params {
                if !ps.contains(v) {
                    errors.push(ParseError::new(pos, ["declared type parameter"], format!("`{v}`")));
                }
            }
        }
        Type::Con(n, args) => {
            match kinds.get(n.as_str()) {
                None => errors.push(ParseError::new(pos, ["known type"], format!("`{n}`"))),
                Some(&k) if k != args.len() => errors.push(ParseError::new(
                    pos,
                    [format!("{k} type arguments for `{n}`")],
                    format!("{}", args.len()),
                )),
                Some(_) => {}
            }
            args.iter().for_each(|a| check_type(a, pos, kinds, params, errors));
        }
        Type::Fun(a, b) => {
            check_type(a, pos, kinds, params, errors);
            check_type(b, pos, kinds, params, errors);
        }
    }
}

/// Parses a whole program.
pub fn parse_program(text: &str) -> Result<Program, Vec<ParseError>> {
    let mut parser = Parser::new(text).map_err(|e| vec![e])?;
    let (decls, mut errors) = parser.decls();

    let mut kinds: HashMap<String, usize> =
        prelude().iter().map(|d| (d.type_name.to_string(), d.params.len())).collect();
    let mut program = Program::default();
    for d in &decls {
        if let SDecl::Data { name, pos, params, .. } = d {
            if kinds.insert(name.clone(), params.len()).is_some() {
                errors.push(ParseError::new(*pos, ["new type name"], format!("duplicate type `{name}`")));
            }
        }
    }
    let mut ctor_names: BTreeSet<String> =
        prelude().iter().flat_map(|d| &d.constructors).map(|c| c.name.to_string()).collect();
    for d in &decls {
        if let SDecl::Data { name, pos, params, ctors } = d {
            let mut constructors = Vec::new();
            for (c, cpos, fields) in ctors {
                if !ctor_names.insert(c.clone()) {
                    errors.push(ParseError::new(
                        *cpos,
                        ["new constructor name"],
                        format!("duplicate constructor `{c}`"),
                    ));
                }
                fields.iter().for_each(|t| check_type(t, *cpos, &kinds, Some(params), &mut errors));
                constructors.push(CtorDecl { name: Name::new(c.clone()), fields: fields.clone() });
            }
            let _ = pos;
            program.data_decls.push(DataDecl {
                type_name: Name::new(name.clone()),
                params: params.clone(),
                constructors,
            });
        }
    }

    // Function arities come from rule heads.
    let mut heads: IndexMap<String, (usize, SourcePos)> = IndexMap::new();
    let mut split = Vec::new();
    for d in &decls {
        if let SDecl::Rule { head, .. } = d {
            match split_head(head) {
                Ok((name, pos, args)) => {
                    match heads.get(&name) {
                        Some(&(arity, _)) if arity != args.len() => errors.push(ParseError::new(
                            pos,
                            [format!("{} like the other rules of `{name}`", plural(arity))],
                            plural(args.len()),
                        )),
                        Some(_) => {}
                        None => {
                            heads.insert(name.clone(), (args.len(), pos));
                        }
                    }
                    split.push(Some((name, args)));
                }
                Err(e) => {
                    errors.push(e);
                    split.push(None);
                }
            }
        }
    }
    let mut resolver = Resolver::for_program(&program);
    resolver.funcs = heads.iter().map(|(n, (a, _))| (n.clone(), *a)).collect();

    let mut signatures: HashMap<String, Type> = HashMap::new();
    for d in &decls {
        if let SDecl::Sig { name, pos, ty } = d {
            check_type(ty, *pos, &kinds, None, &mut errors);
            match heads.get(name) {
                None => errors.push(ParseError::new(*pos, ["signature for a defined function"], format!("`{name}`"))),
                Some(&(arity, _)) if ty.split_arrows(arity).is_none() => errors.push(ParseError::new(
                    *pos,
                    [format!("type with {arity} parameters")],
                    format!("signature `{ty}`"),
                )),
                Some(_) => {}
            }
            if signatures.insert(name.clone(), ty.clone()).is_some() {
                errors.push(ParseError::new(
                    *pos,
                    ["one signature per function"],
                    format!("second signature for `{name}`"),
                ));
            }
        }
    }

    for (name, (arity, _)) in &heads {
        program.insert(FuncDef {
            name: Name::new(name.clone()),
            arity: *arity,
            rules: vec![],
            origin: crate::ast::Origin::UserWritten,
            signature: signatures.get(name).cloned(),
        });
    }

    let rules = decls.iter().filter_map(|d| match d {
        SDecl::Rule { guards, body, free, .. } => Some((guards, body, free)),
        _ => None,
    });
    for ((guards, body, free), head) in rules.zip(split) {
        let Some((name, args)) = head else { continue };
        let arg_refs: Vec<&S> = args.iter().collect();
        resolver.check_linear(&arg_refs, &BTreeSet::new());
        let patterns: Vec<Pattern> = args.iter().map(|a| resolver.pattern(a)).collect();
        let mut scope: BTreeSet<Name> = patterns.iter().flat_map(Pattern::vars).collect();
        let mut free_vars = BTreeSet::new();
        for (v, pos) in free {
            let n = Name::new(v.clone());
            if scope.contains(&n) {
                resolver.err(*pos, ["variable not bound by the left-hand side"], format!("`{v}`"));
            } else if !free_vars.insert(n) {
                resolver.err(*pos, ["distinct free variables"], format!("repeated `{v}`"));
            }
        }
        scope.extend(free_vars.iter().cloned());
        let guards = guards.iter().map(|g| resolver.constraint(g, &scope)).collect();
        let body = resolver.expr(body, &scope);
        let rule = flatten_rule(&Rule { patterns, guards, body, free_vars });
        if let Some(f) = program.funcs.get_mut(&Name::new(name)) {
            f.rules.push(rule);
        }
    }
    errors.extend(resolver.errors);

    if errors.is_empty() {
        Ok(program)
    } else {
        errors.sort_by_key(|e| e.pos);
        Err(errors)
    }
}

/// Parses an expression in the context of `program`, with `scope` listing
/// the variables it may mention.
pub fn parse_expr(text: &str, program: &Program, scope: &BTreeSet<Name>) -> Result<Expr, Vec<ParseError>> {
    let mut parser = Parser::new(text).map_err(|e| vec![e])?;
    let s = parser.expr().map_err(|e| vec![e])?;
    if *parser.peek() != Tok::Eof {
        return Err(vec![parser.error(["end of input"])]);
    }
    let mut resolver = Resolver::for_program(program);
    let e = resolver.expr(&s, scope);
    if resolver.errors.is_empty() {
        Ok(e)
    } else {
        Err(resolver.errors)
    }
}

/// Parses `expr` or `lhs =:= rhs` (or `=:<=`), optionally followed by
/// `where x, y free`.
pub fn parse_query(text: &str, program: &Program) -> Result<Query, Vec<ParseError>> {
    let mut parser = Parser::new(text).map_err(|e| vec![e])?;
    let s = parser.expr().map_err(|e| vec![e])?;
    let mode = match parser.peek() {
        Tok::StrictEq => Some(Mode::Strict),
        Tok::NonStrictEq => Some(Mode::NonStrict),
        _ => None,
    };
    let constraint = match mode {
        Some(mode) => {
            parser.bump();
            let rhs = parser.op_expr().map_err(|e| vec![e])?;
            Some(SConstraint { mode, lhs: s.clone(), rhs })
        }
        None => None,
    };
    let mut free_vars = BTreeSet::new();
    if parser.eat(&Tok::Where) {
        loop {
            let pos = parser.pos();
            match parser.bump().tok {
                Tok::Ident(v) => {
                    free_vars.insert(Name::new(v));
                }
                other => return Err(vec![ParseError::new(pos, ["variable"], other.to_string())]),
            }
            if !parser.eat(&Tok::Comma) {
                break;
            }
        }
        parser.expect(Tok::Free).map_err(|e| vec![e])?;
    }
    if *parser.peek() != Tok::Eof {
        return Err(vec![parser.error(["end of input"])]);
    }
    let mut resolver = Resolver::for_program(program);
    let goal = match &constraint {
        Some(c) => Goal::Constraint(resolver.constraint(c, &free_vars)),
        None => Goal::Expr(resolver.expr(&s, &free_vars)),
    };
    if resolver.errors.is_empty() {
        Ok(Query { goal, free_vars })
    } else {
        Err(resolver.errors)
    }
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut parser = Parser::new(text)?;
    let t = parser.ty()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error(["end of type"]));
    }
    Ok(t)
}
