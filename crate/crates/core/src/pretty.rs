//! Rendering of programs as `.flc` source. The output is accepted by the
//! parser and re-parses to the same tree.

use std::fmt::{self, Display, Write};

use crate::ast::{
    tuple_arity, Branch, Constraint, DataDecl, Expr, FuncDef, Mode, Name, Origin, Pattern, Program, Rule, Type, CONS,
    NIL,
};

// Precedence levels: a subterm printed where level `n` is required gets
// parentheses when its own level is lower.
const TOP: u8 = 0;
const OP: u8 = 1;
const CONS_LEVEL: u8 = 2;
const APP: u8 = 3;
const ATOM: u8 = 4;

/// Renders a function name in prefix position: operators become sections
/// (`(++)`, `(++)_inv`).
pub fn prefix_name(name: &Name) -> String {
    if name.is_operator() {
        let text = name.as_str();
        let split = text.find(|c: char| !crate::ast::is_symbol_char(c)).unwrap_or(text.len());
        format!("({}){}", &text[..split], &text[split..])
    } else {
        name.to_string()
    }
}

pub fn pretty_program(p: &Program) -> String {
    p.to_string()
}

impl Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for d in &self.data_decls {
            writeln!(f, "{d}")?;
            first = false;
        }
        for def in self.funcs.values() {
            if !first {
                writeln!(f)?;
            }
            first = false;
            write!(f, "{def}")?;
        }
        Ok(())
    }
}

impl Display for DataDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "data {}", self.type_name)?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        if self.constructors.is_empty() {
            return Ok(());
        }
        f.write_str(" =")?;
        for (i, c) in self.constructors.iter().enumerate() {
            if i > 0 {
                f.write_str(" |")?;
            }
            write!(f, " {}", c.name)?;
            for t in &c.fields {
                write!(f, " {}", TypeAt(t, ATOM))?;
            }
        }
        Ok(())
    }
}

/// Prints the signature (as a comment for synthesized definitions) and one
/// line per rule.
impl Display for FuncDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(sig) = &self.signature {
            let lead = if self.origin == Origin::Synthesized { "-- " } else { "" };
            writeln!(f, "{lead}{} :: {sig}", prefix_name(&self.name))?;
        }
        for r in &self.rules {
            writeln!(f, "{}", RuleDisplay { name: &self.name, rule: r })?;
        }
        Ok(())
    }
}

pub struct RuleDisplay<'a> {
    pub name: &'a Name,
    pub rule: &'a Rule,
}

impl Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.rule;
        if self.name.is_infix_operator() && r.patterns.len() == 2 {
            write!(f, "{} {} {}", PatAt(&r.patterns[0], ATOM), self.name, PatAt(&r.patterns[1], ATOM))?;
        } else {
            f.write_str(&prefix_name(self.name))?;
            for p in &r.patterns {
                write!(f, " {}", PatAt(p, ATOM))?;
            }
        }
        if !r.guards.is_empty() {
            write!(f, " | {}", Guards(&r.guards))?;
        }
        write!(f, " = {}", ExprAt(&r.body, TOP))?;
        if !r.free_vars.is_empty() {
            let vars: Vec<String> = r.free_vars.iter().map(Name::to_string).collect();
            write!(f, " where {} free", vars.join(", "))?;
        }
        Ok(())
    }
}

struct Guards<'a>(&'a [Constraint]);

impl Display for Guards<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.mode {
            Mode::Strict => "=:=",
            Mode::NonStrict => "=:<=",
        };
        write!(f, "{} {op} {}", ExprAt(&self.lhs, OP), ExprAt(&self.rhs, OP))
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", TypeAt(self, TOP))
    }
}

struct TypeAt<'a>(&'a Type, u8);

impl Display for TypeAt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let TypeAt(t, need) = *self;
        match t {
            Type::Var(v) => f.write_str(v),
            Type::Con(n, args) if n.as_str() == "List" && args.len() == 1 => write!(f, "[{}]", TypeAt(&args[0], TOP)),
            Type::Con(n, args) if tuple_arity(n) == Some(args.len()) => {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", TypeAt(a, TOP))?;
                }
                f.write_str(")")
            }
            Type::Con(n, args) if args.is_empty() => write!(f, "{n}"),
            Type::Con(n, args) => paren(f, need > APP, |f| {
                write!(f, "{n}")?;
                for a in args {
                    write!(f, " {}", TypeAt(a, ATOM))?;
                }
                Ok(())
            }),
            Type::Fun(a, b) => paren(f, need > TOP, |f| write!(f, "{} -> {}", TypeAt(a, APP), TypeAt(b, TOP))),
        }
    }
}

fn paren(
    f: &mut fmt::Formatter<'_>,
    wrap: bool,
    body: impl FnOnce(&mut fmt::Formatter<'_>) -> fmt::Result,
) -> fmt::Result {
    if wrap {
        f.write_char('(')?;
        body(f)?;
        f.write_char(')')
    } else {
        body(f)
    }
}

impl Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", PatAt(self, TOP))
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", ExprAt(self, TOP))
    }
}

/// Uniform view over patterns and expressions for the shared list, tuple
/// and infix printing.
trait Term: Sized {
    fn ctor(&self) -> Option<(&Name, &[Self])>;
    /// No answer placeholders (`_0`, `?`) inside.
    fn is_concrete(&self) -> bool;
    fn write_at(&self, f: &mut fmt::Formatter<'_>, need: u8) -> fmt::Result;
}

impl Term for Pattern {
    fn ctor(&self) -> Option<(&Name, &[Self])> {
        match self {
            Pattern::Ctor(c, ps) => Some((c, ps)),
            _ => None,
        }
    }

    fn is_concrete(&self) -> bool {
        match self {
            Pattern::Var(v) => !is_placeholder(v),
            Pattern::Ctor(_, ps) | Pattern::FunCall(_, ps) => ps.iter().all(Term::is_concrete),
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, need: u8) -> fmt::Result {
        match self {
            Pattern::Var(v) => write!(f, "{v}"),
            Pattern::Ctor(..) => write_ctor(self, f, need),
            Pattern::FunCall(g, ps) => write_call(g, ps, f, need),
        }
    }
}

impl Term for Expr {
    fn ctor(&self) -> Option<(&Name, &[Self])> {
        match self {
            Expr::Ctor(c, es) => Some((c, es)),
            _ => None,
        }
    }

    fn is_concrete(&self) -> bool {
        let mut concrete = true;
        self.walk(&mut |e| concrete &= !matches!(e, Expr::Var(v) if is_placeholder(v)));
        concrete
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, need: u8) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Failed => f.write_str("failed"),
            Expr::Ctor(..) => write_ctor(self, f, need),
            Expr::App(g, es) => write_call(g, es, f, need),
            Expr::VarApp(v, es) => paren(f, need > APP, |f| {
                write!(f, "{v}")?;
                for e in es {
                    write!(f, " {}", ExprAt(e, ATOM))?;
                }
                Ok(())
            }),
            Expr::Case(scrut, branches) => paren(f, need > TOP, |f| {
                write!(f, "case {} of ", ExprAt(scrut, OP))?;
                if branches.len() == 1 {
                    write!(f, "{}", BranchDisplay(&branches[0]))
                } else {
                    f.write_str("{ ")?;
                    for (i, b) in branches.iter().enumerate() {
                        if i > 0 {
                            f.write_str("; ")?;
                        }
                        write!(f, "{}", BranchDisplay(b))?;
                    }
                    f.write_str(" }")
                }
            }),
        }
    }
}

struct BranchDisplay<'a>(&'a Branch);

impl Display for BranchDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.0;
        write!(f, "{}", PatAt(&b.pattern, OP))?;
        if !b.guards.is_empty() {
            write!(f, " | {}", Guards(&b.guards))?;
        }
        write!(f, " -> {}", ExprAt(&b.body, TOP))
    }
}

struct PatAt<'a>(&'a Pattern, u8);

impl Display for PatAt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.write_at(f, self.1)
    }
}

struct ExprAt<'a>(&'a Expr, u8);

impl Display for ExprAt<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.write_at(f, self.1)
    }
}

struct At<'a, T>(&'a T, u8);

impl<T: Term> Display for At<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.write_at(f, self.1)
    }
}

fn write_ctor<T: Term>(term: &T, f: &mut fmt::Formatter<'_>, need: u8) -> fmt::Result {
    let (c, args) = term.ctor().expect("constructor term");
    if c.as_str() == CONS && args.len() == 2 {
        return write_list(term, f, need);
    }
    if tuple_arity(c) == Some(args.len()) {
        f.write_str("(")?;
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", At(a, OP))?;
        }
        return f.write_str(")");
    }
    if args.is_empty() {
        return write!(f, "{c}");
    }
    paren(f, need > APP, |f| {
        write!(f, "{c}")?;
        for a in args {
            write!(f, " {}", At(a, ATOM))?;
        }
        Ok(())
    })
}

fn is_placeholder(v: &Name) -> bool {
    v.as_str().starts_with(['_', '?'])
}

/// A cons spine ending in `[]` is printed in brackets, except that heads
/// holding answer placeholders stay in front: `_0 : [True]`.
fn write_list<T: Term>(term: &T, f: &mut fmt::Formatter<'_>, need: u8) -> fmt::Result {
    let mut heads: Vec<&T> = Vec::new();
    let mut cur = term;
    loop {
        match cur.ctor() {
            Some((c, args)) if c.as_str() == CONS && args.len() == 2 => {
                heads.push(&args[0]);
                cur = &args[1];
            }
            _ => break,
        }
    }
    let nil_terminated = matches!(cur.ctor(), Some((c, [])) if c.as_str() == NIL);
    let split = if nil_terminated {
        heads.len() - heads.iter().rev().take_while(|h| h.is_concrete()).count()
    } else {
        heads.len()
    };
    if split == 0 {
        return write_bracketed(&heads, f);
    }
    paren(f, need > CONS_LEVEL, |f| {
        for h in &heads[..split] {
            write!(f, "{} : ", At(*h, APP))?;
        }
        if nil_terminated {
            write_bracketed(&heads[split..], f)
        } else {
            write!(f, "{}", At(cur, CONS_LEVEL))
        }
    })
}

fn write_bracketed<T: Term>(items: &[&T], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str("[")?;
    for (i, h) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}", At(*h, OP))?;
    }
    f.write_str("]")
}

fn write_call<T: Term>(g: &Name, args: &[T], f: &mut fmt::Formatter<'_>, need: u8) -> fmt::Result {
    if g.is_infix_operator() && args.len() == 2 {
        return paren(f, need > OP, |f| write!(f, "{} {g} {}", At(&args[0], APP), At(&args[1], OP)));
    }
    if args.is_empty() {
        return f.write_str(&prefix_name(g));
    }
    paren(f, need > APP, |f| {
        f.write_str(&prefix_name(g))?;
        for a in args {
            write!(f, " {}", At(a, ATOM))?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Expr {
        Expr::Var(n.into())
    }

    #[test]
    fn failed_keyword() {
        assert_eq!(Expr::Failed.to_string(), "failed");
    }

    #[test]
    fn cons_with_variable_head() {
        let e = Expr::Ctor(CONS.into(), vec![v("x"), Expr::ctor0(NIL)]);
        assert_eq!(e.to_string(), "[x]");
        let open = Expr::Ctor(CONS.into(), vec![v("x"), v("xs")]);
        assert_eq!(open.to_string(), "x : xs");
    }

    #[test]
    fn ground_lists_use_brackets() {
        let e = Expr::list(vec![Expr::Failed, Expr::ctor0("True")]);
        assert_eq!(e.to_string(), "[failed, True]");
        let partial = Expr::Ctor(CONS.into(), vec![v("_0"), Expr::list(vec![Expr::ctor0("True")])]);
        assert_eq!(partial.to_string(), "_0 : [True]");
    }

    #[test]
    fn infix_and_sections() {
        let e = Expr::Ctor(CONS.into(), vec![v("x"), Expr::App("++".into(), vec![v("xs"), v("ys")])]);
        assert_eq!(e.to_string(), "x : (xs ++ ys)");
        let inv = Expr::App("++_inv".into(), vec![v("z")]);
        assert_eq!(inv.to_string(), "(++)_inv z");
        assert_eq!(prefix_name(&"++".into()), "(++)");
    }

    #[test]
    fn case_single_and_multi_branch() {
        let single = Expr::Case(
            Box::new(Expr::App("++_inv".into(), vec![v("z")])),
            vec![Branch {
                pattern: Pattern::Ctor("Tuple2".into(), vec![Pattern::Var("xs".into()), Pattern::Var("ys".into())]),
                guards: vec![Constraint::strict(v("xs"), v("ys"))],
                body: v("xs"),
            }],
        );
        assert_eq!(single.to_string(), "case (++)_inv z of (xs, ys) | xs =:= ys -> xs");
        let multi = Expr::Case(
            Box::new(v("b")),
            vec![
                Branch { pattern: Pattern::Ctor("True".into(), vec![]), guards: vec![], body: Expr::ctor0("False") },
                Branch { pattern: Pattern::Ctor("False".into(), vec![]), guards: vec![], body: Expr::ctor0("True") },
            ],
        );
        assert_eq!(multi.to_string(), "case b of { True -> False; False -> True }");
    }

    #[test]
    fn infix_rule_head() {
        let r = Rule::new(
            vec![
                Pattern::Ctor(CONS.into(), vec![Pattern::Var("x".into()), Pattern::Var("xs".into())]),
                Pattern::Var("ys".into()),
            ],
            Expr::Ctor(CONS.into(), vec![v("x"), Expr::App("++".into(), vec![v("xs"), v("ys")])]),
        );
        let name = Name::new("++");
        assert_eq!(RuleDisplay { name: &name, rule: &r }.to_string(), "(x : xs) ++ ys = x : (xs ++ ys)");
    }

    #[test]
    fn types() {
        let a = Type::Var("a".into());
        let t = Type::arrows(vec![Type::list(a.clone())], Type::tuple(vec![Type::list(a.clone()), a]));
        assert_eq!(t.to_string(), "[a] -> ([a], a)");
    }
}
