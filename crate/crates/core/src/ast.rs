//! Abstract syntax of FLC programs and the syntactic analyses the
//! transformer relies on (variable occurrences, extra variables, fresh
//! names, alpha-equivalence).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::LazyLock;

use indexmap::IndexMap;

/// An identifier: a variable, a function, or a constructor. Which one is
/// determined by the position it occupies in the tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(String);

impl Name {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        debug_assert!(!text.is_empty(), "names are non-empty");
        Name(text)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `true` for operator names such as `++` or `$` (and their derived
    /// names such as `++_inv`).
    pub fn is_operator(&self) -> bool {
        self.0.chars().next().is_some_and(is_symbol_char)
    }

    /// `true` for a bare operator name, i.e. one that may be used infix.
    pub fn is_infix_operator(&self) -> bool {
        !self.0.is_empty() && self.0.chars().all(is_symbol_char)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name::new(s)
    }
}

pub(crate) fn is_symbol_char(c: char) -> bool {
    "!#$%&*+./<=>?@\\^|-~:".contains(c)
}

pub const INVERSE_SUFFIX: &str = "_inv";
pub const NSU_INVERSE_SUFFIX: &str = "_inv_nsu";

/// Name of the synthesized inverse of `f`: `f_inv`, rendered `(++)_inv`
/// for operators.
pub fn inverse_name(f: &Name) -> Name {
    Name::new(format!("{}{INVERSE_SUFFIX}", f.0))
}

/// Name under which the non-strict-unification inverse of `f` is installed
/// when it has to coexist with a directly synthesized one.
pub fn nsu_inverse_name(f: &Name) -> Name {
    Name::new(format!("{}{NSU_INVERSE_SUFFIX}", f.0))
}

pub const CONS: &str = ":";
pub const NIL: &str = "[]";
pub const TRUE: &str = "True";
pub const FALSE: &str = "False";
pub const MAX_TUPLE: usize = 8;

pub fn tuple_ctor(arity: usize) -> Name {
    assert!((2..=MAX_TUPLE).contains(&arity), "tuple arity out of range");
    Name::new(format!("Tuple{arity}"))
}

/// Arity of a tuple constructor name, if it is one.
pub fn tuple_arity(name: &Name) -> Option<usize> {
    let n: usize = name.as_str().strip_prefix("Tuple")?.parse().ok()?;
    (2..=MAX_TUPLE).contains(&n).then_some(n)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Var(String),
    Con(Name, Vec<Type>),
    Fun(Box<Type>, Box<Type>),
}

impl Type {
    pub fn list(elem: Type) -> Type {
        Type::Con(Name::new("List"), vec![elem])
    }

    pub fn tuple(items: Vec<Type>) -> Type {
        Type::Con(tuple_ctor(items.len()), items)
    }

    /// Splits `t1 -> … -> tn -> t` into `([t1, …, tn], t)` taking at most
    /// `arity` parameters.
    pub fn split_arrows(&self, arity: usize) -> Option<(Vec<Type>, Type)> {
        let mut params = Vec::new();
        let mut cur = self;
        while params.len() < arity {
            match cur {
                Type::Fun(a, b) => {
                    params.push((**a).clone());
                    cur = b;
                }
                _ => return None,
            }
        }
        Some((params, cur.clone()))
    }

    pub fn arrows(params: Vec<Type>, result: Type) -> Type {
        params.into_iter().rev().fold(result, |acc, p| Type::Fun(Box::new(p), Box::new(acc)))
    }

    pub fn is_higher_order(&self) -> bool {
        match self {
            Type::Var(_) => false,
            Type::Con(_, args) => args.iter().any(|a| a.contains_arrow()),
            Type::Fun(a, b) => a.contains_arrow() || b.is_higher_order(),
        }
    }

    fn contains_arrow(&self) -> bool {
        match self {
            Type::Var(_) => false,
            Type::Con(_, args) => args.iter().any(Type::contains_arrow),
            Type::Fun(..) => true,
        }
    }

    /// Replaces every type variable by `with`.
    pub fn instantiate(&self, with: &Type) -> Type {
        match self {
            Type::Var(_) => with.clone(),
            Type::Con(n, args) => Type::Con(n.clone(), args.iter().map(|a| a.instantiate(with)).collect()),
            Type::Fun(a, b) => Type::Fun(Box::new(a.instantiate(with)), Box::new(b.instantiate(with))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDecl {
    pub name: Name,
    pub fields: Vec<Type>,
}

impl CtorDecl {
    pub fn arity(&self) -> usize {
        self.fields.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataDecl {
    pub type_name: Name,
    pub params: Vec<String>,
    pub constructors: Vec<CtorDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Var(Name),
    Ctor(Name, Vec<Pattern>),
    FunCall(Name, Vec<Pattern>),
}

impl Pattern {
    pub fn is_functional(&self) -> bool {
        match self {
            Pattern::Var(_) => false,
            Pattern::Ctor(_, ps) => ps.iter().any(Pattern::is_functional),
            Pattern::FunCall(..) => true,
        }
    }

    /// Constructor-rooted with only variables below the root (or a bare
    /// variable).
    pub fn is_flat(&self) -> bool {
        match self {
            Pattern::Var(_) => true,
            Pattern::Ctor(_, ps) => ps.iter().all(|p| matches!(p, Pattern::Var(_))),
            Pattern::FunCall(..) => false,
        }
    }

    /// Reads the pattern as an expression (`FunCall` becomes `App`).
    pub fn to_expr(&self) -> Expr {
        match self {
            Pattern::Var(v) => Expr::Var(v.clone()),
            Pattern::Ctor(c, ps) => Expr::Ctor(c.clone(), ps.iter().map(Pattern::to_expr).collect()),
            Pattern::FunCall(f, ps) => Expr::App(f.clone(), ps.iter().map(Pattern::to_expr).collect()),
        }
    }

    /// Variables in left-to-right order, with repetitions.
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            Pattern::Var(v) => out.push(v.clone()),
            Pattern::Ctor(_, ps) | Pattern::FunCall(_, ps) => ps.iter().for_each(|p| p.collect_vars(out)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Pattern::Var(_) => 1,
            Pattern::Ctor(_, ps) | Pattern::FunCall(_, ps) => 1 + ps.iter().map(Pattern::depth).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// `=:=`
    Strict,
    /// `=:<=`
    NonStrict,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub mode: Mode,
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Constraint {
    pub fn strict(lhs: Expr, rhs: Expr) -> Self {
        Constraint { mode: Mode::Strict, lhs, rhs }
    }

    pub fn non_strict(lhs: Expr, rhs: Expr) -> Self {
        Constraint { mode: Mode::NonStrict, lhs, rhs }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub pattern: Pattern,
    pub guards: Vec<Constraint>,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Name),
    Ctor(Name, Vec<Expr>),
    App(Name, Vec<Expr>),
    /// Application of a variable: only produced for higher-order
    /// definitions, which the evaluator and the synthesizer refuse.
    VarApp(Name, Vec<Expr>),
    Case(Box<Expr>, Vec<Branch>),
    Failed,
}

impl Expr {
    pub fn tuple(items: Vec<Expr>) -> Expr {
        Expr::Ctor(tuple_ctor(items.len()), items)
    }

    pub fn list(items: Vec<Expr>) -> Expr {
        items
            .into_iter()
            .rev()
            .fold(Expr::Ctor(Name::new(NIL), vec![]), |acc, e| Expr::Ctor(Name::new(CONS), vec![e, acc]))
    }

    pub fn ctor0(name: &str) -> Expr {
        Expr::Ctor(Name::new(name), vec![])
    }

    /// Built only from variables, constructors and function applications.
    pub fn is_equational(&self) -> bool {
        match self {
            Expr::Var(_) => true,
            Expr::Ctor(_, es) | Expr::App(_, es) => es.iter().all(Expr::is_equational),
            Expr::VarApp(..) | Expr::Case(..) | Expr::Failed => false,
        }
    }

    /// Reads an equational expression as a pattern (`App` becomes
    /// `FunCall`).
    pub fn to_pattern(&self) -> Option<Pattern> {
        Some(match self {
            Expr::Var(v) => Pattern::Var(v.clone()),
            Expr::Ctor(c, es) => Pattern::Ctor(c.clone(), es.iter().map(Expr::to_pattern).collect::<Option<_>>()?),
            Expr::App(f, es) => Pattern::FunCall(f.clone(), es.iter().map(Expr::to_pattern).collect::<Option<_>>()?),
            Expr::VarApp(..) | Expr::Case(..) | Expr::Failed => return None,
        })
    }

    pub fn contains_var_app(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::VarApp(..)));
        found
    }

    /// Pre-order walk over this expression and the expressions nested in
    /// case branches and branch guards.
    pub fn walk(&self, visit: &mut impl FnMut(&Expr)) {
        visit(self);
        match self {
            Expr::Var(_) | Expr::Failed => {}
            Expr::Ctor(_, es) | Expr::App(_, es) | Expr::VarApp(_, es) => es.iter().for_each(|e| e.walk(visit)),
            Expr::Case(scrut, branches) => {
                scrut.walk(visit);
                for b in branches {
                    for g in &b.guards {
                        g.lhs.walk(visit);
                        g.rhs.walk(visit);
                    }
                    b.body.walk(visit);
                }
            }
        }
    }

    /// Function names applied anywhere in this expression.
    pub fn called_functions(&self, out: &mut BTreeSet<Name>) {
        self.walk(&mut |e| {
            if let Expr::App(f, _) = e {
                out.insert(f.clone());
            }
        });
        self.walk_patterns(&mut |p| p.called_functions(out));
    }

    fn walk_patterns(&self, visit: &mut impl FnMut(&Pattern)) {
        self.walk(&mut |e| {
            if let Expr::Case(_, branches) = e {
                branches.iter().for_each(|b| visit(&b.pattern));
            }
        });
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Failed => 1,
            Expr::Ctor(_, es) | Expr::App(_, es) | Expr::VarApp(_, es) => {
                1 + es.iter().map(Expr::depth).max().unwrap_or(0)
            }
            Expr::Case(s, bs) => 1 + bs.iter().map(|b| b.body.depth()).chain([s.depth()]).max().unwrap_or(0),
        }
    }
}

impl Pattern {
    pub fn called_functions(&self, out: &mut BTreeSet<Name>) {
        match self {
            Pattern::Var(_) => {}
            Pattern::Ctor(_, ps) => ps.iter().for_each(|p| p.called_functions(out)),
            Pattern::FunCall(f, ps) => {
                out.insert(f.clone());
                ps.iter().for_each(|p| p.called_functions(out));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub patterns: Vec<Pattern>,
    pub guards: Vec<Constraint>,
    pub body: Expr,
    pub free_vars: BTreeSet<Name>,
}

impl Rule {
    pub fn new(patterns: Vec<Pattern>, body: Expr) -> Self {
        Rule { patterns, guards: vec![], body, free_vars: BTreeSet::new() }
    }

    /// Occurrences on the right-hand side: guards and body.
    pub fn rhs_occurrences(&self) -> BTreeMap<Name, usize> {
        let mut acc = BTreeMap::new();
        for g in &self.guards {
            g.lhs.count_vars(&mut acc);
            g.rhs.count_vars(&mut acc);
        }
        self.body.count_vars(&mut acc);
        acc
    }

    pub fn lhs_vars(&self) -> BTreeSet<Name> {
        self.patterns.iter().flat_map(Pattern::vars).collect()
    }

    pub fn called_functions(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.patterns.iter().for_each(|p| p.called_functions(&mut out));
        for g in &self.guards {
            g.lhs.called_functions(&mut out);
            g.rhs.called_functions(&mut out);
        }
        self.body.called_functions(&mut out);
        out
    }

    /// Every variable name mentioned anywhere in the rule.
    pub fn all_vars(&self) -> BTreeSet<Name> {
        let mut acc = BTreeMap::new();
        self.patterns.iter().for_each(|p| p.count_vars(&mut acc));
        let mut names: BTreeSet<Name> = acc.into_keys().collect();
        names.extend(self.rhs_occurrences().into_keys());
        names.extend(self.free_vars.iter().cloned());
        names
    }

    /// Applies `rename` to every variable occurrence and free declaration.
    pub fn map_vars(&self, rename: &mut impl FnMut(&Name) -> Name) -> Rule {
        Rule {
            patterns: self.patterns.iter().map(|p| map_pattern_vars(p, rename)).collect(),
            guards: self.guards.iter().map(|g| map_constraint_vars(g, rename)).collect(),
            body: map_expr_vars(&self.body, rename),
            free_vars: self.free_vars.iter().map(rename).collect(),
        }
    }
}

fn map_pattern_vars(p: &Pattern, rename: &mut impl FnMut(&Name) -> Name) -> Pattern {
    match p {
        Pattern::Var(v) => Pattern::Var(rename(v)),
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|p| map_pattern_vars(p, rename)).collect()),
        Pattern::FunCall(f, ps) => {
            Pattern::FunCall(f.clone(), ps.iter().map(|p| map_pattern_vars(p, rename)).collect())
        }
    }
}

fn map_constraint_vars(c: &Constraint, rename: &mut impl FnMut(&Name) -> Name) -> Constraint {
    Constraint { mode: c.mode, lhs: map_expr_vars(&c.lhs, rename), rhs: map_expr_vars(&c.rhs, rename) }
}

fn map_expr_vars(e: &Expr, rename: &mut impl FnMut(&Name) -> Name) -> Expr {
    match e {
        Expr::Var(v) => Expr::Var(rename(v)),
        Expr::Ctor(c, es) => Expr::Ctor(c.clone(), es.iter().map(|e| map_expr_vars(e, rename)).collect()),
        Expr::App(f, es) => Expr::App(f.clone(), es.iter().map(|e| map_expr_vars(e, rename)).collect()),
        Expr::VarApp(v, es) => Expr::VarApp(rename(v), es.iter().map(|e| map_expr_vars(e, rename)).collect()),
        Expr::Case(s, bs) => Expr::Case(
            Box::new(map_expr_vars(s, rename)),
            bs.iter()
                .map(|b| Branch {
                    pattern: map_pattern_vars(&b.pattern, rename),
                    guards: b.guards.iter().map(|g| map_constraint_vars(g, rename)).collect(),
                    body: map_expr_vars(&b.body, rename),
                })
                .collect(),
        ),
        Expr::Failed => Expr::Failed,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    UserWritten,
    Synthesized,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncDef {
    pub name: Name,
    pub arity: usize,
    pub rules: Vec<Rule>,
    pub origin: Origin,
    pub signature: Option<Type>,
}

impl FuncDef {
    pub fn new(name: Name, arity: usize, rules: Vec<Rule>) -> Self {
        FuncDef { name, arity, rules, origin: Origin::UserWritten, signature: None }
    }

    pub fn called_functions(&self) -> BTreeSet<Name> {
        self.rules.iter().flat_map(Rule::called_functions).collect()
    }

    pub fn has_functional_patterns(&self) -> bool {
        self.rules.iter().any(|r| r.patterns.iter().any(Pattern::is_functional))
    }

    /// Counts `FunCall` pattern nodes and `=:<=` constraints anywhere in
    /// the definition. Standard code has both at zero.
    pub fn nonstandard_counts(&self) -> (usize, usize) {
        let mut funcalls = 0;
        let mut nonstrict = 0;
        let pat = |p: &Pattern, n: &mut usize| *n += count_funcalls(p);
        let con = |c: &Constraint, n: &mut usize| {
            if c.mode == Mode::NonStrict {
                *n += 1
            }
        };
        for r in &self.rules {
            r.patterns.iter().for_each(|p| pat(p, &mut funcalls));
            r.guards.iter().for_each(|g| con(g, &mut nonstrict));
            let mut visit = |e: &Expr| {
                if let Expr::Case(_, bs) = e {
                    for b in bs {
                        funcalls += count_funcalls(&b.pattern);
                        nonstrict += b.guards.iter().filter(|g| g.mode == Mode::NonStrict).count();
                    }
                }
            };
            for g in &r.guards {
                g.lhs.walk(&mut visit);
                g.rhs.walk(&mut visit);
            }
            r.body.walk(&mut visit);
        }
        (funcalls, nonstrict)
    }

    pub fn is_standard_code(&self) -> bool {
        self.nonstandard_counts() == (0, 0)
    }
}

fn count_funcalls(p: &Pattern) -> usize {
    match p {
        Pattern::Var(_) => 0,
        Pattern::Ctor(_, ps) => ps.iter().map(count_funcalls).sum(),
        Pattern::FunCall(_, ps) => 1 + ps.iter().map(count_funcalls).sum::<usize>(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub data_decls: Vec<DataDecl>,
    pub funcs: IndexMap<Name, FuncDef>,
}

static PRELUDE: LazyLock<Vec<DataDecl>> = LazyLock::new(|| {
    let a = || Type::Var("a".into());
    let mut decls = vec![
        DataDecl {
            type_name: Name::new("Bool"),
            params: vec![],
            constructors: vec![
                CtorDecl { name: Name::new(TRUE), fields: vec![] },
                CtorDecl { name: Name::new(FALSE), fields: vec![] },
            ],
        },
        DataDecl {
            type_name: Name::new("List"),
            params: vec!["a".into()],
            constructors: vec![
                CtorDecl { name: Name::new(NIL), fields: vec![] },
                CtorDecl { name: Name::new(CONS), fields: vec![a(), Type::list(a())] },
            ],
        },
    ];
    for n in 2..=MAX_TUPLE {
        let params: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
        decls.push(DataDecl {
            type_name: tuple_ctor(n),
            constructors: vec![CtorDecl {
                name: tuple_ctor(n),
                fields: params.iter().map(|p| Type::Var(p.clone())).collect(),
            }],
            params,
        });
    }
    decls
});

/// Data declarations every program sees: `Bool`, `List` and the tuples.
pub fn prelude() -> &'static [DataDecl] {
    &PRELUDE
}

impl Program {
    pub fn all_data_decls(&self) -> impl Iterator<Item = &DataDecl> {
        prelude().iter().chain(self.data_decls.iter())
    }

    pub fn constructor(&self, name: &Name) -> Option<&CtorDecl> {
        self.all_data_decls().flat_map(|d| d.constructors.iter()).find(|c| &c.name == name)
    }

    pub fn data_type(&self, type_name: &Name) -> Option<&DataDecl> {
        self.all_data_decls().find(|d| &d.type_name == type_name)
    }

    /// The data declaration a constructor belongs to.
    pub fn type_of_ctor(&self, name: &Name) -> Option<&DataDecl> {
        self.all_data_decls().find(|d| d.constructors.iter().any(|c| &c.name == name))
    }

    pub fn func(&self, name: &Name) -> Option<&FuncDef> {
        self.funcs.get(name)
    }

    pub fn insert(&mut self, f: FuncDef) {
        self.funcs.insert(f.name.clone(), f);
    }

    /// All functions reachable from `name` through calls, excluding `name`
    /// itself unless it is recursive.
    pub fn transitive_callees(&self, name: &Name) -> BTreeSet<Name> {
        let mut seen = BTreeSet::new();
        let mut todo: Vec<Name> =
            self.func(name).map(|f| f.called_functions().into_iter().collect()).unwrap_or_default();
        while let Some(g) = todo.pop() {
            if seen.insert(g.clone()) {
                if let Some(def) = self.func(&g) {
                    todo.extend(def.called_functions());
                }
            }
        }
        seen
    }
}

/// Counts variable occurrences in a pattern or an expression.
pub trait VarOccurrences {
    fn count_vars(&self, acc: &mut BTreeMap<Name, usize>);

    fn var_occurrences(&self) -> BTreeMap<Name, usize> {
        let mut acc = BTreeMap::new();
        self.count_vars(&mut acc);
        acc
    }

    fn is_linear(&self) -> bool {
        self.var_occurrences().values().all(|&n| n <= 1)
    }
}

impl VarOccurrences for Pattern {
    fn count_vars(&self, acc: &mut BTreeMap<Name, usize>) {
        match self {
            Pattern::Var(v) => *acc.entry(v.clone()).or_default() += 1,
            Pattern::Ctor(_, ps) | Pattern::FunCall(_, ps) => ps.iter().for_each(|p| p.count_vars(acc)),
        }
    }
}

impl VarOccurrences for Expr {
    fn count_vars(&self, acc: &mut BTreeMap<Name, usize>) {
        match self {
            Expr::Var(v) => *acc.entry(v.clone()).or_default() += 1,
            Expr::Ctor(_, es) | Expr::App(_, es) => es.iter().for_each(|e| e.count_vars(acc)),
            Expr::VarApp(v, es) => {
                *acc.entry(v.clone()).or_default() += 1;
                es.iter().for_each(|e| e.count_vars(acc));
            }
            Expr::Case(s, bs) => {
                s.count_vars(acc);
                for b in bs {
                    b.pattern.count_vars(acc);
                    for g in &b.guards {
                        g.lhs.count_vars(acc);
                        g.rhs.count_vars(acc);
                    }
                    b.body.count_vars(acc);
                }
            }
            Expr::Failed => {}
        }
    }
}

impl<T: VarOccurrences> VarOccurrences for [T] {
    fn count_vars(&self, acc: &mut BTreeMap<Name, usize>) {
        self.iter().for_each(|t| t.count_vars(acc));
    }
}

/// Extra variables of a rule: left-hand-side variables the right-hand side
/// never mentions, and the `where … free` declarations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtraVars {
    pub unused_lhs: BTreeSet<Name>,
    pub where_free: BTreeSet<Name>,
}

impl ExtraVars {
    pub fn is_empty(&self) -> bool {
        self.unused_lhs.is_empty() && self.where_free.is_empty()
    }
}

pub fn extra_vars(rule: &Rule) -> ExtraVars {
    let used = rule.rhs_occurrences();
    ExtraVars {
        unused_lhs: rule.lhs_vars().into_iter().filter(|v| !used.contains_key(v)).collect(),
        where_free: rule.free_vars.clone(),
    }
}

/// `base` if it is not taken, otherwise `base` followed by the smallest
/// positive number that is not taken.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let candidate = Name::new(base);
    if !avoid.contains(&candidate) {
        return candidate;
    }
    (1..).map(|i| Name::new(format!("{base}{i}"))).find(|n| !avoid.contains(n)).expect("unbounded suffix search")
}

/// Structural equality of two definitions up to consistent renaming of
/// variables within each rule.
pub fn alpha_eq(a: &FuncDef, b: &FuncDef) -> bool {
    a.name == b.name
        && a.arity == b.arity
        && a.rules.len() == b.rules.len()
        && a.rules.iter().zip(&b.rules).all(|(x, y)| canonical_rule(x) == canonical_rule(y))
}

/// Renames variables to `#0`, `#1`, … in order of first appearance.
pub fn canonical_rule(rule: &Rule) -> Rule {
    let mut order: Vec<Name> = Vec::new();
    let mut note = |n: &Name| {
        if !order.contains(n) {
            order.push(n.clone());
        }
        n.clone()
    };
    // First pass just records the order of appearance.
    let _ = rule.map_vars(&mut note);
    let mut free_sorted: Vec<&Name> = rule.free_vars.iter().filter(|v| !order.contains(v)).collect();
    free_sorted.sort();
    order.extend(free_sorted.into_iter().cloned());
    let table: HashMap<Name, Name> =
        order.iter().enumerate().map(|(i, n)| (n.clone(), Name::new(format!("#{i}")))).collect();
    rule.map_vars(&mut |n| table[n].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Expr {
        Expr::Var(Name::new(n))
    }

    fn pv(n: &str) -> Pattern {
        Pattern::Var(Name::new(n))
    }

    fn names(ns: &[&str]) -> BTreeSet<Name> {
        ns.iter().map(|n| Name::new(*n)).collect()
    }

    #[test]
    fn self_append_body_counts_xs_twice() {
        let body = Expr::App("++".into(), vec![v("xs"), v("xs")]);
        assert_eq!(body.var_occurrences(), BTreeMap::from([("xs".into(), 2)]));
        assert!(!body.is_linear());
    }

    #[test]
    fn single_variable_pattern_counts_once() {
        assert_eq!(pv("x").var_occurrences(), BTreeMap::from([("x".into(), 1)]));
    }

    #[test]
    fn g_body_counts_j_twice() {
        let body = Expr::tuple(vec![Expr::App("f".into(), vec![v("j")]), v("j")]);
        assert_eq!(body.var_occurrences(), BTreeMap::from([("j".into(), 2)]));
    }

    #[test]
    fn extra_vars_of_tail() {
        let rule = Rule::new(vec![Pattern::Ctor(CONS.into(), vec![pv("x"), pv("xs")])], v("xs"));
        assert_eq!(extra_vars(&rule), ExtraVars { unused_lhs: names(&["x"]), where_free: BTreeSet::new() });
    }

    #[test]
    fn extra_vars_of_g() {
        let mut rule = Rule::new(
            vec![Pattern::Ctor("0".into(), vec![])],
            Expr::tuple(vec![Expr::App("f".into(), vec![v("j")]), v("j")]),
        );
        rule.free_vars = names(&["j"]);
        assert_eq!(extra_vars(&rule), ExtraVars { unused_lhs: BTreeSet::new(), where_free: names(&["j"]) });
    }

    #[test]
    fn extra_vars_of_append_nil_rule() {
        let rule = Rule::new(vec![Pattern::Ctor(NIL.into(), vec![]), pv("ys")], v("ys"));
        assert!(extra_vars(&rule).is_empty());
    }

    #[test]
    fn fresh_name_suffixes() {
        assert_eq!(fresh_name("z", &names(&[])), Name::new("z"));
        assert_eq!(fresh_name("z", &names(&["z"])), Name::new("z1"));
        assert_eq!(fresh_name("z", &names(&["z", "z1"])), Name::new("z2"));
    }

    #[test]
    fn inverse_names() {
        assert_eq!(inverse_name(&"tail".into()).as_str(), "tail_inv");
        assert_eq!(inverse_name(&"++".into()).as_str(), "++_inv");
        assert!(Name::new("++_inv").is_operator());
        assert!(!Name::new("++_inv").is_infix_operator());
    }

    #[test]
    fn alpha_equivalence_ignores_variable_names() {
        let r1 = Rule::new(vec![pv("ys")], Expr::tuple(vec![Expr::ctor0(NIL), v("ys")]));
        let r2 = Rule::new(vec![pv("q")], Expr::tuple(vec![Expr::ctor0(NIL), v("q")]));
        let r3 = Rule::new(vec![pv("q")], Expr::tuple(vec![v("q"), Expr::ctor0(NIL)]));
        let f = |r: Rule| FuncDef::new("h".into(), 1, vec![r]);
        assert!(alpha_eq(&f(r1.clone()), &f(r2)));
        assert!(!alpha_eq(&f(r1), &f(r3)));
    }

    #[test]
    fn standard_code_scan_counts_funcalls_and_nsu() {
        let mut rule = Rule::new(vec![pv("z")], v("x"));
        rule.guards.push(Constraint::non_strict(Expr::App("++".into(), vec![v("xs"), v("x")]), v("z")));
        let f = FuncDef::new("last".into(), 1, vec![rule]);
        assert_eq!(f.nonstandard_counts(), (0, 1));
        let g = FuncDef::new(
            "last".into(),
            1,
            vec![Rule::new(vec![Pattern::FunCall("++".into(), vec![pv("xs"), pv("x")])], v("x"))],
        );
        assert_eq!(g.nonstandard_counts(), (1, 0));
    }

    #[test]
    fn signature_splits_at_arity() {
        let a = Type::Var("a".into());
        let t = Type::arrows(vec![Type::list(a.clone()), Type::list(a.clone())], Type::list(a.clone()));
        let (ps, r) = t.split_arrows(2).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(r, Type::list(a));
        assert!(!t.is_higher_order());
        let dollar = Type::arrows(
            vec![Type::Var("a".into()), Type::Fun(Box::new(Type::Var("a".into())), Box::new(Type::Var("b".into())))],
            Type::Var("b".into()),
        );
        assert!(dollar.is_higher_order());
    }
}
