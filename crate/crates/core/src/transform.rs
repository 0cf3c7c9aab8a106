//! Inverse synthesis and elaboration of functional patterns.
//!
//! An inverse is built rule by rule: the sides of a rule are swapped,
//! function calls that end up inside the new left-hand side are replaced
//! by calls to the callees' inverses, repeated pattern variables are
//! renamed apart with `=:=` guards, and nested patterns are flattened.
//! Definitions outside that class get an inverse phrased with `=:<=`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use indexmap::IndexMap;
use serde_json::{json, Value};

use crate::ast::{
    extra_vars, fresh_name, inverse_name, tuple_ctor, Branch, Constraint, Expr, FuncDef, Name, Origin, Pattern,
    Program, Rule, Type,
};
use crate::desugar::flatten_rule;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Direct,
    FallbackNsu(String),
    Rejected(String),
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Direct => "Direct",
            Strategy::FallbackNsu(_) => "FallbackNSU",
            Strategy::Rejected(_) => "Rejected",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Strategy::Direct => None,
            Strategy::FallbackNsu(r) | Strategy::Rejected(r) => Some(r),
        }
    }

    pub fn is_invertible(&self) -> bool {
        !matches!(self, Strategy::Rejected(_))
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.reason() {
            Some(r) => write!(f, "{} ({r})", self.label()),
            None => f.write_str(self.label()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InversionReport {
    pub per_function: IndexMap<Name, Strategy>,
    pub warnings: Vec<String>,
}

impl InversionReport {
    pub fn to_json(&self, function: &Name) -> Value {
        let strategy = self.per_function.get(function);
        let mut v = json!({
            "function": function.as_str(),
            "strategy": strategy.map(Strategy::label),
            "warnings": self.warnings,
            "functions": self.per_function.iter().map(|(n, s)| {
                let mut e = json!({"name": n.as_str(), "strategy": s.label()});
                if let Some(r) = s.reason() {
                    e["reason"] = json!(r);
                }
                e
            }).collect::<Vec<_>>(),
        });
        if let Some(r) = strategy.and_then(Strategy::reason) {
            v["reason"] = json!(r);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("unknown function `{0}`")]
    UnknownFunction(Name),
    #[error("`{function}` cannot be inverted: {reason}")]
    Rejected { function: Name, reason: String },
}

/// Result of swapping the sides of one rule: a one-argument left-hand side
/// that may still contain function calls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtoRule {
    pub pattern: Pattern,
    pub guards: Vec<Constraint>,
    pub body: Expr,
    pub free_vars: BTreeSet<Name>,
}

/// Undoes the case chains produced by pattern flattening, so that
/// `f z = case z of S n -> n` reads as `f (S n) = n` again. Only
/// single-branch cases on a left-hand-side variable used nowhere else are
/// folded back.
pub fn unflatten_rule(rule: &Rule) -> Rule {
    let mut rule = rule.clone();
    while let Expr::Case(scrut, branches) = &rule.body {
        let (Expr::Var(z), [branch]) = (&**scrut, &branches[..]) else { break };
        if !rule.lhs_vars().contains(z) || rule.rhs_occurrences().get(z) != Some(&1) {
            break;
        }
        if !branch.guards.is_empty() && !rule.guards.is_empty() {
            break;
        }
        if matches!(branch.pattern, Pattern::FunCall(..)) {
            break;
        }
        let (z, branch) = (z.clone(), branch.clone());
        rule.patterns = rule.patterns.iter().map(|p| substitute(p, &z, &branch.pattern)).collect();
        if rule.guards.is_empty() {
            rule.guards = branch.guards;
        }
        rule.body = branch.body;
    }
    rule
}

fn substitute(p: &Pattern, z: &Name, with: &Pattern) -> Pattern {
    match p {
        Pattern::Var(v) if v == z => with.clone(),
        Pattern::Var(_) => p.clone(),
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|q| substitute(q, z, with)).collect()),
        Pattern::FunCall(f, ps) => Pattern::FunCall(f.clone(), ps.iter().map(|q| substitute(q, z, with)).collect()),
    }
}

fn is_higher_order(f: &FuncDef) -> bool {
    f.signature.as_ref().is_some_and(Type::is_higher_order)
        || f.rules.iter().any(|r| {
            r.body.contains_var_app() || r.guards.iter().any(|g| g.lhs.contains_var_app() || g.rhs.contains_var_app())
        })
}

fn extra_var_names(rule: &Rule) -> BTreeSet<Name> {
    let ev = extra_vars(rule);
    ev.unused_lhs.into_iter().chain(ev.where_free).collect()
}

fn join(names: &BTreeSet<Name>) -> String {
    names.iter().map(Name::as_str).collect::<Vec<_>>().join(", ")
}

/// Why a rule cannot be swapped, if it cannot.
fn unsupported_shape(program: &Program, rule: &Rule, index: usize) -> Option<String> {
    if !rule.guards.is_empty() {
        return Some(format!("unsupported rule shape: rule {} has guards", index + 1));
    }
    if rule.body.to_pattern().is_none() {
        return Some(format!(
            "unsupported rule shape: rule {} has a case or `failed` on its right-hand side",
            index + 1
        ));
    }
    let nullary = rule.called_functions().into_iter().find(|g| {
        program.func(g).is_some_and(|d| d.arity == 0) && {
            let mut calls = BTreeSet::new();
            rule.body.called_functions(&mut calls);
            calls.contains(g)
        }
    });
    nullary.map(|g| format!("unsupported rule shape: rule {} calls the constant `{g}`", index + 1))
}

pub fn classify(program: &Program, fname: &Name, force_direct: bool) -> Result<Strategy, TransformError> {
    let f = program.func(fname).ok_or_else(|| TransformError::UnknownFunction(fname.clone()))?;
    let callees = program.transitive_callees(fname);
    if is_higher_order(f) {
        return Ok(Strategy::Rejected("higher-order".into()));
    }
    if let Some(g) = callees.iter().find(|g| program.func(g).is_some_and(is_higher_order)) {
        return Ok(Strategy::Rejected(format!("higher-order (calls `{g}`)")));
    }
    if f.arity == 0 {
        return Ok(Strategy::Rejected("a constant has no inverse".into()));
    }
    let fallback = |reason: String| Ok(if force_direct { Strategy::Direct } else { Strategy::FallbackNsu(reason) });
    let rules: Vec<Rule> = f.rules.iter().map(unflatten_rule).collect();
    for (i, r) in rules.iter().enumerate() {
        if let Some(reason) = unsupported_shape(program, r, i) {
            return if force_direct { Ok(Strategy::Rejected(reason)) } else { Ok(Strategy::FallbackNsu(reason)) };
        }
    }
    let mut callee_extras: BTreeMap<&Name, BTreeSet<Name>> = BTreeMap::new();
    for g in callees.iter().filter(|g| *g != fname) {
        if let Some(def) = program.func(g) {
            let vars: BTreeSet<Name> = def.rules.iter().map(unflatten_rule).flat_map(|r| extra_var_names(&r)).collect();
            if !vars.is_empty() {
                callee_extras.insert(g, vars);
            }
        }
    }
    for r in &rules {
        let repeated: BTreeSet<Name> =
            r.rhs_occurrences().into_iter().filter(|(_, n)| *n >= 2).map(|(v, _)| v).collect();
        if repeated.is_empty() {
            continue;
        }
        let own = extra_var_names(r);
        if own.is_empty() && callee_extras.is_empty() {
            continue;
        }
        let mut sources = Vec::new();
        if !own.is_empty() {
            sources.push(format!("{fname}: {}", join(&own)));
        }
        sources.extend(callee_extras.iter().map(|(g, vs)| format!("{g}: {}", join(vs))));
        return fallback(format!(
            "non-linear right-hand side ({}) with extra variables ({})",
            join(&repeated),
            sources.join("; ")
        ));
    }
    Ok(Strategy::Direct)
}

/// Swaps the sides of an equation-shaped rule of a function with the given
/// arity.
pub fn swap_rule(rule: &Rule, arity: usize) -> Option<ProtoRule> {
    let rule = unflatten_rule(rule);
    if !rule.guards.is_empty() {
        return None;
    }
    let pattern = rule.body.to_pattern()?;
    let args: Vec<Expr> = rule.patterns.iter().map(Pattern::to_expr).collect();
    let body = if arity == 1 { args.into_iter().next().unwrap() } else { Expr::tuple(args) };
    Some(ProtoRule { pattern, guards: vec![], body, free_vars: extra_vars(&rule).unused_lhs })
}

/// Pattern for the arguments of a call: bare for one argument, a tuple
/// otherwise.
fn args_pattern(mut args: Vec<Pattern>) -> Pattern {
    if args.len() == 1 {
        args.pop().unwrap()
    } else {
        Pattern::Ctor(tuple_ctor(args.len()), args)
    }
}

/// Replaces the outermost calls in `p` by fresh variables, queueing
/// `(variable, callee, argument patterns)` left to right.
fn cut_calls(p: &Pattern, avoid: &mut BTreeSet<Name>, out: &mut VecDeque<(Name, Name, Vec<Pattern>)>) -> Pattern {
    match p {
        Pattern::Var(_) => p.clone(),
        Pattern::Ctor(c, ps) => Pattern::Ctor(c.clone(), ps.iter().map(|q| cut_calls(q, avoid, out)).collect()),
        Pattern::FunCall(g, ps) => {
            let z = fresh_name("z", avoid);
            avoid.insert(z.clone());
            out.push_back((z.clone(), g.clone(), ps.clone()));
            Pattern::Var(z)
        }
    }
}

/// Builds the case chain for queued calls around `guards`/`body`. The
/// entries are processed outermost first; calls inside argument patterns
/// are queued behind the ones already waiting.
fn case_chain(
    mut queue: VecDeque<(Name, Name, Vec<Pattern>)>,
    guards: Vec<Constraint>,
    body: Expr,
    avoid: &mut BTreeSet<Name>,
    inverse_of: &impl Fn(&Name) -> Name,
) -> (Vec<Constraint>, Expr) {
    let Some((z, g, args)) = queue.pop_front() else { return (guards, body) };
    let pattern = cut_calls(&args_pattern(args), avoid, &mut queue);
    let (inner_guards, inner_body) = case_chain(queue, guards, body, avoid, inverse_of);
    let scrut = Expr::App(inverse_of(&g), vec![Expr::Var(z)]);
    (vec![], Expr::Case(Box::new(scrut), vec![Branch { pattern, guards: inner_guards, body: inner_body }]))
}

/// Turns a proto rule into a rule whose left-hand side has no function
/// calls.
pub fn eliminate_fun_pats(proto: &ProtoRule, inverse_of: impl Fn(&Name) -> Name) -> Rule {
    let mut avoid = proto_vars(proto);
    let mut queue = VecDeque::new();
    let pattern = cut_calls(&proto.pattern, &mut avoid, &mut queue);
    let (guards, body) = case_chain(queue, proto.guards.clone(), proto.body.clone(), &mut avoid, &inverse_of);
    Rule { patterns: vec![pattern], guards, body, free_vars: proto.free_vars.clone() }
}

fn proto_vars(proto: &ProtoRule) -> BTreeSet<Name> {
    Rule {
        patterns: vec![proto.pattern.clone()],
        guards: proto.guards.clone(),
        body: proto.body.clone(),
        free_vars: proto.free_vars.clone(),
    }
    .all_vars()
}

/// A strict guard introduced by linearization, with the callee whose
/// inverse binds the renamed variable (when it is bound by a case over an
/// inverse call).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearGuard {
    pub original: Name,
    pub renamed: Name,
    pub bound_by: Option<Name>,
}

/// Renames repeated binding occurrences apart and adds `x =:= x1` guards
/// in the scope of the later occurrence.
pub fn linearize(rule: &Rule) -> Rule {
    linearize_tracked(rule, &|_| None).0
}

fn linearize_tracked(rule: &Rule, callee_of: &impl Fn(&Name) -> Option<Name>) -> (Rule, Vec<LinearGuard>) {
    let mut lin = Linearizer { avoid: rule.all_vars(), scope: BTreeSet::new(), added: Vec::new(), callee_of };
    lin.scope.extend(rule.free_vars.iter().cloned());
    let mut guards = Vec::new();
    let patterns = rule.patterns.iter().map(|p| lin.pattern(p, &mut guards, None)).collect();
    guards.extend(rule.guards.iter().map(|g| lin.constraint(g)));
    let body = lin.expr(&rule.body);
    (Rule { patterns, guards, body, free_vars: rule.free_vars.clone() }, lin.added)
}

struct Linearizer<'a, F> {
    avoid: BTreeSet<Name>,
    scope: BTreeSet<Name>,
    added: Vec<LinearGuard>,
    callee_of: &'a F,
}

impl<F: Fn(&Name) -> Option<Name>> Linearizer<'_, F> {
    fn pattern(&mut self, p: &Pattern, guards: &mut Vec<Constraint>, bound_by: Option<&Name>) -> Pattern {
        match p {
            Pattern::Var(v) if self.scope.contains(v) => {
                let renamed = fresh_name(v.as_str(), &self.avoid);
                self.avoid.insert(renamed.clone());
                guards.push(Constraint::strict(Expr::Var(v.clone()), Expr::Var(renamed.clone())));
                self.added.push(LinearGuard {
                    original: v.clone(),
                    renamed: renamed.clone(),
                    bound_by: bound_by.cloned(),
                });
                Pattern::Var(renamed)
            }
            Pattern::Var(v) => {
                self.scope.insert(v.clone());
                p.clone()
            }
            Pattern::Ctor(c, ps) => {
                Pattern::Ctor(c.clone(), ps.iter().map(|q| self.pattern(q, guards, bound_by)).collect())
            }
            Pattern::FunCall(g, ps) => {
                Pattern::FunCall(g.clone(), ps.iter().map(|q| self.pattern(q, guards, bound_by)).collect())
            }
        }
    }

    fn constraint(&mut self, c: &Constraint) -> Constraint {
        Constraint { mode: c.mode, lhs: self.expr(&c.lhs), rhs: self.expr(&c.rhs) }
    }

    fn expr(&mut self, e: &Expr) -> Expr {
        match e {
            Expr::Var(_) | Expr::Failed => e.clone(),
            Expr::Ctor(c, es) => Expr::Ctor(c.clone(), es.iter().map(|x| self.expr(x)).collect()),
            Expr::App(g, es) => Expr::App(g.clone(), es.iter().map(|x| self.expr(x)).collect()),
            Expr::VarApp(g, es) => Expr::VarApp(g.clone(), es.iter().map(|x| self.expr(x)).collect()),
            Expr::Case(scrut, branches) => {
                let bound_by = match &**scrut {
                    Expr::App(h, _) => (self.callee_of)(h),
                    _ => None,
                };
                let scrut = self.expr(scrut);
                let branches = branches
                    .iter()
                    .map(|b| {
                        let saved = self.scope.clone();
                        let mut guards = Vec::new();
                        let pattern = self.pattern(&b.pattern, &mut guards, bound_by.as_ref());
                        guards.extend(b.guards.iter().map(|g| self.constraint(g)));
                        let body = self.expr(&b.body);
                        self.scope = saved;
                        Branch { pattern, guards, body }
                    })
                    .collect();
                Expr::Case(Box::new(scrut), branches)
            }
        }
    }
}

/// `f_inv z | f x1 … xn =:<= z = (x1, …, xn) where x1, …, xn free`.
pub fn fallback_inverse(f: &FuncDef, name: Name) -> FuncDef {
    let xs: Vec<Name> = (1..=f.arity).map(|i| Name::new(format!("x{i}"))).collect();
    let call = Expr::App(f.name.clone(), xs.iter().cloned().map(Expr::Var).collect());
    let body =
        if f.arity == 1 { Expr::Var(xs[0].clone()) } else { Expr::tuple(xs.iter().cloned().map(Expr::Var).collect()) };
    let z = Name::new("z");
    let rule = Rule {
        patterns: vec![Pattern::Var(z.clone())],
        guards: vec![Constraint::non_strict(call, Expr::Var(z))],
        body,
        free_vars: xs.into_iter().collect(),
    };
    synthesized(f, name, vec![rule])
}

fn synthesized(f: &FuncDef, name: Name, rules: Vec<Rule>) -> FuncDef {
    let signature = f.signature.as_ref().and_then(|t| t.split_arrows(f.arity)).map(|(params, result)| {
        let arg = if params.len() == 1 { params.into_iter().next().unwrap() } else { Type::tuple(params) };
        Type::Fun(Box::new(result), Box::new(arg))
    });
    FuncDef { name, arity: 1, rules, origin: Origin::Synthesized, signature }
}

/// Whether inverting `h` can yield answers containing free variables.
fn inverse_introduces_free(program: &Program, h: &Name, strategies: &IndexMap<Name, Strategy>) -> bool {
    std::iter::once(h.clone()).chain(program.transitive_callees(h)).any(|g| {
        matches!(strategies.get(&g), Some(Strategy::FallbackNsu(_)))
            || program
                .func(&g)
                .is_some_and(|d| d.rules.iter().any(|r| !extra_vars(&unflatten_rule(r)).unused_lhs.is_empty()))
    })
}

/// Rules of a direct inverse, the linearization guards it introduced, and
/// the callees whose inverses it calls.
type DirectParts = (Vec<Rule>, Vec<LinearGuard>, BTreeSet<Name>);

/// Inverse of one Direct function, plus the callees it needs inverses of.
fn direct_inverse(program: &Program, f: &FuncDef) -> Result<DirectParts, TransformError> {
    let mut needed = BTreeSet::new();
    let mut rules = Vec::new();
    let mut hazards = Vec::new();
    let inverse_names: BTreeMap<Name, Name> = program.funcs.keys().map(|g| (inverse_name(g), g.clone())).collect();
    for r in &f.rules {
        let proto = swap_rule(r, f.arity).ok_or_else(|| TransformError::Rejected {
            function: f.name.clone(),
            reason: "unsupported rule shape".into(),
        })?;
        let mut calls = BTreeSet::new();
        proto.pattern.called_functions(&mut calls);
        needed.extend(calls);
        let eliminated = eliminate_fun_pats(&proto, inverse_name);
        let (linear, added) = linearize_tracked(&eliminated, &|h| inverse_names.get(h).cloned());
        hazards.extend(added);
        rules.push(flatten_rule(&linear));
    }
    Ok((rules, hazards, needed))
}

/// Synthesized inverses: the requested one first, then those of callees.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub inverse: FuncDef,
    pub auxiliaries: Vec<FuncDef>,
    pub report: InversionReport,
}

impl Synthesis {
    pub fn functions(&self) -> impl Iterator<Item = &FuncDef> {
        std::iter::once(&self.inverse).chain(&self.auxiliaries)
    }

    /// `program` extended with every synthesized inverse.
    pub fn extend(&self, program: &Program) -> Program {
        let mut p = program.clone();
        for f in self.functions() {
            p.insert(f.clone());
        }
        p
    }
}

pub fn synthesize_inverse(program: &Program, fname: &Name, force_direct: bool) -> Result<Synthesis, TransformError> {
    synthesize_all(program, std::slice::from_ref(fname), force_direct)
}

fn synthesize_all(program: &Program, targets: &[Name], force_direct: bool) -> Result<Synthesis, TransformError> {
    let mut report = InversionReport::default();
    let mut done: IndexMap<Name, FuncDef> = IndexMap::new();
    let mut todo: VecDeque<(Name, bool)> = targets.iter().map(|t| (t.clone(), true)).collect();
    let mut hazards = Vec::new();
    while let Some((g, is_target)) = todo.pop_front() {
        if report.per_function.contains_key(&g) {
            continue;
        }
        let forced = force_direct && is_target;
        let strategy = classify(program, &g, forced)?;
        let def = program.func(&g).expect("classified");
        if forced {
            if let Ok(Strategy::FallbackNsu(reason)) = classify(program, &g, false) {
                report
                    .warnings
                    .push(format!("{g}: direct synthesis forced although {reason}; the inverse may lose answers"));
            }
        }
        report.per_function.insert(g.clone(), strategy.clone());
        match strategy {
            Strategy::Rejected(reason) => {
                return Err(TransformError::Rejected { function: g, reason });
            }
            Strategy::FallbackNsu(_) => {
                done.insert(g.clone(), fallback_inverse(def, inverse_name(&g)));
            }
            Strategy::Direct => {
                let (rules, added, needed) = direct_inverse(program, def)?;
                hazards.extend(added.into_iter().map(|h| (g.clone(), h)));
                done.insert(g.clone(), synthesized(def, inverse_name(&g), rules));
                todo.extend(needed.into_iter().map(|n| (n, false)));
            }
        }
    }
    for (g, h) in hazards {
        if let Some(callee) = &h.bound_by {
            if inverse_introduces_free(program, callee, &report.per_function) {
                report.warnings.push(format!(
                    "{}: guard `{} =:= {}` strictly compares a value returned by {}, which can be an unbound free \
                     variable; answers that leave it unevaluated are lost",
                    inverse_name(&g),
                    h.original,
                    h.renamed,
                    inverse_name(callee),
                ));
            }
        }
    }
    let mut fs = done.into_values();
    let inverse = fs.next().expect("at least the target");
    Ok(Synthesis { inverse, auxiliaries: fs.collect(), report })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElabMode {
    /// Functional patterns become `=:<=` guards.
    Nsu,
    /// Functional patterns become case expressions over inverse calls.
    InverseCalls,
}

#[derive(Clone, Debug)]
pub struct Elaboration {
    pub program: Program,
    pub report: InversionReport,
}

/// `f … p … = e` with functional pattern `p` becomes
/// `f … z … | p =:<= z = e where vars(p) free`.
pub fn elaborate_nsu(program: &Program) -> Program {
    let mut out = program.clone();
    for f in out.funcs.values_mut() {
        for rule in f.rules.iter_mut().filter(|r| r.patterns.iter().any(Pattern::is_functional)) {
            let mut avoid = rule.all_vars();
            let mut guards = Vec::new();
            let mut free = rule.free_vars.clone();
            for p in rule.patterns.iter_mut().filter(|p| p.is_functional()) {
                let z = fresh_name("z", &avoid);
                avoid.insert(z.clone());
                free.extend(p.vars());
                guards.push(Constraint::non_strict(p.to_expr(), Expr::Var(z.clone())));
                *p = Pattern::Var(z);
            }
            guards.append(&mut rule.guards);
            rule.guards = guards;
            rule.free_vars = free;
        }
    }
    out
}

/// Replaces functional patterns with case expressions over inverse calls,
/// adding the needed inverses to the program.
pub fn elaborate_inverse_calls(program: &Program) -> Result<Elaboration, TransformError> {
    let mut out = program.clone();
    let mut needed = BTreeSet::new();
    for f in out.funcs.values_mut() {
        for rule in f.rules.iter_mut().filter(|r| r.patterns.iter().any(Pattern::is_functional)) {
            let mut avoid = rule.all_vars();
            let mut queue = VecDeque::new();
            rule.patterns = rule.patterns.iter().map(|p| cut_calls(p, &mut avoid, &mut queue)).collect();
            for (_, g, args) in &queue {
                needed.insert(g.clone());
                args.iter().for_each(|a| a.called_functions(&mut needed));
            }
            let (guards, body) = case_chain(queue, rule.guards.clone(), rule.body.clone(), &mut avoid, &inverse_name);
            rule.guards = guards;
            rule.body = body;
            *rule = flatten_rule(&linearize(rule));
        }
    }
    if needed.is_empty() {
        return Ok(Elaboration { program: out, report: InversionReport::default() });
    }
    let targets: Vec<Name> = needed.into_iter().collect();
    let synthesis = synthesize_all(program, &targets, false)?;
    Ok(Elaboration { program: synthesis.extend(&out), report: synthesis.report })
}

pub fn elaborate(program: &Program, mode: ElabMode) -> Result<Elaboration, TransformError> {
    match mode {
        ElabMode::Nsu => Ok(Elaboration { program: elaborate_nsu(program), report: InversionReport::default() }),
        ElabMode::InverseCalls => elaborate_inverse_calls(program),
    }
}

/// Strategies of every user-written function that has at least one
/// argument, in definition order.
pub fn classify_all(program: &Program) -> IndexMap<Name, Strategy> {
    program
        .funcs
        .values()
        .filter(|f| f.origin == Origin::UserWritten)
        .map(|f| (f.name.clone(), classify(program, &f.name, false).expect("defined")))
        .collect()
}

/// No variable is bound twice on a path through the rule: neither within
/// the left-hand side nor by a case branch that is already in its scope.
pub fn is_left_linear(rule: &Rule) -> bool {
    fn expr(e: &Expr, scope: &BTreeSet<Name>) -> bool {
        match e {
            Expr::Var(_) | Expr::Failed => true,
            Expr::Ctor(_, es) | Expr::App(_, es) | Expr::VarApp(_, es) => es.iter().all(|x| expr(x, scope)),
            Expr::Case(s, bs) => {
                expr(s, scope)
                    && bs.iter().all(|b| {
                        let vars = b.pattern.vars();
                        let mut inner = scope.clone();
                        vars.iter().all(|v| inner.insert(v.clone()))
                            && b.guards.iter().all(|g| expr(&g.lhs, &inner) && expr(&g.rhs, &inner))
                            && expr(&b.body, &inner)
                    })
            }
        }
    }
    let mut scope = rule.free_vars.clone();
    rule.patterns.iter().flat_map(Pattern::vars).all(|v| scope.insert(v))
        && rule.guards.iter().all(|g| expr(&g.lhs, &scope) && expr(&g.rhs, &scope))
        && expr(&rule.body, &scope)
}

#[cfg(test)]
mod tests;
