//! Bounded exhaustive checks of synthesized inverses: the round-trip
//! property `f_inv (f x1 … xn) ∋ (x1, …, xn)` and answer-set equivalence
//! of two functions, optionally probing non-strictness with `failed`.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

use crate::ast::{inverse_name, tuple_ctor, Expr, FuncDef, Name, Program, Type};
use crate::eval::{EvalConfig, EvalError, Evaluator, ResultSet, ResultTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "Pass",
            Verdict::Fail => "Fail",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// The query that misbehaved, e.g. `g_inv (0, failed)`.
    pub input: Expr,
    pub expected: Vec<ResultTerm>,
    pub actual: Vec<ResultTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub states_explored: usize,
    pub truncated: bool,
    /// Number of inputs examined.
    pub cases: usize,
}

impl CheckOutcome {
    pub fn to_json(&self, functions: &[&Name], types: &[Type], depth: usize) -> Value {
        let terms = |ts: &[ResultTerm]| ts.iter().map(ToString::to_string).collect::<Vec<_>>();
        let mut v = json!({
            "functions": functions.iter().map(|f| f.as_str()).collect::<Vec<_>>(),
            "spec": {"types": types.iter().map(ToString::to_string).collect::<Vec<_>>(), "depth": depth},
            "verdict": self.verdict.label(),
            "statesExplored": self.states_explored,
            "truncated": self.truncated,
            "cases": self.cases,
        });
        if let Some(c) = &self.counterexample {
            v["counterexample"] = json!({
                "input": c.input.to_string(),
                "expectedSet": terms(&c.expected),
                "actualSet": terms(&c.actual),
            });
        }
        v
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} inputs, {} states", self.verdict, self.cases, self.states_explored)?;
        if self.truncated {
            f.write_str(", truncated")?;
        }
        f.write_str(")")?;
        if let Some(c) = &self.counterexample {
            let set = |ts: &[ResultTerm]| ts.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
            write!(
                f,
                "\n  input:    {}\n  expected: {{{}}}\n  actual:   {{{}}}",
                c.input,
                set(&c.expected),
                set(&c.actual)
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("type `{0}` still has type variables")]
    TypeVariable(String),
    #[error("function types cannot be enumerated")]
    FunctionType,
    #[error("unknown function `{0}`")]
    UnknownFunction(Name),
    #[error("`{0}` has no synthesized inverse in the program")]
    MissingInverse(Name),
    #[error("`{0}` takes {1} arguments, got {2} types")]
    ArityMismatch(Name, usize, usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probes {
    GroundOnly,
    WithFailed,
}

/// All ground terms of `ty` with constructor nesting at most `depth`,
/// constructors in declaration order and children varying last-first.
pub fn enumerate_terms(program: &Program, ty: &Type, depth: usize) -> Result<Vec<ResultTerm>, CheckError> {
    if depth == 0 {
        return Ok(vec![]);
    }
    let (name, args) = match ty {
        Type::Con(n, args) => (n, args),
        Type::Var(v) => return Err(CheckError::TypeVariable(v.clone())),
        Type::Fun(..) => return Err(CheckError::FunctionType),
    };
    let decl = program.data_type(name).ok_or_else(|| CheckError::UnknownType(name.to_string()))?;
    if decl.params.len() != args.len() {
        return Err(CheckError::UnknownType(ty.to_string()));
    }
    let mut out = Vec::new();
    for c in &decl.constructors {
        let mut fields = Vec::new();
        for t in &c.fields {
            let t = substitute(t, &decl.params, args);
            fields.push(enumerate_terms(program, &t, depth - 1)?);
        }
        for kids in product(&fields) {
            out.push(ResultTerm::Ctor(c.name.clone(), kids));
        }
    }
    Ok(out)
}

fn substitute(t: &Type, params: &[String], args: &[Type]) -> Type {
    match t {
        Type::Var(v) => params.iter().position(|p| p == v).map_or_else(|| t.clone(), |i| args[i].clone()),
        Type::Con(n, ts) => Type::Con(n.clone(), ts.iter().map(|t| substitute(t, params, args)).collect()),
        Type::Fun(a, b) => Type::Fun(Box::new(substitute(a, params, args)), Box::new(substitute(b, params, args))),
    }
}

/// Cartesian product, first component varying slowest.
fn product(sets: &[Vec<ResultTerm>]) -> Vec<Vec<ResultTerm>> {
    sets.iter().fold(vec![vec![]], |acc, set| {
        acc.into_iter()
            .flat_map(|prefix| {
                set.iter().map(move |t| {
                    let mut v = prefix.clone();
                    v.push(t.clone());
                    v
                })
            })
            .collect()
    })
}

/// Parameter and result types of a signature, type variables read as
/// `Bool`.
pub fn signature_types(f: &FuncDef) -> Option<(Vec<Type>, Type)> {
    let bool_ty = Type::Con(Name::new("Bool"), vec![]);
    let sig = f.signature.as_ref()?.instantiate(&bool_ty);
    sig.split_arrows(f.arity)
}

fn tuple_of(mut terms: Vec<ResultTerm>) -> ResultTerm {
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        ResultTerm::Ctor(tuple_ctor(terms.len()), terms)
    }
}

fn free_names(t: &ResultTerm, out: &mut BTreeSet<Name>) {
    match t {
        ResultTerm::Ctor(_, ts) => ts.iter().for_each(|t| free_names(t, out)),
        ResultTerm::Free(i) => {
            out.insert(Name::new(format!("_{i}")));
        }
        ResultTerm::Pending => {}
    }
}

fn arity_of(program: &Program, f: &Name, types: &[Type]) -> Result<(), CheckError> {
    let def = program.func(f).ok_or_else(|| CheckError::UnknownFunction(f.clone()))?;
    if def.arity != types.len() {
        return Err(CheckError::ArityMismatch(f.clone(), def.arity, types.len()));
    }
    Ok(())
}

fn inputs(program: &Program, types: &[Type], depth: usize) -> Result<Vec<Vec<ResultTerm>>, CheckError> {
    let sets = types.iter().map(|t| enumerate_terms(program, t, depth)).collect::<Result<Vec<_>, _>>()?;
    Ok(product(&sets))
}

/// For every argument tuple of `f`, every value `v` of `f x1 … xn` must
/// have `(x1, …, xn)` among the answers of `f_inv v`. Answers with free
/// variables count when they can be instantiated to the tuple.
pub fn roundtrip_check(
    program: &Program,
    f: &Name,
    param_types: &[Type],
    depth: usize,
    config: EvalConfig,
) -> Result<CheckOutcome, CheckError> {
    arity_of(program, f, param_types)?;
    let inv = inverse_name(f);
    if program.func(&inv).is_none() {
        return Err(CheckError::MissingInverse(f.clone()));
    }
    let ev = Evaluator::new(program)?;
    let mut states = 0;
    let mut truncated = false;
    let mut cases = 0;
    for args in inputs(program, param_types, depth)? {
        cases += 1;
        let call = Expr::App(f.clone(), args.iter().map(ResultTerm::to_expr).collect());
        let forward = ev.run(&call, &BTreeSet::new(), config)?;
        states += forward.states_explored;
        truncated |= forward.truncated;
        let expected = tuple_of(args);
        for v in &forward.results {
            let mut free = BTreeSet::new();
            free_names(v, &mut free);
            let query = Expr::App(inv.clone(), vec![v.to_expr()]);
            let mut search = ev.search_nf(&query, &free, config)?;
            let mut found = false;
            while let Some(answer) = search.next_answer()? {
                if answer == expected || answer.subsumes(&expected) {
                    found = true;
                    break;
                }
            }
            states += search.states_explored();
            if found {
                continue;
            }
            if search.truncated() {
                truncated = true;
                continue;
            }
            let actual = search.collect_all()?.results.into_iter().collect();
            return Ok(CheckOutcome {
                verdict: Verdict::Fail,
                counterexample: Some(Counterexample { input: query, expected: vec![expected], actual }),
                states_explored: states,
                truncated,
                cases,
            });
        }
    }
    let verdict = if truncated { Verdict::Inconclusive } else { Verdict::Pass };
    Ok(CheckOutcome { verdict, counterexample: None, states_explored: states, truncated, cases })
}

/// Replaces the subterm at preorder position `pos` (counted across all
/// arguments) by `failed`.
fn probe(args: &[ResultTerm], pos: usize) -> Vec<Expr> {
    fn go(t: &ResultTerm, pos: &mut usize, target: usize) -> Expr {
        let here = *pos;
        *pos += 1;
        if here == target {
            return Expr::Failed;
        }
        match t {
            ResultTerm::Ctor(c, ts) => Expr::Ctor(c.clone(), ts.iter().map(|t| go(t, pos, target)).collect()),
            other => other.to_expr(),
        }
    }
    let mut counter = 0;
    args.iter().map(|a| go(a, &mut counter, pos)).collect()
}

fn size(t: &ResultTerm) -> usize {
    match t {
        ResultTerm::Ctor(_, ts) => 1 + ts.iter().map(size).sum::<usize>(),
        _ => 1,
    }
}

/// Whether `term` is an answer of `query`: decided by the first search if
/// it was complete, otherwise by a longer search.
enum Membership {
    Yes,
    No,
    Unknown,
}

struct Answers {
    results: ResultSet,
    truncated: bool,
}

fn contains(
    ev: &Evaluator,
    query: &Expr,
    first: &Answers,
    term: &ResultTerm,
    config: EvalConfig,
    states: &mut usize,
) -> Result<Membership, CheckError> {
    if first.results.contains(term) {
        return Ok(Membership::Yes);
    }
    if !first.truncated {
        return Ok(Membership::No);
    }
    let longer = EvalConfig {
        max_steps: config.max_steps.saturating_mul(4),
        max_results: config.max_results.saturating_mul(4),
        ..config
    };
    let mut search = ev.search_nf(query, &BTreeSet::new(), longer)?;
    while let Some(answer) = search.next_answer()? {
        if &answer == term {
            *states += search.states_explored();
            return Ok(Membership::Yes);
        }
    }
    *states += search.states_explored();
    Ok(if search.truncated() { Membership::Unknown } else { Membership::No })
}

/// Compares the answer sets of `candidate` and `reference` on every
/// enumerated input (and, with `Probes::WithFailed`, on every input with
/// one position replaced by `failed`). Complete answer sets must be equal;
/// truncated ones must each be contained in the other side's answers.
pub fn equivalence_check(
    program: &Program,
    candidate: &Name,
    reference: &Name,
    arg_types: &[Type],
    depth: usize,
    config: EvalConfig,
    probes: Probes,
) -> Result<CheckOutcome, CheckError> {
    arity_of(program, candidate, arg_types)?;
    arity_of(program, reference, arg_types)?;
    let ev = Evaluator::new(program)?;
    let ground = inputs(program, arg_types, depth)?;
    let mut all: Vec<Vec<Expr>> = ground.iter().map(|args| args.iter().map(ResultTerm::to_expr).collect()).collect();
    if probes == Probes::WithFailed {
        for args in &ground {
            let positions: usize = args.iter().map(size).sum();
            all.extend((0..positions).map(|p| probe(args, p)));
        }
    }
    let mut states = 0;
    let mut truncated = false;
    let mut inconclusive = false;
    let mut cases = 0;
    for args in all {
        cases += 1;
        let qa = Expr::App(candidate.clone(), args.clone());
        let qb = Expr::App(reference.clone(), args);
        let ra = ev.run(&qa, &BTreeSet::new(), config)?;
        let rb = ev.run(&qb, &BTreeSet::new(), config)?;
        states += ra.states_explored + rb.states_explored;
        truncated |= ra.truncated || rb.truncated;
        let a = Answers { results: ra.results, truncated: ra.truncated };
        let b = Answers { results: rb.results, truncated: rb.truncated };
        let mut differs = false;
        for (from, other, other_query) in [(&a, &b, &qb), (&b, &a, &qa)] {
            for t in &from.results {
                match contains(&ev, other_query, other, t, config, &mut states)? {
                    Membership::Yes => {}
                    Membership::No => differs = true,
                    Membership::Unknown => inconclusive = true,
                }
            }
        }
        if differs {
            return Ok(CheckOutcome {
                verdict: Verdict::Fail,
                counterexample: Some(Counterexample {
                    input: qa,
                    expected: b.results.into_iter().collect(),
                    actual: a.results.into_iter().collect(),
                }),
                states_explored: states,
                truncated,
                cases,
            });
        }
    }
    let verdict = if inconclusive { Verdict::Inconclusive } else { Verdict::Pass };
    Ok(CheckOutcome { verdict, counterexample: None, states_explored: states, truncated, cases })
}
