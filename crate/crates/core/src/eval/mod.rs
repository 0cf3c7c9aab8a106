//! Lazy narrowing evaluator.
//!
//! Each search state owns a persistent term store and an explicit stack of
//! continuation frames, so that a choice point is handled by cloning the
//! state. Thunks are overwritten with their head normal form; arguments
//! are shared through the environments of rule bodies.

mod compile;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexSet;

use crate::ast::{tuple_ctor, Constraint, Expr, Mode, Name, Program, VarOccurrences, TRUE};
use crate::desugar::flatten_expr;
use compile::{BranchPat, CBranch, CConstraint, CExpr, CPat, CRule, Code, CtorId, FuncId, Scope};

pub type NodeRef = usize;

const UNSET: NodeRef = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SearchStrategy {
    #[default]
    Bfs,
    Dfs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub strategy: SearchStrategy,
    pub max_steps: u64,
    pub max_results: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { strategy: SearchStrategy::Bfs, max_steps: 100_000, max_results: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("higher-order application of `{0}` cannot be evaluated")]
    HigherOrder(Name),
    #[error("`{0}` still has functional patterns")]
    FunctionalPattern(Name),
    #[error("unknown {0}")]
    Unknown(String),
}

/// A computed answer. `Free` leaves are numbered in depth-first order from
/// zero; `Pending` only appears in head-normal-form and binding answers,
/// for positions left unevaluated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResultTerm {
    Ctor(Name, Vec<ResultTerm>),
    Free(usize),
    Pending,
}

impl ResultTerm {
    pub fn ctor0(name: &str) -> Self {
        ResultTerm::Ctor(Name::new(name), vec![])
    }

    pub fn is_ground(&self) -> bool {
        match self {
            ResultTerm::Ctor(_, ts) => ts.iter().all(ResultTerm::is_ground),
            ResultTerm::Free(_) | ResultTerm::Pending => false,
        }
    }

    pub fn has_free(&self) -> bool {
        match self {
            ResultTerm::Ctor(_, ts) => ts.iter().any(ResultTerm::has_free),
            ResultTerm::Free(_) => true,
            ResultTerm::Pending => false,
        }
    }

    /// The term as an expression, free leaves becoming variables `_0`, `_1`, ….
    pub fn to_expr(&self) -> Expr {
        match self {
            ResultTerm::Ctor(c, ts) => Expr::Ctor(c.clone(), ts.iter().map(ResultTerm::to_expr).collect()),
            ResultTerm::Free(i) => Expr::Var(Name::new(format!("_{i}"))),
            ResultTerm::Pending => Expr::Var(Name::new("?")),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ResultTerm::Ctor(_, ts) => 1 + ts.iter().map(ResultTerm::depth).max().unwrap_or(0),
            _ => 1,
        }
    }

    /// Whether some consistent instantiation of this term's free leaves
    /// yields `ground`.
    pub fn subsumes(&self, ground: &ResultTerm) -> bool {
        fn go<'a>(p: &ResultTerm, g: &'a ResultTerm, env: &mut HashMap<usize, &'a ResultTerm>) -> bool {
            match (p, g) {
                (ResultTerm::Free(i), _) => match env.get(i) {
                    Some(bound) => *bound == g,
                    None => {
                        env.insert(*i, g);
                        true
                    }
                },
                (ResultTerm::Ctor(c, ps), ResultTerm::Ctor(d, gs)) => {
                    c == d && ps.len() == gs.len() && ps.iter().zip(gs).all(|(p, g)| go(p, g, env))
                }
                _ => false,
            }
        }
        go(self, ground, &mut HashMap::new())
    }
}

impl fmt::Display for ResultTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Deduplicated answers in discovery order; equality ignores order.
pub type ResultSet = IndexSet<ResultTerm>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryResult {
    pub results: ResultSet,
    pub truncated: bool,
    pub states_explored: usize,
    pub steps: u64,
}

#[derive(Clone, Debug)]
enum Node {
    Ctor(CtorId, Arc<[NodeRef]>),
    Thunk(Arc<CExpr>, Env),
    Free,
    Ind(NodeRef),
}

type Env = Arc<Vec<NodeRef>>;

#[derive(Clone, Debug)]
enum Control {
    Eval(NodeRef),
    Expr(Arc<CExpr>, Env),
    Return(NodeRef),
    Unit,
    Unify(Mode, NodeRef, NodeRef),
    Nf(NodeRef),
}

#[derive(Clone, Debug)]
enum Frame {
    Update(NodeRef),
    Select { func: FuncId, args: Arc<[NodeRef]>, cands: Vec<usize>, k: usize },
    Match { rule: Arc<CRule>, env: Vec<NodeRef>, work: Vec<(Arc<CPat>, NodeRef)>, awaiting: Option<Arc<CPat>> },
    Guards { guards: Arc<[CConstraint]>, i: usize, env: Env, body: Arc<CExpr> },
    Case { branches: Arc<[CBranch]>, env: Env },
    NfHnf,
    NfKids { root: NodeRef, kids: Arc<[NodeRef]>, i: usize },
    UnifyLeft { right: NodeRef },
    UnifyRight { left: NodeRef },
    BindAfterNf { var: NodeRef, term: NodeRef },
    Kids { mode: Mode, left: Arc<[NodeRef]>, right: Arc<[NodeRef]>, i: usize },
    NsuPattern { value: NodeRef },
    NsuValue { ctor: CtorId, kids: Arc<[NodeRef]> },
}

/// Continuation stack shared between cloned states: pushing and cloning
/// are O(1), so branching does not copy deep stacks.
#[derive(Clone, Debug, Default)]
struct Stack(Option<Arc<StackCell>>);

#[derive(Debug)]
struct StackCell {
    frame: Frame,
    below: Stack,
}

impl Stack {
    fn push(&mut self, frame: Frame) {
        let below = Stack(self.0.take());
        self.0 = Some(Arc::new(StackCell { frame, below }));
    }

    fn pop(&mut self) -> Option<Frame> {
        let cell = self.0.take()?;
        match Arc::try_unwrap(cell) {
            Ok(mut cell) => {
                self.0 = cell.below.0.take();
                Some(cell.frame)
            }
            Err(shared) => {
                self.0 = shared.below.0.clone();
                Some(shared.frame.clone())
            }
        }
    }
}

impl Drop for Stack {
    // Iterative, so that dropping a deep stack cannot overflow.
    fn drop(&mut self) {
        let mut next = self.0.take();
        while let Some(cell) = next {
            match Arc::try_unwrap(cell) {
                Ok(mut cell) => next = cell.below.0.take(),
                Err(_) => break,
            }
        }
    }
}

#[derive(Clone, Debug)]
struct State {
    store: im::Vector<Node>,
    stack: Stack,
    control: Control,
    steps: u64,
    /// Steps already charged to the search budget.
    charged: u64,
}

enum Advance {
    Done(State),
    Branch(Vec<State>),
    Fail,
    OutOfSteps,
    Error(EvalError),
}

/// What is read back from a finished state.
#[derive(Clone, Debug)]
enum Readout {
    Nf(NodeRef),
    Hnf(NodeRef),
    Bindings(Vec<NodeRef>),
}

impl State {
    fn alloc(&mut self, n: Node) -> NodeRef {
        self.store.push_back(n);
        self.store.len() - 1
    }

    fn deref(&self, mut n: NodeRef) -> NodeRef {
        while let Node::Ind(m) = self.store[n] {
            n = m;
        }
        n
    }

    fn bind(&mut self, var: NodeRef, target: NodeRef) {
        debug_assert!(matches!(self.store[var], Node::Free));
        self.store.set(var, Node::Ind(target));
    }

    fn build(&mut self, e: &Arc<CExpr>, env: &Env) -> NodeRef {
        match &**e {
            CExpr::Var(s) => env[*s as usize],
            CExpr::Ctor(c, es) => {
                let kids: Arc<[NodeRef]> = es.iter().map(|e| self.build(e, env)).collect();
                self.alloc(Node::Ctor(*c, kids))
            }
            _ => self.alloc(Node::Thunk(e.clone(), env.clone())),
        }
    }

    fn fresh_ctor(&mut self, c: CtorId, arity: usize) -> (NodeRef, Arc<[NodeRef]>) {
        let kids: Arc<[NodeRef]> = (0..arity).map(|_| self.alloc(Node::Free)).collect();
        let n = self.alloc(Node::Ctor(c, kids.clone()));
        (n, kids)
    }

    fn occurs(&self, var: NodeRef, term: NodeRef) -> bool {
        let mut seen = HashSet::new();
        let mut todo = vec![term];
        while let Some(n) = todo.pop() {
            let n = self.deref(n);
            if n == var {
                return true;
            }
            if seen.insert(n) {
                if let Node::Ctor(_, kids) = &self.store[n] {
                    todo.extend(kids.iter().copied());
                }
            }
        }
        false
    }

    fn read(&self, n: NodeRef, code: &Code, names: &mut HashMap<NodeRef, usize>) -> ResultTerm {
        let n = self.deref(n);
        match &self.store[n] {
            Node::Ctor(c, kids) => {
                ResultTerm::Ctor(code.ctor_name(*c).clone(), kids.iter().map(|k| self.read(*k, code, names)).collect())
            }
            Node::Free => {
                let next = names.len();
                ResultTerm::Free(*names.entry(n).or_insert(next))
            }
            Node::Thunk(..) => ResultTerm::Pending,
            Node::Ind(_) => unreachable!("dereferenced"),
        }
    }
}

/// A program compiled for evaluation. Functional patterns are elaborated
/// into `=:<=` guards first.
#[derive(Debug)]
pub struct Evaluator {
    code: Code,
    program: Program,
}

impl Evaluator {
    pub fn new(program: &Program) -> Result<Self, EvalError> {
        let program = if program.funcs.values().any(|f| f.has_functional_patterns()) {
            crate::transform::elaborate_nsu(program)
        } else {
            program.clone()
        };
        Ok(Evaluator { code: Code::new(&program)?, program })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    fn start(&self, free_vars: &BTreeSet<Name>, exprs: &[&Expr]) -> Result<(State, Env, Vec<NodeRef>), EvalError> {
        let mut cx = Scope::default();
        for v in free_vars {
            cx.bind(v);
        }
        let mut avoid: BTreeSet<Name> = free_vars.clone();
        for e in exprs {
            avoid.extend(e.var_occurrences().into_keys());
        }
        let compiled = exprs
            .iter()
            .map(|e| self.code.expr(&flatten_expr(e, &mut avoid), &mut cx))
            .collect::<Result<Vec<_>, _>>()?;
        let mut st =
            State { store: im::Vector::new(), stack: Stack::default(), control: Control::Unit, steps: 0, charged: 0 };
        let mut env = vec![UNSET; cx.slots()];
        for slot in env.iter_mut().take(free_vars.len()) {
            *slot = st.alloc(Node::Free);
        }
        let env: Env = Arc::new(env);
        let roots = compiled.iter().map(|e| st.build(e, &env)).collect();
        Ok((st, env, roots))
    }

    /// Normal forms of `expr`, whose free variables must be listed in
    /// `free_vars`.
    pub fn search_nf(
        &self,
        expr: &Expr,
        free_vars: &BTreeSet<Name>,
        config: EvalConfig,
    ) -> Result<Search<'_>, EvalError> {
        let (mut st, _, roots) = self.start(free_vars, &[expr])?;
        st.control = Control::Nf(roots[0]);
        Ok(Search::new(self, st, Readout::Nf(roots[0]), config))
    }

    /// Head normal forms of `expr`; unevaluated positions read as `Pending`.
    pub fn search_hnf(
        &self,
        expr: &Expr,
        free_vars: &BTreeSet<Name>,
        config: EvalConfig,
    ) -> Result<Search<'_>, EvalError> {
        let (mut st, _, roots) = self.start(free_vars, &[expr])?;
        st.control = Control::Eval(roots[0]);
        Ok(Search::new(self, st, Readout::Hnf(roots[0]), config))
    }

    /// Solutions of a constraint. Each answer lists the bindings of
    /// `free_vars` in order: `True` when there are none, the single term for
    /// one variable, a tuple otherwise. Bindings are not normalized.
    pub fn search_constraint(
        &self,
        c: &Constraint,
        free_vars: &BTreeSet<Name>,
        config: EvalConfig,
    ) -> Result<Search<'_>, EvalError> {
        let (mut st, env, roots) = self.start(free_vars, &[&c.lhs, &c.rhs])?;
        st.control = Control::Unify(c.mode, roots[0], roots[1]);
        let vars = env[..free_vars.len()].to_vec();
        Ok(Search::new(self, st, Readout::Bindings(vars), config))
    }

    pub fn run(&self, expr: &Expr, free_vars: &BTreeSet<Name>, config: EvalConfig) -> Result<QueryResult, EvalError> {
        self.search_nf(expr, free_vars, config)?.collect_all()
    }

    /// Runs the machine until the state finishes, fails or branches.
    fn advance(&self, mut st: State, budget: &mut Budget) -> Advance {
        loop {
            if !budget.tick(&mut st) {
                return Advance::OutOfSteps;
            }
            let control = std::mem::replace(&mut st.control, Control::Unit);
            match control {
                Control::Eval(n) => {
                    let n = st.deref(n);
                    match &st.store[n] {
                        Node::Ctor(..) | Node::Free => st.control = Control::Return(n),
                        Node::Thunk(e, env) => {
                            let (e, env) = (e.clone(), env.clone());
                            st.stack.push(Frame::Update(n));
                            st.control = Control::Expr(e, env);
                        }
                        Node::Ind(_) => unreachable!(),
                    }
                }
                Control::Expr(e, env) => match &*e {
                    CExpr::Var(s) => st.control = Control::Eval(env[*s as usize]),
                    CExpr::Ctor(..) => {
                        let n = st.build(&e, &env);
                        st.control = Control::Return(n);
                    }
                    CExpr::Call(f, es) => {
                        let args: Arc<[NodeRef]> = es.iter().map(|a| st.build(a, &env)).collect();
                        let cands = (0..self.code.funcs[*f as usize].rules.len()).collect();
                        if let Some(a) = self.select(&mut st, *f, args, cands, 0) {
                            return a;
                        }
                    }
                    CExpr::Case(scrut, branches) => {
                        if let [CBranch { pat: BranchPat::Var(s), .. }] = &**branches {
                            let n = st.build(scrut, &env);
                            let mut inner = (*env).clone();
                            inner[*s as usize] = n;
                            enter_guards(
                                &mut st,
                                branches[0].guards.clone(),
                                Arc::new(inner),
                                branches[0].body.clone(),
                            );
                        } else {
                            st.stack.push(Frame::Case { branches: branches.clone(), env: env.clone() });
                            st.control = Control::Expr(scrut.clone(), env);
                        }
                    }
                    CExpr::Failed => return Advance::Fail,
                    CExpr::VarApp(v) => return Advance::Error(EvalError::HigherOrder(v.clone())),
                },
                Control::Nf(n) => {
                    st.stack.push(Frame::NfHnf);
                    st.control = Control::Eval(n);
                }
                Control::Unify(mode, a, b) => {
                    st.stack.push(match mode {
                        Mode::Strict => Frame::UnifyLeft { right: b },
                        Mode::NonStrict => Frame::NsuPattern { value: b },
                    });
                    st.control = Control::Eval(a);
                }
                Control::Unit => match st.stack.pop() {
                    None => return Advance::Done(st),
                    Some(Frame::Guards { guards, i, env, body }) => {
                        if let Some(g) = guards.get(i) {
                            let (l, r) = (st.build(&g.lhs, &env), st.build(&g.rhs, &env));
                            st.control = Control::Unify(g.mode, l, r);
                            st.stack.push(Frame::Guards { guards: guards.clone(), i: i + 1, env, body });
                        } else {
                            st.control = Control::Expr(body, env);
                        }
                    }
                    Some(Frame::Kids { mode, left, right, i }) => {
                        if i < left.len() {
                            st.control = Control::Unify(mode, left[i], right[i]);
                            st.stack.push(Frame::Kids { mode, left, right, i: i + 1 });
                        }
                    }
                    Some(other) => unreachable!("unit returned to {other:?}"),
                },
                Control::Return(v) => {
                    let v = st.deref(v);
                    let Some(frame) = st.stack.pop() else { return Advance::Done(st) };
                    if let Some(a) = self.resume(&mut st, frame, v) {
                        return a;
                    }
                }
            }
        }
    }

    /// Hands an HNF node to the frame that asked for it.
    fn resume(&self, st: &mut State, frame: Frame, v: NodeRef) -> Option<Advance> {
        match frame {
            Frame::Update(n) => {
                if n != v {
                    st.store.set(n, Node::Ind(v));
                }
                st.control = Control::Return(v);
            }
            Frame::Select { func, args, mut cands, k } => {
                let j = self.code.funcs[func as usize].demanded[k];
                if let Node::Ctor(c, _) = st.store[v] {
                    let rules = &self.code.funcs[func as usize].rules;
                    cands.retain(|&r| matches!(*rules[r].pats[j], CPat::Ctor(d, _) if d == c));
                }
                return self.select(st, func, args, cands, k + 1);
            }
            Frame::Match { rule, env, mut work, awaiting } => {
                let Some(pat) = awaiting else { unreachable!() };
                let CPat::Ctor(c, subs) = &*pat else { unreachable!() };
                let kids = match &st.store[v] {
                    Node::Ctor(d, kids) if d == c => kids.clone(),
                    Node::Ctor(..) => return Some(Advance::Fail),
                    Node::Free => {
                        st.steps += 1;
                        let (n, kids) = st.fresh_ctor(*c, subs.len());
                        st.bind(v, n);
                        kids
                    }
                    _ => unreachable!("not in head normal form"),
                };
                work.extend(subs.iter().cloned().zip(kids.iter().copied()).rev());
                self.match_rule(st, rule, env, work);
            }
            Frame::Case { branches, env } => {
                let enter = |st: &mut State, b: &CBranch, kids: &[NodeRef]| {
                    let mut inner = (*env).clone();
                    match &b.pat {
                        BranchPat::Var(s) => inner[*s as usize] = v,
                        BranchPat::Ctor(_, slots) => slots.iter().zip(kids).for_each(|(s, k)| inner[*s as usize] = *k),
                    }
                    enter_guards(st, b.guards.clone(), Arc::new(inner), b.body.clone());
                };
                match st.store[v].clone() {
                    Node::Ctor(c, kids) => {
                        let b = branches
                            .iter()
                            .find(|b| matches!(b.pat, BranchPat::Ctor(d, _) if d == c))
                            .or_else(|| branches.iter().find(|b| matches!(b.pat, BranchPat::Var(_))));
                        match b {
                            Some(b) => enter(st, b, &kids),
                            None => return Some(Advance::Fail),
                        }
                    }
                    Node::Free => {
                        let mut states = Vec::new();
                        for b in branches.iter() {
                            let mut s = st.clone();
                            match &b.pat {
                                BranchPat::Ctor(c, slots) => {
                                    s.steps += 1;
                                    let (n, kids) = s.fresh_ctor(*c, slots.len());
                                    s.bind(v, n);
                                    enter(&mut s, b, &kids);
                                }
                                BranchPat::Var(_) => enter(&mut s, b, &[]),
                            }
                            states.push(s);
                        }
                        return Some(Advance::Branch(states));
                    }
                    _ => unreachable!("not in head normal form"),
                }
            }
            Frame::NfHnf => match &st.store[v] {
                Node::Ctor(_, kids) if !kids.is_empty() => {
                    let kids = kids.clone();
                    st.control = Control::Nf(kids[0]);
                    st.stack.push(Frame::NfKids { root: v, kids, i: 1 });
                }
                _ => st.control = Control::Return(v),
            },
            Frame::NfKids { root, kids, i } => {
                if i < kids.len() {
                    st.control = Control::Nf(kids[i]);
                    st.stack.push(Frame::NfKids { root, kids, i: i + 1 });
                } else {
                    st.control = Control::Return(root);
                }
            }
            Frame::UnifyLeft { right } => {
                st.stack.push(Frame::UnifyRight { left: v });
                st.control = Control::Eval(right);
            }
            Frame::UnifyRight { left } => {
                let a = st.deref(left);
                let b = v;
                match (st.store[a].clone(), st.store[b].clone()) {
                    // The left side was bound lazily while the right side was evaluated.
                    (Node::Thunk(..), _) => st.control = Control::Unify(Mode::Strict, a, b),
                    _ if a == b => st.control = Control::Unit,
                    (Node::Free, Node::Free) => {
                        st.bind(a, b);
                        st.control = Control::Unit;
                    }
                    (Node::Free, Node::Ctor(..)) => {
                        st.stack.push(Frame::BindAfterNf { var: a, term: b });
                        st.control = Control::Nf(b);
                    }
                    (Node::Ctor(..), Node::Free) => {
                        st.stack.push(Frame::BindAfterNf { var: b, term: a });
                        st.control = Control::Nf(a);
                    }
                    (Node::Ctor(c, l), Node::Ctor(d, r)) => {
                        if c != d {
                            return Some(Advance::Fail);
                        }
                        st.steps += 1;
                        st.stack.push(Frame::Kids { mode: Mode::Strict, left: l, right: r, i: 0 });
                        st.control = Control::Unit;
                    }
                    _ => unreachable!("not in head normal form"),
                }
            }
            Frame::BindAfterNf { var, term } => {
                let var = st.deref(var);
                if matches!(st.store[var], Node::Free) {
                    if st.occurs(var, term) {
                        return Some(Advance::Fail);
                    }
                    st.bind(var, term);
                    st.control = Control::Unit;
                } else {
                    st.control = Control::Unify(Mode::Strict, var, term);
                }
            }
            Frame::NsuPattern { value } => match st.store[v].clone() {
                Node::Free => {
                    if st.deref(value) != v {
                        st.bind(v, value);
                    }
                    st.control = Control::Unit;
                }
                Node::Ctor(ctor, kids) => {
                    st.stack.push(Frame::NsuValue { ctor, kids });
                    st.control = Control::Eval(value);
                }
                _ => unreachable!("not in head normal form"),
            },
            Frame::NsuValue { ctor, kids } => {
                let right = match st.store[v].clone() {
                    Node::Ctor(d, r) if d == ctor => r,
                    Node::Ctor(..) => return Some(Advance::Fail),
                    Node::Free => {
                        st.steps += 1;
                        let (n, r) = st.fresh_ctor(ctor, kids.len());
                        st.bind(v, n);
                        r
                    }
                    _ => unreachable!("not in head normal form"),
                };
                st.steps += 1;
                st.stack.push(Frame::Kids { mode: Mode::NonStrict, left: kids, right, i: 0 });
                st.control = Control::Unit;
            }
            Frame::Guards { .. } | Frame::Kids { .. } => unreachable!("value returned to a constraint frame"),
        }
        None
    }

    /// Narrows the candidate rules using the demanded argument positions,
    /// then clones the state once per remaining rule.
    fn select(
        &self,
        st: &mut State,
        func: FuncId,
        args: Arc<[NodeRef]>,
        cands: Vec<usize>,
        k: usize,
    ) -> Option<Advance> {
        let f = &self.code.funcs[func as usize];
        if cands.is_empty() {
            return Some(Advance::Fail);
        }
        if cands.len() > 1 && k < f.demanded.len() {
            st.control = Control::Eval(args[f.demanded[k]]);
            st.stack.push(Frame::Select { func, args, cands, k });
            return None;
        }
        let start = |st: &mut State, r: usize| {
            let rule = f.rules[r].clone();
            st.steps += 1;
            let env = vec![UNSET; rule.slots];
            let work = rule.pats.iter().cloned().zip(args.iter().copied()).rev().collect();
            self.match_rule(st, rule, env, work);
        };
        if let [r] = cands[..] {
            start(st, r);
            return None;
        }
        let states = cands
            .iter()
            .map(|&r| {
                let mut s = st.clone();
                start(&mut s, r);
                s
            })
            .collect();
        Some(Advance::Branch(states))
    }

    /// Binds pattern variables until a constructor pattern needs its
    /// argument evaluated; once everything matched, moves on to the guards.
    fn match_rule(&self, st: &mut State, rule: Arc<CRule>, mut env: Vec<NodeRef>, mut work: Vec<(Arc<CPat>, NodeRef)>) {
        while let Some((pat, n)) = work.pop() {
            match &*pat {
                CPat::Var(s) => env[*s as usize] = n,
                CPat::Ctor(..) => {
                    st.control = Control::Eval(n);
                    st.stack.push(Frame::Match { rule, env, work, awaiting: Some(pat) });
                    return;
                }
            }
        }
        for s in &rule.free_slots {
            env[*s as usize] = st.alloc(Node::Free);
        }
        enter_guards(st, rule.guards.clone(), Arc::new(env), rule.body.clone());
    }
}

fn enter_guards(st: &mut State, guards: Arc<[CConstraint]>, env: Env, body: Arc<CExpr>) {
    if guards.is_empty() {
        st.control = Control::Expr(body, env);
    } else {
        st.stack.push(Frame::Guards { guards, i: 0, env, body });
        st.control = Control::Unit;
    }
}

/// Shared step budget of one search. Steps are rule applications,
/// narrowing instantiations and unification decompositions; a separate
/// bound on machine transitions catches loops that take no steps.
struct Budget {
    max_steps: u64,
    used: u64,
    transitions: u64,
    max_transitions: u64,
}

impl Budget {
    fn tick(&mut self, st: &mut State) -> bool {
        self.used += st.steps - st.charged;
        st.charged = st.steps;
        self.transitions += 1;
        self.used <= self.max_steps && self.transitions <= self.max_transitions
    }
}

/// An incremental search over the answers of one goal.
pub struct Search<'e> {
    ev: &'e Evaluator,
    frontier: VecDeque<State>,
    readout: Readout,
    config: EvalConfig,
    budget: Budget,
    seen: ResultSet,
    truncated: bool,
    states_explored: usize,
}

impl<'e> Search<'e> {
    fn new(ev: &'e Evaluator, st: State, readout: Readout, config: EvalConfig) -> Self {
        let max_steps = config.max_steps.max(1);
        Search {
            ev,
            frontier: VecDeque::from([st]),
            readout,
            config,
            budget: Budget {
                max_steps,
                used: 0,
                transitions: 0,
                max_transitions: max_steps.saturating_mul(64).saturating_add(10_000),
            },
            seen: ResultSet::new(),
            truncated: false,
            states_explored: 0,
        }
    }

    /// The next answer not produced before, or `None` once the search space
    /// or a limit is exhausted.
    pub fn next_answer(&mut self) -> Result<Option<ResultTerm>, EvalError> {
        loop {
            if self.seen.len() >= self.config.max_results.max(1) {
                if !self.frontier.is_empty() {
                    self.truncated = true;
                    self.frontier.clear();
                }
                return Ok(None);
            }
            let next = match self.config.strategy {
                SearchStrategy::Bfs => self.frontier.pop_front(),
                SearchStrategy::Dfs => self.frontier.pop_back(),
            };
            let Some(st) = next else { return Ok(None) };
            self.states_explored += 1;
            match self.ev.advance(st, &mut self.budget) {
                Advance::Done(st) => {
                    let mut names = HashMap::new();
                    let term = match &self.readout {
                        Readout::Nf(n) | Readout::Hnf(n) => st.read(*n, &self.ev.code, &mut names),
                        Readout::Bindings(vars) => {
                            let mut terms: Vec<ResultTerm> =
                                vars.iter().map(|v| st.read(*v, &self.ev.code, &mut names)).collect();
                            match terms.len() {
                                0 => ResultTerm::ctor0(TRUE),
                                1 => terms.pop().unwrap(),
                                n => ResultTerm::Ctor(tuple_ctor(n), terms),
                            }
                        }
                    };
                    if self.seen.insert(term.clone()) {
                        return Ok(Some(term));
                    }
                }
                Advance::Branch(states) => match self.config.strategy {
                    SearchStrategy::Bfs => self.frontier.extend(states),
                    SearchStrategy::Dfs => self.frontier.extend(states.into_iter().rev()),
                },
                Advance::Fail => {}
                Advance::OutOfSteps => {
                    self.truncated = true;
                    self.frontier.clear();
                    return Ok(None);
                }
                Advance::Error(e) => return Err(e),
            }
        }
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn states_explored(&self) -> usize {
        self.states_explored
    }

    pub fn steps(&self) -> u64 {
        self.budget.used
    }

    pub fn collect_all(mut self) -> Result<QueryResult, EvalError> {
        while self.next_answer()?.is_some() {}
        Ok(QueryResult {
            results: self.seen,
            truncated: self.truncated,
            states_explored: self.states_explored,
            steps: self.budget.used,
        })
    }
}

/// Evaluates `expr` against `program` and collects its normal forms.
pub fn run_query(
    program: &Program,
    expr: &Expr,
    free_vars: &BTreeSet<Name>,
    config: EvalConfig,
) -> Result<QueryResult, EvalError> {
    Evaluator::new(program)?.run(expr, free_vars, config)
}

#[cfg(test)]
mod tests;
