//! Lowering of a program to slot-indexed code for the machine.

use std::collections::HashMap;
use std::sync::Arc;

use crate::ast::{Branch, Constraint, Expr, Mode, Name, Pattern, Program, Rule};
use crate::desugar::flatten_rule;

use super::EvalError;

pub type CtorId = u32;
pub type FuncId = u32;
pub type Slot = u32;

#[derive(Debug)]
pub enum CExpr {
    Var(Slot),
    Ctor(CtorId, Vec<Arc<CExpr>>),
    Call(FuncId, Vec<Arc<CExpr>>),
    Case(Arc<CExpr>, Arc<[CBranch]>),
    Failed,
    VarApp(Name),
}

#[derive(Debug)]
pub enum CPat {
    Var(Slot),
    Ctor(CtorId, Vec<Arc<CPat>>),
}

#[derive(Debug)]
pub enum BranchPat {
    Var(Slot),
    Ctor(CtorId, Vec<Slot>),
}

#[derive(Debug)]
pub struct CBranch {
    pub pat: BranchPat,
    pub guards: Arc<[CConstraint]>,
    pub body: Arc<CExpr>,
}

#[derive(Debug)]
pub struct CConstraint {
    pub mode: Mode,
    pub lhs: Arc<CExpr>,
    pub rhs: Arc<CExpr>,
}

#[derive(Debug)]
pub struct CRule {
    pub pats: Vec<Arc<CPat>>,
    pub guards: Arc<[CConstraint]>,
    pub body: Arc<CExpr>,
    pub slots: usize,
    pub free_slots: Vec<Slot>,
}

#[derive(Debug)]
pub struct CFunc {
    pub rules: Vec<Arc<CRule>>,
    /// Argument positions where every rule has a constructor pattern; these
    /// are evaluated once before the rule choice is made.
    pub demanded: Vec<usize>,
}

#[derive(Debug)]
pub struct Code {
    pub ctors: Vec<(Name, usize)>,
    pub ctor_ids: HashMap<Name, CtorId>,
    pub funcs: Vec<CFunc>,
    pub func_ids: HashMap<Name, FuncId>,
}

impl Code {
    pub fn new(program: &Program) -> Result<Code, EvalError> {
        let ctors: Vec<(Name, usize)> =
            program.all_data_decls().flat_map(|d| &d.constructors).map(|c| (c.name.clone(), c.arity())).collect();
        let ctor_ids = ctors.iter().enumerate().map(|(i, (n, _))| (n.clone(), i as CtorId)).collect();
        let func_ids = program.funcs.keys().enumerate().map(|(i, n)| (n.clone(), i as FuncId)).collect();
        let mut code = Code { ctors, ctor_ids, funcs: Vec::new(), func_ids };
        for f in program.funcs.values() {
            let mut rules = Vec::new();
            for r in &f.rules {
                rules.push(Arc::new(code.rule(&f.name, &flatten_rule(r))?));
            }
            let demanded = (0..f.arity)
                .filter(|&j| !rules.is_empty() && rules.iter().all(|r| matches!(*r.pats[j], CPat::Ctor(..))))
                .collect();
            code.funcs.push(CFunc { rules, demanded });
        }
        Ok(code)
    }

    pub fn ctor_name(&self, id: CtorId) -> &Name {
        &self.ctors[id as usize].0
    }

    fn ctor(&self, name: &Name, arity: usize) -> Result<CtorId, EvalError> {
        match self.ctor_ids.get(name) {
            Some(&id) if self.ctors[id as usize].1 == arity => Ok(id),
            _ => Err(EvalError::Unknown(format!("constructor `{name}`/{arity}"))),
        }
    }

    fn func(&self, name: &Name) -> Result<FuncId, EvalError> {
        self.func_ids.get(name).copied().ok_or_else(|| EvalError::Unknown(format!("function `{name}`")))
    }

    fn rule(&self, fname: &Name, rule: &Rule) -> Result<CRule, EvalError> {
        let mut cx = Scope::default();
        let mut pats = Vec::new();
        for p in &rule.patterns {
            pats.push(Arc::new(self.pattern(fname, p, &mut cx)?));
        }
        let free_slots = rule.free_vars.iter().map(|v| cx.bind(v)).collect();
        let guards = self.constraints(&rule.guards, &mut cx)?;
        let body = self.expr(&rule.body, &mut cx)?;
        Ok(CRule { pats, guards, body, slots: cx.next as usize, free_slots })
    }

    fn pattern(&self, fname: &Name, p: &Pattern, cx: &mut Scope) -> Result<CPat, EvalError> {
        match p {
            Pattern::Var(v) => Ok(CPat::Var(cx.bind(v))),
            Pattern::Ctor(c, ps) => {
                let id = self.ctor(c, ps.len())?;
                let mut kids = Vec::new();
                for p in ps {
                    kids.push(Arc::new(self.pattern(fname, p, cx)?));
                }
                Ok(CPat::Ctor(id, kids))
            }
            Pattern::FunCall(..) => Err(EvalError::FunctionalPattern(fname.clone())),
        }
    }

    fn constraints(&self, cs: &[Constraint], cx: &mut Scope) -> Result<Arc<[CConstraint]>, EvalError> {
        cs.iter()
            .map(|c| Ok(CConstraint { mode: c.mode, lhs: self.expr(&c.lhs, cx)?, rhs: self.expr(&c.rhs, cx)? }))
            .collect()
    }

    pub(super) fn expr(&self, e: &Expr, cx: &mut Scope) -> Result<Arc<CExpr>, EvalError> {
        let args = |es: &[Expr], cx: &mut Scope| es.iter().map(|e| self.expr(e, cx)).collect::<Result<Vec<_>, _>>();
        Ok(Arc::new(match e {
            Expr::Var(v) => CExpr::Var(cx.lookup(v)?),
            Expr::Ctor(c, es) => CExpr::Ctor(self.ctor(c, es.len())?, args(es, cx)?),
            Expr::App(f, es) => CExpr::Call(self.func(f)?, args(es, cx)?),
            Expr::VarApp(v, _) => CExpr::VarApp(v.clone()),
            Expr::Failed => CExpr::Failed,
            Expr::Case(scrut, branches) => {
                let scrut = self.expr(scrut, cx)?;
                let branches = branches.iter().map(|b| self.branch(b, cx)).collect::<Result<Vec<_>, _>>()?;
                CExpr::Case(scrut, branches.into())
            }
        }))
    }

    fn branch(&self, b: &Branch, cx: &mut Scope) -> Result<CBranch, EvalError> {
        let mark = cx.names.len();
        let pat = match &b.pattern {
            Pattern::Var(v) => BranchPat::Var(cx.bind(v)),
            Pattern::Ctor(c, ps) => {
                let id = self.ctor(c, ps.len())?;
                let mut slots = Vec::new();
                for p in ps {
                    match p {
                        Pattern::Var(v) => slots.push(cx.bind(v)),
                        _ => return Err(EvalError::Unknown(format!("nested case pattern `{}`", b.pattern))),
                    }
                }
                BranchPat::Ctor(id, slots)
            }
            Pattern::FunCall(f, _) => return Err(EvalError::FunctionalPattern(f.clone())),
        };
        let guards = self.constraints(&b.guards, cx)?;
        let body = self.expr(&b.body, cx)?;
        cx.names.truncate(mark);
        Ok(CBranch { pat, guards, body })
    }
}

/// Variable to slot resolution with shadowing; slots are never reused
/// within a rule.
#[derive(Default)]
pub(super) struct Scope {
    names: Vec<(Name, Slot)>,
    next: Slot,
}

impl Scope {
    pub(super) fn bind(&mut self, v: &Name) -> Slot {
        let s = self.next;
        self.next += 1;
        self.names.push((v.clone(), s));
        s
    }

    fn lookup(&self, v: &Name) -> Result<Slot, EvalError> {
        self.names
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, s)| *s)
            .ok_or_else(|| EvalError::Unknown(format!("variable `{v}`")))
    }

    pub(super) fn slots(&self) -> usize {
        self.next as usize
    }
}
