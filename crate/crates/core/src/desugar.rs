//! Flattening of nested constructor patterns into chains of
//! single-branch cases, so that every pattern below a root constructor is a
//! variable.

use std::collections::{BTreeSet, VecDeque};

use crate::ast::{fresh_name, Branch, Constraint, Expr, Name, Pattern, Rule};

/// Flattens the non-functional lhs patterns of a rule and every case
/// branch in its body. Rule guards move into the innermost generated
/// branch when lhs patterns had to be split. Functional patterns are left
/// untouched.
pub fn flatten_rule(rule: &Rule) -> Rule {
    let mut avoid = rule.all_vars();
    let mut pending = VecDeque::new();
    let patterns = rule
        .patterns
        .iter()
        .map(|p| if p.is_functional() { p.clone() } else { split(p, &mut avoid, &mut pending) })
        .collect();
    let body = flatten_expr(&rule.body, &mut avoid);
    let (guards, body) = wrap(pending, rule.guards.clone(), body, &mut avoid);
    Rule { patterns, guards, body, free_vars: rule.free_vars.clone() }
}

pub fn flatten_expr(e: &Expr, avoid: &mut BTreeSet<Name>) -> Expr {
    match e {
        Expr::Var(_) | Expr::Failed => e.clone(),
        Expr::Ctor(c, es) => Expr::Ctor(c.clone(), es.iter().map(|e| flatten_expr(e, avoid)).collect()),
        Expr::App(f, es) => Expr::App(f.clone(), es.iter().map(|e| flatten_expr(e, avoid)).collect()),
        Expr::VarApp(f, es) => Expr::VarApp(f.clone(), es.iter().map(|e| flatten_expr(e, avoid)).collect()),
        Expr::Case(scrut, branches) => Expr::Case(
            Box::new(flatten_expr(scrut, avoid)),
            branches
                .iter()
                .map(|b| {
                    let mut pending = VecDeque::new();
                    let pattern = split(&b.pattern, avoid, &mut pending);
                    let body = flatten_expr(&b.body, avoid);
                    let (guards, body) = wrap(pending, b.guards.clone(), body, avoid);
                    Branch { pattern, guards, body }
                })
                .collect(),
        ),
    }
}

/// Replaces every non-variable child of the root by a fresh variable and
/// queues the (variable, subpattern) pair.
fn split(p: &Pattern, avoid: &mut BTreeSet<Name>, pending: &mut VecDeque<(Name, Pattern)>) -> Pattern {
    match p {
        Pattern::Ctor(c, children) => Pattern::Ctor(
            c.clone(),
            children
                .iter()
                .map(|child| match child {
                    Pattern::Var(_) => child.clone(),
                    _ => {
                        let z = fresh_name("z", avoid);
                        avoid.insert(z.clone());
                        pending.push_back((z.clone(), child.clone()));
                        Pattern::Var(z)
                    }
                })
                .collect(),
        ),
        _ => p.clone(),
    }
}

fn wrap(
    mut pending: VecDeque<(Name, Pattern)>,
    guards: Vec<Constraint>,
    body: Expr,
    avoid: &mut BTreeSet<Name>,
) -> (Vec<Constraint>, Expr) {
    let Some((z, sub)) = pending.pop_front() else {
        return (guards, body);
    };
    let mut more = VecDeque::new();
    let flat = split(&sub, avoid, &mut more);
    more.extend(pending);
    let (inner_guards, inner_body) = wrap(more, guards, body, avoid);
    let case =
        Expr::Case(Box::new(Expr::Var(z)), vec![Branch { pattern: flat, guards: inner_guards, body: inner_body }]);
    (vec![], case)
}
