//! JSON rendering of programs, used by `--json` output.
//!
//! Terms are tagged objects, e.g. `{"tag": "Ctor", "name": ":", "args": [...]}`.

use serde_json::{json, Value};

use crate::ast::{Branch, Constraint, DataDecl, Expr, FuncDef, Mode, Origin, Pattern, Program, Rule};

pub fn program(p: &Program) -> Value {
    json!({
        "data": p.data_decls.iter().map(data_decl).collect::<Vec<_>>(),
        "functions": p.funcs.values().map(func).collect::<Vec<_>>(),
    })
}

pub fn data_decl(d: &DataDecl) -> Value {
    json!({
        "name": d.type_name.as_str(),
        "params": d.params,
        "constructors": d.constructors.iter().map(|c| json!({
            "name": c.name.as_str(),
            "fields": c.fields.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn func(f: &FuncDef) -> Value {
    json!({
        "name": f.name.as_str(),
        "arity": f.arity,
        "origin": match f.origin { Origin::UserWritten => "user", Origin::Synthesized => "synthesized" },
        "signature": f.signature.as_ref().map(|t| t.to_string()),
        "rules": f.rules.iter().map(rule).collect::<Vec<_>>(),
        "text": f.to_string(),
    })
}

pub fn rule(r: &Rule) -> Value {
    json!({
        "patterns": r.patterns.iter().map(pattern).collect::<Vec<_>>(),
        "guards": r.guards.iter().map(constraint).collect::<Vec<_>>(),
        "body": expr(&r.body),
        "free": r.free_vars.iter().map(|v| v.as_str()).collect::<Vec<_>>(),
    })
}

pub fn pattern(p: &Pattern) -> Value {
    match p {
        Pattern::Var(v) => json!({"tag": "Var", "name": v.as_str()}),
        Pattern::Ctor(c, ps) => {
            json!({"tag": "Ctor", "name": c.as_str(), "args": ps.iter().map(pattern).collect::<Vec<_>>()})
        }
        Pattern::FunCall(f, ps) => {
            json!({"tag": "FunCall", "name": f.as_str(), "args": ps.iter().map(pattern).collect::<Vec<_>>()})
        }
    }
}

pub fn constraint(c: &Constraint) -> Value {
    json!({
        "mode": match c.mode { Mode::Strict => "=:=", Mode::NonStrict => "=:<=" },
        "lhs": expr(&c.lhs),
        "rhs": expr(&c.rhs),
    })
}

fn branch(b: &Branch) -> Value {
    json!({
        "pattern": pattern(&b.pattern),
        "guards": b.guards.iter().map(constraint).collect::<Vec<_>>(),
        "body": expr(&b.body),
    })
}

pub fn expr(e: &Expr) -> Value {
    let args = |es: &[Expr]| es.iter().map(expr).collect::<Vec<_>>();
    match e {
        Expr::Var(v) => json!({"tag": "Var", "name": v.as_str()}),
        Expr::Ctor(c, es) => json!({"tag": "Ctor", "name": c.as_str(), "args": args(es)}),
        Expr::App(f, es) => json!({"tag": "App", "name": f.as_str(), "args": args(es)}),
        Expr::VarApp(f, es) => json!({"tag": "VarApp", "name": f.as_str(), "args": args(es)}),
        Expr::Case(s, bs) => {
            json!({"tag": "Case", "scrutinee": expr(s), "branches": bs.iter().map(branch).collect::<Vec<_>>()})
        }
        Expr::Failed => json!({"tag": "Failed"}),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    #[test]
    fn tags_follow_the_term_structure() {
        let p = parse_program("last (xs ++ [x]) = x\n[] ++ ys = ys\n(x : xs) ++ ys = x : (xs ++ ys)").unwrap();
        let v = program(&p);
        let last = &v["functions"][0];
        assert_eq!(last["name"], "last");
        assert_eq!(last["rules"][0]["patterns"][0]["tag"], "FunCall");
        assert_eq!(last["rules"][0]["patterns"][0]["args"][1]["name"], ":");
        assert_eq!(v["functions"][1]["rules"][1]["body"]["tag"], "Ctor");
    }
}
