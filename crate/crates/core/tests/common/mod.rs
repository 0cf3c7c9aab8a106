//! Shared helpers: corpus access and a seeded generator of random `.flc`
//! programs in source form.

#![allow(dead_code)]

use std::path::PathBuf;

use flc::ast::Program;
use flc::parser::parse_program;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS: &[&str] =
    &["append", "coin", "dollar", "g", "g_simple", "last_funpat", "last_strict", "selfappend", "tail"];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.flc"))
}

pub fn corpus_source(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn corpus(name: &str) -> Program {
    parse_program(&corpus_source(name)).unwrap_or_else(|e| panic!("{name}: {e:?}"))
}

pub const APPEND: &str = "(++) :: [a] -> [a] -> [a]\n[] ++ ys = ys\n(x : xs) ++ ys = x : (xs ++ ys)\n";

const DATA: &str = "data N = Z | S N\ndata T a = Leaf | Node (T a) a (T a)\n";

#[derive(Clone, Copy, PartialEq, Eq)]
enum Family {
    Bool,
    List,
    Nat,
    Tree,
    Pair,
}

const FAMILIES: [Family; 5] = [Family::Bool, Family::List, Family::Nat, Family::Tree, Family::Pair];

/// Generates program text. `full` mode uses every surface construct
/// (guards of both kinds, free variables, case, `failed`, functional
/// patterns, signatures); otherwise rules stay first-order and
/// guard-free, which is the shape direct inversion handles.
pub struct ProgramGen {
    rng: ChaCha8Rng,
    full: bool,
    counter: usize,
}

impl ProgramGen {
    pub fn new(seed: u64, full: bool) -> Self {
        ProgramGen { rng: ChaCha8Rng::seed_from_u64(seed), full, counter: 0 }
    }

    fn fresh(&mut self, scope: &mut Vec<String>) -> String {
        self.counter += 1;
        let v = format!("v{}", self.counter);
        scope.push(v.clone());
        v
    }

    /// A linear constructor pattern; new variables are appended to `scope`.
    fn pattern(&mut self, depth: usize, scope: &mut Vec<String>) -> String {
        if depth == 0 || self.rng.gen_bool(0.35) {
            return self.fresh(scope);
        }
        match *FAMILIES.choose(&mut self.rng).unwrap() {
            Family::Bool => ["True", "False"].choose(&mut self.rng).unwrap().to_string(),
            Family::List => match self.rng.gen_range(0..3) {
                0 => "[]".into(),
                1 => format!("[{}]", self.pattern(depth - 1, scope)),
                _ => {
                    let h = self.pattern(depth - 1, scope);
                    let t = self.pattern(depth - 1, scope);
                    format!("({h} : {t})")
                }
            },
            Family::Nat => {
                if self.rng.gen_bool(0.4) {
                    "Z".into()
                } else {
                    format!("(S {})", self.pattern(depth - 1, scope))
                }
            }
            Family::Tree => {
                if self.rng.gen_bool(0.4) {
                    "Leaf".into()
                } else {
                    let l = self.pattern(depth - 1, scope);
                    let x = self.pattern(depth - 1, scope);
                    let r = self.pattern(depth - 1, scope);
                    format!("(Node {l} {x} {r})")
                }
            }
            Family::Pair => {
                let a = self.pattern(depth - 1, scope);
                let b = self.pattern(depth - 1, scope);
                format!("({a}, {b})")
            }
        }
    }

    fn leaf(&mut self, scope: &[String]) -> String {
        if !scope.is_empty() && self.rng.gen_bool(0.75) {
            return scope.choose(&mut self.rng).unwrap().clone();
        }
        ["True", "False", "[]", "Z", "Leaf"].choose(&mut self.rng).unwrap().to_string()
    }

    /// An expression over `scope`, calling only the functions in `funcs`.
    fn expr(&mut self, depth: usize, scope: &[String], funcs: &[(String, usize)]) -> String {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.leaf(scope);
        }
        let choices = if self.full { 9 } else { 6 };
        match self.rng.gen_range(0..choices) {
            0 => {
                let h = self.expr(depth - 1, scope, funcs);
                let t = self.expr(depth - 1, scope, funcs);
                format!("({h} : {t})")
            }
            1 => {
                let n = self.rng.gen_range(1..=3);
                let items: Vec<String> = (0..n).map(|_| self.expr(depth - 1, scope, funcs)).collect();
                format!("[{}]", items.join(", "))
            }
            2 => {
                let a = self.expr(depth - 1, scope, funcs);
                let b = self.expr(depth - 1, scope, funcs);
                format!("({a}, {b})")
            }
            3 => format!("(S {})", self.expr(depth - 1, scope, funcs)),
            4 if !funcs.is_empty() => {
                let (f, arity) = funcs.choose(&mut self.rng).unwrap().clone();
                let args: Vec<String> = (0..arity).map(|_| self.expr(depth - 1, scope, funcs)).collect();
                format!("({f} {})", args.join(" "))
            }
            5 => {
                let a = self.expr(depth - 1, scope, funcs);
                let b = self.expr(depth - 1, scope, funcs);
                format!("({a} ++ {b})")
            }
            6 => "failed".into(),
            7 => self.case(depth, scope, funcs),
            _ => {
                let l = self.expr(depth - 1, scope, funcs);
                let x = self.expr(depth - 1, scope, funcs);
                let r = self.expr(depth - 1, scope, funcs);
                format!("(Node {l} {x} {r})")
            }
        }
    }

    fn case(&mut self, depth: usize, scope: &[String], funcs: &[(String, usize)]) -> String {
        let scrut = self.expr(depth - 1, scope, funcs);
        let mut branches = Vec::new();
        let shapes: Vec<(&str, usize)> = match self.rng.gen_range(0..4) {
            0 => vec![("True", 0), ("False", 0)],
            1 => vec![("[]", 0), (":", 2)],
            2 => vec![("Z", 0), ("S", 1)],
            _ => vec![("_var", 0)],
        };
        let keep = self.rng.gen_range(1..=shapes.len());
        for (ctor, arity) in shapes.into_iter().take(keep) {
            let mut inner = scope.to_vec();
            let pat = match (ctor, arity) {
                ("_var", _) => self.fresh(&mut inner),
                (":", _) => {
                    let h = self.fresh(&mut inner);
                    let t = self.fresh(&mut inner);
                    format!("{h} : {t}")
                }
                (c, 1) => format!("{c} {}", self.fresh(&mut inner)),
                (c, _) => c.to_string(),
            };
            let guard = if self.rng.gen_bool(0.2) {
                format!(" | {} =:= {}", self.leaf(&inner), self.leaf(&inner))
            } else {
                String::new()
            };
            let body = self.expr(depth - 1, &inner, funcs);
            branches.push(format!("{pat}{guard} -> {body}"));
        }
        format!("(case {scrut} of {{ {} }})", branches.join("; "))
    }

    fn ty(&mut self, depth: usize) -> String {
        if depth == 0 {
            return ["Bool", "N", "a"].choose(&mut self.rng).unwrap().to_string();
        }
        match self.rng.gen_range(0..5) {
            0 => format!("[{}]", self.ty(depth - 1)),
            1 => format!("({}, {})", self.ty(depth - 1), self.ty(depth - 1)),
            2 => format!("T {}", self.ty_atom(depth - 1)),
            _ => self.ty(0),
        }
    }

    fn ty_atom(&mut self, depth: usize) -> String {
        let t = self.ty(depth);
        if t.contains(' ') && !t.starts_with('[') && !t.starts_with('(') {
            format!("({t})")
        } else {
            t
        }
    }

    fn rule(&mut self, name: &str, arity: usize, funcs: &[(String, usize)]) -> String {
        let mut scope = Vec::new();
        let mut pats = Vec::new();
        for _ in 0..arity {
            let p = if self.full && self.rng.gen_bool(0.15) {
                let a = self.pattern(1, &mut scope);
                let b = self.pattern(2, &mut scope);
                format!("({a} ++ {b})")
            } else {
                self.pattern(2, &mut scope)
            };
            pats.push(p);
        }
        let mut free = Vec::new();
        if self.rng.gen_bool(0.2) {
            free.push(self.fresh(&mut scope));
        }
        let mut guards = Vec::new();
        if self.full && self.rng.gen_bool(0.3) {
            for _ in 0..self.rng.gen_range(1..=2) {
                if self.rng.gen_bool(0.5) {
                    let l = self.expr(2, &scope, funcs);
                    let r = self.expr(2, &scope, funcs);
                    guards.push(format!("{l} =:= {r}"));
                } else {
                    let mut bound = scope.clone();
                    let before = bound.len();
                    let p = self.pattern(2, &mut bound);
                    free.extend(bound[before..].iter().cloned());
                    scope = bound;
                    let r = self.expr(2, &scope, funcs);
                    guards.push(format!("{p} =:<= {r}"));
                }
            }
        }
        let body = self.expr(3, &scope, funcs);
        let mut line = name.to_string();
        for p in &pats {
            line.push(' ');
            line.push_str(p);
        }
        if !guards.is_empty() {
            line.push_str(&format!(" | {}", guards.join(", ")));
        }
        line.push_str(&format!(" = {body}"));
        if !free.is_empty() {
            line.push_str(&format!(" where {} free", free.join(", ")));
        }
        line
    }

    /// A program with `n` generated functions `g0 … g(n-1)`; function `gi`
    /// may call `gj` for `j < i` and always sees `(++)`.
    pub fn program(&mut self, n: usize) -> String {
        let mut text = format!("{DATA}{APPEND}");
        let mut funcs: Vec<(String, usize)> = Vec::new();
        for i in 0..n {
            let name = format!("g{i}");
            let arity = self.rng.gen_range(1..=3);
            if self.full && self.rng.gen_bool(0.5) {
                let params: Vec<String> = (0..arity).map(|_| self.ty_atom(1)).collect();
                let result = self.ty(2);
                text.push_str(&format!("{name} :: {} -> {result}\n", params.join(" -> ")));
            }
            for _ in 0..self.rng.gen_range(1..=3) {
                let line = self.rule(&name, arity, &funcs);
                text.push_str(&line);
                text.push('\n');
            }
            funcs.push((name, arity));
        }
        text
    }
}
