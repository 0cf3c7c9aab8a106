use super::*;
use crate::parser::{parse_program, parse_query};

const PRELUDE: &str = "\
[] ++ ys = ys
(x : xs) ++ ys = x : (xs ++ ys)
selfAppend xs = xs ++ xs
coin = True
coin = False
tail (x : xs) = xs
last (xs ++ [x]) = x
lastStrict z | xs ++ [x] =:= z = x where xs, x free
(++)_inv ys = ([], ys)
(++)_inv (x : z) = case (++)_inv z of (xs, ys) -> (x : xs, ys)
tail_inv xs = x : xs where x free
ones = True : ones
loop = loop
";

fn program() -> Program {
    parse_program(PRELUDE).unwrap()
}

fn run(src: &str, config: EvalConfig) -> QueryResult {
    let p = program();
    let q = parse_query(src, &p).unwrap();
    run_query(&p, q.expr().unwrap(), &q.free_vars, config).unwrap()
}

fn answers(src: &str) -> Vec<String> {
    let r = run(src, EvalConfig::default());
    assert!(!r.truncated, "{src} truncated");
    r.results.iter().map(ToString::to_string).collect()
}

fn solve(mode: Mode, lhs: &str, rhs: &str, free: &[&str]) -> Vec<String> {
    let p = program();
    let free: BTreeSet<Name> = free.iter().map(|v| Name::new(*v)).collect();
    let lhs = crate::parser::parse_expr(lhs, &p, &free).unwrap();
    let rhs = crate::parser::parse_expr(rhs, &p, &free).unwrap();
    let ev = Evaluator::new(&p).unwrap();
    let r = ev
        .search_constraint(&Constraint { mode, lhs, rhs }, &free, EvalConfig::default())
        .unwrap()
        .collect_all()
        .unwrap();
    assert!(!r.truncated);
    r.results.iter().map(ToString::to_string).collect()
}

fn hnf(src: &str) -> Vec<String> {
    let p = program();
    let q = parse_query(src, &p).unwrap();
    let ev = Evaluator::new(&p).unwrap();
    let r = ev.search_hnf(q.expr().unwrap(), &q.free_vars, EvalConfig::default()).unwrap().collect_all().unwrap();
    r.results.iter().map(ToString::to_string).collect()
}

#[test]
fn head_normal_forms() {
    assert_eq!(hnf("[failed, True]"), ["? : [True]"]);
    assert!(hnf("failed").is_empty());
    assert_eq!(hnf("[] ++ [True]"), ["[True]"]);
}

#[test]
fn normal_forms() {
    assert_eq!(answers("tail_inv [True]"), ["_0 : [True]"]);
    assert!(answers("failed : []").is_empty());
    assert_eq!(answers("[] ++ []"), ["[]"]);
    assert_eq!(answers("(++)_inv [True]"), ["([], [True])", "([True], [])"]);
}

#[test]
fn functional_pattern_versus_strict_unification() {
    assert_eq!(answers("last [failed, True]"), ["True"]);
    let strict = run("lastStrict [failed, True]", EvalConfig::default());
    assert!(strict.results.is_empty());
    assert!(!strict.truncated);
}

#[test]
fn strict_unification() {
    assert_eq!(solve(Mode::Strict, "x", "True", &["x"]), ["True"]);
    assert!(solve(Mode::Strict, "failed", "True", &[]).is_empty());
    assert!(solve(Mode::Strict, "xs ++ [x]", "[failed, True]", &["x", "xs"]).is_empty());
    assert_eq!(solve(Mode::Strict, "x", "x", &["x"]), ["_0"]);
    assert_eq!(solve(Mode::Strict, "x", "y", &["x", "y"]), ["(_0, _0)"]);
    // occurs check
    assert!(solve(Mode::Strict, "x", "True : x", &["x"]).is_empty());
}

#[test]
fn non_strict_unification() {
    assert_eq!(solve(Mode::NonStrict, "xs ++ [x]", "[failed, True]", &["x", "xs"]), ["(True, ? : [])"]);
    assert_eq!(solve(Mode::NonStrict, "v", "failed", &["v"]), ["?"]);
    assert!(solve(Mode::NonStrict, "True", "False", &[]).is_empty());
}

#[test]
fn call_time_choice() {
    for strategy in [SearchStrategy::Bfs, SearchStrategy::Dfs] {
        let r = run("selfAppend [coin]", EvalConfig { strategy, ..EvalConfig::default() });
        let got: BTreeSet<String> = r.results.iter().map(ToString::to_string).collect();
        assert_eq!(got, ["[False, False]", "[True, True]"].into_iter().map(String::from).collect());
    }
}

#[test]
fn limits_truncate() {
    let r = run("loop", EvalConfig { max_steps: 500, ..EvalConfig::default() });
    assert!(r.truncated && r.results.is_empty());
    let r = run("xs ++ [True] where xs free", EvalConfig { max_results: 3, ..EvalConfig::default() });
    assert!(r.truncated);
    assert_eq!(r.results.len(), 3);
    let r = run("ones", EvalConfig { max_steps: 200, ..EvalConfig::default() });
    assert!(r.truncated);
}

#[test]
fn narrowing_enumerates_in_breadth_order() {
    let r = run("xs ++ ys where xs, ys free", EvalConfig { max_results: 3, ..EvalConfig::default() });
    let got: Vec<String> = r.results.iter().map(ToString::to_string).collect();
    assert_eq!(got, ["_0", "_0 : _1", "_0 : _1 : _2"]);
}

#[test]
fn dfs_follows_rule_order() {
    let r = run("coin", EvalConfig { strategy: SearchStrategy::Dfs, ..EvalConfig::default() });
    let got: Vec<String> = r.results.iter().map(ToString::to_string).collect();
    assert_eq!(got, ["True", "False"]);
}

#[test]
fn higher_order_application_is_an_error() {
    let p = parse_program("x $ f = f x\nid x = x").unwrap();
    let q = parse_query("True $ x where x free", &p).unwrap();
    assert!(matches!(
        run_query(&p, q.expr().unwrap(), &q.free_vars, EvalConfig::default()),
        Err(EvalError::HigherOrder(_))
    ));
}
