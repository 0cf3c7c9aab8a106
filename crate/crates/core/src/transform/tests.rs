use super::*;
use crate::ast::{alpha_eq, Mode};
use crate::parser::parse_program;

const APPEND: &str = "[] ++ ys = ys\n(x : xs) ++ ys = x : (xs ++ ys)\n";

fn prog(extra: &str) -> Program {
    parse_program(&format!("{APPEND}{extra}")).unwrap()
}

fn inverse_text(p: &Program, f: &str) -> String {
    rules_text(&synthesize_inverse(p, &Name::new(f), false).unwrap().inverse)
}

fn rules_text(f: &FuncDef) -> String {
    // Drop the commented signature line, if any.
    f.to_string().lines().filter(|l| !l.starts_with("--")).collect::<Vec<_>>().join("\n")
}

#[test]
fn append_inverse() {
    let p = prog("");
    let s = synthesize_inverse(&p, &"++".into(), false).unwrap();
    assert_eq!(
        rules_text(&s.inverse),
        "(++)_inv ys = ([], ys)\n(++)_inv (x : z) = case (++)_inv z of (xs, ys) -> (x : xs, ys)"
    );
    assert!(s.auxiliaries.is_empty());
    assert!(s.inverse.is_standard_code());
    assert!(s.report.warnings.is_empty());
}

#[test]
fn tail_and_self_append() {
    let p = prog("tail (x : xs) = xs\nselfAppend xs = xs ++ xs\n");
    assert_eq!(inverse_text(&p, "tail"), "tail_inv xs = x : xs where x free");
    let s = synthesize_inverse(&p, &"selfAppend".into(), false).unwrap();
    assert_eq!(rules_text(&s.inverse), "selfAppend_inv z = case (++)_inv z of (xs, xs1) | xs =:= xs1 -> xs");
    assert_eq!(s.auxiliaries.len(), 1);
    assert_eq!(s.auxiliaries[0].name.as_str(), "++_inv");
}

#[test]
fn last_from_functional_pattern() {
    let p = prog("last (xs ++ [x]) = x\n");
    assert_eq!(inverse_text(&p, "last"), "last_inv x = xs ++ [x] where xs free");
}

#[test]
fn classification() {
    let p = parse_program(&format!(
        "{APPEND}x $ f = f x\ndata Int = 0 | 1\ng 0 = (f j, j) where j free\nf i = 0\ntail (x : xs) = xs\nselfAppend xs = xs ++ xs\n"
    ))
    .unwrap();
    let c = |f: &str| classify(&p, &f.into(), false).unwrap();
    assert_eq!(c("++"), Strategy::Direct);
    assert_eq!(c("tail"), Strategy::Direct);
    assert_eq!(c("selfAppend"), Strategy::Direct);
    assert_eq!(c("$"), Strategy::Rejected("higher-order".into()));
    let Strategy::FallbackNsu(reason) = c("g") else { panic!("{:?}", c("g")) };
    assert_eq!(reason, "non-linear right-hand side (j) with extra variables (g: j; f: i)");
    assert_eq!(classify(&p, &"g".into(), true).unwrap(), Strategy::Direct);
    assert!(matches!(classify(&p, &"nope".into(), false), Err(TransformError::UnknownFunction(_))));
}

#[test]
fn unsupported_shapes_fall_back() {
    let p = prog("coin = True\ncoin = False\nh x = x : coin\nk x | x =:= True = x\nm x = case x of { True -> False; False -> True }\n");
    for f in ["h", "k", "m"] {
        let s = classify(&p, &f.into(), false).unwrap();
        assert!(s.reason().unwrap().starts_with("unsupported rule shape"), "{f}: {s}");
    }
    assert!(matches!(classify(&p, &"coin".into(), false).unwrap(), Strategy::Rejected(_)));
}

#[test]
fn flattened_patterns_are_swapped_as_written() {
    let p = parse_program("data N = Z | S N\npred2 (S (S n)) = n\n").unwrap();
    assert_eq!(classify(&p, &"pred2".into(), false).unwrap(), Strategy::Direct);
    assert_eq!(inverse_text(&p, "pred2"), "pred2_inv n = S (S n)");
}

#[test]
fn forced_g_reproduces_the_counterexample_shape() {
    let p = parse_program("data Int = 0 | 1\ng :: Int -> (Int, Int)\ng 0 = (f j, j) where j free\nf i = 0\n").unwrap();
    let fallback = synthesize_inverse(&p, &"g".into(), false).unwrap();
    assert_eq!(rules_text(&fallback.inverse), "g_inv z | g x1 =:<= z = x1 where x1 free");
    assert_eq!(fallback.inverse.nonstandard_counts(), (0, 1));
    let forced = synthesize_inverse(&p, &"g".into(), true).unwrap();
    assert_eq!(rules_text(&forced.inverse), "g_inv (z, j) = case f_inv z of j1 | j =:= j1 -> 0");
    assert_eq!(rules_text(&forced.auxiliaries[0]), "f_inv 0 = i where i free");
    assert_eq!(forced.report.warnings.len(), 2, "{:?}", forced.report.warnings);
    assert!(forced.report.warnings.iter().any(|w| w.contains("j =:= j1")));
    assert_eq!(forced.inverse.signature.as_ref().unwrap().to_string(), "(Int, Int) -> Int");
}

#[test]
fn simplified_g() {
    let p = parse_program("data Int = 0 | 1\ng 0 = (0, j) where j free\n").unwrap();
    assert_eq!(inverse_text(&p, "g"), "g_inv (z, j) = case z of 0 -> 0");
}

#[test]
fn swap_examples() {
    let p = prog("tail (x : xs) = xs\n");
    let rule = &p.func(&"++".into()).unwrap().rules[1];
    let proto = swap_rule(rule, 2).unwrap();
    assert_eq!(proto.pattern.to_string(), "x : (xs ++ ys)");
    assert_eq!(proto.body.to_string(), "(x : xs, ys)");
    let proto = swap_rule(&p.func(&"tail".into()).unwrap().rules[0], 1).unwrap();
    assert_eq!(proto.pattern.to_string(), "xs");
    assert_eq!(proto.free_vars, BTreeSet::from([Name::new("x")]));
}

#[test]
fn linearize_examples() {
    let p = parse_program("t3 x = (x, x, x)\n").unwrap();
    let s = synthesize_inverse(&p, &"t3".into(), false).unwrap();
    assert_eq!(rules_text(&s.inverse), "t3_inv (x, x1, x2) | x =:= x1, x =:= x2 = x");
    let linear = Rule::new(vec![Pattern::Var("a".into())], Expr::Var("a".into()));
    assert_eq!(linearize(&linear), linear);
    assert!(s.inverse.rules.iter().all(is_left_linear));
}

#[test]
fn nested_calls_are_eliminated_outermost_first() {
    let p = prog("dbl xs = (xs ++ xs) ++ [True]\n");
    let s = synthesize_inverse(&p, &"dbl".into(), false).unwrap();
    assert_eq!(
        rules_text(&s.inverse),
        "dbl_inv z = case (++)_inv z of (z1, z2) -> case z2 of z3 : z4 -> case z3 of True -> case z4 of [] -> case (++)_inv z1 of (xs, xs1) | xs =:= xs1 -> xs"
    );
    assert!(s.inverse.is_standard_code());
}

#[test]
fn elaboration_modes() {
    let p = prog("last (xs ++ [x]) = x\n");
    let nsu = elaborate(&p, ElabMode::Nsu).unwrap().program;
    assert_eq!(rules_text(nsu.func(&"last".into()).unwrap()), "last z | xs ++ [x] =:<= z = x where x, xs free");
    let calls = elaborate(&p, ElabMode::InverseCalls).unwrap().program;
    let last = calls.func(&"last".into()).unwrap();
    let expected = parse_program(&format!(
        "{APPEND}(++)_inv ys = ([], ys)\n(++)_inv (x : z) = case (++)_inv z of (xs, ys) -> (x : xs, ys)\nlast z = case (++)_inv z of (xs, [x]) -> x\n"
    ))
    .unwrap();
    assert!(alpha_eq(last, expected.func(&"last".into()).unwrap()), "{last}");
    assert!(calls.funcs.values().all(FuncDef::is_standard_code));
    assert_eq!(elaborate(&prog(""), ElabMode::InverseCalls).unwrap().program, prog(""));
}

#[test]
fn elaborated_guard_is_non_strict() {
    let p = prog("last (xs ++ [x]) = x\n");
    let nsu = elaborate_nsu(&p);
    let r = &nsu.func(&"last".into()).unwrap().rules[0];
    assert_eq!(r.guards[0].mode, Mode::NonStrict);
}

#[test]
fn report_json() {
    let p = prog("");
    let s = synthesize_inverse(&p, &"++".into(), false).unwrap();
    let v = s.report.to_json(&"++".into());
    assert_eq!(v["strategy"], "Direct");
    assert!(v.get("reason").is_none());
}
