//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines always show up in `cargo test` output.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};

use flc::ast::{alpha_eq, inverse_name, nsu_inverse_name, Expr, FuncDef, Mode, Name, Pattern, Program};
use flc::check::{equivalence_check, roundtrip_check, signature_types, Probes, Verdict};
use flc::cli::{run_cli, EXIT_FAIL};
use flc::eval::{EvalConfig, Evaluator, SearchStrategy};
use flc::parser::{parse_program, parse_query, Goal};
use flc::transform::{classify, classify_all, elaborate, fallback_inverse, synthesize_inverse, ElabMode, Strategy};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn config() -> EvalConfig {
    EvalConfig { max_steps: 20_000, ..EvalConfig::default() }
}

fn answers(p: &Program, query: &str, strategy: SearchStrategy) -> Result<(BTreeSet<String>, bool), String> {
    let q = parse_query(query, p).map_err(|e| format!("{query}: {e:?}"))?;
    let Goal::Expr(e) = &q.goal else { return Err(format!("{query}: not an expression")) };
    let ev = Evaluator::new(p).map_err(|e| e.to_string())?;
    let r = ev.run(e, &q.free_vars, EvalConfig { strategy, ..config() }).map_err(|e| e.to_string())?;
    Ok((r.results.iter().map(ToString::to_string).collect(), r.truncated))
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run_cli(std::iter::once("flc").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

/// The program with the inverse of `f` (optionally forced) and its
/// fallback `f_inv_nsu`.
fn with_inverses(p: &Program, f: &str, force: bool) -> Program {
    let f = Name::new(f);
    let mut out = synthesize_inverse(p, &f, force).unwrap().extend(p);
    out.insert(fallback_inverse(p.func(&f).unwrap(), nsu_inverse_name(&f)));
    out
}

fn c1_non_strictness() -> Outcome {
    let funpat = common::corpus("last_funpat");
    for mode in [ElabMode::Nsu, ElabMode::InverseCalls] {
        let p = elaborate(&funpat, mode).map_err(|e| e.to_string())?.program;
        ensure!(p.funcs.values().all(|f| !f.has_functional_patterns()), "{mode:?} left functional patterns");
        let (got, truncated) = answers(&p, "last [failed, True]", SearchStrategy::Bfs)?;
        ensure!(got == set(&["True"]) && !truncated, "{mode:?}: {got:?}");
    }
    let (got, truncated) = answers(&common::corpus("last_strict"), "last [failed, True]", SearchStrategy::Bfs)?;
    ensure!(got.is_empty() && !truncated, "strict encoding: {got:?}");
    Ok("{True} under NSU and InverseCalls, {} under =:=".into())
}

fn rules_only(def: &FuncDef) -> String {
    def.to_string().lines().filter(|l| !l.starts_with("--")).collect::<Vec<_>>().join("\n")
}

fn c2_synthesis_fidelity() -> Outcome {
    let append = common::corpus_path("append").display().to_string();
    let (code, out) = cli(&["invert", "--function", "append", &append]);
    ensure!(code == 0, "invert exit {code}");
    let printed = parse_program(&out).map_err(|e| format!("printed inverse does not parse: {e:?}"))?;
    let reference = parse_program(&format!(
        "{}(++)_inv ys = ([], ys)\n(++)_inv (x : z) = case (++)_inv z of (xs, ys) -> (x : xs, ys)\n",
        common::APPEND
    ))
    .unwrap();
    let inv = Name::new("++_inv");
    let got = printed.func(&inv).ok_or("no (++)_inv in output")?;
    ensure!(got.rules.len() == 2, "{} rules", got.rules.len());
    ensure!(alpha_eq(got, reference.func(&inv).unwrap()), "(++)_inv differs:\n{got}");

    let tail = synthesize_inverse(&common::corpus("tail"), &"tail".into(), false).map_err(|e| e.to_string())?;
    ensure!(rules_only(&tail.inverse) == "tail_inv xs = x : xs where x free", "tail_inv: {}", tail.inverse);

    let sa =
        synthesize_inverse(&common::corpus("selfappend"), &"selfAppend".into(), false).map_err(|e| e.to_string())?;
    let Expr::Case(_, branches) = &sa.inverse.rules[0].body else {
        return Err(format!("selfAppend_inv: {}", sa.inverse));
    };
    ensure!(
        branches.len() == 1 && branches[0].guards.len() == 1 && branches[0].guards[0].mode == Mode::Strict,
        "selfAppend_inv guard: {}",
        sa.inverse
    );
    Ok("(++)_inv alpha-equal to the reference; tail_inv and selfAppend_inv as expected".into())
}

fn c3_round_trip() -> Outcome {
    let mut summary = Vec::new();
    for (file, f) in
        [("append", "++"), ("tail", "tail"), ("selfappend", "selfAppend"), ("last_funpat", "last"), ("g_simple", "g")]
    {
        let p = common::corpus(file);
        let (params, _) = signature_types(p.func(&f.into()).unwrap()).ok_or("signature")?;
        let ext = with_inverses(&p, f, false);
        let out = roundtrip_check(&ext, &f.into(), &params, 3, config()).map_err(|e| e.to_string())?;
        ensure!(out.verdict == Verdict::Pass, "{f}: {out}");
        if f == "++" {
            ensure!(out.cases == 49, "(++) checked {} argument pairs", out.cases);
        }
        summary.push(format!("{f}:{}", out.cases));
    }
    Ok(format!("Pass at depth 3 ({})", summary.join(", ")))
}

/// Independent oracle: every split of a list.
fn splits(xs: &[&str]) -> BTreeSet<String> {
    let show = |s: &[&str]| format!("[{}]", s.join(", "));
    (0..=xs.len()).map(|i| format!("({}, {})", show(&xs[..i]), show(&xs[i..]))).collect()
}

fn c4_splitting() -> Outcome {
    let p = with_inverses(&common::corpus("append"), "++", false);
    let elems = ["True", "False", "False"];
    for n in 0..=3 {
        let xs = &elems[..n];
        let (got, truncated) = answers(&p, &format!("(++)_inv [{}]", xs.join(", ")), SearchStrategy::Bfs)?;
        ensure!(!truncated && got.len() == n + 1, "n = {n}: {} results", got.len());
        ensure!(got == splits(xs), "n = {n}: {got:?}");
    }
    Ok("n+1 splittings for n = 0..3, equal to the brute-force enumeration".into())
}

fn c5_equivalence() -> Outcome {
    let mut summary = Vec::new();
    for (file, f) in [("append", "++"), ("tail", "tail"), ("selfappend", "selfAppend"), ("last_funpat", "last")] {
        let p = common::corpus(file);
        ensure!(classify(&p, &f.into(), false).unwrap() == Strategy::Direct, "{f} is not Direct");
        let (_, result) = signature_types(p.func(&f.into()).unwrap()).ok_or("signature")?;
        let ext = with_inverses(&p, f, false);
        let (a, b) = (inverse_name(&f.into()), nsu_inverse_name(&f.into()));
        let out =
            equivalence_check(&ext, &a, &b, &[result], 3, config(), Probes::WithFailed).map_err(|e| e.to_string())?;
        ensure!(out.verdict == Verdict::Pass, "{f}: {out}");
        summary.push(format!("{f}:{}", out.cases));
    }
    Ok(format!("Pass with failed probes ({})", summary.join(", ")))
}

fn c6_counterexample() -> Outcome {
    let g = common::corpus("g");
    let forced = with_inverses(&g, "g", true);
    let (got, _) = answers(&forced, "g_inv (0, failed)", SearchStrategy::Bfs)?;
    ensure!(got.is_empty(), "forced g_inv (0, failed) = {got:?}");
    let fallback = synthesize_inverse(&g, &"g".into(), false).unwrap().extend(&g);
    let (got, _) = answers(&fallback, "g_inv (0, failed)", SearchStrategy::Bfs)?;
    ensure!(got == set(&["0"]), "fallback g_inv (0, failed) = {got:?}");
    let simple = with_inverses(&common::corpus("g_simple"), "g", false);
    let (got, _) = answers(&simple, "g_inv (0, failed)", SearchStrategy::Bfs)?;
    ensure!(got == set(&["0"]), "simplified g_inv (0, failed) = {got:?}");

    let ty = [signature_types(g.func(&"g".into()).unwrap()).unwrap().1];
    let out = equivalence_check(&forced, &"g_inv".into(), &"g_inv_nsu".into(), &ty, 3, config(), Probes::WithFailed)
        .map_err(|e| e.to_string())?;
    ensure!(out.verdict == Verdict::Fail, "verdict {}", out.verdict);
    let cx = out.counterexample.ok_or("no counterexample")?;
    ensure!(cx.input.to_string() == "g_inv (0, failed)", "input {}", cx.input);
    let shown = |ts: &[flc::eval::ResultTerm]| ts.iter().map(ToString::to_string).collect::<Vec<_>>();
    ensure!(shown(&cx.expected) == ["0"] && cx.actual.is_empty(), "sets {:?} {:?}", cx.expected, cx.actual);
    let path = common::corpus_path("g").display().to_string();
    let (code, _) = cli(&["test", "--function", "g", "--force-direct", &path]);
    ensure!(code == EXIT_FAIL, "exit code {code}");
    Ok("g_inv (0, failed): forced {}, fallback {0}, simplified {0}; Fail, exit 1".into())
}

fn c7_classification() -> Outcome {
    let label = |file: &str, f: &str| classify(&common::corpus(file), &f.into(), false).unwrap();
    for (file, f) in [("append", "++"), ("tail", "tail"), ("selfappend", "selfAppend")] {
        ensure!(label(file, f) == Strategy::Direct, "{f}: {}", label(file, f));
    }
    let g = label("g", "g");
    let reason = g.reason().unwrap_or_default();
    ensure!(g.label() == "FallbackNSU", "g: {g}");
    ensure!(reason.contains("non-linear") && reason.contains("extra variables"), "g reason: {reason}");
    let dollar = label("dollar", "$");
    ensure!(dollar.label() == "Rejected" && dollar.reason() == Some("higher-order"), "$: {dollar}");
    Ok("(++), tail, selfAppend Direct; g FallbackNSU; ($) Rejected (higher-order)".into())
}

fn scan_direct(p: &Program, f: &Name) -> Result<usize, String> {
    let s = synthesize_inverse(p, f, false).map_err(|e| e.to_string())?;
    let mut n = 0;
    for (g, strategy) in &s.report.per_function {
        if *strategy != Strategy::Direct {
            continue;
        }
        let def = s.functions().find(|d| d.name == inverse_name(g)).ok_or("missing inverse")?;
        ensure!(def.nonstandard_counts() == (0, 0), "{}:\n{def}", def.name);
        let no_funpats = def.rules.iter().all(|r| r.patterns.iter().all(|p| !matches!(p, Pattern::FunCall(..))));
        ensure!(no_funpats, "{} has functional patterns", def.name);
        n += 1;
    }
    Ok(n)
}

fn c8_standard_code() -> Outcome {
    let mut defs = 0;
    for name in common::CORPUS {
        let p = common::corpus(name);
        for (f, s) in classify_all(&p) {
            if s == Strategy::Direct {
                defs += scan_direct(&p, &f)?;
            }
        }
    }
    let mut programs = 0;
    let mut seed = 0;
    while programs < 200 {
        let p = parse_program(&common::ProgramGen::new(seed, false).program(4)).unwrap();
        seed += 1;
        let direct: Vec<Name> =
            classify_all(&p).into_iter().filter(|(_, s)| *s == Strategy::Direct).map(|(f, _)| f).collect();
        if direct.is_empty() {
            continue;
        }
        for f in &direct {
            defs += scan_direct(&p, f)?;
        }
        programs += 1;
    }
    Ok(format!("{defs} Direct inverses scanned (corpus + {programs} generated programs)"))
}

fn c9_call_time_choice() -> Outcome {
    let p = common::corpus("coin");
    for strategy in [SearchStrategy::Bfs, SearchStrategy::Dfs] {
        let (got, truncated) = answers(&p, "selfAppend [coin]", strategy)?;
        ensure!(!truncated && got == set(&["[True, True]", "[False, False]"]), "{strategy:?}: {got:?}");
    }
    Ok("{[True, True], [False, False]} under BFS and DFS".into())
}

fn c10_parser_round_trip() -> Outcome {
    for name in common::CORPUS {
        let p = common::corpus(name);
        ensure!(parse_program(&p.to_string()).as_ref() == Ok(&p), "{name}");
    }
    for seed in 0..500u64 {
        let src = common::ProgramGen::new(seed, seed % 2 == 0).program(4);
        let p = parse_program(&src).map_err(|e| format!("seed {seed}: {e:?}"))?;
        ensure!(parse_program(&p.to_string()).as_ref() == Ok(&p), "seed {seed}");
    }
    Ok(format!("{} corpus files and 500 generated programs", common::CORPUS.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("non-strictness split", c1_non_strictness),
        ("synthesis fidelity", c2_synthesis_fidelity),
        ("specification round-trip", c3_round_trip),
        ("splitting completeness", c4_splitting),
        ("equivalence on the supported class", c5_equivalence),
        ("counterexample reproduction", c6_counterexample),
        ("classification", c7_classification),
        ("standard-code scan", c8_standard_code),
        ("call-time choice", c9_call_time_choice),
        ("parser round-trip", c10_parser_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
