//! The `flc` command-line driver.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::ast::{inverse_name, nsu_inverse_name, Name, Program, Type};
use crate::check::{self, CheckOutcome, Probes, Verdict};
use crate::eval::{EvalConfig, Evaluator, SearchStrategy};
use crate::parser::{parse_program, parse_query, parse_type, Goal};
use crate::pretty::prefix_name;
use crate::transform::{self, ElabMode, Strategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "flc", version, about = "Evaluate FLC programs and synthesize inverse functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// Program source (`.flc`).
    pub input: PathBuf,
    /// Emit a JSON object `{command, input, result}` instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(clap::Args, Debug, Clone, Copy)]
pub struct Limits {
    #[arg(long, value_enum, default_value_t = StrategyArg::Bfs)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: u64,
    #[arg(long, default_value_t = 100)]
    pub max_results: usize,
}

impl Limits {
    fn config(self) -> EvalConfig {
        let strategy = match self.strategy {
            StrategyArg::Bfs => SearchStrategy::Bfs,
            StrategyArg::Dfs => SearchStrategy::Dfs,
        };
        EvalConfig { strategy, max_steps: self.max_steps, max_results: self.max_results }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyArg {
    Bfs,
    Dfs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Nsu,
    InverseCalls,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate a program, listing how each function would be inverted.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a query to normal form and print every answer. Inverses the
    /// query mentions (`f_inv`) are synthesized when not defined.
    Eval {
        #[command(flatten)]
        common: Common,
        /// An expression or a constraint (`=:=`, `=:<=`), optionally ending in
        /// `where x, y free`. Constraint answers bind the free variables.
        #[arg(long)]
        expr: String,
        #[command(flatten)]
        limits: Limits,
    },
    /// Synthesize the inverse of a function.
    Invert {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        function: String,
        /// Synthesize directly even where the fallback would be chosen.
        #[arg(long)]
        force_direct: bool,
    },
    /// Remove functional patterns from a program.
    Elaborate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Check inverses by bounded enumeration: the round-trip property, then
    /// equivalence with the fallback inverse for directly synthesized ones.
    Test {
        #[command(flatten)]
        common: Common,
        /// Only this function; otherwise every function in the program.
        #[arg(long)]
        function: Option<String>,
        #[arg(long)]
        force_direct: bool,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Argument types, one flag per parameter, overriding the signature.
        #[arg(long = "types")]
        types: Vec<String>,
        #[command(flatten)]
        limits: Limits,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Eval { .. } => "eval",
            Command::Invert { .. } => "invert",
            Command::Elaborate { .. } => "elaborate",
            Command::Test { .. } => "test",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Check { common }
            | Command::Eval { common, .. }
            | Command::Invert { common, .. }
            | Command::Elaborate { common, .. }
            | Command::Test { common, .. } => common,
        }
    }
}

/// What a command produced: human-readable text, the JSON `result`, and
/// the exit code.
struct Report {
    text: String,
    result: Value,
    code: i32,
}

impl Report {
    fn error(code: i32, message: impl Into<String>) -> Report {
        let message = message.into();
        Report { result: json!({"error": message}), text: message, code }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing to `out`. Returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(out, "{}", e.render());
            return code;
        }
    };
    let common = cli.command.common().clone();
    let report = match std::fs::read_to_string(&common.input) {
        Err(e) => Report::error(EXIT_USAGE, format!("cannot read {}: {e}", common.input.display())),
        Ok(text) => match parse_program(&text) {
            Err(errors) => {
                let lines: Vec<String> = errors.iter().map(|e| format!("{}:{e}", common.input.display())).collect();
                Report { text: lines.join("\n"), result: json!({"errors": lines}), code: EXIT_USAGE }
            }
            Ok(program) => dispatch(&cli.command, &program),
        },
    };
    let written = if common.json {
        let v = json!({
            "command": cli.command.name(),
            "input": common.input.display().to_string(),
            "result": report.result,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"))
    } else if report.text.is_empty() {
        Ok(())
    } else {
        writeln!(out, "{}", report.text.trim_end())
    };
    if written.is_err() {
        return EXIT_USAGE;
    }
    report.code
}

fn dispatch(command: &Command, program: &Program) -> Report {
    match command {
        Command::Check { .. } => check_program(program),
        Command::Eval { expr, limits, .. } => eval(program, expr, limits.config()),
        Command::Invert { function, force_direct, .. } => match resolve(program, function) {
            Ok(f) => invert(program, &f, *force_direct),
            Err(r) => r,
        },
        Command::Elaborate { mode, .. } => elaborate(program, *mode),
        Command::Test { function, force_direct, depth, types, limits, .. } => {
            let targets = match function {
                Some(name) => match resolve(program, name) {
                    Ok(f) => vec![f],
                    Err(r) => return r,
                },
                None => transform::classify_all(program).into_keys().collect(),
            };
            let types = match types.iter().map(|t| parse_type(t)).collect::<Result<Vec<_>, _>>() {
                Ok(ts) => ts,
                Err(e) => return Report::error(EXIT_USAGE, format!("--types: {e}")),
            };
            test(program, &targets, function.is_some(), *force_direct, *depth, &types, limits.config())
        }
    }
}

/// Accepts a function name as written in source, including operator
/// sections such as `(++)`.
fn resolve(program: &Program, name: &str) -> Result<Name, Report> {
    let bare = name.strip_prefix('(').and_then(|s| s.split_once(')')).map(|(op, rest)| format!("{op}{rest}"));
    let name = Name::new(bare.unwrap_or_else(|| name.to_string()));
    if program.func(&name).is_some() {
        Ok(name)
    } else {
        Err(Report::error(EXIT_USAGE, format!("unknown function `{name}`")))
    }
}

fn check_program(program: &Program) -> Report {
    let strategies = transform::classify_all(program);
    let mut text = format!("ok: {} data declarations, {} functions\n", program.data_decls.len(), program.funcs.len());
    for (f, s) in &strategies {
        text.push_str(&format!("{f}: {s}\n"));
    }
    let functions: Vec<Value> = strategies
        .iter()
        .map(|(f, s)| json!({"name": f.as_str(), "strategy": s.label(), "reason": s.reason()}))
        .collect();
    Report { text, result: json!({"program": crate::json::program(program), "inversion": functions}), code: EXIT_OK }
}

/// `program` plus the inverses of its functions that `expr` mentions but
/// the program does not define.
fn with_mentioned_inverses(program: &Program, expr: &str) -> Program {
    let mut out = program.clone();
    for f in program.funcs.keys() {
        let inv = inverse_name(f);
        if program.func(&inv).is_some() || !expr.contains(&prefix_name(&inv)) {
            continue;
        }
        if let Ok(s) = transform::synthesize_inverse(program, f, false) {
            for def in s.functions() {
                if out.func(&def.name).is_none() {
                    out.insert(def.clone());
                }
            }
        }
    }
    out
}

fn eval(program: &Program, expr: &str, config: EvalConfig) -> Report {
    let program = &with_mentioned_inverses(program, expr);
    let query = match parse_query(expr, program) {
        Ok(q) => q,
        Err(errors) => {
            let lines: Vec<String> = errors.iter().map(|e| format!("--expr:{e}")).collect();
            return Report { text: lines.join("\n"), result: json!({"errors": lines}), code: EXIT_USAGE };
        }
    };
    let outcome = Evaluator::new(program).and_then(|ev| match &query.goal {
        Goal::Expr(e) => ev.run(e, &query.free_vars, config),
        Goal::Constraint(c) => ev.search_constraint(c, &query.free_vars, config)?.collect_all(),
    });
    let result = match outcome {
        Ok(r) => r,
        Err(e) => return Report::error(EXIT_FAIL, format!("evaluation error: {e}")),
    };
    let mut text: String = result.results.iter().map(|t| format!("{t}\n")).collect();
    if result.results.is_empty() {
        text.push_str("-- no results\n");
    }
    if result.truncated {
        text.push_str(&format!("-- truncated after {} states, {} steps\n", result.states_explored, result.steps));
    }
    Report {
        text,
        result: json!({
            "results": result.results.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "truncated": result.truncated,
            "statesExplored": result.states_explored,
            "steps": result.steps,
        }),
        code: if result.truncated { EXIT_INCONCLUSIVE } else { EXIT_OK },
    }
}

fn invert(program: &Program, f: &Name, force_direct: bool) -> Report {
    let synthesis = match transform::synthesize_inverse(program, f, force_direct) {
        Ok(s) => s,
        Err(e) => {
            let mut r = Report::error(EXIT_FAIL, e.to_string());
            if let transform::TransformError::Rejected { reason, .. } = &e {
                r.result = json!({"function": f.as_str(), "strategy": "Rejected", "reason": reason});
            }
            return r;
        }
    };
    let mut text = String::new();
    for (i, def) in synthesis.functions().enumerate() {
        if i > 0 {
            text.push('\n');
        }
        text.push_str(&def.to_string());
    }
    text.push('\n');
    for (g, s) in &synthesis.report.per_function {
        let note = if g == f { "" } else { " (required by the inverse)" };
        text.push_str(&format!("-- {}: {s}{note}\n", prefix_name(&inverse_name(g))));
    }
    for w in &synthesis.report.warnings {
        text.push_str(&format!("-- warning: {w}\n"));
    }
    let mut result = synthesis.report.to_json(f);
    result["definitions"] = synthesis.functions().map(crate::json::func).collect();
    Report { text, result, code: EXIT_OK }
}

fn elaborate(program: &Program, mode: ModeArg) -> Report {
    let mode = match mode {
        ModeArg::Nsu => ElabMode::Nsu,
        ModeArg::InverseCalls => ElabMode::InverseCalls,
    };
    match transform::elaborate(program, mode) {
        Err(e) => Report::error(EXIT_FAIL, e.to_string()),
        Ok(elab) => {
            let mut text = elab.program.to_string();
            for w in &elab.report.warnings {
                text.push_str(&format!("-- warning: {w}\n"));
            }
            let functions: Vec<Value> = elab
                .report
                .per_function
                .iter()
                .map(|(g, s)| json!({"name": g.as_str(), "strategy": s.label(), "reason": s.reason()}))
                .collect();
            Report {
                text,
                result: json!({
                    "program": crate::json::program(&elab.program),
                    "source": elab.program.to_string(),
                    "inverses": functions,
                    "warnings": elab.report.warnings,
                }),
                code: EXIT_OK,
            }
        }
    }
}

fn worst(a: Verdict, b: Verdict) -> Verdict {
    let rank = |v| match v {
        Verdict::Pass => 0,
        Verdict::Inconclusive => 1,
        Verdict::Fail => 2,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn outcome_text(label: &str, o: &CheckOutcome) -> String {
    let mut s = String::new();
    for (i, line) in o.to_string().lines().enumerate() {
        s.push_str(if i == 0 { label } else { "  " });
        s.push_str(line);
        s.push('\n');
    }
    s
}

fn test(
    program: &Program,
    targets: &[Name],
    named: bool,
    force_direct: bool,
    depth: usize,
    types: &[Type],
    config: EvalConfig,
) -> Report {
    let mut text = String::new();
    let mut entries = Vec::new();
    let mut verdict = Verdict::Pass;
    let mut code = EXIT_OK;
    for f in targets {
        let strategy = match transform::classify(program, f, force_direct) {
            Ok(s) => s,
            Err(e) => return Report::error(EXIT_USAGE, e.to_string()),
        };
        text.push_str(&format!("{}: {strategy}\n", prefix_name(f)));
        let mut entry = json!({"function": f.as_str(), "strategy": strategy.label(), "reason": strategy.reason()});
        if let Strategy::Rejected(_) = strategy {
            // Only an explicit request for a non-invertible function is an error.
            if named {
                code = EXIT_FAIL;
            }
            entries.push(entry);
            continue;
        }
        let def = program.func(f).expect("resolved");
        let sig = check::signature_types(def);
        let params = if types.is_empty() { sig.as_ref().map(|(ps, _)| ps.clone()) } else { Some(types.to_vec()) };
        let Some(params) = params else {
            text.push_str("  skipped: no signature (pass --types)\n");
            entry["skipped"] = json!("no signature");
            entries.push(entry);
            if named {
                code = EXIT_USAGE;
            }
            continue;
        };
        let synthesis = match transform::synthesize_inverse(program, f, force_direct) {
            Ok(s) => s,
            Err(e) => return Report::error(EXIT_FAIL, e.to_string()),
        };
        let mut extended = synthesis.extend(program);
        let reference = nsu_inverse_name(f);
        extended.insert(transform::fallback_inverse(def, reference.clone()));
        for w in &synthesis.report.warnings {
            text.push_str(&format!("  warning: {w}\n"));
        }

        let rt = match check::roundtrip_check(&extended, f, &params, depth, config) {
            Ok(o) => o,
            Err(e) => return Report::error(EXIT_FAIL, e.to_string()),
        };
        text.push_str(&outcome_text("  roundtrip: ", &rt));
        let inv = inverse_name(f);
        entry["roundtrip"] = rt.to_json(&[f, &inv], &params, depth);
        verdict = worst(verdict, rt.verdict);

        if strategy == Strategy::Direct {
            match &sig {
                None => text.push_str("  equivalence: skipped (no result type in a signature)\n"),
                Some((_, result_ty)) => {
                    let arg = std::slice::from_ref(result_ty);
                    match check::equivalence_check(&extended, &inv, &reference, arg, depth, config, Probes::WithFailed)
                    {
                        Ok(eq) => {
                            text.push_str(&outcome_text(
                                &format!("  equivalence with {}: ", prefix_name(&reference)),
                                &eq,
                            ));
                            entry["equivalence"] = eq.to_json(&[&inv, &reference], arg, depth);
                            verdict = worst(verdict, eq.verdict);
                        }
                        Err(e) => return Report::error(EXIT_FAIL, e.to_string()),
                    }
                }
            }
        }
        entries.push(entry);
    }
    if code == EXIT_OK {
        code = exit_code(verdict);
    }
    Report { text, result: json!({"verdict": verdict.label(), "functions": entries}), code }
}
