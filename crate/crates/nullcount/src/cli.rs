//! The `nullcount` command line: argument parsing, file loading, and the four
//! subcommands. Output goes to a caller-supplied writer so it can be tested.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::approx::ApproxConfig;
use crate::classify::{
    classify_approx, classify_exact, classify_parametric, DomainKind, Problem, ProblemKind, Setting, TableKind,
};
use crate::compsem::{is_completion_codd, is_completion_naive, DEFAULT_NODE_BUDGET};
use crate::error::{Error, Result};
use crate::exact::{plan_and_count, CountValue, ExactConfig, Mode, PlanConfig};
use crate::gadgets::{gadget_by_name, verify_identity_with, Instance};
use crate::model::{parse_database, GroundDatabase, IncompleteDatabase};
use crate::oracle::{Cnf3, Graph, OracleConfig};
use crate::query::{parse_query, substitute, UnionQuery};

#[derive(Parser, Debug)]
#[command(
    name = "nullcount",
    version,
    about = "Count valuations and completions of incomplete databases"
)]
pub struct Cli {
    /// Worker threads for enumeration and sampling.
    #[arg(long, global = true, env = "NULLCOUNT_JOBS", default_value_t = 1)]
    pub jobs: usize,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report the complexity of counting for a query.
    Classify(ClassifyArgs),
    /// Count valuations or completions satisfying a query.
    Count(CountArgs),
    /// Decide whether a complete database is a completion of an incomplete one.
    CheckCompletion(CheckArgs),
    /// Generate a hardness gadget from a graph or a 3-CNF.
    Gadget(GadgetArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TableArg {
    Naive,
    Codd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DomainArg {
    Uniform,
    NonUniform,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProblemArg {
    Val,
    Comp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exact,
    Brute,
    Approx,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    /// Query text, e.g. "R(X), S(X)" or "q(X) := R(X, Y)".
    #[arg(short, long, conflicts_with = "query_file")]
    pub query: Option<String>,
    #[arg(long)]
    pub query_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SettingArgs {
    #[arg(long, value_enum)]
    pub table: Option<TableArg>,
    #[arg(long, value_enum)]
    pub domain: Option<DomainArg>,
    #[arg(long, value_enum, default_value = "val")]
    pub problem: ProblemArg,
    /// Count for the negation of the query.
    #[arg(long)]
    pub negated: bool,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Database whose setting is used unless overridden.
    #[arg(long)]
    pub db: Option<PathBuf>,
    #[command(flatten)]
    pub setting: SettingArgs,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long)]
    pub db: PathBuf,
    #[command(flatten)]
    pub setting: SettingArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: ModeArg,
    /// Comma-separated constants for the free variables.
    #[arg(long)]
    pub answer: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1 << 24)]
    pub valuation_cap: u64,
    #[arg(long, default_value_t = 100_000)]
    pub witness_cap: usize,
    /// Null-signature cap of the inclusion–exclusion algorithm.
    #[arg(long, default_value_t = 8)]
    pub signature_cap: usize,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub db: PathBuf,
    /// Complete database in the same format, without nulls.
    #[arg(long)]
    pub facts: PathBuf,
    /// Search nodes allowed for tables that are not Codd.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    pub budget: u64,
}

#[derive(Args, Debug)]
pub struct GadgetArgs {
    /// One of 3col, is-val-rst, is-val-rxy, vc, is-comp, pf, 3col-comp, k3sat.
    pub name: String,
    #[arg(long, required_unless_present = "cnf")]
    pub graph: Option<PathBuf>,
    #[arg(long, requires = "k")]
    pub cnf: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check the count identity with the reference counters.
    #[arg(long)]
    pub verify: bool,
    /// Assign a bipartition to the graph when it has none.
    #[arg(long)]
    pub bipartition: bool,
}

fn read(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        return std::io::read_to_string(std::io::stdin()).map_err(|e| Error::Io(format!("stdin: {e}")));
    }
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_query(q: &QueryArgs) -> Result<UnionQuery> {
    match (&q.query, &q.query_file) {
        (Some(t), _) => parse_query(t),
        (None, Some(p)) => parse_query(&read(p)?),
        (None, None) => Err(Error::Invalid("give a query with --query or --query-file".into())),
    }
}

fn load_db(p: &Path) -> Result<IncompleteDatabase> {
    parse_database(&read(p)?)
}

fn problem(s: &SettingArgs) -> Problem {
    Problem {
        kind: match s.problem {
            ProblemArg::Val => ProblemKind::Valuations,
            ProblemArg::Comp => ProblemKind::Completions,
        },
        negated: s.negated,
    }
}

/// Setting from the flags, falling back to `base` (or naive/non-uniform).
fn setting(s: &SettingArgs, base: Option<Setting>) -> Setting {
    let base = base.unwrap_or(Setting::new(TableKind::Naive, DomainKind::NonUniform));
    Setting {
        table: match s.table {
            Some(TableArg::Naive) => TableKind::Naive,
            Some(TableArg::Codd) => TableKind::Codd,
            None => base.table,
        },
        domain: match s.domain {
            Some(DomainArg::Uniform) => DomainKind::Uniform,
            Some(DomainArg::NonUniform) => DomainKind::NonUniform,
            None => base.domain,
        },
    }
}

fn emit(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| Error::Io(e.to_string()))
}

fn emit_json(out: &mut dyn Write, v: Value) -> Result<()> {
    emit(out, serde_json::to_string_pretty(&v).expect("values serialize"))
}

pub fn cmd_classify(a: &ClassifyArgs, json: bool, out: &mut dyn Write) -> Result<()> {
    let q = load_query(&a.query)?;
    let detected = match &a.db {
        Some(p) => Some(Setting::of(&load_db(p)?)),
        None => None,
    };
    let s = setting(&a.setting, detected);
    if let Some(d) = detected {
        if s.table == TableKind::Codd && d.table != TableKind::Codd {
            return Err(Error::Setting(
                "--table codd given but a null repeats in the database".into(),
            ));
        }
    }
    let p = problem(&a.setting);
    let approx = classify_approx(&q, s, p);
    let cq = q.as_single().ok_or_else(|| {
        Error::Capability("exact verdicts cover single conjunctive queries; unions get approx only".into())
    });
    let (exact, classes) = match cq {
        Ok(cq) if cq.is_boolean() => (classify_exact(cq, s, p)?, Vec::new()),
        Ok(cq) => {
            let v = classify_parametric(cq, s, p)?;
            let classes = v
                .classes
                .into_iter()
                .map(|(t, v)| (t.join(","), v.to_string()))
                .collect();
            (v.overall, classes)
        }
        Err(e) => {
            if json {
                return emit_json(
                    out,
                    json!({"setting": s.to_string(), "problem": p.to_string(), "approx": approx.to_string(), "exact": null}),
                );
            }
            emit(out, format!("approx: {approx}"))?;
            return Err(e);
        }
    };
    if json {
        let classes: serde_json::Map<String, Value> = classes
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        return emit_json(
            out,
            json!({
                "setting": s.to_string(),
                "problem": p.to_string(),
                "exact": exact.to_string(),
                "witnesses": exact.witnesses,
                "approx": approx.to_string(),
                "classes": classes,
            }),
        );
    }
    emit(out, format!("setting: {s}"))?;
    emit(out, format!("problem: {p}"))?;
    emit(out, format!("exact: {exact}"))?;
    for (t, v) in &classes {
        emit(out, format!("  answer ({t}): {v}"))?;
    }
    emit(out, format!("approx: {approx}"))
}

pub fn cmd_count(a: &CountArgs, jobs: usize, json: bool, out: &mut dyn Write) -> Result<()> {
    let mut q = load_query(&a.query)?;
    if let Some(ans) = &a.answer {
        let tuple: Vec<String> = ans.split(',').map(|s| s.trim().to_string()).collect();
        q = UnionQuery::new(
            q.disjuncts()
                .iter()
                .map(|d| substitute(d, &tuple))
                .collect::<Result<_>>()?,
        )?;
    }
    let db = load_db(&a.db)?;
    let s = setting(&a.setting, Some(Setting::of(&db)));
    let cfg = PlanConfig {
        exact: ExactConfig {
            signature_cap: a.signature_cap,
            ..Default::default()
        },
        oracle: OracleConfig {
            valuation_cap: a.valuation_cap,
            jobs,
            ..Default::default()
        },
        approx: ApproxConfig {
            epsilon: a.epsilon,
            delta: a.delta,
            seed: a.seed,
            witness_cap: a.witness_cap,
            jobs,
        },
        setting: Some(s),
    };
    let mode = match a.mode {
        ModeArg::Auto => Mode::Auto,
        ModeArg::Exact => Mode::Exact,
        ModeArg::Brute => Mode::Brute,
        ModeArg::Approx => Mode::Approx,
    };
    let p = problem(&a.setting);
    let r = plan_and_count(&db, &q, p, mode, &cfg)?;
    let verdict = r.verdict.as_ref().map(ToString::to_string);
    if json {
        let mut v = json!({
            "problem": p.to_string(),
            "count": r.value.value().to_string(),
            "exact": match &r.value {
                CountValue::Exact(_) => true,
                CountValue::Estimate(e) => e.exact,
            },
            "method": r.method.to_string(),
            "setting": r.setting.to_string(),
            "verdict": verdict,
            "approx": r.approx.to_string(),
        });
        if let CountValue::Estimate(e) = &r.value {
            v["epsilon"] = json!(a.epsilon);
            v["delta"] = json!(a.delta);
            v["seed"] = json!(a.seed.to_string());
            v["samples"] = json!(e.samples.to_string());
            v["runs"] = json!(e.runs);
            v["witnesses"] = json!(e.witnesses);
        }
        return emit_json(out, v);
    }
    match &r.value {
        CountValue::Exact(n) => emit(out, n),
        CountValue::Estimate(e) if e.exact => emit(out, &e.value),
        CountValue::Estimate(e) => emit(
            out,
            format!(
                "{} (estimate: epsilon {}, delta {}, seed {})",
                e.value, a.epsilon, a.delta, a.seed
            ),
        ),
    }
}

pub fn cmd_check_completion(a: &CheckArgs, json: bool, out: &mut dyn Write) -> Result<()> {
    let db = load_db(&a.db)?;
    let s = GroundDatabase::parse(&read(&a.facts)?)?;
    let (yes, method) = if db.is_codd() {
        (is_completion_codd(&db, &s)?, "matching")
    } else {
        (is_completion_naive(&db, &s, a.budget)?, "search")
    };
    if json {
        return emit_json(out, json!({"completion": yes, "method": method}));
    }
    emit(out, format!("{} ({method})", if yes { "yes" } else { "no" }))
}

pub fn cmd_gadget(a: &GadgetArgs, jobs: usize, json: bool, out: &mut dyn Write) -> Result<()> {
    let graph;
    let cnf;
    let inst = match (&a.graph, &a.cnf) {
        (_, Some(p)) => {
            cnf = Cnf3::parse(&read(p)?)?;
            Instance::Cnf(&cnf, a.k.unwrap_or(1))
        }
        (Some(p), None) => {
            let g = Graph::parse(&read(p)?)?;
            graph = if a.bipartition && g.left().is_none() {
                g.with_bipartition()
                    .ok_or_else(|| Error::Invalid("the graph is not bipartite".into()))?
            } else {
                g
            };
            Instance::Graph(&graph)
        }
        (None, None) => return Err(Error::Invalid("give --graph or --cnf".into())),
    };
    let g = gadget_by_name(&a.name, inst)?;
    let text = g.database.to_string();
    match &a.out {
        Some(p) => std::fs::write(p, &text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None if !json => write!(out, "{text}").map_err(|e| Error::Io(e.to_string()))?,
        None => {}
    }
    let check = if a.verify {
        let cfg = OracleConfig {
            jobs,
            ..Default::default()
        };
        Some(verify_identity_with(&g, &cfg)?)
    } else {
        None
    };
    if json {
        let mut v = json!({
            "gadget": g.name,
            "setting": g.setting.to_string(),
            "query": g.query.as_ref().map(ToString::to_string),
            "identity": g.identity.to_string(),
        });
        if a.out.is_none() {
            v["database"] = json!(text);
        }
        if let Some(c) = &check {
            v["lhs"] = json!(c.lhs.to_string());
            v["rhs"] = json!(c.rhs.to_string());
            v["holds"] = json!(c.holds());
        }
        emit_json(out, v)?;
    } else if let Some(c) = &check {
        if a.out.is_some() {
            emit(out, c)?;
        } else {
            eprintln!("{c}");
        }
    }
    match check {
        Some(c) if !c.holds() => Err(Error::Verification(c.to_string())),
        _ => Ok(()),
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let jobs = cli.jobs.max(1);
    match &cli.command {
        Command::Classify(a) => cmd_classify(a, cli.json, out),
        Command::Count(a) => cmd_count(a, jobs, cli.json, out),
        Command::CheckCompletion(a) => cmd_check_completion(a, cli.json, out),
        Command::Gadget(a) => cmd_gadget(a, jobs, cli.json, out),
    }
}

/// Parses `args`, runs the command on stdout, reports errors on stderr and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (Result<()>, String) {
        let cli = Cli::try_parse_from(std::iter::once("nullcount").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let r = run(&cli, &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn classify_lines() {
        let (r, out) = run_args(&[
            "classify",
            "-q",
            "R(X),S(X)",
            "--table",
            "codd",
            "--domain",
            "non-uniform",
        ]);
        r.unwrap();
        assert!(out.contains("exact: #P-complete (pattern R(x)∧S(x))"), "{out}");
        let (r, out) = run_args(&["classify", "-q", "R(X),S(Y)", "--domain", "uniform"]);
        r.unwrap();
        assert!(out.contains("exact: FP"), "{out}");
    }

    #[test]
    fn approx_completions_are_refused() {
        let dir = std::env::temp_dir().join(format!("nullcount-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let db = dir.join("d.idb");
        std::fs::write(&db, "dom ?1 : a b\nR(?1)\n").unwrap();
        let (r, _) = run_args(&[
            "count",
            "--db",
            db.to_str().unwrap(),
            "-q",
            "R(X)",
            "--problem",
            "comp",
            "--mode",
            "approx",
        ]);
        let e = r.unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("never"));
    }
}
