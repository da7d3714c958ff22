//! The `masp` command line.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis;
use crate::ast::{Constant, DefModule, Formula, ModularProgram, PredicateSymbol};
use crate::checks;
use crate::equivalence::{self, EquivOptions, EquivVerdict};
use crate::error::{Error, Result};
use crate::eval::{self, Domain, Interpretation, SolveOptions, Strategy};
use crate::parser::{parse_instance, parse_program, print_program};
use crate::reductions::{self, ReductionKind};
use crate::sm;

#[derive(Parser, Debug)]
#[command(name = "masp", version, about = "Modular answer set programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the answer sets of a program.
    Solve(SolveArgs),
    /// Answer sets through the exhaustive search over the whole rule set.
    OracleSolve(SolveArgs),
    /// Print the second-order formula of a program.
    Smf(ProgramArgs),
    /// Print the program with all def-modules at the top level.
    Flatten(ProgramArgs),
    /// Report coherence and tightness, or run seeded agreement trials.
    Check(CheckArgs),
    /// Print the predicate dependency graph.
    Depgraph(ProgramArgs),
    /// Print the reductions that apply to each def-module.
    Reduce(ReduceArgs),
    /// Check strong equivalence of two programs up to a domain bound.
    Equiv(EquivArgs),
    /// Replace a sub-program of HOST by NEW and print the result.
    Replace(ReplaceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Splitting,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Denials,
    Completion,
    Choice,
    Circumscription,
}

#[derive(Args, Debug)]
pub struct ProgramArgs {
    pub program: PathBuf,
    /// Facts joined with the program as an extra def-module.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Public symbols of the joined program, e.g. `in/2,vertex/1`.
    #[arg(long)]
    pub show: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: ProgramArgs,
    /// `n` for fresh constants c1..cn, or a list `a,b,c`; program constants are always included.
    #[arg(long)]
    pub domain_bound: Option<String>,
    #[arg(long, value_enum, default_value = "splitting")]
    pub strategy: StrategyArg,
    /// Same as `--strategy naive`.
    #[arg(long)]
    pub naive: bool,
    #[arg(long, default_value_t = eval::DEFAULT_MAX_BRANCH)]
    pub max_branch: u64,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: ProgramArgs,
    /// Also run seeded random agreement trials.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub common: ProgramArgs,
    /// A def-module label such as `M2`, or an intensional symbol such as `in/2`.
    #[arg(long)]
    pub module: Option<String>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
}

#[derive(Args, Debug)]
pub struct EquivArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    /// Sentences of the context, written as rules or facts.
    #[arg(long)]
    pub context: Option<PathBuf>,
    #[arg(long)]
    pub domain_bound: Option<String>,
    /// Compare answer sets (joined with `--instance` if given) instead.
    #[arg(long)]
    pub answer_sets: bool,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, env = "MASP_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long, default_value_t = eval::DEFAULT_MAX_BRANCH)]
    pub max_branch: u64,
}

#[derive(Args, Debug)]
pub struct ReplaceArgs {
    pub host: PathBuf,
    pub old: PathBuf,
    pub new: PathBuf,
}

struct Io<'a> {
    out: String,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn line(&mut self, s: impl AsRef<str>) {
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    fn warn(&mut self, s: impl std::fmt::Display) {
        let _ = writeln!(self.err, "{s}");
    }
}

/// Runs the command line and returns the exit code: 0 success, 1 no answer
/// or a counterexample, 2 an error. Output is written once at the end.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut io = Io { out: String::new(), err };
    let code = match dispatch(&cli.command, &mut io) {
        Ok(c) => c,
        Err(e) => {
            io.warn(format_args!("error: {e}"));
            2
        }
    };
    let _ = out.write_all(io.out.as_bytes());
    let _ = out.flush();
    code
}

fn dispatch(cmd: &Command, io: &mut Io) -> Result<i32> {
    match cmd {
        Command::Solve(a) => cmd_solve(a, false, io),
        Command::OracleSolve(a) => cmd_solve(a, true, io),
        Command::Smf(a) => cmd_smf(a, io),
        Command::Flatten(a) => cmd_flatten(a, io),
        Command::Check(a) => cmd_check(a, io),
        Command::Depgraph(a) => cmd_depgraph(a, io),
        Command::Reduce(a) => cmd_reduce(a, io),
        Command::Equiv(a) => cmd_equiv(a, io),
        Command::Replace(a) => cmd_replace(a, io),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn located(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse(d) => Error::Parse(crate::error::Diagnostic { message: format!("{}: {}", path.display(), d.message), ..d }),
        e => e,
    }
}

fn load_program(path: &Path, io: &mut Io) -> Result<ModularProgram> {
    let (p, warnings) = parse_program(&read(path)?).map_err(|e| located(path, e))?;
    for w in warnings {
        io.warn(format_args!("{}: {w}", path.display()));
    }
    Ok(p)
}

fn load_instance(path: &Path) -> Result<DefModule> {
    parse_instance(&read(path)?).map_err(|e| located(path, e))
}

/// Parses `name/arity` items separated by commas or spaces.
pub fn parse_predlist(s: &str) -> Result<BTreeSet<PredicateSymbol>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (name, arity) = t.split_once('/').ok_or_else(|| Error::Precondition(format!("expected name/arity, got `{t}`")))?;
            let arity = arity.parse().map_err(|_| Error::Precondition(format!("bad arity in `{t}`")))?;
            Ok(PredicateSymbol::new(name, arity))
        })
        .collect()
}

/// `n` gives the fresh constants `c1..cn`; otherwise a comma-separated list of constants.
pub fn parse_domain_bound(s: &str) -> Result<Domain> {
    if let Ok(n) = s.trim().parse::<usize>() {
        return Ok(Domain::new((1..=n).map(|k| Constant::new(format!("c{k}")))));
    }
    let mut cs = Vec::new();
    for t in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let ok = t.chars().next().is_some_and(|c| c.is_ascii_lowercase()) && t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok {
            return Err(Error::Precondition(format!("`{t}` is not a constant")));
        }
        cs.push(Constant::new(t));
    }
    Ok(Domain::new(cs))
}

fn load_joined(a: &ProgramArgs, io: &mut Io) -> Result<ModularProgram> {
    let p = load_program(&a.program, io)?;
    let show = a.show.as_deref().map(parse_predlist).transpose()?;
    match &a.instance {
        Some(path) => Ok(eval::join(&p, &load_instance(path)?, show)),
        None => Ok(match show {
            Some(s) => ModularProgram { public: s, ..p },
            None => p,
        }),
    }
}

fn answers_text(answers: &[Interpretation]) -> Vec<String> {
    let mut out = Vec::new();
    for (k, a) in answers.iter().enumerate() {
        out.push(format!("Answer: {}", k + 1));
        out.push(a.to_string());
    }
    out
}

fn answers_json(answers: &[Interpretation]) -> String {
    serde_json::to_string(&answers.iter().map(|a| a.atom_strings()).collect::<Vec<_>>()).expect("strings serialize")
}

fn cmd_solve(a: &SolveArgs, oracle: bool, io: &mut Io) -> Result<i32> {
    let p = load_joined(&a.common, io)?;
    let strategy = if oracle || a.naive || a.strategy == StrategyArg::Naive { Strategy::Naive } else { Strategy::Splitting };
    let domain_override = a.domain_bound.as_deref().map(parse_domain_bound).transpose()?;
    let opts = SolveOptions { domain_override, strategy, max_branch: a.max_branch };
    let answers = eval::answer_sets(&p, &opts)?;
    match a.common.format {
        Format::Json => io.line(answers_json(&answers)),
        _ => {
            for l in answers_text(&answers) {
                io.line(l);
            }
            io.line(if answers.is_empty() { "UNSATISFIABLE" } else { "SATISFIABLE" });
        }
    }
    Ok(if answers.is_empty() { 1 } else { 0 })
}

fn cmd_smf(a: &ProgramArgs, io: &mut Io) -> Result<i32> {
    let p = load_joined(a, io)?;
    let f = sm::phi(&p)?;
    match a.format {
        Format::Json => io.line(json!({ "formula": f.to_string() }).to_string()),
        _ => io.line(f.to_string()),
    }
    Ok(0)
}

fn cmd_flatten(a: &ProgramArgs, io: &mut Io) -> Result<i32> {
    let p = load_joined(a, io)?;
    let (flat, warning) = analysis::flatten(&p);
    if let Some(w) = warning {
        io.warn(w);
    }
    io.out.push_str(&print_program(&flat));
    Ok(0)
}

fn tightness(p: &ModularProgram) -> (Vec<String>, Vec<String>) {
    let (mut tight, mut loose) = (Vec::new(), Vec::new());
    for (d, l) in p.defmods().into_iter().zip(analysis::labels(p)) {
        if d.is_denial_only() {
            continue;
        }
        if analysis::is_tight(d) {
            tight.push(l);
        } else {
            loose.push(l);
        }
    }
    (tight, loose)
}

fn cmd_check(a: &CheckArgs, io: &mut Io) -> Result<i32> {
    let p = load_joined(&a.common, io)?;
    let report = analysis::is_coherent(&p);
    let (tight, loose) = tightness(&p);
    let trials = a.seed.map(|s| checks::random_trials(s, a.trials, eval::DEFAULT_MAX_BRANCH)).transpose()?;
    match a.common.format {
        Format::Json => {
            let v = json!({ "report": report, "tight": tight, "non_tight": loose, "trials": trials });
            io.line(v.to_string());
        }
        _ => {
            let yn = if report.coherent { "yes" } else { "no" };
            io.line(format!("coherent: {yn}; tight modules: {}; non-tight: {}", tight.join(" "), loose.join(" ")));
            for v in &report.violations {
                io.line(format!("  {v}"));
            }
            if let Some(t) = &trials {
                io.line(format!("seed {}: {} trials, {} failures", t.seed, t.trials, t.failures.len()));
                for f in &t.failures {
                    io.line(format!("  {f}"));
                }
            }
        }
    }
    let ok = report.coherent && trials.as_ref().is_none_or(|t| t.failures.is_empty());
    Ok(if ok { 0 } else { 1 })
}

fn cmd_depgraph(a: &ProgramArgs, io: &mut Io) -> Result<i32> {
    let p = load_joined(a, io)?;
    let g = analysis::dependency_graph(&p);
    match a.format {
        Format::Json => io.line(serde_json::to_string(&g).expect("graph serializes")),
        _ => io.out.push_str(&analysis::to_dot(&g)),
    }
    Ok(0)
}

fn kind_of(k: KindArg) -> ReductionKind {
    match k {
        KindArg::Denials => ReductionKind::Denials,
        KindArg::Completion => ReductionKind::Completion,
        KindArg::Choice => ReductionKind::Choice,
        KindArg::Circumscription => ReductionKind::Circumscription,
    }
}

fn cmd_reduce(a: &ReduceArgs, io: &mut Io) -> Result<i32> {
    let p = load_joined(&a.common, io)?;
    let labels = analysis::labels(&p);
    let wanted = a.module.as_deref().map(|m| m.trim().to_string());
    let by_symbol = wanted.as_deref().and_then(|m| parse_predlist(m).ok()).filter(|s| s.len() == 1);
    let selected: Vec<(&DefModule, &String)> = p
        .defmods()
        .into_iter()
        .zip(&labels)
        .filter(|(d, l)| match (&wanted, &by_symbol) {
            (None, _) => true,
            (Some(_), Some(s)) => s.is_subset(&d.intensional),
            (Some(m), None) => *l == m,
        })
        .collect();
    if selected.is_empty() {
        return Err(Error::Precondition(format!("no def-module `{}`; labels are {}", wanted.unwrap_or_default(), labels.join(" "))));
    }
    let mut rows = Vec::new();
    for (d, l) in &selected {
        let results = match a.kind {
            Some(k) => reductions::all_reductions(d).into_iter().filter(|r| r.kind == kind_of(k)).collect(),
            None => reductions::all_reductions(d),
        };
        for r in results {
            rows.push((l.to_string(), r));
        }
    }
    match a.common.format {
        Format::Json => {
            let v: Vec<_> = rows.iter().map(|(l, r)| json!({ "module": l, "result": r })).collect();
            io.line(serde_json::Value::Array(v).to_string());
        }
        _ => {
            let bare = selected.len() == 1 && a.kind.is_some();
            for (l, r) in &rows {
                match (&r.residual, bare) {
                    (Some(f), true) => io.line(f.to_string()),
                    (Some(f), false) => io.line(format!("{l} {}: {f}", r.kind)),
                    (None, _) if a.kind.is_some() => {
                        io.line(format!("{l} {}: not applicable ({})", r.kind, r.reason.clone().unwrap_or_default()))
                    }
                    (None, _) => {}
                }
            }
        }
    }
    let any = rows.iter().any(|(_, r)| r.applicable);
    Ok(if any { 0 } else { 1 })
}

/// The sentences of a context file: one closed formula per rule.
pub fn context_formulas(p: &ModularProgram) -> Result<Vec<Formula>> {
    p.rules().map(|r| r.to_formula().map_err(Error::from)).collect()
}

fn cmd_equiv(a: &EquivArgs, io: &mut Io) -> Result<i32> {
    let mut x = load_program(&a.first, io)?;
    let mut y = load_program(&a.second, io)?;
    if let Some(path) = &a.instance {
        let e = load_instance(path)?;
        x = eval::join(&x, &e, None);
        y = eval::join(&y, &e, None);
    }
    let gamma = match &a.context {
        Some(path) => context_formulas(&load_program(path, io)?)?,
        None => Vec::new(),
    };
    let mut dom = match &a.domain_bound {
        Some(s) => parse_domain_bound(s)?,
        None => equivalence::default_bound(&[&x, &y]),
    };
    let ctx_constants: BTreeSet<Constant> = gamma.iter().flat_map(formula_constants).collect();
    dom = dom.union(&Domain::new(ctx_constants));
    let verdict = if a.answer_sets {
        let opts = SolveOptions { domain_override: Some(dom.clone()), max_branch: a.max_branch, ..SolveOptions::default() };
        equivalence::same_answer_sets(&x, &y, &opts)?
    } else {
        let opts = EquivOptions { jobs: a.jobs, max_branch: a.max_branch };
        equivalence::strong_equiv_bounded(&x, &y, &gamma, &dom, &opts)?
    };
    match a.format {
        Format::Json => io.line(serde_json::to_string(&verdict).expect("verdict serializes")),
        _ => match &verdict {
            EquivVerdict::EquivalentUpToBound { domain } => io.line(format!("equivalent up to bound {domain}")),
            EquivVerdict::Counterexample { interpretation, holds_in } => {
                let side = match holds_in {
                    equivalence::Side::Left => a.first.display().to_string(),
                    equivalence::Side::Right => a.second.display().to_string(),
                };
                io.line(format!("counterexample: a model of {side} only"));
                io.line(interpretation.to_string());
            }
        },
    }
    Ok(if verdict.is_equivalent() { 0 } else { 1 })
}

fn formula_constants(f: &Formula) -> BTreeSet<Constant> {
    let mut out = BTreeSet::new();
    f.walk(&mut |g| {
        let terms: Vec<&crate::ast::Term> = match g {
            Formula::Atom(a) => a.args.iter().collect(),
            Formula::PredVarAtom(_, ts) => ts.iter().collect(),
            Formula::Equal(s, t) => vec![s, t],
            _ => vec![],
        };
        for t in terms {
            if let crate::ast::Term::Constant(c) = t {
                out.insert(c.clone());
            }
        }
    });
    out
}

fn cmd_replace(a: &ReplaceArgs, io: &mut Io) -> Result<i32> {
    let host = load_program(&a.host, io)?;
    let old = load_program(&a.old, io)?;
    let new = load_program(&a.new, io)?;
    let r = equivalence::replace(&host, &old, &new)?;
    io.out.push_str(&print_program(&r));
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predlist_parsing() {
        let s = parse_predlist("in/2, vertex/1").unwrap();
        assert_eq!(s.len(), 2);
        assert!(parse_predlist("in").is_err());
    }

    #[test]
    fn domain_bound_forms() {
        assert_eq!(parse_domain_bound("2").unwrap(), Domain::from_names(&["c1", "c2"]));
        assert_eq!(parse_domain_bound("b,a").unwrap(), Domain::from_names(&["a", "b"]));
        assert!(parse_domain_bound("A").is_err());
    }

    #[test]
    fn usage_error_exits_2() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["masp", "solve"], &mut out, &mut err), 2);
        assert!(!err.is_empty());
    }
}
