//! `unbreak` command-line tool.
//!
//! Exit codes: 0 when an answer was decided, 2 on input errors (including
//! usage errors), 3 when an oracle budget is exceeded.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use unbreak_core::applications::{
    default_schedule, mwcu_to_rbcu, pendant_solve_unbreakable, rbcu_solve_unbreakable, MwcuInstance, PendantInstance,
};
use unbreak_core::boundaried::{BoundariedStructure, Structure};
use unbreak_core::breakability::{BreakOutcome, Breaker};
use unbreak_core::connenum::{enum_connected_sets, ConnectedSetQuery};
use unbreak_core::finite_state::{
    compute_classes, property, DirectEvaluation, FiniteStateError, Property, RepresentativeTable, Understander,
};
use unbreak_core::graph::{Graph, VertexSet};
use unbreak_core::universal::{build_universal_set_seeded, verify_universal_set, UniversalFamily, DEFAULT_SEED};
use unbreak_oracle::{
    oracle_connected_sets, oracle_equivalence, oracle_mwcu, oracle_witnessing_separation, OracleBudget, OracleError,
};

const FORMAT_VERSION: &str = "unbreak-output v1";

#[derive(Parser)]
#[command(name = "unbreak", version, about = "Unbreakability toolkit: separations, universal sets, enumeration, finite-state solving")]
struct Cli {
    /// Seed for randomized constructions.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a witnessing separation.
    Breakcheck {
        file: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        c: usize,
    },
    /// Build or verify universal families.
    #[command(subcommand)]
    Uset(UsetCommand),
    /// List connected sets through a root with bounded neighbourhood.
    Enumconn {
        file: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Representative tables and recursive understanding.
    #[command(subcommand)]
    Fsm(FsmCommand),
    /// Multiway cut-uncut on an unbreakable graph.
    Mwcu {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        /// Unbreakability parameter; defaults to k+2.
        #[arg(long)]
        s: Option<usize>,
    },
    /// Pendant subgraph search on an unbreakable graph.
    Pendant {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        prop: String,
        /// Unbreakability parameter; defaults to k+t+2.
        #[arg(long)]
        s: Option<usize>,
    },
    /// Brute-force reference answers.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    root: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    q: usize,
}

#[derive(Subcommand)]
enum UsetCommand {
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Verify { file: PathBuf },
}

#[derive(Subcommand)]
enum FsmCommand {
    Table {
        #[arg(long)]
        prop: String,
        #[arg(long)]
        c: usize,
        #[arg(long)]
        ubound: usize,
        #[arg(long)]
        cbound: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Understand {
        file: PathBuf,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        s: Option<usize>,
    },
    Solve {
        file: PathBuf,
        #[arg(long)]
        prop: String,
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        s: Option<usize>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    Breakable {
        file: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        c: usize,
    },
    Mwcu {
        file: PathBuf,
        #[arg(long)]
        k: usize,
    },
    Connsets {
        file: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
    },
    Classes {
        #[arg(long)]
        prop: String,
        #[arg(long)]
        c: usize,
        #[arg(long)]
        ubound: usize,
        #[arg(long)]
        cbound: usize,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    fn input(e: impl Display) -> Self {
        CliError::Input(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
            OracleError::InvalidInput(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<FiniteStateError> for CliError {
    fn from(e: FiniteStateError) -> Self {
        match e {
            FiniteStateError::Budget(_) => CliError::Budget(e.to_string()),
            other => CliError::input(other),
        }
    }
}

/// Output of one command: a result word plus key/value records. The human
/// form prints `body` (falling back to the records); the structured form
/// prints the records under a version header.
struct Report {
    command: &'static str,
    result: String,
    records: Vec<(String, String)>,
    body: Option<String>,
}

impl Report {
    fn new(command: &'static str, result: impl Into<String>) -> Self {
        Report {
            command,
            result: result.into(),
            records: Vec::new(),
            body: None,
        }
    }

    fn field(mut self, key: &str, value: impl Display) -> Self {
        self.records.push((key.to_string(), value.to_string()));
        self
    }

    fn body(mut self, text: String) -> Self {
        self.body = Some(text);
        self
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Human => {
                let mut out = self.result.clone();
                out.push('\n');
                match &self.body {
                    Some(b) => out.push_str(b),
                    None => {
                        for (k, v) in &self.records {
                            out.push_str(&format!("{k}: {v}\n"));
                        }
                    }
                }
                out
            }
            Format::Structured => {
                let mut out = format!("{FORMAT_VERSION}\ncommand {}\nresult {}\n", self.command, self.result);
                for (k, v) in &self.records {
                    out.push_str(&format!("{k} {v}\n"));
                }
                out.push_str("end\n");
                out
            }
        }
    }
}

fn ids(set: &VertexSet) -> String {
    if set.is_empty() {
        return "-".to_string();
    }
    set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<Graph, CliError> {
    Graph::parse(&read(path)?).map_err(CliError::input)
}

fn read_table(path: &Path) -> Result<RepresentativeTable, CliError> {
    Ok(RepresentativeTable::parse(&read(path)?)?)
}

fn lookup(name: &str) -> Result<Property, CliError> {
    property::by_name(name).ok_or_else(|| {
        let known: Vec<&str> = property::SHIPPED.iter().map(|p| p.name()).collect();
        CliError::Input(format!("unknown property `{name}` (known: {})", known.join(", ")))
    })
}

fn budget() -> Result<OracleBudget, CliError> {
    Ok(OracleBudget::from_env()?)
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let breaker = Breaker::new(cli.seed);
    match &cli.command {
        Command::Breakcheck { file, s, c } => {
            let g = read_graph(file)?;
            match breaker.break_alg(&g, *s, *c).map_err(CliError::input)? {
                BreakOutcome::Witness(sep) => {
                    let r = Report::new("breakcheck", "WITNESS")
                        .field("x", ids(&sep.x_side))
                        .field("y", ids(&sep.y_side))
                        .field("separator", ids(&sep.separator()));
                    Ok(r)
                }
                BreakOutcome::Unbreakable { s, c } => {
                    let r = Report::new("breakcheck", format!("UNBREAKABLE {s} {c}"));
                    Ok(r.field("s", s).field("c", c))
                }
            }
        }
        Command::Uset(UsetCommand::Build { n, k, p, out }) => {
            let (f, info) = build_universal_set_seeded(*n, *k, *p, cli.seed).map_err(CliError::input)?;
            let text = f.to_text();
            let mut r = Report::new("uset-build", format!("FAMILY {}", f.len()))
                .field("n", n)
                .field("k", k)
                .field("p", p)
                .field("size", f.len())
                .field("method", format!("{:?}", info.method).to_lowercase())
                .field("verified", info.verified)
                .field("patched", info.patched);
            match out {
                Some(path) => {
                    write(path, &text)?;
                    r = r.field("out", path.display());
                }
                None => r = r.body(text),
            }
            Ok(r)
        }
        Command::Uset(UsetCommand::Verify { file }) => {
            let f = UniversalFamily::parse(&read(file)?).map_err(CliError::input)?;
            let r = match verify_universal_set(&f) {
                Ok(()) => Report::new("uset-verify", "VALID").field("size", f.len()),
                Err(v) => Report::new("uset-verify", "INVALID")
                    .field("subset", join(&v.subset))
                    .field("ones", if v.ones.is_empty() { "-".into() } else { join(&v.ones) }),
            };
            Ok(r)
        }
        Command::Enumconn { file, query } => {
            let g = read_graph(file)?;
            let q = ConnectedSetQuery::new(query.root, query.p, query.q);
            let mut sets = enum_connected_sets(&g, q).map_err(CliError::input)?;
            sets.sort();
            Ok(set_listing("enumconn", &sets))
        }
        Command::Fsm(FsmCommand::Table {
            prop,
            c,
            ubound,
            cbound,
            out,
        }) => {
            let table = compute_classes(lookup(prop)?, *c, *ubound, *cbound)?;
            let text = table.to_text();
            let mut r = Report::new("fsm-table", format!("TABLE {}", table.classes().len()))
                .field("property", prop)
                .field("c", c)
                .field("classes", table.classes().len())
                .field("contexts", table.context_count())
                .field("r", table.r())
                .field("default_s", table.default_s());
            match out {
                Some(path) => {
                    write(path, &text)?;
                    r = r.field("out", path.display());
                }
                None => r = r.body(text),
            }
            Ok(r)
        }
        Command::Fsm(FsmCommand::Understand { file, table, s }) => {
            let table = read_table(table)?;
            let a = BoundariedStructure::parse(&read(file)?).map_err(CliError::input)?;
            let solver = DirectEvaluation(table.property());
            let mut u = Understander::new(&table, &solver, *s, &breaker)?;
            let rep = u.understand(&a)?;
            let class = table.classes().iter().position(|e| e.rep == rep).expect("result is a table representative");
            let text = rep.to_text();
            let r = Report::new("fsm-understand", format!("CLASS {class}"))
                .field("class", class)
                .field("s", u.s())
                .field("recursive_steps", u.steps.len())
                .field("unbreakable_calls", u.unbreakable_calls);
            let human = format!("{}representative:\n{text}", render_records(&r.records));
            Ok(r.body(human))
        }
        Command::Fsm(FsmCommand::Solve { file, prop, table, s }) => {
            let prop = lookup(prop)?;
            let table = read_table(table)?;
            if table.property() != prop {
                return Err(CliError::Input(format!(
                    "table is for `{}`, not `{}`",
                    table.property().name(),
                    prop.name()
                )));
            }
            let s0 = Structure::parse(&read(file)?).map_err(CliError::input)?;
            let solver = DirectEvaluation(prop);
            let mut u = Understander::new(&table, &solver, *s, &breaker)?;
            let answer = u.solve(&s0)?;
            Ok(Report::new("fsm-solve", if answer { "TRUE" } else { "FALSE" })
                .field("property", prop.name())
                .field("s", u.s())
                .field("recursive_steps", u.steps.len())
                .field("unbreakable_calls", u.unbreakable_calls))
        }
        Command::Mwcu { file, k, s } => {
            let inst = MwcuInstance::parse(&read(file)?, *k).map_err(CliError::input)?;
            let red = mwcu_to_rbcu(&inst).instance;
            let s = s.unwrap_or_else(|| default_schedule(*k));
            let run = rbcu_solve_unbreakable(&red, s);
            let r = match run.solution {
                Some(sol) => {
                    debug_assert!(inst.is_solution(&sol));
                    Report::new("mwcu", "YES").field("solution", ids(&sol))
                }
                None => undecided_or("mwcu", &breaker, inst.graph(), s, *k)?,
            };
            Ok(r.field("s", s).field("k", k).field("calls", run.calls).field("max_depth", run.max_depth))
        }
        Command::Pendant { file, k, t, prop, s } => {
            let g = read_graph(file)?;
            let inst = PendantInstance::new(g.clone(), *k, *t, lookup(prop)?).map_err(CliError::input)?;
            let s = s.unwrap_or_else(|| default_schedule(k + t));
            let found = pendant_solve_unbreakable(&inst, s).map_err(CliError::input)?;
            let r = match found {
                Some(u) => Report::new("pendant", "YES").field("set", ids(&u)),
                None => undecided_or("pendant", &breaker, &g, s, k + t)?,
            };
            Ok(r.field("s", s).field("k", k).field("t", t).field("property", prop))
        }
        Command::Oracle(cmd) => run_oracle(cmd),
    }
}

/// Answer for a failed search: `NO` when the graph is certified unbreakable,
/// otherwise `UNKNOWN` because the solver's precondition may not hold.
fn undecided_or(command: &'static str, breaker: &Breaker, g: &Graph, s: usize, c: usize) -> Result<Report, CliError> {
    Ok(match breaker.break_alg(g, s, c).map_err(CliError::input)? {
        BreakOutcome::Unbreakable { .. } => Report::new(command, "NO"),
        BreakOutcome::Witness(sep) => Report::new(command, "UNKNOWN")
            .field("reason", "graph is not certified unbreakable")
            .field("separator", ids(&sep.separator())),
    })
}

fn run_oracle(cmd: &OracleCommand) -> Result<Report, CliError> {
    let b = budget()?;
    match cmd {
        OracleCommand::Breakable { file, s, c } => {
            let g = read_graph(file)?;
            Ok(match oracle_witnessing_separation(&g, *s, *c, &b)? {
                Some(sep) => Report::new("oracle-breakable", "BREAKABLE")
                    .field("x", ids(&sep.x_side))
                    .field("y", ids(&sep.y_side))
                    .field("separator", ids(&sep.separator())),
                None => Report::new("oracle-breakable", format!("UNBREAKABLE {s} {c}")).field("s", s).field("c", c),
            })
        }
        OracleCommand::Mwcu { file, k } => {
            let inst = MwcuInstance::parse(&read(file)?, *k).map_err(CliError::input)?;
            Ok(match oracle_mwcu(&inst, &b)? {
                Some(sol) => Report::new("oracle-mwcu", "YES").field("solution", ids(&sol)),
                None => Report::new("oracle-mwcu", "NO"),
            }
            .field("k", k))
        }
        OracleCommand::Connsets { file, query } => {
            let g = read_graph(file)?;
            let sets = oracle_connected_sets(&g, ConnectedSetQuery::new(query.root, query.p, query.q), &b)?;
            Ok(set_listing("oracle-connsets", &sets))
        }
        OracleCommand::Classes { prop, c, ubound, cbound } => {
            let part = oracle_equivalence(lookup(prop)?, *c, *ubound, *cbound, &b)?;
            let mut sizes = vec![0usize; part.class_count()];
            for &cls in part.class_of() {
                sizes[cls] += 1;
            }
            Ok(Report::new("oracle-classes", format!("CLASSES {}", part.class_count()))
                .field("property", prop)
                .field("structures", part.len())
                .field("contexts", part.context_count())
                .field("class_sizes", join(&sizes)))
        }
    }
}

fn set_listing(command: &'static str, sets: &[VertexSet]) -> Report {
    let body: String = sets.iter().map(|s| format!("{}\n", ids(s))).collect();
    let mut r = Report::new(command, format!("SETS {}", sets.len())).field("count", sets.len());
    for s in sets {
        r = r.field("set", ids(s));
    }
    r.body(body)
}

fn join<T: Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn render_records(records: &[(String, String)]) -> String {
    records.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
