mod output;

use std::io::{BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use deltalog::{
    compile, parse_database, parse_goal, parse_transaction, validate_schema, Atom, Database, Literal, Mode, PredClass,
    ProblemResult, SearchBudget, Toolkit, ToolkitOptions, Transaction, Variant, Verdict, Witnesses,
};

use output::{combine, document, record_text, Record};

#[derive(Parser)]
#[command(name = "deltalog", version, about = "Event rules, deduction and abduction for deductive database schemas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Event rule set to generate.
    #[arg(long, global = true, default_value = "simplified")]
    variant: Variant,
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    #[arg(long, global = true)]
    max_solutions: Option<usize>,
    #[arg(long, global = true)]
    fresh_constants: Option<usize>,
    /// Write the abduction derivation trace to this file.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Comma-separated base predicates that may be abduced (default: all).
    #[arg(long, global = true, value_delimiter = ',')]
    abducibles: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the augmented database.
    Compile {
        schema: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::All)]
        emit: Emit,
    },
    /// Check a property of the schema over the empty EDB.
    Validate {
        schema: PathBuf,
        #[arg(long, value_enum)]
        problem: ValidateProblem,
        /// Predicate to check; without it every candidate is checked.
        #[arg(long)]
        target: Option<String>,
    },
    /// Process an update against the stored database.
    Update {
        schema: PathBuf,
        #[arg(long, value_enum)]
        problem: UpdateProblem,
        #[arg(long, allow_hyphen_values = true)]
        goal: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        txn: Option<String>,
        /// Comma-separated materialized views.
        #[arg(long, value_delimiter = ',')]
        views: Vec<String>,
        /// Events that must not be induced, in goal syntax.
        #[arg(long, allow_hyphen_values = true)]
        forbid: Option<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Abduce)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = Select::All)]
        select: Select,
    },
    /// Correct answers to a goal under a transaction.
    Deduce {
        schema: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        goal: String,
        #[arg(long, allow_hyphen_values = true)]
        txn: Option<String>,
    },
    /// Minimal transactions that make a goal true.
    Abduce {
        schema: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        goal: String,
        #[arg(long, value_enum, default_value_t = Select::All)]
        select: Select,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    All,
    Generated,
}

#[derive(Clone, Copy, ValueEnum)]
enum ValidateProblem {
    Sat,
    AbsRedundancy,
    Liveliness,
    RelRedundancy,
    Condition,
}

#[derive(Clone, Copy, ValueEnum)]
enum UpdateProblem {
    IcCheck,
    IcMaintain,
    ViewUpdate,
    Refresh,
    Prevent,
    Monitor,
    Enforce,
    PreventCondition,
    Restore,
    Repair,
    MaintainInconsistency,
    Solve,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Deduce,
    Abduce,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Select {
    All,
    First,
    Interactive,
}

/// Exit status for a usage, parse or precondition error.
const EXIT_ERROR: u8 = 2;

fn exit_for(v: Verdict) -> u8 {
    match v {
        Verdict::Holds => 0,
        Verdict::Fails => 1,
        Verdict::UnknownBudget => 3,
    }
}

fn budget_from_env() -> Result<SearchBudget> {
    let mut b = SearchBudget::default();
    let Ok(text) = std::env::var("DELTALOG_BUDGET") else { return Ok(b) };
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [d, s, f] = parts.as_slice() else {
        bail!("DELTALOG_BUDGET must be \"depth,solutions,fresh\", got {text:?}");
    };
    let num = |x: &str| x.parse::<usize>().with_context(|| format!("bad number {x:?} in DELTALOG_BUDGET"));
    b.max_depth = num(d)?;
    b.max_solutions = num(s)?;
    b.fresh_constants = num(f)?;
    Ok(b)
}

fn options(c: &Common) -> Result<ToolkitOptions> {
    let mut budget = budget_from_env()?;
    if let Some(d) = c.max_depth {
        budget.max_depth = d;
    }
    if let Some(s) = c.max_solutions {
        budget.max_solutions = s;
    }
    if let Some(f) = c.fresh_constants {
        budget.fresh_constants = f;
    }
    if budget.max_depth == 0 || budget.max_solutions == 0 {
        bail!("budget limits must be positive");
    }
    Ok(ToolkitOptions {
        variant: c.variant,
        budget,
        abducibles: c.abducibles.as_ref().map(|a| a.iter().cloned().collect()),
        trace: c.trace.is_some(),
    })
}

/// Reads, parses and validates a schema file.
fn load(path: &Path) -> Result<Database> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let db = parse_database(&text).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    let report = validate_schema(&db);
    if !report.is_ok() {
        let lines: Vec<String> = report.violations.iter().map(|v| format!("{}:{v}", path.display())).collect();
        bail!("invalid schema\n{}", lines.join("\n"));
    }
    Ok(db)
}

fn txn(text: Option<&str>) -> Result<Transaction> {
    parse_transaction(text.unwrap_or("")).map_err(|e| anyhow!("transaction: {e}"))
}

fn goal(text: Option<&str>, what: &str) -> Result<Vec<Literal>> {
    let text = text.ok_or_else(|| anyhow!("--{what} is required for this problem"))?;
    parse_goal(text).map_err(|e| anyhow!("{what}: {e}"))
}

fn forbidden(text: Option<&str>) -> Result<Vec<Atom>> {
    let lits = goal(text, "forbid")?;
    lits.into_iter()
        .map(|l| {
            if l.positive && l.atom.form.is_event() {
                Ok(l.atom)
            } else {
                Err(anyhow!("--forbid lists events such as +P(a) or -P(a), got {l}"))
            }
        })
        .collect()
}

fn validate(k: &Toolkit, problem: ValidateProblem, target: Option<&str>) -> Result<Vec<Record>> {
    let class = match problem {
        ValidateProblem::Sat => {
            return Ok(vec![Record { target: None, result: k.check_satisfiability()? }]);
        }
        ValidateProblem::AbsRedundancy | ValidateProblem::RelRedundancy => PredClass::Integrity,
        ValidateProblem::Liveliness => PredClass::Derived,
        ValidateProblem::Condition => PredClass::Condition,
    };
    let targets: Vec<String> = match target {
        Some(t) => vec![t.to_string()],
        None => k
            .database()
            .signature()
            .iter()
            .filter(|(_, info)| info.class == class)
            .map(|(n, _)| n.to_string())
            .collect(),
    };
    targets
        .into_iter()
        .map(|t| {
            let result = match problem {
                ValidateProblem::AbsRedundancy => k.check_absolute_redundancy(&t),
                ValidateProblem::RelRedundancy => k.check_relative_redundancy(&t),
                ValidateProblem::Liveliness => k.check_view_liveliness(&t),
                ValidateProblem::Condition => k.validate_condition(&t),
                ValidateProblem::Sat => unreachable!(),
            }?;
            Ok(Record { target: Some(t), result })
        })
        .collect()
}

struct UpdateArgs<'a> {
    problem: UpdateProblem,
    goal: Option<&'a str>,
    txn: Option<&'a str>,
    views: &'a [String],
    forbid: Option<&'a str>,
    mode: ModeArg,
}

fn update(k: &Toolkit, a: UpdateArgs<'_>) -> Result<ProblemResult> {
    let t = txn(a.txn)?;
    Ok(match a.problem {
        UpdateProblem::IcCheck => k.ic_check(&t)?,
        UpdateProblem::IcMaintain => k.ic_maintain(&t)?,
        UpdateProblem::ViewUpdate => k.view_update(&goal(a.goal, "goal")?)?,
        UpdateProblem::Refresh => {
            if a.views.is_empty() {
                bail!("--views is required for refresh");
            }
            let views: Vec<&str> = a.views.iter().map(String::as_str).collect();
            k.refresh_views(&t, &views)?
        }
        UpdateProblem::Prevent => k.prevent_side_effects(&t, &forbidden(a.forbid)?)?,
        UpdateProblem::Monitor => k.monitor_conditions(&t)?,
        UpdateProblem::Enforce => k.enforce_condition(&goal(a.goal, "goal")?)?,
        UpdateProblem::PreventCondition => k.prevent_condition_activation(&t, &forbidden(a.forbid)?)?,
        UpdateProblem::Restore => k.check_restoration(&t)?,
        UpdateProblem::Repair => k.repair_database()?,
        UpdateProblem::MaintainInconsistency => k.maintain_inconsistency(&t)?,
        UpdateProblem::Solve => {
            let mode = match a.mode {
                ModeArg::Deduce => Mode::Deduce,
                ModeArg::Abduce => Mode::Abduce,
            };
            let g = match a.goal {
                Some(_) => goal(a.goal, "goal")?,
                None => Vec::new(),
            };
            k.solve(mode, &g, &t)?
        }
    })
}

/// Applies `--select` to a list of witness transactions.
fn select(mut r: ProblemResult, how: Select) -> Result<ProblemResult> {
    let Witnesses::Explanations(es) = &mut r.witnesses else { return Ok(r) };
    let how = if how == Select::Interactive && !std::io::stdin().is_terminal() { Select::All } else { how };
    match how {
        Select::All => {}
        Select::First => es.truncate(1),
        Select::Interactive if es.len() > 1 => {
            let mut err = std::io::stderr();
            for (i, e) in es.iter().enumerate() {
                writeln!(err, "{:>3}. {}", i + 1, output::transaction_text(e))?;
            }
            write!(err, "select a transaction [1-{}]: ", es.len())?;
            err.flush()?;
            let mut line = String::new();
            std::io::stdin().lock().read_line(&mut line)?;
            let i: usize = line.trim().parse().context("expected a number")?;
            if i == 0 || i > es.len() {
                bail!("selection {i} out of range");
            }
            let chosen = es.swap_remove(i - 1);
            *es = vec![chosen];
        }
        Select::Interactive => {}
    }
    Ok(r)
}

fn run(cli: Cli) -> Result<u8> {
    let opts = options(&cli.common)?;
    let (command, records) = match &cli.command {
        Command::Compile { schema, emit } => {
            let db = load(schema)?;
            let aug = compile(&db, opts.variant);
            print!("{}", aug.render(matches!(emit, Emit::Generated)));
            return Ok(0);
        }
        Command::Validate { schema, problem, target } => {
            let k = Toolkit::new(&load(schema)?, opts);
            ("validate", validate(&k, *problem, target.as_deref())?)
        }
        Command::Update { schema, problem, goal, txn, views, forbid, mode, select: how } => {
            let k = Toolkit::new(&load(schema)?, opts);
            let args = UpdateArgs {
                problem: *problem,
                goal: goal.as_deref(),
                txn: txn.as_deref(),
                views,
                forbid: forbid.as_deref(),
                mode: *mode,
            };
            let r = select(update(&k, args)?, *how)?;
            ("update", vec![Record { target: None, result: r }])
        }
        Command::Deduce { schema, goal: g, txn: t } => {
            let k = Toolkit::new(&load(schema)?, opts);
            let r = k.solve(Mode::Deduce, &goal(Some(g), "goal")?, &txn(t.as_deref())?)?;
            ("deduce", vec![Record { target: None, result: r }])
        }
        Command::Abduce { schema, goal: g, select: how } => {
            let k = Toolkit::new(&load(schema)?, opts);
            let r = k.solve(Mode::Abduce, &goal(Some(g), "goal")?, &Transaction::empty())?;
            ("abduce", vec![Record { target: None, result: select(r, *how)? }])
        }
    };
    if let Some(path) = &cli.common.trace {
        let mut text = String::new();
        for r in &records {
            for line in &r.result.trace {
                text.push_str(line);
                text.push('\n');
            }
        }
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let verdict = combine(records.iter().map(|r| r.result.verdict));
    if cli.common.json {
        let doc = document(command, verdict, &records);
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        for r in &records {
            print!("{}", record_text(r));
        }
    }
    Ok(exit_for(verdict))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
