//! Schema validation and update processing, each reduced to one deduction
//! or abduction call with a fixed goal.

use std::collections::BTreeSet;
use std::fmt;

use crate::abduce::{abduce_with, AbduceError, AbduceOptions, AbductiveFramework, Explanation, SearchBudget, SearchStatus};
use crate::compile::{augment, open_atom, AugmentedDatabase, Variant};
use crate::deduce::{deduce, induced_events, DeduceError, Deducer};
use crate::model::{Atom, Database, EventFact, Form, Literal, PredClass, RuleKind, Sym, Transaction, IC};
use crate::parser::{render_goal, Goal};
use crate::schema::ensure_ic_aggregation;
use crate::subst::Substitution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProblemKind {
    Satisfiability,
    AbsoluteRedundancy,
    Liveliness,
    RelativeRedundancy,
    ConditionValidation,
    IcCheck,
    IcMaintain,
    ViewUpdate,
    RefreshViews,
    PreventSideEffects,
    MonitorConditions,
    EnforceCondition,
    PreventConditionActivation,
    CheckRestoration,
    RepairDatabase,
    MaintainInconsistency,
    Solve,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Satisfiability => "sat",
            ProblemKind::AbsoluteRedundancy => "abs-redundancy",
            ProblemKind::Liveliness => "liveliness",
            ProblemKind::RelativeRedundancy => "rel-redundancy",
            ProblemKind::ConditionValidation => "condition",
            ProblemKind::IcCheck => "ic-check",
            ProblemKind::IcMaintain => "ic-maintain",
            ProblemKind::ViewUpdate => "view-update",
            ProblemKind::RefreshViews => "refresh",
            ProblemKind::PreventSideEffects => "prevent",
            ProblemKind::MonitorConditions => "monitor",
            ProblemKind::EnforceCondition => "enforce",
            ProblemKind::PreventConditionActivation => "prevent-condition",
            ProblemKind::CheckRestoration => "restore",
            ProblemKind::RepairDatabase => "repair",
            ProblemKind::MaintainInconsistency => "maintain-inconsistency",
            ProblemKind::Solve => "solve",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Holds,
    Fails,
    /// The search was cut short before non-existence could be shown.
    UnknownBudget,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::UnknownBudget => "unknown-budget",
        }
    }

    fn negate(self) -> Verdict {
        match self {
            Verdict::Holds => Verdict::Fails,
            Verdict::Fails => Verdict::Holds,
            Verdict::UnknownBudget => Verdict::UnknownBudget,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witnesses {
    None,
    Answers(Vec<Substitution>),
    Explanations(Vec<Explanation>),
    Events(Vec<EventFact>),
}

#[derive(Clone, Debug)]
pub struct ProblemResult {
    pub problem: ProblemKind,
    pub verdict: Verdict,
    pub witnesses: Witnesses,
    /// Status of the last abduction run, if any.
    pub status: Option<SearchStatus>,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProblemError {
    #[error(transparent)]
    Deduce(#[from] DeduceError),
    #[error(transparent)]
    Abduce(#[from] AbduceError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("`{name}` is not a {expected} predicate")]
    WrongClass { name: String, expected: &'static str },
}

#[derive(Clone, Debug, Default)]
pub struct ToolkitOptions {
    pub variant: Variant,
    pub budget: SearchBudget,
    /// Restricts the abducible base predicates; `None` means all of them.
    pub abducibles: Option<BTreeSet<String>>,
    pub trace: bool,
}

/// Entry point for every problem over one database.
#[derive(Clone, Debug)]
pub struct Toolkit {
    db: Database,
    opts: ToolkitOptions,
}

impl Toolkit {
    pub fn new(db: &Database, opts: ToolkitOptions) -> Self {
        Toolkit { db: ensure_ic_aggregation(db), opts }
    }

    pub fn database(&self) -> &Database {
        &self.db
    }

    fn validation_budget(&self) -> SearchBudget {
        let b = self.opts.budget;
        SearchBudget { fresh_constants: b.fresh_constants.max(1), ..b }
    }

    fn aug_of(&self, db: &Database) -> AugmentedDatabase {
        augment(db, self.opts.variant)
    }

    fn framework(&self, aug: AugmentedDatabase, t: &Transaction) -> AbductiveFramework {
        let all = AbductiveFramework::new(aug);
        let Some(names) = &self.opts.abducibles else { return all };
        let mut fw = all.clone().with_abducible_predicates(names.iter().map(String::as_str));
        fw.abducibles.extend(t.events().iter().map(|e| (e.atom.name.clone(), e.polarity)));
        fw.abducibles.retain(|p| all.abducibles.contains(p));
        fw
    }

    fn expect_class(&self, name: &str, classes: &[PredClass], expected: &'static str) -> Result<(Sym, usize), ProblemError> {
        let sym = Sym::new(name);
        let sig = self.db.signature();
        match sig.get(&sym) {
            Some(info) if classes.contains(&info.class) => Ok((sym, info.arity)),
            _ => Err(ProblemError::WrongClass { name: name.to_string(), expected }),
        }
    }

    /// Runs abduction and maps existence of an explanation to `Holds`.
    fn exists(
        &self,
        problem: ProblemKind,
        aug: AugmentedDatabase,
        t: &Transaction,
        goal: &[Literal],
        budget: SearchBudget,
    ) -> Result<ProblemResult, ProblemError> {
        let fw = self.framework(aug, t);
        let a = abduce_with(&fw, goal, AbduceOptions { budget, trace: self.opts.trace })?;
        let verdict = if !a.explanations.is_empty() {
            Verdict::Holds
        } else if a.status == SearchStatus::Complete {
            Verdict::Fails
        } else {
            Verdict::UnknownBudget
        };
        Ok(ProblemResult {
            problem,
            verdict,
            witnesses: Witnesses::Explanations(a.explanations),
            status: Some(a.status),
            trace: a.trace,
        })
    }

    fn deduced(problem: ProblemKind, holds: bool, witnesses: Witnesses) -> ProblemResult {
        ProblemResult { problem, verdict: if holds { Verdict::Holds } else { Verdict::Fails }, witnesses, status: None, trace: Vec::new() }
    }

    fn ic_holds(aug: &AugmentedDatabase) -> Result<bool, ProblemError> {
        Ok(Deducer::new(aug, &Transaction::empty())?.holds(&ic_atom(Form::Old))?)
    }

    fn empty_edb(&self) -> AugmentedDatabase {
        self.aug_of(&self.db.schema_only())
    }

    // Schema validation over the empty EDB.

    /// Whether some EDB satisfies every integrity constraint.
    pub fn check_satisfiability(&self) -> Result<ProblemResult, ProblemError> {
        let aug = self.empty_edb();
        if !Self::ic_holds(&aug)? {
            return Ok(Self::deduced(ProblemKind::Satisfiability, true, Witnesses::None));
        }
        let goal = vec![Literal::pos(ic_atom(Form::Del))];
        self.exists(ProblemKind::Satisfiability, aug, &Transaction::empty(), &goal, self.validation_budget())
    }

    /// Whether no EDB can ever violate `ic`.
    pub fn check_absolute_redundancy(&self, ic: &str) -> Result<ProblemResult, ProblemError> {
        let (name, arity) = self.expect_class(ic, &[PredClass::Integrity], "integrity")?;
        let aug = self.empty_edb();
        if !Deducer::new(&aug, &Transaction::empty())?.answers(&open_atom(&name, Form::Old, arity))?.is_empty() {
            return Ok(Self::deduced(ProblemKind::AbsoluteRedundancy, false, Witnesses::None));
        }
        let goal = vec![Literal::pos(open_atom(&name, Form::Ins, arity))];
        let r = self.exists(ProblemKind::AbsoluteRedundancy, aug, &Transaction::empty(), &goal, self.validation_budget())?;
        Ok(ProblemResult { verdict: r.verdict.negate(), ..r })
    }

    /// Whether some consistent EDB makes at least one fact of `view` true.
    pub fn check_view_liveliness(&self, view: &str) -> Result<ProblemResult, ProblemError> {
        let (name, arity) = self.expect_class(view, &[PredClass::Derived], "derived")?;
        let aug = self.empty_edb();
        let goal = consistent_with(&aug, open_atom(&name, Form::Old, arity))?;
        if goal.is_empty() {
            return Ok(Self::deduced(ProblemKind::Liveliness, true, Witnesses::None));
        }
        self.exists(ProblemKind::Liveliness, aug, &Transaction::empty(), &goal, self.validation_budget())
    }

    /// Whether `ic` is implied by the remaining integrity constraints.
    pub fn check_relative_redundancy(&self, ic: &str) -> Result<ProblemResult, ProblemError> {
        let (name, arity) = self.expect_class(ic, &[PredClass::Integrity], "integrity")?;
        let mut db = self.db.schema_only();
        db.rules.retain(|r| !(r.kind == RuleKind::IcAggregation && r.body.iter().any(|l| l.atom.name == name)));
        let aug = self.aug_of(&db);
        let goal = consistent_with(&aug, open_atom(&name, Form::Old, arity))?;
        if goal.is_empty() {
            return Ok(Self::deduced(ProblemKind::RelativeRedundancy, false, Witnesses::None));
        }
        let r = self.exists(ProblemKind::RelativeRedundancy, aug, &Transaction::empty(), &goal, self.validation_budget())?;
        Ok(ProblemResult { verdict: r.verdict.negate(), ..r })
    }

    /// Whether the contents of `cond` can change at all.
    pub fn validate_condition(&self, cond: &str) -> Result<ProblemResult, ProblemError> {
        let (name, arity) = self.expect_class(cond, &[PredClass::Condition], "condition")?;
        let aug = self.empty_edb();
        let budget = self.validation_budget();
        let ins = vec![Literal::pos(open_atom(&name, Form::Ins, arity))];
        let r = self.exists(ProblemKind::ConditionValidation, aug.clone(), &Transaction::empty(), &ins, budget)?;
        if r.verdict == Verdict::Holds {
            return Ok(r);
        }
        let del = vec![Literal::pos(open_atom(&name, Form::Del, arity))];
        let d = self.exists(ProblemKind::ConditionValidation, aug, &Transaction::empty(), &del, budget)?;
        if d.verdict == Verdict::Fails && r.verdict == Verdict::UnknownBudget {
            return Ok(ProblemResult { trace: [r.trace, d.trace].concat(), ..r });
        }
        Ok(ProblemResult { trace: [r.trace, d.trace].concat(), ..d })
    }

    // Update processing over the stored EDB.

    fn full(&self) -> AugmentedDatabase {
        self.aug_of(&self.db)
    }

    fn normalize(&self, t: &Transaction) -> Transaction {
        t.effective(&self.db.facts)
    }

    fn require_ic(&self, aug: &AugmentedDatabase, holds: bool) -> Result<(), ProblemError> {
        if Self::ic_holds(aug)? != holds {
            let state = if holds { "inconsistent" } else { "consistent" };
            return Err(ProblemError::Precondition(format!("the database must be {state}")));
        }
        Ok(())
    }

    fn induced_on(&self, aug: &AugmentedDatabase, t: &Transaction, pick: impl Fn(&Sym) -> bool) -> Result<Vec<EventFact>, ProblemError> {
        Ok(induced_events(aug, t)?.into_iter().filter(|e| pick(&e.atom.name)).collect())
    }

    /// Whether `t` keeps a consistent database consistent. Witnesses are the
    /// integrity facts `t` would insert.
    pub fn ic_check(&self, t: &Transaction) -> Result<ProblemResult, ProblemError> {
        let aug = self.full();
        self.require_ic(&aug, false)?;
        let t = self.normalize(t);
        let violated = !deduce(&aug, &t, &[Literal::pos(ic_atom(Form::Ins))])?.is_empty();
        let sig = aug.signature().clone();
        let w = self.induced_on(&aug, &t, |n| sig.class(n) == PredClass::Integrity)?;
        let w = w.into_iter().filter(|e| e.polarity == crate::model::Polarity::Insert).collect();
        Ok(Self::deduced(ProblemKind::IcCheck, !violated, Witnesses::Events(w)))
    }

    /// Extensions of `t` that leave the database consistent.
    pub fn ic_maintain(&self, t: &Transaction) -> Result<ProblemResult, ProblemError> {
        let aug = self.full();
        self.require_ic(&aug, false)?;
        let t = self.normalize(t);
        let mut goal = transaction_goal(&t);
        goal.push(Literal::neg(ic_atom(Form::Ins)));
        self.exists(ProblemKind::IcMaintain, aug, &t, &goal, self.opts.budget)
    }

    /// Translations of a request on derived predicates into base events.
    pub fn view_update(&self, request: &[Literal]) -> Result<ProblemResult, ProblemError> {
        let aug = self.full();
        for l in request {
            if l.atom.form.is_event() && aug.signature().is_base(&l.atom.name) {
                return Err(ProblemError::WrongClass { name: l.atom.name.to_string(), expected: "derived" });
            }
        }
        self.exists(ProblemKind::ViewUpdate, aug, &Transaction::empty(), request, self.opts.budget)
    }

    /// Changes `t` induces on the given materialized views.
    pub fn refresh_views(&self, t: &Transaction, views: &[&str]) -> Result<ProblemResult, ProblemError> {
        let mut names = BTreeSet::new();
        for v in views {
            names.insert(self.expect_class(v, &[PredClass::Derived], "derived")?.0);
        }
        let aug = self.full();
        let w = self.induced_on(&aug, &self.normalize(t), |n| names.contains(n))?;
        Ok(Self::deduced(ProblemKind::RefreshViews, true, Witnesses::Events(w)))
    }

    /// Extensions of `t` that induce none of the `forbidden` events.
    pub fn prevent_side_effects(&self, t: &Transaction, forbidden: &[Atom]) -> Result<ProblemResult, ProblemError> {
        self.prevent(ProblemKind::PreventSideEffects, t, forbidden)
    }

    /// Changes `t` induces on condition predicates.
    pub fn monitor_conditions(&self, t: &Transaction) -> Result<ProblemResult, ProblemError> {
        let aug = self.full();
        let sig = aug.signature().clone();
        let w = self.induced_on(&aug, &self.normalize(t), |n| sig.class(n) == PredClass::Condition)?;
        Ok(Self::deduced(ProblemKind::MonitorConditions, true, Witnesses::Events(w)))
    }

    /// Transactions that induce the given condition events.
    pub fn enforce_condition(&self, events: &[Literal]) -> Result<ProblemResult, ProblemError> {
        for l in events {
            self.expect_class(l.atom.name.as_str(), &[PredClass::Condition], "condition")?;
        }
        self.exists(ProblemKind::EnforceCondition, self.full(), &Transaction::empty(), events, self.opts.budget)
    }

    /// Extensions of `t` that induce none of the given condition events.
    pub fn prevent_condition_activation(&self, t: &Transaction, events: &[Atom]) -> Result<ProblemResult, ProblemError> {
        for a in events {
            self.expect_class(a.name.as_str(), &[PredClass::Condition], "condition")?;
        }
        self.prevent(ProblemKind::PreventConditionActivation, t, events)
    }

    fn prevent(&self, problem: ProblemKind, t: &Transaction, forbidden: &[Atom]) -> Result<ProblemResult, ProblemError> {
        let t = self.normalize(t);
        let mut goal = transaction_goal(&t);
        goal.extend(forbidden.iter().map(|a| Literal::neg(a.clone())));
        self.exists(problem, self.full(), &t, &goal, self.opts.budget)
    }

    /// Whether `t` makes an inconsistent database consistent.
    pub fn check_restoration(&self, t: &Transaction) -> Result<ProblemResult, ProblemError> {
        let aug = self.full();
        self.require_ic(&aug, true)?;
        let restored = !deduce(&aug, &self.normalize(t), &[Literal::pos(ic_atom(Form::Del))])?.is_empty();
        Ok(Self::deduced(ProblemKind::CheckRestoration, restored, Witnesses::None))
    }

    /// Transactions that make an inconsistent database consistent.
    pub fn repair_database(&self) -> Result<ProblemResult, ProblemError> {
        let aug = self.full();
        self.require_ic(&aug, true)?;
        let goal = vec![Literal::pos(ic_atom(Form::Del))];
        self.exists(ProblemKind::RepairDatabase, aug, &Transaction::empty(), &goal, self.opts.budget)
    }

    /// Extensions of `t` under which the database stays inconsistent.
    pub fn maintain_inconsistency(&self, t: &Transaction) -> Result<ProblemResult, ProblemError> {
        let aug = self.full();
        self.require_ic(&aug, true)?;
        let t = self.normalize(t);
        let mut goal = transaction_goal(&t);
        goal.push(Literal::neg(ic_atom(Form::Del)));
        self.exists(ProblemKind::MaintainInconsistency, aug, &t, &goal, self.opts.budget)
    }

    /// A combined goal, answered by deduction under `t` or by abduction of
    /// `t ∧ goal`.
    pub fn solve(&self, mode: Mode, goal: &[Literal], t: &Transaction) -> Result<ProblemResult, ProblemError> {
        let aug = self.full();
        let t = self.normalize(t);
        match mode {
            Mode::Deduce => {
                let answers: Vec<Substitution> = deduce(&aug, &t, goal)?.into_iter().collect();
                Ok(Self::deduced(ProblemKind::Solve, !answers.is_empty(), Witnesses::Answers(answers)))
            }
            Mode::Abduce => {
                let mut full_goal = transaction_goal(&t);
                full_goal.extend(goal.iter().cloned());
                self.exists(ProblemKind::Solve, aug, &t, &full_goal, self.opts.budget)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Deduce,
    Abduce,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "deduce" => Ok(Mode::Deduce),
            "abduce" => Ok(Mode::Abduce),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

fn ic_atom(form: Form) -> Atom {
    Atom::new(IC, form, Vec::new())
}

fn transaction_goal(t: &Transaction) -> Goal {
    t.events().iter().map(|e| Literal::pos(e.to_atom())).collect()
}

/// Goal asking that `atom` become true while `Ic` ends up false, written with
/// event literals where the old state allows it. Empty when both already hold.
fn consistent_with(aug: &AugmentedDatabase, atom: Atom) -> Result<Goal, ProblemError> {
    let mut d = Deducer::new(aug, &Transaction::empty())?;
    let present = !d.answers(&atom)?.is_empty();
    let inconsistent = d.holds(&ic_atom(Form::Old))?;
    Ok(match (present, inconsistent) {
        (true, false) => Vec::new(),
        (false, false) => vec![Literal::pos(atom.with_form(Form::Ins)), Literal::neg(ic_atom(Form::Ins))],
        (false, true) => vec![Literal::pos(atom.with_form(Form::Ins)), Literal::pos(ic_atom(Form::Del))],
        (true, true) => vec![Literal::pos(atom.with_form(Form::New)), Literal::pos(ic_atom(Form::Del))],
    })
}

impl fmt::Display for ProblemResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.problem, self.verdict.name())?;
        match &self.witnesses {
            Witnesses::None => {}
            Witnesses::Answers(a) => {
                for s in a {
                    writeln!(f, "  {s}")?;
                }
            }
            Witnesses::Explanations(es) => {
                for e in es {
                    writeln!(f, "  {}", e.t)?;
                }
            }
            Witnesses::Events(es) => {
                for e in es {
                    writeln!(f, "  {e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Renders a goal for diagnostics.
pub fn describe_goal(goal: &[Literal]) -> String {
    render_goal(goal)
}
