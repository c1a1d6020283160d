//! Terms, literals, rules and databases.
//!
//! A predicate symbol is shared by several *forms*: the old-state predicate
//! `P`, its new-state counterpart `Pⁿ` (optionally indexed per defining rule),
//! and the insertion and deletion event predicates `ιP` and `δP`. Event forms
//! are transition-level and carry no state annotation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::parser::SourceSpan;

/// Interned-ish identifier. Cloning is a reference-count bump.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: &str) -> Self {
        Sym(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Name of the distinguished inconsistency predicate.
pub const IC: &str = "Ic";

/// A logic variable. Variables read from source text have generation 0;
/// renaming a clause apart bumps the generation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Sym,
    pub generation: u32,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var { name: Sym::new(name), generation: 0 }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.generation == 0 {
            write!(f, "{}", self.name)
        } else if self.name.as_str() == "_" {
            write!(f, "v{}", self.generation)
        } else {
            write!(f, "{}{}", self.name, self.generation)
        }
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(Sym),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(Sym::new(name))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&Sym> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Which version of a predicate a literal refers to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Form {
    /// The predicate evaluated in the old (current) state.
    Old,
    /// The predicate evaluated in the new state.
    New,
    /// New-state version of the i-th (1-based) rule defining a predicate.
    NewPart(u32),
    /// Insertion event `ιP`.
    Ins,
    /// Deletion event `δP`.
    Del,
}

impl Form {
    pub fn is_event(self) -> bool {
        matches!(self, Form::Ins | Form::Del)
    }

    pub fn polarity(self) -> Option<Polarity> {
        match self {
            Form::Ins => Some(Polarity::Insert),
            Form::Del => Some(Polarity::Delete),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Polarity {
    Insert,
    Delete,
}

impl Polarity {
    pub fn form(self) -> Form {
        match self {
            Polarity::Insert => Form::Ins,
            Polarity::Delete => Form::Del,
        }
    }

    pub fn opposite(self) -> Polarity {
        match self {
            Polarity::Insert => Polarity::Delete,
            Polarity::Delete => Polarity::Insert,
        }
    }
}

/// Role of a predicate symbol within a database.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum PredClass {
    Base,
    Derived,
    Integrity,
    /// The distinguished 0-ary `Ic`.
    Aggregate,
    Condition,
}

/// A predicate symbol in a particular form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PredicateRef {
    pub name: Sym,
    pub form: Form,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub name: Sym,
    pub form: Form,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(name: &str, form: Form, args: Vec<Term>) -> Self {
        Atom { name: Sym::new(name), form, args }
    }

    pub fn key(&self) -> PredicateRef {
        PredicateRef { name: self.name.clone(), form: self.form }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn with_form(&self, form: Form) -> Atom {
        Atom { name: self.name.clone(), form, args: self.args.clone() }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn to_ground(&self) -> Option<GroundAtom> {
        let args = self.args.iter().map(|t| t.as_const().cloned()).collect::<Option<Vec<_>>>()?;
        Some(GroundAtom { name: self.name.clone(), args })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.form {
            Form::Old => write!(f, "{}", self.name)?,
            Form::New => write!(f, "new_{}", self.name)?,
            Form::NewPart(i) => write!(f, "new{i}_{}", self.name)?,
            Form::Ins => write!(f, "ins_{}", self.name)?,
            Form::Del => write!(f, "del_{}", self.name)?,
        }
        write_args(f, &self.args)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn write_args<T: fmt::Display>(f: &mut fmt::Formatter<'_>, args: &[T]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { positive: true, atom }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { positive: false, atom }
    }

    pub fn negated(&self) -> Literal {
        Literal { positive: !self.positive, atom: self.atom.clone() }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum RuleKind {
    Deductive,
    Integrity,
    Condition,
    /// `Ic ← Icᵢ(…)`
    IcAggregation,
    Transition,
    InsertionEvent,
    DeletionEvent,
}

impl RuleKind {
    /// Kinds that belong to the user-visible IDB (as opposed to generated rules).
    pub fn is_schema(self) -> bool {
        matches!(
            self,
            RuleKind::Deductive | RuleKind::Integrity | RuleKind::Condition | RuleKind::IcAggregation
        )
    }
}

/// A clause `head ← body`. Equality and ordering ignore the source span.
#[derive(Clone)]
pub struct Rule {
    pub kind: RuleKind,
    pub head: Atom,
    pub body: Vec<Literal>,
    pub span: Option<SourceSpan>,
}

impl Rule {
    pub fn new(kind: RuleKind, head: Atom, body: Vec<Literal>) -> Self {
        Rule { kind, head, body, span: None }
    }

    fn cmp_key(&self) -> (&RuleKind, &Atom, &Vec<Literal>) {
        (&self.kind, &self.head, &self.body)
    }

    /// Every variable of the rule, in order of first occurrence (head first).
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = Vec::new();
        let all = self.head.vars().chain(self.body.iter().flat_map(|l| l.atom.vars()));
        for v in all {
            if !seen.contains(v) {
                seen.push(v.clone());
            }
        }
        seen
    }

    /// Variables of the rule that have no occurrence in a positive body literal.
    pub fn unsafe_vars(&self) -> Vec<Var> {
        let positive: BTreeSet<&Var> =
            self.body.iter().filter(|l| l.positive).flat_map(|l| l.atom.vars()).collect();
        self.vars().into_iter().filter(|v| !positive.contains(v)).collect()
    }

    /// Renames every variable to `_<k>` in order of first occurrence.
    pub fn canonical(&self) -> Rule {
        let vars = self.vars();
        let map: BTreeMap<Var, Var> = vars
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, Var { name: Sym::new("_"), generation: i as u32 + 1 }))
            .collect();
        let rn = |a: &Atom| Atom {
            name: a.name.clone(),
            form: a.form,
            args: a
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => Term::Var(map[v].clone()),
                    c => c.clone(),
                })
                .collect(),
        };
        Rule {
            kind: self.kind,
            head: rn(&self.head),
            body: self.body.iter().map(|l| Literal { positive: l.positive, atom: rn(&l.atom) }).collect(),
            span: self.span,
        }
    }
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_key() == other.cmp_key()
    }
}

impl Eq for Rule {}

impl PartialOrd for Rule {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rule {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cmp_key().cmp(&other.cmp_key())
    }
}

impl std::hash::Hash for Rule {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.cmp_key().hash(state)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- ", self.head)?;
        for (i, l) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub name: Sym,
    pub args: Vec<Sym>,
}

impl GroundAtom {
    pub fn new(name: &str, args: &[&str]) -> Self {
        GroundAtom { name: Sym::new(name), args: args.iter().map(|a| Sym::new(a)).collect() }
    }

    pub fn to_atom(&self, form: Form) -> Atom {
        Atom {
            name: self.name.clone(),
            form,
            args: self.args.iter().cloned().map(Term::Const).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        write_args(f, &self.args)
    }
}

impl fmt::Debug for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A ground insertion or deletion fact.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventFact {
    pub polarity: Polarity,
    pub atom: GroundAtom,
}

impl EventFact {
    pub fn insert(name: &str, args: &[&str]) -> Self {
        EventFact { polarity: Polarity::Insert, atom: GroundAtom::new(name, args) }
    }

    pub fn delete(name: &str, args: &[&str]) -> Self {
        EventFact { polarity: Polarity::Delete, atom: GroundAtom::new(name, args) }
    }

    pub fn to_atom(&self) -> Atom {
        self.atom.to_atom(self.polarity.form())
    }
}

impl fmt::Display for EventFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.polarity {
            Polarity::Insert => '+',
            Polarity::Delete => '-',
        };
        write!(f, "{sign}{}", self.atom)
    }
}

impl fmt::Debug for EventFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransactionError {
    #[error("transaction both inserts and deletes {0}")]
    Contradictory(GroundAtom),
}

/// A set of ground base events applied atomically.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transaction {
    events: BTreeSet<EventFact>,
}

impl Transaction {
    pub fn empty() -> Self {
        Transaction::default()
    }

    pub fn new(events: impl IntoIterator<Item = EventFact>) -> Result<Self, TransactionError> {
        let events: BTreeSet<EventFact> = events.into_iter().collect();
        for e in &events {
            if e.polarity == Polarity::Insert
                && events.contains(&EventFact { polarity: Polarity::Delete, atom: e.atom.clone() })
            {
                return Err(TransactionError::Contradictory(e.atom.clone()));
            }
        }
        Ok(Transaction { events })
    }

    pub fn events(&self) -> &BTreeSet<EventFact> {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn contains(&self, e: &EventFact) -> bool {
        self.events.contains(e)
    }

    pub fn is_subset(&self, other: &Transaction) -> bool {
        self.events.is_subset(&other.events)
    }

    /// Drops events that would not change `facts`: insertions of present
    /// facts and deletions of absent ones.
    pub fn effective(&self, facts: &BTreeSet<GroundAtom>) -> Transaction {
        let events = self
            .events
            .iter()
            .filter(|e| match e.polarity {
                Polarity::Insert => !facts.contains(&e.atom),
                Polarity::Delete => facts.contains(&e.atom),
            })
            .cloned()
            .collect();
        Transaction { events }
    }

    /// `(EDB ∖ deletions) ∪ insertions`
    pub fn apply(&self, facts: &BTreeSet<GroundAtom>) -> BTreeSet<GroundAtom> {
        let mut out = facts.clone();
        for e in &self.events {
            match e.polarity {
                Polarity::Insert => {
                    out.insert(e.atom.clone());
                }
                Polarity::Delete => {
                    out.remove(&e.atom);
                }
            }
        }
        out
    }
}

impl fmt::Display for Transaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Transaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Informational record of a rewrite applied while reading a schema.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaNote {
    pub span: Option<SourceSpan>,
    pub message: String,
}

/// `D = (EDB, IDB)`.
#[derive(Clone, Default, Debug)]
pub struct Database {
    pub facts: BTreeSet<GroundAtom>,
    pub rules: Vec<Rule>,
    pub notes: Vec<SchemaNote>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PredInfo {
    pub arity: usize,
    pub class: PredClass,
}

/// Arity and class of every predicate a database mentions.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    preds: BTreeMap<Sym, PredInfo>,
}

impl Signature {
    pub fn of_rules<'a>(rules: impl IntoIterator<Item = &'a Rule>, facts: &BTreeSet<GroundAtom>) -> Self {
        let rules: Vec<&Rule> = rules.into_iter().collect();
        let mut preds = BTreeMap::new();
        for r in &rules {
            let class = match r.kind {
                RuleKind::Deductive => PredClass::Derived,
                RuleKind::Integrity => PredClass::Integrity,
                RuleKind::Condition => PredClass::Condition,
                RuleKind::IcAggregation => PredClass::Aggregate,
                _ => continue,
            };
            preds.entry(r.head.name.clone()).or_insert(PredInfo { arity: r.head.arity(), class });
        }
        for r in &rules {
            for l in &r.body {
                preds
                    .entry(l.atom.name.clone())
                    .or_insert(PredInfo { arity: l.atom.arity(), class: PredClass::Base });
            }
        }
        for f in facts {
            preds.entry(f.name.clone()).or_insert(PredInfo { arity: f.args.len(), class: PredClass::Base });
        }
        Signature { preds }
    }

    pub fn get(&self, name: &Sym) -> Option<PredInfo> {
        self.preds.get(name).copied()
    }

    pub fn class(&self, name: &Sym) -> PredClass {
        self.get(name).map(|p| p.class).unwrap_or(PredClass::Base)
    }

    pub fn is_base(&self, name: &Sym) -> bool {
        self.class(name) == PredClass::Base
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sym, &PredInfo)> {
        self.preds.iter()
    }

    pub fn base_predicates(&self) -> impl Iterator<Item = (&Sym, &PredInfo)> {
        self.preds.iter().filter(|(_, p)| p.class == PredClass::Base)
    }

    pub fn derived_predicates(&self) -> impl Iterator<Item = (&Sym, &PredInfo)> {
        self.preds.iter().filter(|(_, p)| p.class != PredClass::Base)
    }

    /// Registers a predicate mentioned only by a goal.
    pub fn add_base(&mut self, name: &Sym, arity: usize) {
        self.preds.entry(name.clone()).or_insert(PredInfo { arity, class: PredClass::Base });
    }
}

impl Database {
    pub fn new() -> Self {
        Database::default()
    }

    pub fn signature(&self) -> Signature {
        Signature::of_rules(&self.rules, &self.facts)
    }

    pub fn rules_for<'a>(&'a self, name: &'a Sym) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.iter().filter(move |r| &r.head.name == name)
    }

    pub fn with_facts(&self, facts: BTreeSet<GroundAtom>) -> Database {
        Database { facts, rules: self.rules.clone(), notes: self.notes.clone() }
    }

    /// The same schema over the empty EDB.
    pub fn schema_only(&self) -> Database {
        self.with_facts(BTreeSet::new())
    }

    /// Removes every rule whose head is `name`.
    pub fn without_predicate(&self, name: &str) -> Database {
        let mut db = self.clone();
        db.rules.retain(|r| r.head.name.as_str() != name);
        db.rules.retain(|r| !(r.kind == RuleKind::IcAggregation && r.body.iter().any(|l| l.atom.name.as_str() == name)));
        db
    }

    /// Constants mentioned by facts and rules.
    pub fn active_domain(&self) -> BTreeSet<Sym> {
        let mut out: BTreeSet<Sym> = self.facts.iter().flat_map(|f| f.args.iter().cloned()).collect();
        for r in &self.rules {
            for t in r.head.args.iter().chain(r.body.iter().flat_map(|l| l.atom.args.iter())) {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        out
    }
}

/// Ground atoms of the predicates a stratum ordering mentions.
pub type FactSet = BTreeSet<GroundAtom>;
