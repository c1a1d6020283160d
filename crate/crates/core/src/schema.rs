//! Static checks over a schema: allowedness, hierarchy and the
//! base/derived partition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::model::{Atom, Database, Form, Literal, PredClass, Rule, RuleKind, SchemaNote, Sym, Term, Var, IC};
use crate::parser::SourceSpan;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// A variable with no positive body occurrence.
    NotAllowed(Vec<Var>),
    /// Predicates on a dependency cycle.
    RecursionCycle(Vec<Sym>),
    HeadNotDistinctVars,
    /// A stored fact about a predicate defined by rules.
    FactOnDerived(Sym),
    ArityMismatch { predicate: Sym, expected: usize, found: usize },
    /// The same predicate heads rules of different kinds.
    KindConflict(Sym),
    /// A condition predicate used in the body of a rule.
    ConditionInBody(Sym),
    /// A rule for `Ic` that is not an aggregation of an integrity predicate.
    ReservedIc,
    /// A schema rule mentions an event or new-state predicate.
    NonStateLiteral,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::NotAllowed(vars) => {
                let names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
                write!(f, "rule is not allowed: {} has no positive body occurrence", names.join(", "))
            }
            ViolationKind::RecursionCycle(preds) => {
                let names: Vec<&str> = preds.iter().map(|p| p.as_str()).collect();
                write!(f, "recursive definition through {}", names.join(" -> "))
            }
            ViolationKind::HeadNotDistinctVars => f.write_str("head arguments must be distinct variables"),
            ViolationKind::FactOnDerived(p) => write!(f, "fact stored for derived predicate {p}"),
            ViolationKind::ArityMismatch { predicate, expected, found } => {
                write!(f, "{predicate} used with arity {found}, expected {expected}")
            }
            ViolationKind::KindConflict(p) => write!(f, "{p} is defined by rules of different kinds"),
            ViolationKind::ConditionInBody(p) => write!(f, "condition {p} used in a rule body"),
            ViolationKind::ReservedIc => write!(f, "{IC} is reserved for aggregating integrity predicates"),
            ViolationKind::NonStateLiteral => f.write_str("schema rules may only use old-state literals"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Index into `Database::rules`, when the violation concerns one rule.
    pub rule: Option<usize>,
    pub span: Option<SourceSpan>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) => write!(f, "{s}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Informational rewrites applied while reading the schema.
    pub notes: Vec<SchemaNote>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn head_class(kind: RuleKind) -> Option<PredClass> {
    match kind {
        RuleKind::Deductive => Some(PredClass::Derived),
        RuleKind::Integrity => Some(PredClass::Integrity),
        RuleKind::Condition => Some(PredClass::Condition),
        RuleKind::IcAggregation => Some(PredClass::Aggregate),
        _ => None,
    }
}

/// Checks every schema invariant and lists all violations found.
pub fn validate_schema(db: &Database) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |rule: Option<usize>, kind: ViolationKind| {
        let span = rule.and_then(|i| db.rules[i].span);
        violations.push(Violation { rule, span, kind });
    };

    let mut arity: BTreeMap<Sym, usize> = BTreeMap::new();
    let mut check_arity = |push: &mut dyn FnMut(Option<usize>, ViolationKind), rule: Option<usize>, name: &Sym, n: usize| {
        match arity.get(name) {
            Some(&m) if m != n => {
                push(rule, ViolationKind::ArityMismatch { predicate: name.clone(), expected: m, found: n })
            }
            Some(_) => {}
            None => {
                arity.insert(name.clone(), n);
            }
        }
    };

    let mut class_of: BTreeMap<Sym, PredClass> = BTreeMap::new();
    for (i, r) in db.rules.iter().enumerate() {
        let Some(class) = head_class(r.kind) else {
            push(Some(i), ViolationKind::NonStateLiteral);
            continue;
        };
        match class_of.get(&r.head.name) {
            Some(&c) if c != class => {
                push(Some(i), ViolationKind::KindConflict(r.head.name.clone()));
            }
            Some(_) => {}
            None => {
                class_of.insert(r.head.name.clone(), class);
            }
        }
    }

    for (i, r) in db.rules.iter().enumerate() {
        check_arity(&mut push, Some(i), &r.head.name, r.head.arity());
        for l in &r.body {
            check_arity(&mut push, Some(i), &l.atom.name, l.atom.arity());
        }
        if r.head.form != Form::Old || r.body.iter().any(|l| l.atom.form != Form::Old) {
            push(Some(i), ViolationKind::NonStateLiteral);
        }
        let unsafe_vars = r.unsafe_vars();
        if !unsafe_vars.is_empty() {
            push(Some(i), ViolationKind::NotAllowed(unsafe_vars));
        }
        let mut seen = BTreeSet::new();
        let distinct = r.head.args.iter().all(|t| matches!(t, Term::Var(v) if seen.insert(v.clone())));
        if !distinct {
            push(Some(i), ViolationKind::HeadNotDistinctVars);
        }
        for l in &r.body {
            if class_of.get(&l.atom.name) == Some(&PredClass::Condition) {
                push(Some(i), ViolationKind::ConditionInBody(l.atom.name.clone()));
            }
        }
        let reserved_ok = if r.kind == RuleKind::IcAggregation {
            r.head.name.as_str() == IC
                && r.body.len() == 1
                && r.body[0].positive
                && class_of.get(&r.body[0].atom.name) == Some(&PredClass::Integrity)
        } else {
            r.head.name.as_str() != IC && r.body.iter().all(|l| l.atom.name.as_str() != IC)
        };
        if !reserved_ok {
            push(Some(i), ViolationKind::ReservedIc);
        }
    }

    for f in &db.facts {
        check_arity(&mut push, None, &f.name, f.args.len());
        if class_of.contains_key(&f.name) {
            push(None, ViolationKind::FactOnDerived(f.name.clone()));
        }
    }

    if let Err(cycle) = dependency_order(db) {
        push(None, ViolationKind::RecursionCycle(cycle.0));
    }

    ValidationReport { violations, notes: db.notes.clone() }
}

/// Adds `Ic <- Ici(x..)` for every integrity predicate lacking one.
pub fn ensure_ic_aggregation(db: &Database) -> Database {
    let mut out = db.clone();
    let mut heads: Vec<Atom> = Vec::new();
    for r in db.rules.iter().filter(|r| r.kind == RuleKind::Integrity) {
        if !heads.iter().any(|h| h.name == r.head.name) {
            heads.push(r.head.clone());
        }
    }
    for head in heads {
        let exists = out
            .rules
            .iter()
            .any(|r| r.kind == RuleKind::IcAggregation && r.body.first().map(|l| &l.atom.name) == Some(&head.name));
        if exists {
            continue;
        }
        let args = (0..head.arity()).map(|i| Term::var(&format!("x{}", i + 1))).collect();
        let body = Atom { name: head.name.clone(), form: Form::Old, args };
        out.rules.push(Rule::new(RuleKind::IcAggregation, Atom::new(IC, Form::Old, vec![]), vec![Literal::pos(body)]));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("recursive definition through {}", .0.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" -> "))]
pub struct CycleError(pub Vec<Sym>);

/// Predicates grouped by level: level 0 holds base predicates and every
/// other predicate sits strictly above all predicates its rules mention.
pub fn dependency_order(db: &Database) -> Result<Vec<Vec<Sym>>, CycleError> {
    let mut edges: BTreeMap<Sym, BTreeSet<Sym>> = BTreeMap::new();
    for f in &db.facts {
        edges.entry(f.name.clone()).or_default();
    }
    for r in &db.rules {
        let e = edges.entry(r.head.name.clone()).or_default();
        for l in &r.body {
            e.insert(l.atom.name.clone());
        }
        for l in &r.body {
            edges.entry(l.atom.name.clone()).or_default();
        }
    }
    levels(&edges).map_err(CycleError)
}

/// Longest-path layering of a dependency graph, or a cycle.
pub(crate) fn levels<K: Ord + Clone>(edges: &BTreeMap<K, BTreeSet<K>>) -> Result<Vec<Vec<K>>, Vec<K>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done(usize),
    }
    fn visit<K: Ord + Clone>(
        k: &K,
        edges: &BTreeMap<K, BTreeSet<K>>,
        marks: &mut BTreeMap<K, Mark>,
        stack: &mut Vec<K>,
    ) -> Result<usize, Vec<K>> {
        match marks.get(k) {
            Some(Mark::Done(l)) => return Ok(*l),
            Some(Mark::Active) => {
                let start = stack.iter().position(|s| s == k).unwrap_or(0);
                let mut cycle = stack[start..].to_vec();
                cycle.push(k.clone());
                return Err(cycle);
            }
            None => {}
        }
        marks.insert(k.clone(), Mark::Active);
        stack.push(k.clone());
        let mut level = 0;
        if let Some(deps) = edges.get(k) {
            for d in deps {
                level = level.max(visit(d, edges, marks, stack)? + 1);
            }
        }
        stack.pop();
        marks.insert(k.clone(), Mark::Done(level));
        Ok(level)
    }

    let mut marks = BTreeMap::new();
    let mut out: Vec<Vec<K>> = Vec::new();
    for k in edges.keys() {
        visit(k, edges, &mut marks, &mut Vec::new())?;
    }
    for (k, m) in marks {
        if let Mark::Done(l) = m {
            if out.len() <= l {
                out.resize_with(l + 1, Vec::new);
            }
            out[l].push(k);
        }
    }
    Ok(out)
}
