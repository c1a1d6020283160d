//! Brute-force reference semantics.
//!
//! Models are computed by grounding every rule over the active domain and
//! evaluating predicates once all their dependencies are known. Abduction is
//! answered by trying every subset of a finite event universe. Nothing here
//! touches the event rules.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Database, EventFact, Form, GroundAtom, Literal, Polarity, Rule, Sym, Term, Var};

pub type Model = BTreeSet<GroundAtom>;

fn rule_constants(r: &Rule, out: &mut BTreeSet<Sym>) {
    for t in r.head.args.iter().chain(r.body.iter().flat_map(|l| l.atom.args.iter())) {
        if let Term::Const(c) = t {
            out.insert(c.clone());
        }
    }
}

/// Constants of `db` and `goal`, plus `fresh` synthetic ones.
pub fn oracle_domain(db: &Database, goal: &[Literal], fresh: usize) -> BTreeSet<Sym> {
    let mut out = BTreeSet::new();
    for f in &db.facts {
        out.extend(f.args.iter().cloned());
    }
    for r in &db.rules {
        rule_constants(r, &mut out);
    }
    for l in goal {
        for c in l.atom.args.iter().filter_map(Term::as_const) {
            out.insert(c.clone());
        }
    }
    for i in 1..=fresh {
        out.insert(Sym::new(&format!("_g{i}")));
    }
    out
}

fn assignments(vars: &[Var], domain: &[Sym]) -> Vec<BTreeMap<Var, Sym>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        let mut next = Vec::new();
        for a in &out {
            for c in domain {
                let mut b = a.clone();
                b.insert(v.clone(), c.clone());
                next.push(b);
            }
        }
        out = next;
    }
    out
}

fn ground(args: &[Term], a: &BTreeMap<Var, Sym>) -> Vec<Sym> {
    args.iter()
        .map(|t| match t {
            Term::Const(c) => c.clone(),
            Term::Var(v) => a[v].clone(),
        })
        .collect()
}

fn vars_of(r: &Rule) -> Vec<Var> {
    let mut out: Vec<Var> = Vec::new();
    for v in r.head.args.iter().chain(r.body.iter().flat_map(|l| l.atom.args.iter())).filter_map(Term::as_var) {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

/// Heads derivable from one rule given a complete model of its body predicates.
fn fire(r: &Rule, model: &Model, domain: &[Sym]) -> Vec<GroundAtom> {
    let mut out = Vec::new();
    for a in assignments(&vars_of(r), domain) {
        let ok = r.body.iter().all(|l| {
            let g = GroundAtom { name: l.atom.name.clone(), args: ground(&l.atom.args, &a) };
            model.contains(&g) == l.positive
        });
        if ok {
            out.push(GroundAtom { name: r.head.name.clone(), args: ground(&r.head.args, &a) });
        }
    }
    out
}

/// The unique model of a non-recursive database over `facts`.
pub fn oracle_model(db: &Database, facts: &Model) -> Model {
    let mut domain: BTreeSet<Sym> = facts.iter().flat_map(|f| f.args.iter().cloned()).collect();
    for r in &db.rules {
        rule_constants(r, &mut domain);
    }
    let domain: Vec<Sym> = domain.into_iter().collect();
    let mut pending: BTreeSet<Sym> = db.rules.iter().map(|r| r.head.name.clone()).collect();
    let mut model = facts.clone();
    while !pending.is_empty() {
        let ready: Vec<Sym> = pending
            .iter()
            .filter(|p| {
                db.rules
                    .iter()
                    .filter(|r| &r.head.name == *p)
                    .all(|r| r.body.iter().all(|l| !pending.contains(&l.atom.name)))
            })
            .cloned()
            .collect();
        assert!(!ready.is_empty(), "recursive database given to the oracle");
        let mut derived = Vec::new();
        for p in &ready {
            for r in db.rules.iter().filter(|r| &r.head.name == p) {
                derived.extend(fire(r, &model, &domain));
            }
        }
        model.extend(derived);
        for p in ready {
            pending.remove(&p);
        }
    }
    model
}

/// `(EDB ∖ deletions) ∪ insertions`
pub fn oracle_apply(facts: &Model, t: &BTreeSet<EventFact>) -> Model {
    let mut out: Model = facts
        .iter()
        .filter(|f| !t.contains(&EventFact { polarity: Polarity::Delete, atom: (*f).clone() }))
        .cloned()
        .collect();
    for e in t {
        if e.polarity == Polarity::Insert {
            out.insert(e.atom.clone());
        }
    }
    out
}

/// Old and new models of a transition.
pub struct TwoStates {
    pub old: Model,
    pub new: Model,
}

impl TwoStates {
    pub fn of(db: &Database, t: &BTreeSet<EventFact>) -> Self {
        TwoStates { old: oracle_model(db, &db.facts), new: oracle_model(db, &oracle_apply(&db.facts, t)) }
    }

    /// Every change between the two models, base predicates included.
    pub fn diff(&self) -> BTreeSet<EventFact> {
        let ins = self.new.difference(&self.old).map(|a| EventFact { polarity: Polarity::Insert, atom: a.clone() });
        let del = self.old.difference(&self.new).map(|a| EventFact { polarity: Polarity::Delete, atom: a.clone() });
        ins.chain(del).collect()
    }
}

pub fn oracle_diff(db: &Database, t: &BTreeSet<EventFact>) -> BTreeSet<EventFact> {
    TwoStates::of(db, t).diff()
}

fn literal_holds(db: &Database, states: &TwoStates, l: &Literal, args: Vec<Sym>) -> bool {
    let g = GroundAtom { name: l.atom.name.clone(), args };
    let (o, n) = (states.old.contains(&g), states.new.contains(&g));
    let v = match l.atom.form {
        Form::Old => o,
        Form::New => n,
        Form::Ins => n && !o,
        Form::Del => o && !n,
        Form::NewPart(i) => {
            let rules: Vec<&Rule> = db.rules.iter().filter(|r| r.head.name == l.atom.name).collect();
            let domain: Vec<Sym> = {
                let mut d: BTreeSet<Sym> = states.new.iter().flat_map(|f| f.args.iter().cloned()).collect();
                d.extend(g.args.iter().cloned());
                d.into_iter().collect()
            };
            rules.get(i as usize - 1).is_some_and(|r| fire(r, &states.new, &domain).contains(&g))
        }
    };
    v == l.positive
}

/// Whether some assignment of the goal's variables over `domain` makes
/// every conjunct true across the transition.
pub fn oracle_holds(db: &Database, states: &TwoStates, goal: &[Literal], domain: &BTreeSet<Sym>) -> bool {
    let mut vars: Vec<Var> = Vec::new();
    for v in goal.iter().flat_map(|l| l.atom.vars()) {
        if !vars.contains(v) {
            vars.push(v.clone());
        }
    }
    let domain: Vec<Sym> = domain.iter().cloned().collect();
    assignments(&vars, &domain)
        .iter()
        .any(|a| goal.iter().all(|l| literal_holds(db, states, l, ground(&l.atom.args, a))))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("event universe has {0} events, more than the limit of {MAX_UNIVERSE}")]
    UniverseTooLarge(usize),
}

pub const MAX_UNIVERSE: usize = 20;

/// Every legal base event over a finite domain.
#[derive(Clone, Debug)]
pub struct EventUniverse {
    pub events: Vec<EventFact>,
}

impl EventUniverse {
    /// `abducibles` lists `(predicate, arity, polarity)` triples. Insertions
    /// of stored facts and deletions of absent ones are left out.
    pub fn new(
        db: &Database,
        abducibles: &[(Sym, usize, Polarity)],
        domain: &BTreeSet<Sym>,
    ) -> Result<Self, OracleError> {
        let domain: Vec<Sym> = domain.iter().cloned().collect();
        let mut events = Vec::new();
        for (name, arity, polarity) in abducibles {
            let vars: Vec<Var> = (0..*arity).map(|i| Var::new(&format!("v{i}"))).collect();
            for a in assignments(&vars, &domain) {
                let args: Vec<Sym> = vars.iter().map(|v| a[v].clone()).collect();
                let atom = GroundAtom { name: name.clone(), args };
                let present = db.facts.contains(&atom);
                if present == (*polarity == Polarity::Delete) {
                    events.push(EventFact { polarity: *polarity, atom });
                }
            }
        }
        events.sort();
        if events.len() > MAX_UNIVERSE {
            return Err(OracleError::UniverseTooLarge(events.len()));
        }
        Ok(EventUniverse { events })
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Minimal subsets of the universe satisfying `goal`, smallest first.
pub fn oracle_abduce(
    db: &Database,
    goal: &[Literal],
    universe: &EventUniverse,
    domain: &BTreeSet<Sym>,
) -> Vec<BTreeSet<EventFact>> {
    let n = universe.len();
    let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut found: Vec<u32> = Vec::new();
    let old = oracle_model(db, &db.facts);
    for m in masks {
        if found.iter().any(|f| f & m == *f) {
            continue;
        }
        let t: BTreeSet<EventFact> =
            (0..n).filter(|i| m & (1 << i) != 0).map(|i| universe.events[i].clone()).collect();
        let states = TwoStates { old: old.clone(), new: oracle_model(db, &oracle_apply(&db.facts, &t)) };
        if oracle_holds(db, &states, goal, domain) {
            found.push(m);
        }
    }
    found
        .into_iter()
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(|i| universe.events[i].clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_database, parse_goal};

    const EX2: &str = "fact Sign(John).\nfact Fail_ex(John).\nrule Cont(x) <- Sign(x), not Fail_ex(x).";

    #[test]
    fn diff_of_example() {
        let db = parse_database(EX2).unwrap();
        let t = [EventFact::delete("Fail_ex", &["John"])].into_iter().collect();
        let d: Vec<String> = oracle_diff(&db, &t).iter().map(|e| e.to_string()).collect();
        assert_eq!(d, vec!["+Cont(John)", "-Fail_ex(John)"]);
        assert!(oracle_diff(&db, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn abduce_example() {
        let db = parse_database(EX2).unwrap();
        let goal = parse_goal("+Cont(John)").unwrap();
        let domain = oracle_domain(&db, &goal, 0);
        let abd = vec![
            (Sym::new("Sign"), 1, Polarity::Insert),
            (Sym::new("Sign"), 1, Polarity::Delete),
            (Sym::new("Fail_ex"), 1, Polarity::Insert),
            (Sym::new("Fail_ex"), 1, Polarity::Delete),
        ];
        let u = EventUniverse::new(&db, &abd, &domain).unwrap();
        assert_eq!(u.len(), 2);
        let got = oracle_abduce(&db, &goal, &u, &domain);
        assert_eq!(got, vec![[EventFact::delete("Fail_ex", &["John"])].into_iter().collect()]);
    }

    #[test]
    fn already_true_has_no_explanation() {
        let db = parse_database("fact Q(A).\nrule P <- Q(x).").unwrap();
        let goal = parse_goal("+P").unwrap();
        let domain = oracle_domain(&db, &goal, 1);
        let u = EventUniverse::new(&db, &[(Sym::new("Q"), 1, Polarity::Insert)], &domain).unwrap();
        assert!(oracle_abduce(&db, &goal, &u, &domain).is_empty());
    }

    #[test]
    fn universe_guard() {
        let db = parse_database("rule P(x, y) <- Q(x, y).").unwrap();
        let domain = oracle_domain(&db, &[], 5);
        let r = EventUniverse::new(&db, &[(Sym::new("Q"), 2, Polarity::Insert)], &domain);
        assert_eq!(r.unwrap_err(), OracleError::UniverseTooLarge(25));
    }
}
