//! Top-down evaluation over `EDB ∪ IDB* ∪ T`.
//!
//! Calls are tabled by predicate, form and the constants of the call, which
//! is enough for termination on hierarchical programs.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::compile::AugmentedDatabase;
use crate::model::{Atom, Database, EventFact, Form, GroundAtom, Literal, Polarity, PredClass, Sym, Transaction};
use crate::schema::dependency_order;
use crate::subst::{goal_vars, Substitution};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeduceError {
    #[error("floundering: no literal of `{0}` can be selected safely")]
    Floundering(String),
    #[error("transaction event {0} is not about a base predicate")]
    NonBaseEvent(EventFact),
    #[error("rule `{0}` produced a non-ground answer")]
    NonGroundHead(String),
}

pub type Tuples = Rc<Vec<Vec<Sym>>>;

/// Anything that can enumerate the ground instances of an atom.
pub(crate) trait Source {
    fn lookup(&mut self, atom: &Atom) -> Result<Tuples, DeduceError>;
}

/// Picks the next literal: ground ones first, then the leftmost positive,
/// then a negative literal sharing no variable with the rest of the body.
pub(crate) fn select(body: &[Literal]) -> Option<usize> {
    body.iter()
        .position(|l| l.atom.is_ground())
        .or_else(|| body.iter().position(|l| l.positive))
        .or_else(|| (0..body.len()).find(|&i| is_local(body, i)))
}

/// Whether no variable of `body[i]` occurs in another literal.
pub(crate) fn is_local(body: &[Literal], i: usize) -> bool {
    body[i].atom.vars().all(|v| body.iter().enumerate().all(|(j, l)| j == i || l.atom.vars().all(|w| w != v)))
}

/// All extensions of `subst` satisfying `body`, in evaluation order.
pub(crate) fn solve(
    src: &mut dyn Source,
    body: &[Literal],
    subst: Substitution,
    out: &mut Vec<Substitution>,
) -> Result<(), DeduceError> {
    if body.is_empty() {
        out.push(subst);
        return Ok(());
    }
    let applied = subst.apply_goal(body);
    let Some(i) = select(&applied) else {
        let text: Vec<String> = applied.iter().map(|l| l.to_string()).collect();
        return Err(DeduceError::Floundering(text.join(", ")));
    };
    let lit = &applied[i];
    let rest: Vec<Literal> = body.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l.clone()).collect();
    let tuples = src.lookup(&lit.atom)?;
    if lit.positive {
        for t in tuples.iter() {
            let mut s = subst.clone();
            if s.match_ground(&lit.atom.args, t) {
                solve(src, &rest, s, out)?;
            }
        }
    } else {
        if !tuples.iter().any(|t| Substitution::new().match_ground(&lit.atom.args, t)) {
            solve(src, &rest, subst, out)?;
        }
    }
    Ok(())
}

fn group(facts: impl IntoIterator<Item = GroundAtom>) -> BTreeMap<Sym, Vec<Vec<Sym>>> {
    let mut out: BTreeMap<Sym, Vec<Vec<Sym>>> = BTreeMap::new();
    for f in facts {
        out.entry(f.name).or_default().push(f.args);
    }
    out
}

type CallKey = (Sym, Form, Vec<Option<Sym>>);

/// Memoizing evaluator for one transaction.
pub struct Deducer<'a> {
    aug: &'a AugmentedDatabase,
    old: BTreeMap<Sym, Tuples>,
    new: BTreeMap<Sym, Tuples>,
    ins: BTreeMap<Sym, Tuples>,
    del: BTreeMap<Sym, Tuples>,
    memo: BTreeMap<CallKey, Tuples>,
    empty: Tuples,
}

impl<'a> Deducer<'a> {
    /// Events of `t` that would not change the EDB are ignored.
    pub fn new(aug: &'a AugmentedDatabase, t: &Transaction) -> Result<Self, DeduceError> {
        let sig = aug.signature();
        for e in t.events() {
            if !sig.is_base(&e.atom.name) {
                return Err(DeduceError::NonBaseEvent(e.clone()));
            }
        }
        let facts = &aug.base.facts;
        let eff = t.effective(facts);
        let pick = |p: Polarity| eff.events().iter().filter(move |e| e.polarity == p).map(|e| e.atom.clone());
        let rc = |m: BTreeMap<Sym, Vec<Vec<Sym>>>| m.into_iter().map(|(k, v)| (k, Rc::new(v))).collect();
        Ok(Deducer {
            aug,
            old: rc(group(facts.iter().cloned())),
            new: rc(group(eff.apply(facts))),
            ins: rc(group(pick(Polarity::Insert))),
            del: rc(group(pick(Polarity::Delete))),
            memo: BTreeMap::new(),
            empty: Rc::new(Vec::new()),
        })
    }

    fn base_table(&self, atom: &Atom) -> Tuples {
        let table = match atom.form {
            Form::Old => &self.old,
            Form::New => &self.new,
            Form::Ins => &self.ins,
            Form::Del => &self.del,
            Form::NewPart(_) => return self.empty.clone(),
        };
        table.get(&atom.name).cloned().unwrap_or_else(|| self.empty.clone())
    }

    /// Every ground tuple of `atom`'s predicate matching its constants.
    pub fn answers(&mut self, atom: &Atom) -> Result<Tuples, DeduceError> {
        self.lookup(atom)
    }

    pub fn holds(&mut self, atom: &Atom) -> Result<bool, DeduceError> {
        let ground: Vec<Sym> = atom.args.iter().filter_map(|t| t.as_const().cloned()).collect();
        Ok(self.lookup(atom)?.contains(&ground))
    }

    /// Substitutions for the goal's variables, in no particular order.
    pub fn query(&mut self, goal: &[Literal]) -> Result<Vec<Substitution>, DeduceError> {
        let mut out = Vec::new();
        solve(self, goal, Substitution::new(), &mut out)?;
        Ok(out)
    }
}

impl Source for Deducer<'_> {
    fn lookup(&mut self, atom: &Atom) -> Result<Tuples, DeduceError> {
        if self.aug.signature().class(&atom.name) == PredClass::Base {
            return Ok(self.base_table(atom));
        }
        let pattern: Vec<Option<Sym>> = atom.args.iter().map(|t| t.as_const().cloned()).collect();
        let key = (atom.name.clone(), atom.form, pattern);
        if let Some(t) = self.memo.get(&key) {
            return Ok(t.clone());
        }
        let aug = self.aug;
        let mut found: BTreeSet<Vec<Sym>> = BTreeSet::new();
        for clause in aug.clauses(&atom.name, atom.form) {
            let mut s = Substitution::new();
            let lined_up = clause
                .head
                .args
                .iter()
                .zip(&key.2)
                .all(|(h, p)| p.as_ref().is_none_or(|c| s.unify_terms(h, &crate::model::Term::Const(c.clone()))));
            if !lined_up {
                continue;
            }
            let mut out = Vec::new();
            solve(self, &clause.body, s, &mut out)?;
            for s in out {
                let head = s.apply_atom(&clause.head);
                let Some(g) = head.to_ground() else {
                    return Err(DeduceError::NonGroundHead(clause.to_string()));
                };
                found.insert(g.args);
            }
        }
        let tuples: Tuples = Rc::new(found.into_iter().collect());
        self.memo.insert(key, tuples.clone());
        Ok(tuples)
    }
}

/// Correct answers, restricted to the goal's variables.
pub type AnswerSet = BTreeSet<Substitution>;

/// Every answer `θ` with `EDB ∪ IDB* ∪ T ⊨ Gθ`.
pub fn deduce(aug: &AugmentedDatabase, t: &Transaction, goal: &[Literal]) -> Result<AnswerSet, DeduceError> {
    let vars = goal_vars(goal);
    let mut d = Deducer::new(aug, t)?;
    Ok(d.query(goal)?.into_iter().map(|s| s.restrict(&vars)).collect())
}

/// Ground `ιP` / `δP` facts induced on every non-base predicate.
pub fn induced_events(aug: &AugmentedDatabase, t: &Transaction) -> Result<BTreeSet<EventFact>, DeduceError> {
    let mut d = Deducer::new(aug, t)?;
    let mut out = BTreeSet::new();
    let preds: Vec<(Sym, usize)> =
        aug.signature().derived_predicates().map(|(n, info)| (n.clone(), info.arity)).collect();
    for (name, arity) in preds {
        for polarity in [Polarity::Insert, Polarity::Delete] {
            let atom = crate::compile::open_atom(&name, polarity.form(), arity);
            for tuple in d.answers(&atom)?.iter() {
                out.insert(EventFact { polarity, atom: GroundAtom { name: name.clone(), args: tuple.clone() } });
            }
        }
    }
    Ok(out)
}

struct FactTable<'a> {
    facts: &'a BTreeMap<Sym, Tuples>,
    empty: Tuples,
}

impl Source for FactTable<'_> {
    fn lookup(&mut self, atom: &Atom) -> Result<Tuples, DeduceError> {
        Ok(self.facts.get(&atom.name).cloned().unwrap_or_else(|| self.empty.clone()))
    }
}

/// The perfect model of a hierarchical database, computed level by level.
pub fn materialize(db: &Database) -> Result<BTreeSet<GroundAtom>, DeduceError> {
    let order = dependency_order(db).map_err(|e| DeduceError::Floundering(e.to_string()))?;
    let mut table: BTreeMap<Sym, Tuples> =
        group(db.facts.iter().cloned()).into_iter().map(|(k, v)| (k, Rc::new(v))).collect();
    for level in order.iter().skip(1) {
        for pred in level {
            let mut found: BTreeSet<Vec<Sym>> = BTreeSet::new();
            for rule in db.rules_for(pred) {
                let mut src = FactTable { facts: &table, empty: Rc::new(Vec::new()) };
                let mut out = Vec::new();
                solve(&mut src, &rule.body, Substitution::new(), &mut out)?;
                for s in out {
                    let Some(g) = s.apply_atom(&rule.head).to_ground() else {
                        return Err(DeduceError::NonGroundHead(rule.to_string()));
                    };
                    found.insert(g.args);
                }
            }
            if !found.is_empty() {
                table.insert(pred.clone(), Rc::new(found.into_iter().collect()));
            }
        }
    }
    Ok(table
        .into_iter()
        .flat_map(|(name, tuples)| {
            tuples.iter().map(|args| GroundAtom { name: name.clone(), args: args.clone() }).collect::<Vec<_>>()
        })
        .collect())
}
