//! Abduction over event rules by constructive and consistency derivations.
//!
//! A constructive derivation looks for a transaction `T` under which a goal
//! succeeds; a consistency derivation makes a set of goals fail finitely.
//! Goals that failed only because some base event is absent from `T` are
//! kept in a condition set `C` and re-checked whenever `T` grows.
//!
//! The search is run with a bound on `|T|` that grows from zero, so the
//! explanations returned at each bound are minimal.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use crate::compile::{open_atom, AugmentedDatabase};
use crate::deduce::{deduce, is_local, DeduceError, Deducer};
use crate::model::{Atom, EventFact, Form, GroundAtom, Literal, Polarity, PredClass, Rule, RuleKind, Sym, Term, Transaction, Var};
use crate::parser::{render_goal, Goal};
use crate::subst::{goal_vars, rename_rule, Substitution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Maximum nesting of subsidiary derivations, and maximum transaction size.
    pub max_depth: usize,
    pub max_solutions: usize,
    /// Synthetic constants `_g1`, `_g2`, … available for grounding events.
    pub fresh_constants: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_depth: 64, max_solutions: 32, fresh_constants: 2 }
    }
}

/// Name of the `i`-th synthetic constant (1-based).
pub fn fresh_constant(i: usize) -> Sym {
    Sym::new(&format!("_g{i}"))
}

/// Augmented database together with the events that may be abduced.
#[derive(Clone, Debug)]
pub struct AbductiveFramework {
    pub aug: AugmentedDatabase,
    pub abducibles: BTreeSet<(Sym, Polarity)>,
}

impl AbductiveFramework {
    /// Every base predicate is abducible in both polarities.
    pub fn new(aug: AugmentedDatabase) -> Self {
        let abducibles = aug
            .signature()
            .base_predicates()
            .flat_map(|(n, _)| [(n.clone(), Polarity::Insert), (n.clone(), Polarity::Delete)])
            .collect();
        AbductiveFramework { aug, abducibles }
    }

    /// Restricts abduction to events on the named base predicates.
    pub fn with_abducible_predicates<'s>(mut self, names: impl IntoIterator<Item = &'s str>) -> Self {
        let names: BTreeSet<&str> = names.into_iter().collect();
        self.abducibles.retain(|(n, _)| names.contains(n.as_str()));
        self
    }

    /// Whether `e` may appear in an explanation: abducible, and a real
    /// change of the stored facts.
    pub fn is_legal(&self, e: &EventFact) -> bool {
        self.abducibles.contains(&(e.atom.name.clone(), e.polarity))
            && self.aug.base.facts.contains(&e.atom) == (e.polarity == Polarity::Delete)
    }
}

/// A transaction and the condition goals that must stay underivable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Explanation {
    pub t: Transaction,
    pub c: Vec<Goal>,
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStatus {
    /// Every explanation was found.
    Complete,
    /// Stopped after `max_solutions` explanations.
    SolutionLimit,
    /// Some branch was cut by `max_depth`; the list may be incomplete.
    DepthLimit,
}

#[derive(Clone, Debug)]
pub struct Abduction {
    pub explanations: Vec<Explanation>,
    pub status: SearchStatus,
    /// One line per derivation step, when tracing was requested.
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AbduceError {
    #[error(transparent)]
    Deduce(#[from] DeduceError),
    #[error("contradictory goal: {0}")]
    Contradictory(String),
    #[error("floundering: no literal of `{0}` can be selected safely")]
    Floundering(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct St {
    t: BTreeSet<EventFact>,
    c: BTreeSet<Goal>,
}

/// Renames variables by first occurrence, sorts literals and renames again.
fn canonical_goal(g: &[Literal]) -> Goal {
    fn rename(g: &[Literal]) -> Goal {
        let vars = goal_vars(g);
        let mut s = Substitution::new();
        for (i, v) in vars.iter().enumerate() {
            let fresh = Term::Var(Var { name: Sym::new("_"), generation: 1_000_000 + i as u32 });
            s.unify_terms(&Term::Var(v.clone()), &fresh);
        }
        let mut s2 = Substitution::new();
        for (i, _) in vars.iter().enumerate() {
            let from = Term::Var(Var { name: Sym::new("_"), generation: 1_000_000 + i as u32 });
            s2.unify_terms(&from, &Term::Var(Var { name: Sym::new("_"), generation: i as u32 + 1 }));
        }
        s2.apply_goal(&s.apply_goal(g))
    }
    let mut g = rename(g);
    g.sort();
    g.dedup();
    let mut g = rename(&g);
    g.sort();
    g.dedup();
    g
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LitKind {
    /// Evaluated against the old state only.
    Old,
    /// Base event, resolved against `T`.
    BaseEvent,
    /// Anything resolved through the augmented rules.
    Dynamic,
}

fn without(goal: &[Literal], i: usize) -> Goal {
    goal.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l.clone()).collect()
}

fn show_t(t: &BTreeSet<EventFact>) -> String {
    let items: Vec<String> = t.iter().map(|e| e.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

struct Search<'a> {
    fw: &'a AbductiveFramework,
    old: Deducer<'a>,
    named: Vec<Sym>,
    fresh: Vec<Sym>,
    bound: usize,
    max_depth: usize,
    pruned: bool,
    /// Transactions already returned at smaller bounds.
    found: Vec<BTreeSet<EventFact>>,
    depth_hit: bool,
    generation: u32,
    constructive_memo: HashMap<(Goal, St), Rc<Vec<St>>>,
    consistency_memo: HashMap<(Vec<Goal>, St), Rc<Vec<St>>>,
    trace: Option<Vec<String>>,
}

type Res = Result<Vec<St>, AbduceError>;

impl<'a> Search<'a> {
    fn kind(&self, a: &Atom) -> LitKind {
        let base = self.fw.aug.signature().class(&a.name) == PredClass::Base;
        match a.form {
            Form::Old => LitKind::Old,
            Form::Ins | Form::Del if base => LitKind::BaseEvent,
            _ => LitKind::Dynamic,
        }
    }

    fn log(&mut self, tag: &str, goal: &str, st: &St) {
        if let Some(trace) = self.trace.as_mut() {
            let c: Vec<String> = st.c.iter().map(|g| format!("<- {}", render_goal(g))).collect();
            trace.push(format!("{tag} <- {goal} | T={} | C={{{}}}", show_t(&st.t), c.join("; ")));
        }
    }

    fn event_of(a: &Atom) -> Option<EventFact> {
        Some(EventFact { polarity: a.form.polarity()?, atom: a.to_ground()? })
    }

    /// Clauses for a dynamic atom, renamed apart.
    fn clauses(&mut self, a: &Atom) -> Vec<Rule> {
        self.generation += 1;
        let g = self.generation;
        let sig = self.fw.aug.signature();
        if a.form == Form::New && sig.class(&a.name) == PredClass::Base {
            let open = open_atom(&a.name, Form::Old, a.arity());
            let keep = vec![Literal::pos(open.clone()), Literal::neg(open.with_form(Form::Del))];
            let change = vec![Literal::pos(open.with_form(Form::Ins))];
            return [keep, change]
                .into_iter()
                .map(|body| rename_rule(&Rule::new(RuleKind::Transition, open.with_form(Form::New), body), g))
                .collect();
        }
        self.fw.aug.clauses(&a.name, a.form).iter().map(|r| rename_rule(r, g)).collect()
    }

    /// Resolvents of `goal` on literal `i` with every matching clause.
    fn resolve(&mut self, goal: &[Literal], i: usize) -> Vec<Goal> {
        let atom = goal[i].atom.clone();
        let mut out = Vec::new();
        for clause in self.clauses(&atom) {
            let mut s = Substitution::new();
            if !s.unify_atoms(&clause.head, &atom) {
                continue;
            }
            let mut g: Goal = goal[..i].to_vec();
            g.extend(clause.body.iter().cloned());
            g.extend(goal[i + 1..].iter().cloned());
            out.push(s.apply_goal(&g));
        }
        out
    }

    /// Resolvents of `goal` on old-state literal `i`.
    fn resolve_old(&mut self, goal: &[Literal], i: usize) -> Result<Vec<Goal>, AbduceError> {
        let lit = &goal[i];
        let tuples = self.old.answers(&lit.atom)?;
        let rest = without(goal, i);
        let mut out = Vec::new();
        for t in tuples.iter() {
            let mut s = Substitution::new();
            if s.match_ground(&lit.atom.args, t) {
                out.push(s.apply_goal(&rest));
            }
        }
        Ok(out)
    }

    fn old_holds(&mut self, a: &Atom) -> Result<bool, AbduceError> {
        Ok(self.old.holds(a)?)
    }

    /// Ground instances of `a` over the search domain. Fresh constants are
    /// interchangeable, so a new one is only used after all lower ones.
    fn groundings(&self, a: &Atom, t: &BTreeSet<EventFact>) -> Vec<Atom> {
        let mut vars: Vec<Var> = Vec::new();
        for v in a.vars() {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        let used = self
            .fresh
            .iter()
            .rposition(|c| t.iter().any(|e| e.atom.args.contains(c)))
            .map_or(0, |i| i + 1);
        let mut out = vec![(Substitution::new(), used)];
        for v in &vars {
            let mut next = Vec::new();
            for (s, used) in &out {
                let fresh = self.fresh.iter().take((used + 1).min(self.fresh.len()));
                for (i, c) in self.named.iter().map(|c| (None, c)).chain(fresh.enumerate().map(|(i, c)| (Some(i), c))) {
                    let mut s2 = s.clone();
                    s2.insert_const(v.clone(), c.clone());
                    next.push((s2, i.map_or(*used, |i| (*used).max(i + 1))));
                }
            }
            out = next;
        }
        out.iter().map(|(s, _)| s.apply_atom(a)).collect()
    }

    /// Picks the literal to work on: old-state checks first, then bindings,
    /// then rule or event resolution, then ground negative literals. In a
    /// constructive goal a negative literal with only local variables is
    /// also selectable: it asks that no instance succeed.
    fn select(&self, goal: &[Literal], local_negatives: bool) -> Option<usize> {
        let ground_old = |l: &Literal| self.kind(&l.atom) == LitKind::Old && l.atom.is_ground();
        goal.iter()
            .position(ground_old)
            .or_else(|| goal.iter().position(|l| l.positive && self.kind(&l.atom) == LitKind::Old))
            .or_else(|| goal.iter().position(|l| l.positive && self.kind(&l.atom) == LitKind::Dynamic))
            .or_else(|| goal.iter().position(|l| l.positive))
            .or_else(|| goal.iter().position(|l| l.atom.is_ground()))
            .or_else(|| (0..goal.len()).find(|&i| local_negatives && is_local(goal, i)))
    }

    fn constructive(&mut self, goal: &[Literal], st: &St, depth: usize) -> Res {
        if goal.is_empty() {
            return Ok(vec![st.clone()]);
        }
        if depth > self.max_depth {
            self.depth_hit = true;
            return Ok(Vec::new());
        }
        let key = (goal.to_vec(), st.clone());
        if let Some(r) = self.constructive_memo.get(&key) {
            return Ok(r.as_ref().clone());
        }
        let Some(i) = self.select(goal, true) else {
            return Err(AbduceError::Floundering(render_goal(goal)));
        };
        let lit = goal[i].clone();
        let mut out: BTreeSet<St> = BTreeSet::new();
        match (self.kind(&lit.atom), lit.positive) {
            (LitKind::Old, _) if lit.atom.is_ground() => {
                if self.old_holds(&lit.atom)? == lit.positive {
                    out.extend(self.constructive(&without(goal, i), st, depth)?);
                }
            }
            (LitKind::Old, true) => {
                self.log("A1", &render_goal(goal), st);
                for g in self.resolve_old(goal, i)? {
                    out.extend(self.constructive(&g, st, depth)?);
                }
            }
            (LitKind::Dynamic, true) => {
                self.log("A1", &render_goal(goal), st);
                for g in self.resolve(goal, i) {
                    out.extend(self.constructive(&g, st, depth)?);
                }
            }
            (LitKind::BaseEvent, true) => {
                for ga in self.groundings(&lit.atom, &st.t) {
                    let Some(e) = Self::event_of(&ga) else { continue };
                    if !self.fw.is_legal(&e) {
                        continue;
                    }
                    let mut s = Substitution::new();
                    s.unify_atoms(&lit.atom, &ga);
                    let rest = s.apply_goal(&without(goal, i));
                    let states = if st.t.contains(&e) {
                        vec![st.clone()]
                    } else if self.found.iter().any(|f| f.iter().all(|x| *x == e || st.t.contains(x))) {
                        // Every extension would contain a known explanation.
                        continue;
                    } else if st.t.len() >= self.bound {
                        self.pruned = true;
                        continue;
                    } else {
                        let mut next = st.clone();
                        next.t.insert(e.clone());
                        self.log("A2", &render_goal(&s.apply_goal(goal)), &next);
                        if st.c.is_empty() {
                            vec![next]
                        } else {
                            let conds: Vec<Goal> = next.c.iter().cloned().collect();
                            self.consistency(&conds, &next, depth + 1)?
                        }
                    };
                    for s2 in states {
                        out.extend(self.constructive(&rest, &s2, depth)?);
                    }
                }
            }
            (kind, false) => {
                let atom = lit.atom.clone();
                let rest = without(goal, i);
                if let (LitKind::BaseEvent, Some(e)) = (kind, Self::event_of(&atom)) {
                    if st.t.contains(&e) {
                        return self.memo_constructive(key, out);
                    }
                    if !self.fw.is_legal(&e) {
                        let r = self.constructive(&rest, st, depth)?;
                        out.extend(r);
                        return self.memo_constructive(key, out);
                    }
                }
                self.log("A3", &render_goal(goal), st);
                for s2 in self.consistency(&[vec![Literal::pos(atom)]], st, depth + 1)? {
                    out.extend(self.constructive(&rest, &s2, depth)?);
                }
            }
        }
        self.memo_constructive(key, out)
    }

    fn memo_constructive(&mut self, key: (Goal, St), out: BTreeSet<St>) -> Res {
        let v: Vec<St> = out.into_iter().collect();
        self.constructive_memo.insert(key, Rc::new(v.clone()));
        Ok(v)
    }

    /// Ways of extending `st` so that every goal of `f` fails.
    fn consistency(&mut self, f: &[Goal], st: &St, depth: usize) -> Res {
        let mut f: Vec<Goal> = f.iter().map(|g| canonical_goal(g)).collect();
        f.sort();
        f.dedup();
        if f.is_empty() {
            return Ok(vec![st.clone()]);
        }
        if f.iter().any(|g| g.is_empty()) {
            return Ok(Vec::new());
        }
        if depth > self.max_depth {
            self.depth_hit = true;
            return Ok(Vec::new());
        }
        let key = (f.clone(), st.clone());
        if let Some(r) = self.consistency_memo.get(&key) {
            return Ok(r.as_ref().clone());
        }
        let h = f[0].clone();
        let rest: Vec<Goal> = f[1..].to_vec();
        let with_rest = |mut goals: Vec<Goal>| {
            goals.extend(rest.iter().cloned());
            goals
        };
        let Some(i) = self.select(&h, false) else {
            return Err(AbduceError::Floundering(render_goal(&h)));
        };
        let lit = h[i].clone();
        let mut out: BTreeSet<St> = BTreeSet::new();
        match (self.kind(&lit.atom), lit.positive) {
            (LitKind::Old, _) if lit.atom.is_ground() => {
                if self.old_holds(&lit.atom)? == lit.positive {
                    let reduced = without(&h, i);
                    if !reduced.is_empty() {
                        out.extend(self.consistency(&with_rest(vec![reduced]), st, depth)?);
                    }
                } else {
                    out.extend(self.consistency(&rest, st, depth)?);
                }
            }
            (LitKind::Old, true) | (LitKind::Dynamic, true) => {
                self.log("B1", &render_goal(&h), st);
                let resolvents = if self.kind(&lit.atom) == LitKind::Old {
                    self.resolve_old(&h, i)?
                } else {
                    self.resolve(&h, i)
                };
                if resolvents.iter().all(|g| !g.is_empty()) {
                    out.extend(self.consistency(&with_rest(resolvents), st, depth)?);
                }
            }
            (LitKind::BaseEvent, true) => {
                let impossible = Self::event_of(&lit.atom).is_some_and(|e| !self.fw.is_legal(&e));
                if impossible {
                    out.extend(self.consistency(&rest, st, depth)?);
                } else {
                    let mut resolvents = Vec::new();
                    for e in &st.t {
                        let mut s = Substitution::new();
                        if s.unify_atoms(&lit.atom, &e.to_atom()) {
                            resolvents.push(s.apply_goal(&without(&h, i)));
                        }
                    }
                    if resolvents.iter().all(|g| !g.is_empty()) {
                        let mut next = st.clone();
                        next.c.insert(h.clone());
                        self.log("B2", &render_goal(&h), &next);
                        out.extend(self.consistency(&with_rest(resolvents), &next, depth)?);
                    }
                }
            }
            (kind, false) => {
                let atom = lit.atom.clone();
                let reduced = without(&h, i);
                if kind == LitKind::BaseEvent {
                    let e = Self::event_of(&atom).expect("selected negative literals are ground");
                    if st.t.contains(&e) {
                        let r = self.consistency(&rest, st, depth)?;
                        return self.memo_consistency(key, r.into_iter().collect());
                    }
                    if !self.fw.is_legal(&e) {
                        if !reduced.is_empty() {
                            out.extend(self.consistency(&with_rest(vec![reduced]), st, depth)?);
                        }
                        return self.memo_consistency(key, out);
                    }
                }
                self.log("B5", &render_goal(&h), st);
                for s2 in self.constructive(&[Literal::pos(atom.clone())], st, depth + 1)? {
                    out.extend(self.consistency(&rest, &s2, depth)?);
                }
                if !reduced.is_empty() {
                    if kind == LitKind::BaseEvent {
                        self.log("B4", &render_goal(&h), st);
                        out.extend(self.consistency(&with_rest(vec![reduced]), st, depth)?);
                    } else {
                        self.log("B3", &render_goal(&h), st);
                        for s2 in self.consistency(&[vec![Literal::pos(atom)]], st, depth + 1)? {
                            out.extend(self.consistency(&with_rest(vec![reduced.clone()]), &s2, depth)?);
                        }
                    }
                }
            }
        }
        self.memo_consistency(key, out)
    }

    fn memo_consistency(&mut self, key: (Vec<Goal>, St), out: BTreeSet<St>) -> Res {
        let v: Vec<St> = out.into_iter().collect();
        self.consistency_memo.insert(key, Rc::new(v.clone()));
        Ok(v)
    }
}

fn check_contradiction(goal: &[Literal]) -> Result<(), AbduceError> {
    for (i, a) in goal.iter().enumerate() {
        for b in &goal[i + 1..] {
            let complementary = a.atom == b.atom && a.positive != b.positive;
            let both_events = a.positive
                && b.positive
                && a.atom.is_ground()
                && a.atom.name == b.atom.name
                && a.atom.args == b.atom.args
                && matches!((a.atom.form, b.atom.form), (Form::Ins, Form::Del) | (Form::Del, Form::Ins));
            if complementary || both_events {
                return Err(AbduceError::Contradictory(format!("{a} and {b}")));
            }
        }
    }
    Ok(())
}

/// Keeps the explanations whose transaction has no proper subset among the others.
pub fn minimal_filter(explanations: Vec<Explanation>) -> Vec<Explanation> {
    let mut out: Vec<Explanation> = Vec::new();
    for e in &explanations {
        let dominated = explanations.iter().any(|o| o.t.len() < e.t.len() && o.t.is_subset(&e.t));
        if !dominated && !out.iter().any(|o| o.t == e.t) {
            out.push(e.clone());
        }
    }
    out
}

/// `t` under every permutation of the fresh constants.
fn renamings(t: &BTreeSet<EventFact>, fresh: &[Sym]) -> Vec<BTreeSet<EventFact>> {
    let used: Vec<&Sym> = fresh.iter().filter(|c| t.iter().any(|e| e.atom.args.contains(c))).collect();
    if used.is_empty() {
        return vec![t.clone()];
    }
    let mut perms: Vec<Vec<&Sym>> = vec![Vec::new()];
    for _ in 0..used.len() {
        let mut next = Vec::new();
        for p in &perms {
            for c in fresh.iter().filter(|c| !p.contains(c)) {
                let mut q = p.clone();
                q.push(c);
                next.push(q);
            }
        }
        perms = next;
    }
    perms
        .into_iter()
        .map(|p| {
            t.iter()
                .map(|e| {
                    let mut e = e.clone();
                    for a in e.atom.args.iter_mut() {
                        if let Some(i) = used.iter().position(|u| *u == a) {
                            *a = p[i].clone();
                        }
                    }
                    e
                })
                .collect()
        })
        .collect()
}

/// Like [`minimal_filter`], treating transactions that differ only by a
/// renaming of fresh constants as the same. Expects sorted input.
fn minimal_modulo(explanations: Vec<Explanation>, fresh: &[Sym]) -> Vec<Explanation> {
    let mut out: Vec<Explanation> = Vec::new();
    for e in explanations {
        let covered = out.iter().any(|o| {
            renamings(o.t.events(), fresh).iter().any(|r| r.iter().all(|x| e.t.events().contains(x)))
        });
        if !covered {
            out.push(e);
        }
    }
    out
}

/// Options for [`abduce_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct AbduceOptions {
    pub budget: SearchBudget,
    pub trace: bool,
}

/// Minimal explanations of `goal`, smallest first.
pub fn abduce(fw: &AbductiveFramework, goal: &[Literal], budget: SearchBudget) -> Result<Abduction, AbduceError> {
    abduce_with(fw, goal, AbduceOptions { budget, trace: false })
}

pub fn abduce_with(fw: &AbductiveFramework, goal: &[Literal], opts: AbduceOptions) -> Result<Abduction, AbduceError> {
    check_contradiction(goal)?;
    let budget = opts.budget;
    let mut domain: BTreeSet<Sym> = fw.aug.base.active_domain();
    for l in goal {
        domain.extend(l.atom.args.iter().filter_map(Term::as_const).cloned());
    }
    let named: Vec<Sym> = domain.iter().cloned().collect();
    let fresh: Vec<Sym> = (1..=budget.fresh_constants).map(fresh_constant).filter(|c| !domain.contains(c)).collect();
    let domain_size = named.len() + fresh.len();

    let universe: usize = fw
        .abducibles
        .iter()
        .map(|(name, polarity)| {
            let arity = fw.aug.signature().get(name).map(|p| p.arity).unwrap_or(0) as u32;
            let stored = fw.aug.base.facts.iter().filter(|f| f.name == *name).count();
            match polarity {
                Polarity::Insert => domain_size.saturating_pow(arity).saturating_sub(stored),
                Polarity::Delete => stored,
            }
        })
        .sum();
    let limit = universe.min(budget.max_depth);

    let mut search = Search {
        fw,
        old: Deducer::new(&fw.aug, &Transaction::empty())?,
        named,
        fresh,
        bound: 0,
        max_depth: budget.max_depth,
        pruned: false,
        found: Vec::new(),
        depth_hit: false,
        generation: 0,
        constructive_memo: HashMap::new(),
        consistency_memo: HashMap::new(),
        trace: opts.trace.then(Vec::new),
    };
    let goal: Goal = goal.to_vec();
    let mut explanations: Vec<Explanation> = Vec::new();
    let mut depth_hit = false;
    let mut bound = 0;
    loop {
        search.bound = bound;
        search.pruned = false;
        search.depth_hit = false;
        search.constructive_memo.clear();
        search.consistency_memo.clear();
        if let Some(t) = search.trace.as_mut() {
            t.push(format!("bound {bound}"));
        }
        for s in search.constructive(&goal, &St::default(), 0)? {
            if !explanations.iter().any(|e| *e.t.events() == s.t) {
                let t = Transaction::new(s.t).expect("legal events never contradict");
                explanations.push(Explanation { t, c: s.c.into_iter().collect() });
            }
        }
        explanations.sort_by(|a, b| (a.t.len(), &a.t).cmp(&(b.t.len(), &b.t)));
        explanations = minimal_modulo(explanations, &search.fresh);
        search.found = explanations.iter().flat_map(|e| renamings(e.t.events(), &search.fresh)).collect();
        depth_hit |= search.depth_hit;
        let status = if explanations.len() >= budget.max_solutions {
            explanations.truncate(budget.max_solutions);
            Some(SearchStatus::SolutionLimit)
        } else if !search.pruned {
            Some(if depth_hit { SearchStatus::DepthLimit } else { SearchStatus::Complete })
        } else if bound >= limit {
            Some(SearchStatus::DepthLimit)
        } else {
            None
        };
        if let Some(status) = status {
            let trace = search.trace.take().unwrap_or_default();
            return Ok(Abduction { explanations, status, trace });
        }
        bound += 1;
    }
}

/// Whether `t` is a legal transaction under which `goal` succeeds.
pub fn check_explanation(fw: &AbductiveFramework, t: &Transaction, goal: &[Literal]) -> Result<bool, AbduceError> {
    if !t.events().iter().all(|e| fw.is_legal(e)) {
        return Ok(false);
    }
    Ok(!deduce(&fw.aug, t, goal)?.is_empty())
}

/// Conjunction asserting that every event of `t` happens.
pub fn transaction_goal(t: &Transaction) -> Goal {
    t.events().iter().map(|e| Literal::pos(e.to_atom())).collect()
}

/// Ground atom of an event, for display.
pub fn event_atom(e: &EventFact) -> GroundAtom {
    e.atom.clone()
}
