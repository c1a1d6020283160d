//! Substitutions over function-free terms.

use std::collections::BTreeMap;
use std::fmt;

use crate::model::{Atom, Literal, Rule, Sym, Term, Var};

/// A finite map from variables to terms, kept idempotent: no bound
/// variable occurs in the range.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn walk(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            c => c.clone(),
        }
    }

    /// Binds `v` to `t`. Both must already be resolved against `self`.
    fn bind(&mut self, v: Var, t: Term) {
        if t == Term::Var(v.clone()) {
            return;
        }
        for val in self.map.values_mut() {
            if *val == Term::Var(v.clone()) {
                *val = t.clone();
            }
        }
        self.map.insert(v, t);
    }

    /// Extends `self` so that `a` and `b` become equal, or returns false
    /// (leaving `self` partially extended).
    pub fn unify_terms(&mut self, a: &Term, b: &Term) -> bool {
        let (a, b) = (self.walk(a), self.walk(b));
        match (a, b) {
            (Term::Const(x), Term::Const(y)) => x == y,
            (Term::Var(v), t) | (t, Term::Var(v)) => {
                self.bind(v, t);
                true
            }
        }
    }

    pub fn unify_atoms(&mut self, a: &Atom, b: &Atom) -> bool {
        a.name == b.name
            && a.form == b.form
            && a.args.len() == b.args.len()
            && a.args.iter().zip(&b.args).all(|(x, y)| self.unify_terms(x, y))
    }

    /// Unifies `pattern` against ground `values`.
    pub fn match_ground(&mut self, pattern: &[Term], values: &[Sym]) -> bool {
        pattern.len() == values.len()
            && pattern.iter().zip(values).all(|(p, v)| self.unify_terms(p, &Term::Const(v.clone())))
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom { name: a.name.clone(), form: a.form, args: a.args.iter().map(|t| self.walk(t)).collect() }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal { positive: l.positive, atom: self.apply_atom(&l.atom) }
    }

    pub fn apply_goal(&self, g: &[Literal]) -> Vec<Literal> {
        g.iter().map(|l| self.apply_literal(l)).collect()
    }

    /// Keeps only the bindings of `vars`.
    pub fn restrict(&self, vars: &[Var]) -> Substitution {
        Substitution { map: self.map.iter().filter(|(k, _)| vars.contains(k)).map(|(k, v)| (k.clone(), v.clone())).collect() }
    }

    pub fn insert_const(&mut self, v: Var, c: Sym) {
        self.bind(v, Term::Const(c));
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Renames every variable of `rule` to generation `generation`.
pub fn rename_rule(rule: &Rule, generation: u32) -> Rule {
    let rn = |a: &Atom| Atom {
        name: a.name.clone(),
        form: a.form,
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(Var { name: v.name.clone(), generation }),
                c => c.clone(),
            })
            .collect(),
    };
    Rule {
        kind: rule.kind,
        head: rn(&rule.head),
        body: rule.body.iter().map(|l| Literal { positive: l.positive, atom: rn(&l.atom) }).collect(),
        span: rule.span,
    }
}

/// Variables of a goal in order of first occurrence.
pub fn goal_vars(goal: &[Literal]) -> Vec<Var> {
    let mut out: Vec<Var> = Vec::new();
    for v in goal.iter().flat_map(|l| l.atom.vars()) {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}
