//! Transition and event rules.
//!
//! Every derived, integrity, condition and aggregate predicate `P` gets
//! transition rules defining `Pⁿ` over old-state and event literals, and
//! insertion/deletion rules for `ιP`/`δP`. Three rule shapes are offered;
//! all of them define the same events.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::model::{Atom, Database, Form, Literal, Rule, RuleKind, Signature, Sym, Var};
use crate::parser::render_rules;
use crate::schema::{ensure_ic_aggregation, levels};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Variant {
    /// Event rules exactly as `ιP ← Pⁿ ∧ ¬P`, `δP ← P ∧ ¬Pⁿ`.
    Plain,
    /// Direct propagation for single-literal definitions; guarded rules
    /// built from the transition bodies otherwise.
    Kuchenhoff,
    /// Guards dropped wherever the event literals already imply the change.
    #[default]
    Simplified,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Plain, Variant::Kuchenhoff, Variant::Simplified];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Kuchenhoff => "kuchenhoff",
            Variant::Simplified => "simplified",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected plain, kuchenhoff or simplified)"))
    }
}

/// Rewrites a new-state literal as two alternative conjunctions:
/// `Qⁿ ≡ (Q ∧ ¬δQ) ∨ ιQ` and `¬Qⁿ ≡ (¬Q ∧ ¬ιQ) ∨ δQ`.
/// The first disjunct is the one where `Q` keeps its truth value.
pub fn expand_new_state_literal(lit: &Literal) -> [Vec<Literal>; 2] {
    let old = lit.atom.with_form(Form::Old);
    let ins = lit.atom.with_form(Form::Ins);
    let del = lit.atom.with_form(Form::Del);
    if lit.positive {
        [vec![Literal::pos(old), Literal::neg(del)], vec![Literal::pos(ins)]]
    } else {
        [vec![Literal::neg(old), Literal::neg(ins)], vec![Literal::pos(del)]]
    }
}

/// The `2^k` transition rules of a `k`-literal rule, with head `Pⁿ`.
///
/// Ordered with the first body literal varying slowest; the first rule is
/// the one in which nothing changes.
pub fn transition_rules(rule: &Rule) -> Vec<Rule> {
    transition_rules_as(rule, Form::New)
}

fn transition_rules_as(rule: &Rule, head_form: Form) -> Vec<Rule> {
    let mut bodies: Vec<Vec<Literal>> = vec![Vec::new()];
    for lit in &rule.body {
        let lit = Literal { positive: lit.positive, atom: lit.atom.with_form(Form::New) };
        let [keep, change] = expand_new_state_literal(&lit);
        let mut next = Vec::with_capacity(bodies.len() * 2);
        for b in &bodies {
            for alt in [&keep, &change] {
                let mut nb = b.clone();
                nb.extend(alt.iter().cloned());
                next.push(nb);
            }
        }
        bodies = next;
    }
    let head = rule.head.with_form(head_form);
    bodies
        .into_iter()
        .map(|body| Rule { kind: RuleKind::Transition, head: head.clone(), body, span: rule.span })
        .collect()
}

fn defining_rules<'a>(db: &'a Database, pred: &Sym) -> Vec<&'a Rule> {
    db.rules.iter().filter(|r| &r.head.name == pred && r.kind.is_schema()).collect()
}

fn body_vars_within_head(rule: &Rule) -> bool {
    let head: BTreeSet<&Var> = rule.head.vars().collect();
    rule.body.iter().flat_map(|l| l.atom.vars()).all(|v| head.contains(v))
}

fn transition_head_form(count: usize, i: usize) -> Form {
    if count == 1 {
        Form::New
    } else {
        Form::NewPart(i as u32 + 1)
    }
}

/// Transition rules for `pred`, including `Pⁿ ← Pᵢⁿ` when several rules define it.
fn pred_transitions(db: &Database, pred: &Sym) -> Vec<Rule> {
    let rules = defining_rules(db, pred);
    let mut out = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        let form = transition_head_form(rules.len(), i);
        out.extend(transition_rules_as(r, form));
        if rules.len() > 1 {
            out.push(Rule::new(
                RuleKind::Transition,
                r.head.with_form(Form::New),
                vec![Literal::pos(r.head.with_form(form))],
            ));
        }
    }
    out
}

fn guarded_rules(rules: &[&Rule]) -> Vec<Rule> {
    let mut out = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        let head = r.head.with_form(Form::Ins);
        for t in transition_rules_as(r, transition_head_form(rules.len(), i)).into_iter().skip(1) {
            let mut body = t.body;
            body.push(Literal::neg(r.head.clone()));
            out.push(Rule::new(RuleKind::InsertionEvent, head.clone(), body));
        }
    }
    out.push(plain_deletion(rules[0]));
    out
}

fn plain_insertion(r: &Rule) -> Rule {
    Rule::new(
        RuleKind::InsertionEvent,
        r.head.with_form(Form::Ins),
        vec![Literal::pos(r.head.with_form(Form::New)), Literal::neg(r.head.clone())],
    )
}

fn plain_deletion(r: &Rule) -> Rule {
    Rule::new(
        RuleKind::DeletionEvent,
        r.head.with_form(Form::Del),
        vec![Literal::pos(r.head.clone()), Literal::neg(r.head.with_form(Form::New))],
    )
}

/// Insertion and deletion event rules for `pred` under `variant`.
pub fn event_rules(db: &Database, pred: &Sym, variant: Variant) -> Vec<Rule> {
    let rules = defining_rules(db, pred);
    if rules.is_empty() {
        return Vec::new();
    }
    let single = rules.len() == 1;
    let out = match variant {
        Variant::Plain => vec![plain_insertion(rules[0]), plain_deletion(rules[0])],
        Variant::Kuchenhoff => {
            let r = rules[0];
            if single && r.body.len() == 1 && r.body[0].positive && body_vars_within_head(r) {
                let b = &r.body[0].atom;
                vec![
                    Rule::new(RuleKind::InsertionEvent, r.head.with_form(Form::Ins), vec![Literal::pos(b.with_form(Form::Ins))]),
                    Rule::new(RuleKind::DeletionEvent, r.head.with_form(Form::Del), vec![Literal::pos(b.with_form(Form::Del))]),
                ]
            } else {
                guarded_rules(&rules)
            }
        }
        Variant::Simplified => {
            let r = rules[0];
            if single && body_vars_within_head(r) {
                simplified_single(r)
            } else {
                guarded_rules(&rules)
            }
        }
    };
    dedup(out)
}

/// Single rule whose truth is fully determined by its head bindings: a
/// change in any body literal implies a change of the head.
fn simplified_single(r: &Rule) -> Vec<Rule> {
    let ins_head = r.head.with_form(Form::Ins);
    let del_head = r.head.with_form(Form::Del);
    let mut out: Vec<Rule> = transition_rules(r)
        .into_iter()
        .skip(1)
        .map(|t| Rule::new(RuleKind::InsertionEvent, ins_head.clone(), t.body))
        .collect();
    for (j, lit) in r.body.iter().enumerate() {
        let body = if lit.positive {
            let mut b = r.body.clone();
            b[j] = Literal::pos(lit.atom.with_form(Form::Del));
            b
        } else {
            vec![Literal::pos(r.head.clone()), Literal::pos(lit.atom.with_form(Form::Ins))]
        };
        out.push(Rule::new(RuleKind::DeletionEvent, del_head.clone(), body));
    }
    out
}

fn dedup(rules: Vec<Rule>) -> Vec<Rule> {
    let mut seen = BTreeSet::new();
    rules.into_iter().filter(|r| seen.insert(r.canonical())).collect()
}

/// A `(predicate, form)` node of the augmented dependency graph.
pub type Node = (Sym, Form);

/// `A(D)`: a schema with its generated transition and event rules.
#[derive(Clone, Debug)]
pub struct AugmentedDatabase {
    pub base: Database,
    pub variant: Variant,
    pub generated: Vec<Rule>,
    index: BTreeMap<(Sym, Form), Vec<Rule>>,
    signature: Signature,
}

impl AugmentedDatabase {
    /// Rules whose head is `name` in `form`, schema rules included.
    pub fn clauses(&self, name: &Sym, form: Form) -> &[Rule] {
        self.index.get(&(name.clone(), form)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn all_rules(&self) -> impl Iterator<Item = &Rule> {
        self.base.rules.iter().chain(self.generated.iter())
    }

    /// The same rules over another EDB.
    pub fn with_facts(&self, facts: BTreeSet<crate::model::GroundAtom>) -> AugmentedDatabase {
        AugmentedDatabase { base: self.base.with_facts(facts), ..self.clone() }
    }

    /// Layering of `(predicate, form)` nodes, or the first cycle found.
    pub fn dependency_levels(&self) -> Result<Vec<Vec<Node>>, Vec<Node>> {
        let mut edges: BTreeMap<(Sym, Form), BTreeSet<(Sym, Form)>> = BTreeMap::new();
        for r in self.all_rules() {
            let e = edges.entry((r.head.name.clone(), r.head.form)).or_default();
            for l in &r.body {
                e.insert((l.atom.name.clone(), l.atom.form));
            }
        }
        levels(&edges)
    }

    pub fn render(&self, generated_only: bool) -> String {
        if generated_only {
            render_rules(&BTreeSet::new(), self.generated.iter())
        } else {
            render_rules(&self.base.facts, self.all_rules())
        }
    }
}

/// Builds `A(D)`. Integrity aggregation must already be present; see [`compile`].
pub fn augment(db: &Database, variant: Variant) -> AugmentedDatabase {
    let mut preds: Vec<Sym> = Vec::new();
    for r in db.rules.iter().filter(|r| r.kind.is_schema()) {
        if !preds.contains(&r.head.name) {
            preds.push(r.head.name.clone());
        }
    }
    let mut generated = Vec::new();
    for p in &preds {
        generated.extend(pred_transitions(db, p));
        generated.extend(event_rules(db, p, variant));
    }
    let generated = dedup(generated);
    let mut index: BTreeMap<(Sym, Form), Vec<Rule>> = BTreeMap::new();
    for r in db.rules.iter().chain(generated.iter()) {
        index.entry((r.head.name.clone(), r.head.form)).or_default().push(r.clone());
    }
    AugmentedDatabase { base: db.clone(), variant, generated, index, signature: db.signature() }
}

/// `augment` after adding any missing `Ic ← Icᵢ` rules.
pub fn compile(db: &Database, variant: Variant) -> AugmentedDatabase {
    augment(&ensure_ic_aggregation(db), variant)
}

/// Atom `name(x1..xn)` over fresh variables.
pub(crate) fn open_atom(name: &Sym, form: Form, arity: usize) -> Atom {
    Atom {
        name: name.clone(),
        form,
        args: (0..arity).map(|i| crate::model::Term::var(&format!("x{}", i + 1))).collect(),
    }
}
