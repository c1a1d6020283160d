//! Seeded generator of small hierarchical databases, transactions and goals.
#![allow(dead_code)]

use std::collections::BTreeSet;

use deltalog::{parse_database, Database, EventFact, GroundAtom, Polarity, Transaction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CONSTANTS: [&str; 3] = ["A", "B", "C"];
const VARS: [&str; 3] = ["x", "y", "z"];

#[derive(Clone, Debug)]
pub struct Pred {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub text: String,
    pub db: Database,
    pub base: Vec<Pred>,
    pub derived: Vec<Pred>,
    pub constants: Vec<&'static str>,
}

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_preds: usize,
    pub max_constants: usize,
    pub max_rules: usize,
    pub max_body: usize,
    pub max_arity: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { max_preds: 4, max_constants: 3, max_rules: 2, max_body: 3, max_arity: 2 }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn atom_text(name: &str, args: &[String]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", args.join(", "))
    }
}

fn term(rng: &mut ChaCha8Rng, vars: &[&str], constants: &[&'static str]) -> String {
    if !constants.is_empty() && rng.gen_bool(0.15) {
        constants.choose(rng).unwrap().to_string()
    } else {
        vars.choose(rng).unwrap().to_string()
    }
}

/// One allowed rule for `head` over the predicates in `body_preds`.
fn rule(rng: &mut ChaCha8Rng, head: &Pred, body_preds: &[Pred], constants: &[&'static str], shape: Shape) -> String {
    let len = rng.gen_range(1..=shape.max_body);
    let positives = rng.gen_range(1..=len);
    let vars = &VARS[..rng.gen_range(1..=VARS.len())];
    let mut body = Vec::new();
    let mut bound: Vec<String> = Vec::new();
    for i in 0..len {
        let p = body_preds.choose(rng).unwrap();
        let positive = i < positives;
        let args: Vec<String> = (0..p.arity)
            .map(|_| {
                if positive {
                    term(rng, vars, constants)
                } else if !bound.is_empty() && rng.gen_bool(0.85) {
                    bound.choose(rng).unwrap().clone()
                } else {
                    constants.choose(rng).unwrap_or(&"A").to_string()
                }
            })
            .collect();
        if positive {
            for a in &args {
                if a.starts_with(char::is_lowercase) && !bound.contains(a) {
                    bound.push(a.clone());
                }
            }
        }
        let text = atom_text(&p.name, &args);
        body.push(if positive { text } else { format!("not {text}") });
    }
    let mut head_vars = bound.clone();
    head_vars.shuffle(rng);
    head_vars.truncate(head.arity);
    while head_vars.len() < head.arity {
        // Pad with a fresh positive literal that binds a new variable.
        let v = format!("w{}", head_vars.len());
        let p = body_preds.iter().find(|p| p.arity >= 1).cloned();
        match p {
            Some(p) => {
                let mut args = vec![v.clone()];
                args.extend((1..p.arity).map(|_| v.clone()));
                body.insert(0, atom_text(&p.name, &args));
                head_vars.push(v);
            }
            None => break,
        }
    }
    let head_arity = head_vars.len();
    assert_eq!(head_arity, head.arity, "no predicate can bind head variables");
    format!("{} <- {}.", atom_text(&head.name, &head_vars), body.join(", "))
}

/// A random hierarchical database with at most `shape.max_preds` predicates.
pub fn instance(rng: &mut ChaCha8Rng, shape: Shape) -> Instance {
    let total = rng.gen_range(2..=shape.max_preds);
    let n_base = rng.gen_range(1..total);
    let base: Vec<Pred> = (0..n_base)
        .map(|i| Pred { name: format!("B{i}"), arity: rng.gen_range(if i == 0 { 1 } else { 0 }..=shape.max_arity) })
        .collect();
    let n_constants = rng.gen_range(1..=shape.max_constants);
    let constants: Vec<&'static str> = CONSTANTS[..n_constants].to_vec();
    let mut known = base.clone();
    let mut derived = Vec::new();
    let mut lines = Vec::new();
    let mut ics = 0;
    for i in 0..(total - n_base) {
        let last = i + 1 == total - n_base;
        let is_ic = last && rng.gen_bool(0.3);
        let is_cond = !is_ic && last && rng.gen_bool(0.2);
        let (keyword, name) = if is_ic {
            ics += 1;
            ("ic", format!("Ic{ics}"))
        } else if is_cond {
            ("cond", format!("Cond{i}"))
        } else {
            ("rule", format!("D{i}"))
        };
        let arity = rng.gen_range(0..=shape.max_arity.min(2));
        let p = Pred { name, arity };
        for _ in 0..rng.gen_range(1..=shape.max_rules) {
            lines.push(format!("{keyword} {}", rule(rng, &p, &known, &constants, shape)));
        }
        if !is_cond {
            known.push(p.clone());
        }
        derived.push(p);
    }
    for p in &base {
        for args in tuples(p.arity, &constants) {
            if rng.gen_bool(0.4) {
                lines.push(format!("fact {}.", atom_text(&p.name, &args)));
            }
        }
    }
    let text = lines.join("\n");
    let db = parse_database(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    Instance { text, db, base, derived, constants }
}

pub fn tuples(arity: usize, constants: &[&str]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                constants.iter().map(move |c| {
                    let mut t = t.clone();
                    t.push(c.to_string());
                    t
                })
            })
            .collect();
    }
    out
}

/// Up to `max` random base events, including no-op ones, never contradictory.
pub fn transaction(rng: &mut ChaCha8Rng, inst: &Instance, max: usize) -> Transaction {
    let mut events: BTreeSet<EventFact> = BTreeSet::new();
    for _ in 0..rng.gen_range(0..=max) {
        let p = inst.base.choose(rng).unwrap();
        let args: Vec<String> = (0..p.arity).map(|_| inst.constants.choose(rng).unwrap().to_string()).collect();
        let atom = GroundAtom { name: deltalog::Sym::new(&p.name), args: args.iter().map(|a| deltalog::Sym::new(a)).collect() };
        let polarity = if rng.gen_bool(0.5) { Polarity::Insert } else { Polarity::Delete };
        if !events.iter().any(|e| e.atom == atom) {
            events.insert(EventFact { polarity, atom });
        }
    }
    Transaction::new(events).unwrap()
}

/// A random goal over the derived predicates: one or two event literals and
/// possibly a ground negated event literal.
pub fn goal_text(rng: &mut ChaCha8Rng, inst: &Instance) -> String {
    let mut parts = Vec::new();
    let mut used: Vec<(String, Vec<String>)> = Vec::new();
    let mut pick = |rng: &mut ChaCha8Rng, allow_var: bool| -> Option<String> {
        let p = inst.derived.choose(rng).unwrap();
        let args: Vec<String> = (0..p.arity)
            .map(|_| {
                if allow_var && rng.gen_bool(0.3) {
                    "x".to_string()
                } else {
                    inst.constants.choose(rng).unwrap().to_string()
                }
            })
            .collect();
        let key = (p.name.clone(), args.clone());
        let clash = used.iter().any(|(n, a)| {
            *n == key.0 && (a == &key.1 || a.iter().zip(&key.1).all(|(x, y)| x == y || x == "x" || y == "x"))
        });
        if clash {
            return None;
        }
        used.push(key);
        let sign = if rng.gen_bool(0.6) { "+" } else { "-" };
        Some(format!("{sign}{}", atom_text(&p.name, &args)))
    };
    for _ in 0..rng.gen_range(1..=2) {
        if let Some(l) = pick(rng, true) {
            parts.push(l);
        }
    }
    if rng.gen_bool(0.4) {
        if let Some(l) = pick(rng, false) {
            parts.push(format!("!{l}"));
        }
    }
    parts.join(", ")
}

/// Outcome of one property sweep.
#[derive(Debug, Default)]
pub struct Tally {
    pub checked: usize,
    pub skipped: usize,
    pub mismatches: usize,
    pub first: Option<String>,
}

impl Tally {
    fn miss(&mut self, report: impl FnOnce() -> String) {
        self.mismatches += 1;
        if self.first.is_none() {
            self.first = Some(report());
        }
    }
}

fn event_set(t: &Transaction) -> BTreeSet<EventFact> {
    t.events().clone()
}

/// Induced events plus the effective base events, against the naive two-state diff.
pub fn event_semantics(seed: u64, n: usize, variant: deltalog::Variant) -> Tally {
    let mut tally = Tally::default();
    for i in 0..n as u64 {
        let mut r = rng(seed + i);
        let inst = instance(&mut r, Shape::default());
        let t = transaction(&mut r, &inst, 4);
        let db = deltalog::ensure_ic_aggregation(&inst.db);
        let aug = deltalog::compile(&inst.db, variant);
        let mut got = deltalog::induced_events(&aug, &t).expect("hierarchical instance");
        got.extend(event_set(&t.effective(&db.facts)));
        let want = deltalog::oracle::oracle_diff(&db, t.events());
        tally.checked += 1;
        if got != want {
            tally.miss(|| format!("{}\nT={t}\nwant {want:?}\ngot  {got:?}", inst.text));
        }
    }
    tally
}

/// Induced events and goal answers agree across all three variants.
pub fn variant_equivalence(seed: u64, n: usize) -> Tally {
    use deltalog::Variant;
    let mut tally = Tally::default();
    for i in 0..n as u64 {
        let mut r = rng(seed + i);
        let inst = instance(&mut r, Shape::default());
        let t = transaction(&mut r, &inst, 4);
        let goal = deltalog::parse_goal(&goal_text(&mut r, &inst)).unwrap();
        let outcomes: Vec<_> = Variant::ALL
            .iter()
            .map(|v| {
                let aug = deltalog::compile(&inst.db, *v);
                let events = deltalog::induced_events(&aug, &t).expect("hierarchical instance");
                let answers = deltalog::deduce(&aug, &t, &goal).ok();
                (events, answers)
            })
            .collect();
        tally.checked += 1;
        if outcomes.windows(2).any(|w| w[0] != w[1]) {
            tally.miss(|| format!("{}\nT={t}\n{outcomes:?}", inst.text));
        }
    }
    tally
}

/// Rendering of an explanation that ignores which fresh constant is which.
pub fn canonical(t: &BTreeSet<EventFact>, fresh: usize) -> String {
    let names: Vec<String> = (1..=fresh).map(|i| format!("_g{i}")).collect();
    let mut perms: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..fresh {
        let mut next = Vec::new();
        for p in &perms {
            for i in (0..fresh).filter(|i| !p.contains(i)) {
                next.push([p.clone(), vec![i]].concat());
            }
        }
        perms = next;
    }
    perms
        .iter()
        .map(|p| {
            let mut v: Vec<String> = t
                .iter()
                .map(|e| {
                    let mut s = e.to_string();
                    for (i, n) in names.iter().enumerate() {
                        s = s.replace(n, &format!("#{i}#"));
                    }
                    for (i, j) in p.iter().enumerate() {
                        s = s.replace(&format!("#{i}#"), &names[*j]);
                    }
                    s
                })
                .collect();
            v.sort();
            v.join(" ")
        })
        .min()
        .unwrap()
}

/// Abduction against subset enumeration on instances whose universe is small.
pub fn abduction_vs_oracle(seed: u64, n: usize, variant: deltalog::Variant, fresh: usize, max_universe: usize) -> Tally {
    use deltalog::oracle::{oracle_abduce, oracle_domain, EventUniverse};
    use deltalog::{abduce, check_explanation, AbductiveFramework, SearchBudget, SearchStatus};
    let shape = Shape { max_constants: 2, ..Shape::default() };
    let mut tally = Tally::default();
    let mut i = 0u64;
    while tally.checked < n {
        i += 1;
        let mut r = rng(seed + i);
        let inst = instance(&mut r, shape);
        let goal = deltalog::parse_goal(&goal_text(&mut r, &inst)).unwrap();
        let db = deltalog::ensure_ic_aggregation(&inst.db);
        let domain = oracle_domain(&db, &goal, fresh);
        let abducibles: Vec<_> = db
            .signature()
            .base_predicates()
            .flat_map(|(p, info)| [Polarity::Insert, Polarity::Delete].map(|pol| (p.clone(), info.arity, pol)))
            .collect();
        let universe = match EventUniverse::new(&db, &abducibles, &domain) {
            Ok(u) if u.len() <= max_universe => u,
            _ => {
                tally.skipped += 1;
                continue;
            }
        };
        let fw = AbductiveFramework::new(deltalog::compile(&inst.db, variant));
        let got = abduce(&fw, &goal, SearchBudget { fresh_constants: fresh, ..SearchBudget::default() })
            .unwrap_or_else(|e| panic!("{e}\n{}", inst.text));
        tally.checked += 1;
        let want: BTreeSet<String> =
            oracle_abduce(&db, &goal, &universe, &domain).iter().map(|t| canonical(t, fresh)).collect();
        let have: BTreeSet<String> = got.explanations.iter().map(|e| canonical(e.t.events(), fresh)).collect();
        let sound = got.explanations.iter().all(|e| check_explanation(&fw, &e.t, &goal).unwrap_or(false));
        if want != have || !sound || got.status != SearchStatus::Complete {
            let goal = deltalog::render_goal(&goal);
            tally.miss(|| format!("{}\ngoal {goal}\nwant {want:?}\ngot  {have:?} {:?}", inst.text, got.status));
        }
    }
    tally
}

/// Renames variables to `v1, v2, ...` by first occurrence, as `Rule::canonical` does.
pub fn canon_rules(rules: &[&str]) -> BTreeSet<String> {
    rules
        .iter()
        .map(|r| {
            let mut names: Vec<String> = Vec::new();
            let mut out = String::new();
            let mut depth = 0;
            let mut word = String::new();
            let mut flush = |word: &mut String, out: &mut String, depth: i32| {
                if depth > 0 && word.starts_with(|c: char| c.is_ascii_lowercase()) {
                    let i = names.iter().position(|n| n == word).unwrap_or_else(|| {
                        names.push(word.clone());
                        names.len() - 1
                    });
                    out.push_str(&format!("v{}", i + 1));
                } else {
                    out.push_str(word);
                }
                word.clear();
            };
            for c in r.chars() {
                if c.is_alphanumeric() || c == '_' {
                    word.push(c);
                    continue;
                }
                flush(&mut word, &mut out, depth);
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    _ => {}
                }
                out.push(c);
            }
            flush(&mut word, &mut out, depth);
            out
        })
        .collect()
}
