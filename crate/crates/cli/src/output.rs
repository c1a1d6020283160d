//! Human and JSON rendering of problem results.

use deltalog::{
    render_goal, EventFact, Explanation, Polarity, ProblemResult, SearchStatus, Substitution, Verdict, Witnesses,
};
use serde_json::{json, Value};

/// One result together with the predicate it was run for.
pub struct Record {
    pub target: Option<String>,
    pub result: ProblemResult,
}

pub fn status_name(s: SearchStatus) -> &'static str {
    match s {
        SearchStatus::Complete => "complete",
        SearchStatus::SolutionLimit => "solution-limit",
        SearchStatus::DepthLimit => "depth-limit",
    }
}

fn event_word(e: &EventFact) -> String {
    let word = match e.polarity {
        Polarity::Insert => "ins",
        Polarity::Delete => "del",
    };
    format!("{word} {}", e.atom)
}

/// `[ins App(Claire), ins Has_account(Claire)]`
pub fn transaction_text(e: &Explanation) -> String {
    let items: Vec<String> = e.t.events().iter().map(event_word).collect();
    format!("[{}]", items.join(", "))
}

fn answer_json(s: &Substitution) -> Value {
    let map: serde_json::Map<String, Value> = s.iter().map(|(k, v)| (k.to_string(), json!(v.to_string()))).collect();
    Value::Object(map)
}

fn witnesses_json(w: &Witnesses) -> Value {
    match w {
        Witnesses::None => json!({ "kind": "none", "items": [] }),
        Witnesses::Answers(a) => json!({ "kind": "answers", "items": a.iter().map(answer_json).collect::<Vec<_>>() }),
        Witnesses::Events(es) => {
            json!({ "kind": "events", "items": es.iter().map(|e| e.to_string()).collect::<Vec<_>>() })
        }
        Witnesses::Explanations(es) => json!({
            "kind": "transactions",
            "items": es.iter().map(|e| json!({
                "events": e.t.events().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "conditions": e.c.iter().map(|g| render_goal(g)).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }),
    }
}

pub fn record_json(r: &Record) -> Value {
    json!({
        "problem": r.result.problem.name(),
        "target": r.target,
        "verdict": r.result.verdict.name(),
        "status": r.result.status.map(status_name),
        "witnesses": witnesses_json(&r.result.witnesses),
    })
}

pub fn document(command: &str, verdict: Verdict, records: &[Record]) -> Value {
    json!({
        "command": command,
        "verdict": verdict.name(),
        "results": records.iter().map(record_json).collect::<Vec<_>>(),
    })
}

pub fn record_text(r: &Record) -> String {
    let mut out = String::new();
    let head = match &r.target {
        Some(t) => format!("{} {t}", r.result.problem),
        None => r.result.problem.to_string(),
    };
    out.push_str(&format!("{head}: {}", r.result.verdict.name()));
    if let Some(s) = r.result.status.filter(|s| *s != SearchStatus::Complete) {
        out.push_str(&format!(" ({})", status_name(s)));
    }
    out.push('\n');
    match &r.result.witnesses {
        Witnesses::None => {}
        Witnesses::Answers(a) => {
            for s in a {
                out.push_str(&format!("  {s}\n"));
            }
        }
        Witnesses::Events(es) => {
            for e in es {
                out.push_str(&format!("  {}\n", event_word(e)));
            }
        }
        Witnesses::Explanations(es) => {
            for e in es {
                out.push_str(&format!("  {}\n", transaction_text(e)));
            }
        }
    }
    out
}

/// Worst verdict first: a failure outranks an unknown.
pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Holds;
    for v in verdicts {
        out = match (out, v) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::UnknownBudget, _) | (_, Verdict::UnknownBudget) => Verdict::UnknownBudget,
            _ => Verdict::Holds,
        };
    }
    out
}
