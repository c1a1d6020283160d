//! Schema, goal and transaction syntax.
//!
//! ```text
//! db    := stmt* ;
//! stmt  := ("fact" atom | "rule" rule | "ic" rule | "cond" rule) "." ;
//! rule  := atom "<-" lit ("," lit)* ;
//! lit   := ["not"] atom ;
//! atom  := UIDENT [ "(" term ("," term)* ")" ] ;
//! term  := UIDENT | LIDENT ;
//! ```
//!
//! Goals are comma-separated `[!][+|-]atom` conjuncts. Hyphens inside
//! identifiers are read as underscores.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{
    Atom, Database, EventFact, Form, GroundAtom, Literal, Polarity, Rule, RuleKind, SchemaNote, Term,
    Transaction, TransactionError, Var, IC,
};

/// 1-based position of a token in the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("{span}: {source}")]
    Transaction { span: SourceSpan, source: TransactionError },
}

impl ParseError {
    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::Syntax { span, .. } | ParseError::Transaction { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Upper(String),
    Lower(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Arrow,
    Plus,
    Minus,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Upper(s) | Tok::Lower(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Arrow => f.write_str("`<-`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = SourceSpan { line, column: col, length: 1 };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
                continue;
            }
            '(' => out.push((Tok::LParen, start)),
            ')' => out.push((Tok::RParen, start)),
            ',' => out.push((Tok::Comma, start)),
            '.' => out.push((Tok::Dot, start)),
            '+' => out.push((Tok::Plus, start)),
            '-' => out.push((Tok::Minus, start)),
            '!' => out.push((Tok::Bang, start)),
            '<' => {
                if chars.get(i + 1) == Some(&'-') {
                    out.push((Tok::Arrow, SourceSpan { length: 2, ..start }));
                    i += 2;
                    col += 2;
                    continue;
                }
                return Err(syntax(start, "expected `<-`"));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                let begin = i;
                while i < chars.len() {
                    let d = chars[i];
                    if is_ident_char(d) {
                        s.push(d);
                    } else if d == '-'
                        && !s.is_empty()
                        && chars.get(i + 1).is_some_and(|n| n.is_ascii_alphanumeric())
                    {
                        s.push('_');
                    } else {
                        break;
                    }
                    i += 1;
                }
                let len = i - begin;
                let span = SourceSpan { length: len, ..start };
                col += len;
                if c.is_ascii_lowercase() {
                    out.push((Tok::Lower(s), span));
                } else {
                    if c == '_' && s.len() == 1 {
                        return Err(syntax(span, "`_` is not a valid identifier"));
                    }
                    out.push((Tok::Upper(s), span));
                }
                continue;
            }
            other => return Err(syntax(start, &format!("unexpected character `{other}`"))),
        }
        i += 1;
        col += 1;
    }
    out.push((Tok::Eof, SourceSpan { line, column: col, length: 0 }));
    Ok(out)
}

fn syntax(span: SourceSpan, message: &str) -> ParseError {
    ParseError::Syntax { span, message: message.to_string() }
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<SourceSpan, ParseError> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            Err(syntax(self.span(), &format!("expected {want}, found {}", self.peek())))
        }
    }

    fn atom(&mut self, form: Form) -> Result<(Atom, SourceSpan), ParseError> {
        let (tok, span) = self.bump();
        let name = match tok {
            Tok::Upper(s) => s,
            other => return Err(syntax(span, &format!("expected predicate name, found {other}"))),
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                let (tok, span) = self.bump();
                args.push(match tok {
                    Tok::Upper(s) => Term::constant(&s),
                    Tok::Lower(s) => Term::Var(Var::new(&s)),
                    other => return Err(syntax(span, &format!("expected term, found {other}"))),
                });
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RParen => {
                        self.bump();
                        break;
                    }
                    other => {
                        return Err(syntax(self.span(), &format!("expected `,` or `)`, found {other}")))
                    }
                }
            }
        }
        Ok((Atom::new(&name, form, args), span))
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let positive = !matches!(self.peek(), Tok::Lower(s) if s == "not");
        if !positive {
            self.bump();
        }
        let (atom, _) = self.atom(Form::Old)?;
        Ok(Literal { positive, atom })
    }

    fn rule_body(&mut self) -> Result<Vec<Literal>, ParseError> {
        self.expect(Tok::Arrow)?;
        let mut body = vec![self.literal()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            body.push(self.literal()?);
        }
        Ok(body)
    }
}

/// Parses a schema file.
pub fn parse_database(text: &str) -> Result<Database, ParseError> {
    let mut p = Parser::new(text)?;
    let mut db = Database::new();
    loop {
        let (tok, kw_span) = p.bump();
        let kw = match tok {
            Tok::Eof => break,
            Tok::Lower(s) if matches!(s.as_str(), "fact" | "rule" | "ic" | "cond") => s,
            other => {
                return Err(syntax(kw_span, &format!("expected `fact`, `rule`, `ic` or `cond`, found {other}")))
            }
        };
        if kw == "fact" {
            let (atom, span) = p.atom(Form::Old)?;
            let Some(g) = atom.to_ground() else {
                return Err(syntax(span, "facts must be ground"));
            };
            p.expect(Tok::Dot)?;
            db.facts.insert(g);
            continue;
        }
        let (head, span) = p.atom(Form::Old)?;
        let body = p.rule_body()?;
        p.expect(Tok::Dot)?;
        let kind = match kw.as_str() {
            "rule" => RuleKind::Deductive,
            "cond" => RuleKind::Condition,
            _ if head.name.as_str() == IC
                && head.args.is_empty()
                && body.len() == 1
                && body[0].positive =>
            {
                RuleKind::IcAggregation
            }
            _ => RuleKind::Integrity,
        };
        let mut rule = Rule { kind, head, body, span: Some(span) };
        if kind == RuleKind::Integrity {
            normalize_ic_head(&mut rule, &mut db.notes);
        }
        db.rules.push(rule);
    }
    Ok(db)
}

/// Drops head arguments of an integrity rule that have no positive body
/// occurrence, so that `Ic3(x) <- not Some_cand` becomes `Ic3 <- not Some_cand`.
fn normalize_ic_head(rule: &mut Rule, notes: &mut Vec<SchemaNote>) {
    let unsafe_vars = rule.unsafe_vars();
    let before = rule.head.args.len();
    rule.head.args.retain(|t| match t {
        Term::Var(v) => !unsafe_vars.contains(v),
        Term::Const(_) => true,
    });
    if rule.head.args.len() != before {
        notes.push(SchemaNote {
            span: rule.span,
            message: format!(
                "integrity rule head normalized to `{}`: unbound head arguments dropped",
                rule.head
            ),
        });
    }
}

/// A conjunction of literals. Duplicate conjuncts are removed, order kept.
pub type Goal = Vec<Literal>;

/// Parses `[!][+|-]atom, ...`. The empty string is the empty goal.
pub fn parse_goal(text: &str) -> Result<Goal, ParseError> {
    Ok(parse_goal_spanned(text)?.into_iter().map(|(l, _)| l).collect())
}

fn parse_goal_spanned(text: &str) -> Result<Vec<(Literal, SourceSpan)>, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out: Vec<(Literal, SourceSpan)> = Vec::new();
    if *p.peek() == Tok::Eof {
        return Ok(out);
    }
    loop {
        let start = p.span();
        let positive = if *p.peek() == Tok::Bang {
            p.bump();
            false
        } else {
            true
        };
        let form = match p.peek() {
            Tok::Plus => {
                p.bump();
                Form::Ins
            }
            Tok::Minus => {
                p.bump();
                Form::Del
            }
            _ => Form::Old,
        };
        let (atom, _) = p.atom(form)?;
        let lit = Literal { positive, atom };
        if !out.iter().any(|(l, _)| *l == lit) {
            out.push((lit, start));
        }
        match p.peek() {
            Tok::Comma => {
                p.bump();
            }
            Tok::Eof => break,
            other => return Err(syntax(p.span(), &format!("expected `,` or end of input, found {other}"))),
        }
    }
    Ok(out)
}

/// Parses a transaction written as positive ground `+P(..)` / `-P(..)` conjuncts.
pub fn parse_transaction(text: &str) -> Result<Transaction, ParseError> {
    let mut events = Vec::new();
    let mut first_span = None;
    for (lit, span) in parse_goal_spanned(text)? {
        first_span.get_or_insert(span);
        let polarity = match (lit.positive, lit.atom.form) {
            (true, Form::Ins) => Polarity::Insert,
            (true, Form::Del) => Polarity::Delete,
            _ => return Err(syntax(span, "transaction entries must be `+P(..)` or `-P(..)`")),
        };
        let Some(atom) = lit.atom.to_ground() else {
            return Err(syntax(span, "transaction entries must be ground"));
        };
        events.push(EventFact { polarity, atom });
    }
    Transaction::new(events).map_err(|source| ParseError::Transaction {
        span: first_span.unwrap_or(SourceSpan { line: 1, column: 1, length: 0 }),
        source,
    })
}

fn keyword(kind: RuleKind) -> Option<&'static str> {
    match kind {
        RuleKind::Deductive => Some("rule"),
        RuleKind::Integrity | RuleKind::IcAggregation => Some("ic"),
        RuleKind::Condition => Some("cond"),
        _ => None,
    }
}

/// Canonical text: sorted facts, then rules grouped by kind, head and body.
/// Generated rules (transition and event rules) are printed without a
/// keyword, using the `new_P`, `ins_P` and `del_P` spellings.
pub fn render_database(db: &Database) -> String {
    render_rules(&db.facts, db.rules.iter())
}

pub(crate) fn render_rules<'a>(facts: &BTreeSet<GroundAtom>, rules: impl Iterator<Item = &'a Rule>) -> String {
    let mut out = String::new();
    for f in facts {
        out.push_str(&format!("fact {f}.\n"));
    }
    let mut rules: Vec<&Rule> = rules.collect();
    rules.sort();
    for r in rules {
        match keyword(r.kind) {
            Some(kw) => out.push_str(&format!("{kw} {r}.\n")),
            None => out.push_str(&format!("{r}.\n")),
        }
    }
    out
}

/// Renders a goal in the `[!][+|-]atom` syntax accepted by [`parse_goal`].
pub fn render_goal(goal: &[Literal]) -> String {
    goal.iter()
        .map(|l| {
            let sign = match l.atom.form {
                Form::Ins => "+",
                Form::Del => "-",
                _ => "",
            };
            let bang = if l.positive { "" } else { "!" };
            let plain = GroundOrNot(&l.atom);
            format!("{bang}{sign}{plain}")
        })
        .collect::<Vec<_>>()
        .join(", ")
}

struct GroundOrNot<'a>(&'a Atom);

impl fmt::Display for GroundOrNot<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Atom { form: Form::Old, ..self.0.clone() })
    }
}
