//! Event rules, deduction and abduction for deductive database schemas.
//!
//! A schema is compiled into an augmented database whose event rules define
//! exactly how derived predicates change when a transaction of base events
//! is applied. Deduction computes the changes a transaction induces;
//! abduction computes the transactions that induce requested changes.

pub mod abduce;
pub mod compile;
pub mod deduce;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod problems;
pub mod schema;
pub mod subst;

pub use abduce::{
    abduce, abduce_with, check_explanation, minimal_filter, AbduceError, AbduceOptions, Abduction, AbductiveFramework,
    Explanation, SearchBudget, SearchStatus,
};
pub use compile::{augment, compile, event_rules, expand_new_state_literal, transition_rules, AugmentedDatabase, Variant};
pub use deduce::{deduce, induced_events, materialize, AnswerSet, DeduceError, Deducer};
pub use model::{
    Atom, Database, EventFact, Form, GroundAtom, Literal, Polarity, PredClass, Rule, RuleKind, Signature, Sym, Term,
    Transaction, TransactionError, Var, IC,
};
pub use parser::{parse_database, parse_goal, parse_transaction, render_database, render_goal, Goal, ParseError, SourceSpan};
pub use problems::{Mode, ProblemError, ProblemKind, ProblemResult, Toolkit, ToolkitOptions, Verdict, Witnesses};
pub use schema::{dependency_order, ensure_ic_aggregation, validate_schema, CycleError, ValidationReport, Violation, ViolationKind};
pub use subst::Substitution;
