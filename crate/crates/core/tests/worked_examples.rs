//! The published worked examples, reproduced exactly.

mod common;

use std::collections::BTreeSet;

use deltalog::{
    abduce, compile, deduce, parse_database, parse_goal, parse_transaction, transition_rules, AbductiveFramework,
    Database, Form, SearchBudget, Toolkit, ToolkitOptions, Variant, Verdict, Witnesses,
};

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn db(text: &str) -> Database {
    parse_database(text).unwrap()
}

/// Generated rules whose head is one of `heads`, e.g. `ins_P`.
fn rules_for(text: &str, variant: Variant, heads: &[&str]) -> BTreeSet<String> {
    compile(&db(text), variant)
        .all_rules()
        .map(|r| r.canonical().to_string())
        .filter(|r| heads.iter().any(|h| r.starts_with(&format!("{h}("))))
        .collect()
}

fn transactions(w: &Witnesses) -> Vec<String> {
    match w {
        Witnesses::Explanations(es) => es.iter().map(|e| e.t.to_string()).collect(),
        other => panic!("expected transactions, got {other:?}"),
    }
}

fn kit(text: &str) -> Toolkit {
    Toolkit::new(&db(text), ToolkitOptions::default())
}

#[test]
fn four_transition_rules_for_cont() {
    let d = db(&fixture("contract.ddb"));
    let got: BTreeSet<String> = transition_rules(&d.rules[0]).iter().map(|r| r.canonical().to_string()).collect();
    let want = [
        "new_Cont(x) <- Sign(x), not del_Sign(x), not Fail_ex(x), not ins_Fail_ex(x)",
        "new_Cont(x) <- Sign(x), not del_Sign(x), del_Fail_ex(x)",
        "new_Cont(x) <- ins_Sign(x), not Fail_ex(x), not ins_Fail_ex(x)",
        "new_Cont(x) <- ins_Sign(x), del_Fail_ex(x)",
    ];
    assert_eq!(got, common::canon_rules(&want));
}

#[test]
fn augmented_contract_database() {
    let got = rules_for(&fixture("contract.ddb"), Variant::Simplified, &["ins_Cont", "del_Cont"]);
    let want = [
        "ins_Cont(x) <- Sign(x), not del_Sign(x), del_Fail_ex(x)",
        "ins_Cont(x) <- ins_Sign(x), not Fail_ex(x), not ins_Fail_ex(x)",
        "ins_Cont(x) <- ins_Sign(x), del_Fail_ex(x)",
        "del_Cont(x) <- Cont(x), ins_Fail_ex(x)",
        "del_Cont(x) <- del_Sign(x), not Fail_ex(x)",
    ];
    assert_eq!(got, common::canon_rules(&want));
}

#[test]
fn plain_rules_for_chain() {
    let text = fixture("chain.ddb");
    let events = rules_for(&text, Variant::Plain, &["ins_P", "ins_R", "del_R"]);
    assert_eq!(
        events,
        common::canon_rules(&["ins_P(x) <- new_P(x), not P(x)", "ins_R(x) <- new_R(x), not R(x)", "del_R(x) <- R(x), not new_R(x)"])
    );
    let transitions = rules_for(&text, Variant::Plain, &["new_P", "new_R"]);
    assert_eq!(
        transitions,
        common::canon_rules(&[
            "new_P(x) <- Q(x), not del_Q(x), R(x), not del_R(x)",
            "new_P(x) <- Q(x), not del_Q(x), ins_R(x)",
            "new_P(x) <- ins_Q(x), R(x), not del_R(x)",
            "new_P(x) <- ins_Q(x), ins_R(x)",
            "new_R(x) <- S(x), not del_S(x)",
            "new_R(x) <- ins_S(x)",
        ])
    );
}

#[test]
fn kuchenhoff_rules_for_chain() {
    let got = rules_for(&fixture("chain.ddb"), Variant::Kuchenhoff, &["ins_P", "ins_R", "del_R"]);
    let want = [
        "ins_P(x) <- Q(x), not del_Q(x), ins_R(x), not P(x)",
        "ins_P(x) <- ins_Q(x), R(x), not del_R(x), not P(x)",
        "ins_P(x) <- ins_Q(x), ins_R(x), not P(x)",
        "ins_R(x) <- ins_S(x)",
        "del_R(x) <- del_S(x)",
    ];
    assert_eq!(got, common::canon_rules(&want));
}

#[test]
fn simplified_rules_for_chain() {
    let got = rules_for(&fixture("chain.ddb"), Variant::Simplified, &["ins_P", "ins_R", "del_R"]);
    let want = [
        "ins_P(x) <- Q(x), not del_Q(x), ins_R(x)",
        "ins_P(x) <- ins_Q(x), R(x), not del_R(x)",
        "ins_P(x) <- ins_Q(x), ins_R(x)",
        "ins_R(x) <- ins_S(x)",
        "del_R(x) <- del_S(x)",
    ];
    assert_eq!(got, common::canon_rules(&want));
}

#[test]
fn deleting_fail_ex_inserts_cont() {
    let aug = compile(&db(&fixture("contract.ddb")), Variant::Simplified);
    let t = parse_transaction("-Fail_ex(John)").unwrap();
    let answers = deduce(&aug, &t, &parse_goal("+Cont(x)").unwrap()).unwrap();
    let shown: Vec<String> = answers.iter().map(|s| s.to_string()).collect();
    assert_eq!(shown, ["{x=John}"]);
}

#[test]
fn deleting_an_account_violates_ic2() {
    let k = kit(&format!("{}\nfact App(Peter).\nfact Has_account(Peter).", fixture("employment.ddb")));
    let r = k.ic_check(&parse_transaction("-Has_account(Peter)").unwrap()).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    let Witnesses::Events(es) = &r.witnesses else { panic!("{:?}", r.witnesses) };
    assert!(es.iter().any(|e| e.to_string() == "+Ic2(Peter)"), "{es:?}");
}

#[test]
fn single_explanation_for_inserting_cont() {
    let fw = AbductiveFramework::new(compile(&db(&fixture("contract.ddb")), Variant::Simplified));
    let a = abduce(&fw, &parse_goal("+Cont(John)").unwrap(), SearchBudget::default()).unwrap();
    let got: Vec<String> = a.explanations.iter().map(|e| e.t.to_string()).collect();
    assert_eq!(got, ["{-Fail_ex(John)}"]);
}

#[test]
fn sign_without_contract() {
    let fw = AbductiveFramework::new(compile(&db(&fixture("contract.ddb")), Variant::Simplified));
    let a = abduce(&fw, &parse_goal("+Sign(Mary), !+Cont(Mary)").unwrap(), SearchBudget::default()).unwrap();
    let got: Vec<String> = a.explanations.iter().map(|e| e.t.to_string()).collect();
    assert_eq!(got, ["{+Fail_ex(Mary), +Sign(Mary)}"]);
}

#[test]
fn claire_needs_an_account() {
    let r = kit(&fixture("employment.ddb")).ic_maintain(&parse_transaction("+App(Claire)").unwrap()).unwrap();
    assert_eq!(transactions(&r.witnesses), ["{+App(Claire), +Has_account(Claire)}"]);
}

#[test]
fn faulty_lamp_diagnoses() {
    let aug = compile(&db(&fixture("lamp.ddb")), Variant::Simplified);
    let fw = AbductiveFramework::new(aug).with_abducible_predicates(["Broken", "Power_failure", "Dry_cell"]);
    let a = abduce(&fw, &parse_goal("+Faulty_lamp").unwrap(), SearchBudget::default()).unwrap();
    let got: BTreeSet<String> = a.explanations.iter().map(|e| e.t.to_string()).collect();
    for want in ["{+Broken(L1)}", "{+Dry_cell(B1), +Power_failure(C1)}", "{+Power_failure(_g1)}"] {
        assert!(got.contains(want), "missing {want} in {got:?}");
    }
    // A circuit with a loaded battery needs its cell drained first.
    assert!(!got.contains("{+Power_failure(C1)}"));
}

#[test]
fn validating_the_flawed_schema_step_by_step() {
    let flawed = fixture("flawed.ddb");
    let without = |text: &str, prefixes: &[&str]| -> String {
        text.lines().filter(|l| !prefixes.iter().any(|p| l.starts_with(p))).collect::<Vec<_>>().join("\n")
    };

    assert_eq!(kit(&flawed).check_satisfiability().unwrap().verdict, Verdict::Fails);

    let step1 = without(&flawed, &["ic Ic3", "ic Ic5"]);
    let k = kit(&step1);
    assert_eq!(k.check_satisfiability().unwrap().verdict, Verdict::Holds);
    assert_eq!(k.check_absolute_redundancy("Ic4").unwrap().verdict, Verdict::Holds);
    assert_eq!(k.check_absolute_redundancy("Ic1").unwrap().verdict, Verdict::Fails);

    let step2 = without(&step1, &["rule App"]);
    assert_eq!(kit(&step2).check_view_liveliness("Emp").unwrap().verdict, Verdict::Fails);

    let step3 = step2.replace("ic Ic1(x) <- App(x), Sign(x).", "ic Ic1(x) <- App(x), Sign(x), not Has_account(x).");
    assert_ne!(step3, step2);
    let k = kit(&step3);
    assert_eq!(k.check_view_liveliness("Emp").unwrap().verdict, Verdict::Holds);
    assert_eq!(k.check_relative_redundancy("Ic1").unwrap().verdict, Verdict::Holds);
    assert_eq!(k.check_relative_redundancy("Ic2").unwrap().verdict, Verdict::Fails);
    assert_eq!(k.validate_condition("Cond1").unwrap().verdict, Verdict::Holds);
    assert_eq!(k.validate_condition("Cond2").unwrap().verdict, Verdict::Fails);
}

#[test]
fn final_schema_passes_every_check() {
    let k = kit(&fixture("employment.ddb"));
    assert_eq!(k.check_satisfiability().unwrap().verdict, Verdict::Holds);
    for ic in ["Ic2", "Ic4"] {
        assert_eq!(k.check_absolute_redundancy(ic).unwrap().verdict, Verdict::Fails, "{ic}");
        assert_eq!(k.check_relative_redundancy(ic).unwrap().verdict, Verdict::Fails, "{ic}");
    }
    for view in ["Some_cand", "Emp", "Cont"] {
        assert_eq!(k.check_view_liveliness(view).unwrap().verdict, Verdict::Holds, "{view}");
    }
    assert_eq!(k.validate_condition("Cond1").unwrap().verdict, Verdict::Holds);
}

#[test]
fn event_forms_render_with_prefixes() {
    let rules = rules_for(&fixture("contract.ddb"), Variant::Plain, &["new_Cont"]);
    assert_eq!(rules.len(), 4);
    assert!(Form::Ins.is_event() && !Form::New.is_event());
}
