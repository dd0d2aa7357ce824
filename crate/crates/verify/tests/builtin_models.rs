//! Verdicts, witnesses, and determinism of the built-in handshake models.

use ztdn_verify::explore::{eval_predicate, initial_state, replay};
use ztdn_verify::model::{Predicate, QueryKind};
use ztdn_verify::{builtin, check, describe_witness, CheckOptions, Network, Verdict, BUILTIN_MODELS};

fn load(name: &str) -> Network {
    ztdn_verify::parse_network(builtin(name).expect("builtin source")).expect("builtin parses")
}

fn outcome<'a>(
    outcomes: &'a [ztdn_verify::QueryOutcome],
    name: &str,
) -> &'a ztdn_verify::QueryOutcome {
    outcomes
        .iter()
        .find(|o| o.name == name)
        .unwrap_or_else(|| panic!("no query named `{name}`"))
}

fn witness_text(net: &Network, o: &ztdn_verify::QueryOutcome) -> String {
    o.witness
        .as_ref()
        .map(|w| describe_witness(net, w).join("\n"))
        .unwrap_or_default()
}

#[test]
fn clean_model_answers_every_query_with_holds() {
    let net = load("ztdn");
    let outcomes = check(&net, CheckOptions::default());
    assert_eq!(outcomes.len(), 3);
    for o in &outcomes {
        assert!(o.complete, "exploration should finish under the default bound");
        assert_eq!(
            o.verdict,
            Verdict::Holds,
            "query `{}` unexpectedly {}; witness:\n{}",
            o.name,
            o.verdict,
            witness_text(&net, o)
        );
    }
    // The reachability verdict carries a replayable path to the state it found.
    let reauth = outcome(&outcomes, "reauth-reachable");
    let witness = reauth.witness.as_ref().expect("reachability holds with a witness");
    let end = replay(&net, witness).expect("witness replays from the initial state");
    let user = net.automaton_index("user").unwrap();
    let loc = net.automata[user].location_index("ReAuthenticating").unwrap();
    assert_eq!(end.locations[user], loc);
}

#[test]
fn tampered_model_exposes_access_during_tampering_but_never_deadlocks() {
    let net = load("ztdn-tamper");
    let outcomes = check(&net, CheckOptions::default());
    assert_eq!(outcomes.len(), 4);
    assert!(outcomes.iter().all(|o| o.complete));

    assert_eq!(outcome(&outcomes, "deadlock").verdict, Verdict::Holds);
    assert_eq!(outcome(&outcomes, "reauth-reachable").verdict, Verdict::Holds);
    assert_eq!(outcome(&outcomes, "tamper-reachable").verdict, Verdict::Holds);

    let safety = outcome(&outcomes, "tamper-safety");
    assert_eq!(
        safety.verdict,
        Verdict::Violated,
        "a user can hold access while the policy is being tampered with"
    );
    let witness = safety.witness.as_ref().expect("violations carry a witness");
    let end = replay(&net, witness).expect("witness replays");

    // The violating state really does pair granted access with tampering.
    let user = net.automaton_index("user").unwrap();
    let accessing = net.automata[user].location_index("AccessingResource").unwrap();
    let tampered = net.var_index("tampered").unwrap();
    assert_eq!(end.locations[user], accessing);
    assert_eq!(end.vars[tampered], 1);
}

#[test]
fn tamper_variant_differs_only_by_the_fault_edge_and_its_query() {
    let strip = |src: &str| -> Vec<String> {
        src.lines()
            .map(|l| l.split('#').next().unwrap_or("").trim().to_string())
            .filter(|l| !l.is_empty())
            .collect()
    };
    let base = strip(builtin("ztdn").unwrap());
    let tamper = strip(builtin("ztdn-tamper").unwrap());

    let missing: Vec<&String> = base.iter().filter(|l| !tamper.contains(l)).collect();
    assert!(missing.is_empty(), "clean-model lines absent from the variant: {missing:?}");

    let mut extra: Vec<&str> = Vec::new();
    let mut base_pool = base.clone();
    for line in &tamper {
        match base_pool.iter().position(|b| b == line) {
            Some(i) => {
                base_pool.remove(i);
            }
            None => extra.push(line),
        }
    }
    assert_eq!(
        extra,
        vec![
            "edge Idle Idle guard tampered == 0 do tampered := 1",
            "query tamper-reachable reachable tampered == 1",
        ]
    );
}

#[test]
fn exploration_is_deterministic_and_fits_a_small_state_space() {
    for (name, expected_states) in [("ztdn", 50), ("ztdn-tamper", 124)] {
        let net = load(name);
        let first = check(&net, CheckOptions::default());
        let second = check(&net, CheckOptions::default());
        assert_eq!(first, second, "{name}: repeated runs must agree exactly");
        for o in &first {
            assert_eq!(
                o.states_explored, expected_states,
                "{name}: the reachable state count is pinned; a change means the semantics moved"
            );
        }
    }
}

#[test]
fn every_witness_replays_without_gaps() {
    for name in BUILTIN_MODELS {
        let net = load(name);
        for o in check(&net, CheckOptions::default()) {
            if let Some(w) = &o.witness {
                assert!(replay(&net, w).is_some(), "{name}/{}: witness must replay", o.name);
                let lines = describe_witness(&net, w);
                assert_eq!(lines.len(), w.steps.len(), "{name}/{}: no replay gaps", o.name);
            }
        }
    }
}

#[test]
fn a_tiny_state_bound_returns_unknown_not_a_guess() {
    let net = load("ztdn");
    let outcomes = check(&net, CheckOptions { max_states: 10 });
    for o in &outcomes {
        assert!(!o.complete);
        assert_ne!(o.verdict, Verdict::Violated, "nothing is violated in the clean model");
    }
    assert_eq!(outcome(&outcomes, "deadlock").verdict, Verdict::Unknown);
    assert_eq!(outcome(&outcomes, "tamper-safety").verdict, Verdict::Unknown);
}

#[test]
fn the_initial_state_is_everyone_idle_with_zero_clocks() {
    let net = load("ztdn");
    let init = initial_state(&net);
    for (ai, a) in net.automata.iter().enumerate() {
        assert_eq!(a.locations[init.locations[ai]], "Idle");
    }
    assert!(init.clocks.iter().all(|&c| c == 0));
    let tampered = net.var_index("tampered").unwrap();
    let pred = Predicate::Var { var: tampered, cmp: ztdn_verify::model::Cmp::Eq, value: 0 };
    assert!(eval_predicate(&net, &init, &pred));
    // Sanity: the fourth query only exists in the tamper variant.
    assert!(matches!(net.queries[0].kind, QueryKind::DeadlockFree));
}
