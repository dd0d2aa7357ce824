//! Cross-checks the explorer against an independent re-implementation.
//!
//! The oracle below re-derives the semantics from the model types alone: it
//! saturates clocks at `ceiling + 3` instead of `ceiling + 1`, walks the
//! space depth-first instead of breadth-first, and keeps plain hash sets
//! instead of interning tables. Because every comparison constant is capped
//! by the clock ceilings, both explorations must agree on every verdict —
//! any disagreement means one of the two transition semantics is wrong.

use std::collections::HashSet;

use ztdn_verify::explore::{check, CheckOptions};
use ztdn_verify::model::{Cmp, GuardAtom, Network, Predicate, QueryKind, Sync, Update};
use ztdn_verify::{builtin, parse_network, Verdict, BUILTIN_MODELS};

#[derive(Clone, PartialEq, Eq, Hash)]
struct OState {
    locs: Vec<usize>,
    vars: Vec<i64>,
    clocks: Vec<i64>,
}

const ORACLE_SLACK: i64 = 3;

fn o_init(net: &Network) -> OState {
    OState {
        locs: net.automata.iter().map(|a| a.init).collect(),
        vars: net.vars.iter().map(|v| v.init).collect(),
        clocks: net.automata.iter().flat_map(|a| a.clocks.iter().map(|_| 0)).collect(),
    }
}

fn o_base(net: &Network, automaton: usize) -> usize {
    net.automata[..automaton].iter().map(|a| a.clocks.len()).sum()
}

fn o_cmp(cmp: Cmp, l: i64, r: i64) -> bool {
    match cmp {
        Cmp::Le => l <= r,
        Cmp::Ge => l >= r,
        Cmp::Eq => l == r,
    }
}

fn o_guards(net: &Network, s: &OState, ai: usize, guards: &[GuardAtom]) -> bool {
    guards.iter().all(|g| match *g {
        GuardAtom::Clock { clock, cmp, bound } => o_cmp(cmp, s.clocks[o_base(net, ai) + clock], bound),
        GuardAtom::Var { var, cmp, value } => o_cmp(cmp, s.vars[var], value),
    })
}

fn o_apply(net: &Network, s: &mut OState, ai: usize, updates: &[Update]) -> bool {
    for u in updates {
        match *u {
            Update::ResetClock { clock } => s.clocks[o_base(net, ai) + clock] = 0,
            Update::SetVar { var, value } => {
                if value < net.vars[var].min || value > net.vars[var].max {
                    return false;
                }
                s.vars[var] = value;
            }
        }
    }
    true
}

fn o_inv(net: &Network, s: &OState, ai: usize) -> bool {
    net.automata[ai].invariants[s.locs[ai]]
        .iter()
        .all(|&(c, b)| s.clocks[o_base(net, ai) + c] <= b)
}

fn o_succs(net: &Network, s: &OState) -> Vec<OState> {
    o_succs_slack(net, s, ORACLE_SLACK)
}

fn o_succs_slack(net: &Network, s: &OState, slack: i64) -> Vec<OState> {
    let mut out = Vec::new();
    // Local edges.
    for (ai, a) in net.automata.iter().enumerate() {
        for e in &a.edges {
            if e.sync != Sync::None || s.locs[ai] != e.from || !o_guards(net, s, ai, &e.guards) {
                continue;
            }
            let mut n = s.clone();
            n.locs[ai] = e.to;
            if o_apply(net, &mut n, ai, &e.updates) && o_inv(net, &n, ai) {
                out.push(n);
            }
        }
    }
    // Handshakes: every sender/receiver pair over every channel.
    for (si, sa) in net.automata.iter().enumerate() {
        for se in &sa.edges {
            let Sync::Send(ch) = se.sync else { continue };
            if s.locs[si] != se.from || !o_guards(net, s, si, &se.guards) {
                continue;
            }
            for (ri, ra) in net.automata.iter().enumerate() {
                if ri == si {
                    continue;
                }
                for re in &ra.edges {
                    if re.sync != Sync::Recv(ch)
                        || s.locs[ri] != re.from
                        || !o_guards(net, s, ri, &re.guards)
                    {
                        continue;
                    }
                    let mut n = s.clone();
                    n.locs[si] = se.to;
                    n.locs[ri] = re.to;
                    if o_apply(net, &mut n, si, &se.updates)
                        && o_apply(net, &mut n, ri, &re.updates)
                        && o_inv(net, &n, si)
                        && o_inv(net, &n, ri)
                    {
                        out.push(n);
                    }
                }
            }
        }
    }
    // Unit delay, saturating `slack` past each ceiling.
    let mut n = s.clone();
    let mut moved = false;
    let mut idx = 0;
    for a in &net.automata {
        for c in &a.clocks {
            if n.clocks[idx] < c.ceiling + slack {
                n.clocks[idx] += 1;
                moved = true;
            }
            idx += 1;
        }
    }
    if moved && (0..net.automata.len()).all(|ai| o_inv(net, &n, ai)) {
        out.push(n);
    }
    out
}

fn o_pred(net: &Network, s: &OState, p: &Predicate) -> bool {
    match p {
        Predicate::AtLoc { automaton, location } => s.locs[*automaton] == *location,
        Predicate::Var { var, cmp, value } => o_cmp(*cmp, s.vars[*var], *value),
        Predicate::Clock { automaton, clock, cmp, value } => {
            o_cmp(*cmp, s.clocks[o_base(net, *automaton) + *clock], *value)
        }
        Predicate::Not(i) => !o_pred(net, s, i),
        Predicate::And(a, b) => o_pred(net, s, a) && o_pred(net, s, b),
        Predicate::Or(a, b) => o_pred(net, s, a) || o_pred(net, s, b),
        Predicate::Implies(a, b) => !o_pred(net, s, a) || o_pred(net, s, b),
    }
}

struct OracleRun {
    states: Vec<OState>,
    has_deadlock: bool,
}

fn o_explore(net: &Network) -> OracleRun {
    let mut seen: HashSet<OState> = HashSet::new();
    let mut order: Vec<OState> = Vec::new();
    let mut stack = vec![o_init(net)];
    let mut has_deadlock = false;
    while let Some(s) = stack.pop() {
        if !seen.insert(s.clone()) {
            continue;
        }
        let succs = o_succs(net, &s);
        if succs.is_empty() {
            has_deadlock = true;
        }
        order.push(s);
        stack.extend(succs);
        assert!(seen.len() <= 2_000_000, "oracle exploration ran away");
    }
    OracleRun { states: order, has_deadlock }
}

fn o_verdict(net: &Network, run: &OracleRun, kind: &QueryKind) -> Verdict {
    let holds = match kind {
        QueryKind::DeadlockFree => !run.has_deadlock,
        QueryKind::Safety(p) => run.states.iter().all(|s| o_pred(net, s, p)),
        QueryKind::Reachable(p) => run.states.iter().any(|s| o_pred(net, s, p)),
    };
    if holds {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

fn assert_agreement(name: &str, src: &str) {
    let net = parse_network(src).unwrap_or_else(|e| panic!("{name}: {e}"));
    let outcomes = check(&net, CheckOptions::default());
    let run = o_explore(&net);
    for (q, o) in net.queries.iter().zip(&outcomes) {
        assert!(o.complete, "{name}/{}: exploration must be exhaustive here", q.name);
        let expected = o_verdict(&net, &run, &q.kind);
        assert_eq!(
            o.verdict, expected,
            "{name}/{}: explorer and oracle disagree (oracle saw {} states)",
            q.name,
            run.states.len()
        );
    }
}

#[test]
fn oracle_agrees_on_the_builtin_models() {
    for name in BUILTIN_MODELS {
        assert_agreement(name, builtin(name).unwrap());
    }
}

#[test]
fn oracle_agrees_that_a_blocked_invariant_with_no_edges_deadlocks() {
    assert_agreement(
        "stuck",
        "\
system stuck
automaton lone
clock x 1
init Stuck
inv Stuck x <= 1
query dead deadlock_free
query time-passes reachable lone.x >= 1
",
    );
}

#[test]
fn oracle_agrees_on_guards_that_stay_enabled_past_saturation() {
    // The guard sits exactly at the ceiling, so firing must remain possible
    // at and beyond the cap — under either saturation point.
    assert_agreement(
        "cycle",
        "\
system cycle
automaton m
clock x 2
init A
edge A B guard x >= 2
edge B A do x := 0
query alive deadlock_free
query b-reachable reachable m @ B
query stays-low safety m.x <= 2 || m @ A
",
    );
}

#[test]
fn oracle_agrees_on_sender_before_receiver_updates() {
    // Both sides of the handshake write the same variable; the receiver's
    // assignment must land last, so 1 is never observable.
    assert_agreement(
        "order",
        "\
system order
channel c
var v 0 2 init 0
automaton s
init S0
edge S0 S1 sync c! do v := 1
automaton r
init R0
edge R0 R1 sync c? do v := 2
query two reachable v == 2
query one-hidden safety !(v == 1)
query settles deadlock_free
",
    );
}

#[test]
fn oracle_agrees_on_clockless_variable_machines() {
    // No clocks means delay changes nothing, so the machine stops when the
    // last assignment lands.
    assert_agreement(
        "counter",
        "\
system counter
var n 0 3 init 0
automaton c
init A
edge A A guard n == 0 do n := 1
edge A A guard n == 1 do n := 2
query top reachable n >= 2
query capped safety n <= 2
query halts deadlock_free
",
    );
}

#[test]
fn oracle_and_explorer_visit_the_same_number_of_distinct_states_when_caps_match() {
    // With the slack set to the explorer's own saturation point the two
    // implementations walk literally the same graph, so the reachable-state
    // counts must coincide as well — not just the verdicts.
    for name in BUILTIN_MODELS {
        let net = parse_network(builtin(name).unwrap()).unwrap();
        let explorer = ztdn_verify::explore::explore(&net, CheckOptions::default());
        assert!(explorer.complete);

        let mut seen: HashSet<OState> = HashSet::new();
        let mut stack = vec![o_init(&net)];
        while let Some(s) = stack.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            stack.extend(o_succs_slack(&net, &s, 1));
        }
        assert_eq!(
            explorer.states.len(),
            seen.len(),
            "{name}: same saturation point must give the same reachable set"
        );
    }
}
