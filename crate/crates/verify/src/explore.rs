//! Exhaustive state-space exploration and query checking.
//!
//! States pair every automaton's location with the shared variable values
//! and the integer clock valuation; each clock saturates one past its
//! ceiling, which is indistinguishable from any larger value under the
//! non-strict guards the model layer enforces. Successors are generated in
//! a fixed order — local edges, then channel handshakes, then the unit
//! delay — so exploration, counters, and witnesses are fully deterministic.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::model::{Automaton, GuardAtom, Network, Predicate, Query, QueryKind, Sync, Update};

/// One global state of the network.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    pub locations: Vec<usize>,
    pub vars: Vec<i64>,
    /// Clock values, automata in declaration order, clocks within each
    /// automaton in declaration order.
    pub clocks: Vec<i64>,
}

/// A single transition, precise enough to replay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Local { automaton: usize, edge: usize },
    Handshake { channel: usize, sender: usize, send_edge: usize, receiver: usize, recv_edge: usize },
    Delay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated,
    /// The state bound was hit before the question was settled.
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Unknown => "unknown",
        })
    }
}

/// A replayable path from the initial state.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Witness {
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryOutcome {
    pub name: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub states_explored: usize,
    /// Whether the whole reachable space fit under the bound.
    pub complete: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub max_states: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { max_states: 1_000_000 }
    }
}

// ---------------------------------------------------------------------------
// Transition semantics
// ---------------------------------------------------------------------------

fn clock_base(net: &Network, automaton: usize) -> usize {
    net.automata[..automaton].iter().map(|a| a.clocks.len()).sum()
}

pub fn initial_state(net: &Network) -> State {
    State {
        locations: net.automata.iter().map(|a| a.init).collect(),
        vars: net.vars.iter().map(|v| v.init).collect(),
        clocks: net.automata.iter().flat_map(|a| a.clocks.iter().map(|_| 0)).collect(),
    }
}

fn guards_pass(net: &Network, state: &State, automaton: usize, guards: &[GuardAtom]) -> bool {
    let base = clock_base(net, automaton);
    guards.iter().all(|g| match g {
        GuardAtom::Clock { clock, cmp, bound } => cmp.eval(state.clocks[base + clock], *bound),
        GuardAtom::Var { var, cmp, value } => cmp.eval(state.vars[*var], *value),
    })
}

/// Applies an edge's updates; `None` when a variable assignment would leave
/// its declared range.
fn apply_updates(
    net: &Network,
    state: &mut State,
    automaton: usize,
    updates: &[Update],
) -> Option<()> {
    let base = clock_base(net, automaton);
    for u in updates {
        match u {
            Update::ResetClock { clock } => state.clocks[base + clock] = 0,
            Update::SetVar { var, value } => {
                let decl = &net.vars[*var];
                if *value < decl.min || *value > decl.max {
                    return None;
                }
                state.vars[*var] = *value;
            }
        }
    }
    Some(())
}

fn invariant_holds(net: &Network, state: &State, automaton: usize) -> bool {
    let a = &net.automata[automaton];
    let base = clock_base(net, automaton);
    a.invariants[state.locations[automaton]]
        .iter()
        .all(|&(clock, bound)| state.clocks[base + clock] <= bound)
}

fn all_invariants_hold(net: &Network, state: &State) -> bool {
    (0..net.automata.len()).all(|a| invariant_holds(net, state, a))
}

fn fire_local(net: &Network, state: &State, automaton: usize, edge: usize) -> Option<State> {
    let e = &net.automata[automaton].edges[edge];
    if state.locations[automaton] != e.from || !guards_pass(net, state, automaton, &e.guards) {
        return None;
    }
    let mut next = state.clone();
    next.locations[automaton] = e.to;
    apply_updates(net, &mut next, automaton, &e.updates)?;
    invariant_holds(net, &next, automaton).then_some(next)
}

fn fire_handshake(
    net: &Network,
    state: &State,
    sender: usize,
    send_edge: usize,
    receiver: usize,
    recv_edge: usize,
) -> Option<State> {
    let se = &net.automata[sender].edges[send_edge];
    let re = &net.automata[receiver].edges[recv_edge];
    if state.locations[sender] != se.from
        || state.locations[receiver] != re.from
        || !guards_pass(net, state, sender, &se.guards)
        || !guards_pass(net, state, receiver, &re.guards)
    {
        return None;
    }
    let mut next = state.clone();
    next.locations[sender] = se.to;
    next.locations[receiver] = re.to;
    // Sender's assignments land before the receiver's.
    apply_updates(net, &mut next, sender, &se.updates)?;
    apply_updates(net, &mut next, receiver, &re.updates)?;
    (invariant_holds(net, &next, sender) && invariant_holds(net, &next, receiver)).then_some(next)
}

fn fire_delay(net: &Network, state: &State) -> Option<State> {
    let mut next = state.clone();
    let mut moved = false;
    let mut idx = 0;
    for a in &net.automata {
        for c in &a.clocks {
            let cap = c.ceiling + 1;
            if next.clocks[idx] < cap {
                next.clocks[idx] += 1;
                moved = true;
            }
            idx += 1;
        }
    }
    // Once every clock saturates, delaying changes nothing and the step is
    // not a distinct successor.
    if !moved {
        return None;
    }
    all_invariants_hold(net, &next).then_some(next)
}

/// Applies one replayed step to a state.
pub fn apply_step(net: &Network, state: &State, step: Step) -> Option<State> {
    match step {
        Step::Local { automaton, edge } => fire_local(net, state, automaton, edge),
        Step::Handshake { sender, send_edge, receiver, recv_edge, .. } => {
            fire_handshake(net, state, sender, send_edge, receiver, recv_edge)
        }
        Step::Delay => fire_delay(net, state),
    }
}

/// All successors in canonical order: local edges (automata then edges in
/// declaration order), handshakes (channel, sender, send edge, receiver,
/// receive edge), then the unit delay.
pub fn successors(net: &Network, state: &State) -> Vec<(Step, State)> {
    let mut out = Vec::new();
    for (ai, a) in net.automata.iter().enumerate() {
        for (ei, e) in a.edges.iter().enumerate() {
            if e.sync == Sync::None {
                if let Some(next) = fire_local(net, state, ai, ei) {
                    out.push((Step::Local { automaton: ai, edge: ei }, next));
                }
            }
        }
    }
    for channel in 0..net.channels.len() {
        for (si, sa) in net.automata.iter().enumerate() {
            for (sei, se) in sa.edges.iter().enumerate() {
                if se.sync != Sync::Send(channel) {
                    continue;
                }
                for (ri, ra) in net.automata.iter().enumerate() {
                    if ri == si {
                        continue;
                    }
                    for (rei, re) in ra.edges.iter().enumerate() {
                        if re.sync != Sync::Recv(channel) {
                            continue;
                        }
                        if let Some(next) = fire_handshake(net, state, si, sei, ri, rei) {
                            out.push((
                                Step::Handshake {
                                    channel,
                                    sender: si,
                                    send_edge: sei,
                                    receiver: ri,
                                    recv_edge: rei,
                                },
                                next,
                            ));
                        }
                    }
                }
            }
        }
    }
    if let Some(next) = fire_delay(net, state) {
        out.push((Step::Delay, next));
    }
    out
}

pub fn eval_predicate(net: &Network, state: &State, p: &Predicate) -> bool {
    match p {
        Predicate::AtLoc { automaton, location } => state.locations[*automaton] == *location,
        Predicate::Var { var, cmp, value } => cmp.eval(state.vars[*var], *value),
        Predicate::Clock { automaton, clock, cmp, value } => {
            cmp.eval(state.clocks[clock_base(net, *automaton) + clock], *value)
        }
        Predicate::Not(inner) => !eval_predicate(net, state, inner),
        Predicate::And(a, b) => eval_predicate(net, state, a) && eval_predicate(net, state, b),
        Predicate::Or(a, b) => eval_predicate(net, state, a) || eval_predicate(net, state, b),
        Predicate::Implies(a, b) => !eval_predicate(net, state, a) || eval_predicate(net, state, b),
    }
}

// ---------------------------------------------------------------------------
// Exploration
// ---------------------------------------------------------------------------

/// Breadth-first exploration up to `max_states` distinct states.
pub struct Exploration {
    pub states: Vec<State>,
    /// `parents[i]` is the predecessor index and step that first reached
    /// state `i`; `None` only for the initial state.
    pub parents: Vec<Option<(usize, Step)>>,
    /// Indices of states with no successor at all.
    pub deadlocks: Vec<usize>,
    pub complete: bool,
}

impl Exploration {
    /// Shortest transition path from the initial state to `index`.
    pub fn path_to(&self, index: usize) -> Witness {
        let mut steps = Vec::new();
        let mut cursor = index;
        while let Some((parent, step)) = self.parents[cursor] {
            steps.push(step);
            cursor = parent;
        }
        steps.reverse();
        Witness { steps }
    }
}

pub fn explore(net: &Network, options: CheckOptions) -> Exploration {
    let init = initial_state(net);
    let mut states = vec![init.clone()];
    let mut parents: Vec<Option<(usize, Step)>> = vec![None];
    let mut index: HashMap<State, usize> = HashMap::new();
    index.insert(init, 0);
    let mut deadlocks = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);
    let mut complete = true;

    while let Some(current) = queue.pop_front() {
        let succs = successors(net, &states[current]);
        if succs.is_empty() {
            deadlocks.push(current);
            continue;
        }
        for (step, next) in succs {
            match index.entry(next) {
                Entry::Occupied(_) => {}
                Entry::Vacant(slot) => {
                    if states.len() >= options.max_states {
                        complete = false;
                        continue;
                    }
                    let id = states.len();
                    states.push(slot.key().clone());
                    slot.insert(id);
                    parents.push(Some((current, step)));
                    queue.push_back(id);
                }
            }
        }
    }

    Exploration { states, parents, deadlocks, complete }
}

/// Evaluates every query of the network over one shared exploration.
pub fn check(net: &Network, options: CheckOptions) -> Vec<QueryOutcome> {
    let exploration = explore(net, options);
    net.queries.iter().map(|q| judge(net, q, &exploration)).collect()
}

/// Evaluates a single query against an existing exploration.
pub fn judge(net: &Network, query: &Query, exploration: &Exploration) -> QueryOutcome {
    let states_explored = exploration.states.len();
    let complete = exploration.complete;
    let (verdict, witness) = match &query.kind {
        QueryKind::DeadlockFree => match exploration.deadlocks.first() {
            Some(&idx) => (Verdict::Violated, Some(exploration.path_to(idx))),
            None if complete => (Verdict::Holds, None),
            None => (Verdict::Unknown, None),
        },
        QueryKind::Safety(p) => {
            let bad = exploration
                .states
                .iter()
                .position(|s| !eval_predicate(net, s, p));
            match bad {
                Some(idx) => (Verdict::Violated, Some(exploration.path_to(idx))),
                None if complete => (Verdict::Holds, None),
                None => (Verdict::Unknown, None),
            }
        }
        QueryKind::Reachable(p) => {
            let hit = exploration.states.iter().position(|s| eval_predicate(net, s, p));
            match hit {
                Some(idx) => (Verdict::Holds, Some(exploration.path_to(idx))),
                None if complete => (Verdict::Violated, None),
                None => (Verdict::Unknown, None),
            }
        }
    };
    QueryOutcome { name: query.name.clone(), verdict, witness, states_explored, complete }
}

/// Replays a witness from the initial state; `None` when any step does not
/// apply, which would mean the witness is stale or fabricated.
pub fn replay(net: &Network, witness: &Witness) -> Option<State> {
    let mut state = initial_state(net);
    for &step in &witness.steps {
        state = apply_step(net, &state, step)?;
    }
    Some(state)
}

/// Human-readable rendering of one step against the network's names.
pub fn describe_step(net: &Network, state_before: &State, step: Step) -> String {
    let loc = |a: &Automaton, i: usize| a.locations[i].clone();
    match step {
        Step::Local { automaton, edge } => {
            let a = &net.automata[automaton];
            let e = &a.edges[edge];
            format!("{}: {} -> {}", a.name, loc(a, e.from), loc(a, e.to))
        }
        Step::Handshake { channel, sender, send_edge, receiver, recv_edge } => {
            let sa = &net.automata[sender];
            let ra = &net.automata[receiver];
            let se = &sa.edges[send_edge];
            let re = &ra.edges[recv_edge];
            format!(
                "{}! {}: {} -> {}, {}: {} -> {}",
                net.channels[channel],
                sa.name,
                loc(sa, se.from),
                loc(sa, se.to),
                ra.name,
                loc(ra, re.from),
                loc(ra, re.to)
            )
        }
        Step::Delay => {
            let _ = state_before;
            "delay 1".to_string()
        }
    }
}

/// Full rendering of a witness as one line per step.
pub fn describe_witness(net: &Network, witness: &Witness) -> Vec<String> {
    let mut lines = Vec::new();
    let mut state = initial_state(net);
    for &step in &witness.steps {
        lines.push(describe_step(net, &state, step));
        match apply_step(net, &state, step) {
            Some(next) => state = next,
            None => {
                lines.push("<witness does not replay>".to_string());
                break;
            }
        }
    }
    lines
}
