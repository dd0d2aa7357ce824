//! Network-of-timed-automata model: types and structural validation.
//!
//! The formalism is deliberately closed: clock guards and invariants use
//! only non-strict comparisons (`<=`, `>=`, `==`), every clock declares a
//! ceiling at least as large as any constant it is compared against, and
//! time advances in unit steps with each clock value capped just above its
//! ceiling. Under those restrictions the integer-valued semantics decides
//! the same reachability questions as the dense-time one, which is what
//! makes exhaustive exploration finite.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Non-strict comparison operators — the only ones allowed on clocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

impl Cmp {
    pub fn eval(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Cmp::Le => lhs <= rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Eq => lhs == rhs,
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "==",
        })
    }
}

/// One conjunct of an edge guard.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GuardAtom {
    /// Compare this automaton's clock (by local index) against a constant.
    Clock { clock: usize, cmp: Cmp, bound: i64 },
    /// Compare a shared variable (by network index) against a constant.
    Var { var: usize, cmp: Cmp, value: i64 },
}

/// One assignment in an edge's `do` list, applied in written order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Update {
    /// `clock := 0` — resets are always to zero.
    ResetClock { clock: usize },
    /// `var := constant`; firing is blocked if the value leaves the
    /// variable's declared range.
    SetVar { var: usize, value: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sync {
    None,
    Send(usize),
    Recv(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub guards: Vec<GuardAtom>,
    pub sync: Sync,
    pub updates: Vec<Update>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockDecl {
    pub name: String,
    /// Largest constant this clock is meaningfully compared against;
    /// values saturate at `ceiling + 1`.
    pub ceiling: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    pub name: String,
    pub clocks: Vec<ClockDecl>,
    pub locations: Vec<String>,
    pub init: usize,
    /// `invariants[location]` — each entry demands `clock <= bound` while
    /// the automaton occupies that location.
    pub invariants: Vec<Vec<(usize, i64)>>,
    pub edges: Vec<Edge>,
}

impl Automaton {
    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn clock_index(&self, name: &str) -> Option<usize> {
        self.clocks.iter().position(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub min: i64,
    pub max: i64,
    pub init: i64,
}

/// Boolean state predicate, as used by `safety` and `reachable` queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predicate {
    /// `automaton @ Location`
    AtLoc { automaton: usize, location: usize },
    /// `var cmp constant`
    Var { var: usize, cmp: Cmp, value: i64 },
    /// `automaton.clock cmp constant`
    Clock { automaton: usize, clock: usize, cmp: Cmp, value: i64 },
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Implies(Box<Predicate>, Box<Predicate>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryKind {
    /// Every reachable state can still do something.
    DeadlockFree,
    /// The predicate holds in every reachable state.
    Safety(Predicate),
    /// Some reachable state satisfies the predicate.
    Reachable(Predicate),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub name: String,
    pub kind: QueryKind,
}

/// A validated network of automata plus its queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    pub name: String,
    pub channels: Vec<String>,
    pub vars: Vec<VarDecl>,
    pub automata: Vec<Automaton>,
    pub queries: Vec<Query>,
}

impl Network {
    pub fn automaton_index(&self, name: &str) -> Option<usize> {
        self.automata.iter().position(|a| a.name == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ModelError(pub String);

fn err(msg: impl Into<String>) -> ModelError {
    ModelError(msg.into())
}

/// Structural validation. Checks naming, reference resolution, channel
/// pairing, variable ranges, and — critically for soundness — that every
/// clock ceiling dominates every constant the clock is compared against.
pub fn validate(net: &Network) -> Result<(), ModelError> {
    if net.automata.is_empty() {
        return Err(err("a network needs at least one automaton"));
    }

    let mut channel_names = BTreeSet::new();
    for c in &net.channels {
        if !channel_names.insert(c.as_str()) {
            return Err(err(format!("duplicate channel `{c}`")));
        }
    }
    let mut var_names = BTreeSet::new();
    for v in &net.vars {
        if !var_names.insert(v.name.as_str()) {
            return Err(err(format!("duplicate variable `{}`", v.name)));
        }
        if v.min > v.max {
            return Err(err(format!("variable `{}` has empty range {}..{}", v.name, v.min, v.max)));
        }
        if v.init < v.min || v.init > v.max {
            return Err(err(format!(
                "variable `{}` initializes to {} outside {}..{}",
                v.name, v.init, v.min, v.max
            )));
        }
    }

    let mut automaton_names = BTreeSet::new();
    // (channel, direction) -> automata using it, for pairing checks.
    let mut senders: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut receivers: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();

    for (ai, a) in net.automata.iter().enumerate() {
        if !automaton_names.insert(a.name.as_str()) {
            return Err(err(format!("duplicate automaton `{}`", a.name)));
        }
        let mut locations = BTreeSet::new();
        for l in &a.locations {
            if !locations.insert(l.as_str()) {
                return Err(err(format!("automaton `{}`: duplicate location `{l}`", a.name)));
            }
        }
        let mut clocks = BTreeSet::new();
        for c in &a.clocks {
            if !clocks.insert(c.name.as_str()) {
                return Err(err(format!("automaton `{}`: duplicate clock `{}`", a.name, c.name)));
            }
            if var_names.contains(c.name.as_str()) {
                return Err(err(format!(
                    "automaton `{}`: clock `{}` shadows a variable of the same name",
                    a.name, c.name
                )));
            }
            if c.ceiling < 0 {
                return Err(err(format!(
                    "automaton `{}`: clock `{}` has negative ceiling",
                    a.name, c.name
                )));
            }
        }
        if a.init >= a.locations.len() {
            return Err(err(format!("automaton `{}`: initial location out of range", a.name)));
        }
        if a.invariants.len() != a.locations.len() {
            return Err(err(format!(
                "automaton `{}`: invariant table does not cover every location",
                a.name
            )));
        }
        for (loc, invs) in a.invariants.iter().enumerate() {
            for &(clock, bound) in invs {
                let Some(decl) = a.clocks.get(clock) else {
                    return Err(err(format!(
                        "automaton `{}`: invariant on `{}` references an unknown clock",
                        a.name, a.locations[loc]
                    )));
                };
                if bound < 0 {
                    return Err(err(format!(
                        "automaton `{}`: negative invariant bound on `{}`",
                        a.name, a.locations[loc]
                    )));
                }
                if bound > decl.ceiling {
                    return Err(err(format!(
                        "automaton `{}`: invariant bound {bound} on `{}` exceeds clock `{}` ceiling {}",
                        a.name, a.locations[loc], decl.name, decl.ceiling
                    )));
                }
            }
        }
        for (ei, e) in a.edges.iter().enumerate() {
            let ctx = format!("automaton `{}` edge #{}", a.name, ei + 1);
            if e.from >= a.locations.len() || e.to >= a.locations.len() {
                return Err(err(format!("{ctx}: endpoint out of range")));
            }
            for g in &e.guards {
                match g {
                    GuardAtom::Clock { clock, bound, .. } => {
                        let Some(decl) = a.clocks.get(*clock) else {
                            return Err(err(format!("{ctx}: guard references an unknown clock")));
                        };
                        if *bound < 0 {
                            return Err(err(format!("{ctx}: negative clock bound")));
                        }
                        if *bound > decl.ceiling {
                            return Err(err(format!(
                                "{ctx}: clock `{}` compared against {bound} above its ceiling {}",
                                decl.name, decl.ceiling
                            )));
                        }
                    }
                    GuardAtom::Var { var, .. } => {
                        if *var >= net.vars.len() {
                            return Err(err(format!("{ctx}: guard references an unknown variable")));
                        }
                    }
                }
            }
            for u in &e.updates {
                match u {
                    Update::ResetClock { clock } => {
                        if *clock >= a.clocks.len() {
                            return Err(err(format!("{ctx}: reset of an unknown clock")));
                        }
                    }
                    Update::SetVar { var, value } => {
                        let Some(decl) = net.vars.get(*var) else {
                            return Err(err(format!("{ctx}: assignment to an unknown variable")));
                        };
                        if *value < decl.min || *value > decl.max {
                            return Err(err(format!(
                                "{ctx}: assigns {} to `{}` outside {}..{}",
                                value, decl.name, decl.min, decl.max
                            )));
                        }
                    }
                }
            }
            match e.sync {
                Sync::None => {}
                Sync::Send(c) | Sync::Recv(c) => {
                    if c >= net.channels.len() {
                        return Err(err(format!("{ctx}: sync on an undeclared channel")));
                    }
                    let side = if matches!(e.sync, Sync::Send(_)) {
                        &mut senders
                    } else {
                        &mut receivers
                    };
                    side.entry(c).or_default().insert(ai);
                }
            }
        }
    }

    // Every declared channel must be usable: at least one sender and one
    // receiver, in different automata (an automaton cannot handshake with
    // itself).
    for (ci, name) in net.channels.iter().enumerate() {
        let empty = BTreeSet::new();
        let s = senders.get(&ci).unwrap_or(&empty);
        let r = receivers.get(&ci).unwrap_or(&empty);
        if s.is_empty() || r.is_empty() {
            return Err(err(format!(
                "channel `{name}` needs both a sender and a receiver"
            )));
        }
        let pairable = s.iter().any(|snd| r.iter().any(|rcv| snd != rcv));
        if !pairable {
            return Err(err(format!(
                "channel `{name}` is only used within a single automaton; a handshake needs two"
            )));
        }
    }

    // Query name/location references were resolved at parse time, but clock
    // comparisons inside predicates need the same ceiling domination as
    // guards: a constant above the ceiling would be decided by the cap, not
    // by the model.
    for q in &net.queries {
        match &q.kind {
            QueryKind::DeadlockFree => {}
            QueryKind::Safety(p) | QueryKind::Reachable(p) => {
                predicate_clock_bounds(net, &q.name, p)?;
            }
        }
    }
    Ok(())
}

fn predicate_clock_bounds(net: &Network, query: &str, p: &Predicate) -> Result<(), ModelError> {
    match p {
        Predicate::AtLoc { .. } | Predicate::Var { .. } => Ok(()),
        Predicate::Clock { automaton, clock, value, .. } => {
            let a = &net.automata[*automaton];
            let decl = &a.clocks[*clock];
            if *value < 0 {
                return Err(err(format!(
                    "query `{query}`: clock `{}.{}` compared against a negative constant",
                    a.name, decl.name
                )));
            }
            if *value > decl.ceiling {
                return Err(err(format!(
                    "query `{query}`: clock `{}.{}` compared against {value} above its ceiling {}",
                    a.name, decl.name, decl.ceiling
                )));
            }
            Ok(())
        }
        Predicate::Not(inner) => predicate_clock_bounds(net, query, inner),
        Predicate::And(a, b) | Predicate::Or(a, b) | Predicate::Implies(a, b) => {
            predicate_clock_bounds(net, query, a)?;
            predicate_clock_bounds(net, query, b)
        }
    }
}
