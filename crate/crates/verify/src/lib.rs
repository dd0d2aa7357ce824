//! Exhaustive verification of timed-automata models of the access protocol.
//!
//! The crate has three layers: [`model`] defines networks of timed automata
//! with integer-valued digital clocks and validates their structure,
//! [`parse`] reads the line-oriented `.ta` file format, and [`explore`]
//! enumerates the reachable state space to settle deadlock-freedom,
//! safety, and reachability queries — returning replayable witnesses for
//! the verdicts that have one.
//!
//! Two models of the access handshake ship inside the binary: `ztdn`, the
//! clean protocol, and `ztdn-tamper`, the same network with a
//! policy-tampering fault injected.

pub mod explore;
pub mod model;
pub mod parse;

pub use explore::{
    check, describe_witness, explore, CheckOptions, Exploration, QueryOutcome, State, Step,
    Verdict, Witness,
};
pub use model::{validate, ModelError, Network, Query, QueryKind};
pub use parse::{parse_network, ParseError};

/// Names of the models compiled into the binary.
pub const BUILTIN_MODELS: [&str; 2] = ["ztdn", "ztdn-tamper"];

/// Source text of a built-in model, if `name` is one.
pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "ztdn" => Some(include_str!("../models/ztdn.ta")),
        "ztdn-tamper" => Some(include_str!("../models/ztdn-tamper.ta")),
        _ => None,
    }
}
