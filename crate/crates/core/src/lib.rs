//! Zero-trust network toolkit: domain model, tamper-evident policy store,
//! decision and enforcement points, a deterministic network simulator, and
//! an agent-access benchmark.

pub mod bench;
pub mod decision;
pub mod enforcement;
pub mod model;
pub mod netsim;
pub mod policy;
pub mod scenario;
pub mod trust;
