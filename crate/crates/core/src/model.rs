//! Shared vocabulary for the zero-trust network toolkit.
//!
//! Everything downstream (policy store, decision point, enforcement point,
//! simulator, benchmark) speaks in terms of these types. Time is a logical
//! tick counter (`Tick`), not wall-clock time: simulations advance an integer
//! clock so that runs are reproducible and latency arithmetic is exact.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Logical time. One tick is the unit of scheduling and latency accounting.
pub type Tick = u64;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(
    /// Identifies an enterprise network.
    NetworkId
);
id_type!(
    /// Identifies a micro-segment inside one network.
    SegmentId
);
id_type!(
    /// Identifies a resource (service, data store, ...).
    ResourceId
);
id_type!(
    /// Identifies a subject requesting access.
    UserId
);
id_type!(
    /// Identifies an enforcement point instance.
    PepId
);
id_type!(
    /// Identifies a policy record.
    PolicyId
);
id_type!(
    /// Identifies a granted session.
    SessionId
);

/// Subject role. Access policies may require a specific role.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Administrator,
    NormalUser,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Administrator => f.write_str("Administrator"),
            Role::NormalUser => f.write_str("NormalUser"),
        }
    }
}

/// Opaque bearer credential. The token carries no structure; validity is
/// decided by the issuing authority's registry, never by inspecting the
/// token itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Credential {
    pub token: String,
    pub issued_at: Tick,
}

impl Credential {
    pub fn new(token: impl Into<String>, issued_at: Tick) -> Self {
        Self { token: token.into(), issued_at }
    }
}

/// A subject as presented to the decision point: identity, role claim and
/// the credential backing the claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserIdentity {
    pub user_id: UserId,
    pub role: Role,
    pub credential: Credential,
    pub session_id: Option<SessionId>,
}

/// A protected resource. Every resource lives in exactly one segment of
/// exactly one owning network; `shared` marks resources (such as a data
/// center) that are reachable from every network in the deployment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resource {
    pub resource_id: ResourceId,
    pub segment_id: SegmentId,
    pub network_id: NetworkId,
    pub shared: bool,
}

impl Resource {
    /// True if the resource can be reached through `network`.
    pub fn reachable_from(&self, network: &NetworkId) -> bool {
        self.shared || &self.network_id == network
    }
}

/// An enterprise network: a trust threshold, a set of segments, and the
/// enforcement points that guard its perimeter (listed in failover order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnterpriseNetwork {
    pub network_id: NetworkId,
    /// Minimum trust score required for access, in `[0, 1]`.
    pub trust_threshold: f64,
    pub segments: Vec<SegmentId>,
    /// At least one enforcement point; earlier entries are preferred.
    pub pep_ids: Vec<PepId>,
}

/// A single access request as it travels PEP -> PDP -> PEP.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessRequest {
    /// Strictly increasing within one simulation run.
    pub request_id: u64,
    pub user: UserIdentity,
    pub target: ResourceId,
    /// Network the request enters through (and whose policy applies).
    pub network_id: NetworkId,
    pub issued_at: Tick,
}

/// Decision verdict. `Revoke` only ever results from re-authentication of a
/// previously granted session.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Grant,
    Deny,
    Revoke,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Grant => f.write_str("Grant"),
            Verdict::Deny => f.write_str("Deny"),
            Verdict::Revoke => f.write_str("Revoke"),
        }
    }
}

/// Why a decision came out the way it did. `Ok` is reserved for grants;
/// every deny or revoke names the first gate that failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DecisionReason {
    Ok,
    TrustBelowThreshold,
    RoleMismatch,
    PolicyTampered,
    PolicyModifiedSinceRequest,
    ComponentUnavailable,
    CredentialInvalid,
    NoPolicy,
}

impl DecisionReason {
    pub const ALL: [DecisionReason; 8] = [
        DecisionReason::Ok,
        DecisionReason::TrustBelowThreshold,
        DecisionReason::RoleMismatch,
        DecisionReason::PolicyTampered,
        DecisionReason::PolicyModifiedSinceRequest,
        DecisionReason::ComponentUnavailable,
        DecisionReason::CredentialInvalid,
        DecisionReason::NoPolicy,
    ];
}

impl fmt::Display for DecisionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DecisionReason::Ok => "Ok",
            DecisionReason::TrustBelowThreshold => "TrustBelowThreshold",
            DecisionReason::RoleMismatch => "RoleMismatch",
            DecisionReason::PolicyTampered => "PolicyTampered",
            DecisionReason::PolicyModifiedSinceRequest => "PolicyModifiedSinceRequest",
            DecisionReason::ComponentUnavailable => "ComponentUnavailable",
            DecisionReason::CredentialInvalid => "CredentialInvalid",
            DecisionReason::NoPolicy => "NoPolicy",
        };
        f.write_str(s)
    }
}

/// Error for verdict/reason combinations that make no sense.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid decision: verdict {verdict} cannot carry reason {reason}")]
pub struct InvalidDecision {
    pub verdict: Verdict,
    pub reason: DecisionReason,
}

/// The outcome of one policy evaluation.
///
/// Invariant, enforced on construction: `verdict == Grant` if and only if
/// `reason == Ok`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    verdict: Verdict,
    reason: DecisionReason,
    decided_at: Tick,
}

impl Decision {
    pub fn new(
        verdict: Verdict,
        reason: DecisionReason,
        decided_at: Tick,
    ) -> Result<Self, InvalidDecision> {
        let ok = match verdict {
            Verdict::Grant => reason == DecisionReason::Ok,
            Verdict::Deny | Verdict::Revoke => reason != DecisionReason::Ok,
        };
        if ok {
            Ok(Self { verdict, reason, decided_at })
        } else {
            Err(InvalidDecision { verdict, reason })
        }
    }

    pub fn grant(decided_at: Tick) -> Self {
        Self { verdict: Verdict::Grant, reason: DecisionReason::Ok, decided_at }
    }

    /// Panics if `reason` is `Ok`; denials must explain themselves.
    pub fn deny(reason: DecisionReason, decided_at: Tick) -> Self {
        Self::new(Verdict::Deny, reason, decided_at).expect("deny requires a failure reason")
    }

    /// Panics if `reason` is `Ok`.
    pub fn revoke(reason: DecisionReason, decided_at: Tick) -> Self {
        Self::new(Verdict::Revoke, reason, decided_at).expect("revoke requires a failure reason")
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub fn reason(&self) -> DecisionReason {
        self.reason
    }

    pub fn decided_at(&self) -> Tick {
        self.decided_at
    }

    pub fn is_grant(&self) -> bool {
        self.verdict == Verdict::Grant
    }
}

// ---------------------------------------------------------------------------
// Attack taxonomy
// ---------------------------------------------------------------------------

/// Where an attack lands in the architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttackSurface {
    /// The policy engine / policy administrator pair.
    PolicyEngine,
    /// An enforcement point at the network edge.
    EnforcementPoint,
    /// A legitimate insider abusing held credentials.
    Insider,
}

impl fmt::Display for AttackSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AttackSurface::PolicyEngine => "PolicyEngine",
            AttackSurface::EnforcementPoint => "EnforcementPoint",
            AttackSurface::Insider => "Insider",
        };
        f.write_str(s)
    }
}

/// Closed set of modeled attacks. Variants carry the parameters the
/// simulator needs to stage them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AttackKind {
    /// Silently rewrite a stored policy without touching the trace log.
    PolicyTamper,
    /// Corrupt the trace log's stored chain state.
    DataManipulation,
    /// Replace the credential on file for a user so their authentic
    /// credential no longer verifies.
    CredentialCompromise,
    /// Burst of junk requests against one enforcement point.
    DdosFlood { requests_per_tick: u32, duration_ticks: u64 },
    /// A subject with valid credentials acting maliciously.
    InsiderAccess,
    /// An enforcement point goes down; optionally comes back after a delay.
    ComponentFailure { recover_after: Option<u64> },
}

impl AttackKind {
    /// Surfaces this kind of attack can plausibly originate from.
    pub fn allowed_surfaces(&self) -> &'static [AttackSurface] {
        match self {
            AttackKind::PolicyTamper => &[AttackSurface::PolicyEngine],
            AttackKind::DataManipulation => &[AttackSurface::PolicyEngine],
            AttackKind::CredentialCompromise => {
                &[AttackSurface::PolicyEngine, AttackSurface::Insider]
            }
            AttackKind::DdosFlood { .. } => {
                &[AttackSurface::EnforcementPoint, AttackSurface::Insider]
            }
            AttackKind::InsiderAccess => &[AttackSurface::Insider],
            AttackKind::ComponentFailure { .. } => &[AttackSurface::EnforcementPoint],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::PolicyTamper => "PolicyTamper",
            AttackKind::DataManipulation => "DataManipulation",
            AttackKind::CredentialCompromise => "CredentialCompromise",
            AttackKind::DdosFlood { .. } => "DdosFlood",
            AttackKind::InsiderAccess => "InsiderAccess",
            AttackKind::ComponentFailure { .. } => "ComponentFailure",
        }
    }
}

/// What an attack is aimed at. Every target names the network it belongs
/// to, which is what attack containment accounting keys on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackTarget {
    Policy { network: NetworkId, policy: PolicyId },
    TraceLog { network: NetworkId },
    Pep { network: NetworkId, pep: PepId },
    User { network: NetworkId, user: UserId, resource: Option<ResourceId> },
}

impl AttackTarget {
    pub fn network(&self) -> &NetworkId {
        match self {
            AttackTarget::Policy { network, .. }
            | AttackTarget::TraceLog { network }
            | AttackTarget::Pep { network, .. }
            | AttackTarget::User { network, .. } => network,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InvalidAttack {
    #[error("attack {kind} cannot originate from surface {surface}")]
    SurfaceMismatch { kind: &'static str, surface: AttackSurface },
    #[error("attack {kind} requires a {expected} target")]
    TargetMismatch { kind: &'static str, expected: &'static str },
}

/// A staged attack: what, where, and when.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackEvent {
    pub surface: AttackSurface,
    pub kind: AttackKind,
    pub at: Tick,
    pub target: AttackTarget,
}

impl AttackEvent {
    pub fn new(
        surface: AttackSurface,
        kind: AttackKind,
        at: Tick,
        target: AttackTarget,
    ) -> Result<Self, InvalidAttack> {
        if !kind.allowed_surfaces().contains(&surface) {
            return Err(InvalidAttack::SurfaceMismatch { kind: kind.name(), surface });
        }
        let target_ok = matches!(
            (&kind, &target),
            (AttackKind::PolicyTamper, AttackTarget::Policy { .. })
                | (AttackKind::DataManipulation, AttackTarget::TraceLog { .. })
                | (AttackKind::CredentialCompromise, AttackTarget::User { .. })
                | (AttackKind::InsiderAccess, AttackTarget::User { .. })
                | (AttackKind::DdosFlood { .. }, AttackTarget::Pep { .. })
                | (AttackKind::ComponentFailure { .. }, AttackTarget::Pep { .. })
        );
        if !target_ok {
            let expected = match kind {
                AttackKind::PolicyTamper => "policy",
                AttackKind::DataManipulation => "trace-log",
                AttackKind::CredentialCompromise | AttackKind::InsiderAccess => "user",
                AttackKind::DdosFlood { .. } | AttackKind::ComponentFailure { .. } => "pep",
            };
            return Err(InvalidAttack::TargetMismatch { kind: kind.name(), expected });
        }
        Ok(Self { surface, kind, at, target })
    }
}

// ---------------------------------------------------------------------------
// KPI accounting
// ---------------------------------------------------------------------------

/// Min/mean/max over a set of duration samples. The unit is whatever the
/// producer measured in (ticks for the simulator, microseconds for the
/// benchmark); `count` is the number of samples folded in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct DurationStats {
    pub count: u64,
    pub min: u64,
    pub mean: f64,
    pub max: u64,
}

impl DurationStats {
    pub fn from_samples(samples: &[u64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let min = *samples.iter().min().expect("non-empty");
        let max = *samples.iter().max().expect("non-empty");
        let sum: u64 = samples.iter().sum();
        Self {
            count: samples.len() as u64,
            min,
            mean: sum as f64 / samples.len() as f64,
            max,
        }
    }
}

/// Per-network health and security counters for one simulation run.
///
/// `availability` is served requests over offered requests and reads `1.0`
/// when nothing was offered (an idle network is fully available).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpiSnapshot {
    /// Request issue tick to enforcement tick, over decided requests.
    pub response_time: DurationStats,
    /// Decision-point receive tick to decision tick.
    pub policy_check_time: DurationStats,
    pub breach_attempts: u64,
    pub unauthorized_attempts: u64,
    pub offered_requests: u64,
    pub served_requests: u64,
    pub availability: f64,
    pub activity_log_len: u64,
}

impl KpiSnapshot {
    pub fn idle() -> Self {
        Self {
            response_time: DurationStats::default(),
            policy_check_time: DurationStats::default(),
            breach_attempts: 0,
            unauthorized_attempts: 0,
            offered_requests: 0,
            served_requests: 0,
            availability: 1.0,
            activity_log_len: 0,
        }
    }
}
