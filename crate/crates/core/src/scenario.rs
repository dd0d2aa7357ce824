//! Scenario configuration: the TOML schema, parsing, and validation.
//!
//! A scenario file describes a deployment (networks, segments, resources,
//! enforcement points, users, policies) plus a schedule of timed events
//! (access requests, attacks, forced re-authentication). Parsing reports
//! syntax errors with line numbers; validation collects *every* structural
//! violation instead of stopping at the first, and never partially accepts
//! a configuration.
//!
//! Field reference (all ids are `[A-Za-z0-9_.:-]+`):
//!
//! ```toml
//! seed = 42            # fixes all randomness in a run
//! reauth_period = 5    # ticks between session re-authentications; 0 = off
//!
//! [trust]              # optional; weights for trust scoring
//! base_score = 0.5
//!
//! [latency]            # optional; per-hop tick costs
//! pep_to_pdp = 1
//! decision = 0
//! pdp_to_pep = 1
//!
//! [[network]]
//! id = "net1"
//! trust_threshold = 0.7
//! segments = ["seg1"]
//! [[network.pep]]
//! id = "pep1"
//! capacity = 10        # optional requests/tick cap
//! cooldown = 5         # ticks down after tripping the cap
//!
//! [[resource]]
//! id = "dc1"
//! segment = "seg1"
//! network = "net1"
//! shared = true        # reachable from every network
//!
//! [[user]]
//! id = "alice"
//! role = "normal"      # or "admin"
//! [[user.trust]]
//! network = "net1"
//! initial_score = 0.8
//!
//! [[policy]]
//! id = "p1"
//! network = "net1"
//! required_role = "normal"   # optional
//! min_trust = 0.2            # optional
//! scope = ["dc1"]            # resource/segment ids; empty = whole network
//! valid_from = 0             # optional tick window
//! valid_until = 100
//!
//! [[event]]                  # schedule, nondecreasing in `at`
//! at = 1
//! kind = "request"           # or "attack" / "reauth"
//! user = "alice"
//! network = "net1"
//! resource = "dc1"
//! ```
//!
//! Attack events set `kind = "attack"` and `attack = "policy_tamper" |
//! "data_manipulation" | "credential_compromise" | "ddos_flood" |
//! "insider_access" | "component_failure"` plus the fields the attack
//! needs (`policy`, `pep`, `user`, `requests_per_tick`, `duration_ticks`,
//! `recover_after`, optional `surface`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{
    AttackEvent, AttackKind, AttackSurface, AttackTarget, EnterpriseNetwork, NetworkId, PepId,
    PolicyId, Resource, ResourceId, Role, SegmentId, Tick, UserId,
};
use crate::policy::PolicyCondition;
use crate::trust::TrustConfig;

// ---------------------------------------------------------------------------
// Raw (serde-facing) schema
// ---------------------------------------------------------------------------

fn is_false(b: &bool) -> bool {
    !b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RoleSpec {
    #[serde(rename = "admin")]
    Admin,
    #[serde(rename = "normal")]
    Normal,
}

impl RoleSpec {
    pub fn to_role(self) -> Role {
        match self {
            RoleSpec::Admin => Role::Administrator,
            RoleSpec::Normal => Role::NormalUser,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct LatencySettings {
    /// Ticks a request spends travelling PEP -> PDP.
    #[serde(default)]
    pub pep_to_pdp: u64,
    /// Ticks the decision itself takes.
    #[serde(default)]
    pub decision: u64,
    /// Ticks the command spends travelling PDP -> PEP.
    #[serde(default)]
    pub pdp_to_pep: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PepSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
    #[serde(default)]
    pub cooldown: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub id: String,
    pub trust_threshold: f64,
    #[serde(default)]
    pub segments: Vec<String>,
    #[serde(default)]
    pub pep: Vec<PepSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceSpec {
    pub id: String,
    pub segment: String,
    pub network: String,
    #[serde(default, skip_serializing_if = "is_false")]
    pub shared: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserTrustSpec {
    pub network: String,
    pub initial_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserSpec {
    pub id: String,
    pub role: RoleSpec,
    #[serde(default)]
    pub trust: Vec<UserTrustSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub id: String,
    pub network: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_role: Option<RoleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_trust: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scope: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_from: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_until: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub at: u64,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pep: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests_per_tick: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ticks: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recover_after: Option<u64>,
}

/// Raw scenario as read from (and written to) TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reauth_period: u64,
    #[serde(default)]
    pub trust: TrustConfig,
    #[serde(default)]
    pub latency: LatencySettings,
    #[serde(default, rename = "network", skip_serializing_if = "Vec::is_empty")]
    pub networks: Vec<NetworkSpec>,
    #[serde(default, rename = "resource", skip_serializing_if = "Vec::is_empty")]
    pub resources: Vec<ResourceSpec>,
    #[serde(default, rename = "user", skip_serializing_if = "Vec::is_empty")]
    pub users: Vec<UserSpec>,
    #[serde(default, rename = "policy", skip_serializing_if = "Vec::is_empty")]
    pub policies: Vec<PolicySpec>,
    #[serde(default, rename = "event", skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventSpec>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("scenario parse error: {message}")]
pub struct ScenarioParseError {
    /// Human-readable message; includes `line N, column M` from the TOML
    /// parser when the input is syntactically malformed.
    pub message: String,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioParseError> {
        toml::from_str(text).map_err(|e| ScenarioParseError { message: e.to_string() })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    /// Returns a copy with `attack` spliced into the schedule after any
    /// events already scheduled at the same tick. The caller revalidates,
    /// which is what checks the attack's target actually exists.
    pub fn inject_attack(&self, attack: &AttackEvent) -> ScenarioConfig {
        let mut out = self.clone();
        let spec = attack_to_spec(attack);
        let pos = out
            .events
            .iter()
            .position(|e| e.at > attack.at)
            .unwrap_or(out.events.len());
        out.events.insert(pos, spec);
        out
    }
}

fn attack_to_spec(attack: &AttackEvent) -> EventSpec {
    let mut spec = EventSpec {
        at: attack.at,
        kind: "attack".into(),
        user: None,
        network: Some(attack.target.network().to_string()),
        resource: None,
        attack: None,
        surface: Some(
            match attack.surface {
                AttackSurface::PolicyEngine => "policy_engine",
                AttackSurface::EnforcementPoint => "enforcement_point",
                AttackSurface::Insider => "insider",
            }
            .into(),
        ),
        policy: None,
        pep: None,
        requests_per_tick: None,
        duration_ticks: None,
        recover_after: None,
    };
    spec.attack = Some(
        match &attack.kind {
            AttackKind::PolicyTamper => "policy_tamper",
            AttackKind::DataManipulation => "data_manipulation",
            AttackKind::CredentialCompromise => "credential_compromise",
            AttackKind::DdosFlood { .. } => "ddos_flood",
            AttackKind::InsiderAccess => "insider_access",
            AttackKind::ComponentFailure { .. } => "component_failure",
        }
        .into(),
    );
    match &attack.kind {
        AttackKind::DdosFlood { requests_per_tick, duration_ticks } => {
            spec.requests_per_tick = Some(*requests_per_tick);
            spec.duration_ticks = Some(*duration_ticks);
        }
        AttackKind::ComponentFailure { recover_after } => {
            spec.recover_after = *recover_after;
        }
        _ => {}
    }
    match &attack.target {
        AttackTarget::Policy { policy, .. } => spec.policy = Some(policy.to_string()),
        AttackTarget::TraceLog { .. } => {}
        AttackTarget::Pep { pep, .. } => spec.pep = Some(pep.to_string()),
        AttackTarget::User { user, resource, .. } => {
            spec.user = Some(user.to_string());
            spec.resource = resource.as_ref().map(|r| r.to_string());
        }
    }
    spec
}

// ---------------------------------------------------------------------------
// Validated form
// ---------------------------------------------------------------------------

/// One entry in the validated schedule.
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleEvent {
    Request { at: Tick, user: UserId, network: NetworkId, resource: ResourceId },
    Attack(AttackEvent),
    /// Re-authenticate every active session.
    ReauthAll { at: Tick },
}

impl ScheduleEvent {
    pub fn at(&self) -> Tick {
        match self {
            ScheduleEvent::Request { at, .. } => *at,
            ScheduleEvent::Attack(a) => a.at,
            ScheduleEvent::ReauthAll { at } => *at,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PepSetup {
    pub pep_id: PepId,
    pub network_id: NetworkId,
    pub capacity: Option<u32>,
    pub cooldown: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UserSetup {
    pub user_id: UserId,
    pub role: Role,
    /// Per-network initial trust scores; networks not listed fall back to
    /// the configured base score.
    pub initial_scores: BTreeMap<NetworkId, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicySetup {
    pub policy_id: PolicyId,
    pub network_id: NetworkId,
    pub condition: PolicyCondition,
}

/// A scenario that passed validation. Holds both the normalized raw config
/// (for lossless re-serialization) and resolved, typed views.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedScenario {
    config: ScenarioConfig,
    pub seed: u64,
    pub reauth_period: u64,
    pub trust_config: TrustConfig,
    pub latency: LatencySettings,
    pub networks: Vec<EnterpriseNetwork>,
    pub peps: Vec<PepSetup>,
    pub resources: BTreeMap<ResourceId, Resource>,
    pub users: Vec<UserSetup>,
    pub policies: Vec<PolicySetup>,
    pub schedule: Vec<ScheduleEvent>,
}

impl ValidatedScenario {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn network(&self, id: &NetworkId) -> Option<&EnterpriseNetwork> {
        self.networks.iter().find(|n| &n.network_id == id)
    }
}

/// Every violation found during validation, never a partial accept.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct ScenarioErrors {
    pub violations: Vec<String>,
}

impl fmt::Display for ScenarioErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} scenario violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

fn id_ok(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | ':' | '-'))
}

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x) && !x.is_nan()
}

/// Checks every structural rule and either returns a fully resolved
/// scenario or the complete list of violations.
pub fn validate_scenario(config: ScenarioConfig) -> Result<ValidatedScenario, ScenarioErrors> {
    let mut errs: Vec<String> = Vec::new();

    if config.networks.is_empty() {
        errs.push("at least one network is required".into());
    }

    // Trust weights.
    let t = &config.trust;
    if !unit_interval(t.base_score) {
        errs.push(format!("trust.base_score {} outside [0, 1]", t.base_score));
    }
    if !unit_interval(t.min_score) || !unit_interval(t.max_score) || t.min_score > t.max_score {
        errs.push(format!(
            "trust bounds [{}, {}] must satisfy 0 <= min <= max <= 1",
            t.min_score, t.max_score
        ));
    }

    // Networks, segments, enforcement points.
    let mut network_ids: BTreeSet<&str> = BTreeSet::new();
    let mut segment_owner: BTreeMap<&str, &str> = BTreeMap::new();
    let mut pep_ids: BTreeSet<&str> = BTreeSet::new();
    for n in &config.networks {
        if !id_ok(&n.id) {
            errs.push(format!("invalid network id `{}`", n.id));
        }
        if !network_ids.insert(&n.id) {
            errs.push(format!("duplicate network id `{}`", n.id));
        }
        if !unit_interval(n.trust_threshold) {
            errs.push(format!(
                "network `{}` trust_threshold {} outside [0, 1]",
                n.id, n.trust_threshold
            ));
        }
        if n.pep.is_empty() {
            errs.push(format!("network `{}` needs at least one enforcement point", n.id));
        }
        for s in &n.segments {
            if !id_ok(s) {
                errs.push(format!("invalid segment id `{s}`"));
            }
            if let Some(owner) = segment_owner.insert(s, &n.id) {
                errs.push(format!(
                    "segment `{s}` appears in networks `{owner}` and `{}`: segments must be disjoint",
                    n.id
                ));
            }
        }
        for p in &n.pep {
            if !id_ok(&p.id) {
                errs.push(format!("invalid enforcement point id `{}`", p.id));
            }
            if !pep_ids.insert(&p.id) {
                errs.push(format!("duplicate enforcement point id `{}`", p.id));
            }
            if p.capacity == Some(0) {
                errs.push(format!("enforcement point `{}` capacity must be at least 1", p.id));
            }
        }
    }

    // Resources.
    let mut resource_ids: BTreeSet<&str> = BTreeSet::new();
    for r in &config.resources {
        if !id_ok(&r.id) {
            errs.push(format!("invalid resource id `{}`", r.id));
        }
        if !resource_ids.insert(&r.id) {
            errs.push(format!("duplicate resource id `{}`", r.id));
        }
        if !network_ids.contains(r.network.as_str()) {
            errs.push(format!("resource `{}` references unknown network `{}`", r.id, r.network));
        }
        match segment_owner.get(r.segment.as_str()) {
            Some(owner) if *owner == r.network => {}
            Some(owner) => errs.push(format!(
                "resource `{}` sits in segment `{}` of network `{owner}`, not `{}`",
                r.id, r.segment, r.network
            )),
            None => errs.push(format!("resource `{}` references unknown segment `{}`", r.id, r.segment)),
        }
    }

    // Users.
    let mut user_ids: BTreeSet<&str> = BTreeSet::new();
    for u in &config.users {
        if !id_ok(&u.id) {
            errs.push(format!("invalid user id `{}`", u.id));
        }
        if !user_ids.insert(&u.id) {
            errs.push(format!("duplicate user id `{}`", u.id));
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for tr in &u.trust {
            if !network_ids.contains(tr.network.as_str()) {
                errs.push(format!("user `{}` trust entry references unknown network `{}`", u.id, tr.network));
            }
            if !seen.insert(&tr.network) {
                errs.push(format!("user `{}` has duplicate trust entry for network `{}`", u.id, tr.network));
            }
            if !unit_interval(tr.initial_score) {
                errs.push(format!(
                    "user `{}` initial score {} on `{}` outside [0, 1]",
                    u.id, tr.initial_score, tr.network
                ));
            }
        }
    }

    // Policies.
    let mut policy_keys: BTreeSet<(&str, &str)> = BTreeSet::new();
    for p in &config.policies {
        if !id_ok(&p.id) {
            errs.push(format!("invalid policy id `{}`", p.id));
        }
        if !network_ids.contains(p.network.as_str()) {
            errs.push(format!("policy `{}` references unknown network `{}`", p.id, p.network));
        }
        if !policy_keys.insert((&p.network, &p.id)) {
            errs.push(format!("duplicate policy id `{}` in network `{}`", p.id, p.network));
        }
        if let Some(mt) = p.min_trust {
            if !unit_interval(mt) {
                errs.push(format!("policy `{}` min_trust {mt} outside [0, 1]", p.id));
            }
        }
        for s in &p.scope {
            let known = resource_ids.contains(s.as_str()) || segment_owner.contains_key(s.as_str());
            if !known {
                errs.push(format!("policy `{}` scope entry `{s}` matches no resource or segment", p.id));
            }
        }
        if let (Some(from), Some(until)) = (p.valid_from, p.valid_until) {
            if from > until {
                errs.push(format!("policy `{}` window starts at {from} after it ends at {until}", p.id));
            }
        }
        let constrains_something = p.required_role.is_some()
            || p.min_trust.is_some()
            || !p.scope.is_empty()
            || p.valid_from.is_some()
            || p.valid_until.is_some();
        if !constrains_something {
            errs.push(format!("policy `{}` constrains nothing", p.id));
        }
    }

    // Quick lookups for event validation.
    let resource_by_id: BTreeMap<&str, &ResourceSpec> =
        config.resources.iter().map(|r| (r.id.as_str(), r)).collect();
    let pep_network: BTreeMap<&str, &str> = config
        .networks
        .iter()
        .flat_map(|n| n.pep.iter().map(move |p| (p.id.as_str(), n.id.as_str())))
        .collect();
    let reachable = |resource: &str, network: &str| -> bool {
        resource_by_id
            .get(resource)
            .map(|r| r.shared || r.network == network)
            .unwrap_or(false)
    };
    let network_has_reachable_resource = |network: &str| -> bool {
        config.resources.iter().any(|r| r.shared || r.network == network)
    };

    // Schedule.
    let mut schedule: Vec<ScheduleEvent> = Vec::new();
    let mut last_at: Option<u64> = None;
    for (i, e) in config.events.iter().enumerate() {
        let ctx = format!("event #{}", i + 1);
        if let Some(prev) = last_at {
            if e.at < prev {
                errs.push(format!("{ctx}: schedule must be sorted by time ({} after {prev})", e.at));
            }
        }
        last_at = Some(e.at);

        let need = |field: &Option<String>, name: &str, errs: &mut Vec<String>| -> Option<String> {
            match field {
                Some(v) => Some(v.clone()),
                None => {
                    errs.push(format!("{ctx}: missing `{name}`"));
                    None
                }
            }
        };

        match e.kind.as_str() {
            "request" => {
                let user = need(&e.user, "user", &mut errs);
                let network = need(&e.network, "network", &mut errs);
                let resource = need(&e.resource, "resource", &mut errs);
                let (Some(user), Some(network), Some(resource)) = (user, network, resource) else {
                    continue;
                };
                if !user_ids.contains(user.as_str()) {
                    errs.push(format!("{ctx}: unknown user `{user}`"));
                    continue;
                }
                if !network_ids.contains(network.as_str()) {
                    errs.push(format!("{ctx}: unknown network `{network}`"));
                    continue;
                }
                if !resource_by_id.contains_key(resource.as_str()) {
                    errs.push(format!("{ctx}: unknown resource `{resource}`"));
                    continue;
                }
                if !reachable(&resource, &network) {
                    errs.push(format!(
                        "{ctx}: resource `{resource}` is not reachable from network `{network}`"
                    ));
                    continue;
                }
                schedule.push(ScheduleEvent::Request {
                    at: e.at,
                    user: user.into(),
                    network: network.into(),
                    resource: resource.into(),
                });
            }
            "reauth" => schedule.push(ScheduleEvent::ReauthAll { at: e.at }),
            "attack" => {
                let Some(attack_name) = e.attack.clone() else {
                    errs.push(format!("{ctx}: missing `attack`"));
                    continue;
                };
                let Some(network) = need(&e.network, "network", &mut errs) else {
                    continue;
                };
                if !network_ids.contains(network.as_str()) {
                    errs.push(format!("{ctx}: unknown network `{network}`"));
                    continue;
                }
                let network_id: NetworkId = network.clone().into();

                let (kind, target) = match attack_name.as_str() {
                    "policy_tamper" => {
                        let Some(policy) = need(&e.policy, "policy", &mut errs) else { continue };
                        if !policy_keys.contains(&(network.as_str(), policy.as_str())) {
                            errs.push(format!("{ctx}: network `{network}` has no policy `{policy}`"));
                            continue;
                        }
                        (
                            AttackKind::PolicyTamper,
                            AttackTarget::Policy { network: network_id.clone(), policy: policy.into() },
                        )
                    }
                    "data_manipulation" => (
                        AttackKind::DataManipulation,
                        AttackTarget::TraceLog { network: network_id.clone() },
                    ),
                    "credential_compromise" | "insider_access" => {
                        let Some(user) = need(&e.user, "user", &mut errs) else { continue };
                        if !user_ids.contains(user.as_str()) {
                            errs.push(format!("{ctx}: unknown user `{user}`"));
                            continue;
                        }
                        if let Some(res) = &e.resource {
                            if !reachable(res, &network) {
                                errs.push(format!(
                                    "{ctx}: resource `{res}` is not reachable from network `{network}`"
                                ));
                                continue;
                            }
                        } else if attack_name == "insider_access"
                            && !network_has_reachable_resource(&network)
                        {
                            errs.push(format!(
                                "{ctx}: network `{network}` has no reachable resource for injected requests"
                            ));
                            continue;
                        }
                        let kind = if attack_name == "credential_compromise" {
                            AttackKind::CredentialCompromise
                        } else {
                            AttackKind::InsiderAccess
                        };
                        (
                            kind,
                            AttackTarget::User {
                                network: network_id.clone(),
                                user: user.into(),
                                resource: e.resource.clone().map(Into::into),
                            },
                        )
                    }
                    "ddos_flood" | "component_failure" => {
                        let Some(pep) = need(&e.pep, "pep", &mut errs) else { continue };
                        match pep_network.get(pep.as_str()) {
                            Some(owner) if *owner == network => {}
                            Some(owner) => {
                                errs.push(format!(
                                    "{ctx}: enforcement point `{pep}` belongs to `{owner}`, not `{network}`"
                                ));
                                continue;
                            }
                            None => {
                                errs.push(format!("{ctx}: unknown enforcement point `{pep}`"));
                                continue;
                            }
                        }
                        let kind = if attack_name == "ddos_flood" {
                            if !network_has_reachable_resource(&network) {
                                errs.push(format!(
                                    "{ctx}: network `{network}` has no reachable resource for flood requests"
                                ));
                                continue;
                            }
                            AttackKind::DdosFlood {
                                requests_per_tick: e.requests_per_tick.unwrap_or(100),
                                duration_ticks: e.duration_ticks.unwrap_or(1).max(1),
                            }
                        } else {
                            AttackKind::ComponentFailure { recover_after: e.recover_after }
                        };
                        (
                            kind,
                            AttackTarget::Pep { network: network_id.clone(), pep: pep.into() },
                        )
                    }
                    other => {
                        errs.push(format!("{ctx}: unknown attack `{other}`"));
                        continue;
                    }
                };

                let surface = match e.surface.as_deref() {
                    None => kind.allowed_surfaces()[0],
                    Some("policy_engine") => AttackSurface::PolicyEngine,
                    Some("enforcement_point") => AttackSurface::EnforcementPoint,
                    Some("insider") => AttackSurface::Insider,
                    Some(other) => {
                        errs.push(format!("{ctx}: unknown surface `{other}`"));
                        continue;
                    }
                };
                match AttackEvent::new(surface, kind, e.at, target) {
                    Ok(attack) => schedule.push(ScheduleEvent::Attack(attack)),
                    Err(e) => errs.push(format!("{ctx}: {e}")),
                }
            }
            other => errs.push(format!("{ctx}: unknown event kind `{other}`")),
        }
    }

    if !errs.is_empty() {
        return Err(ScenarioErrors { violations: errs });
    }

    // Resolved views.
    let networks: Vec<EnterpriseNetwork> = config
        .networks
        .iter()
        .map(|n| EnterpriseNetwork {
            network_id: n.id.clone().into(),
            trust_threshold: n.trust_threshold,
            segments: n.segments.iter().map(|s| SegmentId::new(s.clone())).collect(),
            pep_ids: n.pep.iter().map(|p| PepId::new(p.id.clone())).collect(),
        })
        .collect();
    let peps: Vec<PepSetup> = config
        .networks
        .iter()
        .flat_map(|n| {
            n.pep.iter().map(move |p| PepSetup {
                pep_id: p.id.clone().into(),
                network_id: n.id.clone().into(),
                capacity: p.capacity,
                cooldown: p.cooldown,
            })
        })
        .collect();
    let resources: BTreeMap<ResourceId, Resource> = config
        .resources
        .iter()
        .map(|r| {
            let id: ResourceId = r.id.clone().into();
            (
                id.clone(),
                Resource {
                    resource_id: id,
                    segment_id: r.segment.clone().into(),
                    network_id: r.network.clone().into(),
                    shared: r.shared,
                },
            )
        })
        .collect();
    let users: Vec<UserSetup> = config
        .users
        .iter()
        .map(|u| UserSetup {
            user_id: u.id.clone().into(),
            role: u.role.to_role(),
            initial_scores: u
                .trust
                .iter()
                .map(|t| (NetworkId::new(t.network.clone()), t.initial_score))
                .collect(),
        })
        .collect();
    let policies: Vec<PolicySetup> = config
        .policies
        .iter()
        .map(|p| PolicySetup {
            policy_id: p.id.clone().into(),
            network_id: p.network.clone().into(),
            condition: PolicyCondition {
                required_role: p.required_role.map(RoleSpec::to_role),
                min_trust: p.min_trust,
                resource_scope: p.scope.iter().cloned().collect(),
                valid_window: match (p.valid_from, p.valid_until) {
                    (None, None) => None,
                    (from, until) => Some((from.unwrap_or(0), until.unwrap_or(Tick::MAX))),
                },
            },
        })
        .collect();

    Ok(ValidatedScenario {
        seed: config.seed,
        reauth_period: config.reauth_period,
        trust_config: config.trust.clone(),
        latency: config.latency,
        networks,
        peps,
        resources,
        users,
        policies,
        schedule,
        config,
    })
}
