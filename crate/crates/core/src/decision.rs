//! The policy decision point: one per enterprise network.
//!
//! It combines the administrator duties (credential issuance, session
//! bookkeeping, commanding the enforcement point) with the engine duties
//! (running a request through the decision gates). The gates run in a fixed
//! order and the first failure wins:
//!
//! 1. store integrity — a store that fails verification denies everything
//!    with `PolicyTampered`;
//! 2. policy match and freshness — no applicable policy denies with
//!    `NoPolicy`; a policy modified after the request was issued denies with
//!    `PolicyModifiedSinceRequest`;
//! 3. credential check against the issuance registry (`CredentialInvalid`);
//! 4. role requirement (`RoleMismatch`);
//! 5. trust score against the stricter of the network threshold and the
//!    policy's own bound (`TrustBelowThreshold`);
//! 6. grant.
//!
//! Re-authentication replays the same gates for an existing session; any
//! failure turns into a `Revoke` with the failing gate's reason.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{
    AccessRequest, Credential, Decision, DecisionReason, EnterpriseNetwork, NetworkId,
    Resource, ResourceId, SessionId, Tick, UserId, Verdict,
};
use crate::policy::{PolicyRecord, PolicyStore};
use crate::trust::{TrustConfig, TrustEventKind, TrustState};

/// What the decision point tells the enforcement point to do.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PepCommand {
    /// Open a communication channel between subject and resource.
    Open { user: UserId, resource: ResourceId },
    /// Close every channel the subject holds.
    CloseAll { user: UserId },
}

/// Derives the enforcement command for a decision: grants open a channel,
/// everything else slams all of the subject's channels shut.
pub fn command_for(decision: &Decision, user: &UserId, resource: &ResourceId) -> PepCommand {
    if decision.is_grant() {
        PepCommand::Open { user: user.clone(), resource: resource.clone() }
    } else {
        PepCommand::CloseAll { user: user.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessLogEntry {
    pub request_id: u64,
    pub user_id: UserId,
    pub network_id: NetworkId,
    pub verdict: Verdict,
    pub reason: DecisionReason,
    pub decided_at: Tick,
}

/// Administrative actions (credential issuance and the like) are logged
/// separately so request accounting stays one entry per evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdminLogEntry {
    pub user_id: UserId,
    pub action: String,
    pub at: Tick,
}

/// Append-only record of every evaluation this decision point performed.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct AccessLog {
    pub entries: Vec<AccessLogEntry>,
    pub admin: Vec<AdminLogEntry>,
}

impl AccessLog {
    pub const CSV_HEADER: &'static str =
        "request_id,user_id,network_id,verdict,reason,decided_at";

    /// CSV export of the request entries, header first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.request_id, e.user_id, e.network_id, e.verdict, e.reason, e.decided_at
            ));
        }
        out
    }
}

/// A granted session. Holds the original request so re-authentication can
/// replay it against current state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: SessionId,
    pub request: AccessRequest,
    pub granted_at: Tick,
    pub active: bool,
}

/// Result of one mutating evaluation: the decision plus the session handle
/// when the decision opened one.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub decision: Decision,
    pub session: Option<SessionId>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DecisionError {
    #[error("unknown session {0}")]
    UnknownSession(SessionId),
    #[error("session {0} is no longer active")]
    SessionNotActive(SessionId),
    #[error("unknown user {0}")]
    UnknownUser(UserId),
}

/// Decision point for a single network.
#[derive(Clone, Debug)]
pub struct DecisionPoint {
    network: EnterpriseNetwork,
    trust_config: TrustConfig,
    store: PolicyStore,
    resources: BTreeMap<ResourceId, Resource>,
    credentials: BTreeMap<UserId, Credential>,
    trust: BTreeMap<UserId, TrustState>,
    sessions: BTreeMap<SessionId, Session>,
    access_log: AccessLog,
    issued_credentials: u64,
    opened_sessions: u64,
}

impl DecisionPoint {
    pub fn new(network: EnterpriseNetwork, trust_config: TrustConfig) -> Self {
        Self {
            network,
            trust_config,
            store: PolicyStore::new(),
            resources: BTreeMap::new(),
            credentials: BTreeMap::new(),
            trust: BTreeMap::new(),
            sessions: BTreeMap::new(),
            access_log: AccessLog::default(),
            issued_credentials: 0,
            opened_sessions: 0,
        }
    }

    pub fn network(&self) -> &EnterpriseNetwork {
        &self.network
    }

    pub fn store(&self) -> &PolicyStore {
        &self.store
    }

    /// Mutable store access. Legitimate administration and attack staging
    /// both go through here.
    pub fn store_mut(&mut self) -> &mut PolicyStore {
        &mut self.store
    }

    pub fn access_log(&self) -> &AccessLog {
        &self.access_log
    }

    pub fn register_resource(&mut self, resource: Resource) {
        self.resources.insert(resource.resource_id.clone(), resource);
    }

    /// Introduces a subject: seeds its trust state and issues its first
    /// credential.
    pub fn register_user(&mut self, user_id: UserId, base_score: f64, at: Tick) -> Credential {
        self.trust.insert(
            user_id.clone(),
            TrustState::new(user_id.clone(), self.network.network_id.clone(), base_score),
        );
        self.issue_credential_internal(user_id, at)
    }

    /// Issues a fresh credential for a known subject, replacing whatever was
    /// on file, and logs the action administratively.
    pub fn issue_credential(&mut self, user_id: &UserId, at: Tick) -> Result<Credential, DecisionError> {
        if !self.trust.contains_key(user_id) {
            return Err(DecisionError::UnknownUser(user_id.clone()));
        }
        Ok(self.issue_credential_internal(user_id.clone(), at))
    }

    fn issue_credential_internal(&mut self, user_id: UserId, at: Tick) -> Credential {
        self.issued_credentials += 1;
        let credential = Credential::new(
            format!("cred-{}-{}-{}", self.network.network_id, user_id, self.issued_credentials),
            at,
        );
        self.credentials.insert(user_id.clone(), credential.clone());
        self.access_log.admin.push(AdminLogEntry {
            user_id,
            action: "issue_credential".into(),
            at,
        });
        credential
    }

    pub fn trust_state(&self, user_id: &UserId) -> Option<&TrustState> {
        self.trust.get(user_id)
    }

    /// Records a trust event (used both by normal decision flow and by
    /// attack staging, e.g. flagging an insider).
    pub fn record_trust_event(&mut self, user_id: &UserId, kind: TrustEventKind, at: Tick) {
        if let Some(state) = self.trust.get_mut(user_id) {
            state.record(kind, at);
        }
    }

    /// Overwrites the credential on file with a forged one. This models a
    /// compromised issuance registry: the subject's authentic credential no
    /// longer matches what the administrator believes it issued.
    pub fn poison_credential(&mut self, user_id: &UserId, at: Tick) {
        self.credentials
            .insert(user_id.clone(), Credential::new(format!("forged-{user_id}"), at));
    }

    pub fn session(&self, session_id: &SessionId) -> Option<&Session> {
        self.sessions.get(session_id)
    }

    pub fn active_sessions(&self) -> impl Iterator<Item = &Session> {
        self.sessions.values().filter(|s| s.active)
    }

    /// Most specific policy applicable to `resource` at `at`: a scope entry
    /// naming the resource beats one naming its segment beats an unscoped
    /// policy; ties break on policy id.
    pub fn match_policy(&self, resource: &Resource, at: Tick) -> Option<&PolicyRecord> {
        let mut best: Option<(u8, &PolicyRecord)> = None;
        for record in self.store.policies() {
            if let Some((start, end)) = record.condition.valid_window {
                if at < start || at > end {
                    continue;
                }
            }
            let scope = &record.condition.resource_scope;
            let specificity = if scope.is_empty() {
                0
            } else if scope.contains(resource.resource_id.as_str()) {
                2
            } else if scope.contains(resource.segment_id.as_str()) {
                1
            } else {
                continue;
            };
            let better = match best {
                None => true,
                // Strict comparison keeps the lowest policy id on ties
                // because iteration is already in id order.
                Some((s, _)) => specificity > s,
            };
            if better {
                best = Some((specificity, record));
            }
        }
        best.map(|(_, record)| record)
    }

    /// Pure decision function: no logging, no trust updates, no sessions.
    /// Calling it twice with the same state yields the same decision.
    pub fn decide(&self, request: &AccessRequest, at: Tick) -> Decision {
        // Gate 1: never trust a store that fails verification.
        if !self.store.verify_integrity().intact {
            return Decision::deny(DecisionReason::PolicyTampered, at);
        }

        // Gate 2: an applicable, unmodified policy must exist.
        let resource = match self.resources.get(&request.target) {
            Some(r) => r,
            None => return Decision::deny(DecisionReason::NoPolicy, at),
        };
        let policy = match self.match_policy(resource, at) {
            Some(p) => p,
            None => return Decision::deny(DecisionReason::NoPolicy, at),
        };
        match self.store.modified_since(&policy.policy_id, request.issued_at) {
            Ok(false) => {}
            // Modified after issue, or the record became unverifiable.
            Ok(true) | Err(_) => {
                return Decision::deny(DecisionReason::PolicyModifiedSinceRequest, at)
            }
        }

        // Gate 3: the presented credential must be the one on file and must
        // not come from the future.
        let valid_credential = self
            .credentials
            .get(&request.user.user_id)
            .map(|issued| issued == &request.user.credential && issued.issued_at <= at)
            .unwrap_or(false);
        if !valid_credential {
            return Decision::deny(DecisionReason::CredentialInvalid, at);
        }

        // Gate 4: role requirement.
        if let Some(required) = policy.condition.required_role {
            if required != request.user.role {
                return Decision::deny(DecisionReason::RoleMismatch, at);
            }
        }

        // Gate 5: trust threshold — the stricter of network and policy.
        let score = self
            .trust
            .get(&request.user.user_id)
            .map(|s| s.score(&self.trust_config))
            .unwrap_or(self.trust_config.min_score);
        let threshold = self
            .network
            .trust_threshold
            .max(policy.condition.min_trust.unwrap_or(0.0));
        if score < threshold {
            return Decision::deny(DecisionReason::TrustBelowThreshold, at);
        }

        Decision::grant(at)
    }

    /// Full evaluation: decides, logs, updates trust, and opens a session on
    /// grant.
    pub fn evaluate(&mut self, request: &AccessRequest, at: Tick) -> Evaluation {
        let decision = self.decide(request, at);
        self.log_decision(request, &decision);
        self.apply_trust_feedback(&request.user.user_id, &decision, at);
        let session = if decision.is_grant() {
            self.opened_sessions += 1;
            let session_id =
                SessionId::new(format!("sess-{}-{}", self.network.network_id, self.opened_sessions));
            self.sessions.insert(
                session_id.clone(),
                Session {
                    session_id: session_id.clone(),
                    request: request.clone(),
                    granted_at: at,
                    active: true,
                },
            );
            Some(session_id)
        } else {
            None
        };
        Evaluation { decision, session }
    }

    /// Re-runs the gates for a granted session. A pass keeps the grant; any
    /// gate failure revokes the session with that gate's reason.
    pub fn reauthenticate(&mut self, session_id: &SessionId, at: Tick) -> Result<Decision, DecisionError> {
        let session = self
            .sessions
            .get(session_id)
            .ok_or_else(|| DecisionError::UnknownSession(session_id.clone()))?;
        if !session.active {
            return Err(DecisionError::SessionNotActive(session_id.clone()));
        }
        let request = session.request.clone();
        let fresh = self.decide(&request, at);
        let decision = if fresh.is_grant() {
            fresh
        } else {
            Decision::revoke(fresh.reason(), at)
        };
        if decision.verdict() == Verdict::Revoke {
            if let Some(s) = self.sessions.get_mut(session_id) {
                s.active = false;
            }
        }
        self.log_decision(&request, &decision);
        self.apply_trust_feedback(&request.user.user_id, &decision, at);
        Ok(decision)
    }

    fn log_decision(&mut self, request: &AccessRequest, decision: &Decision) {
        self.access_log.entries.push(AccessLogEntry {
            request_id: request.request_id,
            user_id: request.user.user_id.clone(),
            network_id: self.network.network_id.clone(),
            verdict: decision.verdict(),
            reason: decision.reason(),
            decided_at: decision.decided_at(),
        });
    }

    fn apply_trust_feedback(&mut self, user_id: &UserId, decision: &Decision, at: Tick) {
        let kind = match (decision.verdict(), decision.reason()) {
            (Verdict::Grant, _) => TrustEventKind::AuthSuccess,
            (_, DecisionReason::CredentialInvalid) => TrustEventKind::BreachAttempt,
            _ => TrustEventKind::AuthFailure,
        };
        self.record_trust_event(user_id, kind, at);
    }
}
