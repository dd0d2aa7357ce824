//! Deterministic discrete-event simulation of a zero-trust deployment.
//!
//! The simulator wires one decision point per network to that network's
//! enforcement points, then drives the validated schedule through a single
//! event queue. Everything is keyed by `(tick, sequence)`: in-flight work
//! (forwarded requests, pending enforcement, session re-authentication)
//! always carries a lower sequence number than scheduled scenario events,
//! so within a tick the pipeline drains before new scenario input lands.
//! Two runs of the same scenario produce byte-identical reports.
//!
//! Request pipeline and its tick costs:
//!
//! ```text
//! issue --intercept--> PEP --pep_to_pdp--> PDP --decision--> verdict
//!                                                   |
//! channel open/closed <--- PEP <---pdp_to_pep--- command
//! ```
//!
//! Response time is measured from issue to command enforcement; the policy
//! check time is the decision stage alone. Requests dropped by a downed or
//! overloaded enforcement point never produce a decision and count against
//! availability (`served / offered`).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::decision::{command_for, AccessLogEntry, DecisionPoint, PepCommand};
use crate::enforcement::{Intercepted, PepState};
use crate::model::{
    AccessRequest, AttackEvent, AttackKind, AttackTarget, Credential, DecisionReason,
    DurationStats, KpiSnapshot, NetworkId, PepId, ResourceId, Role, SessionId, Tick, UserId,
    UserIdentity, Verdict,
};
use crate::policy::PolicyCondition;
use crate::scenario::{LatencySettings, ScheduleEvent, ValidatedScenario};
use crate::trust::TrustEventKind;

/// Scenario events sort after any runtime continuation at the same tick.
const CONFIG_BASE: u64 = 1 << 32;

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// Raw counters the key indicators are computed from, kept in the report so
/// the arithmetic can be audited.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounts {
    /// Scheduled (legitimate) requests entering the system.
    pub offered: u64,
    /// Scheduled requests that ended in an enforced grant.
    pub served: u64,
    /// Scheduled requests dropped because no enforcement point accepted them.
    pub dropped: u64,
    /// Attack-injected requests (flood traffic, insider attempts).
    pub synthetic_requests: u64,
    /// Every decision made, initial and re-authentication, across networks.
    pub decisions: u64,
    pub grants: u64,
    pub denials: u64,
    pub revocations: u64,
    pub attacks_applied: u64,
}

/// Per-network view of what happened.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkOutcome {
    /// Verdicts in decision order, e.g. `["Grant", "Revoke"]`.
    pub verdicts: Vec<String>,
    pub grants: u64,
    pub denials: u64,
    pub revocations: u64,
    /// Full access log of this network's decision point.
    pub log: Vec<AccessLogEntry>,
    pub admin_log_len: u64,
    /// Whether the policy store still verified at the end of the run.
    pub store_intact: bool,
}

/// Which networks an attack's effects reached. Row = network the attack
/// targeted, column = network with a stake in an affected resource (the
/// owner, or everyone for shared resources). A fully contained run has
/// marks only on the diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentMatrix {
    pub networks: Vec<String>,
    pub matrix: Vec<Vec<bool>>,
}

impl ContainmentMatrix {
    fn new(networks: Vec<String>) -> Self {
        let n = networks.len();
        Self { networks, matrix: vec![vec![false; n]; n] }
    }

    fn index(&self, id: &str) -> Option<usize> {
        self.networks.iter().position(|n| n == id)
    }

    fn mark(&mut self, source: &str, affected: &str) {
        if let (Some(i), Some(j)) = (self.index(source), self.index(affected)) {
            self.matrix[i][j] = true;
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &hit)| !hit || i == j))
    }

    pub fn affected(&self, source: &str, target: &str) -> bool {
        match (self.index(source), self.index(target)) {
            (Some(i), Some(j)) => self.matrix[i][j],
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineEvent {
    pub tick: Tick,
    pub what: String,
}

/// Everything a run produced. Serializes deterministically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    /// One-line verdict digest, networks in declaration order, e.g.
    /// `net1 Grant, net2 Deny, net3 Deny`.
    pub summary: String,
    pub counts: RunCounts,
    pub kpis: KpiSnapshot,
    pub per_network: BTreeMap<String, NetworkOutcome>,
    pub containment: ContainmentMatrix,
    pub timeline: Vec<TimelineEvent>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

// ---------------------------------------------------------------------------
// Event queue
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Origin {
    Scheduled,
    Flood,
    Insider,
}

#[derive(Clone, Debug)]
struct RequestCtx {
    request: AccessRequest,
    pep: PepId,
    origin: Origin,
}

#[derive(Clone, Debug)]
enum Action {
    Config(ScheduleEvent),
    /// Request has crossed to the decision point and the decision completes
    /// at this event's tick.
    Decide(RequestCtx),
    /// Command arrives back at the enforcement point. `completes` carries
    /// the issue tick and grant flag for requests finishing their initial
    /// round trip.
    Enforce { pep: PepId, command: PepCommand, completes: Option<(Tick, bool, Origin)> },
    ReauthSession { network: NetworkId, session: SessionId },
    FloodBatch { network: NetworkId, pep: PepId, count: u32 },
    PepRecover { pep: PepId },
}

#[derive(Debug)]
struct Queued {
    tick: Tick,
    seq: u64,
    action: Action,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        (self.tick, self.seq) == (other.tick, other.seq)
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap and we want the earliest event.
        (other.tick, other.seq).cmp(&(self.tick, self.seq))
    }
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

struct Sim<'a> {
    scenario: &'a ValidatedScenario,
    latency: LatencySettings,
    /// Last tick at which new re-authentications may be scheduled: one
    /// period past the final scenario event. Without the cutoff a healthy
    /// session would re-arm itself forever and the run would never end.
    reauth_horizon: Tick,
    pdps: BTreeMap<NetworkId, DecisionPoint>,
    peps: BTreeMap<PepId, PepState>,
    user_credentials: BTreeMap<(NetworkId, UserId), Credential>,
    user_roles: BTreeMap<UserId, Role>,
    queue: BinaryHeap<Queued>,
    next_seq: u64,
    next_request: u64,
    next_intruder: u64,
    /// Which enforcement point carried the request behind each session, so
    /// revocations can be pushed back to the same box.
    session_pep: BTreeMap<SessionId, PepId>,
    // Attack attribution.
    poisoned: BTreeSet<(NetworkId, UserId)>,
    insiders: BTreeSet<(NetworkId, UserId)>,
    attack_downed: BTreeSet<PepId>,
    flood_windows: Vec<(PepId, Tick, Tick)>,
    // Accounting.
    counts: RunCounts,
    response_samples: Vec<u64>,
    check_samples: Vec<u64>,
    breach_attempts: u64,
    containment: ContainmentMatrix,
    timeline: Vec<TimelineEvent>,
}

/// Runs a validated scenario to completion and reports.
pub fn run(scenario: &ValidatedScenario) -> RunReport {
    let mut sim = Sim::new(scenario);
    sim.drain();
    sim.into_report()
}

impl<'a> Sim<'a> {
    fn new(scenario: &'a ValidatedScenario) -> Self {
        let mut pdps: BTreeMap<NetworkId, DecisionPoint> = BTreeMap::new();
        for network in &scenario.networks {
            pdps.insert(
                network.network_id.clone(),
                DecisionPoint::new(network.clone(), scenario.trust_config.clone()),
            );
        }
        let mut peps: BTreeMap<PepId, PepState> = BTreeMap::new();
        for setup in &scenario.peps {
            peps.insert(
                setup.pep_id.clone(),
                PepState::new(
                    setup.pep_id.clone(),
                    setup.network_id.clone(),
                    setup.capacity,
                    setup.cooldown,
                ),
            );
        }
        // Resources are visible to every decision point that can reach them.
        for (_, resource) in &scenario.resources {
            for (net_id, pdp) in pdps.iter_mut() {
                if resource.reachable_from(net_id) {
                    pdp.register_resource(resource.clone());
                }
            }
        }
        // Policies come into force at tick 0.
        for policy in &scenario.policies {
            let pdp = pdps.get_mut(&policy.network_id).expect("validated network");
            pdp.store_mut()
                .create_policy(policy.policy_id.clone(), policy.condition.clone(), 0)
                .expect("validated policies create cleanly");
        }
        // Users enroll everywhere with their per-network starting score.
        let mut user_credentials = BTreeMap::new();
        let mut user_roles = BTreeMap::new();
        for user in &scenario.users {
            user_roles.insert(user.user_id.clone(), user.role);
            for (net_id, pdp) in pdps.iter_mut() {
                let base = user
                    .initial_scores
                    .get(net_id)
                    .copied()
                    .unwrap_or(scenario.trust_config.base_score);
                let credential = pdp.register_user(user.user_id.clone(), base, 0);
                user_credentials.insert((net_id.clone(), user.user_id.clone()), credential);
            }
        }

        let networks: Vec<String> =
            scenario.networks.iter().map(|n| n.network_id.to_string()).collect();
        let mut queue = BinaryHeap::new();
        for (i, event) in scenario.schedule.iter().enumerate() {
            queue.push(Queued {
                tick: event.at(),
                seq: CONFIG_BASE + i as u64,
                action: Action::Config(event.clone()),
            });
        }

        let last_event = scenario.schedule.iter().map(ScheduleEvent::at).max().unwrap_or(0);
        Self {
            scenario,
            latency: scenario.latency,
            reauth_horizon: last_event + scenario.reauth_period,
            pdps,
            peps,
            user_credentials,
            user_roles,
            queue,
            next_seq: 0,
            next_request: 0,
            next_intruder: 0,
            session_pep: BTreeMap::new(),
            poisoned: BTreeSet::new(),
            insiders: BTreeSet::new(),
            attack_downed: BTreeSet::new(),
            flood_windows: Vec::new(),
            counts: RunCounts::default(),
            response_samples: Vec::new(),
            check_samples: Vec::new(),
            breach_attempts: 0,
            containment: ContainmentMatrix::new(networks),
            timeline: Vec::new(),
        }
    }

    fn schedule(&mut self, tick: Tick, action: Action) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Queued { tick, seq, action });
    }

    fn note(&mut self, tick: Tick, what: String) {
        self.timeline.push(TimelineEvent { tick, what });
    }

    fn drain(&mut self) {
        while let Some(Queued { tick, action, .. }) = self.queue.pop() {
            match action {
                Action::Config(event) => self.on_config(tick, event),
                Action::Decide(ctx) => self.on_decide(tick, ctx),
                Action::Enforce { pep, command, completes } => {
                    self.on_enforce(tick, pep, command, completes)
                }
                Action::ReauthSession { network, session } => {
                    self.reauth_session(tick, &network, &session)
                }
                Action::FloodBatch { network, pep, count } => {
                    self.on_flood_batch(tick, &network, &pep, count)
                }
                Action::PepRecover { pep } => {
                    if let Some(state) = self.peps.get_mut(&pep) {
                        state.recover(tick);
                    }
                    self.attack_downed.remove(&pep);
                    self.note(tick, format!("pep {pep} recovered"));
                }
            }
        }
    }

    fn on_config(&mut self, tick: Tick, event: ScheduleEvent) {
        match event {
            ScheduleEvent::Request { user, network, resource, .. } => {
                self.counts.offered += 1;
                let request = self.build_request(&network, &user, &resource, tick);
                self.dispatch_request(tick, request, None, Origin::Scheduled);
            }
            ScheduleEvent::Attack(attack) => self.apply_attack(tick, attack),
            ScheduleEvent::ReauthAll { .. } => {
                for network in self.scenario.networks.iter().map(|n| n.network_id.clone()).collect::<Vec<_>>() {
                    let sessions: Vec<SessionId> = self.pdps[&network]
                        .active_sessions()
                        .map(|s| s.session_id.clone())
                        .collect();
                    for session in sessions {
                        self.reauth_session(tick, &network, &session);
                    }
                }
            }
        }
    }

    fn build_request(
        &mut self,
        network: &NetworkId,
        user: &UserId,
        resource: &ResourceId,
        at: Tick,
    ) -> AccessRequest {
        self.next_request += 1;
        let credential = self
            .user_credentials
            .get(&(network.clone(), user.clone()))
            .cloned()
            .unwrap_or_else(|| Credential::new(format!("unissued-{user}"), at));
        let role = self.user_roles.get(user).copied().unwrap_or(Role::NormalUser);
        AccessRequest {
            request_id: self.next_request,
            user: UserIdentity { user_id: user.clone(), role, credential, session_id: None },
            target: resource.clone(),
            network_id: network.clone(),
            issued_at: at,
        }
    }

    /// Runs the enforcement-point stage: tries `only` or every point in the
    /// network in declared order, forwarding to the decision point on the
    /// first acceptance and dropping the request when none is available.
    fn dispatch_request(
        &mut self,
        tick: Tick,
        request: AccessRequest,
        only: Option<&PepId>,
        origin: Origin,
    ) {
        if origin != Origin::Scheduled {
            self.counts.synthetic_requests += 1;
        }
        let candidates: Vec<PepId> = match only {
            Some(p) => vec![p.clone()],
            None => self
                .scenario
                .network(&request.network_id)
                .map(|n| n.pep_ids.clone())
                .unwrap_or_default(),
        };
        let mut attack_drop = false;
        for pep_id in candidates {
            if self.try_intercept(&pep_id, &request, tick) {
                let arrive = tick + self.latency.pep_to_pdp + self.latency.decision;
                if origin == Origin::Scheduled {
                    self.note(
                        tick,
                        format!(
                            "request {} {} -> {} accepted by {pep_id}",
                            request.request_id, request.user.user_id, request.target
                        ),
                    );
                }
                let ctx = RequestCtx { request, pep: pep_id, origin };
                self.schedule(arrive, Action::Decide(ctx));
                return;
            }
            if self.attack_downed.contains(&pep_id) {
                attack_drop = true;
            }
        }
        if origin == Origin::Scheduled {
            self.counts.dropped += 1;
            self.note(
                tick,
                format!(
                    "request {} {} -> {} dropped: no enforcement point available",
                    request.request_id, request.user.user_id, request.target
                ),
            );
        }
        if attack_drop {
            self.mark_effect(&request.network_id, &request.target);
        }
    }

    fn try_intercept(&mut self, pep_id: &PepId, request: &AccessRequest, at: Tick) -> bool {
        let flood_active = self
            .flood_windows
            .iter()
            .any(|(p, start, end)| p == pep_id && *start <= at && at < *end);
        let Some(pep) = self.peps.get_mut(pep_id) else { return false };
        let was_up = pep.is_up();
        match pep.intercept(request, at) {
            Intercepted::Forwarded(_) => {
                self.attack_downed.remove(pep_id);
                true
            }
            Intercepted::Unavailable => {
                if was_up && !self.peps[pep_id].is_up() {
                    self.note(at, format!("pep {pep_id} tripped its intake limit"));
                    if flood_active {
                        self.attack_downed.insert(pep_id.clone());
                    }
                }
                false
            }
        }
    }

    fn on_decide(&mut self, tick: Tick, ctx: RequestCtx) {
        let pdp = self.pdps.get_mut(&ctx.request.network_id).expect("validated network");
        let evaluation = pdp.evaluate(&ctx.request, tick);
        let decision = evaluation.decision;
        self.check_samples.push(self.latency.decision);
        self.count_decision(decision.verdict());
        self.attack_effects(
            &ctx.request.network_id,
            &ctx.request.user.user_id,
            &ctx.request.target,
            decision.reason(),
            ctx.origin,
        );
        self.note(
            tick,
            format!(
                "decision {}: {} ({}) for {}",
                ctx.request.request_id,
                decision.verdict(),
                decision.reason(),
                ctx.request.user.user_id
            ),
        );
        if let Some(session_id) = evaluation.session {
            self.session_pep.insert(session_id.clone(), ctx.pep.clone());
            self.arm_reauth(tick, &ctx.request.network_id, &session_id);
        }
        let command = command_for(&decision, &ctx.request.user.user_id, &ctx.request.target);
        self.schedule(
            tick + self.latency.pdp_to_pep,
            Action::Enforce {
                pep: ctx.pep,
                command,
                completes: Some((ctx.request.issued_at, decision.is_grant(), ctx.origin)),
            },
        );
    }

    fn on_enforce(
        &mut self,
        tick: Tick,
        pep: PepId,
        command: PepCommand,
        completes: Option<(Tick, bool, Origin)>,
    ) {
        if let Some(state) = self.peps.get_mut(&pep) {
            state.enforce(&command);
        }
        if let Some((issued_at, granted, origin)) = completes {
            if origin == Origin::Scheduled {
                self.response_samples.push(tick - issued_at);
                if granted {
                    self.counts.served += 1;
                }
            }
        }
    }

    fn reauth_session(&mut self, tick: Tick, network: &NetworkId, session_id: &SessionId) {
        let Some(pdp) = self.pdps.get_mut(network) else { return };
        let Some(session) = pdp.session(session_id).cloned() else { return };
        let Ok(decision) = pdp.reauthenticate(session_id, tick) else {
            return; // already revoked or expired; the chain stops here
        };
        self.check_samples.push(self.latency.decision);
        self.count_decision(decision.verdict());
        self.attack_effects(
            network,
            &session.request.user.user_id,
            &session.request.target,
            decision.reason(),
            Origin::Scheduled,
        );
        if decision.is_grant() {
            self.arm_reauth(tick, network, session_id);
        } else {
            self.note(
                tick,
                format!("session {session_id} revoked ({})", decision.reason()),
            );
            let pep = self
                .session_pep
                .get(session_id)
                .cloned()
                .unwrap_or_else(|| self.scenario.network(network).expect("network").pep_ids[0].clone());
            let command =
                command_for(&decision, &session.request.user.user_id, &session.request.target);
            self.schedule(
                tick + self.latency.pdp_to_pep,
                Action::Enforce { pep, command, completes: None },
            );
        }
    }

    /// Schedules the session's next re-authentication, unless the run is
    /// already past the point where new periods start.
    fn arm_reauth(&mut self, tick: Tick, network: &NetworkId, session_id: &SessionId) {
        let period = self.scenario.reauth_period;
        if period == 0 || tick + period > self.reauth_horizon {
            return;
        }
        self.schedule(
            tick + period,
            Action::ReauthSession { network: network.clone(), session: session_id.clone() },
        );
    }

    fn count_decision(&mut self, verdict: Verdict) {
        self.counts.decisions += 1;
        match verdict {
            Verdict::Grant => self.counts.grants += 1,
            Verdict::Deny => self.counts.denials += 1,
            Verdict::Revoke => self.counts.revocations += 1,
        }
    }

    /// Attack attribution on a decision outcome: tampering shows up as
    /// integrity denials, compromised credentials and flood traffic as
    /// credential denials, and insiders by identity regardless of verdict.
    fn attack_effects(
        &mut self,
        network: &NetworkId,
        user: &UserId,
        resource: &ResourceId,
        reason: DecisionReason,
        origin: Origin,
    ) {
        if reason == DecisionReason::CredentialInvalid {
            self.breach_attempts += 1;
        }
        let key = (network.clone(), user.clone());
        let attack_related = match reason {
            DecisionReason::PolicyTampered => true,
            DecisionReason::CredentialInvalid => {
                origin == Origin::Flood || self.poisoned.contains(&key)
            }
            _ => false,
        } || self.insiders.contains(&key);
        if attack_related {
            self.mark_effect(network, resource);
        }
    }

    /// Marks the containment matrix: the attacked network's row, with a
    /// column for every network that can reach the affected resource.
    fn mark_effect(&mut self, attacked: &NetworkId, resource: &ResourceId) {
        let Some(res) = self.scenario.resources.get(resource) else { return };
        if res.shared {
            for net in self.containment.networks.clone() {
                self.containment.mark(attacked.as_str(), &net);
            }
        } else {
            self.containment.mark(attacked.as_str(), res.network_id.as_str());
        }
    }

    fn apply_attack(&mut self, tick: Tick, attack: AttackEvent) {
        self.counts.attacks_applied += 1;
        let network = attack.target.network().clone();
        self.containment.mark(network.as_str(), network.as_str());
        // Credential compromise is counted as a breach attempt when it is
        // exploited (each credential denial), and a plain component failure
        // is not hostile traffic at all; the other kinds count on arrival.
        match (attack.kind.clone(), attack.target.clone()) {
            (AttackKind::PolicyTamper, AttackTarget::Policy { policy, .. }) => {
                self.breach_attempts += 1;
                let pdp = self.pdps.get_mut(&network).expect("validated network");
                if let Some(record) = pdp.store().get(&policy).cloned() {
                    let weakened = PolicyCondition {
                        required_role: None,
                        min_trust: Some(0.0),
                        resource_scope: record.condition.resource_scope.clone(),
                        valid_window: record.condition.valid_window,
                    };
                    let _ = pdp.store_mut().tamper(&policy, weakened, tick);
                }
                self.note(tick, format!("attack: policy {policy} on {network} rewritten in place"));
            }
            (AttackKind::DataManipulation, AttackTarget::TraceLog { .. }) => {
                self.breach_attempts += 1;
                let index = (self.scenario.seed ^ tick) as usize;
                let pdp = self.pdps.get_mut(&network).expect("validated network");
                pdp.store_mut().corrupt_chain(index);
                self.note(tick, format!("attack: trace log of {network} corrupted"));
            }
            (AttackKind::CredentialCompromise, AttackTarget::User { user, .. }) => {
                let pdp = self.pdps.get_mut(&network).expect("validated network");
                pdp.poison_credential(&user, tick);
                self.poisoned.insert((network.clone(), user.clone()));
                self.note(tick, format!("attack: credential registry entry for {user} on {network} replaced"));
            }
            (AttackKind::DdosFlood { requests_per_tick, duration_ticks }, AttackTarget::Pep { pep, .. }) => {
                self.breach_attempts += 1;
                self.flood_windows.push((pep.clone(), tick, tick + duration_ticks));
                for offset in 0..duration_ticks {
                    self.schedule(
                        tick + offset,
                        Action::FloodBatch {
                            network: network.clone(),
                            pep: pep.clone(),
                            count: requests_per_tick,
                        },
                    );
                }
                self.note(
                    tick,
                    format!(
                        "attack: flood of {requests_per_tick}/tick at {pep} for {duration_ticks} tick(s)"
                    ),
                );
            }
            (AttackKind::InsiderAccess, AttackTarget::User { user, resource, .. }) => {
                self.breach_attempts += 1;
                self.insiders.insert((network.clone(), user.clone()));
                let pdp = self.pdps.get_mut(&network).expect("validated network");
                pdp.record_trust_event(&user, TrustEventKind::InsiderFlag, tick);
                let target = resource.or_else(|| self.first_reachable_resource(&network));
                if let Some(target) = target {
                    let request = self.build_request(&network, &user, &target, tick);
                    self.note(tick, format!("attack: insider {user} probes {target} on {network}"));
                    self.dispatch_request(tick, request, None, Origin::Insider);
                }
            }
            (AttackKind::ComponentFailure { recover_after }, AttackTarget::Pep { pep, .. }) => {
                if let Some(state) = self.peps.get_mut(&pep) {
                    state.fail(tick);
                }
                self.attack_downed.insert(pep.clone());
                self.note(tick, format!("attack: pep {pep} knocked out"));
                if let Some(delay) = recover_after {
                    self.schedule(tick + delay, Action::PepRecover { pep });
                }
            }
            // Validation guarantees kind/target agreement; anything else is
            // unreachable.
            _ => unreachable!("attack kind and target were validated together"),
        }
    }

    fn on_flood_batch(&mut self, tick: Tick, network: &NetworkId, pep: &PepId, count: u32) {
        let Some(target) = self.first_reachable_resource(network) else { return };
        for _ in 0..count {
            self.next_intruder += 1;
            let user: UserId = format!("intruder-{}", self.next_intruder).into();
            self.next_request += 1;
            let request = AccessRequest {
                request_id: self.next_request,
                user: UserIdentity {
                    user_id: user.clone(),
                    role: Role::NormalUser,
                    credential: Credential::new(format!("spoofed-{user}"), tick),
                    session_id: None,
                },
                target: target.clone(),
                network_id: network.clone(),
                issued_at: tick,
            };
            self.dispatch_request(tick, request, Some(pep), Origin::Flood);
        }
    }

    fn first_reachable_resource(&self, network: &NetworkId) -> Option<ResourceId> {
        self.scenario
            .resources
            .values()
            .find(|r| r.reachable_from(network))
            .map(|r| r.resource_id.clone())
    }

    fn into_report(self) -> RunReport {
        let mut per_network: BTreeMap<String, NetworkOutcome> = BTreeMap::new();
        let mut activity_log_len = 0u64;
        for network in &self.scenario.networks {
            let pdp = &self.pdps[&network.network_id];
            let log = pdp.access_log();
            activity_log_len += log.entries.len() as u64;
            let mut outcome = NetworkOutcome {
                verdicts: log.entries.iter().map(|e| e.verdict.to_string()).collect(),
                log: log.entries.clone(),
                admin_log_len: log.admin.len() as u64,
                store_intact: pdp.store().verify_integrity().intact,
                ..NetworkOutcome::default()
            };
            for entry in &log.entries {
                match entry.verdict {
                    Verdict::Grant => outcome.grants += 1,
                    Verdict::Deny => outcome.denials += 1,
                    Verdict::Revoke => outcome.revocations += 1,
                }
            }
            per_network.insert(network.network_id.to_string(), outcome);
        }
        let summary = self
            .scenario
            .networks
            .iter()
            .map(|n| {
                let outcome = &per_network[&n.network_id.to_string()];
                if outcome.verdicts.is_empty() {
                    format!("{} -", n.network_id)
                } else {
                    format!("{} {}", n.network_id, outcome.verdicts.join("+"))
                }
            })
            .collect::<Vec<_>>()
            .join(", ");

        let availability = if self.counts.offered == 0 {
            1.0
        } else {
            self.counts.served as f64 / self.counts.offered as f64
        };
        let kpis = KpiSnapshot {
            response_time: DurationStats::from_samples(&self.response_samples),
            policy_check_time: DurationStats::from_samples(&self.check_samples),
            breach_attempts: self.breach_attempts,
            unauthorized_attempts: self.counts.denials + self.counts.revocations,
            offered_requests: self.counts.offered,
            served_requests: self.counts.served,
            availability,
            activity_log_len,
        };

        RunReport {
            seed: self.scenario.seed,
            summary,
            counts: self.counts,
            kpis,
            per_network,
            containment: self.containment,
            timeline: self.timeline,
        }
    }
}
