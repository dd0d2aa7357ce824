//! Policy storage with a tamper-evident trace log.
//!
//! Every legitimate mutation (create / modify / revoke) appends an entry to
//! an append-only log, and each entry carries a chain hash:
//!
//! ```text
//! chain[i] = H(chain[i-1] || canon(entry[i]))
//! ```
//!
//! with a fixed genesis constant in place of `chain[-1]`. `canon` is a
//! canonical byte encoding: fields in a fixed order, each prefixed with its
//! byte length as a little-endian `u64`. Entry fields are encoded as
//!
//! 1. `policy_id` UTF-8 bytes
//! 2. `version` as 4 little-endian bytes
//! 3. `action` as 1 byte (0 create, 1 modify, 2 revoke)
//! 4. `at` as 8 little-endian bytes
//! 5. `condition_digest` as lowercase-hex UTF-8 bytes
//!
//! The condition digest hashes the policy condition the entry commits to,
//! again field by field (role presence+tag, trust bound as IEEE-754 bits,
//! scope entries sorted and length-prefixed, validity window as two
//! little-endian `u64`s). Because the digest binds the condition *content*,
//! rewriting a stored record without logging it is always detectable: the
//! stored record no longer matches what the log chain committed to.
//!
//! `verify_integrity` never trusts the store: it recomputes the whole chain
//! and cross-checks every stored record against its log history. `tamper` is
//! deliberately public — it is how tests and attack simulations model an
//! adversary with write access to the store but not to the hash chain.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::model::{PolicyId, Role, Tick};

/// Seed value standing in for `chain[-1]`.
const GENESIS_SEED: &[u8] = b"ztdn-trace-genesis-v1";

// ---------------------------------------------------------------------------
// Digest plumbing
// ---------------------------------------------------------------------------

/// Hash algorithm for the trace chain. `Sha256` is the default; `Fnv64` is a
/// deliberately short digest that keeps fixtures readable in tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DigestAlgo {
    Sha256,
    Fnv64,
}

impl DigestAlgo {
    pub fn digest(&self, bytes: &[u8]) -> Vec<u8> {
        match self {
            DigestAlgo::Sha256 => Sha256::digest(bytes).to_vec(),
            DigestAlgo::Fnv64 => {
                // FNV-1a, 64 bit.
                let mut h: u64 = 0xcbf2_9ce4_8422_2325;
                for &b in bytes {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x0000_0100_0000_01b3);
                }
                h.to_be_bytes().to_vec()
            }
        }
    }

    fn digest_hex(&self, bytes: &[u8]) -> String {
        to_hex(&self.digest(bytes))
    }
}

pub fn to_hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

fn push_field(buf: &mut Vec<u8>, field: &[u8]) {
    buf.extend_from_slice(&(field.len() as u64).to_le_bytes());
    buf.extend_from_slice(field);
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// The conditions a request must satisfy. At least one field must be
/// present; `min_trust` lives in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct PolicyCondition {
    pub required_role: Option<Role>,
    pub min_trust: Option<f64>,
    /// Resource or segment ids this policy applies to. Empty means the
    /// policy applies to every resource of its network.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub resource_scope: BTreeSet<String>,
    /// Inclusive tick window in which the policy is applicable.
    pub valid_window: Option<(Tick, Tick)>,
}

impl PolicyCondition {
    fn canonical_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        let role_field: Vec<u8> = match self.required_role {
            None => vec![],
            Some(Role::Administrator) => vec![0],
            Some(Role::NormalUser) => vec![1],
        };
        push_field(&mut buf, &role_field);
        let trust_field: Vec<u8> = match self.min_trust {
            None => vec![],
            Some(t) => t.to_bits().to_le_bytes().to_vec(),
        };
        push_field(&mut buf, &trust_field);
        let mut scope_field = Vec::new();
        for id in &self.resource_scope {
            push_field(&mut scope_field, id.as_bytes());
        }
        push_field(&mut buf, &scope_field);
        let window_field: Vec<u8> = match self.valid_window {
            None => vec![],
            Some((s, e)) => {
                let mut w = s.to_le_bytes().to_vec();
                w.extend_from_slice(&e.to_le_bytes());
                w
            }
        };
        push_field(&mut buf, &window_field);
        buf
    }

    fn validate(&self) -> Result<(), PolicyError> {
        let empty = self.required_role.is_none()
            && self.min_trust.is_none()
            && self.resource_scope.is_empty()
            && self.valid_window.is_none();
        if empty {
            return Err(PolicyError::EmptyCondition);
        }
        if let Some(t) = self.min_trust {
            if !(0.0..=1.0).contains(&t) || t.is_nan() {
                return Err(PolicyError::TrustOutOfRange(t));
            }
        }
        if let Some((start, end)) = self.valid_window {
            if start > end {
                return Err(PolicyError::InvalidWindow { start, end });
            }
        }
        Ok(())
    }
}

/// One stored policy. `version` starts at 1 and increments on every
/// legitimate modification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyRecord {
    pub policy_id: PolicyId,
    pub version: u32,
    pub condition: PolicyCondition,
    pub created_at: Tick,
    pub modified_at: Tick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceAction {
    Create,
    Modify,
    Revoke,
}

impl TraceAction {
    fn tag(&self) -> u8 {
        match self {
            TraceAction::Create => 0,
            TraceAction::Modify => 1,
            TraceAction::Revoke => 2,
        }
    }
}

/// One trace log entry. `condition_digest` commits to the condition the
/// policy held after this action; `chain_hash` links the entry to every
/// entry before it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub policy_id: PolicyId,
    pub version: u32,
    pub action: TraceAction,
    pub at: Tick,
    pub condition_digest: String,
    pub chain_hash: String,
}

impl TraceEntry {
    fn canonical_bytes(&self) -> Vec<u8> {
        canonical_entry_bytes(
            &self.policy_id,
            self.version,
            self.action,
            self.at,
            &self.condition_digest,
        )
    }
}

fn canonical_entry_bytes(
    policy_id: &PolicyId,
    version: u32,
    action: TraceAction,
    at: Tick,
    condition_digest: &str,
) -> Vec<u8> {
    let mut buf = Vec::new();
    push_field(&mut buf, policy_id.as_str().as_bytes());
    push_field(&mut buf, &version.to_le_bytes());
    push_field(&mut buf, &[action.tag()]);
    push_field(&mut buf, &at.to_le_bytes());
    push_field(&mut buf, condition_digest.as_bytes());
    buf
}

/// Append-only history of legitimate policy mutations.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceLog {
    pub entries: Vec<TraceEntry>,
}

impl TraceLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head(&self) -> Option<&str> {
        self.entries.last().map(|e| e.chain_hash.as_str())
    }
}

// ---------------------------------------------------------------------------
// Integrity reporting
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// A stored record does not match what the trace log committed to (or
    /// has no log history at all).
    MissingLogEntry,
    /// A chain hash does not match its recomputation.
    ChainBroken,
    /// Version numbers are not the gapless 1..=n the log requires.
    VersionGap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrityViolation {
    pub policy_id: PolicyId,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrityReport {
    pub intact: bool,
    pub violations: Vec<IntegrityViolation>,
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("policy {0} already exists")]
    DuplicatePolicy(PolicyId),
    #[error("unknown policy {0}")]
    UnknownPolicy(PolicyId),
    #[error("policy condition must constrain at least one field")]
    EmptyCondition,
    #[error("min_trust {0} outside [0, 1]")]
    TrustOutOfRange(f64),
    #[error("validity window start {start} after end {end}")]
    InvalidWindow { start: Tick, end: Tick },
    #[error("line {line}: {message}")]
    Import { line: usize, message: String },
}

// ---------------------------------------------------------------------------
// The store
// ---------------------------------------------------------------------------

/// Policy set plus its trace log. Iteration order over policies is the
/// `BTreeMap` key order, so every traversal is deterministic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyStore {
    algo: DigestAlgo,
    policies: BTreeMap<PolicyId, PolicyRecord>,
    log: TraceLog,
}

impl Default for PolicyStore {
    fn default() -> Self {
        Self::new()
    }
}

impl PolicyStore {
    pub fn new() -> Self {
        Self::with_algo(DigestAlgo::Sha256)
    }

    pub fn with_algo(algo: DigestAlgo) -> Self {
        Self { algo, policies: BTreeMap::new(), log: TraceLog::default() }
    }

    pub fn algo(&self) -> DigestAlgo {
        self.algo
    }

    pub fn log(&self) -> &TraceLog {
        &self.log
    }

    pub fn policies(&self) -> impl Iterator<Item = &PolicyRecord> {
        self.policies.values()
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn get(&self, id: &PolicyId) -> Option<&PolicyRecord> {
        self.policies.get(id)
    }

    fn append_entry(&mut self, policy_id: PolicyId, version: u32, action: TraceAction, at: Tick, condition: &PolicyCondition) {
        let condition_digest = self.algo.digest_hex(&condition.canonical_bytes());
        let prev = match self.log.entries.last() {
            Some(e) => e.chain_hash.clone(),
            None => self.genesis(),
        };
        let canon = canonical_entry_bytes(&policy_id, version, action, at, &condition_digest);
        let mut input = prev.into_bytes();
        input.extend_from_slice(&canon);
        let chain_hash = self.algo.digest_hex(&input);
        self.log.entries.push(TraceEntry {
            policy_id,
            version,
            action,
            at,
            condition_digest,
            chain_hash,
        });
    }

    /// Hex digest standing in for the chain hash before the first entry.
    pub fn genesis(&self) -> String {
        self.algo.digest_hex(GENESIS_SEED)
    }

    /// Adds a new policy at version 1 and logs the creation.
    pub fn create_policy(
        &mut self,
        policy_id: impl Into<PolicyId>,
        condition: PolicyCondition,
        at: Tick,
    ) -> Result<PolicyRecord, PolicyError> {
        let policy_id = policy_id.into();
        condition.validate()?;
        if self.policies.contains_key(&policy_id) {
            return Err(PolicyError::DuplicatePolicy(policy_id));
        }
        let record = PolicyRecord {
            policy_id: policy_id.clone(),
            version: 1,
            condition: condition.clone(),
            created_at: at,
            modified_at: at,
        };
        self.policies.insert(policy_id.clone(), record.clone());
        self.append_entry(policy_id, 1, TraceAction::Create, at, &condition);
        Ok(record)
    }

    /// Replaces a policy's condition, bumping its version and logging the
    /// change.
    pub fn modify_policy(
        &mut self,
        policy_id: &PolicyId,
        condition: PolicyCondition,
        at: Tick,
    ) -> Result<PolicyRecord, PolicyError> {
        condition.validate()?;
        let record = self
            .policies
            .get_mut(policy_id)
            .ok_or_else(|| PolicyError::UnknownPolicy(policy_id.clone()))?;
        record.version += 1;
        record.condition = condition.clone();
        record.modified_at = at;
        let version = record.version;
        let record = record.clone();
        self.append_entry(policy_id.clone(), version, TraceAction::Modify, at, &condition);
        Ok(record)
    }

    /// Removes a policy and logs the revocation.
    pub fn revoke_policy(&mut self, policy_id: &PolicyId, at: Tick) -> Result<(), PolicyError> {
        let record = self
            .policies
            .remove(policy_id)
            .ok_or_else(|| PolicyError::UnknownPolicy(policy_id.clone()))?;
        self.append_entry(policy_id.clone(), record.version, TraceAction::Revoke, at, &record.condition);
        Ok(())
    }

    /// Rewrites a stored condition *without* logging it. This is the attack
    /// model: an adversary with write access to the store but not the chain.
    pub fn tamper(
        &mut self,
        policy_id: &PolicyId,
        new_condition: PolicyCondition,
        at: Tick,
    ) -> Result<(), PolicyError> {
        self.tamper_with(policy_id, |record| {
            record.condition = new_condition;
            record.modified_at = at;
        })
    }

    /// Applies an arbitrary unlogged mutation to a stored record.
    pub fn tamper_with(
        &mut self,
        policy_id: &PolicyId,
        mutate: impl FnOnce(&mut PolicyRecord),
    ) -> Result<(), PolicyError> {
        let record = self
            .policies
            .get_mut(policy_id)
            .ok_or_else(|| PolicyError::UnknownPolicy(policy_id.clone()))?;
        mutate(record);
        Ok(())
    }

    /// Flips one byte of a stored chain hash; models log corruption. Does
    /// nothing on an empty log. Returns whether anything was corrupted.
    pub fn corrupt_chain(&mut self, entry_index: usize) -> bool {
        if self.log.entries.is_empty() {
            return false;
        }
        let idx = entry_index % self.log.entries.len();
        let entry = &mut self.log.entries[idx];
        // Swap the first hex nibble for a different one.
        let mut chars: Vec<char> = entry.chain_hash.chars().collect();
        chars[0] = if chars[0] == '0' { '1' } else { '0' };
        entry.chain_hash = chars.into_iter().collect();
        true
    }

    /// Recomputes the entire chain and cross-checks every stored record
    /// against its log history. Reports at most one violation per policy,
    /// chain breaks first.
    pub fn verify_integrity(&self) -> IntegrityReport {
        let mut violations: Vec<IntegrityViolation> = Vec::new();
        let mut flagged: BTreeSet<PolicyId> = BTreeSet::new();
        let flag = |violations: &mut Vec<IntegrityViolation>,
                        flagged: &mut BTreeSet<PolicyId>,
                        policy_id: &PolicyId,
                        kind: ViolationKind| {
            if flagged.insert(policy_id.clone()) {
                violations.push(IntegrityViolation { policy_id: policy_id.clone(), kind });
            }
        };

        // 1. The chain itself.
        let mut prev = self.genesis();
        for entry in &self.log.entries {
            let mut input = prev.clone().into_bytes();
            input.extend_from_slice(&entry.canonical_bytes());
            let expect = self.algo.digest_hex(&input);
            if expect != entry.chain_hash {
                flag(&mut violations, &mut flagged, &entry.policy_id, ViolationKind::ChainBroken);
            }
            prev = entry.chain_hash.clone();
        }

        // 2. Every stored record against its current log generation (the
        //    entries after the policy's last revocation, if any).
        for (policy_id, record) in &self.policies {
            let generation: Vec<&TraceEntry> = {
                let all: Vec<&TraceEntry> = self
                    .log
                    .entries
                    .iter()
                    .filter(|e| &e.policy_id == policy_id)
                    .collect();
                let start = all
                    .iter()
                    .rposition(|e| e.action == TraceAction::Revoke)
                    .map(|i| i + 1)
                    .unwrap_or(0);
                all[start..].to_vec()
            };
            if generation.is_empty() {
                flag(&mut violations, &mut flagged, policy_id, ViolationKind::MissingLogEntry);
                continue;
            }
            // A record claiming a different id than the slot it occupies
            // cannot match that slot's history.
            if &record.policy_id != policy_id {
                flag(&mut violations, &mut flagged, policy_id, ViolationKind::MissingLogEntry);
                continue;
            }
            // Versions must read 1..=n, created by a Create and advanced by
            // Modify entries only, and the record must sit at version n.
            let versions_ok = generation.iter().enumerate().all(|(i, e)| {
                let expected_action =
                    if i == 0 { TraceAction::Create } else { TraceAction::Modify };
                e.version == (i as u32 + 1) && e.action == expected_action
            });
            let last = generation.last().expect("non-empty generation");
            if !versions_ok || record.version != last.version {
                flag(&mut violations, &mut flagged, policy_id, ViolationKind::VersionGap);
                continue;
            }
            // Content and timestamps must match what the log committed to.
            let digest = self.algo.digest_hex(&record.condition.canonical_bytes());
            let first = generation.first().expect("non-empty generation");
            let content_ok = digest == last.condition_digest
                && record.created_at == first.at
                && record.modified_at == last.at;
            if !content_ok {
                flag(&mut violations, &mut flagged, policy_id, ViolationKind::MissingLogEntry);
            }
        }

        IntegrityReport { intact: violations.is_empty(), violations }
    }

    /// Whether the policy changed after `since` — either through a logged
    /// modification or through an integrity violation touching it (an
    /// unlogged change has no trustworthy timestamp, so it counts).
    pub fn modified_since(&self, policy_id: &PolicyId, since: Tick) -> Result<bool, PolicyError> {
        let record = self
            .policies
            .get(policy_id)
            .ok_or_else(|| PolicyError::UnknownPolicy(policy_id.clone()))?;
        let report = self.verify_integrity();
        if report.violations.iter().any(|v| &v.policy_id == policy_id) {
            return Ok(true);
        }
        Ok(record.modified_at > since)
    }

    // -- line-delimited serialization ---------------------------------------

    /// One record per line: `algo`, then policies in key order, then trace
    /// entries in chain order. Round-trips through [`PolicyStore::import_lines`].
    pub fn export_lines(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "algo {}\n",
            serde_json::to_string(&self.algo).expect("algo serializes")
        ));
        for record in self.policies.values() {
            out.push_str(&format!(
                "policy {}\n",
                serde_json::to_string(record).expect("record serializes")
            ));
        }
        for entry in &self.log.entries {
            out.push_str(&format!(
                "trace {}\n",
                serde_json::to_string(entry).expect("entry serializes")
            ));
        }
        out
    }

    pub fn import_lines(text: &str) -> Result<Self, PolicyError> {
        let mut algo = DigestAlgo::Sha256;
        let mut policies = BTreeMap::new();
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (kind, body) = line.split_once(' ').ok_or(PolicyError::Import {
                line: line_no,
                message: "expected `<kind> <json>`".into(),
            })?;
            match kind {
                "algo" => {
                    algo = serde_json::from_str(body).map_err(|e| PolicyError::Import {
                        line: line_no,
                        message: e.to_string(),
                    })?;
                }
                "policy" => {
                    let record: PolicyRecord =
                        serde_json::from_str(body).map_err(|e| PolicyError::Import {
                            line: line_no,
                            message: e.to_string(),
                        })?;
                    policies.insert(record.policy_id.clone(), record);
                }
                "trace" => {
                    let entry: TraceEntry =
                        serde_json::from_str(body).map_err(|e| PolicyError::Import {
                            line: line_no,
                            message: e.to_string(),
                        })?;
                    entries.push(entry);
                }
                other => {
                    return Err(PolicyError::Import {
                        line: line_no,
                        message: format!("unknown record kind `{other}`"),
                    });
                }
            }
        }
        Ok(Self { algo, policies, log: TraceLog { entries } })
    }
}
