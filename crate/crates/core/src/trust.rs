//! Trust scoring for continuous authentication.
//!
//! A subject's score is a pure function of its event history and the
//! configured weights: start from a base score, add one signed delta per
//! event, clamp into the configured bounds at the end. The one exception is
//! the insider clamp: when enabled, a single `InsiderFlag` event pins the
//! score to the floor no matter what else happened.

use serde::{Deserialize, Serialize};

use crate::model::{NetworkId, Tick, UserId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrustEventKind {
    AuthSuccess,
    AuthFailure,
    BreachAttempt,
    InsiderFlag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustEvent {
    pub kind: TrustEventKind,
    pub at: Tick,
}

/// Weights and bounds for trust evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrustConfig {
    pub base_score: f64,
    pub auth_success_delta: f64,
    pub auth_failure_delta: f64,
    pub breach_delta: f64,
    pub insider_delta: f64,
    /// Force the score to `min_score` once an `InsiderFlag` is present.
    pub insider_clamp: bool,
    pub min_score: f64,
    pub max_score: f64,
}

impl Default for TrustConfig {
    fn default() -> Self {
        Self {
            base_score: 0.5,
            auth_success_delta: 0.1,
            auth_failure_delta: -0.2,
            breach_delta: -0.4,
            insider_delta: -0.5,
            insider_clamp: true,
            min_score: 0.0,
            max_score: 1.0,
        }
    }
}

impl TrustConfig {
    pub fn delta(&self, kind: TrustEventKind) -> f64 {
        match kind {
            TrustEventKind::AuthSuccess => self.auth_success_delta,
            TrustEventKind::AuthFailure => self.auth_failure_delta,
            TrustEventKind::BreachAttempt => self.breach_delta,
            TrustEventKind::InsiderFlag => self.insider_delta,
        }
    }

    fn clamp(&self, score: f64) -> f64 {
        score.max(self.min_score).min(self.max_score)
    }
}

/// Score from an explicit base. The base is usually the per-network initial
/// score a deployment assigns to a subject.
pub fn score_from_base(base: f64, events: &[TrustEvent], config: &TrustConfig) -> f64 {
    if config.insider_clamp && events.iter().any(|e| e.kind == TrustEventKind::InsiderFlag) {
        return config.min_score;
    }
    let mut score = base;
    for event in events {
        score += config.delta(event.kind);
    }
    config.clamp(score)
}

/// Score using the config's own base score.
pub fn compute_trust(events: &[TrustEvent], config: &TrustConfig) -> f64 {
    score_from_base(config.base_score, events, config)
}

/// Trust history for one (subject, network) pair. Decisions are always
/// per-network: the same subject can hold very different scores on
/// different networks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrustState {
    pub user_id: UserId,
    pub network_id: NetworkId,
    pub base_score: f64,
    pub events: Vec<TrustEvent>,
}

impl TrustState {
    pub fn new(user_id: UserId, network_id: NetworkId, base_score: f64) -> Self {
        Self { user_id, network_id, base_score, events: Vec::new() }
    }

    pub fn record(&mut self, kind: TrustEventKind, at: Tick) {
        self.events.push(TrustEvent { kind, at });
    }

    pub fn score(&self, config: &TrustConfig) -> f64 {
        score_from_base(self.base_score, &self.events, config)
    }
}
