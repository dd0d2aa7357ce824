//! Policy enforcement point: the data-plane gatekeeper.
//!
//! A PEP never decides anything itself. It forwards requests to its
//! network's decision point, executes the commands that come back (open a
//! channel, close a subject's channels), and keeps the books on capacity.
//! Overload handling is a simple trip switch: accept at most `capacity`
//! requests in one tick, then drop to `Down` for `cooldown` ticks.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::decision::PepCommand;
use crate::model::{AccessRequest, NetworkId, PepId, ResourceId, Tick, UserId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PepStatus {
    Up,
    Down,
}

/// A request the PEP accepted and handed to the decision point.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardedRequest {
    pub request: AccessRequest,
    pub received_at: Tick,
}

/// Outcome of interception.
#[derive(Clone, Debug, PartialEq)]
pub enum Intercepted {
    Forwarded(ForwardedRequest),
    /// The PEP is down (or just tripped its capacity limit); the request is
    /// dropped without ever reaching the decision point.
    Unavailable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PepState {
    pub pep_id: PepId,
    pub network_id: NetworkId,
    status: PepStatus,
    open_channels: BTreeSet<(UserId, ResourceId)>,
    /// Requests accepted per tick before the trip switch fires.
    capacity: Option<u32>,
    /// Ticks to stay down after tripping.
    cooldown: u64,
    /// Automatic recovery time; `None` while up or when failed outright.
    down_until: Option<Tick>,
    intake_tick: Tick,
    intake_count: u32,
    pub forwarded: u64,
    pub enforced: u64,
}

impl PepState {
    pub fn new(pep_id: PepId, network_id: NetworkId, capacity: Option<u32>, cooldown: u64) -> Self {
        Self {
            pep_id,
            network_id,
            status: PepStatus::Up,
            open_channels: BTreeSet::new(),
            capacity,
            cooldown,
            down_until: None,
            intake_tick: 0,
            intake_count: 0,
            forwarded: 0,
            enforced: 0,
        }
    }

    pub fn status(&self) -> PepStatus {
        self.status
    }

    pub fn is_up(&self) -> bool {
        self.status == PepStatus::Up
    }

    pub fn channel_open(&self, user: &UserId, resource: &ResourceId) -> bool {
        self.open_channels.contains(&(user.clone(), resource.clone()))
    }

    pub fn open_channel_count(&self) -> usize {
        self.open_channels.len()
    }

    pub fn open_channels(&self) -> impl Iterator<Item = &(UserId, ResourceId)> {
        self.open_channels.iter()
    }

    /// Accept or drop an incoming request. Ticks must be nondecreasing
    /// across calls.
    pub fn intercept(&mut self, request: &AccessRequest, at: Tick) -> Intercepted {
        if at != self.intake_tick {
            self.intake_tick = at;
            self.intake_count = 0;
        }
        if self.status == PepStatus::Down {
            match self.down_until {
                Some(t) if at >= t => self.recover(at),
                _ => return Intercepted::Unavailable,
            }
        }
        self.intake_count += 1;
        if let Some(cap) = self.capacity {
            if self.intake_count > cap {
                // Overloaded: trip and come back after the cooldown.
                self.status = PepStatus::Down;
                self.down_until = Some(at + self.cooldown.max(1));
                return Intercepted::Unavailable;
            }
        }
        self.forwarded += 1;
        Intercepted::Forwarded(ForwardedRequest { request: request.clone(), received_at: at })
    }

    /// Executes a decision-point command. Channels only ever open here.
    pub fn enforce(&mut self, command: &PepCommand) {
        self.enforced += 1;
        match command {
            PepCommand::Open { user, resource } => {
                self.open_channels.insert((user.clone(), resource.clone()));
            }
            PepCommand::CloseAll { user } => {
                self.open_channels.retain(|(u, _)| u != user);
            }
        }
    }

    /// Hard failure; stays down until `recover` is called.
    pub fn fail(&mut self, _at: Tick) {
        self.status = PepStatus::Down;
        self.down_until = None;
    }

    /// Bring the PEP back. Idempotent.
    pub fn recover(&mut self, _at: Tick) {
        self.status = PepStatus::Up;
        self.down_until = None;
    }
}
