//! Waiting rooms of the three policies.

use std::collections::VecDeque;

use crate::model::Policy;
use crate::state::{EsfsQueue, ObserverState, PacketTag, SystemState};

/// A packet: 0-based source index and generation time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Packet {
    pub source: usize,
    pub born: f64,
}

#[derive(Clone, Debug)]
pub(crate) enum Room {
    /// Per-source slots; `order` lists occupied sources by first arrival.
    Fsfs { slots: Vec<Option<f64>>, order: VecDeque<usize> },
    /// Per-source slots; `served` is the last-served order, most recent last.
    Esfs { slots: Vec<Option<f64>>, served: Vec<usize> },
    /// One slot shared by all sources.
    Sbr { slot: Option<Packet> },
}

impl Room {
    pub fn new(policy: Policy, n: usize) -> Self {
        match policy {
            Policy::Fsfs => Room::Fsfs { slots: vec![None; n], order: VecDeque::with_capacity(n) },
            Policy::Esfs => Room::Esfs { slots: vec![None; n], served: (0..n).collect() },
            Policy::Sbr => Room::Sbr { slot: None },
        }
    }

    /// Store a packet that found the server busy.
    pub fn admit(&mut self, p: Packet) {
        match self {
            Room::Fsfs { slots, order } => {
                if slots[p.source].replace(p.born).is_none() {
                    order.push_back(p.source);
                }
            }
            Room::Esfs { slots, .. } => slots[p.source] = Some(p.born),
            Room::Sbr { slot } => *slot = Some(p),
        }
    }

    /// Record that `source` entered service. Only ESFS keeps history.
    pub fn started(&mut self, source: usize) {
        if let Room::Esfs { served, .. } = self {
            let at = served.iter().position(|&s| s == source).expect("source in service order");
            served.remove(at);
            served.push(source);
        }
    }

    /// Remove the packet to serve next.
    pub fn take(&mut self) -> Option<Packet> {
        match self {
            Room::Fsfs { slots, order } => {
                let source = order.pop_front()?;
                let born = slots[source].take().expect("queued source has a packet");
                Some(Packet { source, born })
            }
            Room::Esfs { slots, served } => {
                let source = served.iter().copied().find(|&s| slots[s].is_some())?;
                let born = slots[source].take().expect("checked above");
                Some(Packet { source, born })
            }
            Room::Sbr { slot } => slot.take(),
        }
    }

    pub fn waiting(&self) -> usize {
        match self {
            Room::Fsfs { order, .. } => order.len(),
            Room::Esfs { slots, .. } => slots.iter().filter(|s| s.is_some()).count(),
            Room::Sbr { slot } => slot.is_some() as usize,
        }
    }

    #[cfg(debug_assertions)]
    pub fn check(&self) {
        if let Room::Esfs { served, .. } = self {
            let mut seen = vec![false; served.len()];
            for &s in served {
                assert!(!std::mem::replace(&mut seen[s], true), "service order repeats source {s}");
            }
        }
    }

    /// Observer-chain state for the current configuration.
    pub fn observer_state(&self, server: Option<usize>) -> ObserverState {
        let tag = |s: usize| PacketTag::Source(s as u16 + 1);
        match self {
            Room::Fsfs { order, .. } => {
                SystemState::Fsfs { server: server.map(tag), queue: order.iter().map(|&s| tag(s)).collect() }
            }
            Room::Esfs { slots, served } => {
                let queue = match server {
                    None => EsfsQueue::Idle,
                    Some(_) => {
                        let set: Vec<_> = (0..slots.len()).filter(|&s| slots[s].is_some()).map(tag).collect();
                        if set.is_empty() {
                            EsfsQueue::Empty
                        } else {
                            EsfsQueue::Waiting(set)
                        }
                    }
                };
                SystemState::Esfs { order: served.iter().map(|&s| tag(s)).collect(), queue }
            }
            Room::Sbr { slot } => SystemState::Sbr { server: server.map(tag), buffer: slot.map(|p| tag(p.source)) },
        }
    }
}
