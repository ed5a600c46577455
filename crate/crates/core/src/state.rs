//! State representations shared by the observer chain, the fluid-queue
//! modulating chain and the simulator.
//!
//! # Canonical ordering
//!
//! Every state has a textual serialization (its `Display` form):
//!
//! | policy | form | example |
//! |--------|------|---------|
//! | FSFS   | `(server,(queue))` | `(1,(2,1))`, idle `(0,(0))` |
//! | ESFS   | `((order),{queue})` | `((1,2),{2})`, empty `{0}`, idle `{-1}` |
//! | SBR    | `(server,(buffer))` | `(2,(1))` |
//!
//! Phase states prefix the phase, e.g. `P1:(1_p,(1_c))`, and the reset state
//! is `(-1,(-1))`.
//!
//! States are ordered lexicographically over the token sequence of this
//! serialization, where tokens compare as: idle/empty markers first, then
//! ordinary sources ascending, then `1_p`, `1_c`, `1_n`. A shorter sequence
//! that is a prefix of a longer one sorts first. This is exactly the derived
//! `Ord` of the types below, and phase states sort phase-major with the reset
//! state last.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Label of a packet (or of its source) inside a state.
///
/// `Source(k)` is an ordinary 1-based source. The remaining variants label
/// packets of the tagged source inside the fluid-queue phases: the packet in
/// service when the current one arrived, the current packet, and the next
/// packet of the tagged source to be delivered after the current one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PacketTag {
    Source(u16),
    Previous,
    Current,
    Next,
}

impl PacketTag {
    /// The source this packet belongs to; tagged-source labels map to 1.
    pub fn source(self) -> u16 {
        match self {
            PacketTag::Source(k) => k,
            PacketTag::Previous | PacketTag::Current | PacketTag::Next => 1,
        }
    }

    pub fn is_tagged(self) -> bool {
        !matches!(self, PacketTag::Source(_))
    }
}

impl fmt::Display for PacketTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PacketTag::Source(k) => write!(f, "{k}"),
            PacketTag::Previous => f.write_str("1_p"),
            PacketTag::Current => f.write_str("1_c"),
            PacketTag::Next => f.write_str("1_n"),
        }
    }
}

/// Waiting-room status of an ESFS state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EsfsQueue {
    /// Server idle (and therefore nothing waiting).
    Idle,
    /// Server busy, nothing waiting.
    Empty,
    /// Server busy; the sorted set of waiting packets.
    Waiting(Vec<PacketTag>),
}

/// Server and waiting-room contents under one of the three policies.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SystemState {
    /// `queue` lists waiting packets in service order.
    Fsfs {
        server: Option<PacketTag>,
        queue: Vec<PacketTag>,
    },
    /// `order` lists all sources by last service start, least recent first;
    /// its last entry is the one in service unless the server is idle.
    Esfs { order: Vec<PacketTag>, queue: EsfsQueue },
    Sbr {
        server: Option<PacketTag>,
        buffer: Option<PacketTag>,
    },
}

/// State of the observer chain; only ordinary source labels occur.
pub type ObserverState = SystemState;

impl SystemState {
    /// Apply `f` to every label in the state. Set-valued queues are re-sorted.
    pub fn map_tags(&self, f: impl Fn(PacketTag) -> PacketTag) -> SystemState {
        match self {
            SystemState::Fsfs { server, queue } => SystemState::Fsfs {
                server: server.map(&f),
                queue: queue.iter().copied().map(&f).collect(),
            },
            SystemState::Esfs { order, queue } => SystemState::Esfs {
                order: order.iter().copied().map(&f).collect(),
                queue: match queue {
                    EsfsQueue::Waiting(set) => {
                        let mut set: Vec<_> = set.iter().copied().map(&f).collect();
                        set.sort_unstable();
                        EsfsQueue::Waiting(set)
                    }
                    other => other.clone(),
                },
            },
            SystemState::Sbr { server, buffer } => SystemState::Sbr {
                server: server.map(&f),
                buffer: buffer.map(&f),
            },
        }
    }

    /// Exchange the labels of ordinary sources `a` and `b`.
    pub fn swap_sources(&self, a: u16, b: u16) -> SystemState {
        if a == b {
            return self.clone();
        }
        self.map_tags(|t| match t {
            PacketTag::Source(k) if k == a => PacketTag::Source(b),
            PacketTag::Source(k) if k == b => PacketTag::Source(a),
            other => other,
        })
    }

    /// Source whose packet is in service, if any.
    pub fn serving(&self) -> Option<u16> {
        match self {
            SystemState::Fsfs { server, .. } | SystemState::Sbr { server, .. } => server.map(PacketTag::source),
            SystemState::Esfs { order, queue } => match queue {
                EsfsQueue::Idle => None,
                _ => order.last().map(|t| t.source()),
            },
        }
    }
}

fn write_server(f: &mut fmt::Formatter<'_>, server: &Option<PacketTag>) -> fmt::Result {
    match server {
        Some(t) => write!(f, "{t}"),
        None => f.write_str("0"),
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, tags: &[PacketTag]) -> fmt::Result {
    for (i, t) in tags.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

impl fmt::Display for SystemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemState::Fsfs { server, queue } => {
                f.write_str("(")?;
                write_server(f, server)?;
                f.write_str(",(")?;
                if queue.is_empty() {
                    f.write_str("0")?;
                } else {
                    write_joined(f, queue)?;
                }
                f.write_str("))")
            }
            SystemState::Esfs { order, queue } => {
                f.write_str("((")?;
                write_joined(f, order)?;
                f.write_str("),{")?;
                match queue {
                    EsfsQueue::Idle => f.write_str("-1")?,
                    EsfsQueue::Empty => f.write_str("0")?,
                    EsfsQueue::Waiting(set) => write_joined(f, set)?,
                }
                f.write_str("})")
            }
            SystemState::Sbr { server, buffer } => {
                f.write_str("(")?;
                write_server(f, server)?;
                f.write_str(",(")?;
                write_server(f, buffer)?;
                f.write_str("))")
            }
        }
    }
}

/// Stage of the tagged-packet cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    /// Phase 1: the current tagged packet is waiting.
    Waiting = 1,
    /// Phase 2: the current tagged packet is in service.
    InService = 2,
    /// Phase 3: from delivery of the current packet to delivery of the next.
    Aging = 3,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Waiting, Phase::InService, Phase::Aging];

    pub fn number(self) -> u8 {
        self as u8
    }
}

/// State of the fluid-queue modulating chain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhaseState {
    Active { phase: Phase, state: SystemState },
    /// Phase 4, the single negative-drift state.
    Reset,
}

impl PhaseState {
    pub fn active(phase: Phase, state: SystemState) -> Self {
        PhaseState::Active { phase, state }
    }

    /// Phase number 1 to 4.
    pub fn phase_number(&self) -> u8 {
        match self {
            PhaseState::Active { phase, .. } => phase.number(),
            PhaseState::Reset => 4,
        }
    }
}

impl fmt::Display for PhaseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseState::Active { phase, state } => write!(f, "P{}:{state}", phase.number()),
            PhaseState::Reset => f.write_str("(-1,(-1))"),
        }
    }
}

/// A canonically ordered, duplicate-free list of states with index lookup.
#[derive(Clone, Debug)]
pub struct StateSpace<S> {
    states: Vec<S>,
    index: HashMap<S, usize>,
}

impl<S: Clone + Ord + Hash + fmt::Display> StateSpace<S> {
    /// Sort `states` canonically. Duplicates are a construction bug.
    pub fn new(mut states: Vec<S>) -> Result<Self> {
        states.sort_unstable();
        if let Some(w) = states.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Construction(format!("duplicate state {}", w[0])));
        }
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self { states, index })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn get(&self, state: &S) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Position of `state` in the canonical ordering.
    pub fn canonical_index(&self, state: &S) -> Result<usize> {
        self.get(state).ok_or_else(|| Error::NotInSpace(state.to_string()))
    }
}

impl<S> std::ops::Index<usize> for StateSpace<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.states[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PacketTag::*;

    #[test]
    fn tag_order() {
        let mut tags = vec![Next, Source(3), Current, Previous, Source(2), Source(1)];
        tags.sort();
        assert_eq!(tags, vec![Source(1), Source(2), Source(3), Previous, Current, Next]);
    }

    #[test]
    fn serialization() {
        let s = SystemState::Fsfs { server: Some(Source(1)), queue: vec![Source(2), Source(1)] };
        assert_eq!(s.to_string(), "(1,(2,1))");
        let s = SystemState::Fsfs { server: None, queue: vec![] };
        assert_eq!(s.to_string(), "(0,(0))");
        let s = SystemState::Esfs { order: vec![Source(1), Source(2)], queue: EsfsQueue::Idle };
        assert_eq!(s.to_string(), "((1,2),{-1})");
        let s = SystemState::Esfs { order: vec![Previous, Source(2)], queue: EsfsQueue::Waiting(vec![Source(2), Current]) };
        assert_eq!(s.to_string(), "((1_p,2),{2,1_c})");
        let s = SystemState::Sbr { server: Some(Next), buffer: None };
        assert_eq!(PhaseState::active(Phase::Aging, s).to_string(), "P3:(1_n,(0))");
        assert_eq!(PhaseState::Reset.to_string(), "(-1,(-1))");
    }

    #[test]
    fn reset_sorts_last() {
        let a = PhaseState::active(Phase::Aging, SystemState::Sbr { server: Some(Next), buffer: None });
        let b = PhaseState::active(Phase::Waiting, SystemState::Sbr { server: Some(Previous), buffer: Some(Current) });
        let space = StateSpace::new(vec![PhaseState::Reset, a.clone(), b.clone()]).unwrap();
        assert_eq!(space.canonical_index(&b).unwrap(), 0);
        assert_eq!(space.canonical_index(&a).unwrap(), 1);
        assert_eq!(space.canonical_index(&PhaseState::Reset).unwrap(), 2);
    }

    #[test]
    fn duplicates_and_missing() {
        let s = SystemState::Sbr { server: None, buffer: None };
        assert!(StateSpace::new(vec![s.clone(), s.clone()]).is_err());
        let space = StateSpace::new(vec![s]).unwrap();
        let other = SystemState::Sbr { server: Some(Source(1)), buffer: None };
        assert!(matches!(space.canonical_index(&other), Err(Error::NotInSpace(_))));
    }

    #[test]
    fn swap_relabels_and_resorts() {
        let s = SystemState::Esfs {
            order: vec![Source(2), Source(1), Source(3)],
            queue: EsfsQueue::Waiting(vec![Source(1), Source(3)]),
        };
        let t = s.swap_sources(1, 3);
        assert_eq!(t.to_string(), "((2,3,1),{1,3})");
        assert_eq!(t.swap_sources(1, 3), s);
        assert_eq!(s.serving(), Some(3));
    }
}
