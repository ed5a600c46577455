//! Policy-specific state spaces and transition rules.
//!
//! Each policy supplies two chains over [`SystemState`]:
//!
//! * the observer chain, over ordinary source labels, describing what an
//!   arriving packet finds;
//! * the three active phases of the tagged-packet cycle, where source 1 is
//!   the tagged source and its packets carry the `1_p`/`1_c`/`1_n` labels.
//!
//! Transitions that leave the state unchanged (replacement of a waiting
//! packet by a fresher one of the same source) are never emitted.

mod esfs;
mod fsfs;
mod sbr;

use crate::model::{Policy, SourceParams};
use crate::state::{ObserverState, PacketTag, Phase, PhaseState, SystemState};

pub(crate) trait Dynamics: Sync {
    fn observer_states(&self, n: u16) -> Vec<ObserverState>;

    fn observer_moves(&self, state: &ObserverState, params: &SourceParams, out: &mut Vec<(ObserverState, f64)>);

    /// Members of phases 1, 2 and 3, in no particular order.
    fn phase_states(&self, n: u16) -> [Vec<SystemState>; 3];

    fn phase_moves(&self, phase: Phase, state: &SystemState, params: &SourceParams, out: &mut Vec<(PhaseState, f64)>);

    /// Phase state entered when a tagged-source packet arrives and finds the
    /// system in `seen`: phase 2 if the server is idle, phase 1 otherwise.
    fn tagged_arrival(&self, seen: &ObserverState) -> PhaseState;
}

pub(crate) fn dynamics(policy: Policy) -> &'static dyn Dynamics {
    match policy {
        Policy::Fsfs => &fsfs::Fsfs,
        Policy::Esfs => &esfs::Esfs,
        Policy::Sbr => &sbr::Sbr,
    }
}

fn sources(range: std::ops::RangeInclusive<u16>) -> Vec<PacketTag> {
    range.map(PacketTag::Source).collect()
}

/// Label of a source-`j` packet arriving after the current tagged packet.
fn later_label(j: u16) -> PacketTag {
    if j == 1 {
        PacketTag::Next
    } else {
        PacketTag::Source(j)
    }
}

/// Label of a source-`j` packet found in the system by the current tagged
/// packet.
fn earlier_label(tag: PacketTag) -> PacketTag {
    match tag {
        PacketTag::Source(1) => PacketTag::Previous,
        other => other,
    }
}

/// All sequences of distinct elements of `items` with length at most `max_len`.
fn arrangements(items: &[PacketTag], max_len: usize) -> Vec<Vec<PacketTag>> {
    fn grow(items: &[PacketTag], max_len: usize, prefix: &mut Vec<PacketTag>, out: &mut Vec<Vec<PacketTag>>) {
        out.push(prefix.clone());
        if prefix.len() == max_len {
            return;
        }
        for &t in items {
            if !prefix.contains(&t) {
                prefix.push(t);
                grow(items, max_len, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    grow(items, max_len, &mut Vec::new(), &mut out);
    out
}

/// All subsets of `items`, each sorted.
fn subsets(items: &[PacketTag]) -> Vec<Vec<PacketTag>> {
    (0u64..1 << items.len())
        .map(|mask| {
            let mut s: Vec<_> = items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, t)| *t).collect();
            s.sort_unstable();
            s
        })
        .collect()
}

fn permutations(items: &[PacketTag]) -> Vec<Vec<PacketTag>> {
    arrangements(items, items.len()).into_iter().filter(|a| a.len() == items.len()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use PacketTag::Source;

    #[test]
    fn combinatorics() {
        let items = sources(1..=3);
        // 1 + 3 + 6 + 6
        assert_eq!(arrangements(&items, 3).len(), 16);
        assert_eq!(arrangements(&items, 1).len(), 4);
        assert_eq!(subsets(&items).len(), 8);
        assert_eq!(permutations(&items).len(), 6);
        assert!(subsets(&[Source(3), Source(1)]).contains(&vec![Source(1), Source(3)]));
    }
}
