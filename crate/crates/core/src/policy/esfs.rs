use super::{earlier_label, later_label, permutations, sources, subsets, Dynamics};
use crate::model::SourceParams;
use crate::state::{EsfsQueue, ObserverState, PacketTag, Phase, PhaseState, SystemState};

use PacketTag::{Current, Next, Previous};

pub(crate) struct Esfs;

fn state(order: Vec<PacketTag>, queue: EsfsQueue) -> SystemState {
    SystemState::Esfs { order, queue }
}

fn parts(s: &SystemState) -> (&[PacketTag], &EsfsQueue) {
    match s {
        SystemState::Esfs { order, queue } => (order, queue),
        other => unreachable!("ESFS rules applied to {other}"),
    }
}

/// Move the entry of `source` to the back of the service order, relabelled
/// as `label`.
pub(crate) fn served(order: &[PacketTag], source: u16, label: PacketTag) -> Vec<PacketTag> {
    let mut out: Vec<_> = order.iter().copied().filter(|t| t.source() != source).collect();
    out.push(label);
    out
}

/// The waiting packet whose source appears earliest in the service order.
fn select(order: &[PacketTag], waiting: &[PacketTag]) -> PacketTag {
    order
        .iter()
        .find_map(|h| waiting.iter().copied().find(|w| w.source() == h.source()))
        .expect("every waiting source appears in the service order")
}

fn without(set: &[PacketTag], tag: PacketTag) -> EsfsQueue {
    let rest: Vec<_> = set.iter().copied().filter(|&t| t != tag).collect();
    if rest.is_empty() {
        EsfsQueue::Empty
    } else {
        EsfsQueue::Waiting(rest)
    }
}

fn with(queue: &EsfsQueue, tag: PacketTag) -> Option<EsfsQueue> {
    match queue {
        EsfsQueue::Idle => None,
        EsfsQueue::Empty => Some(EsfsQueue::Waiting(vec![tag])),
        EsfsQueue::Waiting(set) if set.contains(&tag) => None,
        EsfsQueue::Waiting(set) => {
            let mut set = set.clone();
            set.push(tag);
            set.sort_unstable();
            Some(EsfsQueue::Waiting(set))
        }
    }
}

fn non_empty_queues(items: &[PacketTag]) -> impl Iterator<Item = EsfsQueue> {
    subsets(items).into_iter().filter(|s| !s.is_empty()).map(EsfsQueue::Waiting)
}

impl Dynamics for Esfs {
    fn observer_states(&self, n: u16) -> Vec<ObserverState> {
        let all = sources(1..=n);
        let mut queues = vec![EsfsQueue::Idle, EsfsQueue::Empty];
        queues.extend(non_empty_queues(&all));
        permutations(&all)
            .into_iter()
            .flat_map(|h| queues.iter().map(move |q| state(h.clone(), q.clone())))
            .collect()
    }

    fn observer_moves(&self, s: &ObserverState, p: &SourceParams, out: &mut Vec<(ObserverState, f64)>) {
        let (order, queue) = parts(s);
        let n = p.n() as u16;
        if *queue == EsfsQueue::Idle {
            for j in 1..=n {
                out.push((state(served(order, j, PacketTag::Source(j)), EsfsQueue::Empty), p.lambda(j)));
            }
            return;
        }
        for j in 1..=n {
            if let Some(q) = with(queue, PacketTag::Source(j)) {
                out.push((state(order.to_vec(), q), p.lambda(j)));
            }
        }
        let mu = p.mu(order.last().expect("non-empty order").source());
        match queue {
            EsfsQueue::Empty => out.push((state(order.to_vec(), EsfsQueue::Idle), mu)),
            EsfsQueue::Waiting(set) => {
                let next = select(order, set);
                out.push((state(served(order, next.source(), next), without(set, next)), mu));
            }
            EsfsQueue::Idle => unreachable!(),
        }
    }

    fn phase_states(&self, n: u16) -> [Vec<SystemState>; 3] {
        let others = sources(2..=n);

        let mut labels1 = vec![Previous];
        labels1.extend(&others);
        let waiting1: Vec<_> = subsets(&others)
            .into_iter()
            .map(|mut s| {
                s.push(Current);
                EsfsQueue::Waiting(s)
            })
            .collect();
        let phase1 = permutations(&labels1)
            .into_iter()
            .flat_map(|h| waiting1.iter().map(move |q| state(h.clone(), q.clone())))
            .collect();

        let mut later = others.clone();
        later.push(Next);
        let mut post_queues = vec![EsfsQueue::Empty];
        post_queues.extend(non_empty_queues(&later));

        let phase2 = permutations(&others)
            .into_iter()
            .flat_map(|mut h| {
                h.push(Current);
                post_queues.iter().map(move |q| state(h.clone(), q.clone()))
            })
            .collect();

        let mut phase3 = Vec::new();
        for h in permutations(&later) {
            phase3.push(state(h.clone(), EsfsQueue::Idle));
            if h.last() == Some(&Next) {
                phase3.push(state(h, EsfsQueue::Empty));
            } else {
                phase3.extend(post_queues.iter().map(|q| state(h.clone(), q.clone())));
            }
        }
        [phase1, phase2, phase3]
    }

    fn phase_moves(&self, phase: Phase, s: &SystemState, p: &SourceParams, out: &mut Vec<(PhaseState, f64)>) {
        let (order, queue) = parts(s);
        let n = p.n() as u16;

        if *queue == EsfsQueue::Idle {
            // Phase 3 only.
            for j in 1..=n {
                let t = later_label(j);
                out.push((PhaseState::active(Phase::Aging, state(served(order, j, t), EsfsQueue::Empty)), p.lambda(j)));
            }
            return;
        }

        let in_service = *order.last().expect("non-empty order");
        let mu = p.mu(in_service.source());

        if phase == Phase::Waiting {
            out.push((PhaseState::Reset, p.lambda(1)));
            for j in 2..=n {
                if let Some(q) = with(queue, PacketTag::Source(j)) {
                    out.push((PhaseState::active(Phase::Waiting, state(order.to_vec(), q)), p.lambda(j)));
                }
            }
            let EsfsQueue::Waiting(set) = queue else {
                unreachable!("1_c waits in phase 1")
            };
            let next = select(order, set);
            let target = if next == Current {
                PhaseState::active(Phase::InService, state(served(order, 1, Current), without(set, Current)))
            } else {
                PhaseState::active(Phase::Waiting, state(served(order, next.source(), next), without(set, next)))
            };
            out.push((target, mu));
            return;
        }

        if in_service == Next {
            out.push((PhaseState::Reset, mu));
            return;
        }

        for j in 1..=n {
            if let Some(q) = with(queue, later_label(j)) {
                out.push((PhaseState::active(phase, state(order.to_vec(), q)), p.lambda(j)));
            }
        }
        // Source 1 is labelled 1_n in the service order from phase 3 on.
        let order: Vec<_> = order.iter().map(|&t| if t == Current { Next } else { t }).collect();
        let after = match queue {
            EsfsQueue::Empty => state(order, EsfsQueue::Idle),
            EsfsQueue::Waiting(set) => {
                let next = select(&order, set);
                let rest = if next == Next { EsfsQueue::Empty } else { without(set, next) };
                state(served(&order, next.source(), next), rest)
            }
            EsfsQueue::Idle => unreachable!(),
        };
        out.push((PhaseState::active(Phase::Aging, after), mu));
    }

    fn tagged_arrival(&self, seen: &ObserverState) -> PhaseState {
        let (order, queue) = parts(seen);
        match queue {
            EsfsQueue::Idle => {
                let order: Vec<_> = order.iter().map(|&t| earlier_label(t)).collect();
                PhaseState::active(Phase::InService, state(served(&order, 1, Current), EsfsQueue::Empty))
            }
            EsfsQueue::Empty | EsfsQueue::Waiting(_) => {
                let order = order.iter().map(|&t| earlier_label(t)).collect();
                let mut set: Vec<_> = match queue {
                    EsfsQueue::Waiting(set) => set.iter().copied().filter(|t| t.source() != 1).collect(),
                    _ => vec![],
                };
                set.push(Current);
                set.sort_unstable();
                PhaseState::active(Phase::Waiting, state(order, EsfsQueue::Waiting(set)))
            }
        }
    }
}
