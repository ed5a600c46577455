use super::{arrangements, earlier_label, later_label, sources, Dynamics};
use crate::model::SourceParams;
use crate::state::{ObserverState, PacketTag, Phase, PhaseState, SystemState};

use PacketTag::{Current, Next, Previous};

pub(crate) struct Fsfs;

fn state(server: Option<PacketTag>, queue: Vec<PacketTag>) -> SystemState {
    SystemState::Fsfs { server, queue }
}

fn parts(s: &SystemState) -> (Option<PacketTag>, &[PacketTag]) {
    match s {
        SystemState::Fsfs { server, queue } => (*server, queue),
        other => unreachable!("FSFS rules applied to {other}"),
    }
}

/// Queues of phases 2 and 3 behind a server other than `1_n`: ordinary
/// sources `2..=n`, optionally closed by `1_n` (anything queued behind it is
/// irrelevant and never recorded).
fn post_queues(n: u16) -> Vec<Vec<PacketTag>> {
    let others = sources(2..=n);
    let plain = arrangements(&others, others.len());
    let closed = plain.iter().map(|q| {
        let mut q = q.clone();
        q.push(Next);
        q
    });
    plain.iter().cloned().chain(closed).collect()
}

impl Dynamics for Fsfs {
    fn observer_states(&self, n: u16) -> Vec<ObserverState> {
        let all = sources(1..=n);
        let queues = arrangements(&all, all.len());
        let mut out = vec![state(None, vec![])];
        for &i in &all {
            out.extend(queues.iter().map(|q| state(Some(i), q.clone())));
        }
        out
    }

    fn observer_moves(&self, s: &ObserverState, p: &SourceParams, out: &mut Vec<(ObserverState, f64)>) {
        let (server, queue) = parts(s);
        let Some(server) = server else {
            for j in 1..=p.n() as u16 {
                out.push((state(Some(PacketTag::Source(j)), vec![]), p.lambda(j)));
            }
            return;
        };
        for j in 1..=p.n() as u16 {
            let t = PacketTag::Source(j);
            if !queue.contains(&t) {
                let mut q = queue.to_vec();
                q.push(t);
                out.push((state(Some(server), q), p.lambda(j)));
            }
        }
        let mu = p.mu(server.source());
        match queue.split_first() {
            None => out.push((state(None, vec![]), mu)),
            Some((&head, rest)) => out.push((state(Some(head), rest.to_vec()), mu)),
        }
    }

    fn phase_states(&self, n: u16) -> [Vec<SystemState>; 3] {
        let others = sources(2..=n);

        let mut servers = vec![Previous];
        servers.extend(&others);
        let mut waiting_items = others.clone();
        waiting_items.push(Current);
        let waiting_queues: Vec<_> =
            arrangements(&waiting_items, waiting_items.len()).into_iter().filter(|q| q.contains(&Current)).collect();
        let phase1 = servers
            .iter()
            .flat_map(|&s| waiting_queues.iter().map(move |q| state(Some(s), q.clone())))
            .collect();

        let post = post_queues(n);
        let phase2 = post.iter().map(|q| state(Some(Current), q.clone())).collect();

        let mut phase3 = vec![state(None, vec![]), state(Some(Next), vec![])];
        for &s in &others {
            phase3.extend(post.iter().map(|q| state(Some(s), q.clone())));
        }
        [phase1, phase2, phase3]
    }

    fn phase_moves(&self, phase: Phase, s: &SystemState, p: &SourceParams, out: &mut Vec<(PhaseState, f64)>) {
        let (server, queue) = parts(s);
        let n = p.n() as u16;
        let Some(server) = server else {
            // Idle server, phase 3 only.
            for j in 1..=n {
                out.push((PhaseState::active(Phase::Aging, state(Some(later_label(j)), vec![])), p.lambda(j)));
            }
            return;
        };
        let mu = p.mu(server.source());

        if phase == Phase::Waiting {
            out.push((PhaseState::Reset, p.lambda(1)));
            for j in 2..=n {
                let t = PacketTag::Source(j);
                if !queue.contains(&t) {
                    let mut q = queue.to_vec();
                    q.push(t);
                    out.push((PhaseState::active(Phase::Waiting, state(Some(server), q)), p.lambda(j)));
                }
            }
            let (&head, rest) = queue.split_first().expect("1_c waits in phase 1");
            let next = if head == Current {
                PhaseState::active(Phase::InService, state(Some(Current), rest.to_vec()))
            } else {
                PhaseState::active(Phase::Waiting, state(Some(head), rest.to_vec()))
            };
            out.push((next, mu));
            return;
        }

        if server == Next {
            out.push((PhaseState::Reset, mu));
            return;
        }

        // Phases 2 and 3 with an ordinary packet or 1_c in service.
        if queue.last() != Some(&Next) {
            for j in 1..=n {
                let t = later_label(j);
                if !queue.contains(&t) {
                    let mut q = queue.to_vec();
                    q.push(t);
                    out.push((PhaseState::active(phase, state(Some(server), q)), p.lambda(j)));
                }
            }
        }
        let after = match queue.split_first() {
            None => state(None, vec![]),
            Some((&Next, _)) => state(Some(Next), vec![]),
            Some((&head, rest)) => state(Some(head), rest.to_vec()),
        };
        out.push((PhaseState::active(Phase::Aging, after), mu));
    }

    fn tagged_arrival(&self, seen: &ObserverState) -> PhaseState {
        let (server, queue) = parts(seen);
        let Some(server) = server else {
            return PhaseState::active(Phase::InService, state(Some(Current), vec![]));
        };
        let mut q: Vec<_> = queue
            .iter()
            .map(|&t| if t == PacketTag::Source(1) { Current } else { t })
            .collect();
        if !q.contains(&Current) {
            q.push(Current);
        }
        PhaseState::active(Phase::Waiting, state(Some(earlier_label(server)), q))
    }
}
