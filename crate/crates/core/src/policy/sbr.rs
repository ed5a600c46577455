use super::{earlier_label, later_label, sources, Dynamics};
use crate::model::SourceParams;
use crate::state::{ObserverState, PacketTag, Phase, PhaseState, SystemState};

use PacketTag::{Current, Next, Previous};

pub(crate) struct Sbr;

fn state(server: Option<PacketTag>, buffer: Option<PacketTag>) -> SystemState {
    SystemState::Sbr { server, buffer }
}

fn parts(s: &SystemState) -> (Option<PacketTag>, Option<PacketTag>) {
    match s {
        SystemState::Sbr { server, buffer } => (*server, *buffer),
        other => unreachable!("SBR rules applied to {other}"),
    }
}

impl Dynamics for Sbr {
    fn observer_states(&self, n: u16) -> Vec<ObserverState> {
        let all = sources(1..=n);
        let mut out = vec![state(None, None)];
        for &i in &all {
            out.push(state(Some(i), None));
            out.extend(all.iter().map(|&j| state(Some(i), Some(j))));
        }
        out
    }

    fn observer_moves(&self, s: &ObserverState, p: &SourceParams, out: &mut Vec<(ObserverState, f64)>) {
        let (server, buffer) = parts(s);
        let n = p.n() as u16;
        let Some(server) = server else {
            for j in 1..=n {
                out.push((state(Some(PacketTag::Source(j)), None), p.lambda(j)));
            }
            return;
        };
        for j in 1..=n {
            let t = PacketTag::Source(j);
            if buffer != Some(t) {
                out.push((state(Some(server), Some(t)), p.lambda(j)));
            }
        }
        let mu = p.mu(server.source());
        out.push((buffer.map_or(state(None, None), |b| state(Some(b), None)), mu));
    }

    fn phase_states(&self, n: u16) -> [Vec<SystemState>; 3] {
        let others = sources(2..=n);
        let mut buffers = vec![None, Some(Next)];
        buffers.extend(others.iter().map(|&t| Some(t)));

        let phase1 = std::iter::once(Previous)
            .chain(others.iter().copied())
            .map(|s| state(Some(s), Some(Current)))
            .collect();
        let phase2 = buffers.iter().map(|&b| state(Some(Current), b)).collect();
        let mut phase3 = vec![state(None, None), state(Some(Next), None)];
        for &s in &others {
            phase3.extend(buffers.iter().map(|&b| state(Some(s), b)));
        }
        [phase1, phase2, phase3]
    }

    fn phase_moves(&self, phase: Phase, s: &SystemState, p: &SourceParams, out: &mut Vec<(PhaseState, f64)>) {
        let (server, buffer) = parts(s);
        let n = p.n() as u16;
        let Some(server) = server else {
            for j in 1..=n {
                out.push((PhaseState::active(Phase::Aging, state(Some(later_label(j)), None)), p.lambda(j)));
            }
            return;
        };
        let mu = p.mu(server.source());

        if phase == Phase::Waiting {
            // Any arrival overwrites 1_c in the shared buffer.
            for j in 1..=n {
                out.push((PhaseState::Reset, p.lambda(j)));
            }
            out.push((PhaseState::active(Phase::InService, state(Some(Current), None)), mu));
            return;
        }

        if server == Next {
            out.push((PhaseState::Reset, mu));
            return;
        }

        for j in 1..=n {
            let t = later_label(j);
            if buffer != Some(t) {
                out.push((PhaseState::active(phase, state(Some(server), Some(t))), p.lambda(j)));
            }
        }
        let after = buffer.map_or(state(None, None), |b| state(Some(b), None));
        out.push((PhaseState::active(Phase::Aging, after), mu));
    }

    fn tagged_arrival(&self, seen: &ObserverState) -> PhaseState {
        match parts(seen) {
            (None, _) => PhaseState::active(Phase::InService, state(Some(Current), None)),
            (Some(server), _) => PhaseState::active(Phase::Waiting, state(Some(earlier_label(server)), Some(Current))),
        }
    }
}
