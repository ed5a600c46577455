//! Markov fluid queue of one tagged source.
//!
//! The fluid level grows at unit rate through the three active phases of a
//! tagged-packet cycle and drains at unit rate in the single reset state.
//! With the reset state numbered last, the generator for a positive level is
//! `[[W, h], [0, 0]]` and the generator at level zero is `[[0, 0], [α, -1]]`,
//! so the joint density over the active states is proportional to
//! `α e^{W x}`. Restricting that density to phase 3 gives the age
//! distribution of the tagged source.

use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::linalg::{Factorization, SparseMatrix};
use crate::model::{Policy, SourceParams};
use crate::observer::ObserverChain;
use crate::policy::dynamics;
use crate::state::{Phase, PhaseState, StateSpace};

/// Slack allowed on the total exit mass of the reset state.
pub const ALPHA_TOLERANCE: f64 = 1e-9;

/// Phase 1–4 state lists of the modulating chain, each canonically ordered.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaces {
    pub waiting: Vec<PhaseState>,
    pub in_service: Vec<PhaseState>,
    pub aging: Vec<PhaseState>,
    pub reset: PhaseState,
}

impl PhaseSpaces {
    /// Number of positive-drift states.
    pub fn order(&self) -> usize {
        self.waiting.len() + self.in_service.len() + self.aging.len()
    }
}

fn check_tagged(n: usize, tagged: usize) -> Result<()> {
    if tagged == 0 || tagged > n {
        return Err(Error::InvalidArgument(format!("tagged source {tagged} not in 1..={n}")));
    }
    Ok(())
}

/// Phase state lists for `n` sources. The lists do not depend on which
/// source is tagged: the tagged one always carries the `1_*` labels.
pub fn enumerate_phase_states(policy: Policy, n: usize, tagged: usize) -> Result<PhaseSpaces> {
    if n == 0 || n > u16::MAX as usize {
        return Err(Error::InvalidArgument(format!("source count {n} out of range")));
    }
    check_tagged(n, tagged)?;
    let [p1, p2, p3] = dynamics(policy).phase_states(n as u16);
    let wrap = |phase: Phase, states: Vec<_>| -> Result<Vec<PhaseState>> {
        let space = StateSpace::new(states.into_iter().map(|s| PhaseState::active(phase, s)).collect())?;
        Ok(space.states().to_vec())
    };
    Ok(PhaseSpaces {
        waiting: wrap(Phase::Waiting, p1)?,
        in_service: wrap(Phase::InService, p2)?,
        aging: wrap(Phase::Aging, p3)?,
        reset: PhaseState::Reset,
    })
}

/// Characterizing blocks of the fluid queue for one tagged source.
#[derive(Clone, Debug)]
pub struct MfqModel {
    policy: Policy,
    tagged: usize,
    /// All `L + 1` states; the reset state is last.
    space: StateSpace<PhaseState>,
    phase_sizes: [usize; 3],
    w: SparseMatrix,
    h: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

/// Assemble the fluid queue of source `tagged` (1-based).
///
/// The tables are written for source 1; other sources are handled by
/// exchanging the rates of sources 1 and `tagged` and relabelling the
/// observer states accordingly.
pub fn build_mfq(policy: Policy, params: &SourceParams, tagged: usize, observer: &ObserverChain) -> Result<MfqModel> {
    let n = params.n();
    check_tagged(n, tagged)?;
    if observer.policy() != policy || observer.params() != params {
        return Err(Error::InvalidArgument("observer chain was built for a different policy or parameters".into()));
    }
    let pi = observer
        .stationary()
        .ok_or_else(|| Error::InvalidArgument("observer chain has no stationary vector".into()))?;
    let tag = tagged as u16;
    let local = params.swapped(1, tag);

    let phases = enumerate_phase_states(policy, n, tagged)?;
    let phase_sizes = [phases.waiting.len(), phases.in_service.len(), phases.aging.len()];
    let mut all = Vec::with_capacity(phases.order() + 1);
    all.extend(phases.waiting);
    all.extend(phases.in_service);
    all.extend(phases.aging);
    all.push(PhaseState::Reset);
    let space = StateSpace::new(all)?;
    let order = space.len() - 1;

    let rules = dynamics(policy);
    let mut trips = Vec::new();
    let mut h = vec![0.0; order];
    let mut moves = Vec::new();
    for i in 0..order {
        let PhaseState::Active { phase, state } = &space[i] else {
            unreachable!("reset state is last")
        };
        moves.clear();
        rules.phase_moves(*phase, state, &local, &mut moves);
        let mut outflow = 0.0;
        for (target, rate) in moves.drain(..) {
            if target == PhaseState::Reset {
                h[i] += rate;
                continue;
            }
            let j = space.get(&target).ok_or_else(|| {
                Error::Construction(format!("{policy} move {} -> {target} leaves the state space", space[i]))
            })?;
            if j != i {
                trips.push((i, j, rate));
                outflow += rate;
            }
        }
        trips.push((i, i, -(outflow + h[i])));
    }
    let w = SparseMatrix::from_triplets(order, trips);

    let mut alpha = vec![0.0; order];
    for (seen, &mass) in observer.states().iter().zip(pi) {
        let entered = rules.tagged_arrival(&seen.swap_sources(1, tag));
        let j = space
            .get(&entered)
            .filter(|&j| j < order)
            .ok_or_else(|| Error::Construction(format!("arrival seeing {seen} enters unknown state {entered}")))?;
        alpha[j] += mass;
    }
    let mass: f64 = alpha.iter().sum();
    if (mass - 1.0).abs() > ALPHA_TOLERANCE {
        return Err(Error::Construction(format!("reset exit mass {mass} differs from 1")));
    }
    alpha.iter_mut().for_each(|a| *a /= mass);

    let aging_start = phase_sizes[0] + phase_sizes[1];
    let beta = (0..order).map(|i| if i >= aging_start { 1.0 } else { 0.0 }).collect();

    Ok(MfqModel { policy, tagged, space, phase_sizes, w, h, alpha, beta })
}

impl MfqModel {
    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn tagged(&self) -> usize {
        self.tagged
    }

    /// Number of positive-drift states `L`.
    pub fn order(&self) -> usize {
        self.h.len()
    }

    pub fn phase_sizes(&self) -> [usize; 3] {
        self.phase_sizes
    }

    /// All `L + 1` states, reset last.
    pub fn states(&self) -> &[PhaseState] {
        self.space.states()
    }

    pub fn canonical_index(&self, state: &PhaseState) -> Result<usize> {
        self.space.canonical_index(state)
    }

    pub fn w(&self) -> &SparseMatrix {
        &self.w
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Fluid drift of state `i`: +1 on phases 1–3, −1 on the reset state.
    pub fn drift(&self, i: usize) -> f64 {
        if i < self.order() {
            1.0
        } else {
            -1.0
        }
    }

    /// Write the state table followed by `W`, `h` and `alpha` triplets.
    pub fn dump(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "# state | phase | index")?;
        for (i, s) in self.states().iter().enumerate() {
            writeln!(out, "{s} | {} | {i}", s.phase_number())?;
        }
        writeln!(out, "# W")?;
        for (r, c, v) in self.w.triplets() {
            writeln!(out, "{r} {c} {v:.17e}")?;
        }
        writeln!(out, "# h")?;
        for (i, v) in self.h.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            writeln!(out, "{i} {v:.17e}")?;
        }
        writeln!(out, "# alpha")?;
        for (i, v) in self.alpha.iter().enumerate().filter(|(_, v)| **v != 0.0) {
            writeln!(out, "{i} {v:.17e}")?;
        }
        Ok(())
    }
}

/// One violated model invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NegativeOffDiagonal { state: String, target: String, value: f64 },
    NonNegativeDiagonal { state: String, value: f64 },
    RowSum { state: String, residual: f64 },
    NegativeExit { state: String, value: f64 },
    NoExit,
    NegativeAlpha { state: String, value: f64 },
    AlphaMass { mass: f64 },
    AlphaSupport { state: String },
    BetaSupport { state: String },
    NotTransient { state: String, value: f64 },
    Singular(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeOffDiagonal { state, target, value } => {
                write!(f, "W[{state}, {target}] = {value} is negative")
            }
            Violation::NonNegativeDiagonal { state, value } => write!(f, "W[{state}, {state}] = {value} is not negative"),
            Violation::RowSum { state, residual } => write!(f, "row {state}: W·1 + h = {residual:.3e}"),
            Violation::NegativeExit { state, value } => write!(f, "h[{state}] = {value} is negative"),
            Violation::NoExit => f.write_str("h is identically zero"),
            Violation::NegativeAlpha { state, value } => write!(f, "alpha[{state}] = {value} is negative"),
            Violation::AlphaMass { mass } => write!(f, "alpha sums to {mass}"),
            Violation::AlphaSupport { state } => write!(f, "alpha has mass on {state} outside phases 1-2"),
            Violation::BetaSupport { state } => write!(f, "beta disagrees with phase 3 membership at {state}"),
            Violation::NotTransient { state, value } => write!(f, "solution of W x = -1 at {state} is {value}"),
            Violation::Singular(msg) => write!(f, "W x = -1 not solvable: {msg}"),
        }
    }
}

/// Outcome of [`validate_mfq`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Largest `|W·1 + h|` over rows.
    pub max_row_residual: f64,
    pub alpha_mass: f64,
    /// Smallest entry of `x` in `W x = -1` (expected time to reset), if solvable.
    pub min_time_to_reset: Option<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.is_valid() {
            Ok(self)
        } else {
            Err(Error::Validation(self.violations))
        }
    }
}

/// Check every structural invariant of an assembled model.
pub fn validate_mfq(model: &MfqModel) -> ValidationReport {
    let order = model.order();
    let name = |i: usize| model.space[i].to_string();
    let mut violations = Vec::new();

    let mut max_row_residual = 0.0f64;
    for r in 0..order {
        let mut sum = 0.0;
        let mut scale = 1.0f64;
        let mut diag = 0.0;
        for (c, v) in model.w.row(r) {
            sum += v;
            scale = scale.max(v.abs());
            if c == r {
                diag = v;
            } else if v < 0.0 {
                violations.push(Violation::NegativeOffDiagonal { state: name(r), target: name(c), value: v });
            }
        }
        if diag >= 0.0 {
            violations.push(Violation::NonNegativeDiagonal { state: name(r), value: diag });
        }
        let residual = sum + model.h[r];
        max_row_residual = max_row_residual.max(residual.abs());
        if residual.abs() > 1e-12 * scale {
            violations.push(Violation::RowSum { state: name(r), residual });
        }
        if model.h[r] < 0.0 {
            violations.push(Violation::NegativeExit { state: name(r), value: model.h[r] });
        }
    }
    if model.h.iter().all(|&x| x == 0.0) {
        violations.push(Violation::NoExit);
    }

    let alpha_mass: f64 = model.alpha.iter().sum();
    if (alpha_mass - 1.0).abs() > ALPHA_TOLERANCE {
        violations.push(Violation::AlphaMass { mass: alpha_mass });
    }
    let aging_start = model.phase_sizes[0] + model.phase_sizes[1];
    for (i, &a) in model.alpha.iter().enumerate() {
        if a < 0.0 {
            violations.push(Violation::NegativeAlpha { state: name(i), value: a });
        }
        if a != 0.0 && i >= aging_start {
            violations.push(Violation::AlphaSupport { state: name(i) });
        }
        let in_aging = i >= aging_start;
        if (model.beta[i] == 1.0) != in_aging || !(model.beta[i] == 0.0 || model.beta[i] == 1.0) {
            violations.push(Violation::BetaSupport { state: name(i) });
        }
    }

    let ones = vec![-1.0; order];
    let min_time_to_reset = match Factorization::new(&model.w).and_then(|f| f.solve(&ones)) {
        Ok(x) => {
            for (i, &v) in x.iter().enumerate() {
                if !(v.is_finite() && v > 0.0) {
                    violations.push(Violation::NotTransient { state: name(i), value: v });
                }
            }
            Some(x.iter().copied().fold(f64::INFINITY, f64::min))
        }
        Err(e) => {
            violations.push(Violation::Singular(e.to_string()));
            None
        }
    };

    ValidationReport { violations, max_row_residual, alpha_mass, min_time_to_reset }
}
