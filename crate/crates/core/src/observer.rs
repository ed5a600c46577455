//! The observer chain: the system state seen by an arriving packet.
//!
//! Poisson arrivals see time averages, so the stationary vector of this chain
//! is also the distribution of the state found by an arriving packet of any
//! source.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::linalg::{Factorization, SparseMatrix};
use crate::model::{Policy, SourceParams};
use crate::policy::dynamics;
use crate::state::{ObserverState, StateSpace};

/// Residual bound on `‖π Q‖∞` accepted from the stationary solve.
pub const STATIONARY_TOLERANCE: f64 = 1e-10;

/// Observer CTMC of one policy and parameter set.
#[derive(Clone, Debug)]
pub struct ObserverChain {
    policy: Policy,
    params: SourceParams,
    space: StateSpace<ObserverState>,
    /// Off-diagonal transition rates.
    rates: SparseMatrix,
    stationary: Option<Vec<f64>>,
}

/// All observer states for `n` sources, canonically ordered.
pub fn enumerate_observer_states(policy: Policy, n: usize) -> Result<Vec<ObserverState>> {
    Ok(observer_space(policy, n)?.states().to_vec())
}

fn observer_space(policy: Policy, n: usize) -> Result<StateSpace<ObserverState>> {
    if n == 0 || n > u16::MAX as usize {
        return Err(Error::InvalidArgument(format!("source count {n} out of range")));
    }
    StateSpace::new(dynamics(policy).observer_states(n as u16))
}

/// Assemble the transition rates of the observer chain; the stationary
/// vector is left unset.
pub fn build_observer_generator(policy: Policy, params: &SourceParams) -> Result<ObserverChain> {
    let space = observer_space(policy, params.n())?;
    let rules = dynamics(policy);
    let mut trips = Vec::new();
    let mut moves = Vec::new();
    for (from, state) in space.states().iter().enumerate() {
        moves.clear();
        rules.observer_moves(state, params, &mut moves);
        for (target, rate) in moves.drain(..) {
            let to = space.get(&target).ok_or_else(|| {
                Error::Construction(format!("{policy} observer move {state} -> {target} leaves the state space"))
            })?;
            if to != from {
                trips.push((from, to, rate));
            }
        }
    }
    let rates = SparseMatrix::from_triplets(space.len(), trips);
    Ok(ObserverChain { policy, params: params.clone(), space, rates, stationary: None })
}

/// Solve `π Q = 0`, `Σ π = 1` with one balance equation replaced by the
/// normalization, then check the residual.
pub fn stationary_distribution(chain: &ObserverChain) -> Result<Vec<f64>> {
    let n = chain.len();
    let q = chain.generator();
    // Column n-1 of Q becomes all ones; solve π A = e_{n-1}.
    let mut trips: Vec<_> = q.triplets().filter(|&(_, c, _)| c != n - 1).collect();
    trips.extend((0..n).map(|r| (r, n - 1, 1.0)));
    let a = SparseMatrix::from_triplets(n, trips);
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let mut pi = Factorization::new(&a)?.solve_left(&rhs)?;

    let min = pi.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-12 {
        return Err(Error::Numerical { context: "stationary vector has negative mass", residual: -min, tolerance: 1e-12 });
    }
    pi.iter_mut().for_each(|p| *p = p.max(0.0));
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);

    let residual = q.left_mul(&pi).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if residual > STATIONARY_TOLERANCE {
        return Err(Error::Numerical { context: "stationary balance", residual, tolerance: STATIONARY_TOLERANCE });
    }
    Ok(pi)
}

impl ObserverChain {
    /// Build and solve in one step.
    pub fn solved(policy: Policy, params: &SourceParams) -> Result<Self> {
        build_observer_generator(policy, params)?.with_stationary()
    }

    pub fn with_stationary(mut self) -> Result<Self> {
        self.stationary = Some(stationary_distribution(&self)?);
        Ok(self)
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn params(&self) -> &SourceParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn states(&self) -> &[ObserverState] {
        self.space.states()
    }

    pub fn space(&self) -> &StateSpace<ObserverState> {
        &self.space
    }

    pub fn rates(&self) -> &SparseMatrix {
        &self.rates
    }

    pub fn rate(&self, from: &ObserverState, to: &ObserverState) -> f64 {
        match (self.space.get(from), self.space.get(to)) {
            (Some(i), Some(j)) => self.rates.get(i, j),
            _ => 0.0,
        }
    }

    pub fn stationary(&self) -> Option<&[f64]> {
        self.stationary.as_deref()
    }

    /// Infinitesimal generator: the rates with diagonal `-row sum`.
    pub fn generator(&self) -> SparseMatrix {
        let sums = self.rates.row_sums();
        let mut trips: Vec<_> = self.rates.triplets().collect();
        trips.extend(sums.iter().enumerate().map(|(i, s)| (i, i, -s)));
        SparseMatrix::from_triplets(self.len(), trips)
    }

    /// Write `from | to | rate` lines in canonical order.
    pub fn dump(&self, mut out: impl Write) -> io::Result<()> {
        for (r, c, v) in self.rates.triplets() {
            writeln!(out, "{} | {} | {v:.17e}", self.space[r], self.space[c])?;
        }
        Ok(())
    }
}
