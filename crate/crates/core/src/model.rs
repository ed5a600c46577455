//! Source parameters and policy identifiers.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Poisson arrival rates and exponential service rates of the `N` sources.
///
/// Sources are numbered `1..=N` in state labels; the vectors themselves are
/// zero-based, so source `k` reads `lambdas()[k - 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceParams {
    lambdas: Vec<f64>,
    mus: Vec<f64>,
}

impl SourceParams {
    pub fn new(lambdas: Vec<f64>, mus: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidParams("at least one source is required".into()));
        }
        if lambdas.len() != mus.len() {
            return Err(Error::InvalidParams(format!(
                "{} arrival rates but {} service rates",
                lambdas.len(),
                mus.len()
            )));
        }
        if lambdas.len() > u16::MAX as usize {
            return Err(Error::InvalidParams("too many sources".into()));
        }
        for (name, rates) in [("arrival", &lambdas), ("service", &mus)] {
            if let Some((i, r)) = rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > 0.0)) {
                return Err(Error::InvalidParams(format!(
                    "{name} rate of source {} must be positive and finite, got {r}",
                    i + 1
                )));
            }
        }
        let p = Self { lambdas, mus };
        let rho = p.load();
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParams(format!("system load {rho} is not finite")));
        }
        Ok(p)
    }

    /// `n` sources with a common service rate `mu` and equal per-source load
    /// `rho / n`.
    pub fn balanced(n: usize, rho: f64, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("at least one source is required".into()));
        }
        Self::new(vec![rho * mu / n as f64; n], vec![mu; n])
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    /// Arrival rate of the 1-based source `source`.
    pub fn lambda(&self, source: u16) -> f64 {
        self.lambdas[source as usize - 1]
    }

    /// Service rate of the 1-based source `source`.
    pub fn mu(&self, source: u16) -> f64 {
        self.mus[source as usize - 1]
    }

    pub fn total_arrival_rate(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// Per-source loads `λ_n / μ_n`.
    pub fn loads(&self) -> Vec<f64> {
        self.lambdas.iter().zip(&self.mus).map(|(l, m)| l / m).collect()
    }

    /// System load, the sum of per-source loads.
    pub fn load(&self) -> f64 {
        self.loads().iter().sum()
    }

    /// Exchange the rates of two 1-based sources.
    pub fn swapped(&self, a: u16, b: u16) -> Self {
        let mut p = self.clone();
        p.lambdas.swap(a as usize - 1, b as usize - 1);
        p.mus.swap(a as usize - 1, b as usize - 1);
        p
    }
}

/// Queueing and scheduling scheme at the server.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Policy {
    /// First Source First Serve: per-source slots served in order of the
    /// first (non-replaced) arrival.
    Fsfs,
    /// Earliest Served First Serve: per-source slots; the waiting source whose
    /// last service started longest ago goes next.
    Esfs,
    /// Single Buffer with Replacement: one slot shared by all sources.
    Sbr,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Fsfs, Policy::Esfs, Policy::Sbr];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Fsfs => "fsfs",
            Policy::Esfs => "esfs",
            Policy::Sbr => "sbr",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_uppercase())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fsfs" => Ok(Policy::Fsfs),
            "esfs" => Ok(Policy::Esfs),
            "sbr" => Ok(Policy::Sbr),
            other => Err(Error::InvalidArgument(format!("unknown policy `{other}`"))),
        }
    }
}
