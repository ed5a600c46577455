//! Per-source age distributions in matrix-exponential form.
//!
//! For a tagged source with fluid-queue blocks `(α, W, β)`:
//!
//! ```text
//! f(x) = ε α e^{Wx} β            ε⁻¹ = α (−W)⁻¹ β
//! F(x) = 1 − ε α e^{Wx} (−W)⁻¹ β
//! E[Δ^k] = k! ε α (−W)^{−(k+1)} β
//! ```

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{Factorization, SparseMatrix, Uniformizer};
use crate::mfq::{build_mfq, validate_mfq, MfqModel};
use crate::model::{Policy, SourceParams};
use crate::observer::ObserverChain;

/// Number of points in [`AoiDistribution::default_grid`].
pub const DEFAULT_GRID_POINTS: usize = 400;

/// Probability level whose quantile ends [`AoiDistribution::default_grid`].
pub const DEFAULT_GRID_LEVEL: f64 = 0.9999;

/// Age distribution of one source. Immutable; queries may run concurrently.
#[derive(Debug)]
pub struct AoiDistribution {
    policy: Policy,
    source: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    w: SparseMatrix,
    uniformizer: Uniformizer,
    lu: Factorization,
    /// `(−W)⁻¹ β`
    tail: Vec<f64>,
    epsilon: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_age(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("age {x} must be finite and nonnegative")))
    }
}

impl AoiDistribution {
    pub fn from_model(model: &MfqModel) -> Result<Self> {
        Self::new(model.policy(), model.tagged(), model.alpha().to_vec(), model.w().clone(), model.beta().to_vec())
    }

    /// Distribution from raw blocks. `policy` and `source` only label the
    /// result.
    pub fn new(policy: Policy, source: usize, alpha: Vec<f64>, w: SparseMatrix, beta: Vec<f64>) -> Result<Self> {
        let l = w.order();
        if alpha.len() != l || beta.len() != l || l == 0 {
            return Err(Error::InvalidArgument(format!(
                "block sizes alpha {}, W {l}x{l}, beta {} do not match",
                alpha.len(),
                beta.len()
            )));
        }
        let lu = Factorization::new(&w)?;
        let tail: Vec<f64> = lu.solve(&beta)?.into_iter().map(|v| -v).collect();
        let inv_epsilon = dot(&alpha, &tail);
        if !(inv_epsilon.is_finite() && inv_epsilon > 0.0) {
            return Err(Error::Solver(format!("α(−W)⁻¹β = {inv_epsilon} is not positive")));
        }
        let uniformizer = Uniformizer::new(&w);
        Ok(Self { policy, source, alpha, beta, w, uniformizer, lu, tail, epsilon: 1.0 / inv_epsilon })
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    /// 1-based source index.
    pub fn source(&self) -> usize {
        self.source
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn w(&self) -> &SparseMatrix {
        &self.w
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `|ε · α(−W)⁻¹β − 1|`
    pub fn normalization_residual(&self) -> f64 {
        (self.epsilon * dot(&self.alpha, &self.tail) - 1.0).abs()
    }

    /// `α e^{Wx}`
    pub fn propagate(&self, x: f64) -> Result<Vec<f64>> {
        check_age(x)?;
        self.uniformizer.apply(&self.alpha, x)
    }

    fn pdf_of(&self, v: &[f64]) -> f64 {
        (self.epsilon * dot(v, &self.beta)).max(0.0)
    }

    fn cdf_of(&self, v: &[f64]) -> f64 {
        (1.0 - self.epsilon * dot(v, &self.tail)).clamp(0.0, 1.0)
    }

    pub fn pdf_at(&self, x: f64) -> Result<f64> {
        Ok(self.pdf_of(&self.propagate(x)?))
    }

    pub fn cdf_at(&self, x: f64) -> Result<f64> {
        check_age(x)?;
        if x == 0.0 {
            return Ok(0.0);
        }
        Ok(self.cdf_of(&self.propagate(x)?))
    }

    /// `Pr{Δ > γ}`
    pub fn violation_probability(&self, gamma: f64) -> Result<f64> {
        Ok(1.0 - self.cdf_at(gamma)?)
    }

    /// `E[Δ^k]`, by `k + 1` solves against the stored factorization.
    pub fn moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidArgument("moment order must be at least 1".into()));
        }
        let mut u = self.tail.clone();
        let mut factorial = 1.0;
        for i in 1..=k {
            u = self.lu.solve(&u)?.into_iter().map(|v| -v).collect();
            factorial *= i as f64;
        }
        Ok(factorial * self.epsilon * dot(&self.alpha, &u))
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    /// Density and CDF at every point of a nondecreasing grid, stepping the
    /// exponential from one point to the next.
    pub fn curves(&self, grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut pdf = Vec::with_capacity(grid.len());
        let mut cdf = Vec::with_capacity(grid.len());
        let mut v = self.alpha.clone();
        let mut at = 0.0;
        for &x in grid {
            check_age(x)?;
            if x < at {
                return Err(Error::InvalidArgument(format!("grid decreases at {x}")));
            }
            v = self.uniformizer.apply(&v, x - at)?;
            at = x;
            pdf.push(self.pdf_of(&v));
            cdf.push(if x == 0.0 { 0.0 } else { self.cdf_of(&v) });
        }
        Ok((pdf, cdf))
    }

    pub fn pdf_curve(&self, grid: &[f64]) -> Result<Vec<f64>> {
        Ok(self.curves(grid)?.0)
    }

    pub fn cdf_curve(&self, grid: &[f64]) -> Result<Vec<f64>> {
        Ok(self.curves(grid)?.1)
    }

    /// Smallest `x` with `F(x) ≥ p`, to relative precision `1e-10`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("probability {p} not in (0, 1)")));
        }
        let mut lo = 0.0;
        let mut hi = self.mean()?;
        while self.cdf_at(hi)? < p {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Solver(format!("quantile {p} not bracketed")));
            }
        }
        while hi - lo > 1e-10 * hi {
            let mid = 0.5 * (lo + hi);
            if self.cdf_at(mid)? < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// [`DEFAULT_GRID_POINTS`] uniform points on `[0, x_q]` with `q` =
    /// [`DEFAULT_GRID_LEVEL`].
    pub fn default_grid(&self) -> Result<Vec<f64>> {
        Ok(uniform_grid(self.quantile(DEFAULT_GRID_LEVEL)?, DEFAULT_GRID_POINTS))
    }
}

/// `points` evenly spaced values on `[0, hi]`.
pub fn uniform_grid(hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..points).map(|i| hi * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Grid covering every source: uniform up to the largest per-source
/// [`DEFAULT_GRID_LEVEL`] quantile.
pub fn common_grid(dists: &[AoiDistribution], points: usize) -> Result<Vec<f64>> {
    let mut hi = 0.0f64;
    for d in dists {
        hi = hi.max(d.quantile(DEFAULT_GRID_LEVEL)?);
    }
    Ok(uniform_grid(hi, points))
}

/// Cross-source averages.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateMetrics {
    pub per_source_mean: Vec<f64>,
    /// `E[Δ]`, the mean of the per-source means.
    pub mean_aoi: f64,
    pub gamma_grid: Vec<f64>,
    /// `Θ(γ)` at each point of `gamma_grid`.
    pub violation: Vec<f64>,
}

pub fn aggregate_metrics(dists: &[AoiDistribution], gamma_grid: &[f64]) -> Result<AggregateMetrics> {
    if dists.is_empty() {
        return Err(Error::InvalidArgument("no distributions to aggregate".into()));
    }
    let n = dists.len() as f64;
    let per_source_mean = dists.iter().map(AoiDistribution::mean).collect::<Result<Vec<_>>>()?;
    let mean_aoi = per_source_mean.iter().sum::<f64>() / n;
    let mut violation = vec![0.0; gamma_grid.len()];
    for d in dists {
        for (acc, f) in violation.iter_mut().zip(d.cdf_curve(gamma_grid)?) {
            *acc += (1.0 - f) / n;
        }
    }
    Ok(AggregateMetrics { per_source_mean, mean_aoi, gamma_grid: gamma_grid.to_vec(), violation })
}

/// `Θ(γ)` at a single threshold.
pub fn average_violation(dists: &[AoiDistribution], gamma: f64) -> Result<f64> {
    if dists.is_empty() {
        return Err(Error::InvalidArgument("no distributions to aggregate".into()));
    }
    let mut total = 0.0;
    for d in dists {
        total += d.violation_probability(gamma)?;
    }
    Ok(total / dists.len() as f64)
}

/// Per-source distributions for every source, from one observer chain.
/// Each fluid-queue model is validated before use.
pub fn analyze(policy: Policy, params: &SourceParams) -> Result<Vec<AoiDistribution>> {
    let observer = ObserverChain::solved(policy, params)?;
    (1..=params.n())
        .into_par_iter()
        .map(|tagged| {
            let model = build_mfq(policy, params, tagged, &observer)?;
            validate_mfq(&model).into_result()?;
            AoiDistribution::from_model(&model)
        })
        .collect()
}
