//! Exact per-source Age-of-Information distributions for a single-server
//! system fed by `N` independent Poisson sources with exponential service,
//! under three waiting-room policies:
//!
//! * [`Policy::Fsfs`]: one slot per source, sources served in order of their
//!   first waiting packet;
//! * [`Policy::Esfs`]: one slot per source, the source served least recently
//!   goes first;
//! * [`Policy::Sbr`]: a single slot shared by all sources.
//!
//! The analytic path builds an observer chain ([`observer`]), turns the cycle
//! of a tagged packet into a Markov fluid queue ([`mfq`]) and evaluates the
//! resulting matrix-exponential law ([`distribution`]). The [`sim`] module is
//! an independent discrete-event simulator of the same system.
//!
//! ```
//! use aoi_core::{analyze, Policy, SourceParams};
//!
//! let params = SourceParams::new(vec![1.0, 2.0], vec![3.0, 1.0])?;
//! let dists = analyze(Policy::Esfs, &params)?;
//! let mean = dists[0].mean()?;
//! assert!(dists[0].cdf_at(mean)? > 0.3);
//! # Ok::<(), aoi_core::Error>(())
//! ```

pub mod distribution;
pub mod error;
pub mod linalg;
pub mod mfq;
pub mod model;
pub mod observer;
mod policy;
pub mod sim;
pub mod state;

pub use distribution::{aggregate_metrics, analyze, AggregateMetrics, AoiDistribution};
pub use error::{Error, Result};
pub use mfq::{build_mfq, enumerate_phase_states, validate_mfq, MfqModel, ValidationReport, Violation};
pub use model::{Policy, SourceParams};
pub use observer::{build_observer_generator, enumerate_observer_states, stationary_distribution, ObserverChain};
pub use sim::{replicate, simulate, Horizon, SimConfig, SimResult};
pub use state::{ObserverState, PacketTag, Phase, PhaseState, SystemState};
