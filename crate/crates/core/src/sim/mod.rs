//! Discrete-event simulation of the multi-source server.
//!
//! Every source has its own exponential arrival clock and the server an
//! exponential service clock; the earliest clock fires next, ties going to
//! the lowest source index and then to the departure. The system starts
//! empty with all ages zero, and the ESFS service order starts as
//! `(1, …, N)`.

mod age;
mod room;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Policy, SourceParams};
use crate::observer::enumerate_observer_states;
use crate::state::{ObserverState, StateSpace};
use age::AgeAccumulator;
use room::{Packet, Room};

/// Fraction of the horizon discarded before statistics are collected.
pub const DEFAULT_WARMUP: f64 = 0.1;

/// Length of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    /// Simulated seconds.
    Time(f64),
    /// Arrivals plus departures.
    Events(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub params: SourceParams,
    pub policy: Policy,
    pub horizon: Horizon,
    pub seed: u64,
    /// Ages at which the time-average CDF is recorded; strictly increasing.
    pub cdf_grid: Vec<f64>,
    /// Fraction of the horizon (time or events) discarded, in `[0, 0.5)`.
    pub warmup: f64,
    /// Record observer-state occupancy and arrival-seen frequencies.
    pub track_observer: bool,
}

impl SimConfig {
    pub fn new(policy: Policy, params: SourceParams, horizon: Horizon, seed: u64) -> Self {
        Self { params, policy, horizon, seed, cdf_grid: Vec::new(), warmup: DEFAULT_WARMUP, track_observer: false }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.cdf_grid = grid;
        self
    }

    pub fn with_warmup(mut self, warmup: f64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_observer(mut self, track: bool) -> Self {
        self.track_observer = track;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.horizon {
            Horizon::Time(t) if !(t.is_finite() && t > 0.0) => {
                return Err(Error::InvalidArgument(format!("time horizon {t} must be positive")))
            }
            Horizon::Events(0) => return Err(Error::InvalidArgument("event budget must be positive".into())),
            _ => {}
        }
        if !(0.0..0.5).contains(&self.warmup) {
            return Err(Error::InvalidArgument(format!("warmup fraction {} not in [0, 0.5)", self.warmup)));
        }
        if self.cdf_grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidArgument("CDF grid must be finite and nonnegative".into()));
        }
        if self.cdf_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("CDF grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub policy: Policy,
    pub seed: u64,
    /// RNG stream within `seed`; 0 for [`simulate`], the run index for
    /// [`replicate`].
    pub stream: u64,
    pub per_source_mean: Vec<f64>,
    pub cdf_grid: Vec<f64>,
    /// `per_source_cdf[n][j]`: fraction of measured time with `Δ_{n+1} ≤ grid[j]`.
    pub per_source_cdf: Vec<Vec<f64>>,
    /// Canonically ordered observer states; empty unless tracked.
    pub observer_states: Vec<ObserverState>,
    pub observer_occupancy: Vec<f64>,
    /// `arrival_seen[n][i]`: fraction of source-`n+1` arrivals that found state `i`.
    pub arrival_seen: Vec<Vec<f64>>,
    pub deliveries: Vec<u64>,
    pub event_count: u64,
    /// Length of the measured window in seconds.
    pub measured_time: f64,
}

impl SimResult {
    pub fn n(&self) -> usize {
        self.per_source_mean.len()
    }

    /// Mean of the per-source mean ages.
    pub fn mean_aoi(&self) -> f64 {
        self.per_source_mean.iter().sum::<f64>() / self.n() as f64
    }

    /// `Pr{Δ_n > γ}` on the CDF grid, `source` 1-based.
    pub fn per_source_violation(&self, source: usize) -> Vec<f64> {
        self.per_source_cdf[source - 1].iter().map(|f| 1.0 - f).collect()
    }

    /// Arrival-seen frequencies pooled over all sources.
    pub fn arrival_seen_pooled(&self, params: &SourceParams) -> Vec<f64> {
        let total = params.total_arrival_rate();
        let mut out = vec![0.0; self.observer_states.len()];
        for (freq, lambda) in self.arrival_seen.iter().zip(params.lambdas()) {
            for (o, f) in out.iter_mut().zip(freq) {
                *o += f * lambda / total;
            }
        }
        out
    }
}

/// One delivery, as recorded by the traced run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Delivery {
    pub time: f64,
    /// 0-based.
    pub source: usize,
    pub born: f64,
    pub age_before: f64,
    pub age_after: f64,
}

fn exp(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    rng.sample::<f64, _>(Exp1) / rate
}

struct Observer {
    space: StateSpace<ObserverState>,
    current: usize,
    occupancy: Vec<f64>,
    seen: Vec<Vec<u64>>,
}

impl Observer {
    fn locate(&mut self, room: &Room, server: Option<&Packet>) {
        let s = room.observer_state(server.map(|p| p.source));
        self.current = self.space.get(&s).expect("simulated state belongs to the observer space");
    }
}

pub(crate) fn run(config: &SimConfig, stream: u64, mut trace: Option<&mut Vec<Delivery>>) -> Result<SimResult> {
    config.validate()?;
    let params = &config.params;
    let n = params.n();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);

    let (budget, end_time, mut measure_from, warm_events) = match config.horizon {
        Horizon::Time(t) => (u64::MAX, t, config.warmup * t, 0),
        Horizon::Events(e) => {
            let warm = (config.warmup * e as f64) as u64;
            (e, f64::INFINITY, if warm == 0 { 0.0 } else { f64::INFINITY }, warm)
        }
    };

    let mut observer = if config.track_observer {
        let space = StateSpace::new(enumerate_observer_states(config.policy, n)?)?;
        let len = space.len();
        Some(Observer { space, current: 0, occupancy: vec![0.0; len], seen: vec![vec![0; len]; n] })
    } else {
        None
    };

    let mut room = Room::new(config.policy, n);
    let mut server: Option<Packet> = None;
    let mut departure = f64::INFINITY;
    let mut arrivals: Vec<f64> = params.lambdas().iter().map(|&l| exp(&mut rng, l)).collect();
    let mut newest = vec![0.0; n];
    let mut mark = vec![0.0f64; n];
    let mut ages: Vec<AgeAccumulator> = (0..n).map(|_| AgeAccumulator::new(&config.cdf_grid)).collect();
    let mut deliveries = vec![0u64; n];
    let mut t = 0.0f64;
    let mut events = 0u64;
    if let Some(o) = observer.as_mut() {
        o.locate(&room, None);
    }

    while events < budget {
        let (mut next, mut which) = (departure, n);
        for (i, &a) in arrivals.iter().enumerate() {
            if a < next || (a == next && which == n) {
                next = a;
                which = i;
            }
        }
        if next > end_time {
            break;
        }
        if let Some(o) = observer.as_mut() {
            o.occupancy[o.current] += (next - t.max(measure_from)).max(0.0);
        }
        t = next;
        events += 1;

        if which < n {
            if let Some(o) = observer.as_mut() {
                if t >= measure_from {
                    o.seen[which][o.current] += 1;
                }
            }
            arrivals[which] = t + exp(&mut rng, params.lambdas()[which]);
            let p = Packet { source: which, born: t };
            if server.is_none() {
                room.started(which);
                departure = t + exp(&mut rng, params.mus()[which]);
                server = Some(p);
            } else {
                room.admit(p);
            }
        } else {
            let p = server.take().expect("departure from a busy server");
            let s = p.source;
            let from = mark[s].max(measure_from);
            if t > from {
                ages[s].segment(from - newest[s], t - from);
                deliveries[s] += 1;
            }
            if let Some(log) = trace.as_deref_mut() {
                log.push(Delivery { time: t, source: s, born: p.born, age_before: t - newest[s], age_after: t - p.born });
            }
            debug_assert!(p.born >= newest[s], "deliveries of a source are in generation order");
            newest[s] = p.born;
            mark[s] = t;
            match room.take() {
                Some(q) => {
                    room.started(q.source);
                    departure = t + exp(&mut rng, params.mus()[q.source]);
                    server = Some(q);
                }
                None => departure = f64::INFINITY,
            }
        }

        #[cfg(debug_assertions)]
        {
            room.check();
            if config.policy == Policy::Sbr {
                assert!(room.waiting() <= 1);
            }
        }
        if let Some(o) = observer.as_mut() {
            o.locate(&room, server.as_ref());
        }
        if events == warm_events && measure_from.is_infinite() {
            measure_from = t;
        }
    }

    let stop = if end_time.is_finite() { end_time } else { t };
    if let Some(o) = observer.as_mut() {
        o.occupancy[o.current] += (stop - t.max(measure_from)).max(0.0);
    }
    for s in 0..n {
        let from = mark[s].max(measure_from);
        if stop > from {
            ages[s].segment(from - newest[s], stop - from);
        }
    }

    let measured_time = (stop - measure_from).max(0.0);
    if !(measured_time > 0.0) {
        return Err(Error::InvalidArgument("horizon leaves no measured time after warmup".into()));
    }

    let (observer_states, observer_occupancy, arrival_seen) = match observer {
        Some(o) => {
            let occupancy = o.occupancy.iter().map(|x| x / measured_time).collect();
            let seen = o
                .seen
                .iter()
                .map(|counts| {
                    let total = counts.iter().sum::<u64>().max(1) as f64;
                    counts.iter().map(|&c| c as f64 / total).collect()
                })
                .collect();
            (o.space.states().to_vec(), occupancy, seen)
        }
        None => (Vec::new(), Vec::new(), vec![Vec::new(); n]),
    };

    Ok(SimResult {
        policy: config.policy,
        seed: config.seed,
        stream,
        per_source_mean: ages.iter().map(AgeAccumulator::mean).collect(),
        cdf_grid: config.cdf_grid.clone(),
        per_source_cdf: ages.iter().map(AgeAccumulator::cdf).collect(),
        observer_states,
        observer_occupancy,
        arrival_seen,
        deliveries,
        event_count: events,
        measured_time,
    })
}

/// One run on stream 0 of `config.seed`.
pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    run(config, 0, None)
}

/// Sample mean and its standard error. With one sample the error is 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Self {
        let k = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / k;
        if samples.len() < 2 {
            return Self { mean, std_error: 0.0 };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        Self { mean, std_error: (var / k).sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Replication {
    pub runs: Vec<SimResult>,
    pub per_source_mean: Vec<Summary>,
    pub mean_aoi: Summary,
    /// `per_source_cdf[n][j]` over runs.
    pub per_source_cdf: Vec<Vec<Summary>>,
}

/// `runs` independent runs on streams `0..runs` of `config.seed`, in parallel.
pub fn replicate(config: &SimConfig, runs: usize) -> Result<Replication> {
    if runs == 0 {
        return Err(Error::InvalidArgument("at least one run is required".into()));
    }
    let results = (0..runs as u64).into_par_iter().map(|r| run(config, r, None)).collect::<Result<Vec<_>>>()?;
    let n = config.params.n();
    let per_source_mean =
        (0..n).map(|s| Summary::of(&results.iter().map(|r| r.per_source_mean[s]).collect::<Vec<_>>())).collect();
    let mean_aoi = Summary::of(&results.iter().map(SimResult::mean_aoi).collect::<Vec<_>>());
    let per_source_cdf = (0..n)
        .map(|s| {
            (0..config.cdf_grid.len())
                .map(|j| Summary::of(&results.iter().map(|r| r.per_source_cdf[s][j]).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    Ok(Replication { runs: results, per_source_mean, mean_aoi, per_source_cdf })
}
