//! Event-driven Monte Carlo simulation of the deposition/evaporation
//! process: each empty cell fills at rate `alpha`, each filled cell empties
//! at rate `beta`.
//!
//! With `m` of `n` cells filled the total event rate is
//! `R = (n-m) alpha + m beta`; waits are exponential in `R` and the event
//! is a fill with probability `(n-m) alpha / R`. Trials use independent
//! streams keyed by `(seed, trial_index)`, and aggregation is pure integer
//! counting, so results are bit-identical for any worker count or
//! execution order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::Rational;
use crate::matrices::ModelParams;
use crate::Error;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 stream keyed by `(seed, trial)`. The stream for a trial is a
/// pure function of the key, independent of how trials are scheduled; this
/// is the determinism contract the golden tests pin down.
#[derive(Debug, Clone)]
pub struct TrialRng {
    state: u64,
}

impl TrialRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self {
            state: mix64(seed ^ mix64(trial.wrapping_mul(GOLDEN).wrapping_add(GOLDEN))),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` by widening multiply.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Exponential waiting time with the given rate; `1 - u` keeps the
    /// logarithm away from zero.
    pub fn exp_variate(&mut self, rate: f64) -> f64 {
        -(1.0 - self.next_f64()).ln() / rate
    }
}

/// How the process state is represented during simulation. Both modes
/// realize the same birth-death law on the occupancy count (cells are
/// exchangeable and non-interacting); per-cell mode additionally picks
/// which cell each event touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateMode {
    #[default]
    CountBased,
    PerCell,
}

/// Initial occupancy law sampled per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// Exactly `filled` cells occupied at `t = 0`.
    Fixed { filled: usize },
    /// Each cell independently occupied with probability `p`.
    Bernoulli { p: Rational },
    /// Each cell occupied with the stationary probability
    /// `alpha / (alpha + beta)`.
    Equilibrium,
}

impl InitialCondition {
    pub fn empty() -> Self {
        Self::Fixed { filled: 0 }
    }

    fn validate(&self, params: &ModelParams) -> Result<(), Error> {
        match self {
            Self::Fixed { filled } if *filled > params.n() => Err(Error::InvalidParams(format!(
                "initial occupancy {} exceeds n = {}",
                filled,
                params.n()
            ))),
            Self::Bernoulli { p } if p.is_negative() || *p > Rational::one() => Err(
                Error::InvalidParams(format!("Bernoulli probability {p} outside [0, 1]")),
            ),
            _ => Ok(()),
        }
    }

    /// Occupancy count at `t = 0`; assumes `validate` passed.
    fn sample(&self, params: &ModelParams, rng: &mut TrialRng) -> usize {
        let flip_all =
            |p: f64, rng: &mut TrialRng| (0..params.n()).filter(|_| rng.next_f64() < p).count();
        match self {
            Self::Fixed { filled } => *filled,
            Self::Bernoulli { p } => flip_all(p.to_f64(), rng),
            Self::Equilibrium => flip_all(params.p_eq().to_f64(), rng),
        }
    }
}

/// Simulation batch description, also accepted as a JSON document:
/// `{n, alpha, beta, trials, seed, t_grid, state_mode?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSimConfig", into = "RawSimConfig")]
pub struct SimConfig {
    params: ModelParams,
    trials: u64,
    seed: u64,
    t_grid: Vec<f64>,
    state_mode: StateMode,
}

#[derive(Serialize, Deserialize)]
struct RawSimConfig {
    n: usize,
    alpha: Rational,
    beta: Rational,
    trials: u64,
    seed: u64,
    t_grid: Vec<f64>,
    #[serde(default)]
    state_mode: StateMode,
}

impl TryFrom<RawSimConfig> for SimConfig {
    type Error = Error;
    fn try_from(raw: RawSimConfig) -> Result<Self, Error> {
        SimConfig::new(
            ModelParams::new(raw.n, raw.alpha, raw.beta)?,
            raw.trials,
            raw.seed,
            raw.t_grid,
            raw.state_mode,
        )
    }
}

impl From<SimConfig> for RawSimConfig {
    fn from(c: SimConfig) -> Self {
        RawSimConfig {
            n: c.params.n(),
            alpha: c.params.alpha().clone(),
            beta: c.params.beta().clone(),
            trials: c.trials,
            seed: c.seed,
            t_grid: c.t_grid,
            state_mode: c.state_mode,
        }
    }
}

impl SimConfig {
    pub fn new(
        params: ModelParams,
        trials: u64,
        seed: u64,
        t_grid: Vec<f64>,
        state_mode: StateMode,
    ) -> Result<Self, Error> {
        if trials == 0 {
            return Err(Error::InvalidParams("trials must be >= 1".into()));
        }
        if t_grid.is_empty() {
            return Err(Error::InvalidParams("time grid must be nonempty".into()));
        }
        if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParams(
                "time grid entries must be finite and >= 0".into(),
            ));
        }
        if t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "time grid must be strictly ascending".into(),
            ));
        }
        Ok(Self {
            params,
            trials,
            seed,
            t_grid,
            state_mode,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn state_mode(&self) -> StateMode {
        self.state_mode
    }
}

/// One realization of the process: piecewise-constant occupancy, recorded
/// as `(event time, occupancy after the event)` with the initial state at
/// time zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    steps: Vec<(f64, usize)>,
    t_end: f64,
}

impl Trajectory {
    pub fn steps(&self) -> &[(f64, usize)] {
        &self.steps
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn final_occupancy(&self) -> usize {
        self.steps
            .last()
            .expect("trajectory has an initial state")
            .1
    }

    /// Occupancy at time `t` within `0..=t_end`.
    pub fn occupancy_at(&self, t: f64) -> usize {
        assert!(
            (0.0..=self.t_end).contains(&t),
            "query time {t} outside [0, {}]",
            self.t_end
        );
        let idx = self.steps.partition_point(|&(st, _)| st <= t);
        self.steps[idx - 1].1
    }
}

/// Simulates one trajectory up to `t_end`. A zero total rate (full lattice
/// with `beta = 0`) is absorbing and ends the event loop early.
pub fn run_trajectory(
    params: &ModelParams,
    rng: &mut TrialRng,
    t_end: f64,
    initial_filled: usize,
    mode: StateMode,
) -> Result<Trajectory, Error> {
    if initial_filled > params.n() {
        return Err(Error::InvalidParams(format!(
            "initial occupancy {} exceeds n = {}",
            initial_filled,
            params.n()
        )));
    }
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::InvalidParams(format!(
            "t_end must be finite and >= 0, got {t_end}"
        )));
    }
    Ok(simulate_path(params, rng, t_end, initial_filled, mode))
}

fn simulate_path(
    params: &ModelParams,
    rng: &mut TrialRng,
    t_end: f64,
    initial_filled: usize,
    mode: StateMode,
) -> Trajectory {
    let n = params.n();
    let alpha = params.alpha().to_f64();
    let beta = params.beta().to_f64();

    // per-cell mode tracks which cells are occupied; exchangeability makes
    // "first `m` cells" a valid initial layout for a count-only start
    let mut cells = match mode {
        StateMode::CountBased => Vec::new(),
        StateMode::PerCell => (0..n).map(|i| i < initial_filled).collect(),
    };

    let mut m = initial_filled;
    let mut t = 0.0;
    let mut steps = vec![(0.0, m)];
    loop {
        let fill_rate = (n - m) as f64 * alpha;
        let empty_rate = m as f64 * beta;
        let total = fill_rate + empty_rate;
        if total <= 0.0 {
            break;
        }
        t += rng.exp_variate(total);
        if t >= t_end {
            break;
        }
        let fills = rng.next_f64() * total < fill_rate;
        if mode == StateMode::PerCell {
            // choose the specific cell the event touches
            let pool = if fills { n - m } else { m };
            let pick = rng.next_below(pool as u64) as usize;
            let target = cells
                .iter()
                .enumerate()
                .filter(|(_, &filled)| filled != fills)
                .nth(pick)
                .expect("pool size matches occupancy count")
                .0;
            cells[target] = fills;
        }
        m = if fills { m + 1 } else { m - 1 };
        steps.push((t, m));
    }
    Trajectory { steps, t_end }
}

/// Occupancy histograms over the time grid, aggregated across trials.
///
/// JSON schema: `{n, trials, t_grid, counts}` with
/// `counts[i][k]` = number of trials at occupancy `k` at time `t_grid[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEmpirical", into = "RawEmpirical")]
pub struct EmpiricalDistribution {
    n: usize,
    trials: u64,
    t_grid: Vec<f64>,
    counts: Vec<Vec<u64>>,
}

#[derive(Serialize, Deserialize)]
struct RawEmpirical {
    n: usize,
    trials: u64,
    t_grid: Vec<f64>,
    counts: Vec<Vec<u64>>,
}

impl TryFrom<RawEmpirical> for EmpiricalDistribution {
    type Error = Error;
    fn try_from(raw: RawEmpirical) -> Result<Self, Error> {
        if raw.counts.len() != raw.t_grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} histogram rows for {} grid times",
                raw.counts.len(),
                raw.t_grid.len()
            )));
        }
        for (i, row) in raw.counts.iter().enumerate() {
            if row.len() != raw.n + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "histogram row {i} has {} bins, expected {}",
                    row.len(),
                    raw.n + 1
                )));
            }
            let total: u64 = row.iter().sum();
            if total != raw.trials {
                return Err(Error::InvalidParams(format!(
                    "histogram row {i} sums to {total}, expected {} trials",
                    raw.trials
                )));
            }
        }
        Ok(Self {
            n: raw.n,
            trials: raw.trials,
            t_grid: raw.t_grid,
            counts: raw.counts,
        })
    }
}

impl From<EmpiricalDistribution> for RawEmpirical {
    fn from(e: EmpiricalDistribution) -> Self {
        RawEmpirical {
            n: e.n,
            trials: e.trials,
            t_grid: e.t_grid,
            counts: e.counts,
        }
    }
}

impl EmpiricalDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn count(&self, time_idx: usize, k: usize) -> u64 {
        self.counts[time_idx][k]
    }

    pub fn freq(&self, time_idx: usize, k: usize) -> f64 {
        self.count(time_idx, k) as f64 / self.trials as f64
    }

    /// Binomial standard error `sqrt(f (1-f) / trials)` of one frequency.
    pub fn stderr(&self, time_idx: usize, k: usize) -> f64 {
        let f = self.freq(time_idx, k);
        (f * (1.0 - f) / self.trials as f64).sqrt()
    }

    /// Sample mean occupancy at one grid time.
    pub fn coverage_mean(&self, time_idx: usize) -> f64 {
        (0..=self.n)
            .map(|k| k as f64 * self.freq(time_idx, k))
            .sum()
    }

    /// Standard error of the mean occupancy (sample standard deviation
    /// over sqrt(trials)).
    pub fn coverage_stderr(&self, time_idx: usize) -> f64 {
        if self.trials < 2 {
            return f64::INFINITY;
        }
        let mean = self.coverage_mean(time_idx);
        let ss: f64 = (0..=self.n)
            .map(|k| {
                let d = k as f64 - mean;
                self.count(time_idx, k) as f64 * d * d
            })
            .sum();
        (ss / (self.trials - 1) as f64 / self.trials as f64).sqrt()
    }

    /// Total variation distance between the histogram at one grid time and
    /// a reference distribution.
    pub fn total_variation(&self, time_idx: usize, reference: &[f64]) -> f64 {
        assert_eq!(reference.len(), self.n + 1, "reference length mismatch");
        0.5 * (0..=self.n)
            .map(|k| (self.freq(time_idx, k) - reference[k]).abs())
            .sum::<f64>()
    }

    /// CSV rows `t,k,count,freq,stderr`, one per (grid time, occupancy).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,k,count,freq,stderr\n");
        for (i, t) in self.t_grid.iter().enumerate() {
            for k in 0..=self.n {
                out.push_str(&format!(
                    "{t},{k},{},{:.9},{:.9}\n",
                    self.count(i, k),
                    self.freq(i, k),
                    self.stderr(i, k)
                ));
            }
        }
        out
    }
}

/// Runs `config.trials` independent trajectories and histograms the
/// occupancy at every grid time. Trials run in parallel; per-trial streams
/// and integer aggregation keep the result identical for any worker count.
pub fn estimate_qk(
    config: &SimConfig,
    initial: &InitialCondition,
) -> Result<EmpiricalDistribution, Error> {
    initial.validate(config.params())?;
    let order = config.params().order();
    let grid = config.t_grid();
    let t_end = *grid.last().expect("grid validated nonempty");
    let blank = || vec![vec![0u64; order]; grid.len()];

    let counts = (0..config.trials())
        .into_par_iter()
        .fold(blank, |mut acc, trial| {
            let mut rng = TrialRng::new(config.seed(), trial);
            let m0 = initial.sample(config.params(), &mut rng);
            let path = simulate_path(config.params(), &mut rng, t_end, m0, config.state_mode());
            for (i, &t) in grid.iter().enumerate() {
                acc[i][path.occupancy_at(t)] += 1;
            }
            acc
        })
        .reduce(blank, |mut a, b| {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (ca, cb) in ra.iter_mut().zip(rb) {
                    *ca += cb;
                }
            }
            a
        });

    Ok(EmpiricalDistribution {
        n: config.params().n(),
        trials: config.trials(),
        t_grid: grid.to_vec(),
        counts,
    })
}

/// Mean occupancy with its standard error at one grid time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageEstimate {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Sample mean occupancy (with standard errors) over the time grid.
pub fn estimate_coverage(
    config: &SimConfig,
    initial: &InitialCondition,
) -> Result<Vec<CoverageEstimate>, Error> {
    let dist = estimate_qk(config, initial)?;
    Ok((0..dist.t_grid().len())
        .map(|i| CoverageEstimate {
            t: dist.t_grid()[i],
            mean: dist.coverage_mean(i),
            stderr: dist.coverage_stderr(i),
        })
        .collect())
}
