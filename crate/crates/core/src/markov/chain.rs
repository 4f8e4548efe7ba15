//! Seeded simulation of the chain and empirical checks of its conditional
//! moments.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{build_distribution, ConditionalDistribution, MassPolicy};
use crate::error::{Error, Result};
use crate::qcore::{q_hermite, QParams};
use crate::scalar::RealScalar;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_STATE_BOUND: f64 = 1e12;

/// Draws one atom by inverse CDF over the atoms in index order.
/// Returns `(index, value)`.
pub fn sample_step<T: RealScalar, R: Rng + ?Sized>(
    dist: &ConditionalDistribution<T>,
    rng: &mut R,
) -> Result<(i64, T)> {
    if let Some(&(index, value)) = dist.negative_atoms().first() {
        return Err(Error::NegativeMass { index, value });
    }
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut last_positive = None;
    for (&k, atom) in dist.atoms() {
        let mass = atom.mass.to_f64().max(0.0);
        if mass > 0.0 {
            last_positive = Some((k, atom));
        }
        cumulative += mass;
        if u < cumulative {
            return Ok((k, atom.value.clone()));
        }
    }
    // Rounding left the total slightly below u.
    last_positive
        .map(|(k, atom)| (k, atom.value.clone()))
        .ok_or_else(|| Error::Domain("distribution has no positive mass".into()))
}

/// The law of the next state given the current one.
pub trait TransitionKernel<T> {
    fn order(&self) -> usize;
    fn kernel(&self, y: &T) -> Result<ConditionalDistribution<T>>;
}

/// `y -> Lambda(m, y, q)`, built in strict mode.
#[derive(Clone, Debug)]
pub struct BrycKernel<T> {
    pub m: usize,
    pub params: QParams<T>,
}

impl<T: RealScalar> TransitionKernel<T> for BrycKernel<T> {
    fn order(&self) -> usize {
        self.m
    }

    fn kernel(&self, y: &T) -> Result<ConditionalDistribution<T>> {
        build_distribution(self.m, y, &self.params, MassPolicy::Strict)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig<T> {
    pub q: T,
    pub m: usize,
    pub initial_y: T,
    pub steps: usize,
    pub seed: u64,
    /// Simulation stops with [`Error::StateBoundExceeded`] past this magnitude.
    pub state_bound: f64,
}

impl<T: RealScalar> ChainConfig<T> {
    pub fn new(q: T, m: usize, initial_y: T, steps: usize) -> Self {
        ChainConfig {
            q,
            m,
            initial_y,
            steps,
            seed: DEFAULT_SEED,
            state_bound: DEFAULT_STATE_BOUND,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.state_bound = bound;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.q <= T::one() {
            return Err(Error::Domain(format!("q = {} must exceed 1", self.q)));
        }
        if self.m < 2 {
            return Err(Error::Domain(format!("kernel order m = {} must be at least 2", self.m)));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<QParams<T>> {
        QParams::new(self.q.clone())
    }

    /// `q^(-(m-1)/2)`.
    pub fn rho(&self) -> Result<T> {
        Ok(self.params()?.rho(self.m))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    /// `steps + 1` states, starting with `initial_y`.
    pub states: Vec<T>,
    /// The atom index chosen at each step.
    pub jumps: Vec<i64>,
    pub config: ChainConfig<T>,
}

pub fn simulate<T: RealScalar>(config: &ChainConfig<T>) -> Result<Trajectory<T>> {
    config.validate()?;
    let kernel = BrycKernel {
        m: config.m,
        params: config.params()?,
    };
    simulate_with(&kernel, config)
}

pub fn simulate_with<T: RealScalar, K: TransitionKernel<T> + ?Sized>(
    kernel: &K,
    config: &ChainConfig<T>,
) -> Result<Trajectory<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut states = Vec::with_capacity(config.steps + 1);
    let mut jumps = Vec::with_capacity(config.steps);
    states.push(config.initial_y.clone());
    for step in 1..=config.steps {
        let dist = kernel.kernel(&states[step - 1])?;
        let (k, next) = sample_step(&dist, &mut rng)?;
        let size = next.magnitude();
        if !(size <= config.state_bound) {
            return Err(Error::StateBoundExceeded {
                step,
                value: size,
                bound: config.state_bound,
            });
        }
        jumps.push(k);
        states.push(next);
    }
    Ok(Trajectory {
        states,
        jumps,
        config: config.clone(),
    })
}

/// `count` independent trajectories with seeds `seed, seed + 1, ...`.
pub fn simulate_batch<T: RealScalar>(config: &ChainConfig<T>, count: usize) -> Result<Vec<Trajectory<T>>> {
    config.validate()?;
    let kernel = BrycKernel {
        m: config.m,
        params: config.params()?,
    };
    (0..count as u64)
        .into_par_iter()
        .map(|i| simulate_with(&kernel, &config.clone().with_seed(config.seed.wrapping_add(i))))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentGroup {
    pub source: String,
    pub count: usize,
    pub mean: f64,
    pub expected: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub j: usize,
    pub lag: usize,
    pub transitions: usize,
    pub groups: Vec<MomentGroup>,
    /// Transitions whose source state was seen only once.
    pub ungrouped: usize,
}

impl MomentReport {
    pub fn max_abs_z(&self) -> f64 {
        self.groups.iter().map(|g| g.z.abs()).fold(0.0, f64::max)
    }

    pub fn group(&self, source: &str) -> Option<&MomentGroup> {
        self.groups.iter().find(|g| g.source == source)
    }
}

/// Compares the mean of `H_j(X_{n+lag})` given `X_n` against
/// `rho^(lag*j) H_j(X_n)`, pooling every transition in the batch.
pub fn empirical_conditional_moment<T: RealScalar>(
    trajectories: &[Trajectory<T>],
    j: usize,
    lag: usize,
) -> Result<MomentReport> {
    let config = &trajectories
        .first()
        .ok_or_else(|| Error::InsufficientSamples("no trajectories".into()))?
        .config;
    if j < 1 || j >= config.m {
        return Err(Error::Domain(format!(
            "moment order j = {j} outside 1..{} for m = {}",
            config.m - 1,
            config.m
        )));
    }
    let params = config.params()?;
    let decay = params.rho(config.m).powi((lag * j) as i64);
    empirical_moment_against(trajectories, j, lag, |source| {
        Ok((decay.clone() * q_hermite(j, source, params.q())?).to_f64())
    })
}

/// Groups transitions `X_n -> X_{n+lag}` by source state (exact match of
/// the stored value) and compares the mean of `H_j(X_{n+lag})` in each group
/// with `expected(source)`. Groups of a single transition carry no spread
/// estimate and are counted in `ungrouped`.
pub fn empirical_moment_against<T: RealScalar>(
    trajectories: &[Trajectory<T>],
    j: usize,
    lag: usize,
    expected: impl Fn(&T) -> Result<f64>,
) -> Result<MomentReport> {
    if lag == 0 {
        return Err(Error::Domain("lag must be at least 1".into()));
    }
    struct Acc<T> {
        source: T,
        values: Vec<f64>,
    }
    let mut groups: BTreeMap<String, Acc<T>> = BTreeMap::new();
    let mut transitions = 0;
    for traj in trajectories {
        let q = &traj.config.q;
        for (src, dst) in traj.states.iter().zip(traj.states.iter().skip(lag)) {
            let value = q_hermite(j, dst, q)?.to_f64();
            groups
                .entry(src.to_string())
                .or_insert_with(|| Acc {
                    source: src.clone(),
                    values: Vec::new(),
                })
                .values
                .push(value);
            transitions += 1;
        }
    }
    if transitions == 0 {
        return Err(Error::InsufficientSamples(format!(
            "no transitions at lag {lag}"
        )));
    }

    let mut report = MomentReport {
        j,
        lag,
        transitions,
        groups: Vec::new(),
        ungrouped: 0,
    };
    for (key, acc) in groups {
        let count = acc.values.len();
        if count < 2 {
            report.ungrouped += count;
            continue;
        }
        let n = count as f64;
        // Shifted by the first value so a constant group has mean and
        // variance exactly equal to that value and zero.
        let shift = acc.values[0];
        let offset = acc.values.iter().map(|v| v - shift).sum::<f64>() / n;
        let mean = shift + offset;
        let var = acc
            .values
            .iter()
            .map(|v| (v - shift - offset).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        let std_error = (var / n).sqrt();
        let target = expected(&acc.source)?;
        let diff = mean - target;
        let z = if std_error > 0.0 {
            diff / std_error
        } else if diff.abs() <= 1e-12 * target.abs().max(1.0) {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        report.groups.push(MomentGroup {
            source: key,
            count,
            mean,
            expected: target,
            std_error,
            z,
        });
    }
    if report.groups.is_empty() {
        return Err(Error::InsufficientSamples(format!(
            "{transitions} transitions, no source state seen twice"
        )));
    }
    Ok(report)
}
