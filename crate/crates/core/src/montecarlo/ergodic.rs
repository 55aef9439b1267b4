use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use super::{apply_projector, sample_matrix, trial_seed, EnsembleSpec, ProjectorSpec};
use crate::asymptotics::Side;
use crate::error::{domain, Error, Result};
use crate::infotheory::{multiplexing_rate_finite, mutual_info_finite, ChannelMatrix};

/// Environment variable holding the worker thread count for trial loops.
/// Unset or `0` uses rayon's global pool.
pub const THREADS_ENV: &str = "MIMO_SCALING_THREADS";

/// Sample mean and its standard error over independent trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgodicEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub stderr: f64,
    pub trials: usize,
    pub master_seed: u64,
}

impl ErgodicEstimate {
    /// Summarizes per-trial values, summing in trial order.
    pub fn from_samples(samples: &[f64], master_seed: u64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(domain("trials", n as f64, "{2, 3, ...}"));
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Ok(Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            trials: n,
            master_seed,
        })
    }
}

fn pool() -> Option<&'static ThreadPool> {
    static POOL: OnceLock<Option<ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok()?;
        if threads == 0 {
            return None;
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()
    })
    .as_ref()
}

fn run_trials<T: Send>(trials: usize, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let work = || {
        (0..trials as u64)
            .into_par_iter()
            .map(|i| f(i).map_err(|e| Error::Trial { trial: i, source: Box::new(e) }))
            .collect::<Vec<_>>()
    };
    let results = match pool() {
        Some(p) => p.install(work),
        None => work(),
    };
    results.into_iter().collect()
}

fn check_trials(trials: usize) -> Result<()> {
    if trials >= 2 {
        Ok(())
    } else {
        Err(domain("trials", trials as f64, "{2, 3, ...}"))
    }
}

/// Averages `f(H)` over `trials` draws of `spec`. Trial `i` uses
/// `trial_seed(master_seed, i)`, so two calls with the same seed see the same
/// matrices.
pub fn ergodic_map<F>(spec: &EnsembleSpec, trials: usize, master_seed: u64, f: F) -> Result<ErgodicEstimate>
where
    F: Fn(&ChannelMatrix) -> Result<f64> + Sync,
{
    spec.validate()?;
    check_trials(trials)?;
    let samples = run_trials(trials, |i| f(&sample_matrix(spec, trial_seed(master_seed, i))?))?;
    ErgodicEstimate::from_samples(&samples, master_seed)
}

/// Like [`ergodic_map`] for a fixed number `k` of statistics per draw.
pub fn ergodic_vector<F>(
    spec: &EnsembleSpec,
    k: usize,
    trials: usize,
    master_seed: u64,
    f: F,
) -> Result<Vec<ErgodicEstimate>>
where
    F: Fn(&ChannelMatrix) -> Result<Vec<f64>> + Sync,
{
    spec.validate()?;
    check_trials(trials)?;
    let rows = run_trials(trials, |i| {
        let v = f(&sample_matrix(spec, trial_seed(master_seed, i))?)?;
        if v.len() != k {
            return Err(Error::Dimension(format!("expected {k} statistics, got {}", v.len())));
        }
        Ok(v)
    })?;
    (0..k)
        .map(|j| {
            let column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            ErgodicEstimate::from_samples(&column, master_seed)
        })
        .collect()
}

fn project(h: &ChannelMatrix, proj: Option<&ProjectorSpec>) -> Result<ChannelMatrix> {
    match proj {
        Some(p) => apply_projector(h, p),
        None => Ok(h.clone()),
    }
}

/// Ergodic `(1/T) log2 det(I + gamma H^H H)`, in bits per transmit antenna of
/// the (possibly projected) system.
pub fn ergodic_mutual_info(
    spec: &EnsembleSpec,
    proj: Option<&ProjectorSpec>,
    gamma: f64,
    trials: usize,
    master_seed: u64,
) -> Result<ErgodicEstimate> {
    ergodic_map(spec, trials, master_seed, |h| mutual_info_finite(&project(h, proj)?, gamma))
}

/// Ergodic multiplexing rate of the (possibly projected) system, per column.
pub fn ergodic_multiplexing_rate(
    spec: &EnsembleSpec,
    proj: Option<&ProjectorSpec>,
    gamma: f64,
    trials: usize,
    master_seed: u64,
) -> Result<ErgodicEstimate> {
    ergodic_map(spec, trials, master_seed, |h| multiplexing_rate_finite(&project(h, proj)?, gamma))
}

/// Per-draw mutual information loss from antenna selection, per transmit
/// antenna of the reference system.
///
/// Receive side: `I(H) - I(P H)`. Transmit side: `I(H) - b I(H P^H)` where
/// `b` is the fraction of transmit antennas kept.
pub fn paired_loss(h: &ChannelMatrix, proj: &ProjectorSpec, gamma: f64) -> Result<f64> {
    let reference = mutual_info_finite(h, gamma)?;
    let hp = apply_projector(h, proj)?;
    let projected = mutual_info_finite(&hp, gamma)?;
    Ok(match proj.side {
        Side::Receive => reference - projected,
        Side::Transmit => reference - hp.cols() as f64 / h.cols() as f64 * projected,
    })
}

/// Ergodic [`paired_loss`]: both terms of each trial use the same draw.
pub fn ergodic_loss(
    spec: &EnsembleSpec,
    proj: &ProjectorSpec,
    gamma: f64,
    trials: usize,
    master_seed: u64,
) -> Result<ErgodicEstimate> {
    proj.validate()?;
    ergodic_map(spec, trials, master_seed, |h| paired_loss(h, proj, gamma))
}

/// Deviation from linear growth of one draw of a square channel:
/// `I0(P H) - b I0(H)` with both rates per column and `b` the kept row fraction.
pub fn paired_deviation(h: &ChannelMatrix, beta: f64, gamma: f64) -> Result<f64> {
    let proj = ProjectorSpec::receive(beta)?;
    let ph = apply_projector(h, &proj)?;
    let b = ph.rows() as f64 / h.rows() as f64;
    Ok(multiplexing_rate_finite(&ph, gamma)? - b * multiplexing_rate_finite(h, gamma)?)
}

/// Ergodic [`paired_deviation`] for a square ensemble.
pub fn ergodic_deviation(
    spec: &EnsembleSpec,
    beta: f64,
    gamma: f64,
    trials: usize,
    master_seed: u64,
) -> Result<ErgodicEstimate> {
    if spec.rows != spec.cols {
        return Err(Error::Dimension(format!(
            "deviation needs a square ensemble, got {}x{}",
            spec.rows, spec.cols
        )));
    }
    ProjectorSpec::receive(beta)?;
    ergodic_map(spec, trials, master_seed, |h| paired_deviation(h, beta, gamma))
}
