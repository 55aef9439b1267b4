use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::spectra::root::bisect_increasing;

/// Optimal diagonal power allocation over channel eigenmodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterFilling {
    /// `max (1/T) sum log2(1 + gamma q_i lambda_i)` in bits per transmit antenna.
    pub capacity: f64,
    /// Per-mode powers `q_i >= 0` averaging to one.
    pub allocation: Vec<f64>,
    pub water_level: f64,
}

/// Classical water-filling under `(1/T) sum q_i = 1`, with `T` the number of
/// eigenvalues (zeros included). The water level is found by bisection.
pub fn waterfilling_capacity(eigenvalues: &[f64], gamma: f64) -> Result<WaterFilling> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(domain("gamma", gamma, "(0, inf)"));
    }
    if eigenvalues.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Dimension("eigenvalues must be finite and nonnegative".into()));
    }
    let t = eigenvalues.len() as f64;
    let floors: Vec<Option<f64>> = eigenvalues
        .iter()
        .map(|&x| (x > 0.0).then(|| 1.0 / (gamma * x)))
        .collect();
    let max_floor = floors.iter().flatten().fold(f64::NEG_INFINITY, |m, &f| m.max(f));
    if max_floor == f64::NEG_INFINITY {
        return Err(Error::Dimension("water-filling needs a positive eigenvalue".into()));
    }
    let poured = |mu: f64| -> f64 { floors.iter().flatten().map(|f| (mu - f).max(0.0)).sum() };
    // poured(max_floor + t) >= t, poured(0) = 0
    let mu = bisect_increasing(poured, t, 0.0, max_floor + t);
    let raw: Vec<f64> = floors
        .iter()
        .map(|f| f.map_or(0.0, |f| (mu - f).max(0.0)))
        .collect();
    let total: f64 = raw.iter().sum();
    let allocation: Vec<f64> = raw.iter().map(|q| q * t / total).collect();
    let capacity = eigenvalues
        .iter()
        .zip(&allocation)
        .map(|(&x, &q)| (gamma * q * x).ln_1p())
        .sum::<f64>()
        / t
        / std::f64::consts::LN_2;
    Ok(WaterFilling {
        capacity,
        allocation,
        water_level: mu,
    })
}
