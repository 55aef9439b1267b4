//! Mutual information of MIMO channels and its high-SNR split into the
//! multiplexing rate and a vanishing remainder.
//!
//! For a channel `H` with `T` transmit antennas and SNR `gamma`, the mutual
//! information per transmit antenna is `I = ∫ log2(1 + gamma x) dP(x)` over the
//! eigenvalue distribution of `H^H H`. Restricting to the nonzero eigenvalues
//! (mass `alpha`) gives
//!
//! ```text
//! I = alpha ∫ log2(gamma x) dP~(x)  +  alpha ∫ log2(1 + 1/(gamma x)) dP~(x)
//!     `------ multiplexing rate ---'    `---------- delta -------------'
//! ```
//!
//! and the second term vanishes as `gamma -> inf`.

mod channel;
mod waterfill;

pub use channel::{ChannelMatrix, Gram};
pub use waterfill::{waterfilling_capacity, WaterFilling};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::spectra::quadrature::{self, Singularity};
use crate::spectra::{bits, h2, EmpiricalSpectrum, SpectralFamily, SpectralMeasure};

/// `I = I0 + delta` at a given SNR, all in bits per transmit antenna.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoDecomposition {
    pub mutual_info: f64,
    pub multiplexing_rate: f64,
    pub delta: f64,
    pub snr: f64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(domain("gamma", gamma, "(0, inf)"))
    }
}

/// Measures whose mutual information can be evaluated at finite SNR.
pub trait MutualInformation {
    /// `∫ log2(1 + gamma x) dP(x)` in bits per transmit antenna.
    fn mutual_info(&self, gamma: f64) -> Result<f64>;
}

impl MutualInformation for EmpiricalSpectrum {
    fn mutual_info(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma)?;
        Ok(bits(self.average(|x| (gamma * x).ln_1p())))
    }
}

impl MutualInformation for SpectralFamily {
    /// Integrates `dI/dg = (1 - eta(g)) / (g ln 2)` from 0, with `eta` obtained
    /// from the closed-form S-transform.
    fn mutual_info(&self, gamma: f64) -> Result<f64> {
        mutual_info_via_eta(self, gamma)
    }
}

/// `I(gamma) = (1/ln 2) ∫_0^gamma (1 - eta(s)) / s ds`, valid for any measure.
/// Uses `1 - eta(s) = -Psi(-s)`; the upper part is integrated in `ln s`.
pub fn mutual_info_via_eta<M: SpectralMeasure + ?Sized>(measure: &M, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let minus_psi = |s: f64| -> f64 { measure.psi(-s).map_or(f64::NAN, |v| -v) };
    let split = gamma.min(1.0);
    let low = quadrature::integrate(|s| minus_psi(s) / s, 0.0, split, Singularity::None)?;
    let high = if gamma > 1.0 {
        quadrature::integrate(|v: f64| minus_psi(v.exp()), 0.0, gamma.ln(), Singularity::None)?
    } else {
        0.0
    };
    Ok(bits(low + high))
}

/// Mutual information of a spectrum or family, per transmit antenna.
pub fn mutual_info_measure<M: MutualInformation + ?Sized>(measure: &M, gamma: f64) -> Result<f64> {
    measure.mutual_info(gamma)
}

/// Splits the mutual information of a finite spectrum into multiplexing rate
/// and remainder.
pub fn decompose(spectrum: &EmpiricalSpectrum, gamma: f64) -> Result<InfoDecomposition> {
    check_gamma(gamma)?;
    let t = spectrum.total_dim() as f64;
    let nz = spectrum.nonzero();
    let multiplexing_rate = bits(nz.iter().map(|&x| (gamma * x).ln()).sum::<f64>() / t);
    let delta = bits(nz.iter().map(|&x| (1.0 / (gamma * x)).ln_1p()).sum::<f64>() / t);
    let mutual_info = spectrum.mutual_info(gamma)?;
    Ok(InfoDecomposition {
        mutual_info,
        multiplexing_rate,
        delta,
        snr: gamma,
    })
}

/// `(1/T) log2 det(I + gamma H^H H)` via Cholesky of the smaller Gram matrix.
pub fn mutual_info_finite(h: &ChannelMatrix, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let logdet = h.small_gram().log_det_shifted(gamma)?;
    Ok(bits(logdet) / h.cols() as f64)
}

/// `(1/T) sum_{lambda > tol} log2(gamma lambda)` over the eigenvalues of `H^H H`.
///
/// When the smaller Gram matrix provably has all eigenvalues above the rank
/// tolerance, this is `(1/T)(k log2 gamma + log2 det G)` from a Cholesky
/// factor; otherwise the eigenvalues are computed.
pub fn multiplexing_rate_finite(h: &ChannelMatrix, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let g = h.small_gram();
    let k = g.dim() as f64;
    let t = h.cols() as f64;
    // trace >= lambda_max, so this bounds the default zero tolerance from above
    let tol_bound = g.trace() * t * 2f64.powi(-40);
    if let Some(logdet) = g.log_det_if_above(tol_bound) {
        return Ok((k * gamma.log2() + bits(logdet)) / t);
    }
    Ok(decompose(&h.gram_spectrum()?, gamma)?.multiplexing_rate)
}

/// Multiplexing rate of a limiting law:
/// `H(alpha) + alpha log2 gamma - ∫_0^alpha log2 S(-z) dz`.
pub fn multiplexing_rate_s(family: &SpectralFamily, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let alpha = family.rank_measure();
    let integral = quadrature::integrate(
        |z| family.s_transform(-z).map_or(f64::NAN, f64::log2),
        0.0,
        alpha,
        Singularity::Right,
    )?;
    Ok(h2(alpha) + alpha * gamma.log2() - integral)
}

/// Multiplexing rate of the leading `beta` fraction of rows of a square
/// full-rank channel with Gram law `family`, per column of the channel:
/// `beta log2 gamma + ∫_0^beta log2 m(t) dt` with `m(t) = 1 / S(-t)`.
pub fn multiplexing_rate_harmonic(family: &SpectralFamily, beta: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(domain("beta", beta, "(0, 1]"));
    }
    let alpha = family.rank_measure();
    if alpha != 1.0 {
        return Err(domain("alpha", alpha, "{1} (full-rank law)"));
    }
    let integral = quadrature::integrate(
        |t| family.s_transform(-t).map_or(f64::NAN, |s| -s.log2()),
        0.0,
        beta,
        Singularity::Right,
    )?;
    Ok(beta * gamma.log2() + integral)
}
