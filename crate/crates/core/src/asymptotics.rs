//! Large-system, high-SNR closed forms.
//!
//! * **Binary entropy loss.** Dropping receive antennas of an `R x phi R`
//!   channel (`phi <= 1`) so that a fraction `beta >= phi` remains costs
//!   `H(phi)/phi - (beta/phi) H(phi/beta)` bits per transmit antenna,
//!   whatever the channel statistics, as long as `H H^H` is unitarily
//!   invariant and full rank.
//! * **Transmit-side loss.** For `phi >= 1`, dropping transmit antennas down
//!   to a fraction `beta >= 1/phi` costs `H(1/phi) - beta H(1/(phi beta))`.
//! * **Deviation from linear growth.** For a square channel, the gap between
//!   the multiplexing rate of the leading `beta N x N` block and `beta` times
//!   that of the full channel,
//!   `-beta ∫_0^1 log2(S(-beta z) / S(-z)) dz`. It vanishes for unitary
//!   channels, equals `(beta - 1) log2(1 - beta)` for iid entries and is
//!   additive over free products.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::spectra::quadrature::{self, Singularity};
use crate::spectra::{h2, SpectralFamily, SpectralMeasure};

/// Which side of the link loses antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Receive,
    Transmit,
}

/// Antenna ratio `phi = T/R` and retained fraction `beta` for a loss query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossQuery {
    pub phi: f64,
    pub beta: f64,
    pub side: Side,
}

impl LossQuery {
    pub fn receive(phi: f64, beta: f64) -> Result<Self> {
        check_receive(phi, beta)?;
        Ok(Self {
            phi,
            beta,
            side: Side::Receive,
        })
    }

    pub fn transmit(phi: f64, beta: f64) -> Result<Self> {
        check_transmit(phi, beta)?;
        Ok(Self {
            phi,
            beta,
            side: Side::Transmit,
        })
    }

    /// The closed-form loss for this query.
    pub fn loss(&self) -> Result<f64> {
        match self.side {
            Side::Receive => binary_entropy_loss(self.phi, self.beta),
            Side::Transmit => transmit_side_loss(self.phi, self.beta),
        }
    }
}

/// A square full-rank Gram law and the retained row fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationQuery {
    pub family: SpectralFamily,
    pub beta: f64,
}

impl DeviationQuery {
    pub fn new(family: SpectralFamily, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let alpha = family.rank_measure();
        if alpha != 1.0 {
            return Err(domain("alpha", alpha, "{1} (full-rank law)"));
        }
        Ok(Self { family, beta })
    }
}

fn check_receive(phi: f64, beta: f64) -> Result<()> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(domain("phi", phi, "(0, 1]"));
    }
    if !(beta >= phi && beta <= 1.0) {
        return Err(domain("beta", beta, "[phi, 1]"));
    }
    Ok(())
}

fn check_transmit(phi: f64, beta: f64) -> Result<()> {
    if !(phi >= 1.0 && phi.is_finite()) {
        return Err(domain("phi", phi, "[1, inf)"));
    }
    if !(beta >= 1.0 / phi && beta <= 1.0) {
        return Err(domain("beta", beta, "[1/phi, 1]"));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(domain("beta", beta, "(0, 1]"))
    }
}

/// High-SNR mutual information loss per transmit antenna from keeping only a
/// fraction `beta` of the receive antennas, `0 < phi <= beta <= 1`.
pub fn binary_entropy_loss(phi: f64, beta: f64) -> Result<f64> {
    check_receive(phi, beta)?;
    if beta == 1.0 {
        return Ok(0.0);
    }
    Ok(h2(phi) / phi - beta / phi * h2(phi / beta))
}

/// Loss per receive antenna when an `R x phi R` channel is cut down to a square one.
pub fn square_system_loss(phi: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(domain("phi", phi, "(0, 1)"));
    }
    Ok(h2(phi))
}

/// High-SNR loss per transmit antenna of the reference system from keeping a
/// fraction `beta` of the transmit antennas, `phi >= 1`, `1/phi <= beta <= 1`.
pub fn transmit_side_loss(phi: f64, beta: f64) -> Result<f64> {
    check_transmit(phi, beta)?;
    if beta == 1.0 {
        return Ok(0.0);
    }
    Ok(h2(1.0 / phi) - beta * h2(1.0 / (phi * beta)))
}

/// `-beta ∫_0^1 log2(S(-beta z) / S(-z)) dz` for a full-rank law.
pub fn deviation_from_linear(query: &DeviationQuery) -> Result<f64> {
    let DeviationQuery { family, beta } = query;
    let beta = *beta;
    check_beta(beta)?;
    if beta == 1.0 {
        return Ok(0.0);
    }
    let integral = quadrature::integrate(
        |z| match (family.s_transform(-beta * z), family.s_transform(-z)) {
            (Ok(num), Ok(den)) => (num / den).log2(),
            _ => f64::NAN,
        },
        0.0,
        1.0,
        Singularity::Right,
    )?;
    Ok(-beta * integral)
}

/// Deviation from linear growth for iid entries, `(beta - 1) log2(1 - beta)`.
pub fn deviation_iid(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if beta == 1.0 {
        return Ok(0.0);
    }
    Ok((beta - 1.0) * (1.0 - beta).log2())
}

/// Deviation for a product of `m` independent square iid factors.
pub fn deviation_product_iid(m: usize, beta: f64) -> Result<f64> {
    if m == 0 {
        return Err(domain("m", 0.0, "{1, 2, ...}"));
    }
    Ok(m as f64 * deviation_iid(beta)?)
}

/// Deviation of the free product `f g` next to the sum of the individual
/// deviations, returned as `(lhs, rhs)`.
pub fn deviation_additivity_check(f: &SpectralFamily, g: &SpectralFamily, beta: f64) -> Result<(f64, f64)> {
    let product = SpectralFamily::free_product(vec![f.clone(), g.clone()])?;
    let lhs = deviation_from_linear(&DeviationQuery::new(product, beta)?)?;
    let rhs = deviation_from_linear(&DeviationQuery::new(f.clone(), beta)?)?
        + deviation_from_linear(&DeviationQuery::new(g.clone(), beta)?)?;
    Ok((lhs, rhs))
}

/// Mapping from a retained fraction to the receive-side loss, exposed for the
/// S-integral cross-check: `∫_0^1 log2((1 - phi z)/(beta - phi z)) dz`.
pub fn binary_entropy_loss_integral(phi: f64, beta: f64) -> Result<f64> {
    check_receive(phi, beta)?;
    if beta == 1.0 {
        return Ok(0.0);
    }
    // singular at z = beta/phi only when beta = phi
    let singular = if beta == phi {
        Singularity::Right
    } else {
        Singularity::None
    };
    quadrature::integrate(
        |z| ((1.0 - phi * z) / (beta - phi * z)).log2(),
        0.0,
        1.0,
        singular,
    )
}
