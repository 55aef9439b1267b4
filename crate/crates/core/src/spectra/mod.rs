//! Spectral measures and their free-probability transforms.
//!
//! Every measure lives on `[0, inf)` and is either an [`EmpiricalSpectrum`]
//! (the eigenvalues of a finite Gram matrix `X^H X`) or a [`SpectralFamily`]
//! (a limiting law with a closed-form S-transform). Both implement
//! [`SpectralMeasure`], which provides
//!
//! * `Psi(z) = ∫ zx / (1 - zx) dP(x)` for `z < 0`, with values in `(-alpha, 0]`;
//! * its inverse on `(-alpha, 0)`;
//! * the S-transform `S(z) = (z + 1) / z * Psi^{-1}(z)` on `(-alpha, 0)`;
//! * the eta-transform `eta(g) = ∫ 1 / (1 + g x) dP(x) = 1 + Psi(-g)`;
//! * the mean logarithm through `-∫_0^1 log2 S(-z) dz`.
//!
//! `alpha` is the rank measure: the mass of the measure away from zero.

mod empirical;
mod family;
pub mod quadrature;
pub(crate) mod root;

pub use empirical::EmpiricalSpectrum;
pub use family::SpectralFamily;

use std::f64::consts::LN_2;

use crate::error::{domain, Result};
use quadrature::Singularity;

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("p", p, "[0, 1]"));
    }
    Ok(h2(p))
}

pub(crate) fn h2(p: f64) -> f64 {
    fn plogp(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x * x.log2()
        }
    }
    -plogp(p) - plogp(1.0 - p)
}

/// Evaluates `∫_0^p log2((1 - z) / (p - z)) dz` by quadrature. The integral
/// equals `H(p)`; it is kept as a self-test of the singular quadrature path.
pub fn entropy_integral_check(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("p", p, "(0, 1)"));
    }
    quadrature::integrate(
        |z| ((1.0 - z) / (p - z)).log2(),
        0.0,
        p,
        Singularity::Right,
    )
}

/// A probability measure on `[0, inf)` seen through its transforms.
pub trait SpectralMeasure {
    /// Mass away from zero, `alpha = 1 - P({0})`.
    fn rank_measure(&self) -> f64;

    /// `Psi(z)` for `z < 0`.
    fn psi(&self, z: f64) -> Result<f64>;

    /// The unique `z < 0` with `Psi(z) = y`, for `y` in `(-alpha, 0)`.
    fn psi_inverse(&self, y: f64) -> Result<f64>;

    /// S-transform on `(-alpha, 0)`.
    fn s_transform(&self, z: f64) -> Result<f64> {
        check_s_domain(z, self.rank_measure())?;
        Ok((z + 1.0) / z * self.psi_inverse(z)?)
    }

    /// S-transform of the measure conditioned on `(0, inf)`, defined on `(-1, 0)`:
    /// `(z + 1) / (z + 1/alpha) * S(alpha z)`.
    fn restricted_s_transform(&self, z: f64) -> Result<f64> {
        let alpha = self.rank_measure();
        if alpha <= 0.0 {
            return Err(domain("alpha", alpha, "(0, 1]"));
        }
        check_s_domain(z, 1.0)?;
        if alpha == 1.0 {
            return self.s_transform(z);
        }
        Ok((z + 1.0) / (z + 1.0 / alpha) * self.s_transform(alpha * z)?)
    }

    /// `eta(gamma)` for `gamma > 0`.
    fn eta(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0) {
            return Err(domain("gamma", gamma, "(0, inf)"));
        }
        Ok(1.0 + self.psi(-gamma)?)
    }

    /// The `gamma > 0` with `eta(gamma) = t`, for `t` in `(1 - alpha, 1)`.
    fn eta_inverse(&self, t: f64) -> Result<f64> {
        let alpha = self.rank_measure();
        if !(t > 1.0 - alpha && t < 1.0) {
            return Err(domain("t", t, "(1 - alpha, 1)"));
        }
        Ok(-self.psi_inverse(t - 1.0)?)
    }

    /// Mean of `log2 x` over the nonzero part of the measure, computed as
    /// `-∫_0^1 log2 S~(-z) dz` where `S~` is the restricted S-transform.
    fn log_mean(&self) -> Result<f64> {
        let alpha = self.rank_measure();
        if alpha <= 0.0 {
            return Err(domain("alpha", alpha, "(0, 1]"));
        }
        let integral = quadrature::integrate(
            |z| match self.restricted_s_transform(-z) {
                Ok(s) => s.log2(),
                Err(_) => f64::NAN,
            },
            0.0,
            1.0,
            Singularity::Right,
        )?;
        Ok(-integral)
    }
}

/// Harmonic mean measure `m(t) = 1 / S(-t)` of a full-rank law, `0 < t < 1`.
pub fn harmonic_mean_measure<M: SpectralMeasure + ?Sized>(measure: &M, t: f64) -> Result<f64> {
    Ok(1.0 / measure.s_transform(-t)?)
}

pub(crate) fn check_s_domain(z: f64, alpha: f64) -> Result<()> {
    if z > -alpha && z < 0.0 {
        Ok(())
    } else {
        Err(domain("z", z, "(-alpha, 0)"))
    }
}

pub(crate) fn check_psi_domain(z: f64) -> Result<()> {
    if z < 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(domain("z", z, "(-inf, 0)"))
    }
}

/// Natural-log to bits.
pub(crate) fn bits(nats: f64) -> f64 {
    nats / LN_2
}
