//! Finite random channels and ergodic averages over them.
//!
//! # Seeding
//!
//! Every estimator takes a 64-bit `master_seed`. Trial `i` (counting from 0)
//! draws its matrix from its own generator, so results do not depend on how
//! trials are scheduled across threads:
//!
//! ```text
//! x    = master_seed + (i + 1) * 0x9E3779B97F4A7C15      (wrapping u64 arithmetic)
//! x    = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
//! x    = (x ^ (x >> 27)) * 0x94D049BB133111EB
//! seed = x ^ (x >> 31)
//! rng  = ChaCha8Rng::seed_from_u64(seed)
//! ```
//!
//! which is the SplitMix64 output for counter `i + 1`. Within a trial the
//! generator fills matrices column by column, with the real part of a
//! complex matrix drawn in full before its imaginary part, and product
//! factors drawn left to right.

mod ergodic;

pub use ergodic::{
    ergodic_deviation, ergodic_loss, ergodic_map, ergodic_multiplexing_rate, ergodic_mutual_info,
    ergodic_vector, paired_deviation, paired_loss, ErgodicEstimate, THREADS_ENV,
};

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::asymptotics::Side;
use crate::error::{domain, Error, Result};
use crate::infotheory::ChannelMatrix;
use crate::spectra::EmpiricalSpectrum;

/// Entry distribution of a sampled channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EnsembleKind {
    IidComplexGaussian,
    IidRealGaussian,
    HaarUnitary,
    /// Product of `m` independent square iid complex Gaussian factors.
    ProductIid { m: usize },
}

/// Recipe for a random `rows x cols` channel.
///
/// Iid entries have variance `variance / rows`; each factor of a product has
/// variance `variance / n`. Complex entries split the variance evenly between
/// real and imaginary parts. A Haar draw is scaled by `sqrt(variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub rows: usize,
    pub cols: usize,
    pub variance: f64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, rows: usize, cols: usize, variance: f64) -> Result<Self> {
        let spec = Self {
            kind,
            rows,
            cols,
            variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn iid_complex(rows: usize, cols: usize) -> Result<Self> {
        Self::new(EnsembleKind::IidComplexGaussian, rows, cols, 1.0)
    }

    pub fn iid_real(rows: usize, cols: usize) -> Result<Self> {
        Self::new(EnsembleKind::IidRealGaussian, rows, cols, 1.0)
    }

    pub fn haar(n: usize) -> Result<Self> {
        Self::new(EnsembleKind::HaarUnitary, n, n, 1.0)
    }

    pub fn product(m: usize, n: usize) -> Result<Self> {
        Self::new(EnsembleKind::ProductIid { m }, n, n, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Dimension(format!("{}x{} ensemble", self.rows, self.cols)));
        }
        if !(self.variance >= 0.0 && self.variance.is_finite()) {
            return Err(domain("variance", self.variance, "[0, inf)"));
        }
        match self.kind {
            EnsembleKind::HaarUnitary if self.rows != self.cols => Err(Error::Dimension(format!(
                "haar_unitary needs a square shape, got {}x{}",
                self.rows, self.cols
            ))),
            EnsembleKind::ProductIid { m } if m == 0 => Err(Error::Dimension("product of zero factors".into())),
            EnsembleKind::ProductIid { .. } if self.rows != self.cols => Err(Error::Dimension(format!(
                "product_iid needs a square shape, got {}x{}",
                self.rows, self.cols
            ))),
            _ => Ok(()),
        }
    }
}

/// Leading-block antenna selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    pub side: Side,
    pub beta: f64,
}

impl ProjectorSpec {
    pub fn new(side: Side, beta: f64) -> Result<Self> {
        let p = Self { side, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn receive(beta: f64) -> Result<Self> {
        Self::new(Side::Receive, beta)
    }

    pub fn transmit(beta: f64) -> Result<Self> {
        Self::new(Side::Transmit, beta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta > 0.0 && self.beta <= 1.0 {
            Ok(())
        } else {
            Err(domain("beta", self.beta, "(0, 1]"))
        }
    }

    /// `floor(beta * dim + 1/2)`, at least 1.
    pub fn kept(&self, dim: usize) -> usize {
        ((self.beta * dim as f64 + 0.5).floor() as usize).clamp(1, dim.max(1))
    }
}

/// Per-trial seed, see the module documentation.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    let mut x = master_seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, sd: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| sd * rng.sample::<f64, _>(StandardNormal))
}

fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, variance: f64) -> Result<ChannelMatrix> {
    let sd = (variance / 2.0).sqrt();
    let re = gaussian(rng, rows, cols, sd);
    let im = gaussian(rng, rows, cols, sd);
    ChannelMatrix::complex(re, im)
}

fn haar_unitary(rng: &mut ChaCha8Rng, n: usize) -> Result<DMatrix<Complex<f64>>> {
    let sd = 0.5f64.sqrt();
    let re = gaussian(rng, n, n, sd);
    let im = gaussian(rng, n, n, sd);
    let qr = re.zip_map(&im, Complex::new).qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        let norm = d.norm();
        if norm == 0.0 {
            return Err(Error::Factorization("singular Gaussian draw in QR".into()));
        }
        col *= d / norm;
    }
    Ok(q)
}

/// Draws one channel from `spec` using the generator seeded by `seed`.
pub fn sample_matrix(spec: &EnsembleSpec, seed: u64) -> Result<ChannelMatrix> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (r, t, v) = (spec.rows, spec.cols, spec.variance);
    match spec.kind {
        EnsembleKind::IidComplexGaussian => complex_gaussian(&mut rng, r, t, v / r as f64),
        EnsembleKind::IidRealGaussian => ChannelMatrix::real(gaussian(&mut rng, r, t, (v / r as f64).sqrt())),
        EnsembleKind::HaarUnitary => Ok(ChannelMatrix::from_complex(&haar_unitary(&mut rng, r)?)?.scale(v.sqrt())),
        EnsembleKind::ProductIid { m } => {
            let mut h = complex_gaussian(&mut rng, r, r, v / r as f64)?;
            for _ in 1..m {
                let next = complex_gaussian(&mut rng, r, r, v / r as f64)?;
                h = h.mul(&next)?;
            }
            Ok(h)
        }
    }
}

/// Keeps the leading rows (receive side) or columns (transmit side).
pub fn apply_projector(h: &ChannelMatrix, proj: &ProjectorSpec) -> Result<ChannelMatrix> {
    proj.validate()?;
    match proj.side {
        Side::Receive => h.leading_rows(proj.kept(h.rows())),
        Side::Transmit => h.leading_cols(proj.kept(h.cols())),
    }
}

/// Eigenvalues of `H^H H` for one draw, ascending.
pub fn empirical_spectrum(spec: &EnsembleSpec, seed: u64) -> Result<EmpiricalSpectrum> {
    sample_matrix(spec, seed)?.gram_spectrum()
}
