use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::spectra::EmpiricalSpectrum;

/// An `R x T` channel matrix `H`, real or complex.
///
/// Complex matrices are stored as separate real and imaginary parts so that
/// products and Gram matrices run through real GEMM kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    re: DMatrix<f64>,
    im: Option<DMatrix<f64>>,
}

/// A Hermitian positive-semidefinite Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Gram {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex<f64>>),
}

impl ChannelMatrix {
    pub fn real(re: DMatrix<f64>) -> Result<Self> {
        Self::check(&re)?;
        Ok(Self { re, im: None })
    }

    pub fn complex(re: DMatrix<f64>, im: DMatrix<f64>) -> Result<Self> {
        Self::check(&re)?;
        Self::check(&im)?;
        if re.shape() != im.shape() {
            return Err(Error::Dimension(format!(
                "real part {:?} vs imaginary part {:?}",
                re.shape(),
                im.shape()
            )));
        }
        Ok(Self { re, im: Some(im) })
    }

    pub fn from_complex(m: &DMatrix<Complex<f64>>) -> Result<Self> {
        Self::complex(m.map(|c| c.re), m.map(|c| c.im))
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::real(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::real(DMatrix::identity(n, n))
    }

    fn check(m: &DMatrix<f64>) -> Result<()> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Dimension(format!("empty {}x{} matrix", m.nrows(), m.ncols())));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Factorization("non-finite channel entry".into()));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.re.nrows()
    }

    pub fn cols(&self) -> usize {
        self.re.ncols()
    }

    /// Antenna ratio `phi = T / R`.
    pub fn ratio(&self) -> f64 {
        self.cols() as f64 / self.rows() as f64
    }

    pub fn is_complex(&self) -> bool {
        self.im.is_some()
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> Option<&DMatrix<f64>> {
        self.im.as_ref()
    }

    pub fn to_complex(&self) -> DMatrix<Complex<f64>> {
        match &self.im {
            Some(im) => self.re.zip_map(im, Complex::new),
            None => self.re.map(|x| Complex::new(x, 0.0)),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<f64> {
        Complex::new(self.re[(i, j)], self.im.as_ref().map_or(0.0, |m| m[(i, j)]))
    }

    /// Leading `k` rows.
    pub fn leading_rows(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.rows() {
            return Err(Error::Dimension(format!("keep {k} of {} rows", self.rows())));
        }
        Ok(Self {
            re: self.re.rows(0, k).into_owned(),
            im: self.im.as_ref().map(|m| m.rows(0, k).into_owned()),
        })
    }

    /// Leading `k` columns.
    pub fn leading_cols(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.cols() {
            return Err(Error::Dimension(format!("keep {k} of {} columns", self.cols())));
        }
        Ok(Self {
            re: self.re.columns(0, k).into_owned(),
            im: self.im.as_ref().map(|m| m.columns(0, k).into_owned()),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            re: &self.re * c,
            im: self.im.as_ref().map(|m| m * c),
        }
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &ChannelMatrix) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        let (a, c) = (&self.re, &rhs.re);
        Ok(match (&self.im, &rhs.im) {
            (None, None) => Self { re: a * c, im: None },
            (Some(b), None) => Self { re: a * c, im: Some(b * c) },
            (None, Some(d)) => Self { re: a * c, im: Some(a * d) },
            (Some(b), Some(d)) => Self {
                re: a * c - b * d,
                im: Some(a * d + b * c),
            },
        })
    }

    /// `H^H H`, a `T x T` matrix.
    pub fn gram(&self) -> Gram {
        let a = &self.re;
        match &self.im {
            None => Gram::Real(a.tr_mul(a)),
            Some(b) => {
                let re = a.tr_mul(a) + b.tr_mul(b);
                let im = a.tr_mul(b) - b.tr_mul(a);
                Gram::Complex(re.zip_map(&im, Complex::new))
            }
        }
    }

    /// `H H^H`, an `R x R` matrix.
    pub fn outer_gram(&self) -> Gram {
        let at = self.re.transpose();
        match &self.im {
            None => Gram::Real(at.tr_mul(&at)),
            Some(b) => {
                let bt = b.transpose();
                let re = at.tr_mul(&at) + bt.tr_mul(&bt);
                let im = bt.tr_mul(&at) - at.tr_mul(&bt);
                Gram::Complex(re.zip_map(&im, Complex::new))
            }
        }
    }

    /// The smaller of the two Gram orientations. Both share their nonzero
    /// eigenvalues, so `det(I + g H^H H) = det(I + g H H^H)`.
    pub fn small_gram(&self) -> Gram {
        if self.cols() <= self.rows() {
            self.gram()
        } else {
            self.outer_gram()
        }
    }

    /// Eigenvalues of `H^H H` (length `T`), computed from the smaller Gram
    /// orientation and padded with exact zeros.
    pub fn gram_spectrum(&self) -> Result<EmpiricalSpectrum> {
        let mut eig = self.small_gram().eigenvalues()?;
        eig.resize(self.cols(), 0.0);
        EmpiricalSpectrum::new(eig)
    }
}

impl Gram {
    pub fn dim(&self) -> usize {
        match self {
            Gram::Real(m) => m.nrows(),
            Gram::Complex(m) => m.nrows(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            Gram::Real(m) => m.trace(),
            Gram::Complex(m) => m.trace().re,
        }
    }

    fn shifted(&self, gamma: f64) -> Gram {
        match self {
            Gram::Real(m) => {
                let mut s = m * gamma;
                for i in 0..s.nrows() {
                    s[(i, i)] += 1.0;
                }
                Gram::Real(s)
            }
            Gram::Complex(m) => {
                let mut s = m * Complex::new(gamma, 0.0);
                for i in 0..s.nrows() {
                    s[(i, i)] += Complex::new(1.0, 0.0);
                }
                Gram::Complex(s)
            }
        }
    }

    /// Natural log-determinant and a lower bound on the smallest eigenvalue,
    /// both from the Cholesky factor `L`: `lambda_min >= 1 / ||L^{-1}||_F^2`.
    fn cholesky_logdet(&self, with_bound: bool) -> Option<(f64, f64)> {
        match self {
            Gram::Real(m) => {
                let c = m.clone().cholesky()?;
                let l = c.l_dirty();
                let logdet = 2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>();
                let bound = if with_bound {
                    let inv = c.l().solve_lower_triangular(&DMatrix::identity(l.nrows(), l.nrows()))?;
                    1.0 / inv.norm_squared()
                } else {
                    0.0
                };
                Some((logdet, bound))
            }
            Gram::Complex(m) => {
                let c = m.clone().cholesky()?;
                let l = c.l_dirty();
                let logdet = 2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>();
                let bound = if with_bound {
                    let n = l.nrows();
                    let inv = c.l().solve_lower_triangular(&DMatrix::identity(n, n))?;
                    1.0 / inv.iter().map(|z| z.norm_sqr()).sum::<f64>()
                } else {
                    0.0
                };
                Some((logdet, bound))
            }
        }
    }

    /// `ln det(I + gamma G)` through a Cholesky factorization.
    pub fn log_det_shifted(&self, gamma: f64) -> Result<f64> {
        self.shifted(gamma)
            .cholesky_logdet(false)
            .map(|(l, _)| l)
            .ok_or_else(|| Error::Factorization(format!("I + {gamma} G is not positive definite")))
    }

    /// `ln det G` when every eigenvalue provably exceeds `threshold`.
    pub fn log_det_if_above(&self, threshold: f64) -> Option<f64> {
        let (logdet, bound) = self.cholesky_logdet(true)?;
        (bound.is_finite() && bound > threshold && logdet.is_finite()).then_some(logdet)
    }

    /// Eigenvalues (ascending) of the Hermitian matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let v: Vec<f64> = match self {
            Gram::Real(m) => m.clone().symmetric_eigenvalues().iter().copied().collect(),
            Gram::Complex(m) => m.clone().symmetric_eigenvalues().iter().copied().collect(),
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eigen("non-finite eigenvalue".into()));
        }
        let mut v = v;
        v.sort_by(f64::total_cmp);
        Ok(v)
    }
}
