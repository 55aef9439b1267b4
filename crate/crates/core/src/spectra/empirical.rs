use crate::error::{domain, Error, Result};

use super::{check_psi_domain, check_s_domain, root, SpectralMeasure};

/// Eigenvalues of a finite Gram matrix `X^H X`, sorted ascending.
///
/// Eigenvalues at or below `zero_tolerance` count as the zero atom. Tiny
/// negative values produced by the eigensolver are clamped to zero; anything
/// more negative than the tolerance is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectrum {
    eigenvalues: Vec<f64>,
    zero_tolerance: f64,
}

/// Relative rank threshold: `max_eigenvalue * dim * 2^-40`.
pub fn default_zero_tolerance(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    max * eigenvalues.len() as f64 * 2f64.powi(-40)
}

impl EmpiricalSpectrum {
    /// Builds a spectrum with the default zero tolerance.
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        let tol = default_zero_tolerance(&eigenvalues);
        Self::with_tolerance(eigenvalues, tol)
    }

    pub fn with_tolerance(mut eigenvalues: Vec<f64>, zero_tolerance: f64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Dimension("empty spectrum".into()));
        }
        if !(zero_tolerance >= 0.0) || !zero_tolerance.is_finite() {
            return Err(domain("zero_tolerance", zero_tolerance, "[0, inf)"));
        }
        for x in eigenvalues.iter_mut() {
            if !x.is_finite() {
                return Err(domain("eigenvalue", *x, "finite"));
            }
            if *x < 0.0 {
                if -*x > zero_tolerance {
                    return Err(domain("eigenvalue", *x, "[0, inf)"));
                }
                *x = 0.0;
            }
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(Self {
            eigenvalues,
            zero_tolerance,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn total_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn zero_tolerance(&self) -> f64 {
        self.zero_tolerance
    }

    /// Eigenvalues above the zero tolerance (a suffix of the sorted list).
    pub fn nonzero(&self) -> &[f64] {
        let first = self
            .eigenvalues
            .partition_point(|&x| x <= self.zero_tolerance);
        &self.eigenvalues[first..]
    }

    /// The distribution of nonzero eigenvalues as a spectrum of its own.
    pub fn restricted(&self) -> Option<EmpiricalSpectrum> {
        let nz = self.nonzero();
        if nz.is_empty() {
            return None;
        }
        Some(Self {
            eigenvalues: nz.to_vec(),
            zero_tolerance: self.zero_tolerance,
        })
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty")
    }

    pub fn mean(&self) -> f64 {
        self.eigenvalues.iter().sum::<f64>() / self.total_dim() as f64
    }

    /// Direct average of `f` over all eigenvalues.
    pub fn average<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.eigenvalues.iter().map(|&x| f(x)).sum::<f64>() / self.total_dim() as f64
    }

    fn psi_unchecked(&self, z: f64) -> f64 {
        self.average(|x| z * x / (1.0 - z * x))
    }
}

impl SpectralMeasure for EmpiricalSpectrum {
    fn rank_measure(&self) -> f64 {
        self.nonzero().len() as f64 / self.total_dim() as f64
    }

    fn psi(&self, z: f64) -> Result<f64> {
        check_psi_domain(z)?;
        Ok(self.psi_unchecked(z))
    }

    fn psi_inverse(&self, y: f64) -> Result<f64> {
        check_s_domain(y, self.rank_measure())?;
        // Psi(z) ~ z * mean near 0, so 1/mean sets the natural scale.
        let start = (y / self.mean()).abs();
        root::solve_on_negative_axis(|z| self.psi_unchecked(z), y, start)
    }

    fn log_mean(&self) -> Result<f64> {
        match self.restricted() {
            Some(r) => {
                let alpha_one = super::quadrature::integrate(
                    |z| match r.s_transform(-z) {
                        Ok(s) => s.log2(),
                        Err(_) => f64::NAN,
                    },
                    0.0,
                    1.0,
                    super::quadrature::Singularity::Right,
                )?;
                Ok(-alpha_one)
            }
            None => Err(domain("alpha", 0.0, "(0, 1]")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_measure_counts() {
        let s = EmpiricalSpectrum::with_tolerance(vec![0.0, 2.0, 0.0, 1.0], 1e-12).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0, 0.0, 1.0, 2.0]);
        assert_eq!(s.rank_measure(), 0.5);
        let z = EmpiricalSpectrum::new(vec![0.0; 5]).unwrap();
        assert_eq!(z.rank_measure(), 0.0);
        assert_eq!(z.psi(-3.0).unwrap(), 0.0);
        assert!(z.restricted().is_none());
    }

    #[test]
    fn negative_eigenvalues() {
        let s = EmpiricalSpectrum::with_tolerance(vec![-1e-15, 1.0], 1e-12).unwrap();
        assert_eq!(s.eigenvalues()[0], 0.0);
        assert!(EmpiricalSpectrum::with_tolerance(vec![-1e-3, 1.0], 1e-12).is_err());
        assert!(EmpiricalSpectrum::new(vec![]).is_err());
        assert!(EmpiricalSpectrum::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn default_tolerance_is_relative() {
        let s = EmpiricalSpectrum::new(vec![1e-20, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.zero_tolerance(), 4.0 * 4.0 * 2f64.powi(-40));
        assert_eq!(s.rank_measure(), 0.75);
    }

    #[test]
    fn psi_of_unit_atoms() {
        let s = EmpiricalSpectrum::new(vec![1.0; 3]).unwrap();
        assert!((s.psi(-1.0).unwrap() + 0.5).abs() < 1e-15);
        assert!((s.psi_inverse(-0.5).unwrap() + 1.0).abs() < 1e-13);
        assert!(s.psi(0.0).is_err());
        assert!(s.psi_inverse(-1.0).is_err());
    }

    #[test]
    fn psi_inverse_round_trip_with_zero_atom() {
        let s = EmpiricalSpectrum::with_tolerance(vec![0.0, 0.5, 1.0, 3.0], 1e-12).unwrap();
        for k in 1..15 {
            let y = -0.75 * k as f64 / 15.0;
            let z = s.psi_inverse(y).unwrap();
            assert!((s.psi(z).unwrap() - y).abs() < 1e-10, "y={y}");
        }
    }

    #[test]
    fn s_transform_of_two_point_spectrum() {
        // z/(1-z) + 2z/(1-2z) = -1 reduces to z^2 = 1/2, so Psi^{-1}(-1/2) = -1/sqrt(2)
        // and S(-1/2) = (1/2)/(-1/2) * (-1/sqrt(2)) = 1/sqrt(2).
        let s = EmpiricalSpectrum::new(vec![1.0, 2.0]).unwrap();
        let z = s.psi_inverse(-0.5).unwrap();
        assert!((z + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-13);
        let sv = s.s_transform(-0.5).unwrap();
        assert!((sv - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn log_mean_matches_direct_average() {
        let s = EmpiricalSpectrum::with_tolerance(vec![0.0, 0.25, 1.0, 2.0, 8.0], 1e-12).unwrap();
        let direct = (0.25f64.log2() + 0.0 + 1.0 + 3.0) / 4.0;
        let v = s.log_mean().unwrap();
        assert!((v - direct).abs() < 1e-8, "{v} vs {direct}");
    }

    #[test]
    fn eta_bounds() {
        let s = EmpiricalSpectrum::new(vec![0.5, 1.0, 4.0]).unwrap();
        let mut prev = 1.0;
        for k in 0..30 {
            let g = 10f64.powf(-3.0 + 0.25 * k as f64);
            let e = s.eta(g).unwrap();
            assert!(e < prev && e > 0.0);
            prev = e;
        }
        assert!((s.eta(1e-12).unwrap() - 1.0).abs() < 1e-11);
    }
}
