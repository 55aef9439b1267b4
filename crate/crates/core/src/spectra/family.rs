use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

use super::{check_psi_domain, check_s_domain, root, SpectralMeasure};

/// Limiting eigenvalue laws with a closed-form S-transform.
///
/// | variant | S(z) | alpha |
/// |---|---|---|
/// | `Dirac { at: a }` | `1/a` | 1 |
/// | `BernoulliProjector { beta }` | `(z+1)/(z+beta)` | `beta` |
/// | `SquareIidGram { variance: s2 }` | `1/(s2 (1+z))` | 1 |
/// | `ProjectorScaled { inner, beta }` | `S_inner(z) (z+1)/(z+beta)` | `min(alpha_inner, beta)` |
/// | `FreeProduct { factors }` | `prod S_i(z)` | `min alpha_i` |
///
/// `ProjectorScaled { inner, beta }` is the law of `P_beta X` (the leading
/// `beta` fraction of the rows of a square channel `X` whose Gram law is
/// `inner`), normalized by the column count of `X`. It carries a zero atom
/// of mass `1 - beta`; its nonzero part has S-transform `S_inner(beta z)`,
/// available through [`SpectralMeasure::restricted_s_transform`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SpectralFamily {
    Dirac { at: f64 },
    BernoulliProjector { beta: f64 },
    SquareIidGram { variance: f64 },
    ProjectorScaled { inner: Box<SpectralFamily>, beta: f64 },
    FreeProduct { factors: Vec<SpectralFamily> },
}

fn check_fraction(what: &'static str, beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(domain(what, beta, "(0, 1]"))
    }
}

fn check_positive(what: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(what, x, "(0, inf)"))
    }
}

impl SpectralFamily {
    pub fn dirac(at: f64) -> Result<Self> {
        check_positive("at", at)?;
        Ok(Self::Dirac { at })
    }

    pub fn bernoulli_projector(beta: f64) -> Result<Self> {
        check_fraction("beta", beta)?;
        Ok(Self::BernoulliProjector { beta })
    }

    pub fn square_iid_gram(variance: f64) -> Result<Self> {
        check_positive("variance", variance)?;
        Ok(Self::SquareIidGram { variance })
    }

    pub fn projector_scaled(inner: SpectralFamily, beta: f64) -> Result<Self> {
        check_fraction("beta", beta)?;
        inner.validate()?;
        Ok(Self::ProjectorScaled {
            inner: Box::new(inner),
            beta,
        })
    }

    pub fn free_product(factors: Vec<SpectralFamily>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Dimension("free product of zero factors".into()));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(Self::FreeProduct { factors })
    }

    /// `m`-fold free product of `SquareIidGram(variance)`.
    pub fn iid_product(m: usize, variance: f64) -> Result<Self> {
        let factor = Self::square_iid_gram(variance)?;
        Self::free_product(vec![factor; m])
    }

    /// Re-checks parameter domains (needed after deserialization).
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Dirac { at } => check_positive("at", *at),
            Self::BernoulliProjector { beta } => check_fraction("beta", *beta),
            Self::SquareIidGram { variance } => check_positive("variance", *variance),
            Self::ProjectorScaled { inner, beta } => {
                check_fraction("beta", *beta)?;
                inner.validate()
            }
            Self::FreeProduct { factors } => {
                if factors.is_empty() {
                    return Err(Error::Dimension("free product of zero factors".into()));
                }
                factors.iter().try_for_each(Self::validate)
            }
        }
    }

    /// S-transform without the domain check. Callers guarantee `z ∈ (-alpha, 0)`.
    fn s_unchecked(&self, z: f64) -> f64 {
        match self {
            Self::Dirac { at } => 1.0 / at,
            Self::BernoulliProjector { beta } => (z + 1.0) / (z + beta),
            Self::SquareIidGram { variance } => 1.0 / (variance * (1.0 + z)),
            Self::ProjectorScaled { inner, beta } => inner.s_unchecked(z) * (z + 1.0) / (z + beta),
            Self::FreeProduct { factors } => factors.iter().map(|f| f.s_unchecked(z)).product(),
        }
    }

    fn psi_inverse_unchecked(&self, y: f64) -> f64 {
        y / (y + 1.0) * self.s_unchecked(y)
    }
}

impl SpectralMeasure for SpectralFamily {
    fn rank_measure(&self) -> f64 {
        match self {
            Self::Dirac { .. } | Self::SquareIidGram { .. } => 1.0,
            Self::BernoulliProjector { beta } => *beta,
            Self::ProjectorScaled { inner, beta } => inner.rank_measure().min(*beta),
            Self::FreeProduct { factors } => factors
                .iter()
                .map(SpectralMeasure::rank_measure)
                .fold(1.0, f64::min),
        }
    }

    fn psi(&self, z: f64) -> Result<f64> {
        check_psi_domain(z)?;
        Ok(match self {
            Self::Dirac { at } => at * z / (1.0 - at * z),
            Self::BernoulliProjector { beta } => beta * z / (1.0 - z),
            Self::SquareIidGram { variance } => {
                // root in (-1, 0) of c y^2 + (2c - 1) y + c = 0, c = variance * z
                let c = variance * z;
                2.0 * c / ((1.0 - 2.0 * c) + (1.0 - 4.0 * c).sqrt())
            }
            _ => {
                let alpha = self.rank_measure();
                root::bisect_increasing(|y| self.psi_inverse_unchecked(y), z, -alpha, 0.0)
            }
        })
    }

    fn psi_inverse(&self, y: f64) -> Result<f64> {
        check_s_domain(y, self.rank_measure())?;
        Ok(self.psi_inverse_unchecked(y))
    }

    fn s_transform(&self, z: f64) -> Result<f64> {
        check_s_domain(z, self.rank_measure())?;
        Ok(self.s_unchecked(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp() -> SpectralFamily {
        SpectralFamily::square_iid_gram(1.0).unwrap()
    }

    #[test]
    fn rank_measures() {
        assert_eq!(SpectralFamily::dirac(2.0).unwrap().rank_measure(), 1.0);
        assert_eq!(SpectralFamily::bernoulli_projector(0.3).unwrap().rank_measure(), 0.3);
        assert_eq!(mp().rank_measure(), 1.0);
        let ps = SpectralFamily::projector_scaled(mp(), 0.4).unwrap();
        assert_eq!(ps.rank_measure(), 0.4);
        let fp = SpectralFamily::free_product(vec![
            ps,
            SpectralFamily::bernoulli_projector(0.7).unwrap(),
            mp(),
        ])
        .unwrap();
        assert_eq!(fp.rank_measure(), 0.4);
    }

    #[test]
    fn constructors_validate() {
        assert!(SpectralFamily::dirac(0.0).is_err());
        assert!(SpectralFamily::bernoulli_projector(0.0).is_err());
        assert!(SpectralFamily::bernoulli_projector(1.5).is_err());
        assert!(SpectralFamily::square_iid_gram(-1.0).is_err());
        assert!(SpectralFamily::free_product(vec![]).is_err());
        let bad = SpectralFamily::ProjectorScaled {
            inner: Box::new(SpectralFamily::Dirac { at: -1.0 }),
            beta: 0.5,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn closed_form_s_values() {
        let d = SpectralFamily::dirac(4.0).unwrap();
        assert_eq!(d.s_transform(-0.3).unwrap(), 0.25);
        let p1 = SpectralFamily::bernoulli_projector(1.0).unwrap();
        for z in [-0.9, -0.5, -0.1] {
            assert!((p1.s_transform(z).unwrap() - 1.0).abs() < 1e-15);
        }
        assert_eq!(mp().s_transform(-0.5).unwrap(), 2.0);
        let prod = SpectralFamily::iid_product(2, 1.0).unwrap();
        assert_eq!(prod.s_transform(-0.5).unwrap(), 4.0);
        assert!(mp().s_transform(-1.0).is_err());
        assert!(mp().s_transform(0.0).is_err());
    }

    #[test]
    fn psi_dirac_and_inverse() {
        let d = SpectralFamily::dirac(1.0).unwrap();
        assert_eq!(d.psi(-1.0).unwrap(), -0.5);
        assert!((d.psi_inverse(-0.5).unwrap() + 1.0).abs() < 1e-15);
        assert!(d.psi(0.0).is_err());
        assert!(d.psi_inverse(-1.0).is_err());
    }

    #[test]
    fn psi_square_iid_closed_form() {
        // y / (1 + y)^2 = -1  =>  y = (sqrt(5) - 3) / 2
        let y = mp().psi(-1.0).unwrap();
        assert!((y - (5f64.sqrt() - 3.0) / 2.0).abs() < 1e-15);
        // tiny z: Psi(z) ~ z * mean
        let y = mp().psi(-1e-12).unwrap();
        assert!((y / -1e-12 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_psi_agrees_with_generic_bisection() {
        for fam in [
            SpectralFamily::dirac(2.5).unwrap(),
            SpectralFamily::bernoulli_projector(0.35).unwrap(),
            SpectralFamily::square_iid_gram(0.7).unwrap(),
        ] {
            let alpha = fam.rank_measure();
            for z in [-1e-3, -0.1, -1.0, -7.0, -300.0] {
                let closed = fam.psi(z).unwrap();
                let generic = root::bisect_increasing(|y| fam.psi_inverse_unchecked(y), z, -alpha, 0.0);
                assert!((closed - generic).abs() < 1e-12, "{fam:?} z={z}");
            }
        }
    }

    #[test]
    fn projector_scaled_restriction() {
        let ps = SpectralFamily::projector_scaled(mp(), 0.5).unwrap();
        for z in [-0.9, -0.6, -0.2] {
            let r = ps.restricted_s_transform(z).unwrap();
            let expected = mp().s_transform(0.5 * z).unwrap();
            assert!((r - expected).abs() < 1e-12, "z={z}: {r} vs {expected}");
        }
        // the full law is the free product with the projector
        let fp = SpectralFamily::free_product(vec![
            mp(),
            SpectralFamily::bernoulli_projector(0.5).unwrap(),
        ])
        .unwrap();
        for z in [-0.45, -0.2] {
            assert!((ps.s_transform(z).unwrap() - fp.s_transform(z).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn serde_round_trip() {
        let f = SpectralFamily::projector_scaled(SpectralFamily::iid_product(2, 1.5).unwrap(), 0.25).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let back: SpectralFamily = serde_json::from_str(&text).unwrap();
        assert_eq!(f, back);
    }
}
