//! Adaptive Gauss–Kronrod integration with an exponential change of variables
//! for integrable logarithmic endpoint singularities.
//!
//! The integrands met in this crate (`log S(-z)`, `log((1-z)/(p-z))`, ...) are
//! smooth in the interior and grow like `log(b - z)` towards an endpoint. Near
//! such an endpoint the substitution `z = b - (b - a) e^{-u}` turns the
//! singularity into `u e^{-u}`, which is then mapped onto a finite interval by
//! `u = t / (1 - t)`. On `[0, 1]` this is exactly `u = -log(1 - z)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Which endpoints of an integration interval carry a logarithmic singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Singularity {
    None,
    Left,
    Right,
    Both,
}

/// Tolerances and refinement budget for [`Quadrature::integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_levels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_levels: 20,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    level: usize,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut gauss = fc * WG[3];
    let mut kronrod = fc * WGK[7];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

impl Quadrature {
    /// Integrates `f` over `[a, b]`, applying the exponential substitution at
    /// the endpoints flagged in `singular`.
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        singular: Singularity,
    ) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        if b < a {
            return self.integrate(f, b, a, mirror(singular)).map(|v| -v);
        }
        match singular {
            Singularity::None => self.adaptive(&f, a, b),
            Singularity::Right => self.adaptive(&|t| toward_right(&f, a, b, t), 0.0, 1.0),
            Singularity::Left => self.adaptive(&|t| toward_left(&f, a, b, t), 0.0, 1.0),
            Singularity::Both => {
                let mid = 0.5 * (a + b);
                let left = self.adaptive(&|t| toward_left(&f, a, mid, t), 0.0, 1.0)?;
                let right = self.adaptive(&|t| toward_right(&f, mid, b, t), 0.0, 1.0)?;
                Ok(left + right)
            }
        }
    }

    fn adaptive<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<f64> {
        let (value, error) = kronrod15(f, a, b);
        let mut heap = BinaryHeap::new();
        heap.push(Segment {
            a,
            b,
            value,
            error,
            level: 0,
        });
        let mut total = value;
        let mut total_error = error;
        loop {
            if !total.is_finite() || !total_error.is_finite() {
                return Err(Error::Quadrature {
                    a,
                    b,
                    estimate: total_error,
                    levels: 0,
                });
            }
            if total_error <= self.abs_tol.max(self.rel_tol * total.abs()) {
                break;
            }
            let worst = heap.pop().expect("heap holds at least one segment");
            if worst.level >= self.max_levels {
                return Err(Error::Quadrature {
                    a,
                    b,
                    estimate: total_error,
                    levels: worst.level,
                });
            }
            let mid = 0.5 * (worst.a + worst.b);
            let (v1, e1) = kronrod15(f, worst.a, mid);
            let (v2, e2) = kronrod15(f, mid, worst.b);
            total += v1 + v2 - worst.value;
            total_error += e1 + e2 - worst.error;
            for (lo, hi, value, error) in [(worst.a, mid, v1, e1), (mid, worst.b, v2, e2)] {
                heap.push(Segment {
                    a: lo,
                    b: hi,
                    value,
                    error,
                    level: worst.level + 1,
                });
            }
        }
        // Re-sum in interval order so the result does not depend on heap layout.
        let mut segments = heap.into_vec();
        segments.sort_by(|x, y| x.a.total_cmp(&y.a));
        Ok(segments.iter().map(|s| s.value).sum())
    }
}

fn mirror(s: Singularity) -> Singularity {
    match s {
        Singularity::Left => Singularity::Right,
        Singularity::Right => Singularity::Left,
        other => other,
    }
}

// z = b - (b - a) e^{-u}, u = t / (1 - t)
fn toward_right<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, t: f64) -> f64 {
    let u = t / (1.0 - t);
    let w = (-u).exp();
    if w == 0.0 {
        return 0.0;
    }
    let z = b - (b - a) * w;
    let jac = (b - a) * w / ((1.0 - t) * (1.0 - t));
    if jac == 0.0 || z >= b {
        return 0.0;
    }
    f(z) * jac
}

fn toward_left<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, t: f64) -> f64 {
    let u = t / (1.0 - t);
    let w = (-u).exp();
    if w == 0.0 {
        return 0.0;
    }
    let z = a + (b - a) * w;
    let jac = (b - a) * w / ((1.0 - t) * (1.0 - t));
    if jac == 0.0 || z <= a {
        return 0.0;
    }
    f(z) * jac
}

/// Integrates with the default tolerances (`1e-10` absolute and relative, 20 levels).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, singular: Singularity) -> Result<f64> {
    Quadrature::default().integrate(f, a, b, singular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x + 1.0, 0.0, 2.0, Singularity::None).unwrap();
        assert!((v - 10.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_oscillatory() {
        let v = integrate(f64::sin, 0.0, PI, Singularity::None).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_singularity_right() {
        // ∫_0^1 ln(1 - z) dz = -1
        let v = integrate(|z| (1.0 - z).ln(), 0.0, 1.0, Singularity::Right).unwrap();
        assert!((v + 1.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn log_singularity_left_and_both() {
        let v = integrate(|z: f64| z.ln(), 0.0, 1.0, Singularity::Left).unwrap();
        assert!((v + 1.0).abs() < 1e-11, "{v}");
        // ∫_0^1 ln z + ln(1-z) dz = -2
        let v = integrate(|z: f64| z.ln() + (1.0 - z).ln(), 0.0, 1.0, Singularity::Both).unwrap();
        assert!((v + 2.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let v = integrate(|z| (1.0 - z).ln() / LN_2, 1.0, 0.0, Singularity::Left).unwrap();
        assert!((v - 1.0 / LN_2).abs() < 1e-10);
    }

    #[test]
    fn non_integrable_reports_failure() {
        let r = integrate(|z| 1.0 / (1.0 - z), 0.0, 1.0, Singularity::None);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
