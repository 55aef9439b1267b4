use crate::error::{Error, Result};

const WIDTH: f64 = 1e-14;

/// Bisection for `g(x) = target` with `g` increasing on `[lo, hi]` and the
/// root known to lie inside. Stops at relative width `1e-14` or when the
/// midpoint no longer separates the bracket.
pub(crate) fn bisect_increasing<G: Fn(f64) -> f64>(g: G, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= WIDTH * mid.abs() {
            return mid;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Solves `g(z) = target` for `z < 0`, where `g` is increasing on `(-inf, 0)`
/// with `g(0-) >= target`. The lower bracket is found by doubling from `start`.
pub(crate) fn solve_on_negative_axis<G: Fn(f64) -> f64>(g: G, target: f64, start: f64) -> Result<f64> {
    let mut lo = -start.abs().max(f64::MIN_POSITIVE);
    let mut hi = 0.0;
    let mut steps = 0;
    while g(lo) >= target {
        hi = lo;
        lo *= 2.0;
        steps += 1;
        if steps > 2100 || !lo.is_finite() {
            return Err(Error::Bracketing(format!(
                "no z < 0 with value below {target} (searched down to {lo})"
            )));
        }
    }
    Ok(bisect_increasing(g, target, lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root() {
        let x = bisect_increasing(|x| x * x * x, 2.0, 0.0, 2.0);
        assert!((x - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn negative_axis_bracket_grows() {
        // z / (1 - z) = -0.999 at z = -999
        let z = solve_on_negative_axis(|z| z / (1.0 - z), -0.999, 1e-3).unwrap();
        assert!((z + 999.0).abs() < 1e-9, "{z}");
    }

    #[test]
    fn unreachable_target_fails() {
        let r = solve_on_negative_axis(|z| z / (1.0 - z), -1.5, 1.0);
        assert!(matches!(r, Err(Error::Bracketing(_))));
    }
}
