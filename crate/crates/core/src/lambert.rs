//! Real branches of the Lambert W function, solved by Halley iteration.

use std::f64::consts::E;

use crate::error::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;
const BRANCH_GUARD: f64 = 1e-12;

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    w
}

fn check_branch(x: f64) -> Result<()> {
    if x < BRANCH_POINT - BRANCH_GUARD {
        return Err(Error::Domain(format!("W({x}) undefined below -1/e")));
    }
    if (x - BRANCH_POINT).abs() < BRANCH_GUARD {
        return Err(Error::Domain(format!("W({x}) too close to the branch point")));
    }
    Ok(())
}

/// Series around the branch point, `p = -sqrt(2(1 + e x))` for W₋₁ and `+sqrt` for W₀.
fn branch_series(p: f64) -> f64 {
    -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
}

/// Principal branch `W₀(x)`, `x ≥ -1/e`, value `≥ -1`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    check_branch(x)?;
    let w = if x < -0.25 {
        branch_series((2.0 * (1.0 + E * x)).sqrt())
    } else if x < 3.0 {
        x.ln_1p() * 0.9
    } else {
        let l1 = x.ln();
        l1 - l1.ln()
    };
    Ok(halley(x, w))
}

/// Lower branch `W₋₁(x)`, `-1/e < x < 0`, value `≤ -1`.
pub fn lambert_wm1(x: f64) -> Result<f64> {
    check_branch(x)?;
    if x >= 0.0 {
        return Err(Error::Domain(format!("W₋₁({x}) needs x < 0")));
    }
    let w = if x < -0.25 {
        branch_series(-(2.0 * (1.0 + E * x)).sqrt())
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    Ok(halley(x, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_identity() {
        for &x in &[-0.367, -0.3, -0.1, -1e-3, -1e-30, 0.0, 0.5, 1.0, 10.0, 1e6] {
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-12 * (1.0 + x.abs()), "W0({x})={w}");
            assert!(w >= -1.0);
        }
        for &x in &[-0.367, -0.3, -0.1, -1e-3, -1e-30, -1e-300] {
            let w = lambert_wm1(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1e-300) + 1e-300, "W-1({x})={w}");
            assert!(w <= -1.0);
        }
    }

    #[test]
    fn known_values() {
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-14);
        let x = -2.0 * (-2.0f64).exp();
        assert!((lambert_wm1(x).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(lambert_w0(-0.5).is_err());
        assert!(lambert_wm1(0.1).is_err());
        assert!(lambert_wm1(BRANCH_POINT).is_err());
    }
}
