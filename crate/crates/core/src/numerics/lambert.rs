//! Real branches of the Lambert W function, `w * exp(w) = x`.
//!
//! Both branches use Halley's iteration started from a branch-appropriate
//! guess: the series around the branch point `-1/e`, a rational fit near the
//! origin, and the log-log asymptote for large `|ln|x||`.

use std::f64::consts::E;

use crate::error::{Error, Result};

const INV_E: f64 = 1.0 / E;
const MAX_ITER: usize = 64;

/// Arguments within this distance below `-1/e` are treated as the branch point.
const BRANCH_SLACK: f64 = 4.0 * f64::EPSILON * INV_E;

/// Principal branch `W_0`, defined for `x >= -1/e` with `W_0(x) >= -1`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E - BRANCH_SLACK {
        return Err(Error::Domain {
            function: "lambert_w0",
            value: x,
        });
    }
    if x <= -INV_E {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let guess = if x < -0.32 {
        branch_point_series(branch_distance(x))
    } else if x < 3.0 {
        // Padé-type fit, accurate to a few percent on [-0.32, 3]
        x * (1.0 + 4.0 / 3.0 * x) / (1.0 + 7.0 / 3.0 * x + 5.0 / 6.0 * x * x)
    } else {
        log_asymptote(x.ln())
    };
    Ok(halley(x, guess))
}

/// Lower branch `W_{-1}`, defined for `-1/e <= x < 0` with `W_{-1}(x) <= -1`.
pub fn lambert_w_minus1(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E - BRANCH_SLACK || x >= 0.0 {
        return Err(Error::Domain {
            function: "lambert_w_minus1",
            value: x,
        });
    }
    if x <= -INV_E {
        return Ok(-1.0);
    }
    let guess = if x < -0.25 {
        branch_point_series(-branch_distance(x))
    } else {
        log_asymptote((-x).ln())
    };
    Ok(halley(x, guess).min(-1.0))
}

/// `p = sqrt(2 (e x + 1))`, the natural coordinate around the branch point.
fn branch_distance(x: f64) -> f64 {
    (2.0 * (E * x + 1.0)).max(0.0).sqrt()
}

fn branch_point_series(p: f64) -> f64 {
    -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p - 43.0 / 540.0 * p.powi(4)
}

/// `L1 - L2 + L2 / L1` with `L1 = ln|x|` and `L2 = ln|L1|`.
fn log_asymptote(l1: f64) -> f64 {
    let l2 = l1.abs().ln();
    l1 - l2 + l2 / l1
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        w = next;
        if step.abs() <= 2.0 * f64::EPSILON * w.abs().max(1.0) {
            break;
        }
    }
    w
}
