//! Bracketing root finder: secant steps guarded by bisection.

use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// An interval known to enclose a sign change of some function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Evaluates `f` at both ends and checks for a sign change.
    pub fn new(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self> {
        let b = Bracket {
            lo,
            hi,
            f_lo: f(lo),
            f_hi: f(hi),
        };
        b.check()?;
        Ok(b)
    }

    fn check(&self) -> Result<()> {
        if !(self.f_lo.is_finite() && self.f_hi.is_finite()) {
            return Err(Error::Numeric(format!(
                "bracket endpoint values {} and {}",
                self.f_lo, self.f_hi
            )));
        }
        if self.f_lo * self.f_hi > 0.0 {
            return Err(Error::Bracket {
                lo: self.lo,
                hi: self.hi,
                f_lo: self.f_lo,
                f_hi: self.f_hi,
            });
        }
        Ok(())
    }
}

/// Finds a root of `f` inside `bracket`.
///
/// Stops once `|f(x)| <= tol` or the bracket is narrower than
/// `tol * max(1, |x|)`. A secant step is taken whenever it lands strictly
/// inside the bracket and the previous step at least halved the width;
/// otherwise the step is a bisection, so convergence is never slower than
/// bisection.
pub fn find_root(f: impl Fn(f64) -> f64, bracket: Bracket, tol: f64) -> Result<f64> {
    bracket.check()?;
    let Bracket {
        lo: mut a,
        hi: mut b,
        f_lo: mut fa,
        f_hi: mut fb,
    } = bracket;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut force_bisect = false;
    for _ in 0..MAX_ITER {
        let width = (b - a).abs();
        let mid = 0.5 * (a + b);
        let secant = b - fb * (b - a) / (fb - fa);
        let inside = secant.is_finite() && secant > a.min(b) && secant < a.max(b);
        let x = if inside && !force_bisect { secant } else { mid };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Numeric(format!("f({x}) = {fx}")));
        }
        if fx.abs() <= tol {
            return Ok(x);
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        let new_width = (b - a).abs();
        force_bisect = new_width > 0.5 * width;
        if new_width <= tol * x.abs().max(1.0) || new_width == width {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Err(Error::Solver(format!(
        "no convergence in {MAX_ITER} iterations on [{a}, {b}]"
    )))
}
