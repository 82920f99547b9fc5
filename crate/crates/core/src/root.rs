//! Bracketed bisection for monotone decreasing functions.

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
/// Relative bracket width at which bisection stops.
pub const X_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
}

/// Finds `x` in `[lo, hi]` with `f(x) = target` for decreasing `f`, given
/// `f(lo) >= target >= f(hi)`.
pub fn bisect_decreasing<F>(f: F, target: f64, mut lo: f64, mut hi: f64) -> Result<Root>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(lo < hi) {
        return Err(Error::Bracket(format!("empty interval [{lo}, {hi}]")));
    }
    for it in 0..MAX_ITERATIONS {
        if hi - lo < X_TOL * lo.abs().max(hi.abs()).max(1.0) {
            return Ok(Root {
                x: 0.5 * (lo + hi),
                iterations: it,
            });
        }
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if v == target {
            return Ok(Root { x: mid, iterations: it + 1 });
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        what: "bisection",
        iterations: MAX_ITERATIONS,
    })
}

/// Walks `lo` downward geometrically (from a negative start) until `f(lo) >= target`.
pub fn expand_down<F>(f: &F, target: f64, start: f64, max_steps: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    debug_assert!(start < 0.0);
    let mut lo = start;
    for _ in 0..max_steps {
        if f(lo)? >= target {
            return Ok(lo);
        }
        lo *= 2.0;
    }
    Err(Error::Bracket(format!(
        "no lower bracket for target {target} down to x = {lo}"
    )))
}

/// Walks upward from `start` with doubling steps until `f(hi) <= target`.
pub fn expand_up<F>(f: &F, target: f64, start: f64, first_step: f64, max_steps: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut step = first_step;
    let mut hi = start + step;
    for _ in 0..max_steps {
        if f(hi)? <= target {
            return Ok(hi);
        }
        step *= 2.0;
        hi = start + step;
    }
    Err(Error::Bracket(format!(
        "no upper bracket for target {target} up to x = {hi}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_root_of_decreasing_cubic() {
        let f = |x: f64| Ok(-x * x * x);
        let r = bisect_decreasing(f, -8.0, 0.0, 5.0).unwrap();
        assert!((r.x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_bracket_is_rejected() {
        assert!(matches!(
            bisect_decreasing(|x| Ok(-x), 0.0, 1.0, 1.0),
            Err(Error::Bracket(_))
        ));
    }

    #[test]
    fn expansion_both_ways() {
        let f = |x: f64| Ok((-x).exp());
        let lo = expand_down(&f, 1e10, -1.0, 60).unwrap();
        assert!(f(lo).unwrap() >= 1e10);
        let hi = expand_up(&f, 1e-10, 0.0, 1.0, 60).unwrap();
        assert!(f(hi).unwrap() <= 1e-10);
    }
}
