//! Bracketing root finder: safeguarded Newton with bisection fallback.

use crate::error::{Error, Result};

/// Settings for the curve solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSolverConfig {
    /// Growth factor of the outward bracket search.
    pub bracket_expansion: f64,
    /// Absolute tolerance on the state variable.
    pub root_tol: f64,
    pub max_iter: usize,
}

impl Default for CurveSolverConfig {
    fn default() -> Self {
        Self { bracket_expansion: 1.6, root_tol: 1e-10, max_iter: 200 }
    }
}

impl CurveSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.root_tol > 0.0) || self.max_iter == 0 || !(self.bracket_expansion > 1.0) {
            return Err(Error::Precondition(alloc::format!("invalid solver settings {self:?}")));
        }
        Ok(())
    }
}

/// Root of `g` in `[lo, hi]` where `g` changes sign. `g` returns the value
/// and the derivative; Newton steps that leave the bracket or stall are
/// replaced by bisection. Iterates until the step is below `tol`, then
/// polishes with up to three extra Newton steps that stay in the bracket.
pub fn solve<G>(g: G, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    G: Fn(f64) -> (f64, f64),
{
    let (flo, _) = g(lo);
    let (fhi, _) = g(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence(0));
    }
    // orient so that g(a) < 0 < g(b)
    let (mut a, mut b) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = g(x);
    for _ in 0..max_iter {
        let newton_ok = dfx != 0.0 && {
            let y = x - fx / dfx;
            (y - a) * (y - b) < 0.0 && (2.0 * fx).abs() <= (dx_old * dfx).abs()
        };
        dx_old = dx;
        if newton_ok {
            dx = fx / dfx;
            x -= dx;
        } else {
            dx = 0.5 * (b - a);
            x = a + dx;
        }
        if dx.abs() < tol || (b - a).abs() < tol {
            return Ok(polish(&g, x, a, b));
        }
        let r = g(x);
        fx = r.0;
        dfx = r.1;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
    }
    Err(Error::NoConvergence(max_iter))
}

fn polish<G: Fn(f64) -> (f64, f64)>(g: &G, mut x: f64, a: f64, b: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    for _ in 0..3 {
        let (fx, dfx) = g(x);
        if fx == 0.0 || dfx == 0.0 {
            break;
        }
        let y = x - fx / dfx;
        if !(y >= lo && y <= hi) {
            break;
        }
        x = y;
    }
    x
}

/// Walks from `start` towards `limit` in geometrically growing steps
/// until `g` changes sign; returns the bracketing pair.
pub fn bracket<G>(g: G, start: f64, first_step: f64, limit: f64, expansion: f64) -> Option<(f64, f64)>
where
    G: Fn(f64) -> f64,
{
    let dir = if limit >= start { 1.0 } else { -1.0 };
    let mut step = first_step.abs().max(1e-14);
    let mut prev = start;
    let mut fprev = g(start);
    loop {
        let mut next = prev + dir * step;
        let last = (next - limit) * dir >= 0.0;
        if last {
            next = limit;
        }
        let fnext = g(next);
        if fnext == 0.0 || fprev == 0.0 || fnext.signum() != fprev.signum() {
            return Some((prev, next));
        }
        if last {
            return None;
        }
        prev = next;
        fprev = fnext;
        step *= expansion;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let r = solve(|x| (x * x - 2.0, 2.0 * x), 0.0, 2.0, 1e-12, 100).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-14);
        let r = solve(|x| (libm::cos(x) - x, -libm::sin(x) - 1.0), 0.0, 1.0, 1e-12, 100).unwrap();
        assert!((libm::cos(r) - r).abs() < 1e-14);
    }

    #[test]
    fn falls_back_to_bisection_on_flat_derivative() {
        // cube root has a vanishing derivative at the root
        let r = solve(|x| (x * x * x, 0.0), -1.0, 2.0, 1e-12, 200).unwrap();
        assert!(r.abs() < 1e-11);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(solve(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn bracket_walks_outward() {
        let (a, b) = bracket(|x| x - 5.0, 0.0, 0.1, 10.0, 2.0).unwrap();
        assert!(a <= 5.0 && b >= 5.0);
        let (a, b) = bracket(|x| x + 3.0, 0.0, 0.1, -10.0, 2.0).unwrap();
        assert!(b <= -3.0 && a >= -3.0);
        assert!(bracket(|x| x - 50.0, 0.0, 0.1, 10.0, 2.0).is_none());
    }
}
