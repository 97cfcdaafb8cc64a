//! Weighted relative entropy functionals between a solution and a front
//! tracking approximation.

use super::godunov::GridSolution;
use crate::error::{Error, Result};
use crate::laws::Models;
use crate::profile::{integrate_pieces, Profile};
use crate::quadrature;

/// `int_lo^hi a(x) eta(u(x) | psi(x)) dx`, exact for piecewise-constant
/// arguments.
pub fn weighted_rel_entropy(models: &Models, u: &Profile, psi: &Profile, a: &Profile, lo: f64, hi: f64) -> f64 {
    integrate_pieces(&[u, psi, a], lo, hi, |v| v[2] * models.rel_entropy(v[0], v[1]))
}

/// Same with `u` read from a grid solution at time `t`; the window must lie
/// inside the grid.
pub fn weighted_rel_entropy_grid(
    models: &Models,
    wild: &GridSolution,
    t: f64,
    psi: &Profile,
    a: &Profile,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    wild.check_window(lo, hi)?;
    Ok(weighted_rel_entropy(models, &wild.profile_at(t), psi, a, lo, hi))
}

/// `int eta(u_fan | psi) dx` at time `t` between the exact centred
/// rarefaction `(u_l, u_r)` and the single rarefaction shock moving at
/// `lambda(u_r)`, for `0 < u_l < u_r` on the convex side.
pub fn rarefaction_shock_error(models: &Models, u_l: f64, u_r: f64, t: f64) -> Result<f64> {
    if !(u_l > 0.0 && u_r > u_l && t > 0.0) {
        return Err(Error::Precondition(alloc::format!("rarefaction ({u_l}, {u_r}) at t = {t}")));
    }
    let (a, b) = (models.lambda(u_l), models.lambda(u_r));
    // the fan state at speed xi inverts lambda on [u_l, u_r]
    let fan = |xi: f64| {
        let (mut lo, mut hi) = (u_l, u_r);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if models.lambda(m) < xi {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    };
    // psi = u_l left of b t, u_r right of it; the fan lives on [a t, b t]
    let err = quadrature::adaptive_simpson(|xi| models.rel_entropy(fan(xi), u_l), a, b, 1e-13);
    Ok(err * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{EntropyModel, FluxModel};
    use crate::reference::godunov::{godunov_run, GridParams, SliceStore};

    fn models() -> Models {
        Models::new(FluxModel::cubic(2.0).unwrap(), EntropyModel::Quadratic)
    }

    #[test]
    fn examples() {
        let m = models();
        let one = Profile::constant(1.0);
        let u = Profile::riemann(1.2, 0.7, 0.1);
        assert_eq!(weighted_rel_entropy(&m, &u, &u, &one, -1.0, 1.0), 0.0);
        let v = weighted_rel_entropy(&m, &Profile::constant(2.0), &Profile::constant(1.0), &one, 0.0, 1.0);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shifted_shock_closed_form() {
        let m = models();
        let (ul, ur, a1, a2, d) = (1.0, 0.5, 1.0, 0.3, 0.25);
        let u = Profile::riemann(ul, ur, 0.0);
        let psi = Profile::riemann(ul, ur, d);
        let a = Profile::riemann(a1, a2, d);
        let v = weighted_rel_entropy(&m, &u, &psi, &a, -1.0, 1.0);
        assert!((v - a1 * d * m.rel_entropy(ur, ul)).abs() < 1e-15);
        // shift to the left: the mismatch sits under a_2
        let psi = Profile::riemann(ul, ur, -d);
        let a = Profile::riemann(a1, a2, -d);
        let v = weighted_rel_entropy(&m, &u, &psi, &a, -1.0, 1.0);
        assert!((v - a2 * d * m.rel_entropy(ul, ur)).abs() < 1e-15);
    }

    #[test]
    fn window_must_fit_the_grid() {
        let m = models();
        let g = GridParams { x_min: -1.0, x_max: 1.0, dx: 0.1, cfl: 0.5 };
        let s = godunov_run(&m, &g, alloc::vec![1.0; g.cells()], 0.1, SliceStore::Ends, &[]).unwrap();
        let one = Profile::constant(1.0);
        assert!(weighted_rel_entropy_grid(&m, &s, 0.1, &one, &one, -0.5, 0.5).unwrap().abs() < 1e-15);
        assert!(matches!(
            weighted_rel_entropy_grid(&m, &s, 0.1, &one, &one, -2.0, 0.5),
            Err(Error::Window { .. })
        ));
    }

    #[test]
    fn rarefaction_error_scales_with_strength_cubed_and_time() {
        let m = models();
        let mut ratios = alloc::vec::Vec::new();
        for k in 0..4 {
            let d = 0.08 / libm::pow(2.0, k as f64);
            let e = rarefaction_shock_error(&m, 1.0, 1.0 + d, 0.5).unwrap();
            ratios.push(e / (d * d * d * 0.5));
        }
        let spread = ratios.iter().copied().fold(0.0, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.2, "{ratios:?}");
    }
}
