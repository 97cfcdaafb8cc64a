//! Critical curves of a concave-convex flux: the tangent function, its
//! inverse, the zero-dissipation function and companion states.
//!
//! The tangent and companion equations are written with divided
//! differences (`f[u, v, v] = 0`, `f[v, u, k] = 0`), which removes the
//! trivial roots and keeps the residuals well conditioned near them.

use alloc::string::ToString;

use crate::error::{Error, Result};
use crate::laws::{EntropyModel, FluxModel, Models};
use crate::roots::{self, CurveSolverConfig};

/// Tangent function: the state `v` on the other side of zero whose
/// characteristic speed equals the chord speed `sigma(u, v)`.
pub fn phi_tangent(flux: &FluxModel, u: f64, cfg: &CurveSolverConfig) -> Result<f64> {
    flux.check(u)?;
    if u.abs() < cfg.root_tol {
        return Ok(0.0);
    }
    let m = flux.bound();
    let limit = if u > 0.0 { -m } else { m };
    let g = |v: f64| flux.divided_difference(&[u, v, v]);
    let (a, b) = roots::bracket(g, 0.0, 0.25 * u.abs(), limit, cfg.bracket_expansion)
        .ok_or(Error::CurveOutOfDomain { curve: "phi_tangent", u })?;
    roots::solve(
        |v| (flux.divided_difference(&[u, v, v]), 2.0 * flux.divided_difference(&[u, v, v, v])),
        a,
        b,
        cfg.root_tol * 1e-3,
        cfg.max_iter,
    )
}

/// Inverse of the tangent function.
pub fn phi_tangent_inv(flux: &FluxModel, w: f64, cfg: &CurveSolverConfig) -> Result<f64> {
    flux.check(w)?;
    if w.abs() < cfg.root_tol {
        return Ok(0.0);
    }
    let m = flux.bound();
    let limit = if w > 0.0 { -m } else { m };
    let g = |u: f64| flux.divided_difference(&[u, w, w]);
    let (a, b) = roots::bracket(g, 0.0, 0.25 * w.abs(), limit, cfg.bracket_expansion)
        .ok_or(Error::OutOfRange(w))?;
    roots::solve(
        |u| (flux.divided_difference(&[u, w, w]), flux.divided_difference(&[u, u, w, w])),
        a,
        b,
        cfg.root_tol * 1e-3,
        cfg.max_iter,
    )
}

/// Zero-dissipation function: the second zero `v != u` of
/// `v -> E_eta(u, v)`. It lies beyond the tangent point.
pub fn phi_flat0(entropy: &EntropyModel, flux: &FluxModel, u: f64, cfg: &CurveSolverConfig) -> Result<f64> {
    flux.check(u)?;
    if u.abs() < cfg.root_tol {
        return Ok(0.0);
    }
    let models = Models::new(flux.clone(), *entropy);
    let tan = phi_tangent(flux, u, cfg)?;
    let m = flux.bound();
    let limit = if u > 0.0 { -m } else { m };
    let e = |v: f64| models.dissipation(u, v);
    let (a, b) = roots::bracket(e, tan, 0.25 * u.abs(), limit, cfg.bracket_expansion)
        .ok_or(Error::CurveOutOfDomain { curve: "phi_flat0", u })?;
    roots::solve(
        |v| {
            let s = flux.chord(u, v);
            let de = (flux.lambda(v) - s) * (entropy.d_eta(v) - (models.eta(v) - models.eta(u)) / (v - u));
            (models.dissipation(u, v), de)
        },
        a,
        b,
        cfg.root_tol * 1e-3,
        cfg.max_iter,
    )
}

/// Companion of `k` with respect to `u`: the third intersection of the
/// chord through `u` and `k` with the graph of `f`. Equal to `k` when the
/// chord is tangent at `k`.
pub fn companion(flux: &FluxModel, k: f64, u: f64, cfg: &CurveSolverConfig) -> Result<f64> {
    flux.check(k)?;
    flux.check(u)?;
    let m = flux.bound();
    let g = |v: f64| flux.divided_difference(&[v, u, k]);
    let (glo, ghi) = (g(-m), g(m));
    if glo == 0.0 {
        return Ok(-m);
    }
    if ghi == 0.0 {
        return Ok(m);
    }
    if glo.signum() == ghi.signum() {
        return Err(Error::CurveOutOfDomain { curve: "companion", u });
    }
    roots::solve(
        |v| (flux.divided_difference(&[v, u, k]), flux.divided_difference(&[v, v, u, k])),
        -m,
        m,
        cfg.root_tol * 1e-3,
        cfg.max_iter,
    )
}

/// Third chord intersection through `u` and `phi_flat0(u)`, for `u > 0`.
pub fn phi_sharp0(entropy: &EntropyModel, flux: &FluxModel, u: f64, cfg: &CurveSolverConfig) -> Result<f64> {
    flux.check(u)?;
    if u <= 0.0 {
        return Err(Error::Precondition("phi_sharp0 needs u > 0".to_string()));
    }
    let flat = phi_flat0(entropy, flux, u, cfg)?;
    let tan = phi_tangent(flux, u, cfg)?;
    if (flat - tan).abs() < 1e3 * cfg.root_tol {
        return Err(Error::Precondition("phi_flat0(u) coincides with the tangent point".to_string()));
    }
    if !(flat > -flux.bound() && flat < u) {
        return Err(Error::CurveOutOfDomain { curve: "phi_sharp0", u });
    }
    companion(flux, flat, u, cfg)
}
