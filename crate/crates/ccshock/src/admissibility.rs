//! Shock admissibility: Oleinik's chord condition, single-entropy
//! admissibility and the closed-form Kruzhkov criterion.

use alloc::format;

use crate::curves;
use crate::error::{Error, Result};
use crate::laws::{self, Entropy, FluxModel, KruzhkovEntropy};
use crate::roots::CurveSolverConfig;

/// Tolerance for dissipation signs; equality counts as admissible.
pub const ENTROPY_TOL: f64 = 1e-12;

const CHORD_POINTS: usize = 512;

/// Oleinik condition: for `u_- > u_+` the graph of `f` lies on or below the
/// chord between the states, for `u_- < u_+` on or above it.
pub fn is_oleinik(flux: &FluxModel, u_minus: f64, u_plus: f64) -> Result<bool> {
    flux.check(u_minus)?;
    flux.check(u_plus)?;
    if u_minus == u_plus {
        return Err(Error::Precondition(format!("coincident states {u_minus}")));
    }
    // f(x) - chord(x) = (x - u_-)(x - u_+) f[x, u_-, u_+]
    let gap = |x: f64| (x - u_minus) * (x - u_plus) * flux.divided_difference(&[x, u_minus, u_plus]);
    let below = u_minus > u_plus;
    let ok = |x: f64| if below { gap(x) <= ENTROPY_TOL } else { gap(x) >= -ENTROPY_TOL };
    let (lo, hi) = if below { (u_plus, u_minus) } else { (u_minus, u_plus) };
    let s = flux.chord(u_minus, u_plus);
    let slope = |x: f64| flux.lambda(x) - s;
    let mut prev_x = lo;
    let mut prev_d = slope(lo);
    for i in 0..CHORD_POINTS {
        let x = lo + (hi - lo) * i as f64 / (CHORD_POINTS - 1) as f64;
        if !ok(x) {
            return Ok(false);
        }
        let d = slope(x);
        if i > 0 && d.signum() != prev_d.signum() {
            // interior critical point of f - chord
            let (mut a, mut b) = (prev_x, x);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if slope(m).signum() == prev_d.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            if !ok(0.5 * (a + b)) {
                return Ok(false);
            }
        }
        prev_x = x;
        prev_d = d;
    }
    Ok(true)
}

/// `E_eta(u_-, u_+) <= tol`.
pub fn is_eta_entropic<E: Entropy + ?Sized>(entropy: &E, flux: &FluxModel, u_minus: f64, u_plus: f64) -> Result<bool> {
    Ok(laws::entropy_dissipation(flux, entropy, u_minus, u_plus)? <= ENTROPY_TOL)
}

/// Kruzhkov admissibility for `u_- > 0`, `u_+ < u_-` and `k <= u_-`:
/// for `k <= phi_tangent(u_-)` the shock is admissible iff `u_+ >= k`,
/// otherwise iff `u_+ >= companion(k, u_-)`. The verdict is cross-checked
/// against the sign of `E_{eta_k}`.
pub fn is_kruzhkov_entropic(
    flux: &FluxModel,
    u_minus: f64,
    u_plus: f64,
    k: f64,
    cfg: &CurveSolverConfig,
) -> Result<bool> {
    flux.check(u_minus)?;
    flux.check(u_plus)?;
    flux.check(k)?;
    if !(u_minus > 0.0 && u_minus > u_plus && k <= u_minus) {
        return Err(Error::Unsupported(format!(
            "Kruzhkov closed form needs u_- > 0, u_+ < u_-, k <= u_- (got {u_minus}, {u_plus}, {k})"
        )));
    }
    let tan = curves::phi_tangent(flux, u_minus, cfg)?;
    let verdict = if k <= tan {
        u_plus >= k
    } else {
        match curves::companion(flux, k, u_minus, cfg) {
            Ok(c) => u_plus >= c,
            // the companion lies below the state interval
            Err(Error::CurveOutOfDomain { .. }) => true,
            Err(e) => return Err(e),
        }
    };
    let e = laws::entropy_dissipation(flux, &KruzhkovEntropy { k }, u_minus, u_plus)?;
    let clear = 1e-10;
    if (verdict && e > clear) || (!verdict && e < -clear) {
        return Err(Error::Invariant {
            time: 0.0,
            what: format!("Kruzhkov closed form disagrees with E = {e} at ({u_minus}, {u_plus}, {k})"),
        });
    }
    Ok(verdict)
}
