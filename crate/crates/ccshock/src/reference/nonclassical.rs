//! A family of eta-entropic weak solutions of one Riemann problem, built
//! from a nonclassical shock followed by a classical one, compared with the
//! Kruzhkov solution.

use alloc::vec::Vec;

use super::godunov::{godunov_run, GridParams, GridSolution, SliceStore};
use crate::curves;
use crate::error::{Error, Result};
use crate::laws::Models;
use crate::profile::Profile;
use crate::roots::CurveSolverConfig;

/// Residual tolerance for the Rankine-Hugoniot and entropy checks.
pub const DEMO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonclassicalConfig {
    /// Number of middle states sampled across the admissible range.
    pub m_samples: usize,
    pub t_end: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub cfl: f64,
    pub curves: CurveSolverConfig,
}

impl Default for NonclassicalConfig {
    fn default() -> Self {
        Self {
            m_samples: 9,
            t_end: 1.0,
            x_min: -1.0,
            x_max: 3.0,
            dx: 1e-3,
            cfl: 0.9,
            curves: CurveSolverConfig::default(),
        }
    }
}

/// One middle state `m` and the checks on both of its discontinuities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub m: f64,
    pub speeds: [f64; 2],
    pub rh_residuals: [f64; 2],
    pub dissipations: [f64; 2],
    /// RH and entropy within tolerance and speeds ordered.
    pub admissible: bool,
    /// L2 distance to the Kruzhkov solution over the grid at the final time.
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct NonclassicalReport {
    pub u_l: f64,
    pub u_r: f64,
    pub phi_flat0: f64,
    pub phi_tangent: f64,
    /// `[phi_flat0(u_l), m_hi]` where `m_hi` is the largest middle state
    /// with ordered speeds.
    pub m_range: (f64, f64),
    pub candidates: Vec<Candidate>,
    pub kruzhkov: GridSolution,
    /// L2 distance between the solutions of the smallest and largest
    /// admissible `m` at the final time.
    pub family_spread: f64,
}

impl NonclassicalReport {
    pub fn admissible(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| c.admissible)
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.admissible().max_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    pub fn profile(&self, c: &Candidate, t: f64) -> Profile {
        two_shock_profile(self.u_l, c.m, self.u_r, c.speeds, t)
    }
}

fn two_shock_profile(u_l: f64, m: f64, u_r: f64, speeds: [f64; 2], t: f64) -> Profile {
    let (x1, x2) = (speeds[0] * t, speeds[1] * t);
    if x2 > x1 {
        Profile::new(alloc::vec![x1, x2], alloc::vec![u_l, m, u_r]).expect("ordered breaks")
    } else {
        Profile::riemann(u_l, u_r, x1)
    }
}

/// `|sigma (b - a) - (f(b) - f(a))|` with `sigma` the chord speed.
fn rh_residual(models: &Models, a: f64, b: f64) -> f64 {
    let s = models.sigma(a, b);
    (s * (b - a) - (models.flux.f(b) - models.flux.f(a))).abs()
}

/// Builds the two-discontinuity solutions `u_l -> m -> u_r` for `m` in the
/// admissible range and measures how far they are from the Godunov
/// solution of the same Riemann problem at `cfg.t_end`.
pub fn nonclassical_demo(models: &Models, u_l: f64, u_r: f64, cfg: &NonclassicalConfig) -> Result<NonclassicalReport> {
    models.flux.check(u_l)?;
    models.flux.check(u_r)?;
    if !(u_l > 0.0) || cfg.m_samples < 2 || !(cfg.t_end > 0.0) {
        return Err(Error::Precondition(alloc::format!(
            "demo needs u_l > 0, two or more samples and t_end > 0 (u_l = {u_l}, {} samples, t_end = {})",
            cfg.m_samples,
            cfg.t_end
        )));
    }
    let flat = curves::phi_flat0(&models.entropy, &models.flux, u_l, &cfg.curves)?;
    let tan = curves::phi_tangent(&models.flux, u_l, &cfg.curves)?;
    if !(flat < tan) {
        return Err(Error::Construction(alloc::format!("phi_flat0 = {flat} is not below the tangent point {tan}")));
    }
    // sigma(u_l, m) <= sigma(m, u_r) holds from flat up to the first crossing
    let gap = |m: f64| models.sigma(m, u_r) - models.sigma(u_l, m);
    if gap(flat) < 0.0 {
        return Err(Error::Construction(alloc::format!("speeds cannot be ordered for u_r = {u_r}")));
    }
    let m_hi = if gap(tan) >= 0.0 {
        tan
    } else {
        let (mut a, mut b) = (flat, tan);
        for _ in 0..200 {
            let c = 0.5 * (a + b);
            if gap(c) >= 0.0 {
                a = c;
            } else {
                b = c;
            }
        }
        a
    };

    let grid = GridParams { x_min: cfg.x_min, x_max: cfg.x_max, dx: cfg.dx, cfl: cfg.cfl };
    let kruzhkov = godunov_run(
        models,
        &grid,
        grid.averages_of_profile(&Profile::riemann(u_l, u_r, 0.0)),
        cfg.t_end,
        SliceStore::Ends,
        &[],
    )?;
    let reference = kruzhkov.profile_at(cfg.t_end);
    let (lo, hi) = (cfg.x_min, kruzhkov.x_max());

    let n = cfg.m_samples;
    let mut candidates = Vec::with_capacity(n);
    for i in 0..n {
        let m = flat + (m_hi - flat) * i as f64 / (n - 1) as f64;
        // the tangent point itself is the classical limit
        if m >= tan {
            continue;
        }
        let speeds = [models.sigma(u_l, m), models.sigma(m, u_r)];
        let rh_residuals = [rh_residual(models, u_l, m), rh_residual(models, m, u_r)];
        let dissipations = [models.dissipation(u_l, m), models.dissipation(m, u_r)];
        let admissible = rh_residuals.iter().chain(&dissipations).all(|&r| r <= DEMO_TOL) && speeds[0] <= speeds[1];
        let margin = two_shock_profile(u_l, m, u_r, speeds, cfg.t_end).l2_distance(&reference, lo, hi);
        candidates.push(Candidate { m, speeds, rh_residuals, dissipations, admissible, margin });
    }
    let adm: Vec<&Candidate> = candidates.iter().filter(|c| c.admissible).collect();
    let (Some(first), Some(last)) = (adm.first(), adm.last()) else {
        return Err(Error::Construction("no sampled middle state is admissible".into()));
    };
    let family_spread = two_shock_profile(u_l, first.m, u_r, first.speeds, cfg.t_end).l2_distance(
        &two_shock_profile(u_l, last.m, u_r, last.speeds, cfg.t_end),
        lo,
        hi,
    );
    Ok(NonclassicalReport { u_l, u_r, phi_flat0: flat, phi_tangent: tan, m_range: (flat, m_hi), candidates, kruzhkov, family_spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{EntropyModel, FluxModel};

    fn models() -> Models {
        Models::new(FluxModel::cubic(2.0).unwrap(), EntropyModel::Exponential)
    }

    fn quick() -> NonclassicalConfig {
        NonclassicalConfig { dx: 4e-3, ..NonclassicalConfig::default() }
    }

    #[test]
    fn family_of_entropic_solutions() {
        let r = nonclassical_demo(&models(), 1.0, 0.02, &quick()).unwrap();
        assert!((r.phi_flat0 + 1.048).abs() < 5e-3);
        assert!((r.m_range.1 + 1.02).abs() < 1e-9);
        let first = &r.candidates[0];
        assert_eq!(first.m, r.phi_flat0);
        assert!(first.dissipations[0].abs() <= DEMO_TOL);
        assert!(r.admissible().count() >= 2);
        assert!(r.best().unwrap().margin > 0.1);
        assert!(r.family_spread > 0.0);
        for c in r.admissible() {
            assert!(c.m < r.phi_tangent && c.m >= r.phi_flat0);
            assert!(c.speeds[0] <= c.speeds[1]);
        }
    }

    #[test]
    fn no_admissible_middle_state() {
        // u_r far above the companion range: speeds cannot be ordered
        let r = nonclassical_demo(&models(), 1.0, 0.9, &quick());
        assert!(matches!(r, Err(Error::Construction(_))), "{r:?}");
    }
}
