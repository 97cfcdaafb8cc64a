//! Cone-of-information stability experiment: shifted front tracking from
//! `u0` against a grid solution from perturbed data, compared on the
//! shrinking window `[-R + v t, R - v t]`.

use alloc::vec::Vec;

use super::functionals::weighted_rel_entropy;
use super::godunov::{godunov_run, GridParams, GridSolution, SliceStore};
use super::shift::ShiftedSpeeds;
use crate::error::{Error, Result};
use crate::front::{self, FrontParams, Trajectory};
use crate::laws::Models;
use crate::profile::Profile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    pub r: f64,
    /// Cone speed, must exceed the largest characteristic speed.
    pub v: f64,
    pub t_end: f64,
    pub grid: GridParams,
    pub front: FrontParams,
    /// Number of evaluation times of the functional, ends included.
    pub snapshots: usize,
}

impl ConeParams {
    pub fn window(&self, t: f64) -> (f64, f64) {
        (-self.r + self.v * t, self.r - self.v * t)
    }

    pub fn validate(&self, models: &Models) -> Result<()> {
        let vt = self.v * self.t_end;
        if !(self.r > vt) {
            return Err(Error::EmptyWindow { r: self.r, vt });
        }
        if !(self.v > self.front.lambda_hat) {
            return Err(Error::Precondition(alloc::format!(
                "cone speed {} must exceed the largest speed {}",
                self.v,
                self.front.lambda_hat
            )));
        }
        if self.snapshots < 2 || !(self.t_end > 0.0) {
            return Err(Error::Precondition("need a positive final time and two or more snapshots".into()));
        }
        self.front.validate(models)?;
        self.grid.validate()
    }
}

#[derive(Debug, Clone)]
pub struct ConeReport {
    /// `(t, E(t))` with `E(t) = int a eta(u | psi)` over the window at `t`.
    pub functional: Vec<(f64, f64)>,
    /// Allowed growth of `E` per unit time from rarefaction shock error,
    /// `h TV(u0) lambda_hat`.
    pub budget_rate: f64,
    /// Largest `E(t_{k+1}) - E(t_k)` and how many steps exceed the budget.
    pub max_increase: f64,
    pub violations: usize,
    /// `||u0 - wild0||` in L2 over `[-R, R]`.
    pub delta: f64,
    /// `1/m`, taken equal to the front tracking parameter `h`.
    pub inv_m: f64,
    /// `||psi(T) - u(T)||` in L2 over the final window.
    pub distance: f64,
    /// `distance / (delta + 1/m)`.
    pub constant: f64,
    pub shift_fallbacks: usize,
    pub interactions: usize,
    pub trajectory: Trajectory,
    pub wild: GridSolution,
}

/// Runs the experiment for the BV datum `u0` and the wild grid data
/// `wild0` (cell averages on `params.grid`).
pub fn cone_stability_experiment(models: &Models, u0: &Profile, wild0: Vec<f64>, params: &ConeParams) -> Result<ConeReport> {
    params.validate(models)?;
    let fp = &params.front;
    let wild = godunov_run(models, &params.grid, wild0, params.t_end, SliceStore::Every(1), &[])?;
    wild.check_window(-params.r, params.r)?;
    let psi0 = front::discretize_profile(u0, fp.h)?;
    let rule = ShiftedSpeeds::new(models, &wild, *fp);
    let trajectory = front::run(&psi0, *fp, &rule, params.t_end)?;

    let n = params.snapshots;
    let mut functional = Vec::with_capacity(n);
    for i in 0..n {
        let t = params.t_end * i as f64 / (n - 1) as f64;
        let (lo, hi) = params.window(t);
        let s = trajectory.state_at(t);
        let e = weighted_rel_entropy(models, &wild.profile_at(t), &s.profile(), &s.weight_profile(), lo, hi);
        functional.push((t, e));
    }
    let budget_rate = fp.h * u0.tv() * fp.lambda_hat;
    let mut max_increase = f64::NEG_INFINITY;
    let mut violations = 0;
    for w in functional.windows(2) {
        let inc = w[1].1 - w[0].1;
        max_increase = max_increase.max(inc);
        if inc > budget_rate * (w[1].0 - w[0].0) {
            violations += 1;
        }
    }

    let delta = wild.profile_at(0.0).l2_distance(u0, -params.r, params.r);
    let (lo, hi) = params.window(params.t_end);
    let distance = trajectory.profile_at(params.t_end).l2_distance(&wild.profile_at(params.t_end), lo, hi);
    let inv_m = fp.h;
    Ok(ConeReport {
        functional,
        budget_rate,
        max_increase,
        violations,
        delta,
        inv_m,
        distance,
        constant: distance / (delta + inv_m),
        shift_fallbacks: rule.fallbacks(),
        interactions: trajectory.log.len(),
        trajectory,
        wild,
    })
}

/// `u0` plus a smooth bump of L2 norm `delta` centred in `[-r, r]`, as
/// cell averages on `grid`.
pub fn perturbed_data(u0: &Profile, grid: &GridParams, r: f64, delta: f64) -> Vec<f64> {
    let base = grid.averages_of_profile(u0);
    // cos^2 bump on [-r/2, r/2]; its squared L2 norm is 3 r / 8
    let norm = libm::sqrt(3.0 * r / 8.0);
    let bump = grid.averages_of_fn(|x| {
        if x.abs() < 0.5 * r {
            let s = libm::cos(core::f64::consts::PI * x / r);
            s * s
        } else {
            0.0
        }
    });
    base.iter().zip(&bump).map(|(b, p)| b + delta * p / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{EntropyModel, FluxModel};

    fn models() -> Models {
        Models::new(FluxModel::cubic(2.0).unwrap(), EntropyModel::Quadratic)
    }

    fn params(m: &Models, h: f64, dx: f64) -> ConeParams {
        ConeParams {
            r: 2.0,
            v: 5.5,
            t_end: 0.2,
            grid: GridParams { x_min: -4.0, x_max: 4.0, dx, cfl: 0.9 },
            front: FrontParams::new(m, 0.2, h, 1.0, 0.25, 0.5, 1.3).unwrap(),
            snapshots: 11,
        }
    }

    #[test]
    fn empty_window_and_slow_cone() {
        let m = models();
        let mut p = params(&m, 0.05, 0.02);
        p.t_end = 0.5;
        let u0 = Profile::riemann(1.2, 0.7, 0.0);
        let w = p.grid.averages_of_profile(&u0);
        assert!(matches!(cone_stability_experiment(&m, &u0, w.clone(), &p), Err(Error::EmptyWindow { .. })));
        let mut p = params(&m, 0.05, 0.02);
        p.v = 3.0;
        assert!(cone_stability_experiment(&m, &u0, w, &p).is_err());
    }

    #[test]
    fn bump_has_the_requested_norm() {
        let g = GridParams { x_min: -4.0, x_max: 4.0, dx: 0.005, cfl: 0.9 };
        let u0 = Profile::constant(1.0);
        let w = perturbed_data(&u0, &g, 2.0, 0.1);
        let p = Profile::from_cells(g.x_min, g.dx, &w).unwrap();
        assert!((p.l2_distance(&u0, -2.0, 2.0) - 0.1).abs() < 1e-6);
    }

    #[test]
    fn self_consistent_run_is_close() {
        let m = models();
        let p = params(&m, 0.05, 0.0125);
        let u0 = Profile::new(alloc::vec![-0.5, 0.25], alloc::vec![0.8, 1.2, 0.7]).unwrap();
        let r = cone_stability_experiment(&m, &u0, p.grid.averages_of_profile(&u0), &p).unwrap();
        assert!(r.delta < 1e-12, "{}", r.delta);
        assert!(r.distance <= 4.0 * (p.front.h + p.grid.dx), "{r:?}");
    }
}
