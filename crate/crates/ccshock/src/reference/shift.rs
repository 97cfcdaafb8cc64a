//! Filippov shifts driven by a grid solution, and the matching speed rule
//! for front tracking.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};

use super::godunov::GridSolution;
use crate::dissipation::{Dissipation, PiInterval, ShockPair, WeightSpec};
use crate::error::{Error, Result};
use crate::front::{FrontParams, SpeedRule, Wave, WaveKind};
use crate::laws::Models;

/// Data of the shift velocity `V(u) = lambda(u) - (C2 + 2L) 1_{u not in Pi}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftConfig {
    pub pi_lo: f64,
    pub pi_hi: f64,
    pub c2: f64,
    /// `sup lambda` over the state interval.
    pub l_sup: f64,
    /// Traces are read this many cells away from the path.
    pub trace_offset: usize,
    /// Traces closer than this count as equal.
    pub trace_tol: f64,
}

impl ShiftConfig {
    pub fn new(models: &Models, pi: &PiInterval, c2: f64) -> Self {
        Self {
            pi_lo: pi.lo,
            pi_hi: pi.hi,
            c2,
            l_sup: models.flux.lambda_sup(),
            trace_offset: 2,
            trace_tol: 1e-8,
        }
    }

    pub fn velocity(&self, models: &Models, u: f64) -> f64 {
        let outside = u < self.pi_lo || u > self.pi_hi;
        models.lambda(u) - if outside { self.c2 + 2.0 * self.l_sup } else { 0.0 }
    }

    /// Velocity from one-sided traces: `V(u)` where they agree, otherwise
    /// the chord speed clamped between the one-sided velocities.
    pub fn filippov_velocity(&self, models: &Models, u_minus: f64, u_center: f64, u_plus: f64) -> f64 {
        if (u_plus - u_minus).abs() <= self.trace_tol {
            return self.velocity(models, u_center);
        }
        let (a, b) = (self.velocity(models, u_minus), self.velocity(models, u_plus));
        models.sigma(u_minus, u_plus).clamp(a.min(b), a.max(b))
    }

    /// Velocity at `x` read from a slice.
    pub fn velocity_at(&self, models: &Models, wild: &GridSolution, cells: &[f64], x: f64) -> Option<f64> {
        let j = wild.cell_of(x)?;
        let k = self.trace_offset;
        if j < k || j + k >= cells.len() {
            return None;
        }
        Some(self.filippov_velocity(models, cells[j - k], cells[j], cells[j + k]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPath {
    pub t0: f64,
    pub x0: f64,
    pub samples: Vec<(f64, f64)>,
    pub lipschitz_bound: f64,
    /// The path left the grid before the final time.
    pub truncated: bool,
}

impl ShiftPath {
    pub fn end(&self) -> (f64, f64) {
        *self.samples.last().unwrap()
    }
}

/// Explicit Euler for `h' = V(u(t, h))` on the time steps of `wild`,
/// from `(t0, x0)` to `t_end`.
pub fn filippov_shift(
    models: &Models,
    wild: &GridSolution,
    cfg: &ShiftConfig,
    t0: f64,
    x0: f64,
    t_end: f64,
) -> Result<ShiftPath> {
    if !(t_end >= t0) || t_end > wild.t_end() + 1e-12 {
        return Err(Error::Precondition(alloc::format!(
            "shift on [{t0}, {t_end}] outside the wild solution's time range"
        )));
    }
    // sup |V| over the state interval
    let v_sup = models.flux.max_speed(-models.bound(), models.bound()) + cfg.c2 + 2.0 * cfg.l_sup;
    let mut path = ShiftPath { t0, x0, samples: alloc::vec![(t0, x0)], lipschitz_bound: v_sup, truncated: false };
    let (mut t, mut x) = (t0, x0);
    let tiny = 1e-12 * (1.0 + t_end.abs());
    while t < t_end - tiny {
        let (_, cells) = wild.slice_at(t);
        let i = wild.slices.partition_point(|s| s.0 <= t + tiny);
        let next_t = wild.slices.get(i).map_or(t_end, |s| s.0).min(t_end);
        let Some(v) = cfg.velocity_at(models, wild, cells, x) else {
            path.truncated = true;
            break;
        };
        x += v * (next_t - t);
        t = next_t;
        path.samples.push((t, x));
    }
    Ok(path)
}

/// Shock speeds read from a grid solution through the Filippov velocity of
/// each shock's own `Pi` set and `C2`; rarefaction shocks keep
/// `lambda(right)`. Shocks whose `Pi` cannot be formed fall back to their
/// chord speed, and the number of such fallbacks is counted.
pub struct ShiftedSpeeds<'a> {
    models: &'a Models,
    wild: &'a GridSolution,
    params: FrontParams,
    trace_offset: usize,
    cache: RefCell<BTreeMap<(u64, u64, u8), Option<ShiftConfig>>>,
    fallbacks: Cell<usize>,
}

impl<'a> ShiftedSpeeds<'a> {
    pub fn new(models: &'a Models, wild: &'a GridSolution, params: FrontParams) -> Self {
        Self { models, wild, params, trace_offset: 2, cache: RefCell::new(BTreeMap::new()), fallbacks: Cell::new(0) }
    }

    pub fn with_trace_offset(mut self, k: usize) -> Self {
        self.trace_offset = k;
        self
    }

    pub fn fallbacks(&self) -> usize {
        self.fallbacks.get()
    }

    /// Shift data of a shock: weight ratio `a = C1` for big shocks and
    /// `a_1/a_2 = 1/(1 - C0 s)` for small ones.
    pub fn config_for(&self, wave: &Wave) -> Option<ShiftConfig> {
        let key = (wave.left.to_bits(), wave.right.to_bits(), wave.kind as u8);
        if let Some(c) = self.cache.borrow().get(&key) {
            return *c;
        }
        let cfg = self.build(wave);
        self.cache.borrow_mut().insert(key, cfg);
        cfg
    }

    fn build(&self, wave: &Wave) -> Option<ShiftConfig> {
        let shock = ShockPair::new(self.models, wave.left, wave.right).ok()?;
        let weight = match wave.kind {
            WaveKind::BigShock => WeightSpec::Large(self.params.c1),
            WaveKind::SmallShock => {
                let c0 = self.params.c0;
                WeightSpec::Small(c0 / (1.0 - c0 * wave.strength))
            }
            WaveKind::RarefactionShock => return None,
        };
        let d = Dissipation::new(self.models, shock, weight).ok()?;
        let pi = d.compute_pi().ok()?;
        let qc = d.q_control(&pi, 256);
        let mut cfg = ShiftConfig::new(self.models, &pi, qc.c2);
        cfg.trace_offset = self.trace_offset;
        Some(cfg)
    }
}

impl SpeedRule for ShiftedSpeeds<'_> {
    fn speed(&self, wave: &Wave, t: f64) -> Result<f64> {
        if wave.kind == WaveKind::RarefactionShock {
            return Ok(self.models.lambda(wave.right));
        }
        let chord = self.models.sigma(wave.left, wave.right);
        let Some(cfg) = self.config_for(wave) else {
            self.fallbacks.set(self.fallbacks.get() + 1);
            return Ok(chord);
        };
        let (_, cells) = self.wild.slice_at(t);
        match cfg.velocity_at(self.models, self.wild, cells, wave.position) {
            Some(v) => Ok(v),
            None => {
                self.fallbacks.set(self.fallbacks.get() + 1);
                Ok(chord)
            }
        }
    }

    fn next_refresh(&self, t: f64) -> f64 {
        let eps = 1e-12 * (1.0 + t.abs());
        let i = self.wild.slices.partition_point(|s| s.0 <= t + eps);
        self.wild.slices.get(i).map_or(f64::INFINITY, |s| s.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{EntropyModel, FluxModel};
    use crate::profile::Profile;
    use crate::reference::godunov::{godunov_run, GridParams, SliceStore};

    fn models() -> Models {
        Models::new(FluxModel::cubic(2.0).unwrap(), EntropyModel::Quadratic)
    }

    fn constant(m: &Models, u: f64) -> GridSolution {
        let g = GridParams { x_min: -5.0, x_max: 5.0, dx: 0.05, cfl: 0.9 };
        godunov_run(m, &g, alloc::vec![u; g.cells()], 0.5, SliceStore::Every(1), &[]).unwrap()
    }

    fn cfg(m: &Models) -> ShiftConfig {
        ShiftConfig { pi_lo: 0.8, pi_hi: 1.2, c2: 1.0, l_sup: m.flux.lambda_sup(), trace_offset: 2, trace_tol: 1e-8 }
    }

    #[test]
    fn straight_paths_on_constant_states() {
        let m = models();
        let c = cfg(&m);
        let wild = constant(&m, 1.0);
        let p = filippov_shift(&m, &wild, &c, 0.0, 0.0, 0.5).unwrap();
        assert!(!p.truncated);
        assert!((p.end().1 - 0.5 * 3.0).abs() < 1e-12);
        let wild = constant(&m, 0.5);
        let p = filippov_shift(&m, &wild, &c, 0.0, 3.0, 0.2).unwrap();
        let slope = 0.75 - (1.0 + 2.0 * 12.0);
        assert!((p.end().1 - 3.0 - 0.2 * slope).abs() < 1e-12);
        let per_step = p.samples.windows(2).all(|w| (w[1].1 - w[0].1).abs() <= p.lipschitz_bound * (w[1].0 - w[0].0) + 1e-12);
        assert!(per_step);
        // leaves the grid
        let p = filippov_shift(&m, &wild, &c, 0.0, -4.0, 0.5).unwrap();
        assert!(p.truncated);
    }

    #[test]
    fn tracks_a_grid_shock() {
        let m = models();
        let g = GridParams { x_min: -2.0, x_max: 3.0, dx: 0.01, cfl: 0.9 };
        let (ul, ur) = (1.0, 0.6);
        let wild = godunov_run(&m, &g, g.averages_of_profile(&Profile::riemann(ul, ur, 0.0)), 1.0, SliceStore::Every(1), &[])
            .unwrap();
        let shock = ShockPair::new(&m, ul, ur).unwrap();
        let d = Dissipation::new(&m, shock, WeightSpec::Large(0.05)).unwrap();
        let pi = d.compute_pi().unwrap();
        let c = ShiftConfig::new(&m, &pi, d.q_control(&pi, 256).c2);
        let p = filippov_shift(&m, &wild, &c, 0.0, 0.0, 1.0).unwrap();
        let exact = m.sigma(ul, ur);
        assert!((p.end().1 - exact).abs() <= g.dx * 1.0 + 1e-12, "{} vs {exact}", p.end().1);
    }

    #[test]
    fn velocity_definition() {
        let m = models();
        let c = cfg(&m);
        assert_eq!(c.velocity(&m, 1.0), 3.0);
        assert_eq!(c.velocity(&m, 1.5), 6.75 - 25.0);
        let v = c.filippov_velocity(&m, 1.0, 0.8, 0.6);
        assert_eq!(v, m.sigma(1.0, 0.6));
    }
}
