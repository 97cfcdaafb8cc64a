//! First-order Godunov scheme with the exact scalar interface flux.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::laws::{FluxModel, Models};
use crate::profile::{self, Profile};
use crate::quadrature;

/// Exact Godunov flux: `min f` over `[u_l, u_r]` when `u_l <= u_r`, else
/// `max f` over `[u_r, u_l]`. Extrema are taken over the endpoints and the
/// critical points of `f`.
#[derive(Debug, Clone)]
pub struct GodunovFlux {
    flux: FluxModel,
    critical: Vec<f64>,
}

impl GodunovFlux {
    pub fn new(flux: &FluxModel) -> Self {
        let m = flux.bound();
        let n = 4096;
        let mut critical = Vec::new();
        let mut prev = (-m, flux.lambda(-m));
        for i in 1..=n {
            let x = -m + 2.0 * m * i as f64 / n as f64;
            let d = flux.lambda(x);
            if d == 0.0 {
                critical.push(x);
            } else if prev.1 != 0.0 && d.signum() != prev.1.signum() {
                let (mut a, mut b) = (prev.0, x);
                for _ in 0..80 {
                    let c = 0.5 * (a + b);
                    if flux.lambda(c).signum() == prev.1.signum() {
                        a = c;
                    } else {
                        b = c;
                    }
                }
                critical.push(0.5 * (a + b));
            }
            prev = (x, d);
        }
        Self { flux: flux.clone(), critical }
    }

    pub fn critical_points(&self) -> &[f64] {
        &self.critical
    }

    pub fn eval(&self, u_l: f64, u_r: f64) -> f64 {
        if u_l == u_r {
            return self.flux.f(u_l);
        }
        let (lo, hi) = if u_l < u_r { (u_l, u_r) } else { (u_r, u_l) };
        let candidates = [self.flux.f(u_l), self.flux.f(u_r)]
            .into_iter()
            .chain(self.critical.iter().filter(|&&c| c > lo && c < hi).map(|&c| self.flux.f(c)));
        if u_l < u_r {
            candidates.fold(f64::INFINITY, f64::min)
        } else {
            candidates.fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// Uniform grid on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub cfl: f64,
}

impl GridParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Cfl(self.cfl));
        }
        if !(self.dx > 0.0 && self.x_max > self.x_min + self.dx) {
            return Err(Error::Precondition(format!("bad grid {self:?}")));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        libm::round((self.x_max - self.x_min) / self.dx) as usize
    }

    /// Exact cell averages of a piecewise-constant profile.
    pub fn averages_of_profile(&self, p: &Profile) -> Vec<f64> {
        (0..self.cells())
            .map(|i| {
                let a = self.x_min + self.dx * i as f64;
                profile::integrate_pieces(&[p], a, a + self.dx, |v| v[0]) / self.dx
            })
            .collect()
    }

    /// Cell averages of a function by 5-point Gauss-Legendre per cell.
    pub fn averages_of_fn<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.cells())
            .map(|i| {
                let a = self.x_min + self.dx * i as f64;
                quadrature::gauss_legendre(&f, a, a + self.dx, 1) / self.dx
            })
            .collect()
    }
}

/// Which time levels to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceStore {
    /// Initial and final only.
    Ends,
    /// Every `k`-th step plus the final one.
    Every(usize),
}

/// Cell averages at a sequence of times.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub x_min: f64,
    pub dx: f64,
    pub cfl: f64,
    /// Time step of the scheme (the last step may be shorter).
    pub dt: f64,
    pub slices: Vec<(f64, Vec<f64>)>,
    /// Largest discrete Kruzhkov entropy residual seen, if checked.
    pub max_entropy_residual: f64,
    /// Largest `|mass change - boundary flux|` over a step.
    pub max_conservation_error: f64,
}

impl GridSolution {
    pub fn cells(&self) -> usize {
        self.slices[0].1.len()
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.dx * self.cells() as f64
    }

    pub fn t_end(&self) -> f64 {
        self.slices.last().unwrap().0
    }

    /// Latest stored slice with time `<= t`.
    pub fn slice_at(&self, t: f64) -> (f64, &[f64]) {
        let i = self.slices.partition_point(|s| s.0 <= t + 1e-12 * (1.0 + t.abs())).max(1) - 1;
        (self.slices[i].0, &self.slices[i].1)
    }

    pub fn profile_at(&self, t: f64) -> Profile {
        Profile::from_cells(self.x_min, self.dx, self.slice_at(t).1).expect("nonempty grid")
    }

    /// Index of the cell containing `x`, if inside the grid.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let i = libm::floor((x - self.x_min) / self.dx);
        if i >= 0.0 && (i as usize) < self.cells() {
            Some(i as usize)
        } else {
            None
        }
    }

    pub fn check_window(&self, lo: f64, hi: f64) -> Result<()> {
        if lo < self.x_min - 1e-12 || hi > self.x_max() + 1e-12 || !(hi >= lo) {
            return Err(Error::Window { lo, hi, grid_lo: self.x_min, grid_hi: self.x_max() });
        }
        Ok(())
    }
}

/// Runs the scheme from the cell averages `u0` up to `t_end`, with the
/// step `cfl dx / max |f'|` over the range of the data and transmissive
/// boundaries. `entropy_ks` are Kruzhkov constants for the per-step
/// discrete entropy check.
pub fn godunov_run(
    models: &Models,
    grid: &GridParams,
    u0: Vec<f64>,
    t_end: f64,
    store: SliceStore,
    entropy_ks: &[f64],
) -> Result<GridSolution> {
    grid.validate()?;
    if u0.len() != grid.cells() {
        return Err(Error::Precondition(format!("{} cell values for {} cells", u0.len(), grid.cells())));
    }
    for &u in &u0 {
        models.flux.check(u)?;
    }
    let lo = u0.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let speed = models.flux.max_speed(lo, hi).max(1e-12);
    let dt = grid.cfl * grid.dx / speed;
    let gf = GodunovFlux::new(&models.flux);
    let n = u0.len();
    let mut sol = GridSolution {
        x_min: grid.x_min,
        dx: grid.dx,
        cfl: grid.cfl,
        dt,
        slices: alloc::vec![(0.0, u0.clone())],
        max_entropy_residual: 0.0,
        max_conservation_error: 0.0,
    };
    let mut u = u0;
    let mut next = alloc::vec![0.0; n];
    let mut fluxes = alloc::vec![0.0; n + 1];
    let mut t = 0.0;
    let mut step = 0usize;
    while t < t_end {
        let h = if t + dt >= t_end * (1.0 - 1e-14) { t_end - t } else { dt };
        let r = h / grid.dx;
        for (j, fj) in fluxes.iter_mut().enumerate() {
            let ul = u[j.saturating_sub(1)];
            let ur = u[j.min(n - 1)];
            *fj = gf.eval(ul, ur);
        }
        for j in 0..n {
            next[j] = u[j] - r * (fluxes[j + 1] - fluxes[j]);
        }
        let mass_change: f64 = next.iter().zip(&u).map(|(a, b)| a - b).sum::<f64>() * grid.dx;
        let boundary = -h * (fluxes[n] - fluxes[0]);
        let scale = 1.0 + u.iter().map(|v| v.abs()).sum::<f64>() * grid.dx;
        sol.max_conservation_error = sol.max_conservation_error.max((mass_change - boundary).abs() / scale);
        for &k in entropy_ks {
            sol.max_entropy_residual = sol.max_entropy_residual.max(entropy_residual(&gf, &u, &next, r, k));
        }
        core::mem::swap(&mut u, &mut next);
        t += h;
        step += 1;
        let last = t >= t_end;
        let keep = match store {
            SliceStore::Ends => last,
            SliceStore::Every(k) => last || step % k.max(1) == 0,
        };
        if keep {
            sol.slices.push((if last { t_end } else { t }, u.clone()));
        }
        if last {
            break;
        }
    }
    Ok(sol)
}

/// Largest discrete Kruzhkov entropy production
/// `|u^{n+1}-k| - |u^n-k| + r (Q_{j+1/2} - Q_{j-1/2})` over the cells.
fn entropy_residual(gf: &GodunovFlux, u: &[f64], next: &[f64], r: f64, k: f64) -> f64 {
    let n = u.len();
    let q = |a: f64, b: f64| gf.eval(a.max(k), b.max(k)) - gf.eval(a.min(k), b.min(k));
    let mut worst = f64::NEG_INFINITY;
    let mut q_left = q(u[0], u[0]);
    for j in 0..n {
        let q_right = q(u[j], u[(j + 1).min(n - 1)]);
        let res = (next[j] - k).abs() - (u[j] - k).abs() + r * (q_right - q_left);
        worst = worst.max(res);
        q_left = q_right;
    }
    worst
}
