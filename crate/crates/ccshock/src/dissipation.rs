//! Weighted relative entropy machinery of the a-contraction method:
//! the combinations `eta~`, `q~`, the set `Pi = {eta~ <= 0}`, the
//! dissipation functionals `D_cont`, `D_RH`, `D_max`, and sampled
//! calibration of admissible weights for large and small shocks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::admissibility::{self, ENTROPY_TOL};
use crate::curves;
use crate::error::{Error, Result};
use crate::laws::{Entropy, KruzhkovEntropy, Models};
use crate::quadrature;
use crate::roots::{self, CurveSolverConfig};
use crate::sampling;

/// Absolute tolerance on dissipation signs in the verification scans.
pub const VERIFY_TOL: f64 = 1e-9;

/// A reference shock `(u_L, u_R)` with strength `s0` and chord speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockPair {
    pub u_l: f64,
    pub u_r: f64,
    pub s0: f64,
    pub speed: f64,
}

impl ShockPair {
    /// Builds the pair; it must be a nondegenerate Oleinik shock.
    pub fn new(models: &Models, u_l: f64, u_r: f64) -> Result<Self> {
        let s0 = (u_l - u_r).abs();
        if s0 == 0.0 {
            return Err(Error::Precondition(format!("degenerate shock ({u_l}, {u_r})")));
        }
        if !admissibility::is_oleinik(&models.flux, u_l, u_r)? {
            return Err(Error::Precondition(format!("({u_l}, {u_r}) violates the Oleinik condition")));
        }
        Ok(Self { u_l, u_r, s0, speed: models.sigma(u_l, u_r) })
    }
}

/// Ratio of the side weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    /// `a = a_2 / a_1` in `(0, 1)`.
    Large(f64),
    /// `C > 0` with `a_1 / a_2 = 1 + C s0`.
    Small(f64),
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::Large(a) if a > 0.0 && a < 1.0 => Ok(()),
            WeightSpec::Small(c) if c > 0.0 && c.is_finite() => Ok(()),
            w => Err(Error::Precondition(format!("invalid weight {w:?}"))),
        }
    }

    /// `a_1 / a_2` for a shock of strength `s0`.
    pub fn ratio(&self, s0: f64) -> f64 {
        match *self {
            WeightSpec::Large(a) => 1.0 / a,
            WeightSpec::Small(c) => 1.0 + c * s0,
        }
    }
}

/// The closed interval `Pi = {eta~ <= 0}` around `u_L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiInterval {
    pub lo: f64,
    pub hi: f64,
    pub weight: WeightSpec,
    pub shock: ShockPair,
}

impl PiInterval {
    pub fn contains(&self, u: f64) -> bool {
        u >= self.lo && u <= self.hi
    }

    pub fn diam(&self) -> f64 {
        self.hi - self.lo
    }

    /// Distance to the boundary of the interval.
    pub fn dist_to_boundary(&self, u: f64) -> f64 {
        (u - self.lo).abs().min((u - self.hi).abs())
    }
}

/// Constants controlling `q~` by `eta~` outside `Pi`: `eta~ >= c1 dist` and
/// `|q~| <= c2 eta~` where `q~ <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QControl {
    pub c1: f64,
    pub c2: f64,
}

/// Dissipation functionals for one shock and one weight.
#[derive(Debug, Clone)]
pub struct Dissipation<'a> {
    models: &'a Models,
    shock: ShockPair,
    weight: WeightSpec,
    ratio: f64,
    floor: f64,
}

impl<'a> Dissipation<'a> {
    pub fn new(models: &'a Models, shock: ShockPair, weight: WeightSpec) -> Result<Self> {
        weight.validate()?;
        Ok(Self { models, shock, weight, ratio: weight.ratio(shock.s0), floor: -models.bound() })
    }

    /// Lowest right state allowed for maximal shocks (the tangent point of
    /// the lower end of the state range); defaults to `-M`.
    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn shock(&self) -> &ShockPair {
        &self.shock
    }

    pub fn weight(&self) -> WeightSpec {
        self.weight
    }

    /// `a_1 / a_2`.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub(crate) fn et(&self, u: f64) -> f64 {
        self.ratio * self.models.rel_entropy(u, self.shock.u_l) - self.models.rel_entropy(u, self.shock.u_r)
    }

    pub(crate) fn qt(&self, u: f64) -> f64 {
        self.ratio * self.models.rel_flux(u, self.shock.u_l) - self.models.rel_flux(u, self.shock.u_r)
    }

    fn et_d(&self, u: f64) -> f64 {
        let e = &self.models.entropy;
        self.ratio * (e.d_eta(u) - e.d_eta(self.shock.u_l)) - (e.d_eta(u) - e.d_eta(self.shock.u_r))
    }

    fn dc(&self, u: f64) -> f64 {
        -self.qt(u) + self.models.lambda(u) * self.et(u)
    }

    fn drh(&self, u_minus: f64, u_plus: f64, sigma: f64) -> f64 {
        let m = self.models;
        let (ul, ur) = (self.shock.u_l, self.shock.u_r);
        m.rel_flux(u_plus, ur) - sigma * m.rel_entropy(u_plus, ur)
            - self.ratio * (m.rel_flux(u_minus, ul) - sigma * m.rel_entropy(u_minus, ul))
    }

    pub fn eta_tilde(&self, u: f64) -> Result<f64> {
        self.models.flux.check(u)?;
        Ok(self.et(u))
    }

    pub fn q_tilde(&self, u: f64) -> Result<f64> {
        self.models.flux.check(u)?;
        Ok(self.qt(u))
    }

    /// Derivative of `eta~`.
    pub fn eta_tilde_d(&self, u: f64) -> Result<f64> {
        self.models.flux.check(u)?;
        Ok(self.et_d(u))
    }

    /// `D_cont(u) = -q~(u) + lambda(u) eta~(u)`.
    pub fn d_cont(&self, u: f64) -> Result<f64> {
        self.models.flux.check(u)?;
        Ok(self.dc(u))
    }

    /// `D_cont'(u) = eta~(u) f''(u)`.
    pub fn d_cont_d(&self, u: f64) -> Result<f64> {
        self.models.flux.check(u)?;
        Ok(self.et(u) * self.models.flux.eval(u, 2))
    }

    /// Rankine-Hugoniot dissipation of the shock `(u_-, u_+, sigma)`.
    pub fn d_rh(&self, u_minus: f64, u_plus: f64, sigma: f64) -> Result<f64> {
        self.models.flux.check(u_minus)?;
        self.models.flux.check(u_plus)?;
        Ok(self.drh(u_minus, u_plus, sigma))
    }

    /// Both roots of `eta~` around `u_L`.
    pub fn compute_pi(&self) -> Result<PiInterval> {
        let ul = self.shock.u_l;
        let at_ul = self.et(ul);
        if at_ul >= 0.0 {
            return Err(Error::EmptyPi(at_ul));
        }
        let m = self.models.bound();
        let first = 0.05 * self.shock.s0.min(1.0);
        let g = |u: f64| self.et(u);
        let gd = |u: f64| (self.et(u), self.et_d(u));
        let (a, b) = roots::bracket(g, ul, first, -m, 1.6).ok_or(Error::PiNotCompact)?;
        let lo = roots::solve(gd, a, b, 1e-14, 200)?;
        let (a, b) = roots::bracket(g, ul, first, m, 1.6).ok_or(Error::PiNotCompact)?;
        let hi = roots::solve(gd, a, b, 1e-14, 200)?;
        Ok(PiInterval { lo, hi, weight: self.weight, shock: self.shock })
    }

    /// Largest admissible strength from `u`: `s_max = u - floor`.
    fn s_max(&self, u: f64) -> f64 {
        (u - self.floor).max(0.0)
    }

    /// Maximal shock from `u in Pi`: the strength `s*` solving
    /// `eta(u | u - s*) = -eta~(u)`, and the right state `u - s*`.
    pub fn maximal_shock(&self, u: f64) -> Result<(f64, f64)> {
        self.models.flux.check(u)?;
        let target = -self.et(u);
        if target <= 0.0 {
            if target > -1e-13 * (1.0 + self.models.rel_entropy(self.shock.u_l, self.shock.u_r)) {
                return Ok((0.0, u));
            }
            return Err(Error::Precondition(format!("maximal shock needs u in Pi, eta~({u}) = {}", -target)));
        }
        let s_max = self.s_max(u);
        let e = &self.models.entropy;
        let g = |s: f64| (self.models.rel_entropy(u, u - s) - target, e.d2_eta(u - s) * s);
        if g(s_max).0 < 0.0 {
            return Err(Error::MaximalShockBoundary { u, s_max });
        }
        let s = roots::solve(g, 0.0, s_max, 1e-15, 300)?;
        Ok((s, u - s))
    }

    /// `D_RH` at the maximal shock from `u`.
    pub fn d_max(&self, u: f64) -> Result<f64> {
        let (s, up) = self.maximal_shock(u)?;
        if s == 0.0 {
            return Ok(self.dc(u));
        }
        Ok(self.drh(u, up, self.models.sigma(u, up)))
    }

    /// Brute-force maximum of `s -> D_RH(u, u - s, sigma(u, u - s))` over
    /// `[0, s_max]`: an `n`-point grid refined by golden-section search.
    /// Returns `(s, value)`.
    pub fn d_max_scan(&self, u: f64, n: usize) -> Result<(f64, f64)> {
        self.models.flux.check(u)?;
        let s_max = self.s_max(u);
        let f = |s: f64| self.drh(u, u - s, self.models.sigma(u, u - s));
        let mut best = (0.0, f(0.0));
        let step = s_max / n as f64;
        for i in 1..=n {
            let s = step * i as f64;
            let v = f(s);
            if v > best.1 {
                best = (s, v);
            }
        }
        let (mut a, mut b) = ((best.0 - step).max(0.0), (best.0 + step).min(s_max));
        let r = 0.5 * (libm::sqrt(5.0) - 1.0);
        for _ in 0..100 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let s = 0.5 * (a + b);
        let v = f(s);
        Ok(if v > best.1 { (s, v) } else { best })
    }

    /// Fitted constants of the q~-control estimate outside `Pi`, from an
    /// `n`-point grid on each side.
    pub fn q_control(&self, pi: &PiInterval, n: usize) -> QControl {
        let m = self.models.bound();
        let mut c1 = f64::INFINITY;
        let mut c2: f64 = 0.0;
        let sides = [(-m, pi.lo), (pi.hi, m)];
        for &(a, b) in &sides {
            if b - a <= 0.0 {
                continue;
            }
            for i in 0..n {
                // stay off the boundary point itself
                let t = (i as f64 + 0.5) / n as f64;
                let u = a + (b - a) * t;
                let et = self.et(u);
                let d = pi.dist_to_boundary(u);
                if d > 0.0 {
                    c1 = c1.min(et / d);
                }
                let qt = self.qt(u);
                if qt <= 0.0 && et > 0.0 {
                    c2 = c2.max(-qt / et);
                }
            }
        }
        QControl { c1, c2 }
    }
}

/// Residual of the Lax entropy identity along the shock curve from
/// `u_minus`:
/// `q(u_+;v) - sigma eta(u_+|v) - [q(u_-;v) - sigma eta(u_-|v)]
///  - int_0^s sigma'(t) eta(u_-|u_- - t) dt` with `u_+ = u_- - s`.
pub fn lax_residual(models: &Models, u_minus: f64, s: f64, v: f64) -> f64 {
    let up = u_minus - s;
    let sigma = models.sigma(u_minus, up);
    let lhs = models.rel_flux(up, v) - sigma * models.rel_entropy(up, v);
    let rhs0 = models.rel_flux(u_minus, v) - sigma * models.rel_entropy(u_minus, v);
    let integrand = |t: f64| {
        let w = u_minus - t;
        let dsigma = -models.flux.divided_difference(&[u_minus, w, w]);
        dsigma * models.rel_entropy(u_minus, w)
    };
    lhs - rhs0 - quadrature::adaptive_simpson(integrand, 0.0, s, 1e-12)
}

/// Sampling densities of the verification scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanDensity {
    pub state_points: usize,
    pub shock_samples: usize,
}

impl Default for ScanDensity {
    fn default() -> Self {
        Self { state_points: 2048, shock_samples: 100_000 }
    }
}

/// Outcome of the three large-shock scans at one weight.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScan {
    pub a: f64,
    pub pi: Option<PiInterval>,
    /// Max of `D_cont` over `Pi`.
    pub max_d_cont: f64,
    /// Max of `D_RH` over entropic shocks leaving `Pi`.
    pub max_d_rh_near: f64,
    /// Max of `D_RH` over shocks from far left states into `Pi`.
    pub max_d_rh_far: f64,
    /// Number of admissible shocks found for the second scan.
    pub accepted_near: usize,
    /// Worst offending sample `(u_-, u_+)`.
    pub witness: Option<(f64, f64)>,
    pub failure: Option<String>,
}

impl LargeScan {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs the three large-shock scans for the weight `a`:
/// `D_cont <= tol` on `Pi`; `D_RH <= tol` for eta- and
/// `eta_{phi_tangent(u_L)}`-entropic shocks with `u_-` in `Pi`; and
/// `D_RH <= tol` for `u_- <= phi_flat0(u_L) - eps`, `u_+` in `Pi`.
pub fn verify_large(
    models: &Models,
    shock: &ShockPair,
    a: f64,
    eps: f64,
    density: &ScanDensity,
    seed: u64,
) -> Result<LargeScan> {
    let d = Dissipation::new(models, *shock, WeightSpec::Large(a))?;
    let mut scan = LargeScan {
        a,
        pi: None,
        max_d_cont: f64::NEG_INFINITY,
        max_d_rh_near: f64::NEG_INFINITY,
        max_d_rh_far: f64::NEG_INFINITY,
        accepted_near: 0,
        witness: None,
        failure: None,
    };
    let pi = match d.compute_pi() {
        Ok(pi) => pi,
        Err(Error::PiNotCompact) | Err(Error::EmptyPi(_)) => {
            scan.failure = Some(String::from("Pi is not compactly inside the state interval"));
            return Ok(scan);
        }
        Err(e) => return Err(e),
    };
    scan.pi = Some(pi);
    for u in sampling::linspace(pi.lo, pi.hi, density.state_points) {
        let v = d.dc(u);
        if v > scan.max_d_cont {
            scan.max_d_cont = v;
            if v > VERIFY_TOL {
                scan.witness = Some((u, u));
            }
        }
    }
    if scan.max_d_cont > VERIFY_TOL {
        scan.failure = Some(format!("D_cont = {} on Pi", scan.max_d_cont));
        return Ok(scan);
    }

    let cfg = CurveSolverConfig::default();
    let m = models.bound();
    let kruzhkov = KruzhkovEntropy { k: curves::phi_tangent(&models.flux, shock.u_l, &cfg)? };
    let mut rng = sampling::rng(seed);
    let mut worst = (f64::NEG_INFINITY, (0.0, 0.0));
    for _ in 0..density.shock_samples {
        let um = sampling::uniform(&mut rng, pi.lo, pi.hi);
        let up = sampling::uniform(&mut rng, -m, um);
        if models.dissipation(um, up) > ENTROPY_TOL {
            continue;
        }
        let s = models.sigma(um, up);
        let ek = -s * (kruzhkov.eta(up) - kruzhkov.eta(um)) + kruzhkov.entropy_flux(&models.flux, up)
            - kruzhkov.entropy_flux(&models.flux, um);
        if ek > ENTROPY_TOL {
            continue;
        }
        scan.accepted_near += 1;
        let v = d.drh(um, up, s);
        if v > worst.0 {
            worst = (v, (um, up));
        }
    }
    scan.max_d_rh_near = worst.0;
    if worst.0 > VERIFY_TOL {
        scan.witness = Some(worst.1);
        scan.failure = Some(format!("D_RH = {} for a shock leaving Pi", worst.0));
        return Ok(scan);
    }

    let far = curves::phi_flat0(&models.entropy, &models.flux, shock.u_l, &cfg)? - eps;
    let mut worst = (f64::NEG_INFINITY, (0.0, 0.0));
    if far > -m {
        for _ in 0..density.shock_samples {
            let um = sampling::uniform(&mut rng, -m, far);
            let up = sampling::uniform(&mut rng, pi.lo, pi.hi);
            let v = d.drh(um, up, models.sigma(um, up));
            if v > worst.0 {
                worst = (v, (um, up));
            }
        }
    }
    scan.max_d_rh_far = worst.0;
    if worst.0 > VERIFY_TOL {
        scan.witness = Some(worst.1);
        scan.failure = Some(format!("D_RH = {} for a shock entering Pi from far left", worst.0));
    }
    Ok(scan)
}

/// Certified large-shock weight.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeCalibration {
    pub a_star: f64,
    pub scan: LargeScan,
    pub steps: usize,
}

const A_MIN: f64 = 1e-6;
const A_MAX: f64 = 1.0 - 1e-6;

/// Largest weight `a` passing all three large-shock scans, by bisection on
/// `log a` down to a relative resolution of `1e-4`. The reported value is
/// the lower (passing) end of the final bracket.
pub fn calibrate_large(
    models: &Models,
    shock: &ShockPair,
    eps: f64,
    density: &ScanDensity,
    seed: u64,
) -> Result<LargeCalibration> {
    if !(shock.u_l > 0.0) {
        return Err(Error::Precondition(format!("large-shock calibration needs u_L > 0, got {}", shock.u_l)));
    }
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let top = verify_large(models, shock, A_MAX, eps, density, seed)?;
    if top.passed() {
        return Ok(LargeCalibration { a_star: A_MAX, scan: top, steps: 0 });
    }
    let bottom = verify_large(models, shock, A_MIN, eps, density, seed)?;
    if !bottom.passed() {
        return Err(Error::Calibration(format!(
            "no weight in ({A_MIN}, {A_MAX}) passes; at a = {A_MIN}: {} (witness {:?})",
            bottom.failure.unwrap_or_default(),
            bottom.witness
        )));
    }
    let (mut lo, mut hi) = (A_MIN, A_MAX);
    let mut best = bottom;
    let mut steps = 0;
    while hi - lo > 1e-4 * hi {
        let mid = libm::sqrt(lo * hi);
        let scan = verify_large(models, shock, mid, eps, density, seed)?;
        steps += 1;
        if scan.passed() {
            lo = mid;
            best = scan;
        } else {
            hi = mid;
        }
    }
    Ok(LargeCalibration { a_star: lo, scan: best, steps })
}

/// Scan of one small shock at one constant `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallScan {
    pub u_l: f64,
    pub s0: f64,
    pub c: f64,
    pub pi: PiInterval,
    /// Max of `D_cont` over the grid on `Pi`.
    pub max_d_cont: f64,
    /// Max of `D_max` over the grid on `Pi` (with `u_L` added).
    pub max_d_max: f64,
    /// Grid point attaining `max_d_max`.
    pub argmax: f64,
    /// Grid spacing.
    pub step: f64,
}

/// Scans `D_cont` and `D_max` over an `n`-point grid of `Pi` for the small
/// shock `(u_L, u_L - s0)` and weight `a_1/a_2 = 1 + C s0`.
pub fn scan_small(models: &Models, u_l: f64, s0: f64, c: f64, floor: f64, n: usize) -> Result<SmallScan> {
    let shock = ShockPair::new(models, u_l, u_l - s0)?;
    let d = Dissipation::new(models, shock, WeightSpec::Small(c))?.with_floor(floor);
    let pi = d.compute_pi()?;
    let step = pi.diam() / (n - 1) as f64;
    let mut max_d_cont = f64::NEG_INFINITY;
    let mut best = (f64::NEG_INFINITY, u_l);
    let mut grid = sampling::linspace(pi.lo, pi.hi, n);
    grid.push(u_l);
    for u in grid {
        max_d_cont = max_d_cont.max(d.dc(u));
        let v = d.d_max(u)?;
        if v > best.0 {
            best = (v, u);
        }
    }
    Ok(SmallScan { u_l, s0, c, pi, max_d_cont, max_d_max: best.0, argmax: best.1, step })
}

/// Certified small-shock constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallCalibration {
    pub c0: f64,
    pub s0_max: f64,
    /// Fitted `K` in `max_Pi D_cont <= -K s0^3`.
    pub k: f64,
    /// Largest `D_max` seen over all scans.
    pub max_d_max: f64,
    pub scans: usize,
}

fn small_samples(b_lo: f64, b_hi: f64, s_top: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for j in 0..5 {
        // strengths from 0.999 s_top down to s_top / 100
        let s0 = 0.999 * s_top * libm::pow(10.0, -2.0 * j as f64 / 4.0);
        for ul in sampling::linspace(b_lo + s0, b_hi, 6) {
            out.push((ul, s0));
        }
    }
    out
}

/// Searches `(C0, s0_max)` such that for sampled shocks in `[b_lo, b_hi]`
/// with `s0 < s0_max` and every `C` in `{C0/2, C0, 2 C0}`: `D_cont < 0` on
/// `Pi` (so a positive `K` fits) and `D_max <= tol` on `Pi`. Starts at
/// `trial_c` and doubles it; for each `C0` the strength cap is halved from
/// `(b_hi - b_lo)/2` down to `1e-3`.
pub fn calibrate_small(
    models: &Models,
    b_lo: f64,
    b_hi: f64,
    trial_c: f64,
    density: &ScanDensity,
) -> Result<SmallCalibration> {
    if !(b_lo > 0.0 && b_hi > b_lo && b_hi <= models.bound()) {
        return Err(Error::Precondition(format!("need 0 < b_lo < b_hi <= M, got [{b_lo}, {b_hi}]")));
    }
    if !(trial_c > 0.0) {
        return Err(Error::Precondition(format!("trial C must be positive, got {trial_c}")));
    }
    let cfg = CurveSolverConfig::default();
    let floor = curves::phi_tangent(&models.flux, b_lo, &cfg)?;
    let n = density.state_points.max(16);
    let mut last = String::new();
    for j in 0..8 {
        let c0 = trial_c * libm::pow(2.0, j as f64);
        let mut s_top = 0.5 * (b_hi - b_lo);
        while s_top >= 1e-3 {
            match check_small(models, b_lo, b_hi, c0, s_top, floor, n) {
                Ok((k, max_d_max, scans)) => {
                    return Ok(SmallCalibration { c0, s0_max: s_top, k, max_d_max, scans });
                }
                Err(why) => last = why,
            }
            s_top *= 0.5;
        }
    }
    Err(Error::Calibration(format!("no (C0, s0) pair found; last failure: {last}")))
}

fn check_small(
    models: &Models,
    b_lo: f64,
    b_hi: f64,
    c0: f64,
    s_top: f64,
    floor: f64,
    n: usize,
) -> core::result::Result<(f64, f64, usize), String> {
    let mut k = f64::INFINITY;
    let mut max_d_max = f64::NEG_INFINITY;
    let mut scans = 0;
    for (ul, s0) in small_samples(b_lo, b_hi, s_top) {
        for c in [0.5 * c0, c0, 2.0 * c0] {
            let scan = scan_small(models, ul, s0, c, floor, n)
                .map_err(|e| format!("C = {c}, u_L = {ul}, s0 = {s0}: {e}"))?;
            scans += 1;
            if !(scan.pi.lo >= b_lo.min(floor) && scan.max_d_cont < 0.0) {
                return Err(format!("C = {c}, u_L = {ul}, s0 = {s0}: max D_cont = {}", scan.max_d_cont));
            }
            if scan.max_d_max > VERIFY_TOL {
                return Err(format!(
                    "C = {c}, u_L = {ul}, s0 = {s0}: D_max = {} at {}",
                    scan.max_d_max, scan.argmax
                ));
            }
            k = k.min(-scan.max_d_cont / (s0 * s0 * s0));
            max_d_max = max_d_max.max(scan.max_d_max);
        }
    }
    Ok((k, max_d_max, scans))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{EntropyModel, FluxModel};
    use proptest::prelude::*;

    fn quad() -> Models {
        Models::new(FluxModel::cubic(2.0).unwrap(), EntropyModel::Quadratic)
    }

    #[test]
    fn eta_tilde_examples() {
        let m = quad();
        let shock = ShockPair::new(&m, 1.0, 0.0).unwrap();
        let d = Dissipation::new(&m, shock, WeightSpec::Large(0.25)).unwrap();
        assert!((d.eta_tilde(1.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(d.eta_tilde(2.0).unwrap().abs() < 1e-13);
        assert!(d.eta_tilde(2.0 / 3.0).unwrap().abs() < 1e-13);
        assert!(d.eta_tilde(2.5).is_err());
    }

    #[test]
    fn pi_examples() {
        let m = quad();
        let shock = ShockPair::new(&m, 1.0, 0.0).unwrap();
        let pi = Dissipation::new(&m, shock, WeightSpec::Large(0.25)).unwrap().compute_pi().unwrap();
        assert!((pi.lo - 2.0 / 3.0).abs() < 1e-11 && (pi.hi - 2.0).abs() < 1e-11);
        let pi = Dissipation::new(&m, shock, WeightSpec::Large(0.01)).unwrap().compute_pi().unwrap();
        assert!((pi.lo - 10.0 / 11.0).abs() < 1e-11 && (pi.hi - 10.0 / 9.0).abs() < 1e-11);
        assert!((pi.diam() - 0.20202).abs() < 1e-4);
        // a = 0.3 puts the right root beyond M = 2
        assert!(matches!(
            Dissipation::new(&m, shock, WeightSpec::Large(0.3)).unwrap().compute_pi(),
            Err(Error::PiNotCompact)
        ));
        assert!(Dissipation::new(&m, shock, WeightSpec::Large(1.0)).is_err());
    }

    #[test]
    fn pi_small_regime_diameter_scales_like_one_over_c() {
        let m = quad();
        let s0 = 1e-7;
        let shock = ShockPair::new(&m, 1.0, 1.0 - s0).unwrap();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for c in [1e2, 1e3, 1e4, 1e5] {
            let pi = Dissipation::new(&m, shock, WeightSpec::Small(c)).unwrap().compute_pi().unwrap();
            xs.push(libm::log(c));
            ys.push(libm::log(pi.diam()));
        }
        let slope = sampling::slope(&xs, &ys);
        assert!((slope + 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn d_cont_and_d_rh_examples() {
        let m = quad();
        let shock = ShockPair::new(&m, 1.0, 0.0).unwrap();
        let d = Dissipation::new(&m, shock, WeightSpec::Large(0.25)).unwrap();
        assert!(d.d_cont(2.0 / 3.0).unwrap() <= 0.0);
        for &u in &[0.3, 0.9, 1.4] {
            let a = d.d_rh(u, u, m.lambda(u)).unwrap();
            assert!((a - d.d_cont(u).unwrap()).abs() < 1e-10);
        }
        let small = ShockPair::new(&m, 1.0, 0.9).unwrap();
        let d = Dissipation::new(&m, small, WeightSpec::Small(10.0)).unwrap();
        assert!(d.d_rh(1.0, 0.9, small.speed).unwrap().abs() < 1e-14);
    }

    #[test]
    fn maximal_shock_examples() {
        let m = quad();
        let shock = ShockPair::new(&m, 1.0, 0.0).unwrap();
        let d = Dissipation::new(&m, shock, WeightSpec::Large(0.25)).unwrap();
        let (s, up) = d.maximal_shock(1.0).unwrap();
        assert!((s - 1.0).abs() < 1e-12 && up.abs() < 1e-12);
        let pi = d.compute_pi().unwrap();
        let (s, up) = d.maximal_shock(pi.lo).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(up, pi.lo);
        assert!(d.maximal_shock(0.1).is_err());

        let small = ShockPair::new(&m, 1.0, 0.95).unwrap();
        let d = Dissipation::new(&m, small, WeightSpec::Small(10.0)).unwrap().with_floor(-0.25);
        let (_, up) = d.maximal_shock(1.0).unwrap();
        assert!((up - 0.95).abs() < 1e-12);
        assert!(d.d_max(1.0).unwrap().abs() < 1e-14);
        let pi = d.compute_pi().unwrap();
        assert!((d.d_max(pi.hi).unwrap() - d.d_cont(pi.hi).unwrap()).abs() < 1e-12);
        assert!(d.d_cont(pi.hi).unwrap() <= 0.0);
    }

    #[test]
    fn d_max_matches_brute_force() {
        for m in [quad(), Models::new(FluxModel::cubic(2.0).unwrap(), EntropyModel::Exponential)] {
            let shock = ShockPair::new(&m, 1.0, 0.9).unwrap();
            let d = Dissipation::new(&m, shock, WeightSpec::Small(10.0)).unwrap().with_floor(-0.25);
            let pi = d.compute_pi().unwrap();
            for u in sampling::linspace(pi.lo, pi.hi, 9) {
                let dm = d.d_max(u).unwrap();
                let (_, bf) = d.d_max_scan(u, 4000).unwrap();
                assert!(bf <= dm + 1e-12 * (1.0 + dm.abs()), "u={u}: scan {bf} > D_max {dm}");
                assert!((bf - dm).abs() <= 1e-9 * (1.0 + dm.abs()), "u={u}: {bf} vs {dm}");
            }
        }
    }

    #[test]
    fn d_cont_derivative_identity_and_critical_points() {
        let m = quad();
        let shock = ShockPair::new(&m, 1.2, 1.1).unwrap();
        let d = Dissipation::new(&m, shock, WeightSpec::Small(8.0)).unwrap();
        let pi = d.compute_pi().unwrap();
        let h = 1e-6;
        let mut prev = None;
        for u in sampling::linspace(-1.9, 1.9, 381) {
            let fd = (d.dc(u + h) - d.dc(u - h)) / (2.0 * h);
            let ex = d.d_cont_d(u).unwrap();
            assert!((fd - ex).abs() <= 1e-6 * ex.abs().max(1e-3), "u={u}: {fd} vs {ex}");
            // sign changes of D_cont' away from zero sit on the boundary of Pi
            let sign = ex.signum();
            if let Some((pu, ps)) = prev {
                if sign != ps && u.abs() > 1e-2 && pu > 1e-2 {
                    let near = (pi.lo >= pu && pi.lo <= u) || (pi.hi >= pu && pi.hi <= u);
                    assert!(near, "critical point in ({pu}, {u}) not on the boundary");
                }
            }
            prev = Some((u, sign));
        }
    }

    #[test]
    fn small_regime_structure() {
        // |eta~| <= K s0 on Pi, boundary gradient >= delta s0, interior bound
        let m = quad();
        let c = 10.0;
        let mut k_eta: f64 = 0.0;
        let mut delta = f64::INFINITY;
        let mut k_int: f64 = 0.0;
        for &s0 in &[0.1, 0.03, 0.01, 0.003] {
            for &ul in &[0.7, 1.0, 1.4] {
                let shock = ShockPair::new(&m, ul, ul - s0).unwrap();
                let d = Dissipation::new(&m, shock, WeightSpec::Small(c)).unwrap();
                let pi = d.compute_pi().unwrap();
                assert!(d.et(pi.lo).abs() < 1e-10 && d.et(pi.hi).abs() < 1e-10);
                assert!(d.et(0.5 * (pi.lo + pi.hi)) < 0.0);
                delta = delta.min(d.et_d(pi.lo).abs() / s0).min(d.et_d(pi.hi).abs() / s0);
                for u in sampling::linspace(pi.lo, pi.hi, 101) {
                    k_eta = k_eta.max(d.et(u).abs() / s0);
                    let dist = pi.dist_to_boundary(u);
                    if dist > 0.0 {
                        k_int = k_int.max(-d.et(u) / (s0 * dist));
                    }
                }
            }
        }
        assert!(k_eta < 1.0, "{k_eta}");
        assert!(delta > 0.1, "{delta}");
        assert!(k_int < 10.0, "{k_int}");
    }

    #[test]
    fn q_control_constants_are_finite() {
        let m = quad();
        let shock = ShockPair::new(&m, 1.0, 0.0).unwrap();
        let d = Dissipation::new(&m, shock, WeightSpec::Large(0.01)).unwrap();
        let pi = d.compute_pi().unwrap();
        let qc = d.q_control(&pi, 2048);
        assert!(qc.c1 > 0.0 && qc.c1.is_finite());
        assert!(qc.c2.is_finite() && qc.c2 >= 0.0);
        // q~ >= 0 on the boundary, as D_cont <= 0 there
        assert!(d.qt(pi.lo) >= -1e-12 && d.qt(pi.hi) >= -1e-12);
    }

    #[test]
    fn large_scans_pass_for_small_weights() {
        let m = quad();
        let shock = ShockPair::new(&m, 1.0, 0.0).unwrap();
        let density = ScanDensity { state_points: 256, shock_samples: 5000 };
        let scan = verify_large(&m, &shock, 1e-3, 0.05, &density, 1).unwrap();
        assert!(scan.passed(), "{:?}", scan.failure);
        assert!(scan.accepted_near > 100);
        let scan = verify_large(&m, &shock, 0.5, 0.05, &density, 1).unwrap();
        assert!(!scan.passed());
    }

    #[test]
    fn calibrate_large_rejects_degenerate_requests() {
        let m = quad();
        assert!(ShockPair::new(&m, 1.0, 1.0).is_err());
        let shock = ShockPair::new(&m, -0.5, -1.0);
        assert!(shock.is_err() || calibrate_large(&m, &shock.unwrap(), 0.05, &ScanDensity::default(), 1).is_err());
    }

    #[test]
    fn small_scan_vanishes_only_at_u_l() {
        let m = quad();
        let scan = scan_small(&m, 1.0, 0.05, 10.0, -0.25, 257).unwrap();
        assert!(scan.max_d_cont < 0.0);
        assert!(scan.max_d_max <= VERIFY_TOL);
        assert!((scan.argmax - 1.0).abs() <= scan.step);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn lax_identity_holds(um in -1.8f64..1.8, frac in 0.01f64..0.9, v in -2.0f64..2.0) {
            let m = Models::new(FluxModel::cubic(2.0).unwrap(), EntropyModel::Exponential);
            let s = frac * (um + 2.0);
            prop_assert!(lax_residual(&m, um, s, v).abs() < 1e-8);
        }

        #[test]
        fn pi_endpoints_are_roots(ul in 0.6f64..1.4, s0 in 0.01f64..0.3, c in 10.0f64..40.0) {
            let m = quad();
            let shock = ShockPair::new(&m, ul, ul - s0).unwrap();
            let d = Dissipation::new(&m, shock, WeightSpec::Small(c)).unwrap();
            let pi = d.compute_pi().unwrap();
            prop_assert!(pi.contains(ul));
            prop_assert!(d.et(pi.lo).abs() < 1e-10 && d.et(pi.hi).abs() < 1e-10);
            prop_assert!(d.et(0.5 * (pi.lo + pi.hi)) < 0.0);
        }
    }
}
