//! Modified front tracking on the convex side of the flux: piecewise
//! constant approximations whose jumps are big shocks, small shocks or
//! rarefaction shocks, with the weight field `a(t, x)` carried along.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::laws::Models;
use crate::profile::Profile;

/// States are rounded to multiples of this so that sums and differences
/// of states are exact in `f64`.
pub const STATE_QUANTUM: f64 = 1.0 / 4_294_967_296.0;

/// Collisions closer in time than this are treated as simultaneous.
pub const SIMULTANEOUS: f64 = 1e-12;

/// Speed bump applied to split simultaneous collisions.
pub const SPEED_PERTURBATION: f64 = 1e-9;

const MAX_EVENTS: usize = 1_000_000;

/// Rounds a state to the quantum grid.
pub fn snap(u: f64) -> f64 {
    libm::round(u / STATE_QUANTUM) * STATE_QUANTUM
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    BigShock,
    SmallShock,
    RarefactionShock,
}

impl WaveKind {
    pub fn name(&self) -> &'static str {
        match self {
            WaveKind::BigShock => "big",
            WaveKind::SmallShock => "small",
            WaveKind::RarefactionShock => "rarefaction",
        }
    }

    pub fn is_shock(&self) -> bool {
        !matches!(self, WaveKind::RarefactionShock)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub kind: WaveKind,
    pub left: f64,
    pub right: f64,
    pub strength: f64,
    pub position: f64,
    pub speed: f64,
    /// Big shock number.
    pub ell: u32,
}

impl Wave {
    fn new(kind: WaveKind, left: f64, right: f64, position: f64, ell: u32) -> Self {
        Self { kind, left, right, strength: (left - right).abs(), position, speed: 0.0, ell }
    }

    /// Factor of the weight field across this wave.
    pub fn xi(&self, params: &FrontParams) -> f64 {
        match self.kind {
            WaveKind::BigShock => params.c1,
            WaveKind::SmallShock => 1.0 - params.c0 * self.strength,
            WaveKind::RarefactionShock => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontParams {
    /// Big/small threshold.
    pub eps: f64,
    /// Rarefaction resolution.
    pub h: f64,
    pub c0: f64,
    pub c1: f64,
    /// Bound on the characteristic speed over `[b_lo, b_hi]`.
    pub lambda_hat: f64,
    pub b_lo: f64,
    pub b_hi: f64,
}

impl FrontParams {
    pub fn new(models: &Models, eps: f64, h: f64, c0: f64, c1: f64, b_lo: f64, b_hi: f64) -> Result<Self> {
        let p = Self { eps, h, c0, c1, lambda_hat: models.flux.max_speed(b_lo, b_hi), b_lo, b_hi };
        p.validate(models)?;
        Ok(p)
    }

    /// `0 < h < eps/2`, `C0 eps <= 1/2`, `0 < C1 <= (1 - C0 eps)^2` and
    /// `0 < b_lo < b_hi <= M`.
    pub fn validate(&self, models: &Models) -> Result<()> {
        let bad = |what: &str| Err(Error::Precondition(format!("front tracking: {what} ({self:?})")));
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(self.h > 0.0 && self.h < 0.5 * self.eps) {
            return bad("need 0 < h < eps/2");
        }
        if !(self.c0 > 0.0 && self.c0 * self.eps <= 0.5) {
            return bad("need C0 > 0 and C0 eps <= 1/2");
        }
        let cap = (1.0 - self.c0 * self.eps) * (1.0 - self.c0 * self.eps);
        if !(self.c1 > 0.0 && self.c1 <= cap) {
            return bad("need 0 < C1 <= (1 - C0 eps)^2");
        }
        if !(self.b_lo > 0.0 && self.b_hi > self.b_lo && self.b_hi <= models.bound()) {
            return bad("need 0 < b_lo < b_hi <= M");
        }
        if !(self.lambda_hat > 0.0) {
            return bad("lambda_hat must be positive");
        }
        Ok(())
    }

    /// `ln c` for the lower weight bound
    /// `c = C1^(2 ceil(2V/eps)) (1/2)^(20 C0 V)`.
    pub fn log_weight_floor(&self, tv: f64) -> f64 {
        2.0 * self.max_big(tv) as f64 * libm::log(self.c1) - 20.0 * self.c0 * tv * core::f64::consts::LN_2
    }

    /// `ceil(2V/eps)`.
    pub fn max_big(&self, tv: f64) -> u64 {
        libm::ceil(2.0 * tv / self.eps) as u64
    }

    fn check_state(&self, u: f64) -> Result<()> {
        if u < self.b_lo || u > self.b_hi {
            return Err(Error::Unsupported(format!(
                "state {u} outside the convex region [{}, {}]",
                self.b_lo, self.b_hi
            )));
        }
        Ok(())
    }
}

/// Speeds assigned to the fronts.
pub trait SpeedRule {
    fn speed(&self, wave: &Wave, t: f64) -> Result<f64>;

    /// Next time after `t` at which speeds must be recomputed.
    fn next_refresh(&self, _t: f64) -> f64 {
        f64::INFINITY
    }
}

/// Chord speeds for shocks and `lambda(right)` for rarefaction shocks.
#[derive(Debug, Clone, Copy)]
pub struct RankineHugoniot<'a> {
    pub models: &'a Models,
}

impl SpeedRule for RankineHugoniot<'_> {
    fn speed(&self, wave: &Wave, _t: f64) -> Result<f64> {
        Ok(match wave.kind {
            WaveKind::RarefactionShock => self.models.lambda(wave.right),
            _ => self.models.sigma(wave.left, wave.right),
        })
    }
}

/// Piecewise-constant approximation of the initial data: a value is kept
/// until the sampled function moves by at least `h max(1, TV)`, giving at
/// most `1/h` jumps, no more variation than the samples, and no new values.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub profile: Profile,
    /// `L2(lo, hi)` distance to the sampled data.
    pub l2_distance: f64,
}

pub fn discretize_initial<F: Fn(f64) -> f64>(
    u0: F,
    lo: f64,
    hi: f64,
    h: f64,
    samples: usize,
    budget: Option<f64>,
) -> Result<Discretization> {
    if !(h > 0.0) || !(hi > lo) || samples < 2 {
        return Err(Error::Precondition(format!("discretize: h = {h}, [{lo}, {hi}], {samples} samples")));
    }
    let xs: Vec<f64> = (0..samples).map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64).collect();
    let us: Vec<f64> = xs.iter().map(|&x| u0(x)).collect();
    if us.iter().any(|u| !u.is_finite()) {
        return Err(Error::Precondition("non-finite initial data".into()));
    }
    let tv: f64 = us.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let threshold = h * tv.max(1.0);
    let mut breaks = Vec::new();
    let mut values = alloc::vec![us[0]];
    for i in 1..samples {
        let cur = *values.last().unwrap();
        if (us[i] - cur).abs() >= threshold {
            breaks.push(0.5 * (xs[i - 1] + xs[i]));
            values.push(us[i]);
        }
    }
    let profile = Profile::new(breaks, values)?;
    // midpoint rule against the samples
    let dx = (hi - lo) / (samples - 1) as f64;
    let mut sq = 0.0;
    for i in 0..samples - 1 {
        let xm = 0.5 * (xs[i] + xs[i + 1]);
        let d = u0(xm) - profile.eval(xm);
        sq += d * d * dx;
    }
    let l2_distance = libm::sqrt(sq);
    if let Some(budget) = budget {
        if l2_distance > budget {
            return Err(Error::RefineH { h, dist: l2_distance, budget });
        }
    }
    Ok(Discretization { profile, l2_distance })
}

/// Same for data that are already piecewise constant: unchanged when they
/// have at most `1/h` jumps, otherwise thinned with the same deadband.
pub fn discretize_profile(p: &Profile, h: f64) -> Result<Profile> {
    if !(h > 0.0) {
        return Err(Error::Precondition(format!("h = {h}")));
    }
    let p = p.simplify();
    if (p.jumps() as f64) <= 1.0 / h {
        return Ok(p);
    }
    let threshold = h * p.tv().max(1.0);
    let mut breaks = Vec::new();
    let mut values = alloc::vec![p.values()[0]];
    for (b, &v) in p.breaks().iter().zip(&p.values()[1..]) {
        if (v - *values.last().unwrap()).abs() >= threshold {
            breaks.push(*b);
            values.push(v);
        }
    }
    Profile::new(breaks, values)
}

/// Waves solving the Riemann problem `(u_l, u_r)` at `x0` at time zero.
pub fn solve_riemann(u_l: f64, u_r: f64, x0: f64, params: &FrontParams) -> Result<Vec<Wave>> {
    params.check_state(u_l)?;
    params.check_state(u_r)?;
    let (u_l, u_r) = (snap(u_l), snap(u_r));
    if u_l == u_r {
        return Ok(Vec::new());
    }
    if u_l > u_r {
        let kind = if u_l - u_r >= params.eps { WaveKind::BigShock } else { WaveKind::SmallShock };
        let ell = u32::from(kind == WaveKind::BigShock);
        return Ok(alloc::vec![Wave::new(kind, u_l, u_r, x0, ell)]);
    }
    let sigma = u_r - u_l;
    let mut n = libm::floor(sigma / params.h) as usize + 1;
    loop {
        let w: Vec<f64> = (0..=n)
            .map(|j| if j == n { u_r } else { snap(u_l + (j as f64 / n as f64) * sigma) })
            .collect();
        if w.windows(2).all(|p| p[1] - p[0] < params.h && p[1] > p[0]) {
            return Ok(w
                .windows(2)
                .map(|p| Wave::new(WaveKind::RarefactionShock, p[0], p[1], x0, 0))
                .collect());
        }
        n += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Taxonomy {
    A1,
    A3,
    A4,
    B1,
    B2,
}

impl Taxonomy {
    pub fn name(&self) -> &'static str {
        match self {
            Taxonomy::A1 => "A1",
            Taxonomy::A3 => "A3",
            Taxonomy::A4 => "A4",
            Taxonomy::B1 => "B1",
            Taxonomy::B2 => "B2",
        }
    }
}

/// Interaction class of `w1` hitting `w2` from the left.
pub fn classify_interaction(w1: &Wave, w2: &Wave, time: f64) -> Result<Taxonomy> {
    use WaveKind::*;
    let monotone = (w1.right - w1.left) * (w2.right - w2.left) >= 0.0;
    match (monotone, w1.kind, w2.kind) {
        (true, BigShock, BigShock) => Ok(Taxonomy::A1),
        (true, BigShock, SmallShock) | (true, SmallShock, BigShock) => Ok(Taxonomy::A3),
        (true, SmallShock, SmallShock) => Ok(Taxonomy::A4),
        (false, BigShock, RarefactionShock) | (false, RarefactionShock, BigShock) => Ok(Taxonomy::B1),
        (false, SmallShock, RarefactionShock) | (false, RarefactionShock, SmallShock) => Ok(Taxonomy::B2),
        _ => Err(Error::Invariant {
            time,
            what: format!("impossible interaction of {:?} and {:?}", w1.kind, w2.kind),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionRecord {
    pub time: f64,
    pub position: f64,
    pub taxonomy: Taxonomy,
    pub incoming: (Wave, Wave),
    pub outgoing: Vec<Wave>,
    pub delta_l: i64,
    pub k_added: Option<f64>,
}

/// A speed bump used to split simultaneous collisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub time: f64,
    pub wave_index: usize,
    pub delta: f64,
}

/// Outgoing wave, K factor and change of L for an interaction.
pub fn resolve_interaction(
    w1: &Wave,
    w2: &Wave,
    time: f64,
    params: &FrontParams,
) -> Result<(Taxonomy, Option<Wave>, Option<f64>, i64)> {
    if w1.right != w2.left {
        return Err(Error::Invariant { time, what: format!("inconsistent states {} / {}", w1.right, w2.left) });
    }
    let taxonomy = classify_interaction(w1, w2, time)?;
    let (u_l, u_r) = (w1.left, w2.right);
    let x = w1.position;
    let ell = w1.ell + w2.ell;
    let c0 = params.c0;
    let wave = |kind, ell| Some(Wave::new(kind, u_l, u_r, x, ell));
    let small_of = |a: &Wave, b: &Wave| if a.kind == WaveKind::SmallShock { a.strength } else { b.strength };
    let out = match taxonomy {
        Taxonomy::A1 => (wave(WaveKind::BigShock, ell), None, 1),
        Taxonomy::A3 => (wave(WaveKind::BigShock, ell), Some(1.0 - c0 * small_of(w1, w2)), 0),
        Taxonomy::A4 => {
            if u_l - u_r >= params.eps {
                (wave(WaveKind::BigShock, ell + 1), None, 0)
            } else {
                (wave(WaveKind::SmallShock, ell), None, 0)
            }
        }
        Taxonomy::B1 => {
            if !(u_l > u_r) {
                return Err(Error::Invariant { time, what: format!("big shock cancelled by rarefaction at {x}") });
            }
            if u_l - u_r > 0.5 * params.eps {
                (wave(WaveKind::BigShock, ell), None, 0)
            } else {
                (wave(WaveKind::SmallShock, ell), None, 1)
            }
        }
        Taxonomy::B2 => {
            let s = small_of(w1, w2);
            if u_l > u_r {
                let k = (1.0 - c0 * s) / (1.0 - c0 * (u_l - u_r));
                (wave(WaveKind::SmallShock, ell), Some(k), 0)
            } else if u_l < u_r {
                (wave(WaveKind::RarefactionShock, ell), Some(1.0 - c0 * s), 0)
            } else {
                (None, Some(1.0 - c0 * s), 0)
            }
        }
    };
    Ok((taxonomy, out.0, out.1, out.2))
}

/// Configuration of the approximation at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontState {
    pub time: f64,
    /// Waves ordered by position.
    pub waves: Vec<Wave>,
    /// Value when there are no waves.
    pub background: f64,
    /// Small shock numbers.
    pub k: Vec<f64>,
    /// Big shock numbers of waves that cancelled out.
    pub ell_reservoir: u32,
    pub params: FrontParams,
}

impl FrontState {
    pub fn new(initial: &Profile, params: FrontParams) -> Result<Self> {
        let p = initial.simplify();
        let mut waves = Vec::new();
        for (i, &x) in p.breaks().iter().enumerate() {
            waves.extend(solve_riemann(p.values()[i], p.values()[i + 1], x, &params)?);
        }
        params.check_state(p.values()[0])?;
        Ok(Self { time: 0.0, waves, background: snap(p.values()[0]), k: Vec::new(), ell_reservoir: 0, params })
    }

    pub fn left_state(&self) -> f64 {
        self.waves.first().map_or(self.background, |w| w.left)
    }

    pub fn right_state(&self) -> f64 {
        self.waves.last().map_or(self.background, |w| w.right)
    }

    pub fn tv(&self) -> f64 {
        self.waves.iter().map(|w| w.strength).sum()
    }

    pub fn big_count(&self) -> usize {
        self.waves.iter().filter(|w| w.kind == WaveKind::BigShock).count()
    }

    /// `L(t)`: total big shock number minus the number of big shocks.
    pub fn big_number(&self) -> i64 {
        let total: i64 = self.waves.iter().map(|w| w.ell as i64).sum::<i64>() + self.ell_reservoir as i64;
        total - self.big_count() as i64
    }

    pub fn k_product(&self) -> f64 {
        self.k.iter().product()
    }

    /// `a(t, x)`, with the factor of a wave counted for `x > x_i`.
    pub fn weight_at(&self, x: f64) -> f64 {
        self.base_weight()
            * self.waves.iter().filter(|w| x > w.position).map(|w| w.xi(&self.params)).product::<f64>()
    }

    /// Value at `x` counting waves at `x` as passed.
    pub fn weight_right(&self, x: f64) -> f64 {
        self.base_weight()
            * self.waves.iter().filter(|w| x >= w.position).map(|w| w.xi(&self.params)).product::<f64>()
    }

    fn base_weight(&self) -> f64 {
        libm::pow(self.params.c1, self.big_number() as f64) * self.k_product()
    }

    /// `psi(t, .)` as a profile; waves sharing a position collapse.
    pub fn profile(&self) -> Profile {
        let mut breaks: Vec<f64> = Vec::new();
        let mut values = alloc::vec![self.left_state()];
        for w in &self.waves {
            if breaks.last() == Some(&w.position) {
                *values.last_mut().unwrap() = w.right;
            } else {
                breaks.push(w.position);
                values.push(w.right);
            }
        }
        Profile::new(breaks, values).expect("ordered wave positions").simplify()
    }

    /// The weight field as a profile.
    pub fn weight_profile(&self) -> Profile {
        let mut breaks: Vec<f64> = Vec::new();
        let mut values = alloc::vec![self.base_weight()];
        let mut cur = values[0];
        for w in &self.waves {
            cur *= w.xi(&self.params);
            if breaks.last() == Some(&w.position) {
                *values.last_mut().unwrap() = cur;
            } else {
                breaks.push(w.position);
                values.push(cur);
            }
        }
        Profile::new(breaks, values).expect("ordered wave positions")
    }

    fn advance_to(&mut self, t: f64) {
        let dt = t - self.time;
        if dt > 0.0 {
            for w in &mut self.waves {
                w.position += w.speed * dt;
            }
        }
        self.time = t;
    }

    fn check_structure(&self) -> Result<()> {
        for (i, w) in self.waves.iter().enumerate() {
            let fail = |what: alloc::string::String| Err(Error::Invariant { time: self.time, what });
            if let Some(n) = self.waves.get(i + 1) {
                if w.right != n.left {
                    return fail(format!("states of waves {i} and {} disagree", i + 1));
                }
                if n.position < w.position {
                    return fail(format!("waves {i} and {} crossed", i + 1));
                }
            }
            let ok = match w.kind {
                WaveKind::RarefactionShock => w.left < w.right && w.strength < self.params.h,
                WaveKind::BigShock => w.left > w.right && w.strength >= 0.5 * self.params.eps,
                WaveKind::SmallShock => w.left > w.right && w.strength < self.params.eps,
            };
            if !ok {
                return fail(format!("wave {i} violates its type: {w:?}"));
            }
        }
        if self.big_number() < 0 {
            return Err(Error::Invariant { time: self.time, what: "negative L".into() });
        }
        Ok(())
    }

    fn refresh_speeds(&mut self, rule: &dyn SpeedRule) -> Result<()> {
        for w in &mut self.waves {
            w.speed = rule.speed(w, self.time)?;
        }
        Ok(())
    }
}

/// Running extrema of the weight and structure checks over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Audit {
    /// Largest `a(t+, x) - a(t-, x)` over interactions and sample points.
    pub max_weight_increase: f64,
    /// Smallest and largest weight value seen.
    pub min_weight: f64,
    pub max_weight: f64,
    /// Largest deviation of a jump ratio from its prescribed factor.
    pub max_jump_ratio_error: f64,
    pub max_big: usize,
    pub max_big_number: i64,
    /// Largest `TV(t) - TV(0)`.
    pub tv_excess: f64,
    /// Range of states seen.
    pub min_state: f64,
    pub max_state: f64,
    /// Sum of positive jumps of the total small shock strength.
    pub small_increase: f64,
}

impl Audit {
    fn new() -> Self {
        Self {
            max_weight_increase: f64::NEG_INFINITY,
            min_weight: f64::INFINITY,
            max_weight: f64::NEG_INFINITY,
            max_jump_ratio_error: 0.0,
            max_big: 0,
            max_big_number: 0,
            tv_excess: f64::NEG_INFINITY,
            min_state: f64::INFINITY,
            max_state: f64::NEG_INFINITY,
            small_increase: 0.0,
        }
    }

    fn observe(&mut self, s: &FrontState, tv0: f64) {
        let wp = s.weight_profile();
        self.min_weight = self.min_weight.min(wp.min());
        self.max_weight = self.max_weight.max(wp.max());
        let mut cur = wp.values()[0];
        for w in &s.waves {
            let next = cur * w.xi(&s.params);
            // jump ratio between neighbouring plateaus of a(t, .)
            if cur > 0.0 {
                let err = (next / cur - w.xi(&s.params)).abs();
                self.max_jump_ratio_error = self.max_jump_ratio_error.max(err);
            }
            cur = next;
        }
        self.max_big = self.max_big.max(s.big_count());
        self.max_big_number = self.max_big_number.max(s.big_number());
        self.tv_excess = self.tv_excess.max(s.tv() - tv0);
        for u in s.waves.iter().flat_map(|w| [w.left, w.right]).chain([s.background]) {
            self.min_state = self.min_state.min(u);
            self.max_state = self.max_state.max(u);
        }
    }
}

/// Recorded evolution of a front tracking run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// States right after time zero, every interaction and every speed
    /// refresh; motion in between is linear.
    pub segments: Vec<FrontState>,
    pub log: Vec<InteractionRecord>,
    pub perturbations: Vec<Perturbation>,
    pub audit: Audit,
    pub t_end: f64,
}

impl Trajectory {
    pub fn initial(&self) -> &FrontState {
        &self.segments[0]
    }

    /// `psi_h(t, .)` for `0 <= t <= t_end`.
    pub fn state_at(&self, t: f64) -> FrontState {
        let i = self.segments.partition_point(|s| s.time <= t).max(1) - 1;
        let mut s = self.segments[i].clone();
        s.advance_to(t.max(s.time));
        s
    }

    pub fn profile_at(&self, t: f64) -> Profile {
        self.state_at(t).profile()
    }
}

/// Next collision among neighbouring waves: `(time, left index)`.
fn next_collision(waves: &[Wave], now: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for i in 0..waves.len().saturating_sub(1) {
        let (a, b) = (&waves[i], &waves[i + 1]);
        if a.speed > b.speed {
            let t = now + ((b.position - a.position) / (a.speed - b.speed)).max(0.0);
            if best.map_or(true, |(bt, _)| t < bt) {
                best = Some((t, i));
            }
        }
    }
    best
}

/// Runs front tracking from `initial` up to `t_end`.
pub fn run(initial: &Profile, params: FrontParams, rule: &dyn SpeedRule, t_end: f64) -> Result<Trajectory> {
    if !(t_end >= 0.0) {
        return Err(Error::Precondition(format!("final time {t_end}")));
    }
    let mut state = FrontState::new(initial, params)?;
    state.refresh_speeds(rule)?;
    state.check_structure()?;
    let tv0 = state.tv();
    let mut audit = Audit::new();
    audit.observe(&state, tv0);
    let mut small_total = small_strength(&state);
    let mut traj = Trajectory { segments: alloc::vec![state.clone()], log: Vec::new(), perturbations: Vec::new(), audit, t_end };
    let mut events = 0usize;
    loop {
        let refresh = rule.next_refresh(state.time);
        let mut collision = next_collision(&state.waves, state.time);
        // split simultaneous collisions
        if let Some((tc, ic)) = collision {
            let mut bumped = false;
            for i in 0..state.waves.len().saturating_sub(1) {
                if i == ic {
                    continue;
                }
                let (a, b) = (&state.waves[i], &state.waves[i + 1]);
                if a.speed > b.speed {
                    let t = state.time + ((b.position - a.position) / (a.speed - b.speed)).max(0.0);
                    if (t - tc).abs() <= SIMULTANEOUS && i > ic {
                        state.waves[i + 1].speed += SPEED_PERTURBATION;
                        traj.perturbations.push(Perturbation {
                            time: state.time,
                            wave_index: i + 1,
                            delta: SPEED_PERTURBATION,
                        });
                        bumped = true;
                    }
                }
            }
            if bumped {
                collision = next_collision(&state.waves, state.time);
            }
        }
        let tc = collision.map_or(f64::INFINITY, |c| c.0);
        let t_next = tc.min(refresh).min(t_end);
        state.advance_to(t_next);
        if t_next == t_end && tc > t_end {
            break;
        }
        if tc <= t_next {
            let i = collision.unwrap().1;
            events += 1;
            if events > MAX_EVENTS {
                return Err(Error::Invariant { time: state.time, what: "event limit reached".into() });
            }
            // both fronts sit at the meeting point
            let meet = 0.5 * (state.waves[i].position + state.waves[i + 1].position);
            state.waves[i].position = meet;
            state.waves[i + 1].position = meet;
            let before = state.clone();
            let (w1, w2) = (state.waves[i], state.waves[i + 1]);
            let (taxonomy, out, k_added, delta_l) = resolve_interaction(&w1, &w2, state.time, &params)?;
            let position = w2.position;
            let mut outgoing = Vec::new();
            state.waves.remove(i + 1);
            state.waves.remove(i);
            match out {
                Some(mut w) => {
                    w.position = position;
                    w.speed = rule.speed(&w, state.time)?;
                    state.waves.insert(i, w);
                    outgoing.push(w);
                }
                None => {
                    state.ell_reservoir += w1.ell + w2.ell;
                    if state.waves.is_empty() {
                        state.background = w1.left;
                    }
                }
            }
            if let Some(k) = k_added {
                state.k.push(k);
            }
            if state.big_number() - before.big_number() != delta_l {
                return Err(Error::Invariant {
                    time: state.time,
                    what: format!("L changed by {} in {taxonomy:?}, expected {delta_l}", state.big_number() - before.big_number()),
                });
            }
            state.check_structure()?;
            let inc = weight_increase(&before, &state);
            traj.audit.max_weight_increase = traj.audit.max_weight_increase.max(inc);
            traj.audit.observe(&state, tv0);
            let st = small_strength(&state);
            traj.audit.small_increase += (st - small_total).max(0.0);
            small_total = st;
            traj.log.push(InteractionRecord {
                time: state.time,
                position,
                taxonomy,
                incoming: (w1, w2),
                outgoing,
                delta_l,
                k_added,
            });
            traj.segments.push(state.clone());
        } else if refresh <= t_next {
            state.refresh_speeds(rule)?;
            traj.segments.push(state.clone());
        }
        if t_next >= t_end {
            break;
        }
    }
    traj.audit.observe(&state, tv0);
    if traj.audit.max_weight_increase == f64::NEG_INFINITY {
        traj.audit.max_weight_increase = 0.0;
    }
    Ok(traj)
}

fn small_strength(s: &FrontState) -> f64 {
    s.waves.iter().filter(|w| w.kind == WaveKind::SmallShock).map(|w| w.strength).sum()
}

/// Largest increase of the weight between two states, sampled between
/// all distinct wave positions of either.
fn weight_increase(before: &FrontState, after: &FrontState) -> f64 {
    let mut xs: Vec<f64> = before.waves.iter().chain(&after.waves).map(|w| w.position).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut probes = Vec::with_capacity(xs.len() + 1);
    match (xs.first(), xs.last()) {
        (Some(&a), Some(&b)) => {
            probes.push(a - 1.0);
            probes.extend(xs.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            probes.push(b + 1.0);
        }
        _ => probes.push(0.0),
    }
    probes.iter().map(|&x| after.weight_at(x) - before.weight_at(x)).fold(f64::NEG_INFINITY, f64::max)
}

/// Product bound check: `prod (1 - a_i) >= (1/2)^(4K)` for `a_i` in
/// `[0, 1/2]` with `sum a_i <= K`. Returns `(product, bound)`.
pub fn product_bound(a: &[f64], k: f64) -> (f64, f64) {
    let product = a.iter().map(|&x| 1.0 - x).product();
    (product, libm::pow(0.5, 4.0 * k))
}
