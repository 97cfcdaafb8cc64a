//! The acceptance suite: one check per criterion, each with its tolerance
//! and time budget pinned here.

use std::fmt;
use std::time::{Duration, Instant};

use ccshock::admissibility;
use ccshock::curves;
use ccshock::dissipation::{
    self, calibrate_large, calibrate_small, scan_small, verify_large, Dissipation, ScanDensity, ShockPair, WeightSpec,
};
use ccshock::front::{self, product_bound, FrontParams, RankineHugoniot};
use ccshock::laws::{self, KruzhkovEntropy};
use ccshock::reference::cone::{cone_stability_experiment, perturbed_data, ConeParams};
use ccshock::reference::godunov::{godunov_run, GridParams, SliceStore};
use ccshock::reference::nonclassical::{nonclassical_demo, NonclassicalConfig, DEMO_TOL};
use ccshock::roots::CurveSolverConfig;
use ccshock::sampling::{self, uniform, SampleRng};
use ccshock::{EntropyModel, FluxModel, Models, Profile};

/// Tabulated value of `phi_flat0(1)` for the exponential entropy.
pub const FLAT0_REFERENCE: f64 = -1.048;
pub const FLAT0_TOL: f64 = 5e-3;
pub const ORACLE_TOL: f64 = 1e-9;
pub const ORACLE_POINTS: usize = 1000;
pub const KRUZHKOV_SAMPLES: usize = 10_000;
pub const PI_RATIO_SPREAD: f64 = 0.25;
pub const SLOPE_TOL_PI: f64 = 0.05;
pub const RATE_SLOPE: f64 = 3.0;
pub const RATE_SLOPE_TOL: f64 = 0.15;
pub const D_MAX_PAIRS: usize = 1000;
pub const D_MAX_POINTS: usize = 512;
pub const FRONT_RUNS: usize = 20;
pub const LIPSCHITZ_SLACK: f64 = 1.01;
pub const WEIGHT_TOL: f64 = 1e-12;
pub const CONVERGENCE_FRACTION: f64 = 0.02;
/// Largest admissible `distance / (delta + 1/m)` in the cone experiment,
/// and the largest spread (max over min) of that ratio across runs.
pub const CONE_CONSTANT: f64 = 1.0;
pub const CONE_SPREAD: f64 = 2.0;
pub const NONCLASSICAL_MARGIN: f64 = 0.1;
pub const PRODUCT_SETS: usize = 10_000;

/// One acceptance criterion.
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub budget: Duration,
    check: fn(u64) -> Result<String, String>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:>2} {:<28} {:>8.2}s / {:>4}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

impl Criterion {
    /// Runs the check; exceeding the time budget is a failure.
    pub fn run(&self, seed: u64) -> Outcome {
        let start = Instant::now();
        let res = (self.check)(seed);
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match res {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        if elapsed > self.budget {
            passed = false;
            detail = format!("over time budget; {detail}");
        }
        Outcome { id: self.id, name: self.name, passed, detail, elapsed, budget: self.budget }
    }
}

pub fn criteria() -> Vec<Criterion> {
    let c = |id, name, secs, check| Criterion { id, name, budget: Duration::from_secs(secs), check };
    vec![
        c(1, "phi_flat0 reference value", 1, flat0_reference),
        c(2, "closed-form oracles", 1, closed_form_oracles),
        c(3, "Kruzhkov equivalence", 5, kruzhkov_equivalence),
        c(4, "Pi geometry", 10, pi_geometry),
        c(5, "small-shock rate", 30, small_shock_rate),
        c(6, "D_max certification", 60, d_max_certification),
        c(7, "large-shock calibration", 60, large_calibration),
        c(8, "front tracking structure", 120, front_structure),
        c(9, "convergence to Kruzhkov", 300, convergence),
        c(10, "cone stability", 600, cone_stability),
        c(11, "non-uniqueness demo", 60, non_uniqueness),
        c(12, "weight product bound", 5, product_bound_sets),
    ]
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    criteria().iter().map(|c| c.run(seed)).collect()
}

fn cubic() -> FluxModel {
    FluxModel::cubic(2.0).expect("valid bound")
}

fn quadratic() -> Models {
    Models::new(cubic(), EntropyModel::Quadratic)
}

fn exponential() -> Models {
    Models::new(cubic(), EntropyModel::Exponential)
}

fn ok_if(pass: bool, detail: String) -> Result<String, String> {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<E: fmt::Display>(err: E) -> String {
    err.to_string()
}

fn flat0_reference(_: u64) -> Result<String, String> {
    let v = curves::phi_flat0(&EntropyModel::Exponential, &cubic(), 1.0, &CurveSolverConfig::default()).map_err(e)?;
    ok_if((v - FLAT0_REFERENCE).abs() <= FLAT0_TOL, format!("phi_flat0(1) = {v:.6}"))
}

fn closed_form_oracles(_: u64) -> Result<String, String> {
    let f = cubic();
    let cfg = CurveSolverConfig::default();
    let mut tan_err: f64 = 0.0;
    for u in sampling::linspace(-2.0, 2.0, ORACLE_POINTS) {
        tan_err = tan_err.max((curves::phi_tangent(&f, u, &cfg).map_err(e)? + 0.5 * u).abs());
    }
    // companion(k, u) = -u - k needs |u + k| <= M; u and k on [-1, 1]
    let mut comp_err: f64 = 0.0;
    let side = (ORACLE_POINTS as f64).sqrt().ceil() as usize;
    for u in sampling::linspace(-1.0, 1.0, side) {
        for k in sampling::linspace(-1.0, 1.0, side) {
            comp_err = comp_err.max((curves::companion(&f, k, u, &cfg).map_err(e)? + u + k).abs());
        }
    }
    let flat = curves::phi_flat0(&EntropyModel::Quadratic, &f, 1.0, &cfg).map_err(e)?;
    let flat_err = (flat + 1.0).abs();
    ok_if(
        tan_err < ORACLE_TOL && comp_err < ORACLE_TOL && flat_err < ORACLE_TOL,
        format!("tangent {tan_err:.1e}, companion {comp_err:.1e}, phi_flat0(1) {flat_err:.1e}"),
    )
}

fn kruzhkov_equivalence(seed: u64) -> Result<String, String> {
    let f = cubic();
    let cfg = CurveSolverConfig::default();
    let mut rng = sampling::rng(seed);
    let mut disagree = 0;
    let mut first = None;
    for _ in 0..KRUZHKOV_SAMPLES {
        let um = uniform(&mut rng, 0.01, 2.0);
        let up = uniform(&mut rng, -2.0, um);
        let k = uniform(&mut rng, -2.0, um);
        let sign = laws::entropy_dissipation(&f, &KruzhkovEntropy { k }, um, up).map_err(e)? <= admissibility::ENTROPY_TOL;
        let agree = matches!(admissibility::is_kruzhkov_entropic(&f, um, up, k, &cfg), Ok(v) if v == sign);
        if !agree {
            disagree += 1;
            first.get_or_insert((um, up, k));
        }
    }
    ok_if(disagree == 0, format!("{disagree} disagreements in {KRUZHKOV_SAMPLES} samples, first {first:?}"))
}

fn pi_geometry(_: u64) -> Result<String, String> {
    let m = quadratic();
    let shock = ShockPair::new(&m, 1.0, 0.0).map_err(e)?;
    let mut ratios = Vec::new();
    for a in [1e-1, 1e-2, 1e-3, 1e-4] {
        let pi = Dissipation::new(&m, shock, WeightSpec::Large(a)).map_err(e)?.compute_pi().map_err(e)?;
        ratios.push(pi.diam() / a.sqrt());
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    let spread = (hi - lo) / hi;
    let small = ShockPair::new(&m, 1.0, 1.0 - 1e-7).map_err(e)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for c in [1e2, 1e3, 1e4, 1e5] {
        let pi = Dissipation::new(&m, small, WeightSpec::Small(c)).map_err(e)?.compute_pi().map_err(e)?;
        xs.push(c.ln());
        ys.push(pi.diam().ln());
    }
    let slope = sampling::slope(&xs, &ys);
    ok_if(
        spread < PI_RATIO_SPREAD && (slope + 1.0).abs() <= SLOPE_TOL_PI,
        format!("diam/sqrt(a) in [{lo:.4}, {hi:.4}] (spread {spread:.3}), slope in C {slope:.4}"),
    )
}

fn small_calibration(m: &Models) -> Result<dissipation::SmallCalibration, String> {
    let density = ScanDensity { state_points: 512, shock_samples: 0 };
    calibrate_small(m, 0.5, 1.5, 1.0, &density).map_err(e)
}

fn small_shock_rate(_: u64) -> Result<String, String> {
    let m = quadratic();
    let cal = small_calibration(&m)?;
    let floor = curves::phi_tangent(&m.flux, 0.5, &CurveSolverConfig::default()).map_err(e)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for j in 0..5 {
        let s0 = 10f64.powf(-1.0 - 0.5 * j as f64);
        let scan = scan_small(&m, 1.0, s0, cal.c0, floor, 2048).map_err(e)?;
        if !(scan.max_d_cont < 0.0) {
            return Err(format!("max D_cont = {} >= 0 at s0 = {s0}", scan.max_d_cont));
        }
        xs.push(s0.ln());
        ys.push((-scan.max_d_cont).ln());
    }
    let slope = sampling::slope(&xs, &ys);
    ok_if((slope - RATE_SLOPE).abs() <= RATE_SLOPE_TOL, format!("C0 = {}, slope {slope:.4}", cal.c0))
}

fn d_max_certification(seed: u64) -> Result<String, String> {
    let m = quadratic();
    let cal = small_calibration(&m)?;
    let floor = curves::phi_tangent(&m.flux, 0.5, &CurveSolverConfig::default()).map_err(e)?;
    let mut rng = sampling::rng(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut off = 0usize;
    let mut witness = None;
    for _ in 0..D_MAX_PAIRS {
        let s0 = uniform(&mut rng, 1e-3, cal.s0_max);
        let ul = uniform(&mut rng, 0.5 + s0, 1.5);
        let scan = scan_small(&m, ul, s0, cal.c0, floor, D_MAX_POINTS).map_err(e)?;
        worst = worst.max(scan.max_d_max);
        if scan.max_d_max > dissipation::VERIFY_TOL || (scan.argmax - ul).abs() > scan.step {
            off += 1;
            witness.get_or_insert((ul, ul - s0, scan.max_d_max, scan.argmax));
        }
    }
    ok_if(
        off == 0,
        format!("C0 = {}, s0 < {}, max D_max {worst:.2e}, {off} failures, first {witness:?}", cal.c0, cal.s0_max),
    )
}

fn large_calibration(seed: u64) -> Result<String, String> {
    let m = quadratic();
    let density = ScanDensity { state_points: 512, shock_samples: 20_000 };
    let mut parts = Vec::new();
    let mut pass = true;
    for (ul, ur) in [(1.0, 0.0), (1.0, -0.4)] {
        let shock = ShockPair::new(&m, ul, ur).map_err(e)?;
        let cal = calibrate_large(&m, &shock, 0.05, &density, seed).map_err(e)?;
        let again = verify_large(&m, &shock, 0.5 * cal.a_star, 0.05, &density, seed.wrapping_add(1)).map_err(e)?;
        let ok = cal.a_star > 0.0 && cal.a_star < 1.0 && again.passed();
        pass &= ok;
        parts.push(format!("({ul}, {ur}): a* = {:.4e}, half {}", cal.a_star, if again.passed() { "ok" } else { "fails" }));
    }
    ok_if(pass, parts.join("; "))
}

/// Random piecewise-constant datum on `[0, 4]` with values in `[0.5, 1.5]`
/// and total variation at most 2.
pub fn random_datum(rng: &mut SampleRng) -> Profile {
    let n = 2 + (uniform(rng, 0.0, 8.0) as usize);
    let mut vals: Vec<f64> = (0..n).map(|_| front::snap(uniform(rng, 0.5, 1.5))).collect();
    let tv: f64 = vals.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    if tv > 2.0 {
        // pull the values towards the first one
        let base = vals[0];
        let s = 2.0 / tv;
        for v in vals.iter_mut() {
            *v = front::snap(base + (*v - base) * s);
        }
    }
    let mut x = 0.0;
    let breaks = (1..n)
        .map(|_| {
            x += uniform(rng, 0.05, 0.5);
            x
        })
        .collect();
    Profile::new(breaks, vals).expect("increasing breaks")
}

fn front_structure(seed: u64) -> Result<String, String> {
    let m = quadratic();
    let rule = RankineHugoniot { models: &m };
    let mut rng = sampling::rng(seed);
    let mut worst_lip: f64 = 0.0;
    let mut interactions = 0;
    for run_id in 0..FRONT_RUNS {
        let p = random_datum(&mut rng);
        let prm = FrontParams::new(&m, 0.1, 0.02, 1.0, 0.25, 0.5, 1.5).map_err(e)?;
        let t_end = 1.0;
        let tr = front::run(&p, prm, &rule, t_end).map_err(|err| format!("run {run_id}: {err}"))?;
        let tv0 = tr.initial().tv();
        let a = &tr.audit;
        let fail = |what: &str| Err(format!("run {run_id}: {what} ({a:?})"));
        if a.tv_excess > 0.0 {
            return fail("total variation increased");
        }
        if a.min_state < p.min() || a.max_state > p.max() {
            return fail("states left the initial range");
        }
        if a.max_big as u64 > prm.max_big(tv0) {
            return fail("too many big shocks");
        }
        if a.max_weight > 1.0 || a.min_weight.ln() < prm.log_weight_floor(tv0) {
            return fail("weight outside [c, 1]");
        }
        if a.max_weight_increase > WEIGHT_TOL {
            return fail("weight increased at an interaction");
        }
        if a.max_jump_ratio_error > WEIGHT_TOL {
            return fail("jump ratio error");
        }
        // L1 time-Lipschitz on a sampled time grid
        let times = sampling::linspace(0.0, t_end, 21);
        let profiles: Vec<Profile> = times.iter().map(|&t| tr.profile_at(t)).collect();
        let span = (-1.0, 4.0 + prm.lambda_hat * t_end + 1.0);
        for i in 0..times.len() {
            for j in i + 1..times.len() {
                let d = profiles[i].l1_distance(&profiles[j], span.0, span.1);
                let lip = d / (times[j] - times[i]) / (tv0 * prm.lambda_hat);
                worst_lip = worst_lip.max(lip);
            }
        }
        interactions += tr.log.len();
    }
    ok_if(
        worst_lip <= LIPSCHITZ_SLACK,
        format!("{FRONT_RUNS} runs, {interactions} interactions, L1 Lipschitz / (TV lambda_hat) {worst_lip:.4}"),
    )
}

fn convergence(_: u64) -> Result<String, String> {
    let m = quadratic();
    let rule = RankineHugoniot { models: &m };
    let t_end = 0.5;
    let (lo, hi) = (-2.0, 2.0);
    let data = [
        ("Riemann", Profile::riemann(1.2, 0.7, 0.0)),
        ("two-wave", Profile::new(vec![-0.5, 0.25], vec![0.8, 1.2, 0.7]).expect("profile")),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, u0) in &data {
        let mut errs = Vec::new();
        for h in [0.2, 0.1, 0.05, 0.025] {
            let prm = FrontParams::new(&m, 0.5, h, 1.0, 0.25, 0.5, 1.3).map_err(e)?;
            let psi0 = front::discretize_profile(u0, h).map_err(e)?;
            let tr = front::run(&psi0, prm, &rule, t_end).map_err(e)?;
            let g = GridParams { x_min: -4.0, x_max: 4.0, dx: h / 4.0, cfl: 0.9 };
            let s = godunov_run(&m, &g, g.averages_of_profile(u0), t_end, SliceStore::Ends, &[]).map_err(e)?;
            errs.push(tr.profile_at(t_end).l1_distance(&s.profile_at(t_end), lo, hi));
        }
        let monotone = errs.windows(2).all(|w| w[1] < w[0]);
        let last = errs[errs.len() - 1] / u0.tv();
        pass &= monotone && last < CONVERGENCE_FRACTION;
        parts.push(format!("{name}: {} (final/TV {last:.4})", fmt_list(&errs)));
    }
    ok_if(pass, parts.join("; "))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(" ")
}

/// Inputs of the cone experiment used by the acceptance run.
pub fn cone_setup(m: &Models, h: f64, dx: f64) -> Result<(Profile, ConeParams), String> {
    let u0 = Profile::new(vec![-0.5, 0.25], vec![0.8, 1.2, 0.7]).map_err(e)?;
    let p = ConeParams {
        r: 2.0,
        v: 5.5,
        t_end: 0.2,
        grid: GridParams { x_min: -4.0, x_max: 4.0, dx, cfl: 0.9 },
        front: FrontParams::new(m, 0.2, h, 1.0, 0.25, 0.5, 1.3).map_err(e)?,
        snapshots: 21,
    };
    Ok((u0, p))
}

fn cone_stability(_: u64) -> Result<String, String> {
    let m = quadratic();
    let mut cs = Vec::new();
    for (h, dx) in [(0.05, 0.0125), (0.025, 0.00625)] {
        let (u0, p) = cone_setup(&m, h, dx)?;
        for delta in [0.1, 0.05] {
            let wild0 = perturbed_data(&u0, &p.grid, p.r, delta);
            let r = cone_stability_experiment(&m, &u0, wild0, &p).map_err(e)?;
            cs.push(r.constant);
        }
    }
    let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
    ok_if(
        hi <= CONE_CONSTANT && hi / lo <= CONE_SPREAD,
        format!("distance/(delta + 1/m) = {} (max {hi:.4}, spread {:.3})", fmt_list(&cs), hi / lo),
    )
}

fn non_uniqueness(_: u64) -> Result<String, String> {
    let m = exponential();
    let r = nonclassical_demo(&m, 1.0, 0.02, &NonclassicalConfig::default()).map_err(e)?;
    let best = r.best().ok_or("no admissible middle state")?;
    let rh = best.rh_residuals.iter().copied().fold(0.0, f64::max);
    let ent = best.dissipations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ok_if(
        rh <= DEMO_TOL && ent <= DEMO_TOL && best.margin > NONCLASSICAL_MARGIN,
        format!(
            "m = {:.6} in [{:.6}, {:.6}], RH {rh:.1e}, E_eta {ent:.1e}, margin {:.4}, {} admissible",
            best.m,
            r.m_range.0,
            r.m_range.1,
            best.margin,
            r.admissible().count()
        ),
    )
}

fn product_bound_sets(seed: u64) -> Result<String, String> {
    let mut rng = sampling::rng(seed);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for i in 0..PRODUCT_SETS {
        let k = [1.0, 2.0, 4.0][i % 3];
        let n = 1 + uniform(&mut rng, 0.0, 60.0) as usize;
        let mut a: Vec<f64> = (0..n).map(|_| uniform(&mut rng, 0.0, 0.5)).collect();
        let sum: f64 = a.iter().sum();
        if sum > k {
            a.iter_mut().for_each(|x| *x *= k / sum);
        }
        let (prod, bound) = product_bound(&a, k);
        tightest = tightest.min(prod / bound);
        if prod < bound {
            violations += 1;
        }
    }
    ok_if(violations == 0, format!("{violations} violations in {PRODUCT_SETS} sets, min product/bound {tightest:.3}"))
}
