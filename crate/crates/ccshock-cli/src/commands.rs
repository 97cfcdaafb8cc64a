//! Command implementations. Each command fills a [`Run`] with artifacts;
//! [`execute`] writes them together with a report and a manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ccshock::admissibility;
use ccshock::curves;
use ccshock::dissipation::{
    calibrate_large, calibrate_small, verify_large, Dissipation, ScanDensity, ShockPair, WeightSpec,
};
use ccshock::front::{self, FrontParams, RankineHugoniot, SpeedRule, Trajectory};
use ccshock::laws::{self, KruzhkovEntropy};
use ccshock::reference::cone::{cone_stability_experiment, perturbed_data, ConeParams};
use ccshock::reference::godunov::{godunov_run, GridParams, GridSolution, SliceStore};
use ccshock::reference::nonclassical::{nonclassical_demo, NonclassicalConfig};
use ccshock::reference::shift::{filippov_shift, ShiftConfig, ShiftedSpeeds};
use ccshock::roots::CurveSolverConfig;
use ccshock::sampling::{self, uniform};
use ccshock::{Error, Models, Profile};

use crate::config::{Constant, Mode, RunConfig, Stage};
use crate::output::{blob_hash, grid_dump, Cell, Csv, Report};
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Aux,
    Admissible,
    CalibrateLarge,
    CalibrateSmall,
    DissipationScan,
    Fronttrack,
    WeightTrace,
    Reference,
    Shift,
    ConeExperiment,
    NonclassicalDemo,
    VerifyAll,
}

pub const COMMANDS: &[(&str, Command)] = &[
    ("aux", Command::Aux),
    ("admissible", Command::Admissible),
    ("calibrate-large", Command::CalibrateLarge),
    ("calibrate-small", Command::CalibrateSmall),
    ("dissipation-scan", Command::DissipationScan),
    ("fronttrack", Command::Fronttrack),
    ("weight-trace", Command::WeightTrace),
    ("reference", Command::Reference),
    ("shift", Command::Shift),
    ("cone-experiment", Command::ConeExperiment),
    ("nonclassical-demo", Command::NonclassicalDemo),
    ("verify-all", Command::VerifyAll),
];

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        COMMANDS.iter().find(|(n, _)| *n == s).map(|(_, c)| *c).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        COMMANDS.iter().find(|(_, c)| c == self).map(|(n, _)| *n).expect("listed")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] crate::config::ConfigErrors),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Compute(#[from] Error),
}

impl CliError {
    /// Exit code: 1 for configuration problems, 2 for failed verification.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Compute(e) => match e {
                Error::Domain { .. }
                | Error::Precondition(_)
                | Error::Unsupported(_)
                | Error::Model(_)
                | Error::Cfl(_)
                | Error::EmptyWindow { .. }
                | Error::Window { .. } => 1,
                _ => 2,
            },
        }
    }
}

/// Artifacts of one command.
#[derive(Debug, Default)]
pub struct Run {
    pub files: Vec<(String, String)>,
    pub report: Report,
    /// Constants actually used, for the manifest.
    pub constants: Vec<(String, String)>,
    /// Set when a verification failed; written as the witness file.
    pub failure: Option<String>,
}

impl Run {
    fn file(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text));
    }

    fn constant(&mut self, key: &str, value: impl ToString) {
        self.constants.push((key.to_string(), value.to_string()));
    }

    fn fail(&mut self, why: String) {
        match &mut self.failure {
            Some(f) => {
                f.push('\n');
                f.push_str(&why);
            }
            None => self.failure = Some(why),
        }
    }
}

/// Where a run finished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Verification failed; path of the witness file.
    Failed(PathBuf),
}

/// Runs `cmd` and writes its artifacts, `report.txt` and `manifest.txt`
/// into `out`.
pub fn execute(cfg: &RunConfig, cmd: Command, out: &Path, config_text: &str) -> Result<Status, CliError> {
    let run = match compute(cfg, cmd) {
        Ok(run) => run,
        Err(CliError::Compute(e)) if CliError::Compute(e.clone()).exit_code() == 2 => {
            let mut run = Run::default();
            run.report.put("error", &e);
            run.fail(e.to_string());
            run
        }
        Err(e) => return Err(e),
    };
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(out).map_err(io(out))?;
    let mut written = Vec::new();
    let mut write = |name: &str, text: &str| -> Result<(), CliError> {
        let p = out.join(name);
        fs::write(&p, text).map_err(io(&p))?;
        written.push((name.to_string(), blob_hash(text.as_bytes())));
        Ok(())
    };
    for (name, text) in &run.files {
        write(name, text)?;
    }
    let mut report = run.report.clone();
    report.put("command", cmd.name());
    report.put("status", if run.failure.is_some() { "failed" } else { "ok" });
    write("report.txt", &report.finish())?;
    if let Some(w) = &run.failure {
        write("witness.txt", &format!("{w}\n"))?;
    }
    let mut manifest = format!(
        "command = {}\nseed = {}\nconfig_hash = {}\nplan = {}\n\n[config]\n{}\n\n[constants]\n",
        cmd.name(),
        cfg.rng_seed,
        blob_hash(config_text.as_bytes()),
        cfg.plan().iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(", "),
        cfg.echo()
    );
    for (k, v) in &run.constants {
        manifest.push_str(&format!("{k} = {v}\n"));
    }
    manifest.push_str("\n[artifacts]\n");
    for (name, hash) in &written {
        manifest.push_str(&format!("{name} = {hash}\n"));
    }
    let p = out.join("manifest.txt");
    fs::write(&p, manifest).map_err(io(&p))?;
    Ok(match run.failure {
        Some(_) => Status::Failed(out.join("witness.txt")),
        None => Status::Ok,
    })
}

/// Runs a command without touching the file system.
pub fn compute(cfg: &RunConfig, cmd: Command) -> Result<Run, CliError> {
    let m = cfg.models();
    let mut run = Run::default();
    run.constant("bound", cfg.bound);
    run.constant("flux", m.flux.name());
    run.constant("entropy", m.entropy.name());
    match cmd {
        Command::Aux => aux(cfg, &m, &mut run)?,
        Command::Admissible => admissible(cfg, &m, &mut run)?,
        Command::CalibrateLarge => calibrate_large_cmd(cfg, &m, &mut run)?,
        Command::CalibrateSmall => calibrate_small_cmd(cfg, &m, &mut run)?,
        Command::DissipationScan => dissipation_scan(cfg, &m, &mut run)?,
        Command::Fronttrack => fronttrack(cfg, &m, &mut run)?,
        Command::WeightTrace => weight_trace(cfg, &m, &mut run)?,
        Command::Reference => reference(cfg, &m, &mut run)?,
        Command::Shift => shift(cfg, &m, &mut run)?,
        Command::ConeExperiment => cone(cfg, &m, &mut run)?,
        Command::NonclassicalDemo => nonclassical(cfg, &m, &mut run)?,
        Command::VerifyAll => verify_all(cfg, &mut run),
    }
    Ok(run)
}

fn density(cfg: &RunConfig) -> ScanDensity {
    ScanDensity { state_points: cfg.state_points, shock_samples: cfg.shock_samples }
}

fn curve_cfg() -> CurveSolverConfig {
    CurveSolverConfig::default()
}

fn aux(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let c = curve_cfg();
    let mut csv = Csv::new(&["u", "phi_tangent", "phi_flat0", "phi_sharp0"]);
    let n = (16.0 * cfg.bound).round() as i64;
    for i in -n..=n {
        let u = i as f64 / 16.0;
        let tan = curves::phi_tangent(&m.flux, u, &c).unwrap_or(f64::NAN);
        let (flat, sharp) = if u > 0.0 {
            (
                curves::phi_flat0(&m.entropy, &m.flux, u, &c).unwrap_or(f64::NAN),
                curves::phi_sharp0(&m.entropy, &m.flux, u, &c).unwrap_or(f64::NAN),
            )
        } else {
            (f64::NAN, f64::NAN)
        };
        csv.nums(&[u, tan, flat, sharp]);
    }
    run.file("aux.csv", csv.finish());
    if 1.0 <= cfg.bound {
        run.report.num("phi_flat0(1)", curves::phi_flat0(&m.entropy, &m.flux, 1.0, &c)?);
        run.report.num("phi_tangent(1)", curves::phi_tangent(&m.flux, 1.0, &c)?);
    }
    Ok(())
}

fn admissible(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let mut csv = Csv::new(&["u_minus", "u_plus", "sigma", "oleinik", "e_eta", "eta_entropic"]);
    let grid = sampling::linspace(-cfg.bound, cfg.bound, 41);
    for &a in &grid {
        for &b in &grid {
            if a == b {
                continue;
            }
            let ole = admissibility::is_oleinik(&m.flux, a, b)?;
            let e = m.dissipation(a, b);
            csv.row(&[
                Cell::Num(a),
                Cell::Num(b),
                Cell::Num(m.sigma(a, b)),
                Cell::Int(ole as i64),
                Cell::Num(e),
                Cell::Int((e <= admissibility::ENTROPY_TOL) as i64),
            ]);
        }
    }
    run.file("admissible.csv", csv.finish());
    // closed-form Kruzhkov predicate against the entropy sign
    let c = curve_cfg();
    let mut rng = sampling::rng(cfg.rng_seed);
    let samples = 10_000;
    let mut disagreements = Vec::new();
    for _ in 0..samples {
        let um = uniform(&mut rng, 0.01 * cfg.bound, cfg.bound);
        let up = uniform(&mut rng, -cfg.bound, um);
        let k = uniform(&mut rng, -cfg.bound, um);
        let sign = laws::entropy_dissipation(&m.flux, &KruzhkovEntropy { k }, um, up)? <= admissibility::ENTROPY_TOL;
        match admissibility::is_kruzhkov_entropic(&m.flux, um, up, k, &c) {
            Ok(v) if v == sign => {}
            other => disagreements.push(format!("u_minus = {um}, u_plus = {up}, k = {k}: {other:?}")),
        }
    }
    run.report.put("kruzhkov_samples", samples);
    run.report.put("kruzhkov_disagreements", disagreements.len());
    if !disagreements.is_empty() {
        run.fail(disagreements.join("\n"));
    }
    Ok(())
}

fn riemann_shock(cfg: &RunConfig, m: &Models) -> Result<ShockPair, CliError> {
    let (l, r) = cfg.riemann_states((1.0, 0.0));
    Ok(ShockPair::new(m, l, r)?)
}

fn calibrate_large_cmd(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let shock = riemann_shock(cfg, m)?;
    let cal = calibrate_large(m, &shock, cfg.eps, &density(cfg), cfg.rng_seed)?;
    run.constant("a_star", cal.a_star);
    run.report.num("u_left", shock.u_l);
    run.report.num("u_right", shock.u_r);
    run.report.num("a_star", cal.a_star);
    run.report.put("steps", cal.steps);
    large_scan_report(&mut run.report, &cal.scan);
    Ok(())
}

fn large_scan_report(r: &mut Report, scan: &ccshock::dissipation::LargeScan) {
    if let Some(pi) = scan.pi {
        r.num("pi_lo", pi.lo);
        r.num("pi_hi", pi.hi);
    }
    r.num("max_d_cont", scan.max_d_cont);
    r.num("max_d_rh_near", scan.max_d_rh_near);
    r.num("max_d_rh_far", scan.max_d_rh_far);
    r.put("accepted_near", scan.accepted_near);
}

fn calibrate_small_cmd(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let cal = calibrate_small(m, cfg.b_lo, cfg.b_hi, cfg.trial_c0, &density(cfg))?;
    run.constant("C0", cal.c0);
    run.report.num("C0", cal.c0);
    run.report.num("s0_max", cal.s0_max);
    run.report.num("K", cal.k);
    run.report.num("max_d_max", cal.max_d_max);
    run.report.put("scans", cal.scans);
    Ok(())
}

fn dissipation_scan(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let shock = riemann_shock(cfg, m)?;
    let d = Dissipation::new(m, shock, WeightSpec::Large(cfg.a))?;
    let pi = d.compute_pi()?;
    let mut csv = Csv::new(&["u", "eta_tilde", "d_cont", "d_max"]);
    for u in sampling::linspace(pi.lo, pi.hi, cfg.state_points) {
        csv.nums(&[u, d.eta_tilde(u)?, d.d_cont(u)?, d.d_max(u).unwrap_or(f64::NAN)]);
    }
    run.file("dissipation.csv", csv.finish());
    run.constant("a", cfg.a);
    let scan = verify_large(m, &shock, cfg.a, cfg.eps, &density(cfg), cfg.rng_seed)?;
    large_scan_report(&mut run.report, &scan);
    if let Some(f) = scan.failure {
        run.fail(format!("{f}; witness {:?}", scan.witness));
    }
    Ok(())
}

/// Front tracking constants, calibrating those set to `auto`.
fn front_params(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<FrontParams, CliError> {
    let mut c0 = 1.0;
    let mut c1 = 0.25;
    for stage in cfg.plan() {
        match stage {
            Stage::CalibrateSmall => {
                c0 = calibrate_small(m, cfg.b_lo, cfg.b_hi, cfg.trial_c0, &density(cfg))?.c0;
            }
            Stage::CalibrateLarge => {
                let shock = ShockPair::new(m, cfg.b_hi, cfg.b_lo)?;
                c1 = calibrate_large(m, &shock, cfg.eps, &density(cfg), cfg.rng_seed)?.a_star;
            }
            Stage::Run => {}
        }
    }
    if let Constant::Value(v) = cfg.c0 {
        c0 = v;
    }
    if let Constant::Value(v) = cfg.c1 {
        c1 = v;
    }
    if c0 * cfg.eps > 0.5 {
        return Err(CliError::Usage(format!("calibrated C0 = {c0} gives C0 eps > 1/2; lower eps")));
    }
    // the weight monotonicity needs C1 <= (1 - C0 eps)^2
    c1 = c1.min((1.0 - c0 * cfg.eps).powi(2));
    let p = FrontParams::new(m, cfg.eps, cfg.h, c0, c1, cfg.b_lo, cfg.b_hi)?;
    run.constant("eps", p.eps);
    run.constant("h", p.h);
    run.constant("C0", p.c0);
    run.constant("C1", p.c1);
    run.constant("lambda_hat", p.lambda_hat);
    Ok(p)
}

fn grid(cfg: &RunConfig) -> GridParams {
    GridParams { x_min: cfg.x_min, x_max: cfg.x_max, dx: cfg.dx, cfl: cfg.cfl }
}

fn track(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(Profile, FrontParams, Trajectory), CliError> {
    let p = front_params(cfg, m, run)?;
    let u0 = cfg.initial_profile();
    let psi0 = front::discretize_profile(&u0, p.h)?;
    let tr = match cfg.mode {
        Mode::RankineHugoniot => front::run(&psi0, p, &RankineHugoniot { models: m }, cfg.t_end)?,
        Mode::Shifted => {
            let g = grid(cfg);
            let wild = godunov_run(m, &g, g.averages_of_profile(&u0), cfg.t_end, SliceStore::Every(1), &[])?;
            let rule = ShiftedSpeeds::new(m, &wild, p);
            let tr = front::run(&psi0, p, &rule as &dyn SpeedRule, cfg.t_end)?;
            run.report.put("shift_fallbacks", rule.fallbacks());
            tr
        }
    };
    Ok((u0, p, tr))
}

fn audit(run: &mut Run, p: &FrontParams, tr: &Trajectory) {
    let a = &tr.audit;
    let tv0 = tr.initial().tv();
    let r = &mut run.report;
    r.num("tv0", tv0);
    r.num("tv_excess", a.tv_excess);
    r.num("min_state", a.min_state);
    r.num("max_state", a.max_state);
    r.num("min_weight", a.min_weight);
    r.num("max_weight", a.max_weight);
    r.num("weight_floor", p.log_weight_floor(tv0).exp());
    r.num("max_weight_increase", a.max_weight_increase);
    r.num("max_jump_ratio_error", a.max_jump_ratio_error);
    r.put("max_big", a.max_big);
    r.put("big_bound", p.max_big(tv0));
    r.put("interactions", tr.log.len());
    r.put("perturbations", tr.perturbations.len());
    let mut bad = Vec::new();
    if a.tv_excess > 0.0 {
        bad.push(format!("total variation grew by {}", a.tv_excess));
    }
    if a.max_weight_increase > verify::WEIGHT_TOL {
        bad.push(format!("weight grew by {} at an interaction", a.max_weight_increase));
    }
    if a.max_jump_ratio_error > verify::WEIGHT_TOL {
        bad.push(format!("jump ratio error {}", a.max_jump_ratio_error));
    }
    if a.max_weight > 1.0 || a.min_weight.ln() < p.log_weight_floor(tv0) {
        bad.push(format!("weight range [{}, {}] outside [c, 1]", a.min_weight, a.max_weight));
    }
    if a.max_big as u64 > p.max_big(tv0) {
        bad.push(format!("{} big shocks", a.max_big));
    }
    if !bad.is_empty() {
        run.fail(bad.join("\n"));
    }
}

fn fronttrack(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let (_, p, tr) = track(cfg, m, run)?;
    let mut log = Csv::new(&["time", "position", "case", "delta_l", "k_added"]);
    for rec in &tr.log {
        log.row(&[
            Cell::Num(rec.time),
            Cell::Num(rec.position),
            Cell::Text(rec.taxonomy.name()),
            Cell::Int(rec.delta_l),
            Cell::Num(rec.k_added.unwrap_or(f64::NAN)),
        ]);
    }
    run.file("interactions.csv", log.finish());
    let end = tr.state_at(cfg.t_end);
    let mut waves = Csv::new(&["kind", "left", "right", "strength", "position", "speed", "ell"]);
    for w in &end.waves {
        waves.row(&[
            Cell::Text(w.kind.name()),
            Cell::Num(w.left),
            Cell::Num(w.right),
            Cell::Num(w.strength),
            Cell::Num(w.position),
            Cell::Num(w.speed),
            Cell::Int(w.ell as i64),
        ]);
    }
    run.file("waves.csv", waves.finish());
    audit(run, &p, &tr);
    Ok(())
}

fn weight_trace(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let (_, p, tr) = track(cfg, m, run)?;
    let mut csv = Csv::new(&["t", "x_from", "x_to", "a"]);
    for t in sampling::linspace(0.0, cfg.t_end, cfg.snapshots) {
        let w = tr.state_at(t).weight_profile();
        let b = w.breaks();
        for (i, &a) in w.values().iter().enumerate() {
            let from = if i == 0 { f64::NEG_INFINITY } else { b[i - 1] };
            let to = b.get(i).copied().unwrap_or(f64::INFINITY);
            csv.row(&[Cell::Num(t), Cell::Num(from), Cell::Num(to), Cell::Num(a)]);
        }
    }
    run.file("weight.csv", csv.finish());
    audit(run, &p, &tr);
    Ok(())
}

fn reference(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let g = grid(cfg);
    let u0 = cfg.initial_profile();
    let ks = sampling::linspace(u0.min(), u0.max(), 9);
    let probe = godunov_run(m, &g, g.averages_of_profile(&u0), cfg.t_end, SliceStore::Ends, &[])?;
    let steps = (cfg.t_end / probe.dt).ceil().max(1.0) as usize;
    let every = (steps / (cfg.snapshots - 1)).max(1);
    let sol = godunov_run(m, &g, g.averages_of_profile(&u0), cfg.t_end, SliceStore::Every(every), &ks)?;
    run.file("grid.txt", grid_dump(sol.x_min, sol.dx, &sol.slices));
    run.constant("dx", sol.dx);
    run.constant("dt", sol.dt);
    run.report.num("dt", sol.dt);
    run.report.put("slices", sol.slices.len());
    run.report.num("max_entropy_residual", sol.max_entropy_residual);
    run.report.num("max_conservation_error", sol.max_conservation_error);
    if sol.max_entropy_residual > 1e-12 {
        run.fail(format!("discrete entropy residual {}", sol.max_entropy_residual));
    }
    Ok(())
}

fn shift(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let shock = riemann_shock(cfg, m)?;
    let g = grid(cfg);
    let wild: GridSolution = godunov_run(
        m,
        &g,
        g.averages_of_profile(&Profile::riemann(shock.u_l, shock.u_r, 0.0)),
        cfg.t_end,
        SliceStore::Every(1),
        &[],
    )?;
    let d = Dissipation::new(m, shock, WeightSpec::Large(cfg.a))?;
    let pi = d.compute_pi()?;
    let qc = d.q_control(&pi, 256);
    let sc = ShiftConfig::new(m, &pi, qc.c2);
    run.constant("a", cfg.a);
    run.constant("C2", qc.c2);
    let path = filippov_shift(m, &wild, &sc, 0.0, 0.0, cfg.t_end)?;
    let mut csv = Csv::new(&["t", "h"]);
    for &(t, h) in &path.samples {
        csv.nums(&[t, h]);
    }
    run.file("shift.csv", csv.finish());
    let (t, h) = path.end();
    run.report.num("pi_lo", pi.lo);
    run.report.num("pi_hi", pi.hi);
    run.report.num("c2", qc.c2);
    run.report.num("t_end", t);
    run.report.num("h_end", h);
    run.report.num("shock_position", shock.speed * t);
    run.report.num("lipschitz_bound", path.lipschitz_bound);
    run.report.put("truncated", path.truncated);
    let steep = path.samples.windows(2).find(|w| (w[1].1 - w[0].1).abs() > path.lipschitz_bound * (w[1].0 - w[0].0) * (1.0 + 1e-12));
    if let Some(w) = steep {
        run.fail(format!("path speed above the Lipschitz bound between {:?} and {:?}", w[0], w[1]));
    }
    Ok(())
}

fn cone(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let fp = front_params(cfg, m, run)?;
    let u0 = cfg.initial_profile();
    let params = ConeParams { r: cfg.r, v: cfg.v, t_end: cfg.t_end, grid: grid(cfg), front: fp, snapshots: cfg.snapshots };
    let mut summary = Csv::new(&["delta", "delta_measured", "inv_m", "distance", "constant", "max_increase", "violations"]);
    for (i, &delta) in cfg.delta.iter().enumerate() {
        let wild0 = perturbed_data(&u0, &params.grid, params.r, delta);
        let r = cone_stability_experiment(m, &u0, wild0, &params)?;
        let mut series = Csv::new(&["t", "functional"]);
        for &(t, e) in &r.functional {
            series.nums(&[t, e]);
        }
        run.file(&format!("functional_{i}.csv"), series.finish());
        summary.row(&[
            Cell::Num(delta),
            Cell::Num(r.delta),
            Cell::Num(r.inv_m),
            Cell::Num(r.distance),
            Cell::Num(r.constant),
            Cell::Num(r.max_increase),
            Cell::Int(r.violations as i64),
        ]);
        run.report.num(&format!("constant_{i}"), r.constant);
        run.report.put(&format!("shift_fallbacks_{i}"), r.shift_fallbacks);
        run.report.num(&format!("budget_rate_{i}"), r.budget_rate);
    }
    run.file("cone.csv", summary.finish());
    Ok(())
}

fn nonclassical(cfg: &RunConfig, m: &Models, run: &mut Run) -> Result<(), CliError> {
    let (l, r) = cfg.riemann_states((1.0, 0.02));
    let nc = NonclassicalConfig { t_end: 1.0, ..NonclassicalConfig::default() };
    let rep = nonclassical_demo(m, l, r, &nc)?;
    let mut csv = Csv::new(&["m", "speed_1", "speed_2", "rh_1", "rh_2", "e_eta_1", "e_eta_2", "admissible", "margin"]);
    for c in &rep.candidates {
        csv.row(&[
            Cell::Num(c.m),
            Cell::Num(c.speeds[0]),
            Cell::Num(c.speeds[1]),
            Cell::Num(c.rh_residuals[0]),
            Cell::Num(c.rh_residuals[1]),
            Cell::Num(c.dissipations[0]),
            Cell::Num(c.dissipations[1]),
            Cell::Int(c.admissible as i64),
            Cell::Num(c.margin),
        ]);
    }
    run.file("nonclassical.csv", csv.finish());
    run.report.num("u_left", l);
    run.report.num("u_right", r);
    run.report.num("phi_flat0", rep.phi_flat0);
    run.report.num("m_lo", rep.m_range.0);
    run.report.num("m_hi", rep.m_range.1);
    run.report.put("admissible", rep.admissible().count());
    run.report.num("family_spread", rep.family_spread);
    match rep.best() {
        Some(b) if b.margin > 0.0 => {
            run.report.num("best_m", b.m);
            run.report.num("margin", b.margin);
        }
        _ => run.fail("no admissible solution differs from the Kruzhkov solution".into()),
    }
    Ok(())
}

fn verify_all(cfg: &RunConfig, run: &mut Run) {
    let outcomes = verify::run_all(cfg.rng_seed);
    let text: String = outcomes.iter().map(|o| format!("{o}\n")).collect();
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.to_string()).collect();
    run.report.put("criteria", outcomes.len());
    run.report.put("passed", outcomes.len() - failed.len());
    run.file("acceptance.txt", text);
    if !failed.is_empty() {
        run.fail(failed.join("\n"));
    }
}
