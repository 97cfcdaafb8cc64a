//! `key = value` run configuration.

use std::fmt;
use std::path::PathBuf;

use ccshock::{EntropyModel, FluxModel, Models, Profile};

/// A constant given as a number or left to calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constant {
    Value(f64),
    Auto,
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Value(v) => write!(f, "{v}"),
            Constant::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FluxChoice {
    Cubic,
    /// Coefficients in increasing degree.
    Polynomial(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    RankineHugoniot,
    Shifted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub flux: FluxChoice,
    pub bound: f64,
    pub entropy: EntropyModel,
    pub b_lo: f64,
    pub b_hi: f64,
    pub eps: f64,
    pub c0: Constant,
    pub c1: Constant,
    /// Starting `C0` for the small-shock calibration.
    pub trial_c0: f64,
    pub h: f64,
    pub mode: Mode,
    pub t_end: f64,
    pub r: f64,
    pub v: f64,
    pub dx: f64,
    pub cfl: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub state_points: usize,
    pub shock_samples: usize,
    pub rng_seed: u64,
    pub output_dir: PathBuf,
    pub u_left: Option<f64>,
    pub u_right: Option<f64>,
    /// Weight ratio of the large-shock scans.
    pub a: f64,
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
    pub delta: Vec<f64>,
    pub snapshots: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            flux: FluxChoice::Cubic,
            bound: 2.0,
            entropy: EntropyModel::Quadratic,
            b_lo: 0.5,
            b_hi: 1.5,
            eps: 0.2,
            c0: Constant::Value(1.0),
            c1: Constant::Value(0.25),
            trial_c0: 1.0,
            h: 0.05,
            mode: Mode::RankineHugoniot,
            t_end: 0.5,
            r: 2.0,
            v: 7.0,
            dx: 0.0125,
            cfl: 0.9,
            x_min: -4.0,
            x_max: 4.0,
            state_points: 2048,
            shock_samples: 100_000,
            rng_seed: 1,
            output_dir: PathBuf::from("out"),
            u_left: None,
            u_right: None,
            a: 0.05,
            breaks: Vec::new(),
            values: Vec::new(),
            delta: vec![0.1, 0.05],
            snapshots: 21,
        }
    }
}

/// A problem in the configuration text; `line` is 0 for problems not tied
/// to one line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

/// All problems found in one configuration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

const KEYS: &[&str] = &[
    "flux",
    "coefficients",
    "bound",
    "entropy",
    "b_lo",
    "b_hi",
    "eps",
    "c0",
    "c1",
    "trial_c0",
    "h",
    "mode",
    "t",
    "r",
    "v",
    "dx",
    "cfl",
    "x_min",
    "x_max",
    "state_points",
    "shock_samples",
    "rng_seed",
    "output_dir",
    "u_left",
    "u_right",
    "a",
    "breaks",
    "values",
    "delta",
    "snapshots",
];

/// Pipeline stages implied by a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    CalibrateSmall,
    CalibrateLarge,
    Run,
}

/// Parses and validates; reports every problem found, each with its line.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut cfg = RunConfig::default();
    let mut errors = Vec::new();
    // line of each key, for ordering checks
    let mut seen: Vec<(&'static str, usize)> = Vec::new();
    let mut coefficients: Option<(Vec<f64>, usize)> = None;
    let mut flux_poly = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            errors.push(ConfigError { line, message: format!("expected `key = value`, got `{body}`") });
            continue;
        };
        let key_raw = k.trim();
        let key_lower = key_raw.to_ascii_lowercase();
        let val = v.trim();
        let Some(&key) = KEYS.iter().find(|&&k| k == key_lower) else {
            errors.push(ConfigError { line, message: format!("unknown key `{key_raw}`") });
            continue;
        };
        if seen.iter().any(|(k, _)| *k == key) {
            errors.push(ConfigError { line, message: format!("duplicate key `{key_raw}`") });
            continue;
        }
        seen.push((key, line));
        let mut err = |message: String| errors.push(ConfigError { line, message });
        let num = |s: &str| -> Result<f64, String> {
            match s.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(format!("{key_raw}: malformed number `{s}`")),
            }
        };
        let list = |s: &str| -> Result<Vec<f64>, String> {
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(',').map(|p| num(p.trim())).collect()
        };
        let count = |s: &str| -> Result<usize, String> {
            s.parse::<usize>().map_err(|_| format!("{key_raw}: malformed count `{s}`"))
        };
        let constant = |s: &str| -> Result<Constant, String> {
            if s.eq_ignore_ascii_case("auto") {
                Ok(Constant::Auto)
            } else {
                num(s).map(Constant::Value)
            }
        };
        let res: Result<(), String> = (|| {
            match key {
                "flux" => match val {
                    "cubic" => cfg.flux = FluxChoice::Cubic,
                    "polynomial" => flux_poly = Some(line),
                    _ => return Err(format!("flux must be `cubic` or `polynomial`, got `{val}`")),
                },
                "coefficients" => coefficients = Some((list(val)?, line)),
                "bound" => cfg.bound = num(val)?,
                "entropy" => {
                    cfg.entropy = match val {
                        "quadratic" => EntropyModel::Quadratic,
                        "exponential" => EntropyModel::Exponential,
                        _ => return Err(format!("entropy must be `quadratic` or `exponential`, got `{val}`")),
                    }
                }
                "b_lo" => cfg.b_lo = num(val)?,
                "b_hi" => cfg.b_hi = num(val)?,
                "eps" => cfg.eps = num(val)?,
                "c0" => cfg.c0 = constant(val)?,
                "c1" => cfg.c1 = constant(val)?,
                "trial_c0" => cfg.trial_c0 = num(val)?,
                "h" => cfg.h = num(val)?,
                "mode" => {
                    cfg.mode = match val {
                        "rh" => Mode::RankineHugoniot,
                        "shifted" => Mode::Shifted,
                        _ => return Err(format!("mode must be `rh` or `shifted`, got `{val}`")),
                    }
                }
                "t" => cfg.t_end = num(val)?,
                "r" => cfg.r = num(val)?,
                "v" => cfg.v = num(val)?,
                "dx" => cfg.dx = num(val)?,
                "cfl" => cfg.cfl = num(val)?,
                "x_min" => cfg.x_min = num(val)?,
                "x_max" => cfg.x_max = num(val)?,
                "state_points" => cfg.state_points = count(val)?,
                "shock_samples" => cfg.shock_samples = count(val)?,
                "rng_seed" => cfg.rng_seed = val.parse().map_err(|_| format!("rng_seed: malformed integer `{val}`"))?,
                "output_dir" => cfg.output_dir = PathBuf::from(val),
                "u_left" => cfg.u_left = Some(num(val)?),
                "u_right" => cfg.u_right = Some(num(val)?),
                "a" => cfg.a = num(val)?,
                "breaks" => cfg.breaks = list(val)?,
                "values" => cfg.values = list(val)?,
                "delta" => cfg.delta = list(val)?,
                "snapshots" => cfg.snapshots = count(val)?,
                _ => unreachable!("key list and match agree"),
            }
            Ok(())
        })();
        if let Err(m) = res {
            err(m);
        }
    }
    match (flux_poly, coefficients) {
        (Some(_), Some((c, _))) => cfg.flux = FluxChoice::Polynomial(c),
        (Some(line), None) => {
            errors.push(ConfigError { line, message: "flux = polynomial needs `coefficients`".into() })
        }
        (None, Some((_, line))) => {
            errors.push(ConfigError { line, message: "coefficients are only used with flux = polynomial".into() })
        }
        (None, None) => {}
    }
    // ordering problems are reported on the later of the keys involved
    let at = |keys: &str| {
        keys.split('/').map(|key| seen.iter().find(|(k, _)| *k == key).map_or(0, |(_, l)| *l)).max().unwrap_or(0)
    };
    validate(&cfg, &at, &mut errors);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        errors.sort_by_key(|e| (e.line == 0, e.line));
        Err(ConfigErrors(errors))
    }
}

fn validate(cfg: &RunConfig, at: &dyn Fn(&str) -> usize, errors: &mut Vec<ConfigError>) {
    let mut check = |ok: bool, key: &str, message: String| {
        if !ok {
            errors.push(ConfigError { line: at(key), message });
        }
    };
    for (key, v) in [
        ("bound", cfg.bound),
        ("eps", cfg.eps),
        ("h", cfg.h),
        ("t", cfg.t_end),
        ("r", cfg.r),
        ("v", cfg.v),
        ("dx", cfg.dx),
        ("a", cfg.a),
        ("trial_c0", cfg.trial_c0),
    ] {
        check(v > 0.0, key, format!("{key} must be positive"));
    }
    for (key, c) in [("c0", cfg.c0), ("c1", cfg.c1)] {
        if let Constant::Value(v) = c {
            check(v > 0.0, key, format!("{key} must be positive or `auto`"));
        }
    }
    check(cfg.cfl > 0.0 && cfg.cfl < 1.0, "cfl", "cfl must lie in (0, 1)".into());
    check(cfg.a < 1.0, "a", "a must be below 1".into());
    check(cfg.b_lo > 0.0, "b_lo", "b_lo must be positive".into());
    check(cfg.b_lo < cfg.b_hi, "b_lo/b_hi", format!("b_lo = {} must be below b_hi = {}", cfg.b_lo, cfg.b_hi));
    check(cfg.b_hi <= cfg.bound, "b_hi/bound", format!("b_hi = {} exceeds the bound {}", cfg.b_hi, cfg.bound));
    check(cfg.x_min < cfg.x_max, "x_min/x_max", "x_min must be below x_max".into());
    check(cfg.h < 0.5 * cfg.eps, "h/eps", format!("h = {} must be below eps/2 = {}", cfg.h, 0.5 * cfg.eps));
    check(cfg.state_points >= 16, "state_points", "state_points must be at least 16".into());
    check(cfg.snapshots >= 2, "snapshots", "snapshots must be at least 2".into());
    if let Constant::Value(c0) = cfg.c0 {
        check(c0 * cfg.eps <= 0.5, "c0/eps", format!("C0 eps = {} must not exceed 1/2", c0 * cfg.eps));
        if let Constant::Value(c1) = cfg.c1 {
            let cap = (1.0 - c0 * cfg.eps).powi(2);
            check(c1 <= cap, "c0/c1/eps", format!("C1 = {c1} must not exceed (1 - C0 eps)^2 = {cap}"));
        }
    }
    for (key, d) in cfg.delta.iter().map(|d| ("delta", *d)) {
        check(d >= 0.0, key, "delta values must be non-negative".into());
    }
    if !cfg.values.is_empty() || !cfg.breaks.is_empty() {
        check(
            cfg.values.len() == cfg.breaks.len() + 1,
            "values",
            format!("{} values need {} breaks, got {}", cfg.values.len(), cfg.values.len().saturating_sub(1), cfg.breaks.len()),
        );
        check(cfg.breaks.windows(2).all(|w| w[0] < w[1]), "breaks", "breaks must be increasing".into());
        check(
            cfg.values.iter().all(|v| v.abs() <= cfg.bound),
            "values",
            format!("values must lie in [-{0}, {0}]", cfg.bound),
        );
    }
    for key in ["u_left", "u_right"] {
        let v = if key == "u_left" { cfg.u_left } else { cfg.u_right };
        if let Some(v) = v {
            check(v.abs() <= cfg.bound, key, format!("{key} must lie in [-{0}, {0}]", cfg.bound));
        }
    }
    if let FluxChoice::Polynomial(c) = &cfg.flux {
        if let Err(e) = FluxModel::polynomial(c, cfg.bound) {
            check(false, "coefficients", format!("coefficients: {e}"));
        }
    }
}

impl RunConfig {
    pub fn models(&self) -> Models {
        let flux = match &self.flux {
            FluxChoice::Cubic => FluxModel::cubic(self.bound),
            FluxChoice::Polynomial(c) => FluxModel::polynomial(c, self.bound),
        }
        .expect("validated flux");
        Models::new(flux, self.entropy)
    }

    /// Riemann states, with the given fallback for keys not set.
    pub fn riemann_states(&self, default: (f64, f64)) -> (f64, f64) {
        (self.u_left.unwrap_or(default.0), self.u_right.unwrap_or(default.1))
    }

    /// Initial profile: `breaks`/`values` when given, else the Riemann
    /// datum at zero.
    pub fn initial_profile(&self) -> Profile {
        if self.values.is_empty() {
            let (l, r) = self.riemann_states((1.2, 0.7));
            Profile::riemann(l, r, 0.0)
        } else {
            Profile::new(self.breaks.clone(), self.values.clone()).expect("validated profile")
        }
    }

    pub fn plan(&self) -> Vec<Stage> {
        let mut stages = Vec::new();
        if self.c0 == Constant::Auto {
            stages.push(Stage::CalibrateSmall);
        }
        if self.c1 == Constant::Auto {
            stages.push(Stage::CalibrateLarge);
        }
        stages.push(Stage::Run);
        stages
    }

    /// Canonical `key = value` listing of every setting.
    pub fn echo(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let opt = |v: Option<f64>| v.map_or("default".to_string(), |x| x.to_string());
        let flux = match &self.flux {
            FluxChoice::Cubic => "cubic".to_string(),
            FluxChoice::Polynomial(c) => format!("polynomial\ncoefficients = {}", list(c)),
        };
        let mode = match self.mode {
            Mode::RankineHugoniot => "rh",
            Mode::Shifted => "shifted",
        };
        [
            format!("flux = {flux}"),
            format!("bound = {}", self.bound),
            format!("entropy = {}", self.entropy.name()),
            format!("b_lo = {}", self.b_lo),
            format!("b_hi = {}", self.b_hi),
            format!("eps = {}", self.eps),
            format!("C0 = {}", self.c0),
            format!("C1 = {}", self.c1),
            format!("trial_c0 = {}", self.trial_c0),
            format!("h = {}", self.h),
            format!("mode = {mode}"),
            format!("T = {}", self.t_end),
            format!("R = {}", self.r),
            format!("v = {}", self.v),
            format!("dx = {}", self.dx),
            format!("cfl = {}", self.cfl),
            format!("x_min = {}", self.x_min),
            format!("x_max = {}", self.x_max),
            format!("state_points = {}", self.state_points),
            format!("shock_samples = {}", self.shock_samples),
            format!("rng_seed = {}", self.rng_seed),
            format!("output_dir = {}", self.output_dir.display()),
            format!("u_left = {}", opt(self.u_left)),
            format!("u_right = {}", opt(self.u_right)),
            format!("a = {}", self.a),
            format!("breaks = {}", list(&self.breaks)),
            format!("values = {}", list(&self.values)),
            format!("delta = {}", list(&self.delta)),
            format!("snapshots = {}", self.snapshots),
        ]
        .join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_fills_defaults() {
        let cfg = parse_config("flux = cubic\nentropy = quadratic\nh = 0.05\n").unwrap();
        assert_eq!(cfg.h, 0.05);
        assert_eq!(cfg.eps, RunConfig::default().eps);
        assert_eq!(cfg.plan(), vec![Stage::Run]);
    }

    #[test]
    fn negative_eps_is_reported_with_its_line() {
        let errs = parse_config("# comment\neps = -1\n").unwrap_err();
        assert!(errs.0.iter().any(|e| e.line == 2 && e.message == "eps must be positive"), "{errs}");
    }

    #[test]
    fn auto_constant_adds_a_calibration_stage() {
        let cfg = parse_config("C0 = auto\n").unwrap();
        assert_eq!(cfg.plan(), vec![Stage::CalibrateSmall, Stage::Run]);
        let cfg = parse_config("C0 = auto\nc1 = auto").unwrap();
        assert_eq!(cfg.plan(), vec![Stage::CalibrateSmall, Stage::CalibrateLarge, Stage::Run]);
    }

    #[test]
    fn every_error_is_listed() {
        let text = "eps = 0.2\nfoo = 1\nh = abc\nb_lo = 1.6\ncfl = 2 # too big\n";
        let errs = parse_config(text).unwrap_err();
        let lines: Vec<usize> = errs.0.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![2, 3, 4, 5], "{errs}");
    }

    #[test]
    fn comments_lists_and_polynomials() {
        let cfg = parse_config(
            "flux = polynomial # u^3 - u\ncoefficients = 0, -1, 0, 1\nvalues = 0.8, 1.2, 0.7\nbreaks = -0.5, 0.25\n",
        )
        .unwrap();
        assert_eq!(cfg.flux, FluxChoice::Polynomial(vec![0.0, -1.0, 0.0, 1.0]));
        assert_eq!(cfg.initial_profile().breaks(), &[-0.5, 0.25]);
        assert!(parse_config("flux = polynomial\n").is_err());
        assert!(parse_config("values = 1, 2\n").is_err());
        assert!(parse_config("eps = 0.2\neps = 0.3\n").is_err());
        assert!(parse_config("garbage line\n").is_err());
    }

    #[test]
    fn front_parameter_coupling() {
        assert!(parse_config("eps = 0.2\nh = 0.15\n").is_err());
        assert!(parse_config("C0 = 4\neps = 0.2\n").is_err());
        assert!(parse_config("C0 = 1\nC1 = 0.9\n").is_err());
    }
}
