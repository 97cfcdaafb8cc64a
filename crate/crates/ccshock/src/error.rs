use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("state {value} outside the state interval [-{bound}, {bound}]")]
    Domain { value: f64, bound: f64 },
    #[error("{curve}({u}): no root inside the state interval")]
    CurveOutOfDomain { curve: &'static str, u: f64 },
    #[error("{0} is not in the range of the tangent function")]
    OutOfRange(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("weight outside admissible range: eta_tilde(u_L) = {0} >= 0")]
    EmptyPi(f64),
    #[error("the set Pi reaches the edge of the state interval")]
    PiNotCompact,
    #[error("no maximal shock below s = {s_max} for u = {u}")]
    MaximalShockBoundary { u: f64, s_max: f64 },
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("invariant violated at t = {time}: {what}")]
    Invariant { time: f64, what: String },
    #[error("CFL number {0} outside (0, 1)")]
    Cfl(f64),
    #[error("empty window: R = {r} <= v*T = {vt}")]
    EmptyWindow { r: f64, vt: f64 },
    #[error("window [{lo}, {hi}] not covered by the grid [{grid_lo}, {grid_hi}]")]
    Window { lo: f64, hi: f64, grid_lo: f64, grid_hi: f64 },
    #[error("h = {h} too coarse: L2 distance {dist} exceeds budget {budget}")]
    RefineH { h: f64, dist: f64, budget: f64 },
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("root solver did not converge in {0} iterations")]
    NoConvergence(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
