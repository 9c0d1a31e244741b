use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid hyperboloid point: {0}")]
    InvalidPoint(String),
    #[error("degenerate cycle: {0}")]
    DegenerateCycle(String),
    #[error("cycles are identical")]
    IdenticalCycles,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("inadmissible profile at theta = {theta}: {reason}")]
    Admissibility { theta: f64, reason: String },
    #[error("state left the admissible set at theta = {theta}")]
    Integration { theta: f64 },
    #[error("no lune: {0}")]
    NoLune(String),
    #[error("region is unbounded")]
    UnboundedRegion,
    #[error("region is empty or has no interior: {0}")]
    EmptyRegion(String),
    #[error("curvature mismatch: expected {expected}, cycle {index} has {found}")]
    CurvatureMismatch {
        expected: f64,
        found: f64,
        index: usize,
    },
    #[error("polygon generation failed after {attempts} attempts")]
    Generation { attempts: usize },
    #[error("profile is not bang-bang at theta = {theta} (R = {radius})")]
    NotBangBang { theta: f64, radius: f64 },
    #[error("linear program failed: {0}")]
    LinearProgram(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
