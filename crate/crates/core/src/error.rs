use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A runtime smallness or validity guard tripped.
    #[error("guard violated: {0}")]
    Guard(String),

    /// A harmonic of the linear range operator sits on (or next to) the phonon band.
    #[error("resonant harmonic l={harmonic}: symbol margin {margin:.3e}")]
    Resonance { harmonic: usize, margin: f64 },

    /// A fixed-point iteration stopped contracting.
    #[error("{stage}: iteration diverged (contraction estimate {rate:.3})")]
    Divergence { stage: &'static str, rate: f64 },

    #[error("{stage}: no convergence after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// The time integrator lost energy conservation.
    #[error("integrator energy drift {drift:.3e} exceeds bound {bound:.1e}")]
    EnergyDrift { drift: f64, bound: f64 },

    #[error("singular jacobian (smallest singular value {0:.3e})")]
    SingularJacobian(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Format(String),

    /// Failure inside a named stage of the breather pipeline.
    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Process exit codes used by the command line tool.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const GUARD: i32 = 2;
    pub const NONCONVERGENCE: i32 = 3;
    pub const IO: i32 = 4;
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::InvalidParameter(_)
            | Error::Guard(_)
            | Error::Resonance { .. }
            | Error::Divergence { .. }
            | Error::GridMismatch(_) => exit_code::GUARD,
            Error::NoConvergence { .. } | Error::SingularJacobian(_) | Error::EnergyDrift { .. } => exit_code::NONCONVERGENCE,
            Error::Io(_) | Error::Format(_) => exit_code::IO,
            Error::Stage { .. } => unreachable!("root() strips stage tags"),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
