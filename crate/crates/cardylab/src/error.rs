use cardylab_core::cardy_oracle::OracleError;
use cardylab_core::domain_approx::{ApproxError, CheckError, DomainError};
use cardylab_core::geometry::GeomError;
use cardylab_core::percolation::PercolationError;
use serde::Serialize;

/// Harness failure with a stable machine-readable code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse domain file: {0}")]
    DomainParse(String),
    #[error("invalid domain: {0}")]
    Domain(#[from] DomainError),
    #[error("approximation failed: {0}")]
    Approx(#[from] ApproxError),
    #[error("percolation failed: {0}")]
    Percolation(#[from] PercolationError),
    #[error("conformal oracle failed: {0}")]
    Oracle(#[from] OracleError),
    #[error("audit could not run: {0}")]
    Check(#[from] CheckError),
    #[error("geometry error: {0}")]
    Geometry(#[from] GeomError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn code(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "CONFIG_INVALID",
            HarnessError::DomainParse(_) => "DOMAIN_PARSE",
            HarnessError::Domain(_) => "DOMAIN_INVALID",
            HarnessError::Approx(_) => "APPROX_FAILED",
            HarnessError::Percolation(_) => "PERCOLATION_FAILED",
            HarnessError::Oracle(_) => "ORACLE_FAILED",
            HarnessError::Check(_) => "CHECK_FAILED",
            HarnessError::Geometry(_) => "GEOMETRY_INVALID",
            HarnessError::Io(_) => "IO_ERROR",
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::DomainParse(_) => 2,
            HarnessError::Io(_) => 74,
            _ => 1,
        }
    }

    /// One-line JSON object `{"error": {"code": ..., "message": ...}}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            code: &'a str,
            message: String,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Wrapper { error: Body { code: self.code(), message: self.to_string() } })
            .expect("error serializes")
    }
}
