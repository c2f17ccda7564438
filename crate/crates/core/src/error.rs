use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::config::ConfigError;
use crate::eigen::EigenError;
use crate::nurbs::NurbsError;
use crate::oracle::OracleError;
use crate::quadrature::QuadratureError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("geometry: {0}")]
    Nurbs(#[from] NurbsError),
    #[error("quadrature: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("assembly: {0}")]
    Assembly(#[from] AssemblyError),
    #[error("eigensolver: {0}")]
    Eigen(#[from] EigenError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Input(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code: 1 for input errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Context { source, .. } => source.exit_code(),
            Error::Eigen(EigenError::DimensionMismatch(..) | EigenError::ModeLength { .. }) => 1,
            Error::Eigen(_) => 2,
            Error::Assembly(AssemblyError::NonPositiveJacobian(_))
            | Error::Nurbs(NurbsError::NonPositiveJacobian { .. } | NurbsError::NotRemovable(_)) => 2,
            _ => 1,
        }
    }
}
