use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown catalog id `{0}`")]
    UnknownId(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("invalid singularity exponent {0} (must exceed -1)")]
    InvalidSingularity(f64),
    #[error("tolerance {0:e} outside (1e-14, 1e-2)")]
    InvalidTolerance(f64),
    #[error("first moment of the density diverges")]
    MomentDiverges,
    #[error("e(λ)/λ is not integrable at λ = 0")]
    DivisionNearThreshold,
    #[error("time tail not square integrable: fitted exponent {0:.4} <= 1/2")]
    TailUnbounded(f64),
    #[error("too few envelope points in fit window: {0} (need at least 8)")]
    TooFewPoints(usize),
    #[error("series vanishes on the fit window")]
    ZeroSeries,
    #[error("norm diverges: {0}")]
    NormDiverges(String),
    #[error("conjugate generator applied to the state has infinite norm")]
    ANormDiverges,
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("quadrature under-resolved: {0}")]
    QuadratureUnderresolved(String),
    #[error("z = {0} is within 0.1·‖H‖ of the spectrum")]
    ZNearSpectrum(String),
    #[error("flow left its domain at time {t} (position {position})")]
    DomainEscape { t: f64, position: f64 },
    #[error("flow transports the profile onto the grid boundary")]
    BoundaryContamination,
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
