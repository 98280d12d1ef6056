use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("pose ({x}, {y}) is outside the eroded free space")]
    PoseOutsideFreeSpace { x: f64, y: f64 },
    #[error("chord {chord} m exceeds the arc diameter 2 x {radius} m")]
    ChordTooLong { chord: f64, radius: f64 },
    #[error("displacement {s} m outside the curved-reach interval [{lo}, {hi})")]
    OutOfDomain { s: f64, lo: f64, hi: f64 },
    #[error("no skeleton position lies in free space")]
    EmptyFreeSpace,
    #[error("stale skeleton cache: {0}")]
    StaleCache(String),
    #[error("repulsive gradient vanishes at ({x}, {y})")]
    ZeroGradient { x: f64, y: f64 },
    #[error("numerical divergence: {0}")]
    NumericalDivergence(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
