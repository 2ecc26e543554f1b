use std::path::PathBuf;

/// Errors produced by the try-on geometry engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("buffer length {actual} does not match {expected}")]
    BufferLength { expected: usize, actual: usize },

    #[error("unknown label id {0}")]
    UnknownLabel(u8),

    #[error("control grid side {0} is too small (need at least {1})")]
    GridTooSmall(usize, usize),

    #[error("expected {expected} control targets, got {actual}")]
    ThetaLength { expected: usize, actual: usize },

    #[error("singular thin-plate-spline system: {0}")]
    SingularSystem(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("masks are not disjoint: {overlap} overlapping pixels")]
    NotDisjoint { overlap: usize },

    #[error("alpha value {value} at pixel {index} is outside [0, 1]")]
    AlphaOutOfRange { index: usize, value: f64 },

    #[error("fill region component containing pixel ({x}, {y}) has no known boundary pixel")]
    NoKnownBoundary { x: usize, y: usize },

    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    ImageTooSmall {
        width: usize,
        height: usize,
        window: usize,
    },

    #[error("missing required keypoints: {}", .0.join(", "))]
    MissingKeypoints(Vec<&'static str>),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
