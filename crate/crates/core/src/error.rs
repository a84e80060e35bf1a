use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate polygon (zero area)")]
    DegeneratePolygon,

    #[error("negative buffer distance {0} (shrinking is unsupported)")]
    NegativeDistance(f64),

    #[error("component mask has no set pixels")]
    EmptyComponent,

    #[error("invalid raster dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no instance height supplied for instance {0}")]
    MissingHeight(u64),

    #[error("annotation has {0} violation(s)")]
    InvalidAnnotation(usize),

    #[error("polygon too thin to place a centerline sample")]
    PolygonTooThin,

    #[error("character group is empty")]
    EmptyGroup,

    #[error("group references unknown region {0}")]
    UnknownRegion(u32),

    #[error("cannot place scene: {0}")]
    Scene(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
