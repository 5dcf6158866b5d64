use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sketch is not chainable: chain covers {covered:.1}% of stroke length (need 60%)")]
    SketchNotChainable { covered: f64 },

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("zero-length segment at index {0}")]
    ZeroLengthSegment(usize),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("image decode error")]
    Image(#[from] image::ImageError),

    #[error("json error")]
    Json(#[from] serde_json::Error),

    #[error("io error")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
