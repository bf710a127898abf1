use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing manifest: {0}")]
    MissingManifest(PathBuf),

    #[error("unreadable raster {path}: {source}")]
    Raster {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("schema violation in {file}: {message}")]
    Schema { file: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "template ({template_w}x{template_h}) is larger than the search window ({window_w}x{window_h})"
    )]
    TemplateTooLarge {
        template_w: u32,
        template_h: u32,
        window_w: u32,
        window_h: u32,
    },

    #[error("detection {detection_id} is not on capture {capture_id}")]
    UnknownDetection {
        detection_id: String,
        capture_id: String,
    },

    #[error("detection {0} has a zero-area bounding box")]
    DegenerateTemplate(String),

    #[error("unknown ignore id {0}")]
    UnknownIgnore(String),

    #[error("invalid ignore record: {0}")]
    InvalidIgnore(String),

    #[error("capture sets differ: {0}")]
    CaptureSetMismatch(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(file: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            file: file.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
