use std::path::PathBuf;

/// Errors surfaced by mesh I/O, sampling and the detection pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unreadable file {path}: {source}")]
    UnreadableFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed mesh file {path}: {detail}")]
    MalformedMesh { path: PathBuf, detail: String },
    #[error("empty mesh after cleaning")]
    EmptyMesh,
    #[error("face index {index} out of range (vertex count {vertex_count})")]
    FaceIndexOutOfRange { index: usize, vertex_count: usize },
    #[error("sample target {0} too small (minimum 4)")]
    SampleTargetTooSmall(usize),
    #[error("sample target {target} too large for mesh area {area}")]
    SampleTargetTooLarge { target: usize, area: f64 },
    #[error("degenerate segment: contact coincides with center of mass")]
    DegenerateSegment,
    #[error("all planes score zero hits")]
    NoSurroundingStructure,
    #[error("hang record has no contacts")]
    EmptyContacts,
    #[error("empty caged point set")]
    EmptyCagedSet,
    #[error("invalid config field {field}: {detail}")]
    InvalidConfig { field: String, detail: String },
    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("shape resolution {0} too low for a watertight mesh")]
    ResolutionTooLow(usize),
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
