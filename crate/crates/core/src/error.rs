use std::path::PathBuf;

use crate::hierarchy::NodeId;

/// Errors produced by the clustering engine and its file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("channel count mismatch: expected {expected}, found {found}")]
    ChannelMismatch { expected: u8, found: u8 },

    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannels(usize),

    #[error("merge increment is undefined for an empty cluster")]
    EmptyCluster,

    #[error("invalid cluster statistics: {0}")]
    InvalidStats(&'static str),

    #[error("standard deviation is undefined for zero pixels")]
    NoPixels,

    #[error("input is empty")]
    EmptyInput,

    #[error("expected {expected} merges, got {found}")]
    MergeCount { expected: usize, found: usize },

    #[error("merge {index} references node {node}, which is unknown or already merged")]
    DeadNode { index: usize, node: NodeId },

    #[error("node {0} is a leaf and cannot be divided")]
    LeafNode(NodeId),

    #[error("node {0} does not exist")]
    UnknownNode(NodeId),

    #[error("cluster count {g} is outside 1..={n}")]
    LevelOutOfRange { g: usize, n: usize },

    #[error("hierarchy is not convex ({} violating nodes)", .0.len())]
    NotConvex(Vec<NodeId>),

    #[error("hierarchies share pixel {0}")]
    OverlappingLeaves(u32),

    #[error("at least two clusters are required, found {0}")]
    TooFewClusters(usize),

    #[error("instance of {n} items exceeds the exhaustive search capacity of {max}")]
    CapacityExceeded { n: usize, max: usize },

    #[error("labels cover {labels} pixels but the image has {pixels}")]
    LabelMismatch { labels: usize, pixels: usize },

    #[error("segmentation needs the pixel grid, but the hierarchy has none")]
    MissingGrid,

    #[error("unsupported image magic number {0:?}")]
    UnsupportedMagic(String),

    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("image payload truncated: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("malformed image: {0}")]
    MalformedImage(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
