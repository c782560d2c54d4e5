use std::path::PathBuf;

use crate::io::fixture::FixtureError;
use crate::io::nifti::NiftiError;
use crate::volume::Dims;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("voxel spacing must be strictly positive, got ({0}, {1}, {2})")]
    InvalidSpacing(f64, f64, f64),

    #[error("grid dimensions must be positive, got {0}")]
    InvalidDims(Dims),

    #[error("expected {expected} voxels for the grid, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("incompatible grids: {left} vs {right}")]
    DimsMismatch { left: Dims, right: Dims },

    #[error("incompatible voxel spacing between inputs")]
    SpacingMismatch,

    #[error("distance field is undefined for an empty seed set")]
    EmptySeeds,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no normalized distance field covers voxel {voxel} of ground-truth segment {segment}")]
    MissingDistanceField { segment: u32, voxel: usize },

    #[error("results were computed with different parameters")]
    ParameterMismatch,

    #[error(transparent)]
    Nifti(#[from] NiftiError),

    #[error(transparent)]
    Fixture(#[from] FixtureError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
