pub mod fixture;
pub mod nifti;
pub mod report;

use std::path::Path;

use crate::error::Result;
use crate::volume::LabelVolume;

pub use fixture::{format_fixture, parse_fixture, read_fixture, write_fixture, FixtureError};
pub use nifti::{parse_nifti, read_nifti, NiftiError, NiftiHeader};
pub use report::{
    read_report, write_aggregate_csv, write_report, PairFailure, ReportDocument, ReportEntry,
    ReportFormat, RunParams,
};

/// True for `.nii` and `.nii.gz` paths.
pub fn is_nifti_path(path: &Path) -> bool {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    name.ends_with(".nii") || name.ends_with(".nii.gz")
}

/// NIfTI for `.nii`/`.nii.gz`, the text fixture format otherwise.
pub fn read_volume(path: impl AsRef<Path>) -> Result<LabelVolume> {
    let path = path.as_ref();
    if is_nifti_path(path) {
        read_nifti(path)
    } else {
        read_fixture(path)
    }
}
