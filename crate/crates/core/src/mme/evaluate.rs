use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mme::cluster::cluster;
use crate::mme::prf::{prf, Prf, PropertyCounts};
use crate::mme::properties::{
    boundary_alignment, detection, distance_fields, relative_volume, total_volume, uniformity,
};
use crate::volume::{class_mask, components_with_class, BinaryMask, Connectivity, LabelVolume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "D")]
    Detection,
    #[serde(rename = "U")]
    Uniformity,
    #[serde(rename = "B")]
    Boundary,
    #[serde(rename = "T")]
    TotalVolume,
    #[serde(rename = "R")]
    RelativeVolume,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Detection,
        Property::Uniformity,
        Property::Boundary,
        Property::TotalVolume,
        Property::RelativeVolume,
    ];

    pub fn letter(&self) -> &'static str {
        match self {
            Property::Detection => "D",
            Property::Uniformity => "U",
            Property::Boundary => "B",
            Property::TotalVolume => "T",
            Property::RelativeVolume => "R",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmeParams {
    pub theta_tp: f64,
    pub theta_fp: f64,
    pub beta: f64,
    pub connectivity: Connectivity,
}

impl Default for MmeParams {
    fn default() -> Self {
        MmeParams {
            theta_tp: 0.0,
            theta_fp: 1.0,
            beta: 1.0,
            connectivity: Connectivity::TwentySix,
        }
    }
}

impl MmeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_tp >= 0.0) || !(self.theta_fp >= 0.0) {
            return Err(Error::InvalidParameter(
                "detection thresholds must be non-negative".into(),
            ));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertyScore {
    pub counts: PropertyCounts,
    pub prf: Prf,
}

/// All five properties for one image and class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmeResult {
    pub params: MmeParams,
    pub properties: BTreeMap<Property, PropertyScore>,
}

impl MmeResult {
    pub fn from_counts(params: MmeParams, counts: [PropertyCounts; 5]) -> Self {
        let properties = Property::ALL
            .iter()
            .zip(counts)
            .map(|(&p, c)| {
                (
                    p,
                    PropertyScore {
                        counts: c,
                        prf: prf(&c, params.beta),
                    },
                )
            })
            .collect();
        MmeResult { params, properties }
    }

    pub fn get(&self, property: Property) -> &PropertyScore {
        &self.properties[&property]
    }

    pub fn counts(&self, property: Property) -> &PropertyCounts {
        &self.get(property).counts
    }

    pub fn prf(&self, property: Property) -> &Prf {
        &self.get(property).prf
    }
}

/// Evaluates one class of a ground-truth / prediction pair.
pub fn evaluate_pair(
    gt: &LabelVolume,
    pred: &LabelVolume,
    class_id: u32,
    params: &MmeParams,
) -> Result<MmeResult> {
    if gt.dims() != pred.dims() {
        return Err(Error::DimsMismatch {
            left: gt.dims(),
            right: pred.dims(),
        });
    }
    if gt.spacing() != pred.spacing() {
        return Err(Error::SpacingMismatch);
    }
    evaluate_masks(
        &class_mask(gt, class_id),
        &class_mask(pred, class_id),
        class_id,
        params,
    )
}

pub fn evaluate_masks(
    gt: &BinaryMask,
    pred: &BinaryMask,
    class_id: u32,
    params: &MmeParams,
) -> Result<MmeResult> {
    params.validate()?;
    gt.check_compatible(pred)?;
    let gs = components_with_class(gt, params.connectivity, class_id);
    let ss = components_with_class(pred, params.connectivity, class_id);
    let clusters = cluster(&gs, &ss)?;
    let fields = distance_fields(&clusters)?;
    let counts = [
        detection(&clusters, params.theta_tp, params.theta_fp),
        uniformity(&clusters),
        boundary_alignment(&clusters, &fields)?,
        total_volume(&clusters, &gs, &ss),
        relative_volume(&clusters),
    ];
    Ok(MmeResult::from_counts(*params, counts))
}
