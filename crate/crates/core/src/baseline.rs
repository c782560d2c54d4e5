//! Voxel-wise overlap scores and surface distances used for comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SurfaceDistances;
use crate::mme::aggregate::MeanStd;
use crate::mme::prf::{prf, Prf, PropertyCounts};
use crate::volume::{class_mask, BinaryMask, LabelVolume};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(gt: &BinaryMask, pred: &BinaryMask) -> Result<ConfusionCounts> {
    if gt.dims() != pred.dims() {
        return Err(Error::DimsMismatch {
            left: gt.dims(),
            right: pred.dims(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&g, &s) in gt.bits().iter().zip(pred.bits()) {
        match (g, s) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

fn ratio_or_one(num: u64, den: u64) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

pub fn dice(c: &ConfusionCounts) -> f64 {
    ratio_or_one(2 * c.tp, 2 * c.tp + c.fp + c.fn_)
}

pub fn iou(c: &ConfusionCounts) -> f64 {
    ratio_or_one(c.tp, c.tp + c.fp + c.fn_)
}

pub fn accuracy(c: &ConfusionCounts) -> f64 {
    ratio_or_one(c.tp + c.tn, c.total())
}

pub fn prf_voxel(c: &ConfusionCounts, beta: f64) -> Prf {
    prf(
        &PropertyCounts::new(c.tp as f64, c.fp as f64, c.fn_ as f64),
        beta,
    )
}

/// `1 - |FN - FP| / (2TP + FP + FN)`.
pub fn volume_similarity(c: &ConfusionCounts) -> f64 {
    let den = 2 * c.tp + c.fp + c.fn_;
    if den == 0 {
        return 1.0;
    }
    1.0 - c.fn_.abs_diff(c.fp) as f64 / den as f64
}

pub fn miou(per_class_iou: &[f64]) -> Result<f64> {
    if per_class_iou.is_empty() {
        return Err(Error::EmptyInput("per-class IoU"));
    }
    Ok(per_class_iou.iter().sum::<f64>() / per_class_iou.len() as f64)
}

/// IoU weighted by class frequency; frequencies must sum to one.
pub fn fwiou(per_class_iou: &[f64], frequencies: &[f64]) -> Result<f64> {
    if per_class_iou.is_empty() {
        return Err(Error::EmptyInput("per-class IoU"));
    }
    if per_class_iou.len() != frequencies.len() {
        return Err(Error::InvalidParameter(
            "one frequency is needed per class".into(),
        ));
    }
    let total: f64 = frequencies.iter().sum();
    if (total - 1.0).abs() > 1e-9 || frequencies.iter().any(|&f| f < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "class frequencies must be non-negative and sum to 1, got {total}"
        )));
    }
    Ok(per_class_iou
        .iter()
        .zip(frequencies)
        .map(|(i, f)| i * f)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsdValue {
    pub tau: f64,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub confusion: ConfusionCounts,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub fbeta: f64,
    pub dice: f64,
    pub iou: f64,
    pub volume_similarity: f64,
    pub hd_avg: Option<f64>,
    pub hd_p95: Option<f64>,
    pub hd_max: Option<f64>,
    pub nsd: Vec<NsdValue>,
}

pub fn baseline_report(
    gt: &BinaryMask,
    pred: &BinaryMask,
    beta: f64,
    taus: &[f64],
) -> Result<BaselineReport> {
    if let Some(t) = taus.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be non-negative, got {t}"
        )));
    }
    let c = confusion(gt, pred)?;
    let p = prf_voxel(&c, beta);
    let distances = SurfaceDistances::compute(gt, pred)?;
    let hd = distances.as_ref().map(SurfaceDistances::hausdorff);
    Ok(BaselineReport {
        confusion: c,
        accuracy: accuracy(&c),
        precision: p.precision,
        recall: p.recall,
        fbeta: p.fbeta,
        dice: dice(&c),
        iou: iou(&c),
        volume_similarity: volume_similarity(&c),
        hd_avg: hd.map(|h| h.avg),
        hd_p95: hd.map(|h| h.p95),
        hd_max: hd.map(|h| h.max),
        nsd: taus
            .iter()
            .map(|&tau| NsdValue {
                tau,
                value: distances.as_ref().map(|d| d.nsd(tau)),
            })
            .collect(),
    })
}

/// One-vs-rest baselines for `class_id`.
pub fn evaluate_baselines(
    gt: &LabelVolume,
    pred: &LabelVolume,
    class_id: u32,
    beta: f64,
    taus: &[f64],
) -> Result<BaselineReport> {
    if gt.spacing() != pred.spacing() {
        return Err(Error::SpacingMismatch);
    }
    baseline_report(
        &class_mask(gt, class_id),
        &class_mask(pred, class_id),
        beta,
        taus,
    )
}

/// Mean ± std over entries that define the value, with the number skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionalSummary {
    pub stat: Option<MeanStd>,
    pub n: usize,
    pub excluded: usize,
}

impl OptionalSummary {
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let all: Vec<Option<f64>> = values.into_iter().collect();
        let present: Vec<f64> = all.iter().flatten().copied().collect();
        OptionalSummary {
            stat: MeanStd::of(&present),
            n: present.len(),
            excluded: all.len() - present.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsdSummary {
    pub tau: f64,
    #[serde(flatten)]
    pub summary: OptionalSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineAggregate {
    pub n: usize,
    pub accuracy: MeanStd,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub fbeta: MeanStd,
    pub dice: MeanStd,
    pub iou: MeanStd,
    pub volume_similarity: MeanStd,
    pub hd_avg: OptionalSummary,
    pub hd_p95: OptionalSummary,
    pub hd_max: OptionalSummary,
    pub nsd: Vec<NsdSummary>,
}

/// Image-wise averages; undefined surface distances are left out and counted.
pub fn aggregate_baselines(reports: &[BaselineReport]) -> Result<BaselineAggregate> {
    let first = reports.first().ok_or(Error::EmptyInput("baseline reports"))?;
    let taus: Vec<f64> = first.nsd.iter().map(|n| n.tau).collect();
    if reports
        .iter()
        .any(|r| r.nsd.iter().map(|n| n.tau).ne(taus.iter().copied()))
    {
        return Err(Error::ParameterMismatch);
    }
    let col = |f: fn(&BaselineReport) -> f64| {
        let v: Vec<f64> = reports.iter().map(f).collect();
        MeanStd::of(&v).expect("non-empty")
    };
    Ok(BaselineAggregate {
        n: reports.len(),
        accuracy: col(|r| r.accuracy),
        precision: col(|r| r.precision),
        recall: col(|r| r.recall),
        fbeta: col(|r| r.fbeta),
        dice: col(|r| r.dice),
        iou: col(|r| r.iou),
        volume_similarity: col(|r| r.volume_similarity),
        hd_avg: OptionalSummary::of(reports.iter().map(|r| r.hd_avg)),
        hd_p95: OptionalSummary::of(reports.iter().map(|r| r.hd_p95)),
        hd_max: OptionalSummary::of(reports.iter().map(|r| r.hd_max)),
        nsd: taus
            .iter()
            .enumerate()
            .map(|(k, &tau)| NsdSummary {
                tau,
                summary: OptionalSummary::of(reports.iter().map(|r| r.nsd[k].value)),
            })
            .collect(),
    })
}
