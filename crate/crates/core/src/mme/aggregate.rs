//! Image-wise and class-wise averaging of results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mme::evaluate::{MmeParams, MmeResult, Property};

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// `None` for empty input. Values are sorted before summing so the
    /// result does not depend on input order.
    pub fn of(values: &[f64]) -> Option<MeanStd> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let mut sq: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        sq.sort_by(f64::total_cmp);
        let std = (sq.iter().sum::<f64>() / n).sqrt();
        Some(MeanStd { mean, std })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfSummary {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub fbeta: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmeAggregate {
    pub n: usize,
    pub params: MmeParams,
    pub properties: BTreeMap<Property, PrfSummary>,
}

/// Averages precision, recall and F-beta of each property over images.
pub fn aggregate(results: &[MmeResult]) -> Result<MmeAggregate> {
    let first = results.first().ok_or(Error::EmptyInput("results to aggregate"))?;
    if results.iter().any(|r| r.params != first.params) {
        return Err(Error::ParameterMismatch);
    }
    let properties = Property::ALL
        .iter()
        .map(|&p| {
            let col = |f: fn(&MmeResult, Property) -> f64| -> MeanStd {
                let v: Vec<f64> = results.iter().map(|r| f(r, p)).collect();
                MeanStd::of(&v).expect("non-empty")
            };
            (
                p,
                PrfSummary {
                    precision: col(|r, p| r.prf(p).precision),
                    recall: col(|r, p| r.prf(p).recall),
                    fbeta: col(|r, p| r.prf(p).fbeta),
                },
            )
        })
        .collect();
    Ok(MmeAggregate {
        n: results.len(),
        params: first.params,
        properties,
    })
}

/// Macro average across classes: the mean (and spread) of per-class means.
pub fn macro_average(per_class: &[MmeAggregate]) -> Result<MmeAggregate> {
    let first = per_class.first().ok_or(Error::EmptyInput("classes to average"))?;
    if per_class.iter().any(|a| a.params != first.params) {
        return Err(Error::ParameterMismatch);
    }
    let properties = Property::ALL
        .iter()
        .map(|&p| {
            let col = |f: fn(&PrfSummary) -> f64| -> MeanStd {
                let v: Vec<f64> = per_class.iter().map(|a| f(&a.properties[&p])).collect();
                MeanStd::of(&v).expect("non-empty")
            };
            (
                p,
                PrfSummary {
                    precision: col(|s| s.precision.mean),
                    recall: col(|s| s.recall.mean),
                    fbeta: col(|s| s.fbeta.mean),
                },
            )
        })
        .collect();
    Ok(MmeAggregate {
        n: per_class.iter().map(|a| a.n).sum(),
        params: first.params,
        properties,
    })
}
