use serde::{Deserialize, Serialize};

/// Possibly fractional true-positive / false-positive / false-negative mass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyCounts {
    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

impl PropertyCounts {
    pub fn new(tp: f64, fp: f64, fn_: f64) -> Self {
        PropertyCounts { tp, fp, fn_ }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub fbeta: f64,
    pub beta: f64,
}

/// Precision, recall and F-beta.
///
/// A 0/0 ratio is 1 when the other error term is also zero (nothing to find
/// and nothing predicted) and 0 otherwise.
pub fn prf(counts: &PropertyCounts, beta: f64) -> Prf {
    let PropertyCounts { tp, fp, fn_ } = *counts;
    let ratio = |den: f64, other_error: f64| {
        if den > 0.0 {
            tp / den
        } else if other_error == 0.0 {
            1.0
        } else {
            0.0
        }
    };
    let precision = ratio(tp + fp, fn_);
    let recall = ratio(tp + fn_, fp);
    let b2 = beta * beta;
    let den = b2 * precision + recall;
    let fbeta = if den > 0.0 {
        (1.0 + b2) * (recall * precision) / den
    } else {
        0.0
    };
    Prf {
        precision,
        recall,
        fbeta,
        beta,
    }
}
