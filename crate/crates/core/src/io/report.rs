//! Evaluation reports: per-entry results plus per-class and macro aggregates.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::{aggregate_baselines, BaselineAggregate, BaselineReport};
use crate::error::{Error, Result};
use crate::mme::{aggregate, macro_average, MeanStd, MmeAggregate, MmeParams, MmeResult, Property};
use crate::volume::Connectivity;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Settings shared by every entry of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub theta_tp: f64,
    pub theta_fp: f64,
    pub beta: f64,
    pub connectivity: Connectivity,
    pub taus: Vec<f64>,
}

impl RunParams {
    pub fn new(mme: MmeParams, taus: Vec<f64>) -> Self {
        RunParams {
            theta_tp: mme.theta_tp,
            theta_fp: mme.theta_fp,
            beta: mme.beta,
            connectivity: mme.connectivity,
            taus,
        }
    }

    pub fn mme(&self) -> MmeParams {
        MmeParams {
            theta_tp: self.theta_tp,
            theta_fp: self.theta_fp,
            beta: self.beta,
            connectivity: self.connectivity,
        }
    }
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams::new(MmeParams::default(), vec![1.0, 5.0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub image_id: String,
    pub class_id: u32,
    pub params: RunParams,
    pub mme: Option<MmeResult>,
    pub baseline: Option<BaselineReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFailure {
    pub image_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAggregate {
    pub class_id: u32,
    pub n: usize,
    pub mme: Option<MmeAggregate>,
    pub baseline: Option<BaselineAggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateBlock {
    pub n_entries: usize,
    pub per_class: Vec<ClassAggregate>,
    pub macro_mme: Option<MmeAggregate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub params: RunParams,
    pub entries: Vec<ReportEntry>,
    pub failures: Vec<PairFailure>,
    pub aggregate: AggregateBlock,
}

impl ReportDocument {
    /// Sorts entries by (image, class) and computes the aggregate block.
    pub fn build(
        params: RunParams,
        mut entries: Vec<ReportEntry>,
        mut failures: Vec<PairFailure>,
    ) -> Result<Self> {
        entries.sort_by(|a, b| (&a.image_id, a.class_id).cmp(&(&b.image_id, b.class_id)));
        failures.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        let aggregate = aggregate_entries(&entries)?;
        Ok(ReportDocument {
            schema_version: SCHEMA_VERSION,
            params,
            entries,
            failures,
            aggregate,
        })
    }

    pub fn entry(&self, image_id: &str, class_id: u32) -> Option<&ReportEntry> {
        self.entries
            .iter()
            .find(|e| e.image_id == image_id && e.class_id == class_id)
    }
}

pub fn aggregate_entries(entries: &[ReportEntry]) -> Result<AggregateBlock> {
    let classes: BTreeSet<u32> = entries.iter().map(|e| e.class_id).collect();
    let mut per_class = Vec::new();
    for class_id in classes {
        let of_class: Vec<&ReportEntry> = entries.iter().filter(|e| e.class_id == class_id).collect();
        let mme: Vec<MmeResult> = of_class.iter().filter_map(|e| e.mme.clone()).collect();
        let base: Vec<BaselineReport> = of_class.iter().filter_map(|e| e.baseline.clone()).collect();
        per_class.push(ClassAggregate {
            class_id,
            n: of_class.len(),
            mme: if mme.is_empty() { None } else { Some(aggregate(&mme)?) },
            baseline: if base.is_empty() {
                None
            } else {
                Some(aggregate_baselines(&base)?)
            },
        });
    }
    let class_mme: Vec<MmeAggregate> = per_class.iter().filter_map(|c| c.mme.clone()).collect();
    Ok(AggregateBlock {
        n_entries: entries.len(),
        macro_mme: if class_mme.is_empty() {
            None
        } else {
            Some(macro_average(&class_mme)?)
        },
        per_class,
    })
}

pub fn write_report(doc: &ReportDocument, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(doc).map_err(|e| Error::Serialize(e.to_string()))?;
            s.push('\n');
            s.into_bytes()
        }
        ReportFormat::Csv => entries_csv(doc)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ReportDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Serialize(e.to_string()))
}

/// `%g`-style rendering with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

fn baseline_header(taus: &[f64]) -> Vec<String> {
    let mut h: Vec<String> = [
        "dice",
        "iou",
        "volume_similarity",
        "accuracy",
        "voxel_precision",
        "voxel_recall",
        "voxel_fbeta",
        "hd_avg",
        "hd_p95",
        "hd_max",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(taus.iter().map(|t| format!("nsd_tau_{}", sig6(*t))));
    h
}

fn baseline_cells(b: Option<&BaselineReport>, n_tau: usize) -> Vec<String> {
    match b {
        None => vec![String::new(); 10 + n_tau],
        Some(b) => {
            let mut c = vec![
                sig6(b.dice),
                sig6(b.iou),
                sig6(b.volume_similarity),
                sig6(b.accuracy),
                sig6(b.precision),
                sig6(b.recall),
                sig6(b.fbeta),
                opt(b.hd_avg),
                opt(b.hd_p95),
                opt(b.hd_max),
            ];
            c.extend(b.nsd.iter().map(|n| opt(n.value)));
            c.resize(10 + n_tau, String::new());
            c
        }
    }
}

/// One row per (image, class, property); baseline columns repeat on each
/// property row. Entries without MME results get a single row with the
/// property columns left blank.
fn entries_csv(doc: &ReportDocument) -> Result<Vec<u8>> {
    let taus = &doc.params.taus;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "image_id", "class_id", "property", "tp", "fp", "fn", "precision", "recall", "fbeta",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(baseline_header(taus));
    let csv_err = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for e in &doc.entries {
        let base = baseline_cells(e.baseline.as_ref(), taus.len());
        let lead = [e.image_id.clone(), e.class_id.to_string()];
        match &e.mme {
            Some(m) => {
                for p in Property::ALL {
                    let s = m.get(p);
                    let mut row: Vec<String> = lead.to_vec();
                    row.extend([
                        p.letter().to_string(),
                        sig6(s.counts.tp),
                        sig6(s.counts.fp),
                        sig6(s.counts.fn_),
                        sig6(s.prf.precision),
                        sig6(s.prf.recall),
                        sig6(s.prf.fbeta),
                    ]);
                    row.extend(base.iter().cloned());
                    w.write_record(&row).map_err(csv_err)?;
                }
            }
            None => {
                let mut row: Vec<String> = lead.to_vec();
                row.extend(std::iter::repeat_n(String::new(), 7));
                row.extend(base);
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
}

fn push_stat(rows: &mut Vec<[String; 6]>, class: &str, metric: &str, n: usize, excluded: usize, s: Option<MeanStd>) {
    rows.push([
        class.to_string(),
        metric.to_string(),
        n.to_string(),
        excluded.to_string(),
        opt(s.map(|s| s.mean)),
        opt(s.map(|s| s.std)),
    ]);
}

fn mme_stats(rows: &mut Vec<[String; 6]>, class: &str, a: &MmeAggregate) {
    for (p, s) in &a.properties {
        for (name, m) in [("precision", s.precision), ("recall", s.recall), ("fbeta", s.fbeta)] {
            push_stat(rows, class, &format!("{}_{}", p.letter(), name), a.n, 0, Some(m));
        }
    }
}

/// Aggregate block as a table: class, metric, n, excluded, mean, std.
/// Undefined surface distances show up in the `excluded` column.
pub fn write_aggregate_csv(doc: &ReportDocument, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut rows = Vec::new();
    for c in &doc.aggregate.per_class {
        let class = c.class_id.to_string();
        if let Some(a) = &c.mme {
            mme_stats(&mut rows, &class, a);
        }
        if let Some(b) = &c.baseline {
            for (name, s) in [
                ("dice", b.dice),
                ("iou", b.iou),
                ("volume_similarity", b.volume_similarity),
                ("accuracy", b.accuracy),
                ("voxel_precision", b.precision),
                ("voxel_recall", b.recall),
                ("voxel_fbeta", b.fbeta),
            ] {
                push_stat(&mut rows, &class, name, b.n, 0, Some(s));
            }
            for (name, s) in [("hd_avg", b.hd_avg), ("hd_p95", b.hd_p95), ("hd_max", b.hd_max)] {
                push_stat(&mut rows, &class, name, s.n, s.excluded, s.stat);
            }
            for n in &b.nsd {
                let name = format!("nsd_tau_{}", sig6(n.tau));
                push_stat(&mut rows, &class, &name, n.summary.n, n.summary.excluded, n.summary.stat);
            }
        }
    }
    if let Some(m) = &doc.aggregate.macro_mme {
        mme_stats(&mut rows, "macro", m);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(["class_id", "metric", "n", "excluded", "mean", "std"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
