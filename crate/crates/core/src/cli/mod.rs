//! Batch front end: file pairing, per-pair evaluation and report output.

pub mod chart;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::baseline::evaluate_baselines;
use crate::error::{Error, Result};
use crate::io::report::write_aggregate_csv;
use crate::io::{read_volume, write_report, PairFailure, ReportDocument, ReportEntry, ReportFormat, RunParams};
use crate::mme::evaluate_pair;

pub use chart::{render_chart, SpiderChartSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Five-property scores plus baselines.
    Evaluate,
    /// Baselines only.
    Baselines,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// A ground-truth file, or a directory of them.
    pub gt: PathBuf,
    /// The matching prediction file or directory.
    pub pred: PathBuf,
    /// Classes to score; all nonzero ground-truth labels when `None`.
    pub classes: Option<Vec<u32>>,
    pub params: RunParams,
    pub out: PathBuf,
    pub format: ReportFormat,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(gt: impl Into<PathBuf>, pred: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            gt: gt.into(),
            pred: pred.into(),
            classes: None,
            params: RunParams::default(),
            out: out.into(),
            format: ReportFormat::Json,
            jobs: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.mme().validate()?;
        if let Some(t) = self.params.taus.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be non-negative, got {t}"
            )));
        }
        if self.classes.as_ref().is_some_and(|c| c.contains(&0)) {
            return Err(Error::InvalidParameter("class 0 is background".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub image_id: String,
    pub gt: PathBuf,
    pub pred: PathBuf,
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

fn list_files(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.path().is_file() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

/// Two files form one pair; two directories are matched by exact file name.
/// Names present on only one side are returned as failures.
pub fn pair_inputs(gt: &Path, pred: &Path) -> Result<(Vec<Pair>, Vec<PairFailure>)> {
    if gt.is_dir() != pred.is_dir() {
        return Err(Error::InvalidParameter(
            "--gt and --pred must both be files or both be directories".into(),
        ));
    }
    if !gt.is_dir() {
        return Ok((
            vec![Pair {
                image_id: file_name(gt),
                gt: gt.to_path_buf(),
                pred: pred.to_path_buf(),
            }],
            vec![],
        ));
    }
    let gt_names = list_files(gt)?;
    let pred_names = list_files(pred)?;
    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for name in &gt_names {
        if pred_names.binary_search(name).is_ok() {
            pairs.push(Pair {
                image_id: name.clone(),
                gt: gt.join(name),
                pred: pred.join(name),
            });
        } else {
            failures.push(PairFailure {
                image_id: name.clone(),
                error: "no prediction with this file name".into(),
            });
        }
    }
    for name in &pred_names {
        if gt_names.binary_search(name).is_err() {
            failures.push(PairFailure {
                image_id: name.clone(),
                error: "no ground truth with this file name".into(),
            });
        }
    }
    if pairs.is_empty() && failures.is_empty() {
        return Err(Error::EmptyInput("image pairs"));
    }
    Ok((pairs, failures))
}

/// Every requested class of one pair. Any error fails the whole pair.
pub fn evaluate_one(
    pair: &Pair,
    classes: Option<&[u32]>,
    params: &RunParams,
    mode: Mode,
) -> Result<Vec<ReportEntry>> {
    let gt = read_volume(&pair.gt)?;
    let pred = read_volume(&pair.pred)?;
    if gt.dims() != pred.dims() {
        return Err(Error::DimsMismatch {
            left: gt.dims(),
            right: pred.dims(),
        });
    }
    let classes = match classes {
        Some(c) => c.to_vec(),
        None => gt.foreground_labels(),
    };
    let mme_params = params.mme();
    classes
        .iter()
        .map(|&class_id| {
            let mme = match mode {
                Mode::Evaluate => Some(evaluate_pair(&gt, &pred, class_id, &mme_params)?),
                Mode::Baselines => None,
            };
            let baseline = evaluate_baselines(&gt, &pred, class_id, params.beta, &params.taus)?;
            Ok(ReportEntry {
                image_id: pair.image_id.clone(),
                class_id,
                params: params.clone(),
                mme,
                baseline: Some(baseline),
            })
        })
        .collect()
}

/// Evaluates all pairs on a pool of `config.jobs` threads. The document is
/// independent of scheduling: entries are sorted before aggregation.
pub fn run_batch(config: &RunConfig, mode: Mode) -> Result<ReportDocument> {
    config.validate()?;
    let (pairs, mut failures) = pair_inputs(&config.gt, &config.pred)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let classes = config.classes.as_deref();
    let results: Vec<(String, Result<Vec<ReportEntry>>)> = pool.install(|| {
        pairs
            .par_iter()
            .map(|p| (p.image_id.clone(), evaluate_one(p, classes, &config.params, mode)))
            .collect()
    });
    let mut entries = Vec::new();
    for (image_id, r) in results {
        match r {
            Ok(e) => entries.extend(e),
            Err(e) => {
                log::error!("{image_id}: {e}");
                failures.push(PairFailure {
                    image_id,
                    error: e.to_string(),
                });
            }
        }
    }
    ReportDocument::build(config.params.clone(), entries, failures)
}

/// `r.csv` becomes `r.aggregate.csv`.
pub fn aggregate_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.aggregate.csv"))
}

/// Runs a batch and writes its report. Returns the process exit code.
pub fn cmd_run(config: &RunConfig, mode: Mode) -> i32 {
    if let Err(e) = config.validate() {
        log::error!("{e}");
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let doc = match run_batch(config, mode) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    let written = write_report(&doc, config.format, &config.out).and_then(|_| match config.format {
        ReportFormat::Csv => write_aggregate_csv(&doc, aggregate_path(&config.out)),
        ReportFormat::Json => Ok(()),
    });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_FAILURE;
    }
    for f in &doc.failures {
        eprintln!("failed: {}: {}", f.image_id, f.error);
    }
    if doc.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

pub fn cmd_evaluate(config: &RunConfig) -> i32 {
    cmd_run(config, Mode::Evaluate)
}

pub fn cmd_baselines(config: &RunConfig) -> i32 {
    cmd_run(config, Mode::Baselines)
}

/// Renders the spider chart of one report entry.
pub fn cmd_chart(report: &Path, image_id: &str, class_id: u32, out: &Path) -> i32 {
    let svg = crate::io::read_report(report).and_then(|doc| {
        let entry = doc
            .entry(image_id, class_id)
            .and_then(|e| e.mme.as_ref())
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "report has no five-property entry for image {image_id:?}, class {class_id}"
                ))
            })?;
        Ok(render_chart(&SpiderChartSpec::from_result(
            entry,
            &format!("{image_id} / class {class_id}"),
        )))
    });
    let written = svg.and_then(|s| fs::write(out, s).map_err(|e| Error::io(out, e)));
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
