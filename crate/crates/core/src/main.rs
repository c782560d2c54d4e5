use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mme_eval::cli::{cmd_baselines, cmd_chart, cmd_evaluate, RunConfig, EXIT_USAGE};
use mme_eval::io::{ReportFormat, RunParams};
use mme_eval::mme::MmeParams;
use mme_eval::Connectivity;

#[derive(Parser)]
#[command(name = "mme-eval", version, about = "Evaluate volumetric segmentations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Five-property scores (D, U, B, T, R) plus baseline metrics.
    Evaluate(RunArgs),
    /// Dice, IoU, volume similarity, accuracy, Hausdorff and NSD only.
    Baselines(RunArgs),
    /// Spider chart of one report entry as SVG.
    Chart {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        image: String,
        #[arg(long = "class")]
        class_id: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// Ground-truth file or directory.
    #[arg(long)]
    gt: PathBuf,
    /// Prediction file or directory (matched by file name).
    #[arg(long)]
    pred: PathBuf,
    /// Class labels to score [default: every nonzero ground-truth label].
    #[arg(long, value_delimiter = ',')]
    classes: Option<Vec<u32>>,
    #[arg(long, default_value_t = 0.0)]
    theta_tp: f64,
    #[arg(long, default_value_t = 1.0)]
    theta_fp: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// 6, 18 or 26.
    #[arg(long, default_value_t = 26)]
    connectivity: u32,
    /// NSD tolerances in mm.
    #[arg(long, value_delimiter = ',', default_value = "1,5")]
    tau: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Report format [default: from the --out extension, else json].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long, env = "MME_EVAL_JOBS")]
    jobs: Option<usize>,
}

impl RunArgs {
    fn config(self) -> Result<RunConfig, String> {
        let connectivity = Connectivity::from_count(self.connectivity).map_err(|e| e.to_string())?;
        let format = match self.format {
            Some(Format::Csv) => ReportFormat::Csv,
            Some(Format::Json) => ReportFormat::Json,
            None if self.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
                ReportFormat::Csv
            }
            None => ReportFormat::Json,
        };
        let mut c = RunConfig::new(self.gt, self.pred, self.out);
        c.classes = self.classes;
        c.params = RunParams::new(
            MmeParams {
                theta_tp: self.theta_tp,
                theta_fp: self.theta_fp,
                beta: self.beta,
                connectivity,
            },
            self.tau,
        );
        c.format = format;
        c.jobs = self.jobs.unwrap_or(0);
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let run = |args: RunArgs, f: fn(&RunConfig) -> i32| match args.config() {
        Ok(c) => f(&c),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    };
    let code = match cli.command {
        Command::Evaluate(a) => run(a, cmd_evaluate),
        Command::Baselines(a) => run(a, cmd_baselines),
        Command::Chart {
            report,
            image,
            class_id,
            out,
        } => cmd_chart(&report, &image, class_id, &out),
    };
    ExitCode::from(code as u8)
}
