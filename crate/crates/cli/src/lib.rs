//! Command implementations behind the `dsi-tool` binary.

pub mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use dsi_core::metrics::class_distance_sets;
use dsi_core::{
    dsi_estimate, dsi_multiclass, generate, load_cifar10_binary, load_csv, sweep, CsvOptions,
    Divergence, DsiConfig, DsiError, ErrorKind, Family, GeneratorSpec, LabelColumn, MetricKind,
    MetricSpec, SubsampleConfig, SubsetSize,
};

pub use report::{CommandEcho, ReportDocument, ReportResult, SweepRow, Timings};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "DSI_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dsi-tool", version, about = "Distance-based separability index for labeled datasets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the separability index of a dataset
    Dsi(DsiArgs),
    /// Write a synthetic two-class dataset as CSV
    Synth(SynthArgs),
    /// Sweep a generator parameter and tabulate the index
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct DsiArgs {
    /// CSV input file
    #[arg(long, required_unless_present = "cifar10", conflicts_with = "cifar10")]
    pub csv: Option<PathBuf>,
    /// CIFAR-10 binary batch files, concatenated in order
    #[arg(long, num_args = 1..)]
    pub cifar10: Vec<PathBuf>,
    /// Label column: header name or zero-based index
    #[arg(long, default_value = "label")]
    pub label_col: LabelColumn,
    /// The CSV has no header row
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long, default_value = "euclidean", value_parser = parse_metric)]
    pub metric: MetricKind,
    #[arg(long, default_value = "ks", value_parser = parse_divergence)]
    pub divergence: Divergence,
    /// Rows per random subset
    #[arg(long, conflicts_with = "fraction")]
    pub count: Option<usize>,
    /// Fraction of rows per random subset, in (0, 1]
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Number of random subsets
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here
    #[arg(long, short = 'o')]
    pub report: Option<PathBuf>,
    /// Dump every ICD/BCD set as little-endian f64 files into this directory
    #[arg(long)]
    pub spill_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Points per class
    #[arg(short = 'n', long = "points", default_value_t = 1000)]
    pub points: usize,
    /// Noise SD, or cluster SD for blobs (family default when omitted)
    #[arg(long, visible_alias = "noise")]
    pub sd: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short = 'o')]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Parameter values: comma list (`1,2.5,4`) or inclusive integer range (`1..9`)
    #[arg(long, value_parser = parse_params)]
    pub params: ParamList,
    #[arg(long, value_delimiter = ',', default_value = "euclidean", value_parser = parse_metric)]
    pub metrics: Vec<MetricKind>,
    #[arg(long, value_delimiter = ',', default_value = "ks", value_parser = parse_divergence)]
    pub divergences: Vec<Divergence>,
    #[arg(short = 'n', long = "points", default_value_t = 1000)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV table destination (standard output when omitted)
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Also write the JSON report here
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamList(pub Vec<f64>);

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: DsiError| e.to_string())
}

fn parse_divergence(s: &str) -> Result<Divergence, String> {
    s.parse().map_err(|e: DsiError| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: DsiError| e.to_string())
}

fn parse_params(s: &str) -> Result<ParamList, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(ParamList(Vec::new()));
    }
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| format!("bad range start {lo:?}"))?;
        let hi: i64 = hi.trim().parse().map_err(|_| format!("bad range end {hi:?}"))?;
        return Ok(ParamList((lo..=hi).map(|v| v as f64).collect()));
    }
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad parameter {v:?}")))
        .collect::<Result<_, _>>()
        .map(ParamList)
}

/// A failed command: exit status plus a one-line diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<DsiError> for Failure {
    fn from(e: DsiError) -> Self {
        let code = match e.kind() {
            ErrorKind::Ingestion => 1,
            ErrorKind::Validation => 2,
            ErrorKind::Numeric => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn io(path: &Path, e: impl fmt::Display) -> Self {
        Failure {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

/// Successful command output: text for standard output and an optional report.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub report: Option<ReportDocument>,
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

pub fn cmd_dsi(args: &DsiArgs, echo: CommandEcho) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let data = if let Some(path) = &args.csv {
        if !args.delimiter.is_ascii() {
            return Err(Failure::validation("delimiter must be a single ASCII character"));
        }
        let opts = CsvOptions {
            label_column: args.label_col.clone(),
            has_header: !args.no_header,
            delimiter: args.delimiter as u8,
        };
        load_csv(path, &opts)?
    } else {
        load_cifar10_binary(&args.cifar10)?
    };
    let load_secs = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let size = match (args.count, args.fraction) {
        (Some(c), _) => Some(SubsetSize::Count(c)),
        (None, Some(f)) => Some(SubsetSize::Fraction(f)),
        (None, None) if args.trials > 1 => Some(SubsetSize::Fraction(1.0)),
        (None, None) => None,
    };
    let cfg = DsiConfig {
        metric: MetricSpec::resolve(args.metric, &data)?,
        divergence: args.divergence,
        subsample: size.map(|size| SubsampleConfig {
            size,
            trials: args.trials,
            seed: args.seed,
        }),
    };

    if let Some(dir) = &args.spill_dir {
        spill(&data, &cfg.metric, dir)?;
    }

    let (stdout, result) = match cfg.subsample {
        None => {
            let r = dsi_multiclass(&data, &cfg)?;
            (format!("dsi: {:.4}", r.dsi), ReportResult::Dsi(r))
        }
        Some(sub) => {
            let est = dsi_estimate(&data, &cfg)?;
            let rows = sub.resolve(data.len())?;
            (
                format!(
                    "dsi: {:.4} ± {:.4} ({} trials of {rows} rows)",
                    est.mean, est.sd, sub.trials
                ),
                ReportResult::Estimate(est),
            )
        }
    };
    let doc = ReportDocument::new(
        echo,
        result,
        Timings {
            load_secs,
            compute_secs: start.elapsed().as_secs_f64(),
        },
    );
    if let Some(path) = &args.report {
        write_file(path, &doc.to_json())?;
    }
    Ok(Outcome {
        stdout,
        report: Some(doc),
    })
}

fn spill(data: &dsi_core::LabeledDataset, metric: &MetricSpec, dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    for (icd, bcd) in class_distance_sets(data, metric)? {
        for (prefix, sample) in [("icd", &icd), ("bcd", &bcd)] {
            let id = match sample.source() {
                dsi_core::SampleSource::Icd(c) | dsi_core::SampleSource::BcdRest(c) => c,
                dsi_core::SampleSource::BcdPair(a, _) => a,
            };
            let path = dir.join(format!("{prefix}_{id}.bin"));
            let file = fs::File::create(&path).map_err(|e| Failure::io(&path, e))?;
            sample
                .write_to(std::io::BufWriter::new(file))
                .map_err(|e| Failure::io(&path, e))?;
        }
    }
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<Outcome, Failure> {
    let spec = GeneratorSpec {
        family: args.family,
        points_per_class: args.points,
        noise_or_sd: args.sd,
        seed: args.seed,
    };
    let data = generate(&spec)?;
    data.write_csv(&args.output)?;
    Ok(Outcome {
        stdout: format!(
            "wrote {} rows ({} per class, {}) to {}",
            data.len(),
            args.points,
            args.family,
            args.output.display()
        ),
        report: None,
    })
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| e.to_string();
    let result: Result<Vec<u8>, String> = (|| {
        w.write_record(["param", "metric", "divergence", "dsi"]).map_err(io)?;
        for r in rows {
            w.write_record([
                r.param.to_string(),
                r.metric.to_string(),
                r.divergence.to_string(),
                r.dsi.to_string(),
            ])
            .map_err(io)?;
        }
        w.into_inner().map_err(|e| e.to_string())
    })();
    // writing into a Vec cannot fail
    String::from_utf8(result.expect("in-memory csv")).expect("csv is utf-8")
}

pub fn cmd_sweep(args: &SweepArgs, echo: CommandEcho) -> Result<Outcome, Failure> {
    let params = &args.params.0;
    if params.is_empty() {
        return Err(DsiError::EmptyParams.into());
    }
    if args.metrics.is_empty() || args.divergences.is_empty() {
        return Err(Failure::validation("need at least one metric and one divergence"));
    }
    let start = Instant::now();
    let base = GeneratorSpec::new(args.family, args.points, args.seed);
    let mut rows = Vec::new();
    for &metric in &args.metrics {
        for &divergence in &args.divergences {
            let out = sweep(&base, params, &DsiConfig::new(metric, divergence))?;
            rows.extend(out.into_iter().map(|(param, r)| SweepRow {
                param,
                metric,
                divergence,
                dsi: r.dsi,
            }));
        }
    }
    rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    let table = sweep_table(&rows);
    let doc = ReportDocument::new(
        echo,
        ReportResult::Sweep(rows),
        Timings {
            load_secs: 0.0,
            compute_secs: start.elapsed().as_secs_f64(),
        },
    );
    if let Some(path) = &args.report {
        write_file(path, &doc.to_json())?;
    }
    let stdout = match &args.output {
        Some(path) => {
            write_file(path, &table)?;
            format!("wrote {} rows to {}", doc_rows(&doc), path.display())
        }
        None => table.trim_end().to_string(),
    };
    Ok(Outcome {
        stdout,
        report: Some(doc),
    })
}

fn doc_rows(doc: &ReportDocument) -> usize {
    match &doc.result {
        ReportResult::Sweep(rows) => rows.len(),
        _ => 0,
    }
}

/// Runs a parsed command line. `args` is echoed into reports.
pub fn run(cli: &Cli, args: Vec<String>) -> Result<Outcome, Failure> {
    let echo = |name: &str| CommandEcho {
        name: name.to_string(),
        args: args.clone(),
    };
    match &cli.command {
        Command::Dsi(a) => cmd_dsi(a, echo("dsi")),
        Command::Synth(a) => cmd_synth(a),
        Command::Sweep(a) => cmd_sweep(a, echo("sweep")),
    }
}
