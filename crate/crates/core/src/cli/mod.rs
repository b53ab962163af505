//! The `edqueue` command line.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 IO, 4 no usable data.

pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::fitting::{
    compare, fit_curve, Alpha, CurveData, FitOptions, FitResult, ModelSpec, Weighting,
};
use crate::ingest::{self, ExclusionReason, IngestError};
use crate::rng::replica_seed;
use crate::sim::{classify_regime, simulate, SimError, SimulationConfig, SimulationTrace};
use crate::stats::{self, Binning, Histogram, StatsError, DEFAULT_BIN_WIDTH};
use report::{comparison_report, fit_report, KvReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "edqueue", version, about = "Editorial queue simulator and waiting-time fitter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the queue model from a config file.
    Simulate(SimulateArgs),
    /// Ingest submission records and build the waiting-time histogram.
    Analyze(AnalyzeArgs),
    /// Fit model curves to a histogram CSV or a sample file.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Independent runs with derived seeds, concatenated in replica order.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub replicas: u32,
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Lognormal,
    Plcutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Unweighted,
    Poisson,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Histogram CSV (`bin_left,bin_right,count,density`) or one value per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Cutoff power-law exponent: 1 or 1.5.
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<Alpha>,
    /// Fit both models and write a comparison report.
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Bin width used when the input is a raw sample.
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
    pub bin_width: f64,
    #[arg(long, value_enum, default_value_t = WeightingArg::Unweighted)]
    pub weighting: WeightingArg,
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    s.parse()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    EmptyData(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::EmptyData(_) => EXIT_EMPTY,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Io(e) => CliError::Io(e.to_string()),
            StatsError::EmptySample => CliError::EmptyData(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Fit(a) => cmd_fit(a),
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

struct Outputs<'a> {
    dir: &'a Path,
}

impl<'a> Outputs<'a> {
    fn create(dir: &'a Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self { dir })
    }

    fn write_with(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| io_err(&path, e))
    }

    fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        self.write_with(name, |w| w.write_all(text.as_bytes()))
    }
}

fn manifest(command: &str, started_at: &str) -> KvReport {
    let mut m = KvReport::new();
    m.push("command", command)
        .push("tool_version", TOOL_VERSION)
        .push("started_at", started_at);
    m
}

fn linear_binning(width: f64) -> Result<Binning, CliError> {
    if width.is_finite() && width > 0.0 {
        Ok(Binning::Linear { width })
    } else {
        Err(CliError::Usage(format!("--bin-width must be positive, got {width}")))
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let started_at = now();
    let binning = linear_binning(args.bin_width)?;
    let text = fs::read_to_string(&args.config).map_err(|e| io_err(&args.config, e))?;
    let config = SimulationConfig::parse(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.config.display())))?;

    let configs: Vec<SimulationConfig> = (0..args.replicas as u64)
        .map(|i| SimulationConfig {
            seed: replica_seed(config.seed, i),
            ..config.clone()
        })
        .collect();
    let traces = run_replicas(&configs)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let mut sample = Vec::new();
    for t in &traces {
        sample.extend(stats::waiting_times(t, false).values);
    }
    let out = Outputs::create(&args.out)?;
    out.write_text("config.txt", &config.to_config_text())?;
    out.write_with("waiting_times.txt", |w| stats::write_sample(&sample, w))?;

    let summary_report = trace_summary(&config, &traces, &sample);
    out.write_text("trace_summary.txt", &summary_report.to_string())?;

    if sample.is_empty() {
        return Err(CliError::EmptyData(
            "no manuscript accepted after warm-up; histogram not written".into(),
        ));
    }
    let hist = stats::histogram(&sample, &binning)?;
    out.write_with("histogram.csv", |w| hist.write_csv(w))?;

    let mut m = manifest("simulate", &started_at);
    m.push("seed", config.seed)
        .push("replicas", args.replicas)
        .push("bin_width", args.bin_width)
        .push("config_file", "config.txt");
    for line in config.to_config_text().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            m.push(format!("config.{k}"), v);
        }
    }
    m.push("finished_at", now());
    out.write_text("manifest.txt", &m.to_string())
}

fn run_replicas(configs: &[SimulationConfig]) -> Result<Vec<SimulationTrace>, SimError> {
    if configs.len() == 1 {
        return Ok(vec![simulate(&configs[0])?]);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(move || simulate(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}

fn trace_summary(config: &SimulationConfig, traces: &[SimulationTrace], sample: &[f64]) -> KvReport {
    let rho = config.traffic_intensity();
    let sum = |f: &dyn Fn(&SimulationTrace) -> usize| traces.iter().map(f).sum::<usize>();
    let full_meetings = sum(&|t| {
        t.accepted_per_meeting()
            .iter()
            .skip(config.warmup_periods as usize)
            .filter(|&&n| n == config.capacity_per_meeting)
            .count()
    });
    let counted_meetings = (config.horizon_periods - config.warmup_periods) as usize * traces.len();
    let mut r = KvReport::new();
    r.push("replicas", traces.len())
        .push("traffic_intensity", rho)
        .push("regime", format!("{:?}", classify_regime(rho)).to_lowercase())
        .push("total_arrivals", sum(&|t| t.total_arrivals()))
        .push("accepted", sum(&|t| t.accepted.len()))
        .push("rejected", sum(&|t| t.rejected.len()))
        .push("in_queue_at_end", sum(&|t| t.in_queue_at_end.len()))
        .push("meetings", config.horizon_periods as usize * traces.len())
        .push("warmup_periods", config.warmup_periods)
        .push(
            "full_meeting_fraction",
            full_meetings as f64 / counted_meetings as f64,
        )
        .push("sample_count", sample.len());
    if let Ok(s) = stats::summary(sample) {
        r.push("mean_tw", s.mean)
            .push("median_tw", s.median)
            .push("max_tw", s.max);
    }
    r
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let started_at = now();
    let binning = linear_binning(args.bin_width)?;
    let file = fs::File::open(&args.records).map_err(|e| io_err(&args.records, e))?;
    let rows = ingest::parse_records(io::BufReader::new(file)).map_err(|e| match e {
        IngestError::Io(e) => io_err(&args.records, e),
        IngestError::Header(m) => CliError::Usage(format!("{}: {m}", args.records.display())),
    })?;
    let report = ingest::validate(rows);
    let sample = report.waiting_times();

    let out = Outputs::create(&args.out)?;
    let mut r = KvReport::new();
    r.push("records_total", report.total_rows())
        .push("admitted", report.admitted.len())
        .push("excluded", report.excluded.len());
    for reason in ExclusionReason::ALL {
        r.push(format!("excluded.{}", reason.key()), report.excluded_count(reason));
    }
    let summary = stats::summary(&sample).ok();
    if let Some(s) = &summary {
        r.push("count", s.count)
            .push("mean_tw", s.mean)
            .push("median_tw", s.median)
            .push("max_tw", s.max)
            .push("bin_width", args.bin_width);
    }
    out.write_text("report.txt", &r.to_string())?;
    out.write_with("exclusions.csv", |w| {
        writeln!(w, "line,id,reason")?;
        for e in &report.excluded {
            let id = e.raw.first().map(String::as_str).unwrap_or("");
            writeln!(w, "{},{},{}", e.line, csv_field(id), e.reason)?;
        }
        Ok(())
    })?;
    if summary.is_none() {
        return Err(CliError::EmptyData(format!(
            "{}: no admitted records",
            args.records.display()
        )));
    }
    out.write_with("waiting_times.txt", |w| stats::write_sample(&sample, w))?;
    let hist = stats::histogram(&sample, &binning)?;
    out.write_with("histogram.csv", |w| hist.write_csv(w))?;

    let mut m = manifest("analyze", &started_at);
    m.push("records", args.records.display())
        .push("bin_width", args.bin_width)
        .push("finished_at", now());
    out.write_text("manifest.txt", &m.to_string())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Loads fit input: a histogram CSV is detected by its header line,
/// anything else is read as a sample and binned linearly.
fn load_curve(args: &FitArgs) -> Result<(CurveData, Vec<f64>), CliError> {
    let text = fs::read_to_string(&args.input).map_err(|e| io_err(&args.input, e))?;
    let first = text.lines().map(str::trim).find(|l| !l.is_empty());
    if first == Some(&stats::HISTOGRAM_CSV_HEADER.join(",")[..]) {
        let rows = stats::read_histogram_csv(text.as_bytes())?;
        let curve = CurveData::from_rows(&rows);
        let grid = rows.iter().map(|r| 0.5 * (r.left + r.right)).collect();
        Ok((curve, grid))
    } else {
        let sample = stats::read_sample(text.as_bytes())?;
        let hist: Histogram = stats::histogram(&sample, &linear_binning(args.bin_width)?)?;
        Ok((CurveData::from_histogram(&hist), hist.centers()))
    }
}

fn fit_file_stem(spec: ModelSpec) -> String {
    match spec {
        ModelSpec::LogNormal => "lognormal".into(),
        ModelSpec::PowerLawCutoff(a) => format!("plcutoff_alpha{a}"),
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let started_at = now();
    let alpha = args.alpha.unwrap_or(Alpha::One);
    let specs: Vec<ModelSpec> = if args.all {
        vec![ModelSpec::LogNormal, ModelSpec::PowerLawCutoff(alpha)]
    } else {
        match args.model {
            Some(ModelArg::Lognormal) => vec![ModelSpec::LogNormal],
            Some(ModelArg::Plcutoff) => match args.alpha {
                Some(a) => vec![ModelSpec::PowerLawCutoff(a)],
                None => {
                    return Err(CliError::Usage(
                        "--model plcutoff requires --alpha 1 or --alpha 1.5".into(),
                    ))
                }
            },
            None => return Err(CliError::Usage("give --model or --all".into())),
        }
    };
    let (curve, grid) = load_curve(args)?;
    if curve.is_empty() {
        return Err(CliError::EmptyData(format!(
            "{}: no non-empty bins",
            args.input.display()
        )));
    }
    let options = FitOptions {
        weighting: match args.weighting {
            WeightingArg::Unweighted => Weighting::Unweighted,
            WeightingArg::Poisson => Weighting::Poisson,
        },
        ..FitOptions::default()
    };

    let out = Outputs::create(&args.out)?;
    let mut fits: Vec<FitResult> = Vec::new();
    for spec in &specs {
        let fit = fit_curve(&curve, *spec, None, &options)
            .map_err(|e| CliError::EmptyData(e.to_string()))?;
        let stem = fit_file_stem(*spec);
        let mut rep = fit_report(&fit);
        rep.push("weighting", format!("{:?}", options.weighting).to_lowercase());
        out.write_text(&format!("fit_{stem}.txt"), &rep.to_string())?;
        out.write_with(&format!("curve_{stem}.csv"), |w| {
            writeln!(w, "t,density")?;
            for &t in grid.iter().filter(|t| **t > 0.0) {
                writeln!(w, "{t},{}", fit.params.eval(t).unwrap_or(f64::NAN))?;
            }
            Ok(())
        })?;
        fits.push(fit);
    }
    if args.all {
        let cmp = compare(&fits[0], &fits[1]).map_err(|e| CliError::Usage(e.to_string()))?;
        out.write_text("comparison.txt", &comparison_report(&cmp).to_string())?;
    }

    let mut m = manifest("fit", &started_at);
    m.push("input", args.input.display())
        .push(
            "models",
            specs.iter().map(|s| fit_file_stem(*s)).collect::<Vec<_>>().join(","),
        )
        .push("bin_width", args.bin_width)
        .push("weighting", format!("{:?}", options.weighting).to_lowercase())
        .push("finished_at", now());
    out.write_text("manifest.txt", &m.to_string())
}
