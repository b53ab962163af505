//! Waiting-time samples, summaries and normalized histograms.

use std::io;

use thiserror::Error;

use crate::sim::SimulationTrace;

/// Default linear bin width in days.
pub const DEFAULT_BIN_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSource {
    Simulation,
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaitingTimeSample {
    /// Waiting times in days, all positive.
    pub values: Vec<f64>,
    pub source: SampleSource,
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("bin width must be a positive finite number, got {0}")]
    InvalidWidth(f64),
    #[error("log-binning base must be a finite number > 1, got {0}")]
    InvalidBase(f64),
    #[error("bin edges must be finite, strictly increasing and at least two: {0}")]
    InvalidEdges(String),
    #[error("value {0} is outside the histogram range")]
    OutOfRange(f64),
    #[error("log-binning needs a positive sample value")]
    NoPositiveValue,
    #[error("malformed histogram csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Waiting time of every accepted manuscript, in acceptance order.
///
/// Manuscripts accepted at meetings `1..=warmup_periods` are dropped unless
/// `include_warmup` is set.
pub fn waiting_times(trace: &SimulationTrace, include_warmup: bool) -> WaitingTimeSample {
    let warmup = trace.config.warmup_periods;
    let values = trace
        .accepted
        .iter()
        .filter(|a| include_warmup || a.meeting_index > warmup)
        .map(|a| a.waiting_time())
        .collect();
    WaitingTimeSample {
        values,
        source: SampleSource::Simulation,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    /// Fixed width starting at 0, auto-ranged up to the maximum value.
    Linear { width: f64 },
    /// Geometric edges `min * base^k` starting at the smallest positive value.
    Log { base: f64 },
    Explicit { edges: Vec<f64> },
}

/// How a bin's representative point is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterKind {
    Arithmetic,
    Geometric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub densities: Vec<f64>,
    pub total_count: u64,
    pub center_kind: CenterKind,
}

/// Bins `values` into a histogram normalized to unit area.
///
/// Bins are half-open `[left, right)` except the last one, which is closed.
pub fn histogram(values: &[f64], binning: &Binning) -> Result<Histogram, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(StatsError::OutOfRange(bad));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (edges, center_kind) = match binning {
        Binning::Linear { width } => {
            let width = *width;
            if !(width.is_finite() && width > 0.0) {
                return Err(StatsError::InvalidWidth(width));
            }
            let n = ((max / width).ceil() as usize).max(1);
            let edges = (0..=n).map(|i| i as f64 * width).collect();
            (edges, CenterKind::Arithmetic)
        }
        Binning::Log { base } => {
            let base = *base;
            if !(base.is_finite() && base > 1.0) {
                return Err(StatsError::InvalidBase(base));
            }
            let start = values
                .iter()
                .copied()
                .filter(|v| *v > 0.0)
                .fold(f64::INFINITY, f64::min);
            if !start.is_finite() {
                return Err(StatsError::NoPositiveValue);
            }
            let mut edges = vec![start];
            let mut k = 1;
            loop {
                let e = start * base.powi(k);
                edges.push(e);
                if e >= max {
                    break;
                }
                k += 1;
            }
            (edges, CenterKind::Geometric)
        }
        Binning::Explicit { edges } => {
            check_edges(edges)?;
            (edges.clone(), CenterKind::Arithmetic)
        }
    };
    from_edges(values, edges, center_kind)
}

fn check_edges(edges: &[f64]) -> Result<(), StatsError> {
    if edges.len() < 2 {
        return Err(StatsError::InvalidEdges(format!("{} edge(s)", edges.len())));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(StatsError::InvalidEdges(format!("{edges:?}")));
    }
    Ok(())
}

fn from_edges(
    values: &[f64],
    edges: Vec<f64>,
    center_kind: CenterKind,
) -> Result<Histogram, StatsError> {
    let n = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[n]);
    let mut counts = vec![0u64; n];
    for &v in values {
        if v < lo || v > hi {
            return Err(StatsError::OutOfRange(v));
        }
        // Index of the last edge <= v, with the closed last bin absorbing `hi`.
        let idx = (edges.partition_point(|e| *e <= v) - 1).min(n - 1);
        counts[idx] += 1;
    }
    let total_count = values.len() as u64;
    let densities = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (total_count as f64 * (w[1] - w[0])))
        .collect();
    Ok(Histogram {
        bin_edges: edges,
        counts,
        densities,
        total_count,
        center_kind,
    })
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.bin_edges.windows(2).map(|w| w[1] - w[0])
    }

    /// Model evaluation point of each bin.
    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| match self.center_kind {
                CenterKind::Arithmetic => 0.5 * (w[0] + w[1]),
                CenterKind::Geometric => (w[0] * w[1]).sqrt(),
            })
            .collect()
    }

    /// Σ density × width; 1 up to rounding for any histogram built here.
    pub fn integral(&self) -> f64 {
        self.densities.iter().zip(self.widths()).map(|(d, w)| d * w).sum()
    }

    /// Joins bins `i` and `i + 1` into one.
    pub fn merge_adjacent(&self, i: usize) -> Histogram {
        assert!(i + 1 < self.n_bins(), "no bin after {i}");
        let mut out = self.clone();
        out.bin_edges.remove(i + 1);
        let merged = out.counts.remove(i + 1);
        out.counts[i] += merged;
        out.densities.remove(i + 1);
        out.densities[i] = out.counts[i] as f64
            / (self.total_count as f64 * (out.bin_edges[i + 1] - out.bin_edges[i]));
        out
    }

    /// Writes `bin_left,bin_right,count,density` rows with a header.
    pub fn write_csv<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bin_left,bin_right,count,density")?;
        for (i, w) in self.bin_edges.windows(2).enumerate() {
            writeln!(out, "{},{},{},{}", w[0], w[1], self.counts[i], self.densities[i])?;
        }
        Ok(())
    }
}

/// One row of a histogram CSV, read back without normalization checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinRow {
    pub left: f64,
    pub right: f64,
    pub count: u64,
    pub density: f64,
}

pub const HISTOGRAM_CSV_HEADER: [&str; 4] = ["bin_left", "bin_right", "count", "density"];

pub fn read_histogram_csv<R: io::Read>(input: R) -> Result<Vec<BinRow>, StatsError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| StatsError::Csv(e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != HISTOGRAM_CSV_HEADER {
        return Err(StatsError::Csv(format!(
            "expected header {}, got {}",
            HISTOGRAM_CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| StatsError::Csv(e.to_string()))?;
        let field = |k: usize| -> Result<&str, StatsError> {
            record
                .get(k)
                .ok_or_else(|| StatsError::Csv(format!("row {}: missing column {}", i + 1, k + 1)))
        };
        let float = |k: usize| -> Result<f64, StatsError> {
            field(k)?
                .parse::<f64>()
                .map_err(|e| StatsError::Csv(format!("row {}: {e}", i + 1)))
        };
        let row = BinRow {
            left: float(0)?,
            right: float(1)?,
            count: field(2)?
                .parse()
                .map_err(|e| StatsError::Csv(format!("row {}: {e}", i + 1)))?,
            density: float(3)?,
        };
        if !(row.left.is_finite() && row.right.is_finite() && row.right > row.left) {
            return Err(StatsError::Csv(format!("row {}: bad bin bounds", i + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub max: f64,
    pub median: f64,
}

/// Count, mean, maximum and median. The median of an even-sized sample is
/// the mean of the two central order statistics.
pub fn summary(values: &[f64]) -> Result<Summary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Ok(Summary {
        count: n,
        mean: sorted.iter().sum::<f64>() / n as f64,
        max: sorted[n - 1],
        median,
    })
}

/// One value per line, shortest round-trip formatting.
pub fn write_sample<W: io::Write>(values: &[f64], mut out: W) -> io::Result<()> {
    for v in values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

/// Reads one number per line; blank lines and `#` comments are skipped.
pub fn read_sample<R: io::BufRead>(input: R) -> Result<Vec<f64>, StatsError> {
    let mut values = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let v: f64 = text
            .parse()
            .map_err(|e| StatsError::Csv(format!("line {}: {e}", i + 1)))?;
        values.push(v);
    }
    Ok(values)
}
