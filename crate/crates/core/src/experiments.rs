//! Monte-Carlo sweeps over schemes, operators, sparsities and measurement
//! ratios.
//!
//! Each `(scheme, matrix, s, log2(m/N))` cell runs `trials` independent
//! reconstructions and reports the mean and standard deviation of the dB
//! error. Every trial draws its operator, signal and dithers from seeds
//! derived from `(base_seed, matrix, N, s, m, trial)`, and the dithers also
//! from the scheme. Results do not depend on the thread count or on which
//! other cells are in the sweep. Schemes in the same cell position share the
//! operator and signal of each trial.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::operators::{butterfly_operator, gaussian_operator, partial_fourier_operator, SensingOperator};
use crate::recon::{reconstruct, ReconResult, ReconSeeds, SchemeKind, SparseSignal};
use crate::scalar::Real;
use crate::seed::{self, Stream};

pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_DIM: usize = 64;
pub const CSV_HEADER: [&str; 9] = ["scheme", "matrix", "n", "s", "log2_ratio", "m", "trials", "mean_db", "std_db"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    Fourier,
    Gaussian,
    Butterfly,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 3] = [Self::Fourier, Self::Gaussian, Self::Butterfly];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fourier => "fourier",
            Self::Gaussian => "gaussian",
            Self::Butterfly => "butterfly",
        }
    }

    fn id(self) -> u64 {
        match self {
            Self::Fourier => 1,
            Self::Gaussian => 2,
            Self::Butterfly => 3,
        }
    }

    /// Builds an `m x n` operator of this kind.
    pub fn build<T: Real>(self, n: usize, m: usize, seed: u64) -> Result<SensingOperator<T>> {
        match self {
            Self::Fourier => partial_fourier_operator(n, m, seed),
            Self::Gaussian => gaussian_operator(m, n, seed),
            Self::Butterfly => butterfly_operator(n, m, seed),
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::config("matrix", format!("unknown matrix `{s}` (expected fourier, gaussian or butterfly)"))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim_n: usize,
    pub sparsities: Vec<usize>,
    pub log2_ratios: Vec<f64>,
    pub trials: usize,
    pub schemes: Vec<SchemeKind>,
    pub matrix: Vec<MatrixKind>,
    pub base_seed: u64,
    pub threads: Threads,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dim_n: DEFAULT_DIM,
            sparsities: vec![4],
            log2_ratios: (2..=7).map(f64::from).collect(),
            trials: DEFAULT_TRIALS,
            schemes: vec![SchemeKind::Qpbpq],
            matrix: vec![MatrixKind::Fourier],
            base_seed: 0,
            threads: Threads::Auto,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            Self::One(s) => vec![s],
            Self::Many(v) => v,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawThreads {
    Count(usize),
    Named(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dim_n: Option<usize>,
    sparsities: Vec<usize>,
    log2_ratios: Vec<f64>,
    trials: Option<usize>,
    schemes: OneOrMany,
    matrix: OneOrMany,
    base_seed: Option<u64>,
    threads: Option<RawThreads>,
}

/// One plotted point: `trials` reconstructions with fixed settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub scheme: SchemeKind,
    pub matrix: MatrixKind,
    pub dim_n: usize,
    pub s: usize,
    pub log2_ratio: f64,
    pub m: usize,
}

/// Measurement count for a ratio: `round(n * 2^r)`.
pub fn measurements_for(n: usize, log2_ratio: f64) -> usize {
    (n as f64 * log2_ratio.exp2()).round() as usize
}

impl ExperimentConfig {
    /// Parses the TOML config format (keys named as the struct fields).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<config>".into(),
            message: e.to_string(),
        })?;
        let schemes = raw
            .schemes
            .into_vec()
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<_>>>()?;
        let matrix = raw
            .matrix
            .into_vec()
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<_>>>()?;
        let threads = match raw.threads {
            None => Threads::Auto,
            Some(RawThreads::Named(s)) if s.eq_ignore_ascii_case("auto") => Threads::Auto,
            Some(RawThreads::Named(s)) => {
                return Err(Error::config("threads", format!("expected \"auto\" or a count, got `{s}`")))
            }
            Some(RawThreads::Count(k)) => Threads::Fixed(k),
        };
        let cfg = Self {
            dim_n: raw.dim_n.unwrap_or(DEFAULT_DIM),
            sparsities: raw.sparsities,
            log2_ratios: raw.log2_ratios,
            trials: raw.trials.unwrap_or(DEFAULT_TRIALS),
            schemes,
            matrix,
            base_seed: raw.base_seed.unwrap_or(0),
            threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_n == 0 {
            return Err(Error::config("dim_n", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.sparsities.is_empty() {
            return Err(Error::config("sparsities", "list is empty"));
        }
        if let Some(&s) = self.sparsities.iter().find(|&&s| s == 0 || s > self.dim_n) {
            return Err(Error::config(
                "sparsities",
                format!("sparsity {s} must lie in 1..={}", self.dim_n),
            ));
        }
        if self.log2_ratios.is_empty() {
            return Err(Error::config("log2_ratios", "list is empty"));
        }
        for &r in &self.log2_ratios {
            if !r.is_finite() || measurements_for(self.dim_n, r) == 0 {
                return Err(Error::config(
                    "log2_ratios",
                    format!("ratio {r} gives no measurements for n = {}", self.dim_n),
                ));
            }
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "list is empty"));
        }
        if self.matrix.is_empty() {
            return Err(Error::config("matrix", "list is empty"));
        }
        if self.matrix.contains(&MatrixKind::Butterfly) && (self.dim_n < 2 || !self.dim_n.is_power_of_two()) {
            return Err(Error::config(
                "dim_n",
                format!("butterfly operators need a power of two >= 2, got {}", self.dim_n),
            ));
        }
        if self.threads == Threads::Fixed(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        Ok(())
    }

    /// Cells in output order: scheme, then matrix, then sparsity, then ratio.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &scheme in &self.schemes {
            for &matrix in &self.matrix {
                for &s in &self.sparsities {
                    for &r in &self.log2_ratios {
                        out.push(Cell {
                            scheme,
                            matrix,
                            dim_n: self.dim_n,
                            s,
                            log2_ratio: r,
                            m: measurements_for(self.dim_n, r),
                        });
                    }
                }
            }
        }
        out
    }
}

/// Seeds of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub operator: u64,
    pub signal: u64,
    pub recon: ReconSeeds,
}

pub fn trial_seeds(cell: &Cell, base_seed: u64, trial_index: usize) -> TrialSeeds {
    let instance = seed::derive(
        base_seed,
        &[
            cell.matrix.id(),
            cell.dim_n as u64,
            cell.s as u64,
            cell.m as u64,
            trial_index as u64,
        ],
    );
    TrialSeeds {
        operator: Stream::Operator.of(instance),
        signal: Stream::Signal.of(instance),
        recon: ReconSeeds::from_base(seed::derive(instance, &[cell.scheme.id()])),
    }
}

/// Full result of one trial.
pub fn run_trial_detailed<T: Real>(cell: &Cell, base_seed: u64, trial_index: usize) -> Result<ReconResult<T>> {
    let seeds = trial_seeds(cell, base_seed, trial_index);
    let op = cell.matrix.build::<T>(cell.dim_n, cell.m, seeds.operator)?;
    let x = SparseSignal::<T>::generate(cell.dim_n, cell.s, seeds.signal)?;
    reconstruct(cell.scheme, &op, &x, cell.s, seeds.recon)
}

/// dB error of one trial.
pub fn run_trial<T: Real>(cell: &Cell, base_seed: u64, trial_index: usize) -> Result<f64> {
    Ok(run_trial_detailed::<T>(cell, base_seed, trial_index)?.error_db)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: SchemeKind,
    pub matrix: MatrixKind,
    pub dim_n: usize,
    pub s: usize,
    pub log2_ratio: f64,
    pub m: usize,
    pub trials: usize,
    pub mean_db: f64,
    pub std_db: f64,
}

/// Arithmetic mean and sample standard deviation (zero for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every cell of `cfg` in double precision.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    run_experiment_as::<f64>(cfg)
}

pub fn run_experiment_as<T: Real>(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    cfg.validate()?;
    let cells = cfg.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let work = || -> Result<Vec<f64>> {
        jobs.par_iter()
            .map(|&(c, t)| run_trial::<T>(&cells[c], cfg.base_seed, t))
            .collect()
    };
    let errors = match cfg.threads {
        Threads::Auto => work()?,
        Threads::Fixed(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(work)?,
    };
    Ok(cells
        .iter()
        .zip(errors.chunks(cfg.trials))
        .map(|(cell, errs)| {
            let (mean_db, std_db) = mean_std(errs);
            SummaryRow {
                scheme: cell.scheme,
                matrix: cell.matrix,
                dim_n: cell.dim_n,
                s: cell.s,
                log2_ratio: cell.log2_ratio,
                m: cell.m,
                trials: cfg.trials,
                mean_db,
                std_db,
            }
        })
        .collect())
}

/// Least-squares slope of `mean_db` against `log2_ratio` (dB per octave of
/// `m`) over the rows with `log2_ratio >= min_ratio`. The selected rows must
/// share scheme, matrix and sparsity.
pub fn fit_decay_slope(rows: &[SummaryRow], min_ratio: f64) -> Result<f64> {
    let picked: Vec<&SummaryRow> = rows.iter().filter(|r| r.log2_ratio >= min_ratio).collect();
    if picked.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 rows with log2_ratio >= {min_ratio}, found {}",
            picked.len()
        )));
    }
    let first = picked[0];
    if picked
        .iter()
        .any(|r| (r.scheme, r.matrix, r.s) != (first.scheme, first.matrix, first.s))
    {
        return Err(Error::Degenerate("rows mix schemes, matrices or sparsities".into()));
    }
    let points: Vec<(f64, f64)> = picked.iter().map(|r| (r.log2_ratio, r.mean_db)).collect();
    least_squares_slope(&points)
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Result<f64> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return Err(Error::Degenerate("slope needs at least two distinct ratios".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

/// `%.6g`-style rendering: 6 significant digits, trailing zeros trimmed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Renders rows as CSV text with LF line endings.
pub fn render_csv(rows: &[SummaryRow]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for r in rows {
        let fields = [
            r.scheme.name().to_string(),
            r.matrix.name().to_string(),
            r.dim_n.to_string(),
            r.s.to_string(),
            format_sig6(r.log2_ratio),
            r.m.to_string(),
            r.trials.to_string(),
            format_sig6(r.mean_db),
            format_sig6(r.std_db),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(render_csv(rows).as_bytes()).map_err(io_err(path))?;
    file.flush().map_err(io_err(path))
}

pub fn read_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => parse_err(format!("{other:?}")),
    })?;
    let header = reader.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(parse_err(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |what: &str| parse_err(format!("row {}: bad {what} `{}`", line + 1, record.iter().collect::<Vec<_>>().join(",")));
        let num = |i: usize, what: &str| field(i).parse::<f64>().map_err(|_| bad(what));
        let int = |i: usize, what: &str| field(i).parse::<usize>().map_err(|_| bad(what));
        rows.push(SummaryRow {
            scheme: field(0).parse().map_err(|_| bad("scheme"))?,
            matrix: field(1).parse().map_err(|_| bad("matrix"))?,
            dim_n: int(2, "n")?,
            s: int(3, "s")?,
            log2_ratio: num(4, "log2_ratio")?,
            m: int(5, "m")?,
            trials: int(6, "trials")?,
            mean_db: num(7, "mean_db")?,
            std_db: num(8, "std_db")?,
        });
    }
    Ok(rows)
}
