//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or configuration
//! error.
//!
//! Standard-output formats (one line each):
//!
//! * `run`: `wrote <rows> rows to <path>`
//! * `demo`: `scheme=<s> matrix=<k> n=<N> s=<s> m=<m> error_db=<v> support=<i,j,...>`
//! * `slope`: `slope_db_per_octave=<v> points=<k>`
//! * `bench`: `m=<m> n=<N> reps=<r> packed_ns=<t> dense_ns=<t> speedup=<x> exact=<bool>`

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::Rng;

use crate::bitkernel::{BinaryMatrix, BinaryVector, GaussianInt};
use crate::error::Error;
use crate::experiments::{
    fit_decay_slope, measurements_for, read_csv, run_experiment, run_trial_detailed, write_csv, Cell,
    ExperimentConfig, MatrixKind, Threads,
};
use crate::matrix::ComplexMatrix;
use crate::recon::SchemeKind;
use crate::scalar::Cplx;
use crate::seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "onebit-cs", version, about = "1-bit quantized compressive sensing experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte-Carlo sweep described by a config file and write a CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides `base_seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a single trial and print its error and recovered support.
    Demo {
        #[arg(long, default_value = "fourier")]
        matrix: String,
        #[arg(long = "n", default_value_t = 64)]
        n: usize,
        #[arg(long = "s", default_value_t = 4)]
        s: usize,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        ratio: f64,
        #[arg(long, default_value = "qpbpq")]
        scheme: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit the error decay slope (dB per octave of m) from a sweep CSV.
    Slope {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        scheme: String,
        #[arg(long = "s")]
        s: usize,
        #[arg(long, default_value_t = f64::NEG_INFINITY, allow_negative_numbers = true)]
        min_ratio: f64,
        /// Restrict to one operator family when the CSV holds several.
        #[arg(long)]
        matrix: Option<String>,
    },
    /// Time the packed back-projection against a dense complex multiply.
    Bench {
        #[arg(long)]
        m: usize,
        #[arg(long = "n")]
        n: usize,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Parse { .. } => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            out: path,
            threads,
            seed,
        } => cmd_run(config, path, threads, seed, out),
        Command::Demo {
            matrix,
            n,
            s,
            ratio,
            scheme,
            seed,
        } => cmd_demo(&matrix, n, s, ratio, &scheme, seed, out),
        Command::Slope {
            input,
            scheme,
            s,
            min_ratio,
            matrix,
        } => cmd_slope(input, &scheme, s, min_ratio, matrix.as_deref(), out),
        Command::Bench { m, n, reps, seed } => cmd_bench(m, n, reps, seed, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err((code, e)) => {
            let _ = writeln!(err, "error: {e}");
            code
        }
    }
}

type CmdResult = Result<(), (i32, Error)>;

fn classify(e: Error) -> (i32, Error) {
    (exit_code(&e), e)
}

fn write_line(out: &mut dyn Write, line: String) -> CmdResult {
    writeln!(out, "{line}").map_err(|source| {
        (
            EXIT_RUNTIME,
            Error::Io {
                path: "<stdout>".into(),
                source,
            },
        )
    })
}

fn cmd_run(config: PathBuf, path: PathBuf, threads: Option<usize>, seed: Option<u64>, out: &mut dyn Write) -> CmdResult {
    let mut cfg = ExperimentConfig::load(&config).map_err(classify)?;
    if let Some(k) = threads {
        cfg.threads = Threads::Fixed(k);
    }
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    let rows = run_experiment(&cfg).map_err(classify)?;
    write_csv(&rows, &path).map_err(|e| (EXIT_RUNTIME, e))?;
    write_line(out, format!("wrote {} rows to {}", rows.len(), path.display()))
}

/// The cell a `demo` invocation runs; trial index 0 under `base_seed = seed`.
pub fn demo_cell(matrix: &str, n: usize, s: usize, ratio: f64, scheme: &str) -> crate::Result<Cell> {
    let cfg = ExperimentConfig {
        dim_n: n,
        sparsities: vec![s],
        log2_ratios: vec![ratio],
        trials: 1,
        schemes: vec![scheme.parse::<SchemeKind>()?],
        matrix: vec![matrix.parse::<MatrixKind>()?],
        base_seed: 0,
        threads: Threads::Fixed(1),
    };
    cfg.validate()?;
    Ok(cfg.cells()[0])
}

fn cmd_demo(matrix: &str, n: usize, s: usize, ratio: f64, scheme: &str, seed: u64, out: &mut dyn Write) -> CmdResult {
    let cell = demo_cell(matrix, n, s, ratio, scheme).map_err(classify)?;
    let result = run_trial_detailed::<f64>(&cell, seed, 0).map_err(classify)?;
    let support: Vec<String> = result.support.iter().map(|j| j.to_string()).collect();
    write_line(
        out,
        format!(
            "scheme={} matrix={} n={} s={} m={} error_db={} support={}",
            cell.scheme,
            cell.matrix,
            cell.dim_n,
            cell.s,
            measurements_for(n, ratio),
            result.error_db,
            support.join(",")
        ),
    )
}

fn cmd_slope(input: PathBuf, scheme: &str, s: usize, min_ratio: f64, matrix: Option<&str>, out: &mut dyn Write) -> CmdResult {
    let scheme: SchemeKind = scheme.parse().map_err(classify)?;
    let matrix: Option<MatrixKind> = matrix.map(str::parse).transpose().map_err(classify)?;
    let rows: Vec<_> = read_csv(&input)
        .map_err(classify)?
        .into_iter()
        .filter(|r| r.scheme == scheme && r.s == s && matrix.is_none_or(|k| r.matrix == k))
        .filter(|r| r.log2_ratio >= min_ratio)
        .collect();
    let slope = fit_decay_slope(&rows, min_ratio).map_err(|e| (EXIT_USAGE, e))?;
    write_line(out, format!("slope_db_per_octave={slope:.6} points={}", rows.len()))
}

/// Random binary instance for `bench`: unit-scale signs.
fn bench_instance(m: usize, n: usize, seed: u64) -> (ComplexMatrix<f64>, Vec<Cplx<f64>>) {
    let mut rng = seed::rng(seed);
    let mut sign = || if rng.random::<bool>() { 1.0 } else { -1.0 };
    let psi = ComplexMatrix::from_fn(m, n, |_, _| Cplx::new(sign(), sign()));
    let z = (0..m).map(|_| Cplx::new(sign(), sign())).collect();
    (psi, z)
}

fn cmd_bench(m: usize, n: usize, reps: usize, seed: u64, out: &mut dyn Write) -> CmdResult {
    if m == 0 || n == 0 || reps == 0 {
        return Err((EXIT_USAGE, Error::config("bench", "--m, --n and --reps must be at least 1")));
    }
    let (psi, z) = bench_instance(m, n, seed);
    let a = BinaryMatrix::pack(&psi, 1.0).map_err(classify)?;
    let bz = BinaryVector::pack(&z, 1.0).map_err(classify)?;

    let mut exact = true;
    let mut packed_ns = 0u128;
    let mut dense_ns = 0u128;
    for _ in 0..reps {
        let t = Instant::now();
        let packed = a.adjoint_multiply_integer(&bz).map_err(classify)?;
        packed_ns += t.elapsed().as_nanos();

        let t = Instant::now();
        let dense = psi.adjoint_mul_vec(&z).map_err(classify)?;
        dense_ns += t.elapsed().as_nanos();

        // Unit signs keep every dense partial sum an exact small integer.
        exact &= packed
            .iter()
            .zip(&dense)
            .all(|(p, d)| *p == GaussianInt { re: d.re as i64, im: d.im as i64 } && d.re.fract() == 0.0 && d.im.fract() == 0.0);
    }
    let per = |ns: u128| ns / reps as u128;
    let speedup = dense_ns as f64 / packed_ns.max(1) as f64;
    write_line(
        out,
        format!(
            "m={m} n={n} reps={reps} packed_ns={} dense_ns={} speedup={speedup:.2} exact={exact}",
            per(packed_ns),
            per(dense_ns)
        ),
    )?;
    if exact {
        Ok(())
    } else {
        Err((EXIT_RUNTIME, Error::Degenerate("packed result differs from dense oracle".into())))
    }
}
