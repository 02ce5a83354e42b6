use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lipbound::comparators::{frobenius_estimate, sedghi_estimate};
use lipbound::io::Method;
use lipbound::oracle::{gamma_series, power_method_conv, sigma_max_exact, ConvOperatorSpec};
use lipbound::{GridSpec, Kernel, DEFAULT_SAMPLES};
use serde_json::Value;

mod source;
mod table;

use source::KernelSource;
use table::{num, Format, Table};

/// Spectral-norm bounds for multi-channel 2-D convolutions.
#[derive(Parser)]
#[command(name = "lipbound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// LipBound of a kernel.
    Bound {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Largest singular value of the zero-padded convolution on n x n inputs.
    Exact {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// Use the power method with `--iters` iterations instead of the
        /// exact solver.
        #[arg(long)]
        power: bool,
        #[arg(long, default_value_t = 10)]
        iters: usize,
    },
    /// Gap between LipBound and the exact norm as the input grows.
    Gap {
        #[command(flatten)]
        common: Common,
        /// Comma-separated input sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        certified: bool,
    },
    /// Every estimator against the exact norm, averaged over kernels.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        iters: usize,
        /// Kernels to average over when the seed is `*`.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
    },
    /// Median wall time of LipBound against the power method per shape.
    Bench {
        /// Kernel sources, one row each. Repeatable.
        #[arg(long, required = true)]
        kernel: Vec<KernelSource>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        iters: usize,
        /// Timed runs per method, after one warm-up run.
        #[arg(long, default_value_t = 11)]
        repeats: usize,
    },
    /// Run the structural self-checks.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

#[derive(Args)]
struct Common {
    /// File path (.json or raw) or `random:<seed>:<cout>x<cin>x<s>`; a `*`
    /// seed means seeds 0..repeats.
    #[arg(long)]
    kernel: KernelSource,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Report zero wall times, for reproducible output.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct Grid {
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long)]
    certified: bool,
}

impl Grid {
    fn spec(&self) -> GridSpec {
        if self.certified {
            GridSpec::certified(self.samples)
        } else {
            GridSpec::raw(self.samples)
        }
    }
}

enum Failure {
    Config(String),
    Compute(String),
    Check(String),
}

impl From<lipbound::Error> for Failure {
    fn from(e: lipbound::Error) -> Self {
        use lipbound::Error::*;
        match e {
            Domain(_) | TooLarge { .. } | Index { .. } => Failure::Compute(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn emit(text: &str, output: &Option<PathBuf>) -> Outcome {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn spec(kernel: &Kernel, n: usize) -> Result<ConvOperatorSpec<f64>, Failure> {
    Ok(ConvOperatorSpec::new(kernel.clone(), n)?)
}

fn bound(common: &Common, grid: &Grid) -> Outcome {
    let mut t = Table::new(&[
        "kernel",
        "bound",
        "raw_grid_bound",
        "samples",
        "certified",
        "alpha",
        "time_ms",
    ]);
    for k in common.kernel.load(1)? {
        let r = lipbound::lipbound(&k, grid.spec())?;
        t.push(vec![
            common.kernel.label(&k).into(),
            num(r.bound),
            num(r.raw_grid_bound),
            r.samples.into(),
            r.certified.into(),
            r.alpha.map_or(Value::Null, num),
            num(if common.no_timing { 0.0 } else { r.wall_time }),
        ]);
    }
    emit(&t.render(common.format), &common.output)
}

fn exact(common: &Common, n: usize, power: bool, iters: usize) -> Outcome {
    let mut t = Table::new(&["kernel", "n", "method", "sigma1", "iterations", "time_ms"]);
    for k in common.kernel.load(1)? {
        let sp = spec(&k, n)?;
        let start = Instant::now();
        let (method, sigma, used) = if power {
            let (s, used) = power_method_conv(&sp, iters, 0.0, 0)?;
            (Method::PowerMethod, s, Value::from(used))
        } else {
            (Method::DenseOracle, sigma_max_exact(&sp)?, Value::Null)
        };
        let ms = if common.no_timing { 0.0 } else { millis(start) };
        t.push(vec![
            common.kernel.label(&k).into(),
            n.into(),
            method.as_str().into(),
            num(sigma),
            used,
            num(ms),
        ]);
    }
    emit(&t.render(common.format), &common.output)
}

fn gap(common: &Common, ns: &[usize], samples: usize, certified: bool) -> Outcome {
    let kernels = common.kernel.load(1)?;
    let [k] = &kernels[..] else {
        return Err(Failure::Config("gap takes a single kernel".into()));
    };
    let grid = if certified {
        GridSpec::certified(samples)
    } else {
        GridSpec::raw(samples)
    };
    let series = gamma_series(k, ns, grid)?;
    let text = match common.format {
        Format::Csv => series.to_csv(),
        Format::Json => {
            let mut t = Table::new(&["n", "lipbound", "sigma1", "gamma"]);
            for e in &series.entries {
                t.push(vec![e.n.into(), num(e.lipbound), num(e.sigma1), num(e.gamma)]);
            }
            t.render(Format::Json)
        }
    };
    emit(&text, &common.output)
}

fn compare(common: &Common, grid: &Grid, n: usize, iters: usize, repeats: usize) -> Outcome {
    let kernels = common.kernel.load(repeats)?;
    let methods = [
        Method::Lipbound,
        Method::PowerMethod,
        Method::Sedghi,
        Method::Frobenius,
        Method::DenseOracle,
    ];
    // Per method: summed value, ratio and time.
    let mut acc = [[0.0f64; 3]; 5];
    for (i, k) in kernels.iter().enumerate() {
        let sp = spec(k, n)?;
        let start = Instant::now();
        let sigma = sigma_max_exact(&sp)?;
        let exact_ms = millis(start);
        if sigma <= 0.0 {
            return Err(Failure::Compute(format!(
                "kernel {i} has zero norm; ratios are undefined"
            )));
        }
        let start = Instant::now();
        let (pm, _) = power_method_conv(&sp, iters, 0.0, i as u64)?;
        let pm_ms = millis(start);
        let lb = lipbound::lipbound(k, grid.spec())?;
        let sed = sedghi_estimate(k, n)?;
        let fro = frobenius_estimate(k)?;
        let rows = [
            (lb.bound, lb.wall_time),
            (pm, pm_ms),
            (sed.value, sed.wall_time),
            (fro.value, fro.wall_time),
            (sigma, exact_ms),
        ];
        for (a, (value, ms)) in acc.iter_mut().zip(rows) {
            a[0] += value;
            a[1] += value / sigma;
            a[2] += ms;
        }
    }
    let count = kernels.len() as f64;
    let mut t = Table::new(&["method", "value", "ratio_to_exact", "time_ms"]);
    for (m, a) in methods.iter().zip(acc) {
        let ms = if common.no_timing { 0.0 } else { a[2] / count };
        t.push(vec![m.as_str().into(), num(a[0] / count), num(a[1] / count), num(ms)]);
    }
    emit(&t.render(common.format), &common.output)
}

fn median_ms(repeats: usize, mut f: impl FnMut() -> Result<(), Failure>) -> Result<f64, Failure> {
    f()?;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        f()?;
        times.push(millis(start));
    }
    times.sort_by(f64::total_cmp);
    let m = times.len() / 2;
    Ok(if times.len() % 2 == 1 {
        times[m]
    } else {
        0.5 * (times[m - 1] + times[m])
    })
}

#[allow(clippy::too_many_arguments)]
fn bench(
    sources: &[KernelSource],
    output: &Option<PathBuf>,
    format: Format,
    grid: &Grid,
    n: usize,
    iters: usize,
    repeats: usize,
) -> Outcome {
    let mut t = Table::new(&["shape", "lipbound_ms", "pm_ms", "speedup"]);
    for src in sources {
        for k in src.load(1)? {
            let sp = spec(&k, n)?;
            let lb = median_ms(repeats, || {
                std::hint::black_box(lipbound::lipbound(&k, grid.spec())?);
                Ok(())
            })?;
            let pm = median_ms(repeats, || {
                std::hint::black_box(power_method_conv(&sp, iters, 0.0, 0)?);
                Ok(())
            })?;
            t.push(vec![k.shape_label().into(), num(lb), num(pm), num(pm / lb)]);
        }
    }
    emit(&t.render(format), output)
}

fn check(seed: u64, output: &Option<PathBuf>, format: Format) -> Outcome {
    let outcomes = lipbound::suite::run_all(seed)?;
    let mut t = Table::new(&["check", "cases", "failures", "worst", "status"]);
    for o in &outcomes {
        t.push(vec![
            o.name.into(),
            o.cases.into(),
            o.failures.into(),
            num(o.worst),
            if o.passed() { "pass" } else { "fail" }.into(),
        ]);
    }
    emit(&t.render(format), output)?;
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed checks: {}", failed.join(", "))))
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Bound { common, grid } => bound(&common, &grid),
        Command::Exact {
            common,
            n,
            power,
            iters,
        } => exact(&common, n, power, iters),
        Command::Gap {
            common,
            n,
            samples,
            certified,
        } => gap(&common, &n, samples, certified),
        Command::Compare {
            common,
            grid,
            n,
            iters,
            repeats,
        } => compare(&common, &grid, n, iters, repeats),
        Command::Bench {
            kernel,
            output,
            format,
            grid,
            n,
            iters,
            repeats,
        } => bench(&kernel, &output, format, &grid, n, iters, repeats),
        Command::Check {
            seed,
            output,
            format,
        } => check(seed, &output, format),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
    }
}
