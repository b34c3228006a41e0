//! Command-line front end.
//!
//! Relative output paths are resolved against `--out-dir` (or the
//! `SGEK_OUT_DIR` environment variable). Exit codes: 0 on success, 1 for
//! usage or input errors, 2 when training is numerically infeasible.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::benchmarks::{ExperimentConfig, FunctionKind, TestFunction};
use crate::error::{Error, Result};
use crate::gek::{TrainOptions, TrainedSurrogate, Variant};
use crate::sampling::{lhs, read_points_csv, write_table, DomainBox, SampleSet};
use crate::sensitivity;
use crate::tuner::TunerConfig;

#[derive(Debug, Parser)]
#[command(
    name = "sgek",
    version,
    about = "Kriging, GEK and sliced GEK surrogates"
)]
pub struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "SGEK_THREADS")]
    pub threads: Option<usize>,

    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, env = "SGEK_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a Latin hypercube design, optionally evaluated on a test function.
    Sample(SampleArgs),
    /// Print sensitivity indices of a training CSV as JSON.
    Sensitivity(SensitivityArgs),
    /// Train a surrogate and save it as JSON.
    Train(TrainArgs),
    /// Predict mean and variance at points from a CSV.
    Predict(PredictArgs),
    /// Run a benchmark sweep described by a TOML file.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lower corner, comma separated; defaults to the function box or 0.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lower: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub upper: Option<Vec<f64>>,
    /// Fill in `y` and `dy_k` columns from a benchmark function.
    #[arg(long)]
    pub function: Option<FunctionKind>,
    #[arg(long, default_value = "design.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    pub data: PathBuf,
    /// Also write the JSON to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub data: PathBuf,
    #[arg(long, default_value = "gek")]
    pub variant: Variant,
    /// Slice count for sliced variants.
    #[arg(long)]
    pub slices: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub appendant: usize,
    #[arg(long, default_value_t = 10)]
    pub starts: usize,
    #[arg(long)]
    pub max_evals: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Domain box; defaults to the bounding box of the training sites.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lower: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub upper: Option<Vec<f64>>,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    /// Tuning trace CSV; defaults to the model path with a `.trace.csv` suffix.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    pub model: PathBuf,
    pub points: PathBuf,
    #[arg(long, default_value = "predictions.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub config: PathBuf,
    /// Report directory, relative to `--out-dir`.
    #[arg(long, default_value = "bench")]
    pub report_dir: PathBuf,
}

impl clap::ValueEnum for Variant {
    fn value_variants<'a>() -> &'a [Self] {
        &Variant::ALL
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

impl clap::ValueEnum for FunctionKind {
    fn value_variants<'a>() -> &'a [Self] {
        &[
            FunctionKind::OneDim,
            FunctionKind::Camelback,
            FunctionKind::Rosenbrock,
            FunctionKind::DixonPrice,
        ]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.name()))
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_infeasible() {
                2
            } else {
                1
            }
        }
    }
}

/// Runs a parsed command on a thread pool of the requested size.
pub fn execute(cli: &Cli) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::invalid("--threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Sample(a) => cmd_sample(a, &cli.out_dir),
        Command::Sensitivity(a) => cmd_sensitivity(a, &cli.out_dir),
        Command::Train(a) => cmd_train(a, &cli.out_dir),
        Command::Predict(a) => cmd_predict(a, &cli.out_dir),
        Command::Bench(a) => cmd_bench(a, &cli.out_dir),
    })
}

fn resolve(out_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        out_dir.join(path)
    }
}

fn prepare_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn domain_from_args(
    lower: &Option<Vec<f64>>,
    upper: &Option<Vec<f64>>,
    dim: usize,
) -> Result<DomainBox> {
    DomainBox::new(
        lower.clone().unwrap_or_else(|| vec![0.0; dim]),
        upper.clone().unwrap_or_else(|| vec![1.0; dim]),
    )
}

fn cmd_sample(a: &SampleArgs, out_dir: &Path) -> Result<()> {
    let out = resolve(out_dir, &a.out);
    prepare_parent(&out)?;
    match a.function {
        Some(kind) => {
            let f = TestFunction::new(kind, a.dim)?;
            let domain = if a.lower.is_some() || a.upper.is_some() {
                DomainBox::new(
                    a.lower
                        .clone()
                        .unwrap_or_else(|| f.domain().lower().to_vec()),
                    a.upper
                        .clone()
                        .unwrap_or_else(|| f.domain().upper().to_vec()),
                )?
            } else {
                f.domain().clone()
            };
            let sites = domain.lhs(a.count, a.seed)?;
            let mut values = Vec::with_capacity(sites.len());
            let mut grads = Vec::with_capacity(sites.len());
            for x in &sites {
                let (v, g) = f.eval(x)?;
                values.push(v);
                grads.push(g);
            }
            SampleSet::from_physical(domain, &sites, values, Some(&grads))?.write_csv(&out)?;
        }
        None => {
            let dim = a
                .dim
                .or(a.lower.as_ref().map(Vec::len))
                .ok_or_else(|| Error::invalid("--dim is required without --function or --lower"))?;
            let domain = domain_from_args(&a.lower, &a.upper, dim)?;
            let rows: Vec<Vec<f64>> = lhs(dim, a.count, a.seed)?
                .iter()
                .map(|u| domain.from_unit(u))
                .collect::<Result<_>>()?;
            let header: Vec<String> = (1..=dim).map(|k| format!("x_{k}")).collect();
            write_table(&out, &header, &rows)?;
        }
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_sensitivity(a: &SensitivityArgs, out_dir: &Path) -> Result<()> {
    let data = SampleSet::read_csv(&a.data, None)?;
    let result = sensitivity::from_samples(&data)?;
    let json = serde_json::to_string_pretty(&result)?;
    println!("{json}");
    if let Some(out) = &a.out {
        let out = resolve(out_dir, out);
        prepare_parent(&out)?;
        std::fs::write(out, json)?;
    }
    Ok(())
}

fn cmd_train(a: &TrainArgs, out_dir: &Path) -> Result<()> {
    let domain = match (&a.lower, &a.upper) {
        (None, None) => None,
        (Some(lo), Some(hi)) => Some(DomainBox::new(lo.clone(), hi.clone())?),
        _ => return Err(Error::invalid("--lower and --upper must be given together")),
    };
    let data = SampleSet::read_csv(&a.data, domain)?;
    let options = TrainOptions {
        tuner: TunerConfig {
            starts: a.starts,
            seed: a.seed,
            max_evals: a.max_evals,
            ..TunerConfig::default()
        },
        slices: a.slices,
        appendant: a.appendant,
    };
    let model = TrainedSurrogate::train(&data, a.variant, &options)?;
    let out = resolve(out_dir, &a.out);
    prepare_parent(&out)?;
    model.save(&out)?;
    let trace = match &a.trace {
        Some(t) => resolve(out_dir, t),
        None => out.with_extension("trace.csv"),
    };
    if let Some(t) = model.tuning() {
        t.trace.write_csv(&trace)?;
    }
    eprintln!(
        "trained {} (theta = {:?}, beta0 = {}, sigma2 = {}, nugget = {}); wrote {}",
        model.variant(),
        model.theta(),
        model.beta0(),
        model.sigma2(),
        model.nugget(),
        out.display()
    );
    Ok(())
}

fn cmd_predict(a: &PredictArgs, out_dir: &Path) -> Result<()> {
    let model = TrainedSurrogate::load(&a.model)?;
    let points = read_points_csv(&a.points)?;
    let mut rows = Vec::with_capacity(points.len());
    for x in points {
        if x.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: x.len(),
            });
        }
        let mu = model.predict_mean(&x)?;
        let s2 = model.predict_variance(&x)?;
        let mut row = x;
        row.push(mu);
        row.push(s2);
        rows.push(row);
    }
    let mut header: Vec<String> = (1..=model.dim()).map(|k| format!("x_{k}")).collect();
    header.push("mu".into());
    header.push("s2".into());
    let out = resolve(out_dir, &a.out);
    prepare_parent(&out)?;
    write_table(&out, &header, &rows)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_bench(a: &BenchArgs, out_dir: &Path) -> Result<()> {
    let config = ExperimentConfig::load(&a.config)?;
    let report = crate::benchmarks::run_experiment(&config)?;
    let dir = resolve(out_dir, &a.report_dir);
    report.write(&dir)?;
    println!(
        "{:<8} {:>6} {:>14} {:>14} {:>14} {:>10} {:>8}",
        "variant", "N", "median_rmse", "q25", "q75", "train_s", "failed"
    );
    for row in &report.summary {
        let r = row.rmse.as_ref();
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.6e}"));
        println!(
            "{:<8} {:>6} {:>14} {:>14} {:>14} {:>10} {:>8}",
            row.variant.name(),
            row.samples,
            fmt(r.map(|b| b.median)),
            fmt(r.map(|b| b.q25)),
            fmt(r.map(|b| b.q75)),
            row.train_seconds
                .as_ref()
                .map_or("-".to_string(), |b| format!("{:.3}", b.median)),
            row.failures
        );
    }
    eprintln!("wrote {}", dir.display());
    Ok(())
}
