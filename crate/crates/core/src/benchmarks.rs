//! Analytic test functions and the seeded benchmark runner.
//!
//! | name          | formula                                                        | box          |
//! |---------------|----------------------------------------------------------------|--------------|
//! | `oned`        | `e^-x + sin 5x + cos 5x + 0.2x + 4`                            | `[0, 6]`     |
//! | `camelback`   | `(4 - 2.1x1^2 + x1^4/3)x1^2 + x1x2 + (4x2^2 - 4)x2^2`           | `[-2,2]x[-1,1]` |
//! | `rosenbrock`  | `sum_{i<n} (x_i - 1)^4 + sum_{i>=2} sqrt(i)(x_i - x_{i-1}^2)^2` | `[-1, 1]^n`  |
//! | `dixon_price` | `(x_1 - 1)^2 + sum_{i>=2} i(2x_i^2 - x_{i-1})^2`               | `[0, 1]^n`   |
//!
//! Accuracy is reported as the relative mean squared error
//! `sum (g - mu)^2 / sum (g - mean(g))^2` over a held-out test set.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gek::{TrainOptions, TrainedSurrogate, Variant};
use crate::sampling::{derive_seed, rng_from_seed, DomainBox, SampleSet};
use crate::tuner::TunerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    #[serde(rename = "oned")]
    OneDim,
    Camelback,
    Rosenbrock,
    DixonPrice,
}

impl FunctionKind {
    pub fn name(self) -> &'static str {
        match self {
            FunctionKind::OneDim => "oned",
            FunctionKind::Camelback => "camelback",
            FunctionKind::Rosenbrock => "rosenbrock",
            FunctionKind::DixonPrice => "dixon_price",
        }
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "oned" | "1d" | "one_dim" => Ok(FunctionKind::OneDim),
            "camelback" => Ok(FunctionKind::Camelback),
            "rosenbrock" => Ok(FunctionKind::Rosenbrock),
            "dixon_price" | "dixonprice" => Ok(FunctionKind::DixonPrice),
            _ => Err(Error::invalid(format!(
                "unknown function '{s}' (expected oned, camelback, rosenbrock or dixon_price)"
            ))),
        }
    }
}

/// A benchmark function with exact gradient on its box.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    kind: FunctionKind,
    domain: DomainBox,
}

impl TestFunction {
    pub fn one_dim() -> Self {
        Self {
            kind: FunctionKind::OneDim,
            domain: DomainBox::new(vec![0.0], vec![6.0]).expect("valid box"),
        }
    }

    pub fn camelback() -> Self {
        Self {
            kind: FunctionKind::Camelback,
            domain: DomainBox::new(vec![-2.0, -1.0], vec![2.0, 1.0]).expect("valid box"),
        }
    }

    pub fn rosenbrock(dim: usize) -> Result<Self> {
        Self::scalable(FunctionKind::Rosenbrock, dim, -1.0, 1.0)
    }

    pub fn dixon_price(dim: usize) -> Result<Self> {
        Self::scalable(FunctionKind::DixonPrice, dim, 0.0, 1.0)
    }

    fn scalable(kind: FunctionKind, dim: usize, lo: f64, hi: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid(format!(
                "{kind} needs at least 2 dimensions, got {dim}"
            )));
        }
        Ok(Self {
            kind,
            domain: DomainBox::cube(dim, lo, hi)?,
        })
    }

    /// Looks a function up by kind. Fixed-dimension functions reject a
    /// conflicting `dim`; scalable ones require it.
    pub fn new(kind: FunctionKind, dim: Option<usize>) -> Result<Self> {
        let f = match kind {
            FunctionKind::OneDim => Self::one_dim(),
            FunctionKind::Camelback => Self::camelback(),
            FunctionKind::Rosenbrock | FunctionKind::DixonPrice => {
                let dim = dim.ok_or_else(|| Error::invalid(format!("{kind} needs a dimension")))?;
                return Self::scalable(
                    kind,
                    dim,
                    if kind == FunctionKind::Rosenbrock {
                        -1.0
                    } else {
                        0.0
                    },
                    1.0,
                );
            }
        };
        match dim {
            Some(d) if d != f.dim() => Err(Error::invalid(format!(
                "{kind} has fixed dimension {}, got {d}",
                f.dim()
            ))),
            _ => Ok(f),
        }
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    /// Value and gradient at a physical point.
    pub fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !self.domain.contains(x) {
            log::warn!("{} evaluated outside its box at {x:?}", self.name());
        }
        Ok(match self.kind {
            FunctionKind::OneDim => one_dim(x[0]),
            FunctionKind::Camelback => camelback(x[0], x[1]),
            FunctionKind::Rosenbrock => rosenbrock(x),
            FunctionKind::DixonPrice => dixon_price(x),
        })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.0)
    }

    /// Training set of `count` Latin hypercube sites with values and gradients.
    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleSet> {
        let sites = self.domain.lhs(count, seed)?;
        let mut values = Vec::with_capacity(count);
        let mut grads = Vec::with_capacity(count);
        for x in &sites {
            let (v, g) = self.eval(x)?;
            values.push(v);
            grads.push(g);
        }
        SampleSet::from_physical(self.domain.clone(), &sites, values, Some(&grads))
    }

    /// Latin hypercube test points with their true values.
    pub fn test_set(&self, count: usize, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let points = self.domain.lhs(count, seed)?;
        let values = points
            .iter()
            .map(|x| self.value(x))
            .collect::<Result<_>>()?;
        Ok((points, values))
    }
}

fn one_dim(x: f64) -> (f64, Vec<f64>) {
    let (s, c, e) = ((5.0 * x).sin(), (5.0 * x).cos(), (-x).exp());
    (
        e + s + c + 0.2 * x + 4.0,
        vec![-e + 5.0 * c - 5.0 * s + 0.2],
    )
}

fn camelback(x1: f64, x2: f64) -> (f64, Vec<f64>) {
    let v = (4.0 - 2.1 * x1.powi(2) + x1.powi(4) / 3.0) * x1.powi(2)
        + x1 * x2
        + (4.0 * x2.powi(2) - 4.0) * x2.powi(2);
    let g1 = 8.0 * x1 - 8.4 * x1.powi(3) + 2.0 * x1.powi(5) + x2;
    let g2 = x1 - 8.0 * x2 + 16.0 * x2.powi(3);
    (v, vec![g1, g2])
}

fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
    let n = x.len();
    let mut v = 0.0;
    let mut g = vec![0.0; n];
    for i in 0..n - 1 {
        let d = x[i] - 1.0;
        v += d.powi(4);
        g[i] += 4.0 * d.powi(3);
    }
    for i in 1..n {
        let w = ((i + 1) as f64).sqrt();
        let d = x[i] - x[i - 1] * x[i - 1];
        v += w * d * d;
        g[i] += 2.0 * w * d;
        g[i - 1] -= 4.0 * w * d * x[i - 1];
    }
    (v, g)
}

fn dixon_price(x: &[f64]) -> (f64, Vec<f64>) {
    let n = x.len();
    let mut v = (x[0] - 1.0).powi(2);
    let mut g = vec![0.0; n];
    g[0] = 2.0 * (x[0] - 1.0);
    for i in 1..n {
        let w = (i + 1) as f64;
        let d = 2.0 * x[i] * x[i] - x[i - 1];
        v += w * d * d;
        g[i] += 8.0 * w * d * x[i];
        g[i - 1] -= 2.0 * w * d;
    }
    (v, g)
}

/// Relative mean squared error of `predictions` against `truth`.
pub fn rmse(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predictions.len(),
        });
    }
    if truth.len() < 2 {
        return Err(Error::invalid(
            "relative error needs at least two test points",
        ));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let total: f64 = truth.iter().map(|g| (g - mean).powi(2)).sum();
    if !(total > 0.0) {
        return Err(Error::invalid(
            "relative error undefined for constant test responses",
        ));
    }
    let err: f64 = truth
        .iter()
        .zip(predictions)
        .map(|(g, p)| (g - p).powi(2))
        .sum();
    Ok(err / total)
}

/// Box-plot statistics with quartiles by linear interpolation and outliers
/// beyond 1.5 interquartile ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub min: f64,
    pub max: f64,
    pub outliers: Vec<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let (q25, q75) = (quantile(&v, 0.25), quantile(&v, 0.75));
        let fence = 1.5 * (q75 - q25);
        Some(Self {
            count: v.len(),
            median: quantile(&v, 0.5),
            q25,
            q75,
            min: v[0],
            max: v[v.len() - 1],
            outliers: v
                .iter()
                .copied()
                .filter(|&x| x < q25 - fence || x > q75 + fence)
                .collect(),
        })
    }
}

const CONFIG_KEYS: [&str; 16] = [
    "function",
    "dim",
    "dataset",
    "variants",
    "samples",
    "test_samples",
    "repetitions",
    "slices",
    "appendant",
    "starts",
    "max_evals",
    "initial_step",
    "refine_step",
    "shrink",
    "stop_step",
    "seed",
];

/// Benchmark sweep description, read from TOML.
///
/// ```toml
/// function = "camelback"
/// variants = ["kriging", "gek", "sgek1", "sgek2"]
/// samples = [20]
/// repetitions = 10
/// seed = 1
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: Option<FunctionKind>,
    pub dim: Option<usize>,
    /// CSV with columns `x_1..x_n, y, dy_1..dy_n` used instead of a function.
    pub dataset: Option<PathBuf>,
    pub variants: Vec<Variant>,
    pub samples: Vec<usize>,
    pub test_samples: usize,
    pub repetitions: usize,
    pub slices: Option<usize>,
    pub appendant: usize,
    pub starts: usize,
    pub max_evals: Option<usize>,
    pub initial_step: f64,
    pub refine_step: f64,
    pub shrink: f64,
    pub stop_step: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let tuner = TunerConfig::default();
        Self {
            function: None,
            dim: None,
            dataset: None,
            variants: Variant::ALL.to_vec(),
            samples: vec![20],
            test_samples: 3000,
            repetitions: 10,
            slices: None,
            appendant: 2,
            starts: tuner.starts,
            max_evals: tuner.max_evals,
            initial_step: tuner.initial_step,
            refine_step: tuner.refine_step,
            shrink: tuner.shrink,
            stop_step: tuner.stop_step,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// Parses TOML, listing every unknown key by name.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let unknown: Vec<&str> = table
            .keys()
            .map(String::as_str)
            .filter(|k| !CONFIG_KEYS.contains(k))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::Config(format!(
                "unknown keys: {}",
                unknown.join(", ")
            )));
        }
        let config: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let (Some(ds), Some(dir)) = (&config.dataset, path.parent()) {
            if ds.is_relative() {
                config.dataset = Some(dir.join(ds));
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        match (&self.function, &self.dataset) {
            (None, None) => return bad("one of function or dataset is required"),
            (Some(_), Some(_)) => return bad("function and dataset are mutually exclusive"),
            _ => {}
        }
        if let Some(kind) = self.function {
            TestFunction::new(kind, self.dim).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.variants.is_empty() {
            return bad("variants must not be empty");
        }
        if self.samples.is_empty() || self.samples.contains(&0) {
            return bad("samples must be a non-empty list of positive counts");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive");
        }
        if self.dataset.is_none() && self.test_samples < 2 {
            return bad("test_samples must be at least 2");
        }
        if self.appendant < 2 {
            return bad("appendant must be at least 2");
        }
        self.tuner(0).validate()
    }

    fn tuner(&self, seed: u64) -> TunerConfig {
        TunerConfig {
            starts: self.starts,
            seed,
            max_evals: self.max_evals,
            initial_step: self.initial_step,
            refine_step: self.refine_step,
            shrink: self.shrink,
            stop_step: self.stop_step,
        }
    }
}

/// One trained model of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repetition: usize,
    pub seed: u64,
    pub variant: Variant,
    pub samples: usize,
    pub train_seconds: f64,
    pub rmse: Option<f64>,
    pub evaluations: Option<usize>,
    pub theta: Option<Vec<f64>>,
    pub error: Option<String>,
}

/// Aggregate of all repetitions for one `(variant, N)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: Variant,
    pub samples: usize,
    pub failures: usize,
    pub rmse: Option<BoxStats>,
    pub train_seconds: Option<BoxStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

enum Source {
    Function(TestFunction),
    Dataset(SampleSet),
}

struct Split {
    train: SampleSet,
    test_points: Vec<Vec<f64>>,
    test_values: Vec<f64>,
}

impl Source {
    fn split(
        &self,
        samples: usize,
        rep_seed: u64,
        test: &(Vec<Vec<f64>>, Vec<f64>),
    ) -> Result<Split> {
        match self {
            Source::Function(f) => Ok(Split {
                train: f.sample(samples, derive_seed(rep_seed, 1 + samples as u64))?,
                test_points: test.0.clone(),
                test_values: test.1.clone(),
            }),
            Source::Dataset(all) => {
                if samples >= all.len() {
                    return Err(Error::invalid(format!(
                        "dataset has {} rows, cannot hold out a test set from {samples} training rows",
                        all.len()
                    )));
                }
                let mut order: Vec<usize> = (0..all.len()).collect();
                order.shuffle(&mut rng_from_seed(rep_seed));
                let rest = &order[samples..];
                Ok(Split {
                    train: all.select(&order[..samples])?,
                    test_points: rest
                        .iter()
                        .map(|&i| all.domain().from_unit(all.site(i)))
                        .collect::<Result<_>>()?,
                    test_values: rest.iter().map(|&i| all.value(i)).collect(),
                })
            }
        }
    }
}

fn run_cell(
    config: &ExperimentConfig,
    split: &Split,
    variant: Variant,
    repetition: usize,
    rep_seed: u64,
) -> RunRecord {
    let samples = split.train.len();
    let options = TrainOptions {
        tuner: config.tuner(derive_seed(rep_seed, 1_000_000 + samples as u64)),
        slices: config.slices,
        appendant: config.appendant,
    };
    let started = Instant::now();
    let trained = TrainedSurrogate::train(&split.train, variant, &options);
    let train_seconds = started.elapsed().as_secs_f64();
    let outcome = trained.and_then(|model| {
        let predictions = model.predict_means(&split.test_points)?;
        let err = rmse(&predictions, &split.test_values)?;
        Ok((err, model))
    });
    let mut record = RunRecord {
        repetition,
        seed: rep_seed,
        variant,
        samples,
        train_seconds,
        rmse: None,
        evaluations: None,
        theta: None,
        error: None,
    };
    match outcome {
        Ok((err, model)) => {
            record.rmse = Some(err);
            record.evaluations = model.tuning().map(|t| t.evaluations);
            record.theta = Some(model.theta().to_vec());
        }
        Err(e) => {
            log::warn!("repetition {repetition}, {variant}, N={samples}: {e}");
            record.error = Some(e.to_string());
        }
    }
    record
}

/// Runs the sweep. Repetitions run in parallel, each with its own seed
/// stream derived from the master seed; training failures are recorded, not
/// fatal.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let source = match (&config.function, &config.dataset) {
        (Some(kind), _) => Source::Function(TestFunction::new(*kind, config.dim)?),
        (None, Some(path)) => Source::Dataset(SampleSet::read_csv(path, None)?),
        (None, None) => unreachable!("validated"),
    };
    let per_rep: Vec<Vec<RunRecord>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| -> Result<Vec<RunRecord>> {
            let rep_seed = derive_seed(config.seed, rep as u64);
            let test = match &source {
                Source::Function(f) => f.test_set(config.test_samples, derive_seed(rep_seed, 0))?,
                Source::Dataset(_) => (Vec::new(), Vec::new()),
            };
            let mut records = Vec::new();
            for &n in &config.samples {
                let split = source.split(n, rep_seed, &test)?;
                for &variant in &config.variants {
                    records.push(run_cell(config, &split, variant, rep, rep_seed));
                }
            }
            Ok(records)
        })
        .collect::<Result<_>>()?;
    let records: Vec<RunRecord> = per_rep.into_iter().flatten().collect();
    let summary = summarize(config, &records);
    Ok(ExperimentReport {
        config: config.clone(),
        records,
        summary,
    })
}

fn summarize(config: &ExperimentConfig, records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(usize, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let vi = config
            .variants
            .iter()
            .position(|&v| v == r.variant)
            .unwrap_or(0);
        let ni = config
            .samples
            .iter()
            .position(|&n| n == r.samples)
            .unwrap_or(0);
        cells.entry((ni, vi)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((ni, vi), rs)| {
            let ok: Vec<&RunRecord> = rs.iter().copied().filter(|r| r.rmse.is_some()).collect();
            let errs: Vec<f64> = ok.iter().filter_map(|r| r.rmse).collect();
            let times: Vec<f64> = ok.iter().map(|r| r.train_seconds).collect();
            SummaryRow {
                variant: config.variants[vi],
                samples: config.samples[ni],
                failures: rs.len() - ok.len(),
                rmse: BoxStats::from_values(&errs),
                train_seconds: BoxStats::from_values(&times),
            }
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Accuracy table: `variant,N,median_rmse,q25,q75`. Depends only on the
    /// configuration and seed.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("variant,N,median_rmse,q25,q75\n");
        for row in &self.summary {
            let s = row.rmse.as_ref();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.variant,
                row.samples,
                fmt_opt(s.map(|b| b.median)),
                fmt_opt(s.map(|b| b.q25)),
                fmt_opt(s.map(|b| b.q75)),
            ));
        }
        out
    }

    /// Wall-clock training times: `variant,N,median_train_s,q25_train_s,q75_train_s`.
    pub fn timing_csv(&self) -> String {
        let mut out = String::from("variant,N,median_train_s,q25_train_s,q75_train_s\n");
        for row in &self.summary {
            let s = row.train_seconds.as_ref();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.variant,
                row.samples,
                fmt_opt(s.map(|b| b.median)),
                fmt_opt(s.map(|b| b.q25)),
                fmt_opt(s.map(|b| b.q75)),
            ));
        }
        out
    }

    /// Writes `report.json`, `summary.csv` and `timing.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("summary.csv"), self.summary_csv())?;
        std::fs::write(dir.join("timing.csv"), self.timing_csv())?;
        Ok(())
    }

    /// Median relative error of one cell, if any repetition succeeded.
    pub fn median_rmse(&self, variant: Variant, samples: usize) -> Option<f64> {
        self.cell(variant, samples)?.rmse.as_ref().map(|b| b.median)
    }

    pub fn median_train_seconds(&self, variant: Variant, samples: usize) -> Option<f64> {
        self.cell(variant, samples)?
            .train_seconds
            .as_ref()
            .map(|b| b.median)
    }

    fn cell(&self, variant: Variant, samples: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.variant == variant && r.samples == samples)
    }
}
