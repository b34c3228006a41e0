//! Hyper-parameter search.
//!
//! [`hooke_jeeves`] is a bound-constrained pattern search: coordinate-wise
//! exploratory moves, pattern moves along the last successful direction, and
//! step halving when no move improves. [`multi_start`] runs it from a Latin
//! hypercube of starting points.
//!
//! Sliced GEK models reparameterize the correlation hyper-parameters through
//! the normalized sensitivity indices `s_k`,
//! `theta_k = alpha1 * s_k^alpha2 + alpha3`, which reduces the search to three
//! dimensions whatever the input dimension. Scheme 1 refines the trend fit
//! over all `theta_k`; scheme 2 stops at the trend.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gek;
use crate::kernels::{KernelParams, THETA_LOWER, THETA_UPPER};
use crate::sampling::{DomainBox, SampleSet};
use crate::sensitivity::SensitivityResult;
use crate::sliced::{self, SliceLayout};

/// Search controls. Steps are fractions of each coordinate's box width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TunerConfig {
    pub starts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per search; `None` means `200 * dim`.
    pub max_evals: Option<usize>,
    pub initial_step: f64,
    /// Initial step of the scheme-1 refinement, which starts near a minimum.
    pub refine_step: f64,
    pub shrink: f64,
    pub stop_step: f64,
}

impl Default for TunerConfig {
    fn default() -> Self {
        Self {
            starts: 10,
            seed: 0,
            max_evals: None,
            initial_step: 0.25,
            refine_step: 0.02,
            shrink: 0.5,
            stop_step: 1e-4,
        }
    }
}

impl TunerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.starts == 0 {
            return bad("starts must be positive".into());
        }
        if self.max_evals == Some(0) {
            return bad("max_evals must be positive".into());
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad(format!("shrink must lie in (0, 1), got {}", self.shrink));
        }
        if !(self.stop_step > 0.0) {
            return bad(format!(
                "stop_step must be positive, got {}",
                self.stop_step
            ));
        }
        for (name, v) in [
            ("initial_step", self.initial_step),
            ("refine_step", self.refine_step),
        ] {
            if !(v.is_finite() && v >= self.stop_step) {
                return bad(format!(
                    "{name} must be finite and at least stop_step, got {v}"
                ));
            }
        }
        Ok(())
    }

    /// Evaluation budget for a search in `dim` dimensions.
    pub fn budget(&self, dim: usize) -> usize {
        self.max_evals.unwrap_or(200 * dim)
    }
}

/// Outcome of one pattern search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// False when every evaluated point was infeasible.
    pub feasible: bool,
}

struct Counted<F> {
    objective: F,
    evaluations: usize,
    budget: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        if self.exhausted() {
            return f64::INFINITY;
        }
        self.evaluations += 1;
        let v = (self.objective)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn clamp_into(x: &mut [f64], bounds: &DomainBox) {
    for (k, v) in x.iter_mut().enumerate() {
        *v = v.clamp(bounds.lower()[k], bounds.upper()[k]);
    }
}

fn explore<F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<F>,
    base: &[f64],
    fbase: f64,
    step: f64,
    bounds: &DomainBox,
) -> (Vec<f64>, f64) {
    let mut x = base.to_vec();
    let mut fx = fbase;
    for k in 0..x.len() {
        let delta = step * bounds.width(k);
        for dir in [1.0, -1.0] {
            if f.exhausted() {
                return (x, fx);
            }
            let trial_k = (x[k] + dir * delta).clamp(bounds.lower()[k], bounds.upper()[k]);
            if trial_k == x[k] {
                continue;
            }
            let old = x[k];
            x[k] = trial_k;
            let ft = f.eval(&x);
            if ft < fx {
                fx = ft;
                break;
            }
            x[k] = old;
        }
    }
    (x, fx)
}

fn pattern_search<F: FnMut(&[f64]) -> f64>(
    objective: F,
    start: &[f64],
    bounds: &DomainBox,
    initial_step: f64,
    config: &TunerConfig,
) -> Result<SearchResult> {
    if start.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            got: start.len(),
        });
    }
    let mut f = Counted {
        objective,
        evaluations: 0,
        budget: config.budget(bounds.dim()),
    };
    let mut base = start.to_vec();
    clamp_into(&mut base, bounds);
    let mut fbase = f.eval(&base);
    let mut step = initial_step;
    while step >= config.stop_step && !f.exhausted() {
        let (x1, f1) = explore(&mut f, &base, fbase, step, bounds);
        if f1 < fbase {
            let mut prev = std::mem::replace(&mut base, x1);
            fbase = f1;
            while !f.exhausted() {
                let mut pattern: Vec<f64> =
                    base.iter().zip(&prev).map(|(b, p)| 2.0 * b - p).collect();
                clamp_into(&mut pattern, bounds);
                let fp = if pattern == base {
                    fbase
                } else {
                    f.eval(&pattern)
                };
                let (x2, f2) = explore(&mut f, &pattern, fp, step, bounds);
                if f2 < fbase {
                    prev = std::mem::replace(&mut base, x2);
                    fbase = f2;
                } else {
                    break;
                }
            }
        } else {
            step *= config.shrink;
        }
    }
    Ok(SearchResult {
        argmin: base,
        value: fbase,
        evaluations: f.evaluations,
        feasible: fbase.is_finite(),
    })
}

/// Minimizes `objective` over `bounds` from `start`. The objective may
/// return `+inf` for infeasible points.
pub fn hooke_jeeves<F: FnMut(&[f64]) -> f64>(
    objective: F,
    start: &[f64],
    bounds: &DomainBox,
    config: &TunerConfig,
) -> Result<SearchResult> {
    config.validate()?;
    pattern_search(objective, start, bounds, config.initial_step, config)
}

/// Results of every start of a multi-start search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStartResult {
    pub starts: Vec<Vec<f64>>,
    pub results: Vec<SearchResult>,
    /// Index of the lowest value; ties go to the earliest start.
    pub best: usize,
}

impl MultiStartResult {
    pub fn best(&self) -> &SearchResult {
        &self.results[self.best]
    }

    pub fn evaluations(&self) -> usize {
        self.results.iter().map(|r| r.evaluations).sum()
    }
}

/// Runs [`hooke_jeeves`] from `config.starts` Latin hypercube points
/// (seeded by `config.seed`) in parallel. Fails when every start is
/// infeasible.
pub fn multi_start<F: Fn(&[f64]) -> f64 + Sync>(
    objective: F,
    bounds: &DomainBox,
    config: &TunerConfig,
) -> Result<MultiStartResult> {
    config.validate()?;
    let starts = bounds.lhs(config.starts, config.seed)?;
    let results: Vec<SearchResult> = starts
        .par_iter()
        .map(|s| pattern_search(&objective, s, bounds, config.initial_step, config))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value < results[best].value {
            best = i;
        }
    }
    if !results[best].feasible {
        return Err(Error::Infeasible(format!(
            "all {} starts are infeasible",
            results.len()
        )));
    }
    Ok(MultiStartResult {
        starts,
        results,
        best,
    })
}

/// Parameters of the sensitivity trend `alpha1 * s^alpha2 + alpha3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

impl TrendParams {
    pub const ALPHA1_RANGE: (f64, f64) = (0.001, 5.0);
    pub const ALPHA2_RANGE: (f64, f64) = (0.2, 1.0);
    pub const ALPHA3_RANGE: (f64, f64) = (0.001, 5.0);

    pub fn new(alpha1: f64, alpha2: f64, alpha3: f64) -> Result<Self> {
        let ranges = [Self::ALPHA1_RANGE, Self::ALPHA2_RANGE, Self::ALPHA3_RANGE];
        for (i, (v, (lo, hi))) in [alpha1, alpha2, alpha3].into_iter().zip(ranges).enumerate() {
            if !(v >= lo && v <= hi) {
                return Err(Error::invalid(format!(
                    "alpha{} = {v} outside [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        Ok(Self {
            alpha1,
            alpha2,
            alpha3,
        })
    }

    /// Box searched by the trend fit, in the order `alpha1, alpha2, alpha3`.
    pub fn search_box() -> DomainBox {
        let r = [Self::ALPHA1_RANGE, Self::ALPHA2_RANGE, Self::ALPHA3_RANGE];
        DomainBox::new(
            r.iter().map(|v| v.0).collect(),
            r.iter().map(|v| v.1).collect(),
        )
        .expect("static trend box is valid")
    }

    fn from_point(p: &[f64]) -> Self {
        Self {
            alpha1: p[0],
            alpha2: p[1],
            alpha3: p[2],
        }
    }
}

/// `theta_k = alpha1 * s_k^alpha2 + alpha3`, clamped into the default
/// hyper-parameter bounds.
pub fn trend(alpha: &TrendParams, s_hat: &[f64]) -> Vec<f64> {
    s_hat
        .iter()
        .map(|&s| {
            (alpha.alpha1 * s.max(0.0).powf(alpha.alpha2) + alpha.alpha3)
                .clamp(THETA_LOWER, THETA_UPPER)
        })
        .collect()
}

/// One row of a tuning trace: the outcome of one search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub stage: String,
    pub start: usize,
    pub value: f64,
    pub evaluations: usize,
    pub feasible: bool,
    pub point: Vec<f64>,
}

/// Per-search diagnostics of a tuning run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TuningTrace {
    pub rows: Vec<TraceRow>,
}

impl TuningTrace {
    fn push_multi(&mut self, stage: &str, ms: &MultiStartResult) {
        for (i, r) in ms.results.iter().enumerate() {
            self.push(stage, i, r);
        }
    }

    fn push(&mut self, stage: &str, start: usize, r: &SearchResult) {
        self.rows.push(TraceRow {
            stage: stage.into(),
            start,
            value: r.value,
            evaluations: r.evaluations,
            feasible: r.feasible,
            point: r.argmin.clone(),
        });
    }

    pub fn evaluations(&self) -> usize {
        self.rows.iter().map(|r| r.evaluations).sum()
    }

    /// Writes `stage,start,value,evaluations,feasible,x_1..x_k`; rows with
    /// fewer coordinates than the widest leave the remaining cells empty.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let width = self.rows.iter().map(|r| r.point.len()).max().unwrap_or(0);
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut header: Vec<String> = ["stage", "start", "value", "evaluations", "feasible"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((1..=width).map(|k| format!("x_{k}")));
        w.write_record(&header).map_err(|e| csv_error(path, e))?;
        for r in &self.rows {
            let mut rec = vec![
                r.stage.clone(),
                r.start.to_string(),
                r.value.to_string(),
                r.evaluations.to_string(),
                r.feasible.to_string(),
            ];
            rec.extend(r.point.iter().map(f64::to_string));
            rec.resize(5 + width, String::new());
            w.write_record(&rec).map_err(|e| csv_error(path, e))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        row: 0,
        message: e.to_string(),
    }
}

/// Tuned hyper-parameters with their objective value and search diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningOutcome {
    pub theta: Vec<f64>,
    pub value: f64,
    /// Total objective evaluations over all stages.
    pub evaluations: usize,
    pub alpha: Option<TrendParams>,
    pub trace: TuningTrace,
}

fn theta_box(dim: usize) -> Result<DomainBox> {
    DomainBox::cube(dim, THETA_LOWER, THETA_UPPER)
}

fn likelihood_or_inf(value: Result<f64>) -> f64 {
    value.unwrap_or(f64::INFINITY)
}

fn from_log10(u: &[f64]) -> Vec<f64> {
    u.iter()
        .map(|v| 10f64.powf(*v).clamp(THETA_LOWER, THETA_UPPER))
        .collect()
}

/// Multi-start search of the full concentrated likelihood. The search runs
/// over `log10(theta)`, so starts and steps cover every decade of the
/// hyper-parameter box evenly.
pub fn tune_full(
    data: &SampleSet,
    with_gradients: bool,
    config: &TunerConfig,
) -> Result<TuningOutcome> {
    let n = data.dim();
    // surfaces input errors before the search hides them as infeasibility
    gek::full_log_likelihood(data, &KernelParams::isotropic(1.0, n)?, with_gradients)?;
    let objective = |u: &[f64]| {
        likelihood_or_inf(
            KernelParams::new(from_log10(u))
                .and_then(|p| gek::full_log_likelihood(data, &p, with_gradients)),
        )
    };
    let log_box = DomainBox::cube(n, THETA_LOWER.log10(), THETA_UPPER.log10())?;
    let mut ms = multi_start(objective, &log_box, config)?;
    for r in &mut ms.results {
        r.argmin = from_log10(&r.argmin);
    }
    let mut trace = TuningTrace::default();
    trace.push_multi("full", &ms);
    let best = ms.best();
    Ok(TuningOutcome {
        theta: best.argmin.clone(),
        value: best.value,
        evaluations: ms.evaluations(),
        alpha: None,
        trace,
    })
}

struct SlicedObjective<'a> {
    data: &'a SampleSet,
    layout: &'a SliceLayout,
    appendant: usize,
}

impl SlicedObjective<'_> {
    fn check(&self, sens: &SensitivityResult) -> Result<()> {
        if sens.dim() != self.data.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.data.dim(),
                got: sens.dim(),
            });
        }
        let probe = KernelParams::isotropic(1.0, self.data.dim())?;
        sliced::sliced_log_likelihood(&probe, self.data, self.layout, self.appendant).map(|_| ())
    }

    fn value(&self, theta: &[f64]) -> f64 {
        likelihood_or_inf(KernelParams::new(theta.to_vec()).and_then(|p| {
            sliced::sliced_log_likelihood(&p, self.data, self.layout, self.appendant)
        }))
    }

    fn fit_trend(
        &self,
        sens: &SensitivityResult,
        config: &TunerConfig,
        trace: &mut TuningTrace,
    ) -> Result<(TrendParams, SearchResult, usize)> {
        let objective =
            |a: &[f64]| self.value(&trend(&TrendParams::from_point(a), &sens.normalized));
        let ms = multi_start(objective, &TrendParams::search_box(), config)?;
        trace.push_multi("trend", &ms);
        let best = ms.best().clone();
        Ok((
            TrendParams::from_point(&best.argmin),
            best,
            ms.evaluations(),
        ))
    }
}

/// Scheme 1: fit the sensitivity trend by multi-start search over the three
/// trend parameters, then refine every hyper-parameter by a single pattern
/// search started from the trend.
pub fn tune_scheme1(
    data: &SampleSet,
    layout: &SliceLayout,
    sens: &SensitivityResult,
    appendant: usize,
    config: &TunerConfig,
) -> Result<TuningOutcome> {
    let obj = SlicedObjective {
        data,
        layout,
        appendant,
    };
    obj.check(sens)?;
    let mut trace = TuningTrace::default();
    let (alpha, stage1, evals1) = obj.fit_trend(sens, config, &mut trace)?;
    let start = trend(&alpha, &sens.normalized);
    let stage2 = pattern_search(
        |t: &[f64]| obj.value(t),
        &start,
        &theta_box(data.dim())?,
        config.refine_step,
        config,
    )?;
    trace.push("refine", 0, &stage2);
    let evaluations = evals1 + stage2.evaluations;
    let (theta, value) = if stage2.feasible && stage2.value <= stage1.value {
        (stage2.argmin, stage2.value)
    } else {
        (start, stage1.value)
    };
    Ok(TuningOutcome {
        theta,
        value,
        evaluations,
        alpha: Some(alpha),
        trace,
    })
}

/// Scheme 2: fit the sensitivity trend only.
pub fn tune_scheme2(
    data: &SampleSet,
    layout: &SliceLayout,
    sens: &SensitivityResult,
    appendant: usize,
    config: &TunerConfig,
) -> Result<TuningOutcome> {
    let obj = SlicedObjective {
        data,
        layout,
        appendant,
    };
    obj.check(sens)?;
    let mut trace = TuningTrace::default();
    let (alpha, stage1, evaluations) = obj.fit_trend(sens, config, &mut trace)?;
    Ok(TuningOutcome {
        theta: trend(&alpha, &sens.normalized),
        value: stage1.value,
        evaluations,
        alpha: Some(alpha),
        trace,
    })
}
