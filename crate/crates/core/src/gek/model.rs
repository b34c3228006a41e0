use std::path::Path;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{correlation_vector, profile_beta_sigma, Ordering, Variant};
use crate::error::{Error, Result};
use crate::kernels::KernelParams;
use crate::linalg::{cholesky_with_nugget, CholeskyFactor};
use crate::sampling::{DomainBox, SampleSet};
use crate::sensitivity::{self, SensitivityResult};
use crate::sliced::{self, LayoutSummary};
use crate::tuner::{self, TrendParams, TunerConfig, TuningOutcome};

/// Value of the `format` field of a saved model.
pub const MODEL_FORMAT: &str = "sgek-model";
/// Current model document version.
pub const MODEL_VERSION: u32 = 1;

/// Training controls shared by all variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub tuner: TunerConfig,
    /// Slice count for sliced variants; `None` picks
    /// [`sliced::default_slice_count`].
    pub slices: Option<usize>,
    /// Number of consecutive slices kept jointly in the sliced likelihood.
    pub appendant: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            tuner: TunerConfig::default(),
            slices: None,
            appendant: 2,
        }
    }
}

/// A fitted surrogate: hyper-parameters, profiled trend and variance, and the
/// factored full correlation matrix of the training observations.
#[derive(Debug, Clone)]
pub struct TrainedSurrogate {
    variant: Variant,
    params: KernelParams,
    beta0: f64,
    sigma2: f64,
    data: SampleSet,
    factor: CholeskyFactor,
    weights: Vec<f64>,
    trend_solve: Vec<f64>,
    trend_norm: f64,
    tuning: Option<TuningOutcome>,
    layout: Option<LayoutSummary>,
    sensitivity: Option<SensitivityResult>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrainingData {
    sites: Vec<Vec<f64>>,
    values: Vec<f64>,
    gradients: Option<Vec<Vec<f64>>>,
}

/// On-disk model document. Sites and gradients are stored in unit-cube
/// coordinates together with the domain box that maps them back.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format: String,
    version: u32,
    variant: Variant,
    theta: Vec<f64>,
    theta_lower: Vec<f64>,
    theta_upper: Vec<f64>,
    beta0: f64,
    sigma2: f64,
    nugget: f64,
    #[serde(default)]
    alpha: Option<TrendParams>,
    #[serde(default)]
    tuning_evaluations: Option<usize>,
    #[serde(default)]
    layout: Option<LayoutSummary>,
    domain: DomainBox,
    training: TrainingData,
}

impl TrainedSurrogate {
    /// Tunes the hyper-parameters for `variant` and fits the final model.
    ///
    /// Kriging and GEK minimize the full likelihood. The sliced variants
    /// slice along the dimension with the largest sensitivity index and
    /// minimize the sliced likelihood with tuning scheme 1 or 2. Whatever the
    /// tuning, the returned model uses the full correlation matrix.
    pub fn train(data: &SampleSet, variant: Variant, options: &TrainOptions) -> Result<Self> {
        let data = Self::variant_data(data, variant)?;
        let (tuning, layout, sens) = if variant.is_sliced() {
            let sens = sensitivity::from_samples(&data)?;
            let m = options
                .slices
                .unwrap_or_else(|| sliced::default_slice_count(data.len()));
            let layout = sliced::partition(&data, sens.most_important(), m)?;
            let outcome = match variant {
                Variant::Sgek1 => {
                    tuner::tune_scheme1(&data, &layout, &sens, options.appendant, &options.tuner)?
                }
                _ => tuner::tune_scheme2(&data, &layout, &sens, options.appendant, &options.tuner)?,
            };
            (outcome, Some(layout.summary()), Some(sens))
        } else {
            let outcome = tuner::tune_full(&data, variant.uses_gradients(), &options.tuner)?;
            (outcome, None, None)
        };
        let params = KernelParams::new(tuning.theta.clone())?;
        let mut model = Self::fit(&data, variant, params)?;
        model.tuning = Some(tuning);
        model.layout = layout;
        model.sensitivity = sens;
        Ok(model)
    }

    fn variant_data(data: &SampleSet, variant: Variant) -> Result<SampleSet> {
        if !variant.uses_gradients() {
            return Ok(data.without_gradients());
        }
        if !data.has_gradients() {
            return Err(Error::invalid(format!(
                "variant {variant} needs gradient columns (dy_1..dy_n) in the training data"
            )));
        }
        Ok(data.clone())
    }

    /// Fits the model at fixed hyper-parameters.
    pub fn fit(data: &SampleSet, variant: Variant, params: KernelParams) -> Result<Self> {
        let data = Self::variant_data(data, variant)?;
        if params.dim() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                got: params.dim(),
            });
        }
        let gradients = variant.uses_gradients();
        let sites: Vec<usize> = (0..data.len()).collect();
        let ordering = Ordering::new(&[&sites], data.dim(), gradients);
        let factor = cholesky_with_nugget(ordering.matrix(&data, params.theta()).as_ref())?;
        let y = ordering.responses(&data);
        let f = ordering.trend();
        let (beta0, sigma2) = profile_beta_sigma(&factor, &y, &f)?;
        let centered: Vec<f64> = y.iter().zip(&f).map(|(yi, fi)| yi - beta0 * fi).collect();
        let weights = factor.solve_vec(&centered);
        let mut fs = Mat::from_fn(f.len(), 1, |i, _| f[i]);
        factor.forward(&mut fs);
        let trend_solve: Vec<f64> = (0..f.len()).map(|i| fs[(i, 0)]).collect();
        let trend_norm = trend_solve.iter().map(|v| v * v).sum();
        Ok(Self {
            variant,
            params,
            beta0,
            sigma2: sigma2.max(0.0),
            data,
            factor,
            weights,
            trend_solve,
            trend_norm,
            tuning: None,
            layout: None,
            sensitivity: None,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn theta(&self) -> &[f64] {
        self.params.theta()
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Relative nugget needed to factor the correlation matrix.
    pub fn nugget(&self) -> f64 {
        self.factor.nugget()
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    /// Training data as used by the model (without gradients for Kriging).
    pub fn data(&self) -> &SampleSet {
        &self.data
    }

    pub fn domain(&self) -> &DomainBox {
        self.data.domain()
    }

    /// Tuning diagnostics; absent for models fitted at fixed hyper-parameters
    /// or loaded from disk.
    pub fn tuning(&self) -> Option<&TuningOutcome> {
        self.tuning.as_ref()
    }

    pub fn layout(&self) -> Option<&LayoutSummary> {
        self.layout.as_ref()
    }

    pub fn sensitivity(&self) -> Option<&SensitivityResult> {
        self.sensitivity.as_ref()
    }

    fn corr(&self, u: &[f64]) -> Result<Vec<f64>> {
        correlation_vector(u, &self.data, &self.params, self.variant.uses_gradients())
    }

    /// Posterior mean at a unit-cube point.
    pub fn predict_mean_unit(&self, u: &[f64]) -> Result<f64> {
        let r = self.corr(u)?;
        Ok(self.beta0 + r.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>())
    }

    /// Posterior variance at a unit-cube point, clamped at zero.
    pub fn predict_variance_unit(&self, u: &[f64]) -> Result<f64> {
        let r = self.corr(u)?;
        let mut z = Mat::from_fn(r.len(), 1, |i, _| r[i]);
        self.factor.forward(&mut z);
        let (mut rr, mut fr) = (0.0, 0.0);
        for i in 0..r.len() {
            rr += z[(i, 0)] * z[(i, 0)];
            fr += self.trend_solve[i] * z[(i, 0)];
        }
        let s2 = self.sigma2 * (1.0 - rr + (1.0 - fr).powi(2) / self.trend_norm);
        Ok(s2.max(0.0))
    }

    /// Posterior mean at a point in physical coordinates.
    pub fn predict_mean(&self, x: &[f64]) -> Result<f64> {
        self.predict_mean_unit(&self.domain().to_unit(x)?)
    }

    /// Posterior variance at a point in physical coordinates.
    pub fn predict_variance(&self, x: &[f64]) -> Result<f64> {
        self.predict_variance_unit(&self.domain().to_unit(x)?)
    }

    /// Posterior means at many physical points, evaluated in parallel.
    pub fn predict_means(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.par_iter().map(|x| self.predict_mean(x)).collect()
    }

    fn to_document(&self) -> ModelDocument {
        ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            variant: self.variant,
            theta: self.params.theta().to_vec(),
            theta_lower: self.params.lower().to_vec(),
            theta_upper: self.params.upper().to_vec(),
            beta0: self.beta0,
            sigma2: self.sigma2,
            nugget: self.nugget(),
            alpha: self.tuning.as_ref().and_then(|t| t.alpha),
            tuning_evaluations: self.tuning.as_ref().map(|t| t.evaluations),
            layout: self.layout.clone(),
            domain: self.domain().clone(),
            training: TrainingData {
                sites: self.data.sites(),
                values: self.data.values().to_vec(),
                gradients: self.data.gradients(),
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    /// Rebuilds a model from its JSON document, re-factoring the correlation
    /// matrix from the embedded training data.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::invalid(format!(
                "not a model document (format '{}')",
                doc.format
            )));
        }
        if doc.version != MODEL_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                doc.version
            )));
        }
        let t = doc.training;
        let data = SampleSet::from_unit(doc.domain, &t.sites, t.values, t.gradients.as_deref())?;
        let params = KernelParams::with_bounds(doc.theta, doc.theta_lower, doc.theta_upper)?;
        let mut model = Self::fit(&data, doc.variant, params)?;
        let drift = (model.beta0 - doc.beta0).abs() + (model.sigma2 - doc.sigma2).abs();
        if drift > 1e-9 * (1.0 + doc.beta0.abs() + doc.sigma2.abs()) {
            log::warn!(
                "refitted model differs from the saved one (beta0 {} vs {}, sigma2 {} vs {})",
                model.beta0,
                doc.beta0,
                model.sigma2,
                doc.sigma2
            );
        }
        model.layout = doc.layout;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
