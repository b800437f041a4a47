//! LIME-style tabular explanations: entropy discretizer, neighbourhood
//! sampler, similarity kernel, K-Lasso selection and a weighted local linear
//! surrogate.

mod discretize;
pub mod lasso;
mod sampler;

use alloc::string::String;
use alloc::vec::Vec;

pub use self::discretize::{fit_discretizer, mdlp_cut_points, Discretizer, ENTROPY_TIE};
pub use self::lasso::LocalModel;
pub use self::sampler::{
    default_kernel_width, generate_samples, generate_samples_with_width, kernel_weight, SampleSet, DEFAULT_SAMPLES,
};

use crate::data::CodeUnit;
use crate::error::{Error, Result};
use crate::forest::BlackBox;
use crate::plan::Interval;

/// Default number of features kept per explanation.
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExplanationEntry {
    pub feature: usize,
    /// Positive weights push the prediction toward defective.
    pub weight: f64,
    /// Bin of the explained instance for this feature.
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Explanation {
    pub unit: String,
    /// Sorted by `|weight|` descending, ties by feature index; at most `K`.
    pub entries: Vec<ExplanationEntry>,
    pub intercept: f64,
    /// Weighted R² clamped to `[0, 1]`.
    pub fidelity: f64,
    pub raw_fidelity: f64,
    pub seed: u64,
    /// Fewer than `K` features could be selected.
    pub path_exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplainParams {
    pub top_k: usize,
    pub samples: usize,
    /// `None` uses [`default_kernel_width`].
    pub kernel_width: Option<f64>,
}

impl Default for ExplainParams {
    fn default() -> Self {
        ExplainParams { top_k: DEFAULT_TOP_K, samples: DEFAULT_SAMPLES, kernel_width: None }
    }
}

/// Fit the K-Lasso surrogate to a labelled sample set.
pub fn k_lasso(samples: &SampleSet, k: usize) -> Result<LocalModel> {
    if samples.probabilities.len() != samples.len() {
        return Err(Error::param("samples", "black-box probabilities are missing"));
    }
    if !(1..=samples.feature_count().max(1)).contains(&k) {
        return Err(Error::param("k", alloc::format!("must lie in [1, {}]", samples.feature_count())));
    }
    lasso::k_lasso(&samples.binary, &samples.probabilities, &samples.weights, k)
}

/// Weighted R² of `model` on the sample set; 0 when the targets are constant.
pub fn weighted_r2(samples: &SampleSet, model: &LocalModel) -> f64 {
    let total: f64 = samples.weights.iter().sum();
    let mean = samples.weights.iter().zip(&samples.probabilities).map(|(w, p)| w * p).sum::<f64>() / total;
    let mut ss_tot = 0.0;
    let mut ss_res = 0.0;
    for ((row, &p), &w) in samples.binary.iter().zip(&samples.probabilities).zip(&samples.weights) {
        ss_tot += w * (p - mean) * (p - mean);
        let r = p - model.predict(row);
        ss_res += w * r * r;
    }
    if ss_tot <= 1e-15 * total {
        return 0.0;
    }
    1.0 - ss_res / ss_tot
}

pub fn explain_instance<B: BlackBox + ?Sized>(
    model: &B,
    instance: &CodeUnit,
    discretizer: &Discretizer,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<Explanation> {
    explain_instance_with(model, instance, discretizer, &ExplainParams { top_k: k, samples: n, kernel_width: None }, seed)
}

/// Explain one normalized instance against a black box.
pub fn explain_instance_with<B: BlackBox + ?Sized>(
    model: &B,
    instance: &CodeUnit,
    discretizer: &Discretizer,
    params: &ExplainParams,
    seed: u64,
) -> Result<Explanation> {
    let d = instance.features.len();
    if model.feature_count() != d {
        return Err(Error::Dimension { expected: model.feature_count(), found: d });
    }
    let width = params.kernel_width.unwrap_or_else(|| default_kernel_width(d));
    let mut samples = generate_samples_with_width(&instance.features, discretizer, params.samples, seed, width)?;
    samples.query(model)?;
    let surrogate = k_lasso(&samples, params.top_k)?;
    let raw_fidelity = weighted_r2(&samples, &surrogate);

    let mut entries: Vec<ExplanationEntry> = surrogate
        .selected
        .iter()
        .zip(&surrogate.coefficients)
        .map(|(&feature, &weight)| ExplanationEntry {
            feature,
            weight,
            interval: discretizer.interval_of(feature, instance.features[feature]),
        })
        .collect();
    entries.sort_by(|a, b| libm::fabs(b.weight).total_cmp(&libm::fabs(a.weight)).then(a.feature.cmp(&b.feature)));

    Ok(Explanation {
        unit: instance.name.clone(),
        entries,
        intercept: surrogate.intercept,
        fidelity: raw_fidelity.clamp(0.0, 1.0),
        raw_fidelity,
        seed,
        path_exhausted: surrogate.path_exhausted,
    })
}
