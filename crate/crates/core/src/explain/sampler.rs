//! Neighbourhood sampling around an instance and the similarity kernel.

use alloc::vec::Vec;

use rand::Rng as _;

use super::discretize::Discretizer;
use crate::error::{Error, Result};
use crate::forest::BlackBox;
use crate::seed;

/// Default number of synthetic neighbours.
pub const DEFAULT_SAMPLES: usize = 5000;

/// Default kernel width on the binary interpretable space.
pub fn default_kernel_width(feature_count: usize) -> f64 {
    0.75 * libm::sqrt(feature_count as f64)
}

/// `exp(-distance² / width²)`.
pub fn kernel_weight(distance: f64, width: f64) -> f64 {
    libm::exp(-(distance * distance) / (width * width))
}

/// Synthetic neighbourhood of one instance.
///
/// Row 0 is the instance itself, followed by `n` draws. `binary[j][f]` is 1
/// when draw `j` fell in the same bin as the instance for feature `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub features: Vec<Vec<f64>>,
    pub binary: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Black-box probabilities; empty until [`SampleSet::query`] runs.
    pub probabilities: Vec<f64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.binary.first().map_or(0, Vec::len)
    }

    pub fn query<B: BlackBox + ?Sized>(&mut self, model: &B) -> Result<()> {
        self.probabilities = self.features.iter().map(|row| model.predict_proba(row)).collect::<Result<_>>()?;
        Ok(())
    }
}

pub fn generate_samples(instance: &[f64], discretizer: &Discretizer, n: usize, seed: u64) -> Result<SampleSet> {
    generate_samples_with_width(instance, discretizer, n, seed, default_kernel_width(instance.len()))
}

/// Each draw picks, per feature, a bin with probability equal to its training
/// frequency and then a value uniformly inside that bin.
pub fn generate_samples_with_width(
    instance: &[f64],
    discretizer: &Discretizer,
    n: usize,
    seed: u64,
    width: f64,
) -> Result<SampleSet> {
    let d = instance.len();
    if discretizer.feature_count() != d {
        return Err(Error::Dimension { expected: discretizer.feature_count(), found: d });
    }
    if n == 0 {
        return Err(Error::param("samples", "must be at least 1"));
    }
    if !(width > 0.0) {
        return Err(Error::param("kernel_width", "must be positive"));
    }
    let home: Vec<usize> = (0..d).map(|f| discretizer.bin_of(f, instance[f])).collect();
    let mut rng = seed::rng(seed);

    let mut features = Vec::with_capacity(n + 1);
    let mut binary = Vec::with_capacity(n + 1);
    let mut weights = Vec::with_capacity(n + 1);
    features.push(instance.to_vec());
    binary.push(alloc::vec![1.0; d]);
    weights.push(1.0);

    for _ in 0..n {
        let mut row = Vec::with_capacity(d);
        let mut same = Vec::with_capacity(d);
        let mut differing = 0usize;
        for f in 0..d {
            let bin = pick_bin(discretizer.frequencies(f), rng.gen());
            let bounds = discretizer.bin_bounds(f, bin);
            let u: f64 = rng.gen();
            row.push(bounds.lo + u * bounds.width());
            if bin == home[f] {
                same.push(1.0);
            } else {
                same.push(0.0);
                differing += 1;
            }
        }
        features.push(row);
        binary.push(same);
        weights.push(kernel_weight(libm::sqrt(differing as f64), width));
    }
    Ok(SampleSet { features, binary, weights, probabilities: Vec::new() })
}

fn pick_bin(frequencies: &[f64], draw: f64) -> usize {
    let total: f64 = frequencies.iter().sum();
    let target = draw * total;
    let mut acc = 0.0;
    for (i, &p) in frequencies.iter().enumerate() {
        acc += p;
        if target < acc {
            return i;
        }
    }
    // draw * total can round up to total
    frequencies.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
