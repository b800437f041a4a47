//! Supervised entropy discretization with the MDL stopping rule
//! (Fayyad & Irani).

use alloc::vec::Vec;

use crate::data::ReleaseDataset;
use crate::plan::Interval;

/// Per-feature cut points and bin statistics on normalized `[0, 1]` values.
///
/// Bin `i` of a feature with cuts `c_1 < ... < c_m` is `[c_i, c_{i+1}]`
/// with `c_0 = 0` and `c_{m+1} = 1`; a value equal to a cut belongs to the
/// lower bin.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Discretizer {
    cuts: Vec<Vec<f64>>,
    frequencies: Vec<Vec<f64>>,
}

impl Discretizer {
    /// Build from explicit cut points; bin frequencies are uniform.
    pub fn from_cuts(cuts: Vec<Vec<f64>>) -> Self {
        let frequencies = cuts.iter().map(|c| alloc::vec![1.0 / (c.len() + 1) as f64; c.len() + 1]).collect();
        Discretizer { cuts, frequencies }
    }

    /// Build from explicit cut points and per-bin sampling frequencies.
    pub fn with_frequencies(cuts: Vec<Vec<f64>>, frequencies: Vec<Vec<f64>>) -> Self {
        debug_assert!(cuts.iter().zip(&frequencies).all(|(c, f)| c.len() + 1 == f.len()));
        Discretizer { cuts, frequencies }
    }

    pub fn feature_count(&self) -> usize {
        self.cuts.len()
    }

    pub fn cuts(&self, feature: usize) -> &[f64] {
        &self.cuts[feature]
    }

    pub fn bin_count(&self, feature: usize) -> usize {
        self.cuts[feature].len() + 1
    }

    /// Fraction of training values per bin.
    pub fn frequencies(&self, feature: usize) -> &[f64] {
        &self.frequencies[feature]
    }

    pub fn bin_of(&self, feature: usize, value: f64) -> usize {
        self.cuts[feature].iter().take_while(|&&c| c < value).count()
    }

    pub fn bin_bounds(&self, feature: usize, bin: usize) -> Interval {
        let cuts = &self.cuts[feature];
        let lo = if bin == 0 { 0.0 } else { cuts[bin - 1] };
        let hi = if bin == cuts.len() { 1.0 } else { cuts[bin] };
        Interval { lo, hi }
    }

    /// The bin interval containing `value`.
    pub fn interval_of(&self, feature: usize, value: f64) -> Interval {
        self.bin_bounds(feature, self.bin_of(feature, value))
    }
}

/// Fit cut points per feature against the defect label of each unit.
/// Expects values already normalized into `[0, 1]`.
pub fn fit_discretizer(training: &ReleaseDataset) -> Discretizer {
    let labels: Vec<u8> = training.units().iter().map(|u| u.label()).collect();
    let mut cuts = Vec::with_capacity(training.feature_count());
    let mut frequencies = Vec::with_capacity(training.feature_count());
    for f in 0..training.feature_count() {
        let values = training.column(f);
        let feature_cuts = mdlp_cut_points(&values, &labels);
        let mut counts = alloc::vec![0usize; feature_cuts.len() + 1];
        for &v in &values {
            counts[feature_cuts.iter().take_while(|&&c| c < v).count()] += 1;
        }
        let n = values.len();
        frequencies.push(if n == 0 {
            alloc::vec![1.0 / counts.len() as f64; counts.len()]
        } else {
            counts.iter().map(|&c| c as f64 / n as f64).collect()
        });
        cuts.push(feature_cuts);
    }
    Discretizer { cuts, frequencies }
}

/// Class counts for two labels.
type Counts = [usize; 2];

fn entropy(c: Counts) -> f64 {
    let n = (c[0] + c[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    c.iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / n;
            -p * libm::log2(p)
        })
        .sum()
}

fn classes(c: Counts) -> f64 {
    c.iter().filter(|&&k| k > 0).count() as f64
}

/// Tolerance for equal partition entropies; the lowest cut wins ties.
pub const ENTROPY_TIE: f64 = 1e-12;

/// Recursive minimum-entropy binary splitting with the MDL acceptance test.
/// Candidate cuts are midpoints between consecutive distinct values. Returns
/// strictly increasing cut points.
pub fn mdlp_cut_points(values: &[f64], labels: &[u8]) -> Vec<f64> {
    let mut rows: Vec<(f64, u8)> = values.iter().copied().zip(labels.iter().copied()).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cuts = Vec::new();
    split(&rows, &mut cuts);
    cuts.sort_by(f64::total_cmp);
    cuts
}

fn split(rows: &[(f64, u8)], cuts: &mut Vec<f64>) {
    let n = rows.len();
    if n < 2 {
        return;
    }
    let mut total: Counts = [0, 0];
    for r in rows {
        total[usize::from(r.1.min(1))] += 1;
    }
    let ent = entropy(total);
    if ent == 0.0 {
        return;
    }

    let mut left: Counts = [0, 0];
    let mut best: Option<(f64, usize, Counts)> = None;
    for i in 0..n - 1 {
        left[usize::from(rows[i].1.min(1))] += 1;
        if rows[i].0 == rows[i + 1].0 {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let nl = (i + 1) as f64;
        let e = nl / n as f64 * entropy(left) + (n as f64 - nl) / n as f64 * entropy(right);
        if best.is_none_or(|(b, _, _)| e < b - ENTROPY_TIE) {
            best = Some((e, i, left));
        }
    }
    let Some((e, i, left)) = best else {
        return;
    };
    let right = [total[0] - left[0], total[1] - left[1]];
    let gain = ent - e;
    let delta = libm::log2(libm::pow(3.0, classes(total)) - 2.0)
        - (classes(total) * ent - classes(left) * entropy(left) - classes(right) * entropy(right));
    let threshold = (libm::log2(n as f64 - 1.0) + delta) / n as f64;
    if gain <= threshold {
        return;
    }
    cuts.push(crate::forest::midpoint(rows[i].0, rows[i + 1].0));
    split(&rows[..=i], cuts);
    split(&rows[i + 1..], cuts);
}
