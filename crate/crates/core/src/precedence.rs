//! Temporal precedence: which features changed most between two releases,
//! measured by Hedges' g.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::data::ReleaseDataset;
use crate::error::{Error, Result};
use crate::stats::{mean, sample_std};

/// Default size of the precedented feature set.
pub const DEFAULT_M: usize = 5;

/// Pooled, sample-size weighted standard deviation of two groups.
pub fn pooled_std(n1: usize, s1: f64, n2: usize, s2: f64) -> Result<f64> {
    let total = n1 + n2;
    if total <= 2 {
        return Err(Error::UndefinedEffect { total });
    }
    let num = (n1 as f64 - 1.0) * s1 * s1 + (n2 as f64 - 1.0) * s2 * s2;
    Ok(libm::sqrt(num / (total as f64 - 2.0)))
}

/// `(mean(x) - mean(y)) / pooled_std`.
///
/// With zero pooled deviation the result is 0 for equal means and a signed
/// infinity otherwise; infinities rank above every finite effect.
pub fn hedges_g(values_x: &[f64], values_y: &[f64]) -> Result<f64> {
    if values_x.is_empty() || values_y.is_empty() {
        return Err(Error::EmptySample);
    }
    let s = pooled_std(values_x.len(), sample_std(values_x), values_y.len(), sample_std(values_y))?;
    let diff = mean(values_x) - mean(values_y);
    if s == 0.0 {
        return Ok(if diff == 0.0 {
            0.0
        } else if diff > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        });
    }
    Ok(diff / s)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrecedenceProfile {
    /// Effect size per feature; `None` where it is undefined.
    pub g: Vec<Option<f64>>,
    /// Features with a defined effect, by `|g|` descending then index.
    pub ranking: Vec<usize>,
    /// The first `m` entries of `ranking`.
    pub precedented: Vec<usize>,
    pub m: usize,
}

impl PrecedenceProfile {
    pub fn from_effects(g: Vec<Option<f64>>, m: usize) -> Self {
        let mut ranking: Vec<usize> = (0..g.len()).filter(|&i| g[i].is_some()).collect();
        ranking.sort_by(|&a, &b| {
            let (ga, gb) = (libm::fabs(g[a].unwrap_or(0.0)), libm::fabs(g[b].unwrap_or(0.0)));
            gb.partial_cmp(&ga).unwrap_or(Ordering::Equal).then(a.cmp(&b))
        });
        let precedented = ranking.iter().copied().take(m).collect();
        PrecedenceProfile { g, ranking, precedented, m }
    }

    pub fn is_precedented(&self, feature: usize) -> bool {
        self.precedented.contains(&feature)
    }

    pub fn rank_of(&self, feature: usize) -> Option<usize> {
        self.ranking.iter().position(|&f| f == feature)
    }
}

/// Per-feature effect sizes between releases `x` and `y` over their units,
/// with the top-`m` features by `|g|` marked precedented.
pub fn build_profile(x: &ReleaseDataset, y: &ReleaseDataset, m: usize) -> Result<PrecedenceProfile> {
    let d = x.feature_count();
    if y.feature_count() != d {
        return Err(Error::Dimension { expected: d, found: y.feature_count() });
    }
    if !(1..=d).contains(&m) {
        return Err(Error::param("m", alloc::format!("must lie in [1, {d}]")));
    }
    let g = (0..d).map(|f| hedges_g(&x.column(f), &y.column(f)).ok()).collect();
    Ok(PrecedenceProfile::from_effects(g, m))
}
