//! Small descriptive statistics and the Mann-Whitney U test.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with the `n - 1` denominator; 0 for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
}

pub fn sample_std(values: &[f64]) -> f64 {
    libm::sqrt(sample_variance(values))
}

/// Upper tail of the standard normal distribution.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// Normal-approximation z score (continuity corrected).
    pub z: f64,
    /// Two-sided p-value.
    pub p_value: f64,
}

/// Two-sided Mann-Whitney U test, normal approximation with tie correction
/// and continuity correction. All-equal samples give `p = 1`.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return Err(Error::EmptySample);
    }
    let mut pooled: Vec<(f64, bool)> = a.iter().map(|&v| (v, true)).chain(b.iter().map(|&v| (v, false))).collect();
    pooled.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));

    let n = pooled.len();
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // ranks i+1..=j share their average
        let avg = (i + 1 + j) as f64 / 2.0;
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += avg * pooled[i..j].iter().filter(|p| p.1).count() as f64;
        i = j;
    }

    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let u = rank_sum_a - n1f * (n1f + 1.0) / 2.0;
    let mu = n1f * n2f / 2.0;
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if !(var > 0.0) {
        return Ok(MannWhitney { u, z: 0.0, p_value: 1.0 });
    }
    let diff = libm::fabs(u - mu);
    let z = if diff > 0.5 { (diff - 0.5) / libm::sqrt(var) } else { 0.0 };
    let p_value = (2.0 * normal_sf(z)).min(1.0);
    Ok(MannWhitney { u, z: if u < mu { -z } else { z }, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std_uses_n_minus_one() {
        assert_eq!(sample_std(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(sample_std(&[5.0]), 0.0);
    }

    #[test]
    fn identical_samples_have_unit_p() {
        let r = mann_whitney_u(&[0.3, 0.3, 0.3], &[0.3, 0.3]).unwrap();
        assert_eq!(r.p_value, 1.0);
        let a = [0.1, 0.5, 0.9, 0.2];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.u, 8.0);
        assert_eq!(r.p_value, 1.0);
    }

    /// U counted directly over all pairs, ties worth one half.
    fn pair_count(a: &[f64], b: &[f64]) -> f64 {
        let mut u = 0.0;
        for &x in a {
            for &y in b {
                if x > y {
                    u += 1.0;
                } else if x == y {
                    u += 0.5;
                }
            }
        }
        u
    }

    #[test]
    fn u_matches_pair_enumeration() {
        let cases: [(&[f64], &[f64]); 4] = [
            (&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]),
            (&[0.25, 0.5, 0.5, 1.0], &[0.0, 0.5, 0.75]),
            (&[1.0, 2.0], &[3.0, 2.0, 1.0, 0.0]),
            (&[0.2], &[0.2, 0.4]),
        ];
        for (a, b) in cases {
            assert_eq!(mann_whitney_u(a, b).unwrap().u, pair_count(a, b));
        }
    }

    #[test]
    fn disjoint_supports_are_significant_from_four_per_group() {
        let a = [0.0; 4];
        let b = [1.0; 4];
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.u, 0.0);
        assert!(r.p_value < 0.05, "p = {}", r.p_value);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert_eq!(mann_whitney_u(&[], &[1.0]), Err(Error::EmptySample));
    }
}
