//! The CK object-oriented metric schema used as the feature space.

/// Number of static code metrics per code unit.
pub const FEATURE_COUNT: usize = 20;

/// Metric column names, in canonical feature-index order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "wmc", "dit", "noc", "cbo", "rfc", "lcom", "ca", "ce", "npm", "lcom3", "loc", "dam", "moa", "mfa", "cam", "ic", "cbm", "amc",
    "max_cc", "avg_cc",
];

/// Index of a metric by column name.
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

pub fn feature_name(index: usize) -> Option<&'static str> {
    FEATURE_NAMES.get(index).copied()
}

/// Default number of candidate features per split, `floor(sqrt(20))`.
pub const DEFAULT_FEATURES_PER_SPLIT: usize = 4;
