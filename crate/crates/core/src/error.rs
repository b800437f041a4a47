use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate unit name `{name}` in release {version}")]
    DuplicateUnit { name: String, version: String },

    #[error("unit `{name}` has {found} features, expected {expected}")]
    FeatureCount { name: String, expected: usize, found: usize },

    #[error("unit `{name}` has a non-finite value for feature {feature}")]
    NonFinite { name: String, feature: usize },

    #[error("releases do not belong to the same project: {0}")]
    ProjectMismatch(String),

    #[error("no unit name is shared by all three releases of {project}")]
    EmptyAlignment { project: String },

    #[error("rebalancing needs at least 2 minority units, found {found}")]
    Rebalance { found: usize },

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("feature vector has length {found}, model expects {expected}")]
    Dimension { expected: usize, found: usize },

    #[error("effect size undefined: n1 + n2 = {total} must exceed 2")]
    UndefinedEffect { total: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("unit names differ: `{left}` vs `{right}`")]
    NameMismatch { left: String, right: String },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
