//! Flat TOML experiment configuration.
//!
//! ```toml
//! data_root = "data"
//! projects = ["jedit", "camel:1.2,1.4,1.6"]
//! planners = ["classical", "time", "random"]
//! m = 5
//! seed = 1
//! ```
//!
//! A project named without versions takes them from the roster. Relative
//! paths resolve against the directory holding the config file.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use timelime_core::explain::{DEFAULT_SAMPLES, DEFAULT_TOP_K};
use timelime_core::forest::ForestParams;
use timelime_core::metrics::FEATURE_COUNT;
use timelime_core::plan::DEFAULT_P_CHANGE;
use timelime_core::precedence::DEFAULT_M;
use timelime_core::{KTestConfig, OverlapMode, PlannerId};

use crate::roster;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config key `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, reason: reason.into() }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    data_root: Option<PathBuf>,
    projects: Option<Vec<String>>,
    planners: Option<Vec<String>>,
    m: Option<i64>,
    samples: Option<i64>,
    top_k: Option<i64>,
    p_change: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    trees: Option<i64>,
    max_depth: Option<i64>,
    features_per_split: Option<i64>,
    min_leaf: Option<i64>,
    bootstrap: Option<bool>,
    smote_k: Option<i64>,
    kernel_width: Option<f64>,
    overlap: Option<String>,
    threads: Option<i64>,
    save_models: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectSpec {
    pub name: String,
    /// Releases x, y, z.
    pub versions: [String; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data_root: PathBuf,
    pub projects: Vec<ProjectSpec>,
    pub planners: Vec<PlannerId>,
    pub ktest: KTestConfig,
    pub out: PathBuf,
    /// Projects run concurrently on up to this many threads.
    pub threads: usize,
    pub save_models: bool,
    /// `(key, value)` for every key the file left out.
    pub defaulted: Vec<(&'static str, String)>,
}

fn compare_versions(a: &str, b: &str) -> Ordering {
    let mut pa = a.split('.');
    let mut pb = b.split('.');
    loop {
        match (pa.next(), pb.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => {
                let o = match (x.parse::<u64>(), y.parse::<u64>()) {
                    (Ok(i), Ok(j)) => i.cmp(&j),
                    _ => x.cmp(y),
                };
                if o != Ordering::Equal {
                    return o;
                }
            }
        }
    }
}

pub fn parse_project(entry: &str) -> Result<ProjectSpec, ConfigError> {
    let (name, versions) = match entry.split_once(':') {
        Some((n, v)) => (n.trim(), Some(v)),
        None => (entry.trim(), None),
    };
    if name.is_empty() {
        return Err(invalid("projects", format!("entry {entry:?} has no project name")));
    }
    let versions: Vec<String> = match versions {
        Some(v) => v.split(',').map(|s| s.trim().to_string()).collect(),
        None => match roster::lookup(name) {
            Some(e) => e.versions.iter().map(|s| s.to_string()).collect(),
            None => return Err(invalid("projects", format!("{name} is not in the roster; list its versions as {name}:x,y,z"))),
        },
    };
    let versions: [String; 3] = versions
        .try_into()
        .map_err(|v: Vec<String>| invalid("projects", format!("{name} needs exactly three versions, got {}", v.len())))?;
    if versions.iter().any(String::is_empty) {
        return Err(invalid("projects", format!("{name} has an empty version")));
    }
    if compare_versions(&versions[0], &versions[1]) != Ordering::Less
        || compare_versions(&versions[1], &versions[2]) != Ordering::Less
    {
        return Err(invalid("projects", format!("{name} versions must be distinct and increasing, got {}", versions.join(","))));
    }
    Ok(ProjectSpec { name: name.to_string(), versions })
}

fn in_range(key: &'static str, v: i64, lo: i64, hi: i64) -> Result<usize, ConfigError> {
    if v < lo || v > hi {
        return Err(invalid(key, format!("{v} is outside [{lo}, {hi}]")));
    }
    Ok(v as usize)
}

/// Parse and validate config text; relative paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    let mut defaulted = Vec::new();
    macro_rules! or_default {
        ($field:ident, $default:expr) => {
            match raw.$field {
                Some(v) => v,
                None => {
                    let d = $default;
                    defaulted.push((stringify!($field), format!("{d:?}")));
                    d
                }
            }
        };
    }
    let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

    let data_root = resolve(or_default!(data_root, PathBuf::from("data")));
    let projects = or_default!(projects, Vec::<String>::new()).iter().map(|p| parse_project(p)).collect::<Result<Vec<_>, _>>()?;
    for (i, p) in projects.iter().enumerate() {
        if projects[..i].iter().any(|q| q.name == p.name) {
            return Err(invalid("projects", format!("{} is listed twice", p.name)));
        }
    }
    let planner_names = or_default!(planners, PlannerId::ALL.iter().map(|p| p.as_str().to_string()).collect::<Vec<_>>());
    let mut planners = Vec::new();
    for name in &planner_names {
        let id: PlannerId = name.parse().map_err(|_| invalid("planners", format!("unknown planner {name:?}")))?;
        if !planners.contains(&id) {
            planners.push(id);
        }
    }
    if planners.is_empty() {
        return Err(invalid("planners", "at least one planner is required"));
    }
    let d = FEATURE_COUNT as i64;
    let m = in_range("m", or_default!(m, DEFAULT_M as i64), 1, d)?;
    let top_k = in_range("top_k", or_default!(top_k, DEFAULT_TOP_K as i64), 1, d)?;
    let samples = in_range("samples", or_default!(samples, DEFAULT_SAMPLES as i64), 1, i64::from(u32::MAX))?;
    let p_change = or_default!(p_change, DEFAULT_P_CHANGE);
    if !(0.0..=1.0).contains(&p_change) {
        return Err(invalid("p_change", format!("{p_change} is outside [0, 1]")));
    }
    let seed = or_default!(seed, 0u64);
    let out = resolve(or_default!(out, PathBuf::from("out")));
    let forest_defaults = ForestParams::default();
    let forest = ForestParams {
        tree_count: in_range("trees", or_default!(trees, forest_defaults.tree_count as i64), 1, 100_000)?,
        max_depth: match raw.max_depth {
            Some(v) => Some(in_range("max_depth", v, 1, 10_000)?),
            None => {
                defaulted.push(("max_depth", "unlimited".into()));
                None
            }
        },
        features_per_split: in_range(
            "features_per_split",
            or_default!(features_per_split, forest_defaults.features_per_split as i64),
            1,
            d,
        )?,
        min_leaf: in_range("min_leaf", or_default!(min_leaf, forest_defaults.min_leaf as i64), 1, 100_000)?,
        bootstrap: or_default!(bootstrap, forest_defaults.bootstrap),
        seed: 0,
    };
    let smote_neighbors = in_range("smote_k", or_default!(smote_k, 5), 1, 1000)?;
    let kernel_width = match raw.kernel_width {
        Some(w) if w > 0.0 && w.is_finite() => Some(w),
        Some(w) => return Err(invalid("kernel_width", format!("{w} is not positive"))),
        None => {
            defaulted.push(("kernel_width", "0.75 * sqrt(20)".into()));
            None
        }
    };
    let overlap = match or_default!(overlap, "containment".to_string()).as_str() {
        "containment" => OverlapMode::Containment,
        "strict" => OverlapMode::Strict,
        other => return Err(invalid("overlap", format!("{other:?} is neither \"containment\" nor \"strict\""))),
    };
    let threads = in_range("threads", or_default!(threads, default_threads() as i64), 1, 1024)?;
    let save_models = or_default!(save_models, false);

    let ktest = KTestConfig { forest, smote_neighbors, samples, top_k, m, p_change, kernel_width, overlap, seed };
    ktest.validate(FEATURE_COUNT).map_err(|e| invalid("config", e.to_string()))?;
    Ok(ExperimentConfig { data_root, projects, planners, ktest, out, threads, save_models, defaulted })
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Read, parse and validate a config file.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base)
}

impl ExperimentConfig {
    /// Resolved settings, one `key = value` per line, defaulted keys marked.
    pub fn describe(&self) -> String {
        let k = &self.ktest;
        let mut s = String::new();
        let mut line = |key: &str, value: String| {
            let mark = if self.defaulted.iter().any(|(d, _)| *d == key) { "  (default)" } else { "" };
            let _ = writeln!(s, "{key} = {value}{mark}");
        };
        line("data_root", self.data_root.display().to_string());
        line(
            "projects",
            self.projects.iter().map(|p| format!("{}:{}", p.name, p.versions.join(","))).collect::<Vec<_>>().join(" "),
        );
        line("planners", self.planners.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(","));
        line("m", k.m.to_string());
        line("samples", k.samples.to_string());
        line("top_k", k.top_k.to_string());
        line("p_change", k.p_change.to_string());
        line("seed", k.seed.to_string());
        line("out", self.out.display().to_string());
        line("trees", k.forest.tree_count.to_string());
        line("max_depth", k.forest.max_depth.map_or("unlimited".into(), |d| d.to_string()));
        line("features_per_split", k.forest.features_per_split.to_string());
        line("min_leaf", k.forest.min_leaf.to_string());
        line("bootstrap", k.forest.bootstrap.to_string());
        line("smote_k", k.smote_neighbors.to_string());
        line("kernel_width", k.kernel_width.map_or("0.75 * sqrt(20)".into(), |w| w.to_string()));
        line("overlap", format!("{:?}", k.overlap).to_lowercase());
        line("threads", self.threads.to_string());
        line("save_models", self.save_models.to_string());
        s
    }
}
