//! Release datasets, cross-release alignment, min-max normalization and
//! SMOTE rebalancing.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::metrics::FEATURE_COUNT;
use crate::seed;

/// A named region of code (file or class) in one release.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CodeUnit {
    pub name: String,
    pub features: Vec<f64>,
    pub bug_count: u32,
}

impl CodeUnit {
    pub fn new(name: impl Into<String>, features: Vec<f64>, bug_count: u32) -> Self {
        CodeUnit { name: name.into(), features, bug_count }
    }

    pub fn is_defective(&self) -> bool {
        self.bug_count > 0
    }

    pub fn label(&self) -> u8 {
        u8::from(self.is_defective())
    }
}

/// One release of one project.
///
/// Unit names are unique, every unit has `feature_count` finite features.
/// Files in the CK format always have 20 features; other dimensions exist for
/// small hand-built fixtures.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReleaseDataset {
    project_name: String,
    version: String,
    feature_count: usize,
    units: Vec<CodeUnit>,
}

impl ReleaseDataset {
    pub fn new(
        project_name: impl Into<String>,
        version: impl Into<String>,
        feature_count: usize,
        units: Vec<CodeUnit>,
    ) -> Result<Self> {
        let version = version.into();
        let mut seen = BTreeSet::new();
        for unit in &units {
            if !seen.insert(unit.name.as_str()) {
                return Err(Error::DuplicateUnit { name: unit.name.clone(), version });
            }
            if unit.features.len() != feature_count {
                return Err(Error::FeatureCount { name: unit.name.clone(), expected: feature_count, found: unit.features.len() });
            }
            if let Some(feature) = unit.features.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { name: unit.name.clone(), feature });
            }
        }
        Ok(ReleaseDataset { project_name: project_name.into(), version, feature_count, units })
    }

    /// A release in the 20-metric CK schema.
    pub fn ck(project_name: impl Into<String>, version: impl Into<String>, units: Vec<CodeUnit>) -> Result<Self> {
        Self::new(project_name, version, FEATURE_COUNT, units)
    }

    pub fn project_name(&self) -> &str {
        &self.project_name
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn units(&self) -> &[CodeUnit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn unit(&self, name: &str) -> Option<&CodeUnit> {
        self.units.iter().find(|u| u.name == name)
    }

    pub fn defective_count(&self) -> usize {
        self.units.iter().filter(|u| u.is_defective()).count()
    }

    /// Values of one feature across all units, in unit order.
    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.units.iter().map(|u| u.features[feature]).collect()
    }

    fn restricted(&self, names: &BTreeSet<&str>) -> ReleaseDataset {
        let mut units: Vec<CodeUnit> = self.units.iter().filter(|u| names.contains(u.name.as_str())).cloned().collect();
        units.sort_by(|a, b| a.name.cmp(&b.name));
        ReleaseDataset {
            project_name: self.project_name.clone(),
            version: self.version.clone(),
            feature_count: self.feature_count,
            units,
        }
    }
}

/// Three consecutive releases restricted to the units present in all three,
/// each sorted by unit name.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlignedTriple {
    project_name: String,
    x: ReleaseDataset,
    y: ReleaseDataset,
    z: ReleaseDataset,
}

impl AlignedTriple {
    pub fn project_name(&self) -> &str {
        &self.project_name
    }

    pub fn x(&self) -> &ReleaseDataset {
        &self.x
    }

    pub fn y(&self) -> &ReleaseDataset {
        &self.y
    }

    pub fn z(&self) -> &ReleaseDataset {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn into_parts(self) -> (ReleaseDataset, ReleaseDataset, ReleaseDataset) {
        (self.x, self.y, self.z)
    }
}

/// Keep only the units whose name appears in all three releases.
pub fn align_releases(x: &ReleaseDataset, y: &ReleaseDataset, z: &ReleaseDataset) -> Result<AlignedTriple> {
    for other in [y, z] {
        if other.project_name != x.project_name {
            return Err(Error::ProjectMismatch(format!("`{}` vs `{}`", x.project_name, other.project_name)));
        }
        if other.feature_count != x.feature_count {
            return Err(Error::ProjectMismatch(format!("{} features vs {} features", x.feature_count, other.feature_count)));
        }
    }
    fn names_of(d: &ReleaseDataset) -> BTreeSet<&str> {
        d.units.iter().map(|u| u.name.as_str()).collect()
    }
    let (nx, ny, nz) = (names_of(x), names_of(y), names_of(z));
    let common: BTreeSet<&str> = nx.iter().filter(|n| ny.contains(*n) && nz.contains(*n)).copied().collect();
    if common.is_empty() {
        return Err(Error::EmptyAlignment { project: x.project_name.clone() });
    }
    Ok(AlignedTriple {
        project_name: x.project_name.clone(),
        x: x.restricted(&common),
        y: y.restricted(&common),
        z: z.restricted(&common),
    })
}

/// Per-feature min-max scaling into `[0, 1]`, fitted on one release.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Normalizer {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(release: &ReleaseDataset) -> Self {
        let d = release.feature_count;
        if release.is_empty() {
            return Normalizer { min: alloc::vec![0.0; d], max: alloc::vec![0.0; d] };
        }
        let mut min = alloc::vec![f64::INFINITY; d];
        let mut max = alloc::vec![f64::NEG_INFINITY; d];
        for unit in &release.units {
            for (j, &v) in unit.features.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Normalizer { min, max }
    }

    pub fn feature_count(&self) -> usize {
        self.min.len()
    }

    pub fn bounds(&self, feature: usize) -> (f64, f64) {
        (self.min[feature], self.max[feature])
    }

    /// Scale one value; degenerate features map to 0, results are clamped.
    pub fn transform_value(&self, feature: usize, value: f64) -> f64 {
        let (lo, hi) = (self.min[feature], self.max[feature]);
        let span = hi - lo;
        if !(span > 0.0) {
            return 0.0;
        }
        ((value - lo) / span).clamp(0.0, 1.0)
    }

    pub fn transform(&self, features: &[f64]) -> Vec<f64> {
        features.iter().enumerate().map(|(j, &v)| self.transform_value(j, v)).collect()
    }

    pub fn apply(&self, release: &ReleaseDataset) -> ReleaseDataset {
        let units = release
            .units
            .iter()
            .map(|u| CodeUnit { name: u.name.clone(), features: self.transform(&u.features), bug_count: u.bug_count })
            .collect();
        ReleaseDataset {
            project_name: release.project_name.clone(),
            version: release.version.clone(),
            feature_count: release.feature_count,
            units,
        }
    }
}

pub fn fit_normalizer(release: &ReleaseDataset) -> Normalizer {
    Normalizer::fit(release)
}

pub fn apply_normalizer(normalizer: &Normalizer, release: &ReleaseDataset) -> ReleaseDataset {
    normalizer.apply(release)
}

/// Default neighbour count for [`smote`].
pub const DEFAULT_SMOTE_NEIGHBORS: usize = 5;

/// Oversample the minority class to parity with SMOTE.
///
/// Each synthetic unit lies on the segment between a minority unit and one of
/// its `k_neighbors` nearest minority neighbours (Euclidean; ties by position).
/// When fewer than `k_neighbors + 1` minority units exist, every other
/// minority unit is a neighbour. Synthetic units are appended after the
/// originals and carry `bug_count` 1 (or 0 when the clean class is the
/// minority).
pub fn smote(training: &ReleaseDataset, k_neighbors: usize, seed: u64) -> Result<ReleaseDataset> {
    if k_neighbors == 0 {
        return Err(Error::param("k_neighbors", "must be at least 1"));
    }
    let defective = training.defective_count();
    let clean = training.len() - defective;
    if defective == clean {
        return Ok(training.clone());
    }
    let minority_label = u8::from(defective < clean);
    let minority: Vec<&CodeUnit> = training.units.iter().filter(|u| u.label() == minority_label).collect();
    let deficit = defective.max(clean) - minority.len();
    if minority.len() < 2 {
        return Err(Error::Rebalance { found: minority.len() });
    }
    let k = k_neighbors.min(minority.len() - 1);

    let neighbours: Vec<Vec<usize>> = (0..minority.len())
        .map(|i| {
            let mut by_distance: Vec<(f64, usize)> = (0..minority.len())
                .filter(|&j| j != i)
                .map(|j| (squared_distance(&minority[i].features, &minority[j].features), j))
                .collect();
            by_distance.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
            by_distance.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect();

    let mut rng = seed::rng(seed);
    let mut units = training.units.clone();
    let existing: BTreeSet<String> = units.iter().map(|u| u.name.clone()).collect();
    let mut next_id = 0usize;
    for _ in 0..deficit {
        let base = rng.gen_range(0..minority.len());
        let other = neighbours[base][rng.gen_range(0..k)];
        let t: f64 = rng.gen();
        let (p, q) = (&minority[base].features, &minority[other].features);
        let features = p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect();
        let name = loop {
            let candidate = format!("smote-{next_id:06}");
            next_id += 1;
            if !existing.contains(&candidate) {
                break candidate;
            }
        };
        units.push(CodeUnit { name, features, bug_count: u32::from(minority_label) });
    }
    ReleaseDataset::new(training.project_name.clone(), training.version.to_string(), training.feature_count, units)
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
