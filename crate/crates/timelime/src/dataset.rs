//! CSV release files.
//!
//! Columns are matched by header name, case-insensitively; extra columns are
//! ignored. The unit name is the last column headed `name` (or `name.N`, as
//! written by tools that deduplicate headers), since the public defect files
//! carry the project and version in earlier `name`-like columns. The defect
//! count is the `bug` (or `bugs`) column.

use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use thiserror::Error;
use timelime_core::metrics::FEATURE_NAMES;
use timelime_core::{CodeUnit, ReleaseDataset};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: malformed CSV: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: missing column `{column}`", path.display())]
    MissingColumn { path: PathBuf, column: String },
    #[error("{}: row {row}, column `{column}`: cannot parse {value:?} as {expected}", path.display())]
    Parse { path: PathBuf, row: usize, column: String, value: String, expected: &'static str },
    #[error("{}: {source}", path.display())]
    Invalid { path: PathBuf, source: timelime_core::Error },
}

struct Layout {
    name: usize,
    bug: usize,
    metrics: Vec<usize>,
}

fn layout(headers: &csv::StringRecord, path: &Path) -> Result<Layout, LoadError> {
    let norm: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    let missing = |column: &str| LoadError::MissingColumn { path: path.to_path_buf(), column: column.into() };
    let name = norm
        .iter()
        .rposition(|h| h == "name" || h.strip_prefix("name.").is_some_and(|n| n.parse::<u32>().is_ok()))
        .ok_or_else(|| missing("name"))?;
    let bug =
        norm.iter().position(|h| h == "bug").or_else(|| norm.iter().position(|h| h == "bugs")).ok_or_else(|| missing("bug"))?;
    let metrics =
        FEATURE_NAMES.iter().map(|m| norm.iter().position(|h| h == m).ok_or_else(|| missing(m))).collect::<Result<_, _>>()?;
    Ok(Layout { name, bug, metrics })
}

fn parse_bug(raw: &str) -> Option<u32> {
    if let Ok(v) = raw.parse::<u32>() {
        return Some(v);
    }
    // some exports write counts as floats
    let v: f64 = raw.parse().ok()?;
    (v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX)).then_some(v as u32)
}

/// Parse a release from any reader; `origin` only labels errors.
pub fn read_release<R: Read>(reader: R, origin: &Path, project: &str, version: &str) -> Result<ReleaseDataset, LoadError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let csv_err = |source| LoadError::Csv { path: origin.to_path_buf(), source };
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let layout = layout(&headers, origin)?;
    let mut units = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = i + 1;
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let parse_err = |idx: usize, expected| LoadError::Parse {
            path: origin.to_path_buf(),
            row,
            column: headers.get(idx).unwrap_or("").trim().to_string(),
            value: field(idx).to_string(),
            expected,
        };
        let features = layout
            .metrics
            .iter()
            .map(|&idx| field(idx).parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| parse_err(idx, "a finite number")))
            .collect::<Result<Vec<_>, _>>()?;
        let bug_count = parse_bug(field(layout.bug)).ok_or_else(|| parse_err(layout.bug, "a non-negative integer"))?;
        units.push(CodeUnit::new(field(layout.name), features, bug_count));
    }
    ReleaseDataset::ck(project, version, units).map_err(|source| LoadError::Invalid { path: origin.to_path_buf(), source })
}

pub fn load_release_csv(path: &Path, project: &str, version: &str) -> Result<ReleaseDataset, LoadError> {
    let file = File::open(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    read_release(io::BufReader::new(file), path, project, version)
}

/// Write a release in the layout [`load_release_csv`] reads.
pub fn write_release_csv(path: &Path, release: &ReleaseDataset) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["name"];
    header.extend(FEATURE_NAMES.iter().take(release.feature_count()));
    header.push("bug");
    w.write_record(&header)?;
    for u in release.units() {
        let mut row = vec![u.name.clone()];
        row.extend(u.features.iter().map(f64::to_string));
        row.push(u.bug_count.to_string());
        w.write_record(&row)?;
    }
    w.flush()
}

/// Where a release file is expected: `<root>/<project>/<version>.csv`, or the
/// flat `<root>/<project>-<version>.csv` when only that exists.
pub fn release_path(root: &Path, project: &str, version: &str) -> PathBuf {
    let nested = root.join(project).join(format!("{version}.csv"));
    let flat = root.join(format!("{project}-{version}.csv"));
    if !nested.exists() && flat.exists() {
        flat
    } else {
        nested
    }
}
