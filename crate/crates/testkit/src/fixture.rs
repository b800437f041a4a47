//! Synthetic three-release projects with CK-shaped metrics.
//!
//! A handful of "drift" metrics grow from `x` to `y`, defects follow a risk
//! score built on those metrics, and in `z` roughly half the units are
//! refactored back down.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use timelime_core::metrics::{feature_index, FEATURE_COUNT};
use timelime_core::{align_releases, AlignedTriple, CodeUnit, ReleaseDataset};

/// Rough scale of each metric, in column order.
const SCALE: [f64; FEATURE_COUNT] =
    [12.0, 4.0, 3.0, 10.0, 40.0, 80.0, 6.0, 8.0, 9.0, 1.5, 400.0, 1.0, 2.0, 1.0, 1.0, 2.0, 2.0, 30.0, 8.0, 3.0];

/// Metrics that move between releases.
pub const DRIFT: [&str; 5] = ["wmc", "cbo", "rfc", "loc", "amc"];

#[derive(Debug, Clone)]
pub struct FixtureSpec {
    pub project: String,
    pub units: usize,
    /// Units present in only one release, per release.
    pub strays: usize,
    pub seed: u64,
}

impl FixtureSpec {
    pub fn new(project: &str, units: usize, seed: u64) -> Self {
        FixtureSpec { project: project.into(), units, strays: 2, seed }
    }
}

fn drift_indices() -> Vec<usize> {
    DRIFT.iter().map(|n| feature_index(n).unwrap()).collect()
}

fn risk(features: &[f64], drift: &[usize], noise: f64) -> f64 {
    drift.iter().map(|&f| features[f] / (2.0 * SCALE[f])).sum::<f64>() / drift.len() as f64 + noise
}

fn bugs(r: f64) -> u32 {
    if r > 0.55 {
        1 + ((r - 0.55) * 10.0) as u32
    } else {
        0
    }
}

fn round(v: f64, f: usize) -> f64 {
    // ratios stay fractional, counts are integers
    if SCALE[f] <= 2.0 {
        (v * 1000.0).round() / 1000.0
    } else {
        v.round()
    }
}

/// The three raw releases of a synthetic project, before alignment.
pub fn synthetic_releases(spec: &FixtureSpec) -> (ReleaseDataset, ReleaseDataset, ReleaseDataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let drift = drift_indices();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut zs = Vec::new();
    for i in 0..spec.units {
        let name = format!("org.example.{}.C{i:04}", spec.project);
        let base: Vec<f64> = (0..FEATURE_COUNT)
            .map(|f| {
                let u: f64 = rng.gen();
                round(SCALE[f] * u * u * 2.0, f)
            })
            .collect();
        let mut grown = base.clone();
        for f in 0..FEATURE_COUNT {
            let factor = if drift.contains(&f) { 1.0 + 0.6 * rng.gen::<f64>() } else { 1.0 + 0.04 * (rng.gen::<f64>() - 0.5) };
            grown[f] = round(base[f] * factor, f);
        }
        let mut next = grown.clone();
        if rng.gen_bool(0.5) {
            for &f in &drift {
                next[f] = round(grown[f] * (0.4 + 0.4 * rng.gen::<f64>()), f);
            }
        }
        let nx = 0.1 * (rng.gen::<f64>() - 0.5);
        let ny = 0.1 * (rng.gen::<f64>() - 0.5);
        let nz = 0.1 * (rng.gen::<f64>() - 0.5);
        xs.push(CodeUnit::new(name.clone(), base.clone(), bugs(risk(&base, &drift, nx))));
        ys.push(CodeUnit::new(name.clone(), grown.clone(), bugs(risk(&grown, &drift, ny))));
        zs.push(CodeUnit::new(name, next.clone(), bugs(risk(&next, &drift, nz))));
    }
    for (tag, set) in [("x", &mut xs), ("y", &mut ys), ("z", &mut zs)] {
        for s in 0..spec.strays {
            let f: Vec<f64> = (0..FEATURE_COUNT).map(|f| round(SCALE[f] * rng.gen::<f64>(), f)).collect();
            set.push(CodeUnit::new(format!("org.example.{}.only_{tag}{s}", spec.project), f, rng.gen_range(0..2)));
        }
    }
    let mk = |v: &str, units| ReleaseDataset::ck(spec.project.clone(), v, units).expect("fixture is well formed");
    (mk("1.0", xs), mk("1.1", ys), mk("1.2", zs))
}

/// A synthetic project already aligned on shared unit names.
pub fn synthetic_triple(spec: &FixtureSpec) -> AlignedTriple {
    let (x, y, z) = synthetic_releases(spec);
    align_releases(&x, &y, &z).expect("fixture releases align")
}

/// The same shape as [`synthetic_triple`] with a caller-chosen `z`.
pub fn with_z(triple: &AlignedTriple, z: ReleaseDataset) -> AlignedTriple {
    align_releases(triple.x(), triple.y(), &z).expect("replacement z aligns")
}

/// Small random dataset of arbitrary width with a label driven by feature 0.
pub fn small_dataset(rows: usize, width: usize, seed: u64) -> ReleaseDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut units: Vec<CodeUnit> = (0..rows)
        .map(|i| {
            let f: Vec<f64> = (0..width).map(|_| rng.gen::<f64>()).collect();
            let bug = u32::from(f[0] + 0.3 * (rng.gen::<f64>() - 0.5) > 0.6);
            CodeUnit::new(format!("u{i:03}"), f, bug)
        })
        .collect();
    // both classes present, at least two of each
    units[0].bug_count = 1;
    units[1].bug_count = 1;
    units[2].bug_count = 0;
    units[3].bug_count = 0;
    ReleaseDataset::new("small", "1", width, units).expect("valid small dataset")
}
