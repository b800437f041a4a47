//! The K-test: plan on releases `x` and `y`, score the plans against what
//! developers did in release `z`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::data::{smote, CodeUnit, Normalizer, ReleaseDataset, DEFAULT_SMOTE_NEIGHBORS};
use crate::error::{Error, Result};
use crate::explain::{
    explain_instance_with, fit_discretizer, Discretizer, ExplainParams, Explanation, DEFAULT_SAMPLES, DEFAULT_TOP_K,
};
use crate::forest::{train_forest, BlackBox, Classifier, ForestParams};
use crate::plan::{classical_plan, random_walk_plan, time_plan, Plan, PlannerId, DEFAULT_P_CHANGE};
use crate::precedence::{build_profile, PrecedenceProfile, DEFAULT_M};
use crate::seed;
use crate::stats::{mann_whitney_u, MannWhitney};

/// Slack at interval endpoints when matching next-release values.
pub const MATCH_TOLERANCE: f64 = 1e-9;

/// Number of equal-width overlap histogram bins over `[0, 1]`.
pub const HISTOGRAM_BINS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum OverlapMode {
    /// Fraction of proposals whose next-release value lies in the interval.
    #[default]
    Containment,
    /// Set Jaccard between proposed features and features that changed
    /// between `y` and `z`; the intersection counts changed features whose
    /// new value lies in the proposed interval.
    Strict,
}

/// Containment overlap of a plan with a normalized next-release unit.
/// An empty plan scores 0.
pub fn overlap_score(plan: &Plan, unit_z: &CodeUnit) -> f64 {
    if plan.is_empty() {
        return 0.0;
    }
    let matched =
        plan.proposals.iter().filter(|(&f, interval)| interval.contains_within(unit_z.features[f], MATCH_TOLERANCE)).count();
    matched as f64 / plan.len() as f64
}

/// Strict set-based variant; see [`OverlapMode::Strict`].
pub fn strict_overlap_score(plan: &Plan, unit_y: &CodeUnit, unit_z: &CodeUnit) -> f64 {
    if plan.is_empty() {
        return 0.0;
    }
    let changed = |f: usize| libm::fabs(unit_z.features[f] - unit_y.features[f]) > MATCH_TOLERANCE;
    let d = unit_z.features.len();
    let intersection = plan
        .proposals
        .iter()
        .filter(|(&f, interval)| changed(f) && interval.contains_within(unit_z.features[f], MATCH_TOLERANCE))
        .count();
    let union = (0..d).filter(|&f| changed(f) || plan.proposals.contains_key(&f)).count();
    if union == 0 {
        0.0
    } else {
        intersection as f64 / union as f64
    }
}

/// Bugs removed between `y` and `z`; positive means fewer bugs in `z`.
pub fn ndpv_delta(unit_y: &CodeUnit, unit_z: &CodeUnit) -> Result<i64> {
    if unit_y.name != unit_z.name {
        return Err(Error::NameMismatch { left: unit_y.name.clone(), right: unit_z.name.clone() });
    }
    Ok(i64::from(unit_y.bug_count) - i64::from(unit_z.bug_count))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationRecord {
    pub unit: String,
    pub planner: PlannerId,
    pub overlap: f64,
    pub ndpv_delta: i64,
    pub plan_size: usize,
}

/// `Σ s_i · n_i`.
pub fn weighted_score(records: &[EvaluationRecord]) -> f64 {
    records.iter().map(|r| r.overlap * r.ndpv_delta as f64).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ScaledScore {
    Value(f64),
    /// `Σ n_i = 0`.
    Undefined,
}

impl ScaledScore {
    pub fn value(self) -> Option<f64> {
        match self {
            ScaledScore::Value(v) => Some(v),
            ScaledScore::Undefined => None,
        }
    }
}

/// `Σ s_i · n_i / Σ n_i`.
pub fn scaled_score(records: &[EvaluationRecord]) -> ScaledScore {
    let denominator: i64 = records.iter().map(|r| r.ndpv_delta).sum();
    if denominator == 0 {
        ScaledScore::Undefined
    } else {
        ScaledScore::Value(weighted_score(records) / denominator as f64)
    }
}

/// Counts of overlap scores in five equal-width bins; 1.0 falls in the last.
pub fn overlap_histogram(records: &[EvaluationRecord]) -> [usize; HISTOGRAM_BINS] {
    let mut bins = [0; HISTOGRAM_BINS];
    for r in records {
        let b = libm::floor(r.overlap * HISTOGRAM_BINS as f64) as usize;
        bins[b.min(HISTOGRAM_BINS - 1)] += 1;
    }
    bins
}

/// Two-sided Mann-Whitney U on the overlap scores of two planners.
pub fn compare_planners(a: &[EvaluationRecord], b: &[EvaluationRecord]) -> Result<MannWhitney> {
    let sa: Vec<f64> = a.iter().map(|r| r.overlap).collect();
    let sb: Vec<f64> = b.iter().map(|r| r.overlap).collect();
    mann_whitney_u(&sa, &sb)
}

/// Read access to three aligned releases. The pipeline asks for `z` only
/// when scoring.
pub trait ReleaseTriple {
    fn project_name(&self) -> &str;
    fn x(&self) -> &ReleaseDataset;
    fn y(&self) -> &ReleaseDataset;
    fn z(&self) -> &ReleaseDataset;
}

impl ReleaseTriple for crate::data::AlignedTriple {
    fn project_name(&self) -> &str {
        crate::data::AlignedTriple::project_name(self)
    }
    fn x(&self) -> &ReleaseDataset {
        crate::data::AlignedTriple::x(self)
    }
    fn y(&self) -> &ReleaseDataset {
        crate::data::AlignedTriple::y(self)
    }
    fn z(&self) -> &ReleaseDataset {
        crate::data::AlignedTriple::z(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KTestConfig {
    /// `forest.seed` is ignored; the forest seed derives from `seed`.
    pub forest: ForestParams,
    pub smote_neighbors: usize,
    pub samples: usize,
    pub top_k: usize,
    pub m: usize,
    pub p_change: f64,
    pub kernel_width: Option<f64>,
    pub overlap: OverlapMode,
    pub seed: u64,
}

impl Default for KTestConfig {
    fn default() -> Self {
        KTestConfig {
            forest: ForestParams::default(),
            smote_neighbors: DEFAULT_SMOTE_NEIGHBORS,
            samples: DEFAULT_SAMPLES,
            top_k: DEFAULT_TOP_K,
            m: DEFAULT_M,
            p_change: DEFAULT_P_CHANGE,
            kernel_width: None,
            overlap: OverlapMode::Containment,
            seed: 0,
        }
    }
}

impl KTestConfig {
    pub fn validate(&self, feature_count: usize) -> Result<()> {
        self.forest.validate()?;
        if !(1..=feature_count).contains(&self.m) {
            return Err(Error::param("m", alloc::format!("must lie in [1, {feature_count}]")));
        }
        if !(1..=feature_count).contains(&self.top_k) {
            return Err(Error::param("top_k", alloc::format!("must lie in [1, {feature_count}]")));
        }
        if self.samples == 0 {
            return Err(Error::param("samples", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p_change) {
            return Err(Error::param("p_change", "must lie in [0, 1]"));
        }
        if self.smote_neighbors == 0 {
            return Err(Error::param("smote_neighbors", "must be at least 1"));
        }
        if let Some(w) = self.kernel_width {
            if !(w > 0.0) {
                return Err(Error::param("kernel_width", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Seeds derived from the master seed for one project.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DerivedSeeds {
    pub master: u64,
    pub smote: u64,
    pub forest: u64,
}

impl DerivedSeeds {
    pub fn new(master: u64) -> Self {
        DerivedSeeds {
            master,
            smote: seed::derive(master, seed::stream::SMOTE),
            forest: seed::derive(master, seed::stream::FOREST),
        }
    }

    pub fn explanation(&self, unit: &str) -> u64 {
        seed::instance_seed(self.master, unit)
    }

    pub fn random_plan(&self, unit: &str) -> u64 {
        seed::derive(seed::instance_seed(self.master, unit), seed::stream::RANDOM_PLAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlannerSummary {
    pub planner: PlannerId,
    /// Name-sorted.
    pub records: Vec<EvaluationRecord>,
    pub weighted: f64,
    pub scaled: ScaledScore,
    pub mean_plan_size: f64,
    pub mean_overlap: f64,
    pub histogram: [usize; HISTOGRAM_BINS],
}

impl PlannerSummary {
    pub fn from_records(planner: PlannerId, mut records: Vec<EvaluationRecord>) -> Self {
        records.sort_by(|a, b| a.unit.cmp(&b.unit));
        let n = records.len();
        let mean = |f: &dyn Fn(&EvaluationRecord) -> f64| {
            if n == 0 {
                0.0
            } else {
                records.iter().map(f).sum::<f64>() / n as f64
            }
        };
        let mean_plan_size = mean(&|r| r.plan_size as f64);
        let mean_overlap = mean(&|r| r.overlap);
        PlannerSummary {
            planner,
            weighted: weighted_score(&records),
            scaled: scaled_score(&records),
            histogram: overlap_histogram(&records),
            mean_plan_size,
            mean_overlap,
            records,
        }
    }

    pub fn total_ndpv(&self) -> i64 {
        self.records.iter().map(|r| r.ndpv_delta).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlannerComparison {
    pub a: PlannerId,
    pub b: PlannerId,
    /// `None` when either planner has no records.
    pub test: Option<MannWhitney>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitFailure {
    pub unit: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationReport {
    pub project: String,
    pub seeds: DerivedSeeds,
    /// Units buggy in `y` (all of them are candidates for a plan).
    pub buggy_in_y: usize,
    /// Buggy in `y` but predicted clean; no plan is made for these.
    pub skipped: usize,
    pub failures: Vec<UnitFailure>,
    pub profile: PrecedenceProfile,
    pub planners: Vec<PlannerSummary>,
    pub comparisons: Vec<PlannerComparison>,
}

impl EvaluationReport {
    pub fn planner(&self, id: PlannerId) -> Option<&PlannerSummary> {
        self.planners.iter().find(|p| p.planner == id)
    }
}

/// Everything produced before release `z` is consulted.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlanningStage {
    pub normalizer: Normalizer,
    pub forest: Classifier,
    pub discretizer: Discretizer,
    pub seeds: DerivedSeeds,
    pub profile: PrecedenceProfile,
    pub buggy_in_y: usize,
    pub skipped: usize,
    pub failures: Vec<UnitFailure>,
    /// Name-sorted explanations of the planned units.
    pub explanations: Vec<Explanation>,
    /// One plan list per requested planner, in request order, each aligned
    /// with `explanations`.
    pub plans: Vec<(PlannerId, Vec<Plan>)>,
}

/// Train, explain and plan from releases `x` and `y` only.
pub fn plan_stage(x: &ReleaseDataset, y: &ReleaseDataset, planners: &[PlannerId], config: &KTestConfig) -> Result<PlanningStage> {
    config.validate(x.feature_count())?;
    let seeds = DerivedSeeds::new(config.seed);
    let normalizer = Normalizer::fit(x);
    let x_norm = normalizer.apply(x);
    let y_norm = normalizer.apply(y);

    let balanced = smote(&x_norm, config.smote_neighbors, seeds.smote)?;
    let forest = train_forest(&balanced, &ForestParams { seed: seeds.forest, ..config.forest.clone() })?;
    let discretizer = fit_discretizer(&x_norm);
    let profile = build_profile(x, y, config.m)?;
    let params = ExplainParams { top_k: config.top_k, samples: config.samples, kernel_width: config.kernel_width };

    let mut buggy_in_y = 0;
    let mut skipped = 0;
    let mut failures = Vec::new();
    let mut explanations = Vec::new();
    let mut planned_units: Vec<&CodeUnit> = Vec::new();
    let mut sorted: Vec<&CodeUnit> = y_norm.units().iter().filter(|u| u.is_defective()).collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    for unit in sorted {
        buggy_in_y += 1;
        match forest.predict(&unit.features) {
            Ok(0) => skipped += 1,
            Ok(_) => match explain_instance_with(&forest, unit, &discretizer, &params, seeds.explanation(&unit.name)) {
                Ok(e) => {
                    explanations.push(e);
                    planned_units.push(unit);
                }
                Err(e) => failures.push(UnitFailure { unit: unit.name.clone(), error: e.to_string() }),
            },
            Err(e) => failures.push(UnitFailure { unit: unit.name.clone(), error: e.to_string() }),
        }
    }

    let mut plans = Vec::with_capacity(planners.len());
    for &planner in planners {
        let list = explanations
            .iter()
            .zip(&planned_units)
            .map(|(e, unit)| match planner {
                PlannerId::Classical => Ok(classical_plan(e)),
                PlannerId::Time => Ok(time_plan(e, &profile)),
                PlannerId::Random => random_walk_plan(unit, config.p_change, seeds.random_plan(&unit.name)),
            })
            .collect::<Result<Vec<_>>>()?;
        plans.push((planner, list));
    }

    Ok(PlanningStage { normalizer, forest, discretizer, seeds, profile, buggy_in_y, skipped, failures, explanations, plans })
}

/// Score every plan of a planning stage against release `z`.
pub fn score_stage(
    project: &str,
    stage: &PlanningStage,
    y: &ReleaseDataset,
    z: &ReleaseDataset,
    mode: OverlapMode,
) -> Result<EvaluationReport> {
    let mut failures = stage.failures.clone();
    let mut summaries = Vec::with_capacity(stage.plans.len());
    for (planner, plans) in &stage.plans {
        let mut records = Vec::with_capacity(plans.len());
        for plan in plans {
            let (Some(unit_y), Some(unit_z)) = (y.unit(&plan.unit), z.unit(&plan.unit)) else {
                failures.push(UnitFailure { unit: plan.unit.clone(), error: "unit missing from y or z".to_string() });
                continue;
            };
            let z_norm = CodeUnit {
                name: unit_z.name.clone(),
                features: stage.normalizer.transform(&unit_z.features),
                bug_count: unit_z.bug_count,
            };
            let overlap = match mode {
                OverlapMode::Containment => overlap_score(plan, &z_norm),
                OverlapMode::Strict => {
                    let y_norm = CodeUnit {
                        name: unit_y.name.clone(),
                        features: stage.normalizer.transform(&unit_y.features),
                        bug_count: unit_y.bug_count,
                    };
                    strict_overlap_score(plan, &y_norm, &z_norm)
                }
            };
            records.push(EvaluationRecord {
                unit: plan.unit.clone(),
                planner: *planner,
                overlap,
                ndpv_delta: ndpv_delta(unit_y, unit_z)?,
                plan_size: plan.len(),
            });
        }
        summaries.push(PlannerSummary::from_records(*planner, records));
    }
    failures.sort_by(|a, b| a.unit.cmp(&b.unit));
    failures.dedup();

    let mut comparisons = Vec::new();
    for i in 0..summaries.len() {
        for j in i + 1..summaries.len() {
            comparisons.push(PlannerComparison {
                a: summaries[i].planner,
                b: summaries[j].planner,
                test: compare_planners(&summaries[i].records, &summaries[j].records).ok(),
            });
        }
    }

    Ok(EvaluationReport {
        project: project.into(),
        seeds: stage.seeds,
        buggy_in_y: stage.buggy_in_y,
        skipped: stage.skipped,
        failures,
        profile: stage.profile.clone(),
        planners: summaries,
        comparisons,
    })
}

/// Run the full K-test for the requested planners on one project.
///
/// 1. train a forest on SMOTE-balanced, normalized `x`;
/// 2. fit the discretizer on normalized `x` and the precedence profile on
///    raw `x`, `y`;
/// 3. explain and plan every unit buggy in `y` that the forest predicts
///    defective (others are counted as skipped);
/// 4. score each plan against `z`.
pub fn run_ktest<T: ReleaseTriple + ?Sized>(
    triple: &T,
    planners: &[PlannerId],
    config: &KTestConfig,
) -> Result<EvaluationReport> {
    Ok(run_ktest_traced(triple, planners, config)?.0)
}

/// As [`run_ktest`], also returning the planning stage.
pub fn run_ktest_traced<T: ReleaseTriple + ?Sized>(
    triple: &T,
    planners: &[PlannerId],
    config: &KTestConfig,
) -> Result<(EvaluationReport, PlanningStage)> {
    let stage = plan_stage(triple.x(), triple.y(), planners, config)?;
    let report = score_stage(triple.project_name(), &stage, triple.y(), triple.z(), config.overlap)?;
    Ok((report, stage))
}
