//! Report files: the cross-project summary, per-planner reports and
//! per-unit records (plot-ready CSV), and a JSON document per project.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use timelime_core::evaluate::{PlanningStage, HISTOGRAM_BINS};
use timelime_core::metrics::feature_name;
use timelime_core::{EvaluationReport, Explanation, Plan, PlannerId, PlannerSummary, PrecedenceProfile, ScaledScore};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub project: String,
    pub planner: PlannerId,
    pub buggy_in_y: usize,
    pub units: usize,
    pub skipped: usize,
    pub failures: usize,
    pub mean_plan_size: f64,
    pub mean_overlap: f64,
    pub weighted_score: f64,
    pub scaled_score: ScaledScore,
    pub total_ndpv: i64,
}

impl SummaryRow {
    pub fn new(report: &EvaluationReport, summary: &PlannerSummary) -> Self {
        SummaryRow {
            project: report.project.clone(),
            planner: summary.planner,
            buggy_in_y: report.buggy_in_y,
            units: summary.records.len(),
            skipped: report.skipped,
            failures: report.failures.len(),
            mean_plan_size: summary.mean_plan_size,
            mean_overlap: summary.mean_overlap,
            weighted_score: summary.weighted,
            scaled_score: summary.scaled,
            total_ndpv: summary.total_ndpv(),
        }
    }
}

pub fn format_scaled(s: ScaledScore) -> String {
    match s {
        ScaledScore::Value(v) => v.to_string(),
        ScaledScore::Undefined => "undefined".into(),
    }
}

const SUMMARY_HEADER: [&str; 11] = [
    "project",
    "planner",
    "buggy_in_y",
    "units",
    "skipped",
    "failures",
    "mean_plan_size",
    "mean_overlap",
    "weighted_score",
    "scaled_score",
    "total_ndpv",
];

fn summary_fields(r: &SummaryRow) -> Vec<String> {
    vec![
        r.project.clone(),
        r.planner.to_string(),
        r.buggy_in_y.to_string(),
        r.units.to_string(),
        r.skipped.to_string(),
        r.failures.to_string(),
        r.mean_plan_size.to_string(),
        r.mean_overlap.to_string(),
        r.weighted_score.to_string(),
        format_scaled(r.scaled_score),
        r.total_ndpv.to_string(),
    ]
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// One summary line per requested (project, planner) pair; a failed project
/// keeps its lines with empty values.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryEntry {
    pub project: String,
    pub planner: PlannerId,
    pub row: Option<SummaryRow>,
}

pub fn write_summary(path: &Path, entries: &[SummaryEntry]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec![SUMMARY_HEADER[0], SUMMARY_HEADER[1], "status"];
    header.extend(&SUMMARY_HEADER[2..]);
    w.write_record(&header).map_err(csv_err)?;
    for e in entries {
        let mut fields = vec![e.project.clone(), e.planner.to_string()];
        match &e.row {
            Some(r) => {
                fields.push("ok".into());
                fields.extend(summary_fields(r).into_iter().skip(2));
            }
            None => {
                fields.push("failed".into());
                fields.extend(std::iter::repeat_n(String::new(), SUMMARY_HEADER.len() - 2));
            }
        }
        w.write_record(&fields).map_err(csv_err)?;
    }
    w.flush()
}

fn histogram_labels() -> Vec<String> {
    (0..HISTOGRAM_BINS)
        .map(|i| {
            let lo = i as f64 / HISTOGRAM_BINS as f64;
            let hi = (i + 1) as f64 / HISTOGRAM_BINS as f64;
            format!("overlap_{lo}_{hi}")
        })
        .collect()
}

/// One planner's row of the summary plus its overlap histogram and its
/// significance tests against the other planners.
pub fn write_planner_report(path: &Path, report: &EvaluationReport, summary: &PlannerSummary) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<String> = SUMMARY_HEADER.iter().map(|s| s.to_string()).collect();
    header.extend(histogram_labels());
    let against: Vec<_> = report
        .comparisons
        .iter()
        .filter_map(|c| {
            if c.a == summary.planner {
                Some((c.b, c.test))
            } else if c.b == summary.planner {
                Some((c.a, c.test))
            } else {
                None
            }
        })
        .collect();
    for (other, _) in &against {
        header.push(format!("mwu_p_vs_{other}"));
    }
    w.write_record(&header).map_err(csv_err)?;
    let mut row = summary_fields(&SummaryRow::new(report, summary));
    row.extend(summary.histogram.iter().map(usize::to_string));
    for (_, test) in &against {
        row.push(test.map_or("undefined".into(), |t| t.p_value.to_string()));
    }
    w.write_record(&row).map_err(csv_err)?;
    w.flush()
}

fn describe_plan(plan: &Plan) -> String {
    plan.proposals.iter().map(|(f, iv)| format!("{}={iv}", feature_name(*f).unwrap_or("?"))).collect::<Vec<_>>().join(";")
}

/// Per-unit records, name-sorted, with the proposals that were scored.
pub fn write_records(path: &Path, summary: &PlannerSummary, plans: &[Plan]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["unit", "overlap", "ndpv_delta", "plan_size", "proposals"]).map_err(csv_err)?;
    for r in &summary.records {
        let proposals = plans.iter().find(|p| p.unit == r.unit).map(describe_plan).unwrap_or_default();
        w.write_record([r.unit.clone(), r.overlap.to_string(), r.ndpv_delta.to_string(), r.plan_size.to_string(), proposals])
            .map_err(csv_err)?;
    }
    w.flush()
}

#[derive(Serialize)]
struct ProfileView {
    m: usize,
    /// Hedges' g by feature name; `null` where undefined or infinite.
    effects: Vec<(&'static str, Option<f64>)>,
    precedented: Vec<&'static str>,
    ranking: Vec<&'static str>,
}

fn profile_view(p: &PrecedenceProfile) -> ProfileView {
    let name = |f: usize| feature_name(f).unwrap_or("?");
    ProfileView {
        m: p.m,
        effects: p.g.iter().enumerate().map(|(f, g)| (name(f), g.filter(|v| v.is_finite()))).collect(),
        precedented: p.precedented.iter().map(|&f| name(f)).collect(),
        ranking: p.ranking.iter().map(|&f| name(f)).collect(),
    }
}

#[derive(Serialize)]
struct ProjectDocument<'a> {
    project: &'a str,
    report: &'a EvaluationReport,
    profile: ProfileView,
    explanations: &'a [Explanation],
    plans: Vec<PlanSet<'a>>,
}

#[derive(Serialize)]
struct PlanSet<'a> {
    planner: PlannerId,
    plans: &'a [Plan],
}

pub fn project_json(report: &EvaluationReport, stage: &PlanningStage) -> serde_json::Result<String> {
    let doc = ProjectDocument {
        project: &report.project,
        report,
        profile: profile_view(&report.profile),
        explanations: &stage.explanations,
        plans: stage.plans.iter().map(|(planner, plans)| PlanSet { planner: *planner, plans }).collect(),
    };
    serde_json::to_string_pretty(&doc)
}

/// Write every per-project file into `dir`.
pub fn write_project(dir: &Path, report: &EvaluationReport, stage: &PlanningStage) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for summary in &report.planners {
        write_planner_report(&dir.join(format!("report_{}.csv", summary.planner)), report, summary)?;
        let plans = stage.plans.iter().find(|(p, _)| *p == summary.planner).map_or(&[][..], |(_, v)| v.as_slice());
        write_records(&dir.join(format!("records_{}.csv", summary.planner)), summary, plans)?;
    }
    let json = project_json(report, stage).map_err(io::Error::other)?;
    fs::write(dir.join("report.json"), json + "\n")
}
