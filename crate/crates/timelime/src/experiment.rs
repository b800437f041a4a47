//! End-to-end experiment runs over configured projects.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;
use timelime_core::evaluate::{run_ktest_traced, PlanningStage};
use timelime_core::{align_releases, AlignedTriple, EvaluationReport, KTestConfig, PlannerId};

use crate::config::{ConfigError, ExperimentConfig, ProjectSpec};
use crate::dataset::{load_release_csv, release_path};
use crate::persist::{save_model, ModelFile};
use crate::report::{write_project, write_summary, SummaryEntry, SummaryRow};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("missing data files:{}", list(.0))]
    MissingData(Vec<PathBuf>),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: io::Error },
}

fn list(paths: &[PathBuf]) -> String {
    paths.iter().fold(String::new(), |mut s, p| {
        let _ = write!(s, "\n  {}", p.display());
        s
    })
}

/// Command-line narrowing of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub projects: Vec<String>,
    pub planners: Vec<PlannerId>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if !o.projects.is_empty() {
            for name in &o.projects {
                if !self.projects.iter().any(|p| &p.name == name) {
                    return Err(ConfigError::Invalid {
                        key: "projects",
                        reason: format!("--project {name} is not in the config"),
                    });
                }
            }
            self.projects.retain(|p| o.projects.contains(&p.name));
        }
        if !o.planners.is_empty() {
            self.planners = o.planners.clone();
            self.planners.dedup();
        }
        if let Some(seed) = o.seed {
            self.ktest.seed = seed;
            self.defaulted.retain(|(k, _)| *k != "seed");
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
            self.defaulted.retain(|(k, _)| *k != "out");
        }
        Ok(())
    }
}

pub fn release_paths(root: &Path, spec: &ProjectSpec) -> [PathBuf; 3] {
    spec.versions.each_ref().map(|v| release_path(root, &spec.name, v))
}

/// Every configured release file that does not exist.
pub fn missing_files(config: &ExperimentConfig) -> Vec<PathBuf> {
    config.projects.iter().flat_map(|p| release_paths(&config.data_root, p)).filter(|p| !p.is_file()).collect()
}

pub fn load_project(root: &Path, spec: &ProjectSpec) -> Result<AlignedTriple, String> {
    let [px, py, pz] = release_paths(root, spec);
    let [vx, vy, vz] = &spec.versions;
    let x = load_release_csv(&px, &spec.name, vx).map_err(|e| e.to_string())?;
    let y = load_release_csv(&py, &spec.name, vy).map_err(|e| e.to_string())?;
    let z = load_release_csv(&pz, &spec.name, vz).map_err(|e| e.to_string())?;
    align_releases(&x, &y, &z).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectRun {
    pub aligned_units: usize,
    pub report: EvaluationReport,
    pub stage: PlanningStage,
}

pub fn run_project(root: &Path, spec: &ProjectSpec, planners: &[PlannerId], ktest: &KTestConfig) -> Result<ProjectRun, String> {
    let triple = load_project(root, spec)?;
    let (report, stage) = run_ktest_traced(&triple, planners, ktest).map_err(|e| format!("{}: {e}", spec.name))?;
    Ok(ProjectRun { aligned_units: triple.len(), report, stage })
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub summary: Vec<SummaryEntry>,
    /// In config order.
    pub projects: Vec<(ProjectSpec, Result<ProjectRun, String>)>,
}

impl ExperimentOutcome {
    pub fn failed(&self) -> impl Iterator<Item = (&str, &str)> {
        self.projects.iter().filter_map(|(s, r)| r.as_ref().err().map(|e| (s.name.as_str(), e.as_str())))
    }

    pub fn success(&self) -> bool {
        self.failed().next().is_none()
    }
}

/// Run every configured project on up to `threads` threads.
pub fn run_projects(config: &ExperimentConfig) -> Vec<Result<ProjectRun, String>> {
    let n = config.projects.len();
    let slots: Vec<Mutex<Option<Result<ProjectRun, String>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..config.threads.clamp(1, n.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let result = run_project(&config.data_root, &config.projects[i], &config.planners, &config.ktest);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().unwrap().expect("every project ran")).collect()
}

fn run_log(config: &ExperimentConfig, projects: &[(ProjectSpec, Result<ProjectRun, String>)]) -> String {
    let mut log = String::from("# resolved configuration\n");
    log.push_str(&config.describe());
    for (spec, result) in projects {
        let _ = writeln!(log, "\nproject {} x={} y={} z={}", spec.name, spec.versions[0], spec.versions[1], spec.versions[2]);
        match result {
            Err(e) => {
                let _ = writeln!(log, "  FAILED {e}");
            }
            Ok(run) => {
                let r = &run.report;
                let _ = writeln!(log, "  aligned_units={}", run.aligned_units);
                let _ = writeln!(log, "  seed master={} smote={} forest={}", r.seeds.master, r.seeds.smote, r.seeds.forest);
                let _ = writeln!(log, "  buggy_in_y={} skipped={} failed={}", r.buggy_in_y, r.skipped, r.failures.len());
                for f in &r.failures {
                    let _ = writeln!(log, "  unit_failure {} {}", f.unit, f.error);
                }
                for e in &run.stage.explanations {
                    let _ = write!(log, "  unit {} explanation_seed={}", e.unit, e.seed);
                    if config.planners.contains(&PlannerId::Random) {
                        let _ = write!(log, " random_plan_seed={}", r.seeds.random_plan(&e.unit));
                    }
                    log.push('\n');
                }
            }
        }
    }
    log
}

/// Check inputs, run all projects and write every report file.
///
/// Output layout under `config.out`: `summary.csv`, `run.log`, and per
/// project `<project>/report_<planner>.csv`, `<project>/records_<planner>.csv`
/// and `<project>/report.json` (plus `<project>/model.json` when models are
/// saved). Input files are only read.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    let missing = missing_files(config);
    if !missing.is_empty() {
        return Err(ExperimentError::MissingData(missing));
    }
    let out_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExperimentError::Output { path, source }
    };
    fs::create_dir_all(&config.out).map_err(out_err(&config.out))?;

    let results = run_projects(config);
    let projects: Vec<(ProjectSpec, Result<ProjectRun, String>)> = config.projects.iter().cloned().zip(results).collect();

    let mut summary = Vec::new();
    for (spec, result) in &projects {
        match result {
            Ok(run) => {
                let dir = config.out.join(&spec.name);
                write_project(&dir, &run.report, &run.stage).map_err(out_err(&dir))?;
                if config.save_models {
                    let path = dir.join("model.json");
                    save_model(&path, &ModelFile::from_stage(&spec.name, &run.stage))
                        .map_err(|e| ExperimentError::Output { path: path.clone(), source: io::Error::other(e) })?;
                }
                for &planner in &config.planners {
                    let row = run.report.planner(planner).map(|s| SummaryRow::new(&run.report, s));
                    summary.push(SummaryEntry { project: spec.name.clone(), planner, row });
                }
            }
            Err(_) => summary.extend(config.planners.iter().map(|&planner| SummaryEntry {
                project: spec.name.clone(),
                planner,
                row: None,
            })),
        }
    }
    let summary_path = config.out.join("summary.csv");
    write_summary(&summary_path, &summary).map_err(out_err(&summary_path))?;
    let log_path = config.out.join("run.log");
    fs::write(&log_path, run_log(config, &projects)).map_err(out_err(&log_path))?;
    Ok(ExperimentOutcome { summary, projects })
}
