use std::fs;
use std::path::{Path, PathBuf};

use manifold_ctrl::odesim::{metrics_summary, simulate, MetricsSummary, Scenario};
use manifold_ctrl::rigid_body::RigidVariant;
use serde::Serialize;

use crate::config::{Job, ScenarioConfig, ScenarioName};
use crate::error::CliError;
use crate::output::{columns, summary_json, write_csv, RunSummary};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "MANIFOLD_CTRL_OUT";
const DEFAULT_OUT: &str = "out";

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub controller: Option<RigidVariant>,
    pub k_e: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub out: Option<PathBuf>,
    pub disturb: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if self.controller.is_some() {
            cfg.controller = self.controller;
        }
        if self.k_e.is_some() {
            cfg.k_e = self.k_e;
        }
        if self.dt.is_some() {
            cfg.dt = self.dt;
        }
        if self.t_end.is_some() {
            cfg.t_end = self.t_end;
        }
        if self.out.is_some() {
            cfg.output_dir = self.out.clone();
        }
        if self.disturb {
            cfg.disturbed = Some(true);
        }
    }
}

/// A built-in scenario name or the path of a JSON config.
pub fn load(target: &str) -> Result<ScenarioConfig, CliError> {
    if let Ok(name) = target.parse::<ScenarioName>() {
        return Ok(ScenarioConfig::builtin(name));
    }
    let path = Path::new(target);
    if !path.exists() && path.extension().is_none() {
        return Err(target.parse::<ScenarioName>().unwrap_err());
    }
    let text = fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

/// Output directory: config (or `--out`), else `$MANIFOLD_CTRL_OUT`, else `./out`.
pub fn output_dir(cfg: &ScenarioConfig) -> PathBuf {
    cfg.output_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

#[derive(Debug, Clone, Serialize)]
pub struct JobReport {
    pub stem: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller: Option<RigidVariant>,
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub metrics: MetricsSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioName,
    pub jobs: Vec<JobReport>,
}

fn metadata_line(scenario: ScenarioName, job: &Job) -> String {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!(
        "generated by manifold-ctrl {} at unix time {stamp}; scenario {scenario}; dt {}; t_end {}",
        env!("CARGO_PKG_VERSION"),
        job.sim.dt,
        job.sim.t_end
    )
}

/// Validates everything, then simulates each job and writes its files.
/// Nothing is written unless every job validates.
pub fn run(cfg: &ScenarioConfig, write_meta: bool) -> Result<RunReport, CliError> {
    let jobs = cfg.jobs()?;
    let dir = output_dir(cfg);
    let mut results = Vec::with_capacity(jobs.len());
    for job in &jobs {
        let traj = simulate(&job.sim)?;
        let metrics = metrics_summary(&traj)?;
        results.push((job, traj, metrics));
    }

    fs::create_dir_all(&dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    let mut reports = Vec::new();
    for (job, traj, metrics) in results {
        let csv_path = dir.join(format!("{}.csv", job.stem));
        let file = fs::File::create(&csv_path).map_err(CliError::io(format!("creating {}", csv_path.display())))?;
        let meta = write_meta.then(|| metadata_line(cfg.scenario, job));
        write_csv(std::io::BufWriter::new(file), &traj, meta.as_deref())?;

        let summary_path = dir.join(format!("{}.summary.json", job.stem));
        let (disturbed, thrust_extension) = match &job.sim.scenario {
            Scenario::Quad { disturbed, extension, .. } => (Some(*disturbed), Some(*extension)),
            _ => (None, None),
        };
        let summary = RunSummary {
            scenario: cfg.scenario.name(),
            stem: &job.stem,
            controller: job.controller.map(|c| c.name()),
            k_e: job.sim.params.k_e(),
            g: job.sim.g,
            dt: job.sim.dt,
            t_end: job.sim.t_end,
            disturbed,
            thrust_extension,
            columns: columns(traj.kind),
            metrics: &metrics,
        };
        fs::write(&summary_path, summary_json(&summary) + "\n")
            .map_err(CliError::io(format!("writing {}", summary_path.display())))?;
        reports.push(JobReport {
            stem: job.stem.clone(),
            controller: job.controller,
            csv: csv_path,
            summary: summary_path,
            metrics,
        });
    }
    Ok(RunReport {
        scenario: cfg.scenario,
        jobs: reports,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioListing {
    pub name: &'static str,
    pub description: &'static str,
    pub defaults: std::collections::BTreeMap<&'static str, String>,
}

pub fn listing() -> Vec<ScenarioListing> {
    ScenarioName::ALL
        .iter()
        .map(|s| ScenarioListing {
            name: s.name(),
            description: s.description(),
            defaults: s.defaults().into_iter().collect(),
        })
        .collect()
}
