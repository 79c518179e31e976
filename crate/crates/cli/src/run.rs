//! Job dispatch and report emission.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use qhgeo_core::harness::{run_experiment, ExperimentReport, ExperimentSpec, Verdict};
use rayon::prelude::*;
use tempfile::NamedTempFile;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::plot;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the config's `output_dir`.
    pub out: Option<PathBuf>,
    /// Worker threads; the rayon default when `None`.
    pub jobs: Option<usize>,
    /// Forces SVG plots on.
    pub plots: bool,
}

/// What happened to one experiment.
#[derive(Debug)]
pub struct JobOutcome {
    pub name: String,
    pub report: Option<ExperimentReport>,
    pub error: Option<CliError>,
    pub seconds: f64,
}

impl JobOutcome {
    pub fn status(&self) -> &'static str {
        match (&self.report, &self.error) {
            (_, Some(_)) => "ERROR",
            (Some(r), None) if r.has_failure() => "FAIL",
            (Some(r), None) if !r.outcome_ok() => "UNEXPECTED",
            (Some(r), None) if r.has_hypothesis_gate() => "N/A-HYPOTHESIS (expected)",
            _ => "PASS",
        }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub out: PathBuf,
    pub jobs: Vec<JobOutcome>,
}

impl RunSummary {
    /// 0 when every report is as expected, 1 on any failed or unexpected
    /// verdict, 2 on any infrastructure error.
    pub fn exit_code(&self) -> i32 {
        if self.jobs.iter().any(|j| j.error.is_some()) {
            2
        } else if self.jobs.iter().all(|j| j.report.as_ref().is_some_and(|r| r.outcome_ok())) {
            0
        } else {
            1
        }
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for j in &self.jobs {
            out.push(format!("{}: {}", j.name, j.status()));
            if let Some(e) = &j.error {
                out.push(format!("  {e}"));
            }
            if let Some(r) = &j.report {
                for a in r.assertions.iter().filter(|a| a.verdict == Verdict::Fail) {
                    out.push(format!("  FAIL {} (measured {:e})", a.id, a.measured));
                }
            }
        }
        out
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so a crash never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(report: &ExperimentReport, out: &Path, plots: bool) -> Result<(), CliError> {
    let core = |source| CliError::Experiment {
        name: report.name.clone(),
        source,
    };
    let json = report.to_json().map_err(core)?;
    let csv = report.to_csv().map_err(core)?;
    write_atomic(&out.join(format!("{}.json", report.name)), json.as_bytes())?;
    write_atomic(&out.join(format!("{}.csv", report.name)), csv.as_bytes())?;
    if plots {
        for (suffix, svg) in plot::report_plots(report) {
            write_atomic(&out.join(format!("{}{suffix}.svg", report.name)), svg.as_bytes())?;
        }
    }
    Ok(())
}

fn run_one(spec: &ExperimentSpec, out: &Path, plots: bool) -> JobOutcome {
    let start = Instant::now();
    let (report, error) = match run_experiment(spec) {
        Ok(r) => {
            let err = emit(&r, out, plots).err();
            (Some(r), err)
        }
        Err(source) => (
            None,
            Some(CliError::Experiment {
                name: spec.name.clone(),
                source,
            }),
        ),
    };
    JobOutcome {
        name: spec.name.clone(),
        report,
        error,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every spec on a bounded pool and writes `<name>.json`, `<name>.csv`,
/// optional plots and a `run.log` sidecar holding the only timestamps and
/// runtimes.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let out = opts
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or(CliError::NoOutputDir)?;
    std::fs::create_dir_all(&out).map_err(|source| CliError::Io {
        path: out.clone(),
        source,
    })?;
    let plots = opts.plots || cfg.plots;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    let jobs: Vec<JobOutcome> =
        pool.install(|| cfg.specs.par_iter().map(|s| run_one(s, &out, plots)).collect());
    let summary = RunSummary { out, jobs };
    write_log(&summary)?;
    Ok(summary)
}

fn write_log(summary: &RunSummary) -> Result<(), CliError> {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let mut log = format!("finished_unix_seconds {stamp}\n");
    for j in &summary.jobs {
        let _ = writeln!(log, "{} {:.3}s {}", j.name, j.seconds, j.status());
    }
    write_atomic(&summary.out.join("run.log"), log.as_bytes())
}

/// Re-derives summaries and verdicts of a stored report; returns the
/// discrepancies.
pub fn replay_check(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        _ => CliError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    let report = ExperimentReport::from_json(&text).map_err(|e| CliError::BadReport {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok(report.replay())
}
