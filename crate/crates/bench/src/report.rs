//! CSV, TOML and table output. Floats in CSV use 17 significant digits in
//! scientific notation, independent of locale.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use cemm::simulation::io::format_f64;
use cemm::{MixtureParams, Trajectory};
use serde::Serialize;

use crate::HarnessError;

pub const TRAJECTORY_HEADER: &str =
    "cycle,loglik,modified_loglik,kullback_penalty,constraint_residual";
pub const COMPARISON_HEADER: &str = "algorithm,seed,cycles_run,converged,stop_reason,final_loglik,final_modified_loglik,final_constraint_residual";
pub const SUMMARY_HEADER: &str = "algorithm,runs,converged_runs,median_cycles";

/// Writes `contents` to a temporary sibling of `path`, then renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    let file_name = path
        .file_name()
        .ok_or_else(|| HarnessError::Usage(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn trajectory_rows(out: &mut String, prefix: &str, trajectory: &Trajectory) {
    for record in &trajectory.records {
        let d = &record.diagnostics;
        let _ = writeln!(
            out,
            "{prefix}{},{},{},{},{}",
            record.cycle,
            format_f64(d.loglik),
            format_f64(d.modified_loglik),
            format_f64(d.kullback_penalty),
            format_f64(d.constraint_residual),
        );
    }
}

/// One row per cycle, starting at cycle 0.
pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    let mut out = format!("{TRAJECTORY_HEADER}\n");
    trajectory_rows(&mut out, "", trajectory);
    out
}

/// Trajectories of several runs stacked, with a leading `seed` column.
pub fn combined_trajectory_csv<'a>(
    runs: impl IntoIterator<Item = (&'a str, &'a Trajectory)>,
) -> String {
    let mut out = format!("seed,{TRAJECTORY_HEADER}\n");
    for (seed, trajectory) in runs {
        trajectory_rows(&mut out, &format!("{seed},"), trajectory);
    }
    out
}

pub fn comparison_row(seed: &str, trajectory: &Trajectory) -> String {
    let last = &trajectory.last().diagnostics;
    format!(
        "{},{seed},{},{},{},{},{},{}\n",
        trajectory.algorithm,
        trajectory.cycles_run,
        trajectory.converged,
        trajectory.stop_reason.label(),
        format_f64(last.loglik),
        format_f64(last.modified_loglik),
        format_f64(last.constraint_residual),
    )
}

/// Median of a non-empty list; the mean of the two middle values for even
/// lengths.
pub fn median(values: &[usize]) -> f64 {
    assert!(!values.is_empty(), "median of an empty list");
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid] as f64
    } else {
        (sorted[mid - 1] + sorted[mid]) as f64 / 2.0
    }
}

#[derive(Debug, Serialize)]
struct FinalReport<'a> {
    algorithm: &'a str,
    stop_reason: &'a str,
    converged: bool,
    cycles_run: usize,
    loglik: f64,
    modified_loglik: f64,
    constraint_residual: f64,
    component: Vec<ComponentReport>,
}

#[derive(Debug, Serialize)]
struct ComponentReport {
    proportion: f64,
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
}

/// Final parameters and run summary as TOML.
pub fn final_params_toml(trajectory: &Trajectory) -> Result<String, HarnessError> {
    let theta = &trajectory.final_params;
    let last = &trajectory.last().diagnostics;
    let report = FinalReport {
        algorithm: trajectory.algorithm.name(),
        stop_reason: trajectory.stop_reason.label(),
        converged: trajectory.converged,
        cycles_run: trajectory.cycles_run,
        loglik: last.loglik,
        modified_loglik: last.modified_loglik,
        constraint_residual: last.constraint_residual,
        component: (0..theta.n_components())
            .map(|j| ComponentReport {
                proportion: theta.proportions()[j],
                mean: theta.means()[j].iter().copied().collect(),
                covariance: theta.covariances()[j]
                    .row_iter()
                    .map(|row| row.iter().copied().collect())
                    .collect(),
            })
            .collect(),
    };
    toml::to_string(&report).map_err(|e| HarnessError::Usage(format!("serializing report: {e}")))
}

/// Per-component table of proportion, mean and variance diagonal.
pub fn params_table(theta: &MixtureParams) -> String {
    let mut out = format!(
        "{:>4}  {:>12}  {:>24}  {:>24}\n",
        "j", "p", "mean", "variance"
    );
    for j in 0..theta.n_components() {
        let join = |values: Vec<f64>| {
            values
                .iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mean = join(theta.means()[j].iter().copied().collect());
        let var = join(theta.covariances()[j].diagonal().iter().copied().collect());
        let _ = writeln!(
            out,
            "{:>4}  {:>12.6}  {:>24}  {:>24}",
            j + 1,
            theta.proportions()[j],
            mean,
            var
        );
    }
    out
}
