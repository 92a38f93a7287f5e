//! Benchmark records and their CSV / summary forms.
//!
//! CSV conventions: header row, comma separators, floats with 17
//! significant digits, UTF-8, LF line endings. Records are deterministic
//! for a fixed seed and flag set except for the `runtime_seconds` column.

use std::time::Instant;

use sscqp::generator::GeneratedInstance;
use sscqp::io::format_value;
use sscqp::linalg::Vector;
use sscqp::solver::{solve, SolveStatus, SolverConfig};

use crate::error::CliError;

pub const CSV_HEADER: &str = "instance_id,n,beta,tol_x,iterations,status,runtime_seconds,final_residual,rate_bound,max_observed_contraction";

/// Stable status labels used in CSV output and summaries.
pub fn status_label(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::ConvergedResidual => "converged_residual",
        SolveStatus::ConvergedKnownSolution => "converged_known_solution",
        SolveStatus::FiniteTermination => "finite_termination",
        SolveStatus::MaxIterations => "max_iterations",
    }
}

/// One benchmark measurement: one instance solved at one tolerance.
#[derive(Clone, Debug)]
pub struct BenchRecord {
    pub instance_id: String,
    pub n: usize,
    /// Planted `‖M‖`; absent when generation itself failed.
    pub beta: Option<f64>,
    pub tol_x: f64,
    pub iterations: usize,
    /// A `status_label`, or `error` when the run aborted.
    pub status: String,
    /// Median of an odd number of timed repeats.
    pub runtime_seconds: f64,
    pub final_residual: Option<f64>,
    pub rate_bound: Option<f64>,
    pub max_observed_contraction: Option<f64>,
}

fn optional(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

impl BenchRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.instance_id,
            self.n,
            optional(self.beta),
            format_value(self.tol_x),
            self.iterations,
            self.status,
            format_value(self.runtime_seconds),
            optional(self.final_residual),
            optional(self.rate_bound),
            optional(self.max_observed_contraction),
        )
    }
}

pub fn render_csv(records: &[BenchRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for record in records {
        out.push_str(&record.csv_line());
        out.push('\n');
    }
    out
}

/// Median of an odd-length sample.
fn median(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    samples[samples.len() / 2]
}

/// Solves one instance at one tolerance, timing `repeats` identical runs
/// sequentially and reporting their median. The run's outputs come from the
/// first repeat; all repeats are deterministic copies of it. A solver error
/// yields a record with status `error` instead of aborting the suite.
pub fn measure(
    instance_id: String,
    inst: &GeneratedInstance,
    start: &Vector,
    config: &SolverConfig,
    repeats: usize,
) -> BenchRecord {
    let mut times = Vec::with_capacity(repeats);
    let mut first = None;
    let mut error = None;
    for _ in 0..repeats {
        let clock = Instant::now();
        let outcome = solve(
            inst.system(),
            start,
            config,
            Some(inst.planted_solution()),
        );
        times.push(clock.elapsed().as_secs_f64());
        match outcome {
            Ok(report) => {
                first.get_or_insert(report);
            }
            Err(e) => {
                error.get_or_insert(e);
                break;
            }
        }
    }
    let runtime_seconds = median(times);
    match (first, error) {
        (Some(report), None) => BenchRecord {
            instance_id,
            n: inst.system().dim(),
            beta: Some(inst.beta()),
            tol_x: config.tol_x,
            iterations: report.iterations,
            status: status_label(report.status).to_string(),
            runtime_seconds,
            final_residual: Some(report.final_residual_norm),
            rate_bound: report.rate_bound,
            max_observed_contraction: report
                .contraction_observed
                .iter()
                .copied()
                .reduce(f64::max),
        },
        _ => BenchRecord {
            instance_id,
            n: inst.system().dim(),
            beta: Some(inst.beta()),
            tol_x: config.tol_x,
            iterations: 0,
            status: "error".to_string(),
            runtime_seconds,
            final_residual: None,
            rate_bound: None,
            max_observed_contraction: None,
        },
    }
}

/// A record standing in for an instance that failed to generate.
pub fn generation_failure_record(instance_id: String, n: usize, tol_x: f64) -> BenchRecord {
    BenchRecord {
        instance_id,
        n,
        beta: None,
        tol_x,
        iterations: 0,
        status: "error".to_string(),
        runtime_seconds: 0.0,
        final_residual: None,
        rate_bound: None,
        max_observed_contraction: None,
    }
}

/// Per-group aggregate over one set of records, mirroring the experiment
/// tables: totals over the whole group, mean/std over solved runs only.
#[derive(Clone, Debug)]
pub struct BenchSummary {
    pub label: String,
    pub tol_x: f64,
    pub count: usize,
    pub solved_count: usize,
    pub total_iterations: usize,
    pub total_time: f64,
    pub mean_iterations: f64,
    pub std_iterations: f64,
}

/// Builds the summary for `records`, with `solved` deciding which status
/// labels count as a successful solve.
pub fn summarize(
    label: String,
    tol_x: f64,
    records: &[&BenchRecord],
    solved: &dyn Fn(&str) -> bool,
) -> BenchSummary {
    let solved_iters: Vec<f64> = records
        .iter()
        .filter(|r| solved(&r.status))
        .map(|r| r.iterations as f64)
        .collect();
    let solved_count = solved_iters.len();
    let mean_iterations = if solved_count > 0 {
        solved_iters.iter().sum::<f64>() / solved_count as f64
    } else {
        0.0
    };
    let std_iterations = if solved_count > 1 {
        let spread = solved_iters
            .iter()
            .map(|v| (v - mean_iterations).powi(2))
            .sum::<f64>()
            / (solved_count - 1) as f64;
        spread.sqrt()
    } else {
        0.0
    };
    BenchSummary {
        label,
        tol_x,
        count: records.len(),
        solved_count,
        total_iterations: records
            .iter()
            .filter(|r| solved(&r.status))
            .map(|r| r.iterations)
            .sum(),
        total_time: records.iter().map(|r| r.runtime_seconds).sum(),
        mean_iterations,
        std_iterations,
    }
}

/// Parses a rendered CSV back into records; used by the self-check that
/// summaries are recomputable from the file alone.
pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => {
            return Err(CliError::Usage(format!(
                "unexpected CSV header: {:?}",
                other.unwrap_or_default()
            )))
        }
    }
    let mut records = Vec::new();
    for (index, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(CliError::Usage(format!(
                "record {index}: expected 10 fields, got {}",
                fields.len()
            )));
        }
        let number = |field: &str| -> Result<f64, CliError> {
            field
                .parse()
                .map_err(|_| CliError::Usage(format!("record {index}: bad number `{field}`")))
        };
        let opt_number = |field: &str| -> Result<Option<f64>, CliError> {
            if field.is_empty() {
                Ok(None)
            } else {
                number(field).map(Some)
            }
        };
        records.push(BenchRecord {
            instance_id: fields[0].to_string(),
            n: fields[1]
                .parse()
                .map_err(|_| CliError::Usage(format!("record {index}: bad n `{}`", fields[1])))?,
            beta: opt_number(fields[2])?,
            tol_x: number(fields[3])?,
            iterations: fields[4].parse().map_err(|_| {
                CliError::Usage(format!("record {index}: bad iterations `{}`", fields[4]))
            })?,
            status: fields[5].to_string(),
            runtime_seconds: number(fields[6])?,
            final_residual: opt_number(fields[7])?,
            rate_bound: opt_number(fields[8])?,
            max_observed_contraction: opt_number(fields[9])?,
        });
    }
    Ok(records)
}
