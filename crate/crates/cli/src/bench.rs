//! `sscqp bench`: the three experiment suites.
//!
//! All suites generate planted instances and solve them with the planted
//! solution supplied, so the known-solution distance test is the stop under
//! measurement; a run counts as solved only when that test fires. Passing
//! `--tol-res` opts into the residual stop, which then also counts.
//!
//! Instances are distributed over the worker pool; the timed repeats for
//! one record run sequentially on one worker, and records are merged in
//! instance order, so output is deterministic apart from the runtime
//! column.

use std::fs;

use rayon::prelude::*;

use sscqp::generator::{generate, InstanceSpec};
use sscqp::linalg::Vector;
use sscqp::rng::{derive_seed, Rng};
use sscqp::solver::SolverConfig;

use crate::error::CliError;
use crate::records::{
    generation_failure_record, measure, render_csv, summarize, BenchRecord, BenchSummary,
};
use crate::workers::thread_pool;
use crate::{BenchArgs, FormatArg, SuiteArg};

/// Tolerance ladder used when `--tol-x` is not given.
const LADDER: [f64; 3] = [1e-6, 1e-8, 1e-10];

/// Starts per problem in the table2 suite (the paper-scale design reduced
/// to desk scale).
const TABLE2_STARTS: usize = 50;

/// ‖M‖ bands of the table3 suite.
const TABLE3_BANDS: [(f64, f64); 4] = [(0.0, 0.5), (0.5, 1e3), (1e3, 1e6), (1e6, 1e7)];

fn config_for(args: &BenchArgs, tol_x: f64) -> SolverConfig {
    SolverConfig {
        method: args.method.to_method(),
        tol_x,
        // Disabled by default so the distance test is the one measured.
        tol_res: args.tol_res.unwrap_or(1e-300),
        max_iter: args.max_iter,
        track_rate: true,
    }
}

fn solved_label(args: &BenchArgs) -> impl Fn(&str) -> bool {
    let residual_opted_in = args.tol_res.is_some();
    move |label: &str| {
        label == "converged_known_solution"
            || (residual_opted_in && label == "converged_residual")
    }
}

fn random_start(rng: &mut Rng, n: usize, scale: f64) -> Vector {
    Vector::new((0..n).map(|_| rng.symmetric(scale)).collect()).expect("non-empty start")
}

pub fn run(args: &BenchArgs) -> Result<u8, CliError> {
    if args.repeats == 0 || args.repeats.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "--repeats must be odd so the median is well defined, got {}",
            args.repeats
        )));
    }
    let ladder: Vec<f64> = match args.tol_x {
        Some(tol) => vec![tol],
        None => LADDER.to_vec(),
    };
    let pool = thread_pool()?;
    let (heading, records, summaries) = match args.suite {
        SuiteArg::Table1 => table1(args, &ladder, &pool)?,
        SuiteArg::Table2 => table2(args, &ladder, &pool)?,
        SuiteArg::Table3 => table3(args, &ladder, &pool)?,
    };

    let csv = render_csv(&records);
    if let Some(path) = &args.out {
        fs::write(path, csv.as_bytes())?;
    }
    match args.format {
        FormatArg::Csv => print!("{csv}"),
        FormatArg::Table => {
            println!("{heading}");
            print_summaries(&summaries, args.suite);
            if let Some(path) = &args.out {
                println!("records: {}", path.display());
            }
        }
    }
    Ok(0)
}

fn print_summaries(summaries: &[BenchSummary], suite: SuiteArg) {
    match suite {
        SuiteArg::Table2 => println!(
            "{:<18} {:>8} {:>12} {:>12} {:>12} {:>14}",
            "group", "tol_x", "solved", "MEAN(mean)", "MEAN(std)", "total_time_s"
        ),
        _ => println!(
            "{:<18} {:>8} {:>12} {:>12} {:>12} {:>12} {:>14}",
            "group", "tol_x", "solved", "total_iters", "mean_iters", "std_iters", "total_time_s"
        ),
    }
    for s in summaries {
        let solved = format!("{}/{}", s.solved_count, s.count);
        match suite {
            SuiteArg::Table2 => println!(
                "{:<18} {:>8} {:>12} {:>12.3} {:>12.3} {:>14.3e}",
                s.label,
                format!("{:.0e}", s.tol_x),
                solved,
                s.mean_iterations,
                s.std_iterations,
                s.total_time,
            ),
            _ => println!(
                "{:<18} {:>8} {:>12} {:>12} {:>12.3} {:>12.3} {:>14.3e}",
                s.label,
                format!("{:.0e}", s.tol_x),
                solved,
                s.total_iterations,
                s.mean_iterations,
                s.std_iterations,
                s.total_time,
            ),
        }
    }
}

/// table1: one instance set, solved from its generated starts at each
/// ladder tolerance; totals and means per tolerance.
fn table1(
    args: &BenchArgs,
    ladder: &[f64],
    pool: &rayon::ThreadPool,
) -> Result<(String, Vec<BenchRecord>, Vec<BenchSummary>), CliError> {
    let n = args.n.unwrap_or(100);
    let count = args.count.unwrap_or(100);
    let range = (args.beta_lb.unwrap_or(0.0), args.beta_ub.unwrap_or(0.5));
    let spec = InstanceSpec::with_value_scale(n, range, args.seed, args.value_scale)?;
    let seed = args.seed;
    let repeats = args.repeats;

    let rows: Vec<Vec<BenchRecord>> = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let id = format!("i{i:04}");
                match generate(&spec.reseeded(derive_seed(seed, i as u64))) {
                    Ok(inst) => ladder
                        .iter()
                        .map(|&tol| {
                            measure(id.clone(), &inst, inst.x0(), &config_for(args, tol), repeats)
                        })
                        .collect(),
                    Err(_) => ladder
                        .iter()
                        .map(|&tol| generation_failure_record(id.clone(), n, tol))
                        .collect(),
                }
            })
            .collect()
    });
    let records: Vec<BenchRecord> = rows.into_iter().flatten().collect();

    let solved = solved_label(args);
    let summaries = ladder
        .iter()
        .map(|&tol| {
            let group: Vec<&BenchRecord> = records.iter().filter(|r| r.tol_x == tol).collect();
            summarize(format!("n={n}"), tol, &group, &solved)
        })
        .collect();
    let heading = format!(
        "suite: table1  n={n}  instances={count}  beta=[{}, {})  seed={}  repeats={}",
        range.0, range.1, args.seed, args.repeats
    );
    Ok((heading, records, summaries))
}

/// table2: one problem set, many random starts per problem. The summary
/// reports the MEAN over problems of per-problem iteration means and
/// standard deviations (computed over solved runs).
fn table2(
    args: &BenchArgs,
    ladder: &[f64],
    pool: &rayon::ThreadPool,
) -> Result<(String, Vec<BenchRecord>, Vec<BenchSummary>), CliError> {
    let n = args.n.unwrap_or(100);
    let problems = args.count.unwrap_or(50);
    let range = (args.beta_lb.unwrap_or(0.0), args.beta_ub.unwrap_or(0.5));
    let spec = InstanceSpec::with_value_scale(n, range, args.seed, args.value_scale)?;
    let seed = args.seed;
    let repeats = args.repeats;
    let scale = args.value_scale;

    let rows: Vec<Vec<BenchRecord>> = pool.install(|| {
        (0..problems)
            .into_par_iter()
            .map(|i| {
                let inst = match generate(&spec.reseeded(derive_seed(seed, i as u64))) {
                    Ok(inst) => inst,
                    Err(_) => {
                        return (0..TABLE2_STARTS)
                            .flat_map(|j| {
                                ladder.iter().map(move |&tol| {
                                    generation_failure_record(
                                        format!("p{i:03}_s{j:03}"),
                                        n,
                                        tol,
                                    )
                                })
                            })
                            .collect();
                    }
                };
                let mut rng = Rng::new(derive_seed(seed, 500_000 + i as u64));
                let starts: Vec<Vector> = (0..TABLE2_STARTS)
                    .map(|_| random_start(&mut rng, n, scale))
                    .collect();
                starts
                    .iter()
                    .enumerate()
                    .flat_map(|(j, start)| {
                        let inst = &inst;
                        ladder.iter().map(move |&tol| {
                            measure(
                                format!("p{i:03}_s{j:03}"),
                                inst,
                                start,
                                &config_for(args, tol),
                                repeats,
                            )
                        })
                    })
                    .collect()
            })
            .collect()
    });

    let solved = solved_label(args);
    let mut summaries = Vec::with_capacity(ladder.len());
    for &tol in ladder {
        let mut per_problem_mean = Vec::with_capacity(problems);
        let mut per_problem_std = Vec::with_capacity(problems);
        let mut solved_count = 0usize;
        let mut count = 0usize;
        let mut total_iterations = 0usize;
        let mut total_time = 0.0f64;
        for row in &rows {
            let iters: Vec<f64> = row
                .iter()
                .filter(|r| r.tol_x == tol)
                .inspect(|r| {
                    count += 1;
                    total_time += r.runtime_seconds;
                })
                .filter(|r| solved(&r.status))
                .map(|r| {
                    solved_count += 1;
                    total_iterations += r.iterations;
                    r.iterations as f64
                })
                .collect();
            if iters.is_empty() {
                continue;
            }
            let mean = iters.iter().sum::<f64>() / iters.len() as f64;
            per_problem_mean.push(mean);
            per_problem_std.push(if iters.len() > 1 {
                (iters.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (iters.len() - 1) as f64)
                    .sqrt()
            } else {
                0.0
            });
        }
        let mean_of = |v: &[f64]| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        summaries.push(BenchSummary {
            label: format!("{problems}x{TABLE2_STARTS}"),
            tol_x: tol,
            count,
            solved_count,
            total_iterations,
            total_time,
            mean_iterations: mean_of(&per_problem_mean),
            std_iterations: mean_of(&per_problem_std),
        });
    }

    let records: Vec<BenchRecord> = rows.into_iter().flatten().collect();
    let heading = format!(
        "suite: table2  n={n}  problems={problems}  starts={TABLE2_STARTS}  beta=[{}, {})  seed={}  repeats={}",
        range.0, range.1, args.seed, args.repeats
    );
    Ok((heading, records, summaries))
}

/// table3: solved counts and mean iterations per ‖M‖ band and tolerance.
fn table3(
    args: &BenchArgs,
    ladder: &[f64],
    pool: &rayon::ThreadPool,
) -> Result<(String, Vec<BenchRecord>, Vec<BenchSummary>), CliError> {
    let n = args.n.unwrap_or(50);
    let count = args.count.unwrap_or(200);
    let bands: Vec<(f64, f64)> = match (args.beta_lb, args.beta_ub) {
        (None, None) => TABLE3_BANDS.to_vec(),
        (lb, ub) => vec![(lb.unwrap_or(0.0), ub.unwrap_or(0.5))],
    };
    // Validate every band before any work happens.
    let mut specs = Vec::with_capacity(bands.len());
    for (b, &band) in bands.iter().enumerate() {
        specs.push(InstanceSpec::with_value_scale(
            n,
            band,
            derive_seed(args.seed, 9_000 + b as u64),
            args.value_scale,
        )?);
    }
    let repeats = args.repeats;

    let rows: Vec<Vec<BenchRecord>> = pool.install(|| {
        (0..bands.len() * count)
            .into_par_iter()
            .map(|k| {
                let (b, i) = (k / count, k % count);
                let spec = &specs[b];
                let id = format!("b{b}_i{i:03}");
                match generate(&spec.reseeded(derive_seed(spec.seed(), i as u64))) {
                    Ok(inst) => ladder
                        .iter()
                        .map(|&tol| {
                            measure(id.clone(), &inst, inst.x0(), &config_for(args, tol), repeats)
                        })
                        .collect(),
                    Err(_) => ladder
                        .iter()
                        .map(|&tol| generation_failure_record(id.clone(), n, tol))
                        .collect(),
                }
            })
            .collect()
    });
    let records: Vec<BenchRecord> = rows.into_iter().flatten().collect();

    let solved = solved_label(args);
    let mut summaries = Vec::with_capacity(bands.len() * ladder.len());
    for (b, &(lb, ub)) in bands.iter().enumerate() {
        for &tol in ladder {
            let prefix = format!("b{b}_");
            let group: Vec<&BenchRecord> = records
                .iter()
                .filter(|r| r.tol_x == tol && r.instance_id.starts_with(&prefix))
                .collect();
            summaries.push(summarize(format!("[{lb}, {ub})"), tol, &group, &solved));
        }
    }
    let heading = format!(
        "suite: table3  n={n}  instances-per-band={count}  bands={}  seed={}  repeats={}",
        bands.len(),
        args.seed,
        args.repeats
    );
    Ok((heading, records, summaries))
}
