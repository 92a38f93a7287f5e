//! `sscqp verify`: cross-module invariant sweeps.
//!
//! Each property runs a deterministic sweep derived from `--seed` and
//! prints one PASS/FAIL line with its check count. Any failure prints the
//! reproduction seed of the offending case and the command exits with
//! code 3. Errors raised *inside* a sweep count as failures of that
//! property rather than aborting the run.

use sscqp::error::Error;
use sscqp::generator::{generate, InstanceSpec};
use sscqp::linalg::{LuFactorization, Vector};
use sscqp::model::check_kkt;
use sscqp::oracle::{enumerate_solve, ENUMERATION_CAP};
use sscqp::rng::{derive_seed, Rng};
use sscqp::solver::{
    inverse_norm_bound_check, perturbation_bound_check, solve, verify_rate, SolveStatus,
    SolverConfig,
};

use crate::error::CliError;
use crate::records::{render_csv, parse_csv, summarize, BenchRecord, measure};
use crate::{VerifyArgs, EXIT_PROPERTY_FAILURE};

struct PropertyReport {
    name: &'static str,
    checked: usize,
    failures: Vec<String>,
}

impl PropertyReport {
    fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn known_u_config(tol_x: f64) -> SolverConfig {
    SolverConfig {
        tol_x,
        tol_res: 1e-300,
        ..SolverConfig::default()
    }
}

fn random_vector(rng: &mut Rng, n: usize, scale: f64) -> Vector {
    Vector::new((0..n).map(|_| rng.symmetric(scale)).collect()).expect("non-empty draw")
}

pub fn run(args: &VerifyArgs) -> Result<u8, CliError> {
    if args.n < 2 {
        return Err(CliError::Usage(format!(
            "--n must be at least 2, got {}",
            args.n
        )));
    }
    if args.n > ENUMERATION_CAP {
        return Err(CliError::Usage(format!(
            "--n {} exceeds the enumeration cap ({ENUMERATION_CAP}) required by the oracle suites",
            args.n
        )));
    }
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }

    let reports = [
        contraction_rate(args),
        finite_termination(args),
        newton_nonsingular(args),
        inverse_norm_bound(args),
        perturbation_bound(args),
        oracle_agreement(args),
        kkt_certificates(args),
        suite_aggregation(args),
    ];

    let mut all_passed = true;
    for report in &reports {
        if report.passed() {
            println!("PASS {}: {} checks", report.name, report.checked);
        } else {
            all_passed = false;
            println!(
                "FAIL {}: {} of {} checks failed",
                report.name,
                report.failures.len(),
                report.checked
            );
            for failure in report.failures.iter().take(5) {
                println!("  {failure}");
            }
            if report.failures.len() > 5 {
                println!("  … and {} more", report.failures.len() - 5);
            }
        }
    }
    Ok(if all_passed { 0 } else { EXIT_PROPERTY_FAILURE })
}

/// Every contraction-regime run with a planted solution obeys
/// ‖u−x_{k+1}‖ ≤ (‖M‖/(1−‖M‖))‖u−x_k‖ + 1e-10·(1+‖u‖) on every step and
/// stops on the known-solution test.
fn contraction_rate(args: &VerifyArgs) -> PropertyReport {
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..args.count as u64 {
        let item_seed = derive_seed(args.seed, 100 + i);
        checked += 1;
        let outcome = (|| -> Result<bool, Error> {
            let spec = InstanceSpec::new(args.n, (0.0, 0.5), item_seed)?;
            let inst = generate(&spec)?;
            let report = solve(
                inst.system(),
                inst.x0(),
                &known_u_config(1e-10),
                Some(inst.planted_solution()),
            )?;
            Ok(report.status == SolveStatus::ConvergedKnownSolution
                && verify_rate(&report, inst.system(), inst.planted_solution())?)
        })();
        match outcome {
            Ok(true) => {}
            Ok(false) => failures.push(format!("rate bound violated; reproduce with seed {item_seed}")),
            Err(e) => failures.push(format!("error `{e}`; reproduce with seed {item_seed}")),
        }
    }
    PropertyReport {
        name: "contraction-rate",
        checked,
        failures,
    }
}

/// Without a planted solution and with the residual stop disabled, every
/// contraction-regime run ends on a repeated sign pattern whose iterate is
/// already a root to 1e-10 relative residual.
fn finite_termination(args: &VerifyArgs) -> PropertyReport {
    let mut checked = 0;
    let mut failures = Vec::new();
    let config = SolverConfig {
        tol_res: 1e-300,
        ..SolverConfig::default()
    };
    for i in 0..args.count as u64 {
        let item_seed = derive_seed(args.seed, 200 + i);
        checked += 1;
        let outcome = (|| -> Result<bool, Error> {
            let spec = InstanceSpec::new(args.n, (0.0, 0.5), item_seed)?;
            let inst = generate(&spec)?;
            let report = solve(inst.system(), inst.x0(), &config, None)?;
            let gate = 1e-10 * (1.0 + inst.system().q().norm());
            Ok(matches!(
                report.status,
                SolveStatus::FiniteTermination | SolveStatus::ConvergedResidual
            ) && report.final_residual_norm <= gate)
        })();
        match outcome {
            Ok(true) => {}
            Ok(false) =>

                failures.push(format!("no exact pattern stop; reproduce with seed {item_seed}")),
            Err(e) => failures.push(format!("error `{e}`; reproduce with seed {item_seed}")),
        }
    }
    PropertyReport {
        name: "finite-termination",
        checked,
        failures,
    }
}

/// Newton matrices S(x) factor without a singularity report across ‖M‖
/// bands up to 1e6.
fn newton_nonsingular(args: &VerifyArgs) -> PropertyReport {
    const BANDS: [(f64, f64); 3] = [(0.0, 0.5), (0.5, 1e3), (1e3, 1e6)];
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..args.count as u64 {
        let item_seed = derive_seed(args.seed, 300 + i);
        let band = BANDS[(i % BANDS.len() as u64) as usize];
        let outcome = (|| -> Result<usize, Error> {
            let spec = InstanceSpec::new(args.n, band, item_seed)?;
            let inst = generate(&spec)?;
            let mut rng = Rng::new(derive_seed(item_seed, 1));
            let mut bad = 0;
            for _ in 0..10 {
                let x = random_vector(&mut rng, args.n, 1e6);
                let jac = inst.system().jacobian(&x.sign_pattern())?;
                match LuFactorization::factor(&jac) {
                    Ok(_) => {}
                    Err(Error::SingularMatrix { .. }) => bad += 1,
                    Err(e) => return Err(e),
                }
            }
            Ok(bad)
        })();
        checked += 10;
        match outcome {
            Ok(0) => {}
            Ok(bad) => failures.push(format!(
                "{bad} singular matrices; reproduce with seed {item_seed}"
            )),
            Err(e) => failures.push(format!("error `{e}`; reproduce with seed {item_seed}")),
        }
    }
    PropertyReport {
        name: "newton-nonsingular",
        checked,
        failures,
    }
}

/// ‖S(x)⁻¹‖ ≤ 1/(1−‖M‖) across a ‖M‖ ∈ [0.2, 0.95) sweep. The measuring
/// power iteration stalls on near-tied spectra; stalls are redrawn, a
/// `false` verdict never is.
fn inverse_norm_bound(args: &VerifyArgs) -> PropertyReport {
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..args.count as u64 {
        let item_seed = derive_seed(args.seed, 400 + i);
        let outcome = (|| -> Result<usize, Error> {
            let spec = InstanceSpec::new(args.n, (0.2, 0.95), item_seed)?;
            let inst = generate(&spec)?;
            let mut rng = Rng::new(derive_seed(item_seed, 1));
            let mut bad = 0;
            for _ in 0..10 {
                let mut budget = 50;
                loop {
                    let x = random_vector(&mut rng, args.n, 1e6);
                    match inverse_norm_bound_check(inst.system(), &x) {
                        Ok(true) => break,
                        Ok(false) => {
                            bad += 1;
                            break;
                        }
                        Err(Error::NoConvergence { .. }) if budget > 0 => budget -= 1,
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok(bad)
        })();
        checked += 10;
        match outcome {
            Ok(0) => {}
            Ok(bad) => failures.push(format!(
                "{bad} bound violations; reproduce with seed {item_seed}"
            )),
            Err(e) => failures.push(format!("error `{e}`; reproduce with seed {item_seed}")),
        }
    }
    PropertyReport {
        name: "inverse-norm-bound",
        checked,
        failures,
    }
}

/// ‖S(x)−S(y)‖ ≤ ‖M‖ and the linearization bound
/// ‖F(x)−F(y)−S(y)(x−y)‖ ≤ ‖M‖‖x−y‖, swept like the inverse bound.
fn perturbation_bound(args: &VerifyArgs) -> PropertyReport {
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..args.count as u64 {
        let item_seed = derive_seed(args.seed, 500 + i);
        let outcome = (|| -> Result<usize, Error> {
            let spec = InstanceSpec::new(args.n, (0.2, 0.95), item_seed)?;
            let inst = generate(&spec)?;
            let mut rng = Rng::new(derive_seed(item_seed, 1));
            let mut bad = 0;
            for _ in 0..10 {
                let mut budget = 50;
                loop {
                    let x = random_vector(&mut rng, args.n, 1e6);
                    let y = random_vector(&mut rng, args.n, 1e6);
                    match perturbation_bound_check(inst.system(), &x, &y) {
                        Ok(true) => break,
                        Ok(false) => {
                            bad += 1;
                            break;
                        }
                        Err(Error::NoConvergence { .. }) if budget > 0 => budget -= 1,
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok(bad)
        })();
        checked += 10;
        match outcome {
            Ok(0) => {}
            Ok(bad) => failures.push(format!(
                "{bad} bound violations; reproduce with seed {item_seed}"
            )),
            Err(e) => failures.push(format!("error `{e}`; reproduce with seed {item_seed}")),
        }
    }
    PropertyReport {
        name: "perturbation-bound",
        checked,
        failures,
    }
}

/// Newton's root equals the enumeration oracle's unique root. Runs at unit
/// value scale because the enumeration gates are absolute.
fn oracle_agreement(args: &VerifyArgs) -> PropertyReport {
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..args.count as u64 {
        let item_seed = derive_seed(args.seed, 600 + i);
        checked += 1;
        let outcome = (|| -> Result<bool, Error> {
            let spec = InstanceSpec::with_value_scale(args.n, (0.0, 0.5), item_seed, 1.0)?;
            let inst = generate(&spec)?;
            let report = solve(
                inst.system(),
                inst.x0(),
                &known_u_config(1e-10),
                Some(inst.planted_solution()),
            )?;
            let oracle = enumerate_solve(inst.system())?;
            let root = match oracle.solution() {
                Some(root) if oracle.solutions.len() == 1 => root,
                _ => return Ok(false),
            };
            let gate = 1e-8 * (1.0 + inst.planted_solution().norm());
            Ok(report.status == SolveStatus::ConvergedKnownSolution
                && report.final_x.sub(root).norm() <= gate)
        })();
        match outcome {
            Ok(true) => {}
            Ok(false) => failures.push(format!(
                "oracle disagreement; reproduce with seed {item_seed}"
            )),
            Err(e) => failures.push(format!("error `{e}`; reproduce with seed {item_seed}")),
        }
    }
    PropertyReport {
        name: "oracle-agreement",
        checked,
        failures,
    }
}

/// Recovered QP solutions of converged runs carry a KKT certificate.
fn kkt_certificates(args: &VerifyArgs) -> PropertyReport {
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..args.count as u64 {
        let item_seed = derive_seed(args.seed, 600 + i); // same instances as the oracle suite
        checked += 1;
        let outcome = (|| -> Result<bool, Error> {
            let spec = InstanceSpec::with_value_scale(args.n, (0.0, 0.5), item_seed, 1.0)?;
            let inst = generate(&spec)?;
            let report = solve(
                inst.system(),
                inst.x0(),
                &known_u_config(1e-10),
                Some(inst.planted_solution()),
            )?;
            let y = inst.system().recover_qp_solution(&report.final_x)?;
            Ok(report.status.converged() && check_kkt(inst.problem(), &y, 1e-7)?.passed)
        })();
        match outcome {
            Ok(true) => {}
            Ok(false) => failures.push(format!(
                "certificate rejected; reproduce with seed {item_seed}"
            )),
            Err(e) => failures.push(format!("error `{e}`; reproduce with seed {item_seed}")),
        }
    }
    PropertyReport {
        name: "kkt-certificates",
        checked,
        failures,
    }
}

/// Bench summaries are recomputable from the rendered CSV alone: totals
/// and means recomputed from a parsed round trip match exactly.
fn suite_aggregation(args: &VerifyArgs) -> PropertyReport {
    let mut checked = 0;
    let mut failures = Vec::new();
    let item_seed = derive_seed(args.seed, 700);
    let outcome = (|| -> Result<Vec<String>, Error> {
        let spec = InstanceSpec::new(args.n, (0.0, 0.5), item_seed)?;
        let count = args.count.min(10);
        let mut records: Vec<BenchRecord> = Vec::new();
        for i in 0..count as u64 {
            let inst = generate(&spec.reseeded(derive_seed(item_seed, i)))?;
            records.push(measure(
                format!("i{i:04}"),
                &inst,
                inst.x0(),
                &known_u_config(1e-8),
                1,
            ));
        }
        let solved = |label: &str| label == "converged_known_solution";
        let direct = summarize(
            "aggregation".into(),
            1e-8,
            &records.iter().collect::<Vec<_>>(),
            &solved,
        );
        let reparsed = parse_csv(&render_csv(&records))
            .map_err(|e| Error::PreconditionViolated(format!("CSV round trip failed: {e}")))?;
        let recomputed = summarize(
            "aggregation".into(),
            1e-8,
            &reparsed.iter().collect::<Vec<_>>(),
            &solved,
        );
        let mut problems = Vec::new();
        if direct.total_iterations
            != records
                .iter()
                .filter(|r| solved(&r.status))
                .map(|r| r.iterations)
                .sum::<usize>()
        {
            problems.push("total_iterations is not the sum of record iterations".to_string());
        }
        if direct.total_iterations != recomputed.total_iterations
            || direct.solved_count != recomputed.solved_count
            || direct.mean_iterations != recomputed.mean_iterations
            || direct.std_iterations != recomputed.std_iterations
        {
            problems.push("summary differs after a CSV round trip".to_string());
        }
        Ok(problems)
    })();
    checked += 1;
    match outcome {
        Ok(problems) if problems.is_empty() => {}
        Ok(problems) => {
            for p in problems {
                failures.push(format!("{p}; reproduce with seed {item_seed}"));
            }
        }
        Err(e) => failures.push(format!("error `{e}`; reproduce with seed {item_seed}")),
    }
    PropertyReport {
        name: "suite-aggregation",
        checked,
        failures,
    }
}
