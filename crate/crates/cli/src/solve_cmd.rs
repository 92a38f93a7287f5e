//! `sscqp solve`: run the solver on one problem file.

use sscqp::io::{format_value, read_problem_file};
use sscqp::linalg::Vector;
use sscqp::model::{build_system, check_kkt};
use sscqp::solver::{solve, SolverConfig};

use crate::error::CliError;
use crate::records::status_label;
use crate::{SolveArgs, EXIT_NO_CONVERGENCE};

fn render_vector(v: &Vector) -> String {
    v.as_slice()
        .iter()
        .map(|&x| format_value(x))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run(args: &SolveArgs) -> Result<u8, CliError> {
    let file = read_problem_file(&args.problem)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.problem.display())))?;
    let system = build_system(&file.problem)?;
    let config = SolverConfig {
        method: args.method.to_method(),
        tol_x: args.tol_x,
        tol_res: args.tol_res,
        max_iter: args.max_iter,
        track_rate: true,
    };
    let start = match &file.x0 {
        Some(x0) => x0.clone(),
        None => Vector::zeros(system.dim()),
    };
    let report = solve(&system, &start, &config, file.u.as_ref())?;

    println!("status: {}", status_label(report.status));
    println!("iterations: {}", report.iterations);
    println!(
        "final residual: {}",
        format_value(report.final_residual_norm)
    );
    println!("norm_M: {}", format_value(system.norm_m()));
    if let Some(bound) = report.rate_bound {
        println!("rate bound: {}", format_value(bound));
    }
    if report.cycle_detected {
        println!("note: a sign-pattern cycle was detected and the run was cut short");
    }

    let qp_solution = system.recover_qp_solution(&report.final_x)?;
    println!("solution x: {}", render_vector(&report.final_x));
    println!("qp solution A·x⁺: {}", render_vector(&qp_solution));

    // Certificate tolerance scales with the solution magnitude so the
    // additive feasibility gates stay meaningful on large-valued data.
    let kkt_tol = 1e-7 * (1.0 + qp_solution.norm_inf());
    let cert = check_kkt(&file.problem, &qp_solution, kkt_tol)?;
    println!(
        "kkt: primal {} dual {} complementarity {} passed {} (tol {})",
        format_value(cert.primal_feasibility),
        format_value(cert.dual_feasibility),
        format_value(cert.complementarity),
        cert.passed,
        format_value(kkt_tol),
    );

    if args.trace {
        for record in &report.trace {
            let pivot = record
                .smallest_pivot
                .map(format_value)
                .unwrap_or_else(|| "-".to_string());
            println!(
                "trace k={} residual={} pattern={} pivot={}",
                record.k,
                format_value(record.residual_norm),
                record.pattern,
                pivot,
            );
        }
    }

    Ok(if report.status.converged() {
        0
    } else {
        EXIT_NO_CONVERGENCE
    })
}
