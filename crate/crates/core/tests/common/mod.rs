//! Shared helpers for the integration suites: a characteristic-polynomial
//! eigenvalue oracle that shares no code with the library's power-iteration
//! norms, plus small instance-construction shortcuts.
#![allow(dead_code)]

use sscqp::generator::InstanceSpec;
use sscqp::linalg::DenseMatrix;

/// Largest dimension the polynomial oracle accepts; coefficient growth
/// makes bigger characteristic polynomials numerically meaningless.
pub const EIGEN_ORACLE_CAP: usize = 8;

/// All real eigenvalues of a small symmetric matrix, via the
/// Faddeev–LeVerrier characteristic polynomial and bisection between
/// critical points. Completely independent of the library's spectral
/// routines. Roots of even multiplicity may be reported once; extreme
/// eigenvalues are always present, which is what norm checks need.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    assert!(m.is_square(), "eigenvalue oracle needs a square matrix");
    let n = m.rows();
    assert!(n <= EIGEN_ORACLE_CAP, "eigenvalue oracle capped at n = 8");
    let scale = m.max_abs();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    let coeffs = char_poly(&m.scaled(1.0 / scale));
    let mut roots = real_roots(&coeffs);
    for r in &mut roots {
        *r *= scale;
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Spectral norm of a symmetric matrix by the polynomial oracle.
pub fn spectral_norm_oracle(m: &DenseMatrix) -> f64 {
    symmetric_eigenvalues(m)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
}

/// Monic characteristic polynomial coefficients, highest power first:
/// `det(λI − A) = λⁿ + c₁λⁿ⁻¹ + … + c_n`.
fn char_poly(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1.0);
    let mut mk = a.clone();
    for k in 1..=n {
        let ck = -trace(&mk) / k as f64;
        coeffs.push(ck);
        if k < n {
            let mut shifted = mk;
            shifted.add_diagonal(ck);
            mk = a.matmul(&shifted);
        }
    }
    coeffs
}

fn trace(m: &DenseMatrix) -> f64 {
    (0..m.rows()).map(|i| m.get(i, i)).sum()
}

fn eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * t + c)
}

/// Magnitude scale of the evaluation at `t`, for relative zero tests.
fn eval_scale(coeffs: &[f64], t: f64) -> f64 {
    1.0 + coeffs.iter().fold(0.0, |acc: f64, &c| acc * t.abs() + c.abs())
}

/// All real roots of a polynomial whose roots are known to be real
/// (symmetric-matrix spectra). Critical points of the polynomial split the
/// line into intervals holding at most one root each; sign changes are
/// bisected, and critical points where the value is (relatively) zero are
/// roots of even multiplicity.
fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    if degree == 1 {
        return vec![-coeffs[1] / coeffs[0]];
    }
    let derivative: Vec<f64> = (0..degree)
        .map(|i| coeffs[i] * (degree - i) as f64)
        .collect();
    let critical = real_roots(&derivative);
    // Cauchy bound on root magnitude for the monic normalization.
    let bound = 1.0
        + coeffs
            .iter()
            .skip(1)
            .map(|c| (c / coeffs[0]).abs())
            .fold(0.0, f64::max);
    let mut points = vec![-bound];
    points.extend(critical.into_iter().filter(|r| r.abs() < bound));
    points.push(bound);
    points.sort_by(f64::total_cmp);

    let mut roots: Vec<f64> = Vec::new();
    let push = |roots: &mut Vec<f64>, r: f64| {
        if !roots.iter().any(|&s| (s - r).abs() <= 1e-9 * (1.0 + r.abs())) {
            roots.push(r);
        }
    };
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(coeffs, a), eval(coeffs, b));
        if fa.abs() <= 1e-10 * eval_scale(coeffs, a) {
            push(&mut roots, a);
        }
        if fb.abs() <= 1e-10 * eval_scale(coeffs, b) {
            push(&mut roots, b);
        }
        if fa.signum() * fb.signum() < 0.0 {
            push(&mut roots, bisect(coeffs, a, b, fa));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn bisect(coeffs: &[f64], mut a: f64, mut b: f64, fa: f64) -> f64 {
    let negative_side = fa < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = eval(coeffs, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == negative_side {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// A spec drawing raw entries from `[-1, 1]`, keeping property data at unit
/// scale where absolute tolerances are meaningful.
pub fn unit_scale_spec(n: usize, beta_range: (f64, f64), seed: u64) -> InstanceSpec {
    InstanceSpec::with_value_scale(n, beta_range, seed, 1.0)
        .expect("valid spec for unit-scale tests")
}
