//! Seeded random instance generation with a planted solution.
//!
//! Instances are built so that two quantities are known by construction:
//! the operator norm `‖AᵀQA − I‖` equals a requested value `β`, and a drawn
//! vector `u` is an exact root of the nonsmooth system. The first follows
//! from choosing `B·A = U₁ · sqrt(I + (β/σ)Σ) · U₂` with `U₁ Σ U₂` the
//! singular value decomposition of a random matrix and `σ` its largest
//! singular value: then `AᵀQA − I = U₂ᵀ (β/σ) Σ U₂`, whose norm is exactly
//! `β`. The second follows from solving `b = (Aᵀ)⁻¹ (−M u⁺ − u)`.
//!
//! Generation is a pure function of the spec: one seed fixes every draw,
//! including the redraw rounds taken when a degenerate sample (singular
//! factor, missed planting tolerance) forces a retry.

use crate::error::{Error, Result};
use crate::linalg::{svd_jacobi, DenseMatrix, LuFactorization, Vector};
use crate::model::{build_system, QpProblem, SemiSmoothSystem};
use crate::rng::{derive_seed, Rng};

/// Rounds of full redraws before generation is abandoned.
pub const MAX_GENERATION_ROUNDS: u64 = 10;

/// Attempts at drawing one nonsingular matrix inside a round.
const INNER_DRAW_ATTEMPTS: usize = 32;

/// Relative accuracy to which the generated operator norm must match `β`.
pub const NORM_PLANT_RELATIVE: f64 = 1e-6;

/// Relative bound on the residual of the planted solution.
pub const PLANTED_RESIDUAL_RELATIVE: f64 = 1e-8;

/// Offset separating redraw-round seeds from batch-index seeds, so the two
/// derivation streams never collide for batches below 2³² instances.
const ROUND_SEED_OFFSET: u64 = 1 << 32;

/// Parameters of one random instance family.
#[derive(Clone, Debug)]
pub struct InstanceSpec {
    n: usize,
    beta_range: (f64, f64),
    seed: u64,
    value_scale: f64,
}

impl InstanceSpec {
    /// Default half-width of the interval raw entries are drawn from.
    pub const DEFAULT_VALUE_SCALE: f64 = 1e6;

    /// A spec with the default value scale. `beta_range` is the half-open
    /// interval `[lb, ub)` the norm target is drawn from; `lb = 0` is
    /// accepted, with zero draws rejected and retried, so that ranges
    /// like `[0, 0.5)` can be requested directly.
    pub fn new(n: usize, beta_range: (f64, f64), seed: u64) -> Result<Self> {
        Self::with_value_scale(n, beta_range, seed, Self::DEFAULT_VALUE_SCALE)
    }

    /// A spec with an explicit value scale.
    pub fn with_value_scale(
        n: usize,
        beta_range: (f64, f64),
        seed: u64,
        value_scale: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::PreconditionViolated(
                "instance dimension must be at least 1".into(),
            ));
        }
        let (lb, ub) = beta_range;
        if !lb.is_finite() || !ub.is_finite() || lb < 0.0 || lb >= ub {
            return Err(Error::PreconditionViolated(format!(
                "invalid beta range [{lb}, {ub}): need 0 <= lb < ub, both finite"
            )));
        }
        if !value_scale.is_finite() || value_scale <= 0.0 {
            return Err(Error::PreconditionViolated(format!(
                "invalid value scale {value_scale}: need a finite positive number"
            )));
        }
        Ok(Self {
            n,
            beta_range,
            seed,
            value_scale,
        })
    }

    /// Instance dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Half-open interval the norm target is drawn from.
    pub fn beta_range(&self) -> (f64, f64) {
        self.beta_range
    }

    /// Seed of the first draw round.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Half-width of the entry distribution.
    pub fn value_scale(&self) -> f64 {
        self.value_scale
    }

    /// The same spec with a different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// One generated problem together with its planted data.
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    problem: QpProblem,
    system: SemiSmoothSystem,
    u: Vector,
    x0: Vector,
    beta: f64,
    seed: u64,
}

impl GeneratedInstance {
    /// The generated problem.
    pub fn problem(&self) -> &QpProblem {
        &self.problem
    }

    /// The nonsmooth system of the problem, built once at generation time.
    pub fn system(&self) -> &SemiSmoothSystem {
        &self.system
    }

    /// The planted root of the nonsmooth system.
    pub fn planted_solution(&self) -> &Vector {
        &self.u
    }

    /// The drawn starting point.
    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    /// The norm target the instance was built for.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The seed that reproduces this instance under `generate`.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The measured operator norm `‖AᵀQA − I‖`; within
    /// [`NORM_PLANT_RELATIVE`] of [`beta`](Self::beta) by construction.
    pub fn norm_m(&self) -> f64 {
        self.system.norm_m()
    }
}

/// Generates one instance. Deterministic in the spec; degenerate draws are
/// retried on derived seeds for up to [`MAX_GENERATION_ROUNDS`] rounds.
pub fn generate(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    let mut last_failure = String::new();
    for round in 0..MAX_GENERATION_ROUNDS {
        let round_seed = if round == 0 {
            spec.seed
        } else {
            derive_seed(spec.seed, ROUND_SEED_OFFSET + round)
        };
        match attempt(spec, round_seed) {
            Ok(inst) => return Ok(inst),
            Err(e) => last_failure = e.to_string(),
        }
    }
    Err(Error::GenerationFailed(format!(
        "no valid instance after {MAX_GENERATION_ROUNDS} rounds (seed {}, n {}): {last_failure}",
        spec.seed, spec.n
    )))
}

/// Generates `count` instances on seeds derived from the spec's by index.
pub fn generate_batch(spec: &InstanceSpec, count: usize) -> Result<Vec<GeneratedInstance>> {
    if count == 0 {
        return Err(Error::PreconditionViolated(
            "batch count must be at least 1".into(),
        ));
    }
    let mut batch = Vec::with_capacity(count);
    for i in 0..count {
        let item = spec.reseeded(derive_seed(spec.seed, i as u64));
        batch.push(generate(&item).map_err(|e| {
            Error::GenerationFailed(format!("instance {i} of {count}: {e}"))
        })?);
    }
    Ok(batch)
}

/// One full draw round on a fixed seed.
fn attempt(spec: &InstanceSpec, seed: u64) -> Result<GeneratedInstance> {
    let n = spec.n;
    let scale = spec.value_scale;
    let mut rng = Rng::new(seed);

    // (i) Norm target. Zero draws are rejected so a positive β is planted
    // even when the range starts at 0.
    let (lb, ub) = spec.beta_range;
    let mut beta = 0.0;
    for _ in 0..INNER_DRAW_ATTEMPTS {
        beta = rng.uniform(lb, ub);
        if beta > 0.0 {
            break;
        }
    }
    if !(beta > 0.0) {
        return Err(Error::GenerationFailed(
            "norm target drew zero repeatedly".into(),
        ));
    }

    // (ii) Hessian factor B and Q = BᵀB.
    let (b_mat, b_lu) = draw_factorable(&mut rng, n, scale)?;
    let mut q_mat = b_mat.transpose_matmul(&b_mat);
    q_mat.symmetrize();

    // (iii) Random singular-value profile and the cone matrix A solving
    // B·A = U₁·sqrt(I + (β/σ)Σ)·U₂.
    let svd = draw_svd(&mut rng, n, scale)?;
    let sigma_max = svd.sigma[0];
    let mut scaled_vt = svd.vt.clone();
    for k in 0..n {
        let d = (1.0 + beta * svd.sigma[k] / sigma_max).sqrt();
        for j in 0..n {
            let v = scaled_vt[(k, j)];
            scaled_vt.set(k, j, d * v);
        }
    }
    let target = svd.u.matmul(&scaled_vt);
    let mut a = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let col = b_lu.solve(&Vector::new(target.column(j).to_vec())?)?;
        a.column_mut(j).copy_from_slice(col.as_slice());
    }

    // (iv) Planted solution and the linear term that makes it a root:
    // b = (Aᵀ)⁻¹(−M u⁺ − u), with M = AᵀQA − I formed exactly as the
    // system construction forms it.
    let u = draw_vector(&mut rng, n, scale)?;
    let mut m = a.transpose_matmul(&q_mat.matmul(&a));
    m.add_diagonal(-1.0);
    m.symmetrize();
    let rhs = m.matvec(&u.plus_part()).add(&u).scaled(-1.0);
    let a_lu = LuFactorization::factor(&a)?;
    let b_vec = a_lu.solve_transpose(&rhs)?;

    // (v) Starting point.
    let x0 = draw_vector(&mut rng, n, scale)?;

    // Re-validate everything the construction promises; a miss (ill-
    // conditioned draw amplifying rounding) fails the round and triggers
    // a redraw.
    let problem = QpProblem::new(q_mat, b_vec, 0.0, a)?;
    let system = build_system(&problem)?;
    let norm_m = system.norm_m();
    if (norm_m - beta).abs() > NORM_PLANT_RELATIVE * beta {
        return Err(Error::GenerationFailed(format!(
            "operator norm {norm_m} missed target {beta}"
        )));
    }
    let residual = system.residual_norm(&u)?;
    if residual > PLANTED_RESIDUAL_RELATIVE * (1.0 + system.q().norm()) {
        return Err(Error::GenerationFailed(format!(
            "planted solution residual {residual} too large"
        )));
    }

    Ok(GeneratedInstance {
        problem,
        system,
        u,
        x0,
        beta,
        seed: spec.seed,
    })
}

fn draw_vector(rng: &mut Rng, n: usize, scale: f64) -> Result<Vector> {
    Vector::new((0..n).map(|_| rng.symmetric(scale)).collect())
}

fn draw_matrix(rng: &mut Rng, n: usize, scale: f64) -> Result<DenseMatrix> {
    DenseMatrix::new(n, n, (0..n * n).map(|_| rng.symmetric(scale)).collect())
}

/// Draws square matrices until one admits an LU factorization.
fn draw_factorable(
    rng: &mut Rng,
    n: usize,
    scale: f64,
) -> Result<(DenseMatrix, LuFactorization)> {
    for _ in 0..INNER_DRAW_ATTEMPTS {
        let m = draw_matrix(rng, n, scale)?;
        if let Ok(lu) = LuFactorization::factor(&m) {
            return Ok((m, lu));
        }
    }
    Err(Error::GenerationFailed(
        "repeated singular draws for a random factor".into(),
    ))
}

/// Draws square matrices until one admits a full-rank decomposition.
fn draw_svd(rng: &mut Rng, n: usize, scale: f64) -> Result<crate::linalg::Svd> {
    for _ in 0..INNER_DRAW_ATTEMPTS {
        let m = draw_matrix(rng, n, scale)?;
        if let Ok(svd) = svd_jacobi(&m) {
            return Ok(svd);
        }
    }
    Err(Error::GenerationFailed(
        "repeated rank-deficient draws for the spectrum factor".into(),
    ))
}
