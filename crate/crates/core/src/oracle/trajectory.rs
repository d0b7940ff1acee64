//! Trajectory-level confirmation of simulation relations.
//!
//! Admissible driving inputs are built from two least-squares pieces: a
//! state feedback `d = F x` that keeps the velocity inside the target
//! subspace, plus a piecewise-constant random excitation `η` in the exact
//! null directions `{δ : Gδ ∈ 𝒱}`. When matching a relation, the second
//! system's input is solved the same way against the first system's input.
//! The resulting closed loop `ż = M z + N η` is integrated with the classic
//! fourth-order Runge–Kutta step under zero-order hold on `η`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::lstsq;
use crate::error::{Error, Result};
use crate::models::ConstrainedSystem;
use crate::subspace::{block_diag, hstack, kernel, spectral_norm, Matrix, Subspace, Tolerance};
use crate::verify::consistent_subspace;

/// Sampled trajectory on a uniform grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Driving value at the start of each interval; one fewer than `times`.
    pub driving: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
    /// Largest `‖Hx(t)‖` over the grid.
    pub max_constraint_violation: f64,
    /// Largest distance from the consistent subspace before re-projection.
    pub max_drift: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryConfig {
    pub trials: usize,
    /// Seconds.
    pub horizon: f64,
    /// Seconds.
    pub dt: f64,
    pub seed: u64,
    /// Pass threshold on output mismatch, drift and constraint violation.
    pub threshold: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            horizon: 5.0,
            dt: 1e-3,
            seed: 0,
            threshold: 1e-6,
        }
    }
}

impl TrajectoryConfig {
    fn steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(stream))
}

fn normal_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// One RK4 step of `ż = Mz + Nη` with constant `η`, as `z ↦ Φz + Γη`.
struct Rk4Map {
    phi: Matrix,
    gamma: Matrix,
}

impl Rk4Map {
    fn new(m: &Matrix, n: &Matrix, h: f64) -> Self {
        let dim = m.nrows();
        let hm = m * h;
        let hm2 = &hm * &hm;
        let hm3 = &hm2 * &hm;
        let hm4 = &hm3 * &hm;
        let id = Matrix::identity(dim, dim);
        let phi = &id + &hm + &hm2 / 2.0 + &hm3 / 6.0 + &hm4 / 24.0;
        let series = (&id + &hm / 2.0 + &hm2 / 6.0 + &hm3 / 24.0) * h;
        Self {
            phi,
            gamma: series * n,
        }
    }

    fn step(&self, z: &DVector<f64>, eta: &DVector<f64>) -> DVector<f64> {
        &self.phi * z + &self.gamma * eta
    }
}

/// Feedback keeping `Ax + Gd` inside `v`, plus the free input directions.
struct Admissible {
    feedback: Matrix,
    directions: Matrix,
    residual: f64,
}

fn admissible_inputs(a: &Matrix, g: &Matrix, v: &Subspace, tol: &Tolerance) -> Admissible {
    let perp = v.complement_projector();
    let pg = &perp * g;
    let pav = &perp * a * v.basis();
    let f = -lstsq(&pg, &pav);
    let residual = spectral_norm(&(&pav + &pg * &f)) / spectral_norm(a).max(1.0);
    Admissible {
        feedback: f * v.basis().transpose(),
        directions: kernel(&pg, tol).basis().clone(),
        residual,
    }
}

fn vector_norm(v: &DVector<f64>) -> f64 {
    v.norm()
}

/// Consistent trajectory of `x` from `x0 ∈ 𝒱` with random admissible inputs.
pub fn sample_consistent_trajectory(
    x: &ConstrainedSystem,
    x0: &DVector<f64>,
    horizon: f64,
    dt: f64,
    seed: u64,
    tol: &Tolerance,
) -> Result<Trajectory> {
    if x0.len() != x.state_dim() {
        return Err(Error::DimensionMismatch {
            context: "initial state length".into(),
            expected: x.state_dim(),
            found: x0.len(),
        });
    }
    let v = consistent_subspace(x, tol);
    let x0m = Matrix::from_column_slice(x0.len(), 1, x0.as_slice());
    let residual = v.residual(&x0m) / x0.norm().max(1.0);
    if residual > tol.inclusion {
        return Err(Error::NotConsistent { residual });
    }
    let adm = admissible_inputs(&x.a, &x.g, &v, tol);
    let closed = &x.a + &x.g * &adm.feedback;
    let excite = &x.g * &adm.directions;
    let rk = Rk4Map::new(&closed, &excite, dt);
    let proj = v.projector();

    let cfg = TrajectoryConfig {
        horizon,
        dt,
        ..TrajectoryConfig::default()
    };
    let steps = cfg.steps();
    let mut rng = rng_for(seed, 0);
    let mut z = &proj * x0;
    let mut out = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        driving: Vec::with_capacity(steps),
        outputs: Vec::with_capacity(steps + 1),
        max_constraint_violation: vector_norm(&(&x.h * &z)),
        max_drift: 0.0,
    };
    out.times.push(0.0);
    out.outputs.push(&x.c * &z);
    out.states.push(z.clone());
    for k in 0..steps {
        let eta = normal_vector(&mut rng, adm.directions.ncols());
        out.driving
            .push(&adm.feedback * &z + &adm.directions * &eta);
        let next = rk.step(&z, &eta);
        let scale = next.norm().max(1.0);
        out.max_drift = out
            .max_drift
            .max(vector_norm(&(&next - &proj * &next)) / scale);
        out.max_constraint_violation = out
            .max_constraint_violation
            .max(vector_norm(&(&x.h * &next)) / scale);
        z = &proj * next;
        out.times.push((k + 1) as f64 * dt);
        out.outputs.push(&x.c * &z);
        out.states.push(z.clone());
    }
    Ok(out)
}

/// Outcome of a single matching trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    /// Sup-norm of `w₁ − w₂` over the grid, relative to `1 + ‖z‖`.
    pub max_output_mismatch: f64,
    /// Largest distance of `(x₁, x₂)` from the relation before re-projection.
    pub max_relation_drift: f64,
    /// Largest `‖H₁x₁‖` or `‖H₂x₂‖`, relative to `1 + ‖z‖`.
    pub max_constraint_violation: f64,
    /// False when no matching input exists for some admissible move.
    pub feasible: bool,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct MatchingReport {
    pub trials: Vec<TrialResult>,
    pub passed: bool,
    pub max_output_mismatch: f64,
    pub max_relation_drift: f64,
    pub max_constraint_violation: f64,
    /// Residual of the least-squares matching problem.
    pub matching_residual: f64,
    pub config: TrajectoryConfig,
}

/// Gains `d₂ = L z + K η₁`, with `d₁ = F₁ x₁ + N₁ η₁`, keeping the pair in `S`.
struct MatchingLoop {
    closed: Matrix,
    excite: Matrix,
    excite_dim: usize,
    residual: f64,
}

fn matching_loop(
    x1: &ConstrainedSystem,
    x2: &ConstrainedSystem,
    relation: &Subspace,
    tol: &Tolerance,
) -> MatchingLoop {
    let (n1, n2) = (x1.state_dim(), x2.state_dim());
    let v1 = consistent_subspace(x1, tol);
    let first = admissible_inputs(&x1.a, &x1.g, &v1, tol);

    let a = block_diag(&[&x1.a, &x2.a]);
    let g1 = crate::subspace::vstack(&[&x1.g, &Matrix::zeros(n2, x1.driving_dim())]);
    let g2 = crate::subspace::vstack(&[&Matrix::zeros(n1, x2.driving_dim()), &x2.g]);
    let f1 = hstack(&[&first.feedback, &Matrix::zeros(x1.driving_dim(), n2)]);
    let driven = &a + &g1 * &f1;

    let perp = relation.complement_projector();
    let pg2 = &perp * &g2;
    let drift = &perp * &driven * relation.basis();
    let l = -lstsq(&pg2, &drift);
    let kick = &perp * &g1 * &first.directions;
    let k = -lstsq(&pg2, &kick);

    let scale = spectral_norm(&a).max(1.0);
    let residual = (spectral_norm(&(&drift + &pg2 * &l)) / scale)
        .max(spectral_norm(&(&kick + &pg2 * &k)))
        .max(first.residual);

    MatchingLoop {
        closed: &driven + &g2 * &l * relation.basis().transpose(),
        excite: &g1 * &first.directions + &g2 * &k,
        excite_dim: first.directions.ncols(),
        residual,
    }
}

fn run_trial(
    trial: usize,
    x1: &ConstrainedSystem,
    x2: &ConstrainedSystem,
    relation: &Subspace,
    lp: &MatchingLoop,
    rk: &Rk4Map,
    cfg: &TrajectoryConfig,
) -> TrialResult {
    let n1 = x1.state_dim();
    let n2 = x2.state_dim();
    let mut rng = rng_for(cfg.seed, trial as u64);
    let coeffs = normal_vector(&mut rng, relation.dim());
    let mut z = relation.basis() * coeffs;
    let proj = relation.projector();
    let c = hstack(&[&x1.c, &(-&x2.c)]);
    let h = block_diag(&[&x1.h, &x2.h]);

    let measure = |z: &DVector<f64>| {
        let scale = 1.0 + z.norm();
        (
            (&c * z).amax() / scale,
            (&h * z).iter().fold(0.0_f64, |m, v| m.max(v.abs())) / scale,
        )
    };
    let (mut mismatch, mut violation) = measure(&z);
    let mut drift = 0.0_f64;
    let feasible = lp.residual <= cfg.threshold;
    if feasible {
        for _ in 0..cfg.steps() {
            let eta = normal_vector(&mut rng, lp.excite_dim);
            let next = rk.step(&z, &eta);
            let (m, v) = measure(&next);
            mismatch = mismatch.max(m);
            violation = violation.max(v);
            drift = drift.max(vector_norm(&(&next - &proj * &next)) / (1.0 + next.norm()));
            z = &proj * next;
        }
    }
    debug_assert_eq!(z.len(), n1 + n2);
    let passed = feasible
        && mismatch <= cfg.threshold
        && violation <= cfg.threshold
        && drift <= cfg.threshold;
    TrialResult {
        trial,
        max_output_mismatch: mismatch,
        max_relation_drift: drift,
        max_constraint_violation: violation,
        feasible,
        passed,
    }
}

/// Samples pairs in `relation` and confirms that every sampled trajectory of
/// `x1` is matched by `x2` with identical outputs.
pub fn validate_by_trajectories(
    x1: &ConstrainedSystem,
    x2: &ConstrainedSystem,
    relation: &Subspace,
    cfg: &TrajectoryConfig,
    tol: &Tolerance,
) -> Result<MatchingReport> {
    let ambient = x1.state_dim() + x2.state_dim();
    if relation.ambient_dim() != ambient {
        return Err(Error::AmbientMismatch {
            left: relation.ambient_dim(),
            right: ambient,
        });
    }
    if x1.output_dim() != x2.output_dim() {
        return Err(Error::DimensionMismatch {
            context: "output dimensions of compared systems".into(),
            expected: x1.output_dim(),
            found: x2.output_dim(),
        });
    }
    let lp = matching_loop(x1, x2, relation, tol);
    let rk = Rk4Map::new(&lp.closed, &lp.excite, cfg.dt);
    let trials: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(t, x1, x2, relation, &lp, &rk, cfg))
        .collect();
    let worst = |f: fn(&TrialResult) -> f64| trials.iter().map(f).fold(0.0, f64::max);
    Ok(MatchingReport {
        passed: trials.iter().all(|t| t.passed),
        max_output_mismatch: worst(|t| t.max_output_mismatch),
        max_relation_drift: worst(|t| t.max_relation_drift),
        max_constraint_violation: worst(|t| t.max_constraint_violation),
        matching_residual: lp.residual,
        trials,
        config: *cfg,
    })
}
