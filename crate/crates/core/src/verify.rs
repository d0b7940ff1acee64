//! Consistent subspaces, largest simulation relations and relation checks.
//!
//! The largest simulation relation of `Ξ₁` by `Ξ₂` is the fixed point of
//!
//! ```text
//! S₀      = (𝒱₁ × 𝒱₂) ∩ ker [C₁ −C₂]
//! S_{k+1} = S_k ∩ diag(A₁, A₂)⁻¹ (S_k + im diag(G₁, G₂))
//! ```
//!
//! followed by a single state-independent check that every admissible
//! direction of `Ξ₁` can be matched:
//! `(𝒱₁ ∩ im G₁) × {0} ⊂ S∞ + {0} × im G₂`. That condition is monotone in
//! the relation, so testing it on the maximal fixed point decides existence.

use std::fmt;

use crate::error::{expect_dim, Error, Result};
use crate::models::{ConstrainedSystem, Validate};
use crate::subspace::{
    block_diag, contains, factor_project, hstack, image, inclusion_residual, intersect, kernel,
    preimage, spectral_norm, sum, Matrix, Subspace, Tolerance,
};

/// Consistent subspace together with the dimensions visited by the recursion.
#[derive(Clone, Debug)]
pub struct ConsistentSubspace {
    pub subspace: Subspace,
    /// `dim V₀, dim V₁, …`, ending with the fixed-point dimension twice.
    pub dims: Vec<usize>,
}

/// Largest `(A, G)`-invariant subspace contained in `ker H`.
pub fn consistent_subspace(x: &ConstrainedSystem, tol: &Tolerance) -> Subspace {
    consistent_subspace_traced(x, tol).subspace
}

pub fn consistent_subspace_traced(x: &ConstrainedSystem, tol: &Tolerance) -> ConsistentSubspace {
    let img_g = image(&x.g, tol);
    let (subspace, dims) = invariant_fixed_point(kernel(&x.h, tol), &x.a, &img_g, tol);
    ConsistentSubspace { subspace, dims }
}

/// Decreasing iteration `W ← W ∩ A⁻¹(W + R)` until the dimension stalls.
fn invariant_fixed_point(
    start: Subspace,
    a: &Matrix,
    range: &Subspace,
    tol: &Tolerance,
) -> (Subspace, Vec<usize>) {
    let mut current = start;
    let mut dims = vec![current.dim()];
    loop {
        let target = sum(&current, range, tol).expect("ambient dims agree");
        let pre = preimage(a, &target, tol).expect("square dynamics");
        let next = intersect(&current, &pre, tol).expect("ambient dims agree");
        dims.push(next.dim());
        let stalled = next.dim() >= current.dim();
        current = next;
        if stalled {
            return (current, dims);
        }
    }
}

/// Verdict and witness of a simulation check.
#[derive(Clone, Debug)]
pub struct SimulationReport {
    /// `full ∧ side_condition_ok`.
    pub holds: bool,
    /// The largest relation `S∞ ⊂ 𝒳₁ × 𝒳₂`, returned even when `holds` is false.
    pub relation: Subspace,
    /// `π₁(S∞) = 𝒱₁`.
    pub full: bool,
    pub side_condition_ok: bool,
    pub iterations: usize,
    pub v1_dim: usize,
    pub v2_dim: usize,
    pub relation_dim: usize,
    /// `dim π₁(S∞)`.
    pub projected_dim: usize,
    /// Dimensions of `S₀, S₁, …`.
    pub relation_dims: Vec<usize>,
    pub tolerance: Tolerance,
}

impl SimulationReport {
    /// `dim 𝒱₁ − dim π₁(S∞)`; zero exactly when the relation is full.
    pub fn fullness_gap(&self) -> usize {
        self.v1_dim.saturating_sub(self.projected_dim)
    }
}

fn output_match_map(x1: &ConstrainedSystem, x2: &ConstrainedSystem) -> Matrix {
    hstack(&[&x1.c, &(-&x2.c)])
}

fn check_pair(x1: &ConstrainedSystem, x2: &ConstrainedSystem) -> Result<()> {
    x1.validate()?;
    x2.validate()?;
    expect_dim(
        "output dimensions of compared systems",
        x1.output_dim(),
        x2.output_dim(),
    )
}

/// `(𝒱₁ ∩ im G₁) × {0} ⊂ S + {0} × im G₂`.
fn side_condition(
    v1: &Subspace,
    x1: &ConstrainedSystem,
    x2: &ConstrainedSystem,
    s: &Subspace,
    tol: &Tolerance,
) -> (bool, f64) {
    let (n1, n2) = (x1.state_dim(), x2.state_dim());
    let moves = intersect(v1, &image(&x1.g, tol), tol).expect("same ambient");
    let lhs = moves.product(&Subspace::zero(n2));
    let absorb = Subspace::zero(n1).product(&image(&x2.g, tol));
    let rhs = sum(s, &absorb, tol).expect("same ambient");
    let residual = inclusion_residual(&rhs, &lhs);
    (residual <= tol.inclusion, residual)
}

/// Largest simulation relation of `x1` by `x2` and the resulting verdict.
pub fn largest_simulation_relation(
    x1: &ConstrainedSystem,
    x2: &ConstrainedSystem,
    tol: &Tolerance,
) -> Result<SimulationReport> {
    check_pair(x1, x2)?;
    let n1 = x1.state_dim();
    let v1 = consistent_subspace(x1, tol);
    let v2 = consistent_subspace(x2, tol);

    let matched = kernel(&output_match_map(x1, x2), tol);
    let start = intersect(&v1.product(&v2), &matched, tol)?;
    let a = block_diag(&[&x1.a, &x2.a]);
    let g = image(&block_diag(&[&x1.g, &x2.g]), tol);
    let (relation, relation_dims) = invariant_fixed_point(start, &a, &g, tol);

    let (side_condition_ok, _) = side_condition(&v1, x1, x2, &relation, tol);
    let projected = factor_project(&relation, 0..n1, tol)?;
    let full = contains(&projected, &v1, tol);
    Ok(SimulationReport {
        holds: full && side_condition_ok,
        full,
        side_condition_ok,
        iterations: relation_dims.len() - 1,
        v1_dim: v1.dim(),
        v2_dim: v2.dim(),
        relation_dim: relation.dim(),
        projected_dim: projected.dim(),
        relation,
        relation_dims,
        tolerance: *tol,
    })
}

/// Decides `x1 ≼ x2`.
pub fn simulated_by(
    x1: &ConstrainedSystem,
    x2: &ConstrainedSystem,
    tol: &Tolerance,
) -> Result<SimulationReport> {
    largest_simulation_relation(x1, x2, tol)
}

/// Mutual simulation with both witnesses.
#[derive(Clone, Debug)]
pub struct Bisimulation {
    pub holds: bool,
    pub forward: SimulationReport,
    pub backward: SimulationReport,
}

pub fn bisimilar(
    x1: &ConstrainedSystem,
    x2: &ConstrainedSystem,
    tol: &Tolerance,
) -> Result<Bisimulation> {
    let forward = simulated_by(x1, x2, tol)?;
    let backward = simulated_by(x2, x1, tol)?;
    Ok(Bisimulation {
        holds: forward.holds && backward.holds,
        forward,
        backward,
    })
}

/// The individual conditions of a simulation relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationCondition {
    FirstProjection,
    SecondProjection,
    OutputRows,
    Invariance,
    SideCondition,
    Fullness,
}

impl fmt::Display for RelationCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationCondition::FirstProjection => "first projection outside consistent subspace",
            RelationCondition::SecondProjection => "second projection outside consistent subspace",
            RelationCondition::OutputRows => "output rows",
            RelationCondition::Invariance => "invariance",
            RelationCondition::SideCondition => "side condition",
            RelationCondition::Fullness => "fullness",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub condition: RelationCondition,
    pub residual: f64,
}

/// Outcome of [`check_relation`].
#[derive(Clone, Debug, Default)]
pub struct RelationCheck {
    pub violations: Vec<Violation>,
}

impl RelationCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn failed(&self, condition: RelationCondition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }

    fn record(&mut self, condition: RelationCondition, ok: bool, residual: f64) {
        if !ok {
            self.violations.push(Violation {
                condition,
                residual,
            });
        }
    }
}

impl fmt::Display for RelationCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{} (residual {:.3e})", v.condition, v.residual))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

/// `‖M Sb‖` measured against the scale of `M`.
fn scaled_residual(m: &Matrix, basis: &Matrix) -> f64 {
    spectral_norm(&(m * basis)) / spectral_norm(m).max(1.0)
}

/// Checks whether `s` is a simulation relation of `x1` by `x2`, and optionally
/// whether it is full.
pub fn check_relation(
    s: &Subspace,
    x1: &ConstrainedSystem,
    x2: &ConstrainedSystem,
    require_full: bool,
    tol: &Tolerance,
) -> Result<RelationCheck> {
    check_pair(x1, x2)?;
    let (n1, n2) = (x1.state_dim(), x2.state_dim());
    if s.ambient_dim() != n1 + n2 {
        return Err(Error::AmbientMismatch {
            left: s.ambient_dim(),
            right: n1 + n2,
        });
    }
    let mut out = RelationCheck::default();
    let basis = s.basis();

    let a = block_diag(&[&x1.a, &x2.a]);
    let reach = sum(s, &image(&block_diag(&[&x1.g, &x2.g]), tol), tol)?;
    let drift = reach.complement_projector() * &a;
    let inv = spectral_norm(&(&drift * basis)) / spectral_norm(&a).max(1.0);
    let invariant = inv <= tol.inclusion;
    out.record(RelationCondition::Invariance, invariant, inv);

    let out_res = scaled_residual(&output_match_map(x1, x2), basis);
    out.record(
        RelationCondition::OutputRows,
        out_res <= tol.inclusion,
        out_res,
    );

    let p1 = factor_project(s, 0..n1, tol)?;
    let p2 = factor_project(s, n1..n1 + n2, tol)?;
    let v1 = consistent_subspace(x1, tol);
    for (cond, x, p) in [
        (RelationCondition::FirstProjection, x1, &p1),
        (RelationCondition::SecondProjection, x2, &p2),
    ] {
        // Under invariance, π(S) ⊂ 𝒱 reduces to π(S) ⊂ ker H.
        let residual = if invariant {
            scaled_residual(&x.h, p.basis())
        } else {
            inclusion_residual(&consistent_subspace(x, tol), p)
        };
        out.record(cond, residual <= tol.inclusion, residual);
    }

    let (side_ok, side_res) = side_condition(&v1, x1, x2, s, tol);
    out.record(RelationCondition::SideCondition, side_ok, side_res);

    if require_full {
        let gap = inclusion_residual(&p1, &v1);
        out.record(RelationCondition::Fullness, gap <= tol.inclusion, gap);
    }
    Ok(out)
}
