//! Contract checks, each reduced to one or two simulation decisions.
//!
//! | check                       | reduces to                      |
//! |-----------------------------|---------------------------------|
//! | `compatible(E, C)`          | `E ≼ A`                         |
//! | `implements(Σ, C)`          | `A⋏Σ ≼ G`                       |
//! | `refines(C₁, C₂)`           | `A₂ ≼ A₁` and `A₂⋏G₁ ≼ G₂`      |
//! | `consistency_necessary(C)`  | `A ≼ Gᵘ`                        |
//! | `series_composable(C₁, C₂)` | `(A₁⋏G₁)ʸ ≼ A₂`                 |

use std::ops::Range;

use crate::error::{expect_dim, Error, Result};
use crate::interconnect::{ass_meet_gar, env_meet_sys, series_gar};
use crate::models::{
    restrict_output_u, restrict_output_y, AnySystem, ConstrainedSystem, Contract, DrivenSystem,
    Validate,
};
use crate::subspace::{
    factor_project, image, intersect, map, preimage, Matrix, Subspace, Tolerance,
};
use crate::verify::{simulated_by, SimulationReport};

/// One simulation premise `lhs ≼ rhs` and its outcome.
#[derive(Clone, Debug)]
pub struct SubCheck {
    pub name: String,
    pub lhs: ConstrainedSystem,
    pub rhs: ConstrainedSystem,
    pub report: SimulationReport,
}

#[derive(Clone, Debug)]
pub struct ContractReport {
    /// Conjunction of every sub-check.
    pub verdict: bool,
    pub checks: Vec<SubCheck>,
    /// Systems built on the way, such as `A⋏Σ`.
    pub constructed: Vec<(String, AnySystem)>,
}

impl ContractReport {
    fn new(checks: Vec<SubCheck>, constructed: Vec<(String, AnySystem)>) -> Self {
        Self {
            verdict: checks.iter().all(|c| c.report.holds),
            checks,
            constructed,
        }
    }

    pub fn check(&self, name: &str) -> Option<&SubCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn premise(
    name: &str,
    lhs: &ConstrainedSystem,
    rhs: &ConstrainedSystem,
    tol: &Tolerance,
) -> Result<SubCheck> {
    Ok(SubCheck {
        name: name.into(),
        lhs: lhs.clone(),
        rhs: rhs.clone(),
        report: simulated_by(lhs, rhs, tol)?,
    })
}

/// `E` is compatible with `C` when `E ≼ A`.
pub fn compatible(e: &ConstrainedSystem, c: &Contract, tol: &Tolerance) -> Result<ContractReport> {
    c.validate()?;
    expect_dim(
        "environment output dim vs assumption output dim",
        c.assumption.output_dim(),
        e.output_dim(),
    )?;
    Ok(ContractReport::new(
        vec![premise("E ≼ A", e, &c.assumption, tol)?],
        vec![],
    ))
}

/// `Σ` implements `C` when `A⋏Σ ≼ G`.
pub fn implements(s: &DrivenSystem, c: &Contract, tol: &Tolerance) -> Result<ContractReport> {
    c.validate()?;
    expect_dim(
        "system input dim vs contract u_dim",
        c.u_dim(),
        s.input_dim(),
    )?;
    expect_dim(
        "system output dim vs contract y_dim",
        c.y_dim(),
        s.output_dim(),
    )?;
    let closed = env_meet_sys(&c.assumption, s)?;
    let check = premise("A⋏Σ ≼ G", &closed.base, &c.guarantee.base, tol)?;
    Ok(ContractReport::new(
        vec![check],
        vec![("A⋏Σ".into(), closed.into())],
    ))
}

/// `C₁ ≼ C₂` when `A₂ ≼ A₁` and `A₂⋏G₁ ≼ G₂`.
pub fn refines(c1: &Contract, c2: &Contract, tol: &Tolerance) -> Result<ContractReport> {
    c1.validate()?;
    c2.validate()?;
    expect_dim("refinement u_dim", c2.u_dim(), c1.u_dim())?;
    expect_dim("refinement y_dim", c2.y_dim(), c1.y_dim())?;
    let meet = ass_meet_gar(&c2.assumption, &c1.guarantee)?;
    let checks = vec![
        premise("A₂ ≼ A₁", &c2.assumption, &c1.assumption, tol)?,
        premise("A₂⋏G₁ ≼ G₂", &meet.base, &c2.guarantee.base, tol)?,
    ];
    Ok(ContractReport::new(
        checks,
        vec![("A₂⋏G₁".into(), meet.into())],
    ))
}

/// `A ≼ Gᵘ`, necessary for the contract to have any implementation.
pub fn consistency_necessary(c: &Contract, tol: &Tolerance) -> Result<ContractReport> {
    c.validate()?;
    let gu = restrict_output_u(&c.guarantee);
    let check = premise("A ≼ Gᵘ", &c.assumption, &gu, tol)?;
    Ok(ContractReport::new(
        vec![check],
        vec![("Gᵘ".into(), gu.into())],
    ))
}

/// `C₁` is series composable to `C₂` when `(A₁⋏G₁)ʸ ≼ A₂`.
pub fn series_composable(c1: &Contract, c2: &Contract, tol: &Tolerance) -> Result<ContractReport> {
    c1.validate()?;
    c2.validate()?;
    expect_dim(
        "first contract y_dim vs second assumption output dim",
        c2.assumption.output_dim(),
        c1.y_dim(),
    )?;
    let meet = ass_meet_gar(&c1.assumption, &c1.guarantee)?;
    let meet_y = restrict_output_y(&meet);
    let check = premise("(A₁⋏G₁)ʸ ≼ A₂", &meet_y, &c2.assumption, tol)?;
    Ok(ContractReport::new(
        vec![check],
        vec![
            ("A₁⋏G₁".into(), meet.into()),
            ("(A₁⋏G₁)ʸ".into(), meet_y.into()),
        ],
    ))
}

/// `C₁→C₂ = (A₁, G₁→G₂)`, defined only for composable pairs.
pub fn series_compose(c1: &Contract, c2: &Contract, tol: &Tolerance) -> Result<Contract> {
    let mut report = series_composable(c1, c2, tol)?;
    if !report.verdict {
        let failing = report.checks.swap_remove(0).report;
        return Err(Error::NotComposable(Box::new(failing)));
    }
    Contract::new(
        c1.assumption.clone(),
        series_gar(&c1.guarantee, &c2.guarantee)?,
    )
}

/// `(A, A⋏G)`, a contract with the same implementations as `(A, G)`.
pub fn saturate(c: &Contract) -> Result<Contract> {
    c.validate()?;
    Contract::new(
        c.assumption.clone(),
        ass_meet_gar(&c.assumption, &c.guarantee)?,
    )
}

/// Matrix picking the listed coordinate blocks, in order, out of `ℝⁿ`.
pub fn block_selector(blocks: &[Range<usize>], ambient: usize) -> Matrix {
    let rows = blocks.iter().map(|b| b.len()).sum();
    let mut m = Matrix::zeros(rows, ambient);
    let mut i = 0;
    for b in blocks {
        for j in b.clone() {
            m[(i, j)] = 1.0;
            i += 1;
        }
    }
    m
}

/// Image of `s` under the selection of the listed coordinate blocks.
pub fn select_coordinates(
    s: &Subspace,
    blocks: &[Range<usize>],
    tol: &Tolerance,
) -> Result<Subspace> {
    map(&block_selector(blocks, s.ambient_dim()), s, tol)
}

/// Builds the subspace spanned by the columns returned by `f` for each basis
/// vector of `s`, together with `extra` spanning columns.
fn span_rows<F>(s: &Subspace, ambient: usize, extra: &[Matrix], f: F, tol: &Tolerance) -> Subspace
where
    F: Fn(&Matrix) -> Matrix,
{
    let mut cols = Vec::new();
    for j in 0..s.dim() {
        let b = s.basis().columns(j, 1).into_owned();
        cols.push(f(&b));
    }
    cols.extend(extra.iter().cloned());
    let mut m = Matrix::zeros(ambient, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, &c.column(0));
    }
    image(&m, tol)
}

/// `{(x_e, x, x_a, x) : (x_e, x_a) ∈ S_e}`, a full simulation relation of
/// `E⋏Σ` by `A⋏Σ` whenever `S_e` is one of `E` by `A`.
pub fn lift_environment_relation(
    s_e: &Subspace,
    env_dim: usize,
    assumption_dim: usize,
    plant_dim: usize,
    tol: &Tolerance,
) -> Subspace {
    let (ne, na, n) = (env_dim, assumption_dim, plant_dim);
    let ambient = ne + n + na + n;
    let shared: Vec<Matrix> = (0..n)
        .map(|i| {
            let mut v = Matrix::zeros(ambient, 1);
            v[(ne + i, 0)] = 1.0;
            v[(ne + n + na + i, 0)] = 1.0;
            v
        })
        .collect();
    span_rows(
        s_e,
        ambient,
        &shared,
        |b| {
            let mut v = Matrix::zeros(ambient, 1);
            v.view_mut((0, 0), (ne, 1)).copy_from(&b.rows(0, ne));
            v.view_mut((ne + n, 0), (na, 1)).copy_from(&b.rows(ne, na));
            v
        },
        tol,
    )
}

/// `{(x_a, x_g, x_g) : (x_a, x_g) ∈ 𝒱_{a⋏g}}`, a full simulation relation of
/// `A⋏G` by `G`.
pub fn saturation_relation(
    meet_consistent: &Subspace,
    assumption_dim: usize,
    guarantee_dim: usize,
    tol: &Tolerance,
) -> Subspace {
    let (na, ng) = (assumption_dim, guarantee_dim);
    span_rows(
        meet_consistent,
        na + 2 * ng,
        &[],
        |b| {
            let mut v = Matrix::zeros(na + 2 * ng, 1);
            v.view_mut((0, 0), (na + ng, 1)).copy_from(b);
            v.view_mut((na + ng, 0), (ng, 1)).copy_from(&b.rows(na, ng));
            v
        },
        tol,
    )
}

/// `{(x_a, x, x_a, x_g) : (x_a, x, x_g) ∈ S}`: turns a relation of `A⋏Σ` by
/// `G` into one of `A⋏Σ` by `A⋏G`.
pub fn saturated_implementation_relation(
    s: &Subspace,
    assumption_dim: usize,
    plant_dim: usize,
    guarantee_dim: usize,
    tol: &Tolerance,
) -> Subspace {
    let (na, n, ng) = (assumption_dim, plant_dim, guarantee_dim);
    let ambient = na + n + na + ng;
    span_rows(
        s,
        ambient,
        &[],
        |b| {
            let mut v = Matrix::zeros(ambient, 1);
            v.view_mut((0, 0), (na + n, 1))
                .copy_from(&b.rows(0, na + n));
            v.view_mut((na + n, 0), (na, 1)).copy_from(&b.rows(0, na));
            v.view_mut((na + n + na, 0), (ng, 1))
                .copy_from(&b.rows(na + n, ng));
            v
        },
        tol,
    )
}

/// State dimensions entering the series-composition witness.
#[derive(Clone, Copy, Debug)]
pub struct SeriesDims {
    pub assumption1: usize,
    pub plant1: usize,
    pub plant2: usize,
    pub guarantee1: usize,
    pub guarantee2: usize,
    pub assumption2: usize,
}

/// Relation of `A₁⋏(Σ₁→Σ₂)` by `G₁→G₂` assembled from
///
/// * `s1 ⊂ (x_a₁, x₁, x_g₁)`, a full relation of `A₁⋏Σ₁` by `G₁`,
/// * `r ⊂ (x_a₁, x₁, x_a₂)`, a full relation of `(A₁⋏Σ₁)ʸ` by `A₂`,
/// * `s2 ⊂ (x_a₂, x₂, x_g₂)`, a full relation of `A₂⋏Σ₂` by `G₂`,
///
/// as the set of `(x_a₁, x₁, x₂, x_g₁, x_g₂)` for which some `x_a₂` makes all
/// three memberships hold.
pub fn series_relation(
    s1: &Subspace,
    r: &Subspace,
    s2: &Subspace,
    d: SeriesDims,
    tol: &Tolerance,
) -> Result<Subspace> {
    // Working coordinates: (x_a1, x1, x2, x_g1, x_g2, x_a2).
    let mut at = 0;
    let mut block = |len: usize| {
        let b = at..at + len;
        at += len;
        b
    };
    let a1 = block(d.assumption1);
    let p1 = block(d.plant1);
    let p2 = block(d.plant2);
    let g1 = block(d.guarantee1);
    let g2 = block(d.guarantee2);
    let a2 = block(d.assumption2);
    let ambient = at;

    let lift =
        |s: &Subspace, blocks: &[Range<usize>]| preimage(&block_selector(blocks, ambient), s, tol);
    let on_s1 = lift(s1, &[a1.clone(), p1.clone(), g1.clone()])?;
    let on_r = lift(r, &[a1.clone(), p1.clone(), a2.clone()])?;
    let on_s2 = lift(s2, &[a2.clone(), p2.clone(), g2.clone()])?;
    let joint = intersect(&intersect(&on_s1, &on_r, tol)?, &on_s2, tol)?;
    factor_project(&joint, 0..a2.start, tol)
}
