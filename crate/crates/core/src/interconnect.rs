//! Block-matrix builders for the four interconnections.
//!
//! Every constructor returns a fresh, validated system. State vectors are
//! stacked in argument order.

use crate::error::{expect_dim, Result};
use crate::models::{ConstrainedSystem, DrivenSystem, GuaranteeSystem, Validate};
use crate::subspace::{block_diag, hstack, vstack, Matrix};

fn lower_coupled(top_left: &Matrix, coupling: &Matrix, bottom_right: &Matrix) -> Matrix {
    let (n1, n2) = (top_left.nrows(), bottom_right.nrows());
    let mut out = block_diag(&[top_left, bottom_right]);
    out.view_mut((n1, 0), (n2, n1)).copy_from(coupling);
    out
}

/// `E⋏Σ`: the environment output drives the system input.
///
/// State `(x_e, x)`, outputs `u = C_e x_e` then `y = C x`, constraint `[H_e 0]`.
pub fn env_meet_sys(e: &ConstrainedSystem, s: &DrivenSystem) -> Result<GuaranteeSystem> {
    e.validate()?;
    s.validate()?;
    expect_dim(
        "environment output dim vs system input dim",
        s.input_dim(),
        e.output_dim(),
    )?;
    let (ne, n) = (e.state_dim(), s.state_dim());
    let a = lower_coupled(&e.a, &(&s.b * &e.c), &s.a);
    let g = block_diag(&[&e.g, &s.g]);
    let c = block_diag(&[&e.c, &s.c]);
    let h = hstack(&[&e.h, &Matrix::zeros(e.constraint_rows(), n)]);
    debug_assert_eq!(a.nrows(), ne + n);
    GuaranteeSystem::new(
        ConstrainedSystem::new(a, g, c, h)?,
        e.output_dim(),
        s.output_dim(),
    )
}

/// `A⋏G`: the assumption output is equated with the guarantee's `u` block.
///
/// State `(x_a, x_g)`, outputs `u = C_a x_a` then `y = Cʸ x_g`, constraint
/// `[H_a 0; 0 H_g; C_a −Cᵘ]`.
pub fn ass_meet_gar(a: &ConstrainedSystem, g: &GuaranteeSystem) -> Result<GuaranteeSystem> {
    a.validate()?;
    g.validate()?;
    expect_dim(
        "assumption output dim vs guarantee u_dim",
        g.u_dim,
        a.output_dim(),
    )?;
    let (na, ng) = (a.state_dim(), g.state_dim());
    let dyn_a = block_diag(&[&a.a, &g.base.a]);
    let dyn_g = block_diag(&[&a.g, &g.base.g]);
    let c = block_diag(&[&a.c, &g.cy()]);
    let h = vstack(&[
        &hstack(&[&a.h, &Matrix::zeros(a.constraint_rows(), ng)]),
        &hstack(&[&Matrix::zeros(g.base.constraint_rows(), na), &g.base.h]),
        &hstack(&[&a.c, &(-g.cu())]),
    ]);
    GuaranteeSystem::new(
        ConstrainedSystem::new(dyn_a, dyn_g, c, h)?,
        g.u_dim,
        g.y_dim,
    )
}

/// `Σ₁→Σ₂`: the output of the first system drives the second.
pub fn series_sigma(s1: &DrivenSystem, s2: &DrivenSystem) -> Result<DrivenSystem> {
    s1.validate()?;
    s2.validate()?;
    expect_dim(
        "first system output dim vs second system input dim",
        s2.input_dim(),
        s1.output_dim(),
    )?;
    let n1 = s1.state_dim();
    let n2 = s2.state_dim();
    let a = lower_coupled(&s1.a, &(&s2.b * &s1.c), &s2.a);
    let b = vstack(&[&s1.b, &Matrix::zeros(n2, s1.input_dim())]);
    let g = block_diag(&[&s1.g, &s2.g]);
    let c = hstack(&[&Matrix::zeros(s2.output_dim(), n1), &s2.c]);
    DrivenSystem::new(a, b, c, g)
}

/// `G₁→G₂`: the `y` output of the first guarantee is equated with the `u`
/// output of the second.
///
/// Outputs `u = Cᵘ₁ x₁` then `y = Cʸ₂ x₂`, constraint `[H₁ 0; 0 H₂; Cʸ₁ −Cᵘ₂]`.
pub fn series_gar(g1: &GuaranteeSystem, g2: &GuaranteeSystem) -> Result<GuaranteeSystem> {
    g1.validate()?;
    g2.validate()?;
    expect_dim(
        "first guarantee y_dim vs second guarantee u_dim",
        g2.u_dim,
        g1.y_dim,
    )?;
    let (n1, n2) = (g1.state_dim(), g2.state_dim());
    let a = block_diag(&[&g1.base.a, &g2.base.a]);
    let g = block_diag(&[&g1.base.g, &g2.base.g]);
    let c = block_diag(&[&g1.cu(), &g2.cy()]);
    let h = vstack(&[
        &hstack(&[&g1.base.h, &Matrix::zeros(g1.base.constraint_rows(), n2)]),
        &hstack(&[&Matrix::zeros(g2.base.constraint_rows(), n1), &g2.base.h]),
        &hstack(&[&g1.cy(), &(-g2.cu())]),
    ]);
    GuaranteeSystem::new(ConstrainedSystem::new(a, g, c, h)?, g1.u_dim, g2.y_dim)
}
