//! Random-point check of the one-step matching conditions: at sampled
//! `(x₁, x₂) ∈ S` and for a random admissible `d₁`, some `d₂` keeps the next
//! velocity pair in `S`, and the outputs agree.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::lstsq;
use crate::models::ConstrainedSystem;
use crate::subspace::{kernel, spectral_norm, vstack, Matrix, Subspace, Tolerance};
use crate::verify::consistent_subspace;

fn column(v: DVector<f64>) -> Matrix {
    Matrix::from_column_slice(v.len(), 1, v.as_slice())
}

fn normal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    column(DVector::from_fn(n, |_, _| StandardNormal.sample(rng)))
}

/// True iff every sample satisfies both matching conditions.
pub fn pointwise_prop1_check(
    s: &Subspace,
    x1: &ConstrainedSystem,
    x2: &ConstrainedSystem,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> bool {
    let (n1, n2) = (x1.state_dim(), x2.state_dim());
    if s.ambient_dim() != n1 + n2 || x1.output_dim() != x2.output_dim() {
        return false;
    }
    let v1 = consistent_subspace(x1, tol);
    let v2 = consistent_subspace(x2, tol);
    let perp1 = v1.complement_projector();
    let free_d1 = kernel(&(&perp1 * &x1.g), tol);
    let g2 = vstack(&[&Matrix::zeros(n1, x2.driving_dim()), &x2.g]);
    let perp_s = s.complement_projector();
    let pg2 = &perp_s * &g2;
    let a_scale = spectral_norm(&x1.a).max(spectral_norm(&x2.a)).max(1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).all(|_| {
        let z = s.basis() * normal(&mut rng, s.dim());
        let scale = (1.0 + z.norm()) * a_scale;
        let p1 = z.rows(0, n1).into_owned();
        let p2 = z.rows(n1, n2).into_owned();
        if v1.residual(&p1) > tol.inclusion * scale || v2.residual(&p2) > tol.inclusion * scale {
            return false;
        }

        // Some admissible d₁, shifted by a random free direction.
        let drift1 = &perp1 * &x1.a * &p1;
        let d1_base = -lstsq(&(&perp1 * &x1.g), &drift1);
        let next1_res = (&drift1 + &perp1 * &x1.g * &d1_base).norm();
        if next1_res > tol.inclusion * scale {
            return false;
        }
        let d1 = d1_base + free_d1.basis() * normal(&mut rng, free_d1.dim());

        let next = vstack(&[&(&x1.a * &p1 + &x1.g * &d1), &(&x2.a * &p2)]);
        let miss = &perp_s * &next;
        let d2 = -lstsq(&pg2, &miss);
        let matched = (&miss + &pg2 * &d2).norm() <= tol.inclusion * scale;
        let outputs = (&x1.c * &p1 - &x2.c * &p2).norm() <= tol.inclusion * scale;
        matched && outputs
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interconnect::ass_meet_gar;
    use crate::models::fixtures::*;
    use crate::models::restrict_output_y;
    use crate::subspace::image;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn diagonal_on_identical_systems() {
        let x = integrator_guarantee().base;
        let diag = image(
            &vstack(&[&Matrix::identity(2, 2), &Matrix::identity(2, 2)]),
            &tol(),
        );
        assert!(pointwise_prop1_check(&diag, &x, &x, 50, 1, &tol()));
    }

    #[test]
    fn example_relation_passes() {
        let ag = ass_meet_gar(&free_assumption(), &integrator_guarantee()).unwrap();
        let ay = restrict_output_y(&ag);
        let rel = image(&m(4, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]), &tol());
        assert!(pointwise_prop1_check(
            &rel,
            &ay,
            &free_assumption(),
            100,
            7,
            &tol()
        ));
    }

    #[test]
    fn output_mismatch_fails() {
        let x = integrator_guarantee().base;
        let bad = image(&m(4, 1, &[1.0, 0.0, 0.0, 0.0]), &tol());
        assert!(!pointwise_prop1_check(&bad, &x, &x, 20, 3, &tol()));
    }
}
