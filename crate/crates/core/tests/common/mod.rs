//! Random small-integer systems and behaviour-preserving constructions.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simcontract::interconnect::env_meet_sys;
use simcontract::subspace::{block_diag, hstack, vstack};
use simcontract::{ConstrainedSystem, Contract, DrivenSystem, GuaranteeSystem, Matrix};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn m(rows: usize, cols: usize, v: &[f64]) -> Matrix {
    Matrix::from_row_slice(rows, cols, v)
}

/// Entries in `-bound..=bound`, each nonzero with probability `density`.
pub fn int_matrix(rows: usize, cols: usize, bound: i32, density: f64, r: &mut TestRng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        if r.random_bool(density) {
            f64::from(r.random_range(-bound..=bound))
        } else {
            0.0
        }
    })
}

pub fn random_constrained(n_max: usize, p: usize, r: &mut TestRng) -> ConstrainedSystem {
    let n = r.random_range(1..=n_max);
    let s = r.random_range(0..=n.min(2));
    let q = usize::from(r.random_bool(0.4));
    ConstrainedSystem::new(
        int_matrix(n, n, 2, 0.5, r),
        int_matrix(n, s, 1, 0.7, r),
        int_matrix(p, n, 1, 0.6, r),
        int_matrix(q, n, 1, 0.6, r),
    )
    .unwrap()
}

pub fn random_driven(n_max: usize, m_in: usize, p: usize, r: &mut TestRng) -> DrivenSystem {
    let n = r.random_range(1..=n_max);
    let s = r.random_range(0..=1);
    DrivenSystem::new(
        int_matrix(n, n, 2, 0.5, r),
        int_matrix(n, m_in, 1, 0.7, r),
        int_matrix(p, n, 1, 0.7, r),
        int_matrix(n, s, 1, 0.7, r),
    )
    .unwrap()
}

/// Unit lower-triangular integer matrix and its (integer) inverse.
pub fn unimodular(n: usize, r: &mut TestRng) -> (Matrix, Matrix) {
    let mut t = Matrix::identity(n, n);
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = f64::from(r.random_range(-1..=1));
        }
    }
    let inv = t
        .clone()
        .try_inverse()
        .expect("unit triangular")
        .map(f64::round);
    (t, inv)
}

/// `x ↦ Tx`.
pub fn recoordinate(x: &ConstrainedSystem, r: &mut TestRng) -> ConstrainedSystem {
    let (t, ti) = unimodular(x.state_dim(), r);
    ConstrainedSystem::new(&t * &x.a * &ti, &t * &x.g, &x.c * &ti, &x.h * &ti).unwrap()
}

pub fn recoordinate_driven(s: &DrivenSystem, r: &mut TestRng) -> DrivenSystem {
    let (t, ti) = unimodular(s.state_dim(), r);
    DrivenSystem::new(&t * &s.a * &ti, &t * &s.b, &s.c * &ti, &t * &s.g).unwrap()
}

/// Appends `k` states driven by the original ones and invisible in the
/// output and constraint.
pub fn hide_states(x: &ConstrainedSystem, k: usize, r: &mut TestRng) -> ConstrainedSystem {
    let n = x.state_dim();
    let mut a = block_diag(&[&x.a, &int_matrix(k, k, 1, 0.5, r)]);
    a.view_mut((n, 0), (k, n))
        .copy_from(&int_matrix(k, n, 1, 0.6, r));
    let mut g = block_diag(&[&x.g, &Matrix::identity(k, k)]);
    g.view_mut((n, 0), (k, x.driving_dim()))
        .copy_from(&int_matrix(k, x.driving_dim(), 1, 0.5, r));
    ConstrainedSystem::new(
        a,
        g,
        hstack(&[&x.c, &Matrix::zeros(x.output_dim(), k)]),
        hstack(&[&x.h, &Matrix::zeros(x.constraint_rows(), k)]),
    )
    .unwrap()
}

pub fn hide_states_driven(s: &DrivenSystem, k: usize, r: &mut TestRng) -> DrivenSystem {
    let n = s.state_dim();
    let mut a = block_diag(&[&s.a, &int_matrix(k, k, 1, 0.5, r)]);
    a.view_mut((n, 0), (k, n))
        .copy_from(&int_matrix(k, n, 1, 0.6, r));
    DrivenSystem::new(
        a,
        vstack(&[&s.b, &int_matrix(k, s.input_dim(), 1, 0.6, r)]),
        hstack(&[&s.c, &Matrix::zeros(s.output_dim(), k)]),
        vstack(&[&s.g, &Matrix::zeros(k, s.driving_dim())]),
    )
    .unwrap()
}

/// One more driving column: more behaviour.
pub fn extra_driving(x: &ConstrainedSystem, r: &mut TestRng) -> ConstrainedSystem {
    let col = int_matrix(x.state_dim(), 1, 1, 0.8, r);
    ConstrainedSystem::new(x.a.clone(), hstack(&[&x.g, &col]), x.c.clone(), x.h.clone()).unwrap()
}

/// One more constraint row: less behaviour.
pub fn extra_constraint(x: &ConstrainedSystem, r: &mut TestRng) -> ConstrainedSystem {
    let row = int_matrix(1, x.state_dim(), 1, 0.8, r);
    ConstrainedSystem::new(x.a.clone(), x.g.clone(), x.c.clone(), vstack(&[&x.h, &row])).unwrap()
}

/// No driving at all: a single deterministic behaviour per initial state.
pub fn undriven(x: &ConstrainedSystem) -> ConstrainedSystem {
    let n = x.state_dim();
    ConstrainedSystem::new(x.a.clone(), Matrix::zeros(n, 0), x.c.clone(), x.h.clone()).unwrap()
}

pub fn guarantee_like(base: ConstrainedSystem, g: &GuaranteeSystem) -> GuaranteeSystem {
    GuaranteeSystem::new(base, g.u_dim, g.y_dim).unwrap()
}

/// A guarantee with at least the behaviour of `g`.
pub fn weaken(g: &GuaranteeSystem, r: &mut TestRng) -> GuaranteeSystem {
    let base = hide_states(&g.base, 1, r);
    let base = if r.random_bool(0.5) {
        extra_driving(&base, r)
    } else {
        base
    };
    guarantee_like(recoordinate(&base, r), g)
}

/// `ẋ = d`, `u = x` in dimension `k`: any output signal.
pub fn free(k: usize) -> ConstrainedSystem {
    ConstrainedSystem::unconstrained(
        Matrix::zeros(k, k),
        Matrix::identity(k, k),
        Matrix::identity(k, k),
    )
    .unwrap()
}

/// `ẋ = 0`, `w = x`.
pub fn frozen() -> ConstrainedSystem {
    ConstrainedSystem::unconstrained(m(1, 1, &[0.0]), Matrix::zeros(1, 0), m(1, 1, &[1.0])).unwrap()
}

/// `ẋ₁ = x₂`, `ẋ₂ = −x₁`, `w = x₁`.
pub fn oscillator() -> ConstrainedSystem {
    ConstrainedSystem::unconstrained(
        m(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        Matrix::zeros(2, 0),
        m(1, 2, &[1.0, 0.0]),
    )
    .unwrap()
}

/// Single-integrator guarantee: `ẋ₁ = d`, `ẋ₂ = x₁`, `u = x₁`, `y = x₂`.
pub fn integrator_guarantee() -> GuaranteeSystem {
    GuaranteeSystem::from_blocks(
        m(2, 2, &[0.0, 0.0, 1.0, 0.0]),
        m(2, 1, &[1.0, 0.0]),
        m(1, 2, &[1.0, 0.0]),
        m(1, 2, &[0.0, 1.0]),
        Matrix::zeros(0, 2),
    )
    .unwrap()
}

/// `ẋ₁ = d`, `ẋ₂ = x₁`, `ẋ₃ = x₂`, `u = x₁`, `y = x₃`: `ÿ = u`.
pub fn double_integrator_guarantee() -> GuaranteeSystem {
    GuaranteeSystem::from_blocks(
        m(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        m(3, 1, &[1.0, 0.0, 0.0]),
        m(1, 3, &[1.0, 0.0, 0.0]),
        m(1, 3, &[0.0, 0.0, 1.0]),
        Matrix::zeros(0, 3),
    )
    .unwrap()
}

pub fn example_contract() -> Contract {
    Contract::new(free(1), integrator_guarantee()).unwrap()
}

/// `ẋ = u`, `y = x`.
pub fn integrator_plant() -> DrivenSystem {
    DrivenSystem::new(
        m(1, 1, &[0.0]),
        m(1, 1, &[1.0]),
        m(1, 1, &[1.0]),
        Matrix::zeros(1, 0),
    )
    .unwrap()
}

/// Contract `(A, A⋏Σ)` with a weakened guarantee, so `Σ` implements it.
pub fn contract_for(a: &ConstrainedSystem, s: &DrivenSystem, r: &mut TestRng) -> Contract {
    let g = env_meet_sys(a, s).unwrap();
    Contract::new(a.clone(), weaken(&g, r)).unwrap()
}

/// Environments simulated by `a`, each by construction.
pub fn environments_of(a: &ConstrainedSystem, r: &mut TestRng) -> Vec<ConstrainedSystem> {
    let hidden = hide_states(a, 1, r);
    let moved = recoordinate(a, r);
    let constrained = extra_constraint(a, r);
    let mixed = recoordinate(&extra_constraint(&hide_states(a, 2, r), r), r);
    vec![a.clone(), moved, constrained, hidden, undriven(a), mixed]
}

/// Plants with the same output behaviour as `s`.
pub fn implementations_like(s: &DrivenSystem, r: &mut TestRng) -> Vec<DrivenSystem> {
    let moved = recoordinate_driven(s, r);
    let hidden = hide_states_driven(s, 1, r);
    let both = recoordinate_driven(&hide_states_driven(s, 2, r), r);
    vec![s.clone(), moved, hidden, both]
}
