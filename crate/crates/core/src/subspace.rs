//! Rank-revealing subspace algebra over real matrices.
//!
//! A [`Subspace`] is stored as an orthonormal basis matrix whose row count is
//! the ambient dimension. The zero subspace has a basis with no columns, and
//! matrices with zero rows or zero columns are accepted everywhere.
//!
//! Rank decisions use singular values with the relative cutoff
//! `rank_rel * scale * max(rows, cols)`. For derived matrices such as
//! `P_{W⊥} M` the scale is taken from the original operand `M`, so that a
//! product which vanishes up to round-off is not mistaken for a full-rank one.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Cutoffs for rank and inclusion decisions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value cutoff.
    pub rank_rel: f64,
    /// Spectral-norm cutoff on inclusion residuals.
    pub inclusion: f64,
}

impl Tolerance {
    pub const DEFAULT_RANK_REL: f64 = 1e-10;
    pub const DEFAULT_INCLUSION: f64 = 1e-8;

    pub fn new(rank_rel: f64, inclusion: f64) -> Result<Self> {
        for (name, v) in [("rank_rel", rank_rel), ("inclusion", inclusion)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(Self {
            rank_rel,
            inclusion,
        })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: Self::DEFAULT_RANK_REL,
            inclusion: Self::DEFAULT_INCLUSION,
        }
    }
}

/// A linear subspace of `ℝⁿ` with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// The subspace `{0} ⊂ ℝⁿ`.
    pub fn zero(ambient: usize) -> Self {
        Self {
            basis: Matrix::zeros(ambient, 0),
        }
    }

    /// The whole space `ℝⁿ`.
    pub fn full(ambient: usize) -> Self {
        Self {
            basis: Matrix::identity(ambient, ambient),
        }
    }

    /// Column span of an arbitrary spanning set.
    pub fn spanned_by(spanning: &Matrix, tol: &Tolerance) -> Self {
        image(spanning, tol)
    }

    fn from_orthonormal(basis: Matrix) -> Self {
        Self { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    /// Orthogonal projector onto the orthogonal complement.
    pub fn complement_projector(&self) -> Matrix {
        let n = self.ambient_dim();
        Matrix::identity(n, n) - self.projector()
    }

    pub fn orthogonal_complement(&self) -> Self {
        Self::from_orthonormal(complement_basis(&self.basis))
    }

    /// Euclidean distance from `v` to the subspace.
    pub fn residual(&self, v: &Matrix) -> f64 {
        let r = v - &self.basis * (self.basis.transpose() * v);
        spectral_norm(&r)
    }

    pub fn contains_vector(&self, v: &Matrix, tol: &Tolerance) -> bool {
        self.residual(v) <= tol.inclusion
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &Matrix) -> Matrix {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Mutual containment.
    pub fn equals(&self, other: &Subspace, tol: &Tolerance) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && contains(self, other, tol)
            && contains(other, self, tol)
    }

    /// Cartesian product `self × other` in the stacked coordinates.
    pub fn product(&self, other: &Subspace) -> Self {
        Self::from_orthonormal(block_diag(&[&self.basis, &other.basis]))
    }
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    thin_svd(m).sigma.iter().fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Thin singular value decomposition `m = U diag(σ) Vᵀ`.
pub(crate) struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

pub(crate) fn thin_svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Svd {
            u: Matrix::zeros(rows, 0),
            sigma: Vec::new(),
            v: Matrix::zeros(cols, 0),
        };
    }
    let f = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let svd = f.thin_svd().expect("singular value iteration converges");
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    Svd {
        u: Matrix::from_fn(rows, k, |i, j| u[(i, j)]),
        sigma: (0..k).map(|j| s[j]).collect(),
        v: Matrix::from_fn(cols, k, |i, j| v[(i, j)]),
    }
}

/// Block-diagonal matrix of the given blocks; zero-sized blocks are allowed.
pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// `[l, r]`; both operands must have the same row count.
pub fn hstack(blocks: &[&Matrix]) -> Matrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// `[t; b]`; both operands must have the same column count.
pub fn vstack(blocks: &[&Matrix]) -> Matrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

/// Orthonormal basis of the column span, with rank decided relative to `scale`.
fn column_basis(m: &Matrix, scale: f64, tol: &Tolerance) -> Matrix {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 || scale == 0.0 {
        return Matrix::zeros(rows, 0);
    }
    let cutoff = tol.rank_rel * scale * rows.max(cols) as f64;
    let svd = thin_svd(m);
    let keep: Vec<usize> = svd
        .sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(j, _)| j)
        .collect();
    select_columns(&svd.u, &keep)
}

fn select_columns(m: &Matrix, cols: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(m.nrows(), cols.len());
    for (k, &j) in cols.iter().enumerate() {
        out.set_column(k, &m.column(j));
    }
    out
}

/// Orthonormal basis of the complement of the span of orthonormal columns `q`.
fn complement_basis(q: &Matrix) -> Matrix {
    let n = q.nrows();
    match q.ncols() {
        0 => Matrix::identity(n, n),
        k if k >= n => Matrix::zeros(n, 0),
        _ => {
            // I - QQᵀ has singular values in {0, 1} up to round-off.
            let p = Matrix::identity(n, n) - q * q.transpose();
            let svd = thin_svd(&p);
            let keep: Vec<usize> = svd
                .sigma
                .iter()
                .enumerate()
                .filter(|(_, &s)| s > 0.5)
                .map(|(j, _)| j)
                .collect();
            select_columns(&svd.u, &keep)
        }
    }
}

fn null_basis(m: &Matrix, scale: f64, tol: &Tolerance) -> Matrix {
    if m.nrows() == 0 {
        return Matrix::identity(m.ncols(), m.ncols());
    }
    let rows = column_basis(&m.transpose(), scale, tol);
    complement_basis(&rows)
}

/// Column span of `m`.
pub fn image(m: &Matrix, tol: &Tolerance) -> Subspace {
    Subspace::from_orthonormal(column_basis(m, spectral_norm(m), tol))
}

/// Numerical rank of `m`, consistent with [`image`].
pub fn rank(m: &Matrix, tol: &Tolerance) -> usize {
    column_basis(m, spectral_norm(m), tol).ncols()
}

/// `{x : Mx = 0}`.
pub fn kernel(m: &Matrix, tol: &Tolerance) -> Subspace {
    Subspace::from_orthonormal(null_basis(m, spectral_norm(m), tol))
}

fn same_ambient(v: &Subspace, w: &Subspace) -> Result<()> {
    if v.ambient_dim() == w.ambient_dim() {
        Ok(())
    } else {
        Err(Error::AmbientMismatch {
            left: v.ambient_dim(),
            right: w.ambient_dim(),
        })
    }
}

/// `V + W`.
pub fn sum(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    same_ambient(v, w)?;
    if v.is_zero() {
        return Ok(w.clone());
    }
    if w.is_zero() {
        return Ok(v.clone());
    }
    let spanning = hstack(&[&v.basis, &w.basis]);
    Ok(Subspace::from_orthonormal(column_basis(
        &spanning, 1.0, tol,
    )))
}

/// `V ∩ W`, as the kernel of the stacked complement projectors.
pub fn intersect(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    same_ambient(v, w)?;
    if v.is_zero() || w.is_zero() {
        return Ok(Subspace::zero(v.ambient_dim()));
    }
    let stacked = vstack(&[&v.complement_projector(), &w.complement_projector()]);
    Ok(Subspace::from_orthonormal(null_basis(&stacked, 1.0, tol)))
}

/// `{x : Mx ∈ W}`.
pub fn preimage(m: &Matrix, w: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    if m.nrows() != w.ambient_dim() {
        return Err(Error::DimensionMismatch {
            context: "preimage: map codomain vs subspace ambient".into(),
            expected: w.ambient_dim(),
            found: m.nrows(),
        });
    }
    let scale = spectral_norm(m);
    let residual_map = w.complement_projector() * m;
    Ok(Subspace::from_orthonormal(if scale == 0.0 {
        Matrix::identity(m.ncols(), m.ncols())
    } else {
        null_basis(&residual_map, scale, tol)
    }))
}

/// Image `MV` of a subspace under a linear map.
pub fn map(m: &Matrix, v: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    if m.ncols() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            context: "map: matrix columns vs subspace ambient".into(),
            expected: v.ambient_dim(),
            found: m.ncols(),
        });
    }
    let images = m * &v.basis;
    let scale = spectral_norm(m);
    Ok(Subspace::from_orthonormal(column_basis(
        &images, scale, tol,
    )))
}

/// Spectral norm of the part of `W` outside `V`.
pub fn inclusion_residual(v: &Subspace, w: &Subspace) -> f64 {
    spectral_norm(&(&w.basis - &v.basis * (v.basis.transpose() * &w.basis)))
}

/// Whether `W ⊂ V`.
pub fn contains(v: &Subspace, w: &Subspace, tol: &Tolerance) -> bool {
    v.ambient_dim() == w.ambient_dim() && inclusion_residual(v, w) <= tol.inclusion
}

/// Projection of `S` onto the coordinate block `block`.
pub fn factor_project(s: &Subspace, block: Range<usize>, tol: &Tolerance) -> Result<Subspace> {
    let n = s.ambient_dim();
    if block.start > block.end || block.end > n {
        return Err(Error::BadRange {
            start: block.start,
            end: block.end,
            ambient: n,
        });
    }
    let rows = s.basis.rows(block.start, block.len()).into_owned();
    Ok(Subspace::from_orthonormal(column_basis(&rows, 1.0, tol)))
}

/// Coordinate-selection matrix picking `block` out of `ℝⁿ`.
pub fn selector(block: Range<usize>, ambient: usize) -> Matrix {
    let mut m = Matrix::zeros(block.len(), ambient);
    for (i, j) in block.enumerate() {
        m[(i, j)] = 1.0;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn col(v: &[f64]) -> Matrix {
        Matrix::from_column_slice(v.len(), 1, v)
    }

    fn span(ambient: usize, vectors: &[&[f64]]) -> Subspace {
        let mut m = Matrix::zeros(ambient, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            m.set_column(j, &col(v).column(0));
        }
        image(&m, &tol())
    }

    fn same(a: &Subspace, b: &Subspace) -> bool {
        a.equals(b, &tol())
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerance::new(1e-10, 1e-8).is_ok());
        assert!(Tolerance::new(0.0, 1e-8).is_err());
        assert!(Tolerance::new(1e-10, 1.0).is_err());
    }

    #[test]
    fn image_examples() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        let v = image(&m, &tol());
        assert_eq!(v.dim(), 1);
        let expected = col(&[1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt()]);
        assert!(v.contains_vector(&expected, &tol()));

        let z = image(&Matrix::zeros(3, 2), &tol());
        assert_eq!((z.ambient_dim(), z.dim()), (3, 0));

        let f = image(&Matrix::identity(4, 4), &tol());
        assert_eq!(f.dim(), 4);
    }

    #[test]
    fn kernel_examples() {
        let k = kernel(&Matrix::from_row_slice(1, 2, &[1.0, -1.0]), &tol());
        assert_eq!(k.dim(), 1);
        assert!(k.contains_vector(&col(&[1.0, 1.0]), &tol()));

        assert_eq!(kernel(&Matrix::identity(3, 3), &tol()).dim(), 0);

        let k = kernel(&Matrix::zeros(0, 4), &tol());
        assert_eq!((k.ambient_dim(), k.dim()), (4, 4));
    }

    #[test]
    fn wide_kernel_has_full_complement() {
        let m = Matrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let k = kernel(&m, &tol());
        assert_eq!(k.dim(), 2);
        assert!(spectral_norm(&(&m * k.basis())) < 1e-12);
    }

    #[test]
    fn sum_examples() {
        let e1 = span(2, &[&[1.0, 0.0]]);
        let e2 = span(2, &[&[0.0, 1.0]]);
        assert_eq!(sum(&e1, &e2, &tol()).unwrap().dim(), 2);
        assert!(same(&sum(&e1, &Subspace::zero(2), &tol()).unwrap(), &e1));
        assert!(same(&sum(&e1, &e1, &tol()).unwrap(), &e1));
        assert!(sum(&e1, &Subspace::zero(3), &tol()).is_err());
    }

    #[test]
    fn intersect_examples() {
        let diag = span(2, &[&[1.0, 1.0]]);
        let r = intersect(&Subspace::full(2), &diag, &tol()).unwrap();
        assert!(same(&r, &diag));
        let e1 = span(2, &[&[1.0, 0.0]]);
        let e2 = span(2, &[&[0.0, 1.0]]);
        assert_eq!(intersect(&e1, &e2, &tol()).unwrap().dim(), 0);
        assert!(same(&intersect(&diag, &diag, &tol()).unwrap(), &diag));
        assert!(intersect(&e1, &Subspace::full(3), &tol()).is_err());
    }

    #[test]
    fn preimage_examples() {
        let swap = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e1 = span(2, &[&[1.0, 0.0]]);
        let e2 = span(2, &[&[0.0, 1.0]]);
        assert!(same(&preimage(&swap, &e1, &tol()).unwrap(), &e2));
        assert_eq!(
            preimage(&swap, &Subspace::full(2), &tol()).unwrap().dim(),
            2
        );
        assert_eq!(
            preimage(&Matrix::zeros(2, 3), &e1, &tol()).unwrap().dim(),
            3
        );
        assert!(preimage(&Matrix::zeros(3, 3), &e1, &tol()).is_err());
    }

    #[test]
    fn preimage_ignores_roundoff_in_range() {
        // Columns of M lie in W up to round-off; the result must be everything.
        let w = span(3, &[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]]);
        let m = w.basis() * Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 7.0]);
        assert_eq!(preimage(&m, &w, &tol()).unwrap().dim(), 3);
    }

    #[test]
    fn contains_examples() {
        let e1 = span(2, &[&[1.0, 0.0]]);
        let diag = span(2, &[&[1.0, 1.0]]);
        assert!(contains(&diag, &Subspace::zero(2), &tol()));
        assert!(!contains(&diag, &e1, &tol()));
        assert!(contains(&diag, &diag, &tol()));
    }

    #[test]
    fn factor_project_examples() {
        let s = span(3, &[&[1.0, 0.0, 1.0]]);
        let p = factor_project(&s, 0..2, &tol()).unwrap();
        assert!(same(&p, &span(2, &[&[1.0, 0.0]])));

        let n = 3;
        let mut d = Matrix::zeros(2 * n, n);
        for i in 0..n {
            d[(i, i)] = 1.0;
            d[(n + i, i)] = 1.0;
        }
        let delta = image(&d, &tol());
        assert_eq!(factor_project(&delta, 0..n, &tol()).unwrap().dim(), n);
        assert_eq!(factor_project(&delta, n..2 * n, &tol()).unwrap().dim(), n);

        let z = factor_project(&Subspace::zero(4), 1..3, &tol()).unwrap();
        assert_eq!((z.ambient_dim(), z.dim()), (2, 0));
        assert!(factor_project(&s, 2..4, &tol()).is_err());
    }

    #[test]
    fn zero_sized_operands() {
        let empty = Subspace::full(0);
        assert_eq!(empty.dim(), 0);
        assert_eq!(image(&Matrix::zeros(0, 3), &tol()).ambient_dim(), 0);
        assert_eq!(image(&Matrix::zeros(3, 0), &tol()).ambient_dim(), 3);
        assert_eq!(kernel(&Matrix::zeros(2, 0), &tol()).ambient_dim(), 0);
        assert_eq!(
            preimage(&Matrix::zeros(0, 2), &Subspace::zero(0), &tol())
                .unwrap()
                .dim(),
            2
        );
    }

    fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-3i32..=3, rows * cols)
            .prop_map(move |v| Matrix::from_iterator(rows, cols, v.into_iter().map(f64::from)))
    }

    fn spanning_set(n: usize) -> impl Strategy<Value = Matrix> {
        (0usize..=n + 1).prop_flat_map(move |k| small_matrix(n, k))
    }

    proptest! {
        #[test]
        fn image_is_idempotent(m in spanning_set(5)) {
            let v = image(&m, &tol());
            let again = image(v.basis(), &tol());
            prop_assert!(same(&v, &again));
            let gram = v.basis().transpose() * v.basis();
            prop_assert!((gram - Matrix::identity(v.dim(), v.dim())).norm() < 1e-10);
        }

        #[test]
        fn grassmann_identity(a in spanning_set(5), b in spanning_set(5)) {
            let v = image(&a, &tol());
            let w = image(&b, &tol());
            let s = sum(&v, &w, &tol()).unwrap();
            let i = intersect(&v, &w, &tol()).unwrap();
            prop_assert_eq!(s.dim() + i.dim(), v.dim() + w.dim());
            prop_assert!(contains(&s, &v, &tol()) && contains(&s, &w, &tol()));
            prop_assert!(contains(&v, &i, &tol()) && contains(&w, &i, &tol()));
        }

        #[test]
        fn rank_nullity(m in (1usize..5, 1usize..6).prop_flat_map(|(r, c)| small_matrix(r, c))) {
            let k = kernel(&m, &tol());
            prop_assert_eq!(rank(&m, &tol()) + k.dim(), m.ncols());
            prop_assert!(spectral_norm(&(&m * k.basis())) < 1e-9);
        }

        #[test]
        fn preimage_is_monotone(m in small_matrix(4, 4), a in spanning_set(4), b in spanning_set(4)) {
            let w1 = image(&a, &tol());
            let w2 = sum(&w1, &image(&b, &tol()), &tol()).unwrap();
            let p1 = preimage(&m, &w1, &tol()).unwrap();
            let p2 = preimage(&m, &w2, &tol()).unwrap();
            prop_assert!(contains(&p2, &p1, &tol()));
        }

        #[test]
        fn invariant_under_change_of_spanning_set(
            a in spanning_set(4),
            b in spanning_set(4),
            lower in prop::collection::vec(-2i32..=2, 36),
        ) {
            // Unit lower-triangular factors are always invertible.
            let unit = |k: usize| {
                let mut t = Matrix::identity(k, k);
                for i in 0..k {
                    for j in 0..i {
                        t[(i, j)] = f64::from(lower[(i * 6 + j) % lower.len()]);
                    }
                }
                t
            };
            let (ta, tb) = (unit(a.ncols()), unit(b.ncols()));
            let v = image(&a, &tol());
            let w = image(&b, &tol());
            let v2 = image(&(&a * ta), &tol());
            let w2 = image(&(&b * tb), &tol());
            prop_assert!(same(&v, &v2));
            prop_assert!(same(
                &sum(&v, &w, &tol()).unwrap(),
                &sum(&v2, &w2, &tol()).unwrap()
            ));
            prop_assert!(same(
                &intersect(&v, &w, &tol()).unwrap(),
                &intersect(&v2, &w2, &tol()).unwrap()
            ));
        }
    }
}
