//! Fraction-exact re-implementation of the consistent-subspace recursion and
//! the simulation fixed point. No tolerances anywhere: subspaces are spanned
//! by rational columns and every rank comes from exact Gaussian elimination.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::models::ConstrainedSystem;

pub type Rational = BigRational;

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QMatrix {}×{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        f.write_str("]")
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Rational>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count mismatch");
        Self { rows, cols, data }
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        Self::from_rows(
            rows,
            cols,
            data.iter()
                .map(|&v| Rational::from_integer(BigInt::from(v)))
                .collect(),
        )
    }

    /// Exact conversion; every finite double is a dyadic rational.
    pub fn try_from_f64(m: &DMatrix<f64>) -> Result<Self> {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = Rational::from_float(m[(i, j)])
                    .ok_or_else(|| Error::NonRational(m[(i, j)].to_string()))?;
            }
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].to_f64().unwrap_or(f64::NAN)
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }

    pub fn hstack(blocks: &[&QMatrix]) -> Self {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut c0 = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack row mismatch");
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, c0 + j)] = b[(i, j)].clone();
                }
            }
            c0 += b.cols;
        }
        out
    }

    pub fn vstack(blocks: &[&QMatrix]) -> Self {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack column mismatch");
            for i in 0..b.rows {
                for j in 0..cols {
                    out[(r0 + i, j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
        }
        out
    }

    pub fn block_diag(blocks: &[&QMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Rows `start..start + len`.
    pub fn row_block(&self, start: usize, len: usize) -> Self {
        let mut out = Self::zeros(len, self.cols);
        for i in 0..len {
            for j in 0..self.cols {
                out[(i, j)] = self[(start + i, j)].clone();
            }
        }
        out
    }

    fn select_cols(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &j) in cols.iter().enumerate() {
                out[(i, k)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            if p != row {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, row * m.cols + j);
                }
            }
            let inv = m[(row, col)].recip();
            for j in col..m.cols {
                m[(row, j)] = &m[(row, j)] * &inv;
            }
            for i in 0..m.rows {
                if i == row || m[(i, col)].is_zero() {
                    continue;
                }
                let f = m[(i, col)].clone();
                for j in col..m.cols {
                    let delta = &f * &m[(row, j)];
                    m[(i, j)] -= delta;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : Mx = 0}` as columns.
    pub fn kernel(&self) -> QMatrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|j| !pivots.contains(j)).collect();
        let mut k = QMatrix::zeros(self.cols, free.len());
        for (c, &f) in free.iter().enumerate() {
            k[(f, c)] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                k[(p, c)] = -r[(i, f)].clone();
            }
        }
        k
    }

    /// Linearly independent columns spanning the column space.
    pub fn column_space(&self) -> QMatrix {
        let (_, pivots) = self.rref();
        self.select_cols(&pivots)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn max_abs(&self) -> Rational {
        self.data
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Exact subspace of `ℚⁿ` spanned by independent columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSubspace {
    basis: QMatrix,
}

impl QSubspace {
    pub fn span(m: &QMatrix) -> Self {
        Self {
            basis: m.column_space(),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            basis: QMatrix::identity(n),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            basis: QMatrix::zeros(n, 0),
        }
    }

    pub fn kernel_of(m: &QMatrix) -> Self {
        if m.nrows() == 0 {
            return Self::full(m.ncols());
        }
        Self { basis: m.kernel() }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &QMatrix {
        &self.basis
    }

    pub fn sum(&self, other: &QSubspace) -> Self {
        Self::span(&QMatrix::hstack(&[&self.basis, &other.basis]))
    }

    pub fn intersect(&self, other: &QSubspace) -> Self {
        let n = self.ambient_dim();
        if self.dim() == 0 || other.dim() == 0 {
            return Self::zero(n);
        }
        let coeffs = QMatrix::hstack(&[&self.basis, &other.basis.neg()]).kernel();
        let top = coeffs.row_block(0, self.dim());
        Self::span(&self.basis.mul(&top))
    }

    /// `{x : Mx ∈ self}`.
    pub fn preimage(&self, m: &QMatrix) -> Self {
        let n = m.ncols();
        let joint = QMatrix::hstack(&[m, &self.basis.neg()]);
        let k = if joint.nrows() == 0 {
            QMatrix::identity(joint.ncols())
        } else {
            joint.kernel()
        };
        Self::span(&k.row_block(0, n))
    }

    pub fn product(&self, other: &QSubspace) -> Self {
        Self {
            basis: QMatrix::block_diag(&[&self.basis, &other.basis]),
        }
    }

    pub fn project_rows(&self, start: usize, len: usize) -> Self {
        Self::span(&self.basis.row_block(start, len))
    }

    /// Whether `other ⊂ self`.
    pub fn contains(&self, other: &QSubspace) -> bool {
        QMatrix::hstack(&[&self.basis, &other.basis]).rank() == self.dim()
    }
}

/// A constrained system with rational matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSystem {
    pub a: QMatrix,
    pub g: QMatrix,
    pub c: QMatrix,
    pub h: QMatrix,
}

impl QSystem {
    pub fn try_from_float(x: &ConstrainedSystem) -> Result<Self> {
        Ok(Self {
            a: QMatrix::try_from_f64(&x.a)?,
            g: QMatrix::try_from_f64(&x.g)?,
            c: QMatrix::try_from_f64(&x.c)?,
            h: QMatrix::try_from_f64(&x.h)?,
        })
    }

    pub fn to_float(&self) -> Result<ConstrainedSystem> {
        ConstrainedSystem::new(
            self.a.to_f64(),
            self.g.to_f64(),
            self.c.to_f64(),
            self.h.to_f64(),
        )
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }
}

fn fixed_point(start: QSubspace, a: &QMatrix, range: &QSubspace) -> QSubspace {
    let mut current = start;
    loop {
        let next = current.intersect(&current.sum(range).preimage(a));
        if next.dim() == current.dim() {
            return next;
        }
        current = next;
    }
}

pub fn exact_consistent_subspace(x: &QSystem) -> QSubspace {
    fixed_point(QSubspace::kernel_of(&x.h), &x.a, &QSubspace::span(&x.g))
}

/// `dim 𝒱` computed without tolerances.
pub fn exact_subspace_dims(x: &QSystem) -> usize {
    exact_consistent_subspace(x).dim()
}

/// Exact counterpart of [`crate::verify::SimulationReport`].
#[derive(Clone, Debug)]
pub struct ExactSimulation {
    pub v1_dim: usize,
    pub v2_dim: usize,
    pub relation: QSubspace,
    pub relation_dim: usize,
    pub full: bool,
    pub side_condition_ok: bool,
    pub holds: bool,
}

pub fn exact_simulation(x1: &QSystem, x2: &QSystem) -> Result<ExactSimulation> {
    if x1.c.nrows() != x2.c.nrows() {
        return Err(Error::DimensionMismatch {
            context: "output dimensions of compared systems".into(),
            expected: x1.c.nrows(),
            found: x2.c.nrows(),
        });
    }
    let (n1, n2) = (x1.state_dim(), x2.state_dim());
    let v1 = exact_consistent_subspace(x1);
    let v2 = exact_consistent_subspace(x2);
    let matched = QSubspace::kernel_of(&QMatrix::hstack(&[&x1.c, &x2.c.neg()]));
    let start = v1.product(&v2).intersect(&matched);
    let a = QMatrix::block_diag(&[&x1.a, &x2.a]);
    let g = QSubspace::span(&QMatrix::block_diag(&[&x1.g, &x2.g]));
    let relation = fixed_point(start, &a, &g);

    let moves = v1
        .intersect(&QSubspace::span(&x1.g))
        .product(&QSubspace::zero(n2));
    let absorb = QSubspace::zero(n1).product(&QSubspace::span(&x2.g));
    let side_condition_ok = relation.sum(&absorb).contains(&moves);
    let full = relation.project_rows(0, n1).contains(&v1);
    Ok(ExactSimulation {
        v1_dim: v1.dim(),
        v2_dim: v2.dim(),
        relation_dim: relation.dim(),
        relation,
        full,
        side_condition_ok,
        holds: full && side_condition_ok,
    })
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::NonRational(text.to_string());
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Ok(i) = t.parse::<BigInt>() {
        return Ok(Rational::from_integer(i));
    }
    let (neg, digits) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = digits.split_once('.').ok_or_else(bad)?;
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let num: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}
