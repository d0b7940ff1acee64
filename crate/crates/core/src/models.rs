//! System classes: open driven systems, constrained autonomous systems,
//! guarantees with a `(u, y)` output split, and contracts.

use std::fmt;

use crate::error::Result;
use crate::subspace::{vstack, Matrix};

/// One shape or value problem found by validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeIssue {
    /// Name of the offending matrix (or `"contract"` for cross-system checks).
    pub matrix: String,
    pub message: String,
}

impl fmt::Display for ShapeIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.matrix, self.message)
    }
}

/// Every issue found by a validation pass.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<ShapeIssue>);

impl ValidationErrors {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn issues(&self) -> &[ShapeIssue] {
        &self.0
    }

    fn into_result(self) -> Result<(), ValidationErrors> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(self)
        }
    }

    fn prefixed(self, prefix: &str) -> Self {
        Self(
            self.0
                .into_iter()
                .map(|i| ShapeIssue {
                    matrix: format!("{prefix}.{}", i.matrix),
                    message: i.message,
                })
                .collect(),
        )
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

impl std::error::Error for ValidationErrors {}

#[derive(Default)]
struct ShapeChecker(Vec<ShapeIssue>);

impl ShapeChecker {
    fn shape(&mut self, name: &str, m: &Matrix, rows: usize, cols: usize) {
        if m.shape() != (rows, cols) {
            self.0.push(ShapeIssue {
                matrix: name.into(),
                message: format!("expected {rows}×{cols}, found {}×{}", m.nrows(), m.ncols()),
            });
        } else if m.iter().any(|v| !v.is_finite()) {
            self.0.push(ShapeIssue {
                matrix: name.into(),
                message: "entries must be finite".into(),
            });
        }
    }

    fn rows(&mut self, name: &str, m: &Matrix, cols: usize) {
        self.shape(name, m, m.nrows(), cols);
    }

    fn cols(&mut self, name: &str, m: &Matrix, rows: usize) {
        self.shape(name, m, rows, m.ncols());
    }

    fn finish(self) -> ValidationErrors {
        ValidationErrors(self.0)
    }
}

pub trait Validate {
    fn validate(&self) -> Result<(), ValidationErrors>;
}

/// `ẋ = Ax + Bu + Gd`, `y = Cx`.
#[derive(Clone, Debug, PartialEq)]
pub struct DrivenSystem {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub g: Matrix,
}

impl DrivenSystem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, g: Matrix) -> Result<Self> {
        let s = Self { a, b, c, g };
        s.validate()?;
        Ok(s)
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn driving_dim(&self) -> usize {
        self.g.ncols()
    }
}

impl Validate for DrivenSystem {
    fn validate(&self) -> Result<(), ValidationErrors> {
        let n = self.a.nrows();
        let mut ck = ShapeChecker::default();
        ck.shape("A", &self.a, n, n);
        ck.cols("B", &self.b, n);
        ck.rows("C", &self.c, n);
        ck.cols("G", &self.g, n);
        ck.finish().into_result()
    }
}

/// `ẋ = Ax + Gd`, `w = Cx`, `0 = Hx`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedSystem {
    pub a: Matrix,
    pub g: Matrix,
    pub c: Matrix,
    pub h: Matrix,
}

impl ConstrainedSystem {
    pub fn new(a: Matrix, g: Matrix, c: Matrix, h: Matrix) -> Result<Self> {
        let s = Self { a, g, c, h };
        s.validate()?;
        Ok(s)
    }

    /// A system without algebraic constraint (`H` has no rows).
    pub fn unconstrained(a: Matrix, g: Matrix, c: Matrix) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, g, c, Matrix::zeros(0, n))
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn driving_dim(&self) -> usize {
        self.g.ncols()
    }

    pub fn constraint_rows(&self) -> usize {
        self.h.nrows()
    }

    /// Same dynamics and constraint with a different output map.
    pub fn with_output(&self, c: Matrix) -> Result<Self> {
        Self::new(self.a.clone(), self.g.clone(), c, self.h.clone())
    }
}

impl Validate for ConstrainedSystem {
    fn validate(&self) -> Result<(), ValidationErrors> {
        let n = self.a.nrows();
        let mut ck = ShapeChecker::default();
        ck.shape("A", &self.a, n, n);
        ck.cols("G", &self.g, n);
        ck.rows("C", &self.c, n);
        ck.rows("H", &self.h, n);
        ck.finish().into_result()
    }
}

/// A constrained system whose output rows split into `[u; y]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GuaranteeSystem {
    pub base: ConstrainedSystem,
    pub u_dim: usize,
    pub y_dim: usize,
}

impl GuaranteeSystem {
    pub fn new(base: ConstrainedSystem, u_dim: usize, y_dim: usize) -> Result<Self> {
        let g = Self { base, u_dim, y_dim };
        g.validate()?;
        Ok(g)
    }

    /// Builds the guarantee from separate `Cᵘ` and `Cʸ` blocks.
    pub fn from_blocks(a: Matrix, g: Matrix, cu: Matrix, cy: Matrix, h: Matrix) -> Result<Self> {
        let (u_dim, y_dim) = (cu.nrows(), cy.nrows());
        let n = a.nrows();
        let mut ck = ShapeChecker::default();
        ck.rows("Cu", &cu, n);
        ck.rows("Cy", &cy, n);
        ck.finish().into_result()?;
        let c = vstack(&[&cu, &cy]);
        Self::new(ConstrainedSystem::new(a, g, c, h)?, u_dim, y_dim)
    }

    pub fn cu(&self) -> Matrix {
        self.base.c.rows(0, self.u_dim).into_owned()
    }

    pub fn cy(&self) -> Matrix {
        self.base.c.rows(self.u_dim, self.y_dim).into_owned()
    }

    pub fn state_dim(&self) -> usize {
        self.base.state_dim()
    }

    pub fn as_constrained(&self) -> &ConstrainedSystem {
        &self.base
    }
}

impl Validate for GuaranteeSystem {
    fn validate(&self) -> Result<(), ValidationErrors> {
        let mut errs = match self.base.validate() {
            Ok(()) => ValidationErrors::default(),
            Err(e) => e,
        };
        if self.u_dim + self.y_dim != self.base.output_dim() {
            errs.0.push(ShapeIssue {
                matrix: "C".into(),
                message: format!(
                    "output partition u_dim {} + y_dim {} does not match {} output rows",
                    self.u_dim,
                    self.y_dim,
                    self.base.output_dim()
                ),
            });
        }
        errs.into_result()
    }
}

/// The guarantee restricted to its `u` output rows.
pub fn restrict_output_u(g: &GuaranteeSystem) -> ConstrainedSystem {
    ConstrainedSystem {
        c: g.cu(),
        ..g.base.clone()
    }
}

/// The guarantee restricted to its `y` output rows.
pub fn restrict_output_y(g: &GuaranteeSystem) -> ConstrainedSystem {
    ConstrainedSystem {
        c: g.cy(),
        ..g.base.clone()
    }
}

/// An assume-guarantee pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Contract {
    pub assumption: ConstrainedSystem,
    pub guarantee: GuaranteeSystem,
}

impl Contract {
    pub fn new(assumption: ConstrainedSystem, guarantee: GuaranteeSystem) -> Result<Self> {
        let c = Self {
            assumption,
            guarantee,
        };
        c.validate()?;
        Ok(c)
    }

    /// Dimension of the input `u` the contract speaks about.
    pub fn u_dim(&self) -> usize {
        self.guarantee.u_dim
    }

    pub fn y_dim(&self) -> usize {
        self.guarantee.y_dim
    }
}

impl Validate for Contract {
    fn validate(&self) -> Result<(), ValidationErrors> {
        let mut errs = ValidationErrors::default();
        if let Err(e) = self.assumption.validate() {
            errs.0.extend(e.prefixed("assumption").0);
        }
        if let Err(e) = self.guarantee.validate() {
            errs.0.extend(e.prefixed("guarantee").0);
        }
        if self.assumption.output_dim() != self.guarantee.u_dim {
            errs.0.push(ShapeIssue {
                matrix: "contract".into(),
                message: format!(
                    "u-dimension mismatch: assumption output dim {} vs guarantee u_dim {}",
                    self.assumption.output_dim(),
                    self.guarantee.u_dim
                ),
            });
        }
        errs.into_result()
    }
}

/// Any of the three system kinds, as stored in model files and reports.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySystem {
    Driven(DrivenSystem),
    Constrained(ConstrainedSystem),
    Guarantee(GuaranteeSystem),
}

impl AnySystem {
    pub fn kind(&self) -> &'static str {
        match self {
            AnySystem::Driven(_) => "driven",
            AnySystem::Constrained(_) => "constrained",
            AnySystem::Guarantee(_) => "guarantee",
        }
    }

    /// The constrained view used by simulation checks; driven systems have none.
    pub fn as_constrained(&self) -> Option<&ConstrainedSystem> {
        match self {
            AnySystem::Driven(_) => None,
            AnySystem::Constrained(c) => Some(c),
            AnySystem::Guarantee(g) => Some(&g.base),
        }
    }
}

impl Validate for AnySystem {
    fn validate(&self) -> Result<(), ValidationErrors> {
        match self {
            AnySystem::Driven(s) => s.validate(),
            AnySystem::Constrained(s) => s.validate(),
            AnySystem::Guarantee(s) => s.validate(),
        }
    }
}

impl From<ConstrainedSystem> for AnySystem {
    fn from(s: ConstrainedSystem) -> Self {
        AnySystem::Constrained(s)
    }
}

impl From<GuaranteeSystem> for AnySystem {
    fn from(s: GuaranteeSystem) -> Self {
        AnySystem::Guarantee(s)
    }
}

impl From<DrivenSystem> for AnySystem {
    fn from(s: DrivenSystem) -> Self {
        AnySystem::Driven(s)
    }
}
