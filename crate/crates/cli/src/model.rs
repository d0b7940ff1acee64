//! Model files: named systems and contracts in one JSON document.
//!
//! ```json
//! {
//!   "tolerance": { "rank_rel": 1e-10, "inclusion": 1e-8 },
//!   "systems": {
//!     "A": { "kind": "constrained", "A": [[0]], "G": [[1]], "C": [[1]] },
//!     "plant": { "kind": "driven", "A": [[0]], "B": [[1]], "C": [[1]] }
//!   },
//!   "contracts": { "C": { "assumption": "A", "guarantee": "G" } }
//! }
//! ```
//!
//! The state dimension is the row count of `A`. An omitted `G` is `n×0` and
//! an omitted `H` is `0×n`. `[]` is the empty matrix whose fixed side is `n`:
//! `n×0` for `B` and `G`, `0×n` for `C`, `Cu`, `Cy` and `H`. `{"zeros": [r, c]}`
//! spells out a zero block of any shape.
//!
//! Entries given as JSON integers or as strings such as `"-3/4"` or `"0.25"`
//! are exact; JSON floats are not. A system whose entries are all exact also
//! carries a rational copy for the exact oracle.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{Map, Value};
use simcontract::oracle::exact::{parse_rational, Rational};
use simcontract::oracle::{QMatrix, QSystem};
use simcontract::subspace::vstack;
use simcontract::{AnySystem, ConstrainedSystem, Contract, DrivenSystem, GuaranteeSystem, Matrix};

use crate::error::CliError;

/// Tolerance fields present in the file.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FileTolerance {
    pub rank_rel: Option<f64>,
    pub inclusion: Option<f64>,
}

/// Rational copy of a system given with exact entries only.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactSystem {
    Driven {
        a: QMatrix,
        b: QMatrix,
        c: QMatrix,
        g: QMatrix,
    },
    Constrained(QSystem),
    Guarantee {
        a: QMatrix,
        g: QMatrix,
        cu: QMatrix,
        cy: QMatrix,
        h: QMatrix,
    },
}

impl ExactSystem {
    /// The constrained part; `None` for driven systems.
    pub fn constrained(&self) -> Option<QSystem> {
        match self {
            Self::Driven { .. } => None,
            Self::Constrained(q) => Some(q.clone()),
            Self::Guarantee { a, g, cu, cy, h } => Some(QSystem {
                a: a.clone(),
                g: g.clone(),
                c: QMatrix::vstack(&[cu, cy]),
                h: h.clone(),
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SystemEntry {
    pub system: AnySystem,
    pub exact: Option<ExactSystem>,
}

#[derive(Clone, Debug)]
pub struct ContractEntry {
    pub assumption: String,
    pub guarantee: String,
    pub contract: Contract,
}

#[derive(Clone, Debug, Default)]
pub struct Model {
    pub tolerance: FileTolerance,
    pub systems: BTreeMap<String, SystemEntry>,
    pub contracts: BTreeMap<String, ContractEntry>,
}

impl Model {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let root: Value =
            serde_json::from_str(text).map_err(|e| CliError::parse("model file", e.to_string()))?;
        let root = object(&root, "model file")?;
        for key in root.keys() {
            if !matches!(key.as_str(), "tolerance" | "systems" | "contracts") {
                return Err(CliError::parse(key, "unknown top-level key"));
            }
        }
        let mut model = Model::default();
        if let Some(t) = root.get("tolerance") {
            model.tolerance = parse_tolerance(t)?;
        }
        if let Some(systems) = root.get("systems") {
            for (name, v) in object(systems, "systems")? {
                let loc = format!("systems.{name}");
                model.systems.insert(name.clone(), parse_system(v, &loc)?);
            }
        }
        if let Some(contracts) = root.get("contracts") {
            for (name, v) in object(contracts, "contracts")? {
                let loc = format!("contracts.{name}");
                let entry = parse_contract(v, &loc, &model.systems)?;
                model.contracts.insert(name.clone(), entry);
            }
        }
        Ok(model)
    }

    pub fn system(&self, name: &str) -> Result<&SystemEntry, CliError> {
        self.systems
            .get(name)
            .ok_or_else(|| CliError::Usage(format!("no system named '{name}'")))
    }

    pub fn contract(&self, name: &str) -> Result<&ContractEntry, CliError> {
        self.contracts
            .get(name)
            .ok_or_else(|| CliError::Usage(format!("no contract named '{name}'")))
    }

    /// A system usable as one side of a simulation check.
    pub fn constrained(&self, name: &str) -> Result<ConstrainedSystem, CliError> {
        self.system(name)?
            .system
            .as_constrained()
            .cloned()
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "system '{name}' is driven; a constrained or guarantee system is required"
                ))
            })
    }

    pub fn driven(&self, name: &str) -> Result<DrivenSystem, CliError> {
        match &self.system(name)?.system {
            AnySystem::Driven(s) => Ok(s.clone()),
            other => Err(CliError::Usage(format!(
                "system '{name}' is {}; a driven system is required",
                other.kind()
            ))),
        }
    }
}

fn object<'a>(v: &'a Value, loc: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object()
        .ok_or_else(|| CliError::parse(loc, "expected an object"))
}

fn parse_tolerance(v: &Value) -> Result<FileTolerance, CliError> {
    let obj = object(v, "tolerance")?;
    let field = |key: &str| -> Result<Option<f64>, CliError> {
        match obj.get(key) {
            None => Ok(None),
            Some(x) => x
                .as_f64()
                .map(Some)
                .ok_or_else(|| CliError::parse(format!("tolerance.{key}"), "expected a number")),
        }
    };
    for key in obj.keys() {
        if !matches!(key.as_str(), "rank_rel" | "inclusion") {
            return Err(CliError::parse(format!("tolerance.{key}"), "unknown key"));
        }
    }
    Ok(FileTolerance {
        rank_rel: field("rank_rel")?,
        inclusion: field("inclusion")?,
    })
}

/// Which side of a matrix is pinned to the state dimension.
#[derive(Clone, Copy)]
enum Fixed {
    Rows(usize),
    Cols(usize),
}

/// A float matrix and, when every entry is exact, its rational copy.
struct Parsed {
    float: Matrix,
    exact: Option<QMatrix>,
}

fn parse_cell(v: &Value, loc: &str) -> Result<(f64, Option<Rational>), CliError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok((i as f64, Some(Rational::from_integer(i.into()))))
            } else if let Some(u) = n.as_u64() {
                Ok((u as f64, Some(Rational::from_integer(u.into()))))
            } else {
                Ok((n.as_f64().expect("finite JSON number"), None))
            }
        }
        Value::String(s) => {
            let q = parse_rational(s)
                .map_err(|_| CliError::parse(loc, format!("'{s}' is not a rational literal")))?;
            let f = num_traits::ToPrimitive::to_f64(&q)
                .filter(|f| f.is_finite())
                .ok_or_else(|| CliError::parse(loc, format!("'{s}' is out of range")))?;
            Ok((f, Some(q)))
        }
        _ => Err(CliError::parse(
            loc,
            "expected a number or a \"p/q\" string",
        )),
    }
}

fn parse_matrix(v: &Value, loc: &str, fixed: Fixed) -> Result<Parsed, CliError> {
    if let Some(obj) = v.as_object() {
        let dims = obj
            .get("zeros")
            .and_then(Value::as_array)
            .filter(|d| d.len() == 2 && obj.len() == 1)
            .and_then(|d| Some((d[0].as_u64()? as usize, d[1].as_u64()? as usize)))
            .ok_or_else(|| CliError::parse(loc, "expected {\"zeros\": [rows, cols]}"))?;
        return Ok(Parsed {
            float: Matrix::zeros(dims.0, dims.1),
            exact: Some(QMatrix::zeros(dims.0, dims.1)),
        });
    }
    let rows = v
        .as_array()
        .ok_or_else(|| CliError::parse(loc, "expected an array of rows"))?;
    if rows.is_empty() {
        let (r, c) = match fixed {
            Fixed::Rows(n) => (n, 0),
            Fixed::Cols(n) => (0, n),
        };
        return Ok(Parsed {
            float: Matrix::zeros(r, c),
            exact: Some(QMatrix::zeros(r, c)),
        });
    }
    let mut width = None;
    let mut floats = Vec::new();
    let mut exact = Some(Vec::new());
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| CliError::parse(format!("{loc}[{i}]"), "expected an array"))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(CliError::parse(
                    loc,
                    format!(
                        "ragged rows: row 0 has {w} entries, row {i} has {}",
                        row.len()
                    ),
                ))
            }
            _ => {}
        }
        for (j, cell) in row.iter().enumerate() {
            let (f, q) = parse_cell(cell, &format!("{loc}[{i}][{j}]"))?;
            floats.push(f);
            match (exact.as_mut(), q) {
                (Some(e), Some(q)) => e.push(q),
                _ => exact = None,
            }
        }
    }
    let (r, c) = (rows.len(), width.unwrap_or(0));
    Ok(Parsed {
        float: Matrix::from_row_slice(r, c, &floats),
        exact: exact.map(|e| QMatrix::from_rows(r, c, e)),
    })
}

const KEYS: &[(&str, &[&str])] = &[
    ("driven", &["A", "B", "C", "G"]),
    ("constrained", &["A", "G", "C", "H"]),
    ("guarantee", &["A", "G", "Cu", "Cy", "H"]),
];

fn parse_system(v: &Value, loc: &str) -> Result<SystemEntry, CliError> {
    let obj = object(v, loc)?;
    let kind = obj.get("kind").and_then(Value::as_str).ok_or_else(|| {
        CliError::parse(
            format!("{loc}.kind"),
            "expected \"driven\", \"constrained\" or \"guarantee\"",
        )
    })?;
    let allowed = KEYS
        .iter()
        .find(|(k, _)| *k == kind)
        .map(|(_, keys)| *keys)
        .ok_or_else(|| CliError::parse(format!("{loc}.kind"), format!("unknown kind '{kind}'")))?;
    for key in obj.keys() {
        if key != "kind" && !allowed.contains(&key.as_str()) {
            return Err(CliError::parse(
                format!("{loc}.{key}"),
                format!("not a matrix of a {kind} system"),
            ));
        }
    }

    let a_loc = format!("{loc}.A");
    let a_value = obj
        .get("A")
        .ok_or_else(|| CliError::parse(&a_loc, "missing matrix"))?;
    let n = a_value.as_array().map_or(0, Vec::len);
    let a = parse_matrix(a_value, &a_loc, Fixed::Rows(n))?;
    let n = a.float.nrows();
    let get = |key: &str, fixed: Fixed, optional: bool| -> Result<Parsed, CliError> {
        let at = format!("{loc}.{key}");
        match obj.get(key) {
            Some(v) => parse_matrix(v, &at, fixed),
            None if optional => parse_matrix(&Value::Array(vec![]), &at, fixed),
            None => Err(CliError::parse(at, "missing matrix")),
        }
    };
    let g = get("G", Fixed::Rows(n), true)?;
    let invalid = |e: simcontract::Error| CliError::invalid(loc, e);

    let entry = match kind {
        "driven" => {
            let b = get("B", Fixed::Rows(n), false)?;
            let c = get("C", Fixed::Cols(n), false)?;
            let exact = match (&a.exact, &b.exact, &c.exact, &g.exact) {
                (Some(a), Some(b), Some(c), Some(g)) => Some(ExactSystem::Driven {
                    a: a.clone(),
                    b: b.clone(),
                    c: c.clone(),
                    g: g.clone(),
                }),
                _ => None,
            };
            SystemEntry {
                system: DrivenSystem::new(a.float, b.float, c.float, g.float)
                    .map_err(invalid)?
                    .into(),
                exact,
            }
        }
        "constrained" => {
            let c = get("C", Fixed::Cols(n), false)?;
            let h = get("H", Fixed::Cols(n), true)?;
            let exact = match (&a.exact, &g.exact, &c.exact, &h.exact) {
                (Some(a), Some(g), Some(c), Some(h)) => Some(ExactSystem::Constrained(QSystem {
                    a: a.clone(),
                    g: g.clone(),
                    c: c.clone(),
                    h: h.clone(),
                })),
                _ => None,
            };
            SystemEntry {
                system: ConstrainedSystem::new(a.float, g.float, c.float, h.float)
                    .map_err(invalid)?
                    .into(),
                exact,
            }
        }
        _ => {
            let cu = get("Cu", Fixed::Cols(n), false)?;
            let cy = get("Cy", Fixed::Cols(n), false)?;
            let h = get("H", Fixed::Cols(n), true)?;
            let exact = match (&a.exact, &g.exact, &cu.exact, &cy.exact, &h.exact) {
                (Some(a), Some(g), Some(cu), Some(cy), Some(h)) => Some(ExactSystem::Guarantee {
                    a: a.clone(),
                    g: g.clone(),
                    cu: cu.clone(),
                    cy: cy.clone(),
                    h: h.clone(),
                }),
                _ => None,
            };
            if cu.float.ncols() != cy.float.ncols() {
                return Err(CliError::parse(
                    format!("{loc}.Cy"),
                    format!(
                        "has {} columns but Cu has {}",
                        cy.float.ncols(),
                        cu.float.ncols()
                    ),
                ));
            }
            let c = vstack(&[&cu.float, &cy.float]);
            let (u, y) = (cu.float.nrows(), cy.float.nrows());
            let base = ConstrainedSystem::new(a.float, g.float, c, h.float).map_err(invalid)?;
            SystemEntry {
                system: GuaranteeSystem::new(base, u, y).map_err(invalid)?.into(),
                exact,
            }
        }
    };
    Ok(entry)
}

fn parse_contract(
    v: &Value,
    loc: &str,
    systems: &BTreeMap<String, SystemEntry>,
) -> Result<ContractEntry, CliError> {
    let obj = object(v, loc)?;
    let name = |key: &str| -> Result<String, CliError> {
        obj.get(key)
            .and_then(Value::as_str)
            .map(String::from)
            .ok_or_else(|| CliError::parse(format!("{loc}.{key}"), "expected a system name"))
    };
    for key in obj.keys() {
        if !matches!(key.as_str(), "assumption" | "guarantee") {
            return Err(CliError::parse(format!("{loc}.{key}"), "unknown key"));
        }
    }
    let (a_name, g_name) = (name("assumption")?, name("guarantee")?);
    let lookup = |key: &str, target: &str| {
        systems.get(target).ok_or_else(|| {
            CliError::parse(
                format!("{loc}.{key}"),
                format!("unresolved reference '{target}'"),
            )
        })
    };
    let assumption = match &lookup("assumption", &a_name)?.system {
        AnySystem::Constrained(a) => a.clone(),
        other => {
            return Err(CliError::parse(
                format!("{loc}.assumption"),
                format!("'{a_name}' is {}, expected constrained", other.kind()),
            ))
        }
    };
    let guarantee = match &lookup("guarantee", &g_name)?.system {
        AnySystem::Guarantee(g) => g.clone(),
        other => {
            return Err(CliError::parse(
                format!("{loc}.guarantee"),
                format!("'{g_name}' is {}, expected guarantee", other.kind()),
            ))
        }
    };
    let contract = Contract::new(assumption, guarantee).map_err(|e| CliError::invalid(loc, e))?;
    Ok(ContractEntry {
        assumption: a_name,
        guarantee: g_name,
        contract,
    })
}
