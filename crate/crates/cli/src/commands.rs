use std::path::Path;

use clap::ValueEnum;
use num_traits::{One, ToPrimitive};
use serde_json::{json, Map, Value};
use simcontract::contracts::{
    compatible, consistency_necessary, implements, refines, series_composable, series_compose,
    ContractReport, SubCheck,
};
use simcontract::oracle::exact::Rational;
use simcontract::oracle::{
    exact_subspace_dims, validate_by_trajectories, QMatrix, TrajectoryConfig,
};
use simcontract::verify::{consistent_subspace_traced, simulated_by};
use simcontract::{ConstrainedSystem, GuaranteeSystem, Matrix, Tolerance};

use crate::error::CliError;
use crate::model::{ExactSystem, FileTolerance, Model};
use crate::report::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    /// X1 X2: the constrained system X1 is simulated by X2.
    Simulation,
    /// SIGMA C: the driven system implements the contract.
    Implements,
    /// C1 C2: contract C1 refines C2.
    Refines,
    /// E C: the environment is compatible with the contract.
    Compatible,
    /// C1 C2: C1 is series composable to C2.
    Composable,
    /// C: the necessary consistency condition A ≼ Gᵘ.
    Consistency,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulation => "simulation",
            Self::Implements => "implements",
            Self::Refines => "refines",
            Self::Compatible => "compatible",
            Self::Composable => "composable",
            Self::Consistency => "consistency",
        }
    }

    fn arity(self) -> usize {
        match self {
            Self::Consistency => 1,
            _ => 2,
        }
    }
}

pub struct ToleranceFlags {
    pub rank_rel: Option<f64>,
    pub inclusion: Option<f64>,
}

/// Flag (or environment, via clap) over file over default.
pub fn resolve_tolerance(
    flags: &ToleranceFlags,
    file: &FileTolerance,
) -> Result<Tolerance, CliError> {
    Ok(Tolerance::new(
        flags
            .rank_rel
            .or(file.rank_rel)
            .unwrap_or(Tolerance::DEFAULT_RANK_REL),
        flags
            .inclusion
            .or(file.inclusion)
            .unwrap_or(Tolerance::DEFAULT_INCLUSION),
    )?)
}

fn evaluate(
    model: &Model,
    kind: CheckKind,
    operands: &[String],
    tol: &Tolerance,
) -> Result<ContractReport, CliError> {
    if operands.len() != kind.arity() {
        return Err(CliError::Usage(format!(
            "check {} takes {} operand(s), got {}",
            kind.name(),
            kind.arity(),
            operands.len()
        )));
    }
    let first = operands[0].as_str();
    let second = operands.get(1).map(String::as_str).unwrap_or_default();
    let report = match kind {
        CheckKind::Simulation => {
            let (lhs, rhs) = (model.constrained(first)?, model.constrained(second)?);
            let report = simulated_by(&lhs, &rhs, tol)?;
            ContractReport {
                verdict: report.holds,
                checks: vec![SubCheck {
                    name: format!("{first} ≼ {second}"),
                    lhs,
                    rhs,
                    report,
                }],
                constructed: vec![],
            }
        }
        CheckKind::Implements => implements(
            &model.driven(first)?,
            &model.contract(second)?.contract,
            tol,
        )?,
        CheckKind::Refines => refines(
            &model.contract(first)?.contract,
            &model.contract(second)?.contract,
            tol,
        )?,
        CheckKind::Compatible => compatible(
            &model.constrained(first)?,
            &model.contract(second)?.contract,
            tol,
        )?,
        CheckKind::Composable => series_composable(
            &model.contract(first)?.contract,
            &model.contract(second)?.contract,
            tol,
        )?,
        CheckKind::Consistency => consistency_necessary(&model.contract(first)?.contract, tol)?,
    };
    Ok(report)
}

pub struct CheckArgs<'a> {
    pub kind: CheckKind,
    pub file: &'a Path,
    pub operands: &'a [String],
    pub witness: bool,
    pub json: bool,
    pub tol: ToleranceFlags,
}

pub fn check(args: CheckArgs) -> Result<u8, CliError> {
    let model = Model::load(args.file)?;
    let tol = resolve_tolerance(&args.tol, &model.tolerance)?;
    let report = evaluate(&model, args.kind, args.operands, &tol)?;
    if args.json {
        let j = CheckReportJson::new("check", args.kind.name(), args.operands, &report, &tol);
        println!("{}", to_json(&j));
    } else {
        print!(
            "{}",
            format_contract_report(args.kind.name(), args.operands, &report, args.witness)
        );
    }
    Ok(u8::from(!report.verdict))
}

pub struct ValidateArgs<'a> {
    pub kind: CheckKind,
    pub file: &'a Path,
    pub operands: &'a [String],
    pub json: bool,
    pub tol: ToleranceFlags,
    pub config: TrajectoryConfig,
}

pub fn validate(args: ValidateArgs) -> Result<u8, CliError> {
    let steps_ok = args.config.dt > 0.0 && args.config.horizon >= 0.0;
    if args.config.trials == 0 || !steps_ok {
        return Err(CliError::Usage(
            "--trials must be positive, --dt positive and --horizon non-negative".into(),
        ));
    }
    let model = Model::load(args.file)?;
    let tol = resolve_tolerance(&args.tol, &model.tolerance)?;
    let report = evaluate(&model, args.kind, args.operands, &tol)?;
    let mut validations = Vec::new();
    if report.verdict {
        for c in &report.checks {
            let m =
                validate_by_trajectories(&c.lhs, &c.rhs, &c.report.relation, &args.config, &tol)?;
            validations.push((c.name.clone(), m));
        }
    }
    let passed = report.verdict && validations.iter().all(|(_, m)| m.passed);
    if args.json {
        let j = ValidateReportJson {
            command: "validate",
            kind: args.kind.name().into(),
            operands: args.operands.to_vec(),
            verdict: report.verdict,
            passed,
            tolerance: (&tol).into(),
            config: (&args.config).into(),
            checks: report.checks.iter().map(CheckJson::from).collect(),
            validations: validations
                .iter()
                .map(|(name, m)| MatchingJson::new(name, m))
                .collect(),
        };
        println!("{}", to_json(&j));
    } else {
        print!(
            "{}",
            format_contract_report(args.kind.name(), args.operands, &report, false)
        );
        if !report.verdict {
            println!("verdict is false; no trials run");
        }
        for (name, m) in &validations {
            print!("{}", format_matching(name, m));
        }
        if report.verdict {
            let seed = args.config.seed;
            println!(
                "validation {}: seed {seed}",
                if passed { "passed" } else { "FAILED" }
            );
        }
    }
    Ok(u8::from(!passed))
}

pub struct InspectArgs<'a> {
    pub file: &'a Path,
    pub system: &'a str,
    pub exact: bool,
    pub json: bool,
    pub tol: ToleranceFlags,
}

pub fn inspect(args: InspectArgs) -> Result<u8, CliError> {
    let model = Model::load(args.file)?;
    let tol = resolve_tolerance(&args.tol, &model.tolerance)?;
    let entry = model.system(args.system)?;
    let x = model.constrained(args.system)?;
    let exact_dim = if args.exact {
        let q = entry.exact.as_ref().and_then(ExactSystem::constrained).ok_or_else(|| {
            CliError::Usage(format!(
                "system '{}' has floating-point entries; --exact needs every entry as an integer or a \"p/q\" string",
                args.system
            ))
        })?;
        Some(exact_subspace_dims(&q))
    } else {
        None
    };
    let traced = consistent_subspace_traced(&x, &tol);
    let dim = traced.subspace.dim();
    if args.json {
        let j = InspectReportJson {
            command: "inspect",
            system: args.system.into(),
            kind: entry.system.kind(),
            state_dim: x.state_dim(),
            consistent_dim: dim,
            dims: traced.dims.clone(),
            basis: traced.subspace.basis().into(),
            exact_dim,
            tolerance: (&tol).into(),
        };
        println!("{}", to_json(&j));
    } else {
        println!(
            "{} ({}, n = {})",
            args.system,
            entry.system.kind(),
            x.state_dim()
        );
        println!("  consistent subspace: dim {dim} (dims {:?})", traced.dims);
        if let Some(e) = exact_dim {
            let agreement = if e == dim { "agrees" } else { "DISAGREES" };
            println!("  exact dim {e} ({agreement})");
        }
        println!("  basis:");
        print!("{}", format_matrix(traced.subspace.basis(), "    "));
    }
    Ok(u8::from(exact_dim.is_some_and(|e| e != dim)))
}

pub struct ComposeArgs<'a> {
    pub file: &'a Path,
    pub first: &'a str,
    pub second: &'a str,
    pub output: &'a Path,
    pub name: Option<&'a str>,
    pub json: bool,
    pub tol: ToleranceFlags,
}

pub fn compose(args: ComposeArgs) -> Result<u8, CliError> {
    let model = Model::load(args.file)?;
    let tol = resolve_tolerance(&args.tol, &model.tolerance)?;
    let (e1, e2) = (model.contract(args.first)?, model.contract(args.second)?);
    let report = series_composable(&e1.contract, &e2.contract, &tol)?;
    let operands = vec![args.first.to_string(), args.second.to_string()];

    let mut written = None;
    if report.verdict {
        let composed = series_compose(&e1.contract, &e2.contract, &tol)?;
        let name = args
            .name
            .map_or_else(|| format!("{}->{}", args.first, args.second), String::from);
        let mut g_name = format!("{}->{}", e1.guarantee, e2.guarantee);
        if g_name == e1.assumption {
            g_name.push('\'');
        }
        let a_exact = model.system(&e1.assumption)?.exact.as_ref();
        let g1 = model.system(&e1.guarantee)?.exact.as_ref();
        let g2 = model.system(&e2.guarantee)?.exact.as_ref();
        let g_exact = match (g1, g2) {
            (Some(g1), Some(g2)) => exact_series_gar(g1, g2),
            _ => None,
        };
        let exact = a_exact.is_some() && g_exact.is_some();
        let mut systems = Map::new();
        systems.insert(
            e1.assumption.clone(),
            constrained_json(
                &composed.assumption,
                a_exact.and_then(ExactSystem::constrained).as_ref(),
            ),
        );
        systems.insert(
            g_name.clone(),
            guarantee_json(&composed.guarantee, g_exact.as_ref()),
        );
        let mut doc = Map::new();
        if model.tolerance.rank_rel.is_some() || model.tolerance.inclusion.is_some() {
            let mut t = Map::new();
            if let Some(v) = model.tolerance.rank_rel {
                t.insert("rank_rel".into(), json!(v));
            }
            if let Some(v) = model.tolerance.inclusion {
                t.insert("inclusion".into(), json!(v));
            }
            doc.insert("tolerance".into(), Value::Object(t));
        }
        doc.insert("systems".into(), Value::Object(systems));
        doc.insert(
            "contracts".into(),
            json!({ name.clone(): { "assumption": e1.assumption, "guarantee": g_name } }),
        );
        let text = render_model(&Value::Object(doc), 0) + "\n";
        std::fs::write(args.output, text).map_err(|e| CliError::Io {
            path: args.output.display().to_string(),
            source: e,
        })?;
        written = Some((name, g_name, composed.guarantee.state_dim(), exact));
    }

    if args.json {
        let j = ComposeReportJson {
            command: "compose",
            operands,
            verdict: report.verdict,
            tolerance: (&tol).into(),
            checks: report.checks.iter().map(CheckJson::from).collect(),
            contract: written.as_ref().map(|w| w.0.clone()),
            guarantee: written.as_ref().map(|w| w.1.clone()),
            state_dim: written.as_ref().map(|w| w.2),
            exact: written.as_ref().is_some_and(|w| w.3),
            output: written.as_ref().map(|_| args.output.display().to_string()),
        };
        println!("{}", to_json(&j));
    } else {
        print!(
            "{}",
            format_contract_report("composable", &operands, &report, !report.verdict)
        );
        match &written {
            Some((name, g_name, n, exact)) => println!(
                "wrote contract '{name}' with guarantee '{g_name}' ({n} states, {} entries) to {}",
                if *exact { "exact" } else { "floating-point" },
                args.output.display()
            ),
            None => println!("not series composable; nothing written"),
        }
    }
    Ok(u8::from(!report.verdict))
}

/// The block layout of the series guarantee, over the rationals.
fn exact_series_gar(g1: &ExactSystem, g2: &ExactSystem) -> Option<ExactSystem> {
    let (
        ExactSystem::Guarantee {
            a: a1,
            g: b1,
            cu: cu1,
            cy: cy1,
            h: h1,
        },
        ExactSystem::Guarantee {
            a: a2,
            g: b2,
            cu: cu2,
            cy: cy2,
            h: h2,
        },
    ) = (g1, g2)
    else {
        return None;
    };
    let (n1, n2) = (a1.nrows(), a2.nrows());
    let h = QMatrix::vstack(&[
        &QMatrix::hstack(&[h1, &QMatrix::zeros(h1.nrows(), n2)]),
        &QMatrix::hstack(&[&QMatrix::zeros(h2.nrows(), n1), h2]),
        &QMatrix::hstack(&[cy1, &cu2.neg()]),
    ]);
    Some(ExactSystem::Guarantee {
        a: QMatrix::block_diag(&[a1, a2]),
        g: QMatrix::block_diag(&[b1, b2]),
        cu: QMatrix::hstack(&[cu1, &QMatrix::zeros(cu1.nrows(), n2)]),
        cy: QMatrix::hstack(&[&QMatrix::zeros(cy2.nrows(), n1), cy2]),
        h,
    })
}

fn rational_json(q: &Rational) -> Value {
    if q.denom().is_one() {
        if let Some(i) = q.numer().to_i64() {
            return json!(i);
        }
    }
    Value::String(q.to_string())
}

fn matrix_json(m: &Matrix, exact: Option<&QMatrix>) -> Value {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return json!({ "zeros": [r, c] });
    }
    let rows = (0..r)
        .map(|i| {
            Value::Array(
                (0..c)
                    .map(|j| match exact {
                        Some(q) => rational_json(&q[(i, j)]),
                        None => json!(m[(i, j)]),
                    })
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

fn constrained_json(x: &ConstrainedSystem, exact: Option<&simcontract::oracle::QSystem>) -> Value {
    json!({
        "kind": "constrained",
        "A": matrix_json(&x.a, exact.map(|q| &q.a)),
        "G": matrix_json(&x.g, exact.map(|q| &q.g)),
        "C": matrix_json(&x.c, exact.map(|q| &q.c)),
        "H": matrix_json(&x.h, exact.map(|q| &q.h)),
    })
}

fn guarantee_json(g: &GuaranteeSystem, exact: Option<&ExactSystem>) -> Value {
    let parts = match exact {
        Some(ExactSystem::Guarantee { a, g, cu, cy, h }) => Some((a, g, cu, cy, h)),
        _ => None,
    };
    json!({
        "kind": "guarantee",
        "A": matrix_json(&g.base.a, parts.map(|p| p.0)),
        "G": matrix_json(&g.base.g, parts.map(|p| p.1)),
        "Cu": matrix_json(&g.cu(), parts.map(|p| p.2)),
        "Cy": matrix_json(&g.cy(), parts.map(|p| p.3)),
        "H": matrix_json(&g.base.h, parts.map(|p| p.4)),
    })
}

/// Pretty JSON with arrays of scalars kept on one line, so matrix rows read as rows.
fn render_model(v: &Value, depth: usize) -> String {
    let pad = "  ".repeat(depth + 1);
    let close = "  ".repeat(depth);
    match v {
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            serde_json::to_string(v)
                .expect("scalars serialize")
                .replace(',', ", ")
        }
        Value::Array(items) => {
            let inner: Vec<String> = items
                .iter()
                .map(|x| format!("{pad}{}", render_model(x, depth + 1)))
                .collect();
            format!("[\n{}\n{close}]", inner.join(",\n"))
        }
        Value::Object(map) if map.is_empty() => "{}".into(),
        Value::Object(map) => {
            let inner: Vec<String> = map
                .iter()
                .map(|(k, x)| {
                    format!(
                        "{pad}{}: {}",
                        Value::String(k.clone()),
                        render_model(x, depth + 1)
                    )
                })
                .collect();
            format!("{{\n{}\n{close}}}", inner.join(",\n"))
        }
        _ => v.to_string(),
    }
}
