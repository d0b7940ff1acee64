//! JSON reports and their human-readable counterparts.
//!
//! Field order is fixed by the struct definitions below. Every float is
//! written as `{:.16e}` (17 significant digits) with `-0` printed as `0`, so
//! identical runs give byte-identical output.

use serde::Serialize;
use serde_json::value::RawValue;
use simcontract::contracts::{ContractReport, SubCheck};
use simcontract::oracle::{MatchingReport, TrajectoryConfig, TrialResult};
use simcontract::{AnySystem, Matrix, Tolerance};

pub type Num = Box<RawValue>;

pub fn num(x: f64) -> Num {
    let text = if !x.is_finite() {
        "null".to_string()
    } else if x == 0.0 {
        format!("{:.16e}", 0.0)
    } else {
        format!("{x:.16e}")
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

#[derive(Serialize)]
pub struct ToleranceJson {
    pub rank_rel: Num,
    pub inclusion: Num,
}

impl From<&Tolerance> for ToleranceJson {
    fn from(t: &Tolerance) -> Self {
        Self {
            rank_rel: num(t.rank_rel),
            inclusion: num(t.inclusion),
        }
    }
}

#[derive(Serialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub data: Vec<Num>,
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|ij| num(m[ij]))
            .collect();
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

#[derive(Serialize)]
pub struct CheckJson {
    pub name: String,
    pub holds: bool,
    pub full: bool,
    pub side_condition_ok: bool,
    pub iterations: usize,
    pub v1_dim: usize,
    pub v2_dim: usize,
    pub relation_dim: usize,
    pub projected_dim: usize,
    pub fullness_gap: usize,
    pub relation_dims: Vec<usize>,
    pub relation: MatrixJson,
}

impl From<&SubCheck> for CheckJson {
    fn from(c: &SubCheck) -> Self {
        let r = &c.report;
        Self {
            name: c.name.clone(),
            holds: r.holds,
            full: r.full,
            side_condition_ok: r.side_condition_ok,
            iterations: r.iterations,
            v1_dim: r.v1_dim,
            v2_dim: r.v2_dim,
            relation_dim: r.relation_dim,
            projected_dim: r.projected_dim,
            fullness_gap: r.fullness_gap(),
            relation_dims: r.relation_dims.clone(),
            relation: r.relation.basis().into(),
        }
    }
}

#[derive(Serialize)]
pub struct ConstructedJson {
    pub name: String,
    pub kind: &'static str,
    pub state_dim: usize,
}

fn constructed(list: &[(String, AnySystem)]) -> Vec<ConstructedJson> {
    list.iter()
        .map(|(name, s)| ConstructedJson {
            name: name.clone(),
            kind: s.kind(),
            state_dim: match s {
                AnySystem::Driven(d) => d.state_dim(),
                AnySystem::Constrained(c) => c.state_dim(),
                AnySystem::Guarantee(g) => g.state_dim(),
            },
        })
        .collect()
}

#[derive(Serialize)]
pub struct CheckReportJson {
    pub command: &'static str,
    pub kind: String,
    pub operands: Vec<String>,
    pub verdict: bool,
    pub tolerance: ToleranceJson,
    pub checks: Vec<CheckJson>,
    pub constructed: Vec<ConstructedJson>,
}

impl CheckReportJson {
    pub fn new(
        command: &'static str,
        kind: &str,
        operands: &[String],
        report: &ContractReport,
        tol: &Tolerance,
    ) -> Self {
        Self {
            command,
            kind: kind.into(),
            operands: operands.to_vec(),
            verdict: report.verdict,
            tolerance: tol.into(),
            checks: report.checks.iter().map(CheckJson::from).collect(),
            constructed: constructed(&report.constructed),
        }
    }
}

#[derive(Serialize)]
pub struct ComposeReportJson {
    pub command: &'static str,
    pub operands: Vec<String>,
    pub verdict: bool,
    pub tolerance: ToleranceJson,
    pub checks: Vec<CheckJson>,
    pub contract: Option<String>,
    pub guarantee: Option<String>,
    pub state_dim: Option<usize>,
    pub exact: bool,
    pub output: Option<String>,
}

#[derive(Serialize)]
pub struct InspectReportJson {
    pub command: &'static str,
    pub system: String,
    pub kind: &'static str,
    pub state_dim: usize,
    pub consistent_dim: usize,
    pub dims: Vec<usize>,
    pub basis: MatrixJson,
    pub exact_dim: Option<usize>,
    pub tolerance: ToleranceJson,
}

#[derive(Serialize)]
pub struct ConfigJson {
    pub trials: usize,
    pub horizon: Num,
    pub dt: Num,
    pub seed: u64,
    pub threshold: Num,
}

impl From<&TrajectoryConfig> for ConfigJson {
    fn from(c: &TrajectoryConfig) -> Self {
        Self {
            trials: c.trials,
            horizon: num(c.horizon),
            dt: num(c.dt),
            seed: c.seed,
            threshold: num(c.threshold),
        }
    }
}

#[derive(Serialize)]
pub struct TrialJson {
    pub trial: usize,
    pub feasible: bool,
    pub passed: bool,
    pub max_output_mismatch: Num,
    pub max_relation_drift: Num,
    pub max_constraint_violation: Num,
}

impl From<&TrialResult> for TrialJson {
    fn from(t: &TrialResult) -> Self {
        Self {
            trial: t.trial,
            feasible: t.feasible,
            passed: t.passed,
            max_output_mismatch: num(t.max_output_mismatch),
            max_relation_drift: num(t.max_relation_drift),
            max_constraint_violation: num(t.max_constraint_violation),
        }
    }
}

#[derive(Serialize)]
pub struct MatchingJson {
    pub name: String,
    pub passed: bool,
    pub max_output_mismatch: Num,
    pub max_relation_drift: Num,
    pub max_constraint_violation: Num,
    pub matching_residual: Num,
    pub trials: Vec<TrialJson>,
}

impl MatchingJson {
    pub fn new(name: &str, m: &MatchingReport) -> Self {
        Self {
            name: name.into(),
            passed: m.passed,
            max_output_mismatch: num(m.max_output_mismatch),
            max_relation_drift: num(m.max_relation_drift),
            max_constraint_violation: num(m.max_constraint_violation),
            matching_residual: num(m.matching_residual),
            trials: m.trials.iter().map(TrialJson::from).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct ValidateReportJson {
    pub command: &'static str,
    pub kind: String,
    pub operands: Vec<String>,
    pub verdict: bool,
    pub passed: bool,
    pub tolerance: ToleranceJson,
    pub config: ConfigJson,
    pub checks: Vec<CheckJson>,
    pub validations: Vec<MatchingJson>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

pub fn format_matrix(m: &Matrix, indent: &str) -> String {
    if m.nrows() == 0 || m.ncols() == 0 {
        return format!("{indent}({}×{} empty)\n", m.nrows(), m.ncols());
    }
    let mut out = String::new();
    for i in 0..m.nrows() {
        out.push_str(indent);
        out.push('[');
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            let v = if v.abs() < 5e-13 { 0.0 } else { v };
            out.push_str(&format!(" {v:>10.6}"));
        }
        out.push_str(" ]\n");
    }
    out
}

pub fn format_check(c: &SubCheck, witness: bool) -> String {
    let r = &c.report;
    let status = if r.holds { "holds" } else { "fails" };
    let mut reasons = Vec::new();
    if !r.full {
        reasons.push(format!(
            "relation not full: covers {} of {} consistent dimensions",
            r.projected_dim, r.v1_dim
        ));
    }
    if !r.side_condition_ok {
        reasons.push("side condition fails".to_string());
    }
    let mut out = format!(
        "  {}: {status} (relation dim {}, {} iteration{}, dims {:?})\n",
        c.name,
        r.relation_dim,
        r.iterations,
        if r.iterations == 1 { "" } else { "s" },
        r.relation_dims
    );
    for reason in reasons {
        out.push_str(&format!("    {reason}\n"));
    }
    if witness {
        out.push_str(&format!(
            "    relation basis ({}×{}):\n",
            r.relation.ambient_dim(),
            r.relation_dim
        ));
        out.push_str(&format_matrix(r.relation.basis(), "      "));
    }
    out
}

pub fn format_contract_report(
    kind: &str,
    operands: &[String],
    report: &ContractReport,
    witness: bool,
) -> String {
    let mut out = format!("{kind} {}: {}\n", operands.join(" "), report.verdict);
    for c in &report.checks {
        out.push_str(&format_check(c, witness));
    }
    out
}

pub fn format_matching(name: &str, m: &MatchingReport) -> String {
    let status = if m.passed { "pass" } else { "FAIL" };
    let mut out = format!(
        "  {name}: {status} over {} trials (mismatch {:.3e}, drift {:.3e}, constraint {:.3e})\n",
        m.trials.len(),
        m.max_output_mismatch,
        m.max_relation_drift,
        m.max_constraint_violation
    );
    for t in m.trials.iter().filter(|t| !t.passed) {
        out.push_str(&format!(
            "    trial {}: feasible {}, mismatch {:.3e}, drift {:.3e}, constraint {:.3e}\n",
            t.trial,
            t.feasible,
            t.max_output_mismatch,
            t.max_relation_drift,
            t.max_constraint_violation
        ));
    }
    out
}
