//! Run specifications and the batch commands behind the `lpevol` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ac_curve::weak_integral;
use crate::controls::{random_trig, ControlSpec};
use crate::error::{Error, Result};
use crate::evolution::{evolve, evolve_fixed, EvolConfig, EvolResult};
use crate::group_curve::{
    discrete_l1_distance, discrete_sup_distance, inverse_curve, left_translate, product, reparam_group,
    GroupACCurve,
};
use crate::lebesgue::{inclusion_check, lp_seminorm, reparam_affine, subdivide, Exponent, LpElement};
use crate::lie_core::{mat_to_vec, vec_to_mat, GroupElement, MatrixGroup};
use crate::measurable::{lift_continuous, Interval, PieceFn, PiecewiseCurve, Seminorm};
use crate::quadrature::gauss_legendre;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPEC: i32 = 1;
pub const EXIT_NOT_IN_LP: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

fn default_p() -> Exponent {
    Exponent::Finite(1.0)
}

fn default_domain() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_ns() -> Vec<usize> {
    vec![4, 8, 16, 32, 64]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    pub csv: String,
    pub json: String,
    pub grid_points: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            csv: "trajectory.csv".into(),
            json: "report.json".into(),
            grid_points: 201,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub group: MatrixGroup,
    pub control: ControlSpec,
    #[serde(default = "default_p")]
    pub p: Exponent,
    #[serde(default = "default_domain")]
    pub domain: [f64; 2],
    #[serde(default)]
    pub evolve: EvolConfig,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ns")]
    pub convergence_ns: Vec<usize>,
}

impl RunSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s).map_err(|e| Error::InvalidInput(format!("spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a spec file: `.toml` as TOML, `.json` as JSON, anything else
    /// as JSON with a TOML fallback.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml(&text),
            Some("json") => Self::from_json(&text),
            _ => Self::from_json(&text).or_else(|_| Self::from_toml(&text)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidInput(format!("spec: {e}")))
    }

    pub fn interval(&self) -> Result<Interval> {
        Interval::new(self.domain[0], self.domain[1])
    }

    pub fn validate(&self) -> Result<()> {
        self.group.validate()?;
        self.interval()?;
        self.evolve.validate()?;
        if self.output.grid_points < 2 {
            return Err(Error::InvalidParameter("output.grid_points must be at least 2".into()));
        }
        if self.convergence_ns.is_empty() || self.convergence_ns.contains(&0) {
            return Err(Error::InvalidParameter("convergence_ns needs positive entries".into()));
        }
        Ok(())
    }

    pub fn build_control(&self, base_dir: Option<&Path>) -> Result<PiecewiseCurve> {
        self.control.build(self.group, self.interval()?, base_dir)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Norm,
    Evolve,
    Check,
    Convergence,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norm => "norm",
            Command::Evolve => "evolve",
            Command::Check => "check",
            Command::Convergence => "convergence",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub deterministic: bool,
    pub seed: Option<u64>,
    /// Directory for resolving relative sample files.
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Value,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotInLp(_) => EXIT_NOT_IN_LP,
        Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_SPEC,
    }
}

fn status_of(err: &Error) -> &'static str {
    match err {
        Error::NotInLp(_) => "not-in-Lp",
        Error::NoConvergence { .. } => "no-convergence",
        Error::InvalidControl(_) => "invalid-control",
        _ => "error",
    }
}

fn error_report(cmd: Command, err: &Error) -> Value {
    let mut v = json!({
        "command": cmd.name(),
        "status": status_of(err),
        "message": err.to_string(),
    });
    if let Error::NoConvergence {
        residual,
        tol,
        refinements,
    } = err
    {
        v["residual"] = json!(residual);
        v["residual_tol"] = json!(tol);
        v["refinements"] = json!(refinements);
    }
    v
}

fn out_dir(spec: &RunSpec, opts: &RunOptions) -> PathBuf {
    opts.out_dir
        .clone()
        .or_else(|| spec.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::InvalidInput(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// Runs one command, writes its files and returns the report.
pub fn run(cmd: Command, spec: &RunSpec, opts: &RunOptions) -> Outcome {
    let started = Instant::now();
    let mut spec = spec.clone();
    if let Some(seed) = opts.seed {
        spec.seed = seed;
    }
    let dir = out_dir(&spec, opts);
    let result = match cmd {
        Command::Norm => cmd_norm(&spec, opts),
        Command::Evolve => cmd_evolve(&spec, opts, &dir),
        Command::Check => cmd_check(&spec, opts),
        Command::Convergence => cmd_convergence(&spec, opts),
    };
    let (mut report, code) = match result {
        Ok(ok) => ok,
        Err(e) => (error_report(cmd, &e), exit_code(&e)),
    };
    if !opts.deterministic {
        report["elapsed_seconds"] = json!(started.elapsed().as_secs_f64());
    }
    let text = serde_json::to_string_pretty(&report).expect("report serialises");
    if let Err(e) = write_file(&dir.join(&spec.output.json), &(text + "\n")) {
        log::error!("{e}");
        return Outcome {
            exit_code: EXIT_SPEC,
            report: error_report(cmd, &e),
        };
    }
    Outcome {
        exit_code: code,
        report,
    }
}

fn exponent_json(p: Exponent) -> Value {
    serde_json::to_value(p).expect("exponent serialises")
}

fn control_element(spec: &RunSpec, opts: &RunOptions) -> Result<LpElement> {
    let rep = spec.build_control(opts.base_dir.as_deref())?;
    LpElement::new(rep, spec.p, spec.evolve.quad)
}

pub fn cmd_norm(spec: &RunSpec, opts: &RunOptions) -> Result<(Value, i32)> {
    let rep = spec.build_control(opts.base_dir.as_deref())?;
    let cfg = spec.evolve.quad;
    let mut report = json!({
        "command": "norm",
        "group": spec.group.to_string(),
        "p": exponent_json(spec.p),
    });
    let el = match LpElement::new(rep.clone(), spec.p, cfg) {
        Ok(el) => el,
        Err(e @ Error::NotInLp(_)) => {
            report["status"] = json!("not-in-Lp");
            report["message"] = json!(e.to_string());
            return Ok((report, EXIT_NOT_IN_LP));
        }
        Err(e) => return Err(e),
    };
    let mut seminorms = serde_json::Map::new();
    for q in Seminorm::family_for(rep.dim()) {
        seminorms.insert(q.to_string(), json!(el.seminorm(&q)?));
    }
    let mut table = Vec::new();
    let grid = Exponent::standard_grid();
    for p in grid {
        let low = match LpElement::new(rep.clone(), p, cfg) {
            Ok(low) => low,
            Err(Error::NotInLp(_)) => {
                table.push(json!({ "p": exponent_json(p), "status": "not-in-Lp" }));
                continue;
            }
            Err(e) => return Err(e),
        };
        for r in grid.into_iter().filter(|r| *r >= p) {
            let entry = match inclusion_check(&low, r, &Seminorm::Euclidean) {
                Ok((lhs, rhs)) => json!({
                    "p": exponent_json(p), "r": exponent_json(r),
                    "lhs": lhs, "rhs": rhs, "holds": lhs <= rhs * (1.0 + 1e-8),
                }),
                Err(Error::NotInLp(_)) => json!({
                    "p": exponent_json(p), "r": exponent_json(r),
                    "status": "not-in-Lr", "holds": true,
                }),
                Err(e) => return Err(e),
            };
            table.push(entry);
        }
    }
    report["status"] = json!("ok");
    report["seminorms"] = Value::Object(seminorms);
    report["inclusion"] = Value::Array(table);
    Ok((report, EXIT_OK))
}

/// `t,m00,...` rows with 17 significant digits.
pub fn trajectory_csv(curve: &GroupACCurve, points: usize) -> Result<String> {
    let n = curve.group().ambient_dim();
    let dom = curve.domain();
    let mut out = String::from("t");
    for i in 0..n {
        for j in 0..n {
            write!(out, ",m{i}{j}").expect("string write");
        }
    }
    out.push('\n');
    for k in 0..points {
        let t = if k + 1 == points {
            dom.b
        } else {
            dom.a + dom.length() * k as f64 / (points - 1) as f64
        };
        let m = curve.eval(t)?;
        write!(out, "{t:.16e}").expect("string write");
        for i in 0..n {
            for j in 0..n {
                write!(out, ",{:.16e}", m[(i, j)]).expect("string write");
            }
        }
        out.push('\n');
    }
    Ok(out)
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    json!(m.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>())
}

fn evolution_report(spec: &RunSpec, res: &EvolResult) -> Result<Value> {
    let end = res.curve.eval(res.curve.domain().b)?;
    Ok(json!({
        "group": spec.group.to_string(),
        "method": spec.evolve.method,
        "p": exponent_json(spec.p),
        "residual": res.residual,
        "residual_tol": spec.evolve.residual_tol,
        "refinements_used": res.refinements_used,
        "n_subdivisions": res.n_subdivisions,
        "endpoint": matrix_json(&end),
        "cells": res.cells,
    }))
}

pub fn cmd_evolve(spec: &RunSpec, opts: &RunOptions, dir: &Path) -> Result<(Value, i32)> {
    let gamma = control_element(spec, opts)?;
    let res = evolve(spec.group, &gamma, &spec.evolve)?;
    let csv = trajectory_csv(&res.curve, spec.output.grid_points)?;
    let csv_path = dir.join(&spec.output.csv);
    write_file(&csv_path, &csv)?;
    let mut report = evolution_report(spec, &res)?;
    report["command"] = json!("evolve");
    report["status"] = json!("ok");
    report["csv"] = json!(spec.output.csv);
    Ok((report, EXIT_OK))
}

/// Least-squares slope of `log r` against `log n`.
pub fn loglog_slope(ns: &[usize], rs: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|n| (*n as f64).ln()).collect();
    let ys: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Residual below which a run counts as exact.
const RESIDUAL_FLOOR: f64 = 1e-12;

pub fn cmd_convergence(spec: &RunSpec, opts: &RunOptions) -> Result<(Value, i32)> {
    let gamma = control_element(spec, opts)?;
    let mut rows = Vec::new();
    let mut rs = Vec::new();
    for &n in &spec.convergence_ns {
        let res = evolve_fixed(spec.group, &gamma, &spec.evolve.with_n(n))?;
        rows.push(json!({ "n": n, "cells": res.cells.len(), "residual": res.residual }));
        rs.push(res.residual);
    }
    let at_floor = rs.iter().all(|r| *r <= RESIDUAL_FLOOR);
    let slope = if rs.len() >= 2 && rs.iter().all(|r| *r > 0.0) {
        json!(loglog_slope(&spec.convergence_ns, &rs))
    } else {
        Value::Null
    };
    Ok((
        json!({
            "command": "convergence",
            "status": "ok",
            "group": spec.group.to_string(),
            "method": spec.evolve.method,
            "table": rows,
            "slope": slope,
            "at_floor": at_floor,
        }),
        EXIT_OK,
    ))
}

struct Check {
    name: &'static str,
    value: f64,
    tol: f64,
    skipped: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, tol: f64) -> Self {
        Self {
            name,
            value,
            tol,
            skipped: false,
        }
    }

    fn skipped(name: &'static str) -> Self {
        Self {
            name,
            value: 0.0,
            tol: 0.0,
            skipped: true,
        }
    }

    fn passed(&self) -> bool {
        self.skipped || self.value <= self.tol
    }

    fn to_json(&self) -> Value {
        let status = if self.skipped {
            "skipped"
        } else if self.passed() {
            "pass"
        } else {
            "fail"
        };
        json!({ "name": self.name, "status": status, "value": self.value, "tolerance": self.tol })
    }
}

fn uniform_grid(dom: Interval, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| dom.a + dom.length() * k as f64 / (points - 1) as f64)
        .collect()
}

/// Gauss nodes in the interior of each piece.
fn interior_nodes(curve: &PiecewiseCurve, m: usize) -> Vec<f64> {
    let gl = gauss_legendre(m);
    curve
        .segments()
        .iter()
        .flat_map(|p| {
            let (mid, half) = (0.5 * (p.lo + p.hi), 0.5 * p.length());
            gl.iter().map(move |(u, _)| mid + half * u)
        })
        .collect()
}

fn sup_norm_on(curve: &PiecewiseCurve) -> f64 {
    interior_nodes(curve, 4)
        .into_iter()
        .map(|t| curve.eval(t).map(|v| v.norm()).unwrap_or(0.0))
        .fold(0.0, f64::max)
}

/// The invariant suite for one group and control.
pub fn run_checks(spec: &RunSpec, opts: &RunOptions) -> Result<Vec<Value>> {
    let group = spec.group;
    let n = group.ambient_dim();
    let dom = spec.interval()?;
    let cfg = spec.evolve;
    let gamma = control_element(spec, opts)?;
    let eta = evolve(group, &gamma, &cfg)?.curve;
    let delta = eta.delta()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut checks = Vec::new();

    // product and inverse rules against a second, seeded control
    let other = random_trig(group, &mut rng, 2, 1.0).build(group, dom, None)?;
    let zeta = evolve(group, &LpElement::new(other, spec.p, cfg.quad)?, &cfg)?.curve;
    let dz = zeta.delta()?;
    let prod = product(&eta, &zeta)?;
    let want_prod = lift_continuous(
        move |xs| {
            let z = vec_to_mat(&xs[0], n);
            let zi = z.clone().try_inverse().unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN));
            mat_to_vec(&(zi * vec_to_mat(&xs[1], n) * z + vec_to_mat(&xs[2], n)))
        },
        n * n,
        &[&zeta.values_curve(), delta.rep(), dz.rep()],
    )?;
    let inv = inverse_curve(&eta)?;
    let want_inv = lift_continuous(
        move |xs| {
            let e = vec_to_mat(&xs[0], n);
            let ei = e.clone().try_inverse().unwrap_or_else(|| DMatrix::from_element(n, n, f64::NAN));
            mat_to_vec(&-(e * vec_to_mat(&xs[1], n) * ei))
        },
        n * n,
        &[&eta.values_curve(), delta.rep()],
    )?;
    let rule_i = discrete_l1_distance(prod.delta()?.rep(), &want_prod, 5)?
        .max(discrete_l1_distance(inv.delta()?.rep(), &want_inv, 5)?);
    checks.push(Check::new("rule-i", rule_i, 1e-6));

    // δ vanishes exactly for constant curves, and η is constant iff δ(η) = 0
    let end = eta.eval_group(dom.b)?;
    let c = GroupACCurve::constant(group, dom, &end, spec.p, cfg.quad)?;
    let zero = PiecewiseCurve::zero(dom, n * n)?;
    let dc = discrete_l1_distance(c.delta()?.rep(), &zero, 5)?;
    let d_eta = discrete_l1_distance(delta.rep(), &zero, 5)?;
    let consistent = (d_eta <= 1e-12) == eta.is_constant(1e-8)? && c.is_constant(0.0)?;
    checks.push(Check::new("rule-ii", if consistent { dc } else { f64::INFINITY }, 0.0));

    // left translation leaves δ unchanged
    let g = GroupElement::new(group, group.exp_matrix(&group.random_algebra(&mut rng, 1.0)))?;
    let moved = left_translate(&g, &eta)?;
    let rule_iii = discrete_sup_distance(moved.delta()?.rep(), delta.rep(), 4)?;
    checks.push(Check::new("rule-iii", rule_iii, 1e-12 * (1.0 + sup_norm_on(delta.rep()))));

    // (det∘η)'/det∘η recovered by central differences against tr δ(η)
    let h = 1e-5 * dom.length();
    let mut rule_iv = 0.0f64;
    for t in interior_nodes(delta.rep(), 3) {
        if t - h < dom.a || t + h > dom.b {
            continue;
        }
        let d = eta.eval(t)?.determinant();
        let fd = (eta.eval(t + h)?.determinant() - eta.eval(t - h)?.determinant()) / (2.0 * h * d);
        let tr = vec_to_mat(&delta.rep().eval(t)?, n).trace();
        rule_iv = rule_iv.max((fd - tr).abs() / (1.0 + tr.abs()));
    }
    checks.push(Check::new("rule-iv", rule_iv, 1e-6));

    // reparametrisation onto the first half scales δ by 1/2
    let half = Interval::new(dom.a, dom.a + 0.5 * dom.length())?;
    let r = reparam_group(&eta, half, dom)?;
    let want_v = reparam_affine(delta.rep(), half, dom)?.scaled(0.5);
    let rule_v = discrete_sup_distance(r.delta()?.rep(), &want_v, 4)?;
    checks.push(Check::new("rule-v", rule_v, 1e-8 * (1.0 + sup_norm_on(&want_v))));

    // det η(t) = exp(∫ tr γ)
    let trace_row = DMatrix::from_fn(1, n * n, |_, k| if k % (n + 1) == 0 { 1.0 } else { 0.0 });
    let tr_gamma = gamma.rep().linear_image(&trace_row)?;
    let abs_mass = lp_seminorm(&tr_gamma, &Seminorm::Euclidean, Exponent::Finite(1.0), &cfg.quad)?;
    let mut det_err = 0.0f64;
    for t in uniform_grid(dom, spec.output.grid_points) {
        let want = weak_integral(&tr_gamma, dom.a, t, &cfg.quad)?[0].exp();
        det_err = det_err.max((eta.eval(t)?.determinant() - want).abs());
    }
    checks.push(Check::new("det-oracle", det_err, 1e-8 * abs_mass.exp()));

    let orth = match group {
        MatrixGroup::SpecialOrthogonal3 | MatrixGroup::SpecialEuclidean2 => {
            let k = if group == MatrixGroup::SpecialOrthogonal3 { 3 } else { 2 };
            let mut worst = 0.0f64;
            for t in uniform_grid(dom, spec.output.grid_points) {
                let r = eta.eval(t)?.view((0, 0), (k, k)).clone_owned();
                worst = worst.max((r.transpose() * &r - DMatrix::<f64>::identity(k, k)).norm());
            }
            Check::new("orthogonality", worst, 1e-8)
        }
        _ => Check::skipped("orthogonality"),
    };
    checks.push(orth);

    // max_k ‖γ_{n,k}‖ is non-increasing in n and ends below its start
    let mut maxima = Vec::new();
    for k in 0..=6 {
        let parts = subdivide(gamma.rep(), 1 << k)?;
        let mut m = 0.0f64;
        for part in &parts {
            m = m.max(lp_seminorm(part, &Seminorm::Euclidean, spec.p, &cfg.quad)?);
        }
        maxima.push(m);
    }
    let mut increase = 0.0f64;
    for w in maxima.windows(2) {
        increase = increase.max(w[1] - w[0] * (1.0 + 1e-12));
    }
    if maxima[0] > 0.0 && maxima[6] >= maxima[0] {
        increase = increase.max(maxima[6] - maxima[0]).max(f64::MIN_POSITIVE);
    }
    checks.push(Check::new("subdivision-decay", increase, 0.0));

    let mut slack = 0.0f64;
    for r in Exponent::standard_grid().into_iter().filter(|r| *r >= spec.p) {
        match inclusion_check(&gamma, r, &Seminorm::Euclidean) {
            Ok((lhs, rhs)) => slack = slack.max(lhs / rhs.max(f64::MIN_POSITIVE) - 1.0),
            Err(Error::NotInLp(_)) => {}
            Err(e) => return Err(e),
        }
    }
    checks.push(Check::new("inclusion", slack, 1e-8));

    let is_step = gamma
        .rep()
        .segments()
        .iter()
        .all(|p| matches!(p.f, PieceFn::Constant(_)));
    checks.push(if is_step {
        Check::new("exactness", crate::evolution::residual(&eta, &gamma)?, 1e-12)
    } else {
        Check::skipped("exactness")
    });

    Ok(checks.iter().map(Check::to_json).collect())
}

pub fn cmd_check(spec: &RunSpec, opts: &RunOptions) -> Result<(Value, i32)> {
    let checks = run_checks(spec, opts)?;
    let failed = checks.iter().any(|c| c["status"] == "fail");
    Ok((
        json!({
            "command": "check",
            "status": if failed { "fail" } else { "ok" },
            "group": spec.group.to_string(),
            "invariants": checks,
        }),
        if failed { EXIT_INVARIANT } else { EXIT_OK },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SO3_SPEC: &str = r#"{
        "group": {"name": "so3"},
        "control": {"kind": "poly", "coeffs": [[0.0, 0.0, 1.0]]},
        "p": "inf"
    }"#;

    #[test]
    fn json_and_toml_round_trip() {
        let spec = RunSpec::from_json(SO3_SPEC).unwrap();
        assert_eq!(spec.p, Exponent::Infinity);
        assert_eq!(RunSpec::from_json(&spec.to_json()).unwrap(), spec);
        let toml = spec.to_toml().unwrap();
        assert_eq!(RunSpec::from_toml(&toml).unwrap(), spec);

        let t = r#"
            p = 2
            domain = [0.0, 2.0]
            [group]
            name = "gl"
            n = 2
            [control]
            kind = "step"
            breakpoints = [1.0]
            values = [[0, 1, 0, 0], [0, 0, 1, 0]]
            [evolve]
            method = "exact-step"
        "#;
        let spec = RunSpec::from_toml(t).unwrap();
        assert_eq!(spec.group, MatrixGroup::gl(2));
        assert_eq!(RunSpec::from_toml(&spec.to_toml().unwrap()).unwrap(), spec);
    }

    #[test]
    fn malformed_specs_are_rejected() {
        assert!(RunSpec::from_json("{").is_err());
        assert!(RunSpec::from_json(r#"{"group": {"name": "so3"}}"#).is_err());
        let bad_domain = r#"{"group": {"name": "so3"}, "control": {"kind": "poly", "coeffs": [[0,0,1]]}, "domain": [1, 0]}"#;
        assert!(RunSpec::from_json(bad_domain).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let ns = [4, 8, 16];
        let rs: Vec<f64> = ns.iter().map(|n| 3.0 * (*n as f64).powi(-4)).collect();
        assert!((loglog_slope(&ns, &rs) + 4.0).abs() < 1e-12);
    }
}
