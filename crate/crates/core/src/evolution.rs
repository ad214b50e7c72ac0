//! The evolution map: solves `η' = η γ`, `η(a) = e` for an algebra-valued
//! control `γ` by composing exact or exponential steps over a cell grid
//! that refines both a uniform subdivision and the control's breakpoints.
//!
//! On a cell `[t_k, t_{k+1}]` of length `h` the steps use the control
//! moments `M0 = ∫ γ` and `M1 = ∫ ((r - mid)/h) γ(r) dr`:
//!
//! * exact step and exponential midpoint: `η_{k+1} = η_k exp(M0)`;
//! * commutator-free order 4: `η_{k+1} = η_k exp(M0/2 - 2 M1) exp(M0/2 + 2 M1)`.
//!
//! The same formulas on `[t_k, t]` give the dense output between knots.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_curve::{discrete_l1_distance, GroupACCurve};
use crate::ac_curve::ACCurve;
use crate::lebesgue::{power_integral, Exponent, LpElement};
use crate::lie_core::{mat_to_vec, vec_to_mat, GroupElement, MatrixGroup};
use crate::measurable::{knots_close, CompactSet, Piece, PieceFn, PiecewiseCurve};
use crate::quadrature::{integrate, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// `η_k exp(∫γ)`; exact when the control commutes with itself on each
    /// cell, rejected otherwise.
    ExactStep,
    ExpMidpoint,
    #[serde(rename = "cf4")]
    Cf4,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-step" | "exact" => Ok(Method::ExactStep),
            "exp-midpoint" | "midpoint" => Ok(Method::ExpMidpoint),
            "cf4" => Ok(Method::Cf4),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolConfig {
    pub n_subdivisions: usize,
    pub method: Method,
    pub quad: QuadratureConfig,
    pub residual_tol: f64,
    pub max_refine: usize,
}

impl Default for EvolConfig {
    fn default() -> Self {
        Self {
            n_subdivisions: 16,
            method: Method::Cf4,
            quad: QuadratureConfig::default(),
            residual_tol: 1e-6,
            max_refine: 4,
        }
    }
}

impl EvolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subdivisions == 0 {
            return Err(Error::InvalidParameter("n_subdivisions must be at least 1".into()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter("residual_tol must be positive".into()));
        }
        self.quad.validate()
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n_subdivisions = n;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellDiagnostic {
    pub lo: f64,
    pub hi: f64,
    /// `‖∫_cell γ‖_F`.
    pub moment_norm: f64,
}

#[derive(Debug, Clone)]
pub struct EvolResult {
    pub curve: GroupACCurve,
    pub residual: f64,
    pub refinements_used: usize,
    pub n_subdivisions: usize,
    pub cells: Vec<CellDiagnostic>,
}

/// Gauss nodes per refined interval in the residual.
const RESIDUAL_NODES: usize = 6;
/// Interior samples per piece for control checks.
const CHECK_SAMPLES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn check_control(group: MatrixGroup, gamma: &PiecewiseCurve) -> Result<()> {
    let n = group.ambient_dim();
    if gamma.dim() != n * n {
        return Err(Error::InvalidControl(format!(
            "{group} needs controls in R^{}, got R^{}",
            n * n,
            gamma.dim()
        )));
    }
    for piece in gamma.segments() {
        for s in CHECK_SAMPLES {
            let t = piece.lo + s * piece.length();
            let a = vec_to_mat(&piece.eval(t), n);
            if !group.in_algebra(&a) {
                return Err(Error::InvalidControl(format!(
                    "γ({t}) is not in the Lie algebra of {group} (defect {:e})",
                    group.algebra_defect(&a)
                )));
            }
        }
    }
    Ok(())
}

/// `(∫_lo^hi γ, ∫_lo^hi (r - lo) γ(r) dr)` on a sub-interval of one piece.
fn moments(piece: &Piece, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<(DVector<f64>, DVector<f64>)> {
    let s = hi - lo;
    match &piece.f {
        PieceFn::Constant(v) => Ok((v * s, v * (0.5 * s * s))),
        PieceFn::Power {
            coeff,
            origin,
            exponent,
        } => {
            let o = *origin;
            let lo_c = if knots_close(lo, o) { o } else { lo };
            let hi_c = if knots_close(hi, o) { o } else { hi };
            let diverge = || Error::NotInLp(format!("|t - {o}|^{exponent} is not integrable on [{lo}, {hi}]"));
            let p0 = power_integral(lo_c, hi_c, o, *exponent).ok_or_else(diverge)?;
            let p1 = power_integral(lo_c, hi_c, o, exponent + 1.0).ok_or_else(diverge)?;
            // r - lo = σ|r - o| + (o - lo) with σ the side of the origin
            let sigma = if lo_c >= o { 1.0 } else { -1.0 };
            Ok((coeff * p0, coeff * (sigma * p1 + (o - lo) * p0)))
        }
        PieceFn::Func(f) => {
            let d = piece.f.eval(0.5 * (lo + hi)).len();
            let both = integrate(
                |r| {
                    let v = f(r);
                    let mut out = DVector::zeros(2 * d);
                    out.rows_mut(0, d).copy_from(&v);
                    out.rows_mut(d, d).copy_from(&(v * (r - lo)));
                    out
                },
                lo,
                hi,
                cfg,
            )?;
            Ok((both.rows(0, d).into_owned(), both.rows(d, d).into_owned()))
        }
    }
}

/// `d/dt exp(X(t))` from `X` and `X'`, as the upper-right block of the
/// exponential of `[[X, X'], [0, X]]`.
fn exp_derivative(group: MatrixGroup, x: &DMatrix<f64>, dx: &DMatrix<f64>) -> DMatrix<f64> {
    let comm = x * dx - dx * x;
    if group.is_abelian() || comm.norm() <= 1e-15 * (x.norm() * dx.norm()) {
        return group.exp_matrix(x) * dx;
    }
    let n = x.nrows();
    let mut block = DMatrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(x);
    block.view_mut((n, n), (n, n)).copy_from(x);
    block.view_mut((0, n), (n, n)).copy_from(dx);
    block.exp().view((0, n), (n, n)).into_owned()
}

struct DenseOutput {
    group: MatrixGroup,
    method: Method,
    quad: QuadratureConfig,
    knots: Vec<f64>,
    values: Vec<DMatrix<f64>>,
    pieces: Vec<Piece>,
}

impl DenseOutput {
    fn cell(&self, t: f64) -> usize {
        self.knots
            .partition_point(|k| *k <= t)
            .saturating_sub(1)
            .min(self.pieces.len() - 1)
    }

    /// Local propagator on `[t_k, t_k + s]` and optionally its derivative
    /// in `t`.
    fn local(&self, k: usize, t: f64, with_deriv: bool) -> Result<(DMatrix<f64>, Option<DMatrix<f64>>)> {
        let n = self.group.ambient_dim();
        let lo = self.knots[k];
        let piece = &self.pieces[k];
        let s = t - lo;
        let (m0, nm) = moments(piece, lo, t, &self.quad)?;
        let m0 = vec_to_mat(&m0, n);
        let g = || vec_to_mat(&piece.eval(t), n);
        match self.method {
            Method::ExactStep | Method::ExpMidpoint => {
                let e = self.group.exp_matrix(&m0);
                let d = with_deriv.then(|| exp_derivative(self.group, &m0, &g()));
                Ok((e, d))
            }
            Method::Cf4 => {
                let nm = vec_to_mat(&nm, n);
                let m1 = if s > 0.0 { &nm / s - &m0 * 0.5 } else { DMatrix::zeros(n, n) };
                let x1 = &m0 * 0.5 - &m1 * 2.0;
                let x2 = &m0 * 0.5 + &m1 * 2.0;
                let (e1, e2) = (self.group.exp_matrix(&x1), self.group.exp_matrix(&x2));
                let d = with_deriv.then(|| {
                    let gt = g();
                    if s <= 0.0 {
                        return gt;
                    }
                    // M0' = γ(t), M1' = γ(t)/2 - N/s²
                    let q = &nm * (2.0 / (s * s));
                    let dx1 = &q - &gt * 0.5;
                    let dx2 = &gt * 1.5 - q;
                    exp_derivative(self.group, &x1, &dx1) * &e2 + &e1 * exp_derivative(self.group, &x2, &dx2)
                });
                Ok((e1 * e2, d))
            }
        }
    }

    fn nan(&self) -> DMatrix<f64> {
        let n = self.group.ambient_dim();
        DMatrix::from_element(n, n, f64::NAN)
    }

    fn eval(&self, t: f64) -> DMatrix<f64> {
        if let Ok(i) = self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            return self.values[i].clone();
        }
        let k = self.cell(t);
        match self.local(k, t, false) {
            Ok((e, _)) => &self.values[k] * e,
            Err(err) => {
                log::warn!("dense output failed at t = {t}: {err}");
                self.nan()
            }
        }
    }

    fn deriv(&self, t: f64) -> DMatrix<f64> {
        let k = self.cell(t);
        match self.local(k, t, true) {
            Ok((_, Some(d))) => &self.values[k] * d,
            Ok((_, None)) => unreachable!("derivative requested"),
            Err(err) => {
                log::warn!("dense derivative failed at t = {t}: {err}");
                self.nan()
            }
        }
    }
}

/// Uniform grid of `n` cells merged with the control's exceptional points,
/// graded geometrically toward integrable singular origins until the
/// innermost cell carries `L^1` mass below `mass_tol`.
fn cell_grid(gamma: &PiecewiseCurve, n: usize, mass_tol: f64) -> Vec<f64> {
    let dom = gamma.domain();
    let mut knots = vec![dom.a, dom.b];
    knots.extend(gamma.exceptional_points());
    let add = |knots: &mut Vec<f64>, t: f64| {
        if !knots.iter().any(|k| knots_close(*k, t)) {
            knots.push(t);
        }
    };
    for k in 1..n {
        add(&mut knots, dom.a + dom.length() * k as f64 / n as f64);
    }
    knots.sort_by(f64::total_cmp);
    let base = knots.clone();
    for piece in gamma.segments() {
        let PieceFn::Power {
            coeff,
            origin,
            exponent,
        } = &piece.f
        else {
            continue;
        };
        if *exponent >= 0.0 || coeff.amax() == 0.0 {
            continue;
        }
        let o = *origin;
        let scale = coeff.norm();
        let mass = |x: f64| {
            let (lo, hi) = if x > o { (o, x) } else { (x, o) };
            power_integral(lo, hi, o, *exponent).map_or(f64::INFINITY, |m| scale * m)
        };
        let mut edge = if knots_close(o, piece.lo) {
            base[base.partition_point(|k| *k <= o + 1e-14)]
        } else {
            base[base.partition_point(|k| *k < o - 1e-14) - 1]
        };
        while mass(edge) >= mass_tol {
            let next = o + 0.5 * (edge - o);
            if (next - o).abs() <= 64.0 * f64::EPSILON * (1.0 + o.abs()) {
                log::warn!("cell grading toward t = {o} stopped at width {:e}", (edge - o).abs());
                break;
            }
            edge = next;
            knots.push(edge);
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots
}

fn commutes_on(piece: &Piece, n: usize) -> bool {
    let samples: Vec<DMatrix<f64>> = CHECK_SAMPLES
        .iter()
        .map(|s| vec_to_mat(&piece.eval(piece.lo + s * piece.length()), n))
        .collect();
    samples.iter().enumerate().all(|(i, a)| {
        samples[i + 1..].iter().all(|b| {
            let c = a * b - b * a;
            c.norm() <= 1e-12 * (a.norm() * b.norm()).max(f64::MIN_POSITIVE)
        })
    })
}

/// Evolution on the grid from `cfg.n_subdivisions`, without refinement.
pub fn evolve_fixed(group: MatrixGroup, gamma: &LpElement, cfg: &EvolConfig) -> Result<EvolResult> {
    cfg.validate()?;
    group.validate()?;
    let rep = gamma.rep();
    check_control(group, rep)?;
    let dim = group.ambient_dim();
    let n = cfg.n_subdivisions;
    let knots = cell_grid(rep, n, cfg.residual_tol / (4.0 * n as f64));
    let mut pieces = Vec::with_capacity(knots.len() - 1);
    for w in knots.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let idx = rep.segment_index(mid).expect("cell inside the domain");
        pieces.push(rep.segments()[idx].clone());
    }
    if cfg.method == Method::ExactStep && !group.is_abelian() {
        if let Some(p) = pieces.iter().find(|p| !commutes_on(p, dim)) {
            return Err(Error::InvalidParameter(format!(
                "exact-step needs a control that commutes with itself on each cell; it does not on [{}, {}]",
                p.lo, p.hi
            )));
        }
    }
    let mut dense = DenseOutput {
        group,
        method: cfg.method,
        quad: cfg.quad,
        knots: knots.clone(),
        values: vec![group.identity_matrix()],
        pieces,
    };
    let mut cells = Vec::with_capacity(knots.len() - 1);
    for k in 0..knots.len() - 1 {
        let (lo, hi) = (knots[k], knots[k + 1]);
        let (m0, _) = moments(&dense.pieces[k], lo, hi, &cfg.quad)?;
        let (step, _) = dense.local(k, hi, false)?;
        let next = group
            .enforce(&dense.values[k] * step)
            .map_err(|e| Error::NumericalSingularity(format!("step on [{lo}, {hi}]: {e}")))?;
        dense.values.push(next);
        cells.push(CellDiagnostic {
            lo,
            hi,
            moment_norm: m0.norm(),
        });
    }

    let dense = Arc::new(dense);
    let deriv_pieces: Vec<Piece> = knots
        .windows(2)
        .map(|w| {
            let d = dense.clone();
            Piece::func(w[0], w[1], move |t| mat_to_vec(&d.deriv(t)))
        })
        .collect();
    let deriv = PiecewiseCurve::new(rep.domain(), dim * dim, deriv_pieces, DVector::zeros(dim * dim))?;
    let seeds = knots
        .iter()
        .zip(&dense.values)
        .map(|(t, v)| (*t, mat_to_vec(v)))
        .collect();
    let mat_curve = ACCurve::with_knots(
        mat_to_vec(&group.identity_matrix()),
        LpElement::from_trusted(deriv, gamma.p(), cfg.quad),
        seeds,
    )?;
    let d = dense.clone();
    let curve = GroupACCurve::with_evaluator(group, mat_curve, move |t| d.eval(t))?;
    let residual = residual(&curve, gamma)?;
    Ok(EvolResult {
        curve,
        residual,
        refinements_used: 0,
        n_subdivisions: n,
        cells,
    })
}

/// Evolution with doubling of the subdivision count until the residual is
/// below `cfg.residual_tol`.
pub fn evolve(group: MatrixGroup, gamma: &LpElement, cfg: &EvolConfig) -> Result<EvolResult> {
    cfg.validate()?;
    let mut c = *cfg;
    let mut last = f64::NAN;
    for refinement in 0..=cfg.max_refine {
        let mut res = evolve_fixed(group, gamma, &c)?;
        log::debug!("evolve: n = {} residual {:e}", c.n_subdivisions, res.residual);
        if res.residual <= cfg.residual_tol {
            res.refinements_used = refinement;
            return Ok(res);
        }
        last = res.residual;
        c.n_subdivisions *= 2;
    }
    Err(Error::NoConvergence {
        residual: last,
        tol: cfg.residual_tol,
        refinements: cfg.max_refine,
    })
}

pub fn evol_endpoint(group: MatrixGroup, gamma: &LpElement, cfg: &EvolConfig) -> Result<GroupElement> {
    let res = evolve(group, gamma, cfg)?;
    res.curve.eval_group(gamma.domain().b)
}

/// `‖δ(η) - γ‖_{L^1}` (Frobenius, Gauss nodes on piece interiors) plus
/// `‖η(a) - I‖_F`.
pub fn residual(eta: &GroupACCurve, gamma: &LpElement) -> Result<f64> {
    let group = eta.group();
    if !eta.domain().same_as(&gamma.domain()) {
        return Err(Error::IncompatibleDomains(format!(
            "{} vs {}",
            eta.domain(),
            gamma.domain()
        )));
    }
    let delta = eta.delta()?;
    let start = eta.eval(eta.domain().a)? - group.identity_matrix();
    Ok(discrete_l1_distance(delta.rep(), gamma.rep(), RESIDUAL_NODES)? + start.norm())
}

/// Central difference `(evol(γ + hδγ) - evol(γ - hδγ)) / 2h` in the
/// ambient matrix space.
pub fn directional_derivative_evol(
    group: MatrixGroup,
    gamma: &LpElement,
    dgamma: &PiecewiseCurve,
    h: f64,
    cfg: &EvolConfig,
) -> Result<DMatrix<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("h must be positive".into()));
    }
    let shifted = |s: f64| -> Result<DMatrix<f64>> {
        let rep = gamma.rep().add(&dgamma.scaled(s))?;
        let el = LpElement::new(rep, gamma.p(), *gamma.quadrature())?;
        Ok(evol_endpoint(group, &el, cfg)?.into_matrix())
    };
    Ok((shifted(h)? - shifted(-h)?) / (2.0 * h))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub p: Exponent,
    pub q: Exponent,
    pub sup_distance: f64,
    pub residual_p: f64,
    pub residual_q: f64,
}

/// Evolves a continuous control once as an `L^p` and once as an `L^q`
/// element and compares the trajectories.
pub fn lp_lq_consistency(
    group: MatrixGroup,
    gamma: &PiecewiseCurve,
    p: Exponent,
    q: Exponent,
    cfg: &EvolConfig,
) -> Result<ConsistencyReport> {
    if q < p {
        return Err(Error::InvalidParameter(format!("need q >= p, got p = {p}, q = {q}")));
    }
    let dom = gamma.domain();
    let whole = CompactSet::new(vec![(dom.a, dom.b)])?;
    let singular = gamma.segments().iter().any(|s| s.singular_point().is_some());
    if singular || !gamma.is_continuous_on(&whole) {
        return Err(Error::NotContinuous(
            "the control must be continuous on the whole interval".into(),
        ));
    }
    let run = |r: Exponent| -> Result<EvolResult> {
        evolve(group, &LpElement::new(gamma.clone(), r, cfg.quad)?, cfg)
    };
    let (ep, eq) = (run(p)?, run(q)?);
    let mut sup = 0.0f64;
    let mut ts: Vec<f64> = (0..=400).map(|i| dom.a + dom.length() * i as f64 / 400.0).collect();
    ts.extend(ep.cells.iter().map(|c| c.lo));
    ts.extend(eq.cells.iter().map(|c| c.lo));
    for t in ts {
        sup = sup.max((ep.curve.eval(t)? - eq.curve.eval(t)?).norm());
    }
    Ok(ConsistencyReport {
        p,
        q,
        sup_distance: sup,
        residual_p: ep.residual,
        residual_q: eq.residual,
    })
}
