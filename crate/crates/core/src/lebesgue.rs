//! L^p seminorms of measurable curves and the transforms that act on them:
//! inclusion constants, affine pullbacks, splitting and gluing, the
//! subdivision `γ_{n,k}`, and (fiber-)linear pushforwards together with
//! their directional derivatives.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::measurable::{
    knots_close, lift_continuous, Interval, Piece, PieceFn, PiecewiseCurve, Seminorm,
};
use crate::quadrature::{integrate_scalar, QuadratureConfig};

/// An exponent in `[1, ∞]`. `1/∞` is taken to be `0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!(
                "exponent must lie in [1, inf], got {p}"
            )))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(p) => *p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn recip(&self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// The grid `{1, 2, 4, ∞}` used by reports and acceptance checks.
    pub fn standard_grid() -> [Exponent; 4] {
        [
            Exponent::Finite(1.0),
            Exponent::Finite(2.0),
            Exponent::Finite(4.0),
            Exponent::Infinity,
        ]
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse exponent {s:?}")))
                .and_then(Exponent::new),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// `∫_lo^hi |t - origin|^r dt` for an origin outside `(lo, hi)`; `None`
/// when the integral diverges.
pub(crate) fn power_integral(lo: f64, hi: f64, origin: f64, r: f64) -> Option<f64> {
    let mut d1 = (lo - origin).abs();
    let mut d2 = (hi - origin).abs();
    if d1 > d2 {
        std::mem::swap(&mut d1, &mut d2);
    }
    if knots_close(origin, lo) || knots_close(origin, hi) {
        d1 = 0.0;
    }
    if r == -1.0 {
        return (d1 > 0.0).then(|| (d2 / d1).ln());
    }
    if r < -1.0 && d1 == 0.0 {
        return None;
    }
    Some((d2.powf(r + 1.0) - d1.powf(r + 1.0)) / (r + 1.0))
}

/// `(∫ q(γ)^p)` over one piece for finite `p`.
fn piece_power_integral(piece: &Piece, q: &Seminorm, p: f64, cfg: &QuadratureConfig) -> Result<f64> {
    match &piece.f {
        PieceFn::Constant(v) => Ok(q.eval(v).powf(p) * piece.length()),
        PieceFn::Power {
            coeff,
            origin,
            exponent,
        } => {
            let c = q.eval(coeff);
            if c == 0.0 {
                return Ok(0.0);
            }
            power_integral(piece.lo, piece.hi, *origin, exponent * p)
                .map(|i| c.powf(p) * i)
                .ok_or_else(|| {
                    Error::NotInLp(format!(
                        "|t - {origin}|^{} is not integrable on [{}, {}]",
                        exponent * p,
                        piece.lo,
                        piece.hi
                    ))
                })
        }
        PieceFn::Func(f) => {
            let v = integrate_scalar(|t| q.eval(&f(t)).powf(p), piece.lo, piece.hi, cfg)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NotInLp("integral is not finite".into()))
            }
        }
    }
}

const SUP_SAMPLES: usize = 257;

/// Supremum of `q∘f` over a piece: Chebyshev sampling followed by a golden
/// section refinement around the best sample.
fn piece_sup(piece: &Piece, q: &Seminorm) -> Result<f64> {
    match &piece.f {
        PieceFn::Constant(v) => Ok(q.eval(v)),
        PieceFn::Power {
            coeff,
            origin,
            exponent,
        } => {
            let c = q.eval(coeff);
            if c == 0.0 {
                return Ok(0.0);
            }
            let d_lo = (piece.lo - origin).abs();
            let d_hi = (piece.hi - origin).abs();
            let (near, far) = if d_lo < d_hi { (d_lo, d_hi) } else { (d_hi, d_lo) };
            let near = if piece.singular_point().is_some() { 0.0 } else { near };
            if *exponent >= 0.0 {
                Ok(c * far.powf(*exponent))
            } else if near == 0.0 {
                Err(Error::NotInLp(format!(
                    "|t - {origin}|^{exponent} is unbounded on [{}, {}]",
                    piece.lo, piece.hi
                )))
            } else {
                Ok(c * near.powf(*exponent))
            }
        }
        PieceFn::Func(f) => {
            let (lo, hi) = (piece.lo, piece.hi);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let nodes: Vec<f64> = (0..SUP_SAMPLES)
                .map(|i| {
                    let th = std::f64::consts::PI * i as f64 / (SUP_SAMPLES - 1) as f64;
                    mid - half * th.cos()
                })
                .collect();
            let g = |t: f64| q.eval(&f(t));
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for (i, &t) in nodes.iter().enumerate() {
                let v = g(t);
                if !v.is_finite() {
                    return Err(Error::NotInLp(format!("curve is not finite at t = {t}")));
                }
                if v > best_val {
                    best_val = v;
                    best = i;
                }
            }
            let l = nodes[best.saturating_sub(1)];
            let r = nodes[(best + 1).min(SUP_SAMPLES - 1)];
            Ok(best_val.max(golden_max(&g, l, r)))
        }
    }
}

fn golden_max<G: Fn(f64) -> f64>(g: &G, mut l: f64, mut r: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = r - phi * (r - l);
    let mut x2 = l + phi * (r - l);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if f1 > f2 {
            r = x2;
            x2 = x1;
            f2 = f1;
            x1 = r - phi * (r - l);
            f1 = g(x1);
        } else {
            l = x1;
            x1 = x2;
            f1 = f2;
            x2 = l + phi * (r - l);
            f2 = g(x2);
        }
    }
    f1.max(f2)
}

/// `‖γ‖_{L^p, q}`.
pub fn lp_seminorm(
    curve: &PiecewiseCurve,
    q: &Seminorm,
    p: Exponent,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    q.check_dim(curve.dim())?;
    match p {
        Exponent::Finite(p) => {
            let mut total = 0.0;
            for piece in curve.segments() {
                total += piece_power_integral(piece, q, p, cfg)?;
            }
            Ok(total.powf(1.0 / p))
        }
        Exponent::Infinity => curve
            .segments()
            .iter()
            .try_fold(0.0f64, |m, piece| Ok(m.max(piece_sup(piece, q)?))),
    }
}

/// `∫ q(γ)^p` for finite `p` (the un-rooted seminorm).
pub fn lp_seminorm_pow(
    curve: &PiecewiseCurve,
    q: &Seminorm,
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    q.check_dim(curve.dim())?;
    curve
        .segments()
        .iter()
        .try_fold(0.0, |s, piece| Ok(s + piece_power_integral(piece, q, p, cfg)?))
}

/// An a.e.-class of a curve, certified to lie in L^p.
pub struct LpElement {
    rep: PiecewiseCurve,
    p: Exponent,
    cfg: QuadratureConfig,
    cache: Mutex<Vec<(Seminorm, f64)>>,
}

impl fmt::Debug for LpElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LpElement")
            .field("p", &self.p)
            .field("domain", &self.rep.domain())
            .field("dim", &self.rep.dim())
            .finish()
    }
}

impl Clone for LpElement {
    fn clone(&self) -> Self {
        Self {
            rep: self.rep.clone(),
            p: self.p,
            cfg: self.cfg,
            cache: Mutex::new(self.cache.lock().expect("cache lock").clone()),
        }
    }
}

impl LpElement {
    /// Fails with `NotInLp` unless the euclidean L^p seminorm is finite.
    /// All seminorms on `R^d` are equivalent, so this certifies membership
    /// for every registered seminorm.
    pub fn new(rep: PiecewiseCurve, p: Exponent, cfg: QuadratureConfig) -> Result<Self> {
        let el = Self {
            rep,
            p,
            cfg,
            cache: Mutex::new(Vec::new()),
        };
        el.seminorm(&Seminorm::Euclidean)?;
        Ok(el)
    }

    /// Skips the membership check; callers guarantee `rep ∈ L^p` by
    /// construction.
    pub(crate) fn from_trusted(rep: PiecewiseCurve, p: Exponent, cfg: QuadratureConfig) -> Self {
        Self {
            rep,
            p,
            cfg,
            cache: Mutex::new(Vec::new()),
        }
    }

    pub fn rep(&self) -> &PiecewiseCurve {
        &self.rep
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn domain(&self) -> Interval {
        self.rep.domain()
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.cfg
    }

    pub fn seminorm(&self, q: &Seminorm) -> Result<f64> {
        if let Some((_, v)) = self
            .cache
            .lock()
            .expect("cache lock")
            .iter()
            .find(|(k, _)| k == q)
        {
            return Ok(*v);
        }
        let v = lp_seminorm(&self.rep, q, self.p, &self.cfg)?;
        let mut cache = self.cache.lock().expect("cache lock");
        if !cache.iter().any(|(k, _)| k == q) {
            cache.push((q.clone(), v));
        }
        Ok(v)
    }

    /// Same class under another exponent (fails when not in L^r).
    pub fn with_exponent(&self, r: Exponent) -> Result<Self> {
        Self::new(self.rep.clone(), r, self.cfg)
    }

    pub fn ae_eq(&self, other: &LpElement, tol: f64) -> bool {
        crate::measurable::ae_equal(&self.rep, &other.rep, tol)
    }
}

/// Both sides of `‖γ‖_{L^p,q} <= (b-a)^{1/p - 1/r} ‖γ‖_{L^r,q}`.
pub fn inclusion_check(el: &LpElement, r: Exponent, q: &Seminorm) -> Result<(f64, f64)> {
    if r < el.p() {
        return Err(Error::InvalidParameter(format!(
            "inclusion needs r >= p, got p = {}, r = {r}",
            el.p()
        )));
    }
    let lhs = el.seminorm(q)?;
    let norm_r = lp_seminorm(el.rep(), q, r, el.quadrature())?;
    let len = el.domain().length();
    Ok((lhs, len.powf(el.p().recip() - r.recip()) * norm_r))
}

fn check_sub(curve: &PiecewiseCurve, sub: Interval, target: Interval) -> Result<()> {
    Interval::new(sub.a, sub.b)?;
    Interval::new(target.a, target.b)?;
    let dom = curve.domain();
    if sub.a < dom.a && !knots_close(sub.a, dom.a) || sub.b > dom.b && !knots_close(sub.b, dom.b) {
        return Err(Error::InvalidParameter(format!(
            "{sub} is not inside the domain {dom}"
        )));
    }
    Ok(())
}

/// `γ∘f` on `target = [c, d]` with `f(t) = α + (t - c)(β - α)/(d - c)`
/// mapping onto `sub = [α, β]`.
pub fn reparam_affine(curve: &PiecewiseCurve, sub: Interval, target: Interval) -> Result<PiecewiseCurve> {
    check_sub(curve, sub, target)?;
    let dom = curve.domain();
    let (alpha, beta) = (sub.a.max(dom.a), sub.b.min(dom.b));
    let (c, d) = (target.a, target.b);
    let slope = (beta - alpha) / (d - c);
    let back = |s: f64| c + (s - alpha) / slope;
    let mut segments = Vec::new();
    let mut fillers = Vec::new();
    for p in curve.segments() {
        let lo = p.lo.max(alpha);
        let hi = p.hi.min(beta);
        if hi <= lo || knots_close(lo, hi) {
            continue;
        }
        let (l, h) = (back(lo), back(hi));
        let (l, h) = (
            if knots_close(l, c) { c } else { l },
            if knots_close(h, d) { d } else { h },
        );
        if p.filler {
            fillers.push((l, h));
        }
        segments.push(Piece::new(l, h, p.f.affine_pullback(alpha, c, slope)));
    }
    let mut out = PiecewiseCurve::new(target, curve.dim(), segments, curve.default_value().clone())?;
    if !fillers.is_empty() {
        // Filler supports stay fillers and keep counting toward the deficit.
        out = mark_fillers(out, &fillers)?;
    }
    Ok(out)
}

fn mark_fillers(curve: PiecewiseCurve, fillers: &[(f64, f64)]) -> Result<PiecewiseCurve> {
    let pieces: Vec<Piece> = curve
        .segments()
        .iter()
        .filter(|s| !fillers.iter().any(|&(l, h)| knots_close(l, s.lo) && knots_close(h, s.hi)))
        .cloned()
        .collect();
    PiecewiseCurve::new(curve.domain(), curve.dim(), pieces, curve.default_value().clone())
}

/// Restrictions to consecutive cells of `a = t_0 < … < t_n = b`.
pub fn split(curve: &PiecewiseCurve, partition: &[f64]) -> Result<Vec<PiecewiseCurve>> {
    let dom = curve.domain();
    if partition.len() < 2
        || !knots_close(partition[0], dom.a)
        || !knots_close(partition[partition.len() - 1], dom.b)
        || partition.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidParameter(
            "partition must increase strictly from a to b".into(),
        ));
    }
    let mut knots = partition.to_vec();
    knots[0] = dom.a;
    let last = knots.len() - 1;
    knots[last] = dom.b;
    knots
        .windows(2)
        .map(|w| curve.restrict(w[0], w[1]))
        .collect()
}

/// Concatenates curves on abutting domains.
pub fn glue(parts: &[PiecewiseCurve]) -> Result<PiecewiseCurve> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to glue".into()))?;
    let dim = first.dim();
    let mut pieces: Vec<Piece> = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        if part.dim() != dim {
            return Err(Error::IncompatibleDomains(format!(
                "part {i} has dimension {}, expected {dim}",
                part.dim()
            )));
        }
        if i > 0 {
            let prev = parts[i - 1].domain();
            if !knots_close(prev.b, part.domain().a) {
                return Err(Error::IncompatibleDomains(format!(
                    "{prev} and {} do not abut",
                    part.domain()
                )));
            }
        }
        let a = if i == 0 { part.domain().a } else { parts[i - 1].domain().b };
        for s in part.pieces() {
            let mut s = s.clone();
            if knots_close(s.lo, a) {
                s.lo = a;
            }
            pieces.push(s);
        }
    }
    let domain = Interval::new(first.domain().a, parts[parts.len() - 1].domain().b)?;
    PiecewiseCurve::new(domain, dim, pieces, first.default_value().clone())
}

/// `γ_{n,k}(t) = (1/n) γ(a + (k(b - a) + t - a)/n)` for `k = 0..n`.
pub fn subdivide(curve: &PiecewiseCurve, n: usize) -> Result<Vec<PiecewiseCurve>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let dom = curve.domain();
    let h = dom.length() / n as f64;
    (0..n)
        .map(|k| {
            let lo = dom.a + k as f64 * h;
            let hi = if k + 1 == n { dom.b } else { dom.a + (k + 1) as f64 * h };
            let sub = Interval { a: lo, b: hi };
            reparam_affine(curve, sub, dom).map(|c| c.scaled(1.0 / n as f64))
        })
        .collect()
}

type BaseFiberFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;
type DerivFn = Arc<
    dyn Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64>
        + Send
        + Sync,
>;
type BaseCheck = Arc<dyn Fn(&DVector<f64>) -> bool + Send + Sync>;

/// A continuous map `U × R^{fiber} -> R^{out}` that is linear in the fiber
/// argument, optionally with its derivative `df(u, v; ū, v̄)`.
#[derive(Clone)]
pub struct FiberLinearMap {
    pub name: String,
    pub base_dim: usize,
    pub fiber_dim: usize,
    pub out_dim: usize,
    map: BaseFiberFn,
    derivative: Option<DerivFn>,
    base_domain: Option<BaseCheck>,
    /// Set when the map ignores the base point and is `v -> A v`.
    linear: Option<DMatrix<f64>>,
}

impl fmt::Debug for FiberLinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FiberLinearMap({}: R^{} x R^{} -> R^{})",
            self.name, self.base_dim, self.fiber_dim, self.out_dim
        )
    }
}

impl FiberLinearMap {
    pub fn new<F>(name: &str, base_dim: usize, fiber_dim: usize, out_dim: usize, map: F) -> Self
    where
        F: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            base_dim,
            fiber_dim,
            out_dim,
            map: Arc::new(map),
            derivative: None,
            base_domain: None,
            linear: None,
        }
    }

    pub fn with_derivative<D>(mut self, d: D) -> Self
    where
        D: Fn(&DVector<f64>, &DVector<f64>, &DVector<f64>, &DVector<f64>) -> DVector<f64>
            + Send
            + Sync
            + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// Restricts the base argument to the open set `{u : inside(u)}`.
    pub fn with_base_domain<C>(mut self, inside: C) -> Self
    where
        C: Fn(&DVector<f64>) -> bool + Send + Sync + 'static,
    {
        self.base_domain = Some(Arc::new(inside));
        self
    }

    /// `(u, v) -> v`.
    pub fn projection(base_dim: usize, fiber_dim: usize) -> Self {
        let mut m = Self::linear(DMatrix::identity(fiber_dim, fiber_dim), base_dim);
        m.name = "projection".into();
        m
    }

    /// `(u, v) -> A v`.
    pub fn linear(a: DMatrix<f64>, base_dim: usize) -> Self {
        let (rows, cols) = a.shape();
        let a2 = a.clone();
        let a3 = a.clone();
        let mut m = Self::new("linear", base_dim, cols, rows, move |_, v| &a2 * v)
            .with_derivative(move |_, _, _, vbar| &a3 * vbar);
        m.linear = Some(a);
        m
    }

    /// Scalars: `(u, v) -> u v`.
    pub fn scalar_product() -> Self {
        Self::new("product", 1, 1, 1, |u, v| u * v[0])
            .with_derivative(|u, v, ubar, vbar| ubar * v[0] + u * vbar[0])
    }

    /// Scalars: `(u, v) -> exp(u) v`.
    pub fn exp_scaling() -> Self {
        Self::new("exp_scaling", 1, 1, 1, |u, v| v * u[0].exp())
            .with_derivative(|u, v, ubar, vbar| (v * ubar[0] + vbar) * u[0].exp())
    }

    /// Row-major `n x n` matrices: `(U, V) -> U V`.
    pub fn matrix_product(n: usize) -> Self {
        let mul = move |u: &DVector<f64>, v: &DVector<f64>| {
            let um = DMatrix::from_row_slice(n, n, u.as_slice());
            let vm = DMatrix::from_row_slice(n, n, v.as_slice());
            let p = um * vm;
            DVector::from_iterator(n * n, p.transpose().iter().copied())
        };
        Self::new("matrix_product", n * n, n * n, n * n, mul)
            .with_derivative(move |u, v, ubar, vbar| mul(ubar, v) + mul(u, vbar))
    }

    pub fn apply(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        (self.map)(u, v)
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn derivative(
        &self,
        u: &DVector<f64>,
        v: &DVector<f64>,
        ubar: &DVector<f64>,
        vbar: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let d = self.derivative.as_ref().ok_or_else(|| {
            Error::Unsupported(format!("{} has no registered derivative", self.name))
        })?;
        Ok(d(u, v, ubar, vbar))
    }

    pub fn base_contains(&self, u: &DVector<f64>) -> bool {
        self.base_domain.as_ref().is_none_or(|inside| inside(u))
    }
}

const RANGE_SAMPLES: usize = 257;

fn check_base_range(f: &FiberLinearMap, base: &PiecewiseCurve) -> Result<()> {
    if f.base_domain.is_none() {
        return Ok(());
    }
    let dom = base.domain();
    let mut ts: Vec<f64> = (0..RANGE_SAMPLES)
        .map(|i| dom.a + dom.length() * i as f64 / (RANGE_SAMPLES - 1) as f64)
        .collect();
    ts.extend(base.segments().iter().map(|p| 0.5 * (p.lo + p.hi)));
    for t in ts {
        let u = base.eval_left(t)?;
        if !f.base_contains(&u) {
            return Err(Error::DomainViolation(format!(
                "base curve leaves the domain of {} at t = {t}",
                f.name
            )));
        }
    }
    Ok(())
}

/// `t -> f(η(t), γ(t))`.
pub fn pushforward_fiberlinear(
    f: &FiberLinearMap,
    base: &PiecewiseCurve,
    curve: &PiecewiseCurve,
) -> Result<PiecewiseCurve> {
    if base.dim() != f.base_dim || curve.dim() != f.fiber_dim {
        return Err(Error::InvalidParameter(format!(
            "{f:?} applied to curves in R^{} and R^{}",
            base.dim(),
            curve.dim()
        )));
    }
    if !base.domain().same_as(&curve.domain()) {
        return Err(Error::IncompatibleDomains(format!(
            "{} vs {}",
            base.domain(),
            curve.domain()
        )));
    }
    check_base_range(f, base)?;
    if let Some(a) = &f.linear {
        return curve.linear_image(a);
    }
    let map = f.map.clone();
    lift_continuous(move |xs| map(&xs[0], &xs[1]), f.out_dim, &[base, curve])
}

/// `df∘(η, γ, η̄, γ̄)`, the derivative of `(η, γ) -> f∘(η, γ)` in the
/// direction `(η̄, γ̄)`.
pub fn theta_directional_derivative(
    f: &FiberLinearMap,
    base: &PiecewiseCurve,
    curve: &PiecewiseCurve,
    base_dir: &PiecewiseCurve,
    curve_dir: &PiecewiseCurve,
) -> Result<PiecewiseCurve> {
    let d = f
        .derivative
        .clone()
        .ok_or_else(|| Error::Unsupported(format!("{} has no registered derivative", f.name)))?;
    if base_dir.dim() != f.base_dim || curve_dir.dim() != f.fiber_dim {
        return Err(Error::InvalidParameter("direction dimensions".into()));
    }
    check_base_range(f, base)?;
    lift_continuous(
        move |xs| d(&xs[0], &xs[1], &xs[2], &xs[3]),
        f.out_dim,
        &[base, curve, base_dir, curve_dir],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    Forward,
    Central,
}

/// `‖DQ_h − df∘(η, γ, η̄, γ̄)‖_{L^1, q}` where `DQ_h` is the forward or
/// central difference quotient of `(η, γ) -> f∘(η, γ)`.
#[allow(clippy::too_many_arguments)]
pub fn theta_fd_error(
    f: &FiberLinearMap,
    base: &PiecewiseCurve,
    curve: &PiecewiseCurve,
    base_dir: &PiecewiseCurve,
    curve_dir: &PiecewiseCurve,
    h: f64,
    scheme: FdScheme,
    q: &Seminorm,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let exact = theta_directional_derivative(f, base, curve, base_dir, curve_dir)?;
    let shifted = |s: f64| -> Result<PiecewiseCurve> {
        let b = base.add(&base_dir.scaled(s))?;
        let c = curve.add(&curve_dir.scaled(s))?;
        pushforward_fiberlinear(f, &b, &c)
    };
    let quotient = match scheme {
        FdScheme::Forward => shifted(h)?
            .sub(&pushforward_fiberlinear(f, base, curve)?)?
            .scaled(1.0 / h),
        FdScheme::Central => shifted(h)?.sub(&shifted(-h)?)?.scaled(0.5 / h),
    };
    lp_seminorm(&quotient.sub(&exact)?, q, Exponent::Finite(1.0), cfg)
}
