//! Absolutely continuous curves `η(t) = η(a) + ∫_a^t γ` with `γ ∈ L^p`,
//! stored as the pair (start point, derivative class).

use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lebesgue::{
    glue, power_integral, pushforward_fiberlinear, reparam_affine, Exponent, FiberLinearMap,
    LpElement,
};
use crate::measurable::{knots_close, Interval, PieceFn, PiecewiseCurve, Seminorm};
use crate::quadrature::{integrate, QuadratureConfig};

/// `∫_s^t γ`, summed piece by piece; `s > t` flips the sign.
pub fn weak_integral(
    curve: &PiecewiseCurve,
    s: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<DVector<f64>> {
    let dom = curve.domain();
    for x in [s, t] {
        if !dom.contains(x) {
            return Err(Error::OutOfDomain {
                t: x,
                a: dom.a,
                b: dom.b,
            });
        }
    }
    if s > t {
        return weak_integral(curve, t, s, cfg).map(|v| -v);
    }
    let mut total = DVector::zeros(curve.dim());
    if s == t {
        return Ok(total);
    }
    let first = curve.segment_index(s).expect("inside domain");
    for piece in &curve.segments()[first..] {
        if piece.lo >= t {
            break;
        }
        let lo = piece.lo.max(s);
        let hi = piece.hi.min(t);
        if hi <= lo {
            continue;
        }
        match &piece.f {
            PieceFn::Constant(v) => total += v * (hi - lo),
            PieceFn::Power {
                coeff,
                origin,
                exponent,
            } => {
                if coeff.amax() == 0.0 {
                    continue;
                }
                // keep the singular origin recognisable after clipping
                let lo = if knots_close(lo, *origin) { *origin } else { lo };
                let hi = if knots_close(hi, *origin) { *origin } else { hi };
                let i = power_integral(lo, hi, *origin, *exponent).ok_or_else(|| {
                    Error::NotInLp(format!(
                        "|t - {origin}|^{exponent} is not integrable on [{lo}, {hi}]"
                    ))
                })?;
                total += coeff * i;
            }
            PieceFn::Func(f) => total += integrate(|x| f(x), lo, hi, cfg)?,
        }
    }
    Ok(total)
}

/// Upper bound on the number of memoised evaluation points per curve.
const CACHE_LIMIT: usize = 8192;

struct AcInner {
    start: DVector<f64>,
    deriv: LpElement,
    /// Sorted `(t, η(t))`, always containing `(a, start)`.
    cache: Mutex<Vec<(f64, DVector<f64>)>>,
}

/// An absolutely continuous curve. Clones share the evaluation cache.
#[derive(Clone)]
pub struct ACCurve(Arc<AcInner>);

impl fmt::Debug for ACCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ACCurve")
            .field("start", &self.0.start.as_slice())
            .field("deriv", &self.0.deriv)
            .finish()
    }
}

impl ACCurve {
    pub fn new(start: DVector<f64>, deriv: LpElement) -> Result<Self> {
        Self::with_knots(start, deriv, Vec::new())
    }

    /// Seeds the evaluation cache with known values `η(t_i)`; callers
    /// guarantee they equal `start + ∫_a^{t_i} deriv`.
    pub fn with_knots(
        start: DVector<f64>,
        deriv: LpElement,
        knots: Vec<(f64, DVector<f64>)>,
    ) -> Result<Self> {
        if start.len() != deriv.dim() {
            return Err(Error::InvalidParameter(format!(
                "start point in R^{} but derivative in R^{}",
                start.len(),
                deriv.dim()
            )));
        }
        let dom = deriv.domain();
        let mut cache = vec![(dom.a, start.clone())];
        for (t, v) in knots {
            if t > dom.a && t <= dom.b && v.len() == start.len() {
                cache.push((t, v));
            }
        }
        cache.sort_by(|x, y| x.0.total_cmp(&y.0));
        cache.dedup_by(|x, y| x.0 == y.0);
        Ok(Self(Arc::new(AcInner {
            start,
            deriv,
            cache: Mutex::new(cache),
        })))
    }

    /// Convenience constructor from a derivative representative.
    pub fn from_parts(
        start: DVector<f64>,
        deriv: PiecewiseCurve,
        p: Exponent,
        cfg: QuadratureConfig,
    ) -> Result<Self> {
        Self::new(start, LpElement::new(deriv, p, cfg)?)
    }

    pub fn start(&self) -> &DVector<f64> {
        &self.0.start
    }

    pub fn deriv(&self) -> &LpElement {
        &self.0.deriv
    }

    pub fn domain(&self) -> Interval {
        self.0.deriv.domain()
    }

    pub fn dim(&self) -> usize {
        self.0.start.len()
    }

    pub fn p(&self) -> Exponent {
        self.0.deriv.p()
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        self.0.deriv.quadrature()
    }

    /// `η(t) = η(a) + ∫_a^t γ`, integrating only from the nearest memoised
    /// point below `t`.
    pub fn eval(&self, t: f64) -> Result<DVector<f64>> {
        let dom = self.domain();
        if !dom.contains(t) {
            return Err(Error::OutOfDomain {
                t,
                a: dom.a,
                b: dom.b,
            });
        }
        if t == dom.a {
            return Ok(self.0.start.clone());
        }
        let (t0, v0) = {
            let cache = self.0.cache.lock().expect("cache lock");
            let i = cache.partition_point(|(s, _)| *s <= t);
            let (s, v) = &cache[i - 1];
            if *s == t {
                return Ok(v.clone());
            }
            (*s, v.clone())
        };
        let value = v0 + weak_integral(self.0.deriv.rep(), t0, t, self.quadrature())?;
        let mut cache = self.0.cache.lock().expect("cache lock");
        if cache.len() < CACHE_LIMIT {
            let i = cache.partition_point(|(s, _)| *s < t);
            if i == cache.len() || cache[i].0 != t {
                cache.insert(i, (t, value.clone()));
            }
        }
        Ok(value)
    }

    /// Continuous curve `t -> η(t)` as a single-piece measurable curve.
    pub fn as_continuous_curve(&self) -> PiecewiseCurve {
        let me = self.clone();
        PiecewiseCurve::from_fn(self.domain(), self.dim(), move |t| {
            me.eval(t).expect("t inside the domain")
        })
        .expect("valid domain")
    }

    /// Central difference `(η(t+h) - η(t-h)) / 2h`, meaningful where the
    /// derivative representative is continuous.
    pub fn derivative_recovery(&self, t: f64, h: f64) -> Result<DVector<f64>> {
        let dom = self.domain();
        if !(h > 0.0) || t - h < dom.a || t + h > dom.b {
            return Err(Error::InvalidParameter(format!(
                "need h > 0 with [t - h, t + h] inside {dom}"
            )));
        }
        if self
            .deriv()
            .rep()
            .exceptional_points()
            .iter()
            .any(|&x| knots_close(x, t))
        {
            return Err(Error::NonRecoverable(t));
        }
        Ok((self.eval(t + h)? - self.eval(t - h)?) / (2.0 * h))
    }

    /// `(sup_t q(η(t)), q(η(a)) + (b - a)^{1 - 1/p} ‖η'‖_{L^p, q})`.
    pub fn uniform_seminorm(&self, q: &Seminorm) -> Result<(f64, f64)> {
        q.check_dim(self.dim())?;
        let mut sup = 0.0f64;
        for t in dense_grid(self.deriv().rep(), 1024) {
            sup = sup.max(q.eval(&self.eval(t)?));
        }
        let len = self.domain().length();
        let bound = q.eval(self.start()) + len.powf(1.0 - self.p().recip()) * self.deriv().seminorm(q)?;
        Ok((sup, bound))
    }
}

/// Uniform grid plus all segment boundaries of `curve`, sorted.
pub(crate) fn dense_grid(curve: &PiecewiseCurve, n: usize) -> Vec<f64> {
    let dom = curve.domain();
    let mut ts: Vec<f64> = (0..=n)
        .map(|i| dom.a + dom.length() * i as f64 / n as f64)
        .collect();
    ts.extend(curve.breakpoints());
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.retain(|t| dom.contains(*t));
    ts
}

type MapFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type JvpFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;
type InsideFn = Arc<dyn Fn(&DVector<f64>) -> bool + Send + Sync>;

/// A `C^1` map `V ⊆ R^n -> R^m` with its derivative `df(x; v)`.
#[derive(Clone)]
pub struct C1Map {
    pub name: String,
    pub in_dim: usize,
    pub out_dim: usize,
    f: MapFn,
    df: JvpFn,
    inside: Option<InsideFn>,
}

impl fmt::Debug for C1Map {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C1Map({}: R^{} -> R^{})", self.name, self.in_dim, self.out_dim)
    }
}

impl C1Map {
    pub fn new<F, D>(name: &str, in_dim: usize, out_dim: usize, f: F, df: D) -> Self
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        D: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            in_dim,
            out_dim,
            f: Arc::new(f),
            df: Arc::new(df),
            inside: None,
        }
    }

    pub fn with_domain<C>(mut self, inside: C) -> Self
    where
        C: Fn(&DVector<f64>) -> bool + Send + Sync + 'static,
    {
        self.inside = Some(Arc::new(inside));
        self
    }

    pub fn square() -> Self {
        Self::new(
            "square",
            1,
            1,
            |x| x.map(|v| v * v),
            |x, v| v.component_mul(x) * 2.0,
        )
    }

    pub fn exp_componentwise(dim: usize) -> Self {
        Self::new(
            "exp",
            dim,
            dim,
            |x| x.map(f64::exp),
            |x, v| x.map(f64::exp).component_mul(v),
        )
    }

    pub fn linear(a: DMatrix<f64>) -> Self {
        let (m, n) = a.shape();
        let a2 = a.clone();
        Self::new("linear", n, m, move |x| &a * x, move |_, v| &a2 * v)
    }

    pub fn constant(c: DVector<f64>, in_dim: usize) -> Self {
        let m = c.len();
        Self::new("constant", in_dim, m, move |_| c.clone(), move |_, _| DVector::zeros(m))
    }

    /// `x -> β(x, w) = xᵀ B w` for a fixed second slot `w`.
    pub fn bilinear_pairing(b: DMatrix<f64>, w: DVector<f64>) -> Self {
        let bw = &b * &w;
        let n = bw.len();
        let bw2 = bw.clone();
        Self::new(
            "pairing",
            n,
            1,
            move |x| DVector::from_element(1, x.dot(&bw)),
            move |_, v| DVector::from_element(1, v.dot(&bw2)),
        )
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }

    pub fn differential(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        (self.df)(x, v)
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.inside.as_ref().is_none_or(|c| c(x))
    }

    fn differential_map(&self) -> FiberLinearMap {
        let df = self.df.clone();
        let mut m = FiberLinearMap::new(&self.name, self.in_dim, self.in_dim, self.out_dim, move |x, v| {
            df(x, v)
        });
        if let Some(inside) = self.inside.clone() {
            m = m.with_base_domain(move |x| inside(x));
        }
        m
    }
}

/// `f∘η`, whose derivative is `t -> df(η(t), γ(t))`.
pub fn pushforward_c1(f: &C1Map, eta: &ACCurve) -> Result<ACCurve> {
    if f.in_dim != eta.dim() {
        return Err(Error::InvalidParameter(format!(
            "{f:?} applied to a curve in R^{}",
            eta.dim()
        )));
    }
    for t in dense_grid(eta.deriv().rep(), 256) {
        if !f.contains(&eta.eval(t)?) {
            return Err(Error::DomainViolation(format!(
                "curve leaves the domain of {} at t = {t}",
                f.name
            )));
        }
    }
    let base = eta.as_continuous_curve();
    let deriv = pushforward_fiberlinear(&f.differential_map(), &base, eta.deriv().rep())?;
    ACCurve::from_parts(f.apply(eta.start()), deriv, eta.p(), *eta.quadrature())
}

/// `η∘f` for the affine `f: [c, d] -> [α, β]`; its derivative is
/// `(β - α)/(d - c) · γ∘f`.
pub fn reparam_affine_ac(eta: &ACCurve, sub: Interval, target: Interval) -> Result<ACCurve> {
    let rep = reparam_affine(eta.deriv().rep(), sub, target)?;
    let factor = sub.length() / target.length();
    ACCurve::from_parts(eta.eval(sub.a)?, rep.scaled(factor), eta.p(), *eta.quadrature())
}

pub fn split_ac(eta: &ACCurve, partition: &[f64]) -> Result<Vec<ACCurve>> {
    let parts = crate::lebesgue::split(eta.deriv().rep(), partition)?;
    parts
        .into_iter()
        .map(|rep| {
            let start = eta.eval(rep.domain().a)?;
            ACCurve::from_parts(start, rep, eta.p(), *eta.quadrature())
        })
        .collect()
}

/// Default junction tolerance `1e-9 (1 + |η_j(t_j)|)`.
pub fn default_match_tol(endpoint: &DVector<f64>) -> f64 {
    1e-9 * (1.0 + endpoint.norm())
}

/// Glues curves on abutting intervals whose endpoint values agree to
/// `match_tol` (the default when `None`).
pub fn glue_ac(parts: &[ACCurve], match_tol: Option<f64>) -> Result<ACCurve> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to glue".into()))?;
    for w in parts.windows(2) {
        let t = w[0].domain().b;
        let end = w[0].eval(t)?;
        let mismatch = (&end - w[1].start()).norm();
        let tol = match_tol.unwrap_or_else(|| default_match_tol(&end));
        if mismatch > tol {
            return Err(Error::DiscontinuousJunction { t, mismatch });
        }
    }
    let reps: Vec<PiecewiseCurve> = parts.iter().map(|p| p.deriv().rep().clone()).collect();
    let p = parts
        .iter()
        .map(ACCurve::p)
        .fold(first.p(), |acc, q| if q < acc { q } else { acc });
    ACCurve::from_parts(first.start().clone(), glue(&reps)?, p, *first.quadrature())
}

/// Tests `∫_a^t γ = 0` on a dense grid of `t`.
pub fn ae_zero_by_integrals(curve: &PiecewiseCurve, tol: f64, cfg: &QuadratureConfig) -> Result<bool> {
    let dom = curve.domain();
    let mut acc = DVector::zeros(curve.dim());
    let mut prev = dom.a;
    for t in dense_grid(curve, 512) {
        acc += weak_integral(curve, prev, t, cfg)?;
        prev = t;
        if acc.norm() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurable::ae_equal;
    use std::f64::consts::PI;

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn ac(start: f64, deriv: PiecewiseCurve, p: f64) -> ACCurve {
        ACCurve::from_parts(v1(start), deriv, Exponent::new(p).unwrap(), cfg()).unwrap()
    }

    #[test]
    fn weak_integral_examples() {
        let d = Interval::new(0.0, PI).unwrap();
        let cs = PiecewiseCurve::from_fn(d, 2, |t| DVector::from_vec(vec![t.cos(), t.sin()])).unwrap();
        let v = weak_integral(&cs, 0.0, PI, &cfg()).unwrap();
        assert!(v[0].abs() < 1e-14 && (v[1] - 2.0).abs() < 1e-14);
        assert_eq!(weak_integral(&cs, 1.0, 1.0, &cfg()).unwrap().norm(), 0.0);
        let back = weak_integral(&cs, PI, 0.0, &cfg()).unwrap();
        assert!((back[1] + 2.0).abs() < 1e-14);

        let a = DVector::from_vec(vec![1.0, 4.0]);
        let b = DVector::from_vec(vec![-3.0, 2.0]);
        let step = PiecewiseCurve::step(Interval::unit(), &[0.5], vec![a.clone(), b.clone()]).unwrap();
        let v = weak_integral(&step, 0.0, 1.0, &cfg()).unwrap();
        assert!((v - (a + b) / 2.0).norm() < 1e-15);
    }

    #[test]
    fn weak_integral_is_additive_and_contracts_seminorms() {
        let c = PiecewiseCurve::scalar_fn(Interval::unit(), |t| (7.0 * t).sin() - 0.2).unwrap();
        let whole = weak_integral(&c, 0.0, 1.0, &cfg()).unwrap();
        let parts = weak_integral(&c, 0.0, 0.37, &cfg()).unwrap() + weak_integral(&c, 0.37, 1.0, &cfg()).unwrap();
        assert!((&whole - parts).norm() < 1e-14);
        let l1 = crate::lebesgue::lp_seminorm(&c, &Seminorm::Euclidean, Exponent::Finite(1.0), &cfg()).unwrap();
        assert!(whole.norm() <= l1);
    }

    #[test]
    fn eval_examples() {
        let v = PiecewiseCurve::constant(Interval::new(1.0, 3.0).unwrap(), v1(2.5)).unwrap();
        let eta = ac(1.0, v, 1.0);
        assert_eq!(eta.eval(1.0).unwrap()[0], 1.0);
        assert!((eta.eval(2.2).unwrap()[0] - (1.0 + 1.2 * 2.5)).abs() < 1e-14);
        assert!(matches!(eta.eval(3.5), Err(Error::OutOfDomain { .. })));

        let sing = PiecewiseCurve::power(Interval::unit(), v1(1.0), -1.0 / 3.0).unwrap();
        let eta = ac(0.0, sing, 1.0);
        assert!((eta.eval(1.0).unwrap()[0] - 1.5).abs() < 1e-14);
        assert!((eta.eval(0.125).unwrap()[0] - 1.5 * 0.25).abs() < 1e-14);
    }

    #[test]
    fn eval_is_order_independent() {
        let c = PiecewiseCurve::scalar_fn(Interval::unit(), |t| (3.0 * t).cos()).unwrap();
        let fwd = ac(0.0, c.clone(), 2.0);
        let rev = ac(0.0, c, 2.0);
        let ts: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
        let a: Vec<f64> = ts.iter().map(|&t| fwd.eval(t).unwrap()[0]).collect();
        let b: Vec<f64> = ts.iter().rev().map(|&t| rev.eval(t).unwrap()[0]).collect();
        for (x, y) in a.iter().zip(b.iter().rev()) {
            assert!((x - y).abs() < 1e-14);
        }
        for (t, x) in ts.iter().zip(&a) {
            assert!((x - (3.0 * t).sin() / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_recovery_examples() {
        let eta = ac(0.0, PiecewiseCurve::scalar_fn(Interval::unit(), f64::sin).unwrap(), 1.0);
        let t = PI / 4.0;
        let d = eta.derivative_recovery(t, 1e-5).unwrap();
        assert!((d[0] - t.sin()).abs() < 1e-8);

        let eta = ac(0.0, PiecewiseCurve::constant(Interval::unit(), v1(3.0)).unwrap(), 1.0);
        assert!((eta.derivative_recovery(0.3, 0.1).unwrap()[0] - 3.0).abs() < 1e-13);

        let step = PiecewiseCurve::step(Interval::unit(), &[0.5], vec![v1(0.0), v1(1.0)]).unwrap();
        let eta = ac(0.0, step, 1.0);
        assert!(matches!(eta.derivative_recovery(0.5, 1e-3), Err(Error::NonRecoverable(_))));
    }

    #[test]
    fn pushforward_examples() {
        let d = Interval::unit();
        let eta = ac(0.0, PiecewiseCurve::constant(d, v1(1.0)).unwrap(), 1.0);
        let sq = pushforward_c1(&C1Map::square(), &eta).unwrap();
        for t in [0.1, 0.5, 0.9] {
            assert!((sq.deriv().rep().eval(t).unwrap()[0] - 2.0 * t).abs() < 1e-14);
            assert!((sq.eval(t).unwrap()[0] - t * t).abs() < 1e-13);
        }

        let a = DMatrix::from_row_slice(2, 1, &[2.0, -1.0]);
        let lin = pushforward_c1(&C1Map::linear(a), &eta).unwrap();
        assert!((lin.eval(0.5).unwrap() - DVector::from_vec(vec![1.0, -0.5])).norm() < 1e-14);

        let c = pushforward_c1(&C1Map::constant(v1(4.0), 1), &eta).unwrap();
        assert!(ae_zero_by_integrals(c.deriv().rep(), 1e-14, &cfg()).unwrap());
        assert_eq!(c.eval(0.7).unwrap()[0], 4.0);

        let bounded = C1Map::square().with_domain(|x| x[0] < 0.5);
        assert!(matches!(pushforward_c1(&bounded, &eta), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn reparam_examples() {
        let eta = ac(0.0, PiecewiseCurve::scalar_fn(Interval::unit(), |t| 2.0 * t).unwrap(), 1.0);
        let r = reparam_affine_ac(&eta, Interval::unit(), Interval::new(0.0, 2.0).unwrap()).unwrap();
        for t in [0.3, 1.0, 1.7] {
            assert!((r.deriv().rep().eval(t).unwrap()[0] - t / 2.0).abs() < 1e-14);
            assert!((r.eval(t).unwrap()[0] - (t / 2.0) * (t / 2.0)).abs() < 1e-13);
        }
        let h = reparam_affine_ac(&eta, Interval { a: 0.5, b: 1.0 }, Interval::unit()).unwrap();
        assert!((h.start()[0] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn split_glue_examples() {
        let eta = ac(0.0, PiecewiseCurve::scalar_fn(Interval::unit(), |t| 2.0 * t).unwrap(), 1.0);
        let parts = split_ac(&eta, &[0.0, 0.5, 1.0]).unwrap();
        let back = glue_ac(&parts, None).unwrap();
        for t in [0.2, 0.5, 0.8] {
            assert!((back.eval(t).unwrap()[0] - t * t).abs() < 1e-13);
        }

        let one = PiecewiseCurve::constant(Interval::new(0.0, 0.5).unwrap(), v1(1.0)).unwrap();
        let one2 = PiecewiseCurve::constant(Interval::new(0.5, 1.0).unwrap(), v1(1.0)).unwrap();
        let a = ac(0.0, one, 1.0);
        let b = ac(1.5, one2, 1.0);
        assert!(matches!(glue_ac(&[a, b], None), Err(Error::DiscontinuousJunction { .. })));

        let s = ac(0.0, PiecewiseCurve::scalar_fn(Interval::new(0.0, 3.0).unwrap(), f64::sin).unwrap(), 1.0);
        let parts = split_ac(&s, &[0.0, 0.9, 2.1, 3.0]).unwrap();
        let back = glue_ac(&parts, None).unwrap();
        for i in 0..=30 {
            let t = i as f64 * 0.1;
            assert!((back.eval(t).unwrap()[0] - s.eval(t).unwrap()[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn uniform_seminorm_examples() {
        let q = Seminorm::AbsCoordinate(0);
        let eta = ac(0.0, PiecewiseCurve::constant(Interval::unit(), v1(1.0)).unwrap(), 1.0);
        let (sup, bound) = eta.uniform_seminorm(&q).unwrap();
        assert!((sup - 1.0).abs() < 1e-14 && (bound - 1.0).abs() < 1e-14);

        let c = ac(2.0, PiecewiseCurve::zero(Interval::unit(), 1).unwrap(), 1.0);
        assert_eq!(c.uniform_seminorm(&q).unwrap(), (2.0, 2.0));

        let s = ac(0.0, PiecewiseCurve::scalar_fn(Interval::new(0.0, PI).unwrap(), f64::sin).unwrap(), f64::INFINITY);
        let (sup, bound) = s.uniform_seminorm(&q).unwrap();
        assert!((sup - 2.0).abs() < 1e-12);
        assert!((bound - PI).abs() < 1e-12);
    }

    #[test]
    fn ae_zero_examples() {
        let z = PiecewiseCurve::zero(Interval::unit(), 1).unwrap();
        assert!(ae_zero_by_integrals(&z, 1e-14, &cfg()).unwrap());
        let point = PiecewiseCurve::step(Interval::unit(), &[0.5], vec![v1(0.0), v1(0.0)])
            .unwrap()
            .with_default(v1(1.0))
            .unwrap();
        assert!(ae_zero_by_integrals(&point, 1e-14, &cfg()).unwrap());
        assert!(ae_equal(&point, &z, 0.0));
        let s = PiecewiseCurve::scalar_fn(Interval::new(0.0, PI).unwrap(), f64::sin).unwrap();
        assert!(!ae_zero_by_integrals(&s, 1e-10, &cfg()).unwrap());
        assert!((weak_integral(&s, 0.0, PI / 2.0, &cfg()).unwrap()[0] - 1.0).abs() < 1e-14);
    }
}
