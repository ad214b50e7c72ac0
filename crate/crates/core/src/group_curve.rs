//! Group-valued absolutely continuous curves, stored as matrix-valued
//! [`ACCurve`]s, with the derivative class, the left logarithmic derivative
//! and the pointwise group operations.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use crate::ac_curve::{reparam_affine_ac, split_ac, ACCurve};
use crate::error::{Error, Result};
use crate::lebesgue::{Exponent, LpElement};
use crate::lie_core::{mat_to_vec, vec_to_mat, GroupElement, Homomorphism, MatrixGroup};
use crate::measurable::{lift_continuous, Interval, PiecewiseCurve};
use crate::quadrature::{gauss_legendre, QuadratureConfig};

type MatEval = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Sample count for membership certification.
const MEMBERSHIP_SAMPLES: usize = 33;

#[derive(Clone)]
pub struct GroupACCurve {
    group: MatrixGroup,
    mat_curve: ACCurve,
    /// Exact evaluator agreeing with `mat_curve`; used instead of
    /// integrating the derivative when present.
    direct: Option<MatEval>,
    delta: Arc<OnceLock<LpElement>>,
}

impl fmt::Debug for GroupACCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupACCurve")
            .field("group", &self.group)
            .field("domain", &self.domain())
            .field("direct", &self.direct.is_some())
            .finish()
    }
}

fn inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(m.nrows(), m.ncols(), f64::NAN))
}

impl GroupACCurve {
    /// Wraps a matrix-valued curve, certifying membership on samples.
    pub fn from_ac(group: MatrixGroup, mat_curve: ACCurve) -> Result<Self> {
        Self::build(group, mat_curve, None)
    }

    /// Like [`GroupACCurve::from_ac`] with an exact evaluator; the caller
    /// guarantees `eval(t) = mat_curve.eval(t)`.
    pub fn with_evaluator<F>(group: MatrixGroup, mat_curve: ACCurve, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self::build(group, mat_curve, Some(Arc::new(eval)))
    }

    fn build(group: MatrixGroup, mat_curve: ACCurve, direct: Option<MatEval>) -> Result<Self> {
        let n = group.ambient_dim();
        if mat_curve.dim() != n * n {
            return Err(Error::InconsistentCurve(format!(
                "{group} needs {}-dimensional matrix curves, got {}",
                n * n,
                mat_curve.dim()
            )));
        }
        let curve = Self {
            group,
            mat_curve,
            direct,
            delta: Arc::new(OnceLock::new()),
        };
        let dom = curve.domain();
        for i in 0..MEMBERSHIP_SAMPLES {
            let t = dom.a + dom.length() * i as f64 / (MEMBERSHIP_SAMPLES - 1) as f64;
            let m = curve.eval(t)?;
            if !group.contains(&m) {
                return Err(Error::InconsistentCurve(format!(
                    "value at t = {t} is not in {group} (defect {:e})",
                    group.membership_defect(&m)
                )));
            }
        }
        Ok(curve)
    }

    /// `η` given in closed form together with `η'`.
    pub fn from_closed_form<F, D>(
        group: MatrixGroup,
        domain: Interval,
        p: Exponent,
        cfg: QuadratureConfig,
        eta: F,
        eta_dot: D,
    ) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
        D: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        let n = group.ambient_dim();
        let deriv = PiecewiseCurve::from_fn(domain, n * n, move |t| mat_to_vec(&eta_dot(t)))?;
        let mat_curve = ACCurve::new(mat_to_vec(&eta(domain.a)), LpElement::new(deriv, p, cfg)?)?;
        Self::with_evaluator(group, mat_curve, eta)
    }

    pub fn constant(group: MatrixGroup, domain: Interval, g: &GroupElement, p: Exponent, cfg: QuadratureConfig) -> Result<Self> {
        if g.group() != group {
            return Err(Error::Incompatible(format!("{} vs {group}", g.group())));
        }
        let n = group.ambient_dim();
        let m = g.matrix().clone();
        let deriv = PiecewiseCurve::zero(domain, n * n)?;
        let mat_curve = ACCurve::new(mat_to_vec(&m), LpElement::new(deriv, p, cfg)?)?;
        Self::with_evaluator(group, mat_curve, move |_| m.clone())
    }

    /// Builds a curve from an evaluator and a derivative representative
    /// that is certified to be in `L^p` by construction.
    fn derived<F>(group: MatrixGroup, deriv: PiecewiseCurve, p: Exponent, cfg: QuadratureConfig, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        let start = mat_to_vec(&eval(deriv.domain().a));
        let mat_curve = ACCurve::new(start, LpElement::from_trusted(deriv, p, cfg))?;
        Self::with_evaluator(group, mat_curve, eval)
    }

    pub fn group(&self) -> MatrixGroup {
        self.group
    }

    pub fn domain(&self) -> Interval {
        self.mat_curve.domain()
    }

    pub fn p(&self) -> Exponent {
        self.mat_curve.p()
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        self.mat_curve.quadrature()
    }

    pub fn mat_curve(&self) -> &ACCurve {
        &self.mat_curve
    }

    pub fn has_direct_evaluator(&self) -> bool {
        self.direct.is_some()
    }

    pub fn eval(&self, t: f64) -> Result<DMatrix<f64>> {
        let dom = self.domain();
        if !dom.contains(t) {
            return Err(Error::OutOfDomain {
                t,
                a: dom.a,
                b: dom.b,
            });
        }
        match &self.direct {
            Some(f) => Ok(f(t)),
            None => Ok(vec_to_mat(&self.mat_curve.eval(t)?, self.group.ambient_dim())),
        }
    }

    pub fn eval_group(&self, t: f64) -> Result<GroupElement> {
        GroupElement::new(self.group, self.eval(t)?)
    }

    fn evaluator(&self) -> MatEval {
        match &self.direct {
            Some(f) => f.clone(),
            None => {
                let c = self.mat_curve.clone();
                let n = self.group.ambient_dim();
                Arc::new(move |t| vec_to_mat(&c.eval(t).expect("t inside the domain"), n))
            }
        }
    }

    /// `t -> η(t)` as a continuous measurable curve (row-major).
    pub fn values_curve(&self) -> PiecewiseCurve {
        let f = self.evaluator();
        let n = self.group.ambient_dim();
        PiecewiseCurve::from_fn(self.domain(), n * n, move |t| mat_to_vec(&f(t))).expect("valid domain")
    }

    /// The derivative class `η̇` (row-major matrices).
    pub fn dot(&self) -> &PiecewiseCurve {
        self.mat_curve.deriv().rep()
    }

    /// `δ(η) = η⁻¹ η̇`, computed once from the derivative class.
    pub fn delta(&self) -> Result<LpElement> {
        if let Some(d) = self.delta.get() {
            return Ok(d.clone());
        }
        let n = self.group.ambient_dim();
        let rep = lift_continuous(
            move |xs| {
                let eta = vec_to_mat(&xs[0], n);
                mat_to_vec(&(inverse(&eta) * vec_to_mat(&xs[1], n)))
            },
            n * n,
            &[&self.values_curve(), self.dot()],
        )?;
        for piece in rep.pieces() {
            for s in [0.25, 0.5, 0.75] {
                let t = piece.lo + s * piece.length();
                let a = vec_to_mat(&piece.eval(t), n);
                if !self.group.in_algebra(&a) {
                    return Err(Error::InconsistentCurve(format!(
                        "η⁻¹η̇ leaves the algebra of {} at t = {t} (defect {:e})",
                        self.group,
                        self.group.algebra_defect(&a)
                    )));
                }
            }
        }
        let el = LpElement::from_trusted(rep, self.p(), *self.quadrature());
        Ok(self.delta.get_or_init(|| el).clone())
    }

    /// Whether `η(t) = η(a)` on a uniform sample grid to `tol`.
    pub fn is_constant(&self, tol: f64) -> Result<bool> {
        let dom = self.domain();
        let start = self.eval(dom.a)?;
        for i in 1..=256 {
            let t = dom.a + dom.length() * i as f64 / 256.0;
            if (self.eval(t)? - &start).norm() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn check_pair(eta: &GroupACCurve, zeta: &GroupACCurve) -> Result<()> {
    if eta.group != zeta.group {
        return Err(Error::Incompatible(format!("{} vs {}", eta.group, zeta.group)));
    }
    if !eta.domain().same_as(&zeta.domain()) {
        return Err(Error::IncompatibleDomains(format!(
            "{} vs {}",
            eta.domain(),
            zeta.domain()
        )));
    }
    Ok(())
}

/// `t -> η(t) ζ(t)` with derivative `γ(t).ζ(t) + η(t).ξ(t)`.
pub fn product(eta: &GroupACCurve, zeta: &GroupACCurve) -> Result<GroupACCurve> {
    check_pair(eta, zeta)?;
    let n = eta.group.ambient_dim();
    let deriv = lift_continuous(
        move |xs| {
            let m = |i: usize| vec_to_mat(&xs[i], n);
            mat_to_vec(&(m(1) * m(2) + m(0) * m(3)))
        },
        n * n,
        &[&eta.values_curve(), eta.dot(), &zeta.values_curve(), zeta.dot()],
    )?;
    let (f, g) = (eta.evaluator(), zeta.evaluator());
    let p = if eta.p() < zeta.p() { eta.p() } else { zeta.p() };
    GroupACCurve::derived(eta.group, deriv, p, *eta.quadrature(), move |t| f(t) * g(t))
}

/// `t -> η(t)⁻¹` with derivative `-η(t)⁻¹.γ(t).η(t)⁻¹`.
pub fn inverse_curve(eta: &GroupACCurve) -> Result<GroupACCurve> {
    let n = eta.group.ambient_dim();
    let f = eta.evaluator();
    let dom = eta.domain();
    for i in 0..MEMBERSHIP_SAMPLES {
        let t = dom.a + dom.length() * i as f64 / (MEMBERSHIP_SAMPLES - 1) as f64;
        if f(t).try_inverse().is_none() {
            return Err(Error::NumericalSingularity(format!("η({t}) is not invertible")));
        }
    }
    let deriv = lift_continuous(
        move |xs| {
            let inv = inverse(&vec_to_mat(&xs[0], n));
            mat_to_vec(&-(&inv * vec_to_mat(&xs[1], n) * &inv))
        },
        n * n,
        &[&eta.values_curve(), eta.dot()],
    )?;
    GroupACCurve::derived(eta.group, deriv, eta.p(), *eta.quadrature(), move |t| inverse(&f(t)))
}

/// `t -> g η(t)`.
pub fn left_translate(g: &GroupElement, eta: &GroupACCurve) -> Result<GroupACCurve> {
    if g.group() != eta.group {
        return Err(Error::Incompatible(format!("{} vs {}", g.group(), eta.group)));
    }
    let m = g.matrix().clone();
    let deriv = eta.dot().linear_image(&left_mult_operator(&m))?;
    let f = eta.evaluator();
    GroupACCurve::derived(eta.group, deriv, eta.p(), *eta.quadrature(), move |t| &m * f(t))
}

/// Matrix of `X -> M X` acting on row-major flattenings.
fn left_mult_operator(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut op = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                op[(i * n + j, k * n + j)] = m[(i, k)];
            }
        }
    }
    op
}

/// `f∘η`, with derivative `f(η(t)) L(f)(δ(η)(t))`.
pub fn pushforward_hom(f: &Homomorphism, eta: &GroupACCurve) -> Result<GroupACCurve> {
    if f.source != eta.group {
        return Err(Error::Incompatible(format!("{f:?} applied to a curve in {}", eta.group)));
    }
    let n = eta.group.ambient_dim();
    let m = f.target.ambient_dim();
    let delta = eta.delta()?;
    let (fm, fa) = (f.clone(), f.clone());
    let deriv = lift_continuous(
        move |xs| {
            let g = fm.map_matrix(&vec_to_mat(&xs[0], n));
            mat_to_vec(&(g * fm.algebra_matrix(&vec_to_mat(&xs[1], n))))
        },
        m * m,
        &[&eta.values_curve(), delta.rep()],
    )?;
    let ev = eta.evaluator();
    GroupACCurve::derived(f.target, deriv, eta.p(), *eta.quadrature(), move |t| fa.map_matrix(&ev(t)))
}

/// `L(f)∘δ(η)`.
pub fn delta_homomorphism(f: &Homomorphism, eta: &GroupACCurve) -> Result<LpElement> {
    if f.source != eta.group {
        return Err(Error::Incompatible(format!("{f:?} applied to a curve in {}", eta.group)));
    }
    let n = eta.group.ambient_dim();
    let m = f.target.ambient_dim();
    let delta = eta.delta()?;
    let fa = f.clone();
    let rep = lift_continuous(
        move |xs| mat_to_vec(&fa.algebra_matrix(&vec_to_mat(&xs[0], n))),
        m * m,
        &[delta.rep()],
    )?;
    Ok(LpElement::from_trusted(rep, delta.p(), *delta.quadrature()))
}

/// `η∘f` for the affine `f: [c, d] -> [α, β]`.
pub fn reparam_group(eta: &GroupACCurve, sub: Interval, target: Interval) -> Result<GroupACCurve> {
    let mat_curve = reparam_affine_ac(&eta.mat_curve, sub, target)?;
    let f = eta.evaluator();
    let slope = sub.length() / target.length();
    let (alpha, c) = (sub.a, target.a);
    let b = eta.domain().b;
    GroupACCurve::with_evaluator(eta.group, mat_curve, move |t| f((alpha + slope * (t - c)).min(b)))
}

pub fn split_group(eta: &GroupACCurve, partition: &[f64]) -> Result<Vec<GroupACCurve>> {
    split_ac(&eta.mat_curve, partition)?
        .into_iter()
        .map(|part| match &eta.direct {
            Some(f) => {
                let f = f.clone();
                GroupACCurve::with_evaluator(eta.group, part, move |t| f(t))
            }
            None => GroupACCurve::from_ac(eta.group, part),
        })
        .collect()
}

/// Glues curves on abutting intervals; the endpoint group elements must
/// agree to `match_tol` (default `1e-9 (1 + ‖η_j(t_j)‖_F)`).
pub fn glue_group(parts: &[GroupACCurve], match_tol: Option<f64>) -> Result<GroupACCurve> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to glue".into()))?;
    for w in parts.windows(2) {
        if w[0].group != w[1].group {
            return Err(Error::Incompatible(format!("{} vs {}", w[0].group, w[1].group)));
        }
        let t = w[0].domain().b;
        let end = w[0].eval(t)?;
        let next = w[1].eval(w[1].domain().a)?;
        let mismatch = (&end - &next).norm();
        let tol = match_tol.unwrap_or(1e-9 * (1.0 + end.norm()));
        if mismatch > tol {
            return Err(Error::DiscontinuousJunction { t, mismatch });
        }
    }
    let mats: Vec<ACCurve> = parts.iter().map(|p| p.mat_curve.clone()).collect();
    let mat_curve = crate::ac_curve::glue_ac(&mats, Some(f64::INFINITY))?;
    let evals: Vec<(f64, MatEval)> = parts.iter().map(|p| (p.domain().b, p.evaluator())).collect();
    GroupACCurve::with_evaluator(first.group, mat_curve, move |t| {
        let i = evals.partition_point(|(b, _)| *b < t).min(evals.len() - 1);
        (evals[i].1)(t)
    })
}

/// `∫ ‖x(t) - y(t)‖` by `m`-point Gauss–Legendre on every interval of the
/// common refinement; junction values are never sampled.
pub fn discrete_l1_distance(x: &PiecewiseCurve, y: &PiecewiseCurve, m: usize) -> Result<f64> {
    let diff = x.sub(y)?;
    let nodes = gauss_legendre(m);
    let mut total = 0.0;
    for piece in diff.segments() {
        let half = 0.5 * piece.length();
        let mid = 0.5 * (piece.lo + piece.hi);
        total += nodes
            .iter()
            .map(|(u, w)| w * half * piece.eval(mid + half * u).norm())
            .sum::<f64>();
    }
    Ok(total)
}

/// Largest `‖x(t) - y(t)‖` over `m` Gauss nodes of every refined interval.
pub fn discrete_sup_distance(x: &PiecewiseCurve, y: &PiecewiseCurve, m: usize) -> Result<f64> {
    let diff = x.sub(y)?;
    let nodes = gauss_legendre(m);
    let mut sup = 0.0f64;
    for piece in diff.segments() {
        let half = 0.5 * piece.length();
        let mid = 0.5 * (piece.lo + piece.hi);
        for (u, _) in &nodes {
            sup = sup.max(piece.eval(mid + half * u).norm());
        }
    }
    Ok(sup)
}

/// Row-major flattening helper for constant algebra-valued curves.
pub fn constant_control(domain: Interval, a: &DMatrix<f64>) -> Result<PiecewiseCurve> {
    PiecewiseCurve::constant(domain, mat_to_vec(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::{hom_det, so3_generator};
    use nalgebra::DVector;

    fn exp_curve(group: MatrixGroup, a: DMatrix<f64>) -> GroupACCurve {
        let a2 = a.clone();
        let g = group;
        GroupACCurve::from_closed_form(
            group,
            Interval::unit(),
            Exponent::Finite(1.0),
            QuadratureConfig::default(),
            move |t| g.exp_matrix(&(&a * t)),
            move |t| g.exp_matrix(&(&a2 * t)) * &a2,
        )
        .unwrap()
    }

    fn gl2_a() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.3, 1.0, -0.7, 0.2])
    }

    fn max_gap(x: &PiecewiseCurve, y: &PiecewiseCurve) -> f64 {
        discrete_sup_distance(x, y, 7).unwrap()
    }

    #[test]
    fn dot_and_delta_of_one_parameter_subgroup() {
        let a = gl2_a();
        let eta = exp_curve(MatrixGroup::gl(2), a.clone());
        let t = 0.37;
        let want = (&a * t).exp() * &a;
        assert!((vec_to_mat(&eta.dot().eval(t).unwrap(), 2) - want).amax() < 1e-14);
        let d = eta.delta().unwrap();
        let c = constant_control(Interval::unit(), &a).unwrap();
        assert!(max_gap(d.rep(), &c) < 1e-13);
        assert_eq!(eta.eval(0.0).unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn constant_curves_have_zero_delta_and_conversely() {
        let g = MatrixGroup::SpecialOrthogonal3;
        let el = GroupElement::new(g, g.exp_matrix(&(so3_generator(0) * 0.8))).unwrap();
        let c = GroupACCurve::constant(g, Interval::unit(), &el, Exponent::Finite(2.0), QuadratureConfig::default()).unwrap();
        let d = c.delta().unwrap();
        assert!(discrete_l1_distance(d.rep(), &PiecewiseCurve::zero(Interval::unit(), 9).unwrap(), 5).unwrap() == 0.0);
        assert!(c.is_constant(1e-8).unwrap());
        let moving = exp_curve(g, so3_generator(2));
        assert!(!moving.is_constant(1e-8).unwrap());
        assert!(discrete_l1_distance(moving.delta().unwrap().rep(), &PiecewiseCurve::zero(Interval::unit(), 9).unwrap(), 5).unwrap() > 0.5);
    }

    #[test]
    fn left_translation_keeps_delta() {
        let g = MatrixGroup::gl(2);
        let eta = exp_curve(g, gl2_a());
        let h = GroupElement::new(g, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 3.0])).unwrap();
        let moved = left_translate(&h, &eta).unwrap();
        assert!(max_gap(moved.delta().unwrap().rep(), eta.delta().unwrap().rep()) < 1e-12);
    }

    #[test]
    fn scalar_product_rule() {
        let g = MatrixGroup::PositiveScalars;
        let cfg = QuadratureConfig::default();
        let s = |v: f64| DMatrix::from_element(1, 1, v);
        let eta = GroupACCurve::from_closed_form(g, Interval::unit(), Exponent::Finite(1.0), cfg, move |t| s(t.exp()), move |t| s(t.exp())).unwrap();
        let zeta = GroupACCurve::from_closed_form(g, Interval::unit(), Exponent::Finite(1.0), cfg, move |t| s((t * t).exp()), move |t| s(2.0 * t * (t * t).exp())).unwrap();
        let prod = product(&eta, &zeta).unwrap();
        let want = PiecewiseCurve::scalar_fn(Interval::unit(), |t| 1.0 + 2.0 * t).unwrap();
        assert!(max_gap(prod.delta().unwrap().rep(), &want) < 1e-13);

        let inv = inverse_curve(&eta).unwrap();
        let minus_one = PiecewiseCurve::constant(Interval::unit(), DVector::from_element(1, -1.0)).unwrap();
        assert!(max_gap(inv.delta().unwrap().rep(), &minus_one) < 1e-14);
    }

    #[test]
    fn inverse_and_product_rules_non_abelian() {
        let g = MatrixGroup::gl(2);
        let a = gl2_a();
        let eta = exp_curve(g, a.clone());
        let inv = inverse_curve(&eta).unwrap();
        let minus_a = constant_control(Interval::unit(), &(-&a)).unwrap();
        assert!(max_gap(inv.delta().unwrap().rep(), &minus_a) < 1e-12);

        let id = product(&eta, &inv).unwrap();
        assert!(max_gap(id.delta().unwrap().rep(), &PiecewiseCurve::zero(Interval::unit(), 4).unwrap()) < 1e-12);
        assert!(id.is_constant(1e-12).unwrap());

        // δ(ηζ) = ζ⁻¹ δ(η) ζ + δ(ζ)
        let b = DMatrix::from_row_slice(2, 2, &[-0.1, 0.4, 0.9, 0.5]);
        let zeta = exp_curve(g, b.clone());
        let prod = product(&eta, &zeta).unwrap();
        let want = PiecewiseCurve::from_fn(Interval::unit(), 4, move |t| {
            let z = (&b * t).exp();
            mat_to_vec(&(inverse(&z) * &a * &z + &b))
        })
        .unwrap();
        assert!(max_gap(prod.delta().unwrap().rep(), &want) < 1e-12);
    }

    #[test]
    fn determinant_pushes_delta_to_trace() {
        let g = MatrixGroup::gl(2);
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let eta = exp_curve(g, a);
        let det = hom_det(2);
        let d = delta_homomorphism(&det, &eta).unwrap();
        let three = PiecewiseCurve::constant(Interval::unit(), DVector::from_element(1, 3.0)).unwrap();
        assert!(max_gap(d.rep(), &three) < 1e-13);
        let pushed = pushforward_hom(&det, &eta).unwrap();
        assert!((pushed.eval(1.0).unwrap()[(0, 0)] - 3f64.exp()).abs() < 1e-12);
        // derivative recovered numerically from det(η(t)) agrees with the rule
        let fd = pushed.mat_curve().derivative_recovery(0.5, 1e-5).unwrap()[0];
        assert!((fd - 3.0 * 1.5f64.exp()).abs() < 1e-6);

        let ident = Homomorphism::identity(g);
        let e = delta_homomorphism(&ident, &eta).unwrap();
        assert!(max_gap(e.rep(), eta.delta().unwrap().rep()) == 0.0);
        assert!(matches!(delta_homomorphism(&hom_det(3), &eta), Err(Error::Incompatible(_))));
    }

    #[test]
    fn reparametrisation_scales_delta() {
        let g = MatrixGroup::SpecialOrthogonal3;
        let a = so3_generator(1) * 1.3;
        let eta = exp_curve(g, a.clone());
        let r = reparam_group(&eta, Interval::unit(), Interval::new(0.0, 2.0).unwrap()).unwrap();
        let half = constant_control(Interval::new(0.0, 2.0).unwrap(), &(&a * 0.5)).unwrap();
        assert!(max_gap(r.delta().unwrap().rep(), &half) < 1e-12);

        let r = reparam_group(&eta, Interval::new(0.0, 0.5).unwrap(), Interval::unit()).unwrap();
        let half = constant_control(Interval::unit(), &(&a * 0.5)).unwrap();
        assert!(max_gap(r.delta().unwrap().rep(), &half) < 1e-12);
        assert!((r.eval(1.0).unwrap() - eta.eval(0.5).unwrap()).amax() < 1e-15);

        let same = reparam_group(&eta, Interval::unit(), Interval::unit()).unwrap();
        assert!(max_gap(same.delta().unwrap().rep(), eta.delta().unwrap().rep()) < 1e-15);
        assert!(reparam_group(&eta, Interval { a: 0.5, b: 0.5 }, Interval::unit()).is_err());
    }

    #[test]
    fn split_glue_and_mismatch() {
        let g = MatrixGroup::SpecialOrthogonal3;
        let eta = exp_curve(g, so3_generator(2));
        let parts = split_group(&eta, &[0.0, 0.3, 1.0]).unwrap();
        let back = glue_group(&parts, None).unwrap();
        for t in [0.0, 0.2, 0.3, 0.9, 1.0] {
            assert!((back.eval(t).unwrap() - eta.eval(t).unwrap()).amax() < 1e-15);
        }
        let other = exp_curve(g, so3_generator(0));
        let shifted = reparam_group(&other, Interval::new(0.3, 1.0).unwrap(), Interval::new(0.3, 1.0).unwrap()).unwrap();
        let r = glue_group(&[parts[0].clone(), shifted], None);
        assert!(matches!(r, Err(Error::DiscontinuousJunction { .. })));
    }

    #[test]
    fn membership_is_certified() {
        let g = MatrixGroup::SpecialOrthogonal3;
        let deriv = PiecewiseCurve::constant(Interval::unit(), mat_to_vec(&DMatrix::identity(3, 3))).unwrap();
        let mc = ACCurve::from_parts(mat_to_vec(&DMatrix::identity(3, 3)), deriv, Exponent::Finite(1.0), QuadratureConfig::default()).unwrap();
        assert!(matches!(GroupACCurve::from_ac(g, mc), Err(Error::InconsistentCurve(_))));
    }
}
