//! Embedded matrix Lie groups: membership, exponential and logarithm,
//! tangent translations, the Maurer–Cartan form and homomorphisms.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Membership tolerance, scaled by `max(1, ‖g‖_F)`.
pub const GROUP_TOL: f64 = 1e-9;
/// Algebra-predicate tolerance, scaled by `max(1, ‖A‖_F)`.
pub const ALGEBRA_TOL: f64 = 1e-10;
/// Largest drift that reprojection is allowed to repair.
const REPROJECT_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "name")]
pub enum MatrixGroup {
    /// `R^d` acting by translations, as `(d+1) x (d+1)` affine matrices.
    #[serde(rename = "translation")]
    Translation { d: usize },
    #[serde(rename = "scalars", alias = "positive_scalars")]
    PositiveScalars,
    #[serde(rename = "gl")]
    GeneralLinear { n: usize },
    #[serde(rename = "so3")]
    SpecialOrthogonal3,
    #[serde(rename = "se2")]
    SpecialEuclidean2,
    #[serde(rename = "heisenberg")]
    Heisenberg,
}

impl fmt::Display for MatrixGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixGroup::Translation { d } => write!(f, "Translation(R^{d})"),
            MatrixGroup::PositiveScalars => write!(f, "PositiveScalars"),
            MatrixGroup::GeneralLinear { n } => write!(f, "GL({n})"),
            MatrixGroup::SpecialOrthogonal3 => write!(f, "SO(3)"),
            MatrixGroup::SpecialEuclidean2 => write!(f, "SE(2)"),
            MatrixGroup::Heisenberg => write!(f, "Heisenberg(3)"),
        }
    }
}

fn scale(m: &DMatrix<f64>) -> f64 {
    m.norm().max(1.0)
}

fn skew_defect(m: &DMatrix<f64>) -> f64 {
    (m + m.transpose()).norm()
}

impl MatrixGroup {
    pub fn translation(d: usize) -> Self {
        MatrixGroup::Translation { d }
    }

    pub fn gl(n: usize) -> Self {
        MatrixGroup::GeneralLinear { n }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MatrixGroup::Translation { d: 0 } | MatrixGroup::GeneralLinear { n: 0 } => Err(
                Error::InvalidParameter(format!("{self} needs a positive dimension")),
            ),
            _ => Ok(()),
        }
    }

    /// Matrix size `n`.
    pub fn ambient_dim(&self) -> usize {
        match self {
            MatrixGroup::Translation { d } => d + 1,
            MatrixGroup::PositiveScalars => 1,
            MatrixGroup::GeneralLinear { n } => *n,
            MatrixGroup::SpecialOrthogonal3 | MatrixGroup::SpecialEuclidean2 | MatrixGroup::Heisenberg => 3,
        }
    }

    pub fn algebra_dim(&self) -> usize {
        self.algebra_basis().len()
    }

    pub fn is_abelian(&self) -> bool {
        matches!(
            self,
            MatrixGroup::Translation { .. } | MatrixGroup::PositiveScalars | MatrixGroup::GeneralLinear { n: 1 }
        )
    }

    pub fn has_closed_form_exp(&self) -> bool {
        !matches!(self, MatrixGroup::GeneralLinear { .. })
    }

    pub fn identity_matrix(&self) -> DMatrix<f64> {
        let n = self.ambient_dim();
        DMatrix::identity(n, n)
    }

    fn check_shape(&self, m: &DMatrix<f64>) -> bool {
        let n = self.ambient_dim();
        m.shape() == (n, n)
    }

    pub fn contains(&self, m: &DMatrix<f64>) -> bool {
        self.membership_defect(m) <= GROUP_TOL * scale(m)
    }

    /// Distance-like defect of `m` from the group; infinite for the wrong
    /// shape.
    pub fn membership_defect(&self, m: &DMatrix<f64>) -> f64 {
        if !self.check_shape(m) || m.iter().any(|x| !x.is_finite()) {
            return f64::INFINITY;
        }
        let n = self.ambient_dim();
        match self {
            MatrixGroup::Translation { d } => {
                let block = m.view((0, 0), (*d, *d)) - DMatrix::<f64>::identity(*d, *d);
                let mut last = m.row(n - 1).clone_owned();
                last[n - 1] -= 1.0;
                block.norm() + last.norm()
            }
            MatrixGroup::PositiveScalars => {
                if m[(0, 0)] > 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            MatrixGroup::GeneralLinear { .. } => {
                let det = m.determinant();
                if det != 0.0 && det.is_finite() {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            MatrixGroup::SpecialOrthogonal3 => {
                if m.determinant() <= 0.0 {
                    return f64::INFINITY;
                }
                (m.transpose() * m - DMatrix::<f64>::identity(3, 3)).norm()
            }
            MatrixGroup::SpecialEuclidean2 => {
                let r = m.view((0, 0), (2, 2)).clone_owned();
                if r.determinant() <= 0.0 {
                    return f64::INFINITY;
                }
                let orth = (r.transpose() * &r - DMatrix::<f64>::identity(2, 2)).norm();
                orth + m[(2, 0)].abs() + m[(2, 1)].abs() + (m[(2, 2)] - 1.0).abs()
            }
            MatrixGroup::Heisenberg => {
                let mut d = 0.0;
                for i in 0..3 {
                    d += (m[(i, i)] - 1.0).abs();
                    for j in 0..i {
                        d += m[(i, j)].abs();
                    }
                }
                d
            }
        }
    }

    pub fn in_algebra(&self, a: &DMatrix<f64>) -> bool {
        self.algebra_defect(a) <= ALGEBRA_TOL * scale(a)
    }

    pub fn algebra_defect(&self, a: &DMatrix<f64>) -> f64 {
        if !self.check_shape(a) || a.iter().any(|x| !x.is_finite()) {
            return f64::INFINITY;
        }
        let n = self.ambient_dim();
        match self {
            MatrixGroup::Translation { d } => {
                a.view((0, 0), (*d, *d)).norm() + a.row(n - 1).norm()
            }
            MatrixGroup::PositiveScalars | MatrixGroup::GeneralLinear { .. } => 0.0,
            MatrixGroup::SpecialOrthogonal3 => skew_defect(a),
            MatrixGroup::SpecialEuclidean2 => {
                skew_defect(&a.view((0, 0), (2, 2)).clone_owned()) + a.row(2).norm()
            }
            MatrixGroup::Heisenberg => {
                let mut d = 0.0;
                for i in 0..3 {
                    for j in 0..=i {
                        d += a[(i, j)].abs();
                    }
                }
                d
            }
        }
    }

    /// A basis of the Lie algebra.
    pub fn algebra_basis(&self) -> Vec<DMatrix<f64>> {
        let n = self.ambient_dim();
        let unit = |i: usize, j: usize| {
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = 1.0;
            m
        };
        match self {
            MatrixGroup::Translation { d } => (0..*d).map(|i| unit(i, *d)).collect(),
            MatrixGroup::PositiveScalars => vec![unit(0, 0)],
            MatrixGroup::GeneralLinear { n } => {
                (0..n * n).map(|k| unit(k / n, k % n)).collect()
            }
            MatrixGroup::SpecialOrthogonal3 => (0..3).map(so3_generator).collect(),
            MatrixGroup::SpecialEuclidean2 => {
                vec![unit(1, 0) - unit(0, 1), unit(0, 2), unit(1, 2)]
            }
            MatrixGroup::Heisenberg => vec![unit(0, 1), unit(1, 2), unit(0, 2)],
        }
    }

    pub fn from_coords(&self, coords: &[f64]) -> Result<DMatrix<f64>> {
        let basis = self.algebra_basis();
        if coords.len() != basis.len() {
            return Err(Error::InvalidParameter(format!(
                "{self} has a {}-dimensional algebra, got {} coordinates",
                basis.len(),
                coords.len()
            )));
        }
        let n = self.ambient_dim();
        Ok(basis
            .iter()
            .zip(coords)
            .fold(DMatrix::zeros(n, n), |acc, (b, c)| acc + b * *c))
    }

    /// Algebra element with coordinates uniform in `[-scale, scale]`.
    pub fn random_algebra<R: Rng>(&self, rng: &mut R, scale: f64) -> DMatrix<f64> {
        let coords: Vec<f64> = (0..self.algebra_dim())
            .map(|_| rng.random_range(-scale..=scale))
            .collect();
        self.from_coords(&coords).expect("matching dimension")
    }

    /// Projects a drifted element back onto the group where a projection is
    /// available (rotation blocks via the polar factor); `None` otherwise.
    pub fn reproject(&self, m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        match self {
            MatrixGroup::SpecialOrthogonal3 => polar_factor(m),
            MatrixGroup::SpecialEuclidean2 => {
                let r = polar_factor(&m.view((0, 0), (2, 2)).clone_owned())?;
                let mut out = m.clone();
                out.view_mut((0, 0), (2, 2)).copy_from(&r);
                out[(2, 0)] = 0.0;
                out[(2, 1)] = 0.0;
                out[(2, 2)] = 1.0;
                Some(out)
            }
            _ => None,
        }
    }

    /// Returns `m` unchanged when it is a member, its reprojection (logged)
    /// when the drift is small and repairable, and an error otherwise.
    pub fn enforce(&self, m: DMatrix<f64>) -> Result<DMatrix<f64>> {
        let defect = self.membership_defect(&m);
        if defect <= GROUP_TOL * scale(&m) {
            return Ok(m);
        }
        if defect <= REPROJECT_LIMIT * scale(&m) {
            if let Some(p) = self.reproject(&m) {
                log::info!("reprojected drifted {self} element (defect {defect:e})");
                return Ok(p);
            }
        }
        Err(Error::InvalidInput(format!(
            "matrix is not in {self} (defect {defect:e})"
        )))
    }

    /// `exp(A)` with closed forms where the group has one; no predicate
    /// check.
    pub fn exp_matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            MatrixGroup::PositiveScalars => DMatrix::from_element(1, 1, a[(0, 0)].exp()),
            MatrixGroup::Translation { .. } => self.identity_matrix() + a,
            MatrixGroup::Heisenberg => {
                let a2 = a * a;
                self.identity_matrix() + a + a2 * 0.5
            }
            MatrixGroup::SpecialOrthogonal3 => rodrigues(a),
            MatrixGroup::SpecialEuclidean2 => se2_exp(a),
            MatrixGroup::GeneralLinear { .. } => a.exp(),
        }
    }
}

/// Generator of rotations about the `axis`-th coordinate axis.
pub fn so3_generator(axis: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(3, 3);
    let (i, j) = match axis {
        0 => (2, 1),
        1 => (0, 2),
        _ => (1, 0),
    };
    m[(i, j)] = 1.0;
    m[(j, i)] = -1.0;
    m
}

fn polar_factor(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let svd = m.clone().svd(true, true);
    let u = svd.u?;
    let v_t = svd.v_t?;
    let r = u * v_t;
    (r.determinant() > 0.0).then_some(r)
}

/// `sin θ / θ` and `(1 - cos θ) / θ^2`, by series near zero.
fn sinc_terms(theta: f64) -> (f64, f64) {
    if theta < 1e-4 {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    }
}

fn rodrigues(k: &DMatrix<f64>) -> DMatrix<f64> {
    let w = [k[(2, 1)], k[(0, 2)], k[(1, 0)]];
    let theta = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let (a, b) = sinc_terms(theta);
    DMatrix::identity(3, 3) + k * a + (k * k) * b
}

fn se2_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let theta = m[(1, 0)];
    let (x, y) = (m[(0, 2)], m[(1, 2)]);
    let (s, c1) = sinc_terms(theta.abs());
    // V = [[sinθ/θ, -(1-cosθ)/θ], [(1-cosθ)/θ, sinθ/θ]]
    let c = c1 * theta;
    let (sin, cos) = theta.sin_cos();
    DMatrix::from_row_slice(
        3,
        3,
        &[cos, -sin, s * x - c * y, sin, cos, c * x + s * y, 0.0, 0.0, 1.0],
    )
}

/// Row-major flattening of a square matrix.
pub fn mat_to_vec(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

pub fn vec_to_mat(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, v.as_slice())
}

fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|x| x.is_finite()))
        .ok_or_else(|| Error::NumericalSingularity("matrix is not invertible".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    group: MatrixGroup,
    mat: DMatrix<f64>,
}

impl GroupElement {
    pub fn new(group: MatrixGroup, mat: DMatrix<f64>) -> Result<Self> {
        let mat = group.enforce(mat)?;
        Ok(Self { group, mat })
    }

    pub fn identity(group: MatrixGroup) -> Self {
        Self {
            group,
            mat: group.identity_matrix(),
        }
    }

    pub fn group(&self) -> MatrixGroup {
        self.group
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        same_group(self.group, other.group)?;
        GroupElement::new(self.group, &self.mat * &other.mat)
    }

    pub fn inv(&self) -> Result<GroupElement> {
        GroupElement::new(self.group, inverse(&self.mat)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    group: MatrixGroup,
    mat: DMatrix<f64>,
}

impl AlgebraElement {
    pub fn new(group: MatrixGroup, mat: DMatrix<f64>) -> Result<Self> {
        if !group.in_algebra(&mat) {
            return Err(Error::InvalidInput(format!(
                "matrix is not in the Lie algebra of {group} (defect {:e})",
                group.algebra_defect(&mat)
            )));
        }
        Ok(Self { group, mat })
    }

    pub fn zero(group: MatrixGroup) -> Self {
        let n = group.ambient_dim();
        Self {
            group,
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn group(&self) -> MatrixGroup {
        self.group
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

/// A tangent vector `mat ∈ T_base G`, represented in the ambient matrix
/// space.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: GroupElement,
    mat: DMatrix<f64>,
}

impl TangentVector {
    pub fn new(base: GroupElement, mat: DMatrix<f64>) -> Result<Self> {
        let v = Self { base, mat };
        maurer_cartan(&v)?;
        Ok(v)
    }

    /// `g.A`, the left translate of an algebra element.
    pub fn left_translate(g: &GroupElement, a: &AlgebraElement) -> Result<Self> {
        same_group(g.group, a.group)?;
        Ok(Self {
            base: g.clone(),
            mat: g.matrix() * a.matrix(),
        })
    }

    pub fn base(&self) -> &GroupElement {
        &self.base
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

fn same_group(a: MatrixGroup, b: MatrixGroup) -> Result<()> {
    if a != b {
        return Err(Error::Incompatible(format!("{a} vs {b}")));
    }
    Ok(())
}

pub fn exp_alg(a: &AlgebraElement) -> GroupElement {
    GroupElement {
        group: a.group,
        mat: a.group.exp_matrix(&a.mat),
    }
}

/// Principal logarithm by the Mercator series, valid for
/// `‖g - I‖ < 1/2` in the max-row-sum norm.
pub fn log_grp(g: &GroupElement) -> Result<AlgebraElement> {
    let n = g.group.ambient_dim();
    let x = &g.mat - DMatrix::<f64>::identity(n, n);
    let radius = row_sum_norm(&x);
    if radius >= 0.5 {
        return Err(Error::OutOfChart(format!(
            "‖g - I‖ = {radius} is not below 0.5"
        )));
    }
    let mut term = x.clone();
    let mut sum = x.clone();
    for k in 2..200 {
        term = &term * &x;
        let contrib = &term * (if k % 2 == 0 { -1.0 } else { 1.0 } / k as f64);
        sum += &contrib;
        if contrib.amax() < 1e-18 * sum.amax().max(1e-300) {
            break;
        }
    }
    AlgebraElement::new(g.group, sum)
}

pub(crate) fn row_sum_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `g.w`, a tangent vector at `g h`.
pub fn left_act(g: &GroupElement, w: &TangentVector) -> Result<TangentVector> {
    same_group(g.group, w.base.group)?;
    Ok(TangentVector {
        base: g.mul(&w.base)?,
        mat: &g.mat * &w.mat,
    })
}

/// `v.h`, a tangent vector at `g h`.
pub fn right_act(v: &TangentVector, h: &GroupElement) -> Result<TangentVector> {
    same_group(v.base.group, h.group)?;
    Ok(TangentVector {
        base: v.base.mul(h)?,
        mat: &v.mat * &h.mat,
    })
}

/// `base^{-1} v`.
pub fn maurer_cartan(v: &TangentVector) -> Result<AlgebraElement> {
    let group = v.base.group;
    let a = inverse(&v.base.mat)? * &v.mat;
    if !group.in_algebra(&a) {
        return Err(Error::InvalidTangent(format!(
            "g^-1 v leaves the algebra of {group} (defect {:e})",
            group.algebra_defect(&a)
        )));
    }
    Ok(AlgebraElement { group, mat: a })
}

type MatMap = Arc<dyn Fn(&DMatrix<f64>) -> DMatrix<f64> + Send + Sync>;

/// A group homomorphism with its differential at the identity.
#[derive(Clone)]
pub struct Homomorphism {
    pub name: String,
    pub source: MatrixGroup,
    pub target: MatrixGroup,
    map: MatMap,
    algebra_map: MatMap,
}

impl fmt::Debug for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Homomorphism({}: {} -> {})", self.name, self.source, self.target)
    }
}

impl Homomorphism {
    pub fn new<F, L>(name: &str, source: MatrixGroup, target: MatrixGroup, map: F, algebra_map: L) -> Self
    where
        F: Fn(&DMatrix<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        L: Fn(&DMatrix<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            source,
            target,
            map: Arc::new(map),
            algebra_map: Arc::new(algebra_map),
        }
    }

    pub fn identity(group: MatrixGroup) -> Self {
        Self::new("id", group, group, |g| g.clone(), |a| a.clone())
    }

    pub fn apply(&self, g: &GroupElement) -> Result<GroupElement> {
        same_group(self.source, g.group)?;
        GroupElement::new(self.target, (self.map)(&g.mat))
    }

    pub fn apply_algebra(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        same_group(self.source, a.group)?;
        AlgebraElement::new(self.target, (self.algebra_map)(&a.mat))
    }

    pub fn map_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        (self.map)(m)
    }

    pub fn algebra_matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        (self.algebra_map)(a)
    }
}

/// `det: GL(n) -> (0, ∞)`, with differential `tr`. Elements with negative
/// determinant have no image in the positive scalars.
pub fn hom_det(n: usize) -> Homomorphism {
    Homomorphism::new(
        "det",
        MatrixGroup::gl(n),
        MatrixGroup::PositiveScalars,
        |g| DMatrix::from_element(1, 1, g.determinant()),
        |a| DMatrix::from_element(1, 1, a.trace()),
    )
}
