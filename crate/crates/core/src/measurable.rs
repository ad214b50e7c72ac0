//! Lusin-measurable curves `[a, b] -> R^d` held as finitely many continuous
//! pieces on closed supports, plus a default value on the null set where
//! supports meet.
//!
//! A curve evaluates to its piece evaluator in the interior of a support and
//! at a domain endpoint; at a junction shared by two supports (and at the
//! singular origin of a power piece) it evaluates to `default`. Parts of the
//! domain not covered by any supplied piece are filled with constant
//! `default` pieces, and their total length is tracked as the curve's
//! deficit.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Evaluator = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// Relative tolerance used when comparing breakpoints.
pub(crate) const KNOT_EPS: f64 = 1e-14;

pub(crate) fn knots_close(x: f64, y: f64) -> bool {
    (x - y).abs() <= KNOT_EPS * (1.0 + x.abs().max(y.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParameter(format!(
                "interval requires finite a < b, got [{a}, {b}]"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn unit() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && t <= self.b
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.a >= self.a && other.b <= self.b
    }

    pub(crate) fn same_as(&self, other: &Interval) -> bool {
        knots_close(self.a, other.a) && knots_close(self.b, other.b)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// Finite disjoint union of closed intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompactSet {
    components: Vec<(f64, f64)>,
}

impl CompactSet {
    pub fn new(mut components: Vec<(f64, f64)>) -> Result<Self> {
        components.retain(|(lo, hi)| hi > lo);
        components.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in components.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::InvalidInput(format!(
                    "compact components [{}, {}] and [{}, {}] are not disjoint",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(Self { components })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.components.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.components.iter().any(|&(lo, hi)| t >= lo && t <= hi)
    }

    /// True when no point is shared with `other`.
    pub fn is_disjoint_from(&self, other: &CompactSet) -> bool {
        self.components.iter().all(|&(lo, hi)| {
            other
                .components
                .iter()
                .all(|&(lo2, hi2)| hi < lo2 || hi2 < lo)
        })
    }
}

/// Continuous seminorms on `R^d`. Matrix variants read the vector as a
/// row-major `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seminorm {
    AbsCoordinate(usize),
    Euclidean,
    Max,
    /// `sum_i w_i |x_i|` with non-negative weights.
    Weighted(Vec<f64>),
    MatrixFrobenius(usize),
    /// Induced infinity norm (maximal absolute row sum); bounds the spectral radius.
    MatrixOperatorEstimate(usize),
}

impl Seminorm {
    pub fn applies_to(&self, dim: usize) -> bool {
        match self {
            Seminorm::AbsCoordinate(i) => *i < dim,
            Seminorm::Euclidean | Seminorm::Max => true,
            Seminorm::Weighted(w) => w.len() == dim && w.iter().all(|x| *x >= 0.0),
            Seminorm::MatrixFrobenius(n) | Seminorm::MatrixOperatorEstimate(n) => n * n == dim,
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.applies_to(dim) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "seminorm {self} does not apply to R^{dim}"
            )))
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            Seminorm::AbsCoordinate(i) => x[*i].abs(),
            Seminorm::Euclidean | Seminorm::MatrixFrobenius(_) => x.norm(),
            Seminorm::Max => x.amax(),
            Seminorm::Weighted(w) => w.iter().zip(x.iter()).map(|(w, v)| w * v.abs()).sum(),
            Seminorm::MatrixOperatorEstimate(n) => (0..*n)
                .map(|r| (0..*n).map(|c| x[r * n + c].abs()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    /// A small family covering every kind that applies to `R^dim`.
    pub fn family_for(dim: usize) -> Vec<Seminorm> {
        let mut out = vec![Seminorm::Euclidean, Seminorm::Max, Seminorm::AbsCoordinate(0)];
        out.push(Seminorm::Weighted(
            (0..dim).map(|i| 1.0 / (i as f64 + 1.0)).collect(),
        ));
        let n = (dim as f64).sqrt().round() as usize;
        if n * n == dim && n > 1 {
            out.push(Seminorm::MatrixFrobenius(n));
            out.push(Seminorm::MatrixOperatorEstimate(n));
        }
        out
    }
}

impl fmt::Display for Seminorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Seminorm::AbsCoordinate(i) => write!(f, "abs[{i}]"),
            Seminorm::Euclidean => write!(f, "euclidean"),
            Seminorm::Max => write!(f, "max"),
            Seminorm::Weighted(_) => write!(f, "weighted"),
            Seminorm::MatrixFrobenius(_) => write!(f, "frobenius"),
            Seminorm::MatrixOperatorEstimate(_) => write!(f, "operator_estimate"),
        }
    }
}

/// Evaluator of a single piece.
#[derive(Clone)]
pub enum PieceFn {
    Constant(DVector<f64>),
    /// `coeff * |t - origin|^exponent`; `origin` never lies strictly inside
    /// the support, so singular powers are integrated in closed form.
    Power {
        coeff: DVector<f64>,
        origin: f64,
        exponent: f64,
    },
    Func(Evaluator),
}

impl fmt::Debug for PieceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PieceFn::Constant(v) => write!(f, "Constant({:?})", v.as_slice()),
            PieceFn::Power {
                coeff,
                origin,
                exponent,
            } => write!(
                f,
                "Power({:?} |t - {origin}|^{exponent})",
                coeff.as_slice()
            ),
            PieceFn::Func(_) => write!(f, "Func(..)"),
        }
    }
}

impl PieceFn {
    pub fn func<F>(f: F) -> Self
    where
        F: Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    {
        PieceFn::Func(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        match self {
            PieceFn::Constant(v) => v.clone(),
            PieceFn::Power {
                coeff,
                origin,
                exponent,
            } => coeff * (t - origin).abs().powf(*exponent),
            PieceFn::Func(f) => f(t),
        }
    }

    /// Scalar multiple, preserving symbolic structure.
    pub fn scaled(&self, s: f64) -> PieceFn {
        match self {
            PieceFn::Constant(v) => PieceFn::Constant(v * s),
            PieceFn::Power {
                coeff,
                origin,
                exponent,
            } => PieceFn::Power {
                coeff: coeff * s,
                origin: *origin,
                exponent: *exponent,
            },
            PieceFn::Func(f) => {
                let f = f.clone();
                PieceFn::func(move |t| f(t) * s)
            }
        }
    }

    /// Pointwise `x -> m x` for a linear map given as a matrix.
    pub fn linear_image(&self, m: &nalgebra::DMatrix<f64>) -> PieceFn {
        match self {
            PieceFn::Constant(v) => PieceFn::Constant(m * v),
            PieceFn::Power {
                coeff,
                origin,
                exponent,
            } => PieceFn::Power {
                coeff: m * coeff,
                origin: *origin,
                exponent: *exponent,
            },
            PieceFn::Func(f) => {
                let f = f.clone();
                let m = m.clone();
                PieceFn::func(move |t| &m * f(t))
            }
        }
    }

    /// Composition with `t -> alpha + slope * (t - c)` (slope may be any
    /// non-zero real).
    pub fn affine_pullback(&self, alpha: f64, c: f64, slope: f64) -> PieceFn {
        match self {
            PieceFn::Constant(v) => PieceFn::Constant(v.clone()),
            PieceFn::Power {
                coeff,
                origin,
                exponent,
            } => {
                // |alpha + s(t-c) - o|^e = |s|^e |t - (c + (o - alpha)/s)|^e
                PieceFn::Power {
                    coeff: coeff * slope.abs().powf(*exponent),
                    origin: c + (origin - alpha) / slope,
                    exponent: *exponent,
                }
            }
            PieceFn::Func(f) => {
                let f = f.clone();
                PieceFn::func(move |t| f(alpha + slope * (t - c)))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub f: PieceFn,
    /// Gap filler holding the curve's default value.
    pub filler: bool,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, f: PieceFn) -> Self {
        Self {
            lo,
            hi,
            f,
            filler: false,
        }
    }

    pub fn constant(lo: f64, hi: f64, v: DVector<f64>) -> Self {
        Self::new(lo, hi, PieceFn::Constant(v))
    }

    pub fn func<F>(lo: f64, hi: f64, f: F) -> Self
    where
        F: Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    {
        Self::new(lo, hi, PieceFn::func(f))
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        self.f.eval(t)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.f, PieceFn::Constant(_))
    }

    /// Origin of a negative power that touches this support.
    pub fn singular_point(&self) -> Option<f64> {
        match &self.f {
            PieceFn::Power {
                coeff,
                origin,
                exponent,
            } if *exponent < 0.0 && coeff.amax() > 0.0 => {
                if knots_close(*origin, self.lo) {
                    Some(self.lo)
                } else if knots_close(*origin, self.hi) {
                    Some(self.hi)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn restricted(&self, lo: f64, hi: f64) -> Piece {
        Piece {
            lo,
            hi,
            f: self.f.clone(),
            filler: self.filler,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PiecewiseCurve {
    domain: Interval,
    dim: usize,
    segments: Vec<Piece>,
    default: DVector<f64>,
    deficit: f64,
}

impl PiecewiseCurve {
    /// Builds a curve from pieces sorted by left endpoint whose supports
    /// overlap at most in endpoints. Uncovered gaps are filled with
    /// `default`.
    pub fn new(
        domain: Interval,
        dim: usize,
        pieces: Vec<Piece>,
        default: DVector<f64>,
    ) -> Result<Self> {
        Interval::new(domain.a, domain.b)?;
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if default.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "default has dimension {}, expected {dim}",
                default.len()
            )));
        }
        let mut segments = Vec::with_capacity(pieces.len() + 2);
        let mut cursor = domain.a;
        let mut deficit = 0.0;
        let fill = |lo: f64, hi: f64| Piece {
            lo,
            hi,
            f: PieceFn::Constant(default.clone()),
            filler: true,
        };
        for mut p in pieces {
            if !(p.lo < p.hi) || !p.lo.is_finite() || !p.hi.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "piece support [{}, {}] is degenerate",
                    p.lo, p.hi
                )));
            }
            if p.lo < domain.a && knots_close(p.lo, domain.a) {
                p.lo = domain.a;
            }
            if p.hi > domain.b && knots_close(p.hi, domain.b) {
                p.hi = domain.b;
            }
            if p.lo < domain.a || p.hi > domain.b {
                return Err(Error::InvalidInput(format!(
                    "piece support [{}, {}] leaves domain {domain}",
                    p.lo, p.hi
                )));
            }
            if p.lo < cursor {
                if knots_close(p.lo, cursor) {
                    p.lo = cursor;
                } else {
                    return Err(Error::InvalidInput(format!(
                        "piece supports overlap or are unsorted near t = {}",
                        p.lo
                    )));
                }
            }
            if let PieceFn::Power { coeff, origin, .. } = &p.f {
                if coeff.len() != dim {
                    return Err(Error::InvalidInput("power coefficient dimension".into()));
                }
                if *origin > p.lo && *origin < p.hi {
                    return Err(Error::InvalidInput(format!(
                        "power origin {origin} lies inside its support"
                    )));
                }
            }
            if let PieceFn::Constant(v) = &p.f {
                if v.len() != dim {
                    return Err(Error::InvalidInput("constant piece dimension".into()));
                }
            }
            if p.lo > cursor {
                deficit += p.lo - cursor;
                segments.push(fill(cursor, p.lo));
            }
            cursor = p.hi;
            segments.push(p);
        }
        if cursor < domain.b {
            deficit += domain.b - cursor;
            segments.push(fill(cursor, domain.b));
        }
        let probe = segments[0].eval(0.5 * (segments[0].lo + segments[0].hi));
        if probe.len() != dim {
            return Err(Error::InvalidInput(format!(
                "evaluator returns dimension {}, expected {dim}",
                probe.len()
            )));
        }
        Ok(Self {
            domain,
            dim,
            segments,
            default,
            deficit,
        })
    }

    pub fn constant(domain: Interval, v: DVector<f64>) -> Result<Self> {
        let dim = v.len();
        Self::new(
            domain,
            dim,
            vec![Piece::constant(domain.a, domain.b, v)],
            DVector::zeros(dim),
        )
    }

    pub fn zero(domain: Interval, dim: usize) -> Result<Self> {
        Self::constant(domain, DVector::zeros(dim))
    }

    /// Single continuous piece covering the whole domain.
    pub fn from_fn<F>(domain: Interval, dim: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    {
        Self::new(
            domain,
            dim,
            vec![Piece::func(domain.a, domain.b, f)],
            DVector::zeros(dim),
        )
    }

    pub fn scalar_fn<F>(domain: Interval, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(domain, 1, move |t| DVector::from_element(1, f(t)))
    }

    /// Step curve: `values[i]` on `[knots[i], knots[i+1]]` with
    /// `knots = [a, breakpoints..., b]`.
    pub fn step(domain: Interval, breakpoints: &[f64], values: Vec<DVector<f64>>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidInput(
                "step curve needs one value per cell".into(),
            ));
        }
        let dim = values[0].len();
        let mut knots = vec![domain.a];
        knots.extend_from_slice(breakpoints);
        knots.push(domain.b);
        let pieces = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| Piece::constant(knots[i], knots[i + 1], v))
            .collect();
        Self::new(domain, dim, pieces, DVector::zeros(dim))
    }

    /// Symbolic power control `coeff * (t - a)^exponent` on the whole domain.
    pub fn power(domain: Interval, coeff: DVector<f64>, exponent: f64) -> Result<Self> {
        let dim = coeff.len();
        Self::new(
            domain,
            dim,
            vec![Piece::new(
                domain.a,
                domain.b,
                PieceFn::Power {
                    coeff,
                    origin: domain.a,
                    exponent,
                },
            )],
            DVector::zeros(dim),
        )
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All segments, gap fillers included; they tile the domain.
    pub fn segments(&self) -> &[Piece] {
        &self.segments
    }

    /// Explicitly supplied pieces.
    pub fn pieces(&self) -> impl Iterator<Item = &Piece> {
        self.segments.iter().filter(|p| !p.filler)
    }

    pub fn default_value(&self) -> &DVector<f64> {
        &self.default
    }

    /// Length of the domain not covered by supplied pieces.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    /// Interior junctions between consecutive segments.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|p| p.lo).collect()
    }

    /// Points where the representation is not continuous: junctions and
    /// singular power origins.
    pub fn exceptional_points(&self) -> Vec<f64> {
        let mut pts = self.breakpoints();
        pts.extend(self.segments.iter().filter_map(Piece::singular_point));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|x, y| knots_close(*x, *y));
        pts
    }

    pub fn with_default(&self, default: DVector<f64>) -> Result<Self> {
        let pieces = self.pieces().cloned().collect();
        Self::new(self.domain, self.dim, pieces, default)
    }

    pub fn segment_index(&self, t: f64) -> Option<usize> {
        if !self.domain.contains(t) {
            return None;
        }
        let idx = self.segments.partition_point(|p| p.hi < t);
        Some(idx.min(self.segments.len() - 1))
    }

    pub fn eval(&self, t: f64) -> Result<DVector<f64>> {
        let i = self.segment_index(t).ok_or(Error::OutOfDomain {
            t,
            a: self.domain.a,
            b: self.domain.b,
        })?;
        let seg = &self.segments[i];
        let at_junction = (t == seg.hi && i + 1 < self.segments.len()) || (t == seg.lo && i > 0);
        if at_junction || seg.singular_point() == Some(t) {
            return Ok(self.default.clone());
        }
        Ok(seg.eval(t))
    }

    /// Value of the segment continuing to the left of `t` (right at `a`).
    pub fn eval_left(&self, t: f64) -> Result<DVector<f64>> {
        let i = self.segment_index(t).ok_or(Error::OutOfDomain {
            t,
            a: self.domain.a,
            b: self.domain.b,
        })?;
        Ok(self.segments[i].eval(t))
    }

    /// Value of the segment continuing to the right of `t` (left at `b`).
    pub fn eval_right(&self, t: f64) -> Result<DVector<f64>> {
        let mut i = self.segment_index(t).ok_or(Error::OutOfDomain {
            t,
            a: self.domain.a,
            b: self.domain.b,
        })?;
        if t == self.segments[i].hi && i + 1 < self.segments.len() {
            i += 1;
        }
        Ok(self.segments[i].eval(t))
    }

    /// Restriction to `[lo, hi]` as a curve on that domain.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        let dom = Interval::new(lo, hi)?;
        if !self.domain.contains_interval(&dom) {
            return Err(Error::InvalidParameter(format!(
                "{dom} is not inside {}",
                self.domain
            )));
        }
        let mut pieces = Vec::new();
        let mut gaps = 0.0;
        let mut fillers = Vec::new();
        for p in &self.segments {
            let l = p.lo.max(lo);
            let h = p.hi.min(hi);
            if h > l && !knots_close(l, h) {
                if p.filler {
                    gaps += h - l;
                    fillers.push((l, h));
                }
                pieces.push(p.restricted(l, h));
            }
        }
        let mut out = Self::new(dom, self.dim, pieces, self.default.clone())?;
        for s in out.segments.iter_mut() {
            if fillers.iter().any(|&(l, h)| l == s.lo && h == s.hi) {
                s.filler = true;
            }
        }
        out.deficit = gaps;
        Ok(out)
    }

    /// Replaces each segment evaluator, keeping supports and filler flags.
    pub fn map_pieces<F>(&self, dim: usize, default: DVector<f64>, f: F) -> Result<Self>
    where
        F: Fn(&Piece) -> PieceFn,
    {
        let segments: Vec<Piece> = self
            .segments
            .iter()
            .map(|p| Piece {
                lo: p.lo,
                hi: p.hi,
                f: f(p),
                filler: p.filler,
            })
            .collect();
        let mut out = Self::new(self.domain, dim, segments, default)?;
        out.deficit = self.deficit;
        for (s, o) in out.segments.iter_mut().zip(self.segments.iter()) {
            s.filler = o.filler;
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map_pieces(self.dim, &self.default * s, |p| p.f.scaled(s))
            .expect("scaling preserves structure")
    }

    /// Pointwise image under a linear map `R^dim -> R^m`.
    pub fn linear_image(&self, m: &nalgebra::DMatrix<f64>) -> Result<Self> {
        if m.ncols() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "linear map expects R^{}, curve is in R^{}",
                m.ncols(),
                self.dim
            )));
        }
        self.map_pieces(m.nrows(), m * &self.default, |p| p.f.linear_image(m))
    }

    pub fn add(&self, other: &PiecewiseCurve) -> Result<Self> {
        lift_continuous(
            |xs: &[DVector<f64>]| &xs[0] + &xs[1],
            self.dim,
            &[self, other],
        )
    }

    pub fn sub(&self, other: &PiecewiseCurve) -> Result<Self> {
        lift_continuous(
            |xs: &[DVector<f64>]| &xs[0] - &xs[1],
            self.dim,
            &[self, other],
        )
    }

    /// True when every component of `k` sits in one segment and avoids all
    /// exceptional points, so the restriction of the curve to `k` is
    /// continuous.
    pub fn is_continuous_on(&self, k: &CompactSet) -> bool {
        let exceptional = self.exceptional_points();
        k.components().iter().all(|&(lo, hi)| {
            let inside_one = self
                .segments
                .iter()
                .any(|s| s.lo <= lo && hi <= s.hi);
            let avoids = exceptional.iter().all(|&x| x < lo || x > hi);
            inside_one && avoids
        })
    }
}

/// Common refinement of the segment boundaries of several curves on one
/// domain.
pub(crate) fn common_knots(curves: &[&PiecewiseCurve]) -> Vec<f64> {
    let mut knots: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.segments.iter().flat_map(|p| [p.lo, p.hi]))
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|x, y| knots_close(*x, *y));
    knots
}

/// Compact set of measure at least `length - eps` on which the curve is
/// continuous. The budget `eps` is split evenly over the exceptional
/// points; each receives a symmetric open neighbourhood (one-sided at the
/// domain ends).
pub fn lusin_compact_approx(curve: &PiecewiseCurve, eps: f64) -> Result<CompactSet> {
    let dom = curve.domain();
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    if eps >= dom.length() {
        return Err(Error::InvalidParameter(format!(
            "epsilon {eps} must be smaller than the domain length {}",
            dom.length()
        )));
    }
    let exceptional = curve.exceptional_points();
    if exceptional.is_empty() {
        return CompactSet::new(vec![(dom.a, dom.b)]);
    }
    let width = eps / exceptional.len() as f64;
    let holes: Vec<(f64, f64)> = exceptional
        .iter()
        .map(|&x| {
            if x <= dom.a {
                (dom.a, dom.a + width)
            } else if x >= dom.b {
                (dom.b - width, dom.b)
            } else {
                (x - 0.5 * width, x + 0.5 * width)
            }
        })
        .collect();
    let mut comps = Vec::new();
    for seg in curve.segments() {
        let mut pieces = vec![(seg.lo, seg.hi)];
        for &(hl, hh) in &holes {
            pieces = pieces
                .into_iter()
                .flat_map(|(lo, hi)| subtract_open(lo, hi, hl, hh))
                .collect();
        }
        comps.extend(pieces);
    }
    CompactSet::new(comps)
}

/// `[lo, hi] \ (hl, hh)` with the hole closed at the domain ends, which
/// keeps the result a union of closed intervals.
fn subtract_open(lo: f64, hi: f64, hl: f64, hh: f64) -> Vec<(f64, f64)> {
    if hh <= lo || hl >= hi {
        return vec![(lo, hi)];
    }
    let mut out = Vec::new();
    if hl > lo {
        out.push((lo, hl));
    }
    if hh < hi {
        out.push((hh, hi));
    }
    out
}

/// Pairwise disjoint compact sets `K_1..K_N`, each a continuity set of the
/// curve, with `length - |K_1 ∪ … ∪ K_n| <= 1/n`.
pub fn lusin_exhaustion(curve: &PiecewiseCurve, n_sets: usize) -> Vec<CompactSet> {
    let len = curve.domain().length();
    let mut taken: Vec<(f64, f64)> = Vec::new();
    let mut out = Vec::with_capacity(n_sets);
    for n in 1..=n_sets {
        let target = 0.5 / n as f64;
        let approx = if target < len {
            lusin_compact_approx(curve, target).expect("valid epsilon")
        } else {
            CompactSet::empty()
        };
        // approx \ taken, as intervals with open ends where they touch `taken`
        let mut fresh: Vec<(f64, f64, bool, bool)> = Vec::new();
        for &(lo, hi) in approx.components() {
            // `taken` is sorted and disjoint: sweep the ones meeting [lo, hi]
            let first = taken.partition_point(|&(_, th)| th < lo);
            let (mut l, mut lo_open) = (lo, false);
            for &(tl, th) in taken[first..].iter().take_while(|(tl, _)| *tl <= hi) {
                if tl > l {
                    fresh.push((l, tl, lo_open, true));
                }
                l = th;
                lo_open = true;
            }
            if l < hi {
                fresh.push((l, hi, lo_open, false));
            }
        }
        // Leave the shortest pieces for later steps (at most 1/(4n) in
        // total) and shrink open ends of the rest (at most 1/(4n) in total),
        // so that the cumulative deficit stays below eps + 1/(2n) = 1/n.
        let budget = 0.25 / n as f64;
        let mut order: Vec<usize> = (0..fresh.len()).collect();
        order.sort_by(|&i, &j| {
            let li = fresh[i].1 - fresh[i].0;
            let lj = fresh[j].1 - fresh[j].0;
            li.total_cmp(&lj)
        });
        let mut skipped = 0.0;
        let mut keep = vec![true; fresh.len()];
        for &i in &order {
            let l = fresh[i].1 - fresh[i].0;
            if skipped + l > budget {
                break;
            }
            skipped += l;
            keep[i] = false;
        }
        let kept = keep.iter().filter(|k| **k).count().max(1);
        let gap = budget / (2.0 * kept as f64);
        let mut comps = Vec::new();
        for (&(l, h, lo_open, hi_open), _) in fresh.iter().zip(keep.iter()).filter(|(_, k)| **k) {
            let gl = if lo_open { gap.min(0.25 * (h - l)) } else { 0.0 };
            let gh = if hi_open { gap.min(0.25 * (h - l)) } else { 0.0 };
            let (l2, h2) = (l + gl, h - gh);
            if h2 > l2 {
                comps.push((l2, h2));
            }
        }
        let set = CompactSet::new(comps).expect("fresh components are disjoint");
        taken.extend_from_slice(set.components());
        taken.sort_by(|x, y| x.0.total_cmp(&y.0));
        out.push(set);
    }
    out
}

/// Pointwise `F(curve_1(t), ..., curve_k(t))` on the common refinement of
/// the input segments.
pub fn lift_continuous<F>(f: F, out_dim: usize, curves: &[&PiecewiseCurve]) -> Result<PiecewiseCurve>
where
    F: Fn(&[DVector<f64>]) -> DVector<f64> + Send + Sync + 'static,
{
    let first = curves
        .first()
        .ok_or_else(|| Error::InvalidInput("lift_continuous needs at least one curve".into()))?;
    let dom = first.domain();
    for c in curves.iter().skip(1) {
        if !c.domain().same_as(&dom) {
            return Err(Error::IncompatibleDomains(format!(
                "{} vs {}",
                dom,
                c.domain()
            )));
        }
    }
    let f = Arc::new(f);
    let knots = common_knots(curves);
    let mut segments = Vec::with_capacity(knots.len());
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let parts: Vec<Piece> = curves
            .iter()
            .map(|c| c.segments[c.segment_index(mid).expect("inside domain")].clone())
            .collect();
        let filler = parts.iter().any(|p| p.filler);
        let pf = if parts.iter().all(Piece::is_constant) {
            let vals: Vec<DVector<f64>> = parts.iter().map(|p| p.eval(mid)).collect();
            PieceFn::Constant(f(&vals))
        } else {
            let f = f.clone();
            PieceFn::func(move |t| {
                let vals: Vec<DVector<f64>> = parts.iter().map(|p| p.eval(t)).collect();
                f(&vals)
            })
        };
        segments.push(Piece {
            lo,
            hi,
            f: pf,
            filler,
        });
    }
    let defaults: Vec<DVector<f64>> = curves.iter().map(|c| c.default.clone()).collect();
    let default = f(&defaults);
    let mut out = PiecewiseCurve::new(dom, out_dim, segments.clone(), default)?;
    out.deficit = segments.iter().filter(|p| p.filler).map(Piece::length).sum();
    Ok(out)
}

/// Samples per refined interval used by [`ae_equal`].
const AE_SAMPLES: usize = 64;

/// Compares two curves on interiors of the common refinement; junction and
/// default values are never looked at.
pub fn ae_equal(c1: &PiecewiseCurve, c2: &PiecewiseCurve, tol: f64) -> bool {
    if !c1.domain().same_as(&c2.domain()) || c1.dim() != c2.dim() {
        return false;
    }
    let knots = common_knots(&[c1, c2]);
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let s1 = &c1.segments[c1.segment_index(0.5 * (lo + hi)).unwrap()];
        let s2 = &c2.segments[c2.segment_index(0.5 * (lo + hi)).unwrap()];
        for i in 0..AE_SAMPLES {
            let t = lo + (i as f64 + 0.5) / AE_SAMPLES as f64 * (hi - lo);
            let d = (s1.eval(t) - s2.eval(t)).norm();
            if !(d <= tol) {
                return false;
            }
        }
    }
    true
}

/// Splits sampled data at consecutive jumps larger than `jump_tol`
/// (euclidean) and interpolates linearly inside each run. A jump between
/// `t_i` and `t_{i+1}` becomes a breakpoint at their midpoint.
pub fn from_borel_samples(
    grid: &[f64],
    values: &[DVector<f64>],
    jump_tol: f64,
) -> Result<PiecewiseCurve> {
    if grid.len() < 2 || grid.len() != values.len() {
        return Err(Error::InvalidInput(
            "need at least two samples and one value per grid point".into(),
        ));
    }
    if !(jump_tol > 0.0) {
        return Err(Error::InvalidParameter("jump_tol must be positive".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "grid must be finite and strictly increasing".into(),
        ));
    }
    let dim = values[0].len();
    if values
        .iter()
        .any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite()))
    {
        return Err(Error::InvalidInput(
            "sample values must be finite with a common dimension".into(),
        ));
    }
    let domain = Interval::new(grid[0], grid[grid.len() - 1])?;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 0..grid.len() - 1 {
        if (&values[i + 1] - &values[i]).norm() > jump_tol {
            runs.push((start, i));
            start = i + 1;
        }
    }
    runs.push((start, grid.len() - 1));
    let mut pieces = Vec::with_capacity(runs.len());
    for (k, &(s, e)) in runs.iter().enumerate() {
        let lo = if k == 0 {
            domain.a
        } else {
            0.5 * (grid[s - 1] + grid[s])
        };
        let hi = if k + 1 == runs.len() {
            domain.b
        } else {
            0.5 * (grid[e] + grid[e + 1])
        };
        if s == e {
            pieces.push(Piece::constant(lo, hi, values[s].clone()));
            continue;
        }
        let ts: Vec<f64> = grid[s..=e].to_vec();
        let vs: Vec<DVector<f64>> = values[s..=e].to_vec();
        pieces.push(Piece::func(lo, hi, move |t| interpolate(&ts, &vs, t)));
    }
    PiecewiseCurve::new(domain, dim, pieces, DVector::zeros(dim))
}

/// Linear interpolation, held constant outside the sample range.
fn interpolate(ts: &[f64], vs: &[DVector<f64>], t: f64) -> DVector<f64> {
    if t <= ts[0] {
        return vs[0].clone();
    }
    if t >= ts[ts.len() - 1] {
        return vs[vs.len() - 1].clone();
    }
    let j = ts.partition_point(|&x| x <= t) - 1;
    let w = (t - ts[j]) / (ts[j + 1] - ts[j]);
    &vs[j] * (1.0 - w) + &vs[j + 1] * w
}

/// Values of the curve on a grid, i.e. a Borel representative sampled.
pub fn to_borel_samples(curve: &PiecewiseCurve, grid: &[f64]) -> Result<Vec<DVector<f64>>> {
    grid.iter().map(|&t| curve.eval(t)).collect()
}
