//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature for vector-valued
//! integrands.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |I|)`. An interval that would
//! need to be split beyond `max_depth` bisections is reported as divergent,
//! which is how non-integrable singularities surface to callers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1], positive half, descending. Odd indices are
/// the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_634_775,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const MAX_SUBDIVISIONS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_depth: 48,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: usize) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_depth,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidParameter("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

struct Panel {
    lo: f64,
    hi: f64,
    depth: usize,
    value: DVector<f64>,
    err: f64,
    abs_mass: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn kronrod_panel<F>(f: &F, lo: f64, hi: f64, depth: usize) -> Result<Panel>
where
    F: Fn(f64) -> DVector<f64>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kron = &fc * WGK[10];
    let mut gauss = DVector::zeros(fc.len());
    let mut abs_mass = fc.amax() * WGK[10];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        abs_mass += w * (f1.amax() + f2.amax());
        let sum = f1 + f2;
        if j % 2 == 1 {
            gauss += &sum * WG[j / 2];
        }
        kron += sum * w;
    }
    kron *= half;
    gauss *= half;
    abs_mass *= half.abs();
    if kron.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotInLp(format!(
            "integrand is not finite on [{lo}, {hi}]"
        )));
    }
    let err = (&kron - &gauss).amax();
    Ok(Panel {
        lo,
        hi,
        depth,
        value: kron,
        err,
        abs_mass,
    })
}

/// Integrates a vector-valued `f` over `[a, b]`. `a > b` flips the sign.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<DVector<f64>>
where
    F: Fn(f64) -> DVector<f64>,
{
    if a == b {
        return Ok(DVector::zeros(f(a).len()));
    }
    if a > b {
        return integrate(f, b, a, cfg).map(|v| -v);
    }
    let first = kronrod_panel(&f, a, b, 0)?;
    let mut total = first.value.clone();
    let mut total_err = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut splits = 0;
    loop {
        let mass: f64 = heap.iter().map(|p| p.abs_mass).sum();
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.amax());
        let floor = 64.0 * f64::EPSILON * mass;
        if total_err <= tol || total_err <= floor {
            return Ok(total);
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        if worst.depth >= cfg.max_depth || splits >= MAX_SUBDIVISIONS {
            return Err(Error::NotInLp(format!(
                "quadrature did not converge near [{}, {}] (error estimate {:e})",
                worst.lo, worst.hi, total_err
            )));
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = kronrod_panel(&f, worst.lo, mid, worst.depth + 1)?;
        let right = kronrod_panel(&f, mid, worst.hi, worst.depth + 1)?;
        total -= &worst.value;
        total += &left.value;
        total += &right.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        splits += 1;
        // Re-sum occasionally to keep cancellation noise out of the estimate.
        if splits % 64 == 0 {
            total_err = heap.iter().map(|p| p.err).sum();
        }
    }
}

pub fn integrate_scalar<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|t| DVector::from_element(1, f(t)), a, b, cfg).map(|v| v[0])
}

/// Fixed `m`-point Gauss–Legendre nodes and weights on [-1, 1] by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 0 { 1.0 } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * pm - pm1) / (x * x - 1.0);
            let dx = pm / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_exact(deg: i32, a: f64, b: f64) -> f64 {
        (b.powi(deg + 1) - a.powi(deg + 1)) / (deg as f64 + 1.0)
    }

    #[test]
    fn kronrod_rule_exact_to_degree_31() {
        for deg in 0..=31 {
            let p = kronrod_panel(&|t: f64| DVector::from_element(1, t.powi(deg)), -0.3, 1.1, 0)
                .unwrap();
            let exact = poly_exact(deg, -0.3, 1.1);
            assert!(
                (p.value[0] - exact).abs() <= 1e-13 * exact.abs().max(1.0),
                "degree {deg}: {} vs {exact}",
                p.value[0]
            );
        }
    }

    #[test]
    fn gauss_rule_exact_to_degree_19() {
        for deg in 0..=19 {
            let p = kronrod_panel(&|t: f64| DVector::from_element(1, t.powi(deg)), 0.0, 1.0, 0)
                .unwrap();
            // both rules exact, so the embedded error estimate vanishes
            assert!(p.err < 1e-13, "degree {deg}: err {}", p.err);
        }
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let cfg = QuadratureConfig::default();
        let v = integrate_scalar(|t| (40.0 * t).sin(), 0.0, 3.0, &cfg).unwrap();
        let exact = (1.0 - (120.0f64).cos()) / 40.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let cfg = QuadratureConfig::default();
        let v = integrate_scalar(|t| t * t, 1.0, 0.0, &cfg).unwrap();
        assert!((v + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn divergent_singularity_is_reported() {
        let cfg = QuadratureConfig::default();
        let r = integrate_scalar(|t| 1.0 / t, 0.0, 1.0, &cfg);
        assert!(matches!(r, Err(Error::NotInLp(_))));
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for m in 1..12 {
            let gl = gauss_legendre(m);
            let s: f64 = gl.iter().map(|(_, w)| w).sum();
            assert!((s - 2.0).abs() < 1e-13, "m={m}");
            let deg = 2 * m as i32 - 1;
            let q: f64 = gl.iter().map(|(x, w)| w * x.powi(deg - 1)).sum();
            assert!((q - poly_exact(deg - 1, -1.0, 1.0)).abs() < 1e-13);
        }
    }
}
