//! Declarative control descriptors and seeded random corpora.
//!
//! Controls are given by coordinates in the group's algebra basis and
//! built as row-major matrix-valued curves.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_core::{mat_to_vec, MatrixGroup};
use crate::measurable::{from_borel_samples, Interval, PiecewiseCurve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub coords: Vec<f64>,
    pub freq: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ControlSpec {
    /// Constant `values[i]` between consecutive breakpoints.
    Step {
        breakpoints: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    /// `Σ_k coeffs[k] t^k`.
    Poly { coeffs: Vec<Vec<f64>> },
    /// `constant + Σ coords sin(freq t + phase)`.
    Trig {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constant: Option<Vec<f64>>,
        terms: Vec<TrigTerm>,
    },
    /// `coords |t - a|^exponent`, singular at the left endpoint when
    /// `exponent < 0`.
    Power { coords: Vec<f64>, exponent: f64 },
    /// CSV rows `t, c_1, ..., c_k`; jumps larger than `jump_tol` become
    /// breakpoints, linear interpolation elsewhere.
    SamplesFile {
        path: String,
        #[serde(default = "default_jump_tol")]
        jump_tol: f64,
    },
}

fn default_jump_tol() -> f64 {
    1e-6
}

fn coords_to_vec(group: MatrixGroup, coords: &[f64]) -> Result<DVector<f64>> {
    let m = group
        .from_coords(coords)
        .map_err(|e| Error::InvalidControl(e.to_string()))?;
    Ok(mat_to_vec(&m))
}

impl ControlSpec {
    /// The matrix-valued control on `domain`; relative sample-file paths
    /// are resolved against `base_dir`.
    pub fn build(&self, group: MatrixGroup, domain: Interval, base_dir: Option<&Path>) -> Result<PiecewiseCurve> {
        group.validate()?;
        match self {
            ControlSpec::Step { breakpoints, values } => {
                let vals = values
                    .iter()
                    .map(|c| coords_to_vec(group, c))
                    .collect::<Result<Vec<_>>>()?;
                PiecewiseCurve::step(domain, breakpoints, vals)
            }
            ControlSpec::Poly { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::InvalidParameter("polynomial needs coefficients".into()));
                }
                let cs = coeffs
                    .iter()
                    .map(|c| coords_to_vec(group, c))
                    .collect::<Result<Vec<_>>>()?;
                let dim = cs[0].len();
                PiecewiseCurve::from_fn(domain, dim, move |t| {
                    cs.iter().rev().fold(DVector::zeros(dim), |acc, c| acc * t + c)
                })
            }
            ControlSpec::Trig { constant, terms } => {
                let n = group.ambient_dim();
                let c0 = match constant {
                    Some(c) => coords_to_vec(group, c)?,
                    None => DVector::zeros(n * n),
                };
                let ts = terms
                    .iter()
                    .map(|term| Ok((coords_to_vec(group, &term.coords)?, term.freq, term.phase)))
                    .collect::<Result<Vec<_>>>()?;
                PiecewiseCurve::from_fn(domain, n * n, move |t| {
                    ts.iter()
                        .fold(c0.clone(), |acc, (v, w, ph)| acc + v * (w * t + ph).sin())
                })
            }
            ControlSpec::Power { coords, exponent } => {
                PiecewiseCurve::power(domain, coords_to_vec(group, coords)?, *exponent)
            }
            ControlSpec::SamplesFile { path, jump_tol } => {
                let mut full = PathBuf::from(path);
                if full.is_relative() {
                    if let Some(dir) = base_dir {
                        full = dir.join(full);
                    }
                }
                let (grid, values) = read_samples(&full)?;
                let vals = values
                    .iter()
                    .map(|c| coords_to_vec(group, c))
                    .collect::<Result<Vec<_>>>()?;
                let curve = from_borel_samples(&grid, &vals, *jump_tol)?;
                if !curve.domain().same_as(&domain) {
                    return Err(Error::InvalidInput(format!(
                        "samples cover {} but the run uses {domain}",
                        curve.domain()
                    )));
                }
                Ok(curve)
            }
        }
    }

    /// Whether the control is continuous on the whole domain by
    /// construction.
    pub fn is_continuous(&self) -> bool {
        match self {
            ControlSpec::Poly { .. } | ControlSpec::Trig { .. } => true,
            ControlSpec::Power { exponent, .. } => *exponent >= 0.0,
            ControlSpec::Step { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
            ControlSpec::SamplesFile { .. } => false,
        }
    }
}

/// Reads `t, c_1, ..., c_k` rows; a non-numeric first row is a header.
pub fn read_samples(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) if row.len() >= 2 => {
                grid.push(row[0]);
                values.push(row[1..].to_vec());
            }
            Err(_) if i == 0 => continue,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "{}: malformed row {}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok((grid, values))
}

fn coords<R: Rng>(rng: &mut R, k: usize, scale: f64) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-scale..=scale)).collect()
}

pub fn random_poly<R: Rng>(group: MatrixGroup, rng: &mut R, degree: usize, scale: f64) -> ControlSpec {
    let k = group.algebra_dim();
    ControlSpec::Poly {
        coeffs: (0..=degree).map(|_| coords(rng, k, scale)).collect(),
    }
}

pub fn random_trig<R: Rng>(group: MatrixGroup, rng: &mut R, n_terms: usize, scale: f64) -> ControlSpec {
    let k = group.algebra_dim();
    ControlSpec::Trig {
        constant: Some(coords(rng, k, scale)),
        terms: (0..n_terms)
            .map(|_| TrigTerm {
                coords: coords(rng, k, scale),
                freq: rng.random_range(0.5..6.0),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
            })
            .collect(),
    }
}

/// Step control on `[0, 1]` with `n_pieces` pieces.
pub fn random_step<R: Rng>(group: MatrixGroup, rng: &mut R, n_pieces: usize, scale: f64) -> ControlSpec {
    let k = group.algebra_dim();
    let mut breakpoints: Vec<f64> = (1..n_pieces).map(|_| rng.random_range(0.05..0.95)).collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    ControlSpec::Step {
        values: (0..=breakpoints.len()).map(|_| coords(rng, k, scale)).collect(),
        breakpoints,
    }
}

/// Alternates polynomial, trigonometric and step controls.
pub fn random_control<R: Rng>(group: MatrixGroup, rng: &mut R, index: usize, scale: f64) -> ControlSpec {
    match index % 3 {
        0 => random_poly(group, rng, 3, scale),
        1 => random_trig(group, rng, 2, scale),
        _ => random_step(group, rng, 3, scale),
    }
}

/// `count` smooth (polynomial or trigonometric) controls from `seed`.
pub fn smooth_controls(group: MatrixGroup, seed: u64, count: usize, scale: f64) -> Vec<ControlSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            if i % 2 == 0 {
                random_poly(group, &mut rng, 3, scale)
            } else {
                random_trig(group, &mut rng, 2, scale)
            }
        })
        .collect()
}

/// 50 vector-valued curves of mixed kinds (constants, steps with junction
/// defaults, polynomials, trigonometric sums, integrable powers) on
/// intervals of varying length.
pub fn curve_corpus(seed: u64) -> Vec<PiecewiseCurve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..50)
        .map(|i| {
            let dim = 1 + i % 3;
            let a = rng.random_range(-1.0..1.0);
            let domain = Interval::new(a, a + rng.random_range(0.5..3.0)).expect("positive length");
            let v = |rng: &mut ChaCha8Rng| DVector::from_vec(coords(rng, dim, 2.0));
            match i % 5 {
                0 => PiecewiseCurve::constant(domain, v(&mut rng)),
                1 => {
                    let mut bps: Vec<f64> = (0..3).map(|_| rng.random_range(domain.a + 0.01..domain.b - 0.01)).collect();
                    bps.sort_by(f64::total_cmp);
                    let vals = (0..4).map(|_| v(&mut rng)).collect();
                    let default = v(&mut rng);
                    PiecewiseCurve::step(domain, &bps, vals).and_then(|c| c.with_default(default))
                }
                2 => {
                    let cs: Vec<DVector<f64>> = (0..4).map(|_| v(&mut rng)).collect();
                    PiecewiseCurve::from_fn(domain, dim, move |t| {
                        cs.iter().rev().fold(DVector::zeros(dim), |acc, c| acc * t + c)
                    })
                }
                3 => {
                    let amp = v(&mut rng);
                    let off = v(&mut rng);
                    let w = rng.random_range(1.0..8.0);
                    PiecewiseCurve::from_fn(domain, dim, move |t| &off + &amp * (w * t).sin())
                }
                _ => {
                    let e = [-0.4, -0.2, 0.5, 1.5][(i / 5) % 4];
                    PiecewiseCurve::power(domain, v(&mut rng), e)
                }
            }
            .expect("corpus curve")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::vec_to_mat;
    use std::io::Write;

    #[test]
    fn specs_build_expected_values() {
        let g = MatrixGroup::SpecialOrthogonal3;
        let d = Interval::unit();
        let poly = ControlSpec::Poly {
            coeffs: vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]],
        };
        let c = poly.build(g, d, None).unwrap();
        let m = vec_to_mat(&c.eval(0.5).unwrap(), 3);
        assert_eq!(m, g.from_coords(&[1.0, 1.0, 0.0]).unwrap());

        let trig = ControlSpec::Trig {
            constant: None,
            terms: vec![TrigTerm {
                coords: vec![0.0, 0.0, 1.0],
                freq: 2.0,
                phase: 0.0,
            }],
        };
        let c = trig.build(g, d, None).unwrap();
        assert!((c.eval(0.3).unwrap()[3] - 0.6f64.sin()).abs() < 1e-15);

        let bad = ControlSpec::Power {
            coords: vec![1.0, 2.0],
            exponent: 0.5,
        };
        assert!(bad.build(g, d, None).is_err());
    }

    #[test]
    fn samples_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ctl.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "t,x").unwrap();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            writeln!(f, "{t},{}", if t < 0.55 { 1.0 } else { 2.0 }).unwrap();
        }
        drop(f);
        let spec = ControlSpec::SamplesFile {
            path: "ctl.csv".into(),
            jump_tol: 0.5,
        };
        let c = spec.build(MatrixGroup::PositiveScalars, Interval::unit(), Some(dir.path())).unwrap();
        assert_eq!(c.eval(0.2).unwrap()[0], 1.0);
        assert_eq!(c.eval(0.9).unwrap()[0], 2.0);
        assert_eq!(c.breakpoints(), vec![0.55]);
    }

    #[test]
    fn corpus_is_deterministic_and_complete() {
        let a = curve_corpus(42);
        let b = curve_corpus(42);
        assert_eq!(a.len(), 50);
        for (x, y) in a.iter().zip(&b) {
            let t = x.domain().a + 0.37 * x.domain().length();
            assert_eq!(x.eval(t).unwrap(), y.eval(t).unwrap());
        }
        let specs = smooth_controls(MatrixGroup::gl(2), 3, 4, 1.0);
        assert_eq!(specs, smooth_controls(MatrixGroup::gl(2), 3, 4, 1.0));
    }

    #[test]
    fn spec_serde_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..6 {
            let s = random_control(MatrixGroup::Heisenberg, &mut rng, i, 1.0);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<ControlSpec>(&json).unwrap(), s, "{json}");
        }
    }
}
