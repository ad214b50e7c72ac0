//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lpevol::cli::{run_checks, RunOptions, RunSpec};
use lpevol::controls::{curve_corpus, random_control, random_poly, random_trig, ControlSpec};
use lpevol::evolution::{
    directional_derivative_evol, evol_endpoint, evolve, evolve_fixed, lp_lq_consistency, EvolConfig, Method,
};
use lpevol::lebesgue::{
    inclusion_check, lp_seminorm, subdivide, theta_fd_error, Exponent, FdScheme, FiberLinearMap, LpElement,
};
use lpevol::lie_core::{mat_to_vec, so3_generator, MatrixGroup};
use lpevol::measurable::{Interval, PiecewiseCurve, Seminorm};
use lpevol::quadrature::QuadratureConfig;
use lpevol::Error;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn quad() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn element(rep: PiecewiseCurve, p: Exponent) -> LpElement {
    LpElement::new(rep, p, quad()).expect("control in L^p")
}

fn grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    (0..points).map(|k| a + (b - a) * k as f64 / (points - 1) as f64).collect()
}

/// `∫_0^t` of the algebra coordinates, from the closed-form antiderivative of
/// each descriptor.
fn coord_integral(spec: &ControlSpec, t: f64) -> Vec<f64> {
    match spec {
        ControlSpec::Poly { coeffs } => {
            let mut out = vec![0.0; coeffs[0].len()];
            for (k, c) in coeffs.iter().enumerate() {
                let w = t.powi(k as i32 + 1) / (k + 1) as f64;
                for (o, x) in out.iter_mut().zip(c) {
                    *o += x * w;
                }
            }
            out
        }
        ControlSpec::Trig { constant, terms } => {
            let mut out: Vec<f64> = constant.as_ref().expect("random trig has a constant").iter().map(|c| c * t).collect();
            for term in terms {
                let w = ((term.phase).cos() - (term.freq * t + term.phase).cos()) / term.freq;
                for (o, x) in out.iter_mut().zip(&term.coords) {
                    *o += x * w;
                }
            }
            out
        }
        ControlSpec::Step { breakpoints, values } => {
            let mut edges = vec![0.0];
            edges.extend(breakpoints);
            edges.push(1.0);
            let mut out = vec![0.0; values[0].len()];
            for (i, v) in values.iter().enumerate() {
                let len = (t.min(edges[i + 1]) - edges[i]).max(0.0);
                for (o, x) in out.iter_mut().zip(v) {
                    *o += x * len;
                }
            }
            out
        }
        other => panic!("no closed-form integral for {other:?}"),
    }
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let g = MatrixGroup::translation(3);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let spec = if i % 2 == 0 { random_poly(g, &mut rng, 3, 2.0) } else { random_trig(g, &mut rng, 3, 2.0) };
        let gamma = element(spec.build(g, Interval::unit(), None).map_err(|e| e.to_string())?, Exponent::Finite(1.0));
        let eta = evolve(g, &gamma, &EvolConfig::default()).map_err(|e| e.to_string())?.curve;
        for t in grid(0.0, 1.0, 201) {
            let want = g.identity_matrix() + g.from_coords(&coord_integral(&spec, t)).unwrap();
            worst = worst.max((eta.eval(t).unwrap() - want).amax());
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let msg = format!("sup distance {worst:.3e} (tol 1e-9), {secs:.3} s (limit 1 s)");
    if worst <= 1e-9 && secs < 1.0 { Ok(msg) } else { Err(msg) }
}

fn criterion_2() -> Outcome {
    let g = MatrixGroup::PositiveScalars;
    let rep = PiecewiseCurve::power(Interval::unit(), DVector::from_element(1, 1.0), -1.0 / 3.0).unwrap();
    let end = evol_endpoint(g, &element(rep.clone(), Exponent::Finite(2.0)), &EvolConfig::default())
        .map_err(|e| e.to_string())?;
    let rel = (end.matrix()[(0, 0)] / 1.5f64.exp() - 1.0).abs();
    let rejected = matches!(LpElement::new(rep, Exponent::Finite(3.0), quad()), Err(Error::NotInLp(_)));
    let msg = format!("relative error {rel:.3e} (tol 1e-8), p = 3 rejected: {rejected}");
    if rel <= 1e-8 && rejected { Ok(msg) } else { Err(msg) }
}

fn criterion_3() -> Outcome {
    let g = MatrixGroup::gl(2);
    let a1 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let a2 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    let rep = PiecewiseCurve::step(Interval::unit(), &[0.5], vec![mat_to_vec(&a1), mat_to_vec(&a2)]).unwrap();
    let want = DMatrix::from_row_slice(2, 2, &[1.25, 0.5, 0.5, 1.0]);
    let res = evolve(g, &element(rep, Exponent::Finite(1.0)), &EvolConfig::default()).map_err(|e| e.to_string())?;
    let err = (res.curve.eval(1.0).unwrap() - want).amax();
    let msg = format!("endpoint error {err:.3e}, residual {:.3e} (tol 1e-12 each)", res.residual);
    if err <= 1e-12 && res.residual <= 1e-12 { Ok(msg) } else { Err(msg) }
}

fn criterion_4() -> Outcome {
    let g = MatrixGroup::gl(2);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_ratio = 0.0f64;
    for i in 0..20 {
        let spec = random_control(g, &mut rng, i, 1.5);
        let rep = spec.build(g, Interval::unit(), None).map_err(|e| e.to_string())?;
        let eta = evolve(g, &element(rep, Exponent::Finite(1.0)), &EvolConfig::default())
            .map_err(|e| e.to_string())?
            .curve;
        let trace = |t: f64| {
            let c = coord_integral(&spec, t);
            g.from_coords(&c).unwrap().trace()
        };
        // ∫|tr γ| by a fine midpoint sum; it only scales the tolerance
        let m = 20_000;
        let abs_mass: f64 = (0..m)
            .map(|k| {
                let (s, e) = (k as f64 / m as f64, (k + 1) as f64 / m as f64);
                (trace(e) - trace(s)).abs()
            })
            .sum();
        let mut err = 0.0f64;
        for t in grid(0.0, 1.0, 201) {
            err = err.max((eta.eval(t).unwrap().determinant() - trace(t).exp()).abs());
        }
        worst_ratio = worst_ratio.max(err / (1e-8 * abs_mass.exp()));
    }
    let msg = format!("worst error / (1e-8 e^(∫|tr γ|)) = {worst_ratio:.3e} over 20 controls");
    if worst_ratio <= 1.0 { Ok(msg) } else { Err(msg) }
}

fn criterion_5() -> Outcome {
    let g = MatrixGroup::SpecialOrthogonal3;
    let z = so3_generator(2);
    let dom = Interval::new(0.0, 2.0).unwrap();
    let rep = PiecewiseCurve::constant(dom, mat_to_vec(&z)).unwrap();
    let eta = evolve(g, &element(rep, Exponent::Finite(1.0)), &EvolConfig::default())
        .map_err(|e| e.to_string())?
        .curve;
    let mut orth = 0.0f64;
    for t in grid(dom.a, dom.b, 201) {
        let r = eta.eval(t).unwrap();
        orth = orth.max((r.transpose() * &r - DMatrix::identity(3, 3)).norm());
    }
    let rot = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let rod = (eta.eval(FRAC_PI_2).unwrap() - rot).norm();
    let msg = format!("orthogonality defect {orth:.3e}, Rodrigues error {rod:.3e} (tol 1e-8 each)");
    if orth <= 1e-8 && rod <= 1e-8 { Ok(msg) } else { Err(msg) }
}

fn max_part_norm(curve: &PiecewiseCurve, n: usize, p: Exponent) -> f64 {
    subdivide(curve, n)
        .unwrap()
        .iter()
        .map(|c| lp_seminorm(c, &Seminorm::Euclidean, p, &quad()).unwrap())
        .fold(0.0, f64::max)
}

fn criterion_6() -> Outcome {
    let started = Instant::now();
    let one = PiecewiseCurve::constant(Interval::unit(), DVector::from_element(1, 1.0)).unwrap();
    let mut const_ok = true;
    for n in 1..=64 {
        let m = max_part_norm(&one, n, Exponent::Finite(2.0));
        let exact = 1.0 / n as f64;
        const_ok &= (m - exact).abs() <= 1e-12 * exact && m <= (n as f64).powf(-0.5) * (1.0 + 1e-8);
    }
    let singular = PiecewiseCurve::power(Interval::unit(), DVector::from_element(1, 1.0), -1.0 / 3.0).unwrap();
    let ns: Vec<usize> = (0..=12).map(|k| 1 << k).collect();
    let maxima: Vec<f64> = ns.iter().map(|&n| max_part_norm(&singular, n, Exponent::Finite(1.0))).collect();
    let decreasing = maxima.windows(2).all(|w| w[1] < w[0]);
    // the first part carries the singularity: ∫_0^{1/n} t^{-1/3} dt = 1.5 n^{-2/3}
    let oracle = ns
        .iter()
        .zip(&maxima)
        .all(|(n, m)| (m - 1.5 * (*n as f64).powf(-2.0 / 3.0)).abs() <= 1e-12);
    let last = maxima[maxima.len() - 1];
    let secs = started.elapsed().as_secs_f64();
    let msg = format!(
        "constant control exact: {const_ok}, singular decreasing: {decreasing}, closed form: {oracle}, max at n = 4096: {last:.3e}, {secs:.3} s"
    );
    if const_ok && decreasing && oracle && last < 1e-2 && secs < 1.0 { Ok(msg) } else { Err(msg) }
}

fn criterion_7() -> Outcome {
    let grid = Exponent::standard_grid();
    let mut worst = 0.0f64;
    let mut pairs = 0;
    let mut outside = 0;
    for curve in curve_corpus(7) {
        for p in grid {
            let Ok(el) = LpElement::new(curve.clone(), p, quad()) else {
                outside += 1;
                continue;
            };
            for r in grid.into_iter().filter(|r| *r >= p) {
                match inclusion_check(&el, r, &Seminorm::Euclidean) {
                    Ok((lhs, rhs)) => {
                        pairs += 1;
                        worst = worst.max(lhs / rhs);
                    }
                    Err(Error::NotInLp(_)) => outside += 1,
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
    }
    let msg = format!("worst lhs/rhs {worst:.12} over {pairs} pairs ({outside} not in the larger space)");
    if worst <= 1.0 + 1e-8 { Ok(msg) } else { Err(msg) }
}

fn criterion_8() -> Outcome {
    let mut worst = 0.0f64;
    let mut runs = 0;
    for (group, seed) in [(MatrixGroup::gl(2), 81), (MatrixGroup::SpecialOrthogonal3, 82)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..3 {
            let spec = RunSpec {
                group,
                control: random_control(group, &mut rng, i, 1.0),
                p: Exponent::Finite(1.0),
                domain: [0.0, 1.0],
                evolve: EvolConfig::default(),
                output: Default::default(),
                seed: seed + i as u64,
                convergence_ns: vec![4],
            };
            for c in run_checks(&spec, &RunOptions::default()).map_err(|e| e.to_string())? {
                let name = c["name"].as_str().unwrap();
                if name.starts_with("rule-") {
                    worst = worst.max(c["value"].as_f64().unwrap());
                    runs += 1;
                }
            }
        }
    }
    let msg = format!("worst rule error {worst:.3e} (tol 1e-6) over {runs} checks");
    if worst <= 1e-6 { Ok(msg) } else { Err(msg) }
}

fn slope(ns: &[usize], rs: &[f64]) -> f64 {
    lpevol::cli::loglog_slope(ns, rs)
}

fn criterion_9() -> Outcome {
    let started = Instant::now();
    let g = MatrixGroup::SpecialOrthogonal3;
    let rep = PiecewiseCurve::from_fn(Interval::unit(), 9, |t| {
        let a = so3_generator(0) * (3.0 * t).cos() * 2.0
            + so3_generator(1) * (2.0 * t).sin() * 3.0
            + so3_generator(2) * (1.0 + t * t);
        mat_to_vec(&a)
    })
    .unwrap();
    let gamma = element(rep, Exponent::Finite(1.0));
    let ns = [4, 8, 16, 32, 64];
    let mut slopes = Vec::new();
    for method in [Method::ExpMidpoint, Method::Cf4] {
        let mut rs = Vec::new();
        for &n in &ns {
            let cfg = EvolConfig::default().with_method(method).with_n(n);
            rs.push(evolve_fixed(g, &gamma, &cfg).map_err(|e| e.to_string())?.residual);
        }
        slopes.push(slope(&ns, &rs));
    }
    let secs = started.elapsed().as_secs_f64();
    let msg = format!("midpoint slope {:.3}, order-4 slope {:.3}, {secs:.2} s", slopes[0], slopes[1]);
    if (slopes[0] + 2.0).abs() <= 0.3 && (slopes[1] + 4.0).abs() <= 0.3 && secs < 10.0 { Ok(msg) } else { Err(msg) }
}

fn criterion_10() -> Outcome {
    let dom = Interval::unit();
    // Θ for (u, v) -> v e^u along η = t, γ = 1 + t², direction (sin t, 1)
    let f = FiberLinearMap::exp_scaling();
    let base = PiecewiseCurve::scalar_fn(dom, |t| t).unwrap();
    let curve = PiecewiseCurve::scalar_fn(dom, |t| 1.0 + t * t).unwrap();
    let bdir = PiecewiseCurve::scalar_fn(dom, f64::sin).unwrap();
    let cdir = PiecewiseCurve::constant(dom, DVector::from_element(1, 1.0)).unwrap();
    let theta = |h: f64| {
        theta_fd_error(&f, &base, &curve, &bdir, &cdir, h, FdScheme::Central, &Seminorm::Euclidean, &quad()).unwrap()
    };
    let theta_ratio = theta(1e-2) / theta(5e-3);

    // scalars: evol(γ)(1) = exp(∫γ), so the derivative along δγ is e^{∫γ} ∫δγ
    let g = MatrixGroup::PositiveScalars;
    let gamma = element(PiecewiseCurve::scalar_fn(dom, |t| 2.0 * t).unwrap(), Exponent::Finite(1.0));
    let dg = PiecewiseCurve::scalar_fn(dom, |t| 3.0 * t * t).unwrap();
    let cfg = EvolConfig::default();
    let e = std::f64::consts::E;
    let evol_err = |h: f64| (directional_derivative_evol(g, &gamma, &dg, h, &cfg).unwrap()[(0, 0)] - e).abs();
    let evol_ratio = evol_err(0.1) / evol_err(0.05);

    // translations: evol is affine in γ, so the quotient is exact
    let tg = MatrixGroup::translation(2);
    let tgamma = element(
        PiecewiseCurve::from_fn(dom, 9, move |t| mat_to_vec(&tg.from_coords(&[t.cos(), 1.0]).unwrap())).unwrap(),
        Exponent::Finite(1.0),
    );
    let tdir = PiecewiseCurve::from_fn(dom, 9, move |t| mat_to_vec(&tg.from_coords(&[t, -2.0]).unwrap())).unwrap();
    let want = tg.from_coords(&[0.5, -2.0]).unwrap();
    let trans_err = (directional_derivative_evol(tg, &tgamma, &tdir, 0.1, &cfg).unwrap() - want).amax();

    let msg = format!(
        "Θ ratio {theta_ratio:.3}, scalar evol ratio {evol_ratio:.3} (need >= 3.5), translation quotient error {trans_err:.1e}"
    );
    if theta_ratio >= 3.5 && evol_ratio >= 3.5 && trans_err <= 1e-12 { Ok(msg) } else { Err(msg) }
}

fn criterion_11() -> Outcome {
    let g = MatrixGroup::SpecialOrthogonal3;
    let rep = PiecewiseCurve::from_fn(Interval::unit(), 9, |t| {
        mat_to_vec(&(so3_generator(0) * (2.0 * t).sin() + so3_generator(1) * t + so3_generator(2) * 0.5))
    })
    .unwrap();
    let r = lp_lq_consistency(g, &rep, Exponent::Finite(1.0), Exponent::Infinity, &EvolConfig::default())
        .map_err(|e| e.to_string())?;
    let msg = format!("sup distance {:.3e} (tol 1e-9)", r.sup_distance);
    if r.sup_distance <= 1e-9 { Ok(msg) } else { Err(msg) }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("abelian oracle", criterion_1),
        ("scalar oracle", criterion_2),
        ("step-control exactness", criterion_3),
        ("determinant homomorphism", criterion_4),
        ("SO(3) orthogonality and Rodrigues", criterion_5),
        ("subdivision property", criterion_6),
        ("Hölder inclusion constants", criterion_7),
        ("logarithmic-derivative calculus", criterion_8),
        ("convergence orders", criterion_9),
        ("finite-difference surrogates", criterion_10),
        ("L^p to L^q consistency", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
