use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use lpevol::cli::RunSpec;
use lpevol::controls::ControlSpec;
use lpevol::evolution::{evolve, EvolConfig};
use lpevol::lebesgue::{inclusion_check, lp_seminorm, subdivide, Exponent, LpElement};
use lpevol::lie_core::{exp_alg, log_grp, mat_to_vec, vec_to_mat, AlgebraElement, MatrixGroup};
use lpevol::measurable::{Interval, PiecewiseCurve, Seminorm};
use lpevol::quadrature::QuadratureConfig;

fn step_curve() -> impl Strategy<Value = PiecewiseCurve> {
    (1usize..6, 1usize..4).prop_flat_map(|(pieces, dim)| {
        (
            prop::collection::vec(0.02f64..0.98, pieces - 1),
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), pieces),
        )
            .prop_map(|(mut bps, vals)| {
                bps.sort_by(f64::total_cmp);
                bps.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
                let vals: Vec<DVector<f64>> = vals.into_iter().take(bps.len() + 1).map(DVector::from_vec).collect();
                PiecewiseCurve::step(Interval::unit(), &bps, vals).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flattening_round_trips(n in 1usize..5, seed in prop::collection::vec(-5.0f64..5.0, 16)) {
        let m = DMatrix::from_fn(n, n, |i, j| seed[i * 4 + j]);
        prop_assert_eq!(vec_to_mat(&mat_to_vec(&m), n), m);
    }

    #[test]
    fn holder_inclusion_on_steps(curve in step_curve()) {
        let grid = Exponent::standard_grid();
        for p in grid {
            let el = LpElement::new(curve.clone(), p, QuadratureConfig::default()).unwrap();
            for r in grid.into_iter().filter(|r| *r >= p) {
                let (lhs, rhs) = inclusion_check(&el, r, &Seminorm::Euclidean).unwrap();
                prop_assert!(lhs <= rhs * (1.0 + 1e-10), "p={p} r={r}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn subdivision_preserves_l1_mass(curve in step_curve(), n in 1usize..20) {
        let cfg = QuadratureConfig::default();
        let l1 = Exponent::Finite(1.0);
        let whole = lp_seminorm(&curve, &Seminorm::Euclidean, l1, &cfg).unwrap();
        let parts: f64 = subdivide(&curve, n)
            .unwrap()
            .iter()
            .map(|c| lp_seminorm(c, &Seminorm::Euclidean, l1, &cfg).unwrap())
            .sum();
        prop_assert!((parts - whole).abs() <= 1e-10 * (1.0 + whole));
    }

    #[test]
    fn so3_exp_is_orthogonal_and_log_inverts(c in prop::collection::vec(-0.15f64..0.15, 3)) {
        let g = MatrixGroup::SpecialOrthogonal3;
        let a = AlgebraElement::new(g, g.from_coords(&c).unwrap()).unwrap();
        let r = exp_alg(&a);
        let m = r.matrix();
        prop_assert!((m.transpose() * m - DMatrix::identity(3, 3)).norm() < 1e-13);
        let back = log_grp(&r).unwrap();
        prop_assert!((back.matrix() - a.matrix()).norm() < 1e-10);
    }

    #[test]
    fn step_evolution_is_product_of_exponentials(vals in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 1..4)) {
        let g = MatrixGroup::gl(2);
        let k = vals.len();
        let bps: Vec<f64> = (1..k).map(|i| i as f64 / k as f64).collect();
        let mats: Vec<DMatrix<f64>> = vals.iter().map(|v| g.from_coords(v).unwrap()).collect();
        let rep = PiecewiseCurve::step(Interval::unit(), &bps, mats.iter().map(mat_to_vec).collect()).unwrap();
        let gamma = LpElement::new(rep, Exponent::Finite(1.0), QuadratureConfig::default()).unwrap();
        let res = evolve(g, &gamma, &EvolConfig::default()).unwrap();
        let want = mats.iter().fold(DMatrix::identity(2, 2), |acc, a| acc * (a / k as f64).exp());
        prop_assert!((res.curve.eval(1.0).unwrap() - want).amax() < 1e-12);
    }

    #[test]
    fn run_spec_round_trips(values in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 1..4), p in 1.0f64..8.0) {
        let k = values.len();
        let spec = RunSpec {
            group: MatrixGroup::SpecialOrthogonal3,
            control: ControlSpec::Step {
                breakpoints: (1..k).map(|i| i as f64 / k as f64).collect(),
                values,
            },
            p: Exponent::Finite(p),
            domain: [0.0, 1.0],
            evolve: EvolConfig::default(),
            output: Default::default(),
            seed: 3,
            convergence_ns: vec![4, 8],
        };
        let json = RunSpec::from_json(&spec.to_json()).unwrap();
        prop_assert_eq!(&json, &spec);
        let toml = RunSpec::from_toml(&spec.to_toml().unwrap()).unwrap();
        prop_assert_eq!(&toml, &spec);
    }
}
