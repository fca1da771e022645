use proptest::prelude::*;

use fracstokes::fracops::{caputo_derivative, reconstruct_from_caputo, riemann_liouville_integral};
use fracstokes::specfun::{mittag_leffler, tgamma, MlParams};
use fracstokes::weighted::{
    check_embedding, holder_lemma_check, lp_norm, weighted_norm, Embedding, WeightedSpaceSpec,
};
use fracstokes::{FracOrder, TimeGrid, Trajectory};

fn traj(g: &TimeGrid, c: &[f64]) -> Trajectory {
    // c = [a0, a1, w1, a2, w2]
    let c = c.to_vec();
    Trajectory::scalar_fn(g, "v", move |t| c[0] + c[1] * (c[2] * t).sin() + c[3] * (c[4] * t).cos()).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integral_is_linear(a in 0.05f64..1.0, c1 in coeffs(), c2 in coeffs(), s in -2.0f64..2.0) {
        let g = TimeGrid::graded(1.5, 64, 2.0).unwrap();
        let (u, v) = (traj(&g, &c1), traj(&g, &c2));
        let sum = Trajectory::scalar(&g, u.values().iter().zip(v.values()).map(|(x, y)| x + s * y).collect(), "w").unwrap();
        let o = FracOrder::new(a).unwrap();
        let (ju, jv, js) = (
            riemann_liouville_integral(&u, o).unwrap(),
            riemann_liouville_integral(&v, o).unwrap(),
            riemann_liouville_integral(&sum, o).unwrap(),
        );
        let scale = 1.0 + js.sup_norm();
        for i in 0..g.len() {
            let want = ju.values()[i] + s * jv.values()[i];
            prop_assert!((js.values()[i] - want).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn caputo_ignores_constants(a in 0.05f64..0.99, c in coeffs(), k in -5.0f64..5.0) {
        let g = TimeGrid::uniform(1.0, 64).unwrap();
        let v = traj(&g, &c);
        let shifted = Trajectory::scalar(&g, v.values().iter().map(|x| x + k).collect(), "w").unwrap();
        let o = FracOrder::new(a).unwrap();
        let (d1, d2) = (caputo_derivative(&v, o).unwrap(), caputo_derivative(&shifted, o).unwrap());
        prop_assert!(d1.values()[0].is_nan());
        for i in 1..g.len() {
            prop_assert!((d1.values()[i] - d2.values()[i]).abs() <= 1e-10 * (1.0 + d1.values()[i].abs()));
        }
    }

    #[test]
    fn reconstruction_inverts_caputo(a in 0.1f64..0.95, c in coeffs()) {
        let g = TimeGrid::graded(1.0, 128, 2.0).unwrap();
        let v = traj(&g, &c);
        let o = FracOrder::new(a).unwrap();
        let d = caputo_derivative(&v, o).unwrap();
        let w = reconstruct_from_caputo(&d, v.row(0), o).unwrap();
        // composing the two product rules loses accuracy near t = 0 only
        prop_assert!(w.sup_distance(&v).unwrap() <= 0.05 * (1.0 + v.sup_norm()));
    }

    #[test]
    fn weighted_norm_axioms(a in 0.0f64..=1.0, p in 1.0f64..5.0, c1 in coeffs(), c2 in coeffs(), s in -4.0f64..4.0) {
        let spec = WeightedSpaceSpec::new(a, p, 2.0).unwrap();
        let g = TimeGrid::uniform(2.0, 96).unwrap();
        let (u, v) = (traj(&g, &c1), traj(&g, &c2));
        let nu = weighted_norm(&u, spec).unwrap();
        let scaled = Trajectory::scalar(&g, u.values().iter().map(|x| s * x).collect(), "su").unwrap();
        prop_assert!((weighted_norm(&scaled, spec).unwrap() - s.abs() * nu).abs() <= 1e-12 * (1.0 + s.abs() * nu));
        let sum = Trajectory::scalar(&g, u.values().iter().zip(v.values()).map(|(x, y)| x + y).collect(), "w").unwrap();
        let lhs = weighted_norm(&sum, spec).unwrap();
        let rhs = nu + weighted_norm(&v, spec).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn chain_of_inclusions(a in 0.0f64..0.95, db in 0.01f64..1.0, p in 1.0f64..4.0, c in coeffs(), t_end in 0.3f64..3.0) {
        let b = (a + db).min(1.0);
        prop_assume!(b > a);
        let g = TimeGrid::uniform(t_end, 128).unwrap();
        let r = check_embedding(&traj(&g, &c), Embedding::AlphaToBeta { alpha: a, beta: b, p, t_end }).unwrap();
        prop_assert!(r.passed, "{}", r);
    }

    #[test]
    fn holder_lemma(a in 0.05f64..0.95, p in 1.0f64..4.0, c in coeffs()) {
        let g = TimeGrid::graded(1.0, 128, 1.5).unwrap();
        let r = holder_lemma_check(&traj(&g, &c), FracOrder::new(a).unwrap(), p).unwrap();
        prop_assert!(r.passed, "{}", r);
    }

    #[test]
    fn mittag_leffler_recurrence(a in 0.4f64..1.5, b in 0.5f64..3.0, z in -10.0f64..3.0) {
        // E_{a,b}(z) = 1/Γ(b) + z E_{a,a+b}(z)
        let e1 = mittag_leffler(MlParams::new(a, b).unwrap(), z).unwrap();
        let e2 = mittag_leffler(MlParams::new(a, a + b).unwrap(), z).unwrap();
        let want = 1.0 / tgamma(b) + z * e2;
        prop_assert!((e1 - want).abs() <= 1e-10 * (1.0 + e1.abs() + (z * e2).abs()));
    }
}

#[test]
fn interpolation_endpoints() {
    let g = TimeGrid::uniform(1.0, 100).unwrap();
    let v = traj(&g, &[0.3, 1.0, 5.0, -0.5, 2.0]);
    let plain = lp_norm(&v, 3.0).unwrap();
    let one = weighted_norm(&v, WeightedSpaceSpec::new(1.0, 3.0, 1.0).unwrap()).unwrap();
    assert!((plain - one).abs() < 1e-12);
    let sup = weighted_norm(&v, WeightedSpaceSpec::new(0.0, 3.0, 1.0).unwrap()).unwrap();
    assert_eq!(sup, v.sup_norm());
}

#[test]
fn constant_in_half_weighted_l2() {
    let g = TimeGrid::uniform(1.0, 10).unwrap();
    let one = Trajectory::constant(&g, &[1.0], "1").unwrap();
    let n = weighted_norm(&one, WeightedSpaceSpec::new(0.5, 2.0, 1.0).unwrap()).unwrap();
    assert!((n - 1.062_251_932_027_196_9).abs() < 1e-12, "{n}");
}

#[test]
fn trajectory_csv_round_trip() {
    let g = TimeGrid::graded(1.0, 17, 1.7).unwrap();
    let v = Trajectory::from_fn(&g, 2, "v", |t, o| {
        o[0] = t.exp();
        o[1] = (3.0 * t).sin() / 7.0;
    })
    .unwrap();
    let mut buf = Vec::new();
    v.write_csv(&mut buf).unwrap();
    let back = Trajectory::read_csv(&buf[..], "v").unwrap();
    assert_eq!(back.values(), v.values());
    assert_eq!(back.grid().nodes(), g.nodes());
}
