#![allow(clippy::excessive_precision)]

use proptest::prelude::*;
use sphere_lp::bounds::*;
use sphere_lp::potentials::Potential;
use sphere_lp::quadrature::{dgs_bound, validity_interval};

fn riesz1() -> Potential {
    Potential::riesz(1.0).unwrap()
}

fn pentakis_s() -> f64 {
    (1.0 + 2.0 / 5f64.sqrt()).sqrt() / 3f64.sqrt()
}

fn cube_cross_capacity(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf + 2.0).powi(2) * 2f64.powi(n as i32) / (nf.powi(3) + 2f64.powi(n as i32 + 1))
}

// Values below were computed independently in 50-digit arithmetic.

#[test]
fn pentakis_ulb() {
    let r = ulb(3, 735.0 / 23.0, &riesz1()).unwrap();
    assert!((r.value - 0.804_786_057_379_828_7).abs() < 1e-12);
    assert!(r.feasible, "{:?}", r.diagnostics);
    assert_eq!(r.m, 9);
}

#[test]
fn pentakis_ulb_from_weights() {
    let mut w = vec![5.0 / 168.0; 12];
    w.extend(vec![9.0 / 280.0; 20]);
    let r = ulb_for_weights(&w, 3, &riesz1()).unwrap();
    let stats = r.weights.unwrap();
    assert!((stats.n_w - 735.0 / 23.0).abs() < 1e-11);
    assert!(stats.variance > 0.0);
    assert!((r.value - 0.804_786_057_379_828_7).abs() < 1e-12);
    let equal = WeightStats::from_weights(&[0.25; 4]).unwrap();
    assert_eq!(equal.n_w, 4.0);
    assert_eq!(equal.variance, 0.0);
}

#[test]
fn cube_cross_ulbs() {
    let expect = [
        0.875,
        0.705_807_145_854_424_6,
        0.578_125,
        0.482_534_132_122_486_2,
        0.407_476_541_266_466_2,
        0.346_224_851_478_412_8,
    ];
    for (n, e) in (2..=7).zip(expect) {
        let r = ulb(n, cube_cross_capacity(n), &Potential::newton(n).unwrap()).unwrap();
        assert!((r.value - e).abs() < 1e-11, "n={n}: {}", r.value);
        assert!(r.feasible, "n={n}: {:?}", r.diagnostics);
    }
}

#[test]
fn equal_weight_ulbs() {
    let r = ulb(3, 32.0, &riesz1()).unwrap();
    assert!((r.value - 0.804_918_447_625_002_2).abs() < 1e-12);
    let r = ulb(3, 14.0, &Potential::newton(3).unwrap()).unwrap();
    assert!((r.value - 0.706_290_969_285_334_3).abs() < 1e-12);
}

#[test]
fn pentakis_uub() {
    let r = uub(3, 735.0 / 23.0, pentakis_s(), &riesz1(), None).unwrap();
    assert_eq!(r.m, 9);
    assert!((r.value - 0.823_405_399_282_526_7).abs() < 1e-11);
    assert!((r.lambda_star.unwrap() - 7.479_941_398_326_732).abs() < 1e-9);
    assert!((r.n1.unwrap() - 34.426_819_408_868_823).abs() < 1e-9);
    assert!(r.feasible, "{:?}", r.diagnostics);
    let g = r.certificate.coeffs();
    assert!(g[1].abs() < 1e-12);
    assert!(g[2..=9].iter().all(|&c| c < 0.0));
    assert!(r.check("lambda_shortcut").unwrap().passed);
    assert!(r.check("g_t_positive_definite").unwrap().passed);
}

#[test]
fn table_4_rows() {
    let rows = [
        (2usize, 7usize, 0.875, 0.0),
        (3, 5, 0.735_633_253_000_071, 1.436_365_481_221_32),
        (4, 5, 0.598_775_308_940_144, 2.347_542_567_322_79),
        (5, 6, 0.707_979_683_538_332, 9.655_981_032_205_5),
        (6, 7, 1.042_087_744_551_46, 55.022_677_160_912_5),
        (7, 8, 1.946_367_988_577_61, 222.138_846_694_137),
    ];
    for (n, m, value, lambda) in rows {
        let nf = n as f64;
        let s = (1.0 / nf.sqrt()).max(1.0 - 2.0 / nf);
        let r = uub(n, cube_cross_capacity(n), s, &Potential::newton(n).unwrap(), Some(m)).unwrap();
        assert!((r.value - value).abs() < 1e-9 * value, "n={n}: {}", r.value);
        assert!((r.lambda_star.unwrap() - lambda).abs() < 1e-8 * lambda.max(1.0), "n={n}");
        assert!(r.feasible, "n={n}: {:?}", r.diagnostics);
    }
    // the N_1 interval hypothesis of the UUB theorem fails on the n = 3 row
    let r =
        uub(3, cube_cross_capacity(3), 1.0 / 3f64.sqrt(), &Potential::newton(3).unwrap(), Some(5)).unwrap();
    assert!(!r.check("n1_interval").unwrap().passed);
    assert!(!r.check("s_in_validity_interval").unwrap().passed);
}

#[test]
fn design_bounds() {
    let r = design_uub(3, 735.0 / 23.0, pentakis_s(), 9, &riesz1()).unwrap();
    assert!((r.value - 0.805_815_306_338_444_1).abs() < 1e-11);
    assert!(r.feasible);
    let r = design_uub(3, cube_cross_capacity(3), 1.0 / 3f64.sqrt(), 5, &riesz1()).unwrap();
    assert!((r.value - 0.708_930_376_151_281).abs() < 1e-11);
    let r = design_uub(4, 24.0, 0.5, 5, &Potential::newton(4).unwrap()).unwrap();
    assert!((r.value - 0.581_114_398_422_091).abs() < 1e-11);
    let r = design_uub(5, cube_cross_capacity(5), 0.6, 6, &Potential::newton(5).unwrap()).unwrap();
    assert!((r.value - 0.500_220_911_243_585).abs() < 1e-11);
    let r = design_uub(5, cube_cross_capacity(5), 0.6, 5, &Potential::newton(5).unwrap()).unwrap();
    assert!((r.value - 0.510_734_624_487_812).abs() < 1e-11);

    let d = design_ulb(3, 735.0 / 23.0, 9, &riesz1()).unwrap();
    let u = ulb(3, 735.0 / 23.0, &riesz1()).unwrap();
    assert!((d.value - u.value).abs() < 1e-14);
    assert!(!d.check("positive_definite").unwrap().gating);
}

#[test]
fn design_ulb_fejes_toth() {
    let cap = 735.0 / 23.0;
    let ft = design_ulb(3, cap, 9, &Potential::FejesToth).unwrap();
    assert!(ft.value.is_finite());
    assert!(ft.feasible, "{:?}", ft.diagnostics);
    let shifted = design_ulb(3, cap, 9, &Potential::shifted(Potential::FejesToth, 2.0)).unwrap();
    assert!((shifted.value - (ft.value + 2.0 * (1.0 - 1.0 / cap))).abs() < 1e-10);
}

#[test]
fn small_degree_uub() {
    let h = Potential::gaussian(1.5).unwrap();
    let r = uub(4, 3.0, -0.6, &h, None).unwrap();
    assert_eq!(r.m, 1);
    assert_eq!(r.lambda_star, Some(0.0));
    assert!((r.value - (1.0 - 1.0 / 3.0) * h.eval(-0.6).unwrap()).abs() < 1e-13);
}

#[test]
fn test_function_examples() {
    let q = test_functions(3, 735.0 / 23.0, 27).unwrap();
    assert_eq!(q.m, 9);
    assert!(q.max_vanishing_residual < 1e-9);
    assert!(q.values[9].value >= -1e-9 && q.values[10].value >= -1e-9);
}

#[test]
fn ulb_increases_with_capacity() {
    for n in [3usize, 4, 6] {
        let v: Vec<f64> =
            [5.0, 8.0, 20.0, 100.0].iter().map(|&c| ulb(n, c, &riesz1()).unwrap().value).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]), "n={n}: {v:?}");
    }
}

/// Perturbing the ULB certificate by `delta P_j` either breaks feasibility or
/// does not raise the objective.
#[test]
fn ulb_certificate_is_lp_optimal_at_degree_m() {
    use sphere_lp::hermite::{verify_dominance, Direction};
    use sphere_lp::orthopoly::{from_gegenbauer, GegenbauerSeries};
    let h = riesz1();
    let r = ulb(3, 735.0 / 23.0, &h).unwrap();
    let base = r.certificate.coeffs()[0] - r.certificate_poly.eval(1.0) / r.capacity;
    for j in 1..=r.m {
        for delta in [1e-3, -1e-3] {
            let mut c = r.certificate.coeffs().to_vec();
            c.resize(c.len().max(j + 1), 0.0);
            c[j] += delta;
            let g = GegenbauerSeries::new(3, c.clone()).unwrap();
            let p = from_gegenbauer(&g);
            let pd = c[1..].iter().all(|&x| x >= -1e-9);
            let dom = verify_dominance(&p, &h, (-1.0, 0.999), Direction::Below, &[]).unwrap().ok;
            let obj = c[0] - p.eval(1.0) / r.capacity;
            if pd && dom {
                assert!(obj <= base + 1e-9, "j={j} delta={delta}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn degree_one_closed_forms(n in 2usize..9, u in 0.001f64..0.999, pick in 0usize..3) {
        let nf = n as f64;
        let cap = 2.0 + u * (nf - 1.0);
        let h = [riesz1(), Potential::gaussian(2.0).unwrap(), Potential::Logarithmic][pick].clone();
        let r = ulb(n, cap, &h).unwrap();
        let a0 = -1.0 / (cap - 1.0);
        prop_assert!((r.value - (cap - 1.0) / cap * h.eval(a0).unwrap()).abs() < 1e-10);
        let s = -1.0 + u * (1.0 - 1.0 / nf);
        let r = uub(n, cap, s, &h, None).unwrap();
        prop_assert_eq!(r.m, 1);
        prop_assert!((r.value - (1.0 - 1.0 / cap) * h.eval(s).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn degree_two_closed_forms(n in 2usize..9, u in 0.001f64..0.999, pick in 0usize..3) {
        let nf = n as f64;
        let cap = nf + 1.0 + u * (nf - 1.0);
        let h = [riesz1(), Potential::gaussian(2.0).unwrap(), Potential::Logarithmic][pick].clone();
        let r = ulb(n, cap, &h).unwrap();
        let a1 = -(2.0 * nf - cap) / (nf * (cap - 2.0));
        let den = (nf + 1.0) * cap - 4.0 * nf;
        let closed = (cap - nf - 1.0) / den * h.eval(-1.0).unwrap()
            + nf * (cap - 2.0).powi(2) / (cap * den) * h.eval(a1).unwrap();
        prop_assert!((r.value - closed).abs() < 1e-10);
        let (lo, hi) = validity_interval(n, 2).unwrap();
        let s = lo + (0.001 + 0.998 * u) * (hi - lo);
        let r = uub(n, cap, s, &h, None).unwrap();
        prop_assert_eq!(r.m, 2);
        let (hs, hm) = (h.eval(s).unwrap(), h.eval(-1.0).unwrap());
        let closed = ((nf - 1.0) * hs + (1.0 - nf * s * s) * hm) / (nf * (1.0 - s * s)) - hm / cap;
        prop_assert!((r.value - closed).abs() < 1e-10);
    }

    #[test]
    fn ulb_certificates_hold(n in 2usize..9, u in 0.0f64..1.0, pick in 0usize..4) {
        let cap = (2.05f64.ln() + u * ((dgs_bound(n, 10) as f64).ln() - 2.05f64.ln())).exp();
        let h = [riesz1(), Potential::gaussian(2.5).unwrap(), Potential::Logarithmic, Potential::newton(n).unwrap()][pick].clone();
        let r = ulb(n, cap, &h).unwrap();
        prop_assert!(r.feasible, "{:?}", r.diagnostics);
        let q = test_functions(n, cap, r.m + 2).unwrap();
        prop_assert!(q.max_vanishing_residual < 1e-9);
        prop_assert!(q.values[r.m].value >= -1e-9 && q.values[r.m + 1].value >= -1e-9);
        let c = 0.37;
        let shifted = ulb(n, cap, &Potential::shifted(h, c)).unwrap();
        prop_assert!((shifted.value - (r.value + c * (1.0 - 1.0 / cap))).abs() < 1e-10);
    }

    #[test]
    fn uub_certificates_hold(n in 2usize..8, u in 0.0f64..1.0, pick in 0usize..3) {
        let s = -0.95 + 1.6 * u;
        let h = [riesz1(), Potential::gaussian(2.5).unwrap(), Potential::Logarithmic][pick].clone();
        let r = uub(n, 50.0, s, &h, None).unwrap();
        prop_assert!(r.feasible, "{:?}", r.diagnostics);
    }
}
