use std::f64::consts::{PI, TAU};

use dressing_core::cluster::{self, build_seed, ClusterPoint};
use dressing_core::iwasawa::{self, CartanPoint, OrbitPoint};
use dressing_core::lie::{GroupElement, TriangularElement};
use dressing_core::linalg::{self, c, real};
use dressing_core::su2::{self, SpherePoint};
use dressing_core::tropical;
use dressing_core::verify::{self, SGrid};
use dressing_core::CMat;
use proptest::prelude::*;

fn lower(n: usize, diag: &[f64], off: &[(f64, f64)]) -> CMat {
    let mut b = CMat::zeros(n, n);
    let mut acc = 0.0;
    for i in 0..n - 1 {
        b[(i, i)] = real(diag[i].exp());
        acc += diag[i];
    }
    b[(n - 1, n - 1)] = real((-acc).exp());
    let mut q = 0;
    for i in 0..n {
        for j in 0..i {
            b[(i, j)] = c(off[q].0, off[q].1);
            q += 1;
        }
    }
    b
}

fn sl3_matrix(entries: &[(f64, f64)]) -> CMat {
    let g = CMat::from_fn(3, 3, |i, j| c(entries[3 * i + j].0, entries[3 * i + j].1));
    let d = linalg::det(&g);
    g / dressing_core::Complex::from_polar(d.norm().cbrt(), d.arg() / 3.0)
}

fn pair() -> impl Strategy<Value = (f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minors_round_trip_sl3(diag in prop::collection::vec(-1.0..1.0f64, 2), off in prop::collection::vec(pair(), 3), s in -3.0..-0.3f64) {
        let seed = build_seed(3, &[1, 2, 1]).unwrap();
        let b = lower(3, &diag, &off);
        let p = cluster::coordinates_of(&b, s, &seed).unwrap();
        let back = cluster::detropicalize(&p, s, &seed).unwrap();
        prop_assert!(linalg::max_abs(&(back.matrix() - &b)) <= 1e-9 * linalg::max_abs(&b));
    }

    #[test]
    fn reality_pattern(lam in prop::collection::vec(-1.5..1.5f64, 5), phi in prop::collection::vec(0.0..TAU, 3), s in -4.0..-0.5f64) {
        let seed = build_seed(3, &[1, 2, 1]).unwrap();
        let p = ClusterPoint::new(lam, phi);
        let b = cluster::detropicalize(&p, s, &seed).unwrap();
        let d = cluster::minors_map(b.matrix(), &seed).unwrap();
        for (pos, &k) in seed.r_index.iter().enumerate() {
            if !seed.in_s(k) {
                prop_assert!(d[pos].re > 0.0 && d[pos].im.abs() <= 1e-12 * d[pos].norm());
            }
        }
    }

    #[test]
    fn iwasawa_factor_matches_cholesky(e in prop::collection::vec(pair(), 9)) {
        let g = sl3_matrix(&e);
        let (b, k) = iwasawa::iwasawa_factor(&GroupElement::new(g.clone()).unwrap()).unwrap();
        let chol = iwasawa::cholesky_lower(&(&g * g.adjoint())).unwrap();
        prop_assert!(linalg::max_abs(&(b.matrix() - &chol)) <= 1e-9 * linalg::max_abs(&chol));
        prop_assert!(linalg::max_abs(&(b.matrix() * k.matrix() - &g)) <= 1e-9 * linalg::max_abs(&g));
    }

    #[test]
    fn casimirs_are_dressing_invariant(diag in prop::collection::vec(-1.0..1.0f64, 2), off in prop::collection::vec(pair(), 3), e in prop::collection::vec(pair(), 9)) {
        let b = TriangularElement::new(lower(3, &diag, &off)).unwrap();
        let g = sl3_matrix(&e);
        let (_, k) = iwasawa::iwasawa_factor(&GroupElement::new(g).unwrap()).unwrap();
        let moved = iwasawa::dressing(&k, &b).unwrap();
        for i in 1..3 {
            let a = iwasawa::casimir(&b, i).unwrap();
            let m = iwasawa::casimir(&moved, i).unwrap();
            prop_assert!((a - m).abs() <= 1e-9 * a);
        }
    }

    #[test]
    fn exp_log_inverse(t in prop::collection::vec(-2.0..2.0f64, 3), e in prop::collection::vec(pair(), 9), s in -3.0..-0.2f64) {
        let mut t = t;
        t.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mean = t.iter().sum::<f64>() / 3.0;
        let t: Vec<f64> = t.iter().map(|v| v - mean).collect();
        prop_assume!(t[0] - t[1] > 0.05 && t[1] - t[2] > 0.05);
        let (_, k) = iwasawa::iwasawa_factor(&GroupElement::new(sl3_matrix(&e)).unwrap()).unwrap();
        let x = OrbitPoint::from_split(k.matrix(), &t);
        let b = iwasawa::exp_e(s, &x).unwrap();
        let back = iwasawa::log_e_inv(s, &b).unwrap();
        prop_assert!(linalg::max_abs(&(&back.x - &x.x)) <= 1e-8);
    }

    #[test]
    fn orbit_split_reconstructs(diag in prop::collection::vec(-1.0..1.0f64, 2), off in prop::collection::vec(pair(), 3), s in -3.0..-0.5f64) {
        let b = lower(3, &diag, &off);
        let m = &b * b.adjoint();
        let (d, k) = iwasawa::orbit_split(&m, s).unwrap();
        let e = linalg::diag_real(&d.t.iter().map(|v| (2.0 * s * v).exp()).collect::<Vec<_>>());
        let rebuilt = k.matrix() * e * k.matrix().adjoint();
        prop_assert!(linalg::max_abs(&(rebuilt - &m)) <= 1e-8 * linalg::max_abs(&m));
    }

    #[test]
    fn volume_is_constant_in_s(s in -30.0..0.0f64, xi in 0.1..3.0f64) {
        prop_assert!((su2::cap_volume(-1.0, s, xi) - 4.0 * PI * xi).abs() <= 1e-9);
    }

    #[test]
    fn concentration_beyond_threshold(eps in 0.05..1.0f64, xi in 0.3..2.0f64, extra in 0.0..30.0f64) {
        let s0 = -(2.0 / eps).ln() / (2.0 * eps * xi);
        let f = su2::concentration_fraction(eps, s0 - extra, xi).unwrap();
        prop_assert!(f >= 1.0 - eps);
    }

    #[test]
    fn concentration_monotone(eps in 0.05..1.5f64, xi in 0.3..2.0f64, s in -40.0..-1.0f64) {
        let a = su2::concentration_fraction(eps, s, xi).unwrap();
        let b = su2::concentration_fraction(eps, s - 0.5, xi).unwrap();
        prop_assert!(b >= a - 1e-15);
    }

    #[test]
    fn band_envelope(z0 in 0.05..0.95f64, s in -200.0..-20.0f64, xi in 0.5..2.0f64) {
        let v = su2::band_volume(z0, s, xi);
        let env = PI * ((1.0 + z0) / (1.0 - z0)).ln() / s.abs();
        prop_assert!(v <= env * (1.0 + 1e-9) && v >= 0.0);
    }

    #[test]
    fn transport_round_trip(z in -0.99..0.99f64, phi in 0.0..TAU, t in 0.3..2.0f64, s in -8.0..-0.5f64) {
        let q = SpherePoint::from_z(z, phi).unwrap();
        let p = su2::transport_sphere_to_cluster(&q, t, s).unwrap();
        let (back, tt) = su2::transport_cluster_to_sphere(&p, s).unwrap();
        prop_assert!((back.z() - z).abs() <= 1e-8);
        prop_assert!(linalg::angle_diff(back.phi, q.phi).abs() <= 1e-8);
        prop_assert!((tt - t).abs() <= 1e-8);
    }

    #[test]
    fn leaf_routes_agree(g1 in 0.05..3.0f64, g2 in 0.05..3.0f64) {
        let m = (g2 - g1) / 3.0;
        let xi = CartanPoint::new(vec![m + g1, m, m - g2]).unwrap();
        let leaf = tropical::leaf_of(&xi).unwrap();
        prop_assert!((leaf.lam(1) - (m - g2)).abs() < 1e-12);
        prop_assert!((leaf.lam(2) + m + g1).abs() < 1e-12);
    }

    #[test]
    fn exact_exponential_slopes(rate in 0.1..4.0f64, amp in 0.1..10.0f64) {
        let series: Vec<(f64, f64)> = (1..=8).map(|k| (-(k as f64), amp * (-rate * k as f64).exp())).collect();
        let f = verify::fit_decay_rate(&series).unwrap();
        prop_assert!((f.slope - rate).abs() <= 1e-9);
    }

    #[test]
    fn graph_fixed_point(lam1 in -0.5..0.5f64, phi in 0.0..TAU, s in -12.0..-4.0f64) {
        let seed = build_seed(2, &[1]).unwrap();
        let p = ClusterPoint::new(vec![-1.0, lam1], vec![phi]);
        let f = cluster::casimir_coords(&p, s, &seed).unwrap();
        let sol = cluster::graph_solve(&p, &f, s, &seed).unwrap();
        prop_assert!((sol.lam_minus[0] + 1.0).abs() <= 1e-12);
    }
}

#[test]
fn reports_are_deterministic() {
    let seed = build_seed(3, &[1, 2, 1]).unwrap();
    let xi = CartanPoint::new(vec![2.0, 0.0, -2.0]).unwrap();
    let p = tropical::sample_leaf(&seed, &xi, 0.5, 1, 11).unwrap().remove(0);
    let a = verify::check_unitary_limit(&p, &seed, &SGrid::default()).unwrap();
    let b = verify::check_unitary_limit(&p, &seed, &SGrid::default()).unwrap();
    assert_eq!(a, b);
    let t = CartanPoint::new(vec![1.0, 0.0, -1.0]).unwrap();
    let grid = SGrid::integers(-2, -6).unwrap();
    assert_eq!(verify::check_envelope(&t, 0.1, &grid, 10, 3).unwrap(), verify::check_envelope(&t, 0.1, &grid, 10, 3).unwrap());
}

#[test]
fn leaf_membership_along_solved_points() {
    // every C_i of the solved point equals the one of the leaf's reference point
    let seed = build_seed(3, &[1, 2, 1]).unwrap();
    let xi = CartanPoint::new(vec![2.0, 0.0, -2.0]).unwrap();
    let s = -6.0;
    for p in tropical::sample_leaf(&seed, &xi, 0.5, 5, 21).unwrap() {
        let target = seed.lam_minus(&p);
        let sol = cluster::graph_solve(&p, &target, s, &seed).unwrap();
        let q = p.with_lam_minus(&sol.lam_minus);
        let f = cluster::casimir_coords(&q, s, &seed).unwrap();
        for (a, b) in f.iter().zip(&target) {
            assert!((a - b).abs() <= 1e-9);
        }
        let b = cluster::detropicalize(&q, s, &seed).unwrap();
        for i in 1..3 {
            let direct = iwasawa::casimir(&b, i).unwrap().ln() / s;
            assert!((direct - target[seed.r - i]).abs() <= 1e-9, "{direct}");
        }
    }
}

#[test]
fn sl3_seed_invariance() {
    // both reduced words give the same Casimir coordinates at the same group element
    let a = build_seed(3, &[1, 2, 1]).unwrap();
    let b = build_seed(3, &[2, 1, 2]).unwrap();
    let p = ClusterPoint::new(vec![-1.7, -0.9, 0.3, -0.1, 0.4], vec![0.5, 1.0, 2.0]);
    let s = -2.0;
    let g = cluster::detropicalize(&p, s, &a).unwrap();
    let q = cluster::coordinates_of(g.matrix(), s, &b).unwrap();
    let fa = cluster::casimir_coords(&p, s, &a).unwrap();
    let fb = cluster::casimir_coords(&q, s, &b).unwrap();
    for (x, y) in fa.iter().zip(&fb) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn sl2_cone_equals_polytope_interior() {
    let seed = build_seed(2, &[1]).unwrap();
    for t in [0.5, 1.0, 2.0] {
        for k in 0..=40 {
            let l1 = -1.5 * t + 3.0 * t * k as f64 / 40.0;
            let inside = tropical::cone_margin(&seed, &[-t, l1]) > 0.0;
            assert_eq!(inside, l1.abs() < t);
        }
    }
}

#[test]
fn casimir_table_matches_matrix() {
    let seed = build_seed(3, &[1, 2, 1]).unwrap();
    let p = ClusterPoint::new(vec![-1.2, -0.4, 0.6, -0.3, 0.2], vec![0.1, 2.0, 5.0]);
    for s in [-0.5, -1.5, -3.0] {
        let b = cluster::detropicalize(&p, s, &seed).unwrap();
        let f = cluster::casimir_coords(&p, s, &seed).unwrap();
        for i in 1..3 {
            let direct = iwasawa::casimir(&b, i).unwrap().ln() / s;
            assert!((direct - f[seed.r - i]).abs() < 1e-10 * (1.0 + direct.abs()));
        }
    }
}
