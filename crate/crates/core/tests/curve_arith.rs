use onelevel::arith::{factorize, primes_up_to};
use onelevel::curve::{count_points_mod_p, hecke_power, CurveData};
use proptest::prelude::*;

const E11: [i64; 5] = [0, -1, 1, 0, 0];

fn curve() -> &'static CurveData {
    static C: std::sync::OnceLock<CurveData> = std::sync::OnceLock::new();
    C.get_or_init(|| CurveData::e11(10_000))
}

/// Affine points by trying every (x, y); the point at infinity added.
fn brute_points(a: &[i64; 5], p: i64) -> i64 {
    let r = |v: i64| v.rem_euclid(p);
    let [a1, a2, a3, a4, a6] = a.map(|c| c.rem_euclid(p));
    let mut n = 1;
    for x in 0..p {
        let rhs = r(r(r(x * x) * x) + r(a2 * r(x * x)) + r(a4 * x) + a6);
        for y in 0..p {
            if r(r(y * y) + r(a1 * r(x * y)) + r(a3 * y)) == rhs {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn point_counts_match_brute_force_below_1000() {
    for p in primes_up_to(1000) {
        let fast = count_points_mod_p(&E11, p).unwrap();
        assert_eq!(fast, p as i64 + 1 - brute_points(&E11, p as i64), "p = {p}");
    }
}

#[test]
fn hasse_bound_below_10000() {
    let e = curve();
    for p in primes_up_to(10_000) {
        let ap = e.a_p(p).unwrap();
        assert!((ap as f64).abs() <= 2.0 * (p as f64).sqrt(), "p = {p}, a_p = {ap}");
    }
}

#[test]
fn known_coefficients_of_11a() {
    // q-expansion of η(q)²η(q¹¹)²
    let e = CurveData::e11(100);
    let expect = [(2, -2), (3, -1), (5, 1), (7, -2), (11, 1), (13, 4), (17, -2), (19, 0), (23, -1), (29, 0), (31, 7)];
    for (p, ap) in expect {
        assert_eq!(e.a_p(p).unwrap(), ap, "p = {p}");
    }
}

#[test]
fn table_is_multiplicative_and_hecke() {
    let e = CurveData::e11(2000);
    let lam = e.lambda_table(5000).unwrap();
    for n in 2..=5000usize {
        let f = factorize(n as u64);
        let prod: f64 = f
            .iter()
            .map(|&(p, k)| e.lambda_prime_power(p, k).unwrap())
            .product();
        assert!((lam[n] - prod).abs() < 1e-10, "n = {n}");
    }
}

#[test]
fn bad_prime_powers_are_plain_powers() {
    let e = CurveData::e11(100);
    let l = e.lambda_p(11).unwrap();
    for k in 0..6 {
        assert!((e.lambda_prime_power(11, k).unwrap() - l.powi(k as i32)).abs() < 1e-14);
    }
}

#[test]
fn rejects_non_prime_conductor_and_wrong_discriminant() {
    assert!(CurveData::new("x", E11, 12, 100).is_err());
    assert!(CurveData::new("x", E11, 13, 100).is_err());
}

fn big_curve() -> &'static CurveData {
    static C: std::sync::OnceLock<CurveData> = std::sync::OnceLock::new();
    C.get_or_init(|| CurveData::e11(400_000))
}

#[test]
fn newform_route_is_used_only_for_level_11() {
    assert!(big_curve().uses_newform());
    // 37a: y² + y = x³ − x
    let c37 = CurveData::new("37a", [0, 0, 1, -1, 0], 37, 3000).unwrap();
    assert!(!c37.uses_newform());
}

#[test]
fn newform_and_point_count_agree_past_the_check_range() {
    let e = big_curve();
    for p in primes_up_to(12_000).into_iter().filter(|&p| p > 10_000) {
        assert_eq!(e.a_p(p).unwrap(), count_points_mod_p(&E11, p).unwrap(), "p = {p}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn newform_coefficients_match_point_counts(i in 0usize..33_860) {
        let p = primes_up_to(400_000)[i];
        prop_assert_eq!(big_curve().a_p(p).unwrap(), count_points_mod_p(&E11, p).unwrap());
    }
}

proptest! {
    #[test]
    fn hecke_three_term_relation(l in -2.0f64..2.0, m in 1u32..30) {
        let lhs = l * hecke_power(l, m);
        let rhs = hecke_power(l, m + 1) + hecke_power(l, m - 1);
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()));
    }

    #[test]
    fn hecke_powers_are_chebyshev(theta in 0.01f64..3.13, m in 0u32..40) {
        let l = 2.0 * theta.cos();
        let u = ((m + 1) as f64 * theta).sin() / theta.sin();
        prop_assert!((hecke_power(l, m) - u).abs() < 1e-8 * (1.0 + u.abs()));
    }

    #[test]
    fn deligne_bound_on_prime_powers(pi in 0usize..1229, m in 0u32..20) {
        let e = curve();
        let p = primes_up_to(10_000)[pi];
        if p != 11 {
            let v = e.lambda_prime_power(p, m).unwrap();
            prop_assert!(v.abs() <= f64::from(m + 1) + 1e-9);
        }
    }
}
