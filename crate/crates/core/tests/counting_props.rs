use num::complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sl2count_core::counting::*;
use sl2count_core::geometry::{haar_integrate, IwasawaBox, RealMat2, Scheme};
use sl2count_core::orbits::{enumerate_box_sl2, IntMat2};
use sl2count_core::quadrature::Tolerance;
use sl2count_core::weights::{random_gamma2, random_sl2z, PeriodicWeight};

#[test]
fn sieve_sum_matches_double_loop() {
    let x = 10_000u64;
    let d = divisor_sieve(x).unwrap();
    let sieved: u64 = d[1..].iter().map(|&v| v as u64).sum();
    let mut pairs = 0u64;
    for a in 1..=x {
        for _b in 1..=x / a {
            pairs += 1;
        }
    }
    assert_eq!(sieved, pairs);
}

#[test]
fn residue_deltas_partition_the_correlation() {
    let q = 6;
    let whole = divisor_correlation(2000, 1, &PeriodicWeight::constant(q, 1), Cutoff::Sharp).unwrap();
    let parts: Complex64 = (0..q as i64)
        .map(|r| divisor_correlation(2000, 1, &PeriodicWeight::delta(q, r), Cutoff::Sharp).unwrap())
        .sum();
    assert_eq!(whole, parts);
    let smooth = Cutoff::Smooth(Profile::Bump);
    let whole = divisor_correlation(2000, 3, &PeriodicWeight::constant(q, 1), smooth).unwrap();
    let parts: Complex64 = (0..q as i64)
        .map(|r| divisor_correlation(2000, 3, &PeriodicWeight::delta(q, r), smooth).unwrap())
        .sum();
    assert!((whole - parts).norm() <= 1e-9 * whole.norm());
}

#[test]
fn ap_density_basics() {
    let trivial = ap_density_report(5000, 1, 1).unwrap();
    assert_eq!(trivial.rows.len(), 1);
    assert_eq!(trivial.rows[0].ratio, 1.0);
    assert_eq!(trivial.rows[0].omega, 1.0);
    let rep = ap_density_report(20_000, 2, 15).unwrap();
    assert_eq!(rep.rows.iter().map(|r| r.weighted_count).sum::<u64>(), rep.total);
    assert!(matches!(ap_density_report(1000, 1, 4), Err(sl2count_core::Error::UnsupportedModulus(4))));
    assert!(ap_density_report(1000, 5, 5).is_err());
}

#[test]
fn ap_density_converges() {
    for (q, h) in [(5u64, 1u64), (7, 3)] {
        let devs: Vec<f64> = [10_000u64, 100_000, 1_000_000]
            .iter()
            .map(|&x| ap_density_report(x, h, q).unwrap().max_deviation)
            .collect();
        for w in devs.windows(2) {
            assert!(w[1] <= 2.0 * w[0], "q {q} h {h}: {devs:?}");
        }
    }
}

/// Counts `q1 | b`, `q2 | d` by stepping `d` through multiples of `q2` and solving for `c`.
fn divisibility_oracle(q1: i64, q2: i64, h: i64, window: &SmoothWindow) -> f64 {
    let mut total = 0.0;
    let range = |r: f64| (r.ceil() as i64)..=((2.0 * r).floor() as i64);
    for a in range(window.a) {
        for d in range(window.d).filter(|d| d % q2 == 0) {
            let n = a * d - h;
            for b in -(n.abs())..=n.abs() {
                if b == 0 || b % q1 != 0 || n % b != 0 {
                    continue;
                }
                let c = n / b;
                if window.value(a as f64, c as f64, d as f64) != 0.0 {
                    total += 1.0;
                }
            }
        }
    }
    total
}

#[test]
fn divisibility_count_matches_dual_loop() {
    let window = SmoothWindow::sharp(12.0, 9.0, 10.0).unwrap();
    for (q1, q2, h) in [(1u64, 1u64, 1i64), (3, 2, 1), (2, 5, 3)] {
        let spec = CountSpec::new(CountWeight::Divisibility { q1, q2 }, h, window).unwrap();
        let brute = det_eq_bruteforce(&spec, ITERATION_CAP).unwrap();
        assert_eq!(brute.re, divisibility_oracle(q1 as i64, q2 as i64, h, &window), "q1 {q1} q2 {q2} h {h}");
    }
}

#[test]
fn window_away_from_solutions_counts_zero() {
    // ad - bc = 1 with a, d even and c even is impossible.
    let spec = CountSpec::new(CountWeight::Unit, 1, SmoothWindow::sharp(2.0, 2.0, 2.0).unwrap().with_b_range(100.0, 200.0)).unwrap();
    assert_eq!(det_eq_bruteforce(&spec, ITERATION_CAP).unwrap(), Complex64::new(0.0, 0.0));
}

#[test]
fn partition_windows_reproduce_sharp_count() {
    // Outer edges 1.3 * 2^j keep every integer off the tapers.
    let r0 = 1.3;
    let pieces = 3;
    let lo = r0;
    let hi = r0 * 2f64.powi(pieces);
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..pieces {
        for j in 0..pieces {
            for k in 0..pieces {
                let w = SmoothWindow::partition(r0 * 2f64.powi(i), r0 * 2f64.powi(j), r0 * 2f64.powi(k)).unwrap();
                total += det_eq_bruteforce(&CountSpec::new(CountWeight::Unit, 1, w).unwrap(), ITERATION_CAP).unwrap();
            }
        }
    }
    let mut exact = 0u64;
    let range = || (lo.ceil() as i64)..=(hi.floor() as i64);
    for a in range() {
        for d in range() {
            for c in range() {
                if (a * d - 1) % c == 0 {
                    exact += 1;
                }
            }
        }
    }
    assert!((total.re - exact as f64).abs() <= 1e-9 * exact as f64, "{total} vs {exact}");
}

#[test]
fn swap_symmetry() {
    // (a, b; c, d) -> (d, c; b, a) keeps the determinant and swaps A <-> D, B <-> C.
    let (a, b, c, d) = (7.0, 11.0, 5.0, 9.0);
    let forward = SmoothWindow::sharp(a, c, d).unwrap().with_b_range(b, 2.0 * b);
    let swapped = SmoothWindow::sharp(d, b, a).unwrap().with_b_range(c, 2.0 * c);
    for h in [1, 2, 5] {
        let s1 = det_eq_bruteforce(&CountSpec::new(CountWeight::Unit, h, forward).unwrap(), ITERATION_CAP).unwrap();
        let s2 = det_eq_bruteforce(&CountSpec::new(CountWeight::Unit, h, swapped).unwrap(), ITERATION_CAP).unwrap();
        assert_eq!(s1, s2);
    }
}

#[test]
fn main_integral_matches_haar_form() {
    let w = SmoothWindow::bump(1.0, 1.0, 1.0).unwrap();
    let f = |g: &RealMat2| w.value(g.a, g.c, g.d);
    // c = -sin(theta)/sqrt(y), d = cos(theta)/sqrt(y) and x = (a - dy)/c put the support in this box.
    let tau = std::f64::consts::TAU;
    let region = IwasawaBox { x: (0.2, 1.85), y: (0.12, 0.51), theta: (tau - 1.12, tau - 0.45) };
    let haar = haar_integrate(f, &region, Scheme::Quadrature(Tolerance::new(1e-10, 1e-8, 2_000_000))).unwrap();
    let matrix = w.main_integral().unwrap() / std::f64::consts::PI;
    assert!((haar.value - matrix).abs() <= 1e-6 * matrix, "{} vs {matrix}", haar.value);
}

#[test]
fn main_term_tracks_counts_for_composite_determinant() {
    let spec = CountSpec::new(CountWeight::Unit, 6, SmoothWindow::bump(100.0, 100.0, 100.0).unwrap()).unwrap();
    let s = det_eq_bruteforce(&spec, ITERATION_CAP).unwrap();
    let m = main_term_eval(&spec).unwrap();
    assert_eq!(m.orbit_sum, Complex64::new(12.0, 0.0));
    assert!((s / m.value - 1.0).norm() < 0.1, "{s} vs {}", m.value);
}

#[test]
fn k_term_identities() {
    for l in [1.0, 0.5, 3.0] {
        let count = enumerate_box_sl2(l, 6.0).unwrap().len() as f64;
        assert_eq!(k_term_eval(&CountWeight::Unit, l).unwrap(), count);
    }
    assert_eq!(k_term_eval(&CountWeight::Zero, 1.0).unwrap(), 0.0);
    let weight = CountWeight::ProductCongruence { q: 7, r: 2 };
    let alpha = weight.to_alpha().unwrap();
    let identity = sl2count_core::weights::w_closed_form(&IntMat2::IDENTITY, &alpha).unwrap();
    let mass = sl2count_core::weights::base_mass(&alpha).unwrap();
    assert!((identity.re - mass).abs() < 1e-12);
}

#[test]
fn zero_weight_has_zero_budget() {
    let spec = CountSpec::new(CountWeight::Zero, 1, SmoothWindow::bump(20.0, 20.0, 20.0).unwrap()).unwrap();
    let c = error_budget(&spec, DEFAULT_RATIO_CEILING, ITERATION_CAP).unwrap();
    assert_eq!(c.budget.budget, 0.0);
    assert_eq!(c.ratio, 0.0);
    assert!(c.pass);
}

#[test]
fn bump_window_satisfies_its_class() {
    let w = SmoothWindow::bump(10.0, 40.0, 3.0).unwrap();
    assert!(w.derivative_check(2001).unwrap().worst_ratio <= 1.0 + 1e-12);
    let mut loose = w;
    loose.delta = 0.02;
    assert!(loose.derivative_check(2001).unwrap().worst_ratio > 1.0);
}

fn weights() -> Vec<CountWeight> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    vec![
        CountWeight::Unit,
        CountWeight::Divisibility { q1: 3, q2: 4 },
        CountWeight::ProductCongruence { q: 5, r: 2 },
        CountWeight::Periodic(PeriodicWeight::random(6, &mut rng)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_are_invariant(seed in any::<u64>(), which in 0usize..4, class in 0usize..12) {
        let weight = &weights()[which];
        let (q1, q2) = weight.moduli();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = determinant_classes(6)[class];
        let g = random_sl2z(&mut rng, 6) * sigma;
        let gamma = random_gamma2(&mut rng, q1, q2, 1, 30);
        prop_assert_eq!(weight.value(&(gamma * g)).unwrap(), weight.value(&g).unwrap());
    }

    #[test]
    fn r_term_is_monotone(a in 1.0f64..1e3, c in 1.0f64..1e3, d in 1.0f64..1e3, q1 in 1u64..20, q2 in 1u64..20, s in 1.0f64..4.0) {
        let r = |a: f64, c: f64, d: f64| r_term_eval(a, c, d, q1, q2, THETA).unwrap();
        prop_assert!(r(a, c, d * s) >= r(a, c, d));
        // Past the minimum in C/A the term only grows.
        let skew = c / a;
        let minimum = (1..200).map(|i| i as f64 * 0.05).fold((f64::INFINITY, 0.0), |best, t| {
            let v = r(a, a * t, d);
            if v < best.0 { (v, t) } else { best }
        }).1;
        if skew >= minimum + 0.05 {
            prop_assert!(r(a, c * s, d) >= r(a, c, d) - 1e-12);
        }
    }

    #[test]
    fn budget_is_monotone(ad in 0.0f64..1e6, k in 0.0f64..1e3, r in 0.0f64..1e2, s in 1.0f64..3.0) {
        let b = |ad, k, r| ErrorBudget::new(ad, k, r, THETA).unwrap().budget;
        prop_assert!(b(ad, k, r) >= 0.0);
        prop_assert!(b(ad * s, k, r) >= b(ad, k, r));
        prop_assert!(b(ad, k * s, r) >= b(ad, k, r));
        prop_assert!(b(ad, k, r * s) >= b(ad, k, r));
    }

    #[test]
    fn extended_r_terms_have_the_right_limits(h_size in 1.0f64..50.0, k_size in 1.0f64..50.0) {
        let base = RTermInputs { a: 100.0, c: 80.0, d: 120.0, q1: 3, q2: 5, h_size, k_size, beta_ratio: 1.0, conductor: 1, theta: 0.0, vartheta: 0.0 };
        let ext = r_term_extended(&base).unwrap();
        prop_assert!((ext.r1 - 2.0 * (1.0 + (80.0 / 500.0f64).sqrt())).abs() < 1e-12);
        prop_assert!((ext.r2 - 2.0 * (1.0 + (h_size * 80.0 / 500.0).sqrt())).abs() < 1e-12);
        prop_assert!(ext.combined <= ext.r0 + ext.r1 + 1e-12);
        prop_assert!((ext.r0 - (100.0 / 240.0f64).sqrt()).abs() < 1e-12);
    }
}
