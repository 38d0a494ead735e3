use std::f64::consts::{PI, TAU};

use num::complex::Complex64;
use proptest::prelude::*;
use sl2count_core::geometry::*;
use sl2count_core::quadrature::{integrate, integrate_to_infinity, Tolerance};
use sl2count_core::spectral::*;

const TIGHT: Tolerance = Tolerance::new(1e-13, 1e-12, 400_000);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unimodular() -> impl Strategy<Value = RealMat2> {
    (-3.0f64..3.0, 0.2f64..3.0, 0.0f64..TAU).prop_map(|(x, y, t)| iwasawa_compose(&IwasawaCoords { x, y, theta: t }).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn phi_is_casimir_eigenfunction(g in unimodular(), ell in -2i64..=2, which in 0usize..4) {
        let nu = [c(0.0, 0.0), c(0.3, 0.0), c(0.0, 0.5), c(1.0, 0.5)][which];
        let f = |m: &RealMat2| phi_basic(m, nu, ell).unwrap();
        let value = f(&g);
        let omega = casimir_apply(&f, &g, CasimirForm::Iwasawa, SECOND_STEP).unwrap();
        let expect = (0.25 - nu * nu) * value;
        prop_assert!((omega - expect).norm() <= 1e-4 * value.norm().max(expect.norm()), "{omega} vs {expect}");
    }

    #[test]
    fn type_projection_transforms_by_characters(t1 in 0.0f64..TAU, t2 in 0.0f64..TAU, ell1 in -2i64..=2, shift in 0i64..2) {
        let ell2 = ell1 + 2 * shift - 2;
        let k = KernelFn::new(1.5, "lopsided", |g: &RealMat2| {
            let r = cartan_radius(g);
            c(plateau(r, 0.3, 1.4) * (1.0 + g.a + 0.3 * g.b * g.b), 0.2 * g.c)
        });
        let p = kernel_type_project(&k, ell1, ell2, 32);
        let g = RealMat2::new(1.2, 0.3, -0.4, 0.7333333333333333);
        let moved = RealMat2::rotation(t1) * g * RealMat2::rotation(t2);
        let expect = p.eval(&g) * Complex64::from_polar(1.0, ell1 as f64 * t1 + ell2 as f64 * t2);
        prop_assert!((p.eval(&moved) - expect).norm() <= 1e-6 * (1.0 + expect.norm()));
    }
}

#[test]
fn jacquet_eigen_relations() {
    let tol = Tolerance::new(1e-14, 1e-13, 2_000_000);
    let mut checked = 0;
    for (i, nu) in [c(0.25, 0.0), c(0.4, 1.0), c(0.5, -0.7)].into_iter().enumerate() {
        for (j, ell) in [0i64, 1, -2].into_iter().enumerate() {
            let sign = if (i + j) % 2 == 0 { Sign::Plus } else { Sign::Minus };
            let p = SpectralParams::new(nu, ell, sign);
            let f = |m: &RealMat2| jacquet_apply(m, &p, tol).unwrap();
            let g = iwasawa_compose(&IwasawaCoords { x: 0.3 * i as f64 - 0.2, y: 0.35 + 0.2 * j as f64, theta: 1.0 + i as f64 }).unwrap();
            let value = f(&g);
            let omega = casimir_apply(&f, &g, CasimirForm::Iwasawa, SECOND_STEP).unwrap();
            assert!((omega - p.eigenvalue() * value).norm() <= 1e-3 * value.norm(), "nu {nu} l {ell}: {omega} vs {}", p.eigenvalue() * value);
            let h = 1e-3;
            let shifted = |dx: f64, dt: f64| {
                let base = iwasawa_decompose(&g).unwrap();
                f(&iwasawa_compose(&IwasawaCoords { x: base.x + dx, y: base.y, theta: base.theta + dt }).unwrap())
            };
            let dxx = (shifted(h, 0.0) - 2.0 * value + shifted(-h, 0.0)) / (h * h);
            assert!((dxx + 4.0 * PI * PI * value).norm() <= 1e-3 * 4.0 * PI * PI * value.norm());
            let dtt = (shifted(0.0, h) - 2.0 * value + shifted(0.0, -h)) / (h * h);
            assert!((dtt + (ell * ell) as f64 * value).norm() <= 1e-3 * value.norm().max(1e-2));
            checked += 1;
        }
    }
    assert_eq!(checked, 9);
}

#[test]
fn jacquet_decays_like_whittaker_bound() {
    for nu in [c(0.25, 0.0), c(0.5, 2.0)] {
        for y in [2.0, 4.0, 8.0] {
            let p = SpectralParams::new(nu, 0, Sign::Plus);
            let v = jacquet_apply(&RealMat2::diagonal(y), &p, TIGHT).unwrap();
            let scale = nu.norm() + 1.0;
            let bound = scale * y.powf(-0.5 - nu.re) * (-y / scale).exp();
            assert!(v.norm() <= 64.0 * bound, "nu {nu} y {y}: {} vs {bound}", v.norm());
        }
    }
}

#[test]
fn discrete_series_matches_jacquet_integral() {
    for (k, ell, sign) in [(2u32, 2i64, Sign::Plus), (2, 4, Sign::Plus), (3, -5, Sign::Minus), (4, 8, Sign::Plus)] {
        for y in [0.05, 0.2, 0.6] {
            let p = SpectralParams::new(c((k as f64 - 1.0) / 2.0, 0.0), ell, sign);
            let integral = jacquet_apply(&RealMat2::diagonal(y), &p, TIGHT).unwrap() * discrete_series_normaliser(k, ell);
            let closed = jacquet_discrete_series(y, k, ell, sign).unwrap();
            assert!((integral.norm() - closed.norm()).abs() <= 1e-4 * closed.norm().max(1e-3), "k {k} l {ell} y {y}: {integral} vs {closed}");
            if k % 2 == 0 {
                assert!((integral - closed).norm() <= 1e-4 * closed.norm().max(1e-3), "k {k} l {ell} y {y}: {integral} vs {closed}");
            }
        }
    }
}

#[test]
fn discrete_series_norms() {
    for k in 2u32..=8 {
        for ell in (k as i64..=12).step_by(2) {
            let exact = discrete_series_norm(k, ell, Sign::Plus).unwrap();
            let est = integrate_to_infinity(|y| c(jacquet_discrete_series(y, k, ell, Sign::Plus).unwrap().norm_sqr() / (y * y), 0.0), 0.0, TIGHT);
            assert!((est.value.re - exact).abs() <= 1e-6 * exact, "k {k} l {ell}: {} vs {exact}", est.value.re);
        }
    }
}

#[test]
fn laguerre_orthogonality() {
    let rule = sl2count_core::quadrature::FixedRule::composite(40, 12, 0.0, 120.0);
    for alpha in 0..=7 {
        let a = alpha as f64;
        for n in 0..=8u32 {
            for m in 0..=n {
                let est = rule.apply(|x| c(x.powf(a) * (-x).exp() * laguerre(n, a, x) * laguerre(m, a, x), 0.0)).re;
                let h = |j: u32| statrs::function::gamma::gamma(j as f64 + a + 1.0) / statrs::function::gamma::gamma(j as f64 + 1.0);
                let expect = if n == m { h(n) } else { 0.0 };
                assert!((est - expect).abs() <= 1e-8 * (h(n) * h(m)).sqrt(), "n {n} m {m} alpha {alpha}");
            }
        }
    }
}

#[test]
fn abel_of_gaussian_surrogate() {
    let k = KernelFn::new(9.0, "gaussian", |g: &RealMat2| {
        let w = iwasawa_decompose(g).unwrap();
        let (t, x) = (w.y.ln(), w.x / w.y);
        c((-t * t - x * x).exp(), 0.0)
    });
    for t in [-1.0f64, 0.0, 0.4, 2.0] {
        let got = abel_transform(&k, t.exp(), TIGHT).unwrap();
        let expect = (0.5 * t - t * t).exp() * PI.sqrt();
        assert!((got.re - expect).abs() <= 1e-8 && got.im.abs() < 1e-12, "t {t}: {got} vs {expect}");
    }
    let tight = KernelFn::new(0.5, "bump", |g: &RealMat2| c(plateau(cartan_radius(g), 0.1, 0.5), 0.0));
    assert_eq!(abel_transform(&tight, 0.5f64.exp() * 1.001, TIGHT).unwrap(), c(0.0, 0.0));
}

#[test]
fn mellin_examples() {
    for s in [c(0.0, 0.0), c(0.7, 0.0), c(0.3, 1.2)] {
        let got = mellin_transform(|t| Ok(c((-t * t).exp(), 0.0)), s, (-15.0, 15.0), TIGHT).unwrap();
        let expect = PI.sqrt() * (s * s / 4.0).exp();
        assert!((got - expect).norm() <= 1e-10 * expect.norm());
    }
    let even = |t: f64| Ok(c(1.0 / (1.0 + t.powi(4)), 0.0));
    let whole = mellin_transform(even, c(0.0, 0.0), (-60.0, 60.0), TIGHT).unwrap();
    let half = integrate(|t| 1.0 / (1.0 + t.powi(4)), 0.0, 60.0, TIGHT).value;
    assert!((whole.re - 2.0 * half).abs() < 1e-10);
}

fn test_kernels() -> Vec<KernelFn> {
    vec![
        KernelFn::separable(1.0, "radial bump", |r| plateau(r, 0.2, 1.0), |_| c(1.0, 0.0)),
        KernelFn::separable(0.8, "cos-modulated", |r| plateau(r, 0.1, 0.8) * (1.0 + r), |s| c(1.0 + 0.5 * s.cos() + 0.3 * (2.0 * s).cos(), 0.0)),
        KernelFn::new(0.9, "asymmetric", |g: &RealMat2| {
            let r = cartan_radius(g);
            c(plateau(r, 0.3, 0.9) * (1.0 + 0.4 * g.b - 0.2 * g.c), 0.1 * g.a * plateau(r, 0.3, 0.9))
        }),
    ]
}

#[test]
fn phi_equals_mellin_of_abel() {
    let rule = GroupRule { rho_points: 16, rho_panels: 6, angular_nodes: 48 };
    let tol = Tolerance::new(1e-11, 1e-8, 400_000);
    for k in test_kernels() {
        for (ell, nu) in [(0i64, c(0.0, 0.0)), (2, c(0.3, 0.0)), (-2, c(0.0, 1.1)), (1, c(0.2, 0.5))] {
            let direct = phi_transform(&k, ell, nu, &rule);
            // The angular dependence is a trigonometric polynomial of low degree, so 16 nodes are exact.
            let via_abel = phi_transform_abel(&k, ell, nu, 16, tol).unwrap();
            assert!((direct - via_abel).norm() <= 1e-5 * direct.norm().max(1e-3), "{}: l {ell} nu {nu}: {direct} vs {via_abel}", k.note());
        }
    }
}

#[test]
fn abel_of_convolution_is_convolution_of_abel() {
    let rule = GroupRule { rho_points: 20, rho_panels: 8, angular_nodes: 96 };
    let tol = Tolerance::new(1e-10, 1e-7, 200_000);
    let radial = |w: f64| move |r: f64| plateau(r, 0.2 * w, w);
    let pairs = [
        (KernelFn::separable(0.7, "f1", radial(0.7), |_| c(1.0, 0.0)).with_type(0, 0), KernelFn::separable(0.6, "f2", radial(0.6), |_| c(1.0, 0.0)).with_type(0, 0)),
        (
            KernelFn::separable(0.6, "f1 type 1", radial(0.6), |s| Complex64::from_polar(1.0, s)).with_type(1, 1),
            KernelFn::separable(0.7, "f2 type 1", radial(0.7), |s| Complex64::from_polar(1.0, s)).with_type(1, 1),
        ),
        (
            KernelFn::new(0.7, "f1 type (2,0)", move |g: &RealMat2| {
                let cc = cartan_decompose(g).unwrap();
                Complex64::from_polar(cc.rho.sinh().powi(2) * radial(0.7)(cc.rho), 2.0 * cc.phi)
            })
            .with_type(2, 0),
            KernelFn::new(0.6, "f2 type (0,2)", move |g: &RealMat2| {
                let cc = cartan_decompose(g).unwrap();
                Complex64::from_polar(cc.rho.sinh().powi(2) * radial(0.6)(cc.rho), 2.0 * cc.vartheta)
            })
            .with_type(0, 2),
        ),
    ];
    for (f1, f2) in &pairs {
        let conv = convolve(f1, f2, rule);
        let r = f1.support() + f2.support();
        for t in [-0.3, 0.5] {
            let lhs = abel_transform(&conv, f64::exp(t), tol).unwrap();
            let rhs = abelian_convolve(
                |s| abel_transform(f1, s.exp(), tol),
                |s| abel_transform(f2, s.exp(), tol),
                t,
                (-f2.support(), f2.support()),
                tol,
            )
            .unwrap();
            assert!((lhs - rhs).norm() <= 1e-4 * rhs.norm().max(1e-2), "{}: t {t}: {lhs} vs {rhs} (support {r})", f1.note());
        }
    }
}

#[test]
fn spherical_function_properties() {
    let nu = c(0.3, 0.4);
    for ell in [-1i64, 0, 2] {
        assert!((spherical_u(&RealMat2::IDENTITY, nu, ell, 64).unwrap() - 1.0).norm() < 1e-12);
        let g = RealMat2::new(1.3, -0.4, 0.9, 0.49230769230769234);
        let plus = spherical_u(&g, nu, ell, 256).unwrap();
        let minus = spherical_u(&g, -nu, ell, 256).unwrap();
        assert!((plus - minus).norm() < 1e-6, "{plus} vs {minus}");
        let f = |m: &RealMat2| spherical_u(m, nu, ell, 256).unwrap();
        let omega = casimir_apply(&f, &g, CasimirForm::Iwasawa, SECOND_STEP).unwrap();
        assert!((omega - (0.25 - nu * nu) * plus).norm() <= 1e-3 * plus.norm());
    }
}

#[test]
fn test_kernel_support_and_positivity() {
    let (tk, minimum) = build_test_kernel(2.0, 2.0, 0).unwrap();
    assert!(minimum >= 1.0);
    assert!(tk.support_within_box());
    let k = tk.kernel(GroupRule { rho_points: 6, rho_panels: 2, angular_nodes: 24 });
    for g in [RealMat2::diagonal(3.0), RealMat2::new(2.0, 1.0, 1.0, 1.0), RealMat2::rotation(1.0) * RealMat2::unipotent(0.5)] {
        assert_eq!(k.eval(&g), c(0.0, 0.0));
    }
    for (ell, nu) in tk.grid() {
        let phi0 = tk.phi_k0(ell, nu).unwrap();
        assert!(phi0.im.abs() <= 1e-9 * phi0.norm(), "l {ell} nu {nu}: {phi0}");
    }
    let (odd, _) = build_test_kernel(2.0, 2.0, 1).unwrap();
    assert!(odd.support_within_box());
}

#[test]
fn separable_phi_matches_generic_rule() {
    let tk = TestKernel { k_cut: 1.0, l_cut: 1.0, c: 1.0, kappa: 0 };
    let rule = GroupRule { rho_points: 16, rho_panels: 8, angular_nodes: 256 };
    for (ell, nu) in [(0i64, c(0.5, 0.0)), (2, c(0.0, 1.0))] {
        let fast = tk.phi_k0(ell, nu).unwrap();
        let slow = phi_transform(&tk.k0(), ell, nu, &rule);
        assert!((fast - slow).norm() <= 1e-6 * fast.norm(), "l {ell}: {fast} vs {slow}");
    }
}

#[test]
fn self_convolution_squares_phi() {
    let tk = TestKernel { k_cut: 1.0, l_cut: 1.0, c: 1.0, kappa: 0 };
    let rule = GroupRule { rho_points: 20, rho_panels: 8, angular_nodes: 96 };
    let radial = sl2count_core::quadrature::FixedRule::composite(16, 6, 0.0, tk.support());
    for (ell, nu) in [(0i64, c(0.4, 0.0)), (2, c(0.0, 0.8))] {
        let part = tk.k0_component(ell).unwrap();
        let k = convolve(&part, &part, rule);
        assert_eq!(k.kind(), Some(KernelType { left: ell, right: ell }));
        // k is of type (l, l), so its values on the diagonal determine Phi.
        let direct = radial.apply(|rho| {
            let profile = spherical_profile(rho, nu, ell, SPHERICAL_NODES);
            TAU * rho.sinh() * k.eval(&RealMat2::diagonal((-rho).exp())) * profile.conj()
        });
        let squared = tk.phi(ell, nu).unwrap();
        assert!((direct.re - squared).abs() <= 1e-4 * squared && direct.im.abs() <= 1e-4 * squared, "l {ell}: {direct} vs {squared}");
    }
}
