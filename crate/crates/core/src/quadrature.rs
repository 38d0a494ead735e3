//! One-dimensional quadrature: adaptive Gauss–Kronrod, Gauss–Legendre rules
//! and a periodic trapezoid rule.

use num::complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of a quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Copy> Estimate<T> {
    pub fn into_result(self) -> Result<Estimate<T>>
    where
        T: Into<Complex64>,
    {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::AccuracyFailure {
                estimate: self.value.into().re,
                error: self.error,
                evaluations: self.evaluations,
            })
        }
    }
}

/// Tolerances and evaluation budget for adaptive rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_evals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64, max_evals: usize) -> Self {
        Tolerance { abs, rel, max_evals }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-10, 1e-10, 200_000)
    }
}

fn kronrod_panel(f: &mut impl FnMut(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    (value, error)
}

/// Globally adaptive 15-point Gauss–Kronrod integration of a complex integrand.
pub fn integrate_complex(
    f: impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Estimate<Complex64> {
    integrate_complex_split(f, a, b, 1, tol)
}

/// As [`integrate_complex`], starting from `pieces` equal panels. Useful for
/// integrands with jumps that a single initial panel could miss.
pub fn integrate_complex_split(
    mut f: impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    pieces: usize,
    tol: Tolerance,
) -> Estimate<Complex64> {
    if a == b {
        return Estimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let pieces = pieces.max(1);
    let width = (b - a) / pieces as f64;
    let mut panels: Vec<(f64, f64, Complex64, f64)> = Vec::with_capacity(pieces);
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        let (v, e) = kronrod_panel(&mut f, lo, hi);
        panels.push((lo, hi, v, e));
    }
    let mut evaluations = 15 * pieces;
    loop {
        let total: Complex64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if error <= tol.abs.max(tol.rel * total.norm()) {
            return Estimate {
                value: total,
                error,
                evaluations,
                converged: true,
            };
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let (lo, hi, _, _) = panels[worst];
        let mid = 0.5 * (lo + hi);
        if evaluations + 30 > tol.max_evals || mid <= lo || mid >= hi {
            return Estimate {
                value: total,
                error,
                evaluations,
                converged: false,
            };
        }
        let (v1, e1) = kronrod_panel(&mut f, lo, mid);
        let (v2, e2) = kronrod_panel(&mut f, mid, hi);
        evaluations += 30;
        panels[worst] = (lo, mid, v1, e1);
        panels.push((mid, hi, v2, e2));
    }
}

/// Real-valued wrapper around [`integrate_complex`].
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> Estimate<f64> {
    let est = integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, tol);
    Estimate {
        value: est.value.re,
        error: est.error,
        evaluations: est.evaluations,
        converged: est.converged,
    }
}

/// Real-valued wrapper around [`integrate_complex_split`].
pub fn integrate_split(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    pieces: usize,
    tol: Tolerance,
) -> Estimate<f64> {
    let est = integrate_complex_split(|x| Complex64::new(f(x), 0.0), a, b, pieces, tol);
    Estimate {
        value: est.value.re,
        error: est.error,
        evaluations: est.evaluations,
        converged: est.converged,
    }
}

/// Integral over `[a, inf)` through the substitution `x = a + t / (1 - t)`.
pub fn integrate_to_infinity(
    mut f: impl FnMut(f64) -> Complex64,
    a: f64,
    tol: Tolerance,
) -> Estimate<Complex64> {
    integrate_complex(
        |t| {
            if t >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let s = 1.0 - t;
            let v = f(a + t / s);
            if v.is_finite() {
                v / (s * s)
            } else {
                Complex64::new(0.0, 0.0)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            deriv = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / deriv;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed Gauss–Legendre rule mapped to `[a, b]`.
#[derive(Debug, Clone)]
pub struct FixedRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FixedRule {
    pub fn legendre(n: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        FixedRule {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|w| w * half).collect(),
        }
    }

    /// Composite Gauss–Legendre with `panels` equal panels of `n` points each.
    pub fn composite(n: usize, panels: usize, a: f64, b: f64) -> Self {
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(n * panels);
        let mut weights = Vec::with_capacity(n * panels);
        for p in 0..panels {
            let lo = a + width * p as f64;
            let rule = FixedRule::legendre(n, lo, lo + width);
            nodes.extend(rule.nodes);
            weights.extend(rule.weights);
        }
        FixedRule { nodes, weights }
    }

    /// Trapezoid rule for a periodic integrand over `[a, a + period)`.
    pub fn periodic(n: usize, a: f64, period: f64) -> Self {
        let h = period / n as f64;
        FixedRule {
            nodes: (0..n).map(|i| a + h * i as f64).collect(),
            weights: vec![h; n],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, mut f: impl FnMut(f64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}
