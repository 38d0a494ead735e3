//! Coordinates on SL2(R): Iwasawa and Cartan decompositions, the point-pair
//! invariant, Haar integration and finite-difference Lie operators.

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::fault::{self, Fault};
use crate::quadrature::{integrate, integrate_split, Tolerance};

const DET_TOL: f64 = 1e-9;

/// Initial panels per axis for nested Haar quadrature.
const PIECES: usize = 8;

/// Real 2x2 matrix `(a b; c d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealMat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RealMat2 {
    pub const IDENTITY: RealMat2 = RealMat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        RealMat2 { a, b, c, d }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Inverse of a unit-determinant matrix.
    pub fn inverse(&self) -> Self {
        RealMat2::new(self.d, -self.b, -self.c, self.a)
    }

    /// Unipotent `n[x] = (1 x; 0 1)`.
    pub fn unipotent(x: f64) -> Self {
        RealMat2::new(1.0, x, 0.0, 1.0)
    }

    /// Diagonal `a[y] = diag(sqrt y, 1/sqrt y)`.
    pub fn diagonal(y: f64) -> Self {
        let s = y.sqrt();
        RealMat2::new(s, 0.0, 0.0, 1.0 / s)
    }

    /// Rotation `k[theta] = (cos sin; -sin cos)`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        RealMat2::new(c, s, -s, c)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn max_abs_diff(&self, other: &RealMat2) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_unimodular(&self) -> Result<()> {
        let scale = self.frobenius_sq().max(1.0);
        if !self.det().is_finite() || (self.det() - 1.0).abs() > DET_TOL * scale {
            return Err(invalid(format!("determinant {} is not 1", self.det())));
        }
        if self.c == 0.0 && self.d == 0.0 {
            return Err(invalid("bottom row is zero"));
        }
        Ok(())
    }

    /// Random element with entries bounded by `bound` in absolute value.
    pub fn random(rng: &mut impl Rng, bound: f64) -> Self {
        loop {
            let a = rng.gen_range(-bound..bound);
            let b = rng.gen_range(-bound..bound);
            let c = rng.gen_range(-bound..bound);
            if a.abs() < 1e-3 {
                continue;
            }
            let d = (1.0 + b * c) / a;
            if d.abs() <= bound {
                return RealMat2::new(a, b, c, d);
            }
        }
    }
}

impl Mul for RealMat2 {
    type Output = RealMat2;
    fn mul(self, o: RealMat2) -> RealMat2 {
        RealMat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// `g = n[x] a[y] k[theta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IwasawaCoords {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// `g = k[phi] a[e^{-rho}] k[vartheta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartanCoords {
    pub phi: f64,
    pub rho: f64,
    pub vartheta: f64,
}

fn wrap(angle: f64, period: f64) -> f64 {
    let r = angle.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

pub fn iwasawa_decompose(g: &RealMat2) -> Result<IwasawaCoords> {
    g.check_unimodular()?;
    let RealMat2 { a, b, c, d } = *g;
    let n2 = c * c + d * d;
    let mut x = (a * c + b * d) / n2;
    if fault::active(Fault::IwasawaXSign) {
        x = -x;
    }
    Ok(IwasawaCoords {
        x,
        y: 1.0 / n2,
        theta: wrap((-c).atan2(d), TAU),
    })
}

pub fn iwasawa_compose(coords: &IwasawaCoords) -> Result<RealMat2> {
    let IwasawaCoords { x, y, theta } = *coords;
    if !(y > 0.0) || !y.is_finite() {
        return Err(invalid(format!("y = {y} must be positive")));
    }
    let sy = y.sqrt();
    let (s, c) = theta.sin_cos();
    Ok(RealMat2::new(
        sy * c - x / sy * s,
        sy * s + x / sy * c,
        -s / sy,
        c / sy,
    ))
}

pub fn cartan_decompose(g: &RealMat2) -> Result<CartanCoords> {
    g.check_unimodular()?;
    let RealMat2 { a, b, c, d } = *g;
    let alpha = Complex64::new(0.5 * (a + d), 0.5 * (b - c));
    let beta = Complex64::new(0.5 * (a - d), -0.5 * (b + c));
    let sinh_half = beta.norm();
    if sinh_half == 0.0 {
        return Ok(CartanCoords {
            phi: 0.0,
            rho: 0.0,
            vartheta: wrap(alpha.arg(), TAU),
        });
    }
    let rho = 2.0 * sinh_half.asinh();
    let sum = alpha.arg();
    let diff = (-beta).arg();
    let mut phi = 0.5 * (sum + diff);
    let mut vartheta = 0.5 * (sum - diff);
    let shift = (phi / PI).floor();
    phi -= shift * PI;
    vartheta += shift * PI;
    if phi >= PI {
        phi -= PI;
        vartheta += PI;
    }
    Ok(CartanCoords {
        phi,
        rho,
        vartheta: wrap(vartheta, TAU),
    })
}

pub fn cartan_compose(coords: &CartanCoords) -> RealMat2 {
    RealMat2::rotation(coords.phi) * RealMat2::diagonal((-coords.rho).exp()) * RealMat2::rotation(coords.vartheta)
}

/// Point-pair invariant `u(gi, i) = (a^2 + b^2 + c^2 + d^2 - 2) / 4`.
pub fn point_pair_u(g: &RealMat2) -> f64 {
    0.25 * (g.frobenius_sq() - 2.0)
}

/// Rectangle in Iwasawa coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IwasawaBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub theta: (f64, f64),
}

impl IwasawaBox {
    fn validate(&self) -> Result<bool> {
        let widths = [
            self.x.1 - self.x.0,
            self.y.1 - self.y.0,
            self.theta.1 - self.theta.0,
        ];
        if widths.iter().any(|w| !w.is_finite() || *w < 0.0) || self.y.0 <= 0.0 {
            return Err(invalid("box ranges must be ordered with y > 0"));
        }
        Ok(widths.iter().all(|w| *w > 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Nested adaptive Gauss–Kronrod with the given tolerance.
    Quadrature(Tolerance),
    /// Plain Monte-Carlo with `samples` draws from a seeded generator.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarEstimate {
    pub value: f64,
    pub error: f64,
}

/// Integrates `f` against `dx dy dtheta / (2 pi y^2)` over `region`.
pub fn haar_integrate(
    f: impl Fn(&RealMat2) -> f64 + Sync,
    region: &IwasawaBox,
    scheme: Scheme,
) -> Result<HaarEstimate> {
    if !region.validate()? {
        return Ok(HaarEstimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let point = |x: f64, y: f64, theta: f64| {
        iwasawa_compose(&IwasawaCoords { x, y, theta }).expect("y is positive inside the box")
    };
    match scheme {
        Scheme::Quadrature(tol) => {
            let inner_tol = Tolerance::new(tol.abs * 0.1, tol.rel * 0.1, tol.max_evals);
            let mut failed = None;
            let mut total_error = 0.0;
            let outer = integrate_split(
                |x| {
                    let mid = integrate_split(
                        |y| {
                            let inner = integrate_split(
                                |theta| f(&point(x, y, theta)),
                                region.theta.0,
                                region.theta.1,
                                PIECES,
                                inner_tol,
                            );
                            if !inner.converged {
                                failed.get_or_insert(inner);
                            }
                            inner.value / (y * y)
                        },
                        region.y.0,
                        region.y.1,
                        PIECES,
                        inner_tol,
                    );
                    if !mid.converged {
                        failed.get_or_insert(mid);
                    }
                    mid.value
                },
                region.x.0,
                region.x.1,
                PIECES,
                tol,
            );
            total_error += outer.error;
            let value = outer.value / TAU;
            if let Some(bad) = failed.or_else(|| (!outer.converged).then_some(outer)) {
                return Err(Error::AccuracyFailure {
                    estimate: value,
                    error: bad.error.max(total_error),
                    evaluations: bad.evaluations,
                });
            }
            Ok(HaarEstimate {
                value,
                error: total_error / TAU,
            })
        }
        Scheme::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(invalid("Monte-Carlo needs at least two samples"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (ly0, ly1) = (region.y.0.ln(), region.y.1.ln());
            let volume = (region.x.1 - region.x.0) * (ly1 - ly0) * (region.theta.1 - region.theta.0);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..samples {
                let x = rng.gen_range(region.x.0..=region.x.1);
                let y = rng.gen_range(ly0..=ly1).exp();
                let theta = rng.gen_range(region.theta.0..=region.theta.1);
                let v = f(&point(x, y, theta)) / (TAU * y);
                sum += v;
                sum_sq += v * v;
            }
            let n = samples as f64;
            let mean = sum / n;
            let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
            Ok(HaarEstimate {
                value: volume * mean,
                error: volume * (var / n).sqrt(),
            })
        }
    }
}

/// Box in matrix coordinates `(a, c, d)` with `c` bounded away from zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixBox {
    pub a: (f64, f64),
    pub c: (f64, f64),
    pub d: (f64, f64),
}

/// Integrates `f` against `da dc dd / (pi |c|)` where `b = (ad - 1) / c`.
pub fn matrix_integrate(
    f: impl Fn(&RealMat2) -> f64,
    region: &MatrixBox,
    tol: Tolerance,
) -> Result<HaarEstimate> {
    if region.c.0 * region.c.1 <= 0.0 {
        return Err(invalid("c-range must not contain 0"));
    }
    let inner_tol = Tolerance::new(tol.abs * 0.1, tol.rel * 0.1, tol.max_evals);
    let mut converged = true;
    let outer = integrate(
        |a| {
            let mid = integrate(
                |c| {
                    let inner = integrate(
                        |d| f(&RealMat2::new(a, (a * d - 1.0) / c, c, d)),
                        region.d.0,
                        region.d.1,
                        inner_tol,
                    );
                    converged &= inner.converged;
                    inner.value / c.abs()
                },
                region.c.0,
                region.c.1,
                inner_tol,
            );
            converged &= mid.converged;
            mid.value
        },
        region.a.0,
        region.a.1,
        tol,
    );
    let value = outer.value / PI;
    if !(converged && outer.converged) {
        return Err(Error::AccuracyFailure {
            estimate: value,
            error: outer.error / PI,
            evaluations: outer.evaluations,
        });
    }
    Ok(HaarEstimate {
        value,
        error: outer.error / PI,
    })
}

/// Integrates `f` over all of `G` in Cartan coordinates, `rho` in `[0, rho_max]`,
/// using `sinh(rho) drho dphi dvartheta / (2 pi)` on `[0, 2pi)^2`.
pub fn cartan_integrate(
    f: impl Fn(&RealMat2) -> Complex64,
    rho_max: f64,
    tol: Tolerance,
    angular_nodes: usize,
) -> Complex64 {
    let angles = crate::quadrature::FixedRule::periodic(angular_nodes, 0.0, TAU);
    crate::quadrature::integrate_complex(
        |rho| {
            let ring = angles.apply(|phi| {
                angles.apply(|vt| {
                    f(&cartan_compose(&CartanCoords {
                        phi,
                        rho,
                        vartheta: vt,
                    }))
                })
            });
            ring * rho.sinh() / TAU
        },
        0.0,
        rho_max,
        tol,
    )
    .value
}

/// Generator of a one-parameter subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LieDirection {
    /// `exp(t X1) = (1 t; 0 1)`.
    X1,
    /// `exp(t X2) = diag(e^t, e^-t)`.
    X2,
    /// `exp(t X3) = k[t]`.
    X3,
}

impl LieDirection {
    pub fn exp(self, t: f64) -> RealMat2 {
        match self {
            LieDirection::X1 => RealMat2::unipotent(t),
            LieDirection::X2 => RealMat2::new(t.exp(), 0.0, 0.0, (-t).exp()),
            LieDirection::X3 => RealMat2::rotation(t),
        }
    }
}

/// Default step for first derivatives.
pub const FIRST_STEP: f64 = 1e-4;
/// Default step for second derivatives.
pub const SECOND_STEP: f64 = 1e-3;

/// `x_j F(g) = d/dt F(g exp(t X_j))` at `t = 0` by a central difference.
pub fn lie_derivative(
    f: &dyn Fn(&RealMat2) -> Complex64,
    g: &RealMat2,
    which: LieDirection,
    step: f64,
) -> Complex64 {
    let plus = f(&(*g * which.exp(step)));
    let minus = f(&(*g * which.exp(-step)));
    (plus - minus) / (2.0 * step)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Raising operator `e+ = 2i x1 + x2 - i x3`.
pub fn raise(f: &dyn Fn(&RealMat2) -> Complex64, g: &RealMat2, step: f64) -> Complex64 {
    I * 2.0 * lie_derivative(f, g, LieDirection::X1, step)
        + lie_derivative(f, g, LieDirection::X2, step)
        - I * lie_derivative(f, g, LieDirection::X3, step)
}

/// Lowering operator `e- = -2i x1 + x2 + i x3`.
pub fn lower(f: &dyn Fn(&RealMat2) -> Complex64, g: &RealMat2, step: f64) -> Complex64 {
    -I * 2.0 * lie_derivative(f, g, LieDirection::X1, step)
        + lie_derivative(f, g, LieDirection::X2, step)
        + I * lie_derivative(f, g, LieDirection::X3, step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CasimirForm {
    Iwasawa,
    Cartan,
    /// `-e+ e- / 4 + x3^2 / 4 - i x3 / 2` with nested differences.
    LieAlgebra,
}

/// Finite-difference evaluation of the Casimir operator.
pub fn casimir_apply(
    f: &dyn Fn(&RealMat2) -> Complex64,
    g: &RealMat2,
    form: CasimirForm,
    step: f64,
) -> Result<Complex64> {
    match form {
        CasimirForm::Iwasawa => {
            let IwasawaCoords { x, y, theta } = iwasawa_decompose(g)?;
            let eval = |x: f64, y: f64, t: f64| f(&iwasawa_compose(&IwasawaCoords { x, y, theta: t }).expect("positive y"));
            let hy = step * y;
            let hx = step * y.max(1e-3);
            let ht = step;
            let center = eval(x, y, theta);
            let dxx = (eval(x + hx, y, theta) - center * 2.0 + eval(x - hx, y, theta)) / (hx * hx);
            let dyy = (eval(x, y + hy, theta) - center * 2.0 + eval(x, y - hy, theta)) / (hy * hy);
            let dxt = (eval(x + hx, y, theta + ht) - eval(x + hx, y, theta - ht) - eval(x - hx, y, theta + ht)
                + eval(x - hx, y, theta - ht))
                / (4.0 * hx * ht);
            Ok(-(dxx + dyy) * (y * y) + dxt * y)
        }
        CasimirForm::Cartan => {
            let CartanCoords { phi, rho, vartheta } = cartan_decompose(g)?;
            if rho < 10.0 * step {
                return Err(Error::SingularityWarning {
                    rho,
                    limit: 10.0 * step,
                });
            }
            let eval = |p: f64, r: f64, v: f64| {
                f(&cartan_compose(&CartanCoords {
                    phi: p,
                    rho: r,
                    vartheta: v,
                }))
            };
            let h = step;
            let center = eval(phi, rho, vartheta);
            let drr = (eval(phi, rho + h, vartheta) - center * 2.0 + eval(phi, rho - h, vartheta)) / (h * h);
            let dr = (eval(phi, rho + h, vartheta) - eval(phi, rho - h, vartheta)) / (2.0 * h);
            let dpp = (eval(phi + h, rho, vartheta) - center * 2.0 + eval(phi - h, rho, vartheta)) / (h * h);
            let dvv = (eval(phi, rho, vartheta + h) - center * 2.0 + eval(phi, rho, vartheta - h)) / (h * h);
            let dpv = (eval(phi + h, rho, vartheta + h) - eval(phi + h, rho, vartheta - h)
                - eval(phi - h, rho, vartheta + h)
                + eval(phi - h, rho, vartheta - h))
                / (4.0 * h * h);
            let (s, t) = (rho.sinh(), rho.tanh());
            Ok(-drr - dr / t - dpp / (4.0 * s * s) + dpv / (2.0 * s * t) - dvv / (4.0 * s * s))
        }
        CasimirForm::LieAlgebra => {
            let lowered = |h: &RealMat2| lower(f, h, step);
            let rl = raise(&lowered, g, step);
            let x3 = |h: &RealMat2| lie_derivative(f, h, LieDirection::X3, step);
            let x33 = lie_derivative(&x3, g, LieDirection::X3, step);
            let x3f = x3(g);
            Ok(-rl * 0.25 + x33 * 0.25 - I * x3f * 0.5)
        }
    }
}

/// Checks `F(g k[theta]) = e^{i l theta} F(g)` on a few angles; returns the worst relative deviation.
pub fn right_type_deviation(f: &dyn Fn(&RealMat2) -> Complex64, g: &RealMat2, ell: i64, thetas: &[f64]) -> f64 {
    let base = f(g);
    thetas
        .iter()
        .map(|&t| {
            let lhs = f(&(*g * RealMat2::rotation(t)));
            let rhs = base * Complex64::from_polar(1.0, ell as f64 * t);
            (lhs - rhs).norm() / base.norm().max(1e-300)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn iwasawa_examples() {
        let c = iwasawa_decompose(&RealMat2::IDENTITY).unwrap();
        assert_eq!((c.x, c.y, c.theta), (0.0, 1.0, 0.0));
        let c = iwasawa_decompose(&RealMat2::new(0.0, 1.0, -1.0, 0.0)).unwrap();
        assert!(close(c.x, 0.0, 1e-15) && close(c.y, 1.0, 1e-15) && close(c.theta, PI / 2.0, 1e-15));
        let c = iwasawa_decompose(&RealMat2::new(2.0, 1.0, 0.0, 0.5)).unwrap();
        assert!(close(c.x, 2.0, 1e-15) && close(c.y, 4.0, 1e-15) && close(c.theta, 0.0, 1e-15));
        let g = iwasawa_compose(&IwasawaCoords { x: 0.0, y: 1.0, theta: PI / 2.0 }).unwrap();
        assert!(g.max_abs_diff(&RealMat2::new(0.0, 1.0, -1.0, 0.0)) < 1e-15);
        let g = iwasawa_compose(&IwasawaCoords { x: 2.0, y: 4.0, theta: 0.0 }).unwrap();
        assert!(g.max_abs_diff(&RealMat2::new(2.0, 1.0, 0.0, 0.5)) < 1e-15);
        assert!(iwasawa_compose(&IwasawaCoords { x: 0.0, y: 0.0, theta: 0.0 }).is_err());
        assert!(iwasawa_decompose(&RealMat2::new(2.0, 0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn iwasawa_matches_subgroup_product() {
        let c = IwasawaCoords { x: -0.7, y: 2.3, theta: 4.1 };
        let direct = RealMat2::unipotent(c.x) * RealMat2::diagonal(c.y) * RealMat2::rotation(c.theta);
        assert!(iwasawa_compose(&c).unwrap().max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn cartan_examples() {
        let c = cartan_decompose(&RealMat2::IDENTITY).unwrap();
        assert_eq!((c.phi, c.rho, c.vartheta), (0.0, 0.0, 0.0));
        let c = cartan_decompose(&RealMat2::diagonal((-1.0f64).exp())).unwrap();
        assert!(close(c.phi, 0.0, 1e-14) && close(c.rho, 1.0, 1e-14) && close(c.vartheta, 0.0, 1e-14));
        let c = cartan_decompose(&RealMat2::unipotent(2.0)).unwrap();
        assert!(close(c.rho, 3.0f64.acosh(), 1e-12));
        let c = cartan_decompose(&RealMat2::rotation(2.0)).unwrap();
        assert!(close(c.rho, 0.0, 1e-15) && close(c.phi, 0.0, 0.0) && close(c.vartheta, 2.0, 1e-14));
    }

    #[test]
    fn point_pair_examples() {
        assert_eq!(point_pair_u(&RealMat2::IDENTITY), 0.0);
        assert!(close(point_pair_u(&RealMat2::new(2.0, 1.0, 1.0, 1.0)), 1.25, 1e-15));
        assert!(close(point_pair_u(&RealMat2::rotation(0.3)), 0.0, 1e-15));
        // |gi - i|^2 / (4 Im gi) for the Moebius action
        let g = RealMat2::new(2.0, 1.0, 1.0, 1.0);
        let z = Complex64::new(0.0, 1.0);
        let gz = (z * g.a + g.b) / (z * g.c + g.d);
        assert!(close((gz - z).norm_sqr() / (4.0 * gz.im), point_pair_u(&g), 1e-12));
    }

    #[test]
    fn haar_volume_of_box() {
        let region = IwasawaBox { x: (0.0, 1.0), y: (1.0, std::f64::consts::E), theta: (0.0, TAU) };
        let q = haar_integrate(|_| 1.0, &region, Scheme::Quadrature(Tolerance::new(1e-12, 1e-10, 100_000))).unwrap();
        assert!(close(q.value, 1.0 - (-1.0f64).exp(), 1e-10));
        let mc = haar_integrate(|_| 1.0, &region, Scheme::MonteCarlo { samples: 200_000, seed: 3 }).unwrap();
        assert!(close(mc.value, 1.0 - (-1.0f64).exp(), 5.0 * mc.error + 1e-12));
        let empty = IwasawaBox { x: (0.0, 0.0), ..region };
        assert_eq!(haar_integrate(|_| 1.0, &empty, Scheme::MonteCarlo { samples: 10, seed: 0 }).unwrap().value, 0.0);
        let bad = IwasawaBox { x: (1.0, 0.0), ..region };
        assert!(haar_integrate(|_| 1.0, &bad, Scheme::MonteCarlo { samples: 10, seed: 0 }).is_err());
    }

    #[test]
    fn cartan_and_iwasawa_measures_agree_on_gaussian() {
        let gauss = |g: &RealMat2| (-g.frobenius_sq()).exp();
        let cartan = cartan_integrate(|g| Complex64::new(gauss(g), 0.0), 8.0, Tolerance::new(1e-13, 1e-11, 100_000), 8);
        assert!(close(cartan.re, PI * (-2.0f64).exp(), 1e-9), "{cartan}");
    }

    #[test]
    fn lie_derivative_examples() {
        let y_of = |g: &RealMat2| Complex64::new(iwasawa_decompose(g).unwrap().y, 0.0);
        let v = lie_derivative(&y_of, &RealMat2::IDENTITY, LieDirection::X2, FIRST_STEP);
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-7);
        let constant = |_: &RealMat2| Complex64::new(3.0, 0.0);
        assert_eq!(lie_derivative(&constant, &RealMat2::IDENTITY, LieDirection::X1, FIRST_STEP), Complex64::new(0.0, 0.0));
        let phase = |g: &RealMat2| Complex64::from_polar(1.0, iwasawa_decompose(g).unwrap().theta);
        let v = lie_derivative(&phase, &RealMat2::IDENTITY, LieDirection::X3, FIRST_STEP);
        assert!((v - I).norm() < 1e-7);
    }

    #[test]
    fn cartan_casimir_singularity_is_flagged() {
        let constant = |_: &RealMat2| Complex64::new(1.0, 0.0);
        let r = casimir_apply(&constant, &RealMat2::IDENTITY, CasimirForm::Cartan, SECOND_STEP);
        assert!(matches!(r, Err(Error::SingularityWarning { .. })));
        let g = RealMat2::new(2.0, 1.0, 1.0, 1.0);
        for form in [CasimirForm::Iwasawa, CasimirForm::Cartan, CasimirForm::LieAlgebra] {
            assert!(casimir_apply(&constant, &g, form, SECOND_STEP).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn random_matrices_are_unimodular() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let g = RealMat2::random(&mut rng, 10.0);
            assert!((g.det() - 1.0).abs() < 1e-12);
            assert!(g.a.abs().max(g.b.abs()).max(g.c.abs()).max(g.d.abs()) <= 10.0);
        }
    }
}
