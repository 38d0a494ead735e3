//! Harmonic analysis on SL2(R): the functions `phi_l`, the Jacquet operator,
//! type projections, Abel and Mellin transforms, the spectral transform `Phi`
//! and the self-convolved test kernel.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num::complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::fault::{self, Fault};
use crate::geometry::{cartan_compose, cartan_decompose, iwasawa_decompose, CartanCoords, RealMat2};
use crate::quadrature::{integrate_complex_split, integrate_to_infinity, FixedRule, Tolerance};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// The two Jacquet operators `A^+` and `A^-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Spectral parameter `nu`, weight `ell` and Jacquet sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    pub nu: Complex64,
    pub ell: i64,
    pub sign: Sign,
}

impl SpectralParams {
    pub fn new(nu: Complex64, ell: i64, sign: Sign) -> Self {
        SpectralParams { nu, ell, sign }
    }

    /// Casimir eigenvalue `1/4 - nu^2`.
    pub fn eigenvalue(&self) -> Complex64 {
        0.25 - self.nu * self.nu
    }
}

/// `phi_l(g, nu) = y^{nu + 1/2} e^{i l theta}`.
pub fn phi_basic(g: &RealMat2, nu: Complex64, ell: i64) -> Result<Complex64> {
    let c = iwasawa_decompose(g)?;
    Ok(Complex64::new(c.y, 0.0).powc(nu + 0.5) * Complex64::from_polar(1.0, ell as f64 * c.theta))
}

/// Finite part of the rotated contour.
const JACQUET_CUT: f64 = 3.0;

/// `((xi - i)/(xi + i))^e` with the argument taken in `[0, 2 pi)`.
fn cayley_power(xi: Complex64, e: f64) -> Complex64 {
    let w = (xi - I) / (xi + I);
    let mut arg = w.im.atan2(w.re);
    if arg < 0.0 {
        arg += TAU;
    }
    (Complex64::new(w.norm().ln(), arg) * e).exp()
}

fn jacquet_integrand(xi: Complex64, y: f64, nu: Complex64, e: f64) -> Complex64 {
    let osc = (-TAU * y * I * xi).exp();
    let weight = (-(nu + 0.5) * (xi * xi + 1.0).ln()).exp();
    osc * weight * cayley_power(xi, e)
}

/// `int e(-y xi) (xi^2 + 1)^{-nu - 1/2} ((xi - i)/(xi + i))^{+-l/2} d xi`.
///
/// The real line is cut at `|xi| = 3` and both tails are rotated into the lower
/// half-plane, where `e(-y xi)` decays exponentially.
pub fn jacquet_integral(y: f64, p: &SpectralParams, tol: Tolerance) -> Result<Complex64> {
    if !(y > 0.0) {
        return Err(invalid(format!("y = {y} must be positive")));
    }
    if p.nu.re < 0.25 {
        return Err(invalid(format!("Re nu = {} is below 1/4", p.nu.re)));
    }
    let e = p.sign.as_f64() * p.ell as f64 / 2.0;
    let r = JACQUET_CUT;
    let pieces = 8usize.max((4.0 * r * y).ceil() as usize);
    let middle = integrate_complex_split(
        |x| jacquet_integrand(Complex64::new(x, 0.0), y, p.nu, e),
        -r,
        r,
        pieces,
        tol,
    )
    .into_result()?;
    let right = integrate_to_infinity(|t| -I * jacquet_integrand(Complex64::new(r, -t), y, p.nu, e), 0.0, tol)
        .into_result()?;
    let left = integrate_to_infinity(|t| I * jacquet_integrand(Complex64::new(-r, -t), y, p.nu, e), 0.0, tol)
        .into_result()?;
    Ok(middle.value + right.value + left.value)
}

/// `A^{+-} phi_l(g, nu) = e^{i l theta} e(+-x) y^{1/2 - nu} J(y)`.
pub fn jacquet_apply(g: &RealMat2, p: &SpectralParams, tol: Tolerance) -> Result<Complex64> {
    let c = iwasawa_decompose(g)?;
    let integral = jacquet_integral(c.y, p, tol)?;
    let phase = Complex64::from_polar(1.0, p.ell as f64 * c.theta + TAU * p.sign.as_f64() * c.x);
    Ok(phase * Complex64::new(c.y, 0.0).powc(0.5 - p.nu) * integral)
}

/// Generalised Laguerre polynomial `L_n^{(alpha)}(x)` by the three-term recurrence.
pub fn laguerre(n: u32, alpha: f64, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 + alpha - x);
    if n == 0 {
        return prev;
    }
    for m in 1..n {
        let m = m as f64;
        let next = ((2.0 * m + 1.0 + alpha - x) * cur - (m + alpha) * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn check_discrete(k: u32, ell: i64, sign: Sign) -> Result<u32> {
    let signed = sign.as_f64() as i64 * ell;
    if k == 0 || signed < k as i64 || (ell - k as i64).rem_euclid(2) != 0 {
        return Err(invalid(format!("weight {k} is incompatible with l = {ell} and sign {sign:?}")));
    }
    Ok(((ell.abs() - k as i64) / 2) as u32)
}

/// Normalised discrete-series Jacquet value at `a[y]`, `nu = (k - 1)/2`:
/// `i^k pi^{1/2} (Gamma(n+1)/Gamma(n+k))^{1/2} e^{-2 pi y} (4 pi y)^{k/2} L_n^{(k-1)}(4 pi y)`
/// with `n = (|l| - k)/2`. For even `k` the phase `i^k` is the sign `(-1)^{k/2}`.
pub fn jacquet_discrete_series(y: f64, k: u32, ell: i64, sign: Sign) -> Result<Complex64> {
    let n = check_discrete(k, ell, sign)?;
    if !(y > 0.0) {
        return Err(invalid(format!("y = {y} must be positive")));
    }
    let x = 4.0 * PI * y;
    let kf = k as f64;
    let log_mag = 0.5 * PI.ln() + 0.5 * (ln_gamma(n as f64 + 1.0) - ln_gamma(n as f64 + kf)) - 2.0 * PI * y
        + 0.5 * kf * x.ln();
    let phase = I.powu(k);
    Ok(phase * log_mag.exp() * laguerre(n, kf - 1.0, x))
}

/// `(pi^{-2 nu} Gamma(|l|/2 + k/2) / Gamma(|l|/2 - k/2 + 1))^{1/2}`, the factor relating
/// [`jacquet_apply`] at `nu = (k - 1)/2` to [`jacquet_discrete_series`].
pub fn discrete_series_normaliser(k: u32, ell: i64) -> f64 {
    let nu = (k as f64 - 1.0) / 2.0;
    let half = ell.abs() as f64 / 2.0;
    (0.5 * (-2.0 * nu * PI.ln() + ln_gamma(half + k as f64 / 2.0) - ln_gamma(half - k as f64 / 2.0 + 1.0))).exp()
}

/// Exact value of `int_0^inf |jacquet_discrete_series(y)|^2 dy / y^2`:
/// `4 pi^2 Gamma(n+1)/Gamma(n+k) sum_{i <= n} Gamma(i+k-1)/Gamma(i+1)`, finite for `k >= 2`.
pub fn discrete_series_norm(k: u32, ell: i64, sign: Sign) -> Result<f64> {
    let n = check_discrete(k, ell, sign)?;
    if k < 2 {
        return Err(invalid("the norm integral diverges for weight 1"));
    }
    let kf = k as f64;
    let sum: f64 = (0..=n)
        .map(|i| (ln_gamma(i as f64 + kf - 1.0) - ln_gamma(i as f64 + 1.0)).exp())
        .sum();
    Ok(4.0 * PI * PI * (ln_gamma(n as f64 + 1.0) - ln_gamma(n as f64 + kf)).exp() * sum)
}

pub type KernelEval = Arc<dyn Fn(&RealMat2) -> Complex64 + Send + Sync>;

/// Compactly supported function on SL2(R); zero for `rho(g) > support`.
#[derive(Clone)]
pub struct KernelFn {
    eval: KernelEval,
    support: f64,
    note: String,
    kind: Option<KernelType>,
}

/// Left and right type: `k(k[a] g k[b]) = e^{i(left a + right b)} k(g)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelType {
    pub left: i64,
    pub right: i64,
}

impl fmt::Debug for KernelFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelFn")
            .field("support", &self.support)
            .field("note", &self.note)
            .field("kind", &self.kind)
            .finish()
    }
}

/// Cartan radius `rho` with `cosh rho = (a^2 + b^2 + c^2 + d^2)/2`.
pub fn cartan_radius(g: &RealMat2) -> f64 {
    (0.5 * g.frobenius_sq()).max(1.0).acosh()
}

impl KernelFn {
    pub fn new(support: f64, note: impl Into<String>, eval: impl Fn(&RealMat2) -> Complex64 + Send + Sync + 'static) -> Self {
        KernelFn {
            eval: Arc::new(eval),
            support,
            note: note.into(),
            kind: None,
        }
    }

    /// Declares the type of the kernel; the caller vouches for it.
    pub fn with_type(mut self, left: i64, right: i64) -> Self {
        self.kind = Some(KernelType { left, right });
        self
    }

    pub fn kind(&self) -> Option<KernelType> {
        self.kind
    }

    /// `f(rho) F(phi + vartheta)`, of type `(l, l)` components only.
    pub fn separable(
        support: f64,
        note: impl Into<String>,
        radial: impl Fn(f64) -> f64 + Send + Sync + 'static,
        angular: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        KernelFn::new(support, note, move |g| match cartan_decompose(g) {
            Ok(c) => angular(c.phi + c.vartheta) * radial(c.rho),
            Err(_) => zero(),
        })
    }

    pub fn zero() -> Self {
        KernelFn::new(0.0, "zero", |_| zero())
    }

    pub fn eval(&self, g: &RealMat2) -> Complex64 {
        if cartan_radius(g) > self.support {
            return zero();
        }
        (self.eval)(g)
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn note(&self) -> &str {
        &self.note
    }
}

/// Product rule on `G` in Cartan coordinates: composite Gauss–Legendre in `rho`,
/// trapezoid in both angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupRule {
    pub rho_points: usize,
    pub rho_panels: usize,
    pub angular_nodes: usize,
}

impl Default for GroupRule {
    fn default() -> Self {
        GroupRule {
            rho_points: 12,
            rho_panels: 3,
            angular_nodes: 48,
        }
    }
}

impl GroupRule {
    /// `int_G f(g) dg` over `rho <= radius`, with `dg = sinh(rho) d rho d phi d vartheta / (2 pi)`.
    pub fn integrate(&self, radius: f64, f: impl Fn(&RealMat2) -> Complex64) -> Complex64 {
        if radius <= 0.0 {
            return zero();
        }
        let radial = FixedRule::composite(self.rho_points, self.rho_panels, 0.0, radius);
        let angles = FixedRule::periodic(self.angular_nodes, 0.0, TAU);
        radial.apply(|rho| {
            let ring = angles.apply(|phi| angles.apply(|vartheta| f(&cartan_compose(&CartanCoords { phi, rho, vartheta }))));
            ring * rho.sinh() / TAU
        })
    }
}

/// `k_{l1,l2}(g) = int int k(k1 g k2) e^{-i l1 theta1 - i l2 theta2} dk1 dk2`.
pub fn kernel_type_project(k: &KernelFn, ell1: i64, ell2: i64, angular_nodes: usize) -> KernelFn {
    let source = k.clone();
    let n = angular_nodes.max(1);
    KernelFn::new(k.support, format!("type ({ell1},{ell2}) part of {}", k.note), move |g| {
        let Ok(c) = cartan_decompose(g) else { return zero() };
        let core = RealMat2::diagonal((-c.rho).exp());
        let mut acc = zero();
        for i in 0..n {
            let t1 = TAU * i as f64 / n as f64;
            let left = RealMat2::rotation(t1) * core;
            for j in 0..n {
                let t2 = TAU * j as f64 / n as f64;
                acc += source.eval(&(left * RealMat2::rotation(t2))) * Complex64::from_polar(1.0, -(ell1 as f64 * t1 + ell2 as f64 * t2));
            }
        }
        acc / (n * n) as f64 * Complex64::from_polar(1.0, ell1 as f64 * c.phi + ell2 as f64 * c.vartheta)
    })
    .with_type(ell1, ell2)
}

/// `A k(a[y]) = y^{1/2} int k(a[y] n[x]) dx`, integrated over the `x`-range where
/// `cosh t + e^t x^2 / 2 <= cosh(support)` with `y = e^t`.
pub fn abel_transform(k: &KernelFn, y: f64, tol: Tolerance) -> Result<Complex64> {
    if !(y > 0.0) {
        return Err(invalid(format!("y = {y} must be positive")));
    }
    let t = y.ln();
    let slack = k.support.cosh() - t.cosh();
    if slack <= 0.0 {
        return Ok(zero());
    }
    let x_max = (2.0 * slack / y).sqrt();
    let sy = y.sqrt();
    let est = integrate_complex_split(
        |x| k.eval(&RealMat2::new(sy, sy * x, 0.0, 1.0 / sy)),
        -x_max,
        x_max,
        4,
        tol,
    )
    .into_result()?;
    Ok(sy * est.value)
}

/// `M f(s) = int f(a[e^t]) e^{t s} dt` over `t_range`, outside of which `f` vanishes.
pub fn mellin_transform(f: impl Fn(f64) -> Result<Complex64>, s: Complex64, t_range: (f64, f64), tol: Tolerance) -> Result<Complex64> {
    let mut failure = None;
    let est = integrate_complex_split(
        |t| match f(t) {
            Ok(v) => v * (s * t).exp(),
            Err(e) => {
                failure.get_or_insert(e);
                zero()
            }
        },
        t_range.0,
        t_range.1,
        4,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est.into_result()?.value)
}

/// `A f1 *_A A f2 (a[e^t]) = int f1(t - t0) f2(t0) d t0` for functions given in `t`.
pub fn abelian_convolve(
    f1: impl Fn(f64) -> Result<Complex64>,
    f2: impl Fn(f64) -> Result<Complex64>,
    t: f64,
    t_range: (f64, f64),
    tol: Tolerance,
) -> Result<Complex64> {
    mellin_transform(|t0| Ok(f1(t - t0)? * f2(t0)?), zero(), t_range, tol)
}

/// Radial profile of [`spherical_u`]: `U(a[e^{-rho}])`.
pub fn spherical_profile(rho: f64, nu: Complex64, ell: i64, nodes: usize) -> Complex64 {
    let a = RealMat2::diagonal((-rho).exp());
    let rule = FixedRule::periodic(nodes, 0.0, TAU);
    rule.apply(|th| {
        let g = RealMat2::rotation(-th) * a * RealMat2::rotation(th);
        phi_basic(&g, nu, ell).unwrap_or_else(|_| zero())
    }) / TAU
}

/// `U_{lambda,l}(g) = int phi_l(k[-theta] g k[theta], nu) d theta / (2 pi)`, `lambda = 1/4 - nu^2`.
pub fn spherical_u(g: &RealMat2, nu: Complex64, ell: i64, nodes: usize) -> Result<Complex64> {
    let rule = FixedRule::periodic(nodes, 0.0, TAU);
    let mut failure = None;
    let v = rule.apply(|th| {
        let h = RealMat2::rotation(-th) * *g * RealMat2::rotation(th);
        phi_basic(&h, nu, ell).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            zero()
        })
    }) / TAU;
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Nodes used for the circle average inside [`phi_transform`].
pub const SPHERICAL_NODES: usize = 96;

/// `Phi_{l,l}(k; nu) = int_G k_{l,l}(h) conj(phi_l(h, nu)) dh`, computed as
/// `int_G k(h) conj(U_{lambda,l}(h)) dh` on a Cartan product rule.
pub fn phi_transform(k: &KernelFn, ell: i64, nu: Complex64, rule: &GroupRule) -> Complex64 {
    let radial = FixedRule::composite(rule.rho_points, rule.rho_panels, 0.0, k.support);
    let angles = FixedRule::periodic(rule.angular_nodes, 0.0, TAU);
    radial.apply(|rho| {
        let profile = spherical_profile(rho, nu, ell, SPHERICAL_NODES);
        let ring = angles.apply(|phi| {
            angles.apply(|vartheta| {
                let g = cartan_compose(&CartanCoords { phi, rho, vartheta });
                k.eval(&g) * Complex64::from_polar(1.0, -(ell as f64) * (phi + vartheta))
            })
        });
        ring * profile.conj() * rho.sinh() / TAU
    })
}

/// `M A k_{l,l}(conj nu)`, the Iwasawa-side evaluation of `Phi`.
pub fn phi_transform_abel(k: &KernelFn, ell: i64, nu: Complex64, angular_nodes: usize, tol: Tolerance) -> Result<Complex64> {
    let projected = kernel_type_project(k, ell, ell, angular_nodes);
    let r = k.support;
    let s = if fault::active(Fault::MellinNoConj) { nu } else { nu.conj() };
    mellin_transform(|t| abel_transform(&projected, t.exp(), tol), s, (-r, r), tol)
}

/// `f1 * f2 (h) = int_G f1(g^{-1} h) f2(g) dg`, integrating over the support of `f2`.
///
/// When the left type of `f1` equals the right type of `f2` the integrand does
/// not depend on `vartheta` in `g = k[phi] a k[vartheta]`, and that angle is dropped.
pub fn convolve(f1: &KernelFn, f2: &KernelFn, rule: GroupRule) -> KernelFn {
    let (a, b) = (f1.clone(), f2.clone());
    let note = format!("({}) * ({})", f1.note, f2.note);
    let kind = match (f1.kind, f2.kind) {
        (Some(t1), Some(t2)) => Some((t1, t2)),
        _ => None,
    };
    match kind {
        Some((t1, t2)) if t1.left == t2.right => KernelFn::new(f1.support + f2.support, note, move |h| {
            let radial = FixedRule::composite(rule.rho_points, rule.rho_panels, 0.0, b.support);
            let angles = FixedRule::periodic(rule.angular_nodes, 0.0, TAU);
            radial.apply(|rho| {
                let a_inv = RealMat2::diagonal(rho.exp());
                let ring = angles.apply(|phi| {
                    let right = b.eval(&(RealMat2::rotation(phi) * RealMat2::diagonal((-rho).exp())));
                    if right == zero() {
                        return zero();
                    }
                    a.eval(&(a_inv * RealMat2::rotation(-phi) * *h)) * right
                });
                ring * rho.sinh()
            })
        })
        .with_type(t2.left, t1.right),
        _ => KernelFn::new(f1.support + f2.support, note, move |h| {
            rule.integrate(b.support, |g| {
                let right = b.eval(g);
                if right == zero() {
                    return zero();
                }
                a.eval(&(g.inverse() * *h)) * right
            })
        }),
    }
}

/// Smooth step: 0 for `s <= 0`, 1 for `s >= 1`, built from `exp(-1/s)`.
pub fn smooth_step(s: f64) -> f64 {
    let psi = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let (p, q) = (psi(s), psi(1.0 - s));
    if p + q == 0.0 {
        0.0
    } else {
        p / (p + q)
    }
}

/// Even bump equal to 1 on `[-inner, inner]` and vanishing outside `(-outer, outer)`.
pub fn plateau(x: f64, inner: f64, outer: f64) -> f64 {
    let r = x.abs();
    if r <= inner {
        1.0
    } else if r >= outer {
        0.0
    } else {
        smooth_step((outer - r) / (outer - inner))
    }
}

/// `k_0(g) = C^4 K^2 L f(rho) F(phi + vartheta)` and `k = k_0 * k_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestKernel {
    pub k_cut: f64,
    pub l_cut: f64,
    pub c: f64,
    /// Parity of the admissible weights.
    pub kappa: u8,
}

/// Largest `rho` with `|a| + |b| + |c| + |d| <= 6` guaranteed: `2 sqrt(2 cosh rho) <= 6`.
pub fn box_radius() -> f64 {
    4.5f64.acosh()
}

impl TestKernel {
    pub fn scale(&self) -> f64 {
        self.c.powi(4) * self.k_cut * self.k_cut * self.l_cut
    }

    /// `f`: 1 on `|rho| <= 1/(2CK)`, supported in `|rho| <= 1/(CK)`.
    pub fn radial(&self, rho: f64) -> f64 {
        let w = 1.0 / (self.c * self.k_cut);
        plateau(rho, 0.5 * w, w)
    }

    /// `F`: 1 near 0, `(-1)^kappa` near `pi`, supported within `1/(CL)` of `{0, pi}`.
    pub fn angular(&self, x: f64) -> f64 {
        let w = 1.0 / (self.c * self.l_cut);
        let near = |centre: f64| {
            let d = (x - centre).rem_euclid(TAU);
            plateau(d.min(TAU - d), 0.5 * w, w)
        };
        let sign = if self.kappa.is_multiple_of(2) { 1.0 } else { -1.0 };
        near(0.0) + sign * near(PI)
    }

    pub fn k0_support(&self) -> f64 {
        1.0 / (self.c * self.k_cut)
    }

    pub fn support(&self) -> f64 {
        2.0 * self.k0_support()
    }

    /// `true` when `k` vanishes wherever `|a| + |b| + |c| + |d| > 6`.
    pub fn support_within_box(&self) -> bool {
        self.support() <= box_radius()
    }

    pub fn k0(&self) -> KernelFn {
        let me = *self;
        let scale = self.scale();
        KernelFn::separable(
            self.k0_support(),
            format!("test k0 (K={}, L={}, C={})", self.k_cut, self.l_cut, self.c),
            move |rho| scale * me.radial(rho),
            move |s| Complex64::new(me.angular(s), 0.0),
        )
    }

    /// Type `(l, l)` component of `k_0`: `C^4 K^2 L F^(l) f(rho) e^{i l (phi + vartheta)}`.
    pub fn k0_component(&self, ell: i64) -> Result<KernelFn> {
        let me = *self;
        let coeff = self.scale() * self.fourier_coefficient(ell)?;
        Ok(KernelFn::separable(
            self.k0_support(),
            format!("test k0, type ({ell},{ell})"),
            move |rho| coeff * me.radial(rho),
            move |s| Complex64::from_polar(1.0, ell as f64 * s),
        )
        .with_type(ell, ell))
    }

    pub fn kernel(&self, rule: GroupRule) -> KernelFn {
        let k0 = self.k0();
        convolve(&k0, &k0, rule)
    }

    /// `F^(l) = (1/2pi) int F(theta) e^{-i l theta} d theta`.
    pub fn fourier_coefficient(&self, ell: i64) -> Result<f64> {
        let w = 1.0 / (self.c * self.l_cut);
        let tol = Tolerance::new(1e-13, 1e-12, 200_000);
        let one = crate::quadrature::integrate_split(|x| self.angular(x) * (ell as f64 * x).cos(), -w, w, 4, tol).into_result()?;
        let two = crate::quadrature::integrate_split(|x| self.angular(x) * (ell as f64 * x).cos(), PI - w, PI + w, 4, tol).into_result()?;
        Ok((one.value + two.value) / TAU)
    }

    /// `Phi_{l,l}(k_0; nu) = C^4 K^2 L F^(l) int 2 pi sinh(rho) f(rho) conj(U profile) d rho`.
    pub fn phi_k0(&self, ell: i64, nu: Complex64) -> Result<Complex64> {
        let fourier = self.fourier_coefficient(ell)?;
        let est = integrate_complex_split(
            |rho| TAU * rho.sinh() * self.radial(rho) * spherical_profile(rho, nu, ell, SPHERICAL_NODES).conj(),
            0.0,
            self.k0_support(),
            4,
            Tolerance::new(1e-14, 1e-10, 200_000),
        )
        .into_result()?;
        Ok(self.scale() * fourier * est.value)
    }

    /// `Phi_{l,l}(k; nu) = |Phi_{l,l}(k_0; nu)|^2` for `nu` real or imaginary.
    pub fn phi(&self, ell: i64, nu: Complex64) -> Result<f64> {
        Ok(self.phi_k0(ell, nu)?.norm_sqr())
    }

    /// Grid `|l| <= L`, `l = kappa mod 2`, and `nu` in `{+-j K/4, +-i j K/4 : j = 0..4}`.
    pub fn grid(&self) -> Vec<(i64, Complex64)> {
        let lmax = self.l_cut.floor() as i64;
        let mut out = Vec::new();
        for ell in -lmax..=lmax {
            if (ell - self.kappa as i64).rem_euclid(2) != 0 {
                continue;
            }
            for j in -4..=4 {
                let v = j as f64 * self.k_cut / 4.0;
                out.push((ell, Complex64::new(v, 0.0)));
                if j != 0 {
                    out.push((ell, Complex64::new(0.0, v)));
                }
            }
        }
        out
    }

    /// Smallest `Phi(k)` over [`TestKernel::grid`].
    pub fn grid_minimum(&self) -> Result<f64> {
        self.grid()
            .into_iter()
            .map(|(ell, nu)| self.phi(ell, nu))
            .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)))
    }
}

/// Test kernel with `C` doubled from 1 until `Phi >= 1` on the grid.
pub fn build_test_kernel(k_cut: f64, l_cut: f64, kappa: u8) -> Result<(TestKernel, f64)> {
    if k_cut < 1.0 || l_cut < 1.0 {
        return Err(invalid("K and L must be at least 1"));
    }
    let mut c = 1.0;
    for _ in 0..20 {
        let tk = TestKernel { k_cut, l_cut, c, kappa };
        let minimum = tk.grid_minimum()?;
        if minimum >= 1.0 {
            return Ok((tk, minimum));
        }
        c *= 2.0;
    }
    Err(invalid("no constant C up to 2^20 makes Phi >= 1"))
}
