//! Brute-force counts for twisted determinant equations and shifted divisor
//! sums, with the main term, the `K` and `R` terms and the error budget
//! `sqrt(AD K R)`.

use std::f64::consts::PI;

use num::complex::Complex64;
use num::rational::Rational64;
use num::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{divisors, gcd, is_squarefree};
use crate::error::{invalid, Error, Result};
use crate::fault::{self, Fault};
use crate::orbits::{enumerate_box_sl2, CosetTable, IntMat2};
use crate::quadrature::{integrate, Tolerance};
use crate::spectral::smooth_step;
use crate::weights::{omega_weight, w_closed_form, AlphaWeight, BaseWeight, PeriodicWeight, INDEX_LIMIT};

/// Default cap on `(a, c, d)` trial triples.
pub const ITERATION_CAP: u64 = 1_000_000_000;
/// Largest sieve length.
pub const SIEVE_LIMIT: u64 = 100_000_000;
/// Kim–Sarnak exponent.
pub const THETA: f64 = 7.0 / 64.0;
pub const DEFAULT_RATIO_CEILING: f64 = 10.0;
/// Taper width, in `log2` units, of the [`Profile::Partition`] pieces.
pub const PARTITION_TAPER: f64 = 0.1;
/// A peak-one bump on `[R, 2R]` has `|f^(J)| <= (delta R)^-J` for `J <= 7` at this `delta`;
/// the seventh derivative is the binding one.
pub const BUMP_DELTA: f64 = 0.015;
/// Derivative order controlled by the window class.
pub const WINDOW_ORDER: usize = 7;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn zeta2() -> f64 {
    PI * PI / 6.0
}

/// Shape of one axis of a window, in terms of `|x|` and the axis range `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Indicator of `[R, 2R]`.
    Sharp,
    /// `exp(1 - 1/(1 - u^2))` with `u = (2x - 3R)/R`.
    Bump,
    /// `T(t) - T(t - 1)` with `t = log2(x/R)` and `T` a smooth step of width
    /// [`PARTITION_TAPER`]; the pieces at `R 2^j` sum to 1.
    Partition,
}

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// Derivatives `b^(j)(u)`, `j = 0..=order`, of `b(u) = exp(1 - 1/(1 - u^2))` by Taylor jets.
pub fn bump_derivatives(u: f64, order: usize) -> Vec<f64> {
    if u.abs() >= 1.0 {
        return vec![0.0; order + 1];
    }
    // 1/(1 - u^2) = (1/(1 - u) + 1/(1 + u)) / 2, expanded at u.
    let g: Vec<f64> = (0..=order)
        .map(|n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * ((1.0 - u).powi(-(n as i32 + 1)) + sign * (1.0 + u).powi(-(n as i32 + 1)))
        })
        .collect();
    let mut h: Vec<f64> = g.iter().map(|x| -x).collect();
    h[0] += 1.0;
    let mut e = vec![h[0].exp()];
    for n in 1..=order {
        let s: f64 = (1..=n).map(|k| k as f64 * h[k] * e[n - k]).sum();
        e.push(s / n as f64);
    }
    let mut factorial = 1.0;
    e.iter()
        .enumerate()
        .map(|(j, c)| {
            if j > 0 {
                factorial *= j as f64;
            }
            c * factorial
        })
        .collect()
}

impl Profile {
    /// Closed interval outside of which the profile vanishes.
    pub fn support(self, range: f64) -> (f64, f64) {
        match self {
            Profile::Sharp | Profile::Bump => (range, 2.0 * range),
            Profile::Partition => (
                range * (-PARTITION_TAPER / 2.0).exp2(),
                2.0 * range * (PARTITION_TAPER / 2.0).exp2(),
            ),
        }
    }

    pub fn value(self, x: f64, range: f64) -> f64 {
        let x = x.abs();
        match self {
            Profile::Sharp => {
                if x >= range && x <= 2.0 * range {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Bump => bump((2.0 * x - 3.0 * range) / range),
            Profile::Partition => {
                if x <= 0.0 {
                    return 0.0;
                }
                let t = (x / range).log2();
                let step = |s: f64| smooth_step(s / PARTITION_TAPER + 0.5);
                step(t) - step(t - 1.0)
            }
        }
    }

    /// `(int p, int p(x)/x)` over the positive half-line.
    fn moments(self, range: f64) -> Result<(f64, f64)> {
        if self == Profile::Sharp {
            return Ok((range, 2f64.ln()));
        }
        let (lo, hi) = self.support(range);
        let tol = Tolerance::new(1e-14 * range, 1e-12, 200_000);
        let plain = integrate(|x| self.value(x, range), lo, hi, tol).into_result()?;
        let tol = Tolerance::new(1e-14, 1e-12, 200_000);
        let over_x = integrate(|x| self.value(x, range) / x, lo, hi, tol).into_result()?;
        Ok((plain.value, over_x.value))
    }
}

/// Whether the window also covers negative `a`, `c`, `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Signs {
    Positive,
    Both,
}

/// Product window `f(a, c, d) = p_A(|a|) p_C(|c|) p_D(|d|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothWindow {
    pub a: f64,
    pub c: f64,
    pub d: f64,
    pub profiles: [Profile; 3],
    pub delta: f64,
    pub signs: Signs,
    /// Optional sharp constraint `b_range.0 <= b <= b_range.1` on the solved entry.
    pub b_range: Option<(f64, f64)>,
}

/// Outcome of the derivative spot check on a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub points: usize,
    /// Largest `|d^J f| prod (delta R_i)^{J_i}` seen; at most 1 for a window in its class.
    pub worst_ratio: f64,
}

impl SmoothWindow {
    fn build(a: f64, c: f64, d: f64, profile: Profile, delta: f64) -> Result<Self> {
        for (name, v) in [("A", a), ("C", c), ("D", d)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("range {name} = {v} must be positive")));
            }
        }
        Ok(SmoothWindow {
            a,
            c,
            d,
            profiles: [profile; 3],
            delta,
            signs: Signs::Positive,
            b_range: None,
        })
    }

    /// Indicator of `[A, 2A] x [C, 2C] x [D, 2D]`; `delta` is not meaningful and is 0.
    pub fn sharp(a: f64, c: f64, d: f64) -> Result<Self> {
        Self::build(a, c, d, Profile::Sharp, 0.0)
    }

    pub fn bump(a: f64, c: f64, d: f64) -> Result<Self> {
        Self::build(a, c, d, Profile::Bump, BUMP_DELTA)
    }

    pub fn partition(a: f64, c: f64, d: f64) -> Result<Self> {
        Self::build(a, c, d, Profile::Partition, 0.0)
    }

    pub fn with_profiles(mut self, profiles: [Profile; 3]) -> Self {
        self.profiles = profiles;
        self
    }

    pub fn with_signs(mut self, signs: Signs) -> Self {
        self.signs = signs;
        self
    }

    pub fn with_b_range(mut self, lo: f64, hi: f64) -> Self {
        self.b_range = Some((lo, hi));
        self
    }

    pub fn ranges(&self) -> [f64; 3] {
        [self.a, self.c, self.d]
    }

    pub fn value(&self, a: f64, c: f64, d: f64) -> f64 {
        if self.signs == Signs::Positive && (a < 0.0 || c < 0.0 || d < 0.0) {
            return 0.0;
        }
        let [pa, pc, pd] = self.profiles;
        pa.value(a, self.a) * pc.value(c, self.c) * pd.value(d, self.d)
    }

    /// Integer points of one axis (0 = a, 1 = c, 2 = d) with nonzero profile value.
    pub fn axis_points(&self, axis: usize) -> Vec<(i64, f64)> {
        let range = self.ranges()[axis];
        let profile = self.profiles[axis];
        let (lo, hi) = profile.support(range);
        let mut out = Vec::new();
        for x in (lo.ceil() as i64).max(1)..=(hi.floor() as i64) {
            let v = profile.value(x as f64, range);
            if v != 0.0 {
                out.push((x, v));
            }
        }
        if self.signs == Signs::Both {
            let negatives: Vec<_> = out.iter().rev().map(|&(x, v)| (-x, v)).collect();
            out = negatives.into_iter().chain(out).collect();
        }
        out
    }

    fn admits_b(&self, b: i64) -> bool {
        self.b_range.is_none_or(|(lo, hi)| b as f64 >= lo && b as f64 <= hi)
    }

    /// `int f(a, c, d) da dc dd / |c|`.
    pub fn main_integral(&self) -> Result<f64> {
        if self.b_range.is_some() {
            return Err(invalid("the main term needs a window in (a, c, d) only"));
        }
        let [pa, pc, pd] = self.profiles;
        let (ia, _) = pa.moments(self.a)?;
        let (_, ic) = pc.moments(self.c)?;
        let (id, _) = pd.moments(self.d)?;
        let signs = if self.signs == Signs::Both { 8.0 } else { 1.0 };
        Ok(signs * ia * ic * id)
    }

    /// Checks `|d_a^J1 d_c^J2 d_d^J3 f| <= prod (delta R_i)^{-J_i}` for `J1 + J2 + J3 <= 7`
    /// at `points` deterministic points per axis of each bump axis.
    pub fn derivative_check(&self, points: usize) -> Result<DerivativeCheck> {
        if self.profiles.iter().any(|p| *p != Profile::Bump) {
            return Err(invalid("derivative bounds are only defined for bump profiles"));
        }
        let jets: Vec<Vec<Vec<f64>>> = self
            .ranges()
            .iter()
            .map(|&r| {
                (0..points)
                    .map(|i| {
                        let u = -1.0 + 2.0 * (i as f64 + 0.5) / points as f64;
                        bump_derivatives(u, WINDOW_ORDER)
                            .into_iter()
                            .enumerate()
                            .map(|(j, v)| v.abs() * (2.0 / r).powi(j as i32) * (self.delta * r).powi(j as i32))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut worst: f64 = 0.0;
        for j1 in 0..=WINDOW_ORDER {
            for j2 in 0..=WINDOW_ORDER - j1 {
                for j3 in 0..=WINDOW_ORDER - j1 - j2 {
                    let best = |axis: usize, j: usize| jets[axis].iter().map(|jet| jet[j]).fold(0.0, f64::max);
                    worst = worst.max(best(0, j1) * best(1, j2) * best(2, j3));
                }
            }
        }
        Ok(DerivativeCheck {
            points,
            worst_ratio: worst,
        })
    }
}

/// Weight `alpha` on integer matrices of determinant `h`.
#[derive(Debug, Clone)]
pub enum CountWeight {
    Zero,
    Unit,
    /// `1_{q1 | b, q2 | d}`.
    Divisibility { q1: u64, q2: u64 },
    /// `1_{bc = r mod q}`.
    ProductCongruence { q: u64, r: i64 },
    /// `t(bc)` for a weight `t` on `Z/qZ`.
    Periodic(PeriodicWeight),
    Alpha(AlphaWeight),
}

impl CountWeight {
    /// Moduli of the group `Gamma_2(q1, q2)` leaving the weight invariant.
    pub fn moduli(&self) -> (u64, u64) {
        match self {
            CountWeight::Zero | CountWeight::Unit => (1, 1),
            CountWeight::Divisibility { q1, q2 } => (*q1, *q2),
            CountWeight::ProductCongruence { q, .. } => (*q, *q),
            CountWeight::Periodic(t) => (t.modulus(), t.modulus()),
            CountWeight::Alpha(alpha) => (alpha.q1, alpha.q2),
        }
    }

    pub fn character_twist_active(&self) -> bool {
        match self {
            CountWeight::Alpha(alpha) => [&alpha.chi1, &alpha.psi1, &alpha.chi2, &alpha.psi2]
                .iter()
                .any(|ch| ch.modulus() > 1),
            _ => false,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CountWeight::Zero => true,
            CountWeight::Periodic(t) => t.is_zero(),
            _ => false,
        }
    }

    pub fn value(&self, g: &IntMat2) -> Result<Complex64> {
        let hit = |ok: bool| if ok { ONE } else { ZERO };
        Ok(match self {
            CountWeight::Zero => ZERO,
            CountWeight::Unit => ONE,
            CountWeight::Divisibility { q1, q2 } => hit(g.b % *q1 as i64 == 0 && g.d % *q2 as i64 == 0),
            CountWeight::ProductCongruence { q, r } => {
                let q = *q as i64;
                hit((g.b * g.c - r).rem_euclid(q) == 0)
            }
            CountWeight::Periodic(t) => t.at_complex(g.b * g.c),
            CountWeight::Alpha(alpha) => alpha.value(g)?,
        })
    }

    /// The same weight as an [`AlphaWeight`] on SL2(Z).
    pub fn to_alpha(&self) -> Result<AlphaWeight> {
        let (q1, q2) = self.moduli();
        let me = self.clone();
        match self {
            CountWeight::Alpha(alpha) => Ok(alpha.clone()),
            CountWeight::Unit => AlphaWeight::untwisted(1, 1, BaseWeight::One),
            _ => AlphaWeight::untwisted(
                q1,
                q2,
                BaseWeight::Function(std::sync::Arc::new(move |g: &IntMat2| me.value(g).unwrap_or(ZERO))),
            ),
        }
    }
}

/// `sum_{ad - bc = h} alpha(g) f(a, c, d)` with `Gamma = Gamma_2(q1, q2)` from the weight.
#[derive(Debug, Clone)]
pub struct CountSpec {
    pub weight: CountWeight,
    pub h: i64,
    pub window: SmoothWindow,
}

impl CountSpec {
    pub fn new(weight: CountWeight, h: i64, window: SmoothWindow) -> Result<Self> {
        let spec = CountSpec { weight, h, window };
        spec.validate()?;
        Ok(spec)
    }

    pub fn moduli(&self) -> (u64, u64) {
        self.weight.moduli()
    }

    pub fn validate(&self) -> Result<()> {
        if self.h < 1 {
            return Err(invalid(format!("determinant h = {} must be positive", self.h)));
        }
        let (q1, q2) = self.moduli();
        if q1 == 0 || q2 == 0 {
            return Err(invalid("moduli must be positive"));
        }
        if self.weight.character_twist_active() && gcd(self.h, (q1 * q2) as i64) != 1 {
            return Err(invalid(format!("gcd(h, q1 q2) = gcd({}, {}) must be 1", self.h, q1 * q2)));
        }
        Ok(())
    }

    /// `(a, c, d)` trial triples of the brute-force loop.
    pub fn iterations(&self) -> u64 {
        (0..3).map(|axis| self.window.axis_points(axis).len() as u64).product()
    }
}

/// Exact loop over `a`, `d` with `c` innermost and `b = (ad - h)/c` solved.
pub fn det_eq_bruteforce(spec: &CountSpec, max_iterations: u64) -> Result<Complex64> {
    spec.validate()?;
    let needed = spec.iterations();
    if needed > max_iterations {
        return Err(Error::ResourceLimit {
            what: "brute-force trial triples",
            needed,
            limit: max_iterations,
        });
    }
    if spec.weight.is_zero() {
        return Ok(ZERO);
    }
    let a_points = spec.window.axis_points(0);
    let c_points = spec.window.axis_points(1);
    let d_points = spec.window.axis_points(2);
    let shards: Vec<Result<Complex64>> = a_points
        .par_iter()
        .map(|&(a, fa)| {
            let mut acc = ZERO;
            for &(d, fd) in &d_points {
                let n = a * d - spec.h;
                for &(c, fc) in &c_points {
                    if n % c != 0 {
                        continue;
                    }
                    let b = n / c;
                    if !spec.window.admits_b(b) {
                        continue;
                    }
                    let w = spec.weight.value(&IntMat2::new(a, b, c, d))?;
                    if w != ZERO {
                        acc += w * (fa * fc * fd);
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    shards.into_iter().try_fold(ZERO, |total, shard| Ok(total + shard?))
}

/// Representatives `(a, b; 0, d)`, `ad = h`, `0 <= b < d`, of `SL2(Z) \ M_h`.
pub fn determinant_classes(h: u64) -> Vec<IntMat2> {
    let mut out = Vec::new();
    for d in divisors(h) {
        for b in 0..d {
            out.push(IntMat2::new((h / d) as i64, b as i64, 0, d as i64));
        }
    }
    out
}

fn coset_table(weight: &CountWeight) -> Result<std::sync::Arc<CosetTable>> {
    match weight {
        CountWeight::Alpha(alpha) => alpha.cosets(),
        _ => {
            let (q1, q2) = weight.moduli();
            Ok(std::sync::Arc::new(CosetTable::with_limit(q1, q2, INDEX_LIMIT)?))
        }
    }
}

/// `sum_{tau in Gamma \ M_h} alpha(tau)`.
pub fn orbit_sum(weight: &CountWeight, h: u64) -> Result<Complex64> {
    if weight.is_zero() {
        return Ok(ZERO);
    }
    let table = coset_table(weight)?;
    let mut total = ZERO;
    for sigma in determinant_classes(h) {
        for lift in &table.lifts {
            total += weight.value(&(*lift * sigma))?;
        }
    }
    Ok(total)
}

/// Main term `orbit_sum / (zeta(2) [SL2(Z) : Gamma] h) * int f da dc dd / |c|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MainTerm {
    pub orbit_sum: Complex64,
    pub index: usize,
    pub integral: f64,
    pub value: Complex64,
}

pub fn main_term_eval(spec: &CountSpec) -> Result<MainTerm> {
    spec.validate()?;
    let integral = spec.window.main_integral()?;
    let index = coset_table(&spec.weight)?.len();
    let orbit_sum = orbit_sum(&spec.weight, spec.h as u64)?;
    let zeta = if fault::active(Fault::MainTermDropZeta) { 1.0 } else { zeta2() };
    let value = orbit_sum * integral / (zeta * index as f64 * spec.h as f64);
    Ok(MainTerm {
        orbit_sum,
        index,
        integral,
        value,
    })
}

/// `K = sum_{g in SL2(Z), |a| + |b| L + |c| / L + |d| <= 6} |sum_tau alpha(tau) conj(alpha(tau g))|`
/// with `L = C/D` and `M = SL2(Z)`.
pub fn k_term_eval(weight: &CountWeight, l: f64) -> Result<f64> {
    if weight.is_zero() {
        return Ok(0.0);
    }
    let alpha = weight.to_alpha()?;
    let mut total = 0.0;
    for sigma in enumerate_box_sl2(l, 6.0)? {
        total += w_closed_form(&sigma, &alpha)?.norm();
    }
    Ok(total)
}

fn check_positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(invalid(format!("{name} = {v} must be positive")));
        }
    }
    Ok(())
}

/// `R = (1 + (AD)^{2 theta} (C/(A q2))^{2 theta}) (1 + (C/(A q2))^{1 - 2 theta}) + A/(C q1)`.
pub fn r_term_eval(a: f64, c: f64, d: f64, q1: u64, q2: u64, theta: f64) -> Result<f64> {
    check_positive(&[("A", a), ("C", c), ("D", d), ("q1", q1 as f64), ("q2", q2 as f64)])?;
    if !(0.0..0.5).contains(&theta) {
        return Err(invalid(format!("theta = {theta} must lie in [0, 1/2)")));
    }
    let skew = c / (a * q2 as f64);
    Ok((1.0 + (a * d).powf(2.0 * theta) * skew.powf(2.0 * theta)) * (1.0 + skew.powf(1.0 - 2.0 * theta))
        + a / (c * q1 as f64))
}

/// Inputs of the refined terms `R_0`, `R_1`, `R_2` for `h ~ H`, `k ~ K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RTermInputs {
    pub a: f64,
    pub c: f64,
    pub d: f64,
    pub q1: u64,
    pub q2: u64,
    pub h_size: f64,
    pub k_size: f64,
    /// `||beta xi||_1 / ||beta xi||_2`.
    pub beta_ratio: f64,
    pub conductor: u64,
    pub theta: f64,
    pub vartheta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RTermExtended {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    /// `R_0 + min(R_1, R_2)`.
    pub combined: f64,
}

pub fn r_term_extended(p: &RTermInputs) -> Result<RTermExtended> {
    check_positive(&[
        ("A", p.a),
        ("C", p.c),
        ("D", p.d),
        ("q1", p.q1 as f64),
        ("q2", p.q2 as f64),
        ("H", p.h_size),
        ("K", p.k_size),
        ("beta ratio", p.beta_ratio),
        ("conductor", p.conductor as f64),
    ])?;
    let (q1, q2) = (p.q1 as f64, p.q2 as f64);
    let cond = (p.conductor as f64).powf(0.25);
    let r0 = p.beta_ratio * (p.a / (q1 * p.c)).sqrt();
    let r1 = p.beta_ratio
        * p.h_size.powf(p.vartheta)
        * (1.0 + (p.c * p.d / (p.h_size * p.k_size * q2)).powf(p.theta))
        * (1.0 + cond * (p.c / (p.a * q2)).powf(0.5 - p.theta));
    let r2 = (1.0 + (p.c * p.d / (p.k_size * q2)).powf(p.theta))
        * (1.0 + cond * (p.h_size * p.c / (p.a * q2)).powf(0.5 - p.theta));
    Ok(RTermExtended {
        r0,
        r1,
        r2,
        combined: r0 + r1.min(r2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub ad: f64,
    pub k_value: f64,
    pub r_value: f64,
    pub theta: f64,
    pub budget: f64,
}

impl ErrorBudget {
    pub fn new(ad: f64, k_value: f64, r_value: f64, theta: f64) -> Result<Self> {
        if [ad, k_value, r_value].iter().any(|v| !(*v >= 0.0)) {
            return Err(invalid("budget factors must be non-negative"));
        }
        Ok(ErrorBudget {
            ad,
            k_value,
            r_value,
            theta,
            budget: (ad * k_value * r_value).sqrt(),
        })
    }
}

/// Brute force against main term, measured in units of the budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetEqComparison {
    pub brute: Complex64,
    pub main: MainTerm,
    pub budget: ErrorBudget,
    /// `L = C/D` used for `K`.
    pub l: f64,
    pub deviation: f64,
    pub ratio: f64,
    /// `|S/M - 1|`, when `M` is nonzero.
    pub relative: Option<f64>,
    pub ceiling: f64,
    pub pass: bool,
}

/// Runs the brute force, the main term and the budget for `M = SL2(Z)`.
pub fn error_budget(spec: &CountSpec, ceiling: f64, max_iterations: u64) -> Result<DetEqComparison> {
    if spec.h != 1 {
        return Err(invalid("the K term is implemented for M = SL2(Z), i.e. h = 1"));
    }
    let brute = det_eq_bruteforce(spec, max_iterations)?;
    let main = main_term_eval(spec)?;
    let w = &spec.window;
    let l = w.c / w.d;
    let k_value = k_term_eval(&spec.weight, l)?;
    let (q1, q2) = spec.moduli();
    let r_value = r_term_eval(w.a, w.c, w.d, q1, q2, THETA)?;
    let budget = ErrorBudget::new(w.a * w.d, k_value, r_value, THETA)?;
    let deviation = (brute - main.value).norm();
    let ratio = if budget.budget > 0.0 {
        deviation / budget.budget
    } else if deviation == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let relative = (main.value.norm() > 0.0).then(|| (brute / main.value - 1.0).norm());
    Ok(DetEqComparison {
        brute,
        main,
        budget,
        l,
        deviation,
        ratio,
        relative,
        ceiling,
        pass: ratio <= ceiling,
    })
}

/// `d(n)` for `0 <= n <= x` by marking multiples; `d(0)` is stored as 0.
pub fn divisor_sieve(x: u64) -> Result<Vec<u16>> {
    if x > SIEVE_LIMIT {
        return Err(Error::ResourceLimit {
            what: "divisor sieve length",
            needed: x,
            limit: SIEVE_LIMIT,
        });
    }
    let n = x as usize;
    let mut d = vec![0u16; n + 1];
    for i in 1..=n {
        for j in (i..=n).step_by(i) {
            d[j] += 1;
        }
    }
    Ok(d)
}

/// Cutoff `G(n/X)` of a divisor correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cutoff {
    /// `1 <= n <= X`.
    Sharp,
    /// `G` with the given profile on `[1, 2]`.
    Smooth(Profile),
}

impl Cutoff {
    fn range(self, x: u64) -> (u64, u64) {
        match self {
            Cutoff::Sharp => (1, x),
            Cutoff::Smooth(p) => {
                let (lo, hi) = p.support(x as f64);
                ((lo.ceil() as u64).max(1), hi.floor() as u64)
            }
        }
    }
}

/// `sum_n G(n/X) d(n) d(n + h) t(n)`.
pub fn divisor_correlation(x: u64, h: u64, t: &PeriodicWeight, cutoff: Cutoff) -> Result<Complex64> {
    if h == 0 || h > x {
        return Err(invalid(format!("shift h = {h} must lie in [1, X = {x}]")));
    }
    let (lo, hi) = cutoff.range(x);
    let d = divisor_sieve(hi + h)?;
    let q = t.modulus();
    let table: Vec<Complex64> = (0..q as i64).map(|r| t.at_complex(r)).collect();
    let mut total = ZERO;
    for n in lo..=hi {
        let g = match cutoff {
            Cutoff::Sharp => 1.0,
            Cutoff::Smooth(p) => p.value(n as f64, x as f64),
        };
        let pair = d[n as usize] as f64 * d[(n + h) as usize] as f64;
        total += table[(n % q) as usize] * (g * pair);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApRow {
    pub r: u64,
    /// `sum_{n <= X, n = r mod q} d(n) d(n + h)`.
    pub weighted_count: u64,
    pub ratio: f64,
    pub omega: f64,
    pub omega_exact: String,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApDensityReport {
    pub x: u64,
    pub h: u64,
    pub q: u64,
    pub total: u64,
    pub rows: Vec<ApRow>,
    pub max_deviation: f64,
}

/// Share of `sum_{n <= X} d(n) d(n + h)` in each class mod `q` against `omega(r, h; q)`.
pub fn ap_density_report(x: u64, h: u64, q: u64) -> Result<ApDensityReport> {
    if q == 0 || !is_squarefree(q) {
        return Err(Error::UnsupportedModulus(q));
    }
    if h == 0 || h > x {
        return Err(invalid(format!("shift h = {h} must lie in [1, X = {x}]")));
    }
    if gcd(h as i64, q as i64) != 1 {
        return Err(invalid(format!("gcd(h, q) = gcd({h}, {q}) must be 1")));
    }
    let d = divisor_sieve(x + h)?;
    let mut counts = vec![0u64; q as usize];
    for n in 1..=x {
        counts[(n % q) as usize] += d[n as usize] as u64 * d[(n + h) as usize] as u64;
    }
    let total: u64 = counts.iter().sum();
    let mut rows = Vec::with_capacity(q as usize);
    for (r, &count) in counts.iter().enumerate() {
        let omega: Rational64 = omega_weight(r as i64, h as i64, q)?;
        let omega_f = omega.to_f64().unwrap_or(f64::NAN);
        let ratio = count as f64 / total as f64;
        rows.push(ApRow {
            r: r as u64,
            weighted_count: count,
            ratio,
            omega: omega_f,
            omega_exact: omega.to_string(),
            deviation: (ratio - omega_f).abs(),
        });
    }
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(ApDensityReport {
        x,
        h,
        q,
        total,
        rows,
        max_deviation,
    })
}

/// Largest moduli for which the fixed-progression and averaged error terms beat the main term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NontrivialRanges {
    pub theta: f64,
    /// `(1 - 2 theta)/(3 - 2 theta)`.
    pub fixed_exponent: f64,
    pub fixed_max_q: f64,
    /// `(1 - 2 theta)/(2 - 2 theta)`.
    pub average_exponent: f64,
    pub average_max_q: f64,
}

/// Ranges for `sum_{n <= X, n = r (q)} d(n) d(n + h)` with the given `theta`.
///
/// Small shifts `h <= X/q` use `q <= X^{(1-2theta)/(3-2theta)}`; larger shifts use
/// `q <= X^{1/3} h^{-2theta/3}`. The averaged versions use `(1-2theta)/(2-2theta)`
/// and `X^{1/2} h^{-theta}`.
pub fn nontrivial_ranges(x: f64, h: f64, theta: f64) -> Result<NontrivialRanges> {
    check_positive(&[("X", x), ("h", h)])?;
    let pick = |small: f64, large: f64| {
        let small_regime = small.min(x / h);
        if large > x / h {
            small_regime.max(large)
        } else {
            small_regime
        }
    };
    let fixed_exponent = (1.0 - 2.0 * theta) / (3.0 - 2.0 * theta);
    let average_exponent = (1.0 - 2.0 * theta) / (2.0 - 2.0 * theta);
    Ok(NontrivialRanges {
        theta,
        fixed_exponent,
        fixed_max_q: pick(x.powf(fixed_exponent), x.powf(1.0 / 3.0) * h.powf(-2.0 * theta / 3.0)),
        average_exponent,
        average_max_q: pick(x.powf(average_exponent), x.sqrt() * h.powf(-theta)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_examples() {
        let d = divisor_sieve(20).unwrap();
        assert_eq!(d[1], 1);
        assert_eq!(d[12], 6);
        assert!(divisor_sieve(SIEVE_LIMIT + 1).is_err());
    }

    #[test]
    fn correlation_example() {
        let one = PeriodicWeight::constant(1, 1);
        assert_eq!(divisor_correlation(10, 1, &one, Cutoff::Sharp).unwrap(), Complex64::new(74.0, 0.0));
        let zero = PeriodicWeight::constant(3, 0);
        assert_eq!(divisor_correlation(100, 1, &zero, Cutoff::Sharp).unwrap(), ZERO);
    }

    #[test]
    fn bruteforce_unit_square() {
        let window = SmoothWindow::sharp(1.0, 1.0, 1.0).unwrap().with_b_range(1.0, 2.0);
        let spec = CountSpec::new(CountWeight::Unit, 1, window).unwrap();
        assert_eq!(det_eq_bruteforce(&spec, ITERATION_CAP).unwrap(), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn iteration_cap_is_enforced() {
        let spec = CountSpec::new(CountWeight::Unit, 1, SmoothWindow::sharp(100.0, 100.0, 100.0).unwrap()).unwrap();
        assert!(matches!(det_eq_bruteforce(&spec, 1000), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn sharp_main_term_closed_form() {
        let (a, c, d) = (30.0, 7.0, 11.0);
        let spec = CountSpec::new(CountWeight::Unit, 1, SmoothWindow::sharp(a, c, d).unwrap()).unwrap();
        let m = main_term_eval(&spec).unwrap();
        assert_eq!(m.index, 1);
        assert!((m.value.re - a * d * 2f64.ln() / zeta2()).abs() < 1e-9);
        let zero = CountSpec::new(CountWeight::Zero, 1, SmoothWindow::sharp(a, c, d).unwrap()).unwrap();
        assert_eq!(main_term_eval(&zero).unwrap().value, ZERO);
    }

    #[test]
    fn r_term_examples() {
        assert!((r_term_eval(1.0, 1.0, 1.0, 1, 1, THETA).unwrap() - 5.0).abs() < 1e-12);
        let simplified = r_term_eval(50.0, 20.0, 3.0, 3, 7, 0.0).unwrap();
        assert!((simplified - (2.0 * (1.0 + 20.0 / 350.0) + 50.0 / 60.0)).abs() < 1e-12);
        let far = r_term_eval(50.0, 20.0, 3.0, 3, 1 << 62, THETA).unwrap();
        assert!((far - (1.0 + 50.0 / 60.0)).abs() < 1e-3);
    }

    #[test]
    fn bump_jets_match_differences() {
        for u in [-0.7, -0.2, 0.0, 0.45, 0.9] {
            let jet = bump_derivatives(u, 2);
            let h = 1e-5;
            let first = (bump(u + h) - bump(u - h)) / (2.0 * h);
            let second = (bump(u + h) - 2.0 * bump(u) + bump(u - h)) / (h * h);
            assert!((jet[0] - bump(u)).abs() < 1e-15);
            assert!((jet[1] - first).abs() < 1e-6 * (1.0 + first.abs()));
            assert!((jet[2] - second).abs() < 1e-3 * (1.0 + second.abs()));
        }
    }

    #[test]
    fn classes_of_determinant() {
        assert_eq!(determinant_classes(1), vec![IntMat2::IDENTITY]);
        assert_eq!(determinant_classes(6).len() as u64, crate::arith::sigma1(6));
    }

    #[test]
    fn nontrivial_exponents() {
        let r = nontrivial_ranges(1e12, 1.0, THETA).unwrap();
        assert!((r.fixed_exponent - 0.2812).abs() < 1e-3);
        assert!((r.average_exponent - 0.4386).abs() < 1e-3);
        let conditional = nontrivial_ranges(1e12, 1.0, 0.0).unwrap();
        assert!((conditional.fixed_max_q - 1e4).abs() < 1e-6);
    }
}
