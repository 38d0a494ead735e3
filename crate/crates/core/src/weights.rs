//! Weights on integer matrices and residue classes: character-twisted
//! automorphic weights, the correlation sums `w`, local densities and the
//! balanced decomposition of periodic weights.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num::bigint::BigInt;
use num::complex::{Complex, Complex64};
use num::rational::{BigRational, Rational64};
use num::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::arith::{divisors, factorize, gcd, is_squarefree, mod_inv, modp};
use crate::characters::{DirichletChar, Phase};
use crate::error::{invalid, Error, Result};
use crate::fault::{self, Fault};
use crate::orbits::{project_matrix, CosetTable, IntMat2, ProjPair, ProjPoint};

/// Coset-table size above which `w` sums refuse to run.
pub const INDEX_LIMIT: u64 = 100_000;

pub type BaseFn = Arc<dyn Fn(&IntMat2) -> Complex64 + Send + Sync>;

/// The `Gamma_2(q1, q2)`-invariant factor of an [`AlphaWeight`].
#[derive(Clone)]
pub enum BaseWeight {
    One,
    /// One value per coset label of the weight's own coset table; defined on SL2(Z) only.
    Table(Vec<Complex64>),
    /// Arbitrary function of the matrix, assumed invariant by the caller.
    Function(BaseFn),
}

impl fmt::Debug for BaseWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseWeight::One => write!(f, "One"),
            BaseWeight::Table(v) => write!(f, "Table({} entries)", v.len()),
            BaseWeight::Function(_) => write!(f, "Function"),
        }
    }
}

/// `alpha(g) = base(g) chi1(a) psi1(b) chi2(c) psi2(d)`.
#[derive(Clone, Debug)]
pub struct AlphaWeight {
    pub q1: u64,
    pub q2: u64,
    pub chi1: DirichletChar,
    pub psi1: DirichletChar,
    pub chi2: DirichletChar,
    pub psi2: DirichletChar,
    pub base: BaseWeight,
    cosets: OnceLock<Arc<CosetTable>>,
}

/// Value of an [`AlphaWeight`] split into its base and its character phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaValue {
    pub base: Complex64,
    /// `None` when a character vanishes.
    pub phase: Option<Phase>,
}

impl AlphaValue {
    pub fn to_complex(self) -> Complex64 {
        self.phase.map_or(Complex64::new(0.0, 0.0), |p| self.base * p.to_complex())
    }
}

impl AlphaWeight {
    pub fn new(
        q1: u64,
        q2: u64,
        [chi1, psi1, chi2, psi2]: [DirichletChar; 4],
        base: BaseWeight,
    ) -> Result<Self> {
        if q1 == 0 || q2 == 0 {
            return Err(invalid("moduli must be positive"));
        }
        for (name, ch, q) in [("chi1", &chi1, q1), ("psi1", &psi1, q1), ("chi2", &chi2, q2), ("psi2", &psi2, q2)] {
            if q % ch.modulus() != 0 {
                return Err(invalid(format!("{name} has modulus {} not dividing {q}", ch.modulus())));
            }
        }
        let weight = AlphaWeight {
            q1,
            q2,
            chi1,
            psi1,
            chi2,
            psi2,
            base,
            cosets: OnceLock::new(),
        };
        if let BaseWeight::Table(values) = &weight.base {
            if values.len() != weight.cosets()?.len() {
                return Err(invalid("base table length differs from the coset index"));
            }
        }
        Ok(weight)
    }

    /// Weight with trivial characters.
    pub fn untwisted(q1: u64, q2: u64, base: BaseWeight) -> Result<Self> {
        let one = DirichletChar::principal(1)?;
        Self::new(q1, q2, [one.clone(), one.clone(), one.clone(), one], base)
    }

    /// Pure character weight `chi1(a) psi1(b) chi2(c) psi2(d)`.
    pub fn characters(q1: u64, q2: u64, chars: [DirichletChar; 4]) -> Result<Self> {
        Self::new(q1, q2, chars, BaseWeight::One)
    }

    /// `1_{bc = r mod q}`, invariant under `Gamma_2(q, q)`.
    pub fn product_congruence(q: u64, r: i64) -> Result<Self> {
        let qi = q as i64;
        let rr = modp(r, qi);
        Self::untwisted(
            q,
            q,
            BaseWeight::Function(Arc::new(move |g: &IntMat2| {
                let bc = (modp(g.b, qi) * modp(g.c, qi)) % qi;
                Complex64::new(if bc == rr { 1.0 } else { 0.0 }, 0.0)
            })),
        )
    }

    pub fn cosets(&self) -> Result<Arc<CosetTable>> {
        if let Some(t) = self.cosets.get() {
            return Ok(t.clone());
        }
        let table = Arc::new(CosetTable::with_limit(self.q1, self.q2, INDEX_LIMIT)?);
        Ok(self.cosets.get_or_init(|| table).clone())
    }

    fn base_value(&self, g: &IntMat2) -> Result<Complex64> {
        match &self.base {
            BaseWeight::One => Ok(Complex64::new(1.0, 0.0)),
            BaseWeight::Function(f) => Ok(f(g)),
            BaseWeight::Table(values) => {
                if g.det() != 1 {
                    return Err(invalid("tabulated base weights are defined on SL2(Z) only"));
                }
                let table = self.cosets()?;
                Ok(values[table.locate(g)?])
            }
        }
    }

    /// Base weight at a coset label, through the canonical lift when needed.
    pub fn base_at_label(&self, label: &ProjPair) -> Result<Complex64> {
        match &self.base {
            BaseWeight::One => Ok(Complex64::new(1.0, 0.0)),
            BaseWeight::Table(values) => {
                let i = self.cosets()?.position(label).ok_or(Error::NotInImage {
                    q0: gcd(self.q1 as i64, self.q2 as i64) as u64,
                })?;
                Ok(values[i])
            }
            BaseWeight::Function(f) => Ok(f(&crate::orbits::lift_proj_pair(label)?)),
        }
    }

    fn phase(&self, g: &IntMat2) -> Option<Phase> {
        Some(self.chi1.value(g.a)? * self.psi1.value(g.b)? * self.chi2.value(g.c)? * self.psi2.value(g.d)?)
    }

    pub fn exact(&self, g: &IntMat2) -> Result<AlphaValue> {
        let phase = self.phase(g);
        let base = if phase.is_some() {
            self.base_value(g)?
        } else {
            Complex64::new(0.0, 0.0)
        };
        Ok(AlphaValue { base, phase })
    }

    pub fn value(&self, g: &IntMat2) -> Result<Complex64> {
        Ok(self.exact(g)?.to_complex())
    }

    /// `chi(n) = chi1 psi1 conj(chi2 psi2)(n)`.
    pub fn nebentypus(&self, n: i64) -> Option<Phase> {
        Some(self.chi1.value(n)? * self.psi1.value(n)? * self.chi2.value(n)?.conj() * self.psi2.value(n)?.conj())
    }

    /// `xi_n = chi2 psi2(n)`.
    pub fn determinant_twist(&self, n: i64) -> Option<Phase> {
        Some(self.chi2.value(n)? * self.psi2.value(n)?)
    }
}

/// Random element of `Gamma_2(q1, q2)`-type with determinant `det`.
pub fn random_gamma2(rng: &mut impl Rng, q1: u64, q2: u64, det: i64, bound: i64) -> IntMat2 {
    loop {
        let beta = q1 as i64 * rng.gen_range(-bound..=bound);
        let gamma = q2 as i64 * rng.gen_range(-bound..=bound);
        let target = det + beta * gamma;
        if target == 0 {
            continue;
        }
        let divs = divisors(target.unsigned_abs());
        let a = divs[rng.gen_range(0..divs.len())] as i64 * if rng.gen_bool(0.5) { 1 } else { -1 };
        let d = target / a;
        return IntMat2::new(a, beta, gamma, d);
    }
}

/// Random element of SL2(Z) as a word in the standard generators.
pub fn random_sl2z(rng: &mut impl Rng, length: usize) -> IntMat2 {
    let mut g = IntMat2::IDENTITY;
    for _ in 0..length {
        let step = match rng.gen_range(0..4) {
            0 => IntMat2::new(1, 1, 0, 1),
            1 => IntMat2::new(1, -1, 0, 1),
            2 => IntMat2::new(1, 0, 1, 1),
            _ => IntMat2::new(0, -1, 1, 0),
        };
        g = g * step;
    }
    g
}

/// Outcome of [`alpha_invariance_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport {
    pub samples: usize,
    pub mismatches: usize,
    pub max_deviation: f64,
}

/// Checks `alpha(gamma g) = chi(a_gamma) xi(det gamma) alpha(g)` on random
/// `gamma` with `q1 | b`, `q2 | c`. With `unit_det` only determinant one is used.
pub fn alpha_invariance_check(alpha: &AlphaWeight, samples: usize, seed: u64, unit_det: bool) -> Result<InvarianceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = (alpha.q1 * alpha.q2) as i64;
    let mut mismatches = 0;
    let mut max_deviation: f64 = 0.0;
    for _ in 0..samples {
        let det = if unit_det {
            1
        } else {
            loop {
                let n = rng.gen_range(1..=4 * q.max(2)) * if rng.gen_bool(0.5) { 1 } else { -1 };
                if gcd(n, q) == 1 {
                    break n;
                }
            }
        };
        let g = random_sl2z(&mut rng, 12);
        let gamma = random_gamma2(&mut rng, alpha.q1, alpha.q2, det, 3);
        let lhs = alpha.exact(&(gamma * g))?;
        let rhs = alpha.exact(&g)?;
        let twist = alpha
            .nebentypus(gamma.a)
            .zip(alpha.determinant_twist(gamma.det()))
            .map(|(x, y)| x * y)
            .expect("gamma entries are units");
        let expected_phase = rhs.phase.map(|p| p * twist);
        let exact_match = match (lhs.phase, expected_phase) {
            (None, None) => true,
            (Some(x), Some(y)) => x == y && lhs.base == rhs.base,
            _ => false,
        };
        if !exact_match {
            mismatches += 1;
        }
        let expected = expected_phase.map_or(Complex64::new(0.0, 0.0), |p| rhs.base * p.to_complex());
        max_deviation = max_deviation.max((lhs.to_complex() - expected).norm());
    }
    Ok(InvarianceReport {
        samples,
        mismatches,
        max_deviation,
    })
}

/// `w(sigma, sigma1, sigma2) = sum_tau alpha(tau sigma sigma1) conj(alpha(tau sigma2))`.
pub fn w_oracle(sigma: &IntMat2, sigma1: &IntMat2, sigma2: &IntMat2, alpha: &AlphaWeight) -> Result<Complex64> {
    let table = alpha.cosets()?;
    let left = *sigma * *sigma1;
    let mut total = Complex64::new(0.0, 0.0);
    for tau in &table.lifts {
        let x = alpha.value(&(*tau * left))?;
        if x == Complex64::new(0.0, 0.0) {
            continue;
        }
        total += x * alpha.value(&(*tau * *sigma2))?.conj();
    }
    Ok(total)
}

fn char_ratio(ch: &DirichletChar, moved: i64, orig: i64) -> Option<Phase> {
    Some(ch.value(moved)? * ch.value(orig)?.conj())
}

/// `w(sigma, I, I)` through the projective-line parametrisation of the cosets.
pub fn w_closed_form(sigma: &IntMat2, alpha: &AlphaWeight) -> Result<Complex64> {
    if sigma.det() != 1 {
        return Err(invalid("closed form needs sigma in SL2(Z)"));
    }
    let table = alpha.cosets()?;
    let IntMat2 { a, b, c, d, .. } = *sigma;
    let mut total = Complex64::new(0.0, 0.0);
    for label in &table.labels {
        let (a2, b2) = (label.first.x, label.first.y);
        let (c2, d2) = (label.second.x, label.second.y);
        let top = (a * a2 + c * b2, b * a2 + d * b2);
        let bottom = (a * c2 + c * d2, b * c2 + d * d2);
        let phase = char_ratio(&alpha.chi1, top.0, a2)
            .zip(char_ratio(&alpha.psi1, top.1, b2))
            .zip(char_ratio(&alpha.chi2, bottom.0, c2))
            .zip(char_ratio(&alpha.psi2, bottom.1, d2))
            .map(|(((x, y), z), w)| x * y * z * w);
        let Some(phase) = phase else { continue };
        let moved = ProjPair {
            first: ProjPoint::new(top.0, top.1, alpha.q1)?,
            second: ProjPoint::new(bottom.0, bottom.1, alpha.q2)?,
        };
        let base = alpha.base_at_label(&moved)? * alpha.base_at_label(label)?.conj();
        total += base * phase.to_complex();
    }
    Ok(total)
}

/// `sum_tau |base(tau)|^2`, the trivial bound for `|w(sigma, I, I)|`.
pub fn base_mass(alpha: &AlphaWeight) -> Result<f64> {
    let table = alpha.cosets()?;
    table
        .labels
        .iter()
        .map(|l| alpha.base_at_label(l).map(|v| v.norm_sqr()))
        .sum()
}

/// Which row of `sigma` carries the summation variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMode {
    /// `sigma = (+-1, b; 0, +-1)`, governed by `psi1, psi2`.
    Upper,
    /// `sigma = (+-1, 0; c, +-1)`, governed by `chi1, chi2`.
    LowerRow,
}

/// Reference right side `B Q1 Q2 prod 1/cond(.;p) prod 1/max_j cond(.;p)` of the
/// character-sum bound, with `epsilon = 0` and implied constant 1.
pub fn char_sum_bound_rhs(range: u64, alpha: &AlphaWeight, mode: SumMode) -> f64 {
    let (q1, q2) = (alpha.q1, alpha.q2);
    let (first, second) = match mode {
        SumMode::Upper => (&alpha.psi1, &alpha.psi2),
        SumMode::LowerRow => (&alpha.chi1, &alpha.chi2),
    };
    let q0 = gcd(q1 as i64, q2 as i64) as u64;
    let mut value = range as f64 * (q1 * q2) as f64;
    for (p, _) in factorize(q1) {
        if !q0.is_multiple_of(p) {
            value /= first.local_conductor(p) as f64;
        }
    }
    for (p, _) in factorize(q2) {
        if !q0.is_multiple_of(p) {
            value /= second.local_conductor(p) as f64;
        }
    }
    for (p, _) in factorize(q0) {
        value /= first.local_conductor(p).max(second.local_conductor(p)) as f64;
    }
    value
}

/// `sum_{0 < |b| <= range} sum_{signs} |w(sigma)|` for the matrices of `mode`.
pub fn char_sum_lhs(range: u64, alpha: &AlphaWeight, mode: SumMode) -> Result<f64> {
    let mut total = 0.0;
    for m in 1..=range as i64 {
        for v in [m, -m] {
            for s in [1, -1] {
                let sigma = match mode {
                    SumMode::Upper => IntMat2::new(s, v, 0, s),
                    SumMode::LowerRow => IntMat2::new(s, 0, v, s),
                };
                total += w_closed_form(&sigma, alpha)?.norm();
            }
        }
    }
    Ok(total)
}

/// Local density `omega(r, h; q)` of shifted divisor correlations.
pub fn omega_weight(r: i64, h: i64, q: u64) -> Result<Rational64> {
    if q == 0 {
        return Err(invalid("modulus must be positive"));
    }
    if !is_squarefree(q) {
        return Err(Error::UnsupportedModulus(q));
    }
    if gcd(h, q as i64) != 1 {
        return Err(invalid(format!("gcd({h}, {q}) > 1")));
    }
    let drop_inverse = fault::active(Fault::OmegaDropInverse);
    Ok(factorize(q).iter().fold(Rational64::one(), |acc, &(p, _)| {
        let p = p as i64;
        let numer = if modp(r * (r + h), p) == 0 { 2 * p - 1 } else { p - 1 };
        let denom = if drop_inverse { p + 1 } else { p * (p + 1) };
        acc * Rational64::new(numer, denom)
    }))
}

/// `U_h(r1, r2; q)`.
pub fn uh_weight(r1: i64, r2: i64, h: i64, q: u64) -> Result<Rational64> {
    if q == 0 || !is_squarefree(q) {
        return Err(Error::UnsupportedModulus(q));
    }
    Ok(factorize(q).iter().fold(Rational64::one(), |acc, &(p, _)| {
        let p = p as i64;
        let hits = [modp(r1, p) == 0, modp(r2, p) == 0, modp(r2 + h, p) == 0, modp(r1 - r2, p) == 0]
            .iter()
            .filter(|&&x| x)
            .count() as i64;
        acc * (Rational64::from_integer(hits) + Rational64::new(1, p))
    }))
}

pub type ExactComplex = Complex<BigRational>;

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rational_to_f64(x: &BigRational) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// Complex-valued function on `Z/qZ` with exact rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicWeight {
    q: u64,
    values: Vec<ExactComplex>,
}

impl PeriodicWeight {
    pub fn new(q: u64, values: Vec<ExactComplex>) -> Result<Self> {
        if q == 0 || values.len() as u64 != q {
            return Err(invalid(format!("expected {q} values, got {}", values.len())));
        }
        Ok(PeriodicWeight { q, values })
    }

    pub fn from_fn(q: u64, f: impl FnMut(u64) -> ExactComplex) -> Self {
        PeriodicWeight {
            q,
            values: (0..q).map(f).collect(),
        }
    }

    pub fn constant(q: u64, v: i64) -> Self {
        Self::from_fn(q, |_| Complex::new(rational(v, 1), BigRational::zero()))
    }

    pub fn delta(q: u64, r: i64) -> Self {
        let r = modp(r, q as i64) as u64;
        Self::from_fn(q, |n| Complex::new(rational((n == r) as i64, 1), BigRational::zero()))
    }

    /// Random weight with small rational entries.
    pub fn random(q: u64, rng: &mut impl Rng) -> Self {
        Self::from_fn(q, |_| {
            Complex::new(
                rational(rng.gen_range(-6..=6), rng.gen_range(1..=4)),
                rational(rng.gen_range(-6..=6), rng.gen_range(1..=4)),
            )
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn values(&self) -> &[ExactComplex] {
        &self.values
    }

    pub fn at(&self, n: i64) -> &ExactComplex {
        &self.values[modp(n, self.q as i64) as usize]
    }

    pub fn at_complex(&self, n: i64) -> Complex64 {
        let v = self.at(n);
        Complex64::new(rational_to_f64(&v.re), rational_to_f64(&v.im))
    }

    pub fn l2_norm_sq(&self) -> BigRational {
        self.values.iter().fold(BigRational::zero(), |acc, v| acc + v.norm_sqr())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Document `{"q": q, "values": [[num_re, den_re, num_im, den_im], ...]}`.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .values
            .iter()
            .map(|v| {
                json!([
                    v.re.numer().to_string(),
                    v.re.denom().to_string(),
                    v.im.numer().to_string(),
                    v.im.denom().to_string()
                ])
            })
            .collect();
        json!({ "q": self.q, "values": rows })
    }

    pub fn from_json(doc: &Value) -> Result<Self> {
        let q = doc["q"].as_u64().ok_or_else(|| invalid("missing integer field q"))?;
        let rows = doc["values"].as_array().ok_or_else(|| invalid("missing array field values"))?;
        let parse = |v: &Value| -> Result<BigInt> {
            match v {
                Value::Number(n) => n
                    .as_i64()
                    .map(BigInt::from)
                    .ok_or_else(|| invalid(format!("{n} is not an integer"))),
                Value::String(s) => s.parse().map_err(|_| invalid(format!("{s} is not an integer"))),
                _ => Err(invalid("entries must be integers")),
            }
        };
        let mut values = Vec::with_capacity(rows.len());
        for row in rows {
            let parts = row.as_array().filter(|r| r.len() == 4).ok_or_else(|| invalid("rows need four entries"))?;
            let nums = parts.iter().map(parse).collect::<Result<Vec<_>>>()?;
            if nums[1].is_zero() || nums[3].is_zero() {
                return Err(invalid("zero denominator"));
            }
            values.push(Complex::new(
                BigRational::new(nums[0].clone(), nums[1].clone()),
                BigRational::new(nums[2].clone(), nums[3].clone()),
            ));
        }
        Self::new(q, values)
    }
}

fn exact_abs(v: &ExactComplex) -> Option<BigRational> {
    if v.im.is_zero() {
        return Some(v.re.abs());
    }
    if v.re.is_zero() {
        return Some(v.im.abs());
    }
    let n = v.norm_sqr();
    let (num, den) = (n.numer().sqrt(), n.denom().sqrt());
    (&num * &num == *n.numer() && &den * &den == *n.denom()).then(|| BigRational::new(num, den))
}

fn rational64_to_big(x: Rational64) -> BigRational {
    rational(*x.numer(), *x.denom())
}

/// `N_h(t) = sum_{r1, r2} |t(r1) t(r2)| U_h(r1, r2; q)` in floating point.
pub fn nh_norm(t: &PeriodicWeight, h: i64) -> Result<f64> {
    let q = t.q;
    if gcd(h, q as i64) != 1 {
        return Err(invalid(format!("gcd({h}, {q}) > 1")));
    }
    let abs: Vec<f64> = (0..q as i64).map(|r| t.at_complex(r).norm()).collect();
    let mut total = 0.0;
    for r1 in 0..q as i64 {
        if abs[r1 as usize] == 0.0 {
            continue;
        }
        for r2 in 0..q as i64 {
            let u = uh_weight(r1, r2, h, q)?;
            total += abs[r1 as usize] * abs[r2 as usize] * (*u.numer() as f64 / *u.denom() as f64);
        }
    }
    Ok(total)
}

/// Exact `N_h(t)` when every `|t(r)|` is rational.
pub fn nh_norm_exact(t: &PeriodicWeight, h: i64) -> Result<Option<BigRational>> {
    let q = t.q;
    if gcd(h, q as i64) != 1 {
        return Err(invalid(format!("gcd({h}, {q}) > 1")));
    }
    let Some(abs) = t.values.iter().map(exact_abs).collect::<Option<Vec<_>>>() else {
        return Ok(None);
    };
    let mut total = BigRational::zero();
    for r1 in 0..q as i64 {
        for r2 in 0..q as i64 {
            let u = rational64_to_big(uh_weight(r1, r2, h, q)?);
            total += &abs[r1 as usize] * &abs[r2 as usize] * u;
        }
    }
    Ok(Some(total))
}

/// `u(r; q0) = prod_{p | q0} (1_{p | r} - 1/p)`.
pub fn balanced_unit(r: i64, q0: u64) -> BigRational {
    factorize(q0).iter().fold(BigRational::one(), |acc, &(p, _)| {
        let p = p as i64;
        acc * (rational((modp(r, p) == 0) as i64, 1) - rational(1, p))
    })
}

/// `t(r0; q0)`: the average of `t` over the residues `r = r0 mod q0`.
pub fn fibre_average(t: &PeriodicWeight, r0: i64, q0: u64) -> ExactComplex {
    let q = t.q as i64;
    let q0 = q0 as i64;
    let mut sum = Complex::new(BigRational::zero(), BigRational::zero());
    let mut r = modp(r0, q0);
    while r < q {
        sum += t.at(r).clone();
        r += q0;
    }
    let scale = rational(q0, q);
    Complex::new(sum.re * &scale, sum.im * scale)
}

/// Components `t_flat(.; q0)` for every `q0 | q`, stored as weights modulo `q`.
pub fn balanced_decompose(t: &PeriodicWeight) -> Result<BTreeMap<u64, PeriodicWeight>> {
    let q = t.q;
    if !is_squarefree(q) {
        return Err(Error::UnsupportedModulus(q));
    }
    let mut out = BTreeMap::new();
    for q0 in divisors(q) {
        let averages: Vec<ExactComplex> = (0..q0 as i64).map(|r0| fibre_average(t, r0, q0)).collect();
        let units: Vec<BigRational> = (0..q0 as i64).map(|r| balanced_unit(r, q0)).collect();
        let component = PeriodicWeight::from_fn(q, |n| {
            let mut acc = Complex::new(BigRational::zero(), BigRational::zero());
            for (r0, avg) in averages.iter().enumerate() {
                let u = &units[modp(n as i64 - r0 as i64, q0 as i64) as usize];
                if !u.is_zero() {
                    acc += Complex::new(&avg.re * u, &avg.im * u);
                }
            }
            acc
        });
        out.insert(q0, component);
    }
    Ok(out)
}

/// `true` when the components sum to `t` exactly.
pub fn balanced_reconstructs(t: &PeriodicWeight, parts: &BTreeMap<u64, PeriodicWeight>) -> bool {
    (0..t.q as i64).all(|n| {
        let sum = parts
            .values()
            .fold(Complex::new(BigRational::zero(), BigRational::zero()), |acc, part| acc + part.at(n).clone());
        sum == *t.at(n)
    })
}

/// `true` when `component`, read modulo `q0`, sums to zero over every fibre of
/// `Z/q0 -> Z/(q0/p)` for every `p | q0`.
pub fn balanced_mean_zero(component: &PeriodicWeight, q0: u64) -> bool {
    factorize(q0).iter().all(|&(p, _)| {
        let step = (q0 / p) as i64;
        (0..step).all(|m| {
            let sum = (0..p as i64).fold(Complex::new(BigRational::zero(), BigRational::zero()), |acc, j| {
                acc + component.at(m + j * step).clone()
            });
            sum.is_zero()
        })
    })
}

/// Assignment of each prime of `q0` to one of the seven divisibility patterns
/// `q1 | a, q2 | b, q3 | c, q4 | d, q5 | gcd(a, d), q6 | gcd(b, c), gcd(abcd, q7) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SevenSplit(pub [u64; 7]);

impl SevenSplit {
    /// All splittings of the square-free `q0`.
    pub fn all(q0: u64) -> Vec<SevenSplit> {
        let mut out = vec![[1u64; 7]];
        for (p, _) in factorize(q0) {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (0..7).map(move |i| {
                        let mut t = s;
                        t[i] *= p;
                        t
                    })
                })
                .collect();
        }
        out.into_iter().map(SevenSplit).collect()
    }

    pub fn moduli(&self) -> (u64, u64) {
        let q = self.0;
        (q[0] * q[1] * q[4] * q[5] * q[6], q[2] * q[3] * q[4] * q[5] * q[6])
    }

    pub fn indicator(&self, g: &IntMat2) -> bool {
        let [q1, q2, q3, q4, q5, q6, q7] = self.0.map(|x| x as i64);
        g.a % q1 == 0
            && g.b % q2 == 0
            && g.c % q3 == 0
            && g.d % q4 == 0
            && gcd(g.a, g.d) % q5 == 0
            && gcd(g.b, g.c) % q6 == 0
            && gcd(g.a * g.b * g.c * g.d, q7) == 1
    }
}

/// `|sum_tau alpha(tau sigma; q) conj(alpha(tau; q))|` for `sigma = (s, b; 0, s')`,
/// with `alpha(g; q) = t_flat(-h a d / det; q0) V(g; q)`.
pub fn balanced_correlation(
    component: &PeriodicWeight,
    q0: u64,
    h: i64,
    split: &SevenSplit,
    sigma: &IntMat2,
) -> Result<f64> {
    let (big1, big2) = split.moduli();
    let table = CosetTable::with_limit(big1, big2, INDEX_LIMIT)?;
    let q = component.modulus() as i64;
    let weight = |g: &IntMat2| -> Result<Complex64> {
        if !split.indicator(g) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let inv = mod_inv(g.det(), q).ok_or_else(|| invalid("determinant not coprime to q"))?;
        let n = modp(modp(-h, q) * modp(g.a, q) % q * modp(g.d, q) % q * inv, q);
        Ok(component.at_complex(modp(n, q0 as i64)))
    };
    let mut total = Complex64::new(0.0, 0.0);
    for tau in &table.lifts {
        let x = weight(&(*tau * *sigma))?;
        if x != Complex64::new(0.0, 0.0) {
            total += x * weight(tau)?.conj();
        }
    }
    Ok(total.norm())
}

/// Moduli for which [`project_matrix`] is defined on `g`; a convenience for callers.
pub fn projectable(g: &IntMat2, q1: u64, q2: u64) -> bool {
    project_matrix(g, q1, q2).is_ok()
}
