//! Dirichlet characters modulo square-free integers, with exact values as
//! roots of unity.

use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

use num::complex::Complex64;
use num::integer::Integer;

use crate::arith::{factorize, is_squarefree, mod_pow, modp, primitive_root};
use crate::error::{invalid, Error, Result};

/// The root of unity `exp(2 pi i num / den)`, kept in lowest terms with `0 <= num < den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase {
    num: u64,
    den: u64,
}

impl Phase {
    pub const ONE: Phase = Phase { num: 0, den: 1 };

    pub fn new(num: i64, den: u64) -> Self {
        let den_i = den as i64;
        let n = num.rem_euclid(den_i) as u64;
        let g = n.gcd(&den);
        Phase {
            num: n / g,
            den: den / g,
        }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn conj(self) -> Self {
        Phase::new(-(self.num as i64), self.den)
    }

    pub fn to_complex(self) -> Complex64 {
        // Exact values at the quarter turns keep sums of real characters exact.
        match (self.num, self.den) {
            (0, 1) => Complex64::new(1.0, 0.0),
            (1, 2) => Complex64::new(-1.0, 0.0),
            (1, 4) => Complex64::new(0.0, 1.0),
            (3, 4) => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, std::f64::consts::TAU * self.num as f64 / self.den as f64),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, o: Phase) -> Phase {
        let den = self.den.lcm(&o.den);
        Phase::new(
            (self.num * (den / self.den) + o.num * (den / o.den)) as i64,
            den,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct LocalChar {
    p: u64,
    root: u64,
    exponent: u64,
    /// Discrete logarithm base `root`, indexed by residue; entry 0 unused.
    log: Arc<Vec<u64>>,
}

impl LocalChar {
    fn new(p: u64, exponent: u64) -> Self {
        let root = primitive_root(p);
        let mut log = vec![0u64; p as usize];
        let mut x = 1u64;
        for k in 0..p - 1 {
            log[x as usize] = k;
            x = x * root % p;
        }
        LocalChar {
            p,
            root,
            exponent: exponent % (p - 1).max(1),
            log: Arc::new(log),
        }
    }

    fn value(&self, n: i64) -> Option<Phase> {
        let r = modp(n, self.p as i64) as usize;
        if r == 0 {
            return None;
        }
        Some(Phase::new((self.exponent * self.log[r]) as i64, self.p - 1))
    }
}

/// Dirichlet character modulo a square-free `q`, stored prime by prime as the
/// exponent `e_p` with `chi(g_p) = exp(2 pi i e_p / (p - 1))` for the least
/// primitive root `g_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirichletChar {
    modulus: u64,
    locals: Vec<LocalChar>,
}

impl DirichletChar {
    pub fn principal(q: u64) -> Result<Self> {
        Self::from_exponents(q, &vec![0; factorize(q).len()])
    }

    /// Character with the given exponent per prime divisor, primes in increasing order.
    pub fn from_exponents(q: u64, exponents: &[u64]) -> Result<Self> {
        if q == 0 {
            return Err(invalid("modulus must be positive"));
        }
        if !is_squarefree(q) {
            return Err(Error::UnsupportedModulus(q));
        }
        let primes = factorize(q);
        if primes.len() != exponents.len() {
            return Err(invalid(format!(
                "{} exponents given for {} primes",
                exponents.len(),
                primes.len()
            )));
        }
        Ok(DirichletChar {
            modulus: q,
            locals: primes
                .iter()
                .zip(exponents)
                .map(|(&(p, _), &e)| LocalChar::new(p, e))
                .collect(),
        })
    }

    /// The Legendre symbol modulo an odd prime.
    pub fn quadratic(p: u64) -> Result<Self> {
        if p < 3 || factorize(p) != vec![(p, 1)] {
            return Err(invalid(format!("{p} is not an odd prime")));
        }
        Self::from_exponents(p, &[(p - 1) / 2])
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn exponents(&self) -> Vec<u64> {
        self.locals.iter().map(|l| l.exponent).collect()
    }

    pub fn primitive_roots(&self) -> Vec<(u64, u64)> {
        self.locals.iter().map(|l| (l.p, l.root)).collect()
    }

    pub fn is_principal(&self) -> bool {
        self.locals.iter().all(|l| l.exponent == 0)
    }

    pub fn conductor(&self) -> u64 {
        self.locals
            .iter()
            .filter(|l| l.exponent != 0)
            .map(|l| l.p)
            .product()
    }

    /// Largest power of `p` dividing the conductor.
    pub fn local_conductor(&self, p: u64) -> u64 {
        if self.conductor().is_multiple_of(p) {
            p
        } else {
            1
        }
    }

    /// `kappa` with `chi(-1) = (-1)^kappa`.
    pub fn parity(&self) -> u8 {
        match self.value(-1) {
            Some(ph) if ph == Phase::ONE => 0,
            _ => 1,
        }
    }

    /// `None` when `gcd(n, q) > 1`.
    pub fn value(&self, n: i64) -> Option<Phase> {
        self.locals
            .iter()
            .try_fold(Phase::ONE, |acc, l| l.value(n).map(|v| acc * v))
    }

    pub fn eval(&self, n: i64) -> Complex64 {
        self.value(n).map_or(Complex64::new(0.0, 0.0), Phase::to_complex)
    }

    pub fn conj(&self) -> Self {
        DirichletChar {
            modulus: self.modulus,
            locals: self
                .locals
                .iter()
                .map(|l| LocalChar {
                    exponent: (l.p - 1 - l.exponent) % (l.p - 1).max(1),
                    ..l.clone()
                })
                .collect(),
        }
    }

    /// Product of two characters to the same modulus.
    pub fn times(&self, other: &DirichletChar) -> Result<Self> {
        if self.modulus != other.modulus {
            return Err(invalid("characters have different moduli"));
        }
        let exps: Vec<u64> = self
            .locals
            .iter()
            .zip(&other.locals)
            .map(|(x, y)| (x.exponent + y.exponent) % (x.p - 1).max(1))
            .collect();
        Self::from_exponents(self.modulus, &exps)
    }
}

impl fmt::Display for DirichletChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi_{}{:?}", self.modulus, self.exponents())
    }
}

/// All `phi(q)` characters modulo a square-free `q`, ordered by exponent vector.
pub fn char_group(q: u64) -> Result<Vec<DirichletChar>> {
    if q == 0 {
        return Err(invalid("modulus must be positive"));
    }
    if !is_squarefree(q) {
        return Err(Error::UnsupportedModulus(q));
    }
    let primes = factorize(q);
    let mut vectors: Vec<Vec<u64>> = vec![Vec::new()];
    for &(p, _) in &primes {
        vectors = vectors
            .into_iter()
            .flat_map(|v| {
                (0..(p - 1).max(1)).map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    vectors
        .iter()
        .map(|v| DirichletChar::from_exponents(q, v))
        .collect()
}

/// Integer linear combination of roots of unity, for exact zero tests.
#[derive(Debug, Clone, Default)]
pub struct CyclotomicSum {
    terms: Vec<(Phase, i64)>,
}

impl CyclotomicSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, phase: Phase, coefficient: i64) {
        self.terms.push((phase, coefficient));
    }

    /// Common order of all phases.
    fn order(&self) -> u64 {
        self.terms.iter().fold(1, |acc, (p, _)| acc.lcm(&p.den()))
    }

    /// Coefficients of the sum as a polynomial in `zeta_N`, reduced modulo the
    /// `N`-th cyclotomic polynomial.
    pub fn reduced(&self) -> (u64, Vec<i64>) {
        let n = self.order();
        let mut poly = vec![0i64; n as usize];
        for (p, c) in &self.terms {
            poly[(p.num() * (n / p.den())) as usize] += c;
        }
        let phi = cyclotomic_poly(n);
        let deg = phi.len() - 1;
        for i in (deg..poly.len()).rev() {
            let lead = poly[i];
            if lead != 0 {
                for (j, &c) in phi.iter().enumerate() {
                    poly[i - deg + j] -= lead * c;
                }
            }
        }
        poly.truncate(deg);
        (n, poly)
    }

    pub fn is_zero(&self) -> bool {
        self.reduced().1.iter().all(|&c| c == 0)
    }

    /// The sum equals the integer `value` exactly.
    pub fn equals_integer(&self, value: i64) -> bool {
        let mut s = self.clone();
        s.add(Phase::ONE, -value);
        s.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        self.terms.iter().map(|(p, c)| p.to_complex() * *c as f64).sum()
    }
}

/// Integer coefficients of the `n`-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_poly(n: u64) -> Vec<i64> {
    // x^n - 1 divided by every Phi_d with d | n, d < n.
    let mut poly = vec![0i64; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for d in crate::arith::divisors(n) {
        if d == n {
            continue;
        }
        let div = cyclotomic_poly(d);
        poly = poly_div_exact(&poly, &div);
    }
    poly
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let nd = num.len() - 1;
    let mut quot = vec![0i64; nd - dd + 1];
    for i in (0..=nd - dd).rev() {
        let c = rem[i + dd] / den[dd];
        quot[i] = c;
        for (j, &dc) in den.iter().enumerate() {
            rem[i + j] -= c * dc;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quot
}

/// Order of `n` modulo the prime `p`; used by tests of the stored roots.
pub fn multiplicative_order(n: u64, p: u64) -> u64 {
    (1..p).find(|&k| mod_pow(n, k, p) == 1).unwrap_or(0)
}
