//! Integer-matrix orbit machinery for `Gamma_2(q1, q2) = {det 1, q1 | b, q2 | c}`:
//! projective lines, coset labels and lifts, Hecke representatives and the
//! small SL2(Z) boxes.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::Mul;

use crate::arith::{crt, ext_gcd, factorize, gcd, gcd3, is_squarefree, mod_inv, modp, proj_line_size};
use crate::error::{invalid, Error, Result};
use crate::fault::{self, Fault};

/// Integer 2x2 matrix with its determinant cached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    det: i64,
}

impl IntMat2 {
    pub const IDENTITY: IntMat2 = IntMat2::new(1, 0, 0, 1);

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        IntMat2 {
            a,
            b,
            c,
            d,
            det: a * d - b * c,
        }
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    /// Adjugate; the inverse when `det = 1`.
    pub fn adjugate(&self) -> Self {
        IntMat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn neg(&self) -> Self {
        IntMat2::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn transpose_swap(&self) -> Self {
        IntMat2::new(self.d, self.c, self.b, self.a)
    }

    pub fn to_real(&self) -> crate::geometry::RealMat2 {
        crate::geometry::RealMat2::new(self.a as f64, self.b as f64, self.c as f64, self.d as f64)
    }

    /// Writes `self = gamma * H` with `gamma` in SL2(Z) and `H = (g, b; 0, d)`,
    /// `g, d > 0`, `0 <= b < d`. Requires a positive determinant.
    pub fn row_hermite(&self) -> Result<(IntMat2, IntMat2)> {
        if self.det <= 0 {
            return Err(invalid("row Hermite form needs a positive determinant"));
        }
        let (g, x, y) = ext_gcd(self.a, self.c);
        let u = IntMat2::new(x, y, -self.c / g, self.a / g);
        let h = u * *self;
        let shift = h.b.div_euclid(h.d);
        let reduce = IntMat2::new(1, -shift, 0, 1);
        let h = reduce * h;
        let u = reduce * u;
        Ok((u.adjugate(), h))
    }
}

impl Mul for IntMat2 {
    type Output = IntMat2;
    fn mul(self, o: IntMat2) -> IntMat2 {
        IntMat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl fmt::Display for IntMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}; {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// Point of the projective line over `Z/qZ` in canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    pub q: u64,
    pub x: i64,
    pub y: i64,
}

fn local_normal_form(x: i64, y: i64, pk: i64) -> (i64, i64) {
    if let Some(inv) = mod_inv(y, pk) {
        (modp(x * inv, pk), 1 % pk)
    } else {
        let inv = mod_inv(x, pk).expect("content is a unit");
        (1 % pk, modp(y * inv, pk))
    }
}

impl ProjPoint {
    /// Canonical representative of `[x : y]` modulo `q`.
    pub fn new(x: i64, y: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(invalid("modulus must be positive"));
        }
        let qi = q as i64;
        if gcd3(x, y, qi) != 1 {
            return Err(invalid(format!("({x}, {y}) is not primitive modulo {q}")));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (p, e) in factorize(q) {
            let pk = p.pow(e) as i64;
            let (u, v) = local_normal_form(modp(x, pk), modp(y, pk), pk);
            xs.push((u, pk));
            ys.push((v, pk));
        }
        Ok(ProjPoint {
            q,
            x: crt(&xs).0,
            y: crt(&ys).0,
        })
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{})/{}", self.x, self.y, self.q)
    }
}

/// Projective line over `Z/qZ` for any `q >= 1`, in canonical form.
pub(crate) fn proj_line_points(q: u64) -> Vec<ProjPoint> {
    let drop_infinity = fault::active(Fault::ProjLineDropInfinity);
    let mut locals: Vec<(i64, Vec<(i64, i64)>)> = Vec::new();
    for (p, e) in factorize(q) {
        let pk = p.pow(e) as i64;
        let mut pts: Vec<(i64, i64)> = (0..pk).map(|x| (x, 1)).collect();
        if !drop_infinity {
            pts.extend((0..pk).step_by(p as usize).map(|y| (1, y)));
        }
        locals.push((pk, pts));
    }
    let mut out = vec![(Vec::new(), Vec::new())];
    for (pk, pts) in &locals {
        let mut next = Vec::with_capacity(out.len() * pts.len());
        for (xs, ys) in &out {
            for &(x, y) in pts {
                let mut xs: Vec<(i64, i64)> = xs.clone();
                let mut ys: Vec<(i64, i64)> = ys.clone();
                xs.push((x, *pk));
                ys.push((y, *pk));
                next.push((xs, ys));
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|(xs, ys)| ProjPoint {
            q,
            x: crt(&xs).0,
            y: crt(&ys).0,
        })
        .collect()
}

/// All points of the projective line modulo a square-free `q`.
pub fn enumerate_proj_line(q: u64) -> Result<Vec<ProjPoint>> {
    if q == 0 {
        return Err(invalid("modulus must be positive"));
    }
    if !is_squarefree(q) {
        return Err(Error::UnsupportedModulus(q));
    }
    Ok(proj_line_points(q))
}

/// Coset label for `Gamma_2(q1, q2) \ SL2(Z)`: top row mod `q1`, bottom row mod `q2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPair {
    pub first: ProjPoint,
    pub second: ProjPoint,
}

impl ProjPair {
    /// Cross determinant `a d - b c` of the stored representatives.
    pub fn cross_det(&self) -> i64 {
        self.first.x * self.second.y - self.first.y * self.second.x
    }

    pub fn in_image(&self) -> bool {
        let q0 = gcd(self.first.q as i64, self.second.q as i64);
        gcd(self.cross_det(), q0) == 1
    }
}

impl fmt::Display for ProjPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.first, self.second)
    }
}

pub fn project_matrix(g: &IntMat2, q1: u64, q2: u64) -> Result<ProjPair> {
    Ok(ProjPair {
        first: ProjPoint::new(g.a, g.b, q1)?,
        second: ProjPoint::new(g.c, g.d, q2)?,
    })
}

/// Deterministic SL2(Z) matrix projecting to `pair`.
pub fn lift_proj_pair(pair: &ProjPair) -> Result<IntMat2> {
    let (q1, q2) = (pair.first.q as i64, pair.second.q as i64);
    if !pair.in_image() {
        return Err(Error::NotInImage {
            q0: gcd(q1, q2) as u64,
        });
    }
    let (a, b) = (pair.first.x, pair.first.y);
    let (c, d) = (pair.second.x, pair.second.y);
    let q1_only: Vec<i64> = factorize(q1 as u64)
        .into_iter()
        .map(|(p, _)| p as i64)
        .filter(|p| q2 % p != 0)
        .collect();
    let acceptable = |cc: i64, dd: i64| {
        gcd(cc, dd) == 1 && q1_only.iter().all(|&p| modp(a * dd - b * cc, p) != 0)
    };
    let (cc, dd) = (0i64..)
        .flat_map(|s| (0..=s).map(move |i| (i, s - i)))
        .map(|(i, j)| (c + i * q2, d + j * q2))
        .find(|&(cc, dd)| acceptable(cc, dd))
        .expect("primitive residues admit a coprime lift");
    let (_, x, y) = ext_gcd(dd, cc);
    let (a0, b0) = (x, -y);
    if q1 == 1 {
        return Ok(IntMat2::new(a0, b0, cc, dd));
    }
    let lambda = mod_inv(a * dd - b * cc, q1).expect("cross determinant is a unit");
    let (v1, v2) = (lambda * a - a0, lambda * b - b0);
    let parts: Vec<(i64, i64)> = factorize(q1 as u64)
        .into_iter()
        .map(|(p, e)| {
            let pk = p.pow(e) as i64;
            let t = match mod_inv(cc, pk) {
                Some(inv) => modp(modp(v1, pk) * inv, pk),
                None => modp(modp(v2, pk) * mod_inv(dd, pk).expect("row is primitive"), pk),
            };
            (t, pk)
        })
        .collect();
    let t = crt(&parts).0;
    Ok(IntMat2::new(a0 + t * cc, b0 + t * dd, cc, dd))
}

pub fn gamma2_member(g: &IntMat2, q1: u64, q2: u64) -> bool {
    g.det() == 1 && g.b % q1 as i64 == 0 && g.c % q2 as i64 == 0
}

/// Label and canonical lift of the coset `Gamma_2(q1, q2) g`.
pub fn coset_reduce(g: &IntMat2, q1: u64, q2: u64) -> Result<(ProjPair, IntMat2)> {
    if g.det() != 1 {
        return Err(invalid(format!("{g} is not in SL2(Z)")));
    }
    let pair = project_matrix(g, q1, q2)?;
    Ok((pair, lift_proj_pair(&pair)?))
}

/// All coset labels with their canonical lifts, indexed for lookup.
#[derive(Debug, Clone)]
pub struct CosetTable {
    pub q1: u64,
    pub q2: u64,
    pub labels: Vec<ProjPair>,
    pub lifts: Vec<IntMat2>,
    index: HashMap<ProjPair, usize>,
}

impl CosetTable {
    pub fn new(q1: u64, q2: u64) -> Result<Self> {
        Self::with_limit(q1, q2, 100_000)
    }

    pub fn with_limit(q1: u64, q2: u64, limit: u64) -> Result<Self> {
        if q1 == 0 || q2 == 0 {
            return Err(invalid("moduli must be positive"));
        }
        let needed = proj_line_size(q1) * proj_line_size(q2);
        if needed > limit {
            return Err(Error::ResourceLimit {
                what: "coset index",
                needed,
                limit,
            });
        }
        let firsts = proj_line_points(q1);
        let seconds = proj_line_points(q2);
        let mut labels = Vec::new();
        for f in &firsts {
            for s in &seconds {
                let pair = ProjPair {
                    first: *f,
                    second: *s,
                };
                if pair.in_image() {
                    labels.push(pair);
                }
            }
        }
        let lifts = labels.iter().map(lift_proj_pair).collect::<Result<Vec<_>>>()?;
        let index = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        Ok(CosetTable {
            q1,
            q2,
            labels,
            lifts,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, pair: &ProjPair) -> Option<usize> {
        self.index.get(pair).copied()
    }

    /// Index of the coset containing `g`.
    pub fn locate(&self, g: &IntMat2) -> Result<usize> {
        let pair = project_matrix(g, self.q1, self.q2)?;
        self.position(&pair).ok_or(Error::NotInImage {
            q0: gcd(self.q1 as i64, self.q2 as i64) as u64,
        })
    }
}

/// Number of cosets reached by a breadth-first walk from the identity with
/// the generators `(1, 1; 0, 1)` and `(0, 1; -1, 0)`.
pub fn coset_count_bfs(q1: u64, q2: u64) -> Result<usize> {
    let gens = [IntMat2::new(1, 1, 0, 1), IntMat2::new(0, 1, -1, 0)];
    let (start, lift) = coset_reduce(&IntMat2::IDENTITY, q1, q2)?;
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([lift]);
    while let Some(g) = queue.pop_front() {
        for s in &gens {
            let (label, lift) = coset_reduce(&(g * *s), q1, q2)?;
            if seen.insert(label) {
                queue.push_back(lift);
            }
        }
    }
    Ok(seen.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeckeKind {
    /// `(a, b q1; 0, d)` with `ad = h`, `0 <= b < d`.
    Upper { h: u64, q1: u64 },
    /// `(1, f r; 0, k)` with `gcd(f, k) = 1`.
    Twist { k: u64, r: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeckeRep {
    pub kind: HeckeKind,
    pub matrix: IntMat2,
}

pub fn hecke_reps_h(h: u64, q1: u64) -> Result<Vec<HeckeRep>> {
    if h == 0 || q1 == 0 {
        return Err(invalid("h and q1 must be positive"));
    }
    let mut out = Vec::new();
    for a in crate::arith::divisors(h) {
        let d = h / a;
        for b in 0..d {
            out.push(HeckeRep {
                kind: HeckeKind::Upper { h, q1 },
                matrix: IntMat2::new(a as i64, (b * q1) as i64, 0, d as i64),
            });
        }
    }
    Ok(out)
}

pub fn hecke_reps_k(k: u64, r: i64) -> Result<Vec<HeckeRep>> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if gcd(r, k as i64) != 1 {
        return Err(invalid(format!("gcd({r}, {k}) > 1")));
    }
    let kind = HeckeKind::Twist { k, r };
    if k == 1 {
        return Ok(vec![HeckeRep {
            kind,
            matrix: IntMat2::IDENTITY,
        }]);
    }
    Ok((1..k as i64)
        .filter(|&f| gcd(f, k as i64) == 1)
        .map(|f| HeckeRep {
            kind,
            matrix: IntMat2::new(1, f * r, 0, k as i64),
        })
        .collect())
}

pub fn m2hk_member(g: &IntMat2, h: u64, k: u64) -> bool {
    let k = k as i64;
    g.det() == h as i64 * k && gcd3(g.a, g.c, k) == 1 && gcd3(g.b, g.d, k) == 1
}

/// Determinant-one integer matrices with `|a| + |b| L + |c| / L + |d| <= bound`.
pub fn enumerate_box_sl2(scale: f64, bound: f64) -> Result<Vec<IntMat2>> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(invalid("scale must be positive"));
    }
    let slack = 1e-9 * bound.abs().max(1.0);
    let fits = |a: i64, b: i64, c: i64, d: i64| {
        (a.abs() + d.abs()) as f64 + b.abs() as f64 * scale + c.abs() as f64 / scale <= bound + slack
    };
    let amax = bound.floor() as i64;
    let mut out = Vec::new();
    for a in -amax..=amax {
        for d in -amax..=amax {
            if !fits(a, 0, 0, d) {
                continue;
            }
            let n = a * d - 1;
            if n == 0 {
                let room = bound + slack - (a.abs() + d.abs()) as f64;
                let bmax = (room / scale).floor() as i64;
                let cmax = (room * scale).floor() as i64;
                for b in -bmax..=bmax {
                    if fits(a, b, 0, d) {
                        out.push(IntMat2::new(a, b, 0, d));
                    }
                }
                for c in -cmax..=cmax {
                    if c != 0 && fits(a, 0, c, d) {
                        out.push(IntMat2::new(a, 0, c, d));
                    }
                }
            } else {
                for m in crate::arith::divisors(n.unsigned_abs()) {
                    let m = m as i64;
                    for b in [m, -m] {
                        let c = n / b;
                        if fits(a, b, c, d) {
                            out.push(IntMat2::new(a, b, c, d));
                        }
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Label of the left `Gamma_2(q1, q2)` orbit of a positive-determinant matrix.
pub fn orbit_label(m: &IntMat2, q1: u64, q2: u64) -> Result<(IntMat2, ProjPair)> {
    let (gamma, hnf) = m.row_hermite()?;
    Ok((hnf, project_matrix(&gamma, q1, q2)?))
}

/// Outcome of comparing the two orbit decompositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitSwap {
    pub left_orbits: usize,
    pub right_orbits: usize,
    pub products: usize,
    pub equal: bool,
}

/// Compares the orbit sets of `{tau s_h s_k}` and `{s_h tau s_k}` over coset
/// representatives `tau`, Hecke matrices `s_h` and twisted matrices `s_k`.
pub fn orbit_swap(h: u64, k: u64, q1: u64, q2: u64) -> Result<OrbitSwap> {
    if gcd(h as i64, (k * q1 * q2) as i64) != 1 {
        return Err(invalid(format!("gcd({h}, {}) > 1", k * q1 * q2)));
    }
    let table = CosetTable::new(q1, q2)?;
    let hs = hecke_reps_h(h, q1)?;
    let ks = hecke_reps_k(k, 1)?;
    let mut left = HashSet::new();
    let mut right = HashSet::new();
    let mut products = 0;
    for tau in &table.lifts {
        for sh in &hs {
            for sk in &ks {
                products += 1;
                left.insert(orbit_label(&(*tau * sh.matrix * sk.matrix), q1, q2)?);
                right.insert(orbit_label(&(sh.matrix * *tau * sk.matrix), q1, q2)?);
            }
        }
    }
    Ok(OrbitSwap {
        left_orbits: left.len(),
        right_orbits: right.len(),
        products,
        equal: left == right,
    })
}

pub fn orbit_swap_check(h: u64, k: u64, q1: u64, q2: u64) -> Result<bool> {
    let r = orbit_swap(h, k, q1, q2)?;
    Ok(r.equal && r.left_orbits == r.products && r.right_orbits == r.products)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: i64, y: i64, q: u64) -> ProjPoint {
        ProjPoint::new(x, y, q).unwrap()
    }

    #[test]
    fn proj_line_examples() {
        let two = enumerate_proj_line(2).unwrap();
        let mut got: Vec<(i64, i64)> = two.iter().map(|p| (p.x, p.y)).collect();
        got.sort();
        assert_eq!(got, vec![(0, 1), (1, 0), (1, 1)]);
        assert_eq!(enumerate_proj_line(1).unwrap().len(), 1);
        assert_eq!(enumerate_proj_line(6).unwrap().len(), 12);
        assert_eq!(enumerate_proj_line(4), Err(Error::UnsupportedModulus(4)));
        assert_eq!(proj_line_points(4).len(), 6);
        assert_eq!(proj_line_points(9).len(), 12);
        assert_eq!(pt(5, 4, 6), pt(1, 2, 6));
        assert_eq!(pt(4, 4, 9), pt(1, 1, 9));
        assert_eq!(pt(2, 3, 9), pt(1, 6, 9));
    }

    #[test]
    fn projection_examples() {
        let id = project_matrix(&IntMat2::IDENTITY, 2, 3).unwrap();
        assert_eq!(id.first, pt(1, 0, 2));
        assert_eq!(id.second, pt(0, 1, 3));
        let g = project_matrix(&IntMat2::new(1, 0, 1, 1), 2, 3).unwrap();
        assert_eq!((g.first, g.second), (pt(1, 0, 2), pt(1, 1, 3)));
        assert!(project_matrix(&IntMat2::new(2, 0, 0, 1), 2, 3).is_err());
    }

    #[test]
    fn lifts_and_image() {
        for (q1, q2) in [(2, 3), (5, 5), (6, 10), (4, 9), (1, 7), (7, 1), (30, 6)] {
            let t = CosetTable::new(q1, q2).unwrap();
            for (label, lift) in t.labels.iter().zip(&t.lifts) {
                assert_eq!(lift.det(), 1);
                assert_eq!(project_matrix(lift, q1, q2).unwrap(), *label);
                assert_eq!(coset_reduce(lift, q1, q2).unwrap().1, *lift);
            }
            for (i, x) in t.lifts.iter().enumerate() {
                for y in &t.lifts[i + 1..] {
                    assert!(!gamma2_member(&(*x * y.adjugate()), q1, q2));
                }
            }
        }
        assert_eq!(CosetTable::new(2, 3).unwrap().len(), 12);
        assert_eq!(CosetTable::new(5, 5).unwrap().len(), 30);
        let bad = ProjPair { first: pt(1, 0, 5), second: pt(1, 0, 5) };
        assert_eq!(lift_proj_pair(&bad), Err(Error::NotInImage { q0: 5 }));
    }

    #[test]
    fn membership() {
        assert!(gamma2_member(&IntMat2::IDENTITY, 3, 5));
        assert!(gamma2_member(&IntMat2::new(1, 2, 0, 1), 2, 5));
        assert!(!gamma2_member(&IntMat2::new(1, 1, 0, 1), 2, 5));
        assert!(m2hk_member(&IntMat2::new(1, 1, 0, 2), 1, 2));
        assert!(!m2hk_member(&IntMat2::new(1, 0, 0, 2), 1, 2));
        assert!(m2hk_member(&IntMat2::IDENTITY, 1, 1));
    }

    #[test]
    fn hecke_examples() {
        assert_eq!(hecke_reps_h(1, 5).unwrap()[0].matrix, IntMat2::IDENTITY);
        let two: Vec<IntMat2> = hecke_reps_h(2, 3).unwrap().iter().map(|r| r.matrix).collect();
        assert_eq!(two, vec![IntMat2::new(1, 0, 0, 2), IntMat2::new(1, 3, 0, 2), IntMat2::new(2, 0, 0, 1)]);
        assert_eq!(hecke_reps_h(6, 1).unwrap().len(), 12);
        assert_eq!(hecke_reps_k(1, 7).unwrap()[0].matrix, IntMat2::IDENTITY);
        let k2: Vec<IntMat2> = hecke_reps_k(2, 15).unwrap().iter().map(|r| r.matrix).collect();
        assert_eq!(k2, vec![IntMat2::new(1, 15, 0, 2)]);
        let k3: Vec<IntMat2> = hecke_reps_k(3, 1).unwrap().iter().map(|r| r.matrix).collect();
        assert_eq!(k3, vec![IntMat2::new(1, 1, 0, 3), IntMat2::new(1, 2, 0, 3)]);
        assert!(hecke_reps_k(3, 6).is_err());
    }

    #[test]
    fn box_enumeration_matches_exhaustive_loop() {
        let got = enumerate_box_sl2(1.0, 6.0).unwrap();
        let mut oracle = Vec::new();
        for a in -6i64..=6 {
            for b in -6i64..=6 {
                for c in -6i64..=6 {
                    for d in -6i64..=6 {
                        if a * d - b * c == 1 && a.abs() + b.abs() + c.abs() + d.abs() <= 6 {
                            oracle.push(IntMat2::new(a, b, c, d));
                        }
                    }
                }
            }
        }
        oracle.sort();
        assert_eq!(got, oracle);
        assert!(got.contains(&IntMat2::new(1, 1, 0, 1)));
        assert!(got.contains(&IntMat2::IDENTITY) && got.contains(&IntMat2::IDENTITY.neg()));
    }

    #[test]
    fn hermite_form() {
        let m = IntMat2::new(3, 7, 5, 2);
        let m = if m.det() < 0 { IntMat2::new(m.c, m.d, m.a, m.b) } else { m };
        let (g, h) = m.row_hermite().unwrap();
        assert_eq!(g.det(), 1);
        assert_eq!(g * h, m);
        assert!(h.c == 0 && h.a > 0 && (0..h.d).contains(&h.b));
    }

    #[test]
    fn orbit_swap_examples() {
        assert!(orbit_swap_check(1, 1, 2, 3).unwrap());
        assert!(orbit_swap_check(2, 1, 3, 5).unwrap());
        assert!(orbit_swap_check(5, 7, 2, 3).unwrap());
        assert!(orbit_swap_check(2, 1, 2, 3).is_err());
    }

    #[test]
    fn bfs_index() {
        assert_eq!(coset_count_bfs(2, 3).unwrap(), 12);
        assert_eq!(coset_count_bfs(5, 5).unwrap(), 30);
    }
}
