//! Cyclotomic polynomials, divisibility tests, prime-power spectra, the
//! (T1)/(T2) conditions, standard tiling complements, and the cuboid
//! reformulation of divisibility.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::zmod::Modulus;

const MAX_CYCLOTOMIC_ORDER: u64 = 1 << 20;

/// Dense integer polynomial, index = degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<i64>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// `X^d - 1`.
    pub fn power_minus_one(d: usize) -> Self {
        let mut c = vec![0i64; d + 1];
        c[0] = -1;
        c[d] = 1;
        IntPoly::new(c)
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut acc = vec![0i128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] = acc[i + j]
                    .checked_add(a as i128 * b as i128)
                    .expect("coefficient overflow");
            }
        }
        IntPoly::new(
            acc.into_iter()
                .map(|c| i64::try_from(c).expect("coefficient overflow"))
                .collect(),
        )
    }

    /// Remainder modulo a monic divisor; exact integer arithmetic.
    pub fn rem(&self, divisor: &IntPoly) -> IntPoly {
        assert_eq!(divisor.coeffs.last(), Some(&1), "divisor must be monic");
        let work = self.rem_raw(divisor);
        IntPoly::new(
            work.into_iter()
                .map(|c| i64::try_from(c).expect("coefficient overflow"))
                .collect(),
        )
    }

    fn rem_raw(&self, divisor: &IntPoly) -> Vec<i128> {
        let d = divisor.coeffs.len() - 1;
        let mut work: Vec<i128> = self.coeffs.iter().map(|&c| c as i128).collect();
        while work.len() > d {
            let lead = *work.last().unwrap();
            let k = work.len() - 1 - d;
            if lead != 0 {
                for (j, &c) in divisor.coeffs.iter().enumerate() {
                    if c != 0 {
                        work[k + j] = work[k + j]
                            .checked_sub(lead.checked_mul(c as i128).expect("overflow"))
                            .expect("overflow");
                    }
                }
            }
            debug_assert_eq!(*work.last().unwrap(), 0);
            work.pop();
        }
        work
    }

    pub fn is_divisible_by(&self, divisor: &IntPoly) -> bool {
        self.rem_raw(divisor).iter().all(|&c| c == 0)
    }

    /// Exact quotient by a monic divisor; panics if the division is inexact.
    pub fn exact_div(&self, divisor: &IntPoly) -> IntPoly {
        assert_eq!(divisor.coeffs.last(), Some(&1), "divisor must be monic");
        let d = divisor.coeffs.len() - 1;
        let mut work: Vec<i128> = self.coeffs.iter().map(|&c| c as i128).collect();
        let mut quot = vec![0i128; work.len().saturating_sub(d)];
        while work.len() > d {
            let lead = *work.last().unwrap();
            let k = work.len() - 1 - d;
            quot[k] = lead;
            if lead != 0 {
                for (j, &c) in divisor.coeffs.iter().enumerate() {
                    work[k + j] -= lead * c as i128;
                }
            }
            work.pop();
        }
        assert!(work.iter().all(|&c| c == 0), "inexact polynomial division");
        IntPoly::new(
            quot.into_iter()
                .map(|c| i64::try_from(c).expect("coefficient overflow"))
                .collect(),
        )
    }

    pub fn from_multiset(a: &Multiset) -> IntPoly {
        let m = a.modulus().value();
        assert!(m <= MAX_CYCLOTOMIC_ORDER, "polynomial too large");
        let mut c = vec![0i64; m as usize];
        for (x, w) in a.entries() {
            c[x as usize] = w;
        }
        IntPoly::new(c)
    }
}

fn moebius(n: u64) -> i64 {
    let mut mu = 1i64;
    let mut n = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            mu = -mu;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, Arc<IntPoly>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<IntPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub(crate) fn cached_cyclotomic(s: u64) -> Arc<IntPoly> {
    if let Some(hit) = cyclotomic_cache().lock().unwrap().get(&s) {
        return hit.clone();
    }
    let poly = Arc::new(compute_cyclotomic(s));
    cyclotomic_cache()
        .lock()
        .unwrap()
        .entry(s)
        .or_insert(poly)
        .clone()
}

fn compute_cyclotomic(s: u64) -> IntPoly {
    assert!(s >= 1 && s <= MAX_CYCLOTOMIC_ORDER);
    // Moebius product: Phi_s = prod_{d|s} (X^{s/d} - 1)^{mu(d)}.
    let mut numer = IntPoly::new(vec![1]);
    let mut denom = Vec::new();
    let mut d = 1;
    while d * d <= s {
        if s % d == 0 {
            for q in [d, s / d] {
                match moebius(q) {
                    1 => numer = numer.mul(&IntPoly::power_minus_one((s / q) as usize)),
                    -1 => denom.push((s / q) as usize),
                    _ => {}
                }
                if d * d == s {
                    break;
                }
            }
        }
        d += 1;
    }
    let mut out = numer;
    for e in denom {
        out = out.exact_div(&IntPoly::power_minus_one(e));
    }
    out
}

/// The `s`-th cyclotomic polynomial.
pub fn cyclotomic_poly(s: u64) -> IntPoly {
    (*cached_cyclotomic(s)).clone()
}

/// Whether `Phi_s(X)` divides the mask polynomial of `A`.
///
/// `A` is first folded modulo `X^s - 1`, which changes nothing since
/// `Phi_s | X^s - 1`.
pub fn divides(s: u64, a: &Multiset) -> bool {
    assert!(s >= 1);
    if s == 1 {
        return a.total_mass() == 0;
    }
    let mut folded = vec![0i64; s as usize];
    for (x, w) in a.entries() {
        let i = (x % s) as usize;
        folded[i] = folded[i].checked_add(w).expect("weight overflow");
    }
    IntPoly::new(folded).is_divisible_by(&cached_cyclotomic(s))
}

/// Prime powers `p^alpha > 1` dividing `M`, ascending.
pub fn prime_power_divisors(m: &Modulus) -> Vec<u64> {
    let mut out = Vec::new();
    for nu in 0..m.num_primes() {
        let p = m.prime(nu);
        let mut q = p;
        for _ in 0..m.exponent(nu) {
            out.push(q);
            q *= p;
        }
    }
    out.sort_unstable();
    out
}

/// The set `S_A` of prime powers `p^alpha | M` with `Phi_{p^alpha} | A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    modulus: Modulus,
    elements: Vec<u64>,
}

impl Spectrum {
    pub fn compute(a: &Multiset) -> Spectrum {
        let m = a.modulus();
        let elements = prime_power_divisors(m)
            .into_iter()
            .filter(|&q| divides(q, a))
            .collect();
        Spectrum {
            modulus: m.clone(),
            elements,
        }
    }

    /// Builds a spectrum from explicit prime powers (for complement synthesis).
    pub fn from_elements(modulus: Modulus, mut elements: Vec<u64>) -> Result<Spectrum> {
        elements.sort_unstable();
        elements.dedup();
        let valid = prime_power_divisors(&modulus);
        for &q in &elements {
            if !valid.contains(&q) {
                return Err(Error::InvalidArgument(format!(
                    "{q} is not a prime power divisor of {}",
                    modulus.value()
                )));
            }
        }
        Ok(Spectrum { modulus, elements })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn contains(&self, q: u64) -> bool {
        self.elements.binary_search(&q).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Exponents `alpha` with `p_nu^alpha` in the spectrum, ascending.
    pub fn alphas(&self, nu: usize) -> Vec<u32> {
        let p = self.modulus.prime(nu);
        (1..=self.modulus.exponent(nu))
            .filter(|&alpha| self.contains(p.pow(alpha)))
            .collect()
    }

    /// `prod_{p^alpha in S} p`, the size forced by (T1).
    pub fn t1_size(&self) -> u64 {
        let mut out = 1u64;
        for &q in &self.elements {
            let p = smallest_prime_factor(q);
            out = out.checked_mul(p).expect("t1 size overflow");
        }
        out
    }
}

fn smallest_prime_factor(q: u64) -> u64 {
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            return p;
        }
        p += 1;
    }
    q
}

/// (T1): `|A| = prod_{p^alpha in S_A} p`.
pub fn check_t1(a: &Multiset) -> bool {
    let s = Spectrum::compute(a);
    a.total_mass() >= 0 && a.total_mass() as u64 == s.t1_size()
}

/// (T2): products of spectrum elements over pairwise distinct primes divide `A`.
///
/// Supports at most three distinct primes across the spectrum.
pub fn check_t2(a: &Multiset) -> Result<bool> {
    let s = Spectrum::compute(a);
    check_t2_of_spectrum(&s, a)
}

pub fn check_t2_of_spectrum(s: &Spectrum, a: &Multiset) -> Result<bool> {
    let mut by_prime: Vec<(u64, Vec<u64>)> = Vec::new();
    for &q in s.elements() {
        let p = smallest_prime_factor(q);
        match by_prime.iter_mut().find(|(pp, _)| *pp == p) {
            Some((_, v)) => v.push(q),
            None => by_prime.push((p, vec![q])),
        }
    }
    if by_prime.len() > 3 {
        return Err(Error::TooManyPrimes {
            max: 3,
            got: by_prime.len(),
        });
    }
    let groups: Vec<&Vec<u64>> = by_prime.iter().map(|(_, v)| v).collect();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            for &x in groups[i] {
                for &y in groups[j] {
                    if !divides(x * y, a) {
                        return Ok(false);
                    }
                    for k in j + 1..groups.len() {
                        for &z in groups[k] {
                            if !divides(x * y * z, a) {
                                return Ok(false);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// The standard complement: one fiber-like factor per spectrum element.
///
/// For `p^alpha` in `S` the factor is `{t * M_nu * p^{alpha-1} : 0 <= t < p}`.
/// The convolution of all factors is always a genuine set of size
/// `prod_{p^alpha in S} p`.
pub fn standard_complement(s: &Spectrum) -> Multiset {
    let m = s.modulus();
    let mut out = Multiset::from_set(m.clone(), &[0]).expect("singleton");
    for nu in 0..m.num_primes() {
        let p = m.prime(nu);
        let mnu = m.coprime_part(nu);
        for alpha in s.alphas(nu) {
            let step = m.mul(mnu, p.pow(alpha - 1));
            let factor: Vec<u64> = (0..p).map(|t| m.mul(t, step)).collect();
            let factor = Multiset::from_set(m.clone(), &factor).expect("progression is a set");
            out = out.convolve(&factor).expect("same modulus");
        }
    }
    assert!(out.is_set(), "standard complement must be a set");
    out
}

/// Premise of the grid-to-global divisibility lemma: `Phi_s` divides every
/// nonempty restriction of `A` to a grid `Lambda(a, step)` with `a` in the
/// support. When this returns true, `divides(s, A)` follows.
pub fn divides_on_grids(s: u64, a: &Multiset, step: u64) -> bool {
    assert!(a.modulus().is_divisor(step));
    let mut classes: Vec<u64> = a.support().iter().map(|&x| x % step).collect();
    classes.sort_unstable();
    classes.dedup();
    classes
        .into_iter()
        .all(|r| divides(s, &a.filtered(|x| x % step == r)))
}

/// Cuboid type `(N, delta, T)` over `Z_N`.
#[derive(Clone, Debug)]
pub struct CuboidType {
    modulus: Modulus,
    delta: Vec<u32>,
    template: Multiset,
}

/// One cuboid of a given type: base point and edge offsets (index aligned
/// with the primes of `N`; zero where the type has `delta = 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cuboid {
    pub c: u64,
    pub d: Vec<u64>,
}

impl CuboidType {
    pub fn new(modulus: Modulus, delta: Vec<u32>, template: Multiset) -> Result<Self> {
        if delta.len() != modulus.num_primes() {
            return Err(Error::InvalidArgument(format!(
                "delta has {} entries for {} primes",
                delta.len(),
                modulus.num_primes()
            )));
        }
        for (nu, &d) in delta.iter().enumerate() {
            if d > modulus.exponent(nu) {
                return Err(Error::InvalidArgument(format!(
                    "delta_{nu} = {d} exceeds the exponent of {}",
                    modulus.prime(nu)
                )));
            }
        }
        if template.modulus() != &modulus {
            return Err(Error::ModulusMismatch(
                template.modulus().value(),
                modulus.value(),
            ));
        }
        if template.is_zero() {
            return Err(Error::InvalidArgument("empty cuboid template".into()));
        }
        Ok(CuboidType {
            modulus,
            delta,
            template,
        })
    }

    /// The standard type: `delta = (1,..,1)`, template `{0}`.
    pub fn standard(modulus: Modulus) -> Self {
        let delta = vec![1; modulus.num_primes()];
        let template = Multiset::from_set(modulus.clone(), &[0]).expect("singleton");
        CuboidType::new(modulus, delta, template).expect("standard type is valid")
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// Directions with `delta > 0`.
    pub fn active(&self) -> Vec<usize> {
        (0..self.delta.len())
            .filter(|&nu| self.delta[nu] > 0)
            .collect()
    }

    /// Admissible edge offsets in direction `nu`: `(d, N) = N / p^delta`.
    fn edge_choices(&self, nu: usize, quotient: bool) -> Vec<u64> {
        let p = self.modulus.prime(nu);
        let q = p.pow(self.delta[nu]);
        let base = self.modulus.value() / q;
        let mut out = Vec::new();
        for u in 1..q {
            if u % p == 0 {
                continue;
            }
            if quotient && u > q - u {
                continue;
            }
            out.push(self.modulus.mul(base, u));
        }
        out
    }

    /// All cuboids of this type. `quotient` collapses `d <-> -d` per direction.
    pub fn cuboids(&self, quotient: bool) -> Vec<Cuboid> {
        let active = self.active();
        let mut combos: Vec<Vec<u64>> = vec![vec![0; self.delta.len()]];
        for &nu in &active {
            let choices = self.edge_choices(nu, quotient);
            let mut next = Vec::with_capacity(combos.len() * choices.len());
            for d in &combos {
                for &c in &choices {
                    let mut d2 = d.clone();
                    d2[nu] = c;
                    next.push(d2);
                }
            }
            combos = next;
        }
        let mut out = Vec::with_capacity(self.modulus.value() as usize * combos.len());
        for c in 0..self.modulus.value() {
            for d in &combos {
                out.push(Cuboid { c, d: d.clone() });
            }
        }
        out
    }

    /// Signed, template-weighted vertex sum of `A` (given reduced mod `N`).
    pub fn eval(&self, a_mod_n: &Multiset, cuboid: &Cuboid) -> i64 {
        let m = &self.modulus;
        debug_assert_eq!(a_mod_n.modulus(), m);
        let active = self.active();
        let mut acc = 0i128;
        for mask in 0u32..(1 << active.len()) {
            let mut x = cuboid.c;
            let mut sign = 1i128;
            for (bit, &nu) in active.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    x = m.add(x, cuboid.d[nu]);
                    sign = -sign;
                }
            }
            for (t, w) in self.template.entries() {
                acc += sign * w as i128 * a_mod_n.weight(m.add(x, t)) as i128;
            }
        }
        i64::try_from(acc).expect("cuboid evaluation overflow")
    }

    /// Whether every cuboid of this type evaluates to zero on `A`.
    pub fn is_null(&self, a: &Multiset) -> Result<bool> {
        Ok(self.first_witness(a)?.is_none())
    }

    /// First cuboid with nonzero evaluation, if any.
    pub fn first_witness(&self, a: &Multiset) -> Result<Option<Cuboid>> {
        let reduced = if a.modulus() == &self.modulus {
            a.clone()
        } else {
            a.reduce_mod(self.modulus.value())?
        };
        for cuboid in self.cuboids(true) {
            if self.eval(&reduced, &cuboid) != 0 {
                return Ok(Some(cuboid));
            }
        }
        Ok(None)
    }
}

/// `A` is null for the given type.
pub fn type_null(t: &CuboidType, a: &Multiset) -> Result<bool> {
    t.is_null(a)
}

/// Cuboid-based equivalent of [`divides`]: `Phi_N | A` iff every standard
/// `N`-cuboid evaluates to zero.
pub fn cuboid_divides(n: u64, a: &Multiset) -> Result<bool> {
    if !a.modulus().is_divisor(n) {
        return Err(Error::NotADivisor {
            divisor: n,
            modulus: a.modulus().value(),
        });
    }
    let t = CuboidType::standard(Modulus::new(n)?);
    t.is_null(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(m: u64) -> Modulus {
        Modulus::new(m).unwrap()
    }

    fn set(m: u64, elems: &[u64]) -> Multiset {
        Multiset::from_set(z(m), elems).unwrap()
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic_poly(1).coeffs(), &[-1, 1]);
        assert_eq!(cyclotomic_poly(2).coeffs(), &[1, 1]);
        assert_eq!(cyclotomic_poly(3).coeffs(), &[1, 1, 1]);
        assert_eq!(cyclotomic_poly(4).coeffs(), &[1, 0, 1]);
        assert_eq!(cyclotomic_poly(6).coeffs(), &[1, -1, 1]);
        assert_eq!(cyclotomic_poly(9).coeffs(), &[1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(12).coeffs(), &[1, 0, -1, 0, 1]);
    }

    #[test]
    fn cyclotomic_degree_is_phi() {
        for s in [8u64, 15, 36, 60, 900] {
            let m = z(s);
            assert_eq!(cyclotomic_poly(s).degree(), Some(m.phi() as usize));
        }
    }

    #[test]
    fn coefficient_two_appears_at_order_105() {
        let c = cyclotomic_poly(105);
        assert_eq!(c.coeffs()[7], -2);
    }

    #[test]
    fn cyclotomic_product_is_power_minus_one() {
        for n in 1u64..=200 {
            let mut prod = IntPoly::new(vec![1]);
            for d in 1..=n {
                if n % d == 0 {
                    prod = prod.mul(&cyclotomic_poly(d));
                }
            }
            assert_eq!(prod, IntPoly::power_minus_one(n as usize), "n = {n}");
        }
        let mut prod = IntPoly::new(vec![1]);
        for &d in z(900).divisors() {
            prod = prod.mul(&cyclotomic_poly(d));
        }
        assert_eq!(prod, IntPoly::power_minus_one(900));
    }

    #[test]
    fn divides_examples() {
        let a = set(12, &[0, 1, 2]);
        assert!(divides(3, &a));
        assert!(!divides(2, &a));
        let b = set(12, &[0, 3, 6, 9]);
        assert!(divides(12, &b));
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(Spectrum::compute(&set(12, &[0, 1, 2])).elements(), &[3]);
        assert_eq!(Spectrum::compute(&set(12, &[0, 3, 6, 9])).elements(), &[2, 4]);
        assert_eq!(Spectrum::compute(&set(12, &[0])).elements(), &[] as &[u64]);
    }

    #[test]
    fn t1_examples() {
        assert!(check_t1(&set(12, &[0, 1, 2])));
        assert!(check_t1(&set(12, &[0, 3, 6, 9])));
        assert!(!check_t1(&set(12, &[0, 1, 3])));
    }

    #[test]
    fn t2_examples() {
        assert!(check_t2(&set(12, &[0, 1, 2, 3, 4, 5])).unwrap());
        assert!(check_t2(&set(12, &[0, 4, 8])).unwrap());
        assert!(!check_t2(&set(24, &[0, 1, 2, 4, 5, 6])).unwrap());
    }

    #[test]
    fn t2_rejects_many_primes() {
        // S_A spans four primes for the full interval in Z_210.
        let a = set(210, &(0..210).collect::<Vec<_>>());
        assert!(matches!(
            check_t2(&a),
            Err(Error::TooManyPrimes { max: 3, got: 4 })
        ));
    }

    #[test]
    fn standard_complement_examples() {
        let s = Spectrum::from_elements(z(12), vec![3]).unwrap();
        assert_eq!(standard_complement(&s).support(), vec![0, 4, 8]);
        let s = Spectrum::from_elements(z(12), vec![2, 4]).unwrap();
        assert_eq!(standard_complement(&s).support(), vec![0, 3, 6, 9]);
        let s = Spectrum::from_elements(z(12), vec![]).unwrap();
        assert_eq!(standard_complement(&s).support(), vec![0]);
    }

    #[test]
    fn standard_complement_is_a_thirty_grid_for_square_spectrum() {
        let s = Spectrum::from_elements(z(900), vec![4, 9, 25]).unwrap();
        let c = standard_complement(&s);
        assert_eq!(c.support(), z(900).grid(0, 30));
    }

    #[test]
    fn standard_complement_satisfies_t1_t2_and_spectrum() {
        for elements in [vec![2, 3], vec![4, 9, 25], vec![2, 4, 9, 5], vec![8, 9]] {
            let m = if elements.contains(&8) { z(72) } else { z(900) };
            let s = match Spectrum::from_elements(m, elements) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let c = standard_complement(&s);
            assert!(check_t1(&c));
            assert!(check_t2(&c).unwrap());
            assert_eq!(Spectrum::compute(&c), s);
        }
    }

    #[test]
    fn cuboid_examples() {
        let a = set(12, &[0, 1, 2]);
        assert!(!cuboid_divides(12, &a).unwrap());
        let t = CuboidType::standard(z(12));
        let w = t.first_witness(&a).unwrap().unwrap();
        assert_eq!(w, Cuboid { c: 0, d: vec![6, 4] });
        assert_eq!(t.eval(&a, &w), 1);

        assert!(cuboid_divides(12, &set(12, &[0, 3, 6, 9])).unwrap());
        assert!(cuboid_divides(5, &set(5, &[0, 1, 2, 3, 4])).unwrap());
    }

    #[test]
    fn fibered_sets_are_null_for_deeper_types() {
        // Phi_36 and Phi_18 both divide unions of step-12 fibers, which makes
        // them null for delta = (1, 2).
        let m = z(36);
        for roots in [vec![0u64], vec![0, 1], vec![0, 5, 7]] {
            let mut elems = Vec::new();
            for &r in &roots {
                elems.extend_from_slice(&m.fiber(r, 1));
            }
            let a = Multiset::from_set(m.clone(), &elems).unwrap();
            assert!(divides(36, &a) && divides(18, &a));
            let t = CuboidType::new(
                m.clone(),
                vec![2, 1],
                Multiset::from_set(m.clone(), &[0]).unwrap(),
            )
            .unwrap();
            assert!(t.is_null(&a).unwrap());
        }
    }

    #[test]
    fn empty_set_is_null() {
        let t = CuboidType::standard(z(36));
        assert!(t.is_null(&Multiset::empty(z(36))).unwrap());
    }

    #[test]
    fn rejects_empty_template() {
        let err = CuboidType::new(z(12), vec![1, 1], Multiset::empty(z(12)));
        assert!(err.is_err());
    }

    fn arb_multiset(m: u64) -> impl Strategy<Value = Multiset> {
        prop::collection::vec((0..m, -3i64..4), 0..14)
            .prop_map(move |pairs| Multiset::from_weights(Modulus::new(m).unwrap(), &pairs))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn quotiented_enumeration_matches_full(a in arb_multiset(36)) {
            for &n in z(36).divisors() {
                let t = CuboidType::standard(z(n));
                let reduced = a.reduce_mod(n).unwrap();
                let full_null = t
                    .cuboids(false)
                    .iter()
                    .all(|c| t.eval(&reduced, c) == 0);
                prop_assert_eq!(t.is_null(&a).unwrap(), full_null);
            }
        }

        #[test]
        fn cuboid_matches_polynomial_divisibility(a in arb_multiset(36)) {
            for &n in z(36).divisors() {
                prop_assert_eq!(cuboid_divides(n, &a).unwrap(), divides(n, &a), "n = {}", n);
            }
        }

        #[test]
        fn grid_divisibility_lifts(a in arb_multiset(36), s_idx in 0usize..9, m_idx in 0usize..9) {
            let divisors = z(36).divisors().to_vec();
            let s = divisors[s_idx % divisors.len()];
            let step = divisors[m_idx % divisors.len()];
            if divides_on_grids(s, &a, step) {
                prop_assert!(divides(s, &a));
            }
        }

        #[test]
        fn divides_matches_direct_polynomial_remainder(a in arb_multiset(60)) {
            for &s in z(60).divisors() {
                let direct = IntPoly::from_multiset(&a)
                    .is_divisible_by(&cyclotomic_poly(s));
                prop_assert_eq!(divides(s, &a), direct, "s = {}", s);
            }
        }
    }
}
