//! Arithmetic and coordinate geometry of `Z_M`.
//!
//! A [`Modulus`] caches the factorization of `M` together with the divisor
//! lattice and the mixed-radix coordinate system `x -> (pi_0(x), ..,
//! pi_{K-1}(x))` with `pi_nu(x) = x * (M/p_nu^{n_nu})^{-1} mod p_nu^{n_nu}`.
//! Fibers, lines, planes and grids are all expressed through it.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use num_integer::gcd;

use crate::error::{Error, Result};

const MAX_MODULUS: u64 = 1 << 32;

/// Largest modulus for which we materialize the full unit group.
const MAX_UNIT_TABLE: u64 = 4_000_000;

#[derive(Debug)]
struct ModulusData {
    m: u64,
    /// `(p, n)` pairs with `p` ascending.
    primes: Vec<(u64, u32)>,
    /// All divisors of `m`, ascending.
    divisors: Vec<u64>,
    divisor_index: HashMap<u64, usize>,
    /// `(M/p^n)^{-1} mod p^n` per direction.
    coord_unit: Vec<u64>,
    units: OnceLock<Vec<u64>>,
}

/// A cyclic group `Z_M` with cached structure. Cloning is cheap.
#[derive(Clone)]
pub struct Modulus {
    data: Arc<ModulusData>,
}

impl std::fmt::Debug for Modulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Z_{}", self.data.m)
    }
}

impl PartialEq for Modulus {
    fn eq(&self, other: &Self) -> bool {
        self.data.m == other.data.m
    }
}
impl Eq for Modulus {}

fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut n = 0;
            while m % p == 0 {
                m /= p;
                n += 1;
            }
            out.push((p, n));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

fn pow_u64(p: u64, n: u32) -> u64 {
    p.pow(n)
}

/// Modular inverse by extended Euclid.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

impl Modulus {
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 || m > MAX_MODULUS {
            return Err(Error::BadModulus(m));
        }
        let primes = factorize(m);
        let mut divisors = vec![1u64];
        for &(p, n) in &primes {
            let prev = divisors.clone();
            for e in 1..=n {
                let q = pow_u64(p, e);
                divisors.extend(prev.iter().map(|d| d * q));
            }
        }
        divisors.sort_unstable();
        let divisor_index = divisors
            .iter()
            .enumerate()
            .map(|(i, &d)| (d, i))
            .collect();
        let coord_unit = primes
            .iter()
            .map(|&(p, n)| {
                let q = pow_u64(p, n);
                mod_inverse((m / q) % q, q).expect("coprime by construction")
            })
            .collect();
        Ok(Modulus {
            data: Arc::new(ModulusData {
                m,
                primes,
                divisors,
                divisor_index,
                coord_unit,
                units: OnceLock::new(),
            }),
        })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.data.m
    }

    /// Number of distinct prime factors.
    #[inline]
    pub fn num_primes(&self) -> usize {
        self.data.primes.len()
    }

    pub fn primes(&self) -> &[(u64, u32)] {
        &self.data.primes
    }

    #[inline]
    pub fn prime(&self, nu: usize) -> u64 {
        self.data.primes[nu].0
    }

    #[inline]
    pub fn exponent(&self, nu: usize) -> u32 {
        self.data.primes[nu].1
    }

    /// `p_nu^{n_nu}`.
    #[inline]
    pub fn prime_power(&self, nu: usize) -> u64 {
        let (p, n) = self.data.primes[nu];
        pow_u64(p, n)
    }

    pub fn direction_of_prime(&self, p: u64) -> Option<usize> {
        self.data.primes.iter().position(|&(q, _)| q == p)
    }

    /// `M_nu = M / p_nu^{n_nu}`, the part of `M` coprime to `p_nu`.
    #[inline]
    pub fn coprime_part(&self, nu: usize) -> u64 {
        self.data.m / self.prime_power(nu)
    }

    /// `M / p_nu`, the step of an `M`-fiber in the `p_nu` direction.
    #[inline]
    pub fn fiber_step(&self, nu: usize) -> u64 {
        self.data.m / self.prime(nu)
    }

    pub fn divisors(&self) -> &[u64] {
        &self.data.divisors
    }

    pub fn is_divisor(&self, d: u64) -> bool {
        d != 0 && self.data.m % d == 0
    }

    pub fn divisor_index(&self, d: u64) -> Option<usize> {
        self.data.divisor_index.get(&d).copied()
    }

    /// The divisor class `(x, M)`, with `(0, M) = M`.
    #[inline]
    pub fn divisor_class(&self, x: u64) -> u64 {
        let r = x % self.data.m;
        if r == 0 {
            self.data.m
        } else {
            gcd(r, self.data.m)
        }
    }

    /// `p_nu`-adic valuation of the divisor class of `x` (capped at `n_nu`).
    pub fn valuation(&self, nu: usize, x: u64) -> u32 {
        let p = self.prime(nu);
        let mut d = self.divisor_class(x);
        let mut v = 0;
        while d % p == 0 {
            d /= p;
            v += 1;
        }
        v
    }

    /// Euler phi of a divisor of `M`.
    pub fn phi_of(&self, d: u64) -> u64 {
        debug_assert!(self.is_divisor(d));
        let mut out = 1u64;
        for &(p, _) in &self.data.primes {
            if d % p == 0 {
                let mut q = p;
                while d % (q * p) == 0 {
                    q *= p;
                }
                out *= q - q / p;
            }
        }
        out
    }

    pub fn phi(&self) -> u64 {
        self.phi_of(self.data.m)
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.data.m
    }

    #[inline]
    pub fn add(&self, x: u64, y: u64) -> u64 {
        let s = (x % self.data.m) + (y % self.data.m);
        if s >= self.data.m {
            s - self.data.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, x: u64, y: u64) -> u64 {
        let (x, y) = (x % self.data.m, y % self.data.m);
        if x >= y {
            x - y
        } else {
            x + self.data.m - y
        }
    }

    #[inline]
    pub fn neg(&self, x: u64) -> u64 {
        let r = x % self.data.m;
        if r == 0 {
            0
        } else {
            self.data.m - r
        }
    }

    #[inline]
    pub fn mul(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.data.m as u128) as u64
    }

    pub fn is_unit(&self, r: u64) -> bool {
        gcd(r % self.data.m, self.data.m) == 1 || self.data.m == 1
    }

    pub fn inverse(&self, r: u64) -> Option<u64> {
        mod_inverse(r % self.data.m, self.data.m)
    }

    /// All units of `Z_M`, ascending. Materialized once; only for small `M`.
    pub fn units(&self) -> &[u64] {
        assert!(
            self.data.m <= MAX_UNIT_TABLE,
            "unit table requested for M = {}",
            self.data.m
        );
        self.data.units.get_or_init(|| {
            (0..self.data.m).filter(|&r| self.is_unit(r)).collect()
        })
    }

    /// Coordinate `pi_nu(x)`, an element of `Z_{p_nu^{n_nu}}`.
    pub fn coord(&self, nu: usize, x: u64) -> u64 {
        let q = self.prime_power(nu);
        let u = self.data.coord_unit[nu];
        ((x % q) as u128 * u as u128 % q as u128) as u64
    }

    /// All coordinates of `x`, one per prime direction.
    pub fn array_coords(&self, x: u64) -> Vec<u64> {
        (0..self.num_primes()).map(|nu| self.coord(nu, x)).collect()
    }

    /// Inverse of [`Modulus::array_coords`]: `x = sum_nu c_nu * M_nu`.
    pub fn from_coords(&self, coords: &[u64]) -> u64 {
        assert_eq!(coords.len(), self.num_primes());
        let mut x = 0u64;
        for (nu, &c) in coords.iter().enumerate() {
            x = self.add(x, self.mul(c, self.coprime_part(nu)));
        }
        x
    }

    /// `{x + t * step : 0 <= t < len}` as a sorted set.
    pub fn progression(&self, x: u64, step: u64, len: u64) -> Vec<u64> {
        let mut out: Vec<u64> = (0..len).map(|t| self.add(x, self.mul(t, step))).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The `M`-fiber `x * F_nu`: step `M/p_nu`, length `p_nu`.
    pub fn fiber(&self, x: u64, nu: usize) -> Vec<u64> {
        self.progression(x, self.fiber_step(nu), self.prime(nu))
    }

    /// The line through `x` in direction `nu`: step `M_nu`, length `p_nu^{n_nu}`.
    pub fn line(&self, x: u64, nu: usize) -> Vec<u64> {
        self.progression(x, self.coprime_part(nu), self.prime_power(nu))
    }

    /// Membership in the plane `Pi(x, p_nu^alpha)`.
    pub fn in_plane(&self, y: u64, x: u64, nu: usize, alpha: u32) -> bool {
        debug_assert!(alpha >= 1 && alpha <= self.exponent(nu));
        let q = pow_u64(self.prime(nu), alpha);
        self.coord(nu, y) % q == self.coord(nu, x) % q
    }

    /// The plane `Pi(x, p_nu^alpha)` as a sorted set. Linear scan, small `M` only.
    pub fn plane(&self, x: u64, nu: usize, alpha: u32) -> Vec<u64> {
        (0..self.data.m)
            .filter(|&y| self.in_plane(y, x, nu, alpha))
            .collect()
    }

    /// The grid `Lambda(x, d) = x + d Z_M` for a divisor `d` of `M`.
    pub fn grid(&self, x: u64, d: u64) -> Vec<u64> {
        debug_assert!(self.is_divisor(d));
        self.progression(x, d, self.data.m / d)
    }

    /// `D(N) = prod p^{max(alpha_p - 1, 0)}` over the factorization of the divisor `N`.
    pub fn dgrid_step(&self, n: u64) -> u64 {
        debug_assert!(self.is_divisor(n));
        let mut out = 1u64;
        for &(p, _) in &self.data.primes {
            if n % p == 0 {
                let mut q = 1;
                while n % (q * p * p) == 0 {
                    q *= p;
                }
                out *= q;
            }
        }
        out
    }
}
