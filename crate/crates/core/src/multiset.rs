//! Weighted multisets over `Z_M`, the working representation for mask
//! polynomials `A(X) = sum_a w_A(a) X^a`.
//!
//! Weights are signed so that difference templates (cuboids) and convolution
//! identities can be expressed directly. Storage switches between a dense
//! vector and a sorted map depending on support size.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::zmod::Modulus;

/// Moduli above this size never use the dense representation.
const DENSE_CAP: u64 = 1 << 22;

#[derive(Clone, Debug)]
enum Repr {
    Dense(Vec<i64>),
    Sparse(BTreeMap<u64, i64>),
}

/// An integer-weighted multiset over `Z_M`.
#[derive(Clone, Debug)]
pub struct Multiset {
    modulus: Modulus,
    repr: Repr,
}

impl Multiset {
    pub fn empty(modulus: Modulus) -> Self {
        Multiset {
            modulus,
            repr: Repr::Sparse(BTreeMap::new()),
        }
    }

    /// Builds a genuine set; duplicate elements are rejected.
    pub fn from_set(modulus: Modulus, elements: &[u64]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &e in elements {
            let x = modulus.reduce(e);
            if map.insert(x, 1i64).is_some() {
                return Err(Error::DuplicateElement { element: x });
            }
        }
        let mut out = Multiset {
            modulus,
            repr: Repr::Sparse(map),
        };
        out.normalize();
        Ok(out)
    }

    /// Accumulates `(element, weight)` pairs.
    pub fn from_weights(modulus: Modulus, pairs: &[(u64, i64)]) -> Self {
        let mut map: BTreeMap<u64, i64> = BTreeMap::new();
        for &(e, w) in pairs {
            let x = modulus.reduce(e);
            let entry = map.entry(x).or_insert(0);
            *entry = entry.checked_add(w).expect("weight overflow");
            if *entry == 0 {
                map.remove(&x);
            }
        }
        let mut out = Multiset {
            modulus,
            repr: Repr::Sparse(map),
        };
        out.normalize();
        out
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn weight(&self, x: u64) -> i64 {
        let x = self.modulus.reduce(x);
        match &self.repr {
            Repr::Dense(v) => v[x as usize],
            Repr::Sparse(m) => m.get(&x).copied().unwrap_or(0),
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        self.weight(x) != 0
    }

    /// Sorted `(element, weight)` pairs with nonzero weight.
    pub fn entries(&self) -> Vec<(u64, i64)> {
        match &self.repr {
            Repr::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0)
                .map(|(x, &w)| (x as u64, w))
                .collect(),
            Repr::Sparse(m) => m.iter().map(|(&x, &w)| (x, w)).collect(),
        }
    }

    /// Sorted support.
    pub fn support(&self) -> Vec<u64> {
        self.entries().into_iter().map(|(x, _)| x).collect()
    }

    pub fn support_len(&self) -> usize {
        match &self.repr {
            Repr::Dense(v) => v.iter().filter(|&&w| w != 0).count(),
            Repr::Sparse(m) => m.len(),
        }
    }

    /// `A(1)`, the total mass.
    pub fn total_mass(&self) -> i64 {
        let mut acc = 0i64;
        match &self.repr {
            Repr::Dense(v) => {
                for &w in v {
                    acc = acc.checked_add(w).expect("mass overflow");
                }
            }
            Repr::Sparse(m) => {
                for &w in m.values() {
                    acc = acc.checked_add(w).expect("mass overflow");
                }
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.support_len() == 0
    }

    pub fn is_set(&self) -> bool {
        match &self.repr {
            Repr::Dense(v) => v.iter().all(|&w| w == 0 || w == 1),
            Repr::Sparse(m) => m.values().all(|&w| w == 1),
        }
    }

    pub fn to_set(&self) -> Result<Vec<u64>> {
        if let Some((x, w)) = self.entries().into_iter().find(|&(_, w)| w != 1) {
            return Err(Error::NotASet { element: x, weight: w });
        }
        Ok(self.support())
    }

    fn normalize(&mut self) {
        let m = self.modulus.value();
        let want_dense = m <= DENSE_CAP && (self.support_len() as u64) * 4 > m;
        match (&self.repr, want_dense) {
            (Repr::Sparse(map), true) => {
                let mut v = vec![0i64; m as usize];
                for (&x, &w) in map {
                    v[x as usize] = w;
                }
                self.repr = Repr::Dense(v);
            }
            (Repr::Dense(v), false) => {
                let map = v
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w != 0)
                    .map(|(x, &w)| (x as u64, w))
                    .collect();
                self.repr = Repr::Sparse(map);
            }
            _ => {}
        }
    }

    fn from_entries(modulus: Modulus, entries: impl IntoIterator<Item = (u64, i64)>) -> Self {
        let mut map: BTreeMap<u64, i64> = BTreeMap::new();
        for (x, w) in entries {
            let x = modulus.reduce(x);
            let entry = map.entry(x).or_insert(0);
            *entry = entry.checked_add(w).expect("weight overflow");
            if *entry == 0 {
                map.remove(&x);
            }
        }
        let mut out = Multiset {
            modulus,
            repr: Repr::Sparse(map),
        };
        out.normalize();
        out
    }

    pub fn translate(&self, c: u64) -> Self {
        let m = self.modulus.clone();
        Multiset::from_entries(
            m.clone(),
            self.entries().into_iter().map(|(x, w)| (m.add(x, c), w)),
        )
    }

    /// `x -> r x`. Non-unit `r` merges weights.
    pub fn dilate(&self, r: u64) -> Self {
        let m = self.modulus.clone();
        Multiset::from_entries(
            m.clone(),
            self.entries().into_iter().map(|(x, w)| (m.mul(x, r), w)),
        )
    }

    /// `x -> -x`.
    pub fn reflect(&self) -> Self {
        let m = self.modulus.clone();
        Multiset::from_entries(
            m.clone(),
            self.entries().into_iter().map(|(x, w)| (m.neg(x), w)),
        )
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Multiset::empty(self.modulus.clone());
        }
        Multiset::from_entries(
            self.modulus.clone(),
            self.entries()
                .into_iter()
                .map(|(x, w)| (x, w.checked_mul(k).expect("weight overflow"))),
        )
    }

    fn check_same_modulus(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.value(),
                other.modulus.value(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_modulus(other)?;
        Ok(Multiset::from_entries(
            self.modulus.clone(),
            self.entries().into_iter().chain(other.entries()),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1))
    }

    /// Convolution: `(A * B)(x) = sum_y A(y) B(x - y)`, the multiset sum `A + B`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_same_modulus(other)?;
        let m = self.modulus.clone();
        let mut acc: BTreeMap<u64, i128> = BTreeMap::new();
        for (x, wx) in self.entries() {
            for (y, wy) in other.entries() {
                *acc.entry(m.add(x, y)).or_insert(0) += wx as i128 * wy as i128;
            }
        }
        Ok(Multiset::from_entries(
            m,
            acc.into_iter()
                .filter(|&(_, w)| w != 0)
                .map(|(x, w)| (x, i64::try_from(w).expect("weight overflow"))),
        ))
    }

    /// Pushes weights down to `Z_N` for a divisor `N` of `M`.
    pub fn reduce_mod(&self, n: u64) -> Result<Self> {
        if !self.modulus.is_divisor(n) {
            return Err(Error::NotADivisor {
                divisor: n,
                modulus: self.modulus.value(),
            });
        }
        let target = Modulus::new(n)?;
        Ok(Multiset::from_entries(
            target,
            self.entries().into_iter().map(|(x, w)| (x % n, w)),
        ))
    }

    /// Keeps only the weights on the listed elements.
    pub fn restrict_to(&self, elements: &[u64]) -> Self {
        let m = self.modulus.clone();
        Multiset::from_entries(
            m.clone(),
            elements
                .iter()
                .map(|&e| m.reduce(e))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .map(|x| (x, self.weight(x))),
        )
    }

    pub fn filtered(&self, mut keep: impl FnMut(u64) -> bool) -> Self {
        Multiset::from_entries(
            self.modulus.clone(),
            self.entries().into_iter().filter(|&(x, _)| keep(x)),
        )
    }

    /// `sum_x w_A(x) w_B(x)`.
    pub fn dot(&self, other: &Self) -> Result<i64> {
        self.check_same_modulus(other)?;
        let mut acc = 0i128;
        for (x, w) in self.entries() {
            acc += w as i128 * other.weight(x) as i128;
        }
        i64::try_from(acc).map_err(|_| Error::Overflow("dot product"))
    }

    pub fn content_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.modulus.value().hash(&mut h);
        for (x, w) in self.entries() {
            (x, w).hash(&mut h);
        }
        h.finish()
    }
}

impl PartialEq for Multiset {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.entries() == other.entries()
    }
}
impl Eq for Multiset {}

impl Hash for Multiset {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.modulus.value().hash(state);
        for e in self.entries() {
            e.hash(state);
        }
    }
}
