//! Divisor isometries of `Z_M`: bijections preserving all difference classes
//! `(x - x', M)`. Generated by translations, unit dilations, and plane
//! exchanges; every constructed map re-verifies the defining law.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::zmod::Modulus;

const EXHAUSTIVE_LAW_CAP: u64 = 10_000;
const LAW_SAMPLES: u64 = 10_000;
const LAW_SEED: u64 = 0x1afe_77ab_3355_9911;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsometryTag {
    Translation(u64),
    Dilation(u64),
    PlaneExchange { c: u64, c_prime: u64, nu: usize, alpha: u32 },
    Composite,
}

/// A divisor isometry as an explicit permutation table.
#[derive(Clone, Debug)]
pub struct IsometryMap {
    modulus: Modulus,
    table: Vec<u64>,
    tag: IsometryTag,
}

fn verify_law(modulus: &Modulus, table: &[u64]) -> Result<()> {
    let m = modulus.value();
    let mut seen = vec![false; m as usize];
    for &y in table {
        if y >= m || seen[y as usize] {
            return Err(Error::InvalidIsometry("table is not a bijection".into()));
        }
        seen[y as usize] = true;
    }
    let check = |x: u64, y: u64| -> bool {
        modulus.divisor_class(modulus.sub(table[x as usize], table[y as usize]))
            == modulus.divisor_class(modulus.sub(x, y))
    };
    if m <= EXHAUSTIVE_LAW_CAP {
        for x in 0..m {
            for y in x + 1..m {
                if !check(x, y) {
                    return Err(Error::InvalidIsometry(format!(
                        "class of {x} - {y} not preserved"
                    )));
                }
            }
        }
    } else {
        let mut rng = ChaCha12Rng::seed_from_u64(LAW_SEED);
        for _ in 0..LAW_SAMPLES {
            let x = rng.random_range(0..m);
            let y = rng.random_range(0..m);
            if !check(x, y) {
                return Err(Error::InvalidIsometry(format!(
                    "class of {x} - {y} not preserved"
                )));
            }
        }
    }
    Ok(())
}

impl IsometryMap {
    fn build(modulus: Modulus, table: Vec<u64>, tag: IsometryTag) -> Result<Self> {
        verify_law(&modulus, &table)?;
        Ok(IsometryMap { modulus, table, tag })
    }

    pub fn identity(modulus: Modulus) -> Self {
        let table = (0..modulus.value()).collect();
        IsometryMap {
            modulus,
            table,
            tag: IsometryTag::Translation(0),
        }
    }

    /// `tau_c : x -> x - c`.
    pub fn translation(modulus: Modulus, c: u64) -> Self {
        let table = (0..modulus.value()).map(|x| modulus.sub(x, c)).collect();
        IsometryMap {
            modulus,
            table,
            tag: IsometryTag::Translation(c),
        }
    }

    /// `psi_r : x -> r x` for a unit `r`.
    pub fn dilation(modulus: Modulus, r: u64) -> Result<Self> {
        if !modulus.is_unit(r) {
            return Err(Error::NotAUnit(r, modulus.value()));
        }
        let table = (0..modulus.value()).map(|x| modulus.mul(r, x)).collect();
        let tag = IsometryTag::Dilation(r % modulus.value());
        IsometryMap { modulus, table, tag }.verified()
    }

    fn verified(self) -> Result<Self> {
        verify_law(&self.modulus, &self.table)?;
        Ok(self)
    }

    /// Exchange of the planes `Pi(c, p_nu^{n_nu - alpha})` and
    /// `Pi(c', p_nu^{n_nu - alpha})` by `x -> x +/- (c' - c)`.
    ///
    /// Requires `(c - c', M) = M / p_nu^{alpha + 1}` with `0 <= alpha < n_nu`.
    pub fn plane_exchange(
        modulus: Modulus,
        c: u64,
        c_prime: u64,
        nu: usize,
        alpha: u32,
    ) -> Result<Self> {
        if nu >= modulus.num_primes() || alpha >= modulus.exponent(nu) {
            return Err(Error::InvalidIsometry(format!(
                "no plane of depth {alpha} in direction {nu}"
            )));
        }
        let p = modulus.prime(nu);
        let want = modulus.value() / p.pow(alpha + 1);
        let got = modulus.divisor_class(modulus.sub(c, c_prime));
        if got != want {
            return Err(Error::InvalidIsometry(format!(
                "(c - c', M) = {got}, need {want}"
            )));
        }
        let depth = modulus.exponent(nu) - alpha;
        let shift = modulus.sub(c_prime, c);
        let table = (0..modulus.value())
            .map(|x| {
                if modulus.in_plane(x, c, nu, depth) {
                    modulus.add(x, shift)
                } else if modulus.in_plane(x, c_prime, nu, depth) {
                    modulus.sub(x, shift)
                } else {
                    x
                }
            })
            .collect();
        IsometryMap::build(
            modulus,
            table,
            IsometryTag::PlaneExchange { c, c_prime, nu, alpha },
        )
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn tag(&self) -> &IsometryTag {
        &self.tag
    }

    #[inline]
    pub fn apply_elem(&self, x: u64) -> u64 {
        self.table[self.modulus.reduce(x) as usize]
    }

    /// Image of a multiset, weights carried along.
    pub fn apply(&self, a: &Multiset) -> Multiset {
        assert_eq!(a.modulus(), &self.modulus);
        Multiset::from_weights(
            self.modulus.clone(),
            &a.entries()
                .into_iter()
                .map(|(x, w)| (self.apply_elem(x), w))
                .collect::<Vec<_>>(),
        )
    }

    /// `self` after `other`: `x -> self(other(x))`.
    pub fn compose(&self, other: &IsometryMap) -> IsometryMap {
        assert_eq!(self.modulus, other.modulus);
        let table = other.table.iter().map(|&x| self.table[x as usize]).collect();
        IsometryMap {
            modulus: self.modulus.clone(),
            table,
            tag: IsometryTag::Composite,
        }
    }

    pub fn inverse(&self) -> IsometryMap {
        let mut table = vec![0u64; self.table.len()];
        for (x, &y) in self.table.iter().enumerate() {
            table[y as usize] = x as u64;
        }
        let tag = match self.tag {
            IsometryTag::Translation(c) => IsometryTag::Translation(self.modulus.neg(c)),
            IsometryTag::Dilation(r) => {
                IsometryTag::Dilation(self.modulus.inverse(r).expect("unit"))
            }
            ref t @ IsometryTag::PlaneExchange { .. } => t.clone(),
            IsometryTag::Composite => IsometryTag::Composite,
        };
        IsometryMap {
            modulus: self.modulus.clone(),
            table,
            tag,
        }
    }
}

/// `R_{x,x'} = {r in R : r x = x'}`.
///
/// Both elements must share the divisor class `m`; the result has exactly
/// `phi(M)/phi(M/m)` members and is the intersection of a grid with `R`.
pub fn dilation_stabilizer(modulus: &Modulus, x: u64, x_prime: u64) -> Result<Vec<u64>> {
    let m = modulus.divisor_class(x);
    if m != modulus.divisor_class(x_prime) {
        return Err(Error::InvalidArgument(format!(
            "no unit maps class {m} to class {}",
            modulus.divisor_class(x_prime)
        )));
    }
    let out: Vec<u64> = modulus
        .units()
        .iter()
        .copied()
        .filter(|&r| modulus.mul(r, x) == modulus.reduce(x_prime))
        .collect();
    let expected = modulus.phi() / modulus.phi_of(modulus.value() / m);
    assert_eq!(out.len() as u64, expected, "stabilizer cardinality");
    if let Some(&r0) = out.first() {
        let grid_step = modulus.value() / m;
        assert!(
            out.iter().all(|&r| modulus.sub(r, r0) % grid_step == 0),
            "stabilizer must lie on a single grid"
        );
    }
    Ok(out)
}

/// A single unit mapping `x_nu -> x'_nu` for every listed pair, if one exists.
pub fn common_dilation(modulus: &Modulus, pairs: &[(u64, u64)]) -> Result<Option<u64>> {
    let mut candidates: Option<Vec<u64>> = None;
    for &(x, x_prime) in pairs {
        let stab = dilation_stabilizer(modulus, x, x_prime)?;
        candidates = Some(match candidates {
            None => stab,
            Some(prev) => prev.into_iter().filter(|r| stab.contains(r)).collect(),
        });
    }
    Ok(candidates.and_then(|c| c.first().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(m: u64) -> Modulus {
        Modulus::new(m).unwrap()
    }

    fn set(m: u64, elems: &[u64]) -> Multiset {
        Multiset::from_set(z(m), elems).unwrap()
    }

    #[test]
    fn translation_moves_backwards() {
        let t = IsometryMap::translation(z(12), 3);
        assert_eq!(t.apply(&set(12, &[0, 1, 2])).support(), vec![9, 10, 11]);
    }

    #[test]
    fn dilation_requires_unit() {
        assert!(IsometryMap::dilation(z(12), 5).is_ok());
        assert!(IsometryMap::dilation(z(12), 4).is_err());
    }

    #[test]
    fn plane_exchange_example() {
        let e = IsometryMap::plane_exchange(z(12), 0, 6, 0, 0).unwrap();
        // Swaps {0,4,8} with {6,10,2}; odd residues stay put.
        assert_eq!(e.apply_elem(0), 6);
        assert_eq!(e.apply_elem(4), 10);
        assert_eq!(e.apply_elem(8), 2);
        assert_eq!(e.apply_elem(6), 0);
        assert_eq!(e.apply_elem(1), 1);
        assert_eq!(e.apply_elem(3), 3);
        let ee = e.compose(&e);
        assert_eq!((0..12).map(|x| ee.apply_elem(x)).collect::<Vec<_>>(),
                   (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn plane_exchange_rejects_wrong_spacing() {
        assert!(IsometryMap::plane_exchange(z(12), 0, 4, 0, 0).is_err());
        assert!(IsometryMap::plane_exchange(z(12), 0, 3, 0, 0).is_err());
        assert!(IsometryMap::plane_exchange(z(12), 0, 3, 0, 1).is_ok());
    }

    #[test]
    fn deeper_plane_exchange_in_z36() {
        // alpha = 1 for p = 2: spacing must be 36/4 = 9, and the exchanged
        // planes are the full even and odd classes.
        let e = IsometryMap::plane_exchange(z(36), 0, 9, 0, 1).unwrap();
        assert_eq!(e.apply_elem(0), 9);
        assert_eq!(e.apply_elem(4), 13);
        assert_eq!(e.apply_elem(2), 11);
        assert_eq!(e.apply_elem(9), 0);
        assert_eq!(e.apply_elem(1), 28);
    }

    #[test]
    fn stabilizer_examples() {
        let m = z(12);
        assert_eq!(dilation_stabilizer(&m, 0, 0).unwrap(), vec![1, 5, 7, 11]);
        assert_eq!(dilation_stabilizer(&m, 4, 8).unwrap(), vec![5, 11]);
        assert_eq!(dilation_stabilizer(&m, 1, 5).unwrap(), vec![5]);
        assert!(dilation_stabilizer(&m, 4, 3).is_err());
    }

    #[test]
    fn common_dilation_over_coordinates() {
        let m = z(36);
        // (18, 18) pins r mod 2-part lightly; (4, 8) needs 4r = 8 mod 36.
        let r = common_dilation(&m, &[(18, 18), (4, 8)]).unwrap();
        assert!(r.is_some());
        let r = r.unwrap();
        assert!(m.is_unit(r));
        assert_eq!(m.mul(r, 18), 18);
        assert_eq!(m.mul(r, 4), 8);
    }

    #[test]
    fn isometries_preserve_tilings() {
        use crate::tiling::{verify_tiling, TilingInstance};
        let t = TilingInstance::from_sets(z(12), &[0, 1, 2], &[0, 3, 6, 9]).unwrap();
        let maps = vec![
            IsometryMap::translation(z(12), 7),
            IsometryMap::dilation(z(12), 5).unwrap(),
            IsometryMap::plane_exchange(z(12), 0, 6, 0, 0).unwrap(),
            IsometryMap::plane_exchange(z(12), 1, 5, 1, 0).unwrap(),
        ];
        for psi in &maps {
            assert!(verify_tiling(&psi.apply(t.a()), t.b()));
        }
        let comp = maps[0].compose(&maps[2]).compose(&maps[1].inverse());
        assert!(verify_tiling(&comp.apply(t.a()), t.b()));
    }
}
