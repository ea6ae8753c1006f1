//! Tiling verification and the divisor-set criterion.

use num_integer::gcd;

use crate::cyclotomic::{divides, Spectrum};
use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::zmod::Modulus;

/// Moduli above this size cannot be verified by coverage counting here.
const MAX_VERIFY: u64 = 1 << 24;

/// Whether `A + B = Z_M` with every residue hit exactly once.
pub fn verify_tiling(a: &Multiset, b: &Multiset) -> bool {
    assert_eq!(a.modulus(), b.modulus(), "mismatched moduli");
    let m = a.modulus();
    let mv = m.value();
    assert!(mv <= MAX_VERIFY, "modulus too large for coverage check");
    if !a.is_set() || !b.is_set() {
        return false;
    }
    if a.support_len() as u128 * b.support_len() as u128 != mv as u128 {
        return false;
    }
    let mut seen = vec![false; mv as usize];
    for &x in &a.support() {
        for &y in &b.support() {
            let z = m.add(x, y) as usize;
            if seen[z] {
                return false;
            }
            seen[z] = true;
        }
    }
    true
}

/// The polynomial form of the tiling condition: `|A||B| = M` and
/// `Phi_s | A(X)B(X)` for every `s | M`, `s > 1`.
pub fn poly_criterion(a: &Multiset, b: &Multiset) -> bool {
    let m = a.modulus();
    if a.total_mass() as u128 * b.total_mass() as u128 != m.value() as u128 {
        return false;
    }
    let prod = match a.convolve(b) {
        Ok(p) => p,
        Err(_) => return false,
    };
    m.divisors()
        .iter()
        .filter(|&&s| s > 1)
        .all(|&s| divides(s, &prod))
}

/// `Div_N(A) = {(a - a', N) : a, a' in A}`, ascending. Always contains `N`.
pub fn divisor_set(a: &Multiset, n: u64) -> Vec<u64> {
    let m = a.modulus();
    let support = a.support();
    let mut out = Vec::new();
    for (i, &x) in support.iter().enumerate() {
        for &y in &support[i..] {
            let d = m.sub(y, x) % n;
            out.push(if d == 0 { n } else { gcd(d, n) });
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Sands' criterion: `|A||B| = M` and `Div(A)` meets `Div(B)` only in `M`.
pub fn sands_check(a: &Multiset, b: &Multiset) -> bool {
    assert_eq!(a.modulus(), b.modulus(), "mismatched moduli");
    let m = a.modulus().value();
    if !a.is_set() || !b.is_set() {
        return false;
    }
    if a.support_len() as u128 * b.support_len() as u128 != m as u128 {
        return false;
    }
    let div_a = divisor_set(a, m);
    let div_b = divisor_set(b, m);
    div_a.iter().all(|d| *d == m || !div_b.contains(d))
}

/// A verified tiling `A + B = Z_M` with cached divisor sets, spectra, and
/// the decomposition table `z -> (a, b)`.
#[derive(Clone, Debug)]
pub struct TilingInstance {
    modulus: Modulus,
    a: Multiset,
    b: Multiset,
    div_a: Vec<u64>,
    div_b: Vec<u64>,
    spec_a: Spectrum,
    spec_b: Spectrum,
    decomp: Vec<(u64, u64)>,
}

impl TilingInstance {
    pub fn new(a: Multiset, b: Multiset) -> Result<Self> {
        if a.modulus() != b.modulus() {
            return Err(Error::ModulusMismatch(
                a.modulus().value(),
                b.modulus().value(),
            ));
        }
        let modulus = a.modulus().clone();
        let mv = modulus.value();
        if mv > MAX_VERIFY {
            return Err(Error::BadModulus(mv));
        }
        a.to_set().map_err(|_| Error::NotATiling("A is not a set".into()))?;
        b.to_set().map_err(|_| Error::NotATiling("B is not a set".into()))?;
        if a.is_zero() || b.is_zero() {
            return Err(Error::NotATiling("empty factor".into()));
        }
        if a.support_len() as u128 * b.support_len() as u128 != mv as u128 {
            return Err(Error::NotATiling(format!(
                "|A| * |B| = {} != {}",
                a.support_len() * b.support_len(),
                mv
            )));
        }
        let mut decomp = vec![None; mv as usize];
        for &x in &a.support() {
            for &y in &b.support() {
                let z = modulus.add(x, y);
                if decomp[z as usize].is_some() {
                    return Err(Error::NotATiling(format!("{z} covered twice")));
                }
                decomp[z as usize] = Some((x, y));
            }
        }
        let decomp = decomp.into_iter().map(|p| p.expect("full coverage")).collect();
        let div_a = divisor_set(&a, mv);
        let div_b = divisor_set(&b, mv);
        debug_assert!(div_a.iter().all(|d| *d == mv || !div_b.contains(d)));
        let spec_a = Spectrum::compute(&a);
        let spec_b = Spectrum::compute(&b);
        Ok(TilingInstance {
            modulus,
            a,
            b,
            div_a,
            div_b,
            spec_a,
            spec_b,
            decomp,
        })
    }

    pub fn from_sets(modulus: Modulus, a: &[u64], b: &[u64]) -> Result<Self> {
        let a = Multiset::from_set(modulus.clone(), a)?;
        let b = Multiset::from_set(modulus, b)?;
        TilingInstance::new(a, b)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn a(&self) -> &Multiset {
        &self.a
    }

    pub fn b(&self) -> &Multiset {
        &self.b
    }

    pub fn div_a(&self) -> &[u64] {
        &self.div_a
    }

    pub fn div_b(&self) -> &[u64] {
        &self.div_b
    }

    pub fn spec_a(&self) -> &Spectrum {
        &self.spec_a
    }

    pub fn spec_b(&self) -> &Spectrum {
        &self.spec_b
    }

    /// The unique `(a, b)` with `a + b = z`.
    pub fn decompose(&self, z: u64) -> (u64, u64) {
        self.decomp[self.modulus.reduce(z) as usize]
    }

    /// A-parts of the decompositions of `zs`, deduplicated and sorted.
    pub fn sigma_a(&self, zs: &[u64]) -> Vec<u64> {
        let mut out: Vec<u64> = zs.iter().map(|&z| self.decompose(z).0).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn sigma_b(&self, zs: &[u64]) -> Vec<u64> {
        let mut out: Vec<u64> = zs.iter().map(|&z| self.decompose(z).1).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The swapped tiling `B + A`.
    pub fn swapped(&self) -> TilingInstance {
        TilingInstance::new(self.b.clone(), self.a.clone()).expect("swap preserves tiling")
    }

    /// Translate both factors so that `0` lies in `A` and in `B`.
    pub fn normalized_zero(&self) -> TilingInstance {
        let (a0, b0) = self.decompose(0);
        let a = self.a.translate(self.modulus.neg(a0));
        let b = self.b.translate(self.modulus.neg(b0));
        TilingInstance::new(a, b).expect("translation preserves tiling")
    }

    /// Replace `A` by `rA`; valid whenever `(r, |A|) = 1` (Tijdeman).
    pub fn dilated_a(&self, r: u64) -> Result<TilingInstance> {
        TilingInstance::new(self.a.dilate(r), self.b.clone())
    }
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

    fn z12_tiling() -> TilingInstance {
        TilingInstance::from_sets(z(12), &[0, 1, 2], &[0, 3, 6, 9]).unwrap()
    }

    #[test]
    fn verify_examples() {
        assert!(verify_tiling(&set(12, &[0, 1, 2]), &set(12, &[0, 3, 6, 9])));
        assert!(verify_tiling(
            &set(12, &[0]),
            &set(12, &(0..12).collect::<Vec<_>>())
        ));
        assert!(!verify_tiling(&set(4, &[0, 1]), &set(4, &[0, 1])));
    }

    #[test]
    fn divisor_set_examples() {
        assert_eq!(divisor_set(&set(12, &[0, 1, 2]), 12), vec![1, 2, 12]);
        assert_eq!(divisor_set(&set(12, &[0, 3, 6, 9]), 12), vec![3, 6, 12]);
        assert_eq!(divisor_set(&set(12, &[7]), 12), vec![12]);
    }

    #[test]
    fn divisor_set_respects_reduction() {
        let a = set(12, &[0, 3, 6, 9]);
        assert_eq!(divisor_set(&a, 6), vec![3, 6]);
        assert_eq!(divisor_set(&a, 3), vec![3]);
    }

    #[test]
    fn sands_examples() {
        assert!(sands_check(&set(12, &[0, 1, 2]), &set(12, &[0, 3, 6, 9])));
        assert!(!sands_check(&set(12, &[0, 6]), &set(12, &[0, 6])));
        assert!(sands_check(
            &set(12, &[0]),
            &set(12, &(0..12).collect::<Vec<_>>())
        ));
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(set(12, &[0, 1, 2]).dilate(5).support(), vec![0, 5, 10]);
        assert_eq!(set(12, &[0, 4, 8]).dilate(2).support(), vec![0, 4, 8]);
        assert_eq!(set(12, &[0, 1, 2]).dilate(1).support(), vec![0, 1, 2]);
    }

    #[test]
    fn instance_caches_and_decomposes() {
        let t = z12_tiling();
        assert_eq!(t.div_a(), &[1, 2, 12]);
        assert_eq!(t.div_b(), &[3, 6, 12]);
        assert_eq!(t.spec_a().elements(), &[3]);
        assert_eq!(t.spec_b().elements(), &[2, 4]);
        for z in 0..12 {
            let (a, b) = t.decompose(z);
            assert!(t.a().contains(a) && t.b().contains(b));
            assert_eq!(t.modulus().add(a, b), z);
        }
        assert_eq!(t.decompose(5), (2, 3));
        assert_eq!(t.sigma_a(&[3, 9]), vec![0]);
        assert_eq!(t.sigma_b(&[3, 9]), vec![3, 9]);
    }

    #[test]
    fn rejects_non_tilings() {
        assert!(TilingInstance::from_sets(z(12), &[0, 1], &[0, 3, 6, 9]).is_err());
        assert!(TilingInstance::from_sets(z(12), &[0, 1, 6], &[0, 3, 6, 9]).is_err());
    }

    #[test]
    fn poly_criterion_matches_verification() {
        assert!(poly_criterion(&set(12, &[0, 1, 2]), &set(12, &[0, 3, 6, 9])));
        assert!(!poly_criterion(&set(12, &[0, 1, 3]), &set(12, &[0, 3, 6, 9])));
        assert!(!poly_criterion(&set(4, &[0, 1]), &set(4, &[0, 1])));
    }

    #[test]
    fn tijdeman_on_the_desk_example() {
        let t = z12_tiling();
        for r in 1..12u64 {
            if gcd(r, 3) == 1 {
                assert!(t.dilated_a(r).is_ok(), "r = {r}");
            }
        }
    }

    #[test]
    fn normalization_and_swap() {
        let t = TilingInstance::from_sets(z(12), &[1, 2, 3], &[0, 3, 6, 9]).unwrap();
        let n = t.normalized_zero();
        assert!(n.a().contains(0) && n.b().contains(0));
        let s = t.swapped();
        assert_eq!(s.a(), t.b());
    }
}
