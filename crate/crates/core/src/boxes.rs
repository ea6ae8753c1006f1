//! Divisor-class counting boxes, the totient-weighted box product, and
//! saturating sets.
//!
//! For a weighted set `A` in `Z_M`, a scale `N | M`, and a point `x`, the
//! box `A^N_m[x]` counts the mass of `A` at divisor class `(x - a, N) = m`.
//! The box product pairs the rows of two sets with `1/phi(M/m)` weights and
//! evaluates to exactly `1` at every pair of points when `A + B` tiles.
//! Saturating sets pick out the elements that contribute to that sum, and
//! their geometry (lines, planes, spans) drives the fiber detectors.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::RwLock;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::tiling::TilingInstance;
use crate::zmod::Modulus;

/// One row of divisor-class counts: for fixed `x` and scale `N`, the nonzero
/// counts `m -> A^N_m[x]`, sorted by class.
pub type BoxRow = Vec<(u64, i64)>;

fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Computes the row of `A^N_m[x]` counts over all classes `m | N`.
///
/// Only nonzero counts are returned. `n` must divide the modulus of `a`.
pub fn box_row(a: &Multiset, n: u64, x: u64) -> Result<BoxRow> {
    let m = a.modulus();
    if n == 0 || m.value() % n != 0 {
        return Err(Error::NotADivisor {
            divisor: n,
            modulus: m.value(),
        });
    }
    let mut counts: BTreeMap<u64, i64> = BTreeMap::new();
    for (elem, w) in a.entries() {
        let diff = m.sub(x, elem);
        let class = if diff % n == 0 { n } else { gcd(diff % n, n) };
        *counts.entry(class).or_insert(0) += w;
    }
    Ok(counts.into_iter().filter(|&(_, c)| c != 0).collect())
}

/// Single count `A^N_m[x]` without materializing the whole row.
pub fn box_count(a: &Multiset, n: u64, x: u64, class: u64) -> Result<i64> {
    let row = box_row(a, n, x)?;
    Ok(row
        .iter()
        .find(|&&(m, _)| m == class)
        .map(|&(_, c)| c)
        .unwrap_or(0))
}

/// Memoized box rows for one fixed weighted set.
///
/// Rows are computed on first request and shared; readers never block each
/// other once a row is cached.
pub struct BoxTable {
    set: Multiset,
    rows: RwLock<HashMap<(u64, u64), BoxRow>>,
}

impl BoxTable {
    pub fn new(set: &Multiset) -> Self {
        BoxTable {
            set: set.clone(),
            rows: RwLock::new(HashMap::new()),
        }
    }

    pub fn set(&self) -> &Multiset {
        &self.set
    }

    /// The full row at `(n, x)`, computing and caching it if needed.
    pub fn row(&self, n: u64, x: u64) -> Result<BoxRow> {
        let x = self.set.modulus().reduce(x);
        if let Some(row) = self.rows.read().unwrap().get(&(n, x)) {
            return Ok(row.clone());
        }
        let row = box_row(&self.set, n, x)?;
        self.rows
            .write()
            .unwrap()
            .entry((n, x))
            .or_insert_with(|| row.clone());
        Ok(row)
    }

    pub fn count(&self, n: u64, x: u64, class: u64) -> Result<i64> {
        let row = self.row(n, x)?;
        Ok(row
            .iter()
            .find(|&&(m, _)| m == class)
            .map(|&(_, c)| c)
            .unwrap_or(0))
    }
}

/// The totient-weighted box product at scale `M`:
/// `sum over m | M of A_m[x] * B_m[y] / phi(M/m)`, as an exact rational.
pub fn box_product(a: &Multiset, b: &Multiset, x: u64, y: u64) -> Result<Ratio<i128>> {
    let m = a.modulus();
    if m.value() != b.modulus().value() {
        return Err(Error::ModulusMismatch(m.value(), b.modulus().value()));
    }
    let row_a = box_row(a, m.value(), x)?;
    let row_b: BTreeMap<u64, i64> = box_row(b, m.value(), y)?.into_iter().collect();
    let mut total = Ratio::new(0i128, 1i128);
    for (class, ca) in row_a {
        if let Some(&cb) = row_b.get(&class) {
            let weight = m.phi_of(m.value() / class) as i128;
            total += Ratio::new(ca as i128 * cb as i128, weight);
        }
    }
    Ok(total)
}

/// Counts triples `(a, b, r)` with `r` a unit and `r*(x - a) = y - b`.
///
/// For a tiling this equals `phi(M)` at every `(x, y)`: each dilation
/// `r*A + B` is again a tiling, so exactly one pair `(a, b)` works per `r`.
pub fn triple_count(t: &TilingInstance, x: u64, y: u64) -> u64 {
    let m = t.modulus();
    let a_elems = t.a().support();
    let b_elems = t.b().support();
    let mut total = 0;
    for &r in m.units() {
        for &a in &a_elems {
            let lhs = m.mul(r, m.sub(x, a));
            for &b in &b_elems {
                if lhs == m.sub(y, b) {
                    total += 1;
                }
            }
        }
    }
    total
}

fn class_set(set: &Multiset, x: u64) -> HashSet<u64> {
    let m = set.modulus();
    set.support()
        .iter()
        .map(|&e| m.divisor_class(m.sub(x, e)))
        .collect()
}

/// The pair saturating set on the `A` side: elements `a` whose class
/// `(x - a, M)` is matched by `(y - b, M)` for some `b in B`.
pub fn saturating_a_pair(t: &TilingInstance, x: u64, y: u64) -> Vec<u64> {
    let m = t.modulus();
    let b_classes = class_set(t.b(), y);
    t.a()
        .support()
        .into_iter()
        .filter(|&a| b_classes.contains(&m.divisor_class(m.sub(x, a))))
        .collect()
}

/// The pair saturating set on the `B` side.
pub fn saturating_b_pair(t: &TilingInstance, y: u64, x: u64) -> Vec<u64> {
    let m = t.modulus();
    let a_classes = class_set(t.a(), x);
    t.b()
        .support()
        .into_iter()
        .filter(|&b| a_classes.contains(&m.divisor_class(m.sub(y, b))))
        .collect()
}

/// The full saturating set for `x` on the `A` side:
/// `{a in A : (x - a, M) in Div(B)}`.
pub fn saturating_a(t: &TilingInstance, x: u64) -> Vec<u64> {
    let m = t.modulus();
    t.a()
        .support()
        .into_iter()
        .filter(|&a| t.div_b().contains(&m.divisor_class(m.sub(x, a))))
        .collect()
}

/// The full saturating set for `y` on the `B` side.
pub fn saturating_b(t: &TilingInstance, y: u64) -> Vec<u64> {
    let m = t.modulus();
    t.b()
        .support()
        .into_iter()
        .filter(|&b| t.div_a().contains(&m.divisor_class(m.sub(y, b))))
        .collect()
}

/// Checks the dilation description of pair saturating sets: `a` and `b`
/// saturate at `(x, y)` through the same divisor class if and only if
/// `x - a = r*(y - b)` for some unit `r`, and jointly-saturating pairs land
/// in both pair sets. Returns false only on a counterexample pair.
pub fn saturating_dilation_check(t: &TilingInstance, x: u64, y: u64) -> bool {
    let m = t.modulus();
    let sat_a: HashSet<u64> = saturating_a_pair(t, x, y).into_iter().collect();
    let sat_b: HashSet<u64> = saturating_b_pair(t, y, x).into_iter().collect();
    for a in t.a().support() {
        for b in t.b().support() {
            let u = m.sub(x, a);
            let v = m.sub(y, b);
            let joint = m.divisor_class(u) == m.divisor_class(v);
            let dilated = m.units().iter().any(|&r| m.mul(r, v) == u);
            if joint != dilated {
                return false;
            }
            if joint && !(sat_a.contains(&a) && sat_b.contains(&b)) {
                return false;
            }
        }
    }
    true
}

/// The span of `x` away from `x'`: the union of planes `Pi(x, p^(alpha+1))`
/// over the directions where `(x - x', M)` is not yet maximal.
pub fn span(m: &Modulus, x: u64, x_prime: u64) -> Result<Vec<u64>> {
    if m.reduce(x) == m.reduce(x_prime) {
        return Err(Error::InvalidArgument(
            "span requires two distinct points".into(),
        ));
    }
    let diff = m.sub(x, x_prime);
    let mut out = HashSet::new();
    for nu in 0..m.num_primes() {
        let alpha = m.valuation(nu, diff);
        if alpha < m.exponent(nu) {
            out.extend(m.plane(x, nu, alpha + 1));
        }
    }
    let mut out: Vec<u64> = out.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}

/// The two-sided span: `Span(x, x') U Span(x', x)`.
pub fn bispan(m: &Modulus, x: u64, x_prime: u64) -> Result<Vec<u64>> {
    let mut out = span(m, x, x_prime)?;
    out.extend(span(m, x_prime, x)?);
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Outcome of the enhanced divisor-exclusion check at classes `(m, m')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisorExclusion {
    /// Whether the exponent pattern of `(m, m')` forces exclusion.
    pub applicable: bool,
    /// Whether the fourfold box-count product vanishes as promised.
    pub holds: bool,
}

/// Enhanced divisor exclusion: if for every prime the exponents of `m` and
/// `m'` differ, or agree at the top (or one below the top when `p = 2`), then
/// two elements of `A` at classes `m, m'` from `x` would sit at a forced
/// mutual class `d`; when `d` is a proper divisor, no matching pair of `B`
/// elements can exist at `y`, so
/// `A_m[x] * A_m'[x] * B_m[y] * B_m'[y] = 0`.
pub fn divisor_exclusion(
    t: &TilingInstance,
    x: u64,
    y: u64,
    class: u64,
    class_prime: u64,
) -> Result<DivisorExclusion> {
    let m = t.modulus();
    if !m.is_divisor(class) {
        return Err(Error::NotADivisor {
            divisor: class,
            modulus: m.value(),
        });
    }
    if !m.is_divisor(class_prime) {
        return Err(Error::NotADivisor {
            divisor: class_prime,
            modulus: m.value(),
        });
    }
    let mut applicable = true;
    let mut forced = 1u64;
    for nu in 0..m.num_primes() {
        let alpha = m.valuation(nu, class);
        let alpha_prime = m.valuation(nu, class_prime);
        let n = m.exponent(nu);
        let d = if alpha != alpha_prime {
            alpha.min(alpha_prime)
        } else if alpha == n || (m.prime(nu) == 2 && alpha + 1 == n) {
            n
        } else {
            applicable = false;
            break;
        };
        forced *= m.prime(nu).pow(d);
    }
    if forced == m.value() {
        applicable = false;
    }
    if !applicable {
        return Ok(DivisorExclusion {
            applicable,
            holds: true,
        });
    }
    let ax = box_count(t.a(), m.value(), x, class)?;
    let ax2 = box_count(t.a(), m.value(), x, class_prime)?;
    let by = box_count(t.b(), m.value(), y, class)?;
    let by2 = box_count(t.b(), m.value(), y, class_prime)?;
    Ok(DivisorExclusion {
        applicable,
        holds: ax * ax2 * by * by2 == 0,
    })
}

/// A detected one-dimensional saturation: the product identity together with
/// the cofiber pair that realizes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneDimSaturation {
    /// Direction whose line confines the pair saturating set.
    pub direction: usize,
    /// `A`-side count at class `M/p^2` from `x`; equals `p`.
    pub a_count: i64,
    /// `B`-side count at class `M/p^2` from `b`; equals `p - 1`.
    pub b_count: i64,
    /// Root of the full fiber of `A` found at class `M/p^2` from `x`.
    pub fiber_root: u64,
    /// Root in `B` of the short fiber (step `M/p^2`).
    pub b_root: u64,
}

/// Detects the one-dimensional saturation pattern at `(x, b)`.
///
/// Requires a squarefree-squared modulus `p^2 q^2 r^2`. For each direction
/// whose line through `x` confines the pair saturating set (with `x` outside
/// `A`, `b` in `B`, and `M/p` realized as a difference in `A`), the counts at
/// class `M/p^2` multiply to exactly `phi(p^2)`, witnessed by a full fiber in
/// `A` near `x` and a short fiber in `B` rooted at `b`.
pub fn one_dim_saturation(
    t: &TilingInstance,
    x: u64,
    b: u64,
) -> Result<Vec<OneDimSaturation>> {
    let m = t.modulus();
    require_three_squares(m)?;
    if !t.b().contains(b) {
        return Err(Error::InvalidArgument(format!(
            "{b} is not an element of the second factor"
        )));
    }
    let mut found = Vec::new();
    if t.a().contains(x) {
        return Ok(found);
    }
    let sat = saturating_a_pair(t, x, b);
    for nu in 0..m.num_primes() {
        let p = m.prime(nu);
        if !t.div_a().contains(&(m.value() / p)) {
            continue;
        }
        let line = m.line(x, nu);
        if !sat.iter().all(|a| line.contains(a)) {
            continue;
        }
        let class = m.value() / (p * p);
        let a_count = box_count(t.a(), m.value(), x, class)?;
        let b_count = box_count(t.b(), m.value(), b, class)?;
        if a_count as u64 * b_count as u64 != m.phi_of(p * p) {
            return Err(Error::NotATiling(format!(
                "saturation count {a_count}*{b_count} differs from phi({})",
                p * p
            )));
        }
        let fiber_root = t
            .a()
            .support()
            .into_iter()
            .find(|&a| {
                m.divisor_class(m.sub(x, a)) == class
                    && m.fiber(a, nu).iter().all(|&z| t.a().contains(z))
            })
            .ok_or_else(|| {
                Error::NotATiling("no full fiber saturates the product".into())
            })?;
        let short = m.progression(b, m.value() / (p * p), p);
        if !short.iter().all(|&z| t.b().contains(z)) {
            return Err(Error::NotATiling(
                "no short fiber at the root saturates the product".into(),
            ));
        }
        found.push(OneDimSaturation {
            direction: nu,
            a_count,
            b_count,
            fiber_root: *m.fiber(fiber_root, nu).iter().min().unwrap(),
            b_root: b,
        });
    }
    Ok(found)
}

pub(crate) fn require_three_squares(m: &Modulus) -> Result<()> {
    if m.num_primes() != 3 || (0..3).any(|nu| m.exponent(nu) != 2) {
        return Err(Error::UnsupportedModulus(format!(
            "{} is not a product of three squared primes",
            m.value()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t12() -> TilingInstance {
        let m = Modulus::new(12).unwrap();
        TilingInstance::from_sets(m, &[0, 1, 2], &[0, 3, 6, 9]).unwrap()
    }

    #[test]
    fn rows_count_divisor_classes() {
        let m = Modulus::new(12).unwrap();
        let a = Multiset::from_set(m.clone(), &[0, 1, 2]).unwrap();
        assert_eq!(box_row(&a, 12, 0).unwrap(), vec![(1, 1), (2, 1), (12, 1)]);
        let f3 = Multiset::from_set(m.clone(), &[0, 4, 8]).unwrap();
        assert_eq!(box_row(&f3, 12, 0).unwrap(), vec![(4, 2), (12, 1)]);
        assert_eq!(box_count(&f3, 12, 0, 4).unwrap(), 2);
        assert_eq!(box_count(&f3, 12, 0, 6).unwrap(), 0);
    }

    #[test]
    fn rows_at_reduced_scale() {
        let m = Modulus::new(12).unwrap();
        let a = Multiset::from_set(m, &[0, 1, 2]).unwrap();
        // At scale 6 the class of 0-2 is gcd(10 mod 6, 6) = 2.
        assert_eq!(box_row(&a, 6, 0).unwrap(), vec![(1, 1), (2, 1), (6, 1)]);
        assert!(box_row(&a, 5, 0).is_err());
    }

    #[test]
    fn table_memoizes_rows() {
        let t = t12();
        let table = BoxTable::new(t.a());
        assert_eq!(table.row(12, 0).unwrap(), table.row(12, 12).unwrap());
        assert_eq!(table.count(12, 0, 2).unwrap(), 1);
        assert_eq!(table.count(12, 3, 3).unwrap(), 1);
    }

    #[test]
    fn box_product_is_one_on_tilings() {
        let t = t12();
        for x in 0..12 {
            for y in 0..12 {
                let v = box_product(t.a(), t.b(), x, y).unwrap();
                assert_eq!(v, Ratio::new(1, 1), "box product at ({x},{y})");
            }
        }
    }

    #[test]
    fn box_product_detects_non_tilings() {
        let m = Modulus::new(4).unwrap();
        let a = Multiset::from_set(m.clone(), &[0, 1]).unwrap();
        let b = Multiset::from_set(m, &[0, 1]).unwrap();
        let values: HashSet<Ratio<i128>> = (0..4)
            .flat_map(|x| (0..4).map(move |y| (x, y)))
            .map(|(x, y)| box_product(&a, &b, x, y).unwrap())
            .collect();
        assert!(values.len() > 1);
    }

    #[test]
    fn triple_count_is_phi() {
        let t = t12();
        for x in 0..12 {
            for y in [0, 5] {
                assert_eq!(triple_count(&t, x, y), 4);
            }
        }
    }

    #[test]
    fn saturating_sets_match_definition() {
        let t = t12();
        assert_eq!(saturating_a_pair(&t, 3, 0), vec![0]);
        // Every element of A saturates itself and nothing else.
        for a in t.a().support() {
            assert_eq!(saturating_a(&t, a), vec![a]);
        }
        for x in 0..12 {
            assert!(!saturating_a(&t, x).is_empty());
            assert!(!saturating_b(&t, x).is_empty());
            let single: HashSet<u64> = saturating_a(&t, x).into_iter().collect();
            let union: HashSet<u64> = t
                .b()
                .support()
                .into_iter()
                .flat_map(|b| saturating_a_pair(&t, x, b))
                .collect();
            assert_eq!(single, union);
        }
    }

    #[test]
    fn dilation_description_agrees() {
        let t = t12();
        for x in 0..12 {
            for y in 0..12 {
                assert!(saturating_dilation_check(&t, x, y));
            }
        }
    }

    #[test]
    fn span_of_near_points() {
        let m = Modulus::new(12).unwrap();
        // (0-6, 12) = 6: only the p=2 direction is below its cap.
        assert_eq!(span(&m, 0, 6).unwrap(), vec![0, 4, 8]);
        assert_eq!(bispan(&m, 0, 6).unwrap(), vec![0, 2, 4, 6, 8, 10]);
        assert!(span(&m, 5, 5).is_err());
    }

    #[test]
    fn saturating_sets_obey_spans() {
        let t = t12();
        let m = t.modulus();
        for x in 0..12 {
            for xp in 0..12 {
                if x == xp {
                    continue;
                }
                let allowed: HashSet<u64> =
                    bispan(m, x, xp).unwrap().into_iter().collect();
                for y in 0..12 {
                    let inner: HashSet<u64> =
                        saturating_a_pair(&t, x, y).into_iter().collect();
                    for a in saturating_a_pair(&t, xp, y) {
                        assert!(inner.contains(&a) || allowed.contains(&a));
                    }
                }
            }
        }
    }

    #[test]
    fn exclusion_forbids_repeated_classes() {
        let t = t12();
        for x in 0..12 {
            for y in 0..12 {
                for &m1 in t.modulus().divisors() {
                    for &m2 in t.modulus().divisors() {
                        let report = divisor_exclusion(&t, x, y, m1, m2).unwrap();
                        assert!(report.holds, "exclusion at ({x},{y},{m1},{m2})");
                    }
                }
            }
        }
        assert!(divisor_exclusion(&t, 0, 0, 5, 1).is_err());
    }

    #[test]
    fn one_dim_saturation_needs_three_squares() {
        let t = t12();
        assert!(matches!(
            one_dim_saturation(&t, 3, 0),
            Err(Error::UnsupportedModulus(_))
        ));
    }

    #[test]
    fn one_dim_saturation_finds_cofibers() {
        let m = Modulus::new(900).unwrap();
        // Grid of step 30 with the fiber {0, 450} shifted off the grid to
        // {225, 675}, paired with the fibered complement of spectrum {2,3,5}.
        let a: Vec<u64> = (0..30)
            .map(|k| k * 30)
            .filter(|&z| z != 0 && z != 450)
            .chain([225, 675])
            .collect();
        let spec = crate::cyclotomic::Spectrum::from_elements(
            m.clone(),
            vec![2, 3, 5],
        )
        .unwrap();
        let b = crate::cyclotomic::standard_complement(&spec);
        let t = TilingInstance::new(Multiset::from_set(m.clone(), &a).unwrap(), b)
            .unwrap();
        let hits = one_dim_saturation(&t, 0, 0).unwrap();
        assert_eq!(hits.len(), 1);
        let hit = &hits[0];
        assert_eq!(m.prime(hit.direction), 2);
        assert_eq!((hit.a_count, hit.b_count), (2, 1));
        assert_eq!(hit.fiber_root, 225);
        assert_eq!(hit.b_root, 0);
        assert_eq!(
            hit.a_count as u64 * hit.b_count as u64,
            m.phi_of(4)
        );
    }

    proptest! {
        #[test]
        fn box_rows_sum_to_mass(xs in proptest::collection::btree_set(0u64..36, 1..12), x in 0u64..36) {
            let m = Modulus::new(36).unwrap();
            let elems: Vec<u64> = xs.into_iter().collect();
            let a = Multiset::from_set(m, &elems).unwrap();
            let row = box_row(&a, 36, x).unwrap();
            let total: i64 = row.iter().map(|&(_, c)| c).sum();
            prop_assert_eq!(total, a.total_mass());
        }

        #[test]
        fn box_rows_translate(xs in proptest::collection::btree_set(0u64..36, 1..12), x in 0u64..36, c in 0u64..36) {
            let m = Modulus::new(36).unwrap();
            let elems: Vec<u64> = xs.into_iter().collect();
            let a = Multiset::from_set(m.clone(), &elems).unwrap();
            let shifted = a.translate(c);
            prop_assert_eq!(
                box_row(&a, 36, x).unwrap(),
                box_row(&shifted, 36, m.add(x, c)).unwrap()
            );
        }
    }
}
