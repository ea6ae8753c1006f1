//! Fiber splitting parities, plane consistency, and slab reductions.
//!
//! Every fiber of `Z_M` splits in a tiling: its witness decompositions are
//! confined to a plane on one side while the other side exhibits the exact
//! next-depth separation. The parity records which side is confined. Slab
//! reduction cuts a tiling of `Z_M` into tilings of `Z_{M/p}` along a
//! coordinate, available exactly when no divisor pair `(m, m/p)` straddles
//! the two divisor sets.

use std::collections::BTreeSet;

use crate::boxes::saturating_a_pair;
use crate::cyclotomic::divides;
use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::tiling::{verify_tiling, TilingInstance};
use crate::zmod::Modulus;

/// Which side of the tiling is plane-confined on a split fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    /// First-factor witnesses confined, second-factor witnesses separated.
    AB,
    /// Second-factor witnesses confined, first-factor witnesses separated.
    BA,
}

/// The splitting classification of one fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitReport {
    /// The fiber elements, sorted.
    pub fiber: Vec<u64>,
    /// Direction index of the fiber.
    pub direction: usize,
    /// Scale exponent: the fiber has step `N/p` for `N = M/p^alpha`.
    pub alpha: u32,
    /// Witness decompositions `(z, a, b)`, one per fiber element.
    pub witnesses: Vec<(u64, u64, u64)>,
    pub parity: Parity,
    /// Set when both sides collapse to a single witness, so the parity is
    /// assigned by convention rather than by confinement and separation.
    pub degenerate: bool,
}

fn fiber_scale(m: &Modulus, direction: usize, alpha: u32) -> Result<(u64, u64)> {
    if direction >= m.num_primes() {
        return Err(Error::InvalidArgument(format!(
            "direction {direction} out of range"
        )));
    }
    let n = m.exponent(direction);
    if alpha >= n {
        return Err(Error::InvalidArgument(format!(
            "scale exponent {alpha} must stay below {n}"
        )));
    }
    let p = m.prime(direction);
    let scale = m.value() / p.pow(alpha);
    Ok((scale, scale / p))
}

/// The fiber of step `N/p` through `root`, where `N = M/p^alpha`.
pub fn scaled_fiber(
    m: &Modulus,
    root: u64,
    direction: usize,
    alpha: u32,
) -> Result<Vec<u64>> {
    let (_, step) = fiber_scale(m, direction, alpha)?;
    Ok(m.progression(root, step, m.prime(direction)))
}

/// Classifies the splitting parity of the fiber through `root`.
///
/// The fiber's unique witness decompositions `z = a + b` either have all
/// `a`-parts within one plane of depth `n - alpha` while distinct `b`-parts
/// separate at exact depth `n - alpha - 1`, or vice versa. Exactly one of
/// the two happens.
pub fn fiber_parity(
    t: &TilingInstance,
    root: u64,
    direction: usize,
    alpha: u32,
) -> Result<SplitReport> {
    let m = t.modulus();
    let fiber = scaled_fiber(m, root, direction, alpha)?;
    let witnesses: Vec<(u64, u64, u64)> = fiber
        .iter()
        .map(|&z| {
            let (a, b) = t.decompose(z);
            (z, a, b)
        })
        .collect();
    let a_parts: BTreeSet<u64> = witnesses.iter().map(|&(_, a, _)| a).collect();
    let b_parts: BTreeSet<u64> = witnesses.iter().map(|&(_, _, b)| b).collect();

    let n = m.exponent(direction);
    let confined = |parts: &BTreeSet<u64>| {
        pairs(parts).all(|(u, v)| m.valuation(direction, m.sub(u, v)) >= n - alpha)
    };
    let separated = |parts: &BTreeSet<u64>| {
        pairs(parts).all(|(u, v)| {
            m.valuation(direction, m.sub(u, v)) == n - alpha - 1
        })
    };

    let (parity, degenerate) = if a_parts.len() == 1 && b_parts.len() == 1 {
        debug_assert!(false, "distinct fiber points share a decomposition");
        (Parity::AB, true)
    } else if a_parts.len() == 1 {
        debug_assert!(separated(&b_parts));
        (Parity::AB, false)
    } else if b_parts.len() == 1 {
        debug_assert!(separated(&a_parts));
        (Parity::BA, false)
    } else if confined(&a_parts) && separated(&b_parts) {
        (Parity::AB, false)
    } else if confined(&b_parts) && separated(&a_parts) {
        (Parity::BA, false)
    } else {
        return Err(Error::NotATiling(format!(
            "fiber at {root} in direction {direction} does not split"
        )));
    };
    Ok(SplitReport {
        fiber,
        direction,
        alpha,
        witnesses,
        parity,
        degenerate,
    })
}

fn pairs(parts: &BTreeSet<u64>) -> impl Iterator<Item = (u64, u64)> + '_ {
    parts.iter().enumerate().flat_map(move |(i, &u)| {
        parts.iter().skip(i + 1).map(move |&v| (u, v))
    })
}

/// Splits every full-step fiber in the given direction and reports each
/// parity; roots are canonical (smallest element per fiber).
pub fn all_fiber_parities(
    t: &TilingInstance,
    direction: usize,
) -> Result<Vec<SplitReport>> {
    let m = t.modulus();
    let step = m.fiber_step(direction);
    let mut reports = Vec::new();
    for root in 0..step {
        reports.push(fiber_parity(t, root, direction, 0)?);
    }
    Ok(reports)
}

/// The parity shared by every full-step fiber in a direction, if uniform.
pub fn uniform_parity(t: &TilingInstance, direction: usize) -> Result<Option<Parity>> {
    let reports = all_fiber_parities(t, direction)?;
    let first = reports[0].parity;
    Ok(reports.iter().all(|r| r.parity == first).then_some(first))
}

/// The plane-consistency report for a two-direction grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneConsistency {
    /// The direction whose planes confine both witness sets.
    pub direction: usize,
    pub sigma_a: Vec<u64>,
    pub sigma_b: Vec<u64>,
}

/// On the grid of step `M / (p_i^ai * p_j^aj)` through `z`, the witnesses on
/// at least one of the two directions stay within single planes through the
/// decomposition of `z`. Returns the first such direction.
pub fn plane_consistency(
    t: &TilingInstance,
    z: u64,
    dir_i: usize,
    alpha_i: u32,
    dir_j: usize,
    alpha_j: u32,
) -> Result<PlaneConsistency> {
    let m = t.modulus();
    if dir_i == dir_j {
        return Err(Error::InvalidArgument(
            "plane consistency needs two distinct directions".into(),
        ));
    }
    for (dir, alpha) in [(dir_i, alpha_i), (dir_j, alpha_j)] {
        if dir >= m.num_primes()
            || alpha == 0
            || alpha >= m.exponent(dir)
        {
            return Err(Error::InvalidArgument(format!(
                "grid exponent {alpha} invalid in direction {dir}"
            )));
        }
    }
    let step = m.value()
        / (m.prime(dir_i).pow(alpha_i) * m.prime(dir_j).pow(alpha_j));
    let grid = m.grid(z, step);
    let sigma_a = t.sigma_a(&grid);
    let sigma_b = t.sigma_b(&grid);
    let (a, b) = t.decompose(z);
    for (dir, alpha) in [(dir_i, alpha_i), (dir_j, alpha_j)] {
        let depth = m.exponent(dir) - alpha;
        let a_ok = sigma_a.iter().all(|&u| m.in_plane(u, a, dir, depth));
        let b_ok = sigma_b.iter().all(|&u| m.in_plane(u, b, dir, depth));
        if a_ok && b_ok {
            return Ok(PlaneConsistency {
                direction: dir,
                sigma_a,
                sigma_b,
            });
        }
    }
    Err(Error::NotATiling(format!(
        "witnesses on the grid at {z} are not plane-consistent"
    )))
}

/// Checks whether sliced reduction along `direction` is available: requires
/// `Phi_{p^n} | A`, and holds when no divisor `m` with `p^n | m | M` appears
/// in `Div(A)` while `m/p` appears in `Div(B)`.
pub fn slab_condition(t: &TilingInstance, direction: usize) -> Result<bool> {
    Ok(slab_obstruction(t, direction)?.is_none())
}

/// The first witnessing pair `(m, m/p)` defeating the slab condition, if any.
pub fn slab_obstruction(
    t: &TilingInstance,
    direction: usize,
) -> Result<Option<(u64, u64)>> {
    let m = t.modulus();
    let q = m.prime_power(direction);
    if !divides(q, t.a()) {
        return Err(Error::InvalidArgument(format!(
            "the cyclotomic factor at {q} does not divide the first factor"
        )));
    }
    let p = m.prime(direction);
    for &d in m.divisors() {
        if d % q == 0
            && t.div_a().contains(&d)
            && t.div_b().contains(&(d / p))
        {
            return Ok(Some((d, d / p)));
        }
    }
    Ok(None)
}

/// The three equivalent faces of the slab criterion, plus the divisor form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlabEquivalence {
    /// No divisor pair `(m, m/p)` straddles `Div(A)` and `Div(B)`.
    pub divisor_condition: bool,
    /// Every dilated tiling `rA + B` splits all its full fibers in the
    /// direction with the dilated side confined.
    pub uniform_splitting: bool,
    /// Every pair saturating set at `(x, b)` with `x` on a fiber of an
    /// element of `A` stays within the top plane through `x`.
    pub product_splitting: bool,
    /// Every cyclotomic `Phi_d` divides `A`, or its full ladder below
    /// divides `B`.
    pub cyclotomic_condition: bool,
}

impl SlabEquivalence {
    pub fn consistent(&self) -> bool {
        self.divisor_condition == self.uniform_splitting
            && self.divisor_condition == self.product_splitting
            && self.divisor_condition == self.cyclotomic_condition
    }
}

/// Evaluates all faces of the slab criterion in one direction.
pub fn slab_equivalence(
    t: &TilingInstance,
    direction: usize,
) -> Result<SlabEquivalence> {
    let m = t.modulus();
    let divisor_condition = slab_condition(t, direction)?;

    let mut uniform_splitting = true;
    'outer: for &r in m.units() {
        // In the instance (rB, A), the required parity confines the rB side.
        let dilated = t.swapped().dilated_a(r)?;
        for report in all_fiber_parities(&dilated, direction)? {
            if report.parity != Parity::AB {
                uniform_splitting = false;
                break 'outer;
            }
        }
    }

    let n = m.exponent(direction);
    let mut product_splitting = true;
    'psearch: for a in t.a().support() {
        for x in m.fiber(a, direction) {
            for b in t.b().support() {
                let sat = saturating_a_pair(t, x, b);
                if !sat.iter().all(|&u| m.in_plane(u, x, direction, n)) {
                    product_splitting = false;
                    break 'psearch;
                }
            }
        }
    }

    let cyclotomic_condition = subtile_cyclotomic_condition(t, direction);

    Ok(SlabEquivalence {
        divisor_condition,
        uniform_splitting,
        product_splitting,
        cyclotomic_condition,
    })
}

fn subtile_cyclotomic_condition(t: &TilingInstance, direction: usize) -> bool {
    let m = t.modulus();
    let p = m.prime(direction);
    let n = m.exponent(direction);
    let q = m.prime_power(direction);
    for &d in m.divisors() {
        if d % q != 0 || divides(d, t.a()) {
            continue;
        }
        let ladder_ok = (1..=n).all(|k| divides(d / p.pow(k), t.b()));
        if !ladder_ok {
            return false;
        }
    }
    true
}

/// Cuts the tiling into `p^n` coordinate slabs, one per translate, and
/// returns the distinct reduced tilings of `Z_{M/p}`.
pub fn slab_reduce(
    t: &TilingInstance,
    direction: usize,
) -> Result<Vec<TilingInstance>> {
    let m = t.modulus();
    if let Some((d, dp)) = slab_obstruction(t, direction)? {
        return Err(Error::NotATiling(format!(
            "slab reduction blocked by divisor pair ({d}, {dp})"
        )));
    }
    let p = m.prime(direction);
    let n = m.exponent(direction);
    let q = p.pow(n);
    let reduced_modulus = Modulus::new(m.value() / p)?;
    let b_reduced = reduce_as_set(t.b(), &reduced_modulus)?;
    let mut unit = vec![0u64; m.num_primes()];
    unit[direction] = 1;
    let shift_one = m.from_coords(&unit);

    let mut out: Vec<TilingInstance> = Vec::new();
    for s in 0..q {
        let shifted = t.a().translate(m.mul(s, shift_one));
        let cap = p.pow(n - 1);
        let slab = shifted.filtered(|x| m.coord(direction, x) < cap);
        let slab_reduced = reduce_as_set(&slab, &reduced_modulus)?;
        let instance = TilingInstance::new(slab_reduced, b_reduced.clone())?;
        if !out.iter().any(|seen| {
            seen.a() == instance.a() && seen.b() == instance.b()
        }) {
            out.push(instance);
        }
    }
    Ok(out)
}

fn reduce_as_set(a: &Multiset, target: &Modulus) -> Result<Multiset> {
    let folded = a.reduce_mod(target.value())?;
    if !folded.is_set() {
        return Err(Error::NotATiling(format!(
            "reduction mod {} collides",
            target.value()
        )));
    }
    Ok(folded)
}

/// Checks whether all `p^n` coordinate slabs produce valid reduced tilings,
/// without requiring the slab condition first.
pub fn all_slabs_tile(t: &TilingInstance, direction: usize) -> bool {
    let m = t.modulus();
    let p = m.prime(direction);
    let n = m.exponent(direction);
    let reduced_modulus = match Modulus::new(m.value() / p) {
        Ok(r) => r,
        Err(_) => return false,
    };
    let b_reduced = match reduce_as_set(t.b(), &reduced_modulus) {
        Ok(b) => b,
        Err(_) => return false,
    };
    let mut unit = vec![0u64; m.num_primes()];
    unit[direction] = 1;
    let shift_one = m.from_coords(&unit);
    for s in 0..p.pow(n) {
        let shifted = t.a().translate(m.mul(s, shift_one));
        let cap = p.pow(n - 1);
        let slab = shifted.filtered(|x| m.coord(direction, x) < cap);
        match reduce_as_set(&slab, &reduced_modulus) {
            Ok(sr) => {
                if !verify_tiling(&sr, &b_reduced) {
                    return false;
                }
            }
            Err(_) => return false,
        }
    }
    true
}

/// Report of a subgroup reduction scan.
#[derive(Debug, Clone)]
pub struct SubgroupReport {
    /// Per-direction: whether `A` lies in `p Z_M`, and whether `p` divides
    /// `|B|` exactly once.
    pub candidates: Vec<SubgroupCandidate>,
    /// The first direction admitting the reduction, with the induced tiling.
    pub reduction: Option<(usize, TilingInstance)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubgroupCandidate {
    pub direction: usize,
    pub contained: bool,
    pub exact_division: bool,
}

/// When `A` lies inside `p Z_M` and `p` exactly divides `|B|`, the tiling
/// descends to `Z_{M/p}` with `A/p` against the multiples of `p` in `B`.
pub fn subgroup_reduce(t: &TilingInstance) -> Result<SubgroupReport> {
    let m = t.modulus();
    let mut candidates = Vec::new();
    let mut reduction = None;
    for nu in 0..m.num_primes() {
        let p = m.prime(nu);
        let contained = t.a().support().iter().all(|&a| a % p == 0);
        let size_b = t.b().total_mass() as u64;
        let exact_division = size_b % p == 0 && (size_b / p) % p != 0;
        candidates.push(SubgroupCandidate {
            direction: nu,
            contained,
            exact_division,
        });
        if contained && exact_division && reduction.is_none() {
            let reduced_modulus = Modulus::new(m.value() / p)?;
            let a_scaled: Vec<u64> =
                t.a().support().iter().map(|&a| a / p).collect();
            let b_scaled: Vec<u64> = t
                .b()
                .support()
                .iter()
                .filter(|&&b| b % p == 0)
                .map(|&b| b / p)
                .collect();
            let instance = TilingInstance::from_sets(
                reduced_modulus,
                &a_scaled,
                &b_scaled,
            )?;
            reduction = Some((nu, instance));
        }
    }
    Ok(SubgroupReport {
        candidates,
        reduction,
    })
}

/// One-way slab sufficient conditions: either every element of `A` has a
/// top-class neighbor, or the planes through `B` are filled evenly. Either
/// one implies the slab condition.
pub fn slab_sufficient(t: &TilingInstance, direction: usize) -> Result<bool> {
    let m = t.modulus();
    let p = m.prime(direction);
    let top = m.value() / p;
    let cond_a = t.a().support().iter().all(|&a| {
        t.a()
            .support()
            .iter()
            .any(|&a2| m.divisor_class(m.sub(a, a2)) == top)
    });
    if cond_a {
        return Ok(true);
    }
    let n = m.exponent(direction);
    let size_b = t.b().total_mass() as u64;
    let q = p.pow(n);
    let expected = size_b / num_integer::gcd(size_b, q);
    let cond_b = t.b().support().iter().all(|&b| {
        let count = t
            .b()
            .support()
            .iter()
            .filter(|&&b2| m.in_plane(b2, b, direction, n))
            .count() as u64;
        count == expected
    });
    Ok(cond_b)
}

/// Divisor alignment at the origin: for tilings normalized with `0` in both
/// factors, `a` and `b` have aligned classes against the top fiber exactly
/// when some unit combination `a + r b` lands on the top fiber.
pub fn divisor_alignment_check(t: &TilingInstance, direction: usize) -> Result<bool> {
    let m = t.modulus();
    if !t.a().contains(0) || !t.b().contains(0) {
        return Err(Error::InvalidArgument(
            "divisor alignment requires 0 in both factors".into(),
        ));
    }
    let p = m.prime(direction);
    let step = m.fiber_step(direction);
    for a in t.a().support() {
        for b in t.b().support() {
            let mut aligned = false;
            'lhs: for nu in 0..p {
                for nu2 in 0..p {
                    let ca = m.divisor_class(m.sub(a, m.mul(nu, step)));
                    let cb = m.divisor_class(m.sub(b, m.mul(nu2, step)));
                    if ca == cb {
                        aligned = true;
                        break 'lhs;
                    }
                }
            }
            let combo = m.units().iter().any(|&r| {
                let z = m.add(a, m.mul(r, b));
                z % step == 0
            });
            if aligned != combo {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Difference-matching constraints between two grid points and their witness
/// decompositions: classes agree along `z - z'`, full-depth agreement forces
/// matching in that direction, and any mismatched direction forces both
/// witness differences to at least the `z`-difference depth.
pub fn grid_witness_check(t: &TilingInstance, z: u64, z_prime: u64) -> bool {
    let m = t.modulus();
    let (a, b) = t.decompose(z);
    let (a2, b2) = t.decompose(z_prime);
    let dz = m.sub(z, z_prime);
    let da = m.sub(a, a2);
    let db = m.sub(b, b2);
    let class_mod = |x: u64, d: u64| {
        if x % d == 0 {
            d
        } else {
            num_integer::gcd(x % d, d)
        }
    };
    for &d in m.divisors() {
        if dz % d == 0 && class_mod(da, d) != class_mod(db, d) {
            return false;
        }
    }
    for nu in 0..m.num_primes() {
        let n = m.exponent(nu);
        let beta = m.valuation(nu, dz);
        let va = m.valuation(nu, da);
        let vb = m.valuation(nu, db);
        if beta == n && va != vb {
            return false;
        }
        if va != vb && (va < beta || vb < beta) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t12() -> TilingInstance {
        let m = Modulus::new(12).unwrap();
        TilingInstance::from_sets(m, &[0, 1, 2], &[0, 3, 6, 9]).unwrap()
    }

    fn t36_fibered() -> TilingInstance {
        let m = Modulus::new(36).unwrap();
        // A fibered in the direction of 3: fiber step 12.
        TilingInstance::from_sets(m, &[0, 12, 24, 1, 13, 25], &[0, 2, 4, 18, 20, 22])
            .unwrap()
    }

    #[test]
    fn fiber_through_three_and_nine_splits_ab() {
        let t = t12();
        // Fiber {3, 9} in the direction of 2, full scale.
        let report = fiber_parity(&t, 3, 0, 0).unwrap();
        assert_eq!(report.fiber, vec![3, 9]);
        assert_eq!(report.parity, Parity::AB);
        assert!(!report.degenerate);
        assert_eq!(report.witnesses, vec![(3, 0, 3), (9, 0, 9)]);
    }

    #[test]
    fn all_fibers_split_exactly_once() {
        for t in [t12(), t36_fibered()] {
            for dir in 0..t.modulus().num_primes() {
                for report in all_fiber_parities(&t, dir).unwrap() {
                    assert_eq!(
                        report.fiber.len(),
                        t.modulus().prime(dir) as usize
                    );
                }
            }
        }
    }

    #[test]
    fn single_witness_side_still_gets_a_definite_parity() {
        let t = t12();
        // The fiber {0, 6}: 0 = 0+0 and 6 = 0+6 share the a-part, and the
        // b-parts 0, 6 carry the exact separation.
        let report = fiber_parity(&t, 0, 0, 0).unwrap();
        assert_eq!(report.parity, Parity::AB);
        assert!(!report.degenerate);
    }

    #[test]
    fn plane_consistency_finds_a_direction() {
        let m = Modulus::new(36).unwrap();
        let t = t36_fibered();
        for z in 0..36 {
            let report = plane_consistency(&t, z, 0, 1, 1, 1).unwrap();
            assert!(report.direction == 0 || report.direction == 1);
            let _ = m;
        }
    }

    #[test]
    fn slab_condition_for_fibered_factor() {
        let m = Modulus::new(12).unwrap();
        let t =
            TilingInstance::from_sets(m, &[0, 4, 8], &[0, 3, 6, 9]).unwrap();
        // A = {0,4,8} carries the full cyclotomic at 3.
        assert!(slab_condition(&t, 1).unwrap());
        assert!(all_slabs_tile(&t, 1));
    }

    #[test]
    fn slab_condition_requires_cyclotomic_hypothesis() {
        let t = t12();
        // X^2 + 1 does not divide 1 + X + X^2.
        assert!(slab_condition(&t, 0).is_err());
    }

    #[test]
    fn slab_reduce_yields_distinct_reductions() {
        let m = Modulus::new(36).unwrap();
        let t = TilingInstance::from_sets(
            m,
            &[0, 1, 2, 18, 19, 20],
            &[0, 3, 6, 9, 12, 15],
        )
        .unwrap();
        let reduced = slab_reduce(&t, 0).unwrap();
        assert_eq!(reduced.len(), 2);
        for r in &reduced {
            assert_eq!(r.modulus().value(), 18);
        }
        let mut slabs: Vec<Vec<u64>> =
            reduced.iter().map(|r| r.a().support()).collect();
        slabs.sort();
        assert_eq!(slabs, vec![vec![0, 1, 2], vec![9, 10, 11]]);
    }

    #[test]
    fn slab_reduce_of_fibered_factor_gives_translate_slabs() {
        let t = t36_fibered();
        let reduced = slab_reduce(&t, 1).unwrap();
        let mut slabs: Vec<Vec<u64>> =
            reduced.iter().map(|r| r.a().support()).collect();
        slabs.sort();
        assert_eq!(slabs, vec![vec![0, 1], vec![4, 5], vec![8, 9]]);
        for r in &reduced {
            assert_eq!(r.modulus().value(), 12);
        }
    }

    #[test]
    fn subgroup_reduction_of_even_tile() {
        let m = Modulus::new(12).unwrap();
        let t = TilingInstance::from_sets(m, &[0, 6], &[0, 1, 2, 3, 4, 5])
            .unwrap();
        let report = subgroup_reduce(&t).unwrap();
        let (nu, reduced) = report.reduction.expect("reduces");
        assert_eq!(nu, 0);
        assert_eq!(reduced.modulus().value(), 6);
        assert_eq!(reduced.a().support(), vec![0, 3]);
        assert_eq!(reduced.b().support(), vec![0, 1, 2]);
    }

    #[test]
    fn slab_equivalence_agrees_everywhere() {
        let m = Modulus::new(12).unwrap();
        let t =
            TilingInstance::from_sets(m, &[0, 4, 8], &[0, 3, 6, 9]).unwrap();
        let eq = slab_equivalence(&t, 1).unwrap();
        assert!(eq.divisor_condition);
        assert!(eq.consistent(), "{eq:?}");
    }

    #[test]
    fn sufficient_conditions_imply_slab() {
        let m = Modulus::new(12).unwrap();
        let t =
            TilingInstance::from_sets(m, &[0, 4, 8], &[0, 3, 6, 9]).unwrap();
        if slab_sufficient(&t, 1).unwrap() {
            assert!(slab_condition(&t, 1).unwrap());
        }
    }

    #[test]
    fn divisor_alignment_on_normalized_tilings() {
        let t = t12();
        for dir in 0..2 {
            assert!(divisor_alignment_check(&t, dir).unwrap());
        }
        let shifted = TilingInstance::from_sets(
            t.modulus().clone(),
            &[1, 2, 3],
            &[0, 3, 6, 9],
        )
        .unwrap();
        assert!(divisor_alignment_check(&shifted, 0).is_err());
    }

    #[test]
    fn grid_witnesses_match_classes() {
        for t in [t12(), t36_fibered()] {
            let m = t.modulus().value();
            for z in 0..m {
                for zp in 0..m {
                    assert!(grid_witness_check(&t, z, zp), "at ({z},{zp})");
                }
            }
        }
    }
}
