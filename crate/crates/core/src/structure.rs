//! Grid structure for moduli with three prime directions: per-direction
//! full-fiber sets, classification of grid slices into fibered, corner, and
//! diagonal-box shapes, cofibered pairs, and the fiber-shift moves that carry
//! a tiling onto the standard complement of its spectrum.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rayon::prelude::*;

use crate::boxes::require_three_squares;
use crate::cyclotomic::{divides, standard_complement};
use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::tiling::TilingInstance;
use crate::zmod::Modulus;

/// A grid `Lambda(root, step)`: all elements congruent to `root` mod `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    pub root: u64,
    pub step: u64,
}

impl GridSpec {
    /// The canonical spec of the grid of the given step through `x`.
    pub fn through(x: u64, step: u64) -> GridSpec {
        GridSpec { root: x % step, step }
    }

    /// The grid elements in ascending order.
    pub fn members(&self, m: &Modulus) -> Vec<u64> {
        m.grid(self.root, self.step)
    }
}

fn require_three_directions(m: &Modulus) -> Result<()> {
    if m.num_primes() != 3 {
        return Err(Error::UnsupportedModulus(format!(
            "{} does not have exactly three prime directions",
            m.value()
        )));
    }
    Ok(())
}

/// For each direction, the elements of the first factor whose full top-scale
/// fiber in that direction stays inside the factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionSets {
    sets: Vec<BTreeSet<u64>>,
}

impl DirectionSets {
    pub fn set(&self, nu: usize) -> &BTreeSet<u64> {
        &self.sets[nu]
    }

    /// Elements covered by full fibers in all three directions at once.
    pub fn triple_intersection(&self) -> BTreeSet<u64> {
        self.sets[0]
            .iter()
            .filter(|a| self.sets[1].contains(a) && self.sets[2].contains(a))
            .copied()
            .collect()
    }

    /// Whether every element of `a` lies in a full fiber of some direction.
    pub fn covers(&self, a: &Multiset) -> bool {
        a.support()
            .iter()
            .all(|x| self.sets.iter().any(|s| s.contains(x)))
    }
}

pub fn direction_sets(t: &TilingInstance) -> Result<DirectionSets> {
    let m = t.modulus();
    require_three_directions(m)?;
    let mut sets = vec![BTreeSet::new(); 3];
    for nu in 0..3 {
        for &a in &t.a().support() {
            if m.fiber(a, nu).iter().all(|&z| t.a().contains(z)) {
                sets[nu].insert(a);
            }
        }
    }
    Ok(DirectionSets { sets })
}

/// Shape classification of one grid slice of a set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridLabel {
    Empty,
    /// A disjoint union of full fibers in a single direction; lists every
    /// direction that works.
    Fibered { directions: Vec<usize> },
    /// Two elements differing only in `direction` whose slices carry exactly
    /// one fiber each, in the two complementary directions respectively.
    Corner { direction: usize },
    /// As `Corner`, but each slice is a fiber union in one complementary
    /// direction and not the other.
    ExtendedCorner { direction: usize },
    /// Complementary boxes `(I x J x K) u (I^c x J^c x K^c)` in grid
    /// coordinates, plus leftover disjoint full fibers.
    DiagonalBoxes {
        axis_sets: [Vec<u64>; 3],
        extra_fibers: Vec<(usize, u64)>,
    },
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridReport {
    pub grid: GridSpec,
    pub label: GridLabel,
    /// Witnessing elements: fiber roots, the corner pair, the box elements,
    /// or the whole slice when unclassified.
    pub evidence: Vec<u64>,
}

/// Coordinates of a top-scale grid relative to its root: each member maps to
/// one residue per direction.
struct GridFrame<'a> {
    m: &'a Modulus,
    base: Vec<u64>,
    unit: Vec<u64>,
}

impl<'a> GridFrame<'a> {
    fn new(m: &'a Modulus, root: u64) -> Self {
        let base = (0..m.num_primes()).map(|nu| m.coord(nu, root)).collect();
        let unit = (0..m.num_primes())
            .map(|nu| m.prime(nu).pow(m.exponent(nu) - 1))
            .collect();
        GridFrame { m, base, unit }
    }

    fn coords(&self, y: u64) -> [u64; 3] {
        let mut c = [0u64; 3];
        for nu in 0..3 {
            let q = self.m.prime_power(nu);
            let d = (q + self.m.coord(nu, y) - self.base[nu]) % q;
            debug_assert_eq!(d % self.unit[nu], 0);
            c[nu] = (d / self.unit[nu]) % self.m.prime(nu);
        }
        c
    }

    fn point(&self, c: [u64; 3]) -> u64 {
        let coords: Vec<u64> = (0..3)
            .map(|nu| {
                (self.base[nu] + c[nu] * self.unit[nu]) % self.m.prime_power(nu)
            })
            .collect();
        self.m.from_coords(&coords)
    }
}

fn direction_closed(pts: &BTreeSet<[u64; 3]>, nu: usize, sizes: [u64; 3]) -> bool {
    pts.iter().all(|&c| {
        (0..sizes[nu]).all(|t| {
            let mut d = c;
            d[nu] = t;
            pts.contains(&d)
        })
    })
}

/// Exact cover of the point set by full coordinate fibers, mixed directions
/// allowed; deterministic smallest-point-first backtracking.
fn fiber_cover(
    pts: &BTreeSet<[u64; 3]>,
    sizes: [u64; 3],
) -> Option<Vec<(usize, [u64; 3])>> {
    fn recurse(
        remaining: &mut BTreeSet<[u64; 3]>,
        sizes: [u64; 3],
        out: &mut Vec<(usize, [u64; 3])>,
    ) -> bool {
        let Some(&first) = remaining.iter().next() else {
            return true;
        };
        for nu in 0..3 {
            let fiber: Vec<[u64; 3]> = (0..sizes[nu])
                .map(|t| {
                    let mut c = first;
                    c[nu] = t;
                    c
                })
                .collect();
            if fiber.iter().all(|c| remaining.contains(c)) {
                for c in &fiber {
                    remaining.remove(c);
                }
                let mut root = first;
                root[nu] = 0;
                out.push((nu, root));
                if recurse(remaining, sizes, out) {
                    return true;
                }
                out.pop();
                for c in &fiber {
                    remaining.insert(*c);
                }
            }
        }
        false
    }
    let mut remaining = pts.clone();
    let mut out = Vec::new();
    recurse(&mut remaining, sizes, &mut out).then_some(out)
}

fn slice_2d(
    pts: &BTreeSet<[u64; 3]>,
    axis: usize,
    value: u64,
) -> BTreeSet<(u64, u64)> {
    let (j, k) = other_axes(axis);
    pts.iter()
        .filter(|c| c[axis] == value)
        .map(|c| (c[j], c[k]))
        .collect()
}

fn other_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn slice_fibered(
    slice: &BTreeSet<(u64, u64)>,
    along_first: bool,
    sizes: (u64, u64),
) -> bool {
    if slice.is_empty() {
        return false;
    }
    slice.iter().all(|&(u, v)| {
        if along_first {
            (0..sizes.0).all(|t| slice.contains(&(t, v)))
        } else {
            (0..sizes.1).all(|t| slice.contains(&(u, t)))
        }
    })
}

fn find_corner(
    pts: &BTreeSet<[u64; 3]>,
    sizes: [u64; 3],
    extended: bool,
) -> Option<(usize, [u64; 3], [u64; 3])> {
    for nu in 0..3 {
        let (j, k) = other_axes(nu);
        for &a in pts.iter() {
            for &ai in pts.iter() {
                if a[nu] == ai[nu] || a[j] != ai[j] || a[k] != ai[k] {
                    continue;
                }
                let sa = slice_2d(pts, nu, a[nu]);
                let sai = slice_2d(pts, nu, ai[nu]);
                let dims = (sizes[j], sizes[k]);
                let hit = if extended {
                    slice_fibered(&sa, true, dims)
                        && !slice_fibered(&sa, false, dims)
                        && slice_fibered(&sai, false, dims)
                        && !slice_fibered(&sai, true, dims)
                } else {
                    let row: BTreeSet<(u64, u64)> =
                        (0..sizes[j]).map(|t| (t, a[k])).collect();
                    let col: BTreeSet<(u64, u64)> =
                        (0..sizes[k]).map(|t| (ai[j], t)).collect();
                    sa == row && sai == col
                };
                if hit {
                    return Some((nu, a, ai));
                }
            }
        }
    }
    None
}

fn subsets(p: u64, require_zero: bool) -> Vec<Vec<u64>> {
    let full = (1u32 << p) - 1;
    (1..full)
        .filter(|mask| !require_zero || mask & 1 == 1)
        .map(|mask| (0..p).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

fn box_points(
    i_set: &[u64],
    j_set: &[u64],
    k_set: &[u64],
) -> BTreeSet<[u64; 3]> {
    let mut out = BTreeSet::new();
    for &u in i_set {
        for &v in j_set {
            for &w in k_set {
                out.insert([u, v, w]);
            }
        }
    }
    out
}

fn complement(set: &[u64], p: u64) -> Vec<u64> {
    (0..p).filter(|x| !set.contains(x)).collect()
}

type BoxExtraction = ([Vec<u64>; 3], Vec<(usize, [u64; 3])>);

fn diagonal_boxes(
    pts: &BTreeSet<[u64; 3]>,
    sizes: [u64; 3],
) -> Option<BoxExtraction> {
    if sizes.iter().all(|&p| p <= 7) {
        for i_set in subsets(sizes[0], true) {
            let ic = complement(&i_set, sizes[0]);
            for j_set in subsets(sizes[1], false) {
                let jc = complement(&j_set, sizes[1]);
                for k_set in subsets(sizes[2], false) {
                    let kc = complement(&k_set, sizes[2]);
                    let mut boxes = box_points(&i_set, &j_set, &k_set);
                    boxes.extend(box_points(&ic, &jc, &kc));
                    if !boxes.iter().all(|c| pts.contains(c)) {
                        continue;
                    }
                    let remainder: BTreeSet<[u64; 3]> =
                        pts.difference(&boxes).copied().collect();
                    if let Some(mut cover) = fiber_cover(&remainder, sizes) {
                        cover.sort_unstable();
                        return Some(([i_set, j_set, k_set], cover));
                    }
                }
            }
        }
        return None;
    }
    // Large primes: group slices along the first axis by signature and
    // accept only the pure two-pattern product shape, no leftover fibers.
    let mut patterns: Vec<(BTreeSet<(u64, u64)>, Vec<u64>)> = Vec::new();
    for u in 0..sizes[0] {
        let sig = slice_2d(pts, 0, u);
        match patterns.iter_mut().find(|(s, _)| *s == sig) {
            Some((_, us)) => us.push(u),
            None => patterns.push((sig, vec![u])),
        }
    }
    if patterns.len() != 2 {
        return None;
    }
    let (first, second) = (&patterns[0], &patterns[1]);
    let product_split = |sig: &BTreeSet<(u64, u64)>| {
        let j: Vec<u64> = sig.iter().map(|&(v, _)| v).collect::<BTreeSet<_>>().into_iter().collect();
        let k: Vec<u64> = sig.iter().map(|&(_, w)| w).collect::<BTreeSet<_>>().into_iter().collect();
        (j.iter().map(|&v| k.iter().map(move |&w| (v, w)).collect::<Vec<_>>()).flatten().collect::<BTreeSet<_>>() == *sig).then_some((j, k))
    };
    let (j_set, k_set) = product_split(&first.0)?;
    let (jc, kc) = product_split(&second.0)?;
    if jc != complement(&j_set, sizes[1]) || kc != complement(&k_set, sizes[2]) {
        return None;
    }
    if jc.is_empty() || kc.is_empty() || second.1.is_empty() {
        return None;
    }
    Some(([first.1.clone(), j_set, k_set], Vec::new()))
}

/// Classifies the top-scale grid slice of the first factor through `root`.
pub fn classify_grid(t: &TilingInstance, root: u64) -> Result<GridReport> {
    classify_set_grid(t.a(), root)
}

/// Classifies the top-scale grid slice of an arbitrary set through `root`.
pub fn classify_set_grid(a: &Multiset, root: u64) -> Result<GridReport> {
    let m = a.modulus();
    require_three_squares(m)?;
    let step = m.dgrid_step(m.value());
    let grid = GridSpec::through(root, step);
    let inside: Vec<u64> = grid
        .members(m)
        .into_iter()
        .filter(|&y| a.contains(y))
        .collect();
    if inside.is_empty() {
        return Ok(GridReport {
            grid,
            label: GridLabel::Empty,
            evidence: Vec::new(),
        });
    }
    let frame = GridFrame::new(m, grid.root);
    let pts: BTreeSet<[u64; 3]> = inside.iter().map(|&y| frame.coords(y)).collect();
    let sizes = [m.prime(0), m.prime(1), m.prime(2)];

    let directions: Vec<usize> = (0..3)
        .filter(|&nu| direction_closed(&pts, nu, sizes))
        .collect();
    if let Some(&first) = directions.first() {
        let mut evidence: Vec<u64> = pts
            .iter()
            .filter(|c| c[first] == 0)
            .map(|&c| frame.point(c))
            .collect();
        evidence.sort_unstable();
        return Ok(GridReport {
            grid,
            label: GridLabel::Fibered { directions },
            evidence,
        });
    }

    if fiber_cover(&pts, sizes).is_some() {
        if let Some((nu, a_pt, ai_pt)) = find_corner(&pts, sizes, false) {
            return Ok(GridReport {
                grid,
                label: GridLabel::Corner { direction: nu },
                evidence: vec![frame.point(a_pt), frame.point(ai_pt)],
            });
        }
        if let Some((nu, a_pt, ai_pt)) = find_corner(&pts, sizes, true) {
            return Ok(GridReport {
                grid,
                label: GridLabel::ExtendedCorner { direction: nu },
                evidence: vec![frame.point(a_pt), frame.point(ai_pt)],
            });
        }
        return Ok(GridReport {
            grid,
            label: GridLabel::Unclassified,
            evidence: inside,
        });
    }

    if let Some((axis_sets, cover)) = diagonal_boxes(&pts, sizes) {
        let mut boxes = box_points(&axis_sets[0], &axis_sets[1], &axis_sets[2]);
        boxes.extend(box_points(
            &complement(&axis_sets[0], sizes[0]),
            &complement(&axis_sets[1], sizes[1]),
            &complement(&axis_sets[2], sizes[2]),
        ));
        let mut evidence: Vec<u64> =
            boxes.iter().map(|&c| frame.point(c)).collect();
        evidence.sort_unstable();
        let extra_fibers = cover
            .into_iter()
            .map(|(nu, c)| (nu, frame.point(c)))
            .collect();
        return Ok(GridReport {
            grid,
            label: GridLabel::DiagonalBoxes { axis_sets, extra_fibers },
            evidence,
        });
    }

    Ok(GridReport {
        grid,
        label: GridLabel::Unclassified,
        evidence: inside,
    })
}

/// Classifies every top-scale grid of the first factor, in root order.
pub fn classify_all_grids(t: &TilingInstance) -> Result<Vec<GridReport>> {
    let m = t.modulus();
    require_three_squares(m)?;
    let step = m.dgrid_step(m.value());
    (0..step)
        .into_par_iter()
        .map(|root| classify_grid(t, root))
        .collect()
}

/// Whether the full-modulus cyclotomic divides the first factor and every
/// nonempty grid slice of it is fibered in at least one direction.
pub fn grid_fibered_hypothesis(t: &TilingInstance) -> Result<bool> {
    let m = t.modulus();
    require_three_directions(m)?;
    if !divides(m.value(), t.a()) {
        return Ok(false);
    }
    let step = m.dgrid_step(m.value());
    let roots: BTreeSet<u64> = t.a().support().iter().map(|a| a % step).collect();
    for root in roots {
        let frame = GridFrame::new(m, root);
        let pts: BTreeSet<[u64; 3]> = m
            .grid(root, step)
            .into_iter()
            .filter(|&y| t.a().contains(y))
            .map(|y| frame.coords(y))
            .collect();
        let sizes = [m.prime(0), m.prime(1), m.prime(2)];
        if !(0..3).any(|nu| direction_closed(&pts, nu, sizes)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The stratification of one grid: strata along one axis, each confined to a
/// full-fiber direction set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratifiedReport {
    pub grid: GridSpec,
    /// `[i, j, k]`: strata vary along `k`; each stratum's participating
    /// elements lie in the direction set of `i` or of `j`.
    pub axes: [usize; 3],
    pub strata_i: Vec<u64>,
    pub strata_j: Vec<u64>,
    /// Number of valid stratum assignments for the chosen axes.
    pub alternatives: u64,
    /// Both direction sets were choosable nonempty and the slice misses the
    /// triple intersection, so the third direction set must be avoided.
    pub exclusion_applicable: bool,
    pub exclusion_holds: bool,
}

pub fn stratified_structure(
    t: &TilingInstance,
    root: u64,
) -> Result<StratifiedReport> {
    let m = t.modulus();
    if !grid_fibered_hypothesis(t)? {
        return Err(Error::InvalidArgument(
            "first factor must be grid-fibered with full-modulus divisibility"
                .into(),
        ));
    }
    let dirs = direction_sets(t)?;
    let step = m.dgrid_step(m.value());
    let grid = GridSpec::through(root, step);
    let sigma_all: BTreeSet<u64> =
        t.sigma_a(&grid.members(m)).into_iter().collect();
    let triple = dirs.triple_intersection();

    const ORDERS: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for axes in ORDERS {
        let [i, j, k] = axes;
        let pk = m.prime(k);
        let mut cans = Vec::with_capacity(pk as usize);
        for nu in 0..pk {
            let z = m.add(grid.root, nu * (m.value() / pk));
            let mut stratum = Vec::new();
            for s in 0..m.prime(i) {
                for u in 0..m.prime(j) {
                    stratum.push(m.add(
                        z,
                        m.add(
                            s * (m.value() / m.prime(i)),
                            u * (m.value() / m.prime(j)),
                        ),
                    ));
                }
            }
            let sigma = t.sigma_a(&stratum);
            let can_i = sigma.iter().all(|a| dirs.set(i).contains(a));
            let can_j = sigma.iter().all(|a| dirs.set(j).contains(a));
            if !can_i && !can_j {
                cans.clear();
                break;
            }
            cans.push((can_i, can_j));
        }
        if cans.is_empty() {
            continue;
        }
        let mut strata_i = Vec::new();
        let mut strata_j = Vec::new();
        let mut both = 0u32;
        for (nu, &(ci, cj)) in cans.iter().enumerate() {
            if ci && cj {
                both += 1;
            }
            if ci {
                strata_i.push(nu as u64);
            } else {
                debug_assert!(cj);
                strata_j.push(nu as u64);
            }
        }
        let choosable = cans.iter().enumerate().any(|(n1, &(ci, _))| {
            ci && cans.iter().enumerate().any(|(n2, &(_, cj))| n2 != n1 && cj)
        });
        let applicable =
            choosable && sigma_all.iter().all(|a| !triple.contains(a));
        let holds = sigma_all.iter().all(|a| !dirs.set(k).contains(a));
        return Ok(StratifiedReport {
            grid,
            axes,
            strata_i,
            strata_j,
            alternatives: 1u64.checked_shl(both).unwrap_or(u64::MAX),
            exclusion_applicable: applicable,
            exclusion_holds: holds,
        });
    }
    Err(Error::NotATiling(format!(
        "grid at {root} admits no stratified fiber assignment"
    )))
}

/// Roots of a canonical decomposition of `set` into fibers of scale `scale`
/// in direction `nu` (step `scale / p`, length `p`), or `None` when no
/// disjoint decomposition exists.
pub fn scale_fiber_roots(
    set: &Multiset,
    nu: usize,
    scale: u64,
) -> Result<Option<Vec<u64>>> {
    let m = set.modulus();
    if nu >= m.num_primes() {
        return Err(Error::InvalidArgument(format!(
            "direction {nu} out of range"
        )));
    }
    let p = m.prime(nu);
    if !m.is_divisor(scale) || scale % p != 0 {
        return Err(Error::InvalidArgument(format!(
            "scale {scale} does not carry a fiber of {p}"
        )));
    }
    if !set.is_set() {
        return Err(Error::InvalidArgument("factor must be a set".into()));
    }
    let step = scale / p;
    let len = m.value() / step;
    let mut roots = Vec::new();
    for c in 0..step {
        let member =
            |t: u64| set.contains((c + (t % len) * step) % m.value());
        let occupied = (0..len).filter(|&t| member(t)).count() as u64;
        if occupied == 0 {
            continue;
        }
        if occupied == len {
            if len % p != 0 {
                return Ok(None);
            }
            for t in (0..len).step_by(p as usize) {
                roots.push(c + t * step);
            }
            continue;
        }
        let anchor = (0..len).find(|&t| !member(t)).expect("gap exists");
        let mut t = anchor + 1;
        while t < anchor + len {
            if member(t) {
                let start = t;
                while t < anchor + len && member(t) {
                    t += 1;
                }
                let run = t - start;
                if run % p != 0 {
                    return Ok(None);
                }
                for s in (start..t).step_by(p as usize) {
                    roots.push(c + (s % len) * step);
                }
            } else {
                t += 1;
            }
        }
    }
    roots.sort_unstable();
    Ok(Some(roots))
}

/// Whether `set` is a disjoint union of scale-`scale` fibers in direction
/// `nu`.
pub fn fiber_union(set: &Multiset, nu: usize, scale: u64) -> Result<bool> {
    Ok(scale_fiber_roots(set, nu, scale)?.is_some())
}

/// A full fiber of the first factor paired with a half-scale fiber of the
/// second, in the same direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CofiberPair {
    pub direction: usize,
    pub a_fiber: Vec<u64>,
    pub b_fiber: Vec<u64>,
}

fn require_shiftable(m: &Modulus, nu: usize) -> Result<()> {
    if nu >= m.num_primes() {
        return Err(Error::InvalidArgument(format!(
            "direction {nu} out of range"
        )));
    }
    if m.exponent(nu) != 2 {
        return Err(Error::UnsupportedModulus(format!(
            "direction {nu} of {} is not a squared prime",
            m.value()
        )));
    }
    Ok(())
}

/// Finds a cofibered pair in direction `nu`: the second factor must be a
/// disjoint union of half-scale fibers and the first must contain a full
/// fiber.
pub fn find_cofiber(
    t: &TilingInstance,
    nu: usize,
) -> Result<Option<CofiberPair>> {
    let m = t.modulus();
    require_shiftable(m, nu)?;
    let p = m.prime(nu);
    let scale = m.value() / p;
    let Some(b_roots) = scale_fiber_roots(t.b(), nu, scale)? else {
        return Ok(None);
    };
    let b_root = b_roots[0];
    let mut b_fiber = m.progression(b_root, scale / p, p);
    b_fiber.sort_unstable();
    for root in 0..m.fiber_step(nu) {
        let fiber = m.fiber(root, nu);
        if fiber.iter().all(|&z| t.a().contains(z)) {
            return Ok(Some(CofiberPair {
                direction: nu,
                a_fiber: fiber,
                b_fiber,
            }));
        }
    }
    Ok(None)
}

/// The divisibility-maximal divisor class `(z - x, M)` over `z` in the
/// fiber. Attained classes form a chain, so the maximum is unique.
pub fn fiber_distance(m: &Modulus, fiber: &[u64], x: u64) -> u64 {
    let classes: BTreeSet<u64> = fiber
        .iter()
        .map(|&z| m.divisor_class(m.sub(z, x)))
        .collect();
    let maximal: Vec<u64> = classes
        .iter()
        .copied()
        .filter(|&c| classes.iter().all(|&d| d == c || d % c != 0))
        .collect();
    debug_assert_eq!(maximal.len(), 1, "attained classes form a chain");
    maximal.into_iter().max().expect("fiber is nonempty")
}

/// One fiber-shift move, replayable against the instance it was made on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftMove {
    pub direction: usize,
    pub fiber_root: u64,
    pub target: u64,
}

/// Moves the paired fiber of the first factor to the fiber through `x`,
/// which must lie at the shift distance (or inside the fiber, a no-op).
///
/// The result is re-verified as a tiling and must keep the prime-power
/// spectrum of the shifted factor unchanged.
pub fn fiber_shift(
    t: &TilingInstance,
    pair: &CofiberPair,
    x: u64,
) -> Result<(TilingInstance, ShiftMove)> {
    let m = t.modulus();
    require_shiftable(m, pair.direction)?;
    let nu = pair.direction;
    let p = m.prime(nu);
    let first = *pair
        .a_fiber
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty fiber".into()))?;
    let mut fiber = m.fiber(first, nu);
    fiber.sort_unstable();
    let mut given = pair.a_fiber.clone();
    given.sort_unstable();
    if fiber != given || !fiber.iter().all(|&z| t.a().contains(z)) {
        return Err(Error::InvalidArgument(
            "pair does not name a full fiber of the first factor".into(),
        ));
    }
    if pair.b_fiber.is_empty() {
        return Err(Error::InvalidArgument("empty fiber".into()));
    }
    let mut b_given = pair.b_fiber.clone();
    b_given.sort_unstable();
    // A half-scale fiber is a segment of step M/p^2, not a closed coset, so
    // it may wrap around the modulus; any member may be its true start.
    let is_segment = b_given.iter().any(|&r| {
        let mut seg = m.progression(r, m.value() / (p * p), p);
        seg.sort_unstable();
        seg == b_given
    });
    if !is_segment || !b_given.iter().all(|&z| t.b().contains(z)) {
        return Err(Error::InvalidArgument(
            "pair does not name a half-scale fiber of the second factor"
                .into(),
        ));
    }
    if !fiber_union(t.b(), nu, m.value() / p)? {
        return Err(Error::InvalidArgument(
            "second factor is not a union of half-scale fibers".into(),
        ));
    }

    let new_fiber: BTreeSet<u64> = m.fiber(x, nu).into_iter().collect();
    let kept: BTreeSet<u64> = t
        .a()
        .support()
        .into_iter()
        .filter(|z| !fiber.contains(z))
        .collect();
    if new_fiber.iter().any(|z| kept.contains(z)) {
        return Err(Error::InvalidArgument(
            "target fiber collides with the rest of the factor".into(),
        ));
    }
    let dist = fiber_distance(m, &fiber, x);
    if dist != m.value() && dist != m.value() / (p * p) {
        return Err(Error::InvalidArgument(format!(
            "target sits at class {dist}, not at the shift distance"
        )));
    }

    let support: Vec<u64> = kept.union(&new_fiber).copied().collect();
    let a2 = Multiset::from_set(m.clone(), &support)?;
    let shifted = TilingInstance::new(a2, t.b().clone())?;
    if shifted.spec_a().elements() != t.spec_a().elements() {
        return Err(Error::NotATiling(
            "shift changed the prime-power spectrum".into(),
        ));
    }
    let mv = ShiftMove {
        direction: nu,
        fiber_root: fiber[0] % m.fiber_step(nu),
        target: *new_fiber.iter().next().expect("fiber is nonempty")
            % m.fiber_step(nu),
    };
    Ok((shifted, mv))
}

/// Replays one journaled move against an instance.
pub fn replay_shift(t: &TilingInstance, mv: ShiftMove) -> Result<TilingInstance> {
    let m = t.modulus();
    let pair = find_cofiber(t, mv.direction)?.ok_or_else(|| {
        Error::InvalidArgument(format!(
            "no cofibered structure in direction {}",
            mv.direction
        ))
    })?;
    let fiber = m.fiber(mv.fiber_root, mv.direction);
    if !fiber.iter().all(|&z| t.a().contains(z)) {
        return Err(Error::InvalidArgument(
            "journaled fiber is not inside the first factor".into(),
        ));
    }
    let pair = CofiberPair { a_fiber: fiber, ..pair };
    fiber_shift(t, &pair, mv.target).map(|(next, _)| next)
}

/// Replays a whole journal, verifying every step.
pub fn replay_chain(
    t: &TilingInstance,
    moves: &[ShiftMove],
) -> Result<TilingInstance> {
    let mut cur = t.clone();
    for &mv in moves {
        cur = replay_shift(&cur, mv)?;
    }
    Ok(cur)
}

fn canonical_of(m: &Modulus, support: &[u64]) -> Vec<u64> {
    let mut best: Option<Vec<u64>> = None;
    for &c in support {
        let mut cand: Vec<u64> = support.iter().map(|&x| m.sub(x, c)).collect();
        cand.sort_unstable();
        if best.as_ref().map_or(true, |b| cand < *b) {
            best = Some(cand);
        }
    }
    best.unwrap_or_default()
}

/// The lexicographically least translate of the support of `a`.
pub fn canonical_translate(a: &Multiset) -> Vec<u64> {
    canonical_of(a.modulus(), &a.support())
}

/// Outcome of the shift-chain normalization search.
#[derive(Debug, Clone)]
pub enum NormalizeOutcome {
    /// A verified chain of moves whose endpoint is a translate of the
    /// standard complement of the factor's spectrum.
    Normalized {
        moves: Vec<ShiftMove>,
        instance: TilingInstance,
    },
    /// Budget or move supply ran out; nothing is claimed.
    Inconclusive { explored: u64 },
}

pub const NORMALIZE_NODE_BUDGET: u64 = 10_000;

const NORMALIZE_DEPTH_CAP: usize = 64;

pub fn t2_normalize(t: &TilingInstance) -> Result<NormalizeOutcome> {
    t2_normalize_with(t, NORMALIZE_NODE_BUDGET)
}

/// Breadth-first search over fiber-shift moves toward a translate of the
/// standard complement; deterministic move order (direction, fiber root,
/// target root), each move fully re-verified.
pub fn t2_normalize_with(
    t: &TilingInstance,
    max_nodes: u64,
) -> Result<NormalizeOutcome> {
    let m = t.modulus();
    require_three_squares(m)?;
    let pqr: u64 = (0..3).map(|nu| m.prime(nu)).product();
    if t.a().support_len() as u64 != pqr || t.b().support_len() as u64 != pqr {
        return Err(Error::InvalidArgument(
            "factor sizes must equal the product of the prime directions"
                .into(),
        ));
    }
    if !divides(m.value(), t.a()) {
        return Err(Error::InvalidArgument(
            "full-modulus cyclotomic must divide the first factor".into(),
        ));
    }
    let target = canonical_translate(&standard_complement(t.spec_a()));

    let mut visited: HashSet<Vec<u64>> = HashSet::new();
    let mut queue: VecDeque<(TilingInstance, Vec<ShiftMove>)> = VecDeque::new();
    visited.insert(canonical_translate(t.a()));
    queue.push_back((t.clone(), Vec::new()));
    let mut explored = 0u64;

    while let Some((cur, chain)) = queue.pop_front() {
        explored += 1;
        if canonical_translate(cur.a()) == target {
            return Ok(NormalizeOutcome::Normalized { moves: chain, instance: cur });
        }
        if explored >= max_nodes {
            break;
        }
        if chain.len() >= NORMALIZE_DEPTH_CAP {
            continue;
        }
        for direction in 0..3 {
            let p = m.prime(direction);
            if scale_fiber_roots(cur.b(), direction, m.value() / p)?.is_none() {
                continue;
            }
            let Some(pair_template) = find_cofiber(&cur, direction)? else {
                continue;
            };
            let step = m.fiber_step(direction);
            for root in 0..step {
                let fiber = m.fiber(root, direction);
                if !fiber.iter().all(|&z| cur.a().contains(z)) {
                    continue;
                }
                let base_coord = m.coord(direction, root) % p;
                let targets: BTreeSet<u64> = m
                    .line(root, direction)
                    .into_iter()
                    .filter(|&x| m.coord(direction, x) % p != base_coord)
                    .map(|x| x % step)
                    .collect();
                for target_root in targets {
                    let new_fiber = m.fiber(target_root, direction);
                    if new_fiber
                        .iter()
                        .any(|&z| cur.a().contains(z) && !fiber.contains(&z))
                    {
                        continue;
                    }
                    let mut support: Vec<u64> = cur
                        .a()
                        .support()
                        .into_iter()
                        .filter(|z| !fiber.contains(z))
                        .chain(new_fiber.iter().copied())
                        .collect();
                    support.sort_unstable();
                    let canon = canonical_of(m, &support);
                    if visited.contains(&canon) {
                        continue;
                    }
                    let pair = CofiberPair {
                        a_fiber: fiber.clone(),
                        ..pair_template.clone()
                    };
                    let (next, mv) = fiber_shift(&cur, &pair, target_root)?;
                    visited.insert(canon);
                    let mut longer = chain.clone();
                    longer.push(mv);
                    queue.push_back((next, longer));
                }
            }
        }
    }
    Ok(NormalizeOutcome::Inconclusive { explored })
}

/// A plane-intersection count with its bound and the threshold that forces
/// a cyclotomic divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneCount {
    pub count: u64,
    pub bound: u64,
    /// Present when the direction carries part of the factor size and the
    /// scale is positive.
    pub threshold: Option<u64>,
    /// The forced prime-power cyclotomic divisor when the count exceeds the
    /// threshold.
    pub forced_divisor: Option<u64>,
}

/// Counts `a` inside the plane through `x` of depth `n - alpha` in
/// direction `nu`.
pub fn plane_count(
    a: &Multiset,
    x: u64,
    nu: usize,
    alpha: u32,
) -> Result<PlaneCount> {
    let m = a.modulus();
    if nu >= m.num_primes() {
        return Err(Error::InvalidArgument(format!(
            "direction {nu} out of range"
        )));
    }
    let n = m.exponent(nu);
    if alpha > n {
        return Err(Error::InvalidArgument(format!(
            "scale exponent {alpha} exceeds {n}"
        )));
    }
    if !a.is_set() {
        return Err(Error::InvalidArgument("factor must be a set".into()));
    }
    let size = a.support_len() as u64;
    if size == 0 || m.value() % size != 0 {
        return Err(Error::InvalidArgument(
            "factor size must divide the modulus".into(),
        ));
    }
    let p = m.prime(nu);
    let mut beta = 0u32;
    let mut rest = size;
    while rest % p == 0 {
        beta += 1;
        rest /= p;
    }
    let depth = n - alpha;
    let count = if depth == 0 {
        size
    } else {
        a.support()
            .iter()
            .filter(|&&y| m.in_plane(y, x, nu, depth))
            .count() as u64
    };
    let bound = p.pow(alpha) * (size / p.pow(beta));
    let threshold = (beta > 0 && alpha >= 1).then(|| size / p);
    let forced_divisor = match threshold {
        Some(th) if count > th => (0..alpha)
            .map(|a2| p.pow(n - a2))
            .find(|&q| divides(q, a)),
        _ => None,
    };
    debug_assert!(count <= bound);
    Ok(PlaneCount { count, bound, threshold, forced_divisor })
}

/// Conclusion of the missing-top-difference fibering check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopDifferenceOutcome {
    /// Hypotheses not met; nothing is claimed.
    NotApplicable,
    /// The grid slice has uniform weights along fibers of this direction.
    Fibered(usize),
}

/// Checks that a grid slice missing its top divisor class in direction `nu`
/// is fibered as forced: in one of the two other directions when `p_nu` is
/// odd, and in the third direction when a second class is missing too.
pub fn missing_top_difference(
    a: &Multiset,
    n: u64,
    root: u64,
    nu: usize,
) -> Result<TopDifferenceOutcome> {
    let m = a.modulus();
    require_three_directions(m)?;
    if nu >= 3 {
        return Err(Error::InvalidArgument(format!(
            "direction {nu} out of range"
        )));
    }
    if !m.is_divisor(n) || (0..3).any(|d| n % m.prime(d) != 0) {
        return Err(Error::InvalidArgument(format!(
            "scale {n} must carry all three primes"
        )));
    }
    let reduced = a.reduce_mod(n)?;
    let rm = reduced.modulus().clone();
    if !divides(n, &reduced) {
        return Ok(TopDifferenceOutcome::NotApplicable);
    }
    let step = rm.dgrid_step(n);
    let members = rm.grid(root % step, step);
    let slice: Vec<u64> = members
        .iter()
        .copied()
        .filter(|&y| reduced.weight(y) != 0)
        .collect();
    if slice.is_empty() {
        return Ok(TopDifferenceOutcome::NotApplicable);
    }
    let mut div = BTreeSet::new();
    for &s in &slice {
        for &s2 in &slice {
            if s != s2 {
                div.insert(rm.divisor_class(rm.sub(s, s2)));
            }
        }
    }
    let missing: Vec<usize> = (0..3)
        .filter(|&d| !div.contains(&(n / rm.prime(d))))
        .collect();
    if !missing.contains(&nu) {
        return Ok(TopDifferenceOutcome::NotApplicable);
    }
    let uniform = |d: usize| {
        members.iter().all(|&y| {
            reduced.weight(y) == reduced.weight(rm.add(y, n / rm.prime(d)))
        })
    };
    if let Some(&mu) = missing.iter().find(|&&d| d != nu) {
        let third = 3 - nu - mu;
        if uniform(third) {
            return Ok(TopDifferenceOutcome::Fibered(third));
        }
        return Err(Error::NotATiling(format!(
            "grid at {root} is not fibered in direction {third} despite two missing top classes"
        )));
    }
    if rm.prime(nu) == 2 {
        return Ok(TopDifferenceOutcome::NotApplicable);
    }
    for d in (0..3).filter(|&d| d != nu) {
        if uniform(d) {
            return Ok(TopDifferenceOutcome::Fibered(d));
        }
    }
    Err(Error::NotATiling(format!(
        "grid at {root} is not fibered despite a missing top class"
    )))
}

/// A nonnegative combination of full fibers summing to a two-prime multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberCombination {
    /// `(direction, fiber root, multiplicity)`, roots at zero offset along
    /// the fiber.
    pub fibers: Vec<(usize, u64, i64)>,
}

/// Decomposes a nonnegative multiset over a two-prime modulus into full
/// fibers with multiplicities; exists exactly when the full-modulus
/// cyclotomic divides the multiset.
pub fn fiber_combination(a: &Multiset) -> Result<Option<FiberCombination>> {
    let m = a.modulus();
    if m.num_primes() != 2 {
        return Err(Error::UnsupportedModulus(format!(
            "{} does not have exactly two prime directions",
            m.value()
        )));
    }
    if a.entries().iter().any(|&(_, w)| w < 0) {
        return Err(Error::InvalidArgument(
            "weights must be nonnegative".into(),
        ));
    }
    let n = m.value();
    let (p, q) = (m.prime(0), m.prime(1));
    let step = m.dgrid_step(n);
    let mut fibers = Vec::new();
    for root in 0..step {
        let unit0 = p.pow(m.exponent(0) - 1);
        let unit1 = q.pow(m.exponent(1) - 1);
        let point = |u: u64, v: u64| {
            let c0 = (m.coord(0, root) + u * unit0) % m.prime_power(0);
            let c1 = (m.coord(1, root) + v * unit1) % m.prime_power(1);
            m.from_coords(&[c0, c1])
        };
        let w = |u: u64, v: u64| a.weight(point(u, v));
        let r: Vec<i64> =
            (0..p).map(|u| (0..q).map(|v| w(u, v)).min().unwrap()).collect();
        let c: Vec<i64> = (0..q).map(|v| w(0, v) - r[0]).collect();
        for u in 0..p {
            for v in 0..q {
                if w(u, v) != r[u as usize] + c[v as usize] {
                    return Ok(None);
                }
            }
        }
        for (u, &mult) in r.iter().enumerate() {
            if mult > 0 {
                fibers.push((1usize, point(u as u64, 0), mult));
            }
        }
        for (v, &mult) in c.iter().enumerate() {
            if mult > 0 {
                fibers.push((0usize, point(0, v as u64), mult));
            }
        }
    }
    fibers.sort_unstable();
    Ok(Some(FiberCombination { fibers }))
}

/// Fibers of uniform multiplicity decomposing the half-scale reduction of a
/// set in the two directions other than `nu`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformFiberDecomposition {
    pub multiplicity: i64,
    /// `(direction, fiber root)` pairs over the reduced modulus.
    pub fibers: Vec<(usize, u64)>,
}

/// When both reduced-scale cyclotomics in direction `nu` divide the set and
/// its half-scale reduction has binary weights, decomposes the reduction
/// into fibers of uniform multiplicity in the other two directions.
pub fn double_divisibility_decomposition(
    a: &Multiset,
    nu: usize,
) -> Result<Option<UniformFiberDecomposition>> {
    let m = a.modulus();
    require_three_squares(m)?;
    if a.entries().iter().any(|&(_, w)| w < 0) {
        return Err(Error::InvalidArgument(
            "weights must be nonnegative".into(),
        ));
    }
    let p = m.prime(nu);
    let half = m.value() / p;
    let quarter = m.value() / (p * p);
    if !divides(half, a) || !divides(quarter, a) {
        return Ok(None);
    }
    let reduced = a.reduce_mod(half)?;
    let rm = reduced.modulus().clone();
    let positive: BTreeSet<i64> = reduced
        .entries()
        .iter()
        .map(|&(_, w)| w)
        .filter(|&w| w != 0)
        .collect();
    let Some((&c0, rest)) =
        positive.iter().next().map(|f| (f, positive.len()))
    else {
        return Ok(None);
    };
    if rest != 1 {
        return Ok(None);
    }
    let others: Vec<usize> = (0..3)
        .filter(|&d| rm.prime(d) != p)
        .collect();
    let (dj, dk) = (others[0], others[1]);
    let grid_step = half / (rm.prime(dj) * rm.prime(dk));
    let mut fibers = Vec::new();
    for root in 0..grid_step {
        let members = rm.grid(root, grid_step);
        if members.iter().all(|&y| reduced.weight(y) == 0) {
            continue;
        }
        let uniform = |d: usize| {
            members.iter().all(|&y| {
                reduced.weight(y)
                    == reduced.weight(rm.add(y, half / rm.prime(d)))
            })
        };
        let d = if uniform(dj) {
            dj
        } else if uniform(dk) {
            dk
        } else {
            return Err(Error::NotATiling(format!(
                "reduced grid at {root} is fibered in neither available direction"
            )));
        };
        let fiber_step = half / rm.prime(d);
        let mut seen = BTreeSet::new();
        for &y in &members {
            if reduced.weight(y) == 0 {
                continue;
            }
            let fiber: BTreeSet<u64> = (0..rm.prime(d))
                .map(|t| rm.add(y, t * fiber_step))
                .collect();
            let root_elem = *fiber.iter().next().expect("nonempty");
            if seen.insert(root_elem) {
                fibers.push((d, root_elem));
            }
        }
    }
    let mut resum = Multiset::empty(rm.clone());
    for &(d, root_elem) in &fibers {
        let fiber: Vec<(u64, i64)> = (0..rm.prime(d))
            .map(|t| (rm.add(root_elem, t * (half / rm.prime(d))), c0))
            .collect();
        resum = resum.add(&Multiset::from_weights(rm.clone(), &fiber))?;
    }
    if resum != reduced {
        return Err(Error::NotATiling(
            "fiber decomposition does not re-sum to the reduction".into(),
        ));
    }
    fibers.sort_unstable();
    Ok(Some(UniformFiberDecomposition { multiplicity: c0, fibers }))
}
