//! Shared fixtures for the integration suites: an independent
//! subset-enumeration oracle and corpus builders over small moduli.
#![allow(dead_code)]

use std::collections::BTreeSet;

use tilekit::search::{enumerate_tilings, SearchConfig, SearchStatus};
use tilekit::tiling::TilingInstance;
use tilekit::{Modulus, Multiset};

pub fn modulus(m: u64) -> Modulus {
    Modulus::new(m).unwrap()
}

pub fn set(m: u64, elems: &[u64]) -> Multiset {
    Multiset::from_set(modulus(m), elems).unwrap()
}

/// All normalized tilings of `Z_m` found by raw subset enumeration.
///
/// The small factor (size at most `sqrt(m)`) is enumerated as a plain
/// subset containing `0`; its complements are found by placing translates,
/// one per element of the other factor, with `0` forced into both sides.
/// Pairs are deduplicated unordered and returned with the lexicographically
/// smaller factor first, matching the library's normalization.
pub fn naive_tilings(m: u64) -> BTreeSet<(Vec<u64>, Vec<u64>)> {
    let mut out = BTreeSet::new();
    for d in 1..=m {
        if m % d != 0 || d * d > m {
            continue;
        }
        let mut small = vec![0u64];
        enumerate_small(m, d, 1, &mut small, &mut out);
    }
    out
}

fn enumerate_small(
    m: u64,
    size: u64,
    next: u64,
    small: &mut Vec<u64>,
    out: &mut BTreeSet<(Vec<u64>, Vec<u64>)>,
) {
    if small.len() as u64 == size {
        let mut covered = vec![false; m as usize];
        for &x in small.iter() {
            covered[x as usize] = true;
        }
        let mut other = vec![0u64];
        complements_by_translates(m, small, &mut covered, &mut other, out);
        return;
    }
    for x in next..m {
        if m - x < size - small.len() as u64 {
            break;
        }
        small.push(x);
        enumerate_small(m, size, x + 1, small, out);
        small.pop();
    }
}

fn complements_by_translates(
    m: u64,
    small: &[u64],
    covered: &mut [bool],
    other: &mut Vec<u64>,
    out: &mut BTreeSet<(Vec<u64>, Vec<u64>)>,
) {
    let z = match covered.iter().position(|&c| !c) {
        Some(z) => z as u64,
        None => {
            let mut pair = (small.to_vec(), other.clone());
            pair.1.sort_unstable();
            if pair.1 < pair.0 {
                std::mem::swap(&mut pair.0, &mut pair.1);
            }
            out.insert(pair);
            return;
        }
    };
    for &a in small {
        let b = (z + m - a) % m;
        let translate: Vec<u64> = small.iter().map(|&x| (x + b) % m).collect();
        if translate.iter().any(|&y| covered[y as usize]) {
            continue;
        }
        for &y in &translate {
            covered[y as usize] = true;
        }
        other.push(b);
        complements_by_translates(m, small, covered, other, out);
        other.pop();
        for &y in &translate {
            covered[y as usize] = false;
        }
    }
}

/// Every normalized tiling of `Z_m`, via the library's exhaustive search.
pub fn corpus(m: u64) -> Vec<TilingInstance> {
    let cfg = SearchConfig::new(modulus(m));
    let found = enumerate_tilings(&cfg).unwrap();
    assert_eq!(found.status, SearchStatus::Complete, "enumeration of {m}");
    found.items
}

/// The `(A, B)` support pairs of a corpus, for set-level comparisons.
pub fn support_pairs(items: &[TilingInstance]) -> BTreeSet<(Vec<u64>, Vec<u64>)> {
    items
        .iter()
        .map(|t| (t.a().support(), t.b().support()))
        .collect()
}
