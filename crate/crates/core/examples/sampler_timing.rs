use std::collections::{HashMap, HashSet};
use std::time::Instant;

use tilekit::cyclotomic::{standard_complement, Spectrum};
use tilekit::isometry::IsometryMap;
use tilekit::search::{sample_structured, SearchConfig};
use tilekit::structure::canonical_translate;
use tilekit::tiling::verify_tiling;
use tilekit::{Modulus, Multiset};

fn plane_images(m: &Modulus, base: &Multiset) -> Vec<Multiset> {
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut out = Vec::new();
    let canon = canonical_translate(base);
    seen.insert(canon.support());
    out.push(canon);
    for nu in 0..m.num_primes() {
        let p = m.prime(nu);
        for alpha in 0..m.exponent(nu) {
            let step = m.value() / p.pow(alpha + 1);
            for c in 0..m.value() {
                for u in 1..p.pow(alpha + 1) {
                    if u % p == 0 {
                        continue;
                    }
                    let c_prime = m.add(c, u * step);
                    let Ok(map) =
                        IsometryMap::plane_exchange(m.clone(), c, c_prime, nu, alpha)
                    else {
                        continue;
                    };
                    let img = canonical_translate(&map.apply(base));
                    if seen.insert(img.support()) {
                        out.push(img);
                    }
                }
            }
        }
    }
    out
}

fn main() {
    let m = Modulus::new(900).unwrap();
    let cfg = SearchConfig {
        seed: 0xACCE97,
        size_split: Some((30, 30)),
        ..SearchConfig::new(m.clone())
    };
    let records = sample_structured(&cfg, 200).unwrap();

    let powers: Vec<u64> = vec![2, 4, 3, 9, 5, 25];
    let mut family: HashMap<Vec<u64>, Vec<Multiset>> = HashMap::new();
    let t0 = Instant::now();
    let mut spec_mismatch = 0usize;
    let mut hits = 0usize;
    let mut verified_hits = 0usize;
    let mut candidates_scanned = 0u64;
    for rec in &records {
        let a = rec.instance.a();
        let s_a = Spectrum::compute(a);
        if s_a.elements() != rec.spec_a.as_slice() {
            spec_mismatch += 1;
        }
        let rest: Vec<u64> = powers
            .iter()
            .copied()
            .filter(|s| !s_a.elements().contains(s))
            .collect();
        let images = family.entry(rest.clone()).or_insert_with(|| {
            let spec = Spectrum::from_elements(m.clone(), rest.clone()).unwrap();
            plane_images(&m, &standard_complement(&spec))
        });
        let target = canonical_translate(rec.instance.b()).support();
        let mut found = None;
        'scan: for r in m.units() {
            for img in images.iter() {
                candidates_scanned += 1;
                let cand = canonical_translate(&img.dilate(r));
                if cand.support() == target {
                    found = Some(cand);
                    break 'scan;
                }
            }
        }
        if let Some(cand) = found {
            hits += 1;
            let mut shift = None;
            for c in 0..m.value() {
                let moved = cand.translate(c);
                if verify_tiling(a, &moved) {
                    shift = Some(c);
                    break;
                }
            }
            if shift.is_some() {
                verified_hits += 1;
            }
        }
    }
    let sizes: Vec<usize> = family.values().map(|v| v.len()).collect();
    println!(
        "hits {hits}/200 verified {verified_hits} spec_mismatch {spec_mismatch}"
    );
    println!(
        "family sizes {sizes:?} candidates {candidates_scanned} ({:?})",
        t0.elapsed()
    );
}
