use std::time::Instant;

use tilekit::cyclotomic::divides;
use tilekit::search::{
    enumerate_complements_with, sample_structured, SearchConfig,
};
use tilekit::structure::{canonical_translate, find_cofiber, t2_normalize, NormalizeOutcome};
use tilekit::{Modulus, Multiset};

#[test]
#[ignore]
fn probe_sampling_and_rediscovery() {
    let m = Modulus::new(900).unwrap();
    let cfg = SearchConfig { seed: 0xACCE97, ..SearchConfig::new(m.clone()) };
    let t0 = Instant::now();
    let records = sample_structured(&cfg, 200).unwrap();
    eprintln!("sample 200: {:?}", t0.elapsed());

    let mut cof = 0usize;
    let mut gates = 0usize;
    let t1 = Instant::now();
    for rec in &records {
        for nu in 0..3 {
            if find_cofiber(&rec.instance, nu).unwrap().is_some() {
                cof += 1;
            }
        }
        let t = if divides(900, rec.instance.a()) {
            rec.instance.clone()
        } else {
            rec.instance.swapped()
        };
        if divides(900, t.a()) {
            gates += 1;
        }
    }
    eprintln!("cofiber dirs: {cof}, gate ok: {gates} ({:?})", t1.elapsed());

    let t2 = Instant::now();
    let mut succ = 0usize;
    let mut inconcl = 0usize;
    for rec in records.iter().take(12) {
        let t = if divides(900, rec.instance.a()) {
            rec.instance.clone()
        } else {
            rec.instance.swapped()
        };
        match t2_normalize(&t) {
            Ok(NormalizeOutcome::Normalized { .. }) => succ += 1,
            Ok(NormalizeOutcome::Inconclusive { .. }) => inconcl += 1,
            Err(e) => eprintln!("normalize gate: {e}"),
        }
    }
    eprintln!("normalize: {succ} ok, {inconcl} inconclusive ({:?})", t2.elapsed());

    for (i, rec) in records.iter().enumerate().filter(|(i, _)| i % 8 == 0).take(5) {
        let t3 = Instant::now();
        let target = canonical_translate(rec.instance.b());
        let cfg9 = SearchConfig {
            node_budget: 100_000_000,
            ..SearchConfig::new(m.clone())
        };
        let mut found = false;
        let mut visits = 0u64;
        let run = enumerate_complements_with(rec.instance.a(), &cfg9, |b| {
            visits += 1;
            let mb = Multiset::from_set(m.clone(), b).unwrap();
            if canonical_translate(&mb) == target {
                found = true;
                false
            } else {
                true
            }
        })
        .unwrap();
        eprintln!(
            "rediscover {i}: found={found} visits={visits} status={:?} {:?}",
            run.status,
            t3.elapsed()
        );
    }
}
