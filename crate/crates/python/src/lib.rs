//! Python bindings: thin wrappers over the core crate that accept plain
//! integers and lists and raise `ValueError` on invalid input.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tilekit::corpus::{parse_line, record_line, replay_line};
use tilekit::cyclotomic::{check_t1, check_t2, standard_complement, Spectrum};
use tilekit::search::{fold_tilings, sample_structured, SearchConfig, SearchStatus};
use tilekit::tiling::{sands_check, verify_tiling};
use tilekit::{Modulus, Multiset};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn set(m: u64, elems: &[u64]) -> PyResult<(Modulus, Multiset)> {
    let md = Modulus::new(m).map_err(value_err)?;
    let ms = Multiset::from_set(md.clone(), elems).map_err(value_err)?;
    Ok((md, ms))
}

/// True when the two sets tile the cyclic group of order `m`.
#[pyfunction]
fn verify(m: u64, a: Vec<u64>, b: Vec<u64>) -> PyResult<bool> {
    let (_, ma) = set(m, &a)?;
    let (_, mb) = set(m, &b)?;
    Ok(verify_tiling(&ma, &mb))
}

/// The divisor-intersection test for the same property.
#[pyfunction]
fn sands(m: u64, a: Vec<u64>, b: Vec<u64>) -> PyResult<bool> {
    let (_, ma) = set(m, &a)?;
    let (_, mb) = set(m, &b)?;
    Ok(sands_check(&ma, &mb))
}

/// Prime-power spectrum of one factor.
#[pyfunction]
fn spectrum(m: u64, a: Vec<u64>) -> PyResult<Vec<u64>> {
    let (_, ma) = set(m, &a)?;
    Ok(Spectrum::compute(&ma).elements().to_vec())
}

#[pyfunction]
fn t1(m: u64, a: Vec<u64>) -> PyResult<bool> {
    let (_, ma) = set(m, &a)?;
    Ok(check_t1(&ma))
}

#[pyfunction]
fn t2(m: u64, a: Vec<u64>) -> PyResult<bool> {
    let (_, ma) = set(m, &a)?;
    check_t2(&ma).map_err(value_err)
}

/// The standard tile built from the factor's spectrum.
#[pyfunction]
fn standard_tile(m: u64, a: Vec<u64>) -> PyResult<Vec<u64>> {
    let (_, ma) = set(m, &a)?;
    Ok(standard_complement(&Spectrum::compute(&ma)).support())
}

/// Dilation of the set by `r`.
#[pyfunction]
fn dilate(m: u64, a: Vec<u64>, r: u64) -> PyResult<Vec<u64>> {
    let (_, ma) = set(m, &a)?;
    Ok(ma.dilate(r).support())
}

/// Box product at one residue pair, as an exact fraction.
#[pyfunction]
fn box_product(m: u64, a: Vec<u64>, b: Vec<u64>, x: u64, y: u64) -> PyResult<(i128, i128)> {
    let (_, ma) = set(m, &a)?;
    let (_, mb) = set(m, &b)?;
    let v = tilekit::boxes::box_product(&ma, &mb, x, y).map_err(value_err)?;
    Ok((*v.numer(), *v.denom()))
}

/// Number of normalized tilings, with the search status.
#[pyfunction]
#[pyo3(signature = (m, budget = 1_000_000_000))]
fn count_tilings(m: u64, budget: u64) -> PyResult<(u64, String)> {
    let md = Modulus::new(m).map_err(value_err)?;
    let cfg = SearchConfig { node_budget: budget, ..SearchConfig::new(md) };
    let run = fold_tilings(&cfg, 0u64, |n, _, _| *n += 1, |n, s| *n += s)
        .map_err(value_err)?;
    let status = match run.status {
        SearchStatus::Complete => "complete",
        SearchStatus::Stopped => "stopped",
        SearchStatus::BudgetExhausted => "budget-exhausted",
    };
    Ok((run.value, status.to_string()))
}

/// All normalized tilings as sorted pairs; meant for small moduli.
#[pyfunction]
#[pyo3(signature = (m, budget = 1_000_000_000))]
fn enumerate_tilings(m: u64, budget: u64) -> PyResult<Vec<(Vec<u64>, Vec<u64>)>> {
    let md = Modulus::new(m).map_err(value_err)?;
    let cfg = SearchConfig { node_budget: budget, ..SearchConfig::new(md) };
    let run = fold_tilings(
        &cfg,
        Vec::new(),
        |acc: &mut Vec<(Vec<u64>, Vec<u64>)>, a, b| {
            acc.push((a.to_vec(), b.to_vec()));
        },
        |acc, sub| acc.extend(sub),
    )
    .map_err(value_err)?;
    let mut items = run.value;
    items.sort();
    Ok(items)
}

/// Journaled structured samples as corpus lines.
#[pyfunction]
#[pyo3(signature = (m, seed, count = 1))]
fn sample_lines(m: u64, seed: u64, count: u64) -> PyResult<Vec<String>> {
    let md = Modulus::new(m).map_err(value_err)?;
    let cfg = SearchConfig { seed, ..SearchConfig::new(md) };
    let records = sample_structured(&cfg, count).map_err(value_err)?;
    records
        .iter()
        .map(|rec| record_line(rec, seed).map_err(value_err))
        .collect()
}

/// Re-checks one corpus line: the sets tile and any journal replays to them.
#[pyfunction]
fn certify_line(line: &str) -> PyResult<bool> {
    let parsed = parse_line(line).map_err(value_err)?;
    if parsed.instance().is_err() {
        return Ok(false);
    }
    if parsed.journal.is_some() {
        let rebuilt = replay_line(&parsed).map_err(value_err)?;
        return Ok(rebuilt.a().support() == parsed.a.support()
            && rebuilt.b().support() == parsed.b.support());
    }
    Ok(true)
}

#[pymodule]
fn tilekit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(sands, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(t1, m)?)?;
    m.add_function(wrap_pyfunction!(t2, m)?)?;
    m.add_function(wrap_pyfunction!(standard_tile, m)?)?;
    m.add_function(wrap_pyfunction!(dilate, m)?)?;
    m.add_function(wrap_pyfunction!(box_product, m)?)?;
    m.add_function(wrap_pyfunction!(count_tilings, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_tilings, m)?)?;
    m.add_function(wrap_pyfunction!(sample_lines, m)?)?;
    m.add_function(wrap_pyfunction!(certify_line, m)?)?;
    Ok(())
}
