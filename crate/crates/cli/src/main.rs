//! Command-line front end. Every subcommand reads JSON from `--input` (or
//! stdin), writes a deterministic report to stdout, and exits 0 when the
//! checked property holds, 1 when it fails with a witness, and 2 on
//! malformed or inapplicable input.

use std::fs;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use tilekit::corpus::{instance_line, parse_line, record_line, replay_line};
use tilekit::cyclotomic::{
    check_t1, check_t2, divides, standard_complement, Spectrum,
};
use tilekit::isometry::IsometryMap;
use tilekit::search::{
    fold_tilings, sample_structured, SearchConfig, SearchStatus,
};
use tilekit::splitting::{fiber_parity, slab_equivalence, Parity};
use tilekit::structure::{find_cofiber, grid_fibered_hypothesis, scale_fiber_roots};
use tilekit::tiling::{divisor_set, sands_check, verify_tiling, TilingInstance};
use tilekit::{Error, Modulus, Multiset};

#[derive(Parser)]
#[command(name = "tilekit", version, about = "Tilings of cyclic groups: verify, classify, enumerate")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that two sets tile the cyclic group.
    Verify(InputArgs),
    /// Report the prime-power spectrum of one factor.
    Spectrum(InputArgs),
    /// Check the product condition on one factor's spectrum.
    T2(InputArgs),
    /// Emit the standard tile built from one factor's spectrum.
    Flat(InputArgs),
    /// Apply a divisor isometry to one factor.
    Isometry(IsometryArgs),
    /// Evaluate the box product over residue pairs.
    Boxes(BoxArgs),
    /// Report which factor a fiber splits through.
    Split(SplitArgs),
    /// Compare the slab conditions in one direction.
    Slab(SlabArgs),
    /// Summarize the structure of a factor or pair.
    Classify(InputArgs),
    /// Enumerate normalized tilings of a modulus.
    Enumerate(EnumArgs),
    /// Generate journaled structured tilings.
    Sample(SampleArgs),
    /// Re-check every line of a corpus file.
    Certify(InputArgs),
    /// Rebuild instances from journaled corpus lines.
    Replay(InputArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct InputArgs {
    /// Input file, `-` for stdin.
    #[arg(long, default_value = "-")]
    input: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; 0 keeps the library default.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct IsometryArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Translate by this residue.
    #[arg(long)]
    translate: Option<u64>,
    /// Dilate by this unit.
    #[arg(long)]
    dilate: Option<u64>,
    /// Exchange planes: `c,c_prime,direction,depth`.
    #[arg(long)]
    exchange: Option<String>,
}

#[derive(Args)]
struct BoxArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Residue pairs to sample; 0 checks all pairs.
    #[arg(long, default_value_t = 0)]
    pairs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SplitArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Prime direction index.
    #[arg(long)]
    direction: usize,
    /// Fiber root.
    #[arg(long, default_value_t = 0)]
    root: u64,
    /// Scaling depth below the top of the direction.
    #[arg(long, default_value_t = 0)]
    scale: u32,
}

#[derive(Args)]
struct SlabArgs {
    #[command(flatten)]
    io: InputArgs,
    /// Prime direction index.
    #[arg(long)]
    direction: usize,
}

#[derive(Args)]
struct EnumArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Group order to enumerate.
    #[arg(long)]
    modulus: u64,
    /// Search node budget.
    #[arg(long, default_value_t = 1_000_000_000)]
    budget: u64,
    /// Print only the summary.
    #[arg(long, default_value_t = false)]
    count_only: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Group order to sample in.
    #[arg(long)]
    modulus: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Records to generate.
    #[arg(long, default_value_t = 1)]
    count: u64,
}

/// A pair (or single factor) in the wire format `{"M":..,"A":..,"B":..}`.
#[derive(Deserialize)]
struct PairInput {
    #[serde(rename = "M")]
    m: u64,
    #[serde(rename = "A")]
    a: Vec<u64>,
    #[serde(rename = "B", default)]
    b: Option<Vec<u64>>,
}

enum CmdError {
    Property(String),
    Malformed(String),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> CmdError {
        CmdError::Malformed(e.to_string())
    }
}

impl From<serde_json::Error> for CmdError {
    fn from(e: serde_json::Error) -> CmdError {
        CmdError::Malformed(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> CmdError {
        CmdError::Malformed(e.to_string())
    }
}

type CmdResult = Result<(), CmdError>;

fn read_input(path: &str) -> Result<String, CmdError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn parse_pair(text: &str) -> Result<(Modulus, Multiset, Option<Multiset>), CmdError> {
    let input: PairInput = serde_json::from_str(text.trim())?;
    let m = Modulus::new(input.m)?;
    let a = Multiset::from_set(m.clone(), &input.a)?;
    let b = match input.b {
        Some(ref elems) => Some(Multiset::from_set(m.clone(), elems)?),
        None => None,
    };
    Ok((m, a, b))
}

fn require_b(b: Option<Multiset>) -> Result<Multiset, CmdError> {
    b.ok_or_else(|| CmdError::Malformed("input is missing the second factor \"B\"".into()))
}

fn init_workers(workers: usize) {
    if workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
}

/// Writes one line to stdout; `false` means the reader hung up and the
/// command should stop producing output.
fn out_line(s: &str) -> bool {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{s}").is_ok()
}

fn emit<T: Serialize>(format: Format, report: &T, text: String) {
    match format {
        Format::Json => {
            out_line(&serde_json::to_string(report).expect("reports serialize"));
        }
        Format::Text => {
            out_line(&text);
        }
    }
}

#[derive(Serialize)]
struct CoverWitness {
    residue: u64,
    count: u64,
}

#[derive(Serialize)]
struct VerifyReport {
    m: u64,
    tiling: bool,
    direct: bool,
    divisor_intersection: bool,
    polynomial: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<CoverWitness>,
}

fn cover_witness(m: &Modulus, a: &Multiset, b: &Multiset) -> Option<CoverWitness> {
    let mut counts = vec![0u64; m.value() as usize];
    for &x in &a.support() {
        for &y in &b.support() {
            counts[m.add(x, y) as usize] += 1;
        }
    }
    counts
        .iter()
        .position(|&c| c != 1)
        .map(|z| CoverWitness { residue: z as u64, count: counts[z] })
}

fn cmd_verify(args: &InputArgs) -> CmdResult {
    let (m, a, b) = parse_pair(&read_input(&args.input)?)?;
    let b = require_b(b)?;
    let direct = verify_tiling(&a, &b);
    let report = VerifyReport {
        m: m.value(),
        tiling: direct,
        direct,
        divisor_intersection: sands_check(&a, &b),
        polynomial: tilekit::tiling::poly_criterion(&a, &b),
        witness: if direct { None } else { cover_witness(&m, &a, &b) },
    };
    let text = match &report.witness {
        None if direct => "tiling".to_string(),
        Some(w) => format!("not a tiling: residue {} covered {} times", w.residue, w.count),
        None => "not a tiling".to_string(),
    };
    emit(args.format, &report, text);
    if direct {
        Ok(())
    } else {
        Err(CmdError::Property("pair does not tile".into()))
    }
}

#[derive(Serialize)]
struct SpectrumReport {
    m: u64,
    size: u64,
    spectrum: Vec<u64>,
    t1_size: u64,
    t1: bool,
}

fn cmd_spectrum(args: &InputArgs) -> CmdResult {
    let (m, a, _) = parse_pair(&read_input(&args.input)?)?;
    let spec = Spectrum::compute(&a);
    let report = SpectrumReport {
        m: m.value(),
        size: a.support_len() as u64,
        spectrum: spec.elements().to_vec(),
        t1_size: spec.t1_size(),
        t1: check_t1(&a),
    };
    let text = format!(
        "spectrum {{{}}}, size product {}, factor size {} ({})",
        report
            .spectrum
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(", "),
        report.t1_size,
        report.size,
        if report.t1 { "matched" } else { "unmatched" }
    );
    emit(args.format, &report, text);
    Ok(())
}

#[derive(Serialize)]
struct T2Report {
    m: u64,
    t2: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<u64>,
}

/// First product of spectrum prime powers from distinct primes that the
/// factor misses.
fn t2_witness(a: &Multiset, spec: &Spectrum) -> Option<u64> {
    let elems = spec.elements();
    for (i, &q) in elems.iter().enumerate() {
        for &r in &elems[i + 1..] {
            if gcd(q, r) != 1 {
                continue;
            }
            if !divides(q * r, a) {
                return Some(q * r);
            }
            for &s in elems {
                if gcd(s, q * r) == 1 && !divides(q * r * s, a) {
                    return Some(q * r * s);
                }
            }
        }
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn cmd_t2(args: &InputArgs) -> CmdResult {
    let (m, a, _) = parse_pair(&read_input(&args.input)?)?;
    let spec = Spectrum::compute(&a);
    let good = check_t2(&a)?;
    let report = T2Report {
        m: m.value(),
        t2: good,
        witness: if good { None } else { t2_witness(&a, &spec) },
    };
    let text = match report.witness {
        None if good => "products divide".to_string(),
        Some(s) => format!("missing product divisor {s}"),
        None => "products do not divide".to_string(),
    };
    emit(args.format, &report, text);
    if good {
        Ok(())
    } else {
        Err(CmdError::Property("spectrum products do not divide".into()))
    }
}

#[derive(Serialize)]
struct FlatReport {
    m: u64,
    spectrum: Vec<u64>,
    flat: Vec<u64>,
}

fn cmd_flat(args: &InputArgs) -> CmdResult {
    let (m, a, _) = parse_pair(&read_input(&args.input)?)?;
    let spec = Spectrum::compute(&a);
    let flat = standard_complement(&spec);
    let report = FlatReport {
        m: m.value(),
        spectrum: spec.elements().to_vec(),
        flat: flat.support(),
    };
    let text = format!(
        "standard tile {:?}",
        report.flat
    );
    emit(args.format, &report, text);
    Ok(())
}

#[derive(Serialize)]
struct IsometryReport {
    m: u64,
    image: Vec<u64>,
}

fn cmd_isometry(args: &IsometryArgs) -> CmdResult {
    let (m, a, _) = parse_pair(&read_input(&args.io.input)?)?;
    let chosen = [args.translate.is_some(), args.dilate.is_some(), args.exchange.is_some()]
        .iter()
        .filter(|&&x| x)
        .count();
    if chosen != 1 {
        return Err(CmdError::Malformed(
            "pass exactly one of --translate, --dilate, --exchange".into(),
        ));
    }
    let map = if let Some(c) = args.translate {
        IsometryMap::translation(m.clone(), c)
    } else if let Some(r) = args.dilate {
        IsometryMap::dilation(m.clone(), r)?
    } else {
        let raw = args.exchange.as_deref().unwrap();
        let parts: Vec<&str> = raw.split(',').collect();
        if parts.len() != 4 {
            return Err(CmdError::Malformed(
                "--exchange takes c,c_prime,direction,depth".into(),
            ));
        }
        let parse = |s: &str| -> Result<u64, CmdError> {
            s.trim()
                .parse::<u64>()
                .map_err(|e| CmdError::Malformed(e.to_string()))
        };
        IsometryMap::plane_exchange(
            m.clone(),
            parse(parts[0])?,
            parse(parts[1])?,
            parse(parts[2])? as usize,
            parse(parts[3])? as u32,
        )?
    };
    let image = map.apply(&a);
    let report = IsometryReport { m: m.value(), image: image.support() };
    let text = format!("image {:?}", report.image);
    emit(args.io.format, &report, text);
    Ok(())
}

#[derive(Serialize)]
struct BoxWitness {
    x: u64,
    y: u64,
    value: String,
}

#[derive(Serialize)]
struct BoxReport {
    m: u64,
    pairs: u64,
    all_one: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<BoxWitness>,
}

fn cmd_boxes(args: &BoxArgs) -> CmdResult {
    let (m, a, b) = parse_pair(&read_input(&args.io.input)?)?;
    let b = require_b(b)?;
    let mut witness: Option<BoxWitness> = None;
    let mut pairs = 0u64;
    let mut check = |x: u64, y: u64| -> Result<bool, CmdError> {
        pairs += 1;
        let v = tilekit::boxes::box_product(&a, &b, x, y)?;
        if v != num_rational_one() {
            witness = Some(BoxWitness { x, y, value: v.to_string() });
            return Ok(false);
        }
        Ok(true)
    };
    if args.pairs == 0 {
        'outer: for x in 0..m.value() {
            for y in 0..m.value() {
                if !check(x, y)? {
                    break 'outer;
                }
            }
        }
    } else {
        let mut state = args.seed ^ 0x9e37_79b9_7f4a_7c15;
        for _ in 0..args.pairs {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = (state >> 33) % m.value();
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let y = (state >> 33) % m.value();
            if !check(x, y)? {
                break;
            }
        }
    }
    let all_one = witness.is_none();
    let report = BoxReport { m: m.value(), pairs, all_one, witness };
    let text = match &report.witness {
        None => format!("box product is one on {pairs} pairs"),
        Some(w) => format!("box product {} at ({}, {})", w.value, w.x, w.y),
    };
    emit(args.io.format, &report, text);
    if all_one {
        Ok(())
    } else {
        Err(CmdError::Property("box product differs from one".into()))
    }
}

fn num_rational_one() -> num_rational::Ratio<i128> {
    num_rational::Ratio::from_integer(1)
}

#[derive(Serialize)]
struct SplitReportDto {
    m: u64,
    direction: usize,
    root: u64,
    scale: u32,
    parity: String,
    degenerate: bool,
    witnesses: Vec<(u64, u64, u64)>,
}

fn cmd_split(args: &SplitArgs) -> CmdResult {
    let (m, a, b) = parse_pair(&read_input(&args.io.input)?)?;
    let b = require_b(b)?;
    if args.direction >= m.num_primes() {
        return Err(CmdError::Malformed(format!(
            "direction {} out of range for {} prime directions",
            args.direction,
            m.num_primes()
        )));
    }
    let t = TilingInstance::new(a, b)?;
    match fiber_parity(&t, args.root, args.direction, args.scale) {
        Ok(rep) => {
            let report = SplitReportDto {
                m: m.value(),
                direction: args.direction,
                root: args.root,
                scale: args.scale,
                parity: match rep.parity {
                    Parity::AB => "AB".to_string(),
                    Parity::BA => "BA".to_string(),
                },
                degenerate: rep.degenerate,
                witnesses: rep.witnesses,
            };
            let text = format!(
                "fiber at {} direction {} splits {}",
                args.root, args.direction, report.parity
            );
            emit(args.io.format, &report, text);
            Ok(())
        }
        Err(e) => Err(CmdError::Property(e.to_string())),
    }
}

#[derive(Serialize)]
struct SlabReport {
    m: u64,
    direction: usize,
    divisor_condition: bool,
    uniform_splitting: bool,
    product_splitting: bool,
    cyclotomic_condition: bool,
    consistent: bool,
}

fn cmd_slab(args: &SlabArgs) -> CmdResult {
    let (m, a, b) = parse_pair(&read_input(&args.io.input)?)?;
    let b = require_b(b)?;
    if args.direction >= m.num_primes() {
        return Err(CmdError::Malformed(format!(
            "direction {} out of range for {} prime directions",
            args.direction,
            m.num_primes()
        )));
    }
    let t = TilingInstance::new(a, b)?;
    let eq = slab_equivalence(&t, args.direction)?;
    let consistent = eq.consistent();
    let report = SlabReport {
        m: m.value(),
        direction: args.direction,
        divisor_condition: eq.divisor_condition,
        uniform_splitting: eq.uniform_splitting,
        product_splitting: eq.product_splitting,
        cyclotomic_condition: eq.cyclotomic_condition,
        consistent,
    };
    let text = format!(
        "slab conditions {} in direction {}",
        if consistent { "agree" } else { "disagree" },
        args.direction
    );
    emit(args.io.format, &report, text);
    if consistent {
        Ok(())
    } else {
        Err(CmdError::Property("slab conditions disagree".into()))
    }
}

#[derive(Serialize)]
struct ClassifyReport {
    m: u64,
    size: u64,
    divisors: Vec<u64>,
    spectrum: Vec<u64>,
    t1: bool,
    t2: Option<bool>,
    /// Fiber roots of the factor at half scale per direction, when it is a
    /// union of such fibers.
    fiber_roots: Vec<Option<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tiling: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_fibered: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cofibered_directions: Option<Vec<usize>>,
}

fn cmd_classify(args: &InputArgs) -> CmdResult {
    let (m, a, b) = parse_pair(&read_input(&args.input)?)?;
    let spec = Spectrum::compute(&a);
    let mut fiber_roots = Vec::new();
    for nu in 0..m.num_primes() {
        let p = m.prime(nu);
        let scale = m.value() / p;
        if scale % p == 0 {
            fiber_roots.push(scale_fiber_roots(&a, nu, scale)?);
        } else {
            fiber_roots.push(None);
        }
    }
    let mut report = ClassifyReport {
        m: m.value(),
        size: a.support_len() as u64,
        divisors: divisor_set(&a, m.value()),
        spectrum: spec.elements().to_vec(),
        t1: check_t1(&a),
        t2: check_t2(&a).ok(),
        fiber_roots,
        tiling: None,
        grid_fibered: None,
        cofibered_directions: None,
    };
    if let Some(b) = b {
        let tiles = verify_tiling(&a, &b);
        report.tiling = Some(tiles);
        if tiles {
            let t = TilingInstance::new(a.clone(), b)?;
            report.grid_fibered = grid_fibered_hypothesis(&t).ok();
            let mut dirs = Vec::new();
            for nu in 0..m.num_primes() {
                if matches!(find_cofiber(&t, nu), Ok(Some(_))) {
                    dirs.push(nu);
                }
            }
            report.cofibered_directions = Some(dirs);
        }
    }
    let text = format!(
        "size {}, spectrum {:?}, divisors {:?}",
        report.size, report.spectrum, report.divisors
    );
    emit(args.format, &report, text);
    Ok(())
}

#[derive(Serialize)]
struct EnumSummary {
    m: u64,
    count: u64,
    nodes: u64,
    status: String,
}

fn cmd_enumerate(args: &EnumArgs) -> CmdResult {
    init_workers(args.workers);
    let m = Modulus::new(args.modulus)?;
    let cfg = SearchConfig {
        node_budget: args.budget,
        ..SearchConfig::new(m.clone())
    };
    let emit_lines = !args.count_only;
    let run = fold_tilings(
        &cfg,
        (0u64, Vec::<String>::new()),
        |acc, a, b| {
            acc.0 += 1;
            if emit_lines {
                let t = TilingInstance::from_sets(m.clone(), a, b)
                    .expect("enumerated pairs tile");
                acc.1.push(instance_line(&t));
            }
        },
        |acc, sub| {
            acc.0 += sub.0;
            acc.1.extend(sub.1);
        },
    )?;
    let (count, lines) = run.value;
    for line in &lines {
        if !out_line(line) {
            return Ok(());
        }
    }
    let summary = EnumSummary {
        m: args.modulus,
        count,
        nodes: run.nodes,
        status: match run.status {
            SearchStatus::Complete => "complete".to_string(),
            SearchStatus::Stopped => "stopped".to_string(),
            SearchStatus::BudgetExhausted => "budget-exhausted".to_string(),
        },
    };
    let text = format!(
        "{} tilings of Z_{} ({})",
        summary.count, summary.m, summary.status
    );
    emit(args.format, &summary, text);
    Ok(())
}

fn cmd_sample(args: &SampleArgs) -> CmdResult {
    init_workers(args.workers);
    let m = Modulus::new(args.modulus)?;
    let cfg = SearchConfig { seed: args.seed, ..SearchConfig::new(m) };
    let records = sample_structured(&cfg, args.count)?;
    for rec in &records {
        let line = match args.format {
            Format::Json => record_line(rec, args.seed)?,
            Format::Text => format!(
                "A={:?} B={:?}",
                rec.instance.a().support(),
                rec.instance.b().support()
            ),
        };
        if !out_line(&line) {
            return Ok(());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CertifyLine {
    line: usize,
    tiling: bool,
    t1: bool,
    replayed: Option<bool>,
}

#[derive(Serialize)]
struct CertifySummary {
    lines: u64,
    ok: u64,
}

fn cmd_certify(args: &InputArgs) -> CmdResult {
    let text = read_input(&args.input)?;
    let mut reports: Vec<CertifyLine> = Vec::new();
    let mut ok = 0u64;
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let parsed = parse_line(raw)?;
        let tiling = parsed.instance().is_ok();
        let t1 = check_t1(&parsed.a) && check_t1(&parsed.b);
        let replayed = parsed.journal.as_ref().map(|_| {
            replay_line(&parsed).map_or(false, |t| {
                t.a().support() == parsed.a.support()
                    && t.b().support() == parsed.b.support()
            })
        });
        let good = tiling && t1 && replayed != Some(false);
        if good {
            ok += 1;
        }
        reports.push(CertifyLine { line: idx + 1, tiling, t1, replayed });
    }
    let total = reports.len() as u64;
    for rep in &reports {
        let text = format!(
            "line {}: {}",
            rep.line,
            if rep.tiling && rep.t1 && rep.replayed != Some(false) {
                "ok"
            } else {
                "bad"
            }
        );
        emit(args.format, rep, text);
    }
    let summary = CertifySummary { lines: total, ok };
    emit(args.format, &summary, format!("{ok}/{total} lines certified"));
    if ok == total {
        Ok(())
    } else {
        Err(CmdError::Property(format!("{} corpus lines failed", total - ok)))
    }
}

fn cmd_replay(args: &InputArgs) -> CmdResult {
    let text = read_input(&args.input)?;
    let mut bad = 0u64;
    for raw in text.lines() {
        if raw.trim().is_empty() {
            continue;
        }
        let parsed = parse_line(raw)?;
        if parsed.journal.is_none() {
            return Err(CmdError::Malformed(
                "corpus line carries no journal to replay".into(),
            ));
        }
        let rebuilt = replay_line(&parsed)?;
        let matches = rebuilt.a().support() == parsed.a.support()
            && rebuilt.b().support() == parsed.b.support();
        if !matches {
            bad += 1;
        }
        let line = match args.format {
            Format::Json => instance_line(&rebuilt),
            Format::Text => format!(
                "A={:?} B={:?} ({})",
                rebuilt.a().support(),
                rebuilt.b().support(),
                if matches { "matches" } else { "differs" }
            ),
        };
        if !out_line(&line) {
            break;
        }
    }
    if bad == 0 {
        Ok(())
    } else {
        Err(CmdError::Property(format!("{bad} journals replayed to different sets")))
    }
}

fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.cmd {
        Cmd::Verify(a) => {
            init_workers(a.workers);
            cmd_verify(a)
        }
        Cmd::Spectrum(a) => cmd_spectrum(a),
        Cmd::T2(a) => cmd_t2(a),
        Cmd::Flat(a) => cmd_flat(a),
        Cmd::Isometry(a) => cmd_isometry(a),
        Cmd::Boxes(a) => cmd_boxes(a),
        Cmd::Split(a) => cmd_split(a),
        Cmd::Slab(a) => cmd_slab(a),
        Cmd::Classify(a) => cmd_classify(a),
        Cmd::Enumerate(a) => cmd_enumerate(a),
        Cmd::Sample(a) => cmd_sample(a),
        Cmd::Certify(a) => cmd_certify(a),
        Cmd::Replay(a) => cmd_replay(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Property(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(CmdError::Malformed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
