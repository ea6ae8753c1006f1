//! Corpus files: one JSON object per line holding a tiling instance, with
//! optional generation metadata (spectrum split, isometry moves, fiber-shift
//! journal) sufficient to rebuild the instance from its standard pair.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::IsometryTag;
use crate::multiset::Multiset;
use crate::search::{replay_sample, SampleRecord};
use crate::structure::ShiftMove;
use crate::tiling::TilingInstance;
use crate::zmod::Modulus;

pub const SCHEMA: &str = "tilekit/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum TagDto {
    Translation(u64),
    Dilation(u64),
    PlaneExchange { c: u64, c_prime: u64, nu: usize, alpha: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JournalDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    index: Option<u64>,
    spec_a: Vec<u64>,
    a_moves: Vec<TagDto>,
    b_moves: Vec<TagDto>,
    /// `(direction, fiber root, target root)` triples.
    shifts: Vec<(usize, u64, u64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    #[serde(rename = "M")]
    m: u64,
    #[serde(rename = "A")]
    a: Vec<u64>,
    #[serde(rename = "B")]
    b: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    journal: Option<JournalDto>,
}

/// Generation metadata carried alongside an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Journal {
    pub seed: Option<u64>,
    pub index: Option<u64>,
    pub spec_a: Vec<u64>,
    pub a_moves: Vec<IsometryTag>,
    pub b_moves: Vec<IsometryTag>,
    pub shifts: Vec<ShiftMove>,
}

/// One parsed corpus line: the raw sets plus optional journal; the sets are
/// not yet checked to tile.
#[derive(Debug, Clone)]
pub struct ParsedLine {
    pub modulus: Modulus,
    pub a: Multiset,
    pub b: Multiset,
    pub journal: Option<Journal>,
}

impl ParsedLine {
    /// Verifies the sets as a tiling.
    pub fn instance(&self) -> Result<TilingInstance> {
        TilingInstance::new(self.a.clone(), self.b.clone())
    }
}

fn tag_to_dto(tag: &IsometryTag) -> Result<TagDto> {
    match *tag {
        IsometryTag::Translation(c) => Ok(TagDto::Translation(c)),
        IsometryTag::Dilation(r) => Ok(TagDto::Dilation(r)),
        IsometryTag::PlaneExchange { c, c_prime, nu, alpha } => {
            Ok(TagDto::PlaneExchange { c, c_prime, nu, alpha })
        }
        IsometryTag::Composite => Err(Error::InvalidArgument(
            "composite isometries cannot be journaled".into(),
        )),
    }
}

fn dto_to_tag(dto: &TagDto) -> IsometryTag {
    match *dto {
        TagDto::Translation(c) => IsometryTag::Translation(c),
        TagDto::Dilation(r) => IsometryTag::Dilation(r),
        TagDto::PlaneExchange { c, c_prime, nu, alpha } => {
            IsometryTag::PlaneExchange { c, c_prime, nu, alpha }
        }
    }
}

fn malformed(err: impl std::fmt::Display) -> Error {
    Error::Malformed(err.to_string())
}

/// Serializes a bare instance (no journal).
pub fn instance_line(t: &TilingInstance) -> String {
    let dto = LineDto {
        schema: Some(SCHEMA.to_string()),
        m: t.modulus().value(),
        a: t.a().support(),
        b: t.b().support(),
        journal: None,
    };
    serde_json::to_string(&dto).expect("instances always serialize")
}

/// Serializes a generated record with its journal.
pub fn record_line(rec: &SampleRecord, seed: u64) -> Result<String> {
    let journal = JournalDto {
        seed: Some(seed),
        index: Some(rec.index),
        spec_a: rec.spec_a.clone(),
        a_moves: rec
            .a_moves
            .iter()
            .map(tag_to_dto)
            .collect::<Result<Vec<_>>>()?,
        b_moves: rec
            .b_moves
            .iter()
            .map(tag_to_dto)
            .collect::<Result<Vec<_>>>()?,
        shifts: rec
            .shifts
            .iter()
            .map(|mv| (mv.direction, mv.fiber_root, mv.target))
            .collect(),
    };
    let dto = LineDto {
        schema: Some(SCHEMA.to_string()),
        m: rec.instance.modulus().value(),
        a: rec.instance.a().support(),
        b: rec.instance.b().support(),
        journal: Some(journal),
    };
    serde_json::to_string(&dto).map_err(malformed)
}

/// Parses one corpus line; the schema field, when present, must match.
pub fn parse_line(line: &str) -> Result<ParsedLine> {
    let dto: LineDto = serde_json::from_str(line).map_err(malformed)?;
    if let Some(schema) = &dto.schema {
        if schema != SCHEMA {
            return Err(Error::Malformed(format!(
                "schema {schema:?} is not {SCHEMA:?}"
            )));
        }
    }
    let modulus = Modulus::new(dto.m)?;
    let a = Multiset::from_set(modulus.clone(), &dto.a)?;
    let b = Multiset::from_set(modulus.clone(), &dto.b)?;
    let journal = dto.journal.map(|j| Journal {
        seed: j.seed,
        index: j.index,
        spec_a: j.spec_a,
        a_moves: j.a_moves.iter().map(dto_to_tag).collect(),
        b_moves: j.b_moves.iter().map(dto_to_tag).collect(),
        shifts: j
            .shifts
            .iter()
            .map(|&(direction, fiber_root, target)| ShiftMove {
                direction,
                fiber_root,
                target,
            })
            .collect(),
    });
    Ok(ParsedLine { modulus, a, b, journal })
}

/// Reads a whole corpus, skipping blank lines.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<ParsedLine>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(malformed)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(&line)?);
    }
    Ok(out)
}

/// Rebuilds the instance a journal describes and checks it matches the
/// sets stored on the same line.
pub fn replay_line(parsed: &ParsedLine) -> Result<TilingInstance> {
    let journal = parsed.journal.as_ref().ok_or_else(|| {
        Error::InvalidArgument("line carries no journal".into())
    })?;
    let rebuilt = replay_sample(
        &parsed.modulus,
        &journal.spec_a,
        &journal.a_moves,
        &journal.b_moves,
        &journal.shifts,
    )?;
    if rebuilt.a().support() != parsed.a.support()
        || rebuilt.b().support() != parsed.b.support()
    {
        return Err(Error::NotATiling(
            "journal replay does not reproduce the stored sets".into(),
        ));
    }
    Ok(rebuilt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{sample_structured, SearchConfig};

    #[test]
    fn bare_instance_lines_round_trip() {
        let line = r#"{"M":12,"A":[0,1,2],"B":[0,3,6,9]}"#;
        let parsed = parse_line(line).unwrap();
        let t = parsed.instance().unwrap();
        let emitted = instance_line(&t);
        let reparsed = parse_line(&emitted).unwrap();
        assert_eq!(reparsed.a.support(), vec![0, 1, 2]);
        assert_eq!(reparsed.b.support(), vec![0, 3, 6, 9]);
        assert_eq!(emitted, instance_line(&reparsed.instance().unwrap()));
    }

    #[test]
    fn non_tilings_parse_but_do_not_verify() {
        let parsed = parse_line(r#"{"M":4,"A":[0,1],"B":[0,1]}"#).unwrap();
        assert!(parsed.instance().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err =
            parse_line(r#"{"M":12,"A":[0],"B":[0],"extra":1}"#).unwrap_err();
        assert!(matches!(err, Error::Malformed(_)));
    }

    #[test]
    fn foreign_schemas_are_rejected() {
        let err = parse_line(
            r#"{"schema":"tilekit/2","M":12,"A":[0],"B":[0]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Malformed(_)));
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(parse_line("{"), Err(Error::Malformed(_))));
        assert!(matches!(
            parse_line(r#"{"M":12,"A":[0,"x"],"B":[0]}"#),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn journaled_records_replay() {
        let mut config = SearchConfig::new(Modulus::new(900).unwrap());
        config.seed = 3;
        config.size_split = Some((30, 30));
        let records = sample_structured(&config, 3).unwrap();
        for rec in &records {
            let line = record_line(rec, config.seed).unwrap();
            let parsed = parse_line(&line).unwrap();
            let journal = parsed.journal.as_ref().unwrap();
            assert_eq!(journal.seed, Some(3));
            assert_eq!(journal.spec_a, rec.spec_a);
            let rebuilt = replay_line(&parsed).unwrap();
            assert_eq!(
                rebuilt.a().support(),
                rec.instance.a().support()
            );
        }
    }

    #[test]
    fn corpus_reader_skips_blank_lines() {
        let text = "\n{\"M\":12,\"A\":[0,1,2],\"B\":[0,3,6,9]}\n\n";
        let lines = read_corpus(text.as_bytes()).unwrap();
        assert_eq!(lines.len(), 1);
    }
}
