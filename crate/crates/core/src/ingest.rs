//! Raw electoral-roll rows → clean (last name, sex, state) records.
//!
//! Extraction takes the last whitespace-separated word of the person's full
//! name when it has at least two words, falling back to the last word of
//! the father's/husband's name, and discards the row otherwise. Candidates
//! are lowercased and dropped when shorter than 3 symbols or containing
//! anything outside a–z.0–9. A corpus-wide frequency floor (default 3)
//! runs last.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sex {
    Female,
    Male,
    Unknown,
}

impl Sex {
    /// Anything other than F/M (any case) is unknown.
    pub fn parse(s: &str) -> Self {
        match s.trim() {
            "F" | "f" => Sex::Female,
            "M" | "m" => Sex::Male,
            _ => Sex::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "F",
            Sex::Male => "M",
            Sex::Unknown => "U",
        }
    }
}

/// One row of the raw roll file, before any filtering.
#[derive(Clone, Debug)]
pub struct RawRecord {
    pub first_name: String,
    pub last_name_field: String,
    pub relative_name: String,
    pub sex: Sex,
    pub state: String,
}

/// One validated output row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CleanRecord {
    pub last_name: String,
    pub sex: Sex,
    pub state: String,
}

/// Which header names hold each roll field.
#[derive(Clone, Debug)]
pub struct ColumnMap {
    pub first: String,
    pub last: String,
    pub relative: String,
    pub sex: String,
    pub state: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            first: "first_name".into(),
            last: "last_name".into(),
            relative: "father_husband_name".into(),
            sex: "sex".into(),
            state: "state".into(),
        }
    }
}

/// Counters for one ingest run; `malformed` rows are structurally bad
/// (missing fields / empty state), the `dropped_*` rows simply failed a
/// filtering rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows: u64,
    pub malformed: u64,
    pub dropped_no_last_name: u64,
    pub dropped_normalization: u64,
    pub dropped_below_floor: u64,
    pub kept: u64,
}

/// Last word of the full name when it has ≥ 2 words, else last word of the
/// relative's name when that has ≥ 2 words, else nothing.
pub fn extract_last_name(full_name: &str, relative_name: &str) -> Option<String> {
    for name in [full_name, relative_name] {
        let words: Vec<&str> = name.split_whitespace().collect();
        if words.len() >= 2 {
            return Some(words[words.len() - 1].to_string());
        }
    }
    None
}

/// Lowercases a candidate token; rejects it when shorter than 3 symbols or
/// containing anything outside a–z, 0–9.
pub fn normalize_and_filter(candidate: &str) -> Option<String> {
    let lower = candidate.to_lowercase();
    if lower.chars().count() < 3 {
        return None;
    }
    if !lower.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit()) {
        return None;
    }
    Some(lower)
}

/// Keeps only records whose last name occurs at least `floor` times across
/// the whole stream; survivor order is preserved.
pub fn apply_frequency_floor(records: Vec<CleanRecord>, floor: u64) -> Vec<CleanRecord> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for r in &records {
        *counts.entry(r.last_name.as_str()).or_insert(0) += 1;
    }
    let keep: std::collections::HashSet<String> = counts
        .into_iter()
        .filter(|(_, c)| *c >= floor)
        .map(|(n, _)| n.to_string())
        .collect();
    records
        .into_iter()
        .filter(|r| keep.contains(&r.last_name))
        .collect()
}

/// Reads the raw roll file. Malformed rows (missing mapped fields or an
/// empty state) are skipped and counted; a missing mapped column in the
/// header is fatal.
pub fn load_rolls(
    path: &Path,
    delimiter: u8,
    columns: &ColumnMap,
) -> Result<(Vec<RawRecord>, u64)> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::bad_data(path, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::bad_data(path, e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (ci_first, ci_last, ci_rel, ci_sex, ci_state) = (
        col(&columns.first)?,
        col(&columns.last)?,
        col(&columns.relative)?,
        col(&columns.sex)?,
        col(&columns.state)?,
    );

    let mut records = Vec::new();
    let mut malformed = 0u64;
    for row in reader.records() {
        let row = match row {
            Ok(r) => r,
            Err(_) => {
                malformed += 1;
                continue;
            }
        };
        let field = |i: usize| row.get(i).map(str::trim);
        let state = field(ci_state).unwrap_or("");
        if state.is_empty() {
            malformed += 1;
            continue;
        }
        let (first, last, relative) = match (field(ci_first), field(ci_last), field(ci_rel)) {
            (Some(f), Some(l), Some(r)) => (f, l, r),
            _ => {
                malformed += 1;
                continue;
            }
        };
        records.push(RawRecord {
            first_name: first.to_string(),
            last_name_field: last.to_string(),
            relative_name: relative.to_string(),
            sex: Sex::parse(field(ci_sex).unwrap_or("")),
            state: state.to_string(),
        });
    }
    Ok((records, malformed))
}

/// Extraction + normalization for already-loaded raw records (no floor).
pub fn clean_records(raws: &[RawRecord], report: &mut IngestReport) -> Vec<CleanRecord> {
    let mut out = Vec::with_capacity(raws.len());
    for raw in raws {
        let full = format!("{} {}", raw.first_name, raw.last_name_field);
        let candidate = match extract_last_name(&full, &raw.relative_name) {
            Some(c) => c,
            None => {
                report.dropped_no_last_name += 1;
                continue;
            }
        };
        let last_name = match normalize_and_filter(&candidate) {
            Some(n) => n,
            None => {
                report.dropped_normalization += 1;
                continue;
            }
        };
        out.push(CleanRecord {
            last_name,
            sex: raw.sex,
            state: raw.state.clone(),
        });
    }
    out
}

/// Whole ingest pipeline: load, extract, normalize, frequency floor.
pub fn run(
    path: &Path,
    delimiter: u8,
    columns: &ColumnMap,
    floor: u64,
) -> Result<(Vec<CleanRecord>, IngestReport)> {
    let (raws, malformed) = load_rolls(path, delimiter, columns)?;
    let mut report = IngestReport {
        rows: raws.len() as u64 + malformed,
        malformed,
        ..IngestReport::default()
    };
    let cleaned = clean_records(&raws, &mut report);
    let before_floor = cleaned.len() as u64;
    let floored = apply_frequency_floor(cleaned, floor);
    report.dropped_below_floor = before_floor - floored.len() as u64;
    report.kept = floored.len() as u64;
    Ok((floored, report))
}

pub const CLEAN_HEADER: &str = "last_name,sex,state";

/// Writes clean records as `last_name,sex,state` rows in stream order.
pub fn write_clean(path: &Path, records: &[CleanRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{CLEAN_HEADER}")?;
        for r in records {
            writeln!(w, "{},{},{}", r.last_name, r.sex.as_str(), r.state)?;
        }
        w.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}

/// Reads a clean-records file produced by [`write_clean`].
pub fn read_clean(path: &Path) -> Result<Vec<CleanRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| Error::bad_data(path, e.to_string()))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| Error::bad_data(path, e.to_string()))?;
        let expected: Vec<&str> = CLEAN_HEADER.split(',').collect();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::bad_data(
                path,
                format!("expected header {CLEAN_HEADER:?}"),
            ));
        }
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::bad_data(path, e.to_string()))?;
        match (row.get(0), row.get(1), row.get(2)) {
            (Some(name), Some(sex), Some(state)) if !name.is_empty() && !state.is_empty() => {
                records.push(CleanRecord {
                    last_name: name.to_string(),
                    sex: Sex::parse(sex),
                    state: state.to_string(),
                });
            }
            _ => {
                return Err(Error::bad_data(path, format!("bad record on data row {}", i + 1)));
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn rec(name: &str, sex: Sex, state: &str) -> CleanRecord {
        CleanRecord {
            last_name: name.into(),
            sex,
            state: state.into(),
        }
    }

    #[test]
    fn extraction_prefers_the_full_name() {
        assert_eq!(
            extract_last_name("anita dhingra", "raj dhingra").as_deref(),
            Some("dhingra")
        );
    }

    #[test]
    fn extraction_falls_back_to_the_relative() {
        assert_eq!(
            extract_last_name("anita", "raj dhingra").as_deref(),
            Some("dhingra")
        );
    }

    #[test]
    fn extraction_discards_single_word_rows() {
        assert_eq!(extract_last_name("anita", "raj"), None);
        assert_eq!(extract_last_name("", ""), None);
        // Re-applying to a returned single word yields nothing.
        assert_eq!(extract_last_name("dhingra", ""), None);
    }

    #[test]
    fn extraction_takes_the_last_word_of_many() {
        assert_eq!(
            extract_last_name("padma devi kumari", "").as_deref(),
            Some("kumari")
        );
        assert_eq!(
            extract_last_name("x", "ram lal verma").as_deref(),
            Some("verma")
        );
    }

    #[test]
    fn normalization_lowercases() {
        assert_eq!(normalize_and_filter("Dhingra").as_deref(), Some("dhingra"));
        assert_eq!(normalize_and_filter("RAO").as_deref(), Some("rao"));
    }

    #[test]
    fn short_names_are_dropped() {
        assert_eq!(normalize_and_filter("li"), None);
        assert_eq!(normalize_and_filter("ab"), None);
        assert_eq!(normalize_and_filter("rao").as_deref(), Some("rao"));
    }

    #[test]
    fn non_alphanumeric_names_are_dropped() {
        assert_eq!(normalize_and_filter("o'brien"), None);
        assert_eq!(normalize_and_filter("an-and"), None);
        assert_eq!(normalize_and_filter("josé"), None);
        assert_eq!(normalize_and_filter("sharma2").as_deref(), Some("sharma2"));
    }

    #[test]
    fn frequency_floor_keeps_whole_names_only() {
        let records = vec![
            rec("kumar", Sex::Female, "UP"),
            rec("rao", Sex::Male, "Delhi"),
            rec("kumar", Sex::Male, "UP"),
            rec("rao", Sex::Female, "Delhi"),
            rec("kumar", Sex::Male, "Bihar"),
            rec("kumar", Sex::Female, "UP"),
            rec("kumar", Sex::Male, "UP"),
        ];
        let kept = apply_frequency_floor(records, 3);
        assert_eq!(kept.len(), 5);
        assert!(kept.iter().all(|r| r.last_name == "kumar"));
    }

    #[test]
    fn frequency_floor_boundary_is_inclusive() {
        let records = vec![
            rec("devi", Sex::Female, "UP"),
            rec("devi", Sex::Female, "UP"),
            rec("devi", Sex::Female, "UP"),
        ];
        assert_eq!(apply_frequency_floor(records.clone(), 3), records);
        assert!(apply_frequency_floor(Vec::new(), 3).is_empty());
    }

    #[test]
    fn floor_preserves_relative_order() {
        let records = vec![
            rec("aaa", Sex::Female, "X"),
            rec("bbb", Sex::Male, "Y"),
            rec("aaa", Sex::Male, "Y"),
            rec("aaa", Sex::Unknown, "X"),
        ];
        let kept = apply_frequency_floor(records, 2);
        let names: Vec<&str> = kept.iter().map(|r| r.last_name.as_str()).collect();
        assert_eq!(names, ["aaa", "aaa", "aaa"]);
        assert_eq!(kept[1].state, "Y");
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        fs::write(f.path(), contents).unwrap();
        f
    }

    const HEADER: &str = "first_name,last_name,father_husband_name,sex,state";

    #[test]
    fn valid_rows_all_load() {
        let f = write_tmp(&format!(
            "{HEADER}\nanita,dhingra,raj dhingra,F,Punjab\nravi,patel,,M,Gujarat\nmira,,shyam iyer,F,Kerala\nx,y,z,Q,Goa\n"
        ));
        let (records, malformed) =
            load_rolls(f.path(), b',', &ColumnMap::default()).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(malformed, 0);
        assert_eq!(records[0].sex, Sex::Female);
        assert_eq!(records[3].sex, Sex::Unknown);
        assert_eq!(records[2].relative_name, "shyam iyer");
    }

    #[test]
    fn missing_state_rows_are_skipped_and_counted() {
        let f = write_tmp(&format!(
            "{HEADER}\nanita,dhingra,raj dhingra,F,\nravi,patel,,M,Gujarat\n"
        ));
        let (records, malformed) = load_rolls(f.path(), b',', &ColumnMap::default()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(malformed, 1);
    }

    #[test]
    fn short_rows_are_skipped_and_counted() {
        let f = write_tmp(&format!("{HEADER}\nanita,dhingra\nravi,patel,,M,Gujarat\n"));
        let (records, malformed) = load_rolls(f.path(), b',', &ColumnMap::default()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(malformed, 1);
    }

    #[test]
    fn crlf_and_lf_files_load_identically() {
        let lf = write_tmp(&format!("{HEADER}\na,bcd,,F,Goa\ne,fgh,,M,Goa\n"));
        let crlf = write_tmp(&format!("{HEADER}\r\na,bcd,,F,Goa\r\ne,fgh,,M,Goa\r\n"));
        let (r1, _) = load_rolls(lf.path(), b',', &ColumnMap::default()).unwrap();
        let (r2, _) = load_rolls(crlf.path(), b',', &ColumnMap::default()).unwrap();
        assert_eq!(r1.len(), r2.len());
        for (a, b) in r1.iter().zip(&r2) {
            assert_eq!(a.last_name_field, b.last_name_field);
            assert_eq!(a.state, b.state);
        }
    }

    #[test]
    fn missing_mapped_column_is_fatal_and_named() {
        let f = write_tmp("first_name,last_name,sex,state\na,b,F,Goa\n");
        let err = load_rolls(f.path(), b',', &ColumnMap::default()).unwrap_err();
        assert!(matches!(&err, Error::MissingColumn(c) if c == "father_husband_name"));
    }

    #[test]
    fn tab_delimited_files_are_supported() {
        let f = write_tmp(
            "first_name\tlast_name\tfather_husband_name\tsex\tstate\nanita\tdhingra\t\tF\tPunjab\n",
        );
        let (records, malformed) = load_rolls(f.path(), b'\t', &ColumnMap::default()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(malformed, 0);
        assert_eq!(records[0].last_name_field, "dhingra");
    }

    #[test]
    fn pipeline_enforces_every_invariant() {
        let f = write_tmp(&format!(
            "{HEADER}\n\
             anita,dhingra,raj dhingra,F,Punjab\n\
             bala,,raj dhingra,M,Punjab\n\
             chitra,,raj dhingra,F,Punjab\n\
             dev,,ram,M,Delhi\n\
             hema,li,wei li,F,Assam\n\
             indu,o'brien,,F,Goa\n\
             mira,sen,,F,Assam\n\
             nila,sen,,F,Assam\n"
        ));
        let (records, report) = run(f.path(), b',', &ColumnMap::default(), 3).unwrap();
        assert_eq!(report.rows, 8);
        assert_eq!(report.malformed, 0);
        assert_eq!(report.dropped_no_last_name, 1); // dev / ram
        assert_eq!(report.dropped_normalization, 2); // li, o'brien
        assert_eq!(report.dropped_below_floor, 2); // sen ×2
        assert_eq!(report.kept, 3);
        for r in &records {
            assert!(r.last_name.chars().count() >= 3);
            assert!(r
                .last_name
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit()));
            assert!(!r.state.is_empty());
        }
        assert!(records.iter().all(|r| r.last_name == "dhingra"));
    }

    #[test]
    fn clean_file_round_trips() {
        let records = vec![
            rec("dhingra", Sex::Female, "Punjab"),
            rec("rao", Sex::Unknown, "Delhi"),
            rec("ka2", Sex::Male, "Goa"),
        ];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_clean(f.path(), &records).unwrap();
        assert_eq!(read_clean(f.path()).unwrap(), records);
    }

    #[test]
    fn clean_reader_rejects_other_headers() {
        let f = write_tmp("name,sex,state\nx,F,Goa\n");
        assert!(matches!(
            read_clean(f.path()),
            Err(Error::BadData { .. })
        ));
    }
}
