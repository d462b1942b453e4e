//! Per-last-name state histograms and the name-level train/test split.
//!
//! Aggregation folds clean records into one histogram per distinct last
//! name (lexicographically sorted). The split shuffles *names* with a
//! seeded generator and sends ⌈fraction·n⌉ of them to the train side, so a
//! name never straddles the boundary; train names expand to unique
//! (name, state) pairs while test names keep their full histograms.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{CleanRecord, Sex};

/// Everything the pipeline knows about one last name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NameHistogram {
    pub last_name: String,
    /// Record count per state, keyed by state name.
    pub state_counts: BTreeMap<String, u64>,
    pub total: u64,
    pub female: u64,
    pub sex_known: u64,
}

impl NameHistogram {
    fn empty(last_name: &str) -> Self {
        NameHistogram {
            last_name: last_name.to_string(),
            state_counts: BTreeMap::new(),
            total: 0,
            female: 0,
            sex_known: 0,
        }
    }

    fn absorb(&mut self, record: &CleanRecord) {
        *self.state_counts.entry(record.state.clone()).or_insert(0) += 1;
        self.total += 1;
        match record.sex {
            Sex::Female => {
                self.female += 1;
                self.sex_known += 1;
            }
            Sex::Male => self.sex_known += 1,
            Sex::Unknown => {}
        }
    }

    fn merge(&mut self, other: &NameHistogram) {
        for (state, count) in &other.state_counts {
            *self.state_counts.entry(state.clone()).or_insert(0) += count;
        }
        self.total += other.total;
        self.female += other.female;
        self.sex_known += other.sex_known;
    }

    /// Total record count across all states.
    pub fn popularity(&self) -> u64 {
        self.total
    }

    /// Share of sex-known records that are female; `None` when sex is
    /// unknown for every record.
    pub fn female_share(&self) -> Option<f64> {
        if self.sex_known == 0 {
            None
        } else {
            Some(self.female as f64 / self.sex_known as f64)
        }
    }

    /// The `k` most frequent states, ties broken by state name ascending;
    /// returns fewer when the name appears in fewer distinct states.
    pub fn top_k_states(&self, k: usize) -> Vec<(String, u64)> {
        let mut entries: Vec<(String, u64)> = self
            .state_counts
            .iter()
            .map(|(s, c)| (s.clone(), *c))
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(k.min(entries.len()));
        entries
    }

    /// Most frequent state (ties by name ascending).
    pub fn modal_state(&self) -> &str {
        self.state_counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(s, _)| s.as_str())
            .expect("histogram never empty")
    }
}

/// Folds records into lexicographically sorted per-name histograms. Chunked
/// map-reduce with commutative integer merges, so the result is identical
/// for any thread count.
pub fn aggregate(records: &[CleanRecord]) -> Vec<NameHistogram> {
    let fold_chunk = |chunk: &[CleanRecord]| -> BTreeMap<String, NameHistogram> {
        let mut map: BTreeMap<String, NameHistogram> = BTreeMap::new();
        for record in chunk {
            map.entry(record.last_name.clone())
                .or_insert_with(|| NameHistogram::empty(&record.last_name))
                .absorb(record);
        }
        map
    };
    let merged = records
        .par_chunks(4096.max(records.len() / 64 + 1))
        .map(fold_chunk)
        .reduce(BTreeMap::new, |mut a, b| {
            for (name, hist) in b {
                match a.get_mut(&name) {
                    Some(existing) => existing.merge(&hist),
                    None => {
                        a.insert(name, hist);
                    }
                }
            }
            a
        });
    merged.into_values().collect()
}

/// Partitions histograms by name: shuffles the (name-sorted) list with a
/// seeded generator and takes ⌈fraction·n⌉ for the train side.
pub fn partition_histograms(
    histograms: Vec<NameHistogram>,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<NameHistogram>, Vec<NameHistogram>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArg(format!(
            "train fraction must be inside (0, 1), got {fraction}"
        )));
    }
    if histograms.len() < 2 {
        return Err(Error::InvalidArg(format!(
            "need at least 2 names to split, got {}",
            histograms.len()
        )));
    }
    let mut hists = histograms;
    hists.sort_by(|a, b| a.last_name.cmp(&b.last_name));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    hists.shuffle(&mut rng);
    let n_train = ((fraction * hists.len() as f64).ceil() as usize).min(hists.len());
    let test = hists.split_off(n_train);
    Ok((hists, test))
}

/// The concrete training view of a split corpus.
#[derive(Clone, Debug)]
pub struct SplitCorpus {
    /// Unique (last name, state) pairs from train-side histograms, sorted.
    pub train_pairs: Vec<(String, String)>,
    /// Train-side histograms (for baselines fit on the train side).
    pub train_histograms: Vec<NameHistogram>,
    /// Test-side names keep their full histograms for evaluation.
    pub test_histograms: Vec<NameHistogram>,
    pub seed: u64,
    pub train_fraction: f64,
}

/// Splits by name and expands the train side into unique (name, state)
/// training pairs.
pub fn split_by_name(
    histograms: Vec<NameHistogram>,
    fraction: f64,
    seed: u64,
) -> Result<SplitCorpus> {
    let (mut train, mut test) = partition_histograms(histograms, fraction, seed)?;
    train.sort_by(|a, b| a.last_name.cmp(&b.last_name));
    test.sort_by(|a, b| a.last_name.cmp(&b.last_name));
    let mut train_pairs = Vec::new();
    for hist in &train {
        for state in hist.state_counts.keys() {
            train_pairs.push((hist.last_name.clone(), state.clone()));
        }
    }
    Ok(SplitCorpus {
        train_pairs,
        train_histograms: train,
        test_histograms: test,
        seed,
        train_fraction: fraction,
    })
}

pub const HISTOGRAM_HEADER: &str = "last_name,state,count,female_count,sex_known_count";

/// Writes histograms as one row per (name, state); the name-level female
/// and sex-known counts repeat on each of the name's rows.
pub fn write_histograms(path: &Path, histograms: &[NameHistogram]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{HISTOGRAM_HEADER}")?;
        for h in histograms {
            for (state, count) in &h.state_counts {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    h.last_name, state, count, h.female, h.sex_known
                )?;
            }
        }
        w.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}

/// Reads a histogram file produced by [`write_histograms`]; checks that the
/// per-name repeated columns are consistent.
pub fn read_histograms(path: &Path) -> Result<Vec<NameHistogram>> {
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| Error::bad_data(path, e.to_string()))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| Error::bad_data(path, e.to_string()))?;
        let expected: Vec<&str> = HISTOGRAM_HEADER.split(',').collect();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::bad_data(
                path,
                format!("expected header {HISTOGRAM_HEADER:?}"),
            ));
        }
    }
    let mut map: BTreeMap<String, NameHistogram> = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::bad_data(path, e.to_string()))?;
        let bad = |msg: &str| Error::bad_data(path, format!("data row {}: {msg}", i + 1));
        let get = |j: usize| row.get(j).ok_or_else(|| bad("missing field"));
        let name = get(0)?.to_string();
        let state = get(1)?.to_string();
        let parse =
            |j: usize| -> Result<u64> { get(j)?.parse().map_err(|_| bad("bad count")) };
        let (count, female, sex_known) = (parse(2)?, parse(3)?, parse(4)?);
        if name.is_empty() || state.is_empty() || count == 0 {
            return Err(bad("empty name/state or zero count"));
        }
        let hist = map
            .entry(name.clone())
            .or_insert_with(|| NameHistogram {
                last_name: name,
                state_counts: BTreeMap::new(),
                total: 0,
                female,
                sex_known,
            });
        if hist.female != female || hist.sex_known != sex_known {
            return Err(bad("inconsistent per-name sex counts"));
        }
        if hist.state_counts.insert(state, count).is_some() {
            return Err(bad("duplicate (name, state) row"));
        }
        hist.total += count;
    }
    Ok(map.into_values().collect())
}

/// Writes `name,partition` rows (train/test) with the seed and fraction in
/// a comment block, so a split can be audited and reproduced.
pub fn write_split_manifest(path: &Path, corpus: &SplitCorpus) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "# seed: {}", corpus.seed)?;
        writeln!(w, "# train_fraction: {}", corpus.train_fraction)?;
        writeln!(w, "name,partition")?;
        for h in &corpus.train_histograms {
            writeln!(w, "{},train", h.last_name)?;
        }
        for h in &corpus.test_histograms {
            writeln!(w, "{},test", h.last_name)?;
        }
        w.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}
