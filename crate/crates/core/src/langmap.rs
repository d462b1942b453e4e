//! State→language mapping and language-score prediction.
//!
//! The table is a CSV of (state, language, weight, source) rows; weights
//! live in (0, 1] and several languages may share a state. A language's
//! score for a name is Σ over states of P(state) · weight, i.e. the state
//! posterior pushed through the table.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::StateRegistry;

#[derive(Clone, Debug, PartialEq)]
pub struct LanguageRow {
    pub state: String,
    pub language: String,
    pub weight: f64,
    pub source: String,
}

/// Parsed mapping table with a per-state index.
#[derive(Clone, Debug, Default)]
pub struct LanguageTable {
    rows: Vec<LanguageRow>,
    by_state: HashMap<String, Vec<usize>>,
}

impl LanguageTable {
    pub fn from_rows(rows: Vec<LanguageRow>) -> Result<Self> {
        let mut table = LanguageTable::default();
        for (i, row) in rows.into_iter().enumerate() {
            table.push(row, i + 1)?;
        }
        Ok(table)
    }

    fn push(&mut self, row: LanguageRow, line: usize) -> Result<()> {
        if !(row.weight > 0.0 && row.weight <= 1.0) {
            return Err(Error::TableWeight {
                row: line,
                value: row.weight,
            });
        }
        if let Some(indices) = self.by_state.get(&row.state) {
            if indices.iter().any(|&i| self.rows[i].language == row.language) {
                return Err(Error::TableDuplicate {
                    row: line,
                    state: row.state,
                    language: row.language,
                });
            }
        }
        self.by_state
            .entry(row.state.clone())
            .or_default()
            .push(self.rows.len());
        self.rows.push(row);
        Ok(())
    }

    /// Loads the table from CSV (`state,language,weight,source`); lines
    /// starting with `#` are comments. Row numbers in errors refer to the
    /// file's 1-based line numbers.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::bad_data(path, e.to_string()))?;
        {
            let headers = reader
                .headers()
                .map_err(|e| Error::bad_data(path, e.to_string()))?;
            let expected = ["state", "language", "weight", "source"];
            if headers.iter().collect::<Vec<_>>() != expected {
                return Err(Error::bad_data(
                    path,
                    "expected header state,language,weight,source".to_string(),
                ));
            }
        }
        let mut table = LanguageTable::default();
        for row in reader.records() {
            let row = row.map_err(|e| Error::bad_data(path, e.to_string()))?;
            let line = row
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(table.rows.len() + 2);
            let bad = |msg: String| Error::bad_data(path, format!("line {line}: {msg}"));
            let get = |j: usize, what: &str| -> Result<&str> {
                match row.get(j).map(str::trim) {
                    Some(v) if !v.is_empty() => Ok(v),
                    _ => Err(bad(format!("missing {what}"))),
                }
            };
            let state = get(0, "state")?.to_string();
            let language = get(1, "language")?.to_string();
            let weight: f64 = get(2, "weight")?
                .parse()
                .map_err(|_| bad("unparseable weight".into()))?;
            let source = row.get(3).map(str::trim).unwrap_or("").to_string();
            table.push(
                LanguageRow {
                    state,
                    language,
                    weight,
                    source,
                },
                line,
            )?;
        }
        Ok(table)
    }

    pub fn rows(&self) -> &[LanguageRow] {
        &self.rows
    }

    pub fn languages_for(&self, state: &str) -> Vec<&LanguageRow> {
        self.by_state
            .get(state)
            .map(|indices| indices.iter().map(|&i| &self.rows[i]).collect())
            .unwrap_or_default()
    }

    /// Registry states with no table row at all (for startup warnings).
    pub fn uncovered_states(&self, registry: &StateRegistry) -> Vec<String> {
        registry
            .names()
            .iter()
            .filter(|s| !self.by_state.contains_key(*s))
            .cloned()
            .collect()
    }

    /// Pushes a state probability map through the table:
    /// score(language) = Σ P(state) · weight(state, language), sorted by
    /// score descending (ties by language name). The probabilities must sum
    /// to 1 within 1e-6 and every state present must have table coverage.
    pub fn predict_languages(
        &self,
        state_probs: &[(String, f64)],
        k: usize,
    ) -> Result<Vec<(String, f64)>> {
        let sum: f64 = state_probs.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::UnnormalizedProbs(sum));
        }
        let missing: Vec<String> = state_probs
            .iter()
            .filter(|(s, _)| !self.by_state.contains_key(s))
            .map(|(s, _)| s.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::StatesMissingFromTable(missing));
        }
        let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
        for (state, p) in state_probs {
            for row in &self.by_state[state] {
                let row = &self.rows[*row];
                *scores.entry(row.language.as_str()).or_insert(0.0) += p * row.weight;
            }
        }
        let mut ranked: Vec<(String, f64)> = scores
            .into_iter()
            .map(|(l, s)| (l.to_string(), s))
            .collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k.min(ranked.len()));
        Ok(ranked)
    }
}
