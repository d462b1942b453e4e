//! Synthetic electoral-roll generator with a learnable name→state signal.
//!
//! Every state owns a pair of distinctive name suffixes; each synthetic
//! last name is a random stem plus one of its home state's suffixes, so a
//! character model can recover the state from spelling alone. A noise rate
//! re-draws individual records from the overall state population, and rows
//! are emitted in both supported shapes (full name carries the last name,
//! or a single-word first name with the last name only in the relative's
//! name).

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::distributions::{Distribution, Uniform, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Beta;

use crate::error::{Error, Result};

/// Parameters for one synthetic corpus.
#[derive(Clone, Debug)]
pub struct SynthSpec {
    /// (state name, population weight); weights need not be normalized.
    pub states: Vec<(String, f64)>,
    /// Number of distinct last names to invent.
    pub names: usize,
    /// Records per name, drawn uniformly from `records_min..=records_max`.
    pub records_min: usize,
    pub records_max: usize,
    /// Beta(α, β) prior for each name's female share.
    pub female_alpha: f64,
    pub female_beta: f64,
    /// Probability that a record's state is re-drawn from the population
    /// instead of the name's home state.
    pub noise: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Uniform default over `n` auto-named states with linearly descending
    /// population weights.
    pub fn with_auto_states(n: usize) -> Self {
        let states = (0..n)
            .map(|i| (format!("State{:02}", i + 1), (n - i) as f64))
            .collect();
        SynthSpec {
            states,
            names: 100,
            records_min: 3,
            records_max: 12,
            female_alpha: 2.0,
            female_beta: 2.0,
            noise: 0.1,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.len() < 2 {
            return Err(Error::InvalidArg(format!(
                "need at least 2 states, got {}",
                self.states.len()
            )));
        }
        if self.states.iter().any(|(_, w)| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArg(
                "state weights must be positive and finite".into(),
            ));
        }
        if self.names < self.states.len() {
            return Err(Error::InvalidArg(format!(
                "need at least one name per state ({} < {})",
                self.names,
                self.states.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::InvalidArg(format!(
                "noise must be inside [0, 1], got {}",
                self.noise
            )));
        }
        if self.records_min == 0 || self.records_min > self.records_max {
            return Err(Error::InvalidArg(format!(
                "records range must satisfy 1 <= min <= max, got {}..{}",
                self.records_min, self.records_max
            )));
        }
        if !(self.female_alpha > 0.0) || !(self.female_beta > 0.0) {
            return Err(Error::InvalidArg(
                "female share Beta parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Distinctive suffix pairs; the generator synthesizes further pairs when
/// there are more states than curated entries.
const SUFFIX_POOL: [(&str, &str); 12] = [
    ("kar", "wad"),
    ("appa", "anna"),
    ("sen", "das"),
    ("wala", "bhai"),
    ("iyer", "ajan"),
    ("ngma", "pang"),
    ("eddy", "goud"),
    ("otra", "ngal"),
    ("awat", "noia"),
    ("jeet", "preet"),
    ("zada", "khel"),
    ("urkar", "velkar"),
];

fn state_suffixes(index: usize) -> (String, String) {
    if index < SUFFIX_POOL.len() {
        let (a, b) = SUFFIX_POOL[index];
        (a.to_string(), b.to_string())
    } else {
        // Deterministic fallback: base-26 tail keeps pairs distinct.
        let mut tag = String::new();
        let mut i = index - SUFFIX_POOL.len();
        loop {
            tag.push((b'a' + (i % 26) as u8) as char);
            i /= 26;
            if i == 0 {
                break;
            }
        }
        (format!("z{tag}u"), format!("q{tag}o"))
    }
}

const FIRST_NAMES: [&str; 12] = [
    "anita", "ravi", "mira", "arjun", "leela", "kiran", "asha", "vikram", "nisha", "raju",
    "pooja", "sanjay",
];

fn random_stem(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(3..=6);
    (0..len)
        .map(|_| (b'a' + rng.gen_range(0..26u8)) as char)
        .collect()
}

struct SynthName {
    last_name: String,
    home_state: usize,
    female_share: f64,
    records: usize,
}

/// Renders a complete roll file (header + rows) for the spec.
pub fn generate(spec: &SynthSpec) -> Result<String> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let state_weights =
        WeightedIndex::new(spec.states.iter().map(|(_, w)| *w)).expect("validated weights");
    let beta = Beta::new(spec.female_alpha, spec.female_beta)
        .map_err(|e| Error::InvalidArg(format!("female share prior: {e}")))?;
    let records_range = Uniform::new_inclusive(spec.records_min, spec.records_max);

    // Invent distinct names, each tied to a home state via its suffix.
    let mut names: Vec<SynthName> = Vec::with_capacity(spec.names);
    let mut used: HashSet<String> = HashSet::new();
    while names.len() < spec.names {
        let home_state = state_weights.sample(&mut rng);
        let (primary, secondary) = state_suffixes(home_state);
        let suffix = if rng.gen_bool(0.7) { primary } else { secondary };
        let last_name = format!("{}{}", random_stem(&mut rng), suffix);
        if !used.insert(last_name.clone()) {
            continue; // regenerate collisions; stem space is ample
        }
        names.push(SynthName {
            last_name,
            home_state,
            female_share: beta.sample(&mut rng),
            records: records_range.sample(&mut rng),
        });
    }

    let mut out = String::new();
    writeln!(out, "first_name,last_name,father_husband_name,sex,state").unwrap();
    for name in &names {
        for _ in 0..name.records {
            let state_idx = if spec.noise > 0.0 && rng.gen_bool(spec.noise) {
                state_weights.sample(&mut rng)
            } else {
                name.home_state
            };
            let state = &spec.states[state_idx].0;
            let sex = if rng.gen_bool(name.female_share) { "F" } else { "M" };
            let first = FIRST_NAMES[rng.gen_range(0..FIRST_NAMES.len())];
            if rng.gen_bool(0.7) {
                // Full name carries the last name.
                let relative = format!(
                    "{} {}",
                    FIRST_NAMES[rng.gen_range(0..FIRST_NAMES.len())],
                    name.last_name
                );
                writeln!(out, "{},{},{},{},{}", first, name.last_name, relative, sex, state)
                    .unwrap();
            } else {
                // Single-word full name; only the relative's name has it.
                let relative = format!(
                    "{} {}",
                    FIRST_NAMES[rng.gen_range(0..FIRST_NAMES.len())],
                    name.last_name
                );
                writeln!(out, "{},,{},{},{}", first, relative, sex, state).unwrap();
            }
        }
    }
    Ok(out)
}
