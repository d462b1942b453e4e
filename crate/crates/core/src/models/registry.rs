use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// The ordered set of output classes. States are kept sorted
/// lexicographically so class indices are reproducible across runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateRegistry {
    names: Vec<String>,
}

impl StateRegistry {
    /// Builds a registry from an explicit list; duplicates are an error.
    pub fn new(mut names: Vec<String>) -> Result<Self> {
        names.sort();
        for pair in names.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateState(pair[0].clone()));
            }
        }
        if names.len() < 2 {
            return Err(Error::RegistryTooSmall(names.len()));
        }
        Ok(StateRegistry { names })
    }

    /// Builds a registry from observed state values, deduplicating.
    pub fn from_observed<I, S>(states: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = states.into_iter().map(Into::into).collect();
        if set.len() < 2 {
            return Err(Error::RegistryTooSmall(set.len()));
        }
        Ok(StateRegistry {
            names: set.into_iter().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index(&self, state: &str) -> Result<usize> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(state))
            .map_err(|_| Error::UnknownState(state.to_string()))
    }
}
