use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::network::Network;

/// A set of findings: variable name to observed state name.
///
/// Evidence is keyed by name so the same findings can be scored against a
/// network and against any straw model derived from it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Evidence {
    assignments: BTreeMap<String, String>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds validated evidence; repeating a variable is an error.
    pub fn from_pairs<'a, I>(net: &Network, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut ev = Evidence::new();
        for (var, state) in pairs {
            if ev.assignments.contains_key(var) {
                return Err(Error::DuplicateFinding(var.to_string()));
            }
            ev.insert(var, state);
        }
        ev.validate(net)?;
        Ok(ev)
    }

    /// Inserts or overwrites a finding, returning the previous state.
    pub fn insert(&mut self, var: impl Into<String>, state: impl Into<String>) -> Option<String> {
        self.assignments.insert(var.into(), state.into())
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.assignments.get(var).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignments.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn validate(&self, net: &Network) -> Result<()> {
        self.resolve(net).map(|_| ())
    }

    /// `(variable id, state index)` pairs in `net`.
    pub fn resolve(&self, net: &Network) -> Result<Vec<(usize, usize)>> {
        self.iter()
            .map(|(var, state)| {
                let id = net.find_or_err(var)?;
                let s = net
                    .variable(id)
                    .state_index(state)
                    .ok_or_else(|| Error::UnknownState {
                        variable: var.to_string(),
                        state: state.to_string(),
                    })?;
                Ok((id, s))
            })
            .collect()
    }

    /// Merges `other` into `self`; `other` wins where both assign a variable.
    /// Returns one warning per overridden finding.
    pub fn override_with(&mut self, other: &Evidence) -> Vec<String> {
        let mut warnings = Vec::new();
        for (var, state) in other.iter() {
            if let Some(old) = self.insert(var, state) {
                if old != state {
                    warnings.push(format!(
                        "finding {var}={old} overridden by command line {var}={state}"
                    ));
                }
            }
        }
        warnings
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (var, state)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{var}={state}")?;
        }
        Ok(())
    }
}
