use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

/// A feature name or value, ordered case-insensitively.
///
/// Ties between names differing only in case fall back to byte order so
/// that the ordering stays total.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureAtom(String);

impl FeatureAtom {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Ord for FeatureAtom {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.0.chars().flat_map(char::to_lowercase);
        let b = other.0.chars().flat_map(char::to_lowercase);
        a.cmp(b).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for FeatureAtom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FeatureAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FeatsError {
    #[error("invalid feature name `{0}`")]
    Name(String),
    #[error("invalid feature value `{0}`")]
    Value(String),
    #[error("malformed feature `{0}` (expected Name=Value)")]
    Malformed(String),
    #[error("feature `{0}` listed twice")]
    Duplicate(String),
}

/// Feature names: `[A-Za-z][A-Za-z0-9\[\]]*`.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '[' || c == ']')
}

/// Feature values: `[A-Za-z0-9][A-Za-z0-9]*`. Digits may lead (`Person=1`).
pub fn is_valid_value(value: &str) -> bool {
    !value.is_empty() && value.chars().all(|c| c.is_ascii_alphanumeric())
}

/// Key to value-set assignments with canonical `FEATS` serialization.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FeatureBag {
    entries: BTreeMap<FeatureAtom, BTreeSet<FeatureAtom>>,
}

impl FeatureBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Adds `value` to the value set of `name`.
    pub fn insert(&mut self, name: &str, value: &str) -> Result<(), FeatsError> {
        if !is_valid_name(name) {
            return Err(FeatsError::Name(name.to_owned()));
        }
        if !is_valid_value(value) {
            return Err(FeatsError::Value(value.to_owned()));
        }
        self.entries
            .entry(FeatureAtom(name.to_owned()))
            .or_default()
            .insert(FeatureAtom(value.to_owned()));
        Ok(())
    }

    /// Replaces whatever `name` held with the single `value`.
    pub fn set(&mut self, name: &str, value: &str) -> Result<(), FeatsError> {
        self.remove(name);
        self.insert(name, value)
    }

    pub fn remove(&mut self, name: &str) -> bool {
        self.entries.remove(&FeatureAtom(name.to_owned())).is_some()
    }

    pub fn contains_key(&self, name: &str) -> bool {
        self.entries.contains_key(&FeatureAtom(name.to_owned()))
    }

    /// True if `name` carries `value` among its values.
    pub fn has(&self, name: &str, value: &str) -> bool {
        self.entries
            .get(&FeatureAtom(name.to_owned()))
            .is_some_and(|vals| vals.contains(&FeatureAtom(value.to_owned())))
    }

    pub fn get(&self, name: &str) -> Option<impl Iterator<Item = &str>> {
        self.entries
            .get(&FeatureAtom(name.to_owned()))
            .map(|vals| vals.iter().map(FeatureAtom::as_str))
    }

    /// Names and value lists in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, Vec<&str>)> {
        self.entries
            .iter()
            .map(|(k, vs)| (k.as_str(), vs.iter().map(FeatureAtom::as_str).collect()))
    }

    /// Flattened `(name, value)` pairs in canonical order.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries
            .iter()
            .flat_map(|(k, vs)| vs.iter().map(move |v| (k.as_str(), v.as_str())))
    }

    /// True if every pair of `self` also occurs in `other`.
    pub fn is_subset(&self, other: &FeatureBag) -> bool {
        self.pairs().all(|(k, v)| other.has(k, v))
    }
}

impl FromStr for FeatureBag {
    type Err = FeatsError;

    /// Parses a `FEATS` column; `_` and the empty string give an empty bag.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bag = FeatureBag::new();
        if s == "_" || s.is_empty() {
            return Ok(bag);
        }
        for item in s.split('|') {
            let (name, values) = item
                .split_once('=')
                .ok_or_else(|| FeatsError::Malformed(item.to_owned()))?;
            if bag.contains_key(name) {
                return Err(FeatsError::Duplicate(name.to_owned()));
            }
            for value in values.split(',') {
                bag.insert(name, value)?;
            }
        }
        Ok(bag)
    }
}

impl fmt::Display for FeatureBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("_");
        }
        for (i, (name, values)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{name}=")?;
            for (j, value) in values.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{value}")?;
            }
        }
        Ok(())
    }
}
