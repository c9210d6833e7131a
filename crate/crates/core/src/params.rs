//! Textual `name=value,name=value` parameter lists with consumption tracking.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
struct Entry {
    value: String,
    claimed: bool,
}

/// Parameter map shared by spaces and methods.
///
/// Every lookup marks the entry as claimed; [`ParamMap::check_unused`] fails if a
/// consumer finished without touching some entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamMap {
    entries: BTreeMap<String, Entry>,
}

/// Conversion from a parameter string.
pub trait ParamValue: Sized {
    const KIND: &'static str;
    fn from_param(s: &str) -> Option<Self>;
}

impl ParamValue for f64 {
    const KIND: &'static str = "real";
    fn from_param(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl ParamValue for f32 {
    const KIND: &'static str = "real";
    fn from_param(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl ParamValue for i64 {
    const KIND: &'static str = "int";
    fn from_param(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl ParamValue for usize {
    const KIND: &'static str = "non-negative int";
    fn from_param(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl ParamValue for u32 {
    const KIND: &'static str = "non-negative int";
    fn from_param(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl ParamValue for u64 {
    const KIND: &'static str = "non-negative int";
    fn from_param(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl ParamValue for bool {
    const KIND: &'static str = "bool (0 or 1)";
    fn from_param(s: &str) -> Option<Self> {
        match s {
            "0" => Some(false),
            "1" => Some(true),
            _ => None,
        }
    }
}

impl ParamValue for String {
    const KIND: &'static str = "text";
    fn from_param(s: &str) -> Option<Self> {
        Some(s.to_string())
    }
}

impl ParamMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `a=1,b=2`. An empty string yields an empty map.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = ParamMap::new();
        let text = text.trim();
        if text.is_empty() {
            return Ok(map);
        }
        for part in text.split(',') {
            let (name, value) = part.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(alloc::format!("expected name=value, got '{part}'"))
            })?;
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "bad parameter name '{name}'"
                )));
            }
            if value.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "parameter '{name}' value contains whitespace"
                )));
            }
            if map.entries.contains_key(name) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "parameter '{name}' given twice"
                )));
            }
            map.set(name, value);
        }
        Ok(map)
    }

    pub fn set(&mut self, name: &str, value: impl ToString) {
        self.entries.insert(
            name.to_string(),
            Entry {
                value: value.to_string(),
                claimed: false,
            },
        );
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Raw value without claiming it.
    pub fn peek(&self, name: &str) -> Option<&str> {
        self.entries.get(name).map(|e| e.value.as_str())
    }

    fn take<T: ParamValue>(&mut self, name: &str) -> Result<Option<T>> {
        match self.entries.get_mut(name) {
            None => Ok(None),
            Some(e) => {
                e.claimed = true;
                T::from_param(&e.value)
                    .map(Some)
                    .ok_or_else(|| Error::ParamType {
                        name: name.to_string(),
                        value: e.value.clone(),
                        kind: T::KIND,
                    })
            }
        }
    }

    pub fn required<T: ParamValue>(&mut self, name: &str) -> Result<T> {
        self.take(name)?
            .ok_or_else(|| Error::MissingParam(name.to_string()))
    }

    pub fn optional<T: ParamValue>(&mut self, name: &str, default: T) -> Result<T> {
        Ok(self.take(name)?.unwrap_or(default))
    }

    pub fn maybe<T: ParamValue>(&mut self, name: &str) -> Result<Option<T>> {
        self.take(name)
    }

    /// Marks a parameter as consumed without converting it.
    pub fn claim(&mut self, name: &str) {
        if let Some(e) = self.entries.get_mut(name) {
            e.claimed = true;
        }
    }

    pub fn unclaimed(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, e)| !e.claimed)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn check_unused(&self) -> Result<()> {
        let left = self.unclaimed();
        if left.is_empty() {
            Ok(())
        } else {
            Err(Error::UnusedParams(left.join(",")))
        }
    }

    /// Copy of the map with every claim flag cleared.
    pub fn fresh(&self) -> ParamMap {
        let mut out = self.clone();
        for e in out.entries.values_mut() {
            e.claimed = false;
        }
        out
    }

    /// Splits off the entries named in `names` into a new map (claiming them here).
    pub fn extract(&mut self, names: &[&str]) -> ParamMap {
        let mut out = ParamMap::new();
        for n in names {
            if let Some(e) = self.entries.get_mut(*n) {
                e.claimed = true;
                out.set(n, e.value.clone());
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries
            .iter()
            .map(|(k, e)| (k.as_str(), e.value.as_str()))
    }
}

impl fmt::Display for ParamMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}
