use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Dense handle for an interned tag. Ids are allocated in first-intern order
/// starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TagId(pub u32);

impl TagId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A normalized tag surface. Construction always normalizes, so two tags
/// compare equal exactly when their normalized surfaces do.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Tag(String);

impl Tag {
    pub fn new(raw: &str) -> Result<Self> {
        let surface = normalize(raw);
        if surface.is_empty() {
            return Err(Error::EmptyTag);
        }
        Ok(Tag(surface))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Tag::new(&raw).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Tag {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Lowercase, NFC, trim and collapse internal whitespace runs to one space.
pub fn normalize(raw: &str) -> String {
    let lowered: String = raw.to_lowercase().nfc().collect();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn collapses_case_and_whitespace() {
        assert_eq!(normalize("  Indoor \t  PET\n"), "indoor pet");
        assert_eq!(Tag::new("Cat").unwrap(), Tag::new("cat").unwrap());
    }

    #[test]
    fn composes_to_nfc() {
        // "e" + combining acute vs precomposed "é"
        assert_eq!(normalize("Cafe\u{301}"), "caf\u{e9}");
    }

    #[test]
    fn whitespace_only_is_empty() {
        assert!(matches!(Tag::new("  "), Err(Error::EmptyTag)));
        assert!(matches!(Tag::new(""), Err(Error::EmptyTag)));
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(s in any::<String>()) {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn normalized_has_no_edge_or_double_spaces(s in "[ a-zA-Z\t\n]{0,40}") {
            let n = normalize(&s);
            prop_assert!(!n.starts_with(' ') && !n.ends_with(' '));
            prop_assert!(!n.contains("  "));
        }
    }
}
