//! Cooperative Patent Classification codes and their 1/3/4-character levels.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Aggregation level of a CPC code: section (1 char), class (3 chars) or
/// subclass (4 chars).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Section,
    Class,
    Subclass,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Section, Level::Class, Level::Subclass];

    /// Number of leading characters kept at this level.
    pub const fn width(self) -> usize {
        match self {
            Level::Section => 1,
            Level::Class => 3,
            Level::Subclass => 4,
        }
    }

    pub const fn index(self) -> usize {
        match self {
            Level::Section => 0,
            Level::Class => 1,
            Level::Subclass => 2,
        }
    }

    pub fn from_width(width: usize) -> Option<Level> {
        match width {
            1 => Some(Level::Section),
            3 => Some(Level::Class),
            4 => Some(Level::Subclass),
            _ => None,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.width())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .parse::<usize>()
            .ok()
            .and_then(Level::from_width)
            .ok_or_else(|| Error::Config(format!("CPC level must be 1, 3 or 4, got `{s}`")))
    }
}

/// A parsed CPC (or CPC-shaped IPC) code.
///
/// `raw` keeps the normalized input, including any group suffix such as
/// `" 10/50"`; the level truncations only look at the leading four
/// characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CpcCode {
    raw: String,
    subclass: [u8; 4],
}

const SECTIONS: &[u8] = b"ABCDEFGHY";

impl CpcCode {
    /// Parses a code, upper-casing and trimming first.
    pub fn parse(input: &str) -> Result<CpcCode> {
        let raw = input.trim().to_uppercase();
        let bytes = raw.as_bytes();
        let err = |field, reason| Error::CpcParse {
            raw: input.to_string(),
            field,
            reason,
        };
        if bytes.len() < 4 {
            return Err(err("code", "is shorter than 4 characters"));
        }
        if !bytes[0].is_ascii_uppercase() {
            return Err(err("section", "must be a letter"));
        }
        if !SECTIONS.contains(&bytes[0]) {
            return Err(err("section", "must be one of A-H or Y"));
        }
        if !bytes[1].is_ascii_digit() || !bytes[2].is_ascii_digit() {
            return Err(err("class", "positions 2-3 must be digits"));
        }
        if !bytes[3].is_ascii_uppercase() {
            return Err(err("subclass", "position 4 must be a letter"));
        }
        let subclass = [bytes[0], bytes[1], bytes[2], bytes[3]];
        Ok(CpcCode { raw, subclass })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn section(&self) -> &str {
        self.at(Level::Section)
    }

    pub fn class3(&self) -> &str {
        self.at(Level::Class)
    }

    pub fn subclass4(&self) -> &str {
        self.at(Level::Subclass)
    }

    /// Truncation of the code at `level`.
    pub fn at(&self, level: Level) -> &str {
        // always ASCII by construction
        std::str::from_utf8(&self.subclass[..level.width()]).expect("ascii code")
    }

    /// The raw code with all whitespace removed, used for prefix rules such as
    /// `G06N3` that reach below the subclass.
    pub fn compact(&self) -> String {
        self.raw.chars().filter(|c| !c.is_whitespace()).collect()
    }

    pub fn has_prefix(&self, prefix: &str) -> bool {
        let prefix: String = prefix
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_uppercase();
        self.compact().starts_with(&prefix)
    }
}

impl fmt::Display for CpcCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl FromStr for CpcCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CpcCode::parse(s)
    }
}

/// Validates a code prefix given at exactly 1, 3 or 4 characters and returns
/// the normalized prefix together with its level.
pub fn parse_level_prefix(prefix: &str) -> Result<(String, Level)> {
    let norm = prefix.trim().to_uppercase();
    let level = Level::from_width(norm.len()).ok_or_else(|| Error::CpcParse {
        raw: prefix.to_string(),
        field: "prefix",
        reason: "must have 1, 3 or 4 characters",
    })?;
    // pad to a full subclass so the regular parser checks each position
    let padded = match level {
        Level::Section => format!("{norm}00A"),
        Level::Class => format!("{norm}A"),
        Level::Subclass => norm.clone(),
    };
    CpcCode::parse(&padded).map_err(|e| match e {
        Error::CpcParse { field, reason, .. } => Error::CpcParse {
            raw: prefix.to_string(),
            field,
            reason,
        },
        other => other,
    })?;
    Ok((norm, level))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_subclass() {
        let c = CpcCode::parse("G06N").unwrap();
        assert_eq!(c.section(), "G");
        assert_eq!(c.class3(), "G06");
        assert_eq!(c.subclass4(), "G06N");
    }

    #[test]
    fn normalizes_case_and_trims() {
        let c = CpcCode::parse("  y02e 10/50 ").unwrap();
        assert_eq!(c.section(), "Y");
        assert_eq!(c.class3(), "Y02");
        assert_eq!(c.subclass4(), "Y02E");
        assert_eq!(c.raw(), "Y02E 10/50");
        assert_eq!(c.compact(), "Y02E10/50");
    }

    #[test]
    fn rejects_bad_fields() {
        let field = |s: &str| match CpcCode::parse(s) {
            Err(Error::CpcParse { field, .. }) => field,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(field("6G0X"), "section");
        assert_eq!(field("G0"), "code");
        assert_eq!(field("GA6N"), "class");
        assert_eq!(field("G061"), "subclass");
        assert_eq!(field("Z06N"), "section");
    }

    #[test]
    fn prefix_matching_ignores_whitespace() {
        let c = CpcCode::parse("G06N 3/08").unwrap();
        assert!(c.has_prefix("G06N3"));
        assert!(c.has_prefix("g06"));
        assert!(!c.has_prefix("G06F"));
    }

    #[test]
    fn level_prefixes() {
        assert_eq!(parse_level_prefix("h04w").unwrap(), ("H04W".into(), Level::Subclass));
        assert_eq!(parse_level_prefix("Y02").unwrap(), ("Y02".into(), Level::Class));
        assert_eq!(parse_level_prefix("B").unwrap(), ("B".into(), Level::Section));
        assert!(parse_level_prefix("G0").is_err());
        assert!(parse_level_prefix("G0X").is_err());
        assert!(parse_level_prefix("G06NX").is_err());
    }
}
