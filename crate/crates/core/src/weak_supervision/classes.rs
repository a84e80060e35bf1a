use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Character class of a detected or labeled box.
///
/// Serialized as `"Background"`, `"0"`..`"9"`, `"a"`..`"z"`, `"Unknown"` or
/// `"Foreground"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CharClass {
    Background,
    Digit(u8),
    Letter(char),
    Unknown,
    Foreground,
}

impl CharClass {
    /// Whether the class names a concrete character.
    pub fn is_character(&self) -> bool {
        matches!(self, CharClass::Digit(_) | CharClass::Letter(_))
    }

    /// All digit and lowercase-letter classes.
    pub fn characters() -> impl Iterator<Item = CharClass> {
        (0..10).map(CharClass::Digit).chain(('a'..='z').map(CharClass::Letter))
    }
}

impl fmt::Display for CharClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharClass::Background => f.write_str("Background"),
            CharClass::Digit(d) => write!(f, "{d}"),
            CharClass::Letter(c) => write!(f, "{c}"),
            CharClass::Unknown => f.write_str("Unknown"),
            CharClass::Foreground => f.write_str("Foreground"),
        }
    }
}

impl FromStr for CharClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "Background" => Ok(CharClass::Background),
            "Unknown" => Ok(CharClass::Unknown),
            "Foreground" => Ok(CharClass::Foreground),
            _ => {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c @ '0'..='9'), None) => Ok(CharClass::Digit(c as u8 - b'0')),
                    (Some(c @ 'a'..='z'), None) => Ok(CharClass::Letter(c)),
                    _ => Err(Error::Format(format!("unknown character class {s:?}"))),
                }
            }
        }
    }
}

impl TryFrom<String> for CharClass {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<CharClass> for String {
    fn from(c: CharClass) -> Self {
        c.to_string()
    }
}

/// Class taxonomy used by the character classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassMode {
    /// Background and Foreground only.
    #[serde(rename = "BF")]
    Bf,
    /// Background, 10 digits, 26 letters and Unknown for every domain.
    All,
    /// `All` on synthetic data, `BF` on real data.
    #[serde(rename = "All+BF")]
    AllBf,
}

/// Where a training sample comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Synthetic,
    Real,
}

impl ClassMode {
    /// Width of the classifier output. `AllBf` shares one head between the
    /// two taxonomies: the 38 fine classes plus Foreground.
    pub fn num_classes(&self) -> usize {
        match self {
            ClassMode::Bf => 2,
            ClassMode::All => 38,
            ClassMode::AllBf => 39,
        }
    }

    /// Logit index of `class` under this mode, if the mode can express it.
    pub fn class_index(&self, class: CharClass) -> Option<usize> {
        let fine = |c: CharClass| match c {
            CharClass::Background => Some(0),
            CharClass::Digit(d) if d < 10 => Some(1 + d as usize),
            CharClass::Letter(l) if l.is_ascii_lowercase() => Some(11 + (l as u8 - b'a') as usize),
            CharClass::Unknown => Some(37),
            _ => None,
        };
        match self {
            ClassMode::Bf => match class {
                CharClass::Background => Some(0),
                CharClass::Foreground => Some(1),
                _ => None,
            },
            ClassMode::All => fine(class),
            ClassMode::AllBf => match class {
                CharClass::Foreground => Some(38),
                c => fine(c),
            },
        }
    }

    /// Whether predictions under this mode on `domain` carry character
    /// identities.
    pub fn carries_identity(&self, domain: Domain) -> bool {
        match self {
            ClassMode::Bf => false,
            ClassMode::All => true,
            ClassMode::AllBf => domain == Domain::Synthetic,
        }
    }
}

/// Maps a class into the taxonomy `mode` uses for `domain`.
pub fn map_class(class: CharClass, mode: ClassMode, domain: Domain) -> CharClass {
    let collapse = |c: CharClass| match c {
        CharClass::Background => CharClass::Background,
        _ => CharClass::Foreground,
    };
    match (mode, domain) {
        (ClassMode::Bf, _) | (ClassMode::AllBf, Domain::Real) => collapse(class),
        (ClassMode::All, _) | (ClassMode::AllBf, Domain::Synthetic) => class,
    }
}
