//! Controlled vocabulary for hand-labelled unsafe usages.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ReportError;

macro_rules! vocabulary {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str() == s)
                    .ok_or_else(|| format!("unknown {} class {s:?}", stringify!($name)))
            }
        }
    };
}

vocabulary!(WhatClass {
    Cast => "cast",
    MemoryAccess => "memory-access",
    PointerArithmetic => "pointer-arithmetic",
    Definition => "definition",
    Delegate => "delegate",
    Syscall => "syscall",
    Unused => "unused",
});

vocabulary!(PurposeClass {
    Efficiency => "efficiency",
    Serialization => "serialization",
    Generics => "generics",
    AvoidGc => "avoid-gc",
    Atomic => "atomic",
    Ffi => "ffi",
    HideEscape => "hide-escape",
    MemoryLayout => "memory-layout",
    Types => "types",
    Reflect => "reflect",
    Unused => "unused",
});

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub what_class: WhatClass,
    pub purpose_class: PurposeClass,
}

/// Parses an annotation CSV (`file,line,column,what_class,purpose_class`),
/// rejecting any label outside the vocabulary.
pub fn validate_annotations(text: &str) -> Result<Vec<Annotation>, ReportError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let expected = ["file", "line", "column", "what_class", "purpose_class"];
    if reader.headers()?.iter().ne(expected) {
        return Err(ReportError::InvalidRecord {
            line: 1,
            message: format!("header must be {}", expected.join(",")),
        });
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| ReportError::InvalidRecord { line, message };
        let num = |i: usize| -> Result<u32, ReportError> {
            record[i]
                .parse()
                .map_err(|_| bad(format!("invalid number {:?}", &record[i])))
        };
        out.push(Annotation {
            file: record[0].to_string(),
            line: num(1)?,
            column: num(2)?,
            what_class: record[3].parse().map_err(bad)?,
            purpose_class: record[4].parse().map_err(bad)?,
        });
    }
    Ok(out)
}
