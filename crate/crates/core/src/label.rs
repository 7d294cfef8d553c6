use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Class of a noun lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "EVENT")]
    Event,
    #[serde(rename = "NON_EVENT")]
    NonEvent,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Event, Label::NonEvent];

    pub fn index(self) -> usize {
        match self {
            Label::Event => 0,
            Label::NonEvent => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Event => "EVENT",
            Label::NonEvent => "NON_EVENT",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown label `{0}` (expected EVENT or NON_EVENT)")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    /// Case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EVENT" => Ok(Label::Event),
            "NON_EVENT" => Ok(Label::NonEvent),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}
