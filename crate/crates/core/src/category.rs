use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The eleven defect categories of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    SyntaxStructure,
    SignalUsage,
    SensitivityList,
    ReservedWords,
    RaceOrHazard,
    PortType,
    Operators,
    ModuleInstances,
    LogicSynthesis,
    CombinationalOrSequential,
    BitWidthUsage,
}

impl Category {
    pub const ALL: [Category; 11] = [
        Category::SyntaxStructure,
        Category::SignalUsage,
        Category::SensitivityList,
        Category::ReservedWords,
        Category::RaceOrHazard,
        Category::PortType,
        Category::Operators,
        Category::ModuleInstances,
        Category::LogicSynthesis,
        Category::CombinationalOrSequential,
        Category::BitWidthUsage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::SyntaxStructure => "Syntax Structure",
            Category::SignalUsage => "Signal Usage",
            Category::SensitivityList => "Sensitivity List",
            Category::ReservedWords => "Reserved words",
            Category::RaceOrHazard => "Race or Hazard",
            Category::PortType => "Port Type",
            Category::Operators => "Operators",
            Category::ModuleInstances => "Module Instances",
            Category::LogicSynthesis => "Logic Synthesis",
            Category::CombinationalOrSequential => "Combinational or Sequential",
            Category::BitWidthUsage => "Bit width Usage",
        }
    }

    /// Lenient match: case, spaces, `_`, `-` and the word "or" placement do
    /// not matter (`BitWidthUsage`, `bit-width usage`, `race_or_hazard`).
    pub fn normalize(text: &str) -> Option<Category> {
        let key = squash(text);
        if key.is_empty() {
            return None;
        }
        if let Some(c) = Category::ALL.iter().find(|c| squash(c.name()) == key) {
            return Some(*c);
        }
        let aliases: &[(&str, Category)] = &[
            ("syntax", Category::SyntaxStructure),
            ("signal", Category::SignalUsage),
            ("undeclared", Category::SignalUsage),
            ("sensitivity", Category::SensitivityList),
            ("reservedword", Category::ReservedWords),
            ("keyword", Category::ReservedWords),
            ("race", Category::RaceOrHazard),
            ("hazard", Category::RaceOrHazard),
            ("multipledriver", Category::RaceOrHazard),
            ("port", Category::PortType),
            ("operator", Category::Operators),
            ("instance", Category::ModuleInstances),
            ("synthes", Category::LogicSynthesis),
            ("blocking", Category::CombinationalOrSequential),
            ("combinational", Category::CombinationalOrSequential),
            ("sequential", Category::CombinationalOrSequential),
            ("width", Category::BitWidthUsage),
        ];
        aliases
            .iter()
            .find(|(needle, _)| key.contains(needle))
            .map(|(_, c)| *c)
    }
}

fn squash(text: &str) -> String {
    text.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown category `{0}`")]
pub struct UnknownCategory(pub String);

/// Exact names only; use [`Category::normalize`] for detector output.
impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in Category::ALL {
            assert_eq!(c.name().parse::<Category>().unwrap(), c);
            assert_eq!(Category::normalize(c.name()), Some(c));
        }
    }

    #[test]
    fn lenient_forms() {
        assert_eq!(Category::normalize("BitWidthUsage"), Some(Category::BitWidthUsage));
        assert_eq!(Category::normalize("race_or_hazard"), Some(Category::RaceOrHazard));
        assert_eq!(Category::normalize("multiple drivers"), Some(Category::RaceOrHazard));
        assert_eq!(Category::normalize("???"), None);
        assert!("bit width usage".parse::<Category>().is_err());
    }

    #[test]
    fn serde_is_strict() {
        assert_eq!(serde_json::to_string(&Category::PortType).unwrap(), "\"Port Type\"");
        assert!(serde_json::from_str::<Category>("\"Typo\"").is_err());
    }
}
