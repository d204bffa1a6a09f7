use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::KeywordError;

const DEFAULT_LEXICON: &str = include_str!("../../data/default_lexicon.json");
const SASB_CATEGORIES: &str = include_str!("../../data/sasb_categories.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub label: String,
    pub phrase: String,
}

/// Ordered keyword list; the order fixes matrix column order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLexicon", into = "RawLexicon")]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
}

#[derive(Serialize, Deserialize)]
struct RawLexicon {
    entries: Vec<LexiconEntry>,
}

impl TryFrom<RawLexicon> for Lexicon {
    type Error = KeywordError;

    fn try_from(raw: RawLexicon) -> Result<Self, Self::Error> {
        Lexicon::new(raw.entries)
    }
}

impl From<Lexicon> for RawLexicon {
    fn from(l: Lexicon) -> Self {
        RawLexicon { entries: l.entries }
    }
}

impl Lexicon {
    pub fn new(entries: Vec<LexiconEntry>) -> Result<Self, KeywordError> {
        if entries.is_empty() {
            return Err(KeywordError::InvalidLexicon("no entries".into()));
        }
        let mut labels = BTreeSet::new();
        let mut phrases = BTreeSet::new();
        for e in &entries {
            if e.label.trim().is_empty() {
                return Err(KeywordError::InvalidLexicon("blank label".into()));
            }
            if e.phrase.trim().is_empty() {
                return Err(KeywordError::InvalidLexicon(format!("empty phrase for '{}'", e.label)));
            }
            if e.phrase != e.phrase.to_lowercase() {
                return Err(KeywordError::InvalidLexicon(format!("phrase '{}' is not lowercase", e.phrase)));
            }
            if !labels.insert(e.label.as_str()) {
                return Err(KeywordError::InvalidLexicon(format!("duplicate label '{}'", e.label)));
            }
            if !phrases.insert(e.phrase.as_str()) {
                return Err(KeywordError::InvalidLexicon(format!("duplicate phrase '{}'", e.phrase)));
            }
        }
        Ok(Self { entries })
    }

    /// Convenience constructor where each phrase is its own label.
    pub fn from_phrases<S: AsRef<str>>(phrases: &[S]) -> Result<Self, KeywordError> {
        Self::new(
            phrases
                .iter()
                .map(|p| LexiconEntry {
                    label: p.as_ref().to_string(),
                    phrase: p.as_ref().to_string(),
                })
                .collect(),
        )
    }

    /// The 21 SASB-derived search phrases.
    pub fn builtin() -> Self {
        serde_json::from_str(DEFAULT_LEXICON).expect("embedded lexicon is valid")
    }

    pub fn from_json(json: &str) -> Result<Self, KeywordError> {
        serde_json::from_str(json).map_err(|e| KeywordError::InvalidLexicon(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, KeywordError> {
        let raw = std::fs::read_to_string(path).map_err(|source| KeywordError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&raw)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("lexicon serializes");
        s.push('\n');
        s
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }
}

/// A SASB standard and the search phrases it maps onto.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SasbCategory {
    pub name: String,
    pub phrases: Vec<String>,
}

/// The 22 SASB categories with their many-to-one mapping onto the builtin
/// phrases. Categories without a phrase map to an empty list.
pub fn sasb_categories() -> Vec<SasbCategory> {
    #[derive(Deserialize)]
    struct File {
        categories: Vec<SasbCategory>,
    }
    let f: File = serde_json::from_str(SASB_CATEGORIES).expect("embedded SASB table is valid");
    f.categories
}
