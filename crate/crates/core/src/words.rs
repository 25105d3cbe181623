//! Word-pair corpus for Undercover: one pair per line, civilian word and
//! undercover word separated by a tab. Lines starting with `#` are comments.

use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordPair {
    pub civilian_word: String,
    pub undercover_word: String,
}

impl WordPair {
    pub fn new(civilian: impl Into<String>, undercover: impl Into<String>) -> Self {
        WordPair {
            civilian_word: civilian.into(),
            undercover_word: undercover.into(),
        }
    }
}

const BUILTIN: &str = include_str!("../data/word_pairs.tsv");

pub fn parse_corpus(text: &str) -> Result<Vec<WordPair>> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(ArenaError::InvalidInput(format!(
                "word pair line {} must have exactly two tab-separated fields",
                n + 1
            )));
        };
        let (a, b) = (a.trim(), b.trim());
        if a.is_empty() || b.is_empty() || a.eq_ignore_ascii_case(b) {
            return Err(ArenaError::InvalidInput(format!(
                "word pair line {} must hold two distinct words",
                n + 1
            )));
        }
        pairs.push(WordPair::new(a, b));
    }
    Ok(pairs)
}

pub fn builtin_corpus() -> &'static [WordPair] {
    static CORPUS: std::sync::OnceLock<Vec<WordPair>> = std::sync::OnceLock::new();
    CORPUS.get_or_init(|| parse_corpus(BUILTIN).expect("built-in corpus is well-formed"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_at_least_100_pairs_including_case_studies() {
        let c = builtin_corpus();
        assert!(c.len() >= 100);
        assert!(c.contains(&WordPair::new("Moon", "Sun")));
        assert!(c.contains(&WordPair::new("Camel", "Kangaroo")));
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(parse_corpus("Moon\n").is_err());
        assert!(parse_corpus("Moon\tmoon\n").is_err());
        assert_eq!(parse_corpus("# c\nA\tB\n\n").unwrap().len(), 1);
    }
}
