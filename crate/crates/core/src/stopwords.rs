//! Versioned stop-word lists.
//!
//! The shipped list id is part of the vocabulary fingerprint, so changing a
//! list means bumping its id. `en-v1` is the standard English list (NLTK-style,
//! restricted to tokens that can survive alphanumeric splitting — contraction
//! fragments like `don` and `t` are kept, apostrophe forms are not).

use std::collections::HashSet;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// English stop words, list id `en-v1`.
pub const ENGLISH_V1: &[&str] = &[
    "i",
    "me",
    "my",
    "myself",
    "we",
    "our",
    "ours",
    "ourselves",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
    "what",
    "which",
    "who",
    "whom",
    "this",
    "that",
    "these",
    "those",
    "am",
    "is",
    "are",
    "was",
    "were",
    "be",
    "been",
    "being",
    "have",
    "has",
    "had",
    "having",
    "do",
    "does",
    "did",
    "doing",
    "a",
    "an",
    "the",
    "and",
    "but",
    "if",
    "or",
    "because",
    "as",
    "until",
    "while",
    "of",
    "at",
    "by",
    "for",
    "with",
    "about",
    "against",
    "between",
    "into",
    "through",
    "during",
    "before",
    "after",
    "above",
    "below",
    "to",
    "from",
    "up",
    "down",
    "in",
    "out",
    "on",
    "off",
    "over",
    "under",
    "again",
    "further",
    "then",
    "once",
    "here",
    "there",
    "when",
    "where",
    "why",
    "how",
    "all",
    "any",
    "both",
    "each",
    "few",
    "more",
    "most",
    "other",
    "some",
    "such",
    "no",
    "nor",
    "not",
    "only",
    "own",
    "same",
    "so",
    "than",
    "too",
    "very",
    "s",
    "t",
    "can",
    "will",
    "just",
    "don",
    "should",
    "now",
    "d",
    "ll",
    "m",
    "o",
    "re",
    "ve",
    "y",
    "ain",
    "aren",
    "couldn",
    "didn",
    "doesn",
    "hadn",
    "hasn",
    "haven",
    "isn",
    "ma",
    "mightn",
    "mustn",
    "needn",
    "shan",
    "shouldn",
    "wasn",
    "weren",
    "won",
    "wouldn",
];

/// A named set of stop words.
#[derive(Debug, Clone)]
pub struct StopwordSet {
    id: String,
    words: HashSet<String>,
}

impl StopwordSet {
    /// Build a set from explicit words (for tests and custom lists).
    pub fn new(id: impl Into<String>, words: impl IntoIterator<Item = impl Into<String>>) -> Self {
        StopwordSet {
            id: id.into(),
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    /// The empty set, id `none`.
    pub fn none() -> Self {
        StopwordSet {
            id: "none".to_owned(),
            words: HashSet::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// The shipped English list.
pub fn english() -> &'static StopwordSet {
    static SET: OnceLock<StopwordSet> = OnceLock::new();
    SET.get_or_init(|| StopwordSet::new("en-v1", ENGLISH_V1.iter().copied()))
}

/// Resolve a list id (`en-v1` or `none`).
pub fn by_id(id: &str) -> Result<StopwordSet> {
    match id {
        "en-v1" => Ok(english().clone()),
        "none" => Ok(StopwordSet::none()),
        other => Err(Error::UnknownStopwordList(other.to_owned())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn english_list_has_the_words_gig_titles_lean_on() {
        let set = english();
        for w in ["i", "will", "for", "the", "a"] {
            assert!(set.contains(w), "missing {w:?}");
        }
        assert!(!set.contains("twitter"));
        assert!(set.len() > 140);
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert!(by_id("klingon-v9").is_err());
    }

    #[test]
    fn no_duplicates_in_shipped_list() {
        let set: HashSet<_> = ENGLISH_V1.iter().collect();
        assert_eq!(set.len(), ENGLISH_V1.len());
    }
}
