//! Bilingual corpus model, file format and n-gram statistics.
//!
//! A corpus file holds one phrase pair per line:
//!
//! ```text
//! source<TAB>target[<TAB>std|121[<TAB>topic]]
//! ```
//!
//! `std` marks a standardized (literal) translation that is safe for
//! statistical training; `121` marks a non-literal pair that goes to a
//! one-to-one table. A missing flag means `std`, a missing topic means
//! [`DEFAULT_TOPIC`].

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Character used to join consolidated n-grams into a single token.
pub const JOINER: char = '&';

/// Topic assigned to pairs whose record has no topic column.
pub const DEFAULT_TOPIC: &str = "general";

/// A single normalized word. Never empty and never contains whitespace.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    /// Builds a token from already-normalized text.
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.is_empty() {
            return Err(Error::InvalidArgument("empty token".into()));
        }
        if text.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("token '{text}' contains whitespace")));
        }
        Ok(Token(text))
    }

    /// Joins several tokens with [`JOINER`].
    pub fn joined(parts: &[Token]) -> Token {
        let text = parts.iter().map(Token::as_str).collect::<Vec<_>>().join("&");
        Token(text)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_joined(&self) -> bool {
        self.0.contains(JOINER)
    }
}

impl TryFrom<String> for Token {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Token::new(value)
    }
}

impl From<Token> for String {
    fn from(token: Token) -> String {
        token.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Tokenizes free text: whitespace split, lowercase, surrounding punctuation
/// stripped. Accents, internal hyphens, apostrophes and the joiner survive.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(|word| {
            let trimmed = word.trim_matches(|c: char| !c.is_alphanumeric() && c != JOINER);
            let lowered = trimmed.to_lowercase();
            (!lowered.is_empty()).then_some(Token(lowered))
        })
        .collect()
}

/// Splits text that is already normalized (as written by [`join_tokens`])
/// back into tokens without re-normalizing it.
pub fn split_phrase(text: &str) -> Vec<Token> {
    text.split_whitespace().map(|w| Token(w.to_string())).collect()
}

/// Joins tokens with single spaces, leaving joined tokens intact.
pub fn join_tokens(tokens: &[Token]) -> String {
    tokens.iter().map(Token::as_str).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhrasePair {
    pub source: Vec<Token>,
    pub target: Vec<Token>,
    pub standardized: bool,
    pub topic: String,
}

impl PhrasePair {
    /// Tokenizes both sides. Fails if either side ends up empty.
    pub fn new(source: &str, target: &str, standardized: bool, topic: &str) -> Result<Self> {
        let source = tokenize(source);
        let target = tokenize(target);
        if source.is_empty() || target.is_empty() {
            return Err(Error::InvalidArgument("phrase pair with an empty side".into()));
        }
        Ok(PhrasePair { source, target, standardized, topic: topic.to_string() })
    }

    pub fn standardized(source: &str, target: &str) -> Result<Self> {
        Self::new(source, target, true, DEFAULT_TOPIC)
    }

    pub fn one_to_one(source: &str, target: &str, topic: &str) -> Result<Self> {
        Self::new(source, target, false, topic)
    }

    pub fn source_text(&self) -> String {
        join_tokens(&self.source)
    }

    pub fn target_text(&self) -> String {
        join_tokens(&self.target)
    }
}

/// Which side of a corpus an operation looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

impl Side {
    pub fn of<'a>(&self, pair: &'a PhrasePair) -> &'a [Token] {
        match self {
            Side::Source => &pair.source,
            Side::Target => &pair.target,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "source" | "src" => Ok(Side::Source),
            "target" | "tgt" => Ok(Side::Target),
            other => Err(Error::InvalidArgument(format!("unknown side '{other}'"))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Source => "source",
            Side::Target => "target",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelCorpus {
    pub pairs: Vec<PhrasePair>,
    pub source_lang: String,
    pub target_lang: String,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<PhrasePair>) -> Self {
        ParallelCorpus { pairs, source_lang: "es".into(), target_lang: "en".into() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PhrasePair> {
        self.pairs.iter()
    }
}

impl FromIterator<PhrasePair> for ParallelCorpus {
    fn from_iter<I: IntoIterator<Item = PhrasePair>>(iter: I) -> Self {
        ParallelCorpus::new(iter.into_iter().collect())
    }
}

/// How strictly the joiner character is treated when reading a corpus file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    /// Hand-written corpora: any token containing `&` is rejected.
    #[default]
    Raw,
    /// Output of consolidation: joined tokens are accepted.
    Consolidated,
}

/// Parses a tab-separated corpus. Blank lines and `#` comments are skipped;
/// errors carry the 1-based line number.
pub fn parse_corpus(raw: &str, format: CorpusFormat) -> Result<ParallelCorpus> {
    let mut pairs = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 {
            return Err(Error::parse(lineno, "expected at least source and target fields"));
        }
        if fields.len() > 4 {
            return Err(Error::parse(lineno, "too many fields"));
        }
        let standardized = match fields.get(2).map(|f| f.trim()) {
            None | Some("") | Some("std") => true,
            Some("121") => false,
            Some(other) => {
                return Err(Error::parse(lineno, format!("unknown flag '{other}', expected 'std' or '121'")))
            }
        };
        let topic = match fields.get(3).map(|f| f.trim()) {
            None | Some("") => DEFAULT_TOPIC,
            Some(topic) => topic,
        };
        let source = tokenize(fields[0]);
        let target = tokenize(fields[1]);
        if source.is_empty() {
            return Err(Error::parse(lineno, "empty source side"));
        }
        if target.is_empty() {
            return Err(Error::parse(lineno, "empty target side"));
        }
        if format == CorpusFormat::Raw {
            if let Some(bad) = source.iter().chain(&target).find(|t| t.is_joined()) {
                return Err(Error::parse(lineno, format!("reserved joiner '&' in token '{bad}'")));
            }
        }
        pairs.push(PhrasePair { source, target, standardized, topic: topic.to_string() });
    }
    Ok(ParallelCorpus::new(pairs))
}

/// Writes the corpus in the four-column form read by [`parse_corpus`].
pub fn serialize_corpus(corpus: &ParallelCorpus) -> String {
    let mut out = String::new();
    for pair in &corpus.pairs {
        let flag = if pair.standardized { "std" } else { "121" };
        out.push_str(&format!("{}\t{}\t{}\t{}\n", pair.source_text(), pair.target_text(), flag, pair.topic));
    }
    out
}

/// Line, word and distinct n-gram counts for one side of a corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramStats {
    pub lines: usize,
    pub words: usize,
    pub ngrams: BTreeMap<usize, usize>,
}

impl NgramStats {
    pub fn distinct(&self, n: usize) -> usize {
        self.ngrams.get(&n).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("stats serialize")
    }
}

pub fn corpus_stats(corpus: &ParallelCorpus, side: Side, nmax: usize) -> Result<NgramStats> {
    if nmax == 0 {
        return Err(Error::InvalidArgument("nmax must be at least 1".into()));
    }
    let mut seen: Vec<HashSet<&[Token]>> = vec![HashSet::new(); nmax];
    let mut words = 0;
    for pair in &corpus.pairs {
        let tokens = side.of(pair);
        words += tokens.len();
        for n in 1..=nmax.min(tokens.len()) {
            seen[n - 1].extend(tokens.windows(n));
        }
    }
    let ngrams = seen.iter().enumerate().map(|(i, set)| (i + 1, set.len())).collect();
    Ok(NgramStats { lines: corpus.len(), words, ngrams })
}
