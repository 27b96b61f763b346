//! Phrase extraction, relative-frequency scoring, one-to-one tables and the
//! merged lookup view the decoder consults.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::alignment::PositionIndices;
use crate::corpus::{join_tokens, tokenize, PhrasePair, Token};
use crate::error::{Error, Result};
use crate::num::Real;

pub const DEFAULT_MAX_N: usize = 3;

pub type Phrase = Vec<Token>;

#[derive(Clone, Debug, PartialEq)]
pub struct PhraseTableEntry<F> {
    pub source: Phrase,
    pub target: Phrase,
    pub weight: F,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableOrigin {
    Trained,
    OneToOne(String),
}

impl fmt::Display for TableOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableOrigin::Trained => f.write_str("trained"),
            TableOrigin::OneToOne(topic) => write!(f, "one-to-one({topic})"),
        }
    }
}

/// Anything that can answer "which targets does this source phrase have".
pub trait PhraseLookup<F: Real>: Send + Sync {
    fn lookup(&self, source: &[Token]) -> Vec<PhraseTableEntry<F>>;

    /// Longest source phrase stored, in tokens.
    fn max_source_len(&self) -> usize;
}

/// In-memory phrase table keyed by source phrase.
#[derive(Clone, Debug, PartialEq)]
pub struct PhraseTable<F> {
    entries: BTreeMap<Phrase, Vec<(Phrase, F)>>,
    pub origin: TableOrigin,
    pub max_n: usize,
}

impl<F: Real> PhraseTable<F> {
    pub fn new(origin: TableOrigin) -> Self {
        PhraseTable { entries: BTreeMap::new(), origin, max_n: 0 }
    }

    /// Adds or overwrites one `source -> target` weight.
    pub fn insert(&mut self, source: Phrase, target: Phrase, weight: F) {
        self.max_n = self.max_n.max(source.len());
        let targets = self.entries.entry(source).or_default();
        match targets.iter_mut().find(|(t, _)| *t == target) {
            Some(slot) => slot.1 = weight,
            None => {
                targets.push((target, weight));
                targets.sort_by(|a, b| a.0.cmp(&b.0));
            }
        }
    }

    /// Convenience for fixtures: tokenizes both sides.
    pub fn insert_text(&mut self, source: &str, target: &str, weight: F) {
        self.insert(tokenize(source), tokenize(target), weight);
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_count(&self) -> usize {
        self.entries.len()
    }

    pub fn sources(&self) -> impl Iterator<Item = &Phrase> {
        self.entries.keys()
    }

    pub fn targets(&self, source: &[Token]) -> &[(Phrase, F)] {
        self.entries.get(source).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn entries(&self) -> impl Iterator<Item = PhraseTableEntry<F>> + '_ {
        self.entries.iter().flat_map(|(source, targets)| {
            targets.iter().map(move |(target, weight)| PhraseTableEntry {
                source: source.clone(),
                target: target.clone(),
                weight: *weight,
            })
        })
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: F) -> Self {
        let mut out = self.clone();
        for targets in out.entries.values_mut() {
            for (_, w) in targets.iter_mut() {
                *w *= factor;
            }
        }
        out
    }

    /// `source ||| target ||| weight` per line, sorted by source then target.
    pub fn to_text(&self) -> String {
        self.entries()
            .map(|e| format!("{} ||| {} ||| {}\n", join_tokens(&e.source), join_tokens(&e.target), e.weight.as_f64()))
            .collect()
    }

    pub fn from_text(text: &str, origin: TableOrigin) -> Result<Self> {
        let mut table = PhraseTable::new(origin);
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split("|||").map(str::trim).collect();
            let [source, target, weight] = fields[..] else {
                return Err(Error::parse(idx + 1, "expected 'source ||| target ||| weight'"));
            };
            let weight: f64 = weight.parse().map_err(|_| Error::parse(idx + 1, "bad weight"))?;
            if !(weight > 0.0 && weight <= 1.0) {
                return Err(Error::parse(idx + 1, "weight outside (0, 1]"));
            }
            let (source, target) = (tokenize(source), tokenize(target));
            if source.is_empty() || target.is_empty() {
                return Err(Error::parse(idx + 1, "empty phrase"));
            }
            table.insert(source, target, F::of(weight));
        }
        Ok(table)
    }
}

impl<F: Real> PhraseLookup<F> for PhraseTable<F> {
    fn lookup(&self, source: &[Token]) -> Vec<PhraseTableEntry<F>> {
        self.targets(source)
            .iter()
            .map(|(target, weight)| PhraseTableEntry { source: source.to_vec(), target: target.clone(), weight: *weight })
            .collect()
    }

    fn max_source_len(&self) -> usize {
        self.max_n
    }
}

/// Every source span of at most `max_n` tokens whose linked target words form
/// a contiguous block that no outside source word links into, paired with that
/// block. The whole source phrase (when short enough) pairs with the whole
/// target so that target words nobody links to are not lost.
pub fn extract_phrases(pair: &PhrasePair, align: &PositionIndices, max_n: usize) -> Vec<(Phrase, Phrase)> {
    let source_len = pair.source.len();
    let target_len = pair.target.len();
    let links = align.targets();
    debug_assert!(align.is_valid_for(source_len, target_len));
    let mut out = Vec::new();
    for start in 0..source_len {
        for end in start..source_len.min(start + max_n) {
            let whole = start == 0 && end + 1 == source_len;
            let (lo, hi) = if whole {
                (0, target_len - 1)
            } else {
                let inside = &links[start..=end];
                (*inside.iter().min().expect("non-empty span"), *inside.iter().max().expect("non-empty span"))
            };
            let consistent = links
                .iter()
                .enumerate()
                .filter(|&(i, _)| i < start || i > end)
                .all(|(_, &t)| t < lo || t > hi);
            if consistent {
                out.push((pair.source[start..=end].to_vec(), pair.target[lo..=hi].to_vec()));
            }
        }
    }
    out
}

/// Relative frequency: `count(s, t) / count(s)`.
pub fn score_table<F: Real>(extracted: &[(Phrase, Phrase)]) -> Result<PhraseTable<F>> {
    if extracted.is_empty() {
        return Err(Error::InvalidArgument("no extracted phrases to score".into()));
    }
    let mut joint: HashMap<(&Phrase, &Phrase), usize> = HashMap::new();
    let mut marginal: HashMap<&Phrase, usize> = HashMap::new();
    for (source, target) in extracted {
        *joint.entry((source, target)).or_default() += 1;
        *marginal.entry(source).or_default() += 1;
    }
    let mut table = PhraseTable::new(TableOrigin::Trained);
    for ((source, target), count) in joint {
        let weight = F::of_usize(count) / F::of_usize(marginal[source]);
        table.insert(source.clone(), target.clone(), weight);
    }
    Ok(table)
}

/// Untrained table of whole phrases, every weight exactly one.
pub fn build_one_to_one<F: Real>(pairs: &[PhrasePair], topic: &str) -> Result<PhraseTable<F>> {
    let mut table = PhraseTable::new(TableOrigin::OneToOne(topic.to_string()));
    for pair in pairs {
        if pair.standardized {
            return Err(Error::InvalidArgument(format!(
                "standardized pair '{}' cannot go into a one-to-one table",
                pair.source_text()
            )));
        }
        match table.targets(&pair.source).first() {
            Some((existing, _)) if *existing != pair.target => {
                return Err(Error::AmbiguousOneToOne { topic: topic.to_string(), source_phrase: pair.source_text() });
            }
            Some(_) => {}
            None => table.insert(pair.source.clone(), pair.target.clone(), F::one()),
        }
    }
    Ok(table)
}

/// Several tables queried together. Entries from different tables coexist;
/// the decoder decides between them.
#[derive(Clone)]
pub struct LookupSet<F: Real> {
    tables: Vec<Arc<dyn PhraseLookup<F>>>,
}

impl<F: Real> LookupSet<F> {
    pub fn new() -> Self {
        LookupSet { tables: Vec::new() }
    }

    pub fn push(&mut self, table: Arc<dyn PhraseLookup<F>>) {
        self.tables.push(table);
    }

    pub fn table_count(&self) -> usize {
        self.tables.len()
    }
}

impl<F: Real> Default for LookupSet<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Real> PhraseLookup<F> for LookupSet<F> {
    fn lookup(&self, source: &[Token]) -> Vec<PhraseTableEntry<F>> {
        self.tables.iter().flat_map(|t| t.lookup(source)).collect()
    }

    fn max_source_len(&self) -> usize {
        self.tables.iter().map(|t| t.max_source_len()).max().unwrap_or(0)
    }
}

pub fn merge_tables<F: Real>(trained: PhraseTable<F>, one_to_one: Vec<PhraseTable<F>>) -> LookupSet<F> {
    let mut set = LookupSet::new();
    set.push(Arc::new(trained));
    for table in one_to_one {
        set.push(Arc::new(table));
    }
    set
}
