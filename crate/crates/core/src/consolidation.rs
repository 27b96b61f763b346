//! Standardization split and n-gram consolidation.
//!
//! Consolidation rewrites a multi-word sequence into one `&`-joined token so
//! that source and target phrases end up with comparable lengths. Rules are
//! applied in order: specific patterns come before the general ones they
//! contain (`a la cubana` before `a la`).

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{join_tokens, tokenize, ParallelCorpus, PhrasePair, Side, Token};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConsolidationRule {
    pub pattern: Vec<Token>,
    pub joined: Token,
    pub order_index: usize,
    pub side: Side,
}

impl ConsolidationRule {
    pub fn new(pattern: Vec<Token>, order_index: usize, side: Side) -> Result<Self> {
        if pattern.len() < 2 {
            return Err(Error::InvalidArgument("a consolidation pattern needs at least two tokens".into()));
        }
        if let Some(bad) = pattern.iter().find(|t| t.is_joined()) {
            return Err(Error::InvalidArgument(format!("pattern token '{bad}' is already joined")));
        }
        let joined = Token::joined(&pattern);
        Ok(ConsolidationRule { pattern, joined, order_index, side })
    }

    pub fn from_text(pattern: &str, order_index: usize, side: Side) -> Result<Self> {
        Self::new(tokenize(pattern), order_index, side)
    }
}

/// Training data and the per-topic one-to-one sets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorporaSplit {
    pub training: ParallelCorpus,
    pub one_to_one: BTreeMap<String, Vec<PhrasePair>>,
}

impl CorporaSplit {
    pub fn one_to_one_len(&self) -> usize {
        self.one_to_one.values().map(Vec::len).sum()
    }
}

/// Standardized pairs go to training, the rest to one-to-one sets by topic.
pub fn split_standardized(corpus: &ParallelCorpus) -> CorporaSplit {
    let mut training = Vec::new();
    let mut one_to_one: BTreeMap<String, Vec<PhrasePair>> = BTreeMap::new();
    for pair in &corpus.pairs {
        if pair.standardized {
            training.push(pair.clone());
        } else {
            one_to_one.entry(pair.topic.clone()).or_default().push(pair.clone());
        }
    }
    CorporaSplit {
        training: ParallelCorpus {
            pairs: training,
            source_lang: corpus.source_lang.clone(),
            target_lang: corpus.target_lang.clone(),
        },
        one_to_one,
    }
}

/// Rewrites every leftmost non-overlapping match of each rule, one rule after
/// another in list order.
pub fn apply_rules(phrase: &[Token], rules: &[ConsolidationRule]) -> Vec<Token> {
    let mut current = phrase.to_vec();
    for rule in rules {
        let width = rule.pattern.len();
        if current.len() < width {
            continue;
        }
        let mut out = Vec::with_capacity(current.len());
        let mut i = 0;
        while i < current.len() {
            if current[i..].starts_with(&rule.pattern) {
                out.push(rule.joined.clone());
                i += width;
            } else {
                out.push(current[i].clone());
                i += 1;
            }
        }
        current = out;
    }
    current
}

/// Pairs whose target is strictly shorter than the source.
pub fn mark_for_consolidation(corpus: &ParallelCorpus) -> Vec<PhrasePair> {
    corpus.pairs.iter().filter(|p| p.target.len() < p.source.len()).cloned().collect()
}

pub const DEFAULT_MIN_SUPPORT: usize = 2;
pub const DEFAULT_MAX_LEN: usize = 4;

/// Finds source n-grams shared by at least `min_support` marked phrases and
/// turns them into source-side rules, longest first, then by descending
/// support, then lexicographically.
///
/// An n-gram is dropped when a longer selected n-gram contains it with the same
/// support: every occurrence is consumed by the longer rule first, so the
/// shorter one could never fire.
pub fn auto_consolidate(marked: &[PhrasePair], min_support: usize, max_len: usize) -> Result<Vec<ConsolidationRule>> {
    if min_support < 2 {
        return Err(Error::InvalidArgument("min_support must be at least 2".into()));
    }
    if max_len < 2 {
        return Err(Error::InvalidArgument("max_len must be at least 2".into()));
    }
    // Support counts phrases, not occurrences.
    let mut support: HashMap<&[Token], usize> = HashMap::new();
    for pair in marked {
        let mut in_phrase: HashSet<&[Token]> = HashSet::new();
        for n in 2..=max_len.min(pair.source.len()) {
            in_phrase.extend(pair.source.windows(n));
        }
        for gram in in_phrase {
            *support.entry(gram).or_default() += 1;
        }
    }
    let mut frequent: Vec<(&[Token], usize)> = support.into_iter().filter(|&(_, s)| s >= min_support).collect();
    frequent.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(b.1.cmp(&a.1)).then_with(|| a.0.cmp(b.0)));

    let mut kept: Vec<(&[Token], usize)> = Vec::new();
    for (gram, sup) in frequent {
        let subsumed = kept.iter().any(|&(longer, longer_sup)| {
            longer.len() > gram.len() && longer_sup == sup && longer.windows(gram.len()).any(|w| w == gram)
        });
        if !subsumed {
            kept.push((gram, sup));
        }
    }
    kept.into_iter()
        .enumerate()
        .map(|(i, (gram, _))| ConsolidationRule::new(gram.to_vec(), i, Side::Source))
        .collect()
}

/// Applies source and target rules to the training set only.
pub fn consolidate_corpus(
    split: &CorporaSplit,
    source_rules: &[ConsolidationRule],
    target_rules: &[ConsolidationRule],
) -> CorporaSplit {
    let pairs = split
        .training
        .pairs
        .iter()
        .map(|pair| PhrasePair {
            source: apply_rules(&pair.source, source_rules),
            target: apply_rules(&pair.target, target_rules),
            standardized: pair.standardized,
            topic: pair.topic.clone(),
        })
        .collect();
    CorporaSplit {
        training: ParallelCorpus {
            pairs,
            source_lang: split.training.source_lang.clone(),
            target_lang: split.training.target_lang.clone(),
        },
        one_to_one: split.one_to_one.clone(),
    }
}

/// Reads `side<TAB>pattern` lines; `#` starts a comment. Line order is the
/// application order.
pub fn parse_rules(text: &str) -> Result<Vec<ConsolidationRule>> {
    let mut rules = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (side, pattern) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(lineno, "expected 'side<TAB>pattern'"))?;
        let side: Side = side.parse().map_err(|_| Error::parse(lineno, format!("unknown side '{side}'")))?;
        let rule = ConsolidationRule::from_text(pattern, rules.len(), side)
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
        rules.push(rule);
    }
    Ok(rules)
}

pub fn serialize_rules(rules: &[ConsolidationRule]) -> String {
    let mut ordered: Vec<&ConsolidationRule> = rules.iter().collect();
    ordered.sort_by_key(|r| r.order_index);
    ordered.iter().map(|r| format!("{}\t{}\n", r.side, join_tokens(&r.pattern))).collect()
}

/// Rules for one side, in application order.
pub fn rules_for(rules: &[ConsolidationRule], side: Side) -> Vec<ConsolidationRule> {
    let mut out: Vec<ConsolidationRule> = rules.iter().filter(|r| r.side == side).cloned().collect();
    out.sort_by_key(|r| r.order_index);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{corpus_stats, tokenize};

    fn rule(pattern: &str, order: usize) -> ConsolidationRule {
        ConsolidationRule::from_text(pattern, order, Side::Source).unwrap()
    }

    fn rewrite(text: &str, rules: &[ConsolidationRule]) -> String {
        join_tokens(&apply_rules(&tokenize(text), rules))
    }

    fn marked(sources: &[&str]) -> Vec<PhrasePair> {
        sources.iter().map(|s| PhrasePair::standardized(s, "x").unwrap()).collect()
    }

    #[test]
    fn split_sends_pairs_by_annotation() {
        let corpus: ParallelCorpus = [
            PhrasePair::standardized("tortilla de patatas", "potato omelette").unwrap(),
            PhrasePair::one_to_one("café cortado", "espresso with milk", "drinks").unwrap(),
        ]
        .into_iter()
        .collect();
        let split = split_standardized(&corpus);
        assert_eq!(split.training.len(), 1);
        assert_eq!(split.training.pairs[0].source_text(), "tortilla de patatas");
        assert_eq!(split.one_to_one["drinks"][0].target_text(), "espresso with milk");
        let empty = split_standardized(&ParallelCorpus::default());
        assert!(empty.training.is_empty() && empty.one_to_one.is_empty());
    }

    #[test]
    fn joins_cubana() {
        assert_eq!(rewrite("arroz a la cubana", &[rule("a la cubana", 0)]), "arroz a&la&cubana");
    }

    #[test]
    fn empty_rule_list_is_identity() {
        assert_eq!(rewrite("crema a la menta", &[]), "crema a la menta");
    }

    #[test]
    fn specific_rule_consumes_span_before_general() {
        let rules = [rule("a la cubana", 0), rule("a la", 1)];
        assert_eq!(
            rewrite("pollo a la cubana con arroz a la menta", &rules),
            "pollo a&la&cubana con arroz a&la menta"
        );
    }

    #[test]
    fn overlapping_matches_are_leftmost() {
        assert_eq!(rewrite("a a a", &[rule("a a", 0)]), "a&a a");
    }

    #[test]
    fn marking_uses_strict_length_comparison() {
        let corpus: ParallelCorpus = [
            PhrasePair::standardized("crema a la menta", "mint cream").unwrap(),
            PhrasePair::standardized("pollo asado", "roast chicken").unwrap(),
            PhrasePair::standardized("flan", "caramel custard").unwrap(),
        ]
        .into_iter()
        .collect();
        let marked = mark_for_consolidation(&corpus);
        assert_eq!(marked.len(), 1);
        assert_eq!(marked[0].source_text(), "crema a la menta");
    }

    #[test]
    fn auto_finds_a_la() {
        let rules = auto_consolidate(&marked(&["crema a la menta", "arroz a la cubana"]), 2, 4).unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].joined.as_str(), "a&la");
        assert_eq!(rules[0].side, Side::Source);
    }

    #[test]
    fn auto_on_singleton_is_empty() {
        assert!(auto_consolidate(&marked(&["crema a la menta"]), 2, 4).unwrap().is_empty());
    }

    #[test]
    fn auto_orders_specific_first() {
        let set = marked(&["arroz a la cubana", "huevos a la cubana", "crema a la menta"]);
        let rules = auto_consolidate(&set, 2, 4).unwrap();
        let joined: Vec<&str> = rules.iter().map(|r| r.joined.as_str()).collect();
        assert_eq!(joined, ["a&la&cubana", "a&la"]);
        assert_eq!(rules.iter().map(|r| r.order_index).collect::<Vec<_>>(), [0, 1]);
    }

    #[test]
    fn auto_rejects_bad_thresholds() {
        assert!(auto_consolidate(&[], 1, 4).is_err());
        assert!(auto_consolidate(&[], 2, 1).is_err());
    }

    #[test]
    fn consolidates_training_side_only() {
        let corpus: ParallelCorpus = [
            PhrasePair::standardized("arroz a la cubana", "Cuba-style rice").unwrap(),
            PhrasePair::standardized("pato a la naranja", "duck à la orange").unwrap(),
            PhrasePair::one_to_one("pulpo a la gallega", "galician octopus", "mains").unwrap(),
        ]
        .into_iter()
        .collect();
        let split = split_standardized(&corpus);
        let source_rules = [rule("a la cubana", 0)];
        let target_rules = [ConsolidationRule::from_text("à la", 0, Side::Target).unwrap()];
        let out = consolidate_corpus(&split, &source_rules, &target_rules);
        assert_eq!(out.training.pairs[0].source_text(), "arroz a&la&cubana");
        assert_eq!(out.training.pairs[0].target_text(), "cuba-style rice");
        assert_eq!(out.training.pairs[1].target_text(), "duck à&la orange");
        assert_eq!(out.one_to_one, split.one_to_one);
        assert_eq!(consolidate_corpus(&split, &[], &[]), split);
        let before = corpus_stats(&split.training, Side::Source, 1).unwrap().words;
        let after = corpus_stats(&out.training, Side::Source, 1).unwrap().words;
        assert!(after < before);
    }

    #[test]
    fn rule_file_round_trip_and_errors() {
        let text = "# manual rules\nsource\ta la cubana\nsource\ta la\n\ntarget\tà la\n";
        let rules = parse_rules(text).unwrap();
        assert_eq!(rules.len(), 3);
        assert_eq!(rules[2].side, Side::Target);
        assert_eq!(parse_rules(&serialize_rules(&rules)).unwrap(), rules);
        assert!(matches!(parse_rules("source a la"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_rules("middle\ta la"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_rules("source\tsolo").is_err());
    }
}
