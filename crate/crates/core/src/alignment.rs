//! Lexical word alignment trained by expectation-maximization.
//!
//! Each target word is generated by one source word of its pair chosen
//! uniformly, with probability `t(target | source)`. There are no fertility,
//! distortion or null-word parameters; menu phrases are short enough for the
//! lexical table alone to produce usable position indices.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::corpus::{ParallelCorpus, PhrasePair, Token};
use crate::error::{Error, Result};
use crate::num::Real;

pub const DEFAULT_EM_ITERATIONS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentModel<F> {
    lex: HashMap<Token, HashMap<Token, F>>,
    pub iterations_run: usize,
    /// Corpus log-likelihood (natural log) under the parameters each
    /// iteration started from.
    pub log_likelihood_trace: Vec<F>,
}

/// One `source = target` link of [`PositionIndices`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub source: usize,
    pub target: usize,
    /// Set when the source word had no usable probability and the link was
    /// placed by position.
    pub low_confidence: bool,
}

/// One link per source token, in source order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionIndices {
    pub links: Vec<Link>,
}

impl PositionIndices {
    /// Builds indices from `(source, target)` pairs given in source order.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        PositionIndices {
            links: pairs
                .iter()
                .map(|&(source, target)| Link { source, target, low_confidence: false })
                .collect(),
        }
    }

    /// Target index of every source token.
    pub fn targets(&self) -> Vec<usize> {
        self.links.iter().map(|l| l.target).collect()
    }

    pub fn is_valid_for(&self, source_len: usize, target_len: usize) -> bool {
        self.links.len() == source_len
            && self.links.iter().enumerate().all(|(i, l)| l.source == i && l.target < target_len)
    }
}

impl fmt::Display for PositionIndices {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.links.iter().map(|l| format!("{}={}", l.source, l.target)).collect();
        f.write_str(&parts.join(", "))
    }
}

impl<F: Real> AlignmentModel<F> {
    /// `t(target | source)`, zero when the pair never co-occurred.
    pub fn prob(&self, source: &Token, target: &Token) -> F {
        self.lex.get(source).and_then(|row| row.get(target)).copied().unwrap_or_else(F::zero)
    }

    pub fn knows_source(&self, source: &Token) -> bool {
        self.lex.contains_key(source)
    }

    pub fn source_vocab(&self) -> impl Iterator<Item = &Token> {
        self.lex.keys()
    }

    /// Translation distribution of one source word.
    pub fn row(&self, source: &Token) -> Option<&HashMap<Token, F>> {
        self.lex.get(source)
    }

    pub fn entry_count(&self) -> usize {
        self.lex.values().map(HashMap::len).sum()
    }

    /// `source<TAB>target<TAB>prob` lines, by source then descending
    /// probability.
    pub fn to_text(&self) -> String {
        let sorted: BTreeMap<&Token, &HashMap<Token, F>> = self.lex.iter().collect();
        let mut out = String::new();
        for (source, row) in sorted {
            let mut targets: Vec<(&Token, F)> = row.iter().map(|(t, &p)| (t, p)).collect();
            targets.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(b.0)));
            for (target, prob) in targets {
                out.push_str(&format!("{source}\t{target}\t{}\n", prob.as_f64()));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lex: HashMap<Token, HashMap<Token, F>> = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [source, target, prob] = fields[..] else {
                return Err(Error::parse(idx + 1, "expected source, target and probability"));
            };
            let prob: f64 = prob.trim().parse().map_err(|_| Error::parse(idx + 1, "bad probability"))?;
            let source = Token::new(source).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
            let target = Token::new(target).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
            lex.entry(source).or_default().insert(target, F::of(prob));
        }
        Ok(AlignmentModel { lex, iterations_run: 0, log_likelihood_trace: Vec::new() })
    }
}

/// Runs `iterations` EM rounds from a uniform table.
pub fn train_em<F: Real>(training: &ParallelCorpus, iterations: usize) -> Result<AlignmentModel<F>> {
    if training.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument("EM needs at least one iteration".into()));
    }

    // Intern tokens so the inner loops work on dense ids.
    let mut source_ids: HashMap<&Token, usize> = HashMap::new();
    let mut target_ids: HashMap<&Token, usize> = HashMap::new();
    let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(training.len());
    for pair in &training.pairs {
        let s = pair.source.iter().map(|t| intern(&mut source_ids, t)).collect();
        let t = pair.target.iter().map(|t| intern(&mut target_ids, t)).collect();
        pairs.push((s, t));
    }

    // Only co-occurring (source, target) cells can ever get mass.
    let mut table: Vec<BTreeMap<usize, F>> = vec![BTreeMap::new(); source_ids.len()];
    for (s, t) in &pairs {
        for &si in s {
            for &tj in t {
                table[si].insert(tj, F::zero());
            }
        }
    }
    for row in &mut table {
        let uniform = F::one() / F::of_usize(row.len());
        row.values_mut().for_each(|p| *p = uniform);
    }

    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mut counts: Vec<BTreeMap<usize, F>> = vec![BTreeMap::new(); table.len()];
        let mut log_likelihood = F::zero();
        for (s, t) in &pairs {
            let source_len = F::of_usize(s.len());
            for &tj in t {
                let denom: F = s.iter().map(|&si| table[si][&tj]).sum();
                log_likelihood += (denom / source_len).ln();
                for &si in s {
                    let share = table[si][&tj] / denom;
                    *counts[si].entry(tj).or_insert_with(F::zero) += share;
                }
            }
        }
        trace.push(log_likelihood);
        for (si, row) in counts.into_iter().enumerate() {
            let total: F = row.values().copied().sum();
            if total > F::zero() {
                for (tj, c) in row {
                    table[si].insert(tj, c / total);
                }
            }
        }
    }

    let source_vocab: Vec<&Token> = invert(&source_ids);
    let target_vocab: Vec<&Token> = invert(&target_ids);
    let lex = table
        .into_iter()
        .enumerate()
        .map(|(si, row)| {
            let row = row.into_iter().map(|(tj, p)| (target_vocab[tj].clone(), p)).collect();
            (source_vocab[si].clone(), row)
        })
        .collect();
    Ok(AlignmentModel { lex, iterations_run: iterations, log_likelihood_trace: trace })
}

fn intern<'a>(ids: &mut HashMap<&'a Token, usize>, token: &'a Token) -> usize {
    let next = ids.len();
    *ids.entry(token).or_insert(next)
}

fn invert<'a>(ids: &HashMap<&'a Token, usize>) -> Vec<&'a Token> {
    let mut out = vec![None; ids.len()];
    for (&token, &id) in ids {
        out[id] = Some(token);
    }
    out.into_iter().map(|t| t.expect("dense ids")).collect()
}

/// Links each source token to its most probable target token in the pair.
/// Ties go to the lowest target index. Unknown source words (or words with no
/// mass on any target present) link to the positionally nearest target index
/// and are marked low-confidence.
pub fn viterbi_align<F: Real>(model: &AlignmentModel<F>, pair: &PhrasePair) -> PositionIndices {
    let target_len = pair.target.len();
    let links = pair
        .source
        .iter()
        .enumerate()
        .map(|(i, source)| {
            let mut best: Option<(usize, F)> = None;
            if let Some(row) = model.row(source) {
                for (j, target) in pair.target.iter().enumerate() {
                    let p = row.get(target).copied().unwrap_or_else(F::zero);
                    if p > F::zero() && best.is_none_or(|(_, bp)| p > bp) {
                        best = Some((j, p));
                    }
                }
            }
            match best {
                Some((j, _)) => Link { source: i, target: j, low_confidence: false },
                None => Link { source: i, target: i.min(target_len.saturating_sub(1)), low_confidence: true },
            }
        })
        .collect();
    PositionIndices { links }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn corpus(pairs: &[(&str, &str)]) -> ParallelCorpus {
        pairs.iter().map(|(s, t)| PhrasePair::standardized(s, t).unwrap()).collect()
    }

    fn tok(s: &str) -> Token {
        tokenize(s).remove(0)
    }

    #[test]
    fn single_cooccurrence_is_certain() {
        let model: AlignmentModel<f64> = train_em(&corpus(&[("arroz", "rice")]), 1).unwrap();
        assert_eq!(model.prob(&tok("arroz"), &tok("rice")), 1.0);
    }

    #[test]
    fn empty_corpus_and_zero_iterations_fail() {
        assert!(matches!(train_em::<f64>(&ParallelCorpus::default(), 3), Err(Error::EmptyCorpus)));
        assert!(train_em::<f64>(&corpus(&[("a", "x")]), 0).is_err());
    }

    #[test]
    fn rows_normalize_every_iteration_count() {
        let data = corpus(&[("a b", "x y"), ("a", "x"), ("b c", "y z w")]);
        for iterations in 1..6 {
            let model: AlignmentModel<f64> = train_em(&data, iterations).unwrap();
            for source in model.source_vocab() {
                let total: f64 = model.row(source).unwrap().values().sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn toy_alignment_is_monotone() {
        let data = corpus(&[("a b", "x y"), ("a", "x")]);
        let model: AlignmentModel<f64> = train_em(&data, 10).unwrap();
        let indices = viterbi_align(&model, &data.pairs[0]);
        assert_eq!(indices.targets(), [0, 1]);
        assert_eq!(indices.to_string(), "0=0, 1=1");
    }

    #[test]
    fn single_token_pair_links_to_zero() {
        let data = corpus(&[("flan", "custard")]);
        let model: AlignmentModel<f64> = train_em(&data, 2).unwrap();
        assert_eq!(viterbi_align(&model, &data.pairs[0]).targets(), [0]);
    }

    #[test]
    fn oov_falls_back_to_position() {
        let model: AlignmentModel<f64> = train_em(&corpus(&[("a", "x")]), 2).unwrap();
        let pair = PhrasePair::standardized("q r s", "x y").unwrap();
        let indices = viterbi_align(&model, &pair);
        assert_eq!(indices.targets(), [0, 1, 1]);
        assert!(indices.links.iter().all(|l| l.low_confidence));
        assert!(indices.is_valid_for(3, 2));
    }

    #[test]
    fn text_round_trip() {
        let model: AlignmentModel<f64> = train_em(&corpus(&[("a b", "x y"), ("a", "x")]), 4).unwrap();
        let text = model.to_text();
        let back = AlignmentModel::<f64>::from_text(&text).unwrap();
        assert_eq!(back.lex, model.lex);
        let first: Vec<&str> = text.lines().next().unwrap().split('\t').collect();
        assert_eq!(&first[..2], ["a", "x"]);
    }

    #[test]
    fn runs_in_single_precision() {
        let model: AlignmentModel<f32> = train_em(&corpus(&[("a b", "x y"), ("a", "x")]), 10).unwrap();
        assert!(model.prob(&tok("a"), &tok("x")) > 0.99);
    }
}
