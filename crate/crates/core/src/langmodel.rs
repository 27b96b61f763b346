//! Target-language n-gram model with Witten-Bell backoff smoothing.
//!
//! For a context `h` seen `c(h)` times with `T(h)` distinct followers:
//!
//! * a seen follower gets `c(h, w) / (c(h) + T(h))`;
//! * any other word gets `alpha(h) * p(w | h')`, where `h'` drops the oldest
//!   word and `alpha(h)` hands the reserved mass `T(h) / (c(h) + T(h))` to the
//!   words `h` was never followed by.
//!
//! The unigram level reserves its `T / (N + T)` for the unknown word, so every
//! distribution over the vocabulary plus `<unk>` sums to one and no word ever
//! gets zero probability. Scores are stored as log10.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::corpus::Token;
use crate::error::{Error, Result};
use crate::num::Real;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";
pub const DEFAULT_ORDER: usize = 3;

const BOS_ID: u32 = 0;
const EOS_ID: u32 = 1;
const UNK_ID: u32 = 2;

/// Word id inside a [`LanguageModel`].
pub type WordId = u32;

#[derive(Clone, Debug, PartialEq)]
pub struct LanguageModel<F> {
    pub order: usize,
    words: Vec<String>,
    ids: HashMap<String, WordId>,
    /// Raw n-gram event counts (all orders). Empty for models read from ARPA.
    counts: HashMap<Vec<WordId>, usize>,
    /// log10 p(last | prefix) for every seen n-gram.
    logprob: HashMap<Vec<WordId>, F>,
    /// log10 alpha(h) for every seen context.
    backoff: HashMap<Vec<WordId>, F>,
}

impl<F: Real> LanguageModel<F> {
    fn with_specials(order: usize) -> Self {
        let mut lm = LanguageModel {
            order,
            words: Vec::new(),
            ids: HashMap::new(),
            counts: HashMap::new(),
            logprob: HashMap::new(),
            backoff: HashMap::new(),
        };
        for special in [BOS, EOS, UNK] {
            lm.intern(special);
        }
        lm
    }

    fn intern(&mut self, word: &str) -> WordId {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len() as WordId;
        self.words.push(word.to_string());
        self.ids.insert(word.to_string(), id);
        id
    }

    pub fn id(&self, word: &str) -> WordId {
        self.ids.get(word).copied().unwrap_or(UNK_ID)
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    pub fn bos(&self) -> WordId {
        BOS_ID
    }

    pub fn eos(&self) -> WordId {
        EOS_ID
    }

    pub fn unk(&self) -> WordId {
        UNK_ID
    }

    /// Every word a distribution ranges over: the vocabulary, `</s>` and
    /// `<unk>`, but never `<s>`.
    pub fn predictable(&self) -> impl Iterator<Item = WordId> + '_ {
        (0..self.words.len() as WordId).filter(|&id| id != BOS_ID)
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    /// Contexts (of length 1..order-1) that were observed with a follower.
    pub fn contexts(&self) -> impl Iterator<Item = &[WordId]> {
        self.backoff.keys().map(Vec::as_slice)
    }

    /// Raw count of an n-gram given as words; zero when unseen or when the
    /// model was read from ARPA.
    pub fn count(&self, ngram: &[&str]) -> usize {
        let ids: Option<Vec<WordId>> = ngram.iter().map(|w| self.ids.get(*w).copied()).collect();
        ids.and_then(|ids| self.counts.get(&ids).copied()).unwrap_or(0)
    }

    /// Unsmoothed relative frequency `c(h, w) / c(h as context)`.
    pub fn raw_prob(&self, context: &[&str], word: &str) -> Option<f64> {
        let mut ngram = context.to_vec();
        ngram.push(word);
        let joint = self.count(&ngram);
        let ctx_ids: Option<Vec<WordId>> = context.iter().map(|w| self.ids.get(*w).copied()).collect();
        let ctx_ids = ctx_ids?;
        let total: usize = self
            .counts
            .iter()
            .filter(|(k, _)| k.len() == ctx_ids.len() + 1 && k.starts_with(&ctx_ids))
            .map(|(_, &c)| c)
            .sum();
        (total > 0).then(|| joint as f64 / total as f64)
    }

    /// log10 p(word | history). Only the last `order - 1` history words count.
    pub fn word_logprob(&self, history: &[WordId], word: WordId) -> F {
        let keep = history.len().min(self.order - 1);
        let mut context = &history[history.len() - keep..];
        let mut acc = F::zero();
        loop {
            let mut ngram = context.to_vec();
            ngram.push(word);
            if let Some(&lp) = self.logprob.get(&ngram) {
                return acc + lp;
            }
            if context.is_empty() {
                // Every predictable word except <unk> has a unigram entry.
                return acc + self.logprob[&vec![UNK_ID]];
            }
            if let Some(&bo) = self.backoff.get(context) {
                acc += bo;
            }
            context = &context[1..];
        }
    }

    /// Total log10 probability of a token sequence between `<s>` and `</s>`.
    pub fn logprob(&self, tokens: &[Token]) -> F {
        let ids: Vec<WordId> = tokens.iter().map(|t| self.id(t.as_str())).collect();
        self.logprob_ids(&ids)
    }

    pub fn logprob_ids(&self, ids: &[WordId]) -> F {
        let mut history = vec![BOS_ID];
        let mut total = F::zero();
        for &id in ids.iter().chain(std::iter::once(&EOS_ID)) {
            total += self.word_logprob(&history, id);
            history.push(id);
        }
        total
    }

    /// Trailing words that determine all future scores.
    pub fn state_of<'a>(&self, history: &'a [WordId]) -> &'a [WordId] {
        let keep = history.len().min(self.order - 1);
        &history[history.len() - keep..]
    }

    /// ARPA text: `\data\` counts, then `logprob<TAB>ngram[<TAB>backoff]`
    /// lines per order, sorted by n-gram text.
    pub fn to_arpa(&self) -> String {
        let mut by_order: BTreeMap<usize, BTreeMap<String, (F, Option<F>)>> = BTreeMap::new();
        for (ngram, &lp) in &self.logprob {
            let text = self.render(ngram);
            by_order.entry(ngram.len()).or_default().insert(text, (lp, self.backoff.get(ngram).copied()));
        }
        // <s> is never predicted but carries a backoff weight.
        let bos = vec![BOS_ID];
        if let Some(&bo) = self.backoff.get(&bos) {
            by_order.entry(1).or_default().insert(BOS.to_string(), (F::of(-99.0), Some(bo)));
        }
        let mut out = String::from("\n\\data\\\n");
        for n in 1..=self.order {
            let count = by_order.get(&n).map_or(0, BTreeMap::len);
            let _ = writeln!(out, "ngram {n}={count}");
        }
        for n in 1..=self.order {
            let _ = write!(out, "\n\\{n}-grams:\n");
            for (text, (lp, bo)) in by_order.get(&n).into_iter().flatten() {
                match bo {
                    Some(bo) => {
                        let _ = writeln!(out, "{}\t{text}\t{}", lp.as_f64(), bo.as_f64());
                    }
                    None => {
                        let _ = writeln!(out, "{}\t{text}", lp.as_f64());
                    }
                }
            }
        }
        out.push_str("\n\\end\\\n");
        out
    }

    fn render(&self, ngram: &[WordId]) -> String {
        ngram.iter().map(|&id| self.word(id)).collect::<Vec<_>>().join(" ")
    }

    /// Reads a model written by [`LanguageModel::to_arpa`].
    pub fn from_arpa(text: &str) -> Result<Self> {
        let mut order = 0;
        let mut section = 0usize;
        let mut entries: Vec<(Vec<String>, f64, Option<f64>)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line == "\\data\\" || line == "\\end\\" {
                continue;
            }
            if let Some(rest) = line.strip_prefix("ngram ") {
                let n: usize = rest
                    .split('=')
                    .next()
                    .and_then(|n| n.trim().parse().ok())
                    .ok_or_else(|| Error::parse(idx + 1, "bad ngram header"))?;
                order = order.max(n);
                continue;
            }
            if let Some(n) = line.strip_prefix('\\').and_then(|l| l.strip_suffix("-grams:")) {
                section = n.parse().map_err(|_| Error::parse(idx + 1, "bad section header"))?;
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 || section == 0 {
                return Err(Error::parse(idx + 1, "expected 'logprob<TAB>ngram[<TAB>backoff]'"));
            }
            let lp: f64 = fields[0].parse().map_err(|_| Error::parse(idx + 1, "bad logprob"))?;
            let words: Vec<String> = fields[1].split(' ').map(str::to_string).collect();
            if words.len() != section {
                return Err(Error::parse(idx + 1, "n-gram length does not match its section"));
            }
            let bo = match fields.get(2) {
                Some(b) => Some(b.parse().map_err(|_| Error::parse(idx + 1, "bad backoff"))?),
                None => None,
            };
            entries.push((words, lp, bo));
        }
        if order == 0 {
            return Err(Error::parse(1, "missing \\data\\ header"));
        }
        let mut lm = LanguageModel::with_specials(order);
        for (words, lp, bo) in entries {
            let ids: Vec<WordId> = words.iter().map(|w| lm.intern(w)).collect();
            if ids != [BOS_ID] {
                lm.logprob.insert(ids.clone(), F::of(lp));
            }
            if let Some(bo) = bo {
                lm.backoff.insert(ids, F::of(bo));
            }
        }
        if !lm.logprob.contains_key(&vec![UNK_ID]) {
            return Err(Error::parse(1, "model has no <unk> unigram"));
        }
        Ok(lm)
    }
}

#[derive(Default)]
struct ContextStats {
    total: usize,
    followers: Vec<WordId>,
}

/// Counts every n-gram up to `order` over `<s> tokens </s>` and fixes the
/// Witten-Bell parameters.
pub fn train_lm<F: Real>(corpus: &[Vec<Token>], order: usize) -> Result<LanguageModel<F>> {
    if order == 0 {
        return Err(Error::InvalidArgument("language model order must be at least 1".into()));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut lm = LanguageModel::with_specials(order);
    for sentence in corpus {
        let mut ids = vec![BOS_ID];
        ids.extend(sentence.iter().map(|t| lm.intern(t.as_str())));
        ids.push(EOS_ID);
        for i in 1..ids.len() {
            for n in 1..=order.min(i + 1) {
                *lm.counts.entry(ids[i + 1 - n..=i].to_vec()).or_default() += 1;
            }
        }
    }

    let mut contexts: HashMap<Vec<WordId>, ContextStats> = HashMap::new();
    for (ngram, &count) in &lm.counts {
        let stats = contexts.entry(ngram[..ngram.len() - 1].to_vec()).or_default();
        stats.total += count;
        stats.followers.push(ngram[ngram.len() - 1]);
    }
    for stats in contexts.values_mut() {
        stats.followers.sort_unstable();
    }

    // Unigrams: reserved mass goes to <unk>.
    let unigram = &contexts[&Vec::new()];
    let denom = F::of_usize(unigram.total + unigram.followers.len());
    for &w in &unigram.followers {
        let p = F::of_usize(lm.counts[&vec![w]]) / denom;
        lm.logprob.insert(vec![w], p.log10());
    }
    let unk = F::of_usize(unigram.followers.len()) / denom;
    lm.logprob.insert(vec![UNK_ID], unk.log10());

    // Higher orders, shortest contexts first so backoff targets exist.
    let mut ordered: Vec<(&Vec<WordId>, &ContextStats)> = contexts.iter().filter(|(h, _)| !h.is_empty()).collect();
    ordered.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
    for (context, stats) in ordered {
        let denom = F::of_usize(stats.total + stats.followers.len());
        let mut lower_mass = F::zero();
        for &w in &stats.followers {
            let mut ngram = context.clone();
            ngram.push(w);
            let p = F::of_usize(lm.counts[&ngram]) / denom;
            lower_mass += F::of(10.0).powf(lm.word_logprob(&context[1..], w));
            lm.logprob.insert(ngram, p.log10());
        }
        let reserved = F::of_usize(stats.followers.len()) / denom;
        let alpha = reserved / (F::one() - lower_mass);
        lm.backoff.insert(context.clone(), alpha.log10());
    }
    Ok(lm)
}
