//! Phrase-based beam search producing a k-best list.
//!
//! A hypothesis covers some source tokens and has emitted a target prefix. Its
//! cost is a weighted sum of four feature costs:
//!
//! * `tm`: `-log10` of the phrase weights used, plus a fixed penalty for each
//!   source token copied through untranslated;
//! * `lm`: `-log10` probability of the output under the language model;
//! * `dist`: total jump distance `|start(next) - end(prev) - 1|`;
//! * `wp`: number of output words.
//!
//! Hypotheses that agree on coverage, last source position and language-model
//! context share every possible completion, so they are merged into one search
//! state. Each state keeps its `k` cheapest distinct output prefixes, which is
//! exactly what is needed for an exact `k`-best list when nothing is pruned.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::consolidation::{apply_rules, ConsolidationRule};
use crate::corpus::{tokenize, Token, JOINER};
use crate::error::{Error, Result};
use crate::langmodel::{LanguageModel, WordId};
use crate::num::Real;
use crate::phrasetable::PhraseLookup;

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_BEAM: usize = 50;
pub const DEFAULT_MAX_DISTORTION: usize = 3;
pub const DEFAULT_OOV_PENALTY: f64 = 10.0;
/// Longest input the coverage bitset can hold.
pub const MAX_INPUT_TOKENS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecoderWeights<F> {
    pub translation: F,
    pub lm: F,
    pub distortion: F,
    pub word_penalty: F,
}

impl<F: Real> Default for DecoderWeights<F> {
    fn default() -> Self {
        DecoderWeights { translation: F::one(), lm: F::of(0.5), distortion: F::of(0.3), word_penalty: F::of(-0.1) }
    }
}

impl<F: Real> DecoderWeights<F> {
    pub fn is_finite(&self) -> bool {
        [self.translation, self.lm, self.distortion, self.word_penalty].iter().all(|w| w.is_finite())
    }
}

/// Unweighted feature costs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CostComponents<F> {
    pub tm: F,
    pub lm: F,
    pub dist: F,
    pub wp: F,
}

impl<F: Real> CostComponents<F> {
    pub fn weighted(&self, w: &DecoderWeights<F>) -> F {
        w.translation * self.tm + w.lm * self.lm + w.distortion * self.dist + w.word_penalty * self.wp
    }
}

#[derive(Clone, Debug)]
pub struct DecoderConfig<F> {
    pub weights: DecoderWeights<F>,
    pub k: usize,
    pub beam_size: usize,
    pub max_distortion: usize,
    pub oov_penalty: F,
    /// Consolidation rules applied to the input before decoding.
    pub pre_rules: Option<Vec<ConsolidationRule>>,
}

impl<F: Real> Default for DecoderConfig<F> {
    fn default() -> Self {
        DecoderConfig {
            weights: DecoderWeights::default(),
            k: DEFAULT_K,
            beam_size: DEFAULT_BEAM,
            max_distortion: DEFAULT_MAX_DISTORTION,
            oov_penalty: F::of(DEFAULT_OOV_PENALTY),
            pre_rules: None,
        }
    }
}

/// One phrase application inside a finished hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    /// Source span, half-open.
    pub start: usize,
    pub end: usize,
    pub target: Vec<Token>,
    pub oov: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranslationHypothesis<F> {
    pub rank: usize,
    pub text: String,
    pub tokens: Vec<Token>,
    pub cost: F,
    pub components: CostComponents<F>,
    pub segments: Vec<Segment>,
}

impl<F: Real> TranslationHypothesis<F> {
    /// Source tokens copied through untranslated.
    pub fn oov_tokens<'a>(&self, input: &'a [Token]) -> Vec<&'a Token> {
        self.segments.iter().filter(|s| s.oov).flat_map(|s| &input[s.start..s.end]).collect()
    }
}

/// Finished hypotheses, cheapest first, no two with the same text.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KBestList<F> {
    pub input: Vec<Token>,
    pub items: Vec<TranslationHypothesis<F>>,
}

impl<F: Real> KBestList<F> {
    pub fn best(&self) -> Option<&TranslationHypothesis<F>> {
        self.items.first()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.items.iter().map(|h| h.text.as_str()).collect()
    }

    /// `[{rank, text, cost, components:{tm,lm,dist,wp}}]`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.items
                .iter()
                .map(|h| {
                    serde_json::json!({
                        "rank": h.rank,
                        "text": h.text,
                        "cost": h.cost.as_f64(),
                        "components": {
                            "tm": h.components.tm.as_f64(),
                            "lm": h.components.lm.as_f64(),
                            "dist": h.components.dist.as_f64(),
                            "wp": h.components.wp.as_f64(),
                        }
                    })
                })
                .collect(),
        )
    }
}

/// Replaces the joiner inside tokens by spaces and joins tokens with spaces.
pub fn detokenize_consolidated<T: AsRef<str>>(tokens: &[T]) -> String {
    tokens
        .iter()
        .map(|t| t.as_ref().replace(JOINER, " "))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Ordering key shared by every ranking step: cost at 1e-9 resolution, then
/// output text.
pub fn rank_key<F: Real>(cost: F, text: &str) -> (i64, String) {
    ((cost.as_f64() * 1e9).round() as i64, text.to_string())
}

/// A way to translate one source span.
#[derive(Clone, Debug)]
pub struct TranslationOption<F> {
    pub start: usize,
    pub end: usize,
    pub target: Vec<Token>,
    /// Translation-model cost, `-log10(weight)` or the OOV penalty.
    pub tm: F,
    pub oov: bool,
}

/// All options for an input: every table match of up to the lookup's longest
/// phrase, plus a copy-through option for each token without a single-token
/// entry.
pub fn collect_options<F: Real>(
    input: &[Token],
    lookup: &dyn PhraseLookup<F>,
    oov_penalty: F,
) -> Vec<TranslationOption<F>> {
    let max_len = lookup.max_source_len().max(1);
    let mut options = Vec::new();
    for start in 0..input.len() {
        let mut single = false;
        for end in start + 1..=input.len().min(start + max_len) {
            for entry in lookup.lookup(&input[start..end]) {
                if entry.weight <= F::zero() || entry.target.is_empty() {
                    continue;
                }
                single |= end == start + 1;
                options.push(TranslationOption { start, end, target: entry.target, tm: -entry.weight.log10(), oov: false });
            }
        }
        if !single {
            options.push(TranslationOption {
                start,
                end: start + 1,
                target: vec![input[start].clone()],
                tm: oov_penalty,
                oov: true,
            });
        }
    }
    options
}

#[derive(Clone)]
struct Path<F> {
    cost: F,
    components: CostComponents<F>,
    output: Vec<Token>,
    text: String,
    segments: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct StateKey {
    coverage: u64,
    next: usize,
    lm_state: Vec<WordId>,
}

/// Keeps up to `k` cheapest paths with distinct text.
fn offer<F: Real>(paths: &mut Vec<Path<F>>, candidate: Path<F>, k: usize) {
    if let Some(existing) = paths.iter_mut().find(|p| p.text == candidate.text) {
        if rank_key(candidate.cost, "") < rank_key(existing.cost, "") {
            *existing = candidate;
        }
    } else {
        paths.push(candidate);
    }
    paths.sort_by_cached_key(|p| rank_key(p.cost, &p.text));
    paths.truncate(k);
}

fn lm_cost<F: Real>(lm: &LanguageModel<F>, history: &mut Vec<WordId>, words: &[WordId]) -> F {
    let mut cost = F::zero();
    for &w in words {
        cost -= lm.word_logprob(history, w);
        history.push(w);
    }
    cost
}

/// Optimistic completion cost for every span, used only to rank states when
/// the beam prunes.
fn future_costs<F: Real>(
    n: usize,
    options: &[TranslationOption<F>],
    lm: &LanguageModel<F>,
    w: &DecoderWeights<F>,
) -> Vec<Vec<F>> {
    let mut table = vec![vec![F::infinity(); n + 1]; n + 1];
    for opt in options {
        let ids: Vec<WordId> = opt.target.iter().map(|t| lm.id(t.as_str())).collect();
        let lm_part = lm_cost(lm, &mut Vec::new(), &ids);
        let c = w.translation * opt.tm + w.lm * lm_part + w.word_penalty * F::of_usize(ids.len());
        if c < table[opt.start][opt.end] {
            table[opt.start][opt.end] = c;
        }
    }
    for len in 2..=n {
        for start in 0..=n - len {
            let end = start + len;
            for mid in start + 1..end {
                let split = table[start][mid] + table[mid][end];
                if split < table[start][end] {
                    table[start][end] = split;
                }
            }
        }
    }
    table
}

fn future_of<F: Real>(coverage: u64, n: usize, table: &[Vec<F>]) -> F {
    let mut total = F::zero();
    let mut i = 0;
    while i < n {
        if coverage & (1 << i) != 0 {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < n && coverage & (1 << j) == 0 {
            j += 1;
        }
        total += table[i][j];
        i = j;
    }
    total
}

/// Translates `input` and returns at most `config.k` ranked outputs.
pub fn translate<F: Real>(
    input: &str,
    lookup: &dyn PhraseLookup<F>,
    lm: &LanguageModel<F>,
    config: &DecoderConfig<F>,
) -> Result<KBestList<F>> {
    let mut tokens = tokenize(input);
    if let Some(rules) = &config.pre_rules {
        tokens = apply_rules(&tokens, rules);
    }
    translate_tokens(&tokens, lookup, lm, config)
}

pub fn translate_tokens<F: Real>(
    input: &[Token],
    lookup: &dyn PhraseLookup<F>,
    lm: &LanguageModel<F>,
    config: &DecoderConfig<F>,
) -> Result<KBestList<F>> {
    if input.is_empty() {
        return Err(Error::InvalidArgument("nothing to translate".into()));
    }
    if input.len() > MAX_INPUT_TOKENS {
        return Err(Error::InvalidArgument(format!("input longer than {MAX_INPUT_TOKENS} tokens")));
    }
    if config.k == 0 || config.beam_size == 0 {
        return Err(Error::InvalidArgument("k and beam size must be positive".into()));
    }
    if !config.weights.is_finite() {
        return Err(Error::InvalidArgument("decoder weights must be finite".into()));
    }
    let n = input.len();
    let w = &config.weights;
    let options = collect_options(input, lookup, config.oov_penalty);
    let option_ids: Vec<Vec<WordId>> =
        options.iter().map(|o| o.target.iter().map(|t| lm.id(t.as_str())).collect()).collect();
    let future = future_costs(n, &options, lm, w);
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };

    let mut stacks: Vec<HashMap<StateKey, Vec<Path<F>>>> = vec![HashMap::new(); n + 1];
    let root = Path {
        cost: F::zero(),
        components: CostComponents::default(),
        output: Vec::new(),
        text: String::new(),
        segments: Vec::new(),
    };
    stacks[0].insert(StateKey { coverage: 0, next: 0, lm_state: vec![lm.bos()] }, vec![root]);

    for covered in 0..n {
        let stack = std::mem::take(&mut stacks[covered]);
        let mut states: Vec<(StateKey, Vec<Path<F>>)> = stack.into_iter().collect();
        states.sort_by_cached_key(|(key, paths)| {
            let score = paths[0].cost + future_of(key.coverage, n, &future);
            (rank_key(score, &paths[0].text), key.clone())
        });
        states.truncate(config.beam_size);

        for (key, paths) in states {
            for (oi, opt) in options.iter().enumerate() {
                let span_mask = ((1u64 << (opt.end - opt.start)) - 1) << opt.start;
                if key.coverage & span_mask != 0 {
                    continue;
                }
                let jump = opt.start.abs_diff(key.next);
                if jump > config.max_distortion {
                    continue;
                }
                let mut history = key.lm_state.clone();
                let lm_part = lm_cost(lm, &mut history, &option_ids[oi]);
                let next_key = StateKey {
                    coverage: key.coverage | span_mask,
                    next: opt.end,
                    lm_state: lm.state_of(&history).to_vec(),
                };
                let target_slot = covered + (opt.end - opt.start);
                for path in &paths {
                    let components = CostComponents {
                        tm: path.components.tm + opt.tm,
                        lm: path.components.lm + lm_part,
                        dist: path.components.dist + F::of_usize(jump),
                        wp: path.components.wp + F::of_usize(opt.target.len()),
                    };
                    let mut output = path.output.clone();
                    output.extend(opt.target.iter().cloned());
                    let mut segments = path.segments.clone();
                    segments.push(oi);
                    let candidate = Path {
                        cost: components.weighted(w),
                        components,
                        text: detokenize_consolidated(&output),
                        output,
                        segments,
                    };
                    let slot = stacks[target_slot].entry(next_key.clone()).or_default();
                    offer(slot, candidate, config.k);
                }
            }
        }
    }

    let mut finals: Vec<Path<F>> = Vec::new();
    let mut finished: Vec<(StateKey, Vec<Path<F>>)> = std::mem::take(&mut stacks[n]).into_iter().collect();
    finished.sort_by(|a, b| a.0.cmp(&b.0));
    for (key, paths) in finished {
        debug_assert_eq!(key.coverage, full);
        let end_cost = -lm.word_logprob(&key.lm_state, lm.eos());
        for mut path in paths {
            path.components.lm += end_cost;
            path.cost = path.components.weighted(w);
            offer(&mut finals, path, usize::MAX);
        }
    }
    finals.truncate(config.k);

    let items = finals
        .into_iter()
        .enumerate()
        .map(|(rank, path)| TranslationHypothesis {
            rank: rank + 1,
            text: path.text,
            tokens: path.output,
            cost: path.cost,
            components: path.components,
            segments: path
                .segments
                .iter()
                .map(|&oi| {
                    let o = &options[oi];
                    Segment { start: o.start, end: o.end, target: o.target.clone(), oov: o.oov }
                })
                .collect(),
        })
        .collect();
    Ok(KBestList { input: input.to_vec(), items })
}

/// Distinct tokens of `input` that no table entry translates on its own.
pub fn unknown_tokens<F: Real>(input: &[Token], lookup: &dyn PhraseLookup<F>) -> BTreeSet<Token> {
    input.iter().filter(|t| lookup.lookup(std::slice::from_ref(*t)).is_empty()).cloned().collect()
}
