//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use menusmt::corpus::{tokenize, Token};
use menusmt::decoder::{collect_options, detokenize_consolidated, rank_key, TranslationOption};
use menusmt::langmodel::train_lm;
use menusmt::phrasetable::{build_one_to_one, merge_tables, PhraseLookup, TableOrigin};
use menusmt::pipeline::BuildManifest;
use menusmt::{DecoderConfig, LanguageModel, LookupSet, PhrasePair, PhraseTable};

pub fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample")
}

/// The bundled sample manifest, writing into `out`.
pub fn sample_manifest(out: &Path) -> BuildManifest {
    let mut m = BuildManifest::load(&sample_dir().join("manifest.json")).expect("sample manifest");
    m.output = out.to_path_buf();
    m
}

pub fn lm_of(lines: &[&str], order: usize) -> LanguageModel {
    let corpus: Vec<Vec<Token>> = lines.iter().map(|l| tokenize(l)).collect();
    train_lm(&corpus, order).expect("lm")
}

/// Trained cortado->sour next to a one-to-one "café cortado".
pub fn cortado_fixture() -> (LookupSet, LanguageModel) {
    let mut trained = PhraseTable::new(TableOrigin::Trained);
    trained.insert_text("cortado", "sour", 1.0);
    trained.insert_text("café", "coffee", 1.0);
    trained.insert_text("yogurt", "yogurt", 1.0);
    trained.insert_text("yogurt cortado", "sour yogurt", 1.0);
    let drinks = vec![PhrasePair::one_to_one("café cortado", "espresso with milk", "drinks").unwrap()];
    let one_to_one = build_one_to_one(&drinks, "drinks").unwrap();
    let lm = lm_of(&["sour yogurt", "espresso with milk", "coffee with milk", "black coffee", "sour milk"], 3);
    (merge_tables(trained, vec![one_to_one]), lm)
}

pub const TOY_SOURCE: [&str; 5] = ["a", "b", "c", "d", "e"];

/// Twenty entries over five source words, with multi-word sources and
/// competing targets.
pub fn toy_table() -> (PhraseTable, LanguageModel) {
    let entries: [(&str, &str, f64); 20] = [
        ("a", "v", 0.7),
        ("a", "w", 0.3),
        ("b", "w", 0.6),
        ("b", "x", 0.4),
        ("c", "x", 1.0),
        ("d", "y", 0.5),
        ("d", "y z", 0.5),
        ("e", "z", 0.8),
        ("e", "v", 0.2),
        ("a b", "v w", 0.9),
        ("a b", "w v", 0.1),
        ("b c", "x x", 0.5),
        ("b c", "w", 0.5),
        ("c d", "y x", 1.0),
        ("d e", "z y", 0.6),
        ("d e", "z", 0.4),
        ("a b c", "v w x", 1.0),
        ("c d e", "x y z", 0.7),
        ("c d e", "z", 0.3),
        ("e a", "w z", 1.0),
    ];
    let mut table = PhraseTable::new(TableOrigin::Trained);
    for (s, t, w) in entries {
        table.insert_text(s, t, w);
    }
    let lm = lm_of(&["v w x", "w v", "x y z", "y x z", "z y", "v w x y z", "w z v"], 3);
    (table, lm)
}

/// Every sequence over `alphabet` of length 1..=max_len.
pub fn all_inputs(alphabet: &[&str], max_len: usize) -> Vec<Vec<Token>> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<Token>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &frontier {
            for a in alphabet {
                let mut seq = prefix.clone();
                seq.push(Token::new(*a).unwrap());
                next.push(seq);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Brute-force k-best: every order of every segmentation within the
/// distortion limit, scored from scratch.
pub fn exhaustive_kbest(
    input: &[Token],
    lookup: &dyn PhraseLookup<f64>,
    lm: &LanguageModel,
    config: &DecoderConfig,
) -> Vec<(String, f64)> {
    let options = collect_options(input, lookup, config.oov_penalty);
    let mut best: BTreeMap<String, f64> = BTreeMap::new();
    let mut chosen: Vec<&TranslationOption<f64>> = Vec::new();
    enumerate(input.len(), config.max_distortion, 0, 0, &options, &mut chosen, &mut |seq| {
        let w = &config.weights;
        let tm: f64 = seq.iter().map(|o| o.tm).sum();
        let mut dist = 0usize;
        let mut next = 0usize;
        for o in seq {
            dist += o.start.abs_diff(next);
            next = o.end;
        }
        let output: Vec<Token> = seq.iter().flat_map(|o| o.target.iter().cloned()).collect();
        let lm_cost = -lm.logprob(&output);
        let cost = w.translation * tm + w.lm * lm_cost + w.distortion * dist as f64 + w.word_penalty * output.len() as f64;
        let text = detokenize_consolidated(&output);
        let entry = best.entry(text).or_insert(f64::INFINITY);
        if cost < *entry {
            *entry = cost;
        }
    });
    let mut ranked: Vec<(String, f64)> = best.into_iter().collect();
    ranked.sort_by_key(|(text, cost)| rank_key(*cost, text));
    ranked.truncate(config.k);
    ranked
}

fn enumerate<'a>(
    n: usize,
    limit: usize,
    coverage: u64,
    next: usize,
    options: &'a [TranslationOption<f64>],
    chosen: &mut Vec<&'a TranslationOption<f64>>,
    visit: &mut dyn FnMut(&[&TranslationOption<f64>]),
) {
    if coverage == (1u64 << n) - 1 {
        visit(chosen);
        return;
    }
    for o in options {
        let mask = ((1u64 << (o.end - o.start)) - 1) << o.start;
        if coverage & mask != 0 || o.start.abs_diff(next) > limit {
            continue;
        }
        chosen.push(o);
        enumerate(n, limit, coverage | mask, o.end, options, chosen, visit);
        chosen.pop();
    }
}
