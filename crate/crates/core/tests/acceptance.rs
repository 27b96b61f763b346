//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use menusmt::alignment::{train_em, viterbi_align};
use menusmt::binary::{open_ondemand, serialize_binary};
use menusmt::consolidation::{auto_consolidate, consolidate_corpus, mark_for_consolidation, split_standardized};
use menusmt::corpus::{corpus_stats, split_phrase, Token};
use menusmt::decoder::{rank_key, translate, translate_tokens};
use menusmt::langmodel::WordId;
use menusmt::menudb::{parse_dsl, DishRecord, IngredientDecl};
use menusmt::phrasetable::{extract_phrases, PhraseLookup};
use menusmt::pipeline::{bench, build, build_in_memory, evaluate, parse_gold, Artifacts, LoadMode};
use menusmt::{parse_corpus, AlignmentModel, CorpusFormat, DecoderConfig, Error, LanguageModel, ParallelCorpus, PhraseTable, Side};

use support::*;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn sample_corpus() -> ParallelCorpus {
    let raw = fs::read_to_string(sample_dir().join("corpus.tsv")).unwrap();
    parse_corpus(&raw, CorpusFormat::Raw).unwrap()
}

fn c1_consolidation() -> Result<String, String> {
    let corpus = sample_corpus();
    ensure(corpus.len() >= 200, format!("sample corpus has only {} pairs", corpus.len()))?;
    let start = Instant::now();
    let split = split_standardized(&corpus);
    let rules = auto_consolidate(&mark_for_consolidation(&split.training), 2, 4).map_err(|e| e.to_string())?;
    let after = consolidate_corpus(&split, &rules, &[]);
    let elapsed = start.elapsed();
    let before = corpus_stats(&split.training, Side::Source, 3).unwrap();
    let now = corpus_stats(&after.training, Side::Source, 3).unwrap();
    let shared = ["a la", "de la", "al horno"]
        .iter()
        .filter(|seq| split.training.pairs.iter().filter(|p| p.source_text().contains(*seq)).count() >= 2)
        .count();
    ensure(shared >= 3, "fewer than 3 shared function-word sequences")?;
    let reduction = 100.0 * (before.words - now.words) as f64 / before.words as f64;
    ensure(reduction >= 5.0, format!("word reduction {reduction:.2}% < 5%"))?;
    ensure(now.distinct(3) < before.distinct(3), "distinct 3-grams did not fall")?;
    let d1 = now.distinct(1) as i64 - before.distinct(1) as i64;
    let d2 = now.distinct(2) as i64 - before.distinct(2) as i64;
    ensure(d1 + d2 >= 0, format!("1/2-gram net change {d1}+{d2} < 0"))?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} rules; words {} -> {} (-{reduction:.2}%); 3-grams {} -> {}; d1={d1} d2={d2}; {:.1} ms",
        rules.len(),
        before.words,
        now.words,
        before.distinct(3),
        now.distinct(3),
        elapsed.as_secs_f64() * 1e3
    ))
}

fn sample_build() -> menusmt::pipeline::BuildOutput {
    let dir = tempfile::tempdir().unwrap();
    build_in_memory(&sample_manifest(dir.path())).unwrap()
}

fn table_from(bytes: &[u8]) -> PhraseTable {
    open_ondemand(bytes.to_vec()).unwrap().load_all().unwrap()
}

fn c2_standardization() -> Result<String, String> {
    let out = sample_build();
    let text = String::from_utf8(out.files["corpus.consolidated.tsv"].clone()).unwrap();
    let training = parse_corpus(&text, CorpusFormat::Consolidated).map_err(|e| e.to_string())?;
    let align: AlignmentModel =
        AlignmentModel::from_text(std::str::from_utf8(&out.files["alignment.txt"]).unwrap()).map_err(|e| e.to_string())?;
    let mut seen: BTreeMap<Vec<Token>, BTreeSet<Vec<Token>>> = BTreeMap::new();
    for pair in &training.pairs {
        for (s, t) in extract_phrases(pair, &viterbi_align(&align, pair), out.manifest.options.max_n) {
            seen.entry(s).or_default().insert(t);
        }
    }
    let table = table_from(&out.files["trained.mlpt"]);
    let mut checked = 0;
    for (source, targets) in &seen {
        if targets.len() != 1 {
            continue;
        }
        let entries = table.targets(source);
        ensure(entries.len() == 1, format!("{source:?} has {} entries", entries.len()))?;
        ensure((entries[0].1 - 1.0).abs() <= 1e-9, format!("{source:?} weight {}", entries[0].1))?;
        checked += 1;
    }
    ensure(checked > 0, "no single-target n-grams found")?;
    Ok(format!("{checked} single-target source n-grams all hold one entry at 1.0"))
}

fn c3_one_to_one() -> Result<String, String> {
    let out = sample_build();
    let mut total = 0;
    for (name, bytes) in out.files.iter().filter(|(n, _)| n.starts_with("one_to_one/")) {
        for entry in table_from(bytes).entries() {
            ensure(entry.weight == 1.0, format!("{name}: weight {}", entry.weight))?;
            total += 1;
        }
    }
    ensure(total > 0, "no one-to-one entries")?;
    Ok(format!("{total} entries, all exactly 1.0"))
}

fn c4_cortado() -> Result<String, String> {
    let (lookup, lm) = cortado_fixture();
    let config = DecoderConfig::default();
    let top = |input: &str| translate(input, &lookup, &lm, &config).unwrap().best().unwrap().text.clone();
    let coffee = top("café cortado");
    let yogurt = top("yogurt cortado");
    ensure(coffee == "espresso with milk", format!("café cortado -> {coffee}"))?;
    ensure(yogurt == "sour yogurt", format!("yogurt cortado -> {yogurt}"))?;
    Ok(format!("café cortado -> {coffee}; yogurt cortado -> {yogurt}"))
}

fn c5_oracle() -> Result<String, String> {
    let (table, lm) = toy_table();
    ensure(table.len() == 20, format!("toy table has {} entries", table.len()))?;
    let config = DecoderConfig { k: 5, beam_size: 50, ..DecoderConfig::default() };
    let start = Instant::now();
    let inputs = all_inputs(&TOY_SOURCE, 4);
    let mut mismatches = 0;
    let mut first = None;
    for input in &inputs {
        let beam = translate_tokens(input, &table, &lm, &config).unwrap();
        let oracle = exhaustive_kbest(input, &table, &lm, &config);
        let got: Vec<(String, i64)> = beam.items.iter().map(|h| (h.text.clone(), rank_key(h.cost, "").0)).collect();
        let want: Vec<(String, i64)> = oracle.iter().map(|(t, c)| (t.clone(), rank_key(*c, "").0)).collect();
        let same = got.len() == want.len()
            && got.iter().zip(&want).all(|(g, w)| g.0 == w.0 && (g.1 - w.1).abs() <= 1);
        if !same {
            mismatches += 1;
            first.get_or_insert_with(|| format!("{input:?}: beam {got:?} vs oracle {want:?}"));
        }
    }
    let elapsed = start.elapsed();
    ensure(mismatches == 0, format!("{mismatches} mismatches; first {}", first.unwrap_or_default()))?;
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("{} inputs, 0 mismatches, {:.2} s", inputs.len(), elapsed.as_secs_f64()))
}

fn c6_em() -> Result<String, String> {
    let split = split_standardized(&sample_corpus());
    let model: AlignmentModel = train_em(&split.training, 10).map_err(|e| e.to_string())?;
    let trace = &model.log_likelihood_trace;
    ensure(trace.len() == 10, format!("{} iterations recorded", trace.len()))?;
    for (i, w) in trace.windows(2).enumerate() {
        ensure(w[1] >= w[0] - 1e-12, format!("log-likelihood fell at step {}: {} -> {}", i + 1, w[0], w[1]))?;
    }
    let toy = ParallelCorpus::new(vec![
        menusmt::PhrasePair::standardized("a b", "x y").unwrap(),
        menusmt::PhrasePair::standardized("a", "x").unwrap(),
    ]);
    let toy_model: AlignmentModel = train_em(&toy, 10).unwrap();
    let p = toy_model.prob(&Token::new("a").unwrap(), &Token::new("x").unwrap());
    ensure(p >= 0.99, format!("t(x|a) = {p}"))?;
    Ok(format!("LL {:.4} -> {:.4} non-decreasing; toy t(x|a) = {p:.6}", trace[0], trace[9]))
}

fn c7_lm() -> Result<String, String> {
    let out = sample_build();
    let lm = LanguageModel::from_arpa(std::str::from_utf8(&out.files["lm.arpa"]).unwrap()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let vocab: Vec<WordId> = lm.predictable().filter(|&w| w != lm.eos()).collect();
    let contexts: Vec<Vec<WordId>> = lm.contexts().map(|c| c.to_vec()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let history: Vec<WordId> = if i % 2 == 0 {
            contexts.choose(&mut rng).unwrap().clone()
        } else {
            let len = rng.random_range(0..lm.order);
            let mut h = vec![lm.bos()];
            h.extend((0..len).map(|_| *vocab.choose(&mut rng).unwrap()));
            h
        };
        let sum: f64 = lm.predictable().map(|w| 10f64.powf(lm.word_logprob(&history, w))).sum();
        worst = worst.max((sum - 1.0).abs());
    }
    ensure(worst <= 1e-9, format!("worst deviation {worst:e}"))?;
    Ok(format!("100 contexts, max |sum-1| = {worst:.2e}"))
}

fn c8_binary() -> Result<String, String> {
    let out = sample_build();
    let bytes = out.files["trained.mlpt"].clone();
    let table = table_from(&bytes);
    let handle = open_ondemand(bytes.clone()).map_err(|e| e.to_string())?;
    let sources: Vec<Vec<Token>> = table.sources().cloned().collect();
    let words: Vec<Token> = sources.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut hits = 0;
    for i in 0..10_000 {
        let query: Vec<Token> = if i % 2 == 0 {
            sources.choose(&mut rng).unwrap().clone()
        } else {
            let len = rng.random_range(1..=3);
            let mut q: Vec<Token> = (0..len).map(|_| words.choose(&mut rng).unwrap().clone()).collect();
            if rng.random_bool(0.1) {
                q.push(Token::new("zzz").unwrap());
            }
            q
        };
        let a = PhraseLookup::<f64>::lookup(&table, &query);
        let b = PhraseLookup::<f64>::lookup(&handle, &query);
        ensure(a == b, format!("lookup {query:?} differs"))?;
        hits += usize::from(!a.is_empty());
    }
    let mut corrupt = bytes.clone();
    let mid = corrupt.len() / 2;
    corrupt[mid] ^= 0x5a;
    ensure(matches!(open_ondemand(corrupt), Err(Error::BinaryFormat(_))), "corrupted body accepted")?;
    let mut bad_crc = bytes;
    let last = bad_crc.len() - 1;
    bad_crc[last] ^= 0x01;
    ensure(matches!(open_ondemand(bad_crc), Err(Error::BinaryFormat(_))), "corrupted checksum accepted")?;
    ensure(serialize_binary(&table).unwrap() == out.files["trained.mlpt"], "reserialization differs")?;
    Ok(format!("10000 lookups identical ({hits} non-empty); corruption rejected"))
}

fn c9_dsl() -> Result<String, String> {
    let block = "#bread with tomato\n-bread\n=toasted bread\n-tomato\n-olive oil\n$oil\n-salt\n-+garlic\n";
    let plain = |name: &str, optional: bool| IngredientDecl {
        name: name.into(),
        optional,
        substitutes: vec![],
        image: name.into(),
    };
    let expected = vec![DishRecord {
        name: "bread with tomato".into(),
        image: "bread with tomato".into(),
        ingredients: vec![
            IngredientDecl { substitutes: vec!["toasted bread".into()], ..plain("bread", false) },
            plain("tomato", false),
            IngredientDecl { image: "oil".into(), ..plain("olive oil", false) },
            plain("salt", false),
            plain("garlic", true),
        ],
    }];
    let parsed = parse_dsl(block).map_err(|e| e.to_string())?;
    ensure(parsed == expected, format!("parsed {parsed:?}"))?;
    match parse_dsl("#bread with tomato\n=toasted bread\n") {
        Err(Error::Dsl { line: 2, message }) => Ok(format!("golden block matches; '=' first -> line 2: {message}")),
        other => Err(format!("'=' before '-' gave {other:?}")),
    }
}

fn c10_timing() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    build(&sample_manifest(dir.path())).map_err(|e| e.to_string())?;
    let inputs = vec!["arroz a la cubana".to_string()];
    let on_demand = bench(dir.path(), LoadMode::OnDemand, &inputs, 100).map_err(|e| e.to_string())?;
    let full = bench(dir.path(), LoadMode::Full, &inputs, 100).map_err(|e| e.to_string())?;
    ensure(on_demand.warm.samples == 100, "expected 100 warm runs")?;
    ensure(on_demand.warm.mean_ms < 50.0, format!("warm mean {:.3} ms", on_demand.warm.mean_ms))?;
    ensure(full.warm.mean_ms < 50.0, format!("full-load warm mean {:.3} ms", full.warm.mean_ms))?;
    ensure(
        on_demand.load.mean_ms < full.load.mean_ms,
        format!("on-demand load {:.3} ms >= full {:.3} ms", on_demand.load.mean_ms, full.load.mean_ms),
    )?;
    Ok(format!(
        "warm mean {:.3} ms (on-demand), {:.3} ms (full); load {:.3} ms vs {:.3} ms",
        on_demand.warm.mean_ms, full.warm.mean_ms, on_demand.load.mean_ms, full.load.mean_ms
    ))
}

fn c11_accuracy() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    build(&sample_manifest(dir.path())).map_err(|e| e.to_string())?;
    let artifacts = Artifacts::load(dir.path(), LoadMode::OnDemand).map_err(|e| e.to_string())?;
    let read = |name: &str| parse_gold(&fs::read_to_string(sample_dir().join(name)).unwrap()).unwrap();
    let one_to_one = read("gold_one_to_one.tsv");
    ensure(one_to_one.len() == 50, format!("fixture has {} pairs", one_to_one.len()))?;
    let corpus = sample_corpus();
    let listed: BTreeSet<(String, String)> =
        corpus.pairs.iter().filter(|p| !p.standardized).map(|p| (p.source_text(), p.target_text())).collect();
    for g in &one_to_one {
        let key = (menusmt::corpus::join_tokens(&split_phrase(&g.source)), g.reference.clone());
        ensure(listed.contains(&key), format!("{} is not a one-to-one entry", g.source))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut random_gold = read("gold_mixed.tsv");
    for pair in corpus.pairs.choose_multiple(&mut rng, 40) {
        let reference = if rng.random_bool(0.5) { pair.target_text() } else { "something else".into() };
        random_gold.push(menusmt::pipeline::GoldPair { source: pair.source_text(), reference });
    }
    let mut lines = Vec::new();
    for (name, gold) in [("one-to-one", &one_to_one), ("mixed", &read("gold_mixed.tsv")), ("random", &random_gold)] {
        let report = evaluate(&artifacts, gold, 5).map_err(|e| e.to_string())?;
        ensure(report.accuracy_at.windows(2).all(|w| w[0] <= w[1]), format!("{name}: not monotone"))?;
        ensure(report.topk_accuracy >= report.top1_accuracy, format!("{name}: top-k < top-1"))?;
        ensure((0.0..=100.0).contains(&report.top1_accuracy), format!("{name}: accuracy out of range"))?;
        lines.push(format!("{name} top-1 {:.1}% top-5 {:.1}%", report.top1_accuracy, report.topk_accuracy));
        if name == "one-to-one" {
            ensure(report.top1_accuracy == 100.0, format!("one-to-one top-1 {:.1}%", report.top1_accuracy))?;
        }
    }
    Ok(lines.join("; "))
}

fn main() {
    let checks: [(u32, &str, Check); 11] = [
        (1, "consolidation direction", c1_consolidation),
        (2, "standardized n-grams score 1.0", c2_standardization),
        (3, "one-to-one weights are 1.0", c3_one_to_one),
        (4, "cortado scenario", c4_cortado),
        (5, "decoder equals exhaustive oracle", c5_oracle),
        (6, "EM likelihood and toy convergence", c6_em),
        (7, "LM normalization", c7_lm),
        (8, "binary table oracle", c8_binary),
        (9, "DSL golden block", c9_dsl),
        (10, "timing envelope", c10_timing),
        (11, "accuracy harness sanity", c11_accuracy),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in checks {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
