//! End-to-end build of an artifact bundle and the measurement harnesses that
//! run over it.
//!
//! Bundle layout, all paths relative to the output directory:
//!
//! ```text
//! manifest.json               resolved manifest with sha256 of every file below
//! corpus.consolidated.tsv
//! rules.tsv                   manual rules followed by automatic ones
//! alignment.txt
//! trained.mlpt
//! one_to_one/NNN.mlpt         one table per topic, topic stored inside
//! lm.arpa
//! stats.json
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alignment::{train_em, viterbi_align, DEFAULT_EM_ITERATIONS};
use crate::binary::{open_file, serialize_binary};
use crate::consolidation::{
    apply_rules, auto_consolidate, consolidate_corpus, mark_for_consolidation, parse_rules, rules_for,
    serialize_rules, split_standardized, ConsolidationRule, DEFAULT_MAX_LEN, DEFAULT_MIN_SUPPORT,
};
use crate::corpus::{corpus_stats, parse_corpus, serialize_corpus, CorpusFormat, NgramStats, ParallelCorpus, PhrasePair, Side, Token};
use crate::decoder::{translate, DEFAULT_BEAM, DEFAULT_K, DEFAULT_MAX_DISTORTION, DEFAULT_OOV_PENALTY};
use crate::error::{Error, Result};
use crate::langmodel::{train_lm, DEFAULT_ORDER};
use crate::phrasetable::{
    build_one_to_one, extract_phrases, score_table, PhraseLookup, PhraseTable, TableOrigin, DEFAULT_MAX_N,
};
use crate::{DecoderConfig, DecoderWeights, KBestList, LanguageModel, LookupSet};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const STATS_FILE: &str = "stats.json";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightOptions {
    pub tm: f64,
    pub lm: f64,
    pub dist: f64,
    pub wp: f64,
}

impl Default for WeightOptions {
    fn default() -> Self {
        let w = DecoderWeights::default();
        WeightOptions { tm: w.translation, lm: w.lm, dist: w.distortion, wp: w.word_penalty }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildOptions {
    pub max_n: usize,
    pub k: usize,
    pub em_iterations: usize,
    pub lm_order: usize,
    pub weights: WeightOptions,
    pub beam_size: usize,
    pub max_distortion: usize,
    pub oov_penalty: f64,
    /// Learn source rules from the corpus in addition to the rule files.
    pub auto_consolidate: bool,
    pub min_support: usize,
    pub max_rule_len: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_n: DEFAULT_MAX_N,
            k: DEFAULT_K,
            em_iterations: DEFAULT_EM_ITERATIONS,
            lm_order: DEFAULT_ORDER,
            weights: WeightOptions::default(),
            beam_size: DEFAULT_BEAM,
            max_distortion: DEFAULT_MAX_DISTORTION,
            oov_penalty: DEFAULT_OOV_PENALTY,
            auto_consolidate: false,
            min_support: DEFAULT_MIN_SUPPORT,
            max_rule_len: DEFAULT_MAX_LEN,
        }
    }
}

impl BuildOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if self.max_n == 0 {
            return bad("max_n must be at least 1");
        }
        if self.k == 0 || self.beam_size == 0 {
            return bad("k and beam_size must be at least 1");
        }
        if self.lm_order == 0 {
            return bad("lm_order must be at least 1");
        }
        let w = self.weights;
        if ![w.tm, w.lm, w.dist, w.wp, self.oov_penalty].iter().all(|x| x.is_finite()) {
            return bad("weights must be finite");
        }
        Ok(())
    }

    pub fn decoder_config(&self, source_rules: &[ConsolidationRule]) -> DecoderConfig {
        DecoderConfig {
            weights: DecoderWeights {
                translation: self.weights.tm,
                lm: self.weights.lm,
                distortion: self.weights.dist,
                word_penalty: self.weights.wp,
            },
            k: self.k,
            beam_size: self.beam_size,
            max_distortion: self.max_distortion,
            oov_penalty: self.oov_penalty,
            pre_rules: (!source_rules.is_empty()).then(|| source_rules.to_vec()),
        }
    }
}

/// Build configuration; the JSON form doubles as the CLI config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildManifest {
    pub corpus: PathBuf,
    #[serde(default)]
    pub rules: Vec<PathBuf>,
    #[serde(default)]
    pub options: BuildOptions,
    pub output: PathBuf,
    /// sha256 per bundle file; filled in by [`build`].
    #[serde(default)]
    pub hashes: BTreeMap<String, String>,
}

impl BuildManifest {
    pub fn new(corpus: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        BuildManifest {
            corpus: corpus.into(),
            rules: Vec::new(),
            options: BuildOptions::default(),
            output: output.into(),
            hashes: BTreeMap::new(),
        }
    }

    /// Reads a manifest; relative paths are taken from the manifest's folder.
    pub fn load(path: &Path) -> Result<Self> {
        let mut manifest: BuildManifest = serde_json::from_str(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &Path| if p.is_relative() { base.join(p) } else { p.to_path_buf() };
        manifest.corpus = resolve(&manifest.corpus);
        manifest.rules = manifest.rules.iter().map(|r| resolve(r)).collect();
        manifest.output = resolve(&manifest.output);
        Ok(manifest)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub training_pairs: usize,
    pub one_to_one_pairs: usize,
    pub source_before: NgramStats,
    pub source_after: NgramStats,
    pub target_before: NgramStats,
    pub target_after: NgramStats,
    pub manual_rules: usize,
    pub auto_rules: usize,
    pub trained_entries: usize,
    pub one_to_one_entries: BTreeMap<String, usize>,
}

impl BuildStats {
    pub fn word_reduction_percent(&self) -> f64 {
        if self.source_before.words == 0 {
            return 0.0;
        }
        100.0 * (self.source_before.words as f64 - self.source_after.words as f64) / self.source_before.words as f64
    }
}

/// Everything a build produced, in memory.
#[derive(Clone, Debug)]
pub struct BuildOutput {
    pub manifest: BuildManifest,
    pub stats: BuildStats,
    pub files: BTreeMap<String, Vec<u8>>,
}

fn stage<T>(name: &'static str, result: Result<T>) -> Result<T> {
    result.map_err(|e| e.in_stage(name))
}

fn consolidated_pair(pair: &PhrasePair, source_rules: &[ConsolidationRule], target_rules: &[ConsolidationRule]) -> PhrasePair {
    PhrasePair {
        source: apply_rules(&pair.source, source_rules),
        target: apply_rules(&pair.target, target_rules),
        standardized: pair.standardized,
        topic: pair.topic.clone(),
    }
}

/// Manual rules from the rule files followed by learned ones, renumbered in
/// application order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub manual: Vec<ConsolidationRule>,
    pub auto: Vec<ConsolidationRule>,
    pub rules: Vec<ConsolidationRule>,
}

pub fn gather_rules(manifest: &BuildManifest, training: &ParallelCorpus) -> Result<RuleSet> {
    let opts = &manifest.options;
    let mut manual = Vec::new();
    for path in &manifest.rules {
        let text = stage("rules", fs::read_to_string(path).map_err(Error::from))?;
        manual.extend(stage("rules", parse_rules(&text))?);
    }
    let auto = if opts.auto_consolidate {
        let marked = mark_for_consolidation(training);
        stage("consolidate", auto_consolidate(&marked, opts.min_support, opts.max_rule_len))?
    } else {
        Vec::new()
    };
    let rules = manual
        .iter()
        .chain(&auto)
        .cloned()
        .enumerate()
        .map(|(i, mut r)| {
            r.order_index = i;
            r
        })
        .collect();
    Ok(RuleSet { manual, auto, rules })
}

/// Runs every stage in memory. Nothing touches the output directory.
pub fn build_in_memory(manifest: &BuildManifest) -> Result<BuildOutput> {
    let opts = &manifest.options;
    stage("manifest", opts.validate())?;
    let raw = stage("corpus", fs::read_to_string(&manifest.corpus).map_err(Error::from))?;
    let corpus = stage("corpus", parse_corpus(&raw, CorpusFormat::Raw))?;

    let split = split_standardized(&corpus);
    if split.training.is_empty() {
        return Err(Error::EmptyCorpus.in_stage("split"));
    }

    let RuleSet { manual, auto, rules } = gather_rules(manifest, &split.training)?;
    let source_rules = rules_for(&rules, Side::Source);
    let target_rules = rules_for(&rules, Side::Target);
    let consolidated = consolidate_corpus(&split, &source_rules, &target_rules);
    let training = &consolidated.training;

    let align = stage("align", train_em::<f64>(training, opts.em_iterations))?;
    let mut extracted = Vec::new();
    for pair in &training.pairs {
        let links = viterbi_align(&align, pair);
        extracted.extend(extract_phrases(pair, &links, opts.max_n));
    }
    let mut trained: PhraseTable<f64> = stage("score", score_table(&extracted))?;
    trained.max_n = opts.max_n;

    let mut files = BTreeMap::new();
    let mut one_to_one_entries = BTreeMap::new();
    let mut lm_corpus: Vec<Vec<Token>> = training.pairs.iter().map(|p| p.target.clone()).collect();
    for (i, (topic, pairs)) in split.one_to_one.iter().enumerate() {
        let keyed: Vec<PhrasePair> = pairs.iter().map(|p| consolidated_pair(p, &source_rules, &target_rules)).collect();
        lm_corpus.extend(keyed.iter().map(|p| p.target.clone()));
        let table: PhraseTable<f64> = stage("one_to_one", build_one_to_one(&keyed, topic))?;
        one_to_one_entries.insert(topic.clone(), table.len());
        files.insert(format!("one_to_one/{i:03}.mlpt"), stage("binary", serialize_binary(&table))?);
    }
    let lm: LanguageModel = stage("lm", train_lm(&lm_corpus, opts.lm_order))?;

    let stats = BuildStats {
        training_pairs: split.training.len(),
        one_to_one_pairs: split.one_to_one_len(),
        source_before: corpus_stats(&split.training, Side::Source, 3)?,
        source_after: corpus_stats(training, Side::Source, 3)?,
        target_before: corpus_stats(&split.training, Side::Target, 3)?,
        target_after: corpus_stats(training, Side::Target, 3)?,
        manual_rules: manual.len(),
        auto_rules: auto.len(),
        trained_entries: trained.len(),
        one_to_one_entries,
    };

    files.insert("corpus.consolidated.tsv".into(), serialize_corpus(training).into_bytes());
    files.insert("rules.tsv".into(), serialize_rules(&rules).into_bytes());
    files.insert("alignment.txt".into(), align.to_text().into_bytes());
    files.insert("trained.mlpt".into(), stage("binary", serialize_binary(&trained))?);
    files.insert("lm.arpa".into(), lm.to_arpa().into_bytes());
    files.insert(STATS_FILE.into(), serde_json::to_vec_pretty(&stats)?);

    let mut resolved = manifest.clone();
    resolved.hashes = files.iter().map(|(name, bytes)| (name.clone(), sha256_hex(bytes))).collect();
    Ok(BuildOutput { manifest: resolved, stats, files })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Builds and writes the bundle to `manifest.output`.
pub fn build(manifest: &BuildManifest) -> Result<BuildOutput> {
    let out = build_in_memory(manifest)?;
    let dir = &manifest.output;
    let write = |name: &str, bytes: &[u8]| -> Result<()> {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, bytes)?;
        Ok(())
    };
    let stale = dir.join("one_to_one");
    if stale.is_dir() {
        stage("write", fs::remove_dir_all(&stale).map_err(Error::from))?;
    }
    for (name, bytes) in &out.files {
        stage("write", write(name, bytes))?;
    }
    stage("write", write(MANIFEST_FILE, &serde_json::to_vec_pretty(&out.manifest)?))?;
    Ok(out)
}

/// Checks every file listed in the bundle manifest against its hash.
pub fn verify_bundle(dir: &Path) -> Result<BuildManifest> {
    let manifest: BuildManifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    if manifest.hashes.is_empty() {
        return Err(Error::Store("bundle manifest lists no files".into()));
    }
    for (name, expected) in &manifest.hashes {
        let actual = sha256_hex(&fs::read(dir.join(name))?);
        if &actual != expected {
            return Err(Error::Store(format!("checksum mismatch for {name}")));
        }
    }
    Ok(manifest)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadMode {
    /// Tables stay on disk and are read per lookup.
    OnDemand,
    /// Tables are parsed into memory.
    Full,
}

impl std::str::FromStr for LoadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on-demand" | "ondemand" => Ok(LoadMode::OnDemand),
            "full" => Ok(LoadMode::Full),
            other => Err(Error::InvalidArgument(format!("unknown load mode '{other}'"))),
        }
    }
}

/// A loaded bundle ready to translate. Immutable and shareable across threads.
pub struct Artifacts {
    pub dir: PathBuf,
    pub manifest: BuildManifest,
    pub mode: LoadMode,
    pub lookup: LookupSet,
    pub lm: LanguageModel,
    pub config: DecoderConfig,
}

impl std::fmt::Debug for Artifacts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Artifacts").field("dir", &self.dir).field("mode", &self.mode).finish()
    }
}

fn table_files(manifest: &BuildManifest) -> impl Iterator<Item = &String> {
    manifest.hashes.keys().filter(|name| name.ends_with(".mlpt"))
}

impl Artifacts {
    /// Opens a bundle. Binary tables are CRC-checked; use [`verify_bundle`]
    /// for the full sha256 pass.
    pub fn load(dir: &Path, mode: LoadMode) -> Result<Self> {
        let manifest: BuildManifest =
            stage("load", serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?).map_err(Error::from))?;
        let mut lookup = LookupSet::new();
        // trained.mlpt sorts after the one_to_one/ files; keep it first.
        let mut names: Vec<&String> = table_files(&manifest).collect();
        names.sort_by_key(|n| (n.as_str() != "trained.mlpt", n.as_str()));
        for name in names {
            let handle = stage("load", open_file(&dir.join(name)))?;
            let table: Arc<dyn PhraseLookup<f64>> = match mode {
                LoadMode::OnDemand => Arc::new(handle),
                LoadMode::Full => Arc::new(stage("load", handle.load_all::<f64>())?),
            };
            lookup.push(table);
        }
        let lm = stage("load", LanguageModel::from_arpa(&fs::read_to_string(dir.join("lm.arpa"))?))?;
        let rules = stage("load", parse_rules(&fs::read_to_string(dir.join("rules.tsv"))?))?;
        let config = manifest.options.decoder_config(&rules_for(&rules, Side::Source));
        Ok(Artifacts { dir: dir.to_path_buf(), manifest, mode, lookup, lm, config })
    }

    pub fn stats(&self) -> Result<BuildStats> {
        Ok(serde_json::from_str(&fs::read_to_string(self.dir.join(STATS_FILE))?)?)
    }

    pub fn translate(&self, text: &str, k: Option<usize>) -> Result<KBestList> {
        match k {
            Some(k) if k != self.config.k => {
                if k == 0 {
                    return Err(Error::InvalidArgument("k must be at least 1".into()));
                }
                let config = DecoderConfig { k, ..self.config.clone() };
                translate(text, &self.lookup, &self.lm, &config)
            }
            _ => translate(text, &self.lookup, &self.lm, &self.config),
        }
    }
}

/// Source phrase with its reference translation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldPair {
    pub source: String,
    pub reference: String,
}

/// `source<TAB>reference` lines; blank and `#` lines are skipped.
pub fn parse_gold(text: &str) -> Result<Vec<GoldPair>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next()) {
            (Some(s), Some(r)) if !s.trim().is_empty() && !r.trim().is_empty() => {
                out.push(GoldPair { source: s.trim().to_string(), reference: r.trim().to_string() })
            }
            _ => return Err(Error::parse(i + 1, "expected source<TAB>reference")),
        }
    }
    Ok(out)
}

fn fold(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub gold_size: usize,
    pub k: usize,
    pub top1_correct: usize,
    pub topk_correct: usize,
    /// Percent.
    pub top1_accuracy: f64,
    pub topk_accuracy: f64,
    /// Accuracy when the reference may appear within the first `i+1` outputs.
    pub accuracy_at: Vec<f64>,
    pub stats: Option<BuildStats>,
    pub table_entries: BTreeMap<String, u64>,
    pub load_ms: f64,
    pub mean_translation_ms: f64,
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "gold pairs: {}\ntop-1: {}/{} ({:.2}%)\ntop-{}: {}/{} ({:.2}%)\nload: {:.2} ms\nmean translation: {:.3} ms\n",
            self.gold_size,
            self.top1_correct,
            self.gold_size,
            self.top1_accuracy,
            self.k,
            self.topk_correct,
            self.gold_size,
            self.topk_accuracy,
            self.load_ms,
            self.mean_translation_ms,
        );
        for (name, n) in &self.table_entries {
            out.push_str(&format!("table {name}: {n} entries\n"));
        }
        if let Some(stats) = &self.stats {
            out.push_str(&format!(
                "source words {} -> {} ({:.2}% fewer), distinct 3-grams {} -> {}\n",
                stats.source_before.words,
                stats.source_after.words,
                stats.word_reduction_percent(),
                stats.source_before.distinct(3),
                stats.source_after.distinct(3),
            ));
        }
        out
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Position of the reference in the k-best list, if present.
fn reference_rank(list: &KBestList, reference: &str) -> Option<usize> {
    let want = fold(reference);
    list.items.iter().position(|h| fold(&h.text) == want)
}

/// Translates every gold source (in parallel) and scores exact matches.
pub fn evaluate(artifacts: &Artifacts, gold: &[GoldPair], k: usize) -> Result<EvalReport> {
    if gold.is_empty() {
        return Err(Error::InvalidArgument("gold set is empty".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(gold.len());
    let chunk = gold.len().div_ceil(workers);
    let results: Vec<Result<(Option<usize>, Duration)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = gold
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|g| {
                            let start = Instant::now();
                            let list = artifacts.translate(&g.source, Some(k))?;
                            Ok((reference_rank(&list, &g.reference), start.elapsed()))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("evaluation worker panicked")).collect()
    });
    let mut ranks = Vec::with_capacity(gold.len());
    let mut total = Duration::ZERO;
    for r in results {
        let (rank, elapsed) = r?;
        ranks.push(rank);
        total += elapsed;
    }
    let n = gold.len() as f64;
    let accuracy_at: Vec<f64> =
        (0..k).map(|i| 100.0 * ranks.iter().filter(|r| r.is_some_and(|r| r <= i)).count() as f64 / n).collect();
    let top1_correct = ranks.iter().filter(|r| **r == Some(0)).count();
    let topk_correct = ranks.iter().filter(|r| r.is_some()).count();

    let load_start = Instant::now();
    let mut table_entries = BTreeMap::new();
    for name in table_files(&artifacts.manifest) {
        table_entries.insert(name.clone(), open_file(&artifacts.dir.join(name))?.entry_count());
    }
    let load_ms = ms(load_start.elapsed());

    Ok(EvalReport {
        gold_size: gold.len(),
        k,
        top1_correct,
        topk_correct,
        top1_accuracy: 100.0 * top1_correct as f64 / n,
        topk_accuracy: 100.0 * topk_correct as f64 / n,
        accuracy_at,
        stats: artifacts.stats().ok(),
        table_entries,
        load_ms,
        mean_translation_ms: ms(total) / n,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub samples: usize,
    pub mean_ms: f64,
    pub max_ms: f64,
}

impl Timing {
    pub fn from_samples(samples: &[Duration]) -> Self {
        if samples.is_empty() {
            return Timing::default();
        }
        let values: Vec<f64> = samples.iter().map(|d| ms(*d)).collect();
        Timing {
            samples: values.len(),
            mean_ms: values.iter().sum::<f64>() / values.len() as f64,
            max_ms: values.iter().copied().fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub mode: LoadMode,
    pub load: Timing,
    pub first: Timing,
    pub warm: Timing,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let line = |name: &str, t: &Timing| {
            format!("{name:<6} mean {:>9.3} ms  max {:>9.3} ms  ({} samples)\n", t.mean_ms, t.max_ms, t.samples)
        };
        format!("mode: {:?}\n{}{}{}", self.mode, line("load", &self.load), line("first", &self.first), line("warm", &self.warm))
    }
}

/// Loads the bundle `repetitions` times, timing the load and the first
/// translation after each; then times `repetitions` warm passes over the
/// inputs on the last handle.
pub fn bench(dir: &Path, mode: LoadMode, inputs: &[String], repetitions: usize) -> Result<BenchReport> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
    }
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("no bench inputs".into()));
    }
    let mut load = Vec::new();
    let mut first = Vec::new();
    let mut last = None;
    for _ in 0..repetitions {
        let start = Instant::now();
        let artifacts = Artifacts::load(dir, mode)?;
        load.push(start.elapsed());
        let start = Instant::now();
        artifacts.translate(&inputs[0], None)?;
        first.push(start.elapsed());
        last = Some(artifacts);
    }
    let artifacts = last.expect("at least one repetition");
    let mut warm = Vec::new();
    for _ in 0..repetitions {
        for input in inputs {
            let start = Instant::now();
            artifacts.translate(input, None)?;
            warm.push(start.elapsed());
        }
    }
    Ok(BenchReport {
        mode,
        load: Timing::from_samples(&load),
        first: Timing::from_samples(&first),
        warm: Timing::from_samples(&warm),
    })
}

/// Parses a full-load table from disk; used by tooling that edits tables.
pub fn load_table(path: &Path) -> Result<PhraseTable<f64>> {
    open_file(path)?.load_all()
}

/// Trained and one-to-one table origins in a bundle, for reporting.
pub fn table_origins(dir: &Path) -> Result<Vec<(String, TableOrigin)>> {
    let manifest = verify_bundle(dir)?;
    table_files(&manifest)
        .map(|name| Ok((name.clone(), open_file(&dir.join(name))?.origin.clone())))
        .collect()
}
