//! `menusmt` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use menusmt::consolidation::{consolidate_corpus, rules_for, serialize_rules, split_standardized};
use menusmt::corpus::{corpus_stats, NgramStats};
use menusmt::menudb::{
    add_conditions, default_templates, dialog_templates, flag_dish, get_profile, load_templates, lookup_dish,
    lookup_ingredient, parse_dsl, populate_store, set_profile, summary, ConditionSpec, ImageSource, JsonFileBackend,
    LanguagePair, StoreBackend,
};
use menusmt::pipeline::{
    bench, build, evaluate, gather_rules, parse_gold, verify_bundle, Artifacts, BuildManifest, LoadMode,
};
use menusmt::{parse_corpus, serialize_corpus, CorpusFormat, Error, ParallelCorpus, Side};
use menusmt_service::ServiceConfig;

#[derive(Parser)]
#[command(name = "menusmt", version, about = "Phrase-based menu translation and dish lookup")]
struct Cli {
    /// Print the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Word and n-gram counts before and after consolidation.
    Stats {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
    },
    /// Write the consolidated training corpus and the rules that produced it.
    Consolidate {
        #[command(flatten)]
        build: BuildArgs,
        /// Consolidated corpus; stdout when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        rules_out: Option<PathBuf>,
    },
    /// Separate standardized pairs from the per-topic one-to-one sets.
    Split {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Build an artifact bundle.
    Train {
        #[command(flatten)]
        build: BuildArgs,
    },
    /// Translate phrases given as arguments, or one per stdin line.
    Translate {
        #[command(flatten)]
        bundle: BundleArgs,
        #[arg(long)]
        k: Option<usize>,
        /// Check bundle hashes before loading.
        #[arg(long)]
        verify: bool,
        text: Vec<String>,
    },
    /// Top-1 and top-k exact-match accuracy on a gold file.
    Evaluate {
        #[command(flatten)]
        bundle: BundleArgs,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Time bundle loading and translation.
    Bench {
        #[command(flatten)]
        bundle: BundleArgs,
        /// One input phrase per line.
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long, default_value_t = 20)]
        repetitions: usize,
    },
    /// Dish and ingredient store.
    #[command(subcommand)]
    Db(DbCommand),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

/// Mirrors the build manifest; flags override values read from `--config`.
#[derive(Args, Default)]
struct BuildArgs {
    /// Build manifest (JSON).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Rule file; repeat to add more, applied in the given order.
    #[arg(long = "rules", value_name = "FILE")]
    rules: Vec<PathBuf>,
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    em_iterations: Option<usize>,
    #[arg(long)]
    lm_order: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    w_tm: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    w_lm: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    w_dist: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    w_wp: Option<f64>,
    #[arg(long)]
    beam_size: Option<usize>,
    #[arg(long)]
    max_distortion: Option<usize>,
    #[arg(long)]
    oov_penalty: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    auto_consolidate: Option<bool>,
    #[arg(long)]
    min_support: Option<usize>,
    #[arg(long)]
    max_rule_len: Option<usize>,
}

#[derive(Args)]
struct BundleArgs {
    #[arg(long, value_name = "DIR")]
    bundle: PathBuf,
    #[arg(long, default_value = "on-demand")]
    mode: LoadMode,
}

#[derive(Subcommand)]
enum DbCommand {
    /// Import dishes from DSL files and conditions from JSON.
    Import {
        #[arg(long, value_name = "FILE")]
        store: PathBuf,
        #[arg(long = "dsl", value_name = "FILE")]
        dsl: Vec<PathBuf>,
        /// Folder with `<name>.png|jpg|gif` images.
        #[arg(long, value_name = "DIR")]
        images: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        conditions: Option<PathBuf>,
    },
    /// Look up a dish or an ingredient.
    Query {
        #[arg(long, value_name = "FILE")]
        store: PathBuf,
        #[arg(long, conflicts_with = "ingredient", required_unless_present = "ingredient")]
        dish: Option<String>,
        #[arg(long)]
        ingredient: Option<String>,
    },
    /// Flag a dish for a diet profile, creating the profile when no id is given.
    Flag {
        #[arg(long, value_name = "FILE")]
        store: PathBuf,
        #[arg(long)]
        dish: String,
        #[arg(long, conflicts_with_all = ["condition", "avoid"])]
        profile: Option<u32>,
        #[arg(long = "condition")]
        condition: Vec<String>,
        /// Ingredient to avoid regardless of conditions.
        #[arg(long = "avoid")]
        avoid: Vec<String>,
        /// Include the waiter questions.
        #[arg(long)]
        dialog: bool,
        #[arg(long, value_name = "FILE")]
        templates: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ServeArgs {
    /// Service config (JSON).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    bind: Option<SocketAddr>,
    #[arg(long, value_name = "DIR")]
    bundle: Option<PathBuf>,
    #[arg(long)]
    mode: Option<LoadMode>,
    #[arg(long, value_name = "FILE")]
    store: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// Allowed browser origin; repeatable.
    #[arg(long = "cors")]
    cors: Vec<String>,
    #[arg(long, value_name = "FILE")]
    templates: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) => f.write_str(m),
        }
    }
}

fn is_usage(e: &Error) -> bool {
    match e {
        Error::Stage { source, .. } => is_usage(source),
        Error::InvalidArgument(_) => true,
        _ => false,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if is_usage(&e) {
            Failure::Usage(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult<T> = Result<T, Failure>;

struct Report {
    json: Value,
    text: String,
}

fn read(path: &Path) -> CmdResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CmdResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

impl BuildArgs {
    fn manifest(&self) -> CmdResult<BuildManifest> {
        let mut m = match &self.config {
            Some(path) => BuildManifest::load(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?,
            None => {
                let corpus = self.corpus.clone().ok_or_else(|| Failure::Usage("--corpus or --config is required".into()))?;
                BuildManifest::new(corpus, PathBuf::new())
            }
        };
        if let Some(c) = &self.corpus {
            m.corpus = c.clone();
        }
        if !self.rules.is_empty() {
            m.rules = self.rules.clone();
        }
        if let Some(o) = &self.output {
            m.output = o.clone();
        }
        let o = &mut m.options;
        let set = |dst: &mut usize, src: Option<usize>| src.into_iter().for_each(|v| *dst = v);
        set(&mut o.max_n, self.max_n);
        set(&mut o.k, self.k);
        set(&mut o.em_iterations, self.em_iterations);
        set(&mut o.lm_order, self.lm_order);
        set(&mut o.beam_size, self.beam_size);
        set(&mut o.max_distortion, self.max_distortion);
        set(&mut o.min_support, self.min_support);
        set(&mut o.max_rule_len, self.max_rule_len);
        let setf = |dst: &mut f64, src: Option<f64>| src.into_iter().for_each(|v| *dst = v);
        setf(&mut o.weights.tm, self.w_tm);
        setf(&mut o.weights.lm, self.w_lm);
        setf(&mut o.weights.dist, self.w_dist);
        setf(&mut o.weights.wp, self.w_wp);
        setf(&mut o.oov_penalty, self.oov_penalty);
        if let Some(a) = self.auto_consolidate {
            o.auto_consolidate = a;
        }
        m.options.validate()?;
        Ok(m)
    }
}

fn load_corpus(path: &Path) -> CmdResult<ParallelCorpus> {
    parse_corpus(&read(path)?, CorpusFormat::Raw).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn stats_line(out: &mut String, label: &str, s: &NgramStats) {
    let grams: Vec<String> = s.ngrams.iter().map(|(n, c)| format!("{n}-grams {c}")).collect();
    let _ = writeln!(out, "  {label:<16} lines {:>5}  words {:>6}  {}", s.lines, s.words, grams.join("  "));
}

fn cmd_stats(args: &BuildArgs, nmax: usize) -> CmdResult<Report> {
    let manifest = args.manifest()?;
    let split = split_standardized(&load_corpus(&manifest.corpus)?);
    let set = gather_rules(&manifest, &split.training)?;
    let after = consolidate_corpus(&split, &rules_for(&set.rules, Side::Source), &rules_for(&set.rules, Side::Target));

    let mut json = json!({
        "training_pairs": split.training.len(),
        "one_to_one_pairs": split.one_to_one_len(),
        "topics": split.one_to_one.iter().map(|(t, p)| (t.clone(), p.len())).collect::<BTreeMap<_, _>>(),
        "manual_rules": set.manual.len(),
        "auto_rules": set.auto.len(),
    });
    let mut text = format!(
        "training pairs: {}\none-to-one pairs: {}\nrules: {} manual, {} learned\n",
        split.training.len(),
        split.one_to_one_len(),
        set.manual.len(),
        set.auto.len()
    );
    for side in [Side::Source, Side::Target] {
        let before = corpus_stats(&split.training, side, nmax)?;
        let now = corpus_stats(&after.training, side, nmax)?;
        let _ = writeln!(text, "{side}:");
        stats_line(&mut text, "before", &before);
        stats_line(&mut text, "consolidated", &now);
        json[side.to_string()] = json!({ "before": before, "after": now });
    }
    Ok(Report { json, text })
}

fn cmd_consolidate(args: &BuildArgs, out: Option<&Path>, rules_out: Option<&Path>) -> CmdResult<Report> {
    let manifest = args.manifest()?;
    let split = split_standardized(&load_corpus(&manifest.corpus)?);
    let set = gather_rules(&manifest, &split.training)?;
    let after = consolidate_corpus(&split, &rules_for(&set.rules, Side::Source), &rules_for(&set.rules, Side::Target));
    let corpus_text = serialize_corpus(&after.training);
    if let Some(path) = rules_out {
        write(path, &serialize_rules(&set.rules))?;
    }
    let json = json!({
        "pairs": after.training.len(),
        "rules": set.rules.len(),
        "output": out.map(|p| p.display().to_string()),
        "rules_output": rules_out.map(|p| p.display().to_string()),
    });
    let text = match out {
        Some(path) => {
            write(path, &corpus_text)?;
            format!("wrote {} pairs to {} using {} rules\n", after.training.len(), path.display(), set.rules.len())
        }
        None => corpus_text,
    };
    Ok(Report { json, text })
}

fn file_stem(topic: &str) -> String {
    topic.chars().map(|c| if c.is_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn cmd_split(corpus: &Path, out_dir: &Path) -> CmdResult<Report> {
    let split = split_standardized(&load_corpus(corpus)?);
    let training = out_dir.join("training.tsv");
    write(&training, &serialize_corpus(&split.training))?;
    let mut files = BTreeMap::new();
    let mut text = format!("training: {} pairs -> {}\n", split.training.len(), training.display());
    for (topic, pairs) in &split.one_to_one {
        let path = out_dir.join("one_to_one").join(format!("{}.tsv", file_stem(topic)));
        write(&path, &serialize_corpus(&ParallelCorpus::new(pairs.clone())))?;
        let _ = writeln!(text, "one-to-one '{topic}': {} pairs -> {}", pairs.len(), path.display());
        files.insert(topic.clone(), json!({ "pairs": pairs.len(), "file": path.display().to_string() }));
    }
    let json = json!({
        "training": { "pairs": split.training.len(), "file": training.display().to_string() },
        "one_to_one": files,
    });
    Ok(Report { json, text })
}

fn cmd_train(args: &BuildArgs) -> CmdResult<Report> {
    let manifest = args.manifest()?;
    if manifest.output.as_os_str().is_empty() {
        return Err(Failure::Usage("--output or a manifest 'output' is required".into()));
    }
    let out = build(&manifest)?;
    let s = &out.stats;
    let mut text = format!(
        "bundle: {}\ntraining pairs: {}\none-to-one pairs: {}\nrules: {} manual, {} learned\n\
         source words: {} -> {} ({:.2}% fewer)\ntrained entries: {}\n",
        manifest.output.display(),
        s.training_pairs,
        s.one_to_one_pairs,
        s.manual_rules,
        s.auto_rules,
        s.source_before.words,
        s.source_after.words,
        s.word_reduction_percent(),
        s.trained_entries,
    );
    for (topic, n) in &s.one_to_one_entries {
        let _ = writeln!(text, "one-to-one '{topic}': {n} entries");
    }
    let json = json!({
        "output": manifest.output.display().to_string(),
        "stats": s,
        "word_reduction_percent": s.word_reduction_percent(),
        "hashes": out.manifest.hashes,
    });
    Ok(Report { json, text })
}

fn load_bundle(args: &BundleArgs) -> CmdResult<Artifacts> {
    Artifacts::load(&args.bundle, args.mode).map_err(|e| Failure::Data(format!("{}: {e}", args.bundle.display())))
}

fn cmd_translate(args: &BundleArgs, k: Option<usize>, verify: bool, inputs: &[String]) -> CmdResult<Report> {
    if verify {
        verify_bundle(&args.bundle)?;
    }
    let artifacts = load_bundle(args)?;
    let inputs: Vec<String> = if inputs.is_empty() {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf)?;
        buf.lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect()
    } else {
        inputs.to_vec()
    };
    let mut results = Vec::new();
    let mut text = String::new();
    for input in &inputs {
        let list = artifacts.translate(input, k)?;
        let oov: Vec<String> = match list.best() {
            Some(best) => best.oov_tokens(&list.input).iter().map(|t| t.as_str().to_string()).collect(),
            None => Vec::new(),
        };
        let _ = writeln!(text, "{input}");
        for h in &list.items {
            let _ = writeln!(text, "  {}. {}  ({:.4})", h.rank, h.text, h.cost);
        }
        if !oov.is_empty() {
            let _ = writeln!(text, "  untranslated: {}", oov.join(", "));
        }
        results.push(json!({ "input": input, "kbest": list.to_json(), "oov": oov }));
    }
    Ok(Report { json: Value::Array(results), text })
}

fn cmd_evaluate(args: &BundleArgs, gold: &Path, k: usize) -> CmdResult<Report> {
    let artifacts = load_bundle(args)?;
    let gold = parse_gold(&read(gold)?).map_err(|e| Failure::Data(format!("{}: {e}", gold.display())))?;
    let report = evaluate(&artifacts, &gold, k)?;
    Ok(Report { json: serde_json::to_value(&report).expect("report serializes"), text: report.to_text() })
}

fn cmd_bench(args: &BundleArgs, inputs: &Path, repetitions: usize) -> CmdResult<Report> {
    let lines: Vec<String> =
        read(inputs)?.lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect();
    let report = bench(&args.bundle, args.mode, &lines, repetitions)?;
    Ok(Report { json: serde_json::to_value(&report).expect("report serializes"), text: report.to_text() })
}

fn summary_text(store: &menusmt::menudb::Store) -> String {
    summary(store).iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
}

fn cmd_db(command: &DbCommand) -> CmdResult<Report> {
    match command {
        DbCommand::Import { store, dsl, images, conditions } => {
            let backend = JsonFileBackend::new(store);
            let mut db = backend.load()?;
            let source = ImageSource { dir: images.clone() };
            let mut dishes = 0;
            for path in dsl {
                let records = parse_dsl(&read(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                dishes += records.len();
                populate_store(&mut db, &records, &source)?;
            }
            if let Some(path) = conditions {
                let specs: Vec<ConditionSpec> = serde_json::from_str(&read(path)?)
                    .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                add_conditions(&mut db, &specs)?;
            }
            backend.save(&db)?;
            let text = format!("imported {dishes} dishes into {}\n{}", store.display(), summary_text(&db));
            Ok(Report { json: json!({ "imported_dishes": dishes, "summary": summary(&db) }), text })
        }
        DbCommand::Query { store, dish, ingredient } => {
            let db = JsonFileBackend::new(store).load()?;
            if let Some(name) = dish {
                let view = lookup_dish(&db, name)?;
                let mut text = format!("{}\n", view.name);
                for i in &view.ingredients {
                    let mut line = format!("  - {}", i.name);
                    if i.optional {
                        line.push_str(" (optional)");
                    }
                    if let Some(original) = &i.substitute_for {
                        let _ = write!(line, " (instead of {original})");
                    }
                    let _ = writeln!(text, "{line}");
                }
                Ok(Report { json: serde_json::to_value(&view).expect("view serializes"), text })
            } else {
                let name = ingredient.as_deref().unwrap_or_default();
                let view = lookup_ingredient(&db, name)?;
                let text = format!("{}\n  used in: {}\n", view.name, view.dishes.join(", "));
                Ok(Report { json: serde_json::to_value(&view).expect("view serializes"), text })
            }
        }
        DbCommand::Flag { store, dish, profile, condition, avoid, dialog, templates } => {
            let backend = JsonFileBackend::new(store);
            let mut db = backend.load()?;
            let profile = match profile {
                Some(id) => get_profile(&db, *id)?,
                None => {
                    let conds: Vec<&str> = condition.iter().map(String::as_str).collect();
                    let avoid: Vec<&str> = avoid.iter().map(String::as_str).collect();
                    let p = set_profile(&mut db, &conds, &avoid)?;
                    backend.save(&db)?;
                    p
                }
            };
            let flags = flag_dish(&db, dish, &profile)?;
            let mut text = format!("profile {} ({})\n", profile.id, profile.conditions.join(", "));
            if flags.is_empty() {
                let _ = writeln!(text, "{dish}: nothing flagged");
            }
            for f in &flags {
                let reasons: Vec<&str> = f.reasons.iter().map(|r| r.as_deref().unwrap_or("user choice")).collect();
                let _ = writeln!(text, "  ! {} [{}]", f.name, reasons.join(", "));
            }
            let mut json = json!({ "dish": dish, "profile": profile, "flags": flags });
            if *dialog {
                let templates = match templates {
                    Some(path) => load_templates(path)?,
                    None => default_templates(),
                };
                let questions = dialog_templates(dish, &flags, &LanguagePair::default(), &templates);
                for q in &questions {
                    let _ = writeln!(text, "  ? {}\n    {}", q.question_source, q.question_target);
                }
                json["questions"] = serde_json::to_value(&questions).expect("questions serialize");
            }
            Ok(Report { json, text })
        }
    }
}

fn cmd_serve(args: &ServeArgs) -> CmdResult<()> {
    let mut config: ServiceConfig = match &args.config {
        Some(path) => serde_json::from_str(&read(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?,
        None => ServiceConfig::default(),
    };
    if let Some(b) = args.bind {
        config.bind = b;
    }
    if args.bundle.is_some() {
        config.bundle = args.bundle.clone();
    }
    if let Some(m) = args.mode {
        config.load_mode = m;
    }
    if args.store.is_some() {
        config.store = args.store.clone();
    }
    if let Some(k) = args.k {
        config.default_k = k;
    }
    if !args.cors.is_empty() {
        config.cors_allowlist = args.cors.clone();
    }
    if args.templates.is_some() {
        config.templates = args.templates.clone();
    }
    if config.default_k == 0 {
        return Err(Failure::Usage("k must be at least 1".into()));
    }
    let runtime = tokio::runtime::Runtime::new()?;
    eprintln!("listening on {}", config.bind);
    runtime.block_on(menusmt_service::serve(config)).map_err(|e| Failure::Data(e.to_string()))
}

fn run(cli: &Cli) -> CmdResult<Option<Report>> {
    let report = match &cli.command {
        Command::Stats { build, nmax } => cmd_stats(build, *nmax)?,
        Command::Consolidate { build, out, rules_out } => cmd_consolidate(build, out.as_deref(), rules_out.as_deref())?,
        Command::Split { corpus, out_dir } => cmd_split(corpus, out_dir)?,
        Command::Train { build } => cmd_train(build)?,
        Command::Translate { bundle, k, verify, text } => cmd_translate(bundle, *k, *verify, text)?,
        Command::Evaluate { bundle, gold, k } => cmd_evaluate(bundle, gold, *k)?,
        Command::Bench { bundle, inputs, repetitions } => cmd_bench(bundle, inputs, *repetitions)?,
        Command::Db(db) => cmd_db(db)?,
        Command::Serve(args) => {
            cmd_serve(args)?;
            return Ok(None);
        }
    };
    Ok(Some(report))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Some(report)) => {
            if let Some(path) = &cli.report {
                let body = serde_json::to_string_pretty(&report.json).expect("json");
                if let Err(e) = write(path, &body) {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.code());
                }
            }
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("json"));
            } else {
                print!("{}", report.text);
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
