//! The `citeforge` command line.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bibtex::{parse_bib_bytes_with, BibEntry, MacroTable};
use crate::crf::{tag, train, CrfModel, EmissionScorer, TaggedSpan, TrainConfig};
use crate::dataset::{
    audit_sample, audit_score, compute_stats, generate, read_jsonl, split_by_source, write_jsonl, DatasetStats,
    GenerationConfig,
};
use crate::eval::{report, score, ReportFormat};
use crate::labeling::LabeledSequence;
use crate::style::{builtin_styles, load_styles, pick_styles};

pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_GATE: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::new(EXIT_IO, format!("{}: {e}", path.display()))
    }

    /// Failure writing to stdout. A closed pipe (`| head`) ends the command quietly.
    fn output(e: impl Into<io::Error>) -> Self {
        let e = e.into();
        if e.kind() == io::ErrorKind::BrokenPipe {
            Self::new(0, "")
        } else {
            Self::new(EXIT_IO, e.to_string())
        }
    }

    fn config(message: impl std::fmt::Display) -> Self {
        Self::new(EXIT_CONFIG, message.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "citeforge", version, about = "Labeled citation data from BibTeX, and a CRF to learn from it")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for generation.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Style definition JSON (built-in styles otherwise).
    #[arg(long, global = true)]
    pub styles: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Fail `eval` when micro F1 is below this.
    #[arg(long, global = true)]
    pub min_f1: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse .bib files and report entries and diagnostics.
    Parse(ParseArgs),
    /// Render entries under styles and write labeled train/dev/test splits.
    Generate(GenerateArgs),
    /// Train a CRF on a labeled JSONL file.
    Train(TrainArgs),
    /// Label raw reference strings, one per line.
    Tag(TagArgs),
    /// Score predictions or a model against gold data.
    Eval(EvalArgs),
    /// Export sequences for manual review, or score a reviewed file.
    #[command(subcommand)]
    Audit(AuditCommand),
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    pub bib: Vec<PathBuf>,
    /// Abort on the first malformed item.
    #[arg(long)]
    pub strict: bool,
    /// Print parsed entries as JSON lines.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub bib: Vec<PathBuf>,
    #[arg(long)]
    pub pairings: Option<usize>,
    #[arg(long)]
    pub noise_rate: Option<f64>,
    /// Comma-separated subset of style ids.
    #[arg(long, value_delimiter = ',')]
    pub style_ids: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training JSONL (default: <out>/train.jsonl).
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Dev JSONL for model selection (default: <out>/dev.jsonl when present).
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Model path (default: <out>/model.json).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TagArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// File of references (standard input otherwise).
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Gold JSONL (default: <out>/test.jsonl).
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Predicted JSONL aligned with the gold file.
    #[arg(long, conflicts_with = "model")]
    pub pred: Option<PathBuf>,
    /// Model to run over the gold tokens (default: <out>/model.json).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
}

#[derive(Debug, Subcommand)]
pub enum AuditCommand {
    /// Write a seeded random sample in review format.
    Sample {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Score the original labels against a reviewed audit file.
    Score {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        edited: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
}

/// Settings file; every field is optional and command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Log filter used when `CITEFORGE_LOG` is unset.
    pub log: Option<String>,
    pub paths: PathsConfig,
    pub generation: GenerationSettings,
    /// Training settings; its `seed` is replaced by the run seed.
    pub train: TrainConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub bib: Vec<PathBuf>,
    pub styles: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSettings {
    pub style_ids: Option<Vec<String>>,
    pub pairings_per_entry: usize,
    pub noise_rate: f64,
    pub split_fractions: [f64; 3],
}

impl Default for GenerationSettings {
    fn default() -> Self {
        GenerationSettings {
            style_ids: None,
            pairings_per_entry: 1,
            noise_rate: 0.0,
            split_fractions: [0.8, 0.1, 0.1],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Resolves the file (if any) and applies command-line overrides.
    pub fn resolve(global: &GlobalArgs) -> CliResult<Self> {
        let mut c = match &global.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if global.seed.is_some() {
            c.seed = global.seed;
        }
        if global.workers.is_some() {
            c.workers = global.workers;
        }
        if global.styles.is_some() {
            c.paths.styles = global.styles.clone();
        }
        if global.out.is_some() {
            c.paths.out = global.out.clone();
        }
        c.train.seed = c.seed();
        if let Some(styles) = &c.paths.styles {
            if !styles.exists() {
                return Err(CliError::config(format!("style file {} does not exist", styles.display())));
            }
        }
        Ok(c)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn model_path(&self, flag: &Option<PathBuf>) -> PathBuf {
        flag.clone()
            .or_else(|| self.paths.model.clone())
            .unwrap_or_else(|| self.out_dir().join("model.json"))
    }
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let config = match RunConfig::resolve(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return e.code;
        }
    };
    init_logging(config.log.as_deref());
    match run(&cli, &config) {
        Ok(()) => 0,
        Err(e) if e.code == 0 => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn init_logging(default: Option<&str>) {
    let env = env_logger::Env::new()
        .filter_or("CITEFORGE_LOG", default.unwrap_or("warn"))
        .write_style("CITEFORGE_LOG_STYLE");
    let _ = env_logger::Builder::from_env(env).try_init();
}

pub fn run(cli: &Cli, config: &RunConfig) -> CliResult {
    match &cli.command {
        Command::Parse(a) => cmd_parse(a, config),
        Command::Generate(a) => cmd_generate(a, config),
        Command::Train(a) => cmd_train(a, config),
        Command::Tag(a) => cmd_tag(a, config),
        Command::Eval(a) => cmd_eval(a, config, cli.global.min_f1),
        Command::Audit(a) => cmd_audit(a, config),
    }
}

/// Parses files in order; `@string` macros carry over from earlier files to later ones.
fn read_bibs(paths: &[PathBuf], strict: bool) -> CliResult<(Vec<BibEntry>, usize)> {
    let mut entries = Vec::new();
    let mut macros = MacroTable::new();
    let mut diagnostics = 0;
    for path in paths {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        let source = path.to_string_lossy();
        let parsed = parse_bib_bytes_with(&bytes, &source, strict, &macros)
            .map_err(|e| CliError::new(EXIT_PARSE, format!("{source}: {e}")))?;
        for d in &parsed.diagnostics {
            log::warn!("{source}: {d}");
        }
        diagnostics += parsed.diagnostics.len();
        for name in parsed.macros.names() {
            macros.insert(name, parsed.macros.get(name).unwrap_or_default());
        }
        entries.extend(parsed.entries);
    }
    Ok((entries, diagnostics))
}

fn bib_paths<'a>(args: &'a [PathBuf], config: &'a RunConfig) -> CliResult<&'a [PathBuf]> {
    let paths = if args.is_empty() { &config.paths.bib } else { args };
    if paths.is_empty() {
        return Err(CliError::new(EXIT_USAGE, "no .bib files given"));
    }
    Ok(paths)
}

fn cmd_parse(args: &ParseArgs, config: &RunConfig) -> CliResult {
    let paths = bib_paths(&args.bib, config)?;
    let (entries, diagnostics) = read_bibs(paths, args.strict)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let w = |e: io::Error| CliError::output(e);
    if args.dump {
        for e in &entries {
            serde_json::to_writer(&mut out, e).map_err(CliError::output)?;
            writeln!(out).map_err(w)?;
        }
    }
    eprintln!("{} entries, {} diagnostics", entries.len(), diagnostics);
    if entries.is_empty() {
        return Err(CliError::new(EXIT_PARSE, "no entries parsed"));
    }
    Ok(())
}

fn load_style_set(config: &RunConfig, ids: Option<&Vec<String>>) -> CliResult<Vec<crate::style::StyleSpec>> {
    let all = match &config.paths.styles {
        Some(p) => load_styles(p).map_err(CliError::config)?,
        None => builtin_styles(),
    };
    match ids {
        Some(ids) => pick_styles(&all, ids).map_err(CliError::config),
        None => Ok(all),
    }
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> CliResult {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn read_dataset(path: &Path) -> CliResult<Vec<LabeledSequence>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_jsonl(BufReader::new(file)).map_err(|e| match e {
        crate::dataset::DatasetError::Io(e) => CliError::io(path, e),
        e => CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())),
    })
}

#[derive(Serialize)]
struct StatsReport {
    skipped_pairs: usize,
    total: DatasetStats,
    train: DatasetStats,
    dev: DatasetStats,
    test: DatasetStats,
}

fn cmd_generate(args: &GenerateArgs, config: &RunConfig) -> CliResult {
    let paths = bib_paths(&args.bib, config)?;
    let (entries, _) = read_bibs(paths, false)?;
    if entries.is_empty() {
        return Err(CliError::new(EXIT_PARSE, "no entries parsed"));
    }
    let g = &config.generation;
    let styles = load_style_set(config, args.style_ids.as_ref().or(g.style_ids.as_ref()))?;
    let gen_config = GenerationConfig {
        styles,
        pairings_per_entry: args.pairings.unwrap_or(g.pairings_per_entry),
        noise_rate: args.noise_rate.unwrap_or(g.noise_rate),
        seed: config.seed(),
        split_fractions: g.split_fractions,
    };
    let generated = generate(&entries, &gen_config, config.workers.unwrap_or(1)).map_err(CliError::config)?;
    log::info!(
        "{} sequences from {} entries, {} pairs skipped",
        generated.sequences.len(),
        entries.len(),
        generated.skipped
    );
    let total = compute_stats(&generated.sequences);
    let splits = split_by_source(generated.sequences, gen_config.split_fractions, config.seed())
        .map_err(CliError::config)?;

    let dir = config.out_dir();
    create_dir(&dir)?;
    for (name, part) in ["train", "dev", "test"].iter().zip(splits.parts()) {
        write_file(&dir.join(format!("{name}.jsonl")), |w| write_jsonl(w, part))?;
    }
    let report = StatsReport {
        skipped_pairs: generated.skipped,
        total,
        train: compute_stats(&splits.train),
        dev: compute_stats(&splits.dev),
        test: compute_stats(&splits.test),
    };
    write_file(&dir.join("stats.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        w.write_all(b"\n")
    })?;
    eprintln!(
        "wrote {} train, {} dev, {} test sequences to {} ({} pairs skipped)",
        splits.train.len(),
        splits.dev.len(),
        splits.test.len(),
        dir.display(),
        generated.skipped
    );
    Ok(())
}

fn cmd_train(args: &TrainArgs, config: &RunConfig) -> CliResult {
    let dir = config.out_dir();
    let train_path = args.train.clone().unwrap_or_else(|| dir.join("train.jsonl"));
    let train_set = read_dataset(&train_path)?;
    let dev_set = match &args.dev {
        Some(p) => read_dataset(p)?,
        None if args.train.is_none() && dir.join("dev.jsonl").exists() => read_dataset(&dir.join("dev.jsonl"))?,
        None => Vec::new(),
    };
    let mut tc = config.train.clone();
    if let Some(e) = args.epochs {
        tc.epochs = e;
    }
    let trained = train(&train_set, &dev_set, &tc).map_err(CliError::config)?;
    let model_path = config.model_path(&args.model);
    if let Some(parent) = model_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    trained.model.save(&model_path).map_err(|e| CliError::io(&model_path, e))?;
    eprintln!(
        "saved model from epoch {} to {}",
        trained.best_epoch,
        model_path.display()
    );
    Ok(())
}

fn load_model(path: &Path) -> CliResult<CrfModel> {
    if !path.exists() {
        return Err(CliError::config(format!("model file {} does not exist", path.display())));
    }
    CrfModel::load(path).map_err(|e| match e {
        crate::crf::CrfError::Io(e) => CliError::io(path, e),
        e => CliError::config(format!("{}: {e}", path.display())),
    })
}

#[derive(Serialize)]
struct TagLine<'a> {
    reference: &'a str,
    spans: Vec<TaggedSpan>,
}

fn cmd_tag(args: &TagArgs, config: &RunConfig) -> CliResult {
    let model = load_model(&config.model_path(&args.model))?;
    let mut text = String::new();
    match &args.input {
        Some(p) => {
            text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
        }
        None => {
            io::stdin()
                .lock()
                .read_to_string(&mut text)
                .map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
        }
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let io_err = |e: io::Error| CliError::output(e);
    for line in BufReader::new(text.as_bytes()).lines() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let record = TagLine {
            reference: &line,
            spans: tag(&line, &model),
        };
        serde_json::to_writer(&mut out, &record).map_err(CliError::output)?;
        writeln!(out).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

fn check_vocab(model: &CrfModel, gold: &[LabeledSequence]) -> CliResult {
    let known = model.label_vocab();
    for s in gold {
        if let Some(t) = s.labels.iter().find(|t| known.index(t).is_none()) {
            return Err(CliError::config(format!(
                "gold label `{t}` (in `{}`) is not in the model's label vocabulary",
                s.provenance.cite_key
            )));
        }
    }
    Ok(())
}

fn format_of(f: FormatArg) -> ReportFormat {
    match f {
        FormatArg::Text => ReportFormat::Text,
        FormatArg::Json => ReportFormat::Json,
    }
}

fn cmd_eval(args: &EvalArgs, config: &RunConfig, min_f1: Option<f64>) -> CliResult {
    let gold_path = args.gold.clone().unwrap_or_else(|| config.out_dir().join("test.jsonl"));
    let gold = read_dataset(&gold_path)?;
    let pred: Vec<LabeledSequence> = match &args.pred {
        Some(p) => read_dataset(p)?,
        None => {
            let model = load_model(&config.model_path(&args.model))?;
            check_vocab(&model, &gold)?;
            gold.iter()
                .map(|s| LabeledSequence {
                    tokens: s.tokens.clone(),
                    labels: model.decode(&s.tokens),
                    provenance: s.provenance.clone(),
                })
                .collect()
        }
    };
    let metrics = score(&gold, &pred).map_err(CliError::config)?;
    print!("{}", report(&metrics, format_of(args.format)));
    if matches!(args.format, FormatArg::Json) {
        println!();
    }
    if let Some(gate) = min_f1 {
        if metrics.micro.f1 < gate {
            return Err(CliError::new(
                EXIT_GATE,
                format!("micro F1 {:.4} is below the gate {gate}", metrics.micro.f1),
            ));
        }
    }
    Ok(())
}

fn cmd_audit(cmd: &AuditCommand, config: &RunConfig) -> CliResult {
    match cmd {
        AuditCommand::Sample { data, n } => {
            let dataset = read_dataset(data)?;
            let text = audit_sample(&dataset, *n, config.seed()).map_err(CliError::config)?;
            match &config.paths.out {
                Some(dir) => {
                    create_dir(dir)?;
                    let path = dir.join("audit.tsv");
                    write_file(&path, |w| w.write_all(text.as_bytes()))?;
                    eprintln!("wrote {n} sequences to {}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(())
        }
        AuditCommand::Score { data, edited, format } => {
            let dataset = read_dataset(data)?;
            let text = fs::read_to_string(edited).map_err(|e| CliError::io(edited, e))?;
            let metrics = audit_score(&text, &dataset)
                .map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", edited.display())))?;
            print!("{}", report(&metrics, format_of(*format)));
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "seed = 7\nworkers = 2\n[paths]\nbib = [\"a.bib\"]\n[generation]\npairings_per_entry = 3\n[train]\nepochs = 4\n",
        )
        .unwrap();
        let global = GlobalArgs {
            config: Some(path),
            seed: Some(9),
            workers: None,
            styles: None,
            out: Some(dir.path().into()),
            min_f1: None,
        };
        let c = RunConfig::resolve(&global).unwrap();
        assert_eq!(c.seed(), 9);
        assert_eq!(c.train.seed, 9);
        assert_eq!(c.workers, Some(2));
        assert_eq!(c.generation.pairings_per_entry, 3);
        assert_eq!(c.train.epochs, 4);
        assert_eq!(c.train.batch_size, 16);
        assert_eq!(c.paths.bib, [PathBuf::from("a.bib")]);
    }

    #[test]
    fn bad_config_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "unknown_key = 1\n").unwrap();
        let code = main_with_args(["citeforge", "--config", path.to_str().unwrap(), "parse", "x.bib"]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(main_with_args(["citeforge", "no-such-command"]), EXIT_USAGE);
        assert_eq!(main_with_args(["citeforge", "parse"]), EXIT_USAGE);
    }
}
