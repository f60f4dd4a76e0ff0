use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tonebias_core::catalog::{Catalog, SubsetFilter};
use tonebias_core::report::{
    self, sanitize_label, Analysis, AuditConfig, AuditReport, EmbeddingSource, ReportError, SourceFormat,
};
use tonebias_core::tokens::{asymmetry_flags, modifier_lengths, summarize, TokenManifest};

/// Audit skin-toned emoji representations in embedding models and tokenizers.
#[derive(Parser)]
#[command(name = "tonebias", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an emoji-test.txt file and emit the catalog as JSON.
    Catalog {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        group: Vec<String>,
        #[arg(long)]
        subgroup: Vec<String>,
        /// JSON output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vocabulary support for emojis and skin-toned emojis.
    Coverage(SourceArgs),
    /// Token count statistics and modifier asymmetry from token manifests.
    Tokens {
        #[arg(long, required = true)]
        manifest: Vec<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        /// Only report the bare modifier counts.
        #[arg(long)]
        modifiers_only: bool,
    },
    /// Per-tone distance between emoji variants and their descriptions.
    Align {
        #[command(flatten)]
        source: SourceArgs,
        /// Manifest whose modifier token ids are removed before WMD.
        #[arg(long)]
        strip_manifest: Option<PathBuf>,
    },
    /// Mean cosine distance between tone variants, per tone pair.
    Pairwise {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value = "hand-gesture")]
        group: String,
    },
    /// Relative norm distance between tone groups over neutral words.
    Rnd {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        words: WordArgs,
        /// Valence lexicon (word, valence, arousal, dominance; tab separated).
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value_t = 0.48)]
        low: f64,
        #[arg(long, default_value_t = 0.52)]
        high: f64,
        #[arg(long, default_value = "hand-gesture")]
        group: String,
        /// Use raw member vectors for the group centroids.
        #[arg(long)]
        no_normalize: bool,
    },
    /// WEAT suites with permutation p-values.
    Weat {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        words: WordArgs,
        #[arg(long, value_enum, default_value = "roles")]
        suite: WeatSuiteArg,
        /// Attribute set file; bundled sets when absent.
        #[arg(long)]
        sets: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Monte Carlo draws when exhaustive enumeration is too large.
        #[arg(long, default_value_t = 10_000)]
        permutations: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Relative negative sentiment bias over person roles.
    Rnsb {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        words: WordArgs,
        /// Seed file with a [sentiment] table; bundled seeds when absent.
        #[arg(long)]
        sets: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        #[arg(long)]
        accelerated: bool,
    },
    /// Run every analysis named in a config file.
    Audit {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WeatSuiteArg {
    Roles,
    Caliskan,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Word2vec,
    Word2vecBinary,
    Dump,
}

impl From<FormatArg> for SourceFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Word2vec => SourceFormat::Word2vec,
            FormatArg::Word2vecBinary => SourceFormat::Word2vecBinary,
            FormatArg::Dump => SourceFormat::Dump,
        }
    }
}

#[derive(Args)]
struct SourceArgs {
    /// Embedding dump (line-delimited JSON).
    #[arg(long, conflicts_with = "embeddings", required_unless_present = "embeddings")]
    dump: Option<PathBuf>,
    /// Embedding file in the format given by --format.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "word2vec")]
    format: FormatArg,
    /// Source label used in tables and file names; defaults to the file stem.
    #[arg(long)]
    label: Option<String>,
    /// Unicode emoji-test.txt.
    #[arg(long)]
    data: PathBuf,
    /// Write every output file here instead of printing the main table.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the Markdown summary instead of CSV.
    #[arg(long)]
    markdown: bool,
}

#[derive(Args)]
struct WordArgs {
    /// Separate embeddings for words and attribute or seed members.
    #[arg(long)]
    words: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "word2vec")]
    words_format: FormatArg,
}

const WORD_SOURCE: &str = "words";

impl SourceArgs {
    fn source(&self) -> EmbeddingSource {
        let (path, format) = match (&self.dump, &self.embeddings) {
            (Some(p), _) => (p.clone(), SourceFormat::Dump),
            (None, Some(p)) => (p.clone(), self.format.into()),
            (None, None) => unreachable!("clap requires one of --dump and --embeddings"),
        };
        let label = self.label.clone().unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "model".into())
        });
        EmbeddingSource {
            path,
            format,
            label,
            audit: true,
        }
    }

    fn config(&self, analysis: Analysis) -> AuditConfig {
        AuditConfig {
            data_file: self.data.clone(),
            unicode_version: None,
            embedding_sources: vec![self.source()],
            manifests: Vec::new(),
            analyses: vec![analysis],
            seed: 0,
            output_dir: self.out.clone().unwrap_or_default(),
            align: Default::default(),
            pairwise: Default::default(),
            rnd: Default::default(),
            weat: Default::default(),
            rnsb: Default::default(),
        }
    }
}

impl WordArgs {
    /// Adds the word source to `config` and returns its label.
    fn attach(&self, config: &mut AuditConfig) -> Option<String> {
        let path = self.words.clone()?;
        config.embedding_sources.push(EmbeddingSource {
            path,
            format: self.words_format.into(),
            label: WORD_SOURCE.into(),
            audit: false,
        });
        Some(WORD_SOURCE.into())
    }
}

enum Failure {
    Usage(anyhow::Error),
    Partial,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        Failure::Usage(e.into())
    }
}

fn report_failures(report: &AuditReport) -> Result<(), Failure> {
    for f in &report.failures {
        eprintln!("error: {} [{}]: {}", f.analysis, f.source, f.message);
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Partial)
    }
}

fn print(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes).context("writing to stdout")?;
    out.flush().context("writing to stdout")
}

fn emit_json(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => print(text.as_bytes()),
    }
}

/// Runs a single-analysis config and prints `main` (or the Markdown summary),
/// or writes all outputs when `--out` was given.
fn run_single(args: &SourceArgs, config: AuditConfig, main: &str) -> Result<(), Failure> {
    let report = report::run(&config)?;
    if let Some(dir) = &args.out {
        report.write_to(dir)?;
    } else if args.markdown {
        print(&report.files["report.md"])?;
    } else if let Some(bytes) = report.files.get(main) {
        print(bytes)?;
    }
    report_failures(&report)
}

fn catalog_cmd(data: &Path, group: &[String], subgroup: &[String], out: Option<&Path>) -> Result<()> {
    let catalog = Catalog::from_path(data)?;
    let filter = SubsetFilter {
        groups: group.to_vec(),
        subgroups: subgroup.to_vec(),
    };
    let catalog = if group.is_empty() && subgroup.is_empty() {
        catalog
    } else {
        catalog.subset(&filter)?
    };
    emit_json(&catalog.to_json(), out)
}

fn tokens_cmd(manifests: &[PathBuf], data: &Path, modifiers_only: bool) -> Result<()> {
    let catalog = Catalog::from_path(data)?;
    let ids = catalog.skin_toned_ids();
    let mut rows = Vec::new();
    for path in manifests {
        let manifest = TokenManifest::load_path(path).with_context(|| path.display().to_string())?;
        let lengths = modifier_lengths(&manifest).with_context(|| path.display().to_string())?;
        let mut row = json!({
            "model": manifest.header.model_label,
            "tokenizer": manifest.header.tokenizer_label,
            "modifiers": lengths,
            "asymmetry": asymmetry_flags(&lengths),
        });
        if !modifiers_only {
            let stats = summarize(&manifest, &ids).with_context(|| path.display().to_string())?;
            row["stats"] = serde_json::to_value(stats)?;
        }
        rows.push(row);
    }
    emit_json(&serde_json::Value::Array(rows), None)
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Catalog {
            data,
            group,
            subgroup,
            out,
        } => catalog_cmd(&data, &group, &subgroup, out.as_deref())?,
        Command::Tokens {
            manifest,
            data,
            modifiers_only,
        } => tokens_cmd(&manifest, &data, modifiers_only)?,
        Command::Coverage(args) => {
            let config = args.config(Analysis::Coverage);
            run_single(&args, config, "coverage.csv")?
        }
        Command::Align { source, strip_manifest } => {
            let mut config = source.config(Analysis::Align);
            config.align.strip_manifest = strip_manifest;
            run_single(&source, config, "align.csv")?
        }
        Command::Pairwise { source, group } => {
            let mut config = source.config(Analysis::Pairwise);
            config.pairwise.group = group;
            let main = format!("pairwise_{}.csv", sanitize_label(&source.source().label));
            run_single(&source, config, &main)?
        }
        Command::Rnd {
            source,
            words,
            lexicon,
            low,
            high,
            group,
            no_normalize,
        } => {
            let mut config = source.config(Analysis::Rnd);
            config.rnd.word_source = words.attach(&mut config);
            config.rnd.lexicon = Some(lexicon);
            config.rnd.low = low;
            config.rnd.high = high;
            config.rnd.group = group;
            config.rnd.normalize = !no_normalize;
            let main = format!("rnd_{}.csv", sanitize_label(&source.source().label));
            run_single(&source, config, &main)?
        }
        Command::Weat {
            source,
            words,
            suite,
            sets,
            seed,
            permutations,
            alpha,
        } => {
            let (analysis, main) = match suite {
                WeatSuiteArg::Roles => (Analysis::WeatRoles, "weat_roles.csv"),
                WeatSuiteArg::Caliskan => (Analysis::WeatCaliskan, "weat_caliskan.csv"),
            };
            let mut config = source.config(analysis);
            config.seed = seed;
            config.weat.samples = permutations;
            config.weat.alpha = alpha;
            match suite {
                WeatSuiteArg::Roles => {
                    if words.words.is_some() {
                        return Err(anyhow::anyhow!("--words applies to the caliskan suite only").into());
                    }
                    config.weat.role_sets = sets;
                }
                WeatSuiteArg::Caliskan => {
                    config.weat.word_source = words.attach(&mut config);
                    config.weat.benchmark_sets = sets;
                }
            }
            run_single(&source, config, main)?
        }
        Command::Rnsb {
            source,
            words,
            sets,
            lambda,
            accelerated,
        } => {
            let mut config = source.config(Analysis::Rnsb);
            config.rnsb.seed_source = words.attach(&mut config);
            config.rnsb.seeds = sets;
            config.rnsb.lambda = lambda;
            config.rnsb.accelerated = accelerated;
            run_single(&source, config, "rnsb.csv")?
        }
        Command::Audit { config, out } => {
            let mut config = AuditConfig::load(&config)?;
            if let Some(out) = out {
                config.output_dir = out;
            }
            let report = report::run(&config)?;
            report.write_to(&config.output_dir)?;
            eprintln!(
                "wrote {} files to {}",
                report.files.len(),
                config.output_dir.display()
            );
            report_failures(&report)?
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Partial) => ExitCode::from(2),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
