//! Command-line front end. `main` parses [`Cli`] and hands it to [`execute`].

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::graph::{self, KnowledgeGraph};
use crate::matcher;
use crate::nlp::{self, Gazetteer, Hyperparams, IndicatorModel};
use crate::service::{self, ServiceConfig};
use crate::synth::{self, AaeConfig, AaeModel, FeatureMapper};
use crate::taxonomy::IndicatorTaxonomy;

#[derive(Debug, Parser)]
#[command(name = "inspect", version, about = "Indicator-pattern search, text classification and trajectory synthesis")]
pub struct Cli {
    /// Raise log verbosity (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rank persons or neighborhoods in a graph file against a query file.
    Match(MatchArgs),
    /// Apply graph-file lines to a graph file, creating it if missing.
    Ingest {
        #[arg(long)]
        graph: PathBuf,
        /// Lines to apply; `-` reads stdin.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
    },
    /// Indicator classifier: training, prediction, evaluation, entities
    #[command(subcommand)]
    Classify(ClassifyCommand),
    /// Synthetic trajectories: feature mapping, training, sampling, fidelity
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Lines,
    Json,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Overrides the query's own threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum ClassifyCommand {
    /// Train on a JSON-lines corpus and write the model.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        allow_over_cap: bool,
    },
    /// Per-sentence label probabilities, one JSON object per line.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        text: TextInput,
        /// Only print labels at or above this probability.
        #[arg(long, default_value_t = 0.0)]
        min_probability: f64,
    },
    /// Stratified k-fold cross-validation report.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        allow_over_cap: bool,
        #[arg(long)]
        json: bool,
    },
    /// Dates, persons and organizations found in text.
    Entities {
        #[arg(long)]
        gazetteer: Option<PathBuf>,
        #[command(flatten)]
        text: TextInput,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TextInput {
    #[arg(long)]
    pub text: Option<String>,
    /// File to read; `-` reads stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Fit per-category date CDFs and write the feature mapper.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
    },
    /// Train an adversarial autoencoder and write the model.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        /// Pre-fitted mapper; fitted from `data` when absent.
        #[arg(long)]
        mapper: Option<PathBuf>,
        /// JSON training configuration; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write per-batch losses as JSON lines.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Draw synthetic trajectories from a trained model.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare real and synthetic trajectory sets.
    Report {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        synthetic: PathBuf,
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn taxonomy(path: Option<&Path>) -> Result<IndicatorTaxonomy> {
    match path {
        Some(p) => IndicatorTaxonomy::load(p).with_context(|| format!("loading taxonomy {}", p.display())),
        None => Ok(IndicatorTaxonomy::default_placeholder()),
    }
}

fn read_input(path: &Path) -> Result<String> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(text)
}

fn read_text(input: &TextInput) -> Result<String> {
    match (&input.text, &input.input) {
        (Some(t), _) => Ok(t.clone()),
        (None, Some(p)) => read_input(p),
        (None, None) => bail!("one of --text or --input is required"),
    }
}

fn load_graph(path: &Path, tax: IndicatorTaxonomy) -> Result<KnowledgeGraph> {
    let f = File::open(path).with_context(|| format!("opening graph {}", path.display()))?;
    graph::load(BufReader::new(f), tax).with_context(|| format!("loading graph {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("decoding {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_trajectories(path: &Path) -> Result<Vec<synth::Trajectory>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    synth::read_trajectories(BufReader::new(f)).with_context(|| format!("reading trajectories {}", path.display()))
}

fn read_corpus(path: &Path) -> Result<Vec<nlp::LabeledSnippet>> {
    let f = File::open(path).with_context(|| format!("opening corpus {}", path.display()))?;
    nlp::load_corpus(BufReader::new(f)).with_context(|| format!("reading corpus {}", path.display()))
}

/// Runs one command, writing its report to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Serve { config } => {
            let config = ServiceConfig::load(&config)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(service::serve(config))?;
        }
        Command::Match(args) => run_match(args, out)?,
        Command::Ingest { graph: path, input, taxonomy: tax } => {
            let tax = taxonomy(tax.as_deref())?;
            let mut g = if path.exists() { load_graph(&path, tax)? } else { KnowledgeGraph::new(tax) };
            let report = graph::ingest_lines(&mut g, &read_input(&input)?);
            if report.nodes_added + report.edges_added > 0 {
                let mut buf = Vec::new();
                graph::save(&g, &mut buf)?;
                std::fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
            }
            writeln!(out, "{}", serde_json::to_string(&report)?)?;
        }
        Command::Classify(c) => run_classify(c, out)?,
        Command::Synth(c) => run_synth(c, out)?,
    }
    Ok(())
}

fn run_match(args: MatchArgs, out: &mut dyn Write) -> Result<()> {
    let g = load_graph(&args.graph, taxonomy(args.taxonomy.as_deref())?)?;
    let text = std::fs::read(&args.query).with_context(|| format!("reading query {}", args.query.display()))?;
    let q = crate::dsl::parse_bytes(&text).map_err(|e| anyhow::anyhow!("{}: {e}", args.query.display()))?;
    for w in crate::dsl::validate(&q, g.taxonomy()) {
        log::warn!("{w}");
    }
    let results = match args.threshold {
        Some(t) => matcher::rank_with_threshold(&g, &q, t)?,
        None => matcher::rank(&g, &q)?,
    };
    match args.format {
        OutputFormat::Table => matcher::write_table(&results, args.limit, out)?,
        OutputFormat::Lines => matcher::write_lines(&results, args.limit, out)?,
        OutputFormat::Json => {
            let mut results = results;
            if let Some(n) = args.limit {
                results.entries.truncate(n);
            }
            writeln!(out, "{}", serde_json::to_string(&results)?)?;
        }
    }
    Ok(())
}

fn run_classify(c: ClassifyCommand, out: &mut dyn Write) -> Result<()> {
    match c {
        ClassifyCommand::Train { corpus, out: path, taxonomy: tax, seed, allow_over_cap } => {
            let tax = taxonomy(tax.as_deref())?;
            let corpus = read_corpus(&corpus)?;
            nlp::validate_corpus(&corpus, &tax, allow_over_cap)?;
            let model = nlp::train(&corpus, &tax, Hyperparams::default(), seed)?;
            write_json(&path, &model)?;
            writeln!(out, "trained on {} snippets, vocabulary {}", corpus.len(), model.vocabulary.len())?;
        }
        ClassifyCommand::Predict { model, text, min_probability } => {
            let body = std::fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?;
            let model = IndicatorModel::from_json(&body)?;
            let text = read_text(&text)?;
            for (start, end) in nlp::sentence_spans(&text) {
                let sentence = &text[start..end];
                let labels: serde_json::Map<String, serde_json::Value> = nlp::predict(&model, sentence)
                    .into_iter()
                    .filter(|(_, p)| *p >= min_probability)
                    .map(|(c, p)| (c, p.into()))
                    .collect();
                let line = serde_json::json!({ "text": sentence, "start": start, "end": end, "labels": labels });
                writeln!(out, "{line}")?;
            }
        }
        ClassifyCommand::Eval { corpus, taxonomy: tax, folds, seed, allow_over_cap, json } => {
            let tax = taxonomy(tax.as_deref())?;
            let corpus = read_corpus(&corpus)?;
            nlp::validate_corpus(&corpus, &tax, allow_over_cap)?;
            let report = nlp::evaluate_cv(&corpus, &tax, folds, seed, Hyperparams::default())?;
            if json {
                writeln!(out, "{}", serde_json::to_string(&report)?)?;
            } else {
                write!(out, "{}", report.table())?;
            }
        }
        ClassifyCommand::Entities { gazetteer, text } => {
            let gaz = match gazetteer {
                Some(p) => Gazetteer::load(&p).with_context(|| format!("loading gazetteer {}", p.display()))?,
                None => Gazetteer::default(),
            };
            let found = nlp::extract_entities(&read_text(&text)?, &gaz);
            writeln!(out, "{}", serde_json::to_string(&found)?)?;
        }
    }
    Ok(())
}

fn run_synth(c: SynthCommand, out: &mut dyn Write) -> Result<()> {
    match c {
        SynthCommand::Fit { data, out: path, taxonomy: tax } => {
            let mapper = synth::fit_mapper(&read_trajectories(&data)?, &taxonomy(tax.as_deref())?)?;
            write_json(&path, &mapper)?;
            writeln!(out, "mapper over {} categories, {} features", mapper.categories().count(), mapper.dim())?;
        }
        SynthCommand::Train { data, out: path, taxonomy: tax, mapper, config, seed, curve } => {
            let data = read_trajectories(&data)?;
            let mapper: FeatureMapper = match mapper {
                Some(p) => read_json(&p)?,
                None => synth::fit_mapper(&data, &taxonomy(tax.as_deref())?)?,
            };
            let mut config: AaeConfig = match config {
                Some(p) => read_json(&p)?,
                None => AaeConfig::default(),
            };
            if let Some(s) = seed {
                config.seed = s;
            }
            let trained = synth::train(&data, &mapper, &config)?;
            write_json(&path, &trained.model)?;
            if let Some(p) = curve {
                let mut f = std::io::BufWriter::new(File::create(&p)?);
                for r in &trained.curve {
                    writeln!(f, "{}", serde_json::to_string(r)?)?;
                }
                f.flush()?;
            }
            match trained.curve.last() {
                Some(r) => writeln!(
                    out,
                    "{} batches; final losses reconstruction {:.5} discriminator {:.5} generator {:.5}",
                    trained.curve.len(),
                    r.reconstruction,
                    r.discriminator,
                    r.generator
                )?,
                None => writeln!(out, "no batches run")?,
            }
        }
        SynthCommand::Sample { model, n, seed, out: path } => {
            let model: AaeModel = read_json(&model)?;
            let samples = synth::sample(&model, n, seed);
            match path {
                Some(p) => {
                    let f = std::io::BufWriter::new(File::create(&p)?);
                    synth::write_trajectories(f, &samples)?;
                }
                None => synth::write_trajectories(&mut *out, &samples)?,
            }
        }
        SynthCommand::Report { real, synthetic, taxonomy: tax, json } => {
            let tax = taxonomy(tax.as_deref())?;
            let report = synth::fidelity_report(
                &read_trajectories(&real)?,
                &read_trajectories(&synthetic)?,
                tax.categories().iter().map(String::as_str),
            )?;
            if json {
                writeln!(out, "{}", serde_json::to_string(&report)?)?;
            } else {
                writeln!(out, "{:<12} {:>8} {:>8} {:>7}", "category", "real", "synth", "ks")?;
                for c in &report.categories {
                    let ks = c.ks.map_or("-".to_string(), |k| format!("{k:.4}"));
                    writeln!(
                        out,
                        "{:<12} {:>8.4} {:>8.4} {:>7}",
                        c.category, c.real_presence, c.synthetic_presence, ks
                    )?;
                }
                writeln!(out, "presence L1 {:.4}  length TV {:.4}", report.presence_l1, report.length_tv)?;
            }
        }
    }
    Ok(())
}
