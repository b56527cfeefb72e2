//! The `elixa` command-line front end.
//!
//! Exit codes: 0 on success (including `--help`), 1 on a usage error and
//! 2 when an input is missing or malformed.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::clusters::{kmeans, WordVectors};
use crate::config::{OteConfigFile, PolarityConfigFile};
use crate::corpus::{load_absa_jsonl, load_rated_reviews, semeval::read_semeval_xml, write_absa_jsonl, Sentence};
use crate::error::{Error, Result};
use crate::eval::Table;
use crate::lexicon::{
    merge_with_priority, read_source_lexicon, restrict_by_threshold, DomainCounts, DomainLexiconOptions,
    PolarityLexicon, SourceName,
};
use crate::ote::{self, OteFeatureConfig, SequenceModel, TrainOptions};
use crate::polarity::{self, labeled_opinions, PolarityFeatureConfig, SvmModel, SvmOptions};

#[derive(Debug, Parser)]
#[command(name = "elixa", version, about = "Aspect-based sentiment analysis toolkit")]
pub struct Cli {
    /// Seed for every random choice (shuffles, folds, k-means).
    #[arg(long, global = true, default_value_t = 7, help_heading = "Global options")]
    pub seed: u64,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0, help_heading = "Global options")]
    pub jobs: usize,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count, help_heading = "Global options")]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert an annotated corpus to JSON lines.
    Convert(ConvertArgs),
    /// Build polarity lexicons.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
    /// Induce word clusters.
    #[command(subcommand)]
    Clusters(ClustersCommand),
    /// Opinion target extraction.
    #[command(subcommand)]
    Ote(OteCommand),
    /// Opinion polarity classification.
    #[command(subcommand)]
    Pol(PolCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InputFormat {
    SemevalXml,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutputFormat {
    Jsonl,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Input format.
    #[arg(long, value_enum)]
    pub from: InputFormat,
    /// Output format.
    #[arg(long, value_enum, default_value = "jsonl")]
    pub to: OutputFormat,
    /// Annotated corpus to read.
    pub input: PathBuf,
    /// JSON lines file to write.
    pub output: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum LexiconCommand {
    /// Merge source lexicons with priority Liu > OF > GI > SWN.
    Merge {
        /// Bing Liu opinion lexicon (`word<TAB>pos|neg`).
        #[arg(long)]
        liu: Option<PathBuf>,
        /// MPQA OpinionFinder lexicon (`word<TAB>pos|neg`).
        #[arg(long)]
        of: Option<PathBuf>,
        /// General Inquirer lexicon (`word<TAB>category`).
        #[arg(long)]
        gi: Option<PathBuf>,
        /// SentiWordNet scores (`word<TAB>pos<TAB>neg`).
        #[arg(long)]
        swn: Option<PathBuf>,
        /// Name of the merged lexicon.
        #[arg(long, default_value = "gen")]
        name: String,
        /// Merged lexicon to write.
        output: PathBuf,
    },
    /// Keep only entries whose absolute weight reaches the threshold.
    Restrict {
        /// Smallest absolute weight kept.
        #[arg(long, default_value_t = 0.6)]
        threshold: f64,
        /// Lexicon to read.
        input: PathBuf,
        /// Restricted lexicon to write.
        output: PathBuf,
    },
    /// Induce a domain lexicon from rated reviews.
    Induce {
        /// Minimum number of occurrences of a word.
        #[arg(long, default_value_t = 5)]
        min_freq: u64,
        /// Words kept per polarity.
        #[arg(long, default_value_t = 2500)]
        top_k: usize,
        /// Name of the induced lexicon.
        #[arg(long, default_value = "domain")]
        name: String,
        /// Rated reviews, one JSON object per line.
        reviews: PathBuf,
        /// Lexicon to write.
        output: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ClustersCommand {
    /// Cluster word vectors with k-means into a `word<TAB>class` lexicon.
    Kmeans {
        /// Number of clusters.
        #[arg(long)]
        k: usize,
        /// Iteration limit.
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        /// Word vectors in text format.
        vectors: PathBuf,
        /// Cluster lexicon to write.
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct OteTrainingArgs {
    /// JSON feature configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Passes over the training data.
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Beam width for decoding.
    #[arg(long, default_value_t = 3)]
    pub beam: usize,
}

#[derive(Debug, Subcommand)]
pub enum OteCommand {
    /// Train a target extraction model.
    Train {
        #[command(flatten)]
        training: OteTrainingArgs,
        /// Training corpus in JSON lines.
        train: PathBuf,
        /// Model file to write.
        model: PathBuf,
    },
    /// Replace every sentence's targets with predicted ones.
    Tag {
        /// Trained target extraction model.
        model: PathBuf,
        /// Corpus to tag, in JSON lines.
        input: PathBuf,
        /// Tagged corpus to write.
        output: PathBuf,
    },
    /// Cross-validate target extraction and print P/R/F1 per fold.
    Cv {
        #[command(flatten)]
        training: OteTrainingArgs,
        /// Number of folds.
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Annotated corpus in JSON lines.
        data: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    /// SVM complexity parameter.
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    /// KKT tolerance of the SMO solver.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum PolCommand {
    /// Train a polarity model.
    Train {
        /// JSON feature configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        svm: SvmArgs,
        /// Training corpus in JSON lines.
        train: PathBuf,
        /// Model file to write.
        model: PathBuf,
    },
    /// Set the polarity of every opinion to the model's prediction.
    Predict {
        /// Trained polarity model.
        model: PathBuf,
        /// Corpus whose opinions are classified, in JSON lines.
        input: PathBuf,
        /// Corpus to write.
        output: PathBuf,
    },
    /// Cross-validate polarity accuracy.
    Cv {
        /// JSON feature configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        svm: SvmArgs,
        /// Number of folds.
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Annotated corpus in JSON lines.
        data: PathBuf,
    },
    /// Cross-validate every config in a directory.
    Ablate {
        /// Directory of JSON configs, run in file name order.
        #[arg(long)]
        configs: PathBuf,
        #[command(flatten)]
        svm: SvmArgs,
        /// Number of folds.
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Annotated corpus in JSON lines.
        data: PathBuf,
    },
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            // printing to a closed pipe is not worth reporting
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    // a logger may already be installed when called from tests
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Runs a parsed command on a thread pool of `--jobs` workers.
pub fn run(cli: &Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    pool.install(|| dispatch(cli))
}

fn require(paths: &[&Path]) -> Result<()> {
    for p in paths {
        if !p.exists() {
            return Err(Error::io(
                *p,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
            ));
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_sentences(path: &Path, sentences: &[Sentence]) -> Result<()> {
    let mut w = create(path)?;
    write_absa_jsonl(&mut w, sentences)?;
    finish(w, path)
}

fn print_table(table: &Table, csv: Option<&Path>) -> Result<()> {
    print!("{table}");
    if let Some(path) = csv {
        std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn config_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn ote_config(path: Option<&Path>) -> Result<OteFeatureConfig> {
    let Some(path) = path else {
        return Ok(OteFeatureConfig::default());
    };
    require(&[path])?;
    let file = OteConfigFile::read(path)?;
    let refs = file.referenced_paths(config_dir(path));
    require(&refs.iter().map(PathBuf::as_path).collect::<Vec<_>>())?;
    file.build(config_dir(path))
}

fn polarity_config(path: Option<&Path>) -> Result<PolarityFeatureConfig> {
    let Some(path) = path else {
        return Ok(PolarityFeatureConfig::default());
    };
    require(&[path])?;
    let file = PolarityConfigFile::read(path)?;
    let refs = file.referenced_paths(config_dir(path));
    require(&refs.iter().map(PathBuf::as_path).collect::<Vec<_>>())?;
    file.build(config_dir(path))
}

fn dispatch(cli: &Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Convert(args) => {
            require(&[&args.input])?;
            let sentences = match args.from {
                InputFormat::SemevalXml => read_semeval_xml(crate::open_file(&args.input)?)?,
            };
            log::info!("converted {} sentences", sentences.len());
            write_sentences(&args.output, &sentences)
        }

        Command::Lexicon(LexiconCommand::Merge {
            liu,
            of,
            gi,
            swn,
            name,
            output,
        }) => {
            let sources: Vec<(SourceName, &PathBuf)> = [
                (SourceName::Liu, liu),
                (SourceName::OF, of),
                (SourceName::GI, gi),
                (SourceName::SWN, swn),
            ]
            .into_iter()
            .filter_map(|(n, p)| p.as_ref().map(|p| (n, p)))
            .collect();
            if sources.is_empty() {
                return Err(Error::invalid("give at least one of --liu, --of, --gi, --swn"));
            }
            require(&sources.iter().map(|(_, p)| p.as_path()).collect::<Vec<_>>())?;
            let lexicons = sources
                .iter()
                .map(|(n, p)| read_source_lexicon(*n, p))
                .collect::<Result<Vec<_>>>()?;
            let merged = merge_with_priority(name.clone(), &lexicons);
            log::info!("merged lexicon has {} entries", merged.len());
            let mut w = create(output)?;
            merged.write(&mut w)?;
            finish(w, output)
        }

        Command::Lexicon(LexiconCommand::Restrict {
            threshold,
            input,
            output,
        }) => {
            require(&[input])?;
            let name = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let lex = PolarityLexicon::read(name, input)?;
            let restricted = restrict_by_threshold(&lex, *threshold)?;
            log::info!("kept {} of {} entries", restricted.len(), lex.len());
            let mut w = create(output)?;
            restricted.write(&mut w)?;
            finish(w, output)
        }

        Command::Lexicon(LexiconCommand::Induce {
            min_freq,
            top_k,
            name,
            reviews,
            output,
        }) => {
            require(&[reviews])?;
            let mut counts = DomainCounts::new();
            let mut stream = load_rated_reviews(reviews)?;
            for review in stream.by_ref() {
                counts.add(&review?);
            }
            if stream.skipped() > 0 {
                log::warn!("skipped {} reviews with out-of-range ratings", stream.skipped());
            }
            let opts = DomainLexiconOptions {
                name: name.clone(),
                min_freq: *min_freq,
                top_k: *top_k,
            };
            let lex = counts.into_lexicon(&opts)?;
            log::info!("induced {} entries", lex.len());
            let mut w = create(output)?;
            lex.write(&mut w)?;
            finish(w, output)
        }

        Command::Clusters(ClustersCommand::Kmeans {
            k,
            max_iters,
            vectors,
            output,
        }) => {
            require(&[vectors])?;
            let v = WordVectors::load(vectors)?;
            let fit = kmeans(&v, *k, seed, *max_iters)?;
            log::info!(
                "k-means stopped after {} iterations, inertia {}",
                fit.iterations,
                fit.inertia()
            );
            let mut w = create(output)?;
            fit.lexicon.write(&mut w)?;
            finish(w, output)
        }

        Command::Ote(OteCommand::Train { training, train, model }) => {
            require(&[train])?;
            let config = ote_config(training.config.as_deref())?;
            let sentences = load_absa_jsonl(train)?;
            let opts = TrainOptions {
                epochs: training.epochs,
                beam: training.beam,
                seed,
            };
            let m = ote::train_perceptron(&sentences, &config, &opts)?;
            log::info!(
                "trained on {} sentences, {} features",
                sentences.len(),
                m.num_features()
            );
            m.save(model)
        }

        Command::Ote(OteCommand::Tag { model, input, output }) => {
            require(&[model, input])?;
            let m = SequenceModel::load(model)?;
            let sentences = load_absa_jsonl(input)?;
            write_sentences(output, &ote::tag_sentences(&m, &sentences))
        }

        Command::Ote(OteCommand::Cv {
            training,
            folds,
            csv,
            data,
        }) => {
            require(&[data])?;
            let config = ote_config(training.config.as_deref())?;
            let sentences = load_absa_jsonl(data)?;
            let opts = TrainOptions {
                epochs: training.epochs,
                beam: training.beam,
                seed,
            };
            let report = ote::cross_validate_ote(&sentences, &config, &opts, *folds)?;
            let mut rows: Vec<(String, crate::eval::Prf)> = report
                .folds
                .iter()
                .enumerate()
                .map(|(i, p)| (format!("fold {}", i + 1), *p))
                .collect();
            rows.push(("mean".to_string(), report.mean));
            print_table(&Table::prf(&rows), csv.as_deref())
        }

        Command::Pol(PolCommand::Train {
            config,
            svm,
            train,
            model,
        }) => {
            require(&[train])?;
            let config = polarity_config(config.as_deref())?;
            let sentences = load_absa_jsonl(train)?;
            let data = labeled_opinions(&sentences);
            let opts = SvmOptions { c: svm.c, tol: svm.tol };
            let m = polarity::train_multiclass(&data, &config, &opts)?;
            log::info!("trained on {} opinions, {} features", data.len(), m.index.len());
            m.save(model)
        }

        Command::Pol(PolCommand::Predict { model, input, output }) => {
            require(&[model, input])?;
            let m = SvmModel::load(model)?;
            let mut sentences = load_absa_jsonl(input)?;
            let (mut correct, mut labeled) = (0usize, 0usize);
            for s in &mut sentences {
                let predicted: Vec<_> = s.opinions.iter().map(|o| m.predict(s, o)).collect();
                for (o, p) in s.opinions.iter_mut().zip(predicted) {
                    if let Some(gold) = o.polarity {
                        labeled += 1;
                        correct += usize::from(gold == p);
                    }
                    o.polarity = Some(p);
                }
            }
            if labeled > 0 {
                log::info!("accuracy against input labels: {:.4}", correct as f64 / labeled as f64);
            }
            write_sentences(output, &sentences)
        }

        Command::Pol(PolCommand::Cv {
            config,
            svm,
            folds,
            csv,
            data,
        }) => {
            require(&[data])?;
            let config = polarity_config(config.as_deref())?;
            let sentences = load_absa_jsonl(data)?;
            let opts = SvmOptions { c: svm.c, tol: svm.tol };
            let report = polarity::cross_validate_polarity(&sentences, &config, &opts, *folds, seed)?;
            let baseline = polarity::cross_validate_majority(&sentences, *folds, seed)?;
            let mut table = Table::new(["System", "Accuracy"]);
            for (i, a) in report.folds.iter().enumerate() {
                table.push_row([format!("fold {}", i + 1), format!("{:.2}", 100.0 * a)]);
            }
            table.push_row(["mean".to_string(), format!("{:.2}", 100.0 * report.mean)]);
            table.push_row(["majority baseline".to_string(), format!("{:.2}", 100.0 * baseline.mean)]);
            print_table(&table, csv.as_deref())
        }

        Command::Pol(PolCommand::Ablate {
            configs,
            svm,
            folds,
            csv,
            data,
        }) => {
            require(&[configs, data])?;
            let named = crate::config::load_polarity_config_dir(configs)?;
            let sentences = load_absa_jsonl(data)?;
            let opts = SvmOptions { c: svm.c, tol: svm.tol };
            let table = polarity::ablation_run(&sentences, &named, &opts, *folds, seed)?;
            print_table(&table, csv.as_deref())
        }
    }
}
