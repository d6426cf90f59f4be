//! Command-line front end: corpus synthesis, training, application, scoring,
//! significance testing and manifest-driven experiments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use grfinder::candidates::SpacePolicy;
use grfinder::corpus::{parse_corpus, Sentence, StrayPolicy};
use grfinder::eval::{render_tables, score, significance, Group, Metric};
use grfinder::experiment::{run_experiment, ExperimentOptions, DEFAULT_SEED, DEFAULT_SHUFFLES};
use grfinder::features::FeatureConfig;
use grfinder::partition::{ConflictPolicy, PartitionScheme, UnseenKey};
use grfinder::synth::{GrammarSpec, SynthConfig};
use grfinder::system::{canonical_gold, response_corpus, train_system, FeatureSpec, LearnerKind, Resources, SystemConfig, TrainedSystem};

const SEED_ENV: &str = "GRFINDER_SEED";

#[derive(Parser)]
#[command(name = "grfinder", version, about = "Find grammatical relations between chunks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic train/test corpus pair.
    Synth(SynthArgs),
    /// Train a system and write it as JSON.
    Train(TrainArgs),
    /// Label a corpus with a trained system and write the responses.
    Apply(ApplyArgs),
    /// Score a response corpus against a gold corpus.
    Score(ScoreArgs),
    /// Paired randomization test between two response corpora.
    Compare(CompareArgs),
    /// Execute an experiment manifest.
    Run(RunArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Grammar spec JSON; the shipped default grammar when absent.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = SynthConfig::default().sentences)]
    sentences: usize,
    #[arg(long, default_value_t = SynthConfig::default().train_fraction)]
    train_fraction: f64,
    /// Directory receiving train.crp and test.crp.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Training corpus.
    #[arg(long, alias = "corpus")]
    train: PathBuf,
    /// ib1, igtree, tbl or baseline.
    #[arg(long)]
    learner: String,
    /// tr3, tr-unbounded, mb-verbcross or mb-zerocross.
    #[arg(long)]
    policy: String,
    /// Stray handling; follows the policy family when absent.
    #[arg(long)]
    stray: Option<String>,
    /// Preset name (mb, tr, full), inline JSON, or a JSON file.
    #[arg(long)]
    features: Option<String>,
    /// Comma-separated partition components, or `none`.
    #[arg(long, default_value = "none")]
    partition: String,
    #[arg(long)]
    conflict: Option<String>,
    #[arg(long)]
    unseen: Option<String>,
    #[arg(long)]
    weighting: Option<String>,
    #[arg(long)]
    threshold: Option<usize>,
    #[arg(long)]
    initial: Option<String>,
    /// TBL template pack.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Baseline rule pack.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ApplyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, alias = "test")]
    corpus: PathBuf,
    /// Response corpus to write.
    #[arg(long)]
    out: PathBuf,
    /// Also score against the corpus's own relations.
    #[arg(long)]
    score: bool,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    response: PathBuf,
    /// Print JSON instead of tables.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    gold: PathBuf,
    /// Response corpus of system A.
    a: PathBuf,
    /// Response corpus of system B.
    b: PathBuf,
    #[arg(long, default_value = "fscore")]
    metric: String,
    #[arg(long, default_value = "combined")]
    group: String,
    #[arg(long, default_value_t = DEFAULT_SHUFFLES)]
    shuffles: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    manifest: PathBuf,
    /// Overrides every seed in the manifest.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the manifest's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(
            v.trim()
                .parse()
                .map_err(|_| input(format!("{SEED_ENV} must be an integer, got `{v}`")))?,
        )),
        Err(_) => Ok(None),
    }
}

fn input(msg: impl Into<String>) -> anyhow::Error {
    grfinder::Error::Invalid(msg.into()).into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(grfinder::Error::from)
        .with_context(|| format!("reading {}", path.display()))
}

fn read_corpus(path: &Path) -> Result<Vec<Sentence>> {
    parse_corpus(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(grfinder::Error::from)?;
    }
    fs::write(path, text)
        .map_err(grfinder::Error::from)
        .with_context(|| format!("writing {}", path.display()))
}

/// Parses a kebab-case enum value through its serde name.
fn kebab<T: DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| input(format!("unknown {what} `{s}`")))
}

fn feature_spec(arg: Option<&str>, learner: LearnerKind) -> Result<FeatureSpec> {
    let Some(arg) = arg else {
        let preset = match learner {
            LearnerKind::Ib1 | LearnerKind::Igtree => "mb",
            LearnerKind::Tbl => "tr",
            LearnerKind::Baseline => "full",
        };
        return Ok(FeatureSpec::Preset(preset.into()));
    };
    if FeatureConfig::preset(arg).is_ok() {
        return Ok(FeatureSpec::Preset(arg.into()));
    }
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read(Path::new(arg))?
    };
    let config: FeatureConfig = serde_json::from_str(&text).map_err(grfinder::Error::from)?;
    config.validate()?;
    Ok(FeatureSpec::Custom(config))
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(p) => GrammarSpec::from_json(&read(p)?)?,
        None => GrammarSpec::default_spec(),
    };
    let seed = args.seed.or(env_seed()?).unwrap_or(DEFAULT_SEED);
    let (train, test) = spec.generate(&SynthConfig {
        seed,
        sentences: args.sentences,
        train_fraction: args.train_fraction,
    })?;
    write(&args.out.join("train.crp"), &train)?;
    write(&args.out.join("test.crp"), &test)?;
    println!("wrote {} (seed {seed})", args.out.display());
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let learner: LearnerKind = args.learner.parse()?;
    let policy: SpacePolicy = args.policy.parse()?;
    let mut config = SystemConfig::new(learner, policy, feature_spec(args.features.as_deref(), learner)?);
    config.stray_policy = args.stray.as_deref().map(str::parse::<StrayPolicy>).transpose()?;
    config.partition = args.partition.parse::<PartitionScheme>()?;
    if let Some(c) = &args.conflict {
        config.routing.conflict = c.parse::<ConflictPolicy>()?;
    }
    if let Some(u) = &args.unseen {
        config.routing.unseen = kebab::<UnseenKey>("unseen-key policy", u)?;
    }
    if let Some(w) = &args.weighting {
        config.weighting = kebab("weighting", w)?;
    }
    if let Some(t) = args.threshold {
        config.threshold = t;
    }
    if let Some(i) = &args.initial {
        config.initial = kebab("initial state", i)?;
    }
    let templates = args.templates.as_deref().map(read).transpose()?;
    let rules = args.rules.as_deref().map(read).transpose()?;
    let resources = Resources::load(templates.as_deref(), rules.as_deref())?;
    let corpus = read_corpus(&args.train)?;
    let system = train_system(&config, &corpus, &resources)?;
    write(&args.out, &(system.to_json()? + "\n"))?;
    println!(
        "trained {} on {} sentences; wrote {}",
        args.learner,
        corpus.len(),
        args.out.display()
    );
    Ok(())
}

fn apply(args: ApplyArgs) -> Result<()> {
    let system = TrainedSystem::from_json(&read(&args.model)?).with_context(|| format!("loading {}", args.model.display()))?;
    let corpus = read_corpus(&args.corpus)?;
    let found = system.apply(&corpus)?;
    let (text, unwritten) = response_corpus(&corpus, &found);
    write(&args.out, &text)?;
    println!("labelled {} sentences; wrote {}", corpus.len(), args.out.display());
    if unwritten > 0 {
        println!("{unwritten} relations touching stray lexemes could not be written");
    }
    if args.score {
        let report = score(&canonical_gold(&corpus), &found)?;
        print!("{}", render_tables(&[("response", &report)]));
    }
    Ok(())
}

fn responses(gold: &[Sentence], path: &Path) -> Result<Vec<Vec<grfinder::corpus::GrInstance>>> {
    let response = read_corpus(path)?;
    let texts = |s: &[Sentence]| s.iter().map(|x| x.text()).collect::<Vec<_>>();
    if texts(&response) != texts(gold) {
        return Err(input(format!("{} does not hold the gold corpus's sentences", path.display())));
    }
    Ok(canonical_gold(&response))
}

fn score_cmd(args: ScoreArgs) -> Result<()> {
    let gold = read_corpus(&args.gold)?;
    let found = responses(&gold, &args.response)?;
    let report = score(&canonical_gold(&gold), &found)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(grfinder::Error::from)?);
    } else {
        print!("{}", render_tables(&[("response", &report)]));
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let gold = read_corpus(&args.gold)?;
    let a = responses(&gold, &args.a)?;
    let b = responses(&gold, &args.b)?;
    let metric: Metric = args.metric.parse()?;
    let group: Group = args.group.parse()?;
    let seed = args.seed.or(env_seed()?).unwrap_or(DEFAULT_SEED);
    let result = significance(&canonical_gold(&gold), &a, &b, metric, group, args.shuffles, seed)?;
    println!("{}", serde_json::to_string_pretty(&result).map_err(grfinder::Error::from)?);
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let options = ExperimentOptions {
        seed: args.seed,
        default_seed: env_seed()?,
        output: args.out,
    };
    let experiment = run_experiment(&args.manifest, &options).with_context(|| format!("running {}", args.manifest.display()))?;
    print!("{}", experiment.record.to_text());
    println!("reports written to {}", experiment.output.display());
    Ok(())
}

/// 1 for problems with the user's input, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<grfinder::Error>() {
        Some(
            grfinder::Error::Parse { .. }
            | grfinder::Error::Annotation { .. }
            | grfinder::Error::Invalid(_)
            | grfinder::Error::Io(_)
            | grfinder::Error::Json(_),
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = std::panic::catch_unwind(|| match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Apply(a) => apply(a),
        Command::Score(a) => score_cmd(a),
        Command::Compare(a) => compare(a),
        Command::Run(a) => run(a),
    });
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(2),
    }
}
