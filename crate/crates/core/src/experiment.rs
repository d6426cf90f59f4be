//! Manifest-driven experiment runs: train, apply, score and compare a set of
//! systems on one corpus, writing models, responses and reports.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{parse_corpus, GrInstance, Sentence};
use crate::error::{Error, Result};
use crate::eval::{render_tables, score, significance, Group, Metric, ScoreReport, SignificanceResult, MIN_SHUFFLES};
use crate::synth::{GrammarSpec, SynthConfig};
use crate::system::{canonical_gold, response_corpus, train_system, Resources, SystemConfig};

pub const REPORT_FORMAT: &str = "grfinder-report";
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SHUFFLES: usize = 10_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub corpus: CorpusSource,
    /// Output directory, relative to the manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub runs: Vec<RunSpec>,
    #[serde(default)]
    pub comparisons: Vec<ComparisonSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusSource {
    Synth(SynthSource),
    Files { train: PathBuf, test: PathBuf },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthSource {
    /// Grammar spec file; the shipped default grammar when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_sentences")]
    pub sentences: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_sentences() -> usize {
    SynthConfig::default().sentences
}

fn default_train_fraction() -> f64 {
    SynthConfig::default().train_fraction
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSpec {
    pub name: String,
    #[serde(flatten)]
    pub config: SystemConfig,
    /// TBL template pack file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
    /// Baseline rule pack file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonSpec {
    pub a: String,
    pub b: String,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[serde(default = "default_group")]
    pub group: Group,
    #[serde(default = "default_shuffles")]
    pub shuffles: usize,
    /// Defaults to the experiment seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_metric() -> Metric {
    Metric::Fscore
}

fn default_group() -> Group {
    Group::Combined
}

fn default_shuffles() -> usize {
    DEFAULT_SHUFFLES
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(text)?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for run in &self.runs {
            let ok = !run.name.is_empty()
                && run.name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
                && !run.name.starts_with('.');
            if !ok {
                return Err(Error::invalid(format!("run name `{}` must be a plain file stem", run.name)));
            }
            if !names.insert(run.name.as_str()) {
                return Err(Error::invalid(format!("duplicate run name `{}`", run.name)));
            }
            run.config
                .validate()
                .map_err(|e| Error::invalid(format!("run `{}`: {e}", run.name)))?;
        }
        for c in &self.comparisons {
            for side in [&c.a, &c.b] {
                if !names.contains(side.as_str()) {
                    return Err(Error::invalid(format!("comparison refers to unknown run `{side}`")));
                }
            }
            if c.shuffles < MIN_SHUFFLES {
                return Err(Error::invalid(format!(
                    "comparison {} vs {}: at least {MIN_SHUFFLES} shuffles are required",
                    c.a, c.b
                )));
            }
        }
        if let CorpusSource::Synth(s) = &self.corpus {
            if s.sentences == 0 || !(s.train_fraction > 0.0 && s.train_fraction < 1.0) {
                return Err(Error::invalid(
                    "synthetic corpus needs sentences > 0 and train_fraction strictly between 0 and 1",
                ));
            }
        }
        Ok(())
    }
}

/// Overrides that take precedence over the manifest.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOptions {
    /// Replaces the manifest's corpus and comparison seeds.
    pub seed: Option<u64>,
    /// Used where neither the options nor the manifest give a seed.
    pub default_seed: Option<u64>,
    /// Replaces the manifest's output directory.
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusRecord {
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub train_sha256: String,
    pub test_sha256: String,
    pub train_sentences: usize,
    pub test_sentences: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub name: String,
    pub config: SystemConfig,
    /// Relative to the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub responses: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<ScoreReport>,
    /// Relations the response file could not anchor on chunk heads.
    pub unwritten_relations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonResult {
    pub a: String,
    pub b: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<SignificanceResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The deterministic part of an experiment's outcome; wall-clock times are
/// kept apart so reruns produce identical reports.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub format: String,
    pub version: String,
    pub manifest_sha256: String,
    pub corpus: CorpusRecord,
    pub runs: Vec<RunResult>,
    pub comparisons: Vec<ComparisonResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub runs: Vec<(String, f64)>,
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub record: RunRecord,
    pub timings: Timings,
    pub output: PathBuf,
}

impl RunRecord {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn to_text(&self) -> String {
        let scored: Vec<(&str, &ScoreReport)> = self
            .runs
            .iter()
            .filter_map(|r| r.scores.as_ref().map(|s| (r.name.as_str(), s)))
            .collect();
        let mut out = render_tables(&scored);
        for r in self.runs.iter().filter(|r| r.error.is_some()) {
            let _ = writeln!(out, "run {} failed: {}", r.name, r.error.as_deref().unwrap_or_default());
        }
        if !self.comparisons.is_empty() {
            let _ = writeln!(out, "comparisons");
        }
        for c in &self.comparisons {
            match (&c.result, &c.error) {
                (Some(s), _) => {
                    let _ = writeln!(
                        out,
                        "{} vs {}: {} {} difference {:+.4}, one-sided p = {:.4} ({} shuffles, seed {})",
                        c.a,
                        c.b,
                        s.group.as_str(),
                        s.metric.as_str(),
                        s.observed,
                        s.p_value,
                        s.shuffles,
                        s.seed
                    );
                }
                (None, e) => {
                    let _ = writeln!(out, "{} vs {}: not compared: {}", c.a, c.b, e.as_deref().unwrap_or_default());
                }
            }
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

struct Trained {
    scores: ScoreReport,
    model: String,
    responses: String,
    unwritten: usize,
    found: Vec<Vec<GrInstance>>,
}

fn execute(run: &RunSpec, base: &Path, train: &[Sentence], test: &[Sentence], gold: &[Vec<GrInstance>]) -> Result<Trained> {
    let templates = run.templates.as_ref().map(|p| read(&resolve(base, p))).transpose()?;
    let rules = run.rules.as_ref().map(|p| read(&resolve(base, p))).transpose()?;
    let resources = Resources::load(templates.as_deref(), rules.as_deref())?;
    let system = train_system(&run.config, train, &resources)?;
    let found = system.apply(test)?;
    let scores = score(gold, &found)?;
    let (responses, unwritten) = response_corpus(test, &found);
    Ok(Trained {
        scores,
        model: system.to_json()? + "\n",
        responses,
        unwritten,
        found,
    })
}

/// Runs the manifest at `path` and writes `report.json`, `report.txt`,
/// `timings.json`, `models/` and `responses/` into its output directory.
pub fn run_experiment(path: &Path, options: &ExperimentOptions) -> Result<Experiment> {
    let start = Instant::now();
    let text = read(path)?;
    let manifest = Manifest::from_json(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    let output = match (&options.output, &manifest.output) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => resolve(&base, o),
        (None, None) => base.join("out").join(stem),
    };
    let fallback = options.default_seed.unwrap_or(DEFAULT_SEED);

    let (train_text, test_text, corpus_seed, source) = match &manifest.corpus {
        CorpusSource::Synth(s) => {
            let spec = match &s.spec {
                Some(p) => GrammarSpec::from_json(&read(&resolve(&base, p))?)?,
                None => GrammarSpec::default_spec(),
            };
            let seed = options.seed.or(s.seed).unwrap_or(fallback);
            let (tr, te) = spec.generate(&SynthConfig {
                seed,
                sentences: s.sentences,
                train_fraction: s.train_fraction,
            })?;
            (tr, te, Some(seed), "synth".to_string())
        }
        CorpusSource::Files { train, test } => (
            read(&resolve(&base, train))?,
            read(&resolve(&base, test))?,
            None,
            "files".to_string(),
        ),
    };
    let train = parse_corpus(&train_text)?;
    let test = parse_corpus(&test_text)?;
    let gold = canonical_gold(&test);

    let outcomes: Vec<(Result<Trained>, f64)> = manifest
        .runs
        .par_iter()
        .map(|run| {
            let t = Instant::now();
            let r = execute(run, &base, &train, &test, &gold);
            (r, t.elapsed().as_secs_f64())
        })
        .collect();

    fs::create_dir_all(output.join("models"))?;
    fs::create_dir_all(output.join("responses"))?;
    if source == "synth" {
        fs::create_dir_all(output.join("corpus"))?;
        fs::write(output.join("corpus/train.crp"), &train_text)?;
        fs::write(output.join("corpus/test.crp"), &test_text)?;
    }

    let mut runs = Vec::new();
    let mut timings = Vec::new();
    for (run, (outcome, secs)) in manifest.runs.iter().zip(&outcomes) {
        timings.push((run.name.clone(), *secs));
        let mut result = RunResult {
            name: run.name.clone(),
            config: run.config.clone(),
            model: None,
            responses: None,
            scores: None,
            unwritten_relations: 0,
            error: None,
        };
        match outcome {
            Ok(t) => {
                let model = format!("models/{}.json", run.name);
                let responses = format!("responses/{}.crp", run.name);
                fs::write(output.join(&model), &t.model)?;
                fs::write(output.join(&responses), &t.responses)?;
                result.model = Some(model);
                result.responses = Some(responses);
                result.scores = Some(t.scores.clone());
                result.unwritten_relations = t.unwritten;
            }
            Err(e) => result.error = Some(e.to_string()),
        }
        runs.push(result);
    }

    let found = |name: &str| -> std::result::Result<&Vec<Vec<GrInstance>>, String> {
        let i = manifest.runs.iter().position(|r| r.name == name).expect("validated");
        outcomes[i].0.as_ref().map(|t| &t.found).map_err(|_| format!("run `{name}` failed"))
    };
    let comparisons = manifest
        .comparisons
        .iter()
        .map(|c| {
            let seed = options.seed.or(c.seed).unwrap_or(corpus_seed.unwrap_or(fallback));
            let outcome = found(&c.a)
                .and_then(|a| found(&c.b).map(|b| (a, b)))
                .and_then(|(a, b)| significance(&gold, a, b, c.metric, c.group, c.shuffles, seed).map_err(|e| e.to_string()));
            let (result, error) = match outcome {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e)),
            };
            ComparisonResult {
                a: c.a.clone(),
                b: c.b.clone(),
                result,
                error,
            }
        })
        .collect();

    let record = RunRecord {
        format: REPORT_FORMAT.into(),
        version: crate::VERSION.into(),
        manifest_sha256: sha256_hex(text.as_bytes()),
        corpus: CorpusRecord {
            source,
            seed: corpus_seed,
            train_sha256: sha256_hex(train_text.as_bytes()),
            test_sha256: sha256_hex(test_text.as_bytes()),
            train_sentences: train.len(),
            test_sentences: test.len(),
        },
        runs,
        comparisons,
    };
    let timings = Timings {
        total_seconds: start.elapsed().as_secs_f64(),
        runs: timings,
    };
    fs::write(output.join("report.json"), record.to_json()?)?;
    fs::write(output.join("report.txt"), record.to_text())?;
    fs::write(output.join("timings.json"), serde_json::to_string_pretty(&timings)? + "\n")?;
    Ok(Experiment { record, timings, output })
}
