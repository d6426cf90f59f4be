//! A complete relation finder: stray handling, search space, features and a
//! learner (or a hand-written rule pack), trained and applied end to end.
//!
//! Output relations are expressed over the canonical layout, in which every
//! stray lexeme is its own chunk, so runs with different stray policies can
//! be scored against the same gold.

use serde::{Deserialize, Serialize};

use crate::baseline::{apply_ruleset, parse_ruleset, simple6};
use crate::candidates::SpacePolicy;
use crate::corpus::{serialize_with, ChunkKind, GrInstance, Sentence, StrayPolicy};
use crate::error::{Error, Result};
use crate::features::{corpus_samples, FeatureConfig};
use crate::mbl::Weighting;
use crate::partition::{train_partitioned, LearnerConfig, PartitionScheme, PartitionedModel, RoutingOptions};
use crate::tbl::{default_templates, parse_templates, InitialState, Rule, TblConfig, Template};

/// The layout all system output and gold relations are compared in.
pub fn canonical(sentence: &Sentence) -> Sentence {
    sentence.normalize_strays(StrayPolicy::MbOneWordChunks)
}

/// Gold relations to verbs, per sentence, in the canonical layout.
pub fn canonical_gold(sentences: &[Sentence]) -> Vec<Vec<GrInstance>> {
    sentences.iter().map(|s| canonical(s).verb_gold()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    Ib1,
    Igtree,
    Tbl,
    Baseline,
}

impl std::str::FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ib1" | "mbl" | "mbl-ib1" => Ok(LearnerKind::Ib1),
            "igtree" | "mbl-igtree" => Ok(LearnerKind::Igtree),
            "tbl" => Ok(LearnerKind::Tbl),
            "baseline" => Ok(LearnerKind::Baseline),
            _ => Err(Error::invalid(format!("unknown learner `{s}`"))),
        }
    }
}

/// Either a preset name (`mb`, `tr`, `full`) or a full feature configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureSpec {
    Preset(String),
    Custom(FeatureConfig),
}

impl FeatureSpec {
    pub fn resolve(&self) -> Result<FeatureConfig> {
        let config = match self {
            FeatureSpec::Preset(name) => FeatureConfig::preset(name)?,
            FeatureSpec::Custom(c) => c.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub learner: LearnerKind,
    pub space_policy: SpacePolicy,
    /// Defaults to the policy's own stray handling; any other value is rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stray_policy: Option<StrayPolicy>,
    pub features: FeatureSpec,
    #[serde(default)]
    pub partition: PartitionScheme,
    #[serde(default, flatten)]
    pub routing: RoutingOptions,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default = "default_threshold")]
    pub threshold: usize,
    #[serde(default)]
    pub initial: InitialState,
}

fn default_threshold() -> usize {
    TblConfig::default().threshold
}

impl SystemConfig {
    pub fn new(learner: LearnerKind, space_policy: SpacePolicy, features: FeatureSpec) -> Self {
        SystemConfig {
            learner,
            space_policy,
            stray_policy: None,
            features,
            partition: PartitionScheme::none(),
            routing: RoutingOptions::default(),
            weighting: Weighting::InfoGain,
            threshold: default_threshold(),
            initial: InitialState::AllNone,
        }
    }

    pub fn stray(&self) -> StrayPolicy {
        self.stray_policy.unwrap_or(self.space_policy.stray_policy())
    }

    pub fn validate(&self) -> Result<()> {
        if self.stray() != self.space_policy.stray_policy() {
            return Err(Error::invalid(format!(
                "space policy `{}` requires stray policy `{}`, not `{}`",
                self.space_policy.as_str(),
                self.space_policy.stray_policy().as_str(),
                self.stray().as_str()
            )));
        }
        if self.threshold < 1 {
            return Err(Error::invalid("rule threshold must be at least 1"));
        }
        self.partition.validate()?;
        self.features.resolve().map(|_| ())
    }

    fn learner_config(&self) -> Option<LearnerConfig> {
        match self.learner {
            LearnerKind::Ib1 => Some(LearnerConfig::Ib1 { weighting: self.weighting }),
            LearnerKind::Igtree => Some(LearnerConfig::Igtree { weighting: self.weighting }),
            LearnerKind::Tbl => Some(LearnerConfig::Tbl {
                threshold: self.threshold,
                initial: self.initial,
            }),
            LearnerKind::Baseline => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrainedModel {
    Learned(PartitionedModel),
    Rules { rules: Vec<Rule> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedSystem {
    pub format: String,
    pub version: String,
    pub config: SystemConfig,
    pub model: TrainedModel,
}

pub const SYSTEM_FORMAT: &str = "grfinder-system";

/// Where a run's learner resources come from.
#[derive(Clone, Debug, Default)]
pub struct Resources {
    /// TBL template pack; the shipped pack when absent.
    pub templates: Option<Vec<Template>>,
    /// Baseline rule pack; the shipped six rules when absent.
    pub rules: Option<Vec<Rule>>,
}

impl Resources {
    pub fn load(templates: Option<&str>, rules: Option<&str>) -> Result<Self> {
        Ok(Resources {
            templates: templates.map(parse_templates).transpose()?,
            rules: rules.map(parse_ruleset).transpose()?,
        })
    }
}

pub fn train_system(config: &SystemConfig, train: &[Sentence], resources: &Resources) -> Result<TrainedSystem> {
    config.validate()?;
    let model = match config.learner_config() {
        None => TrainedModel::Rules {
            rules: resources.rules.clone().unwrap_or_else(simple6),
        },
        Some(learner) => {
            let features = config.features.resolve()?;
            let normalized: Vec<Sentence> = train.iter().map(|s| s.normalize_strays(config.stray())).collect();
            let samples = corpus_samples(&normalized, config.space_policy, &features);
            let templates = resources.templates.clone().unwrap_or_else(default_templates);
            TrainedModel::Learned(train_partitioned(
                &normalized,
                &samples,
                &features.positions(),
                &config.partition,
                learner,
                &templates,
                config.routing,
            )?)
        }
    };
    Ok(TrainedSystem {
        format: SYSTEM_FORMAT.into(),
        version: crate::VERSION.into(),
        config: config.clone(),
        model,
    })
}

impl TrainedSystem {
    /// Relations found in each sentence, in the canonical layout.
    pub fn apply(&self, sentences: &[Sentence]) -> Result<Vec<Vec<GrInstance>>> {
        let stray = self.config.stray();
        let normalized: Vec<Sentence> = sentences.iter().map(|s| s.normalize_strays(stray)).collect();
        let mut found: Vec<Vec<GrInstance>> = vec![Vec::new(); sentences.len()];
        match &self.model {
            TrainedModel::Rules { rules } => {
                for (out, s) in found.iter_mut().zip(&normalized) {
                    *out = apply_ruleset(rules, s, self.config.space_policy)?;
                }
            }
            TrainedModel::Learned(model) => {
                let features = self.config.features.resolve()?;
                let samples = corpus_samples(&normalized, self.config.space_policy, &features);
                let labels = model.predict(&normalized, &samples)?;
                for (s, l) in samples.iter().zip(labels) {
                    if !l.is_none() {
                        found[s.candidate.sentence].push(GrInstance::new(s.candidate.source, s.candidate.target, l));
                    }
                }
            }
        }
        Ok(normalized
            .iter()
            .zip(found)
            .map(|(n, grs)| n.remap_to(&grs, &canonical(n)))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut system: TrainedSystem = serde_json::from_str(text)?;
        if system.format != SYSTEM_FORMAT {
            return Err(Error::invalid(format!("not a trained system (format `{}`)", system.format)));
        }
        if let TrainedModel::Learned(m) = &mut system.model {
            m.prepare();
        }
        Ok(system)
    }
}

/// Writes responses as a corpus whose relation lines replace the gold.
///
/// The file format can only anchor relations on chunk heads, so relations
/// touching a stray lexeme are left out; their number is returned.
pub fn response_corpus(sentences: &[Sentence], responses: &[Vec<GrInstance>]) -> (String, usize) {
    let mut dropped = 0;
    let canon: Vec<Sentence> = sentences.iter().map(canonical).collect();
    let kept: Vec<Vec<GrInstance>> = canon
        .iter()
        .zip(responses)
        .map(|(s, grs)| {
            let ok: Vec<GrInstance> = grs
                .iter()
                .filter(|g| {
                    [g.source, g.target]
                        .iter()
                        .all(|&c| s.chunks.get(c).is_some_and(|c| c.kind != ChunkKind::Stray))
                })
                .copied()
                .collect();
            dropped += grs.len() - ok.len();
            ok
        })
        .collect();
    (serialize_with(&canon, &kept), dropped)
}

/// Relations of a response corpus, per sentence, in the canonical layout.
pub fn read_responses(sentences: &[Sentence]) -> Vec<Vec<GrInstance>> {
    canonical_gold(sentences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;
    use crate::eval::score;
    use crate::synth::{GrammarSpec, SynthConfig};

    fn corpus() -> (Vec<Sentence>, Vec<Sentence>) {
        let (train, test) = GrammarSpec::default_spec()
            .generate(&SynthConfig {
                seed: 3,
                sentences: 120,
                train_fraction: 0.75,
            })
            .unwrap();
        (parse_corpus(&train).unwrap(), parse_corpus(&test).unwrap())
    }

    #[test]
    fn rejects_mismatched_stray_policy() {
        let mut c = SystemConfig::new(LearnerKind::Ib1, SpacePolicy::Tr3, FeatureSpec::Preset("tr".into()));
        c.validate().unwrap();
        c.stray_policy = Some(StrayPolicy::MbOneWordChunks);
        assert!(c.validate().is_err());
        let bad = SystemConfig::new(LearnerKind::Ib1, SpacePolicy::Tr3, FeatureSpec::Preset("xx".into()));
        assert!(bad.validate().is_err());
    }

    #[test]
    fn every_learner_trains_and_round_trips() {
        let (train, test) = corpus();
        let gold = canonical_gold(&test);
        for (learner, policy, preset) in [
            (LearnerKind::Ib1, SpacePolicy::MbVerbcross, "mb"),
            (LearnerKind::Igtree, SpacePolicy::MbVerbcross, "mb"),
            (LearnerKind::Tbl, SpacePolicy::Tr3, "tr"),
            (LearnerKind::Baseline, SpacePolicy::Tr3, "full"),
        ] {
            let config = SystemConfig::new(learner, policy, FeatureSpec::Preset(preset.into()));
            let system = train_system(&config, &train, &Resources::default()).unwrap();
            let out = system.apply(&test).unwrap();
            let report = score(&gold, &out).unwrap();
            assert!(report.combined.correct > 0, "{learner:?}");
            let back = TrainedSystem::from_json(&system.to_json().unwrap()).unwrap();
            assert_eq!(back.apply(&test).unwrap(), out);
            let (text, dropped) = response_corpus(&test, &out);
            let reread = read_responses(&parse_corpus(&text).unwrap());
            assert_eq!(
                reread.iter().map(Vec::len).sum::<usize>() + dropped,
                out.iter().map(Vec::len).sum::<usize>()
            );
        }
    }

    #[test]
    fn canonical_gold_keeps_every_verb_relation() {
        let (_, test) = corpus();
        let gold = canonical_gold(&test);
        let raw: usize = test.iter().map(|s| s.verb_gold().len()).sum();
        assert_eq!(gold.iter().map(Vec::len).sum::<usize>(), raw);
    }
}
