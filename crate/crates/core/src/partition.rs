//! Training and predicting on disjoint slices of the candidate data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{GrLabel, Sentence};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, Position, Sample};
use crate::mbl::{atomize, train_ib1, train_igtree, MblModel, Weighting};
use crate::tbl::{self, InitialState, RuleList, TblConfig, Template};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionComponent {
    SourceChunkKind,
    /// One binary (label vs none) model per relation label.
    RelationType,
    Direction,
    AbsLengthCategory,
    RelativeVerbCategory,
}

impl PartitionComponent {
    pub const ALL: [PartitionComponent; 5] = [
        PartitionComponent::SourceChunkKind,
        PartitionComponent::RelationType,
        PartitionComponent::Direction,
        PartitionComponent::AbsLengthCategory,
        PartitionComponent::RelativeVerbCategory,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PartitionComponent::SourceChunkKind => "source-chunk-kind",
            PartitionComponent::RelationType => "relation-type",
            PartitionComponent::Direction => "direction",
            PartitionComponent::AbsLengthCategory => "abs-length-category",
            PartitionComponent::RelativeVerbCategory => "relative-verb-category",
        }
    }
}

impl FromStr for PartitionComponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PartitionComponent::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown partition component `{s}`")))
    }
}

impl fmt::Display for PartitionComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered partition components; empty means unpartitioned.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartitionScheme {
    pub components: Vec<PartitionComponent>,
}

impl PartitionScheme {
    pub fn none() -> Self {
        PartitionScheme::default()
    }

    pub fn of(components: &[PartitionComponent]) -> Self {
        PartitionScheme {
            components: components.to_vec(),
        }
    }

    pub fn by_relation(&self) -> bool {
        self.components.contains(&PartitionComponent::RelationType)
    }

    pub fn validate(&self) -> Result<()> {
        let distinct: BTreeSet<_> = self.components.iter().collect();
        if distinct.len() != self.components.len() {
            return Err(Error::invalid("partition scheme repeats a component"));
        }
        Ok(())
    }

    /// The scheme with only the relation-type component kept, if present.
    fn relation_only(&self) -> PartitionScheme {
        PartitionScheme {
            components: self
                .components
                .iter()
                .copied()
                .filter(|c| *c == PartitionComponent::RelationType)
                .collect(),
        }
    }
}

/// Comma-separated component names; `none` or the empty string is unpartitioned.
impl FromStr for PartitionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(PartitionScheme::none());
        }
        let scheme = PartitionScheme {
            components: s.split(',').map(|c| c.trim().parse()).collect::<Result<_>>()?,
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

/// Routing key of a candidate. Relation type does not contribute: it selects
/// models within a key rather than splitting the data.
pub fn partition_key(sentence: &Sentence, sample: &Sample, scheme: &PartitionScheme) -> String {
    let c = &sample.candidate;
    let parts: Vec<String> = scheme
        .components
        .iter()
        .filter_map(|comp| match comp {
            PartitionComponent::SourceChunkKind => Some(sentence.chunk(c.source).kind.as_str().to_string()),
            PartitionComponent::RelationType => None,
            PartitionComponent::Direction => Some(c.direction.as_str().to_string()),
            PartitionComponent::AbsLengthCategory => Some(format!("{}{}", c.direction.as_str(), c.abs_length)),
            PartitionComponent::RelativeVerbCategory => Some(c.rel_category.as_str().to_string()),
        })
        .collect();
    if parts.is_empty() {
        "*".to_string()
    } else {
        parts.join("/")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictPolicy {
    /// The label seen most often in training wins; ties go to the smaller name.
    #[default]
    Priority,
    /// The label declared first in the label inventory wins.
    FirstWins,
    NoneOnConflict,
}

impl FromStr for ConflictPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "priority" => Ok(ConflictPolicy::Priority),
            "first-wins" => Ok(ConflictPolicy::FirstWins),
            "none-on-conflict" => Ok(ConflictPolicy::NoneOnConflict),
            _ => Err(Error::invalid(format!("unknown conflict policy `{s}`"))),
        }
    }
}

/// What to predict for a candidate whose key had no training data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnseenKey {
    #[default]
    None,
    /// Use a model trained on all the data.
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum LearnerConfig {
    Ib1 {
        #[serde(default)]
        weighting: Weighting,
    },
    Igtree {
        #[serde(default)]
        weighting: Weighting,
    },
    Tbl {
        #[serde(default = "default_threshold")]
        threshold: usize,
        #[serde(default)]
        initial: InitialState,
    },
}

fn default_threshold() -> usize {
    TblConfig::default().threshold
}

impl LearnerConfig {
    pub fn ib1() -> Self {
        LearnerConfig::Ib1 {
            weighting: Weighting::InfoGain,
        }
    }

    pub fn igtree() -> Self {
        LearnerConfig::Igtree {
            weighting: Weighting::InfoGain,
        }
    }

    pub fn tbl() -> Self {
        let d = TblConfig::default();
        LearnerConfig::Tbl {
            threshold: d.threshold,
            initial: d.initial,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerConfig::Ib1 { .. } => "ib1",
            LearnerConfig::Igtree { .. } => "igtree",
            LearnerConfig::Tbl { .. } => "tbl",
        }
    }
}

impl FromStr for LearnerConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ib1" | "mbl" | "mbl-ib1" => Ok(LearnerConfig::ib1()),
            "igtree" | "mbl-igtree" => Ok(LearnerConfig::igtree()),
            "tbl" => Ok(LearnerConfig::tbl()),
            _ => Err(Error::invalid(format!("unknown learner `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    Mbl { model: MblModel },
    Tbl { rules: RuleList },
}

impl Model {
    pub fn prepare(&mut self) {
        if let Model::Mbl { model } = self {
            model.prepare();
        }
    }

    fn predict_batch(&self, samples: &[&Sample], positions: &[Position]) -> Result<Vec<GrLabel>> {
        match self {
            Model::Mbl { model } => samples.par_iter().map(|s| model.classify(&s.features.values)).collect(),
            Model::Tbl { rules } => {
                let compiled = rules.compile(positions)?;
                Ok(samples
                    .iter()
                    .map(|s| RuleList::label_one(&compiled, rules.initial_label, s))
                    .collect())
            }
        }
    }
}

fn train_one(
    samples: &[&Sample],
    class_of: &dyn Fn(&Sample) -> GrLabel,
    positions: &[Position],
    learner: LearnerConfig,
    templates: &[Template],
) -> Result<Model> {
    let names: Vec<String> = positions.iter().map(ToString::to_string).collect();
    match learner {
        LearnerConfig::Ib1 { weighting } | LearnerConfig::Igtree { weighting } => {
            let vectors: Vec<FeatureVector> = samples
                .iter()
                .map(|s| FeatureVector {
                    values: s.features.values.clone(),
                    class: class_of(s),
                })
                .collect();
            let vectors = atomize(&vectors);
            let model = match learner {
                LearnerConfig::Ib1 { .. } => MblModel::Ib1(train_ib1(names, &vectors, weighting)?),
                _ => MblModel::Igtree(train_igtree(names, &vectors, weighting)?),
            };
            Ok(Model::Mbl { model })
        }
        LearnerConfig::Tbl { threshold, initial } => {
            let relabeled: Vec<Sample> = samples
                .iter()
                .map(|s| {
                    let mut s = (*s).clone();
                    s.features.class = class_of(&s);
                    s
                })
                .collect();
            let learned = tbl::learn(&relabeled, positions, templates, TblConfig { threshold, initial })?;
            Ok(Model::Tbl { rules: learned.rules })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionedModel {
    pub scheme: PartitionScheme,
    pub learner: LearnerConfig,
    pub positions: Vec<Position>,
    /// Key → model; under relation-type schemes, key → label → binary model.
    pub models: BTreeMap<String, BTreeMap<String, Model>>,
    /// Labels by descending training frequency, then name.
    pub priority: Vec<GrLabel>,
    pub conflict: ConflictPolicy,
    pub unseen: UnseenKey,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<Box<PartitionedModel>>,
}

/// Inner map key for a non-relation model.
const ALL_LABELS: &str = "*";

fn label_priority(samples: &[Sample]) -> Vec<GrLabel> {
    let mut counts: BTreeMap<GrLabel, usize> = BTreeMap::new();
    for s in samples {
        if !s.gold().is_none() {
            *counts.entry(s.gold()).or_insert(0) += 1;
        }
    }
    let mut labels: Vec<(GrLabel, usize)> = counts.into_iter().collect();
    labels.sort_by(|(la, a), (lb, b)| b.cmp(a).then_with(|| la.cmp_by_name(lb)));
    labels.into_iter().map(|(l, _)| l).collect()
}

/// Options that shape prediction rather than training.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingOptions {
    #[serde(default)]
    pub conflict: ConflictPolicy,
    #[serde(default)]
    pub unseen: UnseenKey,
}

/// Trains one model per observed key (per key and label under relation-type schemes).
pub fn train_partitioned(
    sentences: &[Sentence],
    samples: &[Sample],
    positions: &[Position],
    scheme: &PartitionScheme,
    learner: LearnerConfig,
    templates: &[Template],
    routing: RoutingOptions,
) -> Result<PartitionedModel> {
    if samples.is_empty() {
        return Err(Error::EmptyBase);
    }
    scheme.validate()?;
    let priority = label_priority(samples);
    let mut groups: BTreeMap<String, Vec<&Sample>> = BTreeMap::new();
    for s in samples {
        let sentence = sentences
            .get(s.candidate.sentence)
            .ok_or_else(|| Error::invalid("sample refers to a missing sentence"))?;
        groups.entry(partition_key(sentence, s, scheme)).or_default().push(s);
    }

    let mut models = BTreeMap::new();
    for (key, members) in &groups {
        let mut inner = BTreeMap::new();
        if scheme.by_relation() {
            for &label in &priority {
                let binary = move |s: &Sample| if s.gold() == label { label } else { GrLabel::None };
                inner.insert(
                    label.as_str().to_string(),
                    train_one(members, &binary, positions, learner, templates)?,
                );
            }
        } else {
            inner.insert(
                ALL_LABELS.to_string(),
                train_one(members, &Sample::gold, positions, learner, templates)?,
            );
        }
        models.insert(key.clone(), inner);
    }

    let global = match routing.unseen {
        UnseenKey::Global if scheme.components.iter().any(|c| *c != PartitionComponent::RelationType) => {
            let inner_routing = RoutingOptions {
                unseen: UnseenKey::None,
                ..routing
            };
            Some(Box::new(train_partitioned(
                sentences,
                samples,
                positions,
                &scheme.relation_only(),
                learner,
                templates,
                inner_routing,
            )?))
        }
        _ => None,
    };

    Ok(PartitionedModel {
        scheme: scheme.clone(),
        learner,
        positions: positions.to_vec(),
        models,
        priority,
        conflict: routing.conflict,
        unseen: routing.unseen,
        global,
    })
}

/// Picks one label from the binary models' claims.
pub fn resolve_conflict(claims: &[GrLabel], policy: ConflictPolicy, priority: &[GrLabel]) -> GrLabel {
    match claims {
        [] => GrLabel::None,
        [one] => *one,
        _ => match policy {
            ConflictPolicy::NoneOnConflict => GrLabel::None,
            ConflictPolicy::FirstWins => *claims.iter().min().expect("non-empty"),
            ConflictPolicy::Priority => *claims
                .iter()
                .min_by_key(|l| priority.iter().position(|p| p == *l).unwrap_or(usize::MAX))
                .expect("non-empty"),
        },
    }
}

impl PartitionedModel {
    pub fn prepare(&mut self) {
        for inner in self.models.values_mut() {
            inner.values_mut().for_each(Model::prepare);
        }
        if let Some(g) = &mut self.global {
            g.prepare();
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut m: PartitionedModel = serde_json::from_str(text)?;
        m.prepare();
        Ok(m)
    }

    /// One label per sample, in input order.
    pub fn predict(&self, sentences: &[Sentence], samples: &[Sample]) -> Result<Vec<GrLabel>> {
        let mut routed: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, s) in samples.iter().enumerate() {
            let sentence = sentences
                .get(s.candidate.sentence)
                .ok_or_else(|| Error::invalid("sample refers to a missing sentence"))?;
            routed.entry(partition_key(sentence, s, &self.scheme)).or_default().push(i);
        }
        let mut out = vec![GrLabel::None; samples.len()];
        for (key, idx) in routed {
            let batch: Vec<&Sample> = idx.iter().map(|&i| &samples[i]).collect();
            let labels = match self.models.get(&key) {
                Some(inner) => self.predict_key(inner, &batch)?,
                None => match &self.global {
                    Some(g) => {
                        let subset: Vec<Sample> = batch.iter().map(|s| (*s).clone()).collect();
                        g.predict(sentences, &subset)?
                    }
                    None => vec![GrLabel::None; batch.len()],
                },
            };
            for (i, l) in idx.into_iter().zip(labels) {
                out[i] = l;
            }
        }
        Ok(out)
    }

    fn predict_key(&self, inner: &BTreeMap<String, Model>, batch: &[&Sample]) -> Result<Vec<GrLabel>> {
        if let Some(model) = inner.get(ALL_LABELS) {
            return model.predict_batch(batch, &self.positions);
        }
        let mut claims: Vec<Vec<GrLabel>> = vec![Vec::new(); batch.len()];
        for model in inner.values() {
            for (c, l) in claims.iter_mut().zip(model.predict_batch(batch, &self.positions)?) {
                if !l.is_none() {
                    c.push(l);
                }
            }
        }
        Ok(claims
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort();
                c.dedup();
                resolve_conflict(&c, self.conflict, &self.priority)
            })
            .collect())
    }

    /// Number of trained models, counting per-label binary models separately.
    pub fn model_count(&self) -> usize {
        self.models.values().map(BTreeMap::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{Candidate, Direction, RelCategory};
    use crate::corpus::{Chunk, ChunkKind, Layout, Token};
    use crate::features::Value;
    use crate::mbl::MblModel;

    fn sentence() -> Sentence {
        let kinds = [ChunkKind::Noun, ChunkKind::Prep, ChunkKind::Verb];
        Sentence {
            tokens: (0..3)
                .map(|i| Token {
                    index: i,
                    form: format!("w{i}"),
                    pos: "NN".into(),
                    aux: Default::default(),
                })
                .collect(),
            chunks: kinds
                .iter()
                .enumerate()
                .map(|(i, &kind)| Chunk {
                    id: i,
                    kind,
                    tag: kind.as_str().into(),
                    span: (i, i + 1),
                    head: i,
                    explicit_head: false,
                    left_stray: vec![],
                    right_stray: vec![],
                })
                .collect(),
            gold: vec![],
            layout: Layout::Raw,
        }
    }

    fn sample(source: usize, values: &[&str], gold: GrLabel) -> Sample {
        Sample {
            candidate: Candidate {
                sentence: 0,
                source,
                target: 2,
                direction: Direction::Right,
                abs_length: 2 - source,
                verbs_crossed: 0,
                commas_crossed: 0,
                rel_category: RelCategory::R1,
            },
            features: FeatureVector {
                values: values.iter().map(|v| Value::atom(*v)).collect(),
                class: gold,
            },
        }
    }

    fn positions(n: usize) -> Vec<Position> {
        ["src.head-form", "src.head-pos", "tgt.head-form"][..n]
            .iter()
            .map(|p| p.parse().unwrap())
            .collect()
    }

    fn ib1_weights(model: &Model) -> Vec<f64> {
        match model {
            Model::Mbl { model: MblModel::Ib1(m) } => m.weights.clone(),
            _ => panic!("not ib1"),
        }
    }

    #[test]
    fn keys_follow_components() {
        let s = sentence();
        let noun = sample(0, &["a"], GrLabel::Subject);
        let prep = sample(1, &["a"], GrLabel::TimeMod);
        let kind = PartitionScheme::of(&[PartitionComponent::SourceChunkKind]);
        assert_eq!(partition_key(&s, &noun, &kind), "noun");
        assert_ne!(partition_key(&s, &noun, &kind), partition_key(&s, &prep, &kind));
        let geo: PartitionScheme = "direction,abs-length-category".parse().unwrap();
        assert_eq!(partition_key(&s, &noun, &geo), "right/right2");
        let rel: PartitionScheme = "relative-verb-category".parse().unwrap();
        assert_eq!(partition_key(&s, &noun, &rel), "R1");
        assert_eq!(partition_key(&s, &noun, &PartitionScheme::none()), "*");
        assert!("direction,direction".parse::<PartitionScheme>().is_err());
        assert!("colour".parse::<PartitionScheme>().is_err());
    }

    #[test]
    fn constant_key_matches_unpartitioned() {
        let s = [sentence()];
        let data = vec![
            sample(0, &["a", "x"], GrLabel::Subject),
            sample(0, &["b", "x"], GrLabel::Object),
            sample(0, &["b", "y"], GrLabel::None),
        ];
        let pos = positions(2);
        let flat = train_partitioned(
            &s,
            &data,
            &pos,
            &PartitionScheme::none(),
            LearnerConfig::ib1(),
            &[],
            Default::default(),
        )
        .unwrap();
        let kind = PartitionScheme::of(&[PartitionComponent::SourceChunkKind]);
        let part = train_partitioned(&s, &data, &pos, &kind, LearnerConfig::ib1(), &[], Default::default()).unwrap();
        assert_eq!(flat.predict(&s, &data).unwrap(), part.predict(&s, &data).unwrap());
        assert_eq!(flat.models["*"], part.models["noun"]);
    }

    #[test]
    fn partitions_get_their_own_weights() {
        let s = [sentence()];
        let mut data = Vec::new();
        for (a, b, l) in [
            ("x", "p", GrLabel::Subject),
            ("y", "p", GrLabel::Object),
            ("x", "q", GrLabel::Subject),
            ("y", "q", GrLabel::Object),
        ] {
            data.push(sample(0, &[a, b], l));
        }
        for (a, b, l) in [
            ("x", "p", GrLabel::TimeMod),
            ("x", "q", GrLabel::None),
            ("y", "p", GrLabel::TimeMod),
            ("y", "q", GrLabel::None),
        ] {
            data.push(sample(1, &[a, b], l));
        }
        let kind = PartitionScheme::of(&[PartitionComponent::SourceChunkKind]);
        let m = train_partitioned(&s, &data, &positions(2), &kind, LearnerConfig::ib1(), &[], Default::default()).unwrap();
        let noun = ib1_weights(&m.models["noun"]["*"]);
        let prep = ib1_weights(&m.models["prep"]["*"]);
        assert!(noun[0] > noun[1]);
        assert!(prep[1] > prep[0]);
        assert_eq!(m.predict(&s, &data).unwrap(), data.iter().map(Sample::gold).collect::<Vec<_>>());
    }

    #[test]
    fn relation_type_trains_binary_models() {
        let s = [sentence()];
        let data = vec![
            sample(0, &["a"], GrLabel::Subject),
            sample(0, &["b"], GrLabel::Object),
            sample(0, &["c"], GrLabel::TimeMod),
            sample(0, &["d"], GrLabel::None),
        ];
        let rel = PartitionScheme::of(&[PartitionComponent::RelationType]);
        let m = train_partitioned(&s, &data, &positions(1), &rel, LearnerConfig::ib1(), &[], Default::default()).unwrap();
        assert_eq!(m.model_count(), 3);
        assert_eq!(m.predict(&s, &data).unwrap(), data.iter().map(Sample::gold).collect::<Vec<_>>());
    }

    #[test]
    fn unseen_key_is_none_or_global() {
        let s = [sentence()];
        let data = vec![sample(0, &["a"], GrLabel::Subject), sample(0, &["b"], GrLabel::Subject)];
        let query = vec![sample(1, &["a"], GrLabel::None)];
        let kind = PartitionScheme::of(&[PartitionComponent::SourceChunkKind]);
        let strict = train_partitioned(&s, &data, &positions(1), &kind, LearnerConfig::ib1(), &[], Default::default()).unwrap();
        assert_eq!(strict.predict(&s, &query).unwrap(), vec![GrLabel::None]);
        let routing = RoutingOptions {
            unseen: UnseenKey::Global,
            ..Default::default()
        };
        let fallback = train_partitioned(&s, &data, &positions(1), &kind, LearnerConfig::ib1(), &[], routing).unwrap();
        assert_eq!(fallback.predict(&s, &query).unwrap(), vec![GrLabel::Subject]);
    }

    #[test]
    fn conflict_policies() {
        let claims = [GrLabel::TimeMod, GrLabel::Subject];
        let priority = [GrLabel::Subject, GrLabel::TimeMod];
        assert_eq!(resolve_conflict(&claims, ConflictPolicy::Priority, &priority), GrLabel::Subject);
        assert_eq!(resolve_conflict(&claims, ConflictPolicy::NoneOnConflict, &priority), GrLabel::None);
        let reversed = [GrLabel::TimeMod, GrLabel::Subject];
        assert_eq!(resolve_conflict(&claims, ConflictPolicy::Priority, &reversed), GrLabel::TimeMod);
        assert_eq!(resolve_conflict(&claims, ConflictPolicy::FirstWins, &reversed), GrLabel::Subject);
        assert_eq!(resolve_conflict(&[], ConflictPolicy::Priority, &priority), GrLabel::None);
    }

    #[test]
    fn model_json_round_trips() {
        let s = [sentence()];
        let data = vec![sample(0, &["a"], GrLabel::Subject), sample(1, &["b"], GrLabel::None)];
        let kind = PartitionScheme::of(&[PartitionComponent::SourceChunkKind]);
        for learner in [LearnerConfig::ib1(), LearnerConfig::igtree(), LearnerConfig::tbl()] {
            let t = tbl::parse_templates(r#"[{"id":0,"positions":["src.head-form"]}]"#).unwrap();
            let m = train_partitioned(&s, &data, &positions(1), &kind, learner, &t, Default::default()).unwrap();
            let back = PartitionedModel::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.predict(&s, &data).unwrap(), m.predict(&s, &data).unwrap());
        }
    }
}
