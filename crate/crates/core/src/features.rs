//! Symbolic feature vectors for candidates under the two context windows.
//!
//! Every position is named `slot.family`: `src.head-form`, `tgt+1.chunk-kind`,
//! `geo.rel`, `path.verbs`, and so on. Missing context (off the sentence edge,
//! or no chunk between source and target) is the atom `none`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::candidates::{generate_candidates, Candidate, SpacePolicy};
use crate::corpus::{Chunk, ChunkKind, GrLabel, Sentence};
use crate::error::{Error, Result};

pub const NONE: &str = "none";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    SrcMinus2,
    SrcMinus1,
    Src,
    SrcPlus1,
    TgtMinus1,
    Tgt,
    TgtPlus1,
    Between1,
    Between2,
    Geo,
    Path,
}

impl Slot {
    pub const ALL: [Slot; 11] = [
        Slot::SrcMinus2,
        Slot::SrcMinus1,
        Slot::Src,
        Slot::SrcPlus1,
        Slot::TgtMinus1,
        Slot::Tgt,
        Slot::TgtPlus1,
        Slot::Between1,
        Slot::Between2,
        Slot::Geo,
        Slot::Path,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Slot::SrcMinus2 => "src-2",
            Slot::SrcMinus1 => "src-1",
            Slot::Src => "src",
            Slot::SrcPlus1 => "src+1",
            Slot::TgtMinus1 => "tgt-1",
            Slot::Tgt => "tgt",
            Slot::TgtPlus1 => "tgt+1",
            Slot::Between1 => "btw1",
            Slot::Between2 => "btw2",
            Slot::Geo => "geo",
            Slot::Path => "path",
        }
    }

    /// True for slots that name a chunk, as opposed to the geometry and path pseudo-slots.
    pub fn is_chunk(self) -> bool {
        !matches!(self, Slot::Geo | Slot::Path)
    }

    /// Chunk id this slot names for `cand`, if it lies inside the sentence.
    fn resolve(self, cand: &Candidate, n_chunks: usize) -> Option<usize> {
        let (s, t) = (cand.source as isize, cand.target as isize);
        let toward = if t > s { 1 } else { -1 };
        let (id, limit_between) = match self {
            Slot::SrcMinus2 => (s - 2, false),
            Slot::SrcMinus1 => (s - 1, false),
            Slot::Src => (s, false),
            Slot::SrcPlus1 => (s + 1, false),
            Slot::TgtMinus1 => (t - 1, false),
            Slot::Tgt => (t, false),
            Slot::TgtPlus1 => (t + 1, false),
            Slot::Between1 => (s + toward, true),
            Slot::Between2 => (s + 2 * toward, true),
            Slot::Geo | Slot::Path => return None,
        };
        if limit_between && (id - s).abs() >= (t - s).abs() {
            return None;
        }
        (0..n_chunks as isize).contains(&id).then_some(id as usize)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Slot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Slot::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown slot `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    ChunkKind,
    HeadForm,
    HeadPos,
    /// Set of stray lexemes stored on the chunk (neighbor-attribute layout only).
    StrayForms,
    /// Set of estimated verb-chunk properties.
    VerbProperties,
    /// The head token's `attach` annotation.
    AttachmentEstimate,
    /// The head token's annotation under an arbitrary key.
    Aux(String),
    Dir,
    Len,
    Rel,
    Verbs,
    Commas,
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Family::ChunkKind => "chunk-kind".into(),
            Family::HeadForm => "head-form".into(),
            Family::HeadPos => "head-pos".into(),
            Family::StrayForms => "stray-forms".into(),
            Family::VerbProperties => "verb-properties".into(),
            Family::AttachmentEstimate => "attachment-estimate".into(),
            Family::Aux(k) => format!("aux:{k}"),
            Family::Dir => "dir".into(),
            Family::Len => "len".into(),
            Family::Rel => "rel".into(),
            Family::Verbs => "verbs".into(),
            Family::Commas => "commas".into(),
        }
    }

    pub fn is_set_valued(&self) -> bool {
        matches!(self, Family::StrayForms | Family::VerbProperties)
    }

    /// Which slot kinds accept this family.
    pub fn fits(&self, slot: Slot) -> bool {
        match self {
            Family::Dir | Family::Len | Family::Rel => slot == Slot::Geo,
            Family::Verbs | Family::Commas => slot == Slot::Path,
            _ => slot.is_chunk(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "chunk-kind" => Family::ChunkKind,
            "head-form" => Family::HeadForm,
            "head-pos" => Family::HeadPos,
            "stray-forms" => Family::StrayForms,
            "verb-properties" => Family::VerbProperties,
            "attachment-estimate" => Family::AttachmentEstimate,
            "dir" => Family::Dir,
            "len" => Family::Len,
            "rel" => Family::Rel,
            "verbs" => Family::Verbs,
            "commas" => Family::Commas,
            _ => match s.strip_prefix("aux:") {
                Some(key) if !key.is_empty() => Family::Aux(key.to_string()),
                _ => return Err(Error::invalid(format!("unknown attribute family `{s}`"))),
            },
        })
    }
}

impl Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Family {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub slot: Slot,
    pub family: Family,
}

impl Position {
    pub fn new(slot: Slot, family: Family) -> Self {
        Position { slot, family }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.slot, self.family)
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (slot, family) = s
            .split_once('.')
            .ok_or_else(|| Error::invalid(format!("position `{s}` is not slot.family")))?;
        let pos = Position::new(slot.parse()?, family.parse()?);
        if !pos.family.fits(pos.slot) {
            return Err(Error::invalid(format!("family `{family}` does not apply to slot `{slot}`")));
        }
        Ok(pos)
    }
}

impl Serialize for Position {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Position {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Atom(String),
    /// Sorted, deduplicated members.
    Set(Vec<String>),
}

impl Value {
    pub fn none() -> Self {
        Value::Atom(NONE.to_string())
    }

    pub fn atom(s: impl Into<String>) -> Self {
        Value::Atom(s.into())
    }

    pub fn set<I: IntoIterator<Item = S>, S: Into<String>>(items: I) -> Self {
        let set: BTreeSet<String> = items.into_iter().map(Into::into).collect();
        Value::Set(set.into_iter().collect())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Value::Atom(a) => Some(a),
            Value::Set(_) => None,
        }
    }

    pub fn contains(&self, member: &str) -> bool {
        match self {
            Value::Atom(a) => a == member && a != NONE,
            Value::Set(m) => m.iter().any(|x| x == member),
        }
    }

    /// Single-symbol encoding of a set value: `none` when empty, else members joined by `+`.
    pub fn atomized(&self) -> String {
        match self {
            Value::Atom(a) => a.clone(),
            Value::Set(m) if m.is_empty() => NONE.to_string(),
            Value::Set(m) => m.join("+"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => f.write_str(a),
            Value::Set(m) => write!(f, "{{{}}}", m.join(",")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Aligned with [`FeatureConfig::positions`].
    pub values: Vec<Value>,
    pub class: GrLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Window {
    /// Source, target, the source's immediate neighbors and its second left neighbor.
    #[serde(rename = "mb-window")]
    Mb,
    /// Source, target, the neighbors of both, and up to two chunks between them.
    #[serde(rename = "tr-window")]
    Tr,
}

impl Window {
    pub fn slots(self) -> &'static [Slot] {
        match self {
            Window::Mb => &[Slot::SrcMinus2, Slot::SrcMinus1, Slot::Src, Slot::SrcPlus1, Slot::Tgt],
            Window::Tr => &[
                Slot::SrcMinus1,
                Slot::Src,
                Slot::SrcPlus1,
                Slot::TgtMinus1,
                Slot::Tgt,
                Slot::TgtPlus1,
                Slot::Between1,
                Slot::Between2,
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    /// Direction and absolute chunk length.
    Absolute,
    /// Relative verb category.
    Relative,
    Both,
    None,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathCounts {
    #[serde(default)]
    pub verbs: bool,
    #[serde(default)]
    pub commas: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub window: Window,
    pub families: Vec<Family>,
    #[serde(default)]
    pub path_counts: PathCounts,
    pub geometry: Geometry,
}

impl FeatureConfig {
    /// Memory-based defaults: MB window, lexical families, both path counts, both geometries.
    pub fn mb_default() -> Self {
        FeatureConfig {
            window: Window::Mb,
            families: vec![Family::ChunkKind, Family::HeadForm, Family::HeadPos],
            path_counts: PathCounts { verbs: true, commas: true },
            geometry: Geometry::Both,
        }
    }

    /// Transformation-rule defaults: TR window, stray and verb-property sets, absolute geometry.
    pub fn tr_default() -> Self {
        FeatureConfig {
            window: Window::Tr,
            families: vec![
                Family::ChunkKind,
                Family::HeadForm,
                Family::HeadPos,
                Family::StrayForms,
                Family::VerbProperties,
                Family::AttachmentEstimate,
            ],
            path_counts: PathCounts::default(),
            geometry: Geometry::Absolute,
        }
    }

    /// Everything the TR window can see; the hand-written rule packs are evaluated against this.
    pub fn full() -> Self {
        FeatureConfig {
            geometry: Geometry::Both,
            path_counts: PathCounts { verbs: true, commas: true },
            ..FeatureConfig::tr_default()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "mb" => Ok(Self::mb_default()),
            "tr" => Ok(Self::tr_default()),
            "full" => Ok(Self::full()),
            _ => Err(Error::invalid(format!("unknown feature preset `{name}`"))),
        }
    }

    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        for &slot in self.window.slots() {
            for fam in &self.families {
                out.push(Position::new(slot, fam.clone()));
            }
        }
        if matches!(self.geometry, Geometry::Absolute | Geometry::Both) {
            out.push(Position::new(Slot::Geo, Family::Dir));
            out.push(Position::new(Slot::Geo, Family::Len));
        }
        if matches!(self.geometry, Geometry::Relative | Geometry::Both) {
            out.push(Position::new(Slot::Geo, Family::Rel));
        }
        if self.path_counts.verbs {
            out.push(Position::new(Slot::Path, Family::Verbs));
        }
        if self.path_counts.commas {
            out.push(Position::new(Slot::Path, Family::Commas));
        }
        out
    }

    pub fn position_names(&self) -> Vec<String> {
        self.positions().iter().map(ToString::to_string).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for fam in &self.families {
            if !fam.fits(Slot::Src) {
                return Err(Error::invalid(format!("family `{fam}` is not a chunk attribute")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerbProperty {
    Passive,
    Infinitive,
    UnconjugatedPresentParticiple,
}

impl VerbProperty {
    pub const ALL: [VerbProperty; 3] = [
        VerbProperty::Passive,
        VerbProperty::Infinitive,
        VerbProperty::UnconjugatedPresentParticiple,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VerbProperty::Passive => "passive",
            VerbProperty::Infinitive => "infinitive",
            VerbProperty::UnconjugatedPresentParticiple => "unconjugated-present-participle",
        }
    }
}

const BE_FORMS: &[&str] = &["be", "am", "is", "are", "was", "were", "been", "being", "'s", "'m", "'re"];
const GET_FORMS: &[&str] = &["get", "gets", "got", "gotten", "getting"];

pub fn is_be_form(form: &str) -> bool {
    BE_FORMS.contains(&form.to_lowercase().as_str())
}

/// POS-based guess at passive / infinitive / bare present-participle verb chunks.
pub fn estimate_verb_properties(chunk: &Chunk, sentence: &Sentence) -> BTreeSet<VerbProperty> {
    let mut props = BTreeSet::new();
    if chunk.kind != ChunkKind::Verb {
        return props;
    }
    let toks = &sentence.tokens[chunk.span.0..=chunk.span.1];
    if toks.windows(2).any(|w| w[0].pos == "TO" && w[1].pos == "VB") {
        props.insert(VerbProperty::Infinitive);
    }
    let mut saw_be_or_get = false;
    for t in toks {
        let lower = t.form.to_lowercase();
        if t.pos == "VBN" && saw_be_or_get {
            props.insert(VerbProperty::Passive);
        }
        if BE_FORMS.contains(&lower.as_str()) || GET_FORMS.contains(&lower.as_str()) {
            saw_be_or_get = true;
        }
    }
    let head = &sentence.tokens[chunk.head];
    let aux_before = sentence.tokens[chunk.span.0..chunk.head]
        .iter()
        .any(|t| t.pos.starts_with("VB") || t.pos == "MD" || t.pos == "TO");
    if head.pos == "VBG" && !aux_before {
        props.insert(VerbProperty::UnconjugatedPresentParticiple);
    }
    props
}

fn chunk_value(sentence: &Sentence, chunk: Option<&Chunk>, family: &Family) -> Value {
    let Some(chunk) = chunk else {
        return if family.is_set_valued() {
            Value::Set(Vec::new())
        } else {
            Value::none()
        };
    };
    let head = sentence.headword(chunk);
    let aux = |key: &str| Value::atom(head.aux.get(key).map_or(NONE, String::as_str));
    match family {
        Family::ChunkKind => Value::atom(chunk.kind.as_str()),
        Family::HeadForm => Value::atom(&head.form),
        Family::HeadPos => Value::atom(&head.pos),
        Family::StrayForms => Value::set(chunk.left_stray.iter().chain(&chunk.right_stray).cloned()),
        Family::VerbProperties => Value::set(estimate_verb_properties(chunk, sentence).iter().map(|p| p.as_str())),
        Family::AttachmentEstimate => aux("attach"),
        Family::Aux(key) => aux(key),
        Family::Dir | Family::Len | Family::Rel | Family::Verbs | Family::Commas => Value::none(),
    }
}

fn gold_label(sentence: &Sentence, cand: &Candidate) -> GrLabel {
    sentence
        .gold
        .iter()
        .find(|g| g.source == cand.source && g.target == cand.target)
        .map_or(GrLabel::None, |g| g.label)
}

/// Extracts the feature vector for `cand`; the class is its gold label (or `none`).
pub fn extract_features(sentence: &Sentence, cand: &Candidate, config: &FeatureConfig) -> FeatureVector {
    let values = config
        .positions()
        .iter()
        .map(|pos| match (pos.slot, &pos.family) {
            (Slot::Geo, Family::Dir) => Value::atom(cand.direction.as_str()),
            (Slot::Geo, Family::Len) => Value::atom(cand.abs_length.to_string()),
            (Slot::Geo, Family::Rel) => Value::atom(cand.rel_category.as_str()),
            (Slot::Path, Family::Verbs) => Value::atom(cand.verbs_crossed.to_string()),
            (Slot::Path, Family::Commas) => Value::atom(cand.commas_crossed.to_string()),
            (slot, fam) => {
                let chunk = slot.resolve(cand, sentence.chunks.len()).map(|id| &sentence.chunks[id]);
                chunk_value(sentence, chunk, fam)
            }
        })
        .collect();
    FeatureVector {
        values,
        class: gold_label(sentence, cand),
    }
}

/// A candidate paired with its features, the unit both learners train on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub candidate: Candidate,
    pub features: FeatureVector,
}

impl Sample {
    pub fn gold(&self) -> GrLabel {
        self.features.class
    }
}

/// Candidates for every sentence of a normalized corpus, with features.
pub fn corpus_samples(sentences: &[Sentence], policy: SpacePolicy, config: &FeatureConfig) -> Vec<Sample> {
    sentences
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            generate_candidates(s, i, policy).into_iter().map(move |c| Sample {
                features: extract_features(s, &c, config),
                candidate: c,
            })
        })
        .collect()
}
