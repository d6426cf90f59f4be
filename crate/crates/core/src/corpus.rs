//! Chunked, POS-tagged sentences with grammatical-relation annotations.
//!
//! The on-disk format is one token per line:
//!
//! ```text
//! INDEX FORM POS BIOTAG [H|_] [attrs|_]
//! ```
//!
//! followed by zero or more `#GR <src-head> <tgt-head> <label>` lines. GR lines
//! refer to head-token indexes, which are resolved to chunk ids on parsing.
//! Sentences are separated by a blank line.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub pos: String,
    /// Externally supplied annotations (named entity, stem, attachment estimate, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aux: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChunkKind {
    Noun,
    Verb,
    Prep,
    Adv,
    Adj,
    Stray,
    Other,
}

impl ChunkKind {
    pub const ALL: [ChunkKind; 7] = [
        ChunkKind::Noun,
        ChunkKind::Verb,
        ChunkKind::Prep,
        ChunkKind::Adv,
        ChunkKind::Adj,
        ChunkKind::Stray,
        ChunkKind::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChunkKind::Noun => "noun",
            ChunkKind::Verb => "verb",
            ChunkKind::Prep => "prep",
            ChunkKind::Adv => "adv",
            ChunkKind::Adj => "adj",
            ChunkKind::Stray => "stray",
            ChunkKind::Other => "other",
        }
    }

    /// Maps the type part of a BIO tag (`NP`, `VP`, ...) onto the closed kind vocabulary.
    pub fn from_bio_type(ty: &str) -> Self {
        match ty {
            "NP" => ChunkKind::Noun,
            "VP" => ChunkKind::Verb,
            "PP" => ChunkKind::Prep,
            "ADVP" => ChunkKind::Adv,
            "ADJP" => ChunkKind::Adj,
            _ => ChunkKind::Other,
        }
    }
}

impl fmt::Display for ChunkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChunkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChunkKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown chunk kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub id: usize,
    pub kind: ChunkKind,
    /// Type part of the original BIO tag, or `O` for stray chunks.
    pub tag: String,
    /// Inclusive token range.
    pub span: (usize, usize),
    pub head: usize,
    /// Whether the head came from an `H` marker rather than the last-token default.
    #[serde(default)]
    pub explicit_head: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub left_stray: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub right_stray: Vec<String>,
}

impl Chunk {
    pub fn contains(&self, token: usize) -> bool {
        self.span.0 <= token && token <= self.span.1
    }

    pub fn len(&self) -> usize {
        self.span.1 - self.span.0 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_verb(&self) -> bool {
        self.kind == ChunkKind::Verb
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GrLabel {
    Subject,
    Object,
    IndirectObject,
    CopulaSubject,
    CopulaObject,
    ExpletiveSubject,
    TimeMod,
    LocationMod,
    OtherMod,
    LocationObject,
    PrepSubject,
    PrepObject,
    PrepIndirectObject,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subtype {
    SimpleArg,
    Modifier,
    MessyArg,
    None,
}

impl Subtype {
    pub fn as_str(self) -> &'static str {
        match self {
            Subtype::SimpleArg => "simple-arg",
            Subtype::Modifier => "modifier",
            Subtype::MessyArg => "messy-arg",
            Subtype::None => "none",
        }
    }
}

impl GrLabel {
    pub const ALL: [GrLabel; 14] = [
        GrLabel::Subject,
        GrLabel::Object,
        GrLabel::IndirectObject,
        GrLabel::CopulaSubject,
        GrLabel::CopulaObject,
        GrLabel::ExpletiveSubject,
        GrLabel::TimeMod,
        GrLabel::LocationMod,
        GrLabel::OtherMod,
        GrLabel::LocationObject,
        GrLabel::PrepSubject,
        GrLabel::PrepObject,
        GrLabel::PrepIndirectObject,
        GrLabel::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GrLabel::Subject => "subject",
            GrLabel::Object => "object",
            GrLabel::IndirectObject => "indirect-object",
            GrLabel::CopulaSubject => "copula-subject",
            GrLabel::CopulaObject => "copula-object",
            GrLabel::ExpletiveSubject => "expletive-subject",
            GrLabel::TimeMod => "time-mod",
            GrLabel::LocationMod => "location-mod",
            GrLabel::OtherMod => "other-mod",
            GrLabel::LocationObject => "location-object",
            GrLabel::PrepSubject => "prep-subject",
            GrLabel::PrepObject => "prep-object",
            GrLabel::PrepIndirectObject => "prep-indirect-object",
            GrLabel::None => "none",
        }
    }

    pub fn subtype(self) -> Subtype {
        use GrLabel::*;
        match self {
            Subject | Object | IndirectObject | CopulaSubject | CopulaObject | ExpletiveSubject => Subtype::SimpleArg,
            TimeMod | LocationMod | OtherMod => Subtype::Modifier,
            LocationObject | PrepSubject | PrepObject | PrepIndirectObject => Subtype::MessyArg,
            None => Subtype::None,
        }
    }

    pub fn is_none(self) -> bool {
        self == GrLabel::None
    }

    /// Ordering by label name, used wherever ties must be broken lexicographically.
    pub fn cmp_by_name(&self, other: &GrLabel) -> std::cmp::Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl fmt::Display for GrLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GrLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GrLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown GR label `{s}`")))
    }
}

impl Serialize for GrLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for GrLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GrInstance {
    pub source: usize,
    pub target: usize,
    pub label: GrLabel,
}

impl GrInstance {
    pub fn new(source: usize, target: usize, label: GrLabel) -> Self {
        GrInstance { source, target, label }
    }
}

/// How lexemes outside every chunk (tag `O`) are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrayPolicy {
    /// Each stray lexeme becomes a one-word chunk of kind `stray`.
    MbOneWordChunks,
    /// Stray lexemes are dropped from the chunk sequence and stored on the
    /// nearest chunk to either side.
    TrNeighborAttributes,
}

impl StrayPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            StrayPolicy::MbOneWordChunks => "mb-one-word-chunks",
            StrayPolicy::TrNeighborAttributes => "tr-neighbor-attributes",
        }
    }
}

impl FromStr for StrayPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mb-one-word-chunks" | "mb" => Ok(StrayPolicy::MbOneWordChunks),
            "tr-neighbor-attributes" | "tr" => Ok(StrayPolicy::TrNeighborAttributes),
            _ => Err(Error::invalid(format!("unknown stray policy `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Chunks straight from the BIO tags; stray tokens are uncovered.
    #[default]
    Raw,
    Normalized(StrayPolicy),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub chunks: Vec<Chunk>,
    pub gold: Vec<GrInstance>,
    #[serde(default)]
    pub layout: Layout,
}

impl Sentence {
    pub fn headword(&self, chunk: &Chunk) -> &Token {
        &self.tokens[chunk.head]
    }

    pub fn chunk(&self, id: usize) -> &Chunk {
        &self.chunks[id]
    }

    /// Id of the chunk whose head is `token`.
    pub fn chunk_headed_by(&self, token: usize) -> Option<usize> {
        self.chunks.iter().position(|c| c.head == token)
    }

    /// Gold relations whose target is a verb chunk.
    pub fn verb_gold(&self) -> Vec<GrInstance> {
        self.gold
            .iter()
            .copied()
            .filter(|g| self.chunks.get(g.target).is_some_and(Chunk::is_verb))
            .collect()
    }

    /// Surface text, space separated.
    pub fn text(&self) -> String {
        self.tokens.iter().map(|t| t.form.as_str()).collect::<Vec<_>>().join(" ")
    }

    /// Re-represents stray lexemes under `policy`.
    ///
    /// Starts from the raw chunking every time, so applying the same policy
    /// twice is a no-op and switching policies is lossless.
    pub fn normalize_strays(&self, policy: StrayPolicy) -> Sentence {
        let base: Vec<Chunk> = self
            .chunks
            .iter()
            .filter(|c| c.kind != ChunkKind::Stray)
            .cloned()
            .map(|mut c| {
                c.left_stray.clear();
                c.right_stray.clear();
                c
            })
            .collect();
        let mut covered = vec![false; self.tokens.len()];
        for c in &base {
            for t in c.span.0..=c.span.1 {
                covered[t] = true;
            }
        }

        let mut chunks = match policy {
            StrayPolicy::MbOneWordChunks => {
                let mut all = base;
                for (i, tok) in self.tokens.iter().enumerate() {
                    if !covered[i] {
                        all.push(Chunk {
                            id: 0,
                            kind: ChunkKind::Stray,
                            tag: "O".to_string(),
                            span: (tok.index, tok.index),
                            head: tok.index,
                            explicit_head: false,
                            left_stray: Vec::new(),
                            right_stray: Vec::new(),
                        });
                    }
                }
                all.sort_by_key(|c| c.span.0);
                all
            }
            StrayPolicy::TrNeighborAttributes => {
                let mut all = base;
                for (i, tok) in self.tokens.iter().enumerate() {
                    if covered[i] {
                        continue;
                    }
                    if let Some(left) = all.iter_mut().rev().find(|c| c.span.1 < i) {
                        left.right_stray.push(tok.form.clone());
                    }
                    if let Some(right) = all.iter_mut().find(|c| c.span.0 > i) {
                        right.left_stray.push(tok.form.clone());
                    }
                }
                all
            }
        };
        for (id, c) in chunks.iter_mut().enumerate() {
            c.id = id;
        }

        let by_head: HashMap<usize, usize> = chunks.iter().map(|c| (c.head, c.id)).collect();
        let gold = self
            .gold
            .iter()
            .filter_map(|g| {
                let src = by_head.get(&self.chunks[g.source].head)?;
                let tgt = by_head.get(&self.chunks[g.target].head)?;
                Some(GrInstance::new(*src, *tgt, g.label))
            })
            .collect();

        Sentence {
            tokens: self.tokens.clone(),
            chunks,
            gold,
            layout: Layout::Normalized(policy),
        }
    }

    /// Maps relations expressed over this sentence's chunk ids onto the chunk
    /// ids of `other`, a differently normalized view of the same sentence.
    pub fn remap_to(&self, grs: &[GrInstance], other: &Sentence) -> Vec<GrInstance> {
        let by_head: HashMap<usize, usize> = other.chunks.iter().map(|c| (c.head, c.id)).collect();
        grs.iter()
            .filter_map(|g| {
                let src = by_head.get(&self.chunks.get(g.source)?.head)?;
                let tgt = by_head.get(&self.chunks.get(g.target)?.head)?;
                Some(GrInstance::new(*src, *tgt, g.label))
            })
            .collect()
    }
}

fn parse_attrs(col: &str, line: usize) -> Result<BTreeMap<String, String>> {
    let mut aux = BTreeMap::new();
    if col == "_" {
        return Ok(aux);
    }
    for pair in col.split(',') {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::parse(line, format!("attribute `{pair}` is not key=value")))?;
        if k.is_empty() {
            return Err(Error::parse(line, "empty attribute key"));
        }
        aux.insert(k.to_string(), v.to_string());
    }
    Ok(aux)
}

struct RawToken {
    token: Token,
    bio: String,
    head_mark: bool,
}

struct PendingGr {
    line: usize,
    source: usize,
    target: usize,
    label: GrLabel,
}

fn build_sentence(tokens: Vec<RawToken>, grs: Vec<PendingGr>) -> Result<Sentence> {
    let mut chunks: Vec<Chunk> = Vec::new();
    let mut heads: Vec<Option<usize>> = Vec::new();
    let mut open = false;

    for rt in &tokens {
        let idx = rt.token.index;
        if rt.bio == "O" {
            open = false;
            continue;
        }
        let (prefix, ty) = rt.bio.split_once('-').expect("validated on read");
        let continues = prefix == "I" && open && chunks.last().is_some_and(|c| c.tag == ty);
        if continues {
            chunks.last_mut().expect("open chunk").span.1 = idx;
        } else {
            chunks.push(Chunk {
                id: chunks.len(),
                kind: ChunkKind::from_bio_type(ty),
                tag: ty.to_string(),
                span: (idx, idx),
                head: idx,
                explicit_head: false,
                left_stray: Vec::new(),
                right_stray: Vec::new(),
            });
            heads.push(None);
        }
        open = true;
        if rt.head_mark {
            let slot = heads.last_mut().expect("chunk exists");
            if slot.is_some() {
                return Err(Error::parse(0, format!("chunk ending at token {idx} has two H markers")));
            }
            *slot = Some(idx);
        }
    }
    for (chunk, head) in chunks.iter_mut().zip(heads) {
        match head {
            Some(h) => {
                chunk.head = h;
                chunk.explicit_head = true;
            }
            None => chunk.head = chunk.span.1,
        }
    }

    let mut sentence = Sentence {
        tokens: tokens.into_iter().map(|rt| rt.token).collect(),
        chunks,
        gold: Vec::new(),
        layout: Layout::Raw,
    };
    for gr in grs {
        let resolve = |tok: usize| {
            sentence.chunk_headed_by(tok).ok_or_else(|| Error::Annotation {
                line: gr.line,
                msg: format!("token {tok} is not the head of any chunk"),
            })
        };
        let source = resolve(gr.source)?;
        let target = resolve(gr.target)?;
        if source == target {
            return Err(Error::Annotation {
                line: gr.line,
                msg: "source and target are the same chunk".into(),
            });
        }
        sentence.gold.push(GrInstance::new(source, target, gr.label));
    }
    Ok(sentence)
}

fn parse_gr_line(rest: &str, line: usize) -> Result<PendingGr> {
    let cols: Vec<&str> = rest.split_whitespace().collect();
    if cols.len() != 3 {
        return Err(Error::parse(line, "GR line must be `#GR <src> <tgt> <label>`"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(line, format!("bad token index `{s}`")));
    let label: GrLabel = cols[2].parse().map_err(|e: Error| Error::parse(line, e.to_string()))?;
    if label.is_none() {
        return Err(Error::parse(line, "GR label `none` cannot be annotated"));
    }
    Ok(PendingGr {
        line,
        source: num(cols[0])?,
        target: num(cols[1])?,
        label,
    })
}

fn parse_token_line(text: &str, line: usize, expected: usize) -> Result<RawToken> {
    let cols: Vec<&str> = text.split_whitespace().collect();
    if !(4..=6).contains(&cols.len()) {
        return Err(Error::parse(line, format!("expected 4-6 columns, found {}", cols.len())));
    }
    let index: usize = cols[0]
        .parse()
        .map_err(|_| Error::parse(line, format!("bad token index `{}`", cols[0])))?;
    if index != expected {
        return Err(Error::parse(line, format!("token index {index}, expected {expected}")));
    }
    let bio = cols[3];
    let valid_bio = bio == "O" || bio.split_once('-').is_some_and(|(p, t)| (p == "B" || p == "I") && !t.is_empty());
    if !valid_bio {
        return Err(Error::parse(line, format!("bad BIO tag `{bio}`")));
    }
    let head_mark = match cols.get(4).copied() {
        None | Some("_") => false,
        Some("H") => true,
        Some(other) => return Err(Error::parse(line, format!("head column must be H or _, got `{other}`"))),
    };
    if head_mark && bio == "O" {
        return Err(Error::parse(line, "H marker on a token outside any chunk"));
    }
    let aux = match cols.get(5) {
        Some(col) => parse_attrs(col, line)?,
        None => BTreeMap::new(),
    };
    Ok(RawToken {
        token: Token {
            index,
            form: cols[1].to_string(),
            pos: cols[2].to_string(),
            aux,
        },
        bio: bio.to_string(),
        head_mark,
    })
}

/// Parses a corpus file into raw-layout sentences.
pub fn parse_corpus(text: &str) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<RawToken> = Vec::new();
    let mut grs: Vec<PendingGr> = Vec::new();
    let mut first_line = 0;

    let mut flush = |tokens: &mut Vec<RawToken>, grs: &mut Vec<PendingGr>, first_line: usize| -> Result<()> {
        if tokens.is_empty() {
            if let Some(gr) = grs.first() {
                return Err(Error::parse(gr.line, "GR line without a token block"));
            }
            return Ok(());
        }
        let sentence = build_sentence(std::mem::take(tokens), std::mem::take(grs)).map_err(|e| match e {
            Error::Parse { line: 0, msg } => Error::Parse { line: first_line, msg },
            other => other,
        })?;
        sentences.push(sentence);
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            flush(&mut tokens, &mut grs, first_line)?;
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("#GR") {
            grs.push(parse_gr_line(rest, line)?);
            continue;
        }
        if trimmed.starts_with('#') {
            return Err(Error::parse(line, "unknown directive"));
        }
        if !grs.is_empty() {
            return Err(Error::parse(line, "token line after GR lines"));
        }
        if tokens.is_empty() {
            first_line = line;
        }
        let expected = tokens.len();
        tokens.push(parse_token_line(trimmed, line, expected)?);
    }
    flush(&mut tokens, &mut grs, first_line)?;
    Ok(sentences)
}

/// Writes sentences back in the corpus format. Stray chunks are written as
/// `O` tokens, so any normalized layout serializes to its raw form.
pub fn serialize_corpus(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for (n, s) in sentences.iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        write_sentence(&mut out, s, &s.gold);
    }
    out
}

/// Like [`serialize_corpus`], with `grs[i]` written in place of each sentence's gold.
pub fn serialize_with(sentences: &[Sentence], grs: &[Vec<GrInstance>]) -> String {
    let mut out = String::new();
    for (n, (s, g)) in sentences.iter().zip(grs).enumerate() {
        if n > 0 {
            out.push('\n');
        }
        write_sentence(&mut out, s, g);
    }
    out
}

fn write_sentence(out: &mut String, s: &Sentence, grs: &[GrInstance]) {
    use std::fmt::Write;

    let mut tags: Vec<(String, bool)> = vec![("O".to_string(), false); s.tokens.len()];
    for c in s.chunks.iter().filter(|c| c.kind != ChunkKind::Stray) {
        for t in c.span.0..=c.span.1 {
            let prefix = if t == c.span.0 { "B" } else { "I" };
            tags[t] = (format!("{prefix}-{}", c.tag), c.explicit_head && t == c.head);
        }
    }
    for (tok, (tag, head)) in s.tokens.iter().zip(&tags) {
        let attrs = if tok.aux.is_empty() {
            "_".to_string()
        } else {
            tok.aux.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
        };
        let h = if *head { "H" } else { "_" };
        let _ = writeln!(out, "{} {} {} {} {} {}", tok.index, tok.form, tok.pos, tag, h, attrs);
    }
    for g in grs {
        let _ = writeln!(out, "#GR {} {} {}", s.chunks[g.source].head, s.chunks[g.target].head, g.label);
    }
}
