//! Seeded template-grammar generator for annotated corpora.
//!
//! A spec maps lexicon aliases to phrases and lists weighted sentence
//! templates. Phrases use a bracket notation: `[NP the/DT cat/NN]` is a
//! chunk (head = last token), a bare `,/,` is a token outside any chunk, and
//! `@alias` expands to a random phrase of that alias. A leading `*` marks the
//! chunk that stands for the element in relations; otherwise the first chunk
//! does. Template elements are `name=phrase`, a plain phrase, or `@gap`,
//! which inserts filler phrases, their number drawn from `modifier_gaps`.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::GrLabel;
use crate::error::{Error, Result};

pub const DEFAULT_SPEC: &str = include_str!("../../../specs/default.json");

const MAX_DEPTH: usize = 8;
const GAP: &str = "@gap";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceTemplate {
    pub name: String,
    #[serde(default = "one")]
    pub weight: f64,
    pub elements: Vec<String>,
    /// (source element, target element, label).
    #[serde(default)]
    pub grs: Vec<(String, String, GrLabel)>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrammarSpec {
    pub lexicon: BTreeMap<String, Vec<String>>,
    pub templates: Vec<SentenceTemplate>,
    /// Probability of inserting 0, 1, 2, ... fillers at a gap.
    #[serde(default = "no_gaps")]
    pub modifier_gaps: Vec<f64>,
    /// Lexicon alias the gap fillers are drawn from.
    #[serde(default)]
    pub filler: Option<String>,
}

fn no_gaps() -> Vec<f64> {
    vec![1.0]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub sentences: usize,
    pub train_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            sentences: 250,
            train_fraction: 0.7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Item {
    Alias(String),
    Chunk {
        kind: String,
        tokens: Vec<(String, String)>,
        marked: bool,
    },
    Stray(String, String),
}

fn split_token(s: &str) -> Result<(String, String)> {
    match s.rsplit_once('/') {
        Some((w, t)) if !w.is_empty() && !t.is_empty() => Ok((w.to_string(), t.to_string())),
        _ => Err(Error::invalid(format!("`{s}` is not word/TAG"))),
    }
}

fn parse_phrase(text: &str) -> Result<Vec<Item>> {
    let mut items = Vec::new();
    let mut words = text.split_whitespace();
    while let Some(w) = words.next() {
        if let Some(alias) = w.strip_prefix('@') {
            items.push(Item::Alias(alias.to_string()));
            continue;
        }
        let (marked, rest) = match w.strip_prefix('*') {
            Some(r) => (true, r),
            None => (false, w),
        };
        let Some(kind) = rest.strip_prefix('[') else {
            if marked {
                return Err(Error::invalid(format!("`*` must precede a chunk in `{text}`")));
            }
            let (form, tag) = split_token(w)?;
            items.push(Item::Stray(form, tag));
            continue;
        };
        if kind.is_empty() || kind.contains(']') {
            return Err(Error::invalid(format!("bad chunk opening `{w}` in `{text}`")));
        }
        let mut tokens = Vec::new();
        loop {
            let t = words.next().ok_or_else(|| Error::invalid(format!("unclosed chunk in `{text}`")))?;
            match t.strip_suffix(']') {
                Some(last) => {
                    tokens.push(split_token(last)?);
                    break;
                }
                None => tokens.push(split_token(t)?),
            }
        }
        items.push(Item::Chunk {
            kind: kind.to_string(),
            tokens,
            marked,
        });
    }
    Ok(items)
}

/// A sentence under construction.
#[derive(Default)]
struct Draft {
    /// (form, pos, BIO tag)
    tokens: Vec<(String, String, String)>,
    /// Head token and chunk kind per chunk.
    chunks: Vec<(usize, String)>,
}

impl GrammarSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GrammarSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn default_spec() -> Self {
        GrammarSpec::from_json(DEFAULT_SPEC).expect("shipped spec is valid")
    }

    fn check_phrase(&self, text: &str, depth: usize) -> Result<()> {
        if depth > MAX_DEPTH {
            return Err(Error::invalid(format!("aliases nest deeper than {MAX_DEPTH}")));
        }
        for item in parse_phrase(text)? {
            if let Item::Alias(a) = item {
                let phrases = self
                    .lexicon
                    .get(&a)
                    .filter(|p| !p.is_empty())
                    .ok_or_else(|| Error::invalid(format!("missing vocabulary `@{a}`")))?;
                for p in phrases {
                    self.check_phrase(p, depth + 1)?;
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.templates.is_empty() {
            return Err(Error::invalid("spec has no templates"));
        }
        if self.modifier_gaps.is_empty() || self.modifier_gaps.iter().any(|p| !(*p >= 0.0)) || self.modifier_gaps.iter().sum::<f64>() <= 0.0
        {
            return Err(Error::invalid("modifier_gaps must be non-negative weights with a positive sum"));
        }
        for t in &self.templates {
            if !(t.weight > 0.0) {
                return Err(Error::invalid(format!("template `{}` needs a positive weight", t.name)));
            }
            let mut names = Vec::new();
            for e in &t.elements {
                if e == GAP {
                    let filler = self
                        .filler
                        .as_ref()
                        .ok_or_else(|| Error::invalid(format!("template `{}` has a gap but the spec has no filler", t.name)))?;
                    self.check_phrase(&format!("@{filler}"), 0)?;
                    continue;
                }
                let phrase = match e.split_once('=') {
                    Some((name, phrase)) => {
                        names.push(name.trim());
                        phrase
                    }
                    None => e.as_str(),
                };
                self.check_phrase(phrase, 0)?;
            }
            for (s, g, label) in &t.grs {
                if label.is_none() {
                    return Err(Error::invalid(format!("template `{}` annotates `none`", t.name)));
                }
                for n in [s, g] {
                    if !names.contains(&n.as_str()) {
                        return Err(Error::invalid(format!("template `{}` has no element `{n}`", t.name)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Appends the expansion of `text`; returns the index of the element's chunk.
    fn expand(&self, text: &str, rng: &mut ChaCha8Rng, draft: &mut Draft, depth: usize) -> Result<Option<usize>> {
        if depth > MAX_DEPTH {
            return Err(Error::invalid(format!("aliases nest deeper than {MAX_DEPTH}")));
        }
        let mut first = None;
        let mut marked = None;
        for item in parse_phrase(text)? {
            match item {
                Item::Alias(a) => {
                    let phrases = self
                        .lexicon
                        .get(&a)
                        .filter(|p| !p.is_empty())
                        .ok_or_else(|| Error::invalid(format!("missing vocabulary `@{a}`")))?;
                    let pick = &phrases[rng.gen_range(0..phrases.len())];
                    let sub = self.expand(pick, rng, draft, depth + 1)?;
                    first = first.or(sub);
                }
                Item::Chunk { kind, tokens, marked: m } => {
                    for (i, (form, pos)) in tokens.into_iter().enumerate() {
                        let bio = format!("{}-{kind}", if i == 0 { 'B' } else { 'I' });
                        draft.tokens.push((form, pos, bio));
                    }
                    draft.chunks.push((draft.tokens.len() - 1, kind));
                    let id = draft.chunks.len() - 1;
                    first = first.or(Some(id));
                    if m {
                        marked = marked.or(Some(id));
                    }
                }
                Item::Stray(form, pos) => draft.tokens.push((form, pos, "O".into())),
            }
        }
        Ok(marked.or(first))
    }

    fn sentence(&self, rng: &mut ChaCha8Rng, t: &SentenceTemplate, gaps: &WeightedIndex<f64>, out: &mut String) -> Result<()> {
        let mut draft = Draft::default();
        let mut named: BTreeMap<&str, usize> = BTreeMap::new();
        for e in &t.elements {
            if e == GAP {
                let filler = format!("@{}", self.filler.as_deref().unwrap_or_default());
                for _ in 0..gaps.sample(rng) {
                    self.expand(&filler, rng, &mut draft, 0)?;
                }
                continue;
            }
            let (name, phrase) = match e.split_once('=') {
                Some((n, p)) => (Some(n.trim()), p),
                None => (None, e.as_str()),
            };
            let chunk = self.expand(phrase, rng, &mut draft, 0)?;
            if let Some(n) = name {
                let c = chunk.ok_or_else(|| Error::invalid(format!("element `{n}` of `{}` has no chunk", t.name)))?;
                named.insert(n, c);
            }
        }
        for (i, (form, pos, bio)) in draft.tokens.iter().enumerate() {
            let _ = writeln!(out, "{i} {form} {pos} {bio} _ _");
        }
        for (s, g, label) in &t.grs {
            let (sh, _) = &draft.chunks[named[s.as_str()]];
            let (gh, gk) = &draft.chunks[named[g.as_str()]];
            if gk != "VP" {
                return Err(Error::invalid(format!("template `{}` targets a non-verb chunk", t.name)));
            }
            let _ = writeln!(out, "#GR {sh} {gh} {label}");
        }
        out.push('\n');
        Ok(())
    }

    /// Generates `config.sentences` sentences and splits them into train and
    /// test corpora in the corpus text format. Each split holds every template
    /// in proportion to its weight, in shuffled order.
    pub fn generate(&self, config: &SynthConfig) -> Result<(String, String)> {
        self.validate()?;
        if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
            return Err(Error::invalid("train fraction must lie strictly between 0 and 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let gaps = WeightedIndex::new(&self.modifier_gaps).map_err(|e| Error::invalid(e.to_string()))?;
        let n_train = (config.sentences as f64 * config.train_fraction).round() as usize;
        let mut split = |n: usize| -> Result<String> {
            let mut order = self.allocate(n);
            order.shuffle(&mut rng);
            let mut out = String::new();
            for i in order {
                self.sentence(&mut rng, &self.templates[i], &gaps, &mut out)?;
            }
            Ok(out)
        };
        let train = split(n_train)?;
        let test = split(config.sentences - n_train)?;
        Ok((train, test))
    }

    /// Template indexes for `n` sentences, each template used in proportion
    /// to its weight (largest remainder, ties to the earlier template).
    fn allocate(&self, n: usize) -> Vec<usize> {
        let total: f64 = self.templates.iter().map(|t| t.weight).sum();
        let quotas: Vec<f64> = self.templates.iter().map(|t| t.weight / total * n as f64).collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut by_remainder: Vec<usize> = (0..quotas.len()).collect();
        by_remainder.sort_by(|&a, &b| {
            (quotas[b] - quotas[b].floor())
                .total_cmp(&(quotas[a] - quotas[a].floor()))
                .then(a.cmp(&b))
        });
        let short = n - counts.iter().sum::<usize>();
        for &i in by_remainder.iter().take(short) {
            counts[i] += 1;
        }
        counts.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat(i).take(c)).collect()
    }
}
