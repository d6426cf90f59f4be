//! Enumeration of potential GRs (source chunk, verb target chunk) under the
//! competing search-space policies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{ChunkKind, Sentence, StrayPolicy};
use crate::error::{Error, Result};

/// Position of the target relative to the source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative verb category: which verb, counted outward from the source, the target is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelCategory {
    L1,
    R1,
    R2,
    #[serde(rename = "other")]
    Other,
}

impl RelCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            RelCategory::L1 => "L1",
            RelCategory::R1 => "R1",
            RelCategory::R2 => "R2",
            RelCategory::Other => "other",
        }
    }
}

impl fmt::Display for RelCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn relative_category(direction: Direction, verbs_crossed: usize) -> RelCategory {
    match (direction, verbs_crossed) {
        (Direction::Left, 0) => RelCategory::L1,
        (Direction::Right, 0) => RelCategory::R1,
        (Direction::Right, 1) => RelCategory::R2,
        _ => RelCategory::Other,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Candidate {
    /// Index of the sentence in its corpus.
    pub sentence: usize,
    pub source: usize,
    pub target: usize,
    pub direction: Direction,
    /// Chunk-position difference; adjacent chunks have length 1.
    pub abs_length: usize,
    pub verbs_crossed: usize,
    pub commas_crossed: usize,
    pub rel_category: RelCategory,
}

impl Candidate {
    /// `source - target` in chunk positions.
    pub fn offset_from_target(&self) -> isize {
        self.source as isize - self.target as isize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacePolicy {
    /// GRs of length three chunks or less.
    Tr3,
    TrUnbounded,
    /// Zero verbs crossed to a target on the left, at most one to a target on the right.
    MbVerbcross,
    MbZerocross,
}

impl SpacePolicy {
    pub const ALL: [SpacePolicy; 4] = [
        SpacePolicy::Tr3,
        SpacePolicy::TrUnbounded,
        SpacePolicy::MbVerbcross,
        SpacePolicy::MbZerocross,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SpacePolicy::Tr3 => "tr3",
            SpacePolicy::TrUnbounded => "tr-unbounded",
            SpacePolicy::MbVerbcross => "mb-verbcross",
            SpacePolicy::MbZerocross => "mb-zerocross",
        }
    }

    /// The stray policy this search space is defined over.
    pub fn stray_policy(self) -> StrayPolicy {
        match self {
            SpacePolicy::Tr3 | SpacePolicy::TrUnbounded => StrayPolicy::TrNeighborAttributes,
            SpacePolicy::MbVerbcross | SpacePolicy::MbZerocross => StrayPolicy::MbOneWordChunks,
        }
    }

    pub fn admits(self, c: &Candidate) -> bool {
        match self {
            SpacePolicy::Tr3 => c.abs_length <= 3,
            SpacePolicy::TrUnbounded => true,
            SpacePolicy::MbVerbcross => match c.direction {
                Direction::Left => c.verbs_crossed == 0,
                Direction::Right => c.verbs_crossed <= 1,
            },
            SpacePolicy::MbZerocross => c.verbs_crossed == 0,
        }
    }
}

impl fmt::Display for SpacePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpacePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SpacePolicy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown space policy `{s}`")))
    }
}

/// Verb chunks and commas strictly between two chunks.
///
/// Under the neighbor-attribute stray layout commas are not chunks; they are
/// counted from the right-stray lists of the interval's chunks instead, which
/// visits each stray lexeme between the endpoints exactly once.
pub fn crossing_counts(sentence: &Sentence, a: usize, b: usize) -> (usize, usize) {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let between = &sentence.chunks[lo + 1..hi];
    let verbs = between.iter().filter(|c| c.kind == ChunkKind::Verb).count();
    let stray_chunks = between
        .iter()
        .filter(|c| c.kind == ChunkKind::Stray && sentence.headword(c).form == ",")
        .count();
    let stray_attrs: usize = sentence.chunks[lo..hi]
        .iter()
        .map(|c| c.right_stray.iter().filter(|f| *f == ",").count())
        .sum();
    (verbs, stray_chunks + stray_attrs)
}

fn describe(sentence: &Sentence, sentence_ref: usize, source: usize, target: usize) -> Candidate {
    let direction = if target < source { Direction::Left } else { Direction::Right };
    let (verbs_crossed, commas_crossed) = crossing_counts(sentence, source, target);
    Candidate {
        sentence: sentence_ref,
        source,
        target,
        direction,
        abs_length: source.abs_diff(target),
        verbs_crossed,
        commas_crossed,
        rel_category: relative_category(direction, verbs_crossed),
    }
}

/// All (source, verb target) pairs admitted by `policy`, ordered by source then target.
pub fn generate_candidates(sentence: &Sentence, sentence_ref: usize, policy: SpacePolicy) -> Vec<Candidate> {
    let verbs: Vec<usize> = sentence.chunks.iter().filter(|c| c.is_verb()).map(|c| c.id).collect();
    let mut out = Vec::new();
    for source in 0..sentence.chunks.len() {
        for &target in &verbs {
            if target == source {
                continue;
            }
            let cand = describe(sentence, sentence_ref, source, target);
            if policy.admits(&cand) {
                out.push(cand);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;

    const YESTERDAY: &str = "\
0 Yesterday NN B-NP
1 , , O
2 my PRP$ B-NP
3 cat NN I-NP
4 ate VBD B-VP
5 the DT B-NP
6 food NN I-NP
7 in IN B-PP
8 the DT B-NP
9 bowl NN I-NP
10 . . O
";

    fn sentence(text: &str, policy: StrayPolicy) -> Sentence {
        parse_corpus(text).unwrap()[0].normalize_strays(policy)
    }

    fn fly(long: bool) -> String {
        let mut rows = vec![("I", "PRP", "B-NP"), ("fly", "VBP", "B-VP")];
        if long {
            rows.extend([("home", "NN", "B-NP"), ("from", "IN", "B-PP"), ("here", "RB", "B-ADVP")]);
        }
        rows.extend([("on", "IN", "B-PP"), ("Tuesday", "NNP", "B-NP"), (".", ".", "O")]);
        rows.iter().enumerate().map(|(i, (f, p, t))| format!("{i} {f} {p} {t}\n")).collect()
    }

    #[test]
    fn example_sentence_mb_verbcross() {
        let s = sentence(YESTERDAY, StrayPolicy::MbOneWordChunks);
        let cands = generate_candidates(&s, 0, SpacePolicy::MbVerbcross);
        assert_eq!(cands.len(), 7);
        assert!(cands.iter().all(|c| c.target == 3 && c.verbs_crossed == 0));
        // the comma stray sits between "Yesterday" and "ate"
        assert_eq!(cands[0].commas_crossed, 1);
        assert_eq!(cands[0].abs_length, 3);
    }

    #[test]
    fn example_sentence_tr3() {
        let s = sentence(YESTERDAY, StrayPolicy::TrNeighborAttributes);
        let cands = generate_candidates(&s, 0, SpacePolicy::Tr3);
        let sources: Vec<&str> = cands.iter().map(|c| s.headword(&s.chunks[c.source]).form.as_str()).collect();
        assert_eq!(sources, ["Yesterday", "cat", "food", "in", "bowl"]);
        assert_eq!(cands[0].abs_length, 2);
        assert_eq!(cands[0].commas_crossed, 1);
    }

    #[test]
    fn no_verb_no_candidates() {
        let s = sentence("0 the DT B-NP\n1 cat NN I-NP\n", StrayPolicy::MbOneWordChunks);
        for p in SpacePolicy::ALL {
            assert!(generate_candidates(&s, 0, p).is_empty());
        }
    }

    #[test]
    fn fly_on_tuesday_crossings() {
        let short = sentence(&fly(false), StrayPolicy::MbOneWordChunks);
        assert_eq!(crossing_counts(&short, 2, 1), (0, 0));
        let c = &generate_candidates(&short, 0, SpacePolicy::MbVerbcross)[1];
        assert_eq!((c.source, c.abs_length, c.rel_category), (2, 1, RelCategory::L1));

        let long = sentence(&fly(true), StrayPolicy::MbOneWordChunks);
        let on = 5;
        assert_eq!(long.headword(&long.chunks[on]).form, "on");
        assert_eq!(crossing_counts(&long, on, 1), (0, 0));
        let c = generate_candidates(&long, 0, SpacePolicy::MbVerbcross)
            .into_iter()
            .find(|c| c.source == on)
            .unwrap();
        assert_eq!((c.abs_length, c.rel_category), (4, RelCategory::L1));
    }

    #[test]
    fn adjacent_chunks_cross_nothing() {
        let s = sentence(YESTERDAY, StrayPolicy::MbOneWordChunks);
        assert_eq!(crossing_counts(&s, 2, 3), (0, 0));
    }

    #[test]
    fn relative_category_table() {
        assert_eq!(relative_category(Direction::Left, 0), RelCategory::L1);
        assert_eq!(relative_category(Direction::Right, 0), RelCategory::R1);
        assert_eq!(relative_category(Direction::Right, 1), RelCategory::R2);
        assert_eq!(relative_category(Direction::Left, 2), RelCategory::Other);
        assert_eq!(relative_category(Direction::Left, 1), RelCategory::Other);
        assert_eq!(relative_category(Direction::Right, 2), RelCategory::Other);
    }

    #[test]
    fn policies_filter_by_crossings() {
        // I [saw] the cat [eat] the food
        let text = "0 I PRP B-NP\n1 saw VBD B-VP\n2 the DT B-NP\n3 cat NN I-NP\n4 eat VB B-VP\n5 food NN B-NP\n";
        let s = sentence(text, StrayPolicy::MbOneWordChunks);
        let verbcross = generate_candidates(&s, 0, SpacePolicy::MbVerbcross);
        let zero = generate_candidates(&s, 0, SpacePolicy::MbZerocross);
        // "I" reaches "eat" across one verb (R2); "food" cannot reach "saw" leftward across "eat"
        assert!(verbcross
            .iter()
            .any(|c| c.source == 0 && c.target == 3 && c.rel_category == RelCategory::R2));
        assert!(!verbcross.iter().any(|c| c.source == 4 && c.target == 1));
        assert!(zero.iter().all(|c| c.verbs_crossed == 0));
        assert!(zero.len() < verbcross.len());
        // verb chunks are sources too
        assert!(verbcross.iter().any(|c| c.source == 3 && c.target == 1));
    }
}
