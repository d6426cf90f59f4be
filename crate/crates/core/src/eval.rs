//! Recall, precision and F-score per relation subtype, and a paired
//! approximate-randomization test for score differences.

use std::collections::BTreeMap;
use std::fmt::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::corpus::{GrInstance, GrLabel, Subtype};
use crate::error::{Error, Result};

/// An exact non-negative fraction; `0/0` reads as zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        Ratio { num, den }
    }

    pub fn to_f64(self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }

    /// Percentage rounded half-up to an integer, in integer arithmetic.
    pub fn percent(self) -> u64 {
        if self.den == 0 {
            0
        } else {
            (200 * self.num + self.den) / (2 * self.den)
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Harmonic mean of two percentages, exactly: 2pr/(p+r).
pub fn f_score(precision: u64, recall: u64) -> Ratio {
    Ratio::new(2 * precision * recall, precision + recall)
}

pub fn subtype_of(label: GrLabel) -> Result<Subtype> {
    match label.subtype() {
        Subtype::None => Err(Error::invalid("`none` has no subtype")),
        s => Ok(s),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
pub struct GroupScore {
    pub keys: u64,
    pub responses: u64,
    pub correct: u64,
}

impl GroupScore {
    pub fn new(keys: u64, responses: u64, correct: u64) -> Self {
        GroupScore { keys, responses, correct }
    }

    pub fn recall(&self) -> Ratio {
        Ratio::new(self.correct, self.keys)
    }

    pub fn precision(&self) -> Ratio {
        Ratio::new(self.correct, self.responses)
    }

    /// 2pr/(p+r) reduces to 2·correct/(keys+responses).
    pub fn fscore(&self) -> Ratio {
        Ratio::new(2 * self.correct, self.keys + self.responses)
    }

    pub fn metric(&self, m: Metric) -> Ratio {
        match m {
            Metric::Recall => self.recall(),
            Metric::Precision => self.precision(),
            Metric::Fscore => self.fscore(),
        }
    }

    fn add(&mut self, other: &GroupScore) {
        self.keys += other.keys;
        self.responses += other.responses;
        self.correct += other.correct;
    }
}

#[derive(Serialize)]
struct GroupJson {
    keys: u64,
    responses: u64,
    correct: u64,
    recall: Ratio,
    precision: Ratio,
    fscore: Ratio,
    recall_pct: u64,
    precision_pct: u64,
    fscore_pct: u64,
}

impl Serialize for GroupScore {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupJson {
            keys: self.keys,
            responses: self.responses,
            correct: self.correct,
            recall: self.recall(),
            precision: self.precision(),
            fscore: self.fscore(),
            recall_pct: self.recall().percent(),
            precision_pct: self.precision().percent(),
            fscore_pct: self.fscore().percent(),
        }
        .serialize(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Group {
    SimpleArg,
    Modifier,
    MessyArg,
    Combined,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::SimpleArg, Group::Modifier, Group::MessyArg, Group::Combined];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::SimpleArg => "simple-arg",
            Group::Modifier => "modifier",
            Group::MessyArg => "messy-arg",
            Group::Combined => "combined",
        }
    }

    fn of(subtype: Subtype) -> Group {
        match subtype {
            Subtype::SimpleArg => Group::SimpleArg,
            Subtype::Modifier => Group::Modifier,
            _ => Group::MessyArg,
        }
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Group::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown group `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Recall,
    Precision,
    Fscore,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Recall => "recall",
            Metric::Precision => "precision",
            Metric::Fscore => "fscore",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recall" => Ok(Metric::Recall),
            "precision" => Ok(Metric::Precision),
            "fscore" | "f-score" | "f" => Ok(Metric::Fscore),
            _ => Err(Error::invalid(format!("unknown metric `{s}`"))),
        }
    }
}

/// Scores for each subtype group and all groups combined.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ScoreReport {
    #[serde(rename = "simple-arg")]
    pub simple_arg: GroupScore,
    pub modifier: GroupScore,
    #[serde(rename = "messy-arg")]
    pub messy_arg: GroupScore,
    pub combined: GroupScore,
}

impl ScoreReport {
    pub fn from_groups(simple_arg: GroupScore, modifier: GroupScore, messy_arg: GroupScore) -> Self {
        let mut combined = GroupScore::default();
        for g in [&simple_arg, &modifier, &messy_arg] {
            combined.add(g);
        }
        ScoreReport {
            simple_arg,
            modifier,
            messy_arg,
            combined,
        }
    }

    pub fn group(&self, g: Group) -> &GroupScore {
        match g {
            Group::SimpleArg => &self.simple_arg,
            Group::Modifier => &self.modifier,
            Group::MessyArg => &self.messy_arg,
            Group::Combined => &self.combined,
        }
    }

    fn group_mut(&mut self, g: Group) -> &mut GroupScore {
        match g {
            Group::SimpleArg => &mut self.simple_arg,
            Group::Modifier => &mut self.modifier,
            Group::MessyArg => &mut self.messy_arg,
            Group::Combined => &mut self.combined,
        }
    }

    fn add(&mut self, other: &ScoreReport) {
        for g in Group::ALL {
            self.group_mut(g).add(other.group(g));
        }
    }
}

fn score_sentence(gold: &[GrInstance], response: &[GrInstance]) -> Result<ScoreReport> {
    let mut report = ScoreReport::default();
    let mut unmatched: BTreeMap<&GrInstance, u64> = BTreeMap::new();
    for g in gold {
        let group = Group::of(subtype_of(g.label)?);
        report.group_mut(group).keys += 1;
        *unmatched.entry(g).or_insert(0) += 1;
    }
    for r in response {
        let group = Group::of(subtype_of(r.label).map_err(|_| Error::invalid("response contains label `none`"))?);
        let slot = report.group_mut(group);
        slot.responses += 1;
        if let Some(n) = unmatched.get_mut(r).filter(|n| **n > 0) {
            *n -= 1;
            slot.correct += 1;
        }
    }
    let combined = ScoreReport::from_groups(report.simple_arg, report.modifier, report.messy_arg);
    Ok(combined)
}

fn per_sentence(gold: &[Vec<GrInstance>], response: &[Vec<GrInstance>]) -> Result<Vec<ScoreReport>> {
    if gold.len() != response.len() {
        return Err(Error::invalid(format!(
            "gold has {} sentences but the response has {}",
            gold.len(),
            response.len()
        )));
    }
    gold.iter().zip(response).map(|(g, r)| score_sentence(g, r)).collect()
}

/// Scores per-sentence responses against per-sentence gold. A response
/// matches a key with identical source chunk, target chunk and label.
pub fn score(gold: &[Vec<GrInstance>], response: &[Vec<GrInstance>]) -> Result<ScoreReport> {
    let mut total = ScoreReport::default();
    for s in per_sentence(gold, response)? {
        total.add(&s);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub metric: Metric,
    pub group: Group,
    /// Metric of A minus metric of B.
    pub observed: f64,
    pub p_value: f64,
    pub shuffles: usize,
    pub seed: u64,
    pub direction: String,
}

pub const MIN_SHUFFLES: usize = 1000;

/// One-sided paired approximate randomization: how often a random per-sentence
/// swap of A's and B's outputs gives a difference at least the observed one.
///
/// Shuffle `i` draws from ChaCha8 seeded with `seed` on stream `i`, so results do
/// not depend on how shuffles are scheduled.
pub fn significance(
    gold: &[Vec<GrInstance>],
    a: &[Vec<GrInstance>],
    b: &[Vec<GrInstance>],
    metric: Metric,
    group: Group,
    shuffles: usize,
    seed: u64,
) -> Result<SignificanceResult> {
    if shuffles < MIN_SHUFFLES {
        return Err(Error::invalid(format!("at least {MIN_SHUFFLES} shuffles are required")));
    }
    let sa: Vec<GroupScore> = per_sentence(gold, a)?.iter().map(|r| *r.group(group)).collect();
    let sb: Vec<GroupScore> = per_sentence(gold, b)?.iter().map(|r| *r.group(group)).collect();
    let diff = |x: &GroupScore, y: &GroupScore| x.metric(metric).to_f64() - y.metric(metric).to_f64();
    let total = |s: &[GroupScore]| {
        let mut t = GroupScore::default();
        s.iter().for_each(|g| t.add(g));
        t
    };
    let observed = diff(&total(&sa), &total(&sb));

    let at_least: usize = (0..shuffles)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (mut x, mut y) = (GroupScore::default(), GroupScore::default());
            for (ga, gb) in sa.iter().zip(&sb) {
                if rng.gen::<bool>() {
                    x.add(gb);
                    y.add(ga);
                } else {
                    x.add(ga);
                    y.add(gb);
                }
            }
            usize::from(diff(&x, &y) >= observed - 1e-12)
        })
        .sum();

    Ok(SignificanceResult {
        metric,
        group,
        observed,
        p_value: (1 + at_least) as f64 / (1 + shuffles) as f64,
        shuffles,
        seed,
        direction: "a > b".into(),
    })
}

/// Plain-text tables, one per group: `System | Recall | Precision | F-score`.
pub fn render_tables(runs: &[(&str, &ScoreReport)]) -> String {
    let width = runs.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("System".len());
    let mut out = String::new();
    for g in Group::ALL {
        let _ = writeln!(out, "{}", g.as_str());
        let _ = writeln!(
            out,
            "{:<width$} | {:>12} | {:>9} | {:>7}",
            "System", "Recall", "Precision", "F-score"
        );
        for (name, report) in runs {
            let s = report.group(g);
            let recall = format!("{} ({}%)", s.correct, s.recall().percent());
            let _ = writeln!(
                out,
                "{:<width$} | {:>12} | {:>9} | {:>7}",
                name,
                recall,
                format!("{}%", s.precision().percent()),
                format!("{}%", s.fscore().percent()),
            );
        }
        out.push('\n');
    }
    out
}
