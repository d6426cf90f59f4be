//! Transformation-based error-driven rule learning.
//!
//! Learning starts every candidate at an initial label and repeatedly adds
//! the rule with the largest net reduction in training errors, instantiated
//! from templates at the currently mislabeled candidates, until no rule
//! reaches the threshold. Application replays the rules in learned order;
//! each rule is applied to all matching candidates at once.

mod rule;
mod template;

use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::GrLabel;
use crate::error::{Error, Result};
use crate::features::{Position, Sample, Value};

pub use rule::{CompiledRule, Condition, Op, Rule};
pub use template::{default_templates, parse_templates, Template, MAX_TEMPLATE_SLOTS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    #[default]
    AllNone,
    /// The most frequent gold label of the training data the list was learned on.
    MajorityPerPartition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TblConfig {
    pub threshold: usize,
    pub initial: InitialState,
}

impl Default for TblConfig {
    fn default() -> Self {
        TblConfig {
            threshold: 2,
            initial: InitialState::AllNone,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleList {
    pub initial: InitialState,
    pub initial_label: GrLabel,
    pub rules: Vec<Rule>,
}

impl RuleList {
    pub fn empty() -> Self {
        RuleList {
            initial: InitialState::AllNone,
            initial_label: GrLabel::None,
            rules: Vec::new(),
        }
    }

    /// One rule per line, preceded by a comment naming the initial label.
    pub fn to_text(&self) -> String {
        let mut out = format!("# initial {}\n", self.initial_label);
        for r in &self.rules {
            let _ = writeln!(out, "{r}");
        }
        out
    }

    pub fn compile<'a>(&'a self, positions: &[Position]) -> Result<Vec<CompiledRule<'a>>> {
        self.rules.iter().map(|r| r.compile(positions)).collect()
    }

    /// Label of a single sample after replaying the list.
    pub fn label_one(compiled: &[CompiledRule<'_>], initial: GrLabel, sample: &Sample) -> GrLabel {
        compiled
            .iter()
            .filter(|r| r.matches(sample))
            .last()
            .map_or(initial, |r| r.rule.label)
    }
}

/// Parses the line-oriented rule text form. Blank lines and `#` comments are skipped.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| l.parse::<Rule>().map_err(|e| Error::parse(i + 1, e.to_string())))
        .collect()
}

/// Net change in correct labels if `rule` were applied to the current labels.
pub fn score_rule(rule: &Rule, samples: &[Sample], labels: &[GrLabel], positions: &[Position]) -> Result<i64> {
    let compiled = rule.compile(positions)?;
    Ok(samples
        .iter()
        .zip(labels)
        .filter(|(s, _)| compiled.matches(s))
        .map(|(s, &cur)| (rule.label == s.gold()) as i64 - (cur == s.gold()) as i64)
        .sum())
}

/// Initial labels followed by every rule, in order.
pub fn apply_rules(list: &RuleList, samples: &[Sample], positions: &[Position]) -> Result<Vec<GrLabel>> {
    let mut labels = vec![list.initial_label; samples.len()];
    for rule in &list.rules {
        let compiled = rule.compile(positions)?;
        for (label, s) in labels.iter_mut().zip(samples) {
            if compiled.matches(s) {
                *label = rule.label;
            }
        }
    }
    Ok(labels)
}

/// Result of a learning run: the rules plus the training-time trajectory.
#[derive(Clone, Debug)]
pub struct Learned {
    pub rules: RuleList,
    /// Training labels after the last rule.
    pub labels: Vec<GrLabel>,
    /// Training error count before any rule and after each accepted rule.
    pub errors: Vec<usize>,
}

fn majority(samples: &[Sample]) -> GrLabel {
    let mut counts: HashMap<GrLabel, usize> = HashMap::new();
    for s in samples {
        *counts.entry(s.gold()).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .max_by(|(la, a), (lb, b)| a.cmp(b).then_with(|| lb.cmp_by_name(la)))
        .map_or(GrLabel::None, |(l, _)| l)
}

/// Interned feature values: per sample, per position, the codes of the atom
/// or of every set member.
struct Codes {
    values: Vec<Vec<Vec<u32>>>,
    names: Vec<Vec<String>>,
}

impl Codes {
    fn build(samples: &[Sample], arity: usize) -> Self {
        let mut tables: Vec<HashMap<String, u32>> = vec![HashMap::new(); arity];
        let mut names: Vec<Vec<String>> = vec![Vec::new(); arity];
        let values = samples
            .iter()
            .map(|s| {
                s.features
                    .values
                    .iter()
                    .enumerate()
                    .map(|(p, v)| {
                        let mut code = |x: &String| {
                            *tables[p].entry(x.clone()).or_insert_with(|| {
                                names[p].push(x.clone());
                                names[p].len() as u32 - 1
                            })
                        };
                        match v {
                            Value::Atom(a) => vec![code(a)],
                            Value::Set(m) => m.iter().map(code).collect(),
                        }
                    })
                    .collect()
            })
            .collect();
        Codes { values, names }
    }
}

#[derive(Default)]
struct GroupStats {
    correct: u32,
    correct_by_gold: [u32; GrLabel::ALL.len()],
    fixes: [u32; GrLabel::ALL.len()],
}

struct Choice {
    net: i64,
    template: usize,
    codes: Vec<u32>,
    label: GrLabel,
}

/// Calls `f` with every combination of one code per position.
fn for_each_combo(lists: &[&[u32]], buf: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if buf.len() == lists.len() {
        f(buf);
        return;
    }
    for &c in lists[buf.len()] {
        buf.push(c);
        for_each_combo(lists, buf, f);
        buf.pop();
    }
}

/// Learns an ordered rule list from labeled samples.
///
/// Templates testing a position not present in `positions` are skipped.
pub fn learn(samples: &[Sample], positions: &[Position], templates: &[Template], config: TblConfig) -> Result<Learned> {
    if config.threshold < 1 {
        return Err(Error::invalid("rule threshold must be at least 1"));
    }
    for s in samples {
        if s.features.values.len() != positions.len() {
            return Err(Error::Arity {
                expected: positions.len(),
                found: s.features.values.len(),
            });
        }
    }
    let initial_label = match config.initial {
        InitialState::AllNone => GrLabel::None,
        InitialState::MajorityPerPartition => majority(samples),
    };
    let mut labels = vec![initial_label; samples.len()];
    let gold: Vec<GrLabel> = samples.iter().map(Sample::gold).collect();
    let count_errors = |labels: &[GrLabel]| labels.iter().zip(&gold).filter(|(a, b)| a != b).count();
    let mut errors = vec![count_errors(&labels)];
    let mut rules = Vec::new();

    let usable: Vec<(&Template, Vec<usize>)> = templates
        .iter()
        .filter_map(|t| {
            let idx: Option<Vec<usize>> = t.positions.iter().map(|p| positions.iter().position(|q| q == p)).collect();
            idx.map(|i| (t, i))
        })
        .collect();
    let codes = Codes::build(samples, positions.len());

    while !usable.is_empty() {
        let mut groups: HashMap<(usize, Vec<u32>), GroupStats> = HashMap::new();
        let mut buf = Vec::with_capacity(MAX_TEMPLATE_SLOTS);
        for (i, sample_codes) in codes.values.iter().enumerate() {
            let (cur, g) = (labels[i], gold[i]);
            for (ti, (_, idx)) in usable.iter().enumerate() {
                let lists: Vec<&[u32]> = idx.iter().map(|&p| sample_codes[p].as_slice()).collect();
                for_each_combo(&lists, &mut buf, &mut |combo| {
                    let stats = groups.entry((ti, combo.to_vec())).or_default();
                    if cur == g {
                        stats.correct += 1;
                        stats.correct_by_gold[g as usize] += 1;
                    } else {
                        stats.fixes[g as usize] += 1;
                    }
                });
            }
        }

        let mut best: Option<Choice> = None;
        for ((ti, combo), stats) in &groups {
            for label in GrLabel::ALL {
                let fixes = stats.fixes[label as usize];
                if fixes == 0 {
                    continue;
                }
                let broken = stats.correct - stats.correct_by_gold[label as usize];
                let cand = Choice {
                    net: fixes as i64 - broken as i64,
                    template: *ti,
                    codes: combo.clone(),
                    label,
                };
                let better = match &best {
                    None => true,
                    Some(b) => prefer(&cand, b, &usable, &codes.names).is_lt(),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        let Some(choice) = best else { break };
        if choice.net < config.threshold as i64 {
            break;
        }

        let (template, idx) = &usable[choice.template];
        let conditions = template
            .positions
            .iter()
            .zip(idx)
            .zip(&choice.codes)
            .map(|((pos, &p), &c)| {
                let value = codes.names[p][c as usize].clone();
                if pos.family.is_set_valued() {
                    Condition::member(pos.clone(), value)
                } else {
                    Condition::eq(pos.clone(), value)
                }
            })
            .collect();
        let rule = Rule {
            conditions,
            label: choice.label,
            locator: None,
            template: Some(template.id),
        };
        let compiled = rule.compile(positions)?;
        for (label, s) in labels.iter_mut().zip(samples) {
            if compiled.matches(s) {
                *label = rule.label;
            }
        }
        rules.push(rule);
        errors.push(count_errors(&labels));
    }

    Ok(Learned {
        rules: RuleList {
            initial: config.initial,
            initial_label,
            rules,
        },
        labels,
        errors,
    })
}

/// Total order over candidate rules: higher net gain, fewer conditions,
/// earlier template id, then condition values and label name.
fn prefer(a: &Choice, b: &Choice, usable: &[(&Template, Vec<usize>)], names: &[Vec<String>]) -> std::cmp::Ordering {
    let (ta, ia) = &usable[a.template];
    let (tb, ib) = &usable[b.template];
    b.net
        .cmp(&a.net)
        .then(ta.positions.len().cmp(&tb.positions.len()))
        .then(ta.id.cmp(&tb.id))
        .then_with(|| {
            let va = ia.iter().zip(&a.codes).map(|(&p, &c)| names[p][c as usize].as_str());
            let vb = ib.iter().zip(&b.codes).map(|(&p, &c)| names[p][c as usize].as_str());
            va.cmp(vb)
        })
        .then_with(|| a.label.cmp_by_name(&b.label))
}
