//! Hand-written rule packs, interpreted with the learned-rule semantics.

use crate::candidates::{generate_candidates, SpacePolicy};
use crate::corpus::{GrInstance, Sentence};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureConfig, Position, Sample};
use crate::tbl::{apply_rules, parse_rules, Rule, RuleList};

/// The shipped six-rule pack.
pub const SIMPLE6: &str = include_str!("../../../rules/simple6.grr");

/// Features every rule pack is evaluated against.
pub fn baseline_features() -> FeatureConfig {
    FeatureConfig::full()
}

/// Parses and validates a rule pack. Errors carry 1-based line numbers.
pub fn parse_ruleset(text: &str) -> Result<Vec<Rule>> {
    let known: Vec<Position> = baseline_features().positions();
    let rules = parse_rules(text)?;
    let lines: Vec<usize> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, _)| i + 1)
        .collect();
    for (rule, &line) in rules.iter().zip(&lines) {
        rule.validate().map_err(|e| Error::parse(line, e.to_string()))?;
        if let Some(c) = rule.conditions.iter().find(|c| !known.contains(&c.position)) {
            return Err(Error::parse(
                line,
                format!("position `{}` is not available to rule packs", c.position),
            ));
        }
    }
    Ok(rules)
}

pub fn serialize_ruleset(rules: &[Rule]) -> String {
    rules.iter().map(|r| format!("{r}\n")).collect()
}

pub fn simple6() -> Vec<Rule> {
    parse_ruleset(SIMPLE6).expect("shipped rule pack is valid")
}

/// Labels the candidates of one sentence with the pack and returns the
/// non-none relations. The sentence is normalized under the policy's stray
/// handling first, and chunk ids refer to that normalized form.
pub fn apply_ruleset(rules: &[Rule], sentence: &Sentence, policy: SpacePolicy) -> Result<Vec<GrInstance>> {
    let sentence = sentence.normalize_strays(policy.stray_policy());
    let config = baseline_features();
    let samples: Vec<Sample> = generate_candidates(&sentence, 0, policy)
        .into_iter()
        .map(|c| Sample {
            features: extract_features(&sentence, &c, &config),
            candidate: c,
        })
        .collect();
    let list = RuleList {
        rules: rules.to_vec(),
        ..RuleList::empty()
    };
    let labels = apply_rules(&list, &samples, &config.positions())?;
    Ok(samples
        .iter()
        .zip(labels)
        .filter(|(_, l)| !l.is_none())
        .map(|(s, l)| GrInstance::new(s.candidate.source, s.candidate.target, l))
        .collect())
}
