use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{ChunkKind, GrLabel};
use crate::error::{Error, Result};
use crate::features::{Family, Position, Sample, Value, VerbProperty, NONE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Op {
    /// Atom equals one of the values.
    #[serde(rename = "=")]
    Eq,
    /// Set contains one of the values.
    #[serde(rename = "~")]
    Member,
}

impl Op {
    pub fn symbol(self) -> char {
        match self {
            Op::Eq => '=',
            Op::Member => '~',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub position: Position,
    pub op: Op,
    /// Alternatives; the condition holds if any one matches.
    pub values: Vec<String>,
    #[serde(default)]
    pub negated: bool,
}

impl Condition {
    pub fn eq(position: Position, value: impl Into<String>) -> Self {
        Condition {
            position,
            op: Op::Eq,
            values: vec![value.into()],
            negated: false,
        }
    }

    pub fn member(position: Position, value: impl Into<String>) -> Self {
        Condition {
            position,
            op: Op::Member,
            values: vec![value.into()],
            negated: false,
        }
    }

    pub fn holds(&self, value: &Value) -> bool {
        let hit = match self.op {
            Op::Eq => value.as_atom().is_some_and(|a| self.values.iter().any(|v| v == a)),
            Op::Member => self.values.iter().any(|v| value.contains(v)),
        };
        hit != self.negated
    }

    /// Checks the operator and values against the closed vocabularies.
    pub fn validate(&self) -> Result<()> {
        let fam = &self.position.family;
        let want = if fam.is_set_valued() { Op::Member } else { Op::Eq };
        if self.op != want {
            return Err(Error::invalid(format!(
                "`{}` takes `{}`, not `{}`",
                self.position,
                want.symbol(),
                self.op.symbol()
            )));
        }
        if self.values.is_empty() || self.values.iter().any(String::is_empty) {
            return Err(Error::invalid(format!("`{}` has an empty value", self.position)));
        }
        for v in &self.values {
            let ok = match fam {
                Family::ChunkKind => v == NONE || v.parse::<ChunkKind>().is_ok(),
                Family::VerbProperties => VerbProperty::ALL.iter().any(|p| p.as_str() == v),
                Family::Dir => v == "left" || v == "right",
                Family::Rel => ["L1", "R1", "R2", "other"].contains(&v.as_str()),
                Family::Len | Family::Verbs | Family::Commas => v.parse::<usize>().is_ok(),
                _ => true,
            };
            if !ok {
                return Err(Error::invalid(format!("`{v}` is not a value of `{}`", self.position)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        write!(f, "{}{}{}", self.position, self.op.symbol(), self.values.join("|"))
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negated, body) = match s.strip_prefix('!') {
            Some(rest) => (true, rest.trim_start()),
            None => (false, s),
        };
        let split = body
            .find(['=', '~'])
            .ok_or_else(|| Error::invalid(format!("condition `{s}` has no `=` or `~`")))?;
        let op = if body.as_bytes()[split] == b'=' { Op::Eq } else { Op::Member };
        let position: Position = body[..split].trim().parse()?;
        let values = body[split + 1..].split('|').map(|v| v.trim().to_string()).collect();
        Ok(Condition {
            position,
            op,
            values,
            negated,
        })
    }
}

/// A conjunction of conditions that sets (or, with label `none`, clears) the
/// label of a candidate.
///
/// With a `locator`, the rule only acts on the candidate whose source sits at
/// that signed chunk offset from the target, e.g. `object@tgt+1` labels the
/// target's right neighbor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub label: GrLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locator: Option<isize>,
    /// Generating template, for learned rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<usize>,
}

impl Rule {
    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() {
            return Err(Error::invalid("a rule needs at least one condition"));
        }
        if self.locator == Some(0) {
            return Err(Error::invalid("locator offset 0 names the target itself"));
        }
        self.conditions.iter().try_for_each(Condition::validate)
    }

    /// Positions of this rule's conditions within `positions`.
    pub fn compile(&self, positions: &[Position]) -> Result<CompiledRule<'_>> {
        let slots = self
            .conditions
            .iter()
            .map(|c| {
                positions
                    .iter()
                    .position(|p| *p == c.position)
                    .ok_or_else(|| Error::invalid(format!("position `{}` is not extracted", c.position)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledRule { rule: self, slots })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("IF ")?;
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, " THEN {}", self.label)?;
        if let Some(off) = self.locator {
            write!(f, "@tgt{off:+}")?;
        }
        Ok(())
    }
}

fn parse_locator(s: &str) -> Result<isize> {
    let bad = || Error::invalid(format!("locator `{s}` is not tgt+N or tgt-N"));
    let rest = s.strip_prefix("tgt").ok_or_else(bad)?;
    if !rest.starts_with(['+', '-']) {
        return Err(bad());
    }
    rest.parse::<isize>().map_err(|_| bad())
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let body = s
            .strip_prefix("IF")
            .filter(|b| b.starts_with(char::is_whitespace))
            .ok_or_else(|| Error::invalid("rule must start with `IF`"))?;
        let (conds, action) = body.rsplit_once(" THEN ").ok_or_else(|| Error::invalid("rule has no `THEN`"))?;
        let conditions = conds.split('&').map(str::parse).collect::<Result<Vec<Condition>>>()?;
        let action = action.trim();
        let (label, locator) = match action.split_once('@') {
            Some((l, loc)) => (l, Some(parse_locator(loc.trim())?)),
            None => (action, None),
        };
        Ok(Rule {
            conditions,
            label: label.trim().parse()?,
            locator,
            template: None,
        })
    }
}

/// A rule bound to the position indexes of one feature layout.
#[derive(Clone, Debug)]
pub struct CompiledRule<'a> {
    pub rule: &'a Rule,
    slots: Vec<usize>,
}

impl CompiledRule<'_> {
    pub fn matches(&self, sample: &Sample) -> bool {
        if let Some(off) = self.rule.locator {
            if sample.candidate.offset_from_target() != off {
                return false;
            }
        }
        self.rule
            .conditions
            .iter()
            .zip(&self.slots)
            .all(|(c, &i)| c.holds(&sample.features.values[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OBJECT_RULE: &str = "IF tgt.chunk-kind=verb & !tgt.verb-properties~passive & !tgt.head-form=be|am|is|are|was|were|been|being & tgt+1.chunk-kind=noun|verb THEN object@tgt+1";

    #[test]
    fn text_form_round_trips() {
        let rule: Rule = OBJECT_RULE.parse().unwrap();
        assert_eq!(rule.conditions.len(), 4);
        assert_eq!(rule.label, GrLabel::Object);
        assert_eq!(rule.locator, Some(1));
        assert!(rule.conditions[1].negated);
        assert_eq!(rule.conditions[1].op, Op::Member);
        assert_eq!(rule.to_string(), OBJECT_RULE);
        rule.validate().unwrap();
        let plain: Rule = "IF src.chunk-kind=noun & geo.dir=right & geo.len=1 THEN subject".parse().unwrap();
        assert_eq!(plain.to_string().parse::<Rule>().unwrap(), plain);
        let back: Rule = "IF geo.rel=R2 THEN none@tgt-3".parse().unwrap();
        assert_eq!(back.locator, Some(-3));
        assert_eq!(back.to_string(), "IF geo.rel=R2 THEN none@tgt-3");
    }

    #[test]
    fn rejects_bad_rules() {
        for bad in [
            "src.chunk-kind=noun THEN subject",
            "IF src.chunk-kind=noun",
            "IF src.chunk-kind=noun THEN subj",
            "IF src.colour=red THEN subject",
            "IF nowhere.chunk-kind=noun THEN subject",
            "IF src.chunk-kind noun THEN subject",
            "IF src.chunk-kind=noun THEN subject@src+1",
        ] {
            assert!(bad.parse::<Rule>().is_err(), "{bad}");
        }
        for invalid in [
            "IF src.chunk-kind=animal THEN subject",
            "IF tgt.verb-properties=passive THEN subject",
            "IF tgt.verb-properties~sleepy THEN subject",
            "IF geo.len=far THEN subject",
            "IF geo.rel=L2 THEN subject",
        ] {
            let r: Rule = invalid.parse().unwrap();
            assert!(r.validate().is_err(), "{invalid}");
        }
    }

    #[test]
    fn condition_semantics() {
        let pos: Position = "tgt.verb-properties".parse().unwrap();
        let c = Condition::member(pos.clone(), "passive");
        assert!(c.holds(&Value::set(["passive", "infinitive"])));
        assert!(!c.holds(&Value::Set(vec![])));
        let neg = Condition { negated: true, ..c };
        assert!(neg.holds(&Value::Set(vec![])));
        let eq = Condition::eq("src.head-form".parse().unwrap(), "It");
        assert!(eq.holds(&Value::atom("It")));
        assert!(!eq.holds(&Value::atom("it")));
        assert!(!eq.holds(&Value::set(["It"])));
    }
}
