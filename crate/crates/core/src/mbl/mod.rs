//! Memory-based learning over symbolic feature vectors.
//!
//! [`Ib1Model`] keeps every training instance and classifies by weighted
//! overlap distance, voting among all instances at the minimal distance.
//! [`IgtreeModel`] compresses the same instance base into a decision tree
//! ordered by feature weight.
//!
//! Class ties are broken by global class frequency, then by label name.

mod igtree;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::GrLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, Value};

pub use igtree::{train_igtree, IgtreeModel, Node};

/// Feature weighting scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    InfoGain,
    GainRatio,
}

/// One distinct value pattern with the class counts of every training
/// instance that had it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredInstance {
    pub values: Vec<String>,
    pub counts: BTreeMap<GrLabel, usize>,
}

impl StoredInstance {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceBase {
    pub positions: Vec<String>,
    /// Sorted by value pattern, so the base is independent of training order.
    pub instances: Vec<StoredInstance>,
    pub class_counts: BTreeMap<GrLabel, usize>,
}

impl InstanceBase {
    /// Builds a base from atom-valued vectors. Set values are rejected.
    pub fn new(positions: Vec<String>, vectors: &[FeatureVector]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptyBase);
        }
        let mut patterns: BTreeMap<Vec<String>, BTreeMap<GrLabel, usize>> = BTreeMap::new();
        let mut class_counts = BTreeMap::new();
        for v in vectors {
            if v.values.len() != positions.len() {
                return Err(Error::Arity {
                    expected: positions.len(),
                    found: v.values.len(),
                });
            }
            let values = v
                .values
                .iter()
                .zip(&positions)
                .map(|(val, pos)| match val {
                    Value::Atom(a) => Ok(a.clone()),
                    Value::Set(_) => Err(Error::SetValued(pos.clone())),
                })
                .collect::<Result<Vec<_>>>()?;
            *patterns.entry(values).or_default().entry(v.class).or_insert(0) += 1;
            *class_counts.entry(v.class).or_insert(0) += 1;
        }
        let instances = patterns
            .into_iter()
            .map(|(values, counts)| StoredInstance { values, counts })
            .collect();
        Ok(InstanceBase {
            positions,
            instances,
            class_counts,
        })
    }

    pub fn len(&self) -> usize {
        self.class_counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.positions.len()
    }

    /// Picks the winning class from a vote tally under the global tie rules.
    pub fn resolve_vote(&self, votes: &BTreeMap<GrLabel, usize>) -> GrLabel {
        votes
            .iter()
            .max_by(|(la, va), (lb, vb)| {
                va.cmp(vb)
                    .then_with(|| self.global(**la).cmp(&self.global(**lb)))
                    .then_with(|| lb.cmp_by_name(la))
            })
            .map(|(l, _)| *l)
            .unwrap_or(GrLabel::None)
    }

    fn global(&self, label: GrLabel) -> usize {
        self.class_counts.get(&label).copied().unwrap_or(0)
    }

    /// Class counts of instances whose value at `position` is each observed value.
    fn value_class_table(&self, position: usize) -> BTreeMap<&str, BTreeMap<GrLabel, usize>> {
        let mut table: BTreeMap<&str, BTreeMap<GrLabel, usize>> = BTreeMap::new();
        for inst in &self.instances {
            let row = table.entry(inst.values[position].as_str()).or_default();
            for (label, n) in &inst.counts {
                *row.entry(*label).or_insert(0) += n;
            }
        }
        table
    }
}

fn entropy<'a>(counts: impl IntoIterator<Item = &'a usize>) -> f64 {
    let counts: Vec<f64> = counts.into_iter().map(|&n| n as f64).collect();
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&n| n > 0.0)
        .map(|&n| {
            let p = n / total;
            -p * p.log2()
        })
        .sum()
}

/// Class entropy minus the expected class entropy after splitting on `position`, in bits.
pub fn information_gain(base: &InstanceBase, position: usize) -> Result<f64> {
    if base.is_empty() {
        return Err(Error::EmptyBase);
    }
    if position >= base.arity() {
        return Err(Error::invalid(format!("position {position} out of range")));
    }
    let total = base.len() as f64;
    let prior = entropy(base.class_counts.values());
    let conditional: f64 = base
        .value_class_table(position)
        .values()
        .map(|row| {
            let n: usize = row.values().sum();
            n as f64 / total * entropy(row.values())
        })
        .sum();
    // clamp rounding noise around zero
    Ok((prior - conditional).max(0.0))
}

/// Information gain normalized by the entropy of the value distribution.
pub fn gain_ratio(base: &InstanceBase, position: usize) -> Result<f64> {
    let gain = information_gain(base, position)?;
    let split: Vec<usize> = base.value_class_table(position).values().map(|row| row.values().sum()).collect();
    let split_info = entropy(split.iter());
    Ok(if split_info > 0.0 { gain / split_info } else { 0.0 })
}

pub fn compute_weights(base: &InstanceBase, weighting: Weighting) -> Result<Vec<f64>> {
    (0..base.arity())
        .map(|i| match weighting {
            Weighting::InfoGain => information_gain(base, i),
            Weighting::GainRatio => gain_ratio(base, i),
        })
        .collect()
}

/// Per-position symbol tables, so distance computation compares integers.
#[derive(Clone, Debug, Default)]
struct Codebook {
    tables: Vec<HashMap<String, u32>>,
    coded: Vec<Vec<u32>>,
}

const UNSEEN: u32 = u32::MAX;

impl Codebook {
    fn build(base: &InstanceBase) -> Self {
        let mut tables: Vec<HashMap<String, u32>> = vec![HashMap::new(); base.arity()];
        let coded = base
            .instances
            .iter()
            .map(|inst| {
                inst.values
                    .iter()
                    .zip(tables.iter_mut())
                    .map(|(v, t)| {
                        let next = t.len() as u32;
                        *t.entry(v.clone()).or_insert(next)
                    })
                    .collect()
            })
            .collect();
        Codebook { tables, coded }
    }

    fn encode(&self, query: &[String]) -> Vec<u32> {
        query
            .iter()
            .zip(&self.tables)
            .map(|(v, t)| t.get(v).copied().unwrap_or(UNSEEN))
            .collect()
    }
}

/// Atom values of a query vector; sets are encoded as single symbols.
pub(crate) fn query_atoms(values: &[Value]) -> Vec<String> {
    values.iter().map(Value::atomized).collect()
}

/// Converts set values to their atomized form so the vector can be stored.
pub fn atomize(vectors: &[FeatureVector]) -> Vec<FeatureVector> {
    vectors
        .iter()
        .map(|v| FeatureVector {
            values: v.values.iter().map(|x| Value::Atom(x.atomized())).collect(),
            class: v.class,
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ib1Model {
    pub base: InstanceBase,
    pub weighting: Weighting,
    pub weights: Vec<f64>,
    #[serde(skip)]
    codebook: Option<Codebook>,
}

impl PartialEq for Ib1Model {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.weighting == other.weighting && self.weights == other.weights
    }
}

/// Stores every vector and computes feature weights. No generalization is performed.
pub fn train_ib1(positions: Vec<String>, vectors: &[FeatureVector], weighting: Weighting) -> Result<Ib1Model> {
    let base = InstanceBase::new(positions, vectors)?;
    let weights = compute_weights(&base, weighting)?;
    Ok(Ib1Model::from_parts(base, weighting, weights))
}

impl Ib1Model {
    pub fn from_parts(base: InstanceBase, weighting: Weighting, weights: Vec<f64>) -> Self {
        let codebook = Some(Codebook::build(&base));
        Ib1Model {
            base,
            weighting,
            weights,
            codebook,
        }
    }

    /// Rebuilds lookup tables after deserialization.
    pub fn prepare(&mut self) {
        if self.codebook.is_none() {
            self.codebook = Some(Codebook::build(&self.base));
        }
    }

    /// Nearest-neighbor class and its weighted overlap distance.
    pub fn classify(&self, query: &[Value]) -> Result<(GrLabel, f64)> {
        if query.len() != self.base.arity() {
            return Err(Error::Arity {
                expected: self.base.arity(),
                found: query.len(),
            });
        }
        let atoms = query_atoms(query);
        let built;
        let codebook = match &self.codebook {
            Some(cb) => cb,
            None => {
                built = Codebook::build(&self.base);
                &built
            }
        };
        let q = codebook.encode(&atoms);

        let mut best = f64::INFINITY;
        let mut nearest: Vec<usize> = Vec::new();
        for (idx, inst) in codebook.coded.iter().enumerate() {
            let mut d = 0.0;
            for ((a, b), w) in inst.iter().zip(&q).zip(&self.weights) {
                if a != b {
                    d += w;
                }
            }
            let tol = 1e-12 * d.max(1.0);
            if nearest.is_empty() || d < best - tol {
                best = d;
                nearest.clear();
                nearest.push(idx);
            } else if (d - best).abs() <= tol {
                nearest.push(idx);
            }
        }
        let mut votes: BTreeMap<GrLabel, usize> = BTreeMap::new();
        for idx in nearest {
            for (label, n) in &self.base.instances[idx].counts {
                *votes.entry(*label).or_insert(0) += n;
            }
        }
        Ok((self.base.resolve_vote(&votes), best))
    }
}

/// Either memory-based model, with a versioned JSON envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum MblModel {
    Ib1(Ib1Model),
    Igtree(IgtreeModel),
}

pub const MODEL_FORMAT: &str = "grfinder-mbl";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: MblModel,
}

impl MblModel {
    pub fn classify(&self, query: &[Value]) -> Result<GrLabel> {
        match self {
            MblModel::Ib1(m) => m.classify(query).map(|(l, _)| l),
            MblModel::Igtree(m) => m.classify(query),
        }
    }

    pub fn prepare(&mut self) {
        if let MblModel::Ib1(m) = self {
            m.prepare();
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Envelope {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text)?;
        if env.format != MODEL_FORMAT || env.version != MODEL_VERSION {
            return Err(Error::invalid(format!("unsupported model format {} v{}", env.format, env.version)));
        }
        let mut model = env.model;
        model.prepare();
        Ok(model)
    }
}
