use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{compute_weights, query_atoms, InstanceBase, Weighting};
use crate::corpus::GrLabel;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, Value};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// Majority class of the training instances reaching this node.
    pub default: GrLabel,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub children: BTreeMap<String, Node>,
}

impl Node {
    pub fn depth(&self) -> usize {
        self.children.values().map(|c| c.depth() + 1).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IgtreeModel {
    pub positions: Vec<String>,
    pub weighting: Weighting,
    pub weights: Vec<f64>,
    /// Position indexes by descending weight; ties keep position order.
    pub order: Vec<usize>,
    pub root: Node,
}

/// Builds the tree over positions in descending-weight order. A node stops
/// expanding once its instances share one class or the positions run out.
pub fn train_igtree(positions: Vec<String>, vectors: &[FeatureVector], weighting: Weighting) -> Result<IgtreeModel> {
    let base = InstanceBase::new(positions, vectors)?;
    let weights = compute_weights(&base, weighting)?;
    let mut order: Vec<usize> = (0..base.arity()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let all: Vec<usize> = (0..base.instances.len()).collect();
    let root = build(&base, &order, &all, 0);
    Ok(IgtreeModel {
        positions: base.positions.clone(),
        weighting,
        weights,
        order,
        root,
    })
}

fn build(base: &InstanceBase, order: &[usize], members: &[usize], depth: usize) -> Node {
    let mut votes: BTreeMap<GrLabel, usize> = BTreeMap::new();
    for &i in members {
        for (l, n) in &base.instances[i].counts {
            *votes.entry(*l).or_insert(0) += n;
        }
    }
    let default = base.resolve_vote(&votes);
    if votes.len() <= 1 || depth == order.len() {
        return Node {
            default,
            children: BTreeMap::new(),
        };
    }
    let pos = order[depth];
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &i in members {
        groups.entry(base.instances[i].values[pos].as_str()).or_default().push(i);
    }
    let children = groups
        .into_iter()
        .map(|(v, m)| (v.to_string(), build(base, order, &m, depth + 1)))
        .collect();
    Node { default, children }
}

impl IgtreeModel {
    /// Follows arcs by the query's values; an unseen value returns the current node's default.
    pub fn classify(&self, query: &[Value]) -> Result<GrLabel> {
        if query.len() != self.positions.len() {
            return Err(Error::Arity {
                expected: self.positions.len(),
                found: query.len(),
            });
        }
        let atoms = query_atoms(query);
        let mut node = &self.root;
        for &pos in &self.order {
            match node.children.get(&atoms[pos]) {
                Some(child) => node = child,
                None => break,
            }
        }
        Ok(node.default)
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}
