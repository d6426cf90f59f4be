//! Random chunked sentences in corpus format, built without the synthesizer.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

const NOUNS: &[(&str, &str)] = &[("cat", "NN"), ("dogs", "NNS"), ("Mary", "NNP"), ("it", "PRP"), ("food", "NN")];
const VERBS: &[(&str, &str)] = &[("ate", "VBD"), ("is", "VBZ"), ("eaten", "VBN"), ("run", "VB"), ("going", "VBG")];
const PREPS: &[(&str, &str)] = &[("on", "IN"), ("in", "IN"), ("to", "TO")];
const ADVS: &[(&str, &str)] = &[("often", "RB"), ("home", "RB")];
const ADJS: &[(&str, &str)] = &[("big", "JJ"), ("happy", "JJ")];
const STRAYS: &[(&str, &str)] = &[(",", ","), ("and", "CC"), (".", ".")];
const LABELS: &[&str] = &["subject", "object", "time-mod", "location-mod", "prep-object", "copula-object"];

/// One sentence with `1..=max_chunks` chunks (strays included) and a few
/// relations from non-stray heads to verb heads.
pub fn random_sentence<R: Rng>(rng: &mut R, max_chunks: usize) -> String {
    let n = rng.gen_range(1..=max_chunks);
    let mut rows = Vec::new();
    let mut heads: Vec<(usize, bool)> = Vec::new();
    for _ in 0..n {
        let (tag, lex) = match rng.gen_range(0..6) {
            0 => ("NP", NOUNS),
            1 => ("VP", VERBS),
            2 => ("PP", PREPS),
            3 => ("ADVP", ADVS),
            4 => ("ADJP", ADJS),
            _ => ("O", STRAYS),
        };
        let len = if tag == "O" { 1 } else { rng.gen_range(1..=2) };
        for k in 0..len {
            let (form, pos) = lex.choose(rng).unwrap();
            let bio = match (tag, k) {
                ("O", _) => "O".to_string(),
                (_, 0) => format!("B-{tag}"),
                _ => format!("I-{tag}"),
            };
            rows.push(format!("{} {form} {pos} {bio} _ _", rows.len()));
        }
        if tag != "O" {
            heads.push((rows.len() - 1, tag == "VP"));
        }
    }
    let verbs: Vec<usize> = heads.iter().filter(|h| h.1).map(|h| h.0).collect();
    let mut grs = std::collections::BTreeMap::new();
    if !verbs.is_empty() {
        for &(h, _) in &heads {
            if rng.gen_bool(0.3) {
                let t = *verbs.choose(rng).unwrap();
                if t != h {
                    grs.insert((h, t), *LABELS.choose(rng).unwrap());
                }
            }
        }
    }
    let mut out = rows.join("\n");
    out.push('\n');
    for ((h, t), label) in grs {
        out.push_str(&format!("#GR {h} {t} {label}\n"));
    }
    out
}

pub fn random_corpus<R: Rng>(rng: &mut R, sentences: usize, max_chunks: usize) -> String {
    (0..sentences)
        .map(|_| random_sentence(rng, max_chunks))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Majority class among training vectors that agree with `query` on every
/// position of positive weight; ties go to the globally more frequent class,
/// then to the alphabetically first label name.
pub fn class_at_distance_zero(
    vectors: &[grfinder::features::FeatureVector],
    weights: &[f64],
    query: &[grfinder::features::Value],
) -> grfinder::corpus::GrLabel {
    use std::collections::BTreeMap;
    let mut global: BTreeMap<String, usize> = BTreeMap::new();
    let mut votes: BTreeMap<String, usize> = BTreeMap::new();
    let mut by_name = BTreeMap::new();
    for v in vectors {
        let name = v.class.to_string();
        by_name.insert(name.clone(), v.class);
        *global.entry(name.clone()).or_default() += 1;
        let same = v.values.iter().zip(query).zip(weights).all(|((a, b), w)| *w <= 0.0 || a == b);
        if same {
            *votes.entry(name).or_default() += 1;
        }
    }
    let best = votes
        .iter()
        .max_by(|(na, va), (nb, vb)| va.cmp(vb).then(global[*na].cmp(&global[*nb])).then(nb.cmp(na)))
        .map(|(n, _)| n.clone())
        .expect("query has a zero-distance neighbor");
    by_name[&best]
}
