//! Turns an annotated corpus plus dependency parses into path instances.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::FeatureSettings;
use super::PipelineError;
use crate::corpus::{generalize_with_map, generate_candidates, index_by_id, Label, SentenceRecord};
use crate::depgraph::{build_graph, sdp_tokens, Edge, PathError, MAX_SDP_TOKENS};

/// Tokens of one candidate pair's shortest dependency path, from the first
/// target to the second.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdpInstance {
    pub id: String,
    pub sentence_id: String,
    pub tokens: Vec<String>,
    pub pos_tags: Vec<String>,
    pub label: Label,
}

impl SdpInstance {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Signed offset of path token `k` from the first target (always ≥ 0).
    pub fn distance_to_first(&self, k: usize) -> i64 {
        k as i64
    }

    /// Signed offset of path token `k` from the second target (always ≤ 0).
    pub fn distance_to_second(&self, k: usize) -> i64 {
        k as i64 - (self.tokens.len() as i64 - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExclusionReason {
    Disconnected,
    PathTooLong { tokens: usize },
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExclusionReason::Disconnected => f.write_str("disconnected"),
            ExclusionReason::PathTooLong { tokens } => write!(f, "path too long ({tokens} tokens)"),
        }
    }
}

/// A candidate pair without a usable path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub id: String,
    pub sentence_id: String,
    pub label: Label,
    pub reason: ExclusionReason,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionTally {
    pub disconnected: usize,
    pub too_long: usize,
}

/// Everything preprocessing produced: usable instances, the excluded pairs
/// and the feature settings the instances are meant to be encoded with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSet {
    pub features: FeatureSettings,
    pub instances: Vec<SdpInstance>,
    pub excluded: Vec<Exclusion>,
}

impl InstanceSet {
    /// Candidate pairs generated, usable or not.
    pub fn generated(&self) -> usize {
        self.instances.len() + self.excluded.len()
    }

    pub fn tally(&self) -> ExclusionTally {
        let mut t = ExclusionTally::default();
        for e in &self.excluded {
            match e.reason {
                ExclusionReason::Disconnected => t.disconnected += 1,
                ExclusionReason::PathTooLong { .. } => t.too_long += 1,
            }
        }
        t
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PipelineError> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| PipelineError::read(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Maps dependency edges onto the generalized token indices. Edges that
/// fall inside one collapsed entity span disappear.
fn remap_edges(edges: &[Edge], index_map: &[usize], sentence: &str) -> Result<Vec<Edge>, PipelineError> {
    let mut out = Vec::with_capacity(edges.len());
    for e in edges {
        let (Some(&h), Some(&d)) = (index_map.get(e.head), index_map.get(e.dependent)) else {
            return Err(PipelineError::BadEdge {
                sentence: sentence.to_owned(),
                head: e.head,
                dependent: e.dependent,
                tokens: index_map.len(),
            });
        };
        if h != d {
            out.push(Edge::new(h, d, e.relation.clone()));
        }
    }
    Ok(out)
}

/// Extracts the shortest dependency path of every candidate pair. Pairs
/// whose targets are unconnected, or whose path exceeds the token limit,
/// are listed as exclusions instead.
pub fn preprocess(
    corpus: &[SentenceRecord],
    deps: &BTreeMap<String, Vec<Edge>>,
    features: FeatureSettings,
) -> Result<InstanceSet, PipelineError> {
    let by_id = index_by_id(corpus);
    if by_id.len() != corpus.len() {
        return Err(PipelineError::Input("corpus repeats a sentence id".into()));
    }
    let mut instances = Vec::new();
    let mut excluded = Vec::new();
    for s in corpus {
        s.validate()
            .map_err(|r| PipelineError::Input(format!("sentence `{}`: {r}", s.id)))?;
        let edges = deps
            .get(&s.id)
            .ok_or_else(|| PipelineError::MissingDependencyData(s.id.clone()))?;
        for pair in generate_candidates(s) {
            let g = generalize_with_map(s, &pair)?;
            let remapped = remap_edges(edges, &g.index_map, &s.id)?;
            let graph = build_graph(&g.sentence, remapped).map_err(|source| PipelineError::Graph {
                sentence: s.id.clone(),
                source,
            })?;
            let src = g.sentence.entity(&pair.prot1).map(|e| e.start);
            let dst = g.sentence.entity(&pair.prot2).map(|e| e.start);
            let (Some(src), Some(dst)) = (src, dst) else {
                unreachable!("generalize_with_map checked both targets");
            };
            let reason = match graph.shortest_path(src, dst) {
                Ok(path) => {
                    let (tokens, pos_tags) = sdp_tokens(&path, &g.sentence).into_iter().unzip();
                    instances.push(SdpInstance {
                        id: pair.instance_id(),
                        sentence_id: s.id.clone(),
                        tokens,
                        pos_tags,
                        label: pair.label,
                    });
                    continue;
                }
                Err(PathError::Disconnected { .. }) => ExclusionReason::Disconnected,
                Err(PathError::PathTooLong { tokens, .. }) => ExclusionReason::PathTooLong { tokens },
                Err(e) => {
                    return Err(PipelineError::Input(format!("sentence `{}`: {e}", s.id)));
                }
            };
            excluded.push(Exclusion {
                id: pair.instance_id(),
                sentence_id: s.id.clone(),
                label: pair.label,
                reason,
            });
        }
    }
    let set = InstanceSet {
        features,
        instances,
        excluded,
    };
    let t = set.tally();
    if !set.excluded.is_empty() {
        log::info!(
            "excluded {} of {} candidate pairs ({} disconnected, {} longer than {MAX_SDP_TOKENS} tokens)",
            set.excluded.len(),
            set.generated(),
            t.disconnected,
            t.too_long
        );
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(line: &str) -> SentenceRecord {
        SentenceRecord::parse_line(line, 1).unwrap()
    }

    #[test]
    fn multi_token_entity_collapses() {
        // "Rho family member" spans tokens 1..=3
        let s = sentence("m\tA|NN binds|VBZ Rho|NN family|NN member|NN\tA:0:0;R:2:4\tA-R");
        let deps = BTreeMap::from([(
            "m".to_owned(),
            vec![
                Edge::new(1, 0, "ARG1"),
                Edge::new(1, 4, "ARG2"),
                Edge::new(4, 2, "mod"),
                Edge::new(4, 3, "mod"),
            ],
        )]);
        let set = preprocess(&[s], &deps, FeatureSettings::default()).unwrap();
        assert_eq!(set.instances.len(), 1);
        let inst = &set.instances[0];
        assert_eq!(inst.tokens, ["PROT1", "binds", "PROT2"]);
        assert_eq!(inst.pos_tags, ["NN", "VBZ", "NN"]);
        assert_eq!(inst.label, Label::Interacting);
        assert_eq!(inst.id, "m:A:R");
    }

    #[test]
    fn edgeless_sentence_is_excluded() {
        let s = sentence("e\tA|NN and|CC B|NN\tA:0:0;B:2:2\t");
        let deps = BTreeMap::from([("e".to_owned(), vec![])]);
        let set = preprocess(&[s], &deps, FeatureSettings::default()).unwrap();
        assert!(set.instances.is_empty());
        assert_eq!(
            set.tally(),
            ExclusionTally {
                disconnected: 1,
                too_long: 0
            }
        );
        assert_eq!(set.generated(), 1);
    }

    #[test]
    fn missing_parse_is_an_error() {
        let s = sentence("x\tA|NN B|NN\tA:0:0;B:1:1\t");
        assert!(matches!(
            preprocess(&[s], &BTreeMap::new(), FeatureSettings::default()),
            Err(PipelineError::MissingDependencyData(id)) if id == "x"
        ));
    }

    #[test]
    fn long_paths_are_excluded() {
        let n = 45;
        let mut toks = Vec::new();
        for i in 0..n {
            toks.push(format!("w{i}|NN"));
        }
        let s = sentence(&format!("l\t{}\tA:0:0;B:{}:{}\t", toks.join(" "), n - 1, n - 1));
        let chain = (0..n - 1).map(|i| Edge::new(i, i + 1, "next")).collect();
        let deps = BTreeMap::from([("l".to_owned(), chain)]);
        let set = preprocess(&[s], &deps, FeatureSettings::default()).unwrap();
        assert_eq!(set.tally().too_long, 1);
        assert_eq!(set.excluded[0].reason, ExclusionReason::PathTooLong { tokens: 45 });
    }

    #[test]
    fn out_of_range_edge_is_reported() {
        let s = sentence("o\tA|NN B|NN\tA:0:0;B:1:1\t");
        let deps = BTreeMap::from([("o".to_owned(), vec![Edge::new(0, 7, "x")])]);
        assert!(matches!(
            preprocess(&[s], &deps, FeatureSettings::default()),
            Err(PipelineError::BadEdge {
                head: 0,
                dependent: 7,
                ..
            })
        ));
    }

    #[test]
    fn distances_span_the_path() {
        let inst = SdpInstance {
            id: "i".into(),
            sentence_id: "s".into(),
            tokens: vec!["a".into(); 7],
            pos_tags: vec!["NN".into(); 7],
            label: Label::NonInteracting,
        };
        let d1: Vec<i64> = (0..7).map(|k| inst.distance_to_first(k)).collect();
        let d2: Vec<i64> = (0..7).map(|k| inst.distance_to_second(k)).collect();
        assert_eq!(d1, [0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(d2, [-6, -5, -4, -3, -2, -1, 0]);
    }
}
