//! Undirected dependency graphs over sentence tokens and shortest
//! dependency path extraction between two target tokens.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SentenceRecord;

/// Paths with more tokens than this are rejected.
pub const MAX_SDP_TOKENS: usize = 40;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({head}, {dependent}) out of range for {node_count} tokens")]
    IndexOutOfRange {
        head: usize,
        dependent: usize,
        node_count: usize,
    },
    #[error("self loop on token {0}")]
    SelfLoop(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("no path between tokens {src} and {dst}")]
    Disconnected { src: usize, dst: usize },
    #[error("path of {tokens} tokens exceeds the cap of {max}")]
    PathTooLong { tokens: usize, max: usize },
    #[error("source and destination are both token {0}")]
    SameEndpoints(usize),
    #[error("token {index} out of range for {node_count} tokens")]
    IndexOutOfRange { index: usize, node_count: usize },
}

#[derive(Debug, Error)]
pub enum DepFileError {
    #[error("dependency file not found: {0}")]
    FileNotFound(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub head: usize,
    pub dependent: usize,
    pub relation: String,
}

impl Edge {
    pub fn new(head: usize, dependent: usize, relation: impl Into<String>) -> Self {
        Edge {
            head,
            dependent,
            relation: relation.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    pub sentence_id: String,
    pub node_count: usize,
    pub edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl DependencyGraph {
    /// Builds the graph. Identical edges are collapsed; neighbor lists are
    /// kept sorted so traversal order is deterministic.
    pub fn new(
        sentence_id: impl Into<String>,
        node_count: usize,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, GraphError> {
        let mut unique = BTreeSet::new();
        for e in edges {
            if e.head >= node_count || e.dependent >= node_count {
                return Err(GraphError::IndexOutOfRange {
                    head: e.head,
                    dependent: e.dependent,
                    node_count,
                });
            }
            if e.head == e.dependent {
                return Err(GraphError::SelfLoop(e.head));
            }
            unique.insert(e);
        }

        let mut adjacency = vec![BTreeSet::new(); node_count];
        for e in &unique {
            adjacency[e.head].insert(e.dependent);
            adjacency[e.dependent].insert(e.head);
        }

        Ok(DependencyGraph {
            sentence_id: sentence_id.into(),
            node_count,
            edges: unique.into_iter().collect(),
            adjacency: adjacency.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Shortest path by breadth-first search, neighbors visited in ascending
    /// index order. Among several shortest paths the lexicographically
    /// smallest node sequence is returned.
    pub fn shortest_path(&self, src: usize, dst: usize) -> Result<SdpPath, PathError> {
        for index in [src, dst] {
            if index >= self.node_count {
                return Err(PathError::IndexOutOfRange {
                    index,
                    node_count: self.node_count,
                });
            }
        }
        if src == dst {
            return Err(PathError::SameEndpoints(src));
        }

        let mut parent = vec![usize::MAX; self.node_count];
        parent[src] = src;
        let mut queue = VecDeque::from([src]);
        'search: while let Some(node) = queue.pop_front() {
            for &next in &self.adjacency[node] {
                if parent[next] == usize::MAX {
                    parent[next] = node;
                    if next == dst {
                        break 'search;
                    }
                    queue.push_back(next);
                }
            }
        }
        if parent[dst] == usize::MAX {
            return Err(PathError::Disconnected { src, dst });
        }

        let mut nodes = vec![dst];
        let mut cur = dst;
        while cur != src {
            cur = parent[cur];
            nodes.push(cur);
        }
        nodes.reverse();

        if nodes.len() > MAX_SDP_TOKENS {
            return Err(PathError::PathTooLong {
                tokens: nodes.len(),
                max: MAX_SDP_TOKENS,
            });
        }
        Ok(SdpPath { nodes })
    }

    /// Checks that `path` is a walk in this graph.
    pub fn is_valid_path(&self, path: &SdpPath) -> bool {
        path.nodes.iter().all(|&n| n < self.node_count) && path.nodes.windows(2).all(|w| self.are_adjacent(w[0], w[1]))
    }
}

/// Builds the graph for a sentence; the node count is the token count.
pub fn build_graph(s: &SentenceRecord, edges: impl IntoIterator<Item = Edge>) -> Result<DependencyGraph, GraphError> {
    DependencyGraph::new(s.id.clone(), s.tokens.len(), edges)
}

pub fn shortest_path(g: &DependencyGraph, src: usize, dst: usize) -> Result<SdpPath, PathError> {
    g.shortest_path(src, dst)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdpPath {
    pub nodes: Vec<usize>,
}

impl SdpPath {
    /// Hop count.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() < 2
    }
}

/// Tokens and PoS tags along the path, in path order.
pub fn sdp_tokens(p: &SdpPath, s: &SentenceRecord) -> Vec<(String, String)> {
    p.nodes
        .iter()
        .map(|&i| (s.tokens[i].clone(), s.pos_tags[i].clone()))
        .collect()
}

/// Reads `sentence_id<TAB>head<TAB>dependent<TAB>relation` lines, grouped by
/// sentence id. A line holding only a sentence id declares a sentence whose
/// parse has no edges; sentences without any line do not appear.
pub fn read_dependencies<R: Read>(reader: R) -> Result<BTreeMap<String, Vec<Edge>>, DepFileError> {
    let mut out: BTreeMap<String, Vec<Edge>> = BTreeMap::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| DepFileError::Parse { line: line_no, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() == 1 {
            out.entry(fields[0].to_owned()).or_default();
            continue;
        }
        if fields.len() != 4 {
            return Err(err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let head = fields[1]
            .trim()
            .parse::<usize>()
            .map_err(|_| err(format!("bad head index `{}`", fields[1])))?;
        let dependent = fields[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| err(format!("bad dependent index `{}`", fields[2])))?;
        out.entry(fields[0].to_owned())
            .or_default()
            .push(Edge::new(head, dependent, fields[3]));
    }
    Ok(out)
}

pub fn load_dependencies(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<Edge>>, DepFileError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DepFileError::FileNotFound(path.display().to_string()),
        _ => DepFileError::Io(e),
    })?;
    read_dependencies(file)
}

pub fn write_dependencies<W: std::io::Write>(mut w: W, deps: &BTreeMap<String, Vec<Edge>>) -> std::io::Result<()> {
    for (id, edges) in deps {
        if edges.is_empty() {
            writeln!(w, "{id}")?;
        }
        for e in edges {
            writeln!(w, "{}\t{}\t{}\t{}", id, e.head, e.dependent, e.relation)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SentenceRecord;

    /// "Prot1 is shown to bind with cell surface of Prot2"
    fn surface_binding() -> (SentenceRecord, Vec<Edge>) {
        let s = SentenceRecord::parse_line(
            "f2\tProt1|NN is|VBZ shown|VBN to|TO bind|VB with|IN cell|NN surface|NN of|IN Prot2|NN\tp1:0:0;p2:9:9\tp1-p2",
            1,
        )
        .unwrap();
        let edges = vec![
            Edge::new(1, 2, "ARG2"),
            Edge::new(2, 4, "ARG2"),
            Edge::new(3, 4, "ARG1"),
            Edge::new(4, 0, "ARG1"),
            Edge::new(5, 4, "ARG1"),
            Edge::new(5, 7, "ARG2"),
            Edge::new(6, 7, "ARG1"),
            Edge::new(8, 7, "ARG1"),
            Edge::new(8, 9, "ARG2"),
        ];
        (s, edges)
    }

    #[test]
    fn surface_binding_path() {
        let (s, edges) = surface_binding();
        let g = build_graph(&s, edges).unwrap();
        assert_eq!(g.node_count, 10);
        let p = shortest_path(&g, 0, 9).unwrap();
        let words: Vec<String> = sdp_tokens(&p, &s).into_iter().map(|(t, _)| t).collect();
        assert_eq!(words, ["Prot1", "bind", "with", "surface", "of", "Prot2"]);
        assert_eq!(p.len(), 5);
        assert!(g.is_valid_path(&p));
    }

    #[test]
    fn empty_edges_give_isolated_nodes() {
        let g = DependencyGraph::new("s", 4, vec![]).unwrap();
        assert!((0..4).all(|i| g.neighbors(i).is_empty()));
        assert_eq!(g.shortest_path(0, 3), Err(PathError::Disconnected { src: 0, dst: 3 }));
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(
            DependencyGraph::new("s", 5, vec![Edge::new(3, 3, "x")]),
            Err(GraphError::SelfLoop(3))
        );
        assert!(matches!(
            DependencyGraph::new("s", 5, vec![Edge::new(1, 5, "x")]),
            Err(GraphError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = DependencyGraph::new(
            "s",
            3,
            vec![Edge::new(0, 1, "a"), Edge::new(0, 1, "a"), Edge::new(1, 0, "b")],
        )
        .unwrap();
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn adjacent_endpoints() {
        let g = DependencyGraph::new("s", 2, vec![Edge::new(1, 0, "a")]).unwrap();
        let p = g.shortest_path(0, 1).unwrap();
        assert_eq!(p.nodes, vec![0, 1]);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn tie_break_prefers_smaller_indices() {
        // 0-3-1 and 0-2-1 are both shortest; expect 0-2-1
        let g = DependencyGraph::new(
            "s",
            4,
            vec![
                Edge::new(0, 3, "a"),
                Edge::new(3, 1, "a"),
                Edge::new(2, 1, "a"),
                Edge::new(0, 2, "a"),
            ],
        )
        .unwrap();
        assert_eq!(g.shortest_path(0, 1).unwrap().nodes, vec![0, 2, 1]);
    }

    #[test]
    fn path_cap() {
        let n = MAX_SDP_TOKENS + 1;
        let edges = (0..n - 1).map(|i| Edge::new(i, i + 1, "x"));
        let g = DependencyGraph::new("s", n, edges).unwrap();
        assert_eq!(
            g.shortest_path(0, n - 1),
            Err(PathError::PathTooLong {
                tokens: n,
                max: MAX_SDP_TOKENS
            })
        );
        assert_eq!(g.shortest_path(0, n - 2).unwrap().nodes.len(), MAX_SDP_TOKENS);
    }

    #[test]
    fn endpoint_errors() {
        let g = DependencyGraph::new("s", 2, vec![Edge::new(0, 1, "a")]).unwrap();
        assert_eq!(g.shortest_path(1, 1), Err(PathError::SameEndpoints(1)));
        assert!(matches!(g.shortest_path(0, 2), Err(PathError::IndexOutOfRange { .. })));
    }

    #[test]
    fn reads_dependency_file() {
        let text = "a\t0\t1\tARG1\na\t1\t2\tARG2\n\nb\t0\t1\tmod\n";
        let deps = read_dependencies(text.as_bytes()).unwrap();
        assert_eq!(deps["a"].len(), 2);
        assert_eq!(deps["b"], vec![Edge::new(0, 1, "mod")]);

        let bad = "a\tx\t1\tARG1\n";
        assert!(matches!(
            read_dependencies(bad.as_bytes()),
            Err(DepFileError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn edgeless_sentences_round_trip() {
        let deps = read_dependencies("lonely\na\t0\t1\tmod\n".as_bytes()).unwrap();
        assert!(deps["lonely"].is_empty());
        let mut buf = Vec::new();
        write_dependencies(&mut buf, &deps).unwrap();
        assert_eq!(read_dependencies(&buf[..]).unwrap(), deps);
    }
}
