//! Generated corpora with known labels, for tests and demonstrations.
//!
//! In [`synthetic_corpus`] a pair interacts exactly when the path between
//! its two proteins runs through `bind` or `interacts`. Negative sentences
//! may still mention `bind` in a clause off that path.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Entity, SentenceRecord};
use crate::depgraph::Edge;
use crate::embed::EmbeddingTable;

/// Path verbs that mark an interaction.
pub const POSITIVE_VERBS: [&str; 2] = ["bind", "interacts"];
const NEGATIVE_VERBS: [&str; 4] = ["regulates", "resembles", "precedes", "coexists"];
const PROTEINS: [&str; 10] = [
    "RAD51", "BRCA2", "p53", "MDM2", "Ku70", "actin", "Stat3", "Bnr1p", "Rho4p", "cofilin",
];
const CLAUSE_VERBS: [&str; 3] = ["cleave", "bind", "coat"];

pub struct SyntheticCorpus {
    pub sentences: Vec<SentenceRecord>,
    pub deps: BTreeMap<String, Vec<Edge>>,
    /// Vectors for every word the generator can emit.
    pub embeddings: EmbeddingTable,
}

/// Verbs followed by `with` before the second protein.
fn takes_with(verb: &str) -> bool {
    matches!(verb, "interacts" | "coexists")
}

fn tag_of(word: &str) -> &'static str {
    match word {
        "bind" | "cleave" | "coat" => "VB",
        "can" => "MD",
        "with" | "In" => "IN",
        "which" => "WDT",
        "," => ",",
        "." => ".",
        "vitro" => "NN",
        "DNA" => "NN",
        w if w.ends_with('s') && w.chars().next().is_some_and(|c| c.is_lowercase()) => "VBZ",
        _ => "NN",
    }
}

struct Builder {
    tokens: Vec<&'static str>,
    edges: Vec<(usize, usize, &'static str)>,
}

impl Builder {
    fn push(&mut self, w: &'static str) -> usize {
        self.tokens.push(w);
        self.tokens.len() - 1
    }
}

/// One two-protein sentence whose main verb is `verb`, with the token
/// indices of both proteins.
fn sentence(rng: &mut ChaCha8Rng, verb: &'static str, clause_verb: Option<&'static str>) -> (Builder, usize, usize) {
    let mut b = Builder {
        tokens: Vec::new(),
        edges: Vec::new(),
    };
    let prefix = rng.gen_bool(0.3);
    let pair: Vec<&&str> = PROTEINS.choose_multiple(rng, 2).collect();
    let (p1, p2) = (*pair[0], *pair[1]);

    let (in_, vitro, comma0) = if prefix {
        (Some(b.push("In")), Some(b.push("vitro")), Some(b.push(",")))
    } else {
        (None, None, None)
    };
    let a = b.push(p1);
    if let Some(cv) = clause_verb {
        let c1 = b.push(",");
        let which = b.push("which");
        let can = b.push("can");
        let v = b.push(cv);
        let dna = b.push("DNA");
        let c2 = b.push(",");
        b.edges.extend([
            (a, c1, "punct"),
            (v, which, "ARG1"),
            (v, can, "aux"),
            (v, dna, "ARG2"),
            (a, v, "rel"),
            (a, c2, "punct"),
        ]);
    }
    let aux = (verb == "bind").then(|| b.push("can"));
    let v = b.push(verb);
    let with = takes_with(verb).then(|| b.push("with"));
    let p = b.push(p2);
    let stop = b.push(".");
    b.edges.push((v, a, "ARG1"));
    match with {
        Some(w) => b.edges.extend([(v, w, "ARG2"), (w, p, "ARG2")]),
        None => b.edges.push((v, p, "ARG2")),
    }
    if let Some(x) = aux {
        b.edges.push((v, x, "aux"));
    }
    b.edges.push((v, stop, "punct"));
    if let (Some(i), Some(vi), Some(c)) = (in_, vitro, comma0) {
        b.edges.extend([(v, i, "mod"), (i, vi, "ARG2"), (v, c, "punct")]);
    }
    (b, a, p)
}

/// `n` two-protein sentences, half of them (rounded down) interacting, in
/// shuffled order. Word vectors have `word_dim` components uniform in [-1, 1].
pub fn synthetic_corpus(n: usize, seed: u64, word_dim: usize) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
    labels.shuffle(&mut rng);

    let mut sentences = Vec::with_capacity(n);
    let mut deps = BTreeMap::new();
    for (i, &positive) in labels.iter().enumerate() {
        let verb = if positive {
            *POSITIVE_VERBS.choose(&mut rng).unwrap()
        } else {
            *NEGATIVE_VERBS.choose(&mut rng).unwrap()
        };
        let clause_verb = if rng.gen_bool(0.4) {
            Some(if positive {
                "cleave"
            } else {
                *CLAUSE_VERBS[1..].choose(&mut rng).unwrap()
            })
        } else if !positive && rng.gen_bool(0.3) {
            Some("bind")
        } else {
            None
        };
        let (Builder { tokens, edges }, a, p) = sentence(&mut rng, verb, clause_verb);
        let id = format!("syn{i:03}");
        let record = SentenceRecord {
            id: id.clone(),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
            pos_tags: tokens.iter().map(|t| tag_of(t).to_string()).collect(),
            entities: vec![Entity::new("e1", a, a), Entity::new("e2", p, p)],
            interactions: if positive {
                vec![("e1".into(), "e2".into())]
            } else {
                vec![]
            },
        };
        debug_assert!(record.validate().is_ok());
        sentences.push(record);
        deps.insert(id, edges.into_iter().map(|(h, d, r)| Edge::new(h, d, r)).collect());
    }

    let vocab: BTreeSet<&str> = PROTEINS
        .iter()
        .chain(&POSITIVE_VERBS)
        .chain(&NEGATIVE_VERBS)
        .chain(&CLAUSE_VERBS)
        .chain(&["can", "with", "In", "vitro", "which", "DNA", ",", "."])
        .copied()
        .collect();
    let mut emb_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xE3B);
    let rows = vocab.into_iter().map(|w| {
        (
            w.to_owned(),
            (0..word_dim).map(|_| emb_rng.gen_range(-1.0..=1.0)).collect(),
        )
    });
    let embeddings = EmbeddingTable::from_rows(word_dim, seed, rows).expect("rows match word_dim");

    SyntheticCorpus {
        sentences,
        deps,
        embeddings,
    }
}

/// Sentences with two to four proteins whose candidate pairs contain exactly
/// `positives` interacting and `negatives` non-interacting pairs. About
/// `edgeless_fraction` of the sentences come without dependency edges.
pub fn proportional_fixture(
    positives: usize,
    negatives: usize,
    edgeless_fraction: f64,
    seed: u64,
) -> (Vec<SentenceRecord>, BTreeMap<String, Vec<Edge>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut p_left, mut n_left) = (positives, negatives);
    let mut sentences = Vec::new();
    let mut deps = BTreeMap::new();
    while p_left + n_left > 0 {
        let left = p_left + n_left;
        let m = (2..=4usize)
            .filter(|m| m * (m - 1) / 2 <= left)
            .collect::<Vec<_>>()
            .choose(&mut rng)
            .copied()
            .unwrap_or(2);
        let pairs = m * (m - 1) / 2;
        let lo = pairs.saturating_sub(n_left);
        let hi = pairs.min(p_left);
        let pos = rng.gen_range(lo..=hi);
        p_left -= pos;
        n_left -= pairs - pos;

        let id = format!("fx{:05}", sentences.len());
        let mut tokens: Vec<String> = (0..m).map(|j| format!("Prot{j}")).collect();
        let mut tags = vec!["NN".to_string(); m];
        tokens.extend(["associate".to_string(), ".".to_string()]);
        tags.extend(["VBP".to_string(), ".".to_string()]);
        let entities: Vec<Entity> = (0..m).map(|j| Entity::new(format!("p{j}"), j, j)).collect();
        let mut all_pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
        all_pairs.shuffle(&mut rng);
        let interactions = all_pairs[..pos]
            .iter()
            .map(|&(a, b)| (format!("p{a}"), format!("p{b}")))
            .collect();
        let edges = if rng.gen_bool(edgeless_fraction) {
            vec![]
        } else {
            let mut e: Vec<Edge> = (0..m).map(|j| Edge::new(m, j, "ARG")).collect();
            e.push(Edge::new(m, m + 1, "punct"));
            e
        };
        sentences.push(SentenceRecord {
            id: id.clone(),
            tokens,
            pos_tags: tags,
            entities,
            interactions,
        });
        deps.insert(id, edges);
    }
    (sentences, deps)
}
