//! Annotated sentence corpora, candidate pair generation, entity
//! generalization and cross-validation fold assignment.
//!
//! The corpus file is line oriented. Each record carries four tab separated
//! fields:
//!
//! ```text
//! id<TAB>token|pos token|pos ...<TAB>entityId:start:end;...<TAB>idA-idB;idC-idD
//! ```
//!
//! Entity spans are inclusive token ranges. The interaction field may be
//! empty. Blank lines and lines starting with `#` are ignored.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Placeholder for the first protein of the target pair.
pub const PROT1: &str = "PROT1";
/// Placeholder for the second protein of the target pair.
pub const PROT2: &str = "PROT2";
/// Placeholder for every other protein mention.
pub const PROTX: &str = "PROTX";

/// PoS tag given to a collapsed entity token.
pub const GENERALIZED_TAG: &str = "NN";

const RESERVED: [&str; 3] = [PROT1, PROT2, PROTX];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus file not found: {0}")]
    FileNotFound(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: duplicate sentence id `{id}`")]
    DuplicateSentenceId { line: usize, id: String },

    #[error("entity `{entity}` is not part of sentence `{sentence}`")]
    EntityNotInSentence { sentence: String, entity: String },

    #[error("cannot split {instances} instances into {k} folds")]
    BadK { k: usize, instances: usize },

    #[error("duplicate instance id `{0}`")]
    DuplicateInstanceId(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub start: usize,
    /// Inclusive.
    pub end: usize,
}

impl Entity {
    pub fn new(id: impl Into<String>, start: usize, end: usize) -> Self {
        Entity {
            id: id.into(),
            start,
            end,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn overlaps(&self, other: &Entity) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// A tokenized, PoS tagged sentence with its protein mentions and the gold
/// interacting pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    pub tokens: Vec<String>,
    pub pos_tags: Vec<String>,
    pub entities: Vec<Entity>,
    pub interactions: Vec<(String, String)>,
}

impl SentenceRecord {
    /// Checks every structural invariant of a record. Reserved placeholder
    /// tokens are not checked here; see [`SentenceRecord::check_reserved`].
    pub fn validate(&self) -> Result<(), String> {
        if self.tokens.len() != self.pos_tags.len() {
            return Err(format!(
                "{} tokens but {} PoS tags",
                self.tokens.len(),
                self.pos_tags.len()
            ));
        }
        let mut ids = HashSet::new();
        for e in &self.entities {
            if e.start > e.end {
                return Err(format!("entity `{}` has start {} > end {}", e.id, e.start, e.end));
            }
            if e.end >= self.tokens.len() {
                return Err(format!(
                    "entity `{}` span {}..={} exceeds {} tokens",
                    e.id,
                    e.start,
                    e.end,
                    self.tokens.len()
                ));
            }
            if !ids.insert(e.id.as_str()) {
                return Err(format!("duplicate entity id `{}`", e.id));
            }
        }
        for (i, a) in self.entities.iter().enumerate() {
            for b in &self.entities[i + 1..] {
                if a.overlaps(b) {
                    return Err(format!("entities `{}` and `{}` overlap", a.id, b.id));
                }
            }
        }
        for (a, b) in &self.interactions {
            if a == b {
                return Err(format!("interaction `{a}-{b}` pairs an entity with itself"));
            }
            for id in [a, b] {
                if !ids.contains(id.as_str()) {
                    return Err(format!("interaction references undeclared entity `{id}`"));
                }
            }
        }
        Ok(())
    }

    pub fn check_reserved(&self) -> Result<(), String> {
        match self.tokens.iter().find(|t| RESERVED.contains(&t.as_str())) {
            Some(t) => Err(format!("token `{t}` is a reserved placeholder")),
            None => Ok(()),
        }
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn interacts(&self, a: &str, b: &str) -> bool {
        self.interactions
            .iter()
            .any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    /// Serializes the record into one corpus line (without newline).
    pub fn to_line(&self) -> String {
        let tokens = self
            .tokens
            .iter()
            .zip(&self.pos_tags)
            .map(|(t, p)| format!("{t}|{p}"))
            .collect::<Vec<_>>()
            .join(" ");
        let entities = self
            .entities
            .iter()
            .map(|e| format!("{}:{}:{}", e.id, e.start, e.end))
            .collect::<Vec<_>>()
            .join(";");
        let interactions = self
            .interactions
            .iter()
            .map(|(a, b)| format!("{a}-{b}"))
            .collect::<Vec<_>>()
            .join(";");
        format!("{}\t{}\t{}\t{}", self.id, tokens, entities, interactions)
    }

    /// Parses a single corpus line. `line_no` is only used for error positions.
    pub fn parse_line(line: &str, line_no: usize) -> Result<SentenceRecord, CorpusError> {
        let err = |reason: String| CorpusError::Parse { line: line_no, reason };

        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(err("empty sentence id".to_owned()));
        }

        let mut tokens = Vec::new();
        let mut pos_tags = Vec::new();
        for item in fields[1].split(' ').filter(|s| !s.is_empty()) {
            let (tok, pos) = item
                .split_once('|')
                .ok_or_else(|| err(format!("token `{item}` lacks a `|pos` suffix")))?;
            if tok.is_empty() || pos.is_empty() || pos.contains('|') {
                return Err(err(format!("malformed token `{item}`")));
            }
            if tok.contains([';', ':']) || pos.contains([';', ':']) {
                return Err(err(format!("token `{item}` contains `;` or `:`")));
            }
            tokens.push(tok.to_owned());
            pos_tags.push(pos.to_owned());
        }
        if tokens.is_empty() {
            return Err(err("sentence has no tokens".to_owned()));
        }

        let mut entities = Vec::new();
        for item in fields[2].split(';').filter(|s| !s.is_empty()) {
            let parts: Vec<&str> = item.split(':').collect();
            if parts.len() != 3 || parts[0].is_empty() {
                return Err(err(format!("malformed entity `{item}`")));
            }
            let start = parts[1]
                .parse::<usize>()
                .map_err(|_| err(format!("bad start index in `{item}`")))?;
            let end = parts[2]
                .parse::<usize>()
                .map_err(|_| err(format!("bad end index in `{item}`")))?;
            entities.push(Entity::new(parts[0], start, end));
        }

        let mut interactions = Vec::new();
        if let Some(field) = fields.get(3) {
            for item in field.split(';').filter(|s| !s.trim().is_empty()) {
                let item = item.trim();
                let (a, b) = split_interaction(item, &entities).map_err(err)?;
                interactions.push((a.to_owned(), b.to_owned()));
            }
        }

        let record = SentenceRecord {
            id: id.to_owned(),
            tokens,
            pos_tags,
            entities,
            interactions,
        };
        record.validate().map_err(err)?;
        record.check_reserved().map_err(err)?;
        Ok(record)
    }
}

/// Reads a corpus from any reader.
/// Splits `idA-idB` at the hyphen whose two sides are both declared entity
/// ids, so ids may themselves contain hyphens.
fn split_interaction<'a>(item: &'a str, entities: &[Entity]) -> Result<(&'a str, &'a str), String> {
    let declared = |id: &str| entities.iter().any(|e| e.id == id);
    let splits: Vec<(&str, &str)> = item
        .match_indices('-')
        .map(|(i, _)| (&item[..i], &item[i + 1..]))
        .filter(|(a, b)| !a.is_empty() && !b.is_empty())
        .collect();
    let known: Vec<(&str, &str)> = splits
        .iter()
        .copied()
        .filter(|(a, b)| declared(a) && declared(b))
        .collect();
    match (known.as_slice(), splits.first()) {
        ([one], _) => Ok(*one),
        ([], Some(first)) => Ok(*first),
        ([], None) => Err(format!("malformed interaction `{item}`")),
        _ => Err(format!("ambiguous interaction `{item}`")),
    }
}

pub fn read_corpus<R: Read>(reader: R) -> Result<Vec<SentenceRecord>, CorpusError> {
    let reader = BufReader::new(reader);
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record = SentenceRecord::parse_line(trimmed, line_no)?;
        if !seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateSentenceId {
                line: line_no,
                id: record.id,
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<SentenceRecord>, CorpusError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CorpusError::FileNotFound(path.display().to_string()),
        _ => CorpusError::Io(e),
    })?;
    read_corpus(file)
}

pub fn write_corpus<W: Write>(mut w: W, records: &[SentenceRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_line())?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Interacting,
    NonInteracting,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Interacting
    }

    /// Class index used by the classifier head (positive class is 1).
    pub fn index(self) -> usize {
        match self {
            Label::Interacting => 1,
            Label::NonInteracting => 0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Interacting => write!(f, "Interacting"),
            Label::NonInteracting => write!(f, "NonInteracting"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePair {
    pub sentence_id: String,
    pub prot1: String,
    pub prot2: String,
    pub label: Label,
}

impl CandidatePair {
    /// Stable identifier `sentence:prot1:prot2`.
    pub fn instance_id(&self) -> String {
        format!("{}:{}:{}", self.sentence_id, self.prot1, self.prot2)
    }
}

/// Enumerates every unordered entity pair of the sentence. Entities are
/// ordered by their first token, so `prot1` always precedes `prot2`.
pub fn generate_candidates(s: &SentenceRecord) -> Vec<CandidatePair> {
    let mut ordered: Vec<&Entity> = s.entities.iter().collect();
    ordered.sort_by_key(|e| e.start);

    let mut pairs = Vec::with_capacity(ordered.len() * ordered.len().saturating_sub(1) / 2);
    for (i, a) in ordered.iter().enumerate() {
        for b in &ordered[i + 1..] {
            let label = if s.interacts(&a.id, &b.id) {
                Label::Interacting
            } else {
                Label::NonInteracting
            };
            pairs.push(CandidatePair {
                sentence_id: s.id.clone(),
                prot1: a.id.clone(),
                prot2: b.id.clone(),
                label,
            });
        }
    }
    pairs
}

/// Result of [`generalize_with_map`]: the rewritten sentence plus the
/// mapping from original token positions to rewritten ones.
#[derive(Clone, Debug)]
pub struct Generalized {
    pub sentence: SentenceRecord,
    pub index_map: Vec<usize>,
}

/// Replaces each entity span by a single placeholder token.
pub fn generalize(s: &SentenceRecord, pair: &CandidatePair) -> Result<SentenceRecord, CorpusError> {
    generalize_with_map(s, pair).map(|g| g.sentence)
}

pub fn generalize_with_map(s: &SentenceRecord, pair: &CandidatePair) -> Result<Generalized, CorpusError> {
    for id in [&pair.prot1, &pair.prot2] {
        if s.entity(id).is_none() {
            return Err(CorpusError::EntityNotInSentence {
                sentence: s.id.clone(),
                entity: id.clone(),
            });
        }
    }

    // entity index covering each original token
    let mut owner: Vec<Option<usize>> = vec![None; s.tokens.len()];
    for (ei, e) in s.entities.iter().enumerate() {
        for slot in &mut owner[e.start..=e.end] {
            *slot = Some(ei);
        }
    }

    let mut tokens = Vec::with_capacity(s.tokens.len());
    let mut pos_tags = Vec::with_capacity(s.tokens.len());
    let mut index_map = Vec::with_capacity(s.tokens.len());
    let mut new_start = vec![0usize; s.entities.len()];

    let mut i = 0;
    while i < s.tokens.len() {
        match owner[i] {
            Some(ei) => {
                let e = &s.entities[ei];
                let placeholder = if e.id == pair.prot1 {
                    PROT1
                } else if e.id == pair.prot2 {
                    PROT2
                } else {
                    PROTX
                };
                new_start[ei] = tokens.len();
                for _ in e.start..=e.end {
                    index_map.push(tokens.len());
                }
                tokens.push(placeholder.to_owned());
                pos_tags.push(GENERALIZED_TAG.to_owned());
                i = e.end + 1;
            }
            None => {
                index_map.push(tokens.len());
                tokens.push(s.tokens[i].clone());
                pos_tags.push(s.pos_tags[i].clone());
                i += 1;
            }
        }
    }

    let entities = s
        .entities
        .iter()
        .zip(&new_start)
        .map(|(e, &start)| Entity::new(e.id.clone(), start, start))
        .collect();

    Ok(Generalized {
        sentence: SentenceRecord {
            id: s.id.clone(),
            tokens,
            pos_tags,
            entities,
            interactions: s.interactions.clone(),
        },
        index_map,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub assignments: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignments.get(id).copied()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignments.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles the ids with a ChaCha stream seeded by `seed` and deals them
/// round-robin into `k` folds.
pub fn split_folds(ids: &[String], k: usize, seed: u64) -> Result<FoldAssignment, CorpusError> {
    if k < 2 || k > ids.len() {
        return Err(CorpusError::BadK {
            k,
            instances: ids.len(),
        });
    }
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(CorpusError::DuplicateInstanceId(id.clone()));
        }
    }

    let mut order: Vec<usize> = (0..ids.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let assignments = order
        .iter()
        .enumerate()
        .map(|(pos, &idx)| (ids[idx].clone(), pos % k))
        .collect();
    Ok(FoldAssignment { k, assignments })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassStats {
    pub positives: usize,
    pub negatives: usize,
}

impl ClassStats {
    /// negatives / positives rounded to one decimal; 0 without positives.
    pub fn ratio(&self) -> f64 {
        if self.positives == 0 {
            return 0.0;
        }
        let r = self.negatives as f64 / self.positives as f64;
        (r * 10.0).round() / 10.0
    }

    pub fn total(&self) -> usize {
        self.positives + self.negatives
    }
}

impl fmt::Display for ClassStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "positives={} negatives={} ratio=1:{:.1}",
            self.positives,
            self.negatives,
            self.ratio()
        )
    }
}

pub fn class_stats(pairs: &[CandidatePair]) -> ClassStats {
    let positives = pairs.iter().filter(|p| p.label.is_positive()).count();
    ClassStats {
        positives,
        negatives: pairs.len() - positives,
    }
}

/// All candidate pairs of a corpus, in corpus order.
pub fn corpus_candidates(corpus: &[SentenceRecord]) -> Vec<CandidatePair> {
    corpus.iter().flat_map(generate_candidates).collect()
}

pub(crate) fn index_by_id(corpus: &[SentenceRecord]) -> HashMap<&str, &SentenceRecord> {
    corpus.iter().map(|s| (s.id.as_str(), s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const RHO_SENTENCE: &str = "s1\tBnrlp|NN interacts|VBZ with|IN another|DT Rho|NN family|NN member|NN ,|, Rho4p|NN ,|, but|CC not|RB with|IN Rho1p|NN .|.\tBnrlp:0:0;Rho4p:8:8;Rho1p:13:13\tBnrlp-Rho4p";

    fn rho_sentence() -> SentenceRecord {
        SentenceRecord::parse_line(RHO_SENTENCE, 1).unwrap()
    }

    #[test]
    fn parses_rho_sentence() {
        let records = read_corpus(RHO_SENTENCE.as_bytes()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].entities.len(), 3);
        assert_eq!(records[0].interactions, vec![("Bnrlp".into(), "Rho4p".into())]);
        assert_eq!(records[0].tokens.len(), records[0].pos_tags.len());
    }

    #[test]
    fn empty_input_is_empty_corpus() {
        assert!(read_corpus("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn undeclared_interaction_is_positioned_error() {
        let text = format!("# header\n{}\ns2\tA|NN B|NN\tA:0:0;B:1:1\tA-C\n", RHO_SENTENCE);
        match read_corpus(text.as_bytes()) {
            Err(CorpusError::Parse { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("undeclared"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hyphenated_entity_ids() {
        let s =
            SentenceRecord::parse_line("h\tStat3|NN binds|VBZ IL-10|NN\tStat3:0:0;IL-10:2:2\tStat3-IL-10", 1).unwrap();
        assert_eq!(s.interactions, [("Stat3".to_owned(), "IL-10".to_owned())]);
        assert!(s.interacts("IL-10", "Stat3"));

        let ambiguous = "h\ta|NN b|NN c|NN d|NN\ta:0:0;a-b:1:1;b-c:2:2;c:3:3\ta-b-c";
        match SentenceRecord::parse_line(ambiguous, 1) {
            Err(CorpusError::Parse { reason, .. }) => assert!(reason.contains("ambiguous"), "{reason}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_records() {
        let cases = [
            "s\tA|NN B|NN\tA:0:0;B:1:2\t",    // span out of range
            "s\tA|NN B|NN\tA:0:1;B:1:1\t",    // overlap
            "s\tA|NN B|NN\tA:1:0\t",          // start > end
            "s\tA|NN PROT1|NN\tA:0:0\t",      // reserved word
            "s\tA B|NN\tA:0:0\t",             // missing pos
            "s\tA|NN B|NN\tA:0:0;A:1:1\t",    // duplicate entity id
            "s\tA|NN B|NN\tA:0:0;B:1:1\tA-A", // self interaction
            "s\tA|NN",                        // too few fields
        ];
        for case in cases {
            assert!(
                matches!(read_corpus(case.as_bytes()), Err(CorpusError::Parse { line: 1, .. })),
                "accepted {case:?}"
            );
        }
    }

    #[test]
    fn duplicate_sentence_ids_rejected() {
        let text = "s\tA|NN\tA:0:0\t\ns\tB|NN\tB:0:0\t\n";
        assert!(matches!(
            read_corpus(text.as_bytes()),
            Err(CorpusError::DuplicateSentenceId { line: 2, .. })
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_corpus("/nonexistent/corpus.tsv"),
            Err(CorpusError::FileNotFound(_))
        ));
    }

    #[test]
    fn line_round_trip() {
        let r = rho_sentence();
        assert_eq!(SentenceRecord::parse_line(&r.to_line(), 1).unwrap(), r);
    }

    #[test]
    fn candidates_for_rho_sentence() {
        let pairs = generate_candidates(&rho_sentence());
        assert_eq!(pairs.len(), 3);
        let positives: Vec<_> = pairs.iter().filter(|p| p.label.is_positive()).collect();
        assert_eq!(positives.len(), 1);
        assert_eq!(
            (positives[0].prot1.as_str(), positives[0].prot2.as_str()),
            ("Bnrlp", "Rho4p")
        );
    }

    #[test]
    fn candidates_small_cases() {
        let one = SentenceRecord::parse_line("s\tA|NN b|VB\tA:0:0\t", 1).unwrap();
        assert!(generate_candidates(&one).is_empty());

        // listed in reverse order: the pair still matches
        let four = SentenceRecord::parse_line("s\tA|NN B|NN C|NN D|NN\tD:3:3;A:0:0;B:1:1;C:2:2\tC-B", 1).unwrap();
        let pairs = generate_candidates(&four);
        assert_eq!(pairs.len(), 6);
        assert_eq!(
            class_stats(&pairs),
            ClassStats {
                positives: 1,
                negatives: 5
            }
        );
        for p in &pairs {
            let a = four.entity(&p.prot1).unwrap().start;
            let b = four.entity(&p.prot2).unwrap().start;
            assert!(a < b);
        }
    }

    #[test]
    fn generalize_rho_sentence() {
        let s = rho_sentence();
        let pair = &generate_candidates(&s)[0];
        assert_eq!((pair.prot1.as_str(), pair.prot2.as_str()), ("Bnrlp", "Rho4p"));
        let g = generalize(&s, pair).unwrap();
        assert_eq!(
            g.tokens.join(" "),
            "PROT1 interacts with another Rho family member , PROT2 , but not with PROTX ."
        );
        assert_eq!(g.tokens.len(), s.tokens.len());
        assert!(g.validate().is_ok());
    }

    #[test]
    fn generalize_collapses_multi_token_spans() {
        let s = SentenceRecord::parse_line(
            "s\tmyosin|NN II|NN heavy|JJ chain|NN binds|VBZ cofilin|NN\tm:0:3;c:5:5\tm-c",
            1,
        )
        .unwrap();
        let pair = &generate_candidates(&s)[0];
        let g = generalize_with_map(&s, pair).unwrap();
        assert_eq!(g.sentence.tokens, vec!["PROT1", "binds", "PROT2"]);
        assert_eq!(g.sentence.pos_tags, vec!["NN", "VBZ", "NN"]);
        assert_eq!(g.index_map, vec![0, 0, 0, 0, 1, 2]);
        assert_eq!(g.sentence.entity("c").unwrap().start, 2);

        // idempotent
        let again = generalize(&g.sentence, pair).unwrap();
        assert_eq!(again, g.sentence);
    }

    #[test]
    fn generalize_unknown_entity() {
        let s = rho_sentence();
        let pair = CandidatePair {
            sentence_id: s.id.clone(),
            prot1: "Bnrlp".into(),
            prot2: "Nope".into(),
            label: Label::NonInteracting,
        };
        assert!(matches!(
            generalize(&s, &pair),
            Err(CorpusError::EntityNotInSentence { .. })
        ));
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("i{i}")).collect()
    }

    #[test]
    fn fold_sizes() {
        let a = split_folds(&ids(10), 10, 3).unwrap();
        assert_eq!(a.fold_sizes(), vec![1; 10]);

        let a = split_folds(&ids(4048), 10, 3).unwrap();
        let mut sizes = a.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![404, 404, 405, 405, 405, 405, 405, 405, 405, 405]);
        assert_eq!(a.assignments.len(), 4048);
    }

    #[test]
    fn folds_are_deterministic() {
        let a = split_folds(&ids(57), 5, 11).unwrap();
        let b = split_folds(&ids(57), 5, 11).unwrap();
        assert_eq!(a, b);
        let c = split_folds(&ids(57), 5, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bad_k() {
        assert!(matches!(split_folds(&ids(3), 4, 0), Err(CorpusError::BadK { .. })));
        assert!(matches!(split_folds(&ids(3), 1, 0), Err(CorpusError::BadK { .. })));
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(
            split_folds(&dup, 2, 0),
            Err(CorpusError::DuplicateInstanceId(_))
        ));
    }

    #[test]
    fn class_stats_ratio() {
        assert_eq!(
            ClassStats {
                positives: 939,
                negatives: 3109
            }
            .ratio(),
            3.3
        );
        assert_eq!(
            ClassStats {
                positives: 1077,
                negatives: 5951
            }
            .ratio(),
            5.5
        );
        let empty = class_stats(&[]);
        assert_eq!((empty.positives, empty.negatives, empty.ratio()), (0, 0, 0.0));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn sentence(n_entities: usize, mask: u64) -> SentenceRecord {
        let tokens: Vec<String> = (0..n_entities * 2).map(|i| format!("w{i}")).collect();
        let pos_tags = vec!["NN".to_string(); tokens.len()];
        let entities: Vec<Entity> = (0..n_entities)
            .map(|i| Entity::new(format!("e{i}"), 2 * i, 2 * i))
            .collect();
        let mut interactions = Vec::new();
        let mut bit = 0;
        for i in 0..n_entities {
            for j in i + 1..n_entities {
                if mask >> (bit % 64) & 1 == 1 {
                    interactions.push((format!("e{j}"), format!("e{i}")));
                }
                bit += 1;
            }
        }
        SentenceRecord {
            id: "s".into(),
            tokens,
            pos_tags,
            entities,
            interactions,
        }
    }

    proptest! {
        #[test]
        fn candidate_count_is_n_choose_2(n in 0usize..12, mask in any::<u64>()) {
            let s = sentence(n, mask);
            let pairs = generate_candidates(&s);
            prop_assert_eq!(pairs.len(), n * n.saturating_sub(1) / 2);
            let stats = class_stats(&pairs);
            prop_assert_eq!(stats.total(), pairs.len());
            prop_assert_eq!(stats.positives, s.interactions.len());
        }

        #[test]
        fn folds_partition(n in 2usize..200, k in 2usize..12, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            let a = split_folds(&ids, k, seed).unwrap();
            prop_assert_eq!(a.assignments.len(), n);
            let sizes = a.fold_sizes();
            let max = *sizes.iter().max().unwrap();
            let min = *sizes.iter().min().unwrap();
            prop_assert!(max - min <= 1);
        }
    }
}
