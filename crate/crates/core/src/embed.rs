//! Pretrained word vectors, token lookup with a deterministic
//! out-of-vocabulary policy, and assembly of per-token input vectors.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{PROT1, PROT2, PROTX};
use crate::features::{POSITION_DIM, POS_CLASSES};

pub const DEFAULT_EMBEDDING_DIM: usize = 200;
/// Components of generated vectors are uniform in `[-OOV_RANGE, OOV_RANGE]`.
pub const OOV_RANGE: f64 = 0.05;
pub const DEFAULT_OOV_SEED: u64 = 0x5D9_1A57;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("{what}: expected dimension {expected}, found {found}")]
    SegmentMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Word → vector table. Lookups never fail: unknown tokens receive a
/// vector derived from a hash of the token and `oov_seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    dim: usize,
    vocab: HashMap<String, Vec<f64>>,
    pub oov_seed: u64,
    /// Rows dropped because their word was already present.
    pub duplicates: usize,
    /// Vectors for the generalization tokens, drawn once from `oov_seed`.
    specials: HashMap<String, Vec<f64>>,
}

fn hashed_vector(dim: usize, seed: u64, domain: &str, token: &str) -> Vec<f64> {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(domain.as_bytes());
    h.update([0u8]);
    h.update(token.as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(digest);
    (0..dim).map(|_| rng.gen_range(-OOV_RANGE..=OOV_RANGE)).collect()
}

impl EmbeddingTable {
    pub fn new(dim: usize, oov_seed: u64) -> Self {
        let specials = [PROT1, PROT2, PROTX]
            .into_iter()
            .map(|t| (t.to_owned(), hashed_vector(dim, oov_seed, "special", t)))
            .collect();
        EmbeddingTable {
            dim,
            vocab: HashMap::new(),
            oov_seed,
            duplicates: 0,
            specials,
        }
    }

    /// Builds a table from in-memory rows; later duplicates are counted and dropped.
    pub fn from_rows<I>(dim: usize, oov_seed: u64, rows: I) -> Result<Self, EmbedError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut t = EmbeddingTable::new(dim, oov_seed);
        for (i, (w, v)) in rows.into_iter().enumerate() {
            if v.len() != dim {
                return Err(EmbedError::DimensionMismatch {
                    line: i + 1,
                    expected: dim,
                    found: v.len(),
                });
            }
            t.insert(w, v);
        }
        Ok(t)
    }

    fn insert(&mut self, word: String, v: Vec<f64>) {
        use std::collections::hash_map::Entry;
        match self.vocab.entry(word) {
            Entry::Occupied(_) => self.duplicates += 1,
            Entry::Vacant(e) => {
                e.insert(v);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocab.contains_key(word)
    }

    pub fn special(&self, token: &str) -> Option<&[f64]> {
        self.specials.get(token).map(Vec::as_slice)
    }

    /// Exact match, then the lowercased form, then a generated vector.
    /// Generalization tokens always use their own persisted vectors.
    pub fn lookup(&self, token: &str) -> Vec<f64> {
        if let Some(v) = self.specials.get(token) {
            return v.clone();
        }
        if let Some(v) = self.vocab.get(token) {
            return v.clone();
        }
        let lower = token.to_lowercase();
        if let Some(v) = self.vocab.get(&lower) {
            return v.clone();
        }
        hashed_vector(self.dim, self.oov_seed, "oov", token)
    }

    /// Writes the table in word2vec text format, words sorted.
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.vocab.len(), self.dim)?;
        let mut words: Vec<&String> = self.vocab.keys().collect();
        words.sort();
        for word in words {
            write!(w, "{word}")?;
            for v in &self.vocab[word] {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Reads word2vec text format: a `<count> <dim>` header, then one
/// `<word> <v1> ... <vD>` row per line.
pub fn read_embeddings<R: BufRead>(reader: R, oov_seed: u64) -> Result<EmbeddingTable, EmbedError> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) => {
                let l = l?;
                if !l.trim().is_empty() {
                    break l;
                }
            }
            None => {
                return Err(EmbedError::Format {
                    line: 1,
                    reason: "missing header".into(),
                })
            }
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parsed: Option<(usize, usize)> = match fields.as_slice() {
        [n, d] => n.parse().ok().zip(d.parse().ok()),
        _ => None,
    };
    let (declared, dim) = parsed.ok_or_else(|| EmbedError::Format {
        line: 1,
        reason: format!("header must be `<vocab_size> <dimension>`, got `{header}`"),
    })?;
    if dim == 0 {
        return Err(EmbedError::Format {
            line: 1,
            reason: "dimension must be positive".into(),
        });
    }

    let mut table = EmbeddingTable::new(dim, oov_seed);
    let mut rows = 0usize;
    for (idx, line) in lines {
        let line = line?;
        let line_no = idx + 1;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let values = parts
            .map(|p| {
                p.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| EmbedError::Format {
                        line: line_no,
                        reason: format!("bad value `{p}`"),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() != dim {
            return Err(EmbedError::DimensionMismatch {
                line: line_no,
                expected: dim,
                found: values.len(),
            });
        }
        table.insert(word.to_owned(), values);
        rows += 1;
    }
    if rows != declared {
        log::warn!("embedding header declares {declared} rows, file has {rows}");
    }
    if table.duplicates > 0 {
        log::warn!("{} duplicate embedding rows ignored", table.duplicates);
    }
    Ok(table)
}

/// Loads a word2vec text file; names ending in `.gz` are decompressed.
pub fn load_embeddings(path: impl AsRef<Path>, oov_seed: u64) -> Result<EmbeddingTable, EmbedError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => EmbedError::FileNotFound(path.to_owned()),
        _ => EmbedError::Io(e),
    })?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    read_embeddings(BufReader::new(reader), oov_seed)
}

/// Segment widths of a token vector. A zero width drops the segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub word: usize,
    pub pos: usize,
    pub position: usize,
}

impl Default for FeatureLayout {
    fn default() -> Self {
        FeatureLayout {
            word: DEFAULT_EMBEDDING_DIM,
            pos: POS_CLASSES,
            position: POSITION_DIM,
        }
    }
}

impl FeatureLayout {
    /// Word, PoS, then the position codes for each of the two targets.
    pub fn total(&self) -> usize {
        self.word + self.pos + 2 * self.position
    }

    pub fn pos_range(&self) -> std::ops::Range<usize> {
        self.word..self.word + self.pos
    }

    pub fn position1_range(&self) -> std::ops::Range<usize> {
        let s = self.word + self.pos;
        s..s + self.position
    }

    pub fn position2_range(&self) -> std::ops::Range<usize> {
        let s = self.word + self.pos + self.position;
        s..s + self.position
    }
}

/// Input vector `x_k` of one path token.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenVector(pub Vec<f64>);

impl TokenVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Concatenates the four segments after checking each against `layout`.
pub fn assemble_with(
    layout: &FeatureLayout,
    word: &[f64],
    pos: &[f64],
    position1: &[f64],
    position2: &[f64],
) -> Result<TokenVector, EmbedError> {
    let check = |what, expected: usize, v: &[f64]| {
        if v.len() == expected {
            Ok(())
        } else {
            Err(EmbedError::SegmentMismatch {
                what,
                expected,
                found: v.len(),
            })
        }
    };
    check("word vector", layout.word, word)?;
    check("PoS code", layout.pos, pos)?;
    check("first position code", layout.position, position1)?;
    check("second position code", layout.position, position2)?;
    let mut out = Vec::with_capacity(layout.total());
    out.extend_from_slice(word);
    out.extend_from_slice(pos);
    out.extend_from_slice(position1);
    out.extend_from_slice(position2);
    Ok(TokenVector(out))
}

/// [`assemble_with`] under the default 200/8/10/10 layout.
pub fn assemble(word: &[f64], pos: &[f64], position1: &[f64], position2: &[f64]) -> Result<TokenVector, EmbedError> {
    assemble_with(&FeatureLayout::default(), word, pos, position1, position2)
}
