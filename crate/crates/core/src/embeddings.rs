//! Node vocabulary and the embedding lookup table.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deppath::{NodeKind, NodeSequence};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const PAD_TOKEN: &str = "<PAD>";
pub const UNK_TOKEN: &str = "<UNK>";

/// Half-width of the uniform range for vectors not found in the pretrained file.
pub const INIT_RANGE: f64 = 0.25;

/// Node string to index. Words, arrows and labels share one index space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    is_word: Vec<bool>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocab {
    /// Only the reserved entries.
    pub fn new() -> Self {
        let mut v = Vocab {
            nodes: Vec::new(),
            index: HashMap::new(),
            is_word: Vec::new(),
        };
        v.insert(PAD_TOKEN, false);
        v.insert(UNK_TOKEN, false);
        v
    }

    fn insert(&mut self, node: &str, is_word: bool) -> usize {
        if let Some(&i) = self.index.get(node) {
            self.is_word[i] |= is_word;
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(node.to_string());
        self.index.insert(node.to_string(), i);
        self.is_word.push(is_word);
        i
    }

    /// Rebuilds a vocabulary from its entries in index order (model files).
    pub fn from_entries(entries: impl IntoIterator<Item = (String, bool)>) -> Result<Self> {
        let mut v = Vocab {
            nodes: Vec::new(),
            index: HashMap::new(),
            is_word: Vec::new(),
        };
        for (node, is_word) in entries {
            if v.index.contains_key(&node) {
                return Err(Error::Format(format!("duplicate vocabulary entry {node:?}")));
            }
            v.insert(&node, is_word);
        }
        if v.nodes.get(PAD).map(String::as_str) != Some(PAD_TOKEN)
            || v.nodes.get(UNK).map(String::as_str) != Some(UNK_TOKEN)
        {
            return Err(Error::Format("vocabulary must start with <PAD> and <UNK>".into()));
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, node: &str) -> Option<usize> {
        self.index.get(node).copied()
    }

    pub fn lookup(&self, node: &str) -> usize {
        self.get(node).unwrap_or(UNK)
    }

    pub fn node(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    /// Whether entry `i` ever occurred as a word node.
    pub fn is_word(&self, i: usize) -> bool {
        self.is_word[i]
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, bool)> {
        self.nodes.iter().map(String::as_str).zip(self.is_word.iter().copied())
    }
}

/// Indexes every node occurring at least `min_count` times, in order of first
/// occurrence.
pub fn build_vocab<'a>(sequences: impl IntoIterator<Item = &'a NodeSequence>, min_count: usize) -> Vocab {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<(&str, bool)> = Vec::new();
    let mut word_seen: HashMap<&str, bool> = HashMap::new();
    for seq in sequences {
        for node in seq.nodes() {
            let c = counts.entry(node.text.as_str()).or_insert(0);
            if *c == 0 {
                order.push((node.text.as_str(), false));
            }
            *c += 1;
            *word_seen.entry(node.text.as_str()).or_insert(false) |= node.kind == NodeKind::Word;
        }
    }
    let mut vocab = Vocab::new();
    for (node, _) in order {
        if counts[node] >= min_count.max(1) {
            vocab.insert(node, word_seen[node]);
        }
    }
    vocab
}

pub fn indexify(s: &NodeSequence, vocab: &Vocab) -> Vec<usize> {
    s.texts().map(|t| vocab.lookup(t)).collect()
}

/// The `d × |V|` lookup matrix. Column `j` is the vector of node `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable<T> {
    dim: usize,
    /// Column-major: column `j` occupies `data[j*dim..(j+1)*dim]`.
    data: Vec<T>,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn zeros(dim: usize, columns: usize) -> Self {
        EmbeddingTable {
            dim,
            data: vec![T::zero(); dim * columns],
        }
    }

    pub fn from_columns(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::Dimension(format!("{} values do not form {dim}-dimensional columns", data.len())));
        }
        Ok(EmbeddingTable { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn columns(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn frobenius_sq(&self) -> T {
        self.data.iter().map(|&v| v * v).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coverage {
    pub words: usize,
    pub matched: usize,
}

impl Coverage {
    /// Fraction of word nodes that took a pretrained vector; 1 when there
    /// are no word nodes.
    pub fn fraction(&self) -> f64 {
        if self.words == 0 {
            1.0
        } else {
            self.matched as f64 / self.words as f64
        }
    }
}

/// Samples every column uniformly from `[-0.25, 0.25]`, overwrites word
/// columns found in `pretrained`, then zeroes the PAD column.
pub fn init_embeddings<T: Scalar>(
    vocab: &Vocab,
    pretrained: Option<&Path>,
    dim: usize,
    seed: u64,
) -> Result<(EmbeddingTable<T>, Coverage)> {
    if dim == 0 {
        return Err(Error::Config("embedding dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..dim * vocab.len())
        .map(|_| T::of(rng.gen_range(-INIT_RANGE..=INIT_RANGE)))
        .collect();
    let mut table = EmbeddingTable { dim, data };

    let mut coverage = Coverage {
        words: (0..vocab.len()).filter(|&i| vocab.is_word(i)).count(),
        matched: 0,
    };
    if let Some(path) = pretrained {
        let mut seen = vec![false; vocab.len()];
        for_each_pretrained(path, dim, |node, values| {
            if let Some(j) = vocab.get(node).filter(|&j| vocab.is_word(j) && !seen[j]) {
                seen[j] = true;
                coverage.matched += 1;
                for (dst, v) in table.column_mut(j).iter_mut().zip(values) {
                    *dst = T::of(*v);
                }
            }
        })?;
    }
    table.column_mut(PAD).fill(T::zero());
    Ok((table, coverage))
}

fn for_each_pretrained(path: &Path, dim: usize, mut f: impl FnMut(&str, &[f64])) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::with_capacity(dim);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut parts = line.split_whitespace();
        let Some(node) = parts.next() else { continue };
        values.clear();
        for p in parts {
            let v: f64 = p.parse().map_err(|_| {
                Error::Format(format!("{}:{}: bad number {p:?}", path.display(), i + 1))
            })?;
            values.push(v);
        }
        if values.len() != dim {
            return Err(Error::Dimension(format!(
                "{}:{}: {} values, expected {dim}",
                path.display(),
                i + 1,
                values.len()
            )));
        }
        f(node, &values);
    }
    Ok(())
}
